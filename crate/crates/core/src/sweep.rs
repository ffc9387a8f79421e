//! Parameter sweeps over one or two of `lambda`, `delta_c`, `K`.
//!
//! Grid points are solved in parallel but always emitted in row-major grid
//! order, so output is deterministic. Failed points keep their coordinates
//! and carry a status instead of values. CSV floats use 17 significant
//! digits so every value round-trips exactly.

use crate::config::{MarketConfig, OpeningProfile, SolveOptions};
use crate::pricing::Regime;
use crate::search::{check_feasibility, SearchError};
use crate::solve_market;
use rayon::prelude::*;
use std::io::{self, Write};
use thiserror::Error;

pub const CSV_HEADER: &str = "lambda,delta_c,K,r_p,regime_10,regime_11,p_p_10,p_p_11,p_os,p_ms,a_star_n,a_star_o,Vn_10,Vo_11,delta_o_11,status";

const MAX_POINTS: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    BadSpec(String),
}

/// Parameters a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Lambda,
    DeltaC,
    SetupCost,
}

impl SweepParam {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "lambda" => Some(SweepParam::Lambda),
            "delta_c" => Some(SweepParam::DeltaC),
            "K" => Some(SweepParam::SetupCost),
            _ => None,
        }
    }

    pub fn apply(self, cfg: &mut MarketConfig, value: f64) {
        match self {
            SweepParam::Lambda => cfg.lambda = value,
            SweepParam::DeltaC => cfg.delta_c = value,
            SweepParam::SetupCost => cfg.setup_cost = value,
        }
    }
}

/// One swept axis: `steps` evenly spaced values over `[min, max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepAxis {
    fn value(&self, index: usize) -> f64 {
        if self.steps <= 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * index as f64 / (self.steps - 1) as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<SweepAxis>,
}

impl SweepSpec {
    // Negated comparison so NaN bounds fail validation.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(SweepError::BadSpec(format!(
                "need 1 or 2 axes, got {}",
                self.axes.len()
            )));
        }
        if self.axes.len() == 2 && self.axes[0].param == self.axes[1].param {
            return Err(SweepError::BadSpec("axes must vary distinct parameters".into()));
        }
        let mut total = 1usize;
        for axis in &self.axes {
            if axis.steps == 0 {
                return Err(SweepError::BadSpec("steps must be at least 1".into()));
            }
            if !(axis.min <= axis.max) {
                return Err(SweepError::BadSpec(format!(
                    "axis range [{}, {}] is empty",
                    axis.min, axis.max
                )));
            }
            total = total.saturating_mul(axis.steps);
        }
        if total > MAX_POINTS {
            return Err(SweepError::BadSpec(format!(
                "{total} grid points exceed the {MAX_POINTS} cap"
            )));
        }
        Ok(())
    }

    fn total(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }

    /// Row-major parameter assignments for grid point `index`.
    fn assign(&self, index: usize, cfg: &mut MarketConfig) {
        match self.axes.len() {
            1 => self.axes[0].param.apply(cfg, self.axes[0].value(index)),
            2 => {
                let inner = self.axes[1].steps;
                self.axes[0].param.apply(cfg, self.axes[0].value(index / inner));
                self.axes[1].param.apply(cfg, self.axes[1].value(index % inner));
            }
            _ => unreachable!("validated"),
        }
    }
}

/// Solver outputs captured per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct RowValues {
    pub r_p: f64,
    pub regime_10: Regime,
    pub regime_11: Regime,
    pub p_p_10: f64,
    pub p_p_11: f64,
    pub p_os: f64,
    pub p_ms: Option<f64>,
    pub a_star: (f64, f64),
    pub vn_10: f64,
    pub vo_11: f64,
    pub delta_o_11: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub delta_c: f64,
    pub setup_cost: f64,
    pub status: String,
    pub values: Option<RowValues>,
}

fn solve_point(cfg: &MarketConfig, opts: SolveOptions) -> SweepRow {
    let coords = |status: String, values| SweepRow {
        lambda: cfg.lambda,
        delta_c: cfg.delta_c,
        setup_cost: cfg.setup_cost,
        status,
        values,
    };
    if let Err(e) = cfg.validate() {
        return coords(format!("invalid: {e}"), None);
    }
    if !check_feasibility(cfg, opts.mode).hard_ok && !opts.lenient {
        return coords("infeasible".to_string(), None);
    }
    match solve_market(cfg, opts) {
        Ok(sol) => {
            let p10 = sol.profile(OpeningProfile::NEW_ONLY);
            let p11 = sol.profile(OpeningProfile::BOTH);
            let values = RowValues {
                r_p: p10.reservations.r_p.expect("physical reservation"),
                regime_10: p10.equilibrium.regime,
                regime_11: p11.equilibrium.regime,
                p_p_10: p10.equilibrium.prices.p.expect("physical price"),
                p_p_11: p11.equilibrium.prices.p.expect("physical price"),
                p_os: sol.thresholds.new_only,
                p_ms: sol.thresholds.both,
                a_star: sol.opening.selected_probabilities(),
                vn_10: sol.opening.payoffs[1][0].new_firm,
                vo_11: sol.opening.payoffs[1][1].old_firm,
                delta_o_11: sol.opening.incremental_old[1],
            };
            coords("ok".to_string(), Some(values))
        }
        Err(SearchError::NonConvergence { .. }) => coords("no_converge".to_string(), None),
        Err(e) => coords(format!("error: {e}"), None),
    }
}

/// Evaluate the grid. Points run in parallel; the returned rows follow
/// row-major grid order.
pub fn run_sweep(
    base: &MarketConfig,
    spec: &SweepSpec,
    opts: SolveOptions,
) -> Result<Vec<SweepRow>, SweepError> {
    spec.validate()?;
    let total = spec.total();
    let rows: Vec<SweepRow> = (0..total)
        .into_par_iter()
        .map(|index| {
            let mut cfg = base.clone();
            spec.assign(index, &mut cfg);
            solve_point(&cfg, opts)
        })
        .collect();
    Ok(rows)
}

/// 17-significant-digit float formatting (exact round-trip).
pub fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_full).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: &mut W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        let coords = format!(
            "{},{},{}",
            fmt_full(row.lambda),
            fmt_full(row.delta_c),
            fmt_full(row.setup_cost)
        );
        match &row.values {
            Some(v) => writeln!(
                out,
                "{coords},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                fmt_full(v.r_p),
                v.regime_10.label(),
                v.regime_11.label(),
                fmt_full(v.p_p_10),
                fmt_full(v.p_p_11),
                fmt_full(v.p_os),
                fmt_opt(v.p_ms),
                fmt_full(v.a_star.0),
                fmt_full(v.a_star.1),
                fmt_full(v.vn_10),
                fmt_full(v.vo_11),
                fmt_full(v.delta_o_11),
                row.status
            )?,
            None => writeln!(out, "{coords},,,,,,,,,,,,{}", row.status)?,
        }
    }
    Ok(())
}
