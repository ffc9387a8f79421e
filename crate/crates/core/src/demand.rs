//! Demand primitives: quantity demanded, per-consumer profit, monopoly
//! pricing and consumer surplus.
//!
//! Only the linear family is implemented; every downstream implicit equation
//! then has a closed-form inverse, which keeps the solvers exact and testable.
//! The enum leaves room for other decreasing, bounded demand curves.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DemandError {
    /// Marginal cost at or above the choke price: no price sells anything.
    #[error("degenerate demand: unit cost {cost} is not below the choke price {choke}")]
    DegenerateDemand { cost: f64, choke: f64 },
}

/// A demand curve `D(p)`, decreasing and bounded with a finite choke price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DemandSpec {
    /// `D(p) = max(0, intercept - slope * p)`.
    Linear { intercept: f64, slope: f64 },
}

impl DemandSpec {
    pub fn linear(intercept: f64, slope: f64) -> Self {
        DemandSpec::Linear { intercept, slope }
    }

    /// Quantity demanded at price `p`; zero at and beyond the choke price.
    pub fn demand(&self, p: f64) -> f64 {
        match *self {
            DemandSpec::Linear { intercept, slope } => (intercept - slope * p).max(0.0),
        }
    }

    /// The choke price `r` with `D(r) = 0`.
    pub fn choke_price(&self) -> f64 {
        match *self {
            DemandSpec::Linear { intercept, slope } => intercept / slope,
        }
    }

    /// Per-consumer profit `(p - c) * D(p)`; negative below cost.
    pub fn profit(&self, p: f64, cost: f64) -> f64 {
        (p - cost) * self.demand(p)
    }

    /// The unique profit-maximizing price for unit cost `c < r`.
    pub fn monopoly_price(&self, cost: f64) -> Result<f64, DemandError> {
        let choke = self.choke_price();
        if cost >= choke {
            return Err(DemandError::DegenerateDemand { cost, choke });
        }
        match *self {
            DemandSpec::Linear { .. } => Ok((choke + cost) / 2.0),
        }
    }

    /// Consumer surplus `S(p) = integral of D(t) dt from p up`; zero beyond
    /// the choke price.
    pub fn surplus(&self, p: f64) -> f64 {
        match *self {
            DemandSpec::Linear { intercept, slope } => {
                let q = (intercept - slope * p).max(0.0);
                q * q / (2.0 * slope)
            }
        }
    }

    /// Inverse of `surplus`: the price at which surplus equals `s`, clamped
    /// to `[0, r]`. `s <= 0` maps to the choke price, `s >= S(0)` to zero.
    pub fn surplus_inverse(&self, s: f64) -> f64 {
        match *self {
            DemandSpec::Linear { intercept, slope } => {
                if s <= 0.0 {
                    return self.choke_price();
                }
                let q = (2.0 * slope * s).sqrt().min(intercept);
                (intercept - q) / slope
            }
        }
    }

    /// Largest attainable surplus, `S(0)`.
    pub fn max_surplus(&self) -> f64 {
        self.surplus(0.0)
    }

    // Negated comparisons so NaN fails the check.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            DemandSpec::Linear { intercept, slope } => {
                if !(intercept > 0.0) || !(slope > 0.0) {
                    return Err(format!(
                        "linear demand requires intercept > 0 and slope > 0, got ({intercept}, {slope})"
                    ));
                }
                Ok(())
            }
        }
    }
}
