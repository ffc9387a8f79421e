//! Stage 1: the 2x2 virtual-shop opening game.
//!
//! Each cell's payoff comes from the solved price/reservation fixed point of
//! that opening profile. The module computes incremental profits of opening,
//! decomposes the incumbent's incremental into its economic effects
//! (cost reduction, market penetration, price discrimination) plus the
//! entrant's business-creating effect, enumerates pure equilibria with an
//! open-at-indifference tie-break, falls back to the mixed equilibrium when
//! no pure one exists, and cross-checks the outcome against the sign-rule
//! region predictions that apply at small and large cost reductions.

use crate::config::{MarketConfig, OpeningProfile, Shop};
use crate::search::SearchError;
use crate::thresholds;
use crate::ProfileSolution;

/// Net payoffs of one cell of the opening game.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellPayoff {
    pub new_firm: f64,
    pub old_firm: f64,
}

/// Incumbent-side effects of opening a virtual shop, conditional on the
/// entrant's action `d`.
///
/// Transfers are read off the cross-profile change in on-line consumer
/// masses: `lambda / m_c` consumers move over from the incumbent's own
/// physical shop (cost reduction), `lambda / m_p` from the entrant's virtual
/// shop (market penetration), and the physical price change on the off-line
/// mass is the price-discrimination effect. Their signed sum reconstructs the
/// incremental profit up to the setup cost.
#[derive(Debug, Clone, PartialEq)]
pub struct OldFirmEffects {
    pub opponent_open: bool,
    pub cost_reduction: f64,
    pub market_penetration: f64,
    pub price_discrimination: f64,
    /// `lambda / m_c` is the mass transferred from the physical shop.
    pub m_c: f64,
    /// `lambda / m_p` is the mass transferred from the entrant's shop.
    pub m_p: f64,
    pub cost_reduction_present: bool,
    pub market_penetration_present: bool,
    pub price_discrimination_present: bool,
    /// `cost_reduction + market_penetration + price_discrimination - K`
    /// minus the incremental profit; zero up to float error.
    pub identity_residual: f64,
}

/// Effects decomposition for both firms, per entrant/incumbent action `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectsBreakdown {
    /// Entrant's gross gain from opening, `pi_v * lambda / alpha`, given the
    /// incumbent plays `d` (index).
    pub business_creating: [f64; 2],
    pub old_firm: [OldFirmEffects; 2],
}

/// Region cases under which the sign rules predict the equilibrium profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionCase {
    /// Cost reduction below the 3/2-profit-ratio level.
    SmallCostReduction,
    /// Cost reduction above the critical level and a physical shop that
    /// would compete (threshold below the reservation price).
    LargeCostReductionCompeting,
}

/// Sign-rule prediction of the opening profile and its agreement with the
/// direct 2x2 solve. Diagnostic in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPrediction {
    pub case: Option<RegionCase>,
    pub predicted: Option<OpeningProfile>,
    pub agrees: Option<bool>,
}

/// Payoff-ordering checks that hold in each region case.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub case: Option<RegionCase>,
    pub holds: Option<bool>,
    pub details: String,
}

/// Equilibrium selection of the opening game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    Pure(OpeningProfile),
    /// Opening probabilities `(alpha_n, alpha_o)` making each rival
    /// indifferent.
    Mixed { alpha_n: f64, alpha_o: f64 },
}

/// Full outcome of the opening game.
#[derive(Debug, Clone, PartialEq)]
pub struct OpeningOutcome {
    /// `payoffs[a_n][a_o]`.
    pub payoffs: [[CellPayoff; 2]; 2],
    /// Incumbent's incremental profit of opening given the entrant plays `d`.
    pub incremental_old: [f64; 2],
    /// Entrant's incremental profit of opening given the incumbent plays `d`.
    pub incremental_new: [f64; 2],
    pub effects: EffectsBreakdown,
    pub pure_equilibria: Vec<OpeningProfile>,
    pub mixed_equilibrium: Option<(f64, f64)>,
    /// Deterministic pick: the pure equilibrium with the most shops open
    /// (entrant first on ties), falling back to the mixed equilibrium.
    pub selected: Selection,
    pub region: RegionPrediction,
    pub ordering: OrderingReport,
    /// Set when both stand-alone opening payoffs are negative, so staying out
    /// entirely is the equilibrium; outside the model's maintained range.
    pub no_entry_warning: Option<String>,
}

impl OpeningOutcome {
    /// Entrant's expected incremental profit when the incumbent opens with
    /// probability `alpha_o`.
    pub fn expected_incremental_new(&self, alpha_o: f64) -> f64 {
        alpha_o * self.incremental_new[1] + (1.0 - alpha_o) * self.incremental_new[0]
    }

    /// Incumbent's expected incremental profit when the entrant opens with
    /// probability `alpha_n`.
    pub fn expected_incremental_old(&self, alpha_n: f64) -> f64 {
        alpha_n * self.incremental_old[1] + (1.0 - alpha_n) * self.incremental_old[0]
    }

    pub fn selected_probabilities(&self) -> (f64, f64) {
        match self.selected {
            Selection::Pure(p) => (
                if p.new_opens { 1.0 } else { 0.0 },
                if p.old_opens { 1.0 } else { 0.0 },
            ),
            Selection::Mixed { alpha_n, alpha_o } => (alpha_n, alpha_o),
        }
    }
}

fn cell(profiles: &[ProfileSolution], profile: OpeningProfile) -> &ProfileSolution {
    profiles
        .iter()
        .find(|p| p.profile == profile)
        .expect("all four profiles solved")
}

/// Net payoffs per cell: gross expected profits minus the setup cost of each
/// virtual shop actually opened.
pub fn payoff_matrix(cfg: &MarketConfig, profiles: &[ProfileSolution]) -> [[CellPayoff; 2]; 2] {
    let mut payoffs = [[CellPayoff::default(); 2]; 2];
    for profile in OpeningProfile::all() {
        let eq = &cell(profiles, profile).equilibrium;
        let new_firm = if profile.new_opens {
            eq.new_firm_gross() - cfg.setup_cost
        } else {
            0.0
        };
        let old_firm = eq.old_firm_gross()
            - if profile.old_opens { cfg.setup_cost } else { 0.0 };
        payoffs[profile.new_opens as usize][profile.old_opens as usize] =
            CellPayoff { new_firm, old_firm };
    }
    payoffs
}

/// Incremental profits of opening a virtual shop, conditional on the rival's
/// action: `(entrant, incumbent)`, each indexed by the rival playing 0 or 1.
pub fn incremental_profits(payoffs: &[[CellPayoff; 2]; 2]) -> ([f64; 2], [f64; 2]) {
    let incremental_new = [payoffs[1][0].new_firm, payoffs[1][1].new_firm];
    let incremental_old = [
        payoffs[0][1].old_firm - payoffs[0][0].old_firm,
        payoffs[1][1].old_firm - payoffs[1][0].old_firm,
    ];
    (incremental_new, incremental_old)
}

/// On-line consumer mass buying at `shop` in a solved equilibrium.
fn online_mass(sol: &ProfileSolution, shop: Shop, lambda: f64) -> f64 {
    let share = sol.equilibrium.shares.get(shop).unwrap_or(0.0);
    if shop == Shop::Physical {
        (share - (1.0 - lambda)).max(0.0)
    } else {
        share
    }
}

/// Decompose the incumbent's incremental profits into the three effects and
/// compute the entrant's business-creating effect, for both rival actions.
pub fn effects_decomposition(
    cfg: &MarketConfig,
    profiles: &[ProfileSolution],
    payoffs: &[[CellPayoff; 2]; 2],
) -> EffectsBreakdown {
    const MASS_TOL: f64 = 1e-12;
    let lambda = cfg.lambda;
    let mut old_firm = Vec::with_capacity(2);
    let mut business_creating = [0.0; 2];
    for d in 0..2 {
        let new_opens = d == 1;
        let before = cell(profiles, OpeningProfile::new(new_opens, false));
        let after = cell(profiles, OpeningProfile::new(new_opens, true));

        let from_physical = (online_mass(before, Shop::Physical, lambda)
            - online_mass(after, Shop::Physical, lambda))
        .max(0.0);
        let from_entrant = (online_mass(before, Shop::VirtualNew, lambda)
            - online_mass(after, Shop::VirtualNew, lambda))
        .max(0.0);

        let pi_vo = after.equilibrium.per_consumer_profit.vo.unwrap_or(0.0);
        let pi_p_before = before.equilibrium.per_consumer_profit.p.expect("physical trades");
        let pi_p_after = after.equilibrium.per_consumer_profit.p.expect("physical trades");

        let cost_reduction = (pi_vo - pi_p_before) * from_physical;
        let market_penetration = pi_vo * from_entrant;
        let price_discrimination = (pi_p_after - pi_p_before) * (1.0 - lambda);

        let incremental = payoffs[d][1].old_firm - payoffs[d][0].old_firm;
        let identity_residual = cost_reduction + market_penetration + price_discrimination
            - cfg.setup_cost
            - incremental;

        old_firm.push(OldFirmEffects {
            opponent_open: new_opens,
            cost_reduction,
            market_penetration,
            price_discrimination,
            m_c: if from_physical > MASS_TOL { lambda / from_physical } else { f64::INFINITY },
            m_p: if from_entrant > MASS_TOL { lambda / from_entrant } else { f64::INFINITY },
            cost_reduction_present: from_physical > MASS_TOL,
            market_penetration_present: from_entrant > MASS_TOL,
            price_discrimination_present: (pi_p_after - pi_p_before).abs() > MASS_TOL,
            identity_residual,
        });

        // Entrant's gross gain from opening given the incumbent plays d.
        business_creating[d] = payoffs[1][d].new_firm + cfg.setup_cost;
    }
    EffectsBreakdown {
        business_creating,
        old_firm: [old_firm.remove(0), old_firm.remove(0)],
    }
}

/// Enumerate pure Nash equilibria with the open-at-indifference tie-break:
/// a firm only stays out when staying out is strictly better.
fn pure_equilibria(incr_new: &[f64; 2], incr_old: &[f64; 2]) -> Vec<OpeningProfile> {
    let mut out = Vec::new();
    for profile in OpeningProfile::all() {
        let a_n = profile.new_opens;
        let a_o = profile.old_opens;
        let new_ok = if a_n {
            incr_new[a_o as usize] >= 0.0
        } else {
            incr_new[a_o as usize] < 0.0
        };
        let old_ok = if a_o {
            incr_old[a_n as usize] >= 0.0
        } else {
            incr_old[a_n as usize] < 0.0
        };
        if new_ok && old_ok {
            out.push(profile);
        }
    }
    out
}

/// Mixed equilibrium of the 2x2 game: each firm mixes so the rival's
/// expected incremental profit is zero. Valid only when both probabilities
/// land in [0, 1].
fn mixed_equilibrium(incr_new: &[f64; 2], incr_old: &[f64; 2]) -> Option<(f64, f64)> {
    let denom_o = incr_old[0] - incr_old[1];
    let denom_n = incr_new[0] - incr_new[1];
    if denom_o.abs() < 1e-15 || denom_n.abs() < 1e-15 {
        return None;
    }
    let alpha_n = incr_old[0] / denom_o;
    let alpha_o = incr_new[0] / denom_n;
    if (0.0..=1.0).contains(&alpha_n) && (0.0..=1.0).contains(&alpha_o) {
        Some((alpha_n, alpha_o))
    } else {
        None
    }
}

fn region_case(cfg: &MarketConfig, r_p_new_only: f64) -> Option<RegionCase> {
    let three_halves = thresholds::cost_reduction_for_profit_ratio(1.5, cfg);
    if cfg.delta_c < three_halves {
        return Some(RegionCase::SmallCostReduction);
    }
    let critical = thresholds::critical_cost_reduction(cfg);
    let threshold = thresholds::competing_threshold_new_only(cfg.lambda, cfg);
    if cfg.delta_c > critical && threshold < r_p_new_only {
        return Some(RegionCase::LargeCostReductionCompeting);
    }
    None
}

fn region_prediction(
    case: Option<RegionCase>,
    incr_new: &[f64; 2],
    incr_old: &[f64; 2],
    pure: &[OpeningProfile],
) -> RegionPrediction {
    let predicted = match case {
        Some(RegionCase::SmallCostReduction) => Some(if incr_old[1] >= 0.0 {
            OpeningProfile::BOTH
        } else {
            OpeningProfile::NEW_ONLY
        }),
        Some(RegionCase::LargeCostReductionCompeting) => {
            if incr_old[1] >= 0.0 {
                Some(OpeningProfile::BOTH)
            } else if incr_new[0] >= 0.0 {
                Some(OpeningProfile::NEW_ONLY)
            } else if incr_old[0] >= 0.0 {
                Some(OpeningProfile::OLD_ONLY)
            } else {
                None
            }
        }
        None => None,
    };
    let agrees = predicted.map(|p| pure.contains(&p));
    RegionPrediction { case, predicted, agrees }
}

/// Check the payoff orderings that hold within each region case.
pub fn ordering_report(
    case: Option<RegionCase>,
    payoffs: &[[CellPayoff; 2]; 2],
    incr_old: &[f64; 2],
) -> OrderingReport {
    let v_new_10 = payoffs[1][0].new_firm;
    let v_new_11 = payoffs[1][1].new_firm;
    match case {
        Some(RegionCase::SmallCostReduction) => {
            // The stand-alone increment is strictly dominated; the
            // conditional one only weakly (it equals the entrant's payoff
            // whenever both profiles segment the market).
            let holds = incr_old[0] < v_new_11
                && incr_old[1] <= v_new_11 + 1e-12
                && v_new_11 <= v_new_10 + 1e-12;
            OrderingReport {
                case,
                holds: Some(holds),
                details: format!(
                    "incumbent {} (strict), {} (weak) vs entrant {} <= {}",
                    incr_old[0], incr_old[1], v_new_11, v_new_10
                ),
            }
        }
        Some(RegionCase::LargeCostReductionCompeting) => {
            let holds = incr_old[1] < v_new_10
                && (v_new_11 - v_new_10).abs() < 1e-12
                && v_new_10 < incr_old[0];
            OrderingReport {
                case,
                holds: Some(holds),
                details: format!(
                    "{} < {} = {} < {}",
                    incr_old[1], v_new_11, v_new_10, incr_old[0]
                ),
            }
        }
        None => OrderingReport {
            case,
            holds: None,
            details: "cost reduction between the 3/2 and critical levels; no ordering applies"
                .to_string(),
        },
    }
}

/// Solve the opening game from the four per-profile fixed points.
pub fn solve_opening_game(
    cfg: &MarketConfig,
    profiles: &[ProfileSolution],
) -> Result<OpeningOutcome, SearchError> {
    let payoffs = payoff_matrix(cfg, profiles);
    let (incremental_new, incremental_old) = incremental_profits(&payoffs);
    let effects = effects_decomposition(cfg, profiles, &payoffs);

    let pure = pure_equilibria(&incremental_new, &incremental_old);
    let mixed = if pure.is_empty() {
        mixed_equilibrium(&incremental_new, &incremental_old)
    } else {
        None
    };
    let selected = pure
        .iter()
        .max_by_key(|p| (p.new_opens as u8 + p.old_opens as u8, p.new_opens as u8))
        .map(|&p| Selection::Pure(p))
        .or(mixed.map(|(alpha_n, alpha_o)| Selection::Mixed { alpha_n, alpha_o }))
        .ok_or_else(|| SearchError::Inconsistent {
            profile: "opening game".to_string(),
            details: "no pure or mixed equilibrium found".to_string(),
        })?;

    let no_entry_warning = if incremental_old[0].max(incremental_new[0]) < 0.0 {
        Some(format!(
            "stand-alone opening unprofitable for both firms (d_old = {}, v_new = {}); staying out is the equilibrium",
            incremental_old[0], incremental_new[0]
        ))
    } else {
        None
    };

    let r_p_new_only = cell(profiles, OpeningProfile::NEW_ONLY)
        .reservations
        .r_p
        .expect("physical site always has a reservation");
    let case = region_case(cfg, r_p_new_only);
    let region = region_prediction(case, &incremental_new, &incremental_old, &pure);
    let ordering = ordering_report(case, &payoffs, &incremental_old);

    Ok(OpeningOutcome {
        payoffs,
        incremental_old,
        incremental_new,
        effects,
        pure_equilibria: pure,
        mixed_equilibrium: mixed,
        selected,
        region,
        ordering,
        no_entry_warning,
    })
}
