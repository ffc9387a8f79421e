//! Equilibrium solver and simulator for a retail market served by two
//! technologies: physical shops, which consumers reach by a costly trip, and
//! virtual (Web) shops, which are cheaper to run and cheaper to canvass but
//! make the buyer wait for delivery.
//!
//! Two firms compete: an incumbent that owns the physical shop and an entrant
//! that has none. Each decides whether to open a virtual shop, then all shops
//! set prices, and consumers — a fraction `lambda` of whom can search on-line —
//! search sequentially with reservation-price stopping rules.
//!
//! The crate solves the whole game backwards:
//!
//! * [`demand`] — demand, profit, monopoly price, consumer surplus;
//! * [`thresholds`] — the indifference prices that split pricing regimes;
//! * [`search`] — optimal reservation prices and the joint price/reservation
//!   fixed point;
//! * [`pricing`] — stage-2 price equilibria (regime, prices, shares);
//! * [`opening`] — the 2x2 virtual-shop opening game, incremental profits and
//!   their decomposition into economic effects;
//! * [`dominance`] — equilibrium price distributions and first-order
//!   stochastic dominance comparisons;
//! * [`sim`] — seeded agent-level Monte Carlo verification of the analytic
//!   shares and search behavior;
//! * [`sweep`] — parameter grids evaluated in parallel, emitted as CSV rows;
//! * [`sampling`] — random feasible configurations for verification suites.

pub mod config;
pub mod demand;
pub mod dominance;
pub mod numeric;
pub mod opening;
pub mod pricing;
pub mod report;
pub mod sampling;
pub mod search;
pub mod sim;
pub mod sweep;
pub mod thresholds;

pub use config::{MarketConfig, Mode, OpeningProfile, Shop, SolveOptions};
pub use demand::DemandSpec;
pub use dominance::{FosdOrder, PriceDistribution};
pub use opening::{EffectsBreakdown, OpeningOutcome};
pub use pricing::{PriceEquilibrium, Regime};
pub use search::{FeasibilityReport, ReservationSet, SearchError};
pub use sim::{SimConfig, SimReport};

/// Absolute tolerance used for price/currency comparisons throughout.
pub const EPS: f64 = 1e-9;

/// Full solution of one market configuration: feasibility, thresholds, the
/// four per-profile price/reservation fixed points, the opening game and the
/// price-distribution comparisons.
#[derive(Debug, Clone)]
pub struct MarketSolution {
    pub feasibility: search::FeasibilityReport,
    pub thresholds: thresholds::ThresholdReport,
    pub profiles: Vec<ProfileSolution>,
    pub opening: opening::OpeningOutcome,
    pub dominance: dominance::DominanceReport,
}

/// Solved fixed point for one opening profile.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    pub profile: OpeningProfile,
    pub reservations: ReservationSet,
    pub equilibrium: PriceEquilibrium,
    /// Residual consistency violations (empty for feasible configurations).
    pub warnings: Vec<String>,
}

impl MarketSolution {
    pub fn profile(&self, profile: OpeningProfile) -> &ProfileSolution {
        self.profiles
            .iter()
            .find(|p| p.profile == profile)
            .expect("all four profiles are always solved")
    }
}

/// Solve a full market: all four opening profiles, the opening game, and the
/// dominance comparisons. This is the one-stop entry point used by the CLI.
pub fn solve_market(
    cfg: &MarketConfig,
    opts: SolveOptions,
) -> Result<MarketSolution, SearchError> {
    let feasibility = search::check_feasibility(cfg, opts.mode);
    let mut profiles = Vec::with_capacity(4);
    for profile in OpeningProfile::all() {
        let sol = search::solve_fixed_point(profile, cfg, opts)?;
        profiles.push(sol);
    }
    let thresholds = thresholds::ThresholdReport::build(
        cfg,
        profiles
            .iter()
            .find(|p| p.profile == OpeningProfile::NEW_ONLY)
            .and_then(|p| p.reservations.r_p),
    );
    let opening = opening::solve_opening_game(cfg, &profiles)?;
    let dominance = dominance::dominance_report(&profiles);
    Ok(MarketSolution {
        feasibility,
        thresholds,
        profiles,
        opening,
        dominance,
    })
}
