//! Consumer search: optimal reservation prices, parameter feasibility, and
//! the joint price/reservation fixed point.
//!
//! A consumer at a shop of type `t` holding offer `p_t` stops when the net
//! surplus of stopping is at least the expected gain of one more Web visit.
//! With one unsampled site the stopping margin solves
//!
//! ```text
//! S(p_other) - u_other - S(r_t) + u_t = sigma - delta_sigma
//! ```
//!
//! and with two unsampled sites the expected gain averages the two clamped
//! surplus gains, which yields a two-branch rule depending on whether the
//! stopping surplus falls below both alternatives or between them.
//!
//! Consumers anticipate equilibrium prices; firms best-respond to the implied
//! reservations. The fixed point is found by damped iteration from several
//! starting points, and every returned solution is checked against the
//! ordering conditions that make the search behavior subgame-consistent.

use crate::config::{MarketConfig, Mode, OpeningProfile, PerShop, Shop, SolveOptions};
use crate::pricing::{self, PriceEquilibrium, PricingError, Regime};
use crate::{ProfileSolution, EPS};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    /// The stopping rule has no solution: the required stopping surplus
    /// exceeds the largest surplus any price can deliver.
    #[error("no acceptable price at shop {shop}: required surplus {required} exceeds maximum {max}")]
    NoAcceptance { shop: Shop, required: f64, max: f64 },
    #[error("fixed point did not converge for profile {profile} after {iterations} iterations")]
    NonConvergence { profile: String, iterations: usize },
    #[error("equilibrium inconsistent for profile {profile}: {details}")]
    Inconsistent { profile: String, details: String },
    #[error(transparent)]
    Pricing(#[from] PricingError),
}

/// Reservation prices for one opening profile, computed against anticipated
/// equilibrium prices.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservationSet {
    pub profile: OpeningProfile,
    pub r_vn: Option<f64>,
    pub r_vo: Option<f64>,
    pub r_p: Option<f64>,
    /// Maximum price at which a new consumer buys from the physical shop at
    /// each successive search step (first observation onward). Later steps
    /// never bind on the equilibrium path; kept as diagnostics.
    pub physical_step_thresholds: Vec<f64>,
}

impl ReservationSet {
    pub fn get(&self, shop: Shop) -> Option<f64> {
        match shop {
            Shop::VirtualNew => self.r_vn,
            Shop::VirtualOld => self.r_vo,
            Shop::Physical => self.r_p,
        }
    }

    fn set(&mut self, shop: Shop, value: f64) {
        match shop {
            Shop::VirtualNew => self.r_vn = Some(value),
            Shop::VirtualOld => self.r_vo = Some(value),
            Shop::Physical => self.r_p = Some(value),
        }
    }
}

/// One named parameter restriction with its slack (positive when satisfied).
#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    pub name: &'static str,
    pub satisfied: bool,
    pub slack: f64,
    pub detail: String,
}

/// Result of checking the search-cost/delivery-cost parameter restrictions.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub restrictions: Vec<Restriction>,
    pub hard_ok: bool,
    /// Set when the trip cost is high enough that some consumers may end up
    /// with non-positive net surplus. Reported, never enforced.
    pub surplus_warning: bool,
}

impl FeasibilityReport {
    pub fn failures(&self) -> impl Iterator<Item = &Restriction> {
        self.restrictions.iter().filter(|r| !r.satisfied)
    }

    pub fn failure_summary(&self) -> String {
        self.failures()
            .map(|r| format!("{} ({})", r.name, r.detail))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Check the parameter restrictions that make search behavior well defined.
///
/// Standard mode requires the delivery cost to exceed the search saving but
/// stay below `delta_sigma + min(delta_surplus, 2 (sigma - delta_sigma))`.
/// Information-goods mode instead requires a zero delivery cost, under which
/// only the two remaining ordering bounds apply.
pub fn check_feasibility(cfg: &MarketConfig, mode: Mode) -> FeasibilityReport {
    let mut restrictions = Vec::new();
    let sigma = cfg.sigma;
    let ds = cfg.delta_sigma;
    let delta = cfg.delta_delivery;
    let gap = cfg.delta_surplus();

    let slack = ds.min(sigma - ds);
    restrictions.push(Restriction {
        name: "search_saving_in_range",
        satisfied: ds > 0.0 && ds < sigma,
        slack,
        detail: format!("delta_sigma = {ds} must lie in (0, sigma = {sigma})"),
    });

    match mode {
        Mode::Standard => {
            let upper = ds + gap.min(2.0 * (sigma - ds));
            restrictions.push(Restriction {
                name: "delivery_above_search_saving",
                satisfied: delta > ds,
                slack: delta - ds,
                detail: format!("delta = {delta} must exceed delta_sigma = {ds}"),
            });
            restrictions.push(Restriction {
                name: "delivery_below_upper_bound",
                satisfied: delta < upper,
                slack: upper - delta,
                detail: format!("delta = {delta} must lie in ({ds}, {upper})"),
            });
        }
        Mode::InfoGoods => {
            restrictions.push(Restriction {
                name: "delivery_zero",
                satisfied: delta == 0.0,
                slack: -delta.abs(),
                detail: format!("information goods require delta = 0, got {delta}"),
            });
            let bound_trip = 2.0 * sigma - ds;
            restrictions.push(Restriction {
                name: "delivery_below_double_trip",
                satisfied: delta < bound_trip,
                slack: bound_trip - delta,
                detail: format!("delta = {delta} must stay below 2 sigma - delta_sigma = {bound_trip}"),
            });
            let bound_gap = gap + ds;
            restrictions.push(Restriction {
                name: "delivery_below_surplus_gap",
                satisfied: delta < bound_gap,
                slack: bound_gap - delta,
                detail: format!("delta = {delta} must stay below delta_surplus + delta_sigma = {bound_gap}"),
            });
        }
    }

    let hard_ok = restrictions.iter().all(|r| r.satisfied);
    let surplus_threshold = (cfg.demand.surplus(cfg.p_hat_p()) + ds) / 2.0;
    FeasibilityReport {
        restrictions,
        hard_ok,
        surplus_warning: sigma >= surplus_threshold,
    }
}

/// Stopping surplus required by the one-unsampled-site rule, before adding
/// the buyer cost of the current shop.
fn one_site_gain_target(alt: (Shop, f64), cfg: &MarketConfig) -> f64 {
    cfg.demand.surplus(alt.1) - cfg.buy_cost(alt.0) - cfg.web_visit_cost()
}

fn invert_stop_surplus(shop: Shop, target: f64, cfg: &MarketConfig) -> Result<f64, SearchError> {
    let max = cfg.demand.max_surplus();
    if target > max + EPS {
        return Err(SearchError::NoAcceptance { shop, required: target, max });
    }
    Ok(cfg.demand.surplus_inverse(target))
}

/// Reservation price at shop `current` when exactly one site, holding `alt`,
/// remains unsampled.
pub fn reservation_two_shops(
    alt: (Shop, f64),
    current: Shop,
    cfg: &MarketConfig,
) -> Result<f64, SearchError> {
    let target = one_site_gain_target(alt, cfg) + cfg.buy_cost(current);
    invert_stop_surplus(current, target, cfg)
}

/// Reservation price at shop `current` when two sites remain unsampled.
///
/// The expected gain of one more visit averages the surplus gains against the
/// better and worse alternative, each clamped at zero by the option to recall
/// the current offer. Solving the stopping margin therefore has two branches;
/// the branch whose solution satisfies its own condition is returned.
pub fn reservation_three_shops(
    alts: [(Shop, f64); 2],
    current: Shop,
    cfg: &MarketConfig,
) -> Result<f64, SearchError> {
    let s0 = cfg.demand.surplus(alts[0].1) - cfg.buy_cost(alts[0].0);
    let s1 = cfg.demand.surplus(alts[1].1) - cfg.buy_cost(alts[1].0);
    let (better, worse) = if s0 >= s1 { (s0, s1) } else { (s1, s0) };
    let cost = cfg.web_visit_cost();

    // Both gains positive at the margin: 1/2 (better - x) + 1/2 (worse - x) = cost.
    let x_two = 0.5 * (better + worse) - cost;
    let x = if x_two <= worse {
        x_two
    } else {
        // Margin sits between the alternatives: only the better one pays off.
        let x_one = better - 2.0 * cost;
        debug_assert!(x_one >= worse - 1e-12 && x_one < better);
        x_one
    };
    let target = x + cfg.buy_cost(current);
    invert_stop_surplus(current, target, cfg)
}

/// Reservation prices for every site active under `profile`, given a vector
/// of anticipated prices.
pub fn reservations_for(
    profile: OpeningProfile,
    prices: &PerShop<f64>,
    cfg: &MarketConfig,
) -> Result<ReservationSet, SearchError> {
    let mut set = ReservationSet {
        profile,
        r_vn: None,
        r_vo: None,
        r_p: None,
        physical_step_thresholds: Vec::new(),
    };
    let sites = profile.web_sites();
    if sites.is_empty() {
        // No on-line search: everyone shops off-line and accepts any price
        // with positive demand.
        set.r_p = Some(cfg.choke_price());
        return Ok(set);
    }
    let price_of = |shop: Shop| prices.get(shop).expect("price for every active site");
    for &current in &sites {
        let others: Vec<(Shop, f64)> = sites
            .iter()
            .filter(|&&s| s != current)
            .map(|&s| (s, price_of(s)))
            .collect();
        let r = match others.len() {
            1 => reservation_two_shops(others[0], current, cfg)?,
            2 => reservation_three_shops([others[0], others[1]], current, cfg)?,
            _ => unreachable!("at most three web sites"),
        };
        set.set(current, r);
    }
    set.physical_step_thresholds = physical_step_thresholds(&set, prices, cfg);
    Ok(set)
}

/// Acceptance prices for the physical shop at each search step, starting from
/// the first observation. Off the equilibrium path only; weakly decreasing.
fn physical_step_thresholds(
    set: &ReservationSet,
    prices: &PerShop<f64>,
    cfg: &MarketConfig,
) -> Vec<f64> {
    let virtuals: Vec<f64> = [Shop::VirtualNew, Shop::VirtualOld]
        .into_iter()
        .filter_map(|s| prices.get(s))
        .map(|p| cfg.demand.surplus(p) - cfg.delta_delivery)
        .collect();
    let Some(first) = set.r_p else { return Vec::new() };
    let mut steps = vec![first];
    match virtuals.len() {
        1 => {
            // Final step: beat the recalled virtual offer outright.
            steps.push(cfg.demand.surplus_inverse(virtuals[0] + cfg.sigma));
        }
        2 => {
            let best = virtuals[0].max(virtuals[1]);
            let worst = virtuals[0].min(virtuals[1]);
            // One virtual offer in hand (the binding one), one site left:
            // stop-and-buy requires beating both the recall and the option
            // of visiting the last site.
            let keep = best.max(worst - cfg.web_visit_cost());
            steps.push(cfg.demand.surplus_inverse(keep + cfg.sigma));
            // Final step: beat the better of the two recalled offers.
            steps.push(cfg.demand.surplus_inverse(best + cfg.sigma));
        }
        _ => {}
    }
    steps
}

const MAX_ITERATIONS: usize = 10_000;
const FP_TOL: f64 = 1e-10;
const DAMPING: f64 = 0.5;

fn monopoly_guess(profile: OpeningProfile, cfg: &MarketConfig) -> PerShop<f64> {
    let mut prices = PerShop::default();
    for shop in profile.active_shops() {
        let p = cfg
            .demand
            .monopoly_price(cfg.cost_of(shop))
            .expect("validated config");
        prices.set(shop, p);
    }
    prices
}

fn uniform_guess(profile: OpeningProfile, value: f64) -> PerShop<f64> {
    let mut prices = PerShop::default();
    for shop in profile.active_shops() {
        prices.set(shop, value);
    }
    prices
}

fn cost_guess(profile: OpeningProfile, cfg: &MarketConfig) -> PerShop<f64> {
    let mut prices = PerShop::default();
    for shop in profile.active_shops() {
        prices.set(shop, cfg.cost_of(shop));
    }
    prices
}

fn midpoint_guess(profile: OpeningProfile, cfg: &MarketConfig) -> PerShop<f64> {
    let mut prices = PerShop::default();
    for shop in profile.active_shops() {
        let c = cfg.cost_of(shop);
        let p = cfg.demand.monopoly_price(c).expect("validated config");
        prices.set(shop, 0.5 * (c + p));
    }
    prices
}

fn max_price_diff(a: &PerShop<f64>, b: &PerShop<f64>) -> f64 {
    Shop::ALL
        .into_iter()
        .filter_map(|s| match (a.get(s), b.get(s)) {
            (Some(x), Some(y)) => Some((x - y).abs()),
            (None, None) => None,
            _ => Some(f64::INFINITY),
        })
        .fold(0.0, f64::max)
}

fn solve_from_guess(
    profile: OpeningProfile,
    guess: PerShop<f64>,
    cfg: &MarketConfig,
    opts: SolveOptions,
) -> Result<(ReservationSet, PriceEquilibrium), SearchError> {
    let mut prices = guess;
    for _ in 0..MAX_ITERATIONS {
        let reservations = reservations_for(profile, &prices, cfg)?;
        let eq = pricing::equilibrium_for(profile, &reservations, cfg, opts)?;
        if max_price_diff(&eq.prices, &prices) < FP_TOL {
            // Close the loop exactly: reservations that anticipate the
            // equilibrium prices, and the best response to them.
            let reservations = reservations_for(profile, &eq.prices, cfg)?;
            let settled = pricing::equilibrium_for(profile, &reservations, cfg, opts)?;
            if max_price_diff(&settled.prices, &eq.prices) > 1e-8 {
                break; // oscillating at the tolerance floor
            }
            return Ok((reservations, settled));
        }
        let mut damped = PerShop::default();
        for shop in profile.active_shops() {
            let cur = prices.get(shop).expect("guess covers active shops");
            let new = eq.prices.get(shop).expect("equilibrium covers active shops");
            damped.set(shop, cur + DAMPING * (new - cur));
        }
        prices = damped;
    }
    Err(SearchError::NonConvergence {
        profile: profile.label().to_string(),
        iterations: MAX_ITERATIONS,
    })
}

/// Consistency conditions a solved fixed point must satisfy. Every violation
/// is reported; in strict mode any violation is an error.
fn verify_solution(
    profile: OpeningProfile,
    res: &ReservationSet,
    eq: &PriceEquilibrium,
    cfg: &MarketConfig,
    mode: Mode,
) -> Vec<String> {
    let mut violations = Vec::new();
    let sites = profile.web_sites();
    if sites.is_empty() {
        return violations;
    }
    let price_of = |s: Shop| eq.prices.get(s).expect("active shop priced");

    for &shop in &sites {
        let r_t = res.get(shop).expect("reservation per site");
        if shop.is_virtual() {
            // Virtual shops must actually sell at their posted price.
            if price_of(shop) > r_t + EPS {
                violations.push(format!(
                    "virtual shop {shop} posts {} above its reservation price {r_t}",
                    price_of(shop)
                ));
            }
        }
        let min_other = sites
            .iter()
            .filter(|&&s| s != shop)
            .map(|&s| price_of(s))
            .fold(f64::INFINITY, f64::min);
        match (mode, shop) {
            (Mode::Standard, _) | (Mode::InfoGoods, Shop::VirtualNew | Shop::VirtualOld) => {
                // Reservations must exceed the cheapest alternative price,
                // otherwise a rejecting consumer could exit without buying.
                if min_other >= r_t {
                    violations.push(format!(
                        "reservation at {shop} ({r_t}) does not exceed the cheapest alternative ({min_other})"
                    ));
                }
            }
            (Mode::InfoGoods, Shop::Physical) => {
                // With instant delivery the physical shop must undercut the
                // virtual ones to sell to on-line consumers.
                if r_t >= min_other {
                    violations.push(format!(
                        "physical reservation {r_t} should fall below the cheapest virtual price {min_other}"
                    ));
                }
            }
        }
    }
    if mode == Mode::Standard {
        if let Some(r_p) = res.r_p {
            if r_p >= cfg.p_hat_p() {
                violations.push(format!(
                    "physical shop unconstrained by search: reservation {r_p} is not below the monopoly price {}",
                    cfg.p_hat_p()
                ));
            }
        }
    }
    if eq.regime == Regime::Competing {
        let (virt_min, phys) = (
            sites
                .iter()
                .filter(|s| s.is_virtual())
                .map(|&s| price_of(s))
                .fold(f64::INFINITY, f64::min),
            price_of(Shop::Physical),
        );
        let ordered = match mode {
            Mode::Standard => virt_min < phys + EPS,
            Mode::InfoGoods => phys < virt_min + EPS,
        };
        if !ordered {
            violations.push(format!(
                "competing price ordering violated: virtual {virt_min} vs physical {phys}"
            ));
        }
    }
    for w in res.physical_step_thresholds.windows(2) {
        if w[1] > w[0] + EPS {
            violations.push(format!(
                "physical acceptance threshold rises across steps: {} -> {}",
                w[0], w[1]
            ));
        }
    }
    violations
}

/// Solve the joint price/reservation fixed point for one opening profile.
///
/// Runs a damped iteration from four starting points (monopoly prices, choke
/// prices, marginal costs, midpoints) and reports any multiplicity. With
/// `opts.lenient` unset, consistency violations are errors.
pub fn solve_fixed_point(
    profile: OpeningProfile,
    cfg: &MarketConfig,
    opts: SolveOptions,
) -> Result<ProfileSolution, SearchError> {
    let guesses = [
        monopoly_guess(profile, cfg),
        uniform_guess(profile, cfg.choke_price()),
        cost_guess(profile, cfg),
        midpoint_guess(profile, cfg),
    ];
    let mut primary: Option<(ReservationSet, PriceEquilibrium)> = None;
    let mut distinct = 0usize;
    let mut warnings = Vec::new();
    for guess in guesses {
        let (res, eq) = solve_from_guess(profile, guess, cfg, opts)?;
        match &primary {
            None => {
                primary = Some((res, eq));
                distinct = 1;
            }
            Some((_, eq0)) => {
                if max_price_diff(&eq.prices, &eq0.prices) > 1e-8 {
                    distinct += 1;
                }
            }
        }
    }
    let (reservations, equilibrium) = primary.expect("at least one guess");
    if distinct > 1 {
        warnings.push(format!(
            "multiple fixed points: {distinct} distinct solutions across starting points"
        ));
    }
    let violations = verify_solution(profile, &reservations, &equilibrium, cfg, opts.mode);
    if !violations.is_empty() && !opts.lenient {
        return Err(SearchError::Inconsistent {
            profile: profile.label().to_string(),
            details: violations.join("; "),
        });
    }
    warnings.extend(violations);
    Ok(ProfileSolution {
        profile,
        reservations,
        equilibrium,
        warnings,
    })
}
