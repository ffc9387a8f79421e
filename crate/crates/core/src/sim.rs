//! Agent-level verification of a solved equilibrium.
//!
//! The unit consumer mass is discretized into agents. Each on-line agent
//! samples Web sites in a uniformly random order without replacement and at
//! every step either accepts (stops) or pays one more visit, exactly per the
//! reservation stopping rules: stop as soon as the expected surplus gain of
//! one more visit, averaged over the unsampled sites' anticipated prices and
//! clamped by the option to recall, no longer exceeds the visit cost. After
//! the last site the best sampled offer is taken. Off-line agents walk to the
//! physical shop and buy whenever demand at its price is positive.
//!
//! Everything is a deterministic function of the seed: agent `i` draws from
//! its own ChaCha8 stream, so reports are reproducible regardless of how
//! agents would be partitioned across workers.

use crate::config::{MarketConfig, OpeningProfile, PerShop, Shop};
use crate::pricing::PriceEquilibrium;
use crate::search::ReservationSet;
use crate::ProfileSolution;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Competing equilibria price the physical shop exactly at the reservation
/// level, so the stop-versus-search comparison is an exact tie; this margin
/// keeps rounding noise from flipping ties into extra searches.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("need at least one agent, got {0}")]
    NoAgents(usize),
    #[error("scenario inconsistent: {0}")]
    Inconsistent(String),
}

/// One simulation scenario: a solved equilibrium plus discretization inputs.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n_agents: usize,
    pub seed: u64,
    pub cfg: MarketConfig,
    pub profile: OpeningProfile,
    pub equilibrium: PriceEquilibrium,
    pub reservations: ReservationSet,
}

impl SimConfig {
    pub fn from_solution(
        cfg: &MarketConfig,
        solution: &ProfileSolution,
        n_agents: usize,
        seed: u64,
    ) -> Self {
        SimConfig {
            n_agents,
            seed,
            cfg: cfg.clone(),
            profile: solution.profile,
            equilibrium: solution.equilibrium.clone(),
            reservations: solution.reservations.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SurplusStats {
    pub mean: f64,
    pub min: f64,
}

/// Aggregated simulation outcome; identical seeds yield identical reports.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub profile: OpeningProfile,
    pub n_agents: usize,
    /// `round(n_agents * lambda)` agents are on-line; the rest are off-line.
    pub n_new: usize,
    pub n_old: usize,
    pub seed: u64,
    pub rng_algorithm: &'static str,
    pub counts: PerShop<u64>,
    pub empirical_shares: PerShop<f64>,
    pub analytic_shares: PerShop<f64>,
    /// Standardized deviation of each shop's on-line buyer count from its
    /// analytic binomial expectation (zero for degenerate shares).
    pub share_z: PerShop<f64>,
    /// Mean Web visits per on-line agent.
    pub mean_search_steps: f64,
    pub max_search_steps: u32,
    /// Mean visits among on-line agents whose first site was the physical
    /// shop's; `None` when no agent started there.
    pub mean_steps_after_physical_first: Option<f64>,
    pub new_surplus: SurplusStats,
    pub old_surplus: SurplusStats,
    /// Largest realized search outlay (visits plus trip or delivery cost).
    pub max_search_expenditure: f64,
}

struct WalkOutcome {
    bought: Shop,
    price: f64,
    steps: u32,
    first_site: Shop,
    net_surplus: f64,
    expenditure: f64,
}

fn walk_online_agent(
    order: &[Shop],
    prices: &PerShop<f64>,
    cfg: &MarketConfig,
) -> WalkOutcome {
    let visit_cost = cfg.web_visit_cost();
    let mut best: Option<(Shop, f64, f64)> = None; // shop, price, net-of-buy-cost surplus
    let mut steps = 0u32;
    for (k, &site) in order.iter().enumerate() {
        steps += 1;
        let price = prices.get(site).expect("active site priced");
        let surplus = cfg.demand.surplus(price) - cfg.buy_cost(site);
        if best.is_none_or(|(_, _, s)| surplus > s) {
            best = Some((site, price, surplus));
        }
        let unsampled = &order[k + 1..];
        if unsampled.is_empty() {
            break;
        }
        let held = best.expect("just set").2;
        let expected_gain: f64 = unsampled
            .iter()
            .map(|&s| {
                let p = prices.get(s).expect("active site priced");
                (cfg.demand.surplus(p) - cfg.buy_cost(s) - held).max(0.0)
            })
            .sum::<f64>()
            / unsampled.len() as f64;
        if expected_gain <= visit_cost + TIE_EPS {
            break; // stopping preferred at indifference
        }
    }
    let (bought, price, surplus) = best.expect("at least one site visited");
    WalkOutcome {
        bought,
        price,
        steps,
        first_site: order[0],
        net_surplus: surplus - steps as f64 * visit_cost,
        expenditure: steps as f64 * visit_cost + cfg.buy_cost(bought),
    }
}

/// Run the scenario and aggregate shares, search lengths and surplus.
pub fn simulate(sim: &SimConfig) -> Result<SimReport, SimError> {
    if sim.n_agents == 0 {
        return Err(SimError::NoAgents(0));
    }
    if sim.equilibrium.profile != sim.profile || sim.reservations.profile != sim.profile {
        return Err(SimError::Inconsistent(format!(
            "profile {} does not match equilibrium {} / reservations {}",
            sim.profile,
            sim.equilibrium.profile,
            sim.reservations.profile
        )));
    }
    let cfg = &sim.cfg;
    let sites = sim.profile.web_sites();
    for &s in &sites {
        if sim.equilibrium.prices.get(s).is_none() {
            return Err(SimError::Inconsistent(format!("missing price for site {s}")));
        }
    }
    let choke = cfg.choke_price();
    let p_physical = sim
        .equilibrium
        .prices
        .p
        .ok_or_else(|| SimError::Inconsistent("physical shop has no price".into()))?;

    let n_new = (sim.n_agents as f64 * cfg.lambda).round() as usize;
    let n_new = n_new.min(sim.n_agents);
    let n_old = sim.n_agents - n_new;

    let mut counts: PerShop<u64> = PerShop { vn: Some(0), vo: Some(0), p: Some(0) };
    let mut online_counts: PerShop<u64> = counts;
    let mut total_steps = 0u64;
    let mut max_steps = 0u32;
    let mut phys_first_steps = 0u64;
    let mut phys_first_agents = 0u64;
    let mut new_sum = 0.0;
    let mut new_min = f64::INFINITY;
    let mut max_expenditure: f64 = 0.0;

    for agent in 0..n_new {
        let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
        rng.set_stream(agent as u64 + 1);
        let outcome = if sites.is_empty() {
            // No virtual shop anywhere: on-line consumers shop off-line too.
            if p_physical > choke {
                return Err(SimError::Inconsistent(format!(
                    "physical price {p_physical} exceeds the choke price {choke}"
                )));
            }
            WalkOutcome {
                bought: Shop::Physical,
                price: p_physical,
                steps: 0,
                first_site: Shop::Physical,
                net_surplus: cfg.demand.surplus(p_physical) - cfg.sigma,
                expenditure: cfg.sigma,
            }
        } else {
            let mut order = sites.clone();
            order.shuffle(&mut rng);
            walk_online_agent(&order, &sim.equilibrium.prices, cfg)
        };
        if outcome.price > choke {
            return Err(SimError::Inconsistent(format!(
                "an agent bought at {} beyond the choke price {choke}",
                outcome.price
            )));
        }
        counts.set(outcome.bought, counts.get(outcome.bought).unwrap_or(0) + 1);
        online_counts.set(
            outcome.bought,
            online_counts.get(outcome.bought).unwrap_or(0) + 1,
        );
        if !sites.is_empty() {
            total_steps += outcome.steps as u64;
            max_steps = max_steps.max(outcome.steps);
            if outcome.first_site == Shop::Physical {
                phys_first_agents += 1;
                phys_first_steps += outcome.steps as u64;
            }
        }
        new_sum += outcome.net_surplus;
        new_min = new_min.min(outcome.net_surplus);
        max_expenditure = max_expenditure.max(outcome.expenditure);
    }

    // Off-line agents are deterministic: one trip, buy when demand exists.
    let mut old_sum = 0.0;
    let mut old_min = f64::INFINITY;
    if n_old > 0 {
        if p_physical > choke {
            return Err(SimError::Inconsistent(format!(
                "physical price {p_physical} exceeds the choke price {choke}"
            )));
        }
        counts.set(
            Shop::Physical,
            counts.get(Shop::Physical).unwrap_or(0) + n_old as u64,
        );
        let net = cfg.demand.surplus(p_physical) - cfg.sigma;
        old_sum = net * n_old as f64;
        old_min = net;
    }

    let n = sim.n_agents as f64;
    let mut empirical = PerShop::default();
    let mut analytic = PerShop::default();
    let mut share_z = PerShop::default();
    for shop in Shop::ALL {
        let Some(cnt) = counts.get(shop) else { continue };
        let active = sim.equilibrium.prices.get(shop).is_some();
        if !active && cnt == 0 {
            continue;
        }
        empirical.set(shop, cnt as f64 / n);
        let a_share = sim.equilibrium.shares.get(shop).unwrap_or(0.0);
        analytic.set(shop, a_share);
        // Only the on-line submass is random; off-line demand is fixed.
        let q = if cfg.lambda > 0.0 {
            ((a_share - if shop == Shop::Physical { 1.0 - cfg.lambda } else { 0.0 })
                / cfg.lambda)
                .clamp(0.0, 1.0)
        } else {
            0.0
        };
        let var = n_new as f64 * q * (1.0 - q);
        let z = if var > 0.0 {
            (online_counts.get(shop).unwrap_or(0) as f64 - n_new as f64 * q) / var.sqrt()
        } else {
            0.0
        };
        share_z.set(shop, z);
    }

    Ok(SimReport {
        profile: sim.profile,
        n_agents: sim.n_agents,
        n_new,
        n_old,
        seed: sim.seed,
        rng_algorithm: "ChaCha8 (per-agent stream = agent index + 1)",
        counts,
        empirical_shares: empirical,
        analytic_shares: analytic,
        share_z,
        mean_search_steps: if n_new > 0 && !sites.is_empty() {
            total_steps as f64 / n_new as f64
        } else {
            0.0
        },
        max_search_steps: max_steps,
        mean_steps_after_physical_first: (phys_first_agents > 0)
            .then(|| phys_first_steps as f64 / phys_first_agents as f64),
        new_surplus: SurplusStats {
            mean: if n_new > 0 { new_sum / n_new as f64 } else { 0.0 },
            min: if n_new > 0 { new_min } else { 0.0 },
        },
        old_surplus: SurplusStats {
            mean: if n_old > 0 { old_sum / n_old as f64 } else { 0.0 },
            min: if n_old > 0 { old_min } else { 0.0 },
        },
        max_search_expenditure: max_expenditure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SolveOptions;
    use crate::demand::DemandSpec;
    use crate::search::solve_fixed_point;

    fn base() -> MarketConfig {
        MarketConfig {
            lambda: 0.5,
            c_p: 0.4,
            delta_c: 0.2,
            setup_cost: 0.01,
            sigma: 0.05,
            delta_sigma: 0.04,
            delta_delivery: 0.05,
            e_loss: 0.0,
            demand: DemandSpec::linear(1.0, 1.0),
        }
    }

    fn scenario(cfg: &MarketConfig, profile: OpeningProfile, n: usize, seed: u64) -> SimConfig {
        let sol = solve_fixed_point(profile, cfg, SolveOptions::default()).unwrap();
        SimConfig::from_solution(cfg, &sol, n, seed)
    }

    #[test]
    fn identical_seeds_reproduce_reports() {
        let cfg = base();
        let sim = scenario(&cfg, OpeningProfile::BOTH, 5_000, 42);
        let a = simulate(&sim).unwrap();
        let b = simulate(&sim).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_change_counts() {
        let cfg = base();
        let a = simulate(&scenario(&cfg, OpeningProfile::BOTH, 20_000, 1)).unwrap();
        let b = simulate(&scenario(&cfg, OpeningProfile::BOTH, 20_000, 2)).unwrap();
        assert_ne!(a.counts, b.counts);
        for shop in Shop::ALL {
            if let Some(z) = b.share_z.get(shop) {
                assert!(z.abs() < 6.0);
            }
        }
    }

    #[test]
    fn competing_agents_stop_immediately() {
        let cfg = base();
        let report = simulate(&scenario(&cfg, OpeningProfile::NEW_ONLY, 100_000, 1)).unwrap();
        assert_eq!(report.max_search_steps, 1);
        assert_eq!(report.mean_search_steps, 1.0);
        // binomial tolerance on the entrant's overall share of 1/4
        let tol = 3.0 * (0.25 * 0.75 / 50_000.0f64).sqrt();
        assert!((report.empirical_shares.vn.unwrap() - 0.25).abs() < tol);
        assert!(report.share_z.vn.unwrap().abs() < 4.0);
    }

    #[test]
    fn segmentation_makes_physical_first_agents_search_again() {
        let cfg = base();
        let report = simulate(&scenario(&cfg, OpeningProfile::BOTH, 60_000, 7)).unwrap();
        // physical price 0.7 exceeds the reservation 0.6258: reject, then buy
        // at the next (virtual) site
        assert_eq!(report.mean_steps_after_physical_first, Some(2.0));
        assert_eq!(report.max_search_steps, 2);
        assert!((report.analytic_shares.p.unwrap() - 0.5).abs() < 1e-12);
        assert!(report.share_z.vn.unwrap().abs() < 4.0);
        assert!(report.share_z.vo.unwrap().abs() < 4.0);
        // expenditure cap: visits plus the dearer of trip and delivery
        let sites = OpeningProfile::BOTH.web_sites().len() as f64;
        let cap = sites * cfg.web_visit_cost() + cfg.sigma.max(cfg.delta_delivery);
        assert!(report.max_search_expenditure <= cap + 1e-12);
    }

    #[test]
    fn full_access_old_only_sells_everything_online() {
        let mut cfg = base();
        cfg.lambda = 1.0;
        let report = simulate(&scenario(&cfg, OpeningProfile::OLD_ONLY, 10_000, 3)).unwrap();
        assert_eq!(report.n_old, 0);
        assert_eq!(report.counts.vo, Some(10_000));
        assert_eq!(report.counts.p, Some(0));
        assert!((report.empirical_shares.vo.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monopoly_profile_walks_everyone_offline() {
        let cfg = base();
        let report = simulate(&scenario(&cfg, OpeningProfile::NONE, 1_000, 5)).unwrap();
        assert_eq!(report.counts.p, Some(1_000));
        assert_eq!(report.mean_search_steps, 0.0);
        let expected = cfg.demand.surplus(0.7) - cfg.sigma;
        assert!((report.old_surplus.mean - expected).abs() < 1e-12);
        assert!((report.new_surplus.mean - expected).abs() < 1e-12);
    }

    #[test]
    fn single_agent_report_is_degenerate_but_valid() {
        let cfg = base();
        let report = simulate(&scenario(&cfg, OpeningProfile::NEW_ONLY, 1, 9)).unwrap();
        assert_eq!(report.n_agents, 1);
        assert_eq!(report.n_new + report.n_old, 1);
        let total: f64 = Shop::ALL
            .iter()
            .filter_map(|&s| report.empirical_shares.get(s))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_agents_rejected() {
        let cfg = base();
        let mut sim = scenario(&cfg, OpeningProfile::NONE, 10, 0);
        sim.n_agents = 0;
        assert_eq!(simulate(&sim), Err(SimError::NoAgents(0)));
    }

    #[test]
    fn mismatched_profile_rejected() {
        let cfg = base();
        let mut sim = scenario(&cfg, OpeningProfile::NONE, 10, 0);
        sim.profile = OpeningProfile::BOTH;
        assert!(matches!(simulate(&sim), Err(SimError::Inconsistent(_))));
    }
}
