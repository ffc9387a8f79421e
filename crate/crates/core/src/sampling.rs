//! Random feasible market configurations, used by the verification suites
//! and available for steering a configuration into a given pricing regime.

use crate::config::{MarketConfig, Mode, OpeningProfile, SolveOptions};
use crate::demand::DemandSpec;
use crate::pricing::Regime;
use crate::search::{check_feasibility, solve_fixed_point};
use rand::Rng;

/// Draw a configuration that passes validation and the standard-mode
/// parameter restrictions. The delivery cost is drawn inside its admissible
/// interval, so acceptance is immediate.
pub fn feasible_config<R: Rng>(rng: &mut R) -> MarketConfig {
    loop {
        let intercept = rng.random_range(0.8..1.6);
        let slope = rng.random_range(0.7..1.4);
        let demand = DemandSpec::linear(intercept, slope);
        let choke = demand.choke_price();
        let c_p = rng.random_range(0.15..0.48) * choke;
        let delta_c = rng.random_range(0.10..=1.0) * c_p;
        let lambda = rng.random_range(0.05..=1.0);

        let cfg_probe = MarketConfig {
            lambda,
            c_p,
            delta_c,
            setup_cost: 0.0,
            sigma: 1.0,
            delta_sigma: 0.5,
            delta_delivery: 0.6,
            e_loss: 0.0,
            demand,
        };
        let scale = demand.surplus(cfg_probe.p_hat_p());
        let sigma = rng.random_range(0.05..1.2) * scale;
        let delta_sigma = rng.random_range(0.2..0.95) * sigma;
        let gap = cfg_probe.delta_surplus();
        let width = gap.min(2.0 * (sigma - delta_sigma));
        let delta_delivery = delta_sigma + rng.random_range(0.05..0.95) * width;
        let setup_cost =
            rng.random_range(0.0..0.4) * demand.profit(cfg_probe.p_hat_p(), c_p) * lambda;

        let cfg = MarketConfig {
            sigma,
            delta_sigma,
            delta_delivery,
            setup_cost,
            ..cfg_probe
        };
        if cfg.validate().is_ok() && check_feasibility(&cfg, Mode::Standard).hard_ok {
            return cfg;
        }
    }
}

/// Regime targets a steered configuration must land in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTarget {
    NewOnlyCompeting,
    NewOnlySegmentation,
    BothCompeting,
    BothSegmentation,
}

/// Rejection-sample a feasible configuration whose solved fixed point lands
/// in the requested regime. Panics after too many draws (test usage).
pub fn steer_regime<R: Rng>(rng: &mut R, target: RegimeTarget) -> MarketConfig {
    for _ in 0..20_000 {
        let mut cfg = feasible_config(rng);
        // Bias the draws toward each target's region.
        match target {
            RegimeTarget::NewOnlyCompeting => cfg.lambda = rng.random_range(0.4..=1.0),
            RegimeTarget::NewOnlySegmentation => cfg.lambda = rng.random_range(0.05..0.2),
            RegimeTarget::BothCompeting => {
                cfg.delta_c = rng.random_range(0.1..0.5) * cfg.c_p;
                cfg.lambda = rng.random_range(0.4..=1.0);
            }
            RegimeTarget::BothSegmentation => {}
        }
        if !(cfg.validate().is_ok() && check_feasibility(&cfg, Mode::Standard).hard_ok) {
            continue;
        }
        let profile = match target {
            RegimeTarget::NewOnlyCompeting | RegimeTarget::NewOnlySegmentation => {
                OpeningProfile::NEW_ONLY
            }
            _ => OpeningProfile::BOTH,
        };
        let Ok(sol) = solve_fixed_point(profile, &cfg, SolveOptions::default()) else {
            continue;
        };
        let want = match target {
            RegimeTarget::NewOnlyCompeting | RegimeTarget::BothCompeting => Regime::Competing,
            _ => Regime::Segmentation,
        };
        if sol.equilibrium.regime == want {
            return cfg;
        }
    }
    panic!("could not steer a configuration into {target:?}");
}
