//! Regime thresholds: the reservation-price levels at which the incumbent is
//! indifferent between cutting its physical price to serve on-line consumers
//! and keeping the monopoly price for off-line consumers only, plus the
//! cost-reduction levels at which the virtual/physical profit ratio crosses
//! given marks.
//!
//! All thresholds are solved numerically by bracketed bisection so that other
//! demand families can be added without re-deriving closed forms.

use crate::config::MarketConfig;
use crate::numeric::bisect;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ThresholdError {
    /// `delta_c >= delta_c_crit`: with both virtual shops open the incumbent
    /// keeps the monopoly physical price for every reservation level, so the
    /// dual-shop threshold does not exist.
    #[error("dual-shop threshold undefined: delta_c {delta_c} >= critical level {critical}")]
    OutOfRegime { delta_c: f64, critical: f64 },
    #[error("target price {r_p} outside the threshold range ({lo}, {hi})")]
    OutOfRange { r_p: f64, lo: f64, hi: f64 },
}

/// Reservation-price level at which the incumbent, facing only the entrant's
/// virtual shop, is indifferent between pricing at the reservation level
/// (selling to everyone) and at the physical monopoly price (selling
/// off-line only). Decreasing in `lambda`; equals `c_p` at `lambda = 1`.
pub fn competing_threshold_new_only(lambda: f64, cfg: &MarketConfig) -> f64 {
    let d = cfg.demand;
    let profit_hat = d.profit(cfg.p_hat_p(), cfg.c_p);
    let all_share = lambda / 2.0 + 1.0 - lambda;
    let old_share = 1.0 - lambda;
    bisect(
        |x| d.profit(x, cfg.c_p) * all_share - profit_hat * old_share,
        cfg.c_p,
        cfg.p_hat_p(),
    )
    .expect("bracket holds for any valid config")
}

/// Reservation-price level at which the incumbent, running both a virtual and
/// the physical shop against the entrant's virtual shop, is indifferent
/// between its physical shop serving everyone and serving off-line consumers
/// only. Defined only for `delta_c` below [`critical_cost_reduction`];
/// decreasing in `lambda`, increasing in `delta_c`, and strictly above
/// [`competing_threshold_new_only`].
pub fn competing_threshold_both(
    lambda: f64,
    delta_c: f64,
    cfg: &MarketConfig,
) -> Result<f64, ThresholdError> {
    let critical = critical_cost_reduction(cfg);
    if delta_c >= critical {
        return Err(ThresholdError::OutOfRegime { delta_c, critical });
    }
    let d = cfg.demand;
    let c_v = cfg.c_p - delta_c;
    let profit_v = d.profit(d.monopoly_price(c_v).expect("c_v < c_p < choke"), c_v);
    let profit_hat = d.profit(cfg.p_hat_p(), cfg.c_p);
    // profit_v*(l/3) + pi(x)*(l/3 + 1 - l) = profit_v*(l/2) + profit_hat*(1 - l)
    let root = bisect(
        |x| {
            d.profit(x, cfg.c_p) * (1.0 - 2.0 * lambda / 3.0)
                - profit_v * lambda / 6.0
                - profit_hat * (1.0 - lambda)
        },
        cfg.c_p,
        cfg.p_hat_p(),
    )
    .expect("sign change guaranteed when delta_c < critical");
    Ok(root)
}

/// Virtual profit at the monopoly price for cost reduction `delta_c`.
fn virtual_monopoly_profit(delta_c: f64, cfg: &MarketConfig) -> f64 {
    let c_v = cfg.c_p - delta_c;
    let p_hat = cfg.demand.monopoly_price(c_v).expect("c_v below choke");
    cfg.demand.profit(p_hat, c_v)
}

/// Cost reduction at which the virtual/physical monopoly profit ratio equals
/// `k >= 1`, clamped to `[0, c_p]`. Returns `c_p` when the ratio never
/// reaches `k`.
pub fn cost_reduction_for_profit_ratio(k: f64, cfg: &MarketConfig) -> f64 {
    let profit_hat = cfg.demand.profit(cfg.p_hat_p(), cfg.c_p);
    let f = |dc: f64| virtual_monopoly_profit(dc, cfg) - k * profit_hat;
    if f(cfg.c_p) <= 0.0 {
        return cfg.c_p;
    }
    bisect(f, 0.0, cfg.c_p).expect("ratio is 1 at 0 and above k at c_p")
}

/// Cost reduction at which the profit ratio reaches 2: above it the incumbent
/// never cuts its physical price when both virtual shops are open.
pub fn critical_cost_reduction(cfg: &MarketConfig) -> f64 {
    cost_reduction_for_profit_ratio(2.0, cfg)
}

/// Inverse of [`competing_threshold_new_only`] in `lambda`: the access
/// fraction at which the threshold equals `r_p`. Unique by monotonicity.
pub fn lambda_for_threshold(r_p: f64, cfg: &MarketConfig) -> Result<f64, ThresholdError> {
    let (lo, hi) = (cfg.c_p, cfg.p_hat_p());
    if !(r_p > lo && r_p < hi) {
        return Err(ThresholdError::OutOfRange { r_p, lo, hi });
    }
    let d = cfg.demand;
    let profit_r = d.profit(r_p, cfg.c_p);
    let profit_hat = d.profit(cfg.p_hat_p(), cfg.c_p);
    let root = bisect(
        |l| profit_r * (l / 2.0 + 1.0 - l) - profit_hat * (1.0 - l),
        0.0,
        1.0,
    )
    .expect("threshold spans (c_p, p_hat_p) as lambda spans (0, 1]");
    Ok(root)
}

/// All thresholds for one configuration, evaluated at its own `lambda` and
/// `delta_c`.
#[derive(Debug, Clone)]
pub struct ThresholdReport {
    /// Threshold with only the entrant's virtual shop open.
    pub new_only: f64,
    /// Dual-shop threshold; `None` when `delta_c >= cost_reduction_critical`.
    pub both: Option<f64>,
    /// Cost reduction at which the profit ratio reaches 2.
    pub cost_reduction_critical: f64,
    /// Cost reduction at which the profit ratio reaches 3/2.
    pub cost_reduction_three_halves: f64,
    /// Access fraction whose threshold equals the solved physical reservation
    /// price; `None` when that price falls outside the threshold range.
    pub lambda_at_r_p: Option<f64>,
}

impl ThresholdReport {
    pub fn build(cfg: &MarketConfig, r_p: Option<f64>) -> Self {
        ThresholdReport {
            new_only: competing_threshold_new_only(cfg.lambda, cfg),
            both: competing_threshold_both(cfg.lambda, cfg.delta_c, cfg).ok(),
            cost_reduction_critical: critical_cost_reduction(cfg),
            cost_reduction_three_halves: cost_reduction_for_profit_ratio(1.5, cfg),
            lambda_at_r_p: r_p.and_then(|rp| lambda_for_threshold(rp, cfg).ok()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::DemandSpec;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

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

    #[test]
    fn new_only_threshold_reference_values() {
        let cfg = base();
        // lambda = 1 collapses the indifference to pricing at cost.
        assert!((competing_threshold_new_only(1.0, &cfg) - cfg.c_p).abs() < 1e-9);
        // lower quadratic root of pi(x)*(0.75) = 0.045
        assert!((competing_threshold_new_only(0.5, &cfg) - 0.5267949192431123).abs() < 1e-9);
        // lambda -> 0 forces indifference at the monopoly price itself.
        assert!((competing_threshold_new_only(1e-9, &cfg) - cfg.p_hat_p()).abs() < 1e-4);
    }

    #[test]
    fn both_threshold_reference_values() {
        let cfg = base();
        assert!((competing_threshold_both(1.0, 0.2, &cfg).unwrap() - 0.6).abs() < 1e-9);
        assert!((competing_threshold_both(0.5, 0.2, &cfg).unwrap() - 0.65).abs() < 1e-9);
        let err = competing_threshold_both(0.5, 0.25, &cfg).unwrap_err();
        assert!(matches!(err, ThresholdError::OutOfRegime { .. }));
    }

    #[test]
    fn cost_reduction_reference_values() {
        let cfg = base();
        let critical = critical_cost_reduction(&cfg);
        assert!((critical - 0.248528137423857).abs() < 1e-9);
        // at the root the ratio is exactly 2
        let ratio = virtual_monopoly_profit(critical, &cfg) / cfg.demand.profit(0.7, 0.4);
        assert!((ratio - 2.0).abs() < 1e-6);
        let three_halves = cost_reduction_for_profit_ratio(1.5, &cfg);
        assert!((three_halves - 0.1348469228349535).abs() < 1e-9);
        assert!((cost_reduction_for_profit_ratio(1.0, &cfg)).abs() < 1e-9);
    }

    #[test]
    fn critical_clamps_to_c_p_for_flat_ratio() {
        // Small c_p: even full cost reduction keeps the ratio below 2.
        let mut cfg = base();
        cfg.c_p = 0.05;
        cfg.delta_c = 0.05;
        let ratio_at_cap = virtual_monopoly_profit(cfg.c_p, &cfg)
            / cfg.demand.profit(cfg.p_hat_p(), cfg.c_p);
        assert!(ratio_at_cap < 2.0);
        assert_eq!(critical_cost_reduction(&cfg), cfg.c_p);
    }

    #[test]
    fn lambda_inverse_round_trips() {
        let cfg = base();
        for lambda in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let r_p = competing_threshold_new_only(lambda, &cfg);
            let back = lambda_for_threshold(r_p, &cfg).unwrap();
            assert!((back - lambda).abs() < 1e-6, "lambda {lambda} -> {back}");
        }
        // r_p close to c_p maps to full access.
        let back = lambda_for_threshold(cfg.c_p + 1e-10, &cfg).unwrap();
        assert!((back - 1.0).abs() < 1e-4);
        assert!(lambda_for_threshold(0.75, &cfg).is_err());
        assert!(lambda_for_threshold(0.3, &cfg).is_err());
    }

    #[test]
    fn monotonicity_on_grids() {
        let cfg = base();
        let mut prev = f64::INFINITY;
        for i in 1..=20 {
            let l = i as f64 / 20.0;
            let t = competing_threshold_new_only(l, &cfg);
            assert!(t < prev + 1e-12);
            prev = t;
        }
        let mut prev = f64::INFINITY;
        for i in 1..=20 {
            let l = i as f64 / 20.0;
            let t = competing_threshold_both(l, 0.2, &cfg).unwrap();
            assert!(t < prev + 1e-12);
            prev = t;
        }
        let mut prev = -f64::INFINITY;
        for i in 1..=20 {
            let dc = 0.24 * i as f64 / 20.0;
            let t = competing_threshold_both(0.5, dc, &cfg).unwrap();
            assert!(t > prev - 1e-12);
            prev = t;
        }
    }

    // Both thresholds must satisfy their defining indifference equations, and
    // the dual-shop threshold must sit strictly above the single-shop one.
    #[test]
    fn indifference_residuals_on_random_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let cfg = sampling::feasible_config(&mut rng);
            let d = cfg.demand;
            let profit_hat = d.profit(cfg.p_hat_p(), cfg.c_p);
            let t1 = competing_threshold_new_only(cfg.lambda, &cfg);
            let res1 = d.profit(t1, cfg.c_p) * (1.0 - cfg.lambda / 2.0)
                - profit_hat * (1.0 - cfg.lambda);
            assert!(res1.abs() < 1e-9, "residual {res1}");
            assert!(t1 >= cfg.c_p - 1e-12 && t1 < cfg.p_hat_p());

            if let Ok(t2) = competing_threshold_both(cfg.lambda, cfg.delta_c, &cfg) {
                let profit_v = d.profit(cfg.p_hat_v(), cfg.c_v());
                let res2 = profit_v * cfg.lambda / 3.0
                    + d.profit(t2, cfg.c_p) * (cfg.lambda / 3.0 + 1.0 - cfg.lambda)
                    - profit_v * cfg.lambda / 2.0
                    - profit_hat * (1.0 - cfg.lambda);
                assert!(res2.abs() < 1e-9, "residual {res2}");
                assert!(t2 > t1 && t2 > cfg.c_p && t2 < cfg.p_hat_p());
            }
            // ratio-3/2 level always below the critical level
            let a = cost_reduction_for_profit_ratio(1.5, &cfg);
            let b = critical_cost_reduction(&cfg);
            assert!(a < b + 1e-12);
        }
    }
}
