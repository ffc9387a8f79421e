//! Cross-module property suites on randomly drawn feasible configurations.

use ecsearch::config::{MarketConfig, Mode, OpeningProfile, Shop, SolveOptions};
use ecsearch::demand::DemandSpec;
use ecsearch::sampling::{feasible_config, steer_regime, RegimeTarget};
use ecsearch::search::solve_fixed_point;
use ecsearch::sim::{simulate, SimConfig};
use ecsearch::solve_market;
use ecsearch::thresholds;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn reference_config() -> MarketConfig {
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

// The returned reservations satisfy their defining stopping-margin equations
// to 1e-9 in every profile.
#[test]
fn reservation_equation_residuals_vanish() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let visit = |cfg: &MarketConfig| cfg.sigma - cfg.delta_sigma;
    for _ in 0..100 {
        let cfg = feasible_config(&mut rng);
        for profile in [OpeningProfile::NEW_ONLY, OpeningProfile::OLD_ONLY, OpeningProfile::BOTH]
        {
            let sol = solve_fixed_point(profile, &cfg, SolveOptions::default()).unwrap();
            let eq = &sol.equilibrium;
            let sites = profile.web_sites();
            for &shop in &sites {
                let r_t = sol.reservations.get(shop).unwrap();
                if r_t >= cfg.choke_price() {
                    continue; // clamped; no interior root to check
                }
                let s_r = cfg.demand.surplus(r_t) - cfg.buy_cost(shop);
                let mut alts: Vec<f64> = sites
                    .iter()
                    .filter(|&&s| s != shop)
                    .map(|&s| {
                        cfg.demand.surplus(eq.prices.get(s).unwrap()) - cfg.buy_cost(s)
                    })
                    .collect();
                alts.sort_by(f64::total_cmp);
                let residual = match alts.len() {
                    1 => (alts[0] - s_r) - visit(&cfg),
                    2 => {
                        let (worse, better) = (alts[0], alts[1]);
                        if s_r < worse {
                            0.5 * (better - s_r) + 0.5 * (worse - s_r) - visit(&cfg)
                        } else {
                            0.5 * (better - s_r) - visit(&cfg)
                        }
                    }
                    _ => unreachable!(),
                };
                assert!(
                    residual.abs() < 1e-9,
                    "{profile} {shop}: residual {residual}"
                );
            }
        }
    }
}

// With zero delivery cost the physical reservation price undercuts any
// virtual price it responds to.
#[test]
fn zero_delivery_reservation_sits_below_virtual_prices() {
    let mut cfg = reference_config();
    cfg.delta_delivery = 0.0;
    for i in 1..20 {
        let p_v = 0.05 * i as f64 * cfg.choke_price();
        let r_p = ecsearch::search::reservation_two_shops(
            (Shop::VirtualNew, p_v),
            Shop::Physical,
            &cfg,
        )
        .unwrap();
        assert!(r_p < p_v, "p_v {p_v}: r_p {r_p}");
    }
}

// The opening game always has an equilibrium, across wildly varying setup
// costs, and the entrant never gains from the incumbent opening.
#[test]
fn opening_game_always_has_an_equilibrium() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for i in 0..1000 {
        let mut cfg = feasible_config(&mut rng);
        let scale = cfg.demand.profit(cfg.p_hat_p(), cfg.c_p);
        cfg.setup_cost = rng.random_range(0.0..2.0 * scale);
        let sol = solve_market(&cfg, SolveOptions::default()).unwrap();
        assert!(
            !sol.opening.pure_equilibria.is_empty() || sol.opening.mixed_equilibrium.is_some(),
            "cfg {i}: no equilibrium"
        );
        assert!(
            sol.opening.incremental_new[1] <= sol.opening.incremental_new[0] + 1e-12,
            "cfg {i}: entrant prefers the incumbent open"
        );
        for e in &sol.opening.effects.old_firm {
            assert!(e.identity_residual.abs() < 1e-9, "cfg {i}: effects identity");
        }
    }
}

// The derived effect-presence flags coincide with the regime conditions:
// cost reduction appears when the physical shop was serving on-line
// consumers, market penetration when the entrant's share falls, price
// discrimination when opening switches the physical regime.
#[test]
fn effect_presence_matches_regime_conditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for i in 0..200 {
        let cfg = feasible_config(&mut rng);
        let sol = solve_market(&cfg, SolveOptions::default()).unwrap();
        let regime_10 = sol.profile(OpeningProfile::NEW_ONLY).equilibrium.regime;
        let regime_11 = sol.profile(OpeningProfile::BOTH).equilibrium.regime;
        let e1 = &sol.opening.effects.old_firm[1];
        use ecsearch::pricing::Regime::*;
        assert_eq!(
            e1.cost_reduction_present,
            regime_10 == Competing,
            "cfg {i}: cost reduction flag"
        );
        // The entrant's share falls only when its shop loses exclusivity or
        // headcount: segmentation -> segmentation (full to half) or
        // competing -> competing (half to third).
        let expect_mp = matches!(
            (regime_10, regime_11),
            (Segmentation, Segmentation) | (Competing, Competing)
        );
        assert_eq!(e1.market_penetration_present, expect_mp, "cfg {i}: penetration flag");
        assert_eq!(
            e1.price_discrimination_present,
            regime_10 == Competing && regime_11 == Segmentation,
            "cfg {i}: discrimination flag"
        );
        let e0 = &sol.opening.effects.old_firm[0];
        assert!(e0.cost_reduction_present, "cfg {i}: stand-alone cost reduction");
        assert!(!e0.market_penetration_present && !e0.price_discrimination_present);
    }
}

// Step-indexed physical acceptance thresholds never rise with the step.
#[test]
fn physical_step_thresholds_weakly_decreasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..100 {
        let cfg = feasible_config(&mut rng);
        for profile in [OpeningProfile::NEW_ONLY, OpeningProfile::OLD_ONLY, OpeningProfile::BOTH]
        {
            let sol = solve_fixed_point(profile, &cfg, SolveOptions::default()).unwrap();
            let steps = &sol.reservations.physical_step_thresholds;
            assert_eq!(steps.len(), profile.web_sites().len());
            for w in steps.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{profile}: {steps:?}");
            }
        }
    }
}

// Incumbent-increment and entrant-payoff monotonicity over an
// access/cost-reduction grid below the 3/2 profit-ratio level: both rise
// with cost reduction everywhere, with access within a pricing regime, and
// fall one-for-one with the setup cost.
#[test]
fn opening_incentives_monotone_on_grid() {
    let mut base = reference_config();
    base.delta_delivery = 0.0401;
    base.setup_cost = 0.002;
    let three_halves = thresholds::cost_reduction_for_profit_ratio(1.5, &base);

    let lambdas: Vec<f64> = (0..12).map(|i| 0.05 + 0.086 * i as f64).collect();
    let dcs: Vec<f64> = (0..10).map(|j| 0.01 + 0.013 * j as f64).collect();
    assert!(dcs.iter().all(|&dc| dc < three_halves));

    let solve_cell = |lambda: f64, dc: f64, k: f64| {
        let mut cfg = base.clone();
        cfg.lambda = lambda;
        cfg.delta_c = dc;
        cfg.setup_cost = k;
        let sol = solve_market(&cfg, SolveOptions::default()).unwrap();
        (
            sol.opening.incremental_old[1],
            sol.opening.incremental_new[0],
            sol.profile(OpeningProfile::NEW_ONLY).equilibrium.regime,
        )
    };

    let grid: Vec<Vec<_>> = lambdas
        .iter()
        .map(|&l| dcs.iter().map(|&dc| solve_cell(l, dc, base.setup_cost)).collect())
        .collect();

    for (i, row) in grid.iter().enumerate() {
        for (j, pair) in row.windows(2).enumerate() {
            let (d_old, v_new, _) = pair[0];
            let (d_old_next, v_new_next, _) = pair[1];
            assert!(d_old_next >= d_old - 1e-12, "cost-reduction direction at ({i},{j})");
            assert!(v_new_next >= v_new - 1e-12, "entrant payoff at ({i},{j})");
        }
    }
    for (i, rows) in grid.windows(2).enumerate() {
        for (j, (cell, cell_next)) in rows[0].iter().zip(&rows[1]).enumerate() {
            let (d_old, v_new, regime) = *cell;
            let (d_old_next, v_new_next, regime_next) = *cell_next;
            assert!(d_old_next >= d_old - 1e-12, "access direction at ({i},{j})");
            if regime == regime_next {
                assert!(v_new_next >= v_new - 1e-12, "entrant payoff in access at ({i},{j})");
            }
        }
    }
    // Raising the setup cost lowers both by exactly the increase.
    let (d_old, v_new, _) = grid[6][5];
    let (d_old_hi, v_new_hi, _) = solve_cell(lambdas[6], dcs[5], base.setup_cost + 0.001);
    assert!((d_old - d_old_hi - 0.001).abs() < 1e-12);
    assert!((v_new - v_new_hi - 0.001).abs() < 1e-12);
}

// Simulation invariants on random steered scenarios: realized search outlay
// stays below the site-count bound and nobody visits more sites than exist.
#[test]
fn simulation_outlay_and_step_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let targets = [
        RegimeTarget::NewOnlyCompeting,
        RegimeTarget::NewOnlySegmentation,
        RegimeTarget::BothCompeting,
        RegimeTarget::BothSegmentation,
    ];
    for (k, &target) in targets.iter().enumerate() {
        let cfg = steer_regime(&mut rng, target);
        let profile = match target {
            RegimeTarget::NewOnlyCompeting | RegimeTarget::NewOnlySegmentation => {
                OpeningProfile::NEW_ONLY
            }
            _ => OpeningProfile::BOTH,
        };
        let sol = solve_fixed_point(profile, &cfg, SolveOptions::default()).unwrap();
        let report =
            simulate(&SimConfig::from_solution(&cfg, &sol, 20_000, 1000 + k as u64)).unwrap();
        let sites = profile.web_sites().len();
        assert!(report.max_search_steps as usize <= sites);
        let cap = sites as f64 * (cfg.sigma - cfg.delta_sigma)
            + cfg.sigma.max(cfg.delta_delivery);
        assert!(report.max_search_expenditure <= cap + 1e-12);
        let total: f64 = Shop::ALL
            .iter()
            .filter_map(|&s| report.empirical_shares.get(s))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
        for shop in Shop::ALL {
            if let Some(z) = report.share_z.get(shop) {
                assert!(z.abs() < 5.0, "{target:?} {shop}: z = {z}");
            }
        }
    }
}

// Lenient solving of configurations that violate the delivery-cost window
// still returns a priced equilibrium and reports the violations.
#[test]
fn lenient_mode_reports_violations() {
    let mut cfg = reference_config();
    cfg.delta_delivery = 0.07; // above the (0.04, 0.06) window
    assert!(!ecsearch::search::check_feasibility(&cfg, Mode::Standard).hard_ok);
    let opts = SolveOptions { lenient: true, ..Default::default() };
    let sol = solve_fixed_point(OpeningProfile::NEW_ONLY, &cfg, opts).unwrap();
    assert!(sol.equilibrium.prices.p.is_some());
}
