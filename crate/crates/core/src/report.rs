//! Plain-text report rendering: human-readable, line-oriented `key: value`
//! sections that scripts can grep.

use crate::config::{MarketConfig, Mode, PerShop, Shop};
use crate::demand::DemandSpec;
use crate::opening::{RegionCase, Selection};
use crate::search::FeasibilityReport;
use crate::sim::SimReport;
use crate::MarketSolution;
use std::fmt::Write;

fn per_shop_line(values: &PerShop<f64>) -> String {
    let mut parts = Vec::new();
    for (shop, v) in values.iter() {
        parts.push(format!("{shop}={v}"));
    }
    parts.join(" ")
}

pub fn render_config(cfg: &MarketConfig, mode: Mode) -> String {
    let mut s = String::new();
    let DemandSpec::Linear { intercept, slope } = cfg.demand;
    writeln!(s, "== configuration ==").unwrap();
    writeln!(s, "demand: linear intercept={intercept} slope={slope}").unwrap();
    writeln!(s, "lambda: {}", cfg.lambda).unwrap();
    writeln!(s, "c_p: {}", cfg.c_p).unwrap();
    writeln!(s, "delta_c: {}", cfg.delta_c).unwrap();
    writeln!(s, "K: {}", cfg.setup_cost).unwrap();
    writeln!(s, "sigma: {}", cfg.sigma).unwrap();
    writeln!(s, "delta_sigma: {}", cfg.delta_sigma).unwrap();
    writeln!(s, "delta: {}", cfg.delta_delivery).unwrap();
    writeln!(s, "e: {}", cfg.e_loss).unwrap();
    writeln!(s, "mode: {}", mode.label()).unwrap();
    writeln!(
        s,
        "derived: c_v={} c_vo={} p_hat_v={} p_hat_p={} choke={} delta_surplus={}",
        cfg.c_v(),
        cfg.c_vo(),
        cfg.p_hat_v(),
        cfg.p_hat_p(),
        cfg.choke_price(),
        cfg.delta_surplus()
    )
    .unwrap();
    s
}

pub fn render_feasibility(report: &FeasibilityReport) -> String {
    let mut s = String::new();
    writeln!(s, "== feasibility ==").unwrap();
    writeln!(s, "hard_ok: {}", report.hard_ok).unwrap();
    writeln!(s, "surplus_warning: {}", report.surplus_warning).unwrap();
    for r in &report.restrictions {
        writeln!(
            s,
            "restriction {}: {} slack={} ({})",
            r.name,
            if r.satisfied { "ok" } else { "violated" },
            r.slack,
            r.detail
        )
        .unwrap();
    }
    s
}

pub fn render_solution(cfg: &MarketConfig, mode: Mode, sol: &MarketSolution) -> String {
    let mut s = String::new();
    s.push_str(&render_config(cfg, mode));
    s.push('\n');
    s.push_str(&render_feasibility(&sol.feasibility));

    writeln!(s, "\n== thresholds ==").unwrap();
    writeln!(s, "competing_threshold_new_only: {}", sol.thresholds.new_only).unwrap();
    match sol.thresholds.both {
        Some(t) => writeln!(s, "competing_threshold_both: {t}").unwrap(),
        None => writeln!(s, "competing_threshold_both: undefined (delta_c at or above critical)")
            .unwrap(),
    }
    writeln!(s, "cost_reduction_critical: {}", sol.thresholds.cost_reduction_critical).unwrap();
    writeln!(
        s,
        "cost_reduction_three_halves: {}",
        sol.thresholds.cost_reduction_three_halves
    )
    .unwrap();
    match sol.thresholds.lambda_at_r_p {
        Some(l) => writeln!(s, "lambda_at_r_p: {l}").unwrap(),
        None => writeln!(s, "lambda_at_r_p: undefined").unwrap(),
    }

    for p in &sol.profiles {
        let eq = &p.equilibrium;
        writeln!(s, "\n== profile {} ==", p.profile).unwrap();
        writeln!(s, "regime: {}", eq.regime.label()).unwrap();
        writeln!(s, "alpha: {}", eq.alpha).unwrap();
        writeln!(s, "prices: {}", per_shop_line(&eq.prices)).unwrap();
        writeln!(s, "shares: {}", per_shop_line(&eq.shares)).unwrap();
        writeln!(s, "per_consumer_profit: {}", per_shop_line(&eq.per_consumer_profit)).unwrap();
        let mut parts = Vec::new();
        for shop in Shop::ALL {
            if let Some(r) = p.reservations.get(shop) {
                parts.push(format!("r_{shop}={r}"));
            }
        }
        writeln!(s, "reservations: {}", parts.join(" ")).unwrap();
        if !p.reservations.physical_step_thresholds.is_empty() {
            let steps: Vec<String> = p
                .reservations
                .physical_step_thresholds
                .iter()
                .map(|v| v.to_string())
                .collect();
            writeln!(s, "physical_step_thresholds: {}", steps.join(" ")).unwrap();
        }
        if eq.approximate {
            writeln!(s, "approximate: true (unequal virtual costs reuse equal-cost regime rule)")
                .unwrap();
        }
        if let Some(d) = eq.online_dispersion {
            writeln!(s, "online_dispersion: {d}").unwrap();
        }
        for w in &p.warnings {
            writeln!(s, "warning: {w}").unwrap();
        }
    }

    let o = &sol.opening;
    writeln!(s, "\n== opening game ==").unwrap();
    for (a_n, row) in o.payoffs.iter().enumerate() {
        for (a_o, cell) in row.iter().enumerate() {
            writeln!(
                s,
                "payoff ({a_n},{a_o}): new={} old={}",
                cell.new_firm, cell.old_firm
            )
            .unwrap();
        }
    }
    writeln!(
        s,
        "incremental_new: given_old_closed={} given_old_open={}",
        o.incremental_new[0], o.incremental_new[1]
    )
    .unwrap();
    writeln!(
        s,
        "incremental_old: given_new_closed={} given_new_open={}",
        o.incremental_old[0], o.incremental_old[1]
    )
    .unwrap();
    for e in &o.effects.old_firm {
        writeln!(
            s,
            "effects old firm (rival {}): cost_reduction={}{} market_penetration={}{} price_discrimination={}{} m_c={} m_p={}",
            if e.opponent_open { "open" } else { "closed" },
            e.cost_reduction,
            if e.cost_reduction_present { "" } else { " (absent)" },
            e.market_penetration,
            if e.market_penetration_present { "" } else { " (absent)" },
            e.price_discrimination,
            if e.price_discrimination_present { "" } else { " (absent)" },
            e.m_c,
            e.m_p,
        )
        .unwrap();
    }
    writeln!(
        s,
        "business_creating: given_old_closed={} given_old_open={}",
        o.effects.business_creating[0], o.effects.business_creating[1]
    )
    .unwrap();
    let pure: Vec<&str> = o.pure_equilibria.iter().map(|p| p.label()).collect();
    writeln!(s, "pure_equilibria: {}", if pure.is_empty() { "none".into() } else { pure.join(" ") })
        .unwrap();
    match o.mixed_equilibrium {
        Some((an, ao)) => writeln!(s, "mixed_equilibrium: alpha_n={an} alpha_o={ao}").unwrap(),
        None => writeln!(s, "mixed_equilibrium: none").unwrap(),
    }
    match o.selected {
        Selection::Pure(p) => writeln!(s, "selected: {p}").unwrap(),
        Selection::Mixed { alpha_n, alpha_o } => {
            writeln!(s, "selected: mixed alpha_n={alpha_n} alpha_o={alpha_o}").unwrap()
        }
    }
    let case = match o.region.case {
        Some(RegionCase::SmallCostReduction) => "small_cost_reduction",
        Some(RegionCase::LargeCostReductionCompeting) => "large_cost_reduction_competing",
        None => "none",
    };
    writeln!(s, "region_case: {case}").unwrap();
    writeln!(
        s,
        "region_predicted: {}",
        o.region.predicted.map_or("none".to_string(), |p| p.label().to_string())
    )
    .unwrap();
    writeln!(
        s,
        "region_agrees: {}",
        o.region.agrees.map_or("n/a".to_string(), |b| b.to_string())
    )
    .unwrap();
    writeln!(
        s,
        "ordering_holds: {} ({})",
        o.ordering.holds.map_or("n/a".to_string(), |b| b.to_string()),
        o.ordering.details
    )
    .unwrap();
    if let Some(w) = &o.no_entry_warning {
        writeln!(s, "warning: {w}").unwrap();
    }

    writeln!(s, "\n== price distributions ==").unwrap();
    for d in &sol.dominance.transaction {
        let atoms: Vec<String> = d.atoms.iter().map(|(p, m)| format!("({p}, {m})")).collect();
        writeln!(s, "transaction {}: {}", d.profile, atoms.join(" ")).unwrap();
    }
    for d in &sol.dominance.market {
        let atoms: Vec<String> = d.atoms.iter().map(|(p, m)| format!("({p}, {m})")).collect();
        writeln!(s, "market {}: {}", d.profile, atoms.join(" ")).unwrap();
    }
    for (a, b, order) in &sol.dominance.comparisons {
        writeln!(s, "fosd market {a} vs {b}: {}", order.label()).unwrap();
    }
    s
}

pub fn render_sim(report: &SimReport) -> String {
    let mut s = String::new();
    writeln!(s, "== simulation {} ==", report.profile).unwrap();
    writeln!(
        s,
        "agents: {} (online {}, offline {})",
        report.n_agents, report.n_new, report.n_old
    )
    .unwrap();
    writeln!(s, "seed: {}", report.seed).unwrap();
    writeln!(s, "rng: {}", report.rng_algorithm).unwrap();
    for shop in Shop::ALL {
        let (Some(analytic), Some(empirical)) = (
            report.analytic_shares.get(shop),
            report.empirical_shares.get(shop),
        ) else {
            continue;
        };
        writeln!(
            s,
            "shop {shop}: analytic={analytic} empirical={empirical} count={} z={}",
            report.counts.get(shop).unwrap_or(0),
            report.share_z.get(shop).unwrap_or(0.0)
        )
        .unwrap();
    }
    writeln!(s, "mean_search_steps: {}", report.mean_search_steps).unwrap();
    writeln!(s, "max_search_steps: {}", report.max_search_steps).unwrap();
    match report.mean_steps_after_physical_first {
        Some(m) => writeln!(s, "mean_steps_after_physical_first: {m}").unwrap(),
        None => writeln!(s, "mean_steps_after_physical_first: n/a").unwrap(),
    }
    writeln!(
        s,
        "new_surplus: mean={} min={}",
        report.new_surplus.mean, report.new_surplus.min
    )
    .unwrap();
    writeln!(
        s,
        "old_surplus: mean={} min={}",
        report.old_surplus.mean, report.old_surplus.min
    )
    .unwrap();
    writeln!(s, "max_search_expenditure: {}", report.max_search_expenditure).unwrap();
    s
}
