//! Equilibrium price distributions and first-order stochastic dominance.
//!
//! Two discrete distributions are built from a solved equilibrium: the
//! *transaction* distribution weights each shop's price by its consumer
//! share (prices paid by the unit consumer mass), and the *market*
//! distribution weights every trading shop's posted price equally. The
//! cross-profile dominance orderings hold for the market distribution;
//! transaction weights shift with the regime's share splits and need not be
//! comparable.

use crate::config::OpeningProfile;
use crate::pricing::PriceEquilibrium;

/// Price equality tolerance when merging and comparing atoms.
const PRICE_TOL: f64 = 1e-12;

/// A discrete price distribution: positive masses on sorted atoms, total 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceDistribution {
    pub profile: OpeningProfile,
    pub atoms: Vec<(f64, f64)>,
}

/// Four-way outcome of a dominance comparison. Dominance is weak
/// (`F <= G` everywhere) with exact equality split out, so a non-equal
/// dominance verdict is always strict somewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FosdOrder {
    Equal,
    /// The left distribution dominates (prices stochastically higher).
    Dominates,
    /// The right distribution dominates.
    DominatedBy,
    Incomparable,
}

impl FosdOrder {
    pub fn label(self) -> &'static str {
        match self {
            FosdOrder::Equal => "equal",
            FosdOrder::Dominates => "dominates",
            FosdOrder::DominatedBy => "dominated",
            FosdOrder::Incomparable => "incomparable",
        }
    }

    /// True when `self` reports the left side weakly below the right in the
    /// price ordering (right dominates or both equal).
    pub fn left_weakly_below(self) -> bool {
        matches!(self, FosdOrder::Equal | FosdOrder::DominatedBy)
    }
}

fn build(profile: OpeningProfile, weighted: impl Iterator<Item = (f64, f64)>) -> PriceDistribution {
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for (price, mass) in weighted {
        if mass <= 0.0 {
            continue;
        }
        match atoms.iter_mut().find(|(p, _)| (*p - price).abs() <= PRICE_TOL) {
            Some((_, m)) => *m += mass,
            None => atoms.push((price, mass)),
        }
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = atoms.iter().map(|(_, m)| m).sum();
    debug_assert!((total - 1.0).abs() < 1e-9, "masses must sum to 1, got {total}");
    PriceDistribution { profile, atoms }
}

/// Prices paid by the unit consumer mass: one atom per trading shop at its
/// price, weighted by its consumer share; equal prices merged.
pub fn transaction_distribution(eq: &PriceEquilibrium) -> PriceDistribution {
    build(
        eq.profile,
        eq.prices
            .iter()
            .map(|(shop, price)| (price, eq.shares.get(shop).unwrap_or(0.0))),
    )
}

/// Posted prices of the trading shops, equally weighted; equal prices merged.
pub fn market_distribution(eq: &PriceEquilibrium) -> PriceDistribution {
    let n = eq.prices.iter().count() as f64;
    build(eq.profile, eq.prices.iter().map(|(_, price)| (price, 1.0 / n)))
}

impl PriceDistribution {
    /// CDF evaluated at `p` (atoms within tolerance count as at-or-below).
    pub fn cdf(&self, p: f64) -> f64 {
        self.atoms
            .iter()
            .take_while(|(price, _)| *price <= p + PRICE_TOL)
            .map(|(_, m)| m)
            .sum()
    }
}

/// Per-profile distributions plus the pairwise market-distribution orderings.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub transaction: Vec<PriceDistribution>,
    pub market: Vec<PriceDistribution>,
    /// `fosd(market(a), market(b))` for every unordered profile pair.
    pub comparisons: Vec<(OpeningProfile, OpeningProfile, FosdOrder)>,
}

impl DominanceReport {
    pub fn comparison(&self, a: OpeningProfile, b: OpeningProfile) -> Option<FosdOrder> {
        self.comparisons
            .iter()
            .find(|(x, y, _)| (*x, *y) == (a, b))
            .map(|(_, _, o)| *o)
    }
}

/// Build both distribution families and all pairwise market comparisons from
/// the four solved profiles.
pub fn dominance_report(profiles: &[crate::ProfileSolution]) -> DominanceReport {
    let transaction: Vec<PriceDistribution> = profiles
        .iter()
        .map(|p| transaction_distribution(&p.equilibrium))
        .collect();
    let market: Vec<PriceDistribution> = profiles
        .iter()
        .map(|p| market_distribution(&p.equilibrium))
        .collect();
    let mut comparisons = Vec::new();
    for i in 0..market.len() {
        for j in 0..market.len() {
            if i == j {
                continue;
            }
            comparisons.push((
                market[i].profile,
                market[j].profile,
                fosd(&market[i], &market[j]),
            ));
        }
    }
    DominanceReport { transaction, market, comparisons }
}

/// Compare two discrete distributions pointwise on the union of their atom
/// prices (sufficient for step functions).
pub fn fosd(f: &PriceDistribution, g: &PriceDistribution) -> FosdOrder {
    let mut grid: Vec<f64> = f
        .atoms
        .iter()
        .chain(g.atoms.iter())
        .map(|(p, _)| *p)
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= PRICE_TOL);

    // f dominates g when F(p) <= G(p) everywhere.
    let mut f_below = true;
    let mut g_below = true;
    for p in grid {
        let cf = f.cdf(p);
        let cg = g.cdf(p);
        if cf > cg + PRICE_TOL {
            f_below = false;
        }
        if cg > cf + PRICE_TOL {
            g_below = false;
        }
    }
    match (f_below, g_below) {
        (true, true) => FosdOrder::Equal,
        (true, false) => FosdOrder::Dominates,
        (false, true) => FosdOrder::DominatedBy,
        (false, false) => FosdOrder::Incomparable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{MarketConfig, SolveOptions};
    use crate::demand::DemandSpec;
    use crate::search::solve_fixed_point;
    use proptest::prelude::*;

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

    fn solved(profile: OpeningProfile) -> PriceEquilibrium {
        solve_fixed_point(profile, &base(), SolveOptions::default())
            .unwrap()
            .equilibrium
    }

    fn dist(profile: OpeningProfile, atoms: &[(f64, f64)]) -> PriceDistribution {
        PriceDistribution { profile, atoms: atoms.to_vec() }
    }

    #[test]
    fn transaction_atoms_reference_values() {
        let t = transaction_distribution(&solved(OpeningProfile::NONE));
        assert_eq!(t.atoms.len(), 1);
        assert!((t.atoms[0].0 - 0.7).abs() < 1e-12);
        assert!((t.atoms[0].1 - 1.0).abs() < 1e-12);

        let t = transaction_distribution(&solved(OpeningProfile::NEW_ONLY));
        assert_eq!(t.atoms.len(), 2);
        assert!((t.atoms[0].0 - 0.6).abs() < 1e-12);
        assert!((t.atoms[0].1 - 0.25).abs() < 1e-12);
        assert!((t.atoms[1].0 - 0.6258342613226058).abs() < 1e-9);
        assert!((t.atoms[1].1 - 0.75).abs() < 1e-12);

        // equal virtual prices merge into one atom
        let t = transaction_distribution(&solved(OpeningProfile::BOTH));
        assert_eq!(t.atoms.len(), 2);
        assert!((t.atoms[0].0 - 0.6).abs() < 1e-12);
        assert!((t.atoms[0].1 - 0.5).abs() < 1e-12);
        assert!((t.atoms[1].0 - 0.7).abs() < 1e-12);
        assert!((t.atoms[1].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn market_atoms_weight_shops_equally() {
        let m = market_distribution(&solved(OpeningProfile::BOTH));
        // two virtual shops at 0.6, physical at 0.7
        assert_eq!(m.atoms.len(), 2);
        assert!((m.atoms[0].1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.atoms[1].1 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fosd_reflexive_and_reference_orderings() {
        let f10 = market_distribution(&solved(OpeningProfile::NEW_ONLY));
        let f00 = market_distribution(&solved(OpeningProfile::NONE));
        let f01 = market_distribution(&solved(OpeningProfile::OLD_ONLY));
        let f11 = market_distribution(&solved(OpeningProfile::BOTH));
        assert_eq!(fosd(&f10, &f10), FosdOrder::Equal);
        // the all-monopoly profile dominates everything
        assert_eq!(fosd(&f10, &f00), FosdOrder::DominatedBy);
        assert_eq!(fosd(&f01, &f00), FosdOrder::DominatedBy);
        assert_eq!(fosd(&f10, &f01), FosdOrder::DominatedBy);
        assert_eq!(fosd(&f11, &f01), FosdOrder::DominatedBy);
        // competing (1,0) vs segmentation (1,1): heavier left tail but a
        // higher physical price; not comparable
        assert_eq!(fosd(&f11, &f10), FosdOrder::Incomparable);
        assert_eq!(fosd(&f10, &f11), FosdOrder::Incomparable);
    }

    #[test]
    fn transaction_weights_can_break_the_ordering() {
        // Share weights put mass lambda on the incumbent-only virtual price
        // but only lambda/2 under the competing profile, so the comparison
        // fails in one direction at the low atom and the other at the top.
        let f10 = transaction_distribution(&solved(OpeningProfile::NEW_ONLY));
        let f01 = transaction_distribution(&solved(OpeningProfile::OLD_ONLY));
        assert_eq!(fosd(&f10, &f01), FosdOrder::Incomparable);
    }

    #[test]
    fn fosd_handles_handmade_cases() {
        let a = dist(OpeningProfile::NONE, &[(0.5, 0.5), (0.8, 0.5)]);
        let b = dist(OpeningProfile::NONE, &[(0.6, 0.5), (0.8, 0.5)]);
        assert_eq!(fosd(&a, &b), FosdOrder::DominatedBy);
        assert_eq!(fosd(&b, &a), FosdOrder::Dominates);
        let c = dist(OpeningProfile::NONE, &[(0.4, 0.5), (0.9, 0.5)]);
        assert_eq!(fosd(&a, &c), FosdOrder::Incomparable);
    }

    proptest! {
        // Antisymmetry and transitivity of the weak dominance relation on
        // random three-atom distributions over a shared grid.
        #[test]
        fn fosd_is_a_partial_order(
            masses in proptest::collection::vec((1u32..=10, 1u32..=10, 1u32..=10), 3)
        ) {
            let mk = |w: (u32, u32, u32)| {
                let total = (w.0 + w.1 + w.2) as f64;
                dist(
                    OpeningProfile::NONE,
                    &[
                        (0.2, w.0 as f64 / total),
                        (0.5, w.1 as f64 / total),
                        (0.8, w.2 as f64 / total),
                    ],
                )
            };
            let d: Vec<PriceDistribution> = masses.into_iter().map(mk).collect();
            // antisymmetry up to equality
            for x in &d {
                for y in &d {
                    match fosd(x, y) {
                        FosdOrder::Dominates => prop_assert_eq!(fosd(y, x), FosdOrder::DominatedBy),
                        FosdOrder::Equal => prop_assert_eq!(fosd(y, x), FosdOrder::Equal),
                        _ => {}
                    }
                }
            }
            // transitivity of weak dominance
            if fosd(&d[0], &d[1]).left_weakly_below() && fosd(&d[1], &d[2]).left_weakly_below() {
                prop_assert!(fosd(&d[0], &d[2]).left_weakly_below());
            }
        }
    }
}
