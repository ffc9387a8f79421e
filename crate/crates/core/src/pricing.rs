//! Stage-2 price equilibria.
//!
//! Virtual shops hold the lowest costs and are never constrained by search,
//! so they post their monopoly prices. The physical shop either cuts its
//! price to the on-line consumers' reservation level and serves everyone
//! (*Competing*) or keeps its monopoly price and serves only off-line
//! consumers (*Segmentation*). The choice is a direct payoff comparison,
//! which on the model's domain coincides with the threshold rules in
//! [`crate::thresholds`]; exact ties go to Segmentation.

use crate::config::{MarketConfig, OpeningProfile, PerShop, Shop, SolveOptions};
use crate::search::ReservationSet;
use thiserror::Error;

/// Tolerance bracketing an indifference tie; ties select Segmentation.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum PricingError {
    #[error("reservations were solved for profile {found}, pricing requested {expected}")]
    ProfileMismatch { expected: String, found: String },
    #[error("missing reservation price for shop {shop} under profile {profile}")]
    MissingReservation { shop: Shop, profile: String },
    #[error("asymmetric price rule requires e > 0; use the symmetric rule")]
    SymmetricCosts,
    #[error("profile (1,1) with e > 0 must use the asymmetric rule")]
    AsymmetricCosts,
    #[error("information-goods pricing requires delta = 0, got {delta}")]
    NonZeroDelivery { delta: f64 },
    #[error("competing price ordering violated: {details}")]
    OrderingViolated { details: String },
}

/// Which pricing regime the physical shop ends up in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// No virtual shop: the physical shop serves the whole market.
    Monopoly,
    /// Physical shop prices at the reservation level and serves everyone.
    Competing,
    /// Physical shop keeps its monopoly price and serves off-line consumers.
    Segmentation,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Monopoly => "Monopoly",
            Regime::Competing => "Competing",
            Regime::Segmentation => "Segmentation",
        }
    }
}

/// A solved price equilibrium for one opening profile.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceEquilibrium {
    pub profile: OpeningProfile,
    pub regime: Regime,
    pub prices: PerShop<f64>,
    /// Number of shops whose price on-line consumers accept.
    pub alpha: u32,
    /// Fraction of the whole consumer mass buying at each shop.
    pub shares: PerShop<f64>,
    pub per_consumer_profit: PerShop<f64>,
    /// Set when the physical regime reuses the equal-cost thresholds under
    /// asymmetric virtual costs.
    pub approximate: bool,
    /// `p_vo - p_vn` when both virtual shops are open.
    pub online_dispersion: Option<f64>,
}

impl PriceEquilibrium {
    /// Incumbent's gross expected profit (before any setup cost).
    pub fn old_firm_gross(&self) -> f64 {
        let vo = self
            .shares
            .vo
            .zip(self.per_consumer_profit.vo)
            .map_or(0.0, |(s, pi)| s * pi);
        let p = self
            .shares
            .p
            .zip(self.per_consumer_profit.p)
            .map_or(0.0, |(s, pi)| s * pi);
        vo + p
    }

    /// Entrant's gross expected profit (before any setup cost).
    pub fn new_firm_gross(&self) -> f64 {
        self.shares
            .vn
            .zip(self.per_consumer_profit.vn)
            .map_or(0.0, |(s, pi)| s * pi)
    }
}

/// Expected consumer share of one shop given prices, reservations and the
/// count `alpha` of shops acceptable to on-line consumers.
///
/// Virtual shops sell `lambda / alpha` when acceptable and nothing otherwise.
/// The physical shop adds the off-line mass `1 - lambda` as long as its price
/// has positive demand.
pub fn consumer_share(
    shop: Shop,
    prices: &PerShop<f64>,
    reservations: &ReservationSet,
    lambda: f64,
    alpha: u32,
    cfg: &MarketConfig,
) -> f64 {
    let Some(price) = prices.get(shop) else { return 0.0 };
    let r_t = reservations.get(shop).unwrap_or(f64::NEG_INFINITY);
    match shop {
        Shop::VirtualNew | Shop::VirtualOld => {
            if price <= r_t {
                lambda / alpha as f64
            } else {
                0.0
            }
        }
        Shop::Physical => {
            if price > cfg.choke_price() {
                0.0
            } else if price > r_t {
                1.0 - lambda
            } else {
                lambda / alpha as f64 + 1.0 - lambda
            }
        }
    }
}

fn check_inputs(
    expected: OpeningProfile,
    reservations: &ReservationSet,
) -> Result<(), PricingError> {
    if reservations.profile != expected {
        return Err(PricingError::ProfileMismatch {
            expected: expected.label().to_string(),
            found: reservations.profile.label().to_string(),
        });
    }
    for shop in expected.web_sites() {
        if reservations.get(shop).is_none() {
            return Err(PricingError::MissingReservation {
                shop,
                profile: expected.label().to_string(),
            });
        }
    }
    Ok(())
}

/// Count how many shops on-line consumers accept; ties count as acceptance.
fn count_alpha(profile: OpeningProfile, prices: &PerShop<f64>, res: &ReservationSet) -> u32 {
    if profile == OpeningProfile::NONE {
        return 1;
    }
    profile
        .web_sites()
        .into_iter()
        .filter(|&s| {
            let (Some(p), Some(r)) = (prices.get(s), res.get(s)) else { return false };
            p <= r
        })
        .count() as u32
}

fn assemble(
    profile: OpeningProfile,
    regime: Regime,
    prices: PerShop<f64>,
    res: &ReservationSet,
    cfg: &MarketConfig,
    approximate: bool,
) -> PriceEquilibrium {
    let alpha = count_alpha(profile, &prices, res);
    let mut shares = PerShop::default();
    let mut profits = PerShop::default();
    for (shop, price) in prices.iter() {
        shares.set(
            shop,
            consumer_share(shop, &prices, res, cfg.lambda, alpha, cfg),
        );
        profits.set(shop, cfg.demand.profit(price, cfg.cost_of(shop)));
    }
    let online_dispersion = prices
        .vo
        .zip(prices.vn)
        .map(|(p_vo, p_vn)| p_vo - p_vn);
    PriceEquilibrium {
        profile,
        regime,
        prices,
        alpha,
        shares,
        per_consumer_profit: profits,
        approximate,
        online_dispersion,
    }
}

/// Physical-shop payoffs of serving everyone at `min(r_p, p_hat_p)` versus
/// serving off-line consumers only, with the virtual-shop share adjustment
/// applied when the incumbent also runs a virtual shop.
fn physical_regime(
    r_p: f64,
    own_virtual_profit: Option<f64>,
    cfg: &MarketConfig,
) -> (Regime, f64) {
    let d = cfg.demand;
    let lambda = cfg.lambda;
    let p_hat_p = cfg.p_hat_p();
    let cut_price = r_p.min(p_hat_p);
    let (serve_all, keep_out) = match own_virtual_profit {
        // Entrant's virtual shop only: alpha 2 vs 1 leaves the rival's share
        // out of the incumbent's payoff.
        None => (
            d.profit(cut_price, cfg.c_p) * (lambda / 2.0 + 1.0 - lambda),
            d.profit(p_hat_p, cfg.c_p) * (1.0 - lambda),
        ),
        // Both virtual shops open: cutting also halves the incumbent's own
        // virtual share (lambda/3 instead of lambda/2).
        Some(pi_vo) => (
            d.profit(cut_price, cfg.c_p) * (lambda / 3.0 + 1.0 - lambda) + pi_vo * lambda / 3.0,
            d.profit(p_hat_p, cfg.c_p) * (1.0 - lambda) + pi_vo * lambda / 2.0,
        ),
    };
    if serve_all > keep_out + TIE_EPS {
        (Regime::Competing, cut_price)
    } else {
        (Regime::Segmentation, p_hat_p)
    }
}

/// Equilibrium prices, regime and shares under equal virtual costs (and for
/// every profile except (1,1) under unequal ones, where the incumbent's
/// virtual cost simply replaces the entrant's).
pub fn price_equilibrium(
    profile: OpeningProfile,
    reservations: &ReservationSet,
    cfg: &MarketConfig,
) -> Result<PriceEquilibrium, PricingError> {
    check_inputs(profile, reservations)?;
    let mut prices = PerShop::default();
    let eq = match profile {
        OpeningProfile::NONE => {
            prices.set(Shop::Physical, cfg.p_hat_p());
            assemble(profile, Regime::Monopoly, prices, reservations, cfg, false)
        }
        OpeningProfile::NEW_ONLY => {
            prices.set(Shop::VirtualNew, cfg.p_hat_v());
            let r_p = reservations.r_p.expect("checked");
            let (regime, p_p) = physical_regime(r_p, None, cfg);
            prices.set(Shop::Physical, p_p);
            assemble(profile, regime, prices, reservations, cfg, false)
        }
        OpeningProfile::OLD_ONLY => {
            // Alone in the market, the incumbent never cuts the physical
            // price: any on-line consumer attracted would be stolen from its
            // own virtual shop at no smaller per-consumer profit.
            prices.set(Shop::VirtualOld, cfg.p_hat_vo());
            prices.set(Shop::Physical, cfg.p_hat_p());
            assemble(profile, Regime::Segmentation, prices, reservations, cfg, false)
        }
        OpeningProfile::BOTH => {
            if cfg.e_loss > 0.0 {
                return Err(PricingError::AsymmetricCosts);
            }
            let p_hat_v = cfg.p_hat_v();
            prices.set(Shop::VirtualNew, p_hat_v);
            prices.set(Shop::VirtualOld, p_hat_v);
            let pi_vo = cfg.demand.profit(p_hat_v, cfg.c_v());
            let r_p = reservations.r_p.expect("checked");
            let (regime, p_p) = physical_regime(r_p, Some(pi_vo), cfg);
            prices.set(Shop::Physical, p_p);
            assemble(profile, regime, prices, reservations, cfg, false)
        }
    };
    Ok(eq)
}

/// Equilibrium for profile (1,1) when the incumbent runs its virtual shop at
/// a cost disadvantage (`e > 0`).
///
/// The entrant still posts its monopoly price; the incumbent's virtual shop
/// posts `min(r_vo, p_hat_vo)` (or `min(c_vo, p_hat_vo)` under the literal
/// rule), producing on-line price dispersion. No indifference threshold is
/// derived for the unequal-cost physical shop, so the regime reuses the
/// equal-cost comparison and the result is flagged approximate.
pub fn price_equilibrium_asym(
    profile: OpeningProfile,
    reservations: &ReservationSet,
    cfg: &MarketConfig,
    literal_rule: bool,
) -> Result<PriceEquilibrium, PricingError> {
    if cfg.e_loss <= 0.0 {
        return Err(PricingError::SymmetricCosts);
    }
    if profile != OpeningProfile::BOTH {
        return Err(PricingError::ProfileMismatch {
            expected: OpeningProfile::BOTH.label().to_string(),
            found: profile.label().to_string(),
        });
    }
    check_inputs(profile, reservations)?;
    let mut prices = PerShop::default();
    prices.set(Shop::VirtualNew, cfg.p_hat_v());
    let p_hat_vo = cfg.p_hat_vo();
    let cap = if literal_rule {
        cfg.c_vo()
    } else {
        reservations.r_vo.expect("checked")
    };
    prices.set(Shop::VirtualOld, cap.min(p_hat_vo));
    // Equal-cost regime comparison: the incumbent's virtual profit is taken
    // at the entrant's cost, exactly as with e = 0.
    let pi_vo_symmetric = cfg.demand.profit(cfg.p_hat_v(), cfg.c_v());
    let r_p = reservations.r_p.expect("checked");
    let (regime, p_p) = physical_regime(r_p, Some(pi_vo_symmetric), cfg);
    prices.set(Shop::Physical, p_p);
    Ok(assemble(profile, regime, prices, reservations, cfg, true))
}

/// Equilibrium for zero-delivery-cost (information) goods: the price rules
/// are unchanged, but a competing physical shop now undercuts the virtual
/// ones, and the result is verified to respect that inverted ordering.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // negated so NaN trips the check
pub fn info_goods_equilibrium(
    profile: OpeningProfile,
    reservations: &ReservationSet,
    cfg: &MarketConfig,
) -> Result<PriceEquilibrium, PricingError> {
    if cfg.delta_delivery != 0.0 {
        return Err(PricingError::NonZeroDelivery { delta: cfg.delta_delivery });
    }
    let eq = price_equilibrium(profile, reservations, cfg)?;
    if eq.regime == Regime::Competing {
        let virt_min = [eq.prices.vn, eq.prices.vo]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min);
        let p_p = eq.prices.p.expect("physical always priced");
        if !(p_p < virt_min) {
            return Err(PricingError::OrderingViolated {
                details: format!("physical {p_p} should undercut virtual {virt_min}"),
            });
        }
    }
    Ok(eq)
}

/// Route to the applicable price rule for the solver loop.
pub fn equilibrium_for(
    profile: OpeningProfile,
    reservations: &ReservationSet,
    cfg: &MarketConfig,
    opts: SolveOptions,
) -> Result<PriceEquilibrium, PricingError> {
    if profile == OpeningProfile::BOTH && cfg.e_loss > 0.0 {
        price_equilibrium_asym(profile, reservations, cfg, opts.literal_old_virtual_rule)
    } else {
        price_equilibrium(profile, reservations, cfg)
    }
}
