//! Market primitives: shop identities, opening profiles and the full
//! parameter set of one market.

use crate::demand::DemandSpec;
use std::fmt;
use thiserror::Error;

/// The three shops that can ever exist in the market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shop {
    /// The entrant's virtual shop (Web only, marginal cost `c_v`).
    VirtualNew,
    /// The incumbent's virtual shop (`c_v`, or `c_vo` under efficiency loss).
    VirtualOld,
    /// The incumbent's physical shop (`c_p`; buying requires a trip).
    Physical,
}

impl Shop {
    pub const ALL: [Shop; 3] = [Shop::VirtualNew, Shop::VirtualOld, Shop::Physical];

    pub fn is_virtual(self) -> bool {
        !matches!(self, Shop::Physical)
    }

    pub fn label(self) -> &'static str {
        match self {
            Shop::VirtualNew => "vn",
            Shop::VirtualOld => "vo",
            Shop::Physical => "p",
        }
    }
}

impl fmt::Display for Shop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Stage-1 outcome: which firms opened a virtual shop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OpeningProfile {
    pub new_opens: bool,
    pub old_opens: bool,
}

impl OpeningProfile {
    pub const NONE: OpeningProfile = OpeningProfile { new_opens: false, old_opens: false };
    pub const NEW_ONLY: OpeningProfile = OpeningProfile { new_opens: true, old_opens: false };
    pub const OLD_ONLY: OpeningProfile = OpeningProfile { new_opens: false, old_opens: true };
    pub const BOTH: OpeningProfile = OpeningProfile { new_opens: true, old_opens: true };

    pub const fn all() -> [OpeningProfile; 4] {
        [Self::NONE, Self::NEW_ONLY, Self::OLD_ONLY, Self::BOTH]
    }

    pub fn new(new_opens: bool, old_opens: bool) -> Self {
        OpeningProfile { new_opens, old_opens }
    }

    /// Shops whose Web sites exist under this profile. The physical shop
    /// posts its price on-line as soon as any virtual shop opens; with no
    /// virtual shop there is no on-line search at all.
    pub fn web_sites(&self) -> Vec<Shop> {
        let mut sites = Vec::with_capacity(3);
        if self.new_opens {
            sites.push(Shop::VirtualNew);
        }
        if self.old_opens {
            sites.push(Shop::VirtualOld);
        }
        if !sites.is_empty() {
            sites.push(Shop::Physical);
        }
        sites
    }

    /// Shops that trade under this profile (the physical shop always exists).
    pub fn active_shops(&self) -> Vec<Shop> {
        let mut shops = Vec::with_capacity(3);
        if self.new_opens {
            shops.push(Shop::VirtualNew);
        }
        if self.old_opens {
            shops.push(Shop::VirtualOld);
        }
        shops.push(Shop::Physical);
        shops
    }

    pub fn label(&self) -> &'static str {
        match (self.new_opens, self.old_opens) {
            (false, false) => "(0,0)",
            (true, false) => "(1,0)",
            (false, true) => "(0,1)",
            (true, true) => "(1,1)",
        }
    }
}

impl fmt::Display for OpeningProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Whether delivery of the good takes time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Ordinary goods: buying on-line means waiting `delta_delivery > 0`.
    #[default]
    Standard,
    /// Digitizable goods delivered instantly: `delta_delivery = 0`, which
    /// inverts the on-line/off-line price ordering in competing equilibria.
    InfoGoods,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::InfoGoods => "info_goods",
        }
    }
}

/// Options threaded through the solvers.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    pub mode: Mode,
    /// Price the incumbent's virtual shop at `min(c_vo, p_hat_vo)` instead of
    /// `min(r_vo, p_hat_vo)` in the asymmetric-cost case. The cost variant
    /// forfeits all virtual profit and is kept only so it can be exercised.
    pub literal_old_virtual_rule: bool,
    /// Downgrade equilibrium-consistency violations from errors to warnings.
    /// Used when solving configurations that fail the feasibility checks.
    pub lenient: bool,
}

/// One optional value per shop. Used for prices, shares and profits, where
/// a shop only carries a value while it trades.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerShop<T> {
    pub vn: Option<T>,
    pub vo: Option<T>,
    pub p: Option<T>,
}

impl<T: Copy> PerShop<T> {
    pub fn get(&self, shop: Shop) -> Option<T> {
        match shop {
            Shop::VirtualNew => self.vn,
            Shop::VirtualOld => self.vo,
            Shop::Physical => self.p,
        }
    }

    pub fn set(&mut self, shop: Shop, value: T) {
        match shop {
            Shop::VirtualNew => self.vn = Some(value),
            Shop::VirtualOld => self.vo = Some(value),
            Shop::Physical => self.p = Some(value),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Shop, T)> + '_ {
        Shop::ALL
            .into_iter()
            .filter_map(|s| self.get(s).map(|v| (s, v)))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// All primitives of one market.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketConfig {
    /// Fraction of consumers with Internet access, in (0, 1].
    pub lambda: f64,
    /// Physical shop marginal cost, in (0, choke price).
    pub c_p: f64,
    /// Production cost reduction of the virtual technology, in (0, c_p].
    pub delta_c: f64,
    /// One-off cost of opening a virtual shop, >= 0.
    pub setup_cost: f64,
    /// Cost of a trip to the physical shop (sigma > 0).
    pub sigma: f64,
    /// Search cost reduction of a Web visit relative to a trip, in (0, sigma).
    pub delta_sigma: f64,
    /// Cost of waiting for delivery from a virtual shop, >= 0.
    pub delta_delivery: f64,
    /// Incumbent's efficiency loss at running a virtual shop, in [0, 1].
    pub e_loss: f64,
    pub demand: DemandSpec,
}

impl MarketConfig {
    /// Entrant's virtual marginal cost `c_v = c_p - delta_c`.
    pub fn c_v(&self) -> f64 {
        self.c_p - self.delta_c
    }

    /// Incumbent's virtual marginal cost `c_vo = c_p - (1 - e) * delta_c`.
    pub fn c_vo(&self) -> f64 {
        self.c_p - (1.0 - self.e_loss) * self.delta_c
    }

    pub fn cost_of(&self, shop: Shop) -> f64 {
        match shop {
            Shop::VirtualNew => self.c_v(),
            Shop::VirtualOld => self.c_vo(),
            Shop::Physical => self.c_p,
        }
    }

    /// Cost a consumer bears when buying from `shop`: the trip for the
    /// physical shop, the delivery wait for a virtual one.
    pub fn buy_cost(&self, shop: Shop) -> f64 {
        if shop.is_virtual() {
            self.delta_delivery
        } else {
            self.sigma
        }
    }

    /// Cost of one Web visit.
    pub fn web_visit_cost(&self) -> f64 {
        self.sigma - self.delta_sigma
    }

    pub fn p_hat_p(&self) -> f64 {
        self.demand.monopoly_price(self.c_p).expect("validated config")
    }

    pub fn p_hat_v(&self) -> f64 {
        self.demand.monopoly_price(self.c_v()).expect("validated config")
    }

    pub fn p_hat_vo(&self) -> f64 {
        self.demand.monopoly_price(self.c_vo()).expect("validated config")
    }

    pub fn choke_price(&self) -> f64 {
        self.demand.choke_price()
    }

    /// Surplus gap `S(p_hat_v) - S(p_hat_p)`; positive whenever delta_c > 0.
    pub fn delta_surplus(&self) -> f64 {
        self.demand.surplus(self.p_hat_v()) - self.demand.surplus(self.p_hat_p())
    }

    // Negated comparisons so NaN fails every check.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError::Invalid(m));
        self.demand.validate().map_err(ConfigError::Invalid)?;
        let r = self.choke_price();
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return err(format!("lambda must be in (0, 1], got {}", self.lambda));
        }
        if !(self.c_p > 0.0 && self.c_p < r) {
            return err(format!("c_p must be in (0, {r}), got {}", self.c_p));
        }
        if !(self.delta_c > 0.0 && self.delta_c <= self.c_p) {
            return err(format!(
                "delta_c must be in (0, c_p = {}], got {}",
                self.c_p, self.delta_c
            ));
        }
        if !(self.setup_cost >= 0.0) {
            return err(format!("K must be >= 0, got {}", self.setup_cost));
        }
        if !(self.sigma > 0.0) {
            return err(format!("sigma must be > 0, got {}", self.sigma));
        }
        if !(self.delta_sigma > 0.0 && self.delta_sigma < self.sigma) {
            return err(format!(
                "delta_sigma must be in (0, sigma = {}), got {}",
                self.sigma, self.delta_sigma
            ));
        }
        if !(self.delta_delivery >= 0.0) {
            return err(format!("delta must be >= 0, got {}", self.delta_delivery));
        }
        if !(self.e_loss >= 0.0 && self.e_loss <= 1.0) {
            return err(format!("e must be in [0, 1], got {}", self.e_loss));
        }
        // Even at the maximum cost reduction the physical shop can match the
        // virtual monopoly price without selling at a loss.
        let p_hat_v_max = self
            .demand
            .monopoly_price(0.0)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(self.c_p < p_hat_v_max) {
            return err(format!(
                "c_p must lie below the zero-cost monopoly price {p_hat_v_max}, got {}",
                self.c_p
            ));
        }
        Ok(())
    }
}
