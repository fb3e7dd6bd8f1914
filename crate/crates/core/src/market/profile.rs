use serde::{Deserialize, Serialize};

use super::MarketError;

/// Demand regime of a product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Low-volume, price-sensitive, limited stock (markdown pricing).
    Luxury,
    /// High-volume, weakly price-coupled, unlimited supply (daily pricing).
    Fmcg,
}

/// Generative parameters of one SKU.
///
/// `base_conversion` is the noise-free conversion at `p_min` in period 1 and
/// `annual_growth` is the year-on-year multiplicative drift of conversion.
/// Profiles sharing a `group_id` are simi-products: they differ only in
/// `base_uv` (see [`make_simi_groups`](super::make_simi_groups)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductProfile {
    pub id: u32,
    pub regime: Regime,
    pub p_min: f64,
    pub p_max: f64,
    pub unit_cost: f64,
    pub base_uv: f64,
    pub uv_volatility: f64,
    pub demand_elasticity: f64,
    pub demand_noise: f64,
    pub seasonality_period: u32,
    /// 0 means unlimited supply.
    pub initial_stock: u32,
    pub group_id: u32,
    pub base_conversion: f64,
    pub annual_growth: f64,
}

impl ProductProfile {
    /// Default daily-pricing FMCG SKU.
    pub fn fmcg_template() -> Self {
        ProductProfile {
            id: 0,
            regime: Regime::Fmcg,
            p_min: 8.0,
            p_max: 10.0,
            unit_cost: 5.0,
            base_uv: 2000.0,
            uv_volatility: 0.2,
            demand_elasticity: 0.5,
            demand_noise: 0.08,
            seasonality_period: 7,
            initial_stock: 0,
            group_id: 0,
            base_conversion: 0.08,
            annual_growth: 0.25,
        }
    }

    /// Default markdown-season luxury SKU. `p_min` is 10% of `p_max` so the
    /// whole 10%..90% discount grid is admissible.
    pub fn luxury_template() -> Self {
        ProductProfile {
            id: 0,
            regime: Regime::Luxury,
            p_min: 20.0,
            p_max: 200.0,
            unit_cost: 80.0,
            base_uv: 60.0,
            uv_volatility: 0.2,
            demand_elasticity: 8.0,
            demand_noise: 0.1,
            seasonality_period: 0,
            initial_stock: 10,
            group_id: 0,
            base_conversion: 0.05,
            annual_growth: 0.0,
        }
    }

    pub fn is_unlimited(&self) -> bool {
        self.initial_stock == 0
    }

    /// Position of `price` in `[p_min, p_max]`, in `[0, 1]` for admissible prices.
    pub fn price_position(&self, price: f64) -> f64 {
        (price - self.p_min) / (self.p_max - self.p_min)
    }

    pub fn check_price(&self, price: f64) -> Result<(), MarketError> {
        if price.is_finite() && price >= self.p_min && price <= self.p_max {
            Ok(())
        } else {
            Err(MarketError::PriceOutOfBounds {
                price,
                p_min: self.p_min,
                p_max: self.p_max,
            })
        }
    }

    pub fn validate(&self) -> Result<(), MarketError> {
        let bad = |field: &'static str, reason: &str| {
            Err(MarketError::InvalidProfile {
                id: self.id,
                field,
                reason: reason.to_string(),
            })
        };
        if !(self.p_min.is_finite() && self.p_min > 0.0) {
            return bad("p_min", "must be > 0");
        }
        if !(self.p_max.is_finite() && self.p_max > self.p_min) {
            return bad("p_max", "must exceed p_min");
        }
        if !(self.unit_cost.is_finite() && self.unit_cost >= 0.0) {
            return bad("unit_cost", "must be >= 0");
        }
        if !(self.base_uv.is_finite() && self.base_uv > 0.0) {
            return bad("base_uv", "must be > 0");
        }
        for (field, v) in [
            ("uv_volatility", self.uv_volatility),
            ("demand_elasticity", self.demand_elasticity),
            ("demand_noise", self.demand_noise),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(field, "must be >= 0");
            }
        }
        if !(self.base_conversion.is_finite()
            && self.base_conversion >= 0.0
            && self.base_conversion <= 1.0)
        {
            return bad("base_conversion", "must lie in [0, 1]");
        }
        if !(self.annual_growth.is_finite() && self.annual_growth > -1.0) {
            return bad("annual_growth", "must be > -1");
        }
        match self.regime {
            Regime::Luxury if self.initial_stock == 0 => {
                bad("initial_stock", "luxury products need limited stock (> 0)")
            }
            Regime::Fmcg if self.initial_stock != 0 => {
                bad("initial_stock", "fmcg products have unlimited stock (= 0)")
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_are_valid() {
        ProductProfile::fmcg_template().validate().unwrap();
        ProductProfile::luxury_template().validate().unwrap();
    }

    #[test]
    fn regime_stock_invariant() {
        let mut p = ProductProfile::luxury_template();
        p.initial_stock = 0;
        assert!(matches!(
            p.validate(),
            Err(MarketError::InvalidProfile {
                field: "initial_stock",
                ..
            })
        ));
        let mut p = ProductProfile::fmcg_template();
        p.initial_stock = 3;
        assert!(p.validate().is_err());
    }

    #[test]
    fn bounds_invariant() {
        let mut p = ProductProfile::fmcg_template();
        p.p_max = p.p_min;
        assert!(matches!(
            p.validate(),
            Err(MarketError::InvalidProfile { field: "p_max", .. })
        ));
    }
}
