use dynprice::market::{draw_uv, mean_conversion, ProductEpisode, ProductProfile, SimClock};
use dynprice::rng::SeedStream;
use proptest::prelude::*;

fn luxury(elasticity: f64, p_min: f64, span: f64, stock: u32) -> ProductProfile {
    ProductProfile {
        demand_elasticity: elasticity,
        p_min,
        p_max: p_min + span,
        initial_stock: stock,
        ..ProductProfile::luxury_template()
    }
}

fn sign_changes(v: &[f64]) -> usize {
    let signs: Vec<f64> = v
        .iter()
        .filter(|x| x.abs() > 1e-12)
        .map(|x| x.signum())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

proptest! {
    #[test]
    fn episodes_are_deterministic(seed in any::<u64>(), pos in 0.0f64..=1.0, id in 0u32..1000) {
        let p = ProductProfile { id, ..ProductProfile::fmcg_template() };
        let price = p.p_min + pos * (p.p_max - p.p_min);
        let streams = SeedStream::new(seed);
        let run = || {
            let mut e = ProductEpisode::new(p.clone(), SimClock::new(20)).unwrap();
            (0..20).map(|_| e.step(price, &streams).unwrap().0).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
        prop_assert_eq!(draw_uv(&p, 7, &streams), draw_uv(&p, 7, &streams));
    }

    #[test]
    fn luxury_sales_never_exceed_stock(seed in any::<u64>(), stock in 1u32..30, pos in 0.0f64..=1.0) {
        let p = ProductProfile { initial_stock: stock, ..ProductProfile::luxury_template() };
        let price = p.p_min + pos * (p.p_max - p.p_min);
        let streams = SeedStream::new(seed);
        let mut e = ProductEpisode::new(p, SimClock::new(200)).unwrap();
        let mut sold = 0;
        let mut last = stock;
        loop {
            let (obs, done) = e.step(price, &streams).unwrap();
            sold += obs.sales_volume;
            let left = obs.stock_remaining.unwrap();
            prop_assert!(left <= last);
            prop_assert!(obs.sales_volume <= obs.uv);
            last = left;
            if done {
                break;
            }
        }
        prop_assert!(sold <= stock);
    }

    #[test]
    fn luxury_revenue_per_visitor_bends_once(elasticity in 2.0f64..20.0, p_min in 1.0f64..100.0, span in 10.0f64..500.0) {
        let p = ProductProfile { demand_noise: 0.0, annual_growth: 0.0, ..luxury(elasticity, p_min, span, 10) };
        let grid: Vec<f64> = (0..200).map(|i| p.p_min + span * f64::from(i) / 199.0).collect();
        let rpv: Vec<f64> = grid.iter().map(|&x| x * mean_conversion(&p, x, 1)).collect();
        let second: Vec<f64> = rpv.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
        prop_assert!(sign_changes(&second) <= 1);
    }
}
