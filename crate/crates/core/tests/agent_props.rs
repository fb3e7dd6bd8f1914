use dynprice::agents::{DdpgAgent, DdpgConfig, DqnAgent, DqnConfig};
use dynprice::mdp::{ActionSpaceSpec, MarketState};
use dynprice::rng::SeedStream;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #[test]
    fn dqn_actions_are_legal(seed in any::<u64>(), k in 2u32..120, p_min in 0.5f64..50.0, span in 0.1f64..100.0) {
        let mut rng = SeedStream::new(seed).rng();
        let space = ActionSpaceSpec::discrete(p_min, p_min + span, k).unwrap();
        let config = DqnConfig { hidden: vec![6], ..DqnConfig::default() };
        let agent = DqnAgent::new(4, space, config, &mut rng).unwrap();
        for _ in 0..20 {
            let features: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
            let s = MarketState { features, period: 1 };
            for explore in [false, true] {
                let a = agent.act(&s, explore, &mut rng).unwrap();
                prop_assert!(space.contains(a));
            }
        }
    }

    #[test]
    fn ddpg_prices_are_legal(seed in any::<u64>(), sigma in 0.0f64..2.0, p_min in 0.5f64..50.0, span in 0.1f64..100.0) {
        let mut rng = SeedStream::new(seed).rng();
        let space = ActionSpaceSpec::continuous(p_min, p_min + span).unwrap();
        let config = DdpgConfig { sigma, hidden: vec![6], out_init: 3.0, ..DdpgConfig::default() };
        let agent = DdpgAgent::new(4, space, config, &mut rng).unwrap();
        for _ in 0..20 {
            let features: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..2.0)).collect();
            let s = MarketState { features, period: 1 };
            for explore in [false, true] {
                let a = agent.act(&s, explore, &mut rng).unwrap();
                prop_assert!(space.contains(a));
            }
        }
    }
}
