use rand::Rng;

use super::{MarketError, ProductProfile};
use crate::rng::{Purpose, SeedStream};

/// Build `n_groups` simi-product groups from one template.
///
/// Every product copies the template's regime, price bounds and demand
/// parameters; only `base_uv` is multiplied by a factor drawn uniformly from
/// `uv_scale` (pass `(1.0, 1.0)` to disable). Product ids are assigned
/// sequentially from `first_id`; group `g` gets `group_id = g`.
pub fn make_simi_groups(
    template: &ProductProfile,
    n_groups: usize,
    sizes: &[usize],
    uv_scale: (f64, f64),
    first_id: u32,
    seed: &SeedStream,
) -> Result<Vec<Vec<ProductProfile>>, MarketError> {
    if n_groups < 2 {
        return Err(MarketError::TooFewGroups(n_groups));
    }
    if sizes.len() != n_groups {
        return Err(MarketError::GroupSizes {
            expected: n_groups,
            got: sizes.len(),
        });
    }
    let (lo, hi) = uv_scale;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(MarketError::InvalidScale(lo, hi));
    }
    template.validate()?;

    let mut next_id = first_id;
    let mut groups = Vec::with_capacity(n_groups);
    for (g, &size) in sizes.iter().enumerate() {
        let mut members = Vec::with_capacity(size);
        for _ in 0..size {
            let mut rng = seed
                .purpose(Purpose::Groups)
                .child(u64::from(next_id))
                .rng();
            let factor = if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                lo
            };
            members.push(ProductProfile {
                id: next_id,
                group_id: g as u32,
                base_uv: template.base_uv * factor,
                ..template.clone()
            });
            next_id += 1;
        }
        groups.push(members);
    }
    Ok(groups)
}
