//! Profile files: CSV with a header line, one product per record.
//!
//! Column order is fixed:
//!
//! ```text
//! id,regime,p_min,p_max,unit_cost,base_uv,uv_volatility,demand_elasticity,
//! demand_noise,seasonality_period,initial_stock,group_id,base_conversion,annual_growth
//! ```
//!
//! `regime` is `luxury` or `fmcg`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{MarketError, ProductProfile};

pub const PROFILE_COLUMNS: [&str; 14] = [
    "id",
    "regime",
    "p_min",
    "p_max",
    "unit_cost",
    "base_uv",
    "uv_volatility",
    "demand_elasticity",
    "demand_noise",
    "seasonality_period",
    "initial_stock",
    "group_id",
    "base_conversion",
    "annual_growth",
];

pub fn write_profiles<W: Write>(writer: W, profiles: &[ProductProfile]) -> Result<(), MarketError> {
    let mut w = csv::Writer::from_writer(writer);
    for p in profiles {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_profiles<R: Read>(reader: R) -> Result<Vec<ProductProfile>, MarketError> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != PROFILE_COLUMNS {
        return Err(MarketError::Format {
            line: 1,
            reason: format!("expected header {}", PROFILE_COLUMNS.join(",")),
        });
    }
    let mut out = Vec::new();
    for rec in r.deserialize::<ProductProfile>() {
        let profile = rec.map_err(|e| MarketError::Format {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        profile.validate()?;
        out.push(profile);
    }
    Ok(out)
}

pub fn save_profiles(path: &Path, profiles: &[ProductProfile]) -> Result<(), MarketError> {
    write_profiles(File::create(path)?, profiles)
}

pub fn load_profiles(path: &Path) -> Result<Vec<ProductProfile>, MarketError> {
    read_profiles(File::open(path)?)
}
