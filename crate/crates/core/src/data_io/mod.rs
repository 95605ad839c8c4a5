//! Sample CSV files, JSON configs and the synthetic factor generator.
//!
//! CSV schema: UTF-8, comma separated, '.' decimal point, one header row
//! `x_1,…,x_n,y_1,…,y_m` (covariates first), one row per period.

mod csv_io;
mod synthetic;

pub use csv_io::{format_f64, load_samples_csv, read_samples_csv, write_samples_csv, write_samples_to};
pub use synthetic::{generate_synthetic, SyntheticConfig, SyntheticData};

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::Result;

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
