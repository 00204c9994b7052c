//! Row types of every CSV the tool writes. Files start with `#` provenance
//! lines, then a header row, then one record per row.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliResult;

pub trait Row: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

macro_rules! row {
    ($(#[$m:meta])* $name:ident { $($field:ident : $ty:ty => $col:literal),* $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        pub struct $name {
            $(#[serde(rename = $col)] pub $field: $ty,)*
        }

        impl Row for $name {
            const HEADER: &'static [&'static str] = &[$($col),*];
        }
    };
}

row!(BranchRow { k: i64 => "K", elementary: f64 => "E_elementary", yrast: f64 => "E_yrast" });
row!(AmplitudeRow { index: usize => "index", re: f64 => "re", im: f64 => "im" });
row!(FidelityRow { n: usize => "N", g: f64 => "g", xi_inverse: f64 => "xi_inverse", fidelity: f64 => "fidelity" });
row!(
    /// Conditional or mean-field profile; phase relative to the largest amplitude.
    ProfileRow { x: f64 => "x", density: f64 => "density", phase: f64 => "phase" }
);
row!(HistogramRow { bin_left: f64 => "bin_left", bin_right: f64 => "bin_right", count: u64 => "count", density: f64 => "density" });
row!(DepthRow { left: f64 => "depth_bin_left", right: f64 => "depth_bin_right", count: u64 => "count" });
row!(TrajectoryRow { realization: usize => "realization", time: f64 => "time", particle: usize => "particle", x: f64 => "x" });
row!(SampleRow { sample: usize => "sample", particle: usize => "particle", x: f64 => "x" });

/// Header row plus records, without provenance lines.
pub fn render<T: Row>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(T::HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::CliError::Io {
        path: "csv buffer".into(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Splits a written file into its `#` lines and parsed records.
pub fn parse<T: Row>(text: &str) -> CliResult<(Vec<String>, Vec<T>)> {
    let comments = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(str::to_owned)
        .collect();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != T::HEADER {
        return Err(crate::error::CliError::usage(format!(
            "unexpected header {header:?}, expected {:?}",
            T::HEADER
        )));
    }
    let rows = r.deserialize().collect::<Result<Vec<T>, _>>()?;
    Ok((comments, rows))
}
