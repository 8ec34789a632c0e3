//! Output rows and their CSV/JSON encodings.

use std::io::{Read, Write};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::args::Format;
use crate::CliError;

/// One emitted number with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    /// position in the request (batch line, grid point)
    pub index: usize,
    /// what the value is, when a command emits several per input
    pub label: String,
    /// `key=value` pairs, space separated
    pub inputs: String,
    pub re: f64,
    /// imaginary residual of a quantity that should be real
    pub im: f64,
    pub quad_proxy: Option<f64>,
    pub trunc_proxy: Option<f64>,
    /// standard error of a stochastic estimate
    pub se: Option<f64>,
    pub wall_seconds: Option<f64>,
    pub version: String,
    pub seed: Option<u64>,
}

impl ResultRecord {
    pub fn new(command: &str, index: usize, label: &str, inputs: String, re: f64) -> Self {
        Self {
            command: command.into(),
            index,
            label: label.into(),
            inputs,
            re,
            im: 0.0,
            quad_proxy: None,
            trunc_proxy: None,
            se: None,
            wall_seconds: None,
            version: env!("CARGO_PKG_VERSION").into(),
            seed: None,
        }
    }

    /// Combined deterministic error proxy, if any.
    pub fn proxy(&self) -> Option<f64> {
        match (self.quad_proxy, self.trunc_proxy) {
            (None, None) => None,
            (q, t) => Some(q.unwrap_or(0.0) + t.unwrap_or(0.0)),
        }
    }
}

/// A row of a plotting table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub x: f64,
    pub y: f64,
    /// error proxy (exact values) or standard error (empirical ones)
    pub err: Option<f64>,
    /// comparison curve
    pub reference: Option<f64>,
}

pub fn write_rows<T: Serialize, W: Write>(out: W, rows: &[T], format: Format) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn read_rows<T: DeserializeOwned, R: Read>(input: R, format: Format) -> Result<Vec<T>, CliError> {
    match format {
        Format::Csv => Ok(csv::Reader::from_reader(input).deserialize().collect::<Result<_, _>>()?),
        Format::Json => Ok(serde_json::from_reader(input)?),
    }
}

/// Space-separated `key=value` echo; vectors are comma joined.
pub fn echo(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

pub fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
