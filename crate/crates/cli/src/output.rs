use std::fmt::Write as _;

use picsim_core::{Complex64, SweepResult};
use serde::{Deserialize, Serialize};

/// One requested transmission, `from` the driven pin `to` the observed pin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pair {
    pub from: String,
    pub to: String,
}

impl Pair {
    pub fn label(&self) -> String {
        format!("{}->{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonTrace {
    pub from: String,
    pub to: String,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub power: Vec<f64>,
    pub phase_rad: Vec<f64>,
}

/// JSON document written by `simulate --format json`. Arrays run in
/// ascending wavelength, like the CSV rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonOutput {
    pub pins: Vec<String>,
    pub wavelength_m: Vec<f64>,
    #[serde(rename = "frequency_Hz")]
    pub frequency_hz: Vec<f64>,
    pub traces: Vec<JsonTrace>,
}

/// Grid indices ordered by ascending wavelength.
fn rows(result: &SweepResult) -> impl Iterator<Item = usize> {
    (0..result.frequencies().len()).rev()
}

fn column(result: &SweepResult, pair: &Pair) -> picsim_core::Result<Vec<Complex64>> {
    let (_, s) = result.data(&pair.from, &pair.to)?;
    Ok(rows(result).map(|f| s[f]).collect())
}

pub fn csv(result: &SweepResult, pairs: &[Pair]) -> picsim_core::Result<String> {
    let columns = pairs.iter().map(|p| column(result, p)).collect::<picsim_core::Result<Vec<_>>>()?;
    let mut out = String::from("wavelength_m,frequency_Hz");
    for p in pairs {
        let l = p.label();
        write!(out, ",{l}.re,{l}.im,{l}.power,{l}.phase_rad").unwrap();
    }
    out.push('\n');
    let wl = result.wavelengths();
    let freqs = result.frequencies();
    for (row, f) in rows(result).enumerate() {
        write!(out, "{:.16e},{:.16e}", wl[f], freqs[f]).unwrap();
        for c in &columns {
            let v = c[row];
            write!(out, ",{:.16e},{:.16e},{:.16e},{:.16e}", v.re, v.im, v.norm_sqr(), v.arg()).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn json(result: &SweepResult, pairs: &[Pair]) -> picsim_core::Result<String> {
    let wl = result.wavelengths();
    let freqs = result.frequencies();
    let mut traces = Vec::with_capacity(pairs.len());
    for p in pairs {
        let c = column(result, p)?;
        traces.push(JsonTrace {
            from: p.from.clone(),
            to: p.to.clone(),
            re: c.iter().map(|v| v.re).collect(),
            im: c.iter().map(|v| v.im).collect(),
            power: c.iter().map(|v| v.norm_sqr()).collect(),
            phase_rad: c.iter().map(|v| v.arg()).collect(),
        });
    }
    let doc = JsonOutput {
        pins: result.pins().into_iter().map(String::from).collect(),
        wavelength_m: rows(result).map(|f| wl[f]).collect(),
        frequency_hz: rows(result).map(|f| freqs[f]).collect(),
        traces,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    text.push('\n');
    Ok(text)
}
