//! File formats: spectral-data JSON input, reconstruction CSV and its JSON
//! sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reconstruction::Reconstruction;
use crate::spectral_data::SpectralData;

/// `{"lambda": [...], "alpha": [...], "M": 0.1, "omega_hint": 0.0}`; the last
/// two keys are optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralInput {
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_hint: Option<f64>,
}

impl SpectralInput {
    pub fn data(&self) -> Result<SpectralData> {
        SpectralData::new(self.lambda.clone(), self.alpha.clone())
    }
}

impl From<&SpectralData> for SpectralInput {
    fn from(d: &SpectralData) -> Self {
        Self {
            lambda: d.lambda().to_vec(),
            alpha: d.alpha().to_vec(),
            m: None,
            omega_hint: None,
        }
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => Error::Validation(e.to_string()),
        _ => Error::Io(format!("malformed JSON: {e}")),
    })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    parse_json(&read_text(path)?)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Io(e.to_string()))
}

/// `x,q,k_diag` rows with 17 significant digits.
pub fn reconstruction_csv(rec: &Reconstruction) -> String {
    let mut out = String::with_capacity(64 * rec.grid.len());
    out.push_str("x,q,k_diag\n");
    for ((x, q), k) in rec.grid.iter().zip(&rec.q).zip(&rec.k_diag) {
        let _ = writeln!(out, "{x:.16e},{q:.16e},{k:.16e}");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub h: f64,
    #[serde(rename = "H")]
    pub big_h: f64,
    pub varpi: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

impl From<&Reconstruction> for Sidecar {
    fn from(r: &Reconstruction) -> Self {
        Self {
            h: r.h,
            big_h: r.big_h,
            varpi: r.varpi,
            n: r.n_used,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconstruction::{reconstruct, ReconstructOptions};

    #[test]
    fn input_schema() {
        let i: SpectralInput =
            parse_json(r#"{"lambda":[0,1.1],"alpha":[3.1,1.5],"M":0.2,"omega_hint":0}"#).unwrap();
        assert_eq!(i.m, Some(0.2));
        assert_eq!(i.omega_hint, Some(0.0));
        assert_eq!(i.data().unwrap().len(), 2);
        let bare: SpectralInput = parse_json(r#"{"lambda":[0],"alpha":[3]}"#).unwrap();
        assert_eq!((bare.m, bare.omega_hint), (None, None));
        assert!(matches!(
            parse_json::<SpectralInput>("{"),
            Err(Error::Io(_))
        ));
        assert!(matches!(
            parse_json::<SpectralInput>(r#"{"lambda":[0]}"#),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn csv_round_trips_doubles() {
        let d = SpectralData::new(vec![0.1, 1.3, 4.0], vec![3.0, 1.4, 1.6]).unwrap();
        let rec = reconstruct(&d, 16, ReconstructOptions::default()).unwrap();
        let csv = reconstruction_csv(&rec);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,q,k_diag"));
        for (line, (&x, &q)) in lines.zip(rec.grid.iter().zip(&rec.q)) {
            let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            assert_eq!((f[0], f[1]), (x, q));
        }
        let side: Sidecar = parse_json(&to_json(&Sidecar::from(&rec)).unwrap()).unwrap();
        assert_eq!(side, Sidecar::from(&rec));
    }
}
