use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{BoundaryProblem, Geometry};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::real::Real;

pub const SCHEMA_VERSION: u32 = 1;

/// Λᴰ / Λᴺ classification by the boundary angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypeTag {
    #[serde(rename = "D_type")]
    DType,
    #[serde(rename = "N_type")]
    NType,
    #[serde(rename = "unknown")]
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Eigenpair<T> {
    pub n: usize,
    pub lambda: T,
    #[serde(rename = "type")]
    pub type_tag: TypeTag,
    pub phi: T,
    pub est_error: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpectrumMeta<T> {
    pub schema_version: u32,
    pub problem: BoundaryProblem<T>,
    pub potential: PotentialSpec<T>,
    pub tol: T,
}

impl<T: Real> SpectrumMeta<T> {
    pub fn new(problem: &BoundaryProblem<T>, spec: &PotentialSpec<T>, tol: T) -> Self {
        SpectrumMeta { schema_version: SCHEMA_VERSION, problem: problem.clone(), potential: spec.clone(), tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Spectrum<T> {
    pub meta: SpectrumMeta<T>,
    pub eigenvalues: Vec<Eigenpair<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn lambdas(&self) -> Vec<T> {
        self.eigenvalues.iter().map(|e| e.lambda).collect()
    }

    pub fn get(&self, n: usize) -> Option<&Eigenpair<T>> {
        self.eigenvalues.iter().find(|e| e.n == n)
    }

    pub fn is_full_line(&self) -> bool {
        self.meta.problem.geometry == Geometry::FullLine
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Spectrum<T> = serde_json::from_str(text)?;
        if s.meta.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion { found: s.meta.schema_version, expected: SCHEMA_VERSION });
        }
        Ok(s)
    }

    /// One row per eigenvalue after a `# schema_version: 1` comment line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# schema_version: {SCHEMA_VERSION}").map_err(csv::Error::from)?;
        let mut w = csv::Writer::from_writer(out);
        for e in &self.eigenvalues {
            w.serialize(e)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads rows written by [`Spectrum::write_csv`]; metadata is not part of the CSV form.
    pub fn read_csv_rows<R: Read>(input: R) -> Result<Vec<Eigenpair<T>>> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let mut rows = Vec::new();
        for rec in r.deserialize() {
            rows.push(rec?);
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Spectrum<f64> {
        let p = BoundaryProblem::full_line(10.0, 0.01);
        let s = PotentialSpec::power(2.0, 1.0);
        Spectrum {
            meta: SpectrumMeta::new(&p, &s, 1e-8),
            eigenvalues: vec![
                Eigenpair { n: 1, lambda: 1.0, type_tag: TypeTag::NType, phi: 0.0, est_error: 1e-10 },
                Eigenpair { n: 2, lambda: 3.0, type_tag: TypeTag::DType, phi: 1.5707963267948966, est_error: 2e-10 },
            ],
        }
    }

    #[test]
    fn json_round_trip() {
        let s = sample();
        let text = s.to_json().unwrap();
        assert!(text.contains("\"type\": \"N_type\""));
        assert!(text.contains("\"schema_version\": 1"));
        assert_eq!(Spectrum::from_json(&text).unwrap(), s);
    }

    #[test]
    fn csv_round_trip() {
        let s = sample();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# schema_version: 1\nn,lambda,type,phi,est_error\n"));
        assert_eq!(Spectrum::<f64>::read_csv_rows(&buf[..]).unwrap(), s.eigenvalues);
    }
}
