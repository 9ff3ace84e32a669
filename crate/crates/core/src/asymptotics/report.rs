use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::PowerFit;
use crate::real::Real;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ExpansionRow<T> {
    pub n: usize,
    pub term1: T,
    pub term2: T,
    pub term3: T,
    pub term4: T,
    pub predicted: T,
    pub oracle: Option<T>,
    pub residual: Option<T>,
}

impl<T: Real> ExpansionRow<T> {
    pub fn new(n: usize, terms: [T; 4]) -> Self {
        let [term1, term2, term3, term4] = terms;
        ExpansionRow { n, term1, term2, term3, term4, predicted: term1 + term2 + term3 + term4, oracle: None, residual: None }
    }

    pub fn with_oracle(mut self, oracle: T) -> Self {
        self.oracle = Some(oracle);
        self.residual = Some(oracle - self.predicted);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SlopeSummary<T> {
    pub slope: T,
    pub prefactor: T,
    pub r_squared: T,
}

impl<T: Real> From<PowerFit<T>> for SlopeSummary<T> {
    fn from(f: PowerFit<T>) -> Self {
        SlopeSummary { slope: f.slope, prefactor: f.prefactor, r_squared: f.r_squared }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ExpansionReport<T> {
    pub schema_version: u32,
    pub predictor: String,
    pub rows: Vec<ExpansionRow<T>>,
    /// log-log fit of |residual| against n, when enough residuals exist
    pub residual_fit: Option<SlopeSummary<T>>,
}

impl<T: Real> ExpansionReport<T> {
    pub fn new(predictor: impl Into<String>, rows: Vec<ExpansionRow<T>>) -> Self {
        let mut r = ExpansionReport { schema_version: REPORT_SCHEMA_VERSION, predictor: predictor.into(), rows, residual_fit: None };
        r.residual_fit = r.fit_residuals().ok().map(Into::into);
        r
    }

    pub fn fit_residuals(&self) -> Result<PowerFit<T>> {
        let (n, res): (Vec<T>, Vec<T>) = self
            .rows
            .iter()
            .filter_map(|r| r.residual.filter(|v| *v != T::zero()).map(|v| (T::from_usize_lossy(r.n), v)))
            .unzip();
        crate::fit::loglog_fit(&n, &res, None)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text)?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::SchemaVersion { found: r.schema_version, expected: REPORT_SCHEMA_VERSION });
        }
        Ok(r)
    }

    /// Columns n, term1..term4, predicted, oracle, residual after a schema comment line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# schema_version: {REPORT_SCHEMA_VERSION}").map_err(csv::Error::from)?;
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv_rows<R: Read>(input: R) -> Result<Vec<ExpansionRow<T>>> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        r.deserialize().map(|rec| rec.map_err(Error::from)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_round_trip() {
        let rows = vec![
            ExpansionRow::new(10, [19.0f64, 0.1, -0.01, 0.0]).with_oracle(19.1),
            ExpansionRow::new(20, [39.0f64, 0.05, 0.0, 0.0]),
        ];
        let rep = ExpansionReport::new("expansion", rows);
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# schema_version: 1\nn,term1,term2,term3,term4,predicted,oracle,residual\n"));
        assert!(text.lines().nth(3).unwrap().ends_with(",,"));
        assert_eq!(ExpansionReport::<f64>::read_csv_rows(&buf[..]).unwrap(), rep.rows);
        let back = ExpansionReport::<f64>::from_json(&rep.to_json().unwrap()).unwrap();
        assert_eq!(back, rep);
        let r = rep.rows[0].residual.unwrap();
        assert!((r - (19.1 - 19.09)).abs() < 1e-12);
    }
}
