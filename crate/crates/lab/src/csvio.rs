//! CSV schemas of the CLI outputs.
//!
//! Numbers are written with ten significant digits, plain decimal when the
//! exponent lies in `[-4, 15]` and scientific otherwise. Parsing a file and
//! writing it back reproduces it byte for byte.

use std::io::{Read, Write};

use csv::StringRecord;
use kljn_core::experiment::{ExperimentReport, ScatterSample, SweepPoint};
use kljn_core::{CaseLabel, SecureSituation};

use crate::error::{LabError, Result};

const SIG_DIGITS: usize = 10;

/// Formats `x` with [`SIG_DIGITS`] significant digits.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("`e` format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..=15).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let body = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        let split = exp as usize + 1;
        if split >= digits.len() {
            format!("{}{}", digits, "0".repeat(split - digits.len()))
        } else {
            format!("{}.{}", &digits[..split], &digits[split..])
        }
    };
    format!("{sign}{body}")
}

pub fn parse_field<T: std::str::FromStr>(record: &StringRecord, idx: usize, field: &'static str) -> Result<T> {
    let raw = record.get(idx).unwrap_or("");
    raw.parse().map_err(|_| LabError::CsvField {
        field,
        value: raw.to_string(),
    })
}

fn parse_situation(record: &StringRecord, idx: usize) -> Result<SecureSituation> {
    match record.get(idx) {
        Some("HL") => Ok(SecureSituation::HL),
        Some("LH") => Ok(SecureSituation::LH),
        other => Err(LabError::CsvField {
            field: "situation",
            value: other.unwrap_or("").to_string(),
        }),
    }
}

/// A row type with a fixed header.
pub trait CsvRow: Sized {
    const HEADER: &'static [&'static str];
    fn to_record(&self) -> Vec<String>;
    fn from_record(record: &StringRecord) -> Result<Self>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub case: CaseLabel,
    pub gamma: usize,
    pub p: f64,
    pub sigma: f64,
    pub epsilon: f64,
}

impl From<&ExperimentReport> for TableRow {
    fn from(r: &ExperimentReport) -> Self {
        Self {
            case: r.config.case,
            gamma: r.config.gamma,
            p: r.p_hat,
            sigma: r.sigma,
            epsilon: r.epsilon,
        }
    }
}

impl CsvRow for TableRow {
    const HEADER: &'static [&'static str] = &["case", "gamma", "p", "sigma", "epsilon"];

    fn to_record(&self) -> Vec<String> {
        vec![
            self.case.to_string(),
            self.gamma.to_string(),
            fmt_num(self.p),
            fmt_num(self.sigma),
            fmt_num(self.epsilon),
        ]
    }

    fn from_record(r: &StringRecord) -> Result<Self> {
        Ok(Self {
            case: parse_field(r, 0, "case")?,
            gamma: parse_field(r, 1, "gamma")?,
            p: parse_field(r, 2, "p")?,
            sigma: parse_field(r, 3, "sigma")?,
            epsilon: parse_field(r, 4, "epsilon")?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub case: CaseLabel,
    pub gamma: usize,
    pub t_eff: f64,
    pub u_w_rms: f64,
    pub p: f64,
    pub epsilon: f64,
}

impl From<&SweepPoint> for SweepRow {
    fn from(s: &SweepPoint) -> Self {
        Self {
            case: s.case,
            gamma: s.gamma,
            t_eff: s.t_eff,
            u_w_rms: s.u_w_rms,
            p: s.p_hat,
            epsilon: s.epsilon,
        }
    }
}

impl CsvRow for SweepRow {
    const HEADER: &'static [&'static str] =
        &["case", "gamma", "t_eff_kelvin", "u_w_rms_volts", "p", "epsilon"];

    fn to_record(&self) -> Vec<String> {
        vec![
            self.case.to_string(),
            self.gamma.to_string(),
            fmt_num(self.t_eff),
            fmt_num(self.u_w_rms),
            fmt_num(self.p),
            fmt_num(self.epsilon),
        ]
    }

    fn from_record(r: &StringRecord) -> Result<Self> {
        Ok(Self {
            case: parse_field(r, 0, "case")?,
            gamma: parse_field(r, 1, "gamma")?,
            t_eff: parse_field(r, 2, "t_eff_kelvin")?,
            u_w_rms: parse_field(r, 3, "u_w_rms_volts")?,
            p: parse_field(r, 4, "p")?,
            epsilon: parse_field(r, 5, "epsilon")?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterRow(pub ScatterSample);

impl CsvRow for ScatterRow {
    const HEADER: &'static [&'static str] =
        &["case", "situation", "step", "u_w_volts", "i_w_amperes"];

    fn to_record(&self) -> Vec<String> {
        let s = &self.0;
        vec![
            s.case.to_string(),
            s.situation.to_string(),
            s.step.to_string(),
            fmt_num(s.u_w),
            fmt_num(s.i_w),
        ]
    }

    fn from_record(r: &StringRecord) -> Result<Self> {
        Ok(Self(ScatterSample {
            case: parse_field(r, 0, "case")?,
            situation: parse_situation(r, 1)?,
            step: parse_field(r, 2, "step")?,
            u_w: parse_field(r, 3, "u_w_volts")?,
            i_w: parse_field(r, 4, "i_w_amperes")?,
        }))
    }
}

/// Writes the header and every row. The header is written even for an
/// empty row set.
pub fn write_rows<R: CsvRow, W: Write>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(R::HEADER)?;
    for row in rows {
        w.write_record(row.to_record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn to_csv_string<R: CsvRow>(rows: &[R]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

/// Reads rows, checking the header matches the schema exactly.
pub fn read_rows<R: CsvRow, Rd: Read>(input: Rd) -> Result<Vec<R>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(R::HEADER.iter().copied()) {
        return Err(LabError::CsvField {
            field: "header",
            value: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    rd.records()
        .map(|rec| R::from_record(&rec?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn number_formats() {
        assert_eq!(fmt_num(0.9869), "0.9869000000");
        assert_eq!(fmt_num(0.5), "0.5000000000");
        assert_eq!(fmt_num(1.0), "1.000000000");
        assert_eq!(fmt_num(0.0), "0.000000000");
        assert_eq!(fmt_num(1e18), "1.000000000e18");
        assert_eq!(fmt_num(2760.0), "2760.000000");
        assert_eq!(fmt_num(-1e-4), "-0.0001000000000");
        assert_eq!(fmt_num(1.5e-7), "1.500000000e-7");
        assert_eq!(fmt_num(15.84), "15.84000000");
    }

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(to_csv_string::<ScatterRow>(&[]).unwrap(), "case,situation,step,u_w_volts,i_w_amperes\n");
    }

    #[test]
    fn rejects_wrong_header() {
        let text = "case,gamma,p\nd2,10,0.5\n";
        assert!(read_rows::<TableRow, _>(text.as_bytes()).is_err());
    }

    fn arb_case() -> impl Strategy<Value = CaseLabel> {
        prop::sample::select(CaseLabel::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn number_format_round_trips(x in prop::num::f64::NORMAL | prop::num::f64::ZERO) {
            let s = fmt_num(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(fmt_num(back), s.clone());
            prop_assert!(((back - x) / x).abs() < 1e-9 || x == 0.0);
        }

        #[test]
        fn sweep_csv_round_trips(
            rows in prop::collection::vec(
                (arb_case(), 1usize..5000, 1e10f64..1e22, 1e-3f64..1e4, 0.0f64..=1.0),
                0..20,
            )
        ) {
            let rows: Vec<SweepRow> = rows
                .into_iter()
                .map(|(case, gamma, t_eff, u_w_rms, p)| SweepRow { case, gamma, t_eff, u_w_rms, p, epsilon: 1.0 - p })
                .collect();
            let text = to_csv_string(&rows).unwrap();
            let parsed: Vec<SweepRow> = read_rows(text.as_bytes()).unwrap();
            prop_assert_eq!(to_csv_string(&parsed).unwrap(), text);
        }
    }
}
