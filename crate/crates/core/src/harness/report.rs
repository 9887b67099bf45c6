//! CSV report rows. Reals are written with six significant digits.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize, Serializer};

use super::HarnessError;

/// `%g`-style rendering with six significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp).max(0) as usize, x);
        trim_fraction(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to what [`format_sig6`] would print.
pub fn round_sig6(x: f64) -> f64 {
    format_sig6(x).parse().expect("formatted number parses")
}

fn sig6<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_sig6(*x))
}

fn sig6_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&format_sig6(*v)),
        None => s.serialize_none(),
    }
}

/// A CSV row type with a fixed column list.
pub trait ReportRecord: Serialize + DeserializeOwned {
    const HEADERS: &'static [&'static str];

    /// The row as it reads back after a CSV round trip.
    fn rounded(&self) -> Self;
}

/// One coded snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub experiment: String,
    pub scenario: u64,
    pub noise_index: u64,
    pub channel_seed: u64,
    pub noise_seed: u64,
    pub beamspace: String,
    pub n_beam: usize,
    #[serde(serialize_with = "sig6_opt")]
    pub cond_target: Option<f64>,
    /// Uniform mantissa width, if the profile is uniform.
    pub bits: Option<u8>,
    #[serde(serialize_with = "sig6")]
    pub mean_bits: f64,
    #[serde(serialize_with = "sig6")]
    pub cond_f: f64,
    #[serde(serialize_with = "sig6")]
    pub delta_y: f64,
    #[serde(serialize_with = "sig6")]
    pub delta_block: f64,
    #[serde(serialize_with = "sig6")]
    pub measured_error: f64,
    #[serde(serialize_with = "sig6")]
    pub predicted_error: f64,
    #[serde(serialize_with = "sig6")]
    pub ratio: f64,
    #[serde(serialize_with = "sig6")]
    pub predicted_error_plain: f64,
    #[serde(serialize_with = "sig6")]
    pub evm_percent: f64,
    #[serde(serialize_with = "sig6")]
    pub compression_evm_percent: f64,
    #[serde(serialize_with = "sig6")]
    pub cr: f64,
    #[serde(serialize_with = "sig6")]
    pub scale: f64,
    pub saturated_blocks: u32,
}

impl ReportRecord for ScenarioRow {
    const HEADERS: &'static [&'static str] = &[
        "experiment",
        "scenario",
        "noise_index",
        "channel_seed",
        "noise_seed",
        "beamspace",
        "n_beam",
        "cond_target",
        "bits",
        "mean_bits",
        "cond_f",
        "delta_y",
        "delta_block",
        "measured_error",
        "predicted_error",
        "ratio",
        "predicted_error_plain",
        "evm_percent",
        "compression_evm_percent",
        "cr",
        "scale",
        "saturated_blocks",
    ];

    fn rounded(&self) -> Self {
        Self {
            cond_target: self.cond_target.map(round_sig6),
            mean_bits: round_sig6(self.mean_bits),
            cond_f: round_sig6(self.cond_f),
            delta_y: round_sig6(self.delta_y),
            delta_block: round_sig6(self.delta_block),
            measured_error: round_sig6(self.measured_error),
            predicted_error: round_sig6(self.predicted_error),
            ratio: round_sig6(self.ratio),
            predicted_error_plain: round_sig6(self.predicted_error_plain),
            evm_percent: round_sig6(self.evm_percent),
            compression_evm_percent: round_sig6(self.compression_evm_percent),
            cr: round_sig6(self.cr),
            scale: round_sig6(self.scale),
            ..self.clone()
        }
    }
}

/// One cell of the compression-ratio or mean-bitwidth table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    /// `compression_ratio` or `mean_bits`.
    pub table: String,
    /// `fixed`, `online` or `offline`.
    pub mode: String,
    /// `dft`, `svd`, or `any` for fixed-length cells.
    pub beamspace: String,
    pub n_beam: usize,
    #[serde(serialize_with = "sig6")]
    pub value: f64,
    #[serde(serialize_with = "sig6")]
    pub reference_value: f64,
    /// Mean compression-only EVM of the evaluated profiles.
    #[serde(serialize_with = "sig6_opt")]
    pub compression_evm_percent: Option<f64>,
    /// Mean compression-only EVM of the uniform 6-bit profile on the same scenarios.
    #[serde(serialize_with = "sig6_opt")]
    pub baseline_evm_percent: Option<f64>,
    pub test_scenarios: usize,
}

impl ReportRecord for TableRow {
    const HEADERS: &'static [&'static str] = &[
        "table",
        "mode",
        "beamspace",
        "n_beam",
        "value",
        "reference_value",
        "compression_evm_percent",
        "baseline_evm_percent",
        "test_scenarios",
    ];

    fn rounded(&self) -> Self {
        Self {
            value: round_sig6(self.value),
            reference_value: round_sig6(self.reference_value),
            compression_evm_percent: self.compression_evm_percent.map(round_sig6),
            baseline_evm_percent: self.baseline_evm_percent.map(round_sig6),
            ..self.clone()
        }
    }
}

/// Received power and trained width per beam index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub beamspace: String,
    pub n_beam: usize,
    pub beam_index: usize,
    /// Mean share of received power, in dB relative to the total.
    #[serde(serialize_with = "sig6")]
    pub power_db: f64,
    pub offline_bits: u8,
    #[serde(serialize_with = "sig6")]
    pub online_mean_bits: f64,
}

impl ReportRecord for ProfileRow {
    const HEADERS: &'static [&'static str] = &[
        "beamspace",
        "n_beam",
        "beam_index",
        "power_db",
        "offline_bits",
        "online_mean_bits",
    ];

    fn rounded(&self) -> Self {
        Self {
            power_db: round_sig6(self.power_db),
            online_mean_bits: round_sig6(self.online_mean_bits),
            ..self.clone()
        }
    }
}

/// Rows plus the resolved configuration that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport<R> {
    pub config: String,
    pub rows: Vec<R>,
}

pub fn write_csv<R: ReportRecord, W: Write>(rows: &[R], out: W) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(R::HEADERS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string<R: ReportRecord>(rows: &[R]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Writes `rows` as CSV to `path`.
pub fn emit_report<R: ReportRecord>(rows: &[R], path: &Path) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path)?;
    write_csv(rows, std::io::BufWriter::new(file))
}

pub fn parse_csv<R: ReportRecord>(text: &str) -> Result<Vec<R>, HarnessError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    if headers.iter().ne(R::HEADERS.iter().copied()) {
        return Err(HarnessError::Config(format!(
            "unexpected CSV header: {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig6(10.378378378), "10.3784");
        assert_eq!(format_sig6(0.000123456789), "0.000123457");
        assert_eq!(format_sig6(1234567.0), "1.23457e6");
        assert_eq!(format_sig6(1e-7), "1e-7");
        assert_eq!(format_sig6(6.0), "6");
        assert_eq!(format_sig6(-2.5), "-2.5");
        assert_eq!(format_sig6(999999.7), "1e6");
        assert_eq!(format_sig6(0.0), "0");
    }

    fn table_row() -> TableRow {
        TableRow {
            table: "compression_ratio".into(),
            mode: "fixed".into(),
            beamspace: "any".into(),
            n_beam: 16,
            value: 393216.0 / 37888.0,
            reference_value: 10.4,
            compression_evm_percent: None,
            baseline_evm_percent: Some(1.23456789),
            test_scenarios: 0,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(
            to_csv_string::<TableRow>(&[]),
            "table,mode,beamspace,n_beam,value,reference_value,compression_evm_percent,baseline_evm_percent,test_scenarios\n"
        );
    }

    #[test]
    fn headers_match_fields() {
        let mut buf = Vec::new();
        csv::Writer::from_writer(&mut buf).serialize(table_row()).unwrap();
        let first = String::from_utf8(buf).unwrap().lines().next().unwrap().to_string();
        assert_eq!(first, TableRow::HEADERS.join(","));
    }

    #[test]
    fn round_trip() {
        let rows = vec![table_row(), table_row()];
        let text = to_csv_string(&rows);
        assert!(text.contains(",10.3784,"));
        let back: Vec<TableRow> = parse_csv(&text).unwrap();
        assert_eq!(back, rows.iter().map(|r| r.rounded()).collect::<Vec<_>>());
        assert_eq!(to_csv_string(&back), text);
    }
}
