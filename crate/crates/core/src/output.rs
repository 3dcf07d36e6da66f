//! Round-trippable float formatting and CSV writers.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::experiments::{EmpiricalResult, McExperimentResult};
use crate::fbm::FbmPath;
use crate::hurst::HurstFit;
use crate::model::ProfitCurve;

/// 17 significant digits; `NaN`/`inf` spelled out.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Pretty JSON with every finite float written to 17 significant digits.
struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format!("{v:.16e}").as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, FullPrecision(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(mut w: W, value: &T) -> Result<()> {
    let s = to_json_string(value)?;
    writeln!(w, "{s}").map_err(|e| Error::Format(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, format_float)
}

fn write_rows<W: Write>(
    w: W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for row in rows {
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::Format(e.to_string()))
}

pub fn write_path_csv<W: Write>(w: W, path: &FbmPath) -> Result<()> {
    write_rows(
        w,
        &["time", "value"],
        path.times
            .iter()
            .zip(&path.values)
            .map(|(t, x)| vec![format_float(*t), format_float(*x)]),
    )
}

pub fn write_curve_csv<W: Write>(w: W, curve: &ProfitCurve) -> Result<()> {
    write_rows(
        w,
        &["m", "profit"],
        curve
            .levels
            .iter()
            .zip(&curve.profits)
            .map(|(m, r)| vec![m.to_string(), format_float(*r)]),
    )
}

pub fn write_mc_csv<W: Write>(w: W, result: &McExperimentResult) -> Result<()> {
    let rows = result.records.iter().flat_map(|rec| {
        rec.profit_curve
            .levels
            .iter()
            .enumerate()
            .map(move |(i, m)| {
                let sim = rec.simulated.as_ref();
                vec![
                    format_float(rec.hurst),
                    m.to_string(),
                    format_float(rec.profit_curve.profits[i]),
                    opt(sim.map(|s| s.curve.profits[i])),
                    format_float(rec.analytic_mean_abs_increments[i]),
                    opt(sim.map(|s| s.mean_abs_increments[i])),
                    opt(sim.map(|s| s.standard_errors[i])),
                ]
            })
    });
    write_rows(
        w,
        &[
            "hurst",
            "m",
            "analytic_profit",
            "simulated_profit",
            "analytic_mean_abs",
            "simulated_mean_abs",
            "simulated_std_error",
        ],
        rows,
    )
}

pub fn write_empirical_csv<W: Write>(w: W, result: &EmpiricalResult) -> Result<()> {
    let e = &result.empirical_curve;
    write_rows(
        w,
        &["m", "empirical_profit", "theory_profit"],
        e.levels.iter().enumerate().map(|(i, m)| {
            vec![
                m.to_string(),
                format_float(e.profits[i]),
                format_float(result.theory_curve.profits[i]),
            ]
        }),
    )
}

pub fn write_hurst_csv<W: Write>(w: W, fit: &HurstFit) -> Result<()> {
    write_rows(
        w,
        &["level", "lag", "mean_abs_increment", "residual"],
        fit.levels_used.iter().enumerate().map(|(i, l)| {
            vec![
                l.to_string(),
                (1u64 << l).to_string(),
                format_float(fit.mean_abs_increments[i]),
                format_float(fit.residuals[i]),
            ]
        }),
    )
}
