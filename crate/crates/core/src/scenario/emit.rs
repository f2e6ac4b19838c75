//! Deterministic CSV and JSON output.
//!
//! Floats are always written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` exactly. Complex numbers appear as `[re, im]`
//! in JSON and as two `re,im` columns in CSV.

use std::io::{self, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::Formatter;

use crate::tensor::{ReconstructionKit, SampleGrid, TensorCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Header of the sample-grid CSV; `j` and `jprime` are 1-based.
pub const GRID_HEADER: &str = "j,jprime,n,m,re,im";
pub const COEFF_HEADER: &str = "k,p,re,im";
pub const KIT_HEADER: &str = "factor,index,k,re,im";

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(float(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with 17-digit floats, newline-terminated.
pub fn to_json<S: Serialize + ?Sized>(value: &S) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17);
    value.serialize(&mut ser).expect("in-memory serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

pub fn from_json<D: DeserializeOwned>(text: &str) -> serde_json::Result<D> {
    serde_json::from_str(text)
}

/// Values that have a CSV rendering.
pub trait Csv {
    fn to_csv(&self) -> String;
}

impl Csv for SampleGrid<f64> {
    fn to_csv(&self) -> String {
        let mut out = format!("{GRID_HEADER}\n");
        for (j, jp, n, m, v) in self.cells() {
            out.push_str(&format!("{},{},{n},{m},{},{}\n", j + 1, jp + 1, float(v.re), float(v.im)));
        }
        out
    }
}

impl Csv for TensorCoefficients<f64> {
    fn to_csv(&self) -> String {
        let mut out = format!("{COEFF_HEADER}\n");
        for k in self.axes[0].range.iter() {
            for p in self.axes[1].range.iter() {
                let v = self.get(k, p);
                out.push_str(&format!("{k},{p},{},{}\n", float(v.re), float(v.im)));
            }
        }
        out
    }
}

impl Csv for ReconstructionKit<f64> {
    fn to_csv(&self) -> String {
        let mut out = format!("{KIT_HEADER}\n");
        for (factor, vectors) in [(1, &self.c), (2, &self.d)] {
            for (index, v) in vectors.iter().enumerate() {
                let axis = v.axis();
                for k in axis.range.iter() {
                    let z = v.get(k);
                    out.push_str(&format!("{factor},{},{k},{},{}\n", index + 1, float(z.re), float(z.im)));
                }
            }
        }
        out
    }
}

/// Writes `value` in the requested format.
pub fn emit<V, W>(value: &V, format: Format, mut destination: W) -> io::Result<()>
where
    V: Serialize + Csv,
    W: Write,
{
    let text = match format {
        Format::Csv => value.to_csv(),
        Format::Json => to_json(value),
    };
    destination.write_all(text.as_bytes())
}
