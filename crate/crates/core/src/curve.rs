use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which end of the parameter range the curve accumulates at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Asymptote {
    /// Spirals and trajectories: the origin is approached as the parameter grows.
    ParamToInfinity,
    /// Chirp graphs: the accumulation happens as the parameter decreases to 0.
    ParamToZero,
    /// A finite curve with no accumulation point.
    None,
}

/// Generator identifier plus a snapshot of the spec that produced a curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub asymptote: Asymptote,
    /// Set when a generator or integrator stopped before the requested end.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated: Option<String>,
    #[serde(default)]
    pub spec: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(generator: impl Into<String>, asymptote: Asymptote) -> Self {
        Provenance {
            generator: generator.into(),
            asymptote,
            truncated: None,
            spec: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.spec.insert(key.to_string(), value.to_string());
        self
    }
}

/// Ordered samples of a planar or spatial parametric curve.
///
/// Coordinates are stored flat, `dim` values per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    dim: usize,
    params: Vec<f64>,
    coords: Vec<f64>,
    max_chord: f64,
    provenance: Provenance,
}

impl Curve {
    /// Builds a curve and records the measured maximal chord.
    pub fn new(dim: usize, params: Vec<f64>, coords: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::invalid("dim", format!("{dim} (expected 2 or 3)")));
        }
        if params.len() < 2 {
            return Err(Error::invalid("params", "a curve needs at least 2 samples"));
        }
        if coords.len() != params.len() * dim {
            return Err(Error::invalid(
                "coords",
                format!(
                    "{} values for {} samples in dimension {dim}",
                    coords.len(),
                    params.len()
                ),
            ));
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(
                "coords",
                format!("non-finite value at sample {}", bad / dim),
            ));
        }
        let increasing = params[1] > params[0];
        let monotone = params
            .windows(2)
            .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] });
        if !monotone {
            return Err(Error::invalid(
                "params",
                "parameter values must be strictly monotone",
            ));
        }
        let max_chord = coords
            .chunks_exact(dim)
            .zip(coords.chunks_exact(dim).skip(1))
            .map(|(a, b)| dist(a, b))
            .fold(0.0, f64::max);
        Ok(Curve {
            dim,
            params,
            coords,
            max_chord,
            provenance,
        })
    }

    /// Replaces the measured chord bound by a looser known bound.
    pub fn with_chord_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound >= self.max_chord) {
            return Err(Error::invalid(
                "max_chord",
                format!("bound {bound:e} is below the measured chord {:e}", self.max_chord),
            ));
        }
        self.max_chord = bound;
        Ok(self)
    }

    pub fn with_truncation(mut self, reason: impl Into<String>) -> Self {
        self.provenance.truncated = Some(reason.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn max_chord(&self) -> f64 {
        self.max_chord
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_truncated(&self) -> bool {
        self.provenance.truncated.is_some()
    }

    /// Per-axis bounding box `(min, max)`.
    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Diagonal of the bounding box, used as the curve diameter.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bbox();
        lo.iter()
            .zip(&hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    /// Total chordal length.
    pub fn chord_length(&self) -> f64 {
        self.points()
            .zip(self.points().skip(1))
            .map(|(a, b)| dist(a, b))
            .sum()
    }

    /// Uniform rescaling of every coordinate by `c`.
    pub fn scaled(&self, c: f64) -> Result<Curve> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("scale", format!("{c} must be positive")));
        }
        let coords = self.coords.iter().map(|v| v * c).collect();
        let mut out = Curve::new(self.dim, self.params.clone(), coords, self.provenance.clone())?;
        out.max_chord = out.max_chord.max(self.max_chord * c);
        out.provenance.spec.insert("scale".into(), c.to_string());
        Ok(out)
    }

    /// The part of the curve after its last entry into the closed ball of radius `rho`
    /// around the origin.
    pub fn clip_to_ball(&self, rho: f64) -> Result<Curve> {
        let inside = |p: &[f64]| p.iter().map(|v| v * v).sum::<f64>() <= rho * rho;
        let mut start = self.len();
        while start > 0 && inside(self.point(start - 1)) {
            start -= 1;
        }
        if self.len() - start < 2 {
            return Err(Error::invalid(
                "rho",
                format!("fewer than 2 samples lie within radius {rho}"),
            ));
        }
        let mut out = Curve::new(
            self.dim,
            self.params[start..].to_vec(),
            self.coords[start * self.dim..].to_vec(),
            self.provenance.clone().with("clip_radius", rho),
        )?;
        out.max_chord = out.max_chord.max(self.max_chord);
        Ok(out)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        w.write_all(if self.dim == 2 { b"t,x,y\n" } else { b"t,x,y,z\n" })?;
        for (t, p) in self.params.iter().zip(self.points()) {
            write!(w, "{}", fmt_num(*t))?;
            for v in p {
                write!(w, ",{}", fmt_num(*v))?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses the CSV format written by [`Curve::write_csv`].
    pub fn read_csv<R: Read>(r: R, provenance: Provenance) -> Result<Curve> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        let names: Vec<&str> = header.iter().map(str::trim).collect();
        let dim = match names.as_slice() {
            ["t", "x", "y"] => 2,
            ["t", "x", "y", "z"] => 3,
            _ => return Err(Error::Parse(format!("unexpected header {names:?}"))),
        };
        let mut params = Vec::new();
        let mut coords = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != dim + 1 {
                return Err(Error::Parse(format!(
                    "row {}: expected {} fields",
                    line + 2,
                    dim + 1
                )));
            }
            for (k, field) in rec.iter().enumerate() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: bad number {field:?}", line + 2)))?;
                if k == 0 {
                    params.push(v);
                } else {
                    coords.push(v);
                }
            }
        }
        if params.iter().any(|t| !t.is_finite()) {
            return Err(Error::Parse("non-finite parameter value".into()));
        }
        Curve::new(dim, params, coords, provenance)
    }

    /// Sidecar metadata as `key = value` text.
    pub fn sidecar(&self) -> String {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            dim: usize,
            samples: usize,
            max_chord: String,
            #[serde(flatten)]
            provenance: &'a Provenance,
        }
        toml::to_string(&Sidecar {
            dim: self.dim,
            samples: self.len(),
            max_chord: fmt_num(self.max_chord),
            provenance: &self.provenance,
        })
        .expect("sidecar fields serialize")
    }

    /// Writes `path` as CSV and `path.meta` as the sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(fs::File::create(path)?)?;
        fs::write(sidecar_path(path), self.sidecar())?;
        Ok(())
    }

    /// Reads a curve saved by [`Curve::save`]; the sidecar is optional.
    pub fn load(path: &Path) -> Result<Curve> {
        let meta = sidecar_path(path);
        let provenance = if meta.exists() {
            parse_sidecar(&fs::read_to_string(meta)?)?
        } else {
            Provenance::new("csv", Asymptote::None).with("path", path.display())
        };
        Curve::read_csv(fs::File::open(path)?, provenance)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Parses the provenance part of a sidecar file.
pub fn parse_sidecar(text: &str) -> Result<Provenance> {
    #[derive(Deserialize)]
    struct Sidecar {
        #[serde(flatten)]
        provenance: Provenance,
    }
    let s: Sidecar = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(s.provenance)
}

/// Fixed 17-significant-digit scientific notation used by every numeric output.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
