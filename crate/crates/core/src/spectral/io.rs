//! Binary (`HBSF`) and JSON serialization of spatial and spectral fields.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! "HBSF"  u32 version  u32 kind (1 spatial, 2 spectral)
//! spatial:  u32 n  f64 L  u32 N  f64 L_z  u32 N_z  u64 count  count × (f64 re, f64 im)
//! spectral: u32 n  u32 band  u32 diagonal  f64 λ_min  f64 λ_max  u32 order  f64 ratio
//!           u64 P  P × (f64 λ, f64 weight, u32 M)  u64 count  count × (f64 re, f64 im)
//! ```

use super::field::{SpatialField, SpatialGrid, SpectralField};
use super::grid::{FrequencyGrid, GridSpec, Truncation};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub const MAGIC: &[u8; 4] = b"HBSF";
pub const VERSION: u32 = 1;
const KIND_SPATIAL: u32 = 1;
const KIND_SPECTRAL: u32 = 2;

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn complex(&mut self, vals: &[Complex64]) {
        self.u64(vals.len() as u64);
        for c in vals {
            self.f64(c.re);
            self.f64(c.im);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.pos + k > self.buf.len() {
            return Err(Error::Format("unexpected end of data".into()));
        }
        let s = &self.buf[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn complex(&mut self) -> Result<Vec<Complex64>> {
        let count = self.u64()? as usize;
        if count > (self.buf.len() - self.pos) / 16 {
            return Err(Error::Format("payload shorter than declared".into()));
        }
        (0..count)
            .map(|_| Ok(Complex64::new(self.f64()?, self.f64()?)))
            .collect()
    }
    fn header(&mut self) -> Result<u32> {
        if self.take(4)? != MAGIC {
            return Err(Error::Format("missing HBSF magic".into()));
        }
        let version = self.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        self.u32()
    }
}

pub fn spatial_to_bytes(f: &SpatialField) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(VERSION);
    w.u32(KIND_SPATIAL);
    let g = &f.grid;
    w.u32(g.n as u32);
    w.f64(g.half_width);
    w.u32(g.points as u32);
    w.f64(g.z_half_width);
    w.u32(g.z_points as u32);
    w.complex(&f.values);
    w.0
}

pub fn spatial_from_bytes(bytes: &[u8]) -> Result<SpatialField> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.header()? != KIND_SPATIAL {
        return Err(Error::Format("not a spatial field".into()));
    }
    let grid = SpatialGrid {
        n: r.u32()? as usize,
        half_width: r.f64()?,
        points: r.u32()? as usize,
        z_half_width: r.f64()?,
        z_points: r.u32()? as usize,
    };
    grid.validate()?;
    let values = r.complex()?;
    SpatialField::from_values(Arc::new(grid), values)
}

pub fn spectral_to_bytes(f: &SpectralField) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(VERSION);
    w.u32(KIND_SPECTRAL);
    let g = &f.grid;
    let spec = g.spec();
    w.u32(spec.n as u32);
    w.u32(spec.band as u32);
    w.u32(f.diagonal as u32);
    w.f64(spec.lambda_min);
    w.f64(spec.lambda_max);
    w.u32(spec.order as u32);
    w.f64(spec.ratio);
    w.u64(g.positive_nodes() as u64);
    for i in 0..g.positive_nodes() {
        w.f64(g.lambdas()[i]);
        w.f64(g.weights()[i]);
        w.u32(g.truncations()[i] as u32);
    }
    w.complex(&f.coeff);
    w.0
}

pub fn spectral_from_bytes(bytes: &[u8]) -> Result<SpectralField> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.header()? != KIND_SPECTRAL {
        return Err(Error::Format("not a spectral field".into()));
    }
    let n = r.u32()? as usize;
    let band = r.u32()? as usize;
    let diagonal = r.u32()? != 0;
    let lambda_min = r.f64()?;
    let lambda_max = r.f64()?;
    let order = r.u32()? as usize;
    let ratio = r.f64()?;
    let p = r.u64()? as usize;
    if p > bytes.len() / 20 {
        return Err(Error::Format("node count exceeds payload".into()));
    }
    let mut lambdas = Vec::with_capacity(p);
    let mut weights = Vec::with_capacity(p);
    let mut trunc = Vec::with_capacity(p);
    for _ in 0..p {
        lambdas.push(r.f64()?);
        weights.push(r.f64()?);
        trunc.push(r.u32()? as usize);
    }
    let m = trunc.iter().copied().max().unwrap_or(0);
    let spec = GridSpec {
        n,
        lambda_min,
        lambda_max,
        order,
        ratio,
        max_panel: f64::INFINITY,
        truncation: Truncation::Fixed { m },
        band,
    };
    let grid = FrequencyGrid::from_parts(spec, lambdas, weights, trunc)?;
    let coeff = r.complex()?;
    if coeff.len() != grid.total_slots() {
        return Err(Error::Format(format!(
            "expected {} coefficients, found {}",
            grid.total_slots(),
            coeff.len()
        )));
    }
    Ok(SpectralField {
        grid: Arc::new(grid),
        coeff,
        diagonal,
    })
}

#[derive(Serialize, Deserialize)]
struct SpatialJson {
    grid: SpatialGrid,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpectralJson {
    spec: GridSpec,
    lambdas: Vec<f64>,
    weights: Vec<f64>,
    truncation: Vec<usize>,
    diagonal: bool,
    re: Vec<f64>,
    im: Vec<f64>,
}

pub fn spatial_to_json(f: &SpatialField) -> Result<String> {
    let j = SpatialJson {
        grid: (*f.grid).clone(),
        re: f.values.iter().map(|c| c.re).collect(),
        im: f.values.iter().map(|c| c.im).collect(),
    };
    serde_json::to_string(&j).map_err(|e| Error::Format(e.to_string()))
}

pub fn spatial_from_json(s: &str) -> Result<SpatialField> {
    let j: SpatialJson = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
    j.grid.validate()?;
    if j.re.len() != j.im.len() {
        return Err(Error::Format("re and im lengths differ".into()));
    }
    let values = j.re.iter().zip(&j.im).map(|(a, b)| Complex64::new(*a, *b)).collect();
    SpatialField::from_values(Arc::new(j.grid), values)
}

pub fn spectral_to_json(f: &SpectralField) -> Result<String> {
    let g = &f.grid;
    let j = SpectralJson {
        spec: g.spec().clone(),
        lambdas: g.lambdas().to_vec(),
        weights: g.weights().to_vec(),
        truncation: g.truncations().to_vec(),
        diagonal: f.diagonal,
        re: f.coeff.iter().map(|c| c.re).collect(),
        im: f.coeff.iter().map(|c| c.im).collect(),
    };
    serde_json::to_string(&j).map_err(|e| Error::Format(e.to_string()))
}

pub fn spectral_from_json(s: &str) -> Result<SpectralField> {
    let j: SpectralJson = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
    let grid = FrequencyGrid::from_parts(j.spec, j.lambdas, j.weights, j.truncation)?;
    if j.re.len() != grid.total_slots() || j.im.len() != j.re.len() {
        return Err(Error::Format("coefficient count does not match grid".into()));
    }
    Ok(SpectralField {
        grid: Arc::new(grid),
        coeff: j.re.iter().zip(&j.im).map(|(a, b)| Complex64::new(*a, *b)).collect(),
        diagonal: j.diagonal,
    })
}

/// Reads either format, choosing by the leading magic bytes.
pub fn read_spatial(bytes: &[u8]) -> Result<SpatialField> {
    if bytes.starts_with(MAGIC) {
        spatial_from_bytes(bytes)
    } else {
        spatial_from_json(std::str::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))?)
    }
}

pub fn read_spectral(bytes: &[u8]) -> Result<SpectralField> {
    if bytes.starts_with(MAGIC) {
        spectral_from_bytes(bytes)
    } else {
        spectral_from_json(std::str::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))?)
    }
}
