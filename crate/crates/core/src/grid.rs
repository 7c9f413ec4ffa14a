//! Uniform space-time grids, sampled fields and prefix-sum tables.
//!
//! Cells are indexed by `n` spatial indices followed by a time index and
//! stored row-major with time fastest. A continuum box is snapped to the
//! cells whose centers it contains.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::geometry::{Box, Point, MAX_SPACE_DIM};

/// Largest number of axes (spatial plus time).
pub const MAX_AXES: usize = MAX_SPACE_DIM + 1;

const SNAP_EPS: f64 = 1e-9;

/// Uniform cell-centered grid over a space-time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpecRepr", into = "GridSpecRepr")]
pub struct GridSpec {
    origin: Point,
    shape: [usize; MAX_AXES],
    h_x: f64,
    h_t: f64,
}

#[derive(Serialize, Deserialize)]
struct GridSpecRepr {
    origin: Point,
    shape: Vec<usize>,
    h_x: f64,
    h_t: f64,
}

impl TryFrom<GridSpecRepr> for GridSpec {
    type Error = Error;
    fn try_from(r: GridSpecRepr) -> Result<Self> {
        GridSpec::new(r.origin, &r.shape, r.h_x, r.h_t)
    }
}

impl From<GridSpec> for GridSpecRepr {
    fn from(g: GridSpec) -> Self {
        GridSpecRepr {
            origin: g.origin,
            shape: g.shape().to_vec(),
            h_x: g.h_x,
            h_t: g.h_t,
        }
    }
}

/// Half-open range of cell indices per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexBox {
    pub axes: usize,
    pub lo: [usize; MAX_AXES],
    pub hi: [usize; MAX_AXES],
}

impl IndexBox {
    pub fn count(&self) -> usize {
        (0..self.axes).map(|k| self.hi[k] - self.lo[k]).product()
    }

    pub fn is_empty(&self) -> bool {
        (0..self.axes).any(|k| self.hi[k] <= self.lo[k])
    }

    pub fn contains(&self, idx: &[usize; MAX_AXES]) -> bool {
        (0..self.axes).all(|k| self.lo[k] <= idx[k] && idx[k] < self.hi[k])
    }
}

/// Result of snapping a box: unclipped lattice ranges and their window clip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Snapped {
    pub axes: usize,
    pub lattice_lo: [i64; MAX_AXES],
    pub lattice_hi: [i64; MAX_AXES],
    pub clipped: IndexBox,
}

impl Snapped {
    /// Number of lattice cells (in or out of the window) with centers in the box.
    pub fn lattice_count(&self) -> u64 {
        (0..self.axes)
            .map(|k| (self.lattice_hi[k] - self.lattice_lo[k]).max(0) as u64)
            .product()
    }

    /// True when every lattice cell of the box lies inside the window.
    pub fn in_window(&self) -> bool {
        self.lattice_count() as usize == self.clipped.count()
    }
}

/// `ceil`, treating values within `SNAP_EPS` of an integer as that integer.
fn snap_ceil(v: f64) -> i64 {
    let r = v.round();
    if (v - r).abs() < SNAP_EPS {
        r as i64
    } else {
        v.ceil() as i64
    }
}

impl GridSpec {
    pub fn new(origin: Point, shape: &[usize], h_x: f64, h_t: f64) -> Result<Self> {
        let n = origin.n();
        if shape.len() != n + 1 {
            return Err(Error::Shape(format!(
                "shape has {} axes, expected {}",
                shape.len(),
                n + 1
            )));
        }
        if shape.iter().any(|&s| s == 0) {
            return param("every cell count must be at least 1");
        }
        if !(h_x.is_finite() && h_x > 0.0 && h_t.is_finite() && h_t > 0.0) {
            return param(format!("spacings must be positive, got h_x={h_x}, h_t={h_t}"));
        }
        let mut arr = [1; MAX_AXES];
        arr[..=n].copy_from_slice(shape);
        Ok(GridSpec {
            origin,
            shape: arr,
            h_x,
            h_t,
        })
    }

    pub fn n(&self) -> usize {
        self.origin.n()
    }

    pub fn axes(&self) -> usize {
        self.n() + 1
    }

    pub fn origin(&self) -> &Point {
        &self.origin
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.axes()]
    }

    pub fn h_x(&self) -> f64 {
        self.h_x
    }

    pub fn h_t(&self) -> f64 {
        self.h_t
    }

    /// Spacing along axis `k`.
    pub fn spacing(&self, k: usize) -> f64 {
        if k == self.n() {
            self.h_t
        } else {
            self.h_x
        }
    }

    pub fn nt(&self) -> usize {
        self.shape[self.n()]
    }

    pub fn cell_count(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h_x.powi(self.n() as i32) * self.h_t
    }

    pub fn strides(&self) -> [usize; MAX_AXES] {
        let mut s = [0; MAX_AXES];
        let mut acc = 1;
        for k in (0..self.axes()).rev() {
            s[k] = acc;
            acc *= self.shape[k];
        }
        s
    }

    pub fn flat(&self, idx: &[usize; MAX_AXES]) -> usize {
        let s = self.strides();
        (0..self.axes()).map(|k| idx[k] * s[k]).sum()
    }

    pub fn unravel(&self, mut flat: usize) -> [usize; MAX_AXES] {
        let mut idx = [0; MAX_AXES];
        for k in (0..self.axes()).rev() {
            idx[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        idx
    }

    pub fn cell_center(&self, idx: &[usize; MAX_AXES]) -> Point {
        let mut p = self.origin;
        for k in 0..self.axes() {
            p.set_coord(
                k,
                self.origin.coord(k) + (idx[k] as f64 + 0.5) * self.spacing(k),
            );
        }
        p
    }

    pub fn center_of_flat(&self, flat: usize) -> Point {
        self.cell_center(&self.unravel(flat))
    }

    /// The whole window as a box.
    pub fn window(&self) -> Box {
        let mut hi = self.origin;
        for k in 0..self.axes() {
            hi.set_coord(k, self.origin.coord(k) + self.shape[k] as f64 * self.spacing(k));
        }
        Box {
            lo: self.origin,
            hi,
        }
    }

    pub fn full_index_box(&self) -> IndexBox {
        let mut hi = [0; MAX_AXES];
        hi[..self.axes()].copy_from_slice(self.shape());
        IndexBox {
            axes: self.axes(),
            lo: [0; MAX_AXES],
            hi,
        }
    }

    /// Snap `b` to the cells whose centers lie in it.
    pub fn snap(&self, b: &Box) -> Snapped {
        let axes = self.axes();
        let mut lattice_lo = [0i64; MAX_AXES];
        let mut lattice_hi = [0i64; MAX_AXES];
        let mut clipped = IndexBox {
            axes,
            lo: [0; MAX_AXES],
            hi: [0; MAX_AXES],
        };
        for k in 0..axes {
            let h = self.spacing(k);
            let o = self.origin.coord(k);
            let lo = snap_ceil((b.lo.coord(k) - o) / h - 0.5);
            let hi = snap_ceil((b.hi.coord(k) - o) / h - 0.5).max(lo);
            lattice_lo[k] = lo;
            lattice_hi[k] = hi;
            let size = self.shape[k] as i64;
            let clo = lo.clamp(0, size);
            let chi = hi.clamp(0, size).max(clo);
            clipped.lo[k] = clo as usize;
            clipped.hi[k] = chi as usize;
        }
        Snapped {
            axes,
            lattice_lo,
            lattice_hi,
            clipped,
        }
    }

    /// Grid mirrored under `t ↦ −t`; cell `j` maps to cell `nt − 1 − j`.
    pub fn reflect_time(&self) -> GridSpec {
        let mut g = self.clone();
        let top = self.origin.t() + self.nt() as f64 * self.h_t;
        g.origin = self.origin.with_t(-top);
        g
    }

    /// Grid scaled by `(x, t) ↦ (s x, s^p t)`.
    pub fn scaled(&self, s: f64, p: f64) -> GridSpec {
        GridSpec {
            origin: self.origin.scale_parabolic(s, p),
            shape: self.shape,
            h_x: self.h_x * s,
            h_t: self.h_t * s.powf(p),
        }
    }

    pub(crate) fn for_each_in(&self, ib: &IndexBox, mut f: impl FnMut(usize)) {
        if ib.is_empty() {
            return;
        }
        let s = self.strides();
        let axes = self.axes();
        let mut idx = ib.lo;
        loop {
            let base: usize = (0..axes - 1).map(|k| idx[k] * s[k]).sum();
            for it in ib.lo[axes - 1]..ib.hi[axes - 1] {
                f(base + it);
            }
            let mut k = axes - 1;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < ib.hi[k] {
                    break;
                }
                idx[k] = ib.lo[k];
            }
        }
    }
}

/// Real values sampled at the cell centers of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    spec: GridSpec,
    values: Vec<f64>,
}

const MAGIC: &[u8; 4] = b"PLGF";
const FORMAT_VERSION: u32 = 1;

impl SampledField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.cell_count() {
            return Err(Error::Shape(format!(
                "{} values for {} cells",
                values.len(),
                spec.cell_count()
            )));
        }
        Ok(SampledField { spec, values })
    }

    pub fn constant(spec: &GridSpec, c: f64) -> Self {
        SampledField {
            values: vec![c; spec.cell_count()],
            spec: spec.clone(),
        }
    }

    pub fn zeros(spec: &GridSpec) -> Self {
        Self::constant(spec, 0.0)
    }

    pub fn from_fn(spec: &GridSpec, mut f: impl FnMut(&Point) -> f64) -> Self {
        let values = (0..spec.cell_count())
            .map(|i| f(&spec.center_of_flat(i)))
            .collect();
        SampledField {
            spec: spec.clone(),
            values,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, idx: &[usize; MAX_AXES]) -> f64 {
        self.values[self.spec.flat(idx)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SampledField {
        SampledField {
            spec: self.spec.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &SampledField, f: impl Fn(f64, f64) -> f64) -> Result<SampledField> {
        self.same_spec(other)?;
        Ok(SampledField {
            spec: self.spec.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn abs(&self) -> SampledField {
        self.map(f64::abs)
    }

    pub fn same_spec(&self, other: &SampledField) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::Shape("fields live on different grids".into()));
        }
        Ok(())
    }

    /// `f(x, −t)` on the reflected grid.
    pub fn reflect_time(&self) -> SampledField {
        let spec = self.spec.reflect_time();
        let nt = spec.nt();
        let mut values = vec![0.0; self.values.len()];
        for (chunk_out, chunk_in) in values.chunks_mut(nt).zip(self.values.chunks(nt)) {
            for j in 0..nt {
                chunk_out[j] = chunk_in[nt - 1 - j];
            }
        }
        SampledField { spec, values }
    }

    /// Same values on a parabolically rescaled grid.
    pub fn rescaled(&self, s: f64, p: f64) -> SampledField {
        SampledField {
            spec: self.spec.scaled(s, p),
            values: self.values.clone(),
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_over(&self, ib: &IndexBox) -> f64 {
        let mut m = f64::INFINITY;
        self.spec.for_each_in(ib, |i| m = m.min(self.values[i]));
        m
    }

    pub fn sum_over(&self, ib: &IndexBox) -> f64 {
        let mut s = 0.0;
        self.spec.for_each_in(ib, |i| s += self.values[i]);
        s
    }

    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        let n = self.spec.n();
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(n as u32).to_le_bytes())?;
        for &s in self.spec.shape() {
            w.write_all(&(s as u64).to_le_bytes())?;
        }
        w.write_all(&self.spec.h_x.to_le_bytes())?;
        w.write_all(&self.spec.h_t.to_le_bytes())?;
        for k in 0..=n {
            w.write_all(&self.spec.origin.coord(k).to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let n = read_u32(&mut r)? as usize;
        if !(1..=MAX_SPACE_DIM).contains(&n) {
            return Err(Error::Format(format!("unsupported dimension {n}")));
        }
        let mut shape = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            shape.push(u64::from_le_bytes(b) as usize);
        }
        let h_x = read_f64(&mut r)?;
        let h_t = read_f64(&mut r)?;
        let mut o = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            o.push(read_f64(&mut r)?);
        }
        let origin = Point::new(&o[..n], o[n])?;
        let spec = GridSpec::new(origin, &shape, h_x, h_t)?;
        let mut values = Vec::with_capacity(spec.cell_count());
        for _ in 0..spec.cell_count() {
            values.push(read_f64(&mut r)?);
        }
        SampledField::new(spec, values)
    }

    /// CSV with a `#grid` metadata record followed by one row per cell.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let n = self.spec.n();
        let mut wr = csv::WriterBuilder::new().flexible(true).from_writer(w);
        let mut meta = vec!["#grid".to_string(), n.to_string()];
        meta.extend(self.spec.shape().iter().map(|s| s.to_string()));
        meta.push(self.spec.h_x.to_string());
        meta.push(self.spec.h_t.to_string());
        meta.extend((0..=n).map(|k| self.spec.origin.coord(k).to_string()));
        wr.write_record(&meta).map_err(csv_err)?;
        let mut header: Vec<String> = (0..n).map(|k| format!("i{k}")).collect();
        header.push("it".into());
        header.push("value".into());
        wr.write_record(&header).map_err(csv_err)?;
        for (flat, v) in self.values.iter().enumerate() {
            let idx = self.spec.unravel(flat);
            let mut row: Vec<String> = idx[..=n].iter().map(|i| i.to_string()).collect();
            row.push(v.to_string());
            wr.write_record(&row).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv(r: impl Read) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new()
            .flexible(true)
            .has_headers(false)
            .from_reader(r);
        let mut records = rd.records();
        let meta = records
            .next()
            .ok_or_else(|| Error::Format("empty csv".into()))?
            .map_err(csv_err)?;
        if meta.get(0) != Some("#grid") {
            return Err(Error::Format("missing #grid record".into()));
        }
        let num = |i: usize| -> Result<f64> {
            meta.get(i)
                .ok_or_else(|| Error::Format(format!("metadata field {i} missing")))?
                .parse::<f64>()
                .map_err(|e| Error::Format(e.to_string()))
        };
        let n = num(1)? as usize;
        if !(1..=MAX_SPACE_DIM).contains(&n) {
            return Err(Error::Format(format!("unsupported dimension {n}")));
        }
        let shape: Vec<usize> = (0..=n).map(|k| num(2 + k).map(|v| v as usize)).collect::<Result<_>>()?;
        let h_x = num(3 + n)?;
        let h_t = num(4 + n)?;
        let o: Vec<f64> = (0..=n).map(|k| num(5 + n + k)).collect::<Result<_>>()?;
        let spec = GridSpec::new(Point::new(&o[..n], o[n])?, &shape, h_x, h_t)?;
        records.next();
        let mut values = vec![f64::NAN; spec.cell_count()];
        let mut seen = 0;
        for rec in records {
            let rec = rec.map_err(csv_err)?;
            let mut idx = [0usize; MAX_AXES];
            for k in 0..=n {
                idx[k] = rec
                    .get(k)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Format("bad index".into()))?;
                if idx[k] >= spec.shape()[k] {
                    return Err(Error::Format("index out of range".into()));
                }
            }
            let v: f64 = rec
                .get(n + 1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Format("bad value".into()))?;
            values[spec.flat(&idx)] = v;
            seen += 1;
        }
        if seen != spec.cell_count() {
            return Err(Error::Format(format!("{seen} rows for {} cells", spec.cell_count())));
        }
        SampledField::new(spec, values)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Zero-padded inclusive cumulative sums over lower-left sub-boxes.
#[derive(Debug, Clone)]
pub struct PrefixTable {
    spec: GridSpec,
    dims: [usize; MAX_AXES],
    strides: [usize; MAX_AXES],
    data: Vec<f64>,
}

pub fn build_prefix(f: &SampledField) -> PrefixTable {
    let spec = f.spec().clone();
    let axes = spec.axes();
    let mut dims = [1; MAX_AXES];
    for k in 0..axes {
        dims[k] = spec.shape()[k] + 1;
    }
    let mut strides = [0; MAX_AXES];
    let mut acc = 1;
    for k in (0..axes).rev() {
        strides[k] = acc;
        acc *= dims[k];
    }
    let mut data = vec![0.0; acc];
    for (flat, &v) in f.values().iter().enumerate() {
        let idx = spec.unravel(flat);
        let off: usize = (0..axes).map(|k| (idx[k] + 1) * strides[k]).sum();
        data[off] = v;
    }
    for k in 0..axes {
        let s = strides[k];
        for off in 0..data.len() {
            if (off / s) % dims[k] != 0 {
                data[off] += data[off - s];
            }
        }
    }
    PrefixTable {
        spec,
        dims,
        strides,
        data,
    }
}

impl PrefixTable {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Sum of cell values over an index box by inclusion–exclusion.
    pub fn sum_index_box(&self, ib: &IndexBox) -> f64 {
        if ib.is_empty() {
            return 0.0;
        }
        let axes = self.spec.axes();
        debug_assert!((0..axes).all(|k| ib.hi[k] < self.dims[k]));
        let mut total = 0.0;
        for mask in 0..1usize << axes {
            let mut off = 0;
            let mut neg = false;
            for k in 0..axes {
                if mask >> k & 1 == 1 {
                    off += ib.hi[k] * self.strides[k];
                } else {
                    off += ib.lo[k] * self.strides[k];
                    neg = !neg;
                }
            }
            if neg {
                total -= self.data[off];
            } else {
                total += self.data[off];
            }
        }
        total
    }

    fn snapped_window(&self, b: &Box) -> Result<IndexBox> {
        if b.n() != self.spec.n() {
            return Err(Error::Shape("box dimension differs from grid".into()));
        }
        if self.spec.window().intersection(b).is_none() {
            return Err(Error::Domain("box does not meet the grid window".into()));
        }
        let ib = self.spec.snap(b).clipped;
        if ib.is_empty() {
            return Err(Error::DegenerateBox("box contains no cell center".into()));
        }
        Ok(ib)
    }

    /// Integral over the snapped box (cell sum times cell volume).
    pub fn box_sum(&self, b: &Box) -> Result<f64> {
        let ib = self.snapped_window(b)?;
        Ok(self.sum_index_box(&ib) * self.spec.cell_volume())
    }
}

/// Average over the cells of the window whose centers lie in `b`.
pub fn box_average(t: &PrefixTable, b: &Box) -> Result<f64> {
    let ib = t.snapped_window(b)?;
    Ok(t.sum_index_box(&ib) / ib.count() as f64)
}

fn check_weight(w: &SampledField) -> Result<()> {
    if w.values().iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::Validation("weight must be nonnegative".into()));
    }
    Ok(())
}

/// `(∑ |f|^r w · cellvol)^{1/r}`.
pub fn weighted_norm(f: &SampledField, w: &SampledField, r: f64) -> Result<f64> {
    f.same_spec(w)?;
    check_weight(w)?;
    if !(r >= 1.0) {
        return param(format!("norm exponent must be >= 1, got {r}"));
    }
    let s: f64 = f
        .values()
        .iter()
        .zip(w.values())
        .map(|(&v, &wt)| if wt == 0.0 { 0.0 } else { v.abs().powf(r) * wt })
        .sum();
    Ok((s * f.spec().cell_volume()).powf(1.0 / r))
}

/// `sup_λ λ · w({|f| > λ})^{1/q}`, attained at sampled values.
pub fn weak_norm(f: &SampledField, w: &SampledField, q: f64) -> Result<f64> {
    f.same_spec(w)?;
    check_weight(w)?;
    if !(q >= 1.0) {
        return param(format!("weak exponent must be >= 1, got {q}"));
    }
    let vol = f.spec().cell_volume();
    let mut pairs: Vec<(f64, f64)> = f
        .values()
        .iter()
        .zip(w.values())
        .map(|(&v, &wt)| (v.abs(), wt * vol))
        .filter(|&(v, _)| v > 0.0)
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0_f64;
    let mut mass = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let v = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == v {
            mass += pairs[i].1;
            i += 1;
        }
        best = best.max(v * mass.powf(1.0 / q));
    }
    Ok(best)
}
