//! Chains of congruent parabolic rectangles joining sub-rectangles of the
//! upper and lower parts of a base rectangle, and the two-pass covering
//! selection of rectangles with bounded overlap.
//!
//! Chains are built per index tuple; their length grows like `2^{pm}`, so
//! the full family is never materialized.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::geometry::{dilate, lower_part, upper_part, Box, ParabolicRectangle, Point};
use crate::grid::{GridSpec, SampledField};

const SLACK: f64 = 1e-9;

/// Parameters and index tuple of one chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub gamma: f64,
    pub alpha: f64,
    pub tau: f64,
    pub base: ParabolicRectangle,
    /// Spatial cell of the target sub-rectangle in the upper part, 1-based.
    pub i: u64,
    /// Temporal slab of the target, 1-based.
    pub j: u64,
    /// Spatial cell of the source sub-rectangle in the lower part, 1-based.
    pub k: u64,
    /// Temporal slab of the source, 1-based.
    pub iota: u64,
}

/// Quantities fixed by `(n, p, γ, α, τ)` and the base rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainGeometry {
    pub m: u32,
    pub slabs: u64,
    /// `J(1 − α)/((1 − γ) 2^{pm}) ∈ [1, 2)`.
    pub eta: f64,
    /// Half-edge `l = L / 2^m` of every chain rectangle.
    pub l: f64,
    /// `l^p`.
    pub lp: f64,
    /// Temporal shift `τ(1 + α) l^p` between a rectangle and its shifted lower box.
    pub shift: f64,
}

/// Smallest integer `m ≥ log₂(τ(1+α)/(1−α)) + (1 + log₂(τ(1+α)/γ))/(p−1) + 2`.
pub fn chain_depth(p: f64, gamma: f64, alpha: f64, tau: f64) -> u32 {
    let a = tau * (1.0 + alpha);
    let v = (a / (1.0 - alpha)).log2() + (1.0 + (a / gamma).log2()) / (p - 1.0) + 2.0;
    v.ceil().max(1.0) as u32
}

/// `J = ⌈(1 − γ) 2^{pm}/(1 − α)⌉`.
pub fn slab_count(p: f64, gamma: f64, alpha: f64, m: u32) -> u64 {
    ((1.0 - gamma) * 2f64.powf(p * m as f64) / (1.0 - alpha)).ceil() as u64
}

/// `C₁ = 2^{p/(p−1)+3p+1} [τ(1+α)/(1−α)]^p [τ(1+α)/γ]^{p/(p−1)}`.
pub fn chain_length_bound(p: f64, gamma: f64, alpha: f64, tau: f64) -> f64 {
    let a = tau * (1.0 + alpha);
    2f64.powf(p / (p - 1.0) + 3.0 * p + 1.0) * (a / (1.0 - alpha)).powf(p) * (a / gamma).powf(p / (p - 1.0))
}

impl ChainParams {
    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn p(&self) -> f64 {
        self.base.p
    }

    pub fn validate(&self) -> Result<ChainGeometry> {
        let (g, a) = (self.gamma, self.alpha);
        if !(0.0 < g && g < a && a < 1.0) {
            return param(format!("need 0 < gamma < alpha < 1, got gamma={g}, alpha={a}"));
        }
        if !(self.tau >= 1.0) {
            return param(format!("need tau >= 1, got {}", self.tau));
        }
        let geo = self.geometry();
        let cells = 1u64 << (geo.m as u64 * self.n() as u64);
        for (name, v, hi) in [("i", self.i, cells), ("k", self.k, cells), ("j", self.j, geo.slabs), ("iota", self.iota, geo.slabs)] {
            if v < 1 || v > hi {
                return param(format!("index {name}={v} outside [1, {hi}]"));
            }
        }
        Ok(geo)
    }

    pub fn geometry(&self) -> ChainGeometry {
        let p = self.p();
        let m = chain_depth(p, self.gamma, self.alpha, self.tau);
        let slabs = slab_count(p, self.gamma, self.alpha, m);
        let scale = 2f64.powf(p * m as f64);
        let l = self.base.half_edge / 2f64.powi(m as i32);
        let lp = l.powf(p);
        ChainGeometry {
            m,
            slabs,
            eta: slabs as f64 * (1.0 - self.alpha) / ((1.0 - self.gamma) * scale),
            l,
            lp,
            shift: self.tau * (1.0 + self.alpha) * lp,
        }
    }

    /// Spatial center offset of cell `idx` (1-based) relative to the base center.
    fn cell_offset(&self, idx: u64, geo: &ChainGeometry) -> Point {
        let per_axis = 1u64 << geo.m;
        let mut rem = idx - 1;
        let mut pt = Point::origin(self.n());
        let big_l = self.base.half_edge;
        for a in 0..self.n() {
            let digit = rem % per_axis;
            rem /= per_axis;
            pt.set_coord(a, -big_l + (2 * digit + 1) as f64 * geo.l);
        }
        pt
    }

    fn slab_height(&self, geo: &ChainGeometry) -> f64 {
        (1.0 - self.gamma) * self.base.time_radius() / geo.slabs as f64
    }

    /// `V_{i,j}`: the slab of the upper part the chain ends at.
    pub fn target_slab(&self) -> Box {
        let geo = self.geometry();
        let top = self.gamma * self.base.time_radius() + self.j as f64 * self.slab_height(&geo);
        self.slab_box(self.i, top - self.slab_height(&geo), top, &geo)
    }

    /// `U_{k,ι}`: the slab of the lower part the chain starts from.
    pub fn source_slab(&self) -> Box {
        let geo = self.geometry();
        let bottom = -self.base.time_radius() + (self.iota - 1) as f64 * self.slab_height(&geo);
        self.slab_box(self.k, bottom, bottom + self.slab_height(&geo), &geo)
    }

    fn slab_box(&self, cell: u64, t0: f64, t1: f64, geo: &ChainGeometry) -> Box {
        let c = self.base.center.add(&self.cell_offset(cell, geo));
        let mut lo = c;
        let mut hi = c;
        for a in 0..self.n() {
            lo.set_coord(a, c.coord(a) - geo.l);
            hi.set_coord(a, c.coord(a) + geo.l);
        }
        Box {
            lo: lo.with_t(self.base.center.t() + t0),
            hi: hi.with_t(self.base.center.t() + t1),
        }
    }

    /// Top of the common rectangle, relative to the base center.
    fn junction_top(&self, geo: &ChainGeometry) -> f64 {
        let t1 = self.gamma * self.base.time_radius() + self.slab_height(geo);
        t1 - ((1u64 << geo.m) - 1) as f64 * geo.shift
    }

    fn rect(&self, offset: &Point, top: f64, geo: &ChainGeometry) -> ParabolicRectangle {
        let mut c = self.base.center.add(offset);
        c = c.with_t(self.base.center.t() + top - geo.lp);
        ParabolicRectangle {
            center: c,
            half_edge: geo.l,
            p: self.p(),
        }
    }
}

/// A chain ordered upward in time from the source to the target rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub params: ChainParams,
    pub geometry: ChainGeometry,
    pub rectangles: Vec<ParabolicRectangle>,
    /// Position of the common rectangle; the part before it is the dual chain.
    pub junction: usize,
    /// Spread correction of the descending half.
    pub beta_forward: f64,
    /// Spread correction of the ascending half.
    pub beta_dual: f64,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.rectangles.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.rectangles.is_empty()
    }

    pub fn forward_len(&self) -> usize {
        self.rectangles.len() - 1 - self.junction
    }

    pub fn dual_len(&self) -> usize {
        self.junction
    }

    /// `S^-_d(α) = P_d^+(α) − (0, τ(1+α)l^p)`.
    pub fn shifted_lower(&self, d: usize) -> Result<Box> {
        Ok(upper_part(&self.rectangles[d], self.params.alpha)?.translate_time(-self.geometry.shift))
    }
}

/// Sequence of `count` centers moving from `start` to the origin in `M`
/// sup-norm steps of `l`, then resting at the origin.
fn spatial_path(start: &Point, l: f64, count: usize) -> Vec<Point> {
    let sup = start.sup_norm_space();
    let steps = (sup / l).round() as usize;
    (0..count)
        .map(|d| {
            if d >= steps || steps == 0 {
                Point::origin(start.n())
            } else {
                let frac = 1.0 - d as f64 / steps as f64;
                let mut p = Point::origin(start.n());
                for a in 0..start.n() {
                    p.set_coord(a, start.coord(a) * frac);
                }
                p
            }
        })
        .collect()
}

/// Builds the chain for one index tuple.
pub fn build_chain(cp: &ChainParams) -> Result<Chain> {
    let geo = cp.validate()?;
    let big_n = (1u64 << geo.m) - 1;
    let half = 1u64 << (geo.m - 1);
    let unit = cp.tau * (1.0 + cp.alpha);
    let slab = cp.slab_height(&geo);
    let t_top = cp.gamma * cp.base.time_radius() + cp.j as f64 * slab;

    // Descending half: from R_{i,j} to the common rectangle.
    let drop = (cp.j - 1) as f64 * (1.0 - cp.alpha) / geo.eta;
    let extra = (drop / unit).floor();
    let xi = (drop - extra * unit).max(0.0);
    let beta_forward = xi / (half as f64 * (1.0 - cp.alpha));
    let n_forward = (big_n + extra as u64) as usize;
    let x_target = cp.cell_offset(cp.i, &geo);
    let path = spatial_path(&x_target, geo.l, n_forward + 1);
    let forward: Vec<ParabolicRectangle> = (0..=n_forward)
        .map(|d| {
            let spread = (d as u64).min(half) as f64 * beta_forward * (1.0 - cp.alpha);
            let top = t_top - (d as f64 * unit + spread) * geo.lp;
            cp.rect(&path[d], top, &geo)
        })
        .collect();

    // Ascending half: from R̃_{k,ι} to the common rectangle.
    let s = -cp.base.time_radius() + (cp.iota - 1) as f64 * slab;
    let source_top = s + (unit - cp.alpha + 1.0) * geo.lp;
    let junction_top = cp.junction_top(&geo);
    let rise = (junction_top - source_top) / geo.lp;
    if rise < 0.0 {
        return Err(Error::Structural("common rectangle lies below the source".into()));
    }
    let k_steps = (rise / unit).floor();
    let xi_dual = (rise - k_steps * unit).max(0.0);
    let beta_dual = xi_dual / (half as f64 * (1.0 - cp.alpha));
    let n_dual = k_steps as usize;
    let x_source = cp.cell_offset(cp.k, &geo);
    if n_dual < half as usize || n_dual < (x_source.sup_norm_space() / geo.l).round() as usize {
        return Err(Error::Structural("dual chain too short to reach the common rectangle".into()));
    }
    let path = spatial_path(&x_source, geo.l, n_dual + 1);
    let mut rectangles: Vec<ParabolicRectangle> = (0..=n_dual)
        .map(|d| {
            let spread = (d as u64).min(half) as f64 * beta_dual * (1.0 - cp.alpha);
            let top = if d == n_dual {
                junction_top
            } else {
                source_top + (d as f64 * unit + spread) * geo.lp
            };
            cp.rect(&path[d], top, &geo)
        })
        .collect();
    let junction = rectangles.len() - 1;
    rectangles.pop();
    rectangles.extend(forward.into_iter().rev());
    Ok(Chain {
        params: *cp,
        geometry: geo,
        rectangles,
        junction,
        beta_forward,
        beta_dual,
    })
}

/// Certificate for one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub ok: bool,
    pub violations: Vec<String>,
    pub first_violation: Option<usize>,
    pub length: usize,
    pub forward_len: usize,
    pub dual_len: usize,
    pub length_bound: f64,
    pub min_overlap: f64,
    pub max_overlap: f64,
    pub beta_forward: f64,
    pub beta_dual: f64,
    pub beta_bound: f64,
}

fn flag(rep: &mut ChainReport, idx: Option<usize>, msg: String) {
    rep.ok = false;
    if rep.first_violation.is_none() {
        rep.first_violation = idx;
    }
    if rep.violations.len() < 20 {
        rep.violations.push(msg);
    }
}

/// Checks containment, endpoints, congruence, overlap ratios and lengths.
pub fn verify_chain(c: &Chain) -> Result<ChainReport> {
    if c.rectangles.len() < 2 || c.junction >= c.rectangles.len() {
        return Err(Error::Structural("chain needs at least two rectangles and a junction".into()));
    }
    let cp = &c.params;
    let geo = cp.validate()?;
    let (n, p, alpha) = (cp.n(), cp.p(), cp.alpha);
    let base_box = cp.base.full_box();
    let lower_bound = 0.5f64.powi(n as i32 + 1);
    let c1 = chain_length_bound(p, cp.gamma, alpha, cp.tau);
    let mut rep = ChainReport {
        ok: true,
        violations: Vec::new(),
        first_violation: None,
        length: c.len(),
        forward_len: c.forward_len(),
        dual_len: c.dual_len(),
        length_bound: c1,
        min_overlap: f64::INFINITY,
        max_overlap: 0.0,
        beta_forward: c.beta_forward,
        beta_dual: c.beta_dual,
        beta_bound: 0.5 * (cp.gamma / (1.0 + alpha)).powf(1.0 / (p - 1.0)),
    };
    for (d, r) in c.rectangles.iter().enumerate() {
        if r.half_edge != geo.l {
            flag(&mut rep, Some(d), format!("rectangle {d} is not congruent"));
        }
        if !base_box.contains_box(&r.full_box(), SLACK) {
            flag(&mut rep, Some(d), format!("rectangle {d} leaves the base rectangle"));
        }
    }
    // The source's shifted lower box starts at the bottom of U_{k,ι} and contains it.
    let first = &c.rectangles[0];
    let u = cp.source_slab();
    let s0 = upper_part(first, alpha)?.translate_time(-geo.shift);
    if (s0.lo.t() - u.lo.t()).abs() > SLACK || !s0.contains_box(&u, SLACK) {
        flag(&mut rep, Some(0), "source rectangle does not start at its lower slab".into());
    }
    // The target's upper part ends at the top of V_{i,j} and contains it.
    let last_idx = c.rectangles.len() - 1;
    let last = &c.rectangles[last_idx];
    let v = cp.target_slab();
    let up = upper_part(last, alpha)?;
    if (up.hi.t() - v.hi.t()).abs() > SLACK || !up.contains_box(&v, SLACK) {
        flag(&mut rep, Some(last_idx), "target rectangle does not end at its upper slab".into());
    }
    // The common rectangle and its shifted lower box sit in R^+(0).
    let junction = &c.rectangles[c.junction];
    let r0 = upper_part(&cp.base, 0.0)?;
    let sj = upper_part(junction, alpha)?.translate_time(-geo.shift);
    if !r0.contains_box(&junction.full_box(), SLACK) || !r0.contains_box(&sj, SLACK) {
        flag(&mut rep, Some(c.junction), "common rectangle is not inside R^+(0)".into());
    }
    for d in 1..c.rectangles.len() {
        let lower = upper_part(&c.rectangles[d - 1], alpha)?;
        let shifted = upper_part(&c.rectangles[d], alpha)?.translate_time(-geo.shift);
        let ratio = lower.intersection_volume(&shifted) / lower.volume();
        rep.min_overlap = rep.min_overlap.min(ratio);
        rep.max_overlap = rep.max_overlap.max(ratio);
        if !(ratio >= lower_bound - 1e-12 && ratio <= 1.0 + 1e-12) {
            flag(&mut rep, Some(d), format!("overlap ratio {ratio} at link {d}"));
        }
    }
    if rep.forward_len as f64 > c1 || rep.dual_len as f64 > 2.0 * c1 || rep.length as f64 > 3.0 * c1 {
        flag(&mut rep, None, format!("chain length {} exceeds the bound", c.len()));
    }
    let bb = rep.beta_bound;
    if !(c.beta_forward < bb && c.beta_dual < bb) {
        flag(&mut rep, None, format!("spread correction {} / {} not below {bb}", c.beta_forward, c.beta_dual));
    }
    Ok(rep)
}

/// Outcome of the two-pass covering selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub input: Vec<(Point, ParabolicRectangle)>,
    pub gamma: f64,
    /// `α = γ / 5^p`.
    pub alpha: f64,
    pub epsilon: f64,
    /// Survivors of the first pass, in input order.
    pub first_pass: Vec<usize>,
    /// Final selection, in input order.
    pub selected: Vec<usize>,
}

impl Selection {
    pub fn selected_items(&self) -> Vec<(Point, ParabolicRectangle)> {
        self.selected.iter().map(|&i| self.input[i]).collect()
    }

    /// `P_i^-(α)` with `P_i = 5R_i`.
    pub fn dilated_lower(&self, idx: usize) -> Result<Box> {
        lower_part(&dilate(&self.input[idx].1, 5.0)?, self.alpha)
    }
}

/// Pieces of `b` not covered by `cover`, ignoring slivers thinner than `eps`.
fn uncovered(b: &Box, cover: &[Box], eps: f64) -> bool {
    let mut pieces = vec![*b];
    for c in cover {
        let mut next = Vec::new();
        for piece in pieces {
            if !piece.overlaps(c, eps) {
                next.push(piece);
                continue;
            }
            let mut rest = piece;
            for k in 0..=piece.n() {
                let (lo, hi) = (rest.lo.coord(k), rest.hi.coord(k));
                let (clo, chi) = (c.lo.coord(k).max(lo), c.hi.coord(k).min(hi));
                if clo - lo > eps {
                    let mut part = rest;
                    part.hi.set_coord(k, clo);
                    next.push(part);
                }
                if hi - chi > eps {
                    let mut part = rest;
                    part.lo.set_coord(k, chi);
                    next.push(part);
                }
                rest.lo.set_coord(k, clo);
                rest.hi.set_coord(k, chi);
            }
        }
        pieces = next;
        if pieces.is_empty() {
            return false;
        }
    }
    !pieces.is_empty()
}

/// Two-pass selection: by descending top keep rectangles whose point avoids
/// every kept `P^-(α)`; then by descending edge length keep those whose
/// `P^-(α)` is not covered by the kept ones.
pub fn select_covering(points: &[(Point, ParabolicRectangle)], gamma: f64, epsilon: f64) -> Result<Selection> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return param(format!("gamma must lie in (0,1), got {gamma}"));
    }
    let p = points.first().map_or(2.0, |x| x.1.p);
    for (idx, (pt, r)) in points.iter().enumerate() {
        let lo = lower_part(r, gamma)?;
        if pt.n() != r.n() || !lo.contains_box(&Box { lo: *pt, hi: *pt }, epsilon) {
            return Err(Error::Validation(format!("point {idx} is not in its rectangle's lower part")));
        }
        if r.p != p {
            return Err(Error::Validation("rectangles use different exponents".into()));
        }
    }
    let alpha = gamma / 5f64.powf(p);
    let dl = |r: &ParabolicRectangle| -> Result<Box> { lower_part(&dilate(r, 5.0)?, alpha) };

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[b].1.top().total_cmp(&points[a].1.top()).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    let mut kept_boxes: Vec<Box> = Vec::new();
    for &i in &order {
        if kept_boxes.iter().all(|b| !b.contains(&points[i].0)) {
            kept.push(i);
            kept_boxes.push(dl(&points[i].1)?);
        }
    }
    let mut first_pass = kept.clone();
    first_pass.sort_unstable();

    kept.sort_by(|&a, &b| points[b].1.half_edge.total_cmp(&points[a].1.half_edge).then(a.cmp(&b)));
    let mut selected = Vec::new();
    let mut sel_boxes: Vec<Box> = Vec::new();
    for &i in &kept {
        let b = dl(&points[i].1)?;
        let relevant: Vec<Box> = sel_boxes.iter().filter(|c| b.overlaps(c, epsilon)).copied().collect();
        if uncovered(&b, &relevant, epsilon) {
            selected.push(i);
            sel_boxes.push(b);
        }
    }
    selected.sort_unstable();
    Ok(Selection {
        input: points.to_vec(),
        gamma,
        alpha,
        epsilon,
        first_pass,
        selected,
    })
}

/// Constants `C₂`, `C₃`, `C₁ = 2(C₂ + C₃)` and `C̃₄` of the overlap argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapConstants {
    pub c2: f64,
    pub c3: f64,
    pub c1: f64,
    pub c4_tilde: f64,
    /// `C̃₄ + 2⌈C₁⌉`.
    pub c4: f64,
}

pub fn overlap_constants(n: usize, p: f64, gamma: f64) -> OverlapConstants {
    let nf = n as f64;
    let three_n = 3f64.powi(n as i32);
    let two_n = 2f64.powi(n as i32);
    let q = 2f64.powf(p) - 1.0;
    let c2 = (2f64.powf(2.0 * p + 1.0) * three_n * (3.0 - gamma)
        + 32.0 * 3f64.powi(n as i32 - 1) * (2.0 - gamma) * q * nf)
        / (two_n * (1.0 - gamma) * q);
    let c3_tilde = (2f64.powf(2.0 * p + 2.0) * three_n * (1.0 - gamma) + 16.0 * three_n * (1.0 - gamma) * q * nf)
        / (two_n * (1.0 - gamma) * q);
    let c3 = c3_tilde + 1.0;
    let c1 = 2.0 * (c2 + c3);
    let c4_tilde = 2f64.powf(2.0 * nf + p + 2.0) / (1.0 - gamma);
    OverlapConstants {
        c2,
        c3,
        c1,
        c4_tilde,
        c4: c4_tilde + 2.0 * c1.ceil(),
    }
}

/// Input to the integral check of the selection certificate.
pub struct WitnessData<'a> {
    pub f: &'a SampledField,
    pub lambda: f64,
    pub beta: f64,
}

/// Certificate for one selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub selected: usize,
    /// Pairs in the same scale band whose lower parts meet.
    pub band_violations: Vec<(usize, usize)>,
    pub uncovered_points: Vec<usize>,
    pub max_overlap: u32,
    pub overlap_bound: f64,
    /// Selected rectangles whose `F_i` was trimmed.
    pub trimmed: usize,
    /// Rectangles failing `∫_{F_i}|f| > (λ/2)|R_i^+|^{1−β}`.
    pub integral_failures: Vec<usize>,
    pub idempotent: bool,
}

impl SelectionReport {
    pub fn ok(&self) -> bool {
        self.band_violations.is_empty()
            && self.uncovered_points.is_empty()
            && f64::from(self.max_overlap) <= self.overlap_bound
            && self.integral_failures.is_empty()
            && self.idempotent
    }
}

/// Band index `k` with edge length in `(2^{−k−1}, 2^{−k}]`.
pub fn scale_band(edge: f64) -> i64 {
    (-edge.log2()).floor() as i64
}

/// Checks band disjointness, coverage, the trimmed overlap bound, the
/// integral lower bound (when witness data is given) and idempotence.
/// Overlaps are counted on `counting` (or on the witness grid).
pub fn verify_selection(s: &Selection, counting: &GridSpec, witness: Option<&WitnessData>) -> Result<SelectionReport> {
    let sel = &s.selected;
    let rects: Vec<ParabolicRectangle> = sel.iter().map(|&i| s.input[i].1).collect();
    let (n, p) = match rects.first() {
        Some(r) => (r.n(), r.p),
        None => (counting.n(), 2.0),
    };
    let consts = overlap_constants(n, p, s.gamma);
    let mut rep = SelectionReport {
        selected: sel.len(),
        band_violations: Vec::new(),
        uncovered_points: Vec::new(),
        max_overlap: 0,
        overlap_bound: consts.c4,
        trimmed: 0,
        integral_failures: Vec::new(),
        idempotent: true,
    };
    let lowers: Vec<Box> = rects.iter().map(|r| lower_part(r, s.gamma)).collect::<Result<_>>()?;
    let uppers: Vec<Box> = rects.iter().map(|r| upper_part(r, s.gamma)).collect::<Result<_>>()?;
    for a in 0..rects.len() {
        for b in a + 1..rects.len() {
            if scale_band(2.0 * rects[a].half_edge) == scale_band(2.0 * rects[b].half_edge)
                && lowers[a].overlaps(&lowers[b], s.epsilon)
            {
                rep.band_violations.push((sel[a], sel[b]));
            }
        }
    }
    let dilated: Vec<Box> = sel.iter().map(|&i| s.dilated_lower(i)).collect::<Result<_>>()?;
    for (idx, (pt, _)) in s.input.iter().enumerate() {
        let inside = dilated.iter().any(|b| b.contains_box(&Box { lo: *pt, hi: *pt }, s.epsilon));
        if !inside {
            rep.uncovered_points.push(idx);
        }
    }

    let spec = witness.map_or(counting, |w| w.f.spec());
    let threshold = 2 * consts.c1.ceil() as usize;
    let mut total = vec![0u32; spec.cell_count()];
    let mut cover = vec![0u32; spec.cell_count()];
    for i in 0..rects.len() {
        let gamma_i: Vec<usize> = (0..rects.len())
            .filter(|&j| rects[j].half_edge < rects[i].half_edge && uppers[i].overlaps(&uppers[j], s.epsilon))
            .collect();
        let own = spec.snap(&uppers[i]).clipped;
        let trimmed = gamma_i.len() > threshold;
        if trimmed {
            rep.trimmed += 1;
            spec.for_each_in(&own, |c| cover[c] = 0);
            for &j in &gamma_i {
                let ib = spec.snap(&uppers[j]).clipped;
                spec.for_each_in(&ib, |c| {
                    if own.contains(&spec.unravel(c)) {
                        cover[c] += 1;
                    }
                });
            }
        }
        let mut integral = 0.0;
        spec.for_each_in(&own, |c| {
            if !trimmed || (cover[c] as usize) < threshold {
                total[c] += 1;
                if let Some(w) = witness {
                    integral += w.f.values()[c].abs();
                }
            }
        });
        if let Some(w) = witness {
            integral *= spec.cell_volume();
            let need = w.lambda / 2.0 * rects[i].part_volume(s.gamma).powf(1.0 - w.beta);
            if !(integral > need) {
                rep.integral_failures.push(sel[i]);
            }
        }
    }
    rep.max_overlap = total.iter().copied().max().unwrap_or(0);
    let again = select_covering(&s.selected_items(), s.gamma, s.epsilon)?;
    rep.idempotent = again.selected.iter().copied().eq(0..sel.len());
    Ok(rep)
}
