//! Fractional maximal operators and fractional integrals with time lag.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::family::{in_window, FamilyRule, Ladder, RectangleFamily};
use crate::geometry::{
    future_part, in_cone, parabolic_distance, past_part, Direction, ParabolicRectangle, Point,
};
use crate::grid::{build_prefix, GridSpec, PrefixTable, SampledField, MAX_AXES};

/// How rectangles reaching outside the window are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPolicy {
    /// Drop rectangles that leave the window.
    #[default]
    Exclude,
    /// Keep them and read `f` as zero outside the window.
    ZeroExtend,
}

/// Search space of a maximal operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Search {
    /// Sup over family members whose past part contains the point.
    Uncentered {
        #[serde(default)]
        family: FamilyRule,
    },
    /// Sup over `R(x, t, L)` for `L` in the ladder.
    Centered {
        #[serde(default)]
        ladder: Ladder,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalConfig {
    pub gamma: f64,
    pub beta: f64,
    #[serde(default = "forward")]
    pub direction: Direction,
    /// Truncation `a`: only `L ≥ a` is searched.
    #[serde(default)]
    pub min_scale: f64,
    pub search: Search,
    #[serde(default)]
    pub boundary: BoundaryPolicy,
}

fn forward() -> Direction {
    Direction::Forward
}

impl MaximalConfig {
    pub fn uncentered(gamma: f64, beta: f64, family: FamilyRule) -> Self {
        MaximalConfig {
            gamma,
            beta,
            direction: Direction::Forward,
            min_scale: 0.0,
            search: Search::Uncentered { family },
            boundary: BoundaryPolicy::Exclude,
        }
    }

    pub fn centered(gamma: f64, beta: f64, ladder: Ladder) -> Self {
        MaximalConfig {
            search: Search::Centered { ladder },
            ..Self::uncentered(gamma, beta, FamilyRule::Exhaustive)
        }
    }

    pub fn with_direction(mut self, d: Direction) -> Self {
        self.direction = d;
        self
    }

    pub fn with_boundary(mut self, b: BoundaryPolicy) -> Self {
        self.boundary = b;
        self
    }

    pub fn with_min_scale(mut self, a: f64) -> Self {
        self.min_scale = a;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return param(format!("gamma must lie in [0,1), got {}", self.gamma));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return param(format!("beta must lie in [0,1), got {}", self.beta));
        }
        if !(self.min_scale >= 0.0) {
            return param("min_scale must be nonnegative");
        }
        Ok(())
    }
}

/// Maximal function values plus per-cell bookkeeping.
#[derive(Debug, Clone)]
pub struct MaximalOutput {
    pub field: SampledField,
    /// False where no admissible rectangle reached the cell.
    pub admissible: Vec<bool>,
    /// Index of the maximizing rectangle in `rectangles`.
    pub argmax: Vec<Option<u32>>,
    /// Rectangles searched (uncentered) or the resolved ladder as unit-center
    /// rectangles (centered).
    pub rectangles: Vec<ParabolicRectangle>,
}

/// Evaluator of `|R^±(γ)|^β ⨍_{R^±(γ)} |f|` with snapped averages.
struct RectangleAverager<'a> {
    table: &'a PrefixTable,
    gamma: f64,
    beta: f64,
    dir: Direction,
    boundary: BoundaryPolicy,
}

impl RectangleAverager<'_> {
    fn value(&self, r: &ParabolicRectangle) -> Result<Option<f64>> {
        let spec = self.table.spec();
        if self.boundary == BoundaryPolicy::Exclude && !in_window(spec, r) {
            return Ok(None);
        }
        let snapped = spec.snap(&future_part(r, self.gamma, self.dir)?);
        let count = match self.boundary {
            BoundaryPolicy::Exclude => snapped.clipped.count() as f64,
            BoundaryPolicy::ZeroExtend => snapped.lattice_count() as f64,
        };
        if count == 0.0 {
            return Ok(None);
        }
        let avg = self.table.sum_index_box(&snapped.clipped) / count;
        let scale = if self.beta == 0.0 {
            1.0
        } else {
            r.part_volume(self.gamma).powf(self.beta)
        };
        Ok(Some(scale * avg))
    }
}

fn reflect_rectangle(r: &ParabolicRectangle) -> ParabolicRectangle {
    ParabolicRectangle { center: r.center.with_t(-r.center.t()), ..*r }
}

fn reverse_rows<T: Copy>(v: &[T], nt: usize) -> Vec<T> {
    v.chunks(nt).flat_map(|row| row.iter().rev().copied()).collect()
}

/// Fractional maximal function of `|f|`.
pub fn maximal(f: &SampledField, p: f64, cfg: &MaximalConfig) -> Result<SampledField> {
    Ok(maximal_detailed(f, p, cfg)?.field)
}

pub fn maximal_detailed(f: &SampledField, p: f64, cfg: &MaximalConfig) -> Result<MaximalOutput> {
    cfg.validate()?;
    if cfg.direction == Direction::Backward {
        // Defined as the time reflection of the forward operator, so the
        // half-open snapping convention cannot break the symmetry.
        let mut fwd = cfg.clone().with_direction(Direction::Forward);
        if let Search::Uncentered { family: FamilyRule::Explicit { rectangles } } = &mut fwd.search {
            rectangles.iter_mut().for_each(|r| *r = reflect_rectangle(r));
        }
        let out = maximal_detailed(&f.reflect_time(), p, &fwd)?;
        let nt = f.spec().nt();
        return Ok(MaximalOutput {
            field: out.field.reflect_time(),
            admissible: reverse_rows(&out.admissible, nt),
            argmax: reverse_rows(&out.argmax, nt),
            rectangles: match cfg.search {
                Search::Uncentered { .. } => out.rectangles.iter().map(reflect_rectangle).collect(),
                _ => out.rectangles,
            },
        });
    }
    match &cfg.search {
        Search::Uncentered { family } => {
            let rects = match family {
                FamilyRule::Explicit { rectangles } => rectangles.clone(),
                _ => RectangleFamily::new("search", family.clone()).rectangles(f.spec(), p, cfg.gamma)?,
            };
            uncentered_over(f, &rects, cfg)
        }
        Search::Centered { ladder } => {
            let ls = ladder.resolve(f.spec())?;
            centered_over(f, p, &ls, cfg)
        }
    }
}

/// Uncentered maximal function over an explicit rectangle list.
pub fn uncentered_over(f: &SampledField, rects: &[ParabolicRectangle], cfg: &MaximalConfig) -> Result<MaximalOutput> {
    cfg.validate()?;
    let spec = f.spec();
    let table = build_prefix(&f.abs());
    let avg = RectangleAverager {
        table: &table,
        gamma: cfg.gamma,
        beta: cfg.beta,
        dir: cfg.direction,
        boundary: cfg.boundary,
    };
    let values = rects
        .par_iter()
        .map(|r| {
            if r.half_edge < cfg.min_scale {
                return Ok(None);
            }
            avg.value(r)
        })
        .collect::<Result<Vec<Option<f64>>>>()?;
    let mut out = vec![0.0; spec.cell_count()];
    let mut admissible = vec![false; spec.cell_count()];
    let mut argmax: Vec<Option<u32>> = vec![None; spec.cell_count()];
    for (i, (r, v)) in rects.iter().zip(&values).enumerate() {
        let Some(v) = *v else { continue };
        let region = spec.snap(&past_part(r, cfg.gamma, cfg.direction)?).clipped;
        spec.for_each_in(&region, |c| {
            if !admissible[c] || v > out[c] {
                out[c] = v;
                argmax[c] = Some(i as u32);
            }
            admissible[c] = true;
        });
    }
    Ok(MaximalOutput {
        field: SampledField::new(spec.clone(), out)?,
        admissible,
        argmax,
        rectangles: rects.to_vec(),
    })
}

/// Centered maximal function over a ladder of half-edges.
pub fn centered_over(f: &SampledField, p: f64, ladder: &[f64], cfg: &MaximalConfig) -> Result<MaximalOutput> {
    cfg.validate()?;
    let spec = f.spec();
    let table = build_prefix(&f.abs());
    let avg = RectangleAverager {
        table: &table,
        gamma: cfg.gamma,
        beta: cfg.beta,
        dir: cfg.direction,
        boundary: cfg.boundary,
    };
    let ls: Vec<f64> = ladder.iter().copied().filter(|&l| l >= cfg.min_scale).collect();
    let cells = (0..spec.cell_count())
        .into_par_iter()
        .map(|c| {
            let center = spec.center_of_flat(c);
            let mut best: Option<(f64, u32)> = None;
            for (k, &l) in ls.iter().enumerate() {
                let r = ParabolicRectangle::new(center, l, p)?;
                if let Some(v) = avg.value(&r)? {
                    if best.map_or(true, |(b, _)| v > b) {
                        best = Some((v, k as u32));
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    let rectangles = ls
        .iter()
        .map(|&l| ParabolicRectangle::new(Point::origin(spec.n()), l, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(MaximalOutput {
        field: SampledField::new(spec.clone(), cells.iter().map(|b| b.map_or(0.0, |x| x.0)).collect())?,
        admissible: cells.iter().map(|b| b.is_some()).collect(),
        argmax: cells.iter().map(|b| b.map(|x| x.1)).collect(),
        rectangles,
    })
}

/// `K = ((1 − γ)/(1 − γ/4))^{β − 1}`.
pub fn shifted_bound_constant(gamma: f64, beta: f64) -> f64 {
    ((1.0 - gamma) / (1.0 - gamma / 4.0)).powf(beta - 1.0)
}

/// Cellwise comparison of the centered operator with the uncentered one at
/// lag `γ/4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftedBoundReport {
    pub k: f64,
    pub checked_cells: usize,
    pub violations: usize,
    /// Largest `centered / (K · shifted)` over checked cells.
    pub worst_ratio: f64,
    pub worst_cell: Option<usize>,
}

/// Checks `𝓜^{γ}_β f ≤ K M^{γ/4}_β f` using the witnesses
/// `P = R(x, t + γL^p/2, L)`; cells where some witness leaves the window are
/// skipped.
pub fn centered_vs_shifted_bound(
    f: &SampledField,
    p: f64,
    gamma: f64,
    beta: f64,
    ladder: &[f64],
    rel_slack: f64,
) -> Result<ShiftedBoundReport> {
    let spec = f.spec();
    let centered = centered_over(f, p, ladder, &MaximalConfig::centered(gamma, beta, Ladder::Values { values: ladder.to_vec() }))?;
    let mut witnesses = Vec::new();
    let mut complete = vec![true; spec.cell_count()];
    for c in 0..spec.cell_count() {
        let center = spec.center_of_flat(c);
        for &l in ladder {
            let r = ParabolicRectangle::new(center, l, p)?;
            if !in_window(spec, &r) {
                continue;
            }
            let shifted = ParabolicRectangle::new(center.with_t(center.t() + gamma * r.time_radius() / 2.0), l, p)?;
            if in_window(spec, &shifted) {
                witnesses.push(shifted);
            } else {
                complete[c] = false;
            }
        }
    }
    let shifted = uncentered_over(f, &witnesses, &MaximalConfig::uncentered(gamma / 4.0, beta, FamilyRule::Exhaustive))?;
    let k = shifted_bound_constant(gamma, beta);
    let mut report = ShiftedBoundReport {
        k,
        checked_cells: 0,
        violations: 0,
        worst_ratio: 0.0,
        worst_cell: None,
    };
    for c in 0..spec.cell_count() {
        if !complete[c] || !centered.admissible[c] {
            continue;
        }
        report.checked_cells += 1;
        let lhs = centered.field.values()[c];
        let rhs = k * shifted.field.values()[c];
        if lhs > rhs * (1.0 + rel_slack) {
            report.violations += 1;
        }
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if ratio > report.worst_ratio || report.worst_cell.is_none() {
            report.worst_ratio = report.worst_ratio.max(ratio);
            report.worst_cell = Some(c);
        }
    }
    Ok(report)
}

/// Treatment of the offset cell containing the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularPolicy {
    #[default]
    Skip,
    /// Use the kernel value at the cell corner farthest from the origin.
    AnalyticFloor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralConfig {
    pub gamma: f64,
    pub beta: f64,
    #[serde(default = "forward")]
    pub direction: Direction,
    #[serde(default)]
    pub singular: SingularPolicy,
}

impl IntegralConfig {
    pub fn new(gamma: f64, beta: f64) -> Self {
        IntegralConfig {
            gamma,
            beta,
            direction: Direction::Forward,
            singular: SingularPolicy::Skip,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return param(format!("gamma must lie in [0,1), got {}", self.gamma));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return param(format!("beta must lie in (0,1), got {}", self.beta));
        }
        Ok(())
    }
}

/// Offset kernel on the index lattice `[−(N_k−1), N_k−1]` per axis.
struct OffsetKernel {
    half: [usize; MAX_AXES],
    strides: [usize; MAX_AXES],
    axes: usize,
    data: Vec<f64>,
}

impl OffsetKernel {
    fn build(spec: &GridSpec, kernel: impl Fn(&Point) -> f64 + Sync) -> Self {
        let axes = spec.axes();
        let mut half = [0; MAX_AXES];
        let mut dims = [1; MAX_AXES];
        for k in 0..axes {
            half[k] = spec.shape()[k] - 1;
            dims[k] = 2 * half[k] + 1;
        }
        let mut strides = [0; MAX_AXES];
        let mut acc = 1;
        for k in (0..axes).rev() {
            strides[k] = acc;
            acc *= dims[k];
        }
        let data = (0..acc)
            .into_par_iter()
            .map(|flat| {
                let mut pt = Point::origin(spec.n());
                let mut rem = flat;
                for k in (0..axes).rev() {
                    let i = (rem % dims[k]) as f64 - half[k] as f64;
                    rem /= dims[k];
                    pt.set_coord(k, i * spec.spacing(k));
                }
                kernel(&pt)
            })
            .collect();
        OffsetKernel {
            half,
            strides,
            axes,
            data,
        }
    }

    fn at(&self, out: &[usize; MAX_AXES], src: &[usize; MAX_AXES]) -> f64 {
        let mut off = 0;
        for k in 0..self.axes {
            off += (src[k] + self.half[k] - out[k]) * self.strides[k];
        }
        self.data[off]
    }
}

/// `out(z) = cellvol · Σ_w f(w) K(w − z)` with `f` zero outside the window.
fn convolve(f: &SampledField, kernel: &OffsetKernel) -> Result<SampledField> {
    let spec = f.spec();
    let sources: Vec<([usize; MAX_AXES], f64)> = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, &v)| (spec.unravel(i), v))
        .collect();
    let vol = spec.cell_volume();
    let out = (0..spec.cell_count())
        .into_par_iter()
        .map(|c| {
            let z = spec.unravel(c);
            let mut s = 0.0;
            for (w, v) in &sources {
                let k = kernel.at(&z, w);
                if k != 0.0 {
                    s += v * k;
                }
            }
            s * vol
        })
        .collect();
    SampledField::new(spec.clone(), out)
}

/// `I^{γ±}_β f(x,t) = ∫_{Ω^{γ±}} f(x + y, t + s) d_p((y,s),0)^{−(n+p)(1−β)}`:
/// the forward integral reads `f` on the cone above `(x,t)`, the side
/// averaged by the forward maximal operators.
pub fn fractional_integral(f: &SampledField, p: f64, cfg: &IntegralConfig) -> Result<SampledField> {
    cfg.validate()?;
    if cfg.direction == Direction::Backward {
        let mut fwd = cfg.clone();
        fwd.direction = Direction::Forward;
        return Ok(fractional_integral(&f.reflect_time(), p, &fwd)?.reflect_time());
    }
    let spec = f.spec();
    let n = spec.n();
    let exponent = -(n as f64 + p) * (1.0 - cfg.beta);
    let origin = Point::origin(n);
    let mut floor_pt = origin;
    for k in 0..=n {
        floor_pt.set_coord(k, spec.spacing(k) / 2.0);
    }
    let floor = parabolic_distance(&floor_pt, &origin, p).powf(exponent);
    let kernel = OffsetKernel::build(spec, |pt| {
        let at_origin = (0..=n).all(|k| pt.coord(k) == 0.0);
        if at_origin {
            return match cfg.singular {
                SingularPolicy::Skip => 0.0,
                SingularPolicy::AnalyticFloor => floor,
            };
        }
        if in_cone(pt, cfg.gamma, p, cfg.direction) {
            parabolic_distance(pt, &origin, p).powf(exponent)
        } else {
            0.0
        }
    });
    convolve(f, &kernel)
}

/// Parameters of the kernel `h_β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub n: usize,
    pub p: f64,
    pub beta: f64,
}

impl KernelParams {
    pub fn new(n: usize, p: f64, beta: f64) -> Result<Self> {
        let kp = KernelParams { n, p, beta };
        kp.validate()?;
        Ok(kp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 2.0 && self.p.is_finite()) {
            return param(format!("kernel needs p >= 2, got {}", self.p));
        }
        let hd = self.n as f64 + self.p;
        if !(self.beta > 0.0 && self.beta < hd) {
            return param(format!("kernel needs beta in (0, n+p), got {}", self.beta));
        }
        Ok(())
    }

    fn hd(&self) -> f64 {
        self.n as f64 + self.p
    }

    /// `β̃ = 1 − (n + p − β)/((p − 1)(n + p))`.
    pub fn beta_tilde(&self) -> f64 {
        1.0 - (self.hd() - self.beta) / ((self.p - 1.0) * self.hd())
    }

    /// `(n + p)(1 − β̃) = (n + p − β)/(p − 1)`.
    pub fn decay_exponent(&self) -> f64 {
        (self.hd() - self.beta) / (self.p - 1.0)
    }
}

/// `h_β(x,t) = t^{(β−n−p)/(p(p−1))} exp(−((p−1)/p)(|x|^p/(p t))^{1/(p−1)})` for `t > 0`.
pub fn heat_kernel(pt: &Point, kp: &KernelParams) -> f64 {
    let t = pt.t();
    if t <= 0.0 {
        return 0.0;
    }
    let p = kp.p;
    let power = t.powf((kp.beta - kp.hd()) / (p * (p - 1.0)));
    let x = pt.euclid_norm_space();
    let arg = (x.powf(p) / (p * t)).powf(1.0 / (p - 1.0));
    power * (-(p - 1.0) / p * arg).exp()
}

/// `∫_{Ω^{γ+}} f(x + y, t + s) h_β(y,s)` (the half-space for `γ = 0`).
/// The heat solution operator is its time reflection.
pub fn riesz_potential(f: &SampledField, gamma: f64, kp: &KernelParams) -> Result<SampledField> {
    kp.validate()?;
    if !(0.0..1.0).contains(&gamma) {
        return param(format!("gamma must lie in [0,1), got {gamma}"));
    }
    if f.spec().n() != kp.n {
        return Err(Error::Shape("kernel dimension differs from grid".into()));
    }
    let kernel = OffsetKernel::build(f.spec(), |pt| {
        if in_cone(pt, gamma, kp.p, Direction::Forward) {
            heat_kernel(pt, kp)
        } else {
            0.0
        }
    });
    convolve(f, &kernel)
}

/// As [`riesz_potential`] with `h_β` restricted to `Ω^{outer+} \ Ω^{inner+}`,
/// `outer < inner`.
pub fn riesz_shell(f: &SampledField, outer: f64, inner: f64, kp: &KernelParams) -> Result<SampledField> {
    kp.validate()?;
    if !(0.0 <= outer && outer < inner && inner <= 1.0) {
        return param(format!("shell needs 0 <= outer < inner <= 1, got ({outer}, {inner})"));
    }
    if f.spec().n() != kp.n {
        return Err(Error::Shape("kernel dimension differs from grid".into()));
    }
    let kernel = OffsetKernel::build(f.spec(), |pt| {
        if in_cone(pt, outer, kp.p, Direction::Forward) && !in_cone(pt, inner, kp.p, Direction::Forward) {
            heat_kernel(pt, kp)
        } else {
            0.0
        }
    });
    convolve(f, &kernel)
}

/// `ρ = h_β · d_p^{(n+p)(1−β̃)}` at a point.
pub fn kernel_ratio(pt: &Point, kp: &KernelParams) -> f64 {
    let d = parabolic_distance(pt, &Point::origin(kp.n), kp.p);
    heat_kernel(pt, kp) * d.powf(kp.decay_exponent())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelScanReport {
    pub samples: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Largest `|ρ(λy, λ^p s)/ρ(y,s) − 1|` over the samples.
    pub homogeneity_defect: f64,
    /// Largest `|ρ(0,s) − 1|`.
    pub axis_defect: f64,
}

/// Samples `Ω^{γ+}` at log-uniform scales in `[scale_min, scale_max]`.
pub fn kernel_equivalence_scan(
    gamma: f64,
    kp: &KernelParams,
    samples: usize,
    scale_min: f64,
    scale_max: f64,
    seed: u64,
) -> Result<KernelScanReport> {
    kp.validate()?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return param(format!("gamma must lie in (0,1), got {gamma}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = kp.p;
    let mut rep = KernelScanReport {
        samples: 0,
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
        homogeneity_defect: 0.0,
        axis_defect: 0.0,
    };
    let (lmin, lmax) = (scale_min.ln(), scale_max.ln());
    while rep.samples < samples {
        let d = rng.gen_range(lmin..=lmax).exp();
        let mut pt = Point::origin(kp.n);
        for k in 0..kp.n {
            pt.set_coord(k, rng.gen_range(-d..d));
        }
        let floor = gamma * pt.sup_norm_space().powf(p);
        let top = d.powf(p).max(floor * 2.0);
        pt = pt.with_t(rng.gen_range(floor..top));
        if !in_cone(&pt, gamma, p, Direction::Forward) {
            continue;
        }
        let rho = kernel_ratio(&pt, kp);
        let lambda = rng.gen_range(lmin..=lmax).exp() / d;
        let rho_scaled = kernel_ratio(&pt.scale_parabolic(lambda, p), kp);
        rep.min_ratio = rep.min_ratio.min(rho);
        rep.max_ratio = rep.max_ratio.max(rho);
        rep.homogeneity_defect = rep.homogeneity_defect.max((rho_scaled / rho - 1.0).abs());
        let axis = kernel_ratio(&Point::origin(kp.n).with_t(d.powf(p)), kp);
        rep.axis_defect = rep.axis_defect.max((axis - 1.0).abs());
        rep.samples += 1;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, nt: usize, hx: f64, ht: f64) -> GridSpec {
        GridSpec::new(Point::new(&[0.0], 0.0).unwrap(), &[nx, nt], hx, ht).unwrap()
    }

    #[test]
    fn constant_field_maximal() {
        let g = grid(8, 16, 1.0, 0.25);
        let f = SampledField::constant(&g, 3.0);
        let out = maximal_detailed(&f, 2.0, &MaximalConfig::uncentered(0.5, 0.0, FamilyRule::Exhaustive)).unwrap();
        for (v, a) in out.field.values().iter().zip(&out.admissible) {
            if *a {
                assert_eq!(*v, 3.0);
            } else {
                assert_eq!(*v, 0.0);
            }
        }
        assert!(out.admissible.iter().any(|&a| a));
    }

    #[test]
    fn indicator_attains_cap() {
        let g = grid(8, 32, 1.0, 0.25);
        let r0 = ParabolicRectangle::new(Point::new(&[4.0], 4.0).unwrap(), 2.0, 2.0).unwrap();
        let up = crate::geometry::upper_part(&r0, 0.5).unwrap();
        let f = SampledField::from_fn(&g, |p| if up.contains(p) { 1.0 } else { 0.0 });
        let out = maximal(&f, 2.0, &MaximalConfig::uncentered(0.5, 0.0, FamilyRule::Exhaustive)).unwrap();
        let lo = crate::geometry::lower_part(&r0, 0.5).unwrap();
        for c in 0..g.cell_count() {
            if lo.contains(&g.center_of_flat(c)) {
                assert_eq!(out.values()[c], 1.0);
            }
        }
    }

    #[test]
    fn shifted_constants() {
        assert!((shifted_bound_constant(0.5, 0.0) - 1.75).abs() < 1e-15);
        assert!((shifted_bound_constant(0.5, 0.25) - (0.5f64 / 0.875).powf(-0.75)).abs() < 1e-15);
    }

    #[test]
    fn single_far_cell_integral() {
        let g = grid(16, 32, 0.25, 0.125);
        let mut f = SampledField::zeros(&g);
        f.values_mut()[g.flat(&[10, 30, 0])] = 1.0;
        let out = fractional_integral(&f, 2.0, &IntegralConfig::new(0.5, 0.5)).unwrap();
        let z = [8usize, 2, 0];
        let y = Point::new(&[0.5], 28.0 * 0.125).unwrap();
        let expect = g.cell_volume() * parabolic_distance(&y, &Point::origin(1), 2.0).powf(-1.5);
        assert!((out.get(&z) - expect).abs() < 1e-15 * expect.max(1.0));
        assert!(fractional_integral(&SampledField::zeros(&g), 2.0, &IntegralConfig::new(0.5, 0.5))
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn heat_kernel_values() {
        let kp = KernelParams::new(1, 2.0, 2.0).unwrap();
        assert_eq!(heat_kernel(&Point::new(&[0.0], 1.0).unwrap(), &kp), 1.0);
        let v = heat_kernel(&Point::new(&[2.0], 1.0).unwrap(), &kp);
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(heat_kernel(&Point::new(&[0.0], -1.0).unwrap(), &kp), 0.0);
        assert!(KernelParams::new(1, 1.5, 1.0).is_err());
        assert!(KernelParams::new(1, 2.0, 3.0).is_err());
        assert!((kp.decay_exponent() - 3.0 * (1.0 - kp.beta_tilde())).abs() < 1e-14);
    }

    #[test]
    fn kernel_scan_bracket() {
        let kp = KernelParams::new(1, 2.0, 2.0).unwrap();
        let rep = kernel_equivalence_scan(0.5, &kp, 2000, 1e-2, 1e2, 3).unwrap();
        assert!(rep.min_ratio > 0.0 && rep.max_ratio < f64::INFINITY);
        assert!(rep.homogeneity_defect < 1e-12);
        assert!(rep.axis_defect < 1e-12);
    }
}
