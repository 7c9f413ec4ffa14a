//! Finite families of parabolic rectangles standing in for the full class of
//! rectangles in sup-type quantities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::geometry::{lower_part, upper_part, ParabolicRectangle, Point};
use crate::grid::GridSpec;

/// A list of half-edges `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Ladder {
    /// `L_min ρ^k` up to `L_max`; bounds default to `2h_x` and a quarter of
    /// the narrowest spatial extent.
    Geometric {
        ratio: f64,
        #[serde(default)]
        min: Option<f64>,
        #[serde(default)]
        max: Option<f64>,
    },
    /// `k · step` for `k = 1..=count`; `step` defaults to `h_x`.
    Multiples {
        #[serde(default)]
        step: Option<f64>,
        count: usize,
    },
    Values { values: Vec<f64> },
}

impl Default for Ladder {
    fn default() -> Self {
        Ladder::Geometric {
            ratio: std::f64::consts::SQRT_2,
            min: None,
            max: None,
        }
    }
}

impl Ladder {
    pub fn resolve(&self, spec: &GridSpec) -> Result<Vec<f64>> {
        let out = match self {
            Ladder::Geometric { ratio, min, max } => {
                if !(*ratio > 1.0) {
                    return param(format!("ladder ratio must exceed 1, got {ratio}"));
                }
                let width = (0..spec.n())
                    .map(|k| spec.shape()[k] as f64 * spec.h_x())
                    .fold(f64::INFINITY, f64::min);
                let lo = min.unwrap_or(2.0 * spec.h_x());
                let hi = max.unwrap_or(width / 4.0);
                if !(lo > 0.0) {
                    return param("ladder minimum must be positive");
                }
                let mut v = Vec::new();
                let mut k = 0;
                loop {
                    let l = lo * ratio.powi(k);
                    if l > hi * (1.0 + 1e-12) {
                        break;
                    }
                    v.push(l);
                    k += 1;
                }
                v
            }
            Ladder::Multiples { step, count } => {
                let s = step.unwrap_or(spec.h_x());
                if !(s > 0.0) {
                    return param("ladder step must be positive");
                }
                (1..=*count).map(|k| k as f64 * s).collect()
            }
            Ladder::Values { values } => {
                if values.iter().any(|&l| !(l > 0.0)) {
                    return param("ladder values must be positive");
                }
                values.clone()
            }
        };
        Ok(out)
    }
}

/// Generation rule of a rectangle family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum FamilyRule {
    /// Cubes made of whole cells, temporal centers on the half-cell lattice.
    Exhaustive,
    /// Centers on every `center_stride`-th grid node times a ladder of `L`.
    Lattice {
        center_stride: usize,
        #[serde(default)]
        ladder: Ladder,
    },
    /// Uniform centers and log-uniform half-edges.
    Random {
        count: usize,
        seed: u64,
        l_min: f64,
        l_max: f64,
    },
    Explicit { rectangles: Vec<ParabolicRectangle> },
}

impl Default for FamilyRule {
    fn default() -> Self {
        FamilyRule::Lattice {
            center_stride: 2,
            ladder: Ladder::default(),
        }
    }
}

/// A named rectangle family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectangleFamily {
    pub id: String,
    #[serde(flatten)]
    pub rule: FamilyRule,
}

impl RectangleFamily {
    pub fn new(id: impl Into<String>, rule: FamilyRule) -> Self {
        RectangleFamily { id: id.into(), rule }
    }

    pub fn exhaustive() -> Self {
        Self::new("exhaustive", FamilyRule::Exhaustive)
    }

    pub fn explicit(id: impl Into<String>, rectangles: Vec<ParabolicRectangle>) -> Self {
        Self::new(id, FamilyRule::Explicit { rectangles })
    }

    /// Members that lie in the window and whose `γ`-parts each cover a cell center.
    pub fn rectangles(&self, spec: &GridSpec, p: f64, gamma: f64) -> Result<Vec<ParabolicRectangle>> {
        let candidates = match &self.rule {
            FamilyRule::Exhaustive => exhaustive_candidates(spec, p)?,
            FamilyRule::Lattice {
                center_stride,
                ladder,
            } => lattice_candidates(spec, p, *center_stride, &ladder.resolve(spec)?)?,
            FamilyRule::Random {
                count,
                seed,
                l_min,
                l_max,
            } => random_candidates(spec, p, *count, *seed, *l_min, *l_max)?,
            FamilyRule::Explicit { rectangles } => rectangles.clone(),
        };
        let mut out = Vec::with_capacity(candidates.len());
        for r in candidates {
            if admissible(spec, &r, gamma)? {
                out.push(r);
            }
        }
        Ok(out)
    }
}

/// In-window with both `γ`-parts covering at least one cell center.
pub fn admissible(spec: &GridSpec, r: &ParabolicRectangle, gamma: f64) -> Result<bool> {
    if !in_window(spec, r) {
        return Ok(false);
    }
    let up = spec.snap(&upper_part(r, gamma)?).clipped;
    let lo = spec.snap(&lower_part(r, gamma)?).clipped;
    Ok(!up.is_empty() && !lo.is_empty())
}

/// Containment of the full rectangle in the window, up to rounding.
pub fn in_window(spec: &GridSpec, r: &ParabolicRectangle) -> bool {
    let w = spec.window();
    let b = r.full_box();
    (0..spec.axes()).all(|k| {
        let slack = 1e-9 * spec.spacing(k);
        b.lo.coord(k) >= w.lo.coord(k) - slack && b.hi.coord(k) <= w.hi.coord(k) + slack
    })
}

fn exhaustive_candidates(spec: &GridSpec, p: f64) -> Result<Vec<ParabolicRectangle>> {
    let n = spec.n();
    let o = spec.origin();
    let wmax = (0..n).map(|k| spec.shape()[k]).min().unwrap_or(1);
    let mut out = Vec::new();
    for w in 1..=wmax {
        let half = w as f64 * spec.h_x() / 2.0;
        let offsets: Vec<Vec<usize>> = (0..n).map(|k| (0..=spec.shape()[k] - w).collect()).collect();
        let mut spatial: Vec<Vec<f64>> = vec![vec![]];
        for (k, offs) in offsets.iter().enumerate() {
            let mut next = Vec::new();
            for prefix in &spatial {
                for &i in offs {
                    let mut c = prefix.clone();
                    c.push(o.coord(k) + i as f64 * spec.h_x() + half);
                    next.push(c);
                }
            }
            spatial = next;
        }
        for xs in &spatial {
            for j in 0..=2 * spec.nt() {
                let t = o.t() + j as f64 * spec.h_t() / 2.0;
                let r = ParabolicRectangle::new(Point::new(xs, t)?, half, p)?;
                if in_window(spec, &r) {
                    out.push(r);
                }
            }
        }
    }
    Ok(out)
}

fn lattice_candidates(
    spec: &GridSpec,
    p: f64,
    stride: usize,
    ladder: &[f64],
) -> Result<Vec<ParabolicRectangle>> {
    if stride == 0 {
        return param("center stride must be at least 1");
    }
    let n = spec.n();
    let o = spec.origin();
    let nodes = |k: usize| -> Vec<f64> {
        (0..=spec.shape()[k])
            .step_by(stride)
            .map(|i| o.coord(k) + i as f64 * spec.spacing(k))
            .collect()
    };
    let mut centers: Vec<Vec<f64>> = vec![vec![]];
    for k in 0..=n {
        let mut next = Vec::new();
        for prefix in &centers {
            for c in nodes(k) {
                let mut v = prefix.clone();
                v.push(c);
                next.push(v);
            }
        }
        centers = next;
    }
    let mut out = Vec::new();
    for &l in ladder {
        for c in &centers {
            let r = ParabolicRectangle::new(Point::new(&c[..n], c[n])?, l, p)?;
            if in_window(spec, &r) {
                out.push(r);
            }
        }
    }
    Ok(out)
}

fn random_candidates(
    spec: &GridSpec,
    p: f64,
    count: usize,
    seed: u64,
    l_min: f64,
    l_max: f64,
) -> Result<Vec<ParabolicRectangle>> {
    if !(l_min > 0.0 && l_max >= l_min) {
        return param("random family needs 0 < l_min <= l_max");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = spec.window();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < count.saturating_mul(200).max(1000) {
        attempts += 1;
        let l = (l_min.ln() + rng.gen::<f64>() * (l_max / l_min).ln()).exp();
        let mut c = w.lo;
        for k in 0..spec.axes() {
            c.set_coord(k, rng.gen_range(w.lo.coord(k)..w.hi.coord(k)));
        }
        let r = ParabolicRectangle::new(c, l, p)?;
        if in_window(spec, &r) {
            out.push(r);
        }
    }
    Ok(out)
}
