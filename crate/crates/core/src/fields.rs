//! Test functions sampled at cell centers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::geometry::{Box, Point};
use crate::grid::{GridSpec, SampledField};

/// A closed-form or seeded field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    Zero,
    Constant { c: f64 },
    /// `height · Π_k (1 − ((z_k − c_k)/w_k)²)_+²`, one width per axis.
    Bump { center: Point, widths: Vec<f64>, height: f64 },
    Indicator { lo: Point, hi: Point },
    /// `count` bumps with seeded centers, widths and heights inside `support`;
    /// each full width is a seeded fraction in `width_range` of the support extent.
    RandomBumps {
        seed: u64,
        count: usize,
        support: Box,
        #[serde(default = "default_width_range")]
        width_range: [f64; 2],
    },
    /// Independent uniform `[0,1)` values on cells whose centers lie in
    /// `support`, each kept with probability `density`.
    Noise { seed: u64, density: f64, support: Box },
}

fn default_width_range() -> [f64; 2] {
    [0.1, 0.5]
}

fn bump_value(z: &Point, center: &Point, widths: &[f64]) -> f64 {
    let mut v = 1.0;
    for (k, &w) in widths.iter().enumerate() {
        let s = (z.coord(k) - center.coord(k)) / w;
        if s.abs() >= 1.0 {
            return 0.0;
        }
        v *= (1.0 - s * s).powi(2);
    }
    v
}

impl FieldSpec {
    pub fn bump(center: Point, widths: &[f64], height: f64) -> Self {
        FieldSpec::Bump {
            center,
            widths: widths.to_vec(),
            height,
        }
    }

    /// Value at a point; seeded kinds have no pointwise form and return `None`.
    pub fn value_at(&self, z: &Point) -> Option<f64> {
        match self {
            FieldSpec::Zero => Some(0.0),
            FieldSpec::Constant { c } => Some(*c),
            FieldSpec::Bump { center, widths, height } => Some(height * bump_value(z, center, widths)),
            FieldSpec::Indicator { lo, hi } => {
                let inside = (0..=z.n()).all(|k| lo.coord(k) <= z.coord(k) && z.coord(k) < hi.coord(k));
                Some(if inside { 1.0 } else { 0.0 })
            }
            FieldSpec::RandomBumps { .. } | FieldSpec::Noise { .. } => None,
        }
    }

    fn validate(&self, spec: &GridSpec) -> Result<()> {
        let axes = spec.axes();
        match self {
            FieldSpec::Bump { center, widths, .. } => {
                if center.n() != spec.n() || widths.len() != axes || widths.iter().any(|&w| !(w > 0.0)) {
                    return param("bump needs a center of the grid dimension and one positive width per axis");
                }
            }
            FieldSpec::Indicator { lo, hi } => {
                if lo.n() != spec.n() || hi.n() != spec.n() {
                    return param("indicator corners must match the grid dimension");
                }
            }
            FieldSpec::RandomBumps { support, .. } | FieldSpec::Noise { support, .. } => {
                if support.n() != spec.n() {
                    return param("support box must match the grid dimension");
                }
                if let FieldSpec::RandomBumps { width_range: [a, b], .. } = self {
                    if !(0.0 < *a && a <= b && *b <= 1.0) {
                        return param(format!("width range must satisfy 0 < a <= b <= 1, got [{a}, {b}]"));
                    }
                }
                if let FieldSpec::Noise { density, .. } = self {
                    if !(0.0..=1.0).contains(density) {
                        return param(format!("noise density must lie in [0,1], got {density}"));
                    }
                }
            }
            FieldSpec::Zero | FieldSpec::Constant { .. } => {}
        }
        Ok(())
    }

    /// Samples the field at cell centers.
    pub fn sample(&self, spec: &GridSpec) -> Result<SampledField> {
        self.validate(spec)?;
        let axes = spec.axes();
        match self {
            FieldSpec::RandomBumps { seed, count, support, width_range: [wa, wb] } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let bumps: Vec<(Point, Vec<f64>, f64)> = (0..*count)
                    .map(|_| {
                        let mut c = support.lo;
                        let mut w = Vec::with_capacity(axes);
                        for k in 0..axes {
                            let (a, b) = (support.lo.coord(k), support.hi.coord(k));
                            let width = (b - a) * rng.gen_range(*wa..=*wb);
                            c.set_coord(k, rng.gen_range(a + width / 2.0..=b - width / 2.0));
                            w.push(width / 2.0);
                        }
                        (c, w, rng.gen_range(0.2..1.0))
                    })
                    .collect();
                Ok(SampledField::from_fn(spec, |z| {
                    bumps.iter().map(|(c, w, h)| h * bump_value(z, c, w)).sum()
                }))
            }
            FieldSpec::Noise { seed, density, support } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(SampledField::from_fn(spec, |z| {
                    let keep = rng.gen::<f64>() < *density;
                    let v = rng.gen::<f64>();
                    if keep && support.contains(z) {
                        v
                    } else {
                        0.0
                    }
                }))
            }
            other => Ok(SampledField::from_fn(spec, |z| other.value_at(z).unwrap_or(0.0))),
        }
    }
}

/// Samples `f(λx, λ^p t)` for a pointwise field.
pub fn sample_rescaled(field: &FieldSpec, spec: &GridSpec, lambda: f64, p: f64) -> Result<SampledField> {
    field.validate(spec)?;
    if field.value_at(&Point::origin(spec.n())).is_none() {
        return param("rescaled sampling needs a pointwise field");
    }
    Ok(SampledField::from_fn(spec, |z| {
        field.value_at(&z.scale_parabolic(lambda, p)).unwrap_or(0.0)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_peak_and_support() {
        let b = FieldSpec::bump(Point::new(&[0.0], 0.0).unwrap(), &[1.0, 1.0], 2.0);
        assert_eq!(b.value_at(&Point::new(&[0.0], 0.0).unwrap()), Some(2.0));
        assert_eq!(b.value_at(&Point::new(&[1.0], 0.0).unwrap()), Some(0.0));
    }

    #[test]
    fn seeded_fields_repeat() {
        let g = GridSpec::new(Point::new(&[0.0], 0.0).unwrap(), &[16, 16], 1.0 / 16.0, 1.0 / 16.0).unwrap();
        let sup = Box::new(Point::new(&[0.25], 0.25).unwrap(), Point::new(&[0.75], 0.75).unwrap()).unwrap();
        let f = FieldSpec::RandomBumps { seed: 3, count: 4, support: sup, width_range: [0.1, 0.5] };
        assert_eq!(f.sample(&g).unwrap(), f.sample(&g).unwrap());
        let n = FieldSpec::Noise { seed: 3, density: 0.5, support: sup };
        let s = n.sample(&g).unwrap();
        assert_eq!(s, n.sample(&g).unwrap());
        assert!(s.values().iter().any(|&v| v > 0.0));
    }
}
