//! Weight families and estimators of Muckenhoupt-type constants over finite
//! rectangle families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::family::RectangleFamily;
use crate::geometry::{future_part, past_part, Box, Direction, ParabolicRectangle, Point};
use crate::grid::{build_prefix, GridSpec, IndexBox, PrefixTable, SampledField};

/// A nonnegative weight on space-time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightSpec {
    Constant { c: f64 },
    /// `(t0 + t)_+^a`.
    TemporalPower { t0: f64, a: f64 },
    /// `|x|^a` with the Euclidean norm.
    SpatialPower { a: f64 },
    /// `e^{λ t}`.
    OneSidedExponential { lambda: f64 },
    /// `u(x) · v(t)`.
    Product {
        u: std::boxed::Box<WeightSpec>,
        v: std::boxed::Box<WeightSpec>,
    },
    /// Explicit cell values on the evaluation grid.
    #[serde(skip)]
    Grid(SampledField),
}

impl WeightSpec {
    pub fn one() -> Self {
        WeightSpec::Constant { c: 1.0 }
    }

    pub fn product(u: WeightSpec, v: WeightSpec) -> Self {
        WeightSpec::Product {
            u: std::boxed::Box::new(u),
            v: std::boxed::Box::new(v),
        }
    }

    fn at(&self, pt: &Point) -> f64 {
        match self {
            WeightSpec::Constant { c } => *c,
            WeightSpec::TemporalPower { t0, a } => (t0 + pt.t()).max(0.0).powf(*a),
            WeightSpec::SpatialPower { a } => pt.euclid_norm_space().powf(*a),
            WeightSpec::OneSidedExponential { lambda } => (lambda * pt.t()).exp(),
            WeightSpec::Product { u, v } => u.at(pt) * v.at(pt),
            WeightSpec::Grid(_) => unreachable!("grid weights are evaluated by lookup"),
        }
    }
}

/// Cell-center evaluation of a weight.
pub fn eval_weight(w: &WeightSpec, spec: &GridSpec) -> Result<SampledField> {
    let f = match w {
        WeightSpec::Grid(field) => {
            if field.spec() != spec {
                return Err(Error::Shape("grid weight lives on a different grid".into()));
            }
            field.clone()
        }
        WeightSpec::Product { u, v } if matches!(**u, WeightSpec::Grid(_)) || matches!(**v, WeightSpec::Grid(_)) => {
            eval_weight(u, spec)?.zip_map(&eval_weight(v, spec)?, |a, b| a * b)?
        }
        _ => SampledField::from_fn(spec, |p| w.at(p)),
    };
    if let Some(bad) = f.values().iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Validation(format!("weight takes the value {bad}")));
    }
    Ok(f)
}

/// Family-level estimate of a sup-type constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaEstimate {
    /// Max over the family; a lower bound of the continuum constant.
    pub value: f64,
    pub argmax: Option<ParabolicRectangle>,
    pub family_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<f64>>,
}

fn conjugate(r: f64) -> f64 {
    r / (r - 1.0)
}

fn check_exponents(r: f64, q: f64) -> Result<()> {
    if !(r >= 1.0 && q >= r && q.is_finite()) {
        return param(format!("need 1 <= r <= q < inf, got r={r}, q={q}"));
    }
    Ok(())
}

/// Prefix tables for the per-rectangle quantity
/// `Φ(R) = ⨍_{past} u^q · (⨍_{future} v^{−r'})^{q/r'}`.
pub struct TaTables {
    r: f64,
    q: f64,
    uq: PrefixTable,
    v_inv: PrefixTable,
    v_zeros: PrefixTable,
    v: SampledField,
}

impl TaTables {
    pub fn new(u: &SampledField, v: &SampledField, r: f64, q: f64) -> Result<Self> {
        check_exponents(r, q)?;
        u.same_spec(v)?;
        let rp = if r > 1.0 { conjugate(r) } else { f64::INFINITY };
        let uq = build_prefix(&u.map(|x| x.powf(q)));
        let v_inv = build_prefix(&v.map(|x| if x > 0.0 && r > 1.0 { x.powf(-rp) } else { 0.0 }));
        let v_zeros = build_prefix(&v.map(|x| if x > 0.0 { 0.0 } else { 1.0 }));
        Ok(TaTables {
            r,
            q,
            uq,
            v_inv,
            v_zeros,
            v: v.clone(),
        })
    }

    pub fn spec(&self) -> &GridSpec {
        self.uq.spec()
    }

    fn snapped(&self, b: &Box) -> Result<IndexBox> {
        let ib = self.spec().snap(b).clipped;
        if ib.is_empty() {
            return Err(Error::DegenerateBox("rectangle part contains no cell center".into()));
        }
        Ok(ib)
    }

    /// Average of `u^q` over a box.
    pub fn u_average(&self, b: &Box) -> Result<f64> {
        let ib = self.snapped(b)?;
        Ok(self.uq.sum_index_box(&ib) / ib.count() as f64)
    }

    /// `(⨍ v^{−r'})^{q/r'}` for `r > 1`, `(ess inf v)^{−q}` for `r = 1`.
    pub fn v_factor(&self, b: &Box) -> Result<f64> {
        let ib = self.snapped(b)?;
        if self.r == 1.0 {
            let m = self.v.min_over(&ib);
            return Ok(if m > 0.0 { m.powf(-self.q) } else { f64::INFINITY });
        }
        if self.v_zeros.sum_index_box(&ib) > 0.5 {
            return Ok(f64::INFINITY);
        }
        let rp = conjugate(self.r);
        let avg = self.v_inv.sum_index_box(&ib) / ib.count() as f64;
        Ok(avg.powf(self.q / rp))
    }

    /// Per-rectangle quantity; forward reads `u` on `R^-` and `v` on `R^+`.
    pub fn phi(&self, rect: &ParabolicRectangle, gamma: f64, dir: Direction) -> Result<f64> {
        let a = self.u_average(&past_part(rect, gamma, dir)?)?;
        let b = self.v_factor(&future_part(rect, gamma, dir)?)?;
        if a == 0.0 {
            return Ok(0.0);
        }
        Ok(a * b)
    }
}

fn sup_over(
    values: Vec<f64>,
    rects: &[ParabolicRectangle],
    family_id: &str,
    trace: bool,
) -> TaEstimate {
    let mut best = f64::NEG_INFINITY;
    let mut arg = None;
    for (i, &v) in values.iter().enumerate() {
        if v > best {
            best = v;
            arg = Some(rects[i]);
        }
    }
    TaEstimate {
        value: best,
        argmax: arg,
        family_id: family_id.to_string(),
        trace: trace.then_some(values),
    }
}

/// `[u,v]_{TA^±_{r,q}(γ)}` over an explicit list of rectangles.
#[allow(clippy::too_many_arguments)]
pub fn ta_constant_fields(
    u: &SampledField,
    v: &SampledField,
    r: f64,
    q: f64,
    gamma: f64,
    dir: Direction,
    rects: &[ParabolicRectangle],
    family_id: &str,
    trace: bool,
) -> Result<TaEstimate> {
    if rects.is_empty() {
        return param("empty rectangle family");
    }
    let tables = TaTables::new(u, v, r, q)?;
    let values = rects
        .par_iter()
        .map(|rect| tables.phi(rect, gamma, dir))
        .collect::<Result<Vec<f64>>>()?;
    Ok(sup_over(values, rects, family_id, trace))
}

/// `[u,v]_{TA^±_{r,q}(γ)}` estimated on a family over a grid.
#[allow(clippy::too_many_arguments)]
pub fn ta_constant(
    u: &WeightSpec,
    v: &WeightSpec,
    r: f64,
    q: f64,
    gamma: f64,
    dir: Direction,
    fam: &RectangleFamily,
    spec: &GridSpec,
    p: f64,
) -> Result<TaEstimate> {
    let rects = fam.rectangles(spec, p, gamma)?;
    ta_constant_fields(
        &eval_weight(u, spec)?,
        &eval_weight(v, spec)?,
        r,
        q,
        gamma,
        dir,
        &rects,
        &fam.id,
        false,
    )
}

/// Cube families for purely spatial or purely temporal constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum CubeFamily {
    /// Every cube (or interval) made of whole cells.
    Exhaustive,
    /// Explicit `(lo, hi)` index cubes along every axis.
    Explicit { cubes: Vec<(Vec<usize>, usize)> },
}

/// Estimate with an index-space witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeEstimate {
    pub value: f64,
    /// Lower index corner and cell width of the witness cube.
    pub argmax: Option<(Vec<usize>, usize)>,
}

fn spatial_only(w: &SampledField) -> Result<()> {
    if w.spec().nt() != 1 {
        return Err(Error::Shape("spatial weights need a single time cell".into()));
    }
    Ok(())
}

fn all_cubes(shape: &[usize]) -> Vec<(Vec<usize>, usize)> {
    let wmax = *shape.iter().min().unwrap();
    let mut out = Vec::new();
    for w in 1..=wmax {
        let mut corners: Vec<Vec<usize>> = vec![vec![]];
        for &s in shape {
            corners = corners
                .into_iter()
                .flat_map(|c| {
                    (0..=s - w).map(move |i| {
                        let mut c = c.clone();
                        c.push(i);
                        c
                    })
                })
                .collect();
        }
        out.extend(corners.into_iter().map(|c| (c, w)));
    }
    out
}

/// `sup_Q ⨍_Q ω^q · (⨍_Q ω^{−r'})^{q/r'}` over spatial cubes.
pub fn classical_offdiag_constant(w: &SampledField, r: f64, q: f64, cubes: &CubeFamily) -> Result<CubeEstimate> {
    spatial_only(w)?;
    check_exponents(r, q)?;
    let spec = w.spec();
    let n = spec.n();
    let list = match cubes {
        CubeFamily::Exhaustive => all_cubes(&spec.shape()[..n]),
        CubeFamily::Explicit { cubes } => cubes.clone(),
    };
    if list.is_empty() {
        return param("empty cube family");
    }
    let tables = TaTables::new(w, w, r, q)?;
    let mut best = (f64::NEG_INFINITY, None);
    for (corner, width) in list {
        if corner.len() != n || (0..n).any(|k| corner[k] + width > spec.shape()[k]) || width == 0 {
            return param("cube outside the grid");
        }
        let mut ib = spec.full_index_box();
        for k in 0..n {
            ib.lo[k] = corner[k];
            ib.hi[k] = corner[k] + width;
        }
        let a = tables.uq.sum_index_box(&ib) / ib.count() as f64;
        let b = tables.v_factor_index(&ib);
        let v = if a == 0.0 { 0.0 } else { a * b };
        if v > best.0 {
            best = (v, Some((corner, width)));
        }
    }
    Ok(CubeEstimate {
        value: best.0,
        argmax: best.1,
    })
}

impl TaTables {
    fn v_factor_index(&self, ib: &IndexBox) -> f64 {
        if self.r == 1.0 {
            let m = self.v.min_over(ib);
            return if m > 0.0 { m.powf(-self.q) } else { f64::INFINITY };
        }
        if self.v_zeros.sum_index_box(ib) > 0.5 {
            return f64::INFINITY;
        }
        let rp = conjugate(self.r);
        (self.v_inv.sum_index_box(ib) / ib.count() as f64).powf(self.q / rp)
    }
}

/// One-sided estimate with its per-`h` profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneSidedEstimate {
    pub value: f64,
    /// Witness `(x, h)`.
    pub argmax: Option<(f64, f64)>,
    /// `(h, sup over x)` for every half-width in the sweep.
    pub per_h: Vec<(f64, f64)>,
    /// Set when the profile keeps growing with `h`.
    pub diverging: bool,
}

/// `sup (1/h)∫_{x−h}^x ω^q · ((1/h)∫_x^{x+h} ω^{−r'})^{q/r'}` over intervals
/// `[x − h, x + h]` with `x` on grid nodes and `h` a whole number of cells.
pub fn one_sided_constant(w: &SampledField, r: f64, q: f64) -> Result<OneSidedEstimate> {
    check_exponents(r, q)?;
    let spec = w.spec();
    if spec.cell_count() != spec.nt() {
        return Err(Error::Shape("temporal weights need a single spatial cell".into()));
    }
    let tables = TaTables::new(w, w, r, q)?;
    let nt = spec.nt();
    let mut best = (f64::NEG_INFINITY, None);
    let mut per_h = Vec::new();
    for m in 1..=nt / 2 {
        let mut sup_h = f64::NEG_INFINITY;
        for node in m..=nt - m {
            let mut left = spec.full_index_box();
            left.lo[1] = node - m;
            left.hi[1] = node;
            let mut right = left;
            right.lo[1] = node;
            right.hi[1] = node + m;
            let a = tables.uq.sum_index_box(&left) / m as f64;
            let v = if a == 0.0 { 0.0 } else { a * tables.v_factor_index(&right) };
            sup_h = sup_h.max(v);
            if v > best.0 {
                let x = spec.origin().t() + node as f64 * spec.h_t();
                best = (v, Some((x, m as f64 * spec.h_t())));
            }
        }
        per_h.push((m as f64 * spec.h_t(), sup_h));
    }
    let diverging = match (per_h.first(), per_h.last()) {
        (Some(first), Some(last)) => {
            last.1 >= best.0 && last.1 > 10.0 * first.1 && per_h.windows(2).skip(per_h.len() / 2).all(|w| w[1].1 >= w[0].1)
        }
        _ => false,
    };
    Ok(OneSidedEstimate {
        value: best.0,
        argmax: best.1,
        per_h,
        diverging,
    })
}

/// `sup_R ⨍_R ω · (⨍_R ω^{−r'})^{q/r'}` over full rectangles.
pub fn script_a_constant(w: &SampledField, r: f64, q: f64, rects: &[ParabolicRectangle]) -> Result<TaEstimate> {
    check_exponents(r, q)?;
    if rects.is_empty() {
        return param("empty rectangle family");
    }
    let plain = build_prefix(w);
    let tables = TaTables::new(w, w, r, q)?;
    let values = rects
        .iter()
        .map(|rect| {
            let ib = tables.snapped(&rect.full_box())?;
            let a = plain.sum_index_box(&ib) / ib.count() as f64;
            Ok(if a == 0.0 { 0.0 } else { a * tables.v_factor_index(&ib) })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(sup_over(values, rects, "script-a", false))
}

/// Outcome of a measure-condition scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    /// `min (RHS − LHS)` over all tested pairs; negative means violated.
    pub worst_margin: f64,
    /// Rectangle and subset size of the worst pair.
    pub witness: Option<(ParabolicRectangle, usize)>,
    pub tested: usize,
}

/// Tests `|E|/|R^+| ≤ C [(v^r)(E) / (u^r)(R^-)]^δ` on sublevel sets
/// `{v^{−r} > λ} ∩ R^+` along a ladder of `λ`, plus seeded random subsets.
#[allow(clippy::too_many_arguments)]
pub fn measure_condition_check(
    u: &SampledField,
    v: &SampledField,
    r: f64,
    delta: f64,
    c: f64,
    gamma: f64,
    rects: &[ParabolicRectangle],
    random_subsets: usize,
    seed: u64,
) -> Result<MeasureReport> {
    u.same_spec(v)?;
    if !(delta > 0.0 && delta < 1.0) {
        return param(format!("delta must lie in (0,1), got {delta}"));
    }
    if !(r > 1.0 / delta) {
        return param(format!("need r > 1/delta, got r={r}, delta={delta}"));
    }
    let spec = u.spec();
    let ur = build_prefix(&u.map(|x| x.powf(r)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = MeasureReport {
        worst_margin: f64::INFINITY,
        witness: None,
        tested: 0,
    };
    for rect in rects {
        let up = spec.snap(&future_part(rect, gamma, Direction::Forward)?).clipped;
        let lo = spec.snap(&past_part(rect, gamma, Direction::Forward)?).clipped;
        if up.is_empty() || lo.is_empty() {
            continue;
        }
        let denom = ur.sum_index_box(&lo) * spec.cell_volume();
        let mut cells = Vec::with_capacity(up.count());
        spec.for_each_in(&up, |i| cells.push(i));
        let total = cells.len();
        let evaluate = |subset: &[usize], report: &mut MeasureReport| {
            if subset.is_empty() {
                return;
            }
            let lhs = subset.len() as f64 / total as f64;
            let num: f64 = subset.iter().map(|&i| v.values()[i].powf(r)).sum::<f64>() * spec.cell_volume();
            let rhs = if denom > 0.0 {
                c * (num / denom).powf(delta)
            } else {
                f64::INFINITY
            };
            let margin = rhs - lhs;
            report.tested += 1;
            if margin < report.worst_margin {
                report.worst_margin = margin;
                report.witness = Some((*rect, subset.len()));
            }
        };
        let mut by_level: Vec<(f64, usize)> = cells.iter().map(|&i| (v.values()[i].powf(-r), i)).collect();
        by_level.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut k = 0;
        while k < by_level.len() {
            let level = by_level[k].0;
            while k < by_level.len() && by_level[k].0 == level {
                k += 1;
            }
            let subset: Vec<usize> = by_level[..k].iter().map(|&(_, i)| i).collect();
            evaluate(&subset, &mut report);
        }
        for _ in 0..random_subsets {
            let subset: Vec<usize> = cells.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            evaluate(&subset, &mut report);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::FamilyRule;

    fn grid(nx: usize, nt: usize, hx: f64, ht: f64) -> GridSpec {
        GridSpec::new(Point::new(&[0.0], 0.0).unwrap(), &[nx, nt], hx, ht).unwrap()
    }

    #[test]
    fn weight_evaluation() {
        let g = GridSpec::new(Point::new(&[0.0], -0.5).unwrap(), &[1, 2], 1.0, 1.0).unwrap();
        let e = eval_weight(&WeightSpec::OneSidedExponential { lambda: 1.0 }, &g).unwrap();
        assert_eq!(e.values(), &[1.0, std::f64::consts::E]);
        let g = grid(3, 3, 1.0, 1.0);
        let w = WeightSpec::product(
            WeightSpec::SpatialPower { a: 0.0 },
            WeightSpec::TemporalPower { t0: 0.0, a: 0.0 },
        );
        assert!(eval_weight(&w, &g).unwrap().values().iter().all(|&v| v == 1.0));
        assert!(eval_weight(&WeightSpec::Constant { c: -1.0 }, &g).is_err());
    }

    #[test]
    fn weight_spec_from_toml() {
        let w: WeightSpec = toml::from_str(
            "kind = \"product\"\nu = { kind = \"spatial-power\", a = 0.1 }\nv = { kind = \"one-sided-exponential\", lambda = 0.5 }",
        )
        .unwrap();
        assert_eq!(
            w,
            WeightSpec::product(
                WeightSpec::SpatialPower { a: 0.1 },
                WeightSpec::OneSidedExponential { lambda: 0.5 }
            )
        );
    }

    #[test]
    fn constant_pair_is_one() {
        let g = grid(8, 64, 1.0, 0.25);
        let fam = RectangleFamily::new("lat", FamilyRule::default());
        for (r, q) in [(1.0, 1.0), (1.5, 3.0), (2.0, 2.0)] {
            let e = ta_constant(
                &WeightSpec::one(),
                &WeightSpec::one(),
                r,
                q,
                0.5,
                Direction::Forward,
                &RectangleFamily::exhaustive(),
                &g,
                2.0,
            )
            .unwrap();
            assert!((e.value - 1.0).abs() < 1e-12);
            let e = ta_constant(&WeightSpec::one(), &WeightSpec::one(), r, q, 0.0, Direction::Backward, &fam, &g, 2.0);
            assert!((e.unwrap().value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_cell_gives_infinite_sentinel() {
        let g = grid(8, 16, 1.0, 0.25);
        let v = SampledField::from_fn(&g, |p| if p.t() > 2.0 && p.t() < 2.5 { 0.0 } else { 1.0 });
        let u = SampledField::constant(&g, 1.0);
        let rects = RectangleFamily::exhaustive().rectangles(&g, 2.0, 0.5).unwrap();
        for r in [1.0, 2.0] {
            let e = ta_constant_fields(&u, &v, r, 2.0, 0.5, Direction::Forward, &rects, "x", false).unwrap();
            assert_eq!(e.value, f64::INFINITY);
            assert!(e.argmax.is_some());
        }
        assert!(ta_constant_fields(&u, &v, 2.0, 2.0, 0.5, Direction::Forward, &[], "x", false).is_err());
    }

    #[test]
    fn spatial_constant_of_one_and_homogeneity() {
        let g = grid(64, 1, 1.0 / 64.0, 1.0);
        let one = SampledField::constant(&g, 1.0);
        let e = classical_offdiag_constant(&one, 2.0, 2.0, &CubeFamily::Exhaustive).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        let w = SampledField::from_fn(&g, |p| p.coord(0).abs().powf(0.25));
        let a = classical_offdiag_constant(&w, 2.0, 2.0, &CubeFamily::Exhaustive).unwrap();
        let b = classical_offdiag_constant(&w.map(|x| 7.0 * x), 2.0, 2.0, &CubeFamily::Exhaustive).unwrap();
        assert_eq!(a.argmax, b.argmax);
    }

    #[test]
    fn one_sided_orientation() {
        let g = GridSpec::new(Point::new(&[0.0], -4.0).unwrap(), &[1, 256], 1.0, 8.0 / 256.0).unwrap();
        let up = SampledField::from_fn(&g, |p| p.t().exp());
        let good = one_sided_constant(&up, 2.0, 2.0).unwrap();
        assert!(good.value.is_finite() && good.value <= 1.0 + 1e-12);
        assert!(!good.diverging);
        let down = SampledField::from_fn(&g, |p| (-p.t()).exp());
        let bad = one_sided_constant(&down, 2.0, 2.0).unwrap();
        assert!(bad.diverging);
        assert!(bad.value > 100.0);
    }

    #[test]
    fn script_a_on_constants() {
        let g = grid(8, 8, 1.0, 1.0);
        let rects = RectangleFamily::exhaustive().rectangles(&g, 2.0, 0.0).unwrap();
        let e = script_a_constant(&SampledField::constant(&g, 1.0), 2.0, 2.0, &rects).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        let e = script_a_constant(&SampledField::constant(&g, 5.0), 2.0, 2.0, &rects).unwrap();
        assert!((e.value - 0.2).abs() < 1e-12);
    }

    #[test]
    fn measure_condition_constant_and_plateau() {
        let g = grid(8, 64, 1.0, 0.25);
        let aligned = FamilyRule::Lattice {
            center_stride: 1,
            ladder: crate::family::Ladder::Multiples { step: None, count: 3 },
        };
        let rects = RectangleFamily::new("aligned", aligned).rectangles(&g, 2.0, 0.5).unwrap();
        let one = SampledField::constant(&g, 1.0);
        let rep = measure_condition_check(&one, &one, 3.0, 0.5, 1.0, 0.5, &rects, 4, 1).unwrap();
        assert!(rep.worst_margin >= -1e-12);
        assert!(rep.tested > 0);
        let v = SampledField::from_fn(&g, |p| if (3.0..4.0).contains(&p.t()) { 0.0 } else { 1.0 });
        let rep = measure_condition_check(&one, &v, 3.0, 0.5, 1.0, 0.5, &rects, 0, 1).unwrap();
        assert!(rep.worst_margin < 0.0);
        assert!(rep.witness.is_some());
        assert!(measure_condition_check(&one, &one, 1.5, 0.5, 1.0, 0.5, &rects, 0, 1).is_err());
    }
}
