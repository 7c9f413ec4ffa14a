//! Points, axis-aligned space-time boxes and parabolic rectangles.
//!
//! Coordinates are `n` spatial axes followed by time. Boxes are half-open
//! products: the lower corner is inclusive and the upper corner exclusive.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Largest supported spatial dimension.
pub const MAX_SPACE_DIM: usize = 2;

/// Dimension `n` and parabolic exponent `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct Params {
    n: usize,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    n: usize,
    p: f64,
}

impl TryFrom<ParamsRepr> for Params {
    type Error = Error;
    fn try_from(r: ParamsRepr) -> Result<Self> {
        Params::new(r.n, r.p)
    }
}

impl From<Params> for ParamsRepr {
    fn from(p: Params) -> Self {
        ParamsRepr { n: p.n, p: p.p }
    }
}

impl Params {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if !(1..=MAX_SPACE_DIM).contains(&n) {
            return param(format!("n must be 1 or 2, got {n}"));
        }
        if !(p.is_finite() && p > 1.0) {
            return param(format!("p must be a finite real > 1, got {p}"));
        }
        Ok(Params { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Homogeneous dimension `n + p`.
    pub fn homogeneous_dim(&self) -> f64 {
        self.n as f64 + self.p
    }
}

/// Direction of the time lag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// A space-time point `(x, t)` with `x ∈ ℝ^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub struct Point {
    n: usize,
    x: [f64; MAX_SPACE_DIM],
    t: f64,
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    x: Vec<f64>,
    t: f64,
}

impl TryFrom<PointRepr> for Point {
    type Error = Error;
    fn try_from(r: PointRepr) -> Result<Self> {
        Point::new(&r.x, r.t)
    }
}

impl From<Point> for PointRepr {
    fn from(p: Point) -> Self {
        PointRepr {
            x: p.space().to_vec(),
            t: p.t,
        }
    }
}

impl Point {
    pub fn new(x: &[f64], t: f64) -> Result<Self> {
        if !(1..=MAX_SPACE_DIM).contains(&x.len()) {
            return param(format!("spatial coordinate count {} unsupported", x.len()));
        }
        let mut arr = [0.0; MAX_SPACE_DIM];
        arr[..x.len()].copy_from_slice(x);
        Ok(Point { n: x.len(), x: arr, t })
    }

    /// The origin of `ℝ^{n+1}`.
    pub fn origin(n: usize) -> Self {
        Point {
            n,
            x: [0.0; MAX_SPACE_DIM],
            t: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> &[f64] {
        &self.x[..self.n]
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Coordinate along axis `k`, where axis `n` is time.
    pub fn coord(&self, k: usize) -> f64 {
        if k == self.n {
            self.t
        } else {
            self.x[k]
        }
    }

    pub fn set_coord(&mut self, k: usize, v: f64) {
        if k == self.n {
            self.t = v;
        } else {
            self.x[k] = v;
        }
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn sup_norm_space(&self) -> f64 {
        self.space().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn euclid_norm_space(&self) -> f64 {
        self.space().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `a - b` coordinatewise.
    pub fn sub(&self, other: &Point) -> Point {
        let mut out = *self;
        for k in 0..self.n {
            out.x[k] -= other.x[k];
        }
        out.t -= other.t;
        out
    }

    pub fn add(&self, other: &Point) -> Point {
        let mut out = *self;
        for k in 0..self.n {
            out.x[k] += other.x[k];
        }
        out.t += other.t;
        out
    }

    /// Parabolic dilation `(x, t) ↦ (λx, λ^p t)`.
    pub fn scale_parabolic(&self, lambda: f64, p: f64) -> Point {
        let mut out = *self;
        for k in 0..self.n {
            out.x[k] *= lambda;
        }
        out.t *= lambda.powf(p);
        out
    }
}

/// Half-open axis-aligned box in `ℝ^{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box {
    pub lo: Point,
    pub hi: Point,
}

impl Box {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if lo.n() != hi.n() {
            return Err(Error::Shape("box corners differ in dimension".into()));
        }
        for k in 0..=lo.n() {
            if !(lo.coord(k) <= hi.coord(k)) {
                return Err(Error::DegenerateBox(format!(
                    "axis {k}: lo {} > hi {}",
                    lo.coord(k),
                    hi.coord(k)
                )));
            }
        }
        Ok(Box { lo, hi })
    }

    pub fn n(&self) -> usize {
        self.lo.n()
    }

    pub fn extent(&self, k: usize) -> f64 {
        self.hi.coord(k) - self.lo.coord(k)
    }

    pub fn volume(&self) -> f64 {
        (0..=self.n()).map(|k| self.extent(k)).product()
    }

    pub fn contains(&self, pt: &Point) -> bool {
        (0..=self.n()).all(|k| {
            let c = pt.coord(k);
            self.lo.coord(k) <= c && c < self.hi.coord(k)
        })
    }

    /// Containment of `other` in `self` with an absolute slack on every face.
    pub fn contains_box(&self, other: &Box, slack: f64) -> bool {
        (0..=self.n()).all(|k| {
            other.lo.coord(k) >= self.lo.coord(k) - slack
                && other.hi.coord(k) <= self.hi.coord(k) + slack
        })
    }

    /// Intersection, or `None` when the overlap has empty interior.
    pub fn intersection(&self, other: &Box) -> Option<Box> {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for k in 0..=self.n() {
            let a = self.lo.coord(k).max(other.lo.coord(k));
            let b = self.hi.coord(k).min(other.hi.coord(k));
            if a >= b {
                return None;
            }
            lo.set_coord(k, a);
            hi.set_coord(k, b);
        }
        Some(Box { lo, hi })
    }

    pub fn intersection_volume(&self, other: &Box) -> f64 {
        self.intersection(other).map_or(0.0, |b| b.volume())
    }

    /// True when the interiors overlap by more than `slack` on every axis.
    pub fn overlaps(&self, other: &Box, slack: f64) -> bool {
        (0..=self.n()).all(|k| {
            self.lo.coord(k).max(other.lo.coord(k)) + slack
                < self.hi.coord(k).min(other.hi.coord(k))
        })
    }

    /// Mirror image under `t ↦ 2 t0 − t`.
    pub fn reflect_time(&self, t0: f64) -> Box {
        Box {
            lo: self.lo.with_t(2.0 * t0 - self.hi.t()),
            hi: self.hi.with_t(2.0 * t0 - self.lo.t()),
        }
    }

    pub fn translate_time(&self, dt: f64) -> Box {
        Box {
            lo: self.lo.with_t(self.lo.t() + dt),
            hi: self.hi.with_t(self.hi.t() + dt),
        }
    }

    pub fn corners(&self) -> Vec<Point> {
        let d = self.n() + 1;
        (0..1usize << d)
            .map(|mask| {
                let mut c = self.lo;
                for k in 0..d {
                    if mask >> k & 1 == 1 {
                        c.set_coord(k, self.hi.coord(k));
                    }
                }
                c
            })
            .collect()
    }
}

/// `R(x, t, L) = Q(x, L) × (t − L^p, t + L^p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicRectangle {
    pub center: Point,
    pub half_edge: f64,
    pub p: f64,
}

impl ParabolicRectangle {
    pub fn new(center: Point, half_edge: f64, p: f64) -> Result<Self> {
        if !(half_edge.is_finite() && half_edge > 0.0) {
            return param(format!("half-edge must be positive, got {half_edge}"));
        }
        if !(p.is_finite() && p > 1.0) {
            return param(format!("p must be > 1, got {p}"));
        }
        Ok(ParabolicRectangle {
            center,
            half_edge,
            p,
        })
    }

    pub fn n(&self) -> usize {
        self.center.n()
    }

    /// Temporal half-extent `L^p`.
    pub fn time_radius(&self) -> f64 {
        self.half_edge.powf(self.p)
    }

    pub fn full_box(&self) -> Box {
        self.slab(-self.time_radius(), self.time_radius())
    }

    pub fn top(&self) -> f64 {
        self.center.t() + self.time_radius()
    }

    /// Box `Q(x, L) × (t + a, t + b)`.
    fn slab(&self, a: f64, b: f64) -> Box {
        let l = self.half_edge;
        let mut lo = self.center;
        let mut hi = self.center;
        for k in 0..self.n() {
            lo.set_coord(k, self.center.coord(k) - l);
            hi.set_coord(k, self.center.coord(k) + l);
        }
        lo.t = self.center.t() + a;
        hi.t = self.center.t() + b;
        Box { lo, hi }
    }

    /// `|R^±(γ)| = 2^n (1 − γ) L^{n+p}`.
    pub fn part_volume(&self, gamma: f64) -> f64 {
        2f64.powi(self.n() as i32) * (1.0 - gamma) * self.half_edge.powf(self.n() as f64 + self.p)
    }

    pub fn translate(&self, dx: &Point) -> ParabolicRectangle {
        ParabolicRectangle {
            center: self.center.add(dx),
            ..*self
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return param(format!("gamma must lie in [0,1), got {gamma}"));
    }
    Ok(())
}

/// `R^+(γ) = Q(x, L) × (t + γL^p, t + L^p)`.
pub fn upper_part(r: &ParabolicRectangle, gamma: f64) -> Result<Box> {
    check_gamma(gamma)?;
    let tp = r.time_radius();
    Ok(r.slab(gamma * tp, tp))
}

/// `R^-(γ) = Q(x, L) × (t − L^p, t − γL^p)`.
pub fn lower_part(r: &ParabolicRectangle, gamma: f64) -> Result<Box> {
    check_gamma(gamma)?;
    let tp = r.time_radius();
    Ok(r.slab(-tp, -gamma * tp))
}

/// The part an operator averages over: `R^+` forward, `R^-` backward.
pub fn future_part(r: &ParabolicRectangle, gamma: f64, dir: Direction) -> Result<Box> {
    match dir {
        Direction::Forward => upper_part(r, gamma),
        Direction::Backward => lower_part(r, gamma),
    }
}

/// The part an evaluation point must lie in: `R^-` forward, `R^+` backward.
pub fn past_part(r: &ParabolicRectangle, gamma: f64, dir: Direction) -> Result<Box> {
    future_part(r, gamma, dir.reversed())
}

/// `ΛR`: same center, half-edge `ΛL`.
pub fn dilate(r: &ParabolicRectangle, lambda: f64) -> Result<ParabolicRectangle> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return param(format!("dilation factor must be positive, got {lambda}"));
    }
    Ok(ParabolicRectangle {
        half_edge: r.half_edge * lambda,
        ..*r
    })
}

/// `d_p = max(‖x − y‖_∞, |t − s|^{1/p})`.
pub fn parabolic_distance(a: &Point, b: &Point, p: f64) -> f64 {
    let d = a.sub(b);
    d.sup_norm_space().max(d.t().abs().powf(1.0 / p))
}

/// Membership in `Ω^{γ±}`: `t > γ‖x‖_∞^p` forward, `−t > γ‖x‖_∞^p` backward.
pub fn in_cone(pt: &Point, gamma: f64, p: f64, dir: Direction) -> bool {
    let t = match dir {
        Direction::Forward => pt.t(),
        Direction::Backward => -pt.t(),
    };
    t > 0.0 && t > gamma * pt.sup_norm_space().powf(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, t: f64) -> Point {
        Point::new(&[x], t).unwrap()
    }

    fn unit() -> ParabolicRectangle {
        ParabolicRectangle::new(pt(0.0, 0.0), 1.0, 2.0).unwrap()
    }

    #[test]
    fn parts_of_unit_rectangle() {
        let up = upper_part(&unit(), 0.5).unwrap();
        assert_eq!((up.lo.coord(0), up.hi.coord(0)), (-1.0, 1.0));
        assert_eq!((up.lo.t(), up.hi.t()), (0.5, 1.0));
        let lo = lower_part(&unit(), 0.5).unwrap();
        assert_eq!((lo.lo.t(), lo.hi.t()), (-1.0, -0.5));
        assert_eq!(up.volume(), 1.0);
        assert_eq!(lo, up.reflect_time(0.0));
    }

    #[test]
    fn invalid_gamma_and_lambda() {
        assert!(upper_part(&unit(), 1.0).is_err());
        assert!(lower_part(&unit(), -0.1).is_err());
        assert!(dilate(&unit(), 0.0).is_err());
        assert!(ParabolicRectangle::new(pt(0.0, 0.0), 0.0, 2.0).is_err());
        assert!(Params::new(3, 2.0).is_err());
        assert!(Params::new(1, 1.0).is_err());
    }

    #[test]
    fn dilation() {
        let r5 = dilate(&unit(), 5.0).unwrap();
        assert_eq!(r5.half_edge, 5.0);
        assert_eq!(dilate(&unit(), 1.0).unwrap(), unit());
    }

    #[test]
    fn distance_and_cone() {
        let d = parabolic_distance(&pt(0.0, 0.0), &pt(1.0, 2.0), 2.0);
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(parabolic_distance(&pt(0.3, 0.2), &pt(0.3, 0.2), 2.0), 0.0);
        assert!(in_cone(&pt(1.0, 0.6), 0.5, 2.0, Direction::Forward));
        assert!(in_cone(&pt(0.0, 1.0), 0.9, 2.0, Direction::Forward));
        assert!(!in_cone(&pt(1.0, -0.1), 0.0, 2.0, Direction::Forward));
        assert!(in_cone(&pt(1.0, -0.6), 0.5, 2.0, Direction::Backward));
    }

    #[test]
    fn half_open_membership() {
        let b = upper_part(&unit(), 0.5).unwrap();
        assert!(b.contains(&pt(-1.0, 0.5)));
        assert!(!b.contains(&pt(1.0, 0.7)));
        assert!(!b.contains(&pt(0.0, 1.0)));
    }

    #[test]
    fn point_serde_roundtrip() {
        let p = Point::new(&[1.5, -2.0], 0.25).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"x":[1.5,-2.0],"t":0.25}"#);
        let q: Point = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
