//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use parabolic_lag::analysis::{
    check_chains, check_duality, check_heat_apriori, check_kernel_equivalence,
    check_lag_monotonicity, check_pointwise_control, check_selection, check_welland, welland_constant, welland_ladder,
    HeatStudy,
};
use parabolic_lag::constructions::chain_length_bound;
use parabolic_lag::experiment::{run_config, ExperimentConfig};
use parabolic_lag::family::{FamilyRule, Ladder, RectangleFamily};
use parabolic_lag::fields::{sample_rescaled, FieldSpec};
use parabolic_lag::geometry::{lower_part, upper_part, Box, Direction, ParabolicRectangle, Point, MAX_SPACE_DIM};
use parabolic_lag::grid::{box_average, build_prefix, GridSpec, SampledField};
use parabolic_lag::operators::{fractional_integral, maximal, IntegralConfig, KernelParams, MaximalConfig};
use parabolic_lag::weights::{ta_constant, WeightSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn pt(x: f64, t: f64) -> Point {
    Point::new(&[x], t).unwrap()
}

fn grid(origin: Point, nx: usize, nt: usize, hx: f64, ht: f64) -> GridSpec {
    GridSpec::new(origin, &[nx, nt], hx, ht).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn geometry_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut worst_box) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=MAX_SPACE_DIM);
        let p = rng.gen_range(1.1..4.0);
        let l = rng.gen_range(0.01..10.0f64);
        let gamma = rng.gen_range(0.0..1.0);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let r = ParabolicRectangle::new(Point::new(&xs, rng.gen_range(-5.0..5.0)).unwrap(), l, p).unwrap();
        let expected = 2f64.powi(n as i32) * (1.0 - gamma) * l.powf(n as f64 + p);
        worst = worst.max(rel(r.part_volume(gamma), expected));
        // Box extents come from differences of absolute coordinates, so
        // their error scales with |center| / extent.
        let cond = 1.0 + r.center.coord(n).abs() / ((1.0 - gamma) * l.powf(p)) + r.center.sup_norm_space() / l;
        for b in [upper_part(&r, gamma).unwrap(), lower_part(&r, gamma).unwrap()] {
            worst_box = worst_box.max(rel(b.volume(), expected) / cond);
        }
    }
    outcome(
        worst <= 1e-12 && worst_box <= 1e-12,
        format!("max relative error {worst:.2e}, box volumes {worst_box:.2e} after conditioning, over 1000 rectangles"),
    )
}

/// Cells whose centers lie in `[lo, hi)` on every axis, with the same
/// rounding slack as the grid.
fn oracle_cells(spec: &GridSpec, b: &Box) -> Vec<usize> {
    (0..spec.cell_count())
        .filter(|&c| {
            let z = spec.center_of_flat(c);
            (0..spec.axes()).all(|k| {
                let eps = 1e-9 * spec.spacing(k);
                z.coord(k) >= b.lo.coord(k) - eps && z.coord(k) < b.hi.coord(k) - eps
            })
        })
        .collect()
}

fn oracle_in_window(spec: &GridSpec, r: &ParabolicRectangle) -> bool {
    let w = spec.window();
    let b = r.full_box();
    (0..spec.axes()).all(|k| {
        let eps = 1e-9 * spec.spacing(k);
        b.lo.coord(k) >= w.lo.coord(k) - eps && b.hi.coord(k) <= w.hi.coord(k) + eps
    })
}

/// Every cube of whole cells with temporal centers on the half-cell lattice.
fn oracle_rectangles(spec: &GridSpec, p: f64) -> Vec<ParabolicRectangle> {
    let (nx, nt) = (spec.shape()[0], spec.nt());
    let mut out = Vec::new();
    for w in 1..=nx {
        for i in 0..=nx - w {
            for j in 0..=2 * nt {
                let half = w as f64 * spec.h_x() / 2.0;
                let o = spec.origin();
                let c = pt(o.space()[0] + i as f64 * spec.h_x() + half, o.t() + j as f64 * spec.h_t() / 2.0);
                let r = ParabolicRectangle::new(c, half, p).unwrap();
                if oracle_in_window(spec, &r) {
                    out.push(r);
                }
            }
        }
    }
    out
}

fn oracle_mean(f: &SampledField, cells: &[usize]) -> f64 {
    cells.iter().map(|&c| f.values()[c]).sum::<f64>() / cells.len() as f64
}

fn oracle_equivalence() -> Outcome {
    let p = 2.0;
    let spec = grid(pt(0.0, 0.0), 8, 8, 1.0 / 8.0, 1.0 / 16.0);
    let rects = oracle_rectangles(&spec, p);
    let mut mismatches = Vec::new();
    let mut ta_err = 0.0f64;
    let mut compared = 0usize;
    for inst in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + inst);
        let gamma = [0.0, 0.25, 0.5][inst as usize % 3];
        let beta = [0.0, 0.25][inst as usize % 2];
        let dir = if inst % 4 == 3 { Direction::Backward } else { Direction::Forward };
        let f = SampledField::from_fn(&spec, |_| rng.gen_range(0..10) as f64);
        let parts = |r: &ParabolicRectangle| -> (Box, Box) {
            let (up, lo) = (upper_part(r, gamma).unwrap(), lower_part(r, gamma).unwrap());
            match dir {
                Direction::Forward => (up, lo),
                Direction::Backward => (lo, up),
            }
        };

        // Box averages.
        let table = build_prefix(&f);
        for r in &rects {
            for b in [upper_part(r, gamma).unwrap(), lower_part(r, gamma).unwrap()] {
                let cells = oracle_cells(&spec, &b);
                if cells.is_empty() {
                    continue;
                }
                compared += 1;
                if box_average(&table, &b).unwrap() != oracle_mean(&f, &cells) {
                    mismatches.push(format!("average instance {inst}"));
                }
            }
        }

        // Maximal functions. The oracle evaluates the forward definition by
        // brute force; backward values are its time reflection.
        let (g, gspec) = match dir {
            Direction::Forward => (f.clone(), spec.clone()),
            Direction::Backward => (f.reflect_time(), f.reflect_time().spec().clone()),
        };
        let unreflect = |v: Vec<f64>| -> Vec<f64> {
            match dir {
                Direction::Forward => v,
                Direction::Backward => v.chunks(gspec.nt()).flat_map(|row| row.iter().rev().copied()).collect(),
            }
        };

        let cfg = MaximalConfig::uncentered(gamma, beta, FamilyRule::Exhaustive).with_direction(dir);
        let got = maximal(&f, p, &cfg).unwrap();
        let mut want = vec![0.0f64; gspec.cell_count()];
        for r in &oracle_rectangles(&gspec, p) {
            let avg_cells = oracle_cells(&gspec, &upper_part(r, gamma).unwrap());
            if avg_cells.is_empty() {
                continue;
            }
            let scale = if beta == 0.0 { 1.0 } else { r.part_volume(gamma).powf(beta) };
            let v = scale * oracle_mean(&g, &avg_cells);
            for c in oracle_cells(&gspec, &lower_part(r, gamma).unwrap()) {
                want[c] = want[c].max(v);
            }
        }
        compared += spec.cell_count();
        if got.values() != unreflect(want).as_slice() {
            mismatches.push(format!("uncentered instance {inst}"));
        }

        let ladder: Vec<f64> = (1..=4).map(|k| k as f64 / 8.0).collect();
        let cfg = MaximalConfig::centered(gamma, beta, Ladder::Values { values: ladder.clone() }).with_direction(dir);
        let got = maximal(&f, p, &cfg).unwrap();
        let want: Vec<f64> = (0..gspec.cell_count())
            .map(|c| {
                let mut best = 0.0f64;
                for &l in &ladder {
                    let r = ParabolicRectangle::new(gspec.center_of_flat(c), l, p).unwrap();
                    if !oracle_in_window(&gspec, &r) {
                        continue;
                    }
                    let cells = oracle_cells(&gspec, &upper_part(&r, gamma).unwrap());
                    if cells.is_empty() {
                        continue;
                    }
                    let scale = if beta == 0.0 { 1.0 } else { r.part_volume(gamma).powf(beta) };
                    best = best.max(scale * oracle_mean(&g, &cells));
                }
                best
            })
            .collect();
        compared += spec.cell_count();
        if got.values() != unreflect(want).as_slice() {
            mismatches.push(format!("centered instance {inst}"));
        }

        // Weight constants.
        let (r_exp, q_exp) = [(1.0, 2.0), (2.0, 4.0), (1.5, 3.0)][inst as usize % 3];
        let u = SampledField::from_fn(&spec, |_| rng.gen_range(1..10) as f64);
        let v = SampledField::from_fn(&spec, |_| rng.gen_range(1..10) as f64);
        let est = ta_constant(
            &WeightSpec::Grid(u.clone()),
            &WeightSpec::Grid(v.clone()),
            r_exp,
            q_exp,
            gamma,
            dir,
            &RectangleFamily::exhaustive(),
            &spec,
            p,
        )
        .unwrap();
        let mut sup = f64::NEG_INFINITY;
        for r in &rects {
            let (fut, past) = parts(r);
            let (fc, pc) = (oracle_cells(&spec, &fut), oracle_cells(&spec, &past));
            if fc.is_empty() || pc.is_empty() {
                continue;
            }
            let ua = pc.iter().map(|&c| u.values()[c].powf(q_exp)).sum::<f64>() / pc.len() as f64;
            let vf = if r_exp == 1.0 {
                fc.iter().map(|&c| v.values()[c]).fold(f64::INFINITY, f64::min).powf(-q_exp)
            } else {
                let rp = r_exp / (r_exp - 1.0);
                (fc.iter().map(|&c| v.values()[c].powf(-rp)).sum::<f64>() / fc.len() as f64).powf(q_exp / rp)
            };
            sup = sup.max(ua * vf);
        }
        compared += 1;
        ta_err = ta_err.max(rel(est.value, sup));
    }
    let pass = mismatches.is_empty() && ta_err <= 1e-12;
    outcome(
        pass,
        format!(
            "{compared} comparisons over 50 instances, {} exact mismatches, weight-constant relative error {ta_err:.2e}",
            mismatches.len()
        ),
    )
}

fn constant_pair_identity() -> Outcome {
    let spec = grid(pt(0.0, 0.0), 16, 32, 1.0 / 16.0, 1.0 / 32.0);
    let mut worst = 0.0f64;
    for r in [1.0, 1.5, 2.0] {
        for q in [2.0, 3.0, 4.0] {
            for gamma in [0.0, 0.25, 0.5] {
                let v = ta_constant(
                    &WeightSpec::one(),
                    &WeightSpec::one(),
                    r,
                    q,
                    gamma,
                    Direction::Forward,
                    &RectangleFamily::exhaustive(),
                    &spec,
                    2.0,
                )
                .unwrap()
                .value;
                worst = worst.max((v - 1.0).abs());
            }
        }
    }
    outcome(worst <= 1e-12, format!("max |value − 1| = {worst:.2e} over 27 parameter triples"))
}

fn random_positive(spec: &GridSpec, rng: &mut ChaCha8Rng) -> SampledField {
    let scale = rng.gen_range(-2.0..2.0f64).exp();
    SampledField::from_fn(spec, |_| scale * rng.gen_range(-1.5..1.5f64).exp())
}

fn random_rectangles(spec: &GridSpec, p: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<ParabolicRectangle> {
    let w = spec.window();
    let mut out = Vec::new();
    while out.len() < count {
        let l = rng.gen_range(1.5 * spec.h_x()..0.25);
        let c = pt(rng.gen_range(w.lo.coord(0)..w.hi.coord(0)), rng.gen_range(w.lo.t()..w.hi.t()));
        let r = ParabolicRectangle::new(c, l, p).unwrap();
        if parabolic_lag::family::admissible(spec, &r, 0.5).unwrap() {
            out.push(r);
        }
    }
    out
}

fn duality_power_law() -> Outcome {
    let spec = grid(pt(0.0, 0.0), 32, 32, 1.0 / 32.0, 1.0 / 32.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    for pair in 0..50 {
        let (u, v) = (random_positive(&spec, &mut rng), random_positive(&spec, &mut rng));
        let rects = random_rectangles(&spec, 2.0, 50, &mut rng);
        let (r, q) = [(2.0, 2.0), (1.5, 3.0), (3.0, 4.0)][pair % 3];
        let rep = check_duality(&u, &v, r, q, 0.5, &rects, 1e-10).unwrap();
        let err = rep.details["max_relative_error"].as_f64().unwrap();
        worst = worst.max(err);
        failures += usize::from(!rep.pass);
    }
    outcome(failures == 0, format!("max relative error {worst:.2e} over 50 pairs × 50 rectangles"))
}

/// Integer half-edges, node centers, `h_t = 1/4`: every `γ ∈ {0, 1/4, 1/2}`
/// part snaps to exactly its continuum cell count.
fn aligned_family(spec: &GridSpec, p: f64) -> Vec<ParabolicRectangle> {
    let mut out = Vec::new();
    for l in 1..=3usize {
        for i in l..=spec.shape()[0] - l {
            for k in (0..=spec.nt()).step_by(2) {
                let r = ParabolicRectangle::new(pt(i as f64, k as f64 * spec.h_t()), l as f64, p).unwrap();
                if parabolic_lag::family::in_window(spec, &r) {
                    out.push(r);
                }
            }
        }
    }
    out
}

fn lag_factor() -> Outcome {
    let spec = grid(pt(0.0, 0.0), 8, 80, 1.0, 0.25);
    let rects = aligned_family(&spec, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let weights: Vec<(SampledField, SampledField)> = std::iter::once((SampledField::constant(&spec, 1.0), SampledField::constant(&spec, 1.0)))
        .chain((0..3).map(|_| (random_positive(&spec, &mut rng), random_positive(&spec, &mut rng))))
        .collect();
    let (mut runs, mut violations, mut worst) = (0, 0u64, 0.0f64);
    for (u, v) in &weights {
        for r in [1.0, 1.5, 2.0] {
            for q in [2.0, 3.0, 4.0] {
                for (g1, g2) in [(0.0, 0.25), (0.0, 0.5), (0.25, 0.5)] {
                    let rep = check_lag_monotonicity(u, v, r, q, g1, g2, &rects).unwrap();
                    runs += 1;
                    violations += rep.details["violations"].as_u64().unwrap();
                    worst = worst.max(rep.details["max_ratio"].as_f64().unwrap());
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!("{runs} runs on {} rectangles, {violations} violations, max ratio to bound {worst:.6}", rects.len()),
    )
}

fn pointwise_control() -> Outcome {
    let spec = grid(pt(0.0, 0.0), 32, 64, 1.0, 0.125);
    let support = Box::new(pt(0.0, 0.0), pt(32.0, 8.0)).unwrap();
    let (mut violations, mut worst_margin, mut worst_ratio) = (0u64, f64::INFINITY, 0.0f64);
    for seed in 0..100u64 {
        let field = if seed % 2 == 0 {
            FieldSpec::RandomBumps { seed, count: 4, support, width_range: [0.1, 0.5] }
        } else {
            FieldSpec::Noise { seed, density: 0.3, support }
        };
        let f = field.sample(&spec).unwrap();
        let rep = check_pointwise_control(&f, 2.0, 0.5, 0.25, &[0.5, 1.5], 0.05).unwrap();
        violations += rep.details["violations"].as_u64().unwrap();
        worst_margin = worst_margin.min(rep.margin);
        worst_ratio = worst_ratio.max(rep.details["max_ratio"].as_f64().unwrap());
    }
    outcome(
        violations == 0,
        format!("{violations} cellwise violations over 100 fields, max ratio to C·I {worst_ratio:.4}, min margin {worst_margin:.3e}"),
    )
}

fn welland() -> Outcome {
    let (p, gamma, beta, eps) = (2.0, 0.5, 0.5, 0.25);
    let c = welland_constant(1, p, gamma, beta, eps);
    let support = Box::new(pt(0.1, 0.1), pt(0.9, 0.9)).unwrap();
    let grids: Vec<GridSpec> = [32usize, 64]
        .iter()
        .map(|&m| grid(pt(0.0, 0.0), m, m, 1.0 / m as f64, 1.0 / m as f64))
        .collect();
    let (mut max_ratio, mut max_drift, mut over) = (0.0f64, 0.0f64, 0);
    for seed in 0..50u64 {
        let field = FieldSpec::RandomBumps { seed, count: 3, support, width_range: [0.25, 0.5] };
        let ratios: Vec<f64> = grids
            .iter()
            .map(|g| {
                let f = field.sample(g).unwrap();
                let rep = check_welland(&f, p, gamma, beta, eps, &welland_ladder(g, p)).unwrap();
                over += usize::from(!rep.pass);
                rep.details["max_ratio"].as_f64().unwrap()
            })
            .collect();
        max_ratio = max_ratio.max(ratios[0]).max(ratios[1]);
        max_drift = max_drift.max((ratios[1] - ratios[0]).abs() / ratios[0]);
    }
    outcome(
        over == 0 && max_drift <= 0.2,
        format!("max ratio {max_ratio:.4} vs constant {c:.4}, max 32→64 drift {:.2}%", 100.0 * max_drift),
    )
}

fn chains() -> Outcome {
    let c1 = chain_length_bound(2.0, 0.25, 0.5, 1.0);
    let base = ParabolicRectangle::new(pt(0.0, 0.0), 1.0, 2.0).unwrap();
    let rep = check_chains(0.25, 0.5, 1.0, base, 100, 8).unwrap();
    let d = &rep.details;
    outcome(
        rep.pass && c1.round() == 165888.0,
        format!(
            "C1 = {c1}, overlap ratios in [{:.4}, {:.4}], max length {} (3C1 = {}), failures {}",
            d["min_overlap"].as_f64().unwrap(),
            d["max_overlap"].as_f64().unwrap(),
            d["max_length"],
            3.0 * c1,
            d["failures"].as_array().unwrap().len()
        ),
    )
}

fn selection() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for (seed, extent) in (0..5u64).zip([1.0, 2.0, 4.0, 8.0, 16.0]) {
        let rep = check_selection(1, 2.0, 0.5, 200, extent, 90 + seed, 512).unwrap();
        pass &= rep.pass;
        let d = &rep.details;
        lines.push(format!(
            "extent {extent}: {} selected, {} band pairs, {} uncovered, overlap {}/{}, idempotent {}",
            d["selected"],
            d["band_violations"].as_array().unwrap().len(),
            d["uncovered_points"].as_array().unwrap().len(),
            d["max_overlap"],
            d["overlap_bound"],
            d["idempotent"]
        ));
    }
    outcome(pass, lines.join("; "))
}

fn scaling_covariance() -> Outcome {
    let (p, gamma, beta, lambda) = (2.0, 0.5, 0.25, 2.0);
    let spec = grid(pt(0.0, 0.0), 16, 16, 1.0 / 16.0, 1.0 / 32.0);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let f = SampledField::from_fn(&spec, |_| rng.gen::<f64>());
    // f_λ(z) = f(λz): the same values on the grid shrunk by λ.
    let f_lambda = f.rescaled(1.0 / lambda, p);
    let factor = lambda.powf(-(1.0 + p) * beta);
    let mut max_err = 0.0f64;
    for cfg in [
        MaximalConfig::uncentered(gamma, beta, FamilyRule::Exhaustive),
        MaximalConfig::centered(gamma, beta, Ladder::Multiples { step: None, count: 4 }),
    ] {
        let (a, b) = (maximal(&f_lambda, p, &cfg).unwrap(), maximal(&f, p, &cfg).unwrap());
        for (x, y) in a.values().iter().zip(b.values()) {
            max_err = max_err.max(rel(*x, factor * y));
        }
    }

    // Integral: f on G and f_λ on G/λ, each sampled from the closed form.
    let spec = grid(pt(0.0, 0.0), 64, 64, 1.0 / 16.0, 1.0 / 64.0);
    let bump = FieldSpec::bump(pt(2.0, 0.5), &[1.0, 0.25], 1.0);
    let cfg = IntegralConfig::new(gamma, 0.5);
    let i_f = fractional_integral(&bump.sample(&spec).unwrap(), p, &cfg).unwrap();
    let fine = spec.scaled(1.0 / lambda, p);
    let i_fl = fractional_integral(&sample_rescaled(&bump, &fine, lambda, p).unwrap(), p, &cfg).unwrap();
    let factor = lambda.powf(-(1.0 + p) * 0.5);
    let mut int_err = 0.0f64;
    for (x, y) in i_fl.values().iter().zip(i_f.values()) {
        int_err = int_err.max(rel(*x, factor * y));
    }
    outcome(
        max_err <= 1e-10 && int_err <= 0.02,
        format!("maximal max relative error {max_err:.2e}, integral max relative error {:.2}%", 100.0 * int_err),
    )
}

fn kernel_equivalence() -> Outcome {
    let kp = KernelParams::new(1, 2.0, 2.0).unwrap();
    let rep = check_kernel_equivalence(0.5, &kp, 10_000, 11).unwrap();
    let d = &rep.details;
    outcome(
        rep.pass,
        format!(
            "ratio in [{:.4e}, {:.4e}], homogeneity defect {:.2e}",
            d["min_ratio"].as_f64().unwrap(),
            d["max_ratio"].as_f64().unwrap(),
            d["homogeneity_defect"].as_f64().unwrap()
        ),
    )
}

fn heat_apriori() -> Outcome {
    let mut study = HeatStudy {
        x_max: 4.0,
        t_max: 4.0,
        resolutions: vec![[64, 256], [128, 512]],
        source: FieldSpec::bump(pt(0.0, 1.0), &[1.0, 0.5], 1.0),
        weight: WeightSpec::one(),
        r: 1.2,
        q: 6.0,
        lambdas: vec![1.0, 2.0, 4.0],
        max_drift: 0.2,
        max_spread: 2.0,
    };
    let mut pass = true;
    let mut lines = Vec::new();
    for (label, w) in [
        ("w=1", WeightSpec::one()),
        (
            "w=|x|^0.1 e^-t",
            WeightSpec::product(WeightSpec::SpatialPower { a: 0.1 }, WeightSpec::OneSidedExponential { lambda: -1.0 }),
        ),
    ] {
        study.weight = w;
        let rep = check_heat_apriori(&study).unwrap();
        pass &= rep.pass;
        let d = &rep.details;
        lines.push(format!(
            "{label}: drift {:.2}%, spread {:.3}, residual {:.1e}",
            100.0 * d["drift"].as_f64().unwrap(),
            d["spread"].as_f64().unwrap(),
            d["max_residual"].as_f64().unwrap()
        ));
    }
    outcome(pass, lines.join("; "))
}

fn reproducibility() -> Outcome {
    let dir = env!("CARGO_MANIFEST_DIR");
    let path = format!("{dir}/../cli/configs/pointwise_control.cfg");
    let cfg = ExperimentConfig::load(&path).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_config(&cfg, &a, 1).unwrap();
    run_config(&cfg, &b, 2).unwrap();
    let mut files: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    let identical = files
        .iter()
        .all(|name| std::fs::read(a.join(name)).unwrap() == std::fs::read(b.join(name)).unwrap());
    let golden = std::fs::read(format!("{dir}/../cli/configs/pointwise_control.golden.csv")).unwrap();
    let matches_golden = std::fs::read(a.join("summary.csv")).unwrap() == golden;
    outcome(
        identical && matches_golden && !files.is_empty(),
        format!("{} files bit-identical across runs: {identical}; summary matches golden: {matches_golden}", files.len()),
    )
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 13] = [
        ("geometry exactness", Duration::from_secs(1), geometry_exactness),
        ("oracle equivalence", Duration::from_secs(60), oracle_equivalence),
        ("constant-pair identity", Duration::MAX, constant_pair_identity),
        ("duality power law", Duration::MAX, duality_power_law),
        ("lag factor", Duration::MAX, lag_factor),
        ("pointwise control", Duration::from_secs(300), pointwise_control),
        ("welland constant", Duration::MAX, welland),
        ("chain certificates", Duration::from_secs(120), chains),
        ("selection certificates", Duration::MAX, selection),
        ("scaling covariance", Duration::MAX, scaling_covariance),
        ("kernel equivalence", Duration::MAX, kernel_equivalence),
        ("heat a-priori estimate", Duration::from_secs(300), heat_apriori),
        ("reproducibility", Duration::MAX, reproducibility),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) if elapsed > *limit => (false, format!("{} (over the {:?} limit)", o.detail, limit)),
            Ok(o) => (o.pass, o.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {:2} {:<24} {} [{:.2}s] {}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
