//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every reference value is computed here, independently of the library
//! routine under test.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use fracg::funcspace::{
    luxemburg_norm, orlicz_modular, tail, Ball, ExteriorModel, GridFunction, Kernel, Lattice, Point, Region,
};
use fracg::regularity::{certified_threshold, de_giorgi_iterate, Checker, Cutoff, Sign};
use fracg::solver::{NonlocalProblem, ProblemSpec, SolveOptions};
use fracg::NFunction;
use fracg_cli::corpus::{CorpusFamily, CorpusSpec, LatticeSpec};
use fracg_cli::generate_corpus;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn lib<T>(r: fracg::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// `a <= b` up to a relative slack `tol`.
fn le(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol * a.abs().max(b.abs())
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn p3(x: &[f64]) -> Point {
    let mut p = [0.0; 3];
    p[..x.len()].copy_from_slice(x);
    p
}

fn segment(lo: f64, hi: f64) -> Region {
    Region::Box { lo: p3(&[lo]), hi: p3(&[hi]) }
}

// ---------------------------------------------------------------------------
// 1. linear oracle

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let pivot = a[col].clone();
            for (x, p) in a[row].iter_mut().zip(&pivot).skip(col) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

/// Stationarity system of the quadratic energy on `[0, 1]` with nodes
/// `k h`, written out from the pair sum and the far-field integral.
fn linear_system(h: f64, nodes: usize, s: f64, r_ext: f64, datum: impl Fn(f64) -> f64, m: f64) -> Vec<f64> {
    let reach = (r_ext / h).floor() as i64;
    let far = 2.0 * h / (s * r_ext.powf(2.0 * s));
    let interior = 0..nodes as i64;
    let mut a = vec![vec![0.0; nodes]; nodes];
    let mut b = vec![0.0; nodes];
    for i in interior.clone() {
        let ia = i as usize;
        for k in -reach..nodes as i64 + reach {
            let d = ((i - k).abs() as f64) * h;
            if k == i || d > r_ext {
                continue;
            }
            let w = 2.0 * h * h * d.powf(-1.0 - 2.0 * s);
            a[ia][ia] += w;
            if interior.contains(&k) {
                a[ia][k as usize] -= w;
            } else {
                b[ia] += w * datum(k as f64 * h);
            }
        }
        a[ia][ia] += far;
        b[ia] += far * m;
    }
    gauss(a, b)
}

fn linear_oracle() -> Verdict {
    let start = Instant::now();
    let (nodes, r_ext, m) = (32, 1.5, 0.4);
    let h = 1.0 / (nodes - 1) as f64;
    let datum = |x: f64| (3.0 * x).cos() + 0.5 * x;
    let mut worst = 0.0_f64;
    for s in [0.3, 0.5, 0.7] {
        let prob = lib(NonlocalProblem::new(ProblemSpec {
            dim: 1,
            h,
            omega: segment(0.0, 1.0),
            s,
            nf: lib(NFunction::power(2.0))?,
            kernel: Kernel::Pure,
            exterior: ExteriorModel::Constant { value: m },
            data: Some(Arc::new(move |x: &Point| datum(x[0]))),
            truncation_radius: Some(r_ext),
        }))?;
        ensure!(prob.omega().len() == nodes, "{} interior nodes", prob.omega().len());
        let u = lib(prob.solve(&SolveOptions::default()))?.minimizer;
        let exact = linear_system(h, nodes, s, r_ext, datum, m);
        let err = prob.omega().iter().zip(&exact).map(|(&i, e)| (u.values[i] - e).abs()).fold(0.0, f64::max);
        ensure!(err <= 1e-8, "s = {s}: sup error {err:e}");
        worst = worst.max(err);
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(10), "took {took:?}");
    Ok(format!("sup error {worst:.2e} over s in {{0.3, 0.5, 0.7}}, {:.2}s", took.as_secs_f64()))
}

// ---------------------------------------------------------------------------
// 2. gradient against finite differences

fn random_problem(rng: &mut ChaCha8Rng, nf: &NFunction, two_d: bool) -> Result<NonlocalProblem, String> {
    let s = rng.random_range(0.2..0.8);
    let (dim, h, omega, extent) = if two_d {
        let h = rng.random_range(0.15..0.3);
        let (nx, ny) = (rng.random_range(2..=4), rng.random_range(2..=5));
        let hi = p3(&[(nx - 1) as f64 * h, (ny - 1) as f64 * h]);
        (2, h, Region::Box { lo: [0.0; 3], hi }, hi[0].max(hi[1]))
    } else {
        let h = rng.random_range(0.05..0.2);
        let nodes = rng.random_range(3..=20);
        let hi = (nodes - 1) as f64 * h;
        (1, h, segment(0.0, hi), hi)
    };
    let kernel = if rng.random_bool(0.5) { Kernel::Pure } else { lib(Kernel::cosine(1.0, 0.3, 0.7))? };
    let (a, f, phase) = (rng.random_range(0.2..2.0), rng.random_range(0.5..4.0), rng.random_range(0.0..2.0 * PI));
    let model = rng.random_range(-1.0..1.0);
    lib(NonlocalProblem::new(ProblemSpec {
        dim,
        h,
        omega,
        s,
        nf: nf.clone(),
        kernel,
        exterior: ExteriorModel::Constant { value: model },
        data: Some(Arc::new(move |x: &Point| model + a * (f * (x[0] - x[1]) + phase).sin())),
        truncation_radius: Some(extent.max(h) * rng.random_range(1.0..2.5)),
    }))
}

/// Largest relative deviation between the analytic gradient and a
/// fourth-order central difference of the energy.
fn gradient_error(prob: &NonlocalProblem, x: &[f64]) -> Result<f64, String> {
    let v = lib(prob.extend(x))?;
    let grad = lib(prob.gradient(&v))?;
    let scale = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
    let halo: Vec<f64> = (0..prob.lattice().len()).filter(|&i| !prob.is_interior(i)).map(|i| v.values[i]).collect();
    let mut worst = 0.0_f64;
    for a in 0..x.len() {
        let gap = x.iter().chain(&halo).filter(|&&y| y != x[a]).map(|y| (y - x[a]).abs()).fold(1.0, f64::min);
        let eps = (1e-4_f64).min(gap / 4.0);
        let shifted = |k: f64| -> Result<f64, String> {
            let mut w = x.to_vec();
            w[a] += k * eps;
            lib(prob.energy_delta(&v, &lib(prob.extend(&w))?))
        };
        let fd = (8.0 * (shifted(1.0)? - shifted(-1.0)?) - (shifted(2.0)? - shifted(-2.0)?)) / (12.0 * eps);
        worst = worst.max((fd - grad[a]).abs() / scale);
    }
    Ok(worst)
}

fn gradient_check() -> Verdict {
    let families = [
        ("t^1.5", lib(NFunction::power(2.5))?),
        ("t^2", lib(NFunction::power(3.0))?),
        ("t log(1+t)", lib(NFunction::power_log(2.0))?),
    ];
    let mut out = Vec::new();
    for (name, nf) in &families {
        let mut worst = 0.0_f64;
        for k in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + k);
            let prob = random_problem(&mut rng, nf, k % 2 == 1)?;
            ensure!(prob.omega().len() <= 20, "{} interior nodes", prob.omega().len());
            let x: Vec<f64> = (0..prob.omega().len()).map(|_| rng.random_range(-1.5..1.5)).collect();
            let err = gradient_error(&prob, &x)?;
            ensure!(err <= 1e-5, "g = {name}, instance {k}: relative error {err:e}");
            worst = worst.max(err);
        }
        out.push(format!("{name} {worst:.1e}"));
    }
    Ok(format!("max relative error: {}", out.join(", ")))
}

// ---------------------------------------------------------------------------
// 3. minimizers satisfy the weak form and beat every perturbation

fn smooth(x: &Point) -> f64 {
    (1.5 * x[0]).sin() * (-x[0] * x[0] / 8.0).exp() + 0.3
}

fn instance(dim: usize, h: f64, nf: NFunction, kernel: Kernel) -> Result<NonlocalProblem, String> {
    let omega = if dim == 1 { segment(-1.0, 1.0) } else { Region::Ball(lib(Ball::new(&[0.0, 0.0], 0.6))?) };
    lib(NonlocalProblem::new(ProblemSpec {
        dim,
        h,
        omega,
        s: 0.5,
        nf,
        kernel,
        exterior: ExteriorModel::Constant { value: 0.0 },
        data: Some(Arc::new(|x: &Point| if x[0] < 0.0 { 1.0 + x[1] } else { smooth(x) - 1.0 })),
        truncation_radius: Some(if dim == 1 { 4.0 } else { 1.5 }),
    }))
}

fn tolerance_for(nf: &NFunction) -> f64 {
    if nf.p() < 2.0 {
        1e-7
    } else {
        1e-9
    }
}

fn euler_lagrange() -> Verdict {
    let cases = [
        ("p=1.5", instance(1, 1.0 / 32.0, lib(NFunction::power(1.5))?, Kernel::Pure)?),
        (
            "p=2 cosine kernel",
            instance(1, 1.0 / 32.0, lib(NFunction::power(2.0))?, lib(Kernel::cosine(1.0, 0.4, 0.5))?)?,
        ),
        ("p=3", instance(1, 1.0 / 32.0, lib(NFunction::power(3.0))?, Kernel::Pure)?),
        ("t log(1+t)", instance(1, 1.0 / 16.0, lib(NFunction::power_log(2.0))?, Kernel::Pure)?),
        ("2-D p=2.5", instance(2, 0.1, lib(NFunction::power(2.5))?, Kernel::Pure)?),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut probes = 0;
    for (name, prob) in &cases {
        let rep = lib(prob.solve(&SolveOptions { tol: tolerance_for(prob.nfunction()), ..Default::default() }))?;
        let residual = lib(prob.weak_residual(&rep.minimizer))?;
        ensure!(rep.converged && residual <= rep.tolerance, "{name}: residual {residual:e} > {:e}", rep.tolerance);
        let x = prob.interior_values(&rep.minimizer);
        let (lo, hi) = prob.data_range();
        for k in 0..100 {
            let eps = log_uniform(&mut rng, 1e-3, 1e-1) * (hi - lo);
            let w: Vec<f64> = x.iter().map(|v| v + eps * rng.random_range(-1.0..1.0)).collect();
            let gain = lib(prob.energy_delta(&rep.minimizer, &lib(prob.extend(&w))?))?;
            ensure!(gain > 0.0, "{name}: probe {k} lowers the energy by {:e}", -gain);
            probes += 1;
        }
    }
    Ok(format!("{} minimizers within tolerance, {probes} probes, 0 violations", cases.len()))
}

// ---------------------------------------------------------------------------
// 4. N-function inequalities

/// `G` and `G*` of a family, written out by hand.
struct Reference {
    name: &'static str,
    nf: NFunction,
    p: f64,
    q: f64,
    big_g: Box<dyn Fn(f64) -> f64>,
    conj: Box<dyn Fn(f64) -> f64>,
}

fn power_reference(name: &'static str, p: f64) -> Result<Reference, String> {
    let pc = p / (p - 1.0);
    Ok(Reference {
        name,
        nf: lib(NFunction::power(p))?,
        p,
        q: p,
        big_g: Box::new(move |t| t.powf(p) / p),
        conj: Box::new(move |t| t.powf(pc) / pc),
    })
}

/// `G(t) = int_0^t u ln(1 + u) du`.
fn t_log_big_g(t: f64) -> f64 {
    if t < 0.5 {
        (1..80)
            .map(|k| {
                let k = k as f64;
                let sign = if k as u32 % 2 == 1 { 1.0 } else { -1.0 };
                sign * t.powf(k + 2.0) / (k * (k + 2.0))
            })
            .sum()
    } else {
        0.5 * (t * t - 1.0) * t.ln_1p() - 0.25 * t * t + 0.5 * t
    }
}

fn t_log_conj(y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let mut t = if y < 1.0 { y.sqrt() } else { y / y.ln_1p() };
    for _ in 0..100 {
        let f = t * t.ln_1p() - y;
        let df = t.ln_1p() + t / (1.0 + t);
        let next = (t - f / df).max(0.5 * t);
        if (next - t).abs() <= 1e-16 * t {
            break;
        }
        t = next;
    }
    y * t - t_log_big_g(t)
}

fn nfunction_suite() -> Verdict {
    let refs = [
        power_reference("p=1.5", 1.5)?,
        power_reference("p=2", 2.0)?,
        power_reference("p=3", 3.0)?,
        Reference {
            name: "t log(1+t)",
            nf: lib(NFunction::power_log(2.0))?,
            p: 2.0,
            q: 3.0,
            big_g: Box::new(t_log_big_g),
            conj: Box::new(t_log_conj),
        },
    ];
    let mut summary = Vec::new();
    for r in &refs {
        let tol = if r.nf.is_closed_form() { 1e-8 } else { 1e-6 };
        let nf = &r.nf;
        let (p, q) = (r.p, r.q);
        let (pc, qc) = (p / (p - 1.0), q / (q - 1.0));
        let (kappa, ell) = (2f64.powf(q), 2f64.powf(1.0 / (p - 1.0)));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut checks = 0usize;
        let mut fail = |what: &str, ok: bool, at: (f64, f64)| -> Result<(), String> {
            checks += 1;
            ensure!(ok, "{}: {what} fails at {at:?}", r.name);
            Ok(())
        };
        for _ in 0..10_000 {
            let t = log_uniform(&mut rng, 1e-3, 1e3);
            let s = log_uniform(&mut rng, 1e-3, 1e3);
            let a = log_uniform(&mut rng, 1e-2, 1e2);
            let eps: f64 = rng.random_range(1e-3..1.0);
            let (gt, gs_conj) = (lib(nf.eval(t))?, lib(nf.conjugate(s))?);
            fail("G", rel(gt, (r.big_g)(t)) <= tol, (t, s))?;
            fail("G*", rel(gs_conj, (r.conj)(s)) <= tol, (t, s))?;
            let ratio = t * lib(nf.deriv(t))? / gt;
            fail("growth sandwich", le(p, ratio, tol) && le(ratio, q, tol), (t, s))?;
            let (g_at, c_t, c_at) = (lib(nf.eval(a * t))?, lib(nf.conjugate(t))?, lib(nf.conjugate(a * t))?);
            let (lo, hi, clo, chi) = if a < 1.0 { (q, p, pc, qc) } else { (p, q, qc, pc) };
            fail("G scaling", le(a.powf(lo) * gt, g_at, tol) && le(g_at, a.powf(hi) * gt, tol), (a, t))?;
            fail("G* scaling", le(a.powf(clo) * c_t, c_at, tol) && le(c_at, a.powf(chi) * c_t, tol), (a, t))?;
            fail("Delta_2", le(lib(nf.eval(2.0 * t))?, kappa * gt, tol), (t, s))?;
            fail("nabla_2", le(gt, lib(nf.eval(ell * t))? / (2.0 * ell), tol), (t, s))?;
            fail("Young", le(t * s, gt + gs_conj, tol), (t, s))?;
            fail("Young eps", le(t * s, eps.powf(1.0 - q) * gt + eps * gs_conj, tol), (t, eps))?;
            let g = lib(nf.deriv(t))?;
            let conj_g = lib(nf.conjugate(g))?;
            fail("conjugate identity", rel(conj_g, t * g - gt) <= tol, (t, g))?;
            fail("conjugate bound", le(conj_g, (q - 1.0) * gt, tol), (t, g))?;
            let (gs, gsum) = (lib(nf.eval(s))?, lib(nf.eval(t + s))?);
            fail(
                "sum sandwich",
                le(0.5 * (gt + gs), gsum, tol) && le(gsum, 2f64.powf(q - 1.0) * (gt + gs), tol),
                (t, s),
            )?;
        }
        summary.push(format!("{} {checks}", r.name));
    }
    Ok(format!("checks per family at 1e4 samples, 0 violations: {}", summary.join(", ")))
}

// ---------------------------------------------------------------------------
// 5. tail closed form

fn tail_check() -> Verdict {
    let (m, radius) = (1.7_f64, 0.5_f64);
    let mut worst = (0.0_f64, 0.0_f64);
    for n in [1usize, 2] {
        let omega = if n == 1 { 2.0 } else { 2.0 * PI };
        let lat = if n == 1 {
            lib(Lattice::new(1, 0.1, &[-20], &[41]))?
        } else {
            lib(Lattice::new(2, 0.1, &[-15, -15], &[31, 31]))?
        };
        let x0 = p3(&vec![0.05; n]);
        let model = ExteriorModel::Constant { value: m };
        let flat = lib(GridFunction::from_model(lat.clone(), model.clone()))?;
        let bump =
            lib(GridFunction::from_fn(lat.clone(), model, |x| m + 0.5 * (2.0 * x[0]).cos() * (-x[1] * x[1]).exp()))?;
        for p in [1.5, 2.0, 3.0] {
            let nf = lib(NFunction::power(p))?;
            for s in [0.3, 0.7] {
                let sp = s * p;
                let analytic = omega * m.powf(p - 1.0) * radius.powf(-sp) / sp;
                let t = lib(tail(&flat, &x0, radius, s, &nf))?;
                let e = rel(t, analytic);
                ensure!(e <= 1e-6, "n = {n}, p = {p}, s = {s}: tail {t} vs {analytic}");
                worst.0 = worst.0.max(e);

                let mut integral = analytic;
                for i in 0..lat.len() {
                    let x = lat.coords(i);
                    let d = (0..n).map(|k| (x[k] - x0[k]).powi(2)).sum::<f64>().sqrt();
                    if d > radius {
                        let diff = bump.values[i].abs().powf(p - 1.0) - m.powf(p - 1.0);
                        integral += lat.cell_volume() * diff * d.powf(-(n as f64) - sp);
                    }
                }
                let classical = (radius.powf(sp) * integral).powf(1.0 / (p - 1.0));
                let t = lib(tail(&bump, &x0, radius, s, &nf))?;
                let reduced = radius.powf(s) * lib(nf.inv_deriv(radius.powf(s) * t))?;
                let e = rel(reduced, classical);
                ensure!(e <= 1e-6, "n = {n}, p = {p}, s = {s}: power-law reduction {reduced} vs {classical}");
                worst.1 = worst.1.max(e);
            }
        }
    }
    Ok(format!("closed form {:.1e}, power-law reduction {:.1e}", worst.0, worst.1))
}

// ---------------------------------------------------------------------------
// 6. Luxemburg norm

fn corpus_specs() -> Vec<CorpusSpec> {
    let line = LatticeSpec { dim: 1, h: 1.0 / 32.0, lo: vec![-1.0], hi: vec![1.0] };
    let plane = LatticeSpec { dim: 2, h: 0.125, lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0] };
    vec![
        CorpusSpec {
            family: CorpusFamily::RandomSmooth { modes: 5, amplitude: 2.0 },
            count: 20,
            lattice: line.clone(),
        },
        CorpusSpec {
            family: CorpusFamily::RandomSmooth { modes: 3, amplitude: 0.5 },
            count: 20,
            lattice: plane.clone(),
        },
        CorpusSpec { family: CorpusFamily::PowerCusp { center: vec![0.1], gamma: None }, count: 20, lattice: line },
        CorpusSpec { family: CorpusFamily::TwoLevel { low: -0.5, high: 3.0 }, count: 20, lattice: plane },
    ]
}

fn luxemburg_check() -> Verdict {
    let families = [lib(NFunction::power(1.5))?, lib(NFunction::power(3.0))?, lib(NFunction::power_log(2.0))?];
    let mut functions = 0;
    let mut worst_unit = 0.0_f64;
    let mut worst_closed = 0.0_f64;
    for (k, spec) in corpus_specs().iter().enumerate() {
        let corpus = generate_corpus(spec, 60 + k as u64).map_err(|e| e.to_string())?;
        for f in &corpus {
            let lat = &f.lattice;
            let region = Region::Box { lo: lat.coords(0), hi: lat.coords(lat.len() - 1) };
            for nf in &families {
                let norm = lib(luxemburg_norm(f, &region, nf))?;
                ensure!(norm > 0.0, "zero norm of a nonzero function");
                let unit = lib(orlicz_modular(f, &region, nf, norm))?;
                ensure!((unit - 1.0).abs() <= 1e-8, "modular at the norm is {unit}");
                worst_unit = worst_unit.max((unit - 1.0).abs());
                let m1 = lib(orlicz_modular(f, &region, nf, 1.0))?;
                ensure!(norm <= m1 + 1.0, "norm {norm} exceeds modular + 1 = {}", m1 + 1.0);
                if nf.is_closed_form() {
                    let p = nf.p();
                    let mass: f64 = f.values.iter().map(|v| v.abs().powf(p) / p).sum::<f64>() * lat.cell_volume();
                    let e = rel(norm, mass.powf(1.0 / p));
                    ensure!(e <= 1e-8, "power norm {norm} vs closed form {}", mass.powf(1.0 / p));
                    worst_closed = worst_closed.max(e);
                }
            }
            functions += 1;
        }
    }
    Ok(format!(
        "{functions} corpus functions x 3 families, |modular - 1| <= {worst_unit:.1e}, closed-form norm {worst_closed:.1e}"
    ))
}

// ---------------------------------------------------------------------------
// 7. De Giorgi iteration

fn de_giorgi_check() -> Verdict {
    let dyadic = lib(de_giorgi_iterate(1.0, 2.0, 1.0, 0.5, 40))?;
    ensure!(dyadic.sequence.len() == 41, "{} terms", dyadic.sequence.len());
    let mut a = 0.5_f64;
    for (i, &x) in dyadic.sequence.iter().enumerate() {
        ensure!(x == (-(i as f64) - 1.0).exp2() && x == a, "A_{i} = {x}");
        a = 2f64.powi(i as i32) * a * a;
    }
    let mut steps = 0;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = log_uniform(&mut rng, 0.05, 20.0);
        let b: f64 = rng.random_range(1.01..8.0);
        let beta: f64 = rng.random_range(0.1..2.0);
        let threshold = c.powf(-1.0 / beta) * b.powf(-1.0 / (beta * beta));
        let a0 = certified_threshold(c, b, beta);
        ensure!(rel(a0, threshold) <= 1e-10, "seed {seed}: start {a0} vs threshold {threshold}");
        let rep = lib(de_giorgi_iterate(c, b, beta, a0, 40))?;
        ensure!(rep.violations.is_empty() && rep.horizon.is_none(), "seed {seed}: {:?}", rep.violations);
        let bound = |i: usize| b.powf(-(i as f64) / beta) * a0;
        for (i, &x) in rep.sequence.iter().enumerate() {
            ensure!(le(x, bound(i), 1e-12), "seed {seed}: library A_{i} = {x:e} > {:e}", bound(i));
        }
        let mut a = a0;
        for i in 0..=40 {
            if a < f64::MIN_POSITIVE {
                break;
            }
            ensure!(le(a, bound(i), 1e-12), "seed {seed}: A_{i} = {a:e} > {:e}", bound(i));
            a = c * b.powi(i as i32) * a.powf(beta) * a;
            steps += 1;
        }
    }
    Ok(format!("dyadic case exact through i = 40; 1000 seeds, {steps} steps, 0 violations"))
}

// ---------------------------------------------------------------------------
// 8. Hölder exponent

fn solved(p: f64, h: f64) -> Result<(NonlocalProblem, GridFunction), String> {
    let prob = lib(NonlocalProblem::new(ProblemSpec {
        dim: 1,
        h,
        omega: segment(-1.0, 1.0),
        s: 0.5,
        nf: lib(NFunction::power(p))?,
        kernel: Kernel::Pure,
        exterior: ExteriorModel::Constant { value: 0.0 },
        data: Some(Arc::new(|x: &Point| if x[0] < 0.0 { 1.0 } else { -1.0 })),
        truncation_radius: Some(6.0),
    }))?;
    let tol = if p < 2.0 { 1e-7 } else { 1e-9 };
    let u = lib(prob.solve(&SolveOptions { tol, ..Default::default() }))?.minimizer;
    Ok((prob, u))
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn holder_check() -> Verdict {
    let h = 1.0 / 1024.0;
    let lat = lib(Lattice::new(1, h, &[-1024], &[2049]))?;
    let nf = lib(NFunction::power(2.0))?;
    let mut fits = Vec::new();
    for gamma in [0.25, 0.5, 0.75] {
        let u = lib(GridFunction::from_fn(lat.clone(), ExteriorModel::Zero, |x| x[0].abs().powf(gamma)))?;
        let fit = lib(lib(Checker::on_lattice(&u, 0.5, &nf))?.holder_decay_fit(&[0.0; 3], 0.25, 0.5, 8, None))?;
        ensure!(fit.radii.len() >= 5, "gamma = {gamma}: {} levels", fit.radii.len());
        let pts: Vec<(f64, f64)> = fit
            .radii
            .iter()
            .map(|&r| {
                let vals = (0..lat.len()).filter(|&i| lat.coords(i)[0].abs() <= r + 1e-12).map(|i| u.values[i]);
                let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                (r.ln(), (hi - lo).ln())
            })
            .collect();
        let own = slope(&pts);
        let alpha = fit.alpha_hat.ok_or("no fitted exponent")?;
        ensure!((alpha - gamma).abs() <= 0.02 * gamma, "gamma = {gamma}: fitted {alpha}");
        ensure!((own - gamma).abs() <= 0.02 * gamma, "gamma = {gamma}: direct fit {own}");
        fits.push(format!("{gamma}->{alpha:.4}"));
    }
    for p in [1.5, 3.0] {
        let (prob, u) = solved(p, 1.0 / 64.0)?;
        let ch = lib(Checker::new(&u, prob.domain(), 0.5, prob.nfunction()))?;
        let fit = lib(ch.holder_decay_fit(&[0.1, 0.0, 0.0], 0.4, 0.5, 8, None))?;
        ensure!(fit.oscillations.windows(2).all(|w| w[1] <= w[0]), "p = {p}: {:?}", fit.oscillations);
        let alpha = fit.alpha_hat.ok_or("no fitted exponent")?;
        ensure!(alpha > 0.0, "p = {p}: fitted {alpha}");
        fits.push(format!("p={p}: {alpha:.3}"));
    }
    Ok(format!("fitted exponents {}", fits.join(", ")))
}

// ---------------------------------------------------------------------------
// 9. estimate constants under refinement and scaling

fn solved_smooth(p: f64, h: f64) -> Result<(NonlocalProblem, GridFunction), String> {
    let prob = lib(NonlocalProblem::new(ProblemSpec {
        dim: 1,
        h,
        omega: segment(-1.0, 1.0),
        s: 0.5,
        nf: lib(NFunction::power(p))?,
        kernel: Kernel::Pure,
        exterior: ExteriorModel::Constant { value: 0.0 },
        data: Some(Arc::new(smooth)),
        truncation_radius: Some(6.0),
    }))?;
    let tol = if p < 2.0 { 1e-7 } else { 1e-9 };
    let u = lib(prob.solve(&SolveOptions { tol, ..Default::default() }))?.minimizer;
    Ok((prob, u))
}

fn stability_check() -> Verdict {
    let bounded_ball = lib(Ball::new(&[0.05], 0.5))?;
    let energy_ball = lib(Ball::new(&[0.0], 0.6))?;
    let cutoff = Cutoff::hat(0.2, 0.5);
    let mut bounded = Vec::new();
    let mut energy = Vec::new();
    for h in [1.0 / 32.0, 1.0 / 64.0] {
        let (prob, u) = solved_smooth(2.0, h)?;
        let ch = lib(Checker::new(&u, prob.domain(), 0.5, prob.nfunction()))?;
        bounded.push(lib(ch.boundedness(&bounded_ball))?.empirical_constant);
        energy.push(lib(ch.caccioppoli(&energy_ball, 0.3, &cutoff, Sign::Plus))?.empirical_constant);
    }
    let db = (bounded[0] - bounded[1]).abs() / bounded[1];
    let de = (energy[0] - energy[1]).abs() / energy[1];
    ensure!(db < 0.2, "boundedness constants {bounded:?}");
    ensure!(de < 0.2, "caccioppoli constants {energy:?}");
    let mut worst = 0.0_f64;
    for p in [1.5, 2.0, 3.0] {
        let (prob, u) = solved_smooth(p, 1.0 / 32.0)?;
        let nf = prob.nfunction();
        for r in [0.3, 0.5, 0.8] {
            let ball = lib(Ball::new(&[0.05], r))?;
            let base = lib(lib(Checker::new(&u, prob.domain(), 0.5, nf))?.boundedness(&ball))?.empirical_constant;
            for c in [0.01, 0.5, 7.0, 1e3] {
                let cu = u.scaled(c);
                let scaled =
                    lib(lib(Checker::new(&cu, prob.domain(), 0.5, nf))?.boundedness(&ball))?.empirical_constant;
                let e = rel(scaled, base);
                ensure!(e <= 1e-10, "p = {p}, r = {r}, c = {c}: {scaled} vs {base}");
                worst = worst.max(e);
            }
        }
    }
    Ok(format!(
        "h vs h/2: boundedness {:.1}%, caccioppoli {:.1}%; scaling invariance {worst:.1e}",
        100.0 * db,
        100.0 * de
    ))
}

// ---------------------------------------------------------------------------
// 10. determinism

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_all(out: &Path, jobs: &str) -> Result<Vec<(String, Vec<u8>)>, String> {
    for cfg in ["regularity.json", "logarithmic.json", "linear_oracle.json"] {
        let status = Command::new(env!("CARGO_BIN_EXE_fracg"))
            .args(["run", configs().join(cfg).to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", jobs])
            .env_remove("FRACG_OUT")
            .output()
            .map_err(|e| e.to_string())?
            .status;
        ensure!(status.success(), "{cfg} exited with {status}");
    }
    let mut files = Vec::new();
    for e in fs::read_dir(out).map_err(|e| e.to_string())? {
        let e = e.map_err(|e| e.to_string())?;
        files.push((e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).map_err(|e| e.to_string())?));
    }
    files.sort();
    Ok(files)
}

fn determinism_check() -> Verdict {
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let first = run_all(dirs[0].path(), "2")?;
    let second = run_all(dirs[1].path(), "2")?;
    let serial = run_all(dirs[2].path(), "1")?;
    ensure!(first == second, "two consecutive runs differ");
    ensure!(first == serial, "one and two workers differ");
    let bytes: usize = first.iter().map(|f| f.1.len()).sum();
    Ok(format!("{} report files ({bytes} bytes) identical across runs and worker counts", first.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("linear oracle", linear_oracle),
        ("gradient", gradient_check),
        ("Euler-Lagrange", euler_lagrange),
        ("N-function suite", nfunction_suite),
        ("tail closed form", tail_check),
        ("Luxemburg norm", luxemburg_check),
        ("De Giorgi", de_giorgi_check),
        ("Hölder recovery", holder_check),
        ("constant stability", stability_check),
        ("determinism", determinism_check),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.2}s]", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
