//! Evaluation of one configured estimate.

use fracg::funcspace::lattice::point;
use fracg::funcspace::{luxemburg_norm, orlicz_modular, Ball, GridFunction, Region};
use fracg::nfunction::{check_doubling, check_growth_sandwich, check_scaling, check_young, NFunction};
use fracg::regularity::{certified_threshold, de_giorgi_iterate, Checker, Cutoff, EstimateBounds, LogEstimateInput};
use fracg::{witness, EstimateReport, Result, Tally};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::config::EstimateConfig;
use crate::corpus::{generate_corpus, CorpusSpec};

/// Ratio used for the Hölder fit when none is configured.
pub const DEFAULT_SIGMA: f64 = 0.5;

/// Inputs shared by every estimate of a run.
#[derive(Debug, Clone, Copy)]
pub struct Context<'a> {
    pub nf: &'a NFunction,
    pub s: f64,
    /// Minimizer and the domain it solves on.
    pub solution: Option<(&'a GridFunction, &'a Region)>,
    pub seed: Option<u64>,
    pub bounds: EstimateBounds,
    /// Relative tolerance override.
    pub tolerance: Option<f64>,
}

impl<'a> Context<'a> {
    fn checker(&self) -> Result<Checker<'a>> {
        let (u, domain) =
            self.solution.ok_or_else(|| fracg::Error::Precondition("estimate needs a solved problem".into()))?;
        Ok(Checker::new(u, domain, self.s, self.nf)?.with_bounds(self.bounds))
    }

    fn rng(&self) -> Result<ChaCha8Rng> {
        let seed =
            self.seed.ok_or_else(|| fracg::Error::Precondition("estimate samples randomly, seed missing".into()))?;
        Ok(ChaCha8Rng::seed_from_u64(seed))
    }

    fn corpus(&self, spec: &CorpusSpec) -> Result<Vec<GridFunction>> {
        let seed = self.rng()?.random();
        generate_corpus(spec, seed).map_err(|e| fracg::Error::InvalidParameter(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub pass: bool,
    pub reports: Vec<EstimateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl Outcome {
    fn from_reports(reports: Vec<EstimateReport>) -> Self {
        Outcome { pass: reports.iter().all(|r| r.pass), reports, detail: None }
    }
}

fn ball(center: &[f64], radius: f64) -> Result<Ball> {
    Ball::new(center, radius)
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// Folds per-function reports into one: the worst constant, all samples and
/// violations.
fn aggregate(name: &str, reports: &[EstimateReport]) -> Option<EstimateReport> {
    let worst = reports.iter().max_by(|a, b| a.empirical_constant.total_cmp(&b.empirical_constant))?;
    let mut out = worst.clone();
    out.name = name.to_string();
    out.samples = reports.iter().map(|r| r.samples).sum();
    out.violations = reports.iter().map(|r| r.violations).sum();
    out.pass = out.violations == 0;
    out.failures.clear();
    Some(out)
}

pub fn evaluate(est: &EstimateConfig, ctx: &Context) -> Result<Outcome> {
    match est {
        EstimateConfig::Boundedness { center, radius } => {
            Ok(Outcome::from_reports(vec![ctx.checker()?.boundedness(&ball(center, *radius)?)?]))
        }
        EstimateConfig::Caccioppoli { center, radius, level, inner, outer, profile, sign } => {
            let cutoff = Cutoff { inner: *inner, outer: *outer, profile: *profile };
            let rep = ctx.checker()?.caccioppoli(&ball(center, *radius)?, *level, &cutoff, *sign)?;
            Ok(Outcome::from_reports(vec![rep]))
        }
        EstimateConfig::Logarithmic { center, r, big_r, d, truncation } => {
            let input = LogEstimateInput {
                center: point(center),
                r: *r,
                big_r: *big_r,
                d: *d,
                truncation: truncation.map(|[a, b]| (a, b)),
            };
            Ok(Outcome::from_reports(vec![ctx.checker()?.log_estimate(&input)?]))
        }
        EstimateConfig::SobolevPoincare { center, radius, theta, corpus } => {
            let b = ball(center, *radius)?;
            let mut reports = vec![ctx.checker()?.sobolev_poincare(&b, *theta)?];
            if let Some(spec) = corpus {
                let per: Vec<EstimateReport> = ctx
                    .corpus(spec)?
                    .iter()
                    .map(|f| {
                        Checker::on_lattice(f, ctx.s, ctx.nf)?.with_bounds(ctx.bounds).sobolev_poincare(&b, *theta)
                    })
                    .collect::<Result<_>>()?;
                reports.extend(aggregate("sobolev_poincare_corpus", &per));
            }
            Ok(Outcome::from_reports(reports))
        }
        EstimateConfig::Holder { center, r0, sigma, levels, c_b } => {
            let fit =
                ctx.checker()?.holder_decay_fit(&point(center), *r0, sigma.unwrap_or(DEFAULT_SIGMA), *levels, *c_b)?;
            let seminorm_ok = fit.seminorm.as_ref().is_none_or(|r| r.pass);
            let reports = fit.seminorm.iter().cloned().collect();
            let pass = fit.monotone && fit.decay_holds && seminorm_ok;
            let detail = serde_json::to_value(&fit).map_err(|e| fracg::Error::Io(e.to_string()))?;
            Ok(Outcome { pass, reports, detail: Some(detail) })
        }
        EstimateConfig::DeGiorgi { cases, steps } => de_giorgi(*cases, *steps, ctx),
        EstimateConfig::Nfunction { samples, eps } => nfunction_suite(*samples, *eps, ctx),
        EstimateConfig::Luxemburg { corpus } => luxemburg(corpus, ctx),
    }
}

fn de_giorgi(cases: usize, steps: usize, ctx: &Context) -> Result<Outcome> {
    let dyadic = de_giorgi_iterate(1.0, 2.0, 1.0, 0.5, steps)?;
    let mut exact = Tally::new("de_giorgi_dyadic", 0.0);
    exact.record_eq(dyadic.sequence.len() as f64, (steps + 1) as f64, || witness!("steps" => steps));
    for (i, a) in dyadic.sequence.iter().enumerate() {
        exact.record_eq(*a, (-(i as f64) - 1.0).exp2(), || witness!("i" => i));
    }
    let mut rng = ctx.rng()?;
    let mut random = Tally::new("de_giorgi_threshold", 0.0);
    for case in 0..cases {
        let c = log_uniform(&mut rng, 0.05, 20.0);
        let b: f64 = rng.random_range(1.01..8.0);
        let beta: f64 = rng.random_range(0.1..2.0);
        let a0 = certified_threshold(c, b, beta);
        let rep = de_giorgi_iterate(c, b, beta, a0, steps)?;
        let wit = || witness!("case" => case, "C" => c, "B" => b, "beta" => beta, "A0" => a0);
        if rep.diverged || !rep.below_threshold || rep.horizon.is_some() {
            random.record(f64::INFINITY, 0.0, wit);
            continue;
        }
        for (i, ((a, bound), e)) in rep.sequence.iter().zip(&rep.bounds).zip(&rep.allowance).enumerate() {
            random.record(*a, bound * (1.0 + e), || {
                let mut w = wit();
                w.insert("i".into(), i as f64);
                w
            });
        }
    }
    Ok(Outcome::from_reports(vec![exact.finish(), random.finish()]))
}

fn nfunction_suite(samples: usize, eps: f64, ctx: &Context) -> Result<Outcome> {
    let nf = ctx.nf;
    let tol = ctx.tolerance.unwrap_or(nf.check_tolerance());
    let mut rng = ctx.rng()?;
    let mut pairs = Vec::with_capacity(samples);
    let mut scalings = Vec::with_capacity(samples);
    for _ in 0..samples {
        pairs.push((log_uniform(&mut rng, 1e-3, 1e3), log_uniform(&mut rng, 1e-3, 1e3)));
        scalings.push((log_uniform(&mut rng, 1e-2, 1e2), log_uniform(&mut rng, 1e-3, 1e3)));
    }
    let ts: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    Ok(Outcome::from_reports(vec![
        check_growth_sandwich(nf, &ts, tol)?,
        check_young(nf, &pairs, eps, tol)?,
        check_scaling(nf, &scalings, tol)?,
        check_doubling(nf, &pairs, tol)?,
    ]))
}

/// `modular(f / ||f||) = 1` and `||f|| <= modular(f) + 1` on every corpus
/// function, over the whole corpus lattice.
fn luxemburg(spec: &CorpusSpec, ctx: &Context) -> Result<Outcome> {
    let tol = ctx.tolerance.unwrap_or(1e-8);
    let mut unit = Tally::new("luxemburg_unit", tol);
    let mut bound = Tally::new("luxemburg_bound", tol);
    for (k, f) in ctx.corpus(spec)?.iter().enumerate() {
        let lat = &f.lattice;
        let region = Region::Box { lo: lat.coords(0), hi: lat.coords(lat.len() - 1) };
        let norm = luxemburg_norm(f, &region, ctx.nf)?;
        if norm > 0.0 {
            let m = orlicz_modular(f, &region, ctx.nf, norm)?;
            unit.record_eq(m, 1.0, || witness!("function" => k, "norm" => norm));
        }
        let m1 = orlicz_modular(f, &region, ctx.nf, 1.0)?;
        bound.record(norm, m1 + 1.0, || witness!("function" => k, "modular" => m1));
    }
    Ok(Outcome::from_reports(vec![unit.finish(), bound.finish()]))
}
