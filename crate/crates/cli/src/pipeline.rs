//! Stage execution and report files.
//!
//! Files written to the output directory:
//!
//! * `SolveReport.json`, `minimizer.csv` when the problem is solved;
//! * `oracle.json` for the oracle stage;
//! * `estimate_<name>.json` for `verify:<name>`;
//! * `sweep_<name>.csv` for `sweep:<name>`, one row per report and grid point
//!   with columns `point`, the swept parameters, `report`, `pass`, `lhs`,
//!   `empirical_constant`, `constant_bound`, `samples`, `violations`, then
//!   `rhs_<term>` and `w_<witness>` in sorted order.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use fracg::funcspace::io::write_csv;
use fracg::funcspace::GridFunction;
use fracg::solver::oracle::solve_quadratic;
use fracg::solver::{NonlocalProblem, SolveReport};
use fracg::NFunction;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{EstimateConfig, RunConfig, Stage};
use crate::error::{exit, CliError};
use crate::evaluate::{evaluate, Context, Outcome};

/// Which stages of the pipeline a subcommand executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `solve` and `oracle`.
    Solve,
    /// `verify:*`.
    Verify,
    /// `sweep:*`.
    Sweep,
    /// Every stage.
    Run,
}

impl Mode {
    fn selects(self, stage: &Stage) -> bool {
        match self {
            Mode::Run => true,
            Mode::Solve => matches!(stage, Stage::Solve | Stage::Oracle),
            Mode::Verify => matches!(stage, Stage::Verify(_)),
            Mode::Sweep => matches!(stage, Stage::Sweep(_)),
        }
    }
}

/// Exit status and one line per executed stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    pub exit: i32,
    pub lines: Vec<String>,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    sup_error: f64,
    tolerance: f64,
    interior_nodes: usize,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct EstimateFile<'a> {
    name: &'a str,
    kind: &'a str,
    config: &'a EstimateConfig,
    #[serde(flatten)]
    outcome: &'a Outcome,
}

fn write_json(dir: &Path, file: &str, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::io)?;
    text.push('\n');
    fs::write(dir.join(file), text).map_err(|e| CliError::io(format!("{file}: {e}")))
}

/// Shortest round-trip text of `x`.
fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
    } else {
        x.to_string()
    }
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    out: PathBuf,
    nf: NFunction,
    solved: Option<(NonlocalProblem, GridFunction)>,
    lines: Vec<String>,
    failed: bool,
}

impl Runner<'_> {
    fn ensure_solved(&mut self) -> Result<(), CliError> {
        if self.solved.is_some() {
            return Ok(());
        }
        let prob = self.cfg.problem.build(self.cfg.seed)?;
        let (report, converged) = match prob.solve(&self.cfg.solve_options()) {
            Ok(r) => (r, true),
            Err(fracg::Error::NotConverged(r) | fracg::Error::Stagnation(r)) => (*r, false),
            Err(e) => return Err(e.into()),
        };
        self.write_solution(&report)?;
        let line = format!(
            "solve: {} after {} iterations, residual {:e} (threshold {:e})",
            if converged { "converged" } else { "NOT converged" },
            report.iterations,
            report.residual_norm,
            report.tolerance
        );
        self.lines.push(line.clone());
        if !converged {
            return Err(CliError::NotConverged(line));
        }
        self.solved = Some((prob, report.minimizer));
        Ok(())
    }

    fn write_solution(&self, report: &SolveReport) -> Result<(), CliError> {
        write_json(&self.out, "SolveReport.json", report)?;
        let file = fs::File::create(self.out.join("minimizer.csv"))
            .map_err(|e| CliError::io(format!("minimizer.csv: {e}")))?;
        write_csv(&report.minimizer, std::io::BufWriter::new(file))?;
        Ok(())
    }

    fn oracle(&mut self) -> Result<(), CliError> {
        self.ensure_solved()?;
        let (prob, u) = self.solved.as_ref().expect("solved above");
        let exact = solve_quadratic(prob)?;
        let sup_error = prob.omega().iter().map(|&i| (u.values[i] - exact.values[i]).abs()).fold(0.0, f64::max);
        let tolerance = self.cfg.oracle_tol();
        let pass = sup_error <= tolerance;
        write_json(
            &self.out,
            "oracle.json",
            &OracleReport { sup_error, tolerance, interior_nodes: prob.omega().len(), pass },
        )?;
        self.lines.push(format!("oracle: sup error {sup_error:e} {}", verdict(pass)));
        self.failed |= !pass;
        Ok(())
    }

    fn context(&self, name: &str) -> Context<'_> {
        Context {
            nf: &self.nf,
            s: self.cfg.problem.s,
            solution: self.solved.as_ref().map(|(p, u)| (u, p.domain())),
            seed: self.cfg.seed,
            bounds: self.cfg.bounds,
            tolerance: self.cfg.tolerances.get(name).copied(),
        }
    }

    fn verify(&mut self, name: &str) -> Result<(), CliError> {
        let est = self.cfg.estimate(name)?;
        if est.needs_solution() {
            self.ensure_solved()?;
        }
        let outcome = evaluate(est, &self.context(name)).map_err(|e| CliError::in_estimate(name, e))?;
        let file = EstimateFile { name, kind: est.kind(), config: est, outcome: &outcome };
        write_json(&self.out, &format!("estimate_{name}.json"), &file)?;
        let worst = outcome.reports.iter().map(|r| r.empirical_constant).fold(0.0, f64::max);
        self.lines.push(format!("verify:{name}: {} (max constant {})", verdict(outcome.pass), num(worst)));
        self.failed |= !outcome.pass;
        Ok(())
    }

    fn sweep(&mut self, name: &str) -> Result<(), CliError> {
        let sweep = &self.cfg.sweeps[name];
        let points = sweep.points(self.cfg.estimate(&sweep.estimate)?)?;
        if points.iter().any(|(_, e)| e.needs_solution()) {
            self.ensure_solved()?;
        }
        let ctx = self.context(&sweep.estimate);
        let results: Vec<Outcome> = points
            .par_iter()
            .map(|(_, est)| evaluate(est, &ctx))
            .collect::<fracg::Result<_>>()
            .map_err(|e| CliError::in_estimate(name, e))?;
        let params: Vec<&String> = sweep.grid.keys().collect();
        let rows: Vec<(usize, &BTreeMap<String, Value>, &fracg::EstimateReport)> = points
            .iter()
            .zip(&results)
            .enumerate()
            .flat_map(|(k, ((ov, _), o))| o.reports.iter().map(move |r| (k, ov, r)))
            .collect();
        let rhs: BTreeSet<&String> = rows.iter().flat_map(|r| r.2.rhs_terms.keys()).collect();
        let wit: BTreeSet<&String> = rows.iter().flat_map(|r| r.2.witnesses.keys()).collect();
        let path = self.out.join(format!("sweep_{name}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        let mut header: Vec<String> = vec!["point".into()];
        header.extend(params.iter().map(|p| p.to_string()));
        header.extend(
            ["report", "pass", "lhs", "empirical_constant", "constant_bound", "samples", "violations"]
                .map(String::from),
        );
        header.extend(rhs.iter().map(|k| format!("rhs_{k}")));
        header.extend(wit.iter().map(|k| format!("w_{k}")));
        w.write_record(&header).map_err(CliError::io)?;
        for (k, ov, r) in &rows {
            let mut row = vec![k.to_string()];
            row.extend(params.iter().map(|p| ov[*p].to_string()));
            row.extend([
                r.name.clone(),
                r.pass.to_string(),
                num(r.lhs),
                num(r.empirical_constant),
                num(r.constant_bound),
                r.samples.to_string(),
                r.violations.to_string(),
            ]);
            row.extend(rhs.iter().map(|t| r.rhs_terms.get(*t).map_or(String::new(), |v| num(*v))));
            row.extend(wit.iter().map(|t| r.witnesses.get(*t).map_or(String::new(), |v| num(*v))));
            w.write_record(&row).map_err(CliError::io)?;
        }
        w.flush().map_err(CliError::io)?;
        let pass = results.iter().all(|o| o.pass);
        let worst = rows.iter().map(|r| r.2.empirical_constant).fold(0.0, f64::max);
        self.lines.push(format!(
            "sweep:{name}: {} over {} points (max constant {})",
            verdict(pass),
            points.len(),
            num(worst)
        ));
        self.failed |= !pass;
        Ok(())
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

/// Executes the stages of `cfg` selected by `mode`, writing reports into
/// `out`. The configuration must already be validated.
pub fn run(cfg: &RunConfig, mode: Mode, out: &Path) -> Summary {
    let mut runner = Runner {
        cfg,
        out: out.to_path_buf(),
        nf: match cfg.problem.nfunction() {
            Ok(nf) => nf,
            Err(e) => return Summary { exit: e.exit_code(), lines: vec![e.to_string()] },
        },
        solved: None,
        lines: Vec::new(),
        failed: false,
    };
    let result = (|| {
        fs::create_dir_all(out).map_err(|e| CliError::io(format!("{}: {e}", out.display())))?;
        for stage in cfg.stages()?.iter().filter(|s| mode.selects(s)) {
            match stage {
                Stage::Solve => runner.ensure_solved()?,
                Stage::Oracle => runner.oracle()?,
                Stage::Verify(name) => runner.verify(name)?,
                Stage::Sweep(name) => runner.sweep(name)?,
            }
        }
        Ok::<_, CliError>(())
    })();
    let mut lines = runner.lines;
    let exit = match result {
        Err(e) => {
            lines.push(e.to_string());
            e.exit_code()
        }
        Ok(()) if runner.failed => exit::ESTIMATE_FAILED,
        Ok(()) => exit::OK,
    };
    Summary { exit, lines }
}
