use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Named scalar parameters describing one sample point.
pub type Witness = BTreeMap<String, f64>;

/// Maximum number of failing samples kept in a report.
const MAX_FAILURES: usize = 16;

/// Outcome of checking one inequality, either on a single configuration or
/// over a set of samples.
///
/// For single-configuration estimates `empirical_constant` is
/// `lhs / sum(rhs_terms)`. For sampled inequalities it is the worst
/// `lhs / rhs` ratio encountered and the `lhs`/`rhs_terms` fields hold the
/// sample that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub lhs: f64,
    pub rhs_terms: BTreeMap<String, f64>,
    pub empirical_constant: f64,
    pub constant_bound: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub samples: usize,
    pub violations: usize,
    pub witnesses: Witness,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<Witness>,
}

impl EstimateReport {
    /// Report for a single configuration: passes iff the empirical constant
    /// `lhs / sum(rhs)` is finite and at most `constant_bound`.
    pub fn single(
        name: &str,
        lhs: f64,
        rhs_terms: BTreeMap<String, f64>,
        constant_bound: f64,
        tolerance: f64,
        witnesses: Witness,
    ) -> Self {
        let rhs: f64 = rhs_terms.values().sum();
        let empirical_constant = ratio(lhs, rhs);
        let pass = empirical_constant.is_finite() && empirical_constant <= constant_bound + tolerance;
        EstimateReport {
            name: name.to_string(),
            lhs,
            rhs_terms,
            empirical_constant,
            constant_bound,
            tolerance,
            pass,
            samples: 1,
            violations: usize::from(!pass),
            witnesses,
            failures: Vec::new(),
        }
    }
}

/// `a / b` with `0 / 0 = 0`.
pub(crate) fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Accumulates `lhs <= rhs` samples and builds a report from them.
#[derive(Debug)]
pub struct Tally {
    name: String,
    tol: f64,
    samples: usize,
    violations: usize,
    worst: Option<(f64, f64, f64, Witness)>,
    failures: Vec<Witness>,
}

impl Tally {
    pub fn new(name: &str, tol: f64) -> Self {
        Tally { name: name.to_string(), tol, samples: 0, violations: 0, worst: None, failures: Vec::new() }
    }

    /// Records `lhs <= rhs`, relative tolerance `tol`.
    pub fn record(&mut self, lhs: f64, rhs: f64, witness: impl FnOnce() -> Witness) {
        self.samples += 1;
        let slack = self.tol * lhs.abs().max(rhs.abs());
        let ok = lhs <= rhs + slack && lhs.is_finite() && rhs.is_finite();
        let r = ratio(lhs, rhs);
        let worse = match &self.worst {
            None => true,
            Some((w, ..)) => r > *w || (r.is_nan() && !w.is_nan()),
        };
        if !ok || worse {
            let mut wit = witness();
            if worse {
                self.worst = Some((r, lhs, rhs, wit.clone()));
            }
            if !ok {
                self.violations += 1;
                if self.failures.len() < MAX_FAILURES {
                    wit.insert("lhs".into(), lhs);
                    wit.insert("rhs".into(), rhs);
                    self.failures.push(wit);
                }
            }
        }
    }

    /// Records `|lhs - rhs| <= tol * max(|lhs|, |rhs|)` as two inequalities.
    pub fn record_eq(&mut self, lhs: f64, rhs: f64, witness: impl Fn() -> Witness) {
        self.record(lhs, rhs, &witness);
        self.record(rhs, lhs, &witness);
    }

    pub fn finish(self) -> EstimateReport {
        let (constant, lhs, rhs, witnesses) = self.worst.unwrap_or((0.0, 0.0, 0.0, Witness::new()));
        let mut rhs_terms = BTreeMap::new();
        rhs_terms.insert("rhs".to_string(), rhs);
        EstimateReport {
            name: self.name,
            lhs,
            rhs_terms,
            empirical_constant: constant,
            constant_bound: 1.0,
            tolerance: self.tol,
            pass: self.violations == 0,
            samples: self.samples,
            violations: self.violations,
            witnesses,
            failures: self.failures,
        }
    }
}

/// Builds a [`Witness`] from `name => value` pairs.
#[macro_export]
macro_rules! witness {
    ($($k:expr => $v:expr),* $(,)?) => {{
        #[allow(unused_mut)]
        let mut w = $crate::report::Witness::new();
        $( w.insert($k.to_string(), $v as f64); )*
        w
    }};
}
