//! Seeded property suite: per-property worst deviations over random trials.
//!
//! Trial `i` draws from ChaCha8 stream `i` of the seed, so reports do not
//! depend on trial order or on how many trials run before it.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::actions::ActionKind;
use crate::conservation::{first_integral, noether_constant};
use crate::error::Result;
use crate::frames::verify_frame_identities;
use crate::operators::{curvature_residual, syzygy_residuals};
use crate::reconstruction::{reconstruct, ReconstructionInput};
use crate::sampling::{extremal_family, lagrangian_family, localize_velocities, random_path};
use crate::solver::random_extremal;
use crate::variational::pairing_check;

const PATH_LEN: usize = 20;
const EXTREMAL_LEN: usize = 12;

/// Name and tolerance of each property, in report order.
pub const PROPERTIES: [(&str, f64); 10] = [
    ("frame-equivariance", 1e-9),
    ("invariant-invariance", 1e-9),
    ("maurer-cartan", 1e-10),
    ("normalization", 1e-9),
    ("syzygy", 1e-9),
    ("curvature", 1e-9),
    ("pairing", 1e-9),
    ("conservation-drift", 1e-8),
    ("first-integral", 1e-8),
    ("reconstruction", 1e-7),
];

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub samples: usize,
    /// Trials where the property could not be evaluated.
    pub errors: Vec<String>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.max_deviation < self.tolerance
    }

    fn record(&mut self, trial: usize, r: Result<f64>) {
        match r {
            Ok(d) => {
                self.samples += 1;
                // NaN must not hide behind `max`.
                self.max_deviation = if d.is_nan() || self.max_deviation.is_nan() { f64::NAN } else { self.max_deviation.max(d) };
            }
            Err(e) => self.errors.push(format!("trial {trial}: {e}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub kind: ActionKind,
    pub seed: u64,
    pub trials: usize,
    pub properties: Vec<PropertyOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(PropertyOutcome::passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.properties.iter().filter(|p| !p.passed()).map(|p| p.name).collect()
    }

    /// Fixed-width table; identical inputs give identical text.
    pub fn table(&self) -> String {
        let mut out = format!("action {} seed {} trials {}\n", self.kind, self.seed, self.trials);
        if self.trials == 0 {
            return out;
        }
        let _ = writeln!(out, "{:<22} {:>8} {:>12} {:>10}  status", "property", "samples", "max-dev", "tolerance");
        for p in &self.properties {
            let status = if p.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{:<22} {:>8} {:>12.3e} {:>10.0e}  {status}", p.name, p.samples, p.max_deviation, p.tolerance);
            for e in &p.errors {
                let _ = writeln!(out, "    {e}");
            }
        }
        out
    }
}

/// Run every property for `trials` random trials of one action.
pub fn run_suite(kind: ActionKind, trials: usize, seed: u64) -> SuiteReport {
    let action = kind.strategy();
    let mut props: Vec<PropertyOutcome> = PROPERTIES
        .iter()
        .map(|&(name, tolerance)| PropertyOutcome { name, tolerance, max_deviation: 0.0, samples: 0, errors: Vec::new() })
        .collect();
    let pairing_ls = lagrangian_family(kind);
    let extremal_ls = extremal_family(kind);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let path = random_path(kind, &mut rng, PATH_LEN);

        match verify_frame_identities(action, &path, 1, &mut rng) {
            Ok(r) => {
                props[0].record(trial, Ok(r.equivariance));
                props[1].record(trial, Ok(r.invariance));
                props[2].record(trial, Ok(r.maurer_cartan));
                props[3].record(trial, Ok(r.normalization.max(r.determinant)));
            }
            Err(e) => {
                for p in &mut props[..4] {
                    p.record(trial, Err(e.clone()));
                }
            }
        }
        props[4].record(
            trial,
            syzygy_residuals(action, &path).map(|r| r.iter().flat_map(|x| x.1.iter()).fold(0.0, |m: f64, v| m.max(v.abs()))),
        );
        props[5].record(trial, curvature_residual(action, &path));
        let l = &pairing_ls[trial % pairing_ls.len()];
        let local = localize_velocities(&path, 8, PATH_LEN - 8);
        props[6].record(trial, pairing_check(action, l, &local).map(|r| r.deviation / (1.0 + r.lhs.abs())));

        let l = &extremal_ls[trial % extremal_ls.len()];
        match random_extremal(kind, l, &mut rng, EXTREMAL_LEN) {
            Ok(e) => {
                props[7].record(trial, noether_constant(action, l, &e.path).map(|r| r.relative_drift()));
                props[8].record(trial, first_integral_spread(kind, l, &e.path));
                props[9].record(trial, roundtrip(action, l, &e.path));
            }
            Err(e) => {
                for p in &mut props[7..] {
                    p.record(trial, Err(e.clone()));
                }
            }
        }
    }
    SuiteReport { kind, seed, trials, properties: props }
}

fn first_integral_spread(kind: ActionKind, l: &crate::variational::InvariantLagrangian, path: &crate::frames::LatticePath<f64>) -> Result<f64> {
    let rec = noether_constant(kind.strategy(), l, path)?;
    let f = rec.v.iter().map(|v| first_integral(kind, v)).collect::<Result<Vec<f64>>>()?;
    let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    Ok((hi - lo) / (1.0 + f[0].abs()))
}

fn roundtrip(
    action: &dyn crate::actions::GroupAction,
    l: &crate::variational::InvariantLagrangian,
    path: &crate::frames::LatticePath<f64>,
) -> Result<f64> {
    let input = ReconstructionInput::from_path(action, l, path)?;
    let rec = reconstruct(&input, input.v.len())?;
    Ok(rec.path.max_abs_diff(&path.slice(input.v_offset, input.v.len())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_is_a_vacuous_pass() {
        let r = run_suite(ActionKind::Sa2Linear, 0, 42);
        assert!(r.passed());
        assert_eq!(r.table(), "action sa2 seed 42 trials 0\n");
    }

    #[test]
    fn reports_are_reproducible() {
        for kind in ActionKind::ALL {
            let a = run_suite(kind, 3, 7);
            assert_eq!(a, run_suite(kind, 3, 7));
            assert!(a.passed(), "{}", a.table());
        }
    }

    #[test]
    fn trials_use_independent_streams() {
        let short = run_suite(ActionKind::Sl2Linear, 1, 9);
        let long = run_suite(ActionKind::Sl2Linear, 2, 9);
        assert!(long.properties.iter().zip(&short.properties).all(|(l, s)| l.max_deviation >= s.max_deviation));
    }

    #[test]
    fn nan_fails() {
        let mut p = PropertyOutcome { name: "x", tolerance: 1.0, max_deviation: 0.0, samples: 0, errors: vec![] };
        p.record(0, Ok(f64::NAN));
        p.record(1, Ok(0.5));
        assert!(!p.passed());
    }
}
