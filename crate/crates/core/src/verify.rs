// SPDX-License-Identifier: Apache-2.0

//! Self-check suites behind `qst verify`.
//!
//! Each suite reports a pass flag and one headline number: a residual for
//! identity checks, the worst margin above the required value for bound
//! checks. Schedules come from a [`ScheduleSource`] so tests can feed in a
//! tampered schedule and watch a suite fail.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{BipartiteSpec, Side, VertexId};
use crate::schedule::{
    chebyshev, fixed_point_phase_deltas, gamma, min_steps, predicted_stage_fidelity,
    quasi_chebyshev, stage1_schedule, stage2_diff_schedule, stage2_same_schedule, AngleSchedule,
    Pairing, Parity, Stage,
};
use crate::subspace::{
    combined_diff_basis, combined_same_basis, omega, side_state, stage1_basis, stage2_diff_basis,
    stage2_same_basis, verify_decompositions,
};
use crate::transfer::{run, Backend, TransferConfig};
use crate::walk::{fidelity, initial_state, target_state, MarkedVertex, StateVector};

const SEED: u64 = 0x5eed_2024;
const IDENTITY_TOLERANCE: f64 = 1e-12;
const CLOSED_FORM_TOLERANCE: f64 = 1e-9;
const BACKEND_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(format!("unknown level {other:?} (expected fast or full)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Largest deviation; must stay below the tolerance.
    Residual,
    /// Smallest `value - required`; must stay positive.
    Margin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub metric: Metric,
    pub value: f64,
    pub checks: usize,
    pub note: String,
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.metric {
            Metric::Residual => "max residual",
            Metric::Margin => "min margin",
        };
        write!(
            f,
            "{:<6} {:<22} {:>6} checks  {label} {:+.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.checks,
            self.value
        )?;
        if !self.note.is_empty() {
            write!(f, "  ({})", self.note)?;
        }
        Ok(())
    }
}

/// Produces the schedule for a stage at a step count and epsilon.
pub type ScheduleSource = dyn Fn(Stage, usize, f64) -> Result<AngleSchedule> + Sync;

/// The library's schedules with the default pairing.
pub fn standard_schedule(stage: Stage, h: usize, eps: f64) -> Result<AngleSchedule> {
    match stage {
        Stage::Stage1 => stage1_schedule(h, eps),
        Stage::Stage2Same => stage2_same_schedule(h, eps),
        Stage::Stage2Diff => stage2_diff_schedule(h, eps, Pairing::default()),
    }
}

struct Tally {
    metric: Metric,
    value: f64,
    checks: usize,
    failed: bool,
    note: String,
}

impl Tally {
    fn residual() -> Self {
        Tally {
            metric: Metric::Residual,
            value: 0.0,
            checks: 0,
            failed: false,
            note: String::new(),
        }
    }

    fn margin() -> Self {
        Tally {
            metric: Metric::Margin,
            value: f64::INFINITY,
            ..Tally::residual()
        }
    }

    fn residual_below(&mut self, r: f64, tol: f64) {
        self.checks += 1;
        self.value = self.value.max(r);
        self.failed |= r >= tol || r.is_nan();
    }

    fn margin_above(&mut self, value: f64, required: f64) {
        self.checks += 1;
        let m = value - required;
        self.value = self.value.min(m);
        self.failed |= m < 0.0 || m.is_nan();
    }

    fn error(&mut self, e: impl fmt::Display) {
        self.checks += 1;
        self.failed = true;
        if self.note.is_empty() {
            self.note = e.to_string();
        }
    }

    fn finish(self, name: &'static str) -> SuiteResult {
        SuiteResult {
            name,
            passed: !self.failed,
            metric: self.metric,
            value: self.value,
            checks: self.checks,
            note: self.note,
        }
    }
}

fn random_state(spec: BipartiteSpec, rng: &mut impl Rng) -> StateVector {
    let amps = (0..spec.num_arcs())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    StateVector::normalized(spec, amps).expect("random state is non-zero")
}

fn max_diff(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `S^2 = I` and norm preservation of the coin and oracle on random states.
pub fn suite_unitarity(samples: usize) -> SuiteResult {
    let mut t = Tally::residual();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..samples {
        let spec = BipartiteSpec::new(rng.gen_range(1..9), rng.gen_range(1..9)).expect("positive");
        let psi = random_state(spec, &mut rng);
        let phi = random_state(spec, &mut rng);
        t.residual_below(
            max_diff(&psi.apply_shift().apply_shift(), &psi),
            IDENTITY_TOLERANCE,
        );
        let alpha = rng.gen_range(-PI..PI);
        let beta = rng.gen_range(-PI..PI);
        let marked = MarkedVertex::new(&spec, VertexId(i % spec.num_vertices())).expect("in range");
        let before = psi.inner(&phi).expect("same spec");
        let coin = psi
            .apply_coin(alpha)
            .inner(&phi.apply_coin(alpha))
            .expect("same spec");
        t.residual_below((coin - before).norm(), IDENTITY_TOLERANCE);
        let oracle = psi
            .apply_oracle(beta, marked)
            .and_then(|a| a.inner(&phi.apply_oracle(beta, marked)?));
        match oracle {
            Ok(o) => t.residual_below((o - before).norm(), IDENTITY_TOLERANCE),
            Err(e) => t.error(e),
        }
    }
    t.finish("unitarity")
}

/// Orthonormality of every reduced basis.
pub fn suite_gram(max_size: usize) -> SuiteResult {
    let mut t = Tally::residual();
    for m in 3..=max_size {
        for n in 2..=max_size {
            let spec = BipartiteSpec::new(m, n).expect("positive");
            let bases = [
                stage1_basis(&spec, VertexId(0)),
                stage2_same_basis(&spec, VertexId(1)),
                stage2_diff_basis(&spec, VertexId(m)),
                combined_same_basis(&spec, VertexId(0), VertexId(1)),
                combined_diff_basis(&spec, VertexId(0), VertexId(m)),
            ];
            for b in bases {
                match b {
                    Ok(b) => t.residual_below(b.gram_residual(), IDENTITY_TOLERANCE),
                    Err(e) => t.error(e),
                }
            }
        }
    }
    t.finish("gram")
}

/// Coin, oracle and braiding factorisations over random draws.
pub fn suite_decompositions(draws: usize) -> SuiteResult {
    let mut t = Tally::residual();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    for _ in 0..draws {
        let alpha = rng.gen_range(-PI..PI);
        let beta = rng.gen_range(-PI..PI);
        let w = omega(rng.gen_range(2..200));
        let report = verify_decompositions(alpha, beta, w, 1, &mut rng);
        t.residual_below(report.max_residual(), IDENTITY_TOLERANCE);
    }
    t.finish("decompositions")
}

/// Quasi-Chebyshev collapse and `T_h(1/gamma) = 1/sqrt(eps)`.
pub fn suite_quasi_chebyshev(samples: usize) -> SuiteResult {
    let mut t = Tally::residual();
    for h in [3usize, 5, 7, 9] {
        for eps in [1.0, 0.25, 0.04] {
            let (g, deltas) = match (gamma(h, eps), fixed_point_phase_deltas(h, eps)) {
                (Ok(g), Ok(d)) => (g, d),
                (Err(e), _) | (_, Err(e)) => {
                    t.error(e);
                    continue;
                }
            };
            let top = chebyshev(h as u32, 1.0 / g);
            t.residual_below((top - 1.0 / eps.sqrt()).abs(), CLOSED_FORM_TOLERANCE);
            for i in 0..samples {
                let x = i as f64 / (samples - 1).max(1) as f64;
                let a = quasi_chebyshev(x, &deltas).norm();
                let want = (chebyshev(h as u32, x / g) / top).abs();
                t.residual_below((a - want).abs(), CLOSED_FORM_TOLERANCE);
            }
        }
    }
    t.finish("quasi-chebyshev")
}

fn stage_fidelity(
    source: &ScheduleSource,
    stage: Stage,
    m: usize,
    n: usize,
    eps: f64,
) -> Result<(f64, f64)> {
    let spec = BipartiteSpec::new(m, n)?;
    let (start, marked, target, d, h) = match stage {
        Stage::Stage1 => (
            initial_state(&spec, VertexId(0))?,
            VertexId(0),
            side_state(&spec, Side::Right),
            m,
            min_steps(eps, m, Parity::Odd)?,
        ),
        Stage::Stage2Same => (
            side_state(&spec, Side::Right),
            VertexId(1),
            target_state(&spec, VertexId(1))?,
            m,
            min_steps(eps, m, Parity::Odd)?,
        ),
        Stage::Stage2Diff => (
            side_state(&spec, Side::Right),
            VertexId(m),
            target_state(&spec, VertexId(m))?,
            n,
            min_steps(eps, n, Parity::Even)?,
        ),
    };
    let schedule = source(stage, h, eps)?;
    let out = start.evolve(&schedule, MarkedVertex::new(&spec, marked)?)?;
    let simulated = fidelity(&target, &out)?;
    Ok((simulated, predicted_stage_fidelity(h, eps, d, stage)?))
}

/// Stage fidelity at least `1 - eps` and equal to the closed form.
pub fn suite_stage(source: &ScheduleSource, stage: Stage, sizes: &[usize]) -> SuiteResult {
    let mut t = Tally::margin();
    let mut closed: f64 = 0.0;
    for &d in sizes {
        for eps in [0.25, 0.04, 0.01] {
            // The mixing partition has size d; the other side is kept small.
            let (m, n) = match stage {
                Stage::Stage1 | Stage::Stage2Same => (d, 3),
                Stage::Stage2Diff => (3, d),
            };
            match stage_fidelity(source, stage, m, n, eps) {
                Ok((f, want)) => {
                    t.margin_above(f, 1.0 - eps);
                    closed = closed.max((f - want).abs());
                }
                Err(e) => t.error(e),
            }
        }
    }
    if closed >= CLOSED_FORM_TOLERANCE {
        t.failed = true;
    }
    t.note = format!("closed-form gap {closed:.1e}");
    t.finish(match stage {
        Stage::Stage1 => "stage1",
        Stage::Stage2Same => "stage2-same",
        Stage::Stage2Diff => "stage2-diff",
    })
}

/// Full-space and reduced runs agree on every small graph.
pub fn suite_backends(max_size: usize) -> SuiteResult {
    let mut t = Tally::residual();
    for m in 2..=max_size {
        for n in 2..=max_size {
            for receiver in [1, m] {
                let cfg =
                    TransferConfig::new(m, n, 0, receiver, 0.04, 0.04).with_backend(Backend::Both);
                match run(&cfg) {
                    Ok(r) => t.residual_below(
                        r.backend_disagreement.unwrap_or(f64::INFINITY),
                        BACKEND_TOLERANCE,
                    ),
                    Err(e) => t.error(e),
                }
            }
        }
    }
    t.finish("backends")
}

/// End-to-end fidelity above the closed-form bound.
pub fn suite_bounds(max_size: usize, epsilons: &[f64]) -> SuiteResult {
    let mut t = Tally::margin();
    for m in 3..=max_size {
        for n in 3..=max_size {
            for &eps in epsilons {
                for receiver in [1, m] {
                    let cfg = TransferConfig::new(m, n, 0, receiver, eps, eps)
                        .with_backend(Backend::Subspace);
                    match run(&cfg) {
                        Ok(r) => t.margin_above(r.f, r.bound),
                        Err(e) => t.error(e),
                    }
                }
            }
        }
    }
    t.finish("bounds")
}

/// Runs every suite with the given schedules.
pub fn run_suites_with(level: Level, source: &ScheduleSource) -> Vec<SuiteResult> {
    let full = level == Level::Full;
    let stage_sizes: &[usize] = if full { &[3, 10, 100] } else { &[3, 10] };
    vec![
        suite_unitarity(if full { 100 } else { 25 }),
        suite_gram(if full { 8 } else { 5 }),
        suite_decompositions(if full { 100 } else { 25 }),
        suite_quasi_chebyshev(20),
        suite_stage(source, Stage::Stage1, stage_sizes),
        suite_stage(source, Stage::Stage2Same, stage_sizes),
        suite_stage(source, Stage::Stage2Diff, stage_sizes),
        suite_backends(if full { 8 } else { 4 }),
        if full {
            suite_bounds(20, &[0.25, 0.04, 0.01])
        } else {
            suite_bounds(8, &[0.04])
        },
    ]
}

pub fn run_suites(level: Level) -> Vec<SuiteResult> {
    run_suites_with(level, &standard_schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_level_passes() {
        let results = run_suites(Level::Fast);
        assert_eq!(results.len(), 9);
        for r in &results {
            assert!(r.passed, "{r}");
            assert!(r.checks > 0);
        }
    }

    #[test]
    fn tampered_sign_fails_stage1() {
        let tampered = |stage: Stage, h: usize, eps: f64| {
            let s = standard_schedule(stage, h, eps)?;
            Ok(if stage == Stage::Stage1 {
                s.negate_beta(3)
            } else {
                s
            })
        };
        let r = suite_stage(&tampered, Stage::Stage1, &[3, 10]);
        assert!(!r.passed, "{r}");
        assert!(suite_stage(&tampered, Stage::Stage2Same, &[3, 10]).passed);
    }

    #[test]
    fn box_pairing_fails_stage2_diff() {
        let boxed = |stage: Stage, h: usize, eps: f64| match stage {
            Stage::Stage2Diff => stage2_diff_schedule(h, eps, Pairing::AlgorithmBox),
            other => standard_schedule(other, h, eps),
        };
        assert!(!suite_stage(&boxed, Stage::Stage2Diff, &[10]).passed);
    }

    #[test]
    fn display_line() {
        let r = suite_quasi_chebyshev(3);
        let line = r.to_string();
        assert!(line.starts_with("PASS"));
        assert!(line.contains("quasi-chebyshev"));
    }

    #[test]
    fn level_parse() {
        assert_eq!("full".parse::<Level>().unwrap(), Level::Full);
        assert!("slow".parse::<Level>().is_err());
    }
}
