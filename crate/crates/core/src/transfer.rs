// SPDX-License-Identifier: Apache-2.0

//! End-to-end two-stage transfer: stage 1 spreads the sender's state over
//! the arcs leaving the opposite partition, stage 2 focuses it onto the
//! receiver.
//!
//! A sender on the right partition is handled by running on the mirrored
//! graph, so internally the sender always sits on the left and `m` is the
//! size of its partition. Reports carry the caller's original labels.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{BipartiteSpec, Side, VertexId};
use crate::schedule::{
    check_epsilon, min_steps, stage1_schedule, stage2_diff_schedule, stage2_same_schedule,
    AngleSchedule, Pairing, Parity, DEFAULT_FREE_ANGLE,
};
use crate::subspace::{
    combined_diff_basis, combined_same_basis, project, side_state, stage1_basis, ReducedBasis,
    ReducedWalk,
};
use crate::walk::{fidelity, initial_state, target_state, MarkedVertex, StateVector};

/// Slack below the bound that still counts as a pass.
pub const BOUND_SLACK: f64 = 1e-12;

pub const CSV_HEADER: &str =
    "case,m,n,sender,receiver,eps1,eps2,h1,h2,F1,F2,F,bound,pass,backend_disagreement";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    SamePartition,
    DiffPartition,
}

impl Case {
    pub fn as_str(self) -> &'static str {
        match self {
            Case::SamePartition => "same",
            Case::DiffPartition => "diff",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    #[default]
    FullSpace,
    Subspace,
    Both,
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Backend::FullSpace),
            "subspace" => Ok(Backend::Subspace),
            "both" => Ok(Backend::Both),
            other => Err(Error::InvalidConfig(format!(
                "unknown backend {other:?} (expected full, subspace or both)"
            ))),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::FullSpace => "full",
            Backend::Subspace => "subspace",
            Backend::Both => "both",
        })
    }
}

/// Parses `box` or `theorem`.
pub fn parse_pairing(s: &str) -> Result<Pairing> {
    match s {
        "box" => Ok(Pairing::AlgorithmBox),
        "theorem" => Ok(Pairing::TheoremProof),
        other => Err(Error::InvalidConfig(format!(
            "unknown pairing {other:?} (expected box or theorem)"
        ))),
    }
}

pub fn pairing_name(p: Pairing) -> &'static str {
    match p {
        Pairing::AlgorithmBox => "box",
        Pairing::TheoremProof => "theorem",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferConfig {
    pub m: usize,
    pub n: usize,
    pub sender: VertexId,
    pub receiver: VertexId,
    pub eps1: f64,
    pub eps2: f64,
    pub backend: Backend,
    pub pairing: Pairing,
    pub free_angle: f64,
    pub h1_override: Option<usize>,
    pub h2_override: Option<usize>,
}

impl TransferConfig {
    /// Full-space run with the default pairing and free angle.
    pub fn new(m: usize, n: usize, sender: usize, receiver: usize, eps1: f64, eps2: f64) -> Self {
        Self {
            m,
            n,
            sender: VertexId(sender),
            receiver: VertexId(receiver),
            eps1,
            eps2,
            backend: Backend::FullSpace,
            pairing: Pairing::default(),
            free_angle: DEFAULT_FREE_ANGLE,
            h1_override: None,
            h2_override: None,
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_pairing(mut self, pairing: Pairing) -> Self {
        self.pairing = pairing;
        self
    }

    pub fn with_free_angle(mut self, angle: f64) -> Self {
        self.free_angle = angle;
        self
    }

    pub fn with_steps(mut self, h1: Option<usize>, h2: Option<usize>) -> Self {
        self.h1_override = h1;
        self.h2_override = h2;
        self
    }

    pub fn spec(&self) -> Result<BipartiteSpec> {
        BipartiteSpec::new(self.m, self.n)
    }

    /// Checks ids, epsilons, the free angle and override parities.
    pub fn validate(&self) -> Result<Case> {
        let case = classify_case(self)?;
        check_epsilon(self.eps1)?;
        check_epsilon(self.eps2)?;
        if !self.free_angle.is_finite() {
            return Err(Error::InvalidConfig("free angle must be finite".into()));
        }
        if let Some(h) = self.h1_override {
            check_odd(h)?;
        }
        if let Some(h) = self.h2_override {
            match case {
                Case::SamePartition => check_odd(h)?,
                Case::DiffPartition => check_even(h)?,
            }
        }
        Ok(case)
    }
}

fn check_odd(h: usize) -> Result<()> {
    if h < 3 || h.is_multiple_of(2) {
        return Err(Error::BadParity {
            h,
            expected: "an odd step count >= 3",
        });
    }
    Ok(())
}

fn check_even(h: usize) -> Result<()> {
    if h < 2 || h % 2 == 1 {
        return Err(Error::BadParity {
            h,
            expected: "an even step count >= 2",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub case: Case,
    pub m: usize,
    pub n: usize,
    pub sender: VertexId,
    pub receiver: VertexId,
    pub eps1: f64,
    pub eps2: f64,
    pub h1: usize,
    pub h2: usize,
    /// Overlap of the post-stage-1 state with the stage-1 target.
    pub f1: f64,
    /// Stage-2 fidelity obtained from the exact stage-1 target.
    pub f2: f64,
    /// End-to-end fidelity with the receiver's state.
    pub f: f64,
    pub bound: f64,
    pub bound_satisfied: bool,
    /// Weight of the post-stage-1 state along the arcs into the sender.
    pub t2_norm_sq: f64,
    /// Largest `|full - subspace|` over `F1`, `F2`, `F`; only for [`Backend::Both`].
    pub backend_disagreement: Option<f64>,
}

impl FidelityReport {
    /// One CSV row matching [`CSV_HEADER`]; an empty last field means a
    /// single backend ran.
    pub fn csv_row(&self) -> String {
        let disagreement = self
            .backend_disagreement
            .map(|d| format!("{d:.16e}"))
            .unwrap_or_default();
        format!(
            "{},{},{},{},{},{:.16e},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            self.case,
            self.m,
            self.n,
            self.sender,
            self.receiver,
            self.eps1,
            self.eps2,
            self.h1,
            self.h2,
            self.f1,
            self.f2,
            self.f,
            self.bound,
            self.bound_satisfied,
            disagreement
        )
    }
}

/// Same side or opposite sides.
pub fn classify_case(config: &TransferConfig) -> Result<Case> {
    let spec = config.spec()?;
    let s = spec.side(config.sender)?;
    let r = spec.side(config.receiver)?;
    if config.sender == config.receiver {
        return Err(Error::InvalidConfig(format!(
            "sender and receiver are both {}",
            config.sender
        )));
    }
    Ok(if s == r {
        Case::SamePartition
    } else {
        Case::DiffPartition
    })
}

/// Closed-form lower bound on the end-to-end fidelity; may be negative.
pub fn fidelity_lower_bound(case: Case, eps1: f64, eps2: f64) -> Result<f64> {
    check_epsilon(eps1)?;
    check_epsilon(eps2)?;
    let cross = (eps1 * eps2).sqrt();
    let root2 = std::f64::consts::SQRT_2;
    Ok(match case {
        Case::SamePartition => 1.0 - 2.0 * eps1 - eps2 - 2.0 * root2 * cross,
        Case::DiffPartition => {
            let k = 2.0 + 2.0 * root2;
            1.0 - k * eps1 - eps2 - k * cross
        }
    })
}

/// Graph and endpoints relabelled so the sender is on the left.
#[derive(Debug, Clone, Copy)]
struct Canonical {
    spec: BipartiteSpec,
    sender: VertexId,
    receiver: VertexId,
}

fn canonical(config: &TransferConfig) -> Result<Canonical> {
    let spec = config.spec()?;
    if spec.side(config.sender)? == Side::Left {
        return Ok(Canonical {
            spec,
            sender: config.sender,
            receiver: config.receiver,
        });
    }
    Ok(Canonical {
        spec: spec.mirrored(),
        sender: spec.mirror_vertex(config.sender)?,
        receiver: spec.mirror_vertex(config.receiver)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Fidelities {
    f1: f64,
    f2: f64,
    f: f64,
    t2_norm_sq: f64,
}

impl Fidelities {
    fn max_diff(&self, other: &Fidelities) -> f64 {
        (self.f1 - other.f1)
            .abs()
            .max((self.f2 - other.f2).abs())
            .max((self.f - other.f).abs())
    }
}

struct Plan {
    case: Case,
    canon: Canonical,
    h1: usize,
    h2: usize,
    stage1: AngleSchedule,
    stage2: AngleSchedule,
}

fn plan(config: &TransferConfig) -> Result<Plan> {
    let case = config.validate()?;
    let canon = canonical(config)?;
    let (m, n) = (canon.spec.m(), canon.spec.n());
    let h1 = match config.h1_override {
        Some(h) => h,
        None => min_steps(config.eps1, m, Parity::Odd)?,
    };
    let h2 = match (config.h2_override, case) {
        (Some(h), _) => h,
        (None, Case::SamePartition) => min_steps(config.eps2, m, Parity::Odd)?,
        (None, Case::DiffPartition) => min_steps(config.eps2, n, Parity::Even)?,
    };
    let stage1 = stage1_schedule(h1, config.eps1)?.with_free_angle(config.free_angle);
    let stage2 = match case {
        Case::SamePartition => stage2_same_schedule(h2, config.eps2)?,
        Case::DiffPartition => stage2_diff_schedule(h2, config.eps2, config.pairing)?,
    }
    .with_free_angle(config.free_angle);
    Ok(Plan {
        case,
        canon,
        h1,
        h2,
        stage1,
        stage2,
    })
}

/// Splits `psi = t1 Psi + t2 e` given `<Psi|psi>`, `<e|psi>` and `<Psi|e>`.
fn split_overlaps(
    on_target: Complex64,
    on_sender: Complex64,
    cross: Complex64,
) -> (Complex64, Complex64) {
    let det = 1.0 - cross.norm_sqr();
    let t1 = (on_target - cross * on_sender) / det;
    let t2 = (on_sender - cross.conj() * on_target) / det;
    (t1, t2)
}

fn full_space(plan: &Plan) -> Result<Fidelities> {
    let Canonical {
        spec,
        sender,
        receiver,
    } = plan.canon;
    let s = MarkedVertex::new(&spec, sender)?;
    let r = MarkedVertex::new(&spec, receiver)?;
    let spread = side_state(&spec, Side::Right);
    let target = target_state(&spec, receiver)?;

    let after1 = initial_state(&spec, sender)?.evolve(&plan.stage1, s)?;
    let f1 = fidelity(&spread, &after1)?;
    let f = fidelity(&target, &after1.evolve(&plan.stage2, r)?)?;
    let f2 = fidelity(&target, &spread.evolve(&plan.stage2, r)?)?;

    let into_sender = stage1_basis(&spec, sender)?.vectors()[1].clone();
    let (_, t2) = split_overlaps(
        spread.inner(&after1)?,
        into_sender.inner(&after1)?,
        spread.inner(&into_sender)?,
    );
    Ok(Fidelities {
        f1,
        f2,
        f,
        t2_norm_sq: t2.norm_sqr(),
    })
}

fn overlap_sq(a: &[Complex64], b: &[Complex64]) -> f64 {
    dot(a, b).norm_sqr().min(1.0)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn combined_basis(plan: &Plan) -> Result<ReducedBasis> {
    let Canonical {
        spec,
        sender,
        receiver,
    } = plan.canon;
    match plan.case {
        Case::SamePartition => combined_same_basis(&spec, sender, receiver),
        Case::DiffPartition => combined_diff_basis(&spec, sender, receiver),
    }
}

/// `None` when the reduced basis degenerates and the full space must be used.
fn subspace(plan: &Plan) -> Result<Option<Fidelities>> {
    let Canonical {
        spec,
        sender,
        receiver,
    } = plan.canon;
    if plan.case == Case::SamePartition && spec.m() < 3 {
        return Ok(None);
    }
    let basis = combined_basis(plan)?;
    let stage1 = ReducedWalk::new(&basis, MarkedVertex::new(&spec, sender)?)?;
    let stage2 = ReducedWalk::new(&basis, MarkedVertex::new(&spec, receiver)?)?;
    let coords = |state: &StateVector| project(state, &basis);
    let start = coords(&initial_state(&spec, sender)?)?;
    let spread = coords(&side_state(&spec, Side::Right))?;
    let target = coords(&target_state(&spec, receiver)?)?;
    let into_sender = coords(&stage1_basis(&spec, sender)?.vectors()[1])?;

    let after1 = stage1.evolve(&start, &plan.stage1)?;
    let f1 = overlap_sq(&spread, &after1);
    let f = overlap_sq(&target, &stage2.evolve(&after1, &plan.stage2)?);
    let f2 = overlap_sq(&target, &stage2.evolve(&spread, &plan.stage2)?);
    let (_, t2) = split_overlaps(
        dot(&spread, &after1),
        dot(&into_sender, &after1),
        dot(&spread, &into_sender),
    );
    Ok(Some(Fidelities {
        f1,
        f2,
        f,
        t2_norm_sq: t2.norm_sqr(),
    }))
}

fn execute(config: &TransferConfig, expected: Option<Case>) -> Result<FidelityReport> {
    let plan = plan(config)?;
    if let Some(case) = expected {
        if case != plan.case {
            return Err(Error::InvalidConfig(format!(
                "expected a {case} configuration, got {}",
                plan.case
            )));
        }
    }
    let (fid, disagreement) = match config.backend {
        Backend::FullSpace => (full_space(&plan)?, None),
        Backend::Subspace => match subspace(&plan)? {
            Some(f) => (f, None),
            None => (full_space(&plan)?, None),
        },
        Backend::Both => {
            let full = full_space(&plan)?;
            let reduced = subspace(&plan)?.unwrap_or(full);
            (full, Some(full.max_diff(&reduced)))
        }
    };
    let bound = fidelity_lower_bound(plan.case, config.eps1, config.eps2)?;
    Ok(FidelityReport {
        case: plan.case,
        m: config.m,
        n: config.n,
        sender: config.sender,
        receiver: config.receiver,
        eps1: config.eps1,
        eps2: config.eps2,
        h1: plan.h1,
        h2: plan.h2,
        f1: fid.f1,
        f2: fid.f2,
        f: fid.f,
        bound,
        bound_satisfied: fid.f > bound - BOUND_SLACK,
        t2_norm_sq: fid.t2_norm_sq,
        backend_disagreement: disagreement,
    })
}

/// Runs a configuration whose endpoints share a partition.
pub fn run_same_partition(config: &TransferConfig) -> Result<FidelityReport> {
    execute(config, Some(Case::SamePartition))
}

/// Runs a configuration whose endpoints lie in different partitions.
pub fn run_diff_partition(config: &TransferConfig) -> Result<FidelityReport> {
    execute(config, Some(Case::DiffPartition))
}

/// Runs either case.
pub fn run(config: &TransferConfig) -> Result<FidelityReport> {
    execute(config, None)
}

/// Coefficients of the post-stage-1 state along the stage-1 target and the
/// arcs into the sender, `psi = t1 Psi + t2 e2`.
pub fn stage1_overlap_diagnostics(
    spec: &BipartiteSpec,
    sender: VertexId,
    eps1: f64,
    h1: usize,
) -> Result<(Complex64, Complex64)> {
    let (spec, sender) = if spec.side(sender)? == Side::Left {
        (*spec, sender)
    } else {
        (spec.mirrored(), spec.mirror_vertex(sender)?)
    };
    if spec.m() < 2 {
        return Err(Error::DegenerateSize(format!(
            "stage-1 diagnostics need at least two vertices on the sender's side of {spec}"
        )));
    }
    let schedule = stage1_schedule(h1, eps1)?;
    let after =
        initial_state(&spec, sender)?.evolve(&schedule, MarkedVertex::new(&spec, sender)?)?;
    let spread = side_state(&spec, Side::Right);
    let into_sender = stage1_basis(&spec, sender)?.vectors()[1].clone();
    Ok(split_overlaps(
        spread.inner(&after)?,
        into_sender.inner(&after)?,
        spread.inner(&into_sender)?,
    ))
}
