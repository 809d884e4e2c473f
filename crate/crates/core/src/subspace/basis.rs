// SPDX-License-Identifier: Apache-2.0

//! Orthonormal bases of the walk-invariant subspaces.
//!
//! Every basis vector is the normalised uniform superposition over one class
//! of arcs, where a class is fixed by which distinguished vertex (sender,
//! receiver, or "any other vertex on this side") sits at each end of the arc.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{BipartiteSpec, Side, VertexId};
use crate::walk::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// Sender marked, 4 vectors.
    Stage1,
    /// Receiver marked on the sender's side, 4 vectors.
    Stage2Same,
    /// Receiver marked on the opposite side, 4 vectors.
    Stage2Diff,
    /// Both stages, sender and receiver on one side, 6 vectors.
    CombinedSame,
    /// Both stages, sender and receiver on opposite sides, 8 vectors.
    CombinedDiff,
}

impl BasisKind {
    pub fn dim(self) -> usize {
        match self {
            BasisKind::Stage1 | BasisKind::Stage2Same | BasisKind::Stage2Diff => 4,
            BasisKind::CombinedSame => 6,
            BasisKind::CombinedDiff => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Stage1 => "stage-1",
            BasisKind::Stage2Same => "same-side stage-2",
            BasisKind::Stage2Diff => "opposite-side stage-2",
            BasisKind::CombinedSame => "combined same-side",
            BasisKind::CombinedDiff => "combined opposite-side",
        }
    }

    pub fn is_stage(self) -> bool {
        self.dim() == 4
    }
}

#[derive(Debug, Clone)]
pub struct ReducedBasis {
    kind: BasisKind,
    spec: BipartiteSpec,
    vectors: Vec<StateVector>,
    sender: Option<VertexId>,
    receiver: Option<VertexId>,
    /// Basis index of every arc.
    classes: Vec<usize>,
    /// `1 / sqrt(class size)` per basis vector.
    weights: Vec<f64>,
}

impl ReducedBasis {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn spec(&self) -> &BipartiteSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn sender(&self) -> Option<VertexId> {
        self.sender
    }

    pub fn receiver(&self) -> Option<VertexId> {
        self.receiver
    }

    /// `<e_k|psi>` for every `k` in one pass over the amplitudes.
    pub(crate) fn coords_of(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (&k, a) in self.classes.iter().zip(amps) {
            out[k] += a;
        }
        for (c, w) in out.iter_mut().zip(&self.weights) {
            *c *= w;
        }
        out
    }

    /// Norm of `psi - sum_k c_k e_k` for `c = coords_of(psi)`.
    pub(crate) fn residual_norm(&self, amps: &[Complex64], coords: &[Complex64]) -> f64 {
        self.classes
            .iter()
            .zip(amps)
            .map(|(&k, a)| (a - coords[k] * self.weights[k]).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `max |<e_i|e_j> - delta_ij|`.
    pub fn gram_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                let g = a.inner(b).expect("basis vectors share a spec");
                worst = worst.max((g - Complex64::new(want, 0.0)).norm());
            }
        }
        worst
    }
}

fn require_side(spec: &BipartiteSpec, v: VertexId, side: Side, role: &str) -> Result<()> {
    if spec.side(v)? != side {
        return Err(Error::InvalidConfig(format!(
            "{role} {v} must be on the {} side",
            match side {
                Side::Left => "left",
                Side::Right => "right",
            }
        )));
    }
    Ok(())
}

fn degenerate(what: &str, spec: &BipartiteSpec) -> Error {
    Error::DegenerateSize(format!("{what} on {spec}"))
}

/// Builds one vector per class from `classify(u, v)`; every class must be
/// non-empty.
fn build(
    spec: &BipartiteSpec,
    kind: BasisKind,
    sender: Option<VertexId>,
    receiver: Option<VertexId>,
    classify: impl Fn(VertexId, VertexId) -> usize,
) -> Result<ReducedBasis> {
    let dim = kind.dim();
    let classes: Vec<usize> = spec.arcs().map(|(u, v)| classify(u, v)).collect();
    let mut counts = vec![0usize; dim];
    for &c in &classes {
        counts[c] += 1;
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(degenerate(
            &format!("{} basis vector e{} is empty", kind.name(), empty + 1),
            spec,
        ));
    }
    let vectors = (0..dim)
        .map(|k| {
            let amp = Complex64::new(1.0 / (counts[k] as f64).sqrt(), 0.0);
            let amps = classes
                .iter()
                .map(|&c| {
                    if c == k {
                        amp
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            StateVector::from_raw(*spec, amps)
        })
        .collect();
    Ok(ReducedBasis {
        kind,
        spec: *spec,
        vectors,
        sender,
        receiver,
        weights: counts.iter().map(|&c| 1.0 / (c as f64).sqrt()).collect(),
        classes,
    })
}

/// `e1` out of `anchor`, `e2` into `anchor`, `e3` from the far side into the
/// rest of `anchor`'s side, `e4` from the rest of `anchor`'s side outward.
fn anchored(spec: &BipartiteSpec, kind: BasisKind, anchor: VertexId) -> Result<ReducedBasis> {
    let side = spec.side(anchor)?;
    let classify = |u: VertexId, v: VertexId| {
        if u == anchor {
            0
        } else if v == anchor {
            1
        } else if spec.side(u).expect("arc endpoint in range") == side {
            3
        } else {
            2
        }
    };
    let (sender, receiver) = match kind {
        BasisKind::Stage1 => (Some(anchor), None),
        _ => (None, Some(anchor)),
    };
    build(spec, kind, sender, receiver, classify)
}

/// Basis for the sender-marked stage; the sender must be on the left and
/// `m >= 2`.
pub fn stage1_basis(spec: &BipartiteSpec, sender: VertexId) -> Result<ReducedBasis> {
    require_side(spec, sender, Side::Left, "sender")?;
    if spec.m() < 2 {
        return Err(degenerate("stage-1 basis needs m >= 2", spec));
    }
    anchored(spec, BasisKind::Stage1, sender)
}

pub fn stage2_same_basis(spec: &BipartiteSpec, receiver: VertexId) -> Result<ReducedBasis> {
    require_side(spec, receiver, Side::Left, "receiver")?;
    if spec.m() < 2 {
        return Err(degenerate("same-side stage-2 basis needs m >= 2", spec));
    }
    anchored(spec, BasisKind::Stage2Same, receiver)
}

/// Receiver on the right, `n >= 2`. `e3` runs from the left into the other
/// right vertices and `e4` back out of them.
pub fn stage2_diff_basis(spec: &BipartiteSpec, receiver: VertexId) -> Result<ReducedBasis> {
    require_side(spec, receiver, Side::Right, "receiver")?;
    if spec.n() < 2 {
        return Err(degenerate("opposite-side stage-2 basis needs n >= 2", spec));
    }
    anchored(spec, BasisKind::Stage2Diff, receiver)
}

/// Six vectors: out of / into the sender, out of / into the receiver, and the
/// two directions between the remaining left vertices and the right side.
pub fn combined_same_basis(
    spec: &BipartiteSpec,
    sender: VertexId,
    receiver: VertexId,
) -> Result<ReducedBasis> {
    require_side(spec, sender, Side::Left, "sender")?;
    require_side(spec, receiver, Side::Left, "receiver")?;
    if sender == receiver {
        return Err(Error::InvalidConfig("sender and receiver coincide".into()));
    }
    if spec.m() < 3 {
        return Err(degenerate("combined same-side basis needs m >= 3", spec));
    }
    let classify = |u: VertexId, v: VertexId| {
        if u == sender {
            0
        } else if v == sender {
            1
        } else if u == receiver {
            2
        } else if v == receiver {
            3
        } else if u.0 < spec.m() {
            4
        } else {
            5
        }
    };
    build(
        spec,
        BasisKind::CombinedSame,
        Some(sender),
        Some(receiver),
        classify,
    )
}

/// Eight vectors: `|sr>`, `|rs>`, then sender / receiver arcs to and from
/// the other vertices of the far side, then the bulk in both directions.
pub fn combined_diff_basis(
    spec: &BipartiteSpec,
    sender: VertexId,
    receiver: VertexId,
) -> Result<ReducedBasis> {
    require_side(spec, sender, Side::Left, "sender")?;
    require_side(spec, receiver, Side::Right, "receiver")?;
    if spec.m() < 2 || spec.n() < 2 {
        return Err(degenerate(
            "combined opposite-side basis needs m, n >= 2",
            spec,
        ));
    }
    let classify = |u: VertexId, v: VertexId| {
        let left = u.0 < spec.m();
        match (u == sender, v == receiver, u == receiver, v == sender) {
            (true, true, _, _) => 0,
            (_, _, true, true) => 1,
            (true, false, _, _) => 2,
            (_, _, false, true) => 3,
            (false, true, _, _) => 4,
            (_, _, true, false) => 5,
            _ if left => 6,
            _ => 7,
        }
    };
    build(
        spec,
        BasisKind::CombinedDiff,
        Some(sender),
        Some(receiver),
        classify,
    )
}
