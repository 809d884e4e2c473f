// SPDX-License-Identifier: Apache-2.0

//! Reduced-space simulation on the symmetric invariant subspaces.
//!
//! Stage bases use the closed-form `4x4` matrices. The six- and
//! eight-dimensional bases compress the full-space shift, coin projector and
//! marked projector once and reuse them for every step.

mod basis;
mod matrix;

pub use basis::{
    combined_diff_basis, combined_same_basis, stage1_basis, stage2_diff_basis, stage2_same_basis,
    BasisKind, ReducedBasis,
};
pub use matrix::{
    coin_matrix, mixer_a, omega, oracle_matrix, rotation_r, shift_matrix, verify_decompositions,
    DecompositionReport, ReducedMatrix,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{BipartiteSpec, Side};
use crate::schedule::AngleSchedule;
use crate::walk::{self, MarkedVertex, StateVector, NORM_TOLERANCE};

/// Largest out-of-span component tolerated before a basis is rejected.
pub const LEAKAGE_TOLERANCE: f64 = 1e-10;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReducedOp {
    Shift,
    Coin(f64),
    Oracle(f64),
}

/// Coordinates `<e_i|psi>`.
pub fn project(state: &StateVector, basis: &ReducedBasis) -> Result<Vec<Complex64>> {
    if state.spec() != basis.spec() {
        return Err(Error::SpecMismatch);
    }
    Ok(basis.coords_of(state.amplitudes()))
}

/// `sum_i c_i e_i`.
pub fn lift(coords: &[Complex64], basis: &ReducedBasis) -> Result<StateVector> {
    check_dim(coords, basis.dim())?;
    let mut amps = vec![Complex64::new(0.0, 0.0); basis.spec().num_arcs()];
    for (c, e) in coords.iter().zip(basis.vectors()) {
        for (a, b) in amps.iter_mut().zip(e.amplitudes()) {
            *a += c * b;
        }
    }
    Ok(StateVector::from_raw(*basis.spec(), amps))
}

/// Norm of the component of `state` outside the span, `sqrt(1 - |coords|^2)`.
pub fn leakage(state: &StateVector, basis: &ReducedBasis) -> Result<f64> {
    let coords = project(state, basis)?;
    let inside: f64 = coords.iter().map(|c| c.norm_sqr()).sum();
    Ok((state.norm().powi(2) - inside).max(0.0).sqrt())
}

fn check_dim(coords: &[Complex64], dim: usize) -> Result<()> {
    if coords.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: coords.len(),
        });
    }
    Ok(())
}

/// Degree of the far-side vertices that mix the anchor's arcs with the rest.
fn stage_degree(kind: BasisKind, spec: &BipartiteSpec) -> Result<usize> {
    match kind {
        BasisKind::Stage1 | BasisKind::Stage2Same => Ok(spec.m()),
        BasisKind::Stage2Diff => Ok(spec.n()),
        other => Err(Error::UnsupportedBasis(other.name())),
    }
}

/// Closed-form reduced operator on a stage basis.
pub fn reduced_operator(
    op: ReducedOp,
    kind: BasisKind,
    spec: &BipartiteSpec,
) -> Result<ReducedMatrix> {
    let d = stage_degree(kind, spec)?;
    Ok(match op {
        ReducedOp::Shift => shift_matrix(),
        ReducedOp::Coin(alpha) => coin_matrix(alpha, omega(d)),
        ReducedOp::Oracle(beta) => oracle_matrix(beta),
    })
}

/// `B^dagger Op B` with `Op` given by its action on full-space amplitudes,
/// together with the largest out-of-span residual over the basis vectors.
fn compress(basis: &ReducedBasis, op: impl Fn(&mut [Complex64])) -> (ReducedMatrix, f64) {
    let mut out = ReducedMatrix::zeros(basis.dim());
    let mut worst: f64 = 0.0;
    for (j, e) in basis.vectors().iter().enumerate() {
        let mut image = e.amplitudes().to_vec();
        op(&mut image);
        let coords = basis.coords_of(&image);
        worst = worst.max(basis.residual_norm(&image, &coords));
        for (i, c) in coords.into_iter().enumerate() {
            out[(i, j)] = c;
        }
    }
    (out, worst)
}

#[derive(Debug, Clone)]
enum Engine {
    Closed {
        omega: f64,
    },
    Compressed {
        shift: ReducedMatrix,
        projector: ReducedMatrix,
        marked: ReducedMatrix,
    },
}

/// Step operator of one marked vertex restricted to a basis.
#[derive(Debug, Clone)]
pub struct ReducedWalk {
    kind: BasisKind,
    dim: usize,
    engine: Engine,
    leakage: f64,
}

impl ReducedWalk {
    /// Fails with `NotInvariant` when the span is not closed under the shift,
    /// the coin or the oracle for `marked`.
    pub fn new(basis: &ReducedBasis, marked: MarkedVertex) -> Result<Self> {
        let spec = *basis.spec();
        let v = marked.vertex();
        spec.check(v)?;
        let kind = basis.kind();
        if kind.is_stage() {
            let anchor = basis
                .sender()
                .or(basis.receiver())
                .expect("stage basis has an anchor");
            if anchor != v {
                return Err(Error::InvalidConfig(format!(
                    "{} basis is anchored at {anchor}, not {v}",
                    kind.name()
                )));
            }
        } else if Some(v) != basis.sender() && Some(v) != basis.receiver() {
            return Err(Error::InvalidConfig(format!(
                "marked vertex {v} is neither sender nor receiver"
            )));
        }

        // C(pi) = 2P - I, so P = (C(pi) + I) / 2.
        let (shift, l_shift) = compress(basis, |a| walk::shift_in_place(&spec, a));
        let (projector, l_coin) = compress(basis, |a| {
            let copy = a.to_vec();
            walk::coin_in_place(&spec, a, std::f64::consts::PI);
            for (x, y) in a.iter_mut().zip(copy) {
                *x = (*x + y) / 2.0;
            }
        });
        let (marked_proj, l_oracle) = compress(basis, |a| {
            let block = spec.arc_block(v).expect("marked vertex validated");
            for (i, x) in a.iter_mut().enumerate() {
                if !block.contains(&i) {
                    *x = Complex64::new(0.0, 0.0);
                }
            }
        });
        let leakage = l_shift.max(l_coin).max(l_oracle);
        if leakage > LEAKAGE_TOLERANCE {
            return Err(Error::NotInvariant { leakage });
        }

        let engine = if kind.is_stage() {
            Engine::Closed {
                omega: omega(stage_degree(kind, &spec)?),
            }
        } else {
            Engine::Compressed {
                shift,
                projector,
                marked: marked_proj,
            }
        };
        Ok(Self {
            kind,
            dim: basis.dim(),
            engine,
            leakage,
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest out-of-span residual seen while building the operators.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    /// `S C(alpha) Q(beta)` in basis coordinates.
    pub fn step_matrix(&self, alpha: f64, beta: f64) -> ReducedMatrix {
        match &self.engine {
            Engine::Closed { omega } => {
                let sc = &shift_matrix() * &coin_matrix(alpha, *omega);
                &sc * &oracle_matrix(beta)
            }
            Engine::Compressed {
                shift,
                projector,
                marked,
            } => {
                let identity = ReducedMatrix::identity(self.dim);
                let coin = projector
                    .scale(ONE - Complex64::from_polar(1.0, -alpha))
                    .add_scaled(-ONE, &identity);
                let oracle = identity.add_scaled(Complex64::from_polar(1.0, beta) - ONE, marked);
                &(shift * &coin) * &oracle
            }
        }
    }

    /// Applies the schedule to normalised coordinates.
    pub fn evolve(&self, coords: &[Complex64], schedule: &AngleSchedule) -> Result<Vec<Complex64>> {
        check_dim(coords, self.dim)?;
        let norm = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        let mut state = coords.to_vec();
        for (alpha, beta) in schedule.steps() {
            state = self.step_matrix(alpha, beta).apply(&state);
        }
        Ok(state)
    }
}

/// One-shot reduced evolution; see [`ReducedWalk`].
pub fn reduced_evolve(
    coords: &[Complex64],
    schedule: &AngleSchedule,
    basis: &ReducedBasis,
    marked: MarkedVertex,
) -> Result<Vec<Complex64>> {
    ReducedWalk::new(basis, marked)?.evolve(coords, schedule)
}

/// Uniform superposition over the arcs leaving `side`.
pub fn side_state(spec: &BipartiteSpec, side: Side) -> StateVector {
    let range = spec.partition(side);
    let amp = Complex64::new(1.0 / ((spec.m() * spec.n()) as f64).sqrt(), 0.0);
    let amps = spec
        .arcs()
        .map(|(u, _)| {
            if range.contains(&u.0) {
                amp
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    StateVector::from_raw(*spec, amps)
}
