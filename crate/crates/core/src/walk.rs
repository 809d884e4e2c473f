// SPDX-License-Identifier: Apache-2.0

//! Full arc-space simulation of the generalized Grover walk
//! `U(alpha, beta) = S C(alpha) Q(beta)` on `K_{m,n}`.
//!
//! Operators never build a `2mn x 2mn` matrix. The coin acts on each
//! source-vertex block with the rank-one update
//! `psi <- (1 - e^{-i alpha}) <Psi_u|psi> |Psi_u> - psi`, the shift is a
//! transpose between the left and right arc blocks, and the oracle rescales
//! one block.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{ArcId, BipartiteSpec, VertexId};
use crate::schedule::AngleSchedule;

/// Norm tolerance accepted by [`StateVector::from_amplitudes`].
pub const NORM_TOLERANCE: f64 = 1e-9;

/// The vertex whose outgoing arcs pick up the oracle phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkedVertex(VertexId);

impl MarkedVertex {
    pub fn new(spec: &BipartiteSpec, vertex: VertexId) -> Result<Self> {
        spec.check(vertex)?;
        Ok(MarkedVertex(vertex))
    }

    pub fn vertex(&self) -> VertexId {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    spec: BipartiteSpec,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(spec: BipartiteSpec, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != spec.num_arcs() {
            return Err(Error::DimensionMismatch {
                expected: spec.num_arcs(),
                found: amplitudes.len(),
            });
        }
        let state = StateVector { spec, amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Scales `amplitudes` to unit norm.
    pub fn normalized(spec: BipartiteSpec, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        StateVector::from_amplitudes(spec, amplitudes)
    }

    pub(crate) fn from_raw(spec: BipartiteSpec, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), spec.num_arcs());
        StateVector { spec, amplitudes }
    }

    /// Uniform superposition over the arcs leaving `vertex`.
    pub fn localized(spec: BipartiteSpec, vertex: VertexId) -> Result<Self> {
        let block = spec.arc_block(vertex)?;
        let amp = Complex64::new(1.0 / (block.len() as f64).sqrt(), 0.0);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); spec.num_arcs()];
        for a in &mut amplitudes[block] {
            *a = amp;
        }
        Ok(StateVector { spec, amplitudes })
    }

    pub fn spec(&self) -> &BipartiteSpec {
        &self.spec
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, u: VertexId, v: VertexId) -> Result<Complex64> {
        Ok(self.amplitudes[self.spec.arc_index(u, v)?.0])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        Ok(inner_raw(&self.amplitudes, &other.amplitudes))
    }

    pub fn apply_shift(&self) -> StateVector {
        let mut out = self.clone();
        shift_in_place(&self.spec, &mut out.amplitudes);
        out
    }

    pub fn apply_coin(&self, alpha: f64) -> StateVector {
        let mut out = self.clone();
        coin_in_place(&self.spec, &mut out.amplitudes, alpha);
        out
    }

    pub fn apply_oracle(&self, beta: f64, marked: MarkedVertex) -> Result<StateVector> {
        self.spec.check(marked.vertex())?;
        let mut out = self.clone();
        oracle_in_place(&self.spec, &mut out.amplitudes, beta, marked.vertex());
        Ok(out)
    }

    /// One step `S C(alpha) Q(beta)`: oracle first, then coin, then shift.
    pub fn step(&self, alpha: f64, beta: f64, marked: MarkedVertex) -> Result<StateVector> {
        self.spec.check(marked.vertex())?;
        let mut out = self.clone();
        step_in_place(
            &self.spec,
            &mut out.amplitudes,
            alpha,
            beta,
            marked.vertex(),
        );
        Ok(out)
    }

    /// Applies `U(alpha_t, beta_t)` for `t = 1..=h`.
    pub fn evolve(&self, schedule: &AngleSchedule, marked: MarkedVertex) -> Result<StateVector> {
        self.spec.check(marked.vertex())?;
        let mut out = self.clone();
        for (alpha, beta) in schedule.steps() {
            step_in_place(
                &self.spec,
                &mut out.amplitudes,
                alpha,
                beta,
                marked.vertex(),
            );
        }
        Ok(out)
    }

    /// One line per arc, `u,v,re,im`, reals with 17 significant digits.
    pub fn to_dump(&self) -> String {
        let mut out = String::with_capacity(self.amplitudes.len() * 52);
        for (i, a) in self.amplitudes.iter().enumerate() {
            let (u, v) = self
                .spec
                .arc_endpoints(ArcId(i))
                .expect("index below num_arcs");
            writeln!(out, "{},{},{:.16e},{:.16e}", u, v, a.re, a.im).expect("write to String");
        }
        out
    }

    /// Parses the format written by [`to_dump`](Self::to_dump). Lines may
    /// come in any order but every arc must appear exactly once.
    pub fn from_dump(spec: BipartiteSpec, text: &str) -> Result<StateVector> {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); spec.num_arcs()];
        let mut seen = vec![false; spec.num_arcs()];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| Error::Parse {
                line: lineno + 1,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(bad("expected 4 comma-separated fields"));
            }
            let u: usize = fields[0]
                .trim()
                .parse()
                .map_err(|_| bad("bad source vertex"))?;
            let v: usize = fields[1]
                .trim()
                .parse()
                .map_err(|_| bad("bad target vertex"))?;
            let re: f64 = fields[2].trim().parse().map_err(|_| bad("bad real part"))?;
            let im: f64 = fields[3]
                .trim()
                .parse()
                .map_err(|_| bad("bad imaginary part"))?;
            let arc = spec.arc_index(VertexId(u), VertexId(v))?;
            if seen[arc.0] {
                return Err(bad("duplicate arc"));
            }
            seen[arc.0] = true;
            amplitudes[arc.0] = Complex64::new(re, im);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            let (u, v) = spec.arc_endpoints(ArcId(missing))?;
            return Err(Error::Parse {
                line: 0,
                reason: format!("arc ({u},{v}) missing"),
            });
        }
        StateVector::from_amplitudes(spec, amplitudes)
    }
}

/// Uniform superposition over the arcs leaving `sender`.
pub fn initial_state(spec: &BipartiteSpec, sender: VertexId) -> Result<StateVector> {
    StateVector::localized(*spec, sender)
}

/// Uniform superposition over the arcs leaving `receiver`.
pub fn target_state(spec: &BipartiteSpec, receiver: VertexId) -> Result<StateVector> {
    StateVector::localized(*spec, receiver)
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

pub(crate) fn inner_raw(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn shift_in_place(spec: &BipartiteSpec, amps: &mut [Complex64]) {
    let (m, n) = (spec.m(), spec.n());
    let (left, right) = amps.split_at_mut(m * n);
    // (u, m+j) sits at u*n + j in the left half; (m+j, u) at j*m + u in the right half.
    for u in 0..m {
        for j in 0..n {
            std::mem::swap(&mut left[u * n + j], &mut right[j * m + u]);
        }
    }
}

pub(crate) fn coin_in_place(spec: &BipartiteSpec, amps: &mut [Complex64], alpha: f64) {
    let weight = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -alpha);
    let (m, n) = (spec.m(), spec.n());
    let (left, right) = amps.split_at_mut(m * n);
    for block in left.chunks_exact_mut(n).chain(right.chunks_exact_mut(m)) {
        let mean = block.iter().sum::<Complex64>() / block.len() as f64;
        let shared = weight * mean;
        for a in block.iter_mut() {
            *a = shared - *a;
        }
    }
}

pub(crate) fn oracle_in_place(
    spec: &BipartiteSpec,
    amps: &mut [Complex64],
    beta: f64,
    marked: VertexId,
) {
    let phase = Complex64::from_polar(1.0, beta);
    let block = spec.arc_block(marked).expect("marked vertex validated");
    for a in &mut amps[block] {
        *a *= phase;
    }
}

pub(crate) fn step_in_place(
    spec: &BipartiteSpec,
    amps: &mut [Complex64],
    alpha: f64,
    beta: f64,
    marked: VertexId,
) {
    oracle_in_place(spec, amps, beta, marked);
    coin_in_place(spec, amps, alpha);
    shift_in_place(spec, amps);
}
