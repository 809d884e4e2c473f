// SPDX-License-Identifier: Apache-2.0

//! Chebyshev machinery and the per-stage angle schedules.
//!
//! A schedule of length `h` holds the coin angles `alphas[t-1]` and oracle
//! angles `betas[t-1]` applied at step `t = 1..=h`. Only a subset of the
//! entries is fixed by the fixed-point construction; the rest are free and
//! take a configurable default.
//!
//! All `arccos` of arguments `>= 1` are evaluated through `acosh`, so
//! `gamma(h, eps) = 1 / cosh(acosh(1/sqrt(eps)) / h)`, which lies in `(0, 1]`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_FREE_ANGLE: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Odd,
    Even,
}

/// Which part of the transfer algorithm a schedule drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// Sender marked; moves the walker onto the opposite partition.
    Stage1,
    /// Receiver marked, receiver on the sender's side. Odd length.
    Stage2Same,
    /// Receiver marked, receiver on the opposite side. Even length.
    Stage2Diff,
}

/// How the oracle angles of the different-partition stage 2 are paired with
/// the coin angles. Only `TheoremProof` reaches the stage bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Pairing {
    /// `beta'_{h+2-k} = -alpha'_k`, betas fixed at even steps.
    AlgorithmBox,
    /// `beta'_{h+1-k} = -alpha'_k`, betas fixed at odd steps.
    #[default]
    TheoremProof,
}

pub fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(eps))
    }
}

/// Chebyshev polynomial of the first kind, `T_order(x)`.
///
/// Inside `[-1, 1]` the three-term recurrence is used; outside it the
/// hyperbolic form `cosh(order * acosh|x|)` with the sign of `x^order`.
pub fn chebyshev(order: u32, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        let (mut prev, mut cur) = (1.0, x);
        if order == 0 {
            return prev;
        }
        for _ in 1..order {
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    } else {
        let magnitude = (order as f64 * x.abs().acosh()).cosh();
        if x < 0.0 && order % 2 == 1 {
            -magnitude
        } else {
            magnitude
        }
    }
}

/// `arccot` with range `(0, pi)`; `arccot(0) = pi/2`, `arccot(+inf) = 0`,
/// `arccot(-inf) = pi`.
pub fn arccot(y: f64) -> f64 {
    PI / 2.0 - y.atan()
}

/// The fixed-point parameter `gamma` for `h` steps and tolerance `eps`.
pub fn gamma(h: usize, eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    if h == 0 {
        return Err(Error::BadParity {
            h,
            expected: "a positive step count",
        });
    }
    let spread = (1.0 / eps.sqrt()).acosh() / h as f64;
    Ok(1.0 / spread.cosh())
}

/// Smallest step count of the given parity with `h >= ln(2/sqrt(eps)) sqrt(d)`,
/// and at least 3 (odd) or 2 (even).
pub fn min_steps(eps: f64, d: usize, parity: Parity) -> Result<usize> {
    check_epsilon(eps)?;
    if d == 0 {
        return Err(Error::InvalidConfig(
            "partition size must be positive".into(),
        ));
    }
    let bound = (2.0 / eps.sqrt()).ln() * (d as f64).sqrt();
    let mut h = bound.ceil().max(1.0) as usize;
    match parity {
        Parity::Odd => {
            h = h.max(3);
            if h.is_multiple_of(2) {
                h += 1;
            }
        }
        Parity::Even => {
            h = h.max(2);
            if h % 2 == 1 {
                h += 1;
            }
        }
    }
    Ok(h)
}

/// `2 arccot(tan(k pi / order) sqrt(1 - gamma^2))`, the magnitude shared by
/// every constrained angle.
fn fixed_point_angle(k: usize, order: usize, gamma: f64) -> f64 {
    let spread = (1.0 - gamma * gamma).max(0.0).sqrt();
    2.0 * arccot((k as f64 * PI / order as f64).tan() * spread)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleSchedule {
    alphas: Vec<f64>,
    betas: Vec<f64>,
    alpha_fixed: Vec<bool>,
    beta_fixed: Vec<bool>,
    stage: Option<Stage>,
    epsilon: f64,
    gamma: f64,
    free_angle: f64,
}

impl AngleSchedule {
    fn blank(h: usize, stage: Stage, epsilon: f64, gamma: f64) -> Self {
        AngleSchedule {
            alphas: vec![DEFAULT_FREE_ANGLE; h],
            betas: vec![DEFAULT_FREE_ANGLE; h],
            alpha_fixed: vec![false; h],
            beta_fixed: vec![false; h],
            stage: Some(stage),
            epsilon,
            gamma,
            free_angle: DEFAULT_FREE_ANGLE,
        }
    }

    // `step` is 1-based throughout.
    fn fix_alpha(&mut self, step: usize, value: f64) {
        self.alphas[step - 1] = value;
        self.alpha_fixed[step - 1] = true;
    }

    fn fix_beta(&mut self, step: usize, value: f64) {
        self.betas[step - 1] = value;
        self.beta_fixed[step - 1] = true;
    }

    /// A schedule with explicit angles and no fixed-point structure.
    pub fn from_angles(alphas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::BadParity {
                h: 0,
                expected: "at least one step",
            });
        }
        if alphas.len() != betas.len() {
            return Err(Error::DimensionMismatch {
                expected: alphas.len(),
                found: betas.len(),
            });
        }
        let h = alphas.len();
        Ok(AngleSchedule {
            alphas,
            betas,
            alpha_fixed: vec![true; h],
            beta_fixed: vec![true; h],
            stage: None,
            epsilon: 1.0,
            gamma: 1.0,
            free_angle: DEFAULT_FREE_ANGLE,
        })
    }

    /// Replace every unconstrained angle by `angle`.
    pub fn with_free_angle(mut self, angle: f64) -> Self {
        for (a, fixed) in self.alphas.iter_mut().zip(&self.alpha_fixed) {
            if !fixed {
                *a = angle;
            }
        }
        for (b, fixed) in self.betas.iter_mut().zip(&self.beta_fixed) {
            if !fixed {
                *b = angle;
            }
        }
        self.free_angle = angle;
        self
    }

    pub fn h(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// `(alpha_t, beta_t)` for `t = 1..=h`.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.alphas.iter().copied().zip(self.betas.iter().copied())
    }

    pub fn stage(&self) -> Option<Stage> {
        self.stage
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn free_angle(&self) -> f64 {
        self.free_angle
    }

    /// Whether `alpha_step` (1-based) is set by the construction.
    pub fn is_alpha_fixed(&self, step: usize) -> bool {
        self.alpha_fixed[step - 1]
    }

    pub fn is_beta_fixed(&self, step: usize) -> bool {
        self.beta_fixed[step - 1]
    }

    /// Negate the oracle angle at `step`; used to build deliberately broken
    /// schedules in mutation tests.
    pub fn negate_beta(mut self, step: usize) -> Self {
        self.betas[step - 1] = -self.betas[step - 1];
        self
    }
}

fn require_odd(h: usize) -> Result<()> {
    if h >= 3 && h % 2 == 1 {
        Ok(())
    } else {
        Err(Error::BadParity {
            h,
            expected: "an odd step count >= 3",
        })
    }
}

/// Stage-1 schedule: `beta_k = -alpha_{h+2-k} = -2 arccot(tan((k-1)pi/h) sqrt(1-gamma^2))`
/// for odd `k = 3..=h`.
pub fn stage1_schedule(h: usize, eps: f64) -> Result<AngleSchedule> {
    require_odd(h)?;
    let g = gamma(h, eps)?;
    let mut s = AngleSchedule::blank(h, Stage::Stage1, eps, g);
    for k in (3..=h).step_by(2) {
        let angle = fixed_point_angle(k - 1, h, g);
        s.fix_beta(k, -angle);
        s.fix_alpha(h + 2 - k, angle);
    }
    Ok(s)
}

/// Stage-2 schedule for a receiver on the sender's side:
/// `alpha'_k = -beta'_{h+2-k} = 2 arccot(tan((k-1)pi/h) sqrt(1-gamma^2))` for odd `k = 3..=h`.
pub fn stage2_same_schedule(h: usize, eps: f64) -> Result<AngleSchedule> {
    require_odd(h)?;
    let g = gamma(h, eps)?;
    let mut s = AngleSchedule::blank(h, Stage::Stage2Same, eps, g);
    for k in (3..=h).step_by(2) {
        let angle = fixed_point_angle(k - 1, h, g);
        s.fix_alpha(k, angle);
        s.fix_beta(h + 2 - k, -angle);
    }
    Ok(s)
}

/// Stage-2 schedule for a receiver on the opposite side. `h` is even and
/// `gamma` is taken at order `h + 1`:
/// `alpha'_k = 2 arccot(tan(k pi/(h+1)) sqrt(1-gamma^2))` for even `k = 2..=h`.
pub fn stage2_diff_schedule(h: usize, eps: f64, pairing: Pairing) -> Result<AngleSchedule> {
    if h < 2 || h % 2 == 1 {
        return Err(Error::BadParity {
            h,
            expected: "an even step count >= 2",
        });
    }
    let order = h + 1;
    let g = gamma(order, eps)?;
    let mut s = AngleSchedule::blank(h, Stage::Stage2Diff, eps, g);
    for k in (2..=h).step_by(2) {
        let angle = fixed_point_angle(k, order, g);
        s.fix_alpha(k, angle);
        let partner = match pairing {
            Pairing::TheoremProof => h + 1 - k,
            Pairing::AlgorithmBox => h + 2 - k,
        };
        s.fix_beta(partner, -angle);
    }
    Ok(s)
}

/// Runs `a_k = x(1 + e^{-i d_k}) a_{k-1} - e^{-i d_k} a_{k-2}` from
/// `a_0 = 1`, `a_1 = x`, where `d_k` is `phase_deltas[k-2]`, and returns the
/// last term. With no deltas this is `a_1 = x`.
pub fn quasi_chebyshev(x: f64, phase_deltas: &[f64]) -> Complex64 {
    let mut prev = Complex64::new(1.0, 0.0);
    let mut cur = Complex64::new(x, 0.0);
    for &delta in phase_deltas {
        let rot = Complex64::from_polar(1.0, -delta);
        let next = (Complex64::new(1.0, 0.0) + rot) * x * cur - rot * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Phase differences `(-1)^k pi - 2 arccot(tan(k pi/h) sqrt(1-gamma^2))`,
/// `k = 1..h`, that collapse [`quasi_chebyshev`] onto `T_h(x/gamma) / T_h(1/gamma)`.
pub fn fixed_point_phase_deltas(h: usize, eps: f64) -> Result<Vec<f64>> {
    let g = gamma(h, eps)?;
    Ok((1..h)
        .map(|k| {
            let sign = if k % 2 == 0 { PI } else { -PI };
            sign - fixed_point_angle(k, h, g)
        })
        .collect())
}

/// Closed-form stage fidelity `1 - eps T_q(sqrt(1 - 1/d) / gamma_q)^2`, with
/// `q = h` for odd-length stages and `q = h + 1` for [`Stage::Stage2Diff`].
///
/// `d` is the size of the partition whose vertices the stage mixes: the
/// sender's side for stage 1 and same-side stage 2, the receiver's side
/// otherwise.
pub fn predicted_stage_fidelity(h: usize, eps: f64, d: usize, stage: Stage) -> Result<f64> {
    check_epsilon(eps)?;
    if d == 0 {
        return Err(Error::InvalidConfig(
            "partition size must be positive".into(),
        ));
    }
    let order = match stage {
        Stage::Stage1 | Stage::Stage2Same => h,
        Stage::Stage2Diff => h + 1,
    };
    let g = gamma(order, eps)?;
    let x = (1.0 - 1.0 / d as f64).sqrt() / g;
    let t = chebyshev(order as u32, x);
    Ok(1.0 - eps * t * t)
}
