// SPDX-License-Identifier: Apache-2.0

//! Small dense complex matrices for the reduced dynamics, the closed-form
//! 4x4 operators, and the `R`/`A` factorisation used to check them.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ReducedMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ReducedMatrix {
    pub fn zeros(dim: usize) -> Self {
        ReducedMatrix {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![ONE; dim])
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Ok(ReducedMatrix { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        ReducedMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: Complex64, other: &ReducedMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        ReducedMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + factor * b)
                .collect(),
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        self.entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ReducedMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |(M M^dagger - I)_{ij}|`.
    pub fn unitarity_residual(&self) -> f64 {
        (self * &self.adjoint()).max_abs_diff(&Self::identity(self.dim))
    }
}

impl std::ops::Index<(usize, usize)> for ReducedMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ReducedMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl Mul for &ReducedMatrix {
    type Output = ReducedMatrix;

    fn mul(self, rhs: &ReducedMatrix) -> ReducedMatrix {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = ReducedMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl fmt::Debug for ReducedMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ReducedMatrix({}x{})", self.dim, self.dim)?;
        for row in self.entries.chunks_exact(self.dim) {
            let cells: Vec<String> = row
                .iter()
                .map(|c| format!("{:+.6}{:+.6}i", c.re, c.im))
                .collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Mixing angle of the coin on a vertex of degree `d` restricted to the
/// "one marked neighbour vs the rest" plane: `cos(omega) = 1 - 2/d`.
pub fn omega(d: usize) -> f64 {
    (1.0 - 2.0 / d as f64).clamp(-1.0, 1.0).acos()
}

/// The reduced flip-flop shift, swapping `e1 <-> e2` and `e3 <-> e4`.
pub fn shift_matrix() -> ReducedMatrix {
    let mut s = ReducedMatrix::zeros(4);
    s[(0, 1)] = ONE;
    s[(1, 0)] = ONE;
    s[(2, 3)] = ONE;
    s[(3, 2)] = ONE;
    s
}

/// `diag(e^{i beta}, 1, 1, 1)`.
pub fn oracle_matrix(beta: f64) -> ReducedMatrix {
    ReducedMatrix::diagonal(&[Complex64::from_polar(1.0, beta), ONE, ONE, ONE])
}

/// Reduced coin: `-e^{-i alpha}` on `e1`, `e4` and the `2x2` mixing block
/// `(1 - e^{-i alpha}) / 2 * [[1 - cos w, sin w], [sin w, 1 + cos w]] - I`
/// on `e2`, `e3`.
pub fn coin_matrix(alpha: f64, omega: f64) -> ReducedMatrix {
    let weight = ONE - Complex64::from_polar(1.0, -alpha);
    let (s, c) = omega.sin_cos();
    let mut m = ReducedMatrix::zeros(4);
    m[(0, 0)] = -Complex64::from_polar(1.0, -alpha);
    m[(3, 3)] = m[(0, 0)];
    m[(1, 1)] = weight * (1.0 - c) / 2.0 - ONE;
    m[(1, 2)] = weight * s / 2.0;
    m[(2, 1)] = weight * s / 2.0;
    m[(2, 2)] = weight * (1.0 + c) / 2.0 - ONE;
    m
}

/// `R(theta) = -diag(e^{-i theta/2}, e^{i theta/2}, e^{-i theta/2}, e^{-i theta/2})`.
pub fn rotation_r(theta: f64) -> ReducedMatrix {
    let minus = -Complex64::from_polar(1.0, -theta / 2.0);
    let plus = -Complex64::from_polar(1.0, theta / 2.0);
    ReducedMatrix::diagonal(&[minus, plus, minus, minus])
}

/// `A(theta)`: identity on `e1`, `e4`; on `e2`, `e3` the block
/// `[[cos(w/2), -i e^{i theta} sin(w/2)], [-i e^{-i theta} sin(w/2), cos(w/2)]]`.
pub fn mixer_a(theta: f64, omega: f64) -> ReducedMatrix {
    let (s, c) = (omega / 2.0).sin_cos();
    let mut m = ReducedMatrix::identity(4);
    m[(1, 1)] = Complex64::new(c, 0.0);
    m[(2, 2)] = Complex64::new(c, 0.0);
    m[(1, 2)] = -I * Complex64::from_polar(1.0, theta) * s;
    m[(2, 1)] = -I * Complex64::from_polar(1.0, -theta) * s;
    m
}

/// Residuals of the factorisation identities at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionReport {
    /// `C(alpha)` vs `e^{-i alpha/2} A(pi/2) R(alpha) A(-pi/2)`.
    pub coin_residual: f64,
    /// `Q(beta)` vs `-e^{i beta/2} S R(beta) S`.
    pub oracle_residual: f64,
    /// Worst `S B1 S B2 S` vs `B2 S B1` over the sampled words.
    pub braiding_residual: f64,
    pub braid_samples: usize,
}

impl DecompositionReport {
    pub fn max_residual(&self) -> f64 {
        self.coin_residual
            .max(self.oracle_residual)
            .max(self.braiding_residual)
    }

    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_residual() < tolerance
    }
}

fn random_word(rng: &mut impl Rng, omega: f64) -> ReducedMatrix {
    let len = rng.gen_range(1..=4);
    let mut word = ReducedMatrix::identity(4);
    for _ in 0..len {
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let factor = if rng.gen_bool(0.5) {
            mixer_a(theta, omega)
        } else {
            rotation_r(theta)
        };
        word = &word * &factor;
    }
    word
}

/// Checks the coin and oracle factorisations at `(alpha, beta, omega)` and the
/// braiding relation `S B1 S B2 S = B2 S B1` on `braid_samples` random words
/// `B1`, `B2` over `{A(theta), R(theta)}`.
pub fn verify_decompositions(
    alpha: f64,
    beta: f64,
    omega: f64,
    braid_samples: usize,
    rng: &mut impl Rng,
) -> DecompositionReport {
    let s = shift_matrix();

    let factored_coin = (&(&mixer_a(FRAC_PI_2, omega) * &rotation_r(alpha))
        * &mixer_a(-FRAC_PI_2, omega))
        .scale(Complex64::from_polar(1.0, -alpha / 2.0));
    let coin_residual = coin_matrix(alpha, omega).max_abs_diff(&factored_coin);

    let factored_oracle =
        (&(&s * &rotation_r(beta)) * &s).scale(-Complex64::from_polar(1.0, beta / 2.0));
    let oracle_residual = oracle_matrix(beta).max_abs_diff(&factored_oracle);

    let mut braiding_residual: f64 = 0.0;
    for _ in 0..braid_samples {
        let b1 = random_word(rng, omega);
        let b2 = random_word(rng, omega);
        let lhs = &(&(&(&s * &b1) * &s) * &b2) * &s;
        let rhs = &(&b2 * &s) * &b1;
        braiding_residual = braiding_residual.max(lhs.max_abs_diff(&rhs));
    }

    DecompositionReport {
        coin_residual,
        oracle_residual,
        braiding_residual,
        braid_samples,
    }
}
