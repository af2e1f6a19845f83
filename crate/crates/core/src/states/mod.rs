//! Coherent states as coefficient vectors in truncated canonical bases, and
//! closed-form position-space wavefunctions.

mod families;
mod wavefunction;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::algebra::{binomial, Parity, RepLabel, Spin};
use crate::error::{Error, Result};

pub use families::{
    coherent_state, glauber_cs, parity_cs, su11_cs, su2_cs, su2_cs_at, thermal_cs, un1_cs,
    wavepacket_identity_check, WavepacketCheck,
};
pub use wavefunction::{
    magnetic_density_at_w, singular_cs_wavefunction, singular_eigenfunction, EpsilonPoint,
    WavefunctionFamily, WavefunctionParams,
};

/// Canonical basis a [`StateVector`] is expanded in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Basis {
    /// `|n>`, `n < trunc`.
    Fock { trunc: usize },
    /// `|j, -j + m>`, `m = 0..=2j`.
    Su2 { spin: Spin },
    /// `|k; m>`, `m < trunc`.
    Su11 { k: f64, trunc: usize },
    /// `|n_a, n_b>` at index `n_a * trunc_b + n_b`.
    TwoMode { trunc_a: usize, trunc_b: usize },
    /// Degree-`m` symmetric sector of `n + 1` modes.
    Un1 { n: usize, m: usize },
}

impl Basis {
    pub fn dim(&self) -> usize {
        match *self {
            Basis::Fock { trunc } | Basis::Su11 { trunc, .. } => trunc,
            Basis::Su2 { spin } => spin.dim(),
            Basis::TwoMode { trunc_a, trunc_b } => trunc_a * trunc_b,
            Basis::Un1 { n, m } => binomial(n + m, m),
        }
    }

    /// Basis a representation acts on.
    pub fn of(rep: RepLabel) -> Self {
        match rep {
            RepLabel::HeisenbergWeyl { trunc } | RepLabel::Oscillator { trunc, .. } => {
                Basis::Fock { trunc }
            }
            RepLabel::Su2 { spin } => Basis::Su2 { spin },
            RepLabel::Su11 { k, trunc } => Basis::Su11 { k, trunc },
            RepLabel::Un1 { n, m } => Basis::Un1 { n, m },
        }
    }
}

/// Coefficient vector plus the probability weight the truncation dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    basis: Basis,
    coeffs: DVector<Complex64>,
    tail_mass: f64,
}

impl StateVector {
    pub fn new(basis: Basis, coeffs: DVector<Complex64>, tail_mass: f64) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: coeffs.len(),
            });
        }
        Ok(Self {
            basis,
            coeffs,
            tail_mass,
        })
    }

    /// The basis vector `index`.
    pub fn basis_vector(basis: Basis, index: usize) -> Self {
        let mut coeffs = DVector::zeros(basis.dim());
        coeffs[index] = Complex64::new(1.0, 0.0);
        Self {
            basis,
            coeffs,
            tail_mass: 0.0,
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn coeffs(&self) -> &DVector<Complex64> {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> DVector<Complex64> {
        self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Weight beyond the truncated basis, known from the closed form.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.norm_squared()
    }

    /// `sum_{i >= rows} |c_i|^2`.
    pub fn mass_beyond(&self, rows: usize) -> f64 {
        self.coeffs.iter().skip(rows).map(|c| c.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.coeffs.dotc(&other.coeffs))
    }

    /// `|<self|other>|`, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.overlap(other)?.norm())
    }

    /// Same basis, new coefficients.
    pub fn with_coeffs(&self, coeffs: DVector<Complex64>) -> Result<Self> {
        Self::new(self.basis, coeffs, 0.0)
    }

    pub fn check_tail(&self, tail_tol: f64) -> Result<()> {
        if self.tail_mass > tail_tol {
            return Err(Error::TailTolerance {
                mass: self.tail_mass,
                tol: tail_tol,
                trunc: self.dim(),
            });
        }
        Ok(())
    }

    /// Fock-basis embedding of a parity-sector state `|k; m> -> |2m + offset>`.
    pub fn embed_parity(&self, parity: Parity, trunc: usize) -> Result<Self> {
        let mut coeffs = DVector::zeros(trunc);
        let mut dropped = 0.0;
        for (m, c) in self.coeffs.iter().enumerate() {
            let row = 2 * m + parity.offset();
            if row < trunc {
                coeffs[row] = *c;
            } else {
                dropped += c.norm_sqr();
            }
        }
        Self::new(Basis::Fock { trunc }, coeffs, self.tail_mass + dropped)
    }
}

/// Basis size policy for infinite-dimensional families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    /// Exactly this many basis states; the dropped weight is only recorded.
    Fixed(usize),
    /// Double from `initial` until the dropped weight is at most `tail_tol`.
    Auto(TruncationPolicy),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy {
    pub tail_tol: f64,
    pub initial: usize,
    pub cap: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            tail_tol: 1e-12,
            initial: 16,
            cap: 4096,
        }
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Auto(TruncationPolicy::default())
    }
}

impl From<usize> for Truncation {
    fn from(n: usize) -> Self {
        Truncation::Fixed(n)
    }
}

/// `sum_{n >= start} exp(log_term(n))`, summed until the terms are negligible.
pub(crate) fn series_tail(start: usize, log_term: impl Fn(usize) -> f64) -> f64 {
    let mut total = 0.0;
    let mut prev = f64::INFINITY;
    for n in start..start + 10_000_000 {
        let term = log_term(n).exp();
        if !term.is_finite() {
            return f64::INFINITY;
        }
        total += term;
        if term < prev && (term <= 1e-18 * total || term < 1e-300) {
            break;
        }
        prev = term;
    }
    total
}

/// Resolves a truncation by building at growing sizes until the tail passes.
pub(crate) fn with_truncation(
    trunc: Truncation,
    min: usize,
    build: impl Fn(usize) -> Result<StateVector>,
) -> Result<StateVector> {
    match trunc {
        Truncation::Fixed(n) => {
            if n < min {
                return Err(Error::TruncationTooSmall { found: n, min });
            }
            build(n)
        }
        Truncation::Auto(policy) => {
            let mut n = policy.initial.max(min);
            loop {
                let state = build(n)?;
                if state.tail_mass() <= policy.tail_tol {
                    return Ok(state);
                }
                if n >= policy.cap {
                    return Err(Error::TailTolerance {
                        mass: state.tail_mass(),
                        tol: policy.tail_tol,
                        trunc: n,
                    });
                }
                n = (2 * n).min(policy.cap);
            }
        }
    }
}
