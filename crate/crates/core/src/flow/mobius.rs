//! SU(1,1) acting on the unit disc by `z -> (a z + c) / (c* z + a*)`.

use num_complex::Complex64;

use super::ermakov::EpsilonSolution;
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The matrix `[[a, c], [c*, a*]]`, defined up to a positive scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusElement {
    pub a: Complex64,
    pub c: Complex64,
}

impl MobiusElement {
    pub fn new(a: Complex64, c: Complex64) -> Result<Self> {
        let m = Self { a, c };
        if !(m.determinant() > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "|a|^2 - |c|^2 = {} must be positive",
                m.determinant()
            )));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            c: Complex64::new(0.0, 0.0),
        }
    }

    /// Rotation `z -> e^{i theta} z`.
    pub fn rotation(theta: f64) -> Self {
        Self {
            a: Complex64::from_polar(1.0, theta / 2.0),
            c: Complex64::new(0.0, 0.0),
        }
    }

    /// `|a|^2 - |c|^2`.
    pub fn determinant(&self) -> f64 {
        self.a.norm_sqr() - self.c.norm_sqr()
    }

    /// Rescaled to unit determinant.
    pub fn normalized(&self) -> Self {
        let s = self.determinant().sqrt();
        Self {
            a: self.a / s,
            c: self.c / s,
        }
    }

    /// Matrix product `self * other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a: self.a * other.a + self.c * other.c.conj(),
            c: self.a * other.c + self.c * other.a.conj(),
        }
    }

    pub fn inverse(&self) -> Self {
        let d = self.determinant();
        Self {
            a: self.a.conj() / d,
            c: -self.c / d,
        }
    }

    pub fn apply(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() < 1.0) {
            return Err(Error::OutsideDisc(z));
        }
        let den = self.c.conj() * z + self.a.conj();
        let scale = self.a.norm().max(1.0);
        if den.norm() < 1e-14 * scale {
            return Err(Error::MobiusDegenerate {
                magnitude: den.norm(),
            });
        }
        Ok((self.a * z + self.c) / den)
    }

    /// Largest entrywise distance between the normalized matrices, modulo the
    /// overall sign that SU(1,1) shares with its projective image.
    pub fn distance(&self, other: &Self) -> f64 {
        let (p, q) = (self.normalized(), other.normalized());
        let plus = (p.a - q.a).norm().max((p.c - q.c).norm());
        let minus = (p.a + q.a).norm().max((p.c + q.c).norm());
        plus.min(minus)
    }
}

/// How `(a, c)` are built from `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MobiusConvention {
    /// `a = (rho^2 + 1) e^{i gamma}`, `c = (rho^2 - 1) e^{-i gamma}`.
    PositivePhase,
    /// `a = (1 + rho^2) e^{-i gamma}`, `c = (1 - rho^2) e^{i gamma}`.
    NegativePhase,
    /// The propagator `G(t) G(0)^{-1}` with
    /// `G = [[conj(mu), -nu], [-conj(nu), mu]]`,
    /// `mu = (i eps + eta)/2`, `nu = (i eps - eta)/2`, `eta = eps' - b eps`.
    /// Valid for any `omega(t), b(t)` and any normalized initial `eps`.
    Exact,
}

fn frame(eps: Complex64, eta: Complex64) -> MobiusElement {
    let mu = (I * eps + eta) / 2.0;
    let nu = (I * eps - eta) / 2.0;
    MobiusElement {
        a: mu.conj(),
        c: -nu,
    }
}

/// Möbius element at grid time `t` of `eps`.
///
/// The two closed forms are the raw matrices; they reduce to the identity at
/// `t = 0` only when `rho(0) = 1, gamma(0) = 0`. The negative-phase form
/// agrees with the Riccati flow while `rho` is constant and `b = 0`.
pub fn mobius_from_epsilon(
    eps: &EpsilonSolution,
    t: f64,
    convention: MobiusConvention,
) -> Result<MobiusElement> {
    let i = eps.index_of(t).ok_or_else(|| {
        Error::InvalidArgument(format!("t = {t} is not a point of the epsilon grid"))
    })?;
    let (rho2, gamma) = (eps.rho[i] * eps.rho[i], eps.gamma[i]);
    let m = match convention {
        MobiusConvention::PositivePhase => MobiusElement {
            a: (rho2 + 1.0) * Complex64::from_polar(1.0, gamma),
            c: (rho2 - 1.0) * Complex64::from_polar(1.0, -gamma),
        },
        MobiusConvention::NegativePhase => MobiusElement {
            a: (1.0 + rho2) * Complex64::from_polar(1.0, -gamma),
            c: (1.0 - rho2) * Complex64::from_polar(1.0, gamma),
        },
        MobiusConvention::Exact => {
            let g0 = frame(eps.eps[0], eps.eta[0]);
            frame(eps.eps[i], eps.eta[i]).compose(&g0.inverse())
        }
    };
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::ermakov::{ermakov_solve, EpsilonStart};
    use crate::flow::integrate::StepControls;
    use crate::flow::track::{Signal, TimeGrid};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_and_composition() {
        let z = c(0.3, -0.6);
        assert_eq!(MobiusElement::identity().apply(z).unwrap(), z);
        let m1 = MobiusElement::new(c(1.2, 0.3), c(0.4, -0.5)).unwrap();
        let m2 = MobiusElement::new(c(0.7, -0.9), c(-0.2, 0.1)).unwrap();
        let two_steps = m2.apply(m1.apply(z).unwrap()).unwrap();
        let once = m2.compose(&m1).apply(z).unwrap();
        assert!((two_steps - once).norm() < 1e-12);
        let back = m1.inverse().apply(m1.apply(z).unwrap()).unwrap();
        assert!((back - z).norm() < 1e-12);
        assert!((m1.normalized().determinant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_points_outside_and_degenerate_maps() {
        let m = MobiusElement::identity();
        assert!(matches!(m.apply(c(1.0, 0.0)), Err(Error::OutsideDisc(_))));
        // a* + c* z vanishes at z = -a*/c*, which is outside the disc for
        // valid elements, so degeneracy needs an invalid element
        let bad = MobiusElement {
            a: c(1.0, 0.0),
            c: c(2.0, 0.0),
        };
        assert!(matches!(
            bad.apply(c(-0.5, 0.0)),
            Err(Error::MobiusDegenerate { .. })
        ));
        assert!(MobiusElement::new(c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn printed_forms_at_the_origin_of_time() {
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let sol = ermakov_solve(
            &Signal::Constant(1.0),
            &Signal::Constant(0.0),
            &grid,
            EpsilonStart::Stationary,
            &StepControls::default(),
        )
        .unwrap();
        let m = mobius_from_epsilon(&sol, 0.0, MobiusConvention::PositivePhase).unwrap();
        assert!((m.a - c(2.0, 0.0)).norm() < 1e-15 && m.c.norm() < 1e-15);
        let exact = mobius_from_epsilon(&sol, 0.0, MobiusConvention::Exact).unwrap();
        assert!(exact.distance(&MobiusElement::identity()) < 1e-14);
        for t in [0.3, 0.7, 1.0] {
            let m = mobius_from_epsilon(&sol, t, MobiusConvention::PositivePhase).unwrap();
            let rho2 = sol.rho[sol.index_of(t).unwrap()].powi(2);
            assert!((m.determinant() - 4.0 * rho2).abs() < 1e-12);
        }
        assert!(mobius_from_epsilon(&sol, 0.05, MobiusConvention::Exact).is_err());
    }

    #[test]
    fn stationary_oscillator_directions() {
        // omega = 1, b = 0: the Riccati flow is z0 e^{-2it}
        let grid = TimeGrid::uniform(std::f64::consts::FRAC_PI_4, 1).unwrap();
        let sol = ermakov_solve(
            &Signal::Constant(1.0),
            &Signal::Constant(0.0),
            &grid,
            EpsilonStart::Stationary,
            &StepControls::default(),
        )
        .unwrap();
        let t = grid.end();
        let z0 = c(0.2, 0.0);
        let expected = z0 * Complex64::from_polar(1.0, -2.0 * t);
        for conv in [MobiusConvention::NegativePhase, MobiusConvention::Exact] {
            let z = mobius_from_epsilon(&sol, t, conv).unwrap().apply(z0).unwrap();
            assert!((z - expected).norm() < 1e-10, "{conv:?}");
        }
        let wrong = mobius_from_epsilon(&sol, t, MobiusConvention::PositivePhase)
            .unwrap()
            .apply(z0)
            .unwrap();
        assert!((wrong - z0 * Complex64::from_polar(1.0, 2.0 * t)).norm() < 1e-10);
    }
}
