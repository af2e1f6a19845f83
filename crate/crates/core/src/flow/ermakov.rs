//! Complex classical solution `eps = rho e^{i gamma}` of the oscillator with
//! friction, normalized by `rho^2 gamma' = 1`.
//!
//! The second-order equation `eps'' + (omega^2 - b^2 - b') eps = 0` is solved as
//! the canonical first-order system
//!
//! ```text
//! eps' = eta + b eps,   eta' = -omega^2 eps - b eta
//! ```
//!
//! which needs no `b'` and stays valid across jumps of `b`: `eps` and `eta`
//! are continuous there while `eps'` jumps by `delta_b * eps`. The Wronskian
//! `Im(conj(eps) eps') = Im(conj(eps) eta)` is conserved exactly.

use num_complex::Complex64;

use super::integrate::{integrate, OdeState, StepControls};
use super::track::{Signal, StageTime, TimeGrid};
use crate::error::{Error, Result};
use crate::numeric::wrap_angle;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Initial data for `eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsilonStart {
    /// `eps = Omega0^{-1/2}`, `eps' = i Omega0^{1/2}` with
    /// `Omega0^2 = omega(0)^2 - b(0)^2`: the stationary solution when the
    /// track is constant.
    Stationary,
    /// `eps = 1`, `eps' = i`.
    Identity,
    /// `rho, rho'` and `gamma` at the initial time; `gamma' = 1/rho^2`.
    Custom { rho: f64, rho_dot: f64, gamma: f64 },
}

#[derive(Clone, Copy, Debug)]
struct ErmakovState {
    eps: Complex64,
    eta: Complex64,
    /// Unwrapped `arg eps`, advanced in the step hook.
    gamma: f64,
}

impl OdeState for ErmakovState {
    fn axpy(&self, h: f64, k: &Self) -> Self {
        Self {
            eps: self.eps + k.eps * h,
            eta: self.eta + k.eta * h,
            gamma: self.gamma,
        }
    }

    fn distance(&self, other: &Self) -> f64 {
        (self.eps - other.eps).norm().max((self.eta - other.eta).norm())
    }

    fn is_finite(&self) -> bool {
        self.eps.is_finite() && self.eta.is_finite()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonSolution {
    pub times: Vec<f64>,
    pub eps: Vec<Complex64>,
    /// Canonical momentum `eta = eps' - b eps`, continuous across jumps of `b`.
    pub eta: Vec<Complex64>,
    /// `eps'` using the right-continuous value of `b`.
    pub eps_dot: Vec<Complex64>,
    pub rho: Vec<f64>,
    /// `arg eps`, unwrapped along every integration substep.
    pub gamma: Vec<f64>,
    pub max_local_error: f64,
}

impl EpsilonSolution {
    /// `rho^2 gamma' = Im(conj(eps) eps')` at each grid point.
    pub fn wronskian(&self) -> Vec<f64> {
        self.eps
            .iter()
            .zip(&self.eta)
            .map(|(e, n)| (e.conj() * n).im)
            .collect()
    }

    pub fn wronskian_drift(&self) -> f64 {
        self.wronskian()
            .iter()
            .map(|w| (w - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * t.abs().max(1.0);
        self.times.iter().position(|s| (s - t).abs() <= tol)
    }
}

/// Wronskian drift above which `ermakov_solve` fails.
pub const WRONSKIAN_TOLERANCE: f64 = 1e-8;

pub fn ermakov_solve(
    omega: &Signal,
    friction: &Signal,
    grid: &TimeGrid,
    start: EpsilonStart,
    controls: &StepControls,
) -> Result<EpsilonSolution> {
    let t0 = grid.start();
    let b0 = friction.value(t0);
    let (eps0, eps_dot0) = match start {
        EpsilonStart::Stationary => {
            let w0 = omega.value(t0);
            let big2 = w0 * w0 - b0 * b0;
            if !(big2 > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "stationary start needs omega^2 - b^2 > 0 at t = {t0}, got {big2}"
                )));
            }
            let big = big2.sqrt();
            (Complex64::new(big.powf(-0.5), 0.0), I * big.sqrt())
        }
        EpsilonStart::Identity => (Complex64::new(1.0, 0.0), I),
        EpsilonStart::Custom {
            rho,
            rho_dot,
            gamma,
        } => {
            if !(rho > 0.0 && rho.is_finite() && rho_dot.is_finite() && gamma.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "custom start needs finite rho > 0, got rho = {rho}"
                )));
            }
            let phase = Complex64::from_polar(1.0, gamma);
            (rho * phase, (rho_dot + I / rho) * phase)
        }
    };
    let eta0 = eps_dot0 - b0 * eps0;
    let initial_wronskian = (eps0.conj() * eta0).im;
    if (initial_wronskian - 1.0).abs() > WRONSKIAN_TOLERANCE {
        return Err(Error::WronskianNormalization(initial_wronskian));
    }
    let gamma0 = match start {
        EpsilonStart::Custom { gamma, .. } => gamma,
        _ => eps0.arg(),
    };

    let mut breaks = omega.breakpoints();
    breaks.extend(friction.breakpoints());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let traj = integrate(
        |s: StageTime, y: &ErmakovState| {
            let w = omega.eval(s);
            let b = friction.eval(s);
            ErmakovState {
                eps: y.eta + b * y.eps,
                eta: -w * w * y.eps - b * y.eta,
                gamma: 0.0,
            }
        },
        ErmakovState {
            eps: eps0,
            eta: eta0,
            gamma: gamma0,
        },
        grid,
        &breaks,
        controls,
        |_, y| {
            y.gamma += wrap_angle(y.eps.arg() - y.gamma);
            Ok(())
        },
    )?;

    let eps: Vec<Complex64> = traj.states.iter().map(|y| y.eps).collect();
    let eta: Vec<Complex64> = traj.states.iter().map(|y| y.eta).collect();
    let eps_dot = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, y)| y.eta + friction.value(*t) * y.eps)
        .collect();
    let solution = EpsilonSolution {
        rho: eps.iter().map(|e| e.norm()).collect(),
        gamma: traj.states.iter().map(|y| y.gamma).collect(),
        times: traj.times,
        eps,
        eta,
        eps_dot,
        max_local_error: traj.max_local_error,
    };
    let drift = solution.wronskian_drift();
    if drift > WRONSKIAN_TOLERANCE {
        let worst = solution
            .wronskian()
            .into_iter()
            .max_by(|a, b| (a - 1.0).abs().total_cmp(&(b - 1.0).abs()))
            .unwrap_or(f64::NAN);
        return Err(Error::WronskianNormalization(worst));
    }
    Ok(solution)
}
