//! Fixed-step fourth-order Runge-Kutta with a half-step Richardson estimate.

use nalgebra::DVector;
use num_complex::Complex64;

use super::track::{StageTime, TimeGrid};
use crate::error::{Error, Result};

/// A vector-space element the integrator can step.
pub trait OdeState: Clone {
    /// `self + h * k`
    fn axpy(&self, h: f64, k: &Self) -> Self;
    /// Max-norm distance.
    fn distance(&self, other: &Self) -> f64;
    fn is_finite(&self) -> bool;
}

impl OdeState for Complex64 {
    fn axpy(&self, h: f64, k: &Self) -> Self {
        self + k * h
    }

    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl<const N: usize> OdeState for [Complex64; N] {
    fn axpy(&self, h: f64, k: &Self) -> Self {
        std::array::from_fn(|i| self[i] + k[i] * h)
    }

    fn distance(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn is_finite(&self) -> bool {
        self.iter().all(OdeState::is_finite)
    }
}

impl OdeState for DVector<Complex64> {
    fn axpy(&self, h: f64, k: &Self) -> Self {
        self + k * Complex64::new(h, 0.0)
    }

    fn distance(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn is_finite(&self) -> bool {
        self.iter().all(OdeState::is_finite)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControls {
    /// Upper bound on the step; substeps between breakpoints are equal.
    pub max_step: f64,
    /// Abort when a local error estimate exceeds this.
    pub error_budget: Option<f64>,
}

impl Default for StepControls {
    fn default() -> Self {
        Self {
            max_step: 1e-3,
            error_budget: None,
        }
    }
}

impl StepControls {
    pub fn with_step(max_step: f64) -> Self {
        Self {
            max_step,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    /// Largest per-step Richardson estimate.
    pub max_local_error: f64,
    /// Sum of per-step estimates, a bound-like proxy for the global error.
    pub accumulated_error: f64,
}

impl<S> Trajectory<S> {
    pub fn last(&self) -> &S {
        self.states.last().expect("trajectory has at least one point")
    }

    pub fn map<T>(self, f: impl Fn(S) -> T) -> Trajectory<T> {
        Trajectory {
            times: self.times,
            states: self.states.into_iter().map(f).collect(),
            max_local_error: self.max_local_error,
            accumulated_error: self.accumulated_error,
        }
    }
}

fn rk4<S: OdeState>(
    rhs: &impl Fn(StageTime, &S) -> S,
    t: f64,
    anchor: f64,
    y: &S,
    h: f64,
) -> S {
    let at = |t| StageTime { t, anchor };
    let k1 = rhs(at(t), y);
    let k2 = rhs(at(t + 0.5 * h), &y.axpy(0.5 * h, &k1));
    let k3 = rhs(at(t + 0.5 * h), &y.axpy(0.5 * h, &k2));
    let k4 = rhs(at(t + h), &y.axpy(h, &k3));
    y.axpy(h / 6.0, &k1)
        .axpy(h / 3.0, &k2)
        .axpy(h / 3.0, &k3)
        .axpy(h / 6.0, &k4)
}

/// Integrates `y' = rhs(t, y)` and records the state at every grid point.
///
/// Steps never straddle a breakpoint. After each accepted step `after_step`
/// may inspect or rewrite the state (chart changes, domain guards); its error
/// aborts the run. Each step is taken once with `h` and twice with `h/2`; the
/// half-step result is kept and `|y_h - y_{h/2}| / 15` is the local estimate.
pub fn integrate<S, F, G>(
    rhs: F,
    y0: S,
    grid: &TimeGrid,
    breakpoints: &[f64],
    controls: &StepControls,
    mut after_step: G,
) -> Result<Trajectory<S>>
where
    S: OdeState,
    F: Fn(StageTime, &S) -> S,
    G: FnMut(f64, &mut S) -> Result<()>,
{
    if !(controls.max_step > 0.0 && controls.max_step.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "max_step must be positive, got {}",
            controls.max_step
        )));
    }
    let times = grid.points();
    let mut states = Vec::with_capacity(times.len());
    let mut y = y0;
    if !y.is_finite() {
        return Err(Error::NonFinite { t: times[0] });
    }
    after_step(times[0], &mut y)?;
    states.push(y.clone());
    let mut max_local: f64 = 0.0;
    let mut accumulated = 0.0;

    for w in times.windows(2) {
        let (ta, tb) = (w[0], w[1]);
        let mut cuts = vec![ta];
        cuts.extend(breakpoints.iter().copied().filter(|&b| b > ta && b < tb));
        cuts.push(tb);
        for seg in cuts.windows(2) {
            let (sa, sb) = (seg[0], seg[1]);
            let anchor = 0.5 * (sa + sb);
            let n = ((sb - sa) / controls.max_step).ceil().max(1.0) as usize;
            let h = (sb - sa) / n as f64;
            for i in 0..n {
                let t = sa + i as f64 * h;
                let full = rk4(&rhs, t, anchor, &y, h);
                let mid = rk4(&rhs, t, anchor, &y, 0.5 * h);
                let mut next = rk4(&rhs, t + 0.5 * h, anchor, &mid, 0.5 * h);
                let t_next = if i + 1 == n { sb } else { t + h };
                // estimate before the hook, which may change coordinates
                let est = next.distance(&full) / 15.0;
                after_step(t_next, &mut next)?;
                if !next.is_finite() {
                    return Err(Error::NonFinite { t: t_next });
                }
                if let Some(budget) = controls.error_budget {
                    if est > budget {
                        return Err(Error::ErrorBudget {
                            t: t_next,
                            estimate: est,
                            budget,
                        });
                    }
                }
                max_local = max_local.max(est);
                accumulated += est;
                y = next;
            }
        }
        states.push(y.clone());
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        max_local_error: max_local,
        accumulated_error: accumulated,
    })
}

/// Guard for flows on the open unit disc: `|z| >= 1 - 1e-12` is a domain exit.
pub fn disc_guard(t: f64, z: Complex64) -> Result<()> {
    let modulus = z.norm();
    if !modulus.is_finite() || modulus >= 1.0 - 1e-12 {
        return Err(Error::DomainExit { t, modulus });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn rotation(step: f64) -> Trajectory<Complex64> {
        let grid = TimeGrid::uniform(2.0 * PI, 4).unwrap();
        integrate(
            |_, z: &Complex64| -I * z,
            Complex64::new(0.6, 0.2),
            &grid,
            &[],
            &StepControls::with_step(step),
            |_, _| Ok(()),
        )
        .unwrap()
    }

    #[test]
    fn periodic_orbit_closes() {
        let traj = rotation(1e-3);
        assert!((traj.last() - Complex64::new(0.6, 0.2)).norm() < 1e-8);
        assert_eq!(traj.states.len(), 5);
    }

    #[test]
    fn halving_the_step_cuts_the_estimate_sixteenfold() {
        let coarse = rotation(0.02);
        let fine = rotation(0.01);
        let ratio = coarse.accumulated_error / fine.accumulated_error;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn steps_respect_breakpoints() {
        // z' = s(t) with s = 1 before t = 0.3 and 0 after: exact answer 0.3
        let grid = TimeGrid::uniform(1.0, 1).unwrap();
        let traj = integrate(
            |s: StageTime, _: &Complex64| {
                Complex64::new(if s.anchor < 0.3 { 1.0 } else { 0.0 }, 0.0)
            },
            Complex64::new(0.0, 0.0),
            &grid,
            &[0.3],
            &StepControls::with_step(0.07),
            |_, _| Ok(()),
        )
        .unwrap();
        assert!((traj.last().re - 0.3).abs() < 1e-14);
    }

    #[test]
    fn error_budget_is_enforced() {
        let grid = TimeGrid::uniform(1.0, 1).unwrap();
        let err = integrate(
            |_, z: &Complex64| -I * z * 50.0,
            Complex64::new(1.0, 0.0),
            &grid,
            &[],
            &StepControls {
                max_step: 0.1,
                error_budget: Some(1e-12),
            },
            |_, _| Ok(()),
        )
        .unwrap_err();
        assert!(matches!(err, Error::ErrorBudget { .. }));
    }

    #[test]
    fn blow_up_is_reported_as_non_finite() {
        let grid = TimeGrid::uniform(10.0, 1).unwrap();
        let err = integrate(
            |_, z: &Complex64| z * z,
            Complex64::new(1.0, 0.0),
            &grid,
            &[],
            &StepControls::with_step(0.01),
            |_, _| Ok(()),
        )
        .unwrap_err();
        match err {
            Error::NonFinite { t } => assert!(t > 0.9 && t < 1.2, "t = {t}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
