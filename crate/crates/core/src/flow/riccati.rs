//! Classical equations of motion on the plane, the sphere chart, the disc and
//! `C^N`. None of the right-hand sides depends on the representation weight.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::integrate::{disc_guard, integrate, OdeState, StepControls, Trajectory};
use super::track::{ComplexSignal, MatrixSignal, Signal, StageTime, TimeGrid};
use crate::error::{Error, Result};
use crate::numeric::Quadrature;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `z' = -i (omega z + F)`.
pub fn glauber_rhs(z: Complex64, omega: f64, force: Complex64) -> Complex64 {
    -I * (omega * z + force)
}

/// `z' = -i (h* + h0 z - h z^2)`.
pub fn su2_riccati_rhs(z: Complex64, h0: f64, h: Complex64) -> Complex64 {
    -I * (h.conj() + h0 * z - h * z * z)
}

/// `z' = -i (h* z^2 + h0 z + h)`.
pub fn su11_riccati_rhs(z: Complex64, h0: f64, h: Complex64) -> Complex64 {
    -I * (h.conj() * z * z + h0 * z + h)
}

fn merged(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    a.extend(b);
    a.sort_by(f64::total_cmp);
    a.dedup();
    a
}

pub fn glauber_flow(
    z0: Complex64,
    omega: &Signal,
    force: &ComplexSignal,
    grid: &TimeGrid,
    controls: &StepControls,
) -> Result<Trajectory<Complex64>> {
    let breaks = merged(omega.breakpoints(), force.breakpoints());
    integrate(
        |s: StageTime, z: &Complex64| glauber_rhs(*z, omega.eval(s), force.eval(s)),
        z0,
        grid,
        &breaks,
        controls,
        |_, _| Ok(()),
    )
}

/// Integrating-factor solution of the Glauber flow,
/// `z(t) = e^{-i Phi(t)} (z0 - i int_0^t F(s) e^{i Phi(s)} ds)` with
/// `Phi(t) = int_0^t omega`. The outer integral uses Gauss-Legendre panels
/// aligned to the channel breakpoints.
pub fn glauber_closed_form(
    z0: Complex64,
    omega: &Signal,
    force: &ComplexSignal,
    t0: f64,
    t: f64,
) -> Complex64 {
    let quad = Quadrature::new(16);
    let mut knots = vec![t0];
    knots.extend(
        merged(omega.breakpoints(), force.breakpoints())
            .into_iter()
            .filter(|&b| b > t0 && b < t),
    );
    knots.push(t);
    let phase = |s: f64| omega.integral(t0, s);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in knots.windows(2) {
        let panels = ((w[1] - w[0]) / 0.05).ceil().max(1.0) as usize;
        acc += quad.integrate_complex(w[0], w[1], panels, |s| {
            force.value(s) * Complex64::from_polar(1.0, phase(s))
        });
    }
    Complex64::from_polar(1.0, -phase(t)) * (z0 - I * acc)
}

/// Stereographic coordinate of the sphere in one of two charts. In the
/// antipodal chart the stored value is `w = -1/z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint {
    pub value: Complex64,
    pub antipodal: bool,
}

impl SpherePoint {
    pub fn north(z: Complex64) -> Self {
        Self {
            value: z,
            antipodal: false,
        }
    }

    /// The coordinate `z` of the standard chart (infinite at the pole).
    pub fn z(&self) -> Complex64 {
        if self.antipodal {
            -self.value.inv()
        } else {
            self.value
        }
    }

    /// The same point expressed in the other chart.
    pub fn flipped(&self) -> Self {
        Self {
            value: -self.value.inv(),
            antipodal: !self.antipodal,
        }
    }
}

impl OdeState for SpherePoint {
    fn axpy(&self, h: f64, k: &Self) -> Self {
        Self {
            value: self.value + k.value * h,
            antipodal: self.antipodal,
        }
    }

    fn distance(&self, other: &Self) -> f64 {
        if self.antipodal == other.antipodal {
            (self.value - other.value).norm()
        } else {
            (self.value - other.flipped().value).norm()
        }
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Switch to the other chart once `|value|` exceeds `switch_threshold`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPolicy {
    pub switch_threshold: f64,
}

impl Default for ChartPolicy {
    fn default() -> Self {
        Self {
            switch_threshold: 2.0,
        }
    }
}

/// Sphere flow with automatic chart changes. In the antipodal chart the
/// equation keeps its form with `(h0, h) -> (-h0, -h*)`.
pub fn su2_flow(
    z0: SpherePoint,
    h0: &Signal,
    h: &ComplexSignal,
    grid: &TimeGrid,
    controls: &StepControls,
    chart: ChartPolicy,
) -> Result<Trajectory<SpherePoint>> {
    if !(chart.switch_threshold > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "chart switch threshold must exceed 1, got {}",
            chart.switch_threshold
        )));
    }
    let breaks = merged(h0.breakpoints(), h.breakpoints());
    integrate(
        |s: StageTime, p: &SpherePoint| {
            let (a, b) = (h0.eval(s), h.eval(s));
            let value = if p.antipodal {
                su2_riccati_rhs(p.value, -a, -b.conj())
            } else {
                su2_riccati_rhs(p.value, a, b)
            };
            SpherePoint {
                value,
                antipodal: p.antipodal,
            }
        },
        z0,
        grid,
        &breaks,
        controls,
        |_, p| {
            if p.value.norm() > chart.switch_threshold {
                *p = p.flipped();
            }
            Ok(())
        },
    )
}

pub fn su11_flow(
    z0: Complex64,
    h0: &Signal,
    h: &ComplexSignal,
    grid: &TimeGrid,
    controls: &StepControls,
) -> Result<Trajectory<Complex64>> {
    let breaks = merged(h0.breakpoints(), h.breakpoints());
    integrate(
        |s: StageTime, z: &Complex64| su11_riccati_rhs(*z, h0.eval(s), h.eval(s)),
        z0,
        grid,
        &breaks,
        controls,
        |t, z| disc_guard(t, *z),
    )
}

/// Disc flow of `(p^2 + omega^2 q^2)/2 + b (qp + pq)/2` through
/// `h0 = 1 + omega^2`, `h = (1 - omega^2)/2 - i b`.
pub fn oscillator_flow(
    z0: Complex64,
    omega: &Signal,
    friction: &Signal,
    grid: &TimeGrid,
    controls: &StepControls,
) -> Result<Trajectory<Complex64>> {
    let breaks = merged(omega.breakpoints(), friction.breakpoints());
    integrate(
        |s: StageTime, z: &Complex64| {
            let w = omega.eval(s);
            let h = Complex64::new((1.0 - w * w) / 2.0, -friction.eval(s));
            su11_riccati_rhs(*z, 1.0 + w * w, h)
        },
        z0,
        grid,
        &breaks,
        controls,
        |t, z| disc_guard(t, *z),
    )
}

/// Flow on `C^N` through the projective lift `w = (1, z)`, `i w' = h w`,
/// `z_i = w_i / w_0`. The lifted equation is linear, so the only failure mode
/// is `w_0 -> 0`, reported as a chart singularity.
pub fn un1_flow(
    z0: &[Complex64],
    hmat: &MatrixSignal,
    grid: &TimeGrid,
    controls: &StepControls,
) -> Result<Trajectory<DVector<Complex64>>> {
    let modes = hmat.dim();
    if z0.len() + 1 != modes {
        return Err(Error::DimensionMismatch {
            expected: modes - 1,
            found: z0.len(),
        });
    }
    hmat.validate(grid.end())?;
    let mut w0 = DVector::from_element(modes, Complex64::new(1.0, 0.0));
    for (i, z) in z0.iter().enumerate() {
        w0[i + 1] = *z;
    }
    let lifted = integrate(
        |s: StageTime, w: &DVector<Complex64>| {
            let h: DMatrix<Complex64> = hmat.eval(s);
            (h * w) * (-I)
        },
        w0,
        grid,
        &hmat.breakpoints(),
        controls,
        |_, _| Ok(()),
    )?;
    let mut states = Vec::with_capacity(lifted.states.len());
    for (t, w) in lifted.times.iter().zip(&lifted.states) {
        let ratio = w[0].norm() / w.norm();
        if ratio < 1e-10 {
            return Err(Error::ChartSingularity { t: *t, ratio });
        }
        states.push(DVector::from_iterator(
            modes - 1,
            w.iter().skip(1).map(|wi| wi / w[0]),
        ));
    }
    Ok(Trajectory {
        times: lifted.times,
        states,
        max_local_error: lifted.max_local_error,
        accumulated_error: lifted.accumulated_error,
    })
}

/// Which classical Hamiltonian the Kahler check differentiates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KahlerGroup {
    HeisenbergWeyl,
    Su2 { j: f64 },
    Su11 { k: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KahlerResidual {
    /// `i z'` assembled from the metric prefactor and the gradient.
    pub kahler_side: Complex64,
    /// `i z'` from the closed Riccati equation.
    pub riccati_side: Complex64,
    /// `|kahler - riccati| / max(1, |riccati|)`.
    pub residual: f64,
}

/// Classical Hamiltonian, the coherent-state mean of `H`.
pub fn classical_hamiltonian(group: KahlerGroup, z: Complex64, h0: f64, h: Complex64) -> f64 {
    let u = z.norm_sqr();
    match group {
        KahlerGroup::HeisenbergWeyl => h0 * u + 2.0 * (h * z.conj()).re,
        KahlerGroup::Su2 { j } => j * (h0 * (u - 1.0) + 4.0 * (h * z).re) / (1.0 + u),
        KahlerGroup::Su11 { k } => k * (h0 * (1.0 + u) + 4.0 * (h * z.conj()).re) / (1.0 - u),
    }
}

/// Differentiates the classical Hamiltonian by central differences,
/// `d/dz* = (d/dx + i d/dy)/2`, multiplies by the inverse Kahler metric and
/// compares with the Riccati right-hand side.
pub fn kahler_flow_check(group: KahlerGroup, z: Complex64, h0: f64, h: Complex64) -> KahlerResidual {
    let step = 1e-5 * z.norm().max(1.0);
    let f = |w: Complex64| classical_hamiltonian(group, w, h0, h);
    let dx = (f(z + step) - f(z - step)) / (2.0 * step);
    let dy = (f(z + I * step) - f(z - I * step)) / (2.0 * step);
    let grad = Complex64::new(dx, dy) * 0.5;
    let u = z.norm_sqr();
    let (kahler_side, riccati_side) = match group {
        KahlerGroup::HeisenbergWeyl => (grad, I * glauber_rhs(z, h0, h)),
        KahlerGroup::Su2 { j } => (
            grad * ((1.0 + u).powi(2) / (2.0 * j)),
            I * su2_riccati_rhs(z, h0, h),
        ),
        KahlerGroup::Su11 { k } => (
            grad * ((1.0 - u).powi(2) / (2.0 * k)),
            I * su11_riccati_rhs(z, h0, h),
        ),
    };
    KahlerResidual {
        kahler_side,
        riccati_side,
        residual: (kahler_side - riccati_side).norm() / riccati_side.norm().max(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn right_hand_sides_at_the_origin() {
        let h = c(0.3, -0.4);
        assert_eq!(su2_riccati_rhs(c(0.0, 0.0), 1.7, h), -I * h.conj());
        assert_eq!(su11_riccati_rhs(c(0.0, 0.0), 1.7, h), -I * h);
        let z = c(0.2, 0.1);
        assert_eq!(su11_riccati_rhs(z, 2.0, c(0.0, 0.0)), -I * 2.0 * z);
    }

    #[test]
    fn glauber_rotation_and_translation() {
        let grid = TimeGrid::uniform(3.0, 6).unwrap();
        let ctl = StepControls::default();
        let z0 = c(0.4, -0.3);
        let rot = glauber_flow(z0, &Signal::Constant(1.5), &ComplexSignal::default(), &grid, &ctl).unwrap();
        for (t, z) in rot.times.iter().zip(&rot.states) {
            assert!((z - z0 * Complex64::from_polar(1.0, -1.5 * t)).norm() < 1e-12);
        }
        let f = c(0.5, 0.2);
        let tr = glauber_flow(z0, &Signal::Constant(0.0), &ComplexSignal::constant(f), &grid, &ctl).unwrap();
        for (t, z) in tr.times.iter().zip(&tr.states) {
            assert!((z - (z0 - I * f * *t)).norm() < 1e-11);
        }
    }

    #[test]
    fn glauber_closed_form_half_period() {
        let omega = Signal::Constant(1.0);
        let force = ComplexSignal::constant(c(1.0, 0.0));
        let z = glauber_closed_form(c(0.0, 0.0), &omega, &force, 0.0, PI);
        assert!((z - c(-2.0, 0.0)).norm() < 1e-13);
        let grid = TimeGrid::new(vec![0.0, PI]).unwrap();
        let num = glauber_flow(c(0.0, 0.0), &omega, &force, &grid, &StepControls::default()).unwrap();
        assert!((num.last() - z).norm() < 1e-10);
    }

    #[test]
    fn glauber_closed_form_with_time_dependent_frequency() {
        let omega = Signal::sinusoid(1.0, 0.5, 2.0);
        let force = ComplexSignal {
            re: Signal::piecewise(vec![1.0], vec![0.3, -0.2]).unwrap(),
            im: Signal::sinusoid(0.1, 0.2, 0.7),
        };
        let z0 = c(0.1, 0.2);
        let grid = TimeGrid::uniform(4.0, 8).unwrap();
        let num = glauber_flow(z0, &omega, &force, &grid, &StepControls::default()).unwrap();
        for (t, z) in num.times.iter().zip(&num.states) {
            let exact = glauber_closed_form(z0, &omega, &force, 0.0, *t);
            assert!((z - exact).norm() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn spin_flow_crosses_the_pole() {
        // h0 = 0, h = 1 from the south pole: z = -i tan t, which passes the
        // north pole at t = pi/2
        let grid = TimeGrid::uniform(3.0, 30).unwrap();
        let traj = su2_flow(
            SpherePoint::north(c(0.0, 0.0)),
            &Signal::Constant(0.0),
            &ComplexSignal::constant(c(1.0, 0.0)),
            &grid,
            &StepControls::default(),
            ChartPolicy::default(),
        )
        .unwrap();
        assert!(traj.states.iter().any(|p| p.antipodal));
        for (t, p) in traj.times.iter().zip(&traj.states) {
            // compare in the antipodal chart, where -1/(-i tan t) = -i cot t
            let exact = SpherePoint::north(-I * t.tan());
            assert!(p.distance(&exact) < 1e-9 * (1.0 + exact.value.norm()), "t = {t}");
        }
    }

    #[test]
    fn disc_rotation_preserves_modulus() {
        let grid = TimeGrid::uniform(10.0, 100).unwrap();
        let z0 = c(0.5, 0.3);
        let traj = su11_flow(z0, &Signal::Constant(2.0), &ComplexSignal::default(), &grid, &StepControls::default()).unwrap();
        for (t, z) in traj.times.iter().zip(&traj.states) {
            assert!((z - z0 * Complex64::from_polar(1.0, -2.0 * t)).norm() < 1e-11);
        }
    }

    #[test]
    fn large_coupling_near_the_rim_exits_the_disc() {
        let grid = TimeGrid::uniform(1.0, 1).unwrap();
        let err = su11_flow(
            c(0.999, 0.0),
            &Signal::Constant(0.0),
            &ComplexSignal::constant(c(1e4, 0.0)),
            &grid,
            &StepControls::default(),
        )
        .unwrap_err();
        match err {
            Error::DomainExit { t, modulus } => {
                assert!(t > 0.0 && t <= 1.0);
                assert!(modulus >= 1.0 - 1e-12 || !modulus.is_finite());
            }
            other => panic!("expected a domain exit, got {other:?}"),
        }
    }

    #[test]
    fn kahler_gradient_reproduces_riccati() {
        let z = c(0.3, 0.1);
        let r = kahler_flow_check(KahlerGroup::Su2 { j: 0.5 }, z, 1.0, c(0.5, 0.0));
        assert!(r.residual < 1e-6);
        let a = kahler_flow_check(KahlerGroup::Su2 { j: 5.0 }, z, 1.0, c(0.5, 0.0));
        assert_eq!(a.riccati_side, r.riccati_side);
        assert!((a.kahler_side - r.kahler_side).norm() < 1e-6);
        let d = kahler_flow_check(KahlerGroup::Su11 { k: 0.75 }, z, 1.3, c(0.0, 0.0));
        assert!((d.riccati_side - 1.3 * z).norm() < 1e-15);
        assert!(d.residual < 1e-6);
        let g = kahler_flow_check(KahlerGroup::HeisenbergWeyl, z, 0.7, c(0.2, -0.1));
        assert!(g.residual < 1e-6);
    }

    #[test]
    fn lift_with_scalar_matrix_is_stationary() {
        let h = MatrixSignal::constant(&(DMatrix::identity(3, 3) * c(0.8, 0.0))).unwrap();
        let z0 = [c(0.2, 0.1), c(-0.4, 0.3)];
        let traj = un1_flow(&z0, &h, &TimeGrid::uniform(5.0, 10).unwrap(), &StepControls::default()).unwrap();
        for z in &traj.states {
            assert!((z[0] - z0[0]).norm() < 1e-12 && (z[1] - z0[1]).norm() < 1e-12);
        }
    }

    #[test]
    fn two_mode_lift_reduces_to_spin_flow() {
        let (h0, h) = (0.9, c(0.4, -0.25));
        let hm = DMatrix::from_row_slice(
            2,
            2,
            &[c(-h0 / 2.0, 0.0), h, h.conj(), c(h0 / 2.0, 0.0)],
        );
        let grid = TimeGrid::uniform(4.0, 40).unwrap();
        let ctl = StepControls::default();
        let z0 = c(0.3, 0.2);
        let lift = un1_flow(&[z0], &MatrixSignal::constant(&hm).unwrap(), &grid, &ctl).unwrap();
        let direct = su2_flow(
            SpherePoint::north(z0),
            &Signal::Constant(h0),
            &ComplexSignal::constant(h),
            &grid,
            &ctl,
            ChartPolicy { switch_threshold: 1e6 },
        )
        .unwrap();
        for (a, b) in lift.states.iter().zip(&direct.states) {
            assert!((a[0] - b.z()).norm() < 1e-9);
        }
    }
}
