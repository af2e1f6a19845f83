//! Classical phase-space trajectories.

pub mod ermakov;
pub mod integrate;
pub mod mobius;
pub mod riccati;
pub mod track;

use nalgebra::DVector;
use num_complex::Complex64;

pub use ermakov::{ermakov_solve, EpsilonSolution, EpsilonStart};
pub use integrate::{integrate, OdeState, StepControls, Trajectory};
pub use mobius::{mobius_from_epsilon, MobiusConvention, MobiusElement};
pub use riccati::{
    glauber_closed_form, glauber_flow, glauber_rhs, kahler_flow_check, oscillator_flow,
    su11_flow, su11_riccati_rhs, su2_flow, su2_riccati_rhs, un1_flow, ChartPolicy, KahlerGroup,
    KahlerResidual, SpherePoint,
};
pub use track::{ComplexSignal, MatrixSignal, Signal, StageTime, TimeGrid, Track};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Plane,
    SphereChart,
    Disc,
    Cn(usize),
}

/// A point of the classical phase space.
#[derive(Clone, Debug, PartialEq)]
pub enum PhasePoint {
    Plane(Complex64),
    Sphere(SpherePoint),
    Disc(Complex64),
    Cn(DVector<Complex64>),
}

impl PhasePoint {
    pub fn domain(&self) -> Domain {
        match self {
            PhasePoint::Plane(_) => Domain::Plane,
            PhasePoint::Sphere(_) => Domain::SphereChart,
            PhasePoint::Disc(_) => Domain::Disc,
            PhasePoint::Cn(v) => Domain::Cn(v.len()),
        }
    }

    /// Coordinates in the standard chart.
    pub fn components(&self) -> Vec<Complex64> {
        match self {
            PhasePoint::Plane(z) | PhasePoint::Disc(z) => vec![*z],
            PhasePoint::Sphere(p) => vec![p.z()],
            PhasePoint::Cn(v) => v.iter().copied().collect(),
        }
    }

    pub fn scalar(&self) -> Option<Complex64> {
        match self {
            PhasePoint::Plane(z) | PhasePoint::Disc(z) => Some(*z),
            PhasePoint::Sphere(p) => Some(p.z()),
            PhasePoint::Cn(_) => None,
        }
    }
}

/// Trajectory of any of the classical flows.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalTrajectory {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    pub max_local_error: f64,
    pub accumulated_error: f64,
}

impl ClassicalTrajectory {
    fn from<S>(traj: Trajectory<S>, wrap: impl Fn(S) -> PhasePoint) -> Self {
        let t = traj.map(wrap);
        Self {
            times: t.times,
            points: t.states,
            max_local_error: t.max_local_error,
            accumulated_error: t.accumulated_error,
        }
    }

    /// Standard-chart scalar coordinate per time; `None` on `C^N` with `N > 1`.
    pub fn scalars(&self) -> Option<Vec<Complex64>> {
        self.points
            .iter()
            .map(|p| match p {
                PhasePoint::Cn(v) if v.len() == 1 => Some(v[0]),
                other => other.scalar(),
            })
            .collect()
    }
}

/// Integrates the flow belonging to `track` from the initial coordinates
/// `z0` (one entry, or `N` entries for a matrix track).
pub fn classical_flow(
    track: &Track,
    z0: &[Complex64],
    grid: &TimeGrid,
    controls: &StepControls,
    chart: ChartPolicy,
) -> Result<ClassicalTrajectory> {
    track.validate(grid.end())?;
    let scalar = || -> Result<Complex64> {
        match z0 {
            [z] => Ok(*z),
            _ => Err(Error::DimensionMismatch {
                expected: 1,
                found: z0.len(),
            }),
        }
    };
    let disc_start = |z: Complex64| -> Result<Complex64> {
        if z.norm() < 1.0 {
            Ok(z)
        } else {
            Err(Error::OutsideDisc(z))
        }
    };
    Ok(match track {
        Track::Glauber { omega, force } => ClassicalTrajectory::from(
            glauber_flow(scalar()?, omega, force, grid, controls)?,
            PhasePoint::Plane,
        ),
        Track::Su2 { h0, h } => {
            let start = SpherePoint::north(scalar()?);
            ClassicalTrajectory::from(
                su2_flow(start, h0, h, grid, controls, chart)?,
                PhasePoint::Sphere,
            )
        }
        Track::Su11 { h0, h } => ClassicalTrajectory::from(
            su11_flow(disc_start(scalar()?)?, h0, h, grid, controls)?,
            PhasePoint::Disc,
        ),
        Track::Oscillator {
            omega, friction, ..
        } => ClassicalTrajectory::from(
            oscillator_flow(disc_start(scalar()?)?, omega, friction, grid, controls)?,
            PhasePoint::Disc,
        ),
        Track::Matrix(m) => {
            ClassicalTrajectory::from(un1_flow(z0, m, grid, controls)?, PhasePoint::Cn)
        }
    })
}
