use num_complex::Complex64;

use super::{schrodinger_evolve, EvolveOptions};
use crate::algebra::{oscillator_su11, su11_generators, OperatorMatrix, RepLabel};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::flow::{
    classical_flow, ermakov_solve, mobius_from_epsilon, oscillator_flow, ChartPolicy,
    ClassicalTrajectory, EpsilonStart, MobiusConvention, PhasePoint, StepControls, TimeGrid,
    Track,
};
use crate::numeric::poincare_distance;
use crate::observables::{mean_value, su11_means_closed};
use crate::states::{
    glauber_cs, parity_cs, su11_cs, su2_cs, su2_cs_at, un1_cs, StateVector, Truncation,
};

/// The coherent state of `rep` at a point of the classical phase space, at
/// the representation's own size.
pub fn reference_state(rep: RepLabel, point: &PhasePoint) -> Result<StateVector> {
    let mismatch = || {
        Error::InvalidArgument(format!(
            "phase point {:?} does not belong to a {} representation",
            point.domain(),
            rep.name()
        ))
    };
    match (rep, point) {
        (RepLabel::HeisenbergWeyl { trunc }, PhasePoint::Plane(z)) => {
            glauber_cs(*z, Truncation::Fixed(trunc))
        }
        (RepLabel::Su2 { spin }, PhasePoint::Sphere(p)) => Ok(su2_cs_at(spin, p)),
        (RepLabel::Su2 { spin }, PhasePoint::Plane(z)) => Ok(su2_cs(spin, *z)),
        (RepLabel::Su11 { k, trunc }, PhasePoint::Disc(z)) => {
            su11_cs(k, *z, Truncation::Fixed(trunc))
        }
        (RepLabel::Oscillator { parity, trunc }, PhasePoint::Disc(z)) => {
            parity_cs(parity, *z, Truncation::Fixed(trunc))
        }
        (RepLabel::Un1 { n, m }, PhasePoint::Cn(v)) if v.len() == n => {
            un1_cs(n, m, v.as_slice())
        }
        _ => Err(mismatch()),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StabilityOptions {
    pub evolve: EvolveOptions,
    pub controls: StepControls,
    pub chart: ChartPolicy,
    pub execution: Execution,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightOutcome {
    pub rep: RepLabel,
    pub min_fidelity: f64,
    pub norm_drift: f64,
    pub max_tail_mass: f64,
    /// `max_t |<K0>(t) - k (1 + |z|^2)/(1 - |z|^2)|`, su(1,1) only.
    pub k0_deviation: Option<f64>,
    pub fidelity: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    /// The one classical trajectory every weight is compared against.
    pub trajectory: ClassicalTrajectory,
    pub outcomes: Vec<WeightOutcome>,
}

impl StabilityReport {
    pub fn min_fidelity(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| o.min_fidelity)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.outcomes.iter().map(|o| o.norm_drift).fold(0.0, f64::max)
    }
}

fn k0_operator(rep: RepLabel) -> Result<Option<(f64, OperatorMatrix)>> {
    Ok(match rep {
        RepLabel::Su11 { k, trunc } => Some((k, su11_generators(k, trunc)?.diagonal)),
        RepLabel::Oscillator { parity, trunc } => {
            Some((parity.bargmann_index(), oscillator_su11(trunc)?.k3))
        }
        _ => None,
    })
}

/// Integrates the classical flow of `track` once, then evolves the coherent
/// state of every representation in `reps` exactly and compares it with the
/// coherent state at the shared `z(t)`.
pub fn stability_experiment(
    reps: &[RepLabel],
    track: &Track,
    z0: &[Complex64],
    grid: &TimeGrid,
    options: &StabilityOptions,
) -> Result<StabilityReport> {
    let Some(first) = reps.first() else {
        return Err(Error::InvalidArgument("empty weight list".into()));
    };
    for rep in reps {
        rep.validate()?;
        if rep.group() != first.group() {
            return Err(Error::InvalidArgument(format!(
                "{} and {} belong to different groups",
                first.name(),
                rep.name()
            )));
        }
    }
    let trajectory = classical_flow(track, z0, grid, &options.controls, options.chart)?;
    let results = options.execution.map(reps, |rep| -> Result<WeightOutcome> {
        let psi0 = reference_state(*rep, &trajectory.points[0])?;
        let mut run = schrodinger_evolve(*rep, track, &psi0, grid, &options.evolve)?;
        run.track_fidelity(|i, _| reference_state(*rep, &trajectory.points[i]))?;
        let k0_deviation = match k0_operator(*rep)? {
            Some((k, op)) => {
                let mut worst: f64 = 0.0;
                for (psi, point) in run.states.iter().zip(&trajectory.points) {
                    let z = point.scalar().expect("disc point");
                    let closed = su11_means_closed(k, z)?.zero;
                    worst = worst.max((mean_value(psi, &op)?.re - closed).abs());
                }
                Some(worst)
            }
            None => None,
        };
        Ok(WeightOutcome {
            rep: *rep,
            min_fidelity: run.min_fidelity().unwrap_or(1.0),
            norm_drift: run.norm_drift,
            max_tail_mass: run.max_tail_mass,
            k0_deviation,
            fidelity: run.fidelity,
        })
    });
    Ok(StabilityReport {
        trajectory,
        outcomes: results.into_iter().collect::<Result<_>>()?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MobiusReport {
    pub times: Vec<f64>,
    pub riccati: Vec<Complex64>,
    pub mobius: Vec<Complex64>,
    /// Largest Poincaré distance between the two paths.
    pub sup_distance: f64,
    pub sup_euclidean: f64,
    pub wronskian_drift: f64,
}

/// The disc trajectory of an oscillator track computed twice: by the Riccati
/// equation and as the Möbius image of `z0` built from `eps(t)`.
pub fn mobius_vs_riccati_experiment(
    track: &Track,
    z0: Complex64,
    grid: &TimeGrid,
    controls: &StepControls,
) -> Result<MobiusReport> {
    let Track::Oscillator {
        omega, friction, ..
    } = track
    else {
        return Err(Error::InvalidArgument(format!(
            "the Möbius path needs an oscillator track, got {}",
            track.kind()
        )));
    };
    track.validate(grid.end())?;
    if !(z0.norm() < 1.0) {
        return Err(Error::OutsideDisc(z0));
    }
    let riccati = oscillator_flow(z0, omega, friction, grid, controls)?.states;
    let eps = ermakov_solve(omega, friction, grid, EpsilonStart::Identity, controls)?;
    let mobius = grid
        .points()
        .iter()
        .map(|t| mobius_from_epsilon(&eps, *t, MobiusConvention::Exact)?.apply(z0))
        .collect::<Result<Vec<_>>>()?;
    let (mut sup_distance, mut sup_euclidean) = (0.0f64, 0.0f64);
    for (r, m) in riccati.iter().zip(&mobius) {
        sup_distance = sup_distance.max(poincare_distance(*r, *m));
        sup_euclidean = sup_euclidean.max((r - m).norm());
    }
    Ok(MobiusReport {
        times: grid.points().to_vec(),
        riccati,
        mobius,
        sup_distance,
        sup_euclidean,
        wronskian_drift: eps.wronskian_drift(),
    })
}
