//! Exact Schrödinger evolution in truncated bases and the experiments that
//! compare it with the classical phase-space flow.

mod experiments;
pub mod propagator;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::algebra::{Coefficients, HamiltonianBuilder, OperatorMatrix, RepLabel};
use crate::error::{Error, Result};
use crate::flow::{StageTime, TimeGrid, Track};
use crate::states::StateVector;

pub use experiments::{
    mobius_vs_riccati_experiment, reference_state, stability_experiment, MobiusReport,
    StabilityOptions, StabilityReport, WeightOutcome,
};
use propagator::{chebyshev_step, eigen_propagator, SparseHamiltonian, SparseMatrix};

/// How each segment exponential is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PropagatorKind {
    /// Eigendecomposition up to `EIGEN_MAX_DIM`, Chebyshev above.
    #[default]
    Auto,
    Eigen,
    Chebyshev,
}

/// Largest dimension `Auto` diagonalizes densely. Past this the dense
/// Hermitian eigensolve per segment dominates every run.
pub const EIGEN_MAX_DIM: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    /// Segments over the whole grid span; smooth tracks are sampled at
    /// segment midpoints.
    pub segments: usize,
    /// Tail mass that aborts the run.
    pub leakage_threshold: f64,
    pub propagator: PropagatorKind,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            segments: 2048,
            leakage_threshold: 1e-8,
            propagator: PropagatorKind::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// `max_t | |psi(t)|^2 - |psi(0)|^2 |`.
    pub norm_drift: f64,
    /// Largest tail mass seen at any segment end.
    pub max_tail_mass: f64,
    /// `|<reference(t)|psi(t)>|`, filled by [`EvolutionResult::track_fidelity`].
    pub fidelity: Vec<f64>,
}

impl EvolutionResult {
    /// Fills `fidelity` against one reference state per grid time.
    pub fn track_fidelity(
        &mut self,
        mut reference: impl FnMut(usize, f64) -> Result<StateVector>,
    ) -> Result<()> {
        let mut out = Vec::with_capacity(self.states.len());
        for (i, (t, psi)) in self.times.iter().zip(&self.states).enumerate() {
            out.push(reference(i, *t)?.fidelity(psi)?);
        }
        self.fidelity = out;
        Ok(())
    }

    pub fn min_fidelity(&self) -> Option<f64> {
        self.fidelity.iter().copied().reduce(f64::min)
    }
}

/// Rows whose weight counts as leakage: the untrusted rows of the
/// representation plus a guard band of `dim / 16` below them.
pub fn leakage_rows(rep: RepLabel) -> usize {
    let dim = rep.dim();
    let trust = rep.trust_dim();
    if trust == dim {
        dim
    } else {
        trust.saturating_sub(dim / 16).max(1)
    }
}

/// Segment boundaries: the grid, the track's breakpoints inside it, and a
/// uniform subdivision with about `segments` pieces over the span.
fn segment_bounds(grid: &TimeGrid, breaks: &[f64], segments: usize) -> Vec<f64> {
    let (t0, t1) = (grid.start(), grid.end());
    let width = (t1 - t0) / segments.max(1) as f64;
    let mut marks: Vec<f64> = grid.points().to_vec();
    marks.extend(breaks.iter().copied().filter(|b| *b > t0 && *b < t1));
    marks.sort_by(f64::total_cmp);
    marks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
    let mut out = vec![marks[0]];
    for pair in marks.windows(2) {
        let n = ((pair[1] - pair[0]) / width).ceil().max(1.0) as usize;
        for i in 1..n {
            out.push(pair[0] + (pair[1] - pair[0]) * i as f64 / n as f64);
        }
        out.push(pair[1]);
    }
    out
}

enum Route {
    Eigen {
        builder: HamiltonianBuilder,
        cache: Option<(Coefficients, f64, DMatrix<Complex64>)>,
    },
    Chebyshev {
        builder: HamiltonianBuilder,
        sparse: Vec<(*const OperatorMatrix, SparseMatrix)>,
    },
}

impl Route {
    fn step(&mut self, coeffs: &Coefficients, psi: &DVector<Complex64>, dt: f64) -> Result<DVector<Complex64>> {
        match self {
            Route::Eigen { builder, cache } => {
                let hit = matches!(cache, Some((c, d, _)) if c == coeffs && *d == dt);
                if !hit {
                    let h = builder.build(coeffs)?;
                    *cache = Some((coeffs.clone(), dt, eigen_propagator(&h, dt)));
                }
                let u = &cache.as_ref().expect("filled above").2;
                Ok(u * psi)
            }
            Route::Chebyshev { builder, sparse } => {
                let dim = builder.rep().dim();
                let terms = builder.terms(coeffs)?;
                for (_, op) in &terms {
                    let key = *op as *const OperatorMatrix;
                    if !sparse.iter().any(|(k, _)| *k == key) {
                        sparse.push((key, SparseMatrix::from_dense(op)));
                    }
                }
                let weighted = terms
                    .iter()
                    .map(|(w, op)| {
                        let key = *op as *const OperatorMatrix;
                        let s = &sparse.iter().find(|(k, _)| *k == key).expect("cached").1;
                        (*w, s)
                    })
                    .collect();
                let h = SparseHamiltonian {
                    terms: weighted,
                    dim,
                };
                Ok(chebyshev_step(&h, psi, dt))
            }
        }
    }
}

/// Evolves `psi0` under the Hamiltonian of `track` in `rep` by exact segment
/// exponentials, recording the state at each grid point.
pub fn schrodinger_evolve(
    rep: RepLabel,
    track: &Track,
    psi0: &StateVector,
    grid: &TimeGrid,
    options: &EvolveOptions,
) -> Result<EvolutionResult> {
    rep.validate()?;
    track.validate(grid.end())?;
    if psi0.dim() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            found: psi0.dim(),
        });
    }
    let guard = leakage_rows(rep);
    let tail0 = psi0.tail_mass() + psi0.mass_beyond(guard);
    if tail0 > options.leakage_threshold {
        return Err(Error::TruncationLeakage {
            t: grid.start(),
            mass: tail0,
            threshold: options.leakage_threshold,
            dim: rep.dim(),
        });
    }
    let builder = HamiltonianBuilder::new(rep)?;
    let eigen = match options.propagator {
        PropagatorKind::Eigen => true,
        PropagatorKind::Chebyshev => false,
        PropagatorKind::Auto => rep.dim() <= EIGEN_MAX_DIM,
    };
    let mut route = if eigen {
        Route::Eigen {
            builder,
            cache: None,
        }
    } else {
        Route::Chebyshev {
            builder,
            sparse: Vec::new(),
        }
    };

    let bounds = segment_bounds(grid, &track.breakpoints(), options.segments);
    let norm0 = psi0.norm_sqr();
    let mut psi = psi0.coeffs().clone();
    let mut states = vec![psi0.clone()];
    let mut norm_drift: f64 = 0.0;
    let mut max_tail: f64 = psi0.mass_beyond(guard);
    let mut next_grid = 1;
    for seg in bounds.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let mid = 0.5 * (a + b);
        let coeffs = track.coefficients(StageTime { t: mid, anchor: mid });
        psi = route.step(&coeffs, &psi, b - a)?;
        let tail: f64 = psi.iter().skip(guard).map(|c| c.norm_sqr()).sum();
        max_tail = max_tail.max(tail);
        if tail > options.leakage_threshold {
            return Err(Error::TruncationLeakage {
                t: b,
                mass: tail,
                threshold: options.leakage_threshold,
                dim: rep.dim(),
            });
        }
        if !psi.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite { t: b });
        }
        norm_drift = norm_drift.max((psi.norm_squared() - norm0).abs());
        if next_grid < grid.len() && (b - grid.points()[next_grid]).abs() <= 1e-12 * b.abs().max(1.0) {
            states.push(psi0.with_coeffs(psi.clone())?);
            next_grid += 1;
        }
    }
    Ok(EvolutionResult {
        times: grid.points().to_vec(),
        states,
        norm_drift,
        max_tail_mass: max_tail,
        fidelity: Vec::new(),
    })
}
