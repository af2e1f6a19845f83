//! Time-dependent Hamiltonian coefficients.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::Coefficients;
use crate::error::{Error, Result};

/// Evaluation time of a right-hand side stage. Piecewise-constant channels
/// are read at `anchor`, a point strictly inside the current substep, so a
/// stage that lands exactly on a breakpoint still sees the segment's value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageTime {
    pub t: f64,
    pub anchor: f64,
}

impl StageTime {
    pub fn at(t: f64) -> Self {
        Self { t, anchor: t }
    }
}

/// A real scalar channel.
#[derive(Clone, Debug, PartialEq)]
pub enum Signal {
    Constant(f64),
    /// `values[0]` before `breaks[0]`, `values[i]` on `[breaks[i-1], breaks[i])`,
    /// and the last value after the final break.
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
    /// `offset + amplitude * sin(frequency * t + phase)`.
    Sinusoid {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// Linear interpolation between samples, held constant outside.
    Sampled { times: Vec<f64>, values: Vec<f64> },
}

impl Default for Signal {
    fn default() -> Self {
        Signal::Constant(0.0)
    }
}

impl From<f64> for Signal {
    fn from(v: f64) -> Self {
        Signal::Constant(v)
    }
}

impl Signal {
    pub fn piecewise(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Signal::Piecewise { breaks, values };
        s.validate()?;
        Ok(s)
    }

    pub fn sinusoid(offset: f64, amplitude: f64, frequency: f64) -> Self {
        Signal::Sinusoid {
            offset,
            amplitude,
            frequency,
            phase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        match self {
            Signal::Constant(v) if !v.is_finite() => {
                Err(Error::InvalidArgument("non-finite constant channel".into()))
            }
            Signal::Piecewise { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return Err(Error::InvalidArgument(format!(
                        "piecewise channel needs one more value than breaks ({} breaks, {} values)",
                        breaks.len(),
                        values.len()
                    )));
                }
                if !finite(breaks) || !finite(values) || !increasing(breaks) {
                    return Err(Error::InvalidArgument(
                        "piecewise breaks must be finite and strictly increasing".into(),
                    ));
                }
                Ok(())
            }
            Signal::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
            } if !finite(&[*offset, *amplitude, *frequency, *phase]) => {
                Err(Error::InvalidArgument("non-finite sinusoid parameter".into()))
            }
            Signal::Sampled { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::InvalidArgument(
                        "sampled channel needs matching, non-empty times and values".into(),
                    ));
                }
                if !finite(times) || !finite(values) || !increasing(times) {
                    return Err(Error::InvalidArgument(
                        "sample times must be finite and strictly increasing".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Right-continuous value at `t`.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Signal::Constant(v) => *v,
            Signal::Piecewise { breaks, values } => {
                values[breaks.partition_point(|&b| b <= t)]
            }
            Signal::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
            } => offset + amplitude * (frequency * t + phase).sin(),
            Signal::Sampled { times, values } => {
                let i = times.partition_point(|&s| s <= t);
                if i == 0 {
                    values[0]
                } else if i == times.len() {
                    values[i - 1]
                } else {
                    let u = (t - times[i - 1]) / (times[i] - times[i - 1]);
                    values[i - 1] + u * (values[i] - values[i - 1])
                }
            }
        }
    }

    pub fn eval(&self, s: StageTime) -> f64 {
        match self {
            Signal::Piecewise { .. } => self.value(s.anchor),
            _ => self.value(s.t),
        }
    }

    /// Points where the channel or its derivative jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Signal::Piecewise { breaks, .. } => breaks.clone(),
            Signal::Sampled { times, .. } => times.clone(),
            _ => Vec::new(),
        }
    }

    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self, Signal::Constant(_) | Signal::Piecewise { .. })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Signal::Constant(v) => *v == 0.0,
            Signal::Piecewise { values, .. } => values.iter().all(|v| *v == 0.0),
            Signal::Sinusoid {
                offset, amplitude, ..
            } => *offset == 0.0 && *amplitude == 0.0,
            Signal::Sampled { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }

    /// `int_a^b value(t) dt` in closed form.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integral(b, a);
        }
        match self {
            Signal::Constant(v) => v * (b - a),
            Signal::Piecewise { breaks, values } => {
                let mut total = 0.0;
                let mut lo = a;
                for (i, v) in values.iter().enumerate() {
                    let hi = breaks.get(i).copied().unwrap_or(f64::INFINITY).min(b);
                    if hi > lo {
                        total += v * (hi - lo);
                        lo = hi;
                    }
                    if lo >= b {
                        break;
                    }
                }
                total
            }
            Signal::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
            } => {
                let base = offset * (b - a);
                if *frequency == 0.0 {
                    base + amplitude * phase.sin() * (b - a)
                } else {
                    base - amplitude / frequency
                        * ((frequency * b + phase).cos() - (frequency * a + phase).cos())
                }
            }
            Signal::Sampled { times, .. } => {
                // trapezoids are exact on each linear piece
                let mut knots = vec![a];
                knots.extend(times.iter().copied().filter(|&s| s > a && s < b));
                knots.push(b);
                knots
                    .windows(2)
                    .map(|w| 0.5 * (w[1] - w[0]) * (self.value(w[0]) + self.value(w[1])))
                    .sum()
            }
        }
    }
}

/// A complex channel with independent real and imaginary parts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexSignal {
    pub re: Signal,
    pub im: Signal,
}

impl ComplexSignal {
    pub fn constant(z: Complex64) -> Self {
        Self {
            re: Signal::Constant(z.re),
            im: Signal::Constant(z.im),
        }
    }

    pub fn real(re: Signal) -> Self {
        Self {
            re,
            im: Signal::Constant(0.0),
        }
    }

    pub fn value(&self, t: f64) -> Complex64 {
        Complex64::new(self.re.value(t), self.im.value(t))
    }

    pub fn eval(&self, s: StageTime) -> Complex64 {
        Complex64::new(self.re.eval(s), self.im.eval(s))
    }

    pub fn integral(&self, a: f64, b: f64) -> Complex64 {
        Complex64::new(self.re.integral(a, b), self.im.integral(a, b))
    }

    pub fn validate(&self) -> Result<()> {
        self.re.validate()?;
        self.im.validate()
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.re.breakpoints();
        b.extend(self.im.breakpoints());
        b
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.re.is_piecewise_constant() && self.im.is_piecewise_constant()
    }
}

/// A square matrix of complex channels, `h_ij(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSignal {
    dim: usize,
    entries: Vec<ComplexSignal>,
}

impl MatrixSignal {
    /// Row-major entries; Hermiticity is checked by [`MatrixSignal::validate`].
    pub fn new(dim: usize, entries: Vec<ComplexSignal>) -> Result<Self> {
        if entries.len() != dim * dim || dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn constant(m: &DMatrix<Complex64>) -> Result<Self> {
        let dim = m.nrows();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..m.ncols() {
                entries.push(ComplexSignal::constant(m[(i, j)]));
            }
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &ComplexSignal {
        &self.entries[i * self.dim + j]
    }

    pub fn eval(&self, s: StageTime) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.entry(i, j).eval(s))
    }

    pub fn value(&self, t: f64) -> DMatrix<Complex64> {
        self.eval(StageTime::at(t))
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.entries.iter().flat_map(|e| e.breakpoints()).collect()
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.entries.iter().all(|e| e.is_piecewise_constant())
    }

    /// Channel validity plus `h_ij = conj(h_ji)` at breakpoints, segment
    /// midpoints and a uniform sample of `[0, horizon]`.
    pub fn validate(&self, horizon: f64) -> Result<()> {
        for e in &self.entries {
            e.validate()?;
        }
        let mut times = sample_times(&self.breakpoints(), horizon);
        times.extend((0..=64).map(|i| horizon * i as f64 / 64.0));
        for t in times {
            Coefficients::Matrix(self.value(t))
                .validate()
                .map_err(|e| match e {
                    Error::NonHermitian(msg) => Error::NonHermitian(format!("{msg} at t = {t}")),
                    other => other,
                })?;
        }
        Ok(())
    }
}

fn sample_times(breaks: &[f64], horizon: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| b > 0.0 && b < horizon)
        .collect();
    pts.push(0.0);
    pts.push(horizon);
    pts.sort_by(f64::total_cmp);
    let mids: Vec<f64> = pts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    pts.extend(mids);
    pts
}

/// Time-dependent coefficients of one Hamiltonian family.
#[derive(Clone, Debug, PartialEq)]
pub enum Track {
    /// `omega(t) a^dag a + F(t) a^dag + F*(t) a`.
    Glauber { omega: Signal, force: ComplexSignal },
    /// `h0(t) J0 + h*(t) J+ + h(t) J-`.
    Su2 { h0: Signal, h: ComplexSignal },
    /// `h0(t) K0 + h(t) K+ + h*(t) K-`.
    Su11 { h0: Signal, h: ComplexSignal },
    /// `(p^2 + omega^2 q^2)/2 + b (qp + pq)/2 + g/q^2`. The singular term
    /// commutes with the su(1,1) action and leaves the phase-space flow alone.
    Oscillator {
        omega: Signal,
        friction: Signal,
        g: f64,
    },
    /// `sum_ij h_ij(t) a_i^dag a_j`.
    Matrix(MatrixSignal),
}

impl Track {
    pub fn oscillator(omega: Signal, friction: Signal) -> Self {
        Track::Oscillator {
            omega,
            friction,
            g: 0.0,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Track::Glauber { .. } => "glauber",
            Track::Su2 { .. } => "su2",
            Track::Su11 { .. } => "su11",
            Track::Oscillator { .. } => "oscillator",
            Track::Matrix(_) => "matrix",
        }
    }

    pub fn coefficients(&self, s: StageTime) -> Coefficients {
        match self {
            Track::Glauber { omega, force } => Coefficients::Glauber {
                omega: omega.eval(s),
                force: force.eval(s),
            },
            Track::Su2 { h0, h } => Coefficients::Su2 {
                h0: h0.eval(s),
                h: h.eval(s),
            },
            Track::Su11 { h0, h } => Coefficients::Su11 {
                h0: h0.eval(s),
                h: h.eval(s),
            },
            Track::Oscillator {
                omega, friction, ..
            } => Coefficients::oscillator(omega.eval(s), friction.eval(s)),
            Track::Matrix(m) => Coefficients::Matrix(m.eval(s)),
        }
    }

    /// Sorted, deduplicated breakpoints of every channel.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = match self {
            Track::Glauber { omega, force } => {
                let mut b = omega.breakpoints();
                b.extend(force.breakpoints());
                b
            }
            Track::Su2 { h0, h } | Track::Su11 { h0, h } => {
                let mut b = h0.breakpoints();
                b.extend(h.breakpoints());
                b
            }
            Track::Oscillator {
                omega, friction, ..
            } => {
                let mut b = omega.breakpoints();
                b.extend(friction.breakpoints());
                b
            }
            Track::Matrix(m) => m.breakpoints(),
        };
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    pub fn is_piecewise_constant(&self) -> bool {
        match self {
            Track::Glauber { omega, force } => {
                omega.is_piecewise_constant() && force.is_piecewise_constant()
            }
            Track::Su2 { h0, h } | Track::Su11 { h0, h } => {
                h0.is_piecewise_constant() && h.is_piecewise_constant()
            }
            Track::Oscillator {
                omega, friction, ..
            } => omega.is_piecewise_constant() && friction.is_piecewise_constant(),
            Track::Matrix(m) => m.is_piecewise_constant(),
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        match self {
            Track::Glauber { omega, force } => {
                omega.validate()?;
                force.validate()
            }
            Track::Su2 { h0, h } | Track::Su11 { h0, h } => {
                h0.validate()?;
                h.validate()
            }
            Track::Oscillator { omega, friction, g } => {
                omega.validate()?;
                friction.validate()?;
                if !(g.is_finite() && *g > -0.125) {
                    return Err(Error::InvalidArgument(format!(
                        "singular coupling g = {g} must exceed -1/8"
                    )));
                }
                Ok(())
            }
            Track::Matrix(m) => m.validate(horizon),
        }
    }
}

/// Strictly increasing output times starting at the initial time.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2
            || points.iter().any(|t| !t.is_finite())
            || points.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidGrid);
        }
        Ok(Self(points))
    }

    /// `n + 1` equally spaced points on `[0, horizon]`.
    pub fn uniform(horizon: f64, n: usize) -> Result<Self> {
        if !(horizon > 0.0) || n == 0 {
            return Err(Error::InvalidGrid);
        }
        Self::new((0..=n).map(|i| horizon * i as f64 / n as f64).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.0[0]
    }

    pub fn end(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// Index of the grid point within `tol` of `t`.
    pub fn index_of(&self, t: f64, tol: f64) -> Option<usize> {
        let i = self.0.partition_point(|&s| s < t - tol);
        (i < self.0.len() && (self.0[i] - t).abs() <= tol).then_some(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_is_right_continuous() {
        let s = Signal::piecewise(vec![1.0, 2.0], vec![10.0, 20.0, 30.0]).unwrap();
        assert_eq!(s.value(0.5), 10.0);
        assert_eq!(s.value(1.0), 20.0);
        assert_eq!(s.value(2.5), 30.0);
        // a stage at the right end of a substep reads the substep's value
        assert_eq!(s.eval(StageTime { t: 1.0, anchor: 0.9 }), 10.0);
        assert!((s.integral(0.5, 2.5) - (5.0 + 20.0 + 15.0)).abs() < 1e-14);
        assert!(Signal::piecewise(vec![1.0], vec![1.0]).is_err());
        assert!(Signal::piecewise(vec![2.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn sinusoid_integral_matches_quadrature() {
        let s = Signal::Sinusoid {
            offset: 1.0,
            amplitude: 0.2,
            frequency: 1.3,
            phase: 0.4,
        };
        let q = crate::numeric::Quadrature::new(16);
        let num = q.integrate(0.2, 7.0, 20, |t| s.value(t));
        assert!((s.integral(0.2, 7.0) - num).abs() < 1e-12);
    }

    #[test]
    fn sampled_interpolates_linearly() {
        let s = Signal::Sampled {
            times: vec![0.0, 1.0, 3.0],
            values: vec![0.0, 2.0, 0.0],
        };
        assert_eq!(s.value(0.5), 1.0);
        assert_eq!(s.value(2.0), 1.0);
        assert_eq!(s.value(5.0), 0.0);
        assert!((s.integral(0.0, 3.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn matrix_track_rejects_non_hermitian_samples() {
        let mut entries = vec![ComplexSignal::default(); 4];
        entries[1] = ComplexSignal::constant(Complex64::new(0.0, 1.0));
        entries[2] = ComplexSignal::constant(Complex64::new(0.0, 1.0));
        let m = MatrixSignal::new(2, entries).unwrap();
        assert!(matches!(m.validate(1.0), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn grid_lookup() {
        let g = TimeGrid::uniform(2.0, 4).unwrap();
        assert_eq!(g.index_of(1.5, 1e-12), Some(3));
        assert_eq!(g.index_of(1.4, 1e-12), None);
        assert!(TimeGrid::new(vec![0.0, 0.0]).is_err());
    }
}
