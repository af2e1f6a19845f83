//! Mean values two ways: closed forms in the phase-space label, and direct
//! contraction with coefficient vectors.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{fock_ladder, quadrature_squares, su11_generators, OperatorMatrix, Parity, Spin};
use crate::error::{Error, Result};
use crate::states::{parity_cs, su11_cs, thermal_cs, Basis, StateVector, Truncation};

/// Relative agreement required between the two evaluation paths.
pub const OBSERVABLE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FormulaStatus {
    Verified,
    /// The closed form is the corrected one; `printed` keeps the uncorrected value.
    Corrected,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableReport {
    pub name: String,
    pub closed_form: Complex64,
    pub matrix_value: Complex64,
    pub printed: Option<Complex64>,
    pub status: FormulaStatus,
}

impl ObservableReport {
    pub fn new(name: impl Into<String>, closed_form: Complex64, matrix_value: Complex64) -> Self {
        Self {
            name: name.into(),
            closed_form,
            matrix_value,
            printed: None,
            status: FormulaStatus::Verified,
        }
    }

    pub fn with_printed(mut self, printed: Complex64) -> Self {
        self.printed = Some(printed);
        self.status = FormulaStatus::Corrected;
        self
    }

    pub fn abs_discrepancy(&self) -> f64 {
        (self.closed_form - self.matrix_value).norm()
    }

    /// Discrepancy relative to `max(|closed|, 1)`.
    pub fn rel_discrepancy(&self) -> f64 {
        self.abs_discrepancy() / self.closed_form.norm().max(1.0)
    }

    pub fn passes(&self) -> bool {
        self.rel_discrepancy() <= OBSERVABLE_TOLERANCE
    }
}

/// `<psi|A|psi>`.
pub fn mean_value(state: &StateVector, op: &OperatorMatrix) -> Result<Complex64> {
    if op.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: op.dim(),
        });
    }
    Ok(state.coeffs().dotc(&(op.matrix() * state.coeffs())))
}

/// Coefficients of a two-mode state as a `trunc_a x trunc_b` matrix.
fn coefficient_matrix(state: &StateVector) -> Result<DMatrix<Complex64>> {
    match state.basis() {
        Basis::TwoMode { trunc_a, trunc_b } => Ok(DMatrix::from_row_slice(
            trunc_a,
            trunc_b,
            state.coeffs().as_slice(),
        )),
        other => Err(Error::InvalidArgument(format!(
            "two-mode mean needs a two-mode state, got {other:?}"
        ))),
    }
}

/// `<psi| A (x) B |psi> = tr(C^dag A C B^T)`.
pub fn two_mode_mean(state: &StateVector, a: &OperatorMatrix, b: &OperatorMatrix) -> Result<Complex64> {
    let c = coefficient_matrix(state)?;
    if a.dim() != c.nrows() || b.dim() != c.ncols() {
        return Err(Error::DimensionMismatch {
            expected: c.nrows() * c.ncols(),
            found: a.dim() * b.dim(),
        });
    }
    Ok((c.adjoint() * a.matrix() * &c * b.matrix().transpose()).trace())
}

/// Closed-form `<X+>, <X->, <X0>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderMeans {
    pub plus: Complex64,
    pub minus: Complex64,
    pub zero: f64,
}

/// `<J+> = 2j z*/(1 + |z|^2)`, `<J-> = 2j z/(1 + |z|^2)`,
/// `<J0> = -j (1 - |z|^2)/(1 + |z|^2)`.
pub fn su2_means_closed(spin: Spin, z: Complex64) -> LadderMeans {
    let j = spin.value();
    let u = z.norm_sqr();
    LadderMeans {
        plus: 2.0 * j * z.conj() / (1.0 + u),
        minus: 2.0 * j * z / (1.0 + u),
        zero: -j * (1.0 - u) / (1.0 + u),
    }
}

/// `<J0>` as printed, without the factor `j`.
pub fn su2_j0_printed(z: Complex64) -> f64 {
    let u = z.norm_sqr();
    -(1.0 - u) / (1.0 + u)
}

/// `<K+> = 2k z*/(1 - |z|^2)`, `<K-> = 2k z/(1 - |z|^2)`,
/// `<K0> = k (1 + |z|^2)/(1 - |z|^2)`.
pub fn su11_means_closed(k: f64, z: Complex64) -> Result<LadderMeans> {
    if !(z.norm() < 1.0) {
        return Err(Error::OutsideDisc(z));
    }
    let u = z.norm_sqr();
    Ok(LadderMeans {
        plus: 2.0 * k * z.conj() / (1.0 - u),
        minus: 2.0 * k * z / (1.0 - u),
        zero: k * (1.0 + u) / (1.0 - u),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureMeans {
    pub q2: f64,
    pub p2: f64,
}

impl QuadratureMeans {
    pub fn product(&self) -> f64 {
        self.q2 * self.p2
    }
}

/// `<q^2> = 2k |1 - z|^2/(1 - |z|^2)`, `<p^2> = 2k |1 + z|^2/(1 - |z|^2)`
/// for `q^2 = 2K0 - K+ - K-`, `p^2 = 2K0 + K+ + K-`.
pub fn quadrature_means(k: f64, z: Complex64) -> Result<QuadratureMeans> {
    if !(z.norm() < 1.0) {
        return Err(Error::OutsideDisc(z));
    }
    let u = z.norm_sqr();
    let one = Complex64::new(1.0, 0.0);
    Ok(QuadratureMeans {
        q2: 2.0 * k * (one - z).norm_sqr() / (1.0 - u),
        p2: 2.0 * k * (one + z).norm_sqr() / (1.0 - u),
    })
}

/// `<q^2><p^2> = 4k^2 |1 - z^2|^2 / (1 - |z|^2)^2 >= 4k^2` (`<q> = <p> = 0`).
pub fn uncertainty_product(k: f64, z: Complex64) -> Result<f64> {
    Ok(quadrature_means(k, z)?.product())
}

/// `4k^2 (1 + r^4 - 2 r^2 cos 2 theta) / (1 - r^2)^exponent`; the printed
/// exponent is 1.
pub fn uncertainty_product_with_exponent(k: f64, z: Complex64, exponent: f64) -> f64 {
    let r2 = z.norm_sqr();
    4.0 * k * k * (1.0 + r2 * r2 - 2.0 * r2 * (2.0 * z.arg()).cos()) / (1.0 - r2).powf(exponent)
}

/// `<q^2>, <p^2>` by contraction with the parity state in a Fock basis.
pub fn parity_quadrature_means(parity: Parity, z: Complex64, trunc: impl Into<Truncation>) -> Result<QuadratureMeans> {
    let state = parity_cs(parity, z, trunc)?;
    let (q2, p2) = quadrature_squares(state.dim());
    Ok(QuadratureMeans {
        q2: mean_value(&state, &q2)?.re,
        p2: mean_value(&state, &p2)?.re,
    })
}

/// Second moments of the Landau-level coherent state with
/// `a = (1 + s)/(2 rho^2 (1 - s))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MagneticMeans {
    /// `(N + 1) / (4 Re a)`.
    pub x2: f64,
    /// `Re a (1 + (N + 1) Im^2 a / Re^2 a)`, the moment of the profile
    /// `r^N e^{-a r^2}` as printed.
    pub px2: f64,
    /// `(N + 1) |a|^2 / Re a`, the moment once the angular factor
    /// `e^{i N theta}` of an `L3 = N` state is included. Equal to `px2` at `N = 0`.
    pub px2_angular: f64,
}

impl MagneticMeans {
    pub fn product(&self) -> f64 {
        self.x2 * self.px2
    }
}

pub fn magnetic_means(n: u32, s: Complex64, rho: f64) -> Result<MagneticMeans> {
    if !(s.norm() < 1.0) {
        return Err(Error::OutsideDisc(s));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("rho = {rho} must be positive")));
    }
    let one = Complex64::new(1.0, 0.0);
    let a = (one + s) / (2.0 * rho * rho * (one - s));
    let n1 = n as f64 + 1.0;
    Ok(MagneticMeans {
        x2: n1 / (4.0 * a.re),
        px2: a.re * (1.0 + n1 * a.im * a.im / (a.re * a.re)),
        px2_angular: n1 * a.norm_sqr() / a.re,
    })
}

/// `<x^2>, <p_x^2>` at `t = 0`, `rho' = 0` from the two-mode state
/// `sum_n c_n |n, N + n>` in the number basis of `A, B`, with
/// `x = (rho / 2i)(A^dag - A + i(B^dag + B))`,
/// `p_x = (A + A^dag + i(B^dag - B)) / (2 rho)` and `c_n` the `k = (N+1)/2`
/// coefficients at `zeta = i s`.
pub fn magnetic_two_mode_means(n: u32, s: Complex64, rho: f64, trunc: usize) -> Result<(f64, f64)> {
    let n = n as usize;
    let zeta = Complex64::new(0.0, 1.0) * s;
    let sector = su11_cs((n as f64 + 1.0) / 2.0, zeta, trunc)?;
    let (ta, tb) = (trunc + 1, trunc + n + 1);
    let mut c = DMatrix::<Complex64>::zeros(ta, tb);
    for (i, cn) in sector.coeffs().iter().enumerate() {
        c[(i, n + i)] = *cn;
    }
    let (a, ad) = fock_ladder(ta);
    let (b, bd) = fock_ladder(tb);
    let i = Complex64::new(0.0, 1.0);
    let ac = a.matrix() * &c;
    let adc = ad.matrix() * &c;
    let cb = &c * b.matrix().transpose();
    let cbd = &c * bd.matrix().transpose();
    let x = (&adc - &ac + (&cbd + &cb) * i) * (rho / (2.0 * i));
    let p = (&ac + &adc + (&cbd - &cb) * i) / Complex64::new(2.0 * rho, 0.0);
    Ok((x.norm_squared(), p.norm_squared()))
}

/// `<q^2> = (2k/(1 - |z|^2)) (|eps|^2 (1 + |z|^2) - z* eps^2 - z eps*^2)`.
pub fn singular_q2_mean(k: f64, z: Complex64, eps: Complex64) -> Result<f64> {
    if !(z.norm() < 1.0) {
        return Err(Error::OutsideDisc(z));
    }
    let u = z.norm_sqr();
    let bracket = eps.norm_sqr() * (1.0 + u) - z.conj() * eps * eps - z * (eps * eps).conj();
    Ok(2.0 * k / (1.0 - u) * bracket.re)
}

/// `q^2 = 2 |eps|^2 M0 - eps^2 M+ - eps*^2 M-` on the truncated discrete series.
pub fn singular_q2_operator(k: f64, eps: Complex64, trunc: usize) -> Result<OperatorMatrix> {
    let g = su11_generators(k, trunc)?;
    let e2 = eps * eps;
    Ok(&(&g.diagonal.scale(Complex64::new(2.0 * eps.norm_sqr(), 0.0)) - &g.raising.scale(e2))
        - &g.lowering.scale(e2.conj()))
}

/// Dropped canonical weight above which `thermal_average_check` refuses.
pub const THERMAL_TAIL_TOLERANCE: f64 = 1e-14;

/// `<1/2; z| A (x) I |1/2; z>` at `z = e^{-beta omega / 2}` against
/// `Z^{-1} tr(A e^{-beta omega a^dag a})` for a diagonal `A` on `trunc` levels.
pub fn thermal_average_check(beta_omega: f64, op: &OperatorMatrix, trunc: usize) -> Result<ObservableReport> {
    if !(beta_omega > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta omega = {beta_omega} must be positive"
        )));
    }
    if op.dim() != trunc {
        return Err(Error::DimensionMismatch {
            expected: trunc,
            found: op.dim(),
        });
    }
    let off_diagonal = (0..trunc)
        .flat_map(|i| (0..trunc).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| op.get(i, j).norm())
        .fold(0.0, f64::max);
    if off_diagonal > 0.0 {
        return Err(Error::InvalidArgument(
            "thermal identity needs an operator diagonal in the Fock basis".into(),
        ));
    }
    let tail = (-beta_omega * trunc as f64).exp();
    if tail > THERMAL_TAIL_TOLERANCE {
        return Err(Error::TailTolerance {
            mass: tail,
            tol: THERMAL_TAIL_TOLERANCE,
            trunc,
        });
    }
    let z = (-beta_omega / 2.0).exp();
    let state = thermal_cs(z, trunc)?;
    let matrix_value = two_mode_mean(&state, op, &OperatorMatrix::identity(trunc))?;
    let weights: Vec<f64> = (0..trunc).map(|n| (-beta_omega * n as f64).exp()).collect();
    let partition: f64 = weights.iter().sum();
    let trace: Complex64 = weights
        .iter()
        .enumerate()
        .map(|(n, w)| op.get(n, n) * *w)
        .sum();
    Ok(ObservableReport::new(
        format!("thermal <A> at beta omega = {beta_omega}"),
        trace / partition,
        matrix_value,
    ))
}

/// `<a_i^dag a_j> = m conj(w_i) w_j / (1 + |z|^2)` with `w = (1, z)`.
pub fn un1_number_mean(m: usize, z: &[Complex64], i: usize, j: usize) -> Complex64 {
    let w = |k: usize| {
        if k == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            z[k - 1]
        }
    };
    let zz: f64 = z.iter().map(|x| x.norm_sqr()).sum();
    m as f64 * w(i).conj() * w(j) / (1.0 + zz)
}
