//! Position-space wavefunctions `norm * x^p * exp(-a x^2)` of the oscillator
//! families. Normalization constants come from the Gaussian moments
//! `int_0^inf x^{2p} e^{-2 Re(a) x^2} dx = Gamma(p + 1/2) / (2 (2 Re a)^{p + 1/2})`.

use num_complex::Complex64;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::algebra::Parity;
use crate::error::{Error, Result};
use crate::flow::EpsilonSolution;
use crate::numeric::{laguerre, ln_factorial};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WavefunctionFamily {
    /// `x^{0 or 1} e^{-a x^2}` on the real line.
    Parity(Parity),
    /// `x^{d + 1/2} e^{-a x^2}` on `x > 0`.
    Singular { d: f64 },
    /// Radial `r^N e^{-a r^2}` in the plane, area measure `r dr dtheta`.
    Magnetic { n: u32 },
}

/// Classical data `eps`, `eps'`, friction `b` and unwrapped phase at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonPoint {
    pub eps: Complex64,
    pub eps_dot: Complex64,
    pub b: f64,
    pub gamma: f64,
}

impl EpsilonPoint {
    pub fn from_solution(sol: &EpsilonSolution, index: usize, b: f64) -> Self {
        Self {
            eps: sol.eps[index],
            eps_dot: sol.eps_dot[index],
            b,
            gamma: sol.gamma[index],
        }
    }

    /// `eps = rho e^{i gamma}`, `eps' = (rho' + i / rho) e^{i gamma}`.
    pub fn from_polar(rho: f64, rho_dot: f64, gamma: f64, b: f64) -> Self {
        let phase = Complex64::from_polar(1.0, gamma);
        Self {
            eps: rho * phase,
            eps_dot: (rho_dot + Complex64::new(0.0, 1.0 / rho)) * phase,
            b,
            gamma,
        }
    }

    /// `eps = Omega^{-1/2} e^{i Omega t}`.
    pub fn stationary(big_omega: f64, t: f64) -> Self {
        let eps = Complex64::from_polar(big_omega.powf(-0.5), big_omega * t);
        Self {
            eps,
            eps_dot: Complex64::new(0.0, big_omega) * eps,
            b: 0.0,
            gamma: big_omega * t,
        }
    }

    pub fn rho(&self) -> f64 {
        self.eps.norm()
    }

    /// `gamma' = 1 / rho^2`.
    pub fn gamma_dot(&self) -> f64 {
        1.0 / self.eps.norm_sqr()
    }

    /// `rho' / rho = Re(eps' / eps)`.
    pub fn log_rho_dot(&self) -> f64 {
        (self.eps_dot / self.eps).re
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WavefunctionParams {
    pub family: WavefunctionFamily,
    /// Complex Gaussian width.
    pub a: Complex64,
    /// `(1 - |z|^2) / |1 - z|^2` (or the same in `s` for the magnetic family).
    pub lambda: f64,
    /// Normalization constant including any constant phase.
    pub norm: Complex64,
}

fn one_minus_ratio(z: Complex64) -> Result<f64> {
    if !(z.norm() < 1.0) {
        return Err(Error::OutsideDisc(z));
    }
    Ok((1.0 - z.norm_sqr()) / (Complex64::new(1.0, 0.0) - z).norm_sqr())
}

impl WavefunctionParams {
    /// Generic constructor; `norm` is fixed from `a` and the family.
    pub fn new(family: WavefunctionFamily, a: Complex64, lambda: f64) -> Result<Self> {
        if !(a.re > 0.0 && a.im.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Gaussian width must have positive real part, got {a}"
            )));
        }
        let mut params = Self {
            family,
            a,
            lambda,
            norm: Complex64::new(0.0, 0.0),
        };
        let two_re = 2.0 * a.re;
        let p = params.power();
        let n2 = match family {
            WavefunctionFamily::Parity(_) => two_re.powf(p + 0.5) / gamma(p + 0.5),
            WavefunctionFamily::Singular { .. } => 2.0 * two_re.powf(p + 0.5) / gamma(p + 0.5),
            // int |psi|^2 2 pi r dr = pi Gamma(N + 1) / (2 Re a)^{N + 1}
            WavefunctionFamily::Magnetic { n } => {
                (two_re.powf(n as f64 + 1.0).ln() - ln_factorial(n as usize)).exp()
                    / std::f64::consts::PI
            }
        };
        params.norm = Complex64::new(n2.sqrt(), 0.0);
        Ok(params)
    }

    /// `<x|+-; z>` with `a = (1 + z) / (2 (1 - z))`.
    pub fn parity(parity: Parity, z: Complex64) -> Result<Self> {
        let lambda = one_minus_ratio(z)?;
        let one = Complex64::new(1.0, 0.0);
        Self::new(
            WavefunctionFamily::Parity(parity),
            (one + z) / (2.0 * (one - z)),
            lambda,
        )
    }

    /// Coherent state of the singular oscillator with `k = (d + 1)/2` at
    /// classical data `eps`. With `s = z e^{-2 i gamma}`,
    /// `a = (gamma'/2)(1 + s)/(1 - s) - (i/2)(rho'/rho - b)`, and the phase
    /// `e^{-i(d+1) gamma} (1 - s)^{-d-1} / |1 - s|^{-d-1}` is kept in `norm`
    /// so the result equals the sum over eigenfunctions.
    pub fn singular(d: f64, z: Complex64, eps: &EpsilonPoint) -> Result<Self> {
        if !(d > 0.0) {
            return Err(Error::InvalidArgument(format!("singular index d = {d} must be positive")));
        }
        let s = z * Complex64::from_polar(1.0, -2.0 * eps.gamma);
        let lambda = one_minus_ratio(s)?;
        let one = Complex64::new(1.0, 0.0);
        let a = eps.gamma_dot() / 2.0 * (one + s) / (one - s)
            - Complex64::new(0.0, 0.5 * (eps.log_rho_dot() - eps.b));
        let mut params = Self::new(WavefunctionFamily::Singular { d }, a, lambda)?;
        let phase = -(d + 1.0) * (eps.gamma + (one - s).arg());
        params.norm *= Complex64::from_polar(1.0, phase);
        Ok(params)
    }

    /// Landau-level state with `a = (1 + s) / (2 rho^2 (1 - s))`.
    pub fn magnetic(n: u32, s: Complex64, rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidArgument(format!("rho = {rho} must be positive")));
        }
        let lambda = one_minus_ratio(s)?;
        let one = Complex64::new(1.0, 0.0);
        Self::new(
            WavefunctionFamily::Magnetic { n },
            (one + s) / (2.0 * rho * rho * (one - s)),
            lambda,
        )
    }

    /// Exponent of the power-law prefactor.
    pub fn power(&self) -> f64 {
        match self.family {
            WavefunctionFamily::Parity(p) => p.offset() as f64,
            WavefunctionFamily::Singular { d } => d + 0.5,
            WavefunctionFamily::Magnetic { n } => n as f64,
        }
    }

    /// Lower end of the coordinate range.
    pub fn lower_bound(&self) -> f64 {
        match self.family {
            WavefunctionFamily::Parity(_) => f64::NEG_INFINITY,
            _ => 0.0,
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        if x < self.lower_bound() {
            return Complex64::new(0.0, 0.0);
        }
        let prefactor = match self.family {
            WavefunctionFamily::Parity(Parity::Even) => 1.0,
            WavefunctionFamily::Parity(Parity::Odd) => x,
            _ => x.powf(self.power()),
        };
        self.norm * prefactor * (-self.a * x * x).exp()
    }

    /// `|psi|^2`; per unit length, or per unit area for the magnetic family.
    pub fn density(&self, x: f64) -> f64 {
        self.eval(x).norm_sqr()
    }

    /// Location of the density maximum: `x^2 = p / (2 Re a)`.
    pub fn density_argmax(&self) -> f64 {
        (self.power() / (2.0 * self.a.re)).sqrt()
    }
}

/// Magnetic density per unit area in `w = (x + i y)/sqrt(2)`, as a function
/// of `|w|`; its maximum sits at `|w|^2 = N / (4 Re a)`.
pub fn magnetic_density_at_w(params: &WavefunctionParams, w: f64) -> f64 {
    2.0 * params.density(std::f64::consts::SQRT_2 * w)
}

/// Normalized eigenfunction `n` of the singular oscillator's invariant, with
/// `d = sqrt(1 + 8 g)/2`:
/// `N_n eps^{-d-1}/|eps|^{-d-1} x^{d+1/2} exp(-2 i n gamma + (i/2)(eps'/eps - b) x^2) L_n^d(gamma' x^2)`,
/// `N_n = (2 n! gamma'^{d+1} / Gamma(n + d + 1))^{1/2}`.
pub fn singular_eigenfunction(d: f64, n: usize, eps: &EpsilonPoint, x: f64) -> Complex64 {
    if x <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let gd = eps.gamma_dot();
    let log_n2 = 2f64.ln() + ln_factorial(n) + (d + 1.0) * gd.ln() - ln_gamma(n as f64 + d + 1.0);
    let phase = -(d + 1.0) * eps.gamma - 2.0 * n as f64 * eps.gamma;
    let gauss = Complex64::new(0.0, 0.5) * (eps.eps_dot / eps.eps - eps.b) * x * x;
    Complex64::from_polar((0.5 * log_n2).exp() * x.powf(d + 0.5), phase)
        * gauss.exp()
        * laguerre(n, d, gd * x * x)
}

pub fn singular_cs_wavefunction(d: f64, z: Complex64, eps: &EpsilonPoint, x: f64) -> Result<Complex64> {
    Ok(WavefunctionParams::singular(d, z, eps)?.eval(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{golden_section_max, Quadrature};
    use crate::states::su11_cs;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn total(params: &WavefunctionParams) -> f64 {
        let q = Quadrature::new(16);
        let range = 12.0 / params.a.re.sqrt();
        match params.family {
            WavefunctionFamily::Parity(_) => q.integrate(-range, range, 200, |x| params.density(x)),
            WavefunctionFamily::Singular { .. } => q.integrate(0.0, range, 200, |x| params.density(x)),
            WavefunctionFamily::Magnetic { .. } => q.integrate(0.0, range, 200, |r| {
                2.0 * std::f64::consts::PI * r * params.density(r)
            }),
        }
    }

    #[test]
    fn vacuum_density() {
        let p = WavefunctionParams::parity(Parity::Even, c(0.0, 0.0)).unwrap();
        for x in [-1.3f64, 0.0, 0.4, 2.0] {
            let expected = (-x * x).exp() / std::f64::consts::PI.sqrt();
            assert!((p.density(x) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn densities_are_normalized() {
        let eps = EpsilonPoint::from_polar(0.94, 0.25, 0.56, 0.2);
        let all = [
            WavefunctionParams::parity(Parity::Even, c(0.3, -0.4)).unwrap(),
            WavefunctionParams::parity(Parity::Odd, c(-0.5, 0.2)).unwrap(),
            WavefunctionParams::singular(1.5, c(0.2, 0.6), &eps).unwrap(),
            WavefunctionParams::magnetic(4, c(0.1, -0.3), 1.3).unwrap(),
        ];
        for p in &all {
            assert!((total(p) - 1.0).abs() < 1e-8, "{:?}", p.family);
        }
    }

    #[test]
    fn odd_density_peaks_at_inverse_lambda() {
        let p = WavefunctionParams::parity(Parity::Odd, c(0.3, 0.5)).unwrap();
        let x = golden_section_max(0.0, 5.0, 1e-10, |x| p.density(x));
        assert!((x * x - 1.0 / p.lambda).abs() < 1e-6);
        // printed form pi^{-1/2} 2 x^2 lambda^{3/2} e^{-lambda x^2}
        let printed = 2.0 * x * x * p.lambda.powf(1.5) * (-p.lambda * x * x).exp()
            / std::f64::consts::PI.sqrt();
        assert!((printed - p.density(x)).abs() < 1e-12);
    }

    #[test]
    fn magnetic_peak_in_w() {
        let p = WavefunctionParams::magnetic(4, c(0.2, 0.1), 0.9).unwrap();
        let w = golden_section_max(0.0, 5.0, 1e-10, |w| magnetic_density_at_w(&p, w));
        assert!((w - (4.0 / (4.0 * p.a.re)).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn singular_ground_state_peak() {
        let eps = EpsilonPoint::stationary(1.4, 0.3);
        let d = 1.5;
        let x = golden_section_max(0.01, 5.0, 1e-12, |x| {
            singular_eigenfunction(d, 0, &eps, x).norm_sqr()
        });
        assert!((x * x - (d + 0.5) / eps.gamma_dot()).abs() < 1e-6);
    }

    #[test]
    fn singular_eigenfunctions_are_orthonormal() {
        let eps = EpsilonPoint::from_polar(0.8, -0.3, 0.52, 0.3);
        let q = Quadrature::new(16);
        for n in 0..=4 {
            for m in 0..=4 {
                let overlap = q.integrate_complex(0.0, 14.0, 400, |x| {
                    singular_eigenfunction(1.2, n, &eps, x).conj()
                        * singular_eigenfunction(1.2, m, &eps, x)
                });
                let expected = if n == m { 1.0 } else { 0.0 };
                assert!((overlap - expected).norm() < 1e-8, "{n} {m} {overlap}");
            }
        }
    }

    #[test]
    fn stationary_eigenfunction_phases() {
        let (big, d, x) = (1.3, 0.8, 0.9);
        let ratio = |t: f64, n: usize| {
            let e = EpsilonPoint::stationary(big, t);
            singular_eigenfunction(d, n, &e, x) / singular_eigenfunction(d, 0, &e, x)
        };
        for t in [0.4, 1.7] {
            for n in 1..4 {
                let rel = ratio(t, n) / ratio(0.0, n);
                let expected = Complex64::from_polar(1.0, -2.0 * n as f64 * big * t);
                assert!((rel - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn coherent_wavefunction_is_the_eigenfunction_sum() {
        let eps = EpsilonPoint::from_polar(0.92, 0.4, -0.22, -0.1);
        let (d, z) = (1.1, c(0.35, 0.25));
        let coeffs = su11_cs((d + 1.0) / 2.0, z, 200).unwrap();
        for x in [0.3, 1.0, 1.8] {
            let sum: Complex64 = coeffs
                .coeffs()
                .iter()
                .enumerate()
                .map(|(n, cn)| cn * singular_eigenfunction(d, n, &eps, x))
                .sum();
            let closed = singular_cs_wavefunction(d, z, &eps, x).unwrap();
            assert!((sum - closed).norm() < 1e-10, "{x}: {sum} vs {closed}");
        }
    }

    #[test]
    fn rejects_non_normalizable_width() {
        assert!(WavefunctionParams::new(WavefunctionFamily::Magnetic { n: 1 }, c(0.0, 1.0), 1.0).is_err());
        assert!(WavefunctionParams::parity(Parity::Even, c(1.0, 0.0)).is_err());
    }
}
