use nalgebra::DVector;
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use super::{series_tail, with_truncation, Basis, StateVector, Truncation};
use crate::algebra::{Parity, RepLabel, Spin, SymmetricSector};
use crate::error::{Error, Result};
use crate::flow::SpherePoint;
use crate::numeric::{ln_binomial, ln_factorial};

/// `sqrt(exp(log_mag2)) * z^n` without overflow in either factor.
fn power_term(log_mag2: f64, z: Complex64, n: usize) -> Complex64 {
    if n == 0 {
        return Complex64::new((0.5 * log_mag2).exp(), 0.0);
    }
    if z.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let log_mag = 0.5 * log_mag2 + n as f64 * z.norm().ln();
    Complex64::from_polar(log_mag.exp(), n as f64 * z.arg())
}

fn check_disc(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::OutsideDisc(z))
    }
}

/// Glauber state `e^{-|z|^2/2} sum z^n / sqrt(n!) |n>`.
pub fn glauber_cs(z: Complex64, trunc: impl Into<Truncation>) -> Result<StateVector> {
    let u = z.norm_sqr();
    let log_norm = -u;
    with_truncation(trunc.into(), 1, |n| {
        let coeffs = DVector::from_fn(n, |i, _| power_term(log_norm - ln_factorial(i), z, i));
        let tail = if u == 0.0 {
            0.0
        } else {
            series_tail(n, |i| log_norm + i as f64 * u.ln() - ln_factorial(i))
        };
        StateVector::new(Basis::Fock { trunc: n }, coeffs, tail)
    })
}

/// Spin coherent state `(1 + |z|^2)^{-j} exp(z J+) |j, -j>`.
pub fn su2_cs(spin: Spin, z: Complex64) -> StateVector {
    let two_j = spin.twice() as usize;
    let log_norm = -spin.value() * 2.0 * (1.0 + z.norm_sqr()).ln();
    let coeffs = DVector::from_fn(spin.dim(), |m, _| {
        power_term(log_norm + ln_binomial(two_j, m), z, m)
    });
    StateVector::new(Basis::Su2 { spin }, coeffs, 0.0).expect("dimension matches")
}

/// Spin coherent state at a point given in either chart. In the antipodal
/// chart `w = -1/z` the coefficients are
/// `(-1)^m sqrt(C(2j, m)) w^{2j-m} / (1 + |w|^2)^j`, equal to [`su2_cs`]
/// up to the global phase `(conj(w)/w)^j`; this form stays finite at the pole.
pub fn su2_cs_at(spin: Spin, point: &SpherePoint) -> StateVector {
    if !point.antipodal {
        return su2_cs(spin, point.value);
    }
    let w = point.value;
    let two_j = spin.twice() as usize;
    let log_norm = -spin.value() * 2.0 * (1.0 + w.norm_sqr()).ln();
    let coeffs = DVector::from_fn(spin.dim(), |m, _| {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        power_term(log_norm + ln_binomial(two_j, m), w, two_j - m) * sign
    });
    StateVector::new(Basis::Su2 { spin }, coeffs, 0.0).expect("dimension matches")
}

fn su11_log_weight(k: f64, u: f64, m: usize) -> f64 {
    2.0 * k * (1.0 - u).ln() + ln_gamma(2.0 * k + m as f64) - ln_factorial(m) - ln_gamma(2.0 * k)
}

/// Discrete-series coherent state `(1 - |z|^2)^k exp(z K+) |k; 0>`.
pub fn su11_cs(k: f64, z: Complex64, trunc: impl Into<Truncation>) -> Result<StateVector> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidBargmannIndex(k));
    }
    check_disc(z)?;
    let u = z.norm_sqr();
    with_truncation(trunc.into(), 2, |n| {
        let coeffs = DVector::from_fn(n, |m, _| power_term(su11_log_weight(k, u, m), z, m));
        let tail = if u == 0.0 {
            0.0
        } else {
            series_tail(n, |m| su11_log_weight(k, u, m) + m as f64 * u.ln())
        };
        StateVector::new(Basis::Su11 { k, trunc: n }, coeffs, tail)
    })
}

/// `(1 - |z|^2)^{k} exp(z a^dag^2 / 2) |0>` (even, `k = 1/4`) or `|1>` (odd,
/// `k = 3/4`) in a Fock basis of `trunc` levels.
pub fn parity_cs(parity: Parity, z: Complex64, trunc: impl Into<Truncation>) -> Result<StateVector> {
    check_disc(z)?;
    let k = parity.bargmann_index();
    with_truncation(trunc.into(), 2, |n| {
        let sector = (n - parity.offset()).div_ceil(2).max(2);
        su11_cs(k, z, Truncation::Fixed(sector))?.embed_parity(parity, n)
    })
}

/// Two-mode state `(1 - z^2)^{1/2} sum z^n |n, n>` for real `0 <= z < 1`.
pub fn thermal_cs(z: f64, trunc: impl Into<Truncation>) -> Result<StateVector> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::OutsideDisc(Complex64::new(z, 0.0)));
    }
    let norm = (1.0 - z * z).sqrt();
    with_truncation(trunc.into(), 2, |n| {
        let mut coeffs = DVector::zeros(n * n);
        let mut amp = norm;
        for i in 0..n {
            coeffs[i * n + i] = Complex64::new(amp, 0.0);
            amp *= z;
        }
        // sum_{i >= n} (1 - z^2) z^{2i} = z^{2n}
        let tail = z.powi(2 * n as i32);
        StateVector::new(
            Basis::TwoMode {
                trunc_a: n,
                trunc_b: n,
            },
            coeffs,
            tail,
        )
    })
}

/// `U(N+1)` coherent state with multinomial coefficients on the degree-`m`
/// sector, prefactor `(1 + |z|^2)^{-m/2}`.
pub fn un1_cs(n: usize, m: usize, z: &[Complex64]) -> Result<StateVector> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidRepresentation(format!(
            "u(N+1) needs N >= 1 and m >= 1, got N = {n}, m = {m}"
        )));
    }
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: z.len(),
        });
    }
    let sector = SymmetricSector::new(n + 1, m);
    let zz: f64 = z.iter().map(|x| x.norm_sqr()).sum();
    let log_pref = -(m as f64) * (1.0 + zz).ln() + ln_factorial(m);
    let coeffs = DVector::from_iterator(
        sector.dim(),
        sector.states().iter().map(|occ| {
            let mut log_mag2 = log_pref - ln_factorial(occ[0] as usize);
            let mut c = Complex64::new(1.0, 0.0);
            for (zi, &mi) in z.iter().zip(&occ[1..]) {
                let mi = mi as usize;
                log_mag2 -= ln_factorial(mi);
                if mi > 0 {
                    c *= zi.powu(mi as u32);
                }
            }
            c * (0.5 * log_mag2).exp()
        }),
    );
    StateVector::new(Basis::Un1 { n, m }, coeffs, 0.0)
}

/// The coherent state of `rep` at `z`, at the representation's own size.
pub fn coherent_state(rep: RepLabel, z: &[Complex64]) -> Result<StateVector> {
    let scalar = || match z {
        [z] => Ok(*z),
        _ => Err(Error::DimensionMismatch {
            expected: 1,
            found: z.len(),
        }),
    };
    match rep {
        RepLabel::HeisenbergWeyl { trunc } => glauber_cs(scalar()?, trunc),
        RepLabel::Su2 { spin } => Ok(su2_cs(spin, scalar()?)),
        RepLabel::Su11 { k, trunc } => su11_cs(k, scalar()?, trunc),
        RepLabel::Oscillator { parity, trunc } => parity_cs(parity, scalar()?, trunc),
        RepLabel::Un1 { n, m } => un1_cs(n, m, z),
    }
}

/// Residuals of the two-mode wave-packet identity
/// `sum_N alpha^N / sqrt(N!) |N; z> = exp(alpha (z a^dag + b^dag) / sqrt(1 + |z|^2)) |0, 0>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WavepacketCheck {
    /// Left side (sum over Schwinger sectors) against the exponential series.
    pub residual: f64,
    /// Exponential series against `e^{|alpha|^2/2} |lambda> |mu>`.
    pub product_residual: f64,
    /// `|(A_z - alpha) rhs|` with `A_z = (z* a + b) / sqrt(1 + |z|^2)`.
    pub eigen_residual: f64,
}

pub fn wavepacket_identity_check(alpha: Complex64, z: Complex64, trunc: usize) -> Result<WavepacketCheck> {
    if trunc < 2 {
        return Err(Error::TruncationTooSmall {
            found: trunc,
            min: 2,
        });
    }
    let idx = |na: usize, nb: usize| na * trunc + nb;
    let s = (1.0 + z.norm_sqr()).powf(-0.5);

    // left side, sector by sector from spin coherent states
    let mut lhs = DVector::<Complex64>::zeros(trunc * trunc);
    lhs[idx(0, 0)] = Complex64::new(1.0, 0.0);
    for total in 1..=2 * (trunc - 1) {
        let weight = power_term(-ln_factorial(total), alpha, total);
        let sector = su2_cs(Spin::from_twice(total as u32)?, z);
        for (na, c) in sector.coeffs().iter().enumerate() {
            let nb = total - na;
            if na < trunc && nb < trunc {
                lhs[idx(na, nb)] = weight * c;
            }
        }
    }

    // right side by the power series of the raising operator X on |0, 0>
    let x = |v: &DVector<Complex64>| {
        let mut out = DVector::<Complex64>::zeros(v.len());
        for na in 0..trunc {
            for nb in 0..trunc {
                let c = v[idx(na, nb)];
                if c.norm() == 0.0 {
                    continue;
                }
                if na + 1 < trunc {
                    out[idx(na + 1, nb)] += c * z * ((na + 1) as f64).sqrt();
                }
                if nb + 1 < trunc {
                    out[idx(na, nb + 1)] += c * ((nb + 1) as f64).sqrt();
                }
            }
        }
        out * (alpha * s)
    };
    let mut rhs = DVector::<Complex64>::zeros(trunc * trunc);
    let mut term = rhs.clone();
    term[idx(0, 0)] = Complex64::new(1.0, 0.0);
    for order in 1..=2 * trunc {
        rhs += &term;
        term = x(&term) / Complex64::new(order as f64, 0.0);
        if term.norm() < 1e-20 {
            break;
        }
    }
    rhs += &term;

    let lambda = alpha * z * s;
    let mu = alpha * s;
    let ga = glauber_cs(lambda, trunc)?;
    let gb = glauber_cs(mu, trunc)?;
    let scale = (alpha.norm_sqr() / 2.0).exp();
    let mut product = DVector::<Complex64>::zeros(trunc * trunc);
    for na in 0..trunc {
        for nb in 0..trunc {
            product[idx(na, nb)] = ga.coeffs()[na] * gb.coeffs()[nb] * scale;
        }
    }

    let mut lowered = DVector::<Complex64>::zeros(trunc * trunc);
    for na in 0..trunc {
        for nb in 0..trunc {
            let mut v = Complex64::new(0.0, 0.0);
            if na + 1 < trunc {
                v += z.conj() * ((na + 1) as f64).sqrt() * rhs[idx(na + 1, nb)];
            }
            if nb + 1 < trunc {
                v += ((nb + 1) as f64).sqrt() * rhs[idx(na, nb + 1)];
            }
            lowered[idx(na, nb)] = v * s - alpha * rhs[idx(na, nb)];
        }
    }

    Ok(WavepacketCheck {
        residual: (&lhs - &rhs).norm(),
        product_residual: (&rhs - &product).norm(),
        eigen_residual: lowered.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{fock_ladder, su11_generators, OperatorMatrix};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn apply(op: &OperatorMatrix, v: &StateVector) -> DVector<Complex64> {
        op.matrix() * v.coeffs()
    }

    #[test]
    fn glauber_vacuum_and_mean_number() {
        let vac = glauber_cs(c(0.0, 0.0), 8).unwrap();
        assert!((vac.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(vac.tail_mass(), 0.0);
        let one = glauber_cs(c(1.0, 0.0), Truncation::default()).unwrap();
        let mean: f64 = one
            .coeffs()
            .iter()
            .enumerate()
            .map(|(n, x)| n as f64 * x.norm_sqr())
            .sum();
        assert!((mean - 1.0).abs() < 1e-10);
        assert!((one.norm_sqr() + one.tail_mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn glauber_is_an_eigenvector_of_a() {
        let (a, _) = fock_ladder(64);
        for z in [c(2.0, 0.0), c(-1.2, 1.5), c(0.3, -0.1)] {
            let st = glauber_cs(z, 64).unwrap();
            let resid = apply(&a, &st) - st.coeffs() * z;
            // the top row of a|z> is missing c_64, which is below 1e-10
            assert!(resid.norm() < 1e-10, "{z}");
        }
    }

    #[test]
    fn auto_truncation_meets_tail_tolerance_or_fails() {
        let st = glauber_cs(c(3.0, 1.0), Truncation::default()).unwrap();
        assert!(st.tail_mass() <= 1e-12);
        assert!((1.0 - st.norm_sqr()) <= 1e-12);
        let err = su11_cs(
            0.25,
            c(0.9999, 0.0),
            Truncation::Auto(super::super::TruncationPolicy {
                tail_tol: 1e-12,
                initial: 16,
                cap: 256,
            }),
        );
        assert!(matches!(err, Err(Error::TailTolerance { .. })));
    }

    #[test]
    fn spin_states() {
        let spin = Spin::new(0.5).unwrap();
        let st = su2_cs(spin, c(1.0, 0.0));
        let r = 0.5f64.sqrt();
        assert!((st.coeffs()[0] - c(r, 0.0)).norm() < 1e-15);
        assert!((st.coeffs()[1] - c(r, 0.0)).norm() < 1e-15);
        let low = su2_cs(Spin::new(2.0).unwrap(), c(0.0, 0.0));
        assert!((low.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn antipodal_chart_matches_up_to_phase() {
        let spin = Spin::new(1.5).unwrap();
        for z in [c(0.7, -0.4), c(3.0, 2.0), c(-50.0, 1.0)] {
            let north = su2_cs(spin, z);
            let south = su2_cs_at(spin, &SpherePoint::north(z).flipped());
            assert!((north.fidelity(&south).unwrap() - 1.0).abs() < 1e-12);
        }
        // the pole itself is the highest weight
        let pole = su2_cs_at(
            spin,
            &SpherePoint {
                value: c(0.0, 0.0),
                antipodal: true,
            },
        );
        assert!((pole.coeffs()[3].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn su11_mean_k0() {
        let (k, z) = (0.75, c(0.3, 0.4));
        let st = su11_cs(k, z, Truncation::default()).unwrap();
        let g = su11_generators(k, st.dim()).unwrap();
        let mean = st.coeffs().dotc(&apply(&g.diagonal, &st));
        let u = z.norm_sqr();
        assert!((mean.re - k * (1.0 + u) / (1.0 - u)).abs() < 1e-10);
        assert!(su11_cs(k, c(1.0, 0.0), 8).is_err());
    }

    #[test]
    fn parity_states_match_the_sector_states() {
        let z = c(0.5, 0.0);
        let even = parity_cs(Parity::Even, z, 80).unwrap();
        let sector = su11_cs(0.25, z, 40).unwrap();
        for m in 0..40 {
            assert!((even.coeffs()[2 * m] - sector.coeffs()[m]).norm() < 1e-15);
            assert_eq!(even.coeffs()[2 * m + 1], c(0.0, 0.0));
        }
        // c_{2m} = (1 - |z|^2)^{1/4} z^m sqrt((2m)!) / (2^m m!)
        let pref = (1.0 - 0.25f64).powf(0.25);
        for m in 0..6usize {
            let fact = |n: usize| (1..=n).map(|x| x as f64).product::<f64>();
            let expected = pref * 0.5f64.powi(m as i32) * fact(2 * m).sqrt()
                / (2f64.powi(m as i32) * fact(m));
            assert!((even.coeffs()[2 * m].re - expected).abs() < 1e-14);
        }
        let odd = parity_cs(Parity::Odd, c(0.0, 0.0), 10).unwrap();
        assert!((odd.coeffs()[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn thermal_state_is_the_k_one_half_state() {
        let z = 0.6;
        let th = thermal_cs(z, 60).unwrap();
        let sector = su11_cs(0.5, c(z, 0.0), 60).unwrap();
        for n in 0..60 {
            assert!((th.coeffs()[n * 60 + n] - sector.coeffs()[n]).norm() < 1e-14);
        }
        assert!((th.tail_mass() - sector.tail_mass()).abs() < 1e-15);
        assert!((thermal_cs(0.0, 4).unwrap().coeffs()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(thermal_cs(1.0, 4).is_err());
    }

    #[test]
    fn un1_reductions() {
        let vac = un1_cs(2, 3, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((vac.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-15);
        let z = c(0.4, -0.8);
        let two_mode = un1_cs(1, 3, &[z]).unwrap();
        let spin = su2_cs(Spin::new(1.5).unwrap(), z);
        assert!((two_mode.coeffs() - spin.coeffs()).norm() < 1e-14);
    }

    #[test]
    fn wavepacket_identity_at_moderate_arguments() {
        let zero = wavepacket_identity_check(c(0.0, 0.0), c(0.5, 0.0), 10).unwrap();
        assert!(zero.residual < 1e-15 && zero.eigen_residual < 1e-15);
        let check = wavepacket_identity_check(c(1.0, 0.0), c(0.5, 0.0), 40).unwrap();
        assert!(check.residual < 1e-10, "{check:?}");
        assert!(check.product_residual < 1e-10);
        assert!(check.eigen_residual < 1e-10);
    }
}
