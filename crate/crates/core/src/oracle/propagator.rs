//! `exp(-i H dt) psi` for Hermitian `H`, either through a dense
//! eigendecomposition or through a Chebyshev expansion on a sparse `H`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::algebra::OperatorMatrix;

/// Compressed-row copy of a mostly-zero operator.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseMatrix {
    pub fn from_dense(op: &OperatorMatrix) -> Self {
        let dim = op.dim();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        row_ptr.push(0);
        for i in 0..dim {
            for j in 0..dim {
                let v = op.get(i, j);
                if v.norm() != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `y += w * S x`.
    pub fn mul_add(&self, w: Complex64, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[p] * x[self.cols[p]];
            }
            *yi += w * acc;
        }
    }

    /// Per row: the diagonal entry and the sum of off-diagonal moduli.
    fn gershgorin(&self, w: Complex64, centers: &mut [f64], radii: &mut [f64]) {
        for i in 0..self.dim {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let v = w * self.vals[p];
                if self.cols[p] == i {
                    centers[i] += v.re;
                } else {
                    radii[i] += v.norm();
                }
            }
        }
    }
}

/// A Hamiltonian given as weighted sparse generators.
pub struct SparseHamiltonian<'a> {
    pub terms: Vec<(Complex64, &'a SparseMatrix)>,
    pub dim: usize,
}

impl SparseHamiltonian<'_> {
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (w, s) in &self.terms {
            s.mul_add(*w, x, y);
        }
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let mut centers = vec![0.0; self.dim];
        let mut radii = vec![0.0; self.dim];
        for (w, s) in &self.terms {
            s.gershgorin(*w, &mut centers, &mut radii);
        }
        let lo = centers
            .iter()
            .zip(&radii)
            .map(|(c, r)| c - r)
            .fold(f64::INFINITY, f64::min);
        let hi = centers
            .iter()
            .zip(&radii)
            .map(|(c, r)| c + r)
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// `J_0(x), .., J_{kmax}(x)` by Miller's backward recurrence, normalized with
/// `J_0 + 2 sum J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = {
        let s = kmax.max(x.ceil() as usize) + 32 + (x.abs().sqrt() * 4.0) as usize;
        s + s % 2
    };
    let (mut next, mut cur) = (0.0f64, 1e-280f64);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        let idx = k - 1;
        if idx <= kmax {
            out[idx] = cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            let scale = 1e-250;
            cur *= scale;
            next *= scale;
            norm *= scale;
            out.iter_mut().for_each(|v| *v *= scale);
        }
    }
    norm += cur;
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

/// Series length: first index past `x` with `|J_k| < 1e-17` from there on.
fn chebyshev_order(x: f64) -> (usize, Vec<f64>) {
    let kmax = x.ceil() as usize + 40 + (3.0 * x.cbrt()) as usize;
    let j = bessel_j_sequence(x, kmax);
    let mut order = kmax;
    for k in (x.ceil() as usize).min(kmax)..=kmax {
        if j[k..].iter().all(|v| v.abs() < 1e-17) {
            order = k;
            break;
        }
    }
    (order.max(1), j)
}

/// `exp(-i H dt) psi` by Chebyshev expansion on the Gershgorin interval.
pub fn chebyshev_step(h: &SparseHamiltonian<'_>, psi: &DVector<Complex64>, dt: f64) -> DVector<Complex64> {
    let n = h.dim;
    let (lo, hi) = h.spectral_bounds();
    let center = 0.5 * (lo + hi);
    if !(hi - lo > 1e-14 * lo.abs().max(hi.abs()).max(1.0)) {
        // scalar multiple of the identity on the span
        return psi * Complex64::from_polar(1.0, -center * dt);
    }
    let half = 0.5 * (hi - lo) * (1.0 + 1e-12);
    let x = half * dt;
    let (order, j) = chebyshev_order(x);

    // normalized operator (H - center) / half
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut apply_norm = |v: &[Complex64], out: &mut [Complex64]| {
        h.apply(v, &mut scratch);
        for i in 0..n {
            out[i] = (scratch[i] - center * v[i]) / half;
        }
    };

    let mut prev: Vec<Complex64> = psi.iter().copied().collect();
    let mut cur = vec![Complex64::new(0.0, 0.0); n];
    apply_norm(&prev, &mut cur);
    let mut acc: Vec<Complex64> = prev.iter().map(|v| v * j[0]).collect();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut phase = minus_i;
    for (a, c) in acc.iter_mut().zip(&cur) {
        *a += 2.0 * j[1] * phase * c;
    }
    let mut next = vec![Complex64::new(0.0, 0.0); n];
    for jk in j.iter().take(order + 1).skip(2) {
        apply_norm(&cur, &mut next);
        for i in 0..n {
            next[i] = 2.0 * next[i] - prev[i];
        }
        phase *= minus_i;
        let w = 2.0 * jk * phase;
        for (a, v) in acc.iter_mut().zip(&next) {
            *a += w * v;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    let global = Complex64::from_polar(1.0, -center * dt);
    DVector::from_iterator(n, acc.into_iter().map(|v| v * global))
}

/// Dense unitary `V exp(-i Lambda dt) V^dag`.
pub fn eigen_propagator(h: &OperatorMatrix, dt: f64) -> DMatrix<Complex64> {
    let eig = h.matrix().clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(
        h.dim(),
        eig.eigenvalues.iter().map(|l| Complex64::from_polar(1.0, -l * dt)),
    );
    let mut scaled = v.clone();
    for (mut col, p) in scaled.column_iter_mut().zip(phases.iter()) {
        col *= *p;
    }
    scaled * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{su11_generators, su2_generators, Spin};

    fn series_j(k: usize, x: f64) -> f64 {
        // sum_m (-1)^m (x/2)^{2m+k} / (m! (m+k)!)
        let mut term = (0..k).fold(1.0, |acc, i| acc * (x / 2.0) / (i + 1) as f64);
        let mut sum = term;
        for m in 1..60 {
            term *= -(x / 2.0) * (x / 2.0) / (m as f64 * (m + k) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn bessel_against_series() {
        for x in [0.1, 1.0, 2.5, 7.3] {
            let j = bessel_j_sequence(x, 20);
            for (k, v) in j.iter().enumerate().take(12) {
                assert!((v - series_j(k, x)).abs() < 1e-14, "J_{k}({x})");
            }
        }
        assert!((bessel_j_sequence(1.0, 2)[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert_eq!(bessel_j_sequence(0.0, 3), vec![1.0, 0.0, 0.0, 0.0]);
        // large arguments still normalize
        let j = bessel_j_sequence(60.0, 120);
        assert!(j.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn chebyshev_matches_eigen_route() {
        let g = su11_generators(0.75, 60).unwrap();
        let h = &(&g.diagonal.scale(Complex64::new(2.0, 0.0)) + &g.raising.scale(Complex64::new(0.3, -0.2)))
            + &g.lowering.scale(Complex64::new(0.3, 0.2));
        let sparse: Vec<SparseMatrix> = [&g.diagonal, &g.raising, &g.lowering]
            .iter()
            .map(|m| SparseMatrix::from_dense(m))
            .collect();
        let sh = SparseHamiltonian {
            terms: vec![
                (Complex64::new(2.0, 0.0), &sparse[0]),
                (Complex64::new(0.3, -0.2), &sparse[1]),
                (Complex64::new(0.3, 0.2), &sparse[2]),
            ],
            dim: 60,
        };
        let psi = DVector::from_fn(60, |i, _| Complex64::new((-(i as f64) / 3.0).exp(), 0.1 * i as f64));
        let psi = &psi / Complex64::new(psi.norm(), 0.0);
        for dt in [1e-3, 0.05, 0.4] {
            let a = chebyshev_step(&sh, &psi, dt);
            let b = eigen_propagator(&h, dt) * &psi;
            assert!((a - b).norm() < 1e-12, "dt = {dt}");
        }
    }

    #[test]
    fn eigen_route_is_unitary() {
        let g = su2_generators(Spin::new(2.5).unwrap());
        let h = &g.diagonal + &g.first();
        let u = eigen_propagator(&h, 0.37);
        let err = (&u * u.adjoint() - DMatrix::identity(6, 6)).norm();
        assert!(err < 1e-13);
    }
}
