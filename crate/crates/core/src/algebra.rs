//! Matrix representations of the Heisenberg-Weyl, su(2), su(1,1) and u(N+1)
//! algebras, and Hamiltonians assembled from coefficient values.
//!
//! Basis conventions:
//! - su(2) spin `j`: `|j, -j + m>` for `m = 0..=2j`, so the lowest weight is row 0.
//! - su(1,1) discrete series `k`: `|k; m>` for `m = 0..trunc`, `K0 = diag(k + m)`.
//! - Fock: `|n>` for `n = 0..trunc` with `a^dag = (p + i q) / sqrt(2)`.
//! - u(N+1) symmetric sector: occupation tuples `(m_0, .., m_N)` summing to `m`,
//!   in descending lexicographic order (the fiducial `|m, 0, .., 0>` is row 0).
//!
//! Matrices are stored with rows indexing the output state, so a raising
//! operator has its entries below the diagonal.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Dense complex square matrix acting on a finite or truncated basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix(DMatrix<Complex64>);

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: impl IntoIterator<Item = f64>) -> Self {
        let diag: Vec<f64> = diag.into_iter().collect();
        let mut m = DMatrix::zeros(diag.len(), diag.len());
        for (i, d) in diag.into_iter().enumerate() {
            m[(i, i)] = c(d);
        }
        Self(m)
    }

    /// Wraps a square matrix.
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.0[(row, col)] = value;
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        self.0.diagonal().iter().copied().collect()
    }

    /// Largest entrywise `|A - B|` over the leading `rows x rows` block.
    pub fn max_abs_diff_on(&self, other: &Self, rows: usize) -> f64 {
        let n = rows.min(self.dim()).min(other.dim());
        let mut worst = 0.0_f64;
        for r in 0..n {
            for col in 0..n {
                worst = worst.max((self.0[(r, col)] - other.0[(r, col)]).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.max_abs_diff_on(other, self.dim().max(other.dim()))
    }

    /// Entrywise check `|H_ij - conj(H_ji)| <= tol * max(1, |H_ij|)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|r| {
            (r..n).all(|col| {
                let a = self.0[(r, col)];
                let b = self.0[(col, r)].conj();
                (a - b).norm() <= tol * a.norm().max(1.0)
            })
        })
    }

    /// Principal submatrix on the given basis rows.
    pub fn restrict(&self, rows: &[usize]) -> Self {
        Self(DMatrix::from_fn(rows.len(), rows.len(), |r, col| {
            self.0[(rows[r], rows[col])]
        }))
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

impl Mul<Complex64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Complex64) -> OperatorMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: f64) -> OperatorMatrix {
        self.scale(c(rhs))
    }
}

/// A spin `j`, stored as the integer `2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin(u32);

impl Spin {
    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !twice.is_finite() || twice < 1.0 || (twice - twice.round()).abs() > 1e-12 {
            return Err(Error::InvalidSpin(j));
        }
        Ok(Self(twice.round() as u32))
    }

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        Ok(Self(twice))
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Raising, lowering and diagonal generators of a rank-one algebra
/// (`J+, J-, J0` or `K+, K-, K0`).
#[derive(Clone, Debug, PartialEq)]
pub struct Generators {
    pub raising: OperatorMatrix,
    pub lowering: OperatorMatrix,
    pub diagonal: OperatorMatrix,
}

impl Generators {
    pub fn dim(&self) -> usize {
        self.diagonal.dim()
    }

    /// `(X+ + X-) / 2`, i.e. `J1` or `K1`.
    pub fn first(&self) -> OperatorMatrix {
        (&self.raising + &self.lowering).scale(c(0.5))
    }

    /// `(X+ - X-) / 2i`, i.e. `J2` or `K2`.
    pub fn second(&self) -> OperatorMatrix {
        (&self.raising - &self.lowering).scale(Complex64::new(0.0, -0.5))
    }

    /// `J1^2 + J2^2 + J3^2`.
    pub fn compact_casimir(&self) -> OperatorMatrix {
        let (x, y) = (self.first(), self.second());
        let sum = &(&x * &x) + &(&y * &y);
        &sum + &(&self.diagonal * &self.diagonal)
    }

    /// `K0^2 - K1^2 - K2^2`.
    pub fn noncompact_casimir(&self) -> OperatorMatrix {
        let (x, y) = (self.first(), self.second());
        let sum = &(&x * &x) + &(&y * &y);
        &(&self.diagonal * &self.diagonal) - &sum
    }
}

/// su(2) generators in the `(2j+1)`-dimensional irreducible representation.
pub fn su2_generators(spin: Spin) -> Generators {
    let dim = spin.dim();
    let j = spin.value();
    let mut raising = OperatorMatrix::zeros(dim);
    for m in 0..dim - 1 {
        // <j, mu+1| J+ |j, mu> = sqrt((m + 1)(2j - m)) with mu = -j + m
        let amp = ((m as f64 + 1.0) * (2.0 * j - m as f64)).sqrt();
        raising.set(m + 1, m, c(amp));
    }
    Generators {
        lowering: raising.dagger(),
        raising,
        diagonal: OperatorMatrix::from_diagonal((0..dim).map(|m| -j + m as f64)),
    }
}

fn validate_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidBargmannIndex(k));
    }
    Ok(())
}

/// Truncated discrete-series representation `D_k^+` of su(1,1).
///
/// `K+ |k;m> = sqrt((m+1)(2k+m)) |k;m+1>`. The commutation relations and the
/// Casimir hold on every row except the last one.
pub fn su11_generators(k: f64, trunc: usize) -> Result<Generators> {
    validate_k(k)?;
    if trunc < 2 {
        return Err(Error::TruncationTooSmall {
            found: trunc,
            min: 2,
        });
    }
    let mut raising = OperatorMatrix::zeros(trunc);
    for m in 0..trunc - 1 {
        let mf = m as f64;
        raising.set(m + 1, m, c(((mf + 1.0) * (2.0 * k + mf)).sqrt()));
    }
    Ok(Generators {
        lowering: raising.dagger(),
        raising,
        diagonal: OperatorMatrix::from_diagonal((0..trunc).map(|m| k + m as f64)),
    })
}

/// Fock-space annihilation and creation matrices truncated to `trunc` levels.
pub fn fock_ladder(trunc: usize) -> (OperatorMatrix, OperatorMatrix) {
    let mut a = OperatorMatrix::zeros(trunc);
    for n in 1..trunc {
        a.set(n - 1, n, c((n as f64).sqrt()));
    }
    let adag = a.dagger();
    (a, adag)
}

/// Matrix with entries `<n+shift| O |n>` set from `f(n)`; entries that would
/// leave the truncated space are dropped.
fn banded(trunc: usize, shift: isize, f: impl Fn(usize) -> f64) -> OperatorMatrix {
    let mut m = OperatorMatrix::zeros(trunc);
    for n in 0..trunc {
        let row = n as isize + shift;
        if row >= 0 && (row as usize) < trunc {
            m.set(row as usize, n, c(f(n)));
        }
    }
    m
}

/// `(a^dag)^2` with exact matrix elements `sqrt((n+1)(n+2))`.
fn creation_squared(trunc: usize) -> OperatorMatrix {
    banded(trunc, 2, |n| ((n as f64 + 1.0) * (n as f64 + 2.0)).sqrt())
}

fn number(trunc: usize) -> OperatorMatrix {
    OperatorMatrix::from_diagonal((0..trunc).map(|n| n as f64))
}

/// `q^2` and `p^2` in the truncated Fock basis, built from the exact normal
/// ordered forms so that no truncation row is corrupted by matrix products.
///
/// With `a^dag = (p + i q)/sqrt(2)`:
/// `p^2 = (a^2 + a^dag^2 + 2 a^dag a + 1) / 2`, `q^2 = (2 a^dag a + 1 - a^2 - a^dag^2) / 2`.
pub fn quadrature_squares(trunc: usize) -> (OperatorMatrix, OperatorMatrix) {
    let up = creation_squared(trunc);
    let down = up.dagger();
    let n2p1 = OperatorMatrix::from_diagonal((0..trunc).map(|n| 2.0 * n as f64 + 1.0));
    let pairs = &up + &down;
    let q2 = (&n2p1 - &pairs).scale(c(0.5));
    let p2 = (&n2p1 + &pairs).scale(c(0.5));
    (q2, p2)
}

/// Quadratic bosonic realization `K1 = (p^2 - q^2)/4`, `K2 = (pq + qp)/4`,
/// `K3 = (p^2 + q^2)/4` on a truncated Fock space.
#[derive(Clone, Debug)]
pub struct OscillatorGenerators {
    pub k1: OperatorMatrix,
    pub k2: OperatorMatrix,
    pub k3: OperatorMatrix,
    pub annihilation: OperatorMatrix,
    pub creation: OperatorMatrix,
}

impl OscillatorGenerators {
    /// The ladder form `K+ = K1 + i K2 = (a^dag)^2 / 2`.
    pub fn ladder(&self) -> Generators {
        let raising = &self.k1 + &self.k2.scale(I);
        let lowering = &self.k1 - &self.k2.scale(I);
        Generators {
            raising,
            lowering,
            diagonal: self.k3.clone(),
        }
    }

    pub fn trunc(&self) -> usize {
        self.k3.dim()
    }

    /// Fock rows of the given parity: `|2m>` (`Even`) or `|2m+1>` (`Odd`).
    pub fn parity_rows(&self, parity: Parity) -> Vec<usize> {
        (parity.offset()..self.trunc()).step_by(2).collect()
    }
}

pub fn oscillator_su11(trunc: usize) -> Result<OscillatorGenerators> {
    if trunc < 4 {
        return Err(Error::TruncationTooSmall {
            found: trunc,
            min: 4,
        });
    }
    let (annihilation, creation) = fock_ladder(trunc);
    let up = creation_squared(trunc);
    let down = up.dagger();
    // K1 = (a^2 + a^dag^2)/4, K2 = i(a^2 - a^dag^2)/4, K3 = (2 a^dag a + 1)/4
    let k1 = (&up + &down).scale(c(0.25));
    let k2 = (&down - &up).scale(Complex64::new(0.0, 0.25));
    let k3 = OperatorMatrix::from_diagonal((0..trunc).map(|n| (2.0 * n as f64 + 1.0) / 4.0));
    Ok(OscillatorGenerators {
        k1,
        k2,
        k3,
        annihilation,
        creation,
    })
}

/// Parity sector of the quadratic realization: even Fock states carry
/// `k = 1/4`, odd ones `k = 3/4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn offset(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn bargmann_index(self) -> f64 {
        match self {
            Parity::Even => 0.25,
            Parity::Odd => 0.75,
        }
    }
}

/// Two-mode Schwinger realization on the `n_total`-boson sector.
///
/// Sector basis `|N; n>` carries `n` quanta in mode `a` and `N - n` in mode
/// `b`; `J+ = a^dag b`, `J- = b^dag a`, `J0 = (a^dag a - b^dag b)/2`. Under
/// `|N; n> <-> |N/2, -N/2 + n>` these coincide with [`su2_generators`].
pub fn schwinger_su2(n_total: usize) -> Result<Generators> {
    if n_total == 0 {
        return Err(Error::InvalidArgument(
            "Schwinger sector needs at least one boson".into(),
        ));
    }
    let dim = n_total + 1;
    let mut raising = OperatorMatrix::zeros(dim);
    for n in 0..n_total {
        // a^dag b |n, N-n> = sqrt(n+1) sqrt(N-n) |n+1, N-n-1>
        let amp = ((n as f64 + 1.0) * (n_total - n) as f64).sqrt();
        raising.set(n + 1, n, c(amp));
    }
    let half = n_total as f64 / 2.0;
    Ok(Generators {
        lowering: raising.dagger(),
        raising,
        diagonal: OperatorMatrix::from_diagonal((0..dim).map(|n| n as f64 - half)),
    })
}

/// Basis of the degree-`quanta` symmetric sector of `modes` bosonic modes.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricSector {
    modes: usize,
    quanta: usize,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl SymmetricSector {
    pub fn new(modes: usize, quanta: usize) -> Self {
        let mut states = Vec::new();
        let mut current = vec![0u32; modes];
        fill_descending(&mut current, 0, quanta as u32, &mut states);
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Self {
            modes,
            quanta,
            states,
            index,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn quanta(&self) -> usize {
        self.quanta
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.index.get(occupation).copied()
    }
}

fn fill_descending(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.to_vec());
        return;
    }
    for take in (0..=remaining).rev() {
        current[pos] = take;
        fill_descending(current, pos + 1, remaining - take, out);
    }
    current[pos] = 0;
}

/// All `a_i^dag a_j` restricted to the `(m, 0, .., 0)` representation of
/// u(N+1), i.e. the degree-`m` symmetric sector of `N + 1` modes.
#[derive(Clone, Debug)]
pub struct Un1Generators {
    pub sector: SymmetricSector,
    ops: Vec<OperatorMatrix>,
}

impl Un1Generators {
    /// `E_ij = a_i^dag a_j`.
    pub fn e(&self, i: usize, j: usize) -> &OperatorMatrix {
        &self.ops[i * self.sector.modes() + j]
    }

    pub fn modes(&self) -> usize {
        self.sector.modes()
    }
}

pub fn un1_generators(n: usize, m: usize) -> Result<Un1Generators> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidRepresentation(format!(
            "u(N+1) ladder representation needs N >= 1 and m >= 1, got N = {n}, m = {m}"
        )));
    }
    let modes = n + 1;
    let sector = SymmetricSector::new(modes, m);
    let dim = sector.dim();
    let mut ops = Vec::with_capacity(modes * modes);
    for i in 0..modes {
        for j in 0..modes {
            let mut op = OperatorMatrix::zeros(dim);
            for (col, occ) in sector.states().iter().enumerate() {
                if occ[j] == 0 {
                    continue;
                }
                let mut target = occ.clone();
                let mut amp = f64::from(target[j]).sqrt();
                target[j] -= 1;
                amp *= f64::from(target[i] + 1).sqrt();
                target[i] += 1;
                let row = sector.index_of(&target).expect("sector is closed");
                op.set(row, col, c(amp));
            }
            ops.push(op);
        }
    }
    Ok(Un1Generators { sector, ops })
}

/// Group label plus weight data and truncation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RepLabel {
    /// Fock space of one mode truncated to `trunc` levels.
    HeisenbergWeyl { trunc: usize },
    Su2 { spin: Spin },
    /// Discrete series `D_k^+` truncated to `trunc` basis states.
    Su11 { k: f64, trunc: usize },
    /// Full Fock space carrying su(1,1) through `K+ = a^dag^2/2`; the parity
    /// selects the fiducial vector `|0>` or `|1>`.
    Oscillator { parity: Parity, trunc: usize },
    /// Highest weight `(m, 0, .., 0)` of u(N+1).
    Un1 { n: usize, m: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    HeisenbergWeyl,
    Su2,
    Su11,
    Un1,
}

impl RepLabel {
    pub fn su2(j: f64) -> Result<Self> {
        Ok(Self::Su2 {
            spin: Spin::new(j)?,
        })
    }

    pub fn su11(k: f64, trunc: usize) -> Result<Self> {
        let rep = Self::Su11 { k, trunc };
        rep.validate()?;
        Ok(rep)
    }

    pub fn group(&self) -> Group {
        match self {
            Self::HeisenbergWeyl { .. } => Group::HeisenbergWeyl,
            Self::Su2 { .. } => Group::Su2,
            Self::Su11 { .. } | Self::Oscillator { .. } => Group::Su11,
            Self::Un1 { .. } => Group::Un1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::HeisenbergWeyl { .. } => "heisenberg-weyl",
            Self::Su2 { .. } => "su2",
            Self::Su11 { .. } => "su11",
            Self::Oscillator { .. } => "su11-oscillator",
            Self::Un1 { .. } => "un1",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::HeisenbergWeyl { trunc } if trunc < 2 => Err(Error::TruncationTooSmall {
                found: trunc,
                min: 2,
            }),
            Self::Su11 { k, trunc } => {
                validate_k(k)?;
                if trunc < 2 {
                    return Err(Error::TruncationTooSmall {
                        found: trunc,
                        min: 2,
                    });
                }
                Ok(())
            }
            Self::Oscillator { trunc, .. } if trunc < 4 => Err(Error::TruncationTooSmall {
                found: trunc,
                min: 4,
            }),
            Self::Un1 { n, m } if n == 0 || m == 0 => Err(Error::InvalidRepresentation(
                format!("u(N+1) needs N >= 1 and m >= 1, got N = {n}, m = {m}"),
            )),
            _ => Ok(()),
        }
    }

    /// Basis size. For u(N+1) this is `C(N+m, m)`.
    pub fn dim(&self) -> usize {
        match *self {
            Self::HeisenbergWeyl { trunc } | Self::Su11 { trunc, .. } => trunc,
            Self::Oscillator { trunc, .. } => trunc,
            Self::Su2 { spin } => spin.dim(),
            Self::Un1 { n, m } => binomial(n + m, m),
        }
    }

    /// Number of leading basis rows on which the truncated generators are exact.
    pub fn trust_dim(&self) -> usize {
        match *self {
            Self::HeisenbergWeyl { trunc } | Self::Su11 { trunc, .. } => trunc - 1,
            Self::Oscillator { trunc, .. } => trunc - 2,
            Self::Su2 { .. } | Self::Un1 { .. } => self.dim(),
        }
    }
}

impl fmt::Display for RepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HeisenbergWeyl { trunc } => write!(f, "HW(trunc={trunc})"),
            Self::Su2 { spin } => write!(f, "SU(2) j={spin}"),
            Self::Su11 { k, trunc } => write!(f, "SU(1,1) k={k} (trunc={trunc})"),
            Self::Oscillator { parity, trunc } => {
                write!(f, "SU(1,1) oscillator {parity:?} (trunc={trunc})")
            }
            Self::Un1 { n, m } => write!(f, "U({}) m={m}", n + 1),
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i as u128 + 1);
    }
    acc as usize
}

/// Instantaneous Hamiltonian coefficients.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    /// `H = omega a^dag a + F a^dag + F* a`; classical flow `i z' = omega z + F`.
    Glauber { omega: f64, force: Complex64 },
    /// `H = h0 J0 + h* J+ + h J-`; classical flow `i z' = h* + h0 z - h z^2`.
    Su2 { h0: f64, h: Complex64 },
    /// `H = h0 K0 + h K+ + h* K-`; classical flow `i z' = h* z^2 + h0 z + h`.
    Su11 { h0: f64, h: Complex64 },
    /// `H = sum_ij h_ij a_i^dag a_j` with a Hermitian `(N+1) x (N+1)` matrix.
    Matrix(DMatrix<Complex64>),
}

impl Coefficients {
    /// su(1,1) coefficients of `(p^2 + omega^2 q^2)/2 + b (qp + pq)/2`:
    /// `h0 = 1 + omega^2`, `h = (1 - omega^2)/2 - i b`.
    pub fn oscillator(omega: f64, friction: f64) -> Self {
        let w2 = omega * omega;
        Self::Su11 {
            h0: 1.0 + w2,
            h: Complex64::new((1.0 - w2) / 2.0, -friction),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Glauber { .. } => "glauber",
            Self::Su2 { .. } => "su2",
            Self::Su11 { .. } => "su11",
            Self::Matrix(_) => "matrix",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        match self {
            Self::Glauber { omega: h0, force: h }
            | Self::Su2 { h0, h }
            | Self::Su11 { h0, h } => {
                if !h0.is_finite() || !finite(*h) {
                    return Err(Error::InvalidArgument("non-finite coefficient".into()));
                }
                Ok(())
            }
            Self::Matrix(m) => {
                if m.nrows() != m.ncols() {
                    return Err(Error::NonHermitian(format!(
                        "coefficient matrix is {}x{}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                for i in 0..m.nrows() {
                    for j in i..m.ncols() {
                        let (a, b) = (m[(i, j)], m[(j, i)].conj());
                        if !finite(a) || (a - b).norm() > 1e-12 * a.norm().max(1.0) {
                            return Err(Error::NonHermitian(format!(
                                "h[{i}][{j}] = {a} but conj(h[{j}][{i}]) = {b}"
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

/// Caches the generator matrices of one representation so that Hamiltonians
/// for many coefficient values can be assembled cheaply.
#[derive(Clone, Debug)]
pub struct HamiltonianBuilder {
    rep: RepLabel,
    terms: Terms,
}

#[derive(Clone, Debug)]
enum Terms {
    Ladder(Generators),
    Un1(Un1Generators),
}

impl HamiltonianBuilder {
    pub fn new(rep: RepLabel) -> Result<Self> {
        rep.validate()?;
        let terms = match rep {
            RepLabel::HeisenbergWeyl { trunc } => {
                let (a, adag) = fock_ladder(trunc);
                Terms::Ladder(Generators {
                    raising: adag,
                    lowering: a,
                    diagonal: number(trunc),
                })
            }
            RepLabel::Su2 { spin } => Terms::Ladder(su2_generators(spin)),
            RepLabel::Su11 { k, trunc } => Terms::Ladder(su11_generators(k, trunc)?),
            RepLabel::Oscillator { trunc, .. } => Terms::Ladder(oscillator_su11(trunc)?.ladder()),
            RepLabel::Un1 { n, m } => Terms::Un1(un1_generators(n, m)?),
        };
        Ok(Self { rep, terms })
    }

    pub fn rep(&self) -> RepLabel {
        self.rep
    }

    /// The generator matrices and their weights in `H`.
    pub fn terms(&self, coeffs: &Coefficients) -> Result<Vec<(Complex64, &OperatorMatrix)>> {
        coeffs.validate()?;
        let mismatch = || Error::IncompatibleCoefficients {
            coefficients: coeffs.kind(),
            rep: self.rep.name(),
        };
        match (&self.terms, coeffs) {
            (Terms::Ladder(g), Coefficients::Glauber { omega, force })
                if self.rep.group() == Group::HeisenbergWeyl =>
            {
                Ok(vec![
                    (c(*omega), &g.diagonal),
                    (*force, &g.raising),
                    (force.conj(), &g.lowering),
                ])
            }
            (Terms::Ladder(g), Coefficients::Su2 { h0, h }) if self.rep.group() == Group::Su2 => {
                Ok(vec![
                    (c(*h0), &g.diagonal),
                    (h.conj(), &g.raising),
                    (*h, &g.lowering),
                ])
            }
            (Terms::Ladder(g), Coefficients::Su11 { h0, h }) if self.rep.group() == Group::Su11 => {
                Ok(vec![
                    (c(*h0), &g.diagonal),
                    (*h, &g.raising),
                    (h.conj(), &g.lowering),
                ])
            }
            (Terms::Un1(g), Coefficients::Matrix(h)) => {
                let modes = g.modes();
                if h.nrows() != modes {
                    return Err(Error::DimensionMismatch {
                        expected: modes,
                        found: h.nrows(),
                    });
                }
                let mut out = Vec::with_capacity(modes * modes);
                for i in 0..modes {
                    for j in 0..modes {
                        if h[(i, j)] != Complex64::new(0.0, 0.0) {
                            out.push((h[(i, j)], g.e(i, j)));
                        }
                    }
                }
                Ok(out)
            }
            _ => Err(mismatch()),
        }
    }

    pub fn build(&self, coeffs: &Coefficients) -> Result<OperatorMatrix> {
        let dim = self.rep.dim();
        let mut h = DMatrix::zeros(dim, dim);
        for (weight, op) in self.terms(coeffs)? {
            h += op.matrix() * weight;
        }
        Ok(OperatorMatrix(h))
    }
}

/// Hamiltonian matrix of `rep` for one set of coefficient values.
pub fn hamiltonian_matrix(rep: RepLabel, coeffs: &Coefficients) -> Result<OperatorMatrix> {
    HamiltonianBuilder::new(rep)?.build(coeffs)
}
