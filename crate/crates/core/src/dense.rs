//! Dense reference computations on at most [`MAX_DENSE_QUBITS`] qubits.
//!
//! Matrices are generic over the scalar precision: plain `f64`, or
//! [`DoubleDouble`] when leading-order error terms fall below `f64`
//! resolution. Qubit `q` of an `N`-qubit register is bit `N−1−q` of a basis
//! index, so `X ⊗ 𝟙` flips the most significant bit.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::codes::{LogicalStatePrep, StabilizerCode};
use crate::pauli::{Pauli, PauliOp, PauliSum};
use crate::tableau::{Gate, Tableau};

pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DenseError {
    #[error("{0} qubits exceeds the dense limit of {MAX_DENSE_QUBITS}")]
    TooLarge(usize),
    #[error("denominator vanishes")]
    ZeroDenominator,
    #[error("{0}")]
    Setup(String),
}

/// Real scalar used by the dense routines.
pub trait Real:
    Copy
    + PartialOrd
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`, about 32 significant digits.
#[derive(Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl DoubleDouble {
    pub const fn new(hi: f64, lo: f64) -> Self {
        DoubleDouble { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}{:+e}", self.hi, self.lo)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * DoubleDouble::from_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * DoubleDouble::from_f64(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DoubleDouble { hi, lo } + DoubleDouble::from_f64(q3)
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl Real for DoubleDouble {
    fn from_f64(v: f64) -> Self {
        DoubleDouble { hi: v, lo: 0.0 }
    }
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return DoubleDouble::from_f64(0.0);
        }
        // One Newton step from the f64 root.
        let x = self.hi.sqrt();
        let xx = DoubleDouble::from_f64(x) * DoubleDouble::from_f64(x);
        let corr = (self - xx).hi / (2.0 * x);
        let (hi, lo) = quick_two_sum(x, corr);
        DoubleDouble { hi, lo }
    }
}

/// Complex scalar over a [`Real`] type.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Cx<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> Cx<T> {
    pub fn new(re: T, im: T) -> Self {
        Cx { re, im }
    }

    pub fn real(re: T) -> Self {
        Cx { re, im: T::zero() }
    }

    pub fn zero() -> Self {
        Self::real(T::zero())
    }

    pub fn one() -> Self {
        Self::real(T::one())
    }

    /// `i^e`.
    pub fn i_pow(e: u32) -> Self {
        let (o, z) = (T::one(), T::zero());
        match e & 3 {
            0 => Cx::new(o, z),
            1 => Cx::new(z, o),
            2 => Cx::new(-o, z),
            _ => Cx::new(z, -o),
        }
    }

    pub fn conj(self) -> Self {
        Cx::new(self.re, -self.im)
    }

    pub fn scale(self, s: T) -> Self {
        Cx::new(self.re * s, self.im * s)
    }

    pub fn norm_sqr(self) -> T {
        self.re * self.re + self.im * self.im
    }

    /// Multiplication by `i^e`, exact.
    #[inline]
    pub fn mul_i_pow(self, e: u32) -> Self {
        match e & 3 {
            0 => self,
            1 => Cx::new(-self.im, self.re),
            2 => Cx::new(-self.re, -self.im),
            _ => Cx::new(self.im, -self.re),
        }
    }
}

impl<T: Real> Add for Cx<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Cx::new(self.re + o.re, self.im + o.im)
    }
}

impl<T: Real> Sub for Cx<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Cx::new(self.re - o.re, self.im - o.im)
    }
}

impl<T: Real> Mul for Cx<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Cx::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl<T: Real> Neg for Cx<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Cx::new(-self.re, -self.im)
    }
}

impl<T: Real> AddAssign for Cx<T> {
    fn add_assign(&mut self, o: Self) {
        self.re += o.re;
        self.im += o.im;
    }
}

impl<T: Real> fmt::Debug for Cx<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?}i)", self.re, self.im)
    }
}

/// Pauli operator as index masks: `P|j⟩ = i^{e + x·z} (−1)^{|z ∧ j|} |j ⊕ x⟩`.
#[derive(Debug, Clone, Copy)]
pub struct PauliMask {
    x: usize,
    z: usize,
    e: u32,
}

impl PauliMask {
    pub fn new(op: &PauliOp) -> Self {
        let n = op.n_qubits();
        let (mut x, mut z) = (0usize, 0usize);
        for q in 0..n {
            let bit = 1usize << (n - 1 - q);
            if op.x_bit(q) {
                x |= bit;
            }
            if op.z_bit(q) {
                z |= bit;
            }
        }
        let e = op.phase() as u32 + (x & z).count_ones();
        PauliMask { x, z, e }
    }

    /// `(j ⊕ x, phase exponent)` such that `P|j⟩ = i^{phase} |j ⊕ x⟩`.
    #[inline]
    pub fn act(&self, j: usize) -> (usize, u32) {
        (j ^ self.x, self.e + 2 * ((self.z & j).count_ones() & 1))
    }
}

/// Square complex matrix of dimension `2^N`, row-major.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    dim: usize,
    data: Vec<Cx<T>>,
}

pub type DenseState<T> = DenseMatrix<T>;

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        assert!(n <= MAX_DENSE_QUBITS, "dense limit exceeded");
        let dim = 1 << n;
        DenseMatrix {
            n,
            dim,
            data: vec![Cx::zero(); dim * dim],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..m.dim {
            m.data[i * m.dim + i] = Cx::one();
        }
        m
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Cx<T> {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Cx<T>) {
        self.data[r * self.dim + c] = v;
    }

    pub fn from_pauli(op: &PauliOp) -> Self {
        let mut m = Self::zeros(op.n_qubits());
        let pm = PauliMask::new(op);
        for j in 0..m.dim {
            let (i, e) = pm.act(j);
            m.set(i, j, Cx::i_pow(e));
        }
        m
    }

    /// `|v⟩⟨v|`.
    pub fn outer(v: &[Cx<T>]) -> Self {
        let n = v.len().trailing_zeros() as usize;
        assert_eq!(1 << n, v.len());
        let mut m = Self::zeros(n);
        for r in 0..m.dim {
            for c in 0..m.dim {
                m.set(r, c, v[r] * v[c].conj());
            }
        }
        m
    }

    pub fn convert<U: Real>(&self) -> DenseMatrix<U> {
        DenseMatrix {
            n: self.n,
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|c| Cx::new(U::from_f64(c.re.to_f64()), U::from_f64(c.im.to_f64())))
                .collect(),
        }
    }

    pub fn trace(&self) -> Cx<T> {
        let mut t = Cx::zero();
        for i in 0..self.dim {
            t += self.get(i, i);
        }
        t
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&o.data) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&o.data) {
            *a = *a - *b;
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = a.scale(s);
        }
        out
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn matmul(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        let d = self.dim;
        let mut out = Self::zeros(self.n);
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for c in 0..d {
                    let prod = a * o.data[k * d + c];
                    out.data[r * d + c] += prod;
                }
            }
        }
        out
    }

    /// `P · self`.
    pub fn pauli_left(&self, op: &PauliOp) -> Self {
        let pm = PauliMask::new(op);
        let d = self.dim;
        let mut out = Self::zeros(self.n);
        for j in 0..d {
            let (i, e) = pm.act(j);
            for c in 0..d {
                out.data[i * d + c] = self.data[j * d + c].mul_i_pow(e);
            }
        }
        out
    }

    /// `self · P`.
    pub fn pauli_right(&self, op: &PauliOp) -> Self {
        let pm = PauliMask::new(op);
        let d = self.dim;
        let mut out = Self::zeros(self.n);
        for i in 0..d {
            // (AP)_{r,i} = A_{r,j} P_{j,i} with j = i ⊕ x
            let (j, e) = pm.act(i);
            for r in 0..d {
                out.data[r * d + i] = self.data[r * d + j].mul_i_pow(e);
            }
        }
        out
    }

    /// `P · self · P†`.
    pub fn conjugate_by_pauli(&self, op: &PauliOp) -> Self {
        let mut adj = op.clone();
        adj.set_phase((4 - op.phase()) & 3);
        self.pauli_left(op).pauli_right(&adj)
    }

    /// `Tr(self · P)`.
    pub fn trace_with_pauli(&self, op: &PauliOp) -> Cx<T> {
        let pm = PauliMask::new(op);
        let mut t = Cx::zero();
        // Tr(AP) = Σ_j (AP)_{jj} = Σ_j A_{j,i} P_{i,j} with i = j ⊕ x.
        for j in 0..self.dim {
            let (i, e) = pm.act(j);
            t += self.get(j, i).mul_i_pow(e);
        }
        t
    }

    /// `(𝟙 + S)/2 · self` for Hermitian `S`.
    pub fn project_left(&self, s: &PauliOp) -> Self {
        let half = T::from_f64(0.5);
        let ps = self.pauli_left(s);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&ps.data) {
            *a = (*a + *b).scale(half);
        }
        out
    }

    /// `Π · self · Π` with `Π = ∏ (𝟙 + S_j)/2`.
    pub fn sandwich(&self, generators: &[PauliOp]) -> Self {
        let mut m = self.clone();
        for g in generators {
            m = m.project_left(g);
        }
        let mut m = m.dagger();
        for g in generators {
            m = m.project_left(g);
        }
        m.dagger()
    }

    /// `(𝟙 + S)/2 |v⟩`.
    pub fn project_vector(v: &[Cx<T>], s: &PauliOp) -> Vec<Cx<T>> {
        let pm = PauliMask::new(s);
        let half = T::from_f64(0.5);
        let mut out = v.to_vec();
        for (j, &vj) in v.iter().enumerate() {
            let (i, e) = pm.act(j);
            out[i] += vj.mul_i_pow(e);
        }
        out.iter().map(|c| c.scale(half)).collect()
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| (*a - *b).norm_sqr().to_f64().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.dagger()) <= tol
    }

    /// `Σ_p c_p · self^p`, `coefficients[p−1] = c_p`.
    pub fn polynomial(&self, coefficients: &[f64]) -> Self {
        let mut out = Self::zeros(self.n);
        let mut power = self.clone();
        for (i, &c) in coefficients.iter().enumerate() {
            if i > 0 {
                power = power.matmul(self);
            }
            if c != 0.0 {
                out = out.add(&power.scale(T::from_f64(c)));
            }
        }
        out
    }

    /// Single-qubit depolarizing channel on every qubit.
    pub fn depolarize(&self, p: f64) -> Self {
        let keep = T::from_f64(1.0 - p);
        let each = T::from_f64(p) / T::from_f64(3.0);
        let mut rho = self.clone();
        for q in 0..self.n {
            let mut acc = rho.scale(keep);
            for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
                let op = PauliOp::single(self.n, q, pauli);
                acc = acc.add(&rho.conjugate_by_pauli(&op).scale(each));
            }
            rho = acc;
        }
        rho
    }

    pub fn data(&self) -> &[Cx<T>] {
        &self.data
    }
}

impl<T: Real> fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{}", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let v = self.get(r, c);
                    format!("{:+.4}{:+.4}i", v.re.to_f64(), v.im.to_f64())
                })
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

fn check_size(n: usize) -> Result<(), DenseError> {
    if n > MAX_DENSE_QUBITS {
        Err(DenseError::TooLarge(n))
    } else {
        Ok(())
    }
}

/// `2^{-N} ∏_{active} (𝟙 + S_i)` for a tableau.
pub fn density_from_tableau<T: Real>(t: &Tableau) -> Result<DenseMatrix<T>, DenseError> {
    let n = t.n_qubits();
    check_size(n)?;
    let scale = T::from_f64((-(n as f64)).exp2());
    let mut rho = DenseMatrix::<T>::identity(n).scale(scale);
    for s in t.stabilizers() {
        // (𝟙+S) = 2 · (𝟙+S)/2
        rho = rho.project_left(&s).scale(T::from_f64(2.0));
    }
    Ok(rho)
}

/// State vector of a pure stabilizer state, normalized, with a nonnegative
/// real amplitude on the first basis state of its support.
pub fn state_vector_from_tableau<T: Real>(t: &Tableau) -> Result<Vec<Cx<T>>, DenseError> {
    let n = t.n_qubits();
    check_size(n)?;
    if t.rank_deficit() != 0 {
        return Err(DenseError::Setup("state is mixed".into()));
    }
    // Any computational outcome lies in the support.
    let mut copy = t.clone();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let bits = copy.measure_all_z(&mut rng);
    let j = bits
        .iter()
        .enumerate()
        .fold(0usize, |acc, (q, &b)| acc | ((b as usize) << (n - 1 - q)));
    let mut v = vec![Cx::<T>::zero(); 1 << n];
    v[j] = Cx::one();
    for s in t.stabilizers() {
        v = DenseMatrix::<T>::project_vector(&v, &s);
    }
    normalize(&mut v);
    Ok(v)
}

pub fn normalize<T: Real>(v: &mut [Cx<T>]) {
    let norm = v.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()).sqrt();
    for c in v.iter_mut() {
        *c = c.scale(T::one() / norm);
    }
}

/// Encoded pure state `|ψ⟩⟨ψ|` for the given sector codes and logical state.
pub fn encoded_state<T: Real>(
    codes: &[StabilizerCode],
    prep: &LogicalStatePrep,
) -> Result<DenseMatrix<T>, DenseError> {
    let n: usize = codes.iter().map(|c| c.n_physical()).sum();
    check_size(n)?;
    let t = crate::codes::prepare_logical_state(codes, prep)
        .map_err(|e| DenseError::Setup(e.to_string()))?;
    Ok(DenseMatrix::outer(&state_vector_from_tableau::<T>(&t)?))
}

/// Depolarized encoded state `ρ_ε`.
pub fn exact_noisy_state<T: Real>(
    codes: &[StabilizerCode],
    prep: &LogicalStatePrep,
    p: f64,
) -> Result<DenseMatrix<T>, DenseError> {
    Ok(encoded_state::<T>(codes, prep)?.depolarize(p))
}

/// `Tr(Π f(ρ) Π O) / Tr(Π f(ρ) Π)` with `f(x) = Σ_p c_p x^p`.
pub fn exact_lst_value<T: Real>(
    rho: &DenseMatrix<T>,
    code: &StabilizerCode,
    observable: &PauliSum,
    coefficients: &[f64],
) -> Result<f64, DenseError> {
    let (num, den) = exact_projected_moments(rho, code, observable, coefficients)?;
    if den.abs() == T::zero() {
        return Err(DenseError::ZeroDenominator);
    }
    Ok((num / den).to_f64())
}

/// `(Tr(Π f(ρ) Π O), Tr(Π f(ρ) Π))`.
pub fn exact_projected_moments<T: Real>(
    rho: &DenseMatrix<T>,
    code: &StabilizerCode,
    observable: &PauliSum,
    coefficients: &[f64],
) -> Result<(T, T), DenseError> {
    if rho.n_qubits() != code.n_physical() {
        return Err(DenseError::Setup(format!(
            "state on {} qubits, code on {}",
            rho.n_qubits(),
            code.n_physical()
        )));
    }
    let m = rho.polynomial(coefficients).sandwich(code.generators());
    let den = m.trace().re;
    let mut num = T::zero();
    for (c, op) in &observable.terms {
        num += m.trace_with_pauli(op).re * T::from_f64(*c);
    }
    Ok((num, den))
}

/// `1 − ⟨ψ|Π f(ρ) Π|ψ⟩ / Tr(Π f(ρ) Π)` for a code-space vector `ψ`.
pub fn exact_lst_infidelity<T: Real>(
    rho: &DenseMatrix<T>,
    code: &StabilizerCode,
    psi: &[Cx<T>],
    coefficients: &[f64],
) -> T {
    let m = rho.polynomial(coefficients).sandwich(code.generators());
    let den = m.trace().re;
    let d = m.dim();
    // ⟨ψ|M|ψ⟩
    let mut overlap = Cx::<T>::zero();
    for r in 0..d {
        let mut row = Cx::<T>::zero();
        for (c, v) in psi.iter().enumerate() {
            row += m.get(r, c) * *v;
        }
        overlap += psi[r].conj() * row;
    }
    (den - overlap.re) / den
}

/// `Tr(ρ P)` for every Pauli `P` in `ops`.
pub fn pauli_expectations<T: Real>(rho: &DenseMatrix<T>, ops: &[PauliOp]) -> Vec<f64> {
    ops.iter()
        .map(|op| rho.trace_with_pauli(op).re.to_f64())
        .collect()
}

/// Random normalized logical state `α|0̄⟩ + β|1̄⟩` for a `[[n,1]]` code.
pub fn random_logical_state<T: Real, R: Rng + ?Sized>(
    code: &StabilizerCode,
    rng: &mut R,
) -> Result<Vec<Cx<T>>, DenseError> {
    if code.k_logical() != 1 {
        return Err(DenseError::Setup("random logical states need k = 1".into()));
    }
    let t = crate::codes::prepare_logical_state(std::slice::from_ref(code), &LogicalStatePrep::zero(1))
        .map_err(|e| DenseError::Setup(e.to_string()))?;
    let zero = state_vector_from_tableau::<T>(&t)?;
    let xbar = PauliMask::new(&code.logical_x()[0]);
    let mut one = vec![Cx::<T>::zero(); zero.len()];
    for (j, &a) in zero.iter().enumerate() {
        let (i, e) = xbar.act(j);
        one[i] = a.mul_i_pow(e);
    }
    // Haar-random qubit from a normalized complex Gaussian pair.
    let g: Vec<f64> = (0..4).map(|_| gaussian(rng)).collect();
    let alpha = Cx::new(T::from_f64(g[0]), T::from_f64(g[1]));
    let beta = Cx::new(T::from_f64(g[2]), T::from_f64(g[3]));
    let mut v: Vec<Cx<T>> = zero
        .iter()
        .zip(&one)
        .map(|(&a, &b)| alpha * a + beta * b)
        .collect();
    normalize(&mut v);
    Ok(v)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Born distribution of measuring the generators `(−1)^{b_j} G_j` jointly:
/// entry `b` is `Tr(ρ ∏_j (𝟙 + (−1)^{b_j} G_j)/2)`.
pub fn born_probabilities<T: Real>(rho: &DenseMatrix<T>, generators: &[PauliOp]) -> Vec<f64> {
    let m = generators.len();
    (0..1usize << m)
        .map(|b| {
            let mut proj = rho.clone();
            for (j, g) in generators.iter().enumerate() {
                let g = if (b >> j) & 1 == 1 {
                    g.clone().negated()
                } else {
                    g.clone()
                };
                proj = proj.project_left(&g);
            }
            proj.trace().re.to_f64()
        })
        .collect()
}

/// Dense unitary of a Clifford gate on `n` qubits.
pub fn gate_unitary<T: Real>(gate: Gate, n: usize) -> DenseMatrix<T> {
    let d = 1usize << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let mut u = DenseMatrix::<T>::zeros(n);
    let h = T::one() / T::from_f64(2.0).sqrt();
    for j in 0..d {
        match gate {
            Gate::H(q) => {
                let b = j & bit(q) != 0;
                let j0 = j & !bit(q);
                let j1 = j | bit(q);
                u.set(j0, j, Cx::real(h));
                u.set(j1, j, Cx::real(if b { -h } else { h }));
            }
            Gate::S(q) => {
                let v = if j & bit(q) != 0 { Cx::i_pow(1) } else { Cx::one() };
                u.set(j, j, v);
            }
            Gate::X(q) => u.set(j ^ bit(q), j, Cx::one()),
            Gate::Y(q) => {
                let v = if j & bit(q) != 0 { Cx::i_pow(3) } else { Cx::i_pow(1) };
                u.set(j ^ bit(q), j, v);
            }
            Gate::Z(q) => {
                let v = if j & bit(q) != 0 { -Cx::one() } else { Cx::one() };
                u.set(j, j, v);
            }
            Gate::CX(c, t) => {
                let i = if j & bit(c) != 0 { j ^ bit(t) } else { j };
                u.set(i, j, Cx::one());
            }
            Gate::CZ(a, b) => {
                let both = j & bit(a) != 0 && j & bit(b) != 0;
                u.set(j, j, if both { -Cx::one() } else { Cx::one() });
            }
            Gate::Swap(a, b) => {
                let (ba, bb) = (j & bit(a) != 0, j & bit(b) != 0);
                let mut i = j & !bit(a) & !bit(b);
                if ba {
                    i |= bit(b);
                }
                if bb {
                    i |= bit(a);
                }
                u.set(i, j, Cx::one());
            }
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOp {
        s.parse().unwrap()
    }

    #[test]
    fn double_double_carries_extra_digits() {
        let a = DoubleDouble::from_f64(1.0) + DoubleDouble::from_f64(1e-20);
        let b = a - DoubleDouble::from_f64(1.0);
        assert!((b.to_f64() - 1e-20).abs() < 1e-35);
        let third = DoubleDouble::from_f64(1.0) / DoubleDouble::from_f64(3.0);
        let back = third * DoubleDouble::from_f64(3.0) - DoubleDouble::from_f64(1.0);
        assert!(back.to_f64().abs() < 1e-30);
        let r = DoubleDouble::from_f64(2.0).sqrt();
        assert!((r * r - DoubleDouble::from_f64(2.0)).to_f64().abs() < 1e-30);
    }

    #[test]
    fn pauli_matrices() {
        let y = DenseMatrix::<f64>::from_pauli(&p("Y"));
        assert_eq!(y.get(0, 1), Cx::new(0.0, -1.0));
        assert_eq!(y.get(1, 0), Cx::new(0.0, 1.0));
        let x = DenseMatrix::<f64>::from_pauli(&p("X"));
        let z = DenseMatrix::<f64>::from_pauli(&p("Z"));
        let xz = x.matmul(&z);
        let minus_i_y = DenseMatrix::<f64>::from_pauli(&p("-iY"));
        assert!(xz.max_abs_diff(&minus_i_y) < 1e-15);
    }

    #[test]
    fn fast_pauli_products_match_matmul() {
        let a = DenseMatrix::<f64>::from_pauli(&p("XZ")).add(&DenseMatrix::from_pauli(&p("iYY")));
        for s in ["XI", "ZY", "-iYX", "IZ"] {
            let op = p(s);
            let m = DenseMatrix::<f64>::from_pauli(&op);
            assert!(a.pauli_left(&op).max_abs_diff(&m.matmul(&a)) < 1e-14);
            assert!(a.pauli_right(&op).max_abs_diff(&a.matmul(&m)) < 1e-14);
            let tr = a.matmul(&m).trace();
            let fast = a.trace_with_pauli(&op);
            assert!((tr - fast).norm_sqr() < 1e-24);
        }
    }

    #[test]
    fn depolarizing_extremes() {
        let zero = density_from_tableau::<f64>(&Tableau::init_zero(1)).unwrap();
        let mixed = zero.depolarize(0.75);
        let half = DenseMatrix::<f64>::identity(1).scale(0.5);
        assert!(mixed.max_abs_diff(&half) < 1e-15);
        let full = zero.depolarize(1.0);
        // p = 1 leaves |0><0| -> (2/3)|1><1| + (1/3)|0><0|
        assert!((full.get(0, 0).re - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tableau_densities() {
        let mut t = Tableau::init_zero(2);
        t.apply_gates(&[Gate::H(0), Gate::CX(0, 1)]).unwrap();
        let rho = density_from_tableau::<f64>(&t).unwrap();
        let v = state_vector_from_tableau::<f64>(&t).unwrap();
        assert!(rho.max_abs_diff(&DenseMatrix::outer(&v)) < 1e-15);
        assert!((rho.get(0, 3).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn noiseless_lst_value_is_exact() {
        let code = StabilizerCode::five_qubit();
        let rho = exact_noisy_state::<f64>(std::slice::from_ref(&code), &LogicalStatePrep::zero(1), 0.0).unwrap();
        let zbar = PauliSum::single(code.logical_z()[0].clone());
        let v = exact_lst_value(&rho, &code, &zbar, &[1.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }
}
