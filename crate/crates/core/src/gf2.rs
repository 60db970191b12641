//! Bit-packed GF(2) matrices and null spaces of Pauli lists.

use std::fmt;

use crate::pauli::{words_for, PauliError, PauliOp};

/// Packed bit vector of fixed length.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        let m = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of set bits in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect();
        write!(f, "BitVector({s})")
    }
}

/// Dense GF(2) matrix with rows packed into 64-bit words.
#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Gf2Matrix {
            rows,
            cols,
            stride,
            bits: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[BitVector]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            m.row_mut(i).copy_from_slice(r.words());
        }
        m
    }

    /// The `2n × l` matrix whose columns are the `(x, z)` encodings of `ops`.
    pub fn from_pauli_columns(ops: &[PauliOp]) -> Result<Self, PauliError> {
        let n = uniform_size(ops)?;
        let mut m = Self::zeros(2 * n, ops.len());
        for (j, op) in ops.iter().enumerate() {
            for q in 0..n {
                m.set(q, j, op.x_bit(q));
                m.set(n + q, j, op.z_bit(q));
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.bits[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, b: bool) {
        let w = &mut self.bits[r * self.stride + c / 64];
        let m = 1u64 << (c % 64);
        if b {
            *w |= m;
        } else {
            *w &= !m;
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.bits[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row_vector(&self, r: usize) -> BitVector {
        BitVector {
            len: self.cols,
            words: self.row(r).to_vec(),
        }
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_rows(&mut self, dst: usize, src: usize) {
        if dst == src {
            self.row_mut(dst).fill(0);
            return;
        }
        let s = self.stride;
        let (a, b) = if dst < src {
            let (lo, hi) = self.bits.split_at_mut(src * s);
            (&mut lo[dst * s..(dst + 1) * s], &hi[..s])
        } else {
            let (lo, hi) = self.bits.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..(src + 1) * s])
        };
        for (x, y) in a.iter_mut().zip(b) {
            *x ^= y;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.bits.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    pub fn mul_vector(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.cols);
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let parity = self
                .row(r)
                .iter()
                .zip(v.words())
                .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
                & 1;
            out.set(r, parity == 1);
        }
        out
    }

    /// Reduced row echelon form in place. Pivots are chosen column by column,
    /// taking the first row (from the current rank downward) with a set bit.
    /// Returns the pivot columns.
    pub fn row_reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            self.swap_rows(rank, p);
            for r in 0..self.rows {
                if r != rank && self.get(r, c) {
                    self.xor_rows(r, rank);
                }
            }
            pivots.push(c);
            rank += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().row_reduce().len()
    }

    /// Basis of `{x : A x = 0}`, one vector per free column.
    pub fn null_space(&self) -> Vec<BitVector> {
        let mut r = self.clone();
        let pivots = r.row_reduce();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVector::zeros(self.cols);
            v.set(free, true);
            for (row, &pc) in pivots.iter().enumerate() {
                if r.get(row, free) {
                    v.set(pc, true);
                }
            }
            basis.push(v);
        }
        basis
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let s: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '1' } else { '.' })
                .collect();
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

pub(crate) fn uniform_size(ops: &[PauliOp]) -> Result<usize, PauliError> {
    let n = ops.first().ok_or(PauliError::Empty)?.n_qubits();
    for op in ops {
        if op.n_qubits() != n {
            return Err(PauliError::SizeMismatch {
                left: n,
                right: op.n_qubits(),
            });
        }
    }
    Ok(n)
}

/// Basis of the binary null space of the Pauli list: every basis vector `x`
/// selects a subset whose ordered product is proportional to the identity.
pub fn null_space(ops: &[PauliOp]) -> Result<Vec<BitVector>, PauliError> {
    Ok(Gf2Matrix::from_pauli_columns(ops)?.null_space())
}

/// GF(2) rank of the `(x, z)` encodings of `ops`.
pub fn pauli_rank(ops: &[PauliOp]) -> usize {
    if ops.is_empty() {
        return 0;
    }
    let rows: Vec<BitVector> = ops.iter().map(symplectic_vector).collect();
    Gf2Matrix::from_rows(&rows).rank()
}

/// Incrementally built row-echelon basis answering span-membership queries.
#[derive(Debug, Clone, Default)]
pub struct SpanBasis {
    rows: Vec<BitVector>,
    pivots: Vec<usize>,
}

impl SpanBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &mut BitVector) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(row);
            }
        }
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        let mut v = v.clone();
        self.reduce(&mut v);
        v.is_zero()
    }

    /// Adds `v`; returns `false` if it was already in the span.
    pub fn insert(&mut self, v: &BitVector) -> bool {
        let mut v = v.clone();
        self.reduce(&mut v);
        let Some(p) = v.ones().next() else {
            return false;
        };
        for (row, _) in self.rows.iter_mut().zip(&self.pivots) {
            if row.get(p) {
                row.xor_assign(&v);
            }
        }
        self.rows.push(v);
        self.pivots.push(p);
        true
    }
}

/// The `(x | z)` encoding of a Pauli as a `2n`-bit vector.
pub fn symplectic_vector(op: &PauliOp) -> BitVector {
    let n = op.n_qubits();
    let mut v = BitVector::zeros(2 * n);
    for q in 0..n {
        v.set(q, op.x_bit(q));
        v.set(n + q, op.z_bit(q));
    }
    v
}
