//! Stabilizer tableaus for pure and mixed stabilizer states.
//!
//! The tableau holds `N` stabilizer rows and `N` destabilizer rows forming a
//! symplectic basis: stabilizer `i` anticommutes with destabilizer `j` iff
//! `i == j`, everything else commutes. With rank deficit `r`, only the first
//! `N − r` stabilizers are active and the state is
//! `ρ = 2^{-N} ∏_{i < N−r} (𝟙 + S_i)`. The remaining `r` pairs span the
//! logical operators of the maximally mixed part.

use rand::Rng;
use thiserror::Error;

use crate::pauli::{product_phase, symplectic_parity, words_for, PauliError, PauliOp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableauError {
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("two-qubit gate on a repeated qubit {0}")]
    RepeatedQubit(usize),
    #[error("generators {first} and {second} anticommute")]
    IncompatibleGenerators { first: usize, second: usize },
    #[error("operator {0} is not Hermitian")]
    NonHermitian(String),
    #[error("invalid tableau: {0}")]
    Invalid(String),
}

/// Clifford gates understood by [`Tableau::apply_gate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    X(usize),
    Y(usize),
    Z(usize),
    CX(usize, usize),
    CZ(usize, usize),
    Swap(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => vec![q],
            Gate::CX(a, b) | Gate::CZ(a, b) | Gate::Swap(a, b) => vec![a, b],
        }
    }
}

/// How a Hermitian Pauli relates to the current stabilizer state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// Anticommutes with the active stabilizer at this index.
    Active(usize),
    /// Commutes with the active group but anticommutes with the inactive
    /// stabilizer (`destab == false`) or destabilizer of this pair.
    Inactive { index: usize, destab: bool },
    /// Lies in the stabilizer group up to sign; `sign_matches` tells whether
    /// `+op` itself is in the group.
    InGroup { sign_matches: bool },
}

#[derive(Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    w: usize,
    /// Rows `0..n` are stabilizers, `n..2n` destabilizers.
    x: Vec<u64>,
    z: Vec<u64>,
    phase: Vec<u8>,
    r: usize,
}

impl Tableau {
    /// `|0…0⟩`.
    pub fn init_zero(n: usize) -> Self {
        assert!(n >= 1, "tableau needs at least one qubit");
        let w = words_for(n);
        let mut t = Tableau {
            n,
            w,
            x: vec![0; 2 * n * w],
            z: vec![0; 2 * n * w],
            phase: vec![0; 2 * n],
            r: 0,
        };
        for q in 0..n {
            t.z[q * w + q / 64] |= 1 << (q % 64);
            t.x[(n + q) * w + q / 64] |= 1 << (q % 64);
        }
        t
    }

    /// `𝟙 / 2^N`.
    pub fn maximally_mixed(n: usize) -> Self {
        let mut t = Self::init_zero(n);
        t.r = n;
        t
    }

    /// Builds a tableau from explicit rows. The first `n − r` stabilizers are
    /// active. The symplectic structure is validated.
    pub fn from_rows(
        stabs: &[PauliOp],
        destabs: &[PauliOp],
        r: usize,
    ) -> Result<Self, TableauError> {
        let t = Self::from_rows_unchecked(stabs, destabs, r);
        t.check_invariants()?;
        Ok(t)
    }

    pub fn from_rows_unchecked(stabs: &[PauliOp], destabs: &[PauliOp], r: usize) -> Self {
        let n = stabs.len();
        assert_eq!(destabs.len(), n);
        assert!(r <= n);
        let w = words_for(n);
        let mut t = Tableau {
            n,
            w,
            x: vec![0; 2 * n * w],
            z: vec![0; 2 * n * w],
            phase: vec![0; 2 * n],
            r,
        };
        for (i, op) in stabs.iter().chain(destabs).enumerate() {
            assert_eq!(op.n_qubits(), n);
            t.x[i * w..(i + 1) * w].copy_from_slice(op.x_words());
            t.z[i * w..(i + 1) * w].copy_from_slice(op.z_words());
            t.phase[i] = op.phase();
        }
        t
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn rank_deficit(&self) -> usize {
        self.r
    }

    #[inline]
    fn active(&self) -> usize {
        self.n - self.r
    }

    #[inline]
    fn rx(&self, row: usize) -> &[u64] {
        &self.x[row * self.w..(row + 1) * self.w]
    }

    #[inline]
    fn rz(&self, row: usize) -> &[u64] {
        &self.z[row * self.w..(row + 1) * self.w]
    }

    fn row_op(&self, row: usize) -> PauliOp {
        PauliOp::from_words(
            self.n,
            self.rx(row).to_vec(),
            self.rz(row).to_vec(),
            self.phase[row],
        )
    }

    pub fn stabilizer(&self, i: usize) -> PauliOp {
        self.row_op(i)
    }

    pub fn destabilizer(&self, i: usize) -> PauliOp {
        self.row_op(self.n + i)
    }

    /// Generators of the stabilizer group (the active rows).
    pub fn stabilizers(&self) -> Vec<PauliOp> {
        (0..self.active()).map(|i| self.row_op(i)).collect()
    }

    #[inline]
    fn anticommutes_row(&self, row: usize, op: &PauliOp) -> bool {
        symplectic_parity(self.rx(row), self.rz(row), op.x_words(), op.z_words()) == 1
    }

    /// `row[dst] ← row[dst] · row[src]`.
    fn mul_row(&mut self, dst: usize, src: usize) {
        let w = self.w;
        let p = product_phase(self.rx(dst), self.rz(dst), self.rx(src), self.rz(src));
        for k in 0..w {
            self.x[dst * w + k] ^= self.x[src * w + k];
            self.z[dst * w + k] ^= self.z[src * w + k];
        }
        self.phase[dst] = ((self.phase[dst] as u32 + self.phase[src] as u32 + p) & 3) as u8;
    }

    fn set_row(&mut self, row: usize, op: &PauliOp) {
        let w = self.w;
        self.x[row * w..(row + 1) * w].copy_from_slice(op.x_words());
        self.z[row * w..(row + 1) * w].copy_from_slice(op.z_words());
        self.phase[row] = op.phase();
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.w;
        self.x.copy_within(src * w..(src + 1) * w, dst * w);
        self.z.copy_within(src * w..(src + 1) * w, dst * w);
        self.phase[dst] = self.phase[src];
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.w;
        for k in 0..w {
            self.x.swap(a * w + k, b * w + k);
            self.z.swap(a * w + k, b * w + k);
        }
        self.phase.swap(a, b);
    }

    fn check_op(&self, op: &PauliOp) -> Result<(), TableauError> {
        if op.n_qubits() != self.n {
            return Err(PauliError::SizeMismatch {
                left: self.n,
                right: op.n_qubits(),
            }
            .into());
        }
        if !op.is_hermitian() {
            return Err(TableauError::NonHermitian(op.to_string()));
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<(), TableauError> {
        if q >= self.n {
            return Err(PauliError::IndexOutOfRange {
                index: q,
                n: self.n,
            }
            .into());
        }
        Ok(())
    }

    /// Verifies the symplectic structure and Hermiticity of every row.
    pub fn check_invariants(&self) -> Result<(), TableauError> {
        let n = self.n;
        if self.r > n {
            return Err(TableauError::Invalid(format!("rank deficit {} > {n}", self.r)));
        }
        for a in 0..2 * n {
            if self.phase[a] & 1 == 1 {
                return Err(TableauError::Invalid(format!("row {a} is not Hermitian")));
            }
            for b in a..2 * n {
                let anti =
                    symplectic_parity(self.rx(a), self.rz(a), self.rx(b), self.rz(b)) == 1;
                let want = b == a + n && a < n;
                if anti != want {
                    return Err(TableauError::Invalid(format!(
                        "rows {a} and {b} {}",
                        if anti { "anticommute" } else { "commute" }
                    )));
                }
            }
        }
        Ok(())
    }

    /// Conjugates the state by a Clifford gate: every row `P ↦ U P U†`.
    pub fn apply_gate(&mut self, gate: Gate) -> Result<(), TableauError> {
        for q in gate.qubits() {
            self.check_qubit(q)?;
        }
        if let Gate::CX(a, b) | Gate::CZ(a, b) | Gate::Swap(a, b) = gate {
            if a == b {
                return Err(TableauError::RepeatedQubit(a));
            }
        }
        let w = self.w;
        let bit = |q: usize| (q / 64, 1u64 << (q % 64));
        for row in 0..2 * self.n {
            let base = row * w;
            let get = |v: &Vec<u64>, q: usize| {
                let (k, m) = bit(q);
                v[base + k] & m != 0
            };
            let mut flip = false;
            match gate {
                Gate::H(q) => {
                    let (xq, zq) = (get(&self.x, q), get(&self.z, q));
                    flip = xq && zq;
                    put(&mut self.x, base, q, zq);
                    put(&mut self.z, base, q, xq);
                }
                Gate::S(q) => {
                    let (xq, zq) = (get(&self.x, q), get(&self.z, q));
                    flip = xq && zq;
                    put(&mut self.z, base, q, zq ^ xq);
                }
                Gate::X(q) => flip = get(&self.z, q),
                Gate::Z(q) => flip = get(&self.x, q),
                Gate::Y(q) => flip = get(&self.x, q) ^ get(&self.z, q),
                Gate::CX(c, t) => {
                    let (xc, zc, xt, zt) = (
                        get(&self.x, c),
                        get(&self.z, c),
                        get(&self.x, t),
                        get(&self.z, t),
                    );
                    flip = xc && zt && (xt ^ zc ^ true);
                    put(&mut self.x, base, t, xt ^ xc);
                    put(&mut self.z, base, c, zc ^ zt);
                }
                Gate::CZ(a, b) => {
                    let (xa, za, xb, zb) = (
                        get(&self.x, a),
                        get(&self.z, a),
                        get(&self.x, b),
                        get(&self.z, b),
                    );
                    flip = xa && xb && (za ^ zb);
                    put(&mut self.z, base, a, za ^ xb);
                    put(&mut self.z, base, b, zb ^ xa);
                }
                Gate::Swap(a, b) => {
                    let (xa, za, xb, zb) = (
                        get(&self.x, a),
                        get(&self.z, a),
                        get(&self.x, b),
                        get(&self.z, b),
                    );
                    put(&mut self.x, base, a, xb);
                    put(&mut self.x, base, b, xa);
                    put(&mut self.z, base, a, zb);
                    put(&mut self.z, base, b, za);
                }
            }
            if flip {
                self.phase[row] ^= 2;
            }
        }
        Ok(())
    }

    pub fn apply_gates(&mut self, gates: &[Gate]) -> Result<(), TableauError> {
        gates.iter().try_for_each(|&g| self.apply_gate(g))
    }

    /// Conjugates the state by the Pauli `p`: rows anticommuting with it flip sign.
    pub fn apply_pauli_frame(&mut self, p: &PauliOp) -> Result<(), TableauError> {
        if p.n_qubits() != self.n {
            return Err(PauliError::SizeMismatch {
                left: self.n,
                right: p.n_qubits(),
            }
            .into());
        }
        for row in 0..2 * self.n {
            if self.anticommutes_row(row, p) {
                self.phase[row] ^= 2;
            }
        }
        Ok(())
    }

    /// Locates `op` relative to the state. `op` must be Hermitian and sized.
    pub fn classify(&self, op: &PauliOp) -> Relation {
        let n = self.n;
        let a = self.active();
        if let Some(p) = (0..a).find(|&i| self.anticommutes_row(i, op)) {
            return Relation::Active(p);
        }
        for i in a..n {
            if self.anticommutes_row(i, op) {
                return Relation::Inactive {
                    index: i,
                    destab: false,
                };
            }
            if self.anticommutes_row(n + i, op) {
                return Relation::Inactive {
                    index: i,
                    destab: true,
                };
            }
        }
        // op = ± ∏ S_i over active i whose destabilizer anticommutes with op.
        let w = self.w;
        let mut acc_x = vec![0u64; w];
        let mut acc_z = vec![0u64; w];
        let mut e: u32 = 0;
        for i in 0..a {
            if self.anticommutes_row(n + i, op) {
                e += product_phase(&acc_x, &acc_z, self.rx(i), self.rz(i)) + self.phase[i] as u32;
                for k in 0..w {
                    acc_x[k] ^= self.x[i * w + k];
                    acc_z[k] ^= self.z[i * w + k];
                }
            }
        }
        debug_assert!(acc_x == op.x_words() && acc_z == op.z_words());
        Relation::InGroup {
            sign_matches: (e & 3) as u8 == op.phase(),
        }
    }

    /// Replaces the state by the normalized projection onto the `+1`
    /// eigenspace of `g`, given that `g` is not in the group up to sign.
    fn collapse(&mut self, g: &PauliOp, rel: Relation) {
        let n = self.n;
        let (pivot, partner, slot) = match rel {
            Relation::Active(p) => (p, n + p, p),
            Relation::Inactive { index, destab } => {
                if destab {
                    (n + index, index, index)
                } else {
                    (index, n + index, index)
                }
            }
            Relation::InGroup { .. } => unreachable!("collapse on a group element"),
        };
        for row in 0..2 * n {
            if row != pivot && row != partner && self.anticommutes_row(row, g) {
                self.mul_row(row, pivot);
            }
        }
        self.copy_row(n + slot, pivot);
        self.set_row(slot, g);
        if let Relation::Inactive { index, .. } = rel {
            let a = self.active();
            self.swap_rows(index, a);
            self.swap_rows(n + index, n + a);
            self.r -= 1;
        }
    }

    /// Projects onto the `+1` eigenspace of one Hermitian generator and
    /// returns `Tr(ΠρΠ)` for the normalized current state. On a zero trace
    /// the state is left untouched.
    pub fn project_one(&mut self, g: &PauliOp) -> Result<f64, TableauError> {
        self.check_op(g)?;
        Ok(self.project_one_unchecked(g))
    }

    fn project_one_unchecked(&mut self, g: &PauliOp) -> f64 {
        match self.classify(g) {
            Relation::InGroup { sign_matches } => {
                if sign_matches {
                    1.0
                } else {
                    0.0
                }
            }
            rel => {
                self.collapse(g, rel);
                0.5
            }
        }
    }

    /// Applies `Π = ∏_k (𝟙 + G_k)/2` and returns `Tr(ΠρΠ)`; the tableau then
    /// holds the normalized post-projection state. If the trace is zero the
    /// remaining generators are skipped.
    pub fn project(&mut self, generators: &[PauliOp]) -> Result<f64, TableauError> {
        for g in generators {
            self.check_op(g)?;
        }
        for (i, a) in generators.iter().enumerate() {
            for (j, b) in generators.iter().enumerate().skip(i + 1) {
                if !a.commutes_unchecked(b) {
                    return Err(TableauError::IncompatibleGenerators {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(self.project_unchecked(generators))
    }

    /// [`Tableau::project`] without the size, Hermiticity and commutation checks.
    pub fn project_unchecked(&mut self, generators: &[PauliOp]) -> f64 {
        let mut trace = 1.0;
        for g in generators {
            trace *= self.project_one_unchecked(g);
            if trace == 0.0 {
                break;
            }
        }
        trace
    }

    /// Measures the Hermitian Pauli `g`; returns the outcome bit `s`, with
    /// the state collapsed onto the `(−1)^s` eigenspace. Deterministic
    /// outcomes draw nothing from `rng`.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        g: &PauliOp,
        rng: &mut R,
    ) -> Result<bool, TableauError> {
        self.check_op(g)?;
        Ok(self.measure_pauli_unchecked(g, rng))
    }

    pub fn measure_pauli_unchecked<R: Rng + ?Sized>(&mut self, g: &PauliOp, rng: &mut R) -> bool {
        match self.classify(g) {
            Relation::InGroup { sign_matches } => !sign_matches,
            rel => {
                let s: bool = rng.gen();
                if s {
                    self.collapse(&g.clone().negated(), rel);
                } else {
                    self.collapse(g, rel);
                }
                s
            }
        }
    }

    /// Measures every qubit in the computational basis, in ascending order.
    pub fn measure_all_z<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<bool> {
        (0..self.n)
            .map(|q| {
                let zq = PauliOp::single(self.n, q, crate::pauli::Pauli::Z);
                self.measure_pauli_unchecked(&zq, rng)
            })
            .collect()
    }

    /// `Tr(ρP)` for normalized `ρ`: one of `−1, 0, +1`.
    pub fn expectation_pauli(&self, p: &PauliOp) -> Result<f64, TableauError> {
        self.check_op(p)?;
        Ok(self.expectation_unchecked(p))
    }

    pub fn expectation_unchecked(&self, p: &PauliOp) -> f64 {
        match self.classify(p) {
            Relation::InGroup { sign_matches } => {
                if sign_matches {
                    1.0
                } else {
                    -1.0
                }
            }
            _ => 0.0,
        }
    }
}

#[inline]
fn put(v: &mut [u64], base: usize, q: usize, b: bool) {
    let (k, m) = (q / 64, 1u64 << (q % 64));
    if b {
        v[base + k] |= m;
    } else {
        v[base + k] &= !m;
    }
}

impl std::fmt::Debug for Tableau {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Tableau n={} r={}", self.n, self.r)?;
        for i in 0..self.n {
            let tag = if i < self.active() { "S" } else { "s" };
            writeln!(f, "  {tag}{i} {}  D{i} {}", self.stabilizer(i), self.destabilizer(i))?;
        }
        Ok(())
    }
}
