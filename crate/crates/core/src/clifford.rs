//! Clifford group elements stored as their conjugation action, and exactly
//! uniform sampling over the `n`-qubit Clifford group (modulo global phase).
//!
//! The symplectic part is drawn with the transvection construction of Koenig
//! and Smolin: an index into `Sp(2n, 2)` is peeled off level by level, each
//! level fixing the images of one symplectic pair. Uniform random signs on
//! the `2n` generator images complete the element. Driving the same routine
//! with the digits of an integer enumerates the group, which is how small
//! groups are averaged exhaustively.

use rand::Rng;
use thiserror::Error;

use crate::pauli::{PauliError, PauliOp};

/// Largest sector size supported by the packed symplectic representation.
pub const MAX_CLIFFORD_QUBITS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliffordError {
    #[error("Clifford sampling supports 1..={MAX_CLIFFORD_QUBITS} qubits, got {0}")]
    UnsupportedSize(usize),
    #[error("index {index} outside a group of order {order}")]
    IndexOutOfRange { index: u128, order: u128 },
    #[error("group order for {0} qubits does not fit in 128 bits")]
    OrderOverflow(usize),
    #[error("generator images do not form a symplectic basis")]
    NotSymplectic,
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// The map `P ↦ U† P U` of an `n`-qubit Clifford `U`, stored as the images of
/// `X_0, Z_0, X_1, Z_1, …`. Image `2j` is `U† X_j U`, image `2j+1` is
/// `U† Z_j U`; each is a Hermitian Pauli with sign bit `signs >> i & 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CliffordElement {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    signs: u128,
}

/// Source of the bounded integer choices that select a group element.
pub trait ChoiceSource {
    /// A value in `0..bound`.
    fn below(&mut self, bound: u128) -> u128;
}

struct RngChoices<'a, R: Rng + ?Sized>(&'a mut R);

impl<R: Rng + ?Sized> ChoiceSource for RngChoices<'_, R> {
    fn below(&mut self, bound: u128) -> u128 {
        self.0.gen_range(0..bound)
    }
}

/// Mixed-radix digits of an integer, least significant first.
struct IndexChoices(u128);

impl ChoiceSource for IndexChoices {
    fn below(&mut self, bound: u128) -> u128 {
        let d = self.0 % bound;
        self.0 /= bound;
        d
    }
}

// Symplectic vectors use interleaved bits: bit 2q is x_q, bit 2q+1 is z_q.

const EVEN: u128 = 0x5555_5555_5555_5555_5555_5555_5555_5555;

#[inline]
fn swap_pairs(v: u128) -> u128 {
    ((v & EVEN) << 1) | ((v >> 1) & EVEN)
}

#[inline]
fn inner(v: u128, w: u128) -> bool {
    (v & swap_pairs(w)).count_ones() & 1 == 1
}

#[inline]
fn transvection(k: u128, v: u128) -> u128 {
    if inner(k, v) {
        v ^ k
    } else {
        v
    }
}

#[inline]
fn pair(v: u128, q: usize) -> u128 {
    (v >> (2 * q)) & 3
}

/// Two vectors `h1, h2` with `y = Z_{h2} Z_{h1} x`, where `Z_h` is the
/// transvection by `h` (zero vectors act trivially).
fn find_transvection(x: u128, y: u128, n: usize) -> (u128, u128) {
    if x == y {
        return (0, 0);
    }
    if inner(x, y) {
        return (x ^ y, 0);
    }
    for q in 0..n {
        let (xp, yp) = (pair(x, q), pair(y, q));
        if xp != 0 && yp != 0 {
            let mut zp = xp ^ yp;
            if zp == 0 {
                zp = if (xp & 1) != (xp >> 1) { 3 } else { 2 };
            }
            let z = zp << (2 * q);
            return (x ^ z, y ^ z);
        }
    }
    let mut z: u128 = 0;
    for q in 0..n {
        let (xp, yp) = (pair(x, q), pair(y, q));
        if xp != 0 && yp == 0 {
            let (x0, x1) = (xp & 1, xp >> 1);
            let zp = if x0 == x1 { 2 } else { x0 << 1 | x1 };
            z |= zp << (2 * q);
            break;
        }
    }
    for q in 0..n {
        let (xp, yp) = (pair(x, q), pair(y, q));
        if xp == 0 && yp != 0 {
            let (y0, y1) = (yp & 1, yp >> 1);
            let zp = if y0 == y1 { 2 } else { y0 << 1 | y1 };
            z |= zp << (2 * q);
            break;
        }
    }
    (x ^ z, y ^ z)
}

fn mask(bits: usize) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    }
}

/// Rows of a symplectic matrix (interleaved encoding) selected by `choices`.
fn symplectic_rows(n: usize, choices: &mut dyn ChoiceSource) -> Vec<u128> {
    // Each level acts on the trailing `m` qubits and contributes four transvections.
    let mut levels: Vec<[u128; 4]> = Vec::with_capacity(n);
    for m in (1..=n).rev() {
        let nn = 2 * m;
        let offset = 2 * (n - m);
        let k = choices.below(mask(nn)) + 1;
        let bits = choices.below(1u128 << (nn - 1));
        let mut f1 = k;
        let e1: u128 = 1;
        let (t0, t1) = find_transvection(e1, f1, m);
        let eprime = e1 | ((bits >> 1) << 2);
        let h0 = transvection(t1, transvection(t0, eprime));
        if bits & 1 == 1 {
            f1 = 0;
        }
        levels.push([t0 << offset, t1 << offset, h0 << offset, f1 << offset]);
    }
    let mut rows: Vec<u128> = (0..2 * n).map(|j| 1u128 << j).collect();
    for ts in levels.iter().rev() {
        for row in rows.iter_mut() {
            for &t in ts {
                *row = transvection(t, *row);
            }
        }
    }
    rows
}

/// `|Sp(2n, 2)|`, if it fits.
fn symplectic_order(n: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for j in 1..=n as u32 {
        let cosets = 1u128
            .checked_shl(2 * j - 1)?
            .checked_mul(1u128.checked_shl(2 * j)?.checked_sub(1)?)?;
        acc = acc.checked_mul(cosets)?;
    }
    Some(acc)
}

impl CliffordElement {
    pub fn identity(n: usize) -> Self {
        assert!((1..=MAX_CLIFFORD_QUBITS).contains(&n));
        let mut x = vec![0; 2 * n];
        let mut z = vec![0; 2 * n];
        for j in 0..n {
            x[2 * j] = 1 << j;
            z[2 * j + 1] = 1 << j;
        }
        CliffordElement { n, x, z, signs: 0 }
    }

    /// Exactly uniform element of the `n`-qubit Clifford group.
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self, CliffordError> {
        check_size(n)?;
        let rows = symplectic_rows(n, &mut RngChoices(rng));
        let signs = rng.gen::<u128>() & mask(2 * n);
        Ok(Self::from_interleaved(n, &rows, signs))
    }

    /// Number of distinct elements (Clifford group modulo phase), if it fits.
    pub fn group_order(n: usize) -> Result<u128, CliffordError> {
        check_size(n)?;
        symplectic_order(n)
            .and_then(|s| s.checked_mul(1u128.checked_shl(2 * n as u32)?))
            .ok_or(CliffordError::OrderOverflow(n))
    }

    /// The element with the given index in `0..group_order(n)`; distinct
    /// indices give distinct elements.
    pub fn from_index(n: usize, index: u128) -> Result<Self, CliffordError> {
        let order = Self::group_order(n)?;
        if index >= order {
            return Err(CliffordError::IndexOutOfRange { index, order });
        }
        let signs = index & mask(2 * n);
        let rows = symplectic_rows(n, &mut IndexChoices(index >> (2 * n)));
        Ok(Self::from_interleaved(n, &rows, signs))
    }

    fn from_interleaved(n: usize, rows: &[u128], signs: u128) -> Self {
        let mut x = vec![0u64; 2 * n];
        let mut z = vec![0u64; 2 * n];
        for (i, &v) in rows.iter().enumerate() {
            for q in 0..n {
                x[i] |= ((v >> (2 * q) & 1) as u64) << q;
                z[i] |= ((v >> (2 * q + 1) & 1) as u64) << q;
            }
        }
        CliffordElement { n, x, z, signs }
    }

    /// Builds an element from the images of `X_j` and `Z_j` under `P ↦ U†PU`.
    pub fn from_images(images_x: &[PauliOp], images_z: &[PauliOp]) -> Result<Self, CliffordError> {
        let n = images_x.len();
        check_size(n)?;
        if images_z.len() != n {
            return Err(CliffordError::NotSymplectic);
        }
        let mut c = CliffordElement {
            n,
            x: vec![0; 2 * n],
            z: vec![0; 2 * n],
            signs: 0,
        };
        for (i, op) in (0..n).flat_map(|j| [&images_x[j], &images_z[j]]).enumerate() {
            if op.n_qubits() != n {
                return Err(PauliError::SizeMismatch {
                    left: n,
                    right: op.n_qubits(),
                }
                .into());
            }
            if !op.is_hermitian() {
                return Err(CliffordError::NotSymplectic);
            }
            c.x[i] = op.x_words()[0];
            c.z[i] = op.z_words()[0];
            if op.phase() == 2 {
                c.signs |= 1 << i;
            }
        }
        if !c.is_symplectic() {
            return Err(CliffordError::NotSymplectic);
        }
        Ok(c)
    }

    /// Raw table access: `(x, z, sign)` of image `i` (`2j` for `X_j`, `2j+1` for `Z_j`).
    #[inline]
    pub fn raw_image(&self, i: usize) -> (u64, u64, bool) {
        (self.x[i], self.z[i], (self.signs >> i) & 1 == 1)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    fn is_symplectic(&self) -> bool {
        let n = self.n;
        for a in 0..2 * n {
            for b in a + 1..2 * n {
                let anti = ((self.x[a] & self.z[b]) ^ (self.z[a] & self.x[b])).count_ones() & 1 == 1;
                let want = a % 2 == 0 && b == a + 1;
                if anti != want {
                    return false;
                }
            }
        }
        true
    }

    fn image(&self, i: usize) -> PauliOp {
        let phase = if (self.signs >> i) & 1 == 1 { 2 } else { 0 };
        PauliOp::from_words(self.n, vec![self.x[i]], vec![self.z[i]], phase)
    }

    /// `U† X_j U`.
    pub fn image_x(&self, j: usize) -> PauliOp {
        self.image(2 * j)
    }

    /// `U† Z_j U`.
    pub fn image_z(&self, j: usize) -> PauliOp {
        self.image(2 * j + 1)
    }

    /// `U† P U` with exact phase.
    pub fn pullback(&self, p: &PauliOp) -> Result<PauliOp, CliffordError> {
        if p.n_qubits() != self.n {
            return Err(PauliError::SizeMismatch {
                left: self.n,
                right: p.n_qubits(),
            }
            .into());
        }
        // σ(x,z) = i^{x·z} X^x Z^z
        let xz = (p.x_words()[0] & p.z_words()[0]).count_ones();
        let mut out = PauliOp::identity(self.n);
        out.set_phase(((p.phase() as u32 + xz) & 3) as u8);
        for q in 0..self.n {
            if p.x_bit(q) {
                out.mul_assign_right(&self.image_x(q));
            }
        }
        for q in 0..self.n {
            if p.z_bit(q) {
                out.mul_assign_right(&self.image_z(q));
            }
        }
        Ok(out)
    }

    /// Composition: `(self ∘ other)(P) = self(other(P))`.
    pub fn compose(&self, other: &CliffordElement) -> Result<Self, CliffordError> {
        let ix: Vec<PauliOp> = (0..self.n)
            .map(|j| self.pullback(&other.image_x(j)))
            .collect::<Result<_, _>>()?;
        let iz: Vec<PauliOp> = (0..self.n)
            .map(|j| self.pullback(&other.image_z(j)))
            .collect::<Result<_, _>>()?;
        Self::from_images(&ix, &iz)
    }

    /// The map `P ↦ U P U†`.
    pub fn inverse(&self) -> Self {
        let n = self.n;
        // Symplectic inverse Ω Sᵀ Ω: the inverse image of X_j has x-bits from the
        // z-components of the Z-images and z-bits from the x-components of the X-images.
        let mut inv = CliffordElement {
            n,
            x: vec![0; 2 * n],
            z: vec![0; 2 * n],
            signs: 0,
        };
        for j in 0..n {
            for q in 0..n {
                let xq = |i: usize| (self.x[i] >> j) & 1;
                let zq = |i: usize| (self.z[i] >> j) & 1;
                // inverse image of X_j
                inv.x[2 * j] |= zq(2 * q + 1) << q;
                inv.z[2 * j] |= zq(2 * q) << q;
                // inverse image of Z_j
                inv.x[2 * j + 1] |= xq(2 * q + 1) << q;
                inv.z[2 * j + 1] |= xq(2 * q) << q;
            }
        }
        for i in 0..2 * n {
            let target = if i % 2 == 0 {
                PauliOp::single(n, i / 2, crate::pauli::Pauli::X)
            } else {
                PauliOp::single(n, i / 2, crate::pauli::Pauli::Z)
            };
            let back = self.pullback(&inv.image(i)).expect("sizes agree");
            debug_assert!(back.same_string(&target));
            if back.phase() != target.phase() {
                inv.signs |= 1 << i;
            }
        }
        inv
    }

    /// Byte key that identifies the element; equal keys iff equal elements.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut key = Vec::with_capacity(16 * self.n + 16);
        for i in 0..2 * self.n {
            key.extend_from_slice(&self.x[i].to_le_bytes());
            key.extend_from_slice(&self.z[i].to_le_bytes());
        }
        key.extend_from_slice(&self.signs.to_le_bytes());
        key
    }

    /// Sign bits of the `2n` images.
    pub fn signs(&self) -> u128 {
        self.signs
    }
}

fn check_size(n: usize) -> Result<(), CliffordError> {
    if (1..=MAX_CLIFFORD_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(CliffordError::UnsupportedSize(n))
    }
}

impl std::fmt::Debug for CliffordElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Clifford[")?;
        for j in 0..self.n {
            if j > 0 {
                write!(f, ", ")?;
            }
            write!(f, "X{j}->{} Z{j}->{}", self.image_x(j), self.image_z(j))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn group_orders() {
        assert_eq!(CliffordElement::group_order(1).unwrap(), 24);
        assert_eq!(CliffordElement::group_order(2).unwrap(), 11520);
        assert_eq!(CliffordElement::group_order(3).unwrap(), 92897280);
    }

    #[test]
    fn enumeration_is_exhaustive_and_distinct() {
        for n in 1..=2 {
            let order = CliffordElement::group_order(n).unwrap();
            let keys: HashSet<Vec<u8>> = (0..order)
                .map(|i| CliffordElement::from_index(n, i).unwrap().canonical_key())
                .collect();
            assert_eq!(keys.len() as u128, order);
        }
    }

    #[test]
    fn sampled_elements_are_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 3, 7, 33, 64] {
            let c = CliffordElement::sample(n, &mut rng).unwrap();
            assert!(c.is_symplectic(), "n = {n}");
        }
        assert!(CliffordElement::sample(65, &mut rng).is_err());
    }

    #[test]
    fn transvection_pair_maps_x_to_y() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=6 {
            for _ in 0..200 {
                let x = rng.gen::<u128>() & mask(2 * n);
                let y = rng.gen::<u128>() & mask(2 * n);
                if x == 0 || y == 0 {
                    continue;
                }
                let (h1, h2) = find_transvection(x, y, n);
                assert_eq!(transvection(h2, transvection(h1, x)), y);
            }
        }
    }

    #[test]
    fn inverse_undoes_pullback() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [1, 2, 5, 12] {
            let c = CliffordElement::sample(n, &mut rng).unwrap();
            let inv = c.inverse();
            for _ in 0..20 {
                let letters: Vec<_> = (0..n)
                    .map(|_| match rng.gen_range(0..4) {
                        0 => crate::pauli::Pauli::I,
                        1 => crate::pauli::Pauli::X,
                        2 => crate::pauli::Pauli::Y,
                        _ => crate::pauli::Pauli::Z,
                    })
                    .collect();
                let p = PauliOp::from_letters(&letters, rng.gen_range(0..4));
                let there = c.pullback(&p).unwrap();
                assert_eq!(inv.pullback(&there).unwrap(), p);
                assert_eq!(c.pullback(&inv.pullback(&p).unwrap()).unwrap(), p);
            }
        }
    }

    #[test]
    fn pullback_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = CliffordElement::sample(4, &mut rng).unwrap();
        let a: PauliOp = "XYZI".parse().unwrap();
        let b: PauliOp = "-ZZXY".parse().unwrap();
        let lhs = c.pullback(&a.multiply(&b).unwrap()).unwrap();
        let rhs = c.pullback(&a).unwrap().multiply(&c.pullback(&b).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}
