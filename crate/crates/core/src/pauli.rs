//! Signed Pauli strings in binary symplectic form.
//!
//! A [`PauliOp`] on `N` qubits stores packed `x` and `z` bit rows plus a phase
//! exponent `e` and denotes `i^e · σ(x,z)` where `σ(x,z) = i^{x·z} X^x Z^z`.
//! The canonical operator `σ(x,z)` is Hermitian (a `Y` appears wherever both
//! bits are set), so `e ∈ {0, 2}` are exactly the Hermitian strings.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Number of 64-bit words needed to hold `n` bits.
#[inline]
pub fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("qubit count mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("qubit index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("cannot parse Pauli string {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("empty operator list")]
    Empty,
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOp {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliOp {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    /// `pauli` acting on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, pauli: Pauli) -> Self {
        assert!(q < n, "qubit {q} out of range for {n} qubits");
        let mut op = Self::identity(n);
        op.set(q, pauli);
        op
    }

    /// Builds an operator from packed words; bits above `n` must be clear.
    pub fn from_words(n: usize, x: Vec<u64>, z: Vec<u64>, phase: u8) -> Self {
        assert_eq!(x.len(), words_for(n));
        assert_eq!(z.len(), words_for(n));
        let op = PauliOp {
            n,
            x,
            z,
            phase: phase & 3,
        };
        debug_assert!(op.tail_is_clear());
        op
    }

    pub fn from_letters(letters: &[Pauli], phase: u8) -> Self {
        let mut op = Self::identity(letters.len());
        for (q, &p) in letters.iter().enumerate() {
            op.set(q, p);
        }
        op.phase = phase & 3;
        op
    }

    fn tail_is_clear(&self) -> bool {
        let rem = self.n % 64;
        if rem == 0 || self.x.is_empty() {
            return true;
        }
        let mask = !0u64 << rem;
        let last = self.x.len() - 1;
        self.x[last] & mask == 0 && self.z[last] & mask == 0
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn phase(&self) -> u8 {
        self.phase
    }

    #[inline]
    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    #[inline]
    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    /// Overwrites the letter on qubit `q` without touching the phase.
    pub fn set(&mut self, q: usize, pauli: Pauli) {
        let (xb, zb) = pauli.bits();
        self.set_bits(q, xb, zb);
    }

    #[inline]
    pub fn set_bits(&mut self, q: usize, xb: bool, zb: bool) {
        let (w, b) = (q / 64, q % 64);
        let m = 1u64 << b;
        if xb {
            self.x[w] |= m;
        } else {
            self.x[w] &= !m;
        }
        if zb {
            self.z[w] |= m;
        } else {
            self.z[w] &= !m;
        }
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    /// Multiplies by `i^k`.
    pub fn add_phase(&mut self, k: u8) {
        self.phase = (self.phase + k) & 3;
    }

    pub fn negated(mut self) -> Self {
        self.add_phase(2);
        self
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase & 1 == 0
    }

    /// True if the string part is the identity (any phase).
    pub fn is_identity_string(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Same string with phase exponent 0.
    pub fn unsigned(&self) -> Self {
        let mut op = self.clone();
        op.phase = 0;
        op
    }

    /// True if the two operators share the same string (phases ignored).
    pub fn same_string(&self, other: &PauliOp) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    fn check_size(&self, other: &PauliOp) -> Result<(), PauliError> {
        if self.n != other.n {
            return Err(PauliError::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Product `self · other` with exact phase tracking.
    pub fn multiply(&self, other: &PauliOp) -> Result<PauliOp, PauliError> {
        self.check_size(other)?;
        let mut out = self.clone();
        out.mul_assign_right(other);
        Ok(out)
    }

    /// `self ← self · other`. Panics on size mismatch.
    pub fn mul_assign_right(&mut self, other: &PauliOp) {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        let p = product_phase(&self.x, &self.z, &other.x, &other.z);
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a ^= b;
        }
        for (a, b) in self.z.iter_mut().zip(&other.z) {
            *a ^= b;
        }
        self.phase = ((self.phase as u32 + other.phase as u32 + p) & 3) as u8;
    }

    /// `true` iff the operators commute.
    pub fn commutes(&self, other: &PauliOp) -> Result<bool, PauliError> {
        self.check_size(other)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub fn commutes_unchecked(&self, other: &PauliOp) -> bool {
        symplectic_parity(&self.x, &self.z, &other.x, &other.z) == 0
    }

    /// Places this operator on qubits `offset..offset + n` of a `total`-qubit register.
    pub fn embed(&self, total: usize, offset: usize) -> PauliOp {
        assert!(offset + self.n <= total);
        let mut out = PauliOp::identity(total);
        for q in 0..self.n {
            out.set_bits(offset + q, self.x_bit(q), self.z_bit(q));
        }
        out.phase = self.phase;
        out
    }

    /// Restriction to qubits `offset..offset + len`; the phase is kept.
    pub fn restrict(&self, offset: usize, len: usize) -> PauliOp {
        assert!(offset + len <= self.n);
        let mut out = PauliOp::identity(len);
        for q in 0..len {
            out.set_bits(q, self.x_bit(offset + q), self.z_bit(offset + q));
        }
        out.phase = self.phase;
        out
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PauliOp) -> PauliOp {
        let n = self.n + other.n;
        let mut out = self.embed(n, 0);
        for q in 0..other.n {
            out.set_bits(self.n + q, other.x_bit(q), other.z_bit(q));
        }
        out.phase = (self.phase + other.phase) & 3;
        out
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n).map(|q| self.get(q)).collect()
    }
}

/// Exponent `p` with `σ(x,z)·σ(x',z') = i^p σ(x⊕x', z⊕z')`:
/// `Σ_i z_i x'_i − x_i z'_i + 2(z_i+z'_i)⌊(x_i+x'_i)/2⌋ + 2(x_i+x'_i)⌊(z_i+z'_i)/2⌋ (mod 4)`.
#[inline]
pub fn product_phase(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u32 {
    let mut acc: u32 = 0;
    for i in 0..x1.len() {
        let (a, b, c, d) = (x1[i], z1[i], x2[i], z2[i]);
        let plus = (b & c).count_ones();
        let minus = (a & d).count_ones();
        let carry_x = ((b ^ d) & a & c).count_ones();
        let carry_z = ((a ^ c) & b & d).count_ones();
        acc = acc
            .wrapping_add(plus)
            .wrapping_add(4 * 64 - minus)
            .wrapping_add(2 * (carry_x + carry_z));
    }
    acc & 3
}

/// Commutation indicator `Σ_i z_i x'_i + x_i z'_i (mod 2)`.
#[inline]
pub fn symplectic_parity(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u32 {
    let mut acc = 0u32;
    for i in 0..x1.len() {
        acc ^= ((z1[i] & x2[i]) ^ (x1[i] & z2[i])).count_ones();
    }
    acc & 1
}

/// Multiplies a list of operators left to right.
pub fn product(ops: &[PauliOp]) -> Result<PauliOp, PauliError> {
    let first = ops.first().ok_or(PauliError::Empty)?;
    let mut acc = PauliOp::identity(first.n);
    for op in ops {
        acc.check_size(op)?;
        acc.mul_assign_right(op);
    }
    Ok(acc)
}

const SIGN_TOKENS: [(&str, u8); 8] = [
    ("+i", 1),
    ("-i", 3),
    ("\u{2212}i", 3),
    ("+", 0),
    ("-", 2),
    ("\u{2212}", 2),
    ("i", 1),
    ("", 0),
];

impl FromStr for PauliOp {
    type Err = PauliError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let trimmed = text.trim();
        let err = |reason: &str| PauliError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let (phase, rest) = SIGN_TOKENS
            .iter()
            .find_map(|(tok, ph)| trimmed.strip_prefix(tok).map(|r| (*ph, r)))
            .ok_or_else(|| err("bad sign"))?;
        if rest.is_empty() {
            return Err(err("no Pauli letters"));
        }
        let letters = rest
            .chars()
            .map(|c| match c {
                'I' | '_' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(err(&format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PauliOp::from_letters(&letters, phase))
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(sign)?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOp({self})")
    }
}

impl serde::Serialize for PauliOp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for PauliOp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Real linear combination of Pauli strings on a common register.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PauliSum {
    pub terms: Vec<(f64, PauliOp)>,
}

impl PauliSum {
    pub fn new(terms: Vec<(f64, PauliOp)>) -> Result<Self, PauliError> {
        if let Some((_, first)) = terms.first() {
            for (_, op) in &terms {
                first.check_size(op)?;
            }
        } else {
            return Err(PauliError::Empty);
        }
        Ok(PauliSum { terms })
    }

    pub fn single(op: PauliOp) -> Self {
        PauliSum {
            terms: vec![(1.0, op)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::single(PauliOp::identity(n))
    }

    pub fn n_qubits(&self) -> usize {
        self.terms[0].1.n_qubits()
    }

    /// Expansion of `∏_j (𝟙 + G_j)/2` over commuting generators, i.e. the
    /// projector onto the stabilizer state they define.
    pub fn stabilizer_projector(generators: &[PauliOp]) -> Result<Self, PauliError> {
        let n = generators.first().ok_or(PauliError::Empty)?.n_qubits();
        let l = generators.len();
        let weight = 0.5f64.powi(l as i32);
        let mut terms = Vec::with_capacity(1 << l);
        for mask in 0u64..(1u64 << l) {
            let mut op = PauliOp::identity(n);
            for (j, g) in generators.iter().enumerate() {
                if (mask >> j) & 1 == 1 {
                    op.check_size(g)?;
                    op.mul_assign_right(g);
                }
            }
            terms.push((weight, op));
        }
        Ok(PauliSum { terms })
    }

    /// Parses `"0.5*II, 0.5*ZZ"`; a bare string has coefficient 1.
    pub fn parse(text: &str) -> Result<Self, PauliError> {
        let terms = text
            .split(',')
            .map(|part| {
                let part = part.trim();
                match part.split_once('*') {
                    Some((c, op)) => {
                        let c: f64 = c.trim().parse().map_err(|_| PauliError::Parse {
                            text: part.to_string(),
                            reason: "bad coefficient".into(),
                        })?;
                        Ok((c, op.trim().parse()?))
                    }
                    None => Ok((1.0, part.parse()?)),
                }
            })
            .collect::<Result<Vec<_>, PauliError>>()?;
        Self::new(terms)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, op)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}*{op}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOp {
        s.parse().unwrap()
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let r = p("X").multiply(&p("Z")).unwrap();
        assert_eq!(r, p("-iY"));
        assert_eq!(r.phase(), 3);
        assert!(r.x_bit(0) && r.z_bit(0));
    }

    #[test]
    fn identity_is_neutral() {
        let q = p("-iXYZI");
        assert_eq!(PauliOp::identity(4).multiply(&q).unwrap(), q);
        assert_eq!(q.multiply(&PauliOp::identity(4)).unwrap(), q);
    }

    #[test]
    fn single_qubit_table() {
        assert_eq!(p("Y").multiply(&p("Z")).unwrap(), p("+iX"));
        assert_eq!(p("Z").multiply(&p("X")).unwrap(), p("+iY"));
        assert_eq!(p("Y").multiply(&p("Y")).unwrap(), p("+I"));
        assert_eq!(p("X").multiply(&p("Y")).unwrap(), p("+iZ"));
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XI").commutes(&p("IZ")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        assert!(p("X").commutes(&p("ZZ")).is_err());
    }

    #[test]
    fn size_mismatch_is_reported() {
        assert_eq!(
            p("XX").multiply(&p("X")),
            Err(PauliError::SizeMismatch { left: 2, right: 1 })
        );
    }

    #[test]
    fn parse_and_print() {
        for s in ["+XIZ", "-iXIZ", "+iYYY", "-Z"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(p("\u{2212}iXIZ"), p("-iXIZ"));
        assert_eq!(p("XZ"), p("+XZ"));
        assert!("+XQ".parse::<PauliOp>().is_err());
        assert!("-".parse::<PauliOp>().is_err());
    }

    #[test]
    fn wide_operators_cross_word_boundaries() {
        let mut a = PauliOp::identity(130);
        let mut b = PauliOp::identity(130);
        a.set(63, Pauli::X);
        a.set(64, Pauli::Z);
        a.set(129, Pauli::Y);
        b.set(63, Pauli::Z);
        b.set(64, Pauli::Z);
        assert!(!a.commutes(&b).unwrap());
        b.set(129, Pauli::X);
        assert!(a.commutes(&b).unwrap());
        assert_eq!(a.weight(), 3);
        let s = a.to_string();
        assert_eq!(s.parse::<PauliOp>().unwrap(), a);
    }

    #[test]
    fn embed_restrict_tensor() {
        let a = p("-XZ");
        let e = a.embed(5, 2);
        assert_eq!(e, p("-IIXZI"));
        assert_eq!(e.restrict(2, 2), a);
        assert_eq!(p("X").tensor(&p("iZ")), p("+iXZ"));
    }

    #[test]
    fn pauli_sums() {
        let s = PauliSum::parse("0.5*II, 0.5*ZZ").unwrap();
        assert_eq!(s.terms.len(), 2);
        assert_eq!(PauliSum::parse(&s.to_string()).unwrap(), s);
        let proj = PauliSum::stabilizer_projector(&[p("XX"), p("ZZ")]).unwrap();
        assert_eq!(proj.terms.len(), 4);
        assert_eq!(proj.terms[3], (0.25, p("-YY")));
        assert!(PauliSum::parse("0.5*X, Z").is_ok());
        assert!(PauliSum::parse("0.5*X, ZZ").is_err());
    }
}
