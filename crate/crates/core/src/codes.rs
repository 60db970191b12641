//! Stabilizer codes, logical operators, and encoded logical stabilizer states.
//!
//! Code files are plain text:
//!
//! ```text
//! # name: five-qubit
//! 5 1 3
//! +XZZXI
//! +IXZZX
//! +XIXZZ
//! +ZXIXZ
//! X:
//! +XXXXX
//! Z:
//! +ZZZZZ
//! ```
//!
//! The header gives `N k` and optionally the distance. Generator lines follow,
//! then the logical `X` and `Z` operators. Lines starting with `#` are
//! comments except for `# name:`.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::gf2::{symplectic_vector, SpanBasis};
use crate::pauli::{Pauli, PauliError, PauliOp};
use crate::tableau::Tableau;
use crate::trace::AffinePauliFactor;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid code: {first} and {second} {relation}")]
    InvalidCode {
        first: String,
        second: String,
        relation: String,
    },
    #[error("invalid code: {0}")]
    Malformed(String),
    #[error("invalid logical state: {0}")]
    InvalidPrep(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerCode {
    name: String,
    n: usize,
    k: usize,
    distance: Option<usize>,
    generators: Vec<PauliOp>,
    logical_x: Vec<PauliOp>,
    logical_z: Vec<PauliOp>,
}

fn label(kind: &str, i: usize, op: &PauliOp) -> String {
    format!("{kind} {i} ({op})")
}

impl StabilizerCode {
    /// Validates and assembles a code.
    pub fn new(
        name: impl Into<String>,
        distance: Option<usize>,
        generators: Vec<PauliOp>,
        logical_x: Vec<PauliOp>,
        logical_z: Vec<PauliOp>,
    ) -> Result<Self, CodeError> {
        let n = generators
            .first()
            .or(logical_x.first())
            .map(|g| g.n_qubits())
            .ok_or_else(|| CodeError::Malformed("no operators".into()))?;
        let k = logical_x.len();
        let code = StabilizerCode {
            name: name.into(),
            n,
            k,
            distance,
            generators,
            logical_x,
            logical_z,
        };
        code.validate()?;
        Ok(code)
    }

    fn validate(&self) -> Result<(), CodeError> {
        let n = self.n;
        let all = self
            .generators
            .iter()
            .chain(&self.logical_x)
            .chain(&self.logical_z);
        for op in all {
            if op.n_qubits() != n {
                return Err(PauliError::SizeMismatch {
                    left: n,
                    right: op.n_qubits(),
                }
                .into());
            }
            if !op.is_hermitian() {
                return Err(CodeError::Malformed(format!("{op} is not Hermitian")));
            }
        }
        if self.logical_z.len() != self.k {
            return Err(CodeError::Malformed(format!(
                "{} logical X but {} logical Z operators",
                self.k,
                self.logical_z.len()
            )));
        }
        if self.generators.len() + self.k != n {
            return Err(CodeError::Malformed(format!(
                "{} generators and {} logical qubits on {n} physical qubits",
                self.generators.len(),
                self.k
            )));
        }
        let g = &self.generators;
        for i in 0..g.len() {
            for j in i + 1..g.len() {
                if !g[i].commutes_unchecked(&g[j]) {
                    return Err(CodeError::InvalidCode {
                        first: label("generator", i, &g[i]),
                        second: label("generator", j, &g[j]),
                        relation: "anticommute".into(),
                    });
                }
            }
        }
        let mut span = SpanBasis::new();
        for (i, gi) in g.iter().enumerate() {
            if !span.insert(&symplectic_vector(gi)) {
                return Err(CodeError::InvalidCode {
                    first: label("generator", i, gi),
                    second: "the preceding generators".into(),
                    relation: "are dependent".into(),
                });
            }
        }
        let logicals: Vec<(String, &PauliOp)> = self
            .logical_x
            .iter()
            .enumerate()
            .map(|(i, op)| (label("logical X", i, op), op))
            .chain(
                self.logical_z
                    .iter()
                    .enumerate()
                    .map(|(i, op)| (label("logical Z", i, op), op)),
            )
            .collect();
        for (name, op) in &logicals {
            for (j, gj) in g.iter().enumerate() {
                if !op.commutes_unchecked(gj) {
                    return Err(CodeError::InvalidCode {
                        first: name.clone(),
                        second: label("generator", j, gj),
                        relation: "anticommute".into(),
                    });
                }
            }
        }
        for a in 0..logicals.len() {
            for b in a + 1..logicals.len() {
                // X_i with Z_i is the only anticommuting pair.
                let want_anti = b == a + self.k && a < self.k;
                let anti = !logicals[a].1.commutes_unchecked(logicals[b].1);
                if anti != want_anti {
                    return Err(CodeError::InvalidCode {
                        first: logicals[a].0.clone(),
                        second: logicals[b].0.clone(),
                        relation: if anti { "anticommute" } else { "commute" }.into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `[[N, N]]` code with no generators and bare logical operators.
    pub fn trivial(n: usize) -> Self {
        StabilizerCode {
            name: format!("trivial-{n}"),
            n,
            k: n,
            distance: Some(1),
            generators: vec![],
            logical_x: (0..n).map(|q| PauliOp::single(n, q, Pauli::X)).collect(),
            logical_z: (0..n).map(|q| PauliOp::single(n, q, Pauli::Z)).collect(),
        }
    }

    /// The `[[5,1,3]]` code.
    pub fn five_qubit() -> Self {
        builtin(FIVE_QUBIT)
    }

    /// The `[[7,1,3]]` Steane code.
    pub fn steane() -> Self {
        builtin(STEANE)
    }

    /// The `[[2,1]]` repetition code with stabilizer `ZZ`.
    pub fn zz_pair() -> Self {
        builtin(ZZ_PAIR)
    }

    /// Built-in codes by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "five-qubit" | "5-1-3" | "[[5,1,3]]" => Some(Self::five_qubit()),
            "steane" | "7-1-3" | "[[7,1,3]]" => Some(Self::steane()),
            "zz-pair" => Some(Self::zz_pair()),
            _ => {
                let n = name.strip_prefix("trivial-")?.parse().ok()?;
                (n >= 1).then(|| Self::trivial(n))
            }
        }
    }

    /// A built-in name or a path to a code file.
    pub fn resolve(spec: &str) -> Result<Self, CodeError> {
        if let Some(code) = Self::builtin(spec) {
            return Ok(code);
        }
        Self::load_file(spec)
    }

    pub fn load_file(path: impl AsRef<Path>) -> Result<Self, CodeError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CodeError::Io(format!("{}: {e}", path.display())))?;
        load_code(&text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_physical(&self) -> usize {
        self.n
    }

    pub fn k_logical(&self) -> usize {
        self.k
    }

    pub fn distance(&self) -> Option<usize> {
        self.distance
    }

    pub fn generators(&self) -> &[PauliOp] {
        &self.generators
    }

    pub fn logical_x(&self) -> &[PauliOp] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[PauliOp] {
        &self.logical_z
    }

    /// `Π = ∏_j (𝟙 + S_j)/2` as affine factors.
    pub fn projector_factors(&self) -> Vec<AffinePauliFactor> {
        self.generators
            .iter()
            .map(AffinePauliFactor::projector)
            .collect()
    }

    /// Physical operator for a `k`-qubit logical Pauli, built from the logical
    /// `X` and `Z` operators with the same phase convention as [`PauliOp`].
    pub fn lift_logical(&self, logical: &PauliOp) -> Result<PauliOp, CodeError> {
        if logical.n_qubits() != self.k {
            return Err(PauliError::SizeMismatch {
                left: self.k,
                right: logical.n_qubits(),
            }
            .into());
        }
        let xz = (0..self.k)
            .filter(|&q| logical.x_bit(q) && logical.z_bit(q))
            .count() as u32;
        let mut out = PauliOp::identity(self.n);
        out.set_phase(((logical.phase() as u32 + xz) & 3) as u8);
        for q in 0..self.k {
            if logical.x_bit(q) {
                out.mul_assign_right(&self.logical_x[q]);
            }
        }
        for q in 0..self.k {
            if logical.z_bit(q) {
                out.mul_assign_right(&self.logical_z[q]);
            }
        }
        Ok(out)
    }

    /// Codes placed side by side on consecutive qubit blocks.
    pub fn tensor(codes: &[StabilizerCode]) -> Result<Self, CodeError> {
        if codes.is_empty() {
            return Err(CodeError::Malformed("no sector codes".into()));
        }
        if codes.len() == 1 {
            return Ok(codes[0].clone());
        }
        let n: usize = codes.iter().map(|c| c.n).sum();
        let mut gens = Vec::new();
        let mut lx = Vec::new();
        let mut lz = Vec::new();
        let mut offset = 0;
        for c in codes {
            gens.extend(c.generators.iter().map(|g| g.embed(n, offset)));
            lx.extend(c.logical_x.iter().map(|g| g.embed(n, offset)));
            lz.extend(c.logical_z.iter().map(|g| g.embed(n, offset)));
            offset += c.n;
        }
        let names: Vec<&str> = codes.iter().map(|c| c.name.as_str()).collect();
        let distance = codes.iter().map(|c| c.distance).min().flatten();
        Ok(StabilizerCode {
            name: names.join("*"),
            n,
            k: lx.len(),
            distance,
            generators: gens,
            logical_x: lx,
            logical_z: lz,
        })
    }

    /// `true` iff `op` commutes with every generator and is not in the
    /// stabilizer group, i.e. it acts as a nontrivial logical operator.
    pub fn is_nontrivial_logical(&self, op: &PauliOp, span: &SpanBasis) -> bool {
        self.generators.iter().all(|g| op.commutes_unchecked(g))
            && !span.contains(&symplectic_vector(op))
    }

    fn stabilizer_span(&self) -> SpanBasis {
        let mut span = SpanBasis::new();
        for g in &self.generators {
            span.insert(&symplectic_vector(g));
        }
        span
    }

    /// Exact distance by exhaustive search over Pauli errors of weight up to
    /// `max_weight`; `None` if no logical operator that light exists.
    pub fn distance_upto(&self, max_weight: usize) -> Option<usize> {
        let span = self.stabilizer_span();
        (1..=max_weight.min(self.n)).find(|&w| self.has_logical_of_weight(w, &span))
    }

    fn has_logical_of_weight(&self, w: usize, span: &SpanBasis) -> bool {
        let n = self.n;
        let mut support: Vec<usize> = (0..w).collect();
        loop {
            for letters in 0..3usize.pow(w as u32) {
                let mut op = PauliOp::identity(n);
                let mut l = letters;
                for &q in &support {
                    op.set(q, [Pauli::X, Pauli::Y, Pauli::Z][l % 3]);
                    l /= 3;
                }
                if self.is_nontrivial_logical(&op, span) {
                    return true;
                }
            }
            // next combination
            let mut i = w;
            loop {
                if i == 0 {
                    return false;
                }
                i -= 1;
                if support[i] < n - w + i {
                    support[i] += 1;
                    for j in i + 1..w {
                        support[j] = support[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// Code file text; [`load_code`] parses it back to an equal code.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# name: {}", self.name);
        match self.distance {
            Some(d) => {
                let _ = writeln!(s, "{} {} {}", self.n, self.k, d);
            }
            None => {
                let _ = writeln!(s, "{} {}", self.n, self.k);
            }
        }
        for g in &self.generators {
            let _ = writeln!(s, "{g}");
        }
        let _ = writeln!(s, "X:");
        for g in &self.logical_x {
            let _ = writeln!(s, "{g}");
        }
        let _ = writeln!(s, "Z:");
        for g in &self.logical_z {
            let _ = writeln!(s, "{g}");
        }
        s
    }
}

const FIVE_QUBIT: &str = "\
# name: five-qubit
5 1 3
+XZZXI
+IXZZX
+XIXZZ
+ZXIXZ
X:
+XXXXX
Z:
+ZZZZZ
";

const STEANE: &str = "\
# name: steane
7 1 3
+IIIXXXX
+IXXIIXX
+XIXIXIX
+IIIZZZZ
+IZZIIZZ
+ZIZIZIZ
X:
+XXXXXXX
Z:
+ZZZZZZZ
";

const ZZ_PAIR: &str = "\
# name: zz-pair
2 1 1
+ZZ
X:
+XX
Z:
+ZI
";

fn builtin(text: &str) -> StabilizerCode {
    load_code(text).expect("built-in code is valid")
}

#[derive(PartialEq)]
enum Section {
    Generators,
    LogicalX,
    LogicalZ,
}

/// Parses and validates a code file.
pub fn load_code(text: &str) -> Result<StabilizerCode, CodeError> {
    let mut name = None;
    let mut header: Option<(usize, usize, Option<usize>)> = None;
    let mut section = Section::Generators;
    let (mut gens, mut lx, mut lz) = (Vec::new(), Vec::new(), Vec::new());
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("name:") {
                name = Some(v.trim().to_string());
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let perr = |reason: String| CodeError::Parse {
            line: line_no,
            reason,
        };
        let Some((n, _, _)) = header else {
            let nums: Vec<&str> = line.split_whitespace().collect();
            if !(2..=3).contains(&nums.len()) {
                return Err(perr(format!("expected header `N k [d]`, found {line:?}")));
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| perr(format!("bad number {s:?} in header")))
            };
            let n = parse(nums[0])?;
            let k = parse(nums[1])?;
            let d = nums.get(2).map(|s| parse(s)).transpose()?;
            if n == 0 || k > n {
                return Err(perr(format!("header N={n}, k={k} is not a valid code size")));
            }
            header = Some((n, k, d));
            continue;
        };
        match line {
            "X:" => {
                section = Section::LogicalX;
                continue;
            }
            "Z:" => {
                section = Section::LogicalZ;
                continue;
            }
            _ => {}
        }
        let op = PauliOp::from_str(line).map_err(|e| perr(e.to_string()))?;
        if op.n_qubits() != n {
            return Err(perr(format!(
                "operator {line:?} has {} qubits, expected {n}",
                op.n_qubits()
            )));
        }
        match section {
            Section::Generators => gens.push(op),
            Section::LogicalX => lx.push(op),
            Section::LogicalZ => lz.push(op),
        }
    }
    let (n, k, d) = header.ok_or(CodeError::Parse {
        line: 0,
        reason: "missing header".into(),
    })?;
    if lx.len() != k || lz.len() != k {
        return Err(CodeError::Malformed(format!(
            "header declares k={k} but found {} logical X and {} logical Z",
            lx.len(),
            lz.len()
        )));
    }
    let name = name.unwrap_or_else(|| format!("code-{n}-{k}"));
    if gens.is_empty() && lx.is_empty() {
        return Err(CodeError::Malformed("no operators".into()));
    }
    StabilizerCode::new(name, d, gens, lx, lz)
}

impl FromStr for StabilizerCode {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        load_code(s)
    }
}

/// A pure logical stabilizer state given by `k` commuting logical generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalStatePrep {
    name: String,
    generators: Vec<PauliOp>,
}

impl LogicalStatePrep {
    pub fn new(name: impl Into<String>, generators: Vec<PauliOp>) -> Result<Self, CodeError> {
        let k = generators.len();
        if k == 0 {
            return Err(CodeError::InvalidPrep("no generators".into()));
        }
        let mut span = SpanBasis::new();
        for (i, g) in generators.iter().enumerate() {
            if g.n_qubits() != k {
                return Err(CodeError::InvalidPrep(format!(
                    "{k} generators but {g} acts on {} qubits",
                    g.n_qubits()
                )));
            }
            if !g.is_hermitian() {
                return Err(CodeError::InvalidPrep(format!("{g} is not Hermitian")));
            }
            for h in &generators[..i] {
                if !g.commutes_unchecked(h) {
                    return Err(CodeError::InvalidPrep(format!("{g} and {h} anticommute")));
                }
            }
            if !span.insert(&symplectic_vector(g)) {
                return Err(CodeError::InvalidPrep(format!("{g} is dependent")));
            }
        }
        Ok(LogicalStatePrep {
            name: name.into(),
            generators,
        })
    }

    /// `|0…0⟩`.
    pub fn zero(k: usize) -> Self {
        let gens = (0..k).map(|q| PauliOp::single(k, q, Pauli::Z)).collect();
        LogicalStatePrep::new("zero", gens).expect("valid")
    }

    /// `|+…+⟩`.
    pub fn plus(k: usize) -> Self {
        let gens = (0..k).map(|q| PauliOp::single(k, q, Pauli::X)).collect();
        LogicalStatePrep::new("plus", gens).expect("valid")
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`, stabilized by `X…X` and `Z_i Z_{i+1}`.
    pub fn ghz(k: usize) -> Self {
        let mut gens = vec![PauliOp::from_letters(&vec![Pauli::X; k], 0)];
        for q in 0..k.saturating_sub(1) {
            let mut g = PauliOp::identity(k);
            g.set(q, Pauli::Z);
            g.set(q + 1, Pauli::Z);
            gens.push(g);
        }
        LogicalStatePrep::new("ghz", gens).expect("valid")
    }

    /// `zero`, `plus`, `ghz`, or a comma-separated generator list such as
    /// `+XX,+ZZ`, for `k` logical qubits.
    pub fn parse(text: &str, k: usize) -> Result<Self, CodeError> {
        match text.trim() {
            "zero" | "0" => Ok(Self::zero(k)),
            "plus" | "+" => Ok(Self::plus(k)),
            "ghz" => Ok(Self::ghz(k)),
            list => {
                let gens = list
                    .split(',')
                    .map(|s| PauliOp::from_str(s.trim()))
                    .collect::<Result<Vec<_>, _>>()?;
                let prep = Self::new(list, gens)?;
                if prep.k() != k {
                    return Err(CodeError::InvalidPrep(format!(
                        "state on {} logical qubits, expected {k}",
                        prep.k()
                    )));
                }
                Ok(prep)
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn k(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PauliOp] {
        &self.generators
    }
}

/// Stabilizer tableau of the encoded logical state over the given sectors.
pub fn prepare_logical_state(
    codes: &[StabilizerCode],
    prep: &LogicalStatePrep,
) -> Result<Tableau, CodeError> {
    let code = StabilizerCode::tensor(codes)?;
    if prep.k() != code.k {
        return Err(CodeError::InvalidPrep(format!(
            "state on {} logical qubits for codes with k = {}",
            prep.k(),
            code.k
        )));
    }
    let mut gens = code.generators.clone();
    for g in prep.generators() {
        gens.push(code.lift_logical(g)?);
    }
    let mut t = Tableau::maximally_mixed(code.n);
    t.project(&gens)
        .map_err(|e| CodeError::InvalidPrep(e.to_string()))?;
    if t.rank_deficit() != 0 {
        return Err(CodeError::InvalidPrep("state is not pure".into()));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{affine_product_trace, DEFAULT_NULL_SPACE_CAP};

    fn p(s: &str) -> PauliOp {
        s.parse().unwrap()
    }

    #[test]
    fn five_qubit_code_loads() {
        let c = StabilizerCode::five_qubit();
        assert_eq!((c.n_physical(), c.k_logical()), (5, 1));
        assert_eq!(c.generators()[0], p("XZZXI"));
        assert_eq!(c.distance_upto(5), Some(3));
        assert_eq!(StabilizerCode::steane().distance_upto(7), Some(3));
    }

    #[test]
    fn projector_traces() {
        let c = StabilizerCode::five_qubit();
        let f = c.projector_factors();
        assert_eq!(f.len(), 4);
        assert_eq!(affine_product_trace(5, &f, DEFAULT_NULL_SPACE_CAP).unwrap(), 2.0);
        let t = StabilizerCode::trivial(3);
        assert!(t.projector_factors().is_empty());
        let toy = load_code("4 2 2\n+XXXX\n+ZZZZ\nX:\n+XXII\n+XIXI\nZ:\n+ZIZI\n+ZZII\n").unwrap();
        let tr = affine_product_trace(4, &toy.projector_factors(), DEFAULT_NULL_SPACE_CAP);
        assert_eq!(tr.unwrap(), 4.0);
    }

    #[test]
    fn anticommuting_generators_identified() {
        let err = load_code("2 0\n+XI\n+ZI\nX:\nZ:\n").unwrap_err();
        match err {
            CodeError::InvalidCode { first, second, .. } => {
                assert!(first.contains("generator 0"));
                assert!(second.contains("generator 1"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn lifting_logicals() {
        let c = StabilizerCode::five_qubit();
        assert_eq!(c.lift_logical(&p("Z")).unwrap(), p("ZZZZZ"));
        assert_eq!(c.lift_logical(&p("I")).unwrap(), PauliOp::identity(5));
        let y = c.lift_logical(&p("Y")).unwrap();
        let want = c.logical_x()[0].multiply(&c.logical_z()[0]).unwrap();
        let mut want_i = want.clone();
        want_i.add_phase(1);
        assert_eq!(y, want_i);
        assert!(y.is_hermitian());
    }

    #[test]
    fn text_round_trip() {
        for c in [StabilizerCode::five_qubit(), StabilizerCode::steane(), StabilizerCode::trivial(2)] {
            assert_eq!(load_code(&c.to_text()).unwrap(), c);
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = load_code("5 1\n+XZZXI\n+IXZQX\n").unwrap_err();
        assert!(matches!(err, CodeError::Parse { line: 3, .. }));
    }

    #[test]
    fn encoded_zero_state() {
        let c = StabilizerCode::five_qubit();
        let t = prepare_logical_state(std::slice::from_ref(&c), &LogicalStatePrep::zero(1)).unwrap();
        for g in c.generators() {
            assert_eq!(t.expectation_pauli(g).unwrap(), 1.0);
        }
        assert_eq!(t.expectation_pauli(&p("ZZZZZ")).unwrap(), 1.0);
        assert_eq!(t.expectation_pauli(&p("XXXXX")).unwrap(), 0.0);
    }

    #[test]
    fn encoded_ghz_state() {
        let c = StabilizerCode::five_qubit();
        let t = prepare_logical_state(&[c.clone(), c.clone()], &LogicalStatePrep::ghz(2)).unwrap();
        let both = StabilizerCode::tensor(&[c.clone(), c]).unwrap();
        let xx = both.lift_logical(&p("XX")).unwrap();
        let zi = both.lift_logical(&p("ZI")).unwrap();
        assert_eq!(t.expectation_pauli(&xx).unwrap(), 1.0);
        assert_eq!(t.expectation_pauli(&zi).unwrap(), 0.0);
    }

    #[test]
    fn prep_parsing() {
        assert_eq!(LogicalStatePrep::parse("ghz", 3).unwrap().k(), 3);
        assert_eq!(LogicalStatePrep::parse("+XX, +ZZ", 2).unwrap().k(), 2);
        assert!(LogicalStatePrep::parse("+XX,+ZI", 2).is_err());
    }
}
