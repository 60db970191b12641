//! Traces of ordered products of affine Pauli factors `a·𝟙 + b·M`.
//!
//! Expanding `∏_j (a_j 𝟙 + b_j M_j)` gives one term per subset `x` of factors.
//! Only subsets whose product is proportional to the identity contribute,
//! and those are exactly the binary null space of the matrix whose columns
//! encode the `M_j`. Each contributes `2^N · z(x) · ∏ a_j^{1−x_j} b_j^{x_j}`
//! where `z(x)` is the phase of the ordered product.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{null_space, BitVector};
use crate::pauli::{product_phase, PauliError, PauliOp};

/// Default bound on the number of enumerated null vectors.
pub const DEFAULT_NULL_SPACE_CAP: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("null space of dimension {dim} exceeds the enumeration cap {cap}")]
    NullSpaceTooLarge { dim: usize, cap: u64 },
    #[error("null vector with non-real phase i^{phase}")]
    ImaginaryPhase { phase: u8 },
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// The operator `a·𝟙 + b·op`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePauliFactor {
    pub a: f64,
    pub b: f64,
    pub op: PauliOp,
}

impl AffinePauliFactor {
    pub fn new(a: f64, b: f64, op: PauliOp) -> Self {
        AffinePauliFactor { a, b, op }
    }

    /// `(𝟙 + S)/2` for a signed Hermitian generator `S`; the sign moves into `b`.
    pub fn projector(s: &PauliOp) -> Self {
        assert!(s.is_hermitian(), "projector generator must be Hermitian");
        let b = if s.phase() == 0 { 0.5 } else { -0.5 };
        AffinePauliFactor::new(0.5, b, s.unsigned())
    }

    /// The bare operator `op` as a factor (`a = 0`, `b = 1`).
    pub fn bare(op: PauliOp) -> Self {
        AffinePauliFactor::new(0.0, 1.0, op)
    }
}

/// Complex trace value `re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexTrace {
    pub re: f64,
    pub im: f64,
}

/// `Tr ∏_j (a_j 𝟙 + b_j M_j)` on `n_qubits` qubits, insisting on a real result
/// term by term. An empty list gives `2^N`.
pub fn affine_product_trace(
    n_qubits: usize,
    factors: &[AffinePauliFactor],
    cap: u64,
) -> Result<f64, TraceError> {
    let t = trace_impl(n_qubits, factors, cap, true)?;
    Ok(t.re)
}

/// Same expansion as [`affine_product_trace`] but accumulates imaginary
/// contributions instead of rejecting them.
pub fn affine_product_trace_complex(
    n_qubits: usize,
    factors: &[AffinePauliFactor],
    cap: u64,
) -> Result<ComplexTrace, TraceError> {
    trace_impl(n_qubits, factors, cap, false)
}

fn trace_impl(
    n: usize,
    factors: &[AffinePauliFactor],
    cap: u64,
    real_only: bool,
) -> Result<ComplexTrace, TraceError> {
    let scale = (n as f64).exp2();
    if factors.is_empty() {
        return Ok(ComplexTrace { re: scale, im: 0.0 });
    }
    for f in factors {
        if f.op.n_qubits() != n {
            return Err(PauliError::SizeMismatch {
                left: n,
                right: f.op.n_qubits(),
            }
            .into());
        }
    }
    let ops: Vec<PauliOp> = factors.iter().map(|f| f.op.clone()).collect();
    let basis = null_space(&ops)?;
    let dim = basis.len();
    if dim >= 64 || (1u64 << dim) > cap {
        return Err(TraceError::NullSpaceTooLarge { dim, cap });
    }

    let l = factors.len();
    let mut x = BitVector::zeros(l);
    let mut acc = [0.0f64; 4];
    let mut walker = PhaseWalker::new(n);
    for step in 0u64..(1u64 << dim) {
        if step > 0 {
            // Gray code: flip the basis vector at the lowest set bit of `step`.
            x.xor_assign(&basis[step.trailing_zeros() as usize]);
        }
        let mut coeff = 1.0;
        for (j, f) in factors.iter().enumerate() {
            coeff *= if x.get(j) { f.b } else { f.a };
            if coeff == 0.0 {
                break;
            }
        }
        if coeff == 0.0 {
            continue;
        }
        let phase = walker.phase(x.ones().map(|j| &factors[j].op));
        if real_only && phase & 1 == 1 {
            return Err(TraceError::ImaginaryPhase { phase });
        }
        acc[phase as usize] += coeff;
    }
    Ok(ComplexTrace {
        re: scale * (acc[0] - acc[2]),
        im: scale * (acc[1] - acc[3]),
    })
}

/// Scratch space for multiplying out an ordered subset of operators.
struct PhaseWalker {
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PhaseWalker {
    fn new(n: usize) -> Self {
        let w = crate::pauli::words_for(n);
        PhaseWalker {
            x: vec![0; w],
            z: vec![0; w],
        }
    }

    /// Phase exponent of the ordered product, which must be `∝ 𝟙`.
    fn phase<'a>(&mut self, ops: impl Iterator<Item = &'a PauliOp>) -> u8 {
        self.x.fill(0);
        self.z.fill(0);
        let mut e: u32 = 0;
        for op in ops {
            e += product_phase(&self.x, &self.z, op.x_words(), op.z_words());
            e += op.phase() as u32;
            for (a, b) in self.x.iter_mut().zip(op.x_words()) {
                *a ^= b;
            }
            for (a, b) in self.z.iter_mut().zip(op.z_words()) {
                *a ^= b;
            }
        }
        debug_assert!(self.x.iter().chain(&self.z).all(|&w| w == 0));
        (e & 3) as u8
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOp {
        s.parse().unwrap()
    }

    const CAP: u64 = DEFAULT_NULL_SPACE_CAP;

    #[test]
    fn single_projector_has_unit_trace() {
        let f = [AffinePauliFactor::projector(&p("Z"))];
        assert_eq!(affine_product_trace(1, &f, CAP).unwrap(), 1.0);
    }

    #[test]
    fn orthogonal_projectors_vanish() {
        let f = [
            AffinePauliFactor::projector(&p("Z")),
            AffinePauliFactor::projector(&p("-Z")),
        ];
        assert_eq!(affine_product_trace(1, &f, CAP).unwrap(), 0.0);
    }

    #[test]
    fn overlapping_projectors() {
        let f = [
            AffinePauliFactor::projector(&p("Z")),
            AffinePauliFactor::projector(&p("X")),
        ];
        assert_eq!(affine_product_trace(1, &f, CAP).unwrap(), 0.5);
    }

    #[test]
    fn empty_product_is_dimension() {
        assert_eq!(affine_product_trace(3, &[], CAP).unwrap(), 8.0);
    }

    #[test]
    fn imaginary_terms_are_reported() {
        // Tr(|0><0| |+><+| Y) = i/2.
        let f = [
            AffinePauliFactor::projector(&p("Z")),
            AffinePauliFactor::projector(&p("X")),
            AffinePauliFactor::bare(p("Y")),
        ];
        assert!(matches!(
            affine_product_trace(1, &f, CAP),
            Err(TraceError::ImaginaryPhase { .. })
        ));
        let c = affine_product_trace_complex(1, &f, CAP).unwrap();
        assert!(c.re.abs() < 1e-15);
        assert!((c.im - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        let f: Vec<_> = (0..6).map(|_| AffinePauliFactor::projector(&p("Z"))).collect();
        assert!(matches!(
            affine_product_trace(1, &f, 8),
            Err(TraceError::NullSpaceTooLarge { dim: 5, cap: 8 })
        ));
        assert_eq!(affine_product_trace(1, &f, 32).unwrap(), 1.0);
    }

    #[test]
    fn five_qubit_code_projector_trace() {
        let f: Vec<_> = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]
            .iter()
            .map(|s| AffinePauliFactor::projector(&p(s)))
            .collect();
        assert_eq!(affine_product_trace(5, &f, CAP).unwrap(), 2.0);
    }
}
