//! Single-qubit depolarizing noise as stochastic Pauli frames.
//!
//! Each qubit independently suffers `X`, `Y` or `Z` with probability `p/3`
//! each, so the averaged channel is `(1−p)ρ + (p/3)(XρX + YρY + ZρZ)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::pauli::{Pauli, PauliOp};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Depolarizing rate per qubit.
    pub p: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(p: f64, seed: u64) -> Self {
        assert!((0.0..=1.0).contains(&p), "depolarizing rate {p} outside [0, 1]");
        NoiseSpec { p, seed }
    }
}

/// One frame on `n` qubits. For `p = 0` no randomness is drawn.
pub fn sample_pauli_frame<R: Rng + ?Sized>(spec: &NoiseSpec, n: usize, rng: &mut R) -> PauliOp {
    let mut frame = PauliOp::identity(n);
    if spec.p == 0.0 {
        return frame;
    }
    for q in 0..n {
        let u: f64 = rng.gen();
        if u < spec.p {
            let which = ((u / spec.p) * 3.0) as usize;
            frame.set(q, [Pauli::X, Pauli::Y, Pauli::Z][which.min(2)]);
        }
    }
    frame
}
