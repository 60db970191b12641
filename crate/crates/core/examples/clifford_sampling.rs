//! Uniform Clifford sampling and conjugation of Pauli strings.
//!
//! ```text
//! cargo run --example clifford_sampling -- 3
//! ```

use lst_core::clifford::CliffordElement;
use lst_core::pauli::{Pauli, PauliOp};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let n: usize = std::env::args().nth(1).map_or(3, |s| s.parse().expect("qubit count"));
    if let Ok(order) = CliffordElement::group_order(n) {
        println!("{order} Clifford elements on {n} qubits, up to global phase");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = CliffordElement::sample(n, &mut rng).unwrap();
    for j in 0..n {
        println!("X{j} -> {}   Z{j} -> {}", u.image_x(j), u.image_z(j));
    }
    let p = PauliOp::single(n, 0, Pauli::Y);
    let back = u.pullback(&p).unwrap();
    println!("pullback of {p} is {back}; inverse maps it back to {}", u.inverse().pullback(&back).unwrap());
}
