//! Phase-tracked Pauli products, commutation, and GF(2) null spaces.
//!
//! ```text
//! cargo run --example pauli_algebra
//! ```

use lst_core::gf2;
use lst_core::pauli::{self, PauliOp, PauliSum};

fn main() {
    let a: PauliOp = "XYZI".parse().unwrap();
    let b: PauliOp = "ZZXX".parse().unwrap();
    println!("{a} * {b} = {}", a.multiply(&b).unwrap());
    println!("{b} * {a} = {}", b.multiply(&a).unwrap());
    println!("commute: {}, weights {} and {}", a.commutes(&b).unwrap(), a.weight(), b.weight());

    // Subsets of these strings that multiply to a multiple of the identity.
    let ops: Vec<PauliOp> = ["XX", "ZZ", "YY", "XI", "IX"].iter().map(|s| s.parse().unwrap()).collect();
    println!("rank {} of {}", gf2::pauli_rank(&ops), ops.len());
    for v in gf2::null_space(&ops).unwrap() {
        let chosen: Vec<PauliOp> = v.ones().map(|j| ops[j].clone()).collect();
        let names: Vec<String> = chosen.iter().map(|p| p.to_string()).collect();
        println!("  {} = {}", names.join(" * "), pauli::product(&chosen).unwrap());
    }

    let obs = PauliSum::parse("0.5*II, 0.5*ZZ").unwrap();
    println!("observable {obs} on {} qubits", obs.n_qubits());
}
