//! Stabilizer tableaux with mixed states: gates, projections onto Pauli
//! eigenspaces, and measurements.
//!
//! ```text
//! cargo run --example tableau_projection
//! ```

use lst_core::pauli::PauliOp;
use lst_core::tableau::{Gate, Tableau};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut bell = Tableau::init_zero(2);
    bell.apply_gates(&[Gate::H(0), Gate::CX(0, 1)]).unwrap();
    let stabs: Vec<String> = bell.stabilizers().iter().map(|s| s.to_string()).collect();
    println!("Bell state stabilizers: {}", stabs.join(", "));

    // Project the maximally mixed state onto the +1 eigenspace of XX then ZZ.
    // The returned value is the trace of the projected (unnormalized) state.
    let mut t = Tableau::maximally_mixed(2);
    println!("rank deficit before: {}", t.rank_deficit());
    let tr = t
        .project(&["XX".parse::<PauliOp>().unwrap(), "ZZ".parse().unwrap()])
        .unwrap();
    println!("Tr(P rho) = {tr}, rank deficit after: {}", t.rank_deficit());
    println!("<YY> = {}", t.expectation_pauli(&"YY".parse().unwrap()).unwrap());

    // Projecting onto an anticommuting eigenspace halves the trace.
    let tr = t.clone().project(&["XI".parse::<PauliOp>().unwrap()]).unwrap();
    println!("Tr(P_XI rho) = {tr}");

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..4 {
        let bits = bell.clone().measure_all_z(&mut rng);
        println!("Z outcomes {bits:?}");
    }
}
