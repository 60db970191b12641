//! Stabilizer codes, lifted logical operators, and encoded logical states.
//!
//! ```text
//! cargo run --example codes_and_preparation -- [code name or file]
//! ```

use lst_core::codes::{prepare_logical_state, LogicalStatePrep, StabilizerCode};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "five-qubit".into());
    let code = StabilizerCode::resolve(&name).unwrap();
    println!("{}", code.to_text());
    println!("distance (searched up to 3): {:?}", code.distance_upto(3));

    let y = code.lift_logical(&"Y".parse().unwrap()).unwrap();
    println!("logical Y lifts to {y}");

    // Two blocks holding a logical Bell pair.
    let codes = vec![code.clone(), code];
    let full = StabilizerCode::tensor(&codes).unwrap();
    let t = prepare_logical_state(&codes, &LogicalStatePrep::ghz(2)).unwrap();
    for l in ["XX", "ZZ", "YY", "ZI"] {
        let op = full.lift_logical(&l.parse().unwrap()).unwrap();
        println!("<{l}> = {}", t.expectation_pauli(&op).unwrap());
    }
}
