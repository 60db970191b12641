//! Fidelity estimates of |0̄⟩ at fixed noise for codes of growing size.
//!
//! ```text
//! cargo run --release --example code_size -- data/codes/random_11.code data/codes/random_17.code
//! ```

use lst_core::codes::StabilizerCode;
use lst_core::experiments::{code_size_sweep, CodeSizeConfig};

fn main() {
    let mut codes = vec![StabilizerCode::five_qubit(), StabilizerCode::steane()];
    for path in std::env::args().skip(1) {
        codes.push(StabilizerCode::load_file(&path).unwrap());
    }
    let cfg = CodeSizeConfig { shot_budgets: vec![1000, 10_000], bootstrap: 200, ..CodeSizeConfig::default() };
    println!("p = {}", cfg.p);
    for r in code_size_sweep(&codes, &cfg).unwrap() {
        println!(
            "{:>12} n={:<3} shots={:<6} F = {:.4} +- {:.4}{}",
            r.code,
            r.n,
            r.shots,
            r.fidelity_estimate,
            r.bootstrap_std,
            if r.degenerate { " (degenerate)" } else { "" }
        );
    }
}
