//! Randomized cross-checks of the stabilizer machinery against dense matrices.
//!
//! ```text
//! cargo run --release --example oracle_check
//! ```

use lst_core::experiments::{oracle_check, OracleCheckConfig};

fn main() {
    let cfg = OracleCheckConfig { shots: 10_000, ..OracleCheckConfig::default() };
    let mut failed = 0;
    for r in oracle_check(&cfg).unwrap() {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        failed += usize::from(!r.passed);
    }
    std::process::exit(i32::from(failed > 0));
}
