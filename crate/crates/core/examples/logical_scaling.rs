//! Statistical spread of ⟨X̄…X̄⟩ on logical GHZ states over k code blocks.
//!
//! The spread grows roughly as 2^k at a fixed number of shots.
//!
//! ```text
//! cargo run --release --example logical_scaling
//! ```

use lst_core::codes::StabilizerCode;
use lst_core::experiments::{linear_fit, logical_scaling_sweep, LogicalScalingConfig};

fn main() {
    let cfg = LogicalScalingConfig { shots: 10_000, bootstrap: 200, ..LogicalScalingConfig::default() };
    let rows = logical_scaling_sweep(&StabilizerCode::five_qubit(), &cfg).unwrap();
    for r in &rows {
        println!("k = {}: {:.4} +- {:.4}", r.k, r.mean, r.std);
    }
    let ks: Vec<f64> = rows.iter().map(|r| r.k as f64).collect();
    let ln_std: Vec<f64> = rows.iter().map(|r| r.std.ln()).collect();
    println!("d ln(std) / dk = {:.3} (ln 2 = {:.3})", linear_fit(&ks, &ln_std).0, 2f64.ln());
}
