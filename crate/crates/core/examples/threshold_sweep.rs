//! Logical infidelity of the five-qubit code against the bare-qubit curve.
//!
//! Prints the exact infidelities for f = ρ and f = ρ², the pseudo-threshold
//! where the f = ρ curve meets 2p/3, and the small-p scaling exponents.
//!
//! ```text
//! cargo run --release --example threshold_sweep
//! ```

use lst_core::codes::StabilizerCode;
use lst_core::experiments::{
    dense_zero_infidelity, log_grid, physical_infidelity, pseudo_threshold, suppression_exponents,
    threshold_sweep, ThresholdConfig,
};

fn main() {
    let code = StabilizerCode::five_qubit();
    println!("{:>8} {:>10} {:>12} {:>12}", "p", "bare", "f=rho", "f=rho^2");
    for p in log_grid(1e-3, 0.7, 10) {
        println!(
            "{p:>8.4} {:>10.3e} {:>12.3e} {:>12.3e}",
            physical_infidelity(p),
            dense_zero_infidelity(&code, p, 1).unwrap(),
            dense_zero_infidelity(&code, p, 2).unwrap()
        );
    }
    // Fully depolarizing noise (p = 3/4) is a second crossing, so bracket below it.
    let pt = pseudo_threshold(&code, 0.3, 0.7).unwrap().unwrap();
    println!("pseudo-threshold p = {pt:.5}");
    let grid = log_grid(1e-3, 1e-2, 6);
    for m in [1, 2] {
        let s = suppression_exponents(&code, m, &grid, 3, 0).unwrap();
        println!("m = {m}: infidelity ~ p^{:.3}", s[0]);
    }

    // A short sampled sweep; the CLI's threshold-sweep writes the same rows as CSV.
    let cfg = ThresholdConfig { p_grid: vec![0.05, 0.2], shots: 3000, seed: 0, bootstrap: 100 };
    for r in threshold_sweep(&code, &cfg).unwrap() {
        println!(
            "p = {}: sampled {:.4} +- {:.4} (exact {:.4}), m=2 {:.4} +- {:.4} (exact {:.4})",
            r.p, r.lst_m1, r.lst_m1_std, r.dense_m1, r.lst_m2, r.lst_m2_std, r.dense_m2
        );
    }
}
