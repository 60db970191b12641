//! Estimate logical expectation values of the code-projected, purified state.
//!
//! The m = 1 estimate targets `Tr(Π ρ Π O) / Tr(Π ρ)`; m = 2 replaces ρ with
//! ρ², suppressing errors further at the cost of variance.
//!
//! ```text
//! cargo run --release --example estimate
//! ```

use lst_core::codes::{LogicalStatePrep, StabilizerCode};
use lst_core::dense;
use lst_core::estimator::{lst_expectation, EstimatorConfig};
use lst_core::noise::NoiseSpec;
use lst_core::pauli::PauliSum;
use lst_core::shadow::acquire_ensemble;

fn main() {
    let code = StabilizerCode::five_qubit();
    let codes = [code.clone()];
    let prep = LogicalStatePrep::zero(1);
    let p = 0.1;
    let ens = acquire_ensemble(&codes, &prep, NoiseSpec::new(p, 1), 40_000).unwrap();
    let fidelity = PauliSum::parse("0.5*I, 0.5*Z").unwrap();
    let rho = dense::exact_noisy_state::<f64>(&codes, &prep, p).unwrap();
    let lifted = PauliSum::new(
        fidelity.terms.iter().map(|(c, op)| (*c, code.lift_logical(op).unwrap())).collect(),
    )
    .unwrap();

    println!("p = {p}, bare-qubit fidelity {:.4}", 1.0 - 2.0 * p / 3.0);
    for m in [1, 2] {
        let cfg = EstimatorConfig { bootstrap: 200, ..EstimatorConfig::power(m) };
        let r = lst_expectation(&ens, &code, &fidelity, &cfg).unwrap();
        let exact = dense::exact_lst_value(&rho, &code, &lifted, &cfg.coefficients).unwrap();
        println!(
            "m = {m}: {:.4} +- {:.4} from {} blocks (exact {exact:.4}){}",
            r.ratio,
            r.bootstrap_std,
            r.blocks,
            if r.degenerate_denominator { ", denominator near zero" } else { "" }
        );
    }
}
