//! The single-shot variance operator of the m = 1 numerator, averaged over
//! the full Clifford group, for a two-qubit code with stabilizer ZZ.
//!
//! The shadow variance on a state ρ is `Tr(V ρ) − Tr(P O ρ)²`.
//!
//! ```text
//! cargo run --release --example variance_operator
//! ```

use lst_core::dense::DenseMatrix;
use lst_core::estimator::empirical_variance_operator;
use lst_core::pauli::PauliSum;

fn main() {
    let projector = PauliSum::parse("0.5*II, 0.5*ZZ").unwrap();
    let p = projector
        .terms
        .iter()
        .fold(DenseMatrix::<f64>::zeros(2), |acc, (c, op)| acc.add(&DenseMatrix::from_pauli(op).scale(*c)));
    for obs in ["II", "XX", "ZI", "YX"] {
        let o = DenseMatrix::<f64>::from_pauli(&obs.parse().unwrap());
        let v = empirical_variance_operator(2, &o, &p).unwrap();
        let diag: Vec<String> = (0..4).map(|i| format!("{:.4}", v.get(i, i).re)).collect();
        println!("O = {obs}: diag(V) = [{}], Tr V = {:.4}", diag.join(", "), v.trace().re);
    }
}
