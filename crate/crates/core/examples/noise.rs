//! Independent single-qubit depolarizing noise as random Pauli frames.
//!
//! ```text
//! cargo run --example noise -- 0.1
//! ```

use lst_core::noise::{sample_pauli_frame, NoiseSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let p: f64 = std::env::args().nth(1).map_or(0.1, |s| s.parse().expect("rate"));
    let n = 7;
    let spec = NoiseSpec::new(p, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let draws = 100_000;
    let mut hist = vec![0usize; n + 1];
    for i in 0..draws {
        let f = sample_pauli_frame(&spec, n, &mut rng);
        if i < 5 {
            println!("frame {f}");
        }
        hist[f.weight()] += 1;
    }
    println!("weight  observed  binomial");
    for (w, c) in hist.iter().enumerate() {
        let choose = (0..w).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
        let expect = choose * p.powi(w as i32) * (1.0 - p).powi((n - w) as i32);
        println!("{w:>6}  {:>8.5}  {expect:>8.5}", *c as f64 / draws as f64);
    }
}
