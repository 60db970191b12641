//! Writes random `[[n,1]]` stabilizer codes with distance at least 3.
//!
//! A code is drawn as the image of `Z_1, …, Z_{n-1}` (stabilizers) and
//! `X_0, Z_0` (logicals) under a uniformly random Clifford; draws with a
//! logical operator of weight below 3 are rejected.
//!
//! ```text
//! cargo run --release --example generate_codes -- data/codes 11 17 25 40 60
//! ```

use lst_core::clifford::CliffordElement;
use lst_core::codes::StabilizerCode;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_code(n: usize, rng: &mut ChaCha8Rng) -> StabilizerCode {
    loop {
        let u = CliffordElement::sample(n, rng).unwrap();
        let gens: Vec<_> = (1..n).map(|j| u.image_z(j)).collect();
        let trial = StabilizerCode::new(
            format!("random-{n}"),
            None,
            gens.clone(),
            vec![u.image_x(0)],
            vec![u.image_z(0)],
        )
        .unwrap();
        if trial.distance_upto(2).is_some() {
            continue;
        }
        // Exact when a weight-3 logical exists; otherwise only a lower bound is known.
        let d = trial.distance_upto(3);
        return StabilizerCode::new(format!("random-{n}"), d, gens, vec![u.image_x(0)], vec![u.image_z(0)])
            .unwrap();
    }
}

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "data/codes".into());
    let sizes: Vec<usize> = args.map(|a| a.parse().expect("code size")).collect();
    let sizes = if sizes.is_empty() { vec![11, 17, 25, 40, 60] } else { sizes };
    std::fs::create_dir_all(&dir).unwrap();
    for n in sizes {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let code = random_code(n, &mut rng);
        let path = format!("{dir}/random_{n}.code");
        std::fs::write(&path, code.to_text()).unwrap();
        match code.distance() {
            Some(d) => println!("{path}: [[{n},1,{d}]]"),
            None => println!("{path}: [[{n},1,>=4]]"),
        }
    }
}
