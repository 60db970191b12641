//! Record a shadow ensemble of a noisy encoded state and save it.
//!
//! Each shot is reproducible from the master seed and its index alone, so
//! any range of shots can be regenerated independently.
//!
//! ```text
//! cargo run --release --example sample_ensemble -- out.lst
//! ```

use lst_core::codes::{LogicalStatePrep, StabilizerCode};
use lst_core::noise::NoiseSpec;
use lst_core::shadow::{self, ShotSimulator};

fn main() {
    let out = std::env::args().nth(1);
    let code = StabilizerCode::steane();
    let sim = ShotSimulator::new(&[code], &LogicalStatePrep::plus(1), NoiseSpec::new(0.05, 42)).unwrap();
    let ens = sim.acquire(2000);
    let bytes = shadow::encode_ensemble(&ens);
    println!("{} snapshots, {} bytes, sha256 {}", ens.len(), bytes.len(), shadow::sha256_hex(&bytes));

    let s = &ens.snapshots[17];
    assert_eq!(s, &sim.shot(17));
    let sigma: Vec<String> = s.sectors[0].sigma_generators().iter().map(|g| g.to_string()).collect();
    println!("shot 17 measured the state stabilized by {}", sigma.join(", "));

    if let Some(path) = out {
        std::fs::write(&path, &bytes).unwrap();
        println!("wrote {path}");
    }
}
