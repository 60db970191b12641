//! Sampling statistics against exact distributions.

use std::collections::HashMap;

use lst_core::clifford::CliffordElement;
use lst_core::codes::{LogicalStatePrep, StabilizerCode};
use lst_core::dense::{self, DenseMatrix};
use lst_core::estimator::{
    bootstrap_std, mean, projected_moment, ratio_variance_approx, EstimatorConfig,
};
use lst_core::experiments::{stream_m1_samples, zero_fidelity_observable};
use lst_core::noise::{sample_pauli_frame, NoiseSpec};
use lst_core::pauli::{Pauli, PauliOp, PauliSum};
use lst_core::shadow::{acquire_ensemble, ShotSimulator};
use lst_core::tableau::Tableau;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Upper-tail p-value of Pearson's statistic over `(observed, expected)` cells.
fn chi_square_p(cells: &[(f64, f64)]) -> f64 {
    let cells: Vec<_> = cells.iter().filter(|c| c.1 > 0.0).collect();
    let stat: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    ChiSquared::new((cells.len() - 1) as f64).unwrap().sf(stat)
}

fn clifford_uniformity(n: usize, draws: usize, seed: u64) -> f64 {
    let order = CliffordElement::group_order(n).unwrap() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: HashMap<Vec<u8>, usize> = HashMap::new();
    for _ in 0..draws {
        *counts
            .entry(CliffordElement::sample(n, &mut rng).unwrap().canonical_key())
            .or_default() += 1;
    }
    assert!(counts.len() <= order);
    let expected = draws as f64 / order as f64;
    let mut cells: Vec<(f64, f64)> = counts.values().map(|&c| (c as f64, expected)).collect();
    cells.resize(order, (0.0, expected));
    chi_square_p(&cells)
}

#[test]
fn single_qubit_cliffords_are_uniform() {
    let p = clifford_uniformity(1, 100_000, 1);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn two_qubit_cliffords_are_uniform() {
    let p = clifford_uniformity(2, 200_000, 2);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn z_measurements_follow_born_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..4 {
        let u = CliffordElement::sample(4, &mut rng).unwrap();
        let gens: Vec<PauliOp> = (0..4).map(|j| u.image_z(j)).collect();
        let mut t = Tableau::maximally_mixed(4);
        t.project(&gens).unwrap();
        let rho = dense::density_from_tableau::<f64>(&t).unwrap();
        let zs: Vec<PauliOp> = (0..4).map(|q| PauliOp::single(4, q, Pauli::Z)).collect();
        let probs = dense::born_probabilities(&rho, &zs);
        let shots = 10_000;
        let mut counts = [0usize; 16];
        for _ in 0..shots {
            let bits = t.clone().measure_all_z(&mut rng);
            let b = bits.iter().enumerate().fold(0, |a, (q, &x)| a | (x as usize) << q);
            counts[b] += 1;
        }
        let cells: Vec<(f64, f64)> = counts
            .iter()
            .zip(&probs)
            .map(|(&c, &p)| (c as f64, p * shots as f64))
            .collect();
        for (o, e) in &cells {
            if *e == 0.0 {
                assert_eq!(*o, 0.0);
            }
        }
        assert!(chi_square_p(&cells) > 0.01);
    }
}

/// Outcome statistics of full shots against the dense Born rule conditioned
/// on each shot's Clifford.
#[test]
fn shot_outcomes_follow_the_noisy_state() {
    let code = StabilizerCode::five_qubit();
    let prep = LogicalStatePrep::plus(1);
    let p = 0.1;
    let rho = dense::exact_noisy_state::<f64>(std::slice::from_ref(&code), &prep, p).unwrap();
    let ens = acquire_ensemble(std::slice::from_ref(&code), &prep, NoiseSpec::new(p, 4), 10_000)
        .unwrap();
    let mut observed = vec![0.0; 32];
    let mut expected = vec![0.0; 32];
    for s in &ens.snapshots {
        let rec = &s.sectors[0];
        let zs: Vec<PauliOp> = (0..5).map(|j| rec.clifford.image_z(j)).collect();
        for (b, pr) in dense::born_probabilities(&rho, &zs).iter().enumerate() {
            expected[b] += pr;
        }
        observed[rec.bits as usize] += 1.0;
    }
    let cells: Vec<(f64, f64)> = observed.into_iter().zip(expected).collect();
    let pv = chi_square_p(&cells);
    assert!(pv > 0.01, "p = {pv}");
}

#[test]
fn frame_weights_are_binomial() {
    let (n, p, draws) = (6, 0.3, 50_000);
    let spec = NoiseSpec::new(p, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut counts = vec![0.0; n + 1];
    for _ in 0..draws {
        counts[sample_pauli_frame(&spec, n, &mut rng).weight()] += 1.0;
    }
    let binom = |k: usize| {
        let c = (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
        c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
    };
    let cells: Vec<(f64, f64)> = (0..=n).map(|k| (counts[k], binom(k) * draws as f64)).collect();
    assert!(chi_square_p(&cells) > 0.01);
}

#[test]
fn averaged_frames_reproduce_the_channel() {
    let n = 3;
    let p = 0.4;
    let code = StabilizerCode::trivial(n);
    let prep = LogicalStatePrep::new("bell-ish", vec!["XXI".parse().unwrap(), "ZZI".parse().unwrap(), "IIY".parse().unwrap()])
        .unwrap();
    let pure = dense::encoded_state::<f64>(std::slice::from_ref(&code), &prep).unwrap();
    let exact = pure.depolarize(p);
    let spec = NoiseSpec::new(p, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let draws = 100_000;
    let dim = 1 << n;
    let mut sum = vec![0.0; dim * dim];
    let mut sq = vec![0.0; dim * dim];
    for _ in 0..draws {
        let f = sample_pauli_frame(&spec, n, &mut rng);
        let r = pure.conjugate_by_pauli(&f);
        for (i, v) in r.data().iter().enumerate() {
            // Every entry of a conjugated stabilizer density is real or imaginary;
            // track the real and imaginary parts together through their sum.
            let x = v.re + v.im;
            sum[i] += x;
            sq[i] += x * x;
        }
    }
    for (i, e) in exact.data().iter().enumerate() {
        let m = sum[i] / draws as f64;
        let var = (sq[i] / draws as f64 - m * m).max(0.0);
        let se = (var / draws as f64).sqrt();
        assert!((m - (e.re + e.im)).abs() <= 4.0 * se + 1e-12, "entry {i}: {m} vs {}", e.re + e.im);
    }
}

/// The averaged single-snapshot shadow equals the noisy state.
#[test]
fn snapshot_average_is_the_state() {
    let code = StabilizerCode::trivial(2);
    let prep = LogicalStatePrep::new("s", vec!["XY".parse().unwrap(), "ZZ".parse().unwrap()]).unwrap();
    let p = 0.2;
    let rho = dense::exact_noisy_state::<f64>(std::slice::from_ref(&code), &prep, p).unwrap();
    let shots = 100_000;
    let ens = acquire_ensemble(std::slice::from_ref(&code), &prep, NoiseSpec::new(p, 7), shots).unwrap();
    let mut sum = vec![(0.0, 0.0); 16];
    let mut sq = vec![(0.0, 0.0); 16];
    for s in &ens.snapshots {
        let sigma = DenseMatrix::<f64>::identity(2).sandwich(&s.sectors[0].sigma_generators());
        let shadow = sigma.scale(5.0).sub(&DenseMatrix::identity(2));
        for (i, v) in shadow.data().iter().enumerate() {
            sum[i].0 += v.re;
            sum[i].1 += v.im;
            sq[i].0 += v.re * v.re;
            sq[i].1 += v.im * v.im;
        }
    }
    let nn = shots as f64;
    for (i, e) in rho.data().iter().enumerate() {
        for (s, q, x) in [(sum[i].0, sq[i].0, e.re), (sum[i].1, sq[i].1, e.im)] {
            let m = s / nn;
            let se = ((q / nn - m * m).max(0.0) / nn).sqrt();
            assert!((m - x).abs() <= 3.0 * se + 1e-12, "entry {i}: {m} vs {x} (se {se})");
        }
    }
}

/// Projected moments against the dense oracle for n ≤ 2, k ≤ 2, m ≤ 2.
#[test]
fn projected_moments_are_unbiased() {
    let cases = [
        (StabilizerCode::trivial(1), 1usize),
        (StabilizerCode::zz_pair(), 1),
        (StabilizerCode::trivial(1), 2),
        (StabilizerCode::zz_pair(), 2),
    ];
    for (ci, (sector, k)) in cases.iter().enumerate() {
        let codes = vec![sector.clone(); *k];
        let full = StabilizerCode::tensor(&codes).unwrap();
        let kl = full.k_logical();
        let prep = if kl == 1 { LogicalStatePrep::plus(1) } else { LogicalStatePrep::ghz(kl) };
        let p = 0.15;
        let ens = acquire_ensemble(&codes, &prep, NoiseSpec::new(p, 100 + ci as u64), 100_000).unwrap();
        let rho = dense::exact_noisy_state::<f64>(&codes, &prep, p).unwrap();
        let logical = PauliOp::from_letters(&vec![Pauli::X; kl], 0);
        let lifted = full.lift_logical(&logical).unwrap();
        for m in [1usize, 2] {
            let cfg = EstimatorConfig { bootstrap: 0, ..EstimatorConfig::power(m) };
            for op in [PauliOp::identity(full.n_physical()), lifted.clone()] {
                let est = projected_moment(&ens, &full, &op, m, &cfg).unwrap();
                let (exact, _) = dense::exact_projected_moments(
                    &rho,
                    &full,
                    &PauliSum::single(op.clone()),
                    &cfg.coefficients,
                )
                .unwrap();
                let se = lst_core::estimator::std_error(&est.values);
                assert!(
                    (est.mean - exact).abs() <= 3.0 * se + 1e-12,
                    "case {ci} m={m} {op}: {} vs {exact} (se {se})",
                    est.mean
                );
            }
        }
    }
}

/// Bootstrap spread of a ratio of correlated Gaussian means against the
/// delta-method value with the true parameters.
#[test]
fn bootstrap_matches_delta_method() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (n, mu_p, mu_q, sp, sq, rho) = (400, 1.0, 2.0, 0.3, 0.4, 0.5);
    let gauss = |rng: &mut ChaCha8Rng| -> f64 {
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let (mut ps, mut qs) = (vec![], vec![]);
    for _ in 0..n {
        let (a, b) = (gauss(&mut rng), gauss(&mut rng));
        ps.push(mu_p + sp * a);
        qs.push(mu_q + sq * (rho * a + (1.0f64 - rho * rho).sqrt() * b));
    }
    let boot = bootstrap_std(&ps, &qs, 1000, 10).unwrap();
    let nf = n as f64;
    let analytic =
        ratio_variance_approx(mu_p, mu_q, sp * sp / nf, sq * sq / nf, rho * sp * sq / nf).unwrap().sqrt();
    assert!((boot / analytic - 1.0).abs() < 0.15, "{boot} vs {analytic}");
}

/// Single-shot variance of the numerator of ⟨X̄…X̄⟩ on GHZ states grows as 4^k.
#[test]
fn numerator_variance_grows_as_four_to_the_k() {
    let code = StabilizerCode::five_qubit();
    let mut logs = vec![];
    for k in 1..=4usize {
        let codes = vec![code.clone(); k];
        let full = StabilizerCode::tensor(&codes).unwrap();
        let sim = ShotSimulator::new(&codes, &LogicalStatePrep::ghz(k), NoiseSpec::new(0.0, k as u64)).unwrap();
        let obs = PauliSum::single(PauliOp::from_letters(&vec![Pauli::X; k], 0));
        let (num, _) = stream_m1_samples(&sim, &full, &obs, 20_000).unwrap();
        let m = mean(&num);
        let var = num.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (num.len() - 1) as f64;
        logs.push(var.ln());
    }
    let ks = [1.0, 2.0, 3.0, 4.0];
    let (slope, _) = lst_core::experiments::linear_fit(&ks, &logs);
    let ln4 = 4f64.ln();
    assert!((slope - ln4).abs() <= 0.2 * ln4, "slope {slope}");
}

/// At p = 0 the single-shot variance of the fidelity numerator is the global
/// Clifford shadow variance of a rank-one projector, which tends to 2 as the
/// sector grows instead of growing with it.
#[test]
fn numerator_variance_saturates_in_sector_size() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/codes");
    let codes = [
        StabilizerCode::five_qubit(),
        StabilizerCode::steane(),
        StabilizerCode::load_file(dir.join("random_11.code")).unwrap(),
    ];
    for (i, code) in codes.iter().enumerate() {
        let sim = ShotSimulator::new(std::slice::from_ref(code), &LogicalStatePrep::zero(1), NoiseSpec::new(0.0, 30 + i as u64))
            .unwrap();
        let (num, _) = stream_m1_samples(&sim, code, &zero_fidelity_observable(), 40_000).unwrap();
        // Variance per batch of 4000 shots, then its mean and standard error.
        let vars: Vec<f64> = num
            .chunks(4000)
            .map(|c| {
                let m = mean(c);
                c.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (c.len() - 1) as f64
            })
            .collect();
        let m = mean(&vars);
        let se = (vars.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vars.len() - 1) as f64 / vars.len() as f64).sqrt();
        let d = (1u64 << code.n_physical()) as f64;
        let a = 1.0 - 1.0 / d;
        let exact = (d + 1.0) / (d + 2.0) * (a + 2.0 * a * a) - a * a;
        assert!((m - exact).abs() <= 4.0 * se, "n = {}: {m} +- {se} vs {exact}", code.n_physical());
        assert!(m < 2.2);
    }
}
