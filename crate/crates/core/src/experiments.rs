//! Sweeps behind the threshold, code-size and logical-scaling studies, and the
//! randomized oracle cross-check suite.
//!
//! Sweeps evaluate `f = ρ` by streaming: snapshots are generated in chunks and
//! reduced to per-shot numerator/denominator values right away, so a 60-qubit
//! run at `10^5` shots never holds the ensemble in memory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{prepare_logical_state, LogicalStatePrep, StabilizerCode};
use crate::dense::{self, DenseMatrix, DoubleDouble};
use crate::estimator::{
    self, bootstrap_ratio, lst_expectation, mean, EstimatorConfig, EstimatorError, MomentPath,
};
use crate::noise::NoiseSpec;
use crate::pauli::{Pauli, PauliOp, PauliSum};
use crate::shadow::{ShadowEnsemble, ShadowError, ShotSimulator};
use crate::tableau::Tableau;
use crate::trace::{affine_product_trace_complex, AffinePauliFactor, DEFAULT_NULL_SPACE_CAP};

/// Snapshots generated per streaming chunk.
pub const CHUNK: u64 = 4096;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Shadow(#[from] ShadowError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Code(#[from] crate::codes::CodeError),
    #[error(transparent)]
    Dense(#[from] crate::dense::DenseError),
    #[error("{0}")]
    Config(String),
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Default p-grid of the threshold sweep.
pub fn default_p_grid() -> Vec<f64> {
    log_grid(1e-3, 0.9, 20)
}

/// Seed of sweep point `i`, decorrelated from the master seed.
pub fn point_seed(seed: u64, i: u64) -> u64 {
    ChaCha8Rng::seed_from_u64(seed ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15)).gen()
}

/// Infidelity `2p/3` of a bare qubit in `|0⟩` under the same channel.
pub fn physical_infidelity(p: f64) -> f64 {
    2.0 * p / 3.0
}

/// `½(𝟙 + Z̄_1 ⋯ )` style fidelity observable of `|0̄…0̄⟩` for one logical qubit.
pub fn zero_fidelity_observable() -> PauliSum {
    PauliSum::new(vec![
        (0.5, PauliOp::identity(1)),
        (0.5, PauliOp::single(1, 0, Pauli::Z)),
    ])
    .expect("same size")
}

/// Per-shot `(numerator, denominator)` of the `m = 1` estimator for shots
/// `0..shots`, generated and reduced chunk by chunk.
pub fn stream_m1_samples(
    sim: &ShotSimulator,
    code: &StabilizerCode,
    logical: &PauliSum,
    shots: u64,
) -> Result<(Vec<f64>, Vec<f64>), ExperimentError> {
    let mut ops = vec![PauliOp::identity(code.n_physical())];
    for (_, op) in &logical.terms {
        ops.push(code.lift_logical(op)?);
    }
    let mut num = Vec::with_capacity(shots as usize);
    let mut den = Vec::with_capacity(shots as usize);
    let mut start = 0;
    while start < shots {
        let count = CHUNK.min(shots - start);
        let vals: Vec<Vec<f64>> = (start..start + count)
            .into_par_iter()
            .map(|i| estimator::snapshot_values_tableau(&sim.shot(i), code, &ops))
            .collect();
        for v in vals {
            den.push(v[0]);
            num.push(
                logical
                    .terms
                    .iter()
                    .zip(&v[1..])
                    .map(|((c, _), x)| c * x)
                    .sum(),
            );
        }
        start += count;
    }
    Ok((num, den))
}

/// Ratio and bootstrap spread of paired per-shot samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub ratio: f64,
    pub std: f64,
    pub degenerate: bool,
}

pub fn ratio_estimate(
    num: &[f64],
    den: &[f64],
    bootstrap: usize,
    seed: u64,
) -> Result<RatioEstimate, ExperimentError> {
    let b = bootstrap_ratio(num, den, bootstrap, seed)?;
    let q = mean(den);
    Ok(RatioEstimate {
        ratio: mean(num) / q,
        std: b.ratio_std,
        degenerate: q.abs() < 5.0 * b.denominator_std,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub p_grid: Vec<f64>,
    pub shots: u64,
    pub seed: u64,
    pub bootstrap: usize,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            p_grid: default_p_grid(),
            shots: 3000,
            seed: 0,
            bootstrap: 500,
        }
    }
}

/// One row of the threshold CSV. Dense columns are `NaN` above the dense cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub p: f64,
    pub physical_infidelity: f64,
    pub lst_m1: f64,
    pub lst_m1_std: f64,
    pub lst_m2: f64,
    pub lst_m2_std: f64,
    pub dense_m1: f64,
    pub dense_m2: f64,
    pub degenerate_m1: bool,
    pub degenerate_m2: bool,
}

/// Exact `|0̄⟩` LST infidelity for power `m`.
pub fn dense_zero_infidelity(code: &StabilizerCode, p: f64, m: usize) -> Result<f64, ExperimentError> {
    let prep = LogicalStatePrep::zero(code.k_logical());
    let t = prepare_logical_state(std::slice::from_ref(code), &prep)?;
    let psi = dense::state_vector_from_tableau::<DoubleDouble>(&t)?;
    let rho = DenseMatrix::outer(&psi).depolarize(p);
    let mut c = vec![0.0; m];
    c[m - 1] = 1.0;
    Ok(dense::exact_lst_infidelity(&rho, code, &psi, &c).hi())
}

/// Fidelity of `|0̄⟩` under `f = ρ` and `f = ρ²` on fresh ensembles per `p`.
pub fn threshold_sweep(
    code: &StabilizerCode,
    cfg: &ThresholdConfig,
) -> Result<Vec<ThresholdRow>, ExperimentError> {
    if code.k_logical() != 1 {
        return Err(ExperimentError::Config("threshold sweep needs a [[n,1]] code".into()));
    }
    if cfg.shots < 2 {
        return Err(ExperimentError::Config("need at least 2 shots".into()));
    }
    let prep = LogicalStatePrep::zero(1);
    let fid = zero_fidelity_observable();
    let dense_ok = code.n_physical() <= dense::MAX_DENSE_QUBITS;
    let mut rows = Vec::new();
    for (i, &p) in cfg.p_grid.iter().enumerate() {
        let seed = point_seed(cfg.seed, i as u64);
        let sim = ShotSimulator::new(std::slice::from_ref(code), &prep, NoiseSpec::new(p, seed))?;
        let ens = sim.acquire(cfg.shots);
        let est = |m: usize| -> Result<(f64, f64, bool), ExperimentError> {
            let ecfg = EstimatorConfig {
                bootstrap: cfg.bootstrap,
                bootstrap_seed: seed,
                ..EstimatorConfig::power(m)
            };
            let r = lst_expectation(&ens, code, &fid, &ecfg)?;
            Ok((1.0 - r.ratio, r.bootstrap_std, r.degenerate_denominator))
        };
        let (m1, s1, d1) = est(1)?;
        let (m2, s2, d2) = est(2)?;
        let (dm1, dm2) = if dense_ok {
            (dense_zero_infidelity(code, p, 1)?, dense_zero_infidelity(code, p, 2)?)
        } else {
            (f64::NAN, f64::NAN)
        };
        rows.push(ThresholdRow {
            p,
            physical_infidelity: physical_infidelity(p),
            lst_m1: m1,
            lst_m1_std: s1,
            lst_m2: m2,
            lst_m2_std: s2,
            dense_m1: dm1,
            dense_m2: dm2,
            degenerate_m1: d1,
            degenerate_m2: d2,
        });
    }
    Ok(rows)
}

/// Exact infidelity of an arbitrary code-space vector `psi` for power `m`.
pub fn dense_state_infidelity(
    code: &StabilizerCode,
    psi: &[dense::Cx<DoubleDouble>],
    p: f64,
    m: usize,
) -> f64 {
    let rho = DenseMatrix::outer(psi).depolarize(p);
    let mut c = vec![0.0; m];
    c[m - 1] = 1.0;
    dense::exact_lst_infidelity(&rho, code, psi, &c).hi()
}

/// Log-log slopes of the exact infidelity over `p_grid`, one per random
/// logical state.
pub fn suppression_exponents(
    code: &StabilizerCode,
    m: usize,
    p_grid: &[f64],
    states: usize,
    seed: u64,
) -> Result<Vec<f64>, ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = p_grid.iter().map(|p| p.ln()).collect();
    let mut out = Vec::with_capacity(states);
    for _ in 0..states {
        let psi = dense::random_logical_state::<DoubleDouble, _>(code, &mut rng)?;
        let y: Vec<f64> = p_grid
            .iter()
            .map(|&p| dense_state_infidelity(code, &psi, p, m).ln())
            .collect();
        out.push(linear_fit(&x, &y).0);
    }
    Ok(out)
}

/// Root of `g` in `[lo, hi]` by bisection; `g(lo)` and `g(hi)` must differ in sign.
pub fn bisect<F: FnMut(f64) -> f64>(mut g: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut glo = g(lo);
    if glo.signum() == g(hi).signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `p` in `[lo, hi]` where the dense `f = ρ` infidelity meets the bare-qubit curve.
pub fn pseudo_threshold(code: &StabilizerCode, lo: f64, hi: f64) -> Result<Option<f64>, ExperimentError> {
    // Check once so the closure can unwrap.
    dense_zero_infidelity(code, lo, 1)?;
    Ok(bisect(
        |p| dense_zero_infidelity(code, p, 1).expect("checked") - physical_infidelity(p),
        lo,
        hi,
        1e-6,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSizeConfig {
    pub p: f64,
    pub shot_budgets: Vec<u64>,
    pub seed: u64,
    pub bootstrap: usize,
}

impl Default for CodeSizeConfig {
    fn default() -> Self {
        CodeSizeConfig {
            p: 0.01,
            shot_budgets: vec![100, 1_000, 10_000, 100_000],
            seed: 0,
            bootstrap: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSizeRow {
    pub code: String,
    pub n: usize,
    pub shots: u64,
    pub fidelity_estimate: f64,
    pub bootstrap_std: f64,
    pub degenerate: bool,
}

/// `f = ρ` fidelity of `|0̄⟩` for each code; smaller budgets are prefixes of
/// the largest one.
pub fn code_size_sweep(
    codes: &[StabilizerCode],
    cfg: &CodeSizeConfig,
) -> Result<Vec<CodeSizeRow>, ExperimentError> {
    let max = *cfg
        .shot_budgets
        .iter()
        .max()
        .ok_or_else(|| ExperimentError::Config("no shot budgets".into()))?;
    if cfg.shot_budgets.iter().any(|&s| s < 2) {
        return Err(ExperimentError::Config("shot budgets must be at least 2".into()));
    }
    let fid = zero_fidelity_observable();
    let mut rows = Vec::new();
    for (i, code) in codes.iter().enumerate() {
        if code.k_logical() != 1 {
            return Err(ExperimentError::Config(format!("{} is not a [[n,1]] code", code.name())));
        }
        let seed = point_seed(cfg.seed, i as u64);
        let sim = ShotSimulator::new(
            std::slice::from_ref(code),
            &LogicalStatePrep::zero(1),
            NoiseSpec::new(cfg.p, seed),
        )?;
        let (num, den) = stream_m1_samples(&sim, code, &fid, max)?;
        for &s in &cfg.shot_budgets {
            let r = ratio_estimate(&num[..s as usize], &den[..s as usize], cfg.bootstrap, seed)?;
            rows.push(CodeSizeRow {
                code: code.name().to_string(),
                n: code.n_physical(),
                shots: s,
                fidelity_estimate: r.ratio,
                bootstrap_std: r.std,
                degenerate: r.degenerate,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalScalingConfig {
    pub ks: Vec<usize>,
    pub p: f64,
    pub shots: u64,
    pub seed: u64,
    pub bootstrap: usize,
}

impl Default for LogicalScalingConfig {
    fn default() -> Self {
        LogicalScalingConfig {
            ks: vec![1, 2, 3, 4],
            p: 0.01,
            shots: 20_000,
            seed: 0,
            bootstrap: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalScalingRow {
    pub k: usize,
    pub shots: u64,
    pub mean: f64,
    pub std: f64,
    pub degenerate: bool,
}

/// `⟨X̄⊗…⊗X̄⟩` on a `k`-sector GHZ state, `f = ρ`.
pub fn logical_scaling_sweep(
    sector: &StabilizerCode,
    cfg: &LogicalScalingConfig,
) -> Result<Vec<LogicalScalingRow>, ExperimentError> {
    if sector.k_logical() != 1 {
        return Err(ExperimentError::Config("sector code must encode one qubit".into()));
    }
    let mut rows = Vec::new();
    for (i, &k) in cfg.ks.iter().enumerate() {
        if k == 0 {
            return Err(ExperimentError::Config("k must be positive".into()));
        }
        let codes = vec![sector.clone(); k];
        let full = StabilizerCode::tensor(&codes)?;
        let seed = point_seed(cfg.seed, i as u64);
        let sim = ShotSimulator::new(&codes, &LogicalStatePrep::ghz(k), NoiseSpec::new(cfg.p, seed))?;
        let xs = PauliSum::single(PauliOp::from_letters(&vec![Pauli::X; k], 0));
        let (num, den) = stream_m1_samples(&sim, &full, &xs, cfg.shots)?;
        let r = ratio_estimate(&num, &den, cfg.bootstrap, seed)?;
        rows.push(LogicalScalingRow {
            k,
            shots: cfg.shots,
            mean: r.ratio,
            std: r.std,
            degenerate: r.degenerate,
        });
    }
    Ok(rows)
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope and its standard error from the fit residuals.
pub fn linear_fit_with_error(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (slope, icpt) = linear_fit(x, y);
    let mx = mean(x);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - icpt - slope * a).powi(2))
        .sum();
    let dof = x.len().saturating_sub(2).max(1) as f64;
    (slope, (rss / dof / sxx).sqrt())
}

/// Pauli product used by the oracle suite; swappable to plant a bug.
pub type MultiplyFn = fn(&PauliOp, &PauliOp) -> PauliOp;

pub fn reference_multiply(a: &PauliOp, b: &PauliOp) -> PauliOp {
    a.multiply(b).expect("equal sizes")
}

#[derive(Debug, Clone)]
pub struct OracleCheckConfig {
    pub seed: u64,
    pub trials: usize,
    pub shots: u64,
    pub multiply: MultiplyFn,
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        OracleCheckConfig {
            seed: 0,
            trials: 200,
            shots: 20_000,
            multiply: reference_multiply,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            detail,
        }
    }
}

pub fn random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliOp {
    let letters: Vec<Pauli> = (0..n)
        .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)])
        .collect();
    PauliOp::from_letters(&letters, rng.gen_range(0..4))
}

fn check_associativity(cfg: &OracleCheckConfig, rng: &mut ChaCha8Rng) -> CheckResult {
    let mul = cfg.multiply;
    let mut bad = 0;
    for _ in 0..cfg.trials {
        let n = rng.gen_range(1..=6);
        let (a, b, c) = (random_pauli(n, rng), random_pauli(n, rng), random_pauli(n, rng));
        if mul(&mul(&a, &b), &c) != mul(&a, &mul(&b, &c)) {
            bad += 1;
        }
    }
    CheckResult::new("multiply associativity", bad == 0, format!("{bad} violations"))
}

fn check_multiply_dense(cfg: &OracleCheckConfig, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials.min(100) {
        let n = rng.gen_range(1..=4);
        let (a, b) = (random_pauli(n, rng), random_pauli(n, rng));
        let lhs = DenseMatrix::<f64>::from_pauli(&(cfg.multiply)(&a, &b));
        let rhs = DenseMatrix::<f64>::from_pauli(&a).matmul(&DenseMatrix::from_pauli(&b));
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    CheckResult::new("multiply vs dense", worst < 1e-12, format!("max diff {worst:.2e}"))
}

fn check_commutation(cfg: &OracleCheckConfig, rng: &mut ChaCha8Rng) -> CheckResult {
    let mul = cfg.multiply;
    let mut bad = 0;
    for _ in 0..cfg.trials {
        let n = rng.gen_range(1..=6);
        let (a, b) = (random_pauli(n, rng), random_pauli(n, rng));
        let ab = mul(&a, &b);
        let ba = mul(&b, &a);
        let commute = ab == ba;
        if commute != a.commutes_unchecked(&b) {
            bad += 1;
        }
    }
    CheckResult::new("commutation vs products", bad == 0, format!("{bad} mismatches"))
}

fn random_factors<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<AffinePauliFactor> {
    let l = rng.gen_range(0..=8);
    (0..l)
        .map(|_| {
            let mut op = random_pauli(n, rng);
            op.set_phase(0);
            AffinePauliFactor::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), op)
        })
        .collect()
}

/// Dense `Tr ∏ (a𝟙 + bM)`.
pub fn dense_affine_trace(n: usize, factors: &[AffinePauliFactor]) -> (f64, f64) {
    let mut acc = DenseMatrix::<f64>::identity(n);
    for f in factors {
        let m = DenseMatrix::<f64>::identity(n)
            .scale(f.a)
            .add(&DenseMatrix::from_pauli(&f.op).scale(f.b));
        acc = acc.matmul(&m);
    }
    let t = acc.trace();
    (t.re, t.im)
}

fn check_trace(cfg: &OracleCheckConfig, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials {
        let n = rng.gen_range(1..=5);
        let f = random_factors(n, rng);
        let t = affine_product_trace_complex(n, &f, DEFAULT_NULL_SPACE_CAP).expect("small");
        let (re, im) = dense_affine_trace(n, &f);
        worst = worst.max((t.re - re).abs()).max((t.im - im).abs());
    }
    CheckResult::new("affine trace vs dense", worst < 1e-10, format!("max diff {worst:.2e}"))
}

fn random_commuting_gens<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Vec<PauliOp> {
    let u = crate::clifford::CliffordElement::sample(n, rng).expect("small");
    (0..count)
        .map(|j| {
            let g = u.image_z(j);
            if rng.gen() {
                g.negated()
            } else {
                g
            }
        })
        .collect()
}

fn check_projection(cfg: &OracleCheckConfig, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials.min(100) {
        let n = rng.gen_range(1..=5);
        let state = random_commuting_gens(n, rng.gen_range(0..=n), rng);
        let proj = random_commuting_gens(n, rng.gen_range(1..=n), rng);
        let mixed = DenseMatrix::<f64>::identity(n).scale(1.0 / (n as f64).exp2());
        let mut t = Tableau::maximally_mixed(n);
        let t0 = t.project(&state).expect("commuting");
        let rho = mixed.sandwich(&state);
        worst = worst.max((t0 - rho.trace().re).abs());
        let rho = rho.scale(1.0 / rho.trace().re);
        let t1 = t.project(&proj).expect("commuting");
        let projected = rho.sandwich(&proj);
        let d1 = projected.trace().re;
        worst = worst.max((t1 - d1).abs());
        if d1 > 1e-12 {
            let after = dense::density_from_tableau::<f64>(&t).expect("small");
            worst = worst.max(after.max_abs_diff(&projected.scale(1.0 / d1)));
        }
    }
    CheckResult::new("tableau projection vs dense", worst < 1e-10, format!("max diff {worst:.2e}"))
}

fn five_qubit_ensemble(p: f64, shots: u64, seed: u64) -> Result<ShadowEnsemble, ExperimentError> {
    let code = StabilizerCode::five_qubit();
    Ok(crate::shadow::acquire_ensemble(
        &[code],
        &LogicalStatePrep::zero(1),
        NoiseSpec::new(p, seed),
        shots,
    )?)
}

fn check_paths(rng: &mut ChaCha8Rng) -> Result<CheckResult, ExperimentError> {
    let code = StabilizerCode::five_qubit();
    let ens = five_qubit_ensemble(0.2, 100, rng.gen())?;
    let ops: Vec<PauliOp> = (0..6)
        .map(|i| match i {
            0 => PauliOp::identity(5),
            1 => code.logical_z()[0].clone(),
            2 => code.logical_x()[0].clone(),
            _ => code.generators()[i - 3].clone(),
        })
        .collect();
    let mut worst = 0.0f64;
    for s in &ens.snapshots {
        let a = estimator::snapshot_values_tableau(s, &code, &ops);
        let b = estimator::tuple_values_trace(&[s], &code, &ops, DEFAULT_NULL_SPACE_CAP)
            .map_err(EstimatorError::Trace)?;
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(CheckResult::new(
        "fast m=1 path vs trace path",
        worst < 1e-10,
        format!("max diff {worst:.2e} over 100 snapshots"),
    ))
}

fn check_noiseless(rng: &mut ChaCha8Rng) -> Result<CheckResult, ExperimentError> {
    let code = StabilizerCode::five_qubit();
    let ens = five_qubit_ensemble(0.0, 4000, rng.gen())?;
    let fid = zero_fidelity_observable();
    let cfg = EstimatorConfig {
        bootstrap: 300,
        bootstrap_seed: rng.gen(),
        path: MomentPath::Tableau,
        ..EstimatorConfig::default()
    };
    let r = lst_expectation(&ens, &code, &fid, &cfg)?;
    let z = (r.ratio - 1.0).abs() / r.bootstrap_std;
    Ok(CheckResult::new(
        "noiseless fast path fidelity",
        z <= 4.0,
        format!("ratio {:.5} ({z:.2} sigma from 1)", r.ratio),
    ))
}

fn check_estimates(cfg: &OracleCheckConfig, rng: &mut ChaCha8Rng) -> Result<Vec<CheckResult>, ExperimentError> {
    let mut out = Vec::new();
    let cases: [(&str, StabilizerCode, usize); 3] = [
        ("trivial n=1", StabilizerCode::trivial(1), 1),
        ("zz pair", StabilizerCode::zz_pair(), 1),
        ("two trivial sectors", StabilizerCode::trivial(1), 2),
    ];
    for (name, code, k) in cases {
        let codes = vec![code.clone(); k];
        let full = StabilizerCode::tensor(&codes)?;
        let prep = if k == 1 {
            LogicalStatePrep::plus(full.k_logical())
        } else {
            LogicalStatePrep::ghz(k)
        };
        let p = 0.15;
        let ens = crate::shadow::acquire_ensemble(&codes, &prep, NoiseSpec::new(p, rng.gen()), cfg.shots)?;
        let rho = dense::exact_noisy_state::<f64>(&codes, &prep, p)?;
        let kl = full.k_logical();
        let obs = PauliSum::single(PauliOp::from_letters(&vec![Pauli::X; kl], 0));
        let lifted = PauliSum::single(full.lift_logical(&obs.terms[0].1)?);
        for m in [1usize, 2] {
            let ecfg = EstimatorConfig {
                bootstrap: 300,
                bootstrap_seed: rng.gen(),
                ..EstimatorConfig::power(m)
            };
            let r = lst_expectation(&ens, &full, &obs, &ecfg)?;
            let exact = dense::exact_lst_value(&rho, &full, &lifted, &ecfg.coefficients)?;
            let z = (r.ratio - exact).abs() / r.bootstrap_std.max(1e-15);
            out.push(CheckResult::new(
                &format!("estimate vs dense ({name}, m={m})"),
                z <= 4.0,
                format!("estimate {:.5} exact {:.5} ({z:.2} sigma)", r.ratio, exact),
            ));
        }
    }
    Ok(out)
}

/// Randomized cross-checks of the stochastic and fast paths against dense
/// arithmetic at `N ≤ 6`. Estimate checks allow 4σ so that the full suite
/// passes at the default seed with margin.
pub fn oracle_check(cfg: &OracleCheckConfig) -> Result<Vec<CheckResult>, ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = vec![
        check_associativity(cfg, &mut rng),
        check_multiply_dense(cfg, &mut rng),
        check_commutation(cfg, &mut rng),
        check_trace(cfg, &mut rng),
        check_projection(cfg, &mut rng),
        check_paths(&mut rng)?,
        check_noiseless(&mut rng)?,
    ];
    out.extend(check_estimates(cfg, &mut rng)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_and_fits() {
        let g = default_p_grid();
        assert_eq!(g.len(), 20);
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[19] - 0.9).abs() < 1e-12);
        let x = [1.0, 2.0, 3.0];
        let (s, c) = linear_fit(&x, &[3.0, 5.0, 7.0]);
        assert!((s - 2.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12);
        assert_eq!(bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12).map(|r| (r * 1e9).round()), Some(1414213562.0));
    }

    #[test]
    fn noiseless_threshold_point() {
        let cfg = ThresholdConfig {
            p_grid: vec![0.0],
            shots: 200,
            bootstrap: 50,
            seed: 3,
        };
        let rows = threshold_sweep(&StabilizerCode::five_qubit(), &cfg).unwrap();
        assert!(rows[0].lst_m1.abs() < 4.0 * rows[0].lst_m1_std);
        assert!(rows[0].dense_m1.abs() < 1e-12 && rows[0].dense_m2.abs() < 1e-12);
        assert_eq!(rows[0].physical_infidelity, 0.0);
    }

    #[test]
    fn sign_bug_breaks_associativity() {
        fn buggy(a: &PauliOp, b: &PauliOp) -> PauliOp {
            let r = a.multiply(b).unwrap();
            if a.weight() % 2 == 1 {
                r.negated()
            } else {
                r
            }
        }
        let cfg = OracleCheckConfig {
            multiply: buggy,
            ..OracleCheckConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(!check_associativity(&cfg, &mut rng).passed);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(check_associativity(&OracleCheckConfig::default(), &mut rng).passed);
    }
}
