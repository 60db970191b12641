//! Post-processing of shadow ensembles into code-projected, virtually
//! distilled expectation values.
//!
//! For one snapshot the Clifford-shadow inverse acts sector by sector,
//! `ρ̂ = ⊗_i [(2^n+1) σ̂_i − 𝟙]` with `σ̂_i = U_i†|b_i⟩⟨b_i|U_i`. A power-`m`
//! moment averages `Tr(Π ρ̂_1 ⋯ ρ̂_m Π O)` over disjoint `m`-tuples of
//! snapshots. Expanding the sector binomials leaves products of affine Pauli
//! factors, evaluated exactly by the trace engine; for `m = 1` each term is
//! instead a stabilizer projection on a tableau.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::{CodeError, StabilizerCode};
use crate::dense::{DenseMatrix, MAX_DENSE_QUBITS};
use crate::pauli::{PauliError, PauliOp, PauliSum};
use crate::shadow::{shot_rng, ShadowEnsemble, Snapshot};
use crate::tableau::Tableau;
use crate::trace::{
    affine_product_trace_complex, AffinePauliFactor, TraceError, DEFAULT_NULL_SPACE_CAP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("power {m} needs at least {needed} snapshots, have {have}")]
    InsufficientShots { m: usize, needed: usize, have: usize },
    #[error("tuple {tuple}: null space of dimension {dim} exceeds cap {cap}")]
    NullSpaceTooLarge { tuple: usize, dim: usize, cap: u64 },
    #[error("ensemble does not match the code: {0}")]
    Mismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("zero denominator mean")]
    ZeroDenominatorMean,
    #[error("no samples")]
    EmptyInput,
    #[error(transparent)]
    Trace(TraceError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// How per-snapshot traces are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentPath {
    /// Tableau projection for `m = 1`, trace engine otherwise.
    Auto,
    Tableau,
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// `c_1, …, c_m` of `f(x) = Σ_p c_p x^p`.
    pub coefficients: Vec<f64>,
    pub bootstrap: usize,
    pub bootstrap_seed: u64,
    pub null_space_cap: u64,
    pub path: MomentPath,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            coefficients: vec![1.0],
            bootstrap: 500,
            bootstrap_seed: 0,
            null_space_cap: DEFAULT_NULL_SPACE_CAP,
            path: MomentPath::Auto,
        }
    }
}

impl EstimatorConfig {
    /// `f(ρ) = ρ^m`.
    pub fn power(m: usize) -> Self {
        let mut coefficients = vec![0.0; m];
        coefficients[m - 1] = 1.0;
        EstimatorConfig {
            coefficients,
            ..Self::default()
        }
    }

    pub fn m_max(&self) -> usize {
        self.coefficients.len()
    }

    fn powers(&self) -> Vec<(usize, f64)> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, &c)| (i + 1, c))
            .collect()
    }

    fn validate(&self) -> Result<(), EstimatorError> {
        if self.powers().is_empty() {
            return Err(EstimatorError::Config("all coefficients are zero".into()));
        }
        Ok(())
    }
}

/// Affine factors of one sector's reconstruction: `weight · ∏ factors`, summed.
pub type WeightedFactors = (f64, Vec<AffinePauliFactor>);

/// The two terms `(2^n+1)·σ̂` and `−𝟙` of a sector shadow, with `σ̂` written as
/// `n` factors `(𝟙 + (−1)^{b_j} U†Z_jU)/2` on the `total`-qubit register.
pub fn reconstruction_factors(
    snapshot: &Snapshot,
    sector: usize,
    total: usize,
) -> [WeightedFactors; 2] {
    let n = snapshot.sectors[sector].clifford.n_qubits();
    let sigma = snapshot
        .sigma_generators_embedded(sector, total)
        .iter()
        .map(AffinePauliFactor::projector)
        .collect();
    [((n as f64).exp2() + 1.0, sigma), (-1.0, vec![])]
}

fn check_shape(ens: &ShadowEnsemble, code: &StabilizerCode) -> Result<(usize, usize), EstimatorError> {
    let m = &ens.metadata;
    if m.total_qubits() != code.n_physical() {
        return Err(EstimatorError::Mismatch(format!(
            "ensemble has {} x {} qubits, code has {}",
            m.sectors,
            m.sector_qubits,
            code.n_physical()
        )));
    }
    Ok((m.sector_qubits, m.sectors))
}

/// `(2^n + 1)^{|T|} (−1)^{k−|T|}` for a subset of size `t` out of `k` sectors.
fn subset_weight(n: usize, k: usize, t: usize) -> f64 {
    let w = ((n as f64).exp2() + 1.0).powi(t as i32);
    if (k - t) % 2 == 1 {
        -w
    } else {
        w
    }
}

/// `Tr(ρ̂ Π O_j)` for every observable in `ops`, through tableau projections.
pub fn snapshot_values_tableau(
    snapshot: &Snapshot,
    code: &StabilizerCode,
    ops: &[PauliOp],
) -> Vec<f64> {
    let k = snapshot.sectors.len();
    let n = snapshot.sectors[0].clifford.n_qubits();
    let total = n * k;
    let mut out = vec![0.0; ops.len()];
    for subset in 0u64..(1u64 << k) {
        let t = subset.count_ones() as usize;
        let mut stabs = Vec::with_capacity(total);
        let mut destabs = Vec::with_capacity(total);
        for s in (0..k).filter(|s| (subset >> s) & 1 == 1) {
            let rec = &snapshot.sectors[s];
            stabs.extend(snapshot.sigma_generators_embedded(s, total));
            destabs.extend((0..n).map(|j| rec.clifford.image_x(j).embed(total, s * n)));
        }
        for s in (0..k).filter(|s| (subset >> s) & 1 == 0) {
            for q in s * n..(s + 1) * n {
                stabs.push(PauliOp::single(total, q, crate::pauli::Pauli::Z));
                destabs.push(PauliOp::single(total, q, crate::pauli::Pauli::X));
            }
        }
        let mut tab = Tableau::from_rows_unchecked(&stabs, &destabs, n * (k - t));
        let tr = tab.project_unchecked(code.generators());
        if tr == 0.0 {
            continue;
        }
        let w = subset_weight(n, k, t) * ((n * (k - t)) as f64).exp2() * tr;
        for (o, op) in out.iter_mut().zip(ops) {
            *o += w * tab.expectation_unchecked(op);
        }
    }
    out
}

/// `Re Tr(ρ̂_1 ⋯ ρ̂_m Π O_j)` for every observable in `ops`, through the
/// affine-product trace engine.
pub fn tuple_values_trace(
    tuple: &[&Snapshot],
    code: &StabilizerCode,
    ops: &[PauliOp],
    cap: u64,
) -> Result<Vec<f64>, TraceError> {
    let k = tuple[0].sectors.len();
    let n = tuple[0].sectors[0].clifford.n_qubits();
    let total = n * k;
    let m = tuple.len();
    let per_shot: Vec<Vec<[WeightedFactors; 2]>> = tuple
        .iter()
        .map(|s| (0..k).map(|i| reconstruction_factors(s, i, total)).collect())
        .collect();
    let proj = code.projector_factors();
    let mut out = vec![0.0; ops.len()];
    let mk = m * k;
    for choice in 0u64..(1u64 << mk) {
        let mut weight = 1.0;
        let mut factors = Vec::new();
        for (s, sectors) in per_shot.iter().enumerate() {
            for (i, terms) in sectors.iter().enumerate() {
                let (w, f) = &terms[((choice >> (s * k + i)) & 1) as usize];
                weight *= w;
                factors.extend(f.iter().cloned());
            }
        }
        factors.extend(proj.iter().cloned());
        for (o, op) in out.iter_mut().zip(ops) {
            let mut fs = factors.clone();
            let mut sign = 1.0;
            if op.is_identity_string() {
                // ±𝟙 contributes only its sign.
                if op.phase() == 2 {
                    sign = -1.0;
                }
            } else {
                fs.push(AffinePauliFactor::bare(op.clone()));
            }
            let tr = affine_product_trace_complex(total, &fs, cap)?;
            *o += sign * weight * tr.re;
        }
    }
    Ok(out)
}

/// Per-tuple values and their mean for one power.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    pub values: Vec<f64>,
}

fn moment_values(
    ens: &ShadowEnsemble,
    code: &StabilizerCode,
    ops: &[PauliOp],
    m: usize,
    tuples: usize,
    path: MomentPath,
    cap: u64,
) -> Result<Vec<Vec<f64>>, EstimatorError> {
    let use_tableau = match path {
        MomentPath::Auto => m == 1,
        MomentPath::Tableau => {
            if m != 1 {
                return Err(EstimatorError::Config(
                    "the tableau path only evaluates m = 1".into(),
                ));
            }
            true
        }
        MomentPath::Trace => false,
    };
    (0..tuples)
        .into_par_iter()
        .map(|t| {
            let tuple: Vec<&Snapshot> = ens.snapshots[t * m..(t + 1) * m].iter().collect();
            if use_tableau {
                Ok(snapshot_values_tableau(tuple[0], code, ops))
            } else {
                tuple_values_trace(&tuple, code, ops, cap).map_err(|e| match e {
                    TraceError::NullSpaceTooLarge { dim, cap } => {
                        EstimatorError::NullSpaceTooLarge { tuple: t, dim, cap }
                    }
                    other => EstimatorError::Trace(other),
                })
            }
        })
        .collect()
}

/// Unbiased estimate of `Tr(Π ρ_ε^m Π O)` from consecutive disjoint `m`-tuples.
pub fn projected_moment(
    ens: &ShadowEnsemble,
    code: &StabilizerCode,
    observable: &PauliOp,
    m: usize,
    cfg: &EstimatorConfig,
) -> Result<MomentEstimate, EstimatorError> {
    check_shape(ens, code)?;
    if m == 0 {
        return Err(EstimatorError::Config("power must be at least 1".into()));
    }
    let tuples = ens.len() / m;
    if tuples == 0 {
        return Err(EstimatorError::InsufficientShots {
            m,
            needed: m,
            have: ens.len(),
        });
    }
    let vals = moment_values(
        ens,
        code,
        std::slice::from_ref(observable),
        m,
        tuples,
        cfg.path,
        cfg.null_space_cap,
    )?;
    let values: Vec<f64> = vals.into_iter().map(|v| v[0]).collect();
    Ok(MomentEstimate {
        mean: mean(&values),
        values,
    })
}

/// The `m = 1` moment evaluated only through tableau projections.
pub fn fast_projected_moment_m1(
    ens: &ShadowEnsemble,
    code: &StabilizerCode,
    observable: &PauliOp,
) -> Result<MomentEstimate, EstimatorError> {
    let cfg = EstimatorConfig {
        path: MomentPath::Tableau,
        ..EstimatorConfig::default()
    };
    projected_moment(ens, code, observable, 1, &cfg)
}

/// Diagnostics of one power `p` entering `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentDiagnostics {
    pub power: usize,
    pub coefficient: f64,
    pub tuples: usize,
    pub numerator_mean: f64,
    pub denominator_mean: f64,
    pub numerator_std_error: f64,
    pub denominator_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub observable: String,
    pub coefficients: Vec<f64>,
    pub m: usize,
    pub shots_used: usize,
    /// Independent blocks the statistics are computed from; a block holds
    /// `lcm` of the powers in use consecutive snapshots.
    pub blocks: usize,
    pub numerator_mean: f64,
    pub denominator_mean: f64,
    pub ratio: f64,
    pub bootstrap_std: f64,
    pub bootstrap_resamples: usize,
    pub numerator_std_error: f64,
    pub denominator_std_error: f64,
    /// First-order delta-method standard deviation of the ratio.
    pub ratio_std_approx: f64,
    pub degenerate_denominator: bool,
    pub per_moment: Vec<MomentDiagnostics>,
    #[serde(skip)]
    pub numerator_samples: Vec<f64>,
    #[serde(skip)]
    pub denominator_samples: Vec<f64>,
}

impl EstimateReport {
    /// Per-block samples as CSV with header `block,numerator,denominator`.
    pub fn write_samples_csv<W: std::io::Write>(&self, sink: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["block", "numerator", "denominator"])?;
        for (i, (a, b)) in self
            .numerator_samples
            .iter()
            .zip(&self.denominator_samples)
            .enumerate()
        {
            w.write_record([i.to_string(), a.to_string(), b.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Error-mitigated `Tr(Π f(ρ) Π O) / Tr(Π f(ρ) Π)` for a logical observable
/// given as a real combination of `k`-qubit logical Paulis.
pub fn lst_expectation(
    ens: &ShadowEnsemble,
    code: &StabilizerCode,
    logical: &PauliSum,
    cfg: &EstimatorConfig,
) -> Result<EstimateReport, EstimatorError> {
    check_shape(ens, code)?;
    cfg.validate()?;
    if logical.n_qubits() != code.k_logical() {
        return Err(EstimatorError::Mismatch(format!(
            "observable on {} logical qubits, code encodes {}",
            logical.n_qubits(),
            code.k_logical()
        )));
    }
    let mut ops: Vec<PauliOp> = Vec::with_capacity(logical.terms.len() + 1);
    ops.push(PauliOp::identity(code.n_physical()));
    for (_, op) in &logical.terms {
        ops.push(code.lift_logical(op)?);
    }
    let powers = cfg.powers();
    let block = powers.iter().fold(1, |l, &(p, _)| l / gcd(l, p) * p);
    let blocks = ens.len() / block;
    if blocks == 0 {
        return Err(EstimatorError::InsufficientShots {
            m: block,
            needed: block,
            have: ens.len(),
        });
    }
    let mut num_blocks = vec![0.0; blocks];
    let mut den_blocks = vec![0.0; blocks];
    let mut per_moment = Vec::new();
    for &(p, c) in &powers {
        let per_block = block / p;
        let tuples = blocks * per_block;
        let vals = moment_values(ens, code, &ops, p, tuples, cfg.path, cfg.null_space_cap)?;
        let num: Vec<f64> = vals
            .iter()
            .map(|v| {
                logical
                    .terms
                    .iter()
                    .zip(&v[1..])
                    .map(|((coef, _), x)| coef * x)
                    .sum()
            })
            .collect();
        let den: Vec<f64> = vals.iter().map(|v| v[0]).collect();
        for b in 0..blocks {
            let range = b * per_block..(b + 1) * per_block;
            num_blocks[b] += c * mean(&num[range.clone()]);
            den_blocks[b] += c * mean(&den[range]);
        }
        per_moment.push(MomentDiagnostics {
            power: p,
            coefficient: c,
            tuples,
            numerator_mean: mean(&num),
            denominator_mean: mean(&den),
            numerator_std_error: std_error(&num),
            denominator_std_error: std_error(&den),
        });
    }
    let mu_p = mean(&num_blocks);
    let mu_q = mean(&den_blocks);
    let boot = bootstrap_ratio(&num_blocks, &den_blocks, cfg.bootstrap, cfg.bootstrap_seed)?;
    let nb = blocks as f64;
    let (vp, vq, cov) = sample_moments(&num_blocks, &den_blocks);
    let ratio_std_approx = ratio_variance_approx(mu_p, mu_q, vp / nb, vq / nb, cov / nb)
        .map(|v| v.max(0.0).sqrt())
        .unwrap_or(f64::NAN);
    Ok(EstimateReport {
        observable: logical.to_string(),
        coefficients: cfg.coefficients.clone(),
        m: cfg.m_max(),
        shots_used: blocks * block,
        blocks,
        numerator_mean: mu_p,
        denominator_mean: mu_q,
        ratio: mu_p / mu_q,
        bootstrap_std: boot.ratio_std,
        bootstrap_resamples: cfg.bootstrap,
        numerator_std_error: std_error(&num_blocks),
        denominator_std_error: std_error(&den_blocks),
        ratio_std_approx,
        degenerate_denominator: mu_q.abs() < 5.0 * boot.denominator_std,
        per_moment,
        numerator_samples: num_blocks,
        denominator_samples: den_blocks,
    })
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// `(Var P, Var Q, Cov(P, Q))` with the unbiased `1/(n−1)` normalization.
pub fn sample_moments(p: &[f64], q: &[f64]) -> (f64, f64, f64) {
    let n = p.len();
    if n < 2 {
        return (0.0, 0.0, 0.0);
    }
    let (mp, mq) = (mean(p), mean(q));
    let (mut vp, mut vq, mut c) = (0.0, 0.0, 0.0);
    for (a, b) in p.iter().zip(q) {
        vp += (a - mp) * (a - mp);
        vq += (b - mq) * (b - mq);
        c += (a - mp) * (b - mq);
    }
    let d = (n - 1) as f64;
    (vp / d, vq / d, c / d)
}

/// Standard error of the mean.
pub fn std_error(v: &[f64]) -> f64 {
    let (var, _, _) = sample_moments(v, v);
    (var / v.len() as f64).sqrt()
}

/// Bootstrap spreads of the ratio of means and of each mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapSummary {
    pub ratio_std: f64,
    pub numerator_std: f64,
    pub denominator_std: f64,
}

/// Paired bootstrap over sample indices; resample `b` draws from its own
/// stream of a generator keyed by `seed`.
pub fn bootstrap_ratio(
    numer: &[f64],
    denom: &[f64],
    resamples: usize,
    seed: u64,
) -> Result<BootstrapSummary, EstimatorError> {
    let n = numer.len();
    if n == 0 || denom.len() != n {
        return Err(EstimatorError::EmptyInput);
    }
    if resamples < 2 {
        return Ok(BootstrapSummary {
            ratio_std: 0.0,
            numerator_std: 0.0,
            denominator_std: 0.0,
        });
    }
    let draws: Vec<(f64, f64)> = (0..resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = shot_rng(seed, b);
            let (mut sp, mut sq) = (0.0, 0.0);
            for _ in 0..n {
                let i = rng.gen_range(0..n);
                sp += numer[i];
                sq += denom[i];
            }
            (sp / n as f64, sq / n as f64)
        })
        .collect();
    let ps: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let qs: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let rs: Vec<f64> = draws.iter().map(|d| d.0 / d.1).collect();
    let sd = |v: &[f64]| sample_moments(v, v).0.sqrt();
    Ok(BootstrapSummary {
        ratio_std: sd(&rs),
        numerator_std: sd(&ps),
        denominator_std: sd(&qs),
    })
}

/// Bootstrap standard deviation of `mean(numer) / mean(denom)`.
pub fn bootstrap_std(
    numer: &[f64],
    denom: &[f64],
    resamples: usize,
    seed: u64,
) -> Result<f64, EstimatorError> {
    Ok(bootstrap_ratio(numer, denom, resamples, seed)?.ratio_std)
}

/// Delta-method variance of `P/Q`:
/// `(μ_P/μ_Q)² [Var P/μ_P² + Var Q/μ_Q² − 2 Cov(P,Q)/(μ_P μ_Q)]`.
pub fn ratio_variance_approx(
    mu_p: f64,
    mu_q: f64,
    var_p: f64,
    var_q: f64,
    cov_pq: f64,
) -> Result<f64, EstimatorError> {
    if mu_q == 0.0 {
        return Err(EstimatorError::ZeroDenominatorMean);
    }
    // Expanded so that μ_P = 0 is harmless.
    let r = mu_p / mu_q;
    Ok(var_p / (mu_q * mu_q) + r * r * var_q / (mu_q * mu_q) - 2.0 * r * cov_pq / (mu_q * mu_q))
}

/// `E_U Σ_b Tr(A Π_{U,b})² Π_{U,b}` with `A = (d+1)·P·O − Tr(P·O)·𝟙` and
/// `Π_{U,b} = U†|b⟩⟨b|U`, averaged over the whole `n`-qubit Clifford group.
pub fn empirical_variance_operator(
    n: usize,
    observable: &DenseMatrix<f64>,
    projector: &DenseMatrix<f64>,
) -> Result<DenseMatrix<f64>, EstimatorError> {
    if n > 2 {
        return Err(EstimatorError::Config(format!(
            "exhaustive Clifford averaging is limited to n <= 2, got {n}"
        )));
    }
    assert!(n <= MAX_DENSE_QUBITS);
    if observable.n_qubits() != n || projector.n_qubits() != n {
        return Err(EstimatorError::Config("operator size does not match n".into()));
    }
    let d = (1usize << n) as f64;
    let po = projector.matmul(observable);
    let tr = po.trace().re;
    let a = po.scale(d + 1.0).sub(&DenseMatrix::identity(n).scale(tr));
    let order = crate::clifford::CliffordElement::group_order(n)
        .map_err(|e| EstimatorError::Config(e.to_string()))?;
    let acc = (0..order)
        .into_par_iter()
        .map(|idx| {
            let u = crate::clifford::CliffordElement::from_index(n, idx).expect("index in range");
            let mut local = DenseMatrix::<f64>::zeros(n);
            for b in 0..1usize << n {
                let mut pi = DenseMatrix::<f64>::identity(n);
                for j in 0..n {
                    let g = u.image_z(j);
                    let g = if (b >> j) & 1 == 1 { g.negated() } else { g };
                    pi = pi.project_left(&g);
                }
                let t = a.matmul(&pi).trace().re;
                local = local.add(&pi.scale(t * t));
            }
            local
        })
        .reduce(|| DenseMatrix::zeros(n), |x, y| x.add(&y));
    Ok(acc.scale(1.0 / order as f64))
}
