//! Shadow acquisition under the tensor-product Clifford ensemble and
//! ensemble persistence.
//!
//! A shot prepares the encoded state, applies one depolarizing frame, draws an
//! independent uniform Clifford `U_i` per sector and measures every qubit of
//! the rotated state. Measuring `Z_j` after `U_i` is the same as measuring the
//! pulled-back observable `U_i† Z_j U_i` before it, which is what the
//! simulator does, so no gate sequence is ever needed.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::clifford::{CliffordElement, CliffordError, MAX_CLIFFORD_QUBITS};
use crate::codes::{prepare_logical_state, CodeError, LogicalStatePrep, StabilizerCode};
use crate::noise::{sample_pauli_frame, NoiseSpec};
use crate::pauli::PauliOp;
use crate::tableau::Tableau;

pub const FORMAT_MAGIC: &[u8; 8] = b"LSTSHDW\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ShadowError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error("sector codes must share one size; found {0} and {1} qubits")]
    UnequalSectors(usize, usize),
    #[error("sector size {0} exceeds {MAX_CLIFFORD_QUBITS}")]
    SectorTooLarge(usize),
    #[error("not an ensemble file (bad magic)")]
    BadMagic,
    #[error("unsupported ensemble format version {0}")]
    Version(u32),
    #[error("ensemble stream truncated")]
    Truncated,
    #[error("ensemble stream corrupt: {0}")]
    Corrupt(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Clifford and outcome bits of one sector; bit `j` of `bits` is `b_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorRecord {
    pub clifford: CliffordElement,
    pub bits: u64,
}

impl SectorRecord {
    pub fn bit(&self, j: usize) -> bool {
        (self.bits >> j) & 1 == 1
    }

    /// Generators `(−1)^{b_j} U† Z_j U` of the snapshot state `U†|b⟩⟨b|U`.
    pub fn sigma_generators(&self) -> Vec<PauliOp> {
        (0..self.clifford.n_qubits())
            .map(|j| {
                let g = self.clifford.image_z(j);
                if self.bit(j) {
                    g.negated()
                } else {
                    g
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub shot_index: u64,
    pub sectors: Vec<SectorRecord>,
}

impl Snapshot {
    /// Snapshot generators of `sector`, embedded in the `total`-qubit register.
    pub fn sigma_generators_embedded(&self, sector: usize, total: usize) -> Vec<PauliOp> {
        let rec = &self.sectors[sector];
        let n = rec.clifford.n_qubits();
        rec.sigma_generators()
            .into_iter()
            .map(|g| g.embed(total, sector * n))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMetadata {
    pub code_names: Vec<String>,
    pub sector_qubits: usize,
    pub sectors: usize,
    pub prep: String,
    pub noise: NoiseSpec,
    pub ensemble: String,
    pub master_seed: u64,
    pub created_by: String,
}

impl EnsembleMetadata {
    pub fn total_qubits(&self) -> usize {
        self.sector_qubits * self.sectors
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowEnsemble {
    pub metadata: EnsembleMetadata,
    pub snapshots: Vec<Snapshot>,
}

impl ShadowEnsemble {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}

/// Per-shot generator: shot `i` draws from stream `i` of a ChaCha8 generator
/// keyed by the master seed, independent of scheduling.
pub fn shot_rng(master_seed: u64, shot_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(shot_index);
    rng
}

/// Encoded state plus noise model, ready to produce snapshots.
#[derive(Debug, Clone)]
pub struct ShotSimulator {
    codes: Vec<StabilizerCode>,
    prep: LogicalStatePrep,
    noise: NoiseSpec,
    sector_qubits: usize,
    base: Tableau,
}

impl ShotSimulator {
    pub fn new(
        codes: &[StabilizerCode],
        prep: &LogicalStatePrep,
        noise: NoiseSpec,
    ) -> Result<Self, ShadowError> {
        let n = codes
            .first()
            .ok_or_else(|| CodeError::Malformed("no sector codes".into()))?
            .n_physical();
        if let Some(c) = codes.iter().find(|c| c.n_physical() != n) {
            return Err(ShadowError::UnequalSectors(n, c.n_physical()));
        }
        if n > MAX_CLIFFORD_QUBITS {
            return Err(ShadowError::SectorTooLarge(n));
        }
        let base = prepare_logical_state(codes, prep)?;
        Ok(ShotSimulator {
            codes: codes.to_vec(),
            prep: prep.clone(),
            noise,
            sector_qubits: n,
            base,
        })
    }

    pub fn sector_qubits(&self) -> usize {
        self.sector_qubits
    }

    pub fn sectors(&self) -> usize {
        self.codes.len()
    }

    pub fn total_qubits(&self) -> usize {
        self.sector_qubits * self.codes.len()
    }

    /// The noiseless encoded state.
    pub fn encoded_state(&self) -> &Tableau {
        &self.base
    }

    pub fn metadata(&self) -> EnsembleMetadata {
        EnsembleMetadata {
            code_names: self.codes.iter().map(|c| c.name().to_string()).collect(),
            sector_qubits: self.sector_qubits,
            sectors: self.codes.len(),
            prep: self.prep.name().to_string(),
            noise: self.noise,
            ensemble: "clifford-tensor".into(),
            master_seed: self.noise.seed,
            created_by: concat!("lst-core ", env!("CARGO_PKG_VERSION")).into(),
        }
    }

    /// Shot `index`: frame, then a Clifford and `n` outcomes per sector.
    pub fn shot(&self, index: u64) -> Snapshot {
        let mut rng = shot_rng(self.noise.seed, index);
        let total = self.total_qubits();
        let n = self.sector_qubits;
        let mut t = self.base.clone();
        let frame = sample_pauli_frame(&self.noise, total, &mut rng);
        if !frame.is_identity_string() {
            t.apply_pauli_frame(&frame).expect("frame sized to register");
        }
        let cliffords: Vec<CliffordElement> = (0..self.codes.len())
            .map(|_| CliffordElement::sample(n, &mut rng).expect("sector size checked"))
            .collect();
        let sectors = cliffords
            .into_iter()
            .enumerate()
            .map(|(s, clifford)| {
                let mut bits = 0u64;
                for j in 0..n {
                    let obs = clifford.image_z(j).embed(total, s * n);
                    if t.measure_pauli_unchecked(&obs, &mut rng) {
                        bits |= 1 << j;
                    }
                }
                SectorRecord { clifford, bits }
            })
            .collect();
        Snapshot {
            shot_index: index,
            sectors,
        }
    }

    /// Shots `start..start + count`, computed in parallel, in index order.
    pub fn shots(&self, start: u64, count: u64) -> Vec<Snapshot> {
        (start..start + count)
            .into_par_iter()
            .map(|i| self.shot(i))
            .collect()
    }

    pub fn acquire(&self, shots: u64) -> ShadowEnsemble {
        ShadowEnsemble {
            metadata: self.metadata(),
            snapshots: self.shots(0, shots),
        }
    }
}

/// Convenience wrapper around [`ShotSimulator`].
pub fn acquire_ensemble(
    codes: &[StabilizerCode],
    prep: &LogicalStatePrep,
    noise: NoiseSpec,
    shots: u64,
) -> Result<ShadowEnsemble, ShadowError> {
    Ok(ShotSimulator::new(codes, prep, noise)?.acquire(shots))
}

struct BitWriter {
    bytes: Vec<u8>,
    used: usize,
}

impl BitWriter {
    fn new() -> Self {
        BitWriter {
            bytes: Vec::new(),
            used: 0,
        }
    }

    fn push(&mut self, b: bool) {
        if self.used.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if b {
            *self.bytes.last_mut().unwrap() |= 1 << (self.used % 8);
        }
        self.used += 1;
    }

    fn push_word(&mut self, w: u64, n: usize) {
        for i in 0..n {
            self.push((w >> i) & 1 == 1);
        }
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl BitReader<'_> {
    fn pull(&mut self) -> bool {
        let b = (self.bytes[self.pos / 8] >> (self.pos % 8)) & 1 == 1;
        self.pos += 1;
        b
    }

    fn pull_word(&mut self, n: usize) -> u64 {
        (0..n).fold(0u64, |acc, i| acc | (self.pull() as u64) << i)
    }
}

fn sector_bytes(n: usize) -> usize {
    // 2n images of 2n bits, 2n sign bits, n outcome bits
    (4 * n * n + 2 * n + n).div_ceil(8)
}

fn encode_sector(rec: &SectorRecord, out: &mut Vec<u8>) {
    let n = rec.clifford.n_qubits();
    let mut w = BitWriter::new();
    for i in 0..2 * n {
        let (x, z, _) = rec.clifford.raw_image(i);
        w.push_word(x, n);
        w.push_word(z, n);
    }
    for i in 0..2 * n {
        w.push(rec.clifford.raw_image(i).2);
    }
    w.push_word(rec.bits, n);
    out.extend_from_slice(&w.bytes);
}

fn decode_sector(bytes: &[u8], n: usize) -> Result<SectorRecord, ShadowError> {
    let mut r = BitReader { bytes, pos: 0 };
    let mut raw = Vec::with_capacity(2 * n);
    for _ in 0..2 * n {
        let x = r.pull_word(n);
        let z = r.pull_word(n);
        raw.push((x, z));
    }
    let signs: Vec<bool> = (0..2 * n).map(|_| r.pull()).collect();
    let bits = r.pull_word(n);
    let op = |i: usize| {
        let (x, z) = raw[i];
        PauliOp::from_words(n, vec![x], vec![z], if signs[i] { 2 } else { 0 })
    };
    let ix: Vec<PauliOp> = (0..n).map(|j| op(2 * j)).collect();
    let iz: Vec<PauliOp> = (0..n).map(|j| op(2 * j + 1)).collect();
    let clifford = CliffordElement::from_images(&ix, &iz)
        .map_err(|e| ShadowError::Corrupt(format!("sector table: {e}")))?;
    Ok(SectorRecord { clifford, bits })
}

/// Binary ensemble encoding: header, metadata JSON, packed snapshots, and a
/// SHA-256 trailer over everything before it.
pub fn encode_ensemble(ens: &ShadowEnsemble) -> Vec<u8> {
    let m = &ens.metadata;
    let mut out = Vec::new();
    out.extend_from_slice(FORMAT_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(m.sector_qubits as u32).to_le_bytes());
    out.extend_from_slice(&(m.sectors as u32).to_le_bytes());
    out.extend_from_slice(&m.noise.p.to_le_bytes());
    out.extend_from_slice(&m.master_seed.to_le_bytes());
    out.extend_from_slice(&(ens.snapshots.len() as u64).to_le_bytes());
    let meta = serde_json::to_vec(m).expect("metadata serializes");
    out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta);
    for s in &ens.snapshots {
        out.extend_from_slice(&s.shot_index.to_le_bytes());
        for rec in &s.sectors {
            encode_sector(rec, &mut out);
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

pub fn write_ensemble<W: Write>(ens: &ShadowEnsemble, mut sink: W) -> Result<(), ShadowError> {
    sink.write_all(&encode_ensemble(ens))?;
    sink.flush()?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ShadowError> {
        let end = self.pos.checked_add(n).ok_or(ShadowError::Truncated)?;
        if end > self.bytes.len() {
            return Err(ShadowError::Truncated);
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, ShadowError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, ShadowError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, ShadowError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_ensemble(bytes: &[u8]) -> Result<ShadowEnsemble, ShadowError> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(8).map_err(|_| ShadowError::BadMagic)? != FORMAT_MAGIC {
        return Err(ShadowError::BadMagic);
    }
    let version = c.u32()?;
    if version != FORMAT_VERSION {
        return Err(ShadowError::Version(version));
    }
    let n = c.u32()? as usize;
    let sectors = c.u32()? as usize;
    let p = c.f64()?;
    let seed = c.u64()?;
    let count = c.u64()?;
    let meta_len = c.u32()? as usize;
    let metadata: EnsembleMetadata = serde_json::from_slice(c.take(meta_len)?)
        .map_err(|e| ShadowError::Corrupt(format!("metadata: {e}")))?;
    if metadata.sector_qubits != n
        || metadata.sectors != sectors
        || metadata.noise.p.to_bits() != p.to_bits()
        || metadata.master_seed != seed
    {
        return Err(ShadowError::Corrupt("header and metadata disagree".into()));
    }
    if n == 0 || n > MAX_CLIFFORD_QUBITS || sectors == 0 {
        return Err(ShadowError::Corrupt(format!("sector shape {sectors} x {n}")));
    }
    let per_shot = 8 + sectors * sector_bytes(n);
    let body = (count as usize)
        .checked_mul(per_shot)
        .ok_or_else(|| ShadowError::Corrupt("snapshot count overflows".into()))?;
    if c.pos + body + 32 > bytes.len() {
        return Err(ShadowError::Truncated);
    }
    if c.pos + body + 32 < bytes.len() {
        return Err(ShadowError::Corrupt("trailing bytes".into()));
    }
    let digest = Sha256::digest(&bytes[..c.pos + body]);
    if digest.as_slice() != &bytes[c.pos + body..] {
        return Err(ShadowError::Corrupt("checksum mismatch".into()));
    }
    let start = c.pos;
    let snapshots = (0..count as usize)
        .into_par_iter()
        .map(|i| {
            let mut c = Cursor {
                bytes,
                pos: start + i * per_shot,
            };
            let shot_index = c.u64()?;
            let sectors = (0..sectors)
                .map(|_| decode_sector(c.take(sector_bytes(n))?, n))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Snapshot {
                shot_index,
                sectors,
            })
        })
        .collect::<Result<Vec<_>, ShadowError>>()?;
    Ok(ShadowEnsemble {
        metadata,
        snapshots,
    })
}

pub fn read_ensemble<R: Read>(mut source: R) -> Result<ShadowEnsemble, ShadowError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    decode_ensemble(&bytes)
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
struct JsonSector {
    x_images: Vec<String>,
    z_images: Vec<String>,
    bits: String,
}

#[derive(Serialize)]
struct JsonSnapshot {
    shot: u64,
    sectors: Vec<JsonSector>,
}

/// Debug dump: the metadata object on the first line, then one object per snapshot.
pub fn write_ensemble_jsonl<W: Write>(ens: &ShadowEnsemble, mut sink: W) -> Result<(), ShadowError> {
    serde_json::to_writer(&mut sink, &ens.metadata).map_err(std::io::Error::from)?;
    writeln!(sink)?;
    for s in &ens.snapshots {
        let rec = JsonSnapshot {
            shot: s.shot_index,
            sectors: s
                .sectors
                .iter()
                .map(|r| {
                    let n = r.clifford.n_qubits();
                    JsonSector {
                        x_images: (0..n).map(|j| r.clifford.image_x(j).to_string()).collect(),
                        z_images: (0..n).map(|j| r.clifford.image_z(j).to_string()).collect(),
                        bits: (0..n).map(|j| if r.bit(j) { '1' } else { '0' }).collect(),
                    }
                })
                .collect(),
        };
        serde_json::to_writer(&mut sink, &rec).map_err(std::io::Error::from)?;
        writeln!(sink)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_qubit_sim(p: f64, seed: u64) -> ShotSimulator {
        ShotSimulator::new(
            &[StabilizerCode::five_qubit()],
            &LogicalStatePrep::zero(1),
            NoiseSpec::new(p, seed),
        )
        .unwrap()
    }

    #[test]
    fn noiseless_trivial_identity_draw_gives_zero() {
        // With U = 𝟙 the measured observable is Z itself.
        let t = Tableau::init_zero(1);
        let id = CliffordElement::identity(1);
        let mut tt = t.clone();
        let mut rng = shot_rng(0, 0);
        assert!(!tt.measure_pauli_unchecked(&id.image_z(0), &mut rng));
    }

    #[test]
    fn noiseless_snapshots_overlap_codespace_state() {
        let sim = five_qubit_sim(0.0, 4);
        for s in sim.shots(0, 200) {
            let mut t = sim.encoded_state().clone();
            let tr = t.project(&s.sectors[0].sigma_generators()).unwrap();
            assert!(tr > 0.0);
        }
    }

    #[test]
    fn binary_round_trip_is_byte_identical() {
        let ens = five_qubit_sim(0.1, 7).acquire(1000);
        let bytes = encode_ensemble(&ens);
        let back = decode_ensemble(&bytes).unwrap();
        assert_eq!(back, ens);
        assert_eq!(encode_ensemble(&back), bytes);
    }

    #[test]
    fn truncation_and_corruption_are_errors() {
        let ens = five_qubit_sim(0.1, 8).acquire(50);
        let bytes = encode_ensemble(&ens);
        for cut in [0, 5, 40, bytes.len() / 2, bytes.len() - 1] {
            assert!(decode_ensemble(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        let mut bad = bytes.clone();
        let mid = bad.len() - 100;
        bad[mid] ^= 1;
        assert!(matches!(decode_ensemble(&bad), Err(ShadowError::Corrupt(_))));
        let mut v = bytes.clone();
        v[8] = 9;
        assert!(matches!(decode_ensemble(&v), Err(ShadowError::Version(9))));
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = encode_ensemble(&five_qubit_sim(0.2, 3).acquire(300));
        let b = encode_ensemble(&five_qubit_sim(0.2, 3).acquire(300));
        let c = encode_ensemble(&five_qubit_sim(0.2, 4).acquire(300));
        assert_eq!(sha256_hex(&a), sha256_hex(&b));
        assert_ne!(sha256_hex(&a), sha256_hex(&c));
    }

    #[test]
    fn shots_are_independent_of_batching() {
        let sim = five_qubit_sim(0.3, 12);
        let all = sim.shots(0, 40);
        let tail = sim.shots(25, 15);
        assert_eq!(&all[25..], &tail[..]);
    }

    #[test]
    fn jsonl_has_one_line_per_snapshot() {
        let ens = five_qubit_sim(0.1, 1).acquire(5);
        let mut buf = Vec::new();
        write_ensemble_jsonl(&ens, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 6);
    }
}
