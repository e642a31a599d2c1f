//! BPSK over AWGN, automorphism-ensemble SC decoding and Monte-Carlo BLER.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automorphism::{apply_perm_into, AffineAutomorphism};
use crate::error::{Error, Result};
use crate::gf2::{AffineMap, BlockStructure, GroupOrder};
use crate::invariance::{count_classes, sample_ensemble, sample_invariant, sample_unfiltered};
use crate::monomial::{encode, CodeSpec, PolarCode};
use crate::sc::{DecoderFlavor, LlrVector, ScDecoder};

pub const REPORT_SCHEMA: &str = "polar-automorph/sim-report/v1";
pub const THREADS_ENV: &str = "POLAR_AUTOMORPH_THREADS";

/// `1 / (2 R 10^{Eb/N0 / 10})`.
pub fn noise_variance(ebn0_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))
}

/// BPSK (`0 -> +1`, `1 -> -1`) plus Gaussian noise, returned as channel LLRs
/// `2 r / sigma^2`.
pub fn awgn_llr<R: Rng + ?Sized>(codeword: &[u8], ebn0_db: f64, rate: f64, rng: &mut R) -> Result<LlrVector> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::Config(format!("rate must lie in (0, 1], got {rate}")));
    }
    let var = noise_variance(ebn0_db, rate);
    let sigma = var.sqrt();
    let llr = codeword
        .iter()
        .map(|&c| {
            let x = if c & 1 == 0 { 1.0 } else { -1.0 };
            let noise: f64 = rng.sample(StandardNormal);
            2.0 * (x + sigma * noise) / var
        })
        .collect();
    LlrVector::new(llr)
}

/// `sum_i (1 - 2 x_i) y_i`; larger is closer to the observation.
pub fn correlation_metric(x: &[u8], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&b, &v)| if b & 1 == 0 { v } else { -v })
        .sum()
}

/// Every branch of one AE decode.
#[derive(Clone, Debug, PartialEq)]
pub struct AeOutcome {
    pub selected: usize,
    pub candidates: Vec<Vec<u8>>,
    pub metrics: Vec<f64>,
}

impl AeOutcome {
    pub fn codeword(&self) -> &[u8] {
        &self.candidates[self.selected]
    }

    pub fn branches_agree(&self) -> bool {
        self.candidates.iter().all(|c| *c == self.candidates[0])
    }
}

/// AE decoder with reusable buffers; one per worker thread.
#[derive(Clone, Debug)]
pub struct AeDecoder {
    dec: ScDecoder,
    permuted: Vec<f64>,
    cw: Vec<u8>,
    msg: Vec<u8>,
}

impl AeDecoder {
    pub fn new(flavor: DecoderFlavor) -> Self {
        AeDecoder {
            dec: ScDecoder::new(flavor),
            permuted: Vec::new(),
            cw: Vec::new(),
            msg: Vec::new(),
        }
    }

    pub fn decode(&mut self, code: &PolarCode, ensemble: &[AffineAutomorphism], y: &[f64]) -> Result<AeOutcome> {
        if ensemble.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let n = code.n();
        if y.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: y.len(),
            });
        }
        self.permuted.resize(n, 0.0);
        self.cw.resize(n, 0);
        self.msg.resize(n, 0);
        let mut candidates = Vec::with_capacity(ensemble.len());
        let mut metrics = Vec::with_capacity(ensemble.len());
        let mut selected = 0;
        for (j, pi) in ensemble.iter().enumerate() {
            if pi.m() != code.m() {
                return Err(Error::DimensionMismatch {
                    expected: code.m(),
                    actual: pi.m(),
                });
            }
            apply_perm_into(pi.perm(), y, &mut self.permuted);
            self.dec
                .decode_into(code.info_mask(), &self.permuted, &mut self.cw, &mut self.msg)?;
            let mut cand = vec![0u8; n];
            apply_perm_into(pi.inverse_perm(), &self.cw, &mut cand);
            let metric = correlation_metric(&cand, y);
            if metric > metrics.get(selected).copied().unwrap_or(f64::NEG_INFINITY) {
                selected = j;
            }
            metrics.push(metric);
            candidates.push(cand);
        }
        Ok(AeOutcome {
            selected,
            candidates,
            metrics,
        })
    }
}

/// Checks every map against the code, then runs [`AeDecoder`] once.
pub fn ae_decode_detailed(code: &PolarCode, ensemble: &[AffineMap], y: &[f64], flavor: DecoderFlavor) -> Result<AeOutcome> {
    let autos = ensemble
        .iter()
        .map(|t| AffineAutomorphism::new(*t, code))
        .collect::<Result<Vec<_>>>()?;
    AeDecoder::new(flavor).decode(code, &autos, y)
}

/// `argmax_j <1 - 2 x_j, y>` over `x_j = pi_j^{-1}(SC(pi_j(y)))`, ties to the
/// lowest index.
pub fn ae_decode(code: &PolarCode, ensemble: &[AffineMap], y: &[f64]) -> Result<Vec<u8>> {
    let out = ae_decode_detailed(code, ensemble, y, DecoderFlavor::default())?;
    Ok(out.codeword().to_vec())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleMode {
    /// Pairwise non-equivalent automorphisms.
    #[default]
    DistinctClasses,
    /// Elements of the SC-invariant group only.
    InvariantOnly,
    /// Automorphisms drawn uniformly with no equivalence filtering.
    StagePermutationsOff,
}

impl std::fmt::Display for EnsembleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EnsembleMode::DistinctClasses => "distinct_classes",
            EnsembleMode::InvariantOnly => "invariant_only",
            EnsembleMode::StagePermutationsOff => "stage_permutations_off",
        })
    }
}

impl std::str::FromStr for EnsembleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "distinct_classes" => Ok(EnsembleMode::DistinctClasses),
            "invariant_only" => Ok(EnsembleMode::InvariantOnly),
            "stage_permutations_off" => Ok(EnsembleMode::StagePermutationsOff),
            _ => Err(Error::Parse(format!("unknown ensemble mode {s:?}"))),
        }
    }
}

/// `t` automorphisms of `code` for the given mode, identity first.
pub fn build_ensemble<R: Rng + ?Sized>(code: &PolarCode, t: usize, mode: EnsembleMode, rng: &mut R) -> Result<Vec<AffineMap>> {
    match mode {
        EnsembleMode::DistinctClasses => sample_ensemble(code.info(), t, rng),
        EnsembleMode::InvariantOnly => sample_invariant(code.info(), t, rng),
        EnsembleMode::StagePermutationsOff => sample_unfiltered(code.info(), t, rng),
    }
}

fn default_max_errors() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub code: CodeSpec,
    pub t: usize,
    #[serde(default)]
    pub mode: EnsembleMode,
    pub ebn0_db: Vec<f64>,
    pub max_frames: usize,
    #[serde(default = "default_max_errors")]
    pub max_errors: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub flavor: DecoderFlavor,
    /// Worker cap; falls back to `POLAR_AUTOMORPH_THREADS`, then all cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t == 0 {
            return Err(Error::Config("t must be at least 1".into()));
        }
        if self.max_frames == 0 {
            return Err(Error::Config("max_frames must be at least 1".into()));
        }
        if self.max_errors == 0 {
            return Err(Error::Config("max_errors must be at least 1".into()));
        }
        if self.ebn0_db.is_empty() {
            return Err(Error::Config("SNR grid is empty".into()));
        }
        if self.ebn0_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("SNR grid contains a non-finite value".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}

/// 95% Wilson score interval for `errors` out of `frames`.
pub fn wilson_interval(errors: usize, frames: usize) -> (f64, f64) {
    if frames == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = frames as f64;
    let p = errors as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub ebn0_db: f64,
    pub frames: usize,
    pub errors: usize,
    pub bler: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Frames on which the ensemble branches did not all return the same
    /// candidate.
    pub branch_disagreements: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleInfo {
    pub aut_structure: BlockStructure,
    pub inv_structure: BlockStructure,
    pub class_count: GroupOrder,
    /// Ensemble maps in the matrix-plus-shift text format.
    pub maps: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub schema: String,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub mode: EnsembleMode,
    pub t: usize,
    pub flavor: DecoderFlavor,
    pub seed: u64,
    pub ensemble: EnsembleInfo,
    pub points: Vec<PointReport>,
    pub wall_clock_s: f64,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    ebn0_db: f64,
    frames: usize,
    errors: usize,
    bler: f64,
    ci_lo: f64,
    ci_hi: f64,
    mode: &'a str,
    t: usize,
}

impl SimReport {
    /// One row per SNR point: `ebn0_db,frames,errors,bler,ci_lo,ci_hi,mode,t`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mode = self.mode.to_string();
        for p in &self.points {
            w.serialize(CsvRow {
                ebn0_db: p.ebn0_db,
                frames: p.frames,
                errors: p.errors,
                bler: p.bler,
                ci_lo: p.ci_lo,
                ci_hi: p.ci_hi,
                mode: &mode,
                t: self.t,
            })
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Stream id for frame `frame` of SNR point `point`.
fn frame_stream(point: usize, frame: usize) -> u64 {
    ((point as u64) << 40) | frame as u64
}

const ENSEMBLE_STREAM: u64 = u64::MAX;
const CHUNK: usize = 512;

#[derive(Clone, Copy)]
struct FrameResult {
    error: bool,
    disagree: bool,
}

struct Frame<'a> {
    code: &'a PolarCode,
    ensemble: &'a [AffineAutomorphism],
    ebn0_db: f64,
    seed: u64,
    point: usize,
}

impl Frame<'_> {
    fn run(&self, index: usize, dec: &mut AeDecoder) -> Result<FrameResult> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(frame_stream(self.point, index));
        let msg: Vec<u8> = (0..self.code.k()).map(|_| rng.gen_range(0..2)).collect();
        let cw = encode(self.code, &msg)?;
        let y = awgn_llr(&cw, self.ebn0_db, self.code.rate(), &mut rng)?;
        let out = dec.decode(self.code, self.ensemble, y.as_slice())?;
        Ok(FrameResult {
            error: out.codeword() != cw.as_slice(),
            disagree: !out.branches_agree(),
        })
    }
}

fn resolve_threads(cfg: &SimConfig) -> Result<Option<usize>> {
    if let Some(t) = cfg.threads {
        return Ok(Some(t));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

/// Monte-Carlo block error rate over the SNR grid. The report depends only on
/// the configuration, never on the number of worker threads.
pub fn run_bler(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let start = Instant::now();
    let code = cfg.code.resolve()?;
    let mut ens_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    ens_rng.set_stream(ENSEMBLE_STREAM);
    let maps = build_ensemble(&code, cfg.t, cfg.mode, &mut ens_rng)?;
    let ensemble: Vec<AffineAutomorphism> = maps
        .iter()
        .map(|t| AffineAutomorphism::new(*t, &code))
        .collect::<Result<_>>()?;
    let summary = count_classes(code.info())?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = resolve_threads(cfg)? {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;

    let points = pool.install(|| {
        cfg.ebn0_db
            .iter()
            .enumerate()
            .map(|(point, &ebn0_db)| {
                let frame = Frame {
                    code: &code,
                    ensemble: &ensemble,
                    ebn0_db,
                    seed: cfg.seed,
                    point,
                };
                simulate_point(&frame, cfg)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    Ok(SimReport {
        schema: REPORT_SCHEMA.into(),
        n: code.n(),
        k: code.k(),
        mode: cfg.mode,
        t: cfg.t,
        flavor: cfg.flavor,
        seed: cfg.seed,
        ensemble: EnsembleInfo {
            aut_structure: summary.aut_structure,
            inv_structure: summary.inv_structure,
            class_count: summary.class_count,
            maps: maps.iter().map(|t| t.to_string()).collect(),
        },
        points,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

fn simulate_point(frame: &Frame<'_>, cfg: &SimConfig) -> Result<PointReport> {
    let (mut frames, mut errors, mut disagreements) = (0, 0, 0);
    'outer: while frames < cfg.max_frames {
        let end = (frames + CHUNK).min(cfg.max_frames);
        let results = (frames..end)
            .into_par_iter()
            .map_init(|| AeDecoder::new(cfg.flavor), |dec, i| frame.run(i, dec))
            .collect::<Result<Vec<_>>>()?;
        // Sequential scan so that early stopping lands on the same frame
        // whatever the scheduling.
        for r in results {
            frames += 1;
            errors += usize::from(r.error);
            disagreements += usize::from(r.disagree);
            if errors >= cfg.max_errors {
                break 'outer;
            }
        }
    }
    let (ci_lo, ci_hi) = wilson_interval(errors, frames);
    Ok(PointReport {
        ebn0_db: frame.ebn0_db,
        frames,
        errors,
        bler: errors as f64 / frames as f64,
        ci_lo,
        ci_hi,
        branch_disagreements: disagreements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sc::sc_decode;

    fn code64() -> PolarCode {
        PolarCode::from_i_min_z(6, &[24]).unwrap()
    }

    #[test]
    fn variance_formula() {
        assert!((noise_variance(0.0, 0.5) - 1.0).abs() < 1e-15);
        assert!((noise_variance(10.0, 1.0) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn llr_of_zero_codeword() {
        let mut a = ChaCha8Rng::seed_from_u64(1);
        let mut b = ChaCha8Rng::seed_from_u64(1);
        let y = awgn_llr(&[0; 8], 0.0, 0.5, &mut a).unwrap();
        for &v in y.as_slice() {
            let noise: f64 = b.sample(StandardNormal);
            assert!((v - 2.0 * (1.0 + noise)).abs() < 1e-12);
        }
        assert!(awgn_llr(&[0; 8], 0.0, 0.0, &mut a).is_err());
    }

    #[test]
    fn noiseless_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cw = [0, 1, 1, 0, 1, 0, 0, 0];
        let y = awgn_llr(&cw, 200.0, 0.5, &mut rng).unwrap();
        for (&c, &v) in cw.iter().zip(y.as_slice()) {
            assert_eq!(c == 1, v < 0.0);
        }
    }

    #[test]
    fn identity_ensemble_is_plain_sc() {
        let code = code64();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let id = [AffineMap::identity(6).unwrap()];
        for _ in 0..50 {
            let y: Vec<f64> = (0..64).map(|_| 1.0 + rng.sample::<f64, _>(StandardNormal)).collect();
            assert_eq!(ae_decode(&code, &id, &y).unwrap(), sc_decode(&code, &y).unwrap().codeword);
        }
        assert_eq!(ae_decode(&code, &[], &[0.0; 64]), Err(Error::EmptyEnsemble));
    }

    #[test]
    fn non_automorphism_rejected() {
        let code = code64();
        let mut cross = crate::gf2::Gf2Matrix::identity(6).unwrap();
        cross.set(3, 4, true);
        let bad = [AffineMap::linear(cross).unwrap()];
        assert_eq!(ae_decode(&code, &bad, &[1.0; 64]), Err(Error::NotAutomorphism));
    }

    #[test]
    fn selection_prefers_lowest_index_on_ties() {
        let code = code64();
        let maps = vec![AffineMap::identity(6).unwrap(); 3];
        let y = vec![1.5; 64];
        let out = ae_decode_detailed(&code, &maps, &y, DecoderFlavor::default()).unwrap();
        assert_eq!(out.selected, 0);
        assert!(out.branches_agree());
    }

    #[test]
    fn wilson_brackets_estimate() {
        // Reference from statsmodels' proportion_confint(method="wilson").
        let (lo, hi) = wilson_interval(10, 1000);
        assert!((lo - 0.005_440_754_445_529).abs() < 1e-12);
        assert!((hi - 0.018_309_468_870_315).abs() < 1e-12);
        let (lo, hi) = wilson_interval(0, 100);
        assert!(lo.abs() < 1e-15);
        assert!(hi > 0.0 && hi < 0.05);
    }

    #[test]
    fn config_validation_and_defaults() {
        let cfg = SimConfig::from_json(r#"{"code":{"m":6,"i_min_z":[24]},"t":2,"ebn0_db":[2.0],"max_frames":10}"#).unwrap();
        assert_eq!(cfg.max_errors, 100);
        assert_eq!(cfg.mode, EnsembleMode::DistinctClasses);
        assert_eq!(cfg.flavor, DecoderFlavor::Minsum);
        cfg.validate().unwrap();
        let mut bad = cfg.clone();
        bad.t = 0;
        assert!(bad.validate().is_err());
        bad = cfg.clone();
        bad.ebn0_db.clear();
        assert!(bad.validate().is_err());
        assert!(SimConfig::from_json(r#"{"code":{"m":6,"i_min_z":[24]},"t":2,"ebn0_db":[2.0],"max_frames":10,"oops":1}"#).is_err());
    }

    #[test]
    fn run_is_deterministic_and_thread_independent() {
        let mut cfg = SimConfig {
            code: CodeSpec {
                m: 6,
                i_min_z: Some(vec![24]),
                info_z: None,
                bec: None,
            },
            t: 4,
            mode: EnsembleMode::DistinctClasses,
            ebn0_db: vec![1.0, 3.0],
            max_frames: 1500,
            max_errors: 40,
            seed: 11,
            flavor: DecoderFlavor::Minsum,
            threads: Some(1),
        };
        let a = run_bler(&cfg).unwrap();
        cfg.threads = Some(3);
        let b = run_bler(&cfg).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.ensemble, b.ensemble);
        for p in &a.points {
            assert!(p.errors <= p.frames);
            assert!(p.ci_lo <= p.bler && p.bler <= p.ci_hi);
        }
        let csv = a.to_csv().unwrap();
        assert!(csv.starts_with("ebn0_db,frames,errors,bler,ci_lo,ci_hi,mode,t\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
