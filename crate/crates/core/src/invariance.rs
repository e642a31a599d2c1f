//! Deciding which affine automorphisms commute with SC decoding, and the
//! equivalence classes they induce on the automorphism group.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automorphism::{apply_perm, automorphism_group, is_automorphism, perm_from_affine, Permutation};
use crate::error::{Error, Result};
use crate::gf2::{
    blta_order, block_structure, gro, is_member_blta, lt_normalize, mat_inv, mat_mul, sample_blta,
    AffineMap, BlockStructure, GroupOrder,
};
use crate::monomial::{is_decreasing, subcode_info, IndexConstraint, InfoSet, PolarCode};
use crate::sc::{DecoderFlavor, ScDecoder};

/// Which rule fired at one level of the decision recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Single block: the code must be Rate-0, Rep, SPC or Rate-1.
    Base,
    /// Last block of size one: both halves are checked.
    BothHalves,
    /// All frozen indices sit in the all-ones block.
    FrozenInFirstBlock,
    /// All information indices sit in the all-zeros block.
    InfoInLastBlock,
    Rejected,
    /// Length-one code.
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceNode {
    pub structure: BlockStructure,
    pub m: usize,
    pub info_z: Vec<u64>,
    pub branch: Branch,
    pub verdict: bool,
    pub children: Vec<TraceNode>,
}

impl TraceNode {
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(TraceNode::depth).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceVerdict {
    pub value: bool,
    pub trace: TraceNode,
}

/// `Ind_m(a_{m-t+1} = ... = a_m = v)`.
fn tail(m: usize, t: usize, v: bool) -> IndexConstraint {
    IndexConstraint::range(m - t + 1, m, v)
}

/// Decides whether every automorphism with structure exactly `s` commutes
/// with SC decoding of `C(I)`, recording the recursion.
pub fn dec_aut(s: &BlockStructure, info: &InfoSet) -> Result<InvarianceVerdict> {
    if s.m() != info.m() {
        return Err(Error::DimensionMismatch {
            expected: info.m(),
            actual: s.m(),
        });
    }
    let trace = dec_aut_traced(s, info)?;
    Ok(InvarianceVerdict {
        value: trace.verdict,
        trace,
    })
}

fn dec_aut_traced(s: &BlockStructure, info: &InfoSet) -> Result<TraceNode> {
    let m = info.m();
    let node = |branch, verdict, children| TraceNode {
        structure: s.clone(),
        m,
        info_z: info.z_labels(),
        branch,
        verdict,
        children,
    };
    let Some(last) = s.last() else {
        return Ok(node(Branch::Empty, true, Vec::new()));
    };
    let a1 = tail(m, last, true);
    let a2 = tail(m, last, false);
    if s.len() == 1 {
        let v = info.all_frozen_satisfy(&a1) || info.all_members_satisfy(&a2);
        return Ok(node(Branch::Base, v, Vec::new()));
    }
    let head = s.without_last();
    if last == 1 {
        let up = dec_aut_traced(&head, &subcode_info(info, &a1)?)?;
        let down = dec_aut_traced(&head, &subcode_info(info, &a2)?)?;
        let v = up.verdict && down.verdict;
        return Ok(node(Branch::BothHalves, v, vec![up, down]));
    }
    if info.all_frozen_satisfy(&a1) {
        let sub = dec_aut_traced(&head, &subcode_info(info, &a1)?)?;
        let v = sub.verdict;
        Ok(node(Branch::FrozenInFirstBlock, v, vec![sub]))
    } else if info.all_members_satisfy(&a2) {
        let sub = dec_aut_traced(&head, &subcode_info(info, &a2)?)?;
        let v = sub.verdict;
        Ok(node(Branch::InfoInLastBlock, v, vec![sub]))
    } else {
        Ok(node(Branch::Rejected, false, Vec::new()))
    }
}

/// Verdict only, memoized on `(structure, subcode)`.
pub fn dec_aut_value(s: &BlockStructure, info: &InfoSet) -> Result<bool> {
    if s.m() != info.m() {
        return Err(Error::DimensionMismatch {
            expected: info.m(),
            actual: s.m(),
        });
    }
    let mut memo = HashMap::new();
    dec_aut_memo(s, info, &mut memo)
}

fn dec_aut_memo(
    s: &BlockStructure,
    info: &InfoSet,
    memo: &mut HashMap<(BlockStructure, InfoSet), bool>,
) -> Result<bool> {
    let key = (s.clone(), info.clone());
    if let Some(&v) = memo.get(&key) {
        return Ok(v);
    }
    let m = info.m();
    let v = match s.last() {
        None => true,
        Some(last) => {
            let a1 = tail(m, last, true);
            let a2 = tail(m, last, false);
            let head = s.without_last();
            if s.len() == 1 {
                info.all_frozen_satisfy(&a1) || info.all_members_satisfy(&a2)
            } else if last == 1 {
                dec_aut_memo(&head, &subcode_info(info, &a1)?, memo)?
                    && dec_aut_memo(&head, &subcode_info(info, &a2)?, memo)?
            } else if info.all_frozen_satisfy(&a1) {
                dec_aut_memo(&head, &subcode_info(info, &a1)?, memo)?
            } else if info.all_members_satisfy(&a2) {
                dec_aut_memo(&head, &subcode_info(info, &a2)?, memo)?
            } else {
                false
            }
        }
    };
    memo.insert(key, v);
    Ok(v)
}

/// Whether the automorphism `a -> M a + b` commutes with SC for every `b`.
pub fn sc_invariant(matrix: &crate::gf2::Gf2Matrix, info: &InfoSet) -> Result<bool> {
    if matrix.dim() != info.m() {
        return Err(Error::DimensionMismatch {
            expected: info.m(),
            actual: matrix.dim(),
        });
    }
    if !is_automorphism(matrix, info) {
        return Err(Error::NotAutomorphism);
    }
    dec_aut_value(&block_structure(matrix)?, info)
}

/// The structure `s` with `BLTA(s)` equal to the group of SC-invariant
/// affine automorphisms.
pub fn dec_group(info: &InfoSet) -> Result<BlockStructure> {
    if !is_decreasing(info) {
        return Err(Error::NotDecreasing);
    }
    let mut memo = HashMap::new();
    dec_group_memo(info, &mut memo)
}

fn dec_group_memo(info: &InfoSet, memo: &mut HashMap<InfoSet, BlockStructure>) -> Result<BlockStructure> {
    if let Some(s) = memo.get(info) {
        return Ok(s.clone());
    }
    let m = info.m();
    let s = if m == 0 {
        BlockStructure::empty()
    } else {
        let mut found = None;
        for t in (2..=m).rev() {
            let a1 = tail(m, t, true);
            let a2 = tail(m, t, false);
            let sub = if info.all_frozen_satisfy(&a1) {
                Some(a1)
            } else if info.all_members_satisfy(&a2) {
                Some(a2)
            } else {
                None
            };
            if let Some(c) = sub {
                let head = dec_group_memo(&subcode_info(info, &c)?, memo)?;
                found = Some(head.with_appended(t)?);
                break;
            }
        }
        match found {
            Some(s) => s,
            None => {
                let up = dec_group_memo(&subcode_info(info, &tail(m, 1, true))?, memo)?;
                let down = dec_group_memo(&subcode_info(info, &tail(m, 1, false))?, memo)?;
                gro(&up.with_appended(1)?, &down.with_appended(1)?)?
            }
        }
    };
    memo.insert(info.clone(), s.clone());
    Ok(s)
}

/// Tuning for [`commute_oracle_with`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    /// Independent Gaussian probes.
    pub trials: usize,
    /// Typical magnitude of the small positive LLRs that silence one side of a
    /// split.
    pub epsilon: f64,
    /// Random fills per structured block.
    pub fills_per_block: usize,
    /// Fix sequences up to this depth are enumerated exhaustively.
    pub full_depth: usize,
    /// Extra random fix sequences beyond `full_depth`.
    pub deep_samples: usize,
    pub flavor: DecoderFlavor,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            trials: 1000,
            epsilon: 1e-3,
            fills_per_block: 6,
            full_depth: 4,
            deep_samples: 64,
            flavor: DecoderFlavor::default(),
        }
    }
}

impl OracleConfig {
    pub fn with_trials(trials: usize) -> Self {
        OracleConfig {
            trials,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum OracleVerdict {
    /// No disagreement on any probe. `skipped` probes hit opposing
    /// infinities inside the decoder and were not counted.
    Commutes { probes: usize, skipped: usize },
    CounterExample { probe: usize, y: Vec<f64> },
}

impl OracleVerdict {
    pub fn commutes(&self) -> bool {
        matches!(self, OracleVerdict::Commutes { .. })
    }
}

/// Coordinates fixed one after another, each the highest or lowest still free.
fn fix_sequence(m: usize, choices: &[(bool, bool)]) -> Vec<(usize, bool)> {
    let (mut lo, mut hi) = (1, m);
    choices
        .iter()
        .map(|&(high, v)| {
            let p = if high { hi } else { lo };
            if high {
                hi -= 1;
            } else {
                lo += 1;
            }
            (p, v)
        })
        .collect()
}

fn structured_blocks(m: usize, cfg: &OracleConfig, rng: &mut ChaCha8Rng) -> Vec<Vec<(usize, bool)>> {
    let mut out = Vec::new();
    let full = cfg.full_depth.min(m.saturating_sub(1));
    for d in 0..=full {
        for code in 0..1usize << (2 * d) {
            let choices: Vec<(bool, bool)> = (0..d).map(|k| (code >> (2 * k) & 1 == 1, code >> (2 * k + 1) & 1 == 1)).collect();
            out.push(fix_sequence(m, &choices));
        }
    }
    if m > full + 1 {
        for _ in 0..cfg.deep_samples {
            let d = rng.gen_range(full + 1..m);
            let choices: Vec<(bool, bool)> = (0..d).map(|_| (rng.gen(), rng.gen())).collect();
            out.push(fix_sequence(m, &choices));
        }
    }
    out
}

/// Probe that isolates the sub-block selected by `fixes`: positions outside it
/// are set to `+inf` or a small positive value by the first fix they violate.
/// The small values are jittered around `eps` because exactly repeated values
/// produce LLR ties, and tie-breaking is not permutation-equivariant.
fn structured_probe(m: usize, fixes: &[(usize, bool)], fill: usize, eps: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    const SCALES: [f64; 3] = [1.0, 0.25, 4.0];
    let scale = SCALES[fill % SCALES.len()];
    let sprinkle = fill % 2 == 1;
    let top = (1u32 << m) - 1;
    (0..=top)
        .map(|z| {
            let a = top - z;
            match fixes.iter().find(|&&(p, v)| (a >> (p - 1) & 1 == 1) != v) {
                Some(&(_, true)) => f64::INFINITY,
                Some(&(_, false)) => eps * rng.gen_range(0.5..1.5),
                None if sprinkle && rng.gen_bool(0.25) => {
                    if rng.gen() {
                        f64::INFINITY
                    } else {
                        f64::NEG_INFINITY
                    }
                }
                None => scale * rng.sample::<f64, _>(StandardNormal),
            }
        })
        .collect()
}

/// Whether `SC(P y) = P SC(y)`; `None` when the decoder rejects an input.
fn commutes_at(code: &PolarCode, perm: &Permutation, y: &[f64], dec: &mut ScDecoder) -> Option<bool> {
    let direct = dec.decode(code, y).ok()?;
    let py = apply_perm(perm, y).ok()?;
    let permuted = dec.decode(code, &py).ok()?;
    Some(apply_perm(perm, &direct.codeword).ok()? == permuted.codeword)
}

/// Empirical falsifier for `SC(pi(y)) = pi(SC(y))` with `pi = (M, b)`, using
/// default probe settings and `trials` Gaussian probes.
pub fn commute_oracle<R: Rng + ?Sized>(map: &AffineMap, info: &InfoSet, trials: usize, rng: &mut R) -> Result<OracleVerdict> {
    commute_oracle_with(map, info, &OracleConfig::with_trials(trials), rng)
}

pub fn commute_oracle_with<R: Rng + ?Sized>(
    map: &AffineMap,
    info: &InfoSet,
    cfg: &OracleConfig,
    rng: &mut R,
) -> Result<OracleVerdict> {
    let m = info.m();
    if map.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: map.dim(),
        });
    }
    let code = PolarCode::new_unchecked(info.clone());
    let perm = perm_from_affine(map)?;
    // M = L1^{-1} U L2^{-1}. The lower-triangular factors commute with SC, so a
    // probe y' built for U becomes a probe for (M, b) through the map
    // a -> L1 a + L1 b.
    let (l1, _, _) = lt_normalize(map.matrix())?;
    let pull = perm_from_affine(&AffineMap::new(l1, l1.apply(map.shift()))?)?;

    let base_seed: u64 = rng.gen();
    let mut block_rng = ChaCha8Rng::seed_from_u64(base_seed);
    let blocks = structured_blocks(m, cfg, &mut block_rng);
    let n_structured = blocks.len() * cfg.fills_per_block;
    let total = n_structured + cfg.trials;
    let n = code.n();

    let probe = |i: usize| -> Vec<f64> {
        let mut r = ChaCha8Rng::seed_from_u64(base_seed);
        r.set_stream(i as u64 + 1);
        if i < n_structured {
            let fixes = &blocks[i / cfg.fills_per_block];
            let y = structured_probe(m, fixes, i % cfg.fills_per_block, cfg.epsilon, &mut r);
            apply_perm(&pull, &y).expect("lengths agree")
        } else {
            (0..n).map(|_| r.sample::<f64, _>(StandardNormal)).collect()
        }
    };

    let skipped = AtomicUsize::new(0);
    let found = (0..total)
        .into_par_iter()
        .map_init(
            || ScDecoder::new(cfg.flavor),
            |dec, i| {
                let y = probe(i);
                match commutes_at(&code, &perm, &y, dec) {
                    Some(false) => Some((i, y)),
                    Some(true) => None,
                    None => {
                        skipped.fetch_add(1, Ordering::Relaxed);
                        None
                    }
                }
            },
        )
        .find_first(Option::is_some)
        .flatten();
    Ok(match found {
        Some((probe, y)) => OracleVerdict::CounterExample { probe, y },
        None => {
            let skipped = skipped.into_inner();
            OracleVerdict::Commutes {
                probes: total - skipped,
                skipped,
            }
        }
    })
}

/// `pi^{-1}(SC(pi(y)))`, the candidate one ensemble branch produces.
pub fn branch_output(code: &PolarCode, perm: &Permutation, y: &[f64], dec: &mut ScDecoder) -> Result<Vec<u8>> {
    let py = apply_perm(perm, y)?;
    let out = dec.decode(code, &py)?;
    apply_perm(&perm.inverse(), &out.codeword)
}

fn check_automorphism(t: &AffineMap, info: &InfoSet) -> Result<()> {
    if t.dim() != info.m() {
        return Err(Error::DimensionMismatch {
            expected: info.m(),
            actual: t.dim(),
        });
    }
    if !is_automorphism(t.matrix(), info) {
        return Err(Error::NotAutomorphism);
    }
    Ok(())
}

/// Equivalence under a known invariant structure: the linear part of
/// `t1^{-1} ∘ t2` lies in `BLTA(inv)`.
pub fn equivalent_under(t1: &AffineMap, t2: &AffineMap, inv: &BlockStructure) -> Result<bool> {
    let q = mat_mul(&mat_inv(t1.matrix())?, t2.matrix())?;
    Ok(is_member_blta(&q, inv))
}

/// Whether two automorphisms give identical permuted-SC outputs on every input.
pub fn equivalent(t1: &AffineMap, t2: &AffineMap, info: &InfoSet) -> Result<bool> {
    check_automorphism(t1, info)?;
    check_automorphism(t2, info)?;
    equivalent_under(t1, t2, &dec_group(info)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivClassSummary {
    pub aut_structure: BlockStructure,
    pub inv_structure: BlockStructure,
    /// Order of `BLTA(aut) / (BLTA(aut) ∩ BLTA(inv))`.
    pub class_count: GroupOrder,
}

impl EquivClassSummary {
    pub fn classes(&self) -> Option<u128> {
        self.class_count.to_u128()
    }
}

/// Number of equivalence classes of affine automorphisms.
pub fn count_classes(info: &InfoSet) -> Result<EquivClassSummary> {
    let inv = dec_group(info)?;
    count_classes_with(info, &inv)
}

/// Class count with an explicitly chosen invariant group, e.g. a smaller
/// known-invariant subgroup.
pub fn count_classes_with(info: &InfoSet, inv: &BlockStructure) -> Result<EquivClassSummary> {
    let aut = automorphism_group(info)?;
    if inv.m() != aut.m() {
        return Err(Error::DimensionMismatch {
            expected: aut.m(),
            actual: inv.m(),
        });
    }
    let common = gro(&aut, inv)?;
    let class_count = blta_order(&aut)
        .checked_div(&blta_order(&common))
        .expect("subgroup order divides group order");
    Ok(EquivClassSummary {
        aut_structure: aut,
        inv_structure: inv.clone(),
        class_count,
    })
}

fn attempt_budget(t: usize) -> usize {
    10_000 + 200 * t
}

/// `t` pairwise non-equivalent automorphisms, identity first.
pub fn sample_ensemble<R: Rng + ?Sized>(info: &InfoSet, t: usize, rng: &mut R) -> Result<Vec<AffineMap>> {
    let summary = count_classes(info)?;
    if let Some(c) = summary.classes() {
        if t as u128 > c {
            return Err(Error::EnsembleTooLarge {
                requested: t.to_string(),
                available: summary.class_count.value().to_string(),
            });
        }
    }
    let m = info.m();
    let inv = gro(&summary.aut_structure, &summary.inv_structure)?;
    let mut out: Vec<AffineMap> = Vec::with_capacity(t);
    if t == 0 {
        return Ok(out);
    }
    out.push(AffineMap::identity(m)?);
    // Inverses of accepted linear parts, kept to avoid recomputation.
    let mut inverses = vec![crate::gf2::Gf2Matrix::identity(m)?];
    let budget = attempt_budget(t);
    let mut attempts = 0;
    while out.len() < t {
        if attempts == budget {
            return Err(Error::SamplingExhausted(attempts));
        }
        attempts += 1;
        let cand = sample_blta(&summary.aut_structure, rng)?;
        let fresh = inverses
            .iter()
            .all(|inv_j| !is_member_blta(&(*inv_j * *cand.matrix()), &inv));
        if fresh {
            inverses.push(mat_inv(cand.matrix())?);
            out.push(cand);
        }
    }
    Ok(out)
}

/// `t` elements of the SC-invariant group, identity first.
pub fn sample_invariant<R: Rng + ?Sized>(info: &InfoSet, t: usize, rng: &mut R) -> Result<Vec<AffineMap>> {
    let inv = gro(&automorphism_group(info)?, &dec_group(info)?)?;
    sample_from(&inv, info.m(), t, rng)
}

/// `t` automorphisms drawn without any equivalence filter, identity first.
pub fn sample_unfiltered<R: Rng + ?Sized>(info: &InfoSet, t: usize, rng: &mut R) -> Result<Vec<AffineMap>> {
    sample_from(&automorphism_group(info)?, info.m(), t, rng)
}

fn sample_from<R: Rng + ?Sized>(s: &BlockStructure, m: usize, t: usize, rng: &mut R) -> Result<Vec<AffineMap>> {
    let mut out = Vec::with_capacity(t);
    if t > 0 {
        out.push(AffineMap::identity(m)?);
    }
    while out.len() < t {
        out.push(sample_blta(s, rng)?);
    }
    Ok(out)
}
