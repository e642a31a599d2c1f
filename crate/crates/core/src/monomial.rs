//! Decreasing monomial codes.
//!
//! Code positions and rows of `G_m` are indexed by `z` in `0..2^m`; the
//! library works internally in "a-space", where `a` is the bit pattern of
//! `2^m - 1 - z` with `a_1` the least significant bit. Row `z` of `G_m` is the
//! evaluation vector of the monomial `x_1^{a_1} ... x_m^{a_m}`, and position
//! `z` holds the evaluation at `u = a(z)`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported code dimension (`n = 2^20`).
pub const MAX_CODE_DIM: usize = 20;

fn check_code_dim(m: usize) -> Result<()> {
    if m > MAX_CODE_DIM {
        return Err(Error::UnsupportedDimension(m));
    }
    Ok(())
}

pub fn z_to_a(z: u64, m: usize) -> Result<u32> {
    check_code_dim(m)?;
    let n = 1u64 << m;
    if z >= n {
        return Err(Error::IndexOutOfRange { index: z, m });
    }
    Ok((n - 1 - z) as u32)
}

pub fn a_to_z(a: u32, m: usize) -> Result<u64> {
    check_code_dim(m)?;
    let n = 1u64 << m;
    if u64::from(a) >= n {
        return Err(Error::IndexOutOfRange { index: a.into(), m });
    }
    Ok(n - 1 - u64::from(a))
}

/// `x_1^{g_1} ... x_m^{g_m}` with `g` packed as bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    m: usize,
    exps: u32,
}

impl Monomial {
    pub fn new(m: usize, exps: u32) -> Result<Self> {
        check_code_dim(m)?;
        if u64::from(exps) >= 1u64 << m {
            return Err(Error::IndexOutOfRange { index: exps.into(), m });
        }
        Ok(Monomial { m, exps })
    }

    /// Monomial from 1-based variable indices.
    pub fn from_vars(m: usize, vars: &[usize]) -> Result<Self> {
        let mut exps = 0u32;
        for &v in vars {
            if v == 0 || v > m {
                return Err(Error::IndexOutOfRange { index: v as u64, m });
            }
            exps |= 1 << (v - 1);
        }
        Self::new(m, exps)
    }

    pub fn from_z(z: u64, m: usize) -> Result<Self> {
        Self::new(m, z_to_a(z, m)?)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn exps(&self) -> u32 {
        self.exps
    }

    pub fn degree(&self) -> u32 {
        self.exps.count_ones()
    }

    pub fn z(&self) -> u64 {
        a_to_z(self.exps, self.m).expect("constructed in range")
    }

    /// Ascending 1-based variable indices.
    pub fn vars(&self) -> Vec<usize> {
        (0..self.m).filter(|&i| self.exps >> i & 1 == 1).map(|i| i + 1).collect()
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps == 0 {
            return f.write_str("1");
        }
        for v in self.vars() {
            write!(f, "x{v}")?;
        }
        Ok(())
    }
}

/// `f ≼ g` on monomials packed as exponent bitmasks.
pub fn precedes_bits(f: u32, g: u32) -> bool {
    let t = f.count_ones();
    let r = g.count_ones();
    if t > r {
        return false;
    }
    // Match f's indices against g's largest t indices, both ascending.
    let mut g_top = g;
    for _ in 0..r - t {
        g_top &= g_top - 1;
    }
    let (mut fi, mut gi) = (f, g_top);
    while fi != 0 {
        if fi.trailing_zeros() > gi.trailing_zeros() {
            return false;
        }
        fi &= fi - 1;
        gi &= gi - 1;
    }
    true
}

pub fn precedes(f: &Monomial, g: &Monomial) -> bool {
    f.m == g.m && precedes_bits(f.exps, g.exps)
}

/// Set of a-vectors in `F_2^m`; the frozen set is its complement.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct InfoSet {
    m: usize,
    words: Vec<u64>,
}

impl InfoSet {
    pub fn empty(m: usize) -> Result<Self> {
        check_code_dim(m)?;
        let n = 1usize << m;
        Ok(InfoSet {
            m,
            words: vec![0; n.div_ceil(64)],
        })
    }

    pub fn full(m: usize) -> Result<Self> {
        let mut out = Self::empty(m)?;
        for a in 0..out.n() as u32 {
            out.insert_a(a);
        }
        Ok(out)
    }

    pub fn from_a(m: usize, members: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut out = Self::empty(m)?;
        for a in members {
            if a as usize >= out.n() {
                return Err(Error::IndexOutOfRange { index: a.into(), m });
            }
            out.insert_a(a);
        }
        Ok(out)
    }

    pub fn from_z(m: usize, members: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut out = Self::empty(m)?;
        for z in members {
            out.insert_a(z_to_a(z, m)?);
        }
        Ok(out)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        1 << self.m
    }

    #[inline]
    pub fn contains_a(&self, a: u32) -> bool {
        let a = a as usize;
        self.words[a / 64] >> (a % 64) & 1 == 1
    }

    pub fn contains_z(&self, z: u64) -> bool {
        z < self.n() as u64 && self.contains_a((self.n() as u64 - 1 - z) as u32)
    }

    fn insert_a(&mut self, a: u32) {
        let a = a as usize;
        self.words[a / 64] |= 1 << (a % 64);
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.n()
    }

    /// Members in increasing a-order.
    pub fn iter_a(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.n() as u32).filter(move |&a| self.contains_a(a))
    }

    /// Members as z-labels in increasing order.
    pub fn z_labels(&self) -> Vec<u64> {
        let n = self.n() as u64;
        let mut out: Vec<u64> = self.iter_a().map(|a| n - 1 - u64::from(a)).collect();
        out.sort_unstable();
        out
    }

    pub fn a_labels(&self) -> Vec<u32> {
        self.iter_a().collect()
    }

    pub fn frozen(&self) -> InfoSet {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        let n = self.n();
        if !n.is_multiple_of(64) {
            let last = out.words.len() - 1;
            out.words[last] &= (1u64 << (n % 64)) - 1;
        }
        out
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        self.iter_a().map(|a| Monomial { m: self.m, exps: a }).collect()
    }

    /// Membership mask in z-order (`true` for information positions).
    pub fn info_mask_z(&self) -> Vec<bool> {
        let n = self.n();
        (0..n).map(|z| self.contains_a((n - 1 - z) as u32)).collect()
    }

    /// Whether every member satisfies `c`.
    pub fn all_members_satisfy(&self, c: &IndexConstraint) -> bool {
        self.iter_a().all(|a| c.matches(a))
    }

    /// Whether every frozen index satisfies `c`.
    pub fn all_frozen_satisfy(&self, c: &IndexConstraint) -> bool {
        (0..self.n() as u32).all(|a| self.contains_a(a) || c.matches(a))
    }
}

impl fmt::Debug for InfoSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InfoSet(m={}, z={:?})", self.m, self.z_labels())
    }
}

/// `Ind_m(a_{i_1} = c_1, ...)`: fixed bits at 1-based positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IndexConstraint {
    fixed: Vec<(usize, bool)>,
}

impl IndexConstraint {
    pub fn new(fixed: Vec<(usize, bool)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(p, _) in &fixed {
            if p == 0 || p > 32 {
                return Err(Error::InvalidConstraint(format!("position {p} out of range")));
            }
            if !seen.insert(p) {
                return Err(Error::InvalidConstraint(format!("position {p} repeated")));
            }
        }
        Ok(IndexConstraint { fixed })
    }

    /// Positions `lo..=hi` all fixed to `value`.
    pub fn range(lo: usize, hi: usize, value: bool) -> Self {
        IndexConstraint {
            fixed: (lo..=hi).map(|p| (p, value)).collect(),
        }
    }

    pub fn single(pos: usize, value: bool) -> Self {
        IndexConstraint {
            fixed: vec![(pos, value)],
        }
    }

    pub fn fixed(&self) -> &[(usize, bool)] {
        &self.fixed
    }

    pub fn len(&self) -> usize {
        self.fixed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty()
    }

    pub fn mask(&self) -> u32 {
        self.fixed.iter().fold(0, |acc, &(p, _)| acc | 1 << (p - 1))
    }

    pub fn values(&self) -> u32 {
        self.fixed
            .iter()
            .fold(0, |acc, &(p, v)| acc | (u32::from(v) << (p - 1)))
    }

    #[inline]
    pub fn matches(&self, a: u32) -> bool {
        a & self.mask() == self.values()
    }

    fn check(&self, m: usize) -> Result<()> {
        match self.fixed.iter().find(|&&(p, _)| p > m) {
            Some(&(p, _)) => Err(Error::InvalidConstraint(format!("position {p} exceeds m = {m}"))),
            None => Ok(()),
        }
    }
}

/// Deletes the bits of `a` selected by `mask`, compacting the remainder.
#[inline]
pub(crate) fn compress_bits(a: u32, mask: u32) -> u32 {
    let mut out = 0;
    let mut k = 0;
    let mut keep = !mask;
    while keep != 0 {
        let low = keep.trailing_zeros();
        if a >> low == 0 {
            break;
        }
        out |= (a >> low & 1) << k;
        k += 1;
        keep &= keep - 1;
    }
    out
}

/// Information set of the subcode on `Ind_m(c)`, constrained coordinates removed.
pub fn subcode_info(info: &InfoSet, c: &IndexConstraint) -> Result<InfoSet> {
    c.check(info.m)?;
    let mask = c.mask();
    let mut out = InfoSet::empty(info.m - c.len())?;
    for a in info.iter_a() {
        if c.matches(a) {
            out.insert_a(compress_bits(a, mask));
        }
    }
    Ok(out)
}

/// Smallest decreasing set containing `gens`.
pub fn decreasing_closure(m: usize, gens: &[Monomial]) -> Result<InfoSet> {
    let mut out = InfoSet::empty(m)?;
    if let Some(g) = gens.iter().find(|g| g.m != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: g.m,
        });
    }
    for a in 0..out.n() as u32 {
        if gens.iter().any(|g| precedes_bits(a, g.exps)) {
            out.insert_a(a);
        }
    }
    Ok(out)
}

/// Immediate lower covers of `f` under `≼`: drop one variable, or lower one
/// index by one step onto a free variable.
fn lower_covers(f: u32, m: usize) -> impl Iterator<Item = u32> {
    (0..m).filter_map(move |i| {
        if f >> i & 1 == 0 {
            return None;
        }
        Some(f & !(1 << i))
    })
    .chain((1..m).filter_map(move |i| {
        if f >> i & 1 == 1 && f >> (i - 1) & 1 == 0 {
            Some(f & !(1 << i) | 1 << (i - 1))
        } else {
            None
        }
    }))
}

pub fn is_decreasing(info: &InfoSet) -> bool {
    info.iter_a()
        .all(|f| lower_covers(f, info.m).all(|g| info.contains_a(g)))
}

/// A polar code `C(I)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarCode {
    info: InfoSet,
    verified: bool,
    info_mask: Vec<bool>,
}

impl PolarCode {
    pub fn new(info: InfoSet) -> Result<Self> {
        if !is_decreasing(&info) {
            return Err(Error::NotDecreasing);
        }
        Ok(Self::build(info, true))
    }

    /// Skips the decreasing check; the code is tagged as unverified.
    pub fn new_unchecked(info: InfoSet) -> Self {
        let verified = is_decreasing(&info);
        Self::build(info, verified)
    }

    fn build(info: InfoSet, verified: bool) -> Self {
        let info_mask = info.info_mask_z();
        PolarCode {
            info,
            verified,
            info_mask,
        }
    }

    /// Code generated by `I_min` given as z-labels.
    pub fn from_i_min_z(m: usize, i_min: &[u64]) -> Result<Self> {
        let gens = i_min
            .iter()
            .map(|&z| Monomial::from_z(z, m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(decreasing_closure(m, &gens)?)
    }

    pub fn from_info_z(m: usize, info_z: &[u64]) -> Result<Self> {
        Self::new(InfoSet::from_z(m, info_z.iter().copied())?)
    }

    pub fn m(&self) -> usize {
        self.info.m
    }

    pub fn n(&self) -> usize {
        self.info.n()
    }

    pub fn k(&self) -> usize {
        self.info.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    pub fn info(&self) -> &InfoSet {
        &self.info
    }

    /// Whether the information set was checked to be decreasing.
    pub fn is_verified(&self) -> bool {
        self.verified
    }

    /// `true` at information positions, z-order.
    pub fn info_mask(&self) -> &[bool] {
        &self.info_mask
    }

    /// Information positions (z-labels), ascending.
    pub fn info_positions(&self) -> Vec<usize> {
        (0..self.n()).filter(|&z| self.info_mask[z]).collect()
    }
}

/// In-place `x <- x G_m` for `G_m = F^{⊗m}`, `F = [[1,0],[1,1]]`.
pub fn polar_transform(x: &mut [u8]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut half = 1;
    while half < n {
        for block in x.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// Encodes `message` (one bit per information position, ascending z).
pub fn encode(code: &PolarCode, message: &[u8]) -> Result<Vec<u8>> {
    if message.len() != code.k() {
        return Err(Error::LengthMismatch {
            expected: code.k(),
            actual: message.len(),
        });
    }
    let mut u = vec![0u8; code.n()];
    for (z, &bit) in code.info_positions().into_iter().zip(message) {
        u[z] = bit & 1;
    }
    polar_transform(&mut u);
    Ok(u)
}

/// Codeword from a full length-`n` u-vector; frozen entries are ignored.
pub fn encode_u(code: &PolarCode, u: &[u8]) -> Result<Vec<u8>> {
    if u.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            actual: u.len(),
        });
    }
    let mut x: Vec<u8> = u
        .iter()
        .zip(code.info_mask())
        .map(|(&b, &info)| if info { b & 1 } else { 0 })
        .collect();
    polar_transform(&mut x);
    Ok(x)
}

/// Bhattacharyya construction on the BEC: picks the `k` smallest parameters,
/// ties going to the larger z-index.
pub fn bec_construct(m: usize, k: usize, erasure: f64) -> Result<InfoSet> {
    check_code_dim(m)?;
    let n = 1usize << m;
    if !(erasure > 0.0 && erasure < 1.0) {
        return Err(Error::InvalidErasure(erasure));
    }
    if k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    if m <= 10 {
        let params = bec_parameters_exact(m, erasure);
        order.sort_by(|&x, &y| params[x].cmp(&params[y]).then(y.cmp(&x)));
    } else {
        let params = bec_parameters_f64(m, erasure);
        order.sort_by(|&x, &y| params[x].total_cmp(&params[y]).then(y.cmp(&x)));
    }
    let info = InfoSet::from_z(m, order[..k].iter().map(|&z| z as u64))?;
    if !is_decreasing(&info) {
        return Err(Error::NotDecreasing);
    }
    Ok(info)
}

/// Bhattacharyya parameters as numerators over a common power-of-two
/// denominator. The most significant bit of `z` selects the first split.
fn bec_parameters_exact(m: usize, erasure: f64) -> Vec<BigUint> {
    // An f64 in (0,1) is exactly mantissa / 2^e.
    let (mantissa, exp) = dyadic(erasure);
    let mut level = vec![BigUint::from(mantissa)];
    let mut denom_bits = exp;
    for _ in 0..m {
        let mut next = Vec::with_capacity(level.len() * 2);
        for zv in &level {
            let sq = zv * zv;
            let worse = (zv << (denom_bits + 1)) - &sq;
            next.push(worse);
            next.push(sq);
        }
        level = next;
        denom_bits *= 2;
    }
    level
}

fn dyadic(x: f64) -> (u64, usize) {
    let mut mantissa = x;
    let mut exp = 0usize;
    while mantissa.fract() != 0.0 {
        mantissa *= 2.0;
        exp += 1;
    }
    debug_assert!(exp <= 1100);
    (mantissa as u64, exp)
}

fn bec_parameters_f64(m: usize, erasure: f64) -> Vec<f64> {
    let mut level = vec![erasure];
    for _ in 0..m {
        level = level
            .iter()
            .flat_map(|&z| [2.0 * z - z * z, z * z])
            .collect();
    }
    level
}

/// Code description accepted by the loaders: `m` plus exactly one of
/// `i_min_z`, `info_z` or `bec`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_min_z: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub info_z: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bec: Option<BecSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BecSpec {
    pub erasure: f64,
    #[serde(rename = "K", alias = "k")]
    pub k: usize,
}

impl CodeSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn resolve(&self) -> Result<PolarCode> {
        let given = [self.i_min_z.is_some(), self.info_z.is_some(), self.bec.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        if given != 1 {
            return Err(Error::Config(
                "code spec needs exactly one of i_min_z, info_z, bec".into(),
            ));
        }
        if let Some(i_min) = &self.i_min_z {
            PolarCode::from_i_min_z(self.m, i_min)
        } else if let Some(info) = &self.info_z {
            PolarCode::from_info_z(self.m, info)
        } else {
            let bec = self.bec.as_ref().expect("counted above");
            PolarCode::new(bec_construct(self.m, bec.k, bec.erasure)?)
        }
    }
}

/// A resolved code, listed in both labelings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedCode {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub info_z: Vec<u64>,
    pub info_a: Vec<u32>,
}

impl From<&PolarCode> for ResolvedCode {
    fn from(code: &PolarCode) -> Self {
        ResolvedCode {
            m: code.m(),
            n: code.n(),
            k: code.k(),
            info_z: code.info().z_labels(),
            info_a: code.info().a_labels(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars_of(a: u32, m: usize) -> Vec<usize> {
        (0..m).filter(|&i| a >> i & 1 == 1).map(|i| i + 1).collect()
    }

    /// Definition-level order: some divisor of g with f's degree dominates f index-wise.
    fn precedes_by_divisors(f: u32, g: u32, m: usize) -> bool {
        let fv = vars_of(f, m);
        let t = fv.len();
        let mut sub = g;
        loop {
            if sub.count_ones() as usize == t {
                let gv = vars_of(sub, m);
                if fv.iter().zip(&gv).all(|(i, j)| i <= j) {
                    return true;
                }
            }
            if sub == 0 {
                return false;
            }
            sub = (sub - 1) & g;
        }
    }

    #[test]
    fn z_a_conversion() {
        assert_eq!(z_to_a(0, 3).unwrap(), 0b111);
        assert_eq!(z_to_a(7, 3).unwrap(), 0);
        let a = z_to_a(24, 6).unwrap();
        assert_eq!(a, 39);
        assert_eq!(Monomial::new(6, a).unwrap().to_string(), "x1x2x3x6");
        assert!(z_to_a(8, 3).is_err());
        for z in 0..32 {
            assert_eq!(a_to_z(z_to_a(z, 5).unwrap(), 5).unwrap(), z);
        }
    }

    #[test]
    fn precedes_examples() {
        let mono = |v: &[usize], m| Monomial::from_vars(m, v).unwrap();
        assert!(precedes(&mono(&[1], 2), &mono(&[1, 2], 2)));
        assert!(precedes(&mono(&[1, 3], 3), &mono(&[2, 3], 3)));
        assert!(!precedes(&mono(&[4, 5], 6), &mono(&[1, 2, 3, 6], 6)));
        assert!(!precedes(&mono(&[2], 2), &mono(&[1], 2)));
    }

    #[test]
    fn precedes_matches_definition() {
        for m in 1..=5 {
            for f in 0..1u32 << m {
                for g in 0..1u32 << m {
                    assert_eq!(precedes_bits(f, g), precedes_by_divisors(f, g, m), "{f} {g} m={m}");
                }
            }
        }
    }

    #[test]
    fn precedes_is_partial_order() {
        for m in 1..=5usize {
            let n = 1u32 << m;
            for f in 0..n {
                assert!(precedes_bits(f, f));
                for g in 0..n {
                    if f != g && precedes_bits(f, g) {
                        assert!(!precedes_bits(g, f));
                    }
                    for h in 0..n {
                        if precedes_bits(f, g) && precedes_bits(g, h) {
                            assert!(precedes_bits(f, h));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn closure_sizes() {
        let c = PolarCode::from_i_min_z(6, &[24]).unwrap();
        assert_eq!(c.k(), 32);
        let gens = [
            Monomial::from_vars(8, &[6, 7, 8]).unwrap(),
            Monomial::from_vars(8, &[2, 3, 7, 8]).unwrap(),
        ];
        let i = decreasing_closure(8, &gens).unwrap();
        assert_eq!(i.len(), 128);
        assert_eq!(i, PolarCode::from_i_min_z(8, &[31, 57]).unwrap().info().clone());
        assert!(decreasing_closure(4, &[]).unwrap().is_empty());
        assert_eq!(PolarCode::from_i_min_z(7, &[23, 25]).unwrap().k(), 85);
    }

    #[test]
    fn closure_is_decreasing_and_idempotent() {
        for m in 1..=4 {
            for g in 0..1u32 << m {
                let gens = [Monomial::new(m, g).unwrap()];
                let c = decreasing_closure(m, &gens).unwrap();
                assert!(is_decreasing(&c));
                let again = decreasing_closure(m, &c.monomials()).unwrap();
                assert_eq!(again, c);
            }
        }
    }

    #[test]
    fn decreasing_matches_definition() {
        let m = 3;
        for bits in 0u32..256 {
            let info = InfoSet::from_a(m, (0..8).filter(|a| bits >> a & 1 == 1)).unwrap();
            let brute = info.iter_a().all(|f| (0..8u32).all(|g| !precedes_bits(g, f) || info.contains_a(g)));
            assert_eq!(is_decreasing(&info), brute);
        }
        assert!(is_decreasing(&InfoSet::empty(3).unwrap()));
        assert!(is_decreasing(&InfoSet::full(3).unwrap()));
        let x2 = InfoSet::from_a(2, [0b10]).unwrap();
        assert!(!is_decreasing(&x2));
    }

    #[test]
    fn subcode_examples() {
        let i = InfoSet::from_z(3, [3, 5, 6, 7]).unwrap();
        let sub = subcode_info(&i, &IndexConstraint::single(3, true)).unwrap();
        assert_eq!(sub.z_labels(), vec![3]);
        let sub = subcode_info(&i, &IndexConstraint::single(3, false)).unwrap();
        assert_eq!(sub.z_labels(), vec![1, 2, 3]);
        let sub = subcode_info(&i, &IndexConstraint::single(1, true)).unwrap();
        assert_eq!(sub.z_labels(), vec![3]);
        let sub = subcode_info(&i, &IndexConstraint::single(1, false)).unwrap();
        assert_eq!(sub.z_labels(), vec![1, 2, 3]);

        let ex1 = InfoSet::from_z(4, [3, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15]).unwrap();
        let sub = subcode_info(&ex1, &IndexConstraint::single(4, false)).unwrap();
        assert_eq!(sub.z_labels(), (1..=7).collect::<Vec<_>>());
        assert_eq!(subcode_info(&ex1, &IndexConstraint::default()).unwrap(), ex1);
        assert!(subcode_info(&ex1, &IndexConstraint::single(5, false)).is_err());
        assert!(IndexConstraint::new(vec![(1, true), (1, false)]).is_err());
    }

    #[test]
    fn compress_matches_naive() {
        for a in 0u32..256 {
            for mask in 0u32..256 {
                let mut expect = 0;
                let mut k = 0;
                for i in 0..8 {
                    if mask >> i & 1 == 0 {
                        expect |= (a >> i & 1) << k;
                        k += 1;
                    }
                }
                assert_eq!(compress_bits(a, mask), expect);
            }
        }
    }

    #[test]
    fn encode_examples() {
        let code = PolarCode::from_info_z(1, &[1]).unwrap();
        assert_eq!(encode(&code, &[1]).unwrap(), vec![1, 1]);
        let code = PolarCode::new_unchecked(InfoSet::from_z(2, [0]).unwrap());
        assert!(!code.is_verified());
        assert_eq!(encode(&code, &[1]).unwrap(), vec![1, 0, 0, 0]);
        let code = PolarCode::from_info_z(3, &[3, 5, 6, 7]).unwrap();
        assert_eq!(encode(&code, &[0, 0, 0, 0]).unwrap(), vec![0; 8]);
        assert!(encode(&code, &[1]).is_err());
    }

    #[test]
    fn encode_matches_monomial_evaluation() {
        let m = 4;
        let code = PolarCode::new(InfoSet::full(m).unwrap()).unwrap();
        for z in 0..16usize {
            let mut msg = vec![0u8; 16];
            msg[z] = 1;
            let cw = encode(&code, &msg).unwrap();
            let g = z_to_a(z as u64, m).unwrap();
            for p in 0..16u64 {
                let u = z_to_a(p, m).unwrap();
                assert_eq!(cw[p as usize], u8::from(u & g == g));
            }
        }
    }

    #[test]
    fn bec_examples() {
        let i = bec_construct(3, 4, 0.5).unwrap();
        assert_eq!(i.z_labels(), vec![3, 5, 6, 7]);
        assert!(bec_construct(5, 32, 0.3).unwrap().is_full());
        assert!(bec_construct(5, 0, 0.3).unwrap().is_empty());
        assert!(bec_construct(3, 9, 0.5).is_err());
        assert!(bec_construct(3, 2, 1.0).is_err());
        let big = bec_construct(11, 1024, 0.5).unwrap();
        assert_eq!(big.len(), 1024);
    }

    /// Hand-run recursion for m = 3 at 0.5 against the f64 route.
    #[test]
    fn bec_parameters_agree() {
        let exact = bec_parameters_exact(3, 0.5);
        let float = bec_parameters_f64(3, 0.5);
        let denom = 2f64.powi(8);
        for (e, f) in exact.iter().zip(&float) {
            let v: f64 = e.to_string().parse::<f64>().unwrap() / denom;
            assert!((v - f).abs() < 1e-12);
        }
        assert!((float[7] - 0.00390625).abs() < 1e-15);
        assert!((float[3] - 0.31640625).abs() < 1e-15);
    }

    #[test]
    fn code_spec_loading() {
        let spec = CodeSpec::from_json(r#"{"m": 8, "i_min_z": [31, 57]}"#).unwrap();
        assert_eq!(spec.resolve().unwrap().k(), 128);
        let spec = CodeSpec::from_json(r#"{"m": 3, "bec": {"erasure": 0.5, "K": 4}}"#).unwrap();
        assert_eq!(spec.resolve().unwrap().info().z_labels(), vec![3, 5, 6, 7]);
        let spec = CodeSpec::from_json(r#"{"m": 3, "info_z": [3,5,6,7], "i_min_z": [3]}"#).unwrap();
        assert!(spec.resolve().is_err());
        let spec = CodeSpec::from_json(r#"{"m": 2, "info_z": [1]}"#).unwrap();
        assert_eq!(spec.resolve(), Err(Error::NotDecreasing));
    }
}
