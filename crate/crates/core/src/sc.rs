//! Successive cancellation decoding on the natural-order factor graph.
//!
//! The first stage pairs positions `i` and `i + n/2`: the upper half carries
//! `f` LLRs and is decoded first, the lower half carries `g` LLRs. Stage-0
//! decisions use `L >= 0 -> 0`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monomial::{polar_transform, InfoSet, PolarCode};

/// Exact boxplus.
#[inline]
pub fn f_llr(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let (x, y) = (a.abs(), b.abs());
    let lo = x.min(y);
    let d = (x - y).abs();
    if lo.is_infinite() {
        return sign * f64::INFINITY;
    }
    if d.is_infinite() {
        return sign * lo;
    }
    if lo < 1.0 {
        // Small magnitudes: the product form keeps full relative precision,
        // where the log form below would cancel to zero.
        let p = (x / 2.0).tanh() * (y / 2.0).tanh();
        return sign * 2.0 * p.atanh();
    }
    // min + log1p(e^{-(x+y)}) - log1p(e^{-|x-y|}), with the two logs merged
    // so that small arguments keep their precision.
    let ed = (-d).exp();
    let corr = (ed * (-2.0 * lo).exp_m1() / (1.0 + ed)).ln_1p();
    sign * (lo + corr).max(0.0)
}

/// Min-sum approximation of [`f_llr`].
#[inline]
pub fn f_llr_minsum(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    sign * a.abs().min(b.abs())
}

/// `(-1)^u a + b`; opposing infinities are an error.
#[inline]
pub fn g_llr(u: u8, a: f64, b: f64) -> Result<f64> {
    let out = if u & 1 == 0 { b + a } else { b - a };
    if out.is_nan() {
        return Err(Error::OpposingInfinities);
    }
    Ok(out)
}

#[inline]
fn decide(llr: f64) -> u8 {
    u8::from(llr < 0.0)
}

/// Channel LLRs indexed by position `z`; `±inf` allowed, `NaN` rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if !values.len().is_power_of_two() {
            return Err(Error::LengthMismatch {
                expected: values.len().next_power_of_two(),
                actual: values.len(),
            });
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::NanLlr);
        }
        Ok(LlrVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl FromStr for LlrVector {
    type Err = Error;

    /// Whitespace-separated reals; `inf` and `-inf` are accepted.
    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad LLR token {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        LlrVector::new(values)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    /// Stage-`m` hard decisions (the codeword estimate).
    pub codeword: Vec<u8>,
    /// Stage-0 decisions, one per position `z`; frozen positions are 0.
    pub message: Vec<u8>,
}

impl DecodeResult {
    /// Partial sums at stage `t`: the message pushed through the first `t`
    /// butterfly stages. Stage 0 is the message, stage `m` the codeword.
    pub fn stage_bits(&self, t: usize) -> Vec<u8> {
        partial_transform(&self.message, t)
    }

    /// Decided bits on information positions, ascending z.
    pub fn info_bits(&self, code: &PolarCode) -> Vec<u8> {
        code.info_positions().iter().map(|&z| self.message[z]).collect()
    }
}

/// Applies the butterflies of half-width `1, 2, ..., 2^{t-1}`.
pub fn partial_transform(u: &[u8], t: usize) -> Vec<u8> {
    let mut x = u.to_vec();
    let n = x.len();
    let width = (1usize << t).min(n);
    for chunk in x.chunks_mut(width) {
        polar_transform(chunk);
    }
    x
}

/// Check-node rule used by the decoder.
///
/// Min-sum is the default. With it, SC on Rep and SPC nodes is exactly ML
/// and therefore commutes with every permutation, which is what the
/// invariance results rely on. Exact boxplus breaks that on SPC nodes: the
/// decision can depend on the order in which reliabilities are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderFlavor {
    Exact,
    #[default]
    Minsum,
}

/// Reusable SC decoder holding its own scratch space. Cheap to clone; use one
/// per thread.
#[derive(Clone, Debug, Default)]
pub struct ScDecoder {
    flavor: DecoderFlavor,
    scratch: Vec<f64>,
}

impl ScDecoder {
    pub fn new(flavor: DecoderFlavor) -> Self {
        ScDecoder {
            flavor,
            scratch: Vec::new(),
        }
    }

    pub fn flavor(&self) -> DecoderFlavor {
        self.flavor
    }

    pub fn decode(&mut self, code: &PolarCode, y: &[f64]) -> Result<DecodeResult> {
        let n = code.n();
        let mut codeword = vec![0u8; n];
        let mut message = vec![0u8; n];
        self.decode_into(code.info_mask(), y, &mut codeword, &mut message)?;
        Ok(DecodeResult { codeword, message })
    }

    /// Decodes into caller buffers; `info_mask` is in z-order.
    pub fn decode_into(
        &mut self,
        info_mask: &[bool],
        y: &[f64],
        codeword: &mut [u8],
        message: &mut [u8],
    ) -> Result<()> {
        let n = info_mask.len();
        if y.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: y.len(),
            });
        }
        if codeword.len() != n || message.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: codeword.len().min(message.len()),
            });
        }
        if y.iter().any(|v| v.is_nan()) {
            return Err(Error::NanLlr);
        }
        if self.scratch.len() < n {
            self.scratch.resize(n, 0.0);
        }
        let f = match self.flavor {
            DecoderFlavor::Exact => f_llr,
            DecoderFlavor::Minsum => f_llr_minsum,
        };
        decode_node(y, info_mask, &mut self.scratch, codeword, message, f)
    }
}

fn decode_node(
    llr: &[f64],
    mask: &[bool],
    scratch: &mut [f64],
    cw: &mut [u8],
    msg: &mut [u8],
    f: fn(f64, f64) -> f64,
) -> Result<()> {
    let n = llr.len();
    if !mask.iter().any(|&b| b) {
        cw.fill(0);
        msg.fill(0);
        return Ok(());
    }
    if n == 1 {
        let u = decide(llr[0]);
        cw[0] = u;
        msg[0] = u;
        return Ok(());
    }
    let h = n / 2;
    let (child, rest) = scratch.split_at_mut(h);
    let (top, bottom) = llr.split_at(h);
    for ((c, &a), &b) in child.iter_mut().zip(top).zip(bottom) {
        *c = f(a, b);
    }
    let (cw_top, cw_bottom) = cw.split_at_mut(h);
    let (msg_top, msg_bottom) = msg.split_at_mut(h);
    decode_node(child, &mask[..h], rest, cw_top, msg_top, f)?;
    for i in 0..h {
        child[i] = g_llr(cw_top[i], top[i], bottom[i])?;
    }
    decode_node(child, &mask[h..], rest, cw_bottom, msg_bottom, f)?;
    for (a, &b) in cw_top.iter_mut().zip(cw_bottom.iter()) {
        *a ^= b;
    }
    Ok(())
}

/// One-shot SC decode with the default (min-sum) flavor.
pub fn sc_decode(code: &PolarCode, y: &[f64]) -> Result<DecodeResult> {
    ScDecoder::default().decode(code, y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeClass {
    Rate0,
    Rate1,
    Rep,
    Spc,
    Other,
}

/// Classifies `C(I)` as one of the codes on which SC is maximum likelihood.
pub fn classify_node(info: &InfoSet) -> NodeClass {
    let n = info.n();
    let k = info.len();
    let all_ones = (n - 1) as u32;
    if k == 0 {
        NodeClass::Rate0
    } else if k == n {
        NodeClass::Rate1
    } else if k == 1 && info.contains_a(0) {
        NodeClass::Rep
    } else if k == n - 1 && !info.contains_a(all_ones) {
        NodeClass::Spc
    } else {
        NodeClass::Other
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomial::encode;

    #[test]
    fn f_examples() {
        assert_eq!(f_llr(0.0, 7.3), 0.0);
        assert_eq!(f_llr(f64::INFINITY, 2.5), 2.5);
        assert_eq!(f_llr(f64::INFINITY, -2.5), -2.5);
        assert_eq!(f_llr(f64::NEG_INFINITY, 2.5), -2.5);
        assert_eq!(f_llr(f64::INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        let direct = ((5f64.exp() + 1.0) / (2f64.exp() + 3f64.exp())).ln();
        assert!((f_llr(2.0, 3.0) - direct).abs() < 1e-12);
        assert!((f_llr(2.0, 3.0) - 1.693_453_6).abs() < 1e-6);
        assert!((f_llr(-2.0, 3.0) + direct).abs() < 1e-12);
    }

    #[test]
    fn f_against_direct_formula() {
        let direct = |a: f64, b: f64| ((a + b).exp() + 1.0).ln() - (a.exp() + b.exp()).ln();
        for &a in &[-6.0, -1.5, -0.2, 0.01, 0.7, 3.0, 9.0] {
            for &b in &[-4.0, -0.9, 0.3, 1.1, 5.0] {
                assert!((f_llr(a, b) - direct(a, b)).abs() < 1e-10, "{a} {b}");
            }
        }
    }

    #[test]
    fn f_keeps_relative_precision_when_tiny() {
        // boxplus(x, y) ~ x y / 2 near zero
        for &x in &[1e-3, 1e-9, 1e-30, 1e-100] {
            let v = f_llr(x, -x);
            assert!(v < 0.0);
            assert!((v / (-x * x / 2.0) - 1.0).abs() < 1e-6, "{x}");
        }
        let mut l = 1e-3;
        for _ in 0..4 {
            l = f_llr(l, l * 1.1);
        }
        assert!(l > 0.0);
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_llr(0, 2.0, 3.0).unwrap(), 5.0);
        assert_eq!(g_llr(1, 2.0, 3.0).unwrap(), 1.0);
        assert_eq!(g_llr(1, 0.0, -4.0).unwrap(), -4.0);
        assert_eq!(g_llr(1, f64::INFINITY, f64::INFINITY), Err(Error::OpposingInfinities));
        assert_eq!(g_llr(0, f64::INFINITY, f64::INFINITY).unwrap(), f64::INFINITY);
    }

    #[test]
    fn rate0_decodes_to_zero() {
        let code = PolarCode::new(InfoSet::empty(3).unwrap()).unwrap();
        let out = sc_decode(&code, &[-1.0; 8]).unwrap();
        assert_eq!(out.codeword, vec![0; 8]);
    }

    #[test]
    fn two_position_trace() {
        let code = PolarCode::from_info_z(1, &[1]).unwrap();
        let out = sc_decode(&code, &[-1.0, -3.0]).unwrap();
        assert_eq!(out.message, vec![0, 1]);
        assert_eq!(out.codeword, vec![1, 1]);
    }

    #[test]
    fn tie_decides_zero() {
        let code = PolarCode::new(InfoSet::full(1).unwrap()).unwrap();
        let out = sc_decode(&code, &[0.0, -2.0]).unwrap();
        // f(0, -2) = 0 decides 0; g(0, 0, -2) = -2 decides 1.
        assert_eq!(out.message, vec![0, 1]);
    }

    #[test]
    fn noiseless_recovers_codeword() {
        let code = PolarCode::from_i_min_z(6, &[24]).unwrap();
        let msg: Vec<u8> = (0..code.k()).map(|i| (i * 7 % 3 == 0) as u8).collect();
        let cw = encode(&code, &msg).unwrap();
        let y: Vec<f64> = cw.iter().map(|&c| if c == 1 { -20.0 } else { 20.0 }).collect();
        let out = sc_decode(&code, &y).unwrap();
        assert_eq!(out.codeword, cw);
        assert_eq!(out.info_bits(&code), msg);
        assert_eq!(out.stage_bits(6), cw);
        assert_eq!(out.stage_bits(0), out.message);
    }

    #[test]
    fn errors() {
        let code = PolarCode::from_info_z(1, &[1]).unwrap();
        assert!(matches!(sc_decode(&code, &[1.0]), Err(Error::LengthMismatch { .. })));
        assert_eq!(sc_decode(&code, &[f64::NAN, 1.0]), Err(Error::NanLlr));
        assert!(LlrVector::new(vec![1.0; 3]).is_err());
        let v: LlrVector = "1.5 -inf inf 0".parse().unwrap();
        assert_eq!(v.as_slice()[1], f64::NEG_INFINITY);
        assert!("1 NaN".parse::<LlrVector>().is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_node(&InfoSet::empty(3).unwrap()), NodeClass::Rate0);
        assert_eq!(classify_node(&InfoSet::full(3).unwrap()), NodeClass::Rate1);
        let spc = InfoSet::from_z(4, 1..16).unwrap();
        assert_eq!(classify_node(&spc), NodeClass::Spc);
        let rep = InfoSet::from_z(4, [15]).unwrap();
        assert_eq!(classify_node(&rep), NodeClass::Rep);
        let other = InfoSet::from_z(3, [3, 5, 6, 7]).unwrap();
        assert_eq!(classify_node(&other), NodeClass::Other);
    }
}
