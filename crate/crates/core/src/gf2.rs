//! Square bit matrices over GF(2), affine maps and block lower-triangular
//! (BLTA) structures.
//!
//! Row `i` of a matrix is stored as a `u32` whose bit `j - 1` holds entry
//! `(i, j)`. Public accessors use 1-based row and column indices; a vector
//! `a = (a_1, ..., a_m)` is a `u32` with `a_i` in bit `i - 1`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 32;

#[inline]
fn low_mask(k: usize) -> u32 {
    if k >= 32 {
        u32::MAX
    } else {
        (1u32 << k) - 1
    }
}

/// Bits `lo..hi` (0-based, half open) set.
#[inline]
fn range_mask(lo: usize, hi: usize) -> u32 {
    low_mask(hi) & !low_mask(lo)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    m: usize,
    rows: [u32; MAX_DIM],
}

impl Gf2Matrix {
    pub fn zero(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_DIM {
            return Err(Error::UnsupportedDimension(m));
        }
        Ok(Gf2Matrix {
            m,
            rows: [0; MAX_DIM],
        })
    }

    pub fn identity(m: usize) -> Result<Self> {
        let mut out = Self::zero(m)?;
        for i in 0..m {
            out.rows[i] = 1 << i;
        }
        Ok(out)
    }

    /// Builds a matrix from row bitmasks (bit `j - 1` of `rows[i - 1]` is entry `(i, j)`).
    pub fn from_rows(rows: &[u32]) -> Result<Self> {
        let mut out = Self::zero(rows.len())?;
        let mask = low_mask(rows.len());
        for (i, &r) in rows.iter().enumerate() {
            if r & !mask != 0 {
                return Err(Error::Parse(format!("row {} has bits beyond column {}", i + 1, rows.len())));
            }
            out.rows[i] = r;
        }
        Ok(out)
    }

    /// Builds a matrix from nested 0/1 entries, row-major.
    pub fn from_entries(entries: &[Vec<u8>]) -> Result<Self> {
        let m = entries.len();
        let mut out = Self::zero(m)?;
        for (i, row) in entries.iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    actual: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => out.rows[i] |= 1 << j,
                    _ => return Err(Error::Parse(format!("entry ({}, {}) is not a bit", i + 1, j + 1))),
                }
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows[..self.m]
    }

    /// Entry `(i, j)`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!((1..=self.m).contains(&i) && (1..=self.m).contains(&j));
        self.rows[i - 1] >> (j - 1) & 1 == 1
    }

    /// Sets entry `(i, j)`, 1-based.
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!((1..=self.m).contains(&i) && (1..=self.m).contains(&j));
        if value {
            self.rows[i - 1] |= 1 << (j - 1);
        } else {
            self.rows[i - 1] &= !(1 << (j - 1));
        }
    }

    pub fn is_identity(&self) -> bool {
        (0..self.m).all(|i| self.rows[i] == 1 << i)
    }

    /// `M a` for a vector packed as bits.
    #[inline]
    pub fn apply(&self, a: u32) -> u32 {
        let mut out = 0;
        for i in 0..self.m {
            out |= ((self.rows[i] & a).count_ones() & 1) << i;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = *self;
        out.rows = [0; MAX_DIM];
        for i in 0..self.m {
            for j in 0..self.m {
                if self.rows[i] >> j & 1 == 1 {
                    out.rows[j] |= 1 << i;
                }
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows;
        let mut rank = 0;
        for col in 0..self.m {
            let bit = 1u32 << col;
            let Some(p) = (rank..self.m).find(|&r| rows[r] & bit != 0) else {
                continue;
            };
            rows.swap(rank, p);
            for r in 0..self.m {
                if r != rank && rows[r] & bit != 0 {
                    rows[r] ^= rows[rank];
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_invertible(&self) -> bool {
        self.rank() == self.m
    }

    /// Unit lower-triangular: ones on the diagonal, zeros above it.
    pub fn is_unit_lower(&self) -> bool {
        (0..self.m).all(|i| self.rows[i] & range_mask(i, self.m) == 1 << i)
    }

    /// Unit upper-triangular: ones on the diagonal, zeros below it.
    pub fn is_unit_upper(&self) -> bool {
        (0..self.m).all(|i| self.rows[i] & low_mask(i + 1) == 1 << i)
    }

    /// The square submatrix on rows and columns `lo..=hi` (1-based, inclusive).
    pub fn principal_submatrix(&self, lo: usize, hi: usize) -> Result<Self> {
        if lo < 1 || hi > self.m || lo > hi {
            return Err(Error::InvalidStructure(format!("bad submatrix range [{lo}, {hi}]")));
        }
        let k = hi - lo + 1;
        let mut out = Self::zero(k)?;
        for i in 0..k {
            out.rows[i] = (self.rows[lo - 1 + i] >> (lo - 1)) & low_mask(k);
        }
        Ok(out)
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix({})", self.m)?;
        for i in 0..self.m {
            for j in 0..self.m {
                f.write_str(if self.rows[i] >> j & 1 == 1 { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Text form: first line `m`, then `m` lines of `m` characters in `{0,1}`,
/// column 1 leftmost.
impl fmt::Display for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.m)?;
        for i in 0..self.m {
            writeln!(f, "{}", bits_to_string(self.rows[i], self.m))?;
        }
        Ok(())
    }
}

pub(crate) fn bits_to_string(bits: u32, len: usize) -> String {
    (0..len)
        .map(|j| if bits >> j & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub(crate) fn parse_bit_line(line: &str, len: usize) -> Result<u32> {
    let line = line.trim();
    if line.chars().count() != len {
        return Err(Error::Parse(format!("expected {len} binary digits, got {line:?}")));
    }
    let mut out = 0u32;
    for (j, c) in line.chars().enumerate() {
        match c {
            '0' => {}
            '1' => out |= 1 << j,
            _ => return Err(Error::Parse(format!("unexpected character {c:?}"))),
        }
    }
    Ok(out)
}

fn non_empty_lines(s: &str) -> impl Iterator<Item = &str> {
    s.lines().map(str::trim).filter(|l| !l.is_empty())
}

fn parse_matrix_lines<'a>(lines: &mut impl Iterator<Item = &'a str>) -> Result<Gf2Matrix> {
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("missing dimension line".into()))?;
    let m: usize = header
        .parse()
        .map_err(|_| Error::Parse(format!("bad dimension line {header:?}")))?;
    let mut out = Gf2Matrix::zero(m)?;
    for i in 0..m {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing row {}", i + 1)))?;
        out.rows[i] = parse_bit_line(line, m)?;
    }
    Ok(out)
}

impl FromStr for Gf2Matrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = non_empty_lines(s);
        let out = parse_matrix_lines(&mut lines)?;
        if lines.next().is_some() {
            return Err(Error::Parse("trailing lines after matrix".into()));
        }
        Ok(out)
    }
}

fn check_dims(a: &Gf2Matrix, b: &Gf2Matrix) -> Result<()> {
    if a.m != b.m {
        return Err(Error::DimensionMismatch {
            expected: a.m,
            actual: b.m,
        });
    }
    Ok(())
}

pub fn mat_mul(a: &Gf2Matrix, b: &Gf2Matrix) -> Result<Gf2Matrix> {
    check_dims(a, b)?;
    let mut out = *a;
    for i in 0..a.m {
        let mut acc = 0;
        let mut row = a.rows[i];
        while row != 0 {
            let k = row.trailing_zeros() as usize;
            acc ^= b.rows[k];
            row &= row - 1;
        }
        out.rows[i] = acc;
    }
    Ok(out)
}

impl std::ops::Mul for Gf2Matrix {
    type Output = Gf2Matrix;

    /// Panics on dimension mismatch; use [`mat_mul`] for a fallible product.
    fn mul(self, rhs: Gf2Matrix) -> Gf2Matrix {
        mat_mul(&self, &rhs).expect("matrix dimensions differ")
    }
}

pub fn mat_inv(a: &Gf2Matrix) -> Result<Gf2Matrix> {
    let m = a.m;
    let mut left = a.rows;
    let mut right = Gf2Matrix::identity(m)?.rows;
    for col in 0..m {
        let bit = 1u32 << col;
        let p = (col..m)
            .find(|&r| left[r] & bit != 0)
            .ok_or(Error::Singular)?;
        left.swap(col, p);
        right.swap(col, p);
        for r in 0..m {
            if r != col && left[r] & bit != 0 {
                left[r] ^= left[col];
                right[r] ^= right[col];
            }
        }
    }
    Ok(Gf2Matrix { m, rows: right })
}

/// Ordered block sizes `<s_1, ..., s_l>` of a block lower-triangular pattern.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct BlockStructure {
    sizes: Vec<usize>,
}

impl BlockStructure {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(Error::InvalidStructure(format!("zero-sized block in {sizes:?}")));
        }
        let m: usize = sizes.iter().sum();
        if m > MAX_DIM {
            return Err(Error::UnsupportedDimension(m));
        }
        Ok(BlockStructure { sizes })
    }

    /// The empty structure, `m = 0`.
    pub fn empty() -> Self {
        BlockStructure { sizes: Vec::new() }
    }

    /// A single block `<m>`.
    pub fn full(m: usize) -> Result<Self> {
        Self::new(vec![m])
    }

    /// All-ones structure `<1, ..., 1>` (the LTA group).
    pub fn lta(m: usize) -> Result<Self> {
        Self::new(vec![1; m])
    }

    /// Builds a structure on `m` coordinates from interior breakpoints in `1..m`.
    pub fn from_breakpoints(m: usize, breakpoints: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut cuts: Vec<usize> = breakpoints.into_iter().collect();
        cuts.sort_unstable();
        cuts.dedup();
        if cuts.iter().any(|&c| c == 0 || c >= m) {
            return Err(Error::InvalidStructure(format!("breakpoints {cuts:?} outside 1..{m}")));
        }
        let mut sizes = Vec::with_capacity(cuts.len() + 1);
        let mut prev = 0;
        for c in cuts.into_iter().chain(std::iter::once(m)) {
            sizes.push(c - prev);
            prev = c;
        }
        if m == 0 {
            sizes.clear();
        }
        Self::new(sizes)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn m(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Number of blocks `l`.
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn last(&self) -> Option<usize> {
        self.sizes.last().copied()
    }

    /// Prefix sum `S_t = s_1 + ... + s_{t-1}` for `1 <= t <= l + 1`.
    pub fn prefix(&self, t: usize) -> usize {
        assert!(t >= 1 && t <= self.sizes.len() + 1, "prefix index {t} out of range");
        self.sizes[..t - 1].iter().sum()
    }

    /// Interior breakpoints `S_2, ..., S_l`.
    pub fn breakpoints(&self) -> Vec<usize> {
        let mut acc = 0;
        let mut out = Vec::with_capacity(self.sizes.len().saturating_sub(1));
        for &s in &self.sizes[..self.sizes.len().saturating_sub(1)] {
            acc += s;
            out.push(acc);
        }
        out
    }

    /// Drops the last block.
    pub fn without_last(&self) -> Self {
        let mut sizes = self.sizes.clone();
        sizes.pop();
        BlockStructure { sizes }
    }

    pub fn with_appended(&self, s: usize) -> Result<Self> {
        let mut sizes = self.sizes.clone();
        sizes.push(s);
        Self::new(sizes)
    }

    /// Block index (0-based) of coordinate `i` (1-based).
    pub fn block_of(&self, i: usize) -> usize {
        let mut acc = 0;
        for (b, &s) in self.sizes.iter().enumerate() {
            acc += s;
            if i <= acc {
                return b;
            }
        }
        panic!("coordinate {i} outside structure of size {acc}");
    }

    /// Whether every breakpoint of `self` is also a breakpoint of `finer`,
    /// i.e. `BLTA(finer) ⊆ BLTA(self)`.
    pub fn is_refined_by(&self, finer: &BlockStructure) -> bool {
        if self.m() != finer.m() {
            return false;
        }
        let fine = finer.breakpoints();
        self.breakpoints().iter().all(|b| fine.contains(b))
    }

    /// All compositions of `m` (every block structure on `m` coordinates).
    pub fn all(m: usize) -> Vec<BlockStructure> {
        if m == 0 {
            return vec![BlockStructure::empty()];
        }
        (0u32..1 << (m - 1))
            .map(|mask| {
                let cuts = (1..m).filter(|&c| mask >> (c - 1) & 1 == 1);
                BlockStructure::from_breakpoints(m, cuts).expect("valid cuts")
            })
            .collect()
    }
}

impl TryFrom<Vec<usize>> for BlockStructure {
    type Error = Error;

    fn try_from(sizes: Vec<usize>) -> Result<Self> {
        Self::new(sizes)
    }
}

impl From<BlockStructure> for Vec<usize> {
    fn from(s: BlockStructure) -> Self {
        s.sizes
    }
}

impl fmt::Debug for BlockStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for BlockStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.sizes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for BlockStructure {
    type Err = Error;

    /// Accepts `3,1,1`, `[3,1,1]` or `<3,1,1>`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .trim_start_matches(['[', '<'])
            .trim_end_matches([']', '>']);
        if inner.trim().is_empty() {
            return Ok(Self::empty());
        }
        let sizes = inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad block size {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sizes)
    }
}

/// The finest block lower-triangular structure `s(M)`.
///
/// A cut after coordinate `e` is allowed iff `M([1,e],[e+1,m]) = 0`; the greedy
/// smallest-prefix rule takes every allowed cut.
pub fn block_structure(m: &Gf2Matrix) -> Result<BlockStructure> {
    if !m.is_invertible() {
        return Err(Error::Singular);
    }
    Ok(structure_of_pattern(m))
}

fn structure_of_pattern(m: &Gf2Matrix) -> BlockStructure {
    let dim = m.m;
    let mut upper_right = 0u32;
    let mut cuts = Vec::new();
    for e in 1..dim {
        upper_right |= m.rows[e - 1];
        if upper_right & range_mask(e, dim) == 0 {
            cuts.push(e);
        }
    }
    BlockStructure::from_breakpoints(dim, cuts).expect("cuts in range")
}

/// Reduces `M` to unit upper-triangular form with unit lower-triangular
/// factors on both sides: returns `(L1, U, L2)` with `U = L1 M L2`.
pub fn lt_normalize(m: &Gf2Matrix) -> Result<(Gf2Matrix, Gf2Matrix, Gf2Matrix)> {
    if !m.is_invertible() {
        return Err(Error::Singular);
    }
    let dim = m.m;
    let mut u = *m;
    let mut l1 = Gf2Matrix::identity(dim)?;
    let mut l2 = Gf2Matrix::identity(dim)?;
    for k in (0..dim).rev() {
        let diag = 1u32 << k;
        if u.rows[k] & diag == 0 {
            // The leading (k+1)x(k+1) block is invertible, so column k has a 1 above row k.
            let r = (0..k)
                .find(|&r| u.rows[r] & diag != 0)
                .ok_or(Error::Singular)?;
            u.rows[k] ^= u.rows[r];
            l1.rows[k] ^= l1.rows[r];
        }
        let mut left = u.rows[k] & low_mask(k);
        while left != 0 {
            let j = left.trailing_zeros() as usize;
            left &= left - 1;
            add_column(&mut u, k, j);
            add_column(&mut l2, k, j);
        }
    }
    debug_assert!(u.is_unit_upper());
    Ok((l1, u, l2))
}

/// Column `src` added into column `dst`.
fn add_column(a: &mut Gf2Matrix, src: usize, dst: usize) {
    for i in 0..a.m {
        a.rows[i] ^= (a.rows[i] >> src & 1) << dst;
    }
}

/// Splits a unit upper-triangular `U` at `S_l = m - s_l` into commuting
/// factors `(M1, M2)` with `U = M1 M2 = M2 M1`.
pub fn decompose_upper(u: &Gf2Matrix) -> Result<(Gf2Matrix, Gf2Matrix)> {
    if !u.is_unit_upper() {
        return Err(Error::NotUpperTriangular);
    }
    let s = structure_of_pattern(u);
    let dim = u.m;
    let split = dim - s.last().expect("m >= 1");
    let mut m1 = Gf2Matrix::identity(dim)?;
    let mut m2 = Gf2Matrix::identity(dim)?;
    for i in 0..split {
        m1.rows[i] = u.rows[i] & low_mask(split);
    }
    for i in split..dim {
        m2.rows[i] = u.rows[i] & range_mask(split, dim);
    }
    Ok((m1, m2))
}

pub fn is_member_blta(m: &Gf2Matrix, s: &BlockStructure) -> bool {
    if s.m() != m.m {
        return false;
    }
    let dim = m.m;
    let mut upper = 0u32;
    let mut row = 0;
    for cut in s.breakpoints() {
        while row < cut {
            upper |= m.rows[row];
            row += 1;
        }
        if upper & range_mask(cut, dim) != 0 {
            return false;
        }
    }
    m.is_invertible()
}

/// A group order kept as `odd * 2^pow2`. Serializes as the string `"21*2^28"`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GroupOrder {
    pub odd: BigUint,
    pub pow2: u32,
}

impl GroupOrder {
    pub fn new(value: BigUint) -> Self {
        if value.is_zero() {
            return GroupOrder { odd: value, pow2: 0 };
        }
        let pow2 = value.trailing_zeros().unwrap_or(0) as u32;
        GroupOrder {
            odd: value >> pow2,
            pow2,
        }
    }

    pub fn value(&self) -> BigUint {
        &self.odd << self.pow2
    }

    pub fn to_u128(&self) -> Option<u128> {
        self.value().to_u128()
    }

    pub fn times_pow2(&self, k: u32) -> Self {
        GroupOrder {
            odd: self.odd.clone(),
            pow2: self.pow2 + k,
        }
    }

    /// Exact quotient, `None` when `divisor` does not divide `self`.
    pub fn checked_div(&self, divisor: &GroupOrder) -> Option<GroupOrder> {
        if divisor.odd.is_zero() || divisor.pow2 > self.pow2 {
            return None;
        }
        let rem = &self.odd % &divisor.odd;
        if !rem.is_zero() {
            return None;
        }
        Some(GroupOrder {
            odd: &self.odd / &divisor.odd,
            pow2: self.pow2 - divisor.pow2,
        })
    }
}

impl fmt::Display for GroupOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.odd, self.pow2)
    }
}

impl FromStr for GroupOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("group order {s:?}"));
        let (odd, pow2) = match s.trim().split_once("*2^") {
            Some((o, p)) => (o.parse::<BigUint>().map_err(|_| bad())?, p.parse::<u32>().map_err(|_| bad())?),
            None => (s.trim().parse::<BigUint>().map_err(|_| bad())?, 0),
        };
        Ok(GroupOrder::new(odd).times_pow2(pow2))
    }
}

impl TryFrom<String> for GroupOrder {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GroupOrder> for String {
    fn from(g: GroupOrder) -> Self {
        g.to_string()
    }
}

/// `|GL(k, 2)|` in factored form.
pub fn gl_order(k: usize) -> GroupOrder {
    let mut odd = BigUint::one();
    for j in 1..=k {
        odd *= (BigUint::one() << j) - BigUint::one();
    }
    GroupOrder {
        odd,
        pow2: (k * k.saturating_sub(1) / 2) as u32,
    }
}

/// Number of invertible matrices with block pattern `s` (linear parts only;
/// multiply by `2^m` for the affine group).
pub fn blta_order(s: &BlockStructure) -> GroupOrder {
    let m = s.m();
    let mut odd = BigUint::one();
    let mut pow2 = 0u32;
    let mut diag_sq = 0;
    for &k in s.sizes() {
        let g = gl_order(k);
        odd *= g.odd;
        pow2 += g.pow2;
        diag_sq += k * k;
    }
    pow2 += ((m * m - diag_sq) / 2) as u32;
    GroupOrder { odd, pow2 }
}

/// Order of the affine group `BLTA(s)`, translations included.
pub fn blta_affine_order(s: &BlockStructure) -> GroupOrder {
    blta_order(s).times_pow2(s.m() as u32)
}

/// Structure whose breakpoints are the union of both inputs' breakpoints,
/// so that `BLTA(gro(a, b)) = BLTA(a) ∩ BLTA(b)`.
pub fn gro(a: &BlockStructure, b: &BlockStructure) -> Result<BlockStructure> {
    if a.m() != b.m() {
        return Err(Error::DimensionMismatch {
            expected: a.m(),
            actual: b.m(),
        });
    }
    let cuts = a.breakpoints().into_iter().chain(b.breakpoints());
    BlockStructure::from_breakpoints(a.m(), cuts)
}

/// Affine map `a -> M a + b` on `F_2^m`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct AffineMap {
    matrix: Gf2Matrix,
    shift: u32,
}

impl AffineMap {
    pub fn new(matrix: Gf2Matrix, shift: u32) -> Result<Self> {
        if !matrix.is_invertible() {
            return Err(Error::Singular);
        }
        if shift & !low_mask(matrix.m) != 0 {
            return Err(Error::Parse("shift has bits beyond m".into()));
        }
        Ok(AffineMap { matrix, shift })
    }

    pub fn linear(matrix: Gf2Matrix) -> Result<Self> {
        Self::new(matrix, 0)
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::new(Gf2Matrix::identity(m)?, 0)
    }

    pub fn translation(m: usize, shift: u32) -> Result<Self> {
        Self::new(Gf2Matrix::identity(m)?, shift)
    }

    pub fn matrix(&self) -> &Gf2Matrix {
        &self.matrix
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn dim(&self) -> usize {
        self.matrix.m
    }

    #[inline]
    pub fn apply(&self, a: u32) -> u32 {
        self.matrix.apply(a) ^ self.shift
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &AffineMap) -> Result<AffineMap> {
        let matrix = mat_mul(&self.matrix, &other.matrix)?;
        Ok(AffineMap {
            matrix,
            shift: self.matrix.apply(other.shift) ^ self.shift,
        })
    }

    pub fn inverse(&self) -> AffineMap {
        let inv = mat_inv(&self.matrix).expect("affine map matrix is invertible");
        AffineMap {
            shift: inv.apply(self.shift),
            matrix: inv,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.shift == 0 && self.matrix.is_identity()
    }
}

impl fmt::Debug for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AffineMap {{ shift: {}, matrix: {:?} }}", bits_to_string(self.shift, self.matrix.m), self.matrix)
    }
}

/// Matrix text followed by one shift line (`b_1` leftmost).
impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.matrix)?;
        writeln!(f, "{}", bits_to_string(self.shift, self.matrix.m))
    }
}

impl FromStr for AffineMap {
    type Err = Error;

    /// The shift line is optional and defaults to zero.
    fn from_str(s: &str) -> Result<Self> {
        let mut lines = non_empty_lines(s);
        let matrix = parse_matrix_lines(&mut lines)?;
        let shift = match lines.next() {
            Some(line) => parse_bit_line(line, matrix.m)?,
            None => 0,
        };
        if lines.next().is_some() {
            return Err(Error::Parse("trailing lines after shift".into()));
        }
        AffineMap::new(matrix, shift)
    }
}

/// Uniform element of `GL(k, 2)` by rejection, as row bitmasks.
pub fn sample_gl<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Gf2Matrix {
    loop {
        let rows: Vec<u32> = (0..k).map(|_| rng.gen::<u32>() & low_mask(k)).collect();
        let g = Gf2Matrix::from_rows(&rows).expect("k in range");
        if g.is_invertible() {
            return g;
        }
    }
}

/// Uniformly random element of the affine group `BLTA(s)`.
pub fn sample_blta<R: Rng + ?Sized>(s: &BlockStructure, rng: &mut R) -> Result<AffineMap> {
    let m = s.m();
    let mut out = Gf2Matrix::zero(m)?;
    let mut start = 0;
    for &k in s.sizes() {
        let block = sample_gl(k, rng);
        for i in 0..k {
            let below = if start == 0 { 0 } else { rng.gen::<u32>() & low_mask(start) };
            out.rows[start + i] = below | (block.rows[i] << start);
        }
        start += k;
    }
    let shift = rng.gen::<u32>() & low_mask(m);
    AffineMap::new(out, shift)
}

/// Uniform `M ∈ BLTA(s)` whose finest structure is exactly `s`.
pub fn sample_exact_structure<R: Rng + ?Sized>(s: &BlockStructure, rng: &mut R) -> Result<Gf2Matrix> {
    loop {
        let m = *sample_blta(s, rng)?.matrix();
        if structure_of_pattern(&m) == *s {
            return Ok(m);
        }
    }
}
