//! Affine automorphisms acting on code positions.
//!
//! `(M, b)` sends position `z` to `z'` with `a(z') = M a(z) + b`. Applying a
//! permutation `p` to a vector gives `out[i] = v[p(i)]`.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{is_member_blta, sample_blta, AffineMap, BlockStructure, Gf2Matrix};
use crate::monomial::{is_decreasing, InfoSet, PolarCode, MAX_CODE_DIM};

/// Bijection on `0..n`, stored as its forward table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    table: Vec<u32>,
}

impl Permutation {
    pub fn new(table: Vec<u32>) -> Result<Self> {
        let n = table.len();
        let mut seen = vec![false; n];
        for &t in &table {
            let t = t as usize;
            if t >= n || seen[t] {
                return Err(Error::NotAPermutation(format!("entry {t} repeated or out of range")));
            }
            seen[t] = true;
        }
        Ok(Permutation { table })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            table: (0..n as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.table[i] as usize
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.table.len()];
        for (i, &t) in self.table.iter().enumerate() {
            inv[t as usize] = i as u32;
        }
        Permutation { table: inv }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(Permutation {
            table: other.table.iter().map(|&i| self.table[i as usize]).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.table.iter().enumerate().all(|(i, &t)| i as u32 == t)
    }
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = Error;

    fn try_from(table: Vec<u32>) -> Result<Self> {
        Self::new(table)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Self {
        p.table
    }
}

pub fn perm_from_affine(t: &AffineMap) -> Result<Permutation> {
    let m = t.dim();
    if m > MAX_CODE_DIM {
        return Err(Error::UnsupportedDimension(m));
    }
    let top = (1u32 << m) - 1;
    let table = (0..=top).map(|z| top - t.apply(top - z)).collect();
    Ok(Permutation { table })
}

/// `out[i] = v[p(i)]`.
pub fn apply_perm<T: Copy>(p: &Permutation, v: &[T]) -> Result<Vec<T>> {
    if p.len() != v.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            actual: v.len(),
        });
    }
    Ok(p.table.iter().map(|&i| v[i as usize]).collect())
}

/// Same as [`apply_perm`], writing into `out`.
pub fn apply_perm_into<T: Copy>(p: &Permutation, v: &[T], out: &mut [T]) {
    debug_assert_eq!(p.len(), v.len());
    for (o, &i) in out.iter_mut().zip(&p.table) {
        *o = v[i as usize];
    }
}

/// Expands `g(M x)` over GF(2) with `x_i^2 = x_i`; returns the monomials
/// (exponent bitmasks) with odd coefficient.
pub fn substitute(g: u32, matrix: &Gf2Matrix) -> Vec<u32> {
    let mut poly: HashSet<u32> = HashSet::from([0]);
    let mut vars = g;
    while vars != 0 {
        let i = vars.trailing_zeros() as usize;
        vars &= vars - 1;
        let form = matrix.rows()[i];
        let mut next: HashSet<u32> = HashSet::with_capacity(poly.len() * 2);
        for &mono in &poly {
            let mut terms = form;
            while terms != 0 {
                let j = terms.trailing_zeros();
                terms &= terms - 1;
                let prod = mono | 1 << j;
                if !next.insert(prod) {
                    next.remove(&prod);
                }
            }
        }
        poly = next;
    }
    let mut out: Vec<u32> = poly.into_iter().collect();
    out.sort_unstable();
    out
}

/// Whether `a -> M a` preserves `C(I)`. Translations never matter for
/// decreasing codes.
pub fn is_automorphism(matrix: &Gf2Matrix, info: &InfoSet) -> bool {
    if matrix.dim() != info.m() || !matrix.is_invertible() {
        return false;
    }
    info.iter_a()
        .all(|g| substitute(g, matrix).into_iter().all(|f| info.contains_a(f)))
}

/// Identity plus a one at `(j, j + 1)`.
fn adjacent_transvection(m: usize, j: usize) -> Gf2Matrix {
    let mut e = Gf2Matrix::identity(m).expect("m in range");
    e.set(j, j + 1, true);
    e
}

/// The structure `s*` with `Aut_affine(C(I)) = BLTA(s*)`.
pub fn automorphism_group(info: &InfoSet) -> Result<BlockStructure> {
    if !is_decreasing(info) {
        return Err(Error::NotDecreasing);
    }
    let m = info.m();
    if m == 0 {
        return Ok(BlockStructure::empty());
    }
    let cuts = (1..m).filter(|&j| !is_automorphism(&adjacent_transvection(m, j), info));
    let s = BlockStructure::from_breakpoints(m, cuts)?;
    debug_assert!(spot_check_group(info, &s, 4));
    Ok(s)
}

fn spot_check_group(info: &InfoSet, s: &BlockStructure, samples: usize) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..samples).all(|_| {
        let t = sample_blta(s, &mut rng).expect("valid structure");
        is_automorphism(t.matrix(), info)
    })
}

/// An affine map checked to be an automorphism of a code, with its position
/// permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineAutomorphism {
    map: AffineMap,
    perm: Permutation,
    inverse: Permutation,
}

impl AffineAutomorphism {
    pub fn new(map: AffineMap, code: &PolarCode) -> Result<Self> {
        if map.dim() != code.m() {
            return Err(Error::DimensionMismatch {
                expected: code.m(),
                actual: map.dim(),
            });
        }
        if !is_automorphism(map.matrix(), code.info()) {
            return Err(Error::NotAutomorphism);
        }
        Ok(Self::new_trusted(map))
    }

    /// Skips the automorphism check, for maps sampled from a known subgroup.
    pub(crate) fn new_trusted(map: AffineMap) -> Self {
        let perm = perm_from_affine(&map).expect("dimension checked by caller");
        let inverse = perm.inverse();
        AffineAutomorphism { map, perm, inverse }
    }

    pub fn identity(m: usize) -> Result<Self> {
        Ok(Self::new_trusted(AffineMap::identity(m)?))
    }

    pub fn map(&self) -> &AffineMap {
        &self.map
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn inverse_perm(&self) -> &Permutation {
        &self.inverse
    }

    pub fn m(&self) -> usize {
        self.map.dim()
    }

    pub fn is_in(&self, s: &BlockStructure) -> bool {
        is_member_blta(self.map.matrix(), s)
    }
}
