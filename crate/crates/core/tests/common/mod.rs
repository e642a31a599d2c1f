#![allow(dead_code)]

use polar_automorph::monomial::{is_decreasing, InfoSet, PolarCode};

/// Every decreasing information set of dimension `m` (brute force, m <= 4).
pub fn all_decreasing(m: usize) -> Vec<InfoSet> {
    let n = 1usize << m;
    assert!(n <= 16);
    (0u32..1 << n)
        .filter_map(|mask| {
            let info = InfoSet::from_a(m, (0..n as u32).filter(|a| mask >> a & 1 == 1)).unwrap();
            is_decreasing(&info).then_some(info)
        })
        .collect()
}

pub fn code(info: &InfoSet) -> PolarCode {
    PolarCode::new(info.clone()).unwrap()
}

/// Codeword membership: `c G_m` (G_m is an involution) vanishes on frozen positions.
pub fn is_codeword(code: &PolarCode, c: &[u8]) -> bool {
    let mut u = c.to_vec();
    polar_automorph::monomial::polar_transform(&mut u);
    u.iter().zip(code.info_mask()).all(|(&b, &info)| info || b == 0)
}
