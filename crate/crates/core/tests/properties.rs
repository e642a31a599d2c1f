mod common;

use std::time::Instant;

use polar_automorph::automorphism::{apply_perm, automorphism_group, is_automorphism, perm_from_affine, AffineAutomorphism};
use polar_automorph::gf2::{
    blta_order, block_structure, gro, is_member_blta, mat_mul, sample_blta, sample_exact_structure, AffineMap,
    BlockStructure, Gf2Matrix,
};
use polar_automorph::invariance::{branch_output, commute_oracle, dec_aut_value, dec_group, equivalent, OracleVerdict};
use polar_automorph::monomial::{decreasing_closure, encode, InfoSet, Monomial, PolarCode};
use polar_automorph::sc::{classify_node, f_llr, f_llr_minsum, DecoderFlavor, NodeClass, ScDecoder};
use polar_automorph::sim::{correlation_metric, wilson_interval, AeDecoder};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use common::is_codeword;

/// Decreasing code from up to three random generators.
fn decreasing_code(m: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = PolarCode> {
    m.prop_flat_map(|m| (Just(m), prop::collection::vec(0u32..1 << m, 0..=3)))
        .prop_map(|(m, gens)| {
            let gens: Vec<Monomial> = gens.into_iter().map(|g| Monomial::new(m, g).unwrap()).collect();
            PolarCode::new(decreasing_closure(m, &gens).unwrap()).unwrap()
        })
}

fn gaussian_llrs(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d = Normal::new(1.0, 2.0).unwrap();
    (0..n).map(|_| d.sample(rng)).collect()
}

fn unit_lower(m: usize, rng: &mut ChaCha8Rng) -> Gf2Matrix {
    let rows: Vec<u32> = (0..m).map(|i| (rng.gen::<u32>() & ((1 << i) - 1)) | 1 << i).collect();
    Gf2Matrix::from_rows(&rows).unwrap()
}

/// Maximum-likelihood codeword by exhaustive correlation.
fn ml_decode(code: &PolarCode, y: &[f64]) -> Vec<u8> {
    let k = code.k();
    (0u32..1 << k)
        .map(|msg| {
            let bits: Vec<u8> = (0..k).map(|i| (msg >> i & 1) as u8).collect();
            encode(code, &bits).unwrap()
        })
        .max_by(|a, b| correlation_metric(a, y).total_cmp(&correlation_metric(b, y)))
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoding_is_linear(code in decreasing_code(1..=7), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<u8> = (0..code.k()).map(|_| rng.gen_range(0..2)).collect();
        let b: Vec<u8> = (0..code.k()).map(|_| rng.gen_range(0..2)).collect();
        let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let ca = encode(&code, &a).unwrap();
        let cb = encode(&code, &b).unwrap();
        let expect: Vec<u8> = ca.iter().zip(&cb).map(|(x, y)| x ^ y).collect();
        prop_assert_eq!(encode(&code, &sum).unwrap(), expect);
        prop_assert!(is_codeword(&code, &ca));
    }

    #[test]
    fn decoded_codeword_reencodes(code in decreasing_code(1..=8), seed: u64, flavor in prop_oneof![Just(DecoderFlavor::Exact), Just(DecoderFlavor::Minsum)]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = gaussian_llrs(code.n(), &mut rng);
        let out = ScDecoder::new(flavor).decode(&code, &y).unwrap();
        prop_assert_eq!(encode(&code, &out.info_bits(&code)).unwrap(), out.codeword);
    }

    #[test]
    fn noiseless_input_is_recovered(code in decreasing_code(1..=8), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let msg: Vec<u8> = (0..code.k()).map(|_| rng.gen_range(0..2)).collect();
        let cw = encode(&code, &msg).unwrap();
        let y: Vec<f64> = cw.iter().map(|&b| if b == 0 { 20.0 } else { -20.0 }).collect();
        prop_assert_eq!(ScDecoder::default().decode(&code, &y).unwrap().codeword, cw);
    }

    #[test]
    fn boxplus_rules(a in -30.0f64..30.0, b in -30.0f64..30.0) {
        let f = f_llr(a, b);
        prop_assert!((f - f_llr(b, a)).abs() < 1e-12);
        prop_assert!(f.abs() <= a.abs().min(b.abs()) + 1e-12);
        prop_assert!(f == 0.0 || f.signum() == a.signum() * b.signum());
        // Direct evaluation of log((1 + e^{a+b}) / (e^a + e^b)) where it is stable.
        if a.abs() < 15.0 && b.abs() < 15.0 {
            let direct = ((1.0 + (a + b).exp()) / (a.exp() + b.exp())).ln();
            prop_assert!((f - direct).abs() < 1e-9);
        }
        prop_assert_eq!(f_llr_minsum(a, b).abs(), a.abs().min(b.abs()));
    }

    #[test]
    fn lower_triangular_maps_are_invariant_automorphisms(code in decreasing_code(1..=8), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = unit_lower(code.m(), &mut rng);
        prop_assert!(is_automorphism(&l, code.info()));
        prop_assert!(polar_automorph::invariance::sc_invariant(&l, code.info()).unwrap());
    }

    #[test]
    fn automorphisms_preserve_the_code(code in decreasing_code(1..=7), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let aut = automorphism_group(code.info()).unwrap();
        let t = sample_blta(&aut, &mut rng).unwrap();
        let p = perm_from_affine(&t).unwrap();
        let msg: Vec<u8> = (0..code.k()).map(|_| rng.gen_range(0..2)).collect();
        let cw = encode(&code, &msg).unwrap();
        prop_assert!(is_codeword(&code, &apply_perm(&p, &cw).unwrap()));
    }

    #[test]
    fn structure_is_stable_under_lower_triangular_factors(m in 1usize..=8, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = {
            let gl = polar_automorph::gf2::sample_gl(m, &mut rng);
            block_structure(&gl).unwrap()
        };
        let x = sample_exact_structure(&s, &mut rng).unwrap();
        prop_assert_eq!(block_structure(&x).unwrap(), s.clone());
        let y = mat_mul(&mat_mul(&unit_lower(m, &mut rng), &x).unwrap(), &unit_lower(m, &mut rng)).unwrap();
        prop_assert_eq!(block_structure(&y).unwrap(), s);
    }

    #[test]
    fn gro_laws(a in prop::collection::vec(1usize..=3, 1..=4), seed: u64) {
        let m: usize = a.iter().sum();
        let a = BlockStructure::new(a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = block_structure(&polar_automorph::gf2::sample_gl(m, &mut rng)).unwrap();
        let g = gro(&a, &b).unwrap();
        prop_assert_eq!(&g, &gro(&b, &a).unwrap());
        prop_assert_eq!(gro(&a, &a).unwrap(), a.clone());
        prop_assert!(a.is_refined_by(&g) && b.is_refined_by(&g));
        // The intersection group: its elements are exactly those in both.
        let x = sample_blta(&g, &mut rng).unwrap();
        prop_assert!(is_member_blta(x.matrix(), &a) && is_member_blta(x.matrix(), &b));
        let ga = blta_order(&g).value();
        prop_assert!(blta_order(&a).value() % &ga == 0u32.into());
    }

    #[test]
    fn dec_group_is_maximal(code in decreasing_code(2..=8)) {
        let inv = dec_group(code.info()).unwrap();
        prop_assert!(dec_aut_value(&inv, code.info()).unwrap());
        let sizes = inv.sizes();
        for i in 0..sizes.len().saturating_sub(1) {
            let mut merged = sizes[..i].to_vec();
            merged.push(sizes[i] + sizes[i + 1]);
            merged.extend_from_slice(&sizes[i + 2..]);
            let coarser = BlockStructure::new(merged).unwrap();
            prop_assert!(!dec_aut_value(&coarser, code.info()).unwrap(), "{} is also invariant", coarser);
        }
    }

    #[test]
    fn ae_never_worse_than_sc(code in decreasing_code(3..=7), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let aut = automorphism_group(code.info()).unwrap();
        let mut ens = vec![AffineAutomorphism::identity(code.m()).unwrap()];
        for _ in 0..3 {
            ens.push(AffineAutomorphism::new(sample_blta(&aut, &mut rng).unwrap(), &code).unwrap());
        }
        let y = gaussian_llrs(code.n(), &mut rng);
        let sc = ScDecoder::default().decode(&code, &y).unwrap().codeword;
        let ae = AeDecoder::new(DecoderFlavor::default()).decode(&code, &ens, &y).unwrap();
        prop_assert!(correlation_metric(ae.codeword(), &y) >= correlation_metric(&sc, &y));
        prop_assert!(ae.candidates.iter().all(|c| is_codeword(&code, c)));
    }

    #[test]
    fn wilson_brackets_estimate(frames in 1usize..100_000, frac in 0.0f64..=1.0) {
        let errors = ((frames as f64) * frac) as usize;
        let (lo, hi) = wilson_interval(errors, frames);
        let p = errors as f64 / frames as f64;
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
    }
}

fn special_node_codes() -> Vec<PolarCode> {
    (1..=4)
        .flat_map(common::all_decreasing)
        .filter(|info| classify_node(info) != NodeClass::Other)
        .map(|info| common::code(&info))
        .collect()
}

#[test]
fn min_sum_sc_is_ml_on_special_nodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut dec = ScDecoder::new(DecoderFlavor::Minsum);
    for code in special_node_codes() {
        for _ in 0..40 {
            let y = gaussian_llrs(code.n(), &mut rng);
            let sc = dec.decode(&code, &y).unwrap().codeword;
            assert_eq!(sc, ml_decode(&code, &y), "{:?}", code.info().z_labels());
        }
    }
}

#[test]
fn special_nodes_commute_with_every_automorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut dec = ScDecoder::default();
    for code in special_node_codes() {
        let aut = automorphism_group(code.info()).unwrap();
        for _ in 0..20 {
            let p = perm_from_affine(&sample_blta(&aut, &mut rng).unwrap()).unwrap();
            let y = gaussian_llrs(code.n(), &mut rng);
            let direct = apply_perm(&p, &dec.decode(&code, &y).unwrap().codeword).unwrap();
            let permuted = dec.decode(&code, &apply_perm(&p, &y).unwrap()).unwrap().codeword;
            assert_eq!(direct, permuted);
        }
    }
}

/// Looks for an input on which the two branches differ, seeded by oracle
/// counterexamples for the relative maps in both orders.
fn find_witness(code: &PolarCode, t1: &AffineMap, t2: &AffineMap, rng: &mut ChaCha8Rng) -> bool {
    let p1 = perm_from_affine(t1).unwrap();
    let p2 = perm_from_affine(t2).unwrap();
    let mut dec = ScDecoder::default();
    let mut differs = |y: &[f64]| {
        branch_output(code, &p1, y, &mut dec).unwrap() != branch_output(code, &p2, y, &mut dec).unwrap()
    };
    for d in [t1.inverse().compose(t2).unwrap(), t2.compose(&t1.inverse()).unwrap()] {
        if let OracleVerdict::CounterExample { y, .. } = commute_oracle(&d, code.info(), 1000, rng).unwrap() {
            for p in [&p1, &p2] {
                for q in [p.clone(), p.inverse()] {
                    if differs(&y) || differs(&apply_perm(&q, &y).unwrap()) {
                        return true;
                    }
                }
            }
        }
    }
    (0..500).any(|_| differs(&gaussian_llrs(code.n(), rng)))
}

#[test]
fn equivalence_matches_branch_outputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = [0usize; 2];
    for m in 2..=4 {
        for info in common::all_decreasing(m) {
            let code = common::code(&info);
            let aut = automorphism_group(&info).unwrap();
            for _ in 0..6 {
                let t1 = sample_blta(&aut, &mut rng).unwrap();
                let t2 = sample_blta(&aut, &mut rng).unwrap();
                let eq = equivalent(&t1, &t2, &info).unwrap();
                let witness = find_witness(&code, &t1, &t2, &mut rng);
                assert_eq!(eq, !witness, "I={:?}\n{t1}\n{t2}", info.z_labels());
                checked[usize::from(eq)] += 1;
            }
        }
    }
    assert!(checked[0] > 20 && checked[1] > 20, "{checked:?}");
}

#[test]
fn dec_group_is_fast_at_m8() {
    let code = PolarCode::from_i_min_z(8, &[31, 57]).unwrap();
    let start = Instant::now();
    let g = dec_group(code.info()).unwrap();
    assert_eq!(g.sizes(), &[3, 1, 1, 1, 1, 1]);
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn invariant_sets_are_unchanged_by_relabelling() {
    // Same information set given by generators or explicitly.
    let a = PolarCode::from_i_min_z(7, &[23, 25]).unwrap();
    let b = PolarCode::new(InfoSet::from_z(7, a.info().z_labels()).unwrap()).unwrap();
    assert_eq!(dec_group(a.info()).unwrap(), dec_group(b.info()).unwrap());
}
