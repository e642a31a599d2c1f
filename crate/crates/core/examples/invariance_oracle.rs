//! Cross-checks the structural invariance decision against brute-force probing
//! of the SC decoder, for every block structure inside Aut of a small code.

use polar_automorph::automorphism::automorphism_group;
use polar_automorph::gf2::{sample_exact_structure, AffineMap, BlockStructure};
use polar_automorph::invariance::{commute_oracle, dec_aut};
use polar_automorph::monomial::PolarCode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> polar_automorph::Result<()> {
    let code = PolarCode::from_i_min_z(5, &[7, 9])?;
    let aut = automorphism_group(code.info())?;
    println!("(n,K) = ({},{}), Aut = BLTA({aut})", code.n(), code.k());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for s in BlockStructure::all(code.m()).into_iter().filter(|s| aut.is_refined_by(s)) {
        let decided = dec_aut(&s, code.info())?.value;
        let mut broken = 0;
        for _ in 0..8 {
            let m = sample_exact_structure(&s, &mut rng)?;
            let map = AffineMap::new(m, rng.gen_range(0..code.n() as u32))?;
            if !commute_oracle(&map, code.info(), 500, &mut rng)?.commutes() {
                broken += 1;
            }
        }
        println!("{:<14} decided {:<5}  oracle counterexamples {broken}/8", s.to_string(), decided);
    }
    Ok(())
}
