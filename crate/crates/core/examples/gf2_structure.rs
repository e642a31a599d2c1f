//! Block structure of a random invertible matrix, its normal form, and the
//! group orders that go with it.

use polar_automorph::gf2::{blta_affine_order, blta_order, block_structure, lt_normalize, sample_gl, BlockStructure};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> polar_automorph::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = sample_gl(5, &mut rng);
    let s = block_structure(&m)?;
    let (l1, u, l2) = lt_normalize(&m)?;
    println!("M =\n{m}s(M) = {s}\nL1 =\n{l1}U =\n{u}L2 =\n{l2}");
    for sizes in [vec![5], vec![2, 3], vec![1, 1, 1, 1, 1]] {
        let s = BlockStructure::new(sizes)?;
        println!("|BLTA({s})| = {} linear, {} affine", blta_order(&s), blta_affine_order(&s));
    }
    Ok(())
}
