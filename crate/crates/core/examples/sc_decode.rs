//! Encode a random message, send it over BPSK/AWGN and decode with SC.

use polar_automorph::monomial::{encode, PolarCode};
use polar_automorph::sc::sc_decode;
use polar_automorph::sim::awgn_llr;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> polar_automorph::Result<()> {
    let code = PolarCode::from_i_min_z(6, &[24])?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for ebn0 in [1.0, 2.0, 3.0, 4.0] {
        let mut errors = 0;
        let frames = 2000;
        for _ in 0..frames {
            let msg: Vec<u8> = (0..code.k()).map(|_| rng.gen_range(0..2)).collect();
            let cw = encode(&code, &msg)?;
            let y = awgn_llr(&cw, ebn0, code.rate(), &mut rng)?;
            let out = sc_decode(&code, y.as_slice())?;
            errors += usize::from(out.codeword != cw);
        }
        println!("(64,32) Eb/N0 {ebn0:.1} dB: BLER {:.4}", errors as f64 / frames as f64);
    }
    Ok(())
}
