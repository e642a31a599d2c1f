//! BLER of the (256,128) code with plain SC, AE-8 over distinct classes, and
//! AE-8 drawn only from the SC-invariant group (which cannot help).
//!
//! Run in release mode: `cargo run --release --example ae_simulation`.

use polar_automorph::monomial::CodeSpec;
use polar_automorph::sc::DecoderFlavor;
use polar_automorph::sim::{run_bler, EnsembleMode, SimConfig};

fn main() -> polar_automorph::Result<()> {
    let frames: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3000);
    for (t, mode) in [
        (1, EnsembleMode::DistinctClasses),
        (8, EnsembleMode::InvariantOnly),
        (8, EnsembleMode::DistinctClasses),
    ] {
        let cfg = SimConfig {
            code: CodeSpec {
                m: 8,
                i_min_z: Some(vec![31, 57]),
                info_z: None,
                bec: None,
            },
            t,
            mode,
            ebn0_db: vec![2.0, 2.5, 3.0],
            max_frames: frames,
            max_errors: 100,
            seed: 1,
            flavor: DecoderFlavor::default(),
            threads: None,
        };
        let report = run_bler(&cfg)?;
        for p in &report.points {
            println!(
                "t={t} {:<17} {:.1} dB  BLER {:.4}  [{:.4}, {:.4}]  ({} / {})",
                mode.to_string(),
                p.ebn0_db, p.bler, p.ci_lo, p.ci_hi, p.errors, p.frames
            );
        }
    }
    Ok(())
}
