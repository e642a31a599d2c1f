//! Builds codes three ways (generators, explicit set, BEC ranking) and prints
//! both labelings.

use polar_automorph::monomial::{bec_construct, is_decreasing, CodeSpec, PolarCode};

fn main() -> polar_automorph::Result<()> {
    let code = PolarCode::from_i_min_z(4, &[3, 5])?;
    println!("closure of {{3,5}} at m=4: K={} z={:?}", code.k(), code.info().z_labels());
    println!("  a-labels {:?}", code.info().a_labels());

    let bec = bec_construct(6, 32, 0.5)?;
    println!("BEC(0.5) (64,32) decreasing: {}", is_decreasing(&bec));

    let spec = CodeSpec::from_json(r#"{"m": 7, "i_min_z": [23, 25]}"#)?;
    let resolved = spec.resolve()?;
    println!("from JSON: ({},{})", resolved.n(), resolved.k());
    Ok(())
}
