//! Group sizes for the three reference codes: automorphism group, SC-invariant
//! group, and the [2,1,...,1] baseline that holds for every decreasing code.

use polar_automorph::automorphism::automorphism_group;
use polar_automorph::gf2::{blta_order, BlockStructure};
use polar_automorph::invariance::dec_group;
use polar_automorph::monomial::PolarCode;

fn main() -> polar_automorph::Result<()> {
    let rows: [(usize, &[u64]); 3] = [(8, &[31, 57]), (7, &[23, 25]), (6, &[24])];
    println!("{:<10} {:<10} {:<14} {:<16} {:>12} {:>10}", "(n,K)", "I_min", "aut", "inv", "|inv|", "baseline");
    for (m, i_min) in rows {
        let code = PolarCode::from_i_min_z(m, i_min)?;
        let aut = automorphism_group(code.info())?;
        let inv = dec_group(code.info())?;
        let mut base = vec![2];
        base.resize(m - 1, 1);
        let base = BlockStructure::new(base)?;
        println!(
            "{:<10} {:<10} {:<14} {:<16} {:>12} {:>10}",
            format!("({},{})", code.n(), code.k()),
            format!("{i_min:?}"),
            aut.to_string(),
            inv.to_string(),
            blta_order(&inv).to_string(),
            blta_order(&base).to_string(),
        );
    }
    Ok(())
}
