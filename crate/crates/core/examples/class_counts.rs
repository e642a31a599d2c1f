//! How many automorphisms are really different under SC decoding, for the
//! (256,128) code. Compares the computed invariant group with the baseline.

use polar_automorph::gf2::BlockStructure;
use polar_automorph::invariance::{count_classes, count_classes_with, EquivClassSummary};
use polar_automorph::monomial::PolarCode;

fn show(summary: &EquivClassSummary) -> String {
    summary.classes().map_or_else(|| summary.class_count.to_string(), |c| c.to_string())
}

fn main() -> polar_automorph::Result<()> {
    let code = PolarCode::from_i_min_z(8, &[31, 57])?;
    let full = count_classes(code.info())?;
    let baseline = count_classes_with(code.info(), &BlockStructure::new(vec![2, 1, 1, 1, 1, 1, 1])?)?;
    println!("Aut = BLTA({}), invariant group BLTA({})", full.aut_structure, full.inv_structure);
    println!("classes with the baseline [2,1,...,1]: {}", show(&baseline));
    println!("classes with the computed group:     {}", show(&full));
    Ok(())
}
