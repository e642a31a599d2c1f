//! Walks the recursive invariance decision for the (16,11) example code with s = [3,1] and
//! prints the call tree.

use polar_automorph::gf2::{gro, BlockStructure};
use polar_automorph::invariance::{dec_aut, dec_group, TraceNode};
use polar_automorph::monomial::PolarCode;

fn print_node(node: &TraceNode, depth: usize) {
    println!(
        "{:indent$}s={} I={:?} -> {} ({:?})",
        "",
        node.structure,
        node.info_z,
        node.verdict,
        node.branch,
        indent = 2 * depth
    );
    for child in &node.children {
        print_node(child, depth + 1);
    }
}

fn main() -> polar_automorph::Result<()> {
    let code = PolarCode::from_info_z(4, &[3, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15])?;
    let s = BlockStructure::new(vec![3, 1])?;
    let verdict = dec_aut(&s, code.info())?;
    print_node(&verdict.trace, 0);
    let inv = dec_group(code.info())?;
    println!("invariant group: {inv}");
    println!("gro([2,1,1],[3,1]) = {}", gro(&BlockStructure::new(vec![2, 1, 1])?, &s)?);
    Ok(())
}
