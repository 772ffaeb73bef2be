//! Unitary transfer operator of a circle map: Cesàro averages of the
//! constant function, fixed points and the dissipativity verdict.

use focal_lab::focal::ReturnMap;
use focal_lab::transfer::{dissipativity_verdict, TransferOperator, VerdictThresholds};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps = 0.5;
    let map = ReturnMap::sine_map(1024, eps);
    let op = TransferOperator::new(&map, 8)?;
    println!("correlations ⟨U^ν 1, 1⟩:");
    for nu in 0..=8 {
        println!("  ν = {nu}: {:.6}", op.correlation(nu)?);
    }
    let r = dissipativity_verdict(&map, 40, &VerdictThresholds::default())?;
    for fp in &r.fixed_points {
        println!("fixed point {:.6}  multiplier {:.6}  {:?}", fp.angle, fp.multiplier, fp.kind);
    }
    let last = r.t.len() - 1;
    println!("B(40) = {:.6}, |S_40 1| = {:.6}, verdict {:?}", r.b[last], r.s_norm[last], r.verdict);
    let rot = ReturnMap::rotation(1024, 1.0);
    let r = dissipativity_verdict(&rot, 40, &VerdictThresholds::default())?;
    println!("rotation: B(40) = {:.6}, verdict {:?}", r.b[r.b.len() - 1], r.verdict);
    Ok(())
}
