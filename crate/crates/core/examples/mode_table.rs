//! Lowest modes of the golden rectangle and a Weyl-law check.

use point_billiard::basis::{BilliardSpec, ModeTable, Point};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = BilliardSpec::golden();
    let table = ModeTable::lowest(spec, 5000)?;

    println!("{:>5} {:>4} {:>4} {:>12}", "n", "mx", "my", "energy");
    for m in &table.modes()[..10] {
        println!("{:>5} {:>4} {:>4} {:>12.6}", m.index, m.mx, m.my, m.energy);
    }

    let e = table.cutoff_energy();
    let smooth = spec.weyl_density() * e;
    println!("\n{} modes below {e:.1}; leading Weyl term predicts {smooth:.1}", table.len());
    println!("mean spacing 1/ρ = {:.6}", spec.mean_spacing());

    let p = Point::new(0.3137, 0.5279);
    println!("φ_1({}, {}) = {:.6}", p.x, p.y, table.eigenfunction(0, &p)?);
    Ok(())
}
