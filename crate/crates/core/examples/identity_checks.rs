//! Pass/fail table of the algebraic identities on seeded random fields.

use visco3d::identities::identity_table;

fn main() -> visco3d::Result<()> {
    for row in identity_table(2024, 10)? {
        println!(
            "{:<24} n = {:>2}  residual {:.2e}  limit {:.0e}  {}",
            row.name,
            row.grid,
            row.residual,
            row.threshold,
            if row.pass { "pass" } else { "FAIL" }
        );
    }
    Ok(())
}
