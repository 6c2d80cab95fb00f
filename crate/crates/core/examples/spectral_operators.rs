//! Transforms, Fourier multipliers, Leray projection and dealiasing on a
//! periodic grid.

use visco3d::spectral::{Grid, ScalarField, VectorField};

fn main() -> visco3d::Result<()> {
    let grid = Grid::periodic(16)?;

    // cos(2 x1): |k| = 2, so Lambda^{-1} halves it and lap^{-1} divides by -4
    let f = ScalarField::from_fn(&grid, |x| (2.0 * x[0]).cos());
    let half = grid.riesz(&f, -1.0)?;
    let quarter = grid.inv_laplacian(&f)?;
    println!("|Lambda^-1 f|_inf = {:.6}", half.max_abs());
    println!("|lap^-1 f|_inf    = {:.6}", quarter.max_abs());

    // gradient plus a divergence-free part; P keeps only the latter
    let v = VectorField::from_fn(&grid, |x| {
        let g = (x[0] + x[2]).cos();
        [g + x[1].sin(), 0.0, g]
    });
    let pv = grid.leray_project(&v);
    println!("|div v|_inf  = {:.3e}", grid.div(&v).max_abs());
    println!("|div Pv|_inf = {:.3e}", grid.div(&pv).max_abs());
    println!("|Pv - (sin x2, 0, 0)|_inf = {:.3e}", pv[0].sub(&ScalarField::from_fn(&grid, |x| x[1].sin())).max_abs());

    // the 2/3 rule keeps |k_i| <= cutoff and zeroes the rest
    let high = ScalarField::from_fn(&grid, |x| (7.0 * x[1]).sin());
    println!(
        "dealias cutoff {}; |dealias(sin 7 x2)|_inf = {:.3e}",
        grid.dealias_cutoff(),
        grid.dealias(&high).max_abs()
    );

    let rt = grid.inverse(&grid.forward(&f));
    println!("round trip error {:.3e}", rt.sub(&f).max_abs());
    Ok(())
}
