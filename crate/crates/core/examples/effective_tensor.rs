//! The effective tensor G = rho~ F F^T - I, its evolution operator, and the
//! structural residuals of generic versus flow-map initial data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use visco3d::identities::check_g_derivation;
use visco3d::model::{effective_tensor, flow_map_state, rhs_g, structure_residuals, State};
use visco3d::spectral::{random, Grid};

fn main() -> visco3d::Result<()> {
    let grid = Grid::periodic(16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let band = random::third_band(&grid);

    let state = State::random(&grid, &mut rng, band, 1e-2);
    let g = effective_tensor(&state);
    println!("|G|_inf = {:.3e}, |G - G^T|_inf = {:.1e}", g.max_abs(), g.sub(&g.transpose()).max_abs());

    let dg = rhs_g(&grid, &state.u, &g);
    println!("|G_t|_inf = {:.3e}", dg.max_abs());
    println!("d/dt(rho~ F F^T) vs G_t: relative gap {:.1e}", check_g_derivation(&grid, &state)?);

    let generic = structure_residuals(&grid, &state);
    println!("generic data:  {generic:?}");

    let psi = random::random_vector(&grid, &mut rng, band).scale(1e-3);
    let mapped = flow_map_state(&grid, &psi)?;
    println!("flow-map data: {:?}", structure_residuals(&grid, &mapped));
    Ok(())
}
