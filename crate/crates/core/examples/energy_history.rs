//! Sobolev norms, energy snapshots and the running time-weighted energies
//! along a short run, with the interpolation check.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use visco3d::energy::{check_interpolation, snapshot, sobolev_norm, EnergyHistory};
use visco3d::integrator::{step, StepperConfig};
use visco3d::model::{effective_tensor, ModelParams, State};
use visco3d::spectral::{Grid, ScalarField};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

fn main() -> visco3d::Result<()> {
    let grid = Grid::periodic(16)?;
    let f = ScalarField::from_fn(&grid, |x| x[0].cos());
    // |k| = 1: (1 + 1)^3 = 8 times the L2 norm squared
    println!(
        "||cos x1||_L2 = {:.6}, ||Lambda^-1 cos x1||_H3 = {:.6}",
        sobolev_norm(&grid, &f, 0.0, 0.0)?,
        sobolev_norm(&grid, &f, -1.0, 3.0)?
    );

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut state = State::random(&grid, &mut rng, 2, 1e-2);
    let params = ModelParams::default();
    let cfg = StepperConfig { dt: 2e-2, ..StepperConfig::default() };
    let mut history = EnergyHistory::new();
    for k in 0..=100 {
        if k % 20 == 0 {
            let rec = history.push(snapshot(&grid, &state, &effective_tensor(&state), &params, 0.25)?)?;
            println!(
                "t {:5.2}  E {:.3e}  E_w {:.3e}  E_s {:.3e}  E_a {:.3e}  E_total {:.3e}",
                rec.t, rec.e, rec.e_w, rec.e_s, rec.e_a, rec.e_total
            );
        }
        state = step(&grid, &state, &params, &cfg)?;
    }
    let report = check_interpolation(&history);
    println!("max E_w / sqrt(E E_s) = {:.3} (constant {})", report.max_ratio, report.c_equiv);
    Ok(())
}
