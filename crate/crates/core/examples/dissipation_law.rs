//! Energy dissipation law d/dt E_phys = -mu ||grad u||^2, checked along a
//! short run at two step sizes.

use visco3d::harness::{simulate, RunConfig};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

fn main() -> visco3d::Result<()> {
    for dt in [4e-3, 2e-3] {
        let cfg =
            RunConfig { n: 16, t_end: 0.5, dt, adaptive: false, snapshot_every: 1, band: 2, ..RunConfig::default() };
        let sim = simulate(&cfg)?;
        let worst = sim.dissipation.iter().map(|d| d.relative).fold(0.0, f64::max);
        println!("dt {dt:.0e}: max relative residual {worst:.3e}");
    }
    Ok(())
}
