//! A complete small-data run through the harness: initial data of size
//! epsilon, time-weighted energies, decay fits and the output files.

use visco3d::harness::{run, RunConfig};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

fn main() -> visco3d::Result<()> {
    let out = std::env::temp_dir().join("visco3d-small-data-run");
    let cfg = RunConfig { n: 16, t_end: 5.0, dt: 2e-2, output_dir: out.clone(), ..RunConfig::default() };
    let report = run(&cfg)?;
    println!("{}", report.text);
    if let Some(s) = report.summary {
        println!("E_total {:.3e} -> {:.3e}, min rho~ {:.6}", s.e_total_initial, s.e_total, s.min_rho_tilde);
        println!("decay exponent of ||grad u||^2: {:?}", s.decay_exponents.dissipation);
    }
    println!("outputs in {}", out.display());
    Ok(())
}
