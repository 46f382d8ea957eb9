use qcs_core::{experiment, solvers, Algorithm, SolverConfig};

fn main() -> Result<(), qcs_core::Error> {
    let p = experiment::gen_problem(256, 128, 5, 7)?; // n, m, k, seed
    let quantizer = experiment::quantizer_for(3, 3.0)?; // 3 bits, alpha = 3
    let y = quantizer.quantize(&p.clean_measurements);

    let cfg = SolverConfig::for_algorithm(Algorithm::Qiht, 5);
    let out = solvers::run(Algorithm::Qiht, &p.phi, &y, &quantizer, &cfg)?;
    println!("RSNR {:.1} dB in {} iterations",
             experiment::rsnr(&out.estimate, &p.x_true), out.iterations_run);
    Ok(())
}
