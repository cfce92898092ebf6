//! One skew-normal law fitted to left-censored data, next to the censored
//! normal fit.
//!
//! Run with `cargo run --release --example censored_fit`.

use censmix::analysis::{simulate, CensorScheme, MissingScheme, SimulationDesign};
use censmix::censored::{fit_censored_normal, fit_msnc};
use censmix::esn::EsnParams;
use censmix::linalg::{Mat, Vector};
use censmix::mixture::{Family, MixtureModel};

fn main() -> censmix::Result<()> {
    let truth = EsnParams::skew_normal(
        Vector::from_row_slice(&[1.0, 2.0]),
        Mat::from_row_slice(2, 2, &[2.0, 0.6, 0.6, 1.0]),
        Vector::from_row_slice(&[3.0, -1.0]),
    )?;
    let model = MixtureModel::new(vec![1.0], vec![truth.clone()], Family::SkewNormal, false)?;
    let data = simulate(&SimulationDesign {
        model,
        n: 800,
        censoring: CensorScheme::LeftQuantile { rate: 0.15 },
        missing: MissingScheme::None,
        seed: 3,
    })?;
    let censored = data.samples.iter().filter(|s| s.censored.iter().any(|&c| c)).count();
    println!("n = {}, rows with a censored cell: {censored}", data.samples.len());

    let start = EsnParams::skew_normal(Vector::zeros(2), Mat::identity(2, 2), Vector::from_row_slice(&[1.0, 1.0]))?;
    let sn = fit_msnc(&data.samples, &start, 1e-8, 2000, false)?;
    let nf = fit_censored_normal(&data.samples, &start.mu, &start.sigma, 1e-8, 2000)?;

    println!("skew-normal fit: loglik {:.4} after {} iterations", sn.loglik, sn.iterations);
    println!("  mu     {}   (true {})", show(&sn.params.mu), show(&truth.mu));
    println!("  lambda {}   (true {})", show(&sn.params.lambda), show(&truth.lambda));
    println!("  Sigma  {}", show_mat(&sn.params.sigma));
    println!("normal fit:      loglik {:.4} after {} iterations", nf.loglik, nf.iterations);
    println!("  mu     {}", show(&nf.params.mu));
    println!("  Sigma  {}", show_mat(&nf.params.sigma));
    println!("first log-likelihoods of the skew fit: {:?}", &sn.trace[..5.min(sn.trace.len())]);
    Ok(())
}

fn show(v: &Vector) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(", "))
}

fn show_mat(m: &Mat) -> String {
    let rows: Vec<String> = m.row_iter().map(|r| show(&r.transpose())).collect();
    format!("[{}]", rows.join(", "))
}
