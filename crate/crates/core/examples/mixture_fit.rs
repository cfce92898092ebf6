//! Two-component skew-normal mixture on censored data, with several EM
//! starts.
//!
//! Run with `cargo run --release --example mixture_fit`.

use censmix::analysis::{align_to_truth, simulate, CensorScheme, MissingScheme, SimulationDesign};
use censmix::esn::EsnParams;
use censmix::linalg::{Mat, Vector};
use censmix::mixture::{fit_fm_msnc, Family, FitConfig, MixtureModel};

fn main() -> censmix::Result<()> {
    let c1 = EsnParams::skew_normal(
        Vector::from_row_slice(&[-3.0, -4.0]),
        Mat::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 4.5]),
        Vector::from_row_slice(&[-2.0, 2.0]),
    )?;
    let c2 = EsnParams::skew_normal(
        Vector::from_row_slice(&[2.0, 2.0]),
        Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.5]),
        Vector::from_row_slice(&[-3.0, 4.0]),
    )?;
    let truth = MixtureModel::new(vec![0.65, 0.35], vec![c1, c2], Family::SkewNormal, false)?;
    let data = simulate(&SimulationDesign {
        model: truth.clone(),
        n: 1000,
        censoring: CensorScheme::LeftQuantile { rate: 0.05 },
        missing: MissingScheme::None,
        seed: 42,
    })?;

    for starts in [1, 8] {
        let cfg = FitConfig { g: 2, n_starts: starts, seed: 7, ..Default::default() };
        let fit = fit_fm_msnc(&data.samples, &cfg)?;
        let m = align_to_truth(&fit.model, &truth);
        println!("{starts} start(s): loglik {:.4}, {} iterations, converged {}", fit.loglik, fit.iterations, fit.converged);
        for (j, c) in m.components.iter().enumerate() {
            println!(
                "  component {}: pi {:.3}  mu {}  lambda {}",
                j + 1,
                m.weights[j],
                show(&c.mu),
                show(&c.lambda)
            );
        }
    }
    Ok(())
}

fn show(v: &Vector) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(", "))
}
