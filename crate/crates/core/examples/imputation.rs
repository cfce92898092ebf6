//! Imputing values missing completely at random with the fitted mixture,
//! compared to column means.
//!
//! Run with `cargo run --release --example imputation`.

use censmix::analysis::{impute, mae_mare, mean_impute, simulate, CensorScheme, MissingScheme, SimulationDesign};
use censmix::esn::EsnParams;
use censmix::linalg::{Mat, Vector};
use censmix::mixture::{fit_fm_msnc, Family, FitConfig, MixtureModel};

fn main() -> censmix::Result<()> {
    let truth = MixtureModel::new(
        vec![0.65, 0.35],
        vec![
            EsnParams::skew_normal(
                Vector::from_row_slice(&[-5.0, -4.0]),
                Mat::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 4.5]),
                Vector::from_row_slice(&[-2.0, 3.0]),
            )?,
            EsnParams::skew_normal(
                Vector::from_row_slice(&[2.0, 3.0]),
                Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.5]),
                Vector::from_row_slice(&[-2.0, 3.0]),
            )?,
        ],
        Family::SkewNormal,
        false,
    )?;
    println!("{:>5} {:>8} {:>10} {:>10} {:>10} {:>10}", "rate", "missing", "MAE mix", "MAE mean", "MARE mix", "MARE mean");
    for rate in [0.05, 0.1, 0.2] {
        let data = simulate(&SimulationDesign {
            model: truth.clone(),
            n: 500,
            censoring: CensorScheme::None,
            missing: MissingScheme::Mcar { rate },
            seed: 9,
        })?;
        let fit = fit_fm_msnc(&data.samples, &FitConfig { g: 2, n_starts: 8, seed: 7, ..Default::default() })?;
        let cells: Vec<(usize, usize)> = data
            .samples
            .iter()
            .enumerate()
            .flat_map(|(i, s)| (0..s.dim()).filter(|&k| s.is_missing(k)).map(move |k| (i, k)).collect::<Vec<_>>())
            .collect();
        let (mae, mare) = mae_mare(&data.complete, &impute(&data.samples, &fit.model)?, &cells);
        let (bmae, bmare) = mae_mare(&data.complete, &mean_impute(&data.samples), &cells);
        println!("{rate:>5.2} {:>8} {mae:>10.4} {bmae:>10.4} {mare:>10.4} {bmare:>10.4}", cells.len());
    }
    Ok(())
}
