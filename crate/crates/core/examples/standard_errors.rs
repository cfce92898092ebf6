//! Standard errors from the empirical information matrix of a fitted mixture.
//!
//! Run with `cargo run --release --example standard_errors`.

use censmix::analysis::{align_to_truth, simulate, CensorScheme, MissingScheme, SimulationDesign};
use censmix::esn::EsnParams;
use censmix::info::{empirical_info_se, pack_params, param_names};
use censmix::linalg::{Mat, Vector};
use censmix::mixture::{fit_fm_msnc, Family, FitConfig, MixtureModel};

fn main() -> censmix::Result<()> {
    let truth = MixtureModel::new(
        vec![0.65, 0.35],
        vec![
            EsnParams::skew_normal(
                Vector::from_row_slice(&[-3.0, -4.0]),
                Mat::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 4.5]),
                Vector::from_row_slice(&[-2.0, 2.0]),
            )?,
            EsnParams::skew_normal(
                Vector::from_row_slice(&[2.0, 2.0]),
                Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.5]),
                Vector::from_row_slice(&[-3.0, 4.0]),
            )?,
        ],
        Family::SkewNormal,
        false,
    )?;
    let data = simulate(&SimulationDesign {
        model: truth.clone(),
        n: 1000,
        censoring: CensorScheme::LeftQuantile { rate: 0.05 },
        missing: MissingScheme::None,
        seed: 11,
    })?;
    let fit = fit_fm_msnc(&data.samples, &FitConfig { g: 2, n_starts: 8, seed: 7, ..Default::default() })?;
    let model = align_to_truth(&fit.model, &truth);
    let se = empirical_info_se(&data.samples, &model)?;
    let t = pack_params(&truth)?;
    println!("condition number {:.3e}{}", se.condition, if se.pseudo_inverse { " (pseudo-inverse)" } else { "" });
    println!("{:<12} {:>9} {:>9} {:>9}", "parameter", "truth", "estimate", "SE");
    for (k, name) in param_names(&model).iter().enumerate() {
        println!("{name:<12} {:>9.4} {:>9.4} {:>9.4}", t[k], se.estimates[k], se.se[k]);
    }
    Ok(())
}
