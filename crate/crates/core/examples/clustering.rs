//! Clustering with skew-normal and normal mixtures, scored by the correct
//! classification rate.
//!
//! Run with `cargo run --release --example clustering`.

use censmix::analysis::{classification_rate, simulate, CensorScheme, MissingScheme, SimulationDesign};
use censmix::esn::EsnParams;
use censmix::linalg::{Mat, Vector};
use censmix::mixture::{fit_fm_msnc, Family, FitConfig, MixtureModel};

fn main() -> censmix::Result<()> {
    let truth = MixtureModel::new(
        vec![0.7, 0.3],
        vec![
            EsnParams::skew_normal(
                Vector::from_row_slice(&[2.0, 3.0]),
                Mat::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 4.0]),
                Vector::from_row_slice(&[2.0, 4.0]),
            )?,
            EsnParams::skew_normal(
                Vector::from_row_slice(&[5.0, 7.0]),
                Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
                Vector::from_row_slice(&[3.0, 5.0]),
            )?,
        ],
        Family::SkewNormal,
        false,
    )?;
    let (mut skew, mut normal) = (0.0, 0.0);
    let reps = 5;
    for r in 0..reps {
        let data = simulate(&SimulationDesign {
            model: truth.clone(),
            n: 200,
            censoring: CensorScheme::None,
            missing: MissingScheme::None,
            seed: 100 + r,
        })?;
        let a = fit_fm_msnc(&data.samples, &FitConfig { g: 2, n_starts: 8, seed: 7, ..Default::default() })?;
        let b = fit_fm_msnc(&data.samples, &FitConfig { g: 2, family: Family::Normal, n_starts: 4, seed: 7, ..Default::default() })?;
        let (ca, cb) = (classification_rate(&a.posterior, &data.labels), classification_rate(&b.posterior, &data.labels));
        println!("replicate {r}: CCR skew {ca:.3}  normal {cb:.3}");
        skew += ca;
        normal += cb;
    }
    println!("mean CCR: skew {:.4}  normal {:.4}", skew / reps as f64, normal / reps as f64);
    Ok(())
}
