//! Choosing the number of components and the family by AIC, BIC and EDC.
//!
//! Run with `cargo run --release --example model_selection`.

use censmix::analysis::{simulate, CensorScheme, MissingScheme, SimulationDesign};
use censmix::esn::EsnParams;
use censmix::linalg::{Mat, Vector};
use censmix::mixture::{fit_fm_msnc, Family, FitConfig, MixtureModel};

fn main() -> censmix::Result<()> {
    let s = Mat::identity(2, 2) * 1.5;
    let l = Vector::from_row_slice(&[-5.0, 10.0]);
    let truth = MixtureModel::new(
        vec![0.65, 0.35],
        vec![
            EsnParams::skew_normal(Vector::from_row_slice(&[2.0, 2.0]), s.clone(), l.clone())?,
            EsnParams::skew_normal(Vector::from_row_slice(&[-2.0, -1.0]), s, l)?,
        ],
        Family::SkewNormal,
        false,
    )?;
    let data = simulate(&SimulationDesign {
        model: truth,
        n: 500,
        censoring: CensorScheme::LeftQuantile { rate: 0.2 },
        missing: MissingScheme::None,
        seed: 5,
    })?;

    println!("{:<12} {:>3} {:>4} {:>12} {:>12} {:>12} {:>12}", "family", "G", "rho", "loglik", "AIC", "BIC", "EDC");
    let mut best: Option<(f64, String)> = None;
    for (family, gs) in [(Family::SkewNormal, 1..=3), (Family::Normal, 1..=4)] {
        for g in gs {
            let cfg = FitConfig { g, family, n_starts: 4, seed: 7, ..Default::default() };
            let fit = match fit_fm_msnc(&data.samples, &cfg) {
                Ok(f) => f,
                Err(e) => {
                    println!("{:<12} {g:>3}  failed: {e}", format!("{family:?}"));
                    continue;
                }
            };
            let c = fit.criteria;
            println!(
                "{:<12} {g:>3} {:>4} {:>12.3} {:>12.3} {:>12.3} {:>12.3}",
                format!("{family:?}"),
                fit.n_params,
                fit.loglik,
                c.aic,
                c.bic,
                c.edc
            );
            if best.as_ref().map_or(true, |b| c.bic < b.0) {
                best = Some((c.bic, format!("{family:?} with G = {g}")));
            }
        }
    }
    if let Some((_, name)) = best {
        println!("BIC choice: {name}");
    }
    Ok(())
}
