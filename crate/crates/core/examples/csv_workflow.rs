//! Files in and out: write a censored dataset as CSV, read it back, fit a
//! range of G, and write the report and the completed data.
//!
//! Run with `cargo run --release --example csv_workflow`.

use censmix::analysis::{impute, simulate, CensorScheme, MissingScheme, SimulationDesign};
use censmix::esn::EsnParams;
use censmix::info::empirical_info_se;
use censmix::io::{read_dataset, write_dataset, write_imputed, FitReport, GFit, GFitResult};
use censmix::linalg::{Mat, Vector};
use censmix::mixture::{fit_fm_msnc, Family, FitConfig, MixtureModel};

fn main() -> censmix::Result<()> {
    let truth = MixtureModel::new(
        vec![0.5, 0.5],
        vec![
            EsnParams::skew_normal(Vector::from_row_slice(&[0.0, 0.0]), Mat::identity(2, 2), Vector::from_row_slice(&[3.0, 0.0]))?,
            EsnParams::skew_normal(Vector::from_row_slice(&[5.0, 4.0]), Mat::identity(2, 2), Vector::from_row_slice(&[0.0, -3.0]))?,
        ],
        Family::SkewNormal,
        false,
    )?;
    let sim = simulate(&SimulationDesign {
        model: truth,
        n: 300,
        censoring: CensorScheme::Interval { rate: 0.1, cuts: vec![vec![-1.0, 1.0, 3.0, 5.0], vec![-2.0, 0.0, 2.0, 4.0]] },
        missing: MissingScheme::Mcar { rate: 0.05 },
        seed: 4,
    })?;
    let mut csv = Vec::new();
    write_dataset(&mut csv, &sim.samples)?;
    let text = String::from_utf8(csv).expect("utf-8");
    println!("dataset head:");
    for line in text.lines().take(6) {
        println!("  {line}");
    }

    let ds = read_dataset(text.as_bytes())?;
    let mut fits = Vec::new();
    for g in 1..=3 {
        let fit = fit_fm_msnc(&ds.samples, &FitConfig { g, n_starts: 4, seed: 1, ..Default::default() })?;
        let se = empirical_info_se(&ds.samples, &fit.model).map_err(|e| e.to_string());
        fits.push(GFit { g, error: None, result: Some(GFitResult::new(&fit, se)?) });
    }
    let best = FitReport::best_by(&fits);
    let report = FitReport {
        n: ds.samples.len(),
        p: ds.dim(),
        family: Family::SkewNormal,
        shared_gamma: false,
        tol: 1e-6,
        max_iter: 500,
        starts: 4,
        seed: 1,
        fits,
        best,
    };
    let rendered = report.render()?;
    println!("{}", rendered.split("# machine-readable").next().unwrap_or(&rendered));

    let parsed = FitReport::parse(&rendered)?;
    let model = parsed.model(None)?;
    let completed = impute(&ds.samples, &model)?;
    let mut out = Vec::new();
    write_imputed(&mut out, &ds, &completed)?;
    println!("completed rows with imputed cells:");
    for line in String::from_utf8(out).expect("utf-8").lines().skip(1).filter(|l| !l.ends_with(',')).take(5) {
        println!("  {line}");
    }
    Ok(())
}
