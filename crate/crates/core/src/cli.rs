//! Command-line front end: `fit`, `simulate`, `impute` and `study`.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

use crate::analysis::{impute, mae_mare, mc_study, mean_impute, simulate};
use crate::error::{Error, Result};
use crate::info::empirical_info_se;
use crate::io::{
    read_dataset_file, render_study, write_dataset, write_imputed, DesignSpec, FitReport, GFit, GFitResult, StudyEntry,
    TruthFile,
};
use crate::linalg::Vector;
use crate::mixture::{fit_fm_msnc, Family, FitConfig};
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "censmix", version, about = "Skew-normal mixtures for censored and missing data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit mixtures with G components (or a range of G) to a dataset.
    Fit {
        /// Dataset CSV.
        data: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
        /// Largest G of the sweep (defaults to --g).
        #[arg(long)]
        g_max: Option<usize>,
        /// Report file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a dataset from a design file (TOML or JSON).
    Simulate {
        design: PathBuf,
        /// Override the design seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Dataset CSV (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Truth file; defaults to `<out>.truth.json` when --out is given.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Complete censored and missing cells from a fit report.
    Impute {
        data: PathBuf,
        /// Report written by `fit`.
        #[arg(long)]
        report: PathBuf,
        /// Which G of the report to use (default: the BIC choice).
        #[arg(long)]
        g: Option<usize>,
        /// Truth file of a simulated dataset, to score the imputations.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Completed CSV (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo study of a design: simulate, fit, summarise.
    Study {
        design: PathBuf,
        #[arg(long, default_value_t = 100)]
        replicates: usize,
        #[command(flatten)]
        fit: FitArgs,
        /// Skip information-matrix standard errors.
        #[arg(long)]
        no_se: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Number of components (for `study`, defaults to the design's).
    #[arg(long)]
    pub g: Option<usize>,
    #[arg(long, value_enum, default_value_t = Family::SkewNormal)]
    pub family: Family,
    #[arg(long)]
    pub shared_gamma: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1)]
    pub starts: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl FitArgs {
    fn config(&self, g: usize) -> Result<FitConfig> {
        if !(self.tol > 0.0) {
            return Err(Error::Format("--tol must be positive".into()));
        }
        if g == 0 {
            return Err(Error::Format("--g must be at least 1".into()));
        }
        Ok(FitConfig {
            g,
            family: self.family,
            shared_gamma: self.shared_gamma,
            tol: self.tol,
            max_iter: self.max_iter,
            n_starts: self.starts.max(1),
            seed: self.seed,
        })
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                1
            } else {
                2
            }
        }
    }
}

/// Runs a parsed command. Returns the exit code for outcomes that are not
/// errors of the command itself (a sweep where every G failed gives 2).
pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Fit { data, fit, g_max, out } => cmd_fit(data, fit, *g_max, out.as_deref()),
        Command::Simulate { design, seed, out, truth } => cmd_simulate(design, *seed, out.as_deref(), truth.as_deref()),
        Command::Impute { data, report, g, truth, out } => {
            cmd_impute(data, report, *g, truth.as_deref(), out.as_deref())
        }
        Command::Study { design, replicates, fit, no_se, out } => {
            cmd_study(design, *replicates, fit, !*no_se, out.as_deref())
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

pub fn cmd_fit(data: &Path, args: &FitArgs, g_max: Option<usize>, out: Option<&Path>) -> Result<i32> {
    let ds = read_dataset_file(data)?;
    let g_min = args.g.unwrap_or(1);
    let g_max = g_max.unwrap_or(g_min);
    if g_max < g_min {
        return Err(Error::Format(format!("--g-max {g_max} is below --g {g_min}")));
    }
    args.config(g_min)?;
    let min_rows = g_max * (ds.dim() + 1);
    if ds.samples.len() < min_rows {
        return Err(Error::Format(format!("{} rows cannot support G = {g_max} (need {min_rows})", ds.samples.len())));
    }
    let mut fits = Vec::new();
    for g in g_min..=g_max {
        let attempt = fit_fm_msnc(&ds.samples, &args.config(g)?).and_then(|fit| {
            let se = empirical_info_se(&ds.samples, &fit.model).map_err(|e| e.to_string());
            GFitResult::new(&fit, se)
        });
        fits.push(match attempt {
            Ok(r) => GFit { g, error: None, result: Some(r) },
            Err(e) => GFit { g, error: Some(e.to_string()), result: None },
        });
    }
    let best = FitReport::best_by(&fits);
    let any_ok = fits.iter().any(|f| f.result.is_some());
    let report = FitReport {
        n: ds.samples.len(),
        p: ds.dim(),
        family: args.family,
        shared_gamma: args.shared_gamma,
        tol: args.tol,
        max_iter: args.max_iter,
        starts: args.starts.max(1),
        seed: args.seed,
        fits,
        best,
    };
    emit(out, report.render()?.as_bytes())?;
    if !any_ok {
        eprintln!("error: every fit failed");
        return Ok(2);
    }
    Ok(0)
}

pub fn cmd_simulate(design: &Path, seed: Option<u64>, out: Option<&Path>, truth: Option<&Path>) -> Result<i32> {
    let mut spec = DesignSpec::read(design)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    let d = spec.to_design()?;
    let sim = simulate(&d)?;
    let mut buf = Vec::new();
    write_dataset(&mut buf, &sim.samples)?;
    emit(out, &buf)?;
    let truth_path = truth.map(Path::to_path_buf).or_else(|| {
        out.map(|o| {
            let mut s = o.as_os_str().to_owned();
            s.push(".truth.json");
            PathBuf::from(s)
        })
    });
    if let Some(tp) = truth_path {
        let t = TruthFile {
            design: spec,
            labels: sim.labels,
            complete: sim.complete.iter().map(|v| v.iter().cloned().collect()).collect(),
        };
        let json = serde_json::to_string_pretty(&t).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(tp, json + "\n")?;
    }
    Ok(0)
}

pub fn cmd_impute(data: &Path, report: &Path, g: Option<usize>, truth: Option<&Path>, out: Option<&Path>) -> Result<i32> {
    let ds = read_dataset_file(data)?;
    let rep = FitReport::parse(&std::fs::read_to_string(report)?)?;
    let model = rep.model(g)?;
    if model.dim() != ds.dim() {
        return Err(Error::Format(format!("schema mismatch: report has p = {}, data has p = {}", model.dim(), ds.dim())));
    }
    let completed = impute(&ds.samples, &model)?;
    let mut buf = Vec::new();
    write_imputed(&mut buf, &ds, &completed)?;
    emit(out, &buf)?;

    let cells: usize = ds.samples.iter().map(|s| s.censored.iter().filter(|&&c| c).count()).sum();
    let mut summary = format!("imputed {cells} cells with G = {}\n", model.g());
    if let Some(tp) = truth {
        let t: TruthFile = serde_json::from_str(&std::fs::read_to_string(tp)?)
            .map_err(|e| Error::Format(format!("{}: {e}", tp.display())))?;
        if t.complete.len() != ds.samples.len() || t.complete.iter().any(|r| r.len() != ds.dim()) {
            return Err(Error::Format("schema mismatch between truth file and data".into()));
        }
        let full: Vec<Vector> = t.complete.iter().map(|r| Vector::from_vec(r.clone())).collect();
        let missing: Vec<(usize, usize)> = ds
            .samples
            .iter()
            .enumerate()
            .flat_map(|(i, s)| (0..s.dim()).filter(|&k| s.is_missing(k)).map(move |k| (i, k)).collect::<Vec<_>>())
            .collect();
        let (mae, mare) = mae_mare(&full, &completed, &missing);
        let (bmae, bmare) = mae_mare(&full, &mean_impute(&ds.samples), &missing);
        summary.push_str(&format!(
            "missing cells: {}\nmixture   MAE {mae:.4}  MARE {mare:.4}\ncol mean  MAE {bmae:.4}  MARE {bmare:.4}\n",
            missing.len()
        ));
    }
    if out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(0)
}

pub fn cmd_study(design: &Path, replicates: usize, args: &FitArgs, with_se: bool, out: Option<&Path>) -> Result<i32> {
    let spec = DesignSpec::read(design)?;
    let base = spec.to_design()?;
    if replicates < 2 {
        return Err(Error::Format("--replicates must be at least 2".into()));
    }
    let cfg = args.config(args.g.unwrap_or(base.model.g()))?;
    if cfg.g != base.model.g() {
        return Err(Error::Format(format!("--g {} differs from the design's {} components", cfg.g, base.model.g())));
    }
    let sizes = spec.sizes.clone().unwrap_or_else(|| vec![base.n]);
    let mut entries = Vec::new();
    for n in sizes {
        let design = crate::analysis::SimulationDesign { n, ..base.clone() };
        design.validate().map_err(|e| Error::Format(e.to_string()))?;
        entries.push(StudyEntry { n, report: mc_study(&design, replicates, &cfg, with_se)? });
    }
    emit(out, render_study(&entries)?.as_bytes())?;
    Ok(0)
}
