//! File formats: the censored-data CSV, model and design specifications
//! (TOML or JSON), and fit/study reports.
//!
//! The CSV has columns `y1..yp`, `c1..cp`, `lo1..lop`, `hi1..hip` in any
//! order, plus any extra columns, which are carried along untouched. A cell
//! with `c = 0` is observed and needs a finite `y`. A cell with `c = 1` is
//! censored to `[lo, hi]`; an empty bound is −∞ or +∞, so both bounds empty
//! means the cell is missing. `y` of a censored cell may be empty.

use crate::analysis::{CensorScheme, MissingScheme, SimulationDesign, StudyReport};
use crate::censored::CensoredSample;
use crate::error::{Error, Result};
use crate::esn::EsnParams;
use crate::linalg::{Mat, Vector};
use crate::mixture::{Family, FitResult, MixtureModel};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

/// A parsed dataset. The raw records are kept so that cells can be written
/// back byte for byte.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub header: csv::StringRecord,
    pub records: Vec<csv::StringRecord>,
    pub samples: Vec<CensoredSample>,
    /// Column positions of `y_k`, `c_k`, `lo_k`, `hi_k`.
    pub columns: Vec<[usize; 4]>,
}

impl Dataset {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }
}

fn parse_err(line: usize, column: &str, msg: impl Into<String>) -> Error {
    Error::Parse { line, column: column.to_string(), msg: msg.into() }
}

pub fn read_dataset_file(path: &Path) -> Result<Dataset> {
    read_dataset(std::fs::File::open(path)?)
}

pub fn read_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::None).from_reader(reader);
    let header = rdr.headers().map_err(|e| parse_err(1, "", e.to_string()))?.clone();
    let find = |name: &str| header.iter().position(|h| h.trim() == name);
    let mut columns = Vec::new();
    while let Some(y) = find(&format!("y{}", columns.len() + 1)) {
        let k = columns.len() + 1;
        let col = |prefix: &str| find(&format!("{prefix}{k}")).ok_or_else(|| parse_err(1, &format!("{prefix}{k}"), "column not found"));
        columns.push([y, col("c")?, col("lo")?, col("hi")?]);
    }
    if columns.is_empty() {
        return Err(parse_err(1, "y1", "column not found"));
    }
    if find(&format!("c{}", columns.len() + 1)).is_some() {
        return Err(parse_err(1, &format!("y{}", columns.len() + 1), "column not found"));
    }
    let p = columns.len();
    let mut records = Vec::new();
    let mut samples = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let line = r + 2;
        let rec = rec.map_err(|e| parse_err(line, "", e.to_string()))?;
        if rec.len() != header.len() {
            return Err(parse_err(line, "", format!("expected {} fields, found {}", header.len(), rec.len())));
        }
        let mut value = Vector::zeros(p);
        let mut censored = vec![false; p];
        let mut lower = Vector::from_element(p, f64::NEG_INFINITY);
        let mut upper = Vector::from_element(p, f64::INFINITY);
        for (k, cols) in columns.iter().enumerate() {
            let name = |i: usize| header.get(cols[i]).unwrap_or("").trim().to_string();
            let num = |i: usize| -> Result<Option<f64>> {
                let s = rec[cols[i]].trim();
                if s.is_empty() {
                    return Ok(None);
                }
                match s.parse::<f64>() {
                    Ok(v) if !v.is_nan() => Ok(Some(v)),
                    _ => Err(parse_err(line, &name(i), format!("'{s}' is not a number"))),
                }
            };
            censored[k] = match rec[cols[1]].trim() {
                "0" => false,
                "1" => true,
                s => return Err(parse_err(line, &name(1), format!("indicator must be 0 or 1, found '{s}'"))),
            };
            if censored[k] {
                lower[k] = num(2)?.unwrap_or(f64::NEG_INFINITY);
                upper[k] = num(3)?.unwrap_or(f64::INFINITY);
                if lower[k] > upper[k] || lower[k] == f64::INFINITY || upper[k] == f64::NEG_INFINITY {
                    return Err(parse_err(line, &name(2), "lower bound exceeds upper bound"));
                }
                value[k] = num(0)?.unwrap_or(f64::NAN);
            } else {
                match num(0)? {
                    Some(v) if v.is_finite() => value[k] = v,
                    _ => return Err(parse_err(line, &name(0), "observed cell needs a finite value")),
                }
            }
        }
        let sample = CensoredSample::new(value, censored, lower, upper).map_err(|e| parse_err(line, "", e.to_string()))?;
        samples.push(sample);
        records.push(rec);
    }
    if samples.is_empty() {
        return Err(parse_err(2, "", "no data rows"));
    }
    Ok(Dataset { header, records, samples, columns })
}

/// Shortest decimal text that parses back to the same value; empty for
/// infinities and NaN.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

/// Writes samples in the dataset layout `y1..yp, c1..cp, lo1..lop, hi1..hip`.
pub fn write_dataset<W: Write>(writer: W, samples: &[CensoredSample]) -> Result<()> {
    let p = samples.first().map_or(0, |s| s.dim());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = Vec::with_capacity(4 * p);
    for prefix in ["y", "c", "lo", "hi"] {
        header.extend((1..=p).map(|k| format!("{prefix}{k}")));
    }
    w.write_record(&header).map_err(csv_err)?;
    for s in samples {
        let mut row: Vec<String> = (0..p).map(|k| format_number(s.value[k])).collect();
        row.extend((0..p).map(|k| if s.censored[k] { "1".to_string() } else { "0".to_string() }));
        row.extend((0..p).map(|k| if s.censored[k] { format_number(s.lower[k]) } else { String::new() }));
        row.extend((0..p).map(|k| if s.censored[k] { format_number(s.upper[k]) } else { String::new() }));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Copies the dataset with every censored or missing `y` cell replaced by
/// `completed` and an `imputed` column listing the replaced cells. All other
/// cells are written exactly as read.
pub fn write_imputed<W: Write>(writer: W, data: &Dataset, completed: &[Vector]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = data.header.iter().collect();
    header.push("imputed");
    w.write_record(&header).map_err(csv_err)?;
    for ((rec, s), y) in data.records.iter().zip(&data.samples).zip(completed) {
        let mut row: Vec<String> = rec.iter().map(str::to_string).collect();
        let mut audit = Vec::new();
        for (k, cols) in data.columns.iter().enumerate() {
            if s.censored[k] {
                row[cols[0]] = format_number(y[k]);
                audit.push(data.header[cols[0]].trim().to_string());
            }
        }
        row.push(audit.join(";"));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub weight: f64,
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    #[serde(default)]
    pub lambda: Option<Vec<f64>>,
}

/// Serialisable mixture model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default = "default_family")]
    pub family: Family,
    #[serde(default)]
    pub shared_gamma: bool,
    pub components: Vec<ComponentSpec>,
}

fn default_family() -> Family {
    Family::SkewNormal
}

impl ModelSpec {
    pub fn from_model(model: &MixtureModel) -> Self {
        let components = model
            .weights
            .iter()
            .zip(&model.components)
            .map(|(&weight, c)| ComponentSpec {
                weight,
                mu: c.mu.iter().cloned().collect(),
                sigma: c.sigma.row_iter().map(|r| r.iter().cloned().collect()).collect(),
                lambda: Some(c.lambda.iter().cloned().collect()),
            })
            .collect();
        Self { family: model.family, shared_gamma: model.shared_gamma, components }
    }

    pub fn to_model(&self) -> Result<MixtureModel> {
        let bad = |m: String| Error::Format(m);
        let p = self.components.first().map_or(0, |c| c.mu.len());
        if p == 0 {
            return Err(bad("a model needs at least one component with non-empty mu".into()));
        }
        let mut comps = Vec::new();
        for (j, c) in self.components.iter().enumerate() {
            if c.mu.len() != p || c.sigma.len() != p || c.sigma.iter().any(|r| r.len() != p) {
                return Err(bad(format!("component {}: mu and sigma must have dimension {p}", j + 1)));
            }
            let lambda = c.lambda.clone().unwrap_or_else(|| vec![0.0; p]);
            if lambda.len() != p {
                return Err(bad(format!("component {}: lambda must have length {p}", j + 1)));
            }
            let sigma = Mat::from_fn(p, p, |a, b| c.sigma[a][b]);
            comps.push(EsnParams::skew_normal(Vector::from_vec(c.mu.clone()), sigma, Vector::from_vec(lambda))?);
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if !(total > 0.0) || self.components.iter().any(|c| !(c.weight > 0.0)) {
            return Err(bad("weights must be positive".into()));
        }
        let weights = self.components.iter().map(|c| c.weight / total).collect();
        MixtureModel::new(weights, comps, self.family, self.shared_gamma)
    }
}

/// Serialisable simulation design. `sizes` optionally lists sample sizes for
/// a study series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "no_censoring")]
    pub censoring: CensorScheme,
    #[serde(default = "no_missing")]
    pub missing: MissingScheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    pub model: ModelSpec,
}

fn no_censoring() -> CensorScheme {
    CensorScheme::None
}

fn no_missing() -> MissingScheme {
    MissingScheme::None
}

impl DesignSpec {
    pub fn from_design(design: &SimulationDesign) -> Self {
        Self {
            n: design.n,
            seed: design.seed,
            censoring: design.censoring.clone(),
            missing: design.missing.clone(),
            sizes: None,
            model: ModelSpec::from_model(&design.model),
        }
    }

    pub fn to_design(&self) -> Result<SimulationDesign> {
        let d = SimulationDesign {
            model: self.model.to_model()?,
            n: self.n,
            censoring: self.censoring.clone(),
            missing: self.missing.clone(),
            seed: self.seed,
        };
        d.validate().map_err(|e| Error::Format(e.to_string()))?;
        Ok(d)
    }

    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Ground truth written next to a simulated dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthFile {
    pub design: DesignSpec,
    pub labels: Vec<usize>,
    pub complete: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub estimate: f64,
    pub se: Option<f64>,
}

/// Outcome of one G in a fit sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GFit {
    pub g: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<GFitResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GFitResult {
    pub loglik: f64,
    pub n_params: usize,
    pub aic: f64,
    pub bic: f64,
    pub edc: f64,
    pub iterations: usize,
    pub converged: bool,
    pub model: ModelSpec,
    pub estimates: Vec<Estimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se_note: Option<String>,
    pub trace: Vec<f64>,
    pub posterior: Vec<Vec<f64>>,
    pub classes: Vec<usize>,
}

impl GFitResult {
    pub fn new(fit: &FitResult, se: std::result::Result<crate::info::StdErrors, String>) -> Result<Self> {
        let names = crate::info::param_names(&fit.model);
        let theta = crate::info::pack_params(&fit.model)?;
        let (ses, note) = match se {
            Ok(s) if s.pseudo_inverse => (
                Some(s.se),
                Some(format!("information matrix ill-conditioned (condition {:.3e}); pseudo-inverse used", s.condition)),
            ),
            Ok(s) => (Some(s.se), None),
            Err(e) => (None, Some(format!("standard errors unavailable: {e}"))),
        };
        let estimates = names
            .into_iter()
            .enumerate()
            .map(|(i, name)| Estimate { name, estimate: theta[i], se: ses.as_ref().map(|s| s[i]) })
            .collect();
        Ok(Self {
            loglik: fit.loglik,
            n_params: fit.n_params,
            aic: fit.criteria.aic,
            bic: fit.criteria.bic,
            edc: fit.criteria.edc,
            iterations: fit.iterations,
            converged: fit.converged,
            model: ModelSpec::from_model(&fit.model),
            estimates,
            se_note: note,
            trace: fit.trace.clone(),
            posterior: fit.posterior.row_iter().map(|r| r.iter().cloned().collect()).collect(),
            classes: fit.classes.clone(),
        })
    }
}

/// G preferred by each criterion (smallest value).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BestByCriterion {
    pub aic: Option<usize>,
    pub bic: Option<usize>,
    pub edc: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub n: usize,
    pub p: usize,
    pub family: Family,
    pub shared_gamma: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub starts: usize,
    pub seed: u64,
    pub fits: Vec<GFit>,
    pub best: BestByCriterion,
}

const MACHINE_MARKER: &str = "# machine-readable";

impl FitReport {
    pub fn best_by(fits: &[GFit]) -> BestByCriterion {
        let pick = |key: fn(&GFitResult) -> f64| {
            fits.iter()
                .filter_map(|f| f.result.as_ref().map(|r| (f.g, key(r))))
                .filter(|(_, v)| v.is_finite())
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(g, _)| g)
        };
        BestByCriterion { aic: pick(|r| r.aic), bic: pick(|r| r.bic), edc: pick(|r| r.edc) }
    }

    /// Model for `g`, or for the BIC choice when `g` is `None`.
    pub fn model(&self, g: Option<usize>) -> Result<MixtureModel> {
        let g = g.or(self.best.bic).ok_or_else(|| Error::Format("report contains no successful fit".into()))?;
        let fit = self.fits.iter().find(|f| f.g == g).and_then(|f| f.result.as_ref());
        fit.ok_or_else(|| Error::Format(format!("report has no successful fit for G = {g}")))?.model.to_model()
    }

    /// Human-readable tables followed by the JSON form of the report.
    pub fn render(&self) -> Result<String> {
        let mut out = String::new();
        let fam = match self.family {
            Family::SkewNormal => "skew-normal",
            Family::Normal => "normal",
        };
        let _ = writeln!(out, "FM-{} fit: n = {}, p = {}, shared Gamma = {}", if self.family == Family::SkewNormal { "MSNC" } else { "MNC" }, self.n, self.p, self.shared_gamma);
        let _ = writeln!(out, "family {fam}, tol {:e}, max_iter {}, starts {}, seed {}", self.tol, self.max_iter, self.starts, self.seed);
        let _ = writeln!(out);
        let _ = writeln!(out, "{:>3}  {:>14}  {:>4}  {:>14}  {:>14}  {:>14}  {:>5}  {}", "G", "loglik", "rho", "AIC", "BIC", "EDC", "iter", "status");
        for f in &self.fits {
            match &f.result {
                Some(r) => {
                    let flag = |best: Option<usize>| if best == Some(f.g) { "*" } else { " " };
                    let _ = writeln!(
                        out,
                        "{:>3}  {:>14.4}  {:>4}  {:>13.3}{}  {:>13.3}{}  {:>13.3}{}  {:>5}  {}",
                        f.g,
                        r.loglik,
                        r.n_params,
                        r.aic,
                        flag(self.best.aic),
                        r.bic,
                        flag(self.best.bic),
                        r.edc,
                        flag(self.best.edc),
                        r.iterations,
                        if r.converged { "converged" } else { "max_iter reached" }
                    );
                }
                None => {
                    let _ = writeln!(out, "{:>3}  failed: {}", f.g, f.error.as_deref().unwrap_or("unknown error"));
                }
            }
        }
        let _ = writeln!(out, "(* = smallest value of the criterion)");
        for f in &self.fits {
            let Some(r) = &f.result else { continue };
            let _ = writeln!(out);
            let _ = writeln!(out, "G = {}: estimates", f.g);
            let _ = writeln!(out, "{:<16} {:>12} {:>12}", "parameter", "estimate", "SE");
            for e in &r.estimates {
                let se = e.se.map_or("-".to_string(), |s| format!("{s:.4}"));
                let _ = writeln!(out, "{:<16} {:>12.4} {:>12}", e.name, e.estimate, se);
            }
            if let Some(note) = &r.se_note {
                let _ = writeln!(out, "note: {note}");
            }
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "{MACHINE_MARKER}");
        out.push_str(&serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?);
        out.push('\n');
        Ok(out)
    }

    /// Reads a rendered report (or bare JSON).
    pub fn parse(text: &str) -> Result<Self> {
        let json = text.find(MACHINE_MARKER).map_or(text, |i| &text[i + MACHINE_MARKER.len()..]);
        serde_json::from_str(json).map_err(|e| Error::Format(format!("fit report: {e}")))
    }
}

/// One study run, possibly one of a series over sample sizes.
#[derive(Debug, Clone, Serialize)]
pub struct StudyEntry {
    pub n: usize,
    pub report: StudyReport,
}

/// Table-1 style layout: one column per parameter, rows true value, MC mean,
/// MC Sd, IM SE, bias and MSE.
pub fn render_study(entries: &[StudyEntry]) -> Result<String> {
    let mut out = String::new();
    for e in entries {
        let r = &e.report;
        let _ = writeln!(out, "n = {}: {} replicates, {} failed", e.n, r.replicates, r.failures);
        let width = r.names.iter().map(|s| s.len()).max().unwrap_or(8).max(9);
        let _ = write!(out, "{:<8}", "");
        for n in &r.names {
            let _ = write!(out, " {n:>width$}");
        }
        let _ = writeln!(out);
        let mut row = |label: &str, vals: &[f64]| {
            let _ = write!(out, "{label:<8}");
            for v in vals {
                let _ = write!(out, " {v:>width$.4}");
            }
            let _ = writeln!(out);
        };
        row("True", &r.truth);
        row("MC mean", &r.mc_mean);
        row("MC Sd", &r.mc_sd);
        if !r.im_se.is_empty() {
            row("IM SE", &r.im_se);
        }
        row("bias", &r.bias);
        row("mse", &r.mse);
        let _ = writeln!(out);
    }
    let _ = writeln!(out, "{MACHINE_MARKER}");
    out.push_str(&serde_json::to_string_pretty(entries).map_err(|e| Error::Format(e.to_string()))?);
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "id,y1,y2,c1,c2,lo1,lo2,hi1,hi2\n\
a,1.5,0.25,0,0,,,,\n\
b,-2,3.000,1,0,,,-2,\n\
c,,7,1,0,,,,\n\
d,0.5,,0,1,,1,,2.5\n";

    #[test]
    fn parses_bounds_and_missing_cells() {
        let d = read_dataset(SAMPLE.as_bytes()).unwrap();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.samples.len(), 4);
        let b = &d.samples[1];
        assert!(b.censored[0] && b.lower[0] == f64::NEG_INFINITY && b.upper[0] == -2.0);
        assert!(d.samples[2].is_missing(0));
        assert_eq!((d.samples[3].lower[1], d.samples[3].upper[1]), (1.0, 2.5));
    }

    #[test]
    fn parse_errors_name_line_and_column() {
        let bad = "y1,c1,lo1,hi1\n1,0,,\nx,0,,\n";
        match read_dataset(bad.as_bytes()) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column.as_str()), (3, "y1")),
            other => panic!("{other:?}"),
        }
        let inverted = "y1,c1,lo1,hi1\n1,1,3,2\n";
        assert!(matches!(read_dataset(inverted.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let flag = "y1,c1,lo1,hi1\n1,2,,\n";
        assert!(matches!(read_dataset(flag.as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_dataset("y1,c1,lo1\n1,0,\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn emit_parse_round_trip() {
        let d = read_dataset(SAMPLE.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &d.samples).unwrap();
        let back = read_dataset(buf.as_slice()).unwrap();
        for (a, b) in d.samples.iter().zip(&back.samples) {
            assert_eq!(a.censored, b.censored);
            assert_eq!(a.lower, b.lower);
            assert_eq!(a.upper, b.upper);
            for k in 0..2 {
                assert!(a.value[k] == b.value[k] || (a.value[k].is_nan() && b.value[k].is_nan()));
            }
        }
        let mut again = Vec::new();
        write_dataset(&mut again, &back.samples).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn imputed_output_keeps_observed_cells() {
        let d = read_dataset(SAMPLE.as_bytes()).unwrap();
        let completed: Vec<Vector> = d
            .samples
            .iter()
            .map(|s| Vector::from_iterator(2, (0..2).map(|k| if s.censored[k] { 9.5 } else { s.value[k] })))
            .collect();
        let mut buf = Vec::new();
        write_imputed(&mut buf, &d, &completed).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "id,y1,y2,c1,c2,lo1,lo2,hi1,hi2,imputed");
        assert_eq!(lines[1], "a,1.5,0.25,0,0,,,,,");
        assert_eq!(lines[2], "b,9.5,3.000,1,0,,,-2,,y1");
        assert_eq!(lines[4], "d,0.5,9.5,0,1,,1,,2.5,y2");
    }

    #[test]
    fn design_spec_toml_round_trip() {
        let text = r#"
n = 1000
seed = 3
censoring = { scheme = "left-quantile", rate = 0.05 }

[model]
[[model.components]]
weight = 0.65
mu = [-3.0, -4.0]
sigma = [[3.0, 1.0], [1.0, 4.5]]
lambda = [-2.0, 2.0]

[[model.components]]
weight = 0.35
mu = [2.0, 2.0]
sigma = [[2.0, 1.0], [1.0, 3.5]]
lambda = [-3.0, 4.0]
"#;
        let spec: DesignSpec = toml::from_str(text).unwrap();
        let design = spec.to_design().unwrap();
        assert_eq!(design.model.g(), 2);
        assert_eq!(design.missing, MissingScheme::None);
        let again: DesignSpec = toml::from_str(&DesignSpec::from_design(&design).to_toml().unwrap()).unwrap();
        assert_eq!(again.to_design().unwrap().model, design.model);
        assert_eq!(again.censoring, CensorScheme::LeftQuantile { rate: 0.05 });
    }

    #[test]
    fn invalid_design_is_a_format_error() {
        let text = "n = 10\ncensoring = { scheme = \"left-quantile\", rate = 1.5 }\n[model]\n[[model.components]]\nweight = 1.0\nmu = [0.0]\nsigma = [[1.0]]\n";
        let spec: DesignSpec = toml::from_str(text).unwrap();
        assert!(spec.to_design().unwrap_err().is_input_error());
    }
}
