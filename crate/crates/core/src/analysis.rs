//! Simulation designs, imputation, accuracy metrics and Monte Carlo studies.

use crate::censored::{row_error, CensoredSample};
use crate::error::{Error, Result};
use crate::esn::Esn;
use crate::info::{empirical_info_se, pack_params, param_names};
use crate::linalg::{symmetric_sqrt, Mat, Vector};
use crate::mixture::{fit_fm_msnc, Components, FitConfig, MixtureModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum CensorScheme {
    None,
    /// Per component and coordinate, the smallest `rate` share of values is
    /// left-censored at the empirical quantile.
    LeftQuantile { rate: f64 },
    /// Each cell is censored with probability `rate` to the cell of the grid
    /// `cuts[k]` that contains it.
    Interval { rate: f64, cuts: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum MissingScheme {
    None,
    Mcar { rate: f64 },
}

#[derive(Debug, Clone)]
pub struct SimulationDesign {
    pub model: MixtureModel,
    pub n: usize,
    pub censoring: CensorScheme,
    pub missing: MissingScheme,
    pub seed: u64,
}

impl SimulationDesign {
    pub fn validate(&self) -> Result<()> {
        let bad = |r: f64| !(0.0..1.0).contains(&r);
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        match &self.censoring {
            CensorScheme::LeftQuantile { rate } if bad(*rate) => {
                return Err(Error::InvalidParameter(format!("censoring rate {rate} outside [0, 1)")))
            }
            CensorScheme::Interval { rate, cuts } => {
                if bad(*rate) {
                    return Err(Error::InvalidParameter(format!("censoring rate {rate} outside [0, 1)")));
                }
                if cuts.len() != self.model.dim() || cuts.iter().any(|c| c.windows(2).any(|w| !(w[0] < w[1]))) {
                    return Err(Error::InvalidParameter("interval cuts must be increasing, one list per coordinate".into()));
                }
            }
            _ => {}
        }
        if let MissingScheme::Mcar { rate } = self.missing {
            if bad(rate) {
                return Err(Error::InvalidParameter(format!("missing rate {rate} outside [0, 1)")));
            }
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct Simulated {
    pub complete: Vec<Vector>,
    pub samples: Vec<CensoredSample>,
    pub labels: Vec<usize>,
}

impl Simulated {
    /// Indices `(row, column)` of missing cells.
    pub fn missing_cells(&self) -> Vec<(usize, usize)> {
        cells(&self.samples, |s, k| s.is_missing(k))
    }

    pub fn censored_share(&self) -> f64 {
        let p = self.complete.first().map_or(0, |v| v.len());
        cells(&self.samples, |s, k| s.censored[k] && !s.is_missing(k)).len() as f64 / (self.samples.len() * p) as f64
    }
}

fn cells(samples: &[CensoredSample], pred: impl Fn(&CensoredSample, usize) -> bool) -> Vec<(usize, usize)> {
    samples.iter().enumerate().flat_map(|(i, s)| (0..s.dim()).filter(|&k| pred(s, k)).map(move |k| (i, k)).collect::<Vec<_>>()).collect()
}

/// Draws `Y = μ_j + Δ_j |T| + Γ_j^{1/2} Z` and applies censoring and missingness.
pub fn simulate(design: &SimulationDesign) -> Result<Simulated> {
    design.validate()?;
    let model = &design.model;
    let p = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(design.seed);
    let laws = model
        .components
        .iter()
        .map(|c| {
            let e = Esn::new(c.clone())?;
            let root = symmetric_sqrt(&e.gamma)?;
            Ok((e, root))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut labels = Vec::with_capacity(design.n);
    let mut complete = Vec::with_capacity(design.n);
    for _ in 0..design.n {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut j = model.g() - 1;
        for (k, w) in model.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                j = k;
                break;
            }
        }
        let (e, root) = &laws[j];
        let t: f64 = rng.sample::<f64, _>(StandardNormal).abs();
        let z = Vector::from_iterator(p, (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)));
        labels.push(j);
        complete.push(&e.params.mu + &e.delta * t + root * z);
    }

    let inf = f64::INFINITY;
    let mut samples: Vec<CensoredSample> = complete.iter().map(|y| CensoredSample::observed(y.clone())).collect();
    match &design.censoring {
        CensorScheme::None => {}
        CensorScheme::LeftQuantile { rate } => {
            for j in 0..model.g() {
                let members: Vec<usize> = (0..design.n).filter(|&i| labels[i] == j).collect();
                let m = (rate * members.len() as f64).round() as usize;
                if m == 0 {
                    continue;
                }
                for k in 0..p {
                    let mut vals: Vec<f64> = members.iter().map(|&i| complete[i][k]).collect();
                    vals.sort_by(f64::total_cmp);
                    let limit = vals[m - 1];
                    for &i in &members {
                        if complete[i][k] <= limit {
                            let s = &mut samples[i];
                            s.censored[k] = true;
                            s.value[k] = limit;
                            s.lower[k] = -inf;
                            s.upper[k] = limit;
                        }
                    }
                }
            }
        }
        CensorScheme::Interval { rate, cuts } => {
            for (i, s) in samples.iter_mut().enumerate() {
                for k in 0..p {
                    if rng.gen::<f64>() < *rate {
                        let y = complete[i][k];
                        let pos = cuts[k].partition_point(|&c| c < y);
                        s.censored[k] = true;
                        s.lower[k] = if pos == 0 { -inf } else { cuts[k][pos - 1] };
                        s.upper[k] = if pos == cuts[k].len() { inf } else { cuts[k][pos] };
                        s.value[k] = if s.upper[k].is_finite() { s.upper[k] } else { s.lower[k] };
                        if !s.value[k].is_finite() {
                            // a grid with no cut points hides the value entirely
                            s.value[k] = f64::NAN;
                        }
                    }
                }
            }
        }
    }
    if let MissingScheme::Mcar { rate } = design.missing {
        for s in samples.iter_mut() {
            let mask: Vec<bool> = (0..p).map(|_| rng.gen::<f64>() < rate).collect();
            for (k, &m) in mask.iter().enumerate() {
                if m {
                    s.censored[k] = true;
                    s.value[k] = f64::NAN;
                    s.lower[k] = -inf;
                    s.upper[k] = inf;
                }
            }
        }
    }
    Ok(Simulated { complete, samples, labels })
}

/// Completes every censored or missing cell by its conditional mean under the
/// fitted mixture, averaged over components with posterior weights. Observed
/// cells are copied unchanged.
pub fn impute(samples: &[CensoredSample], model: &MixtureModel) -> Result<Vec<Vector>> {
    let comps = Components::new(model)?;
    let (z, _) = crate::mixture::responsibilities(samples, model)?;
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut out = s.value.clone();
            let cen = s.censored_idx();
            if cen.is_empty() {
                return Ok(out);
            }
            let mut pred = Vector::zeros(s.dim());
            for j in 0..model.g() {
                if z[(i, j)] < 1e-300 {
                    continue;
                }
                let st = comps.stats(s, j).map_err(|e| row_error(i, e))?;
                pred += st.y * z[(i, j)];
            }
            for k in cen {
                out[k] = pred[k];
            }
            Ok(out)
        })
        .collect()
}

/// Fills censored and missing cells with the column mean of observed cells.
pub fn mean_impute(samples: &[CensoredSample]) -> Vec<Vector> {
    let p = samples.first().map_or(0, |s| s.dim());
    let means: Vec<f64> = (0..p)
        .map(|k| {
            let v: Vec<f64> = samples.iter().filter(|s| !s.censored[k]).map(|s| s.value[k]).collect();
            v.iter().sum::<f64>() / v.len().max(1) as f64
        })
        .collect();
    samples
        .iter()
        .map(|s| Vector::from_iterator(p, (0..p).map(|k| if s.censored[k] { means[k] } else { s.value[k] })))
        .collect()
}

/// Mean absolute error and mean absolute relative error over `cells`.
pub fn mae_mare(truth: &[Vector], predicted: &[Vector], cells: &[(usize, usize)]) -> (f64, f64) {
    let m = cells.len().max(1) as f64;
    let (mut ae, mut are) = (0.0, 0.0);
    for &(i, k) in cells {
        let d = (truth[i][k] - predicted[i][k]).abs();
        ae += d;
        are += d / truth[i][k].abs();
    }
    (ae / m, are / m)
}

fn permutations(g: usize) -> Vec<Vec<usize>> {
    if g == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for perm in permutations(g - 1) {
        for pos in 0..=perm.len() {
            let mut p = perm.clone();
            p.insert(pos, g - 1);
            out.push(p);
        }
    }
    out
}

/// Assignment `perm[j]` maximising `Σ_j score[(j, perm[j])]`: exhaustive for
/// `G ≤ 6`, Hungarian algorithm beyond.
pub fn best_assignment(score: &Mat) -> Vec<usize> {
    let g = score.nrows();
    if g <= 6 {
        permutations(g)
            .into_iter()
            .map(|p| ((0..g).map(|j| score[(j, p[j])]).sum::<f64>(), p))
            .fold((f64::NEG_INFINITY, vec![]), |best, (v, p)| if v > best.0 { (v, p) } else { best })
            .1
    } else {
        let scale = 1e9 / score.abs().max().max(1e-300);
        let weights = pathfinding::matrix::Matrix::from_fn(g, g, |(r, c)| (score[(r, c)] * scale).round() as i64);
        pathfinding::kuhn_munkres::kuhn_munkres(&weights).1
    }
}

/// Correct classification rate of MAP labels, maximised over relabelings.
pub fn classification_rate(posterior: &Mat, truth: &[usize]) -> f64 {
    let g = posterior.ncols().max(truth.iter().max().map_or(0, |m| m + 1));
    let mut counts = Mat::zeros(g, g);
    for (i, &t) in truth.iter().enumerate() {
        let row = posterior.row(i);
        let c = (0..posterior.ncols()).fold(0, |b, j| if row[j] > row[b] { j } else { b });
        counts[(c, t)] += 1.0;
    }
    let perm = best_assignment(&counts);
    (0..g).map(|c| counts[(c, perm[c])]).sum::<f64>() / truth.len() as f64
}

/// Relabels `fitted` so that component `j` is closest to `truth` component `j`
/// (summed Euclidean distance of location, dispersion and shape).
pub fn align_to_truth(fitted: &MixtureModel, truth: &MixtureModel) -> MixtureModel {
    let g = fitted.g();
    let flat = |c: &crate::esn::EsnParams| {
        let mut v: Vec<f64> = c.mu.iter().cloned().collect();
        v.extend(c.sigma.iter());
        v.extend(c.lambda.iter());
        v
    };
    let mut score = Mat::zeros(g, g);
    for a in 0..g {
        for b in 0..g {
            let (x, y) = (flat(&truth.components[a]), flat(&fitted.components[b]));
            score[(a, b)] = -x.iter().zip(&y).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
        }
    }
    let perm = best_assignment(&score);
    MixtureModel {
        weights: perm.iter().map(|&b| fitted.weights[b]).collect(),
        components: perm.iter().map(|&b| fitted.components[b].clone()).collect(),
        family: fitted.family,
        shared_gamma: fitted.shared_gamma,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub names: Vec<String>,
    pub truth: Vec<f64>,
    pub mc_mean: Vec<f64>,
    pub mc_sd: Vec<f64>,
    /// Mean information-matrix standard error; empty when not requested.
    pub im_se: Vec<f64>,
    pub bias: Vec<f64>,
    pub mse: Vec<f64>,
    pub replicates: usize,
    pub failures: usize,
    /// Aligned estimates, one row per successful replicate.
    pub estimates: Vec<Vec<f64>>,
}

impl StudyReport {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Runs `replicates` simulate-and-fit cycles; replicate `m` uses seed
/// `design.seed + m`. Fit failures are excluded and counted; more than 20%
/// aborts.
pub fn mc_study(design: &SimulationDesign, replicates: usize, cfg: &FitConfig, with_se: bool) -> Result<StudyReport> {
    if replicates < 2 {
        return Err(Error::InvalidParameter("a study needs at least two replicates".into()));
    }
    let mut truth_model = design.model.clone();
    truth_model.family = cfg.family;
    truth_model.shared_gamma = cfg.shared_gamma;
    let names = param_names(&truth_model);
    let truth = pack_params(&design.model)?;
    let mut estimates = Vec::new();
    let mut ses = Vec::new();
    let mut failures = 0;
    for m in 0..replicates {
        let attempt = (|| -> Result<(Vec<f64>, Option<Vec<f64>>)> {
            let data = simulate(&design.with_seed(design.seed.wrapping_add(m as u64)))?;
            let fit = fit_fm_msnc(&data.samples, cfg)?;
            let aligned = align_to_truth(&fit.model, &design.model);
            let se = if with_se { Some(empirical_info_se(&data.samples, &aligned)?.se) } else { None };
            Ok((pack_params(&aligned)?, se))
        })();
        match attempt {
            Ok((est, se)) => {
                estimates.push(est);
                if let Some(se) = se {
                    ses.push(se);
                }
            }
            Err(_) => failures += 1,
        }
        if failures * 5 > replicates {
            return Err(Error::TooManyFailures { failed: failures, total: replicates });
        }
    }
    let k = truth.len();
    let r = estimates.len() as f64;
    let col = |j: usize| estimates.iter().map(move |e| e[j]);
    let mc_mean: Vec<f64> = (0..k).map(|j| col(j).sum::<f64>() / r).collect();
    let mc_sd = (0..k)
        .map(|j| (col(j).map(|v| (v - mc_mean[j]).powi(2)).sum::<f64>() / (r - 1.0).max(1.0)).sqrt())
        .collect();
    let im_se = if ses.is_empty() { vec![] } else { (0..k).map(|j| ses.iter().map(|s| s[j]).sum::<f64>() / ses.len() as f64).collect() };
    let bias = (0..k).map(|j| col(j).map(|v| (v - truth[j]).abs()).sum::<f64>() / r).collect();
    let mse = (0..k).map(|j| col(j).map(|v| (v - truth[j]).powi(2)).sum::<f64>() / r).collect();
    Ok(StudyReport { names, truth, mc_mean, mc_sd, im_se, bias, mse, replicates, failures, estimates })
}
