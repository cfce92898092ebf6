//! Finite mixtures of skew-normal (or normal) components fitted by EM to
//! censored and missing data.

use crate::censored::{
    converged, normal_e_step, normal_log_density, recover_sn_params, regularize_dispersion, row_error, sn_log_density,
    weighted_m_step, CensoredSample, EStepStats, SnComponent,
};
use crate::error::{Error, Result};
use crate::esn::EsnParams;
use crate::linalg::{Mat, Vector};
use crate::special::log_sum_exp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    SkewNormal,
    Normal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    pub weights: Vec<f64>,
    pub components: Vec<EsnParams>,
    pub family: Family,
    pub shared_gamma: bool,
}

impl MixtureModel {
    pub fn new(weights: Vec<f64>, components: Vec<EsnParams>, family: Family, shared_gamma: bool) -> Result<Self> {
        if weights.len() != components.len() || components.is_empty() {
            return Err(Error::Dimension("one weight per component is required".into()));
        }
        let p = components[0].dim();
        if components.iter().any(|c| c.dim() != p || c.tau != 0.0) {
            return Err(Error::InvalidParameter("components must be skew-normal of a common dimension".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter("weights must be positive and sum to one".into()));
        }
        Ok(Self { weights, components, family, shared_gamma })
    }

    pub fn g(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn n_free_params(&self) -> usize {
        n_free_params(self.g(), self.dim(), self.family, self.shared_gamma)
    }
}

/// `(G-1)` weights, `Gp` locations, `Gp` shapes for the skew family, and the
/// dispersion entries.
pub fn n_free_params(g: usize, p: usize, family: Family, shared_gamma: bool) -> usize {
    let disp = p * (p + 1) / 2;
    let shapes = if family == Family::SkewNormal { g * p } else { 0 };
    (g - 1) + g * p + shapes + if shared_gamma { disp } else { g * disp }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criteria {
    pub aic: f64,
    pub bic: f64,
    pub edc: f64,
}

/// `-2ℓ + ρ c_n` with `c_n = 2`, `ln n` and `0.2 √n`.
pub fn selection_criteria(loglik: f64, n: usize, rho: usize) -> Criteria {
    let nf = n as f64;
    let r = rho as f64;
    Criteria { aic: -2.0 * loglik + 2.0 * r, bic: -2.0 * loglik + r * nf.ln(), edc: -2.0 * loglik + r * 0.2 * nf.sqrt() }
}

/// Precomputed component laws.
pub(crate) enum Components {
    Skew(Vec<SnComponent>),
    Normal(Vec<(Vector, Mat)>),
}

impl Components {
    pub(crate) fn new(model: &MixtureModel) -> Result<Self> {
        Ok(match model.family {
            Family::SkewNormal => {
                Components::Skew(model.components.iter().map(|c| SnComponent::new(c.clone())).collect::<Result<_>>()?)
            }
            Family::Normal => Components::Normal(model.components.iter().map(|c| (c.mu.clone(), c.sigma.clone())).collect()),
        })
    }

    pub(crate) fn log_density(&self, s: &CensoredSample, j: usize) -> Result<f64> {
        match self {
            Components::Skew(c) => sn_log_density(s, &c[j]),
            Components::Normal(c) => normal_log_density(s, &c[j].0, &c[j].1),
        }
    }

    pub(crate) fn stats(&self, s: &CensoredSample, j: usize) -> Result<EStepStats> {
        match self {
            Components::Skew(c) => crate::censored::e_step(s, &c[j]),
            Components::Normal(c) => normal_e_step(s, &c[j].0, &c[j].1),
        }
    }

    fn delta(&self, j: usize) -> Vector {
        match self {
            Components::Skew(c) => c[j].delta().clone(),
            Components::Normal(c) => Vector::zeros(c[j].0.len()),
        }
    }
}

/// Posterior membership probabilities (n × G) and the observed log-likelihood.
pub fn responsibilities(samples: &[CensoredSample], model: &MixtureModel) -> Result<(Mat, f64)> {
    let comps = Components::new(model)?;
    posterior(samples, model, &comps)
}

fn posterior(samples: &[CensoredSample], model: &MixtureModel, comps: &Components) -> Result<(Mat, f64)> {
    let g = model.g();
    let mut z = Mat::zeros(samples.len(), g);
    let mut ll = 0.0;
    let mut logs = vec![0.0; g];
    for (i, s) in samples.iter().enumerate() {
        for j in 0..g {
            logs[j] = model.weights[j].ln() + comps.log_density(s, j).map_err(|e| row_error(i, e))?;
        }
        let total = log_sum_exp(&logs);
        if !total.is_finite() {
            return Err(Error::DegenerateRow { row: i, msg: "every component assigns zero likelihood".into() });
        }
        ll += total;
        for j in 0..g {
            z[(i, j)] = (logs[j] - total).exp();
        }
    }
    Ok((z, ll))
}

const SKIP_WEIGHT: f64 = 1e-12;
const TOLERATE_FAILURE_WEIGHT: f64 = 1e-6;

/// Conditional expectations for every (row, component). Returns the stats and
/// the effective weights; pairs with negligible weight are skipped.
pub fn mixture_e_step(samples: &[CensoredSample], model: &MixtureModel) -> Result<(Vec<Vec<EStepStats>>, Mat, f64)> {
    let comps = Components::new(model)?;
    let (z, ll) = posterior(samples, model, &comps)?;
    let (stats, w) = component_stats(samples, model, &comps, &z)?;
    Ok((stats, w, ll))
}

fn component_stats(
    samples: &[CensoredSample],
    model: &MixtureModel,
    comps: &Components,
    z: &Mat,
) -> Result<(Vec<Vec<EStepStats>>, Mat)> {
    let p = model.dim();
    let mut w = z.clone();
    let mut stats = vec![Vec::with_capacity(samples.len()); model.g()];
    for (i, s) in samples.iter().enumerate() {
        for j in 0..model.g() {
            let st = if z[(i, j)] < SKIP_WEIGHT {
                w[(i, j)] = 0.0;
                EStepStats::zeros(p)
            } else {
                match comps.stats(s, j) {
                    Ok(st) if st.is_finite() => st,
                    _ if z[(i, j)] < TOLERATE_FAILURE_WEIGHT => {
                        w[(i, j)] = 0.0;
                        EStepStats::zeros(p)
                    }
                    Ok(_) => return Err(Error::DegenerateRow { row: i, msg: "conditional moments are not finite".into() }),
                    Err(e) => return Err(row_error(i, e)),
                }
            };
            stats[j].push(st);
        }
    }
    Ok((stats, w))
}

/// Updates weights and component parameters from E-step output.
pub fn mixture_m_step(stats: &[Vec<EStepStats>], w: &Mat, model: &MixtureModel) -> Result<MixtureModel> {
    let comps = Components::new(model)?;
    let n = w.nrows() as f64;
    let g = model.g();
    let p = model.dim();
    let fix_zero = model.family == Family::Normal;
    let mut updates = Vec::with_capacity(g);
    for j in 0..g {
        let col: Vec<f64> = w.column(j).iter().cloned().collect();
        let size: f64 = col.iter().sum();
        if size <= p as f64 {
            return Err(Error::ComponentCollapse { component: j, size });
        }
        updates.push(weighted_m_step(&stats[j], &col, &comps.delta(j), fix_zero)?);
    }
    let total: f64 = updates.iter().map(|u| u.weight).sum();
    let weights: Vec<f64> = updates.iter().map(|u| u.weight / total).collect();
    let shared = if model.shared_gamma {
        let s = updates.iter().fold(Mat::zeros(p, p), |acc, u| acc + &u.scatter);
        Some(regularize_dispersion(&(s / n)))
    } else {
        None
    };
    let components = updates
        .iter()
        .map(|u| {
            let gamma = match &shared {
                Some(s) => s.clone(),
                None => regularize_dispersion(&(&u.scatter / u.weight)),
            };
            recover_sn_params(&u.mu, &u.delta, &gamma)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MixtureModel { weights, components, family: model.family, shared_gamma: model.shared_gamma })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitConfig {
    pub g: usize,
    pub family: Family,
    pub shared_gamma: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub n_starts: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { g: 1, family: Family::SkewNormal, shared_gamma: false, tol: 1e-6, max_iter: 500, n_starts: 1, seed: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: MixtureModel,
    pub loglik: f64,
    /// Log-likelihood at the start of every iteration, ending at the returned model.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub posterior: Mat,
    pub classes: Vec<usize>,
    pub n_params: usize,
    pub criteria: Criteria,
}

/// Runs EM from the given starting model.
pub fn fit_from(samples: &[CensoredSample], init: MixtureModel, tol: f64, max_iter: usize) -> Result<FitResult> {
    let mut model = init;
    if model.family == Family::Normal {
        for c in &mut model.components {
            c.lambda.fill(0.0);
        }
    }
    let mut trace: Vec<f64> = Vec::new();
    let mut iterations = 0;
    loop {
        let comps = Components::new(&model)?;
        let (z, ll) = posterior(samples, &model, &comps)?;
        let done = trace.last().is_some_and(|&prev| converged(prev, ll, tol));
        trace.push(ll);
        if done || iterations >= max_iter {
            crate::censored::audit_trace(&trace);
            let classes = (0..samples.len()).map(|i| argmax(z.row(i).iter().cloned())).collect();
            let n_params = model.n_free_params();
            return Ok(FitResult {
                criteria: selection_criteria(ll, samples.len(), n_params),
                model,
                loglik: ll,
                trace,
                iterations,
                converged: done,
                posterior: z,
                classes,
                n_params,
            });
        }
        let (stats, w) = component_stats(samples, &model, &comps, &z)?;
        model = mixture_m_step(&stats, &w, &model)?;
        iterations += 1;
    }
}

fn argmax(it: impl Iterator<Item = f64>) -> usize {
    it.enumerate().fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best }).0
}

/// Fits one model. With several starts, each start (its own k-means seed,
/// partition variant and skewness sign pattern) runs [`SCREEN_ITERS`]
/// iterations; then the better half of the pool continues for twice as many
/// iterations, and so on until one start is left, which runs to convergence.
pub fn fit_fm_msnc(samples: &[CensoredSample], cfg: &FitConfig) -> Result<FitResult> {
    let starts = cfg.n_starts.max(1);
    if starts == 1 {
        let init = init_kmeans(samples, cfg.g, cfg.family, cfg.shared_gamma, cfg.seed)?;
        return fit_from(samples, init, cfg.tol, cfg.max_iter);
    }
    let mut pool = Vec::new();
    let mut last_err = None;
    for s in 0..starts {
        // even starts: k-means on all rows; odd starts: on a random half
        let fraction = if s % 2 == 0 { 1.0 } else { SUBSAMPLE_FRACTION };
        let attempt = init_kmeans_subsample(samples, cfg.g, cfg.family, cfg.shared_gamma, cfg.seed.wrapping_add(s as u64), fraction)
            .and_then(|init| flip_skewness(&init, start_mask(s / 2, cfg)))
            .and_then(|init| fit_from(samples, init, cfg.tol, SCREEN_ITERS.min(cfg.max_iter)));
        match attempt {
            Ok(fit) => pool.push(fit),
            Err(e) => last_err = Some(e),
        }
    }
    let mut budget = SCREEN_ITERS;
    while pool.len() > 1 {
        pool.sort_by(|a, b| b.loglik.total_cmp(&a.loglik));
        pool.truncate(pool.len().div_ceil(2));
        if pool.len() == 1 {
            break;
        }
        budget *= 2;
        let mut next = Vec::with_capacity(pool.len());
        for fit in pool {
            match continue_fit(samples, fit, cfg, budget) {
                Ok(f) => next.push(f),
                Err(e) => last_err = Some(e),
            }
        }
        pool = next;
    }
    let best = pool.pop().ok_or_else(|| last_err.unwrap_or(Error::EmptyCluster(cfg.g)))?;
    continue_fit(samples, best, cfg, cfg.max_iter)
}

/// Runs up to `iters` more iterations (within `cfg.max_iter` overall),
/// concatenating the traces.
fn continue_fit(samples: &[CensoredSample], fit: FitResult, cfg: &FitConfig, iters: usize) -> Result<FitResult> {
    let left = cfg.max_iter.saturating_sub(fit.iterations).min(iters);
    if fit.converged || left == 0 {
        return Ok(fit);
    }
    let mut more = fit_from(samples, fit.model, cfg.tol, left)?;
    let mut trace = fit.trace;
    trace.pop();
    trace.extend(more.trace);
    more.trace = trace;
    more.iterations += fit.iterations;
    Ok(more)
}

/// EM iterations every start receives before the pool is first halved.
pub const SCREEN_ITERS: usize = 25;

/// Share of rows that odd-numbered starts run k-means on.
pub const SUBSAMPLE_FRACTION: f64 = 0.5;

/// Sign pattern for start `s`: the bits of `s` while they enumerate distinct
/// patterns, pseudo-random afterwards.
fn start_mask(s: usize, cfg: &FitConfig) -> u64 {
    if s < 64 {
        s as u64
    } else {
        ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(s as u64)).gen()
    }
}

/// Flips the sign of the skewness of component j, coordinate k, when bit
/// `j·p + k` of `mask` is set, keeping each component's mean and Γ.
pub fn flip_skewness(model: &MixtureModel, mask: u64) -> Result<MixtureModel> {
    if model.family == Family::Normal || mask == 0 {
        return Ok(model.clone());
    }
    let p = model.dim();
    let b = (2.0 / std::f64::consts::PI).sqrt();
    let mut out = model.clone();
    let esns = model.components.iter().map(|c| crate::esn::Esn::new(c.clone())).collect::<Result<Vec<_>>>()?;
    let gamma_shared = esns[0].gamma.clone();
    for (j, e) in esns.iter().enumerate() {
        let mut delta = e.delta.clone();
        for k in 0..p {
            if (j * p + k) < 64 && mask >> (j * p + k) & 1 == 1 {
                delta[k] = -delta[k];
            }
        }
        let mu = &e.params.mu + b * (&e.delta - &delta);
        let gamma = if model.shared_gamma { &gamma_shared } else { &e.gamma };
        out.components[j] = recover_sn_params(&mu, &delta, gamma)?;
    }
    Ok(out)
}

/// Replaces censored cells by a point value: the finite bound of a one-sided
/// interval, the midpoint of a bounded one, the column mean when missing.
pub fn impute_for_init(samples: &[CensoredSample]) -> Vec<Vector> {
    let p = samples.first().map_or(0, |s| s.dim());
    let mut col_mean = vec![0.0; p];
    for k in 0..p {
        let vals: Vec<f64> = samples.iter().filter(|s| !s.censored[k]).map(|s| s.value[k]).collect();
        col_mean[k] = if vals.is_empty() { 0.0 } else { vals.iter().sum::<f64>() / vals.len() as f64 };
    }
    samples
        .iter()
        .map(|s| {
            Vector::from_iterator(
                p,
                (0..p).map(|k| {
                    if !s.censored[k] {
                        s.value[k]
                    } else {
                        match (s.lower[k].is_finite(), s.upper[k].is_finite()) {
                            (true, true) => 0.5 * (s.lower[k] + s.upper[k]),
                            (true, false) => s.lower[k],
                            (false, true) => s.upper[k],
                            (false, false) => col_mean[k],
                        }
                    }
                }),
            )
        })
        .collect()
}

/// k-means++ seeding followed by Lloyd iterations. Returns cluster labels.
pub fn kmeans(x: &[Vector], g: usize, rng: &mut ChaCha8Rng, max_iter: usize) -> Vec<usize> {
    let n = x.len();
    let mut centers: Vec<Vector> = vec![x[rng.gen_range(0..n)].clone()];
    while centers.len() < g {
        let d2: Vec<f64> =
            x.iter().map(|xi| centers.iter().map(|c| (xi - c).norm_squared()).fold(f64::INFINITY, f64::min)).collect();
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut idx = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if u < *d {
                    idx = i;
                    break;
                }
                u -= d;
            }
            idx
        } else {
            rng.gen_range(0..n)
        };
        centers.push(x[pick].clone());
    }
    let mut labels = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, xi) in x.iter().enumerate() {
            let l = (0..g)
                .min_by(|&a, &b| (xi - &centers[a]).norm_squared().total_cmp(&(xi - &centers[b]).norm_squared()))
                .unwrap();
            if labels[i] != l {
                labels[i] = l;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (j, c) in centers.iter_mut().enumerate() {
            let members: Vec<&Vector> = x.iter().zip(&labels).filter(|(_, &l)| l == j).map(|(v, _)| v).collect();
            if !members.is_empty() {
                *c = members.iter().fold(Vector::zeros(c.len()), |acc, v| acc + *v) / members.len() as f64;
            }
        }
    }
    labels
}

/// Starting values from k-means on point-imputed data.
pub fn init_kmeans(samples: &[CensoredSample], g: usize, family: Family, shared_gamma: bool, seed: u64) -> Result<MixtureModel> {
    init_kmeans_subsample(samples, g, family, shared_gamma, seed, 1.0)
}

/// As [`init_kmeans`], but the centroids are found on a random share
/// `fraction` of the rows; every row then joins its nearest centroid.
pub fn init_kmeans_subsample(
    samples: &[CensoredSample],
    g: usize,
    family: Family,
    shared_gamma: bool,
    seed: u64,
    fraction: f64,
) -> Result<MixtureModel> {
    if g == 0 || samples.len() < g {
        return Err(Error::InvalidParameter(format!("cannot form {g} clusters from {} rows", samples.len())));
    }
    let x = impute_for_init(samples);
    let p = x[0].len();
    let (_, total_scatter) = scatter(&x.iter().collect::<Vec<_>>());
    let scale = Vector::from_iterator(p, (0..p).map(|k| total_scatter[(k, k)].sqrt().max(f64::MIN_POSITIVE)));
    let z: Vec<Vector> = x.iter().map(|v| v.component_div(&scale)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = ((fraction * z.len() as f64).round() as usize).clamp(g, z.len());
    const RESTARTS: usize = 10;
    for _ in 0..=RESTARTS {
        let labels = if m == z.len() {
            kmeans(&z, g, &mut rng, 100)
        } else {
            let rows = rand::seq::index::sample(&mut rng, z.len(), m);
            let sub: Vec<Vector> = rows.iter().map(|i| z[i].clone()).collect();
            let sub_labels = kmeans(&sub, g, &mut rng, 100);
            let centers: Vec<Vector> = (0..g)
                .map(|j| {
                    let members: Vec<&Vector> = sub.iter().zip(&sub_labels).filter(|(_, &l)| l == j).map(|(v, _)| v).collect();
                    members.iter().fold(Vector::zeros(p), |acc, v| acc + *v) / members.len().max(1) as f64
                })
                .collect();
            z.iter()
                .map(|zi| (0..g).min_by(|&a, &b| (zi - &centers[a]).norm_squared().total_cmp(&(zi - &centers[b]).norm_squared())).unwrap())
                .collect()
        };
        match init_from_labels(samples, &labels, g, family, shared_gamma) {
            Err(Error::EmptyCluster(_)) => continue,
            r => return r,
        }
    }
    Err(Error::EmptyCluster(RESTARTS))
}

/// Starting model from a hard partition of the rows: weights from cluster
/// sizes, cluster means and covariances, λ⁰ from skewness signs.
pub fn init_from_labels(
    samples: &[CensoredSample],
    labels: &[usize],
    g: usize,
    family: Family,
    shared_gamma: bool,
) -> Result<MixtureModel> {
    let x = impute_for_init(samples);
    let p = x[0].len();
    let (_, total_scatter) = scatter(&x.iter().collect::<Vec<_>>());
    let floor = 1e-3 * total_scatter.trace() / p as f64;
    let groups: Vec<Vec<&Vector>> =
        (0..g).map(|j| x.iter().zip(labels).filter(|(_, &l)| l == j).map(|(v, _)| v).collect()).collect();
    if groups.iter().any(|m| m.len() < 2) {
        return Err(Error::EmptyCluster(0));
    }
    let mut pooled = Mat::zeros(p, p);
    let mut parts = Vec::with_capacity(g);
    for m in &groups {
        let (mean, cov) = scatter(m);
        let cov = crate::linalg::floor_eigenvalues(&cov, floor);
        let lambda = if family == Family::Normal { Vector::zeros(p) } else { skewness_signs(m, &mean) };
        pooled += &cov * m.len() as f64;
        parts.push((m.len() as f64 / x.len() as f64, EsnParams::skew_normal(mean, cov, lambda)?));
    }
    let pooled = pooled / x.len() as f64;
    let mut components: Vec<EsnParams> = parts.iter().map(|p| p.1.clone()).collect();
    if shared_gamma {
        // Σ_j = Γ + Δ_jΔ_jᵀ with Γ from the pooled within-cluster scatter
        for c in &mut components {
            let delta = crate::esn::Esn::new(c.clone())?.delta;
            *c = recover_sn_params(&c.mu, &delta, &pooled)?;
        }
    }
    MixtureModel::new(parts.iter().map(|p| p.0).collect(), components, family, shared_gamma)
}

/// Signs of the coordinatewise sample skewness of a cluster, as ±1.
fn skewness_signs(m: &[&Vector], mean: &Vector) -> Vector {
    Vector::from_iterator(
        mean.len(),
        (0..mean.len()).map(|k| {
            let s: f64 = m.iter().map(|v| (v[k] - mean[k]).powi(3)).sum();
            if s < 0.0 {
                -1.0
            } else {
                1.0
            }
        }),
    )
}

fn scatter(m: &[&Vector]) -> (Vector, Mat) {
    let p = m[0].len();
    let n = m.len() as f64;
    let mean = m.iter().fold(Vector::zeros(p), |acc, v| acc + *v) / n;
    let cov = m.iter().fold(Mat::zeros(p, p), |acc, v| acc + (*v - &mean) * (*v - &mean).transpose()) / n;
    (mean, cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parameter_count_and_criteria() {
        assert_eq!(n_free_params(3, 5, Family::SkewNormal, true), 47);
        assert_eq!(n_free_params(2, 2, Family::SkewNormal, false), 15);
        assert_eq!(n_free_params(2, 2, Family::Normal, false), 11);
        let c = selection_criteria(-697.6815, 184, 47);
        assert_relative_eq!(c.aic, 1489.363, epsilon = 1e-3);
        assert_relative_eq!(c.bic, 1395.363 + 47.0 * (184f64).ln(), epsilon = 1e-3);
        assert_relative_eq!(c.edc, 1395.363 + 47.0 * 0.2 * (184f64).sqrt(), epsilon = 1e-3);
    }

    #[test]
    fn init_imputation_rules() {
        let inf = f64::INFINITY;
        let rows = vec![
            CensoredSample::observed(Vector::from_vec(vec![1.0, 4.0])),
            CensoredSample::new(Vector::from_vec(vec![0.0, 0.0]), vec![true, true], Vector::from_vec(vec![-inf, 1.0]),
                Vector::from_vec(vec![0.5, 3.0])).unwrap(),
            CensoredSample::new(Vector::from_vec(vec![0.0, 2.0]), vec![true, false], Vector::from_vec(vec![-inf, 0.0]),
                Vector::from_vec(vec![inf, 0.0])).unwrap(),
        ];
        let x = impute_for_init(&rows);
        assert_eq!(x[1].as_slice(), &[0.5, 2.0]);
        assert_eq!(x[2].as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn single_cluster_uses_column_means() {
        let rows: Vec<_> = (0..20)
            .map(|i| CensoredSample::observed(Vector::from_vec(vec![i as f64, (i * i) as f64 / 10.0])))
            .collect();
        let m = init_kmeans(&rows, 1, Family::SkewNormal, false, 3).unwrap();
        assert_eq!(m.weights, vec![1.0]);
        assert_relative_eq!(m.components[0].mu[0], 9.5, epsilon = 1e-12);
        assert_relative_eq!(m.components[0].mu[1], 12.35, epsilon = 1e-12);
    }
}
