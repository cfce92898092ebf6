//! EM for a single multivariate skew-normal component under interval
//! censoring and missingness.
//!
//! The model is written through the stochastic representation
//! `Y = μ + ΔT + Γ^{1/2}Z`, `T ~ HN(0,1)`. The E-step returns the conditional
//! moments of `(Y, T)` given the observed cells and the censoring intervals.

use crate::error::{Error, Result};
use std::sync::atomic::{AtomicUsize, Ordering};
use crate::esn::{marginal_conditional_split, Esn, EsnParams};
use crate::linalg::{floor_eigenvalues, spd_inverse, sub_matrix, sub_vector, symmetric_inv_sqrt, symmetrize, Mat, Vector};
use crate::mvn::{mvn_log_pdf, mvn_rect_prob};
use crate::special::{norm_cdf, norm_pdf_var, zeta};
use crate::truncated::{tesn_moments, tn_mean_with_prob, tn_moments};

/// One observation: observed cells carry a value, censored cells an interval.
/// A missing cell is a censored cell with both bounds infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredSample {
    /// Observed values; entries at censored positions are ignored.
    pub value: Vector,
    pub censored: Vec<bool>,
    pub lower: Vector,
    pub upper: Vector,
}

impl CensoredSample {
    pub fn new(value: Vector, censored: Vec<bool>, lower: Vector, upper: Vector) -> Result<Self> {
        let p = value.len();
        if censored.len() != p || lower.len() != p || upper.len() != p {
            return Err(Error::Dimension(format!("sample with {p} values has inconsistent masks or bounds")));
        }
        for k in 0..p {
            if censored[k] {
                if lower[k].is_nan() || upper[k].is_nan() || lower[k] > upper[k] || lower[k] == f64::INFINITY
                    || upper[k] == f64::NEG_INFINITY
                {
                    return Err(Error::InvalidRectangle(k));
                }
            } else if !value[k].is_finite() {
                return Err(Error::InvalidParameter(format!("observed cell {k} is not finite")));
            }
        }
        Ok(Self { value, censored, lower, upper })
    }

    pub fn observed(value: Vector) -> Self {
        let p = value.len();
        Self {
            value,
            censored: vec![false; p],
            lower: Vector::from_element(p, f64::NEG_INFINITY),
            upper: Vector::from_element(p, f64::INFINITY),
        }
    }

    pub fn dim(&self) -> usize {
        self.value.len()
    }

    pub fn is_missing(&self, k: usize) -> bool {
        self.censored[k] && self.lower[k] == f64::NEG_INFINITY && self.upper[k] == f64::INFINITY
    }

    pub fn observed_idx(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&k| !self.censored[k]).collect()
    }

    pub fn censored_idx(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&k| self.censored[k]).collect()
    }

    pub fn has_missing(&self) -> bool {
        (0..self.dim()).any(|k| self.is_missing(k))
    }

    pub fn observed_values(&self) -> Vector {
        sub_vector(&self.value, &self.observed_idx())
    }
}

/// Conditional expectations for one observation under one component.
#[derive(Debug, Clone, PartialEq)]
pub struct EStepStats {
    /// `E[Y]`
    pub y: Vector,
    /// `E[Y Yᵀ]`
    pub yy: Mat,
    /// `E[T]`
    pub t: f64,
    /// `E[T²]`
    pub tt: f64,
    /// `E[T Y]`
    pub ty: Vector,
    /// Mean of the shifted Gaussian `W0` (observed cells copied).
    pub y0: Vector,
    /// Ratio-weighted normalizer `γ̂`.
    pub gamma_hat: f64,
}

impl EStepStats {
    pub fn is_finite(&self) -> bool {
        self.y.iter().chain(self.yy.iter()).chain(self.ty.iter()).chain(self.y0.iter()).all(|x| x.is_finite())
            && [self.t, self.tt, self.gamma_hat].iter().all(|x| x.is_finite())
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            y: Vector::zeros(p),
            yy: Mat::zeros(p, p),
            t: 0.0,
            tt: 0.0,
            ty: Vector::zeros(p),
            y0: Vector::zeros(p),
            gamma_hat: 0.0,
        }
    }
}

/// A skew-normal component with the E-step constants precomputed.
#[derive(Debug, Clone)]
pub struct SnComponent {
    pub esn: Esn,
    pub gamma_inv: Mat,
    /// `Γ⁻¹Δ`
    pub a: Vector,
    /// `M = (1 + ΔᵀΓ⁻¹Δ)^{-1/2}`
    pub m: f64,
}

impl SnComponent {
    pub fn new(params: EsnParams) -> Result<Self> {
        if params.tau != 0.0 {
            return Err(Error::InvalidParameter("mixture components are skew-normal (τ = 0)".into()));
        }
        let esn = Esn::new(params)?;
        let gamma_inv = spd_inverse(&esn.gamma)?;
        let a = &gamma_inv * &esn.delta;
        let m = 1.0 / (1.0 + esn.delta.dot(&a)).sqrt();
        Ok(Self { esn, gamma_inv, a, m })
    }

    pub fn mu(&self) -> &Vector {
        &self.esn.params.mu
    }

    pub fn delta(&self) -> &Vector {
        &self.esn.delta
    }

    /// Fills the latent-variable moments from `ŷ`, `ŷ²`, `ŷ0` and `γ̂`.
    fn complete(&self, y: Vector, yy: Mat, y0: Vector, gamma_hat: f64) -> EStepStats {
        let mu = self.mu();
        let a = &self.a;
        let m = self.m;
        let m2 = m * m;
        let centered = &yy - &y * mu.transpose() - mu * y.transpose() + mu * mu.transpose();
        let t = m2 * a.dot(&(&y - mu)) + gamma_hat * m;
        let tt = m2 * m2 * a.dot(&(&centered * a)) + m2 + gamma_hat * m2 * m * a.dot(&(&y0 - mu));
        let ty = (&yy - &y * mu.transpose()) * a * m2 + &y0 * (gamma_hat * m);
        EStepStats { y, yy, t, tt, ty, y0, gamma_hat }
    }
}

/// E-step for a fully observed row.
pub fn e_step_observed(y: &Vector, comp: &SnComponent) -> EStepStats {
    let gamma_hat = zeta(comp.m * comp.a.dot(&(y - comp.mu())));
    comp.complete(y.clone(), y * y.transpose(), y.clone(), gamma_hat)
}

/// The conditional law of the censored block given the observed block.
fn censored_given_observed(sample: &CensoredSample, comp: &SnComponent) -> Result<(Vec<usize>, Vec<usize>, Esn)> {
    let obs = sample.observed_idx();
    let cen = sample.censored_idx();
    let split = marginal_conditional_split(&comp.esn, &obs, &cen)?;
    let cond = Esn::new(split.conditional.at(&sub_vector(&sample.value, &obs)))?;
    Ok((obs, cen, cond))
}

fn assemble(
    sample: &CensoredSample,
    obs: &[usize],
    cen: &[usize],
    w: &Vector,
    ww: &Mat,
    w0: &Vector,
) -> (Vector, Mat, Vector) {
    let p = sample.dim();
    let mut y = Vector::zeros(p);
    let mut y0 = Vector::zeros(p);
    for &k in obs {
        y[k] = sample.value[k];
        y0[k] = sample.value[k];
    }
    for (r, &k) in cen.iter().enumerate() {
        y[k] = w[r];
        y0[k] = w0[r];
    }
    let mut yy = &y * y.transpose();
    for (r, &k) in cen.iter().enumerate() {
        for (s, &l) in cen.iter().enumerate() {
            yy[(k, l)] = ww[(r, s)];
        }
    }
    (y, symmetrize(&yy), y0)
}

fn eta(cond: &Esn) -> f64 {
    norm_pdf_var(cond.params.tau, 1.0 + cond.params.lambda.norm_squared()) / norm_cdf(cond.tau_tilde)
}

/// E-step for a row with censored cells, treating every censored cell (missing
/// ones included) as an interval in the truncated conditional law.
pub fn e_step_mixed(sample: &CensoredSample, comp: &SnComponent) -> Result<EStepStats> {
    let (obs, cen, cond) = censored_given_observed(sample, comp)?;
    if cen.is_empty() {
        return Ok(e_step_observed(&sample.value, comp));
    }
    let v1 = sub_vector(&sample.lower, &cen);
    let v2 = sub_vector(&sample.upper, &cen);
    let t = tesn_moments(&v1, &v2, &cond)?;
    let shifted = &cond.params.mu - &cond.delta * cond.tau_tilde;
    let (w0, l) = shifted_tn_mean(&v1, &v2, &shifted, &cond.gamma)?;
    let gamma_hat = eta(&cond) * l / t.prob;
    let (y, yy, y0) = assemble(sample, &obs, &cen, &t.moments.mean, &t.moments.second, &w0);
    Ok(comp.complete(y, yy, y0, gamma_hat))
}

/// Truncated mean under the shifted Gaussian. The rectangle can be far in its
/// tail while still likely under the ESN; the γ̂ term then vanishes and the
/// mean only needs to be finite.
fn shifted_tn_mean(lower: &Vector, upper: &Vector, mean: &Vector, cov: &Mat) -> Result<(Vector, f64)> {
    match tn_mean_with_prob(lower, upper, mean, cov) {
        Err(Error::ZeroProbability) => {
            let w0 = Vector::from_iterator(mean.len(), (0..mean.len()).map(|k| mean[k].clamp(lower[k], upper[k])));
            Ok((w0, 0.0))
        }
        r => r,
    }
}

/// E-step for a row whose cells are all censored.
pub fn e_step_censored(sample: &CensoredSample, comp: &SnComponent) -> Result<EStepStats> {
    if !sample.censored.iter().all(|&c| c) {
        return Err(Error::InvalidParameter("e_step_censored needs every cell censored".into()));
    }
    e_step_mixed(sample, comp)
}

/// E-step for a row with missing cells that integrates the missing block in
/// closed form, so truncated moments are only taken over the genuinely
/// censored cells.
pub fn split_missing_censored(sample: &CensoredSample, comp: &SnComponent) -> Result<EStepStats> {
    let (obs, cen, cond) = censored_given_observed(sample, comp)?;
    let cc: Vec<usize> = (0..cen.len()).filter(|&r| !sample.is_missing(cen[r])).collect();
    let cm: Vec<usize> = (0..cen.len()).filter(|&r| sample.is_missing(cen[r])).collect();
    let nc = cen.len();
    let mu = &cond.params.mu;
    let shifted = mu - &cond.delta * cond.tau_tilde;

    // moments of the censored block and ratio-weighted moments
    let (w, ww, w0, gamma_hat) = if cc.is_empty() {
        (cond.mean(), cond.second_moment(), shifted.clone(), eta(&cond))
    } else {
        let split = marginal_conditional_split(&cond, &cc, &cm)?;
        let marg = Esn::new(split.marginal.clone())?;
        let lo = sub_vector(&sample.lower, &cc.iter().map(|&r| cen[r]).collect::<Vec<_>>());
        let hi = sub_vector(&sample.upper, &cc.iter().map(|&r| cen[r]).collect::<Vec<_>>());
        let tc = tesn_moments(&lo, &hi, &marg)?;
        let (ec, ecc, r0, r1) = (&tc.moments.mean, &tc.moments.second, tc.ratio0, &tc.ratio1);

        let c = &split.conditional;
        let b = &c.regression;
        let s = &c.sigma;
        let kappa = 1.0 / (1.0 + c.lambda.norm_squared()).sqrt();
        let delta_m = crate::linalg::symmetric_sqrt(s)? * &c.lambda * kappa;
        let u = &c.mu2 - b * &c.mu1;
        let ezeta_u = &u * r0 + b * r1;
        let e_tau_zeta = kappa * ((c.tau - c.phi_tilde.dot(&c.mu1)) * r0 + c.phi_tilde.dot(r1));

        let em = &u + b * ec + &delta_m * r0;
        let emc = &u * ec.transpose() + b * ecc + &delta_m * r1.transpose();
        let emm = s + &u * u.transpose() + &u * ec.transpose() * b.transpose() + b * ec * u.transpose()
            + b * ecc * b.transpose()
            + &ezeta_u * delta_m.transpose()
            + &delta_m * ezeta_u.transpose()
            - &delta_m * delta_m.transpose() * e_tau_zeta;

        let mut w = Vector::zeros(nc);
        let mut ww = Mat::zeros(nc, nc);
        for (i, &r) in cc.iter().enumerate() {
            w[r] = ec[i];
            for (j, &q) in cc.iter().enumerate() {
                ww[(r, q)] = ecc[(i, j)];
            }
        }
        for (i, &r) in cm.iter().enumerate() {
            w[r] = em[i];
            for (j, &q) in cc.iter().enumerate() {
                ww[(r, q)] = emc[(i, j)];
                ww[(q, r)] = emc[(i, j)];
            }
            for (j, &q) in cm.iter().enumerate() {
                ww[(r, q)] = emm[(i, j)];
            }
        }

        // shifted Gaussian: truncated block, then regression for the free block
        let g = &cond.gamma;
        let g_cc = sub_matrix(g, &cc, &cc);
        let m_c = sub_vector(&shifted, &cc);
        let (w0c, l) = shifted_tn_mean(&lo, &hi, &m_c, &g_cc)?;
        let reg = sub_matrix(g, &cm, &cc) * spd_inverse(&g_cc)?;
        let w0m = sub_vector(&shifted, &cm) + reg * (&w0c - &m_c);
        let mut w0 = Vector::zeros(nc);
        for (i, &r) in cc.iter().enumerate() {
            w0[r] = w0c[i];
        }
        for (i, &r) in cm.iter().enumerate() {
            w0[r] = w0m[i];
        }
        (w, symmetrize(&ww), w0, eta(&cond) * l / tc.prob)
    };
    let (y, yy, y0) = assemble(sample, &obs, &cen, &w, &ww, &w0);
    Ok(comp.complete(y, yy, y0, gamma_hat))
}

/// Dispatches to the observed, split or general path.
pub fn e_step(sample: &CensoredSample, comp: &SnComponent) -> Result<EStepStats> {
    if sample.censored.iter().all(|&c| !c) {
        Ok(e_step_observed(&sample.value, comp))
    } else if sample.has_missing() {
        split_missing_censored(sample, comp)
    } else {
        e_step_mixed(sample, comp)
    }
}

/// Log density of the observed information of a row under one component:
/// marginal density of the observed cells times the conditional probability
/// of the censoring rectangle.
pub fn sn_log_density(sample: &CensoredSample, comp: &SnComponent) -> Result<f64> {
    let obs = sample.observed_idx();
    let cen: Vec<usize> =
        sample.censored_idx().into_iter().filter(|&k| !sample.is_missing(k)).collect();
    let missing: Vec<usize> = sample.censored_idx().into_iter().filter(|&k| sample.is_missing(k)).collect();
    if cen.is_empty() && missing.is_empty() {
        return Ok(comp.esn.log_pdf(&sample.value));
    }
    if obs.is_empty() && cen.is_empty() {
        return Ok(0.0);
    }
    // drop missing cells, they integrate out
    let mut kept = obs.clone();
    kept.extend(&cen);
    let split = if missing.is_empty() {
        marginal_conditional_split(&comp.esn, &obs, &cen)?
    } else {
        let top = Esn::new(marginal_conditional_split(&comp.esn, &kept, &missing)?.marginal)?;
        let obs_local: Vec<usize> = (0..obs.len()).collect();
        let cen_local: Vec<usize> = (obs.len()..kept.len()).collect();
        marginal_conditional_split(&top, &obs_local, &cen_local)?
    };
    let y_o = sub_vector(&sample.value, &obs);
    let log_obs = if obs.is_empty() { 0.0 } else { Esn::new(split.marginal)?.log_pdf(&y_o) };
    if cen.is_empty() {
        return Ok(log_obs);
    }
    let cond = Esn::new(split.conditional.at(&y_o))?;
    let prob = cond.rect_prob(&sub_vector(&sample.lower, &cen), &sub_vector(&sample.upper, &cen))?;
    Ok(log_obs + prob.ln())
}

/// Observed-data log-likelihood of a single skew-normal component.
pub fn msnc_loglik(samples: &[CensoredSample], params: &EsnParams) -> Result<f64> {
    let comp = SnComponent::new(params.clone())?;
    let mut total = 0.0;
    for (i, s) in samples.iter().enumerate() {
        let l = sn_log_density(s, &comp).map_err(|e| row_error(i, e))?;
        if l == f64::NEG_INFINITY {
            return Err(Error::DegenerateRow { row: i, msg: "zero likelihood".into() });
        }
        total += l;
    }
    Ok(total)
}

pub(crate) fn row_error(row: usize, e: Error) -> Error {
    match e {
        Error::DegenerateRow { .. } => e,
        other => Error::DegenerateRow { row, msg: other.to_string() },
    }
}

/// Weighted sufficient statistics for one component's M-step.
#[derive(Debug, Clone)]
pub struct ComponentUpdate {
    pub mu: Vector,
    pub delta: Vector,
    /// Weighted scatter `Σ_i w_i E[(Y-μ-ΔT)(Y-μ-ΔT)ᵀ]`, not yet divided.
    pub scatter: Mat,
    pub weight: f64,
}

/// Conditional maximization: μ given the current Δ, then Δ given the new μ,
/// then the scatter of `Y - μ - ΔT` at the new (μ, Δ).
pub fn weighted_m_step(stats: &[EStepStats], weights: &[f64], delta_current: &Vector, fix_delta_zero: bool) -> Result<ComponentUpdate> {
    let p = delta_current.len();
    let weight: f64 = weights.iter().sum();
    if !(weight > 0.0) {
        return Err(Error::InvalidParameter("M-step with zero total weight".into()));
    }
    let delta_k = if fix_delta_zero { Vector::zeros(p) } else { delta_current.clone() };
    let mut sy = Vector::zeros(p);
    let mut st = 0.0;
    let mut stt = 0.0;
    let mut sty = Vector::zeros(p);
    let mut syy = Mat::zeros(p, p);
    for (s, &w) in stats.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        sy += &s.y * w;
        st += w * s.t;
        stt += w * s.tt;
        sty += &s.ty * w;
        syy += &s.yy * w;
    }
    let mu = (&sy - &delta_k * st) / weight;
    let delta = if fix_delta_zero {
        Vector::zeros(p)
    } else {
        if !(stt > 0.0) {
            return Err(Error::InvalidParameter("non-positive latent second moment".into()));
        }
        (&sty - &mu * st) / stt
    };
    let my = &mu * sy.transpose();
    let dty = &delta * sty.transpose();
    let dm = &delta * mu.transpose();
    let scatter = &syy - &my - my.transpose() + &mu * mu.transpose() * weight - &dty - dty.transpose()
        + &delta * delta.transpose() * stt
        + (&dm + dm.transpose()) * st;
    Ok(ComponentUpdate { mu, delta, scatter: symmetrize(&scatter), weight })
}

/// Floors the eigenvalues of a dispersion estimate at `1e-8 · trace / p`.
pub fn regularize_dispersion(gamma: &Mat) -> Mat {
    let p = gamma.nrows();
    let floor = (1e-8 * gamma.trace() / p as f64).max(1e-300);
    floor_eigenvalues(&symmetrize(gamma), floor)
}

/// Unweighted M-step: returns `(μ, Δ, Γ)`.
pub fn m_step(stats: &[EStepStats], delta_current: &Vector) -> Result<(Vector, Vector, Mat)> {
    let w = vec![1.0; stats.len()];
    let u = weighted_m_step(stats, &w, delta_current, false)?;
    let gamma = regularize_dispersion(&(u.scatter / u.weight));
    Ok((u.mu, u.delta, gamma))
}

/// Maps `(μ, Δ, Γ)` back to `(μ, Σ, λ)` with `Σ = Γ + ΔΔᵀ`.
pub fn recover_sn_params(mu: &Vector, delta: &Vector, gamma: &Mat) -> Result<EsnParams> {
    let sigma = symmetrize(&(gamma + delta * delta.transpose()));
    let inv_sqrt = symmetric_inv_sqrt(&sigma)?;
    let sigma_inv = spd_inverse(&sigma)?;
    let q = delta.dot(&(&sigma_inv * delta));
    if !(q < 1.0) {
        return Err(Error::InvalidParameter("ΔᵀΣ⁻¹Δ must be below one".into()));
    }
    let lambda = inv_sqrt * delta / (1.0 - q).sqrt();
    EsnParams::skew_normal(mu.clone(), sigma, lambda)
}

/// Stopping rule on successive log-likelihoods.
pub fn converged(prev: f64, next: f64, tol: f64) -> bool {
    (next / prev - 1.0).abs() < tol
}

/// Relative slack allowed for a decrease of the log-likelihood between
/// iterations.
pub const MONOTONE_SLACK: f64 = 1e-8;

static AUDITED_FITS: AtomicUsize = AtomicUsize::new(0);
static AUDIT_VIOLATIONS: AtomicUsize = AtomicUsize::new(0);

/// Number of steps of `trace` that decrease by more than [`MONOTONE_SLACK`].
pub fn monotonicity_violations(trace: &[f64]) -> usize {
    trace.windows(2).filter(|w| w[1] < w[0] - MONOTONE_SLACK * w[0].abs()).count()
}

/// Every EM driver in the crate reports its final trace here, so a process
/// can check monotonicity across all fits it ran.
pub fn audit_trace(trace: &[f64]) {
    AUDITED_FITS.fetch_add(1, Ordering::Relaxed);
    AUDIT_VIOLATIONS.fetch_add(monotonicity_violations(trace), Ordering::Relaxed);
}

/// `(fits audited, violating steps)` since the process started.
pub fn monotonicity_audit() -> (usize, usize) {
    (AUDITED_FITS.load(Ordering::Relaxed), AUDIT_VIOLATIONS.load(Ordering::Relaxed))
}

#[derive(Debug, Clone)]
pub struct MsncFit {
    pub params: EsnParams,
    pub loglik: f64,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Fits a single skew-normal component (or a normal one when `fix_lambda_zero`).
pub fn fit_msnc(samples: &[CensoredSample], init: &EsnParams, tol: f64, max_iter: usize, fix_lambda_zero: bool) -> Result<MsncFit> {
    let mut params = init.clone();
    if fix_lambda_zero {
        params.lambda.fill(0.0);
    }
    let mut trace = Vec::new();
    let mut is_converged = false;
    let mut iterations = 0;
    loop {
        let comp = SnComponent::new(params.clone())?;
        let mut ll = 0.0;
        let mut stats = Vec::with_capacity(samples.len());
        for (i, s) in samples.iter().enumerate() {
            ll += sn_log_density(s, &comp).map_err(|e| row_error(i, e))?;
            stats.push(e_step(s, &comp).map_err(|e| row_error(i, e))?);
        }
        if let Some(&prev) = trace.last() {
            if converged(prev, ll, tol) {
                is_converged = true;
            }
        }
        trace.push(ll);
        if is_converged || iterations >= max_iter {
            audit_trace(&trace);
            return Ok(MsncFit { params, loglik: ll, trace, iterations, converged: is_converged });
        }
        let w = vec![1.0; stats.len()];
        let u = weighted_m_step(&stats, &w, comp.delta(), fix_lambda_zero)?;
        let gamma = regularize_dispersion(&(u.scatter / u.weight));
        params = recover_sn_params(&u.mu, &u.delta, &gamma)?;
        iterations += 1;
    }
}

/// E-step of the censored multivariate normal model: `ŷ`, `ŷ²` only
/// (latent fields are zero).
pub fn normal_e_step(sample: &CensoredSample, mu: &Vector, sigma: &Mat) -> Result<EStepStats> {
    let obs = sample.observed_idx();
    let cen = sample.censored_idx();
    let p = sample.dim();
    if cen.is_empty() {
        let y = sample.value.clone();
        return Ok(EStepStats { yy: &y * y.transpose(), y0: y.clone(), y, ..EStepStats::zeros(p) });
    }
    let (cmean, ccov) = normal_conditional(sample, mu, sigma, &obs, &cen)?;
    let mp = tn_moments(&sub_vector(&sample.lower, &cen), &sub_vector(&sample.upper, &cen), &cmean, &ccov)?;
    let (y, yy, y0) = assemble(sample, &obs, &cen, &mp.mean, &mp.second, &mp.mean);
    Ok(EStepStats { y, yy, y0, ..EStepStats::zeros(p) })
}

fn normal_conditional(sample: &CensoredSample, mu: &Vector, sigma: &Mat, obs: &[usize], cen: &[usize]) -> Result<(Vector, Mat)> {
    let mu_c = sub_vector(mu, cen);
    let s_cc = sub_matrix(sigma, cen, cen);
    if obs.is_empty() {
        return Ok((mu_c, s_cc));
    }
    let s_oo_inv = spd_inverse(&sub_matrix(sigma, obs, obs))?;
    let s_co = sub_matrix(sigma, cen, obs);
    let reg = &s_co * s_oo_inv;
    let mean = mu_c + &reg * (sub_vector(&sample.value, obs) - sub_vector(mu, obs));
    let cov = symmetrize(&(s_cc - &reg * s_co.transpose()));
    Ok((mean, cov))
}

/// Log density of a row under the censored normal model.
pub fn normal_log_density(sample: &CensoredSample, mu: &Vector, sigma: &Mat) -> Result<f64> {
    let obs = sample.observed_idx();
    let cen = sample.censored_idx();
    let log_obs = if obs.is_empty() {
        0.0
    } else {
        mvn_log_pdf(&sub_vector(&sample.value, &obs), &sub_vector(mu, &obs), &sub_matrix(sigma, &obs, &obs))?
    };
    if cen.is_empty() {
        return Ok(log_obs);
    }
    let (cmean, ccov) = normal_conditional(sample, mu, sigma, &obs, &cen)?;
    let prob = mvn_rect_prob(&sub_vector(&sample.lower, &cen), &sub_vector(&sample.upper, &cen), &cmean, &ccov)?;
    Ok(log_obs + prob.ln())
}

/// Fits the censored multivariate normal model by its own EM.
pub fn fit_censored_normal(samples: &[CensoredSample], mu0: &Vector, sigma0: &Mat, tol: f64, max_iter: usize) -> Result<MsncFit> {
    let p = mu0.len();
    let mut mu = mu0.clone();
    let mut sigma = sigma0.clone();
    let mut trace: Vec<f64> = Vec::new();
    let mut iterations = 0;
    loop {
        let mut ll = 0.0;
        let mut sy = Vector::zeros(p);
        let mut syy = Mat::zeros(p, p);
        for (i, s) in samples.iter().enumerate() {
            ll += normal_log_density(s, &mu, &sigma).map_err(|e| row_error(i, e))?;
            let st = normal_e_step(s, &mu, &sigma).map_err(|e| row_error(i, e))?;
            sy += st.y;
            syy += st.yy;
        }
        let done = trace.last().is_some_and(|&prev| converged(prev, ll, tol));
        trace.push(ll);
        if done || iterations >= max_iter {
            audit_trace(&trace);
            let params = EsnParams::skew_normal(mu, sigma, Vector::zeros(p))?;
            return Ok(MsncFit { params, loglik: ll, trace, iterations, converged: done });
        }
        let n = samples.len() as f64;
        mu = sy / n;
        sigma = regularize_dispersion(&(syy / n - &mu * mu.transpose()));
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const INF: f64 = f64::INFINITY;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    fn comp3() -> SnComponent {
        let sigma = Mat::from_row_slice(3, 3, &[2.0, 0.5, -0.3, 0.5, 1.5, 0.4, -0.3, 0.4, 1.0]);
        SnComponent::new(EsnParams::skew_normal(v(&[0.5, -0.2, 1.0]), sigma, v(&[1.5, -2.0, 0.7])).unwrap()).unwrap()
    }

    /// Moments of (Y_C, T) from the joint Gaussian of (Y, T) conditioned on
    /// the observed cells and truncated to the censoring box times T > 0.
    fn augmented_oracle(sample: &CensoredSample, comp: &SnComponent) -> (Vector, Mat, f64, f64, Vector) {
        let p = sample.dim();
        let (mean, cov) = comp.esn.augmented();
        let obs = sample.observed_idx();
        let mut free = sample.censored_idx();
        free.push(p);
        let mut cm = sub_vector(&mean, &free);
        let mut cc = sub_matrix(&cov, &free, &free);
        if !obs.is_empty() {
            let reg = sub_matrix(&cov, &free, &obs) * spd_inverse(&sub_matrix(&cov, &obs, &obs)).unwrap();
            cm += &reg * (sub_vector(&sample.value, &obs) - sub_vector(&mean, &obs));
            cc = symmetrize(&(cc - &reg * sub_matrix(&cov, &obs, &free)));
        }
        let nf = free.len();
        let mut lo = Vector::from_element(nf, 0.0);
        let mut hi = Vector::from_element(nf, INF);
        for (r, &k) in free.iter().enumerate().take(nf - 1) {
            lo[r] = sample.lower[k];
            hi[r] = sample.upper[k];
        }
        let mp = tn_moments(&lo, &hi, &cm, &cc).unwrap();
        let mut y = sample.value.clone();
        let mut ty = Vector::zeros(p);
        let t = mp.mean[nf - 1];
        for &k in &obs {
            ty[k] = sample.value[k] * t;
        }
        for (r, &k) in free.iter().enumerate().take(nf - 1) {
            y[k] = mp.mean[r];
            ty[k] = mp.second[(r, nf - 1)];
        }
        let mut yy = &y * y.transpose();
        for (r, &k) in free.iter().enumerate().take(nf - 1) {
            for (s, &l) in free.iter().enumerate().take(nf - 1) {
                yy[(k, l)] = mp.second[(r, s)];
            }
        }
        (y, yy, t, mp.second[(nf - 1, nf - 1)], ty)
    }

    fn assert_matches_oracle(st: &EStepStats, sample: &CensoredSample, comp: &SnComponent, tol: f64) {
        let (y, yy, t, tt, ty) = augmented_oracle(sample, comp);
        assert_relative_eq!(st.y, y, epsilon = tol);
        assert_relative_eq!(st.yy, yy, epsilon = tol);
        assert_relative_eq!(st.t, t, epsilon = tol);
        assert_relative_eq!(st.tt, tt, epsilon = tol);
        assert_relative_eq!(st.ty, ty, epsilon = tol);
    }

    #[test]
    fn observed_row_matches_oracle() {
        let comp = comp3();
        let s = CensoredSample::observed(v(&[1.0, 0.3, 0.5]));
        assert_matches_oracle(&e_step_observed(&s.value, &comp), &s, &comp, 1e-10);
    }

    #[test]
    fn censored_row_matches_oracle() {
        let comp = comp3();
        let s = CensoredSample::new(v(&[0.0; 3]), vec![true; 3], v(&[-INF, -1.0, 0.0]), v(&[0.5, 1.0, INF])).unwrap();
        assert_matches_oracle(&e_step_censored(&s, &comp).unwrap(), &s, &comp, 1e-8);
    }

    #[test]
    fn mixed_row_matches_oracle() {
        let comp = comp3();
        let s = CensoredSample::new(v(&[0.7, 0.0, 0.0]), vec![false, true, true], v(&[0.0, -INF, 0.5]), v(&[0.0, 0.2, 1.5]))
            .unwrap();
        assert_matches_oracle(&e_step_mixed(&s, &comp).unwrap(), &s, &comp, 1e-9);
    }

    #[test]
    fn split_path_matches_naive_and_oracle() {
        let comp = comp3();
        let rows = [
            CensoredSample::new(v(&[0.7, 0.0, 0.0]), vec![false, true, true], v(&[0.0, -INF, 0.5]), v(&[0.0, INF, 1.5])).unwrap(),
            CensoredSample::new(v(&[0.0, 0.0, 0.0]), vec![true, true, true], v(&[-INF, -INF, -1.0]), v(&[INF, 0.3, INF])).unwrap(),
            CensoredSample::new(v(&[0.0, 1.1, 0.0]), vec![true, false, true], v(&[-INF, 0.0, -INF]), v(&[INF, 0.0, INF])).unwrap(),
        ];
        for s in &rows {
            let naive = e_step_mixed(s, &comp).unwrap();
            let split = split_missing_censored(s, &comp).unwrap();
            assert_relative_eq!(split.y, naive.y, epsilon = 1e-9);
            assert_relative_eq!(split.yy, naive.yy, epsilon = 1e-9);
            assert_relative_eq!(split.t, naive.t, epsilon = 1e-9);
            assert_relative_eq!(split.tt, naive.tt, epsilon = 1e-9);
            assert_relative_eq!(split.ty, naive.ty, epsilon = 1e-9);
            assert_relative_eq!(split.y0, naive.y0, epsilon = 1e-9);
            assert_relative_eq!(split.gamma_hat, naive.gamma_hat, epsilon = 1e-9);
            assert_matches_oracle(&split, s, &comp, 1e-8);
        }
    }

    #[test]
    fn fully_missing_row_gives_unconditional_moments() {
        let comp = comp3();
        let s = CensoredSample::new(v(&[f64::NAN; 3]), vec![true; 3], v(&[-INF; 3]), v(&[INF; 3])).unwrap();
        assert_eq!(sn_log_density(&s, &comp).unwrap(), 0.0);
        let st = e_step(&s, &comp).unwrap();
        assert_matches_oracle(&st, &s, &comp, 1e-9);
        assert_relative_eq!(st.y, comp.esn.mean(), epsilon = 1e-12);
    }

    #[test]
    fn gamma_hat_equals_ratio_moment() {
        let comp = comp3();
        let s = CensoredSample::new(v(&[0.7, 0.0, 0.0]), vec![false, true, true], v(&[0.0, -INF, 0.5]), v(&[0.0, 0.2, 1.5]))
            .unwrap();
        let st = e_step_mixed(&s, &comp).unwrap();
        let (_, cen, cond) = censored_given_observed(&s, &comp).unwrap();
        let t = tesn_moments(&sub_vector(&s.lower, &cen), &sub_vector(&s.upper, &cen), &cond).unwrap();
        assert_relative_eq!(st.gamma_hat, t.ratio0, epsilon = 1e-10);
        // E[W0] is the ratio-weighted mean divided by γ̂
        for (r, &k) in cen.iter().enumerate() {
            assert_relative_eq!(st.y0[k], t.ratio1[r] / t.ratio0, epsilon = 1e-9);
        }
    }

    #[test]
    fn log_density_of_censored_row_is_rectangle_probability() {
        let comp = comp3();
        let s = CensoredSample::new(v(&[0.0; 3]), vec![true; 3], v(&[-INF, -1.0, 0.0]), v(&[0.5, 1.0, INF])).unwrap();
        let direct = comp.esn.rect_prob(&s.lower, &s.upper).unwrap().ln();
        assert_relative_eq!(sn_log_density(&s, &comp).unwrap(), direct, epsilon = 1e-12);
        // a missing cell integrates out
        let m = CensoredSample::new(v(&[0.0, 0.4, 0.0]), vec![true, false, true], v(&[-INF, 0.0, -INF]), v(&[INF, 0.0, INF]))
            .unwrap();
        let marg = marginal_conditional_split(&comp.esn, &[1], &[0, 2]).unwrap().marginal;
        let direct = Esn::new(marg).unwrap().log_pdf(&v(&[0.4]));
        assert_relative_eq!(sn_log_density(&m, &comp).unwrap(), direct, epsilon = 1e-12);
    }

    #[test]
    fn log_density_with_censored_cell_before_observed_cell() {
        let params = EsnParams::skew_normal(
            v(&[0.0, 1.0]),
            Mat::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.5]),
            v(&[1.5, -1.0]),
        )
        .unwrap();
        let comp = SnComponent::new(params).unwrap();
        let s = CensoredSample::new(v(&[-0.5, 0.8]), vec![true, false], v(&[-INF, 0.8]), v(&[-0.5, 0.8])).unwrap();
        let quad = crate::quad::integrate(|x| comp.esn.pdf(&v(&[x, 0.8])), -14.0, -0.5, 1e-14);
        assert_relative_eq!(sn_log_density(&s, &comp).unwrap(), quad.ln(), epsilon = 1e-10);
    }

    #[test]
    fn recover_round_trip() {
        let comp = comp3();
        let back = recover_sn_params(comp.mu(), comp.delta(), &comp.esn.gamma).unwrap();
        assert_relative_eq!(back.sigma, comp.esn.params.sigma, epsilon = 1e-12);
        assert_relative_eq!(back.lambda, comp.esn.params.lambda, epsilon = 1e-10);
    }

    #[test]
    fn repeated_observation_collapses() {
        let y0 = v(&[1.0, -2.0]);
        let stats: Vec<_> = (0..5).map(|_| EStepStats { y: y0.clone(), yy: &y0 * y0.transpose(), ..EStepStats::zeros(2) }).collect();
        let u = weighted_m_step(&stats, &[1.0; 5], &v(&[0.3, 0.3]), true).unwrap();
        assert_relative_eq!(u.mu, y0, epsilon = 1e-14);
        let g = regularize_dispersion(&(u.scatter / u.weight));
        assert!(g.amax() < 1e-12);
    }
}
