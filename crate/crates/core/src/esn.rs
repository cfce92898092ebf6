//! Extended skew-normal distributions: density, CDF, rectangle probabilities,
//! marginal/conditional splitting and sampling.
//!
//! `ESN(μ, Σ, λ, τ)` has density `φ_p(y; μ, Σ) Φ(τ + λᵀΣ^{-1/2}(y-μ)) / Φ(τ̃)` with
//! `τ̃ = τ / √(1+λᵀλ)`. With `τ = 0` it is the skew-normal `SN(μ, Σ, λ)`.

use crate::error::{Error, Result};
use crate::linalg::{
    check_symmetric, log_det_spd, spd_inverse, sub_matrix, sub_vector, symmetric_inv_sqrt, symmetric_sqrt, symmetrize,
    Mat, Vector,
};
use crate::mvn::mvn_rect_prob;
use crate::special::{log_norm_cdf, norm_cdf, zeta, LN_SQRT_2PI};
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, PartialEq)]
pub struct EsnParams {
    pub mu: Vector,
    pub sigma: Mat,
    pub lambda: Vector,
    pub tau: f64,
}

impl EsnParams {
    pub fn new(mu: Vector, sigma: Mat, lambda: Vector, tau: f64) -> Result<Self> {
        let p = mu.len();
        if sigma.nrows() != p || sigma.ncols() != p || lambda.len() != p {
            return Err(Error::Dimension(format!(
                "mu has length {p}, sigma is {}x{}, lambda has length {}",
                sigma.nrows(),
                sigma.ncols(),
                lambda.len()
            )));
        }
        if !tau.is_finite() || mu.iter().chain(lambda.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite location, shape or extension".into()));
        }
        check_symmetric(&sigma)?;
        Ok(Self { mu, sigma, lambda, tau })
    }

    pub fn skew_normal(mu: Vector, sigma: Mat, lambda: Vector) -> Result<Self> {
        Self::new(mu, sigma, lambda, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// Below this `τ̃` rectangle probabilities are integrated over the latent
/// truncated coordinate instead of dividing two tiny probabilities.
const TAIL_TAU: f64 = -10.0;

/// An ESN law with the quantities every routine needs precomputed.
#[derive(Debug, Clone)]
pub struct Esn {
    pub params: EsnParams,
    pub sigma_sqrt: Mat,
    pub sigma_inv: Mat,
    /// `Σ^{-1/2} λ`
    pub varphi: Vector,
    /// `Σ^{1/2} λ / √(1+λᵀλ)`
    pub delta: Vector,
    /// `Σ - ΔΔᵀ`
    pub gamma: Mat,
    pub tau_tilde: f64,
    pub log_det_sigma: f64,
}

impl Esn {
    pub fn new(params: EsnParams) -> Result<Self> {
        let sigma_sqrt = symmetric_sqrt(&params.sigma)?;
        let sigma_inv_sqrt = symmetric_inv_sqrt(&params.sigma)?;
        let sigma_inv = spd_inverse(&params.sigma)?;
        let norm = (1.0 + params.lambda.norm_squared()).sqrt();
        let varphi = &sigma_inv_sqrt * &params.lambda;
        let delta = &sigma_sqrt * &params.lambda / norm;
        let gamma = symmetrize(&(&params.sigma - &delta * delta.transpose()));
        let tau_tilde = params.tau / norm;
        let log_det_sigma = log_det_spd(&params.sigma)?;
        Ok(Self { params, sigma_sqrt, sigma_inv, varphi, delta, gamma, tau_tilde, log_det_sigma })
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    /// Argument of the skewing factor, `τ + λᵀΣ^{-1/2}(y-μ)`.
    pub fn skew_arg(&self, y: &Vector) -> f64 {
        self.params.tau + self.varphi.dot(&(y - &self.params.mu))
    }

    pub fn log_pdf(&self, y: &Vector) -> f64 {
        let z = y - &self.params.mu;
        let quad = z.dot(&(&self.sigma_inv * &z));
        -0.5 * quad - 0.5 * self.log_det_sigma - self.dim() as f64 * LN_SQRT_2PI + log_norm_cdf(self.skew_arg(y))
            - log_norm_cdf(self.tau_tilde)
    }

    pub fn pdf(&self, y: &Vector) -> f64 {
        self.log_pdf(y).exp()
    }

    /// Mean and covariance of the augmented Gaussian `(X, X0)` with
    /// `X | X0 > -τ̃ ~ ESN`.
    pub fn augmented(&self) -> (Vector, Mat) {
        let p = self.dim();
        let mut mean = Vector::zeros(p + 1);
        mean.rows_mut(0, p).copy_from(&self.params.mu);
        let mut cov = Mat::identity(p + 1, p + 1);
        cov.view_mut((0, 0), (p, p)).copy_from(&self.params.sigma);
        cov.view_mut((0, p), (p, 1)).copy_from(&self.delta);
        cov.view_mut((p, 0), (1, p)).copy_from(&self.delta.transpose());
        (mean, cov)
    }

    pub fn cdf(&self, y: &Vector) -> Result<f64> {
        let p = self.dim();
        let z = y - &self.params.mu;
        let mut upper = Vector::zeros(p + 1);
        upper.rows_mut(0, p).copy_from(&z);
        upper[p] = self.tau_tilde;
        let mut omega = Mat::identity(p + 1, p + 1);
        omega.view_mut((0, 0), (p, p)).copy_from(&self.params.sigma);
        omega.view_mut((0, p), (p, 1)).copy_from(&(-&self.delta));
        omega.view_mut((p, 0), (1, p)).copy_from(&(-self.delta.transpose()));
        let lower = Vector::from_element(p + 1, f64::NEG_INFINITY);
        Ok(mvn_rect_prob(&lower, &upper, &Vector::zeros(p + 1), &omega)? / norm_cdf(self.tau_tilde))
    }

    /// `P(lower <= Y <= upper)` through the augmented (p+1)-dimensional Gaussian.
    pub fn rect_prob(&self, lower: &Vector, upper: &Vector) -> Result<f64> {
        let p = self.dim();
        check_bounds(lower, upper, p)?;
        let (mean, cov) = self.augmented();
        let mut lo = Vector::zeros(p + 1);
        let mut hi = Vector::zeros(p + 1);
        lo.rows_mut(0, p).copy_from(lower);
        hi.rows_mut(0, p).copy_from(upper);
        if self.tau_tilde < TAIL_TAU {
            return self.rect_prob_deep_tail(lower, upper);
        }
        lo[p] = -self.tau_tilde;
        hi[p] = f64::INFINITY;
        Ok(mvn_rect_prob(&lo, &hi, &mean, &cov)? / norm_cdf(self.tau_tilde))
    }

    /// `P(Y ∈ [a, b])` as `∫_{t}^{∞} φ(x)/Φ(τ̃) · P(N(μ + Δx, Γ) ∈ [a, b]) dx` with
    /// `t = −τ̃`, weights formed in log scale. Used when `Φ(τ̃)` is too small
    /// for the ratio of joint and marginal probabilities.
    fn rect_prob_deep_tail(&self, lower: &Vector, upper: &Vector) -> Result<f64> {
        let t = -self.tau_tilde;
        let log_q = log_norm_cdf(self.tau_tilde);
        let failure = std::cell::RefCell::new(None);
        let f = |s: f64| {
            let x = t + s;
            let w = (-0.5 * x * x - LN_SQRT_2PI - log_q).exp();
            if w == 0.0 {
                return 0.0;
            }
            let mean = &self.params.mu + &self.delta * x;
            match mvn_rect_prob(lower, upper, &mean, &self.gamma) {
                Ok(v) => w * v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        };
        let a = 1.0 / t.max(1.0);
        let v = crate::quad::integrate_pieces(f, &[0.0, a, 3.0 * a, 10.0 * a, 40.0 * a], 0.0, 1e-11);
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(v.clamp(0.0, 1.0)),
        }
    }

    /// Same probability by inclusion-exclusion over CDF corners.
    pub fn rect_prob_by_corners(&self, lower: &Vector, upper: &Vector) -> Result<f64> {
        let p = self.dim();
        check_bounds(lower, upper, p)?;
        let mut total = 0.0;
        'outer: for mask in 0..(1usize << p) {
            let mut corner = upper.clone();
            let mut sign = 1.0;
            for i in 0..p {
                if mask >> i & 1 == 1 {
                    if lower[i] == f64::NEG_INFINITY {
                        continue 'outer;
                    }
                    corner[i] = lower[i];
                    sign = -sign;
                }
            }
            total += sign * self.cdf(&corner)?;
        }
        Ok(total.max(0.0))
    }

    pub fn mean(&self) -> Vector {
        &self.params.mu + &self.delta * zeta(self.tau_tilde)
    }

    /// `E[Y Yᵀ]`.
    pub fn second_moment(&self) -> Mat {
        let mu = &self.params.mu;
        let z = zeta(self.tau_tilde);
        let cross = mu * self.delta.transpose();
        &self.params.sigma + mu * mu.transpose() + (&cross + cross.transpose()) * z
            - &self.delta * self.delta.transpose() * (self.tau_tilde * z)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, gamma_sqrt: &Mat) -> Vector {
        let t = sample_truncated_std_normal(rng, -self.tau_tilde);
        let z = Vector::from_iterator(self.dim(), (0..self.dim()).map(|_| rng.sample::<f64, _>(StandardNormal)));
        &self.params.mu + &self.delta * t + gamma_sqrt * z
    }
}

fn check_bounds(lower: &Vector, upper: &Vector, p: usize) -> Result<()> {
    if lower.len() != p || upper.len() != p {
        return Err(Error::Dimension(format!("rectangle of dimension {} for p = {p}", lower.len())));
    }
    for i in 0..p {
        if lower[i] > upper[i] {
            return Err(Error::InvalidRectangle(i));
        }
    }
    Ok(())
}

/// Draws from N(0,1) truncated to (a, ∞).
pub fn sample_truncated_std_normal<R: Rng + ?Sized>(rng: &mut R, a: f64) -> f64 {
    if a <= 0.0 {
        loop {
            let x: f64 = rng.sample(StandardNormal);
            if x > a {
                return x;
            }
        }
    }
    // exponential proposal (Robert 1995)
    let alpha = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let u: f64 = rng.gen();
        let x = a - u.ln() / alpha;
        let v: f64 = rng.gen();
        if v <= (-0.5 * (x - alpha).powi(2)).exp() {
            return x;
        }
    }
}

/// The law of `Y2 | Y1 = y1` as a function of `y1`.
#[derive(Debug, Clone)]
pub struct ConditionalEsn {
    pub mu1: Vector,
    pub mu2: Vector,
    /// `Σ21 Σ11⁻¹`
    pub regression: Mat,
    /// `Σ22.1`
    pub sigma: Mat,
    pub lambda: Vector,
    pub tau: f64,
    /// `φ1 + Σ11⁻¹ Σ12 φ2`
    pub phi_tilde: Vector,
}

impl ConditionalEsn {
    pub fn location(&self, y1: &Vector) -> Vector {
        &self.mu2 + &self.regression * (y1 - &self.mu1)
    }

    pub fn extension(&self, y1: &Vector) -> f64 {
        self.tau + self.phi_tilde.dot(&(y1 - &self.mu1))
    }

    pub fn at(&self, y1: &Vector) -> EsnParams {
        EsnParams {
            mu: self.location(y1),
            sigma: self.sigma.clone(),
            lambda: self.lambda.clone(),
            tau: self.extension(y1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EsnSplit {
    pub marginal: EsnParams,
    pub conditional: ConditionalEsn,
}

/// Splits `Y = (Y1, Y2)` into the marginal law of `Y1` (indices `idx1`) and the
/// conditional law of `Y2` (indices `idx2`) given `Y1`.
pub fn marginal_conditional_split(esn: &Esn, idx1: &[usize], idx2: &[usize]) -> Result<EsnSplit> {
    let p = esn.dim();
    let mut seen = vec![false; p];
    for &i in idx1.iter().chain(idx2) {
        if i >= p || seen[i] {
            return Err(Error::Dimension(format!("index partition of {p} coordinates is invalid")));
        }
        seen[i] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Dimension(format!("index partition of {p} coordinates is incomplete")));
    }
    let prm = &esn.params;
    let mu1 = sub_vector(&prm.mu, idx1);
    let mu2 = sub_vector(&prm.mu, idx2);
    let s11 = sub_matrix(&prm.sigma, idx1, idx1);
    let s12 = sub_matrix(&prm.sigma, idx1, idx2);
    let s22 = sub_matrix(&prm.sigma, idx2, idx2);
    let phi1 = sub_vector(&esn.varphi, idx1);
    let phi2 = sub_vector(&esn.varphi, idx2);
    let (regression, s22_1, phi_tilde) = if idx1.is_empty() {
        (Mat::zeros(idx2.len(), 0), s22.clone(), Vector::zeros(0))
    } else {
        let s11_inv = spd_inverse(&s11)?;
        let reg = s12.transpose() * &s11_inv;
        (reg.clone(), symmetrize(&(&s22 - &reg * &s12)), &phi1 + &s11_inv * &s12 * &phi2)
    };
    let c12 = if idx2.is_empty() { 1.0 } else { 1.0 / (1.0 + phi2.dot(&(&s22_1 * &phi2))).sqrt() };
    let marginal_lambda = if idx1.is_empty() { Vector::zeros(0) } else { symmetric_sqrt(&s11)? * &phi_tilde * c12 };
    let cond_lambda = if idx2.is_empty() { Vector::zeros(0) } else { symmetric_sqrt(&s22_1)? * &phi2 };
    Ok(EsnSplit {
        marginal: EsnParams { mu: mu1.clone(), sigma: s11, lambda: marginal_lambda, tau: c12 * prm.tau },
        conditional: ConditionalEsn {
            mu1,
            mu2,
            regression,
            sigma: s22_1,
            lambda: cond_lambda,
            tau: prm.tau,
            phi_tilde,
        },
    })
}
