//! First and second moments of truncated normal and truncated ESN laws on
//! rectangles.
//!
//! Normal moments come from integrating the density gradient by parts over the
//! rectangle, which reduces them to rectangle probabilities of dimension d, d-1
//! and d-2. ESN moments reuse the same routine on the (p+1)-dimensional
//! Gaussian whose conditional law given a latent half-line is the ESN.

use crate::error::{Error, Result};
use crate::esn::Esn;
use crate::linalg::{symmetrize, Mat, Vector};
use crate::mvn::mvn_rect_prob;
use crate::special::{norm_cdf, norm_pdf_var};
use std::cell::Cell;

/// Largest dimension handled by the recurrence; larger problems use Monte Carlo.
pub const MAX_RECURRENCE_DIM: usize = 8;
const MIN_PROB: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentPair {
    /// `E[W]`
    pub mean: Vector,
    /// `E[W Wᵀ]`
    pub second: Mat,
}

impl MomentPair {
    pub fn covariance(&self) -> Mat {
        symmetrize(&(&self.second - &self.mean * self.mean.transpose()))
    }
}

/// Work done by [`tn_moments`] and [`tn_mean`] on the current thread.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TruncatedWork {
    pub calls: u64,
    /// Sum over calls of the number of truncated coordinates.
    pub coordinates: u64,
}

thread_local! {
    static WORK: Cell<TruncatedWork> = const { Cell::new(TruncatedWork { calls: 0, coordinates: 0 }) };
}

pub fn truncated_work() -> TruncatedWork {
    WORK.with(|w| w.get())
}

pub fn reset_truncated_work() {
    WORK.with(|w| w.set(TruncatedWork::default()));
}

fn record(dim: usize) {
    WORK.with(|w| {
        let mut v = w.get();
        v.calls += 1;
        v.coordinates += dim as u64;
        w.set(v);
    });
}

fn check(lower: &Vector, upper: &Vector, mean: &Vector, cov: &Mat) -> Result<()> {
    let d = mean.len();
    if lower.len() != d || upper.len() != d || cov.shape() != (d, d) {
        return Err(Error::Dimension(format!("truncation problem of dimension {d}")));
    }
    for i in 0..d {
        if lower[i] > upper[i] {
            return Err(Error::InvalidRectangle(i));
        }
    }
    Ok(())
}

fn drop_index(v: &Vector, k: usize) -> Vector {
    v.clone().remove_row(k)
}

/// Parameters of the (d-1)-dimensional law of the other coordinates given `W_k = x`.
struct Face {
    slope: Vector,
    cov: Mat,
    lower: Vector,
    upper: Vector,
}

impl Face {
    fn new(k: usize, lower: &Vector, upper: &Vector, cov: &Mat) -> Self {
        let col = drop_index(&cov.column(k).into_owned(), k);
        let slope = &col / cov[(k, k)];
        let rest = cov.clone().remove_row(k).remove_column(k);
        Face {
            cov: symmetrize(&(rest - &slope * col.transpose())),
            slope,
            lower: drop_index(lower, k),
            upper: drop_index(upper, k),
        }
    }

    fn mean(&self, k: usize, mu: &Vector, x: f64) -> Vector {
        drop_index(mu, k) + &self.slope * (x - mu[k])
    }
}

fn prob(lower: &Vector, upper: &Vector, mean: &Vector, cov: &Mat) -> Result<f64> {
    if mean.is_empty() {
        Ok(1.0)
    } else {
        mvn_rect_prob(lower, upper, mean, cov)
    }
}

/// Returns `(Z, c)` with `∫_R (w - μ) φ(w) dw = Σ c` and `Z = ∫_R φ`.
fn first_order(lower: &Vector, upper: &Vector, mu: &Vector, cov: &Mat) -> Result<(f64, Vector)> {
    let d = mu.len();
    let z = prob(lower, upper, mu, cov)?;
    let mut c = Vector::zeros(d);
    for k in 0..d {
        if lower[k] == f64::NEG_INFINITY && upper[k] == f64::INFINITY {
            continue;
        }
        let face = Face::new(k, lower, upper, cov);
        let edge = |x: f64| -> Result<f64> {
            if !x.is_finite() {
                return Ok(0.0);
            }
            let dens = norm_pdf_var(x - mu[k], cov[(k, k)]);
            if dens == 0.0 {
                return Ok(0.0);
            }
            Ok(dens * prob(&face.lower, &face.upper, &face.mean(k, mu, x), &face.cov)?)
        };
        c[k] = edge(lower[k])? - edge(upper[k])?;
    }
    Ok((z, c))
}

/// Mean of N(mean, cov) truncated to `[lower, upper]`.
pub fn tn_mean(lower: &Vector, upper: &Vector, mean: &Vector, cov: &Mat) -> Result<Vector> {
    Ok(tn_mean_with_prob(lower, upper, mean, cov)?.0)
}

/// [`tn_mean`] together with the probability of the rectangle.
pub fn tn_mean_with_prob(lower: &Vector, upper: &Vector, mean: &Vector, cov: &Mat) -> Result<(Vector, f64)> {
    check(lower, upper, mean, cov)?;
    record(mean.len());
    if mean.len() > MAX_RECURRENCE_DIM {
        return Ok((mc_fallback(lower, upper, mean, cov)?.mean, mvn_rect_prob(lower, upper, mean, cov)?));
    }
    let (z, c) = first_order(lower, upper, mean, cov)?;
    if z < MIN_PROB {
        return Err(Error::ZeroProbability);
    }
    Ok((mean + cov * c / z, z))
}

/// First and second moments of N(mean, cov) truncated to `[lower, upper]`.
pub fn tn_moments(lower: &Vector, upper: &Vector, mean: &Vector, cov: &Mat) -> Result<MomentPair> {
    Ok(tn_moments_with_prob(lower, upper, mean, cov)?.0)
}

/// [`tn_moments`] together with the probability of the rectangle.
pub fn tn_moments_with_prob(lower: &Vector, upper: &Vector, mean: &Vector, cov: &Mat) -> Result<(MomentPair, f64)> {
    check(lower, upper, mean, cov)?;
    record(mean.len());
    let d = mean.len();
    if d > MAX_RECURRENCE_DIM {
        return Ok((mc_fallback(lower, upper, mean, cov)?, mvn_rect_prob(lower, upper, mean, cov)?));
    }
    let (z, c) = first_order(lower, upper, mean, cov)?;
    if z < MIN_PROB {
        return Err(Error::ZeroProbability);
    }
    let m = mean + cov * &c / z;
    let mut b = Mat::zeros(d, d);
    for k in 0..d {
        if lower[k] == f64::NEG_INFINITY && upper[k] == f64::INFINITY {
            continue;
        }
        let face = Face::new(k, lower, upper, cov);
        let column = |x: f64| -> Result<Vector> {
            let mut h = Vector::zeros(d);
            if !x.is_finite() {
                return Ok(h);
            }
            let dens = norm_pdf_var(x - mean[k], cov[(k, k)]);
            if dens == 0.0 {
                return Ok(h);
            }
            let fm = face.mean(k, mean, x);
            let (pz, pc) = if d == 1 {
                (1.0, Vector::zeros(0))
            } else {
                first_order(&face.lower, &face.upper, &fm, &face.cov)?
            };
            let spc = &face.cov * pc;
            h[k] = (x - mean[k]) * dens * pz;
            for (r, j) in (0..d).filter(|&j| j != k).enumerate() {
                h[j] = dens * ((fm[r] - mean[j]) * pz + spc[r]);
            }
            Ok(h)
        };
        let col = column(upper[k])? - column(lower[k])?;
        b.set_column(k, &col);
    }
    let centered = cov - &b * cov / z;
    let second = symmetrize(&(centered + mean * m.transpose() + &m * mean.transpose() - mean * mean.transpose()));
    Ok((MomentPair { mean: m, second }, z))
}

fn mc_fallback(lower: &Vector, upper: &Vector, mean: &Vector, cov: &Mat) -> Result<MomentPair> {
    let chol = crate::linalg::cholesky(cov)?;
    let l = chol.l();
    let est = oracle::mc_truncated_oracle(
        lower,
        upper,
        |rng| {
            let z = Vector::from_iterator(mean.len(), (0..mean.len()).map(|_| rand::Rng::sample(rng, rand_distr::StandardNormal)));
            mean + &l * z
        },
        200_000,
        0x7275_6e63,
    )?;
    Ok(est.moments)
}

/// Moments of a truncated ESN together with the normalizing probability and the
/// ratio-weighted moments `E[ζ(a(Y))]`, `E[Y ζ(a(Y))]`, where
/// `a(y) = τ + λᵀΣ^{-1/2}(y-μ)` and `ζ = φ/Φ`.
#[derive(Debug, Clone)]
pub struct TesnMoments {
    pub moments: MomentPair,
    /// `P(lower <= Y <= upper)` under the untruncated ESN.
    pub prob: f64,
    pub ratio0: f64,
    pub ratio1: Vector,
}

/// Truncated ESN moments through the augmented Gaussian `(X, X0)`, truncated to
/// `[lower, upper] × [-τ̃, ∞)`.
pub fn tesn_moments(lower: &Vector, upper: &Vector, esn: &Esn) -> Result<TesnMoments> {
    let p = esn.dim();
    let (amean, acov) = esn.augmented();
    let mut lo = Vector::zeros(p + 1);
    let mut hi = Vector::zeros(p + 1);
    if lower.len() != p || upper.len() != p {
        return Err(Error::Dimension(format!("rectangle of dimension {} for p = {p}", lower.len())));
    }
    lo.rows_mut(0, p).copy_from(lower);
    hi.rows_mut(0, p).copy_from(upper);
    lo[p] = -esn.tau_tilde;
    hi[p] = f64::INFINITY;
    let (mp, aug_prob) = tn_moments_with_prob(&lo, &hi, &amean, &acov)?;
    let ey = mp.mean.rows(0, p).into_owned();
    let eyy = mp.second.view((0, 0), (p, p)).into_owned();
    let et = mp.mean[p];
    let ety = mp.second.view((0, p), (p, 1)).into_owned();
    let mu = &esn.params.mu;
    let w = &esn.sigma_inv * &esn.delta;
    let s = (1.0 + esn.params.lambda.norm_squared()).sqrt();
    let ratio0 = (et - w.dot(&(&ey - mu))) * s;
    let ey_centered = &eyy - &ey * mu.transpose();
    let ratio1 = (ety - ey_centered * &w) * s;
    Ok(TesnMoments { moments: MomentPair { mean: ey, second: eyy }, prob: aug_prob / norm_cdf(esn.tau_tilde), ratio0, ratio1 })
}

#[derive(Debug, Clone)]
pub struct RatioMoments {
    /// `E[ζ(a(Y))]`
    pub zero: f64,
    /// `E[Y ζ(a(Y))]`
    pub first: Vector,
    /// `E[Y Yᵀ ζ(a(Y))]`
    pub second: Mat,
}

/// Ratio-weighted moments of a truncated ESN through the Gaussian identity
/// `φ_p(y; μ, Σ) φ(a(y)) = φ(τ; 0, 1+λᵀλ) φ_p(y; μ - τ̃Δ, Γ)`.
pub fn ratio_weighted_tn_moments(lower: &Vector, upper: &Vector, esn: &Esn) -> Result<RatioMoments> {
    let prm = &esn.params;
    let eta = norm_pdf_var(prm.tau, 1.0 + prm.lambda.norm_squared()) / norm_cdf(esn.tau_tilde);
    let shifted = &prm.mu - &esn.delta * esn.tau_tilde;
    let l = mvn_rect_prob(lower, upper, &shifted, &esn.gamma)?;
    let big_l = esn.rect_prob(lower, upper)?;
    if big_l < MIN_PROB {
        return Err(Error::ZeroProbability);
    }
    let zero = eta * l / big_l;
    let w = tn_moments(lower, upper, &shifted, &esn.gamma)?;
    Ok(RatioMoments { zero, first: w.mean * zero, second: w.second * zero })
}

pub mod oracle {
    //! Seeded Monte Carlo rejection estimates, used as an independent check.

    use super::MomentPair;
    use crate::error::{Error, Result};
    use crate::linalg::{Mat, Vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[derive(Debug, Clone)]
    pub struct McEstimate {
        pub moments: MomentPair,
        /// Standard errors of the entries of `moments.mean`.
        pub se_mean: Vector,
        /// Standard errors of the entries of `moments.second`.
        pub se_second: Mat,
        pub accepted: usize,
    }

    /// Draws `n_draws` samples, keeps those inside `[lower, upper]` and reports
    /// sample moments with their standard errors.
    pub fn mc_truncated_oracle<F>(lower: &Vector, upper: &Vector, mut sampler: F, n_draws: usize, seed: u64) -> Result<McEstimate>
    where
        F: FnMut(&mut ChaCha8Rng) -> Vector,
    {
        let d = lower.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum = Vector::zeros(d);
        let mut sum_sq = Vector::zeros(d);
        let mut outer = Mat::zeros(d, d);
        let mut outer_sq = Mat::zeros(d, d);
        let mut accepted = 0usize;
        for _ in 0..n_draws {
            let x = sampler(&mut rng);
            if (0..d).all(|i| x[i] >= lower[i] && x[i] <= upper[i]) {
                accepted += 1;
                let xx = &x * x.transpose();
                sum += &x;
                sum_sq += x.component_mul(&x);
                outer_sq += xx.component_mul(&xx);
                outer += xx;
            }
        }
        if accepted < 2 {
            return Err(Error::NoAcceptedDraws);
        }
        let n = accepted as f64;
        let mean = &sum / n;
        let second = &outer / n;
        let se_mean = (sum_sq / n - mean.component_mul(&mean)).map(|v| (v.max(0.0) / (n - 1.0)).sqrt());
        let se_second = (outer_sq / n - second.component_mul(&second)).map(|v| (v.max(0.0) / (n - 1.0)).sqrt());
        Ok(McEstimate { moments: MomentPair { mean, second }, se_mean, se_second, accepted })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esn::EsnParams;
    use crate::quad::integrate;
    use crate::special::norm_pdf;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    const INF: f64 = f64::INFINITY;

    #[test]
    fn half_normal_moments() {
        let m = tn_moments(&v(&[0.0]), &v(&[INF]), &v(&[0.0]), &Mat::identity(1, 1)).unwrap();
        assert_relative_eq!(m.mean[0], (2.0 / std::f64::consts::PI).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(m.second[(0, 0)], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn untruncated_is_gaussian() {
        let cov = Mat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let mu = v(&[1.0, -1.0]);
        let m = tn_moments(&v(&[-INF, -INF]), &v(&[INF, INF]), &mu, &cov).unwrap();
        assert_relative_eq!(m.mean, mu, epsilon = 1e-14);
        assert_relative_eq!(m.second, &cov + &mu * mu.transpose(), epsilon = 1e-14);
    }

    #[test]
    fn bivariate_against_quadrature() {
        let cov = Mat::from_row_slice(2, 2, &[1.5, -0.7, -0.7, 2.0]);
        let mu = v(&[0.3, -0.2]);
        let lo = [-0.5, -1.0];
        let hi = [1.0, 2.5];
        let dens = |x: f64, y: f64| crate::mvn::mvn_pdf(&v(&[x, y]), &mu, &cov).unwrap();
        let q = |f: &dyn Fn(f64, f64) -> f64| {
            integrate(|x| integrate(|y| f(x, y) * dens(x, y), lo[1], hi[1], 1e-14), lo[0], hi[0], 1e-13)
        };
        let z = q(&|_, _| 1.0);
        let m = tn_moments(&v(&lo), &v(&hi), &mu, &cov).unwrap();
        assert_relative_eq!(m.mean[0], q(&|x, _| x) / z, epsilon = 1e-10);
        assert_relative_eq!(m.mean[1], q(&|_, y| y) / z, epsilon = 1e-10);
        assert_relative_eq!(m.second[(0, 0)], q(&|x, _| x * x) / z, epsilon = 1e-10);
        assert_relative_eq!(m.second[(0, 1)], q(&|x, y| x * y) / z, epsilon = 1e-10);
        assert_relative_eq!(m.second[(1, 1)], q(&|_, y| y * y) / z, epsilon = 1e-10);
        let mean_only = tn_mean(&v(&lo), &v(&hi), &mu, &cov).unwrap();
        assert_relative_eq!(mean_only, m.mean, epsilon = 1e-15);
    }

    #[test]
    fn univariate_tesn_against_quadrature() {
        let e = Esn::new(EsnParams::new(v(&[0.5]), Mat::from_element(1, 1, 2.0), v(&[-3.0]), 0.8).unwrap()).unwrap();
        let (a, b) = (-1.0, 2.0);
        let dens = |x: f64| e.pdf(&v(&[x]));
        let z = integrate(dens, a, b, 1e-14);
        let t = tesn_moments(&v(&[a]), &v(&[b]), &e).unwrap();
        assert_relative_eq!(t.prob, z, max_relative = 1e-11);
        assert_relative_eq!(t.moments.mean[0], integrate(|x| x * dens(x), a, b, 1e-14) / z, epsilon = 1e-10);
        assert_relative_eq!(t.moments.second[(0, 0)], integrate(|x| x * x * dens(x), a, b, 1e-14) / z, epsilon = 1e-10);
        let zeta = |x: f64| crate::special::zeta(e.skew_arg(&v(&[x])));
        assert_relative_eq!(t.ratio0, integrate(|x| zeta(x) * dens(x), a, b, 1e-14) / z, epsilon = 1e-10);
        assert_relative_eq!(t.ratio1[0], integrate(|x| x * zeta(x) * dens(x), a, b, 1e-14) / z, epsilon = 1e-10);
    }

    #[test]
    fn zero_probability_is_an_error() {
        let r = tn_moments(&v(&[60.0]), &v(&[INF]), &v(&[0.0]), &Mat::identity(1, 1));
        assert!(matches!(r, Err(Error::ZeroProbability)));
    }

    #[test]
    fn counters_track_dimension() {
        reset_truncated_work();
        let cov = Mat::identity(3, 3);
        tn_moments(&v(&[0.0, -INF, 0.0]), &v(&[1.0, INF, INF]), &v(&[0.0; 3]), &cov).unwrap();
        tn_mean(&v(&[0.0]), &v(&[1.0]), &v(&[0.0]), &Mat::identity(1, 1)).unwrap();
        assert_eq!(truncated_work(), TruncatedWork { calls: 2, coordinates: 4 });
    }

    #[test]
    fn mills_ratio_case() {
        let m = tn_mean(&v(&[1.3]), &v(&[INF]), &v(&[0.0]), &Mat::identity(1, 1)).unwrap();
        assert_relative_eq!(m[0], norm_pdf(1.3) / norm_cdf(-1.3), epsilon = 1e-14);
    }

    fn problem(d: usize) -> impl Strategy<Value = (Vector, Vector, Vector, Mat)> {
        (
            proptest::collection::vec(-1.0..1.0f64, d * d),
            proptest::collection::vec(-1.0..1.0f64, d),
            proptest::collection::vec((-2.0..1.0f64, 0.2..3.0f64, 0u8..4), d),
        )
            .prop_map(move |(a, mu, bounds)| {
                let a = Mat::from_vec(d, d, a);
                let cov = &a * a.transpose() + Mat::identity(d, d) * 0.2;
                let lo = Vector::from_iterator(d, bounds.iter().map(|&(l, _, k)| if k == 0 { -INF } else { l }));
                let hi = Vector::from_iterator(d, bounds.iter().map(|&(l, w, k)| if k == 1 { INF } else { l + w }));
                (lo, hi, Vector::from_vec(mu), cov)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn mean_inside_and_covariance_psd((lo, hi, mu, cov) in (1usize..4).prop_flat_map(problem)) {
            let m = tn_moments(&lo, &hi, &mu, &cov).unwrap();
            for i in 0..mu.len() {
                prop_assert!(m.mean[i] >= lo[i] - 1e-9 && m.mean[i] <= hi[i] + 1e-9);
            }
            let eig = m.covariance().symmetric_eigenvalues();
            prop_assert!(eig.min() > -1e-9, "{:?}", eig);
        }

        #[test]
        fn ratio_routes_agree((lo, hi, mu, cov) in (1usize..3).prop_flat_map(problem),
                              lam in proptest::collection::vec(-3.0..3.0f64, 2), tau in -1.0..1.0f64) {
            let d = mu.len();
            let e = Esn::new(EsnParams::new(mu, cov, Vector::from_iterator(d, lam.into_iter().take(d)), tau).unwrap()).unwrap();
            let t = tesn_moments(&lo, &hi, &e).unwrap();
            let r = ratio_weighted_tn_moments(&lo, &hi, &e).unwrap();
            prop_assert!((t.ratio0 - r.zero).abs() < 1e-8 * (1.0 + r.zero.abs()), "{} vs {}", t.ratio0, r.zero);
            for i in 0..d {
                prop_assert!((t.ratio1[i] - r.first[i]).abs() < 1e-8 * (1.0 + r.first[i].abs()));
            }
            let direct = e.rect_prob_by_corners(&lo, &hi).unwrap();
            prop_assert!((t.prob - direct).abs() < 1e-10 * (1.0 + direct));
        }
    }
}
