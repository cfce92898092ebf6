//! Multivariate normal densities and rectangle probabilities.
//!
//! Dimensions 1-3 are computed deterministically to near machine precision
//! (bivariate and trivariate routines after Genz); higher dimensions use a
//! randomized lattice rule over the separation-of-variables transform with a
//! fixed seed, so repeated calls return identical values.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, Mat, Vector};
use crate::quad;
use crate::special::{norm_cdf, norm_interval, norm_pdf, norm_quantile, LN_SQRT_2PI};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

pub fn mvn_log_pdf(x: &Vector, mean: &Vector, cov: &Mat) -> Result<f64> {
    let chol = cholesky(cov)?;
    let z = chol.l().solve_lower_triangular(&(x - mean)).ok_or(Error::NotPositiveDefinite)?;
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
    Ok(-0.5 * z.norm_squared() - log_det - x.len() as f64 * LN_SQRT_2PI)
}

pub fn mvn_pdf(x: &Vector, mean: &Vector, cov: &Mat) -> Result<f64> {
    Ok(mvn_log_pdf(x, mean, cov)?.exp())
}

const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197_0),
];
const GL12: [(f64, f64); 6] = [
    (0.047_175_336_386_511_77, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475_0),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305_0),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];
const GL20: [(f64, f64); 10] = [
    (0.017_614_007_139_152_12, -0.993_128_599_185_094_9),
    (0.040_601_429_800_386_94, -0.963_971_927_277_913_8),
    (0.062_672_048_334_109_06, -0.912_234_428_251_325_9),
    (0.083_276_741_576_704_75, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515_0),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.076_526_521_133_497_33),
];

/// P(X > dh, Y > dk) for a standard bivariate normal with correlation r.
pub fn bvn_upper(dh: f64, dk: f64, r: f64) -> f64 {
    let quad: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        if r.abs() > 0.0 {
            let hs = 0.5 * (h * h + k * k);
            let asr = 0.5 * r.asin();
            for &(w, x) in quad {
                for is in [-1.0, 1.0] {
                    let sn = (asr * (is * x + 1.0)).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / TWO_PI;
        }
        return bvn + norm_cdf(-h) * norm_cdf(-k);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -0.5 * (b_s / a_s + hk);
        if asr > -100.0 {
            bvn = a
                * asr.exp()
                * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        }
        if -hk < 100.0 {
            let b = b_s.sqrt();
            bvn -= (-0.5 * hk).exp()
                * TWO_PI.sqrt()
                * norm_cdf(-b / a)
                * b
                * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        a *= 0.5;
        for &(w, x) in quad {
            for is in [-1.0, 1.0] {
                let xs = (a * (is * x + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -0.5 * (b_s / xs + hk);
                if asr > -100.0 {
                    bvn += a
                        * w
                        * asr.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / TWO_PI;
    }
    if r > 0.0 {
        bvn + norm_cdf(-h.max(k))
    } else {
        // k holds -dk here
        let mut v = -bvn;
        if k > h {
            v += norm_interval(h, k);
        }
        v.max(0.0)
    }
}

/// Lower-orthant bivariate normal CDF with infinite limits allowed.
pub fn bvn_cdf(x: f64, y: f64, r: f64) -> f64 {
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        0.0
    } else if x == f64::INFINITY {
        norm_cdf(y)
    } else if y == f64::INFINITY {
        norm_cdf(x)
    } else {
        let v = bvn_upper(-x, -y, r).clamp(0.0, 1.0);
        if r < 0.0 && v < 1e-5 * norm_cdf(x).min(norm_cdf(y)) {
            bvn_negative_tail(x, y, r)
        } else {
            v
        }
    }
}

/// `P(X ≤ x, Y ≤ y)` by quadrature over `X`. With `r < 0` the integrand is
/// increasing in `X` up to `x`, so small results keep their relative accuracy.
fn bvn_negative_tail(x: f64, y: f64, r: f64) -> f64 {
    let s = (1.0 - r * r).sqrt();
    let f = |t: f64| norm_pdf(t) * norm_cdf((y - r * t) / s);
    crate::quad::integrate_pieces(f, &[x - 12.0, x - 2.0, x - 0.5, x], 0.0, 1e-12)
}

fn pntgnd(ba: f64, bb: f64, bc: f64, ra: f64, rb: f64, r: f64, rr: f64) -> f64 {
    let dt = rr * (rr - (ra - rb).powi(2) - 2.0 * ra * rb * (1.0 - r));
    if dt <= 0.0 {
        return 0.0;
    }
    let bt = (bc * rr + ba * (r * rb - ra) + bb * (r * ra - rb)) / dt.sqrt();
    let ft = (ba - r * bb).powi(2) / rr + bb * bb;
    if bt > -10.0 && ft < 100.0 {
        let f = (-0.5 * ft).exp();
        if bt < 10.0 {
            f * norm_cdf(bt)
        } else {
            f
        }
    } else {
        0.0
    }
}

/// Lower-orthant trivariate normal CDF, correlations (r12, r13, r23), finite limits.
fn tvn_finite(h: [f64; 3], r: [f64; 3]) -> f64 {
    const EPS: f64 = 1e-15;
    let (mut h1, mut h2, mut h3) = (h[0], h[1], h[2]);
    let (mut r12, mut r13, mut r23) = (r[0], r[1], r[2]);
    // order so that |r23| >= |r13| >= |r12|
    if r12.abs() > r13.abs() {
        std::mem::swap(&mut h2, &mut h3);
        std::mem::swap(&mut r12, &mut r13);
    }
    if r13.abs() > r23.abs() {
        std::mem::swap(&mut h1, &mut h2);
        std::mem::swap(&mut r13, &mut r23);
    }
    if r12.abs() > r13.abs() {
        std::mem::swap(&mut h2, &mut h3);
        std::mem::swap(&mut r12, &mut r13);
    }
    let tvt = if r12.abs() + r13.abs() < EPS {
        norm_cdf(h1) * bvn_cdf(h2, h3, r23)
    } else if 1.0 - r23 < EPS {
        bvn_cdf(h1, h2.min(h3), r12)
    } else if r23 + 1.0 < EPS {
        if h2 > -h3 {
            bvn_cdf(h1, h2, r12) - bvn_cdf(h1, -h3, r12)
        } else {
            0.0
        }
    } else {
        let rua = r12.asin();
        let rub = r13.asin();
        let integrand = |x: f64| {
            let s12 = (rua * x).sin();
            let s13 = (rub * x).sin();
            let mut f = 0.0;
            if rua != 0.0 {
                f += rua * pntgnd(h1, h2, h3, s13, r23, s12, 1.0 - s12 * s12);
            }
            if rub != 0.0 {
                f += rub * pntgnd(h1, h3, h2, s12, r23, s13, 1.0 - s13 * s13);
            }
            f
        };
        norm_cdf(h1) * bvn_cdf(h2, h3, r23) + quad::integrate(integrand, 0.0, 1.0, 1e-15) / TWO_PI
    };
    tvt.clamp(0.0, 1.0)
}

/// Lower-orthant trivariate normal CDF with infinite limits allowed.
/// `r` holds (r12, r13, r23).
pub fn tvn_cdf(h: [f64; 3], r: [f64; 3]) -> f64 {
    if h.iter().any(|&x| x == f64::NEG_INFINITY) {
        return 0.0;
    }
    let free: Vec<usize> = (0..3).filter(|&i| h[i] == f64::INFINITY).collect();
    let corr = |i: usize, j: usize| match (i.min(j), i.max(j)) {
        (0, 1) => r[0],
        (0, 2) => r[1],
        _ => r[2],
    };
    match free.len() {
        0 => tvn_finite(h, r),
        1 => {
            let kept: Vec<usize> = (0..3).filter(|&i| i != free[0]).collect();
            bvn_cdf(h[kept[0]], h[kept[1]], corr(kept[0], kept[1]))
        }
        2 => {
            let k = (0..3).find(|i| !free.contains(i)).unwrap();
            norm_cdf(h[k])
        }
        _ => 1.0,
    }
}

/// Standardized rectangle problem: limits scaled to unit variances.
struct Standardized {
    lower: Vec<f64>,
    upper: Vec<f64>,
    corr: Mat,
}

fn standardize(lower: &Vector, upper: &Vector, mean: &Vector, cov: &Mat) -> Result<Option<Standardized>> {
    let d = mean.len();
    if lower.len() != d || upper.len() != d || cov.nrows() != d || cov.ncols() != d {
        return Err(Error::Dimension(format!("rectangle of dimension {} vs {}", lower.len(), d)));
    }
    let mut keep = Vec::new();
    for i in 0..d {
        if lower[i].is_nan() || upper[i].is_nan() {
            return Err(Error::InvalidParameter("NaN rectangle bound".into()));
        }
        if lower[i] > upper[i] {
            return Err(Error::InvalidRectangle(i));
        }
        if lower[i] == upper[i] {
            return Ok(None);
        }
        if lower[i] > f64::NEG_INFINITY || upper[i] < f64::INFINITY {
            keep.push(i);
        }
    }
    let sd: Vec<f64> = keep.iter().map(|&i| cov[(i, i)].sqrt()).collect();
    if sd.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let mut lo: Vec<f64> = keep.iter().zip(&sd).map(|(&i, s)| (lower[i] - mean[i]) / s).collect();
    let mut hi: Vec<f64> = keep.iter().zip(&sd).map(|(&i, s)| (upper[i] - mean[i]) / s).collect();
    let m = keep.len();
    let mut corr = Mat::from_fn(m, m, |a, b| cov[(keep[a], keep[b])] / (sd[a] * sd[b]));
    // reflect coordinates lying in the upper half so tails are taken as lower tails
    for i in 0..m {
        if lo[i] > 0.0 || (lo[i] > f64::NEG_INFINITY && hi[i] == f64::INFINITY && lo[i] > -hi[i]) {
            let (a, b) = (lo[i], hi[i]);
            lo[i] = -b;
            hi[i] = -a;
            for j in 0..m {
                if j != i {
                    corr[(i, j)] = -corr[(i, j)];
                    corr[(j, i)] = -corr[(j, i)];
                }
            }
        }
    }
    for i in 0..m {
        corr[(i, i)] = 1.0;
    }
    Ok(Some(Standardized { lower: lo, upper: hi, corr }))
}

fn corner_sum(s: &Standardized, cdf: impl Fn(&[f64]) -> f64) -> f64 {
    let d = s.lower.len();
    let mut total = 0.0;
    let mut corner = vec![0.0; d];
    'outer: for mask in 0..(1usize << d) {
        let mut sign = 1.0;
        for i in 0..d {
            if mask >> i & 1 == 1 {
                if s.lower[i] == f64::NEG_INFINITY {
                    continue 'outer;
                }
                corner[i] = s.lower[i];
                sign = -sign;
            } else {
                corner[i] = s.upper[i];
            }
        }
        total += sign * cdf(&corner);
    }
    total.max(0.0)
}

/// P(lower <= X <= upper) for X ~ N(mean, cov). Infinite bounds are allowed.
pub fn mvn_rect_prob(lower: &Vector, upper: &Vector, mean: &Vector, cov: &Mat) -> Result<f64> {
    let Some(s) = standardize(lower, upper, mean, cov)? else {
        return Ok(0.0);
    };
    let p = match s.lower.len() {
        0 => 1.0,
        1 => norm_interval(s.lower[0], s.upper[0]),
        2 => {
            let r = s.corr[(0, 1)];
            corner_sum(&s, |c| bvn_cdf(c[0], c[1], r))
        }
        3 => {
            let r = [s.corr[(0, 1)], s.corr[(0, 2)], s.corr[(1, 2)]];
            corner_sum(&s, |c| tvn_cdf([c[0], c[1], c[2]], r))
        }
        4 => quadrature_4d(&s)?,
        _ => qmc_sov(&s)?,
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Integrates the exact trivariate rectangle probability of the conditional law
/// over one standardized coordinate.
fn quadrature_4d(s: &Standardized) -> Result<f64> {
    let width = |i: usize| s.upper[i].min(38.0) - s.lower[i].max(-38.0);
    let k = (0..4).min_by(|&i, &j| width(i).total_cmp(&width(j))).unwrap();
    let rest: Vec<usize> = (0..4).filter(|&i| i != k).collect();
    let r: Vec<f64> = rest.iter().map(|&i| s.corr[(i, k)]).collect();
    let cond_cov = Mat::from_fn(3, 3, |i, j| s.corr[(rest[i], rest[j])] - r[i] * r[j]);
    let lo = Vector::from_iterator(3, rest.iter().map(|&i| s.lower[i]));
    let hi = Vector::from_iterator(3, rest.iter().map(|&i| s.upper[i]));
    let a = s.lower[k].max(-38.5);
    let b = s.upper[k].min(38.5);
    if a >= b {
        return Ok(0.0);
    }
    let failure = std::cell::RefCell::new(None);
    let mut points = vec![a];
    points.extend([-8.0, -4.0, -2.0, 0.0, 2.0, 4.0, 8.0].iter().filter(|&&x| x > a && x < b));
    points.push(b);
    let value = quad::integrate_pieces(
        |x| {
            let mean = Vector::from_iterator(3, r.iter().map(|ri| ri * x));
            match mvn_rect_prob(&lo, &hi, &mean, &cond_cov) {
                Ok(v) => crate::special::norm_pdf(x) * v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        },
        &points,
        1e-300,
        1e-11,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

const PRIMES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Separation-of-variables transform with variable prioritization, integrated by a
/// randomly shifted Richtmyer lattice.
fn qmc_sov(s: &Standardized) -> Result<f64> {
    let d = s.lower.len();
    let mut a = s.lower.clone();
    let mut b = s.upper.clone();
    let mut c = s.corr.clone();
    let mut l = Mat::zeros(d, d);
    let mut y = vec![0.0; d];
    for i in 0..d {
        let mut best = i;
        let mut best_p = f64::INFINITY;
        for j in i..d {
            let mut sum = 0.0;
            let mut ss = c[(j, j)];
            for k in 0..i {
                sum += l[(j, k)] * y[k];
                ss -= l[(j, k)] * l[(j, k)];
            }
            let sd = ss.max(1e-300).sqrt();
            let p = norm_interval((a[j] - sum) / sd, (b[j] - sum) / sd);
            if p < best_p {
                best_p = p;
                best = j;
            }
        }
        if best != i {
            a.swap(i, best);
            b.swap(i, best);
            c.swap_rows(i, best);
            c.swap_columns(i, best);
            l.swap_rows(i, best);
        }
        let mut ss = c[(i, i)];
        for k in 0..i {
            ss -= l[(i, k)] * l[(i, k)];
        }
        if ss <= 1e-14 {
            return Err(Error::NotPositiveDefinite);
        }
        l[(i, i)] = ss.sqrt();
        for m in i + 1..d {
            let mut v = c[(m, i)];
            for k in 0..i {
                v -= l[(i, k)] * l[(m, k)];
            }
            l[(m, i)] = v / l[(i, i)];
        }
        let sum: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
        let (lo, hi) = ((a[i] - sum) / l[(i, i)], (b[i] - sum) / l[(i, i)]);
        let z = norm_interval(lo, hi);
        let phi = |x: f64| if x.is_finite() { crate::special::norm_pdf(x) } else { 0.0 };
        y[i] = if z > 1e-300 {
            (phi(lo) - phi(hi)) / z
        } else if lo > 0.0 {
            lo
        } else {
            hi
        };
    }
    let mut ys = vec![0.0; d];
    let mut integrand = |w: &[f64]| -> f64 {
        let mut e0 = norm_cdf(b[0] / l[(0, 0)]);
        let mut d0 = norm_cdf(a[0] / l[(0, 0)]);
        let mut f = e0 - d0;
        for i in 1..d {
            if f <= 0.0 {
                return 0.0;
            }
            let u = (d0 + w[i - 1] * (e0 - d0)).clamp(1e-300, 1.0 - 1e-16);
            ys[i - 1] = norm_quantile(u);
            let sum: f64 = (0..i).map(|k| l[(i, k)] * ys[k]).sum();
            d0 = norm_cdf((a[i] - sum) / l[(i, i)]);
            e0 = norm_cdf((b[i] - sum) / l[(i, i)]);
            f *= e0 - d0;
        }
        f
    };
    let dim = d - 1;
    let gen: Vec<f64> = PRIMES.iter().take(dim).map(|&p| (p as f64).sqrt().fract()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_1a77);
    const SHIFTS: usize = 12;
    let mut n = 256usize;
    let mut estimate = 0.0;
    let mut w = vec![0.0; dim];
    for _ in 0..8 {
        let mut vals = [0.0; SHIFTS];
        for v in vals.iter_mut() {
            let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            let mut acc = 0.0;
            for j in 1..=n {
                for k in 0..dim {
                    let x = (j as f64 * gen[k] + shift[k]).fract();
                    w[k] = (2.0 * x - 1.0).abs();
                }
                acc += integrand(&w);
            }
            *v = acc / n as f64;
        }
        estimate = vals.iter().sum::<f64>() / SHIFTS as f64;
        let var = vals.iter().map(|v| (v - estimate).powi(2)).sum::<f64>() / ((SHIFTS - 1) * SHIFTS) as f64;
        if 3.0 * var.sqrt() < (5e-7f64).max(1e-5 * estimate) {
            break;
        }
        n *= 2;
    }
    Ok(estimate)
}

/// Orthant probability P(X1 < 0, X2 < 0, X3 < 0) in closed form, for tests and callers.
pub fn tvn_orthant(r12: f64, r13: f64, r23: f64) -> f64 {
    0.125 + (r12.asin() + r13.asin() + r23.asin()) / (4.0 * PI)
}
