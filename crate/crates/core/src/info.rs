//! Per-observation scores and standard errors from the empirical information
//! matrix `Σ sᵢ sᵢᵀ`.
//!
//! Unshared models are parameterised per component by `(μ_j, α_j, λ_j)` where
//! `α_j` holds the upper triangle (row-major) of `F_j = Σ_j^{1/2}`, followed by
//! `π_1..π_{G-1}`. Shared-Γ models use `(μ_j, Δ_j)` per component, then the
//! upper triangle of the common `Γ`, then the weights. The normal family drops
//! the shape blocks.

use crate::censored::{recover_sn_params, CensoredSample, EStepStats};
use crate::error::{Error, Result};
use crate::esn::{Esn, EsnParams};
use crate::linalg::{condition_number_sym, pseudo_inverse_sym, spd_inverse, symmetric_sqrt, Mat, Vector};
use crate::mixture::{responsibilities, Components, Family, MixtureModel};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct StdErrors {
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    pub se: Vec<f64>,
    /// Condition number of the information matrix.
    pub condition: f64,
    /// True when the pseudo-inverse fallback was used.
    pub pseudo_inverse: bool,
}

impl StdErrors {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.se[i])
    }
}

fn upper_pairs(p: usize) -> Vec<(usize, usize)> {
    (0..p).flat_map(|a| (a..p).map(move |b| (a, b))).collect()
}

fn unit_sym(p: usize, a: usize, b: usize) -> Mat {
    let mut e = Mat::zeros(p, p);
    e[(a, b)] = 1.0;
    e[(b, a)] = 1.0;
    e
}

/// Parameter labels (1-based indices) in packing order.
pub fn param_names(model: &MixtureModel) -> Vec<String> {
    let p = model.dim();
    let g = model.g();
    let skew = model.family == Family::SkewNormal;
    let mut names = Vec::new();
    for j in 1..=g {
        names.extend((1..=p).map(|k| format!("mu{j}[{k}]")));
        if model.shared_gamma {
            if skew {
                names.extend((1..=p).map(|k| format!("delta{j}[{k}]")));
            }
        } else {
            names.extend(upper_pairs(p).iter().map(|(a, b)| format!("alpha{j}[{},{}]", a + 1, b + 1)));
            if skew {
                names.extend((1..=p).map(|k| format!("lambda{j}[{k}]")));
            }
        }
    }
    if model.shared_gamma {
        names.extend(upper_pairs(p).iter().map(|(a, b)| format!("gamma[{},{}]", a + 1, b + 1)));
    }
    names.extend((1..g).map(|j| format!("pi{j}")));
    names
}

pub fn pack_params(model: &MixtureModel) -> Result<Vec<f64>> {
    let p = model.dim();
    let skew = model.family == Family::SkewNormal;
    let mut theta = Vec::new();
    let mut gamma = None;
    for c in &model.components {
        theta.extend(c.mu.iter());
        if model.shared_gamma {
            let e = Esn::new(c.clone())?;
            if skew {
                theta.extend(e.delta.iter());
            }
            gamma.get_or_insert(e.gamma);
        } else {
            let f = symmetric_sqrt(&c.sigma)?;
            theta.extend(upper_pairs(p).iter().map(|&(a, b)| f[(a, b)]));
            if skew {
                theta.extend(c.lambda.iter());
            }
        }
    }
    if let Some(gm) = gamma {
        theta.extend(upper_pairs(p).iter().map(|&(a, b)| gm[(a, b)]));
    }
    theta.extend(&model.weights[..model.g() - 1]);
    Ok(theta)
}

/// Inverse of [`pack_params`]; `template` supplies G, p, family and sharing.
pub fn unpack_params(theta: &[f64], template: &MixtureModel) -> Result<MixtureModel> {
    let p = template.dim();
    let g = template.g();
    let skew = template.family == Family::SkewNormal;
    if theta.len() != template.n_free_params() {
        return Err(Error::Dimension(format!("expected {} parameters, got {}", template.n_free_params(), theta.len())));
    }
    let pairs = upper_pairs(p);
    let sym_from = |vals: &[f64]| {
        let mut m = Mat::zeros(p, p);
        for (&(a, b), &v) in pairs.iter().zip(vals) {
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
        m
    };
    let mut pos = 0;
    let mut take = |k: usize| {
        let s = &theta[pos..pos + k];
        pos += k;
        s
    };
    let mut raw = Vec::with_capacity(g);
    for _ in 0..g {
        let mu = Vector::from_row_slice(take(p));
        if template.shared_gamma {
            let delta = if skew { Vector::from_row_slice(take(p)) } else { Vector::zeros(p) };
            raw.push((mu, None, delta));
        } else {
            let f = sym_from(take(pairs.len()));
            let lambda = if skew { Vector::from_row_slice(take(p)) } else { Vector::zeros(p) };
            raw.push((mu, Some(f), lambda));
        }
    }
    let gamma = template.shared_gamma.then(|| sym_from(take(pairs.len())));
    let mut weights: Vec<f64> = take(g - 1).to_vec();
    weights.push(1.0 - weights.iter().sum::<f64>());
    let components = raw
        .into_iter()
        .map(|(mu, f, v)| match (f, &gamma) {
            (Some(f), _) => EsnParams::skew_normal(mu, &f * &f, v),
            (None, Some(gm)) => recover_sn_params(&mu, &v, gm),
            _ => unreachable!(),
        })
        .collect::<Result<Vec<_>>>()?;
    MixtureModel::new(weights, components, template.family, template.shared_gamma)
}

/// Blocks of the expected complete-data score for one component, given the
/// weighted stats `𝓔1..𝓔5` (already multiplied by `z`).
struct Weighted {
    z: f64,
    e1: Vector,
    e2: Mat,
    e3: Vector,
    e4: f64,
    e5: f64,
}

impl Weighted {
    fn new(z: f64, s: &EStepStats) -> Self {
        Self { z, e1: &s.y * z, e2: &s.yy * z, e3: &s.ty * z, e4: s.tt * z, e5: s.t * z }
    }

    fn q(&self, mu: &Vector, delta: &Vector) -> Mat {
        let mut q = self.e2.clone();
        q -= &self.e1 * mu.transpose() + mu * self.e1.transpose();
        q -= &self.e3 * delta.transpose() + delta * self.e3.transpose();
        q += mu * mu.transpose() * self.z + delta * delta.transpose() * self.e4;
        q += (delta * mu.transpose() + mu * delta.transpose()) * self.e5;
        q
    }
}

struct CompGeom {
    mu: Vector,
    delta: Vector,
    gamma_inv: Mat,
    f: Mat,
    small_delta: Vector,
    lambda: Vector,
}

impl CompGeom {
    fn new(c: &EsnParams) -> Result<Self> {
        let e = Esn::new(c.clone())?;
        let ll = c.lambda.norm_squared();
        Ok(Self {
            mu: c.mu.clone(),
            delta: e.delta.clone(),
            gamma_inv: spd_inverse(&e.gamma)?,
            f: e.sigma_sqrt.clone(),
            small_delta: &c.lambda / (1.0 + ll).sqrt(),
            lambda: c.lambda.clone(),
        })
    }

    /// Score of a dispersion/shape direction with derivatives `(Γ̇, Δ̇)`.
    fn directional(&self, w: &Weighted, q: &Mat, dgamma: &Mat, ddelta: &Vector) -> f64 {
        let gi_dg = &self.gamma_inv * dgamma;
        let mut s = -0.5 * w.z * gi_dg.trace() + 0.5 * (gi_dg * &self.gamma_inv * q).trace();
        let r = &w.e3 - &self.delta * w.e4 - &self.mu * w.e5;
        s += ddelta.dot(&(&self.gamma_inv * r));
        s
    }
}

/// Per-observation score vectors (rows) in [`pack_params`] order.
pub fn observation_scores(samples: &[CensoredSample], model: &MixtureModel) -> Result<Mat> {
    let p = model.dim();
    let g = model.g();
    let skew = model.family == Family::SkewNormal;
    let pairs = upper_pairs(p);
    let d = model.n_free_params();
    let comps = Components::new(model)?;
    let geom = model.components.iter().map(CompGeom::new).collect::<Result<Vec<_>>>()?;
    let (z, _) = responsibilities(samples, model)?;
    let eye = Mat::identity(p, p);

    // directional derivatives that do not depend on the row
    let mut dirs: Vec<Vec<(Mat, Vector)>> = Vec::with_capacity(g);
    for cg in &geom {
        let mut v = Vec::new();
        if model.shared_gamma {
            if skew {
                for r in 0..p {
                    let mut e = Vector::zeros(p);
                    e[r] = 1.0;
                    v.push((Mat::zeros(p, p), e));
                }
            }
        } else {
            let dd = &eye - &cg.small_delta * cg.small_delta.transpose();
            for &(a, b) in &pairs {
                let fd = if a == b {
                    let mut m = Mat::zeros(p, p);
                    m[(a, a)] = 1.0;
                    m
                } else {
                    unit_sym(p, a, b)
                };
                let dgamma = &fd * &dd * &cg.f + &cg.f * &dd * &fd;
                v.push((dgamma, &fd * &cg.small_delta));
            }
            if skew {
                let ll = cg.lambda.norm_squared();
                for r in 0..p {
                    let mut dd_r = -&cg.lambda * cg.lambda[r];
                    dd_r[r] += 1.0 + ll;
                    dd_r /= (1.0 + ll).powf(1.5);
                    let ddelta = &cg.f * &dd_r;
                    let dgamma = -(&cg.f * (&dd_r * cg.small_delta.transpose() + &cg.small_delta * dd_r.transpose()) * &cg.f);
                    v.push((dgamma, ddelta));
                }
            }
        }
        dirs.push(v);
    }

    let mut out = Mat::zeros(samples.len(), d);
    for (i, s) in samples.iter().enumerate() {
        let mut row = Vec::with_capacity(d);
        let mut shared_part = vec![0.0; if model.shared_gamma { pairs.len() } else { 0 }];
        for j in 0..g {
            // same tolerance as the E-step: failures only count where the row barely belongs
            let st = match comps.stats(s, j) {
                Ok(st) if st.is_finite() => st,
                _ if z[(i, j)] < 1e-6 => EStepStats::zeros(p),
                Ok(_) => return Err(Error::DegenerateRow { row: i, msg: "conditional moments are not finite".into() }),
                Err(e) => return Err(crate::censored::row_error(i, e)),
            };
            let w = Weighted::new(z[(i, j)], &st);
            let cg = &geom[j];
            let q = w.q(&cg.mu, &cg.delta);
            let smu = &cg.gamma_inv * (&w.e1 - &cg.mu * w.z - &cg.delta * w.e5);
            row.extend(smu.iter());
            for (dg, ddel) in &dirs[j] {
                row.push(cg.directional(&w, &q, dg, ddel));
            }
            if model.shared_gamma {
                for (k, &(a, b)) in pairs.iter().enumerate() {
                    let e = unit_sym(p, a, b);
                    shared_part[k] += cg.directional(&w, &q, &e, &Vector::zeros(p));
                }
            }
        }
        row.extend(shared_part);
        let last = z[(i, g - 1)] / model.weights[g - 1];
        row.extend((0..g - 1).map(|j| z[(i, j)] / model.weights[j] - last));
        for (k, v) in row.into_iter().enumerate() {
            out[(i, k)] = v;
        }
    }
    Ok(out)
}

/// Standard errors `sqrt(diag(I_e⁻¹))`; the pseudo-inverse is used when the
/// condition number exceeds 1e12.
pub fn empirical_info_se(samples: &[CensoredSample], model: &MixtureModel) -> Result<StdErrors> {
    let s = observation_scores(samples, model)?;
    let info = s.transpose() * &s;
    let condition = condition_number_sym(&info);
    let pseudo = !(condition <= 1e12);
    let inv = if pseudo { pseudo_inverse_sym(&info, 1e-12) } else { spd_inverse(&info).unwrap_or_else(|_| pseudo_inverse_sym(&info, 1e-12)) };
    let se = (0..inv.nrows()).map(|k| inv[(k, k)].max(0.0).sqrt()).collect();
    Ok(StdErrors { names: param_names(model), estimates: pack_params(model)?, se, condition, pseudo_inverse: pseudo })
}

/// Observed log-likelihood contribution of each row.
pub fn observation_logliks(samples: &[CensoredSample], model: &MixtureModel) -> Result<Vec<f64>> {
    let comps = Components::new(model)?;
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let logs = (0..model.g())
                .map(|j| Ok(model.weights[j].ln() + comps.log_density(s, j)?))
                .collect::<Result<Vec<f64>>>()
                .map_err(|e| crate::censored::row_error(i, e))?;
            Ok(crate::special::log_sum_exp(&logs))
        })
        .collect()
}
