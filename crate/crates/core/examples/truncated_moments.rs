//! First and second moments of truncated normal and truncated skew-normal
//! laws, checked against a seeded rejection sampler.
//!
//! Run with `cargo run --release --example truncated_moments`.

use censmix::esn::{Esn, EsnParams};
use censmix::linalg::{symmetric_sqrt, Mat, Vector};
use censmix::truncated::oracle::mc_truncated_oracle;
use censmix::truncated::{ratio_weighted_tn_moments, tesn_moments, tn_moments};
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> censmix::Result<()> {
    let mu = Vector::from_row_slice(&[0.5, -0.2, 1.0]);
    let sigma = Mat::from_row_slice(3, 3, &[1.0, 0.4, 0.2, 0.4, 2.0, -0.5, 0.2, -0.5, 1.5]);
    let lower = Vector::from_row_slice(&[0.0, f64::NEG_INFINITY, -1.0]);
    let upper = Vector::from_row_slice(&[f64::INFINITY, 0.5, 2.0]);

    let tn = tn_moments(&lower, &upper, &mu, &sigma)?;
    let root = symmetric_sqrt(&sigma)?;
    let mc = mc_truncated_oracle(
        &lower,
        &upper,
        |r| &mu + &root * Vector::from_fn(3, |_, _| r.sample::<f64, _>(StandardNormal)),
        1_000_000,
        7,
    )?;
    println!("truncated normal");
    println!("  E[W]   exact {}", show(&tn.mean));
    println!("         MC    {}  (SE {})", show(&mc.moments.mean), show(&mc.se_mean));
    println!("  Cov[W] exact {}", show_mat(&tn.covariance()));

    let esn = Esn::new(EsnParams::new(mu.clone(), sigma.clone(), Vector::from_row_slice(&[2.0, -1.0, 0.5]), 0.5)?)?;
    let t = tesn_moments(&lower, &upper, &esn)?;
    let groot = symmetric_sqrt(&esn.gamma)?;
    let mc = mc_truncated_oracle(&lower, &upper, |r| esn.sample(r, &groot), 1_000_000, 8)?;
    println!("truncated extended skew-normal");
    println!("  P(rect) {:.6}", t.prob);
    println!("  E[Y]   exact {}", show(&t.moments.mean));
    println!("         MC    {}  (SE {})", show(&mc.moments.mean), show(&mc.se_mean));

    let r = ratio_weighted_tn_moments(&lower, &upper, &esn)?;
    println!("  E[zeta]   augmented {:.8}  shifted-normal {:.8}", t.ratio0, r.zero);
    println!("  E[Y zeta] augmented {}", show(&t.ratio1));
    println!("            shifted   {}", show(&r.first));
    Ok(())
}

fn show(v: &Vector) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(", "))
}

fn show_mat(m: &Mat) -> String {
    let rows: Vec<String> = m.row_iter().map(|r| show(&r.transpose())).collect();
    format!("[{}]", rows.join(", "))
}
