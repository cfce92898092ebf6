//! Skew-normal densities, distribution functions and rectangle probabilities.
//!
//! Run with `cargo run --release --example densities`.

use censmix::esn::{Esn, EsnParams};
use censmix::linalg::{symmetric_sqrt, Mat, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> censmix::Result<()> {
    let mu = Vector::from_row_slice(&[-3.0, -4.0]);
    let sigma = Mat::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 4.5]);
    let lambda = Vector::from_row_slice(&[-2.0, 2.0]);

    println!("Sigma^(1/2) = {}", show_mat(&symmetric_sqrt(&sigma)?));

    let sn = Esn::new(EsnParams::skew_normal(mu.clone(), sigma.clone(), lambda.clone())?)?;
    let esn = Esn::new(EsnParams::new(mu, sigma, lambda, -1.0)?)?;
    println!("delta = {}  gamma = {}", show(&sn.delta), show_mat(&sn.gamma));

    for y in [[-3.0, -4.0], [-5.0, -2.0], [0.0, 0.0]] {
        let y = Vector::from_row_slice(&y);
        println!(
            "y = ({:5.1}, {:5.1})  SN pdf {:.6}  cdf {:.6}   ESN(tau=-1) pdf {:.6}  cdf {:.6}",
            y[0],
            y[1],
            sn.pdf(&y),
            sn.cdf(&y)?,
            esn.pdf(&y),
            esn.cdf(&y)?
        );
    }

    let lo = Vector::from_row_slice(&[-6.0, f64::NEG_INFINITY]);
    let hi = Vector::from_row_slice(&[-2.0, -3.0]);
    println!("P(-6 <= Y1 <= -2, Y2 <= -3): augmented {:.8}  by corners {:.8}", sn.rect_prob(&lo, &hi)?, sn.rect_prob_by_corners(&lo, &hi)?);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let root = symmetric_sqrt(&sn.gamma)?;
    let n = 200_000;
    let mut m = Vector::zeros(2);
    let mut inside = 0usize;
    for _ in 0..n {
        let y = sn.sample(&mut rng, &root);
        inside += usize::from((0..2).all(|k| y[k] >= lo[k] && y[k] <= hi[k]));
        m += y;
    }
    m /= n as f64;
    println!("mean: exact {}  sample {}", show(&sn.mean()), show(&m));
    println!("rectangle share in the sample: {:.5}", inside as f64 / n as f64);
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
