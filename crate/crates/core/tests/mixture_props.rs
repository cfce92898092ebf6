use approx::assert_relative_eq;
use censmix::analysis::{simulate, CensorScheme, MissingScheme, SimulationDesign};
use censmix::censored::{e_step, fit_msnc, monotonicity_audit, CensoredSample, SnComponent};
use censmix::esn::EsnParams;
use censmix::info::observation_scores;
use censmix::linalg::{Mat, Vector};
use censmix::mixture::*;
use proptest::prelude::*;

fn v(x: &[f64]) -> Vector {
    Vector::from_row_slice(x)
}

fn two_component(shared: bool) -> MixtureModel {
    let c1 = EsnParams::skew_normal(v(&[-3.0, -4.0]), Mat::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 4.5]), v(&[-2.0, 2.0])).unwrap();
    let c2 = EsnParams::skew_normal(v(&[2.0, 2.0]), Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.5]), v(&[-3.0, 4.0])).unwrap();
    MixtureModel::new(vec![0.65, 0.35], vec![c1, c2], Family::SkewNormal, shared).unwrap()
}

fn data(model: &MixtureModel, n: usize, rate: f64, seed: u64) -> Vec<CensoredSample> {
    let d = SimulationDesign {
        model: model.clone(),
        n,
        censoring: CensorScheme::LeftQuantile { rate },
        missing: MissingScheme::Mcar { rate: 0.05 },
        seed,
    };
    simulate(&d).unwrap().samples
}

fn permuted(model: &MixtureModel) -> MixtureModel {
    MixtureModel {
        weights: model.weights.iter().rev().cloned().collect(),
        components: model.components.iter().rev().cloned().collect(),
        ..model.clone()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn posterior_rows_are_distributions(seed in 0u64..1000, shift in -2.0f64..2.0) {
        let mut m = two_component(false);
        m.components[1].mu[0] += shift;
        let s = data(&m, 60, 0.2, seed);
        let (z, _) = responsibilities(&s, &m).unwrap();
        for i in 0..z.nrows() {
            let row = z.row(i);
            prop_assert!((row.sum() - 1.0).abs() < 1e-10);
            prop_assert!(row.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }

    #[test]
    fn loglik_invariant_to_component_order(seed in 0u64..1000) {
        let m = two_component(false);
        let s = data(&m, 60, 0.2, seed);
        let (_, a) = responsibilities(&s, &m).unwrap();
        let (_, b) = responsibilities(&s, &permuted(&m)).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs());
    }
}

#[test]
fn permuted_initialisation_reaches_the_same_fit() {
    let truth = two_component(false);
    let s = data(&truth, 300, 0.1, 3);
    let a = fit_from(&s, truth.clone(), 1e-10, 500).unwrap();
    let b = fit_from(&s, permuted(&truth), 1e-10, 500).unwrap();
    assert_relative_eq!(a.loglik, b.loglik, epsilon = 1e-6);
}

#[test]
fn single_component_e_step_matches_censored_em() {
    let truth = two_component(false);
    let s = data(&truth, 80, 0.2, 11);
    let one = MixtureModel::new(vec![1.0], vec![truth.components[0].clone()], Family::SkewNormal, false).unwrap();
    let (stats, w, _) = mixture_e_step(&s, &one).unwrap();
    let comp = SnComponent::new(truth.components[0].clone()).unwrap();
    for (i, row) in s.iter().enumerate() {
        assert_eq!(w[(i, 0)], 1.0);
        assert_eq!(stats[0][i], e_step(row, &comp).unwrap());
    }
}

#[test]
fn single_component_fit_matches_censored_em_fit() {
    let truth = two_component(false);
    let s = data(&truth, 150, 0.1, 4);
    let init = truth.components[0].clone();
    let direct = fit_msnc(&s, &init, 1e-8, 200, false).unwrap();
    let one = MixtureModel::new(vec![1.0], vec![init], Family::SkewNormal, false).unwrap();
    let mix = fit_from(&s, one, 1e-8, 200).unwrap();
    assert_eq!(direct.iterations, mix.iterations);
    assert_relative_eq!(direct.loglik, mix.loglik, max_relative = 1e-12);
    assert_relative_eq!(direct.params.mu, mix.model.components[0].mu, epsilon = 1e-9);
    assert_relative_eq!(direct.params.lambda, mix.model.components[0].lambda, epsilon = 1e-8);
}

#[test]
fn hard_responsibilities_split_into_separate_m_steps() {
    let truth = two_component(false);
    let d = SimulationDesign {
        model: truth.clone(),
        n: 200,
        censoring: CensorScheme::LeftQuantile { rate: 0.1 },
        missing: MissingScheme::None,
        seed: 21,
    };
    let sim = simulate(&d).unwrap();
    let comps: Vec<SnComponent> = truth.components.iter().map(|c| SnComponent::new(c.clone()).unwrap()).collect();
    let stats: Vec<Vec<_>> = comps.iter().map(|c| sim.samples.iter().map(|s| e_step(s, c).unwrap()).collect()).collect();
    let mut w = Mat::zeros(sim.samples.len(), 2);
    for (i, &l) in sim.labels.iter().enumerate() {
        w[(i, l)] = 1.0;
    }
    let next = mixture_m_step(&stats, &w, &truth).unwrap();
    for j in 0..2 {
        let group: Vec<CensoredSample> =
            sim.samples.iter().zip(&sim.labels).filter(|(_, &l)| l == j).map(|(s, _)| s.clone()).collect();
        let one_step = fit_msnc(&group, &truth.components[j], 1e-300, 1, false).unwrap();
        assert_relative_eq!(next.components[j].mu, one_step.params.mu, epsilon = 1e-9);
        assert_relative_eq!(next.components[j].sigma, one_step.params.sigma, epsilon = 1e-9);
        assert_relative_eq!(next.components[j].lambda, one_step.params.lambda, epsilon = 1e-8);
        assert_relative_eq!(next.weights[j], group.len() as f64 / sim.samples.len() as f64, epsilon = 1e-12);
    }
}

#[test]
fn em_step_from_truth_does_not_decrease_loglik() {
    for shared in [false, true] {
        let mut truth = two_component(false);
        if shared {
            // a common Γ: rebuild both Σ_j from the first component's Γ
            let g = censmix::esn::Esn::new(truth.components[0].clone()).unwrap().gamma;
            for c in &mut truth.components {
                let d = censmix::esn::Esn::new(c.clone()).unwrap().delta;
                *c = censmix::censored::recover_sn_params(&c.mu, &d, &g).unwrap();
            }
            truth.shared_gamma = true;
        }
        let s = data(&truth, 200, 0.2, 8);
        let (stats, w, before) = mixture_e_step(&s, &truth).unwrap();
        let next = mixture_m_step(&stats, &w, &truth).unwrap();
        let (_, after) = responsibilities(&s, &next).unwrap();
        assert!(after >= before - 1e-8 * before.abs(), "{before} -> {after}");
    }
}

#[test]
fn separated_blobs_give_cluster_proportions() {
    let c1 = EsnParams::skew_normal(v(&[0.0, 0.0]), Mat::identity(2, 2), v(&[1.0, 0.0])).unwrap();
    let c2 = EsnParams::skew_normal(v(&[12.0, 12.0]), Mat::identity(2, 2), v(&[0.0, 1.0])).unwrap();
    let m = MixtureModel::new(vec![0.3, 0.7], vec![c1, c2], Family::SkewNormal, false).unwrap();
    let s = data(&m, 400, 0.0, 2);
    let init = init_kmeans(&s, 2, Family::SkewNormal, false, 9).unwrap();
    let mut w = init.weights.clone();
    w.sort_by(f64::total_cmp);
    assert!((w[0] - 0.3).abs() < 0.05 && (w[1] - 0.7).abs() < 0.05, "{w:?}");
    assert_eq!(init, init_kmeans(&s, 2, Family::SkewNormal, false, 9).unwrap());
}

#[test]
fn init_needs_enough_rows() {
    let s: Vec<CensoredSample> = (0..3).map(|i| CensoredSample::observed(v(&[i as f64, 1.0]))).collect();
    assert!(init_kmeans(&s, 5, Family::SkewNormal, false, 1).is_err());
}

#[test]
fn fits_are_deterministic_and_consistent() {
    let truth = two_component(false);
    let s = data(&truth, 250, 0.1, 6);
    let cfg = FitConfig { g: 2, n_starts: 3, seed: 4, ..Default::default() };
    let a = fit_fm_msnc(&s, &cfg).unwrap();
    let b = fit_fm_msnc(&s, &cfg).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.model, b.model);
    let rho = a.n_params as f64;
    let n = s.len() as f64;
    assert_relative_eq!(a.criteria.aic, -2.0 * a.loglik + 2.0 * rho, max_relative = 1e-15);
    assert_relative_eq!(a.criteria.edc - a.criteria.aic, rho * (0.2 * n.sqrt() - 2.0), max_relative = 1e-10);
    assert_relative_eq!(a.criteria.bic - a.criteria.aic, rho * (n.ln() - 2.0), max_relative = 1e-10);
    assert_eq!(censmix::censored::monotonicity_violations(&a.trace), 0);
}

#[test]
fn score_sum_vanishes_at_the_mle() {
    for (family, shared) in [(Family::SkewNormal, false), (Family::Normal, false), (Family::SkewNormal, true)] {
        let truth = two_component(false);
        let s = data(&truth, 300, 0.1, 12);
        let mut init = init_kmeans(&s, 2, family, shared, 1).unwrap();
        if !shared && family == Family::SkewNormal {
            init = truth.clone();
        }
        let fit = fit_from(&s, init, 1e-13, 20000).unwrap();
        let scores = observation_scores(&s, &fit.model).unwrap();
        let total = scores.row_sum();
        assert!(total.norm() <= 1e-4 * s.len() as f64, "{family:?} {shared}: {}", total.norm());
    }
}

#[test]
fn no_fit_in_this_binary_decreased_its_loglik() {
    fits_are_deterministic_and_consistent();
    let (fits, violations) = monotonicity_audit();
    assert!(fits > 0);
    assert_eq!(violations, 0);
}

#[test]
fn subsample_start_is_a_partition_of_all_rows() {
    let truth = two_component(false);
    let s = data(&truth, 300, 0.1, 14);
    assert_eq!(init_kmeans(&s, 2, Family::SkewNormal, false, 5).unwrap(), init_kmeans_subsample(&s, 2, Family::SkewNormal, false, 5, 1.0).unwrap());
    let half = init_kmeans_subsample(&s, 2, Family::SkewNormal, false, 5, 0.5).unwrap();
    assert_eq!(half, init_kmeans_subsample(&s, 2, Family::SkewNormal, false, 5, 0.5).unwrap());
    // weights come from cluster sizes over every row
    assert!(half.weights.iter().all(|&w| (w * 300.0 - (w * 300.0).round()).abs() < 1e-9));
}

#[test]
fn multi_start_trace_is_one_monotone_run() {
    let truth = two_component(false);
    let s = data(&truth, 300, 0.1, 15);
    let many = fit_fm_msnc(&s, &FitConfig { g: 2, n_starts: 8, seed: 3, ..Default::default() }).unwrap();
    assert_eq!(*many.trace.last().unwrap(), many.loglik);
    assert_eq!(censmix::censored::monotonicity_violations(&many.trace), 0);
    assert_eq!(many.trace.len(), many.iterations + 1);
}
