use censmix::io::{read_dataset_file, FitReport, TruthFile};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_censmix"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const DESIGN: &str = r#"
n = 200
seed = 17
censoring = { scheme = "left-quantile", rate = 0.1 }
missing = { scheme = "mcar", rate = 0.1 }

[model]
[[model.components]]
weight = 0.65
mu = [-5.0, -4.0]
sigma = [[3.0, 1.0], [1.0, 4.5]]
lambda = [-2.0, 3.0]

[[model.components]]
weight = 0.35
mu = [2.0, 3.0]
sigma = [[2.0, 1.0], [1.0, 3.5]]
lambda = [-2.0, 3.0]
"#;

fn setup() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let design = dir.path().join("design.toml");
    std::fs::write(&design, DESIGN).unwrap();
    (dir, design)
}

#[test]
fn simulate_is_reproducible_and_writes_truth() {
    let (dir, design) = setup();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(run(&["simulate", s(&design), "--out", s(&a)]).status.code(), Some(0));
    assert_eq!(run(&["simulate", s(&design), "--out", s(&b)]).status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let other = run(&["simulate", s(&design), "--seed", "18"]);
    assert_ne!(other.stdout, std::fs::read(&a).unwrap());

    let truth: TruthFile = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.truth.json")).unwrap()).unwrap();
    let data = read_dataset_file(&a).unwrap();
    assert_eq!(truth.labels.len(), 200);
    assert_eq!(truth.design.model.components.len(), 2);
    for (row, full) in data.samples.iter().zip(&truth.complete) {
        for k in 0..2 {
            if !row.censored[k] {
                assert_eq!(row.value[k], full[k]);
            }
        }
    }
}

#[test]
fn censoring_share_follows_the_design() {
    let dir = tempfile::tempdir().unwrap();
    let design = dir.path().join("d.toml");
    let text = DESIGN.replace("n = 200", "n = 2000").replace("rate = 0.1 }\nmissing = { scheme = \"mcar\", rate = 0.1 }", "rate = 0.05 }");
    std::fs::write(&design, text).unwrap();
    let out = dir.path().join("d.csv");
    assert_eq!(run(&["simulate", s(&design), "--out", s(&out)]).status.code(), Some(0));
    let data = read_dataset_file(&out).unwrap();
    let cells = data.samples.len() * 2;
    let censored: usize = data.samples.iter().map(|r| r.censored.iter().filter(|&&c| c).count()).sum();
    let share = censored as f64 / cells as f64;
    assert!((0.04..=0.06).contains(&share), "{share}");
}

#[test]
fn fit_impute_round_trip() {
    let (dir, design) = setup();
    let data = dir.path().join("d.csv");
    let report = dir.path().join("r.txt");
    assert_eq!(run(&["simulate", s(&design), "--out", s(&data)]).status.code(), Some(0));
    let fit = run(&["fit", s(&data), "--g", "1", "--g-max", "2", "--starts", "2", "--out", s(&report)]);
    assert_eq!(fit.status.code(), Some(0), "{}", String::from_utf8_lossy(&fit.stderr));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("AIC") && text.contains("mu1[1]"));
    let rep = FitReport::parse(&text).unwrap();
    assert_eq!(rep.fits.len(), 2);
    for f in &rep.fits {
        let r = f.result.as_ref().unwrap();
        assert_eq!(r.aic, -2.0 * r.loglik + 2.0 * r.n_params as f64);
        assert_eq!(r.posterior.len(), 200);
        assert_eq!(r.classes.len(), 200);
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0] - 1e-8 * w[0].abs()));
        assert!(r.estimates.iter().all(|e| e.se.is_some()));
    }
    assert_eq!(rep.best.bic, Some(2));

    // same inputs, same report
    let again = run(&["fit", s(&data), "--g", "1", "--g-max", "2", "--starts", "2"]);
    assert_eq!(again.stdout, text.as_bytes());

    let imputed = dir.path().join("i.csv");
    let truth = dir.path().join("d.csv.truth.json");
    let imp = run(&["impute", s(&data), "--report", s(&report), "--truth", s(&truth), "--out", s(&imputed)]);
    assert_eq!(imp.status.code(), Some(0), "{}", String::from_utf8_lossy(&imp.stderr));
    let summary = String::from_utf8(imp.stdout).unwrap();
    let mae = |label: &str| -> f64 {
        let line = summary.lines().find(|l| l.starts_with(label)).unwrap();
        line.split_whitespace().nth(line.split_whitespace().position(|w| w == "MAE").unwrap() + 1).unwrap().parse().unwrap()
    };
    assert!(mae("mixture") < mae("col mean"), "{summary}");

    let input = std::fs::read_to_string(&data).unwrap();
    let output = std::fs::read_to_string(&imputed).unwrap();
    for (a, b) in input.lines().zip(output.lines()).skip(1) {
        let fa: Vec<&str> = a.split(',').collect();
        let fb: Vec<&str> = b.split(',').collect();
        assert_eq!(fb.len(), fa.len() + 1);
        for k in 0..2 {
            if fa[2 + k] == "0" {
                assert_eq!(fa[k], fb[k]);
            } else {
                assert!(fb[k].parse::<f64>().unwrap().is_finite());
                assert!(fb.last().unwrap().contains(&format!("y{}", k + 1)));
            }
        }
        assert_eq!(&fa[2..], &fb[2..fa.len()]);
    }
}

#[test]
fn impute_flags_exactly_the_missing_cell() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("y1,y2,c1,c2,lo1,lo2,hi1,hi2\n");
    for i in 0..60 {
        let x = (i as f64 * 0.37).sin() * 2.0;
        let y = if i == 7 { String::new() } else { format!("{}", 0.5 * x + (i as f64 * 0.91).cos()) };
        let c2 = if i == 7 { "1" } else { "0" };
        csv.push_str(&format!("{x},{y},0,{c2},,,,\n"));
    }
    let data = dir.path().join("d.csv");
    std::fs::write(&data, &csv).unwrap();
    let report = dir.path().join("r.txt");
    assert_eq!(run(&["fit", s(&data), "--g", "1", "--out", s(&report)]).status.code(), Some(0));
    let out = run(&["impute", s(&data), "--report", s(&report)]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let flagged: Vec<&str> = text.lines().skip(1).filter(|l| !l.ends_with(',')).collect();
    assert_eq!(flagged.len(), 1);
    assert!(flagged[0].ends_with(",y2"));
    for (a, b) in csv.lines().zip(text.lines()).skip(1) {
        if !b.ends_with(",y2") {
            assert_eq!(format!("{a},"), b);
        }
    }
}

#[test]
fn normal_family_has_no_shape_parameters() {
    let (dir, design) = setup();
    let data = dir.path().join("d.csv");
    assert_eq!(run(&["simulate", s(&design), "--out", s(&data)]).status.code(), Some(0));
    let out = run(&["fit", s(&data), "--g", "2", "--family", "normal"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = FitReport::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let r = rep.fits[0].result.as_ref().unwrap();
    assert!(r.estimates.iter().all(|e| !e.name.starts_with("lambda")));
    assert!(r.model.components.iter().all(|c| c.lambda.as_ref().unwrap().iter().all(|&l| l == 0.0)));
    assert_eq!(r.n_params, 11);
}

#[test]
fn study_prints_table_layout() {
    let dir = tempfile::tempdir().unwrap();
    let design = dir.path().join("d.toml");
    std::fs::write(
        &design,
        "n = 150\nseed = 2\nsizes = [100, 150]\ncensoring = { scheme = \"left-quantile\", rate = 0.05 }\n[model]\n[[model.components]]\nweight = 1.0\nmu = [0.0, 1.0]\nsigma = [[1.0, 0.3], [0.3, 2.0]]\nlambda = [2.0, -1.0]\n",
    )
    .unwrap();
    let out = run(&["study", s(&design), "--replicates", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for row in ["MC mean", "MC Sd", "IM SE", "bias", "mse", "n = 100", "n = 150"] {
        assert!(text.contains(row), "missing {row}");
    }
    assert_eq!(run(&["study", s(&design), "--replicates", "1"]).status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["fit"]).status.code(), Some(1));
    assert_eq!(run(&["fit", "x.csv", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["fit", s(&dir.path().join("absent.csv"))]).status.code(), Some(1));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "y1,c1,lo1,hi1\n1.0,0,,\nabc,0,,\n").unwrap();
    let out = run(&["fit", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("y1"), "{err}");

    // identical rows: every G fails numerically
    let flat = dir.path().join("flat.csv");
    std::fs::write(&flat, format!("y1,y2,c1,c2,lo1,lo2,hi1,hi2\n{}", "1.0,2.0,0,0,,,,\n".repeat(20))).unwrap();
    let out = run(&["fit", s(&flat), "--g", "2"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    let design = dir.path().join("d.toml");
    std::fs::write(&design, "n = 10\n").unwrap();
    assert_eq!(run(&["simulate", s(&design)]).status.code(), Some(1));
}
