use std::path::Path;
use std::process::{Command, Output};

use nhkh_nn::ModelFile;

fn nhkh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhkh"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = nhkh(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn fails_with(args: &[&str], needle: &str) {
    let out = nhkh(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(needle), "{args:?}: {err}");
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn grid_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![
        "generate",
        "--output",
        out,
        "--sampling",
        "grid",
        "--n-eta",
        "3",
        "--n-u",
        "3",
        "--length",
        "6",
    ];
    v.extend_from_slice(extra);
    v
}

#[test]
fn generate_is_deterministic_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    ok(&grid_args(s(&a), &[]));
    ok(&grid_args(s(&b), &[]));
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let manifest = std::fs::read_to_string(dir.path().join("a.csv.manifest")).unwrap();
    for key in ["version=", "spec_hash=", "seed=0", "length=6"] {
        assert!(manifest.contains(key), "{manifest}");
    }
    fails_with(&grid_args(s(&a), &["--eta-max", "0.97"]), "eta range");
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.conf");
    std::fs::write(
        &cfg,
        "# tiny sweep\nsampling = random\ncount = 3\nlength = 4\nseed = 5\n",
    )
    .unwrap();
    let out = dir.path().join("d.csv");
    ok(&[
        "generate",
        "--config",
        s(&cfg),
        "--output",
        s(&out),
        "--count",
        "2",
    ]);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 3);
    std::fs::write(&cfg, "cuont = 3\n").unwrap();
    fails_with(
        &["generate", "--config", s(&cfg), "--output", s(&out)],
        "cuont",
    );
}

#[test]
fn train_predict_diff_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    ok(&grid_args(s(&p("train.csv")), &[]));

    for (features, width) in [("two-point", 32), ("all", 64)] {
        let model = p(&format!("{features}.bin"));
        ok(&[
            "train",
            "--dataset",
            s(&p("train.csv")),
            "--task",
            "chi-class",
            "--features",
            features,
            "--output",
            s(&model),
            "--max-epochs",
            "2",
            "--learning-rate",
            "1e-3",
            "--target-val-loss",
            "0",
        ]);
        assert_eq!(ModelFile::load(&model).unwrap().input_dim(), width);
        let curve = std::fs::read_to_string(p(&format!("{features}.bin.curve.csv"))).unwrap();
        assert_eq!(curve.lines().count(), 3);
    }

    // missing label column
    let text = std::fs::read_to_string(p("train.csv")).unwrap();
    std::fs::write(p("nolabel.csv"), text.replacen("c_corr", "c_cor", 1)).unwrap();
    fails_with(
        &[
            "train",
            "--dataset",
            s(&p("nolabel.csv")),
            "--task",
            "entropy",
            "--output",
            s(&p("x.bin")),
        ],
        "c_corr",
    );

    ok(&[
        "predict",
        "--model",
        s(&p("all.bin")),
        "--dataset",
        s(&p("train.csv")),
        "--output",
        s(&p("pred.csv")),
    ]);
    let grid = std::fs::read_to_string(p("pred.csv")).unwrap();
    assert!(grid.starts_with("eta,u_over_t,true,pred,diff,valid\n"));
    assert_eq!(grid.lines().count(), 10);
    assert!(std::fs::read_to_string(p("pred.csv.manifest"))
        .unwrap()
        .contains("accuracy="));

    // identical inputs: all-zero diff
    ok(&[
        "diff",
        "--truth",
        s(&p("pred.csv")),
        "--pred",
        s(&p("pred.csv")),
        "--output",
        s(&p("same.csv")),
    ]);
    let same = nhkh_cli::grid::PhaseGrid::read(&p("same.csv")).unwrap();
    assert!(same.cells.iter().all(|c| c.diff == 0.0));

    // one changed cell
    let mut lines: Vec<String> = grid.lines().map(str::to_string).collect();
    let mut fields: Vec<String> = lines[4].split(',').map(str::to_string).collect();
    fields[3] = if fields[3] == "4" {
        "1".into()
    } else {
        "4".into()
    };
    lines[4] = fields.join(",");
    std::fs::write(p("pred2.csv"), lines.join("\n") + "\n").unwrap();
    ok(&[
        "diff",
        "--truth",
        s(&p("pred.csv")),
        "--pred",
        s(&p("pred2.csv")),
        "--output",
        s(&p("one.csv")),
    ]);
    let one = nhkh_cli::grid::PhaseGrid::read(&p("one.csv")).unwrap();
    assert_eq!(one.cells.iter().filter(|c| c.diff != 0.0).count(), 1);
    assert!(one.cells.iter().all(|c| c.diff == 0.0 || c.diff == 1.0));

    // axis mismatch
    ok(&grid_args(s(&p("other.csv")), &["--u-max", "3"]));
    fails_with(
        &[
            "diff",
            "--truth",
            s(&p("other.csv")),
            "--truth-column",
            "chi_class",
            "--pred",
            s(&p("pred.csv")),
            "--output",
            s(&p("bad.csv")),
        ],
        "axis mismatch",
    );

    for img in ["h1.ppm", "h2.ppm"] {
        ok(&[
            "heatmap",
            "--grid",
            s(&p("pred.csv")),
            "--column",
            "true",
            "--overlay-delta",
            "0.5",
            "--output",
            s(&p(img)),
        ]);
    }
    let bytes = std::fs::read(p("h1.ppm")).unwrap();
    assert!(bytes.starts_with(b"P6\n24 24\n255\n"));
    assert_eq!(bytes, std::fs::read(p("h2.ppm")).unwrap());
    fails_with(
        &[
            "heatmap",
            "--grid",
            s(&p("pred.csv")),
            "--column",
            "nope",
            "--output",
            s(&p("h3.ppm")),
        ],
        "nope",
    );
}

#[test]
fn empty_dataset_predicts_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    ok(&grid_args(s(&p("d.csv")), &[]));
    ok(&[
        "train",
        "--dataset",
        s(&p("d.csv")),
        "--task",
        "entropy",
        "--output",
        s(&p("m.bin")),
        "--max-epochs",
        "1",
    ]);
    let header = std::fs::read_to_string(p("d.csv"))
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
        + "\n";
    std::fs::write(p("empty.csv"), header).unwrap();
    ok(&[
        "predict",
        "--model",
        s(&p("m.bin")),
        "--dataset",
        s(&p("empty.csv")),
        "--output",
        s(&p("g.csv")),
    ]);
    assert_eq!(
        std::fs::read_to_string(p("g.csv")).unwrap(),
        "eta,u_over_t,true,pred,diff,valid\n"
    );
}

#[test]
fn boundaries_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    ok(&[
        "boundaries",
        "--delta",
        "0.5",
        "--resolution",
        "5",
        "--output",
        s(&out),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 8 * 5);
    assert!(text.contains("imag_zero:+:r-"));
    fails_with(
        &["boundaries", "--delta-pair", "0.5", "--output", s(&out)],
        "solvable",
    );
}
