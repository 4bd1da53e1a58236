use std::path::Path;
use std::process::{Command, Output};

fn avgfusion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avgfusion"))
        .args(args)
        .env_remove("AVGFUSION_THREADS")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rows<'a>(csv: &'a str, kind: &str) -> Vec<Vec<&'a str>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|r| r[1] == kind)
        .collect()
}

fn column(csv: &str, name: &str) -> usize {
    csv.lines()
        .next()
        .unwrap()
        .split(',')
        .position(|c| c == name)
        .unwrap()
}

#[test]
fn fusion_sweep_row_count_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let svg = dir.path().join("f.svg");
    let o = avgfusion(&[
        "fusion-sweep",
        "--n-copies",
        "1,2,3",
        "--m-grid",
        "0:0.45:0.05",
        "--samples",
        "200",
        "--seed",
        "42",
        "--out",
        path_str(&out),
        "--svg",
        path_str(&svg),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 10 * 202);
    assert_eq!(rows(&csv, "mean").len(), 30);
    assert_eq!(rows(&csv, "std").len(), 30);

    let col = column(&csv, "f_hh_norm");
    // mean rows come N-major: ten per copy count
    let means: Vec<f64> = rows(&csv, "mean")
        .iter()
        .map(|r| r[col].parse().unwrap())
        .collect();
    for i in 0..10 {
        assert!(means[20 + i] >= means[i], "m index {i}");
    }

    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed SVG");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let lines = doc
        .descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .count();
    assert_eq!(lines, 3);
}

#[test]
fn trace_distance_mean_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("td.csv");
    let svg = dir.path().join("td.svg");
    let o = avgfusion(&[
        "trace-distance",
        "--n-copies",
        "1,2,3,4,5,6",
        "--m",
        "0.2",
        "--samples",
        "50",
        "--seed",
        "7",
        "--out",
        path_str(&out),
        "--svg",
        path_str(&svg),
    ]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let col = column(&csv, "trace_distance");
    let means: Vec<f64> = rows(&csv, "mean")
        .iter()
        .map(|r| r[col].parse().unwrap())
        .collect();
    assert_eq!(means.len(), 6);
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
    roxmltree::Document::parse(&std::fs::read_to_string(&svg).unwrap()).unwrap();
}

#[test]
fn single_copy_bsm_always_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let o = avgfusion(&[
        "bsm-sweep",
        "--n-copies",
        "1",
        "--m-grid",
        "0:0.4:0.1",
        "--samples",
        "10",
        "--seed",
        "1",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let col = column(&csv, "p_success");
    let trials = rows(&csv, "trial");
    assert_eq!(trials.len(), 50);
    for r in trials {
        assert_eq!(r[col].parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let o = avgfusion(&[
        "bsm-sweep",
        "--n-copies",
        "2,3",
        "--m-grid",
        "0.1:0.2:0.1",
        "--samples",
        "4",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let bytes = std::fs::read(&out).unwrap();
    let csv = String::from_utf8(bytes).unwrap();
    assert!(!csv.contains('\r'));
    assert!(csv.ends_with('\n'));
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "experiment,row_kind,N,m,trial,eta_h,eta_v,f,p_success,f_norm,f_closed,p_success_closed,f_norm_closed"
    );
    let width = header.split(',').count();
    for line in csv.lines().skip(1) {
        let r: Vec<&str> = line.split(',').collect();
        assert_eq!(r.len(), width);
        assert_eq!(r[0], "bsm");
        assert!(["trial", "mean", "std"].contains(&r[1]));
        for v in &r[7..] {
            v.parse::<f64>().unwrap();
        }
        if r[1] == "trial" {
            let n: usize = r[2].parse().unwrap();
            assert_eq!(r[5].split(';').count(), n);
            assert_eq!(r[6].split(';').count(), n);
        } else {
            assert!(r[4].is_empty() && r[5].is_empty() && r[6].is_empty());
        }
    }
}

#[test]
fn output_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "2", "5"] {
        let out = dir.path().join(format!("f{threads}.csv"));
        let o = Command::new(env!("CARGO_BIN_EXE_avgfusion"))
            .args([
                "fusion-sweep",
                "--n-copies",
                "1,3",
                "--m-grid",
                "0.1:0.3:0.1",
                "--samples",
                "8",
                "--seed",
                "9",
            ])
            .args(["--out", path_str(&out)])
            .env("AVGFUSION_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn bad_thread_variable_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_avgfusion"))
        .args(["trace-distance", "--samples", "2", "--out", path_str(&out)])
        .env("AVGFUSION_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_and_is_deterministic() {
    let a = avgfusion(&["verify", "--samples", "5", "--seed", "3"]);
    let b = avgfusion(&["verify", "--samples", "5", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().all(|l| l.contains(": PASS (max dev")));
    assert!(text.contains("M_N-equivalence: PASS"));
}

#[test]
fn verify_rejects_zero_samples() {
    let o = avgfusion(&["verify", "--samples", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

const BALANCED: &str = "\
eta_h = 0.5, eta_v = 0.5
    ψ+  ψ-  φ+  φ-
a²          ✓   ✓
b²          ✓   ✓
c²          ✓   ✓
d²          ✓   ✓
ab  ✓
ac
ad      ✓
bc      ✓
bd
cd  ✓
";

const DETUNED: &str = "\
eta_h = 0.3, eta_v = 0.3
    ψ+  ψ-  φ+  φ-
a²          ✓   ✓
b²          ✓   ✓
c²          ✓   ✓
d²          ✓   ✓
ab  ✓
ac          ×   ×
ad  ×   ✓
bc  ×   ✓
bd          ×   ×
cd  ✓
";

#[test]
fn table2_reproduces_the_support_table() {
    let a = avgfusion(&["table2", "--eta-h", "0.5", "--eta-v", "0.5"]);
    let b = avgfusion(&["table2", "--eta-h", "0.5", "--eta-v", "0.5"]);
    assert!(a.status.success());
    assert_eq!(String::from_utf8(a.stdout.clone()).unwrap(), BALANCED);
    assert_eq!(a.stdout, b.stdout);
    let c = avgfusion(&["table2", "--eta-h", "0.3", "--eta-v", "0.3"]);
    assert_eq!(String::from_utf8(c.stdout).unwrap(), DETUNED);
}

#[test]
fn table2_rejects_out_of_range() {
    assert_eq!(
        avgfusion(&["table2", "--eta-h", "1.5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        avgfusion(&["table2", "--eta-v", "-0.1"]).status.code(),
        Some(2)
    );
}

#[test]
fn flag_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    for args in [
        vec!["fusion-sweep", "--bogus", "1", "--out", path_str(&out)],
        vec![
            "fusion-sweep",
            "--m-grid",
            "0:0.6:0.1",
            "--out",
            path_str(&out),
        ],
        vec!["fusion-sweep", "--n-copies", "0,1", "--out", path_str(&out)],
        vec!["bsm-sweep", "--samples", "0", "--out", path_str(&out)],
        vec!["trace-distance", "--m", "0.7", "--out", path_str(&out)],
        vec!["fusion-sweep"],
        vec![
            "bsm-sweep",
            "--plot-metric",
            "nope",
            "--samples",
            "1",
            "--out",
            path_str(&out),
        ],
    ] {
        let o = avgfusion(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert!(!out.exists());
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("x.csv");
    let o = avgfusion(&["trace-distance", "--samples", "2", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot write"));
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let via_cfg = dir.path().join("a.csv");
    let via_flags = dir.path().join("b.csv");
    std::fs::write(
        &cfg,
        format!(
            "# trace distance run\nn-copies = 1,2\nm = 0.3\nsamples = 4\nseed = 11\nout = {}\n",
            path_str(&via_cfg)
        ),
    )
    .unwrap();
    let o = avgfusion(&["trace-distance", "--config", path_str(&cfg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = avgfusion(&[
        "trace-distance",
        "--n-copies",
        "1,2",
        "--m",
        "0.3",
        "--samples",
        "4",
        "--seed",
        "11",
        "--out",
        path_str(&via_flags),
    ]);
    assert!(o.status.success());
    assert_eq!(
        std::fs::read(&via_cfg).unwrap(),
        std::fs::read(&via_flags).unwrap()
    );

    // explicit flags win over the file
    let o = avgfusion(&[
        "trace-distance",
        "--config",
        path_str(&cfg),
        "--samples",
        "2",
    ]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&via_cfg).unwrap();
    assert_eq!(rows(&csv, "trial").len(), 4);

    std::fs::write(&cfg, "bogus-key = 1\n").unwrap();
    let o = avgfusion(&[
        "trace-distance",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&via_cfg),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = avgfusion(&[
        "trace-distance",
        "--config",
        path_str(&dir.path().join("none.cfg")),
        "--out",
        "x",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn version_and_help() {
    let o = avgfusion(&["version"]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .starts_with("avgfusion "));
    let o = avgfusion(&["fusion-sweep", "--help"]);
    assert!(o.status.success());
    let help = String::from_utf8(o.stdout).unwrap();
    assert!(help.contains("[default: 0:0.45:0.05]"));
    assert!(help.contains("[default: 200]"));
}
