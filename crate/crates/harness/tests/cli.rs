use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn jdld(args: &[&str], root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jdld"))
        .args(args)
        .env("JDLD_OUTPUT_ROOT", root)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn count_files(dir: &Path, file: &str) -> usize {
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            n += count_files(&path, file);
        } else if path.file_name().unwrap() == file {
            n += 1;
        }
    }
    n
}

#[test]
fn sample_is_deterministic_and_w1_of_identical_files_is_zero() {
    let root = scratch("sample");
    let args = |out: &str| {
        vec![
            "sample", "--target", "cross", "--sampler", "jdld", "--iters", "100000", "--lambda", "200", "--epsilon",
            "1e-5", "--seed", "7", "--out",
        ]
        .into_iter()
        .map(str::to_owned)
        .chain([root.join(out).display().to_string()])
        .collect::<Vec<_>>()
    };
    for out in ["a", "b"] {
        let a = args(out);
        let o = jdld(&a.iter().map(String::as_str).collect::<Vec<_>>(), &root);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(root.join("a/chain.csv")).unwrap();
    assert_eq!(a, std::fs::read(root.join("b/chain.csv")).unwrap());
    assert_eq!(a.iter().filter(|&&c| c == b'\n').count(), 100_001);

    let path = root.join("a/chain.csv").display().to_string();
    let o = jdld(&["w1", &path, &path], &root);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text, "x0 0\nx1 0\n");
}

#[test]
fn reproduce_dunes_at_scale_100_writes_grid_of_histograms() {
    let root = scratch("dunes");
    let o = jdld(&["reproduce", "dunes", "--scale", "100"], &root);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = root.join("dunes");
    // 4 alphas × 3 samplers, plus one reference per alpha
    assert_eq!(count_files(&out, "histogram.csv"), 12 + 4);
    let chain = std::fs::read_to_string(out.join("alpha0/jdld/chain.csv")).unwrap();
    assert_eq!(chain.lines().count(), 10_000 + 1);
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("n_iters = 10000"));
    assert!(summary.contains("alpha = [-2, -1, 0, 1]  [published:"));
    assert!(summary.contains("epsilon = 1e-4  [artifact default:"));
}

#[test]
fn nmodes_writes_one_w1_curve_per_sampler_and_mode_count() {
    let root = scratch("nmodes");
    let o = jdld(&["reproduce", "nmodes", "--scale", "1000"], &root);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(count_files(&root.join("nmodes"), "w1.csv"), 8);
}

#[test]
fn diverging_chain_exits_nonzero_naming_sampler_and_iteration() {
    let root = scratch("quad");
    let o = jdld(&["reproduce", "quad2d", "--scale", "100"], &root);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sgld chain produced a non-finite state at iteration"), "{err}");
    // the other samplers still produce their artifacts
    assert!(root.join("quad2d/quad2d/mh/chain.csv").exists());
    assert!(root.join("quad2d/summary.txt").exists());
}

#[test]
fn config_errors_name_the_field() {
    let root = scratch("config");
    let file = root.join("bad.toml");
    std::fs::write(&file, "lambdda = [1.0]\n").unwrap();
    let o = jdld(&["reproduce", "cross2d", "--config", file.to_str().unwrap()], &root);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambdda"));

    std::fs::write(&file, "epsilon = [-1.0]\n").unwrap();
    let o = jdld(&["reproduce", "cross2d", "--config", file.to_str().unwrap()], &root);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon"));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let root = scratch("usage");
    let o = jdld(&["resample"], &root);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = jdld(&["reproduce", "dunes", "--scael", "2"], &root);
    assert!(!o.status.success());
}
