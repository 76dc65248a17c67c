use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = "\
geometry.K = 4
mesh.level = 2
interp.N = 8
chain.M = 200
chain.seed = 5
truth = 1:0.4 2:-0.3
bench.N = 2, 4
bench.samples = 10
bench.plain_samples = 2
test.samples = 4
compare.iso_w = 1
render.bilinear = 2
";

fn sparse_eit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparse-eit")).args(args).output().expect("binary runs")
}

fn run_ok(sub: &str, cfg: &Path, out: &Path, extra: &[&str]) {
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = sparse_eit(&args);
    assert!(o.status.success(), "{sub} failed: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn full_pipeline_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, CONFIG).unwrap();
    let out = dir.path().join("out");

    run_ok("generate-data", &cfg, &out, &[]);
    run_ok("build-surrogate", &cfg, &out, &[]);
    let first = std::fs::read(out.join("surrogate.txt")).unwrap();
    run_ok("build-surrogate", &cfg, &out, &[]);
    assert_eq!(std::fs::read(out.join("surrogate.txt")).unwrap(), first, "surrogate build is deterministic");

    run_ok("run-mcmc", &cfg, &out, &[]);
    run_ok("run-mcmc", &cfg, &out, &["--plain"]);
    run_ok("benchmark", &cfg, &out, &[]);
    run_ok("compare-index-sets", &cfg, &out, &[]);

    for f in [
        "observation.txt",
        "truth_sigma.txt",
        "surrogate_report.txt",
        "surrogate_summary.txt",
        "surrogate_posterior_mean.txt",
        "surrogate_posterior_mean_display.txt",
        "surrogate_misfit_trace.txt",
        "plain_summary.txt",
        "plain_posterior_mean.txt",
        "benchmark.txt",
        "compare_index_sets.txt",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let summary = std::fs::read_to_string(out.join("surrogate_summary.txt")).unwrap();
    assert!(summary.contains("samples 200") && summary.contains("burnin 40"));
}

#[test]
fn errors_exit_nonzero_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "geometry.K = 4\nmesh.lvl = 2\n").unwrap();
    let o = sparse_eit(&["generate-data", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("unknown key"), "{err}");

    std::fs::write(&cfg, "geometry.K = 4\nmesh.level = 2\n").unwrap();
    let o = sparse_eit(&["run-mcmc", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    assert!(!sparse_eit(&["generate-data"]).status.success());
}
