//! Stages of a reconstruction run, driven by a [`RunConfig`].
//!
//! The functions returning in-memory results are the library interface; the
//! `*_to_dir` variants additionally write the text artifacts the CLI emits.

mod config;
mod files;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub use config::RunConfig;
pub use files::ObservationFile;

use crate::error::{Error, Result};
use crate::forward::ForwardMap;
use crate::interp::{adapt, build_from_set, iso_set, AdaptReport, Surrogate};
use crate::mcmc::{run_chain, ChainResult};
use crate::prior::{sample_prior, PixelRenderer};

/// Solves at the truth on the data mesh and adds `N(0, sd²)` noise with
/// `sd = noise_factor · (V_max - V_min)`.
pub fn generate_data(cfg: &RunConfig) -> Result<ObservationFile> {
    let map = cfg.forward_map(cfg.data_level)?;
    let clean = map.eval(&cfg.truth)?;
    let (lo, hi) = clean.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let sd = cfg.noise_factor * (hi - lo);
    let data = if sd > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise_seed);
        let noise = Normal::new(0.0, sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        clean.iter().map(|v| v + noise.sample(&mut rng)).collect()
    } else {
        clean
    };
    Ok(ObservationFile {
        k: cfg.electrodes,
        patterns: cfg.electrodes - 1,
        mesh_level: cfg.data_level,
        noise_factor: cfg.noise_factor,
        noise_seed: cfg.noise_seed,
        sd,
        truth: cfg.truth.clone(),
        data,
    })
}

/// Cost of one offline build.
#[derive(Clone, Debug)]
pub struct BuildReport {
    pub admitted: usize,
    pub forward_solves: usize,
    pub seconds: f64,
    pub scores: Vec<f64>,
}

impl BuildReport {
    fn from_adapt(r: &AdaptReport, seconds: f64) -> Self {
        Self { admitted: r.admitted(), forward_solves: r.evaluations, seconds, scores: r.scores.clone() }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "admitted {}\nforward_solves {}\nseconds {}\nscores\n",
            self.admitted, self.forward_solves, self.seconds
        );
        for s in &self.scores {
            let _ = writeln!(out, "{s}");
        }
        out
    }
}

/// Adaptive interpolation of the forward map on the reconstruction mesh.
pub fn build_surrogate(cfg: &RunConfig) -> Result<(Surrogate, BuildReport)> {
    let map = cfg.forward_map(cfg.mesh_level)?;
    let start = Instant::now();
    let r = adapt(|y: &[f64]| map.eval(y), cfg.num_params(), &cfg.interp)?;
    let report = BuildReport::from_adapt(&r, start.elapsed().as_secs_f64());
    Ok((r.surrogate, report))
}

/// Likelihood evaluator for the online stage.
pub enum Evaluator<'a> {
    Surrogate(&'a Surrogate),
    /// Finite element solve per sample.
    Plain,
}

/// Runs the configured chain against the observation.
pub fn run_inversion(cfg: &RunConfig, evaluator: Evaluator<'_>, obs: &ObservationFile) -> Result<ChainResult> {
    let dim = cfg.num_params();
    if obs.k != cfg.electrodes || obs.truth.len() != dim {
        return Err(Error::Incompatible(format!(
            "observation has K = {} and J = {}, configuration has K = {} and J = {dim}",
            obs.k,
            obs.truth.len(),
            cfg.electrodes
        )));
    }
    let observation = obs.observation()?;
    let renderer = PixelRenderer::new(&cfg.model, cfg.resolution)?;
    match evaluator {
        Evaluator::Surrogate(s) => {
            if s.dim() != dim || s.output_dim() != observation.len() {
                return Err(Error::Incompatible(format!(
                    "surrogate maps R^{} to R^{}, expected R^{dim} to R^{}",
                    s.dim(),
                    s.output_dim(),
                    observation.len()
                )));
            }
            run_chain(|y: &[f64]| Ok(s.evaluate(y)), &observation, dim, &cfg.chain, Some(&renderer))
        }
        Evaluator::Plain => {
            let map = cfg.forward_map(cfg.mesh_level)?;
            run_chain(|y: &[f64]| map.eval(y), &observation, dim, &cfg.chain, Some(&renderer))
        }
    }
}

/// Shared random test parameters with their exact forward values.
pub struct TestSet {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

impl TestSet {
    pub fn draw(map: &ForwardMap, n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<Vec<f64>> = (0..n).map(|_| sample_prior(&mut rng, map.num_params())).collect();
        let values = points.iter().map(|y| map.eval(y)).collect::<Result<_>>()?;
        Ok(Self { points, values })
    }

    /// `max_i ‖s(y_i) - G(y_i)‖_∞`.
    pub fn sup_error(&self, s: &Surrogate) -> f64 {
        let mut buf = vec![0.0; s.output_dim()];
        self.points.iter().zip(&self.values).fold(0.0, |acc, (y, g)| {
            s.evaluate_into(y, &mut buf);
            buf.iter().zip(g).fold(acc, |a, (u, v)| a.max((u - v).abs()))
        })
    }
}

/// Least-squares line `y ≈ slope·x + intercept` and its `R²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit { slope, intercept: my - slope * mx, r_squared })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRow {
    pub budget: usize,
    pub offline_seconds: f64,
    pub forward_solves: usize,
    pub online_seconds_per_sample: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub plain_seconds_per_sample: Option<f64>,
}

impl BenchmarkReport {
    pub fn offline_fit(&self) -> Option<LinearFit> {
        let x: Vec<f64> = self.rows.iter().map(|r| r.budget as f64).collect();
        linear_fit(&x, &self.rows.iter().map(|r| r.offline_seconds).collect::<Vec<_>>())
    }

    pub fn online_fit(&self) -> Option<LinearFit> {
        let x: Vec<f64> = self.rows.iter().map(|r| r.budget as f64).collect();
        linear_fit(&x, &self.rows.iter().map(|r| r.online_seconds_per_sample).collect::<Vec<_>>())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# N offline_seconds forward_solves online_seconds_per_sample\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{} {} {} {}",
                r.budget, r.offline_seconds, r.forward_solves, r.online_seconds_per_sample
            );
        }
        if let Some(p) = self.plain_seconds_per_sample {
            let _ = writeln!(out, "# plain_seconds_per_sample {p}");
        }
        for (name, fit) in [("offline", self.offline_fit()), ("online", self.online_fit())] {
            if let Some(f) = fit {
                let _ = writeln!(out, "# {name}_fit slope {} intercept {} r2 {}", f.slope, f.intercept, f.r_squared);
            }
        }
        out
    }
}

/// Offline cost to reach each budget in `bench.N` and online cost per sample
/// of the corresponding truncated surrogate, plus the plain per-sample cost.
///
/// A single adaptive run to the largest budget is timed: by nestedness its
/// first `N` admissions are exactly the run with budget `N`.
pub fn benchmark(cfg: &RunConfig, obs: &ObservationFile) -> Result<BenchmarkReport> {
    let mut budgets = cfg.bench_budgets.clone();
    budgets.sort_unstable();
    budgets.dedup();
    let Some(&largest) = budgets.last() else {
        return Ok(BenchmarkReport { rows: Vec::new(), plain_seconds_per_sample: None });
    };
    if cfg.bench_samples == 0 {
        return Ok(BenchmarkReport { rows: Vec::new(), plain_seconds_per_sample: None });
    }
    let map = cfg.forward_map(cfg.mesh_level)?;
    let mut opts = cfg.interp;
    opts.budget = largest;
    let full = adapt(|y: &[f64]| map.eval(y), cfg.num_params(), &opts)?;

    let mut chain_cfg = cfg.clone();
    chain_cfg.chain.samples = cfg.bench_samples;
    let mut rows = Vec::new();
    for &n in &budgets {
        let n = n.min(full.admitted());
        let s = full.surrogate.truncated(n);
        let r = run_inversion(&chain_cfg, Evaluator::Surrogate(&s), obs)?;
        rows.push(BenchmarkRow {
            budget: n,
            offline_seconds: full.elapsed[n - 1],
            forward_solves: solves_up_to(&full, n),
            online_seconds_per_sample: r.seconds_per_sample,
        });
    }
    let plain = if cfg.bench_plain_samples > 0 {
        chain_cfg.chain.samples = cfg.bench_plain_samples;
        Some(run_inversion(&chain_cfg, Evaluator::Plain, obs)?.seconds_per_sample)
    } else {
        None
    };
    Ok(BenchmarkReport { rows, plain_seconds_per_sample: plain })
}

/// Forward solves spent by a run with budget `n`: its admitted indices plus
/// the frontier scored along the way.
fn solves_up_to(r: &AdaptReport, n: usize) -> usize {
    let set = r.surrogate.truncated(n);
    n + crate::interp::neighbors(set.index_set()).len()
}

/// Per-coordinate degree statistics of an index set (Table-1 layout).
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeStats {
    pub cardinality: usize,
    pub max: Vec<u32>,
    pub mean: Vec<f64>,
}

impl DegreeStats {
    pub fn of(s: &Surrogate) -> Self {
        let n = s.len() as f64;
        let mut mean = vec![0.0; s.dim()];
        for nu in s.indices() {
            for (m, &d) in mean.iter_mut().zip(nu.degrees()) {
                *m += d as f64 / n;
            }
        }
        Self { cardinality: s.len(), max: s.max_degrees().to_vec(), mean }
    }

    /// Mean of the per-coordinate averages over the 0-based range.
    pub fn mean_over(&self, range: std::ops::Range<usize>) -> f64 {
        let len = range.len() as f64;
        self.mean[range].iter().sum::<f64>() / len
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub adaptive: DegreeStats,
    pub iso: DegreeStats,
    pub iso_w: u32,
    pub adaptive_error: f64,
    pub iso_error: f64,
    pub test_samples: usize,
}

impl ComparisonReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# adaptive |Lambda| = {}", self.adaptive.cardinality);
        let _ = writeln!(out, "# iso({}, {}) |Lambda| = {}", self.adaptive.max.len(), self.iso_w, self.iso.cardinality);
        let _ = writeln!(out, "# coordinate adaptive_max adaptive_mean iso_max iso_mean");
        for j in 0..self.adaptive.max.len() {
            let _ = writeln!(
                out,
                "{} {} {:.4} {} {:.4}",
                j + 1,
                self.adaptive.max[j],
                self.adaptive.mean[j],
                self.iso.max[j],
                self.iso.mean[j]
            );
        }
        let _ = writeln!(out, "# sup_error over {} samples", self.test_samples);
        let _ = writeln!(out, "adaptive_error {}", self.adaptive_error);
        let _ = writeln!(out, "iso_error {}", self.iso_error);
        out
    }
}

/// Adaptive set with budget `interp.N` against the isotropic total-degree set
/// `Iso(J, compare.iso_w)` on shared random test samples.
pub fn compare_index_sets(cfg: &RunConfig) -> Result<ComparisonReport> {
    let map = cfg.forward_map(cfg.mesh_level)?;
    let f = |y: &[f64]| map.eval(y);
    let adaptive = adapt(f, cfg.num_params(), &cfg.interp)?.surrogate;
    let iso = build_from_set(f, iso_set(cfg.num_params(), cfg.iso_w).indices())?;
    let test = TestSet::draw(&map, cfg.test_samples, cfg.test_seed)?;
    Ok(ComparisonReport {
        adaptive: DegreeStats::of(&adaptive),
        iso: DegreeStats::of(&iso),
        iso_w: cfg.iso_w,
        adaptive_error: test.sup_error(&adaptive),
        iso_error: test.sup_error(&iso),
        test_samples: cfg.test_samples,
    })
}

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

/// `observation.txt` and `truth_sigma.txt`.
pub fn generate_data_to_dir(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let obs = generate_data(cfg)?;
    let truth = PixelRenderer::new(&cfg.model, cfg.resolution)?.render(&cfg.truth);
    let paths = [out.join("observation.txt"), out.join("truth_sigma.txt")];
    files::write(&paths[0], &obs.to_text())?;
    files::write(&paths[1], &truth.to_text())?;
    Ok(paths.to_vec())
}

/// `surrogate.txt` and `surrogate_report.txt`.
pub fn build_surrogate_to_dir(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let (s, report) = build_surrogate(cfg)?;
    let paths = [out.join("surrogate.txt"), out.join("surrogate_report.txt")];
    files::write(&paths[0], &s.to_text())?;
    files::write(&paths[1], &report.to_text())?;
    Ok(paths.to_vec())
}

/// Chain summary, posterior-mean grid and misfit trace, prefixed `surrogate_`
/// or `plain_`. The surrogate and observation default to the files the other
/// stages write into `out`.
pub fn run_mcmc_to_dir(
    cfg: &RunConfig,
    out: &Path,
    plain: bool,
    surrogate: Option<&Path>,
    observation: Option<&Path>,
) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let obs_path = observation.map_or_else(|| out.join("observation.txt"), Path::to_path_buf);
    let obs = ObservationFile::read(&obs_path)?;
    let (prefix, result) = if plain {
        ("plain", run_inversion(cfg, Evaluator::Plain, &obs)?)
    } else {
        let path = surrogate.map_or_else(|| out.join("surrogate.txt"), Path::to_path_buf);
        let s = Surrogate::parse(&files::read(&path)?)?;
        ("surrogate", run_inversion(cfg, Evaluator::Surrogate(&s), &obs)?)
    };
    let grid = result.mean_sigma.as_ref().expect("inversion always renders the posterior mean");
    let mut paths = vec![
        out.join(format!("{prefix}_summary.txt")),
        out.join(format!("{prefix}_posterior_mean.txt")),
        out.join(format!("{prefix}_misfit_trace.txt")),
    ];
    files::write(&paths[0], &result.summary().to_text())?;
    files::write(&paths[1], &grid.to_text())?;
    let trace: String = result.misfit_trace.iter().map(|v| format!("{v}\n")).collect();
    files::write(&paths[2], &trace)?;
    if cfg.bilinear > 1 {
        let p = out.join(format!("{prefix}_posterior_mean_display.txt"));
        files::write(&p, &grid.bilinear(cfg.bilinear).to_text())?;
        paths.push(p);
    }
    Ok(paths)
}

/// `benchmark.txt`. Synthesizes the observation when `out` has none.
pub fn benchmark_to_dir(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let obs_path = out.join("observation.txt");
    let obs = if obs_path.exists() { ObservationFile::read(&obs_path)? } else { generate_data(cfg)? };
    let path = out.join("benchmark.txt");
    files::write(&path, &benchmark(cfg, &obs)?.to_text())?;
    Ok(vec![path])
}

/// `compare_index_sets.txt`.
pub fn compare_index_sets_to_dir(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let path = out.join("compare_index_sets.txt");
    files::write(&path, &compare_index_sets(cfg)?.to_text())?;
    Ok(vec![path])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(extra: &str) -> RunConfig {
        RunConfig::parse(&format!("geometry.K = 4\nmesh.level = 2\nchain.M = 10\n{extra}"), None).unwrap()
    }

    #[test]
    fn noise_free_data_is_the_clean_solve() {
        let cfg = small("noise.factor = 0\ntruth = 1:0.5 4:-0.3");
        let obs = generate_data(&cfg).unwrap();
        assert_eq!(obs.sd, 0.0);
        assert_eq!(obs.data, cfg.forward_map(2).unwrap().eval(&cfg.truth).unwrap());
        assert_eq!(obs.data.len(), 12);
    }

    #[test]
    fn noise_scales_with_the_voltage_range() {
        let cfg = small("noise.factor = 1e-4\nnoise.seed = 3");
        let obs = generate_data(&cfg).unwrap();
        let clean = cfg.forward_map(2).unwrap().eval(&cfg.truth).unwrap();
        let range = clean.iter().cloned().fold(f64::MIN, f64::max) - clean.iter().cloned().fold(f64::MAX, f64::min);
        assert!((obs.sd - 1e-4 * range).abs() <= 1e-18);
        assert_ne!(obs.data, clean);
        assert_eq!(generate_data(&cfg).unwrap(), obs);
    }

    #[test]
    fn single_term_build_costs_one_plus_j_solves() {
        let cfg = small("interp.N = 1");
        let (s, report) = build_surrogate(&cfg).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(report.forward_solves, 1 + 15);
        let g1 = cfg.forward_map(2).unwrap().eval(&[1.0; 15]).unwrap();
        assert_eq!(s.evaluate(&[0.3; 15]), g1);
    }

    #[test]
    fn retained_samples_follow_the_floor_rule() {
        let cfg = small("interp.N = 5\nchain.burnin = 0.2");
        let obs = generate_data(&cfg).unwrap();
        let (s, _) = build_surrogate(&cfg).unwrap();
        let r = run_inversion(&cfg, Evaluator::Surrogate(&s), &obs).unwrap();
        assert_eq!(r.retained, 8);
        assert_eq!(r.mean_sigma.unwrap().rows, 4);
    }

    #[test]
    fn incompatible_inputs_are_rejected() {
        let cfg = small("interp.N = 3");
        let (s, _) = build_surrogate(&cfg).unwrap();
        let obs = generate_data(&cfg).unwrap();
        let other = RunConfig::parse("geometry.K = 8\nmesh.level = 3\nchain.M = 5", None).unwrap();
        assert!(matches!(run_inversion(&other, Evaluator::Surrogate(&s), &obs), Err(Error::Incompatible(_))));
        let cfg8 = other.clone();
        let obs8 = generate_data(&cfg8).unwrap();
        assert!(matches!(run_inversion(&cfg8, Evaluator::Surrogate(&s), &obs8), Err(Error::Incompatible(_))));
    }

    #[test]
    fn linear_fit_recovers_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let f = linear_fit(&x, &[3.0, 5.0, 7.0, 9.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn empty_benchmark() {
        let cfg = small("bench.samples = 0");
        let obs = generate_data(&cfg).unwrap();
        let r = benchmark(&cfg, &obs).unwrap();
        assert!(r.rows.is_empty() && r.plain_seconds_per_sample.is_none());
        assert_eq!(r.to_text().lines().count(), 1);
    }

    #[test]
    fn small_benchmark_has_one_row_per_budget() {
        let cfg = small("bench.N = 4, 2, 8\nbench.samples = 20\nbench.plain_samples = 3");
        let obs = generate_data(&cfg).unwrap();
        let r = benchmark(&cfg, &obs).unwrap();
        let budgets: Vec<usize> = r.rows.iter().map(|row| row.budget).collect();
        assert_eq!(budgets, vec![2, 4, 8]);
        assert!(r.rows.windows(2).all(|w| w[0].offline_seconds <= w[1].offline_seconds));
        assert!(r.rows.windows(2).all(|w| w[0].forward_solves <= w[1].forward_solves));
        assert!(r.plain_seconds_per_sample.unwrap() > 0.0);
    }

    #[test]
    fn iso_degree_zero_is_constant() {
        let cfg = small("interp.N = 6\ncompare.iso_w = 0\ntest.samples = 5");
        let r = compare_index_sets(&cfg).unwrap();
        assert_eq!(r.iso.cardinality, 1);
        assert!(r.iso.max.iter().all(|&d| d == 0));
        assert_eq!(r.adaptive.cardinality, 6);
        assert!(r.to_text().contains("iso_error"));
    }
}
