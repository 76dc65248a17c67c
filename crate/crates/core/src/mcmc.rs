//! Metropolis-Hastings over `[-1,1]^J` with the uniform prior.
//!
//! Both proposals are reversible with respect to the prior, so the acceptance
//! probability only involves the misfit difference.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::prior::{sample_prior, PixelGrid, PixelRenderer};

/// Noisy data `δ` with independent Gaussian noise of standard deviation `sd_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub data: Vec<f64>,
    pub sd: Vec<f64>,
    pub k: usize,
    pub patterns: usize,
}

impl Observation {
    pub fn new(data: Vec<f64>, sd: Vec<f64>, k: usize, patterns: usize) -> Result<Self> {
        if sd.len() != data.len() {
            return Err(Error::Dimension { expected: data.len(), got: sd.len() });
        }
        if k * patterns != data.len() {
            return Err(Error::InvalidArgument(format!(
                "{} data values for {k} electrodes and {patterns} patterns",
                data.len()
            )));
        }
        if let Some(s) = sd.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument(format!("noise level must be positive, got {s}")));
        }
        if data.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidArgument("observation contains non-finite values".into()));
        }
        Ok(Self { data, sd, k, patterns })
    }

    /// Same `sd` for every entry.
    pub fn iid(data: Vec<f64>, sd: f64, k: usize, patterns: usize) -> Result<Self> {
        let n = data.len();
        Self::new(data, vec![sd; n], k, patterns)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// `½ ‖(δ - g) / sd‖²`.
pub fn misfit(g: &[f64], obs: &Observation) -> Result<f64> {
    if g.len() != obs.len() {
        return Err(Error::Dimension { expected: obs.len(), got: g.len() });
    }
    let sum: f64 = g
        .iter()
        .zip(&obs.data)
        .zip(&obs.sd)
        .map(|((g, d), s)| {
            let r = (d - g) / s;
            r * r
        })
        .sum();
    Ok(0.5 * sum)
}

/// Folds `t ∈ [-2, 2]` back into `[-1, 1]`.
pub fn reflect(t: f64) -> Result<f64> {
    if !(-2.0..=2.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("cannot reflect {t}: outside [-2, 2]")));
    }
    Ok(if t < -1.0 {
        -2.0 - t
    } else if t > 1.0 {
        2.0 - t
    } else {
        t
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Proposal {
    /// Fresh prior draw, independent of the current state.
    Independence,
    /// `s_j = reflect(y_j + β ξ_j)` with `ξ_j ~ Uniform[-1,1]`.
    ReflectedRandomWalk,
}

impl std::str::FromStr for Proposal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "is" | "independence" => Ok(Proposal::Independence),
            "rrwm" | "random-walk" => Ok(Proposal::ReflectedRandomWalk),
            _ => Err(Error::Config(format!("unknown proposal {s:?} (expected IS or RRWM)"))),
        }
    }
}

impl std::fmt::Display for Proposal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Proposal::Independence => "IS",
            Proposal::ReflectedRandomWalk => "RRWM",
        })
    }
}

/// Writes a candidate for state `y` into `out`. Draws exactly `J` uniforms.
pub fn propose<R: Rng + ?Sized>(y: &[f64], proposal: Proposal, beta: f64, rng: &mut R, out: &mut [f64]) {
    debug_assert_eq!(y.len(), out.len());
    match proposal {
        Proposal::Independence => {
            for o in out.iter_mut() {
                *o = rng.random_range(-1.0..=1.0);
            }
        }
        Proposal::ReflectedRandomWalk => {
            for (o, &yj) in out.iter_mut().zip(y) {
                let xi: f64 = rng.random_range(-1.0..=1.0);
                *o = reflect(yj + beta * xi).expect("β <= 1 keeps the step within one reflection");
            }
        }
    }
}

/// `min(1, exp(Φ_current - Φ_candidate))`.
pub fn accept_prob(current: f64, candidate: f64) -> Result<f64> {
    if current.is_nan() || candidate.is_nan() {
        return Err(Error::NonFiniteMisfit);
    }
    Ok((current - candidate).exp().min(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub proposal: Proposal,
    pub beta: f64,
    /// Total number of samples, the initial state included.
    pub samples: usize,
    /// Fraction of initial samples dropped from every estimate.
    pub burnin: f64,
    pub seed: u64,
    /// Keep every `thin`-th misfit in the trace.
    pub thin: usize,
}

impl ChainConfig {
    pub fn new(proposal: Proposal, beta: f64, samples: usize, seed: u64) -> Self {
        Self { proposal, beta, samples, burnin: 0.2, seed, thin: 100 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("chain needs at least one sample".into()));
        }
        if !(0.0..1.0).contains(&self.burnin) {
            return Err(Error::Config(format!("burn-in fraction {} not in [0, 1)", self.burnin)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Config(format!("step size {} not in (0, 1]", self.beta)));
        }
        if self.thin == 0 {
            return Err(Error::Config("thinning factor must be at least 1".into()));
        }
        Ok(())
    }

    /// Samples discarded before accumulation.
    pub fn burnin_samples(&self) -> usize {
        (self.burnin * self.samples as f64).floor() as usize
    }

    pub fn retained(&self) -> usize {
        self.samples - self.burnin_samples()
    }
}

/// Running sums of retained states and, optionally, of their pixel renders.
#[derive(Clone, Debug)]
pub struct Accumulator {
    count: usize,
    sum_y: Vec<f64>,
    sum_pixels: Option<(usize, Vec<f64>)>,
    scratch: Vec<f64>,
}

impl Accumulator {
    pub fn new(dim: usize, resolution: Option<usize>) -> Self {
        let sum_pixels = resolution.map(|r| (r, vec![0.0; r * r]));
        let scratch = vec![0.0; resolution.map_or(0, |r| r * r)];
        Self { count: 0, sum_y: vec![0.0; dim], sum_pixels, scratch }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn push(&mut self, y: &[f64], renderer: Option<&PixelRenderer>) {
        self.count += 1;
        for (s, v) in self.sum_y.iter_mut().zip(y) {
            *s += v;
        }
        if let (Some((_, sum)), Some(r)) = (self.sum_pixels.as_mut(), renderer) {
            r.render_into(y, &mut self.scratch);
            for (s, v) in sum.iter_mut().zip(&self.scratch) {
                *s += v;
            }
        }
    }

    pub fn mean_y(&self) -> Result<Vec<f64>> {
        self.require_samples()?;
        Ok(self.sum_y.iter().map(|s| s / self.count as f64).collect())
    }

    fn require_samples(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("no retained samples".into()));
        }
        Ok(())
    }
}

/// Pixelwise average of the retained conductivity renders.
pub fn posterior_mean_sigma(acc: &Accumulator) -> Result<PixelGrid> {
    acc.require_samples()?;
    let (res, sum) = acc
        .sum_pixels
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("pixel averages were not accumulated".into()))?;
    PixelGrid::new(*res, *res, sum.iter().map(|s| s / acc.count as f64).collect())
}

#[derive(Clone, Debug)]
pub struct ChainResult {
    pub config: ChainConfig,
    pub mean_y: Vec<f64>,
    pub mean_sigma: Option<PixelGrid>,
    /// Accepted fraction of the transitions into retained samples.
    pub acceptance_rate: f64,
    pub misfit_trace: Vec<f64>,
    pub final_state: Vec<f64>,
    pub retained: usize,
    pub seconds_per_sample: f64,
}

impl ChainResult {
    pub fn summary(&self) -> ChainSummary {
        ChainSummary {
            proposal: self.config.proposal,
            beta: self.config.beta,
            samples: self.config.samples,
            burnin: self.config.burnin_samples(),
            seed: self.config.seed,
            acceptance_rate: self.acceptance_rate,
            seconds_per_sample: self.seconds_per_sample,
            mean_y: self.mean_y.clone(),
        }
    }
}

/// Runs one chain. The initial state is a prior draw and counts as the first
/// sample. Per step the generator yields the proposal draws, then one uniform
/// for the accept test.
pub fn run_chain<F>(
    mut evaluator: F,
    obs: &Observation,
    dim: usize,
    config: &ChainConfig,
    renderer: Option<&PixelRenderer>,
) -> Result<ChainResult>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut phi_of = |y: &[f64]| -> Result<f64> {
        let g = evaluator(y).map_err(|e| Error::Evaluation { point: y.to_vec(), source: Box::new(e) })?;
        let phi = misfit(&g, obs)?;
        if phi.is_nan() {
            return Err(Error::Evaluation { point: y.to_vec(), source: Box::new(Error::NonFiniteMisfit) });
        }
        Ok(phi)
    };

    let start = Instant::now();
    let burnin = config.burnin_samples();
    let mut acc = Accumulator::new(dim, renderer.map(PixelRenderer::resolution));
    let mut state = sample_prior(&mut rng, dim);
    let mut phi = phi_of(&state)?;
    let mut candidate = vec![0.0; dim];
    let mut trace = vec![phi];
    let (mut accepted, mut transitions) = (0usize, 0usize);
    if burnin == 0 {
        acc.push(&state, renderer);
    }

    for i in 1..config.samples {
        propose(&state, config.proposal, config.beta, &mut rng, &mut candidate);
        let phi_cand = phi_of(&candidate)?;
        let alpha = accept_prob(phi, phi_cand)?;
        let u: f64 = rng.random();
        let accept = u < alpha;
        if accept {
            std::mem::swap(&mut state, &mut candidate);
            phi = phi_cand;
        }
        if i >= burnin {
            transitions += 1;
            accepted += accept as usize;
            acc.push(&state, renderer);
        }
        if i % config.thin == 0 {
            trace.push(phi);
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    Ok(ChainResult {
        config: config.clone(),
        mean_y: acc.mean_y()?,
        mean_sigma: renderer.map(|_| posterior_mean_sigma(&acc)).transpose()?,
        acceptance_rate: if transitions == 0 { 0.0 } else { accepted as f64 / transitions as f64 },
        misfit_trace: trace,
        final_state: state,
        retained: acc.count(),
        seconds_per_sample: elapsed / config.samples as f64,
    })
}

/// Text summary of a finished chain, one `key value…` line per field.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSummary {
    pub proposal: Proposal,
    pub beta: f64,
    pub samples: usize,
    pub burnin: usize,
    pub seed: u64,
    pub acceptance_rate: f64,
    pub seconds_per_sample: f64,
    pub mean_y: Vec<f64>,
}

impl ChainSummary {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "proposal {}", self.proposal);
        let _ = writeln!(out, "beta {}", self.beta);
        let _ = writeln!(out, "samples {}", self.samples);
        let _ = writeln!(out, "burnin {}", self.burnin);
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(out, "acceptance_rate {}", self.acceptance_rate);
        let _ = writeln!(out, "seconds_per_sample {}", self.seconds_per_sample);
        let ys: Vec<String> = self.mean_y.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "mean_y {}", ys.join(" "));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut fields = std::collections::HashMap::new();
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            if fields.insert(key.to_string(), (n + 1, rest.trim().to_string())).is_some() {
                return Err(Error::parse(n + 1, format!("duplicate key {key:?}")));
            }
        }
        let mut take = |key: &str| {
            fields.remove(key).ok_or_else(|| Error::parse(0, format!("missing key {key:?}")))
        };
        fn num<T: std::str::FromStr>((line, v): (usize, String)) -> Result<T> {
            v.parse().map_err(|_| Error::parse(line, format!("bad value {v:?}")))
        }
        let (pl, p) = take("proposal")?;
        let proposal = p.parse().map_err(|_| Error::parse(pl, format!("bad proposal {p:?}")))?;
        let summary = ChainSummary {
            proposal,
            beta: num(take("beta")?)?,
            samples: num(take("samples")?)?,
            burnin: num(take("burnin")?)?,
            seed: num(take("seed")?)?,
            acceptance_rate: num(take("acceptance_rate")?)?,
            seconds_per_sample: num(take("seconds_per_sample")?)?,
            mean_y: {
                let (line, v) = take("mean_y")?;
                v.split_whitespace()
                    .map(|t| t.parse().map_err(|_| Error::parse(line, format!("bad value {t:?}"))))
                    .collect::<Result<_>>()?
            },
        };
        if let Some(key) = fields.keys().next() {
            return Err(Error::parse(0, format!("unknown key {key:?}")));
        }
        Ok(summary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::{ConductivityModel, WaveletPrior};

    fn obs(data: Vec<f64>, sd: f64) -> Observation {
        let n = data.len();
        Observation::iid(data, sd, n, 1).unwrap()
    }

    #[test]
    fn misfit_examples() {
        let o = obs(vec![3.0, 4.0, 0.0, 1.0], 1.0);
        assert_eq!(misfit(&o.data, &o).unwrap(), 0.0);
        assert_eq!(misfit(&[0.0, 0.0, 0.0, 1.0], &o).unwrap(), 12.5);
        let half = obs(o.data.clone(), 0.5);
        assert_eq!(misfit(&[0.0, 0.0, 0.0, 1.0], &half).unwrap(), 50.0);
        assert!(misfit(&[0.0; 3], &o).is_err());
        assert!(Observation::iid(vec![1.0], 0.0, 1, 1).is_err());
        assert!(Observation::iid(vec![f64::NAN], 1.0, 1, 1).is_err());
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(reflect(0.3).unwrap(), 0.3);
        assert_eq!(reflect(-1.5).unwrap(), -0.5);
        assert!((reflect(1.2).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(reflect(2.0).unwrap(), 0.0);
        assert!(reflect(2.5).is_err());
        assert!(reflect(-2.01).is_err());
    }

    #[test]
    fn proposal_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = vec![0.2, -0.7, 0.99];
        let mut s = vec![0.0; 3];
        propose(&y, Proposal::ReflectedRandomWalk, 1e-15, &mut rng, &mut s);
        for (a, b) in s.iter().zip(&y) {
            assert!((a - b).abs() <= 1e-15);
        }

        let (mut r1, mut r2) = (ChaCha8Rng::seed_from_u64(9), ChaCha8Rng::seed_from_u64(9));
        let (mut s1, mut s2) = (vec![0.0; 3], vec![0.0; 3]);
        propose(&y, Proposal::Independence, 0.5, &mut r1, &mut s1);
        propose(&[0.0; 3], Proposal::Independence, 0.5, &mut r2, &mut s2);
        assert_eq!(s1, s2);

        let ones = vec![1.0; 50];
        let mut s = vec![0.0; 50];
        for _ in 0..100 {
            propose(&ones, Proposal::ReflectedRandomWalk, 0.5, &mut rng, &mut s);
            assert!(s.iter().all(|v| (0.5..=1.0).contains(v)));
        }
    }

    #[test]
    fn acceptance_examples() {
        assert_eq!(accept_prob(3.0, 3.0).unwrap(), 1.0);
        assert!((accept_prob(0.0, 2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(accept_prob(100.0, 0.0).unwrap(), 1.0);
        assert_eq!(accept_prob(1e3 + 1.0, 1e3 + 2.0).unwrap(), accept_prob(1.0, 2.0).unwrap());
        assert!(accept_prob(f64::NAN, 0.0).is_err());
        assert_eq!(accept_prob(0.0, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn flat_likelihood_accepts_everything() {
        let o = obs(vec![1.0, 2.0], 1.0);
        for proposal in [Proposal::Independence, Proposal::ReflectedRandomWalk] {
            let cfg = ChainConfig::new(proposal, 0.3, 2000, 5);
            let r = run_chain(|_| Ok(vec![1.0, 2.0]), &o, 4, &cfg, None).unwrap();
            assert_eq!(r.acceptance_rate, 1.0);
            assert_eq!(r.retained, 1600);
            if proposal == Proposal::Independence {
                assert!(r.mean_y.iter().all(|m| m.abs() < 0.1));
            }
        }
    }

    #[test]
    fn single_sample_chain_is_its_initial_state() {
        let model = ConductivityModel::Wavelet(WaveletPrior::new(3.0, 1));
        let renderer = PixelRenderer::new(&model, 4).unwrap();
        let mut cfg = ChainConfig::new(Proposal::ReflectedRandomWalk, 0.1, 1, 77);
        cfg.burnin = 0.0;
        let o = obs(vec![0.0], 1.0);
        let r = run_chain(|_| Ok(vec![0.0]), &o, 15, &cfg, Some(&renderer)).unwrap();
        let init = sample_prior(&mut ChaCha8Rng::seed_from_u64(77), 15);
        assert_eq!(r.mean_y, init);
        assert_eq!(r.mean_sigma.unwrap(), model.render_pixels(&init, 4).unwrap());
        assert_eq!(r.acceptance_rate, 0.0);
    }

    #[test]
    fn burnin_is_floored() {
        let cfg = ChainConfig::new(Proposal::Independence, 1.0, 10, 0);
        assert_eq!(cfg.retained(), 8);
        let o = obs(vec![0.0], 1.0);
        let r = run_chain(|_| Ok(vec![0.0]), &o, 2, &cfg, None).unwrap();
        assert_eq!(r.retained, 8);
        let mut bad = cfg.clone();
        bad.burnin = 1.0;
        assert!(bad.validate().is_err());
        bad = cfg.clone();
        bad.beta = 1.5;
        assert!(bad.validate().is_err());
        bad = cfg;
        bad.samples = 0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn identical_evaluators_give_identical_chains() {
        let o = obs(vec![0.3, -0.2], 0.05);
        let g = |y: &[f64]| Ok(vec![y[0] * y[1] + 0.5 * y[2], y[0] - y[2] * y[2]]);
        let cfg = ChainConfig::new(Proposal::ReflectedRandomWalk, 0.2, 3000, 11);
        let a = run_chain(g, &o, 3, &cfg, None).unwrap();
        let b = run_chain(g, &o, 3, &cfg, None).unwrap();
        assert_eq!(a.mean_y, b.mean_y);
        assert_eq!(a.final_state, b.final_state);
        assert_eq!(a.misfit_trace, b.misfit_trace);
        assert!(a.acceptance_rate > 0.0 && a.acceptance_rate < 1.0);
        assert_eq!(a.misfit_trace.len(), 30);
    }

    #[test]
    fn evaluator_failure_reports_the_state() {
        let o = obs(vec![0.0], 1.0);
        let cfg = ChainConfig::new(Proposal::Independence, 1.0, 5, 3);
        let err = run_chain(|_| Err(Error::Singular("x".into())), &o, 2, &cfg, None).unwrap_err();
        let init = sample_prior(&mut ChaCha8Rng::seed_from_u64(3), 2);
        match err {
            Error::Evaluation { point, .. } => assert_eq!(point, init),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn posterior_mean_of_renders() {
        let model = ConductivityModel::Wavelet(WaveletPrior::new(3.0, 1));
        let r = PixelRenderer::new(&model, 4).unwrap();
        let mut acc = Accumulator::new(15, Some(4));
        assert!(posterior_mean_sigma(&acc).is_err());
        assert!(acc.mean_y().is_err());
        let mut e1 = vec![0.0; 15];
        e1[0] = 1.0;
        acc.push(&e1, Some(&r));
        e1[0] = -1.0;
        acc.push(&e1, Some(&r));
        let m = posterior_mean_sigma(&acc).unwrap();
        assert!(m.values.iter().all(|v| (v - 1.1).abs() < 1e-14));

        // affine model: pixel average equals the render of the mean
        let mut acc = Accumulator::new(15, Some(4));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            acc.push(&sample_prior(&mut rng, 15), Some(&r));
        }
        let at_mean = r.render(&acc.mean_y().unwrap());
        assert!(posterior_mean_sigma(&acc).unwrap().max_abs_diff(&at_mean) < 1e-12);
    }

    #[test]
    fn summary_roundtrip() {
        let s = ChainSummary {
            proposal: Proposal::ReflectedRandomWalk,
            beta: 0.001,
            samples: 100,
            burnin: 20,
            seed: 42,
            acceptance_rate: 0.23,
            seconds_per_sample: 1.5e-5,
            mean_y: vec![0.1, -0.8, 1.0 / 3.0],
        };
        assert_eq!(ChainSummary::parse(&s.to_text()).unwrap(), s);
        assert!(ChainSummary::parse("proposal IS\n").is_err());
        assert!(ChainSummary::parse(&format!("{}extra 1\n", s.to_text())).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn random_walk_stays_in_the_cube(
                y in prop::collection::vec(-1.0f64..=1.0, 1..20),
                beta in 1e-6f64..=1.0,
                seed in any::<u64>(),
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut s = vec![0.0; y.len()];
                propose(&y, Proposal::ReflectedRandomWalk, beta, &mut rng, &mut s);
                prop_assert!(s.iter().all(|v| (-1.0..=1.0).contains(v)));
                for (a, b) in s.iter().zip(&y) {
                    prop_assert!((a - b).abs() <= beta + 1e-15);
                }
            }

            #[test]
            fn acceptance_depends_on_the_difference_only(a in -50.0f64..50.0, b in -50.0f64..50.0, c in -100.0f64..100.0) {
                let p = accept_prob(a, b).unwrap();
                prop_assert!((0.0..=1.0).contains(&p));
                prop_assert!((accept_prob(a + c, b + c).unwrap() - p).abs() < 1e-9);
            }
        }
    }
}

