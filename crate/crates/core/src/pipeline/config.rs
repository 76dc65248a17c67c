//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every key is optional and has a
//! default; an unknown or repeated key is an error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::forward::{standard_patterns, ContactAdmittance, ForwardMap, ForwardSolver};
use crate::interp::{AdaptOptions, ScoreNorm};
use crate::mcmc::{ChainConfig, Proposal};
use crate::mesh;
use crate::prior::{check_cube, ConductivityModel, TrigPrior, WaveletPrior};

const KEYS: &[&str] = &[
    "model.kind",
    "model.gamma",
    "model.levels",
    "model.sigma_bar",
    "model.c",
    "model.freq",
    "model.eta",
    "model.tau",
    "model.a",
    "model.kappa",
    "model.scale",
    "geometry.K",
    "mesh.level",
    "mesh.data_level",
    "admittance.peak",
    "interp.N",
    "interp.score",
    "interp.h_norm",
    "chain.proposal",
    "chain.beta",
    "chain.M",
    "chain.burnin",
    "chain.seed",
    "chain.thin",
    "truth",
    "truth.file",
    "noise.factor",
    "noise.seed",
    "render.resolution",
    "render.bilinear",
    "test.samples",
    "test.seed",
    "compare.iso_w",
    "bench.N",
    "bench.samples",
    "bench.plain_samples",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ConductivityModel,
    pub electrodes: usize,
    /// Mesh level used for reconstruction (surrogate and plain chains).
    pub mesh_level: u32,
    /// Mesh level used to synthesize data; equal to `mesh_level` by default.
    pub data_level: u32,
    pub admittance: ContactAdmittance,
    pub interp: AdaptOptions,
    pub chain: ChainConfig,
    pub truth: Vec<f64>,
    /// Noise standard deviation as a fraction of the clean voltage range.
    pub noise_factor: f64,
    pub noise_seed: u64,
    pub resolution: usize,
    /// Display upsampling factor for the extra smoothed grid; 1 disables it.
    pub bilinear: usize,
    pub test_samples: usize,
    pub test_seed: u64,
    pub iso_w: u32,
    pub bench_budgets: Vec<usize>,
    pub bench_samples: usize,
    pub bench_plain_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let wavelet = WaveletPrior::new(3.0, 1);
        let res = wavelet.native_resolution();
        let mut chain = ChainConfig::new(Proposal::ReflectedRandomWalk, 0.001, 10_000, 1);
        chain.burnin = 0.2;
        RunConfig {
            model: ConductivityModel::Wavelet(wavelet),
            electrodes: 16,
            mesh_level: 5,
            data_level: 5,
            admittance: ContactAdmittance::default(),
            interp: AdaptOptions::new(100),
            chain,
            truth: vec![0.0; 15],
            noise_factor: 1e-4,
            noise_seed: 0,
            resolution: res,
            bilinear: 1,
            test_samples: 200,
            test_seed: 12345,
            iso_w: 4,
            bench_budgets: vec![250, 500, 1000, 2000, 4000],
            bench_samples: 1000,
            bench_plain_samples: 20,
        }
    }
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn get<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take(key) {
            None => Ok(default),
            Some((line, v)) => v.parse().map_err(|_| Error::Config(format!("line {line}: bad value {v:?} for {key}"))),
        }
    }

    fn get_bool(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key) {
            None => Ok(default),
            Some((line, v)) => match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(Error::Config(format!("line {line}: {key} expects true or false, got {v:?}"))),
            },
        }
    }
}

fn parse_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Config(format!("line {line}: bad number {t:?} in {key}"))))
        .collect()
}

/// Dense `v1, v2, …` or sparse `index:value` pairs with 1-based indices.
fn parse_truth(line: usize, text: &str, dim: usize) -> Result<Vec<f64>> {
    if !text.contains(':') {
        let v = parse_list(line, "truth", text)?;
        if v.len() != dim {
            return Err(Error::Config(format!("truth has {} values, the model has {dim} parameters", v.len())));
        }
        return Ok(v);
    }
    let mut y = vec![0.0; dim];
    for pair in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        let bad = || Error::Config(format!("line {line}: bad truth entry {pair:?}"));
        let (i, v) = pair.split_once(':').ok_or_else(bad)?;
        let i: usize = i.trim().parse().map_err(|_| bad())?;
        if i == 0 || i > dim {
            return Err(Error::Config(format!("line {line}: truth index {i} outside 1..={dim}")));
        }
        y[i - 1] = v.trim().parse().map_err(|_| bad())?;
    }
    Ok(y)
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent())
    }

    /// Parses `text`; a relative `truth.file` resolves against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown key {k:?}", n + 1)));
            }
            if map.insert(k.to_string(), (n + 1, v.to_string())).is_some() {
                return Err(Error::Config(format!("line {}: {k} given twice", n + 1)));
            }
        }
        let mut e = Entries { map };
        let d = RunConfig::default();

        let kind = e.get("model.kind", "wavelet".to_string())?;
        let model = match kind.as_str() {
            "wavelet" => {
                let gamma = e.get("model.gamma", 3.0)?;
                let levels: u32 = e.get("model.levels", 1)?;
                if levels > 10 {
                    return Err(Error::Config(format!("model.levels = {levels} is too large")));
                }
                let mut w = WaveletPrior::new(gamma, levels);
                w.sigma_bar = e.get("model.sigma_bar", w.sigma_bar)?;
                w.c = e.get("model.c", w.c)?;
                ConductivityModel::Wavelet(w)
            }
            "log_trig" => {
                let base = TrigPrior::new(0);
                let freq: u32 = e.get("model.freq", 3)?;
                let mut t = TrigPrior::with_constants(
                    e.get("model.eta", base.eta)?,
                    e.get("model.tau", base.tau)?,
                    e.get("model.a", base.a)?,
                    e.get("model.kappa", base.kappa)?,
                    freq,
                );
                t.scale = e.get("model.scale", 1.0)?;
                ConductivityModel::LogTrig(t)
            }
            other => return Err(Error::Config(format!("unknown model.kind {other:?} (wavelet or log_trig)"))),
        };
        let wrong_family: &[&str] = match model {
            ConductivityModel::Wavelet(_) => {
                &["model.freq", "model.eta", "model.tau", "model.a", "model.kappa", "model.scale"]
            }
            ConductivityModel::LogTrig(_) => &["model.gamma", "model.levels", "model.sigma_bar", "model.c"],
        };
        if let Some(k) = wrong_family.iter().find(|k| e.map.contains_key(**k)) {
            return Err(Error::Config(format!("{k} does not apply to model.kind = {kind}")));
        }
        let dim = model.num_params();

        let electrodes = e.get("geometry.K", d.electrodes)?;
        let mesh_level = e.get("mesh.level", d.mesh_level)?;
        let data_level = e.get("mesh.data_level", mesh_level)?;
        let admittance = ContactAdmittance { peak: e.get("admittance.peak", 1.0)? };

        let norm = match e.get("interp.score", "l2".to_string())?.to_ascii_lowercase().as_str() {
            "l2" => ScoreNorm::L2,
            "max" => ScoreNorm::Max,
            other => return Err(Error::Config(format!("unknown interp.score {other:?} (l2 or max)"))),
        };
        let interp = AdaptOptions {
            budget: e.get("interp.N", d.interp.budget)?,
            norm,
            use_h_norm: e.get_bool("interp.h_norm", true)?,
        };

        let chain = ChainConfig {
            proposal: e.get("chain.proposal", d.chain.proposal.to_string())?.parse()?,
            beta: e.get("chain.beta", d.chain.beta)?,
            samples: e.get("chain.M", d.chain.samples)?,
            burnin: e.get("chain.burnin", d.chain.burnin)?,
            seed: e.get("chain.seed", d.chain.seed)?,
            thin: e.get("chain.thin", d.chain.thin)?,
        };

        let truth = match (e.take("truth"), e.take("truth.file")) {
            (Some(_), Some(_)) => return Err(Error::Config("give either truth or truth.file, not both".into())),
            (Some((line, v)), None) => parse_truth(line, &v, dim)?,
            (None, Some((_, file))) => {
                let path = match base {
                    Some(b) if Path::new(&file).is_relative() => b.join(&file),
                    _ => PathBuf::from(&file),
                };
                let text = std::fs::read_to_string(&path).map_err(|err| Error::io(&path, err))?;
                parse_truth(0, &text.lines().filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join(" "), dim)?
            }
            (None, None) => vec![0.0; dim],
        };

        let default_res = match &model {
            ConductivityModel::Wavelet(w) => w.native_resolution(),
            ConductivityModel::LogTrig(_) => 32,
        };
        let bench_budgets = match e.take("bench.N") {
            None => d.bench_budgets.clone(),
            Some((line, v)) => parse_list(line, "bench.N", &v)?
                .into_iter()
                .map(|x| {
                    if x >= 1.0 && x.fract() == 0.0 {
                        Ok(x as usize)
                    } else {
                        Err(Error::Config(format!("line {line}: bench.N entries must be positive integers")))
                    }
                })
                .collect::<Result<_>>()?,
        };

        let cfg = RunConfig {
            model,
            electrodes,
            mesh_level,
            data_level,
            admittance,
            interp,
            chain,
            truth,
            noise_factor: e.get("noise.factor", d.noise_factor)?,
            noise_seed: e.get("noise.seed", d.noise_seed)?,
            resolution: e.get("render.resolution", default_res)?,
            bilinear: e.get("render.bilinear", 1)?,
            test_samples: e.get("test.samples", d.test_samples)?,
            test_seed: e.get("test.seed", d.test_seed)?,
            iso_w: e.get("compare.iso_w", d.iso_w)?,
            bench_budgets,
            bench_samples: e.get("bench.samples", d.bench_samples)?,
            bench_plain_samples: e.get("bench.plain_samples", d.bench_plain_samples)?,
        };
        debug_assert!(e.map.is_empty(), "every known key is consumed");
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cross-field checks, including electrode alignment on both meshes.
    pub fn validate(&self) -> Result<()> {
        let dim = self.model.num_params();
        if self.truth.len() != dim {
            return Err(Error::Config(format!("truth has {} values, the model has {dim}", self.truth.len())));
        }
        check_cube(&self.truth).map_err(|e| Error::Config(format!("truth: {e}")))?;
        if !(self.noise_factor >= 0.0 && self.noise_factor.is_finite()) {
            return Err(Error::Config("noise.factor must be a nonnegative number".into()));
        }
        if !(self.admittance.peak > 0.0 && self.admittance.peak.is_finite()) {
            return Err(Error::Config("admittance.peak must be positive".into()));
        }
        if self.interp.budget == 0 {
            return Err(Error::Config("interp.N must be at least 1".into()));
        }
        if self.resolution == 0 || self.bilinear == 0 {
            return Err(Error::Config("render.resolution and render.bilinear must be at least 1".into()));
        }
        self.chain.validate()?;
        let layout = mesh::electrode_layout(self.electrodes).map_err(|e| Error::Config(e.to_string()))?;
        for level in [self.mesh_level, self.data_level] {
            mesh::check_alignment(&layout, level).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        self.model.num_params()
    }

    /// Output length `K (K - 1)`.
    pub fn output_len(&self) -> usize {
        self.electrodes * (self.electrodes - 1)
    }

    /// Forward map on a mesh of the given level.
    pub fn forward_map(&self, level: u32) -> Result<ForwardMap> {
        let layout = mesh::electrode_layout(self.electrodes)?;
        let m = mesh::classify_boundary_edges(mesh::build_unit_square_mesh(level)?, &layout)?;
        let solver = ForwardSolver::with_parts(m, layout, self.admittance, standard_patterns(self.electrodes))?;
        Ok(ForwardMap::new(solver, self.model.clone()))
    }
}
