//! Text artifacts exchanged between stages.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mcmc::Observation;

/// Synthetic measurement with the reference parameters that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationFile {
    pub k: usize,
    pub patterns: usize,
    pub mesh_level: u32,
    pub noise_factor: f64,
    pub noise_seed: u64,
    pub sd: f64,
    pub truth: Vec<f64>,
    pub data: Vec<f64>,
}

impl ObservationFile {
    pub fn observation(&self) -> Result<Observation> {
        Observation::iid(self.data.clone(), self.sd, self.k, self.patterns)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "K {}", self.k);
        let _ = writeln!(out, "patterns {}", self.patterns);
        let _ = writeln!(out, "mesh_level {}", self.mesh_level);
        let _ = writeln!(out, "noise_factor {}", self.noise_factor);
        let _ = writeln!(out, "noise_seed {}", self.noise_seed);
        let _ = writeln!(out, "sd {}", self.sd);
        let truth: Vec<String> = self.truth.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "truth {}", truth.join(" "));
        let _ = writeln!(out, "data {}", self.data.len());
        for v in &self.data {
            let _ = writeln!(out, "{v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut field = |key: &str| -> Result<(usize, String)> {
            let (n, line) = lines.next().ok_or_else(|| Error::parse(0, format!("missing {key}")))?;
            match line.split_once(' ') {
                Some((k, v)) if k == key => Ok((n + 1, v.trim().to_string())),
                None if line.trim() == key => Ok((n + 1, String::new())),
                _ => Err(Error::parse(n + 1, format!("expected `{key} …`"))),
            }
        };
        fn num<T: std::str::FromStr>((n, v): (usize, String)) -> Result<T> {
            v.parse().map_err(|_| Error::parse(n, format!("bad value {v:?}")))
        }
        let k = num(field("K")?)?;
        let patterns = num(field("patterns")?)?;
        let mesh_level = num(field("mesh_level")?)?;
        let noise_factor = num(field("noise_factor")?)?;
        let noise_seed = num(field("noise_seed")?)?;
        let sd = num(field("sd")?)?;
        let (tn, tv) = field("truth")?;
        let truth = tv
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(tn, format!("bad value {t:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        let count: usize = num(field("data")?)?;
        let data = lines
            .map(|(n, l)| l.trim().parse().map_err(|_| Error::parse(n + 1, format!("bad value {l:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        if data.len() != count || count != k * patterns {
            return Err(Error::parse(0, format!("expected {} data values, found {}", k * patterns, data.len())));
        }
        Ok(Self { k, patterns, mesh_level, noise_factor, noise_seed, sd, truth, data })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }
}

pub(crate) fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
