//! Conductivity parametrizations over `y ∈ [-1,1]^J`.
//!
//! Two models are provided:
//!
//! * an affine Haar-wavelet expansion `σ̄ + Σ y_j ψ_j` truncated after full
//!   levels `0..=L` (`J = 4^(L+1) - 1`);
//! * a log-affine cosine expansion `exp(Σ y_j ψ_j)` truncated to the square
//!   frequency block `j1, j2 <= F` (`J = (F+1)²`).
//!
//! Wavelet parameters are numbered `j = 4^l + 3(2^l k1 + k2) + i - 1`; cosine
//! parameters are ordered by the Cantor index `(j1+j2)(j1+j2+1)/2 + j2 + 1`.
//! Haar supports are half-open so dyadic cells partition the square, except
//! that the closing edges `x = 1` belong to the last cell.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct WaveletPrior {
    pub sigma_bar: f64,
    pub c: f64,
    pub gamma: f64,
    pub max_level: u32,
}

impl WaveletPrior {
    /// `σ̄ = 1.1` and `c = 0.3(1 - 2^-γ)`, which keeps σ inside `[0.2, 2.0]`.
    pub fn new(gamma: f64, max_level: u32) -> Self {
        Self { sigma_bar: 1.1, c: 0.3 * (1.0 - 2f64.powf(-gamma)), gamma, max_level }
    }

    pub fn num_params(&self) -> usize {
        (1usize << (2 * (self.max_level + 1))) - 1
    }

    pub fn level_scale(&self, l: u32) -> f64 {
        self.c * 2f64.powf(-self.gamma * l as f64)
    }

    /// Pixels per side at which the truncated field is exactly piecewise constant.
    pub fn native_resolution(&self) -> usize {
        1 << (self.max_level + 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPrior {
    pub eta: f64,
    pub tau: f64,
    pub a: f64,
    pub kappa: f64,
    pub max_freq: u32,
    /// Global multiplier on every coefficient.
    pub scale: f64,
    modes: Vec<(u32, u32)>,
}

impl TrigPrior {
    /// `η = 0.1`, `τ = 0.3`, `a = 10^-1.5`, `κ = 5`.
    ///
    /// With these constants the low-frequency coefficients are of order 10⁴,
    /// so `exp(u)` overflows for generic `y`; lower `eta` or `scale` for
    /// usable runs.
    pub fn new(max_freq: u32) -> Self {
        Self::with_constants(0.1, 0.3, 10f64.powf(-1.5), 5.0, max_freq)
    }

    pub fn with_constants(eta: f64, tau: f64, a: f64, kappa: f64, max_freq: u32) -> Self {
        let mut modes: Vec<(u32, u32)> =
            (0..=max_freq).flat_map(|j1| (0..=max_freq).map(move |j2| (j1, j2))).collect();
        modes.sort_by_key(|&(j1, j2)| cantor(j1 as u64, j2 as u64));
        Self { eta, tau, a, kappa, max_freq, scale: 1.0, modes }
    }

    pub fn num_params(&self) -> usize {
        self.modes.len()
    }

    /// Frequency pair of parameter position `p` (0-based).
    pub fn mode(&self, p: usize) -> (u32, u32) {
        self.modes[p]
    }

    pub fn amplitude(&self, j1: u32, j2: u32) -> f64 {
        let r2 = (j1 * j1 + j2 * j2) as f64;
        self.scale * self.eta / (self.tau * self.tau + self.a * self.a * PI * PI * r2).powf(self.kappa)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConductivityModel {
    Wavelet(WaveletPrior),
    LogTrig(TrigPrior),
}

fn cantor(j1: u64, j2: u64) -> u64 {
    (j1 + j2) * (j1 + j2 + 1) / 2 + j2 + 1
}

/// Parameter number of the wavelet `ψ^i_{l,k}`.
pub fn wavelet_index(l: u32, k: (usize, usize), i: u8) -> Result<usize> {
    let n = 1usize << l;
    if k.0 >= n || k.1 >= n || !(1..=3).contains(&i) || l > 30 {
        return Err(Error::InvalidArgument(format!("no wavelet (l={l}, k={k:?}, i={i})")));
    }
    Ok((1usize << (2 * l)) + 3 * (n * k.0 + k.1) + i as usize - 1)
}

/// Inverse of [`wavelet_index`].
pub fn wavelet_triple(j: usize) -> Result<(u32, (usize, usize), u8)> {
    if j == 0 {
        return Err(Error::InvalidArgument("wavelet parameters start at 1".into()));
    }
    let mut l = 0u32;
    while (1usize << (2 * (l + 1))) <= j {
        l += 1;
    }
    let n = 1usize << l;
    let r = j - (1usize << (2 * l));
    let cell = r / 3;
    Ok((l, (cell / n, cell % n), (r % 3 + 1) as u8))
}

/// Cantor pairing of a cosine frequency pair.
pub fn trig_index(j1: i64, j2: i64) -> Result<u64> {
    if j1 < 0 || j2 < 0 {
        return Err(Error::InvalidArgument(format!("negative frequency ({j1}, {j2})")));
    }
    Ok(cantor(j1 as u64, j2 as u64))
}

/// Inverse of [`trig_index`].
pub fn trig_pair(j: u64) -> Result<(u64, u64)> {
    if j == 0 {
        return Err(Error::InvalidArgument("cosine parameters start at 1".into()));
    }
    let z = j - 1;
    let mut w = (((8 * z + 1) as f64).sqrt() as u64).saturating_sub(1) / 2;
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    let j2 = z - w * (w + 1) / 2;
    Ok((w - j2, j2))
}

#[inline]
fn haar_cell(x: f64, n: usize) -> (usize, f64) {
    let t = x * n as f64;
    let k = (t.floor().max(0.0) as usize).min(n - 1);
    (k, t - k as f64)
}

#[inline]
fn haar_sign(t: f64) -> f64 {
    if t < 0.5 {
        1.0
    } else {
        -1.0
    }
}

/// Unscaled mother wavelet `ψ^i` at local cell coordinates in `[0,1]²`.
/// `ψ¹ = φ⊗ψ`, `ψ² = ψ⊗φ`, `ψ³ = ψ⊗ψ`.
pub fn haar_mother(i: u8, t: [f64; 2]) -> f64 {
    match i {
        1 => haar_sign(t[1]),
        2 => haar_sign(t[0]),
        3 => haar_sign(t[0]) * haar_sign(t[1]),
        _ => 0.0,
    }
}

/// A single expansion function `ψ_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficient {
    Wavelet { level: u32, cell: (usize, usize), mother: u8, scale: f64 },
    Cosine { freq: (u32, u32), amplitude: f64 },
}

impl Coefficient {
    pub fn sup_norm(&self) -> f64 {
        match *self {
            Coefficient::Wavelet { scale, .. } => scale,
            Coefficient::Cosine { amplitude, .. } => amplitude.abs(),
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match *self {
            Coefficient::Wavelet { level, cell, mother, scale } => {
                let n = 1usize << level;
                let (k1, t1) = haar_cell(x[0], n);
                let (k2, t2) = haar_cell(x[1], n);
                if (k1, k2) == cell {
                    scale * haar_mother(mother, [t1, t2])
                } else {
                    0.0
                }
            }
            Coefficient::Cosine { freq, amplitude } => {
                amplitude * (PI * freq.0 as f64 * x[0]).cos() * (PI * freq.1 as f64 * x[1]).cos()
            }
        }
    }
}

impl ConductivityModel {
    pub fn num_params(&self) -> usize {
        match self {
            ConductivityModel::Wavelet(w) => w.num_params(),
            ConductivityModel::LogTrig(t) => t.num_params(),
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, ConductivityModel::Wavelet(_))
    }

    /// `ψ_j` for `1 <= j <= J`.
    pub fn coefficient(&self, j: usize) -> Result<Coefficient> {
        if j == 0 || j > self.num_params() {
            return Err(Error::InvalidArgument(format!(
                "parameter {j} outside 1..={}",
                self.num_params()
            )));
        }
        Ok(match self {
            ConductivityModel::Wavelet(w) => {
                let (level, cell, mother) = wavelet_triple(j)?;
                Coefficient::Wavelet { level, cell, mother, scale: w.level_scale(level) }
            }
            ConductivityModel::LogTrig(t) => {
                let (j1, j2) = t.mode(j - 1);
                Coefficient::Cosine { freq: (j1, j2), amplitude: t.amplitude(j1, j2) }
            }
        })
    }

    fn check(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.num_params() {
            return Err(Error::Dimension { expected: self.num_params(), got: y.len() });
        }
        check_cube(y)
    }

    /// Truncated conductivity `σ^J(x, y)`.
    pub fn sigma_eval(&self, y: &[f64], x: [f64; 2]) -> Result<f64> {
        self.check(y)?;
        let mut row = Vec::new();
        self.basis_row(x, &mut row);
        let u: f64 = self.mean() + row.iter().map(|&(j, v)| v * y[j]).sum::<f64>();
        Ok(self.link(u))
    }

    fn mean(&self) -> f64 {
        match self {
            ConductivityModel::Wavelet(w) => w.sigma_bar,
            ConductivityModel::LogTrig(_) => 0.0,
        }
    }

    fn link(&self, u: f64) -> f64 {
        match self {
            ConductivityModel::Wavelet(_) => u,
            ConductivityModel::LogTrig(_) => u.exp(),
        }
    }

    /// Nonzero `(parameter position, ψ_j(x))` pairs at `x`.
    fn basis_row(&self, x: [f64; 2], row: &mut Vec<(usize, f64)>) {
        row.clear();
        match self {
            ConductivityModel::Wavelet(w) => {
                for l in 0..=w.max_level {
                    let n = 1usize << l;
                    let (k1, t1) = haar_cell(x[0], n);
                    let (k2, t2) = haar_cell(x[1], n);
                    let s = w.level_scale(l);
                    let base = (1usize << (2 * l)) + 3 * (n * k1 + k2) - 1;
                    for i in 1..=3u8 {
                        row.push((base + i as usize - 1, s * haar_mother(i, [t1, t2])));
                    }
                }
            }
            ConductivityModel::LogTrig(t) => {
                for (p, &(j1, j2)) in t.modes.iter().enumerate() {
                    let v = t.amplitude(j1, j2)
                        * (PI * j1 as f64 * x[0]).cos()
                        * (PI * j2 as f64 * x[1]).cos();
                    row.push((p, v));
                }
            }
        }
    }

    /// Precomputes the expansion at a fixed set of points.
    pub fn basis(&self, points: &[[f64; 2]]) -> FieldBasis {
        let mut offsets = Vec::with_capacity(points.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut row = Vec::new();
        offsets.push(0);
        for &x in points {
            self.basis_row(x, &mut row);
            for &(j, v) in &row {
                cols.push(j as u32);
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        FieldBasis {
            exponential: !self.is_affine(),
            mean: self.mean(),
            num_params: self.num_params(),
            offsets,
            cols,
            vals,
        }
    }

    /// σ^J at pixel centers of a `resolution × resolution` grid.
    pub fn render_pixels(&self, y: &[f64], resolution: usize) -> Result<PixelGrid> {
        self.check(y)?;
        Ok(PixelRenderer::new(self, resolution)?.render(y))
    }
}

pub fn check_cube(y: &[f64]) -> Result<()> {
    match y.iter().position(|v| !(-1.0..=1.0).contains(v)) {
        Some(index) => Err(Error::OutOfCube { index, value: y[index] }),
        None => Ok(()),
    }
}

/// Sparse rows of `ψ_j(x_p)` for fixed points `x_p`.
#[derive(Clone, Debug)]
pub struct FieldBasis {
    exponential: bool,
    mean: f64,
    num_params: usize,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl FieldBasis {
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    /// Conductivity at every point. `y` is not range-checked here.
    pub fn eval_into(&self, y: &[f64], out: &mut [f64]) {
        for (p, o) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.offsets[p], self.offsets[p + 1]);
            let mut u = self.mean;
            for (c, v) in self.cols[lo..hi].iter().zip(&self.vals[lo..hi]) {
                u += v * y[*c as usize];
            }
            *o = if self.exponential { u.exp() } else { u };
        }
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(y, &mut out);
        out
    }
}

/// `J` independent `Uniform[-1,1]` draws.
pub fn sample_prior<R: Rng + ?Sized>(rng: &mut R, j: usize) -> Vec<f64> {
    (0..j).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Row-major conductivity image; row 0 is the bottom of the square.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelGrid {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl PixelGrid {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "pixel grid {rows}x{cols} with {} values",
                values.len()
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn max_abs_diff(&self, other: &PixelGrid) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Display-only upsampling: bilinear interpolation between pixel centers
    /// onto a grid `factor` times finer (edges clamp to the nearest center).
    pub fn bilinear(&self, factor: usize) -> PixelGrid {
        let factor = factor.max(1);
        let (rows, cols) = (self.rows * factor, self.cols * factor);
        let coord = |i: usize, n_out: usize, n_in: usize| {
            let t = ((i as f64 + 0.5) / n_out as f64 * n_in as f64 - 0.5).clamp(0.0, (n_in - 1) as f64);
            let i0 = (t.floor() as usize).min(n_in.saturating_sub(2));
            (i0, (t - i0 as f64).clamp(0.0, 1.0))
        };
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (r0, fr) = coord(r, rows, self.rows);
            let r1 = (r0 + 1).min(self.rows - 1);
            for c in 0..cols {
                let (c0, fc) = coord(c, cols, self.cols);
                let c1 = (c0 + 1).min(self.cols - 1);
                let v = (1.0 - fr) * ((1.0 - fc) * self.get(r0, c0) + fc * self.get(r0, c1))
                    + fr * ((1.0 - fc) * self.get(r1, c0) + fc * self.get(r1, c1));
                values.push(v);
            }
        }
        PixelGrid { rows, cols, values }
    }

    /// `rows cols` header, then one text line per row.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.cols);
        for r in 0..self.rows {
            let row = &self.values[r * self.cols..(r + 1) * self.cols];
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty pixel grid"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(1, format!("bad dimension {t:?}"))))
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(Error::parse(1, "expected `rows cols`"));
        };
        let mut values = Vec::with_capacity(rows * cols);
        for (n, line) in lines {
            let before = values.len();
            for t in line.split_whitespace() {
                values.push(t.parse::<f64>().map_err(|_| Error::parse(n + 1, format!("bad value {t:?}")))?);
            }
            if values.len() - before != cols {
                return Err(Error::parse(n + 1, format!("expected {cols} values")));
            }
        }
        PixelGrid::new(rows, cols, values).map_err(|e| Error::parse(0, e.to_string()))
    }
}

/// Renders σ^J at pixel centers through a precomputed basis.
#[derive(Clone, Debug)]
pub struct PixelRenderer {
    resolution: usize,
    basis: FieldBasis,
}

impl PixelRenderer {
    pub fn new(model: &ConductivityModel, resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidArgument("resolution must be at least 1".into()));
        }
        let h = 1.0 / resolution as f64;
        let centers: Vec<[f64; 2]> = (0..resolution)
            .flat_map(|r| (0..resolution).map(move |c| [(c as f64 + 0.5) * h, (r as f64 + 0.5) * h]))
            .collect();
        Ok(Self { resolution, basis: model.basis(&centers) })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn render_into(&self, y: &[f64], out: &mut [f64]) {
        self.basis.eval_into(y, out)
    }

    pub fn render(&self, y: &[f64]) -> PixelGrid {
        PixelGrid { rows: self.resolution, cols: self.resolution, values: self.basis.eval(y) }
    }
}
