//! P1 finite elements for the smoothened complete electrode model.
//!
//! Unknowns are ordered as nodal potentials `v` (mesh node order), electrode
//! voltages `V_1..V_K`, then one multiplier enforcing `V_1 + … + V_K = 0`.
//! The bilinear form is
//!
//! ```text
//! B((v,V),(w,W)) = ∫ σ ∇v·∇w dx + ∫_∂D ζ (V - v)(W - w) dS
//! ```
//!
//! with a hat-shaped contact admittance `ζ` on each electrode.
//!
//! The system is factored by block elimination: the potential block is SPD
//! and banded (Cholesky), and the `K + 1` bordered Schur complement is solved
//! densely. One factorization serves every current pattern.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{BandCholesky, BandMatrix};
use crate::mesh::{self, ElectrodeLayout, Mesh, Side};
use crate::prior::{check_cube, ConductivityModel, FieldBasis};

static SOLVES: AtomicUsize = AtomicUsize::new(0);

/// Number of conductivity samples factored by this process so far.
pub fn solve_count() -> usize {
    SOLVES.load(Ordering::Relaxed)
}

/// Hat profile on every electrode: zero at the endpoints, `peak` at the midpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactAdmittance {
    pub peak: f64,
}

impl Default for ContactAdmittance {
    fn default() -> Self {
        Self { peak: 1.0 }
    }
}

impl ContactAdmittance {
    pub fn value(&self, layout: &ElectrodeLayout, side: Side, s: f64) -> f64 {
        match layout.electrode_at(side, s) {
            Some(k) => {
                let e = layout.electrode(k);
                let half = 0.5 * e.length();
                self.peak * (1.0 - (s - e.midpoint()).abs() / half).max(0.0)
            }
            None => 0.0,
        }
    }
}

/// `ζ` at arc coordinate `s` of `side` with unit peak.
pub fn admittance_at(layout: &ElectrodeLayout, side: Side, s: f64) -> f64 {
    ContactAdmittance::default().value(layout, side, s)
}

/// `I^(k) = e_1 - e_(k+1)` for `k = 1..K-1`.
pub fn standard_patterns(k: usize) -> Vec<Vec<f64>> {
    (1..k)
        .map(|m| {
            let mut p = vec![0.0; k];
            p[0] = 1.0;
            p[m] = -1.0;
            p
        })
        .collect()
}

/// σ-independent boundary part of the form.
#[derive(Clone, Debug)]
struct BoundaryBlock {
    /// `∫ ζ φ_i φ_j`, both halves stored.
    mass: BTreeMap<(usize, usize), f64>,
    /// Per electrode, `(node, -∫_{E_k} ζ φ_i)`.
    coupling: Vec<Vec<(usize, f64)>>,
    /// `∫_{E_k} ζ`.
    diag: Vec<f64>,
}

const GAUSS: f64 = 0.577_350_269_189_625_8;

#[allow(clippy::needless_range_loop)]
fn boundary_block(mesh: &Mesh, layout: &ElectrodeLayout, zeta: ContactAdmittance) -> Result<BoundaryBlock> {
    if !mesh.is_classified() {
        return Err(Error::Unclassified);
    }
    let k = layout.count();
    let mut mass = BTreeMap::new();
    let mut coupling: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k];
    let mut diag = vec![0.0; k];
    for edge in mesh.boundary_edges() {
        let Some(el) = edge.electrode else { continue };
        let [a, b] = edge.arc;
        let mid = layout.electrode(el).midpoint();
        let panels: Vec<(f64, f64)> =
            if mid > a && mid < b { vec![(a, mid), (mid, b)] } else { vec![(a, b)] };
        let len = b - a;
        let mut m = [[0.0; 2]; 2];
        let mut c = [0.0; 2];
        let mut d = 0.0;
        for (p0, p1) in panels {
            let half = 0.5 * (p1 - p0);
            let center = 0.5 * (p0 + p1);
            for g in [-GAUSS, GAUSS] {
                let s = center + g * half;
                let z = zeta.value(layout, edge.side, s) * half;
                let phi = [(b - s) / len, (s - a) / len];
                for i in 0..2 {
                    c[i] += z * phi[i];
                    for j in 0..2 {
                        m[i][j] += z * phi[i] * phi[j];
                    }
                }
                d += z;
            }
        }
        for i in 0..2 {
            *coupling[el].entry(edge.nodes[i]).or_insert(0.0) -= c[i];
            for j in 0..2 {
                *mass.entry((edge.nodes[i], edge.nodes[j])).or_insert(0.0) += m[i][j];
            }
        }
        diag[el] += d;
    }
    Ok(BoundaryBlock {
        mass,
        coupling: coupling.into_iter().map(|m| m.into_iter().collect()).collect(),
        diag,
    })
}

/// Gradient products `∫_T ∇φ_a·∇φ_b` of each triangle for unit conductivity.
fn unit_stiffness(mesh: &Mesh) -> Vec<[[f64; 3]; 3]> {
    (0..mesh.triangles().len())
        .map(|t| {
            let p = mesh.triangles()[t].map(|i| mesh.nodes()[i]);
            let area = mesh.triangle_area(t);
            // ∇φ_a = rot90(p_{a+2} - p_{a+1}) / (2 area)
            let grads: [[f64; 2]; 3] = std::array::from_fn(|a| {
                let (q, r) = (p[(a + 1) % 3], p[(a + 2) % 3]);
                [(q[1] - r[1]) / (2.0 * area), (r[0] - q[0]) / (2.0 * area)]
            });
            std::array::from_fn(|a| {
                std::array::from_fn(|b| area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]))
            })
        })
        .collect()
}

/// The assembled symmetric saddle-point system for one conductivity.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    n_nodes: usize,
    stiffness: BandMatrix,
    boundary: BoundaryBlock,
}

impl AssembledSystem {
    pub fn num_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn num_electrodes(&self) -> usize {
        self.boundary.diag.len()
    }

    /// Total number of unknowns, multiplier included.
    pub fn dim(&self) -> usize {
        self.n_nodes + self.num_electrodes() + 1
    }

    /// Entry of the `∫ σ ∇φ_i·∇φ_j` block only.
    pub fn stiffness_entry(&self, i: usize, j: usize) -> f64 {
        self.stiffness.get(i, j)
    }

    /// Entry of the full system matrix.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (n, k) = (self.n_nodes, self.num_electrodes());
        let class = |i: usize| if i < n { 0 } else if i < n + k { 1 } else { 2 };
        match (class(i), class(j)) {
            (0, 0) => self.stiffness.get(i, j) + self.boundary.mass.get(&(i, j)).copied().unwrap_or(0.0),
            (0, 1) => self.coupling(i, j - n),
            (1, 0) => self.coupling(j, i - n),
            (1, 1) if i == j => self.boundary.diag[i - n],
            (1, 2) | (2, 1) => 1.0,
            _ => 0.0,
        }
    }

    fn coupling(&self, node: usize, electrode: usize) -> f64 {
        let col = &self.boundary.coupling[electrode];
        col.binary_search_by_key(&node, |&(i, _)| i).map_or(0.0, |p| col[p].1)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.entry(i, j))
    }

    pub fn factorize(&self) -> Result<Factorization> {
        SOLVES.fetch_add(1, Ordering::Relaxed);
        let n = self.n_nodes;
        let k = self.num_electrodes();
        let mut a = self.stiffness.clone();
        for (&(i, j), &v) in &self.boundary.mass {
            a.add(i, j, v);
        }
        let chol: BandCholesky = a.cholesky()?;

        // S = D - Wᵀ W with W = L⁻¹ C
        let mut w = vec![vec![0.0; n]; k];
        for (col, wk) in self.boundary.coupling.iter().zip(w.iter_mut()) {
            for &(i, v) in col {
                wk[i] = v;
            }
            chol.forward_substitute(wk);
        }
        let mut bordered = DMatrix::zeros(k + 1, k + 1);
        for p in 0..k {
            for q in 0..=p {
                let dot: f64 = w[p].iter().zip(&w[q]).map(|(x, y)| x * y).sum();
                let s = if p == q { self.boundary.diag[p] } else { 0.0 } - dot;
                bordered[(p, q)] = s;
                bordered[(q, p)] = s;
            }
            bordered[(p, k)] = 1.0;
            bordered[(k, p)] = 1.0;
        }
        Ok(Factorization { k, lu: bordered.lu() })
    }
}

/// Factored system; maps current patterns to electrode voltages.
pub struct Factorization {
    k: usize,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factorization {
    pub fn voltages(&self, pattern: &[f64]) -> Result<Vec<f64>> {
        if pattern.len() != self.k {
            return Err(Error::Dimension { expected: self.k, got: pattern.len() });
        }
        let total: f64 = pattern.iter().sum();
        let scale: f64 = pattern.iter().map(|v| v.abs()).sum();
        if total.abs() > 1e-12 * (1.0 + scale) {
            return Err(Error::InvalidArgument(format!("current pattern sums to {total}, not 0")));
        }
        let mut rhs = DVector::zeros(self.k + 1);
        for (r, &v) in rhs.iter_mut().zip(pattern) {
            *r = v;
        }
        let sol = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("electrode Schur complement".into()))?;
        let v: Vec<f64> = sol.iter().take(self.k).copied().collect();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Singular("non-finite voltages".into()));
        }
        Ok(v)
    }
}

/// Voltages for `K - 1` patterns, pattern-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardOutput {
    pub voltages: Vec<Vec<f64>>,
}

impl ForwardOutput {
    pub fn flatten(&self) -> Vec<f64> {
        self.voltages.concat()
    }
}

pub fn solve_patterns(system: &AssembledSystem, patterns: &[Vec<f64>]) -> Result<ForwardOutput> {
    let f = system.factorize()?;
    let voltages = patterns.iter().map(|p| f.voltages(p)).collect::<Result<_>>()?;
    Ok(ForwardOutput { voltages })
}

/// Mesh, electrodes, admittance and patterns, with σ-independent parts precomputed.
#[derive(Clone, Debug)]
pub struct ForwardSolver {
    mesh: Mesh,
    layout: ElectrodeLayout,
    admittance: ContactAdmittance,
    patterns: Vec<Vec<f64>>,
    unit: Vec<[[f64; 3]; 3]>,
    boundary: BoundaryBlock,
}

impl ForwardSolver {
    /// Level-`level` mesh, `k` electrodes, unit-peak admittance, standard patterns.
    pub fn new(level: u32, k: usize) -> Result<Self> {
        let layout = mesh::electrode_layout(k)?;
        let m = mesh::classify_boundary_edges(mesh::build_unit_square_mesh(level)?, &layout)?;
        Self::with_parts(m, layout, ContactAdmittance::default(), standard_patterns(k))
    }

    pub fn with_parts(
        mesh: Mesh,
        layout: ElectrodeLayout,
        admittance: ContactAdmittance,
        patterns: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let boundary = boundary_block(&mesh, &layout, admittance)?;
        if let Some(p) = patterns.iter().find(|p| p.len() != layout.count()) {
            return Err(Error::Dimension { expected: layout.count(), got: p.len() });
        }
        let unit = unit_stiffness(&mesh);
        Ok(Self { mesh, layout, admittance, patterns, unit, boundary })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn layout(&self) -> &ElectrodeLayout {
        &self.layout
    }

    pub fn admittance(&self) -> ContactAdmittance {
        self.admittance
    }

    pub fn patterns(&self) -> &[Vec<f64>] {
        &self.patterns
    }

    /// Length of the flattened forward output.
    pub fn output_len(&self) -> usize {
        self.patterns.len() * self.layout.count()
    }

    pub fn assemble(&self, sigma: &[f64]) -> Result<AssembledSystem> {
        let n_tri = self.mesh.triangles().len();
        if sigma.len() != n_tri {
            return Err(Error::Dimension { expected: n_tri, got: sigma.len() });
        }
        let n = self.mesh.nodes().len();
        let mut stiffness = BandMatrix::zeros(n, self.mesh.bandwidth());
        for (t, (tri, local)) in self.mesh.triangles().iter().zip(&self.unit).enumerate() {
            let s = sigma[t];
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::NonPositiveConductivity { element: t, value: s });
            }
            for a in 0..3 {
                for b in 0..3 {
                    stiffness.add(tri[a], tri[b], s * local[a][b]);
                }
            }
        }
        Ok(AssembledSystem { n_nodes: n, stiffness, boundary: self.boundary.clone() })
    }

    pub fn solve_sigma(&self, sigma: &[f64]) -> Result<ForwardOutput> {
        solve_patterns(&self.assemble(sigma)?, &self.patterns)
    }
}

/// Assembles `mesh` and `layout` with the given per-element conductivity.
pub fn assemble(
    mesh: &Mesh,
    layout: &ElectrodeLayout,
    sigma: &[f64],
    admittance: ContactAdmittance,
) -> Result<AssembledSystem> {
    ForwardSolver::with_parts(mesh.clone(), layout.clone(), admittance, Vec::new())?.assemble(sigma)
}

/// `y ↦ G(y)`: conductivity model evaluated at element centroids, then solved.
#[derive(Clone, Debug)]
pub struct ForwardMap {
    solver: ForwardSolver,
    model: ConductivityModel,
    basis: FieldBasis,
}

impl ForwardMap {
    pub fn new(solver: ForwardSolver, model: ConductivityModel) -> Self {
        let basis = model.basis(&solver.mesh.centroids());
        Self { solver, model, basis }
    }

    pub fn solver(&self) -> &ForwardSolver {
        &self.solver
    }

    pub fn model(&self) -> &ConductivityModel {
        &self.model
    }

    pub fn num_params(&self) -> usize {
        self.model.num_params()
    }

    pub fn output_len(&self) -> usize {
        self.solver.output_len()
    }

    pub fn element_sigma(&self, y: &[f64]) -> Vec<f64> {
        self.basis.eval(y)
    }

    pub fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.num_params() {
            return Err(Error::Dimension { expected: self.num_params(), got: y.len() });
        }
        check_cube(y)?;
        Ok(self.solver.solve_sigma(&self.basis.eval(y))?.flatten())
    }
}

/// One-shot forward map; prefer [`ForwardMap`] for repeated evaluation.
pub fn forward_map(
    y: &[f64],
    model: &ConductivityModel,
    mesh: &Mesh,
    layout: &ElectrodeLayout,
    patterns: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let solver =
        ForwardSolver::with_parts(mesh.clone(), layout.clone(), ContactAdmittance::default(), patterns.to_vec())?;
    ForwardMap::new(solver, model.clone()).eval(y)
}

/// Text file with a `K`, `patterns`, `mesh_level` header and one value per line.
#[derive(Clone, Debug, PartialEq)]
pub struct VoltageData {
    pub k: usize,
    pub patterns: usize,
    pub mesh_level: u32,
    pub values: Vec<f64>,
}

impl VoltageData {
    pub fn to_text(&self) -> String {
        let mut out = format!("K {}\npatterns {}\nmesh_level {}\n", self.k, self.patterns, self.mesh_level);
        for v in &self.values {
            let _ = writeln!(out, "{v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut header = |key: &str| -> Result<u64> {
            let (n, line) = lines.next().ok_or_else(|| Error::parse(0, format!("missing {key}")))?;
            match line.split_whitespace().collect::<Vec<_>>()[..] {
                [k, v] if k == key => v.parse().map_err(|_| Error::parse(n + 1, format!("bad {key}"))),
                _ => Err(Error::parse(n + 1, format!("expected `{key} <value>`"))),
            }
        };
        let k = header("K")? as usize;
        let patterns = header("patterns")? as usize;
        let mesh_level = header("mesh_level")? as u32;
        let values = lines
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| l.trim().parse::<f64>().map_err(|_| Error::parse(n + 1, "bad value")))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != k * patterns {
            return Err(Error::parse(0, format!("expected {} values, found {}", k * patterns, values.len())));
        }
        Ok(Self { k, patterns, mesh_level, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::WaveletPrior;

    fn solver(level: u32, k: usize) -> ForwardSolver {
        ForwardSolver::new(level, k).unwrap()
    }

    #[test]
    fn admittance_profile() {
        let l = mesh::electrode_layout(16).unwrap();
        let e = *l.electrode(5);
        assert_eq!(admittance_at(&l, e.side, e.midpoint()), 1.0);
        assert_eq!(admittance_at(&l, e.side, e.start), 0.0);
        assert_eq!(admittance_at(&l, e.side, e.end), 0.0);
        assert_eq!(admittance_at(&l, Side::Bottom, 0.25), 0.0);
        assert_eq!(admittance_at(&l, Side::Bottom, 0.01), 0.0);
        let q = 0.5 * (e.start + e.midpoint());
        assert!((admittance_at(&l, e.side, q) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn assembled_matrix_is_exactly_symmetric() {
        let s = solver(2, 4);
        let sys = s.assemble(&vec![1.0; 32]).unwrap();
        let a = sys.to_dense();
        let asym = (0..a.nrows())
            .flat_map(|i| (0..a.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| (a[(i, j)] - a[(j, i)]).abs())
            .fold(0.0, f64::max);
        assert_eq!(asym, 0.0);
    }

    #[test]
    fn stiffness_is_linear_in_sigma() {
        let s = solver(2, 4);
        let one = s.assemble(&vec![1.0; 32]).unwrap();
        let two = s.assemble(&vec![2.0; 32]).unwrap();
        for i in 0..25 {
            for j in 0..25 {
                assert_eq!(two.stiffness_entry(i, j), 2.0 * one.stiffness_entry(i, j));
            }
        }
    }

    #[test]
    fn form_annihilates_constants() {
        let s = solver(3, 8);
        let sigma: Vec<f64> = (0..128).map(|t| 1.0 + 0.5 * ((t as f64) * 0.37).sin()).collect();
        let sys = s.assemble(&sigma).unwrap();
        let n = sys.num_nodes() + sys.num_electrodes();
        for i in 0..n {
            let row: f64 = (0..n).map(|j| sys.entry(i, j)).sum();
            assert!(row.abs() < 1e-12, "row {i}: {row}");
        }
    }

    #[test]
    fn boundary_mass_integrates_the_hat() {
        // ∫ ζ over one electrode with a unit hat is half its length
        let s = solver(4, 16);
        let sys = s.assemble(&vec![1.0; s.mesh().triangles().len()]).unwrap();
        let n = sys.num_nodes();
        for k in 0..16 {
            assert!((sys.entry(n + k, n + k) - 0.5 * 2.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_pattern_gives_zero_voltage() {
        let s = solver(2, 4);
        let f = s.assemble(&vec![1.0; 32]).unwrap().factorize().unwrap();
        assert!(f.voltages(&[0.0; 4]).unwrap().iter().all(|&v| v == 0.0));
        assert!(f.voltages(&[1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(f.voltages(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn opposite_electrodes_respect_reflection_symmetry() {
        let s = solver(3, 4);
        let f = s.assemble(&vec![1.0; 128]).unwrap().factorize().unwrap();
        let v = f.voltages(&[1.0, 0.0, -1.0, 0.0]).unwrap();
        assert!(v[0] > 0.0 && v[2] < 0.0);
        // the mesh is invariant under the half turn, which negates the pattern
        assert!((v[0] + v[2]).abs() < 1e-12);
        assert!((v[1] + v[3]).abs() < 1e-12);
        // mirror symmetry x -> 1-x holds up to the diagonal orientation
        assert!((v[1] - v[3]).abs() < 1e-2 * v[0]);
    }

    #[test]
    fn reciprocity_and_grounding() {
        let s = solver(4, 16);
        let sigma: Vec<f64> =
            s.mesh().centroids().iter().map(|c| 1.0 + 0.8 * (3.0 * c[0]).sin() * c[1]).collect();
        let out = s.solve_sigma(&sigma).unwrap();
        let pats = s.patterns();
        for (a, va) in pats.iter().zip(&out.voltages) {
            assert!(va.iter().sum::<f64>().abs() < 1e-12);
            for (b, vb) in pats.iter().zip(&out.voltages) {
                let lhs: f64 = a.iter().zip(vb).map(|(x, y)| x * y).sum();
                let rhs: f64 = b.iter().zip(va).map(|(x, y)| x * y).sum();
                assert!((lhs - rhs).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn scaling_sigma_and_zeta_halves_voltages() {
        let layout = mesh::electrode_layout(16).unwrap();
        let m = mesh::classify_boundary_edges(mesh::build_unit_square_mesh(4).unwrap(), &layout).unwrap();
        let sigma: Vec<f64> = m.centroids().iter().map(|c| 0.7 + c[0] * c[1]).collect();
        let base =
            ForwardSolver::with_parts(m.clone(), layout.clone(), ContactAdmittance { peak: 1.0 }, standard_patterns(16))
                .unwrap();
        let scaled =
            ForwardSolver::with_parts(m, layout, ContactAdmittance { peak: 2.0 }, standard_patterns(16)).unwrap();
        let v1 = base.solve_sigma(&sigma).unwrap().flatten();
        let s2: Vec<f64> = sigma.iter().map(|s| 2.0 * s).collect();
        let v2 = scaled.solve_sigma(&s2).unwrap().flatten();
        for (a, b) in v1.iter().zip(&v2) {
            assert!((a / 2.0 - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn forward_map_at_the_mean_field() {
        let model = ConductivityModel::Wavelet(WaveletPrior::new(3.0, 1));
        let fm = ForwardMap::new(solver(4, 16), model);
        let g = fm.eval(&[0.0; 15]).unwrap();
        assert_eq!(g.len(), 240);
        let direct = fm.solver().solve_sigma(&vec![1.1; 512]).unwrap().flatten();
        assert_eq!(g, direct);
        assert!(fm.eval(&[2.0; 15]).is_err());
        assert!(fm.eval(&[0.0; 3]).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = solver(2, 4);
        let mut sigma = vec![1.0; 32];
        sigma[7] = 0.0;
        assert!(matches!(s.assemble(&sigma), Err(Error::NonPositiveConductivity { element: 7, .. })));
        let raw = mesh::build_unit_square_mesh(2).unwrap();
        let layout = mesh::electrode_layout(4).unwrap();
        assert!(matches!(assemble(&raw, &layout, &[1.0; 32], ContactAdmittance::default()), Err(Error::Unclassified)));
    }

    #[test]
    fn voltage_file_roundtrip() {
        let d = VoltageData { k: 4, patterns: 3, mesh_level: 2, values: (0..12).map(|i| 0.1 * i as f64 - 1e-9).collect() };
        assert_eq!(VoltageData::parse(&d.to_text()).unwrap(), d);
        assert!(VoltageData::parse("K 4\npatterns 3\nmesh_level 2\n1.0\n").is_err());
    }
}
