//! R-Leja nodes and the univariate Newton basis `h_k`.

const DEDUP_TOL: f64 = 1e-12;
const SUP_GRID: usize = 4097;

/// Real parts of the complex Leja points `exp(iπ Σ_k j_k 2^-k)` (binary digits
/// `j_k` of `j = 0, 1, 2, …`), duplicates dropped, first occurrence kept.
pub fn rleja_nodes(n: usize) -> Vec<f64> {
    let mut nodes: Vec<f64> = Vec::with_capacity(n);
    let mut j: u64 = 0;
    while nodes.len() < n {
        let mut angle = 0.0;
        let mut bits = j;
        let mut weight = 1.0;
        while bits > 0 {
            if bits & 1 == 1 {
                angle += weight;
            }
            weight *= 0.5;
            bits >>= 1;
        }
        let x = (std::f64::consts::PI * angle).cos();
        let x = if x.abs() < DEDUP_TOL { 0.0 } else { x };
        if !nodes.iter().any(|&z| (z - x).abs() <= DEDUP_TOL) {
            nodes.push(x);
        }
        j += 1;
    }
    nodes
}

/// `h_k(z) = Π_{j<k} (z - z_j)/(z_k - z_j)`, `h_0 = 1`.
pub fn univariate_h(k: usize, z: f64, nodes: &[f64]) -> f64 {
    (0..k).map(|j| (z - nodes[j]) / (nodes[k] - nodes[j])).product()
}

/// Lebesgue function maximum of Lagrange interpolation on the first `n + 1`
/// R-Leja nodes, over `probe` equispaced points of `[-1, 1]`.
pub fn lebesgue_estimate(n: usize, probe: usize) -> f64 {
    let nodes = rleja_nodes(n + 1);
    let probe = probe.max(2);
    let mut best: f64 = 0.0;
    for p in 0..probe {
        let z = -1.0 + 2.0 * p as f64 / (probe - 1) as f64;
        let total: f64 = (0..=n)
            .map(|k| {
                (0..=n)
                    .filter(|&j| j != k)
                    .map(|j| (z - nodes[j]) / (nodes[k] - nodes[j]))
                    .product::<f64>()
                    .abs()
            })
            .sum();
        best = best.max(total);
    }
    best
}

/// Lazily grown table of R-Leja nodes, `h_k(z_i)` and `‖h_k‖_∞`.
#[derive(Clone, Debug, Default)]
pub struct NodeTable {
    nodes: Vec<f64>,
    /// `at_nodes[i][k] = h_k(z_i)` for `k <= i`; zero for `k > i`.
    at_nodes: Vec<Vec<f64>>,
    /// `h_k(z) = h_{k-1}(z) (z - z_{k-1}) ratio[k]`.
    ratio: Vec<f64>,
    sup: Vec<f64>,
}

impl NodeTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_degree(max_degree: usize) -> Self {
        let mut t = Self::new();
        t.ensure(max_degree);
        t
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Makes degrees `0..=max_degree` available.
    pub fn ensure(&mut self, max_degree: usize) {
        if max_degree < self.nodes.len() {
            return;
        }
        let target = (max_degree + 1).max(2 * self.nodes.len()).max(8);
        let old = self.nodes.len();
        self.nodes = rleja_nodes(target);
        let nodes = &self.nodes;
        self.ratio.resize(target, 1.0);
        for k in old.max(1)..target {
            let shared: f64 = (0..k - 1).map(|j| (nodes[k - 1] - nodes[j]) / (nodes[k] - nodes[j])).product();
            self.ratio[k] = shared / (nodes[k] - nodes[k - 1]);
        }
        for i in old..target {
            let mut row = vec![0.0; target];
            row[0] = 1.0;
            for k in 1..=i {
                row[k] = row[k - 1] * (nodes[i] - nodes[k - 1]) * self.ratio[k];
            }
            self.at_nodes.push(row);
        }
        for row in &mut self.at_nodes[..old] {
            row.resize(target, 0.0);
        }
        for k in old..target {
            self.sup.push(sup_norm(k, nodes));
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// `h_k(z_i)`.
    #[inline]
    pub fn h_at_node(&self, k: usize, i: usize) -> f64 {
        self.at_nodes[i][k]
    }

    pub fn sup_norm(&self, k: usize) -> f64 {
        self.sup[k]
    }

    /// Writes `h_0(z), …, h_d(z)` into `out[..=d]`.
    pub fn h_values(&self, z: f64, d: usize, out: &mut [f64]) {
        out[0] = 1.0;
        for k in 1..=d {
            out[k] = out[k - 1] * (z - self.nodes[k - 1]) * self.ratio[k];
        }
    }
}

fn sup_norm(k: usize, nodes: &[f64]) -> f64 {
    let grid = (0..SUP_GRID).map(|p| -1.0 + 2.0 * p as f64 / (SUP_GRID - 1) as f64);
    grid.chain(nodes.iter().copied())
        .map(|z| univariate_h(k, z, nodes).abs())
        .fold(0.0, f64::max)
}
