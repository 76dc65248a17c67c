use std::fmt::Write as _;

use super::index::{LowerSet, MultiIndex};
use super::leja::NodeTable;
use crate::error::{Error, Result};

/// Newton-form interpolant `Σ_k α_k H_{ν^k}` of a map `[-1,1]^J → R^m`.
#[derive(Clone, Debug)]
pub struct Surrogate {
    dim: usize,
    out_dim: usize,
    set: LowerSet,
    surpluses: Vec<f64>,
    // sparse supports of the indices, concatenated
    starts: Vec<usize>,
    coords: Vec<u32>,
    degs: Vec<u32>,
    max_deg: Vec<u32>,
    table: NodeTable,
}

impl PartialEq for Surrogate {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.out_dim == other.out_dim
            && self.set.indices() == other.set.indices()
            && self.surpluses == other.surpluses
    }
}

impl Surrogate {
    /// Constant surrogate `f(z_0)`, where `z_0 = (1, …, 1)` is the first grid point.
    pub fn constant(dim: usize, value: Vec<f64>) -> Self {
        let mut s = Surrogate {
            dim,
            out_dim: value.len(),
            set: LowerSet::default(),
            surpluses: Vec::new(),
            starts: vec![0],
            coords: Vec::new(),
            degs: Vec::new(),
            max_deg: vec![0; dim],
            table: NodeTable::with_degree(1),
        };
        s.push(MultiIndex::zero(dim), &value);
        s
    }

    /// Appends a term; the caller guarantees `ν` is admissible and `α` correct.
    pub(crate) fn push(&mut self, nu: MultiIndex, alpha: &[f64]) {
        debug_assert_eq!(alpha.len(), self.out_dim);
        for (j, d) in nu.support() {
            self.coords.push(j as u32);
            self.degs.push(d);
            self.max_deg[j] = self.max_deg[j].max(d);
        }
        self.table.ensure(nu.max_degree() as usize);
        self.starts.push(self.coords.len());
        self.surpluses.extend_from_slice(alpha);
        self.set.push_unchecked(nu);
    }

    /// The first `n` terms, itself the interpolant on that prefix of the index set.
    pub fn truncated(&self, n: usize) -> Surrogate {
        let n = n.clamp(1, self.len());
        let mut s = Surrogate::constant(self.dim, self.surplus(0).to_vec());
        for (p, nu) in self.indices()[..n].iter().enumerate().skip(1) {
            s.push(nu.clone(), self.surplus(p));
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn output_dim(&self) -> usize {
        self.out_dim
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn index_set(&self) -> &LowerSet {
        &self.set
    }

    pub fn indices(&self) -> &[MultiIndex] {
        self.set.indices()
    }

    pub fn surplus(&self, k: usize) -> &[f64] {
        &self.surpluses[k * self.out_dim..(k + 1) * self.out_dim]
    }

    pub fn table(&self) -> &NodeTable {
        &self.table
    }

    pub(crate) fn table_mut(&mut self) -> &mut NodeTable {
        &mut self.table
    }

    /// Per-coordinate maximum degree over the index set.
    pub fn max_degrees(&self) -> &[u32] {
        &self.max_deg
    }

    /// Grid point `z_ν = (z_{ν_1}, …, z_{ν_J})`.
    pub fn grid_point(&self, nu: &MultiIndex) -> Vec<f64> {
        grid_point(&self.table, nu)
    }

    /// `‖H_ν‖_∞ = Π_j ‖h_{ν_j}‖_∞`.
    pub fn h_norm(&self, nu: &MultiIndex) -> f64 {
        nu.support().map(|(_, d)| self.table.sup_norm(d as usize)).product()
    }

    /// Value of the current interpolant at the grid point `z_ν`.
    ///
    /// Only terms `μ <= ν` contribute there, so the sum runs over whichever is
    /// smaller: the box below `ν` or the whole index set.
    pub fn eval_at_grid(&self, nu: &MultiIndex) -> Vec<f64> {
        let mut acc = vec![0.0; self.out_dim];
        let mut add = |p: usize| {
            let w: f64 = (self.starts[p]..self.starts[p + 1])
                .map(|t| self.table.h_at_node(self.degs[t] as usize, nu.degrees()[self.coords[t] as usize] as usize))
                .product();
            if w != 0.0 {
                for (a, s) in acc.iter_mut().zip(self.surplus(p)) {
                    *a += w * s;
                }
            }
        };
        if nu.box_size() <= self.len() as u128 {
            let support: Vec<(usize, u32)> = nu.support().collect();
            let mut cur = MultiIndex::zero(self.dim);
            let mut counter = vec![0u32; support.len()];
            loop {
                if let Some(p) = self.set.position(&cur) {
                    add(p);
                }
                // odometer over the box
                let mut i = 0;
                loop {
                    if i == support.len() {
                        return acc;
                    }
                    let (j, d) = support[i];
                    if counter[i] < d {
                        counter[i] += 1;
                        cur = set_degree(cur, j, counter[i]);
                        break;
                    }
                    counter[i] = 0;
                    cur = set_degree(cur, j, 0);
                    i += 1;
                }
            }
        } else {
            for (p, mu) in self.set.indices().iter().enumerate() {
                if mu.le(nu) {
                    add(p);
                }
            }
            acc
        }
    }

    pub fn evaluate(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.out_dim];
        self.evaluate_into(y, &mut out);
        out
    }

    /// `Σ_k α_k Π_j h_{ν^k_j}(y_j)`; univariate factors are computed once per
    /// coordinate and degree.
    pub fn evaluate_into(&self, y: &[f64], out: &mut [f64]) {
        assert_eq!(y.len(), self.dim, "parameter dimension");
        assert_eq!(out.len(), self.out_dim, "output dimension");
        let stride = self.max_deg.iter().copied().max().unwrap_or(0) as usize + 1;
        let mut hv = vec![0.0; self.dim * stride];
        for (j, &yj) in y.iter().enumerate() {
            let d = self.max_deg[j] as usize;
            self.table.h_values(yj, d, &mut hv[j * stride..j * stride + d + 1]);
        }
        out.iter_mut().for_each(|o| *o = 0.0);
        for p in 0..self.len() {
            let mut w = 1.0;
            for t in self.starts[p]..self.starts[p + 1] {
                w *= hv[self.coords[t] as usize * stride + self.degs[t] as usize];
            }
            for (o, s) in out.iter_mut().zip(self.surplus(p)) {
                *o += w * s;
            }
        }
    }

    /// Header `J m N nodes=rleja`, then `ν_1 … ν_J | α_1 … α_m` per term.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {} nodes=rleja\n", self.dim, self.out_dim, self.len());
        for (p, nu) in self.indices().iter().enumerate() {
            let degs: Vec<String> = nu.degrees().iter().map(u32::to_string).collect();
            let vals: Vec<String> = self.surplus(p).iter().map(f64::to_string).collect();
            let _ = writeln!(out, "{} | {}", degs.join(" "), vals.join(" "));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty surrogate file"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let [dim, m, n, nodes] = h[..] else {
            return Err(Error::parse(1, "expected `J m N nodes=rleja`"));
        };
        if nodes != "nodes=rleja" {
            return Err(Error::parse(1, format!("unsupported node sequence {nodes:?}")));
        }
        let num = |t: &str| t.parse::<usize>().map_err(|_| Error::parse(1, format!("bad count {t:?}")));
        let (dim, m, n) = (num(dim)?, num(m)?, num(n)?);

        let mut indices = Vec::with_capacity(n);
        let mut alphas = Vec::with_capacity(n * m);
        for (ln, line) in lines {
            let (lhs, rhs) =
                line.split_once('|').ok_or_else(|| Error::parse(ln + 1, "missing `|` separator"))?;
            let degs = lhs
                .split_whitespace()
                .map(|t| t.parse::<u32>().map_err(|_| Error::parse(ln + 1, format!("bad degree {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let before = alphas.len();
            for t in rhs.split_whitespace() {
                alphas.push(t.parse::<f64>().map_err(|_| Error::parse(ln + 1, format!("bad surplus {t:?}")))?);
            }
            if degs.len() != dim || alphas.len() - before != m {
                return Err(Error::parse(ln + 1, "record length does not match the header"));
            }
            indices.push(MultiIndex::from(degs));
        }
        if indices.len() != n || n == 0 {
            return Err(Error::parse(0, format!("expected {n} records, found {}", indices.len())));
        }
        let set = LowerSet::from_ordered(indices)?;
        let mut s = Surrogate::constant(dim, alphas[..m].to_vec());
        for (p, nu) in set.indices().iter().enumerate().skip(1) {
            s.push(nu.clone(), &alphas[p * m..(p + 1) * m]);
        }
        Ok(s)
    }
}

fn set_degree(nu: MultiIndex, j: usize, d: u32) -> MultiIndex {
    let mut v = nu.degrees().to_vec();
    v[j] = d;
    MultiIndex::from(v)
}

pub(crate) fn grid_point(table: &NodeTable, nu: &MultiIndex) -> Vec<f64> {
    nu.degrees().iter().map(|&d| table.node(d as usize)).collect()
}
