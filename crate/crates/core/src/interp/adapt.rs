//! Greedy construction of the index set.
//!
//! Starting from `Λ = {0}`, each step admits the neighbor `ν ∈ N(Λ)` with the
//! largest `‖Δ_ν f‖_∞ = |α_ν| ‖H_ν‖_∞`. A neighbor's surplus is final the
//! moment it enters `N(Λ)`: every `μ < ν` is already in `Λ` then, and later
//! admissions are never below `ν`. Each candidate is therefore evaluated and
//! scored once, and the frontier lives in a max-heap.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use super::index::MultiIndex;
use super::surrogate::Surrogate;
use crate::error::{Error, Result};

/// How the surplus vector is reduced to a scalar score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ScoreNorm {
    #[default]
    L2,
    Max,
}

impl ScoreNorm {
    fn apply(self, v: &[f64]) -> f64 {
        match self {
            ScoreNorm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            ScoreNorm::Max => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptOptions {
    pub budget: usize,
    pub norm: ScoreNorm,
    /// Multiply the surplus norm by `‖H_ν‖_∞`.
    pub use_h_norm: bool,
}

impl AdaptOptions {
    pub fn new(budget: usize) -> Self {
        Self { budget, norm: ScoreNorm::L2, use_h_norm: true }
    }
}

#[derive(Clone, Debug)]
pub struct AdaptReport {
    pub surrogate: Surrogate,
    /// Score of each admitted index, in admission order.
    pub scores: Vec<f64>,
    /// Distinct points at which `f` was evaluated (admitted + frontier).
    pub evaluations: usize,
    /// Seconds since the start at which the `n`-th index had been admitted and
    /// its new neighbors scored. By nestedness, `elapsed[n - 1]` is the cost of
    /// a fresh run with budget `n`.
    pub elapsed: Vec<f64>,
}

impl AdaptReport {
    pub fn admitted(&self) -> usize {
        self.surrogate.len()
    }

    /// Evaluations spent on frontier indices that were never admitted.
    pub fn candidate_only_evaluations(&self) -> usize {
        self.evaluations - self.admitted()
    }
}

struct Candidate {
    score: f64,
    nu: MultiIndex,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    // larger score first; ties go to the lexicographically smaller index
    fn cmp(&self, other: &Self) -> Ordering {
        self.score.total_cmp(&other.score).then_with(|| other.nu.cmp(&self.nu))
    }
}

fn evaluate<F>(f: &mut F, point: Vec<f64>, m: Option<usize>) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let wrap = |point: Vec<f64>, source: Error| Error::Evaluation { point, source: Box::new(source) };
    match f(&point) {
        Ok(v) => {
            if let Some(m) = m {
                if v.len() != m {
                    return Err(wrap(point, Error::Dimension { expected: m, got: v.len() }));
                }
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(wrap(point, Error::InvalidArgument("non-finite value".into())));
            }
            Ok(v)
        }
        Err(e) => Err(wrap(point, e)),
    }
}

/// Builds an `opts.budget`-term surrogate of `f` on `[-1,1]^dim`.
pub fn adapt<F>(mut f: F, dim: usize, opts: &AdaptOptions) -> Result<AdaptReport>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if opts.budget == 0 {
        return Err(Error::InvalidArgument("interpolation budget must be at least 1".into()));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("parameter dimension must be at least 1".into()));
    }
    let start = std::time::Instant::now();
    let f0 = evaluate(&mut f, vec![1.0; dim], None)?;
    let m = f0.len();
    let score_of = |s: &Surrogate, nu: &MultiIndex, alpha: &[f64]| {
        let base = opts.norm.apply(alpha);
        if opts.use_h_norm {
            base * s.h_norm(nu)
        } else {
            base
        }
    };

    let mut surrogate = Surrogate::constant(dim, f0);
    let mut scores = vec![score_of(&surrogate, &MultiIndex::zero(dim), surrogate.surplus(0))];
    let mut evaluations = 1;
    let mut heap = BinaryHeap::new();
    let mut pending: HashMap<MultiIndex, Vec<f64>> = HashMap::new();

    let mut expand = |s: &mut Surrogate,
                      from: &MultiIndex,
                      heap: &mut BinaryHeap<Candidate>,
                      pending: &mut HashMap<MultiIndex, Vec<f64>>,
                      evaluations: &mut usize|
     -> Result<()> {
        for j in 0..dim {
            let mu = from.raised(j);
            if !s.index_set().admits(&mu) {
                continue;
            }
            s.table_mut().ensure(mu.max_degree() as usize);
            let value = evaluate(&mut f, s.grid_point(&mu), Some(m))?;
            *evaluations += 1;
            let interp = s.eval_at_grid(&mu);
            let alpha: Vec<f64> = value.iter().zip(&interp).map(|(a, b)| a - b).collect();
            heap.push(Candidate { score: score_of(s, &mu, &alpha), nu: mu.clone() });
            pending.insert(mu, alpha);
        }
        Ok(())
    };

    expand(&mut surrogate, &MultiIndex::zero(dim), &mut heap, &mut pending, &mut evaluations)?;
    let mut elapsed = vec![start.elapsed().as_secs_f64()];
    while surrogate.len() < opts.budget {
        let Some(Candidate { score, nu }) = heap.pop() else { break };
        let alpha = pending.remove(&nu).expect("every frontier index has a surplus");
        surrogate.push(nu.clone(), &alpha);
        scores.push(score);
        expand(&mut surrogate, &nu, &mut heap, &mut pending, &mut evaluations)?;
        elapsed.push(start.elapsed().as_secs_f64());
    }
    Ok(AdaptReport { surrogate, scores, evaluations, elapsed })
}

/// Interpolant on a prescribed index set, surpluses computed in the given
/// order. Every prefix of `indices` must be a lower set.
pub fn build_from_set<F>(mut f: F, indices: &[MultiIndex]) -> Result<Surrogate>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let set = super::index::LowerSet::from_ordered(indices.to_vec())?;
    let dim = set.dim();
    let f0 = evaluate(&mut f, vec![1.0; dim], None)?;
    let m = f0.len();
    let mut s = Surrogate::constant(dim, f0);
    for nu in set.indices().iter().skip(1) {
        s.table_mut().ensure(nu.max_degree() as usize);
        let value = evaluate(&mut f, s.grid_point(nu), Some(m))?;
        let interp = s.eval_at_grid(nu);
        let alpha: Vec<f64> = value.iter().zip(&interp).map(|(a, b)| a - b).collect();
        s.push(nu.clone(), &alpha);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{iso_set, LowerSet};

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::from(v.to_vec())
    }

    #[test]
    fn constant_function() {
        let r = adapt(|_| Ok(vec![2.5, -1.0]), 3, &AdaptOptions::new(6)).unwrap();
        let s = &r.surrogate;
        assert_eq!(s.len(), 6);
        assert!(s.index_set().is_lower());
        assert!(r.scores[1..].iter().all(|&x| x == 0.0));
        // zero scores everywhere: lexicographically smallest neighbor wins
        assert_eq!(s.indices()[1], mi(&[0, 0, 1]));
        assert_eq!(s.evaluate(&[0.3, -0.2, 0.9]), vec![2.5, -1.0]);
    }

    #[test]
    fn admits_the_dominant_direction_first() {
        let f = |y: &[f64]| Ok(vec![y[0] + 0.01 * y[1]]);
        let r = adapt(f, 2, &AdaptOptions::new(3)).unwrap();
        assert_eq!(r.surrogate.indices(), &[mi(&[0, 0]), mi(&[1, 0]), mi(&[0, 1])]);
        // hand values: α_(1,0) = f(-1,1) - f(1,1) = -2, α_(0,1) = -0.02, ‖h_1‖ = 1
        assert!((r.scores[1] - 2.0).abs() < 1e-15);
        assert!((r.scores[2] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn surplus_of_a_linear_function() {
        let s = build_from_set(|y: &[f64]| Ok(vec![y[0]]), &[mi(&[0, 0]), mi(&[1, 0])]).unwrap();
        assert_eq!(s.surplus(0), &[1.0]);
        assert_eq!(s.surplus(1), &[-2.0]);
        let lin = |y: &[f64]| Ok(vec![1.0 + 2.0 * y[0] - y[1] + 0.5 * y[2]]);
        let mut set = LowerSet::new(3);
        for j in 0..3 {
            set.push_unchecked(MultiIndex::unit(3, j));
        }
        let more: Vec<MultiIndex> = set
            .indices()
            .iter()
            .cloned()
            .chain([mi(&[2, 0, 0]), mi(&[1, 1, 0]), mi(&[0, 0, 2])])
            .collect();
        let s = build_from_set(lin, &more).unwrap();
        for p in 4..7 {
            assert!(s.surplus(p)[0].abs() < 1e-14);
        }
    }

    #[test]
    fn build_from_set_examples() {
        let s = build_from_set(|y: &[f64]| Ok(vec![y[0].exp()]), &[mi(&[0])]).unwrap();
        assert_eq!(s.evaluate(&[0.7]), vec![1f64.exp()]);
        let iso = iso_set(2, 1);
        let s = build_from_set(|_| Ok(vec![3.0]), iso.indices()).unwrap();
        let nonzero = (0..s.len()).filter(|&p| s.surplus(p)[0] != 0.0).count();
        assert_eq!(nonzero, 1);
        assert!(build_from_set(|_| Ok(vec![1.0]), &[mi(&[0, 0]), mi(&[1, 1])]).is_err());
    }

    #[test]
    fn interpolates_at_grid_points() {
        let f = |y: &[f64]| Ok(vec![(y[0] + 2.0 * y[1]).sin(), y[2] * y[0].exp()]);
        let r = adapt(f, 3, &AdaptOptions::new(40)).unwrap();
        let s = &r.surrogate;
        for nu in s.indices() {
            let z = s.grid_point(nu);
            let exact = f(&z).unwrap();
            for (a, b) in s.evaluate(&z).iter().zip(&exact) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn exact_for_bilinear() {
        let f = |y: &[f64]| Ok(vec![y[0] * y[1]]);
        let s = build_from_set(f, &[mi(&[0, 0]), mi(&[1, 0]), mi(&[0, 1]), mi(&[1, 1])]).unwrap();
        for k in 0..100 {
            let y = [((k * 37) % 101) as f64 / 50.0 - 1.0, ((k * 53) % 97) as f64 / 48.0 - 1.0];
            assert!((s.evaluate(&y)[0] - y[0] * y[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn polynomial_on_a_lower_set_is_captured() {
        // g ∈ P_Λ* with Λ* = {(0,0),(1,0),(2,0),(0,1),(1,1)}
        let g = |y: &[f64]| Ok(vec![1.0 + y[0] - 2.0 * y[0] * y[0] + 0.5 * y[1] + 3.0 * y[0] * y[1]]);
        let r = adapt(g, 2, &AdaptOptions::new(12)).unwrap();
        let star = [mi(&[0, 0]), mi(&[1, 0]), mi(&[2, 0]), mi(&[0, 1]), mi(&[1, 1])];
        let pos = star.iter().map(|nu| r.surrogate.index_set().position(nu));
        let last = pos.map(|p| p.expect("Λ* is eventually covered")).max().unwrap();
        assert!(r.scores[last + 1..].iter().all(|&s| s <= 1e-10));
    }

    #[test]
    fn nested_budgets_share_a_prefix() {
        let f = |y: &[f64]| Ok(vec![1.0 / (2.0 + y[0] + 0.5 * y[1] - 0.3 * y[2])]);
        let small = adapt(f, 3, &AdaptOptions::new(15)).unwrap().surrogate;
        let big = adapt(f, 3, &AdaptOptions::new(40)).unwrap().surrogate;
        assert_eq!(small.indices(), &big.indices()[..15]);
        for p in 0..15 {
            assert_eq!(small.surplus(p), big.surplus(p));
        }
        assert_eq!(big.truncated(15), small);
    }

    #[test]
    fn failures_carry_the_point() {
        let f = |y: &[f64]| {
            if y[0] < -0.5 {
                Err(Error::InvalidArgument("boom".into()))
            } else {
                Ok(vec![y[0]])
            }
        };
        match adapt(f, 1, &AdaptOptions::new(3)) {
            Err(Error::Evaluation { point, .. }) => assert_eq!(point, vec![-1.0]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(adapt(|_| Ok(vec![0.0]), 2, &AdaptOptions::new(0)).is_err());
    }

    #[test]
    fn budget_one_still_scores_the_unit_neighbors() {
        let r = adapt(|y: &[f64]| Ok(vec![y.iter().sum()]), 5, &AdaptOptions::new(1)).unwrap();
        assert_eq!(r.admitted(), 1);
        assert_eq!(r.evaluations, 6);
    }

    #[test]
    fn surrogate_file_roundtrip() {
        let f = |y: &[f64]| Ok(vec![(y[0] * 0.3).cos() + y[1], 1e-17 * y[0], -y[1] * y[0]]);
        let s = adapt(f, 2, &AdaptOptions::new(9)).unwrap().surrogate;
        let text = s.to_text();
        assert!(text.starts_with("2 3 9 nodes=rleja\n"));
        let back = Surrogate::parse(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_text(), text);
        assert!(Surrogate::parse("2 1 1 nodes=cc\n0 0 | 1\n").is_err());
        assert!(Surrogate::parse("2 1 2 nodes=rleja\n0 0 | 1\n1 1 | 2\n").is_err());
    }

    mod props {
        use super::*;
        use crate::interp::neighbors;
        use proptest::prelude::*;

        /// Grows a lower set by repeatedly admitting a chosen neighbor.
        fn lower_set(dim: usize, picks: &[usize]) -> Vec<MultiIndex> {
            let mut set = LowerSet::new(dim);
            for &p in picks {
                let n = neighbors(&set);
                set.push_unchecked(n[p % n.len()].clone());
            }
            set.indices().to_vec()
        }

        fn monomial(nu: &MultiIndex, y: &[f64]) -> f64 {
            nu.degrees().iter().zip(y).map(|(&d, &v)| v.powi(d as i32)).product()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(40))]

            #[test]
            fn reproduces_polynomials_in_the_span(
                dim in 1usize..=5,
                picks in prop::collection::vec(0usize..1000, 0..25),
                coeffs in prop::collection::vec(-1.0f64..1.0, 26),
                points in prop::collection::vec(prop::collection::vec(-1.0f64..=1.0, 5), 20),
            ) {
                let set = lower_set(dim, &picks);
                let g = |y: &[f64]| -> f64 { set.iter().zip(&coeffs).map(|(nu, c)| c * monomial(nu, y)).sum() };
                let s = build_from_set(|y: &[f64]| Ok(vec![g(y)]), &set).unwrap();
                prop_assert!(s.index_set().is_lower());
                for p in &points {
                    let y = &p[..dim];
                    prop_assert!((s.evaluate(y)[0] - g(y)).abs() < 1e-9);
                }
            }

            #[test]
            fn adaptation_is_deterministic_and_nested(
                a in -1.0f64..1.0,
                b in 0.1f64..2.0,
                n in 2usize..30,
            ) {
                let f = |y: &[f64]| Ok(vec![(a * y[0] + b * y[1] * y[2]).exp(), y[1] - y[2]]);
                let small = adapt(f, 3, &AdaptOptions::new(n)).unwrap();
                let again = adapt(f, 3, &AdaptOptions::new(n)).unwrap();
                let big = adapt(f, 3, &AdaptOptions::new(n + 10)).unwrap();
                prop_assert_eq!(&small.surrogate, &again.surrogate);
                prop_assert_eq!(small.surrogate.indices(), &big.surrogate.indices()[..n]);
                prop_assert!(big.surrogate.index_set().is_lower());
                for nu in small.surrogate.indices() {
                    let z = small.surrogate.grid_point(nu);
                    let (u, v) = (small.surrogate.evaluate(&z), big.surrogate.evaluate(&z));
                    prop_assert!((u[0] - v[0]).abs() < 1e-10 && (u[1] - v[1]).abs() < 1e-10);
                }
            }
        }
    }
}
