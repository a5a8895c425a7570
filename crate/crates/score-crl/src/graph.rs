//! Latent-DAG representation, random generation, and the graphical relations
//! the algorithms consume (closure, reduction, surrounded sets, relation
//! matrices, isomorphism testing).
//!
//! Edge convention, used everywhere in the crate: `adjacency(i, j) == true`
//! if and only if `j ∈ Pa(i)`, i.e. there is an edge `j → i`.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest node count accepted by the exhaustive isomorphism search.
pub const MAX_ISOMORPHISM_NODES: usize = 10;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node index {0} out of range for {1} nodes")]
    NodeOutOfRange(usize, usize),
    #[error("graph contains a self-loop at node {0}")]
    SelfLoop(usize),
    #[error("graph contains a directed cycle")]
    Cyclic,
    #[error("graphs have different node counts ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("isomorphism search limited to {MAX_ISOMORPHISM_NODES} nodes, got {0}")]
    TooLarge(usize),
    #[error("permutation {0:?} is not a valid causal order")]
    InvalidOrder(Vec<usize>),
}

/// Serialized form: adjacency as per-node parent lists.
#[derive(Serialize, Deserialize)]
struct DagRepr {
    n: usize,
    parents: Vec<Vec<usize>>,
}

/// A directed acyclic graph over `n` latent nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DagRepr", into = "DagRepr")]
pub struct Dag {
    n: usize,
    // adj[i * n + j] == true  <=>  j ∈ Pa(i)
    adj: Vec<bool>,
}

impl TryFrom<DagRepr> for Dag {
    type Error = GraphError;
    fn try_from(repr: DagRepr) -> Result<Self, Self::Error> {
        let edges: Vec<(usize, usize)> = repr
            .parents
            .iter()
            .enumerate()
            .flat_map(|(i, ps)| ps.iter().map(move |&j| (j, i)))
            .collect();
        Dag::from_edges(repr.n, &edges)
    }
}

impl From<Dag> for DagRepr {
    fn from(dag: Dag) -> Self {
        DagRepr {
            n: dag.n,
            parents: (0..dag.n).map(|i| dag.parents(i)).collect(),
        }
    }
}

impl Dag {
    /// Graph with no edges.
    pub fn empty(n: usize) -> Self {
        Dag {
            n,
            adj: vec![false; n * n],
        }
    }

    /// Builds a DAG from `from → to` edges, validating acyclicity.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut dag = Dag::empty(n);
        for &(from, to) in edges {
            if from >= n {
                return Err(GraphError::NodeOutOfRange(from, n));
            }
            if to >= n {
                return Err(GraphError::NodeOutOfRange(to, n));
            }
            if from == to {
                return Err(GraphError::SelfLoop(from));
            }
            dag.adj[to * n + from] = true;
        }
        dag.topological_order().map(|_| dag)
    }

    /// Chain `0 → 1 → … → n-1`.
    pub fn chain(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        Dag::from_edges(n, &edges).expect("chain is acyclic")
    }

    /// Complete DAG: edge `i → j` for every `i < j`.
    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for j in 0..n {
            for i in 0..j {
                edges.push((i, j));
            }
        }
        Dag::from_edges(n, &edges).expect("complete DAG is acyclic")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// True iff `j ∈ Pa(i)`, i.e. there is an edge `j → i`.
    pub fn is_parent(&self, j: usize, i: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn parents(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.is_parent(j, i)).collect()
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.is_parent(i, j)).collect()
    }

    /// Children of `i` plus `i` itself.
    pub fn children_plus(&self, i: usize) -> Vec<usize> {
        let mut out = vec![i];
        out.extend(self.children(i));
        out.sort_unstable();
        out
    }

    /// Parents of `i` plus `i` itself.
    pub fn parents_plus(&self, i: usize) -> Vec<usize> {
        let mut out = vec![i];
        out.extend(self.parents(i));
        out.sort_unstable();
        out
    }

    /// Strict ancestors of `i`.
    pub fn ancestors(&self, i: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut stack = self.parents(i);
        while let Some(j) = stack.pop() {
            if !seen[j] {
                seen[j] = true;
                stack.extend(self.parents(j));
            }
        }
        (0..self.n).filter(|&j| seen[j]).collect()
    }

    /// Strict descendants of `i`.
    pub fn descendants(&self, i: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut stack = self.children(i);
        while let Some(j) = stack.pop() {
            if !seen[j] {
                seen[j] = true;
                stack.extend(self.children(j));
            }
        }
        (0..self.n).filter(|&j| seen[j]).collect()
    }

    /// Nodes that are neither `i` nor descendants of `i`.
    pub fn non_descendants(&self, i: usize) -> Vec<usize> {
        let de = self.descendants(i);
        (0..self.n)
            .filter(|&j| j != i && !de.contains(&j))
            .collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.is_parent(j, i) {
                    out.push((j, i));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&b| b).count()
    }

    /// Kahn toposort, smallest node index first; `Err` on a cycle.
    pub fn topological_order(&self) -> Result<CausalOrder, GraphError> {
        let mut indeg: Vec<usize> = (0..self.n).map(|i| self.parents(i).len()).collect();
        let mut order = Vec::with_capacity(self.n);
        let mut ready: Vec<usize> = (0..self.n).filter(|&i| indeg[i] == 0).collect();
        while !ready.is_empty() {
            ready.sort_unstable();
            let node = ready.remove(0);
            order.push(node);
            for c in self.children(node) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(c);
                }
            }
        }
        if order.len() != self.n {
            return Err(GraphError::Cyclic);
        }
        Ok(CausalOrder { perm: order })
    }

    /// True iff `perm` lists every parent before its child.
    pub fn is_valid_causal_order(&self, perm: &[usize]) -> bool {
        if perm.len() != self.n {
            return false;
        }
        let mut pos = vec![usize::MAX; self.n];
        for (k, &node) in perm.iter().enumerate() {
            if node >= self.n || pos[node] != usize::MAX {
                return false;
            }
            pos[node] = k;
        }
        self.edges().iter().all(|&(j, i)| pos[j] < pos[i])
    }

    /// Relabels nodes: new node `k` is old node `perm[k]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Dag, GraphError> {
        if perm.len() != self.n {
            return Err(GraphError::SizeMismatch(perm.len(), self.n));
        }
        let mut out = Dag::empty(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if self.is_parent(perm[j], perm[i]) {
                    out.adj[i * self.n + j] = true;
                }
            }
        }
        Ok(out)
    }
}

/// A permutation of the nodes in which every parent precedes its children.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalOrder {
    perm: Vec<usize>,
}

impl CausalOrder {
    pub fn new(dag: &Dag, perm: Vec<usize>) -> Result<Self, GraphError> {
        if dag.is_valid_causal_order(&perm) {
            Ok(CausalOrder { perm })
        } else {
            Err(GraphError::InvalidOrder(perm))
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }
}

/// Samples an Erdős–Rényi DAG: a uniformly random node order first, then each
/// forward edge independently with probability `density`; the result is
/// relabeled so that `(0, …, n-1)` is a valid causal order.
pub fn sample_erdos_renyi<R: Rng + ?Sized>(n: usize, density: f64, rng: &mut R) -> Dag {
    assert!(n >= 1, "need at least one node");
    assert!((0.0..=1.0).contains(&density), "density must lie in [0, 1]");
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut sampled = Dag::empty(n);
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.random::<f64>() < density {
                // order[a] → order[b]
                sampled.adj[order[b] * n + order[a]] = true;
            }
        }
    }
    // Relabel with the inverse order so identity becomes a causal order.
    sampled.relabel(&order).expect("relabel by sampling order")
}

/// Transitive closure: edge `j → i` iff `j ∈ An(i)`.
pub fn transitive_closure(g: &Dag) -> Dag {
    let n = g.n();
    let mut out = Dag::empty(n);
    for i in 0..n {
        for j in g.ancestors(i) {
            out.adj[i * n + j] = true;
        }
    }
    out
}

/// Transitive reduction: the unique minimal edge set with the same
/// reachability as `g`.
pub fn transitive_reduction(g: &Dag) -> Dag {
    let n = g.n();
    let closure = transitive_closure(g);
    let mut out = Dag::empty(n);
    for (j, i) in g.edges() {
        // Drop j → i if some other parent k of i is reachable from j.
        let redundant = g
            .parents(i)
            .iter()
            .any(|&k| k != j && closure.is_parent(j, k));
        if !redundant {
            out.adj[i * n + j] = true;
        }
    }
    out
}

/// Per-node surrounding sets `sur(i) = { j≠i : Ch(i) ∪ {i} ⊆ Ch(j) }` and the
/// set of surrounded nodes.
pub fn surrounded_sets(g: &Dag) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n = g.n();
    let children: Vec<Vec<usize>> = (0..n).map(|i| g.children(i)).collect();
    let mut sur = vec![Vec::new(); n];
    for i in 0..n {
        let mut target = children[i].clone();
        target.push(i);
        for j in 0..n {
            if j != i && target.iter().all(|t| children[j].contains(t)) {
                sur[i].push(j);
            }
        }
    }
    let surrounded = (0..n).filter(|&i| !sur[i].is_empty()).collect();
    (sur, surrounded)
}

/// Binary relation matrices as 0/1 matrices:
/// `pa[i][j] = 1 ⟺ j ∈ Pa⁺(i)`, `an[i][j] = 1 ⟺ j ∈ An⁺(i)`,
/// `sur[i][j] = 1 ⟺ Ch⁺(i) ⊆ Ch⁺(j)` (always 1 on the diagonal).
pub struct RelationMatrices {
    pub pa: DMatrix<f64>,
    pub an: DMatrix<f64>,
    pub sur: DMatrix<f64>,
}

pub fn relation_matrices(g: &Dag) -> RelationMatrices {
    let n = g.n();
    let mut pa = DMatrix::zeros(n, n);
    let mut an = DMatrix::zeros(n, n);
    let mut sur = DMatrix::identity(n, n);
    for i in 0..n {
        pa[(i, i)] = 1.0;
        an[(i, i)] = 1.0;
        for j in g.parents(i) {
            pa[(i, j)] = 1.0;
        }
        for j in g.ancestors(i) {
            an[(i, j)] = 1.0;
        }
    }
    let chp: Vec<Vec<usize>> = (0..n).map(|i| g.children_plus(i)).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && chp[i].iter().all(|c| chp[j].contains(c)) {
                sur[(i, j)] = 1.0;
            }
        }
    }
    RelationMatrices { pa, an, sur }
}

/// Searches for a permutation `π` with `adjacency(g1)[i][j] =
/// adjacency(g2)[π(i)][π(j)]`; exhaustive with pruning on degree sequences.
pub fn isomorphic_under_permutation(g1: &Dag, g2: &Dag) -> Result<Option<Vec<usize>>, GraphError> {
    if g1.n() != g2.n() {
        return Err(GraphError::SizeMismatch(g1.n(), g2.n()));
    }
    let n = g1.n();
    if n > MAX_ISOMORPHISM_NODES {
        return Err(GraphError::TooLarge(n));
    }
    if g1.edge_count() != g2.edge_count() {
        return Ok(None);
    }
    let deg = |g: &Dag, i: usize| (g.parents(i).len(), g.children(i).len());
    let deg1: Vec<_> = (0..n).map(|i| deg(g1, i)).collect();
    let deg2: Vec<_> = (0..n).map(|i| deg(g2, i)).collect();
    {
        let mut s1 = deg1.clone();
        let mut s2 = deg2.clone();
        s1.sort_unstable();
        s2.sort_unstable();
        if s1 != s2 {
            return Ok(None);
        }
    }

    // Depth-first assignment of g1-node `i` to a g2-node with matching degrees.
    fn assign(
        i: usize,
        n: usize,
        g1: &Dag,
        g2: &Dag,
        deg1: &[(usize, usize)],
        deg2: &[(usize, usize)],
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if i == n {
            return true;
        }
        for cand in 0..n {
            if used[cand] || deg1[i] != deg2[cand] {
                continue;
            }
            let consistent = (0..i).all(|k| {
                g1.is_parent(k, i) == g2.is_parent(perm[k], cand)
                    && g1.is_parent(i, k) == g2.is_parent(cand, perm[k])
            });
            if !consistent {
                continue;
            }
            perm.push(cand);
            used[cand] = true;
            if assign(i + 1, n, g1, g2, deg1, deg2, perm, used) {
                return true;
            }
            perm.pop();
            used[cand] = false;
        }
        false
    }

    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    if assign(0, n, g1, g2, &deg1, &deg2, &mut perm, &mut used) {
        Ok(Some(perm))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Figure-style test graph: edges {0→1, 0→2, 1→3, 2→3}.
    fn diamond() -> Dag {
        Dag::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn er_zero_density_is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = sample_erdos_renyi(3, 0.0, &mut rng);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn er_unit_density_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = sample_erdos_renyi(3, 1.0, &mut rng);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g, Dag::complete(3));
    }

    #[test]
    fn er_expected_edge_count() {
        // Monte-Carlo mean of C(5,2) * 0.5 = 5 over 2000 seeds; per-graph
        // variance is 10 * 0.25 = 2.5, so the mean has sigma ~ 0.035.
        let mut total = 0usize;
        for seed in 0..2000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            total += sample_erdos_renyi(5, 0.5, &mut rng).edge_count();
        }
        let mean = total as f64 / 2000.0;
        assert!((mean - 5.0).abs() < 0.12, "mean edge count {mean}");
    }

    #[test]
    fn closure_of_chain() {
        let g = Dag::chain(3);
        let tc = transitive_closure(&g);
        assert_eq!(tc.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn closure_of_empty_is_empty() {
        let tc = transitive_closure(&Dag::empty(4));
        assert_eq!(tc.edge_count(), 0);
    }

    #[test]
    fn closure_of_diamond_adds_long_edge() {
        let tc = transitive_closure(&diamond());
        let mut expected = diamond().edges();
        expected.push((0, 3));
        expected.sort_unstable();
        let mut got = tc.edges();
        got.sort_unstable();
        assert_eq!(got, expected);
    }

    #[test]
    fn reduction_drops_shortcut() {
        let g = Dag::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let tr = transitive_reduction(&g);
        assert_eq!(tr.edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn reduction_of_empty_is_empty() {
        assert_eq!(transitive_reduction(&Dag::empty(3)).edge_count(), 0);
    }

    /// Brute-force minimal edge subset preserving reachability.
    fn brute_force_reduction(g: &Dag) -> Dag {
        let edges = g.edges();
        let target = transitive_closure(g);
        let mut best: Option<Dag> = None;
        for mask in 0..(1u32 << edges.len()) {
            let subset: Vec<(usize, usize)> = edges
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            let cand = Dag::from_edges(g.n(), &subset).unwrap();
            if transitive_closure(&cand) == target
                && best
                    .as_ref()
                    .is_none_or(|b| cand.edge_count() < b.edge_count())
            {
                best = Some(cand);
            }
        }
        best.unwrap()
    }

    #[test]
    fn reduction_of_complete_dag_matches_brute_force() {
        let g = Dag::complete(3);
        let tr = transitive_reduction(&g);
        assert_eq!(tr, brute_force_reduction(&g));
        assert_eq!(tr, Dag::chain(3));
    }

    #[test]
    fn surrounded_sets_on_figure_graphs() {
        let (sur, s) = surrounded_sets(&diamond());
        assert_eq!(s, vec![3]);
        assert_eq!(sur[3], vec![1, 2]);

        let complete3 = Dag::complete(3);
        let (sur, s) = surrounded_sets(&complete3);
        assert_eq!(s, vec![1, 2]);
        assert_eq!(sur[1], vec![0]);
        assert_eq!(sur[2], vec![0, 1]);
    }

    #[test]
    fn surrounded_sets_empty_graph() {
        let (sur, s) = surrounded_sets(&Dag::empty(4));
        assert!(s.is_empty());
        assert!(sur.iter().all(|v| v.is_empty()));
    }

    #[test]
    fn relation_matrices_chain_and_empty() {
        let rel = relation_matrices(&Dag::chain(2));
        assert_eq!(rel.pa, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]));

        let rel = relation_matrices(&Dag::empty(3));
        assert_eq!(rel.pa, DMatrix::identity(3, 3));
        assert_eq!(rel.an, DMatrix::identity(3, 3));
        assert_eq!(rel.sur, DMatrix::identity(3, 3));
    }

    #[test]
    fn relation_matrices_diamond_ancestor_row() {
        let rel = relation_matrices(&diamond());
        for j in 0..4 {
            assert_eq!(rel.an[(3, j)], 1.0, "An+ of sink contains {j}");
        }
    }

    #[test]
    fn isomorphism_identity_and_relabel() {
        let g = Dag::chain(3);
        assert_eq!(
            isomorphic_under_permutation(&g, &g).unwrap(),
            Some(vec![0, 1, 2])
        );

        let flipped = Dag::from_edges(2, &[(1, 0)]).unwrap();
        let chain = Dag::chain(2);
        let perm = isomorphic_under_permutation(&chain, &flipped)
            .unwrap()
            .unwrap();
        assert_eq!(perm, vec![1, 0]);
    }

    #[test]
    fn isomorphism_rejects_structurally_different() {
        let chain = Dag::chain(3);
        let fork = Dag::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        assert_eq!(isomorphic_under_permutation(&chain, &fork).unwrap(), None);
    }

    #[test]
    fn isomorphism_rejects_oversized() {
        let g = Dag::empty(11);
        assert!(matches!(
            isomorphic_under_permutation(&g, &g),
            Err(GraphError::TooLarge(11))
        ));
    }

    #[test]
    fn serde_round_trip() {
        let g = diamond();
        let json = serde_json::to_string(&g).unwrap();
        let back: Dag = serde_json::from_str(&json).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn cycle_is_rejected() {
        assert!(Dag::from_edges(2, &[(0, 1), (1, 0)]).is_err());
        assert!(Dag::from_edges(2, &[(0, 0)]).is_err());
    }

    proptest! {
        #[test]
        fn sampled_dag_identity_order_is_causal(seed in 0u64..500, n in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = sample_erdos_renyi(n, 0.5, &mut rng);
            let identity: Vec<usize> = (0..n).collect();
            prop_assert!(g.is_valid_causal_order(&identity));
        }

        #[test]
        fn closure_is_idempotent(seed in 0u64..200, n in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = sample_erdos_renyi(n, 0.5, &mut rng);
            let tc = transitive_closure(&g);
            prop_assert_eq!(transitive_closure(&tc), tc);
        }

        #[test]
        fn closure_of_reduction_is_closure(seed in 0u64..200, n in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = sample_erdos_renyi(n, 0.6, &mut rng);
            let tr = transitive_reduction(&g);
            prop_assert_eq!(transitive_closure(&tr), transitive_closure(&g));
        }
    }
}
