//! Tour of the graph layer: random DAG generation, transitive closure and
//! reduction, surrounded sets, relation matrices, and isomorphism testing.
//!
//! Run with: cargo run --example dag_relations

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use score_crl::graph::{
    isomorphic_under_permutation, relation_matrices, sample_erdos_renyi, surrounded_sets,
    transitive_closure, transitive_reduction, Dag,
};

fn main() {
    // The diamond graph: 0 -> {1, 2} -> 3.
    let diamond = Dag::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
    println!("diamond edges: {:?}", diamond.edges());
    println!("closure adds:  {:?}", transitive_closure(&diamond).edges());
    println!(
        "reduction:     {:?}",
        transitive_reduction(&diamond).edges()
    );

    let (sur, surrounded) = surrounded_sets(&diamond);
    println!("surrounded nodes {surrounded:?} (sur(3) = {:?})", sur[3]);

    let rel = relation_matrices(&diamond);
    println!(
        "ancestor row of the sink: {:?}",
        (0..4).map(|j| rel.an[(3, j)]).collect::<Vec<_>>()
    );

    // Random generation: identity labels are always a valid causal order.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = sample_erdos_renyi(6, 0.5, &mut rng);
    println!("sampled 6-node DAG with {} edges", g.edge_count());
    assert!(g.is_valid_causal_order(&[0, 1, 2, 3, 4, 5]));

    // Isomorphism up to node relabeling.
    let relabeled = g.relabel(&[5, 4, 3, 2, 1, 0]).unwrap();
    let perm = isomorphic_under_permutation(&g, &relabeled).unwrap();
    println!("relabeled copy is isomorphic via {perm:?}");
}
