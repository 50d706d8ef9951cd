//! Spanning subgraphs and spanning trees: enumeration, complexity,
//! deletion-contraction, genus profiles, and the tree maps induced by
//! restriction and genus-preserving morphisms.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::divisor::complexity_int;
use crate::error::{Error, Result};
use crate::multigraph::{Caps, GraphMorphism, Multigraph, UnionFind};
use crate::set::EdgeSet;

/// A spanning subgraph, identified by its kept edge set. The order on
/// spanning subgraphs is reverse inclusion of deleted sets, i.e. plain
/// inclusion of kept sets.
pub type SpanningSubgraph = EdgeSet;

/// All spanning trees, as kept-edge sets in lexicographic order on the
/// sorted edge-id sequences. Enumerated by recursive deletion-contraction
/// on the lowest-id non-loop edge.
pub fn spanning_trees(g: &Multigraph) -> Result<Vec<EdgeSet>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut out = Vec::new();
    let mut uf = UnionFind::new(g.n_vertices());
    let n_components = uf.class_count(g.n_vertices());
    rec(g, &mut uf, n_components, 0, EdgeSet::empty(), &mut out);
    out.sort_unstable_by_key(|t| t.iter().collect::<Vec<_>>());
    return Ok(out);

    fn rec(
        g: &Multigraph,
        uf: &mut UnionFind,
        components: usize,
        next_edge: usize,
        chosen: EdgeSet,
        out: &mut Vec<EdgeSet>,
    ) {
        if components == 1 {
            out.push(chosen);
            return;
        }
        // Find the pivot: lowest-id remaining edge that is not a loop in
        // the contracted graph.
        let mut pivot = None;
        for ei in next_edge..g.n_edges() {
            let (a, b) = g.edge(ei).ends;
            if uf.find(a) != uf.find(b) {
                pivot = Some(ei);
                break;
            }
        }
        let Some(ei) = pivot else {
            return; // dead branch: cannot reconnect
        };
        let (a, b) = g.edge(ei).ends;
        // Contract branch first: trees containing the pivot sort earlier.
        let mut uf2 = uf.clone();
        uf2.union(a, b);
        let mut with = chosen;
        with.insert(ei);
        rec(g, &mut uf2, components - 1, ei + 1, with, out);
        rec(g, uf, components, ei + 1, chosen, out);
    }
}

/// All connected spanning subgraphs, sorted by (deleted-set size, kept
/// set). The full graph comes first.
pub fn connected_spanning_subgraphs(g: &Multigraph, caps: &Caps) -> Result<Vec<EdgeSet>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    caps.check_edges(g)?;
    let all = g.all_edges();
    let mut out: Vec<EdgeSet> = all
        .subsets()
        .into_iter()
        .filter(|&kept| {
            g.components_of(g.all_vertices(), kept).len() == 1 || g.n_vertices() <= 1
        })
        .collect();
    out.sort_unstable_by_key(|kept| (all.minus(*kept).len(), *kept));
    Ok(out)
}

/// The number of spanning trees, by the matrix-tree determinant.
pub fn complexity(g: &Multigraph) -> Result<BigUint> {
    complexity_int(g)
}

/// `complexity` clamped to u64 for callers that compare against
/// enumerated set sizes.
pub fn complexity_u64(g: &Multigraph) -> Result<u64> {
    let c = complexity_int(g)?;
    u64::try_from(&c).map_err(|_| Error::Overflow("complexity exceeds u64"))
}

/// `n_h` = number of connected spanning subgraphs of genus `h`, for
/// h = 0..g(Γ).
pub fn genus_profile(g: &Multigraph, caps: &Caps) -> Result<BTreeMap<usize, u64>> {
    let subs = connected_spanning_subgraphs(g, caps)?;
    let mut profile: BTreeMap<usize, u64> = BTreeMap::new();
    for kept in subs {
        let h = g.delete_edges(kept.complement(g.n_edges())).genus();
        *profile.entry(h).or_insert(0) += 1;
    }
    Ok(profile)
}

/// The natural inclusion of spanning trees of `Γ∖S` into those of `Γ`;
/// the image is the set of trees avoiding `s`. On kept-edge sets the map
/// is the identity, so this returns the image keyed by itself.
pub fn restrict_tree_inclusion(
    g: &Multigraph,
    s: EdgeSet,
) -> Result<BTreeMap<EdgeSet, EdgeSet>> {
    let sub = g.delete_edges(s);
    if !sub.is_connected() {
        return Err(Error::DisconnectedSubgraph);
    }
    let trees = spanning_trees(g)?;
    Ok(trees
        .into_iter()
        .filter(|t| t.is_disjoint(s))
        .map(|t| (t, t))
        .collect())
}

/// The pullback of spanning trees along a genus-preserving morphism:
/// a tree of the target maps to its edge preimage plus all contracted
/// edges. The image is the set of source trees containing every
/// contracted edge.
pub fn morphism_tree_pullback(f: &GraphMorphism) -> Result<BTreeMap<EdgeSet, EdgeSet>> {
    if !f.is_genus_preserving() {
        return Err(Error::GenusDropping {
            from: f.source().genus(),
            to: f.target().genus(),
        });
    }
    let mut out = BTreeMap::new();
    for t in spanning_trees(f.target())? {
        let lifted = f.edge_image(t).union(f.contracted());
        out.insert(t, lifted);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spanning_tree_examples() {
        let path = Multigraph::path(3);
        assert_eq!(spanning_trees(&path).unwrap(), vec![path.all_edges()]);
        let vine = Multigraph::vine(4);
        let trees = spanning_trees(&vine).unwrap();
        assert_eq!(trees.len(), 4);
        assert_eq!(trees[0], EdgeSet::singleton(0));
        let tri = Multigraph::cycle(3);
        assert_eq!(
            spanning_trees(&tri).unwrap(),
            vec![
                EdgeSet::from_iter([0, 1]),
                EdgeSet::from_iter([0, 2]),
                EdgeSet::from_iter([1, 2]),
            ]
        );
        let disc = Multigraph::from_edge_list(3, &[(0, 1)]).unwrap();
        assert!(spanning_trees(&disc).is_err());
    }

    #[test]
    fn tree_shape() {
        let g = crate::corpus::nonclassical_graph();
        for t in spanning_trees(&g).unwrap() {
            assert_eq!(t.len(), g.n_vertices() - 1);
            assert_eq!(g.components_of(g.all_vertices(), t).len(), 1);
        }
    }

    #[test]
    fn connected_subgraph_examples() {
        let caps = Caps::default();
        let path = Multigraph::path(3);
        assert_eq!(
            connected_spanning_subgraphs(&path, &caps).unwrap(),
            vec![path.all_edges()]
        );
        let tri = Multigraph::cycle(3);
        assert_eq!(connected_spanning_subgraphs(&tri, &caps).unwrap().len(), 4);
        let vine = Multigraph::vine(2);
        assert_eq!(connected_spanning_subgraphs(&vine, &caps).unwrap().len(), 3);
    }

    #[test]
    fn complexity_examples() {
        assert_eq!(complexity_u64(&Multigraph::path(5)).unwrap(), 1);
        assert_eq!(complexity_u64(&Multigraph::theta()).unwrap(), 3);
        let g = crate::corpus::nonclassical_graph();
        assert_eq!(
            complexity_u64(&g).unwrap(),
            spanning_trees(&g).unwrap().len() as u64
        );
    }

    #[test]
    fn deletion_contraction_identity() {
        for g in [
            Multigraph::cycle(4),
            Multigraph::theta(),
            crate::corpus::nonclassical_graph(),
        ] {
            for ei in 0..g.n_edges() {
                if g.edge(ei).is_loop() {
                    continue;
                }
                let deleted = g.delete_edges(EdgeSet::singleton(ei));
                let contracted = g.contract_edges(EdgeSet::singleton(ei));
                let lhs = complexity(&g).unwrap();
                let del = if deleted.is_connected() {
                    complexity(&deleted).unwrap()
                } else {
                    0u32.into()
                };
                let con = complexity(contracted.target()).unwrap();
                assert_eq!(lhs, del + con, "edge {ei}");
            }
        }
    }

    #[test]
    fn genus_profile_examples() {
        let caps = Caps::default();
        let path = Multigraph::path(4);
        assert_eq!(
            genus_profile(&path, &caps).unwrap(),
            BTreeMap::from([(0, 1)])
        );
        let tri = Multigraph::cycle(3);
        assert_eq!(
            genus_profile(&tri, &caps).unwrap(),
            BTreeMap::from([(0, 3), (1, 1)])
        );
        let theta = Multigraph::theta();
        assert_eq!(
            genus_profile(&theta, &caps).unwrap(),
            BTreeMap::from([(0, 3), (1, 3), (2, 1)])
        );
        // n_0 = c and the profile sums to the connected subgraph count.
        for g in [tri, theta, crate::corpus::nonclassical_graph()] {
            let profile = genus_profile(&g, &caps).unwrap();
            assert_eq!(profile[&0], complexity_u64(&g).unwrap());
            assert_eq!(profile[&g.genus()], 1);
            let total: u64 = profile.values().sum();
            assert_eq!(
                total,
                connected_spanning_subgraphs(&g, &caps).unwrap().len() as u64
            );
        }
    }

    #[test]
    fn restriction_inclusion_examples() {
        let tri = Multigraph::cycle(3);
        let id = restrict_tree_inclusion(&tri, EdgeSet::empty()).unwrap();
        assert_eq!(id.len(), 3);
        // The only tree of the triangle avoiding e0 is {e1, e2}.
        let avoid = restrict_tree_inclusion(&tri, EdgeSet::singleton(0)).unwrap();
        assert_eq!(avoid.len(), 1);
        assert!(avoid.contains_key(&EdgeSet::from_iter([1, 2])));
        // In general the image is the set of trees disjoint from s.
        let square = Multigraph::cycle(4);
        let avoid = restrict_tree_inclusion(&square, EdgeSet::singleton(2)).unwrap();
        assert_eq!(avoid.len(), 1);
        for (from, to) in &avoid {
            assert_eq!(from, to);
            assert!(to.is_disjoint(EdgeSet::singleton(2)));
        }
        let vine = Multigraph::vine(2);
        let single = restrict_tree_inclusion(&vine, EdgeSet::singleton(1)).unwrap();
        assert_eq!(single.len(), 1);
        assert!(single.contains_key(&EdgeSet::singleton(0)));
        // Removing a whole cut disconnects and errors.
        assert!(restrict_tree_inclusion(&vine, vine.all_edges()).is_err());
    }

    #[test]
    fn morphism_pullback_examples() {
        let square = Multigraph::cycle(4);
        let id = GraphMorphism::identity(&square);
        let map = morphism_tree_pullback(&id).unwrap();
        assert_eq!(map.len(), 4);
        assert!(map.iter().all(|(k, v)| k == v));

        // Contract one edge of the square: genus preserved, trees of the
        // triangle lift to trees of the square containing that edge.
        let m = square.contract_edges(EdgeSet::singleton(3));
        assert!(m.is_genus_preserving());
        let map = morphism_tree_pullback(&m).unwrap();
        assert_eq!(map.len(), 3);
        for lifted in map.values() {
            assert!(lifted.contains(3));
            assert_eq!(
                square.components_of(square.all_vertices(), *lifted).len(),
                1
            );
            assert_eq!(lifted.len(), 3);
        }

        // Contracting a loop drops the genus and is rejected.
        let loopy = Multigraph::from_edge_list(2, &[(0, 1), (1, 1)]).unwrap();
        let m = loopy.contract_edges(EdgeSet::singleton(1));
        assert!(morphism_tree_pullback(&m).is_err());
    }

    #[test]
    fn single_vertex_graph() {
        let g = Multigraph::from_edge_list(1, &[(0, 0), (0, 0)]).unwrap();
        assert_eq!(spanning_trees(&g).unwrap(), vec![EdgeSet::empty()]);
        assert_eq!(complexity_u64(&g).unwrap(), 1);
        let caps = Caps::default();
        let subs = connected_spanning_subgraphs(&g, &caps).unwrap();
        assert_eq!(subs.len(), 4);
    }
}
