//! Tree functions and their generalized break divisor sets, the
//! bijection between stability conditions and numerical-N tree
//! functions, and the stratum-by-stratum equivalence report.

use std::collections::{BTreeMap, BTreeSet};

use crate::divisor::{indegree_set, Divisor};
use crate::error::{Error, Result};
use crate::multigraph::{Caps, GraphMorphism, Multigraph};
use crate::orbit::{classify_type, pushforward as orbit_pushforward, OrbitPair, UpperSet};
use crate::set::{EdgeSet, VertexSet};
use crate::spanning::{
    complexity_u64, connected_spanning_subgraphs, morphism_tree_pullback, spanning_trees,
};
use crate::vstability::{vset, VStability};

/// A divisor per spanning tree; every value has degree `d - b1(Γ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeFunction {
    degree: i64,
    values: BTreeMap<EdgeSet, Divisor>,
}

impl TreeFunction {
    pub fn new(g: &Multigraph, degree: i64, values: BTreeMap<EdgeSet, Divisor>) -> Result<Self> {
        let trees: BTreeSet<EdgeSet> = spanning_trees(g)?.into_iter().collect();
        let keys: BTreeSet<EdgeSet> = values.keys().copied().collect();
        if keys != trees {
            return Err(Error::Invalid(
                "tree function must assign one divisor to every spanning tree".into(),
            ));
        }
        let want = degree - g.genus() as i64;
        for (t, d) in &values {
            if d.degree() != want {
                return Err(Error::Invalid(format!(
                    "tree {t:?} carries degree {} instead of {want}",
                    d.degree()
                )));
            }
        }
        Ok(TreeFunction { degree, values })
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn value(&self, tree: EdgeSet) -> &Divisor {
        &self.values[&tree]
    }

    pub fn values(&self) -> &BTreeMap<EdgeSet, Divisor> {
        &self.values
    }
}

/// `BD_I(G)`: the union over spanning trees inside `G` of the tree value
/// translated by every indegree divisor of the remaining edges.
pub fn bd_set(g: &Multigraph, i: &TreeFunction, kept: EdgeSet) -> Result<BTreeSet<Divisor>> {
    if g.n_vertices() > 1 && g.components_of(g.all_vertices(), kept).len() != 1 {
        return Err(Error::DisconnectedSubgraph);
    }
    let mut out = BTreeSet::new();
    for (tree, base) in &i.values {
        if !tree.is_subset(kept) {
            continue;
        }
        for extra in indegree_set(g, kept.minus(*tree)) {
            out.insert(base.add(&extra));
        }
    }
    Ok(out)
}

/// The whole BD family as an upper set over the connected spanning
/// subgraphs.
pub fn bd_upper_set(g: &Multigraph, i: &TreeFunction, caps: &Caps) -> Result<UpperSet> {
    let mut out = UpperSet::new(i.degree);
    for kept in connected_spanning_subgraphs(g, caps)? {
        for d in bd_set(g, i, kept)? {
            out.insert(kept, d);
        }
    }
    Ok(out)
}

/// Whether `|BD_I(Γ)| = c(Γ)`. When the equality holds, the hereditary
/// equalities on every connected spanning subgraph and every single
/// non-loop contraction are asserted as an internal consistency check.
pub fn is_numerical_n(g: &Multigraph, i: &TreeFunction, caps: &Caps) -> Result<bool> {
    let top = bd_set(g, i, g.all_edges())?;
    let c = complexity_u64(g)?;
    assert!(
        top.len() as u64 >= c,
        "BD-set size fell below the spanning tree count"
    );
    if top.len() as u64 != c {
        return Ok(false);
    }
    // Heredity downward: every connected spanning subgraph.
    for kept in connected_spanning_subgraphs(g, caps)? {
        let sub = g.delete_edges(kept.complement(g.n_edges()));
        assert_eq!(
            bd_set(g, i, kept)?.len() as u64,
            complexity_u64(&sub)?,
            "restriction heredity failed on {kept:?}"
        );
    }
    // Heredity along single-edge genus-preserving contractions.
    for ei in 0..g.n_edges() {
        if g.edge(ei).is_loop() {
            continue;
        }
        let m = g.contract_edges(EdgeSet::singleton(ei));
        let pushed = pushforward_tree_function(&m, i)?;
        let top = bd_set(m.target(), &pushed, m.target().all_edges())?;
        assert_eq!(
            top.len() as u64,
            complexity_u64(m.target())?,
            "contraction heredity failed on edge {ei}"
        );
    }
    Ok(true)
}

/// Restrict a tree function to a connected spanning subgraph: keep the
/// trees avoiding `s`, re-indexed to the subgraph's edge ids.
pub fn restrict_tree_function(
    g: &Multigraph,
    i: &TreeFunction,
    s: EdgeSet,
) -> Result<TreeFunction> {
    let sub = g.delete_edges(s);
    if !sub.is_connected() {
        return Err(Error::DisconnectedSubgraph);
    }
    let mut values = BTreeMap::new();
    for (tree, d) in &i.values {
        if !tree.is_disjoint(s) {
            continue;
        }
        let translated = EdgeSet::from_iter(tree.iter().map(|ei| {
            sub.edge_by_label(&g.edge(ei).label)
                .expect("kept edge survives deletion")
        }));
        values.insert(translated, d.clone());
    }
    TreeFunction::new(&sub, i.degree - s.len() as i64, values)
}

/// Push a tree function forward along a genus-preserving morphism:
/// a target tree pulls back to a source tree containing the contracted
/// edges, whose value then collapses onto the vertex fibers.
pub fn pushforward_tree_function(f: &GraphMorphism, i: &TreeFunction) -> Result<TreeFunction> {
    let pullback = morphism_tree_pullback(f)?;
    let mut values = BTreeMap::new();
    for (tree_t, tree_s) in pullback {
        let pair = OrbitPair::new(tree_s, i.value(tree_s).clone());
        let pushed = orbit_pushforward(f, &pair);
        debug_assert_eq!(pushed.kept, tree_t);
        values.insert(tree_t, pushed.divisor);
    }
    TreeFunction::new(f.target(), i.degree, values)
}

/// The tree function of a valid stability condition: on each spanning
/// tree the unique divisor whose sum over either side of every tree
/// edge is `n_W - b1(Γ[W])`, solved by peeling leaves.
pub fn tree_function_from_vstability(
    g: &Multigraph,
    n: &VStability,
    caps: &Caps,
) -> Result<TreeFunction> {
    n.ensure_valid(g, caps)?;
    let nv = g.n_vertices();
    let degree = n.degree();
    let mut values = BTreeMap::new();
    for tree in spanning_trees(g)? {
        let mut dvals: Vec<Option<i64>> = vec![None; nv];
        let mut alive_edges = tree;
        let mut alive = vec![true; nv];
        for _ in 0..nv.saturating_sub(1) {
            let (leaf, e) = (0..nv)
                .filter(|&v| alive[v])
                .filter_map(|v| {
                    let incident: Vec<usize> = alive_edges
                        .iter()
                        .filter(|&ei| {
                            let (a, b) = g.edge(ei).ends;
                            a == v || b == v
                        })
                        .collect();
                    (incident.len() == 1).then_some((v, incident[0]))
                })
                .next()
                .expect("a tree always has a leaf");
            let side = g.tree_side(tree, e, leaf);
            let rhs = n.value(g, side) - g.induced_genus(side) as i64;
            let known: i64 = side
                .iter()
                .filter(|&v| v != leaf)
                .map(|v| dvals[v].unwrap())
                .sum();
            dvals[leaf] = Some(rhs - known);
            alive[leaf] = false;
            alive_edges.remove(e);
        }
        let solved: i64 = dvals.iter().flatten().sum();
        if let Some(root) = (0..nv).find(|&v| dvals[v].is_none()) {
            dvals[root] = Some(degree - g.genus() as i64 - solved);
        }
        let d = Divisor(dvals.into_iter().map(|v| v.unwrap()).collect());
        // Both sides of every tree edge must reproduce the defining sums.
        for e in tree.iter() {
            for v in [g.edge(e).ends.0, g.edge(e).ends.1] {
                let side = g.tree_side(tree, e, v);
                assert_eq!(
                    d.sum_over(side),
                    n.value(g, side) - g.induced_genus(side) as i64,
                    "tree-edge sums are inconsistent"
                );
            }
        }
        values.insert(tree, d);
    }
    TreeFunction::new(g, degree, values)
}

/// Spanning trees adapted to a biconnected subset: a tree inside each
/// side plus a single crossing edge. The first tree of each side comes
/// from the ascending greedy order, the sample from the descending one.
fn adapted_trees(g: &Multigraph, w: VertexSet) -> Vec<EdgeSet> {
    let wc = w.complement(g.n_vertices());
    let mut side_w = vec![g.greedy_tree_of(w, false).expect("side is connected")];
    let mut side_wc = vec![g.greedy_tree_of(wc, false).expect("side is connected")];
    for (side, trees) in [(w, &mut side_w), (wc, &mut side_wc)] {
        if let Some(t) = g.greedy_tree_of(side, true) {
            if !trees.contains(&t) {
                trees.push(t);
            }
        }
    }
    let crossing = g.edges_between(g.all_edges(), w, wc);
    let mut out = Vec::new();
    for tw in &side_w {
        for twc in &side_wc {
            for e in crossing.iter() {
                out.push(tw.union(*twc).union(EdgeSet::singleton(e)));
            }
        }
    }
    out
}

/// Recover the stability condition of a numerical-N tree function:
/// `n_W = I(T)_W + b1(Γ[W])` for any tree adapted to `W`. All sampled
/// adapted trees must agree, and the result must validate.
pub fn vstability_from_tree_function(
    g: &Multigraph,
    i: &TreeFunction,
    caps: &Caps,
) -> Result<VStability> {
    if !is_numerical_n(g, i, caps)? {
        return Err(Error::NotNumericalN);
    }
    let pairs = g.biconnected_pairs(caps)?;
    let mut values = BTreeMap::new();
    for w in pairs {
        let trees = adapted_trees(g, w);
        let candidates: BTreeSet<i64> = trees
            .iter()
            .map(|t| i.value(*t).sum_over(w) + g.induced_genus(w) as i64)
            .collect();
        if candidates.len() != 1 {
            return Err(Error::AdaptedTreeDisagreement(format!("{w:?}")));
        }
        values.insert(w, candidates.into_iter().next().unwrap());
    }
    let n = VStability::new(g, i.degree, values, caps)?;
    n.ensure_valid(g, caps)?;
    Ok(n)
}

/// One stratum mismatch between the two routes to the stable divisors.
#[derive(Debug, Clone)]
pub struct StratumMismatch {
    pub kept: EdgeSet,
    pub only_in_vset: Vec<Divisor>,
    pub only_in_bd: Vec<Divisor>,
}

/// Full equivalence report: both routes stratum by stratum, the type
/// classification, the component count, and the round trip through the
/// tree function.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub mismatches: Vec<StratumMismatch>,
    pub flags: crate::orbit::TypeFlags,
    pub component_count: u64,
    pub complexity: u64,
    pub roundtrip_ok: bool,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
            && self.flags.all()
            && self.component_count == self.complexity
            && self.roundtrip_ok
    }
}

/// Check, stratum by stratum, that the stable divisors of `n` coincide
/// with the break divisors of its tree function, that the resulting
/// upper set has every type property, and that the tree function maps
/// back to `n`.
pub fn verify_equivalence(
    g: &Multigraph,
    n: &VStability,
    caps: &Caps,
) -> Result<EquivalenceReport> {
    let p = vset(g, n, caps)?;
    let i = tree_function_from_vstability(g, n, caps)?;
    let mut mismatches = Vec::new();
    for kept in connected_spanning_subgraphs(g, caps)? {
        let via_vset = p.stratum(kept).cloned().unwrap_or_default();
        let via_bd = bd_set(g, &i, kept)?;
        if via_vset != via_bd {
            mismatches.push(StratumMismatch {
                kept,
                only_in_vset: via_vset.difference(&via_bd).cloned().collect(),
                only_in_bd: via_bd.difference(&via_vset).cloned().collect(),
            });
        }
    }
    let flags = classify_type(g, &p, caps)?;
    let roundtrip_ok = vstability_from_tree_function(g, &i, caps)
        .map(|back| &back == n)
        .unwrap_or(false);
    Ok(EquivalenceReport {
        mismatches,
        flags,
        component_count: p.stratum_size(g.all_edges()) as u64,
        complexity: complexity_u64(g)?,
        roundtrip_ok,
    })
}

/// Diagnostic for the counting argument behind the lower bound
/// `|BD_I(Γ)| >= c(Γ)`: for a non-loop non-bridge edge `e = uv`, the
/// map `D ↦ D + u` from the deletion and the `K(D)`-shifted lift from
/// the contraction must land injectively and disjointly in `BD_I(Γ)`.
pub fn injection_diagnostic(g: &Multigraph, i: &TreeFunction, e: usize) -> Result<bool> {
    let edge = g.edge(e);
    if edge.is_loop() {
        return Err(Error::Invalid("diagnostic needs a non-loop edge".into()));
    }
    let (u, v) = edge.ends;
    let deleted = g.delete_edges(EdgeSet::singleton(e));
    if !deleted.is_connected() {
        return Err(Error::Invalid("diagnostic needs a non-bridge edge".into()));
    }
    let top = bd_set(g, i, g.all_edges())?;
    let del_restricted = restrict_tree_function(g, i, EdgeSet::singleton(e))?;
    let del_top = bd_set(&deleted, &del_restricted, deleted.all_edges())?;
    let m = g.contract_edges(EdgeSet::singleton(e));
    let con = pushforward_tree_function(&m, i)?;
    let con_top = bd_set(m.target(), &con, m.target().all_edges())?;

    // Image of +u.
    let mut plus_u = BTreeSet::new();
    for d in &del_top {
        let mut shifted = d.clone();
        shifted.0[u] += 1;
        assert!(top.contains(&shifted), "+u must land in the BD-set");
        plus_u.insert(shifted);
    }
    assert_eq!(plus_u.len(), del_top.len(), "+u must stay injective");

    // Image of the shifted contraction lift.
    let mut lifted = BTreeSet::new();
    for d in &con_top {
        // Expand the contracted divisor back to the source: the merged
        // fiber value lands on u, every other vertex keeps its value.
        let mut expanded = vec![0i64; g.n_vertices()];
        for tv in 0..m.target().n_vertices() {
            let fiber = m.vertex_preimage(VertexSet::singleton(tv));
            expanded[fiber.min_elem().unwrap()] = d.0[tv];
        }
        // The fiber of {u, v} is represented by min(u, v); make u carry it.
        if u.min(v) != u {
            expanded.swap(u, v.min(u));
        }
        let mut probe = Divisor(expanded);
        assert!(
            top.contains(&probe),
            "contraction lift must land in the BD-set"
        );
        // K(D): push the largest possible amount from u to v.
        let mut k = 0usize;
        loop {
            let mut next = probe.clone();
            next.0[u] -= 1;
            next.0[v] += 1;
            if top.contains(&next) {
                probe = next;
                k += 1;
            } else {
                break;
            }
        }
        let _ = k;
        lifted.insert(probe);
    }
    assert_eq!(lifted.len(), con_top.len(), "shifted lift must stay injective");
    Ok(plus_u.is_disjoint(&lifted))
}
