//! The poset of divisors on spanning subgraphs: order relation,
//! push-forward along graph morphisms, upper sets, and the
//! (numerical) sN/N-type classification.

use std::collections::{BTreeMap, BTreeSet};

use crate::divisor::{indegree_set, is_indegree_realizable, q_reduce, Divisor};
use crate::error::{Error, Result};
use crate::multigraph::{Caps, GraphMorphism, Multigraph};
use crate::set::EdgeSet;
use crate::spanning::{complexity_u64, connected_spanning_subgraphs};

/// An element `(G, D)`: a spanning subgraph given by its kept edges and
/// a divisor on it. For ambient degree `d` the divisor has degree
/// `d - |E(G)^c|`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrbitPair {
    pub kept: EdgeSet,
    pub divisor: Divisor,
}

impl OrbitPair {
    pub fn new(kept: EdgeSet, divisor: Divisor) -> Self {
        OrbitPair { kept, divisor }
    }

    /// The ambient degree `|D| + |E(G)^c|` this pair lives in.
    pub fn ambient_degree(&self, g: &Multigraph) -> i64 {
        self.divisor.degree() + (g.n_edges() - self.kept.len()) as i64
    }

    /// Rank of the pair in the graded poset.
    pub fn rank(&self) -> usize {
        self.kept.len()
    }
}

/// `a <= b` in the poset: kept edges of `a` inside those of `b`, and the
/// divisor difference realizable as an indegree divisor of the extra
/// edges.
pub fn leq(g: &Multigraph, a: &OrbitPair, b: &OrbitPair) -> Result<bool> {
    let da = a.ambient_degree(g);
    let db = b.ambient_degree(g);
    if da != db {
        return Err(Error::DegreeMismatch { left: da, right: db });
    }
    if !a.kept.is_subset(b.kept) {
        return Ok(false);
    }
    let diff = b.kept.minus(a.kept);
    Ok(is_indegree_realizable(g, diff, &b.divisor.sub(&a.divisor)))
}

/// Push an orbit pair forward along a morphism: the kept edges map to
/// their preimage pattern in the target and the divisor collapses onto
/// the fibers, with one extra unit for every deleted contracted edge
/// inside a fiber.
pub fn pushforward(f: &GraphMorphism, a: &OrbitPair) -> OrbitPair {
    let g = f.source();
    let gt = f.target();
    let deleted = a.kept.complement(g.n_edges());
    let target_kept = f.edge_preimage(a.kept);
    let deleted_contracted = deleted.intersect(f.contracted());
    let mut values = Vec::with_capacity(gt.n_vertices());
    for v in 0..gt.n_vertices() {
        let fiber = f.vertex_preimage(crate::set::VertexSet::singleton(v));
        let base = a.divisor.sum_over(fiber);
        let correction = g.internal_edge_count(deleted_contracted, fiber) as i64;
        values.push(base + correction);
    }
    OrbitPair::new(target_kept, Divisor(values))
}

/// An upper subset of the poset of divisors on connected spanning
/// subgraphs, stored extensionally: one sorted divisor set per
/// connected spanning subgraph. Missing strata are empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UpperSet {
    pub degree: i64,
    pub strata: BTreeMap<EdgeSet, BTreeSet<Divisor>>,
}

impl UpperSet {
    pub fn new(degree: i64) -> Self {
        UpperSet {
            degree,
            strata: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, kept: EdgeSet, d: Divisor) {
        self.strata.entry(kept).or_default().insert(d);
    }

    pub fn stratum(&self, kept: EdgeSet) -> Option<&BTreeSet<Divisor>> {
        self.strata.get(&kept)
    }

    pub fn stratum_size(&self, kept: EdgeSet) -> usize {
        self.strata.get(&kept).map_or(0, BTreeSet::len)
    }

    pub fn contains(&self, p: &OrbitPair) -> bool {
        self.strata
            .get(&p.kept)
            .is_some_and(|s| s.contains(&p.divisor))
    }

    pub fn len(&self) -> usize {
        self.strata.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.values().all(BTreeSet::is_empty)
    }

    pub fn iter(&self) -> impl Iterator<Item = OrbitPair> + '_ {
        self.strata
            .iter()
            .flat_map(|(kept, ds)| ds.iter().map(move |d| OrbitPair::new(*kept, d.clone())))
    }

    /// The divisors at the top stratum (the full graph).
    pub fn top_stratum(&self, g: &Multigraph) -> BTreeSet<Divisor> {
        self.stratum(g.all_edges()).cloned().unwrap_or_default()
    }

    /// Upward closure of a set of pairs inside the connected poset.
    pub fn upward_closure(g: &Multigraph, degree: i64, seeds: &[OrbitPair]) -> Self {
        let mut out = UpperSet::new(degree);
        for seed in seeds {
            debug_assert_eq!(seed.ambient_degree(g), degree);
            for sup in seed.kept.complement(g.n_edges()).subsets() {
                let kept = seed.kept.union(sup);
                for extra in indegree_set(g, sup) {
                    out.insert(kept, seed.divisor.add(&extra));
                }
            }
        }
        out
    }
}

/// Checks the defining closure property pairwise at desk scale: every
/// element plus every realizable step upward stays inside.
pub fn is_upper_set(g: &Multigraph, p: &UpperSet, caps: &Caps) -> Result<bool> {
    caps.check_edges(g)?;
    for (kept, divs) in &p.strata {
        for d in divs {
            let missing = kept.complement(g.n_edges());
            for sup in missing.subsets() {
                if sup.is_empty() {
                    continue;
                }
                let above = kept.union(sup);
                for extra in indegree_set(g, sup) {
                    let q = OrbitPair::new(above, d.add(&extra));
                    if !p.contains(&q) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// The four type flags of an upper set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeFlags {
    pub strong_n: bool,
    pub numerical_strong_n: bool,
    pub n: bool,
    pub numerical_n: bool,
}

impl TypeFlags {
    pub fn all(&self) -> bool {
        self.strong_n && self.numerical_strong_n && self.n && self.numerical_n
    }
}

/// Classify an upper set: sN asks the map to the Picard group of every
/// connected spanning subgraph (with its own Laplacian) to be a
/// bijection, N asks it at the full graph only, and the numerical
/// variants compare cardinalities with the complexity.
pub fn classify_type(g: &Multigraph, p: &UpperSet, caps: &Caps) -> Result<TypeFlags> {
    if !is_upper_set(g, p, caps)? {
        return Err(Error::NotUpperSet);
    }
    let mut strong_n = true;
    let mut numerical_strong_n = true;
    let mut n = true;
    let mut numerical_n = true;
    for kept in connected_spanning_subgraphs(g, caps)? {
        let sub = g.delete_edges(kept.complement(g.n_edges()));
        let c = complexity_u64(&sub)?;
        let stratum_len = p.stratum_size(kept) as u64;
        let bijective = if stratum_len != c {
            false
        } else {
            // Injectivity onto Pic of the subgraph: distinct q-reduced
            // forms, computed with the subgraph Laplacian.
            let mut seen = BTreeSet::new();
            p.stratum(kept)
                .map(|divs| {
                    divs.iter()
                        .all(|d| seen.insert(q_reduce(&sub, d, 0).expect("connected subgraph")))
                })
                .unwrap_or(true)
        };
        if stratum_len != c {
            numerical_strong_n = false;
        }
        if !bijective {
            strong_n = false;
        }
        if kept == g.all_edges() {
            numerical_n = stratum_len == c;
            n = bijective;
        }
    }
    let flags = TypeFlags {
        strong_n,
        numerical_strong_n,
        n,
        numerical_n,
    };
    // Implication lattice: sN => {numerical sN, N} => numerical N.
    assert!(!flags.strong_n || (flags.numerical_strong_n && flags.n));
    assert!(!flags.numerical_strong_n || flags.numerical_n);
    assert!(!flags.n || flags.numerical_n);
    Ok(flags)
}
