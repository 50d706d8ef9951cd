//! Finite multigraphs with labeled vertices and edges.
//!
//! Loops and parallel edges are allowed. Vertices and edges carry dense
//! integer ids plus stable display names, so parallel edges stay
//! individually addressable in files and reports. Graphs are immutable
//! after construction; deletion and contraction return new graphs.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::set::{EdgeSet, VertexSet};

/// Hard limit imposed by the bitset representation.
pub const MAX_VERTICES: usize = 64;
pub const MAX_EDGES: usize = 64;

/// Caps for the operations that enumerate exponentially many subsets.
#[derive(Debug, Clone, Copy)]
pub struct Caps {
    /// Max vertex count for vertex-subset enumerations.
    pub subset_vertices: usize,
    /// Max edge count for edge-subset enumerations.
    pub subset_edges: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            subset_vertices: 12,
            subset_edges: 20,
        }
    }
}

impl Caps {
    pub fn with_limit(n: usize) -> Self {
        Caps {
            subset_vertices: n,
            subset_edges: n.saturating_add(8),
        }
    }

    pub fn check_vertices(&self, g: &Multigraph) -> Result<()> {
        if g.n_vertices() > self.subset_vertices {
            return Err(Error::CapExceeded {
                what: "vertices",
                got: g.n_vertices(),
                cap: self.subset_vertices,
            });
        }
        Ok(())
    }

    pub fn check_edges(&self, g: &Multigraph) -> Result<()> {
        if g.n_edges() > self.subset_edges {
            return Err(Error::CapExceeded {
                what: "edges",
                got: g.n_edges(),
                cap: self.subset_edges,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub label: String,
    pub ends: (usize, usize),
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.ends.0 == self.ends.1
    }

    pub fn other_end(&self, v: usize) -> usize {
        if self.ends.0 == v {
            self.ends.1
        } else {
            self.ends.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    vertex_names: Vec<String>,
    edges: Vec<Edge>,
}

impl Multigraph {
    pub fn new(vertex_names: Vec<String>, edges: Vec<(String, usize, usize)>) -> Result<Self> {
        if vertex_names.len() > MAX_VERTICES {
            return Err(Error::CapExceeded {
                what: "vertices",
                got: vertex_names.len(),
                cap: MAX_VERTICES,
            });
        }
        if edges.len() > MAX_EDGES {
            return Err(Error::CapExceeded {
                what: "edges",
                got: edges.len(),
                cap: MAX_EDGES,
            });
        }
        let n = vertex_names.len();
        let mut seen = std::collections::HashSet::new();
        for name in &vertex_names {
            if !seen.insert(name.clone()) {
                return Err(Error::Invalid(format!("duplicate vertex name {name:?}")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        let mut es = Vec::with_capacity(edges.len());
        for (label, u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Invalid(format!(
                    "edge {label:?} has endpoint outside the vertex range"
                )));
            }
            if !seen.insert(label.clone()) {
                return Err(Error::Invalid(format!("duplicate edge label {label:?}")));
            }
            es.push(Edge {
                label,
                ends: (u, v),
            });
        }
        Ok(Multigraph {
            vertex_names,
            edges: es,
        })
    }

    /// Graph with vertices named `v0..v{n-1}` and edges `e0, e1, ...`
    /// given by endpoint pairs. Convenient for tests and examples.
    pub fn from_edge_list(n: usize, ends: &[(usize, usize)]) -> Result<Self> {
        let names = (0..n).map(|i| format!("v{i}")).collect();
        let edges = ends
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| (format!("e{i}"), u, v))
            .collect();
        Multigraph::new(names, edges)
    }

    /// Two vertices joined by `t` parallel edges.
    pub fn vine(t: usize) -> Self {
        Multigraph::from_edge_list(2, &vec![(0, 1); t]).expect("vine graph")
    }

    /// Cycle on `n` vertices.
    pub fn cycle(n: usize) -> Self {
        let ends: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Multigraph::from_edge_list(n, &ends).expect("cycle graph")
    }

    /// Path on `n` vertices.
    pub fn path(n: usize) -> Self {
        let ends: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Multigraph::from_edge_list(n, &ends).expect("path graph")
    }

    /// Two vertices joined by three parallel edges.
    pub fn theta() -> Self {
        Multigraph::vine(3)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertex_names[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<usize> {
        self.vertex_names.iter().position(|n| n == name)
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_by_label(&self, label: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.label == label)
    }

    pub fn all_vertices(&self) -> VertexSet {
        VertexSet::full(self.n_vertices())
    }

    pub fn all_edges(&self) -> EdgeSet {
        EdgeSet::full(self.n_edges())
    }

    /// Number of connected components (isolated vertices count).
    pub fn component_count(&self) -> usize {
        self.components_of(self.all_vertices(), self.all_edges()).len()
    }

    pub fn is_connected(&self) -> bool {
        self.n_vertices() <= 1 || self.component_count() == 1
    }

    /// Connected components of the subgraph with vertex set `verts` and
    /// those edges of `edges` with both ends in `verts`.
    pub fn components_of(&self, verts: VertexSet, edges: EdgeSet) -> Vec<VertexSet> {
        let mut seen = VertexSet::empty();
        let mut comps = Vec::new();
        for start in verts.iter() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = VertexSet::empty();
            let mut queue = VecDeque::new();
            queue.push_back(start);
            comp.insert(start);
            while let Some(v) = queue.pop_front() {
                for (ei, e) in self.edges.iter().enumerate() {
                    if !edges.contains(ei) || e.is_loop() {
                        continue;
                    }
                    let (a, b) = e.ends;
                    let w = if a == v {
                        b
                    } else if b == v {
                        a
                    } else {
                        continue;
                    };
                    if verts.contains(w) && !comp.contains(w) {
                        comp.insert(w);
                        queue.push_back(w);
                    }
                }
            }
            seen = seen.union(comp);
            comps.push(comp);
        }
        comps
    }

    /// Whether the induced subgraph on `w` is connected (empty sets are not).
    pub fn is_induced_connected(&self, w: VertexSet) -> bool {
        !w.is_empty() && self.components_of(w, self.all_edges()).len() == 1
    }

    /// Edges of `s` with both endpoints in `w` (loops included).
    pub fn edges_within(&self, s: EdgeSet, w: VertexSet) -> EdgeSet {
        let mut out = EdgeSet::empty();
        for ei in s.iter() {
            let e = &self.edges[ei];
            if w.contains(e.ends.0) && w.contains(e.ends.1) {
                out.insert(ei);
            }
        }
        out
    }

    /// Edges of `s` joining `w1` to `w2` (never loops).
    pub fn edges_between(&self, s: EdgeSet, w1: VertexSet, w2: VertexSet) -> EdgeSet {
        let mut out = EdgeSet::empty();
        for ei in s.iter() {
            let e = &self.edges[ei];
            let (a, b) = e.ends;
            if (w1.contains(a) && w2.contains(b)) || (w1.contains(b) && w2.contains(a)) {
                out.insert(ei);
            }
        }
        out
    }

    /// `|E| - |V| + #components`; equals the first Betti number when connected.
    pub fn genus(&self) -> usize {
        self.n_edges() + self.component_count() - self.n_vertices()
    }

    /// Genus of the induced subgraph on `w`.
    pub fn induced_genus(&self, w: VertexSet) -> usize {
        let inside = self.edges_within(self.all_edges(), w);
        let comps = self.components_of(w, self.all_edges()).len();
        inside.len() + comps - w.len()
    }

    /// The S-valence of the pair `(w1, w2)`: edges of `s` with one end in
    /// each. Loops are never counted.
    pub fn valence_between(&self, s: EdgeSet, w1: VertexSet, w2: VertexSet) -> Result<usize> {
        if !w1.is_disjoint(w2) {
            return Err(Error::OverlappingSets);
        }
        Ok(self.edges_between(s, w1, w2).len())
    }

    /// `val_S(W) = val_S(W, W^c)`.
    pub fn valence_of(&self, s: EdgeSet, w: VertexSet) -> usize {
        self.edges_between(s, w, w.complement(self.n_vertices())).len()
    }

    /// `val(W)` with respect to all edges.
    pub fn valence(&self, w: VertexSet) -> usize {
        self.valence_of(self.all_edges(), w)
    }

    /// The S-degree `e_S(W)`: edges of `s` inside `w`, loops included.
    pub fn internal_edge_count(&self, s: EdgeSet, w: VertexSet) -> usize {
        self.edges_within(s, w).len()
    }

    /// All non-trivial `W` with both `Γ[W]` and `Γ[W^c]` connected, both
    /// members of each complementary pair listed, sorted by bit pattern.
    pub fn biconnected_subsets(&self, caps: &Caps) -> Result<Vec<VertexSet>> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        caps.check_vertices(self)?;
        let n = self.n_vertices();
        let mut out = Vec::new();
        // Walk subsets containing vertex 0 and emit both sides.
        for bits in 0..(1u64 << (n.saturating_sub(1))) {
            let w = VertexSet((bits << 1) | 1);
            let wc = w.complement(n);
            if wc.is_empty() {
                continue;
            }
            if self.is_induced_connected(w) && self.is_induced_connected(wc) {
                out.push(w);
                out.push(wc);
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// One representative per complementary biconnected pair: the side
    /// containing vertex 0, sorted.
    pub fn biconnected_pairs(&self, caps: &Caps) -> Result<Vec<VertexSet>> {
        let all = self.biconnected_subsets(caps)?;
        Ok(all.into_iter().filter(|w| w.contains(0)).collect())
    }

    /// The spanning subgraph `Γ∖S` as a new graph: same vertices, edges
    /// relabeled densely in the surviving order.
    pub fn delete_edges(&self, s: EdgeSet) -> Multigraph {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !s.contains(*i))
            .map(|(_, e)| e.clone())
            .collect();
        Multigraph {
            vertex_names: self.vertex_names.clone(),
            edges,
        }
    }

    /// Contract the edges of `s`, returning the morphism `Γ → Γ/S`.
    ///
    /// Loops in `s` are simply dropped. Contracting one edge of a parallel
    /// pair turns the others into loops, which are kept.
    pub fn contract_edges(&self, s: EdgeSet) -> GraphMorphism {
        let comps = self.components_of(self.all_vertices(), s);
        // Target vertex per component, ordered by smallest member id.
        let mut comps = comps;
        comps.sort_by_key(|c| c.min_elem());
        let mut vertex_map = vec![usize::MAX; self.n_vertices()];
        let mut names = Vec::with_capacity(comps.len());
        for (ti, comp) in comps.iter().enumerate() {
            for v in comp.iter() {
                vertex_map[v] = ti;
            }
            names.push(self.vertex_names[comp.min_elem().unwrap()].clone());
        }
        let mut edges = Vec::new();
        let mut edge_pullback = Vec::new();
        for (ei, e) in self.edges.iter().enumerate() {
            if s.contains(ei) {
                continue;
            }
            edges.push(Edge {
                label: e.label.clone(),
                ends: (vertex_map[e.ends.0], vertex_map[e.ends.1]),
            });
            edge_pullback.push(ei);
        }
        let target = Multigraph {
            vertex_names: names,
            edges,
        };
        GraphMorphism {
            source: self.clone(),
            target,
            contracted: s,
            vertex_map,
            edge_pullback,
        }
    }

    /// BFS side of `tree ∖ {e}` containing `v`, where `tree` is a spanning
    /// tree edge set.
    pub fn tree_side(&self, tree: EdgeSet, e: usize, v: usize) -> VertexSet {
        let mut remaining = tree;
        remaining.remove(e);
        self.components_of(self.all_vertices(), remaining)
            .into_iter()
            .find(|c| c.contains(v))
            .unwrap()
    }

    /// Lexicographically smallest spanning tree of the induced subgraph on
    /// `w` (greedy over ascending edge ids). `None` if `Γ[W]` is
    /// disconnected.
    pub fn greedy_tree_of(&self, w: VertexSet, reverse: bool) -> Option<EdgeSet> {
        let inside = self.edges_within(self.all_edges(), w);
        let mut uf = UnionFind::new(self.n_vertices());
        let mut tree = EdgeSet::empty();
        let ids: Vec<usize> = if reverse {
            inside.iter().collect::<Vec<_>>().into_iter().rev().collect()
        } else {
            inside.iter().collect()
        };
        for ei in ids {
            let e = &self.edges[ei];
            if !e.is_loop() && uf.union(e.ends.0, e.ends.1) {
                tree.insert(ei);
            }
        }
        if tree.len() + 1 == w.len() {
            Some(tree)
        } else {
            None
        }
    }
}

/// Tiny union-find used by greedy tree construction and the
/// deletion-contraction enumerator.
#[derive(Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }

    /// Returns true if the two elements were in different classes.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }

    pub fn class_count(&mut self, n: usize) -> usize {
        (0..n).filter(|&i| self.find(i) == i).count()
    }
}

/// A morphism of graphs: a contraction of some edges followed by a
/// relabeling of the target. `vertex_map` pushes vertices forward,
/// `edge_pullback` sends each target edge to the unique source edge
/// over it.
#[derive(Debug, Clone)]
pub struct GraphMorphism {
    source: Multigraph,
    target: Multigraph,
    contracted: EdgeSet,
    vertex_map: Vec<usize>,
    edge_pullback: Vec<usize>,
}

impl GraphMorphism {
    pub fn new(
        source: Multigraph,
        target: Multigraph,
        contracted: EdgeSet,
        vertex_map: Vec<usize>,
        edge_pullback: Vec<usize>,
    ) -> Result<Self> {
        let m = GraphMorphism {
            source,
            target,
            contracted,
            vertex_map,
            edge_pullback,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn identity(g: &Multigraph) -> Self {
        g.contract_edges(EdgeSet::empty())
    }

    fn validate(&self) -> Result<()> {
        let src = &self.source;
        let tgt = &self.target;
        if self.vertex_map.len() != src.n_vertices() {
            return Err(Error::InvalidMorphism("vertex map arity".into()));
        }
        if self.edge_pullback.len() != tgt.n_edges() {
            return Err(Error::InvalidMorphism("edge pullback arity".into()));
        }
        // Pullback must biject onto the non-contracted source edges.
        let mut image = EdgeSet::empty();
        for &se in &self.edge_pullback {
            if se >= src.n_edges() || self.contracted.contains(se) || image.contains(se) {
                return Err(Error::InvalidMorphism(
                    "edge pullback is not injective into the kept edges".into(),
                ));
            }
            image.insert(se);
        }
        if image != self.contracted.complement(src.n_edges()) {
            return Err(Error::InvalidMorphism(
                "edge pullback misses some kept edge".into(),
            ));
        }
        // Endpoint compatibility.
        for (te, &se) in self.edge_pullback.iter().enumerate() {
            let (a, b) = src.edge(se).ends;
            let (ta, tb) = tgt.edge(te).ends;
            let mapped = (self.vertex_map[a], self.vertex_map[b]);
            if mapped != (ta, tb) && mapped != (tb, ta) {
                return Err(Error::InvalidMorphism(format!(
                    "edge {} endpoints do not push forward",
                    tgt.edge(te).label
                )));
            }
        }
        // Fibers of the vertex map are exactly the components of the
        // contracted edge set.
        let comps = src.components_of(src.all_vertices(), self.contracted);
        let mut fibers = vec![VertexSet::empty(); tgt.n_vertices()];
        for (v, &tv) in self.vertex_map.iter().enumerate() {
            if tv >= tgt.n_vertices() {
                return Err(Error::InvalidMorphism("vertex map out of range".into()));
            }
            fibers[tv].insert(v);
        }
        for fiber in &fibers {
            if fiber.is_empty() {
                return Err(Error::InvalidMorphism("vertex map not surjective".into()));
            }
            if !comps.contains(fiber) {
                return Err(Error::InvalidMorphism(
                    "vertex fibers differ from contracted components".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &Multigraph {
        &self.source
    }

    pub fn target(&self) -> &Multigraph {
        &self.target
    }

    pub fn contracted(&self) -> EdgeSet {
        self.contracted
    }

    pub fn push_vertex(&self, v: usize) -> usize {
        self.vertex_map[v]
    }

    /// Source vertices over a target vertex set.
    pub fn vertex_preimage(&self, w: VertexSet) -> VertexSet {
        VertexSet::from_iter(
            (0..self.source.n_vertices()).filter(|&v| w.contains(self.vertex_map[v])),
        )
    }

    pub fn pull_edge(&self, te: usize) -> usize {
        self.edge_pullback[te]
    }

    /// Source edges over a target edge set.
    pub fn edge_image(&self, s: EdgeSet) -> EdgeSet {
        EdgeSet::from_iter(s.iter().map(|te| self.edge_pullback[te]))
    }

    /// Target edges whose pullback lies in `s`.
    pub fn edge_preimage(&self, s: EdgeSet) -> EdgeSet {
        EdgeSet::from_iter(
            (0..self.target.n_edges()).filter(|&te| s.contains(self.edge_pullback[te])),
        )
    }

    pub fn is_genus_preserving(&self) -> bool {
        self.source.genus() == self.target.genus()
    }
}
