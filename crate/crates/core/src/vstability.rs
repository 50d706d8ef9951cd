//! General V-stability conditions: validation, the associated upper
//! sets, restriction, push-forward, translation, canonical forms,
//! enumeration up to translation, and the classicality test.
//!
//! A stability condition of degree `d` assigns an integer `n_W` to every
//! non-trivial biconnected vertex subset, subject to
//!
//! * the sum rule `n_W + n_{W^c} = d + 1 - val(W)`, and
//! * the exchange bound `-1 <= n_{W1∪W2} - n_{W1} - n_{W2} - val(W1,W2) <= 0`
//!   whenever `W1`, `W2` and their disjoint union are all biconnected.
//!
//! Only one value per complementary pair is stored (the side containing
//! vertex 0); the other is derived from the sum rule, which therefore
//! holds by construction.

use std::collections::{BTreeMap, HashSet};

use num_traits::{One, Zero};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::multigraph::{Caps, GraphMorphism, Multigraph};
use crate::orbit::UpperSet;
use crate::ratlp::{rat, strict_feasible, Direction, Feasibility, Rational, StrictSystem};
use crate::set::{EdgeSet, VertexSet};
use crate::spanning::{connected_spanning_subgraphs, spanning_trees};

/// A general V-stability condition. Keys are the canonical sides of the
/// complementary biconnected pairs (the side containing vertex 0).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct VStability {
    degree: i64,
    values: BTreeMap<VertexSet, i64>,
}

/// A single failed axiom, with the witnessing subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A value listed for a non-canonical side disagrees with the one
    /// derived from the sum rule.
    SumRule { w: VertexSet, got: i64, want: i64 },
    /// The exchange bound fails on a disjoint biconnected pair whose
    /// union is biconnected: the excess lies outside {-1, 0}.
    Exchange {
        w1: VertexSet,
        w2: VertexSet,
        excess: i64,
    },
}

impl Violation {
    pub fn describe(&self, g: &Multigraph) -> String {
        let names = |w: &VertexSet| {
            w.iter()
                .map(|v| g.vertex_name(v).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Violation::SumRule { w, got, want } => format!(
                "sum rule: value {} listed for {{{}}} but the complement forces {}",
                got,
                names(w),
                want
            ),
            Violation::Exchange { w1, w2, excess } => format!(
                "exchange bound: excess {} outside [-1,0] for {{{}}} and {{{}}}",
                excess,
                names(w1),
                names(w2)
            ),
        }
    }
}

impl VStability {
    /// Structural constructor: the key set must be exactly one side per
    /// complementary biconnected pair, the side containing vertex 0.
    /// Axioms are checked separately by [`VStability::validate`].
    pub fn new(
        g: &Multigraph,
        degree: i64,
        values: BTreeMap<VertexSet, i64>,
        caps: &Caps,
    ) -> Result<Self> {
        let expected = g.biconnected_pairs(caps)?;
        let keys: Vec<VertexSet> = values.keys().copied().collect();
        if keys != expected {
            let missing = expected.iter().filter(|w| !values.contains_key(w)).count();
            let extra = keys.iter().filter(|w| !expected.contains(w)).count();
            return Err(Error::StructuralStability(format!(
                "key set mismatch: {missing} missing, {extra} unrecognized"
            )));
        }
        Ok(VStability { degree, values })
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn canonical_values(&self) -> &BTreeMap<VertexSet, i64> {
        &self.values
    }

    /// `n_W` for any non-trivial biconnected `w`: stored for canonical
    /// sides, derived through the sum rule otherwise.
    pub fn value(&self, g: &Multigraph, w: VertexSet) -> i64 {
        if let Some(v) = self.values.get(&w) {
            return *v;
        }
        let wc = w.complement(g.n_vertices());
        let stored = self
            .values
            .get(&wc)
            .expect("subset is not a side of a biconnected pair");
        self.degree + 1 - g.valence(w) as i64 - stored
    }

    /// Check the exchange bound on every disjoint biconnected pair with
    /// biconnected union. The sum rule holds by construction; the
    /// returned list is empty exactly when the condition is valid.
    pub fn validate(&self, g: &Multigraph, caps: &Caps) -> Result<Vec<Violation>> {
        let bic = g.biconnected_subsets(caps)?;
        let bic_set: HashSet<VertexSet> = bic.iter().copied().collect();
        let mut violations = Vec::new();
        for (i, &w1) in bic.iter().enumerate() {
            for &w2 in &bic[i + 1..] {
                if !w1.is_disjoint(w2) {
                    continue;
                }
                let union = w1.union(w2);
                if union == g.all_vertices() || !bic_set.contains(&union) {
                    continue;
                }
                let excess = self.value(g, union)
                    - self.value(g, w1)
                    - self.value(g, w2)
                    - g.valence_between(g.all_edges(), w1, w2).unwrap() as i64;
                if !(-1..=0).contains(&excess) {
                    violations.push(Violation::Exchange { w1, w2, excess });
                }
            }
        }
        Ok(violations)
    }

    pub fn is_valid(&self, g: &Multigraph, caps: &Caps) -> Result<bool> {
        Ok(self.validate(g, caps)?.is_empty())
    }

    pub(crate) fn ensure_valid(&self, g: &Multigraph, caps: &Caps) -> Result<()> {
        let violations = self.validate(g, caps)?;
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidStability(violations.len()))
        }
    }

    /// Translate by a divisor: `(n + D)_W = n_W + D_W`, degree `d + |D|`.
    pub fn translate(&self, d: &Divisor) -> VStability {
        let values = self
            .values
            .iter()
            .map(|(w, v)| (*w, v + d.sum_over(*w)))
            .collect();
        VStability {
            degree: self.degree + d.degree(),
            values,
        }
    }
}

/// The stable pairs `(Γ∖S, D)` of a valid stability condition: all
/// divisors of degree `d - |S|` on connected spanning subgraphs with
/// `D_W + e_S(W) >= n_W` for every non-trivial biconnected `W`.
///
/// Candidate divisors are drawn from the per-vertex box implied by the
/// stability of the singleton complements, then filtered by the exact
/// defining inequalities.
pub fn vset(g: &Multigraph, n: &VStability, caps: &Caps) -> Result<UpperSet> {
    n.ensure_valid(g, caps)?;
    let bic = g.biconnected_subsets(caps)?;
    let bic_values: Vec<(VertexSet, i64)> = bic.iter().map(|&w| (w, n.value(g, w))).collect();
    let nv = g.n_vertices();
    let d = n.degree();
    let mut out = UpperSet::new(d);

    // Complement components per vertex do not depend on the stratum.
    let mut comp_data = Vec::with_capacity(nv);
    for v in 0..nv {
        if nv == 1 {
            comp_data.push((0i64, 0usize));
            continue;
        }
        let rest = VertexSet::singleton(v).complement(nv);
        let comps = g.components_of(rest, g.all_edges());
        let sum: i64 = comps.iter().map(|z| n.value(g, *z)).sum();
        comp_data.push((sum, comps.len()));
    }

    for kept in connected_spanning_subgraphs(g, caps)? {
        let s = kept.complement(g.n_edges());
        let target = d - s.len() as i64;
        if nv == 1 {
            out.insert(kept, Divisor(vec![target]));
            continue;
        }
        // Per-vertex bounds on D_v.
        let mut lo = vec![0i64; nv];
        let mut hi = vec![0i64; nv];
        let mut empty = false;
        for v in 0..nv {
            let (sum_nz, k) = comp_data[v];
            let vs = VertexSet::singleton(v);
            let e_s_v = g.internal_edge_count(s, vs) as i64;
            lo[v] = d - sum_nz + k as i64 - g.valence(vs) as i64 - e_s_v;
            hi[v] = d - g.valence_of(s, vs) as i64 - sum_nz - e_s_v;
            if lo[v] > hi[v] {
                empty = true;
            }
        }
        if empty {
            continue;
        }
        let e_s: Vec<i64> = bic_values
            .iter()
            .map(|(w, _)| g.internal_edge_count(s, *w) as i64)
            .collect();
        // Depth-first box walk with degree pruning.
        let suffix_lo = suffix_sums(&lo);
        let suffix_hi = suffix_sums(&hi);
        let mut vals = vec![0i64; nv];
        walk(
            0,
            target,
            &lo,
            &hi,
            &suffix_lo,
            &suffix_hi,
            &mut vals,
            &bic_values,
            &e_s,
            &mut |divisor| out.insert(kept, divisor),
        );
    }
    return Ok(out);

    fn suffix_sums(xs: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; xs.len() + 1];
        for i in (0..xs.len()).rev() {
            out[i] = out[i + 1] + xs[i];
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        v: usize,
        remaining: i64,
        lo: &[i64],
        hi: &[i64],
        suffix_lo: &[i64],
        suffix_hi: &[i64],
        vals: &mut Vec<i64>,
        bic_values: &[(VertexSet, i64)],
        e_s: &[i64],
        emit: &mut impl FnMut(Divisor),
    ) {
        if v == vals.len() {
            if remaining != 0 {
                return;
            }
            let d = Divisor(vals.clone());
            let ok = bic_values
                .iter()
                .zip(e_s)
                .all(|((w, nw), es)| d.sum_over(*w) + es >= *nw);
            if ok {
                emit(d);
            }
            return;
        }
        for x in lo[v]..=hi[v] {
            let rest = remaining - x;
            if rest < suffix_lo[v + 1] || rest > suffix_hi[v + 1] {
                continue;
            }
            vals[v] = x;
            walk(
                v + 1,
                rest,
                lo,
                hi,
                suffix_lo,
                suffix_hi,
                vals,
                bic_values,
                e_s,
                emit,
            );
        }
    }
}

/// The stability induced on a connected spanning subgraph:
/// `n(Γ∖S)_W = n_W - e_S(W)`, of degree `d - |S|`. The result lives on
/// the subgraph returned by `delete_edges(s)`.
pub fn restrict(g: &Multigraph, n: &VStability, s: EdgeSet, caps: &Caps) -> Result<VStability> {
    let sub = g.delete_edges(s);
    if !sub.is_connected() {
        return Err(Error::DisconnectedSubgraph);
    }
    let pairs = sub.biconnected_pairs(caps)?;
    let values = pairs
        .into_iter()
        .map(|w| (w, n.value(g, w) - g.internal_edge_count(s, w) as i64))
        .collect();
    VStability::new(&sub, n.degree() - s.len() as i64, values, caps)
}

/// Push a stability forward along a morphism: `f_*(n)_W = n_{f^{-1}(W)}`,
/// same degree.
pub fn pushforward(f: &GraphMorphism, n: &VStability, caps: &Caps) -> Result<VStability> {
    let gt = f.target();
    let pairs = gt.biconnected_pairs(caps)?;
    let values = pairs
        .into_iter()
        .map(|w| (w, n.value(f.source(), f.vertex_preimage(w))))
        .collect();
    VStability::new(gt, n.degree(), values, caps)
}

/// The unique translation representative pinned by a spanning tree:
/// degree `g(Γ)`, value `g(Γ[W])` on every tree pair, and all values in
/// the window `|n_W - g(Γ[W])| <= val_T(W) - 1`. Returns the
/// representative together with the translating divisor.
pub fn canonical_form(
    g: &Multigraph,
    n: &VStability,
    tree: EdgeSet,
    caps: &Caps,
) -> Result<(VStability, Divisor)> {
    n.ensure_valid(g, caps)?;
    let nv = g.n_vertices();
    if tree.len() + 1 != nv || g.components_of(g.all_vertices(), tree).len() != 1 {
        return Err(Error::NotSpanningTree);
    }
    // Solve D_{W_e} = g(Γ[W_e]) - n_{W_e} for every tree edge by peeling
    // leaves, then fix the last vertex from the total degree.
    let mut dvals: Vec<Option<i64>> = vec![None; nv];
    let mut alive_edges = tree;
    let mut alive: Vec<bool> = vec![true; nv];
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
        let rhs = g.induced_genus(side) as i64 - n.value(g, side);
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
        dvals[root] = Some(g.genus() as i64 - n.degree() - solved);
    }
    let d = Divisor(dvals.into_iter().map(|v| v.unwrap()).collect());
    let canon = n.translate(&d);
    debug_assert_eq!(canon.degree(), g.genus() as i64);
    // The window is part of the contract; a violation here would mean
    // the input was not a valid stability after all.
    for (&w, &value) in canon.canonical_values() {
        let width = g.valence_of(tree, w) as i64 - 1;
        let offset = value - g.induced_genus(w) as i64;
        if offset.abs() > width {
            return Err(Error::Invalid(format!(
                "canonical representative leaves the tree window on {w:?}"
            )));
        }
    }
    Ok((canon, d))
}

/// The translating divisor with `n2 = n1 + D`, if the two conditions are
/// equivalent; canonical forms are compared with respect to the
/// lexicographically first spanning tree.
pub fn equivalent_by_translation(
    g: &Multigraph,
    n1: &VStability,
    n2: &VStability,
    caps: &Caps,
) -> Result<Option<Divisor>> {
    let tree = spanning_trees(g)?[0];
    let (c1, d1) = canonical_form(g, n1, tree, caps)?;
    let (c2, d2) = canonical_form(g, n2, tree, caps)?;
    if c1 != c2 {
        return Ok(None);
    }
    let witness = d1.sub(&d2);
    debug_assert_eq!(&n1.translate(&witness), n2);
    Ok(Some(witness))
}

/// One side of an exchange triple, resolved to the canonical value it
/// reads: `term = sign * n[idx] + offset`.
#[derive(Clone, Copy)]
struct ResolvedTerm {
    idx: usize,
    sign: i64,
    offset: i64,
}

/// All canonical representatives of degree `g(Γ)` with respect to the
/// lexicographically first spanning tree, one per translation class,
/// in deterministic order.
///
/// The window product can be large, so the search assigns the free
/// pairs one by one and checks every exchange triple as soon as its
/// three participants are determined, pruning dead branches early.
pub fn enumerate_up_to_translation(g: &Multigraph, caps: &Caps) -> Result<Vec<VStability>> {
    let tree = spanning_trees(g)?[0];
    let pairs = g.biconnected_pairs(caps)?;
    const MAX_PAIRS: usize = 40;
    if pairs.len() > MAX_PAIRS {
        return Err(Error::CapExceeded {
            what: "biconnected pairs",
            got: pairs.len(),
            cap: MAX_PAIRS,
        });
    }
    let genus = g.genus() as i64;
    let pair_index: BTreeMap<VertexSet, usize> =
        pairs.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    // Window per canonical pair; width 0 pins the value.
    let mut values = vec![0i64; pairs.len()];
    let mut windows = vec![(0i64, 0i64); pairs.len()];
    let mut free: Vec<usize> = Vec::new();
    for (i, &w) in pairs.iter().enumerate() {
        let center = g.induced_genus(w) as i64;
        let width = g.valence_of(tree, w) as i64 - 1;
        values[i] = center;
        windows[i] = (center - width, center + width);
        if width > 0 {
            free.push(i);
        }
    }
    // Narrow windows first so constraints couple early.
    free.sort_by_key(|&i| (windows[i].1 - windows[i].0, pairs[i]));
    let depth_of = |i: usize| -> usize {
        free.iter().position(|&f| f == i).map_or(0, |p| p + 1)
    };
    // Resolve a biconnected subset to the canonical value it reads.
    let resolve = |w: VertexSet| -> ResolvedTerm {
        if let Some(&idx) = pair_index.get(&w) {
            ResolvedTerm {
                idx,
                sign: 1,
                offset: 0,
            }
        } else {
            let wc = w.complement(g.n_vertices());
            ResolvedTerm {
                idx: pair_index[&wc],
                sign: -1,
                offset: genus + 1 - g.valence(w) as i64,
            }
        }
    };
    // Exchange triples grouped by the search depth at which they become
    // checkable.
    let bic = g.biconnected_subsets(caps)?;
    let bic_set: HashSet<VertexSet> = bic.iter().copied().collect();
    let mut checks_at: Vec<Vec<(ResolvedTerm, ResolvedTerm, ResolvedTerm, i64)>> =
        vec![Vec::new(); free.len() + 1];
    for (i, &w1) in bic.iter().enumerate() {
        for &w2 in &bic[i + 1..] {
            if !w1.is_disjoint(w2) {
                continue;
            }
            let union = w1.union(w2);
            if union == g.all_vertices() || !bic_set.contains(&union) {
                continue;
            }
            let tu = resolve(union);
            let ta = resolve(w1);
            let tb = resolve(w2);
            let val = g.valence_between(g.all_edges(), w1, w2).unwrap() as i64;
            let depth = depth_of(tu.idx).max(depth_of(ta.idx)).max(depth_of(tb.idx));
            checks_at[depth].push((tu, ta, tb, val));
        }
    }
    let excess_ok = |vals: &[i64], (tu, ta, tb, val): &(ResolvedTerm, ResolvedTerm, ResolvedTerm, i64)| {
        let term = |t: &ResolvedTerm| t.sign * vals[t.idx] + t.offset;
        let excess = term(tu) - term(ta) - term(tb) - val;
        (-1..=0).contains(&excess)
    };
    if !checks_at[0].iter().all(|c| excess_ok(&values, c)) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut visited = 0u64;
    search(
        g,
        caps,
        genus,
        &pairs,
        &windows,
        &free,
        &checks_at,
        &excess_ok,
        0,
        &mut values,
        &mut visited,
        &mut out,
    )?;
    // Search order is an implementation detail; report sorted output.
    out.sort();
    return Ok(out);

    #[allow(clippy::too_many_arguments)]
    fn search(
        g: &Multigraph,
        caps: &Caps,
        degree: i64,
        pairs: &[VertexSet],
        windows: &[(i64, i64)],
        free: &[usize],
        checks_at: &[Vec<(ResolvedTerm, ResolvedTerm, ResolvedTerm, i64)>],
        excess_ok: &impl Fn(&[i64], &(ResolvedTerm, ResolvedTerm, ResolvedTerm, i64)) -> bool,
        depth: usize,
        values: &mut Vec<i64>,
        visited: &mut u64,
        out: &mut Vec<VStability>,
    ) -> Result<()> {
        const MAX_VISITED: u64 = 200_000_000;
        *visited += 1;
        if *visited > MAX_VISITED {
            return Err(Error::CapExceeded {
                what: "enumeration search nodes",
                got: *visited as usize,
                cap: MAX_VISITED as usize,
            });
        }
        if depth == free.len() {
            let map: BTreeMap<VertexSet, i64> = pairs
                .iter()
                .enumerate()
                .map(|(i, &w)| (w, values[i]))
                .collect();
            let candidate = VStability::new(g, degree, map, caps)?;
            debug_assert!(candidate.is_valid(g, caps)?);
            out.push(candidate);
            return Ok(());
        }
        let idx = free[depth];
        let (lo, hi) = windows[idx];
        for v in lo..=hi {
            values[idx] = v;
            if checks_at[depth + 1].iter().all(|c| excess_ok(values, c)) {
                search(
                    g, caps, degree, pairs, windows, free, checks_at, excess_ok,
                    depth + 1, values, visited, out,
                )?;
            }
        }
        values[idx] = windows[idx].0;
        Ok(())
    }
}

/// A rational vertex weighting.
#[derive(Debug, Clone, PartialEq)]
pub struct Polarization(pub Vec<Rational>);

impl Polarization {
    pub fn total(&self) -> Rational {
        self.0.iter().fold(Rational::zero(), |acc, v| acc + v)
    }

    pub fn sum_over(&self, w: VertexSet) -> Rational {
        w.iter().fold(Rational::zero(), |acc, v| acc + &self.0[v])
    }
}

/// The classical stability induced by a general polarization:
/// `n(φ)_W = ceil(φ_W - val(W)/2)`. Errors when the total degree is not
/// an integer or some biconnected subset lands on a wall.
pub fn from_polarization(g: &Multigraph, phi: &Polarization, caps: &Caps) -> Result<VStability> {
    if phi.0.len() != g.n_vertices() {
        return Err(Error::Invalid("polarization arity mismatch".into()));
    }
    let total = phi.total();
    if !total.is_integer() {
        return Err(Error::NonIntegerDegree);
    }
    let degree: i64 = (&total.to_integer())
        .try_into()
        .map_err(|_| Error::Overflow("polarization degree"))?;
    let pairs = g.biconnected_pairs(caps)?;
    let mut values = BTreeMap::new();
    for w in pairs {
        let shifted = phi.sum_over(w) - rat(g.valence(w) as i64, 2);
        if shifted.is_integer() {
            let names: Vec<_> = w.iter().map(|v| g.vertex_name(v).to_string()).collect();
            return Err(Error::NotGeneral(format!(
                "phi_W - val(W)/2 is the integer {} on W = {{{}}}",
                shifted.to_integer(),
                names.join(",")
            )));
        }
        let value: i64 = (&shifted.ceil().to_integer())
            .try_into()
            .map_err(|_| Error::Overflow("stability value"))?;
        values.insert(w, value);
    }
    let n = VStability::new(g, degree, values, caps)?;
    debug_assert!(n.is_valid(g, caps)?);
    Ok(n)
}

/// Outcome of the classicality test.
#[derive(Debug, Clone)]
pub enum Classicality {
    /// A witnessing general polarization with its feasibility slack.
    Classical {
        witness: Polarization,
        slack: Rational,
    },
    /// No chamber of the stability arrangement induces this condition;
    /// the optimal slack of the relaxed system certifies emptiness.
    NotClassical { max_slack: Option<Rational> },
}

impl Classicality {
    pub fn witness(&self) -> Option<&Polarization> {
        match self {
            Classicality::Classical { witness, .. } => Some(witness),
            Classicality::NotClassical { .. } => None,
        }
    }
}

/// Search for a general polarization inducing `n`: exact strict-LP
/// feasibility of the open chamber
/// `n_W - 1 + val(W)/2 < φ_W < n_W + val(W)/2` (one representative per
/// pair; the complementary constraint is equivalent through the sum
/// rule) on the hyperplane `Σ φ_v = d`.
pub fn is_classical(g: &Multigraph, n: &VStability, caps: &Caps) -> Result<Classicality> {
    n.ensure_valid(g, caps)?;
    let nv = g.n_vertices();
    let mut sys = StrictSystem::new(nv);
    sys.push_eq(vec![Rational::one(); nv], rat(n.degree(), 1));
    for (&w, &value) in n.canonical_values() {
        let mut row = vec![Rational::zero(); nv];
        for v in w.iter() {
            row[v] = Rational::one();
        }
        let val = g.valence(w) as i64;
        sys.push_strict(row.clone(), rat(2 * value - 2 + val, 2), Direction::Greater);
        sys.push_strict(row, rat(2 * value + val, 2), Direction::Less);
    }
    match strict_feasible(&sys) {
        Feasibility::Feasible { point, slack } => {
            let witness = Polarization(point);
            let roundtrip = from_polarization(g, &witness, caps)?;
            assert_eq!(
                &roundtrip, n,
                "classicality witness does not reproduce the stability"
            );
            Ok(Classicality::Classical { witness, slack })
        }
        Feasibility::Infeasible { max_slack } => Ok(Classicality::NotClassical { max_slack }),
    }
}

/// Brute-force route to the stable divisors of a single stratum, used
/// by tests as the defining-inequality oracle without the box pruning.
#[cfg(test)]
pub(crate) fn stratum_by_definition(
    g: &Multigraph,
    n: &VStability,
    kept: EdgeSet,
    bound: i64,
    caps: &Caps,
) -> std::collections::BTreeSet<Divisor> {
    let bic = g.biconnected_subsets(caps).unwrap();
    let s = kept.complement(g.n_edges());
    let target = n.degree() - s.len() as i64;
    let nv = g.n_vertices();
    let mut out = std::collections::BTreeSet::new();
    let mut vals = vec![-bound; nv];
    loop {
        let d = Divisor(vals.clone());
        if d.degree() == target
            && bic
                .iter()
                .all(|&w| d.sum_over(w) + g.internal_edge_count(s, w) as i64 >= n.value(g, w))
        {
            out.insert(d);
        }
        let mut i = 0;
        loop {
            if i == nv {
                return out;
            }
            vals[i] += 1;
            if vals[i] <= bound {
                break;
            }
            vals[i] = -bound;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{nonclassical_graph, nonclassical_stability};
    use num_traits::Signed;
    use std::collections::BTreeSet;

    fn vine_stability(t: usize, d: i64, n1: i64) -> (Multigraph, VStability) {
        let g = Multigraph::vine(t);
        let caps = Caps::default();
        let values = BTreeMap::from([(VertexSet::singleton(0), n1)]);
        let n = VStability::new(&g, d, values, &caps).unwrap();
        (g, n)
    }

    #[test]
    fn structural_checks() {
        let g = Multigraph::vine(2);
        let caps = Caps::default();
        // Missing key.
        assert!(matches!(
            VStability::new(&g, 0, BTreeMap::new(), &caps),
            Err(Error::StructuralStability(_))
        ));
        // Unrecognized key.
        let bad = BTreeMap::from([(VertexSet::from_iter([0, 1]), 0)]);
        assert!(matches!(
            VStability::new(&g, 0, bad, &caps),
            Err(Error::StructuralStability(_))
        ));
    }

    #[test]
    fn derived_value_follows_sum_rule() {
        let (g, n) = vine_stability(3, 2, 1);
        // n_{v1} = d + 1 - t - n_{v0} = 2 + 1 - 3 - 1 = -1.
        assert_eq!(n.value(&g, VertexSet::singleton(1)), -1);
        assert_eq!(n.value(&g, VertexSet::singleton(0)), 1);
    }

    #[test]
    fn vines_have_no_exchange_constraints() {
        // On a vine there are no disjoint biconnected pairs with
        // biconnected union, so any integer pair satisfying the sum rule
        // is valid.
        let caps = Caps::default();
        for t in 1..=4 {
            for n1 in -3..=3 {
                let (g, n) = vine_stability(t, 0, n1);
                assert!(n.validate(&g, &caps).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn corpus_stability_is_valid() {
        let g = nonclassical_graph();
        let n = nonclassical_stability();
        let caps = Caps::default();
        assert_eq!(n.degree(), 4);
        assert!(n.validate(&g, &caps).unwrap().is_empty());
    }

    #[test]
    fn exchange_violation_detected() {
        let g = Multigraph::cycle(3);
        let caps = Caps::default();
        let values = BTreeMap::from([
            (VertexSet::singleton(0), 0),
            (VertexSet::from_iter([0, 1]), 5),
            (VertexSet::from_iter([0, 2]), 0),
        ]);
        let n = VStability::new(&g, 1, values, &caps).unwrap();
        let violations = n.validate(&g, &caps).unwrap();
        assert!(!violations.is_empty());
        assert!(matches!(violations[0], Violation::Exchange { .. }));
        assert!(vset(&g, &n, &caps).is_err());
    }

    #[test]
    fn vset_on_vines() {
        let caps = Caps::default();
        for t in 1..=4usize {
            for n1 in -2..=2i64 {
                let d = 1i64;
                let (g, n) = vine_stability(t, d, n1);
                let n2 = d + 1 - t as i64 - n1;
                let p = vset(&g, &n, &caps).unwrap();
                // Top stratum: exactly t divisors (n1+a, n2+b), a+b = t-1.
                let top = p.top_stratum(&g);
                assert_eq!(top.len(), t);
                for a in 0..t as i64 {
                    assert!(top.contains(&Divisor(vec![n1 + a, n2 + (t as i64 - 1 - a)])));
                }
                // Every spanning tree carries exactly one divisor.
                for tree in spanning_trees(&g).unwrap() {
                    assert_eq!(p.stratum_size(tree), 1);
                    assert!(p.stratum(tree).unwrap().contains(&Divisor(vec![n1, n2])));
                }
            }
        }
    }

    #[test]
    fn vset_matches_unpruned_definition() {
        let caps = Caps::default();
        let g = Multigraph::cycle(3);
        for n0 in -1..=1 {
            for n01 in -1..=1 {
                let values = BTreeMap::from([
                    (VertexSet::singleton(0), n0),
                    (VertexSet::from_iter([0, 1]), n01),
                    (VertexSet::from_iter([0, 2]), 0),
                ]);
                let n = VStability::new(&g, 1, values, &caps).unwrap();
                if !n.is_valid(&g, &caps).unwrap() {
                    continue;
                }
                let p = vset(&g, &n, &caps).unwrap();
                for kept in connected_spanning_subgraphs(&g, &caps).unwrap() {
                    let direct = stratum_by_definition(&g, &n, kept, 6, &caps);
                    assert_eq!(
                        p.stratum(kept).cloned().unwrap_or_default(),
                        direct,
                        "stratum {kept:?} of n0={n0} n01={n01}"
                    );
                }
            }
        }
    }

    #[test]
    fn disconnected_strata_are_empty() {
        // The defining inequalities admit no divisor on a disconnected
        // spanning subgraph.
        let caps = Caps::default();
        let tri = Multigraph::cycle(3);
        let values = BTreeMap::from([
            (VertexSet::singleton(0), 0),
            (VertexSet::from_iter([0, 1]), 0),
            (VertexSet::from_iter([0, 2]), 0),
        ]);
        let n = VStability::new(&tri, 1, values, &caps).unwrap();
        for kept in [EdgeSet::empty(), EdgeSet::singleton(0), EdgeSet::singleton(2)] {
            assert!(
                stratum_by_definition(&tri, &n, kept, 5, &caps).is_empty(),
                "disconnected stratum {kept:?} must be empty"
            );
        }
    }

    #[test]
    fn vset_is_upper_and_sized_by_complexity() {
        let caps = Caps::default();
        let g = nonclassical_graph();
        let n = nonclassical_stability();
        let p = vset(&g, &n, &caps).unwrap();
        assert!(crate::orbit::is_upper_set(&g, &p, &caps).unwrap());
        assert_eq!(
            p.stratum_size(g.all_edges()) as u64,
            crate::spanning::complexity_u64(&g).unwrap()
        );
    }

    #[test]
    fn restriction_examples() {
        let caps = Caps::default();
        let (g, n) = vine_stability(3, 2, 1);
        // Empty restriction changes nothing.
        let same = restrict(&g, &n, EdgeSet::empty(), &caps).unwrap();
        assert_eq!(same.degree(), n.degree());
        assert_eq!(same.canonical_values(), n.canonical_values());
        // Dropping one vine edge keeps the values, lowers the degree.
        let r = restrict(&g, &n, EdgeSet::singleton(2), &caps).unwrap();
        assert_eq!(r.degree(), 1);
        assert_eq!(r.value(&Multigraph::vine(2), VertexSet::singleton(0)), 1);
        // Disconnecting restrictions are rejected.
        assert!(restrict(&g, &n, g.all_edges(), &caps).is_err());
        // Validity is preserved.
        let g2 = nonclassical_graph();
        let n2 = nonclassical_stability();
        for ei in 0..g2.n_edges() {
            let s = EdgeSet::singleton(ei);
            if !g2.delete_edges(s).is_connected() {
                continue;
            }
            let r = restrict(&g2, &n2, s, &caps).unwrap();
            assert!(r.is_valid(&g2.delete_edges(s), &caps).unwrap());
            assert_eq!(r.degree(), n2.degree() - 1);
        }
    }

    #[test]
    fn pushforward_examples() {
        let caps = Caps::default();
        let tri = Multigraph::cycle(3);
        let values = BTreeMap::from([
            (VertexSet::singleton(0), 0),
            (VertexSet::from_iter([0, 1]), 0),
            (VertexSet::from_iter([0, 2]), 0),
        ]);
        let n = VStability::new(&tri, 1, values, &caps).unwrap();
        assert!(n.is_valid(&tri, &caps).unwrap());
        let id = GraphMorphism::identity(&tri);
        let same = pushforward(&id, &n, &caps).unwrap();
        assert_eq!(same, n);
        // Contract one edge: vine of type 2 with the fiber values.
        let m = tri.contract_edges(EdgeSet::singleton(2));
        let pushed = pushforward(&m, &n, &caps).unwrap();
        assert_eq!(pushed.degree(), 1);
        assert!(pushed.is_valid(m.target(), &caps).unwrap());
        // The fiber over target vertex 0 is {v0, v1}.
        assert_eq!(
            pushed.value(m.target(), VertexSet::singleton(0)),
            n.value(&tri, VertexSet::from_iter([0, 1]))
        );
    }

    #[test]
    fn translation_group_action() {
        let caps = Caps::default();
        let (g, n) = vine_stability(2, 0, 1);
        let d = Divisor(vec![2, -1]);
        let moved = n.translate(&d);
        assert_eq!(moved.degree(), 1);
        assert_eq!(moved.translate(&d.neg()), n);
        assert_eq!(n.translate(&Divisor::zero(2)), n);
        // vset shifts pointwise on every stratum.
        let p = vset(&g, &n, &caps).unwrap();
        let q = vset(&g, &moved, &caps).unwrap();
        for (kept, divs) in &p.strata {
            let shifted: BTreeSet<Divisor> = divs.iter().map(|x| x.add(&d)).collect();
            assert_eq!(q.stratum(*kept).unwrap(), &shifted);
        }
    }

    #[test]
    fn canonical_form_on_vines_and_trees() {
        let caps = Caps::default();
        for t in 1..=4usize {
            let (g, n) = vine_stability(t, 3, 2);
            let tree = spanning_trees(&g).unwrap()[0];
            let (canon, d) = canonical_form(&g, &n, tree, &caps).unwrap();
            assert_eq!(canon.degree(), g.genus() as i64);
            // The window collapses: both sides forced to 0.
            assert_eq!(canon.value(&g, VertexSet::singleton(0)), 0);
            assert_eq!(canon.value(&g, VertexSet::singleton(1)), 0);
            assert_eq!(n.translate(&d), canon);
            // Idempotence.
            let (again, zero) = canonical_form(&g, &canon, tree, &caps).unwrap();
            assert_eq!(again, canon);
            assert_eq!(zero, Divisor::zero(2));
        }
        // Path graphs: everything is forced.
        let path = Multigraph::path(4);
        let pairs = path.biconnected_pairs(&caps).unwrap();
        let values: BTreeMap<VertexSet, i64> =
            pairs.iter().map(|&w| (w, w.len() as i64)).collect();
        let n = VStability::new(&path, 4, values, &caps).unwrap();
        assert!(n.is_valid(&path, &caps).unwrap());
        let tree = path.all_edges();
        let (canon, _) = canonical_form(&path, &n, tree, &caps).unwrap();
        assert_eq!(canon.degree(), 0);
        for v in canon.canonical_values().values() {
            assert_eq!(*v, 0);
        }
    }

    #[test]
    fn translation_equivalence_witness() {
        let caps = Caps::default();
        let (g, n) = vine_stability(3, 1, 0);
        assert_eq!(
            equivalent_by_translation(&g, &n, &n, &caps).unwrap(),
            Some(Divisor::zero(2))
        );
        let d = Divisor(vec![-2, 3]);
        let moved = n.translate(&d);
        assert_eq!(
            equivalent_by_translation(&g, &n, &moved, &caps).unwrap(),
            Some(d)
        );
    }

    #[test]
    fn enumeration_counts() {
        let caps = Caps::default();
        // Trees and vines have a single class.
        for g in [
            Multigraph::path(2),
            Multigraph::path(4),
            Multigraph::vine(2),
            Multigraph::vine(5),
        ] {
            let classes = enumerate_up_to_translation(&g, &caps).unwrap();
            assert_eq!(classes.len(), 1, "graph with {} edges", g.n_edges());
        }
        // Every output validates and canonicalizes to itself.
        let theta = Multigraph::theta();
        let classes = enumerate_up_to_translation(&theta, &caps).unwrap();
        assert_eq!(classes.len(), 1);
        let tri = Multigraph::cycle(3);
        let tree = spanning_trees(&tri).unwrap()[0];
        for n in enumerate_up_to_translation(&tri, &caps).unwrap() {
            assert!(n.is_valid(&tri, &caps).unwrap());
            let (canon, d) = canonical_form(&tri, &n, tree, &caps).unwrap();
            assert_eq!(canon, n);
            assert_eq!(d, Divisor::zero(3));
        }
    }

    #[test]
    fn enumeration_matches_wide_box_quotient_on_triangle() {
        // Independent oracle: enumerate all valid degree-1 assignments
        // with canonical values in [-3, 3], then quotient by translation
        // via explicit divisor solving.
        let caps = Caps::default();
        let tri = Multigraph::cycle(3);
        let pairs = tri.biconnected_pairs(&caps).unwrap();
        assert_eq!(pairs.len(), 3);
        let mut all_valid: Vec<VStability> = Vec::new();
        for a in -3..=3i64 {
            for b in -3..=3i64 {
                for c in -3..=3i64 {
                    let values =
                        BTreeMap::from([(pairs[0], a), (pairs[1], b), (pairs[2], c)]);
                    let n = VStability::new(&tri, 1, values, &caps).unwrap();
                    if n.is_valid(&tri, &caps).unwrap() {
                        all_valid.push(n);
                    }
                }
            }
        }
        assert!(!all_valid.is_empty());
        // Explicit translation test: derive D from the three canonical
        // sides {0}, {0,1}, {0,2} and verify.
        let related = |x: &VStability, y: &VStability| -> bool {
            let d0 = y.value(&tri, pairs[0]) - x.value(&tri, pairs[0]);
            let d1 = y.value(&tri, pairs[1]) - x.value(&tri, pairs[1]) - d0;
            let d2 = y.value(&tri, pairs[2]) - x.value(&tri, pairs[2]) - d0;
            let d = Divisor(vec![d0, d1, d2]);
            &x.translate(&d) == y
        };
        let mut classes: Vec<VStability> = Vec::new();
        for n in &all_valid {
            if !classes.iter().any(|c| related(c, n)) {
                classes.push(n.clone());
            }
        }
        let enumerated = enumerate_up_to_translation(&tri, &caps).unwrap();
        assert_eq!(enumerated.len(), classes.len());
    }

    #[test]
    fn polarization_roundtrip_on_vine() {
        let caps = Caps::default();
        let g = Multigraph::vine(2);
        let phi = Polarization(vec![rat(1, 3), rat(-1, 3)]);
        let n = from_polarization(&g, &phi, &caps).unwrap();
        assert_eq!(n.degree(), 0);
        assert_eq!(n.value(&g, VertexSet::singleton(0)), 0);
        assert_eq!(n.value(&g, VertexSet::singleton(1)), -1);
        // Walls are rejected with the offending subset named.
        let wall = Polarization(vec![Rational::one(), -Rational::one()]);
        assert!(matches!(
            from_polarization(&g, &wall, &caps),
            Err(Error::NotGeneral(_))
        ));
        // Non-integer total degree is rejected.
        let skew = Polarization(vec![rat(1, 3), rat(1, 3)]);
        assert!(matches!(
            from_polarization(&g, &skew, &caps),
            Err(Error::NonIntegerDegree)
        ));
    }

    #[test]
    fn polarization_translation_covariance() {
        let caps = Caps::default();
        let g = Multigraph::cycle(4);
        let phi = Polarization(vec![rat(1, 5), rat(3, 5), rat(4, 5), rat(2, 5)]);
        let n = from_polarization(&g, &phi, &caps).unwrap();
        let d = Divisor(vec![1, 0, -2, 1]);
        let shifted = Polarization(
            phi.0
                .iter()
                .zip(&d.0)
                .map(|(p, x)| p + rat(*x, 1))
                .collect(),
        );
        let n_shifted = from_polarization(&g, &shifted, &caps).unwrap();
        assert_eq!(n.translate(&d), n_shifted);
    }

    #[test]
    fn classicality_on_vines_and_corpus() {
        let caps = Caps::default();
        // Any valid vine stability is classical: the 1-dimensional
        // window is nonempty.
        for t in 1..=4usize {
            for n1 in -2..=2 {
                let (g, n) = vine_stability(t, 0, n1);
                match is_classical(&g, &n, &caps).unwrap() {
                    Classicality::Classical { witness, .. } => {
                        let back = from_polarization(&g, &witness, &caps).unwrap();
                        assert_eq!(back, n);
                    }
                    Classicality::NotClassical { .. } => panic!("vine must be classical"),
                }
            }
        }
        // The corpus stability is the negative control.
        let g = nonclassical_graph();
        let n = nonclassical_stability();
        match is_classical(&g, &n, &caps).unwrap() {
            Classicality::NotClassical { max_slack } => {
                let slack = max_slack.expect("equalities are consistent");
                assert!(!slack.is_positive());
            }
            Classicality::Classical { .. } => panic!("corpus stability must not be classical"),
        }
    }

    #[test]
    fn classicality_roundtrip_random() {
        use rand::{Rng, SeedableRng};
        let caps = Caps::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let graphs = [
            Multigraph::cycle(3),
            Multigraph::theta(),
            Multigraph::cycle(4),
        ];
        for g in &graphs {
            let mut done = 0;
            while done < 10 {
                let mut phi: Vec<Rational> = (0..g.n_vertices())
                    .map(|_| rat(rng.gen_range(-12..=12), rng.gen_range(1..=4)))
                    .collect();
                // Force an integer total by adjusting the last entry.
                let partial: Rational = phi[..g.n_vertices() - 1]
                    .iter()
                    .fold(Rational::zero(), |a, v| a + v);
                let target = rat(rng.gen_range(-3..=3), 1);
                *phi.last_mut().unwrap() = target - partial;
                let phi = Polarization(phi);
                let Ok(n) = from_polarization(g, &phi, &caps) else {
                    continue; // on a wall, resample
                };
                done += 1;
                match is_classical(g, &n, &caps).unwrap() {
                    Classicality::Classical { witness, .. } => {
                        assert_eq!(from_polarization(g, &witness, &caps).unwrap(), n);
                    }
                    Classicality::NotClassical { .. } => {
                        panic!("stability from a polarization must be classical")
                    }
                }
            }
        }
    }

    #[test]
    fn vset_uniqueness_across_enumerated() {
        // Distinct canonical stabilities have distinct upper sets.
        let caps = Caps::default();
        for g in [
            Multigraph::cycle(3),
            Multigraph::theta(),
            Multigraph::cycle(4),
        ] {
            let classes = enumerate_up_to_translation(&g, &caps).unwrap();
            let sets: Vec<UpperSet> = classes
                .iter()
                .map(|n| vset(&g, n, &caps).unwrap())
                .collect();
            for i in 0..sets.len() {
                for j in i + 1..sets.len() {
                    assert_ne!(sets[i], sets[j], "vset must be injective");
                }
            }
        }
    }
}
