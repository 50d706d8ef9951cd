//! Divisors, the graph Laplacian, Picard-group equivalence via q-reduced
//! forms, and indegree divisors of partial orientations.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::multigraph::Multigraph;
use crate::set::{EdgeSet, VertexSet};

/// An integer-valued function on the vertices of a fixed graph.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Divisor(pub Vec<i64>);

impl Divisor {
    pub fn zero(n: usize) -> Self {
        Divisor(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.0
            .iter()
            .try_fold(0i64, |acc, &v| acc.checked_add(v))
            .expect("divisor degree overflow")
    }

    /// `D_W`, the sum of values over a vertex subset.
    pub fn sum_over(&self, w: VertexSet) -> i64 {
        w.iter()
            .try_fold(0i64, |acc, v| acc.checked_add(self.0[v]))
            .expect("divisor sum overflow")
    }

    pub fn add(&self, other: &Divisor) -> Divisor {
        Divisor(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.checked_add(*b).expect("divisor add overflow"))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Divisor) -> Divisor {
        Divisor(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.checked_sub(*b).expect("divisor sub overflow"))
                .collect(),
        )
    }

    pub fn neg(&self) -> Divisor {
        Divisor(self.0.iter().map(|v| -v).collect())
    }
}

impl std::fmt::Debug for Divisor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// An orientation of a subset of the edges. Loops in the support carry
/// no head choice; every non-loop support edge has one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialOrientation {
    pub support: EdgeSet,
    pub heads: BTreeMap<usize, usize>,
}

impl PartialOrientation {
    pub fn new(g: &Multigraph, support: EdgeSet, heads: BTreeMap<usize, usize>) -> Result<Self> {
        for ei in support.iter() {
            let e = g.edge(ei);
            if e.is_loop() {
                if heads.contains_key(&ei) {
                    return Err(Error::Invalid(format!(
                        "loop {} cannot carry a head choice",
                        e.label
                    )));
                }
            } else {
                match heads.get(&ei) {
                    Some(&h) if h == e.ends.0 || h == e.ends.1 => {}
                    _ => {
                        return Err(Error::Invalid(format!(
                            "edge {} needs a head among its endpoints",
                            e.label
                        )))
                    }
                }
            }
        }
        if heads.keys().any(|ei| !support.contains(*ei)) {
            return Err(Error::Invalid("head assigned outside the support".into()));
        }
        Ok(PartialOrientation { support, heads })
    }
}

/// The chip-firing Laplacian: `Δ(D)_v = -D_v val(v) + Σ_{w≠v} D_w val(v,w)`.
/// Loops contribute nothing and the result always has degree 0.
pub fn laplacian(g: &Multigraph, d: &Divisor) -> Divisor {
    let n = g.n_vertices();
    let mut out = vec![0i64; n];
    for e in g.edges() {
        if e.is_loop() {
            continue;
        }
        let (a, b) = e.ends;
        // Each edge moves one unit of D_b toward a and of D_a toward b.
        out[a] += d.0[b] - d.0[a];
        out[b] += d.0[a] - d.0[b];
    }
    Divisor(out)
}

/// Unburnt set of Dhar's burning algorithm started at `q`. Requires
/// `d >= 0` away from `q`. Empty output means `d` is q-reduced.
fn dhar_unburnt(g: &Multigraph, d: &Divisor, q: usize) -> VertexSet {
    let n = g.n_vertices();
    let mut burnt = VertexSet::singleton(q);
    loop {
        let mut changed = false;
        for v in 0..n {
            if burnt.contains(v) {
                continue;
            }
            let fire = g
                .edges_between(g.all_edges(), VertexSet::singleton(v), burnt)
                .len() as i64;
            if fire > d.0[v] {
                burnt.insert(v);
                changed = true;
            }
        }
        if !changed {
            return burnt.complement(n);
        }
    }
}

/// Whether `d` is q-reduced: nonnegative away from `q` and no subset
/// avoiding `q` can fire.
pub fn is_q_reduced(g: &Multigraph, d: &Divisor, q: usize) -> bool {
    (0..g.n_vertices()).all(|v| v == q || d.0[v] >= 0) && dhar_unburnt(g, d, q).is_empty()
}

/// The unique q-reduced divisor linearly equivalent to `d`, computed by
/// iterated runs of Dhar's burning algorithm.
pub fn q_reduce(g: &Multigraph, d: &Divisor, q: usize) -> Result<Divisor> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n_vertices();
    let mut cur = d.clone();
    // Phase 1: make every value away from q nonnegative. Adding
    // c(Γ)·(v - q) stays within the linear equivalence class because the
    // Jacobian group has order c(Γ).
    let c = complexity_int(g)?;
    let c: i64 = (&c)
        .try_into()
        .map_err(|_| Error::Overflow("complexity too large for q-reduction"))?;
    for v in 0..n {
        if v != q && cur.0[v] < 0 {
            let k = (-cur.0[v] + c - 1) / c;
            cur.0[v] = cur.0[v].checked_add(k * c).expect("q-reduce overflow");
            cur.0[q] = cur.0[q].checked_sub(k * c).expect("q-reduce overflow");
        }
    }
    // Phase 2: fire unburnt sets until everything burns.
    loop {
        let unburnt = dhar_unburnt(g, &cur, q);
        if unburnt.is_empty() {
            return Ok(cur);
        }
        // Fire the whole unburnt set as many times as possible at once.
        let burnt = unburnt.complement(n);
        let mut m = i64::MAX;
        for v in unburnt.iter() {
            let out = g
                .edges_between(g.all_edges(), VertexSet::singleton(v), burnt)
                .len() as i64;
            if out > 0 {
                m = m.min(cur.0[v] / out);
            }
        }
        let m = m.max(1);
        for e in g.edges() {
            if e.is_loop() {
                continue;
            }
            let (a, b) = e.ends;
            match (unburnt.contains(a), unburnt.contains(b)) {
                (true, false) => {
                    cur.0[a] -= m;
                    cur.0[b] += m;
                }
                (false, true) => {
                    cur.0[b] -= m;
                    cur.0[a] += m;
                }
                _ => {}
            }
        }
    }
}

/// Linear equivalence of divisors: equal degree and difference in the
/// image of the Laplacian, tested through q-reduced canonical forms at
/// the base vertex 0.
pub fn pic_equivalent(g: &Multigraph, d1: &Divisor, d2: &Divisor) -> Result<bool> {
    if d1.degree() != d2.degree() {
        return Ok(false);
    }
    Ok(q_reduce(g, d1, 0)? == q_reduce(g, d2, 0)?)
}

/// Exact determinant by fraction-free Bareiss elimination over `i128`,
/// `None` on overflow.
fn det_bareiss_i128(mut m: Vec<Vec<i128>>) -> Option<i128> {
    let n = m.len();
    if n == 0 {
        return Some(1);
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let pivot = (k + 1..n).find(|&i| m[i][k] != 0)?;
            m.swap(k, pivot);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let a = m[i][j].checked_mul(m[k][k])?;
                let b = m[i][k].checked_mul(m[k][j])?;
                m[i][j] = a.checked_sub(b)? / prev;
            }
        }
        prev = m[k][k];
        if prev == 0 {
            return Some(0);
        }
    }
    Some(sign * m[n - 1][n - 1])
}

fn det_bareiss_big(m: &[Vec<i128>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(pivot) => {
                    m.swap(k, pivot);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
        if prev.is_zero() {
            return BigInt::zero();
        }
    }
    sign * m[n - 1][n - 1].clone()
}

/// Number of spanning trees by the matrix-tree determinant (reduced
/// Laplacian, exact arithmetic).
pub(crate) fn complexity_int(g: &Multigraph) -> Result<BigUint> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n_vertices();
    if n <= 1 {
        return Ok(BigUint::one());
    }
    // Reduced Laplacian with the row and column of vertex 0 removed.
    let mut m = vec![vec![0i128; n - 1]; n - 1];
    for e in g.edges() {
        if e.is_loop() {
            continue;
        }
        let (a, b) = e.ends;
        if a > 0 {
            m[a - 1][a - 1] += 1;
        }
        if b > 0 {
            m[b - 1][b - 1] += 1;
        }
        if a > 0 && b > 0 {
            m[a - 1][b - 1] -= 1;
            m[b - 1][a - 1] -= 1;
        }
    }
    let det = match det_bareiss_i128(m.clone()) {
        Some(d) => BigInt::from(d),
        None => det_bareiss_big(&m),
    };
    debug_assert!(!det.is_negative());
    Ok(det.magnitude().clone())
}

/// `|Pic^degree(Γ)| = c(Γ)`, independently of the degree.
pub fn pic_class_count(g: &Multigraph, _degree: i64) -> Result<BigUint> {
    complexity_int(g)
}

/// The indegree divisor of a partial orientation: head counts for
/// non-loop edges, plus one at the base vertex of every loop in the
/// support.
pub fn indegree_divisor(g: &Multigraph, o: &PartialOrientation) -> Divisor {
    let mut out = vec![0i64; g.n_vertices()];
    for ei in o.support.iter() {
        let e = g.edge(ei);
        if e.is_loop() {
            out[e.ends.0] += 1;
        } else {
            out[o.heads[&ei]] += 1;
        }
    }
    Divisor(out)
}

/// The set `𝒟(S)` of all indegree divisors over orientations of `s`.
pub fn indegree_set(g: &Multigraph, s: EdgeSet) -> BTreeSet<Divisor> {
    let non_loops: Vec<usize> = s.iter().filter(|&ei| !g.edge(ei).is_loop()).collect();
    assert!(
        non_loops.len() <= 20,
        "indegree_set materializes at most 2^20 orientations"
    );
    let mut base = vec![0i64; g.n_vertices()];
    for ei in s.iter() {
        let e = g.edge(ei);
        if e.is_loop() {
            base[e.ends.0] += 1;
        }
    }
    let mut out = BTreeSet::new();
    for mask in 0u32..(1u32 << non_loops.len()) {
        let mut d = base.clone();
        for (i, &ei) in non_loops.iter().enumerate() {
            let e = g.edge(ei);
            let head = if (mask >> i) & 1 == 0 {
                e.ends.0
            } else {
                e.ends.1
            };
            d[head] += 1;
        }
        out.insert(Divisor(d));
    }
    out
}

/// Membership test for `𝒟(S)` without materializing the set: loops force
/// a fixed contribution, and the rest reduces to a unit-capacity flow
/// from edges to their endpoints.
pub fn is_indegree_realizable(g: &Multigraph, s: EdgeSet, d: &Divisor) -> bool {
    if d.len() != g.n_vertices() {
        return false;
    }
    if d.degree() != s.len() as i64 {
        return false;
    }
    let mut need = d.0.clone();
    let mut non_loops = Vec::new();
    for ei in s.iter() {
        let e = g.edge(ei);
        if e.is_loop() {
            need[e.ends.0] -= 1;
        } else {
            non_loops.push(ei);
        }
    }
    if need.iter().any(|&x| x < 0) {
        return false;
    }
    // Bipartite flow: source -> edge (cap 1) -> endpoint -> sink (cap need).
    let n = g.n_vertices();
    let m = non_loops.len();
    if m == 0 {
        return need.iter().all(|&x| x == 0);
    }
    let source = 0usize;
    let sink = 1 + m + n;
    let total = sink + 1;
    let mut cap = vec![vec![0i64; total]; total];
    for (i, &ei) in non_loops.iter().enumerate() {
        let e = g.edge(ei);
        cap[source][1 + i] = 1;
        cap[1 + i][1 + m + e.ends.0] = 1;
        cap[1 + i][1 + m + e.ends.1] = 1;
    }
    for v in 0..n {
        cap[1 + m + v][sink] = need[v];
    }
    let mut flow = 0i64;
    loop {
        // BFS augmenting path.
        let mut prev = vec![usize::MAX; total];
        prev[source] = source;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..total {
                if prev[v] == usize::MAX && cap[u][v] > 0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[sink] == usize::MAX {
            break;
        }
        let mut bottleneck = i64::MAX;
        let mut v = sink;
        while v != source {
            bottleneck = bottleneck.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = sink;
        while v != source {
            cap[prev[v]][v] -= bottleneck;
            cap[v][prev[v]] += bottleneck;
            v = prev[v];
        }
        flow += bottleneck;
    }
    flow == m as i64
}
