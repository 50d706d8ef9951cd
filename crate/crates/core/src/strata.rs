//! Stratification invariants read off the stable-divisor poset: orbit
//! posets with cover relations, component counts, the Grothendieck
//! class, the perverse-filtration graph factor, and the face poset of
//! the polytopal decomposition attached to a stability condition.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::multigraph::{Caps, Multigraph};
use crate::orbit::{leq, OrbitPair, UpperSet};
use crate::spanning::{complexity_u64, genus_profile};
use crate::vstability::{vset, VStability};

/// Which way the reported relation goes: `Closure` lists covers of the
/// specialization order (larger strata close over smaller ones);
/// `Face` is the opposite convention, where the faces of a cell are the
/// elements above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderConvention {
    Closure,
    Face,
}

/// A finite poset extracted from an upper set, with Hasse-style cover
/// relations and one dimension label per element.
#[derive(Debug, Clone)]
pub struct OrbitPosetReport {
    pub convention: OrderConvention,
    /// Sorted by (kept-set size descending, kept set, divisor).
    pub elements: Vec<OrbitPair>,
    /// `(i, j)` means element `i` is strictly below element `j` with
    /// nothing in between.
    pub covers: Vec<(usize, usize)>,
    /// For `Closure`: the rank `|E(G)|`. For `Face`: the cell dimension
    /// `|E(G)^c|`.
    pub dims: Vec<usize>,
}

impl OrbitPosetReport {
    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.elements.len())
            .filter(|&i| self.covers.iter().all(|&(lo, _)| lo != i))
            .collect()
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.elements.len())
            .filter(|&i| self.covers.iter().all(|&(_, hi)| hi != i))
            .collect()
    }
}

fn sorted_elements(p: &UpperSet) -> Vec<OrbitPair> {
    let mut elements: Vec<OrbitPair> = p.iter().collect();
    elements.sort_by(|a, b| {
        b.kept
            .len()
            .cmp(&a.kept.len())
            .then(a.kept.cmp(&b.kept))
            .then(a.divisor.cmp(&b.divisor))
    });
    elements
}

fn cover_relations(g: &Multigraph, elements: &[OrbitPair]) -> Result<Vec<(usize, usize)>> {
    let m = elements.len();
    let mut below = vec![vec![false; m]; m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                below[i][j] = leq(g, &elements[i], &elements[j])?;
            }
        }
    }
    // Transitive reduction of a finite poset.
    let mut covers = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if below[i][j] && !(0..m).any(|k| below[i][k] && below[k][j]) {
                covers.push((i, j));
            }
        }
    }
    Ok(covers)
}

/// The poset of strata of the upper set attached to a stability
/// condition, in the closure order.
pub fn orbit_poset(g: &Multigraph, n: &VStability, caps: &Caps) -> Result<OrbitPosetReport> {
    let p = vset(g, n, caps)?;
    poset_of_upper_set(g, &p, OrderConvention::Closure)
}

/// The same poset for an arbitrary upper set.
pub fn poset_of_upper_set(
    g: &Multigraph,
    p: &UpperSet,
    convention: OrderConvention,
) -> Result<OrbitPosetReport> {
    let elements = sorted_elements(p);
    let covers = cover_relations(g, &elements)?;
    let dims = elements
        .iter()
        .map(|e| match convention {
            OrderConvention::Closure => e.kept.len(),
            OrderConvention::Face => g.n_edges() - e.kept.len(),
        })
        .collect();
    Ok(OrbitPosetReport {
        convention,
        elements,
        covers,
        dims,
    })
}

/// Number of top strata; always the complexity for a valid condition.
pub fn component_count(g: &Multigraph, n: &VStability, caps: &Caps) -> Result<u64> {
    let p = vset(g, n, caps)?;
    Ok(p.stratum_size(g.all_edges()) as u64)
}

/// Integer polynomials in the two formal variables `q` and `L`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TwoVarPoly {
    /// Coefficients keyed by `(q power, L power)`; zero entries absent.
    pub coeffs: BTreeMap<(u32, u32), i64>,
}

impl TwoVarPoly {
    pub fn zero() -> Self {
        TwoVarPoly::default()
    }

    pub fn constant(c: i64) -> Self {
        let mut p = TwoVarPoly::zero();
        p.add_term(0, 0, c);
        p
    }

    pub fn term(q: u32, l: u32, c: i64) -> Self {
        let mut p = TwoVarPoly::zero();
        p.add_term(q, l, c);
        p
    }

    pub fn add_term(&mut self, q: u32, l: u32, c: i64) {
        if c == 0 {
            return;
        }
        let slot = self.coeffs.entry((q, l)).or_insert(0);
        *slot += c;
        if *slot == 0 {
            self.coeffs.remove(&(q, l));
        }
    }

    pub fn add(&self, other: &TwoVarPoly) -> TwoVarPoly {
        let mut out = self.clone();
        for (&(q, l), &c) in &other.coeffs {
            out.add_term(q, l, c);
        }
        out
    }

    pub fn mul(&self, other: &TwoVarPoly) -> TwoVarPoly {
        let mut out = TwoVarPoly::zero();
        for (&(q1, l1), &c1) in &self.coeffs {
            for (&(q2, l2), &c2) in &other.coeffs {
                out.add_term(q1 + q2, l1 + l2, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> TwoVarPoly {
        let mut out = TwoVarPoly::constant(1);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn scale(&self, c: i64) -> TwoVarPoly {
        let mut out = TwoVarPoly::zero();
        for (&(q, l), &c0) in &self.coeffs {
            out.add_term(q, l, c0 * c);
        }
        out
    }

    pub fn eval(&self, q: i64, l: i64) -> i64 {
        self.coeffs
            .iter()
            .map(|(&(qp, lp), &c)| c * q.pow(qp) * l.pow(lp))
            .sum()
    }
}

impl std::fmt::Display for TwoVarPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(q, l), &c) in &self.coeffs {
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.unsigned_abs();
            let mut parts: Vec<String> = Vec::new();
            if mag != 1 || (q == 0 && l == 0) {
                parts.push(mag.to_string());
            }
            match q {
                0 => {}
                1 => parts.push("q".into()),
                _ => parts.push(format!("q^{q}")),
            }
            match l {
                0 => {}
                1 => parts.push("L".into()),
                _ => parts.push(format!("L^{l}")),
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// The class of the compactified Jacobian attached to a stability
/// condition: `c(Γ) · L^{g(Γ)}` times a symbolic Jacobian factor that is
/// never expanded (it depends on the curve, not the graph).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrothendieckClass {
    pub graph_part: TwoVarPoly,
    /// Marker for the degree-zero Jacobian factor of the normalization.
    pub jacobian_factor: bool,
}

impl std::fmt::Display for GrothendieckClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})", self.graph_part)?;
        if self.jacobian_factor {
            write!(f, " * [J0]")?;
        }
        Ok(())
    }
}

pub fn grothendieck_class(
    g: &Multigraph,
    n: &VStability,
    caps: &Caps,
) -> Result<GrothendieckClass> {
    n.ensure_valid(g, caps)?;
    let c = complexity_u64(g)? as i64;
    Ok(GrothendieckClass {
        graph_part: TwoVarPoly::term(0, g.genus() as u32, c),
        jacobian_factor: true,
    })
}

/// The graph factor of the perverse filtration:
/// `Σ_h n_h (qL)^{g-h} ((1-q)(1-qL))^h`, expanded exactly from the genus
/// profile. Independent of any stability condition.
pub fn perverse_graph_factor(g: &Multigraph, caps: &Caps) -> Result<TwoVarPoly> {
    let profile = genus_profile(g, caps)?;
    let genus = g.genus() as u32;
    let ql = TwoVarPoly::term(1, 1, 1);
    // (1 - q)(1 - qL) = 1 - q - qL + q^2 L
    let mut core = TwoVarPoly::constant(1);
    core.add_term(1, 0, -1);
    core.add_term(1, 1, -1);
    core.add_term(2, 1, 1);
    let mut out = TwoVarPoly::zero();
    for (&h, &count) in &profile {
        let h = h as u32;
        let term = ql.pow(genus - h).mul(&core.pow(h)).scale(count as i64);
        out = out.add(&term);
    }
    Ok(out)
}

/// The face poset of the polytopal decomposition attached to a
/// stability condition: same elements as the orbit poset, opposite
/// order convention, cells labeled by `dim θ_{G,D} = |E(G)^c|`. Top
/// cells sit over spanning trees and there are exactly `c(Γ)` of them.
pub fn mumford_face_poset(
    g: &Multigraph,
    n: &VStability,
    caps: &Caps,
) -> Result<OrbitPosetReport> {
    let p = vset(g, n, caps)?;
    poset_of_upper_set(g, &p, OrderConvention::Face)
}
