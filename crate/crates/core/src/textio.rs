//! Line-oriented text formats for graphs, divisors, stability
//! conditions, tree functions, and upper-set dumps. All writers are
//! deterministic; all parsers report the offending line on failure.

use std::collections::BTreeMap;

use crate::bdset::TreeFunction;
use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::multigraph::{Caps, Multigraph};
use crate::orbit::UpperSet;
use crate::set::{EdgeSet, VertexSet};
use crate::vstability::{VStability, Violation};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Lines that carry content: comment and blank lines stripped, original
/// line numbers kept.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Graph format: `v <name>` declares a vertex, `e <label> <u> <v>` an
/// edge (loops via `u = v`). Vertices are auto-created in order of
/// first appearance; edges keep file order.
pub fn parse_graph(text: &str) -> Result<Multigraph> {
    let mut names: Vec<String> = Vec::new();
    let mut edges: Vec<(String, usize, usize)> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut intern = |name: &str, names: &mut Vec<String>| -> usize {
        if let Some(&i) = index.get(name) {
            return i;
        }
        let i = names.len();
        names.push(name.to_string());
        index.insert(name.to_string(), i);
        i
    };
    for (lineno, line) in content_lines(text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["v", name] => {
                intern(name, &mut names);
            }
            ["e", label, u, v] => {
                let ui = intern(u, &mut names);
                let vi = intern(v, &mut names);
                edges.push((label.to_string(), ui, vi));
            }
            ["v", ..] => return Err(parse_err(lineno, "vertex lines are `v <name>`")),
            ["e", ..] => return Err(parse_err(lineno, "edge lines are `e <label> <u> <v>`")),
            _ => return Err(parse_err(lineno, format!("unrecognized line {line:?}"))),
        }
    }
    Multigraph::new(names, edges).map_err(|e| parse_err(0, e.to_string()))
}

pub fn write_graph(g: &Multigraph) -> String {
    let mut out = String::new();
    for name in g.vertex_names() {
        out.push_str(&format!("v {name}\n"));
    }
    for e in g.edges() {
        out.push_str(&format!(
            "e {} {} {}\n",
            e.label,
            g.vertex_name(e.ends.0),
            g.vertex_name(e.ends.1)
        ));
    }
    out
}

/// `name=value` tokens for every vertex, in id order.
pub fn format_divisor(g: &Multigraph, d: &Divisor) -> String {
    (0..g.n_vertices())
        .map(|v| format!("{}={}", g.vertex_name(v), d.0[v]))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_divisor_tokens(g: &Multigraph, tokens: &[&str], lineno: usize) -> Result<Divisor> {
    let mut vals = vec![0i64; g.n_vertices()];
    for tok in tokens {
        let (name, value) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(lineno, format!("expected name=value, got {tok:?}")))?;
        let v = g
            .vertex_by_name(name)
            .ok_or_else(|| parse_err(lineno, format!("unknown vertex {name:?}")))?;
        vals[v] = value
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad integer {value:?}")))?;
    }
    Ok(Divisor(vals))
}

/// Divisor format: a single `d <name>=<int> ...` line; unlisted vertices
/// are zero.
pub fn parse_divisor(g: &Multigraph, text: &str) -> Result<Divisor> {
    let Some((lineno, line)) = content_lines(text).next() else {
        return Err(parse_err(0, "no divisor line found"));
    };
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.first() != Some(&"d") {
        return Err(parse_err(lineno, "divisor lines start with `d`"));
    }
    parse_divisor_tokens(g, &tokens[1..], lineno)
}

pub fn write_divisor(g: &Multigraph, d: &Divisor) -> String {
    format!("d {}\n", format_divisor(g, d))
}

fn parse_vertex_set(g: &Multigraph, braced: &str, lineno: usize) -> Result<VertexSet> {
    let inner = braced
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| parse_err(lineno, format!("expected {{v,...}}, got {braced:?}")))?;
    let mut w = VertexSet::empty();
    for name in inner.split(',').filter(|s| !s.is_empty()) {
        let v = g
            .vertex_by_name(name.trim())
            .ok_or_else(|| parse_err(lineno, format!("unknown vertex {name:?}")))?;
        w.insert(v);
    }
    Ok(w)
}

fn format_vertex_set(g: &Multigraph, w: VertexSet) -> String {
    let names: Vec<&str> = w.iter().map(|v| g.vertex_name(v)).collect();
    format!("{{{}}}", names.join(","))
}

/// Stability format: one `degree <d>` line, then `n {v,...} <int>`
/// lines. Any subset of the pair values may be listed: canonical sides
/// are taken as stored values, listed complements are cross-checked
/// against the sum rule and reported as violations when inconsistent,
/// and missing canonical values are an error.
pub fn parse_vstability(
    g: &Multigraph,
    text: &str,
    caps: &Caps,
) -> Result<(VStability, Vec<Violation>)> {
    let mut degree: Option<i64> = None;
    let mut listed: Vec<(usize, VertexSet, i64)> = Vec::new();
    for (lineno, line) in content_lines(text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["degree", d] => {
                degree = Some(
                    d.parse()
                        .map_err(|_| parse_err(lineno, format!("bad degree {d:?}")))?,
                );
            }
            ["n", braced, value] => {
                let w = parse_vertex_set(g, braced, lineno)?;
                let v: i64 = value
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad integer {value:?}")))?;
                listed.push((lineno, w, v));
            }
            _ => return Err(parse_err(lineno, format!("unrecognized line {line:?}"))),
        }
    }
    let degree = degree.ok_or_else(|| parse_err(0, "missing `degree <d>` line"))?;
    let pairs = g.biconnected_pairs(caps)?;
    let mut canonical: BTreeMap<VertexSet, i64> = BTreeMap::new();
    let mut complements: Vec<(VertexSet, i64)> = Vec::new();
    for (lineno, w, v) in listed {
        if w.is_empty() || w == g.all_vertices() {
            return Err(parse_err(lineno, "subset must be non-trivial"));
        }
        let side = if w.contains(0) {
            w
        } else {
            w.complement(g.n_vertices())
        };
        if !pairs.contains(&side) {
            return Err(parse_err(
                lineno,
                format!("{} is not biconnected", format_vertex_set(g, w)),
            ));
        }
        if w.contains(0) {
            if canonical.insert(w, v).is_some() {
                return Err(parse_err(
                    lineno,
                    format!("duplicate value for {}", format_vertex_set(g, w)),
                ));
            }
        } else {
            complements.push((w, v));
        }
    }
    // Derive canonical values from listed complements when absent.
    for (w, v) in &complements {
        let side = w.complement(g.n_vertices());
        let derived = degree + 1 - g.valence(*w) as i64 - v;
        canonical.entry(side).or_insert(derived);
    }
    let n = VStability::new(g, degree, canonical, caps)
        .map_err(|e| parse_err(0, e.to_string()))?;
    // Cross-check every listed complement against the stored side.
    let mut violations = Vec::new();
    for (w, got) in complements {
        let want = n.value(g, w);
        if want != got {
            violations.push(Violation::SumRule { w, got, want });
        }
    }
    Ok((n, violations))
}

pub fn write_vstability(g: &Multigraph, n: &VStability) -> String {
    let mut out = format!("degree {}\n", n.degree());
    for (&w, &v) in n.canonical_values() {
        out.push_str(&format!("n {} {}\n", format_vertex_set(g, w), v));
    }
    out
}

fn format_edge_set(g: &Multigraph, s: EdgeSet) -> String {
    if s.is_empty() {
        return "-".into();
    }
    let labels: Vec<&str> = s.iter().map(|e| g.edge(e).label.as_str()).collect();
    labels.join(",")
}

fn parse_edge_set(g: &Multigraph, braced: &str, lineno: usize) -> Result<EdgeSet> {
    let inner = braced
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| parse_err(lineno, format!("expected {{label,...}}, got {braced:?}")))?;
    let mut s = EdgeSet::empty();
    for label in inner.split(',').filter(|s| !s.is_empty()) {
        let e = g
            .edge_by_label(label.trim())
            .ok_or_else(|| parse_err(lineno, format!("unknown edge {label:?}")))?;
        s.insert(e);
    }
    Ok(s)
}

/// Tree-function format: one `I {edge-labels} <name>=<int> ...` line per
/// spanning tree, plus a `degree <d>` line.
pub fn parse_tree_function(g: &Multigraph, text: &str) -> Result<TreeFunction> {
    let mut degree: Option<i64> = None;
    let mut values: BTreeMap<EdgeSet, Divisor> = BTreeMap::new();
    for (lineno, line) in content_lines(text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["degree", d] => {
                degree = Some(
                    d.parse()
                        .map_err(|_| parse_err(lineno, format!("bad degree {d:?}")))?,
                );
            }
            ["I", braced, rest @ ..] => {
                let t = parse_edge_set(g, braced, lineno)?;
                let d = parse_divisor_tokens(g, rest, lineno)?;
                if values.insert(t, d).is_some() {
                    return Err(parse_err(lineno, "duplicated spanning tree"));
                }
            }
            _ => return Err(parse_err(lineno, format!("unrecognized line {line:?}"))),
        }
    }
    let degree = degree.ok_or_else(|| parse_err(0, "missing `degree <d>` line"))?;
    TreeFunction::new(g, degree, values).map_err(|e| parse_err(0, e.to_string()))
}

pub fn write_tree_function(g: &Multigraph, i: &TreeFunction) -> String {
    let mut out = format!("degree {}\n", i.degree());
    let mut lines: Vec<(String, String)> = i
        .values()
        .iter()
        .map(|(t, d)| (format_edge_set(g, *t), format_divisor(g, d)))
        .collect();
    lines.sort();
    for (t, d) in lines {
        out.push_str(&format!("I {{{t}}} {d}\n"));
    }
    out
}

/// Upper-set dump: `orbit <edge-labels-of-G> | <divisor>` lines sorted
/// by (kept-set size descending, labels, divisor).
pub fn write_upper_set(g: &Multigraph, p: &UpperSet) -> String {
    let mut lines: Vec<(usize, String, String)> = Vec::new();
    for (kept, divs) in &p.strata {
        for d in divs {
            lines.push((
                g.n_edges() - kept.len(),
                format_edge_set(g, *kept),
                format_divisor(g, d),
            ));
        }
    }
    lines.sort();
    let mut out = format!("degree {}\n", p.degree);
    for (_, labels, divisor) in lines {
        out.push_str(&format!("orbit {labels} | {divisor}\n"));
    }
    out
}
