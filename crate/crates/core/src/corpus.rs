//! Bundled example graphs used by the test suite and shipped as data
//! files with the CLI.

use crate::multigraph::Multigraph;

/// A connected 6-vertex, 8-edge graph of genus 3. Its degree-4
/// stability condition built by [`nonclassical_stability`] is valid but
/// does not arise from any general numerical polarization, which makes
/// the pair the standard negative control for the classicality test.
pub fn nonclassical_graph() -> Multigraph {
    // Vertices named 1..6; an edge "ij" joins i and j.
    let names = (1..=6).map(|i| i.to_string()).collect();
    let ends = [
        (0, 2),
        (2, 4),
        (1, 3),
        (3, 4),
        (0, 5),
        (1, 5),
        (0, 3),
        (1, 2),
    ];
    let edges = ends
        .iter()
        .map(|&(u, v)| (format!("{}{}", u + 1, v + 1), u, v))
        .collect();
    Multigraph::new(names, edges).expect("corpus graph")
}

/// The degree-4 stability condition on [`nonclassical_graph`] that no
/// general numerical polarization induces: the offset
/// `n_W - g(Γ[W])` is 0 for sides of size at most 2 and five chosen
/// triples, and 1 for their complements.
pub fn nonclassical_stability() -> crate::vstability::VStability {
    let g = nonclassical_graph();
    let caps = crate::multigraph::Caps::default();
    let pairs = g.biconnected_pairs(&caps).expect("connected corpus graph");
    let zero_triples: Vec<crate::set::VertexSet> = [
        [1usize, 4, 5],
        [2, 3, 5],
        [3, 4, 5],
        [2, 4, 6],
        [1, 3, 6],
    ]
    .iter()
    .map(|t| crate::set::VertexSet::from_iter(t.iter().map(|&i| i - 1)))
    .collect();
    let mut values = std::collections::BTreeMap::new();
    for w in pairs {
        let offset = if w.len() <= 2 || zero_triples.contains(&w) {
            0
        } else {
            1
        };
        values.insert(w, g.induced_genus(w) as i64 + offset);
    }
    crate::vstability::VStability::new(&g, 4, values, &caps).expect("well-formed corpus stability")
}
