//! Fast necessary-condition battery for domination candidates.
//!
//! A graph that dominates its subgraphs in the edge-normalised sense must be
//! bipartite, 1-balanced (no subgraph is strictly denser under
//! `e/(v - 1)`), regular on the small side of its bipartition with the
//! maximum degree attained there, and built from pairwise-isomorphic
//! components without isolated vertices. `screen` checks all of these and
//! reports machine-readable reason codes with concrete witnesses; it proves
//! nothing positive, it only rejects.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::DomcertError;
use crate::graph::{is_isomorphic, Graph};
use crate::Result;

/// Exhaustive-subset cap for the densest-subgraph search.
const DENSITY_VERTEX_CAP: usize = 22;

/// Reason codes carried by failing reports.
pub const NOT_BIPARTITE: &str = "NOT_BIPARTITE";
pub const NOT_ONE_BALANCED: &str = "NOT_ONE_BALANCED";
pub const SIDE_IRREGULAR: &str = "SIDE_IRREGULAR";
pub const COMPONENTS_DIFFER: &str = "COMPONENTS_DIFFER";
pub const ISOLATED_VERTEX: &str = "ISOLATED_VERTEX";

/// Outcome of the screening battery. Every failed check carries a witness;
/// `pass` is true exactly when `reasons` is empty. The side-regularity
/// fields are only meaningful for bipartite inputs (they stay in their
/// passing state otherwise, with the bipartiteness failure carrying the
/// reason).
#[derive(Clone, Debug, Serialize)]
pub struct ScreeningReport {
    pub pass: bool,
    pub reasons: Vec<String>,
    pub bipartite: bool,
    /// An edge whose endpoints received equal colours.
    pub odd_edge_witness: Option<(usize, usize)>,
    pub one_balanced: bool,
    /// Vertex set of a subgraph strictly denser than its component.
    pub dense_witness: Option<Vec<usize>>,
    pub small_side_regular: bool,
    /// Vertices exhibiting the degree conflict on or against the small side.
    pub side_witness: Option<Vec<usize>>,
    pub components_identical: bool,
    /// Smallest vertices of two non-isomorphic components.
    pub component_witness: Option<(usize, usize)>,
    pub isolated_vertices: Vec<usize>,
    /// Sorted degree multiset of the larger bipartition side, for
    /// experiments; nothing is asserted about it.
    pub larger_side_degrees: Vec<usize>,
    /// `max_subgraph_density` over the whole graph, as `p/q`, when the
    /// graph is connected and within cap.
    pub max_density: Option<String>,
}

/// Maximum of `e(H')/(v(H') - 1)` over connected induced subgraphs `H'`
/// with at least one edge, with a vertex set attaining it. Exhaustive over
/// connected vertex subsets; first maximiser in ascending bitmask order.
pub fn max_subgraph_density(g: &Graph) -> Result<(Rational64, Vec<usize>)> {
    if !g.is_connected() {
        return Err(DomcertError::BadParams(
            "densest-subgraph search expects a connected graph".into(),
        ));
    }
    if g.n() > DENSITY_VERTEX_CAP {
        return Err(DomcertError::CapExceeded {
            what: "vertex count for densest-subgraph search",
            actual: g.n(),
            cap: DENSITY_VERTEX_CAP,
        });
    }
    if g.edge_count() == 0 {
        return Err(DomcertError::BadParams(
            "densest-subgraph search needs at least one edge".into(),
        ));
    }
    let n = g.n();
    let mut best: Option<(Rational64, u64)> = None;
    for mask in 1u64..1 << n {
        let v = mask.count_ones() as usize;
        if v < 2 || !mask_connected(g, mask) {
            continue;
        }
        let mut e = 0usize;
        for u in 0..n {
            if mask >> u & 1 == 1 {
                e += (g.adj_mask(u) & mask).count_ones() as usize;
            }
        }
        let e = e / 2;
        if e == 0 {
            continue;
        }
        let d = Rational64::new(e as i64, (v - 1) as i64);
        if best.map_or(true, |(bd, _)| d > bd) {
            best = Some((d, mask));
        }
    }
    let (d, mask) = best.expect("a connected graph with an edge has a candidate");
    let verts = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
    Ok((d, verts))
}

fn mask_connected(g: &Graph, mask: u64) -> bool {
    let start = mask.trailing_zeros() as usize;
    let mut seen = 1u64 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0u64;
        let mut f = frontier;
        while f != 0 {
            let v = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= g.adj_mask(v) & mask & !seen;
        }
        seen |= next;
        frontier = next;
    }
    seen == mask
}

/// 2-colouring attempt that reports the first conflicting edge instead of
/// just failing.
fn two_colour(g: &Graph) -> std::result::Result<Vec<usize>, (usize, usize)> {
    let mut colour = vec![usize::MAX; g.n()];
    for start in 0..g.n() {
        if colour[start] != usize::MAX {
            continue;
        }
        colour[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for u in g.neighbors(v) {
                if colour[u] == usize::MAX {
                    colour[u] = colour[v] ^ 1;
                    queue.push_back(u);
                } else if colour[u] == colour[v] {
                    return Err((u.min(v), u.max(v)));
                }
            }
        }
    }
    Ok(colour)
}

/// Runs the whole battery. Never errors: graphs too large for a sub-check
/// simply leave that check's optional evidence empty.
pub fn screen(g: &Graph) -> ScreeningReport {
    let mut reasons = Vec::new();

    let isolated_vertices: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) == 0).collect();
    if !isolated_vertices.is_empty() {
        reasons.push(ISOLATED_VERTEX.to_string());
    }

    let (bipartite, odd_edge_witness) = match two_colour(g) {
        Ok(_) => (true, None),
        Err(edge) => (false, Some(edge)),
    };
    if !bipartite {
        reasons.push(NOT_BIPARTITE.to_string());
    }

    // 1-balancedness per component: no connected subgraph may beat the
    // component's own density.
    let comps = g.connected_components();
    let mut one_balanced = true;
    let mut dense_witness = None;
    for comp in &comps {
        if comp.len() < 2 {
            continue;
        }
        let sub = g.induced(comp);
        let whole = Rational64::new(sub.edge_count() as i64, (sub.n() - 1) as i64);
        match max_subgraph_density(&sub) {
            Ok((best, verts)) if best > whole => {
                one_balanced = false;
                dense_witness = Some(verts.into_iter().map(|v| comp[v]).collect());
                break;
            }
            _ => {}
        }
    }
    if !one_balanced {
        reasons.push(NOT_ONE_BALANCED.to_string());
    }

    let mut small_side_regular = true;
    let mut side_witness = None;
    let mut larger_side_degrees = Vec::new();
    if bipartite && !g.edges().is_empty() {
        let (a, b) = g.bipartition().expect("two-colouring succeeded");
        larger_side_degrees = b.iter().map(|&v| g.degree(v)).collect();
        larger_side_degrees.sort_unstable();
        let delta = (0..g.n()).map(|v| g.degree(v)).max().unwrap_or(0);
        let lo = a.iter().copied().min_by_key(|&v| g.degree(v));
        let hi = a.iter().copied().max_by_key(|&v| g.degree(v));
        if let (Some(lo), Some(hi)) = (lo, hi) {
            if g.degree(lo) != g.degree(hi) {
                small_side_regular = false;
                side_witness = Some(vec![lo, hi]);
            } else if g.degree(hi) != delta {
                // The small side is regular but the maximum degree lives on
                // the other side.
                small_side_regular = false;
                let offender = b
                    .iter()
                    .copied()
                    .find(|&v| g.degree(v) == delta)
                    .expect("maximum attained somewhere");
                side_witness = Some(vec![hi, offender]);
            }
        }
    }
    if !small_side_regular {
        reasons.push(SIDE_IRREGULAR.to_string());
    }

    let mut components_identical = true;
    let mut component_witness = None;
    if comps.len() > 1 {
        let first = g.induced(&comps[0]);
        for comp in &comps[1..] {
            let other = g.induced(comp);
            if !is_isomorphic(&first, &other) {
                components_identical = false;
                component_witness = Some((comps[0][0], comp[0]));
                break;
            }
        }
    }
    if !components_identical {
        reasons.push(COMPONENTS_DIFFER.to_string());
    }

    let max_density = if g.is_connected() {
        max_subgraph_density(g)
            .ok()
            .map(|(d, _)| format!("{}/{}", d.numer(), d.denom()))
    } else {
        None
    };

    ScreeningReport {
        pass: reasons.is_empty(),
        reasons,
        bipartite,
        odd_edge_witness,
        one_balanced,
        dense_witness,
        small_side_regular,
        side_witness,
        components_identical,
        component_witness,
        isolated_vertices,
        larger_side_degrees,
        max_density,
    }
}
