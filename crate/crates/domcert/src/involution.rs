//! Cut involutions and half-folding maps.
//!
//! A cut involution of a connected graph is an order-2 automorphism whose
//! fixed vertex set `F` is a nonempty cut separating the rest into two
//! halves `L` and `R` that the automorphism exchanges, with no edge between
//! the halves. Each one yields two idempotent half-folding maps (fix one
//! half and `F`, push the other half across), and folding an edge subset
//! through such a map is the elementary move every percolation search in
//! this crate is built from.

use std::sync::Arc;

use crate::error::DomcertError;
use crate::graph::{EdgeSubset, Graph, VertexPermutation};
use crate::Result;

/// Which half a half-folding map keeps in place.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn letter(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }

    pub fn from_letter(s: &str) -> Result<Side> {
        match s {
            "L" => Ok(Side::Left),
            "R" => Ok(Side::Right),
            other => Err(DomcertError::BadCertificate(format!(
                "side must be \"L\" or \"R\", got {other:?}"
            ))),
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// An order-2 automorphism with fixed cut `F` and exchanged halves `L`, `R`.
///
/// Only the canonical half assignment is materialised: within each pair of
/// exchanged components, the component containing the smallest vertex id is
/// placed in `L`. Both half-folds remain reachable through [`Side`].
#[derive(Clone, Debug)]
pub struct CutInvolution {
    host: Arc<Graph>,
    perm: VertexPermutation,
    fixed: Vec<usize>,
    left: Vec<usize>,
    right: Vec<usize>,
    stable: bool,
}

impl PartialEq for CutInvolution {
    fn eq(&self, other: &Self) -> bool {
        self.host.same_structure(&other.host) && self.perm == other.perm
    }
}
impl Eq for CutInvolution {}

impl CutInvolution {
    /// Validates every defining condition from scratch and builds the value;
    /// `left`/`right` must already be the canonical assignment.
    pub fn new(
        host: Arc<Graph>,
        perm: VertexPermutation,
        left: Vec<usize>,
        right: Vec<usize>,
    ) -> Result<Self> {
        let n = host.n();
        if perm.len() != n {
            return Err(DomcertError::BadGraph(format!(
                "permutation over {} vertices given for a graph on {n}",
                perm.len()
            )));
        }
        for &(u, v) in host.edges() {
            let (a, b) = perm.apply_edge((u, v));
            if !host.has_edge(a, b) {
                return Err(DomcertError::BadCertificate(format!(
                    "map sends edge ({u}, {v}) to non-edge ({a}, {b})"
                )));
            }
        }
        if !perm.is_involution() || perm.is_identity() {
            return Err(DomcertError::BadCertificate(
                "map is not a non-identity involution".into(),
            ));
        }
        let fixed = perm.fixed_points();
        if fixed.is_empty() {
            return Err(DomcertError::BadCertificate(
                "involution has no fixed vertices".into(),
            ));
        }
        let mut claimed = fixed.clone();
        claimed.extend(&left);
        claimed.extend(&right);
        claimed.sort_unstable();
        claimed.dedup();
        if claimed.len() != n || claimed != (0..n).collect::<Vec<_>>() {
            return Err(DomcertError::BadCertificate(
                "fixed, left, and right sets do not partition the vertices".into(),
            ));
        }
        let in_left = |v: usize| left.binary_search(&v).is_ok();
        let in_right = |v: usize| right.binary_search(&v).is_ok();
        let mut mapped: Vec<usize> = left.iter().map(|&v| perm.apply(v)).collect();
        mapped.sort_unstable();
        if mapped != right {
            return Err(DomcertError::BadCertificate(
                "involution does not exchange the left and right sets".into(),
            ));
        }
        for &(u, v) in host.edges() {
            if (in_left(u) && in_right(v)) || (in_right(u) && in_left(v)) {
                return Err(DomcertError::BadCertificate(format!(
                    "edge ({u}, {v}) joins the two halves"
                )));
            }
        }
        let stable = !host
            .edges()
            .iter()
            .any(|&(u, v)| fixed.binary_search(&u).is_ok() && fixed.binary_search(&v).is_ok());
        Ok(CutInvolution {
            host,
            perm,
            fixed,
            left,
            right,
            stable,
        })
    }

    pub fn host(&self) -> &Arc<Graph> {
        &self.host
    }

    pub fn perm(&self) -> &VertexPermutation {
        &self.perm
    }

    pub fn fixed(&self) -> &[usize] {
        &self.fixed
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    /// True when no edge lies inside the fixed set.
    pub fn stable(&self) -> bool {
        self.stable
    }

    pub fn half_fold(&self, side: Side) -> HalfFold {
        HalfFold {
            base: self.clone(),
            side,
        }
    }

    /// Image of an edge subset under the vertex permutation.
    pub fn apply_to_subset(&self, j: &EdgeSubset) -> Result<EdgeSubset> {
        if !j.host().same_structure(&self.host) {
            return Err(DomcertError::HostMismatch(
                "subset belongs to a different graph than the involution".into(),
            ));
        }
        let mut bits = 0u64;
        for idx in j.indices() {
            let (a, b) = self.perm.apply_edge(self.host.edges()[idx]);
            let img = self
                .host
                .edge_index(a, b)
                .expect("automorphism image of an edge is an edge");
            bits |= 1 << img;
        }
        EdgeSubset::new(self.host.clone(), bits)
    }
}

/// Idempotent vertex map that keeps one half (plus the cut) in place and
/// sends the other half across via the involution.
#[derive(Clone, Debug)]
pub struct HalfFold {
    base: CutInvolution,
    side: Side,
}

impl HalfFold {
    pub fn base(&self) -> &CutInvolution {
        &self.base
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// The half-fold of the same involution that keeps the other side.
    pub fn conjugate(&self) -> HalfFold {
        HalfFold {
            base: self.base.clone(),
            side: self.side.opposite(),
        }
    }

    pub fn vertex_map(&self, v: usize) -> usize {
        let moved = match self.side {
            Side::Left => self.base.right.binary_search(&v).is_ok(),
            Side::Right => self.base.left.binary_search(&v).is_ok(),
        };
        if moved {
            self.base.perm.apply(v)
        } else {
            v
        }
    }

    /// Image of an edge under the vertex map; always again an edge.
    pub fn edge_map(&self, (u, v): (usize, usize)) -> (usize, usize) {
        let (a, b) = (self.vertex_map(u), self.vertex_map(v));
        (a.min(b), a.max(b))
    }
}

/// All cut involutions of `g`, in lexicographic order of their image arrays.
///
/// Every involutive automorphism with a nonempty fixed set qualifies exactly
/// when no connected component of `g` minus the fixed set is mapped onto
/// itself: a setwise-fixed component cannot be split into exchanged halves,
/// while paired components admit the canonical assignment (smallest vertex
/// id of each pair goes left) with no cross-edges, components being
/// connected pieces of the same deleted graph.
pub fn find_cut_involutions(g: &Arc<Graph>) -> Result<Vec<CutInvolution>> {
    let mut out = Vec::new();
    for auto in g.automorphisms()? {
        if auto.is_identity() || !auto.is_involution() {
            continue;
        }
        let fixed = auto.fixed_points();
        if fixed.is_empty() || fixed.len() == g.n() {
            continue;
        }
        let rest: Vec<usize> = (0..g.n())
            .filter(|v| fixed.binary_search(v).is_err())
            .collect();
        let deleted = g.induced(&rest);
        let comps = deleted.connected_components();
        // Components in original vertex ids.
        let comps: Vec<Vec<usize>> = comps
            .iter()
            .map(|c| c.iter().map(|&i| rest[i]).collect())
            .collect();
        let comp_of = |v: usize| comps.iter().position(|c| c.binary_search(&v).is_ok());
        let mut ok = true;
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut seen = vec![false; comps.len()];
        for (ci, comp) in comps.iter().enumerate() {
            if seen[ci] {
                continue;
            }
            let image_comp = comp_of(auto.apply(comp[0])).expect("image outside fixed set");
            if image_comp == ci {
                ok = false;
                break;
            }
            seen[ci] = true;
            seen[image_comp] = true;
            // Components are listed by smallest member, so the unseen one of
            // the pair (the earlier index) holds the smaller vertex id.
            left.extend(comp.iter().copied());
            right.extend(comps[image_comp].iter().copied());
        }
        if !ok {
            continue;
        }
        left.sort_unstable();
        right.sort_unstable();
        out.push(CutInvolution::new(g.clone(), auto, left, right)?);
    }
    Ok(out)
}

/// Edge subset `{e : psi(e) in j}`: the result copies `j`'s pattern from the
/// kept half onto the moved half.
pub fn fold(j: &EdgeSubset, psi: &HalfFold) -> Result<EdgeSubset> {
    let host = psi.base().host();
    if !j.host().same_structure(host) {
        return Err(DomcertError::HostMismatch(
            "subset belongs to a different graph than the fold".into(),
        ));
    }
    let mut bits = 0u64;
    for (idx, &e) in host.edges().iter().enumerate() {
        let (a, b) = psi.edge_map(e);
        let img = host
            .edge_index(a, b)
            .expect("half-fold image of an edge is an edge");
        if j.contains(img) {
            bits |= 1 << idx;
        }
    }
    EdgeSubset::new(host.clone(), bits)
}

/// Orbits of the edge set under the group generated by the involutions'
/// permutations, each orbit sorted ascending, orbits ordered by smallest
/// edge index. An empty set yields singleton orbits.
pub fn edge_orbits(g: &Graph, phi_set: &[CutInvolution]) -> Vec<Vec<usize>> {
    let m = g.edge_count();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for ci in phi_set {
        for (idx, &e) in g.edges().iter().enumerate() {
            let (a, b) = ci.perm().apply_edge(e);
            let img = g.edge_index(a, b).expect("automorphism image edge");
            let (ra, rb) = (find(&mut parent, idx), find(&mut parent, img));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut orbits: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for e in 0..m {
        let root = find(&mut parent, e);
        orbits.entry(root).or_default().push(e);
    }
    orbits.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{c6_plus, even_cycle, hypercube, path};

    /// Test-local oracle: filter all automorphisms by the defining
    /// conditions directly, without the pairing logic of the implementation.
    fn oracle_involutions(g: &Graph) -> Vec<VertexPermutation> {
        g.automorphisms()
            .unwrap()
            .into_iter()
            .filter(|p| {
                if p.is_identity() || !p.is_involution() {
                    return false;
                }
                let fixed = p.fixed_points();
                if fixed.is_empty() || fixed.len() == g.n() {
                    return false;
                }
                // Some bipartition of the non-fixed vertices into phi-swapped
                // halves with no crossing edge must exist; equivalently no
                // component of g minus F is phi-invariant.
                let rest: Vec<usize> = (0..g.n())
                    .filter(|v| fixed.binary_search(v).is_err())
                    .collect();
                let sub = g.induced(&rest);
                sub.connected_components().into_iter().all(|comp| {
                    let orig: Vec<usize> = comp.iter().map(|&i| rest[i]).collect();
                    let img = p.apply(orig[0]);
                    !orig.contains(&img)
                })
            })
            .collect()
    }

    #[test]
    fn hexagon_has_three_vertex_axis_involutions() {
        let c6 = Arc::new(even_cycle(6).unwrap());
        let found = find_cut_involutions(&c6).unwrap();
        let oracle = oracle_involutions(&c6);
        assert_eq!(found.len(), 3);
        assert_eq!(
            found.iter().map(|ci| ci.perm().clone()).collect::<Vec<_>>(),
            oracle
        );
        for ci in &found {
            assert_eq!(ci.fixed().len(), 2, "axes through opposite vertices");
        }
    }

    #[test]
    fn single_edge_has_no_cut_involution() {
        let k2 = Arc::new(path(2).unwrap());
        assert!(find_cut_involutions(&k2).unwrap().is_empty());
    }

    #[test]
    fn hub_hexagon_involutions_fix_the_hub() {
        let g = Arc::new(c6_plus());
        let found = find_cut_involutions(&g).unwrap();
        assert_eq!(found.len(), 3);
        let mut fixed_sets: Vec<Vec<usize>> = found.iter().map(|ci| ci.fixed().to_vec()).collect();
        fixed_sets.sort();
        assert_eq!(
            fixed_sets,
            vec![vec![0, 3, 6], vec![1, 4, 6], vec![2, 5, 6]]
        );
        // The hub is adjacent to one vertex of each axis, so no fixed set is
        // independent.
        assert!(found.iter().all(|ci| !ci.stable()));
        assert_eq!(oracle_involutions(&g).len(), 3);
    }

    #[test]
    fn canonical_half_contains_smallest_moved_vertex() {
        let g = Arc::new(c6_plus());
        for ci in find_cut_involutions(&g).unwrap() {
            let min_moved = (0..g.n())
                .find(|v| ci.fixed().binary_search(v).is_err())
                .unwrap();
            assert!(ci.left().contains(&min_moved));
        }
    }

    #[test]
    fn cube_involutions_and_single_orbit() {
        let q3 = Arc::new(hypercube(3).unwrap());
        let found = find_cut_involutions(&q3).unwrap();
        // Coordinate swaps (3) and swaps composed with complementing both
        // swapped coordinates (3).
        assert_eq!(found.len(), 6);
        assert_eq!(found.len(), oracle_involutions(&q3).len());
        let orbits = edge_orbits(&q3, &found);
        assert_eq!(orbits, vec![(0..12).collect::<Vec<_>>()]);
        // Every fixed set contains an edge along the unswapped coordinate.
        assert!(found.iter().all(|ci| !ci.stable()));
    }

    #[test]
    fn hub_hexagon_orbits_split_cycle_and_star() {
        let g = Arc::new(c6_plus());
        let phi = find_cut_involutions(&g).unwrap();
        let orbits = edge_orbits(&g, &phi);
        let hub_edges: Vec<usize> = (0..g.edge_count())
            .filter(|&i| {
                let (u, v) = g.edges()[i];
                u == 6 || v == 6
            })
            .collect();
        let cycle_edges: Vec<usize> = (0..g.edge_count())
            .filter(|i| !hub_edges.contains(i))
            .collect();
        assert_eq!(orbits, vec![cycle_edges, hub_edges]);
        assert_eq!(edge_orbits(&g, &[]).len(), g.edge_count());
    }

    #[test]
    fn fold_copies_kept_half_onto_moved_half() {
        let g = Arc::new(c6_plus());
        let phi = find_cut_involutions(&g).unwrap();
        let axis03 = phi
            .iter()
            .find(|ci| ci.fixed() == [0, 3, 6])
            .expect("axis through 0 and 3");
        assert_eq!(axis03.left(), [1, 2]);
        assert_eq!(axis03.right(), [4, 5]);
        let j = EdgeSubset::from_indices(
            g.clone(),
            &[g.edge_index(1, 2).unwrap(), g.edge_index(2, 6).unwrap()],
        )
        .unwrap();
        let folded = fold(&j, &axis03.half_fold(Side::Left)).unwrap();
        let mut pairs = folded.edge_pairs();
        pairs.sort();
        assert_eq!(pairs, vec![(1, 2), (2, 6), (4, 5), (4, 6)]);
    }

    #[test]
    fn fold_extremes_are_fixed_points() {
        let g = Arc::new(c6_plus());
        let phi = find_cut_involutions(&g).unwrap();
        for ci in &phi {
            for side in [Side::Left, Side::Right] {
                let psi = ci.half_fold(side);
                let empty = EdgeSubset::empty(g.clone());
                let full = EdgeSubset::full(g.clone());
                assert_eq!(fold(&empty, &psi).unwrap(), empty);
                assert_eq!(fold(&full, &psi).unwrap(), full);
            }
        }
    }

    #[test]
    fn complement_duality_inside_invariant_layers() {
        let g = Arc::new(c6_plus());
        let phi = find_cut_involutions(&g).unwrap();
        for layer in edge_orbits(&g, &phi) {
            let layer_set = EdgeSubset::from_indices(g.clone(), &layer).unwrap();
            for ci in &phi {
                let psi = ci.half_fold(Side::Left);
                for bits in 0..1u64 << layer.len() {
                    let mut mask = 0u64;
                    for (b, &e) in layer.iter().enumerate() {
                        if bits >> b & 1 == 1 {
                            mask |= 1 << e;
                        }
                    }
                    let j = EdgeSubset::new(g.clone(), mask).unwrap();
                    let co_j = layer_set.minus(&j).unwrap();
                    let lhs = fold(&co_j, &psi).unwrap();
                    let rhs = layer_set.minus(&fold(&j, &psi).unwrap()).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    mod prop {
        use super::*;
        use proptest::prelude::*;

        fn hosts() -> Vec<Arc<Graph>> {
            vec![
                Arc::new(c6_plus()),
                Arc::new(even_cycle(6).unwrap()),
                Arc::new(hypercube(3).unwrap()),
            ]
        }

        proptest! {
            #[test]
            fn fold_laws(host_idx in 0usize..3, raw_bits: u64, inv_idx in 0usize..8, left in proptest::bool::ANY) {
                let g = hosts()[host_idx].clone();
                let phi = find_cut_involutions(&g).unwrap();
                prop_assume!(!phi.is_empty());
                let ci = &phi[inv_idx % phi.len()];
                let side = if left { Side::Left } else { Side::Right };
                let psi = ci.half_fold(side);
                let j = EdgeSubset::new(g.clone(), raw_bits & g.full_edge_mask()).unwrap();

                let folded = fold(&j, &psi).unwrap();
                // Idempotence.
                prop_assert_eq!(fold(&folded, &psi).unwrap(), folded.clone());
                // Mirror symmetry of the folded set.
                prop_assert_eq!(ci.apply_to_subset(&folded).unwrap(), folded.clone());
                // Edge-count conservation across conjugate folds.
                let co_folded = fold(&j, &psi.conjugate()).unwrap();
                prop_assert_eq!(folded.len() + co_folded.len(), 2 * j.len());
            }
        }
    }
}
