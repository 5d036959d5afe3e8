//! Finite simple graphs with a canonical edge order, plus the small set of
//! combinatorial searches everything else is built on: bipartitions,
//! components, automorphisms, and subgraph embeddings.
//!
//! Representation notes: vertices are `0..n`, the edge list is kept sorted
//! lexicographically with `u < v` in every pair, and edge subsets of a fixed
//! host graph are one `u64` bitmask indexed by position in that list. Hosts
//! are shared through `Arc` so subsets stay cheap to copy during searches.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::DomcertError;
use crate::Result;

/// Hard ceiling on vertices; adjacency is kept as one `u64` mask per vertex.
pub const HARD_MAX_VERTICES: usize = 64;
/// Hard ceiling on edges; edge subsets are one `u64` mask.
pub const HARD_MAX_EDGES: usize = 64;
/// Default cap for exponential vertex searches (automorphisms, embeddings).
pub const DEFAULT_VERTEX_CAP: usize = 24;
/// Default cap on edges for bitmask state-space searches.
pub const DEFAULT_EDGE_CAP: usize = 32;

/// Immutable simple graph on vertices `0..n` with a sorted edge list.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    labels: Option<Vec<String>>,
    adj: Vec<u64>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges && self.labels == other.labels
    }
}
impl Eq for Graph {}

impl std::hash::Hash for Graph {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.edges.hash(state);
        self.labels.hash(state);
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl Graph {
    /// Builds a graph, normalising every pair to `u < v` and sorting the edge
    /// list. Loops, duplicate edges, and out-of-range endpoints are rejected
    /// with the offending pair named.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::with_labels(n, edges, None)
    }

    pub fn with_labels(
        n: usize,
        edges: &[(usize, usize)],
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if n > HARD_MAX_VERTICES {
            return Err(DomcertError::CapExceeded {
                what: "vertex count",
                actual: n,
                cap: HARD_MAX_VERTICES,
            });
        }
        if edges.len() > HARD_MAX_EDGES {
            return Err(DomcertError::CapExceeded {
                what: "edge count",
                actual: edges.len(),
                cap: HARD_MAX_EDGES,
            });
        }
        if let Some(ref ls) = labels {
            if ls.len() != n {
                return Err(DomcertError::BadGraph(format!(
                    "{} labels for {} vertices",
                    ls.len(),
                    n
                )));
            }
        }
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(DomcertError::BadGraph(format!(
                    "edge ({a}, {b}) has an endpoint outside 0..{n}"
                )));
            }
            if a == b {
                return Err(DomcertError::BadGraph(format!("loop ({a}, {b})")));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        for w in norm.windows(2) {
            if w[0] == w[1] {
                return Err(DomcertError::BadGraph(format!(
                    "duplicate edge ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }
        let mut adj = vec![0u64; n];
        for &(u, v) in &norm {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        Ok(Graph {
            n,
            edges: norm,
            labels,
            adj,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    /// Neighbour set of `v` as a bitmask over vertices.
    pub fn adj_mask(&self, v: usize) -> u64 {
        self.adj[v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let mask = self.adj[v];
        (0..self.n).filter(move |&u| mask >> u & 1 == 1)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj[u] >> v & 1 == 1
    }

    /// Position of `(u, v)` in the sorted edge list.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    /// Bitmask with one bit per edge, all set.
    pub fn full_edge_mask(&self) -> u64 {
        if self.edges.is_empty() {
            0
        } else {
            (1u64 << self.edges.len()) - 1
        }
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut d: Vec<usize> = (0..self.n).map(|v| self.degree(v)).collect();
        d.sort_unstable();
        d
    }

    /// True when the two values describe the same labelled graph structure
    /// (labels excluded); used to gate operations between edge subsets.
    pub fn same_structure(&self, other: &Graph) -> bool {
        self.n == other.n && self.edges == other.edges
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: GraphJson = serde_json::from_str(s)?;
        Self::with_labels(raw.n, &raw.edges, raw.labels)
    }

    pub fn to_json(&self) -> String {
        let dto = GraphJson {
            n: self.n,
            edges: self.edges.clone(),
            labels: self.labels.clone(),
        };
        serde_json::to_string(&dto).expect("graph serialization cannot fail")
    }

    /// Hex SHA-256 of the canonical serialisation; ties certificates to the
    /// exact labelled graph they were issued for.
    pub fn sha256_hex(&self) -> String {
        let mut canon = format!("graph-v1;n={};edges=", self.n);
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if i > 0 {
                canon.push(',');
            }
            canon.push_str(&format!("{u}-{v}"));
        }
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Connected components, each sorted ascending, ordered by smallest
    /// member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = std::collections::VecDeque::new();
            seen[start] = true;
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for u in self.neighbors(v) {
                    if !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.connected_components().len() == 1
    }

    /// Proper 2-colouring classes `(A, B)` if one exists.
    ///
    /// Convention: each component is coloured by breadth-first search with
    /// its smallest vertex in class 0; the pair is then ordered so that
    /// `|A| <= |B|`, with an equal-size tie resolved by putting the class
    /// containing the smallest vertex id first.
    pub fn bipartition(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let mut color = vec![usize::MAX; self.n];
        for start in 0..self.n {
            if color[start] != usize::MAX {
                continue;
            }
            color[start] = 0;
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                for u in self.neighbors(v) {
                    if color[u] == usize::MAX {
                        color[u] = color[v] ^ 1;
                        queue.push_back(u);
                    } else if color[u] == color[v] {
                        return None;
                    }
                }
            }
        }
        let mut class0 = Vec::new();
        let mut class1 = Vec::new();
        for v in 0..self.n {
            if color[v] == 0 {
                class0.push(v);
            } else {
                class1.push(v);
            }
        }
        if class0.len() > class1.len() {
            Some((class1, class0))
        } else {
            Some((class0, class1))
        }
    }

    /// All automorphisms in lexicographic order of their image arrays.
    ///
    /// Plain backtracking pruned by degree and neighbour-degree multisets;
    /// capped at [`DEFAULT_VERTEX_CAP`] vertices.
    pub fn automorphisms(&self) -> Result<Vec<VertexPermutation>> {
        if self.n > DEFAULT_VERTEX_CAP {
            return Err(DomcertError::CapExceeded {
                what: "vertex count for automorphism search",
                actual: self.n,
                cap: DEFAULT_VERTEX_CAP,
            });
        }
        let nbr_deg: Vec<Vec<usize>> = (0..self.n)
            .map(|v| {
                let mut ds: Vec<usize> = self.neighbors(v).map(|u| self.degree(u)).collect();
                ds.sort_unstable();
                ds
            })
            .collect();
        let mut image = vec![usize::MAX; self.n];
        let mut used = 0u64;
        let mut out = Vec::new();
        self.auto_backtrack(0, &mut image, &mut used, &nbr_deg, &mut out);
        Ok(out)
    }

    fn auto_backtrack(
        &self,
        v: usize,
        image: &mut [usize],
        used: &mut u64,
        nbr_deg: &[Vec<usize>],
        out: &mut Vec<VertexPermutation>,
    ) {
        if v == self.n {
            out.push(VertexPermutation::new(image.to_vec()).expect("image is a permutation"));
            return;
        }
        'cand: for w in 0..self.n {
            if *used >> w & 1 == 1 {
                continue;
            }
            if self.degree(v) != self.degree(w) || nbr_deg[v] != nbr_deg[w] {
                continue;
            }
            for p in 0..v {
                if self.has_edge(v, p) != self.has_edge(w, image[p]) {
                    continue 'cand;
                }
            }
            image[v] = w;
            *used |= 1 << w;
            self.auto_backtrack(v + 1, image, used, nbr_deg, out);
            *used &= !(1 << w);
            image[v] = usize::MAX;
        }
    }

    /// Abstract copy of the subgraph carried by the edges in `mask`, together
    /// with the sorted list of original vertex ids the new ids map back to.
    /// Vertices not touched by any selected edge are dropped.
    pub fn edge_induced(&self, mask: u64) -> (Graph, Vec<usize>) {
        let mut verts: Vec<usize> = Vec::new();
        let mut touched = 0u64;
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                touched |= 1 << u;
                touched |= 1 << v;
            }
        }
        for v in 0..self.n {
            if touched >> v & 1 == 1 {
                verts.push(v);
            }
        }
        let pos = |v: usize| verts.binary_search(&v).expect("touched vertex");
        let mut edges = Vec::new();
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                edges.push((pos(u), pos(v)));
            }
        }
        let g = Graph::new(verts.len(), &edges).expect("edge-induced subgraph is valid");
        (g, verts)
    }

    /// Induced subgraph on the given sorted vertex list, relabelled to
    /// `0..verts.len()`.
    pub fn induced(&self, verts: &[usize]) -> Graph {
        let pos = |v: usize| verts.binary_search(&v).expect("vertex in set");
        let mut edges = Vec::new();
        for &(u, v) in &self.edges {
            if verts.binary_search(&u).is_ok() && verts.binary_search(&v).is_ok() {
                edges.push((pos(u), pos(v)));
            }
        }
        Graph::new(verts.len(), &edges).expect("induced subgraph is valid")
    }
}

/// Permutation of the vertex set, stored as its image array.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexPermutation {
    image: Vec<usize>,
}

impl VertexPermutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &w in &image {
            if w >= n || seen[w] {
                return Err(DomcertError::BadGraph(format!(
                    "image array {image:?} is not a permutation"
                )));
            }
            seen[w] = true;
        }
        Ok(VertexPermutation { image })
    }

    pub fn identity(n: usize) -> Self {
        VertexPermutation {
            image: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, v: usize) -> usize {
        self.image[v]
    }

    /// `self` after `other`: `(self.compose(other)).apply(v) = self(other(v))`.
    pub fn compose(&self, other: &VertexPermutation) -> VertexPermutation {
        VertexPermutation {
            image: other.image.iter().map(|&v| self.image[v]).collect(),
        }
    }

    pub fn inverse(&self) -> VertexPermutation {
        let mut inv = vec![0; self.image.len()];
        for (v, &w) in self.image.iter().enumerate() {
            inv[w] = v;
        }
        VertexPermutation { image: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(v, &w)| v == w)
    }

    pub fn is_involution(&self) -> bool {
        self.image.iter().enumerate().all(|(v, &w)| self.image[w] == v)
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        self.image
            .iter()
            .enumerate()
            .filter(|&(v, &w)| v == w)
            .map(|(v, _)| v)
            .collect()
    }

    /// Image of an unordered pair.
    pub fn apply_edge(&self, (u, v): (usize, usize)) -> (usize, usize) {
        let (a, b) = (self.image[u], self.image[v]);
        (a.min(b), a.max(b))
    }
}

/// Subset of the edges of a fixed host graph, as a bitmask over the host's
/// sorted edge list.
#[derive(Clone, Debug)]
pub struct EdgeSubset {
    host: Arc<Graph>,
    bits: u64,
}

impl PartialEq for EdgeSubset {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits && self.host.same_structure(&other.host)
    }
}
impl Eq for EdgeSubset {}

impl EdgeSubset {
    pub fn new(host: Arc<Graph>, bits: u64) -> Result<Self> {
        if bits & !host.full_edge_mask() != 0 {
            return Err(DomcertError::BadGraph(format!(
                "edge mask {bits:#x} has bits beyond the host's {} edges",
                host.edge_count()
            )));
        }
        Ok(EdgeSubset { host, bits })
    }

    pub fn empty(host: Arc<Graph>) -> Self {
        EdgeSubset { host, bits: 0 }
    }

    pub fn full(host: Arc<Graph>) -> Self {
        let bits = host.full_edge_mask();
        EdgeSubset { host, bits }
    }

    pub fn from_indices(host: Arc<Graph>, indices: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &i in indices {
            if i >= host.edge_count() {
                return Err(DomcertError::BadGraph(format!(
                    "edge index {i} out of range for host with {} edges",
                    host.edge_count()
                )));
            }
            bits |= 1 << i;
        }
        Ok(EdgeSubset { host, bits })
    }

    pub fn host(&self) -> &Arc<Graph> {
        &self.host
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, edge_index: usize) -> bool {
        self.bits >> edge_index & 1 == 1
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.host.edge_count())
            .filter(|&i| self.contains(i))
            .collect()
    }

    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.indices()
            .into_iter()
            .map(|i| self.host.edges()[i])
            .collect()
    }

    fn check_host(&self, other: &EdgeSubset, op: &str) -> Result<()> {
        if Arc::ptr_eq(&self.host, &other.host) || self.host.same_structure(&other.host) {
            Ok(())
        } else {
            Err(DomcertError::HostMismatch(format!(
                "{op} between subsets of different hosts"
            )))
        }
    }

    pub fn union(&self, other: &EdgeSubset) -> Result<EdgeSubset> {
        self.check_host(other, "union")?;
        Ok(EdgeSubset {
            host: self.host.clone(),
            bits: self.bits | other.bits,
        })
    }

    pub fn intersection(&self, other: &EdgeSubset) -> Result<EdgeSubset> {
        self.check_host(other, "intersection")?;
        Ok(EdgeSubset {
            host: self.host.clone(),
            bits: self.bits & other.bits,
        })
    }

    pub fn minus(&self, other: &EdgeSubset) -> Result<EdgeSubset> {
        self.check_host(other, "difference")?;
        Ok(EdgeSubset {
            host: self.host.clone(),
            bits: self.bits & !other.bits,
        })
    }

    pub fn is_subset_of(&self, other: &EdgeSubset) -> Result<bool> {
        self.check_host(other, "subset test")?;
        Ok(self.bits & !other.bits == 0)
    }

    pub fn complement(&self) -> EdgeSubset {
        EdgeSubset {
            host: self.host.clone(),
            bits: self.host.full_edge_mask() & !self.bits,
        }
    }

    /// Abstract copy of the subgraph these edges span; see
    /// [`Graph::edge_induced`].
    pub fn to_abstract(&self) -> (Graph, Vec<usize>) {
        self.host.edge_induced(self.bits)
    }
}

/// Injective edge-preserving map from a pattern graph into a host graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    /// `map[p]` is the host vertex the pattern vertex `p` lands on.
    pub map: Vec<usize>,
    /// Host edges hit by pattern edges.
    pub edge_image: EdgeSubset,
}

/// All embeddings of `pattern` into `host` whose edge image contains
/// `must_cover`, in deterministic backtracking order with host candidates
/// tried by ascending `(degree, id)`. `limit` stops enumeration early.
pub fn subgraph_embeddings(
    pattern: &Graph,
    host: &Arc<Graph>,
    must_cover: Option<&EdgeSubset>,
    limit: Option<usize>,
) -> Result<Vec<Embedding>> {
    if let Some(mc) = must_cover {
        if !mc.host().same_structure(host) {
            return Err(DomcertError::HostMismatch(
                "must_cover subset belongs to a different host".into(),
            ));
        }
    }
    let cover_bits = must_cover.map_or(0, |m| m.bits());
    let maps = embeddings_raw(pattern, host, cover_bits, limit)?;
    maps.into_iter()
        .map(|map| {
            let bits = edge_image_bits(pattern, host, &map);
            Ok(Embedding {
                map,
                edge_image: EdgeSubset::new(host.clone(), bits)?,
            })
        })
        .collect()
}

fn edge_image_bits(pattern: &Graph, host: &Graph, map: &[usize]) -> u64 {
    let mut bits = 0u64;
    for &(u, v) in pattern.edges() {
        let idx = host
            .edge_index(map[u], map[v])
            .expect("embedding maps edges to edges");
        bits |= 1 << idx;
    }
    bits
}

/// Backtracking core shared by the embedding API and isomorphism tests;
/// returns vertex maps only.
pub(crate) fn embeddings_raw(
    pattern: &Graph,
    host: &Graph,
    cover_bits: u64,
    limit: Option<usize>,
) -> Result<Vec<Vec<usize>>> {
    if pattern.n() > DEFAULT_VERTEX_CAP {
        return Err(DomcertError::CapExceeded {
            what: "pattern vertex count for embedding search",
            actual: pattern.n(),
            cap: DEFAULT_VERTEX_CAP,
        });
    }
    let mut out = Vec::new();
    if pattern.n() > host.n() {
        return Ok(out);
    }
    let limit = limit.unwrap_or(usize::MAX);
    if limit == 0 {
        return Ok(out);
    }

    // Pattern vertices in per-component breadth-first order, roots chosen by
    // (max degree, min id); every non-root has an already-placed neighbour.
    let order = pattern_order(pattern);
    // Host candidates in ascending (degree, id) order.
    let mut host_by_deg: Vec<usize> = (0..host.n()).collect();
    host_by_deg.sort_by_key(|&v| (host.degree(v), v));

    let mut map = vec![usize::MAX; pattern.n()];
    let mut used = 0u64;
    embed_backtrack(
        pattern,
        host,
        &order,
        &host_by_deg,
        0,
        &mut map,
        &mut used,
        cover_bits,
        limit,
        &mut out,
    );
    Ok(out)
}

fn pattern_order(pattern: &Graph) -> Vec<usize> {
    let mut order = Vec::with_capacity(pattern.n());
    let mut placed = vec![false; pattern.n()];
    for comp in pattern.connected_components() {
        let root = *comp
            .iter()
            .max_by_key(|&&v| (pattern.degree(v), std::cmp::Reverse(v)))
            .expect("component nonempty");
        let mut queue = std::collections::VecDeque::new();
        placed[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for u in pattern.neighbors(v) {
                if !placed[u] {
                    placed[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    order
}

#[allow(clippy::too_many_arguments)]
fn embed_backtrack(
    pattern: &Graph,
    host: &Graph,
    order: &[usize],
    host_by_deg: &[usize],
    pos: usize,
    map: &mut [usize],
    used: &mut u64,
    cover_bits: u64,
    limit: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if out.len() >= limit {
        return;
    }
    if pos == order.len() {
        if cover_bits != 0 {
            let bits = edge_image_bits(pattern, host, map);
            if cover_bits & !bits != 0 {
                return;
            }
        }
        out.push(map.to_vec());
        return;
    }
    let p = order[pos];
    'cand: for &h in host_by_deg {
        if *used >> h & 1 == 1 || host.degree(h) < pattern.degree(p) {
            continue;
        }
        for q in pattern.neighbors(p) {
            if map[q] != usize::MAX && !host.has_edge(h, map[q]) {
                continue 'cand;
            }
        }
        map[p] = h;
        *used |= 1 << h;
        embed_backtrack(
            pattern,
            host,
            order,
            host_by_deg,
            pos + 1,
            map,
            used,
            cover_bits,
            limit,
            out,
        );
        *used &= !(1 << h);
        map[p] = usize::MAX;
        if out.len() >= limit {
            return;
        }
    }
}

/// True when the two graphs are isomorphic (labels ignored).
pub fn is_isomorphic(a: &Graph, b: &Graph) -> bool {
    if a.n() != b.n()
        || a.edge_count() != b.edge_count()
        || a.degree_sequence() != b.degree_sequence()
    {
        return false;
    }
    // An injective edge-preserving map between graphs with equal vertex and
    // edge counts is an isomorphism.
    !embeddings_raw(a, b, 0, Some(1))
        .map(|v| v.is_empty())
        .unwrap_or(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cycle(n: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(n, &edges).unwrap()
    }

    pub(crate) fn path(n: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::new(n, &edges).unwrap()
    }

    pub(crate) fn complete_bipartite(s: usize, t: usize) -> Graph {
        let mut edges = Vec::new();
        for a in 0..s {
            for b in 0..t {
                edges.push((a, s + b));
            }
        }
        Graph::new(s + t, &edges).unwrap()
    }

    /// Hexagon 0..5 plus hub 6 joined to the alternating vertices 0, 2, 4.
    pub(crate) fn c6_plus() -> Graph {
        let mut edges: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        edges.extend([(0, 6), (2, 6), (4, 6)]);
        Graph::new(7, &edges).unwrap()
    }

    fn all_permutations(n: usize) -> Vec<Vec<usize>> {
        fn rec(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if rest.is_empty() {
                out.push(cur.clone());
                return;
            }
            for i in 0..rest.len() {
                let v = rest.remove(i);
                cur.push(v);
                rec(rest, cur, out);
                cur.pop();
                rest.insert(i, v);
            }
        }
        let mut out = Vec::new();
        rec(&mut (0..n).collect(), &mut Vec::new(), &mut out);
        out
    }

    /// Brute-force oracle: every image array that preserves adjacency exactly.
    fn automorphisms_oracle(g: &Graph) -> Vec<Vec<usize>> {
        all_permutations(g.n())
            .into_iter()
            .filter(|img| {
                (0..g.n()).all(|u| (0..g.n()).all(|v| g.has_edge(u, v) == g.has_edge(img[u], img[v])))
            })
            .collect()
    }

    #[test]
    fn parse_normalises_and_round_trips() {
        let g = Graph::from_json(r#"{"n":4,"edges":[[3,2],[1,0],[1,3]]}"#).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 3), (2, 3)]);
        let again = Graph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn parse_rejects_loops_and_duplicates_by_name() {
        let err = Graph::from_json(r#"{"n":3,"edges":[[1,1]]}"#).unwrap_err();
        assert!(err.to_string().contains("(1, 1)"), "{err}");
        let err = Graph::from_json(r#"{"n":3,"edges":[[0,2],[2,0]]}"#).unwrap_err();
        assert!(err.to_string().contains("(0, 2)"), "{err}");
        let err = Graph::from_json(r#"{"n":3,"edges":[[0,3]]}"#).unwrap_err();
        assert!(err.to_string().contains("(0, 3)"), "{err}");
    }

    #[test]
    fn bipartition_matches_two_colouring_oracle_on_hub_hexagon() {
        let g = c6_plus();
        // Oracle: enumerate all 2^7 colourings, keep proper ones.
        let mut proper: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for mask in 0u32..1 << 7 {
            if g.edges()
                .iter()
                .all(|&(u, v)| (mask >> u & 1) != (mask >> v & 1))
            {
                let a: Vec<usize> = (0..7).filter(|&v| mask >> v & 1 == 0).collect();
                let b: Vec<usize> = (0..7).filter(|&v| mask >> v & 1 == 1).collect();
                proper.push((a, b));
            }
        }
        // Connected bipartite graph: exactly two proper colourings (swaps).
        assert_eq!(proper.len(), 2);
        let (a, b) = g.bipartition().unwrap();
        assert_eq!(a, vec![0, 2, 4]);
        assert_eq!(b, vec![1, 3, 5, 6]);
        assert!(proper.contains(&(a, b)));
    }

    #[test]
    fn bipartition_tie_break_keeps_vertex_zero_side_first() {
        let (a, b) = path(4).bipartition().unwrap();
        assert_eq!(a, vec![0, 2]);
        assert_eq!(b, vec![1, 3]);
    }

    #[test]
    fn bipartition_absent_on_odd_cycle() {
        assert!(cycle(3).bipartition().is_none());
        assert!(cycle(5).bipartition().is_none());
    }

    #[test]
    fn components_sorted_by_smallest_member() {
        let g = Graph::new(6, &[(4, 5), (0, 3), (1, 2)]).unwrap();
        assert_eq!(
            g.connected_components(),
            vec![vec![0, 3], vec![1, 2], vec![4, 5]]
        );
    }

    #[test]
    fn automorphism_counts_match_brute_force() {
        for (g, expect) in [
            (cycle(6), 12),
            (complete_bipartite(3, 3), 72),
            (path(3), 2),
            (c6_plus(), 6),
        ] {
            let oracle = automorphisms_oracle(&g);
            assert_eq!(oracle.len(), expect);
            let found = g.automorphisms().unwrap();
            let images: Vec<Vec<usize>> = found.iter().map(|p| p.image().to_vec()).collect();
            let mut sorted_oracle = oracle.clone();
            sorted_oracle.sort();
            assert_eq!(images, sorted_oracle, "lexicographic order expected");
        }
    }

    #[test]
    fn automorphism_group_closed_under_composition_and_inverse() {
        for g in [cycle(4), complete_bipartite(2, 3), c6_plus()] {
            let autos = g.automorphisms().unwrap();
            for p in &autos {
                assert!(autos.contains(&p.inverse()));
                for q in &autos {
                    assert!(autos.contains(&p.compose(q)));
                }
            }
        }
    }

    #[test]
    fn single_edge_pattern_embeds_once_per_edge_orientation() {
        let k2 = path(2);
        for g in [cycle(6), c6_plus(), complete_bipartite(3, 3)] {
            let host = Arc::new(g);
            let embs = subgraph_embeddings(&k2, &host, None, None).unwrap();
            assert_eq!(embs.len(), 2 * host.edge_count());
        }
    }

    #[test]
    fn square_does_not_embed_into_hexagon() {
        // Oracle: brute force over all injective 4-vertex maps.
        let c4 = cycle(4);
        let c6 = cycle(6);
        let mut oracle = 0;
        for img in all_permutations(6) {
            let map = &img[..4];
            if c4
                .edges()
                .iter()
                .all(|&(u, v)| c6.has_edge(map[u], map[v]))
            {
                oracle += 1;
            }
        }
        // Each embedding is counted 2! times by the permutation tail.
        assert_eq!(oracle, 0);
        let host = Arc::new(c6);
        assert!(subgraph_embeddings(&c4, &host, None, None)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn covering_constraint_pins_star_centre() {
        let host = Arc::new(c6_plus());
        let star = complete_bipartite(1, 3);
        let cover = EdgeSubset::from_indices(
            host.clone(),
            &[
                host.edge_index(2, 6).unwrap(),
                host.edge_index(1, 2).unwrap(),
            ],
        )
        .unwrap();
        let embs = subgraph_embeddings(&star, &host, Some(&cover), None).unwrap();
        assert!(!embs.is_empty());
        for e in &embs {
            assert_eq!(e.map[0], 2, "both covered edges share only vertex 2");
        }
    }

    #[test]
    fn edge_subset_ops_require_same_host() {
        let ha = Arc::new(cycle(4));
        let hb = Arc::new(cycle(6));
        let a = EdgeSubset::from_indices(ha, &[0, 1]).unwrap();
        let b = EdgeSubset::from_indices(hb, &[0, 1]).unwrap();
        assert!(matches!(
            a.union(&b),
            Err(DomcertError::HostMismatch(_))
        ));
    }

    #[test]
    fn edge_induced_drops_untouched_vertices() {
        let g = c6_plus();
        let mask = (1 << g.edge_index(0, 6).unwrap()) | (1 << g.edge_index(2, 6).unwrap());
        let (sub, verts) = g.edge_induced(mask);
        assert_eq!(verts, vec![0, 2, 6]);
        assert_eq!(sub.edges(), &[(0, 2), (1, 2)]);
    }

    #[test]
    fn isomorphism_distinguishes_small_graphs() {
        assert!(is_isomorphic(&cycle(6), &{
            // A relabelled hexagon.
            Graph::new(6, &[(0, 3), (3, 1), (1, 4), (4, 2), (2, 5), (5, 0)]).unwrap()
        }));
        assert!(!is_isomorphic(&cycle(6), &complete_bipartite(3, 3)));
        assert!(!is_isomorphic(&path(4), &complete_bipartite(1, 3)));
    }

    #[test]
    fn hash_is_stable_and_label_independent() {
        let g1 = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let g2 = Graph::with_labels(
            3,
            &[(1, 2), (0, 1)],
            Some(vec!["a".into(), "b".into(), "c".into()]),
        )
        .unwrap();
        assert_eq!(g1.sha256_hex(), g2.sha256_hex());
        assert_eq!(g1.sha256_hex().len(), 64);
    }

    mod prop {
        use super::*;
        use proptest::prelude::*;

        fn arb_graph() -> impl Strategy<Value = Graph> {
            (2usize..8).prop_flat_map(|n| {
                let all: Vec<(usize, usize)> = (0..n)
                    .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
                    .collect();
                proptest::collection::vec(proptest::bool::ANY, all.len()).prop_map(move |keep| {
                    let chosen: Vec<(usize, usize)> = all
                        .iter()
                        .zip(&keep)
                        .filter(|(_, &k)| k)
                        .map(|(&e, _)| e)
                        .collect();
                    Graph::new(n, &chosen).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn json_round_trip(g in arb_graph()) {
                let back = Graph::from_json(&g.to_json()).unwrap();
                prop_assert_eq!(g, back);
            }

            #[test]
            fn bipartition_is_proper_and_ordered(g in arb_graph()) {
                if let Some((a, b)) = g.bipartition() {
                    prop_assert!(a.len() <= b.len());
                    let in_a = |v: usize| a.binary_search(&v).is_ok();
                    for &(u, v) in g.edges() {
                        prop_assert!(in_a(u) != in_a(v));
                    }
                    prop_assert_eq!(a.len() + b.len(), g.n());
                }
            }

            #[test]
            fn automorphisms_contain_identity(g in arb_graph()) {
                let autos = g.automorphisms().unwrap();
                prop_assert!(autos.contains(&VertexPermutation::identity(g.n())));
            }
        }
    }
}
