//! Generators for the graph families the rest of the crate studies: paths,
//! even cycles, stars, complete bipartite graphs, hypercubes and their balls,
//! the hub-augmented hexagon, subdivisions and `K_{2,t}` replacements,
//! bipartite Kneser graphs, perfect trees, bipartite tensor blow-ups, and
//! bipartite graphs built from cosets of symmetric-group subgroups.

use serde::{Deserialize, Serialize};

use crate::error::DomcertError;
use crate::graph::Graph;
use crate::Result;

/// Which class of a bipartition an operation should act on; `A` is the
/// smaller class under [`Graph::bipartition`]'s ordering convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BipartitionSide {
    A,
    B,
}

/// Layer/seed suggestions emitted alongside coset star graphs: `layers[i]`
/// lists edge indices, `seeds[i]` is one edge index inside `layers[i]`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LayerHints {
    pub layers: Vec<Vec<usize>>,
    pub seeds: Vec<usize>,
}

/// Recipe for coset graphs over the symmetric group on `n` symbols.
///
/// Generators are the adjacent transpositions, named by 1-based index:
/// generator `i` swaps positions `i` and `i+1`. Each part is a set of
/// generator indices; `center` (1-based) picks the part whose cosets form
/// the star centres in [`star_replacement_graph`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CoxeterSpec {
    pub n: usize,
    pub parts: Vec<Vec<usize>>,
    #[serde(default = "default_center")]
    pub center: usize,
}

fn default_center() -> usize {
    1
}

/// Symmetric-group element cap: 7! fits comfortably, 8! does not need to.
const MAX_SYMBOLS: usize = 7;

fn bad_params(msg: impl Into<String>) -> DomcertError {
    DomcertError::BadParams(msg.into())
}

/// Graph caps surface as parameter errors here: the family parameter, not
/// the graph input, is what violated the bound.
fn cap_as_params(err: DomcertError) -> DomcertError {
    match err {
        DomcertError::CapExceeded { what, actual, cap } => {
            bad_params(format!("parameters produce a graph over the cap: {what} {actual} > {cap}"))
        }
        other => other,
    }
}

/// Path on `n` vertices (`n - 1` edges), vertices numbered along the path.
pub fn path(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(bad_params("path needs at least 1 vertex"));
    }
    let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    Graph::new(n, &edges).map_err(cap_as_params)
}

/// Cycle on `len` vertices; `len` must be even and at least 4.
pub fn even_cycle(len: usize) -> Result<Graph> {
    if len < 4 || len % 2 != 0 {
        return Err(bad_params(format!("cycle length {len} is not an even number >= 4")));
    }
    let edges: Vec<(usize, usize)> = (0..len).map(|i| (i, (i + 1) % len)).collect();
    Graph::new(len, &edges).map_err(cap_as_params)
}

/// Star with `d` leaves: centre 0, leaves `1..=d`.
pub fn star(d: usize) -> Result<Graph> {
    if d == 0 {
        return Err(bad_params("star needs at least 1 leaf"));
    }
    let edges: Vec<(usize, usize)> = (1..=d).map(|v| (0, v)).collect();
    Graph::new(d + 1, &edges).map_err(cap_as_params)
}

/// Complete bipartite graph; side of size `s` takes ids `0..s`.
pub fn complete_bipartite(s: usize, t: usize) -> Result<Graph> {
    if s == 0 || t == 0 {
        return Err(bad_params("complete bipartite sides must be nonempty"));
    }
    let mut edges = Vec::with_capacity(s * t);
    for a in 0..s {
        for b in 0..t {
            edges.push((a, s + b));
        }
    }
    Graph::new(s + t, &edges).map_err(cap_as_params)
}

/// `d`-dimensional hypercube; vertex `v` is the bitstring of `v`, kept as a
/// label.
pub fn hypercube(d: usize) -> Result<Graph> {
    if d == 0 || d > 6 {
        return Err(bad_params(format!("hypercube dimension {d} outside 1..=6")));
    }
    let n = 1usize << d;
    let mut edges = Vec::new();
    for v in 0..n {
        for b in 0..d {
            let u = v ^ (1 << b);
            if v < u {
                edges.push((v, u));
            }
        }
    }
    let labels: Vec<String> = (0..n).map(|v| format!("{v:0d$b}")).collect();
    Graph::with_labels(n, &edges, Some(labels)).map_err(cap_as_params)
}

/// Ball of radius `k` around the all-zero vertex of the `d`-cube: vertices
/// of Hamming weight at most `k`, renumbered in increasing order of their
/// cube id, with the induced edges.
pub fn hypercube_ball(d: usize, k: usize) -> Result<Graph> {
    if d == 0 || d > 6 {
        return Err(bad_params(format!("hypercube dimension {d} outside 1..=6")));
    }
    if k > d {
        return Err(bad_params(format!("ball radius {k} exceeds dimension {d}")));
    }
    let kept: Vec<usize> = (0..1usize << d)
        .filter(|v| v.count_ones() as usize <= k)
        .collect();
    let pos = |v: usize| kept.binary_search(&v).expect("kept vertex");
    let mut edges = Vec::new();
    for &v in &kept {
        for b in 0..d {
            let u = v ^ (1 << b);
            if v < u && (u.count_ones() as usize) <= k {
                edges.push((pos(v), pos(u)));
            }
        }
    }
    let labels: Vec<String> = kept.iter().map(|&v| format!("{v:0d$b}")).collect();
    Graph::with_labels(kept.len(), &edges, Some(labels)).map_err(cap_as_params)
}

/// Hexagon `0..=5` plus a hub vertex 6 joined to the alternating vertices
/// 0, 2, 4.
pub fn c6_plus() -> Graph {
    let mut edges: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
    edges.extend([(0, 6), (2, 6), (4, 6)]);
    Graph::new(7, &edges).expect("static parameters")
}

/// Octahedron (`K_{2,2,2}`): every pair adjacent except the three antipodal
/// pairs `{0,3}`, `{1,4}`, `{2,5}`. Not bipartite itself; its 1-subdivision
/// is.
pub fn octahedron() -> Graph {
    let mut edges = Vec::new();
    for u in 0..6usize {
        for v in u + 1..6 {
            if v != u + 3 {
                edges.push((u, v));
            }
        }
    }
    Graph::new(6, &edges).expect("static parameters")
}

/// Adds one new vertex adjacent to every vertex of the chosen bipartition
/// class of `base`. The result is unlabelled; the new vertex gets id
/// `base.n()`.
pub fn h_a_plus(base: &Graph, side: BipartitionSide) -> Result<Graph> {
    let (a, b) = base
        .bipartition()
        .ok_or_else(|| bad_params("base graph is not bipartite"))?;
    let class = match side {
        BipartitionSide::A => a,
        BipartitionSide::B => b,
    };
    if class.is_empty() {
        return Err(bad_params("chosen bipartition class is empty"));
    }
    let hub = base.n();
    let mut edges: Vec<(usize, usize)> = base.edges().to_vec();
    edges.extend(class.into_iter().map(|v| (v, hub)));
    Graph::new(base.n() + 1, &edges).map_err(cap_as_params)
}

/// Replaces every edge of `h` by a path of length 2; the midpoint of edge
/// `i` (in `h`'s sorted edge order) gets id `h.n() + i`.
pub fn one_subdivision(h: &Graph) -> Result<Graph> {
    k2t_replacement(h, 1)
}

/// Replaces every edge of `h` by a copy of `K_{2,t}` joining its endpoints:
/// edge `i` gains `t` midpoints with ids `h.n() + i*t ..` in order.
pub fn k2t_replacement(h: &Graph, t: usize) -> Result<Graph> {
    if t == 0 {
        return Err(bad_params("replacement width t must be at least 1"));
    }
    let mut edges = Vec::with_capacity(2 * t * h.edge_count());
    for (i, &(u, v)) in h.edges().iter().enumerate() {
        for j in 0..t {
            let mid = h.n() + i * t + j;
            edges.push((u, mid));
            edges.push((mid, v));
        }
    }
    Graph::new(h.n() + t * h.edge_count(), &edges).map_err(cap_as_params)
}

/// Bipartite containment graph between `r`-subsets and `(t-r)`-subsets of
/// `{0..t}`; requires `1 <= r < t - r`. Subsets are numbered in
/// lexicographic order, `r`-subsets first.
pub fn bipartite_kneser(t: usize, r: usize) -> Result<Graph> {
    if r == 0 || 2 * r >= t {
        return Err(bad_params(format!("need 1 <= r < t - r, got t = {t}, r = {r}")));
    }
    let small = subsets_lex(t, r);
    let large = subsets_lex(t, t - r);
    let mut edges = Vec::new();
    for (i, s) in small.iter().enumerate() {
        for (j, l) in large.iter().enumerate() {
            if s & l == *s {
                edges.push((i, small.len() + j));
            }
        }
    }
    Graph::new(small.len() + large.len(), &edges).map_err(cap_as_params)
}

/// All `r`-subsets of `{0..t}` as bitmasks, in lexicographic order of their
/// sorted element lists.
fn subsets_lex(t: usize, r: usize) -> Vec<u32> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    fn rec(t: usize, r: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<u32>) {
        if cur.len() == r {
            out.push(cur.iter().fold(0u32, |m, &x| m | 1 << x));
            return;
        }
        for x in start..t {
            cur.push(x);
            rec(t, r, x + 1, cur, out);
            cur.pop();
        }
    }
    rec(t, r, 0, &mut cur, &mut out);
    out
}

/// Tree in which the root has `d` children and every other internal vertex
/// has degree `d`, with all leaves at distance `depth` from the root.
/// Vertices are numbered breadth-first from the root.
pub fn perfect_tree(d: usize, depth: usize) -> Result<Graph> {
    if d < 2 {
        return Err(bad_params("tree degree must be at least 2"));
    }
    if depth == 0 {
        return Err(bad_params("tree depth must be at least 1"));
    }
    let mut edges = Vec::new();
    let mut next = 1usize;
    let mut level = vec![0usize];
    for step in 0..depth {
        let children_each = if step == 0 { d } else { d - 1 };
        let mut next_level = Vec::new();
        for &v in &level {
            for _ in 0..children_each {
                edges.push((v, next));
                next_level.push(next);
                next += 1;
            }
        }
        level = next_level;
    }
    Graph::new(next, &edges).map_err(cap_as_params)
}

/// Bipartite tensor with `K_{m,m}`, oriented so classes multiply with their
/// own side: every vertex becomes `m` copies (vertex `v` maps to ids
/// `v*m ..= v*m + m - 1`) and every edge becomes a full `K_{m,m}` between
/// the copy groups. Crossing the orientation instead pairs each class with
/// the opposite side of `K_{m,m}`; over a complete second factor the two
/// orientations give the same graph, so no separate operation is needed.
/// `tensor_kmm(h, 1)` is `h` itself.
pub fn tensor_kmm(h: &Graph, m: usize) -> Result<Graph> {
    if m == 0 {
        return Err(bad_params("blow-up multiplicity must be at least 1"));
    }
    if h.bipartition().is_none() {
        return Err(bad_params("tensor base must be bipartite"));
    }
    let mut edges = Vec::with_capacity(m * m * h.edge_count());
    for &(u, v) in h.edges() {
        for i in 0..m {
            for j in 0..m {
                edges.push((u * m + i, v * m + j));
            }
        }
    }
    Graph::new(h.n() * m, &edges).map_err(cap_as_params)
}

/// Permutations are one-line arrays: `p[i]` is the image of symbol `i`.
type Perm = Vec<u8>;

fn perm_identity(n: usize) -> Perm {
    (0..n as u8).collect()
}

/// `p` after `q`.
fn perm_compose(p: &Perm, q: &Perm) -> Perm {
    q.iter().map(|&x| p[x as usize]).collect()
}

fn adjacent_transposition(n: usize, i: usize) -> Perm {
    let mut p = perm_identity(n);
    p.swap(i - 1, i);
    p
}

fn all_perms(n: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    fn rec(rest: &mut Vec<u8>, cur: &mut Perm, out: &mut Vec<Perm>) {
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
    rec(&mut (0..n as u8).collect(), &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Subgroup generated by the given adjacent-transposition indices, as a
/// sorted element list.
fn subgroup(n: usize, gen_indices: &[usize]) -> Vec<Perm> {
    let gens: Vec<Perm> = gen_indices
        .iter()
        .map(|&i| adjacent_transposition(n, i))
        .collect();
    let mut elems = std::collections::BTreeSet::new();
    elems.insert(perm_identity(n));
    let mut frontier = vec![perm_identity(n)];
    while let Some(w) = frontier.pop() {
        for g in &gens {
            let wg = perm_compose(&w, g);
            if elems.insert(wg.clone()) {
                frontier.push(wg);
            }
        }
    }
    elems.into_iter().collect()
}

/// Left cosets `w * sub` of the whole group, in order of minimal member;
/// returns one coset id per group element, indexed by the element's position
/// in `group`.
fn coset_ids(group: &[Perm], sub: &[Perm]) -> (usize, Vec<usize>) {
    let mut key_to_id: std::collections::BTreeMap<Vec<Perm>, usize> = Default::default();
    let mut ids = vec![usize::MAX; group.len()];
    // Group elements are sorted, so first appearance order equals
    // minimal-member order.
    for (pos, w) in group.iter().enumerate() {
        let mut members: Vec<Perm> = sub.iter().map(|h| perm_compose(w, h)).collect();
        members.sort();
        let next_id = key_to_id.len();
        let id = *key_to_id.entry(members).or_insert(next_id);
        ids[pos] = id;
    }
    (key_to_id.len(), ids)
}

fn perm_word(p: &Perm) -> String {
    p.iter().map(|&x| char::from(b'0' + x)).collect()
}

/// Minimal member of each coset, for labels; `ids` as from [`coset_ids`].
fn coset_reps(group: &[Perm], count: usize, ids: &[usize]) -> Vec<Perm> {
    let mut reps: Vec<Option<Perm>> = vec![None; count];
    for (pos, &id) in ids.iter().enumerate() {
        if reps[id].is_none() {
            reps[id] = Some(group[pos].clone());
        }
    }
    reps.into_iter().map(|r| r.expect("nonempty coset")).collect()
}

fn validate_spec(spec: &CoxeterSpec, min_parts: usize) -> Result<()> {
    if spec.n < 2 || spec.n > MAX_SYMBOLS {
        return Err(bad_params(format!("symbol count {} outside 2..=7", spec.n)));
    }
    if spec.parts.len() < min_parts {
        return Err(bad_params(format!(
            "need at least {min_parts} generator subsets, got {}",
            spec.parts.len()
        )));
    }
    for part in &spec.parts {
        for &i in part {
            if i == 0 || i >= spec.n {
                return Err(bad_params(format!(
                    "generator index {i} outside 1..={}",
                    spec.n - 1
                )));
            }
        }
    }
    Ok(())
}

/// Bipartite incidence graph between the left cosets of the two subgroups
/// named by `spec.parts`: one vertex per coset (first part's block first,
/// each block ordered by minimal coset member), and an edge `{w P_1, w P_2}`
/// for every group element `w`, deduplicated. Labels record part and coset
/// representative.
pub fn reflection_graph(spec: &CoxeterSpec) -> Result<Graph> {
    validate_spec(spec, 2)?;
    if spec.parts.len() != 2 {
        return Err(bad_params(format!(
            "incidence graph takes exactly 2 parts, got {}",
            spec.parts.len()
        )));
    }
    let group = all_perms(spec.n);
    let sub1 = subgroup(spec.n, &spec.parts[0]);
    let sub2 = subgroup(spec.n, &spec.parts[1]);
    let (c1, ids1) = coset_ids(&group, &sub1);
    let (c2, ids2) = coset_ids(&group, &sub2);
    let mut edges: Vec<(usize, usize)> = (0..group.len())
        .map(|pos| (ids1[pos], c1 + ids2[pos]))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let mut labels = Vec::with_capacity(c1 + c2);
    for rep in coset_reps(&group, c1, &ids1) {
        labels.push(format!("P1:{}", perm_word(&rep)));
    }
    for rep in coset_reps(&group, c2, &ids2) {
        labels.push(format!("P2:{}", perm_word(&rep)));
    }
    Graph::with_labels(c1 + c2, &edges, Some(labels)).map_err(cap_as_params)
}

/// Star version of the coset incidence construction for `k >= 3` parts:
/// every group element `w` contributes a `(k-1)`-star centred at its coset
/// of the `center` part, with one leaf per remaining part; multi-edges are
/// merged. Also returns layer hints: one layer per non-centre part (the
/// edges into that part's block) and, as seeds, the star on the identity
/// cosets.
pub fn star_replacement_graph(spec: &CoxeterSpec) -> Result<(Graph, LayerHints)> {
    validate_spec(spec, 3)?;
    let k = spec.parts.len();
    if spec.center == 0 || spec.center > k {
        return Err(bad_params(format!("center {} outside 1..={k}", spec.center)));
    }
    let group = all_perms(spec.n);
    let subs: Vec<Vec<Perm>> = spec.parts.iter().map(|p| subgroup(spec.n, p)).collect();
    for i in 0..k {
        for j in i + 1..k {
            if subs[i] == subs[j] {
                return Err(bad_params(format!(
                    "parts {} and {} generate the same subgroup",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let center = spec.center - 1;
    let cosets: Vec<(usize, Vec<usize>)> = subs.iter().map(|s| coset_ids(&group, s)).collect();

    // Vertex blocks: centre part first, then the rest by ascending part
    // index; identity cosets sit first in each block.
    let mut block_order = vec![center];
    block_order.extend((0..k).filter(|&j| j != center));
    let mut offset = vec![0usize; k];
    let mut total = 0usize;
    for &j in &block_order {
        offset[j] = total;
        total += cosets[j].0;
    }

    let mut edges: Vec<(usize, usize)> = Vec::new();
    for pos in 0..group.len() {
        let hub = offset[center] + cosets[center].1[pos];
        for &j in &block_order[1..] {
            edges.push((hub, offset[j] + cosets[j].1[pos]));
        }
    }
    edges.sort_unstable();
    edges.dedup();

    let mut labels = vec![String::new(); total];
    for &j in &block_order {
        let reps = coset_reps(&group, cosets[j].0, &cosets[j].1);
        for (id, rep) in reps.iter().enumerate() {
            labels[offset[j] + id] = format!("P{}:{}", j + 1, perm_word(rep));
        }
    }
    let graph = Graph::with_labels(total, &edges, Some(labels)).map_err(cap_as_params)?;

    // Identity is the minimal group element, so its cosets have id 0.
    let identity_hub = offset[center];
    let mut layers: Vec<Vec<usize>> = vec![Vec::new(); k - 1];
    let mut seeds = Vec::with_capacity(k - 1);
    for (l, &j) in block_order[1..].iter().enumerate() {
        let block = offset[j]..offset[j] + cosets[j].0;
        for (idx, &(u, v)) in graph.edges().iter().enumerate() {
            if block.contains(&u) || block.contains(&v) {
                layers[l].push(idx);
            }
        }
        let seed = graph
            .edge_index(identity_hub, offset[j])
            .expect("identity star edge exists");
        seeds.push(seed);
    }
    Ok((graph, LayerHints { layers, seeds }))
}
