//! Certificate assembly and verification.
//!
//! A certificate packages everything needed to check that a graph dominates
//! all of its subgraphs: a layer structure (edge partition into involution
//! orbits plus one seed per layer), a signature whose replay covers the
//! whole edge set, and, for every nonempty proper subset `I` of the layers,
//! a relocation witness showing that the partial cover `H_I` reachable from
//! a bad start set is dominated by a subgraph holding strictly more than
//! `|I|` seeds. `certify` searches for such a package, `verify_certificate`
//! re-checks a package from scratch, and the two are kept honest by running
//! the verifier on everything the search produces before returning it.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DomcertError;
use crate::graph::{is_isomorphic, subgraph_embeddings, EdgeSubset, Graph, VertexPermutation};
use crate::graphon::{domination_margin, StepGraphon};
use crate::involution::{edge_orbits, find_cut_involutions, CutInvolution};
use crate::percolation::{
    check_multiperc, find_layered_percolation, replay, validate_layers, LayerStructure, Signature,
    DEFAULT_MAX_STATES,
};
use crate::screening::screen;
use crate::Result;

/// How a relocation witness justifies domination of `H_I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RelocationKind {
    /// The witness subgraph is an isomorphic copy of `H_I`.
    IsoCopy,
    /// `H_I` is a disjoint union of equal stars and the witness is an
    /// edge-disjoint union of as many equal stars, so its density is at
    /// least the product of the stars' densities.
    StarUnion,
    /// The witness subgraph carries its own certificate and every component
    /// of `H_I` embeds into it.
    RecursiveSuper,
    /// Unverified user claim; accepted only on request and never produced
    /// by the search.
    Asserted,
}

/// Kind order the search tries; `Asserted` is deliberately absent.
pub const SEARCH_KINDS: [RelocationKind; 3] = [
    RelocationKind::IsoCopy,
    RelocationKind::StarUnion,
    RelocationKind::RecursiveSuper,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertMode {
    Dominating,
    Strong,
}

/// One star of a `STAR_UNION` witness: a centre and the edge indices of the
/// host edges forming the star.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarWitness {
    pub center: usize,
    pub edges: Vec<usize>,
}

/// Evidence that some subgraph holding more than `|I|` seeds dominates
/// `H_I`. Which optional fields are present depends on `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelocationWitness {
    /// The dominated layer subset, ascending.
    #[serde(rename = "I")]
    pub layer_subset: Vec<usize>,
    pub kind: RelocationKind,
    /// `ISO_COPY`: vertex map from the abstract form of `H_I` into the host.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<usize>>,
    /// `STAR_UNION`: the edge-disjoint stars.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stars: Option<Vec<StarWitness>>,
    /// `RECURSIVE_SUPER`/`ASSERTED`: host edge indices of the witness
    /// subgraph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub super_edges: Option<Vec<usize>>,
    /// `RECURSIVE_SUPER`: per-component vertex maps from the abstract form
    /// of `H_I` into the abstract witness subgraph. Components are embedded
    /// separately; the density of a disjoint union is the product over
    /// components, so separate embeddings suffice for domination.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component_embeddings: Option<Vec<Vec<usize>>>,
    /// Edge indices of the seeds inside the witness subgraph.
    pub seeds_covered: Vec<usize>,
    /// `RECURSIVE_SUPER`: certificate for the abstract witness subgraph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_certificate: Option<Box<Certificate>>,
}

/// Serialized form of a cut involution; `verify_certificate` rebuilds the
/// real value from `perm`, `left`, and `right` and cross-checks the rest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertInvolution {
    pub perm: Vec<usize>,
    pub fixed: Vec<usize>,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub stable: bool,
}

impl From<&CutInvolution> for CertInvolution {
    fn from(ci: &CutInvolution) -> Self {
        CertInvolution {
            perm: ci.perm().image().to_vec(),
            fixed: ci.fixed().to_vec(),
            left: ci.left().to_vec(),
            right: ci.right().to_vec(),
            stable: ci.stable(),
        }
    }
}

/// A complete, independently checkable domination certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub graph_sha: String,
    /// Edge indices per layer, each layer a single orbit of `phi`.
    pub layers: Vec<Vec<usize>>,
    pub phi: Vec<CertInvolution>,
    /// One seed edge index per layer.
    pub seeds: Vec<usize>,
    pub signature: Signature,
    /// One witness per nonempty proper layer subset, ascending by size then
    /// lexicographically.
    pub relocations: Vec<RelocationWitness>,
    pub mode: CertMode,
}

impl Certificate {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Caps for the certificate search. Every cap that fires is remembered, so
/// an unsuccessful search can tell a proven dead end from an aborted one.
#[derive(Clone, Debug)]
pub struct CertifyBudget {
    /// Percolation BFS state cap.
    pub max_states: usize,
    /// Seed tuples tried per layer partition.
    pub max_seed_tuples: usize,
    /// Layer partitions with more parts than this are skipped.
    pub max_layers: usize,
    /// Recursion depth for RECURSIVE_SUPER sub-certificates.
    pub relocation_depth: usize,
    /// Involution subsets examined when enumerating layer partitions.
    pub max_phi_combos: usize,
    /// Connected edge supersets grown per RECURSIVE_SUPER search.
    pub recursive_candidates: usize,
    /// Edge-action group size used for seed-tuple deduplication.
    pub max_group: usize,
}

impl Default for CertifyBudget {
    fn default() -> Self {
        CertifyBudget {
            max_states: DEFAULT_MAX_STATES,
            max_seed_tuples: 512,
            max_layers: 4,
            relocation_depth: 4,
            max_phi_combos: 30_000,
            recursive_candidates: 500,
            max_group: 40_320,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub mode: CertMode,
    /// Continue searching even when the screening battery rejects the graph
    /// (study mode; the battery is a set of necessary conditions).
    pub allow_screen_fail: bool,
    pub budget: CertifyBudget,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            mode: CertMode::Dominating,
            allow_screen_fail: false,
            budget: CertifyBudget::default(),
        }
    }
}

/// Search result. `NotFound` means the searched certificate family is
/// provably empty for this graph (no caps were hit); an aborted search
/// surfaces as a `BudgetExhausted` error instead.
#[derive(Clone, Debug)]
pub enum CertifyOutcome {
    Found(Certificate),
    NotFound { reason: String },
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Accept `ASSERTED` witnesses after a numeric spot check; the report
    /// is then marked unsound.
    pub allow_asserted: bool,
    /// Replay-law sample count when the host has more than 16 edges
    /// (exhaustive below that).
    pub multiperc_trials: usize,
    pub rng_seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            allow_asserted: false,
            multiperc_trials: 10_000,
            rng_seed: 7,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyClause {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Clause-by-clause verdict. `sound` is `pass` minus any reliance on
/// unverified `ASSERTED` witnesses.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub sound: bool,
    pub clauses: Vec<VerifyClause>,
}

impl VerifyReport {
    fn clause(&mut self, name: &str, pass: bool, detail: String) {
        self.clauses.push(VerifyClause {
            name: name.into(),
            pass,
            detail,
        });
        self.pass &= pass;
    }
}

/// Ascending-size, then lexicographic, list of all nonempty proper subsets
/// of `0..k`.
fn proper_subsets(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..k {
        out.extend(combinations(k, size));
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Mutable search-wide state: every budget cap that fired, plus the
/// isomorphism-classed memo for recursive sub-certifications.
struct SearchCtx {
    budget_hit: bool,
    memo: Vec<(Graph, MemoEntry)>,
}

#[derive(Clone, Copy, PartialEq)]
enum MemoEntry {
    InProgress,
    Certifiable,
    Failed,
}

impl SearchCtx {
    fn new() -> Self {
        SearchCtx {
            budget_hit: false,
            memo: Vec::new(),
        }
    }

    fn memo_lookup(&self, g: &Graph) -> Option<MemoEntry> {
        self.memo
            .iter()
            .find(|(rep, _)| is_isomorphic(rep, g))
            .map(|&(_, e)| e)
    }

    fn memo_set(&mut self, g: &Graph, entry: MemoEntry) {
        if let Some(slot) = self.memo.iter_mut().find(|(rep, _)| is_isomorphic(rep, g)) {
            slot.1 = entry;
        } else {
            self.memo.push((g.clone(), entry));
        }
    }
}

/// Edge action of a vertex permutation: `out[i]` is the index of the image
/// of edge `i`.
pub(crate) fn edge_action(g: &Graph, perm: &VertexPermutation) -> Vec<usize> {
    g.edges()
        .iter()
        .map(|&e| {
            let (a, b) = perm.apply_edge(e);
            g.edge_index(a, b).expect("automorphism maps edges to edges")
        })
        .collect()
}

pub(crate) fn orbit_partition(edge_count: usize, actions: &[&Vec<usize>]) -> Vec<u64> {
    let mut parent: Vec<usize> = (0..edge_count).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for act in actions {
        for e in 0..edge_count {
            let (a, b) = (find(&mut parent, e), find(&mut parent, act[e]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut masks: Vec<(usize, u64)> = Vec::new();
    for e in 0..edge_count {
        let root = find(&mut parent, e);
        match masks.iter_mut().find(|(r, _)| *r == root) {
            Some((_, m)) => *m |= 1 << e,
            None => masks.push((root, 1 << e)),
        }
    }
    masks.sort_by_key(|&(r, _)| r);
    masks.into_iter().map(|(_, m)| m).collect()
}

/// Candidate involution sets for the layer search: for every generating
/// subset of up to three involutions (and the full set), take all
/// involutions that preserve the subset's orbit partition. That is the
/// unique maximal set producing the same layers, so distinct candidates
/// mean distinct layer partitions. Ordered by layer count, then by set
/// size descending.
fn phi_candidates(
    g: &Graph,
    invs: &[CutInvolution],
    budget: &CertifyBudget,
    ctx: &mut SearchCtx,
) -> Vec<Vec<usize>> {
    let actions: Vec<Vec<usize>> = invs.iter().map(|ci| edge_action(g, ci.perm())).collect();
    let m = g.edge_count();

    let closure = |partition: &[u64]| -> Vec<usize> {
        let part_of = |e: usize| partition.iter().position(|&mask| mask >> e & 1 == 1);
        (0..invs.len())
            .filter(|&i| (0..m).all(|e| part_of(e) == part_of(actions[i][e])))
            .collect()
    };

    let mut seen: Vec<Vec<u64>> = Vec::new();
    let mut cands: Vec<(usize, usize, Vec<u64>, Vec<usize>)> = Vec::new();
    let consider = |subset: &[usize],
                    seen: &mut Vec<Vec<u64>>,
                    cands: &mut Vec<(usize, usize, Vec<u64>, Vec<usize>)>| {
        let acts: Vec<&Vec<usize>> = subset.iter().map(|&i| &actions[i]).collect();
        let partition = orbit_partition(m, &acts);
        if partition.len() > budget.max_layers || seen.contains(&partition) {
            return;
        }
        let phi_set = closure(&partition);
        seen.push(partition.clone());
        cands.push((partition.len(), usize::MAX - phi_set.len(), partition, phi_set));
    };

    let full: Vec<usize> = (0..invs.len()).collect();
    consider(&full, &mut seen, &mut cands);
    let mut combos = 0usize;
    'outer: for size in 1..=3.min(invs.len()) {
        for subset in combinations(invs.len(), size) {
            combos += 1;
            if combos > budget.max_phi_combos {
                ctx.budget_hit = true;
                break 'outer;
            }
            consider(&subset, &mut seen, &mut cands);
        }
    }
    cands.sort_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)));
    cands.into_iter().map(|(_, _, _, phi)| phi).collect()
}

/// Closure of the edge actions under composition, or `None` past the cap.
fn edge_group(actions: &[Vec<usize>], m: usize, cap: usize) -> Option<Vec<Vec<usize>>> {
    let identity: Vec<usize> = (0..m).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::from([identity.clone()]);
    let mut queue = VecDeque::from([identity]);
    let mut out = Vec::new();
    while let Some(elem) = queue.pop_front() {
        out.push(elem.clone());
        for gen in actions {
            let composed: Vec<usize> = (0..m).map(|e| gen[elem[e]]).collect();
            if seen.insert(composed.clone()) {
                if seen.len() > cap {
                    return None;
                }
                queue.push_back(composed);
            }
        }
    }
    Some(out)
}

/// Seed tuples (one edge per layer), deduplicated up to the diagonal action
/// of the involution group, in ascending order. The boolean reports whether
/// the tuple cap truncated the enumeration.
fn seed_tuples(
    layers: &[Vec<usize>],
    group: Option<&[Vec<usize>]>,
    cap: usize,
) -> (Vec<Vec<usize>>, bool) {
    let mut out = Vec::new();
    let mut idx = vec![0usize; layers.len()];
    let mut truncated = false;
    'odo: loop {
        let tuple: Vec<usize> = layers.iter().zip(&idx).map(|(l, &i)| l[i]).collect();
        let canonical = group.map_or(true, |grp| {
            grp.iter()
                .all(|act| tuple.iter().map(|&e| act[e]).collect::<Vec<_>>() >= tuple)
        });
        if canonical {
            if out.len() == cap {
                truncated = true;
                break;
            }
            out.push(tuple);
        }
        for pos in (0..layers.len()).rev() {
            idx[pos] += 1;
            if idx[pos] < layers[pos].len() {
                continue 'odo;
            }
            idx[pos] = 0;
        }
        break;
    }
    (out, truncated)
}

/// Searches for a domination certificate. The pipeline: screening gate,
/// cut-involution enumeration, candidate layer partitions, canonical seed
/// tuples, percolation search, then relocation witnesses for every
/// nonempty proper layer subset. The first complete package (in the fixed
/// deterministic order) is verified and returned.
pub fn certify(g: &Arc<Graph>, opts: &CertifyOptions) -> Result<CertifyOutcome> {
    let mut ctx = SearchCtx::new();
    let outcome = certify_inner(g, opts, &mut ctx, 0)?;
    match outcome {
        CertifyOutcome::NotFound { reason } if ctx.budget_hit => Err(
            DomcertError::BudgetExhausted(format!("search aborted by budget caps; {reason}")),
        ),
        other => Ok(other),
    }
}

fn certify_inner(
    g: &Arc<Graph>,
    opts: &CertifyOptions,
    ctx: &mut SearchCtx,
    depth: usize,
) -> Result<CertifyOutcome> {
    if !g.is_connected() {
        return Ok(CertifyOutcome::NotFound {
            reason: "graph is disconnected; certify components separately".into(),
        });
    }
    let report = screen(g);
    if !report.pass && !opts.allow_screen_fail {
        return Ok(CertifyOutcome::NotFound {
            reason: format!("screening failed: {}", report.reasons.join(", ")),
        });
    }

    let mut invs = find_cut_involutions(g)?;
    if opts.mode == CertMode::Strong {
        invs.retain(|ci| ci.stable());
    }
    if invs.is_empty() {
        return Ok(CertifyOutcome::NotFound {
            reason: match opts.mode {
                CertMode::Strong => "no stable cut involutions".into(),
                CertMode::Dominating => "no cut involutions".into(),
            },
        });
    }

    let budget = &opts.budget;
    for phi_ixs in phi_candidates(g, &invs, budget, ctx) {
        let phi: Vec<CutInvolution> = phi_ixs.iter().map(|&i| invs[i].clone()).collect();
        let layers = edge_orbits(g, &phi);
        if layers.len() > budget.max_layers {
            continue;
        }
        let actions: Vec<Vec<usize>> = phi.iter().map(|ci| edge_action(g, ci.perm())).collect();
        let group = edge_group(&actions, g.edge_count(), budget.max_group);
        if group.is_none() {
            ctx.budget_hit = true;
        }
        let (tuples, truncated) = seed_tuples(&layers, group.as_deref(), budget.max_seed_tuples);
        if truncated {
            ctx.budget_hit = true;
        }
        for seeds in tuples {
            let ls = LayerStructure::new(g.clone(), layers.clone(), phi.clone(), seeds.clone())?;
            let sig = match find_layered_percolation(&ls, budget.max_states) {
                Ok(Some(sig)) => sig,
                Ok(None) => continue,
                Err(DomcertError::StateCapExceeded { .. }) => {
                    ctx.budget_hit = true;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let mut relocations = Vec::new();
            let mut complete = true;
            for i_set in proper_subsets(layers.len()) {
                match find_relocation_inner(g, &ls, &i_set, &SEARCH_KINDS, opts, ctx, depth)? {
                    Some(w) => relocations.push(w),
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if !complete {
                continue;
            }
            let cert = Certificate {
                graph_sha: g.sha256_hex(),
                layers: layers.clone(),
                phi: phi.iter().map(CertInvolution::from).collect(),
                seeds,
                signature: sig,
                relocations,
                mode: opts.mode,
            };
            let verdict = verify_certificate(g, &cert, &VerifyOptions::default())?;
            if !verdict.pass {
                let failed: Vec<&str> = verdict
                    .clauses
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| c.name.as_str())
                    .collect();
                return Err(DomcertError::Internal(format!(
                    "search produced a certificate its own verifier rejects: {}",
                    failed.join(", ")
                )));
            }
            return Ok(CertifyOutcome::Found(cert));
        }
    }
    Ok(CertifyOutcome::NotFound {
        reason: "no percolating seed tuple with relocatable layers in the searched family".into(),
    })
}

/// Star unions lean on an inequality for nonnegative kernels, so the signed
/// (strong) regime admits only exact copies and certified supersets.
fn strong_allows(kind: RelocationKind) -> bool {
    matches!(
        kind,
        RelocationKind::IsoCopy | RelocationKind::RecursiveSuper
    )
}

/// Searches for a relocation witness for the layer subset `i_set`, trying
/// the given kinds in their listed order. Fresh search state; see
/// [`certify`] for the full pipeline that shares state across calls.
pub fn find_relocation(
    g: &Arc<Graph>,
    ls: &LayerStructure,
    i_set: &[usize],
    allowed: &[RelocationKind],
    opts: &CertifyOptions,
) -> Result<Option<RelocationWitness>> {
    let mut ctx = SearchCtx::new();
    find_relocation_inner(g, ls, i_set, allowed, opts, &mut ctx, 0)
}

fn find_relocation_inner(
    g: &Arc<Graph>,
    ls: &LayerStructure,
    i_set: &[usize],
    allowed: &[RelocationKind],
    opts: &CertifyOptions,
    ctx: &mut SearchCtx,
    depth: usize,
) -> Result<Option<RelocationWitness>> {
    let k = ls.layers().len();
    if i_set.is_empty() || i_set.len() >= k || i_set.iter().any(|&i| i >= k) {
        return Err(DomcertError::BadParams(
            "relocation subset must be nonempty and proper".into(),
        ));
    }
    let mut kinds = allowed.to_vec();
    if opts.mode == CertMode::Strong {
        kinds.retain(|&kind| strong_allows(kind));
    }
    let h_mask = i_set
        .iter()
        .fold(0u64, |acc, &i| acc | ls.layers()[i].bits());
    let (h_abs, _) = g.edge_induced(h_mask);

    for kind in kinds {
        let found = match kind {
            RelocationKind::IsoCopy => find_iso_copy(g, ls, i_set, &h_abs)?,
            RelocationKind::StarUnion => find_star_union(g, ls, i_set, &h_abs),
            RelocationKind::RecursiveSuper => {
                find_recursive_super(g, ls, i_set, &h_abs, opts, ctx, depth)?
            }
            RelocationKind::Asserted => None,
        };
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Seed-position combinations of size `|I| + 1`, each turned into the edge
/// subset the witness must cover, smallest index combinations first.
fn cover_candidates(ls: &LayerStructure, i_set: &[usize]) -> Vec<Vec<usize>> {
    combinations(ls.seeds().len(), i_set.len() + 1)
}

fn covered_seeds(ls: &LayerStructure, edge_set: &HashSet<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = ls
        .seeds()
        .iter()
        .copied()
        .filter(|s| edge_set.contains(s))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn find_iso_copy(
    g: &Arc<Graph>,
    ls: &LayerStructure,
    i_set: &[usize],
    h_abs: &Graph,
) -> Result<Option<RelocationWitness>> {
    for combo in cover_candidates(ls, i_set) {
        let cover_edges: Vec<usize> = combo.iter().map(|&pos| ls.seeds()[pos]).collect();
        let cover = EdgeSubset::from_indices(g.clone(), &cover_edges)?;
        let embs = subgraph_embeddings(h_abs, g, Some(&cover), Some(1))?;
        if let Some(emb) = embs.into_iter().next() {
            let image: HashSet<usize> = emb.edge_image.indices().into_iter().collect();
            let seeds_covered = covered_seeds(ls, &image);
            return Ok(Some(RelocationWitness {
                layer_subset: i_set.to_vec(),
                kind: RelocationKind::IsoCopy,
                embedding: Some(emb.map),
                stars: None,
                super_edges: None,
                component_embeddings: None,
                seeds_covered,
                sub_certificate: None,
            }));
        }
    }
    Ok(None)
}

/// `(star count, leaf count)` when every component of `h` is a star and all
/// stars have the same number of edges.
fn star_shape(h: &Graph) -> Option<(usize, usize)> {
    let comps = h.connected_components();
    let mut size = None;
    for comp in &comps {
        let sub = h.induced(comp);
        let s = sub.edge_count();
        if s == 0 || sub.n() != s + 1 {
            return None;
        }
        let centers = (0..sub.n()).filter(|&v| sub.degree(v) == s).count();
        let leaves = (0..sub.n()).filter(|&v| sub.degree(v) == 1).count();
        let star = if s == 1 {
            centers == 2
        } else {
            centers == 1 && leaves == s
        };
        if !star || *size.get_or_insert(s) != s {
            return None;
        }
    }
    Some((comps.len(), size?))
}

/// Looks for `m` full stars at degree-`s` vertices, pairwise non-adjacent
/// (hence edge-disjoint), covering more than `|I|` seeds. Restricting to
/// full stars keeps edge-disjointness a pure centre condition.
fn find_star_union(
    g: &Arc<Graph>,
    ls: &LayerStructure,
    i_set: &[usize],
    h_abs: &Graph,
) -> Option<RelocationWitness> {
    let (m, s) = star_shape(h_abs)?;
    let pool: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) == s).collect();
    if pool.len() < m {
        return None;
    }
    for combo in cover_candidates(ls, i_set) {
        let targets: Vec<(usize, usize)> = combo.iter().map(|&p| g.edges()[ls.seeds()[p]]).collect();
        if let Some(centers) = pick_star_centers(g, &pool, &targets, m) {
            let stars: Vec<StarWitness> = centers
                .iter()
                .map(|&c| StarWitness {
                    center: c,
                    edges: g
                        .neighbors(c)
                        .map(|u| g.edge_index(c.min(u), c.max(u)).expect("adjacent"))
                        .collect(),
                })
                .collect();
            let union: HashSet<usize> = stars.iter().flat_map(|st| st.edges.clone()).collect();
            let seeds_covered = covered_seeds(ls, &union);
            if seeds_covered.len() > i_set.len() {
                return Some(RelocationWitness {
                    layer_subset: i_set.to_vec(),
                    kind: RelocationKind::StarUnion,
                    embedding: None,
                    stars: Some(stars),
                    super_edges: None,
                    component_embeddings: None,
                    seeds_covered,
                    sub_certificate: None,
                });
            }
        }
    }
    None
}

/// Backtracking choice of `m` pairwise non-adjacent centres from `pool`
/// such that every target edge has an endpoint among them; first solution
/// in ascending order.
fn pick_star_centers(
    g: &Graph,
    pool: &[usize],
    targets: &[(usize, usize)],
    m: usize,
) -> Option<Vec<usize>> {
    fn compatible(g: &Graph, chosen: &[usize], v: usize) -> bool {
        !chosen.contains(&v) && chosen.iter().all(|&c| !g.has_edge(c, v))
    }
    fn assign(
        g: &Graph,
        pool: &[usize],
        targets: &[(usize, usize)],
        chosen: &mut Vec<usize>,
        m: usize,
    ) -> Option<Vec<usize>> {
        if let Some(&(u, v)) = targets.first() {
            for cand in [u.min(v), u.max(v)] {
                let already = chosen.contains(&cand);
                if (already || pool.contains(&cand)) && (already || compatible(g, chosen, cand)) {
                    if !already {
                        chosen.push(cand);
                    }
                    if chosen.len() <= m {
                        if let Some(sol) = assign(g, pool, targets[1..].as_ref(), chosen, m) {
                            return Some(sol);
                        }
                    }
                    if !already {
                        chosen.pop();
                    }
                }
            }
            return None;
        }
        fill(g, pool, chosen, m)
    }
    fn fill(g: &Graph, pool: &[usize], chosen: &mut Vec<usize>, m: usize) -> Option<Vec<usize>> {
        if chosen.len() == m {
            let mut sol = chosen.clone();
            sol.sort_unstable();
            return Some(sol);
        }
        for &cand in pool {
            if compatible(g, chosen, cand) {
                chosen.push(cand);
                if let Some(sol) = fill(g, pool, chosen, m) {
                    return Some(sol);
                }
                chosen.pop();
            }
        }
        None
    }
    let mut chosen = Vec::new();
    assign(g, pool, targets, &mut chosen, m)
}

/// Grows connected edge supersets of seed subsets and recursively certifies
/// their abstract forms. A superset qualifies when every component of
/// `H_I` embeds into it: the witness then dominates each component, hence
/// their disjoint union.
fn find_recursive_super(
    g: &Arc<Graph>,
    ls: &LayerStructure,
    i_set: &[usize],
    h_abs: &Graph,
    opts: &CertifyOptions,
    ctx: &mut SearchCtx,
    depth: usize,
) -> Result<Option<RelocationWitness>> {
    if depth >= opts.budget.relocation_depth {
        ctx.budget_hit = true;
        return Ok(None);
    }
    let comps: Vec<Graph> = h_abs
        .connected_components()
        .iter()
        .map(|c| h_abs.induced(c))
        .collect();
    let k = ls.seeds().len();
    let mut pops = 0usize;

    for size in i_set.len() + 1..=k {
        for combo in combinations(k, size) {
            let start: u64 = combo
                .iter()
                .map(|&p| 1u64 << ls.seeds()[p])
                .fold(0, |a, b| a | b);
            let mut seen: HashSet<u64> = HashSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(mask) = queue.pop_front() {
                pops += 1;
                if pops > opts.budget.recursive_candidates {
                    ctx.budget_hit = true;
                    return Ok(None);
                }
                if let Some(w) = try_super_candidate(g, ls, i_set, &comps, mask, opts, ctx, depth)? {
                    return Ok(Some(w));
                }
                let verts = edge_mask_vertices(g, mask);
                for (idx, &(u, v)) in g.edges().iter().enumerate() {
                    let next = mask | 1 << idx;
                    if next != mask
                        && (verts >> u & 1 == 1 || verts >> v & 1 == 1)
                        && seen.insert(next)
                    {
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    Ok(None)
}

fn edge_mask_vertices(g: &Graph, mask: u64) -> u64 {
    let mut verts = 0u64;
    for (idx, &(u, v)) in g.edges().iter().enumerate() {
        if mask >> idx & 1 == 1 {
            verts |= 1 << u | 1 << v;
        }
    }
    verts
}

#[allow(clippy::too_many_arguments)]
fn try_super_candidate(
    g: &Arc<Graph>,
    ls: &LayerStructure,
    i_set: &[usize],
    comps: &[Graph],
    mask: u64,
    opts: &CertifyOptions,
    ctx: &mut SearchCtx,
    depth: usize,
) -> Result<Option<RelocationWitness>> {
    let (x_abs, _) = g.edge_induced(mask);
    if !x_abs.is_connected() || is_isomorphic(&x_abs, g) {
        return Ok(None);
    }
    let x_arc = Arc::new(x_abs);
    let mut maps = Vec::with_capacity(comps.len());
    for comp in comps {
        match subgraph_embeddings(comp, &x_arc, None, Some(1))?.into_iter().next() {
            Some(emb) => maps.push(emb.map),
            None => return Ok(None),
        }
    }
    match ctx.memo_lookup(&x_arc) {
        Some(MemoEntry::InProgress) | Some(MemoEntry::Failed) => return Ok(None),
        Some(MemoEntry::Certifiable) | None => {}
    }
    ctx.memo_set(&x_arc, MemoEntry::InProgress);
    let sub_opts = CertifyOptions {
        mode: opts.mode,
        allow_screen_fail: false,
        budget: opts.budget.clone(),
    };
    let outcome = certify_inner(&x_arc, &sub_opts, ctx, depth + 1)?;
    match outcome {
        CertifyOutcome::Found(sub) => {
            ctx.memo_set(&x_arc, MemoEntry::Certifiable);
            let edge_set: HashSet<usize> =
                (0..g.edge_count()).filter(|&e| mask >> e & 1 == 1).collect();
            let mut super_edges: Vec<usize> = edge_set.iter().copied().collect();
            super_edges.sort_unstable();
            let seeds_covered = covered_seeds(ls, &edge_set);
            Ok(Some(RelocationWitness {
                layer_subset: i_set.to_vec(),
                kind: RelocationKind::RecursiveSuper,
                embedding: None,
                stars: None,
                super_edges: Some(super_edges),
                component_embeddings: Some(maps),
                seeds_covered,
                sub_certificate: Some(Box::new(sub)),
            }))
        }
        CertifyOutcome::NotFound { .. } => {
            ctx.memo_set(&x_arc, MemoEntry::Failed);
            Ok(None)
        }
    }
}

/// Rebuilds the layer structure named by a certificate, re-validating the
/// involutions from their serialized parts.
fn rebuild_structure(g: &Arc<Graph>, cert: &Certificate) -> Result<LayerStructure> {
    let mut phi = Vec::with_capacity(cert.phi.len());
    for ci in &cert.phi {
        let perm = VertexPermutation::new(ci.perm.clone())?;
        let mut left = ci.left.clone();
        let mut right = ci.right.clone();
        left.sort_unstable();
        right.sort_unstable();
        let rebuilt = CutInvolution::new(g.clone(), perm, left, right)?;
        if rebuilt.fixed() != ci.fixed.as_slice() || rebuilt.stable() != ci.stable {
            return Err(DomcertError::BadCertificate(
                "stored involution metadata disagrees with the rebuilt involution".into(),
            ));
        }
        phi.push(rebuilt);
    }
    LayerStructure::new(g.clone(), cert.layers.clone(), phi, cert.seeds.clone())
}

/// Re-checks every clause of a certificate from scratch: involutions,
/// layer partition, replay to the full edge set, the replay law over start
/// sets, each relocation witness, and the strong-mode restrictions. The
/// only hard error is a graph/certificate hash mismatch.
pub fn verify_certificate(
    g: &Arc<Graph>,
    cert: &Certificate,
    opts: &VerifyOptions,
) -> Result<VerifyReport> {
    let actual = g.sha256_hex();
    if cert.graph_sha != actual {
        return Err(DomcertError::HashMismatch {
            expected: cert.graph_sha.clone(),
            actual,
        });
    }
    let mut report = VerifyReport {
        pass: true,
        sound: true,
        clauses: Vec::new(),
    };
    report.clause("hash", true, format!("graph_sha {actual}"));

    let ls = match rebuild_structure(g, cert) {
        Ok(ls) => ls,
        Err(e) => {
            report.clause("involutions", false, e.to_string());
            report.sound = false;
            return Ok(report);
        }
    };
    report.clause(
        "involutions",
        true,
        format!("{} involutions rebuilt and re-validated", cert.phi.len()),
    );

    let layer_report = validate_layers(&ls);
    report.clause(
        "layers",
        layer_report.valid,
        if layer_report.valid {
            format!("{} layers partition the edges into orbits", cert.layers.len())
        } else {
            layer_report.violations.join("; ")
        },
    );
    if !layer_report.valid {
        report.sound = false;
        return Ok(report);
    }

    let replayed = replay(&ls.seed_subset(), &ls, &cert.signature)?;
    let replay_ok = replayed.bits() == g.full_edge_mask();
    report.clause(
        "replay",
        replay_ok,
        format!(
            "signature of length {} reaches {}/{} edges",
            cert.signature.len(),
            replayed.len(),
            g.edge_count()
        ),
    );

    let mp = check_multiperc(&ls, &cert.signature, opts.multiperc_trials, opts.rng_seed)?;
    report.clause(
        "multiperc",
        mp.failure.is_none(),
        match &mp.failure {
            None => format!(
                "replay law holds on {} start sets ({})",
                mp.checked,
                if mp.exhaustive { "exhaustive" } else { "sampled" }
            ),
            Some(f) => format!("replay law fails from start set {:?}", f.f0),
        },
    );

    let mut reloc_ok = true;
    let mut reloc_details = Vec::new();
    let mut used_asserted = false;
    let expected = proper_subsets(cert.layers.len());
    let got: Vec<Vec<usize>> = cert
        .relocations
        .iter()
        .map(|w| w.layer_subset.clone())
        .collect();
    if got != expected {
        reloc_ok = false;
        reloc_details.push("witness subsets do not enumerate the nonempty proper subsets".into());
    } else {
        for w in &cert.relocations {
            match check_witness(g, &ls, w, cert.mode, opts) {
                Ok(asserted) => used_asserted |= asserted,
                Err(e) => {
                    reloc_ok = false;
                    reloc_details.push(format!("I={:?}: {e}", w.layer_subset));
                }
            }
        }
    }
    report.clause(
        "relocations",
        reloc_ok,
        if reloc_ok {
            format!("{} witnesses re-validated", cert.relocations.len())
        } else {
            reloc_details.join("; ")
        },
    );

    let strong_ok = match cert.mode {
        CertMode::Dominating => true,
        CertMode::Strong => {
            let stable = ls.phi().iter().all(|ci| ci.stable());
            let kinds = cert.relocations.iter().all(|w| {
                strong_allows(w.kind)
                    && w.sub_certificate
                        .as_ref()
                        .map_or(true, |sub| sub.mode == CertMode::Strong)
            });
            stable && kinds
        }
    };
    report.clause(
        "strong",
        strong_ok,
        match cert.mode {
            CertMode::Dominating => "not applicable".into(),
            CertMode::Strong => "stability and witness-kind restrictions".into(),
        },
    );

    if used_asserted {
        report.sound = false;
    }
    report.sound &= report.pass;
    Ok(report)
}

/// Validates one witness; returns whether it relied on an `ASSERTED` claim.
fn check_witness(
    g: &Arc<Graph>,
    ls: &LayerStructure,
    w: &RelocationWitness,
    mode: CertMode,
    opts: &VerifyOptions,
) -> std::result::Result<bool, String> {
    let k = ls.layers().len();
    if w.layer_subset.is_empty() || w.layer_subset.len() >= k {
        return Err("layer subset not nonempty proper".into());
    }
    if mode == CertMode::Strong && !strong_allows(w.kind) {
        return Err(format!("kind {:?} not allowed in strong mode", w.kind));
    }
    let h_mask = w
        .layer_subset
        .iter()
        .fold(0u64, |acc, &i| acc | ls.layers()[i].bits());
    let (h_abs, _) = g.edge_induced(h_mask);

    let witness_edges: HashSet<usize> = match w.kind {
        RelocationKind::IsoCopy => {
            let map = w.embedding.as_ref().ok_or("missing embedding")?;
            if map.len() != h_abs.n() {
                return Err("embedding arity mismatch".into());
            }
            let mut seen = HashSet::new();
            for &v in map {
                if v >= g.n() || !seen.insert(v) {
                    return Err("embedding not injective into the host".into());
                }
            }
            let mut edges = HashSet::new();
            for &(u, v) in h_abs.edges() {
                let (a, b) = (map[u], map[v]);
                match g.edge_index(a.min(b), a.max(b)) {
                    Some(idx) => {
                        edges.insert(idx);
                    }
                    None => return Err(format!("image pair ({a}, {b}) is not a host edge")),
                }
            }
            edges
        }
        RelocationKind::StarUnion => {
            let stars = w.stars.as_ref().ok_or("missing stars")?;
            let (m, s) = star_shape(&h_abs).ok_or("layer union is not a uniform star forest")?;
            if stars.len() != m {
                return Err(format!("expected {m} stars, witness has {}", stars.len()));
            }
            let mut union = HashSet::new();
            for st in stars {
                if st.edges.len() != s {
                    return Err(format!("star at {} does not have {s} edges", st.center));
                }
                for &e in &st.edges {
                    let (u, v) = *g.edges().get(e).ok_or("star edge index out of range")?;
                    if u != st.center && v != st.center {
                        return Err(format!("edge {e} is not incident to centre {}", st.center));
                    }
                    if !union.insert(e) {
                        return Err(format!("edge {e} used by two stars"));
                    }
                }
            }
            union
        }
        RelocationKind::RecursiveSuper => {
            let edges = w.super_edges.as_ref().ok_or("missing witness edge set")?;
            let mask = to_edge_mask(g, edges)?;
            let (x_abs, _) = g.edge_induced(mask);
            let x_arc = Arc::new(x_abs);
            let sub = w.sub_certificate.as_ref().ok_or("missing sub-certificate")?;
            if sub.graph_sha != x_arc.sha256_hex() {
                return Err("sub-certificate is for a different graph".into());
            }
            let sub_report =
                verify_certificate(&x_arc, sub, opts).map_err(|e| e.to_string())?;
            if !sub_report.pass {
                return Err("sub-certificate fails verification".into());
            }
            if mode == CertMode::Strong && sub.mode != CertMode::Strong {
                return Err("sub-certificate is not strong".into());
            }
            let maps = w
                .component_embeddings
                .as_ref()
                .ok_or("missing component embeddings")?;
            let comps = h_abs.connected_components();
            if maps.len() != comps.len() {
                return Err("one embedding per component required".into());
            }
            for (comp, map) in comps.iter().zip(maps) {
                let sub_g = h_abs.induced(comp);
                if map.len() != sub_g.n() {
                    return Err("component embedding arity mismatch".into());
                }
                let mut seen = HashSet::new();
                for &v in map {
                    if v >= x_arc.n() || !seen.insert(v) {
                        return Err("component embedding not injective".into());
                    }
                }
                for &(u, v) in sub_g.edges() {
                    let (a, b) = (map[u], map[v]);
                    if !x_arc.has_edge(a, b) {
                        return Err("component embedding drops an edge".into());
                    }
                }
            }
            edges.iter().copied().collect()
        }
        RelocationKind::Asserted => {
            if !opts.allow_asserted {
                return Err("asserted witness rejected; re-run allowing asserted claims".into());
            }
            let edges = w.super_edges.as_ref().ok_or("missing witness edge set")?;
            let mask = to_edge_mask(g, edges)?;
            let (hp_abs, _) = g.edge_induced(mask);
            let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
            for _ in 0..200 {
                let w_rand =
                    StepGraphon::random(4, false, &mut rng).map_err(|e| e.to_string())?;
                let margin =
                    domination_margin(&hp_abs, &h_abs, &w_rand).map_err(|e| e.to_string())?;
                if margin < -1e-6 {
                    return Err(format!(
                        "asserted domination refuted numerically (margin {margin:.3e})"
                    ));
                }
            }
            edges.iter().copied().collect()
        }
    };

    let recomputed = covered_seeds(ls, &witness_edges);
    if recomputed != w.seeds_covered {
        return Err("stored covered-seed list disagrees with the witness edges".into());
    }
    if recomputed.len() <= w.layer_subset.len() {
        return Err(format!(
            "witness covers {} seeds, needs more than {}",
            recomputed.len(),
            w.layer_subset.len()
        ));
    }
    Ok(w.kind == RelocationKind::Asserted)
}

fn to_edge_mask(g: &Graph, edges: &[usize]) -> std::result::Result<u64, String> {
    let mut mask = 0u64;
    for &e in edges {
        if e >= g.edge_count() {
            return Err(format!("edge index {e} out of range"));
        }
        mask |= 1 << e;
    }
    if mask == 0 {
        return Err("witness edge set is empty".into());
    }
    Ok(mask)
}
