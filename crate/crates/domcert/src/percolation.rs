//! Folding sequences over edge subsets: replay, breadth-first search for
//! percolating signatures, layer validation, and the replay-law checker.
//!
//! A signature is a list of half-fold choices. Replaying one from a start
//! subset applies the folds in order; a signature percolates when it carries
//! the seed edges to the full edge set. When the folds respect a layer
//! partition, replaying from any initial subset lands exactly on the union
//! of the layers whose seed was initially present; `check_multiperc`
//! verifies that law exhaustively or by sampling.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::DomcertError;
use crate::graph::{EdgeSubset, Graph};
use crate::involution::{fold, CutInvolution, Side};
use crate::Result;

/// Default breadth-first state budget; override with `DOMCERT_MAX_STATES`.
pub const DEFAULT_MAX_STATES: usize = 1 << 20;

/// Resolves the state budget: explicit argument, else environment override,
/// else [`DEFAULT_MAX_STATES`].
pub fn effective_max_states(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| {
            std::env::var("DOMCERT_MAX_STATES")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(DEFAULT_MAX_STATES)
}

/// Ordered list of half-fold choices `(involution index, side)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Signature {
    steps: Vec<(usize, Side)>,
}

impl Signature {
    pub fn new(steps: Vec<(usize, Side)>) -> Self {
        Signature { steps }
    }

    pub fn steps(&self) -> &[(usize, Side)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl Serialize for Signature {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let raw: Vec<(usize, &str)> = self
            .steps
            .iter()
            .map(|&(i, side)| (i, side.letter()))
            .collect();
        raw.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<(usize, String)> = Vec::deserialize(de)?;
        let steps = raw
            .into_iter()
            .map(|(i, s)| Side::from_letter(&s).map(|side| (i, side)))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Ok(Signature { steps })
    }
}

/// A layer partition of a host's edges, the involution set that preserves
/// it, and one seed edge per layer.
#[derive(Clone, Debug)]
pub struct LayerStructure {
    host: Arc<Graph>,
    layers: Vec<EdgeSubset>,
    phi: Vec<CutInvolution>,
    seeds: Vec<usize>,
}

impl LayerStructure {
    /// Builds the structure with range checks only; run [`validate_layers`]
    /// for the semantic conditions.
    pub fn new(
        host: Arc<Graph>,
        layers: Vec<Vec<usize>>,
        phi: Vec<CutInvolution>,
        seeds: Vec<usize>,
    ) -> Result<Self> {
        let layers = layers
            .into_iter()
            .map(|ixs| EdgeSubset::from_indices(host.clone(), &ixs))
            .collect::<Result<Vec<_>>>()?;
        for ci in &phi {
            if !ci.host().same_structure(&host) {
                return Err(DomcertError::HostMismatch(
                    "involution defined over a different graph".into(),
                ));
            }
        }
        for &s in &seeds {
            if s >= host.edge_count() {
                return Err(DomcertError::BadCertificate(format!(
                    "seed edge index {s} out of range"
                )));
            }
        }
        Ok(LayerStructure {
            host,
            layers,
            phi,
            seeds,
        })
    }

    pub fn host(&self) -> &Arc<Graph> {
        &self.host
    }

    pub fn layers(&self) -> &[EdgeSubset] {
        &self.layers
    }

    pub fn phi(&self) -> &[CutInvolution] {
        &self.phi
    }

    pub fn seeds(&self) -> &[usize] {
        &self.seeds
    }

    /// Seed edges as a subset.
    pub fn seed_subset(&self) -> EdgeSubset {
        EdgeSubset::from_indices(self.host.clone(), &self.seeds).expect("seeds checked in new")
    }
}

/// Outcome of [`validate_layers`]; `violations` lists every failed clause.
#[derive(Clone, Debug, Serialize)]
pub struct LayerReport {
    pub valid: bool,
    pub violations: Vec<String>,
}

/// Checks the layer conditions: the layers partition the edge set, every
/// involution maps each layer onto itself, seed `i` lies in layer `i`, and
/// each layer is a single orbit under the group the involutions generate.
pub fn validate_layers(ls: &LayerStructure) -> LayerReport {
    let mut violations = Vec::new();
    let host = ls.host();
    let m = host.edge_count();

    let mut covered = 0u64;
    let mut overlap = false;
    for layer in ls.layers() {
        if covered & layer.bits() != 0 {
            overlap = true;
        }
        covered |= layer.bits();
    }
    if overlap {
        violations.push("partition: layers overlap".into());
    }
    if covered != host.full_edge_mask() {
        violations.push("partition: layers do not cover the edge set".into());
    }

    for (li, layer) in ls.layers().iter().enumerate() {
        for (pi, ci) in ls.phi().iter().enumerate() {
            let image = ci.apply_to_subset(layer).expect("host checked");
            if image != *layer {
                violations.push(format!("invariance: involution {pi} moves layer {li}"));
            }
        }
    }

    if ls.seeds().len() != ls.layers().len() {
        violations.push(format!(
            "seeds: {} seeds for {} layers",
            ls.seeds().len(),
            ls.layers().len()
        ));
    } else {
        for (li, &s) in ls.seeds().iter().enumerate() {
            if !ls.layers()[li].contains(s) {
                violations.push(format!("seeds: seed {s} not in layer {li}"));
            }
        }
    }

    let orbits = crate::involution::edge_orbits(host, ls.phi());
    for (li, layer) in ls.layers().iter().enumerate() {
        let idxs = layer.indices();
        if !idxs.is_empty() && !orbits.contains(&idxs) {
            violations.push(format!("transitivity: layer {li} is not a single orbit"));
        }
        if idxs.is_empty() {
            violations.push(format!("transitivity: layer {li} is empty"));
        }
    }
    let _ = m;

    LayerReport {
        valid: violations.is_empty(),
        violations,
    }
}

/// Applies the signature's folds to `f0` in order.
pub fn replay(f0: &EdgeSubset, ls: &LayerStructure, sig: &Signature) -> Result<EdgeSubset> {
    if !f0.host().same_structure(ls.host()) {
        return Err(DomcertError::HostMismatch(
            "start subset belongs to a different graph".into(),
        ));
    }
    let mut cur = f0.clone();
    for (step, &(idx, side)) in sig.steps().iter().enumerate() {
        let ci = ls.phi().get(idx).ok_or(DomcertError::BadSignatureIndex {
            step,
            index: idx,
            available: ls.phi().len(),
        })?;
        cur = fold(&cur, &ci.half_fold(side))?;
    }
    Ok(cur)
}

/// Per-action edge-image tables: `tables[a][e]` is the edge index `psi_a(e)`,
/// with actions ordered (involution 0 left, involution 0 right, 1 left, ...).
fn action_tables(host: &Graph, phi: &[CutInvolution]) -> Vec<Vec<usize>> {
    let mut tables = Vec::with_capacity(2 * phi.len());
    for ci in phi {
        for side in [Side::Left, Side::Right] {
            let psi = ci.half_fold(side);
            let table: Vec<usize> = host
                .edges()
                .iter()
                .map(|&e| {
                    let (a, b) = psi.edge_map(e);
                    host.edge_index(a, b).expect("edge image")
                })
                .collect();
            tables.push(table);
        }
    }
    tables
}

fn fold_mask(mask: u64, table: &[usize]) -> u64 {
    let mut out = 0u64;
    for (e, &img) in table.iter().enumerate() {
        if mask >> img & 1 == 1 {
            out |= 1 << e;
        }
    }
    out
}

/// Shortest signature of folds over `phi` carrying `start` to `goal`, ties
/// broken towards lexicographically smallest action sequences; `None` when
/// the goal is unreachable. Exploring more than `max_states` distinct
/// subsets aborts with `StateCapExceeded`, which keeps "unreachable" a
/// proven statement whenever the search returns.
pub fn find_percolating_sequence(
    phi: &[CutInvolution],
    start: &EdgeSubset,
    goal: &EdgeSubset,
    max_states: usize,
) -> Result<Option<Signature>> {
    if phi.is_empty() {
        return Err(DomcertError::BadParams(
            "percolation search needs at least one involution".into(),
        ));
    }
    let host = phi[0].host().clone();
    for ci in phi {
        if !ci.host().same_structure(&host) {
            return Err(DomcertError::HostMismatch(
                "involutions defined over different graphs".into(),
            ));
        }
    }
    if !start.host().same_structure(&host) || !goal.host().same_structure(&host) {
        return Err(DomcertError::HostMismatch(
            "start or goal subset belongs to a different graph".into(),
        ));
    }

    let tables = action_tables(&host, phi);
    // parent[state] = action and predecessor that first discovered it.
    let mut parent: HashMap<u64, Option<(u64, usize)>> = HashMap::new();
    parent.insert(start.bits(), None);
    let mut queue = VecDeque::new();
    queue.push_back(start.bits());
    let goal_bits = goal.bits();

    let found = 'bfs: {
        if start.bits() == goal_bits {
            break 'bfs true;
        }
        while let Some(cur) = queue.pop_front() {
            for (action, table) in tables.iter().enumerate() {
                let next = fold_mask(cur, table);
                if parent.contains_key(&next) {
                    continue;
                }
                if parent.len() >= max_states {
                    return Err(DomcertError::StateCapExceeded { max_states });
                }
                parent.insert(next, Some((cur, action)));
                if next == goal_bits {
                    break 'bfs true;
                }
                queue.push_back(next);
            }
        }
        false
    };

    if !found {
        return Ok(None);
    }
    let mut steps = Vec::new();
    let mut cur = goal_bits;
    while let Some(&Some((prev, action))) = parent.get(&cur) {
        steps.push((action / 2, if action % 2 == 0 { Side::Left } else { Side::Right }));
        cur = prev;
    }
    steps.reverse();
    Ok(Some(Signature::new(steps)))
}

/// Runs the seed-to-full search restricted to the structure's involutions,
/// then confirms the replay law on the result before returning it.
pub fn find_layered_percolation(
    ls: &LayerStructure,
    max_states: usize,
) -> Result<Option<Signature>> {
    let report = validate_layers(ls);
    if !report.valid {
        return Err(DomcertError::BadCertificate(format!(
            "invalid layer structure: {}",
            report.violations.join("; ")
        )));
    }
    let start = ls.seed_subset();
    let goal = EdgeSubset::full(ls.host().clone());
    let sig = match find_percolating_sequence(ls.phi(), &start, &goal, max_states)? {
        Some(sig) => sig,
        None => return Ok(None),
    };
    let trials = 1024;
    let report = check_multiperc(ls, &sig, trials, 0)?;
    if let Some(fail) = report.failure {
        // A percolating sequence over valid layers always satisfies the
        // replay law; a failure here means the validator and the law
        // disagree, which is a bug, not a property of the input.
        return Err(DomcertError::Internal(format!(
            "percolating sequence violates the replay law at start set {:?}",
            fail.f0
        )));
    }
    Ok(Some(sig))
}

/// One replay-law counterexample: starting from `f0`, the final set was
/// `actual` but the seed rule predicts `expected` (all edge indices).
#[derive(Clone, Debug, Serialize)]
pub struct MultipercFailure {
    pub f0: Vec<usize>,
    pub expected: Vec<usize>,
    pub actual: Vec<usize>,
}

/// Statistics from [`check_multiperc`].
#[derive(Clone, Debug, Serialize)]
pub struct MultipercReport {
    pub checked: usize,
    pub exhaustive: bool,
    pub failure: Option<MultipercFailure>,
}

/// Verifies the replay law for `sig` over `ls`: replaying from any start
/// subset must end on exactly the union of the layers whose seed the start
/// contained. Exhaustive over all subsets when the host has at most 16
/// edges, otherwise `trials` starts drawn from a seeded generator.
pub fn check_multiperc(
    ls: &LayerStructure,
    sig: &Signature,
    trials: usize,
    rng_seed: u64,
) -> Result<MultipercReport> {
    let host = ls.host().clone();
    let m = host.edge_count();
    let exhaustive = m <= 16;
    let full = host.full_edge_mask();

    let starts: Vec<u64> = if exhaustive {
        (0..1u64 << m).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        (0..trials).map(|_| rng.gen::<u64>() & full).collect()
    };

    let mut checked = 0;
    for f0_bits in starts {
        let f0 = EdgeSubset::new(host.clone(), f0_bits)?;
        let actual = replay(&f0, ls, sig)?;
        let mut expected = 0u64;
        for (li, layer) in ls.layers().iter().enumerate() {
            if f0_bits >> ls.seeds()[li] & 1 == 1 {
                expected |= layer.bits();
            }
        }
        checked += 1;
        if actual.bits() != expected {
            let to_vec = |bits: u64| (0..m).filter(|&i| bits >> i & 1 == 1).collect();
            return Ok(MultipercReport {
                checked,
                exhaustive,
                failure: Some(MultipercFailure {
                    f0: to_vec(f0_bits),
                    expected: to_vec(expected),
                    actual: to_vec(actual.bits()),
                }),
            });
        }
    }
    Ok(MultipercReport {
        checked,
        exhaustive,
        failure: None,
    })
}
