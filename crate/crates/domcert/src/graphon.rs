//! Homomorphism counting and densities.
//!
//! Patterns are counted into finite graphs exactly, and integrated against
//! step graphons (block-constant symmetric kernels with a weighted block
//! measure). Densities multiply over pattern components, so everything is
//! evaluated per component: small components by direct enumeration of block
//! assignments, large ones by variable elimination in float arithmetic.
//! Exact rational values ride along whenever the direct path is cheap
//! enough; reported violations are always re-confirmed in exact arithmetic.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::DomcertError;
use crate::graph::{Graph, DEFAULT_VERTEX_CAP};
use crate::Result;

/// Term budget for direct per-component enumeration (`k^v` assignments).
pub const WORK_CAP: usize = 2_000_000;
/// Term budget for the exact rational side channel.
const EXACT_CAP: usize = 50_000;
/// Entry budget for a single elimination table in the DP path.
const DP_TABLE_CAP: usize = 4_000_000;

const SYM_TOL: f64 = 1e-12;

/// Block-constant symmetric kernel: `k` blocks with positive measures
/// summing to 1, and a symmetric `k x k` value matrix, in `[0,1]` normally
/// or `[-1,1]` when `signed`.
///
/// An exact rational twin rides along. By default it is the lossless
/// reading of the floats; constructors whose intended parameters are not
/// float-representable (uniform measures `1/n`) install the intended
/// rationals instead, and the float matrix is then their nearest rendering.
#[derive(Clone, Debug)]
pub struct StepGraphon {
    k: usize,
    values: Vec<Vec<f64>>,
    measures: Vec<f64>,
    signed: bool,
    exact: ExactGraphon,
}

impl PartialEq for StepGraphon {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k
            && self.values == other.values
            && self.measures == other.measures
            && self.signed == other.signed
    }
}

#[derive(Serialize, Deserialize)]
struct StepGraphonJson {
    k: usize,
    values: Vec<Vec<f64>>,
    measures: Vec<f64>,
    #[serde(default)]
    signed: bool,
}

impl StepGraphon {
    /// Validates and symmetrises the inputs: values must be symmetric within
    /// 1e-12 (exact symmetry is then enforced by averaging), in range for
    /// the signedness, with positive measures summing to 1 within 1e-12.
    pub fn new(values: Vec<Vec<f64>>, measures: Vec<f64>, signed: bool) -> Result<Self> {
        let k = measures.len();
        if k == 0 {
            return Err(DomcertError::BadGraphon("no blocks".into()));
        }
        if values.len() != k || values.iter().any(|row| row.len() != k) {
            return Err(DomcertError::BadGraphon(format!(
                "values must be a {k}x{k} matrix"
            )));
        }
        let lo = if signed { -1.0 } else { 0.0 };
        let mut sym = values;
        for a in 0..k {
            for b in a..k {
                let (x, y) = (sym[a][b], sym[b][a]);
                if !x.is_finite() || (x - y).abs() > SYM_TOL {
                    return Err(DomcertError::BadGraphon(format!(
                        "values not symmetric at ({a}, {b}): {x} vs {y}"
                    )));
                }
                let v = 0.5 * (x + y);
                if v < lo - SYM_TOL || v > 1.0 + SYM_TOL {
                    return Err(DomcertError::BadGraphon(format!(
                        "value {v} at ({a}, {b}) outside [{lo}, 1]"
                    )));
                }
                let v = v.clamp(lo, 1.0);
                sym[a][b] = v;
                sym[b][a] = v;
            }
        }
        let total: f64 = measures.iter().sum();
        if measures.iter().any(|&m| !(m > 0.0)) {
            return Err(DomcertError::BadGraphon(
                "measures must all be positive".into(),
            ));
        }
        if (total - 1.0).abs() > SYM_TOL {
            return Err(DomcertError::BadGraphon(format!(
                "measures sum to {total}, not 1"
            )));
        }
        let conv = |x: f64| BigRational::from_float(x).expect("finite float");
        let exact = ExactGraphon {
            values: sym
                .iter()
                .map(|row| row.iter().map(|&x| conv(x)).collect())
                .collect(),
            measures: measures.iter().map(|&x| conv(x)).collect(),
            signed,
        };
        Ok(StepGraphon {
            k,
            values: sym,
            measures,
            signed,
            exact,
        })
    }

    /// One block of constant value `p`.
    pub fn constant(p: f64) -> Result<Self> {
        Self::new(vec![vec![p]], vec![1.0], p < 0.0)
    }

    /// `n` equal blocks, value 1 on the diagonal and 0 elsewhere.
    pub fn identity_blocks(n: usize) -> Result<Self> {
        let values: Vec<Vec<f64>> = (0..n)
            .map(|a| (0..n).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
            .collect();
        let mut w = Self::new(values, vec![1.0 / n as f64; n], false)?;
        // Install the intended uniform measures; 1/n is not a float.
        w.exact.measures = vec![BigRational::new(BigInt::one(), BigInt::from(n)); n];
        Ok(w)
    }

    /// Two blocks of measure `eps` and `1 - eps`, value 1 across and 0
    /// within.
    pub fn two_block(eps: f64) -> Result<Self> {
        if !(0.0 < eps && eps < 1.0) {
            return Err(DomcertError::BadGraphon(format!(
                "block measure {eps} outside (0, 1)"
            )));
        }
        Self::new(
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![eps, 1.0 - eps],
            false,
        )
    }

    /// Step-graphon encoding of a finite graph: one uniform block per
    /// vertex, values = adjacency indicators.
    pub fn from_graph(g: &Graph) -> Result<Self> {
        let n = g.n();
        if n == 0 {
            return Err(DomcertError::BadGraphon("empty target graph".into()));
        }
        let values: Vec<Vec<f64>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| if g.has_edge(a, b) { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        let mut w = Self::new(values, vec![1.0 / n as f64; n], false)?;
        w.exact.measures = vec![BigRational::new(BigInt::one(), BigInt::from(n)); n];
        Ok(w)
    }

    /// Uniformly random graphon: values i.i.d. in the admissible range and
    /// symmetrised, measures a normalised positive vector.
    pub fn random<R: rand::Rng>(k: usize, signed: bool, rng: &mut R) -> Result<Self> {
        let lo = if signed { -1.0 } else { 0.0 };
        let mut values = vec![vec![0.0; k]; k];
        for a in 0..k {
            for b in a..k {
                let v = rng.gen_range(lo..=1.0);
                values[a][b] = v;
                values[b][a] = v;
            }
        }
        let mut measures: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = measures.iter().sum();
        for m in &mut measures {
            *m /= total;
        }
        // Renormalisation drift is well below the validation tolerance.
        let err: f64 = 1.0 - measures.iter().sum::<f64>();
        measures[k - 1] += err;
        Self::new(values, measures, signed)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn signed(&self) -> bool {
        self.signed
    }

    /// The rational twin of this graphon.
    pub fn exact(&self) -> &ExactGraphon {
        &self.exact
    }

    /// Whether the exact channel is worth carrying through a density
    /// computation: arbitrary floats have 50-bit denominators whose products
    /// are slow and meaningless, while intended rationals stay small.
    fn exact_is_cheap(&self) -> bool {
        self.exact
            .values
            .iter()
            .flatten()
            .chain(self.exact.measures.iter())
            .all(|r| r.denom().bits() <= 34)
    }

    /// Copy with one symmetric entry replaced; used by gradient ascent.
    pub fn with_value(&self, a: usize, b: usize, v: f64) -> Result<StepGraphon> {
        let mut values = self.values.clone();
        values[a][b] = v;
        values[b][a] = v;
        StepGraphon::new(values, self.measures.clone(), self.signed)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: StepGraphonJson = serde_json::from_str(s)?;
        if raw.k != raw.measures.len() {
            return Err(DomcertError::BadGraphon(format!(
                "k = {} but {} measures",
                raw.k,
                raw.measures.len()
            )));
        }
        Self::new(raw.values, raw.measures, raw.signed)
    }

    pub fn to_json(&self) -> String {
        let dto = StepGraphonJson {
            k: self.k,
            values: self.values.clone(),
            measures: self.measures.clone(),
            signed: self.signed,
        };
        serde_json::to_string(&dto).expect("graphon serialization cannot fail")
    }
}

/// Exact-rational twin of a step graphon; every `f64` converts exactly, so
/// this is lossless.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactGraphon {
    pub values: Vec<Vec<BigRational>>,
    pub measures: Vec<BigRational>,
    pub signed: bool,
}

impl ExactGraphon {
    pub fn k(&self) -> usize {
        self.measures.len()
    }

    /// The graphon's carried rational twin.
    pub fn from_step(w: &StepGraphon) -> Self {
        w.exact.clone()
    }

    /// Nearest float rendering, for reports.
    pub fn to_step(&self) -> Result<StepGraphon> {
        let conv = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
        StepGraphon::new(
            self.values
                .iter()
                .map(|row| row.iter().map(conv).collect())
                .collect(),
            self.measures.iter().map(conv).collect(),
            self.signed,
        )
    }
}

/// Canonical `p/q` rendering of a rational (always with a denominator).
pub fn ratio_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Best rational approximation to `x` with denominator at most `max_den`,
/// by continued fractions.
pub fn best_rational(x: f64, max_den: u64) -> BigRational {
    assert!(x.is_finite());
    let negative = x < 0.0;
    let mut x = x.abs();
    // Convergents p/q of the continued fraction of x.
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    for _ in 0..64 {
        let a = x.floor();
        if a > u64::MAX as f64 {
            break;
        }
        let a_int = a as u128;
        let p2 = a_int.saturating_mul(p1).saturating_add(p0);
        let q2 = a_int.saturating_mul(q1).saturating_add(q0);
        if q2 > max_den as u128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = x - a;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    let mut r = BigRational::new(BigInt::from(p1), BigInt::from(q1.max(1)));
    if negative {
        r = -r;
    }
    r
}

/// Snaps every entry to a small-denominator rational; measures are then
/// renormalised exactly so they sum to 1, and values are clamped to the
/// admissible range.
pub fn rationalize(w: &StepGraphon, max_den: u64) -> ExactGraphon {
    let lo = if w.signed {
        -BigRational::one()
    } else {
        BigRational::zero()
    };
    let hi = BigRational::one();
    let values: Vec<Vec<BigRational>> = (0..w.k)
        .map(|a| {
            (0..w.k)
                .map(|b| {
                    let mut r = best_rational(w.values[a.min(b)][a.max(b)], max_den);
                    if r < lo {
                        r = lo.clone();
                    }
                    if r > hi {
                        r = hi.clone();
                    }
                    r
                })
                .collect()
        })
        .collect();
    let mut measures: Vec<BigRational> =
        w.measures.iter().map(|&m| best_rational(m, max_den)).collect();
    let total: BigRational = measures.iter().cloned().sum();
    for m in &mut measures {
        *m /= total.clone();
    }
    ExactGraphon {
        values,
        measures,
        signed: w.signed,
    }
}

/// A density as a float plus, when the evaluation stayed on the exact path,
/// the same number as a rational.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityValue {
    pub value: f64,
    pub exact: Option<BigRational>,
}

impl DensityValue {
    pub fn exact_string(&self) -> Option<String> {
        self.exact.as_ref().map(ratio_string)
    }
}

impl Serialize for DensityValue {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = ser.serialize_struct("DensityValue", 2)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("exact", &self.exact_string())?;
        st.end()
    }
}

/// Connected components as vertex lists, each in a breadth-first order where
/// every non-root vertex has an earlier neighbour; roots are max-degree.
fn component_orders(g: &Graph) -> Vec<Vec<usize>> {
    g.connected_components()
        .into_iter()
        .map(|comp| {
            let root = *comp
                .iter()
                .max_by_key(|&&v| (g.degree(v), std::cmp::Reverse(v)))
                .expect("component nonempty");
            let mut order = Vec::with_capacity(comp.len());
            let mut seen: std::collections::HashSet<usize> = [root].into();
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for u in g.neighbors(v) {
                    if comp.binary_search(&u).is_ok() && seen.insert(u) {
                        queue.push_back(u);
                    }
                }
            }
            order
        })
        .collect()
}

/// Exact number of homomorphisms (edge-preserving vertex maps, not
/// necessarily injective) from `pattern` into `target`.
pub fn hom_count(pattern: &Graph, target: &Graph) -> Result<BigUint> {
    if pattern.n() > DEFAULT_VERTEX_CAP {
        return Err(DomcertError::CapExceeded {
            what: "pattern vertex count for homomorphism counting",
            actual: pattern.n(),
            cap: DEFAULT_VERTEX_CAP,
        });
    }
    let mut total = BigUint::one();
    for order in component_orders(pattern) {
        let mut count = BigUint::zero();
        let mut assign = vec![usize::MAX; pattern.n()];
        hom_backtrack(pattern, target, &order, 0, &mut assign, &mut count);
        total *= count;
    }
    Ok(total)
}

fn hom_backtrack(
    pattern: &Graph,
    target: &Graph,
    order: &[usize],
    pos: usize,
    assign: &mut [usize],
    count: &mut BigUint,
) {
    if pos == order.len() {
        *count += BigUint::one();
        return;
    }
    let p = order[pos];
    'cand: for t in 0..target.n() {
        for q in pattern.neighbors(p) {
            if assign[q] != usize::MAX && !target.has_edge(t, assign[q]) {
                continue 'cand;
            }
        }
        assign[p] = t;
        hom_backtrack(pattern, target, order, pos + 1, assign, count);
        assign[p] = usize::MAX;
    }
}

/// Homomorphism density into a finite graph: `hom / n^v`, exact.
pub fn density_graph(pattern: &Graph, target: &Graph) -> Result<DensityValue> {
    if target.n() == 0 {
        return Err(DomcertError::BadGraph("empty target graph".into()));
    }
    let hom = hom_count(pattern, target)?;
    let denom = BigUint::from(target.n()).pow(pattern.n() as u32);
    let exact = BigRational::new(BigInt::from(hom), BigInt::from(denom));
    Ok(DensityValue {
        value: exact.to_f64().unwrap_or(f64::NAN),
        exact: Some(exact),
    })
}

fn checked_pow(k: usize, v: usize, cap: usize) -> Option<usize> {
    let mut acc = 1usize;
    for _ in 0..v {
        acc = acc.checked_mul(k)?;
        if acc > cap {
            return None;
        }
    }
    Some(acc)
}

/// Direct assignment enumeration over one component; zero partial products
/// are pruned, which is sound because every extension keeps the factor.
fn comp_density_direct(g: &Graph, w: &StepGraphon, order: &[usize]) -> f64 {
    fn rec(
        g: &Graph,
        w: &StepGraphon,
        order: &[usize],
        pos: usize,
        partial: f64,
        assign: &mut [usize],
    ) -> f64 {
        if pos == order.len() {
            return partial;
        }
        let p = order[pos];
        let mut acc = 0.0;
        for b in 0..w.k {
            let mut f = partial * w.measures[b];
            for q in g.neighbors(p) {
                if assign[q] != usize::MAX {
                    f *= w.values[b][assign[q]];
                }
            }
            if f != 0.0 {
                assign[p] = b;
                acc += rec(g, w, order, pos + 1, f, assign);
                assign[p] = usize::MAX;
            }
        }
        acc
    }
    let mut assign = vec![usize::MAX; g.n()];
    rec(g, w, order, 0, 1.0, &mut assign)
}

fn comp_density_exact(g: &Graph, w: &ExactGraphon, order: &[usize]) -> BigRational {
    fn rec(
        g: &Graph,
        w: &ExactGraphon,
        order: &[usize],
        pos: usize,
        partial: &BigRational,
        assign: &mut [usize],
    ) -> BigRational {
        if pos == order.len() {
            return partial.clone();
        }
        let p = order[pos];
        let mut acc = BigRational::zero();
        for b in 0..w.k() {
            let mut f = partial * &w.measures[b];
            for q in g.neighbors(p) {
                if assign[q] != usize::MAX {
                    f *= &w.values[b][assign[q]];
                }
            }
            if !f.is_zero() {
                assign[p] = b;
                acc += rec(g, w, order, pos + 1, &f, assign);
                assign[p] = usize::MAX;
            }
        }
        acc
    }
    let mut assign = vec![usize::MAX; g.n()];
    rec(g, w, order, 0, &BigRational::one(), &mut assign)
}

/// Factor over a sorted scope of component-local variables; `table` is
/// row-major with the last scope variable fastest.
struct Factor {
    scope: Vec<usize>,
    table: Vec<f64>,
}

/// Variable elimination over one component in min-degree order. Exact in
/// float arithmetic; used when direct enumeration would be too large.
fn comp_density_dp(g: &Graph, w: &StepGraphon, comp: &[usize]) -> Result<f64> {
    let k = w.k;
    let local = |v: usize| comp.binary_search(&v).expect("vertex in component");
    let mut factors: Vec<Factor> = Vec::new();
    for &(u, v) in g.edges() {
        if comp.binary_search(&u).is_ok() && comp.binary_search(&v).is_ok() {
            let (a, b) = (local(u), local(v));
            let (lo, hi) = (a.min(b), a.max(b));
            let mut table = vec![0.0; k * k];
            for x in 0..k {
                for y in 0..k {
                    table[x * k + y] = w.values[x][y];
                }
            }
            factors.push(Factor {
                scope: vec![lo, hi],
                table,
            });
        }
    }
    let nvars = comp.len();
    if factors.is_empty() {
        // Single-vertex component: measures integrate to 1.
        return Ok(1.0);
    }

    let mut eliminated = vec![false; nvars];
    let mut scalar = 1.0;
    for _ in 0..nvars {
        // Min-degree heuristic on the current factor hypergraph.
        let degree = |v: usize| -> usize {
            let mut nbrs: std::collections::HashSet<usize> = Default::default();
            for f in &factors {
                if f.scope.contains(&v) {
                    nbrs.extend(f.scope.iter().filter(|&&u| u != v));
                }
            }
            nbrs.len()
        };
        let v = (0..nvars)
            .filter(|&v| !eliminated[v])
            .min_by_key(|&v| (degree(v), v))
            .expect("variable left");
        eliminated[v] = true;

        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.scope.contains(&v));
        factors = rest;

        let mut joint_scope: Vec<usize> = touching.iter().flat_map(|f| f.scope.clone()).collect();
        joint_scope.sort_unstable();
        joint_scope.dedup();
        let table_size = checked_pow(k, joint_scope.len(), DP_TABLE_CAP).ok_or(
            DomcertError::CapExceeded {
                what: "elimination table entries",
                actual: joint_scope.len(),
                cap: DP_TABLE_CAP,
            },
        )?;

        // Multiply the touching factors over the joint scope and sum out v
        // with its measure weight.
        let out_scope: Vec<usize> = joint_scope.iter().copied().filter(|&u| u != v).collect();
        let mut out_table = vec![0.0; table_size / k];
        let mut idx = vec![0usize; joint_scope.len()];
        let v_pos = joint_scope.binary_search(&v).expect("v in scope");
        for flat in 0..table_size {
            // Decode flat into idx (last variable fastest).
            let mut rem = flat;
            for pos in (0..joint_scope.len()).rev() {
                idx[pos] = rem % k;
                rem /= k;
            }
            let mut prod = w.measures[idx[v_pos]];
            for f in &touching {
                let mut fi = 0usize;
                for &u in &f.scope {
                    let pos = joint_scope.binary_search(&u).expect("subset scope");
                    fi = fi * k + idx[pos];
                }
                prod *= f.table[fi];
            }
            if prod != 0.0 {
                let mut oi = 0usize;
                for &u in &out_scope {
                    let pos = joint_scope.binary_search(&u).expect("subset scope");
                    oi = oi * k + idx[pos];
                }
                out_table[oi] += prod;
            }
        }
        if out_scope.is_empty() {
            scalar *= out_table[0];
        } else {
            factors.push(Factor {
                scope: out_scope,
                table: out_table,
            });
        }
    }
    // All variables eliminated; only scalars can remain.
    for f in factors {
        scalar *= f.table[0];
    }
    Ok(scalar)
}

pub(crate) fn density_step_with_cap(
    pattern: &Graph,
    w: &StepGraphon,
    work_cap: usize,
) -> Result<DensityValue> {
    let orders = component_orders(pattern);
    let comps = pattern.connected_components();
    let mut value = 1.0;
    let mut exact = if w.exact_is_cheap() {
        Some(BigRational::one())
    } else {
        None
    };
    for (order, comp) in orders.iter().zip(&comps) {
        if checked_pow(w.k, order.len(), work_cap).is_some() {
            value *= comp_density_direct(pattern, w, order);
        } else {
            value *= comp_density_dp(pattern, w, comp)?;
        }
        if checked_pow(w.k, order.len(), EXACT_CAP).is_some() {
            if let Some(acc) = exact.take() {
                exact = Some(acc * comp_density_exact(pattern, w.exact(), order));
            }
        } else {
            exact = None;
        }
    }
    Ok(DensityValue { value, exact })
}

/// Density of `pattern` in the step graphon: the measure-weighted sum over
/// all block assignments of the product of edge values. Isolated vertices
/// integrate to 1.
pub fn density_step(pattern: &Graph, w: &StepGraphon) -> Result<DensityValue> {
    density_step_with_cap(pattern, w, WORK_CAP)
}

/// Density against an exact graphon, fully in rational arithmetic.
pub fn density_step_exact(pattern: &Graph, w: &ExactGraphon) -> Result<BigRational> {
    let orders = component_orders(pattern);
    let mut acc = BigRational::one();
    for order in orders {
        if checked_pow(w.k(), order.len(), WORK_CAP).is_none() {
            return Err(DomcertError::CapExceeded {
                what: "exact enumeration terms",
                actual: order.len(),
                cap: WORK_CAP,
            });
        }
        acc *= comp_density_exact(pattern, w, &order);
    }
    Ok(acc)
}

/// Analytic gradient of `density_step` in the symmetric entries: entry
/// `(a, b)` differentiates with `values[a][b]` and `values[b][a]` treated as
/// one variable. Computed by leave-one-out edge products, so zero-valued
/// entries still receive their true sensitivity.
pub fn density_gradient(pattern: &Graph, w: &StepGraphon) -> Result<Vec<Vec<f64>>> {
    let k = w.k;
    let orders = component_orders(pattern);
    let mut comp_values = Vec::with_capacity(orders.len());
    let mut comp_grads = Vec::with_capacity(orders.len());
    for order in &orders {
        if checked_pow(k, order.len(), WORK_CAP).is_none() {
            return Err(DomcertError::CapExceeded {
                what: "gradient enumeration terms",
                actual: order.len(),
                cap: WORK_CAP,
            });
        }
        let (t, grad) = comp_gradient(pattern, w, order);
        comp_values.push(t);
        comp_grads.push(grad);
    }
    // d(prod t_c) = sum_c dgrad_c * prod_{c' != c} t_{c'}.
    let m = orders.len();
    let mut prefix = vec![1.0; m + 1];
    for i in 0..m {
        prefix[i + 1] = prefix[i] * comp_values[i];
    }
    let mut suffix = vec![1.0; m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1] * comp_values[i];
    }
    let mut grad = vec![vec![0.0; k]; k];
    for (c, cg) in comp_grads.iter().enumerate() {
        let others = prefix[c] * suffix[c + 1];
        for a in 0..k {
            for b in 0..k {
                grad[a][b] += cg[a][b] * others;
            }
        }
    }
    Ok(grad)
}

/// Value and gradient of one component by full enumeration with
/// leave-one-out prefix/suffix products over the edge factors.
fn comp_gradient(g: &Graph, w: &StepGraphon, order: &[usize]) -> (f64, Vec<Vec<f64>>) {
    let k = w.k;
    let v = order.len();
    let edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .copied()
        .filter(|&(a, b)| order.contains(&a) && order.contains(&b))
        .collect();
    let mut grad = vec![vec![0.0; k]; k];
    let mut total = 0.0;
    let mut assign_local = vec![0usize; v];
    let mut assign = vec![usize::MAX; g.n()];
    let ne = edges.len();
    let mut factors = vec![0.0; ne];
    let mut prefix = vec![1.0; ne + 1];
    let mut suffix = vec![1.0; ne + 1];
    loop {
        for (pos, &p) in order.iter().enumerate() {
            assign[p] = assign_local[pos];
        }
        let mu: f64 = order.iter().map(|&p| w.measures[assign[p]]).product();
        for (i, &(a, b)) in edges.iter().enumerate() {
            factors[i] = w.values[assign[a]][assign[b]];
        }
        for i in 0..ne {
            prefix[i + 1] = prefix[i] * factors[i];
        }
        for i in (0..ne).rev() {
            suffix[i] = suffix[i + 1] * factors[i];
        }
        total += mu * prefix[ne];
        for (i, &(a, b)) in edges.iter().enumerate() {
            let loo = prefix[i] * suffix[i + 1];
            let (x, y) = (assign[a].min(assign[b]), assign[a].max(assign[b]));
            grad[x][y] += mu * loo;
        }
        // Odometer increment over local assignments.
        let mut pos = v;
        loop {
            if pos == 0 {
                for &p in order {
                    assign[p] = usize::MAX;
                }
                for a in 0..k {
                    for b in a + 1..k {
                        grad[b][a] = grad[a][b];
                    }
                }
                return (total, grad);
            }
            pos -= 1;
            assign_local[pos] += 1;
            if assign_local[pos] < k {
                break;
            }
            assign_local[pos] = 0;
        }
    }
}

/// `|t_h(w)|^(1/e(h)) - |t_h'(w)|^(1/e(h'))`; a negative value exhibits a
/// violation of edge-normalised domination at `w`.
pub fn domination_margin(h: &Graph, hprime: &Graph, w: &StepGraphon) -> Result<f64> {
    if h.edge_count() == 0 || hprime.edge_count() == 0 {
        return Err(DomcertError::BadParams(
            "domination margin needs patterns with at least one edge".into(),
        ));
    }
    let th = density_step(h, w)?.value;
    let tp = density_step(hprime, w)?.value;
    Ok(normalized(th, h.edge_count()) - normalized(tp, hprime.edge_count()))
}

/// `|t|^(1/e)`.
pub fn normalized(t: f64, e: usize) -> f64 {
    t.abs().powf(1.0 / e as f64)
}

/// Exact cross-multiplied domination comparison: true iff
/// `|t_h|^(1/e_h) < |t_h'|^(1/e_h')`, i.e. `|t_h|^(e_h') < |t_h'|^(e_h)`.
pub fn exact_violation(th: &BigRational, eh: usize, tp: &BigRational, ep: usize) -> bool {
    th.abs().pow(ep as i32) < tp.abs().pow(eh as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{
        c6_plus, complete_bipartite, even_cycle, path, perfect_tree, star,
    };
    use crate::graph::Graph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn k3() -> Graph {
        Graph::new(3, &[(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn hom_counts_into_triangle() {
        assert_eq!(hom_count(&path(2).unwrap(), &k3()).unwrap(), big(6));
        // Trace of the 4th power of the adjacency matrix: 2^4 + 2*(-1)^4.
        assert_eq!(hom_count(&even_cycle(4).unwrap(), &k3()).unwrap(), big(18));
        assert_eq!(hom_count(&path(3).unwrap(), &k3()).unwrap(), big(12));
    }

    #[test]
    fn graph_densities_exact() {
        let d = density_graph(&path(2).unwrap(), &k3()).unwrap();
        assert_eq!(d.exact, Some(rat(2, 3)));
        let d = density_graph(&even_cycle(4).unwrap(), &k3()).unwrap();
        assert_eq!(d.exact, Some(rat(2, 9)));
        let edgeless = Graph::new(3, &[]).unwrap();
        let d = density_graph(&path(2).unwrap(), &edgeless).unwrap();
        assert_eq!(d.exact, Some(rat(0, 1)));
    }

    #[test]
    fn identity_blocks_density_counts_diagonal_maps() {
        for (pattern, v) in [(even_cycle(4).unwrap(), 4), (path(3).unwrap(), 3)] {
            let w = StepGraphon::identity_blocks(3).unwrap();
            let d = density_step(&pattern, &w).unwrap();
            let expect = rat(1, 3i64.pow(v - 1));
            assert_eq!(d.exact, Some(expect));
        }
    }

    #[test]
    fn constant_graphon_single_edge_density_is_p() {
        let w = StepGraphon::constant(0.37).unwrap();
        let d = density_step(&path(2).unwrap(), &w).unwrap();
        assert!((d.value - 0.37).abs() < 1e-15);
    }

    #[test]
    fn star_density_in_two_block_graphon_matches_closed_form() {
        let eps = 0.13f64;
        let w = StepGraphon::two_block(eps).unwrap();
        for delta in 1..=4usize {
            let d = density_step(&star(delta).unwrap(), &w).unwrap();
            let closed = eps * (1.0 - eps).powi(delta as i32)
                + eps.powi(delta as i32) * (1.0 - eps);
            assert!((d.value - closed).abs() < 1e-14, "delta = {delta}");
        }
        // With a dyadic measure the identity holds in exact arithmetic.
        let w = StepGraphon::two_block(0.125).unwrap();
        let eps = rat(1, 8);
        let co = rat(7, 8);
        for delta in 1..=4usize {
            let d = density_step(&star(delta).unwrap(), &w).unwrap();
            let closed = &eps * co.pow(delta as i32) + eps.pow(delta as i32) * &co;
            assert_eq!(d.exact, Some(closed));
        }
    }

    #[test]
    fn graph_encoding_matches_graph_density_exactly() {
        let patterns = [path(3).unwrap(), even_cycle(4).unwrap(), star(3).unwrap()];
        let targets = [k3(), complete_bipartite(2, 3).unwrap(), even_cycle(6).unwrap()];
        for p in &patterns {
            for t in &targets {
                let via_graph = density_graph(p, t).unwrap().exact.unwrap();
                let w = StepGraphon::from_graph(t).unwrap();
                let via_step = density_step(p, &w).unwrap().exact.unwrap();
                assert_eq!(via_graph, via_step);
            }
        }
    }

    #[test]
    fn density_multiplies_over_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // P_3 on 0..3 plus a disjoint edge on 3..5.
        let disjoint = Graph::new(5, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        for _ in 0..20 {
            let w = StepGraphon::random(3, false, &mut rng).unwrap();
            let whole = density_step(&disjoint, &w).unwrap().value;
            let a = density_step(&path(3).unwrap(), &w).unwrap().value;
            let b = density_step(&path(2).unwrap(), &w).unwrap().value;
            assert!((whole - a * b).abs() < 1e-12);
        }
    }

    #[test]
    fn isolated_vertices_do_not_change_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let with_isolated = Graph::new(4, &[(0, 1)]).unwrap();
        for _ in 0..10 {
            let w = StepGraphon::random(3, false, &mut rng).unwrap();
            let a = density_step(&with_isolated, &w).unwrap().value;
            let b = density_step(&path(2).unwrap(), &w).unwrap().value;
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn elimination_path_matches_direct_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for pattern in [even_cycle(6).unwrap(), c6_plus(), perfect_tree(3, 2).unwrap()] {
            for _ in 0..10 {
                let w = StepGraphon::random(3, false, &mut rng).unwrap();
                let direct = density_step(&pattern, &w).unwrap().value;
                // A cap of 1 forces every component through the DP.
                let dp = density_step_with_cap(&pattern, &w, 1).unwrap().value;
                assert!(
                    (direct - dp).abs() < 1e-12 * direct.abs().max(1.0),
                    "{direct} vs {dp}"
                );
            }
        }
    }

    #[test]
    fn gradient_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let w = StepGraphon::random(3, false, &mut rng).unwrap();
        let g = density_gradient(&path(2).unwrap(), &w).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let expect = if a == b {
                    w.measures()[a] * w.measures()[a]
                } else {
                    2.0 * w.measures()[a] * w.measures()[b]
                };
                assert!((g[a][b] - expect).abs() < 1e-14);
            }
        }

        let zero = StepGraphon::new(vec![vec![0.0; 2]; 2], vec![0.5, 0.5], false).unwrap();
        let g = density_gradient(&path(3).unwrap(), &zero).unwrap();
        assert!(g.iter().flatten().all(|&x| x == 0.0));

        let p = 0.42;
        let w = StepGraphon::constant(p).unwrap();
        let g = density_gradient(&even_cycle(4).unwrap(), &w).unwrap();
        assert!((g[0][0] - 4.0 * p.powi(3)).abs() < 1e-13);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for pattern in [even_cycle(4).unwrap(), star(3).unwrap(), c6_plus()] {
            let w = StepGraphon::random(3, false, &mut rng).unwrap();
            let grad = density_gradient(&pattern, &w).unwrap();
            let h = 1e-5;
            for a in 0..3 {
                for b in a..3 {
                    let base = w.values()[a][b];
                    let plus = w.with_value(a, b, (base + h).min(1.0)).unwrap();
                    let minus = w.with_value(a, b, (base - h).max(0.0)).unwrap();
                    let step = plus.values()[a][b] - minus.values()[a][b];
                    let fd = (density_step(&pattern, &plus).unwrap().value
                        - density_step(&pattern, &minus).unwrap().value)
                        / step;
                    let denom = fd.abs().max(1e-3);
                    assert!(
                        ((grad[a][b] - fd) / denom).abs() < 1e-5,
                        "entry ({a},{b}): {} vs {fd}",
                        grad[a][b]
                    );
                }
            }
        }
    }

    #[test]
    fn margin_zero_on_equal_patterns_and_negative_on_known_violation() {
        let w = StepGraphon::two_block(0.01).unwrap();
        let p4 = path(4).unwrap();
        assert_eq!(domination_margin(&p4, &p4, &w).unwrap(), 0.0);
        let margin = domination_margin(&p4, &star(2).unwrap(), &w).unwrap();
        assert!((margin - (-0.04146)).abs() < 1e-4, "margin = {margin}");
    }

    #[test]
    fn hub_hexagon_dominates_hexagon_on_random_graphons() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = c6_plus();
        let hp = even_cycle(6).unwrap();
        for _ in 0..200 {
            let w = StepGraphon::random(3, false, &mut rng).unwrap();
            let margin = domination_margin(&h, &hp, &w).unwrap();
            assert!(margin >= -1e-12, "margin = {margin}");
        }
    }

    #[test]
    fn fold_square_root_bound_on_random_subgraphs() {
        use crate::graph::EdgeSubset;
        use crate::involution::{find_cut_involutions, fold, Side};
        use std::sync::Arc;
        let g = Arc::new(c6_plus());
        let phi = find_cut_involutions(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let w = StepGraphon::random(2, false, &mut rng).unwrap();
            let bits: u64 = rng.gen::<u64>() & g.full_edge_mask();
            let j = EdgeSubset::new(g.clone(), bits).unwrap();
            let t = density_step(&j.to_abstract().0, &w).unwrap().value;
            for ci in &phi {
                let plus = fold(&j, &ci.half_fold(Side::Left)).unwrap();
                let minus = fold(&j, &ci.half_fold(Side::Right)).unwrap();
                let tp = density_step(&plus.to_abstract().0, &w).unwrap().value;
                let tm = density_step(&minus.to_abstract().0, &w).unwrap().value;
                assert!(t <= (tp * tm).sqrt() + 1e-12);
            }
        }
    }

    #[test]
    fn adding_an_edge_never_increases_unsigned_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let w = StepGraphon::random(3, false, &mut rng).unwrap();
            let smaller = path(4).unwrap();
            let larger = even_cycle(4).unwrap();
            let a = density_step(&smaller, &w).unwrap().value;
            let b = density_step(&larger, &w).unwrap().value;
            assert!(b <= a + 1e-12);
        }
    }

    #[test]
    fn graphon_validation_and_round_trip() {
        assert!(StepGraphon::new(vec![vec![0.0, 0.5], vec![0.6, 0.0]], vec![0.5, 0.5], false)
            .is_err());
        assert!(StepGraphon::new(vec![vec![1.2]], vec![1.0], false).is_err());
        assert!(StepGraphon::new(vec![vec![-0.5]], vec![1.0], false).is_err());
        assert!(StepGraphon::new(vec![vec![-0.5]], vec![1.0], true).is_ok());
        assert!(StepGraphon::new(vec![vec![0.5]], vec![0.9], false).is_err());
        let w = StepGraphon::two_block(0.25).unwrap();
        let back = StepGraphon::from_json(&w.to_json()).unwrap();
        assert_eq!(w, back);
        let parsed =
            StepGraphon::from_json(r#"{"k":1,"values":[[0.5]],"measures":[1.0]}"#).unwrap();
        assert!(!parsed.signed());
    }

    #[test]
    fn rationalization_recovers_simple_fractions() {
        assert_eq!(best_rational(0.5, 1000), rat(1, 2));
        assert_eq!(best_rational(1.0 / 3.0, 1000), rat(1, 3));
        assert_eq!(best_rational(-0.25, 1000), rat(-1, 4));
        let w = StepGraphon::two_block(1.0 / 64.0).unwrap();
        let exact = rationalize(&w, 1_000_000);
        assert_eq!(exact.measures[0], rat(1, 64));
        let total: BigRational = exact.measures.iter().cloned().sum();
        assert!(total.is_one());
    }

    #[test]
    fn exact_confirmation_of_the_two_block_violation() {
        // Two-block graphon at measure 1/64: the path on four vertices
        // fails to dominate the two-edge star, confirmed in rationals.
        let w = StepGraphon::two_block(1.0 / 64.0).unwrap();
        let exact = rationalize(&w, 1 << 20);
        let th = density_step_exact(&path(4).unwrap(), &exact).unwrap();
        let tp = density_step_exact(&star(2).unwrap(), &exact).unwrap();
        assert!(exact_violation(&th, 3, &tp, 2));
        // And the reverse direction is not a violation.
        assert!(!exact_violation(&tp, 2, &th, 3));
    }

    #[test]
    fn density_value_serialization() {
        let d = DensityValue {
            value: 0.5,
            exact: Some(rat(1, 2)),
        };
        assert_eq!(
            serde_json::to_string(&d).unwrap(),
            r#"{"value":0.5,"exact":"1/2"}"#
        );
        let d = DensityValue {
            value: 0.5,
            exact: None,
        };
        assert_eq!(
            serde_json::to_string(&d).unwrap(),
            r#"{"value":0.5,"exact":null}"#
        );
    }
}
