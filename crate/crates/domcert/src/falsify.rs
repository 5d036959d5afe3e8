//! Numerical counterexample search for domination inequalities.
//!
//! `falsify` hunts for a step graphon on which `hprime` beats `h` in the
//! edge-normalised density order. Floating-point optimisation only proposes
//! candidates: anything returned has been snapped to nearby rationals and
//! confirmed by an exact cross-multiplied comparison, so a reported
//! violation is a certificate, not a numeric artifact. Absence of a
//! violation proves nothing.

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::DomcertError;
use crate::graph::Graph;
use crate::graphon::{
    density_gradient, density_step, density_step_exact, domination_margin, exact_violation,
    ratio_string, rationalize, StepGraphon,
};
use crate::Result;

/// Denominator bound used when snapping a candidate to rationals.
const CONFIRM_MAX_DEN: u64 = 1_000_000;
/// Float margins above this are treated as inconclusive noise.
const VIOLATION_TRIGGER: f64 = -1e-6;

/// One falsification job.
#[derive(Clone, Debug)]
pub struct FalsifyTask {
    pub h: Graph,
    pub hprime: Graph,
    /// Block count for random starts (the fixed seed families use their own
    /// shapes).
    pub blocks: usize,
    /// Optimise over kernels in `[-1, 1]` instead of `[0, 1]`.
    pub signed: bool,
    /// Random starts appended after the fixed seed families.
    pub restarts: usize,
    /// Gradient-ascent steps per start.
    pub iters: usize,
    pub seed: u64,
}

impl FalsifyTask {
    pub fn new(h: Graph, hprime: Graph) -> Self {
        FalsifyTask {
            h,
            hprime,
            blocks: 4,
            signed: false,
            restarts: 16,
            iters: 60,
            seed: 0,
        }
    }
}

/// Where in the deterministic schedule a counterexample was found:
/// `restart` indexes the start list, `iteration` the accepted ascent step
/// (0 means the start itself already violated).
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub restart: usize,
    pub iteration: usize,
}

fn ser_graphon<S: Serializer>(w: &StepGraphon, s: S) -> std::result::Result<S::Ok, S::Error> {
    let value: serde_json::Value =
        serde_json::from_str(&w.to_json()).expect("graphon JSON is valid");
    value.serialize(s)
}

/// An exactly confirmed violation `t_h(W)^{1/e(h)} < t_{h'}(W)^{1/e(h')}`,
/// stated root-free as `|t_h|^{e(h')} < |t_{h'}|^{e(h)}` over a rational
/// graphon.
#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    /// The rationalized graphon, as floats.
    #[serde(serialize_with = "ser_graphon")]
    pub graphon: StepGraphon,
    /// Exact kernel values, `p/q` per block pair.
    pub graphon_exact_values: Vec<Vec<String>>,
    /// Exact block measures, `p/q`.
    pub graphon_exact_measures: Vec<String>,
    /// Float margin `|t_h|^{1/e(h)} - |t_h'|^{1/e(h')}` at the rational
    /// point (negative).
    pub margin: f64,
    /// Exact `t_h(W)`.
    pub lhs_exact: String,
    /// Exact `t_{h'}(W)`.
    pub rhs_exact: String,
    pub provenance: Provenance,
}

/// Machine verdict of a budgeted search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    NoViolationFound,
    Violation,
}

/// Search statistics and outcome for the ball-domination probe.
#[derive(Clone, Debug, Serialize)]
pub struct BallReport {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    pub starts: usize,
    pub iterations: usize,
}

fn margin_of(task: &FalsifyTask, w: &StepGraphon) -> Result<f64> {
    domination_margin(&task.h, &task.hprime, w)
}

/// Gradient of the negated margin (the ascent objective) with respect to
/// the kernel entries, via the chain rule through `|t|^{1/e}`.
fn objective_gradient(task: &FalsifyTask, w: &StepGraphon) -> Result<Vec<Vec<f64>>> {
    let k = w.k();
    let mut grad = vec![vec![0.0; k]; k];
    for (pattern, sign) in [(&task.hprime, 1.0), (&task.h, -1.0)] {
        let e = pattern.edge_count();
        let t = density_step(pattern, w)?.value;
        if t == 0.0 {
            continue;
        }
        let scale = sign * t.signum() * t.abs().powf(1.0 / e as f64 - 1.0) / e as f64;
        let dt = density_gradient(pattern, w)?;
        for a in 0..k {
            for b in 0..k {
                grad[a][b] += scale * dt[a][b];
            }
        }
    }
    Ok(grad)
}

fn project_step(
    w: &StepGraphon,
    grad: &[Vec<f64>],
    step: f64,
    signed: bool,
) -> Result<StepGraphon> {
    let k = w.k();
    let lo = if signed { -1.0 } else { 0.0 };
    let mut values = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            values[a][b] = (w.values()[a][b] + step * grad[a][b]).clamp(lo, 1.0);
        }
    }
    StepGraphon::new(values, w.measures().to_vec(), signed)
}

/// Snap to rationals and decide the cross-multiplied comparison exactly.
fn confirm(task: &FalsifyTask, w: &StepGraphon, prov: Provenance) -> Result<Option<Counterexample>> {
    let exact = rationalize(w, CONFIRM_MAX_DEN);
    let th: BigRational = density_step_exact(&task.h, &exact)?;
    let tp: BigRational = density_step_exact(&task.hprime, &exact)?;
    if !exact_violation(&th, task.h.edge_count(), &tp, task.hprime.edge_count()) {
        return Ok(None);
    }
    let snapped = exact.to_step()?;
    let margin = margin_of(task, &snapped)?;
    Ok(Some(Counterexample {
        graphon_exact_values: exact
            .values
            .iter()
            .map(|row| row.iter().map(ratio_string).collect())
            .collect(),
        graphon_exact_measures: exact.measures.iter().map(ratio_string).collect(),
        graphon: snapped,
        margin,
        lhs_exact: ratio_string(&th),
        rhs_exact: ratio_string(&tp),
        provenance: prov,
    }))
}

/// The deterministic start list: the two-block split family at
/// `2^-1 ..= 2^-12`, the uniform identity families up to the block budget,
/// then seeded random graphons.
fn start_schedule(task: &FalsifyTask) -> Result<Vec<StepGraphon>> {
    let mut starts = Vec::new();
    for i in 1..=12 {
        starts.push(StepGraphon::two_block(0.5f64.powi(i))?);
    }
    for n in 1..=task.blocks {
        starts.push(StepGraphon::identity_blocks(n)?);
    }
    for r in 0..task.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(task.seed);
        rng.set_stream(r as u64 + 1);
        starts.push(StepGraphon::random(task.blocks, task.signed, &mut rng)?);
    }
    Ok(starts)
}

/// Projected gradient ascent from one start. Returns the accepted-step
/// objective trace (monotone by construction) and the final iterate.
fn ascend(task: &FalsifyTask, start: StepGraphon) -> Result<(StepGraphon, Vec<f64>)> {
    let mut w = start;
    let mut objective = -margin_of(task, &w)?;
    let mut trace = vec![objective];
    let mut step = 0.25;
    for _ in 0..task.iters {
        if -objective < VIOLATION_TRIGGER {
            break;
        }
        let grad = objective_gradient(task, &w)?;
        let mut accepted = false;
        while step >= 1e-9 {
            let cand = project_step(&w, &grad, step, task.signed)?;
            let cand_obj = -margin_of(task, &cand)?;
            if cand_obj > objective + 1e-15 {
                w = cand;
                objective = cand_obj;
                trace.push(objective);
                step = (step * 1.5).min(1.0);
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            break;
        }
    }
    Ok((w, trace))
}

/// Runs the schedule and returns the first exactly confirmed violation, or
/// `None` once the budget is spent. Deterministic in the task seed.
pub fn falsify(task: &FalsifyTask) -> Result<Option<Counterexample>> {
    if task.h.edge_count() == 0 || task.hprime.edge_count() == 0 {
        return Err(DomcertError::BadParams(
            "both graphs need at least one edge".into(),
        ));
    }
    if task.blocks == 0 {
        return Err(DomcertError::BadParams("block count must be positive".into()));
    }
    for (restart, start) in start_schedule(task)?.into_iter().enumerate() {
        let initial = margin_of(task, &start)?;
        if initial < VIOLATION_TRIGGER {
            let prov = Provenance {
                seed: task.seed,
                restart,
                iteration: 0,
            };
            if let Some(cx) = confirm(task, &start, prov)? {
                return Ok(Some(cx));
            }
        }
        let (w, trace) = ascend(task, start)?;
        if -trace.last().expect("trace never empty") < VIOLATION_TRIGGER {
            let prov = Provenance {
                seed: task.seed,
                restart,
                iteration: trace.len() - 1,
            };
            if let Some(cx) = confirm(task, &w, prov)? {
                return Ok(Some(cx));
            }
        }
    }
    Ok(None)
}

/// Probes whether the radius-`l` ball of the `n`-cube dominates the
/// radius-`k` ball, reporting a machine verdict with search statistics.
/// `k = l` is trivially violation-free and skips the search.
pub fn explore_ball_domination(n: usize, k: usize, l: usize, task: &FalsifyTask) -> Result<BallReport> {
    if !(1 <= k && k <= l && l <= n) {
        return Err(DomcertError::BadParams(format!(
            "need 1 <= k <= l <= n, got n={n} k={k} l={l}"
        )));
    }
    let h = crate::constructions::hypercube_ball(n, l)?;
    let hprime = crate::constructions::hypercube_ball(n, k)?;
    let probe = FalsifyTask {
        h,
        hprime,
        ..task.clone()
    };
    if k == l {
        return Ok(BallReport {
            n,
            k,
            l,
            verdict: Verdict::NoViolationFound,
            counterexample: None,
            starts: 0,
            iterations: 0,
        });
    }
    let starts = start_schedule(&probe)?.len();
    let counterexample = falsify(&probe)?;
    Ok(BallReport {
        n,
        k,
        l,
        verdict: match counterexample {
            Some(_) => Verdict::Violation,
            None => Verdict::NoViolationFound,
        },
        counterexample,
        starts,
        iterations: task.iters,
    })
}
