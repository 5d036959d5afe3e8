//! Command-line surface.
//!
//! Every command prints a machine-readable JSON payload on stdout and a
//! one-line human summary on stderr (`--json` drops the summary). Exit
//! codes: 0 success/pass, 1 structural failure (screen FAIL, verify FAIL,
//! unreachable percolation goal, certificate not found), 2 usage or
//! cap/budget errors, 10 falsifier violation. Identical inputs and seeds
//! produce byte-identical output.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::certify::{
    certify, edge_action, orbit_partition, verify_certificate, CertInvolution, CertMode,
    Certificate, CertifyOptions, CertifyOutcome, VerifyOptions,
};
use crate::constructions::{
    bipartite_kneser, c6_plus, complete_bipartite, even_cycle, h_a_plus, hypercube,
    hypercube_ball, k2t_replacement, octahedron, one_subdivision, path, perfect_tree,
    reflection_graph, star, star_replacement_graph, tensor_kmm, BipartitionSide, CoxeterSpec,
};
use crate::error::DomcertError;
use crate::falsify::{explore_ball_domination, falsify, FalsifyTask, Verdict};
use crate::graph::{EdgeSubset, Graph};
use crate::graphon::{density_graph, density_step, hom_count, ratio_string, StepGraphon};
use crate::involution::find_cut_involutions;
use crate::percolation::{effective_max_states, find_percolating_sequence, Signature};
use crate::screening::screen;
use crate::Result;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 10;

/// Outcome of one invocation; `stdout` is the JSON payload, `stderr` the
/// human summary or diagnostic.
#[derive(Clone, Debug)]
pub struct CommandResult {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser)]
#[command(
    name = "domcert",
    version,
    about = "Certify, screen, and stress-test domination between bipartite graphs"
)]
struct Cli {
    /// Machine output only: suppress the stderr summary line.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a library graph family and print (or write) its JSON.
    Construct(ConstructArgs),
    /// Run the necessary-condition battery on a graph.
    Screen { graph: PathBuf },
    /// List the cut involutions of a graph.
    Involutions {
        graph: PathBuf,
        /// Also print the edge orbits of the full involution set.
        #[arg(long)]
        orbits: bool,
    },
    /// Search for a fold sequence from a start edge set to a goal set.
    Percolate(PercolateArgs),
    /// Search for a domination certificate.
    Certify(CertifyArgs),
    /// Check a certificate against a graph.
    Verify(VerifyArgs),
    /// Hunt for an exactly confirmed domination violation.
    Falsify(FalsifyArgs),
    /// Probe hypercube-ball domination for a violation.
    Explore(ExploreArgs),
    /// Homomorphism density of a pattern in a step kernel or a graph.
    Density(DensityArgs),
    /// Exact homomorphism count between two graphs.
    Hom {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        target: PathBuf,
    },
}

#[derive(Args)]
struct ConstructArgs {
    /// Family name (see the library's construction module).
    family: String,
    /// Positional numeric parameters of the family.
    params: Vec<usize>,
    /// Write the graph JSON here as well as to stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Input graph for the graph-transforming families.
    #[arg(long)]
    base: Option<PathBuf>,
    /// Coset recipe JSON for the reflection-group families.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Bipartition class for h_a_plus: "a" (smaller) or "b".
    #[arg(long, default_value = "a")]
    side: String,
    /// Write layer hints next to the output file (star_replacement_graph
    /// only; requires --output).
    #[arg(long)]
    with_hints: bool,
}

#[derive(Args)]
struct PercolateArgs {
    graph: PathBuf,
    /// Start edge indices, comma-separated. Omitted: try each single edge.
    #[arg(long, value_delimiter = ',')]
    start: Option<Vec<usize>>,
    /// Goal edge indices, comma-separated. Omitted: all edges.
    #[arg(long, value_delimiter = ',')]
    goal: Option<Vec<usize>>,
    /// Breadth-first state cap (DOMCERT_MAX_STATES overrides the default).
    #[arg(long)]
    max_states: Option<usize>,
}

#[derive(Args)]
struct CertifyArgs {
    graph: PathBuf,
    /// Write the certificate JSON here as well as to stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Search for a strong (signed-kernel) certificate.
    #[arg(long)]
    strong: bool,
    /// Keep searching even if screening rejects the graph.
    #[arg(long)]
    allow_screen_fail: bool,
    /// Cap on the number of layers tried.
    #[arg(long)]
    max_layers: Option<usize>,
    /// Breadth-first state cap (DOMCERT_MAX_STATES overrides the default).
    #[arg(long)]
    max_states: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    graph: PathBuf,
    certificate: PathBuf,
    /// Accept ASSERTED witnesses (marks the report unsound).
    #[arg(long)]
    allow_asserted: bool,
    /// Replay-law samples when the graph is too large for exhaustion.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct FalsifyArgs {
    /// The graph claimed to dominate.
    #[arg(long = "h")]
    h: PathBuf,
    /// The challenger (typically a subgraph).
    #[arg(long)]
    sub: PathBuf,
    #[arg(long, default_value_t = 4)]
    blocks: usize,
    /// Search signed kernels in [-1, 1].
    #[arg(long)]
    signed: bool,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 60)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExploreArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    l: usize,
    #[arg(long, default_value_t = 4)]
    blocks: usize,
    #[arg(long)]
    signed: bool,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 60)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    pattern: PathBuf,
    /// Step-kernel JSON to evaluate against.
    #[arg(long, conflicts_with = "target")]
    graphon: Option<PathBuf>,
    /// Finite graph to evaluate against (normalised hom count).
    #[arg(long)]
    target: Option<PathBuf>,
}

struct CmdOut {
    json: String,
    summary: String,
    code: i32,
}

/// Parses and runs one invocation. Never panics on user input; all
/// failures are folded into the exit code and stderr.
pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let rendered = err.render().to_string();
            use clap::error::ErrorKind;
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CommandResult {
                    exit_code: EXIT_OK,
                    stdout: rendered,
                    stderr: String::new(),
                },
                _ => CommandResult {
                    exit_code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: rendered,
                },
            };
        }
    };
    match dispatch(&cli.cmd) {
        Ok(out) => CommandResult {
            exit_code: out.code,
            stdout: format!("{}\n", out.json),
            stderr: if cli.json || out.summary.is_empty() {
                String::new()
            } else {
                format!("{}\n", out.summary)
            },
        },
        Err(err) => CommandResult {
            exit_code: exit_code_for(&err),
            stdout: String::new(),
            stderr: format!("error: {err}\n"),
        },
    }
}

/// Failed verification inputs are structural failures; everything else a
/// caller can cause is a usage or resource error.
fn exit_code_for(err: &DomcertError) -> i32 {
    match err {
        DomcertError::HashMismatch { .. }
        | DomcertError::BadCertificate(_)
        | DomcertError::BadSignatureIndex { .. } => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

fn dispatch(cmd: &Cmd) -> Result<CmdOut> {
    match cmd {
        Cmd::Construct(args) => cmd_construct(args),
        Cmd::Screen { graph } => cmd_screen(graph),
        Cmd::Involutions { graph, orbits } => cmd_involutions(graph, *orbits),
        Cmd::Percolate(args) => cmd_percolate(args),
        Cmd::Certify(args) => cmd_certify(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Falsify(args) => cmd_falsify(args),
        Cmd::Explore(args) => cmd_explore(args),
        Cmd::Density(args) => cmd_density(args),
        Cmd::Hom { pattern, target } => cmd_hom(pattern, target),
    }
}

fn read_graph(path: &Path) -> Result<Graph> {
    Graph::from_json(&fs::read_to_string(path)?)
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, format!("{content}\n"))?;
    Ok(())
}

fn bad(msg: impl Into<String>) -> DomcertError {
    DomcertError::BadParams(msg.into())
}

fn cmd_construct(args: &ConstructArgs) -> Result<CmdOut> {
    let family = args.family.replace('-', "_").to_lowercase();
    let nums = |want: usize| -> Result<&[usize]> {
        if args.params.len() == want {
            Ok(&args.params)
        } else {
            Err(bad(format!(
                "family {family} takes {want} numeric parameter(s), got {}",
                args.params.len()
            )))
        }
    };
    let base = || -> Result<Graph> {
        let p = args.base.as_ref().ok_or_else(|| bad(format!("family {family} needs --base")))?;
        read_graph(p)
    };
    let coxeter = || -> Result<CoxeterSpec> {
        let p = args.spec.as_ref().ok_or_else(|| bad(format!("family {family} needs --spec")))?;
        Ok(serde_json::from_str(&fs::read_to_string(p)?)?)
    };
    let mut hints = None;
    let graph = match family.as_str() {
        "path" => path(nums(1)?[0])?,
        "even_cycle" => even_cycle(nums(1)?[0])?,
        "star" => star(nums(1)?[0])?,
        "complete_bipartite" => {
            let p = nums(2)?;
            complete_bipartite(p[0], p[1])?
        }
        "hypercube" => hypercube(nums(1)?[0])?,
        "hypercube_ball" => {
            let p = nums(2)?;
            hypercube_ball(p[0], p[1])?
        }
        "c6_plus" => {
            nums(0)?;
            c6_plus()
        }
        "octahedron" => {
            nums(0)?;
            octahedron()
        }
        "perfect_tree" => {
            let p = nums(2)?;
            perfect_tree(p[0], p[1])?
        }
        "bipartite_kneser" => {
            let p = nums(2)?;
            bipartite_kneser(p[0], p[1])?
        }
        "one_subdivision" => {
            nums(0)?;
            one_subdivision(&base()?)?
        }
        "k2t_replacement" => k2t_replacement(&base()?, nums(1)?[0])?,
        "tensor_kmm" => tensor_kmm(&base()?, nums(1)?[0])?,
        "h_a_plus" => {
            nums(0)?;
            let side = match args.side.to_lowercase().as_str() {
                "a" => BipartitionSide::A,
                "b" => BipartitionSide::B,
                other => return Err(bad(format!("--side must be a or b, got {other}"))),
            };
            h_a_plus(&base()?, side)?
        }
        "reflection_graph" => reflection_graph(&coxeter()?)?,
        "star_replacement_graph" => {
            let (g, h) = star_replacement_graph(&coxeter()?)?;
            hints = Some(h);
            g
        }
        other => {
            return Err(bad(format!(
                "unknown family {other}; expected one of path, even_cycle, star, \
                 complete_bipartite, hypercube, hypercube_ball, c6_plus, octahedron, \
                 perfect_tree, bipartite_kneser, one_subdivision, k2t_replacement, \
                 tensor_kmm, h_a_plus, reflection_graph, star_replacement_graph"
            )))
        }
    };
    if args.with_hints {
        let hints = hints
            .as_ref()
            .ok_or_else(|| bad("--with-hints is only available for star_replacement_graph"))?;
        let out = args
            .output
            .as_ref()
            .ok_or_else(|| bad("--with-hints needs --output to place the hints file"))?;
        write_file(&out.with_extension("hints.json"), &serde_json::to_string_pretty(hints)?)?;
    }
    let json = graph.to_json();
    if let Some(out) = &args.output {
        write_file(out, &json)?;
    }
    let summary = format!(
        "constructed {family}: {} vertices, {} edges{}",
        graph.n(),
        graph.edge_count(),
        args.output
            .as_ref()
            .map(|p| format!(", wrote {}", p.display()))
            .unwrap_or_default()
    );
    Ok(CmdOut { json, summary, code: EXIT_OK })
}

fn cmd_screen(graph: &Path) -> Result<CmdOut> {
    let g = read_graph(graph)?;
    let report = screen(&g);
    let summary = if report.pass {
        "screen PASS".to_string()
    } else {
        format!("screen FAIL: {}", report.reasons.join(", "))
    };
    Ok(CmdOut {
        json: serde_json::to_string_pretty(&report)?,
        summary,
        code: if report.pass { EXIT_OK } else { EXIT_FAIL },
    })
}

fn cmd_involutions(graph: &Path, with_orbits: bool) -> Result<CmdOut> {
    let g = Arc::new(read_graph(graph)?);
    let invs = find_cut_involutions(&g)?;
    #[derive(Serialize)]
    struct Out {
        count: usize,
        stable_count: usize,
        involutions: Vec<CertInvolution>,
        #[serde(skip_serializing_if = "Option::is_none")]
        orbits: Option<Vec<Vec<usize>>>,
    }
    let orbits = with_orbits.then(|| {
        let actions: Vec<Vec<usize>> = invs.iter().map(|ci| edge_action(&g, ci.perm())).collect();
        let refs: Vec<&Vec<usize>> = actions.iter().collect();
        orbit_partition(g.edge_count(), &refs)
            .into_iter()
            .map(|mask| (0..g.edge_count()).filter(|e| mask >> e & 1 == 1).collect())
            .collect()
    });
    let out = Out {
        count: invs.len(),
        stable_count: invs.iter().filter(|ci| ci.stable()).count(),
        involutions: invs.iter().map(CertInvolution::from).collect(),
        orbits,
    };
    Ok(CmdOut {
        summary: format!("{} cut involution(s), {} stable", out.count, out.stable_count),
        json: serde_json::to_string_pretty(&out)?,
        code: EXIT_OK,
    })
}

fn cmd_percolate(args: &PercolateArgs) -> Result<CmdOut> {
    let g = Arc::new(read_graph(&args.graph)?);
    let max_states = effective_max_states(args.max_states);
    #[derive(Serialize)]
    struct Out {
        reachable: bool,
        start: Option<Vec<usize>>,
        goal: Vec<usize>,
        signature: Option<Signature>,
        steps: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    }
    let goal = match &args.goal {
        Some(ix) => EdgeSubset::from_indices(g.clone(), ix)?,
        None => EdgeSubset::full(g.clone()),
    };
    let invs = find_cut_involutions(&g)?;
    if invs.is_empty() {
        let out = Out {
            reachable: false,
            start: args.start.clone(),
            goal: goal.indices(),
            signature: None,
            steps: None,
            note: Some("graph has no cut involutions".into()),
        };
        return Ok(CmdOut {
            json: serde_json::to_string_pretty(&out)?,
            summary: "goal unreachable: no cut involutions".into(),
            code: EXIT_FAIL,
        });
    }
    let starts: Vec<Vec<usize>> = match &args.start {
        Some(s) => vec![s.clone()],
        None => (0..g.edge_count()).map(|e| vec![e]).collect(),
    };
    for start_ix in starts {
        let start = EdgeSubset::from_indices(g.clone(), &start_ix)?;
        if let Some(sig) = find_percolating_sequence(&invs, &start, &goal, max_states)? {
            let out = Out {
                reachable: true,
                start: Some(start_ix.clone()),
                goal: goal.indices(),
                steps: Some(sig.len()),
                signature: Some(sig),
                note: None,
            };
            return Ok(CmdOut {
                summary: format!(
                    "goal reached from {{{}}} in {} fold(s)",
                    start_ix.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","),
                    out.steps.unwrap()
                ),
                json: serde_json::to_string_pretty(&out)?,
                code: EXIT_OK,
            });
        }
    }
    let out = Out {
        reachable: false,
        start: args.start.clone(),
        goal: goal.indices(),
        signature: None,
        steps: None,
        note: None,
    };
    Ok(CmdOut {
        json: serde_json::to_string_pretty(&out)?,
        summary: "goal unreachable within the searched starts".into(),
        code: EXIT_FAIL,
    })
}

fn cmd_certify(args: &CertifyArgs) -> Result<CmdOut> {
    let g = Arc::new(read_graph(&args.graph)?);
    let mut opts = CertifyOptions {
        mode: if args.strong { CertMode::Strong } else { CertMode::Dominating },
        allow_screen_fail: args.allow_screen_fail,
        ..CertifyOptions::default()
    };
    if let Some(ml) = args.max_layers {
        opts.budget.max_layers = ml;
    }
    opts.budget.max_states = effective_max_states(args.max_states);
    match certify(&g, &opts)? {
        CertifyOutcome::Found(cert) => {
            let json = cert.to_json();
            if let Some(out) = &args.output {
                write_file(out, &json)?;
            }
            let mode = match cert.mode {
                CertMode::Dominating => "DOMINATING",
                CertMode::Strong => "STRONG",
            };
            Ok(CmdOut {
                summary: format!(
                    "certified: {} layer(s), {} relocation(s), mode {mode}",
                    cert.layers.len(),
                    cert.relocations.len(),
                ),
                json,
                code: EXIT_OK,
            })
        }
        CertifyOutcome::NotFound { reason } => {
            #[derive(Serialize)]
            struct Out<'a> {
                found: bool,
                reason: &'a str,
            }
            Ok(CmdOut {
                json: serde_json::to_string_pretty(&Out { found: false, reason: &reason })?,
                summary: format!("not certified: {reason}"),
                code: EXIT_FAIL,
            })
        }
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<CmdOut> {
    let g = Arc::new(read_graph(&args.graph)?);
    let cert = Certificate::from_json(&fs::read_to_string(&args.certificate)?)?;
    let opts = VerifyOptions {
        allow_asserted: args.allow_asserted,
        multiperc_trials: args.trials,
        rng_seed: args.seed,
    };
    let report = verify_certificate(&g, &cert, &opts)?;
    let summary = if report.pass {
        format!("verify PASS ({})", if report.sound { "sound" } else { "UNSOUND: asserted witnesses" })
    } else {
        let failing: Vec<&str> = report
            .clauses
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        format!("verify FAIL: {}", failing.join(", "))
    };
    Ok(CmdOut {
        json: serde_json::to_string_pretty(&report)?,
        summary,
        code: if report.pass { EXIT_OK } else { EXIT_FAIL },
    })
}

fn falsify_task(h: Graph, sub: Graph, blocks: usize, signed: bool, restarts: usize, iters: usize, seed: u64) -> FalsifyTask {
    FalsifyTask {
        h,
        hprime: sub,
        blocks,
        signed,
        restarts,
        iters,
        seed,
    }
}

fn cmd_falsify(args: &FalsifyArgs) -> Result<CmdOut> {
    let task = falsify_task(
        read_graph(&args.h)?,
        read_graph(&args.sub)?,
        args.blocks,
        args.signed,
        args.restarts,
        args.iters,
        args.seed,
    );
    match falsify(&task)? {
        Some(cx) => Ok(CmdOut {
            summary: format!("violation confirmed: margin {:.6}", cx.margin),
            json: serde_json::to_string_pretty(&cx)?,
            code: EXIT_VIOLATION,
        }),
        None => {
            #[derive(Serialize)]
            struct Out {
                verdict: Verdict,
                restarts: usize,
                iters: usize,
                seed: u64,
            }
            let out = Out {
                verdict: Verdict::NoViolationFound,
                restarts: task.restarts,
                iters: task.iters,
                seed: task.seed,
            };
            Ok(CmdOut {
                json: serde_json::to_string_pretty(&out)?,
                summary: "no violation found within budget".into(),
                code: EXIT_OK,
            })
        }
    }
}

fn cmd_explore(args: &ExploreArgs) -> Result<CmdOut> {
    let template = falsify_task(
        path(2)?,
        path(2)?,
        args.blocks,
        args.signed,
        args.restarts,
        args.iters,
        args.seed,
    );
    let report = explore_ball_domination(args.n, args.k, args.l, &template)?;
    let (code, verdict) = match report.verdict {
        Verdict::Violation => (EXIT_VIOLATION, "VIOLATION"),
        Verdict::NoViolationFound => (EXIT_OK, "NO_VIOLATION_FOUND"),
    };
    Ok(CmdOut {
        summary: format!(
            "ball domination (n={}, k={}, l={}): {verdict}",
            report.n, report.k, report.l
        ),
        json: serde_json::to_string_pretty(&report)?,
        code,
    })
}

fn cmd_density(args: &DensityArgs) -> Result<CmdOut> {
    let pattern = read_graph(&args.pattern)?;
    let dv = match (&args.graphon, &args.target) {
        (Some(w), None) => density_step(&pattern, &StepGraphon::from_json(&fs::read_to_string(w)?)?)?,
        (None, Some(t)) => density_graph(&pattern, &read_graph(t)?)?,
        _ => return Err(bad("density needs exactly one of --graphon or --target")),
    };
    #[derive(Serialize)]
    struct Out {
        value: f64,
        exact: Option<String>,
    }
    let out = Out {
        value: dv.value,
        exact: dv.exact.as_ref().map(ratio_string),
    };
    Ok(CmdOut {
        summary: match &out.exact {
            Some(x) => format!("density {} = {}", out.value, x),
            None => format!("density {}", out.value),
        },
        json: serde_json::to_string_pretty(&out)?,
        code: EXIT_OK,
    })
}

fn cmd_hom(pattern: &Path, target: &Path) -> Result<CmdOut> {
    let count = hom_count(&read_graph(pattern)?, &read_graph(target)?)?;
    #[derive(Serialize)]
    struct Out {
        count: String,
    }
    let out = Out { count: count.to_string() };
    Ok(CmdOut {
        summary: format!("hom count {}", out.count),
        json: serde_json::to_string_pretty(&out)?,
        code: EXIT_OK,
    })
}
