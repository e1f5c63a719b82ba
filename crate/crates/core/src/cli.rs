//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::certify::{self, CertifyOptions, StageError, SweepOptions};
use crate::circulation::Method;
use crate::dfs_tree::TreeDump;
use crate::graph::{self, GeneratorOptions, Graph};
use crate::lp;
use crate::rational::Q;

#[derive(Debug, Parser)]
#[command(name = "sqtsp", version, about = "Graph-TSP LP bounds and circulation certificates for subquartic graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random 2-vertex-connected subquartic graph as an edge list.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        sparsity: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the cut relaxation exactly.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the greedy DFS tree on the support with vertex classes.
    Tree {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build one circulation on the support's tree.
    Circulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_method, default_value = "best")]
        method: Method,
        #[command(flatten)]
        params: Params,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full pipeline and print a certificate.
    Certify {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        params: Params,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify many generated instances.
    Sweep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        sparsity: f64,
        #[command(flatten)]
        params: Params,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Params {
    /// Rounding-map parameter as a rational, e.g. 0 or 1/10.
    #[arg(long, value_parser = parse_c2, default_value = "0")]
    c2: Q,
    /// Root contribution added to the tour bound.
    #[arg(long = "root-term", value_parser = ["0", "2"], default_value = "2")]
    root_term: String,
}

impl Params {
    fn options(&self) -> CertifyOptions {
        CertifyOptions { root_term: self.root_term.parse().expect("validated by clap"), c2: self.c2.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn parse_c2(s: &str) -> Result<Q, String> {
    let q: Q = s.parse().map_err(|e| format!("`{s}`: {e}"))?;
    if q.is_negative() {
        return Err(format!("`{s}` is negative"));
    }
    Ok(q)
}

enum Failure {
    /// Bad arguments, unreadable or malformed input.
    Usage(anyhow::Error),
    /// The pipeline ran and some check failed.
    Check(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn read_graph(path: &Path) -> anyhow::Result<Graph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))?;
    Graph::parse_edge_list(&text).with_context(|| format!("malformed edge list `{}`", path.display()))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, body: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, body).with_context(|| format!("cannot write `{}`", p.display())),
        None => out.write_all(body.as_bytes()).context("cannot write output"),
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn stage_failure(e: StageError) -> Failure {
    match e {
        StageError::Lp(e) => Failure::Usage(anyhow!(e)),
        other => Failure::Check(other.to_string()),
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Generate { n, seed, sparsity, out: path } => {
            let g = graph::generate_random_subquartic_with(n, seed, &GeneratorOptions { sparsity })
                .map_err(|e| anyhow!("--n {n} --seed {seed}: {e}"))?;
            emit(out, path.as_deref(), &g.to_edge_list())?;
        }
        Command::Solve { input, out: path } => {
            let g = read_graph(&input)?;
            let sol = lp::solve_lp(&g).map_err(|e| anyhow!("`{}`: {e}", input.display()))?;
            emit(out, path.as_deref(), &json(&sol.to_json(&g)))?;
        }
        Command::Tree { input, out: path } => {
            let g = read_graph(&input)?;
            let p = certify::prepare(&g).map_err(stage_failure)?;
            emit(out, path.as_deref(), &json(&TreeDump::new(&p.tree, &p.classes)))?;
        }
        Command::Circulate { input, method, params, out: path } => {
            let g = read_graph(&input)?;
            let p = certify::prepare(&g).map_err(stage_failure)?;
            let c = certify::circulation_for(&p, method, &params.options()).map_err(stage_failure)?;
            emit(out, path.as_deref(), &json(&c))?;
            if !c.is_feasible() {
                return Err(Failure::Check(format!(
                    "{method} valuation leaves vertices {:?} unsatisfied",
                    c.unsatisfied
                )));
            }
        }
        Command::Certify { input, params, out: path } => {
            let g = read_graph(&input)?;
            let cert = certify::certify(&g, &params.options()).map_err(|e| anyhow!("`{}`: {e}", input.display()))?;
            emit(out, path.as_deref(), &json(&cert))?;
            if !cert.all_checks_pass() {
                let names: Vec<&str> = cert.failed_checks().iter().map(|c| c.name.as_str()).collect();
                return Err(Failure::Check(format!("failed checks: {}", names.join(", "))));
            }
        }
        Command::Sweep { n, count, seed, sparsity, params, format, jobs, out: path } => {
            let opts = SweepOptions { count, n, seed, sparsity, certify: params.options(), jobs };
            let report = certify::sweep(&opts);
            let body = match format {
                Format::Json => json(&report),
                Format::Csv => report.to_csv(),
            };
            emit(out, path.as_deref(), &body)?;
            let s = &report.summary;
            let _ = writeln!(
                err,
                "{} instances, {} passed, {} errors, max ratio {}, repairs {}",
                s.count,
                s.passed,
                s.errors,
                s.max_ratio.as_ref().map_or("-".to_string(), Q::to_pq),
                s.repairs
            );
            if s.passed != s.count {
                return Err(Failure::Check(format!("{} of {} instances failed", s.count - s.passed, s.count)));
            }
        }
    }
    Ok(())
}

/// Runs the command line `args` (program name first) and returns the exit
/// status: 0 on success, 1 when a check failed, 2 on usage or input errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(Failure::Check(msg)) => {
            let _ = writeln!(err, "check failed: {msg}");
            1
        }
        Err(Failure::Usage(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            2
        }
    }
}
