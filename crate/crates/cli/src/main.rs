use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use bmwwalk_core::brauer::{enumerate, BrauerDiagram};
use bmwwalk_core::chains::{chi2_norm, compose_scan, stationary, tv_distance, Distribution, ScanChain, ScanKind};
use bmwwalk_core::classes::{class_of, partition};
use bmwwalk_core::ext::DEFAULT_PRECISION_CAP;
use bmwwalk_core::rational::format_rational;
use bmwwalk_core::sampler::sample_distribution;
use bmwwalk_core::verify::{self, VerifyConfig};
use bmwwalk_core::{LengthTable, Theta};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Largest `n` accepted by commands that build a full transition matrix.
const MAX_CHAIN_N: usize = 6;
const MAX_ENUMERATE_N: usize = 8;
const MAX_LENGTH_N: usize = 7;
const MAX_VERIFY_N: usize = 5;

#[derive(Parser)]
#[command(name = "bmwwalk", version, about = "Metropolis scan chains on Brauer diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every diagram on n strands, one JSON object per line.
    Enumerate {
        #[arg(long)]
        n: usize,
    },
    /// CSV of diagram, shortest word length, e-count and L.
    Lengths {
        #[arg(long)]
        n: usize,
    },
    /// Communication classes as JSON.
    Classes {
        #[arg(long)]
        n: usize,
    },
    /// Transition matrix of a scan as sparse CSV or JSON.
    Chain {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "random")]
        scan: ScanKind,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        out: Format,
        /// File listing every state, one per line, to fix the output order.
        #[arg(long)]
        order: Option<PathBuf>,
    },
    /// Exact total variation and chi-square distance to stationarity.
    Mix {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "random")]
        scan: ScanKind,
        /// Starting diagram; its class is the state space.
        #[arg(long)]
        class: BrauerDiagram,
        #[arg(long)]
        steps: u32,
    },
    /// Simulate independent walks and compare with the stationary law.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "random")]
        scan: ScanKind,
        #[arg(long)]
        sweeps: u64,
        #[arg(long)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to the identity diagram.
        #[arg(long)]
        start: Option<BrauerDiagram>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        out: Format,
    },
    /// Run the full invariant suite and print a JSON report.
    Verify {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        theta: Theta,
        #[arg(long, default_value_t = 5)]
        steps: u32,
        /// Bits of precision allowed before a sign decision gives up.
        #[arg(long, env = "BMWWALK_PRECISION_CAP", default_value_t = DEFAULT_PRECISION_CAP)]
        precision_cap: u32,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    theta: Theta,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    /// A check ran and failed.
    Check,
    /// Bad flags or inputs.
    Config(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<bmwwalk_core::Error> for Failure {
    fn from(e: bmwwalk_core::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

type Out<'a> = BufWriter<io::StdoutLock<'a>>;

fn limit(n: usize, max: usize) -> Result<(), Failure> {
    if n > max {
        return Err(Failure::Config(format!("n = {n} is too large for this command (max {max})")));
    }
    Ok(())
}

fn cmd_enumerate(out: &mut Out, n: usize) -> Result<(), Failure> {
    limit(n, MAX_ENUMERATE_N)?;
    #[derive(Serialize)]
    struct Line {
        n: usize,
        /// Points numbered 1..=n on top, n+1..=2n on the bottom.
        edges: Vec<[usize; 2]>,
    }
    for d in enumerate(n) {
        let edges = d.edges().into_iter().map(|(p, q)| [p + 1, q + 1]).collect();
        serde_json::to_writer(&mut *out, &Line { n, edges })?;
        writeln!(out)?;
    }
    Ok(())
}

fn cmd_lengths(out: &mut Out, n: usize) -> Result<(), Failure> {
    limit(n, MAX_LENGTH_N)?;
    let table = LengthTable::shared(n);
    writeln!(out, "diagram,lprime,e_count,L")?;
    for (k, d) in table.diagrams().iter().enumerate() {
        let e = table.entry_at(k);
        writeln!(out, "{d},{},{},{}", e.shortest, e.e_count, e.bmw_length().0)?;
    }
    Ok(())
}

fn cmd_classes(out: &mut Out, n: usize) -> Result<(), Failure> {
    limit(n, MAX_LENGTH_N)?;
    #[derive(Serialize)]
    struct Entry {
        key: String,
        m: usize,
        size: usize,
        members: Vec<String>,
    }
    let classes: Vec<Entry> = partition(n)
        .into_iter()
        .map(|c| Entry {
            key: c.key(),
            m: c.m,
            size: c.len(),
            members: c.members.iter().map(ToString::to_string).collect(),
        })
        .collect();
    serde_json::to_writer_pretty(&mut *out, &serde_json::json!({ "n": n, "classes": classes }))?;
    writeln!(out)?;
    Ok(())
}

fn read_order(path: &Path, chain: &ScanChain) -> Result<Vec<usize>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut seen = vec![false; chain.dim()];
    let mut order = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let d: BrauerDiagram = line.parse()?;
        let k = chain
            .index_of(&d)
            .ok_or_else(|| Failure::Config(format!("{line} is not a state on {} strands", chain.n())))?;
        if std::mem::replace(&mut seen[k], true) {
            return Err(Failure::Config(format!("{line} listed twice")));
        }
        order.push(k);
    }
    if order.len() != chain.dim() {
        return Err(Failure::Config(format!(
            "order file lists {} of {} states",
            order.len(),
            chain.dim()
        )));
    }
    Ok(order)
}

fn cmd_chain(out: &mut Out, c: Common, scan: ScanKind, format: Format, order: Option<PathBuf>) -> Result<(), Failure> {
    limit(c.n, MAX_CHAIN_N)?;
    let chain = compose_scan(scan, c.n, &c.theta)?;
    let order = match order {
        Some(p) => read_order(&p, &chain)?,
        None => (0..chain.dim()).collect(),
    };
    let states = chain.states();
    let mut entries = Vec::new();
    for &x in &order {
        let mut col: Vec<_> = chain.column(x).to_vec();
        col.sort_by_key(|(y, _)| order.iter().position(|z| z == y));
        for (y, v) in col {
            entries.push((y, x, v));
        }
    }
    match format {
        Format::Csv => {
            writeln!(out, "row,col,num,den")?;
            for (y, x, v) in entries {
                writeln!(out, "{},{},{},{}", states[y], states[x], v.numer(), v.denom())?;
            }
        }
        Format::Json => {
            let entries: Vec<_> = entries
                .into_iter()
                .map(|(y, x, v)| {
                    serde_json::json!({
                        "row": states[y].to_string(),
                        "col": states[x].to_string(),
                        "value": format_rational(&v),
                    })
                })
                .collect();
            let doc = serde_json::json!({
                "n": c.n,
                "scan": scan.to_string(),
                "theta": c.theta.to_string(),
                "states": order.iter().map(|&k| states[k].to_string()).collect::<Vec<_>>(),
                "entries": entries,
            });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn cmd_mix(out: &mut Out, c: Common, scan: ScanKind, start: BrauerDiagram, steps: u32) -> Result<(), Failure> {
    limit(c.n, MAX_CHAIN_N)?;
    if start.n() != c.n {
        return Err(Failure::Config(format!("--class has {} strands, --n is {}", start.n(), c.n)));
    }
    let full = compose_scan(scan, c.n, &c.theta)?;
    let class = class_of(&start);
    let idx = class.indices_in(&full)?;
    let chain = full.restrict(&idx)?;
    let local: Arc<[BrauerDiagram]> = chain.states().clone();
    let all: Vec<usize> = (0..local.len()).collect();
    let pi = stationary(&chain, &all, &c.theta)?;
    let x0 = local.iter().position(|d| *d == start).expect("start is in its class");
    let mut dist = Distribution::delta(local.len(), x0);
    writeln!(out, "step,tv_num,tv_den,chi2_num,chi2_den")?;
    for m in 0..=steps {
        if m > 0 {
            dist = chain.step(&dist)?;
        }
        let tv = tv_distance(&dist, &pi);
        let chi = chi2_norm(&dist, &pi);
        writeln!(out, "{m},{},{},{},{}", tv.numer(), tv.denom(), chi.numer(), chi.denom())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    out: &mut Out,
    c: Common,
    scan: ScanKind,
    sweeps: u64,
    count: u64,
    seed: u64,
    start: Option<BrauerDiagram>,
    format: Format,
) -> Result<(), Failure> {
    limit(c.n, MAX_LENGTH_N)?;
    let start = start.unwrap_or_else(|| BrauerDiagram::identity(c.n));
    if start.n() != c.n {
        return Err(Failure::Config(format!("--start has {} strands, --n is {}", start.n(), c.n)));
    }
    let report = sample_distribution(&start, scan, &c.theta, sweeps, count, seed)?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "diagram,count,expected")?;
            for ((d, k), e) in report.states.iter().zip(&report.counts).zip(&report.expected) {
                writeln!(out, "{d},{k},{e}")?;
            }
        }
    }
    Ok(())
}

fn cmd_verify(out: &mut Out, cfg: VerifyConfig) -> Result<(), Failure> {
    limit(cfg.n, MAX_VERIFY_N)?;
    if cfg.n == 0 {
        return Err(Failure::Config("n must be at least 1".into()));
    }
    let report = verify::run(&cfg);
    serde_json::to_writer_pretty(&mut *out, &report)?;
    writeln!(out)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = match cli.command {
        Command::Enumerate { n } => cmd_enumerate(&mut out, n),
        Command::Lengths { n } => cmd_lengths(&mut out, n),
        Command::Classes { n } => cmd_classes(&mut out, n),
        Command::Chain { common, scan, out: format, order } => cmd_chain(&mut out, common, scan, format, order),
        Command::Mix { common, scan, class, steps } => cmd_mix(&mut out, common, scan, class, steps),
        Command::Sample {
            common,
            scan,
            sweeps,
            count,
            seed,
            start,
            out: format,
        } => cmd_sample(&mut out, common, scan, sweeps, count, seed, start, format),
        Command::Verify {
            n,
            theta,
            steps,
            precision_cap,
        } => cmd_verify(
            &mut out,
            VerifyConfig {
                n,
                theta,
                steps,
                cap_bits: precision_cap,
            },
        ),
    };
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(()), Ok(())) => ExitCode::SUCCESS,
        (Err(Failure::Check), _) => ExitCode::from(1),
        (Err(Failure::Config(msg)), _) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        (Err(Failure::Io(e)), _) | (Ok(()), Err(e)) => {
            if e.kind() == io::ErrorKind::BrokenPipe {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
