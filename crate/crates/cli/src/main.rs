use std::fs;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use blockgeom::bundle::{Bundle, BundleKind};
use blockgeom::example36::{self, example_build, mps_excluder, spectrum_scan, Target};
use blockgeom::gf::Field;
use blockgeom::model::BcModel;
use blockgeom::mps::{f_search_blocking, mps_build, mps_size_predict, MpsFrame};
use blockgeom::pg::read_point_set;
use blockgeom::verify::{self, Trivial, VerificationReport};

#[derive(Parser)]
#[command(
    name = "bgeom",
    version,
    about = "Blocking sets of PG(r, q^n): construction and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Field arithmetic in GF(p^k).
    Ff(FfArgs),
    /// Build a blocking set and write a bundle.
    #[command(subcommand)]
    Construct(Construct),
    /// Exhaustive searches on tiny instances.
    #[command(subcommand)]
    Search(Search),
    /// Certify the set `b` of a bundle.
    Verify(VerifyArgs),
    /// Intersection spectrum of an example bundle.
    Spectrum(SpectrumArgs),
    /// Divisibility test against the single-vertex cone construction.
    Excluder(ExcluderArgs),
}

#[derive(Args)]
struct FfArgs {
    #[arg(long)]
    p: u32,
    #[arg(long)]
    k: u32,
    /// Modulus coefficients c0 .. ck, space separated.
    #[arg(long)]
    modulus: Option<String>,
    #[arg(long, value_enum)]
    op: Option<FfOp>,
    #[arg(long)]
    a: Option<u32>,
    /// Second operand; the exponent for `pow`.
    #[arg(long)]
    b: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FfOp {
    Add,
    Mul,
    Inv,
    Pow,
}

#[derive(Subcommand)]
enum Construct {
    /// Cone over a set `B̄` read from a point-set file.
    Mps {
        #[arg(long)]
        q1: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        bbar: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// The non-planar example in PG(3, q^6).
    Example36 {
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum Search {
    /// All family-blocking sets up to a size, with minimality and triviality.
    Fblocking {
        #[arg(long)]
        q1: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        max_size: usize,
        /// Keep only inclusion-minimal sets.
        #[arg(long)]
        minimal: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    bundle: PathBuf,
    /// Comma separated: blocking, minimal, trivial, planar, spectrum.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "blocking,minimal,trivial,planar"
    )]
    checks: Vec<Check>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Record wall-clock timings in the report (makes it run-dependent).
    #[arg(long)]
    timings: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Check {
    Blocking,
    Minimal,
    Trivial,
    Planar,
    Spectrum,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long, value_enum)]
    target: TargetArg,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Bbar,
    Btilde,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Bbar => Target::Bbar,
            TargetArg::Btilde => Target::Btilde,
        }
    }
}

#[derive(Args)]
struct ExcluderArgs {
    #[arg(long)]
    size: u64,
    #[arg(long)]
    p: u32,
    #[arg(long)]
    e: u32,
}

/// Outcome of a command that ran to the end.
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Ff(a) => ff(a),
        Command::Construct(Construct::Mps {
            q1,
            n,
            r,
            s,
            bbar,
            out,
        }) => construct_mps(q1, n, r, s, &bbar, &out),
        Command::Construct(Construct::Example36 { q, seed, out }) => {
            if !(2..=3).contains(&q) {
                bail!("q must be 2 or 3");
            }
            let ex = example_build(q, seed)?;
            write_json(&out, &Bundle::from_example(&ex)?)?;
            println!(
                "|B̄ \\ Σ| = {}, |B̃| = {}, |B| = {}",
                ex.bbar.len() - theta_len(&ex),
                ex.btilde.len(),
                ex.b.len()
            );
            Ok(Outcome::Pass)
        }
        Command::Search(Search::Fblocking {
            q1,
            n,
            r,
            s,
            max_size,
            minimal,
            out,
        }) => search(q1, n, r, s, max_size, minimal, out),
        Command::Verify(a) => verify_cmd(a),
        Command::Spectrum(a) => spectrum_cmd(a),
        Command::Excluder(a) => {
            let v = mps_excluder(a.size, a.p, a.e)?;
            for c in &v.cases {
                println!(
                    "n = {}, t = {}: p^{} {} |B| - 1",
                    c.n,
                    c.t,
                    c.needed,
                    if c.divides { "divides" } else { "does not divide" }
                );
            }
            println!("{}", if v.excluded { "excluded" } else { "admissible" });
            Ok(Outcome::Pass)
        }
    }
}

fn theta_len(ex: &example36::Example36) -> usize {
    ex.ambient().point_ranks_of(&ex.frame.theta).len()
}

fn ff(a: FfArgs) -> Result<Outcome> {
    let modulus = a
        .modulus
        .as_deref()
        .map(|m| {
            m.split_whitespace()
                .map(|t| t.parse::<u32>().with_context(|| format!("bad coefficient {t:?}")))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let f = Field::new(a.p, a.k, modulus.as_deref())?;
    println!("field {}", f.descriptor());
    if let Some(op) = a.op {
        let x = a.a.context("--a is required with --op")?;
        f.check(x)?;
        let elem = |b: u64| -> Result<u32> {
            let b = u32::try_from(b)?;
            f.check(b)?;
            Ok(b)
        };
        let y = match op {
            FfOp::Add => f.add(x, elem(a.b.context("--b is required")?)?),
            FfOp::Mul => f.mul(x, elem(a.b.context("--b is required")?)?),
            FfOp::Inv => f.inv(x)?,
            FfOp::Pow => f.pow(x, a.b.context("--b is required")?),
        };
        println!("{y}");
    }
    Ok(Outcome::Pass)
}

fn construct_mps(
    q1: u32,
    n: usize,
    r: usize,
    s: usize,
    bbar_path: &PathBuf,
    out: &PathBuf,
) -> Result<Outcome> {
    let model = Arc::new(BcModel::new(q1, n, r)?);
    let frame = MpsFrame::new(model.clone(), s)?;
    let file = fs::File::open(bbar_path).with_context(|| format!("opening {}", bbar_path.display()))?;
    let (bbar, warnings) = read_point_set(BufReader::new(file))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if bbar.space() != frame.ambient() {
        bail!("B̄ must live in PG({}, {})", n * r, q1);
    }
    let b = mps_build(&frame, &bbar)?;
    let predicted = mps_size_predict(bbar.len() as u64, q1 as u64, n as u32, s as u32);
    let config =
        serde_json::json!({ "q1": q1, "n": n, "r": r, "s": s, "bbar": bbar_path.display().to_string() });
    write_json(out, &Bundle::from_mps(&frame, config, &bbar, &b)?)?;
    println!("|B̄| = {}, |B| = {} (predicted {predicted})", bbar.len(), b.len());
    Ok(if b.len() as u64 == predicted {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

#[derive(Serialize)]
struct SearchHit {
    size: usize,
    bbar: Vec<u64>,
    minimal: bool,
    trivial: bool,
}

fn search(
    q1: u32,
    n: usize,
    r: usize,
    s: usize,
    max_size: usize,
    minimal: bool,
    out: Option<PathBuf>,
) -> Result<Outcome> {
    let frame = MpsFrame::new(Arc::new(BcModel::new(q1, n, r)?), s)?;
    let found = f_search_blocking(&frame, max_size)?;
    let hits: Vec<SearchHit> = found
        .iter()
        .filter(|f| !minimal || f.minimal)
        .map(|f| SearchHit {
            size: f.bbar.len(),
            bbar: f.bbar.ranks().to_vec(),
            minimal: f.minimal,
            trivial: f.trivial,
        })
        .collect();
    println!("{} sets", hits.len());
    let json = serde_json::to_string_pretty(&hits)?;
    match out {
        Some(p) => fs::write(&p, json + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{json}"),
    }
    Ok(Outcome::Pass)
}

fn read_bundle(path: &PathBuf) -> Result<Bundle> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Bundle::from_json(&text)?)
}

fn write_json<T: Serialize>(path: &PathBuf, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Rebuilds the example behind a bundle and insists that it matches.
fn rebuild_example(bundle: &Bundle) -> Result<example36::Example36> {
    let (q, seed) = bundle.example_params()?;
    let ex = example_build(q, seed)?;
    let fresh = Bundle::from_example(&ex)?;
    for name in ["bbar", "btilde"] {
        if fresh.sets.get(name) != bundle.sets.get(name) {
            bail!("set {name} of the bundle differs from a rebuild with q = {q}, seed = {seed}");
        }
    }
    if fresh.frame != bundle.frame {
        bail!("frame of the bundle differs from a rebuild with q = {q}, seed = {seed}");
    }
    Ok(ex)
}

fn verify_cmd(a: VerifyArgs) -> Result<Outcome> {
    let bundle = read_bundle(&a.bundle)?;
    let b = bundle.set("b")?;
    let mut report = VerificationReport {
        manifest: serde_json::json!({
            "kind": bundle.kind,
            "config": bundle.config,
            "model": bundle.model,
            "frame": bundle.frame,
            "space": format!("{:?}", b.space()),
            "field": b.space().field().descriptor(),
        }),
        ..Default::default()
    };
    report.sizes.insert("b".into(), b.len() as u64);
    for (name, rec) in &bundle.sets {
        report.sizes.insert(name.clone(), rec.ranks.len() as u64);
    }
    let mut clock = Clock::new(a.timings);
    let wants = |c: Check| a.checks.contains(&c);

    if wants(Check::Blocking) || wants(Check::Minimal) {
        let (cov, verdict) = verify::blocking_check(&b, a.workers)?;
        clock.lap(&mut report, "blocking");
        println!(
            "blocking: {} hyperplanes, {} uncovered",
            verdict.total, verdict.uncovered_count
        );
        if wants(Check::Minimal) {
            let m = verify::minimality_check(&b, &cov)?;
            clock.lap(&mut report, "minimality");
            println!(
                "minimality: {} essential, {} inessential",
                m.essential.len(),
                m.inessential.len()
            );
            report.minimality = Some(m);
        }
        if wants(Check::Blocking) {
            report.blocking = Some(verdict);
        }
    }
    if wants(Check::Trivial) {
        let line = verify::find_line(&b);
        clock.lap(&mut report, "trivial");
        println!("trivial: {}", line.is_some());
        report.trivial = Some(Trivial {
            trivial: line.is_some(),
            line,
        });
    }
    if wants(Check::Planar) {
        let p = verify::planarity_check(&b)?;
        clock.lap(&mut report, "planar");
        println!("span dimension: {}", p.span_dim);
        report.planar = Some(p);
    }
    if wants(Check::Spectrum) {
        let ex = rebuild_example(&bundle)?;
        let reports = [
            spectrum_scan(&ex, Target::Bbar, a.workers)?,
            spectrum_scan(&ex, Target::Btilde, a.workers)?,
        ];
        clock.lap(&mut report, "spectrum");
        report.spectra = example36::spectra_summaries(&reports);
        for (k, s) in &report.spectra {
            println!("spectrum {k}: {:?}, {} violations", s.histogram, s.violations);
        }
    }
    if let Some(path) = &a.report {
        write_json(path, &report)?;
    }
    Ok(if report.passed() {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn spectrum_cmd(a: SpectrumArgs) -> Result<Outcome> {
    let bundle = read_bundle(&a.bundle)?;
    if bundle.kind != BundleKind::Example36 {
        bail!("spectrum needs an example36 bundle");
    }
    let ex = rebuild_example(&bundle)?;
    let rep = spectrum_scan(&ex, a.target.into(), a.workers)?;
    println!("members: {} ({} containing X')", rep.members, rep.members_t);
    println!("all: {:?}", rep.histogram);
    println!("containing X': {:?}", rep.histogram_t);
    println!("not containing X': {:?}", rep.histogram_not_t);
    for v in rep.violations.iter().take(20) {
        println!("violation at hyperplane {} {}: {}", v.hyperplane, v.dual, v.what);
    }
    println!("{} violations", rep.violations.len());
    if let Some(path) = &a.report {
        write_json(path, &rep)?;
    }
    Ok(if rep.violations.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

struct Clock {
    on: bool,
    last: Instant,
}

impl Clock {
    fn new(on: bool) -> Self {
        Clock {
            on,
            last: Instant::now(),
        }
    }

    fn lap(&mut self, report: &mut VerificationReport, what: &str) {
        if self.on {
            let now = Instant::now();
            report
                .timings_ms
                .insert(what.into(), (now - self.last).as_millis() as u64);
            self.last = now;
        }
    }
}
