use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use rand::RngCore;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use minfact::bijection::{phi, phi_inverse, psi, psi_inverse};
use minfact::lamination::{s_c, ColoredLamination};
use minfact::perm::{enumerate_minimal_factorizations, Factorization, ENUMERATION_BOUND};
use minfact::processes::{
    black_process, frames_jsonl, sample_l_c_of_f, stable_excursion_approx, timed_chords_jsonl, Excursion, FrameRecord,
};
use minfact::sampling::{critical_equivalent, rng_from_seed, FactorizationSampler, WeightSequence};
use minfact::stats::{self, TrialReport, Verdict};
use minfact::svg::{render_lamination, render_records, SvgOptions};
use minfact::trees::LabelledBiTypeTree;
use minfact::{SCHEMA_FACTORIZATION, SCHEMA_LAMINATION, SCHEMA_TREE};

/// Usage error, validation failure, failed statistical check.
enum Failure {
    Usage(String),
    Invalid(String),
    Statistical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Statistical(_) => 3,
        }
    }
}

type Res<T> = Result<T, Failure>;

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Invalid(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

#[derive(Parser)]
#[command(name = "minfact", version, about = "Minimal factorizations of the n-cycle")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite existing outputs.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// List every minimal factorization of the n-cycle as JSON lines.
    Enumerate {
        #[arg(long)]
        n: u32,
        /// Ordered cycle lengths, e.g. 2,3,2.
        #[arg(long, value_delimiter = ',')]
        class: Option<Vec<usize>>,
        #[command(flatten)]
        out: Output,
    },
    /// Draw one random minimal factorization.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Preset (uniform, delta:r, powerlaw:alpha) or a JSON file.
        #[arg(long, default_value = "uniform")]
        weights: String,
        #[arg(long, value_enum, default_value_t = Emit::Factorization)]
        emit: Emit,
        #[command(flatten)]
        out: Output,
    },
    /// Frame dump of a process: labelled faces of a factorization or tree,
    /// or the Poisson chord process under an excursion.
    Process {
        /// Factorization or tree JSON; stdin when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Chord process under `tent`, a stable excursion approximation
        /// `stable:alpha:m`, or a JSON excursion file {"s": [...], "f": [...]}.
        #[arg(long)]
        excursion: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Time horizon of the chord process.
        #[arg(long, default_value_t = 10.0)]
        c: f64,
        /// Smallest chord width kept.
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Render JSON or a frame dump as SVG.
    Render {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Emit this many snapshots, named frame_000.svg, ... in the --out directory.
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long, default_value_t = 512.0)]
        size: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Run an estimator or exact check and print a report.
    Stats {
        #[arg(value_enum)]
        estimator: Estimator,
        #[arg(long, default_value = "uniform")]
        weights: String,
        /// Size, or a comma-separated grid of sizes.
        #[arg(long, value_delimiter = ',', default_value = "1000")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Large-face threshold as a fraction of n.
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long)]
        threads: Option<usize>,
        /// CSV rows instead of JSON.
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Convert between factorization, tree and lamination JSON, or export walks.
    Convert {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        to: Target,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Factorization,
    Tree,
    Lamination,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Factorization,
    Tree,
    Lamination,
    Contour,
    Lukasiewicz,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Estimator {
    PNu,
    CycleCount,
    LargestCycle,
    BlackFraction,
    Counting,
}

fn write_out(o: &Output, data: &str) -> Res<()> {
    match &o.out {
        None => {
            std::io::stdout().write_all(data.as_bytes()).map_err(invalid)?;
            Ok(())
        }
        Some(p) => write_file(p, data, o.force),
    }
}

fn write_file(p: &Path, data: &str, force: bool) -> Res<()> {
    if p.exists() && !force {
        return Err(usage(format!("{} exists; pass --force to overwrite", p.display())));
    }
    std::fs::write(p, data).map_err(|e| invalid(format!("{}: {e}", p.display())))
}

fn read_input(p: &Option<PathBuf>) -> Res<String> {
    match p {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display()))),
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(usage)?;
            Ok(s)
        }
    }
}

fn weights(spec: &str) -> Res<WeightSequence> {
    let w = if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).map_err(usage)?;
        serde_json::from_str(&text).map_err(|e| invalid(format!("{spec}: {e}")))?
    } else {
        WeightSequence::preset(spec).map_err(usage)?
    };
    w.check().map_err(invalid)?;
    Ok(w)
}

fn lamination_json(lam: &ColoredLamination, n: u32) -> Value {
    let mut v = serde_json::to_value(lam).unwrap();
    let o = v.as_object_mut().unwrap();
    o.insert("schema".into(), SCHEMA_LAMINATION.into());
    o.insert("n".into(), n.into());
    v
}

fn line(v: &Value) -> String {
    let mut s = v.to_string();
    s.push('\n');
    s
}

/// A parsed JSON input, keyed by its schema.
enum Input {
    Factorization(Factorization),
    Tree(LabelledBiTypeTree),
    Lamination(ColoredLamination, u32),
    Frames(Vec<FrameRecord>),
}

fn parse_input(text: &str) -> Res<Input> {
    let trimmed = text.trim();
    if let Ok(v) = serde_json::from_str::<Value>(trimmed) {
        match v.get("schema").and_then(Value::as_str) {
            Some(SCHEMA_FACTORIZATION) => {
                let f = Factorization::from_json(&v).map_err(invalid)?;
                f.check_minimal().map_err(invalid)?;
                return Ok(Input::Factorization(f));
            }
            Some(SCHEMA_TREE) => return Ok(Input::Tree(LabelledBiTypeTree::from_json(&v).map_err(invalid)?)),
            Some(SCHEMA_LAMINATION) => {
                let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| invalid("lamination without n"))? as u32;
                let lam: ColoredLamination = serde_json::from_value(v).map_err(invalid)?;
                return Ok(Input::Lamination(lam, n));
            }
            Some(other) if !v.get("r").is_some() => return Err(invalid(format!("unknown schema {other:?}"))),
            _ => {}
        }
    }
    let mut recs = Vec::new();
    for (i, l) in trimmed.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        recs.push(serde_json::from_str::<FrameRecord>(l).map_err(|e| invalid(format!("line {}: {e}", i + 1)))?);
    }
    if recs.is_empty() {
        return Err(invalid("empty input"));
    }
    Ok(Input::Frames(recs))
}

fn tree_of(t: LabelledBiTypeTree) -> Res<LabelledBiTypeTree> {
    let n = t.num_white();
    t.validate_un(n).map_err(invalid)?;
    Ok(t)
}

fn cmd_enumerate(n: u32, class: Option<Vec<usize>>, out: &Output) -> Res<()> {
    let all = enumerate_minimal_factorizations(n, class.as_deref(), ENUMERATION_BOUND).map_err(invalid)?;
    let mut text = String::new();
    for f in &all {
        text.push_str(&line(&f.to_json()));
    }
    write_out(out, &text)?;
    let expected = match &class {
        Some(c) => (n as u64).pow(c.len() as u32 - 1),
        None => (n as u64 + 1).pow(n.saturating_sub(2)),
    };
    let valid = class.as_ref().is_none_or(|c| c.iter().map(|l| l - 1).sum::<usize>() + 1 == n as usize && c.iter().all(|&l| l >= 2));
    eprintln!("{} factorizations{}", all.len(), if valid { format!(" (expected {expected})") } else { String::new() });
    if valid && all.len() as u64 != expected {
        return Err(invalid("count disagrees with the closed form"));
    }
    Ok(())
}

fn cmd_sample(n: usize, seed: u64, spec: &str, emit: Emit, out: &Output) -> Res<()> {
    let w = weights(spec)?;
    let mut s = FactorizationSampler::new(&w).map_err(invalid)?;
    let f = s.sample(n, &mut rng_from_seed(seed, 0)).map_err(invalid)?;
    let v = match emit {
        Emit::Factorization => f.to_json(),
        Emit::Tree => psi(&f).map_err(invalid)?.to_json(),
        Emit::Lamination => lamination_json(&phi(&f).map_err(invalid)?, f.n),
    };
    write_out(out, &line(&v))
}

fn excursion(spec: &str, rng: &mut dyn RngCore) -> Res<Excursion> {
    if spec == "tent" {
        return Ok(Excursion::tent());
    }
    if let Some(rest) = spec.strip_prefix("stable:") {
        let (a, m) = rest.split_once(':').ok_or_else(|| usage("expected stable:alpha:m"))?;
        let alpha: f64 = a.parse().map_err(usage)?;
        let m: usize = m.parse().map_err(usage)?;
        return stable_excursion_approx(alpha, m, rng).map_err(invalid);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| usage(format!("{spec}: {e}")))?;
    let v: Value = serde_json::from_str(&text).map_err(invalid)?;
    let get = |k: &str| -> Res<Vec<f64>> { serde_json::from_value(v[k].clone()).map_err(invalid) };
    Excursion::new(get("s")?, get("f")?).map_err(invalid)
}

fn cmd_process(input: &Option<PathBuf>, exc: Option<&str>, seed: Option<u64>, c: f64, eps: f64, out: &Output) -> Res<()> {
    if let Some(spec) = exc {
        let seed = seed.ok_or_else(|| usage("--seed is required for the chord process"))?;
        let mut rng = rng_from_seed(seed, 0);
        let e = excursion(spec, &mut rng)?;
        return write_out(out, &timed_chords_jsonl(&sample_l_c_of_f(&e, c, eps, &mut rng)));
    }
    let lam = match parse_input(&read_input(input)?)? {
        Input::Factorization(f) => s_c(&f, f64::INFINITY),
        Input::Tree(t) => black_process(&tree_of(t)?, f64::INFINITY),
        _ => return Err(invalid("process input must be a factorization or a tree")),
    };
    write_out(out, &frames_jsonl(&lam))
}

fn cmd_render(input: &Option<PathBuf>, frames: Option<usize>, size: f64, out: &Output) -> Res<()> {
    let o = SvgOptions { size, ..SvgOptions::default() };
    let recs = match parse_input(&read_input(input)?)? {
        Input::Factorization(f) => {
            if frames.is_none() {
                return write_out(out, &render_lamination(&phi(&f).map_err(invalid)?, &o));
            }
            records(&frames_jsonl(&s_c(&f, f64::INFINITY)))
        }
        Input::Tree(t) => records(&frames_jsonl(&black_process(&tree_of(t)?, f64::INFINITY))),
        Input::Lamination(lam, n) => {
            minfact::lamination::validate_properties(&lam, n).map_err(invalid)?;
            records(&frames_jsonl(&lam))
        }
        Input::Frames(r) => r,
    };
    let mut recs = recs;
    recs.sort_by(|a, b| a.r.total_cmp(&b.r));
    let Some(frames) = frames else {
        return write_out(out, &render_records(&recs, &o));
    };
    let dir = out.out.clone().ok_or_else(|| usage("--frames needs --out <directory>"))?;
    std::fs::create_dir_all(&dir).map_err(invalid)?;
    let k = recs.len();
    let m = frames.min(k + 1).max(1);
    let width = ((m.saturating_sub(1)).to_string().len()).max(3);
    for i in 0..m {
        let upto = if m == 1 { k } else { (i * k + (m - 1) / 2) / (m - 1) };
        let path = dir.join(format!("frame_{i:0width$}.svg"));
        write_file(&path, &render_records(&recs[..upto], &o), out.force)?;
    }
    eprintln!("{m} frames written to {}", dir.display());
    Ok(())
}

fn records(text: &str) -> Vec<FrameRecord> {
    text.lines().map(|l| serde_json::from_str(l).expect("frame records round trip")).collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_stats(
    est: Estimator,
    spec: &str,
    ns: &[usize],
    trials: usize,
    seed: Option<u64>,
    eps: f64,
    csv: bool,
    out: &Output,
) -> Res<()> {
    let w = weights(spec)?;
    let mut reports: Vec<TrialReport> = Vec::new();
    let mut extra: Option<Value> = None;
    match est {
        Estimator::PNu => {
            let ce = critical_equivalent(&w).map_err(invalid)?;
            let p = stats::exact_p_nu(&ce);
            let mut r = match stats::exact_p_nu_by_branching_formula(&ce, 2000) {
                Ok(b) => TrialReport::new("p_nu", 0, 0, p.value, 0.0, Some(b.value), 1e-8).with("tail", b.tail),
                Err(_) => TrialReport::new("p_nu", 0, 0, p.value, 0.0, None, 0.0),
            };
            if p.infinite_variance {
                r = r.with("infinite_variance", 1.0);
            }
            reports.push(r);
        }
        Estimator::Counting => {
            let n_max = *ns.iter().max().unwrap() as u32;
            if n_max > ENUMERATION_BOUND {
                return Err(invalid(format!("counting suite limited to n <= {ENUMERATION_BOUND}")));
            }
            let c = stats::counting_suite(n_max).map_err(invalid)?;
            let pass = c.pass;
            let mut v = serde_json::to_value(&c).unwrap();
            v.as_object_mut().unwrap().insert("schema".into(), stats::SCHEMA_REPORT.into());
            extra = Some(v);
            if !pass {
                write_out(out, &line(extra.as_ref().unwrap()))?;
                return Err(Failure::Statistical("counting suite failed".into()));
            }
        }
        _ => {
            let seed = seed.ok_or_else(|| usage("--seed is required for Monte Carlo estimators"))?;
            for &n in ns {
                let r = match est {
                    Estimator::CycleCount => stats::estimate_cycle_count(&w, n, trials, seed),
                    Estimator::LargestCycle => stats::estimate_largest_cycle(&w, n, trials, seed),
                    _ => stats::estimate_black_fraction(&w, n, trials, eps, seed),
                }
                .map_err(invalid)?;
                reports.push(r);
            }
        }
    }
    let text = if let Some(v) = extra {
        line(&v)
    } else if csv {
        stats::reports_csv(&reports)
    } else if reports.len() == 1 {
        line(&reports[0].to_json())
    } else {
        line(&json!({"schema": stats::SCHEMA_REPORT, "reports": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>()}))
    };
    write_out(out, &text)?;
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        return Err(Failure::Statistical("estimate outside tolerance".into()));
    }
    Ok(())
}

fn cmd_convert(input: &Option<PathBuf>, to: Target, out: &Output) -> Res<()> {
    let f = match parse_input(&read_input(input)?)? {
        Input::Factorization(f) => f,
        Input::Tree(t) => psi_inverse(&tree_of(t)?).map_err(invalid)?,
        Input::Lamination(lam, n) => phi_inverse(&lam, n).map_err(invalid)?,
        Input::Frames(_) => return Err(invalid("frame dumps cannot be converted")),
    };
    let text = match to {
        Target::Factorization => line(&f.to_json()),
        Target::Tree => line(&psi(&f).map_err(invalid)?.to_json()),
        Target::Lamination => line(&lamination_json(&phi(&f).map_err(invalid)?, f.n)),
        Target::Contour => psi(&f).map_err(invalid)?.tree.contour_csv(),
        Target::Lukasiewicz => psi(&f).map_err(invalid)?.tree.lukasiewicz_csv(),
    };
    write_out(out, &text)
}

fn run(cli: Cli) -> Res<()> {
    match cli.cmd {
        Cmd::Enumerate { n, class, out } => cmd_enumerate(n, class, &out),
        Cmd::Sample { n, seed, weights, emit, out } => cmd_sample(n, seed, &weights, emit, &out),
        Cmd::Process { input, excursion, seed, c, eps, out } => {
            cmd_process(&input, excursion.as_deref(), seed, c, eps, &out)
        }
        Cmd::Render { input, frames, size, out } => cmd_render(&input, frames, size, &out),
        Cmd::Stats { estimator, weights, n, trials, seed, eps, threads, csv, out } => {
            if let Some(t) = threads {
                rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(usage)?;
            }
            cmd_stats(estimator, &weights, &n, trials, seed, eps, csv, &out)
        }
        Cmd::Convert { input, to, out } => cmd_convert(&input, to, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("usage error: {m}"),
                Failure::Invalid(m) => eprintln!("invalid: {m}"),
                Failure::Statistical(m) => eprintln!("check failed: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
