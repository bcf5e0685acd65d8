use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spiraldim::curve::fmt_num;
use spiraldim::experiments::{
    emit_report, load_report, run_suite, write_summary_csv, BuildOptions, CurveSource, Plan, SuiteConfig,
    SuiteResult, SUITE_IDS,
};
use spiraldim::fractal::{box_count_anchored, content_profile, epsilon_measure, fit_dimension, WindowPolicy};
use spiraldim::phase::{
    arc_length_profile, classify_curve, fit_return_exponent, poincare_sequence, project, unwrap_phase, Plane,
};
use spiraldim::{Curve, Error, Result};

macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout().lock(), $($arg)*)?
    };
}

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "SPIRALDIM_THREADS";

#[derive(Parser)]
#[command(
    name = "spiraldim",
    version,
    about = "Generate spiral and chirp curves and estimate their fractal exponents"
)]
struct Cli {
    /// Print timings and extra diagnostics to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a curve and write it as CSV with a `.meta` sidecar.
    Generate {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Box-counting dimension estimate.
    Dim {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        build: BuildArgs,
        /// Regression window as START:END ladder indices (half-open).
        #[arg(long, conflicts_with = "trim")]
        window: Option<String>,
        /// Scales dropped as COARSE:FINE (default 2:2).
        #[arg(long)]
        trim: Option<String>,
        /// Grid anchor as comma-separated coordinates.
        #[arg(long)]
        shift: Option<String>,
        /// Write the `epsilon,count` table here.
        #[arg(long)]
        counts: Option<PathBuf>,
        /// Write the estimate block here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ε-neighbourhood areas and the content verdict at exponent `s`.
    Content {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long)]
        s: f64,
        /// Raster cell (default: 1/8 of the finest scale).
        #[arg(long)]
        raster: Option<f64>,
        /// Write the `epsilon,measure` table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First-return radii on a ray and the exponent of `−d(r)`.
    Poincare {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long, default_value_t = 0.0)]
        section: f64,
        /// Write the `n,r,d` table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Arc-length profile and rectifiability verdict.
    Rectify {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Regime of a planar phase curve.
    Classify {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Run experiment suites and write their reports.
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated suite ids (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        scales: Option<usize>,
        #[arg(long)]
        fill: Option<f64>,
    },
    /// Re-read suite CSVs, check them and print the summary.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// Write `summary.csv` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// r = φ^(−α)(log φ)^β: alpha, log_exponent, phi_min, mirror.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    spiral: Option<Vec<String>>,
    /// Graph of τ^α trig(τ^(−β)): alpha, beta, phase_shift, trig, tau_max.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    chirp: Option<Vec<String>>,
    /// Phase curve (x, ẋ) of a chirp in t = 1/τ: alpha, beta, phase_shift, trig, t0.
    #[arg(long = "chirp-phase", num_args = 1.., value_name = "KEY=VALUE")]
    chirp_phase: Option<Vec<String>>,
    /// Closed-form spatial trajectory: alpha, gamma, K, k, l, C1, C2, C3, t0.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    family: Option<Vec<String>>,
    /// Integrated cubic system, same keys as --family.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    cubic: Option<Vec<String>>,
    /// Graph (τ, x(1/τ)), same keys as --family.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    reflected: Option<Vec<String>>,
    /// Reduced normal form: l, p, b_p, omega, focus, t_offset.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    hopf: Option<Vec<String>>,
    /// A curve CSV written by `generate`.
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    /// Ladder length.
    #[arg(long, default_value_t = 20)]
    scales: usize,
    /// Turn gap at the cut-off, in units of the finest scale.
    #[arg(long, default_value_t = spiraldim::fractal::DEFAULT_FILL)]
    fill: f64,
    #[arg(long, default_value_t = 20_000_000)]
    budget: usize,
    /// Chord bound (default: a quarter of the finest scale).
    #[arg(long)]
    chord: Option<f64>,
    /// End time (trajectories, phase curves, normal form).
    #[arg(long, group = "end")]
    tmax: Option<f64>,
    /// End radius (spirals).
    #[arg(long, group = "end")]
    rmin: Option<f64>,
    /// End of the chirp graph near 0.
    #[arg(long = "tau-min", group = "end")]
    tau_min: Option<f64>,
    #[arg(long = "rel-tol", default_value_t = 1e-10)]
    rel_tol: f64,
    #[arg(long = "abs-tol", default_value_t = 1e-13)]
    abs_tol: f64,
}

impl BuildArgs {
    fn options(&self) -> BuildOptions {
        BuildOptions {
            scale_count: self.scales,
            fill: self.fill,
            budget: self.budget,
            max_chord: self.chord,
            end: self.tmax.or(self.rmin).or(self.tau_min),
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
        }
    }
}

enum Loaded {
    Generated(CurveSource, Curve, Plan),
    File(Curve, Plan),
}

impl Loaded {
    fn curve(&self) -> &Curve {
        match self {
            Loaded::Generated(_, c, _) | Loaded::File(c, _) => c,
        }
    }

    fn plan(&self) -> &Plan {
        match self {
            Loaded::Generated(_, _, p) | Loaded::File(_, p) => p,
        }
    }
}

impl SourceArgs {
    fn selected(&self) -> Option<(&'static str, &[String])> {
        let kinds: [(&'static str, &Option<Vec<String>>); 7] = [
            ("spiral", &self.spiral),
            ("chirp", &self.chirp),
            ("chirp-phase", &self.chirp_phase),
            ("family", &self.family),
            ("cubic", &self.cubic),
            ("reflected", &self.reflected),
            ("hopf", &self.hopf),
        ];
        kinds.into_iter().find_map(|(k, v)| v.as_deref().map(|v| (k, v)))
    }

    fn load(&self, build: &BuildArgs) -> Result<Loaded> {
        let opts = build.options();
        if let Some(path) = &self.curve {
            let curve = Curve::load(path)?;
            let plan = Plan::new(curve.diameter(), opts.scale_count, opts.fill)?;
            return Ok(Loaded::File(curve, plan));
        }
        let (kind, pairs) = self.selected().expect("clap enforces one source");
        let source = CurveSource::parse(kind, pairs)?;
        let (curve, plan) = source.build(&opts)?;
        Ok(Loaded::Generated(source, curve, plan))
    }
}

fn parse_pair(text: &str, what: &'static str) -> Result<(usize, usize)> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("{what} {text:?} is not of the form A:B")))?;
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("{what} {text:?}: bad index {s:?}")))
    };
    Ok((num(a)?, num(b)?))
}

fn planar(curve: &Curve) -> Result<Curve> {
    if curve.dim() == 2 {
        Ok(curve.clone())
    } else {
        project(curve, Plane::Xy)
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn warn_truncated(curve: &Curve) {
    if let Some(reason) = &curve.provenance().truncated {
        eprintln!("warning: curve truncated: {reason}");
    }
}

fn run(cli: Cli) -> Result<()> {
    let verbose = cli.verbose > 0;
    match cli.command {
        Command::Generate { source, build, out } => {
            if source.curve.is_some() {
                return Err(Error::invalid(
                    "--curve",
                    "generate needs a curve kind, not a file",
                ));
            }
            let loaded = source.load(&build)?;
            let curve = loaded.curve();
            curve.save(&out)?;
            warn_truncated(curve);
            if verbose {
                eprintln!("{} samples, max chord {:e}", curve.len(), curve.max_chord());
            }
        }
        Command::Dim {
            source,
            build,
            window,
            trim,
            shift,
            counts,
            out,
        } => {
            let policy = match (window, trim) {
                (Some(w), _) => {
                    let (start, end) = parse_pair(&w, "--window")?;
                    WindowPolicy::Explicit { start, end }
                }
                (None, Some(t)) => {
                    let (coarse, fine) = parse_pair(&t, "--trim")?;
                    WindowPolicy::Trim { coarse, fine }
                }
                (None, None) => WindowPolicy::default(),
            };
            policy.resolve(build.scales)?;
            let anchor = match shift {
                Some(s) => s
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Parse(format!("--shift: bad number {v:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?,
                None => vec![0.0; 3],
            };
            let loaded = source.load(&build)?;
            let curve = loaded.curve();
            warn_truncated(curve);
            let ladder = loaded.plan().ladder()?;
            let mut anchor = anchor;
            anchor.resize(3, 0.0);
            let table = box_count_anchored(curve, &ladder, &anchor)?;
            if let Some(path) = counts {
                table.write_csv(fs::File::create(path)?)?;
            }
            let est = fit_dimension(&table, policy)?;
            if est.sub_resolved {
                return Err(Error::SubResolved);
            }
            let mut text = est.to_kv();
            if let Loaded::Generated(src, _, _) = &loaded {
                if let Some(p) = predicted_dimension(src) {
                    text.push_str(&format!("predicted = {}\n", fmt_num(p)));
                }
            }
            write_or_print(out.as_deref(), &text)?;
        }
        Command::Content {
            source,
            build,
            s,
            raster,
            out,
        } => {
            let loaded = source.load(&build)?;
            let curve = planar(loaded.curve())?;
            warn_truncated(&curve);
            let ladder = loaded.plan().ladder()?;
            let cell = raster.unwrap_or(ladder.eps_min() / 8.0);
            let measure = epsilon_measure(&curve, &ladder, cell)?;
            if let Some(path) = out {
                measure.write_csv(fs::File::create(path)?)?;
            }
            let prof = content_profile(&measure, s)?;
            out!("s = {}", fmt_num(prof.s));
            out!("verdict = \"{}\"", prof.verdict.as_str());
            out!("spread = {}", fmt_num(prof.spread));
            out!("monotone = {}", prof.monotone);
            out!("spread_threshold = {}", fmt_num(prof.spread_threshold));
            out!("window = [{}, {}]", prof.window[0], prof.window[1]);
        }
        Command::Poincare {
            source,
            build,
            section,
            out,
        } => {
            let loaded = source.load(&build)?;
            let curve = planar(loaded.curve())?;
            let seq = poincare_sequence(&unwrap_phase(&curve)?, section)?;
            if let Some(path) = out {
                seq.write_csv(fs::File::create(path)?)?;
            }
            let est = fit_return_exponent(&seq)?;
            out!("exponent = {}", fmt_num(est.exponent));
            out!("band = {}", fmt_num(est.band));
            out!("returns = {}", est.returns);
            out!("interpolation_error = {}", fmt_num(seq.interpolation_error));
            if let Loaded::Generated(src, _, _) = &loaded {
                if let Some((alpha, _)) = src.phase_exponents() {
                    out!("predicted = {}", fmt_num(1.0 / alpha + 1.0));
                }
            }
        }
        Command::Rectify { source, build } => {
            let loaded = source.load(&build)?;
            let rep = arc_length_profile(loaded.curve())?;
            out!("verdict = \"{}\"", rep.verdict.as_str());
            out!("total = {}", fmt_num(rep.total));
            out!("tail_slope = {}", fmt_num(rep.tail_slope));
            out!("band = {}", fmt_num(rep.band));
            if let (Some(limit), Some(spread)) = (rep.limit, rep.limit_spread) {
                out!("limit = {}", fmt_num(limit));
                out!("limit_spread = {}", fmt_num(spread));
            }
        }
        Command::Classify {
            source,
            build,
            alpha,
            beta,
        } => {
            let loaded = source.load(&build)?;
            let from_source = match &loaded {
                Loaded::Generated(src, _, _) => src.phase_exponents(),
                Loaded::File(..) => None,
            };
            let (a, b) = match (alpha, beta, from_source) {
                (Some(a), Some(b), _) => (a, b),
                (a, b, Some((sa, sb))) => (a.unwrap_or(sa), b.unwrap_or(sb)),
                _ => return Err(Error::invalid("--alpha/--beta", "required for this curve")),
            };
            let c = classify_curve(&planar(loaded.curve())?, a, b)?;
            out!("regime = \"{}\"", c.regime.as_str());
            out!("turns = {}", fmt_num(c.turns));
            if let Some(w) = &c.wavy {
                out!("wave_violations = {}", w.violation_count);
                out!("max_rise = {}", fmt_num(w.max_rise));
            }
        }
        Command::Suite {
            config,
            out,
            only,
            budget,
            scales,
            fill,
        } => {
            let mut cfg = match config {
                Some(p) => SuiteConfig::load(&p)?,
                None => SuiteConfig::default(),
            };
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            if let Some(b) = budget {
                cfg.sampling.budget = b;
            }
            if let Some(n) = scales {
                cfg.sampling.scale_count = n;
            }
            if let Some(f) = fill {
                cfg.sampling.fill = f;
            }
            cfg.validate()?;
            let ids: Vec<String> = if only.is_empty() {
                SUITE_IDS.iter().map(|s| s.to_string()).collect()
            } else {
                only
            };
            let mut results = Vec::new();
            for id in &ids {
                let r = run_suite(id, &cfg)?;
                if verbose {
                    eprintln!("{id}: {:.1}s", r.runtime.as_secs_f64());
                }
                results.push(r);
            }
            emit_report(&results, &cfg.out_dir)?;
            print_summary(&results)?;
        }
        Command::Report { input, out } => {
            let results = load_report(&input)?;
            if let Some(path) = out {
                write_summary_csv(&results, fs::File::create(path)?)?;
            }
            print_summary(&results)?;
        }
    }
    Ok(())
}

fn predicted_dimension(src: &CurveSource) -> Option<f64> {
    match src {
        CurveSource::Spiral(s) => Some(s.predicted_dimension()),
        CurveSource::Chirp { spec, .. } => Some(spec.predicted_dimension()),
        CurveSource::Family(s) | CurveSource::Cubic(s) => Some(s.predicted_dimension()),
        CurveSource::Reflected(s) => Some(2.0 - (s.alpha + 1.0) / 2.0),
        CurveSource::Hopf { spec, .. } => spec.predicted_dimension(),
        CurveSource::ChirpPhase { .. } => None,
    }
}

fn print_summary(results: &[SuiteResult]) -> Result<()> {
    out!(
        "{:<16} {:>5} {:>7} {:>7} {:>13}",
        "suite",
        "rows",
        "passed",
        "failed",
        "experimental"
    );
    for r in results {
        let gated = r.gated().count();
        out!(
            "{:<16} {:>5} {:>7} {:>7} {:>13}",
            r.suite_id,
            r.rows.len(),
            r.passed(),
            r.failed(),
            r.rows.len() - gated
        );
        for row in r.gated().filter(|row| !row.pass) {
            out!(
                "  FAIL {}: predicted {:.4}, estimated {:.4} {}",
                row.id,
                row.predicted,
                row.estimated,
                row.note
            );
        }
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::invalid(THREADS_VAR, format!("{value:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::invalid(THREADS_VAR, e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
