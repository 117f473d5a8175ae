//! Command-line front end: checkers, sweeps, extremal search, asymptotic
//! fits, measure validations and constants, with canonical JSON or CSV output.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use turanlab::constants::{eval_constant, ConstantName, ConstantParams};
use turanlab::extremal::{minimize_ratio, SearchConfig, SearchResult};
use turanlab::families::{generate, qn_asymptote, FamilyKind, FamilySpec};
use turanlab::inequalities::{check, sweep, InequalityId, InequalityReport, Params, SweepConfig};
use turanlab::measure::{layer_cake_check, lemma9_check, sublevel_measures, LemmaVariant, MeasureEstimate};
use turanlab::{make_root_poly, Complex64, PolyClass, RootPoly};

pub mod output;

use output::{fmt_float, reports_csv, table_csv, to_canonical_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Relative agreement required of the two layer-cake sides.
pub const LAYER_CAKE_TOL: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "turanlab", version, about = "Reverse Markov–Nikol'skii inequality lab")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, env = "TURANLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check one inequality for one polynomial.
    Verify(VerifyArgs),
    /// Check inequalities over a family and parameter grid.
    Sweep(SweepArgs),
    /// Minimise an inequality's ratio over root configurations.
    Extremal(ExtremalArgs),
    /// Log-log slope of `∫|Q_n^(k)|^p` for `Q_n = (1 - x^2)^n`.
    Asymptote(AsymptoteArgs),
    /// Sublevel measures, layer cake identity and the lemma check.
    Measure(MeasureArgs),
    /// Evaluate a named constant.
    Constants(ConstantsArgs),
}

#[derive(Debug, Args)]
pub struct PolyArgs {
    #[arg(long, value_parser = parse_family, conflicts_with = "roots")]
    pub family: Option<FamilyKind>,
    /// Family size parameter.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated zeros, e.g. `-0.5,0.25,0.1+0.3i`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_root)]
    pub roots: Option<Vec<Complex64>>,
    /// Class of `--roots` (default: segment if all real).
    #[arg(long, value_parser = parse_class)]
    pub class: Option<PolyClass>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = parse_ineq)]
    pub ineq: InequalityId,
    #[command(flatten)]
    pub poly: PolyArgs,
    #[arg(long, value_parser = parse_real)]
    pub p: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub q: Option<f64>,
    #[arg(long, value_parser = parse_variant)]
    pub lemma_variant: Option<LemmaVariant>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated ids, or `all`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ineq: Vec<String>,
    #[arg(long, value_parser = parse_family, default_value = "random-segment")]
    pub family: FamilyKind,
    #[arg(long, value_parser = parse_range)]
    pub n_range: (usize, usize),
    #[arg(long, value_delimiter = ',', value_parser = parse_real, default_value = "1,2,5,inf")]
    pub p_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_real, default_value = "1.5,2,5,inf")]
    pub q_grid: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct ExtremalArgs {
    #[arg(long, value_parser = parse_ineq)]
    pub ineq: InequalityId,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_real)]
    pub p: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub q: Option<f64>,
    #[arg(long, value_parser = parse_class, default_value = "segment")]
    pub class: PolyClass,
    #[arg(long, value_parser = parse_variant)]
    pub lemma_variant: Option<LemmaVariant>,
    #[arg(long, default_value_t = 50)]
    pub starts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
}

#[derive(Debug, Args)]
pub struct AsymptoteArgs {
    #[arg(long, default_value = "qn")]
    pub family: String,
    #[arg(long)]
    pub deriv: u8,
    #[arg(long, value_parser = parse_real)]
    pub p: f64,
    #[arg(long, value_parser = parse_range)]
    pub n_range: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureVariant {
    Segment,
    Halfdisk,
    Layercake,
    Lemma9,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long, value_enum)]
    pub variant: MeasureVariant,
    #[command(flatten)]
    pub poly: PolyArgs,
    #[arg(long, value_delimiter = ',', value_parser = parse_real, default_value = "0.01,0.1,0.5,1")]
    pub alpha: Vec<f64>,
    #[arg(long, value_parser = parse_real, default_value = "2")]
    pub q: f64,
    #[arg(long, value_parser = parse_variant)]
    pub lemma_variant: Option<LemmaVariant>,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long, value_parser = parse_constant)]
    pub name: ConstantName,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_parser = parse_real)]
    pub p: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub q: Option<f64>,
}

/// Real number or `inf`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "+inf" | "Inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| format!("not a real number or `inf`: {s:?}")),
    }
}

/// `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_root(s: &str) -> Result<Complex64, String> {
    let t = s.trim();
    let bad = || format!("not a real or complex number: {s:?}");
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

pub fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad range start in {s:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad range end in {s:?}"))?;
    if a == 0 || b < a {
        return Err(format!("range must satisfy 1 <= a <= b, got {s:?}"));
    }
    Ok((a, b))
}

fn parse_ineq(s: &str) -> Result<InequalityId, String> {
    InequalityId::parse(s).ok_or_else(|| format!("unknown inequality id {s:?}"))
}

fn parse_family(s: &str) -> Result<FamilyKind, String> {
    FamilyKind::parse(s).ok_or_else(|| {
        let all: Vec<&str> = FamilyKind::ALL.iter().map(|k| k.as_str()).collect();
        format!("unknown family {s:?} (expected one of {})", all.join(", "))
    })
}

fn parse_class(s: &str) -> Result<PolyClass, String> {
    match s {
        "segment" => Ok(PolyClass::Segment),
        "halfdisk" => Ok(PolyClass::HalfDisk),
        _ => Err(format!("unknown class {s:?} (expected segment or halfdisk)")),
    }
}

fn parse_variant(s: &str) -> Result<LemmaVariant, String> {
    LemmaVariant::parse(s).ok_or_else(|| format!("unknown lemma variant {s:?}"))
}

fn parse_constant(s: &str) -> Result<ConstantName, String> {
    ConstantName::parse(s).ok_or_else(|| format!("unknown constant {s:?}"))
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(turanlab::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<turanlab::Error> for CliError {
    fn from(e: turanlab::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Rendered output plus the exit status it implies.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub status: i32,
}

fn render<T: Serialize>(format: Format, value: &T, csv: impl FnOnce() -> csv::Result<String>) -> CliResult<String> {
    match format {
        Format::Json => to_canonical_json(value).map_err(|e| usage(format!("serialisation failed: {e}"))),
        Format::Csv => csv().map_err(|e| usage(format!("csv output failed: {e}"))),
    }
}

fn status(failed: bool) -> i32 {
    if failed {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    }
}

fn build_poly(args: &PolyArgs, seed: u64) -> CliResult<(RootPoly, Option<u64>)> {
    if let Some(roots) = &args.roots {
        if args.n.is_some() {
            return Err(usage("--n does not apply to --roots"));
        }
        let class = args.class.unwrap_or(if roots.iter().all(|z| z.im == 0.0) {
            PolyClass::Segment
        } else {
            PolyClass::HalfDisk
        });
        return Ok((make_root_poly(roots, class)?, None));
    }
    let kind = args.family.ok_or_else(|| usage("one of --family or --roots is required"))?;
    let n = args.n.ok_or_else(|| usage("--family needs --n"))?;
    let poly = generate(&FamilySpec::seeded(kind, n, seed))?;
    let poly = match args.class {
        Some(c) if c != poly.class() => poly.with_class(c)?,
        _ => poly,
    };
    Ok((poly, kind.is_random().then_some(seed)))
}

fn verify(cli: &Cli, a: &VerifyArgs) -> CliResult<Outcome> {
    let (poly, seed) = build_poly(&a.poly, cli.seed)?;
    let params = Params {
        p: a.p,
        q: a.q,
        variant: a.lemma_variant,
    };
    let mut report = check(a.ineq, &poly, params)?;
    report.seed = seed;
    let text = render(cli.format, &report, || reports_csv(std::slice::from_ref(&report)))?;
    Ok(Outcome {
        text,
        status: status(report.violated()),
    })
}

/// `all` expands to every id applicable to `class`.
fn parse_ids(raw: &[String], class: PolyClass) -> CliResult<Vec<InequalityId>> {
    let mut ids = Vec::new();
    for s in raw {
        if s.eq_ignore_ascii_case("all") {
            ids.extend(InequalityId::ALL.into_iter().filter(|id| id.accepts(class)));
        } else {
            ids.push(parse_ineq(s).map_err(CliError::Usage)?);
        }
    }
    ids.sort();
    ids.dedup();
    Ok(ids)
}

#[derive(Serialize)]
struct SweepDoc<'a> {
    config: SweepConfigDoc,
    reports: &'a [InequalityReport],
    errors: &'a [turanlab::inequalities::CellError],
    summaries: &'a [turanlab::inequalities::CellSummary],
    violations: usize,
    numerical_failures: usize,
}

#[derive(Serialize)]
struct SweepConfigDoc {
    ids: Vec<&'static str>,
    family: &'static str,
    n_range: [usize; 2],
    p_grid: Vec<String>,
    q_grid: Vec<String>,
    trials: usize,
    seed: u64,
}

fn run_sweep(cli: &Cli, a: &SweepArgs) -> CliResult<Outcome> {
    let cfg = SweepConfig {
        ids: parse_ids(&a.ineq, a.family.class())?,
        family: a.family,
        n_range: a.n_range,
        p_grid: a.p_grid.clone(),
        q_grid: a.q_grid.clone(),
        trials: a.trials,
        seed: cli.seed,
    };
    if let Some(id) = cfg.ids.iter().find(|id| !id.accepts(cfg.family.class())) {
        return Err(usage(format!("{id} does not apply to {} polynomials", cfg.family.class())));
    }
    let out = sweep(&cfg)?;
    let violations = out.violations();
    let numerical_failures = out.errors.iter().filter(|e| e.numerical).count();
    let doc = SweepDoc {
        config: SweepConfigDoc {
            ids: cfg.ids.iter().map(|id| id.as_str()).collect(),
            family: cfg.family.as_str(),
            n_range: [cfg.n_range.0, cfg.n_range.1],
            p_grid: cfg.p_grid.iter().map(|&p| fmt_float(p)).collect(),
            q_grid: cfg.q_grid.iter().map(|&q| fmt_float(q)).collect(),
            trials: cfg.trials,
            seed: cfg.seed,
        },
        reports: &out.reports,
        errors: &out.errors,
        summaries: &out.summaries,
        violations,
        numerical_failures,
    };
    let text = render(cli.format, &doc, || reports_csv(&out.reports))?;
    let status = if violations > 0 {
        EXIT_CHECK_FAILED
    } else if numerical_failures > 0 {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    };
    Ok(Outcome { text, status })
}

#[derive(Serialize)]
struct ExtremalDoc<'a> {
    config: &'a SearchConfig,
    result: &'a SearchResult,
    /// Soundness: the ratio of a proven inequality may not drop below one.
    pass: bool,
}

fn extremal(cli: &Cli, a: &ExtremalArgs) -> CliResult<Outcome> {
    let cfg = SearchConfig {
        inequality_id: a.ineq,
        n: a.n,
        p: a.p,
        q: a.q,
        variant: a.lemma_variant,
        class: a.class,
        starts: a.starts,
        max_iters_per_start: a.max_iters,
        seed: cli.seed,
    };
    let result = minimize_ratio(&cfg)?;
    let pass = a.ineq.is_statistic() || result.best_ratio >= 1.0 - 1e-6;
    let doc = ExtremalDoc {
        config: &cfg,
        result: &result,
        pass,
    };
    let text = render(cli.format, &doc, || {
        let rows: Vec<Vec<String>> = result
            .per_start_bests
            .iter()
            .enumerate()
            .map(|(i, r)| vec![i.to_string(), fmt_float(*r)])
            .collect();
        table_csv(&["start", "ratio"], &rows)
    })?;
    Ok(Outcome {
        text,
        status: status(!pass),
    })
}

fn asymptote(cli: &Cli, a: &AsymptoteArgs) -> CliResult<Outcome> {
    if a.family != "qn" {
        return Err(usage(format!("asymptote supports --family qn only, got {:?}", a.family)));
    }
    let ns: Vec<usize> = (a.n_range.0..=a.n_range.1).collect();
    if ns.len() < 2 {
        return Err(usage("asymptote needs at least two values of n"));
    }
    let fit = qn_asymptote(a.deriv, a.p, &ns)?;
    let text = render(cli.format, &fit, || {
        let rows: Vec<Vec<String>> = fit
            .points
            .iter()
            .map(|pt| vec![pt.n.to_string(), fmt_float(pt.value), fmt_float(pt.fit), fmt_float(pt.closed_form)])
            .collect();
        table_csv(&["n", "value", "fit", "closed_form"], &rows)
    })?;
    Ok(Outcome {
        text,
        status: status(!fit.pass),
    })
}

#[derive(Serialize)]
struct LayerCakeDoc {
    digest: String,
    n: usize,
    q: f64,
    lhs: f64,
    rhs: f64,
    rel_diff: f64,
    tol: f64,
    pass: bool,
}

fn measure_csv(ms: &[MeasureEstimate]) -> csv::Result<String> {
    let rows: Vec<Vec<String>> = ms
        .iter()
        .map(|m| {
            vec![
                fmt_float(m.alpha_or_delta),
                fmt_float(m.measure),
                fmt_float(m.bound),
                m.pass.to_string(),
                m.resolution.to_string(),
            ]
        })
        .collect();
    table_csv(&["alpha_or_delta", "measure", "bound", "pass", "resolution"], &rows)
}

fn measure(cli: &Cli, a: &MeasureArgs) -> CliResult<Outcome> {
    let (poly, seed) = build_poly(&a.poly, cli.seed)?;
    match a.variant {
        MeasureVariant::Segment | MeasureVariant::Halfdisk => {
            let kind = if a.variant == MeasureVariant::Segment {
                PolyClass::Segment
            } else {
                PolyClass::HalfDisk
            };
            let ms = sublevel_measures(&poly, kind, &a.alpha)?;
            let text = render(cli.format, &ms, || measure_csv(&ms))?;
            Ok(Outcome {
                text,
                status: status(ms.iter().any(|m| !m.pass)),
            })
        }
        MeasureVariant::Layercake => {
            let (lhs, rhs) = layer_cake_check(&poly, a.q)?;
            let rel_diff = (lhs - rhs).abs() / lhs;
            let doc = LayerCakeDoc {
                digest: poly.digest(),
                n: poly.degree(),
                q: a.q,
                lhs,
                rhs,
                rel_diff,
                tol: LAYER_CAKE_TOL,
                pass: rel_diff <= LAYER_CAKE_TOL,
            };
            let text = render(cli.format, &doc, || {
                table_csv(
                    &["n", "q", "lhs", "rhs", "rel_diff", "pass"],
                    &[vec![
                        doc.n.to_string(),
                        fmt_float(doc.q),
                        fmt_float(lhs),
                        fmt_float(rhs),
                        fmt_float(rel_diff),
                        doc.pass.to_string(),
                    ]],
                )
            })?;
            Ok(Outcome {
                text,
                status: status(!doc.pass),
            })
        }
        MeasureVariant::Lemma9 => {
            let variant = a.lemma_variant.unwrap_or(match poly.class() {
                PolyClass::Segment => LemmaVariant::SegmentK2,
                PolyClass::HalfDisk => LemmaVariant::HalfDiskK70e,
            });
            let mut report = lemma9_check(&poly, a.q, variant)?;
            report.seed = seed;
            let text = render(cli.format, &report, || reports_csv(std::slice::from_ref(&report)))?;
            Ok(Outcome {
                text,
                status: status(report.violated()),
            })
        }
    }
}

#[derive(Serialize)]
struct ConstantDoc {
    name: &'static str,
    n: Option<usize>,
    #[serde(with = "turanlab::serde_float::option")]
    p: Option<f64>,
    #[serde(with = "turanlab::serde_float::option")]
    q: Option<f64>,
    #[serde(with = "turanlab::serde_float")]
    value: f64,
}

fn constants(cli: &Cli, a: &ConstantsArgs) -> CliResult<Outcome> {
    let value = eval_constant(a.name, ConstantParams { n: a.n, p: a.p, q: a.q })?;
    let doc = ConstantDoc {
        name: a.name.as_str(),
        n: a.n,
        p: a.p,
        q: a.q,
        value,
    };
    let text = render(cli.format, &doc, || {
        table_csv(
            &["name", "n", "p", "q", "value"],
            &[vec![
                doc.name.to_string(),
                a.n.map(|n| n.to_string()).unwrap_or_default(),
                a.p.map(fmt_float).unwrap_or_default(),
                a.q.map(fmt_float).unwrap_or_default(),
                fmt_float(value),
            ]],
        )
    })?;
    Ok(Outcome { text, status: EXIT_OK })
}

/// Execute a parsed command line without touching stdout or files.
pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Verify(a) => verify(cli, a),
        Command::Sweep(a) => run_sweep(cli, a),
        Command::Extremal(a) => extremal(cli, a),
        Command::Asymptote(a) => asymptote(cli, a),
        Command::Measure(a) => measure(cli, a),
        Command::Constants(a) => constants(cli, a),
    }
}

/// Full program: parse, run, write output, return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be >= 1");
            return EXIT_USAGE;
        }
        // fails only if a pool already exists, in which case that one is used
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match execute(&cli) {
        Ok(out) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &out.text),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(out.text.as_bytes())
                }
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return EXIT_USAGE;
            }
            if out.status == EXIT_CHECK_FAILED {
                eprintln!("check failed");
            }
            out.status
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
