//! The `stacky` command line.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_traits::Zero;

use crate::config::Config;
use crate::counting::mu::mu_count;
use crate::counting::series::{geometric_samples, CountSeries};
use crate::counting::wps::wps_count;
use crate::counting::heights::HeightVariant;
use crate::error::{Error, Result};
use crate::fit::fit_exponents;
use crate::invariants::invariant_report;
use crate::sector::{age_c, RaisingFunction, StackDescriptor};
use crate::stackspec::{parse_raising, parse_stack_spec};
use crate::thin::{element_values, is_comprehensive, kluners_report, mu_subgroup_scan, subgroup_scan_bounded};
use crate::Q;

#[derive(Parser, Debug)]
#[command(name = "stacky", version, about = "Sectors, a/b-invariants, thin-morphism scans and point counts for stacks")]
struct Cli {
    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV.
    #[arg(long, global = true)]
    csv: bool,
    /// Omit the timestamp from JSON output and sidecars.
    #[arg(long, global = true)]
    no_meta: bool,
    /// TOML file with budgets, group bounds and worker count.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct StackArgs {
    /// Stack spec, e.g. "prod(wps(2,3),mu(2))".
    #[arg(long)]
    stack: String,
    /// Raising expression, e.g. "builtin:quasitoric+table:{1/2:1}".
    #[arg(long)]
    raising: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List sectors with ages, raising values and raised ages.
    Sectors(StackArgs),
    /// The a-, b-, rho- and j_c-invariants and the predicted growth.
    Invariants(StackArgs),
    /// Breaking verdicts for every nontrivial proper subgroup.
    ThinScan(StackArgs),
    /// The C3 wr C2 analysis: subgroups, twists and comprehensiveness.
    Kluners,
    /// Whether every minimal class generates the group.
    Comprehensive(StackArgs),
    /// Count rational points or torsors up to height B.
    Count(CountArgs),
    /// Fit log N = log C + alpha log B + beta log log B to a count series.
    Fit(FitArgs),
}

#[derive(Args, Debug)]
struct CountArgs {
    #[command(flatten)]
    stack: StackArgs,
    /// Explicit comma-separated bounds; overrides the geometric samples.
    #[arg(long, value_delimiter = ',')]
    samples: Vec<u64>,
    #[arg(long, default_value_t = 1000)]
    start: u64,
    #[arg(long, default_value_t = 2.0)]
    ratio: f64,
    #[arg(long, default_value_t = 16)]
    points: usize,
    /// Write the CSV here and the sidecar to <FILE>.json.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// CSV with `B,N` rows.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long)]
    fix_alpha: Option<f64>,
    /// Ignore rows with B below this value.
    #[arg(long)]
    min_b: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

struct Ctx {
    format: Format,
    no_meta: bool,
    config: Config,
}

/// Runs the command line; returns the exit status (0 ok, 1 domain error, 2 usage error).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        Format::Text
    };
    let ctx = Ctx {
        format,
        no_meta: cli.no_meta,
        config,
    };
    let mut buf = Vec::new();
    match ctx.config.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            pool.install(|| dispatch(&ctx, cli.command, &mut buf))?
        }
        None => dispatch(&ctx, cli.command, &mut buf)?,
    }
    out.write_all(&buf)?;
    Ok(())
}

fn dispatch(ctx: &Ctx, command: Command, out: &mut Vec<u8>) -> Result<()> {
    match command {
        Command::Sectors(a) => sectors(ctx, &a, out),
        Command::Invariants(a) => invariants(ctx, &a, out),
        Command::ThinScan(a) => thin_scan(ctx, &a, out),
        Command::Kluners => kluners(ctx, out),
        Command::Comprehensive(a) => comprehensive(ctx, &a, out),
        Command::Count(a) => count(ctx, &a, out),
        Command::Fit(a) => fit(ctx, &a, out),
    }
}

fn load(ctx: &Ctx, a: &StackArgs) -> Result<(StackDescriptor, Option<RaisingFunction>)> {
    let stack = parse_stack_spec(&a.stack)?.to_descriptor(ctx.config.order_bound)?;
    let c = match &a.raising {
        Some(text) => Some(parse_raising(text)?.evaluate(&stack)?),
        None => None,
    };
    Ok((stack, c))
}

fn load_raised(ctx: &Ctx, a: &StackArgs) -> Result<(StackDescriptor, RaisingFunction)> {
    match load(ctx, a)? {
        (stack, Some(c)) => Ok((stack, c)),
        (_, None) => Err(Error::InvalidArgument("--raising is required".into())),
    }
}

fn with_meta(ctx: &Ctx, mut v: serde_json::Value) -> serde_json::Value {
    if !ctx.no_meta {
        if let Some(obj) = v.as_object_mut() {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            obj.insert(
                "meta".into(),
                serde_json::json!({ "version": env!("CARGO_PKG_VERSION"), "generated_at": now }),
            );
        }
    }
    v
}

fn emit_json(out: &mut Vec<u8>, v: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn sectors(ctx: &Ctx, a: &StackArgs, out: &mut Vec<u8>) -> Result<()> {
    let (stack, c) = load(ctx, a)?;
    let c = match c {
        Some(c) => c,
        None => RaisingFunction::zero(&stack)?,
    };
    let rows = age_c(&stack, &c)?;
    match ctx.format {
        Format::Json => {
            let list: Vec<_> = rows
                .iter()
                .map(|(s, ac)| {
                    serde_json::json!({
                        "sector": s.label.to_string(),
                        "age": s.age.to_string(),
                        "c": (ac - s.age).to_string(),
                        "age_c": ac.to_string(),
                        "junior": *ac == Q::from_integer(1),
                    })
                })
                .collect();
            emit_json(out, &with_meta(ctx, serde_json::json!({ "stack": stack.to_string(), "sectors": list })))
        }
        Format::Csv => {
            writeln!(out, "sector,age,c,age_c")?;
            for (s, ac) in &rows {
                writeln!(out, "\"{}\",{},{},{}", s.label, s.age, ac - s.age, ac)?;
            }
            Ok(())
        }
        Format::Text => {
            let cells: Vec<[String; 4]> = rows
                .iter()
                .map(|(s, ac)| [s.label.to_string(), s.age.to_string(), (ac - s.age).to_string(), ac.to_string()])
                .collect();
            let head = ["sector", "age", "c", "age_c"];
            let width: Vec<usize> = (0..4)
                .map(|k| cells.iter().map(|r| r[k].len()).chain([head[k].len()]).max().unwrap_or(0))
                .collect();
            writeln!(out, "{}", stack)?;
            let line = |r: [&str; 4]| {
                (0..4)
                    .map(|k| format!("{:<w$}", r[k], w = width[k]))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            writeln!(out, "{}", line(head))?;
            for r in &cells {
                writeln!(out, "{}", line([&r[0], &r[1], &r[2], &r[3]]))?;
            }
            Ok(())
        }
    }
}

fn invariants(ctx: &Ctx, a: &StackArgs, out: &mut Vec<u8>) -> Result<()> {
    let (stack, c) = load_raised(ctx, a)?;
    let r = invariant_report(&stack, &c)?;
    match ctx.format {
        Format::Json => emit_json(out, &with_meta(ctx, r.to_json())),
        Format::Csv => {
            writeln!(out, "a,b,rho,j_c,adequate,prediction")?;
            writeln!(out, "{},{},{},{},{},{}", r.a, r.b, r.rho, r.j_c, r.adequate, r.prediction())?;
            Ok(())
        }
        Format::Text => {
            writeln!(out, "a = {}", r.a)?;
            writeln!(out, "b = {}", r.b)?;
            writeln!(out, "rho = {}", r.rho)?;
            writeln!(out, "j_c = {}", r.j_c)?;
            writeln!(out, "adequate = {}", r.adequate)?;
            writeln!(out, "N(B) ~ {}", r.prediction())?;
            Ok(())
        }
    }
}

fn thin_scan(ctx: &Ctx, a: &StackArgs, out: &mut Vec<u8>) -> Result<()> {
    let (stack, c) = load_raised(ctx, a)?;
    let verdicts = match &stack {
        StackDescriptor::BG { group, field } => subgroup_scan_bounded(group, field, &c, ctx.config.subgroup_bound)?,
        StackDescriptor::Mu(l) => mu_subgroup_scan(*l, &c)?,
        _ => return Err(Error::Unsupported("thin-scan needs a bg or mu stack".into())),
    };
    match ctx.format {
        Format::Csv => {
            writeln!(out, "source,order,a,b,verdict")?;
            for v in &verdicts {
                writeln!(out, "\"{}\",{},{},{},{}", v.source, v.order, v.a_sub, v.b_sub, v.verdict)?;
            }
        }
        _ => {
            // One JSON record per line.
            for v in &verdicts {
                writeln!(out, "{}", v.to_json())?;
            }
        }
    }
    Ok(())
}

fn kluners(ctx: &Ctx, out: &mut Vec<u8>) -> Result<()> {
    let r = kluners_report()?;
    match ctx.format {
        Format::Text => {
            writeln!(out, "G = C3 wr C2 in S6, c = index, over Q")?;
            writeln!(out, "(a, b) = ({}, {})", r.a_g, r.b_g)?;
            let w = r.subgroup_verdicts.iter().chain(&r.twist_verdicts).map(|v| v.source.len()).max().unwrap_or(0);
            writeln!(out, "constant subgroups:")?;
            for v in &r.subgroup_verdicts {
                writeln!(out, "  {:<w$}  order {:<2}  (a, b) = ({}, {})  {}", v.source, v.order, v.a_sub, v.b_sub, v.verdict)?;
            }
            writeln!(out, "twists of N = <(1,2,3),(4,5,6)>:")?;
            for v in &r.twist_verdicts {
                writeln!(out, "  {:<w$}  (a, b) = ({}, {})  {}", v.source, v.a_sub, v.b_sub, v.verdict)?;
            }
            match &r.comprehensiveness.witness {
                None => writeln!(out, "comprehensive: yes")?,
                Some((members, order)) => {
                    let m: Vec<String> = members.iter().map(ToString::to_string).collect();
                    writeln!(out, "comprehensive: no, class {{{}}} has normal closure of order {order}", m.join(", "))?;
                }
            }
            Ok(())
        }
        _ => emit_json(out, &with_meta(ctx, r.to_json())),
    }
}

fn comprehensive(ctx: &Ctx, a: &StackArgs, out: &mut Vec<u8>) -> Result<()> {
    let (stack, c) = load_raised(ctx, a)?;
    let StackDescriptor::BG { group, .. } = &stack else {
        return Err(Error::Unsupported("comprehensive needs a bg stack".into()));
    };
    let values = element_values(&stack, &c)?;
    let lookup = |g: &crate::perm::GroupElement| values.get(g).copied().unwrap_or_else(Q::zero);
    let r = is_comprehensive(group, &lookup)?;
    let witness = r.witness.as_ref().map(|(members, order)| {
        serde_json::json!({
            "class": members.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "normal_closure_order": order,
        })
    });
    match ctx.format {
        Format::Text => {
            writeln!(out, "comprehensive: {}", if r.comprehensive { "yes" } else { "no" })?;
            if let Some((members, order)) = &r.witness {
                let m: Vec<String> = members.iter().map(ToString::to_string).collect();
                writeln!(out, "witness class {{{}}}, normal closure of order {order}", m.join(", "))?;
            }
            Ok(())
        }
        _ => emit_json(
            out,
            &with_meta(ctx, serde_json::json!({ "comprehensive": r.comprehensive, "witness": witness })),
        ),
    }
}

/// The height variant a raising function on `wps(a)` selects.
fn wps_variant(weights: &[u64], c: &Option<RaisingFunction>, stack: &StackDescriptor) -> Result<HeightVariant> {
    let Some(c) = c else {
        return Ok(HeightVariant::QuasiToric);
    };
    if *c == RaisingFunction::quasi_toric(weights)? {
        Ok(HeightVariant::QuasiToric)
    } else if *c == RaisingFunction::zero(stack)? {
        Ok(HeightVariant::Stable)
    } else {
        Err(Error::Unsupported(
            "wps counting supports builtin:quasitoric and builtin:zero only".into(),
        ))
    }
}

fn count(ctx: &Ctx, a: &CountArgs, out: &mut Vec<u8>) -> Result<()> {
    let (stack, c) = load(ctx, &a.stack)?;
    let samples = if a.samples.is_empty() {
        if !a.ratio.is_finite() || a.ratio <= 1.0 || a.points == 0 || a.start == 0 {
            return Err(Error::InvalidArgument("need --start >= 1, --ratio > 1 and --points >= 1".into()));
        }
        geometric_samples(a.start, a.ratio, a.points)
    } else {
        a.samples.clone()
    };
    let budget = &ctx.config.budget;
    let series: CountSeries = match &stack {
        StackDescriptor::Mu(l) => {
            let c = c.ok_or_else(|| Error::InvalidArgument("--raising is required for mu".into()))?;
            mu_count(*l, &c, &samples, budget)?
        }
        StackDescriptor::Wps(w) => wps_count(w, wps_variant(w, &c, &stack)?, &samples, budget)?,
        _ => return Err(Error::Unsupported("count supports mu(l) and wps(...) stacks".into())),
    };
    let sidecar = with_meta(ctx, series.sidecar_json());
    match &a.output {
        Some(path) => {
            std::fs::write(path, series.to_csv()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let mut side = path.clone().into_os_string();
            side.push(".json");
            let text = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Io(e.to_string()))?;
            std::fs::write(&side, text + "\n").map_err(|e| Error::Io(format!("{side:?}: {e}")))?;
            if ctx.format == Format::Json {
                emit_json(out, &sidecar)?;
            }
        }
        None if ctx.format == Format::Json => {
            let mut v = sidecar;
            v["rows"] = series.samples.iter().map(|(b, n)| serde_json::json!([b, n])).collect();
            emit_json(out, &v)?;
        }
        None => out.write_all(series.to_csv().as_bytes())?,
    }
    Ok(())
}

fn fit(ctx: &Ctx, a: &FitArgs, out: &mut Vec<u8>) -> Result<()> {
    let text = std::fs::read_to_string(&a.input).map_err(|e| Error::Io(format!("{}: {e}", a.input.display())))?;
    let rows: Vec<(f64, f64)> = CountSeries::from_csv(&text)?
        .into_iter()
        .filter(|&(b, _)| a.min_b.is_none_or(|m| b >= m))
        .collect();
    let r = fit_exponents(&rows, a.fix_alpha)?;
    match ctx.format {
        Format::Csv => {
            writeln!(out, "alpha,beta,constant,residual")?;
            writeln!(out, "{},{},{},{}", r.alpha, r.log_exponent, r.constant, r.residual)?;
            Ok(())
        }
        _ => {
            let v = serde_json::to_value(&r).map_err(|e| Error::Io(e.to_string()))?;
            emit_json(out, &with_meta(ctx, v))
        }
    }
}
