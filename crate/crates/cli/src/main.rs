//! `tropscat`: build, query, verify and plot scattering diagrams.

mod plot;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tropscat::affine::{AffineBase, RatPoint};
use tropscat::broken_lines::{nudge, wallcross_check, wallcross_samples, BandFamily, BrokenLine};
use tropscat::relative_gw::{bps_counts, relative_gw};
use tropscat::scalar::{fmt_rat, int, parse_rat, Rat};
use tropscat::scattering::{complete, consistency_check, CompletionOptions, ScatteringDiagram};
use tropscat::Error;

#[derive(Parser, Debug)]
#[command(name = "tropscat", version, about = "Exact scattering diagrams, broken lines and relative invariants")]
struct Cli {
    /// Worker threads; defaults to TROPSCAT_THREADS or the number of cores.
    #[arg(long, global = true, env = "TROPSCAT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Complete a diagram and write it as JSON.
    Scatter {
        #[command(flatten)]
        source: Source,
        /// Visit collision points in reverse order (the output must not change).
        #[arg(long)]
        reverse: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Superpotential and broken lines at a point.
    Potential {
        #[command(flatten)]
        source: Source,
        /// Endpoint as `x,y` with exact fractions.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        at: Option<RatPoint>,
        /// Replace a non-generic endpoint by a nearby generic one.
        #[arg(long)]
        nudge: bool,
        /// Include every broken line in the output.
        #[arg(long)]
        lines: bool,
        /// Sample a grid with this spacing and group the points by chamber.
        #[arg(long, value_parser = parse_rational)]
        sweep: Option<Rat>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also draw the broken lines over the diagram.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Relative invariants and integer counts by degree.
    Relgw {
        #[command(flatten)]
        source: Source,
        /// Largest degree; defaults to the largest one the order supports.
        #[arg(long)]
        max_degree: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Consistency and wall-crossing checks; exits 1 on any defect.
    Verify {
        #[command(flatten)]
        source: Source,
        /// Number of wall-crossing pairs to sample.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Grade of the broken lines used for wall crossing; defaults to the
        /// diagram order.
        #[arg(long)]
        line_order: Option<u32>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render the diagram as SVG.
    Plot {
        #[command(flatten)]
        source: Source,
        /// Overlay the broken lines ending at this point.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        at: Option<RatPoint>,
        #[arg(long, default_value_t = 800)]
        size: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Source {
    /// Diagram JSON written by `scatter`; overrides --base.
    diagram: Option<PathBuf>,
    /// `cps-p2`, `toy-two-wall` or the path of a base JSON file.
    #[arg(long, default_value = "cps-p2")]
    base: String,
    #[arg(long, default_value_t = 6)]
    order: u32,
    /// Half-width of the bounding box.
    #[arg(long, value_parser = parse_rational)]
    radius: Option<Rat>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_rational(s: &str) -> Result<Rat, String> {
    parse_rat(s.trim()).ok_or_else(|| format!("not a rational number: {s:?}"))
}

fn parse_point(s: &str) -> Result<RatPoint, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y: {s:?}"))?;
    Ok(RatPoint::new(parse_rational(x)?, parse_rational(y)?))
}

/// A failure with its exit code.
enum Failure {
    Usage(String),
    Domain(Error),
    Io(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if k == 0 {
            return report(Failure::Usage("--threads must be at least 1".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            return report(Failure::Io(e.into()));
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    let (code, body) = match f {
        Failure::Usage(msg) => (2, json!({"error": "Usage", "message": msg})),
        Failure::Domain(e) => {
            let mut body = json!({"error": e.kind(), "message": e.to_string()});
            if let Error::NonGenericEndpoint { suggestion, .. } = &e {
                body["suggestion"] = json!([fmt_rat(&suggestion.x), fmt_rat(&suggestion.y)]);
            }
            (1, body)
        }
        Failure::Io(e) => (1, json!({"error": "Io", "message": format!("{e:#}")})),
    };
    eprintln!("{body}");
    ExitCode::from(code)
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Scatter { source, reverse, output } => {
            let d = load(&source, reverse)?;
            emit(output.as_deref(), &(d.to_json() + "\n"))?;
        }
        Command::Potential { source, at, nudge: auto, lines, sweep, output, svg } => {
            let d = load(&source, false)?;
            let family = BandFamily::build(&d, d.order)?;
            let doc = if let Some(step) = sweep {
                sweep_chambers(&d, &family, &step)?
            } else {
                let u = at.ok_or_else(|| Failure::Usage("potential needs --at or --sweep".into()))?;
                let (point, lines_at) = lines_with_offset(&d, &family, &u, auto)?;
                if let Some(path) = &svg {
                    emit(Some(path), &plot::render(&d, &lines_at, 800))?;
                }
                potential_doc(&d, &family, &u, &point, lines.then_some(&lines_at))?
            };
            emit(output.as_deref(), &(serde_json::to_string_pretty(&doc).expect("json") + "\n"))?;
        }
        Command::Relgw { source, max_degree, format, output } => {
            let d = load(&source, false)?;
            let d_max = max_degree.unwrap_or((d.order / 3).max(1));
            for degree in 1..=d_max {
                relative_gw(&d, degree)?;
            }
            let table = bps_counts(&d, d_max)?;
            let text = match format {
                Format::Csv => table.to_csv(),
                Format::Json => table.to_json() + "\n",
            };
            emit(output.as_deref(), &text)?;
        }
        Command::Verify { source, samples, line_order, output } => {
            let d = load(&source, false)?;
            let defects = consistency_check(&d, d.order)?;
            let order = line_order.unwrap_or(d.order).min(d.order);
            let mut pairs = Vec::new();
            let mut failures = Vec::new();
            if samples > 0 {
                let family = BandFamily::build(&d, order)?;
                pairs = wallcross_samples(&d, &family, samples);
                for p in &pairs {
                    if !wallcross_check(&d, &family, &p.u1, &p.u2, p.ray)? {
                        failures.push(p.clone());
                    }
                }
            }
            let doc = json!({
                "order": d.order,
                "defects": defects.len(),
                "defect_points": defects.iter().map(|x| x.point.to_string()).collect::<Vec<_>>(),
                "wallcross_order": order,
                "wallcross_pairs": pairs.len(),
                "wallcross_failures": failures,
                "summary": format!("{} defects, {}/{} wall-crossing pairs fail", defects.len(), failures.len(), pairs.len()),
            });
            emit(output.as_deref(), &(serde_json::to_string_pretty(&doc).expect("json") + "\n"))?;
            if !defects.is_empty() || !failures.is_empty() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Plot { source, at, size, output } => {
            let d = load(&source, false)?;
            let lines = match at {
                Some(u) => {
                    let family = BandFamily::build(&d, d.order)?;
                    family.lines_at(&d, &u)?
                }
                None => Vec::new(),
            };
            emit(output.as_deref(), &plot::render(&d, &lines, size))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Loads a diagram file or builds and completes the requested base.
fn load(source: &Source, reverse: bool) -> Result<ScatteringDiagram, Failure> {
    if source.order == 0 {
        return Err(Failure::Usage("--order must be at least 1".into()));
    }
    if let Some(path) = &source.diagram {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(ScatteringDiagram::from_json(&text)?);
    }
    let radius = source.radius.clone().unwrap_or_else(|| int(8));
    let initial = match source.base.as_str() {
        "cps-p2" => ScatteringDiagram::initial(&AffineBase::cps_p2(), radius)?,
        "toy-two-wall" => ScatteringDiagram::toy_two_wall(radius)?,
        path => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading base {path}"))?;
            ScatteringDiagram::initial(&AffineBase::from_json(&text)?, radius)?
        }
    };
    let opts = CompletionOptions { reverse_points: reverse, ..CompletionOptions::default() };
    Ok(complete(&initial, source.order, &opts)?)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Broken lines at `u`, moved to a generic point first when `auto` is set.
fn lines_with_offset(
    d: &ScatteringDiagram,
    family: &BandFamily,
    u: &RatPoint,
    auto: bool,
) -> Result<(RatPoint, Vec<BrokenLine>), Failure> {
    match family.lines_at(d, u) {
        Ok(lines) => Ok((u.clone(), lines)),
        Err(Error::NonGenericEndpoint { .. } | Error::PointOnCut(_)) if auto => {
            let v = nudge(u);
            Ok((v.clone(), family.lines_at(d, &v)?))
        }
        Err(e) => Err(e.into()),
    }
}

fn terms_json(series: &tropscat::Series) -> BTreeMap<String, String> {
    series.terms().map(|(e, c)| (format!("{},{};{}", e.m.x, e.m.y, e.a), fmt_rat(c))).collect()
}

fn potential_doc(
    d: &ScatteringDiagram,
    family: &BandFamily,
    requested: &RatPoint,
    point: &RatPoint,
    lines: Option<&Vec<BrokenLine>>,
) -> Result<serde_json::Value, Failure> {
    let w = family.superpotential(d, point)?;
    let offset = point.sub(requested);
    let mut doc = json!({
        "point": [fmt_rat(&point.x), fmt_rat(&point.y)],
        "requested": [fmt_rat(&requested.x), fmt_rat(&requested.y)],
        "offset": [fmt_rat(&offset.x), fmt_rat(&offset.y)],
        "order": w.order,
        "terms": terms_json(&w.series),
        "outward": terms_json(&w.outward()),
    });
    if let Some(lines) = lines {
        doc["lines"] = serde_json::to_value(lines).expect("json");
    }
    Ok(doc)
}

/// Samples the grid `step * (i, j)` inside the box, nudged off the walls, and
/// groups the points with equal superpotential.
fn sweep_chambers(d: &ScatteringDiagram, family: &BandFamily, step: &Rat) -> Result<serde_json::Value, Failure> {
    use num_traits::Signed;
    if !step.is_positive() {
        return Err(Failure::Usage("--sweep needs a positive spacing".into()));
    }
    let n = (&d.radius / step).floor().to_integer();
    let n: i64 = n.try_into().map_err(|_| Failure::Usage("--sweep spacing too small".into()))?;
    let mut chambers: BTreeMap<String, (serde_json::Value, Vec<[String; 2]>)> = BTreeMap::new();
    for i in -n..=n {
        for j in -n..=n {
            let u = nudge(&RatPoint::new(step * int(i), step * int(j)));
            let Ok(w) = family.superpotential(d, &u) else { continue };
            let terms = terms_json(&w.series);
            let key = serde_json::to_string(&terms).expect("json");
            let entry = chambers.entry(key).or_insert_with(|| (json!(terms), Vec::new()));
            entry.1.push([fmt_rat(&u.x), fmt_rat(&u.y)]);
        }
    }
    let list: Vec<serde_json::Value> =
        chambers.into_values().map(|(terms, points)| json!({"terms": terms, "points": points})).collect();
    Ok(json!({"order": family.order, "spacing": fmt_rat(step), "chambers": list}))
}
