use std::f64::consts::PI;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use geodesic_coder::boundary::{Attractor, Partition, Rect};
use geodesic_coder::coding::{
    arithmetic_code, canonical_rotation, code_continuity_probe, geometric_code, phi_inverse,
    CodingSequence,
};
use geodesic_coder::duality::dual_check;
use geodesic_coder::markov::{markov_report, report_to_dot};
use geodesic_coder::measure::{entropy_report, EntropyReport};
use geodesic_coder::moebius::{wrap, Geodesic, TWO_PI};
use geodesic_coder::surface::Surface;
use geodesic_coder::Error;

#[derive(Parser)]
#[command(
    name = "geodesic-coder",
    version,
    about = "Boundary maps, attractors, and geodesic codes on genus-g surfaces"
)]
struct Cli {
    /// Angular tolerance override (equivalent to GEODESIC_CODER_TOL)
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the output to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
    Dot,
}

#[derive(Args)]
struct Common {
    /// Surface genus (polygon has 8g-4 sides)
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=16))]
    genus: u8,
    /// Partition: midpoints | product-fixed-points | mixed | endpoints:<P/Q word> | custom
    #[arg(long, default_value = "midpoints")]
    partition: String,
    /// Partition points for `--partition custom`, comma-separated angles
    #[arg(long)]
    points: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Vertex, boundary-point, and index tables of the fundamental polygon
    Surface {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Rectangles of the natural-extension attractor
    Attractor {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Arithmetic and geometric digit sequences of a geodesic
    Code {
        #[command(flatten)]
        common: Common,
        /// Code the axis of this generator word, e.g. 2,8,5
        #[arg(long, conflicts_with_all = ["u", "w"])]
        axis: Option<String>,
        /// Backward endpoint angle (radians or pi*p/q)
        #[arg(long, requires = "w")]
        u: Option<String>,
        /// Forward endpoint angle (radians or pi*p/q)
        #[arg(long, requires = "u")]
        w: Option<String>,
        #[arg(long, default_value = "both")]
        flavor: String,
        #[arg(long, default_value_t = 12)]
        past: usize,
        #[arg(long, default_value_t = 12)]
        future: usize,
    },
    /// Pull a geodesic into the attractor, reporting the reducing word
    Reduce {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        u: String,
        #[arg(long)]
        w: String,
        #[arg(long, default_value_t = 64)]
        max_steps: usize,
    },
    /// Canonical repetends and length of the closed geodesic of a word
    Cycles {
        #[command(flatten)]
        common: Common,
        /// Generator word, e.g. 2,8,5
        #[arg(long)]
        axis: String,
    },
    /// Markov condition, transition graph, and mixing report
    Markov {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Duality verdict between two partitions
    Dual {
        /// First partition spec
        #[arg(long)]
        a: String,
        /// Second partition spec
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=16))]
        genus: u8,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[arg(long, default_value_t = 5)]
        seed: u64,
    },
    /// Invariant mass two ways, entropy, and the mean-return check
    Entropy {
        #[command(flatten)]
        common: Common,
        /// Monte Carlo sample count (accepts 1e7 notation)
        #[arg(long, default_value = "1e6")]
        samples: String,
        #[arg(long, default_value_t = 20_000)]
        return_samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Decay of the cross-section diameter of shared digit windows
    ProbeContinuity {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        m_max: usize,
        #[arg(long, default_value_t = 160)]
        bases: usize,
        #[arg(long, default_value_t = 6)]
        candidates: usize,
        #[arg(long, default_value_t = 3)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (sign, rest) = match t.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    let num = |x: &str| -> Result<f64, String> {
        x.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number in angle: {x:?}"))
    };
    let val = if let Some(r) = rest.strip_prefix("pi") {
        if r.is_empty() {
            PI
        } else if let Some(frac) = r.strip_prefix('*') {
            match frac.split('/').collect::<Vec<_>>().as_slice() {
                [p] => num(p)? * PI,
                [p, q] => num(p)? * PI / num(q)?,
                _ => return Err(format!("bad angle: {s:?}")),
            }
        } else if let Some(q) = r.strip_prefix('/') {
            PI / num(q)?
        } else {
            return Err(format!("bad angle: {s:?} (use radians or pi*p/q)"));
        }
    } else {
        num(rest)?
    };
    Ok(wrap(sign * val))
}

fn parse_word(s: &str, n: usize) -> Result<Vec<usize>, CmdError> {
    let mut word = Vec::new();
    for part in s.split(',') {
        let k: usize = part
            .trim()
            .parse()
            .map_err(|_| CmdError::Usage(format!("bad generator index {part:?}")))?;
        if k < 1 || k > n {
            return Err(CmdError::Lib(Error::IndexOutOfRange(k, n)));
        }
        word.push(k);
    }
    if word.is_empty() {
        return Err(CmdError::Usage("empty word".into()));
    }
    Ok(word)
}

enum CmdError {
    Usage(String),
    Lib(Error),
    Io(std::io::Error),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Lib(e)
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e)
    }
}

fn exit_code(e: &CmdError) -> ExitCode {
    match e {
        CmdError::Usage(_) => ExitCode::from(2),
        CmdError::Io(_) => ExitCode::from(3),
        CmdError::Lib(err) => match err {
            Error::IndexOutOfRange(..)
            | Error::InvalidPattern(..)
            | Error::OrientationMismatch
            | Error::IsRotation
            | Error::NotHyperbolic(..) => ExitCode::from(2),
            _ => ExitCode::from(3),
        },
    }
}

fn describe(e: &CmdError) -> String {
    match e {
        CmdError::Usage(m) => m.clone(),
        CmdError::Lib(err) => err.to_string(),
        CmdError::Io(err) => err.to_string(),
    }
}

fn build_partition(s: &Surface, spec: &str, points: &Option<String>) -> Result<Partition, CmdError> {
    let custom: Option<Vec<f64>> = match points {
        None => None,
        Some(text) => Some(
            text.split(',')
                .map(|p| parse_angle(p).map_err(CmdError::Usage))
                .collect::<Result<Vec<f64>, CmdError>>()?,
        ),
    };
    Ok(Partition::from_spec(s, spec, custom.as_deref())?)
}

fn emit(cli_out: &Option<std::path::PathBuf>, text: &str) -> Result<(), CmdError> {
    use std::io::Write;
    match cli_out {
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => Ok(other?),
            }
        }
        Some(path) => Ok(std::fs::write(path, format!("{text}\n"))?),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serialization cannot fail")
}

#[derive(Serialize)]
struct SurfaceTables {
    genus: usize,
    n: usize,
    circumradius: f64,
    vertex_radius: f64,
    side_center_distance: f64,
    side_radius: f64,
    vertices: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    m: Vec<f64>,
    sigma: Vec<usize>,
    rho: Vec<usize>,
    theta: Vec<usize>,
    tau: Vec<usize>,
    relation_error: f64,
}

fn surface_tables(s: &Surface) -> SurfaceTables {
    let idx = 1..=s.n;
    SurfaceTables {
        genus: s.genus,
        n: s.n,
        circumradius: s.circumradius,
        vertex_radius: s.vertex_radius,
        side_center_distance: s.side_center_dist,
        side_radius: s.side_radius,
        vertices: idx.clone().map(|i| s.vertex_angle(i)).collect(),
        p: idx.clone().map(|i| s.p(i)).collect(),
        q: idx.clone().map(|i| s.q(i)).collect(),
        m: idx.clone().map(|i| s.midpoint(i)).collect(),
        sigma: idx.clone().map(|i| s.sigma(i)).collect(),
        rho: idx.clone().map(|i| s.rho(i)).collect(),
        theta: idx.clone().map(|i| s.theta(i)).collect(),
        tau: idx.clone().map(|i| s.tau(i)).collect(),
        relation_error: s.relation_error(),
    }
}

fn surface_csv(t: &SurfaceTables) -> String {
    let mut out = String::from("i,vertex,p,q,m,sigma,rho,theta,tau\n");
    for k in 0..t.n {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            k + 1,
            t.vertices[k],
            t.p[k],
            t.q[k],
            t.m[k],
            t.sigma[k],
            t.rho[k],
            t.theta[k],
            t.tau[k]
        ));
    }
    out.pop();
    out
}

/// Side of the drawn diagonal for the rectangle's center, both angles
/// taken in [0, 2pi).
fn component_of(r: &Rect) -> &'static str {
    let uc = wrap(r.u_lo + 0.5 * r.u_len());
    let wc = wrap(r.w_lo + 0.5 * r.w_len());
    if wc > uc {
        "upper"
    } else {
        "lower"
    }
}

fn attractor_csv(att: &Attractor) -> String {
    let mut out = String::from("u_lo,u_hi,w_lo,w_hi,component\n");
    for r in att.rects() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.u_lo,
            r.u_hi,
            r.w_lo,
            r.w_hi,
            component_of(r)
        ));
    }
    out.pop();
    out
}

fn split_arc(lo: f64, len: f64) -> Vec<(f64, f64)> {
    let lo = wrap(lo);
    if lo + len <= TWO_PI + 1e-12 {
        vec![(lo, (lo + len).min(TWO_PI))]
    } else {
        vec![(lo, TWO_PI), (0.0, lo + len - TWO_PI)]
    }
}

fn attractor_svg(att: &Attractor) -> String {
    let size = 640.0;
    let margin = 30.0;
    let px = |u: f64| margin + u / TWO_PI * size;
    let py = |w: f64| margin + size - w / TWO_PI * size;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {0} {0}\">\n",
        size + 2.0 * margin
    ));
    out.push_str(&format!(
        "  <rect x=\"{m}\" y=\"{m}\" width=\"{s}\" height=\"{s}\" fill=\"white\" stroke=\"black\"/>\n",
        m = margin,
        s = size
    ));
    for r in att.rects() {
        for &(ulo, uhi) in &split_arc(r.u_lo, r.u_len()) {
            for &(wlo, whi) in &split_arc(r.w_lo, r.w_len()) {
                let upper = wrap(0.5 * (wlo + whi)) > wrap(0.5 * (ulo + uhi));
                let fill = if upper { "#3c6fb4" } else { "#b4543c" };
                out.push_str(&format!(
                    "  <rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"{}\" fill-opacity=\"0.85\"/>\n",
                    px(ulo),
                    py(whi),
                    (uhi - ulo) / TWO_PI * size,
                    (whi - wlo) / TWO_PI * size,
                    fill
                ));
            }
        }
    }
    out.push_str(&format!(
        "  <line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n",
        px(0.0),
        py(0.0),
        px(TWO_PI),
        py(TWO_PI)
    ));
    out.push_str(&format!(
        "  <text x=\"{:.3}\" y=\"{:.3}\" font-size=\"14\">u</text>\n",
        margin + size / 2.0,
        margin + size + 20.0
    ));
    out.push_str(&format!(
        "  <text x=\"{:.3}\" y=\"{:.3}\" font-size=\"14\">w</text>\n",
        margin - 18.0,
        margin + size / 2.0
    ));
    out.push_str("</svg>");
    out
}

#[derive(Serialize)]
struct ReduceInfo {
    steps: usize,
    /// Branch strips in the order applied.
    strips: Vec<usize>,
    /// The same letters as a composable word, leftmost applied last.
    word: Vec<usize>,
}

#[derive(Serialize)]
struct CodeOutput {
    genus: usize,
    partition: String,
    input_u: f64,
    input_w: f64,
    reduced_u: f64,
    reduced_w: f64,
    reduction: Option<ReduceInfo>,
    arithmetic: Option<CodingSequence>,
    geometric: Option<CodingSequence>,
}

#[derive(Serialize)]
struct CycleOutput {
    word: Vec<usize>,
    trace: f64,
    length: f64,
    axis_u: f64,
    axis_w: f64,
    period: usize,
    arithmetic_repetend: Vec<usize>,
    geometric_repetend: Vec<usize>,
}

#[derive(Serialize)]
struct EntropyOutput {
    #[serde(flatten)]
    report: EntropyReport,
    /// Monte Carlo deviation from the closed form in sigma units.
    mc_z: f64,
}

#[derive(Serialize)]
struct ProbeRow {
    m: usize,
    diameter: f64,
    ratio: Option<f64>,
}

fn geodesic_codes(
    att: &Attractor,
    g: &Geodesic,
    flavor: &str,
    past: usize,
    future: usize,
) -> Result<(Option<CodingSequence>, Option<CodingSequence>), CmdError> {
    let s = att.surface();
    let want_a = flavor == "both" || flavor == "arithmetic";
    let want_g = flavor == "both" || flavor == "geometric";
    if !(want_a || want_g) {
        return Err(CmdError::Usage(format!(
            "unknown flavor {flavor:?} (arithmetic | geometric | both)"
        )));
    }
    let ar = if want_a {
        Some(arithmetic_code(att, g, past, future)?)
    } else {
        None
    };
    let ge = if want_g {
        let gg = if s.meets_domain(g.u, g.w) {
            *g
        } else {
            let (map, _) = phi_inverse(att, g.u, g.w)?;
            Geodesic {
                u: map.apply_angle(g.u),
                w: map.apply_angle(g.w),
            }
        };
        Some(geometric_code(s, &gg, past, future)?)
    } else {
        None
    };
    Ok((ar, ge))
}

fn run(cli: &Cli) -> Result<(), CmdError> {
    match &cli.cmd {
        Cmd::Surface { common, format } => {
            let s = Surface::build(common.genus as usize)?;
            let tables = surface_tables(&s);
            let text = match format {
                Format::Json => json(&tables),
                Format::Csv => surface_csv(&tables),
                _ => return Err(CmdError::Usage("surface supports json or csv".into())),
            };
            emit(&cli.out, &text)
        }
        Cmd::Attractor { common, format } => {
            let s = Surface::build(common.genus as usize)?;
            let part = build_partition(&s, &common.partition, &common.points)?;
            let att = Attractor::build(&s, &part)?;
            let text = match format {
                Format::Csv => attractor_csv(&att),
                Format::Svg => attractor_svg(&att),
                Format::Json => json(&att.rects()),
                Format::Dot => {
                    return Err(CmdError::Usage("attractor supports csv, svg, or json".into()))
                }
            };
            emit(&cli.out, &text)
        }
        Cmd::Code {
            common,
            axis,
            u,
            w,
            flavor,
            past,
            future,
        } => {
            let s = Surface::build(common.genus as usize)?;
            let part = build_partition(&s, &common.partition, &common.points)?;
            let att = Attractor::build(&s, &part)?;
            let g0 = match (axis, u, w) {
                (Some(word), None, None) => s.axis(&parse_word(word, s.n)?)?,
                (None, Some(us), Some(ws)) => Geodesic {
                    u: parse_angle(us).map_err(CmdError::Usage)?,
                    w: parse_angle(ws).map_err(CmdError::Usage)?,
                },
                _ => {
                    return Err(CmdError::Usage(
                        "give either --axis or both --u and --w".into(),
                    ))
                }
            };
            let (g, reduction) = if att.is_reduced(&g0) {
                (g0, None)
            } else {
                let out = att.reduce(&g0, 64)?;
                let mut word = out.strips.clone();
                word.reverse();
                (
                    out.geodesic,
                    Some(ReduceInfo {
                        steps: out.steps,
                        strips: out.strips,
                        word,
                    }),
                )
            };
            let (ar, ge) = geodesic_codes(&att, &g, flavor, *past, *future)?;
            let out = CodeOutput {
                genus: s.genus,
                partition: part.kind.to_string(),
                input_u: g0.u,
                input_w: g0.w,
                reduced_u: g.u,
                reduced_w: g.w,
                reduction,
                arithmetic: ar,
                geometric: ge,
            };
            emit(&cli.out, &json(&out))
        }
        Cmd::Reduce {
            common,
            u,
            w,
            max_steps,
        } => {
            let s = Surface::build(common.genus as usize)?;
            let part = build_partition(&s, &common.partition, &common.points)?;
            let att = Attractor::build(&s, &part)?;
            let g = Geodesic {
                u: parse_angle(u).map_err(CmdError::Usage)?,
                w: parse_angle(w).map_err(CmdError::Usage)?,
            };
            let out = att.reduce(&g, *max_steps)?;
            let mut word = out.strips.clone();
            word.reverse();
            #[derive(Serialize)]
            struct ReduceOutput {
                input_u: f64,
                input_w: f64,
                reduced_u: f64,
                reduced_w: f64,
                #[serde(flatten)]
                info: ReduceInfo,
            }
            emit(
                &cli.out,
                &json(&ReduceOutput {
                    input_u: g.u,
                    input_w: g.w,
                    reduced_u: out.geodesic.u,
                    reduced_w: out.geodesic.w,
                    info: ReduceInfo {
                        steps: out.steps,
                        strips: out.strips,
                        word,
                    },
                }),
            )
        }
        Cmd::Cycles { common, axis } => {
            let s = Surface::build(common.genus as usize)?;
            let part = build_partition(&s, &common.partition, &common.points)?;
            let att = Attractor::build(&s, &part)?;
            let word = parse_word(axis, s.n)?;
            let map = s.word(&word);
            let g0 = s.axis(&word)?;
            let g = if att.is_reduced(&g0) {
                g0
            } else {
                att.reduce(&g0, 64)?.geodesic
            };
            let horizon = 4 * word.len() + 8;
            let (ar, ge) = geodesic_codes(&att, &g, "both", 0, horizon)?;
            let (ar, ge) = (ar.unwrap(), ge.unwrap());
            let period = ar
                .period
                .or(ge.period)
                .ok_or_else(|| {
                    CmdError::Lib(Error::NumericallySingular(
                        "orbit did not close within the horizon".into(),
                    ))
                })?;
            let tr = map.trace().abs();
            let out = CycleOutput {
                word,
                trace: map.trace(),
                length: 2.0 * (tr / 2.0).acosh(),
                axis_u: g0.u,
                axis_w: g0.w,
                period,
                arithmetic_repetend: canonical_rotation(&ar.future[..period.min(ar.future.len())]),
                geometric_repetend: canonical_rotation(
                    &ge.future[..ge.period.unwrap_or(period).min(ge.future.len())],
                ),
            };
            emit(&cli.out, &json(&out))
        }
        Cmd::Markov { common, format } => {
            let s = Surface::build(common.genus as usize)?;
            let part = build_partition(&s, &common.partition, &common.points)?;
            let att = Attractor::build(&s, &part)?;
            let rep = markov_report(&att);
            let text = match format {
                Format::Json => json(&rep),
                Format::Dot => report_to_dot(&att, &rep),
                _ => return Err(CmdError::Usage("markov supports json or dot".into())),
            };
            emit(&cli.out, &text)?;
            if !rep.markov {
                return Err(CmdError::Lib(Error::NotMarkov(format!(
                    "endpoint misalignment {:.3e}, {} violations",
                    rep.endpoint_worst,
                    rep.violations.len()
                ))));
            }
            Ok(())
        }
        Cmd::Dual {
            a,
            b,
            genus,
            samples,
            seed,
        } => {
            let s = Surface::build(*genus as usize)?;
            let pa = build_partition(&s, a, &None)?;
            let pb = build_partition(&s, b, &None)?;
            let aa = Attractor::build(&s, &pa)?;
            let ab = Attractor::build(&s, &pb)?;
            let verdict = dual_check(&aa, &ab, *samples, *seed);
            emit(&cli.out, &json(&verdict))
        }
        Cmd::Entropy {
            common,
            samples,
            return_samples,
            seed,
        } => {
            let s = Surface::build(common.genus as usize)?;
            let part = build_partition(&s, &common.partition, &common.points)?;
            let att = Attractor::build(&s, &part)?;
            let n: f64 = samples
                .parse()
                .map_err(|_| CmdError::Usage(format!("bad sample count {samples:?}")))?;
            if !(n.is_finite() && n >= 1.0 && n <= 1e9) {
                return Err(CmdError::Usage("sample count out of range".into()));
            }
            let report = entropy_report(&att, n as usize, *return_samples, *seed)?;
            let mc_z = (report.mass_monte_carlo - report.mass_closed_form).abs()
                / report.monte_carlo_sigma;
            emit(&cli.out, &json(&EntropyOutput { report, mc_z }))
        }
        Cmd::ProbeContinuity {
            common,
            m_max,
            bases,
            candidates,
            seed,
            format,
        } => {
            let s = Surface::build(common.genus as usize)?;
            let part = build_partition(&s, &common.partition, &common.points)?;
            let att = Attractor::build(&s, &part)?;
            let probe = code_continuity_probe(&att, *m_max, *bases, *candidates, *seed);
            let mut rows = Vec::new();
            let mut prev: Option<f64> = None;
            for (m, d) in probe {
                rows.push(ProbeRow {
                    m,
                    diameter: d,
                    ratio: prev.map(|p| d / p),
                });
                prev = Some(d);
            }
            let text = match format {
                Format::Json => json(&rows),
                Format::Csv => {
                    let mut out = String::from("m,diameter,ratio\n");
                    for r in &rows {
                        out.push_str(&format!(
                            "{},{},{}\n",
                            r.m,
                            r.diameter,
                            r.ratio.map_or(String::new(), |x| x.to_string())
                        ));
                    }
                    out.pop();
                    out
                }
                _ => {
                    return Err(CmdError::Usage(
                        "probe-continuity supports json or csv".into(),
                    ))
                }
            };
            emit(&cli.out, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.tol {
        std::env::set_var("GEODESIC_CODER_TOL", t.to_string());
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            exit_code(&e)
        }
    }
}
