//! Batch JSON front end for `quathyp`.
//!
//! Every command reads one request object, or an array of them, and writes
//! one response, or an array in the same order. Floats are written with 17
//! significant digits.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};

use clap::{Parser, Subcommand, ValueEnum};
use quathyp::congruence::{
    congruent_quadruple_gram, congruent_quadruple_invariants, decide_triple, triple_signature, TripleCase, Verdict,
    CONGRUENCE_TOL,
};
use quathyp::hform::{bergman_distance, common_dim, random_boundary_point, random_interior_point, random_isometry};
use quathyp::invariants::{cartan, cross_ratio, cross_ratios, triple_product, CrossRatios};
use quathyp::metric::{dist_point_geodesic, dist_point_qline, Geodesic, QLine};
use quathyp::moduli::{
    check_membership, d_of_g, random_boundary_quadruple, random_moduli_point, reconstruct, tau, MembershipTol,
    ModuliPoint,
};
use quathyp::{ClosurePoint, GeometryError, Quaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_GEOMETRY: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Schema(String),
    #[error("geometric error: {0}")]
    Geometry(#[from] GeometryError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Geometry(_) => EXIT_GEOMETRY,
            CliError::Schema(_) | CliError::Io(_) => EXIT_SCHEMA,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Schema(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "quathyp", version, about = "Invariants, moduli and congruence in quaternionic hyperbolic space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Dimension, used when a request does not carry "n".
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Tolerance override for congruence and membership tests.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for `random`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Input file, `-` for stdin.
    #[arg(long, global = true, default_value = "-")]
    pub input: String,
    /// Output file, `-` for stdout.
    #[arg(long, global = true, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Cartan invariants of every triple, cross-ratios of a quadruple.
    Invariants,
    /// Moduli coordinates of a boundary quadruple.
    Tau,
    /// Membership of a moduli point, with its D value.
    Member,
    /// A boundary quadruple realizing a moduli point.
    Reconstruct,
    /// Ordered congruence of two triples or two boundary quadruples.
    Congruent,
    /// Distance between points, or from a point to a geodesic or line.
    Distance,
    /// A seeded corpus of requests.
    Random {
        #[arg(long, value_enum)]
        kind: CorpusKind,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorpusKind {
    /// `{"points": [...]}` with four boundary points.
    Quadruple,
    /// `{"points": [...]}` with three points, each boundary or interior.
    Triple,
    /// `{"n": n, "moduli": {...}}`.
    Moduli,
    /// `{"p": [...], "q": [...]}` with `q = g·p` for boundary quadruples.
    CongruentQuadruple,
    /// `{"p": [...], "q": [...]}` with `q = g·p` for triples.
    CongruentTriple,
    /// `{"z": ..., "w": ...}` with two interior points.
    Distance,
}

/// Per-request settings with command-line fallbacks.
#[derive(Debug, Clone, Copy)]
struct Settings {
    n: Option<usize>,
    tol: Option<f64>,
}

impl Settings {
    fn merge(self, n: Option<usize>, tol: Option<f64>) -> CliResult<Settings> {
        let merged = Settings { n: n.or(self.n), tol: tol.or(self.tol) };
        if let Some(n) = merged.n {
            if n < 2 {
                return Err(CliError::Schema(format!("n = {n} is too small, need n >= 2")));
            }
        }
        if let Some(t) = merged.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Schema(format!("tol = {t} must be positive")));
            }
        }
        Ok(merged)
    }

    fn require_n(self) -> CliResult<usize> {
        self.n.ok_or_else(|| CliError::Schema("\"n\" is required (request field or --n)".into()))
    }

    fn check_points(self, points: &[ClosurePoint]) -> CliResult<()> {
        let found = common_dim(points)?;
        match self.n {
            Some(n) if n != found => Err(CliError::Schema(format!("points have n = {found}, expected n = {n}"))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsRequest {
    pub points: Vec<ClosurePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuliRequest {
    pub moduli: ModuliPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

/// A wrapped request, or a bare moduli point as printed by `tau`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ModuliInput {
    Wrapped(ModuliRequest),
    Bare(ModuliPoint),
}

impl From<ModuliInput> for ModuliRequest {
    fn from(input: ModuliInput) -> Self {
        match input {
            ModuliInput::Wrapped(r) => r,
            ModuliInput::Bare(moduli) => ModuliRequest { moduli, n: None, tol: None },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CongruenceRequest {
    pub p: Vec<ClosurePoint>,
    pub q: Vec<ClosurePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

/// Exactly one of `w`, `geodesic` and `qline` must be present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceRequest {
    pub z: ClosurePoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<ClosurePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<[ClosurePoint; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qline: Option<[ClosurePoint; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
struct TripleInvariants {
    cartan: f64,
    triple_product: Quaternion,
}

#[derive(Debug, Clone, Serialize)]
struct QuadrupleInvariants {
    /// Keyed by the 1-based indices of the triple, e.g. `"124"`.
    cartan: std::collections::BTreeMap<String, f64>,
    cross_ratio: Quaternion,
    cross_ratios: CrossRatios,
}

#[derive(Debug, Clone, Serialize)]
struct Membership {
    member: bool,
    #[serde(rename = "D")]
    d: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct Reconstruction {
    points: [ClosurePoint; 4],
}

#[derive(Debug, Clone, Serialize)]
struct TripleVerdict {
    congruent: bool,
    verdict: Verdict,
    case: Option<TripleCase>,
}

#[derive(Debug, Clone, Serialize)]
struct QuadrupleVerdict {
    congruent: bool,
    gram: bool,
    invariants: bool,
}

#[derive(Debug, Clone, Serialize)]
struct Distance {
    distance: f64,
}

fn triple(points: &[ClosurePoint]) -> [ClosurePoint; 3] {
    [points[0].clone(), points[1].clone(), points[2].clone()]
}

fn quadruple(points: &[ClosurePoint]) -> [ClosurePoint; 4] {
    [points[0].clone(), points[1].clone(), points[2].clone(), points[3].clone()]
}

fn cmd_invariants(req: PointsRequest, s: Settings) -> CliResult<Value> {
    let s = s.merge(req.n, None)?;
    let p = &req.points;
    if !(3..=4).contains(&p.len()) {
        return Err(CliError::Schema(format!("expected 3 or 4 points, found {}", p.len())));
    }
    s.check_points(p)?;
    match p.len() {
        3 => {
            let tp = triple_product(&p[0], &p[1], &p[2])?;
            Ok(serde_json::to_value(TripleInvariants { cartan: tp.cartan(), triple_product: tp.value() })?)
        }
        4 => {
            let mut angles = std::collections::BTreeMap::new();
            for (i, j, k) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
                angles.insert(format!("{}{}{}", i + 1, j + 1, k + 1), cartan(&p[i], &p[j], &p[k])?);
            }
            let report = QuadrupleInvariants {
                cartan: angles,
                cross_ratio: cross_ratio(&p[0], &p[1], &p[2], &p[3])?,
                cross_ratios: cross_ratios(&quadruple(p))?,
            };
            Ok(serde_json::to_value(report)?)
        }
        _ => unreachable!(),
    }
}

fn cmd_tau(req: PointsRequest, s: Settings) -> CliResult<Value> {
    let s = s.merge(req.n, None)?;
    if req.points.len() != 4 {
        return Err(CliError::Schema(format!("expected 4 points, found {}", req.points.len())));
    }
    s.check_points(&req.points)?;
    Ok(serde_json::to_value(tau(&quadruple(&req.points))?)?)
}

fn cmd_member(req: ModuliRequest, s: Settings) -> CliResult<Value> {
    let s = s.merge(req.n, req.tol)?;
    let n = s.require_n()?;
    let tol = MembershipTol { d_rel: s.tol.unwrap_or(MembershipTol::default().d_rel), ..MembershipTol::default() };
    let reason = match check_membership(&req.moduli, n, tol) {
        Ok(()) => None,
        Err(GeometryError::NotInModuliSpace(reason)) => Some(reason),
        Err(e) => return Err(e.into()),
    };
    let report = Membership { member: reason.is_none(), d: d_of_g(&req.moduli), reason };
    Ok(serde_json::to_value(report)?)
}

fn cmd_reconstruct(req: ModuliRequest, s: Settings) -> CliResult<Value> {
    let s = s.merge(req.n, req.tol)?;
    let points = reconstruct(&req.moduli, s.require_n()?)?;
    Ok(serde_json::to_value(Reconstruction { points })?)
}

fn cmd_congruent(req: CongruenceRequest, s: Settings) -> CliResult<Value> {
    let s = s.merge(req.n, req.tol)?;
    let tol = s.tol.unwrap_or(CONGRUENCE_TOL);
    if req.p.len() != req.q.len() {
        return Err(CliError::Schema(format!("p has {} points but q has {}", req.p.len(), req.q.len())));
    }
    if !(3..=4).contains(&req.p.len()) {
        return Err(CliError::Schema(format!("expected 3 or 4 points, found {}", req.p.len())));
    }
    s.check_points(&req.p)?;
    s.check_points(&req.q)?;
    match req.p.len() {
        3 => {
            let (p, q) = (triple(&req.p), triple(&req.q));
            let verdict = decide_triple(&p, &q, tol)?;
            let case = triple_signature(&p)?.case;
            let report = TripleVerdict { congruent: verdict.is_congruent(), verdict, case: Some(case) };
            Ok(serde_json::to_value(report)?)
        }
        4 => {
            let (p, q) = (quadruple(&req.p), quadruple(&req.q));
            let gram = congruent_quadruple_gram(&p, &q, tol)?;
            let invariants = congruent_quadruple_invariants(&p, &q, tol)?;
            Ok(serde_json::to_value(QuadrupleVerdict { congruent: gram, gram, invariants })?)
        }
        _ => unreachable!(),
    }
}

fn cmd_distance(req: DistanceRequest, s: Settings) -> CliResult<Value> {
    let s = s.merge(req.n, None)?;
    let distance = match (&req.w, &req.geodesic, &req.qline) {
        (Some(w), None, None) => {
            s.check_points(&[req.z.clone(), w.clone()])?;
            bergman_distance(&req.z, w)?
        }
        (None, Some([u, v]), None) => {
            s.check_points(&[req.z.clone(), u.clone(), v.clone()])?;
            dist_point_geodesic(&Geodesic::new(u, v)?, &req.z)?
        }
        (None, None, Some([u, v])) => {
            s.check_points(&[req.z.clone(), u.clone(), v.clone()])?;
            dist_point_qline(&QLine::new(u, v)?, &req.z)?
        }
        _ => return Err(CliError::Schema("exactly one of \"w\", \"geodesic\", \"qline\" is required".into())),
    };
    Ok(serde_json::to_value(Distance { distance })?)
}

fn random_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ClosurePoint {
    if rng.random_bool(0.5) {
        random_boundary_point(n, rng)
    } else {
        random_interior_point(n, rng)
    }
}

/// Generates `count` requests of the given kind from a seeded ChaCha8 stream.
pub fn corpus(kind: CorpusKind, n: usize, count: usize, seed: u64) -> CliResult<Vec<Value>> {
    if n < 2 {
        return Err(CliError::Schema(format!("n = {n} is too small, need n >= 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rng = &mut rng;
    (0..count)
        .map(|_| {
            let item = match kind {
                CorpusKind::Quadruple => {
                    serde_json::to_value(PointsRequest { points: random_boundary_quadruple(n, rng).to_vec(), n: None })
                }
                CorpusKind::Triple => {
                    let points = (0..3).map(|_| random_point(n, rng)).collect();
                    serde_json::to_value(PointsRequest { points, n: None })
                }
                CorpusKind::Moduli => {
                    serde_json::to_value(ModuliRequest { moduli: random_moduli_point(n, rng), n: Some(n), tol: None })
                }
                CorpusKind::CongruentQuadruple => {
                    let p = random_boundary_quadruple(n, rng);
                    let g = random_isometry(n, rng);
                    let q = p.iter().map(|x| g.apply(x)).collect::<Result<Vec<_>, _>>()?;
                    serde_json::to_value(CongruenceRequest { p: p.to_vec(), q, n: None, tol: None })
                }
                CorpusKind::CongruentTriple => {
                    let p: Vec<ClosurePoint> = (0..3).map(|_| random_point(n, rng)).collect();
                    let g = random_isometry(n, rng);
                    let q = p.iter().map(|x| g.apply(x)).collect::<Result<Vec<_>, _>>()?;
                    serde_json::to_value(CongruenceRequest { p, q, n: None, tol: None })
                }
                CorpusKind::Distance => serde_json::to_value(DistanceRequest {
                    z: random_interior_point(n, rng),
                    w: Some(random_interior_point(n, rng)),
                    geodesic: None,
                    qline: None,
                    n: None,
                }),
            };
            Ok(item?)
        })
        .collect()
}

/// Applies `f` to one request or to each element of an array.
///
/// In batch mode a failed item becomes `{"error": {"code": …, "message": …}}`
/// and the exit code is that of the first failure.
fn dispatch<R, F>(input: Value, s: Settings, f: F) -> (Option<Value>, Result<(), CliError>)
where
    R: DeserializeOwned,
    F: Fn(R, Settings) -> CliResult<Value>,
{
    let one = |v: Value| -> CliResult<Value> { f(serde_json::from_value(v)?, s) };
    match input {
        Value::Array(items) => {
            let mut first_err = None;
            let out = items
                .into_iter()
                .map(|item| match one(item) {
                    Ok(v) => v,
                    Err(e) => {
                        let v = serde_json::json!({ "error": { "code": e.exit_code(), "message": e.to_string() } });
                        first_err.get_or_insert(e);
                        v
                    }
                })
                .collect();
            (Some(Value::Array(out)), first_err.map_or(Ok(()), Err))
        }
        v => match one(v) {
            Ok(v) => (Some(v), Ok(())),
            Err(e) => (None, Err(e)),
        },
    }
}

/// A compact JSON formatter that writes every float as `{:.16e}`.
struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes `value` on one line with 17 significant digits per float.
pub fn to_json_string<T: Serialize>(value: &T) -> CliResult<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}

fn read_input(path: &str, stdin: &mut dyn Read) -> CliResult<Value> {
    let text = if path == "-" {
        let mut s = String::new();
        stdin.read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path)?
    };
    Ok(serde_json::from_str(&text)?)
}

fn write_output(path: &str, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    if path == "-" {
        writeln!(stdout, "{text}")?;
    } else {
        fs::write(path, format!("{text}\n"))?;
    }
    Ok(())
}

fn execute(cli: &Cli, stdin: &mut dyn Read, stdout: &mut dyn Write) -> CliResult<()> {
    let s = Settings { n: cli.n, tol: None }.merge(None, cli.tol)?;
    let (out, status) = match cli.command {
        Command::Random { kind, count } => {
            let items = corpus(kind, cli.n.unwrap_or(2), count, cli.seed)?;
            (Some(Value::Array(items)), Ok(()))
        }
        cmd => {
            let input = read_input(&cli.input, stdin)?;
            match cmd {
                Command::Invariants => dispatch(input, s, cmd_invariants),
                Command::Tau => dispatch(input, s, cmd_tau),
                Command::Member => dispatch(input, s, |r: ModuliInput, s| cmd_member(r.into(), s)),
                Command::Reconstruct => dispatch(input, s, |r: ModuliInput, s| cmd_reconstruct(r.into(), s)),
                Command::Congruent => dispatch(input, s, cmd_congruent),
                Command::Distance => dispatch(input, s, cmd_distance),
                Command::Random { .. } => unreachable!(),
            }
        }
    };
    if let Some(v) = out {
        write_output(&cli.output, &to_json_string(&v)?, stdout)?;
    }
    status
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, stdin, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "quathyp: {e}");
            e.exit_code()
        }
    }
}
