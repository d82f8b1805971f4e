//! Command line front end: instance files, dispatch, human tables and
//! machine-readable run reports.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use serde_with::serde_as;
use sha2::{Digest, Sha256};

use crate::additive::{gap_analysis, minimal_translates, syndetic_check, Translates};
use crate::density::{
    self, auud_window, classical_upper_density, delta_density, hegyvari_density, kahane_density,
    window_density_profile, DensityReport, DensityValue, ScanOptions, Witness, WindowShape,
};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};
use crate::scalar::{render, Exact, Scalar};
use crate::setrep::discrete::{ChainSet, DiscreteSet, PeriodicSet};
use crate::setrep::intervals::{IntervalUnion, PeriodicPattern};
use crate::setrep::measure::{MeasureSpec, SetSpec};
use crate::setrep::points::PointConfig;
use crate::structure::{
    greedy_translates, partition_by_coloring, syndetic_pipeline, CoverResult, HSet, Maximality,
};
use crate::Rational;

type R = Rational;

#[derive(Parser, Debug)]
#[command(name = "density-lab", version, about = "Upper densities, difference sets and syndetic translate sets")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the serialized run report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Density of the instance's measure (or of its set).
    Density {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "kahane")]
        notion: NotionArg,
        /// Name of an `intervals` object of length 1 used as the window K.
        #[arg(long = "K")]
        k: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        rmax: Option<i64>,
        /// Scan windows even when a closed form exists.
        #[arg(long)]
        force_scan: bool,
    },
    /// Difference set S - S and its gaps.
    Diffset {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Covering test S + K = G with the translate set in object "K".
    Syndetic {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Greedy translate set B with A - A + B = G.
    Cover {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Partition S into packing classes for H (object "H", else automatic).
    Partition {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        eps: Option<String>,
    },
    /// Full construction of a compact translate set for S - S.
    Pipeline {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        eps: Option<String>,
    },
    /// Built-in scenarios.
    Demo {
        #[arg(value_enum)]
        which: DemoArg,
    },
    /// Brute-force oracle against the closed form on all small groups.
    Selftest {
        #[arg(long, default_value_t = density::DEFAULT_ORACLE_CAP)]
        cap: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NotionArg {
    Classical,
    Window,
    Kahane,
    Delta,
    Hegyvari,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DemoArg {
    Totik,
    Accumulation,
    ErdosSarkozy,
    Hegyvari,
    Theorem3,
}

/// A named object of an instance file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Object {
    Set(SetSpec<R>),
    Measure(MeasureSpec<R>),
}

#[serde_as]
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde_as(as = "Option<Exact>")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<R>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_cap: Option<usize>,
    /// Scan range for finite sets in `diffset`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<i64>,
}

/// One instance file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub group: GroupSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetSpec<R>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec<R>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub objects: BTreeMap<String, Object>,
    #[serde(default)]
    pub params: Params,
}

impl Instance {
    pub fn parse(text: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        inst.group.validate()?;
        Ok(inst)
    }

    fn set(&self) -> Result<&SetSpec<R>> {
        self.set.as_ref().ok_or_else(|| Error::precondition("the instance has no \"set\""))
    }

    fn object_set(&self, name: &str) -> Result<Option<&SetSpec<R>>> {
        match self.objects.get(name) {
            None => Ok(None),
            Some(Object::Set(s)) => Ok(Some(s)),
            Some(Object::Measure(_)) => Err(Error::Shape(format!("object {name:?} is a measure, not a set"))),
        }
    }

    /// The instance's measure, or the natural measure of its set.
    fn measure(&self) -> Result<MeasureSpec<R>> {
        if let Some(m) = &self.measure {
            return Ok(m.clone());
        }
        let s = self.set()?;
        Ok(match s {
            SetSpec::Intervals { .. } | SetSpec::PeriodicPattern(_) => MeasureSpec::haar_trace(s.clone()),
            _ => MeasureSpec::counting(s.clone()),
        })
    }

    fn options(&self) -> ScanOptions {
        let d = ScanOptions::default();
        ScanOptions {
            tol: self.params.tol.unwrap_or(d.tol),
            r0: self.params.r0.unwrap_or(d.r0),
            k_max: self.params.k_max.unwrap_or(d.k_max),
            r_max: self.params.r_max.or(d.r_max),
            oracle_cap: self.params.oracle_cap.unwrap_or(d.oracle_cap),
            ..d
        }
    }

    fn eps(&self, flag: &Option<String>) -> Result<R> {
        match flag {
            Some(s) => R::parse_exact(s).ok_or_else(|| Error::Parse(format!("not an exact rational: {s:?}"))),
            None => Ok(self.params.eps.clone().unwrap_or_else(|| R::from_ratio(1, 2))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Defaults {
    pub tol: f64,
    pub r0: i64,
    pub k_max: u32,
    pub oracle_cap: usize,
    pub eps: String,
}

/// Everything written by `--out`.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    pub defaults: Defaults,
    pub result: Value,
    pub wall_time_ms: u128,
    pub version: String,
}

struct Outcome {
    human: String,
    result: Value,
    digest: Option<String>,
    opts: ScanOptions,
}

fn to_value<S: Serialize>(v: &S) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn load(path: &Path) -> Result<(Instance, String)> {
    let bytes = std::fs::read(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::Parse(format!("{}: not UTF-8", path.display())))?;
    let inst = Instance::parse(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })?;
    let digest = Sha256::digest(&bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    });
    Ok((inst, digest))
}

/// Runs the command line; returns the process exit status.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let start = Instant::now();
    match execute(&cli.command) {
        Ok(out) => {
            let defaults = Defaults {
                tol: out.opts.tol,
                r0: out.opts.r0,
                k_max: out.opts.k_max,
                oracle_cap: out.opts.oracle_cap,
                eps: "1/2".into(),
            };
            println!(
                "defaults: tol={} r0={} k_max={} oracle_cap={} eps={}  (exact p/q values are authoritative; decimals are approximations)",
                defaults.tol, defaults.r0, defaults.k_max, defaults.oracle_cap, defaults.eps
            );
            print!("{}", out.human);
            let report = RunReport {
                command: args.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
                input_digest: out.digest,
                defaults,
                result: out.result,
                wall_time_ms: start.elapsed().as_millis(),
                version: env!("CARGO_PKG_VERSION").into(),
            };
            if let Some(path) = &cli.out {
                let text = serde_json::to_string_pretty(&report).expect("report serializes");
                if let Err(e) = std::fs::write(path, text + "\n") {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 2;
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Density { instance, notion, k, tol, rmax, force_scan } => {
            let (inst, digest) = load(instance)?;
            let mut opts = inst.options();
            if let Some(t) = tol {
                opts.tol = *t;
            }
            if rmax.is_some() {
                opts.r_max = *rmax;
            }
            opts.force_scan |= *force_scan;
            let rep = density_command(&inst, *notion, k.as_deref(), &opts)?;
            Ok(Outcome { human: render_density(&rep), result: to_value(&rep), digest: Some(digest), opts })
        }
        Command::Diffset { instance } => {
            let (inst, digest) = load(instance)?;
            let (human, result) = diffset_command(&inst)?;
            Ok(Outcome { human, result, digest: Some(digest), opts: inst.options() })
        }
        Command::Syndetic { instance } => {
            let (inst, digest) = load(instance)?;
            let s = inst.set()?;
            let k = inst
                .object_set("K")?
                .ok_or_else(|| Error::precondition("the instance needs an object \"K\""))?;
            let translates = match k {
                SetSpec::ExplicitFinite(f) => Translates::Finite { elements: f.clone() },
                SetSpec::Intervals { intervals } => Translates::Real { intervals: intervals.clone() },
                _ => return Err(Error::Shape("K must be explicit_finite or intervals".into())),
            };
            let cert = syndetic_check(s, &translates, &inst.group)?;
            let mut human = String::new();
            let _ = writeln!(human, "verified: {}", cert.verified);
            if let Some(w) = &cert.witness {
                let _ = writeln!(human, "least uncovered point: {w}");
            }
            if !cert.cells.is_empty() {
                let _ = writeln!(human, "{:>16} | covered by", "cell");
                for c in cert.cells.iter().take(64) {
                    let _ = writeln!(human, "{:>16} | {:?}", format!("{:?}", c.cell), c.by);
                }
                if cert.cells.len() > 64 {
                    let _ = writeln!(human, "… {} cells in total", cert.cells.len());
                }
            }
            if let Some(sum) = &cert.sum {
                let _ = writeln!(human, "S + K over one period: {}", show_pattern(sum));
            }
            let mut result = json!({ "certificate": to_value(&cert) });
            if inst.group.is_discrete() {
                if let Ok(m) = minimal_translates(s, &inst.group) {
                    let _ = writeln!(
                        human,
                        "smallest translate set ({}): {:?}",
                        if m.exact { "exact" } else { "greedy, approximate" },
                        m.translates
                    );
                    result["minimal"] = to_value(&m);
                }
            }
            Ok(Outcome { human, result, digest: Some(digest), opts: inst.options() })
        }
        Command::Cover { instance } => {
            let (inst, digest) = load(instance)?;
            let r = greedy_translates(inst.set()?, &inst.group)?;
            Ok(Outcome { human: render_cover(&r), result: to_value(&r), digest: Some(digest), opts: inst.options() })
        }
        Command::Partition { instance, eps } => {
            let (inst, digest) = load(instance)?;
            let eps = inst.eps(eps)?;
            let h = h_object(&inst)?;
            let r = partition_by_coloring(inst.set()?, h.as_ref(), &eps)?;
            let mut human = String::new();
            let _ = writeln!(human, "H = {}", show_h(&r.h));
            if let Some(a) = &r.auto {
                let _ = writeln!(
                    human,
                    "automatic H: window count {} ≤ (1+ε)ρμ(H-H) = {}",
                    a.window_count,
                    render(&a.bound)
                );
            }
            let _ = writeln!(human, "classes: {} (k = {})", r.n, r.k_bound);
            for (i, (c, d)) in r.classes.iter().zip(&r.class_densities).enumerate() {
                let _ = writeln!(human, "  S_{} = {}   density {}", i + 1, show_set(c), d.summary());
            }
            Ok(Outcome { human, result: to_value(&r), digest: Some(digest), opts: inst.options() })
        }
        Command::Pipeline { instance, eps } => {
            let (inst, digest) = load(instance)?;
            let eps = inst.eps(eps)?;
            if inst.group != GroupSpec::RealLine {
                return Err(Error::precondition("the pipeline runs on the real line"));
            }
            let SetSpec::Points(s) = inst.set()? else {
                return Err(Error::precondition("the pipeline needs a point configuration"));
            };
            let h = match h_object(&inst)? {
                Some(HSet::Real { intervals }) => Some(intervals),
                Some(_) => return Err(Error::Shape("H must be an interval union".into())),
                None => None,
            };
            let r = syndetic_pipeline(s, &eps, h.as_ref())?;
            let mut human = String::new();
            let _ = writeln!(human, "H = {}   ρ = {}", show_intervals(&r.h), render(&r.rho));
            let _ = writeln!(human, "partition: {} classes; selected S_{} with ρ_j = {}", r.partition.n, r.selected + 1, render(&r.rho_selected));
            let _ = writeln!(
                human,
                "fattened A = S_j + H: density {} ≥ {}",
                render(&r.fattened.measured),
                render(&r.fattened.lower_bound)
            );
            let _ = writeln!(human, "B = {}", show_elements(&r.cover.b));
            let _ = writeln!(human, "T = B + (H - H) = {}   μ(T) = {}", show_intervals(&r.translates), render(&r.measure_t));
            let _ = writeln!(human, "(S_j - S_j) + T covers ℝ: verified");
            let _ = writeln!(
                human,
                "μ(T) ≤ (1+ε)μ(H-H)/μ(H) = {}: {}",
                render(&r.remark_bound),
                if r.remark_holds { "holds" } else { "FAILS" }
            );
            let _ = writeln!(human, "μ(T) ≤ ⌊1/(ρ_j μ(H))⌋·μ(H-H) = {}: holds", render(&r.proven_bound));
            Ok(Outcome { human, result: to_value(&r), digest: Some(digest), opts: ScanOptions::default() })
        }
        Command::Demo { which } => {
            let (human, result) = demo(*which)?;
            Ok(Outcome { human, result, digest: None, opts: ScanOptions::default() })
        }
        Command::Selftest { cap } => {
            let start = Instant::now();
            let r = density::oracle::equivalence_suite(*cap)?;
            let ms = start.elapsed().as_millis();
            let human = format!(
                "{} groups, {} subsets: brute force equals |A|/|G| on every one ({ms} ms)\n",
                r.groups.len(),
                r.subsets
            );
            let opts = ScanOptions { oracle_cap: *cap, ..ScanOptions::default() };
            Ok(Outcome { human, result: to_value(&r), digest: None, opts })
        }
    }
}

fn h_object(inst: &Instance) -> Result<Option<HSet<R>>> {
    Ok(match inst.object_set("H")? {
        None => None,
        Some(SetSpec::Intervals { intervals }) => Some(HSet::Real { intervals: intervals.clone() }),
        Some(SetSpec::ExplicitFinite(f)) => Some(HSet::Finite { elements: f.clone() }),
        Some(_) => return Err(Error::Shape("H must be intervals or explicit_finite".into())),
    })
}

fn density_command(
    inst: &Instance,
    notion: NotionArg,
    k: Option<&str>,
    opts: &ScanOptions,
) -> Result<DensityReport<R>> {
    let g = &inst.group;
    match notion {
        NotionArg::Classical => {
            let a = inst
                .set()?
                .as_discrete()
                .ok_or_else(|| Error::precondition("the classical density needs a set of integers"))?;
            let r_max = opts.r_max.unwrap_or(opts.r0.saturating_mul(1 << opts.k_max.min(40)));
            classical_upper_density(&a, r_max, opts)
        }
        NotionArg::Window => {
            let shape = match k {
                Some(name) => match inst.object_set(name)? {
                    Some(SetSpec::Intervals { intervals }) => WindowShape::custom(intervals.clone())?,
                    Some(_) => return Err(Error::Shape(format!("K object {name:?} must be intervals"))),
                    None => return Err(Error::precondition(format!("no object named {name:?}"))),
                },
                None if g.is_discrete() => WindowShape::CenteredCube,
                None => WindowShape::Interval,
            };
            auud_window(&inst.measure()?, g, &shape, opts)
        }
        NotionArg::Kahane => kahane_density(&inst.measure()?, g, opts),
        NotionArg::Delta => delta_density(&inst.measure()?, g, opts),
        NotionArg::Hegyvari => match inst.set()? {
            SetSpec::Chain(c) => hegyvari_density(c, g, opts),
            _ => Err(Error::precondition("the chain density needs a chain set")),
        },
    }
}

fn diffset_command(inst: &Instance) -> Result<(String, Value)> {
    let s = inst.set()?;
    let g = &inst.group;
    let mut human = String::new();
    match (g, s) {
        (GroupSpec::RealLine, SetSpec::PeriodicPattern(p)) => {
            let d = p.difference_set();
            let _ = writeln!(human, "S - S = {}", show_pattern(&d));
            Ok((human, json!({ "difference_set": to_value(&d) })))
        }
        (GroupSpec::RealLine, SetSpec::Points(c)) => {
            let range = R::from_int(inst.params.range.unwrap_or(10));
            let d = c.difference_set_within((&-range.clone(), &range))?;
            let _ = writeln!(human, "(S - S) ∩ [-{range}, {range}]: {} elements", d.len());
            let shown: Vec<String> = d.iter().take(40).map(render).collect();
            let _ = writeln!(human, "  {}", shown.join(", "));
            Ok((human, json!({ "difference_set": d.iter().map(|x| x.to_string()).collect::<Vec<_>>() })))
        }
        (GroupSpec::RealLine, SetSpec::Intervals { intervals }) => {
            let d = intervals.difference_set();
            let _ = writeln!(human, "S - S = {}", show_intervals(&d));
            Ok((human, json!({ "difference_set": to_value(&d) })))
        }
        _ => {
            let set = match s {
                SetSpec::Chain(_) => DiscreteSet::from(s.to_finite_group(g)?),
                _ => s.as_discrete().ok_or_else(|| Error::Shape("not a discrete set".into()))?,
            };
            let (d, _) = set.difference_set(g)?;
            let _ = writeln!(human, "S - S = {}", show_set(&SetSpec::<R>::from(d.clone())));
            let mut result = json!({ "difference_set": to_value(&d) });
            if *g == (GroupSpec::ZLattice { dimension: 1 }) {
                let gaps = gap_analysis(&d, inst.params.range.unwrap_or(1000))?;
                let _ = writeln!(
                    human,
                    "positive elements {:?}…; gaps {:?}; max gap {}; bounded: {}",
                    &gaps.elements[..gaps.elements.len().min(20)],
                    &gaps.gaps[..gaps.gaps.len().min(20)],
                    gaps.max_gap,
                    gaps.bounded
                );
                result["gaps"] = to_value(&gaps);
            }
            Ok((human, result))
        }
    }
}

fn render_density(rep: &DensityReport<R>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "notion: {:?}", rep.notion);
    let _ = writeln!(s, "value: {}", rep.summary());
    if let DensityValue::Estimated { schedule, .. } = &rep.value {
        let _ = writeln!(s, "{:>12} | {:>24} | argmax", "r", "ratio");
        for e in schedule {
            let ratio = match &e.ratio {
                crate::setrep::Mass::Finite(v) => render(v),
                crate::setrep::Mass::Infinite => "∞".into(),
            };
            let _ = writeln!(s, "{:>12} | {:>24} | {}", render(&e.r), ratio, e.argmax);
        }
    }
    match &rep.witness {
        Some(Witness::Window { center, radius, mass, measure }) => {
            let _ = writeln!(s, "witness: ν({center} + {}·K) = {} over |rK| = {}", render(radius), render(mass), render(measure));
        }
        Some(Witness::Oracle { c, v, mass, sumset_size }) => {
            let _ = writeln!(s, "witness: C = {c:?}, V = {v:?}, ν(V) = {}, |C+V| = {sumset_size}", render(mass));
        }
        Some(Witness::Accumulation { point, window }) => {
            let _ = writeln!(
                s,
                "witness: [{}, {}] holds infinitely many points accumulating at {}",
                render(&window.0),
                render(&window.1),
                render(point)
            );
        }
        Some(Witness::EtaSchedule { atom, entries }) => {
            let _ = writeln!(s, "η schedule around the atom at {} with F = {{0}}:", render(atom));
            let _ = writeln!(s, "{:>14} | {:>10} | ν(V)/μ(F+V)", "η", "ν(V)");
            for e in entries {
                let _ = writeln!(s, "{:>14} | {:>10} | {}", render(&e.eta), render(&e.mass), render(&e.bound));
            }
        }
        Some(Witness::Depths { entries }) => {
            let _ = writeln!(s, "{:>6} | #(A ∩ H_n)/#H_n", "n");
            for (n, v) in entries {
                let _ = writeln!(s, "{n:>6} | {}", render(v));
            }
        }
        None => {}
    }
    for n in &rep.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

fn render_cover(r: &CoverResult<R>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "B = {}", show_elements(&r.b));
    let _ = writeln!(s, "bound {}, used {}", r.size_bound, r.b.len());
    let _ = writeln!(s, "A - A + B = G: {}; (A-A) ∩ (B-B) = {{0}}: {}", r.verified_cover, r.verified_packing);
    let _ = writeln!(s, "search domain: {}", r.search_domain);
    match &r.maximality {
        Maximality::Blocked { entries } => {
            let _ = writeln!(s, "{:>14} | {:>14} | blocking difference", "candidate", "against");
            for b in entries.iter().take(32) {
                let _ = writeln!(s, "{:>14} | {:>14} | {:?}", format!("{:?}", b.candidate), format!("{:?}", b.against), b.difference);
            }
            if entries.len() > 32 {
                let _ = writeln!(s, "… {} blocked candidates", entries.len());
            }
        }
        Maximality::Covering { sum } => {
            let _ = writeln!(s, "B + (A - A) = {}", show_pattern(sum));
        }
    }
    s
}

fn show_elements(b: &[GroupElement<R>]) -> String {
    let parts: Vec<String> = b
        .iter()
        .map(|g| match g {
            GroupElement::Int(v) if v.len() == 1 => v[0].to_string(),
            other => other.to_string(),
        })
        .collect();
    format!("{{{}}}", parts.join(", "))
}

fn show_intervals(u: &IntervalUnion<R>) -> String {
    if u.is_empty() {
        return "∅".into();
    }
    let parts: Vec<String> = u
        .pieces()
        .iter()
        .map(|(a, b)| if a == b { format!("{{{a}}}") } else { format!("[{a}, {b}]") })
        .collect();
    parts.join(" ∪ ")
}

fn show_pattern(p: &PeriodicPattern<R>) -> String {
    format!("({}) mod {}", show_intervals(p.pattern()), p.period())
}

fn show_h(h: &HSet<R>) -> String {
    match h {
        HSet::Real { intervals } => show_intervals(intervals),
        HSet::Finite { elements } => format!("{:?}", elements.elements()),
    }
}

fn show_set(s: &SetSpec<R>) -> String {
    match s {
        SetSpec::PeriodicDiscrete(p) => format!("{:?} + {:?}ℤ", p.residues(), p.period()),
        SetSpec::ExplicitFinite(f) => format!("{:?}", f.elements()),
        SetSpec::Points(c) => match c.as_periodic() {
            Some((p, res)) => {
                let r: Vec<String> = res.iter().map(|x| x.to_string()).collect();
                format!("{{{}}} + {p}ℤ", r.join(", "))
            }
            None => format!("{} points", c.points().len()),
        },
        SetSpec::Intervals { intervals } => show_intervals(intervals),
        SetSpec::PeriodicPattern(p) => show_pattern(p),
        SetSpec::Chain(c) => format!("{c:?}"),
    }
}

fn q(a: i64, b: i64) -> R {
    R::from_ratio(a, b)
}

fn demo(which: DemoArg) -> Result<(String, Value)> {
    let mut s = String::new();
    let opts = ScanOptions::default();
    match which {
        DemoArg::Totik => {
            let _ = writeln!(s, "On ℝ the Dirac measure at 0 has D̄ = 0, while the finite-test-set density Δ̄ is infinite.");
            let nu = MeasureSpec::<R>::DiracAtZero;
            let d = kahane_density(&nu, &GroupSpec::RealLine, &opts)?;
            let radii: Vec<R> = (0..=6).map(|k| R::from_int(10i64.pow(k))).collect();
            let profile = window_density_profile(&nu, &GroupSpec::RealLine, &WindowShape::Interval, &radii)?;
            let delta = delta_density(&nu, &GroupSpec::RealLine, &opts)?;
            let _ = writeln!(s, "D̄(δ_0) = {}", d.summary());
            let _ = writeln!(s, "window profile sup_x ν(x + [-r, r])/(2r):");
            for e in &profile {
                let _ = writeln!(s, "  r = {:>8}: {}", render(&e.r), e.ratio);
            }
            let _ = writeln!(s, "Δ̄(δ_0) = {}", delta.summary());
            s.push_str(&render_density(&delta));
            let _ = writeln!(s, "gap exhibited: Δ̄(δ_0) > D̄(δ_0)");
            Ok((s, json!({ "kahane": to_value(&d), "profile": to_value(&profile), "delta": to_value(&delta) })))
        }
        DemoArg::Accumulation => {
            let _ = writeln!(s, "S = {{1/n : n ≥ 1}} ⊂ [0, 1] accumulates at 0, so S - S ⊂ [-1, 1] is bounded and not syndetic.");
            let cfg = PointConfig::reciprocal_tail(q(0, 1), q(1, 1), 1);
            let d = kahane_density(&MeasureSpec::counting(SetSpec::Points(cfg.clone())), &GroupSpec::RealLine, &opts)?;
            s.push_str(&render_density(&d));
            let err = syndetic_pipeline(&cfg, &q(1, 2), None).expect_err("accumulation is rejected");
            let _ = writeln!(s, "pipeline: rejected with exit status {}: {err}", err.exit_code());
            Ok((s, json!({ "density": to_value(&d), "pipeline_error": err.to_string(), "exit_code": err.exit_code() })))
        }
        DemoArg::ErdosSarkozy => {
            let _ = writeln!(s, "For A ⊂ ℕ of positive upper density the gaps of D(A) = A - A are bounded by one more than the largest translate.");
            let a = DiscreteSet::from(PeriodicSet::arithmetic(5, [0, 1])?);
            let z = GroupSpec::ZLattice { dimension: 1 };
            let (d, _) = a.difference_set(&z)?;
            let gaps = gap_analysis(&d, 0)?;
            let cover = greedy_translates(&SetSpec::<R>::from(a.clone()), &z)?;
            let max_b = cover.b.iter().filter_map(|g| g.as_int().map(|v| v[0])).max().unwrap_or(0);
            let _ = writeln!(s, "A = {{0, 1}} + 5ℤ, density 2/5");
            let _ = writeln!(s, "D(A) ∩ (0, 5] = {:?}; max gap {}", gaps.elements, gaps.max_gap);
            s.push_str(&render_cover(&cover));
            let _ = writeln!(s, "max gap - 1 = {} ≤ max(B) = {max_b}: {}", gaps.max_gap - 1, gaps.max_gap - 1 <= max_b);
            Ok((s, json!({ "gaps": to_value(&gaps), "cover": to_value(&cover), "max_b": max_b })))
        }
        DemoArg::Hegyvari => {
            let _ = writeln!(s, "In ⊕ℤ_2 a set of positive chain density has A - A + B = G for a finite B.");
            let g = GroupSpec::SigmaFiniteChain { moduli: vec![2], depth: 5 };
            let a = ChainSet::Cylinder { allowed: [(0, vec![0]), (1, vec![1])].into_iter().collect() };
            let d = hegyvari_density::<R>(&a, &g, &opts)?;
            s.push_str(&render_density(&d));
            let cover = greedy_translates(&SetSpec::<R>::Chain(a), &g)?;
            s.push_str(&render_cover(&cover));
            Ok((s, json!({ "density": to_value(&d), "cover": to_value(&cover) })))
        }
        DemoArg::Theorem3 => {
            let _ = writeln!(s, "The window density of a periodic pattern does not depend on the window shape K.");
            let pat = PeriodicPattern::new(
                q(3, 2),
                IntervalUnion::new(vec![(q(0, 1), q(1, 3)), (q(1, 2), q(3, 4))])?,
            )?;
            let nu = MeasureSpec::haar_trace(SetSpec::PeriodicPattern(pat.clone()));
            let _ = writeln!(s, "pattern {}; exact density {}", show_pattern(&pat), render(&pat.density()));
            let shapes = vec![
                ("[-1, 1]", WindowShape::Interval),
                ("[0, 1]", WindowShape::custom(IntervalUnion::interval(q(0, 1), q(1, 1))?)?),
                ("[0, 1/3] ∪ [2, 8/3]", WindowShape::custom(IntervalUnion::new(vec![(q(0, 1), q(1, 3)), (q(2, 1), q(8, 3))])?)?),
            ];
            let scan = ScanOptions { force_scan: true, ..ScanOptions::default() };
            let mut reports = Vec::new();
            for (name, shape) in shapes {
                let r = auud_window(&nu, &GroupSpec::RealLine, &shape, &scan)?;
                let _ = writeln!(s, "K = {name}: {}", r.summary());
                reports.push(json!({ "k": name, "report": to_value(&r) }));
            }
            Ok((s, json!({ "density": pat.density().to_string(), "shapes": reports })))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_round_trip() {
        let text = r#"{
            "group": {"family": "real_line"},
            "set": {"kind": "points", "lattice": {"period": "1", "residues": ["0", "1/3"]}},
            "objects": {"H": {"kind": "intervals", "intervals": [["0", "2/5"]]},
                        "nu": {"kind": "dirac_at_zero"}},
            "params": {"eps": "1/2", "tol": 0.001}
        }"#;
        let inst = Instance::parse(text).unwrap();
        assert!(matches!(inst.objects["nu"], Object::Measure(_)));
        let printed = serde_json::to_string(&inst).unwrap();
        assert_eq!(Instance::parse(&printed).unwrap(), inst);
        let bad = r#"{"group": {"family": "real_line"}, "sett": {}}"#;
        assert!(matches!(Instance::parse(bad), Err(Error::Parse(_))));
    }

    #[test]
    fn demos_run() {
        for d in [DemoArg::Totik, DemoArg::Accumulation, DemoArg::ErdosSarkozy, DemoArg::Hegyvari, DemoArg::Theorem3] {
            demo(d).unwrap();
        }
    }

    #[test]
    fn chain_sets_round_trip() {
        let c = SetSpec::<R>::Chain(ChainSet::Finite { elements: vec![vec![1, 0]] });
        let back: SetSpec<R> = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
