//! End-to-end scenario runs and their artifacts.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use stabilizer_core::stabilizer::CorollaryRegime;
use stabilizer_core::verifier::{bound_report, stabilize_probes, CstarReport};
use stabilizer_core::{
    corollary_constant, error_bound, scan_hypotheses, select_direction, verify_cstar,
    verify_involution_laws, verify_uniqueness, BoundReport, ControlFunction64, CorollaryConstant,
    DefectReport, ExtReal, LawReport, ScalingDirection64, StabilizationTrace, UniquenessReport,
};

use crate::config::{Scenario, ScenarioConfig};
use crate::error::CliError;

pub const REPORT_FILE: &str = "report.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Measured bound coefficient next to the derived and printed ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryAudit {
    /// `None` for a power sum at `r = 1` or a power product at `r = 1/2`.
    pub constant: Option<CorollaryConstant>,
    /// `max ‖I(x) − f(x)‖/(θ‖x‖^r)` over the probes.
    pub measured_coefficient: ExtReal<f64>,
    pub respects_derived: Option<bool>,
    pub respects_printed: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub direction: ScalingDirection64,
    pub hypotheses: DefectReport<f64>,
    pub bound: BoundReport<f64>,
    pub laws: LawReport<f64>,
    pub uniqueness: Option<UniquenessReport<f64>>,
    pub cstar: CstarReport<f64>,
    pub corollary_audit: CorollaryAudit,
    #[serde(skip)]
    pub traces: Vec<StabilizationTrace<f64>>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn regime(control: &ControlFunction64) -> Option<CorollaryRegime> {
    match *control {
        ControlFunction64::PowerSum { r, .. } if r < 1.0 => Some(CorollaryRegime::SumRLt1),
        ControlFunction64::PowerSum { r, .. } if r > 1.0 => Some(CorollaryRegime::SumRGt1),
        ControlFunction64::PowerProduct { r, .. } if r != 0.5 => Some(CorollaryRegime::Product),
        _ => None,
    }
}

pub fn corollary_for(control: &ControlFunction64) -> Option<CorollaryConstant> {
    let r = match *control {
        ControlFunction64::PowerSum { r, .. } | ControlFunction64::PowerProduct { r, .. } => r,
        ControlFunction64::Custom(_) => return None,
    };
    regime(control).and_then(|g| corollary_constant(r, g).ok())
}

fn audit(control: &ControlFunction64, bound: &BoundReport<f64>) -> CorollaryAudit {
    let (theta, r) = match *control {
        ControlFunction64::PowerSum { theta, r } | ControlFunction64::PowerProduct { theta, r } => {
            (theta, r)
        }
        ControlFunction64::Custom(_) => (0.0, 1.0),
    };
    let measured = bound
        .per_probe
        .iter()
        .map(|p| ExtReal::ratio(p.gap, theta * p.norm.powf(r)))
        .fold(ExtReal::zero(), ExtReal::max);
    let constant = corollary_for(control);
    let respects = |c: f64| match measured {
        ExtReal::Finite(m) => m <= c * (1.0 + 1e-9) + 1e-9,
        ExtReal::Infinite => false,
    };
    CorollaryAudit {
        constant,
        measured_coefficient: measured,
        respects_derived: constant.map(|c| respects(c.derived)),
        respects_printed: constant.map(|c| respects(c.printed)),
    }
}

/// Runs the full verification pipeline in memory.
pub fn execute(sc: &Scenario) -> Result<Report, CliError> {
    let direction = select_direction(&sc.control)?;
    let hypotheses = scan_hypotheses(
        &sc.map,
        &sc.control,
        &direction,
        &sc.lambdas,
        &sc.probes,
        &sc.scan_options(),
    )?;
    let traces = stabilize_probes(&sc.map, &direction, &sc.probes, &sc.stabilizer)?;
    let bound = bound_report(&sc.control, &direction, &traces)?;
    let laws = verify_involution_laws(
        &sc.map,
        &direction,
        &sc.lambdas,
        &sc.probes,
        &sc.law_options(),
    )?;
    let tol = &sc.config.tolerances;
    let uniqueness = sc
        .second_map
        .as_ref()
        .map(|g| {
            verify_uniqueness(
                &sc.map,
                g,
                &direction,
                &sc.probes,
                &sc.stabilizer,
                tol.uniqueness,
            )
        })
        .transpose()?;
    let cstar = verify_cstar(&sc.map, &direction, &sc.probes, &sc.stabilizer, tol.cstar)?;
    let corollary_audit = audit(&sc.control, &bound);
    Ok(Report {
        direction,
        hypotheses,
        bound,
        laws,
        uniqueness,
        cstar,
        corollary_audit,
        traces,
    })
}

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{v:.16e}")
    }
}

/// Per-iteration rows: `probe_id, radius, n, diff_norm, error_vs_limit, bound, ratio`.
///
/// `bound` is the tail estimate `Lⁿ·L^{1−i}/(1 − L)·φ(x, 0)` for `‖aₙ − I(x)‖`.
pub fn trace_csv(
    control: &ControlFunction64,
    dir: &ScalingDirection64,
    traces: &[StabilizationTrace<f64>],
) -> Result<String, CliError> {
    let mut out = String::from("probe_id,radius,n,diff_norm,error_vs_limit,bound,ratio\n");
    for (id, t) in traces.iter().enumerate() {
        let radius = t.x.norm()?;
        let head = error_bound(dir, control, &t.x)?;
        let limit = t.result();
        for (n, diff) in t.diffs.iter().enumerate() {
            let err = t.iterates[n].checked_sub(limit)?.norm()?;
            let bound = dir.lipschitz.powi(n as i32) * head;
            let ratio = match ExtReal::ratio(err, bound) {
                ExtReal::Finite(v) => fmt_f64(v),
                ExtReal::Infinite => "inf".to_owned(),
            };
            writeln!(
                out,
                "{id},{},{n},{},{},{},{ratio}",
                fmt_f64(radius),
                fmt_f64(*diff),
                fmt_f64(err),
                fmt_f64(bound)
            )
            .expect("writing to a String");
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct DerivedDirection {
    q: f64,
    i: u8,
    #[serde(rename = "L")]
    lipschitz: f64,
}

#[derive(Debug, Serialize)]
struct Files {
    manifest: String,
    report: String,
    trace: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    timestamp: String,
    config: &'a ScenarioConfig,
    derived: DerivedDirection,
    corollary: Option<CorollaryConstant>,
    files: Files,
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Paths of the three artifacts of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub manifest: PathBuf,
    pub report: PathBuf,
    pub trace: PathBuf,
}

impl RunArtifacts {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            manifest: dir.join(MANIFEST_FILE),
            report: dir.join(REPORT_FILE),
            trace: dir.join(TRACE_FILE),
        }
    }
}

/// Builds, executes and persists a scenario. All files are rendered first
/// and then written from this thread.
pub fn run_scenario(
    config: &ScenarioConfig,
    out: &Path,
) -> Result<(Report, RunArtifacts), CliError> {
    let sc = config.build()?;
    let report = execute(&sc)?;
    let trace = trace_csv(&sc.control, &report.direction, &report.traces)?;
    let artifacts = RunArtifacts::in_dir(out);
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        timestamp: chrono::Utc::now().to_rfc3339(),
        config: &sc.config,
        derived: DerivedDirection {
            q: report.direction.q(),
            i: report.direction.index(),
            lipschitz: report.direction.lipschitz,
        },
        corollary: report.corollary_audit.constant,
        files: Files {
            manifest: artifacts.manifest.display().to_string(),
            report: artifacts.report.display().to_string(),
            trace: artifacts.trace.display().to_string(),
        },
    };
    let mut manifest = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    manifest.push('\n');

    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write_atomic(&artifacts.report, report.to_json().as_bytes())?;
    write_atomic(&artifacts.trace, trace.as_bytes())?;
    write_atomic(&artifacts.manifest, manifest.as_bytes())?;
    Ok((report, artifacts))
}
