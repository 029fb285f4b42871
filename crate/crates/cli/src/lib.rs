//! Configuration, report assembly and file output behind the `htype` binary.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use htype_core::kernels::{self, KernelSpec};
use htype_core::lab::{make_counterexample, Variant};
use htype_core::special::{find_zero, ZeroFamily};
use htype_core::verify::{run_suite, QuadConfig, Suite, SuiteConfig};
use htype_core::{build_htype, Complex64, GroupPoint, VerificationReport};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] htype_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub quad: QuadConfig,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub suites: Vec<Suite>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from(".")
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(CliError::Config(format!("unsupported schema {}, expected {SCHEMA_VERSION}", cfg.schema)));
        }
        cfg.suite_config().validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn suite_config(&self) -> SuiteConfig {
        SuiteConfig { n: self.n, m: self.m, quad: self.quad, tolerances: self.tolerances.clone(), seed: self.seed }
    }
}

/// The single JSON document written by `verify`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema: u32,
    pub passed: bool,
    pub reports: Vec<VerificationReport>,
}

pub fn run_verify(cfg: &RunConfig) -> CliResult<RunReport> {
    if cfg.suites.is_empty() {
        return Err(CliError::Config("no suites selected".into()));
    }
    let sc = cfg.suite_config();
    let reports = cfg.suites.iter().map(|s| run_suite(*s, &sc)).collect::<Result<Vec<_>, _>>()?;
    Ok(RunReport { schema: SCHEMA_VERSION, passed: reports.iter().all(|r| r.passed()), reports })
}

/// Write `bytes` to `path` through a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

pub fn write_report(dir: &Path, report: &RunReport) -> CliResult<PathBuf> {
    let path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(report).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub rz: Vec<f64>,
    pub rt: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CounterexampleSpec {
    #[serde(rename = "type")]
    kind: String,
    n: usize,
    m: usize,
    variant: Variant,
}

/// A tabulated source: a kernel, or a counterexample field on a given group.
#[derive(Clone, Debug, PartialEq)]
pub enum TableSource {
    Kernel(KernelSpec),
    Counterexample { n: usize, m: usize, variant: Variant },
}

impl TableSource {
    /// `{"type": "counterexample", "n", "m", "variant"}` or any kernel spec.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let bad = |e: serde_json::Error| CliError::Config(e.to_string());
        if value.get("type").and_then(|t| t.as_str()) == Some("counterexample") {
            let c: CounterexampleSpec = serde_json::from_value(value).map_err(bad)?;
            Ok(TableSource::Counterexample { n: c.n, m: c.m, variant: c.variant })
        } else {
            let spec: KernelSpec = serde_json::from_value(value).map_err(bad)?;
            spec.validate()?;
            Ok(TableSource::Kernel(spec))
        }
    }
}

/// Inline JSON when the argument starts with `{`, otherwise a path to a JSON file.
pub fn read_json_arg(arg: &str) -> CliResult<String> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        let path = Path::new(arg);
        fs::read_to_string(path).map_err(io_err(path))
    }
}

/// CSV `rz,rt,re,im` in row-major grid order, values in `{:.16e}`, LF line endings.
pub fn table_csv(source: &TableSource, grid: &Grid) -> CliResult<String> {
    if grid.rz.is_empty() || grid.rt.is_empty() {
        return Err(CliError::Config("grid needs at least one radius in each direction".into()));
    }
    if grid.rz.iter().chain(&grid.rt).any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(CliError::Config("grid radii must be finite and non-negative".into()));
    }
    let eval: Box<dyn Fn(f64, f64) -> CliResult<Complex64>> = match source {
        TableSource::Kernel(spec) => {
            let spec = *spec;
            Box::new(move |rz, rt| Ok(kernels::evaluate_radial(&spec, rz, rt)?))
        }
        TableSource::Counterexample { n, m, variant } => {
            let g = build_htype(*n, *m)?;
            let c = make_counterexample(&g, *variant)?;
            let (n, m) = (*n, *m);
            Box::new(move |rz, rt| {
                let mut p = GroupPoint::identity(n, m);
                p.z[0] = rz;
                p.t[0] = rt;
                Ok(c.field.evaluate(&p))
            })
        }
    };
    let mut out = String::from("rz,rt,re,im\n");
    for &rz in &grid.rz {
        for &rt in &grid.rt {
            let v = eval(rz, rt)?;
            out.push_str(&format!("{rz:.16e},{rt:.16e},{:.16e},{:.16e}\n", v.re, v.im));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Bessel,
    Laguerre,
}

/// First `count` zeros, one per line in `{:.16e}`. `degree` is required for Laguerre.
pub fn zeros_text(family: Family, order: f64, degree: Option<usize>, count: usize) -> CliResult<String> {
    let fam = match family {
        Family::Bessel => ZeroFamily::Bessel { order },
        Family::Laguerre => {
            let k = degree.ok_or_else(|| CliError::Config("laguerre zeros need --degree".into()))?;
            ZeroFamily::Laguerre { k, alpha: order }
        }
    };
    let mut out = String::new();
    for i in 1..=count {
        out.push_str(&format!("{:.16e}\n", find_zero(fam, i)?));
    }
    Ok(out)
}

pub fn group_check(n: usize, m: usize) -> CliResult<VerificationReport> {
    Ok(run_suite(Suite::Structure, &SuiteConfig::new(n, m))?)
}
