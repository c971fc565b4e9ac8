//! Run configuration: a TOML file with `[case]`, `[grid]`, `[scheme]`,
//! `[coupling]` and `[output]` tables.
//!
//! ```toml
//! [case]
//! name = "two-vortices"   # density-wave | taylor-green | two-vortices | wind-driven | khi
//! mu = 2e-4               # any case parameter may be overridden
//!
//! [grid]
//! nx = 40                 # cells in x (both subdomains)
//! nz1 = 200               # cells in z, lower subdomain (single-domain cases: nz1 = nx by default)
//! nz2 = 40                # cells in z, upper subdomain
//!
//! [scheme]
//! name = "ark2"           # rk2 | rk3 | rk4 | ark2 | ark3 | ark4
//! operator = "Lz"         # L | LI | Lz
//! stiff = "linearized"    # linearized | nonlinear
//! dt = 0.01
//! t_end = 2.0             # or `steps`
//! krylov_tol = 1e-4
//!
//! [coupling]
//! mode = "SC"             # TC | CC | SC
//! substeps = 2
//!
//! [output]
//! dir = "out"
//! diagnostics_every = 10  # 0: first and last step only
//! snapshot_every = 0      # 0: initial and final fields only
//! ```
//!
//! Unset keys take per-case defaults, see [`RunConfig::resolve`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cases::{CaseSpec, GridSizes};
use crate::coupling::{CouplingConfig, CouplingMode, StiffTreatment};
use crate::error::{Error, Result};
use crate::linop::LinearOperatorKind;
use crate::tableau::{tableau, NAMES};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nz1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nz2: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stiff: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonlinear_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonlinear_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub krylov_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_krylov_iterations: Option<usize>,
    /// Timestep of the RK4 reference in time-convergence studies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_dt: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub substeps: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
}

/// Parsed configuration file, before defaults are applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: CaseSpec,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub coupling: CouplingSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Configuration with all defaults applied and values checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub case: CaseSpec,
    pub grid: GridSizes,
    pub coupling: CouplingConfig,
    /// End time; the last step is shortened to land on it.
    pub t_end: f64,
    pub reference_dt: f64,
    pub output_dir: PathBuf,
    pub snapshot_every: usize,
}

struct CaseDefaults {
    nx: usize,
    nz1: usize,
    nz2: usize,
    scheme: &'static str,
    dt: f64,
    t_end: f64,
    krylov_tol: f64,
    reference_dt: f64,
}

fn case_defaults(case: &CaseSpec) -> CaseDefaults {
    match case {
        CaseSpec::DensityWave(_) => {
            CaseDefaults { nx: 20, nz1: 20, nz2: 0, scheme: "rk4", dt: 6.25e-5, t_end: 0.1, krylov_tol: 1e-4, reference_dt: 6.25e-5 }
        }
        CaseSpec::TaylorGreen(_) => {
            CaseDefaults { nx: 20, nz1: 20, nz2: 0, scheme: "rk4", dt: 1e-6, t_end: 1e-3, krylov_tol: 1e-4, reference_dt: 1e-6 }
        }
        CaseSpec::TwoVortices(_) => {
            CaseDefaults { nx: 40, nz1: 200, nz2: 40, scheme: "rk4", dt: 0.01, t_end: 2.0, krylov_tol: 1e-4, reference_dt: 5e-4 }
        }
        CaseSpec::WindDriven(_) => {
            CaseDefaults { nx: 80, nz1: 80, nz2: 80, scheme: "rk4", dt: 0.01, t_end: 10.0, krylov_tol: 1e-4, reference_dt: 5e-4 }
        }
        CaseSpec::Khi(_) => {
            CaseDefaults { nx: 50, nz1: 200, nz2: 40, scheme: "ark4", dt: 0.005, t_end: 2.5, krylov_tol: 1e-2, reference_dt: 5e-4 }
        }
    }
}

fn key_err(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses `text` after applying `section.key=value` overrides.
    pub fn from_toml_str_with(text: &str, overrides: &[String]) -> Result<Self> {
        if overrides.is_empty() {
            return Self::from_toml_str(text);
        }
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Applies per-case defaults and validates every value.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        self.case.validate()?;
        let d = case_defaults(&self.case);
        let nx = self.grid.nx.unwrap_or(d.nx);
        let nz1 = self.grid.nz1.unwrap_or(if self.case.is_coupled() { d.nz1 } else { nx });
        let nz2 = if self.case.is_coupled() { self.grid.nz2.unwrap_or(d.nz2) } else { 0 };
        if nx == 0 {
            return Err(key_err("grid.nx", "must be positive"));
        }
        if nz1 == 0 {
            return Err(key_err("grid.nz1", "must be positive"));
        }
        if self.case.is_coupled() && nz2 == 0 {
            return Err(key_err("grid.nz2", "must be positive"));
        }

        let name = self.scheme.name.clone().unwrap_or_else(|| d.scheme.into()).to_ascii_lowercase();
        if !NAMES.contains(&name.as_str()) {
            return Err(key_err("scheme.name", format!("unknown scheme '{name}' (expected one of {})", NAMES.join(", "))));
        }
        let operator: LinearOperatorKind = match &self.scheme.operator {
            Some(s) => s.parse().map_err(|e: Error| key_err("scheme.operator", e))?,
            None => LinearOperatorKind::Vertical,
        };
        let stiff = match self.scheme.stiff.as_deref().unwrap_or("linearized") {
            "linearized" => StiffTreatment::Linearized,
            "nonlinear" => StiffTreatment::Nonlinear {
                max_iterations: self.scheme.nonlinear_iterations.unwrap_or(10),
                tolerance: self.scheme.nonlinear_tol.unwrap_or(1e-10),
            },
            other => return Err(key_err("scheme.stiff", format!("expected linearized or nonlinear, got '{other}'"))),
        };
        let dt = self.scheme.dt.unwrap_or(d.dt);
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(key_err("scheme.dt", format!("must be positive, got {dt}")));
        }
        let t_end = match (self.scheme.t_end, self.scheme.steps) {
            (Some(_), Some(_)) => return Err(key_err("scheme.steps", "give either t_end or steps, not both")),
            (Some(t), None) => t,
            (None, Some(n)) => n as f64 * dt,
            (None, None) => d.t_end,
        };
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(key_err("scheme.t_end", format!("must be nonnegative, got {t_end}")));
        }
        let krylov_tol = self.scheme.krylov_tol.unwrap_or(d.krylov_tol);
        if !(krylov_tol > 0.0 && krylov_tol < 1.0) {
            return Err(key_err("scheme.krylov_tol", format!("must lie in (0, 1), got {krylov_tol}")));
        }
        let reference_dt = self.scheme.reference_dt.unwrap_or(d.reference_dt);
        if !(reference_dt > 0.0) {
            return Err(key_err("scheme.reference_dt", format!("must be positive, got {reference_dt}")));
        }
        let substeps = self.coupling.substeps.unwrap_or(1);
        if substeps == 0 {
            return Err(key_err("coupling.substeps", "must be at least 1"));
        }
        let mode = match self.coupling.mode.as_deref().unwrap_or("TC").to_ascii_uppercase().as_str() {
            "TC" => CouplingMode::Tight,
            "CC" => CouplingMode::Concurrent(substeps),
            "SC" => CouplingMode::Sequential(substeps),
            other => return Err(key_err("coupling.mode", format!("expected TC, CC or SC, got '{other}'"))),
        };
        if !self.case.is_coupled() && mode != CouplingMode::Tight {
            return Err(key_err("coupling.mode", "loose coupling needs a two-domain case"));
        }
        let coupling = CouplingConfig {
            scheme: name,
            stiff,
            operator,
            mode,
            dt,
            krylov_tol,
            max_krylov_iterations: self.scheme.max_krylov_iterations.unwrap_or(500),
            output_every: self.output.diagnostics_every.unwrap_or(0),
        };
        coupling.validate()?;
        Ok(ResolvedConfig {
            case: self.case.clone(),
            grid: GridSizes { nx, nz1, nz2 },
            coupling,
            t_end,
            reference_dt,
            output_dir: self.output.dir.clone().unwrap_or_else(|| PathBuf::from("out")),
            snapshot_every: self.output.snapshot_every.unwrap_or(0),
        })
    }
}

impl ResolvedConfig {
    pub fn method_name(&self) -> Result<String> {
        Ok(self.coupling.method_name(&tableau(&self.coupling.scheme)?))
    }

    /// The resolved values as a config that parses back to itself.
    pub fn to_run_config(&self) -> RunConfig {
        let c = &self.coupling;
        let (mode, substeps) = match c.mode {
            CouplingMode::Tight => ("TC", 1),
            CouplingMode::Concurrent(n) => ("CC", n),
            CouplingMode::Sequential(n) => ("SC", n),
        };
        let (stiff, it, tol) = match c.stiff {
            StiffTreatment::Linearized => ("linearized", None, None),
            StiffTreatment::Nonlinear { max_iterations, tolerance } => ("nonlinear", Some(max_iterations), Some(tolerance)),
        };
        RunConfig {
            case: self.case.clone(),
            grid: GridSection {
                nx: Some(self.grid.nx),
                nz1: Some(self.grid.nz1),
                nz2: self.case.is_coupled().then_some(self.grid.nz2),
            },
            scheme: SchemeSection {
                name: Some(c.scheme.clone()),
                operator: Some(c.operator.label().to_string()),
                stiff: Some(stiff.into()),
                nonlinear_iterations: it,
                nonlinear_tol: tol,
                dt: Some(c.dt),
                t_end: Some(self.t_end),
                steps: None,
                krylov_tol: Some(c.krylov_tol),
                max_krylov_iterations: Some(c.max_krylov_iterations),
                reference_dt: Some(self.reference_dt),
            },
            coupling: CouplingSection { mode: Some(mode.into()), substeps: Some(substeps) },
            output: OutputSection {
                dir: Some(self.output_dir.clone()),
                diagnostics_every: Some(c.output_every),
                snapshot_every: Some(self.snapshot_every),
            },
        }
    }
}

/// Sets `section.key = value` in a parsed table. The value is read as a
/// TOML value, falling back to a plain string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not of the form section.key=value")))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| Error::Config(format!("override key '{}' needs a section, e.g. scheme.dt", path.trim())))?;
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let entry = table.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    let toml::Value::Table(sec) = entry else {
        return Err(Error::Config(format!("'{section}' is not a table")));
    };
    sec.insert(key.trim().to_string(), value);
    Ok(())
}

/// Reads and parses a config file.
pub fn parse_config(path: &Path, overrides: &[String]) -> Result<(RunConfig, String)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let cfg = RunConfig::from_toml_str_with(&text, overrides).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    Ok((cfg, text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_density_wave_defaults() {
        let c = RunConfig::from_toml_str("[case]\nname = \"density-wave\"\n").unwrap().resolve().unwrap();
        assert_eq!(c.coupling.scheme, "rk4");
        assert_eq!(c.coupling.dt, 6.25e-5);
        assert_eq!(c.grid, GridSizes { nx: 20, nz1: 20, nz2: 0 });
        assert_eq!(c.t_end, 0.1);
        assert_eq!(c.method_name().unwrap(), "RK4");
    }

    #[test]
    fn sequential_naming() {
        let text = "[case]\nname = \"two-vortices\"\n[scheme]\nname = \"ark2\"\noperator = \"Lz\"\n[coupling]\nmode = \"SC\"\nsubsteps = 2\n";
        let c = RunConfig::from_toml_str(text).unwrap().resolve().unwrap();
        assert_eq!(c.method_name().unwrap(), "ARK2(Lᶻ,SC2)");
    }

    #[test]
    fn duplicate_and_unknown_keys_rejected() {
        assert!(RunConfig::from_toml_str("[case]\nname = \"khi\"\nname = \"khi\"\n").is_err());
        assert!(RunConfig::from_toml_str("[case]\nname = \"khi\"\n[grid]\nny = 3\n").is_err());
        assert!(RunConfig::from_toml_str("[case]\nname = \"khi\"\n[extra]\n").is_err());
    }

    #[test]
    fn syntax_error_reports_line() {
        let e = RunConfig::from_toml_str("[case]\nname = \"khi\"\n[grid]\nnx = = 3\n").unwrap_err();
        assert!(e.to_string().contains("line 4"), "{e}");
    }

    #[test]
    fn semantic_error_names_key() {
        let e = RunConfig::from_toml_str("[case]\nname = \"khi\"\n[scheme]\ndt = -1.0\n").unwrap().resolve().unwrap_err();
        assert!(e.to_string().contains("scheme.dt"), "{e}");
        let e = RunConfig::from_toml_str("[case]\nname = \"khi\"\n[scheme]\nname = \"rk9\"\n").unwrap().resolve().unwrap_err();
        assert!(e.to_string().contains("scheme.name"), "{e}");
    }

    #[test]
    fn overrides() {
        let over = vec!["scheme.dt=0.5".to_string(), "coupling.mode=SC".to_string(), "case.mu=0.01".to_string()];
        let c = RunConfig::from_toml_str_with("[case]\nname = \"wind-driven\"\n", &over).unwrap();
        assert_eq!(c.scheme.dt, Some(0.5));
        assert_eq!(c.coupling.mode.as_deref(), Some("SC"));
        assert!(matches!(c.case, CaseSpec::WindDriven(ref w) if w.mu == 0.01));
        assert!(RunConfig::from_toml_str_with("[case]\nname = \"khi\"\n", &["dt=1".into()]).is_err());
    }

    #[test]
    fn echo_round_trip() {
        let text = "[case]\nname = \"khi\"\na = 0.07\n[grid]\nnx = 10\n[coupling]\nmode = \"CC\"\nsubsteps = 8\n";
        let a = RunConfig::from_toml_str(text).unwrap();
        let b = RunConfig::from_toml_str(&a.to_toml_string().unwrap()).unwrap();
        assert_eq!(a, b);
        let r = a.resolve().unwrap();
        let rc = r.to_run_config();
        let again = RunConfig::from_toml_str(&rc.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, rc);
        assert_eq!(again.resolve().unwrap(), r);
    }
}
