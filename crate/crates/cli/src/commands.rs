use std::fmt::Write as _;
use std::path::Path;

use mdirand::mdi::{classical_bound, guessing_probability, RateResult};
use mdirand::quantum::{check_distribution, check_unbiased, extremality_defect, BlochPovmSpec, DevicePreset};
use mdirand::solver::SolverOptions;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::format::sig9;
use crate::scenario_file::{build, linspace, ScenarioFile, SweepParam};

pub const CSV_HEADER: &str = "param,rate_bits,rate_per_qubit,p_guess_upper,classical_bound_bits,status";

/// One evaluated scenario, as written by `rate --out`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRecord {
    pub noise_eta: Option<f64>,
    pub rate_bits: f64,
    pub rate_per_qubit: f64,
    pub p_guess_upper: f64,
    pub classical_bound_bits: f64,
    pub input_cost_bits: f64,
    pub net_expansion_bits: f64,
    pub status: String,
    pub clamped: bool,
    pub iterations: usize,
    pub raw_rows: usize,
    pub kept_rows: usize,
}

impl RateRecord {
    fn new(eta: Option<f64>, r: &RateResult) -> Self {
        Self {
            noise_eta: eta,
            rate_bits: r.rate_bits,
            rate_per_qubit: r.rate_per_qubit,
            p_guess_upper: r.p_guess_upper,
            classical_bound_bits: r.classical_bound_bits,
            input_cost_bits: r.input_cost_bits,
            net_expansion_bits: r.net_expansion_bits,
            status: r.diagnostics.status.to_string(),
            clamped: r.clamped,
            iterations: r.diagnostics.iterations,
            raw_rows: r.diagnostics.raw_rows,
            kept_rows: r.diagnostics.kept_rows,
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        if let Some(eta) = self.noise_eta {
            writeln!(s, "noise_eta             {}", sig9(eta)).unwrap();
        }
        writeln!(s, "rate_bits             {}", sig9(self.rate_bits)).unwrap();
        writeln!(s, "rate_per_qubit        {}", sig9(self.rate_per_qubit)).unwrap();
        writeln!(s, "p_guess_upper         {}", sig9(self.p_guess_upper)).unwrap();
        writeln!(s, "classical_bound_bits  {}", sig9(self.classical_bound_bits)).unwrap();
        writeln!(s, "input_cost_bits       {}", sig9(self.input_cost_bits)).unwrap();
        writeln!(s, "net_expansion_bits    {}", sig9(self.net_expansion_bits)).unwrap();
        writeln!(s, "status                {}", self.status).unwrap();
        if self.clamped {
            writeln!(s, "warning               certified bound exceeded 1 and was clamped").unwrap();
        }
        s
    }
}

/// Rates at every noise value of the file (or at `eta` when given).
pub fn cmd_rate(path: &Path, eta: Option<f64>, opts: &SolverOptions) -> Result<Vec<RateRecord>> {
    let file = ScenarioFile::load(path)?;
    let origin = path.display().to_string();
    let etas = match eta {
        Some(v) if file.honest_device.is_some() => vec![Some(v)],
        Some(_) => {
            return Err(CliError::Schema {
                path: origin,
                message: "noise_eta: --eta needs an honest_device".into(),
            })
        }
        None => file.etas(),
    };
    let scenarios = etas
        .iter()
        .map(|&e| build(&file, e, &origin))
        .collect::<Result<Vec<_>>>()?;
    etas.iter()
        .zip(&scenarios)
        .map(|(&e, s)| {
            guessing_probability(s, opts)
                .map(|r| RateRecord::new(e, &r))
                .map_err(CliError::Solver)
        })
        .collect()
}

/// Grid and parameter of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    /// Falls back to the file's noise grid for eta sweeps.
    pub grid: Option<(f64, f64, usize)>,
}

/// The CSV text plus the number of points whose solve failed.
pub struct SweepOutput {
    pub csv: String,
    pub failures: usize,
}

pub fn cmd_sweep(path: &Path, spec: &SweepSpec, opts: &SolverOptions) -> Result<SweepOutput> {
    let file = ScenarioFile::load(path)?;
    let origin = path.display().to_string();
    let grid = match (spec.grid, spec.param) {
        (Some((from, to, steps)), _) => linspace(from, to, steps),
        (None, SweepParam::Eta) => file.noise_eta.as_ref().map(|e| e.values()).unwrap_or_default(),
        (None, _) => return Err(CliError::Sweep("--from, --to and --steps are required".into())),
    };
    if grid.is_empty() {
        return Err(CliError::Sweep("empty grid".into()));
    }
    if spec.param != SweepParam::Eta && file.etas().len() > 1 {
        return Err(CliError::Sweep("noise_eta must be a single value unless sweeping eta".into()));
    }
    // input errors abort before any solve
    let scenarios = grid
        .iter()
        .map(|&v| {
            let f = file.with_param(spec.param, v)?;
            build(&f, f.etas()[0], &origin)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<(String, bool)> = grid
        .par_iter()
        .zip(scenarios.par_iter())
        .map(|(&v, s)| match guessing_probability(s, opts) {
            Ok(r) => (
                format!(
                    "{},{},{},{},{},{}",
                    sig9(v),
                    sig9(r.rate_bits),
                    sig9(r.rate_per_qubit),
                    sig9(r.p_guess_upper),
                    sig9(r.classical_bound_bits),
                    r.diagnostics.status
                ),
                true,
            ),
            Err(e) => {
                let status = match e {
                    mdirand::Error::Solver { status, .. } => status,
                    _ => "error".to_string(),
                };
                (format!("{},nan,nan,nan,{},{status}", sig9(v), sig9(classical_bound(s))), false)
            }
        })
        .collect();
    let mut csv = String::with_capacity(64 * (rows.len() + 1));
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for (row, _) in &rows {
        csv.push_str(row);
        csv.push('\n');
    }
    Ok(SweepOutput {
        csv,
        failures: rows.iter().filter(|(_, ok)| !ok).count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
}

impl Check {
    fn new(name: &str, result: std::result::Result<String, String>) -> Self {
        let (outcome, detail) = match result {
            Ok(d) => (Outcome::Pass, d),
            Err(d) => (Outcome::Fail, d),
        };
        Self {
            name: name.into(),
            outcome,
            detail,
        }
    }

    fn skip(name: &str, why: &str) -> Self {
        Self {
            name: name.into(),
            outcome: Outcome::Skip,
            detail: why.into(),
        }
    }

    pub fn render(&self) -> String {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        if self.detail.is_empty() {
            format!("{tag} {}", self.name)
        } else {
            format!("{tag} {}: {}", self.name, self.detail)
        }
    }
}

/// Structural checks on a parsed file, each reported on its own.
pub fn validate_file(file: &ScenarioFile) -> Vec<Check> {
    let mut checks = Vec::new();
    checks.push(Check::new(
        "states",
        file.base_states()
            .map(|s| format!("{} valid density matrices", s.len()))
            .map_err(|e| e.to_string()),
    ));
    let ensemble = file.ensemble();
    checks.push(Check::new(
        "ensemble",
        ensemble
            .as_ref()
            .map(|e| format!("{} inputs, dimension {}", e.len(), e.dim()))
            .map_err(|e| e.to_string()),
    ));
    if let Some(p) = &file.input_probs {
        checks.push(Check::new(
            "input_probs",
            check_distribution(p).map(|_| String::new()).map_err(|e| e.to_string()),
        ));
    }
    match file.povm() {
        None => checks.push(Check::skip("povm", "explicit statistics")),
        Some(povm) => checks.push(Check::new(
            "povm",
            povm.map(|p| format!("{} PSD elements summing to identity", p.outcomes()))
                .map_err(|e| e.to_string()),
        )),
    }
    match bloch_spec(file) {
        Some(spec) => {
            let n_o = spec.outcomes();
            checks.push(Check::new(
                "unbiased",
                if check_unbiased(&spec, n_o) {
                    Ok("uniform outcomes on |+>".into())
                } else {
                    Err("outcomes on |+> are not uniform".into())
                },
            ));
            checks.push(Check::new(
                "extremal",
                match extremality_defect(&spec) {
                    None => Ok("rank-one, linearly independent elements".into()),
                    Some(d) => Err(d.to_string()),
                },
            ));
        }
        None => {
            let why = if file.honest_device.is_some() { "not a single-qubit Bloch POVM" } else { "explicit statistics" };
            checks.push(Check::skip("unbiased", why));
            checks.push(Check::skip("extremal", why));
        }
    }
    if let Some(rows) = &file.statistics {
        let result = match &ensemble {
            Ok(e) => mdirand::quantum::ObservedStatistics::new(rows.clone(), e.input_probs().to_vec())
                .map(|_| String::new())
                .map_err(|e| e.to_string()),
            Err(_) => Err("needs a valid ensemble".into()),
        };
        checks.push(Check::new("statistics", result));
    }
    if let Some(eta) = &file.noise_eta {
        let bad: Vec<f64> = eta.values().into_iter().filter(|v| !(0.0..=1.0).contains(v)).collect();
        checks.push(Check::new(
            "noise_eta",
            if bad.is_empty() { Ok(String::new()) } else { Err(format!("outside [0, 1]: {bad:?}")) },
        ));
    }
    checks
}

/// The Bloch form of a single-qubit honest device.
fn bloch_spec(file: &ScenarioFile) -> Option<BlochPovmSpec> {
    let dev = file.honest_device.as_ref()?;
    if dev.power != 1 {
        return None;
    }
    dev.preset
        .map(DevicePreset::spec)
        .or_else(|| dev.bloch.clone())
        .or_else(|| file.base_povm()?.ok()?.bloch_spec())
}

pub fn cmd_validate(path: &Path) -> Result<Vec<Check>> {
    Ok(validate_file(&ScenarioFile::load(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(device: &str, source: &str) -> ScenarioFile {
        let text = format!(
            r#"{{"schema_version": 1, "source": {source}, "mode": "asymptotic-asymmetric",
                "honest_device": {device}, "noise_eta": 1.0}}"#
        );
        ScenarioFile::parse(&text, "t").unwrap()
    }

    fn outcome(checks: &[Check], name: &str) -> (Outcome, String) {
        let c = checks.iter().find(|c| c.name == name).unwrap();
        (c.outcome, c.detail.clone())
    }

    #[test]
    fn extremal4_passes_everything() {
        let checks = validate_file(&file(r#"{"preset": "extremal4"}"#, r#"{"preset": "tomographic"}"#));
        assert!(checks.iter().all(|c| c.outcome == Outcome::Pass), "{checks:?}");
    }

    #[test]
    fn coplanar_directions_are_diagnosed() {
        let device = r#"{"bloch": {"weights": [0.25, 0.25, 0.25, 0.25],
            "directions": [[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]]}}"#;
        let checks = validate_file(&file(device, r#"{"preset": "tomographic"}"#));
        let (o, d) = outcome(&checks, "extremal");
        assert_eq!(o, Outcome::Fail);
        assert!(d.contains("coplanar"), "{d}");
        assert_eq!(outcome(&checks, "povm").0, Outcome::Pass);
    }

    #[test]
    fn long_bloch_vector_fails_state_check() {
        let checks = validate_file(&file(r#"{"preset": "sigma_z"}"#, r#"{"bloch": [[0, 0, 1.2], [1, 0, 0]]}"#));
        assert_eq!(outcome(&checks, "states").0, Outcome::Fail);
        assert_eq!(outcome(&checks, "ensemble").0, Outcome::Fail);
        assert_eq!(outcome(&checks, "povm").0, Outcome::Pass);
    }

    #[test]
    fn tilted_projector_is_biased_but_extremal() {
        let checks = validate_file(&file(r#"{"preset": "sigma_z"}"#, r#"{"preset": "plus_zero"}"#));
        assert_eq!(outcome(&checks, "unbiased").0, Outcome::Pass);
        let tilted = r#"{"bloch": {"weights": [0.5, 0.5], "directions": [[0.6, 0, 0.8], [-0.6, 0, -0.8]]}}"#;
        let checks = validate_file(&file(tilted, r#"{"preset": "plus_zero"}"#));
        assert_eq!(outcome(&checks, "unbiased").0, Outcome::Fail);
        assert_eq!(outcome(&checks, "extremal").0, Outcome::Pass);
    }
}
