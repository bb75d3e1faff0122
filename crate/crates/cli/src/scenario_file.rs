//! The JSON scenario format.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "source": { "preset": "tomographic" },
//!   "mode": "asymptotic-asymmetric",
//!   "honest_device": { "preset": "extremal4" },
//!   "noise_eta": 1.0
//! }
//! ```

use std::path::Path;

use mdirand::linalg::{ComplexMatrix, HermitianOperator};
use mdirand::mdi::{Mode, Scenario};
use mdirand::quantum::{
    angle_states, asymmetric_probs, bloch_to_density, honest_statistics, mix_white_noise, povm_from_bloch,
    povm_from_matrices, tensor_ensemble, tensor_povm, BlochPovmSpec, DensityMatrix, DevicePreset, ObservedStatistics,
    Povm, SourcePreset, StateEnsemble,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub source: SourceSpec,
    pub mode: Mode,
    /// Explicit input distribution; excludes `q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_probs: Option<Vec<f64>>,
    /// Probability of the first input, the rest sharing `1 - q` equally.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub honest_device: Option<DeviceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_eta: Option<EtaSpec>,
    /// `statistics[a][x] = P(x|a)`, replacing the honest device.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistics: Option<Vec<Vec<f64>>>,
    /// 2 for two independent copies of the whole setup.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub copies: usize,
}

/// Exactly one of `preset`, `states`, `bloch`, `angle`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<SourcePreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<MatrixSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<Vec<[f64; 3]>>,
    /// The pair `sqrt(1 - a/2)|0> +- sqrt(a/2)|1>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    /// Tensor power: every product of `power` states from the base set.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub power: usize,
}

/// Exactly one of `preset`, `elements`, `bloch`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<DevicePreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<MatrixSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<BlochPovmSpec>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub power: usize,
}

/// A complex matrix as separate real and imaginary parts; `imag` defaults to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub real: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSpec {
    Value(f64),
    List(Vec<f64>),
    Range { from: f64, to: f64, steps: usize },
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self {
            preset: None,
            states: None,
            bloch: None,
            angle: None,
            power: 1,
        }
    }
}

impl Default for DeviceSpec {
    fn default() -> Self {
        Self {
            preset: None,
            elements: None,
            bloch: None,
            power: 1,
        }
    }
}

fn one() -> usize {
    1
}

fn is_one(v: &usize) -> bool {
    *v == 1
}

/// `steps` evenly spaced points from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![from],
        _ => (0..steps)
            .map(|i| if i + 1 == steps { to } else { from + (to - from) * i as f64 / (steps - 1) as f64 })
            .collect(),
    }
}

impl EtaSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            EtaSpec::Value(v) => vec![*v],
            EtaSpec::List(v) => v.clone(),
            EtaSpec::Range { from, to, steps } => linspace(*from, *to, *steps),
        }
    }
}

impl MatrixSpec {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let (re, im): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (0..m.rows())
            .map(|r| (0..m.cols()).map(|c| (m.get(r, c).re, m.get(r, c).im)).unzip())
            .unzip();
        let imag = im.iter().flatten().any(|v| *v != 0.0).then_some(im);
        Self { real: re, imag }
    }

    pub fn to_matrix(&self) -> mdirand::Result<ComplexMatrix> {
        match &self.imag {
            Some(im) => ComplexMatrix::from_parts(&self.real, im),
            None => {
                let zeros: Vec<Vec<f64>> = self.real.iter().map(|r| vec![0.0; r.len()]).collect();
                ComplexMatrix::from_parts(&self.real, &zeros)
            }
        }
    }
}

/// Which scenario parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Eta,
    Alpha,
    Q,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses and checks the file structure; serde reports line and column.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| schema(origin, e.to_string()))?;
        file.check_structure().map_err(|m| schema(origin, m))?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Field-level consistency that does not need any numerics.
    fn check_structure(&self) -> std::result::Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "schema_version: unsupported version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            ));
        }
        let s = &self.source;
        let given = [s.preset.is_some(), s.states.is_some(), s.bloch.is_some(), s.angle.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err("source: give exactly one of preset, states, bloch, angle".into());
        }
        if s.power == 0 {
            return Err("source.power: must be at least 1".into());
        }
        if let Some(dev) = &self.honest_device {
            let given = [dev.preset.is_some(), dev.elements.is_some(), dev.bloch.is_some()];
            if given.iter().filter(|&&g| g).count() != 1 {
                return Err("honest_device: give exactly one of preset, elements, bloch".into());
            }
            if dev.power == 0 {
                return Err("honest_device.power: must be at least 1".into());
            }
        }
        match (&self.honest_device, &self.noise_eta, &self.statistics) {
            (Some(_), Some(_), None) | (None, None, Some(_)) => {}
            (Some(_), None, None) => return Err("noise_eta: required with honest_device".into()),
            (None, Some(_), None) => return Err("honest_device: required with noise_eta".into()),
            _ => return Err("give either honest_device with noise_eta, or statistics".into()),
        }
        if let Some(eta) = &self.noise_eta {
            if eta.values().is_empty() {
                return Err("noise_eta: empty grid".into());
            }
        }
        if self.input_probs.is_some() && self.q.is_some() {
            return Err("give at most one of input_probs and q".into());
        }
        if self.mode == Mode::FiniteQ && self.input_probs.is_none() && self.q.is_none() {
            return Err("input_probs: finite-q mode needs input_probs or q".into());
        }
        if !(1..=2).contains(&self.copies) {
            return Err(format!("copies: must be 1 or 2, got {}", self.copies));
        }
        Ok(())
    }

    /// Noise values to evaluate; a single `None` for explicit statistics.
    pub fn etas(&self) -> Vec<Option<f64>> {
        match &self.noise_eta {
            Some(e) => e.values().into_iter().map(Some).collect(),
            None => vec![None],
        }
    }

    /// A copy with one parameter fixed to `value`.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<Self> {
        let mut f = self.clone();
        match param {
            SweepParam::Eta => {
                if f.honest_device.is_none() {
                    return Err(CliError::Sweep("eta sweep needs honest_device".into()));
                }
                f.noise_eta = Some(EtaSpec::Value(value));
            }
            SweepParam::Alpha => {
                if f.source.angle.is_none() {
                    return Err(CliError::Sweep("alpha sweep needs an angle source".into()));
                }
                f.source.angle = Some(value);
            }
            SweepParam::Q => {
                f.input_probs = None;
                f.q = Some(value);
            }
        }
        Ok(f)
    }

    /// The base states before any tensor power.
    pub fn base_states(&self) -> mdirand::Result<Vec<DensityMatrix>> {
        let s = &self.source;
        if let Some(p) = s.preset {
            Ok(p.states())
        } else if let Some(states) = &s.states {
            states
                .iter()
                .map(|m| DensityMatrix::new(HermitianOperator::new(m.to_matrix()?)?))
                .collect()
        } else if let Some(bloch) = &s.bloch {
            bloch.iter().map(|&r| bloch_to_density(r)).collect()
        } else {
            let (phi, psi) = angle_states(s.angle.unwrap_or_default())?;
            Ok(vec![phi, psi])
        }
    }

    pub fn ensemble(&self) -> mdirand::Result<StateEnsemble> {
        let base = StateEnsemble::uniform(self.base_states()?)?;
        let ens = if self.source.power > 1 { tensor_ensemble(&base, self.source.power)? } else { base };
        match (&self.input_probs, self.q) {
            (Some(p), _) => ens.with_input_probs(p.clone()),
            (None, Some(q)) => ens.with_input_probs(asymmetric_probs(ens.len(), q)?),
            (None, None) => Ok(ens),
        }
    }

    /// The honest POVM before any tensor power, with its Bloch form when it is a qubit POVM.
    pub fn base_povm(&self) -> Option<mdirand::Result<Povm>> {
        let dev = self.honest_device.as_ref()?;
        Some(if let Some(p) = dev.preset {
            Ok(p.povm())
        } else if let Some(spec) = &dev.bloch {
            povm_from_bloch(spec)
        } else {
            dev.elements
                .iter()
                .flatten()
                .map(MatrixSpec::to_matrix)
                .collect::<mdirand::Result<Vec<_>>>()
                .and_then(povm_from_matrices)
        })
    }

    pub fn povm(&self) -> Option<mdirand::Result<Povm>> {
        let power = self.honest_device.as_ref()?.power;
        Some(self.base_povm()?.and_then(|p| if power > 1 { tensor_povm(&p, power) } else { Ok(p) }))
    }

    /// The scenario at noise `eta` (ignored for explicit statistics).
    pub fn scenario(&self, eta: Option<f64>) -> mdirand::Result<Scenario> {
        let ens = self.ensemble()?;
        let observed = match (&self.statistics, self.povm(), eta) {
            (Some(rows), _, _) => ObservedStatistics::new(rows.clone(), ens.input_probs().to_vec())?,
            (None, Some(povm), Some(eta)) => mix_white_noise(&honest_statistics(&ens, &povm?)?, eta)?,
            _ => return Err(mdirand::Error::InvalidParameter("no statistics for this scenario".into())),
        };
        let s = Scenario::new(ens, observed, self.mode)?;
        if self.copies == 2 {
            s.doubled()
        } else {
            Ok(s)
        }
    }
}

fn schema(origin: &str, message: String) -> CliError {
    CliError::Schema {
        path: origin.to_string(),
        message,
    }
}

/// Builds the scenario, reporting numerical validity problems as schema errors.
pub fn build(file: &ScenarioFile, eta: Option<f64>, origin: &str) -> Result<Scenario> {
    file.scenario(eta).map_err(|e| {
        let field = match &e {
            mdirand::Error::InvalidProbabilities(_) if file.statistics.is_some() => "statistics",
            mdirand::Error::InvalidProbabilities(_) => "input_probs",
            mdirand::Error::InvalidBloch(_) | mdirand::Error::InvalidState(_) => "source",
            mdirand::Error::InvalidPovm(_) => "honest_device",
            _ => "scenario",
        };
        schema(origin, format!("{field}: {e}"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BLUE: &str = r#"{
        "schema_version": 1,
        "source": { "preset": "tomographic" },
        "mode": "asymptotic-asymmetric",
        "honest_device": { "preset": "extremal4" },
        "noise_eta": { "from": 0.5, "to": 1.0, "steps": 11 }
    }"#;

    #[test]
    fn parses_and_builds() {
        let f = ScenarioFile::parse(BLUE, "blue").unwrap();
        assert_eq!(f.etas().len(), 11);
        assert_eq!(f.etas()[10], Some(1.0));
        let s = f.scenario(Some(0.9)).unwrap();
        assert_eq!((s.n_inputs(), s.n_outcomes(), s.dim()), (4, 4, 2));
    }

    #[test]
    fn unknown_field_reports_position() {
        let text = BLUE.replace("\"mode\"", "\"moed\"");
        let err = ScenarioFile::parse(&text, "f.json").unwrap_err().to_string();
        assert!(err.contains("moed") && err.contains("line 4"), "{err}");
    }

    #[test]
    fn structure_errors_name_the_field() {
        let cases = [
            (BLUE.replace("\"schema_version\": 1", "\"schema_version\": 7"), "schema_version"),
            (BLUE.replace("{ \"preset\": \"tomographic\" }", "{ \"preset\": \"tomographic\", \"angle\": 0.5 }"), "source"),
            (BLUE.replace("asymptotic-asymmetric", "finite-q"), "input_probs"),
        ];
        for (text, field) in cases {
            let err = ScenarioFile::parse(&text, "f").unwrap_err().to_string();
            assert!(err.contains(field), "{err}");
        }
    }

    #[test]
    fn bad_statistics_row_is_a_schema_error() {
        let text = r#"{
            "schema_version": 1,
            "source": { "bloch": [[0, 0, 1]] },
            "mode": "finite-q",
            "input_probs": [1.0],
            "statistics": [[0.5, 0.4]]
        }"#;
        let f = ScenarioFile::parse(text, "f").unwrap();
        let err = build(&f, None, "f").unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("statistics"), "{err}");
    }

    #[test]
    fn explicit_matrices_match_presets() {
        let states: Vec<MatrixSpec> = SourcePreset::Tomographic
            .states()
            .iter()
            .map(|s| MatrixSpec::from_matrix(s.op().matrix()))
            .collect();
        let elements: Vec<MatrixSpec> = DevicePreset::Extremal4
            .povm()
            .elements()
            .iter()
            .map(|e| MatrixSpec::from_matrix(e.matrix()))
            .collect();
        let mut f = ScenarioFile::parse(BLUE, "blue").unwrap();
        let preset = f.scenario(Some(0.9)).unwrap();
        f.source = SourceSpec { states: Some(states), ..Default::default() };
        f.honest_device = Some(DeviceSpec { elements: Some(elements), ..Default::default() });
        let explicit = ScenarioFile::parse(&f.to_json(), "x").unwrap().scenario(Some(0.9)).unwrap();
        assert_eq!(preset.observed.n_outcomes(), explicit.observed.n_outcomes());
        for (a, b) in preset.observed.conditionals().iter().zip(explicit.observed.conditionals()) {
            for (p, q) in a.iter().zip(b) {
                assert!((p - q).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sweep_params_need_matching_fields() {
        let f = ScenarioFile::parse(BLUE, "blue").unwrap();
        assert!(f.with_param(SweepParam::Alpha, 0.3).is_err());
        let g = f.with_param(SweepParam::Q, 0.9).unwrap();
        assert_eq!(g.ensemble().unwrap().input_probs()[0], 0.9);
        assert_eq!(f.with_param(SweepParam::Eta, 0.7).unwrap().etas(), vec![Some(0.7)]);
    }

    #[test]
    fn linspace_hits_both_ends() {
        let v = linspace(0.8, 1.0, 21);
        assert_eq!(v.len(), 21);
        assert_eq!((v[0], v[20]), (0.8, 1.0));
        assert!((v[10] - 0.9).abs() < 1e-15);
    }
}
