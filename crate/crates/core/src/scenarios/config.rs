use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::LindbladConfig;
use crate::error::{Error, Result};
use crate::fockspace::HilbertSpace;
use crate::model::{DriveParams, ModelParams};
use crate::spectra::find_min_splitting;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    LevelsTwoPhoton,
    SplittingVsCoupling,
    DynamicsTwoPhoton,
    DrivenDynamics,
    LevelsOnePhoton,
    DynamicsOnePhoton,
    Converge,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::LevelsTwoPhoton,
        Scenario::SplittingVsCoupling,
        Scenario::DynamicsTwoPhoton,
        Scenario::DrivenDynamics,
        Scenario::LevelsOnePhoton,
        Scenario::DynamicsOnePhoton,
        Scenario::Converge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::LevelsTwoPhoton => "levels_two_photon",
            Scenario::SplittingVsCoupling => "splitting_vs_coupling",
            Scenario::DynamicsTwoPhoton => "dynamics_two_photon",
            Scenario::DrivenDynamics => "driven_dynamics",
            Scenario::LevelsOnePhoton => "levels_one_photon",
            Scenario::DynamicsOnePhoton => "dynamics_one_photon",
            Scenario::Converge => "converge",
        }
    }

    fn is_one_photon(self) -> bool {
        matches!(self, Scenario::LevelsOnePhoton | Scenario::DynamicsOnePhoton)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
                Error::Config(format!("unknown scenario '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// Evenly spaced grid `start..=stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.stop > self.start) {
            return Err(Error::Config(format!(
                "sweep needs start < stop, got {} .. {}",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(Error::Config("sweep needs at least two points".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        crate::spectra::linspace(self.start, self.stop, self.points)
    }
}

/// Sample times `0..=end/Ω_eff`, with `end` given in units of Ω_eff·t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub omega_eff_t_end: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_eff_t_end.is_finite() && self.omega_eff_t_end > 0.0) || self.samples < 2 {
            return Err(Error::Config(
                "time grid needs a positive end and at least two samples".into(),
            ));
        }
        Ok(())
    }

    pub fn times(&self, omega_eff: f64) -> Vec<f64> {
        crate::spectra::linspace(0.0, self.omega_eff_t_end / omega_eff, self.samples)
    }
}

/// One run of a dynamics scenario. Unset fields fall back to the
/// top-level config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunCase {
    pub name: String,
    #[serde(default)]
    pub lindblad: Option<LindbladConfig>,
    /// Overrides the drive amplitude Λ.
    #[serde(default)]
    pub amplitude: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub model: ModelParams,
    pub space: HilbertSpace,
    pub lindblad: LindbladConfig,
    #[serde(default)]
    pub drive: Option<DriveParams>,
    /// ωq grid for level scenarios, λ = κ grid for splitting_vs_coupling.
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub time: Option<TimeGrid>,
    /// ωq bracket for the anticrossing search.
    pub bracket: (f64, f64),
    /// Levels written per grid point (ground included).
    pub n_levels: usize,
    /// Eigenstates kept for dynamics; all if unset.
    #[serde(default)]
    pub n_states: Option<usize>,
    /// Put ωq at the located anticrossing (and σ = 1/(10 Ω_eff) for the
    /// drive) before running dynamics.
    pub auto_resonance: bool,
    #[serde(default)]
    pub cases: Vec<RunCase>,
    pub output_dir: PathBuf,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.lindblad.validate()?;
        for case in &self.cases {
            if let Some(l) = &case.lindblad {
                l.validate()?;
            }
            if case.name.is_empty()
                || !case
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return Err(Error::Config(format!("bad case name '{}'", case.name)));
            }
        }
        let (lo, hi) = self.bracket;
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            return Err(Error::Config(format!("bad bracket ({lo}, {hi})")));
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        if let Some(t) = &self.time {
            t.validate()?;
        }
        if let Some(d) = &self.drive {
            d.validate()?;
        }
        let expected_kind = if self.scenario.is_one_photon() {
            crate::model::CouplingKind::OnePhoton
        } else {
            crate::model::CouplingKind::TwoPhoton
        };
        if self.model.coupling_kind != expected_kind && self.scenario != Scenario::Converge {
            return Err(Error::Config(format!(
                "{} expects {:?} coupling",
                self.scenario, expected_kind
            )));
        }
        let need = |present: bool, what: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!("{} requires '{what}'", self.scenario)))
            }
        };
        match self.scenario {
            Scenario::LevelsTwoPhoton | Scenario::LevelsOnePhoton => {
                need(self.sweep.is_some(), "sweep")?
            }
            Scenario::SplittingVsCoupling => need(self.sweep.is_some(), "sweep")?,
            Scenario::DynamicsTwoPhoton | Scenario::DynamicsOnePhoton => {
                need(self.time.is_some(), "time")?
            }
            Scenario::DrivenDynamics => {
                need(self.time.is_some(), "time")?;
                need(self.drive.is_some(), "drive")?;
            }
            Scenario::Converge => {}
        }
        if self.n_levels < 2 {
            return Err(Error::Config("n_levels must be at least 2".into()));
        }
        if matches!(self.n_states, Some(m) if m < 2) {
            return Err(Error::Config("n_states must be at least 2".into()));
        }
        Ok(())
    }

    /// The effective Lindblad rates of a case.
    pub fn case_lindblad(&self, case: &RunCase) -> LindbladConfig {
        case.lindblad.unwrap_or(self.lindblad)
    }

    /// Cases to run; a single case named after the scenario if none are
    /// listed.
    pub fn effective_cases(&self) -> Vec<RunCase> {
        if self.cases.is_empty() {
            vec![RunCase {
                name: "run".into(),
                lindblad: None,
                amplitude: None,
            }]
        } else {
            self.cases.clone()
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn from_json(value: Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Cases of the two-photon dissipation study: ideal, cavity loss only, and
/// all channels.
fn two_photon_cases() -> Vec<RunCase> {
    vec![
        RunCase {
            name: "ideal".into(),
            lindblad: Some(LindbladConfig::ideal()),
            amplitude: None,
        },
        RunCase {
            name: "cavity_loss".into(),
            lindblad: Some(LindbladConfig {
                gamma_a: 1e-2,
                gamma_m: 0.0,
                gamma_q: 0.0,
            }),
            amplitude: None,
        },
        RunCase {
            name: "all_losses".into(),
            lindblad: Some(LindbladConfig {
                gamma_a: 5e-4,
                gamma_m: 1e-3,
                gamma_q: 5e-4,
            }),
            amplitude: None,
        },
    ]
}

fn driven_cases() -> Vec<RunCase> {
    vec![
        RunCase {
            name: "lambda_pi_over_4".into(),
            lindblad: None,
            amplitude: Some(PI / 4.0),
        },
        RunCase {
            name: "lambda_pi".into(),
            lindblad: None,
            amplitude: Some(PI),
        },
    ]
}

/// The parameter set of each scenario, with ωq moved to the located
/// anticrossing and the pulse width set to 1/(10 Ω_eff) where relevant.
pub fn default_config(scenario: Scenario) -> ScenarioConfig {
    let two = ModelParams::two_photon_default();
    let one = ModelParams::one_photon_default();
    let space = HilbertSpace::default_truncation();
    let mut config = ScenarioConfig {
        scenario,
        model: two,
        space,
        lindblad: LindbladConfig::ideal(),
        drive: None,
        sweep: None,
        time: None,
        bracket: (1.0, 1.1),
        n_levels: 8,
        n_states: None,
        auto_resonance: false,
        cases: Vec::new(),
        output_dir: PathBuf::from("out"),
    };
    match scenario {
        Scenario::LevelsTwoPhoton => {
            config.sweep = Some(SweepSpec {
                start: 0.9,
                stop: 1.2,
                points: 301,
            });
        }
        Scenario::SplittingVsCoupling => {
            config.sweep = Some(SweepSpec {
                start: 0.005,
                stop: 0.12,
                points: 24,
            });
            config.bracket = (0.98, 1.1);
        }
        Scenario::DynamicsTwoPhoton => {
            config.time = Some(TimeGrid {
                omega_eff_t_end: 4.0 * PI,
                samples: 801,
            });
            config.n_states = Some(40);
            config.auto_resonance = true;
            config.cases = two_photon_cases();
        }
        Scenario::DrivenDynamics => {
            config.lindblad = LindbladConfig::uniform(1e-4);
            config.time = Some(TimeGrid {
                omega_eff_t_end: 0.5 + 3.0 * PI,
                samples: 601,
            });
            config.n_states = Some(100);
            config.auto_resonance = true;
            config.cases = driven_cases();
            config.drive = Some(DriveParams {
                amplitude: PI,
                omega_d: two.omega_m,
                sigma_pulse: 1.0,
                t0: 5.0,
            });
        }
        Scenario::LevelsOnePhoton => {
            config.model = one;
            config.bracket = (0.1, 0.3);
            config.sweep = Some(SweepSpec {
                start: 0.02,
                stop: 0.4,
                points: 381,
            });
        }
        Scenario::DynamicsOnePhoton => {
            config.model = one;
            config.bracket = (0.1, 0.3);
            config.time = Some(TimeGrid {
                omega_eff_t_end: 4.0 * PI,
                samples: 801,
            });
            config.n_states = Some(40);
            config.auto_resonance = true;
        }
        Scenario::Converge => {}
    }
    fill_derived(&mut config);
    config
}

/// Sets ωq to the anticrossing and, for driven runs, σ = 1/(10 Ω_eff) and a
/// pulse centre 5σ into the run. Leaves the config unchanged if the search
/// fails.
fn fill_derived(config: &mut ScenarioConfig) {
    if config.scenario == Scenario::SplittingVsCoupling {
        return;
    }
    match find_min_splitting(&config.model, &config.space, config.bracket) {
        Ok(split) => {
            config.model.omega_q = split.omega_q_min;
            if let Some(drive) = config.drive.as_mut() {
                drive.sigma_pulse = 1.0 / (10.0 * split.omega_eff());
                drive.t0 = 5.0 * drive.sigma_pulse;
            }
        }
        Err(e) => log::warn!("default {}: anticrossing search failed: {e}", config.scenario),
    }
}

/// Recursively merges `patch` into `base`; objects merge key by key, other
/// values replace.
pub fn merge_json(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge_json(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

/// Applies `key.path=value`. The value is parsed as JSON, or taken as a
/// string if that fails. Missing intermediate objects are created.
pub fn apply_override(config: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
    let path = path.trim();
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("bad override key '{path}'")));
    }
    let value: Value =
        serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = config;
    let keys: Vec<&str> = path.split('.').collect();
    for key in &keys[..keys.len() - 1] {
        if !node.is_object() {
            *node = Value::Object(Default::default());
        }
        node = node
            .as_object_mut()
            .expect("object")
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    if !node.is_object() {
        *node = Value::Object(Default::default());
    }
    node.as_object_mut()
        .expect("object")
        .insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

/// Builds a config from the scenario defaults, an optional JSON document and
/// `key=value` overrides, in that order.
pub fn load_config(
    scenario: Scenario,
    file: Option<Value>,
    overrides: &[String],
) -> Result<ScenarioConfig> {
    let mut value = default_config(scenario).to_json();
    if let Some(patch) = file {
        if let Some(s) = patch.get("scenario") {
            if s.as_str() != Some(scenario.name()) {
                return Err(Error::Config(format!(
                    "config file is for scenario {s}, not {scenario}"
                )));
            }
        }
        merge_json(&mut value, patch);
    }
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let config = ScenarioConfig::from_json(value)?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn defaults_follow_parameter_sets() {
        let c = default_config(Scenario::DynamicsTwoPhoton);
        assert_eq!(c.model.omega_m, 1.05);
        assert!((c.model.omega_q - 1.052).abs() < 0.003);
        assert_eq!(default_config(Scenario::LevelsOnePhoton).model.kappa, 0.08);
        let d = default_config(Scenario::DrivenDynamics);
        let drive = d.drive.unwrap();
        assert_eq!(drive.omega_d, d.model.omega_m);
        // σ = 1/(10 Ω_eff) with Ω_eff ≈ 3.5e-3
        assert!((drive.sigma_pulse - 28.5).abs() < 1.5, "{}", drive.sigma_pulse);
        for s in Scenario::ALL {
            default_config(s).validate().unwrap();
        }
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
            assert_eq!(serde_json::to_value(s).unwrap(), json!(s.name()));
        }
        assert!("levels".parse::<Scenario>().is_err());
    }

    #[test]
    fn merge_and_override() {
        let mut base = json!({"a": {"b": 1, "c": 2}, "d": [1, 2]});
        merge_json(&mut base, json!({"a": {"c": 3}, "d": [5]}));
        assert_eq!(base, json!({"a": {"b": 1, "c": 3}, "d": [5]}));
        apply_override(&mut base, "a.e.f=0.5").unwrap();
        apply_override(&mut base, "name=hello").unwrap();
        assert_eq!(base["a"]["e"]["f"], json!(0.5));
        assert_eq!(base["name"], json!("hello"));
        assert!(apply_override(&mut base, "novalue").is_err());
        assert!(apply_override(&mut base, "a..b=1").is_err());
    }

    #[test]
    fn load_with_file_and_overrides() {
        let c = load_config(
            Scenario::LevelsTwoPhoton,
            Some(json!({"sweep": {"points": 11}})),
            &["model.kappa=0.04".into(), "n_levels=6".into()],
        )
        .unwrap();
        assert_eq!(c.sweep.unwrap().points, 11);
        assert_eq!(c.sweep.unwrap().start, 0.9);
        assert_eq!(c.model.kappa, 0.04);
        assert_eq!(c.n_levels, 6);
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = [
            vec!["sweep.points=1".to_string()],
            vec!["sweep.stop=0.1".to_string()],
            vec!["model.omega_c=-1".to_string()],
            vec!["space.n_phonon_max=1".to_string()],
            vec!["unknown_field=1".to_string()],
            vec!["lindblad.gamma_a=-0.1".to_string()],
        ];
        for o in bad {
            assert!(load_config(Scenario::LevelsTwoPhoton, None, &o).is_err(), "{o:?}");
        }
        assert!(load_config(Scenario::DrivenDynamics, None, &["drive=null".into()]).is_err());
        assert!(load_config(
            Scenario::LevelsTwoPhoton,
            Some(json!({"scenario": "converge"})),
            &[]
        )
        .is_err());
    }
}
