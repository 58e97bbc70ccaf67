//! Run configuration files: section headers with `key = value` lines,
//! parsed strictly so typos surface with their line numbers. The resolved
//! configuration echoes back to the same format, and reloading an echo file
//! reproduces the identical run configuration.

use psro_core::games::GameSpec;
use psro_core::run::{BrOracle, Method, RunConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub enum ConfigError {
    /// Unreadable or malformed file, or a value that fails validation.
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Invalid(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub game: GameSection,
    pub method: MethodSection,
    #[serde(default)]
    pub learner: LearnerSection,
    #[serde(default)]
    pub window: WindowSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payoff: Option<Vec<Vec<f64>>>,
    /// Named matrix: `rps`, `matching_pennies`, `transitive-<n>`,
    /// `random-<n>-<seed>`. Expanded into `payoff` when resolved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_players: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_cards: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points_order: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub return_type: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    pub name: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_outer: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_inner: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carry_hedge: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gs_samples_per_profile: Option<u32>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<BrOracle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub episodes_per_br: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explore_epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_mix: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reset: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fill_tail_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nash_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Print a run summary to standard output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<bool>,
}

/// Options that concern the harness rather than the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputOptions {
    pub summary: bool,
}

pub fn load_file(path: &std::path::Path) -> Result<(RunConfig, OutputOptions), ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    load_str(&text)
}

pub fn load_str(text: &str) -> Result<(RunConfig, OutputOptions), ConfigError> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| ConfigError::Invalid(format!("config error: {e}")))?;
    resolve(&file)
}

fn expand_preset(preset: &str) -> Result<Vec<Vec<f64>>, ConfigError> {
    use psro_core::games::{random_antisymmetric, rps_payoffs, transitive_payoffs};
    if preset == "rps" {
        return Ok(rps_payoffs());
    }
    if let Some(rest) = preset.strip_prefix("transitive-") {
        let n: usize = rest
            .parse()
            .map_err(|_| ConfigError::Invalid(format!("bad preset `{preset}`")))?;
        return Ok(transitive_payoffs(&(0..n).collect::<Vec<_>>()));
    }
    if let Some(rest) = preset.strip_prefix("random-") {
        let mut parts = rest.splitn(2, '-');
        let n: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ConfigError::Invalid(format!("bad preset `{preset}`")))?;
        let seed: u64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ConfigError::Invalid(format!("bad preset `{preset}`")))?;
        let mut rng = psro_core::rng::stream(seed, &[psro_core::rng::domain::EVAL, 99]);
        return Ok(random_antisymmetric(n, &mut rng));
    }
    Err(ConfigError::Invalid(format!("unknown preset `{preset}`")))
}

fn resolve(file: &ConfigFile) -> Result<(RunConfig, OutputOptions), ConfigError> {
    let invalid = |msg: String| ConfigError::Invalid(msg);

    let game = match file.game.id.as_str() {
        "matrix" => {
            let payoff = match (&file.game.payoff, &file.game.preset) {
                (Some(p), None) => p.clone(),
                (None, Some(preset)) => expand_preset(preset)?,
                (Some(_), Some(_)) => {
                    return Err(invalid(
                        "[game] gives both `payoff` and `preset`; pick one".into(),
                    ))
                }
                (None, None) => {
                    return Err(invalid(
                        "[game] id = \"matrix\" needs `payoff` or `preset`".into(),
                    ))
                }
            };
            for key in ["num_players", "num_cards"] {
                let set = match key {
                    "num_players" => file.game.num_players.is_some(),
                    _ => file.game.num_cards.is_some(),
                };
                if set {
                    return Err(invalid(format!("[game] `{key}` does not apply to matrix")));
                }
            }
            GameSpec::Matrix { payoff }
        }
        "kuhn_poker" => GameSpec::KuhnPoker,
        "leduc_poker" => GameSpec::LeducPoker,
        "goofspiel" => {
            if let Some(order) = &file.game.points_order {
                if order != "descending" {
                    return Err(invalid(format!(
                        "[game] points_order `{order}` unsupported; only \"descending\""
                    )));
                }
            }
            if let Some(rt) = &file.game.return_type {
                if rt != "win_loss" {
                    return Err(invalid(format!(
                        "[game] return_type `{rt}` unsupported; only \"win_loss\""
                    )));
                }
            }
            GameSpec::Goofspiel {
                num_players: file.game.num_players.unwrap_or(2),
                num_cards: file.game.num_cards.unwrap_or(5),
            }
        }
        other => return Err(invalid(format!("unknown game id `{other}`"))),
    };

    let mut config = RunConfig::new(game, file.method.name);
    if let Some(v) = file.method.iterations {
        config.iterations = v;
    }
    if let Some(v) = file.method.seed {
        config.seed = v;
    }
    if let Some(v) = file.method.n_outer {
        config.n_outer = v;
    }
    config.m_inner = file.method.m_inner;
    if let Some(v) = file.method.carry_hedge {
        config.carry_hedge = v;
    }
    if let Some(v) = file.method.gs_samples_per_profile {
        config.gs_samples_per_profile = v;
    }
    if let Some(v) = file.learner.oracle {
        config.oracle = v;
    }
    if let Some(v) = file.learner.episodes_per_br {
        config.episodes_per_br = v;
    }
    if let Some(v) = file.learner.explore_epsilon {
        config.explore_epsilon = v;
    }
    if let Some(v) = file.learner.eps_mix {
        config.eps_mix = v;
    }
    if let Some(v) = file.learner.lambda {
        config.lambda = v;
    }
    if let Some(v) = file.learner.reset {
        config.reset_learner = v;
    }
    if let Some(v) = file.window.capacity {
        config.window_capacity = v;
    }
    if let Some(v) = file.window.eta {
        config.eta = v;
    }
    if let Some(v) = file.window.fill_tail_fraction {
        config.fill_tail_fraction = v;
    }
    if let Some(v) = file.window.nash_tol {
        config.nash_tol = v;
    }
    // Resolve the derived schedule so the echoed configuration is complete.
    let players = config.game.num_players();
    config.m_inner = Some(config.schedule(players).1);
    config
        .validate()
        .map_err(|e| invalid(format!("invalid configuration: {e}")))?;

    let output = OutputOptions {
        summary: file.output.summary.unwrap_or(true),
    };
    Ok((config, output))
}

/// Renders the fully resolved configuration; loading the result reproduces
/// the identical `RunConfig`.
pub fn echo(config: &RunConfig, output: &OutputOptions) -> String {
    let (game, payoff, num_players, num_cards) = match &config.game {
        GameSpec::Matrix { payoff } => ("matrix", Some(payoff.clone()), None, None),
        GameSpec::KuhnPoker => ("kuhn_poker", None, None, None),
        GameSpec::LeducPoker => ("leduc_poker", None, None, None),
        GameSpec::Goofspiel {
            num_players,
            num_cards,
        } => ("goofspiel", None, Some(*num_players), Some(*num_cards)),
    };
    let file = ConfigFile {
        game: GameSection {
            id: game.to_string(),
            payoff,
            preset: None,
            num_players,
            num_cards,
            points_order: num_players.map(|_| "descending".to_string()),
            return_type: num_players.map(|_| "win_loss".to_string()),
        },
        method: MethodSection {
            name: config.method,
            iterations: Some(config.iterations),
            seed: Some(config.seed),
            n_outer: Some(config.n_outer),
            m_inner: Some(config.schedule(config.game.num_players()).1),
            carry_hedge: Some(config.carry_hedge),
            gs_samples_per_profile: Some(config.gs_samples_per_profile),
        },
        learner: LearnerSection {
            oracle: Some(config.oracle),
            episodes_per_br: Some(config.episodes_per_br),
            explore_epsilon: Some(config.explore_epsilon),
            eps_mix: Some(config.eps_mix),
            lambda: Some(config.lambda),
            reset: Some(config.reset_learner),
        },
        window: WindowSection {
            capacity: Some(config.window_capacity),
            eta: Some(config.eta),
            fill_tail_fraction: Some(config.fill_tail_fraction),
            nash_tol: Some(config.nash_tol),
        },
        output: OutputSection {
            summary: Some(output.summary),
        },
    };
    toml::to_string_pretty(&file).expect("resolved config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const KUHN: &str = r#"
[game]
id = "kuhn_poker"

[method]
name = "sf_psro_window"
iterations = 4
seed = 9

[learner]
episodes_per_br = 500
lambda = 0.0

[window]
capacity = 3
"#;

    #[test]
    fn loads_and_applies_defaults() {
        let (config, output) = load_str(KUHN).unwrap();
        assert_eq!(config.method, Method::SfPsroWindow);
        assert_eq!(config.iterations, 4);
        assert_eq!(config.seed, 9);
        assert_eq!(config.window_capacity, 3);
        assert_eq!(config.eta, 0.1);
        assert_eq!(config.eps_mix, 0.1);
        assert!(config.reset_learner);
        assert!(output.summary);
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_numbers() {
        let bad = format!("{KUHN}\nwindoow_capacity = 4\n");
        let err = load_str(&bad).unwrap_err().to_string();
        assert!(err.contains("windoow_capacity"), "{err}");
        assert!(err.contains("line"), "no line info: {err}");

        let bad = KUHN.replace("episodes_per_br", "episodes_per_brr");
        let err = load_str(&bad).unwrap_err().to_string();
        assert!(err.contains("episodes_per_brr"), "{err}");
        assert!(err.contains("line"), "no line info: {err}");
    }

    #[test]
    fn echo_round_trips_identically() {
        let (config, output) = load_str(KUHN).unwrap();
        let echoed = echo(&config, &output);
        let (config2, output2) = load_str(&echoed).unwrap();
        assert_eq!(config, config2);
        assert_eq!(output, output2);
        // Echoing the reloaded config is byte-stable too.
        assert_eq!(echoed, echo(&config2, &output2));
    }

    #[test]
    fn matrix_presets_expand() {
        let text = r#"
[game]
id = "matrix"
preset = "transitive-4"

[method]
name = "vanilla_psro"

[learner]
oracle = "exact"
"#;
        let (config, output) = load_str(text).unwrap();
        match &config.game {
            GameSpec::Matrix { payoff } => assert_eq!(payoff.len(), 4),
            other => panic!("wrong game {other:?}"),
        }
        // The echo carries the expanded payoff, not the preset.
        let echoed = echo(&config, &output);
        assert!(echoed.contains("payoff"));
        assert!(!echoed.contains("preset"));
        let (config2, _) = load_str(&echoed).unwrap();
        assert_eq!(config, config2);
    }

    #[test]
    fn goofspiel_guards() {
        let text = r#"
[game]
id = "goofspiel"
num_players = 2
num_cards = 5
points_order = "ascending"

[method]
name = "fsp"
"#;
        let err = load_str(text).unwrap_err().to_string();
        assert!(err.contains("ascending"), "{err}");
    }

    #[test]
    fn invalid_run_values_are_config_errors() {
        let bad = KUHN.replace("episodes_per_br = 500", "episodes_per_br = 0");
        let err = load_str(&bad).unwrap_err().to_string();
        assert!(err.contains("episodes_per_br"), "{err}");
    }
}
