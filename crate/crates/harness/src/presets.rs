//! Shipped experiment configs, addressable as `preset:NAME`.

use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

pub const PRESETS: [(&str, &str); 6] = [
    ("appendixE-nu0", include_str!("../presets/appendixE-nu0.toml")),
    ("appendixE-grid", include_str!("../presets/appendixE-grid.toml")),
    ("quartic-det", include_str!("../presets/quartic-det.toml")),
    ("poly2d-det", include_str!("../presets/poly2d-det.toml")),
    ("exp-loss-synthetic", include_str!("../presets/exp-loss-synthetic.toml")),
    ("exp-loss-mnist-pair", include_str!("../presets/exp-loss-mnist-pair.toml")),
];

pub const PREFIX: &str = "preset:";

pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let src = preset_source(name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        HarnessError::Config(format!("unknown preset {name:?} (available: {})", names.join(", ")))
    })?;
    ExperimentConfig::from_toml_str(src).map_err(|e| HarnessError::Config(format!("preset {name}: {e}")))
}

/// `preset:NAME` or a path to a TOML file.
pub fn load_config(arg: &str) -> Result<ExperimentConfig> {
    match arg.strip_prefix(PREFIX) {
        Some(name) => preset(name),
        None => ExperimentConfig::load(Path::new(arg)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_round_trips() {
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap();
            let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
            assert_eq!(cfg, again, "{name}");
        }
    }

    #[test]
    fn unknown_preset_is_a_config_error() {
        assert!(matches!(load_config("preset:nope"), Err(HarnessError::Config(_))));
    }
}
