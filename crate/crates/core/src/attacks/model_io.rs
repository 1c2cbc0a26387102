//! Versioned on-disk format for fitted attack models, so a model trained
//! by one CLI invocation can be loaded by a later one.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attacks::ab::SignatureGmmPair;
use crate::attacks::boost::BoostEnsemble;
use crate::attacks::multiclass::SignatureClassifier;
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelKind {
    AbPair(SignatureGmmPair),
    Multiclass(SignatureClassifier),
    Boost(BoostEnsemble),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub model: ModelKind,
}

pub fn save_model(path: &Path, model: &ModelKind) -> Result<()> {
    let file = ModelFile { version: MODEL_FORMAT_VERSION, model: model.clone() };
    let json = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelKind> {
    let json = std::fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&json)?;
    if file.version != MODEL_FORMAT_VERSION {
        return Err(Error::BadConfig(format!(
            "model format version {} not supported (expected {MODEL_FORMAT_VERSION})",
            file.version
        )));
    }
    Ok(file.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::boost::{boost_fit_features, BoostConfig};
    use crate::attacks::features::FeatureSpec;

    fn small_ensemble() -> BoostEnsemble {
        let cfg = BoostConfig { feature: FeatureSpec::with_k(2), var_floor: 1e-10 };
        let classes = vec![
            ("a".to_string(), vec![vec![0.01, 0.02], vec![0.012, 0.021]]),
            ("b".to_string(), vec![vec![0.03, 0.01], vec![0.031, 0.012]]),
        ];
        boost_fit_features(&classes, &cfg).unwrap()
    }

    #[test]
    fn round_trip_preserves_parameters() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let ens = small_ensemble();
        save_model(&path, &ModelKind::Boost(ens.clone())).unwrap();
        match load_model(&path).unwrap() {
            ModelKind::Boost(loaded) => {
                assert_eq!(loaded.classes, ens.classes);
                assert_eq!(loaded.means, ens.means);
                assert_eq!(loaded.vars, ens.vars);
            }
            other => panic!("wrong kind: {other:?}"),
        }
    }

    #[test]
    fn future_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&path, &ModelKind::Boost(small_ensemble())).unwrap();
        let bumped = std::fs::read_to_string(&path)
            .unwrap()
            .replacen("\"version\": 1", "\"version\": 99", 1);
        std::fs::write(&path, bumped).unwrap();
        assert!(matches!(load_model(&path), Err(Error::BadConfig(_))));
    }

    #[test]
    fn garbage_is_a_json_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(&path, "not json").unwrap();
        assert!(load_model(&path).is_err());
    }
}
