use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Labeling function over a scenario's prompt list.
///
/// Serialized as `{"name": ..., "params": {...}}` in scenario files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "name", content = "params", rename_all = "kebab-case")]
pub enum Predicate {
    /// Prompts with index below `threshold` are class 0, the rest class 1.
    IndexLt { threshold: usize },
    /// Prompts containing `needle` are class 1.
    Contains { needle: String },
    /// Explicit per-prompt class labels.
    Labels { labels: Vec<usize> },
}

impl Predicate {
    pub fn class_of(&self, index: usize, prompt: &str) -> usize {
        match self {
            Predicate::IndexLt { threshold } => usize::from(index >= *threshold),
            Predicate::Contains { needle } => usize::from(prompt.contains(needle.as_str())),
            Predicate::Labels { labels } => labels.get(index).copied().unwrap_or(0),
        }
    }
}

/// A named prompt set with the predicate that partitions it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub prompts: Vec<String>,
    pub predicate: Predicate,
    pub max_tokens: usize,
    pub turns: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.max_tokens < 1 {
            return Err(Error::BadConfig("max_tokens must be >= 1".into()));
        }
        if self.turns < 1 {
            return Err(Error::BadConfig("turns must be >= 1".into()));
        }
        let classes = self.classes();
        let n_classes = classes.iter().copied().max().map(|m| m + 1).unwrap_or(0);
        if n_classes < 2 {
            return Err(Error::BadConfig("predicate must induce >= 2 classes".into()));
        }
        for c in 0..n_classes {
            if !classes.contains(&c) {
                return Err(Error::BadConfig(format!("predicate class {c} is empty")));
            }
        }
        Ok(())
    }

    /// Per-prompt class labels under the predicate.
    pub fn classes(&self) -> Vec<usize> {
        self.prompts
            .iter()
            .enumerate()
            .map(|(i, p)| self.predicate.class_of(i, p))
            .collect()
    }

    pub fn n_classes(&self) -> usize {
        self.classes().iter().copied().max().map(|m| m + 1).unwrap_or(0)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let data = std::fs::read_to_string(path)
            .map_err(|_| Error::ScenarioNotFound(path.display().to_string()))?;
        let s: Scenario = serde_json::from_str(&data)?;
        s.validate()?;
        Ok(s)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scen() -> Scenario {
        Scenario {
            id: "ab".into(),
            prompts: vec!["count up".into(), "random please".into()],
            predicate: Predicate::IndexLt { threshold: 1 },
            max_tokens: 50,
            turns: 1,
        }
    }

    #[test]
    fn validates_and_partitions() {
        let s = scen();
        s.validate().unwrap();
        assert_eq!(s.classes(), vec![0, 1]);
        assert_eq!(s.n_classes(), 2);
    }

    #[test]
    fn single_class_rejected() {
        let mut s = scen();
        s.predicate = Predicate::IndexLt { threshold: 2 };
        assert!(s.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = scen();
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"name\":\"index-lt\""));
        let back: Scenario = serde_json::from_str(&j).unwrap();
        assert_eq!(back.classes(), s.classes());
    }

    #[test]
    fn missing_file_is_scenario_not_found() {
        let e = Scenario::load(std::path::Path::new("/nonexistent/s.json")).unwrap_err();
        assert!(matches!(e, Error::ScenarioNotFound(_)));
    }
}
