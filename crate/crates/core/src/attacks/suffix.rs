//! Black-box search for a better probe phrasing. The attacker cannot see
//! why one phrasing separates accept/reject rates better than another, but
//! can measure each candidate's distinguishing rate and ask a rephrasing
//! helper for variants of the current best ones. Beam search with elitism
//! makes the best-seen rate non-decreasing round over round.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::{stream_rng, tag};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Template {
    pub text: String,
    /// Measured probability of correctly reading the planted bit.
    pub gap: f64,
}

/// Proposes rewordings of a probe template.
pub trait Rephraser {
    fn rephrase(&mut self, template: &str) -> Vec<String>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: Template,
    /// Best measured gap after each round.
    pub history: Vec<f64>,
    pub rounds: usize,
    pub rephraser_calls: u64,
    pub measurements: u64,
}

/// Beam search over phrasings: round one expands the seed, later rounds
/// expand the `keep` best templates seen so far. With `rounds` = 10 and
/// `keep` = 10 that is exactly 1 + 9*10 = 91 rephraser calls.
pub fn suffix_search(
    seed_template: &str,
    rounds: usize,
    keep: usize,
    rephraser: &mut dyn Rephraser,
    measure: &mut dyn FnMut(&str) -> Result<f64>,
) -> Result<SearchOutcome> {
    if rounds == 0 || keep == 0 {
        return Err(Error::BadConfig("rounds and keep must be positive".into()));
    }
    let mut calls = 0u64;
    let mut measurements = 0u64;
    let mut measure_one = |text: &str, m: &mut u64| -> Result<Template> {
        *m += 1;
        Ok(Template { text: text.to_string(), gap: measure(text)? })
    };
    let mut pool = vec![measure_one(seed_template, &mut measurements)?];
    let mut history = Vec::with_capacity(rounds);
    for round in 0..rounds {
        let parents: Vec<String> = if round == 0 {
            vec![pool[0].text.clone()]
        } else {
            pool.iter().take(keep).map(|t| t.text.clone()).collect()
        };
        for p in &parents {
            calls += 1;
            for child in rephraser.rephrase(p) {
                pool.push(measure_one(&child, &mut measurements)?);
            }
        }
        pool.sort_by(|a, b| b.gap.partial_cmp(&a.gap).unwrap());
        pool.dedup_by(|a, b| a.text == b.text);
        pool.truncate(keep);
        history.push(pool[0].gap);
    }
    Ok(SearchOutcome {
        best: pool[0].clone(),
        history,
        rounds,
        rephraser_calls: calls,
        measurements,
    })
}

/// Planted phrasing landscape. Every template carries a hidden "clarity"
/// in [0, 1]; rephrasing a template yields variants whose clarity moves by
/// a bounded random step from the parent's, and the measurable gap is an
/// affine function of clarity spanning the weakest to strongest presets
/// (0.562 at clarity 0 up to 0.972 at clarity 1). Clones share the
/// clarity map, so a clone can serve as the measurement side while the
/// original is driven by the search.
#[derive(Debug, Clone)]
pub struct PlantedRephraser {
    seed: u64,
    children_per_call: usize,
    clarity: std::rc::Rc<std::cell::RefCell<std::collections::HashMap<String, f64>>>,
    counter: u64,
}

impl PlantedRephraser {
    pub const GAP_BASE: f64 = 0.562;
    pub const GAP_SPAN: f64 = 0.41;

    pub fn new(seed: u64, seed_template: &str) -> Self {
        let mut clarity = std::collections::HashMap::new();
        clarity.insert(seed_template.to_string(), 0.0);
        Self {
            seed,
            children_per_call: 12,
            clarity: std::rc::Rc::new(std::cell::RefCell::new(clarity)),
            counter: 0,
        }
    }

    pub fn clarity_of(&self, template: &str) -> Option<f64> {
        self.clarity.borrow().get(template).copied()
    }

    /// True distinguishing rate of a known template.
    pub fn gap_of(&self, template: &str) -> Result<f64> {
        self.clarity_of(template)
            .map(|c| Self::GAP_BASE + Self::GAP_SPAN * c)
            .ok_or_else(|| Error::UnknownTemplate(template.to_string()))
    }

    pub fn set_clarity(&self, template: &str, clarity: f64) {
        self.clarity.borrow_mut().insert(template.to_string(), clarity.clamp(0.0, 1.0));
    }
}

impl Rephraser for PlantedRephraser {
    fn rephrase(&mut self, template: &str) -> Vec<String> {
        let parent = self.clarity_of(template).unwrap_or(0.0);
        let mut out = Vec::with_capacity(self.children_per_call);
        for i in 0..self.children_per_call {
            self.counter += 1;
            let mut rng =
                stream_rng(self.seed, &[tag("rephrase"), tag(template), self.counter, i as u64]);
            let step = rand::Rng::gen_range(&mut rng, -0.04..0.15);
            let c = (parent + step).clamp(0.0, 1.0);
            let text = format!("{template} ~v{}", self.counter);
            self.clarity.borrow_mut().insert(text.clone(), c);
            out.push(text);
        }
        out
    }
}
