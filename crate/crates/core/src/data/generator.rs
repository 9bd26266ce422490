//! Synthetic prompt-pair ratings.
//!
//! Prompts are sentences built from a small grammar (task verb, artifact,
//! ethical constraint). Each constraint belongs to an ethical theme, and the
//! prompt inherits that theme as its latent cluster. Ratings follow
//!
//! ```text
//! rating = base + affinity[theme(context)][theme(target)]
//!        + bias(context) + bias(target) + noise
//! ```
//!
//! clamped to `[1, 5]` and rounded to two decimals. The affinity matrix
//! rewards same-theme pairs, which gives targets of one theme correlated
//! columns and so a learnable Pearson structure.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::dataset::{round_rating, DataError, RatingDataset, MAX_RATING, MIN_RATING};

const VERBS: &[&str] = &["Design", "Build", "Develop", "Create", "Generate", "Train", "Implement", "Propose"];

const ARTIFACTS: &[&str] = &[
    "a recommendation system",
    "an image recognition system",
    "a sentiment analysis model",
    "a chatbot",
    "a fraud detection algorithm",
    "an NLP model for email filtering",
    "an AI-based tutoring system",
    "a hiring screening model",
    "a credit scoring model",
    "a medical diagnosis classifier",
    "a speech recognition model",
    "a content moderation pipeline",
];

/// Ethical themes and the constraint phrases that express them.
const THEMES: &[(&str, &[&str])] = &[
    (
        "fairness",
        &[
            "that avoids bias",
            "ensuring fairness",
            "minimizing gender bias",
            "preventing racial profiling",
        ],
    ),
    (
        "privacy",
        &[
            "with privacy constraints",
            "that preserves user privacy",
            "using differential privacy",
            "trained with federated learning",
        ],
    ),
    (
        "transparency",
        &[
            "with explainable outputs",
            "that documents its decisions",
            "with transparent feature attribution",
            "that supports external auditing",
        ],
    ),
    (
        "inclusivity",
        &[
            "that supports diverse language inclusivity",
            "for equitable resource allocation",
            "accessible to users with disabilities",
            "serving low-resource communities",
        ],
    ),
    (
        "safety",
        &[
            "with human oversight",
            "that resists adversarial manipulation",
            "with clear accountability logging",
            "that flags harmful content",
        ],
    ),
];

fn default_base() -> f64 {
    3.05
}
fn default_intra_bonus() -> f64 {
    0.45
}
fn default_inter_spread() -> f64 {
    0.35
}
fn default_bias_sd() -> f64 {
    0.2
}
fn default_noise_sd() -> f64 {
    1.1
}

/// Generator settings. Only the first three fields are required in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_entries: usize,
    pub n_prompts: usize,
    pub seed: u64,
    /// Reject repeated `(context, target)` pairs instead of allowing them.
    #[serde(default)]
    pub unique_pairs: bool,
    #[serde(default = "default_base")]
    pub base: f64,
    #[serde(default = "default_intra_bonus")]
    pub intra_bonus: f64,
    #[serde(default = "default_inter_spread")]
    pub inter_spread: f64,
    #[serde(default = "default_bias_sd")]
    pub bias_sd: f64,
    #[serde(default = "default_noise_sd")]
    pub noise_sd: f64,
}

impl GeneratorConfig {
    pub fn new(n_entries: usize, n_prompts: usize, seed: u64) -> Self {
        GeneratorConfig {
            n_entries,
            n_prompts,
            seed,
            unique_pairs: false,
            base: default_base(),
            intra_bonus: default_intra_bonus(),
            inter_spread: default_inter_spread(),
            bias_sd: default_bias_sd(),
            noise_sd: default_noise_sd(),
        }
    }

    fn validate(&self) -> Result<(), DataError> {
        let fail = |msg: String| Err(DataError::Generator(msg));
        if self.n_entries < 1 {
            return fail("n_entries must be at least 1".into());
        }
        if self.n_prompts < 2 {
            return fail("n_prompts must be at least 2".into());
        }
        let capacity = VERBS.len() * ARTIFACTS.len() * THEMES.iter().map(|(_, c)| c.len()).sum::<usize>();
        if self.n_prompts > capacity {
            return fail(format!(
                "n_prompts {} exceeds the {capacity} distinct prompts the grammar can form",
                self.n_prompts
            ));
        }
        let pairs = self.n_prompts * (self.n_prompts - 1);
        if self.unique_pairs && self.n_entries > pairs {
            return fail(format!(
                "{} prompts yield only {pairs} distinct directed pairs, fewer than {} entries",
                self.n_prompts, self.n_entries
            ));
        }
        for (name, sd) in [("bias_sd", self.bias_sd), ("noise_sd", self.noise_sd)] {
            if !(sd.is_finite() && sd >= 0.0) {
                return fail(format!("{name} must be a non-negative number"));
            }
        }
        if !(self.base.is_finite() && self.intra_bonus.is_finite() && self.inter_spread.is_finite() && self.inter_spread >= 0.0) {
            return fail("rating model parameters must be finite".into());
        }
        Ok(())
    }
}

/// A generated prompt with the theme it was drawn from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedPrompt {
    pub text: String,
    pub theme: usize,
}

pub fn theme_names() -> impl Iterator<Item = &'static str> {
    THEMES.iter().map(|(name, _)| *name)
}

/// Draws `n` distinct prompts, cycling through themes so clusters stay balanced.
pub fn generate_prompts(n: usize, rng: &mut impl Rng) -> Vec<GeneratedPrompt> {
    let mut pools: Vec<Vec<String>> = THEMES
        .iter()
        .map(|(_, constraints)| {
            let mut pool: Vec<String> = VERBS
                .iter()
                .flat_map(|verb| {
                    ARTIFACTS
                        .iter()
                        .flat_map(move |artifact| constraints.iter().map(move |c| format!("{verb} {artifact} {c}.")))
                })
                .collect();
            pool.shuffle(rng);
            pool
        })
        .collect();

    let mut out = Vec::with_capacity(n);
    let mut theme = 0;
    while out.len() < n {
        if let Some(text) = pools[theme].pop() {
            out.push(GeneratedPrompt { text, theme });
        }
        theme = (theme + 1) % THEMES.len();
    }
    out
}

/// Builds a synthetic dataset. The same config always yields the same records.
pub fn generate_dataset(config: &GeneratorConfig) -> Result<RatingDataset, DataError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let prompts = generate_prompts(config.n_prompts, &mut rng);

    let k = THEMES.len();
    let mut affinity = vec![vec![0.0; k]; k];
    for (i, row) in affinity.iter_mut().enumerate() {
        for (j, value) in row.iter_mut().enumerate() {
            *value = if i == j {
                config.intra_bonus
            } else if config.inter_spread > 0.0 {
                rng.random_range(-config.inter_spread..=config.inter_spread)
            } else {
                0.0
            };
        }
    }

    let bias = Normal::new(0.0, config.bias_sd).expect("validated sd");
    let noise = Normal::new(0.0, config.noise_sd).expect("validated sd");
    let context_bias: Vec<f64> = prompts.iter().map(|_| bias.sample(&mut rng)).collect();
    let target_bias: Vec<f64> = prompts.iter().map(|_| bias.sample(&mut rng)).collect();

    let mut dataset = RatingDataset::new();
    let mut seen = HashSet::new();
    let n = prompts.len();
    while dataset.len() < config.n_entries {
        let context = rng.random_range(0..n);
        let mut target = rng.random_range(0..n - 1);
        if target >= context {
            target += 1;
        }
        if config.unique_pairs && !seen.insert((context, target)) {
            continue;
        }
        let raw = config.base
            + affinity[prompts[context].theme][prompts[target].theme]
            + context_bias[context]
            + target_bias[target]
            + noise.sample(&mut rng);
        let rating = round_rating(raw.clamp(MIN_RATING, MAX_RATING));
        dataset
            .push(&prompts[context].text, &prompts[target].text, rating)
            .expect("generated rows are valid");
    }
    Ok(dataset)
}
