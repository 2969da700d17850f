//! Flag and config-file settings. Every field may come from a flag or from
//! the config file; flags win, then the file, then the built-in default.

use std::path::Path;

use clap::Args;
use serde::{Deserialize, Serialize};

use microgen::bench::{Aggregation, BenchConfig, BenchStrategy};
use microgen::generator::{DecodeConfig, PlantedPredictorConfig};
use microgen::microworld::Category;
use microgen::preference::{CotLabelConfig, PairConfig};
use microgen::selector::BestOfNConfig;
use microgen::verifier::{AnswererConfig, Strategy};

/// Bad flags, values or config files; maps to exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const STRATEGIES: [&str; 4] = ["none", "outcome", "rule", "cot"];

#[derive(Args, Deserialize, Default, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[arg(skip)]
    pub seed: Option<u64>,
    /// Prompt text, e.g. "a photo of a red circle"
    #[arg(long)]
    pub prompt: Option<String>,
    /// Decoding steps T [default: 50]
    #[arg(long)]
    pub steps: Option<usize>,
    /// Classifier-free guidance scale [default: 5.0]
    #[arg(long)]
    pub cfg_scale: Option<f64>,
    /// Confidence noise scale at step 0 [default: 4.5]
    #[arg(long)]
    pub choice_temperature: Option<f64>,
    /// Per-object corruption probability of the planted predictor [default: 0.3]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Planted predictor temperature [default: 0.25]
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Verification strategy: none, outcome, rule or cot [default: cot; rule for build-dpo]
    #[arg(long, value_parser = STRATEGIES)]
    pub strategy: Option<String>,
    /// Answerer flip rate in [0, 1] [default: 0]
    #[arg(long)]
    pub flip_rate: Option<f64>,
    /// Candidates per prompt N [default: 20]
    #[arg(long)]
    pub n: Option<usize>,
    /// Candidates kept K [default: 4]
    #[arg(long)]
    pub k: Option<usize>,
    /// Candidates per prompt when building pairs [default: 20]
    #[arg(long)]
    pub n_per_prompt: Option<usize>,
    /// Random specs when no prompts file is given [default: 100]
    #[arg(long)]
    pub num_specs: Option<usize>,
    /// Bench prompts per category [default: 100]
    #[arg(long)]
    pub per_category: Option<usize>,
    /// Bench categories, comma separated [default: the six short-prompt categories]
    #[arg(long, value_delimiter = ',')]
    pub categories: Option<Vec<String>>,
    /// Bench aggregation: top1 or mean_topk [default: top1]
    #[arg(long, value_parser = ["top1", "mean_topk"])]
    pub aggregation: Option<String>,
    /// Keep long compositional pairs in CoT labels
    #[arg(long)]
    #[serde(default)]
    pub include_long: Option<bool>,
}

/// Fully resolved settings, recorded in every run manifest.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub prompt: Option<String>,
    pub steps: usize,
    pub cfg_scale: f64,
    pub choice_temperature: f64,
    pub epsilon: f64,
    pub temperature: f64,
    pub strategy: Option<String>,
    pub flip_rate: f64,
    pub n: usize,
    pub k: usize,
    pub n_per_prompt: usize,
    pub num_specs: usize,
    pub per_category: usize,
    pub categories: Vec<String>,
    pub aggregation: String,
    pub include_long: bool,
}

pub fn load(path: &Path) -> anyhow::Result<Overrides> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("reading config {}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
}

impl Settings {
    pub fn resolve(flags: &Overrides, file: &Overrides) -> Self {
        let gen = PlantedPredictorConfig::default();
        let dec = DecodeConfig::default();
        macro_rules! pick {
            ($f:ident, $d:expr) => {
                flags.$f.clone().or_else(|| file.$f.clone()).unwrap_or($d)
            };
        }
        Self {
            seed: file.seed.unwrap_or(0),
            prompt: flags.prompt.clone().or_else(|| file.prompt.clone()),
            steps: pick!(steps, dec.steps),
            cfg_scale: pick!(cfg_scale, dec.cfg_scale),
            choice_temperature: pick!(choice_temperature, dec.choice_temperature),
            epsilon: pick!(epsilon, gen.epsilon),
            temperature: pick!(temperature, gen.temperature),
            strategy: flags.strategy.clone().or_else(|| file.strategy.clone()),
            flip_rate: pick!(flip_rate, 0.0),
            n: pick!(n, microgen::selector::DEFAULT_N),
            k: pick!(k, microgen::selector::DEFAULT_K),
            n_per_prompt: pick!(n_per_prompt, microgen::preference::DEFAULT_N_PER_PROMPT),
            num_specs: pick!(num_specs, 100),
            per_category: pick!(per_category, 100),
            categories: pick!(categories, Category::GENEVAL.iter().map(|c| c.name().to_string()).collect()),
            aggregation: pick!(aggregation, "top1".to_string()),
            include_long: pick!(include_long, false),
        }
    }

    pub fn with_default_strategy(mut self, default: &str) -> Self {
        self.strategy.get_or_insert_with(|| default.to_string());
        self
    }

    pub fn generator(&self) -> PlantedPredictorConfig {
        PlantedPredictorConfig { epsilon: self.epsilon, temperature: self.temperature, scene_seed: None }
    }

    pub fn decode(&self) -> DecodeConfig {
        DecodeConfig { steps: self.steps, cfg_scale: self.cfg_scale, choice_temperature: self.choice_temperature }
    }

    pub fn answerer(&self) -> Result<AnswererConfig, UsageError> {
        AnswererConfig::with_flip_rate(self.flip_rate).map_err(|e| UsageError(e.to_string()))
    }

    fn strategy_name(&self) -> &str {
        self.strategy.as_deref().unwrap_or("cot")
    }

    pub fn bench_strategy(&self) -> Result<BenchStrategy, UsageError> {
        BenchStrategy::from_name(self.strategy_name())
            .ok_or_else(|| UsageError(format!("unknown strategy '{}'", self.strategy_name())))
    }

    /// A verification strategy; `none` is not one.
    pub fn verifier(&self) -> Result<Strategy, UsageError> {
        self.bench_strategy()?
            .verifier()
            .ok_or_else(|| UsageError("this command needs a verification strategy: outcome, rule or cot".into()))
    }

    pub fn best_of_n(&self) -> Result<BestOfNConfig, UsageError> {
        Ok(BestOfNConfig {
            n: self.n,
            k: self.k,
            strategy: self.verifier()?,
            answerer: self.answerer()?,
            decode: self.decode(),
        })
    }

    pub fn pair_config(&self) -> Result<PairConfig, UsageError> {
        Ok(PairConfig {
            n_per_prompt: self.n_per_prompt,
            strategy: self.verifier()?,
            answerer: self.answerer()?,
            decode: self.decode(),
        })
    }

    pub fn cot_label_config(&self) -> Result<CotLabelConfig, UsageError> {
        Ok(CotLabelConfig { answerer: self.answerer()?, include_long: self.include_long })
    }

    pub fn bench_config(&self) -> Result<BenchConfig, UsageError> {
        let counts = self
            .categories
            .iter()
            .map(|name| {
                Category::from_name(name)
                    .map(|c| (c, self.per_category))
                    .ok_or_else(|| UsageError(format!("unknown category '{name}'")))
            })
            .collect::<Result<_, _>>()?;
        let aggregation = match self.aggregation.as_str() {
            "top1" => Aggregation::Top1,
            "mean_topk" => Aggregation::MeanTopk,
            other => return Err(UsageError(format!("unknown aggregation '{other}'"))),
        };
        Ok(BenchConfig {
            counts,
            generator: self.generator(),
            decode: self.decode(),
            strategy: self.bench_strategy()?,
            n: self.n,
            k: self.k,
            answerer: self.answerer()?,
            seed: self.seed,
            aggregation,
        })
    }
}
