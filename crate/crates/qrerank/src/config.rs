//! Run configuration, loadable from a single TOML file.
//!
//! ```toml
//! task = "B"
//! seed = 7
//! stopwords = "english.txt"
//!
//! [features]
//! trees = true
//!
//! [kernel]
//! tk_kind = "PTK"
//!
//! [train]
//! c = 1.0
//! ```

use std::path::{Path, PathBuf};

use qrerank_core::corpus::{FeatureConfig, Task};
use qrerank_core::svm::TrainConfig;
use qrerank_core::KernelConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resamples used by the significance test unless configured otherwise.
pub const DEFAULT_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(with = "task_name")]
    pub task: Task,
    /// Seeds SMO tie-breaking and the randomization test.
    pub seed: u64,
    /// Ranking cutoff; defaults to the task's candidate list length.
    pub cutoff: Option<usize>,
    pub resamples: usize,
    pub stopwords: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    /// Refuse models whose kernel fingerprint differs from `kernel`.
    pub strict: bool,
    pub features: FeatureConfig,
    pub kernel: KernelConfig,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            task: Task::B,
            seed: 0,
            cutoff: None,
            resamples: DEFAULT_RESAMPLES,
            stopwords: None,
            embeddings: None,
            strict: false,
            features: FeatureConfig::default(),
            kernel: KernelConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

mod task_name {
    use qrerank_core::corpus::Task;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &Task, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(t)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Task, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff.unwrap_or(self.task.max_rank() as usize)
    }

    /// Training settings with the run seed applied.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { seed: self.seed, ..self.train.clone() }
    }

    /// Feature settings implied by the kernel: the tree block builds trees.
    pub fn effective_features(&self) -> FeatureConfig {
        let mut f = self.features.clone();
        f.trees |= self.kernel.use_tk;
        f
    }

    /// Checks that every enabled kernel block has a feature source.
    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        self.kernel.validate()?;
        self.train.validate()?;
        let k = &self.kernel;
        let f = &self.features;
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if k.use_sim && !f.sim {
            return bad("kernel.use_sim needs features.sim");
        }
        if k.use_rank && f.rank.is_none() {
            return bad("kernel.use_rank needs features.rank");
        }
        if k.use_dense && !(f.embeddings || f.mte) {
            return bad("kernel.use_dense needs features.embeddings or features.mte");
        }
        if f.embeddings && self.embeddings.is_none() {
            return bad("features.embeddings needs an embeddings file");
        }
        if self.cutoff == Some(0) {
            return bad("cutoff must be positive");
        }
        if self.resamples < qrerank_core::rankeval::MIN_RESAMPLES {
            return bad("resamples must be at least 1000");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qrerank_core::kernel::TkKind;

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig { task: Task::D, seed: 11, cutoff: Some(10), ..RunConfig::default() };
        cfg.kernel.tk_kind = TkKind::Stk;
        cfg.features.trees = true;
        let back: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let cfg: RunConfig = toml::from_str("task = \"D\"\n[kernel]\nlambda = 0.2\n").unwrap();
        assert_eq!(cfg.task, Task::D);
        assert_eq!(cfg.kernel.lambda, 0.2);
        assert_eq!(cfg.kernel.mu, 0.4);
        assert_eq!(cfg.cutoff(), 30);
        assert!(toml::from_str::<RunConfig>("task = \"C\"").is_err());
        assert!(toml::from_str::<RunConfig>("tsk = \"B\"").is_err());
    }

    #[test]
    fn full_example_parses() {
        let text = "task = \"B\"\nseed = 7\nstopwords = \"english.txt\"\n[features]\nrank = \"inverse\"\n\
                    [kernel]\ntk_kind = \"PTK\"\nlambda = 0.4\nmu = 0.4\nrank_kernel = \"RBF\"\n[train]\nc = 1.0\ntol = 1e-3\n";
        let cfg: RunConfig = toml::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn toggles_must_agree() {
        let mut cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert!(cfg.effective_features().trees);
        cfg.kernel.use_tk = false;
        assert!(!cfg.effective_features().trees);
        cfg.features.rank = None;
        assert!(cfg.validate().is_err());
        cfg.kernel.use_rank = false;
        cfg.validate().unwrap();
        cfg.kernel.use_dense = true;
        assert!(cfg.validate().is_err());
        cfg.features.mte = true;
        cfg.validate().unwrap();
        assert_eq!(cfg.train_config().seed, cfg.seed);
    }
}
