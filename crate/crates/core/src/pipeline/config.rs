//! Run configuration: a flat TOML document. Every key is optional and unknown
//! keys are rejected.
//!
//! ```toml
//! source = "sbm"          # toy | sbm | files
//! seed = 3
//! out_dir = "runs/sbm"
//! candidate_n = 20
//! resonance_epochs = 200
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::BaselineMode;
use crate::error::{Result, RslError};
use crate::graph::{FeatureScaling, SbmBlock, SbmSpec, ToySpec};
use crate::resonance::TargetMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    Toy,
    Sbm,
    Files,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub source: DataSource,
    pub seed: u64,
    pub out_dir: PathBuf,

    pub toy_n_known: usize,
    pub toy_n_wild_in: usize,
    pub toy_n_wild_out: usize,
    pub toy_dim: usize,
    /// Distance between the ID and OOD centers.
    pub toy_separation: f64,
    pub toy_spread: f64,

    pub sbm_block_sizes: Vec<usize>,
    pub sbm_block_ood: Vec<bool>,
    pub sbm_dim: usize,
    /// Block `b` has this value in every feature column `c` with `c mod blocks = b`.
    pub sbm_center_scale: f64,
    pub sbm_p_in: f64,
    pub sbm_p_out: f64,
    pub sbm_spread: f64,
    pub sbm_homophily_shift: f64,
    pub sbm_known_fraction: f64,

    /// Whitespace-separated 0-indexed node pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_path: Option<PathBuf>,
    /// Headerless CSV, one row per node.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature_path: Option<PathBuf>,
    /// One of `known` or `wild` per line.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roles_path: Option<PathBuf>,
    /// `0` or `1` per line; only wild entries are used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ood_flags_path: Option<PathBuf>,
    /// Optional ID class per line for `etf_by_label`; wild entries are ignored.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels_path: Option<PathBuf>,

    pub standardize: FeatureScaling,
    pub hops: usize,
    pub raw_features: bool,

    pub resonance_lr: f64,
    pub resonance_epochs: usize,
    pub resonance_dim: usize,
    pub target_mode: TargetMode,
    pub num_targets: usize,
    pub target_id_tpr: f64,

    pub candidate_n: usize,

    /// 0 means one synthetic node per candidate.
    pub synth_count: usize,
    pub synth_steps: usize,
    pub synth_step_size: f64,
    pub synth_lambda: f64,
    pub synth_noise_std: f64,
    pub synth_knn_k: usize,

    pub classifier_epochs: usize,
    pub classifier_lr: f64,
    pub classifier_dropout: f64,
    pub classifier_hidden: usize,
    pub classifier_layers: usize,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineMode>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let toy = ToySpec::default();
        let sbm = SbmSpec::default();
        Self {
            source: DataSource::Toy,
            seed: 0,
            out_dir: PathBuf::from("rsl-out"),
            toy_n_known: toy.n_known,
            toy_n_wild_in: toy.n_wild_in,
            toy_n_wild_out: toy.n_wild_out,
            toy_dim: toy.dim,
            toy_separation: 4.0,
            toy_spread: toy.spread,
            sbm_block_sizes: sbm.blocks.iter().map(|b| b.size).collect(),
            sbm_block_ood: sbm.blocks.iter().map(|b| b.ood).collect(),
            sbm_dim: sbm.blocks[0].center.len(),
            sbm_center_scale: SbmSpec::CENTER_SCALE,
            sbm_p_in: sbm.p_in,
            sbm_p_out: sbm.p_out,
            sbm_spread: sbm.spread,
            sbm_homophily_shift: sbm.homophily_shift,
            sbm_known_fraction: sbm.known_fraction,
            edge_path: None,
            feature_path: None,
            roles_path: None,
            ood_flags_path: None,
            labels_path: None,
            standardize: FeatureScaling::None,
            hops: 2,
            raw_features: false,
            resonance_lr: 0.005,
            resonance_epochs: 200,
            resonance_dim: 16,
            target_mode: TargetMode::SingleRandom,
            num_targets: 1,
            target_id_tpr: 0.95,
            candidate_n: 2,
            synth_count: 0,
            synth_steps: 20,
            synth_step_size: 1.0,
            synth_lambda: 0.5,
            synth_noise_std: 0.01,
            synth_knn_k: 5,
            classifier_epochs: 200,
            classifier_lr: 0.005,
            classifier_dropout: 0.1,
            classifier_hidden: 16,
            classifier_layers: 2,
            baseline: None,
        }
    }
}

impl RunConfig {
    /// Benchmark run on the default SBM: 20 candidates and a classifier step
    /// large enough for plain gradient descent to converge within 200 epochs.
    pub fn sbm_benchmark() -> Self {
        Self {
            source: DataSource::Sbm,
            candidate_n: 20,
            classifier_lr: 0.05,
            ..Self::default()
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| RslError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative data paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&crate::io::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.edge_path,
            &mut cfg.feature_path,
            &mut cfg.roles_path,
            &mut cfg.ood_flags_path,
            &mut cfg.labels_path,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("resonance_lr", self.resonance_lr),
            ("synth_step_size", self.synth_step_size),
            ("classifier_lr", self.classifier_lr),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(RslError::config(format!("{name} must be positive, got {v}")));
            }
        }
        let unit = [
            ("synth_lambda", self.synth_lambda),
            ("sbm_p_in", self.sbm_p_in),
            ("sbm_p_out", self.sbm_p_out),
            ("sbm_homophily_shift", self.sbm_homophily_shift),
            ("sbm_known_fraction", self.sbm_known_fraction),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(RslError::config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !(self.target_id_tpr > 0.0 && self.target_id_tpr <= 1.0) {
            return Err(RslError::config("target_id_tpr must lie in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.classifier_dropout) {
            return Err(RslError::config("classifier_dropout must lie in [0, 1)"));
        }
        for (name, v) in [
            ("synth_noise_std", self.synth_noise_std),
            ("toy_spread", self.toy_spread),
            ("sbm_spread", self.sbm_spread),
            ("toy_separation", self.toy_separation),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(RslError::config(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("candidate_n", self.candidate_n),
            ("resonance_dim", self.resonance_dim),
            ("num_targets", self.num_targets),
            ("synth_knn_k", self.synth_knn_k),
            ("classifier_hidden", self.classifier_hidden),
            ("classifier_layers", self.classifier_layers),
        ] {
            if v == 0 {
                return Err(RslError::config(format!("{name} must be at least 1")));
            }
        }
        if self.source == DataSource::Toy && self.toy_dim < 2 {
            return Err(RslError::config("toy_dim must be at least 2"));
        }
        if self.sbm_block_sizes.len() != self.sbm_block_ood.len() {
            return Err(RslError::config("sbm_block_sizes and sbm_block_ood differ in length"));
        }
        if self.source == DataSource::Files {
            for (name, p) in [
                ("edge_path", &self.edge_path),
                ("feature_path", &self.feature_path),
                ("roles_path", &self.roles_path),
                ("ood_flags_path", &self.ood_flags_path),
            ] {
                if p.is_none() {
                    return Err(RslError::config(format!("source = \"files\" requires {name}")));
                }
            }
        }
        Ok(())
    }

    pub fn toy_spec(&self) -> ToySpec {
        let a = self.toy_separation / std::f64::consts::SQRT_2;
        let mut id_center = vec![0.0; self.toy_dim];
        let mut ood_center = vec![0.0; self.toy_dim];
        id_center[0] = a;
        ood_center[1] = a;
        ToySpec {
            n_known: self.toy_n_known,
            n_wild_in: self.toy_n_wild_in,
            n_wild_out: self.toy_n_wild_out,
            dim: self.toy_dim,
            id_center,
            ood_center,
            spread: self.toy_spread,
            seed: self.seed,
        }
    }

    pub fn sbm_spec(&self) -> SbmSpec {
        let nb = self.sbm_block_sizes.len().max(1);
        let blocks = self
            .sbm_block_sizes
            .iter()
            .zip(&self.sbm_block_ood)
            .enumerate()
            .map(|(b, (&size, &ood))| SbmBlock {
                size,
                ood,
                center: (0..self.sbm_dim)
                    .map(|c| if c % nb == b { self.sbm_center_scale } else { 0.0 })
                    .collect(),
            })
            .collect();
        SbmSpec {
            blocks,
            p_in: self.sbm_p_in,
            p_out: self.sbm_p_out,
            spread: self.sbm_spread,
            homophily_shift: self.sbm_homophily_shift,
            known_fraction: self.sbm_known_fraction,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_key_is_rejected() {
        let e = RunConfig::parse("candidate_m = 3").unwrap_err();
        assert!(matches!(e, RslError::Config(_)));
        assert!(e.to_string().contains("candidate_m"));
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::default();
        c.source = DataSource::Sbm;
        c.seed = 42;
        c.synth_noise_std = 0.1 + 0.2;
        c.baseline = Some(BaselineMode::Mahalanobis);
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn toy_defaults_match_spec_defaults() {
        let t = RunConfig::default().toy_spec();
        let d = ToySpec::default();
        assert_eq!(t, d);
    }

    #[test]
    fn sbm_defaults_match_spec_defaults() {
        assert_eq!(RunConfig::default().sbm_spec(), SbmSpec::default());
    }

    #[test]
    fn range_checks() {
        assert!(RunConfig::parse("synth_lambda = 1.5").is_err());
        assert!(RunConfig::parse("resonance_lr = 0.0").is_err());
        assert!(RunConfig::parse("candidate_n = 0").is_err());
        assert!(RunConfig::parse("source = \"files\"").is_err());
        assert!(RunConfig::parse("classifier_dropout = 1.0").is_err());
    }
}
