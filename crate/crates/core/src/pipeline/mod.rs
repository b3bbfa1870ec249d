//! End-to-end orchestration: data preparation, the four phases, and the
//! artifacts each phase leaves in the run directory.
//!
//! Randomness derives from the run seed `s`: dataset `s`, split `s+1`,
//! resonance targets `s+2`, head weights `s+3`, synthesis `s+4`, energy
//! model initialization `s+5`, classifier dropout `s+6`.

mod artifacts;
pub mod config;
mod report;

use std::fmt;
use std::path::Path;

pub use artifacts::{names, ResonanceSummary};
pub use config::{DataSource, RunConfig};
pub use report::{
    evaluate_csv, verify_report, BaselineBlock, MetricBlock, ReportSummary, ScoreReport, ScoreRow, SplitTag,
};

use crate::baselines::{baseline_scores, fit_prototype};
use crate::classifier::{energy_threshold, train_classifier, EnergyModel, GraphInput, TrainConfig, TrainOutcome, TrainSet};
use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};
use crate::graph::{
    load_graph, make_sbm_dataset, make_toy_dataset, normalize_adjacency, propagate, stratified_split, Dataset,
    Graph, SparseMatrix, Standardizer,
};
use crate::resonance::{run_resonance, select_resonant_epoch, tau_threshold, ResonanceConfig, ResonanceInputs, ResonanceTrace, TargetMode};
use crate::rng::{stage_seed, Rng};
use crate::synth::{select_candidates, synthesize_nodes, SynthConfig, Synthesis};

pub const SEED_SPLIT: u64 = 1;
pub const SEED_RESONANCE: u64 = 2;
pub const SEED_SYNTH: u64 = 4;
pub const SEED_ENERGY_INIT: u64 = 5;
pub const SEED_DROPOUT: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Prepare,
    Resonance,
    Synthesize,
    Classify,
    Score,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Prepare => "prepare",
            Stage::Resonance => "resonance",
            Stage::Synthesize => "synthesize",
            Stage::Classify => "classify",
            Stage::Score => "score",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("[{stage}] {error}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub error: RslError,
}

impl StageError {
    pub fn exit_code(&self) -> i32 {
        self.error.exit_code()
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

/// Dataset plus everything derived from it deterministically.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: Dataset,
    /// Graph with standardized features.
    pub graph: Graph,
    pub adj: SparseMatrix,
    /// Resonance head and baseline input, one row per node.
    pub head_input: DenseMatrix,
    /// ID class of each known node (in `known_id` order).
    pub known_labels: Vec<usize>,
}

impl Prepared {
    pub fn masks(&self) -> &crate::graph::SplitMasks {
        &self.dataset.masks
    }
}

fn load_files_dataset(cfg: &RunConfig) -> Result<(Dataset, Vec<usize>)> {
    let req = |p: &Option<std::path::PathBuf>, name: &str| {
        p.clone()
            .ok_or_else(|| RslError::config(format!("source = \"files\" requires {name}")))
    };
    let edge = req(&cfg.edge_path, "edge_path")?;
    let feat = req(&cfg.feature_path, "feature_path")?;
    let roles_path = req(&cfg.roles_path, "roles_path")?;
    let flags_path = req(&cfg.ood_flags_path, "ood_flags_path")?;
    let graph = load_graph(&edge, &feat)?;
    let n = graph.num_nodes();
    let roles = crate::io::read_labels(&roles_path)?;
    let flags = crate::io::read_labels(&flags_path)?;
    for (what, len, path) in [("roles", roles.len(), &roles_path), ("OOD flags", flags.len(), &flags_path)] {
        if len != n {
            return Err(RslError::Validation(format!(
                "{}: {len} {what} for {n} nodes",
                path.display()
            )));
        }
    }
    let mut known = Vec::new();
    let mut wild = Vec::new();
    let mut is_ood = vec![false; n];
    for v in 0..n {
        is_ood[v] = match flags[v].as_str() {
            "0" => false,
            "1" => true,
            other => return Err(crate::io::parse_err(&flags_path, v + 1, format!("expected 0 or 1, found `{other}`"))),
        };
        match roles[v].as_str() {
            "known" if is_ood[v] => {
                return Err(RslError::Validation(format!("node {v} is known but flagged OOD")));
            }
            "known" => known.push(v),
            "wild" => wild.push(v),
            other => {
                return Err(crate::io::parse_err(&roles_path, v + 1, format!("expected known or wild, found `{other}`")))
            }
        }
    }
    let wild_flags: Vec<bool> = wild.iter().map(|&v| is_ood[v]).collect();
    let masks = stratified_split(known, wild, &wild_flags, stage_seed(cfg.seed, SEED_SPLIT))?;
    let labels = match &cfg.labels_path {
        Some(p) => {
            let all = crate::io::read_labels(p)?;
            if all.len() != n {
                return Err(RslError::Validation(format!("{}: {} labels for {n} nodes", p.display(), all.len())));
            }
            masks
                .known_id
                .iter()
                .map(|&v| {
                    all[v]
                        .parse::<usize>()
                        .map_err(|_| crate::io::parse_err(p, v + 1, format!("invalid class `{}`", all[v])))
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => vec![0; masks.known_id.len()],
    };
    Ok((Dataset { graph, masks, is_ood }, labels))
}

/// Builds or loads the dataset, standardizes features with known-ID
/// statistics, and propagates them for the resonance head.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    cfg.validate()?;
    let (dataset, known_labels) = match cfg.source {
        DataSource::Toy => {
            let d = make_toy_dataset(&cfg.toy_spec())?;
            let labels = vec![0; d.masks.known_id.len()];
            (d, labels)
        }
        DataSource::Sbm => {
            let spec = cfg.sbm_spec();
            let d = make_sbm_dataset(&spec)?;
            // consecutive class ids over the ID blocks
            let mut block_class = Vec::new();
            let mut next = 0;
            for b in &spec.blocks {
                block_class.push(next);
                if !b.ood {
                    next += 1;
                }
            }
            let mut class_of = Vec::new();
            for (b, block) in spec.blocks.iter().enumerate() {
                class_of.extend(std::iter::repeat_n(block_class[b], block.size));
            }
            let labels = d.masks.known_id.iter().map(|&v| class_of[v]).collect();
            (d, labels)
        }
        DataSource::Files => load_files_dataset(cfg)?,
    };
    let x = dataset.graph.features();
    let scaler = Standardizer::fit(cfg.standardize, x, &dataset.masks.known_id)?;
    let graph = dataset.graph.with_features(scaler.transform(x)?)?;
    let adj = normalize_adjacency(&graph);
    let head_input = if graph.num_edges() > 0 && !cfg.raw_features {
        propagate(&adj, graph.features(), cfg.hops)?
    } else {
        graph.features().clone()
    };
    Ok(Prepared {
        dataset,
        graph,
        adj,
        head_input,
        known_labels,
    })
}

fn resonance_config(cfg: &RunConfig, prep: &Prepared) -> Result<ResonanceConfig> {
    let (num_targets, labels) = match cfg.target_mode {
        TargetMode::EtfByLabel => {
            let k = prep.known_labels.iter().max().map_or(0, |m| m + 1);
            (k, Some(prep.known_labels.clone()))
        }
        _ => (cfg.num_targets, None),
    };
    Ok(ResonanceConfig {
        lr: cfg.resonance_lr,
        epochs: cfg.resonance_epochs,
        dim: cfg.resonance_dim,
        target_mode: cfg.target_mode,
        num_targets,
        labels,
        seed: stage_seed(cfg.seed, SEED_RESONANCE),
        keep_snapshots: false,
    })
}

/// Phase 1 and 2: resonance trace, validation-selected epoch, τ detector
/// threshold, and the candidate OOD set.
pub fn resonance_phase(cfg: &RunConfig, prep: &Prepared) -> Result<(ResonanceTrace, ResonanceSummary)> {
    let m = prep.masks();
    if cfg.candidate_n > m.wild.len() {
        return Err(RslError::config(format!(
            "candidate_n = {} exceeds the {} wild nodes",
            cfg.candidate_n,
            m.wild.len()
        )));
    }
    if cfg.resonance_epochs == 0 {
        return Err(RslError::config("resonance_epochs must be at least 1"));
    }
    let rcfg = resonance_config(cfg, prep)?;
    let known = prep.head_input.select_rows(&m.known_id);
    let wild = prep.head_input.select_rows(&m.wild);
    let trace = run_resonance(
        &rcfg,
        &ResonanceInputs {
            known: &known,
            wild: &wild,
            wild_nodes: &m.wild,
            val_in: &m.val_in,
            val_out: &m.val_out,
        },
    )?;
    let t_star = select_resonant_epoch(&trace, &m.val_in, &m.val_out)?;
    let tau = trace.tau_at(t_star).to_vec();
    let pos: std::collections::HashMap<usize, usize> = m.wild.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let val_id_tau: Vec<f64> = m.val_in.iter().map(|v| tau[pos[v]]).collect();
    let gamma = tau_threshold(&val_id_tau, cfg.target_id_tpr)?;
    let cand = select_candidates(&tau, cfg.candidate_n)?;
    let summary = ResonanceSummary {
        t_star,
        val_auroc: trace.val_auroc[t_star],
        gamma: gamma.gamma,
        target_id_tpr: gamma.target_id_tpr,
        nodes: m.wild.clone(),
        tau,
        candidates: cand.indices.iter().map(|&i| m.wild[i]).collect(),
        candidate_threshold: cand.threshold,
    };
    Ok((trace, summary))
}

pub fn initial_energy_model(cfg: &RunConfig, prep: &Prepared) -> Result<EnergyModel> {
    let mut rng = Rng::new(stage_seed(cfg.seed, SEED_ENERGY_INIT));
    EnergyModel::init(prep.graph.feature_dim(), cfg.classifier_hidden, cfg.classifier_layers, &mut rng)
}

/// Phase 3: SGLD synthesis against the freshly initialized energy model.
pub fn synthesis_phase(cfg: &RunConfig, prep: &Prepared, candidates: &[usize]) -> Result<Synthesis> {
    let model = initial_energy_model(cfg, prep)?;
    let scfg = SynthConfig {
        count: cfg.synth_count,
        steps: cfg.synth_steps,
        step_size: cfg.synth_step_size,
        lambda: cfg.synth_lambda,
        noise_std: cfg.synth_noise_std,
        knn_k: cfg.synth_knn_k,
        seed: stage_seed(cfg.seed, SEED_SYNTH),
    };
    synthesize_nodes(&model, &prep.graph, candidates, &scfg)
}

/// Phase 4: energy classifier on the augmented graph, checkpointed by
/// validation AUROC on the original graph.
pub fn classifier_phase(
    cfg: &RunConfig,
    prep: &Prepared,
    candidates: &[usize],
    synthesis: &Synthesis,
) -> Result<TrainOutcome> {
    let base = prep.graph.num_nodes();
    if let Some(&(s, c)) = synthesis
        .edges
        .iter()
        .find(|&&(s, c)| s >= synthesis.count() || c >= base)
    {
        return Err(RslError::Validation(format!("synthetic edge ({s}, {c}) is out of range")));
    }
    let aug = synthesis.augment(&prep.graph)?;
    let aug_adj = normalize_adjacency(&aug);
    let synthetic: Vec<usize> = (base..base + synthesis.count()).collect();
    let train = TrainSet::new(&prep.masks().known_id, candidates, &synthetic);
    let tcfg = TrainConfig {
        epochs: cfg.classifier_epochs,
        lr: cfg.classifier_lr,
        dropout: cfg.classifier_dropout,
        seed: stage_seed(cfg.seed, SEED_DROPOUT),
    };
    train_classifier(
        initial_energy_model(cfg, prep)?,
        GraphInput {
            adj: &aug_adj,
            x: aug.features(),
        },
        GraphInput {
            adj: &prep.adj,
            x: prep.graph.features(),
        },
        &train,
        &prep.masks().val_in,
        &prep.masks().val_out,
        &tcfg,
    )
}

/// Final per-node scores on the wild set and test-split metrics.
pub fn score_phase(
    cfg: &RunConfig,
    prep: &Prepared,
    res: &ResonanceSummary,
    model: &EnergyModel,
    best_epoch: usize,
) -> Result<ScoreReport> {
    let m = prep.masks();
    if res.nodes != m.wild {
        return Err(RslError::Consistency(
            "resonance scores do not cover the wild set of this configuration".into(),
        ));
    }
    let energy_all = model.energies(&prep.adj, prep.graph.features())?;
    let val_id_energy: Vec<f64> = m.val_in.iter().map(|&v| energy_all[v]).collect();
    let gamma_prime = energy_threshold(&val_id_energy, cfg.target_id_tpr)?;
    let baseline = match cfg.baseline {
        Some(mode) => {
            let proto = fit_prototype(&prep.head_input.select_rows(&m.known_id), mode)?;
            Some((mode, baseline_scores(mode, &proto, &prep.head_input.select_rows(&m.wild))?))
        }
        None => None,
    };
    let test: std::collections::HashSet<usize> = m.test().collect();
    let rows: Vec<ScoreRow> = m
        .wild
        .iter()
        .enumerate()
        .map(|(i, &v)| ScoreRow {
            node: v,
            split: if test.contains(&v) { SplitTag::Test } else { SplitTag::Val },
            is_ood: prep.dataset.is_ood[v],
            tau: res.tau[i],
            energy: energy_all[v],
            tau_flag: res.tau[i] <= res.gamma,
            energy_flag: energy_all[v] <= gamma_prime.gamma,
            baseline: baseline.as_ref().map(|(_, s)| s[i]),
        })
        .collect();
    let summary = ReportSummary::from_rows(
        &rows,
        cfg,
        res,
        gamma_prime.gamma,
        best_epoch,
        baseline.map(|(mode, _)| mode),
    )?;
    Ok(ScoreReport { rows, summary })
}

/// All four phases in memory, then every artifact is written to `out`.
/// On failure a `FAILED` marker with the stage-tagged message is left in `out`.
pub fn run_all(cfg: &RunConfig, out: &Path) -> std::result::Result<ScoreReport, StageError> {
    let result = (|| {
        let _ = std::fs::remove_file(out.join(names::FAILED));
        artifacts::write_config(out, cfg).at(Stage::Prepare)?;
        let prep = prepare(cfg).at(Stage::Prepare)?;
        let (trace, res) = resonance_phase(cfg, &prep).at(Stage::Resonance)?;
        artifacts::write_resonance(out, &trace, &res).at(Stage::Resonance)?;
        let syn = synthesis_phase(cfg, &prep, &res.candidates).at(Stage::Synthesize)?;
        artifacts::write_synthesis(out, &syn).at(Stage::Synthesize)?;
        let outcome = classifier_phase(cfg, &prep, &res.candidates, &syn).at(Stage::Classify)?;
        artifacts::write_classifier(out, &outcome).at(Stage::Classify)?;
        let report = score_phase(cfg, &prep, &res, &outcome.model, outcome.best_epoch).at(Stage::Score)?;
        artifacts::write_report(out, &report).at(Stage::Score)?;
        Ok(report)
    })();
    if let Err(e) = &result {
        mark_failed(out, e);
    }
    result
}

fn mark_failed(out: &Path, e: &StageError) {
    // Best effort: the original error is what gets reported.
    let _ = crate::io::write_string(&out.join(names::FAILED), &format!("{e}\n"));
}

/// Stage command: phases 1 and 2.
pub fn run_resonance_stage(cfg: &RunConfig, out: &Path) -> std::result::Result<ResonanceSummary, StageError> {
    let prep = prepare(cfg).at(Stage::Prepare)?;
    let (trace, res) = resonance_phase(cfg, &prep).at(Stage::Resonance)?;
    artifacts::write_config(out, cfg).at(Stage::Resonance)?;
    artifacts::write_resonance(out, &trace, &res).at(Stage::Resonance)?;
    Ok(res)
}

/// Stage command: phase 3 from a persisted candidate list.
pub fn run_synthesize_stage(cfg: &RunConfig, out: &Path) -> std::result::Result<Synthesis, StageError> {
    let candidates = artifacts::read_candidates(out).at(Stage::Synthesize)?;
    let prep = prepare(cfg).at(Stage::Prepare)?;
    let syn = synthesis_phase(cfg, &prep, &candidates).at(Stage::Synthesize)?;
    artifacts::write_synthesis(out, &syn).at(Stage::Synthesize)?;
    Ok(syn)
}

/// Stage command: phase 4 from persisted candidates and synthetic nodes.
pub fn run_classify_stage(cfg: &RunConfig, out: &Path) -> std::result::Result<TrainOutcome, StageError> {
    let candidates = artifacts::read_candidates(out).at(Stage::Classify)?;
    let syn = artifacts::read_synthesis(out).at(Stage::Classify)?;
    let prep = prepare(cfg).at(Stage::Prepare)?;
    let outcome = classifier_phase(cfg, &prep, &candidates, &syn).at(Stage::Classify)?;
    artifacts::write_classifier(out, &outcome).at(Stage::Classify)?;
    Ok(outcome)
}

/// Stage command: final scoring from persisted τ and model snapshot.
pub fn run_score_stage(cfg: &RunConfig, out: &Path) -> std::result::Result<ScoreReport, StageError> {
    let res = artifacts::read_resonance(out).at(Stage::Score)?;
    let (model, best_epoch) = artifacts::read_classifier(out).at(Stage::Score)?;
    let prep = prepare(cfg).at(Stage::Prepare)?;
    let report = score_phase(cfg, &prep, &res, &model, best_epoch).at(Stage::Score)?;
    artifacts::write_report(out, &report).at(Stage::Score)?;
    Ok(report)
}

/// Writes a generated dataset in the `files` source layout:
/// `edges.txt`, `features.csv`, `roles.txt`, `ood.txt`, `labels.txt`.
pub fn export_dataset(cfg: &RunConfig, out: &Path) -> Result<()> {
    artifacts::write_dataset(out, &prepare(cfg)?)
}
