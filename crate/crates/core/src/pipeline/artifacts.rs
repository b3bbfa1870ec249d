//! Run-directory files. Reals are written with shortest round-trip formatting,
//! so a stage that reloads an artifact sees exactly the values that were
//! computed.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::{decode_model, encode_model, EnergyModel, TrainOutcome};
use crate::error::{Result, RslError};
use crate::io::{column, parse_err, parse_f64, read_matrix_csv, read_table, read_to_string, write_matrix_csv, write_string};
use crate::resonance::ResonanceTrace;
use crate::synth::Synthesis;

use super::report::ScoreReport;
use super::{Prepared, RunConfig};

pub mod names {
    pub const CONFIG: &str = "config.toml";
    pub const TRACE: &str = "trace.csv";
    pub const EPOCH_METRICS: &str = "epoch_metrics.csv";
    pub const RESONANCE: &str = "resonance.csv";
    pub const RESONANCE_SUMMARY: &str = "resonance.toml";
    pub const CANDIDATES: &str = "candidates.csv";
    pub const SYNTHETIC: &str = "synthetic.csv";
    pub const SYNTHETIC_EDGES: &str = "synthetic_edges.csv";
    pub const MODEL: &str = "model.txt";
    pub const CLASSIFIER_METRICS: &str = "classifier_metrics.csv";
    pub const CLASSIFIER_SUMMARY: &str = "classifier.toml";
    pub const SCORES: &str = "scores.csv";
    pub const REPORT: &str = "report.toml";
    pub const FAILED: &str = "FAILED";
}

/// Output of phases 1 and 2 needed downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceSummary {
    /// Selected epoch, 0-based (the τ of the `t_star + 1`-th update).
    pub t_star: usize,
    pub val_auroc: f64,
    pub gamma: f64,
    pub target_id_tpr: f64,
    /// Wild nodes in ascending order, aligned with `tau`.
    pub nodes: Vec<usize>,
    pub tau: Vec<f64>,
    /// Candidate nodes, ascending by `(τ, position)`.
    pub candidates: Vec<usize>,
    pub candidate_threshold: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResonanceToml {
    t_star: usize,
    val_auroc: f64,
    gamma: f64,
    target_id_tpr: f64,
    candidate_threshold: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifierToml {
    best_epoch: usize,
    best_val_auroc: f64,
}

fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    toml::from_str(&read_to_string(path)?).map_err(|e| parse_err(path, 1, e.to_string()))
}

fn parse_usize(path: &Path, line: usize, tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("invalid index `{tok}`")))
}

pub(crate) fn write_config(out: &Path, cfg: &RunConfig) -> Result<()> {
    write_string(&out.join(names::CONFIG), &cfg.to_toml())
}

pub(crate) fn write_resonance(out: &Path, trace: &ResonanceTrace, res: &ResonanceSummary) -> Result<()> {
    let mut t = String::from("epoch,node,tau\n");
    for (e, taus) in trace.taus.iter().enumerate() {
        for (v, tau) in trace.nodes.iter().zip(taus) {
            let _ = writeln!(t, "{e},{v},{tau}");
        }
    }
    write_string(&out.join(names::TRACE), &t)?;

    let mut m = String::from("epoch,val_auroc,loss\n");
    for (e, (a, l)) in trace.val_auroc.iter().zip(&trace.losses).enumerate() {
        let _ = writeln!(m, "{e},{a},{l}");
    }
    write_string(&out.join(names::EPOCH_METRICS), &m)?;

    let mut r = String::from("node,tau\n");
    for (v, tau) in res.nodes.iter().zip(&res.tau) {
        let _ = writeln!(r, "{v},{tau}");
    }
    write_string(&out.join(names::RESONANCE), &r)?;

    let pos: std::collections::HashMap<usize, usize> = res.nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut c = String::from("rank,node,tau\n");
    for (rank, v) in res.candidates.iter().enumerate() {
        let _ = writeln!(c, "{rank},{v},{}", res.tau[pos[v]]);
    }
    write_string(&out.join(names::CANDIDATES), &c)?;

    let summary = ResonanceToml {
        t_star: res.t_star,
        val_auroc: res.val_auroc,
        gamma: res.gamma,
        target_id_tpr: res.target_id_tpr,
        candidate_threshold: res.candidate_threshold,
    };
    write_string(
        &out.join(names::RESONANCE_SUMMARY),
        &toml::to_string(&summary).expect("plain data"),
    )
}

pub(crate) fn read_candidates(out: &Path) -> Result<Vec<usize>> {
    let path = out.join(names::CANDIDATES);
    let (header, rows) = read_table(&path)?;
    let col = column(&path, &header, "node")?;
    let nodes: Vec<usize> = rows
        .iter()
        .map(|(line, cells)| parse_usize(&path, *line, &cells[col]))
        .collect::<Result<_>>()?;
    if nodes.is_empty() {
        return Err(RslError::Validation(format!("{} lists no candidates", path.display())));
    }
    Ok(nodes)
}

pub(crate) fn read_resonance(out: &Path) -> Result<ResonanceSummary> {
    let summary: ResonanceToml = parse_toml(&out.join(names::RESONANCE_SUMMARY))?;
    let path = out.join(names::RESONANCE);
    let (header, rows) = read_table(&path)?;
    let (cn, ct) = (column(&path, &header, "node")?, column(&path, &header, "tau")?);
    let mut nodes = Vec::with_capacity(rows.len());
    let mut tau = Vec::with_capacity(rows.len());
    for (line, cells) in &rows {
        nodes.push(parse_usize(&path, *line, &cells[cn])?);
        tau.push(parse_f64(&path, *line, &cells[ct])?);
    }
    Ok(ResonanceSummary {
        t_star: summary.t_star,
        val_auroc: summary.val_auroc,
        gamma: summary.gamma,
        target_id_tpr: summary.target_id_tpr,
        nodes,
        tau,
        candidates: read_candidates(out)?,
        candidate_threshold: summary.candidate_threshold,
    })
}

pub(crate) fn write_synthesis(out: &Path, syn: &Synthesis) -> Result<()> {
    write_matrix_csv(&out.join(names::SYNTHETIC), &syn.features)?;
    let mut e = String::from("synthetic,candidate\n");
    for (s, c) in &syn.edges {
        let _ = writeln!(e, "{s},{c}");
    }
    write_string(&out.join(names::SYNTHETIC_EDGES), &e)
}

pub(crate) fn read_synthesis(out: &Path) -> Result<Synthesis> {
    let features = read_matrix_csv(&out.join(names::SYNTHETIC))?;
    let path = out.join(names::SYNTHETIC_EDGES);
    let (header, rows) = read_table(&path)?;
    let (cs, cc) = (column(&path, &header, "synthetic")?, column(&path, &header, "candidate")?);
    let edges = rows
        .iter()
        .map(|(line, cells)| Ok((parse_usize(&path, *line, &cells[cs])?, parse_usize(&path, *line, &cells[cc])?)))
        .collect::<Result<_>>()?;
    Ok(Synthesis { features, edges })
}

pub(crate) fn write_classifier(out: &Path, outcome: &TrainOutcome) -> Result<()> {
    write_string(&out.join(names::MODEL), &encode_model(&outcome.model))?;
    let mut m = String::from("epoch,val_auroc,loss\n");
    for (e, a) in outcome.val_auroc.iter().enumerate() {
        // loss of the update that produced epoch e
        let loss = e.checked_sub(1).map(|i| outcome.losses[i].to_string()).unwrap_or_default();
        let _ = writeln!(m, "{e},{a},{loss}");
    }
    write_string(&out.join(names::CLASSIFIER_METRICS), &m)?;
    let summary = ClassifierToml {
        best_epoch: outcome.best_epoch,
        best_val_auroc: outcome.val_auroc[outcome.best_epoch],
    };
    write_string(
        &out.join(names::CLASSIFIER_SUMMARY),
        &toml::to_string(&summary).expect("plain data"),
    )
}

pub(crate) fn read_classifier(out: &Path) -> Result<(EnergyModel, usize)> {
    let model = decode_model(&read_to_string(&out.join(names::MODEL))?)?;
    let summary: ClassifierToml = parse_toml(&out.join(names::CLASSIFIER_SUMMARY))?;
    Ok((model, summary.best_epoch))
}

pub(crate) fn write_report(out: &Path, report: &ScoreReport) -> Result<()> {
    write_string(&out.join(names::SCORES), &report.rows_csv())?;
    write_string(&out.join(names::REPORT), &report.summary.to_toml())
}

pub(crate) fn write_dataset(out: &Path, prep: &Prepared) -> Result<()> {
    let d = &prep.dataset;
    crate::graph::write_edges(&out.join("edges.txt"), &d.graph)?;
    crate::graph::write_features(&out.join("features.csv"), &d.graph)?;
    let n = d.graph.num_nodes();
    let mut roles = vec!["wild"; n];
    let mut labels = vec![String::from("-"); n];
    for (&v, &c) in d.masks.known_id.iter().zip(&prep.known_labels) {
        roles[v] = "known";
        labels[v] = c.to_string();
    }
    let join = |items: &mut dyn Iterator<Item = String>| items.map(|s| s + "\n").collect::<String>();
    write_string(&out.join("roles.txt"), &join(&mut roles.iter().map(|s| s.to_string())))?;
    write_string(
        &out.join("ood.txt"),
        &join(&mut d.is_ood.iter().map(|&o| if o { "1" } else { "0" }.to_string())),
    )?;
    write_string(&out.join("labels.txt"), &join(&mut labels.into_iter()))
}
