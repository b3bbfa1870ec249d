use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::BaselineMode;
use crate::error::{Result, RslError};
use crate::io::{column, parse_err, parse_f64, read_table, read_to_string};
use crate::metrics::{summarize, MetricSummary, ScoredLabels};

use super::{names, ResonanceSummary, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Val,
    Test,
}

impl SplitTag {
    fn as_str(self) -> &'static str {
        match self {
            SplitTag::Val => "val",
            SplitTag::Test => "test",
        }
    }
}

/// One wild node. Flags mark predicted OOD (`τ ≤ γ`, `E ≤ γ′`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub node: usize,
    pub split: SplitTag,
    pub is_ood: bool,
    pub tau: f64,
    pub energy: f64,
    pub tau_flag: bool,
    pub energy_flag: bool,
    pub baseline: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricBlock {
    pub auroc: f64,
    pub aupr: f64,
    pub fpr95: f64,
}

impl From<MetricSummary> for MetricBlock {
    fn from(m: MetricSummary) -> Self {
        Self {
            auroc: m.auroc,
            aupr: m.aupr,
            fpr95: m.fpr95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineBlock {
    pub mode: BaselineMode,
    pub auroc: f64,
    pub aupr: f64,
    pub fpr95: f64,
}

/// Summary written to `report.toml`. Metrics cover the test split; OOD scores
/// are `−τ`, `−E`, and the baseline score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSummary {
    pub seed: u64,
    pub t_star: usize,
    pub resonance_val_auroc: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
    pub target_id_tpr: f64,
    pub candidate_threshold: f64,
    pub classifier_best_epoch: usize,
    pub test_nodes: usize,
    pub tau_only: MetricBlock,
    pub classifier: MetricBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineBlock>,
    pub config: RunConfig,
}

struct TestMetrics {
    tau_only: MetricBlock,
    classifier: MetricBlock,
    baseline: Option<MetricBlock>,
    count: usize,
}

fn test_metrics(rows: &[ScoreRow]) -> Result<TestMetrics> {
    let test: Vec<&ScoreRow> = rows.iter().filter(|r| r.split == SplitTag::Test).collect();
    let labels: Vec<bool> = test.iter().map(|r| r.is_ood).collect();
    let block = |scores: Vec<f64>| -> Result<MetricBlock> {
        Ok(summarize(&ScoredLabels::new(scores, labels.clone())?)?.into())
    };
    let baseline = if test.iter().all(|r| r.baseline.is_some()) && !test.is_empty() {
        Some(block(test.iter().map(|r| r.baseline.unwrap_or_default()).collect())?)
    } else {
        None
    };
    Ok(TestMetrics {
        tau_only: block(test.iter().map(|r| -r.tau).collect())?,
        classifier: block(test.iter().map(|r| -r.energy).collect())?,
        baseline,
        count: test.len(),
    })
}

impl ReportSummary {
    pub(crate) fn from_rows(
        rows: &[ScoreRow],
        cfg: &RunConfig,
        res: &ResonanceSummary,
        gamma_prime: f64,
        best_epoch: usize,
        baseline: Option<BaselineMode>,
    ) -> Result<Self> {
        let m = test_metrics(rows)?;
        let baseline = match (baseline, m.baseline) {
            (Some(mode), Some(b)) => Some(BaselineBlock {
                mode,
                auroc: b.auroc,
                aupr: b.aupr,
                fpr95: b.fpr95,
            }),
            _ => None,
        };
        Ok(Self {
            seed: cfg.seed,
            t_star: res.t_star,
            resonance_val_auroc: res.val_auroc,
            gamma: res.gamma,
            gamma_prime,
            target_id_tpr: res.target_id_tpr,
            candidate_threshold: res.candidate_threshold,
            classifier_best_epoch: best_epoch,
            test_nodes: m.count,
            tau_only: m.tau_only,
            classifier: m.classifier,
            baseline,
            config: cfg.clone(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report is plain data")
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| RslError::Validation(format!("malformed report: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub rows: Vec<ScoreRow>,
    pub summary: ReportSummary,
}

fn bit(b: bool) -> u8 {
    u8::from(b)
}

impl ScoreReport {
    pub fn rows_csv(&self) -> String {
        let mut s = String::from("node,split,is_ood,tau,energy,tau_ood_score,energy_ood_score,tau_flag,energy_flag");
        if let Some(b) = &self.summary.baseline {
            let _ = write!(s, ",baseline_{}", b.mode.name());
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.node,
                r.split.as_str(),
                bit(r.is_ood),
                r.tau,
                r.energy,
                -r.tau,
                -r.energy,
                bit(r.tau_flag),
                bit(r.energy_flag)
            );
            if let (Some(v), Some(_)) = (r.baseline, &self.summary.baseline) {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }

    /// Loads `report.toml` and `scores.csv` from a run directory.
    pub fn load(dir: &Path) -> Result<Self> {
        let summary = ReportSummary::parse(&read_to_string(&dir.join(names::REPORT))?)?;
        let path = dir.join(names::SCORES);
        let (header, table) = read_table(&path)?;
        let col = |name: &str| column(&path, &header, name);
        let (cn, cs, co, ct, ce, ctf, cef) = (
            col("node")?,
            col("split")?,
            col("is_ood")?,
            col("tau")?,
            col("energy")?,
            col("tau_flag")?,
            col("energy_flag")?,
        );
        let cb = match &summary.baseline {
            Some(b) => Some(col(&format!("baseline_{}", b.mode.name()))?),
            None => None,
        };
        let mut rows = Vec::with_capacity(table.len());
        for (line, cells) in &table {
            let line = *line;
            let flag = |c: usize| parse_bool(&path, line, &cells[c]);
            rows.push(ScoreRow {
                node: cells[cn]
                    .parse()
                    .map_err(|_| parse_err(&path, line, format!("invalid node `{}`", cells[cn])))?,
                split: match cells[cs].as_str() {
                    "val" => SplitTag::Val,
                    "test" => SplitTag::Test,
                    other => return Err(parse_err(&path, line, format!("unknown split `{other}`"))),
                },
                is_ood: flag(co)?,
                tau: parse_f64(&path, line, &cells[ct])?,
                energy: parse_f64(&path, line, &cells[ce])?,
                tau_flag: flag(ctf)?,
                energy_flag: flag(cef)?,
                baseline: cb.map(|c| parse_f64(&path, line, &cells[c])).transpose()?,
            });
        }
        Ok(Self { rows, summary })
    }

    /// Recomputes every summary metric and detector flag from the rows.
    pub fn verify(&self) -> Result<()> {
        let m = test_metrics(&self.rows)?;
        let s = &self.summary;
        let mismatch = |what: &str| Err(RslError::Consistency(format!("{what} disagrees with the per-node rows")));
        if m.count != s.test_nodes {
            return mismatch("test node count");
        }
        if m.tau_only != s.tau_only {
            return mismatch("tau_only metrics");
        }
        if m.classifier != s.classifier {
            return mismatch("classifier metrics");
        }
        if let Some(b) = &s.baseline {
            let want = MetricBlock {
                auroc: b.auroc,
                aupr: b.aupr,
                fpr95: b.fpr95,
            };
            if m.baseline != Some(want) {
                return mismatch("baseline metrics");
            }
        }
        if let Some(r) = self
            .rows
            .iter()
            .find(|r| r.tau_flag != (r.tau <= s.gamma) || r.energy_flag != (r.energy <= s.gamma_prime))
        {
            return mismatch(&format!("detector flag of node {}", r.node));
        }
        Ok(())
    }
}

fn parse_bool(path: &Path, line: usize, tok: &str) -> Result<bool> {
    match tok {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(parse_err(path, line, format!("expected 0 or 1, found `{other}`"))),
    }
}

/// Loads a run directory's report and checks it against its rows.
pub fn verify_report(dir: &Path) -> Result<ScoreReport> {
    let r = ScoreReport::load(dir)?;
    r.verify()?;
    Ok(r)
}

/// Metrics over an arbitrary CSV with a header row: `score_column` holds OOD
/// scores (higher = more OOD), `label_column` holds 0/1 OOD labels. With
/// `split`, only rows whose `split` column matches are used.
pub fn evaluate_csv(path: &Path, score_column: &str, label_column: &str, split: Option<&str>) -> Result<MetricSummary> {
    let (header, rows) = read_table(path)?;
    let cs = column(path, &header, score_column)?;
    let cl = column(path, &header, label_column)?;
    let csplit = split.map(|_| column(path, &header, "split")).transpose()?;
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (line, cells) in &rows {
        if let (Some(c), Some(want)) = (csplit, split) {
            if cells[c] != want {
                continue;
            }
        }
        scores.push(parse_f64(path, *line, &cells[cs])?);
        labels.push(parse_bool(path, *line, &cells[cl])?);
    }
    summarize(&ScoredLabels::new(scores, labels)?)
}
