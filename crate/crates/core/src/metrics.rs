//! Rank-based evaluation: AUROC, average precision, repeat aggregation and
//! Friedman mean ranks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_lengths(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidParameter(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    Ok(())
}

/// Indices sorted by descending score.
fn descending_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Probability that a random positive outranks a random negative, ties
/// counting one half (Mann-Whitney U over midranks).
pub fn auroc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateLabels("AUROC needs both classes"));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of midranks (1-based) of the positives.
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let midrank = (start + end + 1) as f64 / 2.0;
        let pos_in_group = order[start..end]
            .iter()
            .filter(|&&i| labels[i] == 1)
            .count();
        rank_sum += midrank * pos_in_group as f64;
        start = end;
    }
    let (pos, neg) = (pos as f64, neg as f64);
    Ok((rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg))
}

/// Average precision: scanning tied groups in descending score order, the
/// sum of precision times the recall gained by each group.
pub fn aupr(scores: &[f64], labels: &[u8]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let total_pos = labels.iter().filter(|&&l| l == 1).count();
    if total_pos == 0 {
        return Err(Error::DegenerateLabels(
            "average precision needs a positive",
        ));
    }
    let order = descending_order(scores);
    let mut ap = 0.0;
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let gained = order[start..end]
            .iter()
            .filter(|&&i| labels[i] == 1)
            .count();
        tp += gained;
        seen += end - start;
        if gained > 0 {
            ap += (tp as f64 / seen as f64) * gained as f64;
        }
        start = end;
    }
    Ok(ap / total_pos as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeatSummary {
    pub auroc_mean: f64,
    pub auroc_std: f64,
    pub aupr_mean: f64,
    pub aupr_std: f64,
    pub n_repeats: usize,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Means and sample standard deviations of `(auroc, aupr)` runs.
pub fn aggregate_repeats(runs: &[(f64, f64)]) -> Result<RepeatSummary> {
    if runs.is_empty() {
        return Err(Error::InvalidParameter("no runs to aggregate".into()));
    }
    let auroc: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let aupr: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let (auroc_mean, auroc_std) = mean_std(&auroc);
    let (aupr_mean, aupr_std) = mean_std(&aupr);
    Ok(RepeatSummary {
        auroc_mean,
        auroc_std,
        aupr_mean,
        aupr_std,
        n_repeats: runs.len(),
    })
}

/// Ranks methods within each dataset row (1 = highest AUC, ties share the
/// average rank) and returns the mean rank of every column.
pub fn friedman_mean_ranks(table: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = table.first().map_or(0, Vec::len);
    if table.is_empty() || m < 2 {
        return Err(Error::InvalidParameter(
            "mean ranks need at least one dataset and two methods".into(),
        ));
    }
    let mut sums = vec![0.0; m];
    for row in table {
        if row.len() != m {
            return Err(Error::InvalidParameter("ragged AUC table".into()));
        }
        let order = descending_order(row);
        let mut start = 0;
        while start < m {
            let mut end = start + 1;
            while end < m && row[order[end]] == row[order[start]] {
                end += 1;
            }
            let rank = (start + end + 1) as f64 / 2.0;
            for &j in &order[start..end] {
                sums[j] += rank;
            }
            start = end;
        }
    }
    Ok(sums.into_iter().map(|s| s / table.len() as f64).collect())
}

/// Per-method summaries, serialized with method names as top-level keys next
/// to an optional `mean_ranks` object.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(flatten)]
    pub per_method: BTreeMap<String, RepeatSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_ranks: Option<BTreeMap<String, f64>>,
}

/// Single-run metrics written next to detector scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub auroc: f64,
    pub aupr: f64,
}

impl DetectionMetrics {
    pub fn compute(scores: &[f64], labels: &[u8]) -> Result<Self> {
        Ok(DetectionMetrics {
            auroc: auroc(scores, labels)?,
            aupr: aupr(scores, labels)?,
        })
    }
}
