use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::detector::{detect, DetectorParams};
use crate::error::{Error, Result};
use crate::metrics::{
    aggregate_repeats, aupr, auroc, friedman_mean_ranks, EvalReport, RepeatSummary,
};
use crate::model::{derive_seed, Dataset, Execution};
use crate::scoring::Method;

use super::fmt_f64;

#[derive(Debug, Clone)]
pub struct BenchDataset {
    pub name: String,
    pub data: Dataset,
}

#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub methods: Vec<Method>,
    pub datasets: Vec<BenchDataset>,
    pub repeats: usize,
    pub psi_grid: Vec<usize>,
    pub t: usize,
    pub n_trees: usize,
    pub seed: u64,
    pub normalize: bool,
    pub execution: Execution,
}

impl BenchPlan {
    pub fn new(methods: Vec<Method>, datasets: Vec<BenchDataset>) -> Self {
        BenchPlan {
            methods,
            datasets,
            repeats: 5,
            psi_grid: super::DEFAULT_PSI_GRID.to_vec(),
            t: 200,
            n_trees: crate::iforest::DEFAULT_TREES,
            seed: 0,
            normalize: false,
            execution: Execution::Parallel,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.datasets.is_empty() {
            return Err(Error::InvalidParameter(
                "a benchmark needs at least one method and one dataset".into(),
            ));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidParameter("repeats must be at least 1".into()));
        }
        if self.psi_grid.is_empty() || self.psi_grid.iter().any(|&p| p < 2) {
            return Err(Error::InvalidParameter(
                "psi grid must be non-empty with every value >= 2".into(),
            ));
        }
        for ds in &self.datasets {
            if ds.data.labels().is_none() {
                return Err(Error::InvalidDataset(format!(
                    "benchmark dataset {:?} has no labels",
                    ds.name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub method: Method,
    pub best_psi: usize,
    pub summary: RepeatSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutcome {
    /// Datasets in plan order, methods in canonical order within each.
    pub rows: Vec<BenchRow>,
    pub mean_ranks: Option<BTreeMap<String, f64>>,
}

/// Seed for repeat `r`; shared by every method and ψ so that results do not
/// depend on the order methods are listed in.
pub fn repeat_seed(seed: u64, repeat: usize) -> u64 {
    derive_seed(seed, repeat as u64)
}

fn params_for(method: Method, psi: usize, plan: &BenchPlan, seed: u64) -> DetectorParams {
    let params = DetectorParams::new(psi, plan.t, seed)
        .with_trees(plan.n_trees)
        .with_normalize(plan.normalize)
        .with_execution(plan.execution);
    match method {
        // ψ is the tree subsample size for the plain forest.
        Method::IForest => params.with_subsample(Some(psi)),
        _ => params,
    }
}

fn evaluate(method: Method, data: &Dataset, psi: usize, plan: &BenchPlan) -> Result<RepeatSummary> {
    let labels = data.labels().expect("validated");
    let runs = (0..plan.repeats)
        .map(|r| {
            let params = params_for(method, psi, plan, repeat_seed(plan.seed, r));
            let scores = detect(method, data, &params)?.scores;
            Ok((auroc(&scores, labels)?, aupr(&scores, labels)?))
        })
        .collect::<Result<Vec<_>>>()?;
    aggregate_repeats(&runs)
}

/// Grid-searches ψ for every (dataset, method) cell, keeping the ψ with the
/// best mean AUROC (smallest ψ on ties), then ranks methods per dataset.
pub fn run_bench(plan: &BenchPlan) -> Result<BenchOutcome> {
    plan.validate()?;
    let methods: BTreeSet<Method> = plan.methods.iter().copied().collect();
    let mut rows = Vec::new();
    for ds in &plan.datasets {
        let usable: Vec<usize> = plan
            .psi_grid
            .iter()
            .copied()
            .filter(|&p| p <= ds.data.n())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if usable.is_empty() {
            return Err(Error::PsiExceedsN {
                psi: *plan.psi_grid.iter().min().expect("non-empty"),
                n: ds.data.n(),
            });
        }
        for &method in &methods {
            let mut best: Option<(usize, RepeatSummary)> = None;
            for &psi in &usable {
                let summary = evaluate(method, &ds.data, psi, plan)?;
                if best.is_none_or(|(_, b)| summary.auroc_mean > b.auroc_mean) {
                    best = Some((psi, summary));
                }
            }
            let (best_psi, summary) = best.expect("at least one psi");
            rows.push(BenchRow {
                dataset: ds.name.clone(),
                method,
                best_psi,
                summary,
            });
        }
    }

    let mean_ranks = if methods.len() >= 2 {
        let table: Vec<Vec<f64>> = rows
            .chunks(methods.len())
            .map(|chunk| chunk.iter().map(|r| r.summary.auroc_mean).collect())
            .collect();
        let ranks = friedman_mean_ranks(&table)?;
        Some(
            methods
                .iter()
                .zip(ranks)
                .map(|(m, r)| (m.name().to_string(), r))
                .collect(),
        )
    } else {
        None
    };
    Ok(BenchOutcome { rows, mean_ranks })
}

pub const RESULTS_HEADER: &str =
    "dataset,method,best_psi,auroc_mean,auroc_std,aupr_mean,aupr_std,n_repeats";

impl BenchOutcome {
    pub fn results_csv(&self) -> String {
        let mut out = format!("{RESULTS_HEADER}\n");
        for r in &self.rows {
            let s = &r.summary;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.dataset,
                r.method,
                r.best_psi,
                fmt_f64(s.auroc_mean),
                fmt_f64(s.auroc_std),
                fmt_f64(s.aupr_mean),
                fmt_f64(s.aupr_std),
                s.n_repeats
            ));
        }
        out
    }

    /// One [`EvalReport`] per dataset (without ranks).
    pub fn reports(&self) -> BTreeMap<String, EvalReport> {
        let mut reports: BTreeMap<String, EvalReport> = BTreeMap::new();
        for r in &self.rows {
            reports
                .entry(r.dataset.clone())
                .or_default()
                .per_method
                .insert(r.method.name().to_string(), r.summary);
        }
        reports
    }

    /// `{"datasets": {name: {method: {...}}}, "mean_ranks": {...}}`.
    pub fn report_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc {
            datasets: BTreeMap<String, EvalReport>,
            #[serde(skip_serializing_if = "Option::is_none")]
            mean_ranks: Option<BTreeMap<String, f64>>,
        }
        let doc = Doc {
            datasets: self.reports(),
            mean_ranks: self.mean_ranks.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}
