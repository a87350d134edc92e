use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};

use crate::detector::{detect, DetectorParams};
use crate::error::{Error, Result};
use crate::model::{Dataset, Execution, RngStream};
use crate::scoring::Method;

#[derive(Debug, Clone)]
pub struct ScalabilityPlan {
    pub methods: Vec<Method>,
    pub sizes: Vec<usize>,
    pub dims: Vec<usize>,
    pub repeats: usize,
    pub psi: usize,
    pub t: usize,
    pub seed: u64,
    pub execution: Execution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuntimeRow {
    pub n: usize,
    pub d: usize,
    pub method: Method,
    pub median_seconds: f64,
}

/// Standard normal `n x d` data.
pub fn gaussian_dataset(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    let mut rng = RngStream::new(seed, 0).rng();
    let values = (0..n * d)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    Dataset::new(values, n, d)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Wall-clock seconds for one fit + score of every row.
pub fn time_fit_score(method: Method, data: &Dataset, params: &DetectorParams) -> Result<f64> {
    let start = Instant::now();
    let scores = detect(method, data, params)?;
    let elapsed = start.elapsed().as_secs_f64();
    debug_assert_eq!(scores.len(), data.n());
    Ok(elapsed)
}

/// Median fit + score time for every (n, d, method) cell.
pub fn run_scalability(plan: &ScalabilityPlan) -> Result<Vec<RuntimeRow>> {
    if plan.sizes.iter().chain(&plan.dims).any(|&v| v == 0) || plan.repeats == 0 {
        return Err(Error::InvalidParameter(
            "sizes, dims and repeats must be positive".into(),
        ));
    }
    let mut rows = Vec::new();
    for &n in &plan.sizes {
        for &d in &plan.dims {
            let data = gaussian_dataset(n, d, plan.seed)?;
            for &method in &plan.methods {
                let params =
                    DetectorParams::new(plan.psi, plan.t, plan.seed).with_execution(plan.execution);
                let times = (0..plan.repeats)
                    .map(|_| time_fit_score(method, &data, &params))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(RuntimeRow {
                    n,
                    d,
                    method,
                    median_seconds: median(times),
                });
            }
        }
    }
    Ok(rows)
}

pub fn runtime_csv(rows: &[RuntimeRow]) -> String {
    let mut out = String::from("n,d,method,median_seconds\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.n, r.d, r.method, r.median_seconds
        ));
    }
    out
}
