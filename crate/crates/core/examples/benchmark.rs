//! ψ grid search with repeats over the synthetic families, plus mean ranks.

use iser::harness::{run_bench, BenchDataset, BenchPlan};
use iser::synth::{generate, SynthKind, SynthSpec};
use iser::Method;

fn main() -> iser::Result<()> {
    let datasets = [
        SynthKind::Global,
        SynthKind::LocalSpiral,
        SynthKind::Dependency,
    ]
    .into_iter()
    .map(|kind| {
        Ok(BenchDataset {
            name: kind.to_string(),
            data: generate(&SynthSpec::new(kind, 400, 1))?,
        })
    })
    .collect::<iser::Result<Vec<_>>>()?;

    let mut plan = BenchPlan::new(
        vec![Method::IserA, Method::IserS, Method::Inne, Method::Idk],
        datasets,
    );
    plan.repeats = 3;
    plan.psi_grid = vec![8, 32, 128];
    plan.t = 100;

    let outcome = run_bench(&plan)?;
    print!("{}", outcome.results_csv());
    println!("{}", outcome.report_json()?);
    Ok(())
}
