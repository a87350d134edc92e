//! Fit + score time as n and d grow, and model size as n grows.

use iser::harness::scalability::{gaussian_dataset, run_scalability, runtime_csv, ScalabilityPlan};
use iser::{Execution, IserConfig, Method, PartitionSet};

fn main() -> iser::Result<()> {
    let plan = ScalabilityPlan {
        methods: vec![Method::IserA, Method::Inne, Method::Idk],
        sizes: vec![1_000, 10_000, 50_000],
        dims: vec![2, 16],
        repeats: 3,
        psi: 16,
        t: 200,
        seed: 0,
        execution: Execution::Parallel,
    };
    print!("{}", runtime_csv(&run_scalability(&plan)?));

    for n in [1_000, 100_000] {
        let model = PartitionSet::fit(&gaussian_dataset(n, 8, 1)?, &IserConfig::new(16, 200, 1))?;
        println!("n = {n}: model heap bytes = {}", model.heap_bytes());
    }
    Ok(())
}
