//! One 1-D partitioning with centers {0, 2, 10, 15}: how the same
//! hyperspheres feed ISER, iNNE and IDK.

use iser::baselines::{IdkModel, InneModel};
use iser::scoring::phi;
use iser::{Dataset, Execution, PartitionSet, Partitioning};

fn main() -> iser::Result<()> {
    let partition = Partitioning::from_centers(&[[0.0], [2.0], [10.0], [15.0]])?;
    println!("radii: {:?}", partition.radii());

    let x1 = [2.5];
    let x2 = [11.0];
    println!("phi(x1) = {}", phi(&partition, &x1)?);
    println!("phi(x2) = {}", phi(&partition, &x2)?);

    let set = PartitionSet::from_partitions(vec![partition])?;
    let inne = InneModel::new(set.clone());
    println!(
        "iNNE values: x1 {:?}, x2 {:?}",
        inne.partition_values(&x1)?,
        inne.partition_values(&x2)?
    );

    // 5 / 3 / 3 / 2 points per sphere, plus one point nobody covers.
    let pts = [
        -1.5, -0.5, 0.0, 0.4, 0.9, 1.8, 2.5, 3.5, 8.0, 10.0, 12.0, 15.0, 17.0, 30.0,
    ];
    let rows: Vec<[f64; 1]> = pts.iter().map(|&v| [v]).collect();
    let data = Dataset::from_rows(&rows)?;
    let idk = IdkModel::fit(set, &data, Execution::Sequential)?;
    println!("kernel mean embedding: {:?}", idk.kme());
    println!(
        "IDK scores: x1 {:.4}, x2 {:.4}",
        idk.score(&x1)?,
        idk.score(&x2)?
    );
    println!("IDK ranks the two points the same; ISER separates them by radius.");
    Ok(())
}
