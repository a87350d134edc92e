//! CSV ingestion, min-max normalization, and saving / reloading a fitted
//! partition set.

use iser::synth::{generate, SynthKind, SynthSpec};
use iser::{ingest_csv, score_avg, transform, write_csv, IserConfig, PartitionSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("iser-csv-example");
    std::fs::create_dir_all(&dir)?;
    let csv_path = dir.join("dependency.csv");
    let model_path = dir.join("model.json");

    let data = generate(&SynthSpec::new(SynthKind::Dependency, 400, 5))?;
    write_csv(&data, &csv_path)?;
    let loaded = ingest_csv(&csv_path, Some("label"))?;
    assert_eq!(loaded, data);
    println!(
        "read {} rows x {} features from {}",
        loaded.n(),
        loaded.d(),
        csv_path.display()
    );

    let config = IserConfig::new(32, 100, 9).with_normalize(true);
    let model = PartitionSet::fit(&loaded, &config)?;
    model.save(&model_path)?;
    let reloaded = PartitionSet::load(&model_path)?;

    let x = loaded.row(loaded.n() - 1);
    let before = score_avg(&transform(&model, x)?);
    let after = score_avg(&transform(&reloaded, x)?);
    println!("score of last row: {before} (fitted) / {after} (reloaded)");
    println!("model occupies {} bytes of heap", reloaded.heap_bytes());
    Ok(())
}
