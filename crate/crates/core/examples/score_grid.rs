//! Scores a mesh around the two-cluster data and writes a CSV plus a
//! grayscale heatmap per method.

use iser::harness::grid::{grid_csv, heatmap_pgm, score_grid, GridSpec};
use iser::model::write_file;
use iser::synth::{generate, SynthKind, SynthSpec};
use iser::{Detector, DetectorParams, Execution, Method};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("iser-grid-example");
    std::fs::create_dir_all(&dir)?;

    let data = generate(&SynthSpec::new(SynthKind::TwoCluster, 500, 2))?;
    let spec = GridSpec::around(&data, 120, 0.15)?;
    for method in [Method::IserS, Method::Inne, Method::Idk, Method::IForest] {
        let detector = Detector::fit(method, &data, &DetectorParams::new(16, 200, 4))?;
        let cells = score_grid(&detector, &spec, Execution::Parallel)?;
        let csv = dir.join(format!("{method}.csv"));
        let pgm = dir.join(format!("{method}.pgm"));
        write_file(&csv, grid_csv(&cells).as_bytes())?;
        write_file(&pgm, &heatmap_pgm(&cells, spec.resolution)?)?;
        println!("{method}: {} and {}", csv.display(), pgm.display());
    }
    Ok(())
}
