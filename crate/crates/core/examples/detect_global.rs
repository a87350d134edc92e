//! Every detector on scattered global anomalies around a Gaussian blob.

use iser::metrics::{aupr, auroc};
use iser::synth::{generate, SynthKind, SynthSpec};
use iser::{detect, DetectorParams, Method};

fn main() -> iser::Result<()> {
    let data = generate(&SynthSpec::new(SynthKind::Global, 500, 3).with_anomalies(25))?;
    let labels = data.labels().expect("synthetic data is labeled");
    let params = DetectorParams::new(16, 200, 11);

    println!("{:<8} {:>7} {:>7}", "method", "auroc", "aupr");
    for method in Method::ALL {
        let scores = detect(method, &data, &params)?;
        println!(
            "{:<8} {:>7.4} {:>7.4}",
            method,
            auroc(&scores.scores, labels)?,
            aupr(&scores.scores, labels)?
        );
    }
    Ok(())
}
