//! Isolation forest grown on the spherical representation vs. on raw
//! coordinates, across a few seeds.

use iser::metrics::auroc;
use iser::synth::{generate, SynthKind, SynthSpec};
use iser::{detect, DetectorParams, Method};

fn main() -> iser::Result<()> {
    for kind in [SynthKind::TwoCluster, SynthKind::SpiralDemo] {
        println!("{kind}");
        for seed in 0..5 {
            let data = generate(&SynthSpec::new(kind, 500, seed))?;
            let labels = data.labels().expect("labeled");
            let params = DetectorParams::new(16, 200, seed);
            let a = auroc(&detect(Method::IserIf, &data, &params)?.scores, labels)?;
            let b = auroc(&detect(Method::IForest, &data, &params)?.scores, labels)?;
            println!("  seed {seed}: iser-if {a:.4}  iforest {b:.4}");
        }
    }
    Ok(())
}
