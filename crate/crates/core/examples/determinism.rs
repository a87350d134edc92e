//! Same seed, same scores: sequential and parallel execution agree bit for bit.

use iser::synth::{generate, SynthKind, SynthSpec};
use iser::{detect, DetectorParams, Execution, Method};

fn main() -> iser::Result<()> {
    let data = generate(&SynthSpec::new(SynthKind::LocalSpiral, 600, 8))?;
    for method in Method::ALL {
        let seq = detect(
            method,
            &data,
            &DetectorParams::new(32, 150, 5).with_execution(Execution::Sequential),
        )?;
        let par = detect(
            method,
            &data,
            &DetectorParams::new(32, 150, 5).with_execution(Execution::Parallel),
        )?;
        let same = seq
            .scores
            .iter()
            .zip(&par.scores)
            .all(|(a, b)| a.to_bits() == b.to_bits());
        println!("{method:<8} identical: {same}");
        assert!(same);
    }
    Ok(())
}
