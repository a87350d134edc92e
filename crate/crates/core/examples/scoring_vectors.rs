//! Average vs. cosine scoring on two hand-written representations.

use iser::{score_avg, score_sim, EnsembleVector};

fn main() {
    let vectors = [
        ("mostly sparse, one dense", vec![0.9, 0.9, 0.8, 0.9, 0.1]),
        ("uniformly dense", vec![0.2, 0.3, 0.3, 0.2, 0.3]),
        ("all uncovered", vec![1.0; 5]),
        ("deep in clusters", vec![-3.0, -1.0, -2.0, -4.0, -1.5]),
    ];
    println!("{:<26} {:>8} {:>8}", "representation", "avg", "sim");
    for (name, v) in vectors {
        let rep = EnsembleVector(v);
        println!(
            "{name:<26} {:>8.4} {:>8.4}",
            score_avg(&rep),
            score_sim(&rep)
        );
    }
}
