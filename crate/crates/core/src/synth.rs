//! Seeded 2-D generators for global, local and dependency anomalies and for
//! the two-cluster / spiral boundary demos.
//!
//! Normal points come first in the output, followed by the anomalies
//! (label 1).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, RngStream};

pub const DEFAULT_NOISE: f64 = 0.1;

pub const GLOBAL_ANNULUS: (f64, f64) = (4.0, 8.0);
pub const SPIRAL_OFFSET: f64 = 0.5;
pub const SPIRAL_GROWTH: f64 = 0.4;
pub const SPIRAL_TURNS: f64 = 3.0;
/// Local anomalies sit this many noise units off the curve.
pub const LOCAL_DISPLACEMENT: (f64, f64) = (3.0, 6.0);
pub const DEPENDENCY_SPREAD: f64 = 3.0;
pub const CLUSTER_CENTERS: [(f64, f64); 2] = [(-3.0, 0.0), (3.0, 0.0)];
pub const CLUSTER_SIGMA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SynthKind {
    Global,
    LocalSpiral,
    Dependency,
    TwoCluster,
    SpiralDemo,
}

impl SynthKind {
    pub const ALL: [SynthKind; 5] = [
        SynthKind::Global,
        SynthKind::LocalSpiral,
        SynthKind::Dependency,
        SynthKind::TwoCluster,
        SynthKind::SpiralDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SynthKind::Global => "global",
            SynthKind::LocalSpiral => "local-spiral",
            SynthKind::Dependency => "dependency",
            SynthKind::TwoCluster => "two-cluster",
            SynthKind::SpiralDemo => "spiral-demo",
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        SynthKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown dataset kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub n_normal: usize,
    pub n_anomaly: usize,
    pub seed: u64,
    /// Gaussian noise scale for the spiral and dependency generators.
    pub noise: f64,
}

impl SynthSpec {
    /// Settings with the default 5% contamination and noise.
    pub fn new(kind: SynthKind, n_normal: usize, seed: u64) -> Self {
        SynthSpec {
            kind,
            n_normal,
            n_anomaly: default_anomalies(n_normal),
            seed,
            noise: DEFAULT_NOISE,
        }
    }

    pub fn with_anomalies(mut self, n_anomaly: usize) -> Self {
        self.n_anomaly = n_anomaly;
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }
}

pub fn default_anomalies(n_normal: usize) -> usize {
    n_normal / 20
}

fn spiral_point(theta: f64) -> (f64, f64) {
    let r = SPIRAL_OFFSET + SPIRAL_GROWTH * theta;
    (r * theta.cos(), r * theta.sin())
}

/// Unit normal to the spiral at `theta`.
fn spiral_normal(theta: f64) -> (f64, f64) {
    let r = SPIRAL_OFFSET + SPIRAL_GROWTH * theta;
    let tx = SPIRAL_GROWTH * theta.cos() - r * theta.sin();
    let ty = SPIRAL_GROWTH * theta.sin() + r * theta.cos();
    let len = tx.hypot(ty);
    (ty / len, -tx / len)
}

fn bounding_box(points: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    points.iter().fold(
        ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
        |(lo, hi), p| {
            (
                [lo[0].min(p[0]), lo[1].min(p[1])],
                [hi[0].max(p[0]), hi[1].max(p[1])],
            )
        },
    )
}

fn uniform_in_box<R: Rng>(rng: &mut R, lo: [f64; 2], hi: [f64; 2]) -> [f64; 2] {
    [
        rng.random_range(lo[0]..=hi[0]),
        rng.random_range(lo[1]..=hi[1]),
    ]
}

fn spiral_normals<R: Rng>(rng: &mut R, n: usize, noise: &Normal<f64>) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| {
            let theta = rng.random_range(0.0..=2.0 * PI * SPIRAL_TURNS);
            let (x, y) = spiral_point(theta);
            [x + noise.sample(rng), y + noise.sample(rng)]
        })
        .collect()
}

/// Generates the dataset described by `spec` with labels populated.
pub fn generate(spec: &SynthSpec) -> Result<Dataset> {
    if spec.n_normal == 0 {
        return Err(Error::InvalidParameter(
            "n_normal must be at least 1".into(),
        ));
    }
    if !(spec.noise > 0.0 && spec.noise.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise must be positive, got {}",
            spec.noise
        )));
    }
    let mut rng = RngStream::new(spec.seed, 0).rng();
    let noise = Normal::new(0.0, spec.noise).expect("noise validated");
    let (n, m) = (spec.n_normal, spec.n_anomaly);

    let (normals, anomalies): (Vec<[f64; 2]>, Vec<[f64; 2]>) = match spec.kind {
        SynthKind::Global => {
            let normals = (0..n)
                .map(|_| [rng.sample(StandardNormal), rng.sample(StandardNormal)])
                .collect();
            let (r_in, r_out) = GLOBAL_ANNULUS;
            let anomalies = (0..m)
                .map(|_| {
                    // Uniform over the annulus area.
                    let u: f64 = rng.random();
                    let r = (r_in * r_in + u * (r_out * r_out - r_in * r_in)).sqrt();
                    let a = rng.random_range(0.0..2.0 * PI);
                    [r * a.cos(), r * a.sin()]
                })
                .collect();
            (normals, anomalies)
        }
        SynthKind::LocalSpiral => {
            let normals = spiral_normals(&mut rng, n, &noise);
            let (lo, hi) = LOCAL_DISPLACEMENT;
            let anomalies = (0..m)
                .map(|_| {
                    let theta = rng.random_range(0.0..=2.0 * PI * SPIRAL_TURNS);
                    let (x, y) = spiral_point(theta);
                    let (nx, ny) = spiral_normal(theta);
                    let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    let off = side * rng.random_range(lo..=hi) * spec.noise;
                    [x + off * nx, y + off * ny]
                })
                .collect();
            (normals, anomalies)
        }
        SynthKind::Dependency => {
            let s2 = std::f64::consts::FRAC_1_SQRT_2;
            let along = |rng: &mut rand_chacha::ChaCha8Rng, dir: (f64, f64)| {
                let s = rng.random_range(-DEPENDENCY_SPREAD..=DEPENDENCY_SPREAD);
                let e = noise.sample(rng);
                // Perpendicular to `dir`.
                let perp = (-dir.1, dir.0);
                [s * dir.0 + e * perp.0, s * dir.1 + e * perp.1]
            };
            let normals = (0..n).map(|_| along(&mut rng, (s2, s2))).collect();
            let anomalies = (0..m).map(|_| along(&mut rng, (s2, -s2))).collect();
            (normals, anomalies)
        }
        SynthKind::TwoCluster => {
            let cluster = Normal::new(0.0, CLUSTER_SIGMA).expect("constant sigma");
            let normals: Vec<[f64; 2]> = (0..n)
                .map(|i| {
                    let (cx, cy) = CLUSTER_CENTERS[i % 2];
                    [cx + cluster.sample(&mut rng), cy + cluster.sample(&mut rng)]
                })
                .collect();
            let (lo, hi) = bounding_box(&normals);
            let anomalies = (0..m).map(|_| uniform_in_box(&mut rng, lo, hi)).collect();
            (normals, anomalies)
        }
        SynthKind::SpiralDemo => {
            let normals = spiral_normals(&mut rng, n, &noise);
            let (lo, hi) = bounding_box(&normals);
            let anomalies = (0..m).map(|_| uniform_in_box(&mut rng, lo, hi)).collect();
            (normals, anomalies)
        }
    };

    let mut rows = normals;
    rows.extend(anomalies);
    let labels = (0..n + m).map(|i| (i >= n) as u8).collect();
    Dataset::from_rows(&rows)?
        .with_feature_names(vec!["x".into(), "y".into()])?
        .with_labels(labels)
}
