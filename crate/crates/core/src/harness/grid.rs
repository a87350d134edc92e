//! Dense 2-D score grids for boundary maps.
//!
//! Grid points are ordered row by row from the lowest `y` to the highest,
//! with `x` increasing inside each row. The heatmap is a binary portable
//! graymap (`P5`): an ASCII header `P5\n<res> <res>\n255\n` followed by
//! `res * res` bytes, top image row first (highest `y`). Each byte is
//! `round(255 * (s - min) / (max - min))` over the grid's scores, so brighter
//! means more anomalous; a constant grid is filled with 128.

use crate::detector::Detector;
use crate::error::{Error, Result};
use crate::model::{Dataset, Execution};

use super::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub resolution: usize,
}

impl GridSpec {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), resolution: usize) -> Result<Self> {
        let spec = GridSpec {
            x_range,
            y_range,
            resolution,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Bounding box of a 2-D dataset widened by `margin` of its extent on
    /// each side.
    pub fn around(data: &Dataset, resolution: usize, margin: f64) -> Result<Self> {
        if data.d() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: data.d(),
            });
        }
        let range = |j: usize| {
            let (lo, hi) = data
                .column(j)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
            let pad = ((hi - lo) * margin).max(1e-9);
            (lo - pad, hi + pad)
        };
        Self::new(range(0), range(1), resolution)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok(self.x_range) || !ok(self.y_range) {
            return Err(Error::InvalidParameter(
                "grid ranges need finite min < max on both axes".into(),
            ));
        }
        if self.resolution < 2 {
            return Err(Error::InvalidParameter(
                "grid resolution must be at least 2".into(),
            ));
        }
        Ok(())
    }

    fn axis(range: (f64, f64), res: usize, k: usize) -> f64 {
        range.0 + (range.1 - range.0) * k as f64 / (res - 1) as f64
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        let res = self.resolution;
        (0..res)
            .flat_map(|j| {
                let y = Self::axis(self.y_range, res, j);
                (0..res).map(move |i| [Self::axis(self.x_range, res, i), y])
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub x: f64,
    pub y: f64,
    pub score: f64,
}

pub fn score_grid(
    detector: &Detector,
    spec: &GridSpec,
    execution: Execution,
) -> Result<Vec<GridCell>> {
    spec.validate()?;
    let points = spec.points();
    let scores = detector.score_points(&points, execution)?;
    Ok(points
        .iter()
        .zip(scores)
        .map(|(p, score)| GridCell {
            x: p[0],
            y: p[1],
            score,
        })
        .collect())
}

pub fn grid_csv(cells: &[GridCell]) -> String {
    let mut out = String::from("x,y,score\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(c.x),
            fmt_f64(c.y),
            fmt_f64(c.score)
        ));
    }
    out
}

/// Grayscale image of a `resolution x resolution` grid in [`GridSpec::points`] order.
pub fn heatmap_pgm(cells: &[GridCell], resolution: usize) -> Result<Vec<u8>> {
    if cells.len() != resolution * resolution {
        return Err(Error::InvalidParameter(format!(
            "{} cells do not form a {resolution}x{resolution} grid",
            cells.len()
        )));
    }
    let (lo, hi) = cells
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            (lo.min(c.score), hi.max(c.score))
        });
    let span = hi - lo;
    let mut out = format!("P5\n{resolution} {resolution}\n255\n").into_bytes();
    for row in (0..resolution).rev() {
        for c in &cells[row * resolution..(row + 1) * resolution] {
            let g = if span > 0.0 && span.is_finite() {
                (255.0 * (c.score - lo) / span).round() as u8
            } else {
                128
            };
            out.push(g);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::DetectorParams;
    use crate::scoring::Method;
    use crate::synth::{generate, SynthKind, SynthSpec};

    #[test]
    fn point_order_and_count() {
        let spec = GridSpec::new((0.0, 1.0), (10.0, 12.0), 3).unwrap();
        let pts = spec.points();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], [0.0, 10.0]);
        assert_eq!(pts[1], [0.5, 10.0]);
        assert_eq!(pts[3], [0.0, 11.0]);
        assert_eq!(pts[8], [1.0, 12.0]);
    }

    #[test]
    fn invalid_specs() {
        assert!(GridSpec::new((1.0, 1.0), (0.0, 1.0), 10).is_err());
        assert!(GridSpec::new((0.0, 1.0), (0.0, 1.0), 1).is_err());
        let d3 = Dataset::from_rows(&[[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]]).unwrap();
        assert!(GridSpec::around(&d3, 10, 0.1).is_err());
    }

    #[test]
    fn grid_matches_pointwise_scores() {
        let data = generate(&SynthSpec::new(SynthKind::TwoCluster, 200, 4)).unwrap();
        let det = Detector::fit(Method::IserA, &data, &DetectorParams::new(16, 50, 1)).unwrap();
        let spec = GridSpec::around(&data, 50, 0.1).unwrap();
        let cells = score_grid(&det, &spec, Execution::Parallel).unwrap();
        assert_eq!(cells.len(), 2500);
        for c in cells.iter().step_by(37) {
            assert_eq!(c.score, det.score(&[c.x, c.y]).unwrap());
        }
        let csv = grid_csv(&cells);
        assert_eq!(csv.lines().count(), 2501);
        let pgm = heatmap_pgm(&cells, 50).unwrap();
        let header = b"P5\n50 50\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        assert_eq!(pgm.len(), header.len() + 2500);
        assert!(pgm[header.len()..].contains(&0) && pgm[header.len()..].contains(&255));
    }

    #[test]
    fn constant_grid_is_mid_gray() {
        let cells: Vec<GridCell> = (0..4)
            .map(|i| GridCell {
                x: i as f64,
                y: 0.0,
                score: 0.3,
            })
            .collect();
        let pgm = heatmap_pgm(&cells, 2).unwrap();
        assert_eq!(&pgm[pgm.len() - 4..], &[128, 128, 128, 128]);
    }

    #[test]
    fn image_rows_run_top_down() {
        let cells: Vec<GridCell> = [0.0, 0.0, 1.0, 1.0]
            .iter()
            .enumerate()
            .map(|(i, &s)| GridCell {
                x: (i % 2) as f64,
                y: (i / 2) as f64,
                score: s,
            })
            .collect();
        let pgm = heatmap_pgm(&cells, 2).unwrap();
        assert_eq!(&pgm[pgm.len() - 4..], &[255, 255, 0, 0]);
    }
}
