//! Intensity estimates evaluated on regular grids, written as CSV with an
//! optional SVG rendering.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use substat_core::{IntensityEstimator, Point, Subspace};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum GridCoordinates {
    /// Offsets along the orthogonal coordinate.
    Line(Vec<f64>),
    /// Cell centres, `x` varying slowest.
    Plane(Vec<Point>),
}

impl GridCoordinates {
    pub fn len(&self) -> usize {
        match self {
            Self::Line(v) => v.len(),
            Self::Plane(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMetadata {
    pub estimator: &'static str,
    /// Direction of the orthogonal coordinate for line grids.
    pub theta: Option<Subspace>,
    pub h: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridExport {
    pub coordinates: GridCoordinates,
    pub values: Vec<f64>,
    pub metadata: GridMetadata,
}

fn midpoints(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / n as f64;
    (0..n).map(move |k| lo + (k as f64 + 0.5) * step)
}

/// Evaluates `est` at cell midpoints: `resolution` offsets across the
/// orthogonal range for the substationary and stationary estimators (the
/// latter along the horizontal direction), `resolution^2` cell centres for
/// the planar one.
pub fn intensity_grid(est: &IntensityEstimator, resolution: usize, seed: Option<u64>) -> Result<GridExport> {
    if resolution < 2 {
        return Err(Error::Usage(format!("grid resolution must be >= 2, got {resolution}")));
    }
    let w = *est.window();
    Ok(match est {
        IntensityEstimator::Substationary(e) => {
            let (lo, hi) = e.range();
            let vs: Vec<f64> = midpoints(lo, hi, resolution).collect();
            let values = vs.iter().map(|&v| e.eval(v)).collect::<std::result::Result<_, _>>()?;
            GridExport {
                coordinates: GridCoordinates::Line(vs),
                values,
                metadata: GridMetadata {
                    estimator: est.kind_name(),
                    theta: Some(e.theta()),
                    h: Some(e.bandwidth().get()),
                    seed,
                },
            }
        }
        IntensityEstimator::Stationary(e) => {
            let vs: Vec<f64> = midpoints(0.0, w.omega(), resolution).collect();
            GridExport {
                values: vec![e.value(); vs.len()],
                coordinates: GridCoordinates::Line(vs),
                metadata: GridMetadata {
                    estimator: est.kind_name(),
                    theta: Some(Subspace::HORIZONTAL),
                    h: None,
                    seed,
                },
            }
        }
        IntensityEstimator::Kernel2d(e) => {
            let mut pts = Vec::with_capacity(resolution * resolution);
            for x in midpoints(0.0, w.z(), resolution) {
                for y in midpoints(0.0, w.omega(), resolution) {
                    pts.push(Point::new(x, y));
                }
            }
            let values = pts.iter().map(|&p| e.eval(p)).collect::<std::result::Result<_, _>>()?;
            GridExport {
                coordinates: GridCoordinates::Plane(pts),
                values,
                metadata: GridMetadata { estimator: est.kind_name(), theta: None, h: Some(e.bandwidth().get()), seed },
            }
        }
    })
}

pub fn write_grid<W: Write>(out: W, grid: &GridExport) -> std::io::Result<()> {
    let mut out = out;
    let m = &grid.metadata;
    writeln!(out, "# estimator={}", m.estimator)?;
    if let Some(t) = m.theta {
        writeln!(out, "# theta_rad={} theta_deg={}", t.theta(), t.degrees())?;
    }
    if let Some(h) = m.h {
        writeln!(out, "# h={h}")?;
    }
    if let Some(s) = m.seed {
        writeln!(out, "# seed={s}")?;
    }
    let mut wtr = csv::Writer::from_writer(out);
    match &grid.coordinates {
        GridCoordinates::Line(vs) => {
            wtr.write_record(["v", "lambda_hat"])?;
            for (v, l) in vs.iter().zip(&grid.values) {
                wtr.write_record([v.to_string(), l.to_string()])?;
            }
        }
        GridCoordinates::Plane(ps) => {
            wtr.write_record(["x", "y", "lambda_hat"])?;
            for (p, l) in ps.iter().zip(&grid.values) {
                wtr.write_record([p.x.to_string(), p.y.to_string(), l.to_string()])?;
            }
        }
    }
    wtr.flush()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Evaluates `est` on a grid and writes it to `path`.
pub fn export_intensity_grid(
    est: &IntensityEstimator,
    resolution: usize,
    path: impl AsRef<Path>,
    seed: Option<u64>,
) -> Result<GridExport> {
    let path = path.as_ref();
    let grid = intensity_grid(est, resolution, seed)?;
    write_grid(create(path)?, &grid).map_err(|e| Error::io(path, e))?;
    Ok(grid)
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 400.0;
const MARGIN: f64 = 40.0;

/// Line plot for line grids, grey-scale heat map for planar ones.
pub fn write_svg<W: Write>(out: W, grid: &GridExport) -> std::io::Result<()> {
    let mut out = out;
    let top = grid.values.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">"#)?;
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    let (pw, ph) = (SVG_W - 2.0 * MARGIN, SVG_H - 2.0 * MARGIN);
    match &grid.coordinates {
        GridCoordinates::Line(vs) => {
            let (lo, hi) = (vs[0], vs[vs.len() - 1]);
            let span = (hi - lo).max(f64::MIN_POSITIVE);
            let pts: Vec<String> = vs
                .iter()
                .zip(&grid.values)
                .map(|(v, l)| format!("{:.2},{:.2}", MARGIN + pw * (v - lo) / span, MARGIN + ph * (1.0 - l / top)))
                .collect();
            writeln!(
                out,
                r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
            )?;
            writeln!(out, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, pts.join(" "))?;
            writeln!(out, r#"<text x="{MARGIN}" y="{:.0}" font-size="12">max {top:.4}</text>"#, MARGIN - 8.0)?;
        }
        GridCoordinates::Plane(ps) => {
            let n = (ps.len() as f64).sqrt().round() as usize;
            let (cw, ch) = (pw / n as f64, ph / n as f64);
            for (k, l) in grid.values.iter().enumerate() {
                let (i, j) = (k / n, k % n);
                let shade = (255.0 * (1.0 - l / top)).round() as u8;
                writeln!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({shade},{shade},{shade})"/>"#,
                    MARGIN + i as f64 * cw,
                    MARGIN + ph - (j + 1) as f64 * ch,
                    cw + 0.01,
                    ch + 0.01
                )?;
            }
        }
    }
    writeln!(out, "</svg>")
}

pub fn export_svg(grid: &GridExport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_svg(create(path)?, grid).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use substat_core::{Bandwidth, PointPattern, Window};

    fn pattern() -> PointPattern {
        let w = Window::new(2.0, 1.0).unwrap();
        let pts = (0..30).map(|i| Point::new(2.0 * (i as f64 + 0.5) / 30.0, ((i * 11) % 30) as f64 / 30.0)).collect();
        PointPattern::new(w, pts).unwrap()
    }

    #[test]
    fn stationary_grid_is_constant() {
        let g = intensity_grid(&IntensityEstimator::stationary(&pattern()), 4, None).unwrap();
        assert_eq!(g.values, vec![15.0; 4]);
    }

    #[test]
    fn horizontal_grid_spans_height() {
        let est = IntensityEstimator::substationary(&pattern(), Subspace::HORIZONTAL, Bandwidth::new(0.1).unwrap());
        let g = intensity_grid(&est, 10, Some(3)).unwrap();
        let GridCoordinates::Line(vs) = &g.coordinates else { panic!() };
        assert!(vs[0] > 0.0 && vs[9] < 1.0);
        assert!((vs[0] - 0.05).abs() < 1e-12 && (vs[9] - 0.95).abs() < 1e-12);
    }

    #[test]
    fn grid_values_are_direct_evaluations() {
        let pat = pattern();
        let h = Bandwidth::new(0.15).unwrap();
        let est = IntensityEstimator::kernel_2d(&pat, h);
        let g = intensity_grid(&est, 5, None).unwrap();
        let GridCoordinates::Plane(ps) = &g.coordinates else { panic!() };
        for (p, v) in ps.iter().zip(&g.values) {
            assert_eq!(*v, substat_core::intensity_2d(&pat, h, *p).unwrap());
        }
        let th = Subspace::from_degrees(25.0);
        let g = intensity_grid(&IntensityEstimator::substationary(&pat, th, h), 7, None).unwrap();
        let GridCoordinates::Line(vs) = &g.coordinates else { panic!() };
        for (v, l) in vs.iter().zip(&g.values) {
            assert_eq!(*l, substat_core::intensity_substat(&pat, th, h, *v).unwrap());
        }
    }

    #[test]
    fn csv_layout() {
        let est = IntensityEstimator::kernel_2d(&pattern(), Bandwidth::new(0.2).unwrap());
        let g = intensity_grid(&est, 2, Some(9)).unwrap();
        let mut buf = Vec::new();
        write_grid(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# estimator=kernel_2d");
        assert_eq!(lines[1], "# h=0.2");
        assert_eq!(lines[2], "# seed=9");
        assert_eq!(lines[3], "x,y,lambda_hat");
        assert_eq!(lines.len(), 8);
        assert!(intensity_grid(&est, 1, None).is_err());

        let mut svg = Vec::new();
        write_svg(&mut svg, &g).unwrap();
        assert!(String::from_utf8(svg).unwrap().ends_with("</svg>\n"));
    }
}
