//! Point-pattern CSV files.
//!
//! Files are UTF-8, comma separated, with a mandatory header naming `x` and
//! `y` columns (other columns are ignored). Lines starting with `#` are
//! comments; a comment of the form `# window z=<width> omega=<height>`
//! records the observation window of a pattern written by this crate.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use substat_core::{Point, PointPattern, Window};

use crate::error::{Error, Result};

/// Study rectangle in source units. Points inside it are shifted so the
/// rectangle becomes the window `[0, x_max - x_min] x [0, y_max - y_min]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl RegionSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || x_min >= x_max || y_min >= y_max {
            return Err(Error::Usage(format!(
                "region needs x_min < x_max and y_min < y_max, got [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Self { x_min, x_max, y_min, y_max })
    }

    /// The region `[0, z] x [0, omega]` of an existing window.
    pub fn of_window(w: &Window) -> Self {
        Self { x_min: 0.0, x_max: w.z(), y_min: 0.0, y_max: w.omega() }
    }

    pub fn window(&self) -> Result<Window> {
        Ok(Window::new(self.x_max - self.x_min, self.y_max - self.y_min)?)
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }
}

impl std::str::FromStr for RegionSpec {
    type Err = Error;

    /// `x_min,x_max,y_min,y_max`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Usage(format!("region {s:?}: {e}")))?;
        match parts[..] {
            [a, b, c, d] => Self::new(a, b, c, d),
            _ => Err(Error::Usage(format!("region {s:?} needs four numbers x_min,x_max,y_min,y_max"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub pattern: PointPattern,
    /// Rows outside the region.
    pub dropped: usize,
    /// `# key=value` comment metadata found before the header.
    pub metadata: BTreeMap<String, String>,
}

/// Parses `# key=value ...` comment lines into a map. `# window z=.. omega=..`
/// yields keys `z` and `omega`.
fn comment_metadata(text: &str) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let Some(rest) = line.trim_start().strip_prefix('#') else {
            if line.trim().is_empty() {
                continue;
            }
            break;
        };
        for token in rest.split_whitespace() {
            if let Some((k, v)) = token.split_once('=') {
                out.insert(k.to_string(), v.to_string());
            }
        }
    }
    out
}

fn parse_rows(text: &str) -> Result<Vec<(u64, f64, f64)>> {
    // the csv reader does not count skipped comment lines, so map record
    // indices back to physical lines
    let physical: Vec<u64> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, _)| i as u64 + 1)
        .collect();
    let line_of = |record: u64| physical.get(record as usize).copied().unwrap_or(0);
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::parse(line_of(0), e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(xi), Some(yi)) = (col("x"), col("y")) else {
        return Err(Error::parse(
            line_of(0),
            format!("header must name x and y columns, got {:?}", headers.iter().collect::<Vec<_>>()),
        ));
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(e.position().map_or(0, |p| line_of(p.record())), e.to_string()))?;
        let line = rec.position().map_or(0, |p| line_of(p.record()));
        let num = |i: usize, name: &str| -> Result<f64> {
            let raw = rec.get(i).ok_or_else(|| Error::parse(line, format!("missing {name}")))?;
            let v: f64 = raw.parse().map_err(|_| Error::parse(line, format!("{name} is not a number: {raw:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(line, format!("{name} is not finite: {raw:?}")))
            }
        };
        rows.push((line, num(xi, "x")?, num(yi, "y")?));
    }
    Ok(rows)
}

/// Keeps rows inside `region` and shifts them into its canonical window.
pub fn ingest_str(text: &str, region: &RegionSpec) -> Result<Ingested> {
    let window = region.window()?;
    let rows = parse_rows(text)?;
    let mut points = Vec::with_capacity(rows.len());
    let mut dropped = 0;
    for (_, x, y) in rows {
        if region.contains(x, y) {
            points.push(Point::new(x - region.x_min, y - region.y_min));
        } else {
            dropped += 1;
        }
    }
    Ok(Ingested { pattern: PointPattern::new(window, points)?, dropped, metadata: comment_metadata(text) })
}

pub fn ingest_csv(path: impl AsRef<Path>, region: &RegionSpec) -> Result<Ingested> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ingest_str(&text, region)
}

/// Reads a pattern whose window comes from its `# window` comment, or from
/// `region` when given.
pub fn read_pattern_str(text: &str, region: Option<&RegionSpec>) -> Result<Ingested> {
    if let Some(r) = region {
        return ingest_str(text, r);
    }
    let meta = comment_metadata(text);
    let get = |k: &str| meta.get(k).and_then(|v| v.parse::<f64>().ok());
    let (Some(z), Some(omega)) = (get("z"), get("omega")) else {
        return Err(Error::Usage(
            "input has no '# window z=<width> omega=<height>' line; pass --region".into(),
        ));
    };
    let window = Window::new(z, omega)?;
    let rows = parse_rows(text)?;
    let mut points = Vec::with_capacity(rows.len());
    for (line, x, y) in rows {
        let p = Point::new(x, y);
        if !window.contains(p) {
            return Err(Error::parse(line, format!("point ({x}, {y}) outside window [0, {z}] x [0, {omega}]")));
        }
        points.push(p);
    }
    Ok(Ingested { pattern: PointPattern::new(window, points)?, dropped: 0, metadata: meta })
}

pub fn read_pattern(path: impl AsRef<Path>, region: Option<&RegionSpec>) -> Result<Ingested> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_pattern_str(&text, region)
}

/// Writes `# window` and `# key=value` comment lines, the header and one
/// row per point. Coordinates use the shortest decimal that round-trips.
pub fn write_pattern<W: Write>(out: W, pattern: &PointPattern, metadata: &[(&str, String)]) -> std::io::Result<()> {
    let mut out = out;
    let w = pattern.window();
    writeln!(out, "# window z={} omega={}", w.z(), w.omega())?;
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}")?;
    }
    let mut wtr = csv::WriterBuilder::new().from_writer(out);
    wtr.write_record(["x", "y"])?;
    for p in pattern.points() {
        wtr.write_record([p.x.to_string(), p.y.to_string()])?;
    }
    wtr.flush()
}
