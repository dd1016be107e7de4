//! Homography, point cloud, appearance, egomotion, scenario and
//! configuration files.

use std::fmt::Write as _;
use std::path::Path;

use bevtrack_core::geometry::{BevPoint, EgomotionTrack, Homography, LinearizedHomography, PixelPoint, Point3};
use bevtrack_core::sim::Scenario;
use bevtrack_core::{Frame, RunConfig};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{decimal, read_text, write_text, FileError, FileResult};

/// Contents of a homography file:
///
/// ```text
/// H
/// h11 h12 h13
/// h21 h22 h23
/// h31 h32 h33
/// max_spacing 0.2
/// image 1920 1080
/// ```
///
/// The matrix maps pixels to BEV meters and is stored with `h33 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomographyFile {
    pub homography: Homography,
    pub max_spacing: f64,
    pub image_width: u32,
    pub image_height: u32,
}

impl HomographyFile {
    pub fn linearized(&self) -> FileResult<LinearizedHomography> {
        Ok(LinearizedHomography::new(self.homography, self.image_width, self.image_height, self.max_spacing)?)
    }
}

pub fn format_homography(h: &HomographyFile) -> String {
    let mut s = String::from("H\n");
    for row in h.homography.matrix() {
        let _ = writeln!(s, "{} {} {}", decimal(row[0]), decimal(row[1]), decimal(row[2]));
    }
    let _ = writeln!(s, "max_spacing {}", decimal(h.max_spacing));
    let _ = writeln!(s, "image {} {}", h.image_width, h.image_height);
    s
}

pub fn parse_homography(path: &Path, text: &str) -> FileResult<HomographyFile> {
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    if lines.len() < 6 {
        return Err(FileError::parse(path, lines.len() + 1, "homography file needs 6 lines"));
    }
    if lines[0] != "H" {
        return Err(FileError::parse(path, 1, "first line must be \"H\""));
    }
    let mut m = [[0.0; 3]; 3];
    for (r, row) in m.iter_mut().enumerate() {
        let values = numbers::<f64>(path, r + 2, lines[r + 1])?;
        if values.len() != 3 {
            return Err(FileError::parse(path, r + 2, "matrix rows need 3 values"));
        }
        row.copy_from_slice(&values);
    }
    let keyed = |line: usize, key: &str, n: usize| -> FileResult<Vec<&str>> {
        let mut it = lines[line - 1].split_whitespace();
        if it.next() != Some(key) {
            return Err(FileError::parse(path, line, format!("expected \"{key}\"")));
        }
        let rest: Vec<&str> = it.collect();
        if rest.len() != n {
            return Err(FileError::parse(path, line, format!("\"{key}\" takes {n} value(s)")));
        }
        Ok(rest)
    };
    let spacing = keyed(5, "max_spacing", 1)?;
    let image = keyed(6, "image", 2)?;
    fn value<T: std::str::FromStr>(path: &Path, line: usize, s: &str) -> FileResult<T> {
        s.parse().map_err(|_| FileError::parse(path, line, format!("bad number {s:?}")))
    }
    let homography = Homography::new(m).map_err(|e| FileError::parse(path, 2, e.to_string()))?;
    Ok(HomographyFile {
        homography,
        max_spacing: value(path, 5, spacing[0])?,
        image_width: value(path, 6, image[0])?,
        image_height: value(path, 6, image[1])?,
    })
}

pub fn read_homography(path: &Path) -> FileResult<HomographyFile> {
    parse_homography(path, &read_text(path)?)
}

pub fn write_homography(path: &Path, h: &HomographyFile) -> FileResult<()> {
    write_text(path, &format_homography(h))
}

fn numbers<T: std::str::FromStr>(path: &Path, line: usize, text: &str) -> FileResult<Vec<T>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| FileError::parse(path, line, format!("bad number {s:?}"))))
        .collect()
}

fn rows<T: std::str::FromStr>(path: &Path, text: &str, width: usize) -> FileResult<Vec<(usize, Vec<T>)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            let v = numbers(path, i + 1, l)?;
            if width > 0 && v.len() != width {
                return Err(FileError::parse(path, i + 1, format!("expected {width} values, found {}", v.len())));
            }
            Ok((i + 1, v))
        })
        .collect()
}

/// Point cloud, one `x y z` per line.
pub fn read_points(path: &Path) -> FileResult<Vec<Point3>> {
    Ok(rows::<f64>(path, &read_text(path)?, 3)?.into_iter().map(|(_, v)| Point3::new(v[0], v[1], v[2])).collect())
}

pub fn write_points(path: &Path, points: &[Point3]) -> FileResult<()> {
    let mut s = String::new();
    for p in points {
        let _ = writeln!(s, "{} {} {}", decimal(p.x), decimal(p.y), decimal(p.z));
    }
    write_text(path, &s)
}

/// Pixel to ground correspondences, one `u v x y` per line.
pub fn read_correspondences(path: &Path) -> FileResult<Vec<(PixelPoint, BevPoint)>> {
    Ok(rows::<f64>(path, &read_text(path)?, 4)?
        .into_iter()
        .map(|(_, v)| (PixelPoint::new(v[0], v[1]), BevPoint::new(v[2], v[3])))
        .collect())
}

/// Appearance descriptors, one `frame,a1,...,an` line per detection in the
/// order of the detection file.
pub fn read_appearance(path: &Path) -> FileResult<Vec<(Frame, Vec<f64>)>> {
    rows::<f64>(path, &read_text(path)?, 0)?
        .into_iter()
        .map(|(line, v)| {
            let f = v[0];
            if f < 1.0 || f.fract() != 0.0 {
                return Err(FileError::parse(path, line, "first column must be the frame"));
            }
            Ok((f as Frame, v[1..].to_vec()))
        })
        .collect()
}

pub fn write_appearance(path: &Path, rows: &[(Frame, &[f64])]) -> FileResult<()> {
    let mut s = String::new();
    for (f, a) in rows {
        let _ = write!(s, "{f}");
        for x in *a {
            let _ = write!(s, ",{}", decimal(*x));
        }
        s.push('\n');
    }
    write_text(path, &s)
}

/// Cumulative camera offsets, one `frame,x,y` per line for consecutive
/// frames.
pub fn read_egomotion(path: &Path) -> FileResult<EgomotionTrack> {
    let rows = rows::<f64>(path, &read_text(path)?, 3)?;
    let Some((_, first)) = rows.first() else {
        return Err(FileError::parse(path, 1, "egomotion file is empty"));
    };
    let first_frame = first[0] as Frame;
    let mut offsets = Vec::with_capacity(rows.len());
    for (k, (line, v)) in rows.iter().enumerate() {
        if v[0] != first_frame as f64 + k as f64 || first_frame < 1 {
            return Err(FileError::parse(path, *line, "frames must be consecutive and start at 1 or later"));
        }
        offsets.push(BevPoint::new(v[1], v[2]));
    }
    Ok(EgomotionTrack { first_frame, offsets })
}

pub fn write_egomotion(path: &Path, e: &EgomotionTrack) -> FileResult<()> {
    let mut s = String::new();
    for (k, o) in e.offsets.iter().enumerate() {
        let _ = writeln!(s, "{},{},{}", e.first_frame + k as Frame, decimal(o.x), decimal(o.y));
    }
    write_text(path, &s)
}

/// Parses JSON, reporting the line of the first error. Missing and unknown
/// fields are named in the message.
pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> FileResult<T> {
    serde_json::from_str(text).map_err(|e| FileError::parse(path, e.line(), e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> FileResult<()> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    write_text(path, &s)
}

pub fn read_scenario(path: &Path) -> FileResult<Scenario> {
    let s: Scenario = parse_json(path, &read_text(path)?)?;
    s.validate()?;
    Ok(s)
}

pub fn write_scenario(path: &Path, s: &Scenario) -> FileResult<()> {
    write_json(path, s)
}

/// Run configuration. Absent keys take their defaults; unknown keys are
/// parse errors.
pub fn read_config(path: &Path) -> FileResult<RunConfig> {
    let text = read_text(path)?;
    let c: RunConfig = if text.trim().is_empty() { RunConfig::default() } else { parse_json(path, &text)? };
    c.validate()?;
    Ok(c)
}

/// Line-delimited JSON, one record per line.
pub fn write_json_lines<T: Serialize>(path: &Path, records: &[T]) -> FileResult<()> {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("serializable"));
        s.push('\n');
    }
    write_text(path, &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("h.txt")
    }

    #[test]
    fn homography_round_trips_bit_exactly() {
        let m = [[0.1, 1.0 / 3.0, -7.25], [2.0f64.sqrt(), 1e-17, 12.0], [0.0, 0.0012345678901234567, 1.0]];
        let h = HomographyFile { homography: Homography::new(m).unwrap(), max_spacing: 0.2, image_width: 1920, image_height: 1080 };
        let text = format_homography(&h);
        let back = parse_homography(p(), &text).unwrap();
        assert_eq!(back, h);
        assert_eq!(format_homography(&back), text);
    }

    #[test]
    fn homography_errors() {
        assert!(matches!(parse_homography(p(), "G\n1 0 0\n0 1 0\n0 0 1\nmax_spacing 0.2\nimage 1 1\n"), Err(FileError::Parse { line: 1, .. })));
        assert!(matches!(parse_homography(p(), "H\n1 0 0\n0 1\n0 0 1\nmax_spacing 0.2\nimage 1 1\n"), Err(FileError::Parse { line: 3, .. })));
        assert!(matches!(parse_homography(p(), "H\n1 0 0\n0 1 0\n0 0 1\nspacing 0.2\nimage 1 1\n"), Err(FileError::Parse { line: 5, .. })));
        assert!(parse_homography(p(), "H\n1 0 0\n").is_err());
    }

    #[test]
    fn config_defaults_and_typos() {
        let c: RunConfig = parse_json(p(), "{}").unwrap();
        assert_eq!(c, RunConfig::default());
        let e = parse_json::<RunConfig>(p(), "{\n \"thresholds\": {\"tau_l3\": 1}\n}").unwrap_err();
        assert!(e.to_string().contains("tau_l3"), "{e}");
    }
}
