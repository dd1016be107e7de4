//! MOTChallenge text files.
//!
//! Tracks and detections use ten columns
//! `frame,id,left,top,width,height,confidence,x,y,z`, with `id = -1` for
//! detections and `-1` in the world columns unless BEV export is enabled.
//! Ground truth uses nine columns `frame,id,left,top,width,height,flag,class,visibility`.
//!
//! Numbers are written in the shortest decimal form that reads back to the
//! same `f64`, so reading and writing is lossless.

use std::fmt::Write as _;
use std::path::Path;

use bevtrack_core::eval::LabeledBox;
use bevtrack_core::sim::GtRecord;
use bevtrack_core::tracker::TrackOutput;
use bevtrack_core::{Frame, PixelBox};

use crate::error::{decimal, read_text, write_text, FileError, FileResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotRecord {
    pub frame: Frame,
    pub id: i64,
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub confidence: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl MotRecord {
    pub fn new(frame: Frame, id: i64, bbox: PixelBox) -> Self {
        Self {
            frame,
            id,
            left: bbox.left,
            top: bbox.top,
            width: bbox.width,
            height: bbox.height,
            confidence: bbox.confidence,
            x: -1.0,
            y: -1.0,
            z: -1.0,
        }
    }

    pub fn bbox(&self) -> PixelBox {
        PixelBox::new(self.left, self.top, self.width, self.height).with_confidence(self.confidence)
    }

    fn line(&self, out: &mut String) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            self.frame,
            self.id,
            decimal(self.left),
            decimal(self.top),
            decimal(self.width),
            decimal(self.height),
            decimal(self.confidence),
            decimal(self.x),
            decimal(self.y),
            decimal(self.z)
        );
    }
}

/// Ground-truth row with its visibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtRow {
    pub frame: Frame,
    pub id: u32,
    pub bbox: PixelBox,
    pub visibility: f64,
}

impl GtRow {
    pub fn labeled(&self) -> LabeledBox {
        LabeledBox { frame: self.frame, id: self.id, bbox: self.bbox, visibility: self.visibility }
    }
}

impl From<&GtRecord> for GtRow {
    fn from(g: &GtRecord) -> Self {
        Self { frame: g.frame, id: g.id, bbox: g.bbox, visibility: g.visibility }
    }
}

/// Parsed records plus the number of rows dropped for a non-positive box.
#[derive(Debug, Clone, PartialEq)]
pub struct MotFile<T> {
    pub records: Vec<T>,
    /// Position of each kept record among the data rows of the file.
    pub rows: Vec<usize>,
    pub skipped: usize,
}

fn fields<'a>(path: &Path, line: usize, text: &'a str, min: usize) -> FileResult<Vec<&'a str>> {
    let f: Vec<&str> = text.split(',').map(str::trim).collect();
    if f.len() < min {
        return Err(FileError::parse(path, line, format!("expected at least {min} columns, found {}", f.len())));
    }
    Ok(f)
}

fn num<T: std::str::FromStr>(path: &Path, line: usize, column: &str, s: &str) -> FileResult<T> {
    s.parse().map_err(|_| FileError::parse(path, line, format!("bad {column} value {s:?}")))
}

fn frame(path: &Path, line: usize, s: &str) -> FileResult<Frame> {
    // Some tools write integral columns as floats.
    let v: f64 = num(path, line, "frame", s)?;
    if v < 1.0 || v.fract() != 0.0 || v > Frame::MAX as f64 {
        return Err(FileError::parse(path, line, format!("frame must be a positive integer, got {s}")));
    }
    Ok(v as Frame)
}

fn integer(path: &Path, line: usize, column: &str, s: &str) -> FileResult<i64> {
    let v: f64 = num(path, line, column, s)?;
    if v.fract() != 0.0 || v.abs() > i64::MAX as f64 {
        return Err(FileError::parse(path, line, format!("{column} must be an integer, got {s}")));
    }
    Ok(v as i64)
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}

pub fn parse_mot(path: &Path, text: &str) -> FileResult<MotFile<MotRecord>> {
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut skipped = 0;
    for (row, (n, l)) in lines(text).enumerate() {
        let f = fields(path, n, l, 6)?;
        let get = |i: usize, name: &str, default: f64| -> FileResult<f64> {
            f.get(i).map_or(Ok(default), |s| num(path, n, name, s))
        };
        let r = MotRecord {
            frame: frame(path, n, f[0])?,
            id: integer(path, n, "id", f[1])?,
            left: get(2, "left", 0.0)?,
            top: get(3, "top", 0.0)?,
            width: get(4, "width", 0.0)?,
            height: get(5, "height", 0.0)?,
            confidence: get(6, "confidence", 1.0)?,
            x: get(7, "x", -1.0)?,
            y: get(8, "y", -1.0)?,
            z: get(9, "z", -1.0)?,
        };
        if !(r.width > 0.0 && r.height > 0.0) || !(r.left.is_finite() && r.top.is_finite()) {
            skipped += 1;
            continue;
        }
        records.push(r);
        rows.push(row);
    }
    Ok(MotFile { records, rows, skipped })
}

pub fn read_mot(path: &Path) -> FileResult<MotFile<MotRecord>> {
    parse_mot(path, &read_text(path)?)
}

/// Sorted by frame, then id; rows of equal key keep their order.
pub fn format_mot(records: &[MotRecord]) -> String {
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|r| (r.frame, r.id));
    let mut out = String::new();
    for r in &sorted {
        r.line(&mut out);
    }
    out
}

pub fn write_mot(path: &Path, records: &[MotRecord]) -> FileResult<()> {
    write_text(path, &format_mot(records))
}

/// Tracker output as MOT records, with the BEV position in the world columns
/// when `bev` is set.
pub fn track_records(tracks: &[TrackOutput], bev: bool) -> Vec<MotRecord> {
    tracks
        .iter()
        .map(|t| {
            let mut r = MotRecord::new(t.frame, t.id as i64, t.bbox);
            if bev {
                (r.x, r.y) = (t.bev.x, t.bev.y);
            }
            r
        })
        .collect()
}

pub fn parse_gt(path: &Path, text: &str) -> FileResult<MotFile<GtRow>> {
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut skipped = 0;
    for (row, (n, l)) in lines(text).enumerate() {
        let f = fields(path, n, l, 9)?;
        let id = integer(path, n, "id", f[1])?;
        let id = u32::try_from(id).map_err(|_| FileError::parse(path, n, format!("ground-truth id must be non-negative, got {id}")))?;
        let v = |i: usize, name: &str| num::<f64>(path, n, name, f[i]);
        let bbox = PixelBox::new(v(2, "left")?, v(3, "top")?, v(4, "width")?, v(5, "height")?);
        let visibility = v(8, "visibility")?;
        if !(0.0..=1.0).contains(&visibility) {
            return Err(FileError::parse(path, n, format!("visibility must lie in [0, 1], got {visibility}")));
        }
        if !bbox.is_valid() {
            skipped += 1;
            continue;
        }
        records.push(GtRow { frame: frame(path, n, f[0])?, id, bbox, visibility });
        rows.push(row);
    }
    Ok(MotFile { records, rows, skipped })
}

pub fn read_gt(path: &Path) -> FileResult<MotFile<GtRow>> {
    parse_gt(path, &read_text(path)?)
}

pub fn format_gt(rows: &[GtRow]) -> String {
    let mut sorted = rows.to_vec();
    sorted.sort_by_key(|r| (r.frame, r.id));
    let mut out = String::new();
    for r in &sorted {
        let b = r.bbox;
        let _ = writeln!(out, "{},{},{},{},{},{},1,1,{}", r.frame, r.id, decimal(b.left), decimal(b.top), decimal(b.width), decimal(b.height), decimal(r.visibility));
    }
    out
}

pub fn write_gt(path: &Path, rows: &[GtRow]) -> FileResult<()> {
    write_text(path, &format_gt(rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("t.txt")
    }

    #[test]
    fn reads_the_documented_row() {
        let f = parse_mot(p(), "1,1,10,20,30,60,1,-1,-1,-1\n").unwrap();
        let r = f.records[0];
        assert_eq!((r.frame, r.id), (1, 1));
        assert_eq!(r.bbox(), PixelBox::new(10.0, 20.0, 30.0, 60.0));
        assert_eq!((r.x, r.y, r.z), (-1.0, -1.0, -1.0));
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = "1,-1,10,20,30,60,0.9,-1,-1,-1\n1,2,0.1,0.30000000000000004,5e-324,1e300,1,3.5,-2,-1\n2,1,1,1,1,1,1,-1,-1,-1\n";
        assert_eq!(format_mot(&parse_mot(p(), text).unwrap().records), text);
    }

    #[test]
    fn non_positive_boxes_are_skipped() {
        let f = parse_mot(p(), "1,1,10,20,-5,60,1,-1,-1,-1\n1,2,10,20,5,60,1,-1,-1,-1\n").unwrap();
        assert_eq!((f.records.len(), f.skipped, f.rows[0]), (1, 1, 1));
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_mot(p(), "1,1,10,20,30,60\n2,x,1,1,1,1\n").unwrap_err();
        assert!(matches!(e, FileError::Parse { line: 2, .. }), "{e}");
        assert_eq!(e.exit_code(), 2);
        assert!(parse_mot(p(), "0,1,1,1,1,1\n").is_err());
        assert!(parse_mot(p(), "1,1,1\n").is_err());
    }

    #[test]
    fn writes_sorted() {
        let a = MotRecord::new(2, 1, PixelBox::new(0.0, 0.0, 1.0, 1.0));
        let b = MotRecord::new(1, 5, PixelBox::new(0.0, 0.0, 1.0, 1.0));
        let c = MotRecord::new(1, 3, PixelBox::new(0.0, 0.0, 1.0, 1.0));
        let text = format_mot(&[a, b, c]);
        let back = parse_mot(p(), &text).unwrap().records;
        assert_eq!(back, vec![c, b, a]);
    }

    #[test]
    fn gt_keeps_visibility() {
        let text = "1,3,1,2,3,4,1,1,0.25\n";
        let f = parse_gt(p(), text).unwrap();
        assert_eq!(f.records[0].visibility, 0.25);
        assert_eq!(format_gt(&f.records), text);
        assert!(parse_gt(p(), "1,3,1,2,3,4,1,1,1.5\n").is_err());
    }
}
