//! Plain-text sequence files.
//!
//! One file holds one sequence: a header line
//! `J=<int> T=<int> rate=<float> unit=<string>`, then T lines of 3·J
//! whitespace-separated decimal numbers (x y z per joint). Lines starting
//! with `#` are comments. Floats are written in shortest round-trip form, so
//! saving a loaded canonical file reproduces it byte for byte.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::DataError;
use crate::repr::MotionSequence;

fn parse_err(file: &str, line: usize, message: impl Into<String>) -> DataError {
    DataError::Parse {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

/// Read one sequence from a reader; `source` names it in errors.
pub fn read_sequence<R: BufRead>(reader: R, source: &str) -> Result<MotionSequence, DataError> {
    let mut header: Option<(usize, usize, f64, String)> = None;
    let mut positions: Vec<f64> = Vec::new();
    let mut frames_seen = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match &header {
            None => {
                let mut joints = None;
                let mut frames = None;
                let mut rate = None;
                let mut unit = None;
                for field in trimmed.split_whitespace() {
                    let (key, value) = field.split_once('=').ok_or_else(|| {
                        parse_err(source, line_no, format!("malformed header field {field:?}"))
                    })?;
                    match key {
                        "J" => joints = Some(value.parse::<usize>()),
                        "T" => frames = Some(value.parse::<usize>()),
                        "rate" => rate = Some(value.parse::<f64>()),
                        "unit" => unit = Some(value.to_string()),
                        other => {
                            return Err(parse_err(
                                source,
                                line_no,
                                format!("unknown header key {other:?}"),
                            ))
                        }
                    }
                }
                let joints = joints
                    .ok_or_else(|| parse_err(source, line_no, "header missing J"))?
                    .map_err(|e| parse_err(source, line_no, format!("bad J: {e}")))?;
                let frames = frames
                    .ok_or_else(|| parse_err(source, line_no, "header missing T"))?
                    .map_err(|e| parse_err(source, line_no, format!("bad T: {e}")))?;
                let rate = rate
                    .ok_or_else(|| parse_err(source, line_no, "header missing rate"))?
                    .map_err(|e| parse_err(source, line_no, format!("bad rate: {e}")))?;
                let unit =
                    unit.ok_or_else(|| parse_err(source, line_no, "header missing unit"))?;
                if joints == 0 || frames == 0 {
                    return Err(parse_err(source, line_no, "J and T must be positive"));
                }
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(parse_err(source, line_no, "rate must be positive"));
                }
                positions.reserve(frames * joints * 3);
                header = Some((joints, frames, rate, unit));
            }
            Some((joints, frames, _, _)) => {
                if frames_seen == *frames {
                    return Err(parse_err(
                        source,
                        line_no,
                        format!("more than the declared {frames} frames"),
                    ));
                }
                let mut count = 0usize;
                for (k, token) in trimmed.split_whitespace().enumerate() {
                    let value: f64 = token.parse().map_err(|e| {
                        parse_err(source, line_no, format!("token {}: {e}", k + 1))
                    })?;
                    if !value.is_finite() {
                        return Err(parse_err(
                            source,
                            line_no,
                            format!("token {}: non-finite value {token:?}", k + 1),
                        ));
                    }
                    positions.push(value);
                    count += 1;
                }
                if count != joints * 3 {
                    return Err(parse_err(
                        source,
                        line_no,
                        format!("expected {} values, got {count}", joints * 3),
                    ));
                }
                frames_seen += 1;
            }
        }
    }

    let (joints, frames, rate, unit) =
        header.ok_or_else(|| parse_err(source, 0, "missing header line"))?;
    if frames_seen != frames {
        return Err(parse_err(
            source,
            0,
            format!("declared {frames} frames but found {frames_seen}"),
        ));
    }
    MotionSequence::new(joints, rate, unit, positions).map_err(DataError::from)
}

pub fn load_sequence(path: &Path) -> Result<MotionSequence, DataError> {
    let file = File::open(path)?;
    read_sequence(BufReader::new(file), &path.display().to_string())
}

/// Write a sequence, with optional comment lines emitted before the frames.
pub fn write_sequence<W: Write>(
    mut w: W,
    seq: &MotionSequence,
    comments: &[String],
) -> Result<(), DataError> {
    writeln!(
        w,
        "J={} T={} rate={} unit={}",
        seq.joints(),
        seq.frames(),
        seq.frame_rate(),
        seq.unit()
    )?;
    for comment in comments {
        writeln!(w, "# {comment}")?;
    }
    let width = seq.joints() * 3;
    let mut line = String::new();
    for frame in 0..seq.frames() {
        line.clear();
        let pose = seq.pose(frame);
        for (i, v) in pose.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&v.to_string());
        }
        debug_assert_eq!(pose.len(), width);
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn save_sequence(path: &Path, seq: &MotionSequence) -> Result<(), DataError> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_sequence(&mut w, seq, &[])?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn round_trips_canonical_text_bitwise() {
        let text = "J=1 T=2 rate=25 unit=mm\n0.5 -1.25 3\n1.5 2 -0.75\n";
        let seq = read_sequence(Cursor::new(text), "inline").unwrap();
        let mut out = Vec::new();
        write_sequence(&mut out, &seq, &[]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn rejects_nan_token_with_position() {
        let text = "J=1 T=1 rate=25 unit=mm\n0 NaN 0\n";
        let err = read_sequence(Cursor::new(text), "inline").unwrap_err();
        match err {
            DataError::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("token 2"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_value_count_with_line_number() {
        let text = "J=2 T=1 rate=25 unit=mm\n1 2 3\n";
        let err = read_sequence(Cursor::new(text), "inline").unwrap_err();
        match err {
            DataError::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("expected 6"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_frames() {
        let text = "J=1 T=3 rate=25 unit=mm\n1 2 3\n";
        assert!(read_sequence(Cursor::new(text), "inline").is_err());
    }

    #[test]
    fn skips_comments_anywhere() {
        let text = "# leading note\nJ=1 T=2 rate=25 unit=mm\n# between\n1 2 3\n4 5 6\n";
        let seq = read_sequence(Cursor::new(text), "inline").unwrap();
        assert_eq!(seq.frames(), 2);
        assert_eq!(seq.at(1, 0, 2), 6.0);
    }
}
