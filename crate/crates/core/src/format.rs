//! On-disk recording formats.
//!
//! JSONL: the first line is a header object (`session_id`, `screen_width_px`,
//! `screen_height_px`, `sample_rate_hz`), every following non-empty line is one
//! sample object.
//!
//! CSV: two metadata rows (field names, then values) followed by the sample
//! table with the fixed column order in [`CSV_COLUMNS`]. An empty pupil field
//! means the diameter is absent.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::RecordingError;
use crate::sample::{check_samples, GazeRecording, GazeSample, RecordingHeader};

pub const CSV_COLUMNS: [&str; 7] = [
    "timestamp_us",
    "gaze_x",
    "gaze_y",
    "pupil_left_mm",
    "pupil_right_mm",
    "valid_left",
    "valid_right",
];

const HEADER_FIELDS: [&str; 4] = ["session_id", "screen_width_px", "screen_height_px", "sample_rate_hz"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordingFormat {
    #[default]
    Jsonl,
    Csv,
}

impl RecordingFormat {
    /// Guesses the format from a file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => RecordingFormat::Csv,
            _ => RecordingFormat::Jsonl,
        }
    }
}

impl FromStr for RecordingFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(RecordingFormat::Jsonl),
            "csv" => Ok(RecordingFormat::Csv),
            other => Err(format!("unknown recording format `{other}`")),
        }
    }
}

pub fn read_recording(path: &Path, format: RecordingFormat) -> Result<GazeRecording, RecordingError> {
    let file = File::open(path).map_err(|e| RecordingError::io(path, e))?;
    let reader = BufReader::new(file);
    match format {
        RecordingFormat::Jsonl => parse_jsonl(reader),
        RecordingFormat::Csv => parse_csv(reader),
    }
    .map_err(|e| match e {
        RecordingError::Io { source, .. } => RecordingError::io(path, source),
        other => other,
    })
}

pub fn write_recording(recording: &GazeRecording, path: &Path, format: RecordingFormat) -> Result<(), RecordingError> {
    recording.validate()?;
    let file = File::create(path).map_err(|e| RecordingError::io(path, e))?;
    let mut out = BufWriter::new(file);
    match format {
        RecordingFormat::Jsonl => encode_jsonl(recording, &mut out),
        RecordingFormat::Csv => encode_csv(recording, &mut out),
    }
    .and_then(|_| out.flush())
    .map_err(|e| RecordingError::io(path, e))
}

pub fn encode_jsonl<W: Write>(recording: &GazeRecording, out: &mut W) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, &recording.header())?;
    out.write_all(b"\n")?;
    for sample in &recording.samples {
        serde_json::to_writer(&mut *out, sample)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn parse_jsonl<R: BufRead>(reader: R) -> Result<GazeRecording, RecordingError> {
    let mut header: Option<RecordingHeader> = None;
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| RecordingError::io("<stream>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        match header {
            None => header = Some(parse_json_header(&line, line_no)?),
            Some(_) => {
                let sample: GazeSample = serde_json::from_str(&line).map_err(|e| RecordingError::Malformed {
                    line: line_no,
                    message: e.to_string(),
                })?;
                push_checked(&mut samples, sample, line_no)?;
            }
        }
    }
    let header = header.ok_or(RecordingError::Malformed {
        line: 1,
        message: "missing header line".into(),
    })?;
    header.check()?;
    Ok(GazeRecording::from_parts_unchecked(header, samples))
}

fn parse_json_header(line: &str, line_no: usize) -> Result<RecordingHeader, RecordingError> {
    let value: Value = serde_json::from_str(line).map_err(|e| RecordingError::Malformed {
        line: line_no,
        message: e.to_string(),
    })?;
    let obj = value.as_object().ok_or(RecordingError::Malformed {
        line: line_no,
        message: "header must be a JSON object".into(),
    })?;
    for field in HEADER_FIELDS {
        if !obj.contains_key(field) {
            return Err(RecordingError::MissingHeaderField(field));
        }
    }
    serde_json::from_value(value).map_err(|e| RecordingError::Malformed {
        line: line_no,
        message: e.to_string(),
    })
}

fn push_checked(samples: &mut Vec<GazeSample>, sample: GazeSample, line_no: usize) -> Result<(), RecordingError> {
    let previous = samples.last().map(|s| s.timestamp_us);
    check_samples(std::slice::from_ref(&sample), previous).map_err(|e| e.at_line(line_no))?;
    samples.push(sample);
    Ok(())
}

pub fn encode_csv<W: Write>(recording: &GazeRecording, out: &mut W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let header = recording.header();
    w.write_record(HEADER_FIELDS)?;
    w.write_record([
        header.session_id.clone(),
        header.screen_width_px.to_string(),
        header.screen_height_px.to_string(),
        header.sample_rate_hz.to_string(),
    ])?;
    w.write_record(CSV_COLUMNS)?;
    let opt = |v: Option<f64>| v.map(|p| p.to_string()).unwrap_or_default();
    for s in &recording.samples {
        w.write_record([
            s.timestamp_us.to_string(),
            s.gaze_x.to_string(),
            s.gaze_y.to_string(),
            opt(s.pupil_left_mm),
            opt(s.pupil_right_mm),
            s.valid_left.to_string(),
            s.valid_right.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_csv<R: Read>(reader: R) -> Result<GazeRecording, RecordingError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let mut next = |expect: &str| -> Result<Option<(usize, csv::StringRecord)>, RecordingError> {
        match records.next() {
            None => Ok(None),
            Some(Ok(rec)) => {
                let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
                Ok(Some((line, rec)))
            }
            Some(Err(e)) => {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                Err(RecordingError::Malformed {
                    line,
                    message: format!("{expect}: {e}"),
                })
            }
        }
    };

    let (line, names) = next("metadata names")?.ok_or(RecordingError::Malformed {
        line: 1,
        message: "missing metadata header".into(),
    })?;
    let names: Vec<&str> = names.iter().collect();
    let (vline, values) = next("metadata values")?.ok_or(RecordingError::Malformed {
        line: line + 1,
        message: "missing metadata values".into(),
    })?;
    let lookup = |field: &'static str| -> Result<&str, RecordingError> {
        names
            .iter()
            .position(|n| *n == field)
            .and_then(|i| values.get(i))
            .ok_or(RecordingError::MissingHeaderField(field))
    };
    let malformed = |message: String| RecordingError::Malformed { line: vline, message };
    let header = RecordingHeader {
        session_id: lookup("session_id")?.to_string(),
        screen_width_px: parse_field(lookup("screen_width_px")?, "screen_width_px").map_err(malformed)?,
        screen_height_px: parse_field(lookup("screen_height_px")?, "screen_height_px").map_err(malformed)?,
        sample_rate_hz: parse_field(lookup("sample_rate_hz")?, "sample_rate_hz").map_err(malformed)?,
    };
    header.check()?;

    let (cline, columns) = next("column names")?.ok_or(RecordingError::Malformed {
        line: vline + 1,
        message: "missing column header".into(),
    })?;
    if columns.iter().collect::<Vec<_>>() != CSV_COLUMNS {
        return Err(RecordingError::Malformed {
            line: cline,
            message: format!("expected columns {}", CSV_COLUMNS.join(",")),
        });
    }

    let mut samples = Vec::new();
    while let Some((line, rec)) = next("sample")? {
        let sample = parse_csv_sample(&rec).map_err(|message| RecordingError::Malformed { line, message })?;
        push_checked(&mut samples, sample, line)?;
    }
    Ok(GazeRecording::from_parts_unchecked(header, samples))
}

fn parse_field<T: FromStr>(raw: &str, name: &str) -> Result<T, String> {
    raw.trim()
        .parse()
        .map_err(|_| format!("cannot parse `{raw}` as {name}"))
}

fn parse_optional(raw: &str, name: &str) -> Result<Option<f64>, String> {
    if raw.trim().is_empty() {
        Ok(None)
    } else {
        parse_field(raw, name).map(Some)
    }
}

fn parse_csv_sample(rec: &csv::StringRecord) -> Result<GazeSample, String> {
    if rec.len() != CSV_COLUMNS.len() {
        return Err(format!("expected {} fields, found {}", CSV_COLUMNS.len(), rec.len()));
    }
    Ok(GazeSample {
        timestamp_us: parse_field(&rec[0], CSV_COLUMNS[0])?,
        gaze_x: parse_field(&rec[1], CSV_COLUMNS[1])?,
        gaze_y: parse_field(&rec[2], CSV_COLUMNS[2])?,
        pupil_left_mm: parse_optional(&rec[3], CSV_COLUMNS[3])?,
        pupil_right_mm: parse_optional(&rec[4], CSV_COLUMNS[4])?,
        valid_left: parse_field(&rec[5], CSV_COLUMNS[5])?,
        valid_right: parse_field(&rec[6], CSV_COLUMNS[6])?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Location;

    fn parse(text: &str) -> Result<GazeRecording, RecordingError> {
        parse_jsonl(text.as_bytes())
    }

    const HEADER: &str = r#"{"session_id":"s1","screen_width_px":1920,"screen_height_px":1080,"sample_rate_hz":60.0}"#;

    #[test]
    fn header_only_is_empty_recording() {
        let rec = parse(HEADER).unwrap();
        assert!(rec.is_empty());
        assert_eq!(rec.session_id, "s1");
    }

    #[test]
    fn three_samples_in_order() {
        let text = format!(
            "{HEADER}\n{}\n{}\n{}\n",
            r#"{"timestamp_us":0,"gaze_x":0.1,"gaze_y":0.2,"pupil_left_mm":3.0,"pupil_right_mm":3.1,"valid_left":true,"valid_right":true}"#,
            r#"{"timestamp_us":16667,"gaze_x":0.1,"gaze_y":0.2,"valid_left":false,"valid_right":false}"#,
            r#"{"timestamp_us":33333,"gaze_x":0.3,"gaze_y":0.2,"pupil_right_mm":3.2,"valid_left":false,"valid_right":true}"#,
        );
        let rec = parse(&text).unwrap();
        let ts: Vec<u64> = rec.samples.iter().map(|s| s.timestamp_us).collect();
        assert_eq!(ts, vec![0, 16667, 33333]);
        assert_eq!(rec.samples[2].pupil_mm(), Some(3.2));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = format!(
            "{HEADER}\n{}\nnot json\n",
            r#"{"timestamp_us":0,"gaze_x":0.1,"gaze_y":0.2,"valid_left":false,"valid_right":false}"#
        );
        match parse(&text).unwrap_err() {
            RecordingError::Malformed { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nonmonotonic_reports_line_number() {
        let text = format!(
            "{HEADER}\n{}\n{}\n",
            r#"{"timestamp_us":500,"gaze_x":0.1,"gaze_y":0.2,"valid_left":false,"valid_right":false}"#,
            r#"{"timestamp_us":400,"gaze_x":0.1,"gaze_y":0.2,"valid_left":false,"valid_right":false}"#
        );
        match parse(&text).unwrap_err() {
            RecordingError::NonMonotonic { at, .. } => assert_eq!(at, Location::Line(3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_header_field() {
        let text = r#"{"session_id":"s1","screen_width_px":1920,"sample_rate_hz":60.0}"#;
        assert!(matches!(
            parse(text).unwrap_err(),
            RecordingError::MissingHeaderField("screen_height_px")
        ));
    }

    #[test]
    fn empty_file_is_malformed() {
        assert!(matches!(
            parse("").unwrap_err(),
            RecordingError::Malformed { line: 1, .. }
        ));
    }

    #[test]
    fn csv_empty_field_means_absent_pupil() {
        let text = "session_id,screen_width_px,screen_height_px,sample_rate_hz\n\
                    s,1920,1080,60\n\
                    timestamp_us,gaze_x,gaze_y,pupil_left_mm,pupil_right_mm,valid_left,valid_right\n\
                    0,0.5,0.5,,3.5,false,true\n";
        let rec = parse_csv(text.as_bytes()).unwrap();
        assert_eq!(rec.samples[0].pupil_left_mm, None);
        assert_eq!(rec.samples[0].pupil_right_mm, Some(3.5));
    }

    #[test]
    fn csv_missing_metadata_field() {
        let text = "session_id,screen_width_px,sample_rate_hz\ns,1920,60\n";
        assert!(matches!(
            parse_csv(text.as_bytes()).unwrap_err(),
            RecordingError::MissingHeaderField("screen_height_px")
        ));
    }

    #[test]
    fn csv_bad_row_reports_line() {
        let text = "session_id,screen_width_px,screen_height_px,sample_rate_hz\n\
                    s,1920,1080,60\n\
                    timestamp_us,gaze_x,gaze_y,pupil_left_mm,pupil_right_mm,valid_left,valid_right\n\
                    0,0.5,0.5,,,false,false\n\
                    10,abc,0.5,,,false,false\n";
        match parse_csv(text.as_bytes()).unwrap_err() {
            RecordingError::Malformed { line, .. } => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_both_eyes_round_trips() {
        let mut lost = GazeSample::lost(16667);
        lost.pupil_left_mm = Some(2.5);
        let rec = GazeRecording::new(
            RecordingHeader {
                session_id: "x".into(),
                ..Default::default()
            },
            vec![GazeSample::binocular(0, 0.25, 0.75, 3.0), lost],
        )
        .unwrap();
        let mut buf = Vec::new();
        encode_jsonl(&rec, &mut buf).unwrap();
        assert_eq!(parse_jsonl(buf.as_slice()).unwrap(), rec);
        let mut buf = Vec::new();
        encode_csv(&rec, &mut buf).unwrap();
        assert_eq!(parse_csv(buf.as_slice()).unwrap(), rec);
    }
}
