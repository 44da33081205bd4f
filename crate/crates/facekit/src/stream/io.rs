//! Reading and writing frame streams.
//!
//! Two encodings of the same records: a CSV table with a
//! `frame,t,w0..,x0,y0..` header, and JSON Lines with one object per line.
//! Floats are written in shortest round-trip form, so write-then-read
//! reproduces every value bit for bit. Readers reject non-finite values,
//! inconsistent channel counts, and frame numbers that fail to increase.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{ChannelLayout, FrameSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamFormat {
    Csv,
    Jsonl,
}

impl StreamFormat {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "csv" => Ok(StreamFormat::Csv),
            "jsonl" => Ok(StreamFormat::Jsonl),
            other => Err(Error::InvalidConfig {
                msg: format!("unknown stream format {other:?}, expected csv or jsonl"),
            }),
        }
    }

    /// Picks a format from a file extension; unknown extensions read as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => StreamFormat::Jsonl,
            _ => StreamFormat::Csv,
        }
    }
}

pub fn read_stream<R: BufRead>(reader: R, format: StreamFormat) -> Result<Vec<FrameSample>> {
    match format {
        StreamFormat::Csv => read_csv(reader),
        StreamFormat::Jsonl => read_jsonl(reader),
    }
}

pub fn write_stream<W: Write>(
    mut writer: W,
    samples: &[FrameSample],
    format: StreamFormat,
) -> Result<()> {
    match format {
        StreamFormat::Csv => write_csv(&mut writer, samples),
        StreamFormat::Jsonl => {
            for sample in samples {
                let line = serde_json::to_string(sample).expect("frame serialization");
                writeln!(writer, "{line}")?;
            }
            Ok(())
        }
    }
}

fn parse_header(line: &str) -> Result<ChannelLayout> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    let bad = |column: usize, msg: String| Error::Parse {
        line: 1,
        column,
        msg,
    };
    if fields.first() != Some(&"frame") {
        return Err(bad(1, "header must start with \"frame\"".into()));
    }
    if fields.get(1) != Some(&"t") {
        return Err(bad(2, "second header column must be \"t\"".into()));
    }

    let mut idx = 2;
    let mut n_weights = 0;
    while idx < fields.len() && fields[idx] == format!("w{n_weights}") {
        n_weights += 1;
        idx += 1;
    }
    let mut n_landmarks = 0;
    while idx < fields.len() {
        let (x, y) = (format!("x{n_landmarks}"), format!("y{n_landmarks}"));
        if fields[idx] != x {
            return Err(bad(
                idx + 1,
                format!("expected column {x:?}, found {:?}", fields[idx]),
            ));
        }
        if fields.get(idx + 1).copied() != Some(y.as_str()) {
            return Err(bad(
                idx + 2,
                format!("landmark column {x:?} must be followed by {y:?}"),
            ));
        }
        n_landmarks += 1;
        idx += 2;
    }
    Ok(ChannelLayout {
        n_weights,
        n_landmarks,
    })
}

fn parse_f64(field: &str, line: usize, column: usize) -> Result<f64> {
    let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line,
        column,
        msg: format!("expected a number, found {field:?}"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line,
            column,
            msg: format!("value must be finite, found {field:?}"),
        });
    }
    Ok(value)
}

fn read_csv<R: BufRead>(reader: R) -> Result<Vec<FrameSample>> {
    let mut samples = Vec::new();
    let mut layout: Option<ChannelLayout> = None;
    let mut prev_frame: Option<u64> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let layout = match &layout {
            Some(l) => l,
            None => {
                layout = Some(parse_header(&line)?);
                continue;
            }
        };

        let fields: Vec<&str> = line.split(',').collect();
        let expected = 2 + layout.channels();
        if fields.len() != expected {
            return Err(Error::Parse {
                line: line_no,
                column: fields.len().min(expected),
                msg: format!("expected {expected} fields, found {}", fields.len()),
            });
        }

        let frame: u64 = fields[0].trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            column: 1,
            msg: format!("expected a frame number, found {:?}", fields[0]),
        })?;
        if let Some(prev) = prev_frame {
            if frame <= prev {
                return Err(Error::NonMonotoneFrame { prev, got: frame });
            }
        }
        prev_frame = Some(frame);

        let t = parse_f64(fields[1], line_no, 2)?;
        let mut weights = Vec::with_capacity(layout.n_weights);
        for w in 0..layout.n_weights {
            weights.push(parse_f64(fields[2 + w], line_no, 3 + w)?);
        }
        let mut landmarks = Vec::with_capacity(layout.n_landmarks);
        for k in 0..layout.n_landmarks {
            let base = 2 + layout.n_weights + 2 * k;
            landmarks.push([
                parse_f64(fields[base], line_no, base + 1)?,
                parse_f64(fields[base + 1], line_no, base + 2)?,
            ]);
        }
        samples.push(FrameSample {
            frame,
            t,
            weights,
            landmarks,
        });
    }
    Ok(samples)
}

fn write_csv<W: Write>(writer: &mut W, samples: &[FrameSample]) -> Result<()> {
    let Some(first) = samples.first() else {
        return Ok(());
    };
    let layout = ChannelLayout::of(first);
    let mut header = String::from("frame,t");
    for w in 0..layout.n_weights {
        header.push_str(&format!(",w{w}"));
    }
    for k in 0..layout.n_landmarks {
        header.push_str(&format!(",x{k},y{k}"));
    }
    writeln!(writer, "{header}")?;

    for sample in samples {
        layout.check(sample)?;
        let mut row = format!("{},{}", sample.frame, sample.t);
        for w in &sample.weights {
            row.push_str(&format!(",{w}"));
        }
        for p in &sample.landmarks {
            row.push_str(&format!(",{},{}", p[0], p[1]));
        }
        writeln!(writer, "{row}")?;
    }
    Ok(())
}

fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<FrameSample>> {
    let mut samples: Vec<FrameSample> = Vec::new();
    let mut layout: Option<ChannelLayout> = None;
    let mut prev_frame: Option<u64> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let sample: FrameSample = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            column: e.column(),
            msg: e.to_string(),
        })?;
        sample.validate()?;
        match &layout {
            Some(l) => l.check(&sample)?,
            None => layout = Some(ChannelLayout::of(&sample)),
        }
        if let Some(prev) = prev_frame {
            if sample.frame <= prev {
                return Err(Error::NonMonotoneFrame {
                    prev,
                    got: sample.frame,
                });
            }
        }
        prev_frame = Some(sample.frame);
        samples.push(sample);
    }
    Ok(samples)
}
