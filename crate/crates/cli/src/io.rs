// SPDX-License-Identifier: MIT OR Apache-2.0

//! File formats.
//!
//! All files are UTF-8, tab separated, one record per `\n`-terminated line,
//! with `.` as the decimal separator. Positions are 1-based and inclusive.
//!
//! Sequence inputs come in three layouts:
//!
//! * `plain`: one value per line, a single sequence named `1`;
//! * `tsv`: `sequence_id<TAB>value` per line, an optional header line, rows
//!   of one sequence contiguous or not (order of first appearance is kept);
//! * `matrix`: a header line naming the sequences, then one row per
//!   position with one column per sequence.
//!
//! Missing, `NA` or non-finite values are rejected with their line number.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use clap::ValueEnum;
use shortseg::{DetectionResult, Segment};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SequenceFormat {
    /// Pick `plain` when the first line has no tab, `tsv` for two columns,
    /// `matrix` otherwise.
    Auto,
    Plain,
    Tsv,
    Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sequence {
    pub id: String,
    pub values: Vec<f64>,
}

fn read_text(path: &Path) -> CliResult<String> {
    let mut text = String::new();
    fs::File::open(path)
        .and_then(|f| BufReader::new(f).read_to_string(&mut text))
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    Ok(text)
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
}

fn parse_value(path: &Path, line: usize, field: &str) -> CliResult<f64> {
    let field = field.trim();
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(CliError::parse(
            path,
            line,
            format!("non-finite value '{field}' (missing values are not supported)"),
        )),
        Err(_) if field.is_empty() || field.eq_ignore_ascii_case("na") => Err(CliError::parse(
            path,
            line,
            "missing value (missing values are not supported)",
        )),
        Err(_) => Err(CliError::parse(
            path,
            line,
            format!("cannot parse '{field}' as a number"),
        )),
    }
}

fn empty_input(path: &Path) -> CliError {
    CliError::parse(path, 0, "empty input")
}

pub fn read_sequences(path: &Path, format: SequenceFormat) -> CliResult<Vec<Sequence>> {
    let text = read_text(path)?;
    parse_sequences(&text, path, format)
}

pub fn parse_sequences(
    text: &str,
    path: &Path,
    format: SequenceFormat,
) -> CliResult<Vec<Sequence>> {
    let Some(first) = text.lines().find(|l| !l.trim().is_empty()) else {
        return Err(empty_input(path));
    };
    let format = match format {
        SequenceFormat::Auto => match first.split('\t').count() {
            1 => SequenceFormat::Plain,
            2 => SequenceFormat::Tsv,
            _ => SequenceFormat::Matrix,
        },
        f => f,
    };
    let seqs = match format {
        SequenceFormat::Plain => parse_plain(text, path)?,
        SequenceFormat::Tsv => parse_tsv(text, path)?,
        SequenceFormat::Matrix => parse_matrix(text, path)?,
        SequenceFormat::Auto => unreachable!(),
    };
    if seqs.is_empty() || seqs.iter().any(|s| s.values.is_empty()) {
        return Err(empty_input(path));
    }
    Ok(seqs)
}

fn parse_plain(text: &str, path: &Path) -> CliResult<Vec<Sequence>> {
    let mut values = Vec::new();
    for (no, line) in lines(text) {
        if line.trim().is_empty() {
            continue;
        }
        if line.contains('\t') {
            return Err(CliError::parse(path, no, "expected one value per line"));
        }
        values.push(parse_value(path, no, line)?);
    }
    Ok(vec![Sequence {
        id: "1".to_string(),
        values,
    }])
}

fn parse_tsv(text: &str, path: &Path) -> CliResult<Vec<Sequence>> {
    let mut seqs: Vec<Sequence> = Vec::new();
    let mut index = std::collections::HashMap::new();
    let mut seen_data = false;
    for (no, line) in lines(text) {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(id), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(CliError::parse(
                path,
                no,
                "expected two tab-separated fields",
            ));
        };
        if !seen_data && value.trim().parse::<f64>().is_err() && !is_missing_token(value) {
            // header line
            seen_data = true;
            continue;
        }
        seen_data = true;
        let v = parse_value(path, no, value)?;
        let slot = *index.entry(id.to_string()).or_insert_with(|| {
            seqs.push(Sequence {
                id: id.to_string(),
                values: Vec::new(),
            });
            seqs.len() - 1
        });
        seqs[slot].values.push(v);
    }
    Ok(seqs)
}

fn is_missing_token(field: &str) -> bool {
    let f = field.trim();
    f.is_empty() || f.eq_ignore_ascii_case("na") || f.eq_ignore_ascii_case("nan")
}

fn parse_matrix(text: &str, path: &Path) -> CliResult<Vec<Sequence>> {
    let mut it = lines(text).filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = it.next() else {
        return Err(empty_input(path));
    };
    let ids: Vec<&str> = header.split('\t').collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); ids.len()];
    for (no, line) in it {
        let mut count = 0;
        for (col, field) in columns.iter_mut().zip(line.split('\t')) {
            col.push(parse_value(path, no, field)?);
            count += 1;
        }
        if count != ids.len() || line.split('\t').count() != ids.len() {
            return Err(CliError::parse(
                path,
                no,
                format!("expected {} columns", ids.len()),
            ));
        }
    }
    Ok(ids
        .into_iter()
        .zip(columns)
        .map(|(id, values)| Sequence {
            id: id.trim().to_string(),
            values,
        })
        .collect())
}

pub const SEGMENT_HEADER: &str = "sequence_id\tstart\tend\tlength\texceed_count\tmean\tp_value";

/// Appends one output row per segment. With `bed`, starts are shifted to
/// 0-based half-open coordinates.
pub fn format_segments(out: &mut String, id: &str, result: &DetectionResult, bed: bool) {
    for s in &result.segments {
        let start = if bed {
            s.segment.start - 1
        } else {
            s.segment.start
        };
        let p = match s.p_value {
            Some(p) => format!("{p:.6e}"),
            None => "NA".to_string(),
        };
        let _ = writeln!(
            out,
            "{id}\t{start}\t{}\t{}\t{}\t{:.6}\t{p}",
            s.segment.end,
            s.segment.len(),
            s.exceed_count,
            s.mean,
        );
    }
}

pub fn segment_header(bed: bool) -> String {
    if bed {
        format!("#{SEGMENT_HEADER}\n")
    } else {
        format!("{SEGMENT_HEADER}\n")
    }
}

/// Segment sets keyed by sequence id, in order of first appearance.
pub type IntervalSets = Vec<(String, Vec<Segment>)>;

/// Reads the `sequence_id`, `start` and `end` columns of any headed
/// interval table (detection output or a truth file).
pub fn read_intervals(path: &Path) -> CliResult<IntervalSets> {
    let file =
        fs::File::open(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(h))) => h,
        Some((_, Err(e))) => return Err(CliError::io(format!("reading {}", path.display()), e)),
        None => return Err(empty_input(path)),
    };
    let names: Vec<&str> = header.trim_start_matches('#').split('\t').collect();
    let col = |name: &str| {
        names
            .iter()
            .position(|n| n.trim() == name)
            .ok_or_else(|| CliError::parse(path, 1, format!("missing column '{name}'")))
    };
    let (ci, cs, ce) = (col("sequence_id")?, col("start")?, col("end")?);

    let mut sets: IntervalSets = Vec::new();
    for (i, line) in lines {
        let no = i + 1;
        let line = line.map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let get = |c: usize| {
            fields
                .get(c)
                .copied()
                .ok_or_else(|| CliError::parse(path, no, "too few columns"))
        };
        let id = get(ci)?;
        let pos = |c: usize| -> CliResult<usize> {
            let f = get(c)?;
            f.trim()
                .parse()
                .map_err(|_| CliError::parse(path, no, format!("cannot parse position '{f}'")))
        };
        let seg = Segment::new(pos(cs)?, pos(ce)?)
            .map_err(|e| CliError::parse(path, no, e.to_string()))?;
        match sets.iter_mut().find(|(k, _)| k == id) {
            Some((_, v)) => v.push(seg),
            None => sets.push((id.to_string(), vec![seg])),
        }
    }
    Ok(sets)
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(contents.as_bytes()))
        .map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, f: SequenceFormat) -> CliResult<Vec<Sequence>> {
        parse_sequences(text, Path::new("in.tsv"), f)
    }

    #[test]
    fn plain_and_auto() {
        let s = parse("1.5\n-2\n3e-1\n", SequenceFormat::Auto).unwrap();
        assert_eq!(
            s,
            vec![Sequence {
                id: "1".into(),
                values: vec![1.5, -2.0, 0.3]
            }]
        );
    }

    #[test]
    fn tsv_with_header_and_interleaving() {
        let s = parse("id\tvalue\na\t1\nb\t2\na\t3\n", SequenceFormat::Auto).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].values, vec![1.0, 3.0]);
        assert_eq!(s[1].id, "b");
    }

    #[test]
    fn matrix_columns() {
        let s = parse("x\ty\tz\n1\t2\t3\n4\t5\t6\n", SequenceFormat::Auto).unwrap();
        assert_eq!(
            s[2],
            Sequence {
                id: "z".into(),
                values: vec![3.0, 6.0]
            }
        );
        let two = parse("x\ty\n1\t2\n", SequenceFormat::Matrix).unwrap();
        assert_eq!(two.len(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("1\n2\nabc\n", SequenceFormat::Plain).unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 3, .. }), "{e}");
        let e = parse("1\nNA\n", SequenceFormat::Plain).unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 2, .. }));
        let e = parse("1\nnan\n", SequenceFormat::Plain).unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 2, .. }));
        let e = parse("a\tb\n1\t\n", SequenceFormat::Matrix).unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 2, .. }));
        let e = parse("a\tb\n1\t2\t3\n", SequenceFormat::Matrix).unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 2, .. }));
        let e = parse("s\t1\ns\tNA\n", SequenceFormat::Tsv).unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 2, .. }));
    }

    #[test]
    fn empty_inputs() {
        for text in ["", "\n\n", "id\tvalue\n"] {
            let e = parse(text, SequenceFormat::Auto).unwrap_err();
            assert!(e.to_string().contains("empty input"), "{text:?}: {e}");
            assert_eq!(e.exit_code(), 2);
        }
    }
}
