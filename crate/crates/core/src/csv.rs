//! Byte-exact CSV encoding of [`Dataset`]s.
//!
//! Output: one header line with the dotted column names, then one line per
//! row. Integers in base 10, comma separated, `\n` terminated, no quoting.
//! Input accepts the 17 columns in any order under any alias that
//! [`Field::from_name`] resolves; each column must appear exactly once.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::schema::{Dataset, Field, FrameRecord};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("missing header line")]
    MissingHeader,
    #[error("unknown header `{0}`")]
    UnknownHeader(String),
    #[error("duplicate header `{0}`")]
    DuplicateHeader(String),
    #[error("header is missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("line {line}: {detail}")]
    MalformedRow { line: usize, detail: String },
}

pub fn header_line() -> String {
    Field::ALL
        .iter()
        .map(|f| f.name())
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes `ds` to `sink` and returns the number of data rows written.
pub fn encode_csv<W: Write>(ds: &Dataset, sink: W) -> Result<usize, CsvError> {
    let mut out = io::BufWriter::new(sink);
    out.write_all(header_line().as_bytes())?;
    out.write_all(b"\n")?;
    let mut line = String::with_capacity(96);
    for row in &ds.rows {
        line.clear();
        for (i, f) in Field::ALL.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&row.get(*f).to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(ds.rows.len())
}

pub fn encode_csv_to_vec(ds: &Dataset) -> Vec<u8> {
    let mut buf = Vec::new();
    encode_csv(ds, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

/// Reads a dataset. Rows are not validated against generator invariants.
pub fn decode_csv<R: BufRead>(source: R) -> Result<Dataset, CsvError> {
    let mut lines = source.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(CsvError::MissingHeader),
    };
    let columns = parse_header(strip_cr(&header))?;

    let mut rows = Vec::new();
    let mut pending_blank: Option<usize> = None;
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let line = strip_cr(&line);
        if line.is_empty() {
            pending_blank.get_or_insert(line_no);
            continue;
        }
        if let Some(blank) = pending_blank {
            return Err(CsvError::MalformedRow {
                line: blank,
                detail: "empty line".into(),
            });
        }
        rows.push(parse_row(line, line_no, &columns)?);
    }
    Ok(Dataset::new(rows))
}

fn strip_cr(line: &str) -> &str {
    line.strip_suffix('\r').unwrap_or(line)
}

fn parse_header(line: &str) -> Result<Vec<Field>, CsvError> {
    let mut columns = Vec::with_capacity(Field::ALL.len());
    for name in line.split(',') {
        let name = name.trim();
        if name.contains('"') {
            return Err(CsvError::UnknownHeader(name.to_string()));
        }
        let field = Field::from_name(name).map_err(|e| CsvError::UnknownHeader(e.0))?;
        if columns.contains(&field) {
            return Err(CsvError::DuplicateHeader(name.to_string()));
        }
        columns.push(field);
    }
    if let Some(missing) = Field::ALL.iter().find(|f| !columns.contains(f)) {
        return Err(CsvError::MissingColumn(missing.name()));
    }
    Ok(columns)
}

fn parse_row(line: &str, line_no: usize, columns: &[Field]) -> Result<FrameRecord, CsvError> {
    let mut record = FrameRecord::default();
    let mut count = 0;
    for (i, raw) in line.split(',').enumerate() {
        count += 1;
        let Some(field) = columns.get(i) else {
            continue;
        };
        let value: i64 = raw.parse().map_err(|_| CsvError::MalformedRow {
            line: line_no,
            detail: format!("field `{}` is not an integer: {raw:?}", field.name()),
        })?;
        record.set(*field, value);
    }
    if count != columns.len() {
        return Err(CsvError::MalformedRow {
            line: line_no,
            detail: format!("expected {} fields, found {count}", columns.len()),
        });
    }
    Ok(record)
}
