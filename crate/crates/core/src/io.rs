//! Field formats: CSV with a `# dims=…, spacing=…` header (or a JSON
//! sidecar), and 8-bit PGM images (P2 or P5).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_field::{BinaryMask, ScalarField};

/// Shape metadata, as found in a CSV header or a sidecar file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub dims: Vec<usize>,
    pub spacing: f64,
}

impl FieldMeta {
    pub fn of(f: &ScalarField) -> Self {
        Self {
            dims: f.dims().to_vec(),
            spacing: f.spacing(),
        }
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }
}

fn parse_header(line: &str) -> Result<FieldMeta> {
    let body = line.trim_start_matches('#').trim();
    let mut dims = None;
    let mut spacing = None;
    for part in body.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("malformed header entry {part:?}")))?;
        match key.trim() {
            "dims" => {
                let d = value
                    .trim()
                    .split('x')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::Parse(format!("bad dims {value:?}: {e}")))?;
                dims = Some(d);
            }
            "spacing" => {
                spacing = Some(
                    value
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad spacing {value:?}: {e}")))?,
                );
            }
            other => return Err(Error::Parse(format!("unknown header key {other:?}"))),
        }
    }
    match (dims, spacing) {
        (Some(dims), Some(spacing)) => Ok(FieldMeta { dims, spacing }),
        _ => Err(Error::Parse("header needs both dims and spacing".into())),
    }
}

/// Reads a CSV field. Shape comes from the `#` header, else from `meta`, else
/// from the layout itself: one line is 1-D, several lines are rows of a 2-D
/// grid, with spacing 1.
pub fn read_csv(reader: impl BufRead, meta: Option<&FieldMeta>) -> Result<ScalarField> {
    let mut header = None;
    let mut values = Vec::new();
    let mut rows = 0usize;
    let mut cols = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('#') {
            if header.is_none() && rows == 0 {
                header = Some(parse_header(t)?);
            }
            continue;
        }
        let before = values.len();
        for tok in t.split(',') {
            let v = tok
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: bad value {:?}: {e}", lineno + 1, tok.trim())))?;
            values.push(v);
        }
        let width = values.len() - before;
        if *cols.get_or_insert(width) != width {
            return Err(Error::Parse(format!(
                "line {} has {width} values, expected {}",
                lineno + 1,
                cols.unwrap_or(0)
            )));
        }
        rows += 1;
    }
    let meta = match (header, meta) {
        (Some(h), _) => h,
        (None, Some(m)) => m.clone(),
        (None, None) => FieldMeta {
            dims: match (rows, cols) {
                (0, _) | (_, None) => return Err(Error::EmptyField),
                (1, Some(c)) => vec![c],
                (r, Some(c)) => vec![r, c],
            },
            spacing: 1.0,
        },
    };
    ScalarField::new(meta.dims, meta.spacing, values)
}

/// Writes `f` as CSV with its shape header. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv(f: &ScalarField, mut w: impl Write) -> Result<()> {
    let dims: Vec<String> = f.dims().iter().map(|d| d.to_string()).collect();
    writeln!(w, "# dims={}, spacing={}", dims.join("x"), f.spacing())?;
    let row = *f.dims().last().unwrap_or(&1);
    for chunk in f.values().chunks(row.max(1)) {
        let line: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

fn pgm_token(data: &[u8], pos: &mut usize) -> Result<String> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Parse("truncated PGM header".into()));
    }
    Ok(String::from_utf8_lossy(&data[start..*pos]).into_owned())
}

fn pgm_number(data: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = pgm_token(data, pos)?;
    tok.parse().map_err(|_| Error::Parse(format!("bad PGM {what} {tok:?}")))
}

/// Decodes a P2 or P5 image into a `[height, width]` field on the 0–255
/// scale with unit spacing.
pub fn decode_pgm(data: &[u8]) -> Result<ScalarField> {
    let mut pos = 0;
    let magic = pgm_token(data, &mut pos)?;
    let width = pgm_number(data, &mut pos, "width")?;
    let height = pgm_number(data, &mut pos, "height")?;
    let maxval = pgm_number(data, &mut pos, "maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(Error::Parse(format!("PGM maxval {maxval} out of range")));
    }
    let n = width * height;
    let raw: Vec<u32> = match magic.as_str() {
        "P2" => (0..n)
            .map(|_| pgm_number(data, &mut pos, "sample").map(|v| v as u32))
            .collect::<Result<_>>()?,
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            pos += 1;
            let bytes = if maxval < 256 { 1 } else { 2 };
            let body = data
                .get(pos..pos + n * bytes)
                .ok_or_else(|| Error::Parse("truncated PGM raster".into()))?;
            if bytes == 1 {
                body.iter().map(|&b| b as u32).collect()
            } else {
                body.chunks(2).map(|c| u32::from(c[0]) << 8 | u32::from(c[1])).collect()
            }
        }
        other => return Err(Error::Parse(format!("not a PGM file (magic {other:?})"))),
    };
    if let Some(&v) = raw.iter().find(|&&v| v as usize > maxval) {
        return Err(Error::Parse(format!("PGM sample {v} exceeds maxval {maxval}")));
    }
    let scale = 255.0 / maxval as f64;
    ScalarField::new(
        vec![height, width],
        1.0,
        raw.into_iter().map(|v| v as f64 * scale).collect(),
    )
}

/// Encodes a 2-D field as an 8-bit PGM, rounding and clamping to 0–255.
pub fn encode_pgm(f: &ScalarField, binary: bool) -> Result<Vec<u8>> {
    let [height, width] = f.dims() else {
        return Err(Error::InvalidParameter(format!(
            "PGM needs a 2-D field, got dims {:?}",
            f.dims()
        )));
    };
    let px: Vec<u8> = f.values().iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    let mut out = format!("{}\n{width} {height}\n255\n", if binary { "P5" } else { "P2" }).into_bytes();
    if binary {
        out.extend_from_slice(&px);
    } else {
        for row in px.chunks(*width) {
            let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
            out.extend_from_slice(line.join(" ").as_bytes());
            out.push(b'\n');
        }
    }
    Ok(out)
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

/// Reads a field from `path`: PGM by extension, CSV otherwise.
pub fn read_field(path: &Path, sidecar: Option<&Path>) -> Result<ScalarField> {
    if is_pgm(path) {
        let mut data = Vec::new();
        File::open(path)?.read_to_end(&mut data)?;
        let img = decode_pgm(&data)?;
        return match sidecar {
            Some(s) => img.with_spacing(FieldMeta::read_json(s)?.spacing),
            None => Ok(img),
        };
    }
    let meta = sidecar.map(FieldMeta::read_json).transpose()?;
    read_csv(BufReader::new(File::open(path)?), meta.as_ref())
}

/// Writes a field to `path`: binary PGM by extension, CSV otherwise.
pub fn write_field(path: &Path, f: &ScalarField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    if is_pgm(path) {
        w.write_all(&encode_pgm(f, true)?)?;
    } else {
        write_csv(f, &mut w)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a mask: any nonzero sample is `true`.
pub fn read_mask(path: &Path, sidecar: Option<&Path>) -> Result<BinaryMask> {
    let f = read_field(path, sidecar)?;
    BinaryMask::new(f.dims().to_vec(), f.values().iter().map(|&v| v != 0.0).collect())
}

/// Writes a mask as 0/255 (PGM) or 0/1 (CSV).
pub fn write_mask(path: &Path, m: &BinaryMask) -> Result<()> {
    let on = if is_pgm(path) { 255.0 } else { 1.0 };
    let f = ScalarField::new(
        m.dims().to_vec(),
        1.0,
        m.bits().iter().map(|&b| if b { on } else { 0.0 }).collect(),
    )?;
    write_field(path, &f)
}
