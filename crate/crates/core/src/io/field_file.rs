//! Value-field files.
//!
//! Layout: the magic line `HJVF1`, then decimal text lines
//! `<dims>`, one `<min> <max> <count> <periodic 0|1>` line per axis,
//! `<stamp count>`, one stamp per line, followed by the slices as
//! little-endian `f32` in row-major order and stamp order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Axis, GridSpec};
use crate::hjsolver::ValueField;

pub const MAGIC: &[u8] = b"HJVF1\n";

pub fn write_field_to(field: &ValueField, w: &mut impl Write) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    let grid = field.grid();
    writeln!(w, "{}", grid.dim())?;
    for a in grid.axes() {
        writeln!(w, "{:?} {:?} {} {}", a.min, a.max, a.count, u8::from(a.periodic))?;
    }
    writeln!(w, "{}", field.stamps().len())?;
    for s in field.stamps() {
        writeln!(w, "{s:?}")?;
    }
    for v in field.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_field(field: &ValueField, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_field_to(field, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn fail<T>(&self, reason: impl Into<String>) -> Result<T> {
        Err(Error::FieldFormat {
            offset: self.pos as u64,
            reason: reason.into(),
        })
    }

    fn line(&mut self) -> Result<&str> {
        let rest = &self.bytes[self.pos..];
        let Some(end) = rest.iter().position(|&b| b == b'\n') else {
            return self.fail("unterminated header line");
        };
        let text = match std::str::from_utf8(&rest[..end]) {
            Ok(t) => t,
            Err(_) => return self.fail("header line is not UTF-8"),
        };
        self.pos += end + 1;
        Ok(text)
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let start = self.pos;
        let text = self.line()?.trim().to_owned();
        text.parse().or_else(|_| {
            Err(Error::FieldFormat {
                offset: start as u64,
                reason: format!("bad {what}: {text:?}"),
            })
        })
    }
}

/// Grid, stamps and header length of a field image.
fn parse_header(bytes: &[u8]) -> Result<(GridSpec, Vec<f64>, usize)> {
    let mut c = Cursor { bytes, pos: 0 };
    if !bytes.starts_with(MAGIC) {
        return c.fail("missing HJVF1 magic");
    }
    c.pos = MAGIC.len();
    let dims: usize = c.parse("dimension count")?;
    if dims == 0 || dims > 8 {
        return c.fail(format!("unsupported dimension count {dims}"));
    }
    let mut axes = Vec::with_capacity(dims);
    for k in 0..dims {
        let start = c.pos;
        let line = c.line()?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bad = |reason: String| Error::FieldFormat {
            offset: start as u64,
            reason,
        };
        if parts.len() != 4 {
            return Err(bad(format!("axis {k}: expected 4 fields, got {}", parts.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("axis {k}: bad number {s:?}")));
        let count = parts[2].parse::<usize>().map_err(|_| bad(format!("axis {k}: bad count {:?}", parts[2])))?;
        let periodic = match parts[3] {
            "0" => false,
            "1" => true,
            other => return Err(bad(format!("axis {k}: bad periodic flag {other:?}"))),
        };
        axes.push(Axis {
            min: num(parts[0])?,
            max: num(parts[1])?,
            count,
            periodic,
        });
    }
    let grid_offset = c.pos;
    let grid = GridSpec::for_storage(axes).map_err(|e| Error::FieldFormat {
        offset: grid_offset as u64,
        reason: e.to_string(),
    })?;
    let count: usize = c.parse("stamp count")?;
    let mut stamps = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        stamps.push(c.parse::<f64>("stamp")?);
    }
    Ok((grid, stamps, c.pos))
}

/// Parses a complete field file image.
pub fn parse_field(bytes: &[u8]) -> Result<ValueField> {
    let (grid, stamps, header) = parse_header(bytes)?;
    let expected = grid
        .len()
        .checked_mul(stamps.len())
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(header));
    let Some(expected) = expected else {
        return Err(Error::FieldFormat {
            offset: header as u64,
            reason: "field size overflows".into(),
        });
    };
    if bytes.len() != expected {
        return Err(Error::FieldFormat {
            offset: bytes.len().min(expected) as u64,
            reason: format!("expected {expected} bytes, file has {}", bytes.len()),
        });
    }
    let data: Vec<f32> = bytes[header..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    ValueField::new(grid, stamps, data).map_err(|e| Error::FieldFormat {
        offset: header as u64,
        reason: e.to_string(),
    })
}

pub fn read_field(path: &Path) -> Result<ValueField> {
    let mut bytes = Vec::new();
    File::open(path)
        .map(BufReader::new)
        .and_then(|mut r| r.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    parse_field(&bytes)
}

/// Grid, stamps and file size of a field file, reading only the header.
pub fn read_header(path: &Path) -> Result<(GridSpec, Vec<f64>, u64)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let size = file.metadata().map_err(|e| Error::io(path, e))?.len();
    let mut r = BufReader::new(file);
    let mut bytes = Vec::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = r.read(&mut buf).map_err(|e| Error::io(path, e))?;
        bytes.extend_from_slice(&buf[..n]);
        match parse_header(&bytes) {
            Ok((grid, stamps, _)) => return Ok((grid, stamps, size)),
            Err(e) if n == 0 => return Err(e),
            Err(_) => {}
        }
    }
}
