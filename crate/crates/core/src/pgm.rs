//! Binary PGM (P5, 8-bit) reading and writing.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Raw 8-bit raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

fn next_token<'a>(data: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() && data[*pos] != b'#' {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Parse("truncated PGM header".into()));
    }
    Ok(&data[start..*pos])
}

fn header_number(data: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(data, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| Error::Parse(format!("bad PGM {what}")))
}

pub fn decode(data: &[u8]) -> Result<Raster> {
    let mut pos = 0;
    if next_token(data, &mut pos)? != b"P5" {
        return Err(Error::Parse("not a binary PGM (P5)".into()));
    }
    let width = header_number(data, &mut pos, "width")?;
    let height = header_number(data, &mut pos, "height")?;
    let maxval = header_number(data, &mut pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Parse("PGM has zero size".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Parse(format!("unsupported PGM maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= data.len() || !data[pos].is_ascii_whitespace() {
        return Err(Error::Parse("truncated PGM header".into()));
    }
    pos += 1;
    let n = width * height;
    if data.len() - pos < n {
        return Err(Error::Parse(format!(
            "PGM raster has {} bytes, expected {n}",
            data.len() - pos
        )));
    }
    Ok(Raster { width, height, pixels: data[pos..pos + n].to_vec() })
}

pub fn encode(r: &Raster) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", r.width, r.height).into_bytes();
    out.extend_from_slice(&r.pixels);
    out
}

pub fn read(path: &Path) -> Result<Raster> {
    let data = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    decode(&data)
}

pub fn write(path: &Path, r: &Raster) -> Result<()> {
    fs::write(path, encode(r)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
