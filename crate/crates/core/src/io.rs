//! Instance files.
//!
//! Text: a header `CQK1 <n>` followed by the values of `d a b l u r`, or
//! `SPX1 <n> <r>` followed by `y`, whitespace separated, infinities as
//! `inf`/`-inf`. Values are printed in shortest round-trip form.
//!
//! Binary: magic `CQKB` or `SPXB`, the length as a little-endian `u64`, then
//! little-endian `f64` values in the order `d a b l u r` or `r y`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{CqkError, Result};
use crate::problem::{CqkInstance, SimplexInstance};

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceFile {
    Cqk(CqkInstance<f64>),
    Simplex(SimplexInstance<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Binary,
}

impl From<CqkInstance<f64>> for InstanceFile {
    fn from(i: CqkInstance<f64>) -> Self {
        InstanceFile::Cqk(i)
    }
}

impl From<SimplexInstance<f64>> for InstanceFile {
    fn from(i: SimplexInstance<f64>) -> Self {
        InstanceFile::Simplex(i)
    }
}

fn parse_err(msg: impl Into<String>) -> CqkError {
    CqkError::Parse(msg.into())
}

fn write_line(w: &mut impl Write, v: &[f64]) -> Result<()> {
    let mut first = true;
    for x in v {
        if !first {
            w.write_all(b" ")?;
        }
        write!(w, "{x}")?;
        first = false;
    }
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_text(inst: &InstanceFile, w: &mut impl Write) -> Result<()> {
    match inst {
        InstanceFile::Cqk(c) => {
            writeln!(w, "CQK1 {}", c.len())?;
            for v in [c.d(), c.a(), c.b(), c.l(), c.u()] {
                write_line(w, v)?;
            }
            writeln!(w, "{}", c.r())?;
        }
        InstanceFile::Simplex(s) => {
            writeln!(w, "SPX1 {} {}", s.len(), s.r())?;
            write_line(w, s.y())?;
        }
    }
    Ok(())
}

struct Tokens<'a>(std::str::SplitAsciiWhitespace<'a>);

impl Tokens<'_> {
    fn next<F: std::str::FromStr>(&mut self, what: &str) -> Result<F>
    where
        F::Err: std::fmt::Display,
    {
        let t = self
            .0
            .next()
            .ok_or_else(|| parse_err(format!("unexpected end of data in {what}")))?;
        t.parse::<F>()
            .map_err(|e| parse_err(format!("bad value `{t}` in {what}: {e}")))
    }

    fn vec(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        (0..n).map(|_| self.next(what)).collect()
    }

    fn finish(mut self) -> Result<()> {
        match self.0.next() {
            Some(_) => Err(parse_err("trailing data")),
            None => Ok(()),
        }
    }
}

pub fn read_text(mut r: impl BufRead) -> Result<InstanceFile> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut tok = Tokens(text.split_ascii_whitespace());
    let magic: String = tok.next("header")?;
    let n: usize = tok.next("length")?;
    let inst = match magic.as_str() {
        "CQK1" => {
            let d = tok.vec(n, "d")?;
            let a = tok.vec(n, "a")?;
            let b = tok.vec(n, "b")?;
            let l = tok.vec(n, "l")?;
            let u = tok.vec(n, "u")?;
            let rhs = tok.next("r")?;
            InstanceFile::Cqk(CqkInstance::new(d, a, b, l, u, rhs)?)
        }
        "SPX1" => {
            let rhs = tok.next("r")?;
            let y = tok.vec(n, "y")?;
            InstanceFile::Simplex(SimplexInstance::new(y, rhs)?)
        }
        other => return Err(parse_err(format!("unknown header `{other}`"))),
    };
    tok.finish()?;
    Ok(inst)
}

fn put(w: &mut impl Write, v: &[f64]) -> Result<()> {
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_binary(inst: &InstanceFile, w: &mut impl Write) -> Result<()> {
    match inst {
        InstanceFile::Cqk(c) => {
            w.write_all(b"CQKB")?;
            w.write_all(&(c.len() as u64).to_le_bytes())?;
            for v in [c.d(), c.a(), c.b(), c.l(), c.u(), &[c.r()]] {
                put(w, v)?;
            }
        }
        InstanceFile::Simplex(s) => {
            w.write_all(b"SPXB")?;
            w.write_all(&(s.len() as u64).to_le_bytes())?;
            put(w, &[s.r()])?;
            put(w, s.y())?;
        }
    }
    Ok(())
}

fn take(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)
        .map_err(|_| parse_err("binary file is truncated"))?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn read_binary(mut r: impl Read) -> Result<InstanceFile> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| parse_err("missing magic"))?;
    let mut len = [0u8; 8];
    r.read_exact(&mut len).map_err(|_| parse_err("missing length"))?;
    let n = usize::try_from(u64::from_le_bytes(len)).map_err(|_| parse_err("length overflow"))?;
    let inst = match &magic {
        b"CQKB" => {
            let d = take(&mut r, n)?;
            let a = take(&mut r, n)?;
            let b = take(&mut r, n)?;
            let l = take(&mut r, n)?;
            let u = take(&mut r, n)?;
            let rhs = take(&mut r, 1)?[0];
            InstanceFile::Cqk(CqkInstance::new(d, a, b, l, u, rhs)?)
        }
        b"SPXB" => {
            let rhs = take(&mut r, 1)?[0];
            let y = take(&mut r, n)?;
            InstanceFile::Simplex(SimplexInstance::new(y, rhs)?)
        }
        _ => return Err(parse_err("unknown binary magic")),
    };
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(parse_err("trailing data"));
    }
    Ok(inst)
}

/// Reads either format, detected from the first four bytes.
pub fn read_path(path: impl AsRef<Path>) -> Result<InstanceFile> {
    let mut f = BufReader::new(File::open(path)?);
    let head = f.fill_buf()?;
    if head.starts_with(b"CQKB") || head.starts_with(b"SPXB") {
        read_binary(f)
    } else {
        read_text(f)
    }
}

pub fn write_path(inst: &InstanceFile, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        Format::Text => write_text(inst, &mut w)?,
        Format::Binary => write_binary(inst, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

/// Reads a plain whitespace-separated vector (used for warm-start files).
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    text.split_ascii_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| parse_err(format!("bad value `{t}`: {e}"))))
        .collect()
}

pub fn write_vector(v: &[f64], w: &mut impl Write) -> Result<()> {
    for x in v {
        writeln!(w, "{x}")?;
    }
    Ok(())
}
