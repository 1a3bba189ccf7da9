//! Plain-text serialization of surrogate models and QUBOs.
//!
//! Model file:
//!
//! ```text
//! n 3
//! k 2
//! w0 0.5
//! w 1 -2 0.25
//! v 0.1 0.2
//! v 0.3 0.4
//! v 0.5 0.6
//! ```
//!
//! One `v` line per variable (the rows of the `n x k` latent matrix).
//!
//! QUBO file: `n` and `offset` header lines, then one `i j value` line per
//! non-zero upper-triangular coefficient (`i <= j`).
//!
//! Blank lines and lines starting with `#` are ignored. Floats use the
//! shortest round-trip form, so both formats reload exactly.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use trcopt_core::{FmModel, Qubo};

use crate::error::{Error, Result};

struct Lines<'a> {
    path: &'a Path,
    inner: Box<dyn Iterator<Item = (u64, &'a str)> + 'a>,
    last: u64,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        let inner = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i as u64 + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        Self { path, inner: Box::new(inner), last: 0 }
    }

    /// Next line, which must start with `key`; returns its remaining fields.
    fn keyed(&mut self, key: &str) -> Result<(u64, Vec<&'a str>)> {
        let (line, text) = self.next_line(key)?;
        let mut fields = text.split_whitespace();
        if fields.next() != Some(key) {
            return Err(Error::parse(self.path, line, format!("expected `{key}` line")));
        }
        Ok((line, fields.collect()))
    }

    fn next_line(&mut self, what: &str) -> Result<(u64, &'a str)> {
        match self.inner.next() {
            Some(l) => {
                self.last = l.0;
                Ok(l)
            }
            None => Err(Error::parse(self.path, self.last + 1, format!("unexpected end of file, expected `{what}`"))),
        }
    }

    fn single<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (line, fields) = self.keyed(key)?;
        match fields.as_slice() {
            [v] => v.parse().map_err(|_| Error::parse(self.path, line, format!("invalid {key} value {v:?}"))),
            _ => Err(Error::parse(self.path, line, format!("`{key}` takes exactly one value"))),
        }
    }

    fn floats(&self, line: u64, fields: &[&str], expected: usize) -> Result<Vec<f64>> {
        if fields.len() != expected {
            return Err(Error::parse(self.path, line, format!("expected {expected} values, found {}", fields.len())));
        }
        fields
            .iter()
            .map(|f| f.parse().map_err(|_| Error::parse(self.path, line, format!("invalid number {f:?}"))))
            .collect()
    }

    fn finish(&mut self) -> Result<()> {
        match self.inner.next() {
            Some((line, _)) => Err(Error::parse(self.path, line, "trailing content")),
            None => Ok(()),
        }
    }
}

fn read_text(mut reader: impl Read, path: &Path) -> Result<String> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| Error::io(path, e))?;
    Ok(text)
}

fn join(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v}").unwrap();
    }
    s
}

pub fn write_model(mut w: impl Write, m: &FmModel, path: &Path) -> Result<()> {
    let mut out = format!("n {}\nk {}\nw0 {}\nw {}\n", m.n(), m.k(), m.w0, join(&m.w));
    for i in 0..m.n() {
        writeln!(out, "v {}", join(m.latent_row(i))).unwrap();
    }
    w.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_model(reader: impl Read, path: &Path) -> Result<FmModel> {
    let text = read_text(reader, path)?;
    let mut lines = Lines::new(path, &text);
    let n: usize = lines.single("n")?;
    let k: usize = lines.single("k")?;
    let w0: f64 = lines.single("w0")?;
    let (line, fields) = lines.keyed("w")?;
    let w = lines.floats(line, &fields, n)?;
    let mut v = Vec::with_capacity(n * k);
    for _ in 0..n {
        let (line, fields) = lines.keyed("v")?;
        v.extend(lines.floats(line, &fields, k)?);
    }
    lines.finish()?;
    FmModel::from_parts(n, k, w0, w, v).map_err(|e| Error::parse(path, 1, e.to_string()))
}

pub fn write_qubo(mut w: impl Write, q: &Qubo, path: &Path) -> Result<()> {
    let mut out = format!("n {}\noffset {}\n", q.n(), q.offset());
    for (i, j, value) in q.entries() {
        writeln!(out, "{i} {j} {value}").unwrap();
    }
    w.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_qubo(reader: impl Read, path: &Path) -> Result<Qubo> {
    let text = read_text(reader, path)?;
    let mut lines = Lines::new(path, &text);
    let n: usize = lines.single("n")?;
    let offset: f64 = lines.single("offset")?;
    let mut q = Qubo::zeros(n);
    q.set_offset(offset);
    let mut seen = std::collections::HashSet::new();
    for (line, text) in lines.inner.by_ref() {
        let fields: Vec<&str> = text.split_whitespace().collect();
        let [i, j, value] = fields.as_slice() else {
            return Err(Error::parse(path, line, "expected `i j value`"));
        };
        let index = |f: &str| {
            f.parse::<usize>()
                .ok()
                .filter(|&x| x < n)
                .ok_or_else(|| Error::parse(path, line, format!("index {f:?} out of range for n = {n}")))
        };
        let (i, j) = (index(i)?, index(j)?);
        if i > j {
            return Err(Error::parse(path, line, format!("entry ({i}, {j}) is below the diagonal")));
        }
        if !seen.insert((i, j)) {
            return Err(Error::parse(path, line, format!("duplicate entry ({i}, {j})")));
        }
        let value: f64 = value
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::parse(path, line, format!("invalid coefficient {value:?}")))?;
        q.set(i, j, value);
    }
    Ok(q)
}
