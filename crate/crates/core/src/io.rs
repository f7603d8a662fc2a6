//! Line-oriented problem files.
//!
//! ```text
//! MLPR 1
//! n <integer>
//! alpha <decimal>          (optional)
//! v <n decimals>
//! <row 1 of R: n² decimals, column c = k*n + j holds P[i][j][k]>
//! ...
//! <row n of R>
//! ```
//!
//! Numbers are written with 17 significant digits, which reproduces every
//! `f64` exactly on reparse.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tensor::{check_alpha, check_teleportation, FlattenedTensor, ProblemInstance};

pub const MAGIC: &str = "MLPR";
pub const VERSION: &str = "1";

/// Parsed contents of a problem file. `alpha` is optional in the format.
#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub tensor: Arc<FlattenedTensor>,
    pub alpha: Option<f64>,
    pub v: Vec<f64>,
}

impl ProblemFile {
    /// Builds the instance, preferring `alpha_override` over the stored value.
    pub fn into_instance(self, alpha_override: Option<f64>) -> Result<ProblemInstance> {
        let alpha =
            alpha_override.or(self.alpha).ok_or_else(|| Error::InvalidConfig("no alpha in problem file or on the command line".into()))?;
        ProblemInstance::new(self.tensor, alpha, self.v)
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_row<W: Write>(out: &mut W, values: &[f64]) -> std::io::Result<()> {
    let mut first = true;
    for &x in values {
        if !first {
            out.write_all(b" ")?;
        }
        first = false;
        out.write_all(fmt_f64(x).as_bytes())?;
    }
    out.write_all(b"\n")
}

/// Writes `inst` including its alpha.
pub fn write_problem<W: Write>(inst: &ProblemInstance, out: W) -> Result<()> {
    write_parts(inst.tensor(), Some(inst.alpha()), inst.v(), out)
}

pub fn write_parts<W: Write>(tensor: &FlattenedTensor, alpha: Option<f64>, v: &[f64], out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{MAGIC} {VERSION}")?;
    writeln!(out, "n {}", tensor.n())?;
    if let Some(a) = alpha {
        writeln!(out, "alpha {}", fmt_f64(a))?;
    }
    out.write_all(b"v ")?;
    write_row(&mut out, v)?;
    for i in 0..tensor.n() {
        write_row(&mut out, tensor.row(i))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_problem_to_path(inst: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    write_problem(inst, File::create(path)?)
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self, what: &str) -> Result<String> {
        self.number += 1;
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(parse_err(self.number, format!("expected {what}, found end of file"))),
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_numbers(line_no: usize, tokens: &[&str], expected: usize, what: &str) -> Result<Vec<f64>> {
    if tokens.len() != expected {
        return Err(parse_err(line_no, format!("{what}: expected {expected} values, found {}", tokens.len())));
    }
    tokens
        .iter()
        .enumerate()
        .map(|(col, tok)| match tok.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(parse_err(line_no, format!("{what}: value {} ('{tok}') is not a finite decimal", col + 1))),
        })
        .collect()
}

fn keyword_line<'a>(line_no: usize, line: &'a str, keyword: &str) -> Result<Vec<&'a str>> {
    let mut tokens = line.split_whitespace();
    match tokens.next() {
        Some(k) if k == keyword => Ok(tokens.collect()),
        Some(k) => Err(parse_err(line_no, format!("expected '{keyword}', found '{k}'"))),
        None => Err(parse_err(line_no, format!("expected '{keyword}', found an empty line"))),
    }
}

pub fn parse_problem<R: BufRead>(reader: R) -> Result<ProblemFile> {
    let mut lines = Lines { inner: reader.lines(), number: 0 };

    let header = lines.next_line("header")?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens != [MAGIC, VERSION] {
        return Err(parse_err(1, format!("expected '{MAGIC} {VERSION}', found '{}'", header.trim())));
    }

    let line = lines.next_line("'n <integer>'")?;
    let tokens = keyword_line(lines.number, &line, "n")?;
    let n = match tokens.as_slice() {
        [tok] => tok.parse::<usize>().ok().filter(|&n| n > 0),
        _ => None,
    }
    .ok_or_else(|| parse_err(lines.number, "expected 'n <positive integer>'"))?;

    let mut line = lines.next_line("'alpha' or 'v' line")?;
    let mut alpha = None;
    if line.split_whitespace().next() == Some("alpha") {
        let tokens = keyword_line(lines.number, &line, "alpha")?;
        let a = parse_numbers(lines.number, &tokens, 1, "alpha")?[0];
        check_alpha(a).map_err(|e| parse_err(lines.number, e.to_string()))?;
        alpha = Some(a);
        line = lines.next_line("'v' line")?;
    }
    let tokens = keyword_line(lines.number, &line, "v")?;
    let v = parse_numbers(lines.number, &tokens, n, "v")?;
    let v_line = lines.number;

    let nn = n * n;
    let mut data = Vec::with_capacity(n * nn);
    for i in 0..n {
        let line = lines.next_line(&format!("row {} of R", i + 1))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        data.extend(parse_numbers(lines.number, &tokens, nn, &format!("row {} of R", i + 1))?);
    }
    for extra in lines.inner.by_ref() {
        lines.number += 1;
        if !extra?.trim().is_empty() {
            return Err(parse_err(lines.number, "unexpected content after the last row of R"));
        }
    }

    let tensor = FlattenedTensor::from_row_major(n, data).map_err(|e| match e {
        Error::NegativeEntry { row, column, value } => {
            parse_err(v_line + 1 + row, format!("negative entry {value} in column {}", column + 1))
        }
        other => other,
    })?;
    check_teleportation(n, &v)?;
    Ok(ProblemFile { tensor: Arc::new(tensor), alpha, v })
}

pub fn parse_problem_str(text: &str) -> Result<ProblemFile> {
    parse_problem(text.as_bytes())
}

pub fn read_problem(path: impl AsRef<Path>) -> Result<ProblemFile> {
    parse_problem(BufReader::new(File::open(path)?))
}
