//! Text formats for payoff matrices.
//!
//! Dense: a header line `n m` followed by `n` lines of `m` decimals.
//! Sparse: a header line `n m nnz` followed by `nnz` lines `i j value`
//! with 0-based indices.

use std::fmt::Write as _;

use super::PayoffMatrix;
use crate::error::{Error, Result};

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Non-blank lines, each split into tokens carrying 1-based positions.
fn tokenize(input: &str) -> Vec<Vec<Token<'_>>> {
    input
        .lines()
        .enumerate()
        .map(|(ln, text)| {
            let mut tokens = Vec::new();
            let mut start = None;
            for (pos, ch) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
                match (ch.is_whitespace(), start) {
                    (true, Some(s)) => {
                        tokens.push(Token {
                            text: &text[s..pos],
                            line: ln + 1,
                            column: s + 1,
                        });
                        start = None;
                    }
                    (false, None) => start = Some(pos),
                    _ => {}
                }
            }
            tokens
        })
        .filter(|t| !t.is_empty())
        .collect()
}

fn parse_usize(tok: &Token<'_>, what: &str) -> Result<usize> {
    tok.text
        .parse()
        .map_err(|_| parse_error(tok.line, tok.column, format!("expected {what}, found `{}`", tok.text)))
}

fn parse_entry(tok: &Token<'_>) -> Result<f64> {
    let v: f64 = tok
        .text
        .parse()
        .map_err(|_| parse_error(tok.line, tok.column, format!("expected a number, found `{}`", tok.text)))?;
    if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
        return Err(parse_error(
            tok.line,
            tok.column,
            format!("entry {v} lies outside [-1, 1]"),
        ));
    }
    Ok(v)
}

fn expect_len(line: &[Token<'_>], want: usize, what: &str) -> Result<()> {
    if line.len() == want {
        return Ok(());
    }
    let (ln, col) = match line.get(want) {
        Some(extra) => (extra.line, extra.column),
        None => {
            let last = line.last().expect("lines are non-empty");
            (last.line, last.column + last.text.len())
        }
    };
    Err(parse_error(
        ln,
        col,
        format!("{what}: expected {want} fields, found {}", line.len()),
    ))
}

fn header<'a, 'b>(lines: &'b [Vec<Token<'a>>]) -> Result<&'b [Token<'a>]> {
    lines
        .first()
        .map(Vec::as_slice)
        .ok_or_else(|| parse_error(1, 1, "empty input"))
}

fn dims(tokens: &[Token<'_>]) -> Result<(usize, usize)> {
    let n = parse_usize(&tokens[0], "a row count")?;
    let m = parse_usize(&tokens[1], "a column count")?;
    if n == 0 || m == 0 {
        return Err(parse_error(tokens[0].line, tokens[0].column, "dimensions must be positive"));
    }
    Ok((n, m))
}

/// Parses the dense format.
pub fn parse_dense(input: &str) -> Result<PayoffMatrix> {
    let lines = tokenize(input);
    let head = header(&lines)?;
    expect_len(head, 2, "dense header `n m`")?;
    let (n, m) = dims(head)?;
    let body = &lines[1..];
    if body.len() != n {
        let (ln, col) = body.get(n).map_or((head[0].line + body.len() + 1, 1), |l| (l[0].line, 1));
        return Err(parse_error(ln, col, format!("expected {n} rows, found {}", body.len())));
    }
    let mut entries = Vec::with_capacity(n * m);
    for line in body {
        expect_len(line, m, "matrix row")?;
        for tok in line {
            entries.push(parse_entry(tok)?);
        }
    }
    PayoffMatrix::from_dense(n, m, entries)
}

/// Parses the sparse coordinate format.
pub fn parse_sparse(input: &str) -> Result<PayoffMatrix> {
    let lines = tokenize(input);
    let head = header(&lines)?;
    expect_len(head, 3, "sparse header `n m nnz`")?;
    let (n, m) = dims(head)?;
    let nnz = parse_usize(&head[2], "a nonzero count")?;
    let body = &lines[1..];
    if body.len() != nnz {
        let (ln, col) = body.get(nnz).map_or((head[0].line + body.len() + 1, 1), |l| (l[0].line, 1));
        return Err(parse_error(ln, col, format!("expected {nnz} entries, found {}", body.len())));
    }
    let mut triplets = Vec::with_capacity(nnz);
    let mut seen = std::collections::HashSet::with_capacity(nnz);
    for line in body {
        expect_len(line, 3, "sparse entry `i j value`")?;
        let i = parse_usize(&line[0], "a row index")?;
        let j = parse_usize(&line[1], "a column index")?;
        if i >= n {
            return Err(parse_error(line[0].line, line[0].column, format!("row {i} out of range 0..{n}")));
        }
        if j >= m {
            return Err(parse_error(line[1].line, line[1].column, format!("column {j} out of range 0..{m}")));
        }
        if !seen.insert((i, j)) {
            return Err(parse_error(line[0].line, line[0].column, format!("duplicate entry ({i}, {j})")));
        }
        triplets.push((i, j, parse_entry(&line[2])?));
    }
    PayoffMatrix::from_triplets(n, m, &triplets)
}

/// Picks the format from the header field count: two fields dense, three sparse.
pub fn parse_matrix(input: &str) -> Result<PayoffMatrix> {
    let lines = tokenize(input);
    match lines.first().map(Vec::len) {
        Some(3) => parse_sparse(input),
        Some(_) => parse_dense(input),
        None => Err(parse_error(1, 1, "empty input")),
    }
}

/// Writes the dense format. Numbers use the shortest exact round-trip form.
pub fn write_dense(a: &PayoffMatrix) -> String {
    let mut out = format!("{} {}\n", a.rows(), a.cols());
    for row in a.materialize() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// Writes the sparse coordinate format in row-major order.
pub fn write_sparse(a: &PayoffMatrix) -> String {
    let dense = a.materialize();
    let entries: Vec<(usize, usize, f64)> = dense
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(move |(j, &v)| (i, j, v))
        })
        .collect();
    let mut out = format!("{} {} {}\n", a.rows(), a.cols(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{i} {j} {v:?}");
    }
    out
}
