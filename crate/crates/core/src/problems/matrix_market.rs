//! Dense reader for Matrix Market files (coordinate and array layouts).

use std::io::BufRead;
use std::path::Path;

use faer::Mat;
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::linalg::CMat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
    Integer,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("matrix market line {line}: {msg}"))
}

pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<CMat> {
    let f = std::fs::File::open(path.as_ref())?;
    read_matrix_market(std::io::BufReader::new(f))
}

pub fn read_matrix_market(reader: impl BufRead) -> Result<CMat> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(
            1,
            "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'",
        ));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        t => return Err(parse_err(1, format!("unknown layout '{t}'"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "complex" => Field::Complex,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        t => return Err(parse_err(1, format!("unknown field '{t}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        t => return Err(parse_err(1, format!("unknown symmetry '{t}'"))),
    };
    if layout == Layout::Array && field == Field::Pattern {
        return Err(parse_err(1, "pattern field requires coordinate layout"));
    }

    let mut data = lines.filter_map(|(i, l)| match l {
        Ok(s) => {
            let t = s.trim().to_string();
            (!t.is_empty() && !t.starts_with('%')).then_some(Ok((i + 1, t)))
        }
        Err(e) => Some(Err(e)),
    });

    let (size_line, size) = data
        .next()
        .ok_or_else(|| parse_err(2, "missing size line"))??;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(size_line, format!("bad size entry '{t}'")))
        })
        .collect::<Result<_>>()?;

    let parse_value = |line: usize, toks: &[&str]| -> Result<c64> {
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| parse_err(line, format!("bad number '{t}'")))
        };
        match field {
            Field::Pattern => Ok(c64::new(1.0, 0.0)),
            Field::Real | Field::Integer => {
                if toks.len() != 1 {
                    return Err(parse_err(line, "expected one value"));
                }
                Ok(c64::new(num(toks[0])?, 0.0))
            }
            Field::Complex => {
                if toks.len() != 2 {
                    return Err(parse_err(line, "expected two values (re im)"));
                }
                Ok(c64::new(num(toks[0])?, num(toks[1])?))
            }
        }
    };

    let mirror = |a: &mut CMat, i: usize, j: usize, v: c64| {
        a[(i, j)] = v;
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => a[(j, i)] = v,
                Symmetry::SkewSymmetric => a[(j, i)] = -v,
                Symmetry::Hermitian => a[(j, i)] = v.conj(),
            }
        }
    };

    match layout {
        Layout::Coordinate => {
            if dims.len() != 3 {
                return Err(parse_err(
                    size_line,
                    "coordinate size line needs rows cols nnz",
                ));
            }
            let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);
            if symmetry != Symmetry::General && rows != cols {
                return Err(parse_err(
                    size_line,
                    "symmetric storage requires a square matrix",
                ));
            }
            let mut a = Mat::zeros(rows, cols);
            let mut count = 0;
            for entry in data {
                let (line, text) = entry?;
                let toks: Vec<&str> = text.split_whitespace().collect();
                if toks.len() < 2 {
                    return Err(parse_err(line, "expected row and column indices"));
                }
                let i: usize = toks[0]
                    .parse()
                    .map_err(|_| parse_err(line, "bad row index"))?;
                let j: usize = toks[1]
                    .parse()
                    .map_err(|_| parse_err(line, "bad column index"))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(line, format!("index ({i}, {j}) out of range")));
                }
                let v = parse_value(line, &toks[2..])?;
                mirror(&mut a, i - 1, j - 1, v);
                count += 1;
            }
            if count != nnz {
                return Err(Error::Parse(format!(
                    "expected {nnz} entries, found {count}"
                )));
            }
            Ok(a)
        }
        Layout::Array => {
            if dims.len() != 2 {
                return Err(parse_err(size_line, "array size line needs rows cols"));
            }
            let (rows, cols) = (dims[0], dims[1]);
            if symmetry != Symmetry::General && rows != cols {
                return Err(parse_err(
                    size_line,
                    "symmetric storage requires a square matrix",
                ));
            }
            // column-major; symmetric variants store the lower triangle only
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| (0..rows).map(move |i| (i, j)))
                .filter(|&(i, j)| match symmetry {
                    Symmetry::General => true,
                    Symmetry::SkewSymmetric => i > j,
                    _ => i >= j,
                })
                .collect();
            let mut a = Mat::zeros(rows, cols);
            let mut k = 0;
            for entry in data {
                let (line, text) = entry?;
                let toks: Vec<&str> = text.split_whitespace().collect();
                let v = parse_value(line, &toks)?;
                let &(i, j) = positions
                    .get(k)
                    .ok_or_else(|| parse_err(line, "more values than the declared size"))?;
                mirror(&mut a, i, j, v);
                k += 1;
            }
            if k != positions.len() {
                return Err(Error::Parse(format!(
                    "expected {} values, found {k}",
                    positions.len()
                )));
            }
            Ok(a)
        }
    }
}
