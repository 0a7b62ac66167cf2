//! Matrix Market reader and writer for dense complex matrices.
//!
//! Supported: `coordinate` and `array` layouts; `real`, `integer` and
//! `complex` fields; `general`, `symmetric`, `skew-symmetric` and
//! `hermitian` symmetry. `pattern` matrices are rejected.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numeric::{c64, Complex64, ComplexMatrix, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix_market(&text)
}

pub fn parse_matrix_market(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let (layout, field, sym) = parse_header(hline, header)?;

    // skip comments and blank lines
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (sline, size) = body.next().ok_or_else(|| parse_err(hline + 1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| parse_err(sline, format!("bad size token '{t}'"))))
        .collect::<Result<_>>()?;
    let want = if layout == Layout::Coordinate { 3 } else { 2 };
    if dims.len() != want {
        return Err(parse_err(sline, format!("size line needs {want} integers, got {}", dims.len())));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if sym != Symmetry::General && rows != cols {
        return Err(parse_err(sline, "symmetric storage requires a square matrix"));
    }

    let mut m = ComplexMatrix::zeros(rows, cols);
    let set = |m: &mut ComplexMatrix, i: usize, j: usize, v: Complex64| {
        m[(i, j)] += v;
        if i != j {
            match sym {
                Symmetry::General => {}
                Symmetry::Symmetric => m[(j, i)] += v,
                Symmetry::SkewSymmetric => m[(j, i)] -= v,
                Symmetry::Hermitian => m[(j, i)] += v.conj(),
            }
        }
    };

    match layout {
        Layout::Coordinate => {
            let nnz = dims[2];
            let mut seen = 0;
            for (ln, l) in body {
                if seen == nnz {
                    return Err(parse_err(ln, format!("more than the declared {nnz} entries")));
                }
                let toks: Vec<&str> = l.split_whitespace().collect();
                let need = 2 + value_width(field);
                if toks.len() != need {
                    return Err(parse_err(ln, format!("expected {need} tokens, got {}", toks.len())));
                }
                let i = index(ln, toks[0], rows)?;
                let j = index(ln, toks[1], cols)?;
                check_triangle(ln, sym, i, j)?;
                let v = value(ln, field, &toks[2..])?;
                set(&mut m, i, j, v);
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(text.lines().count(), format!("declared {nnz} entries, found {seen}")));
            }
        }
        Layout::Array => {
            // column-major; lower triangle only for symmetric storage
            let mut slots = Vec::new();
            for j in 0..cols {
                let first = match sym {
                    Symmetry::General => 0,
                    Symmetry::SkewSymmetric => j + 1,
                    _ => j,
                };
                for i in first..rows {
                    slots.push((i, j));
                }
            }
            let mut it = slots.into_iter();
            for (ln, l) in body {
                let toks: Vec<&str> = l.split_whitespace().collect();
                let need = value_width(field);
                if toks.len() != need {
                    return Err(parse_err(ln, format!("expected {need} tokens, got {}", toks.len())));
                }
                let (i, j) = it
                    .next()
                    .ok_or_else(|| parse_err(ln, "more values than the matrix holds"))?;
                let v = value(ln, field, &toks)?;
                if sym == Symmetry::Hermitian && i == j && v.im != 0.0 {
                    return Err(parse_err(ln, "hermitian diagonal must be real"));
                }
                set(&mut m, i, j, v);
            }
            if it.next().is_some() {
                return Err(parse_err(text.lines().count(), "fewer values than the matrix holds"));
            }
        }
    }
    m.check_finite()?;
    Ok(m)
}

fn parse_header(ln: usize, header: &str) -> Result<(Layout, Field, Symmetry)> {
    let toks: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" {
        return Err(parse_err(ln, "header must read '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
    }
    if toks[1] != "matrix" {
        return Err(parse_err(ln, format!("unsupported object '{}'", toks[1])));
    }
    let layout = match toks[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(ln, format!("unknown layout '{other}'"))),
    };
    let field = match toks[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        "pattern" => return Err(parse_err(ln, "unsupported field 'pattern': values are required")),
        other => return Err(parse_err(ln, format!("unknown field '{other}'"))),
    };
    let sym = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(ln, format!("unknown symmetry '{other}'"))),
    };
    if sym == Symmetry::Hermitian && field != Field::Complex {
        return Err(parse_err(ln, "hermitian symmetry needs a complex field"));
    }
    Ok((layout, field, sym))
}

fn value_width(field: Field) -> usize {
    if field == Field::Complex {
        2
    } else {
        1
    }
}

fn index(ln: usize, tok: &str, bound: usize) -> Result<usize> {
    let i: usize = tok.parse().map_err(|_| parse_err(ln, format!("bad index '{tok}'")))?;
    if i == 0 || i > bound {
        return Err(parse_err(ln, format!("index {i} outside 1..={bound}")));
    }
    Ok(i - 1)
}

fn check_triangle(ln: usize, sym: Symmetry, i: usize, j: usize) -> Result<()> {
    match sym {
        Symmetry::General => Ok(()),
        Symmetry::SkewSymmetric if i <= j => Err(parse_err(ln, "skew-symmetric storage allows strictly lower entries only")),
        _ if i < j => Err(parse_err(ln, "symmetric storage allows lower-triangle entries only")),
        _ => Ok(()),
    }
}

fn value(ln: usize, field: Field, toks: &[&str]) -> Result<Complex64> {
    let num = |t: &str| -> Result<f64> {
        let x = match field {
            Field::Integer => t.parse::<i64>().map(|v| v as f64).ok(),
            _ => t.parse::<f64>().ok(),
        };
        x.filter(|v| v.is_finite())
            .ok_or_else(|| parse_err(ln, format!("bad numeric token '{t}'")))
    };
    Ok(match field {
        Field::Complex => c64(num(toks[0])?, num(toks[1])?),
        _ => c64(num(toks[0])?, 0.0),
    })
}

/// Coordinate layout: `real` when every entry is real, else `complex`.
/// Values use the shortest round-trip representation.
pub fn format_matrix_market(m: &ComplexMatrix) -> String {
    let complex = (0..m.cols()).any(|j| m.col(j).iter().any(|z| z.im != 0.0));
    let mut entries = Vec::new();
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            if m[(i, j)] != ZERO {
                entries.push((i, j, m[(i, j)]));
            }
        }
    }
    let mut out = String::new();
    let field = if complex { "complex" } else { "real" };
    let _ = writeln!(out, "%%MatrixMarket matrix coordinate {field} general");
    let _ = writeln!(out, "{} {} {}", m.rows(), m.cols(), entries.len());
    for (i, j, z) in entries {
        if complex {
            let _ = writeln!(out, "{} {} {:?} {:?}", i + 1, j + 1, z.re, z.im);
        } else {
            let _ = writeln!(out, "{} {} {:?}", i + 1, j + 1, z.re);
        }
    }
    out
}

pub fn write_matrix_market(m: &ComplexMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix_market(m)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: &str = "%%MatrixMarket matrix coordinate real general
% the 3x3 example
3 3 7
1 1 1
2 1 1
1 2 1
3 2 1
1 3 1
2 3 1
3 3 1
";

    fn err_line(r: Result<ComplexMatrix>) -> usize {
        match r {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn reads_the_worked_example() {
        let m = parse_matrix_market(WORKED).unwrap();
        let want =
            ComplexMatrix::from_real_rows(&[&[1.0, 1.0, 1.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0]]).unwrap();
        assert_eq!(m, want);
    }

    #[test]
    fn one_by_one_array() {
        let m = parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\n1.0\n").unwrap();
        assert_eq!(m[(0, 0)], c64(1.0, 0.0));
    }

    #[test]
    fn pattern_is_rejected() {
        let r = parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n");
        match r {
            Err(Error::Parse { line: 1, msg }) => assert!(msg.contains("pattern")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_are_summed() {
        let m = parse_matrix_market(
            "%%MatrixMarket matrix coordinate complex general\n2 2 3\n1 2 1 1\n1 2 0.5 -2\n2 1 0 3\n",
        )
        .unwrap();
        assert_eq!(m[(0, 1)], c64(1.5, -1.0));
        assert_eq!(m[(1, 0)], c64(0.0, 3.0));
    }

    #[test]
    fn symmetric_and_hermitian_expand() {
        let s = parse_matrix_market("%%MatrixMarket matrix coordinate integer symmetric\n2 2 2\n1 1 4\n2 1 -3\n")
            .unwrap();
        assert_eq!(s[(0, 1)], c64(-3.0, 0.0));
        assert_eq!(s[(1, 0)], c64(-3.0, 0.0));
        let h = parse_matrix_market("%%MatrixMarket matrix array complex hermitian\n2 2\n1 0\n2 1\n5 0\n")
            .unwrap();
        assert_eq!(h[(1, 0)], c64(2.0, 1.0));
        assert_eq!(h[(0, 1)], c64(2.0, -1.0));
        assert_eq!(h[(1, 1)], c64(5.0, 0.0));
        let k = parse_matrix_market("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 2\n").unwrap();
        assert_eq!(k[(0, 1)], c64(-2.0, 0.0));
    }

    #[test]
    fn array_is_column_major() {
        let m = parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n").unwrap();
        assert_eq!(m[(1, 0)], c64(2.0, 0.0));
        assert_eq!(m[(0, 1)], c64(3.0, 0.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_index = "%%MatrixMarket matrix coordinate real general\n% c\n2 2 1\n3 1 1.0\n";
        assert_eq!(err_line(parse_matrix_market(bad_index)), 4);
        let bad_number = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 2 x\n";
        assert_eq!(err_line(parse_matrix_market(bad_number)), 4);
        let bad_header = "%%MatrixMarket matrix coordinate real\n1 1 0\n";
        assert_eq!(err_line(parse_matrix_market(bad_header)), 1);
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        assert!(matches!(parse_matrix_market(short), Err(Error::Parse { .. })));
        let upper = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1.0\n";
        assert_eq!(err_line(parse_matrix_market(upper)), 3);
    }

    #[test]
    fn write_then_read_is_exact() {
        let m = ComplexMatrix::from_rows(&[
            vec![c64(1.0 / 3.0, 0.0), ZERO],
            vec![c64(-2.5e-17, 1e300), c64(std::f64::consts::PI, -0.1)],
        ])
        .unwrap();
        assert_eq!(parse_matrix_market(&format_matrix_market(&m)).unwrap(), m);
        let r = ComplexMatrix::identity(3);
        let text = format_matrix_market(&r);
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n3 3 3\n"));
        assert_eq!(parse_matrix_market(&text).unwrap(), r);
    }
}
