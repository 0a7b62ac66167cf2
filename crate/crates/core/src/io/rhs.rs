//! Right-hand sides: `e1`, `random:<seed>`, or a file of `re im` lines.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instances::random_vector;
use crate::numeric::{c64, unit, Complex64};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RhsSource {
    E1,
    Random(u64),
    File(PathBuf),
}

impl RhsSource {
    pub fn resolve(&self, n: usize) -> Result<Vec<Complex64>> {
        let b = match self {
            Self::E1 => {
                if n == 0 {
                    return Err(Error::InvalidSize("e1 needs n >= 1".into()));
                }
                unit(n, 0)
            }
            Self::Random(seed) => random_vector(n, *seed),
            Self::File(p) => read_rhs(p)?,
        };
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} entries, matrix order is {n}",
                b.len()
            )));
        }
        Ok(b)
    }
}

impl FromStr for RhsSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("e1") {
            return Ok(Self::E1);
        }
        if let Some(seed) = s.strip_prefix("random:") {
            return seed.trim().parse().map(Self::Random).map_err(|_| Error::Parse {
                line: 0,
                msg: format!("bad seed in '{s}'"),
            });
        }
        Ok(Self::File(PathBuf::from(s)))
    }
}

impl fmt::Display for RhsSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::E1 => f.write_str("e1"),
            Self::Random(seed) => write!(f, "random:{seed}"),
            Self::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// One entry per non-blank line: `re im`, or `re` alone for a real entry.
/// Lines starting with `#` or `%` are comments.
pub fn parse_rhs(text: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let t = l.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let nums: Vec<f64> = t
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(format!("bad numeric token '{tok}'")))
            })
            .collect::<Result<_>>()?;
        match nums[..] {
            [re] => out.push(c64(re, 0.0)),
            [re, im] => out.push(c64(re, im)),
            _ => return Err(err(format!("expected 're im', got {} tokens", nums.len()))),
        }
    }
    Ok(out)
}

pub fn read_rhs(path: impl AsRef<Path>) -> Result<Vec<Complex64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_rhs(&text)
}

pub fn format_rhs(b: &[Complex64]) -> String {
    let mut out = String::new();
    for z in b {
        let _ = writeln!(out, "{:?} {:?}", z.re, z.im);
    }
    out
}

pub fn write_rhs(b: &[Complex64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_rhs(b)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
