//! An instance on disk: `matrix.mtx`, `rhs.txt` and `instance.json`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mtx::{read_matrix_market, write_matrix_market};
use super::rhs::{read_rhs, write_rhs};
use crate::error::{Error, Result};
use crate::instances::{ExpectedStagnation, ProblemInstance, Provenance};

pub const MATRIX_FILE: &str = "matrix.mtx";
pub const RHS_FILE: &str = "rhs.txt";
pub const META_FILE: &str = "instance.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Meta {
    n: usize,
    matrix: String,
    rhs: String,
    provenance: Provenance,
    expected: ExpectedStagnation,
}

pub fn write_instance(instance: &ProblemInstance, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    write_matrix_market(&instance.matrix, dir.join(MATRIX_FILE))?;
    write_rhs(&instance.rhs, dir.join(RHS_FILE))?;
    let meta = Meta {
        n: instance.dim(),
        matrix: MATRIX_FILE.into(),
        rhs: RHS_FILE.into(),
        provenance: instance.provenance.clone(),
        expected: instance.expected.clone(),
    };
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))?;
    let p = dir.join(META_FILE);
    fs::write(&p, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

/// Reads a directory written by [`write_instance`]. Without `instance.json`
/// the instance is taken as `matrix.mtx` plus `rhs.txt`, with nothing known
/// about its stagnation.
pub fn read_instance(dir: impl AsRef<Path>) -> Result<ProblemInstance> {
    let dir = dir.as_ref();
    let meta_path = dir.join(META_FILE);
    let meta = if meta_path.exists() {
        let text = fs::read_to_string(&meta_path).map_err(|e| Error::Io(format!("{}: {e}", meta_path.display())))?;
        Some(serde_json::from_str::<Meta>(&text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: format!("{}: {e}", meta_path.display()),
        })?)
    } else {
        None
    };
    let (mfile, rfile) = match &meta {
        Some(m) => (m.matrix.as_str(), m.rhs.as_str()),
        None => (MATRIX_FILE, RHS_FILE),
    };
    let matrix = read_matrix_market(dir.join(mfile))?;
    let rhs = read_rhs(dir.join(rfile))?;
    let (provenance, expected) = match meta {
        Some(m) => {
            if m.n != matrix.rows() {
                return Err(Error::DimensionMismatch(format!(
                    "{META_FILE} declares n = {}, matrix has order {}",
                    m.n,
                    matrix.rows()
                )));
            }
            (m.provenance, m.expected)
        }
        None => (
            Provenance::new("file", &[("path", dir.display().to_string())], None),
            ExpectedStagnation::Unknown,
        ),
    };
    ProblemInstance::new(matrix, rhs, provenance, expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{planted_singular_hessenberg, random_instance};

    #[test]
    fn round_trip_is_exact() {
        let tmp = tempfile::tempdir().unwrap();
        for inst in [
            random_instance(6, 3).unwrap(),
            planted_singular_hessenberg(8, &[3, 4].into(), 1).unwrap(),
        ] {
            let d = tmp.path().join(&inst.provenance.generator);
            write_instance(&inst, &d).unwrap();
            assert_eq!(read_instance(&d).unwrap(), inst);
        }
    }

    #[test]
    fn bare_directory_has_unknown_expectation() {
        let tmp = tempfile::tempdir().unwrap();
        let inst = random_instance(4, 0).unwrap();
        write_instance(&inst, tmp.path()).unwrap();
        fs::remove_file(tmp.path().join(META_FILE)).unwrap();
        let back = read_instance(tmp.path()).unwrap();
        assert_eq!(back.matrix, inst.matrix);
        assert_eq!(back.expected, ExpectedStagnation::Unknown);
    }
}
