//! JSON input format for tensor systems.
//!
//! ```json
//! { "version": 1,
//!   "sym": [[[3,0,0],[0,2,0],[0,0,1]]],
//!   "nonsym": [{"matrix": [[0,1,0],[-1,0,0],[0,0,0]], "skew": true}],
//!   "vecs": [{"v": [1,0,0], "unit": true}] }
//! ```

use std::path::Path;

use isotropykit::{Mat3, NonSym, SkewMat3, SymMat3, SysVector, TensorSystem, Vec3};
use serde::{Deserialize, Serialize};

use crate::Failure;

pub const SYSTEM_FILE_VERSION: u32 = 1;
const SYMMETRY_TOL: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub version: u32,
    #[serde(default)]
    pub sym: Vec<[[f64; 3]; 3]>,
    #[serde(default)]
    pub nonsym: Vec<NonSymEntry>,
    #[serde(default)]
    pub vecs: Vec<VecEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonSymEntry {
    pub matrix: [[f64; 3]; 3],
    #[serde(default)]
    pub skew: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VecEntry {
    pub v: [f64; 3],
    #[serde(default)]
    pub unit: bool,
}

fn max_abs(m: &[[f64; 3]; 3]) -> f64 {
    m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()))
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| Failure::Input(format!("malformed system file: {e}")))
    }

    pub fn load(path: &Path) -> Result<TensorSystem, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)?.to_system()
    }

    /// Validates the declared symmetry classes and builds the system.
    /// Unit vectors are renormalized exactly.
    pub fn to_system(&self) -> Result<TensorSystem, Failure> {
        if self.version != SYSTEM_FILE_VERSION {
            return Err(Failure::Input(format!(
                "unsupported system file version {} (expected {SYSTEM_FILE_VERSION})",
                self.version
            )));
        }
        let mut sym = Vec::with_capacity(self.sym.len());
        for (r, m) in self.sym.iter().enumerate() {
            let tol = SYMMETRY_TOL * (1.0 + max_abs(m));
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                if (m[i][j] - m[j][i]).abs() > tol {
                    return Err(Failure::Input(format!("sym[{r}] is not symmetric at ({},{})", i + 1, j + 1)));
                }
            }
            sym.push(SymMat3::from_sym_part(&Mat3(*m)));
        }
        let mut nonsym = Vec::with_capacity(self.nonsym.len());
        for (t, h) in self.nonsym.iter().enumerate() {
            let m = h.matrix;
            if h.skew {
                let tol = SYMMETRY_TOL * (1.0 + max_abs(&m));
                for i in 0..3 {
                    for j in i..3 {
                        if (m[i][j] + m[j][i]).abs() > tol {
                            return Err(Failure::Input(format!(
                                "nonsym[{t}] is flagged skew but is not skew at ({},{})",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
                nonsym.push(NonSym::Skew(SkewMat3::from_skew_part(&Mat3(m))));
            } else {
                nonsym.push(NonSym::General(Mat3(m)));
            }
        }
        let mut vecs = Vec::with_capacity(self.vecs.len());
        for (s, a) in self.vecs.iter().enumerate() {
            let v = Vec3(a.v);
            if a.unit {
                let n = v.norm();
                if !((n - 1.0).abs() <= UNIT_TOL) {
                    return Err(Failure::Input(format!("vecs[{s}] is flagged unit but has norm {n}")));
                }
                vecs.push(SysVector::unit(v * (1.0 / n)));
            } else {
                vecs.push(SysVector::free(v));
            }
        }
        TensorSystem::new(sym, nonsym, vecs).map_err(|e| Failure::Input(e.to_string()))
    }

    pub fn from_system(system: &TensorSystem) -> Self {
        SystemFile {
            version: SYSTEM_FILE_VERSION,
            sym: system.sym().iter().map(|a| a.to_mat3().0).collect(),
            nonsym: system
                .nonsym()
                .iter()
                .map(|h| NonSymEntry { matrix: h.to_mat3().0, skew: h.is_skew() })
                .collect(),
            vecs: system.vecs().iter().map(|a| VecEntry { v: a.v.0, unit: a.unit }).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = r#"{"version":1,"sym":[[[3,0.5,0],[0.5,2,0],[0,0,1]]],
            "nonsym":[{"matrix":[[0,1,0],[-1,0,2],[0,-2,0]],"skew":true}],
            "vecs":[{"v":[0.6,0.8,0],"unit":true},{"v":[1,2,3]}]}"#;
        let sys = SystemFile::parse(text).unwrap().to_system().unwrap();
        assert_eq!((sys.n(), sys.m(), sys.p(), sys.skew_count(), sys.unit_count()), (1, 1, 2, 1, 1));
        let back = SystemFile::from_system(&sys).to_system().unwrap();
        assert_eq!(back, sys);
    }

    #[test]
    fn rejects_bad_files() {
        for text in [
            r#"{"version":2,"sym":[[[1,0,0],[0,1,0],[0,0,1]]]}"#,
            r#"{"version":1,"sym":[[[1,0.1,0],[0,1,0],[0,0,1]]]}"#,
            r#"{"version":1,"nonsym":[{"matrix":[[1,0,0],[0,0,0],[0,0,0]],"skew":true}]}"#,
            r#"{"version":1,"vecs":[{"v":[1,1,0],"unit":true}]}"#,
            r#"{"version":1}"#,
            r#"{"version":1,"extra":0}"#,
            r#"not json"#,
        ] {
            let r = SystemFile::parse(text).and_then(|f| f.to_system());
            assert!(matches!(r, Err(Failure::Input(_))), "{text}");
        }
    }
}
