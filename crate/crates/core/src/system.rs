//! The argument list of an isotropic function: symmetric tensors, non-symmetric
//! (general or skew) tensors and vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lin3::{Mat3, Rotation, SkewMat3, SymMat3, Vec3};

/// Unit-flagged vectors must have norm within this of 1.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NonSym {
    General(Mat3),
    Skew(SkewMat3),
}

impl NonSym {
    pub fn to_mat3(&self) -> Mat3 {
        match self {
            NonSym::General(m) => *m,
            NonSym::Skew(w) => w.to_mat3(),
        }
    }

    pub fn is_skew(&self) -> bool {
        matches!(self, NonSym::Skew(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SysVector {
    pub v: Vec3,
    pub unit: bool,
}

impl SysVector {
    pub fn free(v: Vec3) -> Self {
        SysVector { v, unit: false }
    }

    pub fn unit(v: Vec3) -> Self {
        SysVector { v, unit: true }
    }
}

/// `(A₁..A_N; H₁..H_M; a₁..a_P)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorSystem {
    sym: Vec<SymMat3>,
    nonsym: Vec<NonSym>,
    vecs: Vec<SysVector>,
}

/// Which argument of a system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArgRef {
    Sym(usize),
    NonSym(usize),
    Vector(usize),
}

impl TensorSystem {
    pub fn new(sym: Vec<SymMat3>, nonsym: Vec<NonSym>, vecs: Vec<SysVector>) -> Result<Self> {
        if sym.is_empty() && nonsym.is_empty() && vecs.is_empty() {
            return Err(Error::InvalidInput("a tensor system needs at least one argument".into()));
        }
        for (r, a) in sym.iter().enumerate() {
            if !a.is_finite() {
                return Err(Error::InvalidInput(format!("A{} is not finite", r + 1)));
            }
        }
        for (t, h) in nonsym.iter().enumerate() {
            if !h.to_mat3().is_finite() {
                return Err(Error::InvalidInput(format!("H{} is not finite", t + 1)));
            }
        }
        for (s, a) in vecs.iter().enumerate() {
            if !a.v.is_finite() {
                return Err(Error::InvalidInput(format!("a{} is not finite", s + 1)));
            }
            if a.unit && (a.v.norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidInput(format!(
                    "a{} is flagged unit but has norm {}",
                    s + 1,
                    a.v.norm()
                )));
            }
        }
        Ok(TensorSystem { sym, nonsym, vecs })
    }

    /// Symmetric tensors and free vectors only.
    pub fn from_parts(sym: Vec<SymMat3>, vecs: Vec<Vec3>) -> Result<Self> {
        Self::new(sym, Vec::new(), vecs.into_iter().map(SysVector::free).collect())
    }

    pub fn sym(&self) -> &[SymMat3] {
        &self.sym
    }

    pub fn nonsym(&self) -> &[NonSym] {
        &self.nonsym
    }

    pub fn vecs(&self) -> &[SysVector] {
        &self.vecs
    }

    pub fn n(&self) -> usize {
        self.sym.len()
    }

    pub fn m(&self) -> usize {
        self.nonsym.len()
    }

    pub fn p(&self) -> usize {
        self.vecs.len()
    }

    pub fn skew_count(&self) -> usize {
        self.nonsym.iter().filter(|h| h.is_skew()).count()
    }

    pub fn unit_count(&self) -> usize {
        self.vecs.iter().filter(|a| a.unit).count()
    }

    /// True when every non-symmetric argument is skew.
    pub fn all_nonsym_skew(&self) -> bool {
        self.nonsym.iter().all(NonSym::is_skew)
    }

    pub fn conjugated(&self, q: &Rotation) -> TensorSystem {
        TensorSystem {
            sym: self.sym.iter().map(|a| q.conjugate_sym(a)).collect(),
            nonsym: self
                .nonsym
                .iter()
                .map(|h| match h {
                    NonSym::General(m) => NonSym::General(q.conjugate_mat(m)),
                    NonSym::Skew(w) => NonSym::Skew(q.conjugate_skew(w)),
                })
                .collect(),
            vecs: self
                .vecs
                .iter()
                .map(|a| SysVector { v: q.apply(&a.v), unit: a.unit })
                .collect(),
        }
    }

    /// Copy with one argument replaced. Replacing a unit vector drops its
    /// unit flag (perturbations leave the sphere).
    pub fn with_sym(&self, r: usize, a: SymMat3) -> TensorSystem {
        let mut s = self.clone();
        s.sym[r] = a;
        s
    }

    pub fn with_nonsym(&self, t: usize, h: NonSym) -> TensorSystem {
        let mut s = self.clone();
        s.nonsym[t] = h;
        s
    }

    pub fn with_vector(&self, idx: usize, v: Vec3) -> TensorSystem {
        let mut s = self.clone();
        s.vecs[idx] = SysVector { v, unit: false };
        s
    }

    /// Unchecked assembly, used when unit vectors are renormalized by the caller.
    pub(crate) fn from_raw(sym: Vec<SymMat3>, nonsym: Vec<NonSym>, vecs: Vec<SysVector>) -> Self {
        TensorSystem { sym, nonsym, vecs }
    }

    pub fn has(&self, arg: ArgRef) -> bool {
        match arg {
            ArgRef::Sym(r) => r < self.n(),
            ArgRef::NonSym(t) => t < self.m(),
            ArgRef::Vector(s) => s < self.p(),
        }
    }
}

/// Rotates every argument: `A ↦ QAQᵀ`, `H ↦ QHQᵀ`, `a ↦ Qa`.
pub fn conjugate(q: &Rotation, system: &TensorSystem) -> TensorSystem {
    system.conjugated(q)
}
