//! Spectral frames and the component invariants read off in them.
//!
//! A frame is an orthonormal triad attached to a distinguished argument:
//! the eigenvectors of `A₁` when a symmetric tensor is present, otherwise
//! the eigenvectors of `H₁H₁ᵀ` (general `H₁`), otherwise a triad whose
//! first vector is the direction of `a₁` (or of the axial vector of a skew
//! `H₁`) and whose second lies in the plane of `v₁` and the next argument.
//! Every other argument is then described by its components in the
//! frame, and those components are the invariants.
//!
//! Eigenvector signs are fixed in two steps. [`eig_sym`] applies the
//! largest-component-positive rule; `build_frame` then moves to the
//! canonical sign gauge: among the four right-handed sign choices it keeps
//! the ones that make the first sign-sensitive, non-negligible invariant
//! positive, and repeats until one choice is left. The result is rotation
//! equivariant, so the invariants really are invariant.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lin3::{eig_sym, orthogonal_unit, svd3, Degeneracy, Mat3, SkewMat3, SymMat3, Vec3};
use crate::system::{ArgRef, NonSym, SysVector, TensorSystem};


#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameKind {
    /// Eigenvectors of a symmetric tensor.
    SymTensor,
    /// First vector along a vector (or an axial vector), the second oriented
    /// by the next argument.
    Vector,
    /// Eigenvectors of `H₁H₁ᵀ`.
    Gram,
    /// Left/right singular vectors of `H₁`.
    Svd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralFrame {
    pub kind: FrameKind,
    pub lambdas: [f64; 3],
    pub v: [Vec3; 3],
    /// Right singular vectors, `Svd` frames only.
    pub u: Option<[Vec3; 3]>,
    pub degeneracy: Degeneracy,
    pub source: ArgRef,
}

impl SpectralFrame {
    /// Matrix whose columns are `v₁, v₂, v₃`.
    pub fn v_matrix(&self) -> Mat3 {
        Mat3::from_cols(self.v[0], self.v[1], self.v[2])
    }

    pub fn u_matrix(&self) -> Option<Mat3> {
        self.u.map(|u| Mat3::from_cols(u[0], u[1], u[2]))
    }

    /// Same eigenvalues, different (orthonormal) basis. Used to re-gauge a
    /// degenerate eigenspace.
    pub fn with_basis(&self, v: [Vec3; 3]) -> Result<SpectralFrame> {
        check_orthonormal(&v)?;
        Ok(SpectralFrame { v, ..self.clone() })
    }

    /// Eigen-pairs reordered: entry `k` of the result is entry `perm[k]` of `self`.
    pub fn permuted(&self, perm: [usize; 3]) -> SpectralFrame {
        SpectralFrame {
            lambdas: perm.map(|i| self.lambdas[i]),
            v: perm.map(|i| self.v[i]),
            u: self.u.map(|u| perm.map(|i| u[i])),
            ..self.clone()
        }
    }

    /// Maximum deviation from orthonormality of `v` (and `u`).
    pub fn orthonormality_defect(&self) -> f64 {
        let defect = |b: &[Vec3; 3]| {
            let m = Mat3::from_cols(b[0], b[1], b[2]);
            (m.transpose() * m - Mat3::IDENTITY).frobenius_norm()
        };
        let mut d = defect(&self.v);
        if let Some(u) = &self.u {
            d = d.max(defect(u));
        }
        d
    }
}

fn check_orthonormal(v: &[Vec3; 3]) -> Result<()> {
    let m = Mat3::from_cols(v[0], v[1], v[2]);
    let d = (m.transpose() * m - Mat3::IDENTITY).frobenius_norm();
    if d > 1e-10 {
        return Err(Error::InvalidInput(format!("frame is not orthonormal (defect {d:e})")));
    }
    Ok(())
}

/// Label of one component invariant. Indices are 0-based; `Display` prints
/// them 1-based (`A2_13`, `a1_2`, ...).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InvariantLabel {
    /// Frame eigenvalue (or singular value).
    Lambda(usize),
    /// `uᵢ·vᵢ`, SVD frames only.
    FrameCosine(usize),
    /// `vᵢ·A_r vⱼ`, or `vᵢ·A_r uⱼ` in an SVD frame.
    Sym { r: usize, i: usize, j: usize },
    /// `vᵢ·H_t vⱼ`, or `vᵢ·H_t uⱼ` in an SVD frame.
    NonSym { t: usize, i: usize, j: usize },
    /// `v_k·W_t v_l`, `k < l`.
    Skew { t: usize, k: usize, l: usize },
    /// `a_s·vᵢ`.
    Vector { s: usize, i: usize },
}

impl InvariantLabel {
    /// Sign picked up under `vᵢ ↦ signs[i]·vᵢ`.
    fn gauge_character(&self, signs: [f64; 3]) -> f64 {
        match *self {
            InvariantLabel::Lambda(_) | InvariantLabel::FrameCosine(_) => 1.0,
            InvariantLabel::Sym { i, j, .. } | InvariantLabel::NonSym { i, j, .. } => signs[i] * signs[j],
            InvariantLabel::Skew { k, l, .. } => signs[k] * signs[l],
            InvariantLabel::Vector { i, .. } => signs[i],
        }
    }
}

impl fmt::Display for InvariantLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            InvariantLabel::Lambda(i) => write!(f, "lambda_{}", i + 1),
            InvariantLabel::FrameCosine(i) => write!(f, "uv_{}", i + 1),
            InvariantLabel::Sym { r, i, j } => write!(f, "A{}_{}{}", r + 1, i + 1, j + 1),
            InvariantLabel::NonSym { t, i, j } => write!(f, "H{}_{}{}", t + 1, i + 1, j + 1),
            InvariantLabel::Skew { t, k, l } => write!(f, "W{}_{}{}", t + 1, k + 1, l + 1),
            InvariantLabel::Vector { s, i } => write!(f, "a{}_{}", s + 1, i + 1),
        }
    }
}

/// Shape of the system an invariant list was read from: enough to rebuild
/// the arguments from the list without the original tensors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemShape {
    pub n: usize,
    pub nonsym_skew: Vec<bool>,
    pub vec_unit: Vec<bool>,
}

impl SystemShape {
    pub fn of(system: &TensorSystem) -> Self {
        SystemShape {
            n: system.n(),
            nonsym_skew: system.nonsym().iter().map(NonSym::is_skew).collect(),
            vec_unit: system.vecs().iter().map(|a| a.unit).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.nonsym_skew.len()
    }

    pub fn p(&self) -> usize {
        self.vec_unit.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralInvariants {
    pub frame_kind: FrameKind,
    pub shape: SystemShape,
    pub entries: Vec<(InvariantLabel, f64)>,
    /// Effective number of irreducible invariants. Unit vectors keep all
    /// three components in `entries` but count for two.
    pub count: usize,
}

impl SpectralInvariants {
    pub fn get(&self, label: InvariantLabel) -> Option<f64> {
        self.entries.iter().find(|(l, _)| *l == label).map(|(_, v)| *v)
    }

    /// Value of `label`; panics when absent. For use in closures over a
    /// known configuration.
    pub fn value(&self, label: InvariantLabel) -> f64 {
        self.get(label).unwrap_or_else(|| panic!("invariant {label} not present"))
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, v)| *v).collect()
    }

    pub fn labels(&self) -> Vec<InvariantLabel> {
        self.entries.iter().map(|(l, _)| *l).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Selects the distinguished argument: `A₁`, else `H₁`, else `a₁`.
pub fn build_frame(system: &TensorSystem, tol_rel: f64) -> Result<SpectralFrame> {
    let raw = raw_frame(system, tol_rel)?;
    Ok(canonical_gauge(system, raw))
}

/// SVD frame `H₁ = Σ λᵢ vᵢ⊗uᵢ`, usable for any `N ≥ 0` once `M ≥ 1`.
pub fn build_svd_frame(system: &TensorSystem) -> Result<SpectralFrame> {
    build_svd_frame_tol(system, crate::lin3::DEFAULT_DEGENERACY_TOL)
}

pub fn build_svd_frame_tol(system: &TensorSystem, tol_rel: f64) -> Result<SpectralFrame> {
    let h1 = system
        .nonsym()
        .first()
        .ok_or_else(|| Error::Precondition("an SVD frame needs at least one non-symmetric tensor".into()))?;
    let svd = svd3(&h1.to_mat3())?;
    let raw = SpectralFrame {
        kind: FrameKind::Svd,
        lambdas: svd.values,
        v: svd.left,
        u: Some(svd.right),
        degeneracy: Degeneracy::from_sorted(&svd.values, tol_rel),
        source: ArgRef::NonSym(0),
    };
    Ok(canonical_gauge(system, raw))
}

/// Direction fixing the rotation about `v₁` left free by a vector frame:
/// the part orthogonal to `v₁` of `H_t v₁` (t in order, the source excluded),
/// else of the next vector.
fn completion_axis(system: &TensorSystem, v1: &Vec3, source: ArgRef) -> Option<Vec3> {
    let nonsym = system
        .nonsym()
        .iter()
        .enumerate()
        .filter(|(t, _)| ArgRef::NonSym(*t) != source)
        .map(|(_, h)| h.to_mat3() * *v1);
    let vecs = system
        .vecs()
        .iter()
        .enumerate()
        .filter(|(s, _)| ArgRef::Vector(*s) != source)
        .map(|(_, a)| a.v);
    nonsym.chain(vecs).find_map(|c| {
        let perp = c - *v1 * c.dot(v1);
        (perp.norm() > 1e-8 * (1.0 + c.norm())).then(|| perp * (1.0 / perp.norm()))
    })
}

fn vector_frame(system: &TensorSystem, a: &Vec3, source: ArgRef, what: &str) -> Result<SpectralFrame> {
    let v1 = a
        .normalized()
        .filter(|_| a.norm() > 0.0)
        .ok_or_else(|| Error::DegenerateInput(format!("{what} is zero; no frame can be attached")))?;
    // With nothing else to orient it the completion is arbitrary, and no
    // emitted invariant depends on it.
    let v2 = completion_axis(system, &v1, source).unwrap_or_else(|| orthogonal_unit(&v1));
    let v3 = v1.cross(&v2);
    Ok(SpectralFrame {
        kind: FrameKind::Vector,
        lambdas: [a.norm_squared(), 0.0, 0.0],
        v: [v1, v2, v3],
        u: None,
        degeneracy: Degeneracy(vec![vec![0], vec![1, 2]]),
        source,
    })
}

fn raw_frame(system: &TensorSystem, tol_rel: f64) -> Result<SpectralFrame> {
    if let Some(a1) = system.sym().first() {
        let e = eig_sym(a1, tol_rel)?;
        return Ok(SpectralFrame {
            kind: FrameKind::SymTensor,
            lambdas: e.values,
            v: e.vectors,
            u: None,
            degeneracy: e.degeneracy,
            source: ArgRef::Sym(0),
        });
    }
    if let Some(h1) = system.nonsym().first() {
        return match h1 {
            NonSym::General(h) => {
                if h.frobenius_norm() == 0.0 {
                    return Err(Error::DegenerateInput("H1 is zero; no Gram frame can be attached".into()));
                }
                let gram = SymMat3::from_sym_part(&(*h * h.transpose()));
                let e = eig_sym(&gram, tol_rel)?;
                Ok(SpectralFrame {
                    kind: FrameKind::Gram,
                    lambdas: e.values.map(|x| x.max(0.0)),
                    v: e.vectors,
                    u: None,
                    degeneracy: e.degeneracy,
                    source: ArgRef::NonSym(0),
                })
            }
            NonSym::Skew(w) => vector_frame(system, &w.axial(), ArgRef::NonSym(0), "the axial vector of W1"),
        };
    }
    let a1 = &system.vecs()[0];
    vector_frame(system, &a1.v, ArgRef::Vector(0), "a1")
}

const GAUGES: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, -1.0],
    [1.0, -1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

fn canonical_gauge(system: &TensorSystem, frame: SpectralFrame) -> SpectralFrame {
    let entries = extract_entries(system, &frame);
    let scale = 1.0 + entries.iter().fold(0.0f64, |m, (_, x)| m.max(x.abs()));
    let threshold = 1e-8 * scale;
    // A vector frame's first axis is the vector direction itself.
    let mut remaining: Vec<[f64; 3]> = GAUGES
        .iter()
        .copied()
        .filter(|g| frame.kind != FrameKind::Vector || g[0] > 0.0)
        .collect();
    for (label, value) in &entries {
        if remaining.len() == 1 {
            break;
        }
        if value.abs() <= threshold {
            continue;
        }
        let positive: Vec<[f64; 3]> = remaining
            .iter()
            .copied()
            .filter(|g| label.gauge_character(*g) * value > 0.0)
            .collect();
        if !positive.is_empty() && positive.len() < remaining.len() {
            remaining = positive;
        }
    }
    let g = remaining[0];
    SpectralFrame {
        v: [frame.v[0] * g[0], frame.v[1] * g[1], frame.v[2] * g[2]],
        u: frame.u.map(|u| [u[0] * g[0], u[1] * g[1], u[2] * g[2]]),
        ..frame
    }
}

/// Checks that `frame` was built from `system`'s distinguished argument.
fn check_frame_matches(system: &TensorSystem, frame: &SpectralFrame) -> Result<()> {
    let mismatch = |what: &str| Error::Usage(format!("frame does not belong to this system ({what})"));
    if !system.has(frame.source) {
        return Err(mismatch("source argument missing"));
    }
    let tol = 1e-8;
    let v = frame.v_matrix();
    let lam = Mat3::diag(frame.lambdas[0], frame.lambdas[1], frame.lambdas[2]);
    match (frame.kind, frame.source) {
        (FrameKind::SymTensor, ArgRef::Sym(r)) => {
            let a = system.sym()[r].to_mat3();
            if (a - v * lam * v.transpose()).frobenius_norm() > tol * (1.0 + a.frobenius_norm()) {
                return Err(mismatch("eigen-reconstruction"));
            }
        }
        (FrameKind::Gram, ArgRef::NonSym(t)) => {
            let h = system.nonsym()[t].to_mat3();
            let g = h * h.transpose();
            if (g - v * lam * v.transpose()).frobenius_norm() > tol * (1.0 + g.frobenius_norm()) {
                return Err(mismatch("Gram reconstruction"));
            }
        }
        (FrameKind::Svd, ArgRef::NonSym(t)) => {
            let h = system.nonsym()[t].to_mat3();
            let u = frame.u_matrix().ok_or_else(|| mismatch("SVD frame without right vectors"))?;
            if (h - v * lam * u.transpose()).frobenius_norm() > tol * (1.0 + h.frobenius_norm()) {
                return Err(mismatch("SVD reconstruction"));
            }
        }
        (FrameKind::Vector, src) => {
            let a = match src {
                ArgRef::Vector(s) => system.vecs()[s].v,
                ArgRef::NonSym(t) => match system.nonsym()[t] {
                    NonSym::Skew(w) => w.axial(),
                    NonSym::General(_) => return Err(mismatch("vector frame on a general tensor")),
                },
                ArgRef::Sym(_) => return Err(mismatch("vector frame on a symmetric tensor")),
            };
            if (a - frame.v[0] * frame.lambdas[0].sqrt()).norm() > tol * (1.0 + a.norm()) {
                return Err(mismatch("vector direction"));
            }
        }
        _ => return Err(mismatch("frame kind and source disagree")),
    }
    Ok(())
}

fn extract_entries(system: &TensorSystem, frame: &SpectralFrame) -> Vec<(InvariantLabel, f64)> {
    let v = &frame.v;
    let mut out = Vec::new();
    let (skip_sym, skip_nonsym, skip_vec) = match frame.source {
        ArgRef::Sym(r) => (Some(r), None, None),
        ArgRef::NonSym(t) if frame.kind != FrameKind::Gram => (None, Some(t), None),
        ArgRef::NonSym(_) => (None, None, None),
        ArgRef::Vector(s) => (None, None, Some(s)),
    };
    match frame.kind {
        FrameKind::SymTensor | FrameKind::Svd => {
            for i in 0..3 {
                out.push((InvariantLabel::Lambda(i), frame.lambdas[i]));
            }
        }
        FrameKind::Vector => out.push((InvariantLabel::Lambda(0), frame.lambdas[0])),
        FrameKind::Gram => {}
    }
    // Second factor of the bilinear components: v in ordinary frames, u in SVD frames.
    let right: [Vec3; 3] = match (frame.kind, frame.u) {
        (FrameKind::Svd, Some(u)) => {
            for i in 0..3 {
                out.push((InvariantLabel::FrameCosine(i), u[i].dot(&v[i])));
            }
            u
        }
        _ => *v,
    };

    for (r, a) in system.sym().iter().enumerate() {
        if Some(r) == skip_sym {
            continue;
        }
        let a = a.to_mat3();
        for i in 0..3 {
            for j in i..3 {
                out.push((InvariantLabel::Sym { r, i, j }, v[i].dot(&(a * right[j]))));
            }
        }
    }
    for (t, h) in system.nonsym().iter().enumerate() {
        if Some(t) == skip_nonsym {
            continue;
        }
        let hm = h.to_mat3();
        match h {
            NonSym::General(_) => {
                for i in 0..3 {
                    for j in 0..3 {
                        out.push((InvariantLabel::NonSym { t, i, j }, v[i].dot(&(hm * right[j]))));
                    }
                }
            }
            NonSym::Skew(_) => {
                for (k, l) in [(0, 1), (0, 2), (1, 2)] {
                    out.push((InvariantLabel::Skew { t, k, l }, v[k].dot(&(hm * right[l]))));
                }
            }
        }
    }
    for (s, a) in system.vecs().iter().enumerate() {
        if Some(s) == skip_vec {
            continue;
        }
        for i in 0..3 {
            out.push((InvariantLabel::Vector { s, i }, a.v.dot(&v[i])));
        }
    }
    out
}

/// Component invariants of `system` in `frame`, in fixed label order:
/// frame eigenvalues, `A_r` (r ≥ 2), `H_t`/`W_t`, vectors.
pub fn extract_invariants(system: &TensorSystem, frame: &SpectralFrame) -> Result<SpectralInvariants> {
    check_frame_matches(system, frame)?;
    let entries = extract_entries(system, frame);
    let count = system_count(system, frame.kind == FrameKind::Svd)?;
    Ok(SpectralInvariants {
        frame_kind: frame.kind,
        shape: SystemShape::of(system),
        entries,
        count,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountFlags {
    /// All non-symmetric arguments are skew.
    pub skew_nonsym: bool,
    /// All vectors are unit vectors.
    pub all_vectors_unit: bool,
    /// Use the SVD frame of `H₁` (requires `M ≥ 1`, general `H₁`).
    pub svd_variant: bool,
}

/// Number of irreducible spectral invariants for `N` symmetric tensors,
/// `M` non-symmetric tensors and `P` vectors.
///
/// | configuration            | count            |
/// |--------------------------|------------------|
/// | `N ≥ 1`, general `H`     | `3P + 9M + 6N − 3` |
/// | `N ≥ 1`, skew `W`        | `3P + 3M + 6N − 3` |
/// | `N = 0`, `M ≥ 1` general | `9M + 3P`        |
/// | `N = 0`, `M ≥ 1` skew    | `3M + 3P − 2`    |
/// | `N = M = 0`              | `3P − 2`         |
/// | SVD frame                | `9M + 6N + 3P − 3` |
///
/// Each unit vector subtracts one.
pub fn irreducible_count(n: usize, m: usize, p: usize, flags: CountFlags) -> Result<usize> {
    if n + m + p == 0 {
        return Err(Error::Precondition("empty configuration".into()));
    }
    if flags.skew_nonsym && m == 0 {
        return Err(Error::Precondition("skew flag requires M >= 1".into()));
    }
    if flags.svd_variant && m == 0 {
        return Err(Error::Precondition("SVD variant requires M >= 1".into()));
    }
    if flags.svd_variant && flags.skew_nonsym {
        return Err(Error::Precondition("SVD variant requires a general H1".into()));
    }
    let units = if flags.all_vectors_unit { p } else { 0 };
    let per_h = if flags.skew_nonsym { 3 } else { 9 };
    let total = if flags.svd_variant {
        9 * m + 6 * n + 3 * p - 3
    } else if n >= 1 {
        3 * p + per_h * m + 6 * n - 3
    } else if m >= 1 && !flags.skew_nonsym {
        9 * m + 3 * p
    } else if m >= 1 {
        3 * m + 3 * p - 2
    } else {
        3 * p - 2
    };
    Ok(total - units)
}

/// [`irreducible_count`] evaluated argument by argument, so mixed skew/general
/// and unit/free systems are counted too.
pub fn system_count(system: &TensorSystem, svd_variant: bool) -> Result<usize> {
    let per_h = |h: &NonSym| if h.is_skew() { 3 } else { 9 };
    let units = system.unit_count();
    let nonsym = system.nonsym();
    let rest_h: usize = nonsym.iter().skip(1).map(per_h).sum();
    let (n, p) = (system.n(), system.p());
    let total = if svd_variant {
        if nonsym.is_empty() {
            return Err(Error::Precondition("SVD variant requires M >= 1".into()));
        }
        6 + rest_h + 6 * n + 3 * p
    } else if n >= 1 {
        6 * n - 3 + nonsym.iter().map(per_h).sum::<usize>() + 3 * p
    } else if let Some(h1) = nonsym.first() {
        if h1.is_skew() {
            1 + rest_h + 3 * p
        } else {
            9 + rest_h + 3 * p
        }
    } else {
        3 * p - 2
    };
    Ok(total - units)
}

/// The arguments expressed in frame coordinates (`Vᵀ·X·V`, `Vᵀ·a`), rebuilt
/// from the invariant list alone. Not available for SVD frames, whose mixed
/// components live in two bases.
pub fn component_system(inv: &SpectralInvariants) -> Result<TensorSystem> {
    if inv.frame_kind == FrameKind::Svd {
        return Err(Error::Usage("component systems are defined for single-basis frames".into()));
    }
    let shape = &inv.shape;
    let lam = |i| inv.get(InvariantLabel::Lambda(i)).ok_or_else(|| missing("lambda"));
    let mut sym = Vec::with_capacity(shape.n);
    let mut nonsym = Vec::with_capacity(shape.m());
    let mut vecs = Vec::with_capacity(shape.p());

    for r in 0..shape.n {
        if r == 0 && inv.frame_kind == FrameKind::SymTensor {
            sym.push(SymMat3::diag(lam(0)?, lam(1)?, lam(2)?));
            continue;
        }
        let mut u = [0.0; 6];
        let mut k = 0;
        for i in 0..3 {
            for j in i..3 {
                u[k] = inv.get(InvariantLabel::Sym { r, i, j }).ok_or_else(|| missing("A component"))?;
                k += 1;
            }
        }
        sym.push(SymMat3::from_upper(u));
    }
    for (t, &skew) in shape.nonsym_skew.iter().enumerate() {
        if t == 0 && shape.n == 0 && inv.frame_kind == FrameKind::Vector {
            let w = lam(0)?.sqrt();
            nonsym.push(NonSym::Skew(SkewMat3::from_axial(&Vec3::new(w, 0.0, 0.0))));
            continue;
        }
        if skew {
            let c = |k, l| inv.get(InvariantLabel::Skew { t, k, l }).ok_or_else(|| missing("W component"));
            nonsym.push(NonSym::Skew(SkewMat3::new(c(0, 1)?, c(0, 2)?, c(1, 2)?)));
        } else {
            let mut m = [[0.0; 3]; 3];
            for (i, row) in m.iter_mut().enumerate() {
                for (j, e) in row.iter_mut().enumerate() {
                    *e = inv.get(InvariantLabel::NonSym { t, i, j }).ok_or_else(|| missing("H component"))?;
                }
            }
            nonsym.push(NonSym::General(Mat3(m)));
        }
    }
    for (s, &unit) in shape.vec_unit.iter().enumerate() {
        if s == 0 && shape.n == 0 && shape.m() == 0 {
            vecs.push(SysVector { v: Vec3::new(lam(0)?.sqrt(), 0.0, 0.0), unit });
            continue;
        }
        let c = |i| inv.get(InvariantLabel::Vector { s, i }).ok_or_else(|| missing("vector component"));
        vecs.push(SysVector { v: Vec3::new(c(0)?, c(1)?, c(2)?), unit });
    }
    Ok(TensorSystem::from_raw(sym, nonsym, vecs))
}

fn missing(what: &str) -> Error {
    Error::Usage(format!("invariant list lacks a {what}"))
}

/// Rebuilds every argument from `frame` and its invariant list.
pub fn reconstruct_system(inv: &SpectralInvariants, frame: &SpectralFrame) -> Result<TensorSystem> {
    if inv.frame_kind != frame.kind {
        return Err(Error::Usage("invariants and frame are of different kinds".into()));
    }
    if frame.kind == FrameKind::Svd {
        return reconstruct_svd(inv, frame);
    }
    let comp = component_system(inv)?;
    let v = frame.v_matrix();
    let to_global = |m: &Mat3| v * *m * v.transpose();
    Ok(TensorSystem::from_raw(
        comp.sym().iter().map(|a| SymMat3::from_sym_part(&to_global(&a.to_mat3()))).collect(),
        comp.nonsym()
            .iter()
            .map(|h| match h {
                NonSym::General(m) => NonSym::General(to_global(m)),
                NonSym::Skew(w) => NonSym::Skew(SkewMat3::from_skew_part(&to_global(&w.to_mat3()))),
            })
            .collect(),
        comp.vecs().iter().map(|a| SysVector { v: v * a.v, unit: a.unit }).collect(),
    ))
}

fn reconstruct_svd(inv: &SpectralInvariants, frame: &SpectralFrame) -> Result<TensorSystem> {
    let shape = &inv.shape;
    let v = frame.v_matrix();
    let u = frame.u_matrix().ok_or_else(|| Error::Usage("SVD frame without right vectors".into()))?;
    // Mixed components M = Vᵀ X U = X̃ R with X̃ = Vᵀ X V and R = Vᵀ U.
    let rot = v.transpose() * u;
    let mixed_to_global = |x_tilde: Mat3| v * x_tilde * v.transpose();

    let mut sym = Vec::new();
    for r in 0..shape.n {
        let pairs: Vec<(usize, usize)> = (0..3).flat_map(|i| (i..3).map(move |j| (i, j))).collect();
        let rhs: Vec<f64> = pairs
            .iter()
            .map(|&(i, j)| inv.get(InvariantLabel::Sym { r, i, j }).ok_or_else(|| missing("A component")))
            .collect::<Result<_>>()?;
        // Unknowns: upper triangle of X̃.
        let basis: Vec<Mat3> = pairs
            .iter()
            .map(|&(a, b)| {
                let mut e = Mat3::ZERO;
                e.0[a][b] = 1.0;
                e.0[b][a] = 1.0;
                e
            })
            .collect();
        let x = solve_mixed(&pairs, &basis, &rot, &rhs)?;
        let xt = basis.iter().zip(&x).fold(Mat3::ZERO, |acc, (e, c)| acc + *e * *c);
        sym.push(SymMat3::from_sym_part(&mixed_to_global(xt)));
    }
    let mut nonsym = Vec::new();
    for (t, &skew) in shape.nonsym_skew.iter().enumerate() {
        if t == 0 {
            let lam = Mat3::diag(frame.lambdas[0], frame.lambdas[1], frame.lambdas[2]);
            let h = v * lam * u.transpose();
            nonsym.push(if skew {
                NonSym::Skew(SkewMat3::from_skew_part(&h))
            } else {
                NonSym::General(h)
            });
            continue;
        }
        if skew {
            let pairs = vec![(0, 1), (0, 2), (1, 2)];
            let rhs: Vec<f64> = pairs
                .iter()
                .map(|&(k, l)| inv.get(InvariantLabel::Skew { t, k, l }).ok_or_else(|| missing("W component")))
                .collect::<Result<_>>()?;
            let basis: Vec<Mat3> = pairs
                .iter()
                .map(|&(a, b)| {
                    let mut e = Mat3::ZERO;
                    e.0[a][b] = 1.0;
                    e.0[b][a] = -1.0;
                    e
                })
                .collect();
            let x = solve_mixed(&pairs, &basis, &rot, &rhs)?;
            let wt = basis.iter().zip(&x).fold(Mat3::ZERO, |acc, (e, c)| acc + *e * *c);
            nonsym.push(NonSym::Skew(SkewMat3::from_skew_part(&mixed_to_global(wt))));
        } else {
            let mut m = [[0.0; 3]; 3];
            for (i, row) in m.iter_mut().enumerate() {
                for (j, e) in row.iter_mut().enumerate() {
                    *e = inv.get(InvariantLabel::NonSym { t, i, j }).ok_or_else(|| missing("H component"))?;
                }
            }
            nonsym.push(NonSym::General(v * Mat3(m) * u.transpose()));
        }
    }
    let mut vecs = Vec::new();
    for (s, &unit) in shape.vec_unit.iter().enumerate() {
        let c = |i| inv.get(InvariantLabel::Vector { s, i }).ok_or_else(|| missing("vector component"));
        vecs.push(SysVector { v: v * Vec3::new(c(0)?, c(1)?, c(2)?), unit });
    }
    Ok(TensorSystem::from_raw(sym, nonsym, vecs))
}

/// Solves `(Σ xₖ Eₖ R)_{ij} = rhs` over the listed index pairs.
fn solve_mixed(pairs: &[(usize, usize)], basis: &[Mat3], rot: &Mat3, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = pairs.len();
    let a = DMatrix::from_fn(n, n, |row, col| {
        let (i, j) = pairs[row];
        (basis[col] * *rot).0[i][j]
    });
    let b = DVector::from_column_slice(rhs);
    a.lu()
        .solve(&b)
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| Error::SingularConfiguration("mixed-basis components do not determine the tensor".into()))
}
