//! Spectral generator bases and the checks built on them: projections onto
//! the 3 / 6 / 9 / 3 spectral generators, spectral re-evaluation of
//! classical items, coaxiality, coalescence and the P-property.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classical_bases::{boehler_scalars, smith_sym_tensors, smith_vectors, ClassicalArgs};
use crate::error::{Error, Result};
use crate::lin3::{haar_rotation, Mat3, SymMat3, Vec3, DEFAULT_DEGENERACY_TOL, STRUCTURE_TOL};
use crate::spectral_frame::{
    build_frame, component_system, extract_invariants, FrameKind, InvariantLabel, SpectralFrame, SpectralInvariants,
};
use crate::system::TensorSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    /// `v₁, v₂, v₃`.
    Vector3,
    /// `vᵢ⊗vᵢ`, then `vᵢ⊗vⱼ + vⱼ⊗vᵢ` for (1,2), (1,3), (2,3).
    Sym6,
    /// `vᵢ⊗vⱼ`, row-major.
    Full9,
    /// `vᵢ⊗vⱼ − vⱼ⊗vᵢ`, `i < j`.
    Skew3,
    /// `vᵢ⊗uⱼ` in an SVD frame.
    Svd9,
}

impl BasisKind {
    /// Number of generators of this kind.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> usize {
        index_pairs(self).len()
    }
}

const OFF: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn index_pairs(kind: BasisKind) -> Vec<(usize, usize)> {
    match kind {
        BasisKind::Vector3 => (0..3).map(|i| (i, i)).collect(),
        BasisKind::Sym6 => (0..3).map(|i| (i, i)).chain(OFF).collect(),
        BasisKind::Full9 | BasisKind::Svd9 => (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect(),
        BasisKind::Skew3 => OFF.to_vec(),
    }
}

fn coefficient_label(kind: BasisKind, (i, j): (usize, usize)) -> String {
    match kind {
        BasisKind::Vector3 => format!("g{}", i + 1),
        BasisKind::Sym6 => format!("t{}{}", i + 1, j + 1),
        BasisKind::Full9 => format!("h{}{}", i + 1, j + 1),
        BasisKind::Skew3 => format!("w{}{}", i + 1, j + 1),
        BasisKind::Svd9 => format!("hhat{}{}", i + 1, j + 1),
    }
}

/// The spectral generators of one kind in a given frame.
#[derive(Clone, Debug)]
pub struct GeneratorBasis {
    pub kind: BasisKind,
    pub frame: SpectralFrame,
}

impl GeneratorBasis {
    pub fn new(kind: BasisKind, frame: SpectralFrame) -> Result<Self> {
        if kind == BasisKind::Svd9 && frame.u.is_none() {
            return Err(Error::Precondition("svd9 generators need an SVD frame".into()));
        }
        Ok(GeneratorBasis { kind, frame })
    }

    pub fn len(&self) -> usize {
        self.kind.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Tensor elements as matrices; for `Vector3` each `vᵢ` is returned as `vᵢ⊗e₁`
    /// so that all kinds share one Frobenius Gram matrix.
    pub fn elements(&self) -> Vec<(String, Mat3)> {
        let v = &self.frame.v;
        let right = self.frame.u.unwrap_or(*v);
        index_pairs(self.kind)
            .into_iter()
            .map(|(i, j)| {
                let m = match self.kind {
                    BasisKind::Vector3 => v[i].outer(&Vec3::axis(0)),
                    BasisKind::Sym6 if i == j => v[i].outer(&v[i]),
                    BasisKind::Sym6 => v[i].outer(&v[j]) + v[j].outer(&v[i]),
                    BasisKind::Full9 => v[i].outer(&v[j]),
                    BasisKind::Skew3 => v[i].outer(&v[j]) - v[j].outer(&v[i]),
                    BasisKind::Svd9 => v[i].outer(&right[j]),
                };
                (coefficient_label(self.kind, (i, j)), m)
            })
            .collect()
    }

    /// Frobenius Gram matrix of the elements.
    pub fn gram_matrix(&self) -> Vec<Vec<f64>> {
        let e = self.elements();
        e.iter().map(|(_, a)| e.iter().map(|(_, b)| a.frobenius_dot(b)).collect()).collect()
    }
}

/// Coefficients on a generator basis, in element order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub kind: BasisKind,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
}

impl Coefficients {
    fn from_fn(kind: BasisKind, f: impl Fn(usize, usize) -> f64) -> Self {
        let pairs = index_pairs(kind);
        Coefficients {
            kind,
            labels: pairs.iter().map(|&p| coefficient_label(kind, p)).collect(),
            values: pairs.iter().map(|&(i, j)| f(i, j)).collect(),
        }
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|k| self.values[k])
    }

    /// `Σ gᵢ vᵢ`.
    pub fn reconstruct_vector(&self, frame: &SpectralFrame) -> Result<Vec3> {
        if self.kind != BasisKind::Vector3 {
            return Err(Error::Usage("not vector coefficients".into()));
        }
        Ok((0..3).fold(Vec3::ZERO, |acc, i| acc + frame.v[i] * self.values[i]))
    }

    /// `Σ c_k E_k` over the tensor elements of the coefficient kind.
    pub fn reconstruct_tensor(&self, frame: &SpectralFrame) -> Result<Mat3> {
        if self.kind == BasisKind::Vector3 {
            return Err(Error::Usage("vector coefficients do not form a tensor".into()));
        }
        let basis = GeneratorBasis::new(self.kind, frame.clone())?;
        Ok(basis
            .elements()
            .iter()
            .zip(&self.values)
            .fold(Mat3::ZERO, |acc, ((_, e), c)| acc + *e * *c))
    }
}

/// `gᵢ = g·vᵢ`.
pub fn project_vector(g: &Vec3, frame: &SpectralFrame) -> Coefficients {
    Coefficients::from_fn(BasisKind::Vector3, |i, _| g.dot(&frame.v[i]))
}

/// Coefficients of `G` on the chosen tensor generators.
pub fn project_tensor(g: &Mat3, frame: &SpectralFrame, kind: BasisKind) -> Result<Coefficients> {
    let v = &frame.v;
    let scale = 1.0 + g.frobenius_norm();
    match kind {
        BasisKind::Vector3 => Err(Error::Usage("use project_vector for vectors".into())),
        BasisKind::Sym6 => {
            if g.asymmetry() > STRUCTURE_TOL * scale {
                return Err(Error::Class("sym6 projection of a non-symmetric tensor".into()));
            }
            Ok(Coefficients::from_fn(kind, |i, j| v[i].dot(&(*g * v[j]))))
        }
        BasisKind::Full9 => Ok(Coefficients::from_fn(kind, |i, j| v[i].dot(&(*g * v[j])))),
        BasisKind::Skew3 => {
            if g.sym_part().frobenius_norm() > STRUCTURE_TOL * scale {
                return Err(Error::Class("skew3 projection of a tensor with a symmetric part".into()));
            }
            Ok(Coefficients::from_fn(kind, |i, j| v[i].dot(&(*g * v[j]))))
        }
        BasisKind::Svd9 => {
            let u = frame
                .u
                .ok_or_else(|| Error::Precondition("svd9 projection needs an SVD frame".into()))?;
            Ok(Coefficients::from_fn(kind, |i, j| v[i].dot(&(*g * u[j]))))
        }
    }
}

/// Value of a classical item recomputed from spectral data.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassicalValue {
    Scalar(f64),
    /// `vector3` coefficients.
    Vector(Coefficients),
    /// `sym6` coefficients.
    Tensor(Coefficients),
}

/// Evaluates classical items from the invariant list of a system alone.
///
/// The frame-coordinate system is rebuilt from the invariants; scalar items
/// are evaluated on it directly, generator items give their frame components.
pub struct SpectralExpansion {
    invariants: SpectralInvariants,
    args: ClassicalArgs,
}

impl SpectralExpansion {
    pub fn new(system: &TensorSystem, frame: &SpectralFrame) -> Result<Self> {
        if frame.kind == FrameKind::Svd {
            return Err(Error::Usage("classical expansion uses a single-basis frame".into()));
        }
        if !system.all_nonsym_skew() {
            return Err(Error::Class("classical bases take skew non-symmetric arguments only".into()));
        }
        let invariants = extract_invariants(system, frame)?;
        Self::from_invariants(invariants)
    }

    pub fn from_invariants(invariants: SpectralInvariants) -> Result<Self> {
        let comp = component_system(&invariants)?;
        Ok(SpectralExpansion { args: ClassicalArgs::from_system(&comp), invariants })
    }

    pub fn invariants(&self) -> &SpectralInvariants {
        &self.invariants
    }

    fn shape(&self) -> (usize, usize, usize) {
        let s = &self.invariants.shape;
        (s.n, s.m(), s.p())
    }

    pub fn scalars(&self) -> Vec<(String, f64)> {
        let (n, m, p) = self.shape();
        let b = boehler_scalars(n, m, p);
        b.items.iter().map(|it| (it.label.clone(), it.eval(&self.args))).collect()
    }

    pub fn vectors(&self) -> Vec<(String, Coefficients)> {
        let (n, m, p) = self.shape();
        let b = smith_vectors(n, m, p);
        b.items
            .iter()
            .map(|it| {
                let g = it.eval(&self.args);
                (it.label.clone(), Coefficients::from_fn(BasisKind::Vector3, |i, _| g[i]))
            })
            .collect()
    }

    pub fn tensors(&self) -> Vec<(String, Coefficients)> {
        let (n, m, p) = self.shape();
        let b = smith_sym_tensors(n, m, p);
        b.items
            .iter()
            .map(|it| {
                let g = it.eval(&self.args);
                (it.label.clone(), Coefficients::from_fn(BasisKind::Sym6, |i, j| g.get(i, j)))
            })
            .collect()
    }

    pub fn item(&self, label: &str) -> Result<ClassicalValue> {
        let (n, m, p) = self.shape();
        if let Some(it) = boehler_scalars(n, m, p).items.iter().find(|it| it.label == label) {
            return Ok(ClassicalValue::Scalar(it.eval(&self.args)));
        }
        if let Some(it) = smith_vectors(n, m, p).items.iter().find(|it| it.label == label) {
            let g = it.eval(&self.args);
            return Ok(ClassicalValue::Vector(Coefficients::from_fn(BasisKind::Vector3, |i, _| g[i])));
        }
        if let Some(it) = smith_sym_tensors(n, m, p).items.iter().find(|it| it.label == label) {
            let g = it.eval(&self.args);
            return Ok(ClassicalValue::Tensor(Coefficients::from_fn(BasisKind::Sym6, |i, j| g.get(i, j))));
        }
        Err(Error::Usage(format!("no classical item labelled {label:?} for (N,M,P)=({n},{m},{p})")))
    }
}

/// One classical item, evaluated from the spectral invariants of `system` in `frame`.
pub fn expand_classical(item_label: &str, system: &TensorSystem, frame: &SpectralFrame) -> Result<ClassicalValue> {
    SpectralExpansion::new(system, frame)?.item(item_label)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoaxialityReport {
    /// `‖V G(V) − G(V) V‖_F`.
    pub commutator_residual: f64,
    /// Largest off-diagonal sym6 coefficient of `G(V)` in the frame of `V`.
    pub offdiag_max: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn check_coaxiality(g_fn: impl Fn(&SymMat3) -> SymMat3, v: &SymMat3, tol: f64) -> Result<CoaxialityReport> {
    let g = g_fn(v);
    let (vm, gm) = (v.to_mat3(), g.to_mat3());
    let commutator_residual = (vm * gm - gm * vm).frobenius_norm();
    let sys = TensorSystem::from_parts(vec![*v], vec![])?;
    let frame = build_frame(&sys, DEFAULT_DEGENERACY_TOL)?;
    let c = project_tensor(&gm, &frame, BasisKind::Sym6)?;
    let offdiag_max = c.values[3..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = 1.0 + gm.frobenius_norm();
    Ok(CoaxialityReport {
        commutator_residual,
        offdiag_max,
        tolerance: tol,
        pass: commutator_residual <= tol * scale && offdiag_max <= tol * scale,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoalescenceCase {
    /// `λᵢ = λⱼ ≠ λₖ` (0-based indices).
    Pair { i: usize, j: usize, k: usize },
    Triple,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoalescenceReport {
    pub case: CoalescenceCase,
    pub eps: Vec<f64>,
    /// Coefficient spread along the sequence: `|tᵢ − tⱼ|` (pair) or
    /// `max − min` (triple).
    pub gaps: Vec<f64>,
    /// Least-squares slope of `log gap` against `log ε`.
    pub fitted_order: f64,
    /// `max gap/ε` over the sequence.
    pub fitted_constant: f64,
    pub limit_gap: f64,
    /// Distance of `Σ tᵢ vᵢ⊗vᵢ` at the limit from the canonical form.
    pub canonical_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub diagnostics: Vec<String>,
}

/// Checks that eigen-coefficients `t(λ)` merge as eigenvalues coalesce.
///
/// `path(ε)` gives eigenvalues approaching the degenerate `path(0)`;
/// `frame` is the eigenbasis used for the canonical form
/// (`tᵢI + (tₖ − tᵢ)vₖ⊗vₖ` for a pair, `t₁I` for a triple).
pub fn coalescence_structure(
    t: impl Fn([f64; 3]) -> [f64; 3],
    path: impl Fn(f64) -> [f64; 3],
    eps: &[f64],
    frame: &[Vec3; 3],
    case: CoalescenceCase,
    tol: f64,
) -> CoalescenceReport {
    let spread = |tv: [f64; 3]| match case {
        CoalescenceCase::Pair { i, j, .. } => (tv[i] - tv[j]).abs(),
        CoalescenceCase::Triple => {
            let (lo, hi) = tv.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
            hi - lo
        }
    };
    let gaps: Vec<f64> = eps.iter().map(|&e| spread(t(path(e)))).collect();
    let mut diagnostics = Vec::new();

    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(&gaps)
        .filter(|(e, g)| **e > 0.0 && **g > 0.0)
        .map(|(e, g)| (e.ln(), g.ln()))
        .collect();
    let fitted_order = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / n, sy / n);
        let (num, den) = pts
            .iter()
            .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
        if den > 0.0 {
            num / den
        } else {
            f64::NAN
        }
    } else {
        diagnostics.push("fewer than two non-zero gaps; order not fitted".into());
        f64::NAN
    };
    let fitted_constant = eps
        .iter()
        .zip(&gaps)
        .filter(|(e, _)| **e > 0.0)
        .fold(0.0f64, |m, (e, g)| m.max(g / e));

    let t0 = t(path(0.0));
    let limit_gap = spread(t0);
    let g = (0..3).fold(Mat3::ZERO, |acc, m| acc + frame[m].outer(&frame[m]) * t0[m]);
    let canonical = match case {
        CoalescenceCase::Pair { i, k, .. } => Mat3::IDENTITY * t0[i] + frame[k].outer(&frame[k]) * (t0[k] - t0[i]),
        CoalescenceCase::Triple => Mat3::IDENTITY * t0[0],
    };
    let canonical_residual = (g - canonical).frobenius_norm();
    let scale = 1.0 + t0.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let decreasing = gaps.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + tol * scale);
    if !decreasing {
        diagnostics.push(format!("gaps do not decrease along the sequence: {gaps:?}"));
    }
    if limit_gap > tol * scale {
        diagnostics.push(format!("coefficients differ at the limit by {limit_gap:e}"));
    }
    if canonical_residual > tol * scale {
        diagnostics.push(format!("canonical form residual {canonical_residual:e}"));
    }
    CoalescenceReport {
        case,
        eps: eps.to_vec(),
        gaps,
        fitted_order,
        fitted_constant,
        limit_gap,
        canonical_residual,
        tolerance: tol,
        pass: diagnostics.iter().all(|d| d.starts_with("fewer")) && decreasing,
        diagnostics,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegeneracyCase {
    /// `λᵢ = λⱼ` (0-based indices).
    Pair(usize, usize),
    Triple,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PPropertyReport {
    pub label: String,
    pub case: DegeneracyCase,
    pub value: f64,
    /// Largest change under the index transpositions (symmetric frames only).
    pub permutation_deviation: f64,
    /// Largest change over the re-gauged frames.
    pub gauge_deviation: f64,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub trials: usize,
    pub pass: bool,
}

/// Rotates `v[i], v[j]` by a random angle in their plane, with random signs.
fn regauge_pair<R: Rng + ?Sized>(v: &[Vec3; 3], i: usize, j: usize, rng: &mut R) -> [Vec3; 3] {
    let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let (c, s) = (th.cos(), th.sin());
    let mut out = *v;
    out[i] = v[i] * c + v[j] * s;
    out[j] = v[j] * c - v[i] * s;
    if rng.gen_bool(0.5) {
        out[j] = -out[j];
    }
    out
}

/// Tests a function of spectral invariants for the P-property at a system
/// built with an exact eigenvalue coincidence.
///
/// Passes when `W_hat` changes by at most `tol_rel·(1 + |W|)` under the index
/// transpositions and under `trials` random re-choices of the degenerate
/// eigenvectors.
pub fn check_p_property<R: Rng + ?Sized>(
    label: &str,
    w_hat: &dyn Fn(&SpectralInvariants) -> f64,
    system: &TensorSystem,
    case: DegeneracyCase,
    trials: usize,
    rng: &mut R,
    tol_rel: f64,
) -> Result<PPropertyReport> {
    let frame = build_frame(system, DEFAULT_DEGENERACY_TOL)?;
    let lam = frame.lambdas;
    let exact = 1e-12 * (1.0 + lam.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    let degenerate = match case {
        DegeneracyCase::Pair(i, j) => i != j && i < 3 && j < 3 && (lam[i] - lam[j]).abs() <= exact,
        DegeneracyCase::Triple => (lam[0] - lam[2]).abs() <= exact,
    };
    if !degenerate {
        return Err(Error::Precondition(format!(
            "template eigenvalues {lam:?} do not have the {case:?} coincidence"
        )));
    }
    let value = w_hat(&extract_invariants(system, &frame)?);

    let mut permutation_deviation = 0.0f64;
    if frame.kind == FrameKind::SymTensor {
        for perm in [[1, 0, 2], [2, 1, 0], [0, 2, 1]] {
            let inv = extract_invariants(system, &frame.permuted(perm))?;
            permutation_deviation = permutation_deviation.max((w_hat(&inv) - value).abs());
        }
    }

    let mut gauge_deviation = 0.0f64;
    for _ in 0..trials {
        let v = match case {
            DegeneracyCase::Pair(i, j) => regauge_pair(&frame.v, i, j, rng),
            DegeneracyCase::Triple => {
                let q = haar_rotation(rng);
                frame.v.map(|x| q.apply(&x))
            }
        };
        let inv = extract_invariants(system, &frame.with_basis(v)?)?;
        gauge_deviation = gauge_deviation.max((w_hat(&inv) - value).abs());
    }

    let max_deviation = permutation_deviation.max(gauge_deviation);
    let tolerance = tol_rel * (1.0 + value.abs());
    Ok(PPropertyReport {
        label: label.to_string(),
        case,
        value,
        permutation_deviation,
        gauge_deviation,
        max_deviation,
        tolerance,
        trials,
        pass: max_deviation <= tolerance,
    })
}

/// System `(a⊗a, U)` whose frame has `v₁ = ±a` and the arbitrary pair `v₂, v₃`.
pub fn example2_system(u: &SymMat3, a: &Vec3) -> Result<TensorSystem> {
    if (a.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("a must be a unit vector (norm {})", a.norm())));
    }
    TensorSystem::from_parts(vec![SymMat3::from_sym_part(&a.outer(a)), *u], vec![])
}

/// The five invariants of `U` relative to the direction `a`, written with the
/// eigenvalues of `a⊗a` so that they are symmetric under index permutation:
/// `I₁ = ΣUᵢᵢ`, `I₂ = ΣUᵢⱼUⱼᵢ`, `I₃ = ΣUᵢⱼUⱼₖUₖᵢ`, `I₄ = ΣλᵢUᵢᵢ`,
/// `I₅ = Σλᵢ UᵢⱼUⱼᵢ`. At `λ = (1,0,0)` the last two are `U₁₁` and `ΣU₁ᵢUᵢ₁`.
pub fn example2_invariants(inv: &SpectralInvariants) -> [f64; 5] {
    let lam: [f64; 3] = std::array::from_fn(|i| inv.value(InvariantLabel::Lambda(i)));
    let u = |i: usize, j: usize| {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        inv.value(InvariantLabel::Sym { r: 1, i, j })
    };
    let mut out = [0.0; 5];
    for i in 0..3 {
        out[0] += u(i, i);
        out[3] += lam[i] * u(i, i);
        for j in 0..3 {
            out[1] += u(i, j) * u(j, i);
            out[4] += lam[i] * u(i, j) * u(j, i);
            for k in 0..3 {
                out[2] += u(i, j) * u(j, k) * u(k, i);
            }
        }
    }
    out
}

/// `(I₁, …, I₅)` for `U` and the unit direction `a`.
pub fn example2_resolution(u: &SymMat3, a: &Vec3) -> Result<[f64; 5]> {
    let sys = example2_system(u, a)?;
    let frame = build_frame(&sys, DEFAULT_DEGENERACY_TOL)?;
    Ok(example2_invariants(&extract_invariants(&sys, &frame)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lin3::{Rotation, SkewMat3};
    use crate::spectral_frame::build_svd_frame;
    use crate::system::{NonSym, SysVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rsym(rng: &mut ChaCha8Rng) -> SymMat3 {
        SymMat3::from_upper(std::array::from_fn(|_| rng.gen_range(-2.0..2.0)))
    }

    fn rvec(rng: &mut ChaCha8Rng) -> Vec3 {
        Vec3(std::array::from_fn(|_| rng.gen_range(-2.0..2.0)))
    }

    fn frame_of(a: SymMat3) -> SpectralFrame {
        build_frame(&TensorSystem::from_parts(vec![a], vec![]).unwrap(), 1e-8).unwrap()
    }

    #[test]
    fn vector_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = frame_of(rsym(&mut rng));
        let c = project_vector(&f.v[0], &f);
        assert!((c.values[0] - 1.0).abs() < 1e-15 && c.values[1].abs() < 1e-15 && c.values[2].abs() < 1e-15);
        assert_eq!(project_vector(&Vec3::ZERO, &f).values, vec![0.0; 3]);
        for _ in 0..100 {
            let g = rvec(&mut rng);
            let r = project_vector(&g, &f).reconstruct_vector(&f).unwrap();
            assert!((r - g).norm() <= 1e-14 * (1.0 + g.norm()));
        }
    }

    #[test]
    fn tensor_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = frame_of(rsym(&mut rng));
        let c = project_tensor(&Mat3::IDENTITY, &f, BasisKind::Sym6).unwrap();
        for k in 0..6 {
            let expect = if k < 3 { 1.0 } else { 0.0 };
            assert!((c.values[k] - expect).abs() < 1e-14);
        }
        let w = f.v[0].outer(&f.v[1]) - f.v[1].outer(&f.v[0]);
        let c = project_tensor(&w, &f, BasisKind::Skew3).unwrap();
        assert!((c.values[0] - 1.0).abs() < 1e-14 && c.values[1].abs() < 1e-14 && c.values[2].abs() < 1e-14);
        assert!(matches!(project_tensor(&(w + Mat3::IDENTITY), &f, BasisKind::Sym6), Err(Error::Class(_))));
        assert!(matches!(project_tensor(&Mat3::IDENTITY, &f, BasisKind::Svd9), Err(Error::Precondition(_))));
        for _ in 0..100 {
            let g = rsym(&mut rng).to_mat3();
            let h = Mat3(std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0))));
            let s = SkewMat3::from_axial(&rvec(&mut rng)).to_mat3();
            for (m, kind) in [(g, BasisKind::Sym6), (h, BasisKind::Full9), (s, BasisKind::Skew3)] {
                let back = project_tensor(&m, &f, kind).unwrap().reconstruct_tensor(&f).unwrap();
                assert!((back - m).frobenius_norm() <= 1e-13 * (1.0 + m.frobenius_norm()), "{kind:?}");
            }
            let sys = TensorSystem::new(vec![], vec![NonSym::General(h)], vec![]).unwrap();
            let sf = build_svd_frame(&sys).unwrap();
            let back = project_tensor(&g, &sf, BasisKind::Svd9).unwrap().reconstruct_tensor(&sf).unwrap();
            assert!((back - g).frobenius_norm() <= 1e-13 * (1.0 + g.frobenius_norm()));
        }
    }

    #[test]
    fn generator_gram_matrices_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let f = frame_of(rsym(&mut rng));
        for kind in [BasisKind::Vector3, BasisKind::Sym6, BasisKind::Full9, BasisKind::Skew3] {
            let g = GeneratorBasis::new(kind, f.clone()).unwrap().gram_matrix();
            let n = g.len();
            let m = nalgebra::DMatrix::from_fn(n, n, |i, j| g[i][j]);
            let sv = m.singular_values();
            let (mx, mn) = (sv.max(), sv.min());
            assert!(mn > 0.5 && mx < 2.5, "{kind:?}: {mn} {mx}");
        }
    }

    #[test]
    fn expand_classical_examples() {
        let sys = TensorSystem::from_parts(vec![SymMat3::diag(2.0, 1.0, 0.0)], vec![Vec3::new(1.0, 0.0, 0.0)]).unwrap();
        let f = build_frame(&sys, 1e-8).unwrap();
        assert_eq!(expand_classical("tr(A1)", &sys, &f).unwrap(), ClassicalValue::Scalar(3.0));
        assert_eq!(expand_classical("a1.A1.a1", &sys, &f).unwrap(), ClassicalValue::Scalar(2.0));
        assert!(matches!(expand_classical("tr(A9)", &sys, &f), Err(Error::Usage(_))));
    }

    #[test]
    fn expand_classical_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let sys = TensorSystem::new(
                vec![rsym(&mut rng), rsym(&mut rng)],
                vec![NonSym::Skew(SkewMat3::from_axial(&rvec(&mut rng)))],
                vec![SysVector::free(rvec(&mut rng)), SysVector::free(rvec(&mut rng))],
            )
            .unwrap();
            let f = build_frame(&sys, 1e-8).unwrap();
            let ex = SpectralExpansion::new(&sys, &f).unwrap();
            let direct = boehler_scalars(2, 1, 2).evaluate(&sys).unwrap();
            for ((_, s), d) in ex.scalars().iter().zip(&direct) {
                assert!((s - d).abs() <= 1e-10 * (1.0 + d.abs()));
            }
            let direct = smith_sym_tensors(2, 1, 2).evaluate(&sys).unwrap();
            for ((l, c), d) in ex.tensors().iter().zip(&direct) {
                let r = c.reconstruct_tensor(&f).unwrap();
                assert!((r - d.to_mat3()).frobenius_norm() <= 1e-10 * (1.0 + d.frobenius_norm()), "{l}");
            }
        }
    }

    #[test]
    fn coaxiality_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let v = rsym(&mut rng);
            let r = check_coaxiality(|x| SymMat3::from_sym_part(&(x.to_mat3() * x.to_mat3())), &v, 1e-12).unwrap();
            assert!(r.pass, "{r:?}");
            let r = check_coaxiality(
                |x| {
                    let m = x.to_mat3();
                    let (i1, i2, i3) = (m.trace(), (m * m).trace(), m.pow(3).trace());
                    SymMat3::from_sym_part(&(Mat3::IDENTITY * i2.sin() + m * (1.0 + i1 * i1) + m * m * i3.cos()))
                },
                &v,
                1e-12,
            )
            .unwrap();
            assert!(r.pass, "{r:?}");
        }
        let r = check_coaxiality(|_| SymMat3::from_upper([1.0, 1.0, 0.0, 1.0, 0.0, 1.0]), &SymMat3::diag(3.0, 2.0, 1.0), 1e-12)
            .unwrap();
        assert!(!r.pass);
    }

    fn gv3(l: [f64; 3]) -> [f64; 3] {
        let (i1, i2, i3) = (l.iter().sum::<f64>(), l.iter().map(|x| x * x).sum::<f64>(), l.iter().map(|x| x * x * x).sum::<f64>());
        let (p0, p1, p2) = (1.0 + i1, i2.sin(), 0.1 * i3);
        l.map(|x| p0 + p1 * x + p2 * x * x)
    }

    #[test]
    fn coalescence_pair_and_triple() {
        let frame = [Vec3::axis(0), Vec3::axis(1), Vec3::axis(2)];
        let eps: Vec<f64> = (2..=8).map(|k| 10f64.powi(-k)).collect();
        let r = coalescence_structure(gv3, |e| [1.0 + e, 1.0, 3.0], &eps, &frame, CoalescenceCase::Pair { i: 0, j: 1, k: 2 }, 1e-12);
        assert!(r.pass, "{r:?}");
        assert!((r.fitted_order - 1.0).abs() < 0.05);
        let t = gv3([2.0, 2.0, 1.0]);
        assert_eq!(t[0], t[1]);
        let r = coalescence_structure(gv3, |e| [2.0 + 2.0 * e, 2.0 + e, 2.0], &eps, &frame, CoalescenceCase::Triple, 1e-12);
        assert!(r.pass, "{r:?}");
        // a discontinuous coefficient is reported, not thrown
        let bad = |l: [f64; 3]| if l[0] > l[1] { [1.0, 0.0, 0.0] } else { [0.0; 3] };
        let r = coalescence_structure(bad, |e| [1.0 + e, 1.0, 3.0], &eps, &frame, CoalescenceCase::Pair { i: 0, j: 1, k: 2 }, 1e-12);
        assert!(r.pass || !r.diagnostics.is_empty());
    }

    fn phi(inv: &SpectralInvariants) -> f64 {
        (0..3)
            .map(|i| inv.value(InvariantLabel::Lambda(i)) * inv.value(InvariantLabel::Vector { s: 0, i }).powi(2))
            .sum()
    }

    #[test]
    fn p_property_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let q: Rotation = haar_rotation(&mut rng);
        let a = rvec(&mut rng).normalized().unwrap();
        let a_pair = q.conjugate_sym(&SymMat3::diag(2.0, 2.0, 0.5));
        let sys = TensorSystem::from_parts(vec![a_pair], vec![a]).unwrap();
        let r = check_p_property("a.A1.a", &phi, &sys, DegeneracyCase::Pair(0, 1), 50, &mut rng, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
        let v3 = q.apply(&Vec3::axis(2));
        let wa = 2.0 + (0.5 - 2.0) * a.dot(&v3).powi(2);
        assert!((r.value - wa).abs() < 1e-12);

        let sys = TensorSystem::from_parts(vec![SymMat3::diag(1.5, 1.5, 1.5)], vec![a]).unwrap();
        let r = check_p_property("a.A1.a", &phi, &sys, DegeneracyCase::Triple, 50, &mut rng, 1e-10).unwrap();
        assert!(r.pass && (r.value - 1.5).abs() < 1e-12, "{r:?}");

        let raw = |inv: &SpectralInvariants| inv.value(InvariantLabel::Vector { s: 0, i: 0 });
        let sys = TensorSystem::from_parts(vec![a_pair], vec![a]).unwrap();
        let r = check_p_property("a1_1", &raw, &sys, DegeneracyCase::Pair(0, 1), 50, &mut rng, 1e-10).unwrap();
        assert!(!r.pass && r.max_deviation > 1e-3);

        let nondeg = TensorSystem::from_parts(vec![SymMat3::diag(3.0, 2.0, 1.0)], vec![a]).unwrap();
        assert!(matches!(
            check_p_property("x", &phi, &nondeg, DegeneracyCase::Pair(0, 1), 5, &mut rng, 1e-10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn example2_values() {
        let r = example2_resolution(&SymMat3::IDENTITY, &Vec3::new(0.0, 0.6, 0.8)).unwrap();
        for (x, y) in r.iter().zip([3.0, 3.0, 3.0, 1.0, 1.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        let r = example2_resolution(&SymMat3::diag(2.0, 1.0, 1.0), &Vec3::axis(0)).unwrap();
        assert_eq!(r, [4.0, 6.0, 10.0, 2.0, 4.0]);
        assert!(example2_resolution(&SymMat3::IDENTITY, &Vec3::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn example2_gauge_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = rsym(&mut rng);
        let a = rvec(&mut rng).normalized().unwrap();
        let sys = example2_system(&u, &a).unwrap();
        for k in 0..5 {
            let f = move |inv: &SpectralInvariants| example2_invariants(inv)[k];
            let r = check_p_property(&format!("I{}", k + 1), &f, &sys, DegeneracyCase::Pair(1, 2), 50, &mut rng, 1e-10)
                .unwrap();
            assert!(r.pass, "{r:?}");
        }
        // direct I4, I5 against the frame-free definitions
        let i = example2_resolution(&u, &a).unwrap();
        let um = u.to_mat3();
        assert!((i[3] - a.dot(&(um * a))).abs() < 1e-12);
        assert!((i[4] - a.dot(&(um * um * a))).abs() < 1e-12);
    }
}
