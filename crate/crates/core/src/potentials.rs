//! Potential vectors and tensors: gradients of isotropic scalar functions
//! assembled from spectral partial derivatives, and the transversely
//! isotropic hyperelastic stress.
//!
//! A scalar function is given by its direct evaluator. Its spectral form with
//! respect to one argument is the evaluator with that argument rebuilt from
//! an eigen (or singular) system, so partials with respect to eigenvalues and
//! eigenvectors are well defined. Each combination
//! `∂W/∂vᵢ·vⱼ − ∂W/∂vⱼ·vᵢ` is the rate of change of `W` as the frame turns
//! in the `(i, j)` plane, and is differenced along that rotation, which keeps
//! the frame orthonormal. Analytic partials may be attached instead.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd;
use crate::lin3::{eig_sym, orthogonal_unit, svd3, Mat3, SymMat3, Vec3, DEFAULT_DEGENERACY_TOL};
use crate::representation::{project_tensor, BasisKind, Coefficients};
use crate::spectral_frame::SpectralFrame;
use crate::system::{ArgRef, NonSym, TensorSystem};

/// Eigen (or singular) data of the argument being differentiated.
/// Vector arguments use `lambdas[0] = |a|`, `v[0] = a/|a|`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPoint {
    pub lambdas: [f64; 3],
    pub v: [Vec3; 3],
    pub u: Option<[Vec3; 3]>,
}

/// `∂W/∂λᵢ`, `∂W/∂vᵢ` and (singular systems) `∂W/∂uᵢ`, the vector
/// partials taken with the frame vectors treated as independent.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPartials {
    pub d_lambda: [f64; 3],
    pub d_v: [Vec3; 3],
    pub d_u: Option<[Vec3; 3]>,
}

pub type Evaluator = Arc<dyn Fn(&TensorSystem) -> f64 + Send + Sync>;
pub type PartialsFn = Arc<dyn Fn(&SpectralPoint, &TensorSystem) -> SpectralPartials + Send + Sync>;

/// An isotropic scalar function of a tensor system.
#[derive(Clone)]
pub struct ScalarFunctionOfSystem {
    pub name: String,
    evaluator: Evaluator,
    /// Arguments the evaluator reads; empty means "all".
    pub reads: Vec<ArgRef>,
    partials: HashMap<ArgRef, PartialsFn>,
}

impl std::fmt::Debug for ScalarFunctionOfSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarFunctionOfSystem")
            .field("name", &self.name)
            .field("reads", &self.reads)
            .field("analytic", &self.partials.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl ScalarFunctionOfSystem {
    pub fn new(name: impl Into<String>, f: impl Fn(&TensorSystem) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFunctionOfSystem { name: name.into(), evaluator: Arc::new(f), reads: Vec::new(), partials: HashMap::new() }
    }

    pub fn reading(mut self, reads: Vec<ArgRef>) -> Self {
        self.reads = reads;
        self
    }

    /// Attaches analytic spectral partials for one argument.
    pub fn with_partials(
        mut self,
        arg: ArgRef,
        p: impl Fn(&SpectralPoint, &TensorSystem) -> SpectralPartials + Send + Sync + 'static,
    ) -> Self {
        self.partials.insert(arg, Arc::new(p));
        self
    }

    pub fn eval(&self, system: &TensorSystem) -> f64 {
        (self.evaluator)(system)
    }

    pub fn has_analytic_partials(&self, arg: ArgRef) -> bool {
        self.partials.contains_key(&arg)
    }

    /// Checks isotropy at `sample` under the given rotations (deviation
    /// `≤ 1e-9·(1 + |W|)`) and returns the function on success.
    pub fn registered(self, sample: &TensorSystem, rotations: &[crate::lin3::Rotation]) -> Result<Self> {
        let w0 = self.eval(sample);
        for q in rotations {
            let w = self.eval(&sample.conjugated(q));
            if (w - w0).abs() > 1e-9 * (1.0 + w0.abs()) {
                return Err(Error::Precondition(format!(
                    "{} is not isotropic: {w0} vs {w} under a rotation",
                    self.name
                )));
            }
        }
        Ok(self)
    }
}

/// Step and degeneracy thresholds for the gradient formulas.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GradientOptions {
    /// Finite-difference step; default `1e-5·(1 + scale)` for eigenvalues and
    /// `1e-5` radians for frame rotations.
    pub h: Option<f64>,
    /// Smallest admissible eigenvalue gap; default `1e-6·(1 + ‖X‖)`.
    pub gap_min: Option<f64>,
}

fn turn(v: &[Vec3; 3], i: usize, j: usize, th: f64) -> [Vec3; 3] {
    let (c, s) = (th.cos(), th.sin());
    let mut out = *v;
    out[i] = v[i] * c + v[j] * s;
    out[j] = v[j] * c - v[i] * s;
    out
}

fn check_gaps(lambdas: &[f64; 3], gap_min: f64) -> Result<()> {
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let gap = (lambdas[i] - lambdas[j]).abs();
        if gap <= gap_min {
            return Err(Error::DegenerateConfiguration { i: i + 1, j: j + 1, gap, gap_min });
        }
    }
    Ok(())
}

/// Components of `∂W/∂a` on `v₁, v₂, v₃`: `∂W/∂λ` and `(1/λ)∂W/∂v₁·vₖ`.
pub fn grad_vector_components(
    w: &ScalarFunctionOfSystem,
    system: &TensorSystem,
    which: usize,
    opts: GradientOptions,
) -> Result<(SpectralPoint, [f64; 3])> {
    let a = system
        .vecs()
        .get(which)
        .ok_or_else(|| Error::Usage(format!("no vector a{}", which + 1)))?
        .v;
    let lam = a.norm();
    if lam <= 1e-12 {
        return Err(Error::SingularConfiguration("vector gradient at a = 0 divides by |a|".into()));
    }
    let v1 = a * (1.0 / lam);
    let v2 = orthogonal_unit(&v1);
    let point = SpectralPoint { lambdas: [lam, 0.0, 0.0], v: [v1, v2, v1.cross(&v2)], u: None };

    if let Some(p) = w.partials.get(&ArgRef::Vector(which)) {
        let d = p(&point, system);
        let comps = [d.d_lambda[0], d.d_v[0].dot(&point.v[1]) / lam, d.d_v[0].dot(&point.v[2]) / lam];
        return Ok((point, comps));
    }
    let at = |l: f64, dir: Vec3| w.eval(&system.with_vector(which, dir * l));
    let h = opts.h.unwrap_or_else(|| fd::default_step(lam));
    let d_lam = fd::central(|t| at(lam + t, v1), h);
    let ht = opts.h.unwrap_or(1e-5);
    let d2 = fd::central(|t| at(lam, v1 * t.cos() + point.v[1] * t.sin()), ht);
    let d3 = fd::central(|t| at(lam, v1 * t.cos() + point.v[2] * t.sin()), ht);
    Ok((point, [d_lam, d2 / lam, d3 / lam]))
}

/// `∂W/∂a = ∂W/∂λ v₁ + (1/λ)(I − v₁⊗v₁)∂W/∂v₁` with `λ = |a|`.
pub fn grad_vector(w: &ScalarFunctionOfSystem, system: &TensorSystem, which: usize, opts: GradientOptions) -> Result<Vec3> {
    let (p, c) = grad_vector_components(w, system, which, opts)?;
    Ok(p.v[0] * c[0] + p.v[1] * c[1] + p.v[2] * c[2])
}

/// `∂W/∂V = Σ ∂W/∂λᵢ vᵢ⊗vᵢ + Σ_{i<j} (∂W/∂vᵢ·vⱼ − ∂W/∂vⱼ·vᵢ)/(2(λᵢ − λⱼ)) (vᵢ⊗vⱼ + vⱼ⊗vᵢ)`.
pub fn grad_sym_tensor(
    w: &ScalarFunctionOfSystem,
    system: &TensorSystem,
    which: usize,
    opts: GradientOptions,
) -> Result<SymMat3> {
    let a = *system
        .sym()
        .get(which)
        .ok_or_else(|| Error::Usage(format!("no symmetric tensor A{}", which + 1)))?;
    let e = eig_sym(&a, DEFAULT_DEGENERACY_TOL)?;
    let gap_min = opts.gap_min.unwrap_or(1e-6 * (1.0 + a.frobenius_norm()));
    check_gaps(&e.values, gap_min)?;
    let point = SpectralPoint { lambdas: e.values, v: e.vectors, u: None };
    let (lam, v) = (point.lambdas, point.v);

    let (d_lambda, rot) = if let Some(p) = w.partials.get(&ArgRef::Sym(which)) {
        let d = p(&point, system);
        let r = [(0, 1), (0, 2), (1, 2)].map(|(i, j)| d.d_v[i].dot(&v[j]) - d.d_v[j].dot(&v[i]));
        (d.d_lambda, r)
    } else {
        let rebuild = |l: [f64; 3], v: &[Vec3; 3]| {
            let m = (0..3).fold(Mat3::ZERO, |acc, k| acc + v[k].outer(&v[k]) * l[k]);
            w.eval(&system.with_sym(which, SymMat3::from_sym_part(&m)))
        };
        let scale = lam.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let h = opts.h.unwrap_or_else(|| fd::default_step(scale));
        let d_lambda: [f64; 3] = std::array::from_fn(|k| {
            fd::central(
                |t| {
                    let mut l = lam;
                    l[k] += t;
                    rebuild(l, &v)
                },
                h,
            )
        });
        let ht = opts.h.unwrap_or(1e-5);
        let rot = [(0, 1), (0, 2), (1, 2)].map(|(i, j)| fd::central(|t| rebuild(lam, &turn(&v, i, j, t)), ht));
        (d_lambda, rot)
    };

    let mut g = Mat3::ZERO;
    for k in 0..3 {
        g += v[k].outer(&v[k]) * d_lambda[k];
    }
    for (n, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        let c = rot[n] / (2.0 * (lam[i] - lam[j]));
        g += (v[i].outer(&v[j]) + v[j].outer(&v[i])) * c;
    }
    Ok(SymMat3::from_sym_part(&g))
}

/// `∂W/∂F = Σ ∂W/∂λᵢ vᵢ⊗uᵢ + Σ_{i≠j} (λᵢ Uᵢⱼ + λⱼ Vᵢⱼ)/(λᵢ² − λⱼ²) vᵢ⊗uⱼ` with
/// `Uᵢⱼ = ∂W/∂uᵢ·uⱼ − ∂W/∂uⱼ·uᵢ`, `Vᵢⱼ = ∂W/∂vᵢ·vⱼ − ∂W/∂vⱼ·vᵢ` and
/// `F = Σ λᵢ vᵢ⊗uᵢ`.
pub fn grad_nonsym_tensor(
    w: &ScalarFunctionOfSystem,
    system: &TensorSystem,
    which: usize,
    opts: GradientOptions,
) -> Result<Mat3> {
    let f = match system.nonsym().get(which) {
        Some(NonSym::General(f)) => *f,
        Some(NonSym::Skew(_)) => return Err(Error::Class("singular-value gradient needs a general tensor".into())),
        None => return Err(Error::Usage(format!("no non-symmetric tensor H{}", which + 1))),
    };
    let s = svd3(&f)?;
    let gap_min = opts.gap_min.unwrap_or(1e-6 * (1.0 + f.frobenius_norm()));
    check_gaps(&s.values, gap_min)?;
    let point = SpectralPoint { lambdas: s.values, v: s.left, u: Some(s.right) };
    let (lam, v, u) = (s.values, s.left, s.right);

    // uu[i][j] = Uᵢⱼ, vv[i][j] = Vᵢⱼ (antisymmetric)
    let mut uu = [[0.0; 3]; 3];
    let mut vv = [[0.0; 3]; 3];
    let d_lambda = if let Some(p) = w.partials.get(&ArgRef::NonSym(which)) {
        let d = p(&point, system);
        let du = d.d_u.ok_or_else(|| Error::Usage("analytic partials lack ∂W/∂u".into()))?;
        for i in 0..3 {
            for j in 0..3 {
                uu[i][j] = du[i].dot(&u[j]) - du[j].dot(&u[i]);
                vv[i][j] = d.d_v[i].dot(&v[j]) - d.d_v[j].dot(&v[i]);
            }
        }
        d.d_lambda
    } else {
        let rebuild = |l: [f64; 3], v: &[Vec3; 3], u: &[Vec3; 3]| {
            let m = (0..3).fold(Mat3::ZERO, |acc, k| acc + v[k].outer(&u[k]) * l[k]);
            w.eval(&system.with_nonsym(which, NonSym::General(m)))
        };
        let h = opts.h.unwrap_or_else(|| fd::default_step(lam[0]));
        let d_lambda: [f64; 3] = std::array::from_fn(|k| {
            fd::central(
                |t| {
                    let mut l = lam;
                    l[k] += t;
                    rebuild(l, &v, &u)
                },
                h,
            )
        });
        let ht = opts.h.unwrap_or(1e-5);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            uu[i][j] = fd::central(|t| rebuild(lam, &v, &turn(&u, i, j, t)), ht);
            vv[i][j] = fd::central(|t| rebuild(lam, &turn(&v, i, j, t), &u), ht);
            uu[j][i] = -uu[i][j];
            vv[j][i] = -vv[i][j];
        }
        d_lambda
    };

    let mut g = Mat3::ZERO;
    for i in 0..3 {
        g += v[i].outer(&u[i]) * d_lambda[i];
        for j in 0..3 {
            if i != j {
                let c = (lam[i] * uu[i][j] + lam[j] * vv[i][j]) / (lam[i] * lam[i] - lam[j] * lam[j]);
                g += v[i].outer(&u[j]) * c;
            }
        }
    }
    Ok(g)
}

type EnergyFn = Arc<dyn Fn(&[f64; 5]) -> f64 + Send + Sync>;
type EnergyPartials = Arc<dyn Fn(&[f64; 5]) -> [f64; 5] + Send + Sync>;

/// `W(C, L) = Ŵ(I₁, …, I₅)` with `I₁ = tr C`, `I₂ = tr C²`, `I₃ = tr C³`,
/// `I₄ = tr CL`, `I₅ = tr C²L`, `L = a⊗a`.
#[derive(Clone)]
pub struct HyperelasticModel {
    pub name: String,
    w_hat: EnergyFn,
    partials: Option<EnergyPartials>,
}

impl std::fmt::Debug for HyperelasticModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HyperelasticModel").field("name", &self.name).finish()
    }
}

impl HyperelasticModel {
    pub fn new(name: impl Into<String>, w_hat: impl Fn(&[f64; 5]) -> f64 + Send + Sync + 'static) -> Self {
        HyperelasticModel { name: name.into(), w_hat: Arc::new(w_hat), partials: None }
    }

    pub fn with_partials(mut self, p: impl Fn(&[f64; 5]) -> [f64; 5] + Send + Sync + 'static) -> Self {
        self.partials = Some(Arc::new(p));
        self
    }

    pub fn invariants(c: &SymMat3, a: &Vec3) -> [f64; 5] {
        let cm = c.to_mat3();
        let c2 = cm * cm;
        let l = a.outer(a);
        [cm.trace(), c2.trace(), (c2 * cm).trace(), (cm * l).trace(), (c2 * l).trace()]
    }

    pub fn w_hat(&self, inv: &[f64; 5]) -> f64 {
        (self.w_hat)(inv)
    }

    pub fn energy(&self, c: &SymMat3, a: &Vec3) -> f64 {
        self.w_hat(&Self::invariants(c, a))
    }

    /// `∂Ŵ/∂Iₖ`, analytic if attached, else central differences with step
    /// `1e-5·(1 + |Iₖ|)`.
    pub fn partials(&self, inv: &[f64; 5]) -> [f64; 5] {
        if let Some(p) = &self.partials {
            return p(inv);
        }
        std::array::from_fn(|k| {
            fd::central(
                |t| {
                    let mut x = *inv;
                    x[k] += t;
                    self.w_hat(&x)
                },
                fd::default_step(inv[k].abs()),
            )
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperelasticStress {
    /// `2Ŵ₁I + 4Ŵ₂C + 6Ŵ₃C² + 2Ŵ₄L + 2Ŵ₅(CL + LC)`.
    pub s_potential: SymMat3,
    /// Six-generator form rebuilt from its `vᵢ⊗vⱼ` coefficients in the frame of `C`.
    pub s_representation: SymMat3,
    /// `(α₀, …, α₅)` on `I, L, C, C², CL + LC, C²L + LC²`.
    pub alphas: [f64; 6],
    pub residual: f64,
    pub sym6_potential: Coefficients,
    pub sym6_representation: Coefficients,
    pub sym6_max_diff: f64,
}

/// Second Piola–Kirchhoff stress two ways: from the energy, and from the six
/// classical generators with matched coefficients, the latter assembled from
/// the generators' components in the eigenbasis of `C`.
pub fn hyperelastic_stress(model: &HyperelasticModel, c: &SymMat3, a: &Vec3) -> Result<HyperelasticStress> {
    if !c.is_finite() || !a.is_finite() {
        return Err(Error::InvalidInput("non-finite C or a".into()));
    }
    if (a.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("fibre direction must be a unit vector (norm {})", a.norm())));
    }
    let e = eig_sym(c, DEFAULT_DEGENERACY_TOL)?;
    if e.values[2] <= 0.0 {
        return Err(Error::Domain(format!("C is not positive definite (eigenvalues {:?})", e.values)));
    }
    let inv = HyperelasticModel::invariants(c, a);
    let d = model.partials(&inv);
    let cm = c.to_mat3();
    let c2 = cm * cm;
    let l = a.outer(a);
    let s_pot = Mat3::IDENTITY * (2.0 * d[0])
        + cm * (4.0 * d[1])
        + c2 * (6.0 * d[2])
        + l * (2.0 * d[3])
        + (cm * l + l * cm) * (2.0 * d[4]);
    let alphas = [2.0 * d[0], 2.0 * d[3], 4.0 * d[1], 6.0 * d[2], 2.0 * d[4], 0.0];

    // generator components in the eigenbasis of C
    let (lam, v) = (e.values, e.vectors);
    let ac: [f64; 3] = std::array::from_fn(|i| a.dot(&v[i]));
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            let lij = ac[i] * ac[j];
            t[i][j] = alphas[0] * delta
                + alphas[1] * lij
                + alphas[2] * lam[i] * delta
                + alphas[3] * lam[i] * lam[i] * delta
                + alphas[4] * (lam[i] + lam[j]) * lij
                + alphas[5] * (lam[i] * lam[i] + lam[j] * lam[j]) * lij;
        }
    }
    let mut s_rep = Mat3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            s_rep += v[i].outer(&v[j]) * t[i][j];
        }
    }
    let frame = SpectralFrame {
        kind: crate::spectral_frame::FrameKind::SymTensor,
        lambdas: lam,
        v,
        u: None,
        degeneracy: e.degeneracy.clone(),
        source: ArgRef::Sym(0),
    };
    let sym6_potential = project_tensor(&s_pot.sym_part(), &frame, BasisKind::Sym6)?;
    let sym6_representation = project_tensor(&s_rep.sym_part(), &frame, BasisKind::Sym6)?;
    let sym6_max_diff = sym6_potential
        .values
        .iter()
        .zip(&sym6_representation.values)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let (s_potential, s_representation) = (SymMat3::from_sym_part(&s_pot), SymMat3::from_sym_part(&s_rep));
    Ok(HyperelasticStress {
        residual: (s_potential - s_representation).frobenius_norm(),
        s_potential,
        s_representation,
        alphas,
        sym6_potential,
        sym6_representation,
        sym6_max_diff,
    })
}

/// `∂W/∂E` by central differences through `C = I + 2E`.
pub fn hyperelastic_stress_fd(model: &HyperelasticModel, c: &SymMat3, a: &Vec3) -> SymMat3 {
    let e = (*c - SymMat3::IDENTITY).scaled(0.5);
    let h = fd::default_step(e.frobenius_norm());
    fd::gradient_sym(|e| model.energy(&(SymMat3::IDENTITY + e.scaled(2.0)), a), &e, h)
}
