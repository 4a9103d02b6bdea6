//! Verification engines: the isotropy harness, Jacobian rank of invariant
//! lists, classical-versus-spectral comparisons and the report types.

use std::time::Duration;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use crate::fd;

use crate::classical_bases::boehler_scalars;
use crate::error::{Error, Result};
use crate::lin3::{eig_sym, haar_rotation, orthogonal_unit, svd3, Mat3, SkewMat3, SymMat3, Vec3};
use crate::spectral_frame::{
    build_frame, build_svd_frame, extract_invariants, irreducible_count, CountFlags, SpectralInvariants,
};
use crate::system::{NonSym, SysVector, TensorSystem};

/// An evaluator together with how it should transform under rotation.
pub enum Evaluator<'a> {
    /// `W(Q·sys) = W(sys)`.
    Scalar(&'a dyn Fn(&TensorSystem) -> f64),
    /// A list of scalars, each invariant.
    Scalars(&'a dyn Fn(&TensorSystem) -> Result<Vec<f64>>),
    /// `g(Q·sys) = Q g(sys)`.
    Vector(&'a dyn Fn(&TensorSystem) -> Vec3),
    /// `G(Q·sys) = Q G(sys) Qᵀ`.
    SymTensor(&'a dyn Fn(&TensorSystem) -> SymMat3),
    /// `H(Q·sys) = Q H(sys) Qᵀ`.
    Tensor(&'a dyn Fn(&TensorSystem) -> Mat3),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropyReport {
    /// Largest deviation over the trials, each normalized by `1 + |value|`.
    pub max_deviation: f64,
    pub trials: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Samples `trials` Haar rotations and measures the worst normalized
/// violation of invariance (scalars) or equivariance (vectors, tensors).
pub fn verify_isotropy<R: Rng + ?Sized>(
    eval: &Evaluator<'_>,
    system: &TensorSystem,
    trials: usize,
    rng: &mut R,
    tol: f64,
) -> IsotropyReport {
    let mut worst = 0.0f64;
    let base_list = match eval {
        Evaluator::Scalars(f) => Some(f(system)),
        _ => None,
    };
    for _ in 0..trials {
        let q = haar_rotation(rng);
        let rs = system.conjugated(&q);
        let dev = match eval {
            Evaluator::Scalar(f) => {
                let w = f(system);
                (f(&rs) - w).abs() / (1.0 + w.abs())
            }
            Evaluator::Scalars(f) => match (base_list.as_ref().expect("computed above"), f(&rs)) {
                (Ok(a), Ok(b)) if a.len() == b.len() => a
                    .iter()
                    .zip(&b)
                    .fold(0.0f64, |m, (x, y)| m.max((x - y).abs() / (1.0 + x.abs()))),
                _ => f64::INFINITY,
            },
            Evaluator::Vector(f) => {
                let g = f(system);
                (q.apply(&g) - f(&rs)).norm() / (1.0 + g.norm())
            }
            Evaluator::SymTensor(f) => {
                let g = f(system);
                (q.conjugate_sym(&g) - f(&rs)).frobenius_norm() / (1.0 + g.frobenius_norm())
            }
            Evaluator::Tensor(f) => {
                let g = f(system);
                (q.conjugate_mat(&g) - f(&rs)).frobenius_norm() / (1.0 + g.frobenius_norm())
            }
        };
        worst = worst.max(if dev.is_nan() { f64::INFINITY } else { dev });
    }
    IsotropyReport { max_deviation: worst, trials, tolerance: tol, pass: worst <= tol }
}

/// Which kinds of arguments a random system gets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub skew: bool,
    pub unit_vectors: bool,
}

/// A generic system with entries uniform in `[-1, 1]`.
pub fn random_system<R: Rng + ?Sized>(rng: &mut R, spec: SystemSpec) -> Result<TensorSystem> {
    let mut r = || rng.gen_range(-1.0..1.0);
    let sym = (0..spec.n).map(|_| SymMat3::from_upper(std::array::from_fn(|_| r()))).collect();
    let nonsym = (0..spec.m)
        .map(|_| {
            if spec.skew {
                NonSym::Skew(SkewMat3::new(r(), r(), r()))
            } else {
                NonSym::General(Mat3(std::array::from_fn(|_| std::array::from_fn(|_| r()))))
            }
        })
        .collect();
    let mut vecs = Vec::with_capacity(spec.p);
    for _ in 0..spec.p {
        let v = Vec3::new(r(), r(), r());
        vecs.push(if spec.unit_vectors {
            SysVector::unit(v.normalized().ok_or_else(|| Error::DegenerateInput("zero sample".into()))?)
        } else {
            SysVector::free(v)
        });
    }
    TensorSystem::new(sym, nonsym, vecs)
}

/// Local coordinates around a base system: 6 per symmetric tensor, 9 per
/// general and 3 per skew tensor, 3 per free vector and 2 tangent
/// coordinates per unit vector.
#[derive(Clone, Debug)]
pub struct Parameterization {
    base: TensorSystem,
    tangents: Vec<Option<[Vec3; 2]>>,
}

impl Parameterization {
    pub fn new(base: &TensorSystem) -> Self {
        let tangents = base
            .vecs()
            .iter()
            .map(|a| {
                a.unit.then(|| {
                    let t1 = orthogonal_unit(&a.v);
                    [t1, a.v.cross(&t1)]
                })
            })
            .collect();
        Parameterization { base: base.clone(), tangents }
    }

    pub fn dim(&self) -> usize {
        let nonsym: usize = self.base.nonsym().iter().map(|h| if h.is_skew() { 3 } else { 9 }).sum();
        let vecs: usize = self.base.vecs().iter().map(|a| if a.unit { 2 } else { 3 }).sum();
        6 * self.base.n() + nonsym + vecs
    }

    pub fn base_params(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        for a in self.base.sym() {
            x.extend_from_slice(&a.0);
        }
        for h in self.base.nonsym() {
            match h {
                NonSym::General(m) => x.extend(m.0.iter().flatten()),
                NonSym::Skew(w) => x.extend_from_slice(&w.0),
            }
        }
        for a in self.base.vecs() {
            if a.unit {
                x.extend_from_slice(&[0.0, 0.0]);
            } else {
                x.extend_from_slice(&a.v.0);
            }
        }
        x
    }

    /// The system at coordinates `x`; unit vectors stay exactly on the sphere.
    pub fn system(&self, x: &[f64]) -> TensorSystem {
        let mut k = 0;
        let mut take = |n: usize| {
            let s = &x[k..k + n];
            k += n;
            s
        };
        let sym = (0..self.base.n())
            .map(|_| {
                let s = take(6);
                SymMat3([s[0], s[1], s[2], s[3], s[4], s[5]])
            })
            .collect();
        let nonsym = self
            .base
            .nonsym()
            .iter()
            .map(|h| match h {
                NonSym::General(_) => {
                    let s = take(9);
                    NonSym::General(Mat3([[s[0], s[1], s[2]], [s[3], s[4], s[5]], [s[6], s[7], s[8]]]))
                }
                NonSym::Skew(_) => {
                    let s = take(3);
                    NonSym::Skew(SkewMat3([s[0], s[1], s[2]]))
                }
            })
            .collect();
        let vecs = self
            .base
            .vecs()
            .iter()
            .zip(&self.tangents)
            .map(|(a, t)| match t {
                Some([t1, t2]) => {
                    let s = take(2);
                    let v = a.v + *t1 * s[0] + *t2 * s[1];
                    SysVector { v: v * (1.0 / v.norm()), unit: true }
                }
                None => {
                    let s = take(3);
                    SysVector::free(Vec3([s[0], s[1], s[2]]))
                }
            })
            .collect();
        TensorSystem::from_raw(sym, nonsym, vecs)
    }

    /// Dimension of a generic rotation orbit: 2 when the system is a single
    /// vector or a single skew tensor (a rotation about it fixes it), 3 otherwise.
    pub fn generic_orbit_dim(&self) -> usize {
        let b = &self.base;
        if b.n() == 0 && b.m() + b.p() == 1 && b.all_nonsym_skew() {
            2
        } else {
            3
        }
    }

    /// Upper bound on the rank of any list of invariants.
    pub fn orbit_space_dim(&self) -> usize {
        self.dim().saturating_sub(self.generic_orbit_dim())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub configuration: String,
    pub ambient_dim: usize,
    pub items: usize,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// `min(items, ambient − generic orbit dimension)`.
    pub expected_rank: usize,
    pub threshold: f64,
    pub seed: Option<u64>,
}

/// Gaps below this (relative) make a base point non-generic for rank tests.
const GENERIC_GAP: f64 = 1e-6;

fn check_generic(system: &TensorSystem) -> Result<()> {
    for (r, a) in system.sym().iter().enumerate() {
        let e = eig_sym(a, 1e-8)?;
        let scale = 1.0 + a.frobenius_norm();
        if (e.values[0] - e.values[1]).abs().min((e.values[1] - e.values[2]).abs()) <= GENERIC_GAP * scale {
            return Err(Error::Precondition(format!("A{} has (nearly) repeated eigenvalues", r + 1)));
        }
    }
    for (t, h) in system.nonsym().iter().enumerate() {
        let m = h.to_mat3();
        let scale = 1.0 + m.frobenius_norm();
        match h {
            NonSym::General(_) => {
                let s = svd3(&m)?.values;
                if (s[0] - s[1]).min(s[1] - s[2]).min(s[2]) <= GENERIC_GAP * scale {
                    return Err(Error::Precondition(format!("H{} has repeated or zero singular values", t + 1)));
                }
            }
            NonSym::Skew(w) => {
                if w.axial().norm() <= GENERIC_GAP * scale {
                    return Err(Error::Precondition(format!("W{} is (nearly) zero", t + 1)));
                }
            }
        }
    }
    for (s, a) in system.vecs().iter().enumerate() {
        if a.v.norm() <= GENERIC_GAP {
            return Err(Error::Precondition(format!("a{} is (nearly) zero", s + 1)));
        }
    }
    Ok(())
}

/// Below this every singular value is finite-difference noise (a list of
/// constants differences to roughly `ε/h ≈ 1e-11`).
const RANK_FLOOR: f64 = 1e-8;

/// Numerical rank of a Jacobian: singular values above `σ_max·1e-7·√(max dim)`,
/// and never above an absolute floor of `1e-8`.
pub fn numerical_rank(rows: &[Vec<f64>]) -> (Vec<f64>, usize, f64) {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return (Vec::new(), 0, 0.0);
    }
    let m = DMatrix::from_fn(r, c, |i, j| rows[i][j]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let threshold = (sv[0] * 1e-7 * (r.max(c) as f64).sqrt()).max(RANK_FLOOR);
    let rank = sv.iter().filter(|s| **s > threshold).count();
    (sv, rank, threshold)
}

/// Rank of the finite-difference Jacobian of `list` at `system0`.
pub fn jacobian_rank(
    configuration: &str,
    list: &dyn Fn(&TensorSystem) -> Result<Vec<f64>>,
    system0: &TensorSystem,
    h: Option<f64>,
) -> Result<RankReport> {
    check_generic(system0)?;
    let param = Parameterization::new(system0);
    let x0 = param.base_params();
    let items = list(system0)?.len();
    let scale = x0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let h = h.unwrap_or_else(|| fd::default_step(scale));
    let failure = std::cell::RefCell::new(None);
    let jac = fd::jacobian(
        |x| match list(&param.system(x)) {
            Ok(v) if v.len() == items => v,
            Ok(_) => {
                *failure.borrow_mut() = Some(Error::Precondition("invariant list changed length under perturbation".into()));
                vec![0.0; items]
            }
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                vec![0.0; items]
            }
        },
        &x0,
        h,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (singular_values, rank, threshold) = numerical_rank(&jac);
    Ok(RankReport {
        configuration: configuration.to_string(),
        ambient_dim: param.dim(),
        items,
        singular_values,
        rank,
        expected_rank: items.min(param.orbit_space_dim()),
        threshold,
        seed: None,
    })
}

/// The spectral invariant list of a system, in the default or SVD frame.
pub fn spectral_list(system: &TensorSystem, svd: bool) -> Result<SpectralInvariants> {
    let frame = if svd { build_svd_frame(system)? } else { build_frame(system, crate::lin3::DEFAULT_DEGENERACY_TOL)? };
    extract_invariants(system, &frame)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisComparison {
    pub n: usize,
    pub m_skew: usize,
    pub p: usize,
    pub classical_count: usize,
    pub spectral_count: usize,
    pub classical_rank: usize,
    pub spectral_rank: usize,
    pub orbit_space_dim: usize,
    pub seed: u64,
}

/// Classical (Boehler) and spectral scalar lists side by side at a seeded
/// generic point with skew non-symmetric arguments.
pub fn compare_bases(n: usize, m_skew: usize, p: usize, unit_vectors: bool, seed: u64) -> Result<BasisComparison> {
    use rand::SeedableRng;
    let flags = CountFlags { skew_nonsym: m_skew > 0, all_vectors_unit: unit_vectors && p > 0, svd_variant: false };
    let spectral_count = irreducible_count(n, m_skew, p, flags)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let sys = random_system(&mut rng, SystemSpec { n, m: m_skew, p, skew: true, unit_vectors })?;
    let classical = boehler_scalars(n, m_skew, p);
    let cfg = format!("N={n} M={m_skew} P={p}");
    let c_rank = jacobian_rank(&cfg, &|s| classical.evaluate(s), &sys, None)?;
    let s_rank = jacobian_rank(&cfg, &|s| Ok(spectral_list(s, false)?.values()), &sys, None)?;
    Ok(BasisComparison {
        n,
        m_skew,
        p,
        classical_count: classical.len(),
        spectral_count,
        classical_rank: c_rank.rank,
        spectral_rank: s_rank.rank,
        orbit_space_dim: Parameterization::new(&sys).orbit_space_dim(),
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// One checked statement: a residual (or rank) against a tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub description: String,
    pub status: Status,
    pub value: f64,
    pub tolerance: f64,
    pub seed: u64,
    /// Kept out of serialized reports so that reruns are byte-identical.
    #[serde(skip)]
    pub runtime: Option<Duration>,
}

impl Claim {
    /// Passes when `value ≤ tolerance`.
    pub fn residual(id: impl Into<String>, description: impl Into<String>, value: f64, tolerance: f64, seed: u64) -> Self {
        let status = if value <= tolerance { Status::Pass } else { Status::Fail };
        Claim { id: id.into(), description: description.into(), status, value, tolerance, seed, runtime: None }
    }

    /// Passes when `value == expected`; the tolerance field records the expectation.
    pub fn exact(id: impl Into<String>, description: impl Into<String>, value: f64, expected: f64, seed: u64) -> Self {
        let status = if value == expected { Status::Pass } else { Status::Fail };
        Claim { id: id.into(), description: description.into(), status, value, tolerance: expected, seed, runtime: None }
    }

    /// Negative controls: passes when `value ≥ threshold`.
    pub fn at_least(id: impl Into<String>, description: impl Into<String>, value: f64, threshold: f64, seed: u64) -> Self {
        let status = if value >= threshold { Status::Pass } else { Status::Fail };
        Claim { id: id.into(), description: description.into(), status, value, tolerance: threshold, seed, runtime: None }
    }

    pub fn with_runtime(mut self, d: Duration) -> Self {
        self.runtime = Some(d);
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub claims: Vec<Claim>,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>) -> Self {
        VerificationReport { suite: suite.into(), claims: Vec::new() }
    }

    /// Adds a claim; ids must be unique.
    pub fn push(&mut self, claim: Claim) -> Result<()> {
        if self.claims.iter().any(|c| c.id == claim.id) {
            return Err(Error::Usage(format!("duplicate claim id {}", claim.id)));
        }
        self.claims.push(claim);
        Ok(())
    }

    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failing_ids(&self) -> Vec<&str> {
        self.claims.iter().filter(|c| c.status == Status::Fail).map(|c| c.id.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(n: usize, m: usize, p: usize) -> SystemSpec {
        SystemSpec { n, m, p, ..Default::default() }
    }

    #[test]
    fn isotropy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sys = random_system(&mut rng, spec(2, 0, 2)).unwrap();
        let tr = |s: &TensorSystem| s.sym()[0].trace();
        assert!(verify_isotropy(&Evaluator::Scalar(&tr), &sys, 100, &mut rng, 1e-12).pass);
        let raw = |s: &TensorSystem| s.sym()[0].get(0, 0);
        let r = verify_isotropy(&Evaluator::Scalar(&raw), &sys, 100, &mut rng, 1e-9);
        assert!(!r.pass && r.max_deviation > 1e-3);
        let comm = |s: &TensorSystem| {
            let (a, b) = (s.sym()[0].to_mat3(), s.sym()[1].to_mat3());
            s.vecs()[0].v.dot(&((a * b - b * a) * s.vecs()[1].v))
        };
        assert!(verify_isotropy(&Evaluator::Scalar(&comm), &sys, 100, &mut rng, 1e-10).pass);
        let av = |s: &TensorSystem| s.sym()[0].to_mat3() * s.vecs()[0].v;
        assert!(verify_isotropy(&Evaluator::Vector(&av), &sys, 50, &mut rng, 1e-12).pass);
        let bad = |s: &TensorSystem| s.vecs()[0].v + Vec3::axis(0);
        assert!(!verify_isotropy(&Evaluator::Vector(&bad), &sys, 50, &mut rng, 1e-9).pass);
    }

    #[test]
    fn parameterization_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sys = random_system(&mut rng, SystemSpec { n: 1, m: 1, p: 2, skew: true, unit_vectors: true }).unwrap();
        let p = Parameterization::new(&sys);
        assert_eq!(p.dim(), 6 + 3 + 4);
        let back = p.system(&p.base_params());
        assert_eq!(back.sym(), sys.sym());
        assert_eq!(back.nonsym(), sys.nonsym());
        for (a, b) in back.vecs().iter().zip(sys.vecs()) {
            assert!((a.v - b.v).norm() < 1e-15 && a.unit);
        }
        let single = random_system(&mut rng, spec(0, 0, 1)).unwrap();
        assert_eq!(Parameterization::new(&single).orbit_space_dim(), 1);
    }

    #[test]
    fn boehler_ranks() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sys = random_system(&mut rng, spec(1, 0, 1)).unwrap();
        let b = boehler_scalars(1, 0, 1);
        let r = jacobian_rank("N=1 P=1", &|s| b.evaluate(s), &sys, None).unwrap();
        assert_eq!((r.items, r.ambient_dim, r.rank), (6, 9, 6));
        let sys = random_system(&mut rng, spec(2, 0, 0)).unwrap();
        let b = boehler_scalars(2, 0, 0);
        let r = jacobian_rank("N=2", &|s| b.evaluate(s), &sys, None).unwrap();
        assert_eq!((r.items, r.ambient_dim, r.rank), (10, 12, 9));
    }

    #[test]
    fn spectral_rank_full_for_symmetric_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sys = random_system(&mut rng, spec(2, 0, 2)).unwrap();
        let r = jacobian_rank("N=2 P=2", &|s| Ok(spectral_list(s, false)?.values()), &sys, None).unwrap();
        assert_eq!((r.items, r.ambient_dim, r.rank), (15, 18, 15));
    }

    #[test]
    fn constant_list_has_rank_zero() {
        let rows = vec![vec![3e-12, -1e-11], vec![0.0, 2e-12]];
        assert_eq!(numerical_rank(&rows).1, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sys = random_system(&mut rng, SystemSpec { p: 1, unit_vectors: true, ..Default::default() }).unwrap();
        let r = jacobian_rank("unit", &|s| Ok(spectral_list(s, false)?.values()), &sys, None).unwrap();
        assert_eq!((r.items, r.ambient_dim, r.rank, r.expected_rank), (1, 2, 0, 0));
    }

    #[test]
    fn degenerate_base_point_rejected() {
        let sys = TensorSystem::from_parts(vec![SymMat3::diag(1.0, 1.0, 2.0)], vec![]).unwrap();
        let b = boehler_scalars(1, 0, 0);
        assert!(matches!(jacobian_rank("x", &|s| b.evaluate(s), &sys, None), Err(Error::Precondition(_))));
    }

    #[test]
    fn comparison_small_cases() {
        let c = compare_bases(1, 0, 0, false, 0).unwrap();
        assert_eq!((c.classical_count, c.spectral_count, c.classical_rank, c.spectral_rank), (3, 3, 3, 3));
        let c = compare_bases(1, 1, 0, false, 0).unwrap();
        assert_eq!((c.spectral_count, c.spectral_rank, c.classical_rank), (6, 6, 6));
    }

    #[test]
    fn report_ids_unique() {
        let mut r = VerificationReport::new("t");
        r.push(Claim::residual("a", "", 0.0, 1.0, 0)).unwrap();
        assert!(r.push(Claim::residual("a", "", 0.0, 1.0, 0)).is_err());
        r.push(Claim::residual("b", "", 2.0, 1.0, 0)).unwrap();
        assert!(!r.all_pass());
        assert_eq!(r.failing_ids(), ["b"]);
        let json = serde_json_free_check(&r);
        assert!(!json.contains("runtime"));
    }

    fn serde_json_free_check(r: &VerificationReport) -> String {
        format!("{:?}", r.claims.iter().map(|c| (&c.id, c.status)).collect::<Vec<_>>())
    }
}
