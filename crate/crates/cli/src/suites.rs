//! The `verify` suites. Each one runs on built-in seeded systems unless an
//! input system is supplied, and returns claims plus a few summary lines.

use std::time::Instant;

use isotropykit::analysis::{
    jacobian_rank, random_system, spectral_list, verify_isotropy, Claim, Evaluator, Parameterization, SystemSpec,
    VerificationReport,
};
use isotropykit::classical_bases::{boehler_scalars, smith_sym_tensors, smith_vectors};
use isotropykit::fd;
use isotropykit::lin3::{eig_sym, haar_rotation, svd3, DEFAULT_DEGENERACY_TOL};
use isotropykit::potentials::{
    grad_nonsym_tensor, grad_sym_tensor, grad_vector, hyperelastic_stress, hyperelastic_stress_fd, GradientOptions,
    HyperelasticModel, ScalarFunctionOfSystem, SpectralPartials,
};
use isotropykit::representation::{
    check_coaxiality, check_p_property, coalescence_structure, example2_invariants, example2_system, project_tensor,
    project_vector, BasisKind, CoalescenceCase, DegeneracyCase,
};
use isotropykit::spectral_frame::{
    build_frame, build_svd_frame, extract_invariants, irreducible_count, reconstruct_system, CountFlags, InvariantLabel,
    SpectralInvariants,
};
use isotropykit::{ArgRef, Error, Mat3, NonSym, SymMat3, TensorSystem, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Isotropy,
    Reconstruction,
    Rank,
    Gradients,
    PProperty,
    Coalescence,
    Hyperelastic,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Isotropy => "isotropy",
            Suite::Reconstruction => "reconstruction",
            Suite::Rank => "rank",
            Suite::Gradients => "gradients",
            Suite::PProperty => "p-property",
            Suite::Coalescence => "coalescence",
            Suite::Hyperelastic => "hyperelastic",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::PProperty => 50,
            Suite::Hyperelastic => 20,
            Suite::Gradients => 10,
            _ => 100,
        }
    }
}

/// Argument counts requested with `--n/--m/--p`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ShapeFlags {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub p: Option<usize>,
    pub skew: bool,
    pub unit_vectors: bool,
    pub svd: bool,
}

impl ShapeFlags {
    pub fn given(&self) -> bool {
        self.n.is_some() || self.m.is_some() || self.p.is_some()
    }

    pub fn spec(&self) -> SystemSpec {
        SystemSpec {
            n: self.n.unwrap_or(0),
            m: self.m.unwrap_or(0),
            p: self.p.unwrap_or(0),
            skew: self.skew,
            unit_vectors: self.unit_vectors,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    pub trials: Option<usize>,
    /// Replaces every claim tolerance of the suite when given.
    pub tol: Option<f64>,
    pub system: Option<TensorSystem>,
    pub shape: ShapeFlags,
}

impl SuiteOptions {
    pub fn seeded(seed: u64) -> Self {
        SuiteOptions { seed, trials: None, tol: None, system: None, shape: ShapeFlags::default() }
    }
}

pub struct SuiteOutput {
    pub report: VerificationReport,
    pub notes: Vec<String>,
}

/// Independent generator for sub-task `stream` of a run.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn core_err(e: Error) -> Failure {
    match e {
        Error::Usage(m) => Failure::Input(m),
        other => Failure::Numerical(other.to_string()),
    }
}

struct Run<'a> {
    opts: &'a SuiteOptions,
    report: VerificationReport,
    notes: Vec<String>,
}

impl Run<'_> {
    fn tol(&self, default: f64) -> f64 {
        self.opts.tol.unwrap_or(default)
    }

    fn trials(&self, suite: Suite) -> usize {
        self.opts.trials.unwrap_or(suite.default_trials())
    }

    fn push(&mut self, claim: Claim, started: Instant) -> Result<(), Failure> {
        self.report.push(claim.with_runtime(started.elapsed())).map_err(core_err)
    }

    fn residual(&mut self, id: String, desc: &str, value: f64, default_tol: f64, t0: Instant) -> Result<(), Failure> {
        let tol = self.tol(default_tol);
        self.push(Claim::residual(id, desc, value, tol, self.opts.seed), t0)
    }
}

pub fn run(suite: Suite, opts: &SuiteOptions) -> Result<SuiteOutput, Failure> {
    let mut run = Run { opts, report: VerificationReport::new(suite.name()), notes: Vec::new() };
    match suite {
        Suite::Isotropy => isotropy(&mut run)?,
        Suite::Reconstruction => reconstruction(&mut run)?,
        Suite::Rank => rank(&mut run)?,
        Suite::Gradients => gradients(&mut run)?,
        Suite::PProperty => p_property(&mut run)?,
        Suite::Coalescence => coalescence(&mut run)?,
        Suite::Hyperelastic => hyperelastic(&mut run)?,
    }
    run.report.claims.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(SuiteOutput { report: run.report, notes: run.notes })
}

fn tag(s: &SystemSpec) -> String {
    let mut t = format!("N{}M{}P{}", s.n, s.m, s.p);
    if s.m > 0 {
        t.push_str(if s.skew { "-skew" } else { "-gen" });
    }
    if s.unit_vectors && s.p > 0 {
        t.push_str("-unit");
    }
    t
}

fn system_tag(sys: &TensorSystem) -> String {
    tag(&SystemSpec {
        n: sys.n(),
        m: sys.m(),
        p: sys.p(),
        skew: sys.m() > 0 && sys.all_nonsym_skew(),
        unit_vectors: sys.p() > 0 && sys.unit_count() == sys.p(),
    })
}

/// Input system, or seeded systems of the built-in shapes.
fn systems(run: &Run<'_>, builtin: &[SystemSpec]) -> Result<Vec<(String, TensorSystem)>, Failure> {
    if let Some(s) = &run.opts.system {
        return Ok(vec![(format!("input-{}", system_tag(s)), s.clone())]);
    }
    let shapes: Vec<SystemSpec> = if run.opts.shape.given() { vec![run.opts.shape.spec()] } else { builtin.to_vec() };
    shapes
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut rng = rng_for(run.opts.seed, 1000 + k as u64);
            random_system(&mut rng, *s).map(|sys| (tag(s), sys)).map_err(core_err)
        })
        .collect()
}

fn sp(n: usize, m: usize, p: usize, skew: bool, unit_vectors: bool) -> SystemSpec {
    SystemSpec { n, m, p, skew, unit_vectors }
}

const ISOTROPY_SHAPES: [SystemSpec; 6] = [
    SystemSpec { n: 2, m: 1, p: 2, skew: true, unit_vectors: false },
    SystemSpec { n: 1, m: 1, p: 1, skew: false, unit_vectors: false },
    SystemSpec { n: 0, m: 0, p: 3, skew: false, unit_vectors: false },
    SystemSpec { n: 0, m: 2, p: 1, skew: false, unit_vectors: false },
    SystemSpec { n: 0, m: 1, p: 2, skew: true, unit_vectors: false },
    SystemSpec { n: 1, m: 0, p: 2, skew: false, unit_vectors: true },
];

fn isotropy(run: &mut Run<'_>) -> Result<(), Failure> {
    let trials = run.trials(Suite::Isotropy);
    let tol = run.tol(1e-9);
    let seed = run.opts.seed;
    for (k, (name, sys)) in systems(run, &ISOTROPY_SHAPES)?.into_iter().enumerate() {
        let mut rng = rng_for(seed, 2000 + k as u64);
        let t0 = Instant::now();
        let list = |s: &TensorSystem| Ok(spectral_list(s, false)?.values());
        let r = verify_isotropy(&Evaluator::Scalars(&list), &sys, trials, &mut rng, tol);
        run.push(Claim::residual(format!("isotropy/{name}/spectral"), "spectral invariants are invariant", r.max_deviation, tol, seed), t0)?;
        if sys.m() > 0 && !sys.all_nonsym_skew() {
            let t0 = Instant::now();
            let list = |s: &TensorSystem| Ok(spectral_list(s, true)?.values());
            let r = verify_isotropy(&Evaluator::Scalars(&list), &sys, trials, &mut rng, tol);
            run.push(Claim::residual(format!("isotropy/{name}/spectral-svd"), "singular-frame invariants are invariant", r.max_deviation, tol, seed), t0)?;
        }
        if sys.all_nonsym_skew() {
            let (n, m, p) = (sys.n(), sys.m(), sys.p());
            let t0 = Instant::now();
            let b = boehler_scalars(n, m, p);
            let list = |s: &TensorSystem| b.evaluate(s);
            let r = verify_isotropy(&Evaluator::Scalars(&list), &sys, trials, &mut rng, tol);
            run.push(Claim::residual(format!("isotropy/{name}/classical-scalars"), "classical scalar items are invariant", r.max_deviation, tol, seed), t0)?;

            let t0 = Instant::now();
            let vb = smith_vectors(n, m, p);
            let mut worst = 0.0f64;
            for item in &vb.items {
                let f = |s: &TensorSystem| item.eval(&isotropykit::classical_bases::ClassicalArgs::from_system(s));
                worst = worst.max(verify_isotropy(&Evaluator::Vector(&f), &sys, trials, &mut rng, tol).max_deviation);
            }
            run.push(Claim::residual(format!("isotropy/{name}/classical-vectors"), "classical vector generators are equivariant", worst, tol, seed), t0)?;

            let t0 = Instant::now();
            let tb = smith_sym_tensors(n, m, p);
            let mut worst = 0.0f64;
            for item in &tb.items {
                let f = |s: &TensorSystem| item.eval(&isotropykit::classical_bases::ClassicalArgs::from_system(s));
                worst = worst.max(verify_isotropy(&Evaluator::SymTensor(&f), &sys, trials, &mut rng, tol).max_deviation);
            }
            run.push(Claim::residual(format!("isotropy/{name}/classical-tensors"), "classical tensor generators are equivariant", worst, tol, seed), t0)?;
        }
        let t0 = Instant::now();
        let raw = |s: &TensorSystem| raw_component(s);
        let r = verify_isotropy(&Evaluator::Scalar(&raw), &sys, trials, &mut rng, tol);
        run.push(Claim::at_least(format!("isotropy/{name}/control-raw"), "a raw Cartesian component is not invariant", r.max_deviation, 1e-3, seed), t0)?;
    }
    Ok(())
}

/// First Cartesian entry of the first argument: a negative control.
pub fn raw_component(s: &TensorSystem) -> f64 {
    if let Some(a) = s.sym().first() {
        a.get(0, 1)
    } else if let Some(h) = s.nonsym().first() {
        h.to_mat3().get(0, 1)
    } else {
        s.vecs()[0].v.0[0]
    }
}

fn system_distance(a: &TensorSystem, b: &TensorSystem) -> f64 {
    let mut d = 0.0f64;
    let mut scale = 0.0f64;
    for (x, y) in a.sym().iter().zip(b.sym()) {
        d = d.max((*x - *y).frobenius_norm());
        scale = scale.max(x.frobenius_norm());
    }
    for (x, y) in a.nonsym().iter().zip(b.nonsym()) {
        d = d.max((x.to_mat3() - y.to_mat3()).frobenius_norm());
        scale = scale.max(x.to_mat3().frobenius_norm());
    }
    for (x, y) in a.vecs().iter().zip(b.vecs()) {
        d = d.max((x.v - y.v).norm());
        scale = scale.max(x.v.norm());
    }
    d / (1.0 + scale)
}

const RECONSTRUCTION_SHAPES: [SystemSpec; 6] = [
    SystemSpec { n: 2, m: 1, p: 2, skew: true, unit_vectors: false },
    SystemSpec { n: 1, m: 2, p: 1, skew: false, unit_vectors: false },
    SystemSpec { n: 0, m: 2, p: 2, skew: false, unit_vectors: false },
    SystemSpec { n: 0, m: 0, p: 3, skew: false, unit_vectors: false },
    SystemSpec { n: 0, m: 2, p: 1, skew: true, unit_vectors: false },
    SystemSpec { n: 1, m: 0, p: 2, skew: false, unit_vectors: true },
];

fn reconstruction(run: &mut Run<'_>) -> Result<(), Failure> {
    let trials = run.trials(Suite::Reconstruction);
    let seed = run.opts.seed;
    let mut rng = rng_for(seed, 1);
    let entry = |rng: &mut ChaCha8Rng| rng.gen_range(-2.0..2.0);

    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let a = SymMat3::from_upper(std::array::from_fn(|_| entry(&mut rng)));
        let e = eig_sym(&a, DEFAULT_DEGENERACY_TOL).map_err(core_err)?;
        let back = (0..3).fold(Mat3::ZERO, |acc, i| acc + e.vectors[i].outer(&e.vectors[i]) * e.values[i]);
        worst = worst.max((back - a.to_mat3()).frobenius_norm() / (1.0 + a.frobenius_norm()));
    }
    run.residual("reconstruction/eig".into(), "A = sum lambda_i v_i (x) v_i", worst, 1e-12, t0)?;

    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let f = Mat3(std::array::from_fn(|_| std::array::from_fn(|_| entry(&mut rng))));
        let s = svd3(&f).map_err(core_err)?;
        worst = worst.max((s.reconstruct() - f).frobenius_norm() / (1.0 + f.frobenius_norm()));
    }
    run.residual("reconstruction/svd".into(), "F = sum lambda_i v_i (x) u_i", worst, 1e-12, t0)?;

    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let q = *haar_rotation(&mut rng).matrix();
        worst = worst.max((q * q.transpose() - Mat3::IDENTITY).frobenius_norm()).max((q.det() - 1.0).abs());
    }
    run.residual("reconstruction/haar".into(), "sampled rotations are orthogonal with det 1", worst, 1e-12, t0)?;

    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let a = SymMat3::from_upper(std::array::from_fn(|_| entry(&mut rng)));
        let sys = TensorSystem::from_parts(vec![a], vec![]).map_err(core_err)?;
        let frame = build_frame(&sys, DEFAULT_DEGENERACY_TOL).map_err(core_err)?;
        let g = Vec3(std::array::from_fn(|_| entry(&mut rng)));
        let v = project_vector(&g, &frame).reconstruct_vector(&frame).map_err(core_err)?;
        worst = worst.max((v - g).norm() / (1.0 + g.norm()));
        let h = Mat3(std::array::from_fn(|_| std::array::from_fn(|_| entry(&mut rng))));
        for (m, kind) in [(h.sym_part(), BasisKind::Sym6), (h, BasisKind::Full9), (h.skew_part(), BasisKind::Skew3)] {
            let back = project_tensor(&m, &frame, kind).and_then(|c| c.reconstruct_tensor(&frame)).map_err(core_err)?;
            worst = worst.max((back - m).frobenius_norm() / (1.0 + m.frobenius_norm()));
        }
    }
    run.residual("reconstruction/generators".into(), "projection onto generator bases is exact", worst, 1e-12, t0)?;

    for (name, sys) in systems(run, &RECONSTRUCTION_SHAPES)? {
        let svd_too = sys.m() > 0 && !sys.all_nonsym_skew();
        for svd in [false, true] {
            if svd && !svd_too {
                continue;
            }
            let t0 = Instant::now();
            let frame = if svd { build_svd_frame(&sys) } else { build_frame(&sys, DEFAULT_DEGENERACY_TOL) }.map_err(core_err)?;
            let inv = extract_invariants(&sys, &frame).map_err(core_err)?;
            let back = reconstruct_system(&inv, &frame).map_err(core_err)?;
            let id = format!("reconstruction/system/{name}{}", if svd { "-svd" } else { "" });
            run.residual(id, "system rebuilt from its invariants and frame", system_distance(&sys, &back), 1e-10, t0)?;
        }
    }
    Ok(())
}

fn rank(run: &mut Run<'_>) -> Result<(), Failure> {
    let seed = run.opts.seed;
    let svd = run.opts.shape.svd;
    let points: Vec<(String, TensorSystem)> = if let Some(s) = &run.opts.system {
        vec![(format!("input-{}", system_tag(s)), s.clone())]
    } else {
        let spec = if run.opts.shape.given() { run.opts.shape.spec() } else { sp(2, 0, 0, false, false) };
        (0..3u64)
            .map(|k| {
                let mut rng = rng_for(seed.wrapping_add(k), 3000);
                random_system(&mut rng, spec).map(|s| (format!("{}/point{}", tag(&spec), k + 1), s)).map_err(core_err)
            })
            .collect::<Result<_, _>>()?
    };
    let mut summary = None;
    for (name, sys) in &points {
        let flags = CountFlags {
            skew_nonsym: sys.m() > 0 && sys.all_nonsym_skew(),
            all_vectors_unit: sys.p() > 0 && sys.unit_count() == sys.p(),
            svd_variant: svd,
        };
        let count = irreducible_count(sys.n(), sys.m(), sys.p(), flags).map_err(|e| Failure::Input(e.to_string()))?;
        let t0 = Instant::now();
        let list = |s: &TensorSystem| Ok(spectral_list(s, svd)?.values());
        let sr = jacobian_rank(name, &list, sys, None).map_err(core_err)?;
        run.push(
            Claim::exact(
                format!("rank/{name}/spectral"),
                &format!("Jacobian rank of the spectral list equals the irreducible count {count}"),
                sr.rank as f64,
                count as f64,
                seed,
            ),
            t0,
        )?;
        let mut classical = None;
        if sys.all_nonsym_skew() && !svd {
            let t0 = Instant::now();
            let b = boehler_scalars(sys.n(), sys.m(), sys.p());
            let cr = jacobian_rank(name, &|s| b.evaluate(s), sys, None).map_err(core_err)?;
            run.push(
                Claim::exact(
                    format!("rank/{name}/classical"),
                    "Jacobian rank of the classical list equals the orbit-space dimension",
                    cr.rank as f64,
                    cr.expected_rank as f64,
                    seed,
                ),
                t0,
            )?;
            classical = Some(cr);
        }
        if summary.is_none() {
            let orbit = Parameterization::new(sys).orbit_space_dim();
            let mut line = String::new();
            if let Some(cr) = &classical {
                line.push_str(&format!("classical rank {} / {} items; ", cr.rank, cr.items));
            }
            line.push_str(&format!(
                "spectral rank {} / {} items (irreducible count {count}, ambient {}, orbit-space dimension {orbit})",
                sr.rank, sr.items, sr.ambient_dim
            ));
            summary = Some(line);
        }
    }
    run.notes.extend(summary);
    Ok(())
}

fn rsym(rng: &mut ChaCha8Rng) -> SymMat3 {
    SymMat3::from_upper(std::array::from_fn(|_| rng.gen_range(-2.0..2.0)))
}

fn rvec(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3(std::array::from_fn(|_| rng.gen_range(-2.0..2.0)))
}

fn rmat(rng: &mut ChaCha8Rng) -> Mat3 {
    Mat3(std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0))))
}

type TestFn = (&'static str, fn(&TensorSystem) -> f64);

/// Functions of `(A₁, a₁)` differentiated in `a₁`.
const VECTOR_FNS: [TestFn; 10] = [
    ("(a.Aa)^2", |s| av(s).powi(2)),
    ("sin(a.a)", |s| aa(s).sin()),
    ("a.A^2a", |s| {
        let (a, m) = (s.vecs()[0].v, s.sym()[0].to_mat3());
        a.dot(&(m * m * a))
    }),
    ("exp(-a.a) trA", |s| (-aa(s)).exp() * s.sym()[0].trace()),
    ("|a|^3", |s| aa(s).powf(1.5)),
    ("(a.Aa)(a.a)", |s| av(s) * aa(s)),
    ("cos(a.Aa)", |s| av(s).cos()),
    ("a.Aa/(1+a.a)", |s| av(s) / (1.0 + aa(s))),
    ("ln(1+a.a)+(a.Aa)^3", |s| aa(s).ln_1p() + av(s).powi(3)),
    ("a.A^3a", |s| {
        let (a, m) = (s.vecs()[0].v, s.sym()[0].to_mat3());
        a.dot(&(m.pow(3) * a))
    }),
];

fn aa(s: &TensorSystem) -> f64 {
    s.vecs()[0].v.norm_squared()
}

fn av(s: &TensorSystem) -> f64 {
    let a = s.vecs()[0].v;
    a.dot(&(s.sym()[0].to_mat3() * a))
}

/// Functions of `(V, B, a)` differentiated in `V`.
const SYM_FNS: [TestFn; 10] = [
    ("trV^3", |s| s.sym()[0].to_mat3().pow(3).trace()),
    ("detV", |s| s.sym()[0].to_mat3().det()),
    ("tr(V^2B)", |s| {
        let (v, b) = (s.sym()[0].to_mat3(), s.sym()[1].to_mat3());
        (v * v * b).trace()
    }),
    ("(a.Va)^2", |s| av(s).powi(2)),
    ("sin(trV)+trV^2", |s| {
        let v = s.sym()[0].to_mat3();
        v.trace().sin() + (v * v).trace()
    }),
    ("exp(0.1 trV^2)", |s| {
        let v = s.sym()[0].to_mat3();
        (0.1 * (v * v).trace()).exp()
    }),
    ("tr(VB)^2", |s| {
        let (v, b) = (s.sym()[0].to_mat3(), s.sym()[1].to_mat3());
        (v * b).trace().powi(2)
    }),
    ("a.V^2a", |s| {
        let (a, v) = (s.vecs()[0].v, s.sym()[0].to_mat3());
        a.dot(&(v * v * a))
    }),
    ("tr(VBV)+detV^2", |s| {
        let (v, b) = (s.sym()[0].to_mat3(), s.sym()[1].to_mat3());
        (v * b * v).trace() + v.det().powi(2)
    }),
    ("a.(VB+BV)a", |s| {
        let (a, v, b) = (s.vecs()[0].v, s.sym()[0].to_mat3(), s.sym()[1].to_mat3());
        a.dot(&((v * b + b * v) * a))
    }),
];

/// Functions of `(F, A, a)` differentiated in `F`.
const NONSYM_FNS: [TestFn; 10] = [
    ("detF^2", |s| nf(s).det().powi(2)),
    ("tr(FF^T A)", |s| {
        let f = nf(s);
        (f * f.transpose() * s.sym()[0].to_mat3()).trace()
    }),
    ("tr(F^TF)^2", |s| {
        let f = nf(s);
        (f.transpose() * f).trace().powi(2)
    }),
    ("|Fa|^2", |s| (nf(s) * s.vecs()[0].v).norm_squared()),
    ("trF^2", |s| (nf(s) * nf(s)).trace()),
    ("a.Fa", |s| s.vecs()[0].v.dot(&(nf(s) * s.vecs()[0].v))),
    ("sin(tr F^TF)", |s| (nf(s).transpose() * nf(s)).trace().sin()),
    ("tr(F^TFF^TF)", |s| {
        let c = nf(s).transpose() * nf(s);
        (c * c).trace()
    }),
    ("detF trF", |s| nf(s).det() * nf(s).trace()),
    ("a.F^TAFa", |s| {
        let (f, a) = (nf(s), s.vecs()[0].v);
        (f * a).dot(&(s.sym()[0].to_mat3() * (f * a)))
    }),
];

fn nf(s: &TensorSystem) -> Mat3 {
    s.nonsym()[0].to_mat3()
}

fn grad_tol(norm: f64) -> f64 {
    1e-6f64.max(1e-5 * norm)
}

fn gradients(run: &mut Run<'_>) -> Result<(), Failure> {
    let seed = run.opts.seed;
    let opts = GradientOptions::default();
    let mut rng = rng_for(seed, 4);
    let cases = run.trials(Suite::Gradients).max(1);

    for (k, (name, f)) in VECTOR_FNS.iter().enumerate() {
        let t0 = Instant::now();
        let w = ScalarFunctionOfSystem::new(*name, *f);
        let mut worst = 0.0f64;
        let mut tol = f64::INFINITY;
        for _ in 0..cases.min(3) {
            let sys = TensorSystem::from_parts(vec![rsym(&mut rng)], vec![rvec(&mut rng)]).map_err(core_err)?;
            let g = grad_vector(&w, &sys, 0, opts).map_err(core_err)?;
            let x = sys.vecs()[0].v;
            let oracle = fd::gradient_vec3(|y| w.eval(&sys.with_vector(0, *y)), &x, fd::default_step(x.norm()));
            worst = worst.max((g - oracle).norm());
            tol = tol.min(grad_tol(g.norm()));
        }
        let tol = run.tol(tol);
        run.push(Claim::residual(format!("gradients/vector/f{:02}", k + 1), *name, worst, tol, seed), t0)?;
    }
    for (k, (name, f)) in SYM_FNS.iter().enumerate() {
        let t0 = Instant::now();
        let w = ScalarFunctionOfSystem::new(*name, *f);
        let mut worst = 0.0f64;
        let mut tol = f64::INFINITY;
        for _ in 0..cases.min(3) {
            let sys = TensorSystem::from_parts(vec![rsym(&mut rng), rsym(&mut rng)], vec![rvec(&mut rng)]).map_err(core_err)?;
            let g = grad_sym_tensor(&w, &sys, 0, opts).map_err(core_err)?;
            let x = sys.sym()[0];
            let oracle = fd::gradient_sym(|y| w.eval(&sys.with_sym(0, *y)), &x, fd::default_step(x.frobenius_norm()));
            worst = worst.max((g - oracle).frobenius_norm());
            tol = tol.min(grad_tol(g.frobenius_norm()));
        }
        let tol = run.tol(tol);
        run.push(Claim::residual(format!("gradients/sym/f{:02}", k + 1), *name, worst, tol, seed), t0)?;
    }
    for (k, (name, f)) in NONSYM_FNS.iter().enumerate() {
        let t0 = Instant::now();
        let w = ScalarFunctionOfSystem::new(*name, *f);
        let mut worst = 0.0f64;
        let mut tol = f64::INFINITY;
        for _ in 0..cases.min(3) {
            let h = rmat(&mut rng);
            let sys = TensorSystem::new(
                vec![rsym(&mut rng)],
                vec![NonSym::General(h)],
                vec![isotropykit::SysVector::free(rvec(&mut rng))],
            )
            .map_err(core_err)?;
            let g = grad_nonsym_tensor(&w, &sys, 0, opts).map_err(core_err)?;
            let oracle = fd::gradient_mat(
                |y| w.eval(&sys.with_nonsym(0, NonSym::General(*y))),
                &h,
                fd::default_step(h.frobenius_norm()),
            );
            worst = worst.max((g - oracle).frobenius_norm());
            tol = tol.min(grad_tol(g.frobenius_norm()));
        }
        let tol = run.tol(tol);
        run.push(Claim::residual(format!("gradients/nonsym/f{:02}", k + 1), *name, worst, tol, seed), t0)?;
    }

    // exact cases with analytic spectral partials
    let t0 = Instant::now();
    let a = rvec(&mut rng);
    let sys = TensorSystem::from_parts(vec![], vec![a]).map_err(core_err)?;
    let w = ScalarFunctionOfSystem::new("a.a", aa).with_partials(ArgRef::Vector(0), |p, _| SpectralPartials {
        d_lambda: [2.0 * p.lambdas[0], 0.0, 0.0],
        d_v: [Vec3::ZERO; 3],
        d_u: None,
    });
    let g = grad_vector(&w, &sys, 0, opts).map_err(core_err)?;
    run.residual("gradients/exact/a.a".into(), "d(a.a)/da = 2a", (g - a * 2.0).norm(), 1e-12, t0)?;

    let t0 = Instant::now();
    let v = rsym(&mut rng);
    let sys = TensorSystem::from_parts(vec![v], vec![]).map_err(core_err)?;
    let w = ScalarFunctionOfSystem::new("trV^2", |s| (s.sym()[0].to_mat3() * s.sym()[0].to_mat3()).trace())
        .with_partials(ArgRef::Sym(0), |p, _| SpectralPartials {
            d_lambda: p.lambdas.map(|l| 2.0 * l),
            d_v: [Vec3::ZERO; 3],
            d_u: None,
        });
    let g = grad_sym_tensor(&w, &sys, 0, opts).map_err(core_err)?;
    run.residual("gradients/exact/trV2".into(), "d(tr V^2)/dV = 2V", (g - v.scaled(2.0)).frobenius_norm(), 1e-12, t0)?;

    let t0 = Instant::now();
    let f = rmat(&mut rng);
    let sys = TensorSystem::new(vec![], vec![NonSym::General(f)], vec![]).map_err(core_err)?;
    let w = ScalarFunctionOfSystem::new("trFF^T", |s| (nf(s) * nf(s).transpose()).trace()).with_partials(
        ArgRef::NonSym(0),
        |p, _| SpectralPartials { d_lambda: p.lambdas.map(|l| 2.0 * l), d_v: [Vec3::ZERO; 3], d_u: Some([Vec3::ZERO; 3]) },
    );
    let g = grad_nonsym_tensor(&w, &sys, 0, opts).map_err(core_err)?;
    run.residual("gradients/exact/trFFt".into(), "d(tr FF^T)/dF = 2F", (g - f * 2.0).frobenius_norm(), 1e-12, t0)?;
    Ok(())
}

/// `Φ = Σ λᵢ (a·vᵢ)²`, i.e. `a·A₁a` written in spectral invariants.
pub fn phi(inv: &SpectralInvariants) -> f64 {
    (0..3)
        .map(|i| inv.value(InvariantLabel::Lambda(i)) * inv.value(InvariantLabel::Vector { s: 0, i }).powi(2))
        .sum()
}

fn p_property(run: &mut Run<'_>) -> Result<(), Failure> {
    let seed = run.opts.seed;
    let trials = run.trials(Suite::PProperty);
    let tol = run.tol(1e-10);
    let mut rng = rng_for(seed, 5);
    let q = haar_rotation(&mut rng);
    let a = rvec(&mut rng).normalized().ok_or_else(|| Failure::Numerical("zero sample".into()))?;
    let (lam, lam3) = (2.0, 0.5);
    let a_pair = q.conjugate_sym(&SymMat3::diag(lam, lam, lam3));
    let pair = TensorSystem::from_parts(vec![a_pair], vec![a]).map_err(core_err)?;

    let t0 = Instant::now();
    let r = check_p_property("a.A1.a", &phi, &pair, DegeneracyCase::Pair(0, 1), trials, &mut rng, tol).map_err(core_err)?;
    run.push(Claim::residual("p-property/phi/pair", "a.A1.a under re-gauging with a double eigenvalue", r.max_deviation, r.tolerance, seed), t0)?;
    let v3 = q.apply(&Vec3::axis(2));
    let wa = lam + (lam3 - lam) * a.dot(&v3).powi(2);
    run.residual("p-property/phi/pair-closed-form".into(), "value equals lambda + (lambda_3 - lambda)(a.v_3)^2", (r.value - wa).abs(), 1e-12, t0)?;

    let t0 = Instant::now();
    let triple = TensorSystem::from_parts(vec![SymMat3::diag(lam, lam, lam)], vec![a]).map_err(core_err)?;
    let r = check_p_property("a.A1.a", &phi, &triple, DegeneracyCase::Triple, trials, &mut rng, tol).map_err(core_err)?;
    run.push(Claim::residual("p-property/phi/triple", "a.A1.a under re-gauging with a triple eigenvalue", r.max_deviation, r.tolerance, seed), t0)?;
    run.residual("p-property/phi/triple-closed-form".into(), "value equals lambda", (r.value - lam).abs(), 1e-12, t0)?;

    let u = rsym(&mut rng);
    let sys = example2_system(&u, &a).map_err(core_err)?;
    for k in 0..5 {
        let t0 = Instant::now();
        let f = move |inv: &SpectralInvariants| example2_invariants(inv)[k];
        let r = check_p_property(&format!("I{}", k + 1), &f, &sys, DegeneracyCase::Pair(1, 2), trials, &mut rng, tol)
            .map_err(core_err)?;
        run.push(
            Claim::residual(format!("p-property/example2/I{}", k + 1), "invariant of (a (x) a, U) under re-gauging", r.max_deviation, r.tolerance, seed),
            t0,
        )?;
    }

    let t0 = Instant::now();
    let raw = |inv: &SpectralInvariants| inv.value(InvariantLabel::Vector { s: 0, i: 0 });
    let r = check_p_property("a1_1", &raw, &pair, DegeneracyCase::Pair(0, 1), trials, &mut rng, tol).map_err(core_err)?;
    run.push(Claim::at_least("p-property/control/a1_1", "a raw frame component depends on the gauge", r.max_deviation, 1e-3, seed), t0)?;
    Ok(())
}

/// Eigen-coefficients of `G = φ₀I + φ₁V + φ₂V²` with invariant `φ`s.
pub fn gv3(l: [f64; 3]) -> [f64; 3] {
    let i1: f64 = l.iter().sum();
    let i2: f64 = l.iter().map(|x| x * x).sum();
    let i3: f64 = l.iter().map(|x| x * x * x).sum();
    let (p0, p1, p2) = (1.0 + i1, i2.sin(), 0.1 * i3);
    l.map(|x| p0 + p1 * x + p2 * x * x)
}

fn gv2(v: &SymMat3) -> SymMat3 {
    let m = v.to_mat3();
    let (i1, i2, i3) = (m.trace(), (m * m).trace(), m.pow(3).trace());
    SymMat3::from_sym_part(&(Mat3::IDENTITY * (1.0 + i1) + m * i2.sin() + m * m * (0.1 * i3)))
}

fn coalescence(run: &mut Run<'_>) -> Result<(), Failure> {
    let seed = run.opts.seed;
    let trials = run.trials(Suite::Coalescence);
    let mut rng = rng_for(seed, 6);

    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let v = rsym(&mut rng);
        let r = check_coaxiality(gv2, &v, 1e-12).map_err(core_err)?;
        let scale = 1.0 + gv2(&v).frobenius_norm();
        worst = worst.max(r.commutator_residual.max(r.offdiag_max) / scale);
    }
    run.residual("coalescence/coaxial".into(), "V G(V) = G(V) V for a polynomial isotropic map", worst, 1e-12, t0)?;

    let tol = run.tol(1e-12);
    let eps: Vec<f64> = (2..=8).map(|k| 10f64.powi(-k)).collect();
    let q = haar_rotation(&mut rng);
    let frame = [0, 1, 2].map(|i| q.apply(&Vec3::axis(i)));

    let t0 = Instant::now();
    let r = coalescence_structure(gv3, |e| [1.0 + e, 1.0, 3.0], &eps, &frame, CoalescenceCase::Pair { i: 0, j: 1, k: 2 }, tol);
    run.push(Claim::residual("coalescence/pair/order", "|t1 - t2| vanishes linearly in eps (|order - 1|)", (r.fitted_order - 1.0).abs(), 0.05, seed), t0)?;
    run.push(Claim::residual("coalescence/pair/limit", "t_i I + (t_k - t_i) v_k (x) v_k at coalescence", r.canonical_residual.max(r.limit_gap), tol, seed), t0)?;
    run.notes.push(format!(
        "pair coalescence: fitted order {:.4}, gap/eps <= {:.4}",
        r.fitted_order, r.fitted_constant
    ));

    let t0 = Instant::now();
    let r = coalescence_structure(gv3, |e| [2.0 + 2.0 * e, 2.0 + e, 2.0], &eps, &frame, CoalescenceCase::Triple, tol);
    run.push(Claim::residual("coalescence/triple/order", "coefficient spread vanishes linearly in eps (|order - 1|)", (r.fitted_order - 1.0).abs(), 0.05, seed), t0)?;
    run.push(Claim::residual("coalescence/triple/limit", "t_1 I at triple coalescence", r.canonical_residual.max(r.limit_gap), tol, seed), t0)?;
    Ok(())
}

/// Strain energies used by the hyperelastic suite.
pub fn hyperelastic_models() -> Vec<HyperelasticModel> {
    vec![
        HyperelasticModel::new("I1 + I5^2", |i| i[0] + i[4] * i[4]),
        HyperelasticModel::new("Mooney-type", |i| 0.3 * (i[0] - 3.0) + 0.1 * (0.5 * (i[0] * i[0] - i[1]) - 3.0)),
        HyperelasticModel::new("exponential fibre", |i| 0.5 * (i[0] - 3.0) + 0.2 * ((0.8 * (i[3] - 1.0).powi(2)).exp() - 1.0)),
        HyperelasticModel::new("cubic mix", |i| 0.05 * i[2] + 0.4 * i[3] * i[4] - 0.1 * i[1]),
        HyperelasticModel::new("log coupling", |i| (1.0 + i[1]).ln() + 0.3 * i[4] + 0.2 * i[3].powi(3)),
    ]
}

pub fn random_spd(rng: &mut ChaCha8Rng) -> SymMat3 {
    let m = Mat3(std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-0.4..0.4)))) + Mat3::IDENTITY;
    SymMat3::from_sym_part(&(m.transpose() * m))
}

fn hyperelastic(run: &mut Run<'_>) -> Result<(), Failure> {
    let seed = run.opts.seed;
    let trials = run.trials(Suite::Hyperelastic);
    let mut rng = rng_for(seed, 7);
    let models = hyperelastic_models();
    let cases: Vec<(SymMat3, Vec3)> = match &run.opts.system {
        Some(s) => {
            let (c, a) = match (s.sym().first(), s.vecs().first()) {
                (Some(c), Some(a)) => (*c, a.v),
                _ => return Err(Failure::Input("hyperelastic input needs one symmetric tensor C and one vector a".into())),
            };
            let a = a.normalized().ok_or_else(|| Failure::Input("fibre direction is zero".into()))?;
            vec![(c, a)]
        }
        None => (0..trials)
            .map(|_| {
                let c = random_spd(&mut rng);
                let a = rvec(&mut rng).normalized().expect("non-zero sample");
                (c, a)
            })
            .collect(),
    };
    let t0 = Instant::now();
    let (mut rep, mut fdw, mut sym6) = (0.0f64, 0.0f64, 0.0f64);
    for (k, (c, a)) in cases.iter().enumerate() {
        let model = &models[k % models.len()];
        let s = hyperelastic_stress(model, c, a).map_err(|e| match e {
            Error::Domain(m) | Error::InvalidInput(m) => Failure::Input(m),
            other => core_err(other),
        })?;
        let scale = 1.0 + s.s_potential.frobenius_norm();
        rep = rep.max(s.residual / scale);
        sym6 = sym6.max(s.sym6_max_diff / scale);
        let fd = hyperelastic_stress_fd(model, c, a);
        fdw = fdw.max((fd - s.s_potential).frobenius_norm() / scale);
    }
    run.residual("hyperelastic/representation".into(), "stress from the energy equals the six-generator form", rep, 1e-10, t0)?;
    run.residual("hyperelastic/sym6".into(), "sym6 coefficients of both forms agree", sym6, 1e-10, t0)?;
    run.residual("hyperelastic/fd".into(), "stress equals a finite-difference derivative of W in E", fdw, 1e-6, t0)?;
    run.notes.push(format!(
        "{} cases: representation residual {rep:.3e} (tol 1e-10), finite-difference residual {fdw:.3e} (tol 1e-6)",
        cases.len()
    ));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use isotropykit::analysis::Status;

    fn all(suite: Suite, seed: u64) -> SuiteOutput {
        run(suite, &SuiteOptions::seeded(seed)).unwrap()
    }

    #[test]
    fn every_suite_passes_at_seed_7() {
        for s in [
            Suite::Isotropy,
            Suite::Reconstruction,
            Suite::Rank,
            Suite::Gradients,
            Suite::PProperty,
            Suite::Coalescence,
            Suite::Hyperelastic,
        ] {
            let out = all(s, 7);
            assert!(out.report.all_pass(), "{}: {:?}", s.name(), out.report.failing_ids());
            assert!(!out.report.claims.is_empty());
        }
    }

    #[test]
    fn rank_summary_line() {
        let mut opts = SuiteOptions::seeded(7);
        opts.shape = ShapeFlags { n: Some(2), p: Some(0), ..Default::default() };
        let out = run(Suite::Rank, &opts).unwrap();
        assert!(out.notes[0].starts_with("classical rank 9 / 10 items; spectral rank 9 / 9 items"), "{}", out.notes[0]);
    }

    #[test]
    fn vector_only_rank_fails_honestly() {
        let mut opts = SuiteOptions::seeded(1);
        opts.shape = ShapeFlags { p: Some(2), ..Default::default() };
        let out = run(Suite::Rank, &opts).unwrap();
        let spectral: Vec<_> = out.report.claims.iter().filter(|c| c.id.ends_with("/spectral")).collect();
        assert!(spectral.iter().all(|c| c.status == Status::Fail && c.value == 3.0 && c.tolerance == 4.0));
    }

    #[test]
    fn tolerance_override_can_fail_a_suite() {
        let mut opts = SuiteOptions::seeded(0);
        opts.tol = Some(0.0);
        opts.trials = Some(5);
        let out = run(Suite::Hyperelastic, &opts).unwrap();
        assert!(!out.report.all_pass());
    }
}
