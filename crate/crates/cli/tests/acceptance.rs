//! Acceptance suite: one line per criterion.
//!
//! The process fails if any criterion fails for a reason other than a
//! documented unattainable case. Criterion 4 has such a case: some claimed
//! counts exceed the dimension of the orbit space, which bounds the rank of
//! any list of invariants. Those configurations print as FAIL with the
//! measured ranks; they do not fail the process as long as the invariant list
//! reaches that bound.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use isotropykit::analysis::{jacobian_rank, random_system, spectral_list, verify_isotropy, Evaluator, Parameterization, SystemSpec};
use isotropykit::classical_bases::{boehler_scalars, smith_sym_tensors, smith_vectors, ClassicalArgs};
use isotropykit::lin3::{haar_rotation, DEFAULT_DEGENERACY_TOL};
use isotropykit::representation::{project_tensor, project_vector, BasisKind, SpectralExpansion};
use isotropykit::spectral_frame::{build_frame, build_svd_frame, extract_invariants, irreducible_count, CountFlags};
use isotropykit::{Mat3, SkewMat3, TensorSystem, Vec3};
use isotropykit_cli::suites::{raw_component, rng_for, run, Suite, SuiteOptions};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
    /// Set when a failure is the documented unattainable case.
    unattainable: bool,
}

fn ok(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail, unattainable: false }
}

fn count(n: usize, m: usize, p: usize, skew: bool, unit: bool, svd: bool) -> usize {
    irreducible_count(n, m, p, CountFlags { skew_nonsym: skew, all_vectors_unit: unit, svd_variant: svd }).unwrap()
}

fn c1_counts() -> Outcome {
    let mut bad = Vec::new();
    let mut check = |what: String, got: usize, want: usize| {
        if got != want {
            bad.push(format!("{what}: {got} != {want}"));
        }
    };
    check("N=2 P=2".into(), count(2, 0, 2, false, false, false), 15);
    check("N=1 P=1 unit".into(), count(1, 0, 1, false, true, false), 5);
    check("sym generators".into(), BasisKind::Sym6.len(), 6);
    for p in 1..=6 {
        check(format!("P={p} free"), count(0, 0, p, false, false, false), 3 * p - 2);
        check(format!("P={p} unit"), count(0, 0, p, false, true, false), 2 * p - 2);
    }
    for n in 1..=3 {
        for m in 0..=3 {
            for p in 0..=3 {
                check(format!("N={n} M={m} P={p} general"), count(n, m, p, false, false, false), 3 * p + 9 * m + 6 * n - 3);
                if m >= 1 {
                    check(format!("N={n} M={m} P={p} skew"), count(n, m, p, true, false, false), 3 * p + 3 * m + 6 * n - 3);
                }
            }
        }
    }
    for m in 1..=3 {
        for p in 0..=3 {
            check(format!("Gram M={m} P={p}"), count(0, m, p, false, false, false), 9 * m + 3 * p);
            for n in 0..=2 {
                check(format!("SVD N={n} M={m} P={p}"), count(n, m, p, false, false, true), 9 * m + 6 * n + 3 * p - 3);
            }
        }
    }
    let classical = (boehler_scalars(2, 0, 2).len(), smith_sym_tensors(2, 0, 2).len());
    let pass = bad.is_empty();
    ok(
        pass,
        if pass {
            format!(
                "all counts match; classical enumeration for N=2 P=2 gives {} scalars and {} tensors (reference figures 37 and 36 not reproduced)",
                classical.0, classical.1
            )
        } else {
            bad.join("; ")
        },
    )
}

/// Every shape with N ≤ 2, M ≤ 1 (skew), P ≤ 2.
fn small_shapes() -> Vec<SystemSpec> {
    let mut v = Vec::new();
    for n in 0..=2 {
        for m in 0..=1 {
            for p in 0..=2 {
                if n + m + p > 0 {
                    v.push(SystemSpec { n, m, p, skew: true, unit_vectors: false });
                }
            }
        }
    }
    v
}

fn rel(d: f64, scale: f64) -> f64 {
    d / (1.0 + scale)
}

fn c2_expressibility() -> Outcome {
    let mut evals = 0usize;
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    for (k, shape) in small_shapes().into_iter().enumerate() {
        for trial in 0..4u64 {
            let mut rng = rng_for(SEED + trial, 100 + k as u64);
            let sys = random_system(&mut rng, shape).unwrap();
            let frame = build_frame(&sys, DEFAULT_DEGENERACY_TOL).unwrap();
            let ex = SpectralExpansion::from_invariants(extract_invariants(&sys, &frame).unwrap()).unwrap();
            let (n, m, p) = (shape.n, shape.m, shape.p);
            let mut note = |r: f64, label: &str| {
                evals += 1;
                if r > worst {
                    worst = r;
                    worst_at = format!("{label} at N={n} M={m} P={p}");
                }
            };
            for ((l, s), d) in ex.scalars().iter().zip(boehler_scalars(n, m, p).evaluate(&sys).unwrap()) {
                note(rel((s - d).abs(), d.abs()), l);
            }
            for ((l, c), d) in ex.vectors().iter().zip(smith_vectors(n, m, p).evaluate(&sys).unwrap()) {
                let r = c.reconstruct_vector(&frame).unwrap();
                note(rel((r - d).norm(), d.norm()), l);
            }
            for ((l, c), d) in ex.tensors().iter().zip(smith_sym_tensors(n, m, p).evaluate(&sys).unwrap()) {
                let r = c.reconstruct_tensor(&frame).unwrap();
                note(rel((r - d.to_mat3()).frobenius_norm(), d.frobenius_norm()), l);
            }
        }
    }
    ok(evals >= 500 && worst <= 1e-10, format!("{evals} item evaluations, worst relative residual {worst:.3e} ({worst_at})"))
}

/// Skew-valued isotropic generators used to build full and skew tensors.
fn skew_generators(sys: &TensorSystem) -> Vec<Mat3> {
    let mut g: Vec<Mat3> = sys.nonsym().iter().map(|h| h.to_mat3()).collect();
    let a: Vec<Mat3> = sys.sym().iter().map(|x| x.to_mat3()).collect();
    let v: Vec<Vec3> = sys.vecs().iter().map(|x| x.v).collect();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            g.push(a[i] * a[j] - a[j] * a[i]);
        }
        for x in &v {
            g.push(SkewMat3::from_axial(&(a[i] * *x)).to_mat3());
            g.push((a[i] * x.outer(x) - x.outer(x) * a[i]).skew_part());
        }
    }
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            g.push(v[i].outer(&v[j]) - v[j].outer(&v[i]));
        }
    }
    g
}

fn c3_representation() -> Outcome {
    let shapes: Vec<SystemSpec> = small_shapes().into_iter().filter(|s| s.n >= 1).collect();
    let mut worst = [0.0f64; 4];
    let mut coeff_drift = 0.0f64;
    let mut sizes = [0usize; 4];
    for case in 0..100u64 {
        let shape = shapes[case as usize % shapes.len()];
        let mut rng = rng_for(SEED, 200 + case);
        let sys = random_system(&mut rng, shape).unwrap();
        let (n, m, p) = (shape.n, shape.m, shape.p);
        let inv = boehler_scalars(n, m, p).evaluate(&sys).unwrap();
        let weights: Vec<f64> = (0..inv.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // isotropic coefficients: smooth functions of the invariants
        let coef = |k: usize| (k as f64 + weights.iter().zip(&inv).map(|(w, x)| w * x).sum::<f64>()).sin();
        let frame = build_frame(&sys, DEFAULT_DEGENERACY_TOL).unwrap();

        let vec_items = smith_vectors(n, m, p).evaluate(&sys).unwrap();
        let g = vec_items.iter().enumerate().fold(Vec3::ZERO, |acc, (k, x)| acc + *x * coef(k));
        let c = project_vector(&g, &frame);
        sizes[0] = c.values.len();
        worst[0] = worst[0].max(rel((c.reconstruct_vector(&frame).unwrap() - g).norm(), g.norm()));

        let sym_items = smith_sym_tensors(n, m, p).evaluate(&sys).unwrap();
        let s = sym_items.iter().enumerate().fold(Mat3::ZERO, |acc, (k, x)| acc + x.to_mat3() * coef(k + 50));
        let w = skew_generators(&sys).iter().enumerate().fold(Mat3::ZERO, |acc, (k, x)| acc + *x * coef(k + 100));
        for (slot, (t, kind)) in [(s, BasisKind::Sym6), (s + w, BasisKind::Full9), (w, BasisKind::Skew3)].into_iter().enumerate() {
            let c = project_tensor(&t, &frame, kind).unwrap();
            sizes[slot + 1] = c.values.len();
            let back = c.reconstruct_tensor(&frame).unwrap();
            worst[slot + 1] = worst[slot + 1].max(rel((back - t).frobenius_norm(), t.frobenius_norm()));
        }

        // the coefficients are themselves invariants
        let q = haar_rotation(&mut rng);
        let rs = sys.conjugated(&q);
        let rf = build_frame(&rs, DEFAULT_DEGENERACY_TOL).unwrap();
        let rc = project_tensor(&q.conjugate_mat(&(s + w)), &rf, BasisKind::Full9).unwrap();
        let c0 = project_tensor(&(s + w), &frame, BasisKind::Full9).unwrap();
        for (x, y) in c0.values.iter().zip(&rc.values) {
            coeff_drift = coeff_drift.max(rel((x - y).abs(), x.abs()));
        }
    }
    let pass = worst.iter().all(|r| *r <= 1e-12) && sizes == [3, 6, 9, 3] && coeff_drift <= 1e-9;
    ok(
        pass,
        format!(
            "100 cases; generators {:?}; residuals vector {:.2e}, sym6 {:.2e}, full9 {:.2e}, skew3 {:.2e}; coefficient drift under rotation {coeff_drift:.2e}",
            sizes, worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn c4_rank() -> Outcome {
    let mut mismatches = Vec::new();
    let mut unexplained = Vec::new();
    let mut configs = 0;
    for total in 1..=3 {
        for n in 0..=total {
            for m in 0..=total - n {
                let p = total - n - m;
                for skew in [false, true] {
                    for unit in [false, true] {
                        for svd in [false, true] {
                            if (skew && m == 0) || (unit && p == 0) || (svd && (m == 0 || skew)) {
                                continue;
                            }
                            configs += 1;
                            let want = count(n, m, p, skew, unit, svd);
                            let spec = SystemSpec { n, m, p, skew, unit_vectors: unit };
                            let mut ranks = Vec::new();
                            let mut bound = 0;
                            for point in 0..3u64 {
                                let mut rng: ChaCha8Rng = rng_for(SEED + point, 400);
                                let sys = random_system(&mut rng, spec).unwrap();
                                let list = |s: &TensorSystem| Ok(spectral_list(s, svd)?.values());
                                let r = jacobian_rank("", &list, &sys, None).unwrap();
                                bound = Parameterization::new(&sys).orbit_space_dim();
                                ranks.push(r.rank);
                            }
                            if ranks.iter().any(|r| *r != want) {
                                let name = format!(
                                    "N={n} M={m} P={p}{}{}{}",
                                    if skew { " skew" } else if m > 0 { " general" } else { "" },
                                    if unit { " unit" } else { "" },
                                    if svd { " svd" } else { "" }
                                );
                                let line = format!("{name}: count {want}, ranks {ranks:?}, orbit-space dim {bound}");
                                if ranks.iter().all(|r| *r == bound) && want > bound {
                                    mismatches.push(line);
                                } else {
                                    unexplained.push(line);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mut rng = rng_for(SEED, 401);
    let sys = random_system(&mut rng, SystemSpec { n: 2, ..Default::default() }).unwrap();
    let b = boehler_scalars(2, 0, 0);
    let r = jacobian_rank("N=2", &|s| b.evaluate(s), &sys, None).unwrap();
    let classical_ok = r.items == 10 && r.rank == 9;
    if !classical_ok {
        unexplained.push(format!("classical N=2: {} items, rank {}", r.items, r.rank));
    }
    let pass = mismatches.is_empty() && unexplained.is_empty();
    let mut detail = format!(
        "{configs} configurations x 3 points; classical N=2 list: {} items, rank {}",
        r.items, r.rank
    );
    if !mismatches.is_empty() {
        detail.push_str(&format!(
            "; {} configurations where the claimed count exceeds the orbit-space dimension (list rank equals that bound): {}",
            mismatches.len(),
            mismatches.join(" | ")
        ));
    }
    if !unexplained.is_empty() {
        detail.push_str(&format!("; unexplained: {}", unexplained.join(" | ")));
    }
    Outcome { pass, detail, unattainable: !pass && unexplained.is_empty() }
}

fn c5_isotropy() -> Outcome {
    let tol = 1e-9;
    let mut worst = 0.0f64;
    let mut weakest_control = f64::INFINITY;
    let mut checked = 0usize;
    let mut shapes = small_shapes();
    shapes.extend([
        SystemSpec { n: 1, m: 1, p: 1, skew: false, unit_vectors: false },
        SystemSpec { n: 0, m: 2, p: 1, skew: false, unit_vectors: false },
        SystemSpec { n: 0, m: 1, p: 0, skew: false, unit_vectors: false },
        SystemSpec { n: 1, m: 0, p: 2, skew: false, unit_vectors: true },
        SystemSpec { n: 0, m: 0, p: 3, skew: false, unit_vectors: true },
    ]);
    for (k, shape) in shapes.into_iter().enumerate() {
        let mut rng = rng_for(SEED, 500 + k as u64);
        let sys = random_system(&mut rng, shape).unwrap();
        let mut lists: Vec<Box<dyn Fn(&TensorSystem) -> isotropykit::Result<Vec<f64>>>> =
            vec![Box::new(|s| Ok(spectral_list(s, false)?.values()))];
        if shape.m > 0 && !shape.skew {
            lists.push(Box::new(|s| Ok(extract_invariants(s, &build_svd_frame(s)?)?.values())));
        }
        if sys.all_nonsym_skew() {
            let b = boehler_scalars(shape.n, shape.m, shape.p);
            lists.push(Box::new(move |s| b.evaluate(s)));
        }
        for l in &lists {
            worst = worst.max(verify_isotropy(&Evaluator::Scalars(l.as_ref()), &sys, 100, &mut rng, tol).max_deviation);
            checked += 1;
        }
        if sys.all_nonsym_skew() {
            for item in &smith_vectors(shape.n, shape.m, shape.p).items {
                let f = |s: &TensorSystem| item.eval(&ClassicalArgs::from_system(s));
                worst = worst.max(verify_isotropy(&Evaluator::Vector(&f), &sys, 100, &mut rng, tol).max_deviation);
                checked += 1;
            }
            for item in &smith_sym_tensors(shape.n, shape.m, shape.p).items {
                let f = |s: &TensorSystem| item.eval(&ClassicalArgs::from_system(s));
                worst = worst.max(verify_isotropy(&Evaluator::SymTensor(&f), &sys, 100, &mut rng, tol).max_deviation);
                checked += 1;
            }
        }
        let raw = |s: &TensorSystem| raw_component(s);
        weakest_control = weakest_control.min(verify_isotropy(&Evaluator::Scalar(&raw), &sys, 100, &mut rng, tol).max_deviation);
    }
    ok(
        worst <= tol && weakest_control >= 1e-3,
        format!("{checked} lists/items over 100 rotations: worst deviation {worst:.3e}; smallest control deviation {weakest_control:.3e}"),
    )
}

fn suite(s: Suite) -> (bool, usize, Vec<String>) {
    let out = run(s, &SuiteOptions::seeded(SEED)).unwrap();
    let failing = out.report.failing_ids().into_iter().map(String::from).collect();
    (out.report.all_pass(), out.report.claims.len(), failing)
}

fn c6_gradients() -> Outcome {
    let out = run(Suite::Gradients, &SuiteOptions::seeded(SEED)).unwrap();
    let fam = |p: &str| out.report.claims.iter().filter(|c| c.id.starts_with(p)).count();
    let counts = (fam("gradients/vector/"), fam("gradients/sym/"), fam("gradients/nonsym/"), fam("gradients/exact/"));
    let worst_exact = out.report.claims.iter().filter(|c| c.id.starts_with("gradients/exact/")).fold(0.0f64, |m, c| m.max(c.value));
    ok(
        out.report.all_pass() && counts.0 >= 10 && counts.1 >= 10 && counts.2 >= 10 && counts.3 == 3,
        format!(
            "functions vector/sym/nonsym = {}/{}/{}; exact cases worst {worst_exact:.2e}; failing {:?}",
            counts.0,
            counts.1,
            counts.2,
            out.report.failing_ids()
        ),
    )
}

fn from_suite(s: Suite) -> Outcome {
    let (pass, n, failing) = suite(s);
    ok(pass, format!("{n} claims; failing {failing:?}"))
}

fn binary() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_isotropykit"));
    c.env_remove("ISOTROPYKIT_SEED");
    c
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn c10_cli() -> Outcome {
    let dir = std::env::temp_dir().join(format!("isotropykit-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut reports = Vec::new();
    let mut codes = Vec::new();
    for k in 0..2 {
        let path = dir.join(format!("r{k}.json"));
        let st = binary()
            .args(["verify", "isotropy", "--seed", "7", "--trials", "30", "--json", path.to_str().unwrap()])
            .output()
            .unwrap();
        codes.push(st.status.code());
        reports.push(std::fs::read(&path).unwrap_or_default());
    }
    let identical = !reports[0].is_empty() && reports[0] == reports[1];
    let code = |args: &[&str]| binary().args(args).output().unwrap().status.code();
    let pass_code = code(&["verify", "isotropy", "--input", &fixture("generic.json"), "--trials", "20"]);
    let fail_code = code(&["verify", "isotropy", "--input", &fixture("degenerate.json"), "--trials", "20"]);
    let bad_code = code(&["verify", "isotropy", "--input", &fixture("asymmetric.json")]);
    std::fs::remove_dir_all(&dir).ok();
    ok(
        identical && codes == [Some(0), Some(0)] && pass_code == Some(0) && fail_code == Some(1) && bad_code == Some(2),
        format!(
            "reruns byte-identical: {identical}; exit codes pass/numerical-fail/bad-input = {:?}/{:?}/{:?}",
            pass_code, fail_code, bad_code
        ),
    )
}

fn main() {
    type Criterion = (u8, &'static str, fn() -> Outcome, f64);
    let criteria: [Criterion; 10] = [
        (1, "counting table", c1_counts, 1.0),
        (2, "spectral expressibility", c2_expressibility, 10.0),
        (3, "representation theorems", c3_representation, 10.0),
        (4, "independence and rank", c4_rank, 30.0),
        (5, "isotropy harness", c5_isotropy, 10.0),
        (6, "gradient formulas", c6_gradients, 10.0),
        (7, "coaxiality and coalescence", || from_suite(Suite::Coalescence), 10.0),
        (8, "P-property", || from_suite(Suite::PProperty), 10.0),
        (9, "hyperelastic equivalence", || from_suite(Suite::Hyperelastic), 10.0),
        (10, "CLI determinism and exit codes", c10_cli, 30.0),
    ];
    let mut unexpected = 0;
    for (id, name, f, limit) in criteria {
        let t0 = Instant::now();
        let out = f();
        let secs = t0.elapsed().as_secs_f64();
        let in_time = secs <= limit;
        let pass = out.pass && in_time;
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = if !out.pass && out.unattainable { " [unattainable as stated; see decisions ledger]" } else { "" };
        let slow = if in_time { String::new() } else { format!(" [over the {limit}s budget]") };
        println!("criterion {id:>2} [{tag}] {name}: {} ({secs:.2}s){note}{slow}", out.detail);
        if !pass && !(out.unattainable && in_time) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
