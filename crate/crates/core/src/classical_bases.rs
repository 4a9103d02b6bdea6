//! The classical Boehler/Smith bases as numeric evaluators.
//!
//! Items are enumerated exactly as the classical lists print them (with
//! `tr AᵢAⱼ` restored among the scalars); counts are always obtained by
//! enumeration. Index ranges: `i < j < k` over symmetric tensors, `p < q < r`
//! over skew tensors, `α < β` over vectors, wherever an item carries two or
//! three indices of the same family.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lin3::{Mat3, SymMat3, Vec3};
use crate::system::TensorSystem;

/// Arguments of a classical evaluator, as plain matrices.
#[derive(Clone, Debug)]
pub struct ClassicalArgs {
    pub a: Vec<Mat3>,
    pub w: Vec<Mat3>,
    pub v: Vec<Vec3>,
}

impl ClassicalArgs {
    pub fn from_system(system: &TensorSystem) -> Self {
        ClassicalArgs {
            a: system.sym().iter().map(SymMat3::to_mat3).collect(),
            w: system.nonsym().iter().map(|h| h.to_mat3()).collect(),
            v: system.vecs().iter().map(|a| a.v).collect(),
        }
    }
}

type Eval<T> = Arc<dyn Fn(&ClassicalArgs) -> T + Send + Sync>;

#[derive(Clone)]
pub struct BasisItem<T> {
    pub label: String,
    eval: Eval<T>,
}

impl<T> BasisItem<T> {
    pub fn eval(&self, args: &ClassicalArgs) -> T {
        (self.eval)(args)
    }
}

impl<T> std::fmt::Debug for BasisItem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label)
    }
}

/// Ordered list of labelled evaluators for systems with `N` symmetric
/// tensors, `M` skew tensors and `P` vectors.
#[derive(Clone, Debug)]
pub struct ClassicalBasis<T> {
    pub n: usize,
    pub m_skew: usize,
    pub p: usize,
    pub items: Vec<BasisItem<T>>,
}

pub type ClassicalScalarBasis = ClassicalBasis<f64>;
pub type ClassicalVectorBasis = ClassicalBasis<Vec3>;
pub type ClassicalTensorBasis = ClassicalBasis<SymMat3>;

impl<T> ClassicalBasis<T> {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.items.iter().map(|it| it.label.as_str()).collect()
    }

    fn check_shape(&self, system: &TensorSystem) -> Result<()> {
        if system.n() != self.n || system.m() != self.m_skew || system.p() != self.p {
            return Err(Error::Usage(format!(
                "basis built for (N,M,P)=({},{},{}) evaluated on ({},{},{})",
                self.n,
                self.m_skew,
                self.p,
                system.n(),
                system.m(),
                system.p()
            )));
        }
        if !system.all_nonsym_skew() {
            return Err(Error::Class("classical bases take skew non-symmetric arguments only".into()));
        }
        Ok(())
    }

    pub fn evaluate(&self, system: &TensorSystem) -> Result<Vec<T>> {
        self.check_shape(system)?;
        Ok(self.evaluate_args(&ClassicalArgs::from_system(system)))
    }

    /// Unchecked evaluation on raw arguments of the right shape.
    pub fn evaluate_args(&self, args: &ClassicalArgs) -> Vec<T> {
        self.items.iter().map(|it| it.eval(args)).collect()
    }
}

struct Builder<T> {
    items: Vec<BasisItem<T>>,
}

impl<T> Builder<T> {
    fn push(&mut self, label: String, f: impl Fn(&ClassicalArgs) -> T + Send + Sync + 'static) {
        self.items.push(BasisItem { label, eval: Arc::new(f) });
    }
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

fn triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| (i, j, k))))
}

fn qf(x: &Vec3, m: &Mat3, y: &Vec3) -> f64 {
    x.dot(&(*m * *y))
}

fn comm(x: &Mat3, y: &Mat3) -> Mat3 {
    *x * *y - *y * *x
}

fn sq(x: &Mat3) -> Mat3 {
    *x * *x
}

/// Boehler's scalar invariants, followed by the skew block when `M > 0`.
pub fn boehler_scalars(n: usize, m_skew: usize, p: usize) -> ClassicalScalarBasis {
    let mut b = Builder { items: Vec::new() };
    let (a1, w1, v1) = (|i: usize| i + 1, |q: usize| q + 1, |s: usize| s + 1);

    for al in 0..p {
        b.push(format!("a{0}.a{0}", v1(al)), move |x| x.v[al].dot(&x.v[al]));
    }
    for (al, be) in pairs(p) {
        b.push(format!("a{}.a{}", v1(al), v1(be)), move |x| x.v[al].dot(&x.v[be]));
    }
    for i in 0..n {
        b.push(format!("tr(A{})", a1(i)), move |x| x.a[i].trace());
        b.push(format!("tr(A{}^2)", a1(i)), move |x| sq(&x.a[i]).trace());
        b.push(format!("tr(A{}^3)", a1(i)), move |x| x.a[i].pow(3).trace());
    }
    for (i, j) in pairs(n) {
        let (li, lj) = (a1(i), a1(j));
        b.push(format!("tr(A{li}*A{lj})"), move |x| (x.a[i] * x.a[j]).trace());
        b.push(format!("tr(A{li}^2*A{lj})"), move |x| (sq(&x.a[i]) * x.a[j]).trace());
        b.push(format!("tr(A{li}*A{lj}^2)"), move |x| (x.a[i] * sq(&x.a[j])).trace());
        b.push(format!("tr(A{li}^2*A{lj}^2)"), move |x| (sq(&x.a[i]) * sq(&x.a[j])).trace());
    }
    for (i, j, k) in triples(n) {
        b.push(format!("tr(A{}*A{}*A{})", a1(i), a1(j), a1(k)), move |x| {
            (x.a[i] * x.a[j] * x.a[k]).trace()
        });
    }
    for al in 0..p {
        let la = v1(al);
        for i in 0..n {
            let li = a1(i);
            b.push(format!("a{la}.A{li}.a{la}"), move |x| qf(&x.v[al], &x.a[i], &x.v[al]));
            b.push(format!("a{la}.A{li}^2.a{la}"), move |x| qf(&x.v[al], &sq(&x.a[i]), &x.v[al]));
        }
        for (i, j) in pairs(n) {
            b.push(format!("a{la}.A{}*A{}.a{la}", a1(i), a1(j)), move |x| {
                qf(&x.v[al], &(x.a[i] * x.a[j]), &x.v[al])
            });
        }
    }
    for (al, be) in pairs(p) {
        let (la, lb) = (v1(al), v1(be));
        for i in 0..n {
            let li = a1(i);
            b.push(format!("a{la}.A{li}.a{lb}"), move |x| qf(&x.v[al], &x.a[i], &x.v[be]));
            b.push(format!("a{la}.A{li}^2.a{lb}"), move |x| qf(&x.v[al], &sq(&x.a[i]), &x.v[be]));
        }
        for (i, j) in pairs(n) {
            let (li, lj) = (a1(i), a1(j));
            b.push(format!("a{la}.(A{li}*A{lj}-A{lj}*A{li}).a{lb}"), move |x| {
                qf(&x.v[al], &comm(&x.a[i], &x.a[j]), &x.v[be])
            });
        }
    }

    if m_skew > 0 {
        for q in 0..m_skew {
            b.push(format!("tr(W{}^2)", w1(q)), move |x| sq(&x.w[q]).trace());
        }
        for (q, r) in pairs(m_skew) {
            b.push(format!("tr(W{}*W{})", w1(q), w1(r)), move |x| (x.w[q] * x.w[r]).trace());
        }
        for (q, r, s) in triples(m_skew) {
            b.push(format!("tr(W{}*W{}*W{})", w1(q), w1(r), w1(s)), move |x| {
                (x.w[q] * x.w[r] * x.w[s]).trace()
            });
        }
        for al in 0..p {
            let la = v1(al);
            for q in 0..m_skew {
                b.push(format!("a{la}.W{}^2.a{la}", w1(q)), move |x| qf(&x.v[al], &sq(&x.w[q]), &x.v[al]));
            }
            for (q, r) in pairs(m_skew) {
                let (lq, lr) = (w1(q), w1(r));
                b.push(format!("a{la}.W{lq}*W{lr}.a{la}"), move |x| qf(&x.v[al], &(x.w[q] * x.w[r]), &x.v[al]));
                b.push(format!("a{la}.W{lq}^2*W{lr}.a{la}"), move |x| {
                    qf(&x.v[al], &(sq(&x.w[q]) * x.w[r]), &x.v[al])
                });
                b.push(format!("a{la}.W{lq}*W{lr}^2.a{la}"), move |x| {
                    qf(&x.v[al], &(x.w[q] * sq(&x.w[r])), &x.v[al])
                });
            }
        }
        for (al, be) in pairs(p) {
            let (la, lb) = (v1(al), v1(be));
            for q in 0..m_skew {
                let lq = w1(q);
                b.push(format!("a{la}.W{lq}.a{lb}"), move |x| qf(&x.v[al], &x.w[q], &x.v[be]));
                b.push(format!("a{la}.W{lq}^2.a{lb}"), move |x| qf(&x.v[al], &sq(&x.w[q]), &x.v[be]));
            }
            for (q, r) in pairs(m_skew) {
                let (lq, lr) = (w1(q), w1(r));
                b.push(format!("a{la}.(W{lq}*W{lr}-W{lr}*W{lq}).a{lb}"), move |x| {
                    qf(&x.v[al], &comm(&x.w[q], &x.w[r]), &x.v[be])
                });
            }
        }
        for i in 0..n {
            let li = a1(i);
            for q in 0..m_skew {
                let lq = w1(q);
                b.push(format!("tr(A{li}*W{lq}^2)"), move |x| (x.a[i] * sq(&x.w[q])).trace());
                b.push(format!("tr(A{li}^2*W{lq}^2)"), move |x| (sq(&x.a[i]) * sq(&x.w[q])).trace());
                b.push(format!("tr(A{li}^2*W{lq}^2*A{li}*W{lq})"), move |x| {
                    (sq(&x.a[i]) * sq(&x.w[q]) * x.a[i] * x.w[q]).trace()
                });
            }
            for (q, r) in pairs(m_skew) {
                let (lq, lr) = (w1(q), w1(r));
                b.push(format!("tr(A{li}*W{lq}*W{lr})"), move |x| (x.a[i] * x.w[q] * x.w[r]).trace());
                b.push(format!("tr(A{li}*W{lq}*W{lr}^2)"), move |x| {
                    (x.a[i] * x.w[q] * sq(&x.w[r])).trace()
                });
                b.push(format!("tr(A{li}*W{lq}^2*W{lr})"), move |x| {
                    (x.a[i] * sq(&x.w[q]) * x.w[r]).trace()
                });
            }
        }
        for (i, j) in pairs(n) {
            let (li, lj) = (a1(i), a1(j));
            for q in 0..m_skew {
                let lq = w1(q);
                b.push(format!("tr(A{li}*A{lj}*W{lq})"), move |x| (x.a[i] * x.a[j] * x.w[q]).trace());
                b.push(format!("tr(A{li}*W{lq}^2*A{lj}*W{lq})"), move |x| {
                    (x.a[i] * sq(&x.w[q]) * x.a[j] * x.w[q]).trace()
                });
                b.push(format!("tr(A{li}*A{lj}^2*W{lq})"), move |x| {
                    (x.a[i] * sq(&x.a[j]) * x.w[q]).trace()
                });
                b.push(format!("tr(A{li}^2*A{lj}*W{lq})"), move |x| {
                    (sq(&x.a[i]) * x.a[j] * x.w[q]).trace()
                });
            }
        }
        for al in 0..p {
            let la = v1(al);
            for i in 0..n {
                let li = a1(i);
                for q in 0..m_skew {
                    let lq = w1(q);
                    b.push(format!("a{la}.A{li}*W{lq}.a{la}"), move |x| {
                        qf(&x.v[al], &(x.a[i] * x.w[q]), &x.v[al])
                    });
                    b.push(format!("a{la}.W{lq}*A{li}*W{lq}^2.a{la}"), move |x| {
                        qf(&x.v[al], &(x.w[q] * x.a[i] * sq(&x.w[q])), &x.v[al])
                    });
                    b.push(format!("a{la}.A{li}^2*W{lq}.a{la}"), move |x| {
                        qf(&x.v[al], &(sq(&x.a[i]) * x.w[q]), &x.v[al])
                    });
                }
            }
        }
        for (al, be) in pairs(p) {
            let (la, lb) = (v1(al), v1(be));
            for i in 0..n {
                for q in 0..m_skew {
                    let (li, lq) = (a1(i), w1(q));
                    b.push(format!("a{la}.(A{li}*W{lq}-W{lq}*A{li}).a{lb}"), move |x| {
                        qf(&x.v[al], &comm(&x.a[i], &x.w[q]), &x.v[be])
                    });
                }
            }
        }
    }
    ClassicalBasis { n, m_skew, p, items: b.items }
}

/// Smith's generator vectors, followed by the skew terms when `M > 0`.
pub fn smith_vectors(n: usize, m_skew: usize, p: usize) -> ClassicalVectorBasis {
    let mut b = Builder { items: Vec::new() };
    for m in 0..p {
        let lm = m + 1;
        b.push(format!("a{lm}"), move |x| x.v[m]);
        for i in 0..n {
            let li = i + 1;
            b.push(format!("A{li}*a{lm}"), move |x| x.a[i] * x.v[m]);
            b.push(format!("A{li}^2*a{lm}"), move |x| sq(&x.a[i]) * x.v[m]);
        }
        for (i, j) in pairs(n) {
            let (li, lj) = (i + 1, j + 1);
            b.push(format!("(A{li}*A{lj}-A{lj}*A{li})*a{lm}"), move |x| comm(&x.a[i], &x.a[j]) * x.v[m]);
        }
        for q in 0..m_skew {
            let lq = q + 1;
            b.push(format!("W{lq}*a{lm}"), move |x| x.w[q] * x.v[m]);
            b.push(format!("W{lq}^2*a{lm}"), move |x| sq(&x.w[q]) * x.v[m]);
        }
        for (q, r) in pairs(m_skew) {
            let (lq, lr) = (q + 1, r + 1);
            b.push(format!("(W{lq}*W{lr}-W{lr}*W{lq})*a{lm}"), move |x| comm(&x.w[q], &x.w[r]) * x.v[m]);
        }
        for i in 0..n {
            for q in 0..m_skew {
                let (li, lq) = (i + 1, q + 1);
                b.push(format!("(A{li}*W{lq}-W{lq}*A{li})*a{lm}"), move |x| comm(&x.a[i], &x.w[q]) * x.v[m]);
            }
        }
    }
    ClassicalBasis { n, m_skew, p, items: b.items }
}

fn dyad_sym(x: &Vec3, y: &Vec3) -> Mat3 {
    x.outer(y) + y.outer(x)
}

fn dyad_skew(x: &Vec3, y: &Vec3) -> Mat3 {
    x.outer(y) - y.outer(x)
}

fn sym(m: Mat3) -> SymMat3 {
    SymMat3::from_sym_part(&m)
}

/// Smith's symmetric generator tensors, followed by the skew terms when `M > 0`.
pub fn smith_sym_tensors(n: usize, m_skew: usize, p: usize) -> ClassicalTensorBasis {
    let mut b = Builder { items: Vec::new() };
    b.push("I".to_string(), |_| SymMat3::IDENTITY);
    for i in 0..n {
        let li = i + 1;
        b.push(format!("A{li}"), move |x| sym(x.a[i]));
        b.push(format!("A{li}^2"), move |x| sym(sq(&x.a[i])));
    }
    for (i, j) in pairs(n) {
        let (li, lj) = (i + 1, j + 1);
        b.push(format!("A{li}*A{lj}+A{lj}*A{li}"), move |x| sym(x.a[i] * x.a[j] + x.a[j] * x.a[i]));
        b.push(format!("A{li}^2*A{lj}+A{lj}*A{li}^2"), move |x| {
            let a2 = sq(&x.a[i]);
            sym(a2 * x.a[j] + x.a[j] * a2)
        });
        b.push(format!("A{li}*A{lj}^2+A{lj}^2*A{li}"), move |x| {
            let b2 = sq(&x.a[j]);
            sym(x.a[i] * b2 + b2 * x.a[i])
        });
    }
    for m in 0..p {
        let lm = m + 1;
        b.push(format!("a{lm}(x)a{lm}"), move |x| sym(x.v[m].outer(&x.v[m])));
    }
    for (m, k) in pairs(p) {
        let (lm, lk) = (m + 1, k + 1);
        b.push(format!("a{lm}(x)a{lk}+a{lk}(x)a{lm}"), move |x| sym(dyad_sym(&x.v[m], &x.v[k])));
    }
    for m in 0..p {
        let lm = m + 1;
        for i in 0..n {
            let li = i + 1;
            b.push(format!("a{lm}(x)A{li}*a{lm}+A{li}*a{lm}(x)a{lm}"), move |x| {
                sym(dyad_sym(&x.v[m], &(x.a[i] * x.v[m])))
            });
            b.push(format!("a{lm}(x)A{li}^2*a{lm}+A{li}^2*a{lm}(x)a{lm}"), move |x| {
                sym(dyad_sym(&x.v[m], &(sq(&x.a[i]) * x.v[m])))
            });
        }
    }
    for (m, k) in pairs(p) {
        let (lm, lk) = (m + 1, k + 1);
        for i in 0..n {
            let li = i + 1;
            b.push(format!("A{li}*(a{lm}^a{lk})-(a{lm}^a{lk})*A{li}"), move |x| {
                sym(comm(&x.a[i], &dyad_skew(&x.v[m], &x.v[k])))
            });
        }
    }

    if m_skew > 0 {
        for q in 0..m_skew {
            b.push(format!("W{}^2", q + 1), move |x| sym(sq(&x.w[q])));
        }
        for (q, r) in pairs(m_skew) {
            let (lq, lr) = (q + 1, r + 1);
            b.push(format!("W{lq}*W{lr}+W{lr}*W{lq}"), move |x| sym(x.w[q] * x.w[r] + x.w[r] * x.w[q]));
            b.push(format!("W{lq}*W{lr}^2-W{lr}^2*W{lq}"), move |x| sym(comm(&x.w[q], &sq(&x.w[r]))));
            b.push(format!("W{lq}^2*W{lr}-W{lr}*W{lq}^2"), move |x| sym(comm(&sq(&x.w[q]), &x.w[r])));
        }
        for i in 0..n {
            for q in 0..m_skew {
                let (li, lq) = (i + 1, q + 1);
                b.push(format!("A{li}*W{lq}-W{lq}*A{li}"), move |x| sym(comm(&x.a[i], &x.w[q])));
                b.push(format!("W{lq}*A{li}*W{lq}"), move |x| sym(x.w[q] * x.a[i] * x.w[q]));
                b.push(format!("A{li}^2*W{lq}-W{lq}*A{li}^2"), move |x| sym(comm(&sq(&x.a[i]), &x.w[q])));
                b.push(format!("W{lq}*A{li}*W{lq}^2-W{lq}^2*A{li}*W{lq}"), move |x| {
                    let w = x.w[q];
                    sym(w * x.a[i] * sq(&w) - sq(&w) * x.a[i] * w)
                });
            }
        }
        for m in 0..p {
            for q in 0..m_skew {
                let (lm, lq) = (m + 1, q + 1);
                b.push(format!("W{lq}*a{lm}(x)W{lq}*a{lm}"), move |x| {
                    let wa = x.w[q] * x.v[m];
                    sym(wa.outer(&wa))
                });
                b.push(format!("a{lm}(x)W{lq}*a{lm}+W{lq}*a{lm}(x)a{lm}"), move |x| {
                    sym(dyad_sym(&x.v[m], &(x.w[q] * x.v[m])))
                });
                b.push(format!("W{lq}*a{lm}(x)W{lq}^2*a{lm}+W{lq}^2*a{lm}(x)W{lq}*a{lm}"), move |x| {
                    let wa = x.w[q] * x.v[m];
                    sym(dyad_sym(&wa, &(x.w[q] * wa)))
                });
            }
        }
        for (m, k) in pairs(p) {
            for q in 0..m_skew {
                let (lm, lk, lq) = (m + 1, k + 1, q + 1);
                b.push(format!("W{lq}*(a{lm}^a{lk})+(a{lm}^a{lk})*W{lq}"), move |x| {
                    let s = dyad_skew(&x.v[m], &x.v[k]);
                    sym(x.w[q] * s + s * x.w[q])
                });
            }
        }
    }
    ClassicalBasis { n, m_skew, p, items: b.items }
}
