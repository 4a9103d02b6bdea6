//! Exact-shape 3D linear algebra.
//!
//! Vectors, general/symmetric/skew 3x3 tensors, rotations, a Jacobi
//! eigen-solver for symmetric tensors, a one-sided Jacobi SVD and Haar
//! sampling of rotations. Everything here is a plain value type.

use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crate::system::conjugate;

/// Tolerance used to decide whether a matrix is (anti)symmetric or a
/// rotation is orthogonal.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Default relative band used to group eigenvalues into degenerate clusters.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    /// Checked constructor rejecting NaN and infinities.
    pub fn try_new(components: [f64; 3]) -> Result<Self> {
        let v = Vec3(components);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidInput(format!("non-finite vector {components:?}")))
        }
    }

    /// Coordinate axis `e_i` (0-based).
    pub fn axis(i: usize) -> Self {
        let mut c = [0.0; 3];
        c[i] = 1.0;
        Vec3(c)
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        let a = &self.0;
        let b = &o.0;
        Vec3([
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(*self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn outer(&self, other: &Vec3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.0[i] * other.0[j];
            }
        }
        Mat3(m)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Index of the coordinate axis least aligned with `self`.
    pub fn least_aligned_axis(&self) -> usize {
        let mut k = 0;
        for i in 1..3 {
            if self.0[i].abs() < self.0[k].abs() {
                k = i;
            }
        }
        k
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

/// General second-order tensor, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn try_new(rows: [[f64; 3]; 3]) -> Result<Self> {
        let m = Mat3(rows);
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::InvalidInput(format!("non-finite matrix {rows:?}")))
        }
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Mat3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Mat3([
            [c0[0], c1[0], c2[0]],
            [c0[1], c1[1], c2[1]],
            [c0[2], c1[2], c2[2]],
        ])
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3(self.0[i])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn inverse(&self) -> Option<Mat3> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        let adj = Mat3([
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ]);
        Some(adj * (1.0 / d))
    }

    /// Frobenius inner product `A : B = tr(A B^T)`.
    pub fn frobenius_dot(&self, other: &Mat3) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.0[i][j] * other.0[i][j];
            }
        }
        s
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_dot(self).sqrt()
    }

    pub fn sym_part(&self) -> Mat3 {
        (*self + self.transpose()) * 0.5
    }

    pub fn skew_part(&self) -> Mat3 {
        (*self - self.transpose()) * 0.5
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// `‖A - A^T‖_F`.
    pub fn asymmetry(&self) -> f64 {
        (*self - self.transpose()).frobenius_norm()
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        Vec3([self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v)])
    }

    pub fn pow(&self, n: u32) -> Mat3 {
        (0..n).fold(Mat3::IDENTITY, |acc, _| acc * *self)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut m = self.0;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e += o.0[i][j];
            }
        }
        Mat3(m)
    }
}

impl AddAssign for Mat3 {
    fn add_assign(&mut self, o: Mat3) {
        *self = *self + o;
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        self + (-o)
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self * -1.0
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        let mut m = self.0;
        m.iter_mut().flatten().for_each(|e| *e *= s);
        Mat3(m)
    }
}

impl Mul<Mat3> for f64 {
    type Output = Mat3;
    fn mul(self, m: Mat3) -> Mat3 {
        m * self
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(m)
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        self.mul_vec(&v)
    }
}

/// Symmetric tensor stored by its upper triangle `(00, 01, 02, 11, 12, 22)`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SymMat3(pub [f64; 6]);

const SYM_INDEX: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];

impl SymMat3 {
    pub const IDENTITY: SymMat3 = SymMat3([1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);

    pub fn from_upper(upper: [f64; 6]) -> Self {
        SymMat3(upper)
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        SymMat3([a, 0.0, 0.0, b, 0.0, c])
    }

    /// Accepts `m` when it is symmetric within `tol·(1 + ‖m‖_F)`; the upper
    /// triangle of the symmetric part is stored.
    pub fn try_from_mat3(m: &Mat3, tol: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidInput("non-finite matrix".into()));
        }
        let asym = m.asymmetry();
        if asym > tol * (1.0 + m.frobenius_norm()) {
            return Err(Error::Class(format!("matrix is not symmetric (‖A−Aᵀ‖ = {asym:e})")));
        }
        Ok(Self::from_sym_part(m))
    }

    pub fn from_sym_part(m: &Mat3) -> Self {
        let s = m.sym_part();
        SymMat3([s.0[0][0], s.0[0][1], s.0[0][2], s.0[1][1], s.0[1][2], s.0[2][2]])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[SYM_INDEX[i][j]]
    }

    pub fn to_mat3(&self) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.get(i, j);
            }
        }
        Mat3(m)
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[3] + self.0[5]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.to_mat3().frobenius_norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, s: f64) -> SymMat3 {
        SymMat3(self.0.map(|x| x * s))
    }
}

impl Add for SymMat3 {
    type Output = SymMat3;
    fn add(self, o: SymMat3) -> SymMat3 {
        let mut a = self.0;
        a.iter_mut().zip(o.0).for_each(|(x, y)| *x += y);
        SymMat3(a)
    }
}

impl Sub for SymMat3 {
    type Output = SymMat3;
    fn sub(self, o: SymMat3) -> SymMat3 {
        self + o.scaled(-1.0)
    }
}

/// Skew tensor stored by its strict upper triangle `(01, 02, 12)`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SkewMat3(pub [f64; 3]);

impl SkewMat3 {
    pub fn new(w01: f64, w02: f64, w12: f64) -> Self {
        SkewMat3([w01, w02, w12])
    }

    /// Skew tensor `W` with `W x = w × x`.
    pub fn from_axial(w: &Vec3) -> Self {
        SkewMat3([-w[2], w[1], -w[0]])
    }

    pub fn axial(&self) -> Vec3 {
        Vec3([-self.0[2], self.0[1], -self.0[0]])
    }

    pub fn try_from_mat3(m: &Mat3, tol: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidInput("non-finite matrix".into()));
        }
        let sym = (*m + m.transpose()).frobenius_norm();
        if sym > tol * (1.0 + m.frobenius_norm()) {
            return Err(Error::Class(format!("matrix is not skew (‖A+Aᵀ‖ = {sym:e})")));
        }
        Ok(Self::from_skew_part(m))
    }

    pub fn from_skew_part(m: &Mat3) -> Self {
        let w = m.skew_part();
        SkewMat3([w.0[0][1], w.0[0][2], w.0[1][2]])
    }

    pub fn to_mat3(&self) -> Mat3 {
        let [a, b, c] = self.0;
        Mat3([[0.0, a, b], [-a, 0.0, c], [-b, -c, 0.0]])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

/// Proper orthogonal tensor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rotation(Mat3);

impl Rotation {
    pub const IDENTITY: Rotation = Rotation(Mat3::IDENTITY);

    /// Accepts `q` when `‖QQᵀ − I‖_F ≤ 1e−12` and `|det Q − 1| ≤ 1e−12`.
    pub fn new(q: Mat3) -> Result<Self> {
        let orth = (q * q.transpose() - Mat3::IDENTITY).frobenius_norm();
        let det = q.det();
        if !q.is_finite() || orth > STRUCTURE_TOL || (det - 1.0).abs() > STRUCTURE_TOL {
            return Err(Error::InvalidInput(format!(
                "not a rotation: ‖QQᵀ−I‖ = {orth:e}, det = {det}"
            )));
        }
        Ok(Rotation(q))
    }

    /// Rotation of a unit quaternion `(w, x, y, z)`; the input is normalized.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        Rotation(Mat3([
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]))
    }

    /// Right-handed rotation by `angle` about `axis` (Rodrigues).
    pub fn about_axis(axis: &Vec3, angle: f64) -> Result<Self> {
        let n = axis
            .normalized()
            .ok_or_else(|| Error::InvalidInput("zero rotation axis".into()))?;
        let (s, c) = (0.5 * angle).sin_cos();
        Ok(Self::from_quaternion(c, s * n[0], s * n[1], s * n[2]))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn inverse(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * *v
    }

    /// `Q A Qᵀ`.
    pub fn conjugate_mat(&self, a: &Mat3) -> Mat3 {
        self.0 * *a * self.0.transpose()
    }

    pub fn conjugate_sym(&self, a: &SymMat3) -> SymMat3 {
        SymMat3::from_sym_part(&self.conjugate_mat(&a.to_mat3()))
    }

    pub fn conjugate_skew(&self, w: &SkewMat3) -> SkewMat3 {
        SkewMat3::from_skew_part(&self.conjugate_mat(&w.to_mat3()))
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation(self.0 * other.0)
    }
}

/// Haar-distributed rotation drawn from a uniform unit quaternion.
pub fn haar_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    let u3: f64 = rng.gen();
    let tau = std::f64::consts::TAU;
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    Rotation::from_quaternion(
        b * (tau * u3).cos(),
        a * (tau * u2).sin(),
        a * (tau * u2).cos(),
        b * (tau * u3).sin(),
    )
}

/// Partition of the three (0-based) eigen-indices into clusters of
/// numerically equal eigenvalues.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degeneracy(pub Vec<Vec<usize>>);

impl Degeneracy {
    /// Groups adjacent entries of a descending list whose gap is within
    /// `tol_rel·(1 + max|λ|)`.
    pub fn from_sorted(values: &[f64; 3], tol_rel: f64) -> Self {
        let scale = 1.0 + values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut groups: Vec<Vec<usize>> = vec![vec![0]];
        for i in 1..3 {
            if (values[i - 1] - values[i]).abs() <= tol_rel * scale {
                groups.last_mut().unwrap().push(i);
            } else {
                groups.push(vec![i]);
            }
        }
        Degeneracy(groups)
    }

    pub fn distinct() -> Self {
        Degeneracy(vec![vec![0], vec![1], vec![2]])
    }

    pub fn is_degenerate(&self) -> bool {
        self.0.len() < 3
    }

    /// The first cluster holding more than one index.
    pub fn degenerate_cluster(&self) -> Option<&[usize]> {
        self.0.iter().find(|g| g.len() > 1).map(|g| g.as_slice())
    }
}

impl fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|g| {
                let idx: Vec<String> = g.iter().map(|i| (i + 1).to_string()).collect();
                format!("{{{}}}", idx.join(","))
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymEigen {
    /// Descending.
    pub values: [f64; 3],
    /// Orthonormal, right-handed.
    pub vectors: [Vec3; 3],
    pub degeneracy: Degeneracy,
}

impl SymEigen {
    pub fn reconstruct(&self) -> Mat3 {
        (0..3).fold(Mat3::ZERO, |acc, i| {
            acc + self.vectors[i].outer(&self.vectors[i]) * self.values[i]
        })
    }
}

/// Flip `v` so that its largest-magnitude component is positive (first wins on ties).
pub(crate) fn sign_convention(v: Vec3) -> (Vec3, bool) {
    let mut k = 0;
    for i in 1..3 {
        if v[i].abs() > v[k].abs() {
            k = i;
        }
    }
    if v[k] < 0.0 {
        (-v, true)
    } else {
        (v, false)
    }
}

fn jacobi_rotate(a: &mut [[f64; 3]; 3], v: &mut [[f64; 3]; 3], p: usize, q: usize) {
    let apq = a[p][q];
    if apq == 0.0 {
        return;
    }
    let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // A <- J^T A J with J the plane rotation in (p, q).
    for k in 0..3 {
        let akp = a[k][p];
        let akq = a[k][q];
        a[k][p] = c * akp - s * akq;
        a[k][q] = s * akp + c * akq;
    }
    for k in 0..3 {
        let apk = a[p][k];
        let aqk = a[q][k];
        a[p][k] = c * apk - s * aqk;
        a[q][k] = s * apk + c * aqk;
    }
    a[p][q] = 0.0;
    a[q][p] = 0.0;
    for row in v.iter_mut() {
        let vp = row[p];
        let vq = row[q];
        row[p] = c * vp - s * vq;
        row[q] = s * vp + c * vq;
    }
}

/// Cyclic Jacobi diagonalization; returns diagonal and column eigenvectors.
fn jacobi_eigen(m: &Mat3) -> ([f64; 3], Mat3) {
    let mut a = m.0;
    let mut v = Mat3::IDENTITY.0;
    for sweep in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let g = 100.0 * a[p][q].abs();
            if sweep > 3 && a[p][p].abs() + g == a[p][p].abs() && a[q][q].abs() + g == a[q][q].abs() {
                a[p][q] = 0.0;
                a[q][p] = 0.0;
            } else {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], Mat3(v))
}

/// Eigen-decomposition of a symmetric tensor.
///
/// Eigenvalues are sorted descending. `v1` and `v2` carry the
/// largest-component-positive sign convention and `v3 = v1 × v2`.
pub fn eig_sym(a: &SymMat3, tol_rel: f64) -> Result<SymEigen> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("non-finite symmetric tensor".into()));
    }
    if !(tol_rel > 0.0) {
        return Err(Error::Precondition("degeneracy tolerance must be positive".into()));
    }
    let (d, v) = jacobi_eigen(&a.to_mat3());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
    let values = order.map(|i| d[i]);
    let v1 = sign_convention(v.col(order[0])).0;
    let v2 = sign_convention(v.col(order[1])).0;
    let v3 = v1.cross(&v2);
    Ok(SymEigen {
        values,
        vectors: [v1, v2, v3],
        degeneracy: Degeneracy::from_sorted(&values, tol_rel),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Svd3 {
    /// Descending, non-negative.
    pub values: [f64; 3],
    /// Left singular vectors (eigenvectors of `F Fᵀ`), right-handed.
    pub left: [Vec3; 3],
    /// Right singular vectors (eigenvectors of `Fᵀ F`); right-handed when
    /// `det F ≥ 0`, left-handed when `det F < 0`.
    pub right: [Vec3; 3],
}

impl Svd3 {
    pub fn reconstruct(&self) -> Mat3 {
        (0..3).fold(Mat3::ZERO, |acc, i| acc + self.left[i].outer(&self.right[i]) * self.values[i])
    }
}

/// Unit vector orthogonal to the unit vector `v`.
pub(crate) fn orthogonal_unit(v: &Vec3) -> Vec3 {
    let e = Vec3::axis(v.least_aligned_axis());
    v.cross(&e).normalized().expect("axis least aligned with a unit vector is not parallel")
}

/// Singular value decomposition `F = Σ λᵢ vᵢ ⊗ uᵢ` by one-sided Jacobi.
pub fn svd3(f: &Mat3) -> Result<Svd3> {
    if !f.is_finite() {
        return Err(Error::InvalidInput("non-finite tensor".into()));
    }
    let mut b = [f.col(0), f.col(1), f.col(2)];
    let mut r = [Vec3::axis(0), Vec3::axis(1), Vec3::axis(2)];
    for _ in 0..64 {
        let mut rotated = false;
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let alpha = b[p].norm_squared();
            let beta = b[q].norm_squared();
            let gamma = b[p].dot(&b[q]);
            if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                continue;
            }
            rotated = true;
            let zeta = (beta - alpha) / (2.0 * gamma);
            let sgn = if zeta >= 0.0 { 1.0 } else { -1.0 };
            let t = sgn / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = c * t;
            let (bp, bq) = (b[p], b[q]);
            b[p] = bp * c - bq * s;
            b[q] = bp * s + bq * c;
            let (rp, rq) = (r[p], r[q]);
            r[p] = rp * c - rq * s;
            r[q] = rp * s + rq * c;
        }
        if !rotated {
            break;
        }
    }
    let norms = b.map(|x| x.norm());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let values = order.map(|i| norms[i]);
    let mut right = order.map(|i| r[i]);
    let cols = order.map(|i| b[i]);
    let cutoff = values[0] * 1e-14;
    let live = |k: usize| values[0] > 0.0 && values[k] > cutoff;

    let mut left = [Vec3::ZERO; 3];
    left[0] = if live(0) { cols[0] * (1.0 / values[0]) } else { Vec3::axis(0) };
    left[1] = if live(1) { cols[1] * (1.0 / values[1]) } else { orthogonal_unit(&left[0]) };
    let (l0, f0) = sign_convention(left[0]);
    let (l1, f1) = sign_convention(left[1]);
    if f0 {
        right[0] = -right[0];
    }
    if f1 {
        right[1] = -right[1];
    }
    let l2 = l0.cross(&l1);
    if live(2) {
        if l2.dot(&cols[2]) < 0.0 {
            right[2] = -right[2];
        }
    } else {
        // Null direction: pick the sign that keeps the right triad right-handed.
        if right[0].cross(&right[1]).dot(&right[2]) < 0.0 {
            right[2] = -right[2];
        }
    }
    Ok(Svd3 { values, left: [l0, l1, l2], right })
}
