//! Central finite differences, used as the oracle for every derivative
//! formula and for Jacobian ranks.

use crate::lin3::{Mat3, SymMat3, Vec3};

/// `1e-5·(1 + scale)`.
pub fn default_step(scale: f64) -> f64 {
    1e-5 * (1.0 + scale)
}

/// `(f(h) − f(−h)) / 2h`.
pub fn central(mut f: impl FnMut(f64) -> f64, h: f64) -> f64 {
    let plus = f(h);
    (plus - f(-h)) / (2.0 * h)
}

pub fn gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|k| {
            central(
                |t| {
                    y[k] = x[k] + t;
                    let v = f(&y);
                    y[k] = x[k];
                    v
                },
                h,
            )
        })
        .collect()
}

/// Rows are outputs, columns inputs.
pub fn jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let mut y = x.to_vec();
    let mut cols = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        y[k] = x[k] + h;
        let plus = f(&y);
        y[k] = x[k] - h;
        let minus = f(&y);
        y[k] = x[k];
        cols.push(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect::<Vec<f64>>());
    }
    let rows = cols.first().map_or(0, Vec::len);
    (0..rows).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
}

pub fn gradient_vec3(f: impl Fn(&Vec3) -> f64, x: &Vec3, h: f64) -> Vec3 {
    let g = gradient(|y| f(&Vec3([y[0], y[1], y[2]])), &x.0, h);
    Vec3([g[0], g[1], g[2]])
}

/// `G` with `df = G : dX` over symmetric perturbations: off-diagonal entries
/// are perturbed in pairs and the difference quotient halved.
pub fn gradient_sym(f: impl Fn(&SymMat3) -> f64, x: &SymMat3, h: f64) -> SymMat3 {
    let g = gradient(
        |y| f(&SymMat3([y[0], y[1], y[2], y[3], y[4], y[5]])),
        &x.0,
        h,
    );
    // upper storage (00,01,02,11,12,22)
    SymMat3([g[0], g[1] / 2.0, g[2] / 2.0, g[3], g[4] / 2.0, g[5]])
}

pub fn gradient_mat(f: impl Fn(&Mat3) -> f64, x: &Mat3, h: f64) -> Mat3 {
    let flat: Vec<f64> = x.0.iter().flatten().copied().collect();
    let g = gradient(
        |y| f(&Mat3([[y[0], y[1], y[2]], [y[3], y[4], y[5]], [y[6], y[7], y[8]]])),
        &flat,
        h,
    );
    Mat3([[g[0], g[1], g[2]], [g[3], g[4], g[5]], [g[6], g[7], g[8]]])
}
