use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::scalar::Real;

/// Symmetric 3×3 tensor stored as a full matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PermTensor<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Real> PermTensor<T> {
    pub fn zero() -> Self {
        Self { m: [[T::zero(); 3]; 3] }
    }

    pub fn identity() -> Self {
        Self::diag(T::one(), T::one(), T::one())
    }

    pub fn diag(a: T, b: T, c: T) -> Self {
        let mut t = Self::zero();
        t.m[0][0] = a;
        t.m[1][1] = b;
        t.m[2][2] = c;
        t
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn max_abs(&self) -> T {
        self.m.iter().flatten().fold(T::zero(), |a, &v| a.max(v.abs()))
    }

    pub fn is_symmetric(&self, rel_tol: T) -> bool {
        let tol = rel_tol * self.max_abs();
        (0..3).all(|i| (0..3).all(|j| (self.m[i][j] - self.m[j][i]).abs() <= tol))
    }

    /// `R K Rᵀ` for a rotation (or any) matrix `r`.
    pub fn rotated(&self, r: &[[T; 3]; 3]) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = T::zero();
                for k in 0..3 {
                    for l in 0..3 {
                        s += r[i][k] * self.m[k][l] * r[j][l];
                    }
                }
                out.m[i][j] = s;
            }
        }
        out
    }

    /// Eigenvalues in descending order. Closed form, with Jacobi sweeps when
    /// the spectrum is nearly degenerate and the cubic loses precision.
    pub fn eigenvalues(&self) -> [T; 3] {
        let scale = self.max_abs();
        if scale == T::zero() {
            return [T::zero(); 3];
        }
        let scaled = *self * (T::one() / scale);
        let ev = eigenvalues_closed_form(&scaled)
            .filter(|e| e.iter().all(|v| v.is_finite()))
            .unwrap_or_else(|| eigenvalues_jacobi(&scaled, 50));
        [ev[0] * scale, ev[1] * scale, ev[2] * scale]
    }
}

impl<T: Real> Add for PermTensor<T> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] += o.m[i][j];
            }
        }
        self
    }
}

impl<T: Real> Mul<T> for PermTensor<T> {
    type Output = Self;
    fn mul(mut self, s: T) -> Self {
        for v in self.m.iter_mut().flatten() {
            *v *= s;
        }
        self
    }
}

/// Projector onto the fracture plane, `I - n nᵀ`.
pub fn transformation_tensor<T: Real>(n: Vec3<T>) -> PermTensor<T> {
    let n = n.to_array();
    let mut t = PermTensor::identity();
    for i in 0..3 {
        for j in 0..3 {
            t.m[i][j] -= n[i] * n[j];
        }
    }
    t
}

/// Largest absolute eigenvalue of a symmetric tensor.
pub fn spectral_radius<T: Real>(k: &PermTensor<T>) -> T {
    let ev = k.eigenvalues();
    ev[0].abs().max(ev[2].abs())
}

/// Trigonometric solution of the characteristic cubic. `None` when two
/// eigenvalues nearly coincide, where `acos` amplifies round-off.
pub fn eigenvalues_closed_form<T: Real>(a: &PermTensor<T>) -> Option<[T; 3]> {
    let m = &a.m;
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let mut ev = if p1 == T::zero() {
        [m[0][0], m[1][1], m[2][2]]
    } else {
        let three = T::lit(3.0);
        let q = a.trace() / three;
        let d = [m[0][0] - q, m[1][1] - q, m[2][2] - q];
        let p2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + T::lit(2.0) * p1;
        let p = (p2 / T::lit(6.0)).sqrt();
        if !(p > T::zero()) {
            return None;
        }
        let b = |i: usize, j: usize| if i == j { d[i] / p } else { m[i][j] / p };
        let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
            - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
            + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
        let r = det / T::lit(2.0);
        if r.abs() > T::one() - T::lit(1e-4) {
            return None;
        }
        let phi = r.acos() / three;
        let two = T::lit(2.0);
        let e1 = q + two * p * phi.cos();
        let e3 = q + two * p * (phi + T::lit(2.0) * T::PI() / three).cos();
        [e1, three * q - e1 - e3, e3]
    };
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    Some(ev)
}

/// Cyclic Jacobi rotations; eigenvalues in descending order.
pub fn eigenvalues_jacobi<T: Real>(a: &PermTensor<T>, max_sweeps: usize) -> [T; 3] {
    let mut m = a.m;
    for _ in 0..max_sweeps {
        let off = m[0][1].abs() + m[0][2].abs() + m[1][2].abs();
        let diag = m[0][0].abs() + m[1][1].abs() + m[2][2].abs();
        if off <= T::epsilon() * T::lit(1e-2) * diag || off == T::zero() {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if m[p][q] == T::zero() {
                continue;
            }
            let theta = (m[q][q] - m[p][p]) / (T::lit(2.0) * m[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;
            for k in 0..3 {
                let (mkp, mkq) = (m[k][p], m[k][q]);
                m[k][p] = c * mkp - s * mkq;
                m[k][q] = s * mkp + c * mkq;
            }
            for k in 0..3 {
                let (mpk, mqk) = (m[p][k], m[q][k]);
                m[p][k] = c * mpk - s * mqk;
                m[q][k] = s * mpk + c * mqk;
            }
        }
    }
    let mut ev = [m[0][0], m[1][1], m[2][2]];
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    ev
}
