//! Weyl-chamber coordinates and the Cartan (KAK) decomposition
//! `U = e^{iφ}·(k1_top⊗k1_bottom)·A(c)·(k2_top⊗k2_bottom)` with
//! `A(c) = e^{c1(i/2)σxσx}·e^{c2(i/2)σyσy}·e^{c3(i/2)σzσz}`.
//!
//! The chamber is the tetrahedron `0 ≤ c3 ≤ c2 ≤ min(c1, π − c1)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use log::debug;
use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{from_magic, to_magic};
use crate::matrix::{
    c, kron, special_unitarize, wrap_angle, Hermitian4, Mat2, Mat4, Pauli, Unitary2, Unitary4, C64,
    ONE,
};

/// Slack used when testing chamber membership of computed coordinates.
pub const CHAMBER_TOL: f64 = 1e-9;

/// Below this magnitude a negative `c3` is treated as zero and the point is
/// not mirrored across `c1 = π/2`. Keeps base-plane points continuous.
const BASE_PLANE_SNAP: f64 = 1e-9;

/// Largest tolerated off-diagonal norm after diagonalizing the Gram matrix.
const DIAG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct WeylPoint {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl From<[f64; 3]> for WeylPoint {
    fn from([c1, c2, c3]: [f64; 3]) -> Self {
        Self { c1, c2, c3 }
    }
}

impl From<WeylPoint> for [f64; 3] {
    fn from(p: WeylPoint) -> Self {
        p.coords()
    }
}

impl WeylPoint {
    pub const fn new(c1: f64, c2: f64, c3: f64) -> Self {
        Self { c1, c2, c3 }
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }

    pub fn in_chamber(&self, tol: f64) -> bool {
        let Self { c1, c2, c3 } = *self;
        c3 >= -tol && c2 >= c3 - tol && c2 <= c1.min(PI - c1) + tol && (-tol..=PI + tol).contains(&c1)
    }

    /// Largest coordinate difference.
    pub fn max_diff(&self, other: &WeylPoint) -> f64 {
        (self.c1 - other.c1)
            .abs()
            .max((self.c2 - other.c2).abs())
            .max((self.c3 - other.c3).abs())
    }

    /// The chamber representative of the class of `A(self)`.
    pub fn canonicalize(&self) -> WeylPoint {
        let mut frame = Frame::bare(self.coords());
        frame.canonicalize();
        WeylPoint::from(frame.c)
    }
}

/// `A(c)`, built as the product of the three commuting exponentials.
pub fn canonical_gate(p: &WeylPoint) -> Unitary4 {
    let factor = |angle: f64, axis: Pauli| -> Mat4 {
        let (s, co) = (angle / 2.0).sin_cos();
        Mat4::identity() * c(co, 0.0) + axis.pair().matrix() * c(0.0, s)
    };
    Unitary4::new_unchecked(factor(p.c1, Pauli::X) * factor(p.c2, Pauli::Y) * factor(p.c3, Pauli::Z))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KakDecomposition {
    pub phase: f64,
    pub k1_top: Unitary2,
    pub k1_bottom: Unitary2,
    pub k2_top: Unitary2,
    pub k2_bottom: Unitary2,
    pub c: WeylPoint,
}

impl KakDecomposition {
    pub fn k1(&self) -> Unitary4 {
        kron(&self.k1_top, &self.k1_bottom)
    }

    pub fn k2(&self) -> Unitary4 {
        kron(&self.k2_top, &self.k2_bottom)
    }

    pub fn reconstruct(&self) -> Unitary4 {
        (self.k1() * canonical_gate(&self.c) * self.k2()).with_global_phase(self.phase)
    }
}

/// Running factorization `e^{iφ}(a1⊗b1)·A(c)·(a2⊗b2)` that the Weyl-group
/// moves keep exact while they push `c` into the chamber.
struct Frame {
    phase: f64,
    a1: Mat2,
    b1: Mat2,
    a2: Mat2,
    b2: Mat2,
    c: [f64; 3],
}

const AXES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

impl Frame {
    fn bare(c: [f64; 3]) -> Self {
        let id = Mat2::identity();
        Frame { phase: 0.0, a1: id, b1: id, a2: id, b2: id, c }
    }

    /// `c_i → c_i − nπ`, using `A(nπ e_i) = iⁿ (σσ)ⁿ`.
    fn shift(&mut self, i: usize, n: i64) {
        if n == 0 {
            return;
        }
        self.c[i] -= n as f64 * PI;
        if n.rem_euclid(2) == 1 {
            let s = AXES[i].matrix();
            self.a2 = s * self.a2;
            self.b2 = s * self.b2;
        }
        self.phase += n as f64 * PI / 2.0;
    }

    /// Negates `c_i` and `c_j` by conjugating with σ_k on the top wire.
    fn flip(&mut self, i: usize, j: usize) {
        let k = 3 - i - j;
        let s = AXES[k].matrix();
        self.a1 *= s;
        self.a2 = s * self.a2;
        self.c[i] = -self.c[i];
        self.c[j] = -self.c[j];
    }

    /// Exchanges `c_i` and `c_j` by conjugating both wires with
    /// `(σ_i + σ_j)/√2`.
    fn swap(&mut self, i: usize, j: usize) {
        let v = (AXES[i].matrix() + AXES[j].matrix()) * c(FRAC_1_SQRT_2, 0.0);
        self.a1 *= v;
        self.b1 *= v;
        self.a2 = v * self.a2;
        self.b2 = v * self.b2;
        self.c.swap(i, j);
    }

    fn canonicalize(&mut self) {
        for i in 0..3 {
            let n = (self.c[i] / PI).round() as i64;
            self.shift(i, n);
        }
        // Order by magnitude, largest first.
        for (i, j) in [(0, 1), (1, 2), (0, 1)] {
            if self.c[i].abs() < self.c[j].abs() {
                self.swap(i, j);
            }
        }
        if self.c[0] < 0.0 {
            self.flip(0, 2);
        }
        if self.c[1] < 0.0 {
            self.flip(1, 2);
        }
        if self.c[2] < -BASE_PLANE_SNAP {
            // (c1, c2, −|c3|) ~ (π − c1, c2, |c3|)
            self.shift(0, 1);
            self.flip(0, 2);
        }
    }
}

/// Joint Jacobi diagonalization of two commuting real symmetric matrices.
/// Returns the orthogonal `P` with `Pᵀ·a·P` and `Pᵀ·b·P` both diagonal.
fn joint_diagonalize(a: &Matrix4<f64>, b: &Matrix4<f64>) -> Matrix4<f64> {
    let mut mats = [*a, *b];
    let mut p = Matrix4::<f64>::identity();
    let scale = a.norm() + b.norm();
    for _sweep in 0..60 {
        let off: f64 = mats
            .iter()
            .map(|m| (0..4).flat_map(|r| (0..4).map(move |col| (r, col))).filter(|(r, col)| r != col).map(|(r, col)| m[(r, col)].powi(2)).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for pi in 0..3 {
            for qi in pi + 1..4 {
                // Principal eigenvector of Σ h hᵀ, h = (m_pp − m_qq, 2 m_pq),
                // gives (cos 2θ, sin 2θ) of the best common rotation.
                let mut g = Matrix2::<f64>::zeros();
                for m in &mats {
                    let h = nalgebra::Vector2::new(m[(pi, pi)] - m[(qi, qi)], 2.0 * m[(pi, qi)]);
                    g += h * h.transpose();
                }
                if g[(0, 1)].abs() <= f64::EPSILON * 1e-3 * (g[(0, 0)] + g[(1, 1)]) && g[(1, 1)] <= g[(0, 0)] {
                    continue;
                }
                let eig = nalgebra::SymmetricEigen::new(g);
                let k = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
                let mut x = eig.eigenvectors[(0, k)];
                let mut y = eig.eigenvectors[(1, k)];
                if x < 0.0 {
                    x = -x;
                    y = -y;
                }
                let cs = ((1.0 + x) / 2.0).sqrt();
                if cs == 0.0 {
                    continue;
                }
                let sn = y / (2.0 * cs);
                if sn.abs() < 1e-300 {
                    continue;
                }
                let mut r = Matrix4::<f64>::identity();
                r[(pi, pi)] = cs;
                r[(qi, qi)] = cs;
                r[(pi, qi)] = -sn;
                r[(qi, pi)] = sn;
                for m in mats.iter_mut() {
                    *m = r.transpose() * *m * r;
                }
                p *= r;
            }
        }
    }
    p
}

/// Real orthogonal `P` (det +1) and phases `λ` (summing to exactly zero)
/// with `m = P·diag(e^{2iλ})·Pᵀ`.
fn diagonalize_gram(m: &Mat4) -> Result<(Matrix4<f64>, [f64; 4])> {
    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    let re = (re + re.transpose()) * 0.5;
    let im = (im + im.transpose()) * 0.5;
    let mut p = joint_diagonalize(&re, &im);
    if p.determinant() < 0.0 {
        p.column_mut(0).neg_mut();
    }
    let pc = p.map(|x| c(x, 0.0));
    let d = pc.transpose() * m * pc;
    let off = (0..4)
        .flat_map(|r| (0..4).map(move |col| (r, col)))
        .filter(|(r, col)| r != col)
        .map(|(r, col)| d[(r, col)].norm_sqr())
        .sum::<f64>()
        .sqrt();
    if off > DIAG_TOL {
        return Err(Error::Decomposition(format!(
            "could not find a real eigenbasis of the magic Gram matrix (off-diagonal {off:.3e})"
        )));
    }
    let mut lambda: [f64; 4] = std::array::from_fn(|k| d[(k, k)].arg() / 2.0);
    // Σλ ≡ 0 (mod π); shift individual phases by π until the sum is 0.
    let mut n = (lambda.iter().sum::<f64>() / PI).round() as i64;
    while n != 0 {
        let k = if n > 0 {
            (0..4).max_by(|&i, &j| lambda[i].total_cmp(&lambda[j])).unwrap()
        } else {
            (0..4).min_by(|&i, &j| lambda[i].total_cmp(&lambda[j])).unwrap()
        };
        lambda[k] -= n.signum() as f64 * PI;
        n -= n.signum();
    }
    Ok((p, lambda))
}

/// Splits `k ≈ a⊗b` into its factors, `det b = 1`.
pub fn factor_local(k: &Mat4) -> Result<(Unitary2, Unitary2)> {
    let block = |i: usize, kk: usize| Mat2::from_fn(|j, l| k[(2 * i + j, 2 * kk + l)]);
    let (i, kk) = [(0, 0), (0, 1), (1, 0), (1, 1)]
        .into_iter()
        .max_by(|&(i, a), &(j, b)| block(i, a).norm().total_cmp(&block(j, b).norm()))
        .unwrap();
    let raw = block(i, kk);
    let det = raw[(0, 0)] * raw[(1, 1)] - raw[(0, 1)] * raw[(1, 0)];
    let b = raw / det.sqrt();
    let a = Mat2::from_fn(|r, col| (b.adjoint() * block(r, col)).trace() / 2.0);
    let recon = crate::matrix::kron_raw(&a, &b);
    let err = (recon - k).norm();
    if err > 1e-8 {
        return Err(Error::Decomposition(format!("local factor is not a tensor product (error {err:.3e})")));
    }
    Ok((Unitary2::new_unchecked(a), Unitary2::new_unchecked(b)))
}

fn positive_first_entry(u: &Unitary2) -> bool {
    let z = u.matrix()[(0, 0)];
    z.re > 0.0 || (z.re == 0.0 && z.im >= 0.0)
}

/// Cartan decomposition of `u`.
pub fn kak(u: &Unitary4) -> Result<KakDecomposition> {
    let (v, phase0) = special_unitarize(u);
    let up = to_magic(&v);
    let gram = up.transpose() * up;
    let (p, lambda) = diagonalize_gram(&gram)?;
    let pc = p.map(|x| c(x, 0.0));
    let inv_sqrt_d = Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|k, _| C64::from_polar(1.0, -lambda[k])));
    // up = O1·diag(e^{iλ})·Pᵀ with O1 real orthogonal.
    let o1 = up * pc * inv_sqrt_d;
    let k1 = from_magic(&o1);
    let k2 = from_magic(&pc.transpose());
    let (a1, b1) = factor_local(&k1)?;
    let (a2, b2) = factor_local(&k2)?;

    let c_raw = [lambda[0] + lambda[1], lambda[1] + lambda[3], lambda[0] + lambda[3]];
    let mut frame = Frame {
        phase: phase0,
        a1: *a1.matrix(),
        b1: *b1.matrix(),
        a2: *a2.matrix(),
        b2: *b2.matrix(),
        c: c_raw,
    };
    frame.canonicalize();

    let mut phase = frame.phase;
    let mut special = |m: Mat2| {
        let (s, ph) = Unitary2::new_unchecked(m).to_special();
        phase += ph;
        s
    };
    let mut k1_top = special(frame.a1);
    let mut k1_bottom = special(frame.b1);
    let mut k2_top = special(frame.a2);
    let mut k2_bottom = special(frame.b2);
    // (−a)⊗(−b) = a⊗b: pick the sign with a non-negative leading entry.
    if !positive_first_entry(&k1_top) {
        k1_top = k1_top.scale(-ONE);
        k1_bottom = k1_bottom.scale(-ONE);
    }
    if !positive_first_entry(&k2_top) {
        k2_top = k2_top.scale(-ONE);
        k2_bottom = k2_bottom.scale(-ONE);
    }
    let decomposition = KakDecomposition {
        phase: wrap_angle(phase),
        k1_top,
        k1_bottom,
        k2_top,
        k2_bottom,
        c: WeylPoint::from(frame.c),
    };
    debug!("kak: c = {:?}, phase = {}", decomposition.c, decomposition.phase);
    Ok(decomposition)
}

/// Chamber coordinates of the local-equivalence class of `u`.
pub fn weyl_coordinates(u: &Unitary4) -> Result<WeylPoint> {
    let (v, _) = special_unitarize(u);
    let up = to_magic(&v);
    let (_, lambda) = diagonalize_gram(&(up.transpose() * up))?;
    Ok(WeylPoint::new(lambda[0] + lambda[1], lambda[1] + lambda[3], lambda[0] + lambda[3]).canonicalize())
}

/// Smallest `t ∈ (0, t_max]` at which `e^{iht}` lies in the class `target`,
/// to within 1e−6 in chamber coordinates.
pub fn single_switch_reach(h: &Hermitian4, target: &WeylPoint, t_max: f64) -> Option<f64> {
    const MATCH_TOL: f64 = 1e-6;
    const POINTS_PER_PERIOD: f64 = 2000.0;
    if t_max.is_nan() || t_max <= 0.0 {
        return None;
    }
    let target = target.canonicalize();
    let ev = h.eigenvalues();
    let spread = ev[3] - ev[0];
    if spread <= 0.0 {
        return None;
    }
    let dt = (2.0 * PI / spread) / POINTS_PER_PERIOD;
    let dist = |t: f64| -> f64 {
        weyl_coordinates(&h.exp_i(t)).map_or(f64::INFINITY, |p| p.max_diff(&target))
    };
    let steps = (t_max / dt).ceil() as usize;
    let grid = |k: usize| (k as f64 * dt).min(t_max);
    let mut prev = dist(0.0);
    let mut cur = dist(grid(1));
    for k in 1..=steps {
        let next = if k < steps { dist(grid(k + 1)) } else { f64::INFINITY };
        if cur <= prev && cur <= next {
            let lo = grid(k - 1);
            let hi = if k < steps { grid(k + 1) } else { t_max };
            let (t, d) = golden_min(&dist, lo, hi, 1e-12);
            if d < MATCH_TOL && t > 0.0 {
                return Some(t);
            }
        }
        prev = cur;
        cur = next;
    }
    None
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
pub(crate) fn golden_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    let t = 0.5 * (lo + hi);
    let ft = f(t);
    [(t, ft), (x1, f1), (x2, f2)]
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}
