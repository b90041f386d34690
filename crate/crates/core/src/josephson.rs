//! Inductively coupled Josephson charge qubits driven by
//! `H = −(α/2)(σx⊗I + I⊗σx) + α²·σy⊗σy` (energies in units of `E_L`,
//! time in `1/E_L`, ħ = 1), and the single-pulse gates `e^{iHt}` it makes.
//!
//! `H` is traceless, so `e^{iHt}` has unit determinant and its magic-basis
//! trace is real: the whole trajectory stays on the base plane `c3 = 0`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariants::{local_invariants, trace_invariants, LocalInvariants, TraceInvariants};
use crate::matrix::{Hermitian4, Pauli};
use crate::weyl::{weyl_coordinates, WeylPoint};

/// Above this coupling ratio a solution is flagged as hard to realize.
pub const FEASIBLE_ALPHA_MAX: f64 = 1.25;
/// Agreement required between a reported solution and its target.
pub const REACH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JosephsonParams {
    /// `E_J / E_L`
    pub alpha: f64,
}

impl JosephsonParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { alpha })
    }
}

/// `x = cos(α²t)`, `y = cos(α·sqrt(α²+1)·t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigPair {
    pub x: f64,
    pub y: f64,
}

impl TrigPair {
    pub fn at(alpha: f64, t: f64) -> Self {
        let a2 = alpha * alpha;
        Self { x: (a2 * t).cos(), y: ((a2 + 1.0).sqrt() * alpha * t).cos() }
    }
}

pub fn hamiltonian(p: &JosephsonParams) -> Hermitian4 {
    let a = p.alpha;
    let x1 = crate::gates::on_wire(crate::gates::Wire::Top, &Pauli::X.unitary());
    let x2 = crate::gates::on_wire(crate::gates::Wire::Bottom, &Pauli::X.unitary());
    let m = (x1.matrix() + x2.matrix()) * crate::matrix::c(-a / 2.0, 0.0)
        + Pauli::Y.pair().matrix() * crate::matrix::c(a * a, 0.0);
    Hermitian4::new(m).expect("Hamiltonian is Hermitian by construction")
}

/// Closed-form invariants of `e^{iHt}` in the trace normalization:
///
/// `g1 = 4/(1+α²)·(α²(x²+y²−1) + x²)`, `g2 = 0`,
/// `g3 = 4/(1+α²)·(3α² − 1 − 4α²y² + 8α²x²y² + 4x² − 4α²x²)`.
pub fn closed_form_trace(p: &JosephsonParams, t: f64) -> TraceInvariants {
    let a2 = p.alpha * p.alpha;
    let TrigPair { x, y } = TrigPair::at(p.alpha, t);
    let (x2, y2) = (x * x, y * y);
    let k = 4.0 / (1.0 + a2);
    TraceInvariants::new(
        k * (a2 * (x2 + y2 - 1.0) + x2),
        0.0,
        k * (3.0 * a2 - 1.0 - 4.0 * y2 * a2 + 8.0 * a2 * x2 * y2 + 4.0 * x2 - 4.0 * x2 * a2),
    )
}

/// [`closed_form_trace`] converted to [`LocalInvariants`].
pub fn invariants_closed_form(p: &JosephsonParams, t: f64) -> LocalInvariants {
    closed_form_trace(p, t).to_local()
}

/// Invariants of `e^{iHt}` computed from the matrix.
pub fn evolve_invariants(p: &JosephsonParams, t: f64) -> Result<LocalInvariants> {
    local_invariants(&hamiltonian(p).exp_i(t))
}

/// Trace-normalized counterpart of [`evolve_invariants`].
pub fn evolve_trace_invariants(p: &JosephsonParams, t: f64) -> Result<TraceInvariants> {
    trace_invariants(&hamiltonian(p).exp_i(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub inv: LocalInvariants,
    pub c: WeylPoint,
}

/// `steps` equally spaced samples of `e^{iHt}` on `[0, t_max]`.
pub fn trajectory(p: &JosephsonParams, t_max: f64, steps: usize) -> Result<Vec<TrajectorySample>> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 steps, got {steps}")));
    }
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::InvalidParameter(format!("t_max must be non-negative, got {t_max}")));
    }
    let h = hamiltonian(p);
    (0..steps)
        .map(|k| {
            let t = t_max * k as f64 / (steps - 1) as f64;
            let u = h.exp_i(t);
            Ok(TrajectorySample { t, inv: local_invariants(&u)?, c: weyl_coordinates(&u)? })
        })
        .collect()
}

pub const TRAJECTORY_CSV_HEADER: &str = "t,g1,g2,g3,c1,c2,c3";

pub fn trajectory_csv(samples: &[TrajectorySample]) -> String {
    use crate::json::fmt_g17;
    let mut out = String::from(TRAJECTORY_CSV_HEADER);
    out.push('\n');
    for s in samples {
        let row = [s.t, s.inv.g1, s.inv.g2, s.inv.g3, s.c.c1, s.c.c2, s.c.c3].map(fmt_g17);
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetTag {
    #[serde(rename = "B")]
    B,
    #[serde(rename = "CNOT")]
    Cnot,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReachSolution {
    pub alpha: f64,
    pub t: f64,
    /// Branch index for B solutions (`α²t = (2n+1)π/8`); `None` otherwise.
    pub n: Option<u32>,
    pub target_tag: TargetTag,
    /// Largest invariant mismatch at `(α, t)`.
    pub residual: f64,
    /// `α` exceeds [`FEASIBLE_ALPHA_MAX`].
    pub alpha_warning: bool,
}

const B_ALPHA_GRID: usize = 20_000;
const B_ALPHA_RANGE: (f64, f64) = (0.05, 20.0);

/// Every coupling that produces the B class on branch `n`, i.e. the roots of
/// `sin²(sqrt(1 + α⁻²)·k) = (1 + α²)/α²·cos²k` with `k = (2n+1)π/8`, and
/// the corresponding times `t = k/α²`. Branches `0..=n_max`, sorted by time.
pub fn solve_b_branches(n_max: u32) -> Vec<ReachSolution> {
    let (lo, hi) = B_ALPHA_RANGE;
    let grid: Vec<f64> = (0..B_ALPHA_GRID)
        .map(|i| lo * (hi / lo).powf(i as f64 / (B_ALPHA_GRID - 1) as f64))
        .collect();
    let mut out = Vec::new();
    for n in 0..=n_max {
        let k = (2 * n + 1) as f64 * PI / 8.0;
        let x2 = k.cos().powi(2);
        let f = |a: f64| ((1.0 + a.powi(-2)).sqrt() * k).sin().powi(2) - (1.0 + a * a) / (a * a) * x2;
        let mut prev = f(grid[0]);
        for w in grid.windows(2) {
            let next = f(w[1]);
            if prev == 0.0 || prev.signum() != next.signum() {
                let alpha = bisect(&f, w[0], w[1], 1e-10);
                let y2 = 1.0 - (1.0 + alpha * alpha) / (alpha * alpha) * x2;
                if (0.0..=1.0).contains(&y2) {
                    let p = JosephsonParams { alpha };
                    let t = k / (alpha * alpha);
                    out.push(ReachSolution {
                        alpha,
                        t,
                        n: Some(n),
                        target_tag: TargetTag::B,
                        residual: invariants_closed_form(&p, t).max_diff(&LocalInvariants::B),
                        alpha_warning: alpha > FEASIBLE_ALPHA_MAX,
                    });
                }
            }
            prev = next;
        }
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.alpha.total_cmp(&b.alpha)));
    out
}

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Grid resolution of [`solve_target_class`].
#[derive(Debug, Clone, Copy)]
pub struct ScanGrid {
    pub alpha_points: usize,
    pub t_points: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self { alpha_points: 600, t_points: 4000 }
    }
}

pub const DEFAULT_ALPHA_RANGE: (f64, f64) = (0.05, 3.0);
pub const DEFAULT_T_RANGE: (f64, f64) = (0.0, 12.0);

/// Shortest pulse `e^{iHt}` with `(α, t)` in the given box whose class has
/// invariants `target`. Ties in `t` (within 1e−9) go to the smaller `α`.
pub fn solve_target_class(
    target: &LocalInvariants,
    alpha_range: (f64, f64),
    t_range: (f64, f64),
) -> Result<ReachSolution> {
    solve_target_class_on(target, alpha_range, t_range, ScanGrid::default())
}

pub fn solve_target_class_on(
    target: &LocalInvariants,
    (a_lo, a_hi): (f64, f64),
    (t_lo, t_hi): (f64, f64),
    grid: ScanGrid,
) -> Result<ReachSolution> {
    if !(a_lo > 0.0 && a_hi >= a_lo && t_lo >= 0.0 && t_hi >= t_lo) || !(a_hi.is_finite() && t_hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "empty or invalid search box α ∈ [{a_lo}, {a_hi}], t ∈ [{t_lo}, {t_hi}]"
        )));
    }
    if grid.alpha_points < 2 || grid.t_points < 3 {
        return Err(Error::InvalidParameter("scan grid too coarse".into()));
    }
    let tag = if target.approx_eq(&LocalInvariants::B, 1e-12) {
        TargetTag::B
    } else if target.approx_eq(&LocalInvariants::CNOT, 1e-12) {
        TargetTag::Cnot
    } else {
        TargetTag::Custom
    };
    let residual = |a: f64, t: f64| invariants_closed_form(&JosephsonParams { alpha: a }, t).max_diff(target);
    let solution = |alpha: f64, t: f64, residual: f64| ReachSolution {
        alpha,
        t,
        n: None,
        target_tag: tag,
        residual,
        alpha_warning: alpha > FEASIBLE_ALPHA_MAX,
    };

    let alphas: Vec<f64> = (0..grid.alpha_points)
        .map(|i| a_lo + (a_hi - a_lo) * i as f64 / (grid.alpha_points - 1) as f64)
        .collect();
    let times: Vec<f64> = (0..grid.t_points)
        .map(|j| t_lo + (t_hi - t_lo) * j as f64 / (grid.t_points - 1) as f64)
        .collect();

    // The lower time edge: the identity class sits on the whole line t = 0.
    if let Some(&a) = alphas.iter().find(|&&a| residual(a, t_lo) < REACH_TOL) {
        return Ok(solution(a, t_lo, residual(a, t_lo)));
    }

    // Newton runs on the trace-normalized pair (tr m, g3), where roots are
    // simple; tr m is only fixed up to sign by the target.
    if target.g2.abs() > REACH_TOL || target.g1 < -REACH_TOL {
        return Err(Error::NotFound { best_residual: best_grid_residual(&alphas, &times, &residual) });
    }
    let root = target.g1.max(0.0).sqrt() * 2.0;
    let mut best: Option<ReachSolution> = None;
    let mut best_residual = f64::INFINITY;
    for tr_target in [root, -root] {
        let goal = Vector2::new(tr_target, target.g3);
        let field = |a: f64, t: f64| {
            let g = closed_form_trace(&JosephsonParams { alpha: a }, t);
            Vector2::new(g.g1, g.g3) - goal
        };
        let rows: Vec<Vec<f64>> = alphas.iter().map(|&a| times.iter().map(|&t| field(a, t).norm()).collect()).collect();
        for i in 0..alphas.len() {
            for j in 0..times.len() {
                let v = rows[i][j];
                best_residual = best_residual.min(v);
                if !is_local_min(&rows, i, j) {
                    continue;
                }
                let Some((a, t)) = newton2(&field, alphas[i], times[j]) else { continue };
                if !(a_lo..=a_hi).contains(&a) || !(t_lo..=t_hi).contains(&t) {
                    continue;
                }
                let r = residual(a, t);
                best_residual = best_residual.min(r);
                if r >= REACH_TOL {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some(b) => t < b.t - 1e-9 || ((t - b.t).abs() <= 1e-9 && a < b.alpha),
                };
                if better {
                    best = Some(solution(a, t, r));
                }
            }
        }
    }
    best.ok_or(Error::NotFound { best_residual })
}

fn best_grid_residual(alphas: &[f64], times: &[f64], residual: &dyn Fn(f64, f64) -> f64) -> f64 {
    alphas
        .iter()
        .flat_map(|&a| times.iter().map(move |&t| (a, t)))
        .map(|(a, t)| residual(a, t))
        .fold(f64::INFINITY, f64::min)
}

fn is_local_min(rows: &[Vec<f64>], i: usize, j: usize) -> bool {
    let v = rows[i][j];
    for di in -1i64..=1 {
        for dj in -1i64..=1 {
            if di == 0 && dj == 0 {
                continue;
            }
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if ni < 0 || nj < 0 || ni as usize >= rows.len() || nj as usize >= rows[0].len() {
                continue;
            }
            if rows[ni as usize][nj as usize] < v {
                return false;
            }
        }
    }
    true
}

/// Damped Newton on a 2×2 system with a central-difference Jacobian.
fn newton2(f: &dyn Fn(f64, f64) -> Vector2<f64>, a0: f64, t0: f64) -> Option<(f64, f64)> {
    const H: f64 = 1e-7;
    let (mut a, mut t) = (a0, t0);
    let mut r = f(a, t);
    for _ in 0..60 {
        if r.norm() < 1e-14 {
            break;
        }
        let ja = (f(a + H, t) - f(a - H, t)) / (2.0 * H);
        let jt = (f(a, t + H) - f(a, t - H)) / (2.0 * H);
        let jac = Matrix2::from_columns(&[ja, jt]);
        let step = jac.lu().solve(&(-r))?;
        let mut lambda = 1.0;
        loop {
            let (na, nt) = (a + lambda * step[0], t + lambda * step[1]);
            let nr = f(na, nt);
            if nr.norm() < r.norm() {
                a = na;
                t = nt;
                r = nr;
                break;
            }
            lambda /= 2.0;
            if lambda < 1e-6 {
                return if r.norm() < 1e-9 { Some((a, t)) } else { None };
            }
        }
    }
    Some((a, t))
}
