//! Mode solves for the expansion operators L_j u = u'' + (s d_s - (j+1)) u:
//! exact polynomial parts by undetermined coefficients, sampled decaying
//! correctors by the discrete two-point solve, intertwining d_s L_j =
//! L_{j-1} d_s available as a check.

use super::poly::{solve_poly2_ring, Poly2};
use crate::geom::Vec2;
use crate::heat::modes::{solve_discrete, ModeError, ModeGrid};
use crate::numeric::interior_stencil;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LjError {
    #[error("polynomial solve: {0}")]
    Poly(String),
    #[error(transparent)]
    Mode(#[from] ModeError),
}

/// One expansion mode eta_j: exact polynomial part of degree <= j+1 with
/// vanishing s^j coefficient, plus a sampled decaying corrector.
#[derive(Debug, Clone)]
pub struct EtaMode {
    pub j: usize,
    pub poly: Poly2<f64>,
    pub tail: Vec<Vec2>,
}

impl EtaMode {
    pub fn eval(&self, grid: &ModeGrid, s: f64) -> Vec2 {
        self.poly.eval_f64(s) + interp_vec(&grid.s, &self.tail, s)
    }

    pub fn value_at_zero(&self) -> Vec2 {
        self.poly.eval_f64(0.0) + self.tail.first().copied().unwrap_or_default()
    }

    /// total first/second derivative samples on the grid
    pub fn derivative_samples(&self, grid: &ModeGrid) -> (Vec<Vec2>, Vec<Vec2>) {
        let dp = self.poly.derivative();
        let ddp = dp.derivative();
        let tail_d = sample_d1(grid, &self.tail);
        let tail_dd = sample_d2(grid, &self.tail);
        let n = grid.len();
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        for i in 0..n {
            d1.push(dp.eval_f64(grid.s[i]) + tail_d[i]);
            d2.push(ddp.eval_f64(grid.s[i]) + tail_dd[i]);
        }
        (d1, d2)
    }
}

pub fn interp_vec(xs: &[f64], ys: &[Vec2], x: f64) -> Vec2 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let mut lo = 0;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if xs[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] * (1.0 - t) + ys[hi] * t
}

pub fn sample_d1(grid: &ModeGrid, y: &[Vec2]) -> Vec<Vec2> {
    let n = grid.len();
    let mut d = vec![Vec2::default(); n];
    for i in 1..n - 1 {
        let (w, _) = interior_stencil(grid.s[i] - grid.s[i - 1], grid.s[i + 1] - grid.s[i]);
        d[i] = y[i - 1] * w[0] + y[i] * w[1] + y[i + 1] * w[2];
    }
    d[0] = (y[1] - y[0]) / (grid.s[1] - grid.s[0]);
    d[n - 1] = (y[n - 1] - y[n - 2]) / (grid.s[n - 1] - grid.s[n - 2]);
    d
}

pub fn sample_d2(grid: &ModeGrid, y: &[Vec2]) -> Vec<Vec2> {
    let n = grid.len();
    let mut d = vec![Vec2::default(); n];
    for i in 1..n - 1 {
        let (_, w) = interior_stencil(grid.s[i] - grid.s[i - 1], grid.s[i + 1] - grid.s[i]);
        d[i] = y[i - 1] * w[0] + y[i] * w[1] + y[i + 1] * w[2];
    }
    d[0] = d[1];
    d[n - 1] = d[n - 2];
    d
}

/// Solve L_j eta_j = rhs with prescribed leading coefficient (of s^{j+1})
/// and boundary value eta_j(0). The polynomial part is exact with a zero
/// s^j coefficient; the corrector solves the discrete system with the
/// boundary mismatch assigned to the decaying homogeneous solution.
pub fn solve_lj(
    grid: &ModeGrid,
    j: usize,
    rhs_poly: &Poly2<f64>,
    rhs_tail: &[Vec2],
    leading: Vec2,
    boundary: Vec2,
) -> Result<EtaMode, LjError> {
    let lambda = j + 1;
    let poly = solve_poly2_ring(lambda, rhs_poly, (leading.x, leading.y))
        .map_err(LjError::Poly)?;
    let p0 = poly.eval_f64(0.0);
    let rx: Vec<f64> = rhs_tail.iter().map(|v| v.x).collect();
    let ry: Vec<f64> = rhs_tail.iter().map(|v| v.y).collect();
    let tx = solve_discrete(grid, lambda as f64, &rx, boundary.x - p0.x, 0.0)?;
    let ty = solve_discrete(grid, lambda as f64, &ry, boundary.y - p0.y, 0.0)?;
    let tail = tx
        .into_iter()
        .zip(ty)
        .map(|(x, y)| Vec2::new(x, y))
        .collect();
    Ok(EtaMode { j, poly, tail })
}

/// Max-norm discrete residual of L_j applied to the mode's tail against the
/// sampled right-hand side (the polynomial part is exact by construction).
pub fn tail_residual(grid: &ModeGrid, mode: &EtaMode, rhs_tail: &[Vec2]) -> f64 {
    let lambda = (mode.j + 1) as f64;
    let rx: Vec<f64> = mode.tail.iter().map(|v| v.x).collect();
    let ry: Vec<f64> = mode.tail.iter().map(|v| v.y).collect();
    let bx: Vec<f64> = rhs_tail.iter().map(|v| v.x).collect();
    let by: Vec<f64> = rhs_tail.iter().map(|v| v.y).collect();
    let resx = crate::heat::modes::discrete_residual(grid, lambda, &rx, &bx);
    let resy = crate::heat::modes::discrete_residual(grid, lambda, &ry, &by);
    resx.iter()
        .chain(resy.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()))
}

/// Discrete intertwining check: apply d_s after L_j and L_{j-1} after d_s to
/// a smooth sample and return the sup difference on interior nodes. Both
/// sides are discretized second-order, so the difference vanishes at
/// discretization order.
pub fn intertwining_defect<F: Fn(f64) -> f64>(grid: &ModeGrid, j: usize, f: F) -> f64 {
    let n = grid.len();
    let y: Vec<f64> = grid.s.iter().map(|&s| f(s)).collect();
    let lambda = (j + 1) as f64;
    // L_j y on interior nodes
    let zero = vec![0.0; n];
    let lj = crate::heat::modes::discrete_residual(grid, lambda, &y, &zero);
    // d_s (L_j y) via centered differences of the interior values
    let mut lhs = vec![0.0; n];
    for i in 2..n - 2 {
        let (w, _) = interior_stencil(grid.s[i] - grid.s[i - 1], grid.s[i + 1] - grid.s[i]);
        lhs[i] = lj[i - 1] * w[0] + lj[i] * w[1] + lj[i + 1] * w[2];
    }
    // L_{j-1} (d_s y)
    let mut dy = vec![0.0; n];
    for i in 1..n - 1 {
        let (w, _) = interior_stencil(grid.s[i] - grid.s[i - 1], grid.s[i + 1] - grid.s[i]);
        dy[i] = y[i - 1] * w[0] + y[i] * w[1] + y[i + 1] * w[2];
    }
    dy[0] = (y[1] - y[0]) / (grid.s[1] - grid.s[0]);
    dy[n - 1] = (y[n - 1] - y[n - 2]) / (grid.s[n - 1] - grid.s[n - 2]);
    let rhs = crate::heat::modes::discrete_residual(grid, lambda - 1.0, &dy, &zero);
    let mut worst = 0.0f64;
    for i in 2..n - 2 {
        worst = worst.max((lhs[i] - rhs[i]).abs());
    }
    worst
}
