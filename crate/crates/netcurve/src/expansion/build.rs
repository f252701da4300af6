//! Corner-expansion pipeline over a solved soliton background: per-arc jets
//! eta_j from the mode solver driven by the assembled Q_j, seeded by the
//! incoming curves' derivative jets (leading coefficients) and the frozen
//! junction data (boundary values), plus the assembled approximate flow
//! and its defect-order study.

use super::charts::{lifted_flow_residual_per_slice, ChartError};
use super::ljsolve::{solve_lj, EtaMode, LjError};
use super::poly::{Poly, Poly2};
use super::qassembly::{assemble_g_numeric, assemble_q, QError};
use crate::expander::{ArcEnd, SolitonNetwork};
use crate::geom::Vec2;
use crate::heat::modes::ModeGrid;
use crate::numeric::{cutoff, linear_fit};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpansionError {
    #[error(transparent)]
    Q(#[from] QError),
    #[error(transparent)]
    Lj(#[from] LjError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error("order {0} beyond supported {1}")]
    OrderTooHigh(usize, usize),
    #[error("seed list has {got} arcs, need {need}")]
    SeedMismatch { got: usize, need: usize },
}

pub const MAX_EXPANSION_ORDER: usize = 6;

/// Jets of one external arc: the background plus modes 1..=J.
#[derive(Debug, Clone)]
pub struct ArcExpansion {
    /// index of the arc in the soliton network
    pub arc: usize,
    pub grid: ModeGrid,
    pub direction: Vec2,
    /// background mode eta_0 = a s + tail
    pub background: EtaMode,
    /// eta_j for j = 1..=order
    pub modes: Vec<EtaMode>,
}

impl ArcExpansion {
    /// eta_hat(tau, s) with Borel weights chi(j^2 tau) (flat below chi_a).
    pub fn eval(&self, tau: f64, s: f64, chi_a: f64, chi_b: f64) -> Vec2 {
        let mut total = self.background.eval(&self.grid, s);
        for m in &self.modes {
            let w = cutoff((m.j * m.j) as f64 * tau, chi_a, chi_b);
            if w == 0.0 {
                continue;
            }
            total += m.eval(&self.grid, s) * (w * tau.powi(m.j as i32));
        }
        total
    }

    /// Parity of the polynomial part of mode j: even j needs an odd
    /// polynomial and vice versa.
    pub fn parity_ok(&self) -> bool {
        self.modes.iter().all(|m| {
            if m.poly.is_zero() {
                return true;
            }
            match m.poly.parity() {
                Some(is_even) => is_even == (m.j % 2 == 1),
                None => false,
            }
        })
    }

    /// Degree of the polynomial part of each mode is at most j+1 with a
    /// vanishing s^j coefficient.
    pub fn degree_ledger_ok(&self) -> bool {
        self.modes.iter().all(|m| {
            let deg_ok = m.poly.degree().map(|d| d <= m.j + 1).unwrap_or(true);
            let (cx, cy) = m.poly.coeff(m.j);
            deg_ok && cx.abs() < 1e-10 && cy.abs() < 1e-10
        })
    }
}

/// Free data of the expansion at one arc: leading coefficients a_j of
/// eta_j (from the initial curve's Taylor jet at the vertex) and boundary
/// values b_j at s = 0 (from the junction data paths; zero when the
/// complementary data are frozen at their soliton values).
#[derive(Debug, Clone, Default)]
pub struct ArcSeeds {
    pub leading: Vec<Vec2>,
    pub boundary: Vec<Vec2>,
}

impl ArcSeeds {
    pub fn zeros(order: usize) -> Self {
        ArcSeeds { leading: vec![Vec2::default(); order], boundary: vec![Vec2::default(); order] }
    }
}

#[derive(Debug, Clone)]
pub struct Expansion {
    pub order: usize,
    pub arcs: Vec<ArcExpansion>,
    /// Borel weight window
    pub chi: (f64, f64),
}

/// Build the order-J expansion over every external arc of the soliton.
/// `seeds[r]` belongs to the arc carrying fan ray r.
pub fn build_expansion(
    sol: &SolitonNetwork,
    seeds: &[ArcSeeds],
    order: usize,
) -> Result<Expansion, ExpansionError> {
    if order > MAX_EXPANSION_ORDER {
        return Err(ExpansionError::OrderTooHigh(order, MAX_EXPANSION_ORDER));
    }
    if seeds.len() != sol.ray_arcs.len() {
        return Err(ExpansionError::SeedMismatch {
            got: seeds.len(),
            need: sol.ray_arcs.len(),
        });
    }
    let mut arcs = Vec::new();
    for (ray, &(ai, end)) in sol.ray_arcs.iter().enumerate() {
        let arc = &sol.arcs[ai];
        // orient the grid so s runs from the junction (0) outward
        let (s, pts): (Vec<f64>, Vec<Vec2>) = match end {
            ArcEnd::Hi => (arc.s.clone(), arc.points.clone()),
            ArcEnd::Lo => {
                let smax = *arc.s.last().unwrap();
                let s: Vec<f64> = arc.s.iter().rev().map(|&v| smax - v).collect();
                (s, arc.points.iter().rev().copied().collect())
            }
        };
        let grid = ModeGrid { s };
        let a = arc.asymptotic.expect("ray arcs are external").normalized();
        let tail: Vec<Vec2> = grid
            .s
            .iter()
            .zip(&pts)
            .map(|(&sv, &p)| p - a * sv)
            .collect();
        let background = EtaMode {
            j: 0,
            poly: Poly2 {
                x: Poly(vec![0.0, a.x]),
                y: Poly(vec![0.0, a.y]),
            },
            tail,
        };
        let seed = &seeds[ray];
        let mut modes: Vec<EtaMode> = Vec::new();
        let mut poly_jets: Vec<Poly2<f64>> = vec![background.poly.clone()];
        let mut d1s: Vec<Vec<Vec2>> = vec![{
            let (d1, _) = background.derivative_samples(&grid);
            d1
        }];
        let mut d2s: Vec<Vec<Vec2>> = vec![{
            let (_, d2) = background.derivative_samples(&grid);
            d2
        }];
        for j in 1..=order {
            let leading = seed.leading.get(j - 1).copied().unwrap_or_default();
            let boundary = seed.boundary.get(j - 1).copied().unwrap_or_default();
            let q_poly = assemble_q(j, &poly_jets)?;
            let g = assemble_g_numeric(j, &d1s, &d2s);
            // rhs of L_j eta_j: the polynomial part is -Q_j, the sampled
            // part subtracts the polynomial evaluation (tails only)
            let rhs_poly = Poly2 { x: q_poly.x.neg(), y: q_poly.y.neg() };
            let rhs_tail_base: Vec<Vec2> = (0..grid.len())
                .map(|k| -(g[k] - q_poly.eval_f64(grid.s[k])))
                .collect();
            let mut mode = solve_lj(&grid, j, &rhs_poly, &rhs_tail_base, leading, boundary)?;
            // one refinement pass folding the background-tail perturbations
            // (1 - F_0) eta_j'' and the eta_0''-coupling into the rhs
            for _ in 0..2 {
                let (mj1, mj2) = mode.derivative_samples(&grid);
                let rhs_tail: Vec<Vec2> = (0..grid.len())
                    .map(|k| {
                        let s0 = d1s[0][k].norm_sq();
                        let f0 = 1.0 / s0;
                        rhs_tail_base[k] + mj2[k] * (1.0 - f0)
                            + d2s[0][k] * (2.0 * f0 / s0 * d1s[0][k].dot(mj1[k]))
                    })
                    .collect();
                mode = solve_lj(&grid, j, &rhs_poly, &rhs_tail, leading, boundary)?;
            }
            let (d1, d2) = mode.derivative_samples(&grid);
            poly_jets.push(mode.poly.clone());
            d1s.push(d1);
            d2s.push(d2);
            modes.push(mode);
        }
        arcs.push(ArcExpansion { arc: ai, grid, direction: a, background, modes });
    }
    Ok(Expansion { order, arcs, chi: (1.0, 2.0) })
}

/// Sup of the lifted flow residual per tau slice for one expanded arc,
/// evaluated on the arc's own s-nodes within the window.
pub fn defect_per_slice(
    exp: &Expansion,
    arc_idx: usize,
    taus: &[f64],
    s_window: (f64, f64),
) -> Result<Vec<(f64, f64)>, ExpansionError> {
    let ax = &exp.arcs[arc_idx];
    let ss: Vec<f64> = ax
        .grid
        .s
        .iter()
        .copied()
        .filter(|&s| s >= s_window.0 && s <= s_window.1)
        .collect();
    let eta: Vec<Vec<Vec2>> = taus
        .iter()
        .map(|&tau| ss.iter().map(|&s| ax.eval(tau, s, exp.chi.0, exp.chi.1)).collect())
        .collect();
    Ok(lifted_flow_residual_per_slice(taus, &ss, &eta, 1e-8)?)
}

/// Observed order in tau of the worst per-arc defect, over a log ladder.
pub fn observed_defect_order(
    exp: &Expansion,
    tau_lo: f64,
    tau_hi: f64,
    levels: usize,
    s_window: (f64, f64),
) -> Result<f64, ExpansionError> {
    let ratio = (tau_hi / tau_lo).powf(1.0 / (levels as f64 - 1.0));
    let mut lts = Vec::new();
    let mut lfs = Vec::new();
    for lvl in 0..levels {
        let tau = tau_lo * ratio.powi(lvl as i32);
        // small contiguous tau-triple around each level for the FD stencil
        let dtau = tau * 5e-3;
        let taus = [tau - dtau, tau, tau + dtau];
        let mut sup = 0.0f64;
        for arc_idx in 0..exp.arcs.len() {
            for (_, v) in defect_per_slice(exp, arc_idx, &taus, s_window)? {
                sup = sup.max(v);
            }
        }
        if sup > 1e-300 {
            lts.push(tau.ln());
            lfs.push(sup.ln());
        }
    }
    if lts.len() < 2 {
        return Ok(f64::INFINITY);
    }
    Ok(linear_fit(&lts, &lfs).0)
}
