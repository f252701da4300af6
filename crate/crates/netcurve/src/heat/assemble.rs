//! Assembly of the approximate solution v for the mixed problem: corner
//! modes seeded by the data jets, Borel-style truncation weights, a spatial
//! cutoff splicing the corner series into the Taylor heat flow of the
//! initial data, and the semi-analytic defect field (d_t - d_x^2) v.

use super::modes::{
    decaying_homogeneous, interp_linear, mode_v0, ModeError, ModeGrid,
};
use crate::numeric::{cutoff, cutoff_d1, cutoff_d2, cutoff_dn, erfc, linear_fit};
use thiserror::Error;

const SQRT_PI: f64 = 1.772453850905516;

/// Highest supported expansion order.
pub const MAX_ORDER: usize = 16;

#[derive(Debug, Error)]
pub enum AssembleError {
    #[error("expansion order {0} exceeds supported maximum {MAX_ORDER}")]
    OrderTooHigh(usize),
    #[error(transparent)]
    Mode(#[from] ModeError),
}

/// Boundary/initial data profile with closed-form derivatives of all orders.
#[derive(Debug, Clone)]
pub enum Profile {
    Zero,
    /// amp/2 * erfc((x - center)/width): a smooth unit-step-like plateau
    ErfcStep { amp: f64, center: f64, width: f64 },
    /// polynomial p(x) times a C^3 cutoff equal to 1 on [0, a], 0 past b;
    /// the transition is itself polynomial, so derivatives of every order
    /// are exact (one-sided at the two C^3 joints)
    PolyCut { coeffs: Vec<f64>, cut_a: f64, cut_b: f64 },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::ErfcStep { amp, center, width } => {
                0.5 * amp * erfc((x - center) / width)
            }
            Profile::PolyCut { coeffs, cut_a, cut_b } => {
                poly_eval(coeffs, x) * cutoff(x, *cut_a, *cut_b)
            }
        }
    }

    /// n-th derivative at x. For `PolyCut` this is exact where the cutoff is
    /// flat and uses the first two cutoff derivatives inside the transition
    /// (higher product terms are dropped; callers keep Taylor-flow orders
    /// within that budget).
    pub fn deriv(&self, x: f64, n: usize) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::ErfcStep { amp, center, width } => {
                if n == 0 {
                    return self.eval(x);
                }
                let z = (x - center) / width;
                // d^n/dx^n erfc(z(x)) = width^{-n} (-1)^n H_{n-1}(z) e^{-z^2} * 2/sqrt(pi) * (-1)^{?}
                // using d/dz erfc = -2 e^{-z^2}/sqrt(pi) and
                // d^{m}/dz^{m} e^{-z^2} = (-1)^m H_m(z) e^{-z^2}
                let h = hermite(n - 1, z);
                let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
                0.5 * amp * sign * 2.0 / SQRT_PI * h * (-z * z).exp()
                    / width.powi(n as i32)
            }
            Profile::PolyCut { coeffs, cut_a, cut_b } => {
                // Leibniz over p(x) * cut(x); both factors have exact
                // derivatives of every order
                let mut total = 0.0;
                let mut binom = 1.0;
                for k in 0..=n {
                    if k > 0 {
                        binom *= (n - k + 1) as f64 / k as f64;
                    }
                    let pk = poly_eval(&poly_deriv(coeffs, k), x);
                    if pk != 0.0 {
                        total += binom * pk * cutoff_dn(x, *cut_a, *cut_b, n - k);
                    }
                }
                total
            }
        }
    }

    /// Jet at zero: f^{(j)}(0), j = 0..=order.
    pub fn jet(&self, order: usize) -> Vec<f64> {
        (0..=order).map(|j| self.deriv(0.0, j)).collect()
    }
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn poly_deriv(c: &[f64], n: usize) -> Vec<f64> {
    let mut out = c.to_vec();
    for _ in 0..n {
        if out.len() <= 1 {
            return vec![0.0];
        }
        out = out
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &v)| i as f64 * v)
            .collect();
    }
    out
}

/// Physicists' Hermite polynomial H_n(z).
fn hermite(n: usize, z: f64) -> f64 {
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = 2.0 * z;
    for k in 1..n {
        let h2 = 2.0 * z * h1 - 2.0 * (k as f64) * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Initial and boundary data for the mixed quarter-plane problem.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub phi: Profile,
    pub psi: Profile,
    /// both profiles are (effectively) supported in [0, support)
    pub support: f64,
}

impl BoundaryData {
    pub fn zero() -> Self {
        BoundaryData { phi: Profile::Zero, psi: Profile::Zero, support: 1.0 }
    }

    /// The incompatible benchmark: phi ~ 1 near the corner, psi = 0.
    pub fn incompatible_step(center: f64, width: f64) -> Self {
        BoundaryData {
            phi: Profile::ErfcStep { amp: 1.0, center, width },
            psi: Profile::Zero,
            support: center + 4.0 * width,
        }
    }
}

/// One numeric corner mode: polynomial part (float coefficients) plus a
/// sampled decaying corrector and its discrete s-derivative.
#[derive(Debug, Clone)]
pub struct NumericMode {
    pub poly: Vec<f64>,
    pub tail: Vec<f64>,
    pub tail_d1: Vec<f64>,
}

/// Float version of the downward recursion for the polynomial mode part.
pub fn recursion_c_f64(j: usize, leading: f64) -> Vec<f64> {
    let mut row = vec![0.0; j + 1];
    row[j] = leading;
    for l in (0..j).rev() {
        if l == j - 1 {
            continue;
        }
        row[l] = ((l + 2) * (l + 1)) as f64 * row[l + 2] / (j - l) as f64;
    }
    row
}

/// The assembled approximate solution. Evaluations are closed-form in the
/// polynomial pieces; mode tails are interpolated from the shared grid.
pub struct ApproxV {
    pub order: usize,
    /// Taylor-flow truncation order K = ceil(order / 2)
    pub flow_order: usize,
    pub data: BoundaryData,
    pub grid: ModeGrid,
    pub modes: Vec<NumericMode>,
    /// spatial splice zone: corner sum active below `xi_a`, far flow past `xi_b`
    pub xi_a: f64,
    pub xi_b: f64,
    /// Borel cutoff: weight of mode j is chi(j^2 tau) with chi = 1 below
    /// `chi_a` and 0 past `chi_b`
    pub chi_a: f64,
    pub chi_b: f64,
    /// x-Taylor coefficients of phi at 0 (the corner seeds)
    pub seeds: Vec<f64>,
}

fn chi(a: f64, b: f64, r: f64) -> f64 {
    cutoff(r, a, b)
}

fn chi_d1(a: f64, b: f64, r: f64) -> f64 {
    cutoff_d1(r, a, b)
}

/// Build the corner modes and splice parameters for data of the given order.
pub fn build_approximate_v(
    data: &BoundaryData,
    order: usize,
    grid: ModeGrid,
    xi_a: f64,
    xi_b: f64,
) -> Result<ApproxV, AssembleError> {
    if order > MAX_ORDER {
        return Err(AssembleError::OrderTooHigh(order));
    }
    let phi_jet = data.phi.jet(order);
    let psi_jet = data.psi.jet(order / 2 + 1);
    // seeds: c_{jj} = phi^{(j)}(0)/j!
    let mut fact = 1.0;
    let seeds: Vec<f64> = phi_jet
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            if j > 0 {
                fact *= j as f64;
            }
            v / fact
        })
        .collect();
    // boundary values v_j(0): tau-expansion of psi(tau^2/2)
    let mut bc0 = vec![0.0; order + 1];
    let mut kfact = 1.0;
    for j in (0..=order).step_by(2) {
        let k = j / 2;
        if k > 0 {
            kfact *= k as f64;
        }
        bc0[j] = psi_jet[k] / (kfact * 2f64.powi(k as i32));
    }

    let mut modes = Vec::with_capacity(order + 1);
    for j in 0..=order {
        let poly = recursion_c_f64(j, seeds[j]);
        let p0 = poly[0];
        let mismatch = bc0[j] - p0;
        let tail: Vec<f64> = if j == 0 {
            // v_0 tail: mismatch * normalized decaying profile, computed by
            // quadrature of the Gaussian primitive (exact route for the
            // leading mode)
            let v0 = mode_v0(&grid, 1.0);
            grid.s
                .iter()
                .enumerate()
                .map(|(i, _)| mismatch * (1.0 - v0.samples[i] / v0.alpha0))
                .collect()
        } else if mismatch == 0.0 {
            vec![0.0; grid.len()]
        } else {
            let vhat = decaying_homogeneous(&grid, j as f64)?;
            vhat.iter().map(|&v| mismatch * v).collect()
        };
        let tail_d1 = sample_derivative(&grid, &tail);
        modes.push(NumericMode { poly, tail, tail_d1 });
    }
    Ok(ApproxV {
        order,
        flow_order: order.div_ceil(2),
        data: data.clone(),
        grid,
        modes,
        xi_a,
        xi_b,
        chi_a: 0.5,
        chi_b: 1.0,
        seeds,
    })
}

fn sample_derivative(grid: &ModeGrid, y: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = grid.s[i] - grid.s[i - 1];
        let h1 = grid.s[i + 1] - grid.s[i];
        let (w, _) = crate::numeric::interior_stencil(h0, h1);
        d[i] = w[0] * y[i - 1] + w[1] * y[i] + w[2] * y[i + 1];
    }
    d[0] = (y[1] - y[0]) / (grid.s[1] - grid.s[0]);
    d[n - 1] = (y[n - 1] - y[n - 2]) / (grid.s[n - 1] - grid.s[n - 2]);
    d
}

impl ApproxV {
    fn tau(t: f64) -> f64 {
        (2.0 * t).sqrt()
    }

    /// Caloric extension of the seed polynomial: sum_k t^k T_J^{(2k)}(x)/k!.
    fn heat_poly(&self, t: f64, x: f64, deriv_x: usize) -> f64 {
        let mut c = poly_deriv(&self.seeds, deriv_x);
        let mut total = 0.0;
        let mut k = 0usize;
        let mut kfact = 1.0;
        loop {
            if c.iter().all(|&v| v == 0.0) {
                break;
            }
            if k > 0 {
                kfact *= k as f64;
            }
            total += t.powi(k as i32) / kfact * poly_eval(&c, x);
            c = poly_deriv(&c, 2);
            k += 1;
            if k > self.order + 2 {
                break;
            }
        }
        total
    }

    /// Corner sum with Borel weights; `deriv_s` in {0, 1} selects the
    /// s-derivative of the mode functions.
    fn corner_sum(&self, tau: f64, s: f64, deriv_s: usize) -> f64 {
        let mut total = 0.0;
        for (j, m) in self.modes.iter().enumerate() {
            let w = if j == 0 {
                1.0
            } else {
                chi(self.chi_a, self.chi_b, (j * j) as f64 * tau)
            };
            if w == 0.0 {
                continue;
            }
            let val = match deriv_s {
                0 => poly_eval(&m.poly, s) + interp_linear(&self.grid.s, &m.tail, s),
                _ => {
                    poly_eval(&poly_deriv(&m.poly, 1), s)
                        + interp_linear(&self.grid.s, &m.tail_d1, s)
                }
            };
            total += w * tau.powi(j as i32) * val;
        }
        total
    }

    /// Taylor heat flow of phi to order K.
    fn taylor_flow_phi(&self, t: f64, x: f64) -> f64 {
        let mut total = 0.0;
        let mut kfact = 1.0;
        for k in 0..=self.flow_order {
            if k > 0 {
                kfact *= k as f64;
            }
            total += t.powi(k as i32) / kfact * self.data.phi.deriv(x, 2 * k);
        }
        total
    }

    /// The approximate solution v(t, x). At t = 0 this is exactly phi(x).
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        if t <= 0.0 {
            return self.data.phi.eval(x);
        }
        let tau = Self::tau(t);
        let s = x / tau;
        let xi = cutoff(x, self.xi_a, self.xi_b);
        let d = if xi == 0.0 {
            0.0
        } else {
            self.corner_sum(tau, s, 0) - self.heat_poly(t, x, 0)
        };
        xi * d + self.taylor_flow_phi(t, x)
    }

    /// Semi-analytic defect f = (d_t - d_x^2) v. The corner modes are
    /// annihilated exactly, so only the Borel-weight derivative, the splice
    /// commutator, and the Taylor-flow truncation contribute.
    pub fn defect(&self, t: f64, x: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let tau = Self::tau(t);
        let s = x / tau;
        let xi = cutoff(x, self.xi_a, self.xi_b);
        let xi1 = cutoff_d1(x, self.xi_a, self.xi_b);
        let xi2 = cutoff_d2(x, self.xi_a, self.xi_b);

        let mut borel = 0.0;
        if xi != 0.0 {
            for (j, m) in self.modes.iter().enumerate().skip(1) {
                let r = (j * j) as f64 * tau;
                let dchi = chi_d1(self.chi_a, self.chi_b, r);
                if dchi == 0.0 {
                    continue;
                }
                let vj = poly_eval(&m.poly, s) + interp_linear(&self.grid.s, &m.tail, s);
                borel += (j * j) as f64 * dchi * tau.powi(j as i32 - 1) * vj;
            }
            borel *= xi;
        }

        let mut commutator = 0.0;
        if xi1 != 0.0 || xi2 != 0.0 {
            let d = self.corner_sum(tau, s, 0) - self.heat_poly(t, x, 0);
            let dx = self.corner_sum(tau, s, 1) / tau - self.heat_poly(t, x, 1);
            commutator = xi2 * d + 2.0 * xi1 * dx;
        }

        let kf = (1..=self.flow_order).map(|k| k as f64).product::<f64>();
        let trunc = -t.powi(self.flow_order as i32) / kf
            * self.data.phi.deriv(x, 2 * self.flow_order + 2);

        borel - commutator + trunc
    }

    /// Observed decay order of sup_x |defect| as t -> 0 over a dyadic ladder.
    pub fn observed_defect_order(&self, xs: &[f64], t_hi: f64, levels: usize) -> f64 {
        let mut lts = Vec::new();
        let mut lfs = Vec::new();
        for lvl in 0..levels {
            let t = t_hi / 2f64.powi(lvl as i32);
            let sup = xs
                .iter()
                .map(|&x| self.defect(t, x).abs())
                .fold(0.0f64, f64::max);
            if sup > 1e-300 {
                lts.push(t.ln());
                lfs.push(sup.ln());
            }
        }
        if lts.len() < 2 {
            return f64::INFINITY; // defect identically zero on the ladder
        }
        linear_fit(&lts, &lfs).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> ModeGrid {
        ModeGrid::uniform(8.0, 2048)
    }

    #[test]
    fn zero_data_gives_zero_field_and_defect() {
        let v = build_approximate_v(&BoundaryData::zero(), 4, grid(), 2.5, 3.5).unwrap();
        for &(t, x) in &[(0.0, 0.3), (0.01, 0.0), (0.05, 1.0), (0.2, 3.0)] {
            assert_eq!(v.eval(t, x), 0.0);
            assert_eq!(v.defect(t, x), 0.0);
        }
    }

    #[test]
    fn linear_data_is_reproduced_exactly_before_cutoff_influence() {
        // phi(x) = x cut off past 1/2: v = x and defect = 0 in the region
        // x < 1/4, t < 1/16
        let data = BoundaryData {
            phi: Profile::PolyCut { coeffs: vec![0.0, 1.0], cut_a: 0.5, cut_b: 0.9 },
            psi: Profile::Zero,
            support: 1.0,
        };
        let v = build_approximate_v(&data, 3, ModeGrid::uniform(8.0, 512), 1.2, 1.8).unwrap();
        for &x in &[0.01, 0.1, 0.2, 0.24] {
            for &t in &[1e-4, 1e-3, 0.01, 0.06] {
                let got = v.eval(t, x);
                assert!((got - x).abs() < 1e-12, "v({t},{x}) = {got}");
                assert!(v.defect(t, x).abs() < 1e-12);
            }
        }
        // the corner mode is v_1 with polynomial part s
        assert!((v.modes[1].poly[1] - 1.0).abs() < 1e-14);
        assert!(v.modes[1].poly[0].abs() < 1e-14);
    }

    #[test]
    fn quadratic_data_matches_caloric_polynomial_away_from_wall() {
        // phi = x^2, psi = 0: the free caloric extension is x^2 + 2t, and the
        // corner mode corrects it to honor the wall: v = x^2 + 2t(1 - V2(s)).
        // Far from the wall (s large) the correction is exponentially small;
        // on the wall v must vanish.
        let data = BoundaryData {
            phi: Profile::PolyCut { coeffs: vec![0.0, 0.0, 1.0], cut_a: 1.0, cut_b: 1.6 },
            psi: Profile::Zero,
            support: 2.0,
        };
        let v = build_approximate_v(&data, 4, ModeGrid::uniform(8.0, 2048), 2.0, 2.8).unwrap();
        for &x in &[0.4, 0.6, 0.9] {
            for &t in &[1e-4, 1e-3] {
                let got = v.eval(t, x);
                assert!(
                    (got - (x * x + 2.0 * t)).abs() < 1e-8,
                    "v({t},{x}) = {got} want {}",
                    x * x + 2.0 * t
                );
            }
        }
        for &t in &[1e-4, 1e-3, 0.01] {
            assert!(v.eval(t, 0.0).abs() < 1e-12, "wall value {}", v.eval(t, 0.0));
        }
    }

    #[test]
    fn incompatible_step_has_erf_corner_mode() {
        // phi = 1 near 0, psi = 0: v_0 = 1 - normalized erfc profile, so the
        // corner value v(t, 0) is 0 while v(t, x) -> 1 for s large
        let data = BoundaryData::incompatible_step(3.0, 0.5);
        let v = build_approximate_v(&data, 4, grid(), 2.2, 3.2).unwrap();
        for &t in &[1e-4, 1e-3, 0.01] {
            assert!(v.eval(t, 0.0).abs() < 1e-10, "wall value {}", v.eval(t, 0.0));
        }
        // interior, small time: plateau value
        assert!((v.eval(1e-4, 1.0) - 1.0).abs() < 1e-8);
        // t = 0 exactly: the data (erfc plateau is 1 up to its far tail)
        assert!((v.eval(0.0, 1.0) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn defect_decays_at_the_taylor_flow_order() {
        let data = BoundaryData::incompatible_step(3.0, 0.5);
        let j = 4;
        let v = build_approximate_v(&data, j, grid(), 2.2, 3.2).unwrap();
        let xs: Vec<f64> = crate::numeric::uniform_grid(0.0, 6.0, 240);
        let order = v.observed_defect_order(&xs, 0.02, 5);
        // K = 2 for J = 4
        assert!(order > 1.6, "observed defect order {order}");
    }

    #[test]
    fn erfc_profile_derivatives_match_finite_differences() {
        let p = Profile::ErfcStep { amp: 1.0, center: 3.0, width: 0.5 };
        let h = 1e-5;
        for &x in &[0.5, 2.0, 3.0, 3.7] {
            let fd1 = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
            assert!((fd1 - p.deriv(x, 1)).abs() < 1e-7, "x={x}");
            let fd2 = (p.eval(x + h) - 2.0 * p.eval(x) + p.eval(x - h)) / (h * h);
            assert!((fd2 - p.deriv(x, 2)).abs() < 1e-4, "x={x}");
            let fd3 = (p.deriv(x + h, 2) - p.deriv(x - h, 2)) / (2.0 * h);
            assert!((fd3 - p.deriv(x, 3)).abs() < 2e-3, "x={x}");
        }
    }
}
