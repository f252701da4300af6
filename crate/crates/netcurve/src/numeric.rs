//! Shared numerical kernels: finite-difference stencils on nonuniform grids,
//! tridiagonal and small dense solves, quadrature, smooth cutoffs, fits.

/// Weights of the 3-point first- and second-derivative stencils at the middle
/// node of (s[i-1], s[i], s[i+1]); second-order on nonuniform grids.
/// Returns ((d1 weights), (d2 weights)) for samples (y[i-1], y[i], y[i+1]).
pub fn interior_stencil(h0: f64, h1: f64) -> ([f64; 3], [f64; 3]) {
    let den = h0 * h1 * (h0 + h1);
    let d1 = [-h1 * h1 / den, (h1 * h1 - h0 * h0) / den, h0 * h0 / den];
    let d2 = [2.0 * h1 / den, -2.0 * (h0 + h1) / den, 2.0 * h0 / den];
    (d1, d2)
}

/// One-sided second-order first-derivative weights at the first node of
/// (s[0], s[1], s[2]), for samples (y[0], y[1], y[2]).
pub fn onesided_stencil(h0: f64, h1: f64) -> [f64; 3] {
    [
        -(2.0 * h0 + h1) / (h0 * (h0 + h1)),
        (h0 + h1) / (h0 * h1),
        -h0 / (h1 * (h0 + h1)),
    ]
}

/// Solve a tridiagonal system in place (Thomas algorithm).
/// `lower[i]` multiplies x[i-1] in row i; `upper[i]` multiplies x[i+1].
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
) {
    let n = diag.len();
    assert!(n > 0 && lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / m;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    rhs[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = d[i] - c[i] * rhs[i + 1];
    }
}

/// Solve a cyclic tridiagonal system via Sherman-Morrison.
/// Row i: lower[i]*x[(i-1) mod n] + diag[i]*x[i] + upper[i]*x[(i+1) mod n] = rhs[i].
pub fn solve_cyclic_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
) {
    let n = diag.len();
    assert!(n >= 3);
    let gamma = -diag[0];
    let mut dmod: Vec<f64> = diag.to_vec();
    dmod[0] -= gamma;
    dmod[n - 1] -= lower[0] * upper[n - 1] / gamma;

    let mut y: Vec<f64> = rhs.to_vec();
    solve_tridiagonal(lower, &dmod, upper, &mut y);

    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = upper[n - 1];
    solve_tridiagonal(lower, &dmod, upper, &mut u);

    let fact = (y[0] + lower[0] * y[n - 1] / gamma)
        / (1.0 + u[0] + lower[0] * u[n - 1] / gamma);
    for i in 0..n {
        rhs[i] = y[i] - fact * u[i];
    }
}

/// Gaussian elimination with partial pivoting for small dense systems.
/// `a` is row-major n*n; solves in place, result in `b`. Returns false if singular.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-300 {
            return false;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let inv = 1.0 / a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] * inv;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in r + 1..n {
            s -= a[r * n + k] * b[k];
        }
        b[r] = s / a[r * n + r];
    }
    true
}

/// Determinant of a small dense matrix (destroys `a`).
pub fn det_dense(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            det = -det;
        }
        det *= a[col * n + col];
        let inv = 1.0 / a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] * inv;
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
        }
    }
    det
}

/// Composite Simpson quadrature over samples on a uniform grid.
/// Falls back to trapezoid on the last interval when the count is even.
pub fn simpson_uniform(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    assert!(n >= 2);
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < n {
        total += h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        total += 0.5 * h * (y[i] + y[i + 1]);
    }
    total
}

/// Trapezoid rule on a nonuniform grid.
pub fn trapezoid(s: &[f64], y: &[f64]) -> f64 {
    s.windows(2)
        .zip(y.windows(2))
        .map(|(sw, yw)| 0.5 * (sw[1] - sw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// C^3 polynomial smoothstep: 0 for u <= 0, 1 for u >= 1.
pub fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        // 35u^4 - 84u^5 + 70u^6 - 20u^7
        let u2 = u * u;
        u2 * u2 * (35.0 - 84.0 * u + 70.0 * u2 - 20.0 * u2 * u)
    }
}

/// Smooth cutoff equal to 1 on [0, a] and 0 beyond b (a < b).
pub fn cutoff(x: f64, a: f64, b: f64) -> f64 {
    1.0 - smoothstep((x - a) / (b - a))
}

/// Derivative of `cutoff` in x.
pub fn cutoff_d1(x: f64, a: f64, b: f64) -> f64 {
    let u = (x - a) / (b - a);
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    let u2 = u * u;
    let ds = u2 * u * (140.0 - 420.0 * u + 420.0 * u2 - 140.0 * u2 * u);
    -ds / (b - a)
}

/// Second derivative of `cutoff` in x.
pub fn cutoff_d2(x: f64, a: f64, b: f64) -> f64 {
    let u = (x - a) / (b - a);
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    let u2 = u * u;
    let dds = u2 * (420.0 - 1680.0 * u + 2100.0 * u2 - 840.0 * u2 * u);
    -dds / ((b - a) * (b - a))
}

/// Exact n-th derivative of `cutoff` in x (the transition is polynomial).
pub fn cutoff_dn(x: f64, a: f64, b: f64, n: usize) -> f64 {
    if n == 0 {
        return cutoff(x, a, b);
    }
    let u = (x - a) / (b - a);
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    // -S(u) with S = 35u^4 - 84u^5 + 70u^6 - 20u^7, differentiated n times
    let mut c = [0.0f64; 8];
    c[4] = -35.0;
    c[5] = 84.0;
    c[6] = -70.0;
    c[7] = 20.0;
    let mut coeffs: Vec<f64> = c.to_vec();
    for _ in 0..n {
        coeffs = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &v)| i as f64 * v)
            .collect();
        if coeffs.is_empty() {
            return 0.0;
        }
    }
    let val = coeffs.iter().rev().fold(0.0, |acc, &ci| acc * u + ci);
    val / (b - a).powi(n as i32)
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

pub fn erf(x: f64) -> f64 {
    statrs::function::erf::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    statrs::function::erf::erfc(x)
}

/// Power-graded grid on [0, span]: nodes span*(i/m)^p, denser near 0 for p > 1.
pub fn graded_grid(span: f64, m: usize, p: f64) -> Vec<f64> {
    (0..=m)
        .map(|i| span * ((i as f64) / (m as f64)).powf(p))
        .collect()
}

pub fn uniform_grid(a: f64, b: f64, m: usize) -> Vec<f64> {
    (0..=m)
        .map(|i| a + (b - a) * (i as f64) / (m as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solves_poisson() {
        // -u'' = 1 on (0,1), u(0)=u(1)=0, exact u = x(1-x)/2 at nodes
        let m = 64;
        let h = 1.0 / m as f64;
        let n = m - 1;
        let lower = vec![-1.0 / (h * h); n];
        let diag = vec![2.0 / (h * h); n];
        let upper = vec![-1.0 / (h * h); n];
        let mut rhs = vec![1.0; n];
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs);
        for i in 0..n {
            let x = (i + 1) as f64 * h;
            assert!((rhs[i] - 0.5 * x * (1.0 - x)).abs() < 1e-12);
        }
    }

    #[test]
    fn cyclic_tridiagonal_matches_dense() {
        let n = 6;
        let lower = vec![1.0; n];
        let diag = vec![4.0; n];
        let upper = vec![1.5; n];
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 1.0).collect();
        let mut x = rhs.clone();
        solve_cyclic_tridiagonal(&lower, &diag, &upper, &mut x);
        // residual check row by row
        for i in 0..n {
            let im = (i + n - 1) % n;
            let ip = (i + 1) % n;
            let r = lower[i] * x[im] + diag[i] * x[i] + upper[i] * x[ip] - rhs[i];
            assert!(r.abs() < 1e-12, "row {i} residual {r}");
        }
    }

    #[test]
    fn dense_solver_roundtrip() {
        let n = 5;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 1.0 / (1.0 + (i + 2 * j) as f64);
            }
            a[i * n + i] += 2.0;
        }
        let xs: Vec<f64> = (0..n).map(|i| i as f64 - 1.5).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                b[i] += a[i * n + j] * xs[j];
            }
        }
        let mut a2 = a.clone();
        assert!(solve_dense(&mut a2, &mut b, n));
        for i in 0..n {
            assert!((b[i] - xs[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn stencils_are_exact_on_quadratics() {
        // nonuniform second-order stencils are exact for y = s^2
        let (d1, d2) = interior_stencil(0.3, 0.7);
        let s = [1.0 - 0.3, 1.0, 1.0 + 0.7];
        let y = [s[0] * s[0], s[1] * s[1], s[2] * s[2]];
        let v1 = d1[0] * y[0] + d1[1] * y[1] + d1[2] * y[2];
        let v2 = d2[0] * y[0] + d2[1] * y[1] + d2[2] * y[2];
        assert!((v1 - 2.0).abs() < 1e-12);
        assert!((v2 - 2.0).abs() < 1e-12);
        let o = onesided_stencil(0.3, 0.7);
        let yb = [1.0, (1.3f64).powi(2), (2.0f64).powi(2)];
        let vb = o[0] * yb[0] + o[1] * yb[1] + o[2] * yb[2];
        assert!((vb - 2.0).abs() < 1e-12, "one-sided on s^2 at s=1: {vb}");
    }

    #[test]
    fn cutoff_derivatives_match_fd() {
        let (a, b) = (0.5, 1.5);
        for &x in &[0.6, 0.9, 1.2, 1.45] {
            let h = 1e-5;
            let fd1 = (cutoff(x + h, a, b) - cutoff(x - h, a, b)) / (2.0 * h);
            let fd2 =
                (cutoff(x + h, a, b) - 2.0 * cutoff(x, a, b) + cutoff(x - h, a, b)) / (h * h);
            assert!((fd1 - cutoff_d1(x, a, b)).abs() < 1e-6);
            assert!((fd2 - cutoff_d2(x, a, b)).abs() < 1e-4);
        }
    }
}
