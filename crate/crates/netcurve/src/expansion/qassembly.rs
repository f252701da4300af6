//! Assembly of the inhomogeneous terms Q_j driving the expansion modes.
//!
//! Writing eta ~ sum tau^j eta_j and F(w) = 1/w, the tau^j coefficient of
//! eta''/|eta'|^2 is eta_j'' + Q_j, with
//!
//!   Q_j = sum_{i=1}^{j-1} eta_i'' ( B_{j-i} - 2 eta_0' . eta_{j-i}' ),
//!
//! where B_l collects the higher products of the geometric-series expansion
//! of F about |eta_0'|^2 = 1. On the polynomial level eta_0 = a s with
//! |a| = 1, so everything here is exact ring arithmetic; deg Q_j <= j - 1.

use super::poly::{Poly, Poly2, Ring};
use crate::geom::Vec2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QError {
    #[error("missing jet {0} (need all of 0..j)")]
    MissingJet(usize),
    #[error("background jet must be a unit-direction line: {0}")]
    BadBackground(String),
}

/// Validate the background jet: degree <= 1 with unit direction.
fn check_background<R: Ring>(eta0: &Poly2<R>) -> Result<(), QError> {
    if eta0.degree().map(|d| d > 1).unwrap_or(false) {
        return Err(QError::BadBackground(format!(
            "degree {:?} > 1",
            eta0.degree()
        )));
    }
    let d = eta0.derivative();
    let n2 = d.dot(&d);
    let one = Poly::constant(R::one());
    if !n2.sub(&one).is_zero() {
        return Err(QError::BadBackground(
            "|eta_0'|^2 != 1 in the ring".into(),
        ));
    }
    Ok(())
}

/// tau-coefficients of |eta'|^2 - 1 for l = 1..=lmax:
/// d_l = 2 eta_0'.eta_l' + sum_{i=1}^{l-1} eta_i'.eta_{l-i}'.
fn d_series<R: Ring>(jets_d1: &[Poly2<R>], lmax: usize) -> Vec<Poly<R>> {
    let mut d = vec![Poly::zero(); lmax + 1];
    for l in 1..=lmax {
        let mut acc = jets_d1[0].dot(&jets_d1[l]).scale(&R::from_i64(2));
        for i in 1..l {
            acc = acc.add(&jets_d1[i].dot(&jets_d1[l - i]));
        }
        d[l] = acc;
    }
    d
}

/// B_l = - sum_{i=1}^{l-1} eta_i'.eta_{l-i}' + sum_{p>=2} (-1)^p [d^p]_l:
/// every monomial carries at least two dot-product factors.
fn b_series<R: Ring>(jets_d1: &[Poly2<R>], d: &[Poly<R>], lmax: usize) -> Vec<Poly<R>> {
    let mut b: Vec<Poly<R>> = vec![Poly::zero(); lmax + 1];
    for (l, slot) in b.iter_mut().enumerate().take(lmax + 1).skip(1) {
        let mut acc = Poly::zero();
        for i in 1..l {
            acc = acc.sub(&jets_d1[i].dot(&jets_d1[l - i]));
        }
        *slot = acc;
    }
    // powers of the d-series: d starts at order 1, so [d^p]_l vanishes for p > l
    let mut power: Vec<Poly<R>> = d.to_vec(); // d^1
    let mut p = 1usize;
    while p < lmax {
        // next power: d^{p+1} = d^p * d (truncated convolution)
        let mut next = vec![Poly::zero(); lmax + 1];
        for (l, slot) in next.iter_mut().enumerate().take(lmax + 1) {
            let mut acc = Poly::zero();
            for i in 1..l {
                acc = acc.add(&power[i].mul(&d[l - i]));
            }
            *slot = acc;
        }
        p += 1;
        let neg = p % 2 == 1;
        for l in 1..=lmax {
            if next[l].is_zero() {
                continue;
            }
            b[l] = if neg { b[l].sub(&next[l]) } else { b[l].add(&next[l]) };
        }
        power = next;
    }
    b
}

/// Structured assembly of Q_j from the polynomial jets eta_0..eta_{j-1}.
pub fn assemble_q<R: Ring>(j: usize, jets: &[Poly2<R>]) -> Result<Poly2<R>, QError> {
    if jets.len() < j {
        return Err(QError::MissingJet(jets.len()));
    }
    check_background(&jets[0])?;
    if j <= 1 {
        return Ok(Poly2::zero());
    }
    let d1: Vec<Poly2<R>> = jets.iter().take(j).map(|p| p.derivative()).collect();
    let d2: Vec<Poly2<R>> = d1.iter().map(|p| p.derivative()).collect();
    let d = d_series(&d1, j - 1);
    let b = b_series(&d1, &d, j - 1);
    let mut q = Poly2::zero();
    for i in 1..j {
        let l = j - i;
        let factor = b[l].sub(&d1[0].dot(&d1[l]).scale(&R::from_i64(2)));
        q = q.add(&d2[i].mul_scalar_poly(&factor));
    }
    Ok(q)
}

/// Independent route: invert the series S = |eta'|^2 triangularly
/// (S F = 1) and convolve with the eta'' series. Kept close to the direct
/// power-series manipulation; used as the oracle in tests.
pub fn q_by_series_inversion<R: Ring>(j: usize, jets: &[Poly2<R>]) -> Result<Poly2<R>, QError> {
    if jets.len() < j {
        return Err(QError::MissingJet(jets.len()));
    }
    check_background(&jets[0])?;
    if j <= 1 {
        return Ok(Poly2::zero());
    }
    let d1: Vec<Poly2<R>> = jets.iter().take(j).map(|p| p.derivative()).collect();
    let d2: Vec<Poly2<R>> = d1.iter().map(|p| p.derivative()).collect();
    // s-series of |eta'|^2: S_0 = 1, S_l = d_l
    let s = d_series(&d1, j - 1);
    // triangular inversion: F_0 = 1, F_l = -sum_{i=1}^{l} S_i F_{l-i}
    let mut f: Vec<Poly<R>> = vec![Poly::zero(); j];
    f[0] = Poly::constant(R::one());
    for l in 1..j {
        let mut acc = Poly::zero();
        for i in 1..=l {
            acc = acc.add(&s[i].mul(&f[l - i]));
        }
        f[l] = acc.neg();
    }
    // [F eta'']_j minus the leading eta_j'' term; eta_0'' = 0 on this level
    let mut q = Poly2::zero();
    for i in 1..j {
        q = q.add(&d2[i].mul_scalar_poly(&f[j - i]));
    }
    Ok(q)
}

/// Numeric per-node version of the same object, including the sampled
/// decaying parts. `jet_d1[i][k]` and `jet_d2[i][k]` are the total first and
/// second s-derivatives of mode i at grid node k, for i = 0..j-1. Returns
/// G_j(k): the tau^j coefficient of eta''/|eta'|^2 minus the terms that
/// involve mode j itself (those are handled by the mode solver).
pub fn assemble_g_numeric(
    j: usize,
    jet_d1: &[Vec<Vec2>],
    jet_d2: &[Vec<Vec2>],
) -> Vec<Vec2> {
    assert!(jet_d1.len() >= j && jet_d2.len() >= j);
    let n = jet_d1[0].len();
    let mut out = vec![Vec2::default(); n];
    for k in 0..n {
        // S_l at this node; S_j keeps only the lower-jet part
        let mut s = vec![0.0; j + 1];
        s[0] = jet_d1[0][k].norm_sq();
        for l in 1..=j {
            let mut acc = if l < j {
                2.0 * jet_d1[0][k].dot(jet_d1[l][k])
            } else {
                0.0
            };
            for i in 1..l {
                if l - i < j {
                    acc += jet_d1[i][k].dot(jet_d1[l - i][k]);
                }
            }
            s[l] = acc;
        }
        let mut f = vec![0.0; j + 1];
        f[0] = 1.0 / s[0];
        for l in 1..=j {
            let mut acc = 0.0;
            for i in 1..=l {
                acc += s[i] * f[l - i];
            }
            f[l] = -acc / s[0];
        }
        let mut g = Vec2::default();
        for i in 0..j {
            g += jet_d2[i][k] * f[j - i];
        }
        out[k] = g;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::poly::{rational, random_poly2};
    use num::BigRational;
    use rand::SeedableRng;

    fn unit_background() -> Poly2<BigRational> {
        // eta_0 = (3/5, 4/5) s: rational unit direction
        Poly2::monomial(rational(3, 5), rational(4, 5), 1)
    }

    #[test]
    fn q1_vanishes_identically() {
        let jets = vec![unit_background()];
        let q = assemble_q(1, &jets).unwrap();
        assert!(q.is_zero());
    }

    #[test]
    fn q2_is_the_single_cross_term_with_degree_at_most_one() {
        // eta_1 of degree 2: Q_2 = eta_1'' * (-2 eta_0'.eta_1')
        let eta0 = unit_background();
        let eta1 = Poly2 {
            x: Poly(vec![rational(1, 2), rational(0, 1), rational(1, 1)]),
            y: Poly(vec![rational(-1, 3), rational(0, 1), rational(2, 1)]),
        };
        let q = assemble_q(2, &[eta0.clone(), eta1.clone()]).unwrap();
        let expect = eta1
            .derivative()
            .derivative()
            .mul_scalar_poly(
                &eta0
                    .derivative()
                    .dot(&eta1.derivative())
                    .scale(&rational(-2, 1)),
            );
        assert_eq!(q, expect);
        assert!(q.degree().unwrap_or(0) <= 1, "degree {:?}", q.degree());
    }

    #[test]
    fn structured_assembly_matches_series_inversion_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for trial in 0..12 {
            let jmax = 2 + (trial % 4); // j = 2..=5
            let mut jets = vec![unit_background()];
            for i in 1..jmax {
                jets.push(random_poly2(&mut rng, i + 1));
            }
            let a = assemble_q(jmax, &jets).unwrap();
            let b = q_by_series_inversion(jmax, &jets).unwrap();
            assert_eq!(a, b, "mismatch at j = {jmax} trial {trial}");
        }
    }

    #[test]
    fn degree_bound_holds_on_random_jets() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..10 {
            let jmax = 2 + (trial % 4);
            let mut jets = vec![unit_background()];
            for i in 1..jmax {
                jets.push(random_poly2(&mut rng, i + 1));
            }
            let q = assemble_q(jmax, &jets).unwrap();
            if let Some(d) = q.degree() {
                assert!(d <= jmax - 1, "deg Q_{jmax} = {d}");
            }
        }
    }

    #[test]
    fn background_validation() {
        let bad = Poly2::monomial(rational(1, 1), rational(1, 1), 1); // |a|^2 = 2
        assert!(matches!(
            assemble_q(2, &[bad, Poly2::zero()]),
            Err(QError::BadBackground(_))
        ));
        assert!(matches!(
            assemble_q::<BigRational>(3, &[unit_background()]),
            Err(QError::MissingJet(_))
        ));
    }

    #[test]
    fn numeric_route_agrees_with_polynomial_route_on_polynomial_jets() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let jmax = 4;
        let mut jets = vec![unit_background()];
        for i in 1..jmax {
            jets.push(random_poly2(&mut rng, i + 1));
        }
        let qpoly = assemble_q(jmax, &jets).unwrap();
        // sample the polynomial jets on a grid and run the numeric assembly
        let ss: Vec<f64> = crate::numeric::uniform_grid(0.0, 3.0, 50);
        let d1: Vec<Vec<Vec2>> = jets
            .iter()
            .map(|p| {
                let d = p.derivative();
                ss.iter().map(|&s| d.eval_f64(s)).collect()
            })
            .collect();
        let d2: Vec<Vec<Vec2>> = jets
            .iter()
            .map(|p| {
                let d = p.derivative().derivative();
                ss.iter().map(|&s| d.eval_f64(s)).collect()
            })
            .collect();
        let g = assemble_g_numeric(jmax, &d1, &d2);
        for (k, &s) in ss.iter().enumerate() {
            let want = qpoly.eval_f64(s);
            let diff = (g[k] - want).norm();
            assert!(
                diff < 1e-8 * (1.0 + want.norm()),
                "node {k}: {diff}"
            );
        }
    }
}
