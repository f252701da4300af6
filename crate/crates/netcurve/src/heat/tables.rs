//! Exact coefficient tables for the corner expansion of the mixed
//! Cauchy-Dirichlet heat problem on the quarter plane.
//!
//! In the projective chart (tau, s) = (sqrt(2t), x/sqrt(2t)) the expansion
//! v ~ sum_j v_j(s) tau^j forces each mode to satisfy
//! L_j v_j = v_j'' + s v_j' - j v_j = 0, whose polynomial part
//! P_j = sum_l c[j][l] s^l obeys the two-term recursion
//!
//!   (l+2)(l+1) c[j][l+2] + (l-j) c[j][l] = 0.
//!
//! The same function expanded in the corner chart (T, y) = (t/x^2, x) as
//! sum A[j][p] y^j T^p obeys
//!
//!   A[j][p+1] = (j-2p)(j-2p-1)/(p+1) * A[j][p],
//!
//! and the two tables are related index-by-index through 2^p c[j][j-2p] =
//! A[j][p]. Everything here is exact integer/rational arithmetic.

use num::{BigInt, BigRational, One, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from(BigInt::from(n))
}

/// Row c[j][0..=j] from the downward recursion, seeded by the free leading
/// coefficient c[j][j].
pub fn recursion_c(j: usize, leading: &Rational) -> Vec<Rational> {
    let mut row = vec![Rational::zero(); j + 1];
    row[j] = leading.clone();
    // (l+2)(l+1) c[l+2] + (l-j) c[l] = 0  =>  c[l] = (l+2)(l+1) c[l+2] / (j-l)
    for l in (0..j).rev() {
        if l == j - 1 {
            continue; // c[j][j-1] = 0: no s^{j+1} coefficient to feed it
        }
        let num = rat_int(((l + 2) * (l + 1)) as i64);
        let den = rat_int((j - l) as i64);
        row[l] = &num * &row[l + 2] / den;
    }
    row
}

/// Row A[j][0..=pmax] from the forward recursion, seeded by A[j][0].
pub fn recursion_a(j: usize, pmax: usize, seed: &Rational) -> Vec<Rational> {
    let mut row = vec![Rational::zero(); pmax + 1];
    row[0] = seed.clone();
    for p in 0..pmax {
        let jj = j as i64;
        let pp = p as i64;
        let factor = rat((jj - 2 * pp) * (jj - 2 * pp - 1), pp as i64 + 1);
        row[p + 1] = &factor * &row[p];
    }
    row
}

/// Both tables to order J with matching seeds, plus the cross identity.
#[derive(Debug, Clone)]
pub struct SeriesTable {
    pub order: usize,
    /// c[j][l], 0 <= l <= j
    pub c: Vec<Vec<Rational>>,
    /// A[j][p], 0 <= p <= order
    pub a: Vec<Vec<Rational>>,
}

impl SeriesTable {
    /// Build rows 0..=order with seeds c[j][j] = A[j][0] = `seeds[j]`.
    pub fn build(order: usize, seeds: &[Rational]) -> SeriesTable {
        assert!(seeds.len() > order);
        let c = (0..=order).map(|j| recursion_c(j, &seeds[j])).collect();
        let a = (0..=order).map(|j| recursion_a(j, order, &seeds[j])).collect();
        SeriesTable { order, c, a }
    }

    /// Unit seeds (c[j][j] = 1 for all j).
    pub fn unit(order: usize) -> SeriesTable {
        let seeds = vec![Rational::one(); order + 1];
        SeriesTable::build(order, &seeds)
    }

    /// Odd-gap vanishing: c[j][l] = 0 whenever j - l is odd.
    pub fn odd_gaps_vanish(&self) -> Result<(), (usize, usize)> {
        for (j, row) in self.c.iter().enumerate() {
            for (l, v) in row.iter().enumerate() {
                if (j - l) % 2 == 1 && !v.is_zero() {
                    return Err((j, l));
                }
            }
        }
        Ok(())
    }

    /// A[j][p] = 0 for p > j/2.
    pub fn a_vanishes_past_half(&self) -> Result<(), (usize, usize)> {
        for (j, row) in self.a.iter().enumerate() {
            for (p, v) in row.iter().enumerate() {
                if 2 * p > j && !v.is_zero() {
                    return Err((j, p));
                }
            }
        }
        Ok(())
    }

    /// Exact cross-chart identity 2^p c[j][j-2p] = A[j][p]. Returns the first
    /// failing index (j, p) if any.
    pub fn cross_consistency(&self) -> Result<(), (usize, usize)> {
        for j in 0..=self.order {
            for p in 0..=(j / 2) {
                let lhs = rat_int(2).pow(p as i32) * &self.c[j][j - 2 * p];
                if lhs != self.a[j][p] {
                    return Err((j, p));
                }
            }
        }
        self.a_vanishes_past_half().map_err(|e| e)?;
        Ok(())
    }

    /// CSV rows (j, l, numerator, denominator) of the c-table.
    pub fn c_csv(&self) -> String {
        let mut out = String::from("j,l,numerator,denominator\n");
        for (j, row) in self.c.iter().enumerate() {
            for (l, v) in row.iter().enumerate() {
                out.push_str(&format!("{},{},{},{}\n", j, l, v.numer(), v.denom()));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_checked_small_rows() {
        // j=1, c11=1: 2 c[1][2] - c[1][0] = 0 with c[1][2] = 0 forces c[1][0] = 0
        let r1 = recursion_c(1, &Rational::one());
        assert!(r1[0].is_zero());
        assert!(r1[1].is_one());
        // j=2, c22=1: 2 c[2][2] - 2 c[2][0] = 0 -> c[2][0] = 1
        let r2 = recursion_c(2, &Rational::one());
        assert_eq!(r2[0], Rational::one());
        assert!(r2[1].is_zero());
        // j=0: a single free coefficient
        let r0 = recursion_c(0, &rat(3, 2));
        assert_eq!(r0, vec![rat(3, 2)]);
    }

    #[test]
    fn hand_checked_a_rows() {
        // j=2, A20=1: A21 = (2)(1)/1 = 2, A22 carries factor (2-2) = 0
        let a2 = recursion_a(2, 3, &Rational::one());
        assert_eq!(a2[1], rat_int(2));
        assert!(a2[2].is_zero());
        // j=1: A11 factor (1)(0) = 0
        let a1 = recursion_a(1, 2, &Rational::one());
        assert!(a1[1].is_zero());
        // j=0: all higher vanish
        let a0 = recursion_a(0, 4, &Rational::one());
        assert!(a0[1..].iter().all(|v| v.is_zero()));
    }

    #[test]
    fn cross_identity_exact_to_order_12() {
        let t = SeriesTable::unit(12);
        assert!(t.odd_gaps_vanish().is_ok());
        assert!(t.cross_consistency().is_ok());
    }

    #[test]
    fn cross_identity_with_arbitrary_seeds() {
        let seeds: Vec<Rational> = (0..=9).map(|j| rat(2 * j - 7, j + 2)).collect();
        let t = SeriesTable::build(9, &seeds);
        assert!(t.cross_consistency().is_ok());
    }

    #[test]
    fn perturbed_coefficient_is_caught_with_index() {
        let mut t = SeriesTable::unit(12);
        t.c[6][2] += Rational::one();
        assert_eq!(t.cross_consistency(), Err((6, 2)));
    }

    #[test]
    fn order_zero_is_vacuously_consistent() {
        let t = SeriesTable::unit(0);
        assert!(t.cross_consistency().is_ok());
    }

    #[test]
    fn rows_satisfy_the_defining_recursions() {
        let t = SeriesTable::unit(12);
        for j in 0..=12usize {
            for l in 0..j.saturating_sub(1) {
                let lhs = rat_int(((l + 2) * (l + 1)) as i64) * &t.c[j][l + 2]
                    + rat_int(l as i64 - j as i64) * &t.c[j][l];
                assert!(lhs.is_zero(), "recc fails at j={j} l={l}");
            }
            for p in 0..12usize {
                let jj = j as i64;
                let pp = p as i64;
                let rhs = rat((jj - 2 * pp) * (jj - 2 * pp - 1), pp + 1) * &t.a[j][p];
                assert_eq!(t.a[j][p + 1], rhs, "recA fails at j={j} p={p}");
            }
        }
    }
}
