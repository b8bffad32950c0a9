//! Feasibility of homogeneous linear inequalities over the probability simplex.
//!
//! The polytope `{v ≥ 0, Σv = 1, row·v ≥ 0}` is bounded, so it is nonempty
//! iff it has a vertex. Vertices are found by choosing `n − 1` tight
//! constraints and solving the resulting square system together with `Σv = 1`.

use itertools::Itertools;

use crate::scalar::Scalar;

/// Solves `a x = b` by Gaussian elimination; `None` when singular.
fn solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        // exact types accept any nonzero pivot; floats take the largest
        let pivot = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&x, &y| {
                if T::EXACT {
                    y.cmp(&x)
                } else {
                    a[x][col]
                        .abs()
                        .partial_cmp(&a[y][col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                }
            })?;
        if !T::EXACT && a[pivot][col].abs() < T::lift(1e-13) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / a[col][col].clone();
            for c in col..n {
                let d = f.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - d;
            }
            b[r] = b[r].clone() - f * b[col].clone();
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc = acc - a[r][c].clone() * x[c].clone();
        }
        x[r] = acc / a[r][r].clone();
    }
    Some(x)
}

fn dot<T: Scalar>(row: &[T], v: &[T]) -> T {
    row.iter()
        .zip(v)
        .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

/// Returns a point `v` of the simplex with `row · v ≥ 0` for every row, or
/// `None` when no such point exists. All rows have length `n ≥ 1`.
pub fn simplex_feasible_point<T: Scalar>(n: usize, rows: &[Vec<T>]) -> Option<Vec<T>> {
    let slack = T::slack();
    let ok = |v: &[T]| {
        v.iter().all(|x| *x >= -slack.clone()) && rows.iter().all(|r| dot(r, v) >= -slack.clone())
    };
    if n == 1 {
        let v = vec![T::one()];
        return ok(&v).then_some(v);
    }
    // constraint k < n is `v_k = 0`, otherwise `rows[k − n] · v = 0`
    for tight in (0..n + rows.len()).combinations(n - 1) {
        let mut a = vec![vec![T::one(); n]];
        let mut b = vec![T::one()];
        for &k in &tight {
            if k < n {
                let mut e = vec![T::zero(); n];
                e[k] = T::one();
                a.push(e);
            } else {
                a.push(rows[k - n].clone());
            }
            b.push(T::zero());
        }
        let Some(v) = solve(a, b) else { continue };
        if ok(&v) {
            return Some(clean(v));
        }
    }
    None
}

/// Clears rounding noise below zero and renormalizes.
fn clean<T: Scalar>(v: Vec<T>) -> Vec<T> {
    if T::EXACT {
        return v;
    }
    let v: Vec<T> = v
        .into_iter()
        .map(|x| if x < T::zero() { T::zero() } else { x })
        .collect();
    let total = v.iter().fold(T::zero(), |a, b| a + b.clone());
    v.into_iter().map(|x| x / total.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;
    use num_traits::Signed;

    type Q = BigRational;

    #[test]
    fn vertex_of_bare_simplex() {
        let v = simplex_feasible_point::<Q>(3, &[]).unwrap();
        assert_eq!(v, vec![ratio(0, 1), ratio(0, 1), ratio(1, 1)]);
    }

    #[test]
    fn interior_crossing() {
        // v0 − v1 ≥ 0 and v1 − v0 ≥ 0 forces v = (1/2, 1/2)
        let rows = vec![
            vec![ratio::<Q>(1, 1), ratio(-1, 1)],
            vec![ratio(-1, 1), ratio(1, 1)],
        ];
        let v = simplex_feasible_point(2, &rows).unwrap();
        assert_eq!(v, vec![ratio(1, 2), ratio(1, 2)]);
    }

    #[test]
    fn infeasible() {
        let rows = vec![vec![ratio::<Q>(-1, 1), ratio(-1, 1)]];
        assert!(simplex_feasible_point(2, &rows).is_none());
        let rows = vec![vec![-1.0f64]];
        assert!(simplex_feasible_point(1, &rows).is_none());
    }

    #[test]
    fn float_matches_exact() {
        let rows_f = vec![
            vec![2.0, -1.0, 0.5],
            vec![-1.0, 3.0, -2.0],
            vec![0.0, -1.0, 1.0],
        ];
        let rows_q: Vec<Vec<Q>> = rows_f
            .iter()
            .map(|r| r.iter().map(|&x| Q::lift(x)).collect())
            .collect();
        let vf = simplex_feasible_point(3, &rows_f).unwrap();
        let vq = simplex_feasible_point(3, &rows_q).unwrap();
        for r in &rows_f {
            assert!(dot(r, &vf) >= -1e-12);
        }
        for r in &rows_q {
            assert!(!dot(r, &vq).is_negative());
        }
    }
}
