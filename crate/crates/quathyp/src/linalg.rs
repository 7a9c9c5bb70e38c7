//! Positive-definite quaternionic linear algebra on column vectors:
//! Gram–Schmidt, Householder maps and a real-embedding rank test.

use nalgebra::DMatrix;

use crate::quat::Quaternion;

/// Square quaternion matrix, row-major.
pub type QMatrix = Vec<Vec<Quaternion>>;

/// `u* v = Σ conj(uᵢ) vᵢ`.
pub fn herm(u: &[Quaternion], v: &[Quaternion]) -> Quaternion {
    u.iter().zip(v).map(|(a, b)| a.conj() * *b).sum()
}

pub fn norm(u: &[Quaternion]) -> f64 {
    u.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}

pub fn identity(m: usize) -> QMatrix {
    (0..m).map(|i| (0..m).map(|j| if i == j { Quaternion::ONE } else { Quaternion::ZERO }).collect()).collect()
}

pub fn mat_vec(a: &QMatrix, x: &[Quaternion]) -> Vec<Quaternion> {
    a.iter().map(|row| row.iter().zip(x).map(|(g, z)| *g * *z).sum()).collect()
}

pub fn mat_mul(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let m = b.first().map_or(0, Vec::len);
    a.iter().map(|row| (0..m).map(|j| row.iter().zip(b).map(|(x, brow)| *x * brow[j]).sum()).collect()).collect()
}

/// Conjugate transpose.
pub fn adjoint(a: &QMatrix) -> QMatrix {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|i| (0..rows).map(|j| a[j][i].conj()).collect()).collect()
}

/// Largest entrywise deviation of `A*A` from the identity.
pub fn unitarity_defect(a: &QMatrix) -> f64 {
    let p = mat_mul(&adjoint(a), a);
    let id = identity(p.len());
    p.iter().zip(&id).flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.dist(*y))).fold(0.0, f64::max)
}

/// Orthonormalizes the columns `cols` (each a vector), scalars acting on the
/// right. Returns `None` if they are numerically dependent.
pub fn gram_schmidt(cols: &[Vec<Quaternion>]) -> Option<Vec<Vec<Quaternion>>> {
    let mut out: Vec<Vec<Quaternion>> = Vec::with_capacity(cols.len());
    for c in cols {
        let scale = norm(c);
        let mut v = c.clone();
        // two passes keep orthogonality at rounding level
        for _ in 0..2 {
            for e in &out {
                let coef = herm(e, &v);
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= *ei * coef;
                }
            }
        }
        let r = norm(&v);
        if r <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        out.push(v.into_iter().map(|q| q / r).collect());
    }
    Some(out)
}

/// Matrix with the given columns.
pub fn from_columns(cols: &[Vec<Quaternion>]) -> QMatrix {
    let m = cols.first().map_or(0, Vec::len);
    (0..m).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

/// Unitary `U` with `U x = |x| e₁`.
fn to_first_axis(x: &[Quaternion]) -> QMatrix {
    let m = x.len();
    let r = norm(x);
    if r == 0.0 {
        return identity(m);
    }
    let phase = x[0].unit().unwrap_or(Quaternion::ONE);
    let mut v = x.to_vec();
    v[0] -= phase * r;
    let vv: f64 = v.iter().map(|q| q.norm_sqr()).sum();
    let mut h = identity(m);
    if vv > (1e-15 * r) * (1e-15 * r) {
        for i in 0..m {
            for j in 0..m {
                h[i][j] -= v[i] * v[j].conj() * (2.0 / vv);
            }
        }
    }
    for entry in h[0].iter_mut() {
        *entry = phase.conj() * *entry;
    }
    h
}

/// Unitary `A` with `A x = y`, for `|x| = |y|`.
pub fn householder_map(x: &[Quaternion], y: &[Quaternion]) -> QMatrix {
    mat_mul(&adjoint(&to_first_axis(y)), &to_first_axis(x))
}

/// 4×4 real matrix of `p ↦ q p`.
pub fn left_mul_matrix(q: Quaternion) -> [[f64; 4]; 4] {
    let Quaternion { a0, a1, a2, a3 } = q;
    [[a0, -a1, -a2, -a3], [a1, a0, -a3, a2], [a2, a3, a0, -a1], [a3, -a2, a1, a0]]
}

/// Numerical rank of the columns over ℍ acting on the right, i.e. the real
/// rank of the realified matrix divided by four (rounded down).
/// Singular values below `rel_tol · σ_max` count as zero.
pub fn right_rank(cols: &[Vec<Quaternion>], rel_tol: f64) -> usize {
    real_rank(cols, rel_tol) / 4
}

/// Real rank of the `4m × 4k` embedding of `k` columns of length `m`.
pub fn real_rank(cols: &[Vec<Quaternion>], rel_tol: f64) -> usize {
    let sv = realified_singular_values(cols);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * smax).count()
}

/// Smallest singular value of the realified matrix relative to the largest.
pub fn relative_min_singular_value(cols: &[Vec<Quaternion>]) -> f64 {
    let sv = realified_singular_values(cols);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax == 0.0 {
        0.0
    } else {
        smin / smax
    }
}

fn realified_singular_values(cols: &[Vec<Quaternion>]) -> Vec<f64> {
    let k = cols.len();
    let m = cols.first().map_or(0, Vec::len);
    let mut big = DMatrix::<f64>::zeros(4 * m, 4 * k);
    for (c, col) in cols.iter().enumerate() {
        for (r, q) in col.iter().enumerate() {
            for (a, row) in left_mul_matrix(*q).iter().enumerate() {
                for (b, val) in row.iter().enumerate() {
                    big[(4 * r + a, 4 * c + b)] = *val;
                }
            }
        }
    }
    big.singular_values().iter().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_q(rng: &mut impl Rng) -> Quaternion {
        Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
    }

    fn rand_vec(rng: &mut impl Rng, m: usize) -> Vec<Quaternion> {
        (0..m).map(|_| rand_q(rng)).collect()
    }

    #[test]
    fn left_mul_matches_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let (q, p) = (rand_q(&mut rng), rand_q(&mut rng));
            let l = left_mul_matrix(q);
            let v: [f64; 4] = p.into();
            let out: Vec<f64> = l.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
            let expect: [f64; 4] = (q * p).into();
            for (a, b) in out.iter().zip(expect) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gram_schmidt_gives_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in 1..5 {
            let cols: Vec<_> = (0..m).map(|_| rand_vec(&mut rng, m)).collect();
            let q = from_columns(&gram_schmidt(&cols).unwrap());
            assert!(unitarity_defect(&q) < 1e-12);
        }
        let v = rand_vec(&mut rng, 3);
        let w: Vec<_> = v.iter().map(|x| *x * Quaternion::new(0.2, 1.0, -0.4, 0.3)).collect();
        assert!(gram_schmidt(&[v, w]).is_none());
    }

    #[test]
    fn householder_maps_x_to_y() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in 1..5 {
            for _ in 0..20 {
                let x = rand_vec(&mut rng, m);
                let y0 = rand_vec(&mut rng, m);
                let s = norm(&x) / norm(&y0);
                let y: Vec<_> = y0.iter().map(|q| *q * s).collect();
                let a = householder_map(&x, &y);
                assert!(unitarity_defect(&a) < 1e-12);
                let ax = mat_vec(&a, &x);
                for (p, q) in ax.iter().zip(&y) {
                    assert!(p.dist(*q) < 1e-12, "m={m}");
                }
            }
        }
        let x = vec![Quaternion::J, Quaternion::ZERO];
        let a = householder_map(&x, &x);
        assert!(mat_vec(&a, &x)[0].dist(Quaternion::J) < 1e-15);
    }

    #[test]
    fn rank_detects_right_dependence() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cols: Vec<_> = (0..3).map(|_| rand_vec(&mut rng, 4)).collect();
        assert_eq!(right_rank(&cols, 1e-8), 3);
        let (l0, l1) = (rand_q(&mut rng), rand_q(&mut rng));
        let dep: Vec<_> = cols[0].iter().zip(&cols[1]).map(|(a, b)| *a * l0 + *b * l1).collect();
        let mut with_dep = cols.clone();
        with_dep.push(dep);
        assert_eq!(right_rank(&with_dep, 1e-8), 3);
        // a left combination is generically not a right combination
        let left: Vec<_> = cols[0].iter().zip(&cols[1]).map(|(a, b)| l0 * *a + l1 * *b).collect();
        let mut with_left = cols;
        with_left.push(left);
        assert_eq!(right_rank(&with_left, 1e-8), 4);
    }
}
