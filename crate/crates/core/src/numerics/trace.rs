use crate::error::Result;
use crate::numerics::matrix::{dot, DenseMatrix};
use crate::scalar::Scalar;

/// Rows `j` are visited in blocks of this many so they stay cache resident.
const BLOCK: usize = 64;

/// `tr(M³)` for a symmetric matrix, without an eigendecomposition.
///
/// For symmetric `M`, `(M²)ᵢⱼ = rowᵢ · rowⱼ`, so
/// `tr(M³) = Σᵢⱼ Mᵢⱼ (rowᵢ · rowⱼ)`. Only the upper triangle of the
/// pairwise row products is formed, which halves the `O(n³)` work.
/// The summation order depends only on `n`.
pub fn trace_cubed<T: Scalar>(m: &DenseMatrix<T>) -> Result<T> {
    let n = m.ensure_square()?;
    let mut off = vec![T::zero(); n];
    for jb in (0..n).step_by(BLOCK) {
        let jend = (jb + BLOCK).min(n);
        for (i, acc) in off.iter_mut().enumerate().take(jend) {
            let ri = m.row(i);
            let mut j = jb.max(i + 1);
            while j + 4 <= jend {
                let d = dot4(ri, [m.row(j), m.row(j + 1), m.row(j + 2), m.row(j + 3)]);
                *acc += (ri[j] * d[0] + ri[j + 1] * d[1]) + (ri[j + 2] * d[2] + ri[j + 3] * d[3]);
                j += 4;
            }
            for j in j..jend {
                *acc += ri[j] * dot(ri, m.row(j));
            }
        }
    }
    let two = T::of(2.0);
    let mut total = T::zero();
    for (i, &o) in off.iter().enumerate() {
        let ri = m.row(i);
        let mut row_acc = two * o;
        if ri[i] != T::zero() {
            row_acc += ri[i] * dot(ri, ri);
        }
        total += row_acc;
    }
    Ok(total)
}

/// Four dot products against one shared left operand, four lanes each.
fn dot4<T: Scalar>(x: &[T], ys: [&[T]; 4]) -> [T; 4] {
    let len = x.len();
    let mut acc = [[T::zero(); 4]; 4];
    let full = len - len % 4;
    let mut t = 0;
    while t < full {
        let xs = &x[t..t + 4];
        for (k, y) in ys.iter().enumerate() {
            let ys = &y[t..t + 4];
            for l in 0..4 {
                acc[k][l] += xs[l] * ys[l];
            }
        }
        t += 4;
    }
    let mut out = [T::zero(); 4];
    for (k, y) in ys.iter().enumerate() {
        let mut tail = T::zero();
        for u in full..len {
            tail += x[u] * y[u];
        }
        out[k] = (acc[k][0] + acc[k][2]) + (acc[k][1] + acc[k][3]) + tail;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::SeededStream;
    use rand::Rng;

    fn triple_sum(m: &DenseMatrix<f64>) -> f64 {
        let n = m.rows();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s += m[(i, j)] * m[(j, k)] * m[(k, i)];
                }
            }
        }
        s
    }

    fn random_symmetric(n: usize, rng: &mut impl Rng) -> DenseMatrix<f64> {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.gen_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(trace_cubed(&DenseMatrix::<f64>::zeros(5, 5)).unwrap(), 0.0);
    }

    #[test]
    fn scaled_complement_of_identity() {
        // a(J - I) has eigenvalues (2a, -a, -a): 8a³ - 2a³ = 6a³.
        let a = 0.5;
        let m: DenseMatrix<f64> = DenseMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { a });
        assert!((trace_cubed(&m).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn matches_triple_loop() {
        let mut rng = SeededStream::new(11, 0);
        for r in 0..100 {
            // Sizes straddle the lane width and the block edge.
            let m = random_symmetric([8, 3, 13, 70][r % 4], &mut rng);
            let fast = trace_cubed(&m).unwrap();
            assert!((fast - triple_sum(&m)).abs() <= 1e-10);
        }
    }

    #[test]
    fn non_square_rejected() {
        assert!(trace_cubed(&DenseMatrix::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn single_precision() {
        let m = DenseMatrix::from_fn(3, 3, |i, j| if i == j { 0.0f32 } else { 0.5 });
        assert!((trace_cubed(&m).unwrap() - 0.75).abs() < 1e-6);
    }
}
