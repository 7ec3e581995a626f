use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::{CMatrix, C64, ZERO};

const MAX_SWEEPS: usize = 64;

/// Eigen-decomposition of a Hermitian matrix: `a = vectors · diag(values) · vectors*`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Orthogonal projection onto the span of the eigenvectors selected by `keep`.
    pub fn projection(&self, mut keep: impl FnMut(f64) -> bool) -> CMatrix {
        let n = self.vectors.rows();
        let mut p = CMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            if !keep(lam) {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors[(i, k)];
                if vi == ZERO {
                    continue;
                }
                for j in 0..n {
                    p[(i, j)] += vi * self.vectors[(j, k)].conj();
                }
            }
        }
        p
    }

    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_real_diag(&self.values);
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// The input is replaced by its Hermitian part first, so small anti-Hermitian
/// noise is discarded.
pub fn hermitian_eigen(a: &CMatrix) -> HermitianEigen {
    assert!(a.is_square(), "eigen-decomposition of a non-square matrix");
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_norm();
    if n > 1 && scale > 0.0 {
        let tol = f64::EPSILON * scale;
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= tol {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    rotate(&mut m, &mut v, p, q);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    HermitianEigen { values, vectors }
}

fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let b = m[(p, q)];
    let babs = b.norm();
    if babs == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // skip rotations that cannot change the diagonal in floating point
    if babs < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        m[(p, q)] = ZERO;
        m[(q, p)] = ZERO;
        return;
    }
    let phase = b / babs;
    let theta = (aqq - app) / (2.0 * babs);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // U acts on coordinates (p, q): col p = (c, -s e^{-iφ}), col q = (s, c e^{-iφ})
    let ph = phase.conj();
    let up_p = C64::new(c, 0.0);
    let uq_p = -ph * s;
    let up_q = C64::new(s, 0.0);
    let uq_q = ph * c;
    let n = m.rows();
    // M <- M U
    for i in 0..n {
        let mp = m[(i, p)];
        let mq = m[(i, q)];
        m[(i, p)] = mp * up_p + mq * uq_p;
        m[(i, q)] = mp * up_q + mq * uq_q;
    }
    // M <- U* M
    for j in 0..n {
        let mp = m[(p, j)];
        let mq = m[(q, j)];
        m[(p, j)] = up_p.conj() * mp + uq_p.conj() * mq;
        m[(q, j)] = up_q.conj() * mp + uq_q.conj() * mq;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
    for i in 0..n {
        let vp = v[(i, p)];
        let vq = v[(i, q)];
        v[(i, p)] = vp * up_p + vq * uq_p;
        v[(i, q)] = vp * up_q + vq * uq_q;
    }
}
