use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::{CMatrix, C64};

const MAX_SWEEPS: usize = 80;

/// Singular values in descending order, by one-sided (Hestenes) Jacobi.
///
/// One-sided Jacobi keeps small singular values accurate relative to the
/// column scale, which matters for the trace-class norms built on top of it.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    // work on columns of the taller orientation
    let m = if a.rows() >= a.cols() { a.clone() } else { a.adjoint() };
    let cols = m.cols();
    let mut colv: Vec<Vec<C64>> = (0..cols).map(|j| m.column(j)).collect();
    let norm2 = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = norm2(&colv[p]);
                let beta = norm2(&colv[q]);
                let gamma: C64 = colv[p].iter().zip(&colv[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let ph = phase.conj();
                let (head, tail) = colv.split_at_mut(q);
                for (zp, zq) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let xp = *zp;
                    let xq = *zq * ph;
                    *zp = xp * c - xq * s;
                    *zq = xp * s + xq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = colv.iter().map(|v| norm2(v).sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
