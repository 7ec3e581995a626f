//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (degrees 3, 5, 7, 9, 13), following Higham's 2005 selection of degree and
//! scaling from the 1-norm.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::CMatrix;

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `exp(a)` for a square complex matrix.
pub fn expm(a: &CMatrix) -> CMatrix {
    assert!(a.is_square(), "expm of a non-square matrix");
    let n = a.rows();
    if n == 0 {
        return a.clone();
    }
    let norm = a.norm_1();
    if norm == 0.0 {
        return CMatrix::identity(n);
    }
    for (theta, coeffs) in [
        (THETA_3, &B3[..]),
        (THETA_5, &B5[..]),
        (THETA_7, &B7[..]),
        (THETA_9, &B9[..]),
    ] {
        if norm <= theta {
            return pade_low(a, coeffs);
        }
    }
    let s = if norm <= THETA_13 {
        0
    } else {
        (norm / THETA_13).log2().ceil() as i32
    };
    let scaled = a.scale_real(0.5f64.powi(s));
    let mut r = pade_13(&scaled);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_low(a: &CMatrix, b: &[f64]) -> CMatrix {
    let n = a.rows();
    let ident = CMatrix::identity(n);
    let a2 = a * a;
    // even powers I, A², A⁴, ...
    let mut u_even = ident.scale_real(b[1]);
    let mut v = ident.scale_real(b[0]);
    let mut pow = ident;
    let m = b.len() - 1;
    let mut k = 2;
    while k <= m {
        pow = &pow * &a2;
        v.axpy(b[k].into(), &pow);
        if k < m {
            u_even.axpy(b[k + 1].into(), &pow);
        }
        k += 2;
    }
    let u = a * &u_even;
    rational(&u, &v)
}

fn pade_13(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let ident = CMatrix::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;

    let mut inner_u = a6.scale_real(b[13]);
    inner_u.axpy(b[11].into(), &a4);
    inner_u.axpy(b[9].into(), &a2);
    let mut u = &a6 * &inner_u;
    u.axpy(b[7].into(), &a6);
    u.axpy(b[5].into(), &a4);
    u.axpy(b[3].into(), &a2);
    u.axpy(b[1].into(), &ident);
    let u = a * &u;

    let mut inner_v = a6.scale_real(b[12]);
    inner_v.axpy(b[10].into(), &a4);
    inner_v.axpy(b[8].into(), &a2);
    let mut v = &a6 * &inner_v;
    v.axpy(b[6].into(), &a6);
    v.axpy(b[4].into(), &a4);
    v.axpy(b[2].into(), &a2);
    v.axpy(b[0].into(), &ident);
    rational(&u, &v)
}

/// `(V - U)⁻¹ (V + U)`
fn rational(u: &CMatrix, v: &CMatrix) -> CMatrix {
    let p = v + u;
    let q = v - u;
    q.solve(&p).expect("Padé denominator is singular")
}
