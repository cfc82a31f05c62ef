//! Robust 2D orientation and in-circle predicates.
//!
//! Each predicate is evaluated in f64 first; a conservative forward error
//! bound decides whether that sign can be trusted. When it cannot, the
//! determinant is recomputed exactly over arbitrary-precision integers
//! obtained by scaling the inputs to a common power of two, so the returned
//! sign is always the sign of the exact real-arithmetic value.

use alloc::vec::Vec;

use num_bigint::BigInt;

/// Safe overestimates of the naive-evaluation error constants. Being larger
/// than the tight bounds only sends more cases to the exact path.
const ORIENT_BOUND: f64 = 1e-13;
const INCIRCLE_BOUND: f64 = 1e-12;

/// Sign of the signed area of triangle (a, b, c).
///
/// Positive if the triangle winds counter-clockwise, negative if clockwise,
/// zero if the points are exactly collinear.
pub fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> i8 {
    let detleft = (b[0] - a[0]) * (c[1] - a[1]);
    let detright = (b[1] - a[1]) * (c[0] - a[0]);
    let det = detleft - detright;
    let detsum = detleft.abs() + detright.abs();
    if det.abs() > ORIENT_BOUND * detsum {
        return sign_of(det);
    }
    orient2d_exact(a, b, c)
}

/// Position of `d` relative to the circumcircle of triangle (a, b, c).
///
/// Returns +1 if `d` lies strictly inside the circumcircle, -1 if strictly
/// outside, 0 if exactly on it (or if a, b, c are collinear). Orientation of
/// (a, b, c) is handled internally.
pub fn in_circumcircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> i8 {
    match orient2d(a, b, c) {
        0 => 0,
        1 => incircle_ccw(a, b, c, d),
        _ => incircle_ccw(a, c, b, d),
    }
}

fn incircle_ccw(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> i8 {
    let adx = a[0] - d[0];
    let ady = a[1] - d[1];
    let bdx = b[0] - d[0];
    let bdy = b[1] - d[1];
    let cdx = c[0] - d[0];
    let cdy = c[1] - d[1];

    let bdxcdy = bdx * cdy;
    let cdxbdy = cdx * bdy;
    let alift = adx * adx + ady * ady;

    let cdxady = cdx * ady;
    let adxcdy = adx * cdy;
    let blift = bdx * bdx + bdy * bdy;

    let adxbdy = adx * bdy;
    let bdxady = bdx * ady;
    let clift = cdx * cdx + cdy * cdy;

    let det =
        alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    let permanent = alift * (bdxcdy.abs() + cdxbdy.abs())
        + blift * (cdxady.abs() + adxcdy.abs())
        + clift * (adxbdy.abs() + bdxady.abs());
    if det.abs() > INCIRCLE_BOUND * permanent {
        return sign_of(det);
    }
    incircle_exact(a, b, c, d)
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

// ── exact fallback ─────────────────────────────────────────────────────

/// Decompose a finite f64 into (mantissa, exponent) with `x = m * 2^e`.
fn decompose(x: f64) -> (i64, i32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (m, e) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1i64 << 52), exp_bits - 1075)
    };
    if bits >> 63 == 1 {
        (-m, e)
    } else {
        (m, e)
    }
}

/// Scale the values to exact integers over a common power of two.
fn to_common_ints(vals: &[f64]) -> Vec<BigInt> {
    let decomposed: Vec<(i64, i32)> = vals.iter().map(|&v| decompose(v)).collect();
    let e_min = decomposed
        .iter()
        .filter(|&&(m, _)| m != 0)
        .map(|&(_, e)| e)
        .min()
        .unwrap_or(0);
    decomposed
        .into_iter()
        .map(|(m, e)| {
            if m == 0 {
                BigInt::from(0)
            } else {
                BigInt::from(m) << ((e - e_min) as u32)
            }
        })
        .collect()
}

fn orient2d_exact(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> i8 {
    let v = to_common_ints(&[a[0], a[1], b[0], b[1], c[0], c[1]]);
    let (ax, ay, bx, by, cx, cy) = (&v[0], &v[1], &v[2], &v[3], &v[4], &v[5]);
    let det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
    bigint_sign(&det)
}

fn incircle_exact(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> i8 {
    let v = to_common_ints(&[a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1]]);
    let adx = &v[0] - &v[6];
    let ady = &v[1] - &v[7];
    let bdx = &v[2] - &v[6];
    let bdy = &v[3] - &v[7];
    let cdx = &v[4] - &v[6];
    let cdy = &v[5] - &v[7];

    let alift = &adx * &adx + &ady * &ady;
    let blift = &bdx * &bdx + &bdy * &bdy;
    let clift = &cdx * &cdx + &cdy * &cdy;

    let det = alift * (&bdx * &cdy - &cdx * &bdy) + blift * (&cdx * &ady - &adx * &cdy)
        + clift * (&adx * &bdy - &bdx * &ady);
    bigint_sign(&det)
}

fn bigint_sign(v: &BigInt) -> i8 {
    match v.sign() {
        num_bigint::Sign::Plus => 1,
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
    }
}
