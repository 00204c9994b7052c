//! Carlson symmetric integrals and Jacobi elliptic functions (parameter `m`).

use std::f64::consts::PI;

const ERRTOL: f64 = 5e-4;

/// `R_C(x, y)` for `x >= 0`, `y > 0`.
pub fn rc(mut x: f64, mut y: f64) -> f64 {
    const C1: f64 = 0.3;
    const C2: f64 = 1.0 / 7.0;
    const C3: f64 = 0.375;
    const C4: f64 = 9.0 / 22.0;
    loop {
        let lambda = 2.0 * x.sqrt() * y.sqrt() + y;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        let ave = (x + y + y) / 3.0;
        let s = (y - ave) / ave;
        if s.abs() < ERRTOL {
            return (1.0 + s * s * (C1 + s * (C2 + s * (C3 + s * C4)))) / ave.sqrt();
        }
    }
}

/// `R_F(x, y, z)`; at most one argument may be zero.
pub fn rf(mut x: f64, mut y: f64, mut z: f64) -> f64 {
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        let ave = (x + y + z) / 3.0;
        let (dx, dy, dz) = ((ave - x) / ave, (ave - y) / ave, (ave - z) / ave);
        if dx.abs().max(dy.abs()).max(dz.abs()) < ERRTOL {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / ave.sqrt();
        }
    }
}

/// `R_D(x, y, z)`; `x, y >= 0` (not both zero), `z > 0`.
pub fn rd(mut x: f64, mut y: f64, mut z: f64) -> f64 {
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 6.0;
    const C3: f64 = 9.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 0.25 * C3;
    const C6: f64 = 1.5 * C4;
    let mut sum = 0.0;
    let mut fac = 1.0;
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (z + lambda));
        fac *= 0.25;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        let ave = 0.2 * (x + y + 3.0 * z);
        let (dx, dy, dz) = ((ave - x) / ave, (ave - y) / ave, (ave - z) / ave);
        if dx.abs().max(dy.abs()).max(dz.abs()) < ERRTOL {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - 6.0 * eb;
            let ee = ed + ec + ec;
            return 3.0 * sum
                + fac
                    * (1.0
                        + ed * (-C1 + C5 * ed - C6 * dz * ee)
                        + dz * (C2 * ee + dz * (-C3 * ec + dz * C4 * ea)))
                    / (ave * ave.sqrt());
        }
    }
}

/// `R_J(x, y, z, p)` for `p > 0`.
pub fn rj(mut x: f64, mut y: f64, mut z: f64, mut p: f64) -> f64 {
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 3.0;
    const C3: f64 = 3.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 0.75 * C3;
    const C6: f64 = 1.5 * C4;
    const C7: f64 = 0.5 * C2;
    const C8: f64 = C3 + C3;
    let mut sum = 0.0;
    let mut fac = 1.0;
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        let alpha = (p * (sx + sy + sz) + sx * sy * sz).powi(2);
        let beta = p * (p + lambda).powi(2);
        sum += fac * rc(alpha, beta);
        fac *= 0.25;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        p = 0.25 * (p + lambda);
        let ave = 0.2 * (x + y + z + p + p);
        let (dx, dy, dz, dp) = (
            (ave - x) / ave,
            (ave - y) / ave,
            (ave - z) / ave,
            (ave - p) / ave,
        );
        if dx.abs().max(dy.abs()).max(dz.abs()).max(dp.abs()) < ERRTOL {
            let ea = dx * (dy + dz) + dy * dz;
            let eb = dx * dy * dz;
            let ec = dp * dp;
            let ed = ea - 3.0 * ec;
            let ee = eb + 2.0 * dp * (ea - ec);
            return 3.0 * sum
                + fac
                    * (1.0
                        + ed * (-C1 + C5 * ed - C6 * ee)
                        + eb * (C7 + dp * (-C8 + dp * C4))
                        + dp * ea * (C2 - dp * C3)
                        - C2 * dp * ec)
                    / (ave * ave.sqrt());
        }
    }
}

/// Complete integral of the first kind, `K(m)`.
pub fn ellip_k(m: f64) -> f64 {
    PI / (2.0 * agm(1.0, (1.0 - m).sqrt()))
}

/// Complete integral of the second kind, `E(m)`.
pub fn ellip_e(m: f64) -> f64 {
    rf(0.0, 1.0 - m, 1.0) - m / 3.0 * rd(0.0, 1.0 - m, 1.0)
}

/// `(K(m) - E(m)) / m`, finite as `m → 0`.
pub fn ellip_d(m: f64) -> f64 {
    rd(0.0, 1.0 - m, 1.0) / 3.0
}

/// Complete integral of the third kind, `Π(n | m) = ∫_0^{π/2} dθ / ((1 - n sin²θ) √(1 - m sin²θ))`, `n < 1`.
pub fn ellip_pi(n: f64, m: f64) -> f64 {
    rf(0.0, 1.0 - m, 1.0) + n / 3.0 * rj(0.0, 1.0 - m, 1.0, 1.0 - n)
}

/// Incomplete `Π(n; φ | m)` given `sn, cn, dn` of the argument (`|φ| <= π/2`).
pub fn ellip_pi_incomplete(n: f64, sn: f64, cn: f64, dn: f64) -> f64 {
    let (c2, d2) = (cn * cn, dn * dn);
    sn * rf(c2, d2, 1.0) + n / 3.0 * sn.powi(3) * rj(c2, d2, 1.0, 1.0 - n * sn * sn)
}

pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 2.0 * f64::EPSILON * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    a
}

/// `(sn, cn, dn)(u | m)` for `0 <= m < 1` by the descending AGM.
pub fn jacobi(u: f64, m: f64) -> (f64, f64, f64) {
    if m == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    let mut a = vec![1.0];
    let mut c = vec![m.sqrt()];
    let mut b = (1.0 - m).sqrt();
    while c.last().unwrap().abs() > f64::EPSILON * a.last().unwrap() && a.len() < 64 {
        let (an, bn) = (*a.last().unwrap(), b);
        a.push(0.5 * (an + bn));
        c.push(0.5 * (an - bn));
        b = (an * bn).sqrt();
    }
    let last = a.len() - 1;
    let mut phi = (1u64 << last) as f64 * a[last] * u;
    for i in (1..=last).rev() {
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    // complementary form keeps digits near sn = ±1
    let dn2 = if sn * sn < 0.5 {
        1.0 - m * sn * sn
    } else {
        (1.0 - m) + m * cn * cn
    };
    (sn, cn, dn2.sqrt())
}
