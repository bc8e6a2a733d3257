use crate::error::{Error, Result};

/// Spherical polynomial `P_j(t) = j! (m-2)! / (j+m-2)! · C_j^{(m-1)/2}(t)` of
/// the sphere `S^m`, normalized so that `P_j(1) = 1`.
pub fn spherical_poly(m: usize, j: usize, t: f64) -> Result<f64> {
    Ok(*spherical_poly_upto(m, j, t)?.last().unwrap())
}

/// `[P_0(t), ..., P_j(t)]` for `S^m`.
///
/// Normalized Gegenbauer recurrence:
/// `(j + m - 2) P_j = (2j + m - 3) t P_{j-1} - (j - 1) P_{j-2}`.
pub fn spherical_poly_upto(m: usize, j: usize, t: f64) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::domain(format!("spherical polynomials need m >= 2, got {m}")));
    }
    let mf = m as f64;
    let mut out = Vec::with_capacity(j + 1);
    out.push(1.0);
    if j >= 1 {
        out.push(t);
    }
    for d in 2..=j {
        let df = d as f64;
        let next = ((2.0 * df + mf - 3.0) * t * out[d - 1] - (df - 1.0) * out[d - 2]) / (df + mf - 2.0);
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::JacobiParams;

    fn legendre(j: usize, t: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, t);
        if j == 0 {
            return 1.0;
        }
        for d in 2..=j {
            let df = d as f64;
            let p2 = ((2.0 * df - 1.0) * t * p1 - (df - 1.0) * p0) / df;
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    #[test]
    fn one_at_one() {
        for m in 2..8 {
            for j in 0..30 {
                assert!((spherical_poly(m, j, 1.0).unwrap() - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn two_sphere_is_legendre() {
        for j in 0..20 {
            for i in 0..=40 {
                let t = -1.0 + 0.05 * i as f64;
                assert!((spherical_poly(2, j, t).unwrap() - legendre(j, t)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_circle() {
        assert!(spherical_poly(1, 2, 0.3).is_err());
    }

    // R_m^{(n/2-1, -1/2)}(2t² - 1) = P_{2m}(t) on S^n.
    #[test]
    fn even_degree_jacobi_link() {
        for n in 2..=6 {
            let params = JacobiParams::new(n as f64 / 2.0 - 1.0, -0.5).unwrap();
            for m in 0..10 {
                for i in 0..=20 {
                    let t = -1.0 + 0.1 * i as f64;
                    let lhs = params.eval_r(m, 2.0 * t * t - 1.0);
                    let rhs = spherical_poly(n, 2 * m, t).unwrap();
                    assert!((lhs - rhs).abs() < 1e-12, "n={n} m={m} t={t}");
                }
            }
        }
    }
}
