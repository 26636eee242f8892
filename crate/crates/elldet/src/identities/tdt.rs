//! The trigonometric determinant transformation (pure q-series, p = 0):
//!
//! ```text
//! det[ (z_j)^trig_{k-1} / (a_j z_j)^trig_{k-1} ]
//!   = (-1)^C(n,2) q^C(n,3) det[ z_j^{k-1} (a_j)^trig_{k-1} / (a_j z_j)^trig_{k-1} ]
//! ```
//!
//! with no balancing condition. Verified directly in q-series arithmetic;
//! it is not derived from the elliptic transformation here.

use super::{TdtParams, VerificationReport};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::numeric::{binom, CScalar, PrecisionContext};

/// Prefix table of `(x)^trig_0 .. (x)^trig_{k_max}`, optionally pole-guarded.
fn trig_table(
    arg: &CScalar,
    k_max: u32,
    q: &CScalar,
    guard: Option<&str>,
    ctx: &PrecisionContext,
) -> Result<Vec<CScalar>> {
    let one = ctx.one();
    let threshold = ctx.pole_threshold();
    let mut table = Vec::with_capacity(k_max as usize + 1);
    table.push(ctx.one());
    let mut acc = ctx.one();
    let mut x = arg.clone();
    for i in 0..k_max {
        let factor = &one - &x;
        if let Some(label) = guard {
            if factor.abs().to_f64() < threshold {
                return Err(Error::DegenerateParameters {
                    factor: format!("{label}: trig factor {} vanishes", i + 1),
                });
            }
        }
        acc = &acc * &factor;
        x = &x * q;
        table.push(acc.clone());
    }
    Ok(table)
}

/// Evaluate both determinants and report the residual.
pub fn eval_tdt(params: &TdtParams, ctx: &PrecisionContext) -> Result<VerificationReport> {
    let n = params.n();
    let q = params.q();
    let k_max = n as u32 - 1;

    let mut z_tables = Vec::with_capacity(n);
    let mut a_tables = Vec::with_capacity(n);
    let mut az_tables = Vec::with_capacity(n);
    let mut z_powers = Vec::with_capacity(n);
    for j in 0..n {
        let z = &params.z()[j];
        let a = &params.a()[j];
        z_tables.push(trig_table(z, k_max, q, None, ctx)?);
        a_tables.push(trig_table(a, k_max, q, None, ctx)?);
        az_tables.push(trig_table(&(a * z), k_max, q, Some("(a_j z_j)^trig"), ctx)?);
        let mut powers = Vec::with_capacity(n);
        let mut acc = ctx.one();
        for _ in 0..n {
            powers.push(acc.clone());
            acc = &acc * z;
        }
        z_powers.push(powers);
    }

    let lhs_matrix =
        ComplexMatrix::from_fn(n, |j, k| &z_tables[j][k] / &az_tables[j][k]);
    let rhs_matrix = ComplexMatrix::from_fn(n, |j, k| {
        &(&z_powers[j][k] * &a_tables[j][k]) / &az_tables[j][k]
    });

    let sign = ctx.from_int(-1).pow_int(binom(n as u32, 2))?;
    let scale = &sign * &q.pow_int(binom(n as u32, 3))?;
    let lhs = lhs_matrix.det_lu(ctx);
    let rhs = &scale * &rhs_matrix.det_lu(ctx);
    Ok(VerificationReport::from_sides("tdt", lhs, rhs, params.digest(), ctx))
}

/// Shared pole guard for sampler-side rejection.
pub(crate) fn pole_check(params: &TdtParams, ctx: &PrecisionContext) -> Result<()> {
    let k_max = params.n() as u32 - 1;
    for j in 0..params.n() {
        let az = &params.a()[j] * &params.z()[j];
        trig_table(&az, k_max, params.q(), Some("(a_j z_j)^trig"), ctx)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rel_residual;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256, 32, 1e-40).unwrap()
    }

    #[test]
    fn order_one_is_trivial() {
        let c = ctx();
        let p = TdtParams::new(
            c.scalar(0.5, 0.0),
            vec![c.scalar(0.7, 0.3)],
            vec![c.scalar(1.4, -0.2)],
        )
        .unwrap();
        let report = eval_tdt(&p, &c).unwrap();
        assert_eq!(report.lhs, c.one());
        assert_eq!(report.rhs, c.one());
        assert!(report.passed);
    }

    #[test]
    fn two_by_two_hand_case() {
        let c = ctx();
        // z = (2, 3), a = (5, 7), q = 1/2
        let z = [c.from_int(2), c.from_int(3)];
        let a = [c.from_int(5), c.from_int(7)];
        let q = c.scalar(0.5, 0.0);
        let p = TdtParams::new(q.clone(), z.to_vec(), a.to_vec()).unwrap();
        let report = eval_tdt(&p, &c).unwrap();

        // Direct 2x2 expansion of both sides with scalar arithmetic.
        let one = c.one();
        let entry_lhs = |zj: &CScalar, aj: &CScalar| {
            // k = 1 column is 1; k = 2 column is (1-z)/(1-az)
            (&one - zj) / &(&one - &(aj * zj))
        };
        let l11 = one.clone();
        let l12 = entry_lhs(&z[0], &a[0]);
        let l21 = one.clone();
        let l22 = entry_lhs(&z[1], &a[1]);
        let lhs_direct = &(&l11 * &l22) - &(&l12 * &l21);
        assert!(rel_residual(&report.lhs, &lhs_direct).to_f64() < 1e-70);

        // rhs = (-1)^1 q^0 det[[1, z(1-a)/(1-az)], ...]
        let entry_rhs = |zj: &CScalar, aj: &CScalar| {
            &(zj * &(&one - aj)) / &(&one - &(aj * zj))
        };
        let r12 = entry_rhs(&z[0], &a[0]);
        let r22 = entry_rhs(&z[1], &a[1]);
        let rhs_direct = -(&(&one * &r22) - &(&r12 * &one));
        assert!(rel_residual(&report.rhs, &rhs_direct).to_f64() < 1e-70);

        assert!(report.passed, "residual {:e}", report.rel_residual.to_f64());
    }

    #[test]
    fn order_six_random_instance_passes() {
        let c = ctx();
        let vals = [
            (0.7, 0.3),
            (-0.5, 0.6),
            (1.2, -0.4),
            (0.3, -0.9),
            (-1.1, -0.2),
            (0.45, 0.85),
        ];
        let z: Vec<_> = vals.iter().map(|&(re, im)| c.scalar(re, im)).collect();
        let a: Vec<_> = vals.iter().map(|&(re, im)| c.scalar(im + 1.5, re * 0.7)).collect();
        let p = TdtParams::new(c.scalar(0.6, 0.2), z, a).unwrap();
        let report = eval_tdt(&p, &c).unwrap();
        assert!(report.passed, "residual {:e}", report.rel_residual.to_f64());
        assert!(report.rel_residual.to_f64() <= 1e-40);
    }
}
