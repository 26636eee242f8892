//! Warnaar's determinant evaluation:
//!
//! ```text
//! det[ (b x_j, c/x_j)_{k-1} / (a/b x_j, a x_j/c)_{k-1} ]
//!   = c^C(n,2) q^C(n,3)
//!     * prod_{i<j} x_i^{-1} theta(x_i/x_j) theta(b x_i x_j / c)
//!     * prod_j (a/bc, a q^{j-2})_{j-1} / (a/b x_j, a x_j/c)_{n-1} .
//! ```
//!
//! Coincident row points x_i = x_j drive both sides to a legitimate zero
//! through theta(x_i/x_j) = theta(1) = 0 on the right and equal rows on
//! the left.

use super::{guarded_table, VerificationReport, WdParams};
use crate::error::Result;
use crate::linalg::ComplexMatrix;
use crate::numeric::{binom, CScalar, PrecisionContext};

/// Evaluate both sides and report the residual.
pub fn eval_warnaar(params: &WdParams, ctx: &PrecisionContext) -> Result<VerificationReport> {
    let tables = RowTables::build(params, ctx)?;
    let lhs = lhs_det(params, &tables, ctx)?;
    let rhs = rhs_value(params, &tables, ctx)?;
    Ok(VerificationReport::from_sides(
        "warnaar",
        lhs,
        rhs,
        params.digest(),
        ctx,
    ))
}

/// The closed form on the right-hand side, exposed so the determinant
/// transformation can be cross-checked against it on constant-d instances.
pub fn warnaar_rhs(params: &WdParams, ctx: &PrecisionContext) -> Result<CScalar> {
    let tables = RowTables::build(params, ctx)?;
    rhs_value(params, &tables, ctx)
}

/// Per-row prefix tables shared by both sides; the denominators carry the
/// pole guard.
struct RowTables {
    num_bx: Vec<Vec<CScalar>>,
    num_cx: Vec<Vec<CScalar>>,
    den_abx: Vec<Vec<CScalar>>,
    den_axc: Vec<Vec<CScalar>>,
}

impl RowTables {
    fn build(params: &WdParams, ctx: &PrecisionContext) -> Result<Self> {
        let base = params.base();
        let n = params.n() as u32;
        let (a, b, c) = (params.a(), params.b(), params.c());
        let mut num_bx = Vec::with_capacity(params.n());
        let mut num_cx = Vec::with_capacity(params.n());
        let mut den_abx = Vec::with_capacity(params.n());
        let mut den_axc = Vec::with_capacity(params.n());
        for x in params.x() {
            let bx = b * x;
            num_bx.push(base.pochhammer_table(&bx, n - 1, ctx)?);
            num_cx.push(base.pochhammer_table(&(c / x), n - 1, ctx)?);
            den_abx.push(guarded_table(base, &(a / &bx), n - 1, "a/bx_j", ctx)?);
            den_axc.push(guarded_table(base, &(&(a * x) / c), n - 1, "ax_j/c", ctx)?);
        }
        Ok(Self {
            num_bx,
            num_cx,
            den_abx,
            den_axc,
        })
    }
}

fn lhs_det(params: &WdParams, tables: &RowTables, ctx: &PrecisionContext) -> Result<CScalar> {
    let n = params.n();
    let matrix = ComplexMatrix::from_fn(n, |j, k| {
        &(&tables.num_bx[j][k] * &tables.num_cx[j][k])
            / &(&tables.den_abx[j][k] * &tables.den_axc[j][k])
    });
    Ok(matrix.det_lu(ctx))
}

fn rhs_value(params: &WdParams, tables: &RowTables, ctx: &PrecisionContext) -> Result<CScalar> {
    let base = params.base();
    let n = params.n();
    let (a, b, c) = (params.a(), params.b(), params.c());
    let x = params.x();

    let mut value = &c.pow_int(binom(n as u32, 2))? * &base.q_pow(binom(n as u32, 3));

    for i in 0..n {
        for j in i + 1..n {
            let ratio = &x[i] / &x[j];
            let pair = &base.theta_product(&ratio, ctx)?
                * &base.theta_product(&(&(&(b * &x[i]) * &x[j]) / c), ctx)?;
            value = &value * &(&pair / &x[i]);
        }
    }

    let a_over_bc = a / &(b * c);
    let abc_table = base.pochhammer_table(&a_over_bc, n as u32 - 1, ctx)?;
    for j in 1..=n {
        let aq = a * &base.q_pow(j as i64 - 2);
        let numerator = &abc_table[j - 1] * &base.pochhammer(&aq, j as u32 - 1, ctx)?;
        let denominator = &tables.den_abx[j - 1][n - 1] * &tables.den_axc[j - 1][n - 1];
        value = &value * &(&numerator / &denominator);
    }
    Ok(value)
}

/// Shared pole guard for sampler-side rejection.
pub(crate) fn pole_check(params: &WdParams, ctx: &PrecisionContext) -> Result<()> {
    RowTables::build(params, ctx).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::EllipticBase;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256, 32, 1e-35).unwrap()
    }

    fn params(c: &PrecisionContext, x: Vec<CScalar>) -> WdParams {
        let base = EllipticBase::new(c.scalar(0.3, 0.05), c.scalar(0.55, -0.1)).unwrap();
        WdParams::new(
            base,
            c.scalar(1.15, 0.3),
            c.scalar(0.8, -0.25),
            c.scalar(0.95, 0.4),
            x,
            c,
        )
        .unwrap()
    }

    #[test]
    fn order_one_is_trivially_one_equals_one() {
        let c = ctx();
        let p = params(&c, vec![c.scalar(0.7, 0.2)]);
        let report = eval_warnaar(&p, &c).unwrap();
        assert_eq!(report.lhs, c.one());
        assert!(crate::numeric::rel_residual(&report.rhs, &c.one()).to_f64() < 1e-80);
        assert!(report.passed);
    }

    #[test]
    fn coincident_points_give_zero_on_both_sides() {
        let c = ctx();
        let x = c.scalar(0.65, -0.15);
        let p = params(&c, vec![x.clone(), x]);
        let report = eval_warnaar(&p, &c).unwrap();
        assert!(report.lhs.abs().to_f64() < 1e-70);
        assert!(report.rhs.abs().to_f64() < 1e-70);
        assert!(report.passed);
    }

    #[test]
    fn random_order_four_instance_passes() {
        let c = ctx();
        let p = params(
            &c,
            vec![
                c.scalar(0.7, 0.2),
                c.scalar(-0.5, 0.6),
                c.scalar(1.2, -0.4),
                c.scalar(0.3, -0.9),
            ],
        );
        let report = eval_warnaar(&p, &c).unwrap();
        assert!(report.passed, "residual {:e}", report.rel_residual.to_f64());
        assert!(report.rel_residual.to_f64() <= 1e-35);
    }
}
