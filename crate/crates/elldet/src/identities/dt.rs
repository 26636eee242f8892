//! The determinant transformation for balanced shifted-factorial ratios,
//! its column-reversed companion, and the three further expressions the
//! two generate.
//!
//! All five share the left-hand side
//!
//! ```text
//! det[ (b_j, c_j, d_j)_{k-1} / (a/b_j, a/c_j, a/d_j)_{k-1} ],
//!     b_j c_j d_j independent of j,   e = a^2 / b_j c_j d_j,
//! ```
//!
//! and differ in prefactor and transformed determinant. Everything here is
//! built directly from the closed formulas; the composed route through the
//! parameter maps lives in [`crate::symmetry`] so the two stay independent
//! cross-checks.

use super::{guarded_table, DtParams, VerificationReport};
use crate::error::Result;
use crate::linalg::ComplexMatrix;
use crate::numeric::{binom, CScalar, PrecisionContext};

/// Which of the three composed transformations to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtBranch {
    /// sigma then tau applied to the transformed side.
    First,
    /// tau then sigma.
    Second,
    /// The palindromic composition sigma tau sigma = tau sigma tau.
    Third,
}

impl EtBranch {
    pub fn name(&self) -> &'static str {
        match self {
            EtBranch::First => "et1",
            EtBranch::Second => "et2",
            EtBranch::Third => "et3",
        }
    }
}

/// Determinant matrix of ratios `prod num_i(j) / prod den_i(j)` truncated at
/// `k-1`; denominator tables carry the pole guard.
fn ratio_matrix(
    params: &DtParams,
    num: impl Fn(usize) -> [CScalar; 3],
    den: impl Fn(usize) -> [CScalar; 3],
    den_label: &str,
    ctx: &PrecisionContext,
) -> Result<ComplexMatrix> {
    let base = params.base();
    let n = params.n();
    let k_max = n as u32 - 1;
    let mut rows = Vec::with_capacity(n);
    for j in 0..n {
        let num_args = num(j);
        let den_args = den(j);
        let mut num_tables = Vec::with_capacity(3);
        let mut den_tables = Vec::with_capacity(3);
        for arg in &num_args {
            num_tables.push(base.pochhammer_table(arg, k_max, ctx)?);
        }
        for (i, arg) in den_args.iter().enumerate() {
            let label = format!("{den_label}[{i}], row {}", j + 1);
            den_tables.push(guarded_table(base, arg, k_max, &label, ctx)?);
        }
        rows.push((num_tables, den_tables));
    }
    Ok(ComplexMatrix::from_fn(n, |j, k| {
        let (num_tables, den_tables) = &rows[j];
        let numerator = &(&num_tables[0][k] * &num_tables[1][k]) * &num_tables[2][k];
        let denominator = &(&den_tables[0][k] * &den_tables[1][k]) * &den_tables[2][k];
        &numerator / &denominator
    }))
}

/// The common left-hand determinant matrix.
pub fn lhs_matrix(params: &DtParams, ctx: &PrecisionContext) -> Result<ComplexMatrix> {
    let a = params.a().clone();
    ratio_matrix(
        params,
        |j| [params.b()[j].clone(), params.c()[j].clone(), params.d()[j].clone()],
        |j| [&a / &params.b()[j], &a / &params.c()[j], &a / &params.d()[j]],
        "(a/b_j, a/c_j, a/d_j)",
        ctx,
    )
}

/// det of the common left-hand side.
pub fn lhs_det(params: &DtParams, ctx: &PrecisionContext) -> Result<CScalar> {
    Ok(lhs_matrix(params, ctx)?.det_lu(ctx))
}

/// Transformed matrix of the main transformation:
/// `(a/b_j c_j, a/b_j d_j, a/c_j d_j)_{k-1} / (a/b_j, a/c_j, a/d_j)_{k-1}`.
pub fn dt_rhs_matrix(params: &DtParams, ctx: &PrecisionContext) -> Result<ComplexMatrix> {
    let a = params.a().clone();
    ratio_matrix(
        params,
        |j| {
            [
                &a / &(&params.b()[j] * &params.c()[j]),
                &a / &(&params.b()[j] * &params.d()[j]),
                &a / &(&params.c()[j] * &params.d()[j]),
            ]
        },
        |j| [&a / &params.b()[j], &a / &params.c()[j], &a / &params.d()[j]],
        "(a/b_j, a/c_j, a/d_j)",
        ctx,
    )
}

/// Column-reversal matrix:
/// `(q^{2-n} b_j/a, ...)_{k-1} / (q^{2-n}/b_j, ...)_{k-1}`.
pub fn ts_matrix(params: &DtParams, ctx: &PrecisionContext) -> Result<ComplexMatrix> {
    let a = params.a().clone();
    let w = params.base().q_pow(2 - params.n() as i64);
    ratio_matrix(
        params,
        |j| {
            [
                &(&w * &params.b()[j]) / &a,
                &(&w * &params.c()[j]) / &a,
                &(&w * &params.d()[j]) / &a,
            ]
        },
        |j| [&w / &params.b()[j], &w / &params.c()[j], &w / &params.d()[j]],
        "(q^{2-n}/b_j, ...)",
        ctx,
    )
}

/// Transformed matrix of the selected composed branch.
pub fn et_matrix(
    params: &DtParams,
    branch: EtBranch,
    ctx: &PrecisionContext,
) -> Result<ComplexMatrix> {
    let a = params.a().clone();
    let w = params.base().q_pow(2 - params.n() as i64);
    let pair_num = |j: usize| -> [CScalar; 3] {
        [
            &a / &(&params.b()[j] * &params.c()[j]),
            &a / &(&params.b()[j] * &params.d()[j]),
            &a / &(&params.c()[j] * &params.d()[j]),
        ]
    };
    let scaled_num = |j: usize| -> [CScalar; 3] {
        [
            &(&w * &params.b()[j]) / &a,
            &(&w * &params.c()[j]) / &a,
            &(&w * &params.d()[j]) / &a,
        ]
    };
    let plain_num = |j: usize| -> [CScalar; 3] {
        [params.b()[j].clone(), params.c()[j].clone(), params.d()[j].clone()]
    };
    let inv_den = |j: usize| -> [CScalar; 3] {
        [&w / &params.b()[j], &w / &params.c()[j], &w / &params.d()[j]]
    };
    let pair_den = |j: usize| -> [CScalar; 3] {
        [
            &(&w * &(&params.b()[j] * &params.c()[j])) / &a,
            &(&w * &(&params.b()[j] * &params.d()[j])) / &a,
            &(&w * &(&params.c()[j] * &params.d()[j])) / &a,
        ]
    };
    match branch {
        EtBranch::First => {
            ratio_matrix(params, pair_num, inv_den, "(q^{2-n}/b_j, ...)", ctx)
        }
        EtBranch::Second => {
            ratio_matrix(params, scaled_num, pair_den, "(q^{2-n} b_j c_j/a, ...)", ctx)
        }
        EtBranch::Third => {
            ratio_matrix(params, plain_num, pair_den, "(q^{2-n} b_j c_j/a, ...)", ctx)
        }
    }
}

/// Product over rows of `(b_j, c_j, d_j)_{n-1} / (a/b_j, a/c_j, a/d_j)_{n-1}`
/// or its transformed-numerator variant.
fn row_ratio_product(
    params: &DtParams,
    transformed_numerator: bool,
    ctx: &PrecisionContext,
) -> Result<CScalar> {
    let base = params.base();
    let n = params.n();
    let k = n as u32 - 1;
    let a = params.a();
    let mut acc = ctx.one();
    for j in 0..n {
        let numerator = if transformed_numerator {
            base.pochhammer_list(
                &[
                    a / &(&params.b()[j] * &params.c()[j]),
                    a / &(&params.b()[j] * &params.d()[j]),
                    a / &(&params.c()[j] * &params.d()[j]),
                ],
                k,
                ctx,
            )?
        } else {
            base.pochhammer_list(
                &[params.b()[j].clone(), params.c()[j].clone(), params.d()[j].clone()],
                k,
                ctx,
            )?
        };
        let mut denominator = ctx.one();
        for arg in [a / &params.b()[j], a / &params.c()[j], a / &params.d()[j]] {
            denominator =
                &denominator * &super::guarded_poch(base, &arg, k, "(a/b_j, ...)", ctx)?;
        }
        acc = &acc * &(&numerator / &denominator);
    }
    Ok(acc)
}

/// Staircase product `prod_{j=2}^n (a q^{j-2})_{j-1} / (den(j))_{j-1}`.
fn staircase_ratio(
    params: &DtParams,
    den_arg: impl Fn(i64) -> CScalar,
    ctx: &PrecisionContext,
) -> Result<CScalar> {
    let base = params.base();
    let mut acc = ctx.one();
    for j in 2..=params.n() as i64 {
        let numerator = base.pochhammer(&(params.a() * &base.q_pow(j - 2)), j as u32 - 1, ctx)?;
        let denominator =
            super::guarded_poch(base, &den_arg(j), j as u32 - 1, "staircase denominator", ctx)?;
        acc = &acc * &(&numerator / &denominator);
    }
    Ok(acc)
}

/// Prefactor of the main transformation:
/// `(a/e)^C(n,2) prod_{j=2}^n (a q^{j-2})_{j-1} / (e q^{j-2})_{j-1}`.
pub fn sigma_prefactor(params: &DtParams, ctx: &PrecisionContext) -> Result<CScalar> {
    let e = params.e();
    let head = (params.a() / &e).pow_int(binom(params.n() as u32, 2))?;
    let base = params.base();
    let stairs = staircase_ratio(params, |j| &e * &base.q_pow(j - 2), ctx)?;
    Ok(&head * &stairs)
}

/// Prefactor of the column-reversal:
/// `(-e^2/a)^C(n,2) prod_j (b_j, c_j, d_j)_{n-1} / (a/b_j, a/c_j, a/d_j)_{n-1}`.
pub fn tau_prefactor(params: &DtParams, ctx: &PrecisionContext) -> Result<CScalar> {
    let e = params.e();
    let head = (-&(&e.pow_int(2)? / params.a())).pow_int(binom(params.n() as u32, 2))?;
    let rows = row_ratio_product(params, false, ctx)?;
    Ok(&head * &rows)
}

/// Prefactor of the selected composed branch.
pub fn et_prefactor(
    params: &DtParams,
    branch: EtBranch,
    ctx: &PrecisionContext,
) -> Result<CScalar> {
    let base = params.base();
    let n = params.n() as u32;
    let a = params.a();
    let e = params.e();
    match branch {
        EtBranch::First => {
            // q^{-6 C(n,3)} (e/a^2)^C(n,2) * plain rows * (aq^{j-2})/(q^{j-n} e/a)
            let head = &base.q_pow(-6 * binom(n, 3))
                * &(&e / &a.pow_int(2)?).pow_int(binom(n, 2))?;
            let rows = row_ratio_product(params, false, ctx)?;
            let ea = &e / a;
            let stairs =
                staircase_ratio(params, |j| &base.q_pow(j - n as i64) * &ea, ctx)?;
            Ok(&(&head * &rows) * &stairs)
        }
        EtBranch::Second => {
            // (-a^3/e^2)^C(n,2) * transformed rows * (aq^{j-2})/(e q^{j-2})
            let head = (-&(&a.pow_int(3)? / &e.pow_int(2)?)).pow_int(binom(n, 2))?;
            let rows = row_ratio_product(params, true, ctx)?;
            let stairs = staircase_ratio(params, |j| &e * &base.q_pow(j - 2), ctx)?;
            Ok(&(&head * &rows) * &stairs)
        }
        EtBranch::Third => {
            // q^{-6 C(n,3)} (a^2/e^3)^C(n,2) * transformed rows * (aq^{j-2})/(q^{j-n} a/e)
            let head = &base.q_pow(-6 * binom(n, 3))
                * &(&a.pow_int(2)? / &e.pow_int(3)?).pow_int(binom(n, 2))?;
            let rows = row_ratio_product(params, true, ctx)?;
            let ae = a / &e;
            let stairs =
                staircase_ratio(params, |j| &base.q_pow(j - n as i64) * &ae, ctx)?;
            Ok(&(&head * &rows) * &stairs)
        }
    }
}

/// Main transformation: lhs det against prefactor times transformed det.
pub fn eval_dt(params: &DtParams, ctx: &PrecisionContext) -> Result<VerificationReport> {
    let lhs = lhs_det(params, ctx)?;
    let rhs = &sigma_prefactor(params, ctx)? * &dt_rhs_matrix(params, ctx)?.det_lu(ctx);
    Ok(VerificationReport::from_sides("dt", lhs, rhs, params.digest(), ctx))
}

/// Column-reversal transformation.
pub fn eval_ts(params: &DtParams, ctx: &PrecisionContext) -> Result<VerificationReport> {
    let lhs = lhs_det(params, ctx)?;
    let rhs = &tau_prefactor(params, ctx)? * &ts_matrix(params, ctx)?.det_lu(ctx);
    Ok(VerificationReport::from_sides("ts", lhs, rhs, params.digest(), ctx))
}

/// Composed transformation for one branch.
pub fn eval_et(
    params: &DtParams,
    branch: EtBranch,
    ctx: &PrecisionContext,
) -> Result<VerificationReport> {
    let lhs = lhs_det(params, ctx)?;
    let rhs = &et_prefactor(params, branch, ctx)?
        * &et_matrix(params, branch, ctx)?.det_lu(ctx);
    Ok(VerificationReport::from_sides(branch.name(), lhs, rhs, params.digest(), ctx))
}

/// Shared pole guard for sampler-side rejection (main-transformation
/// denominators of both sides).
pub(crate) fn pole_check(params: &DtParams, ctx: &PrecisionContext) -> Result<()> {
    lhs_matrix(params, ctx)?;
    sigma_prefactor(params, ctx)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identities::test_support::constrained;
    use crate::theta::EllipticBase;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256, 32, 1e-35).unwrap()
    }

    fn sample(c: &PrecisionContext) -> DtParams {
        constrained(
            c,
            (0.35, 0.1),
            (0.6, -0.15),
            (1.1, 0.3),
            &[(0.8, 0.2), (-0.6, 0.5), (1.2, -0.3)],
            &[(0.9, -0.4), (0.7, 0.3), (-0.5, -0.8)],
            (1.05, 0.45),
        )
    }

    #[test]
    fn order_one_everything_is_one() {
        let c = ctx();
        let p = constrained(
            &c,
            (0.3, 0.0),
            (0.5, 0.1),
            (1.2, 0.1),
            &[(0.8, 0.3)],
            &[(0.7, -0.2)],
            (0.9, 0.2),
        );
        for report in [
            eval_dt(&p, &c).unwrap(),
            eval_ts(&p, &c).unwrap(),
            eval_et(&p, EtBranch::First, &c).unwrap(),
            eval_et(&p, EtBranch::Second, &c).unwrap(),
            eval_et(&p, EtBranch::Third, &c).unwrap(),
        ] {
            assert_eq!(report.lhs, c.one());
            assert!(report.passed, "{}", report.identity_name);
        }
    }

    #[test]
    fn transformation_holds_on_random_constrained_instance() {
        let c = ctx();
        let p = sample(&c);
        let report = eval_dt(&p, &c).unwrap();
        assert!(report.passed, "residual {:e}", report.rel_residual.to_f64());
        assert!(report.rel_residual.to_f64() <= 1e-35);
    }

    #[test]
    fn column_reversal_holds() {
        let c = ctx();
        let p = sample(&c);
        let report = eval_ts(&p, &c).unwrap();
        assert!(report.passed, "residual {:e}", report.rel_residual.to_f64());
    }

    #[test]
    fn all_three_composed_branches_hold() {
        let c = ctx();
        let p = sample(&c);
        for branch in [EtBranch::First, EtBranch::Second, EtBranch::Third] {
            let report = eval_et(&p, branch, &c).unwrap();
            assert!(
                report.passed,
                "{} residual {:e}",
                report.identity_name,
                report.rel_residual.to_f64()
            );
        }
    }

    #[test]
    fn trigonometric_degeneration_passes() {
        let c = ctx();
        let p = constrained(
            &c,
            (0.0, 0.0),
            (0.45, 0.2),
            (0.9, -0.25),
            &[(0.8, 0.2), (-0.6, 0.5), (1.2, -0.3)],
            &[(0.9, -0.4), (0.7, 0.3), (-0.5, -0.8)],
            (1.05, 0.45),
        );
        assert!(eval_dt(&p, &c).unwrap().passed);
        assert!(eval_ts(&p, &c).unwrap().passed);
    }

    #[test]
    fn unbalanced_rows_are_rejected_at_construction() {
        let c = ctx();
        let base = EllipticBase::new(c.scalar(0.3, 0.0), c.scalar(0.5, 0.0)).unwrap();
        let result = DtParams::new(
            base,
            c.one(),
            vec![c.scalar(0.9, 0.0), c.scalar(0.8, 0.0)],
            vec![c.scalar(0.7, 0.0), c.scalar(0.6, 0.0)],
            vec![c.scalar(0.5, 0.0), c.scalar(0.4, 0.0)],
            &c,
        );
        assert!(result.is_err());
    }
}
