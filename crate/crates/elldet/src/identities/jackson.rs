//! The terminating balanced summation: for `a^2 q^{n+1} = bcde`,
//!
//! ```text
//! sum_{l=0}^n  theta(a q^{2l})/theta(a)
//!              * (a,b,c,d,e,q^-n)_l / (q, aq/b, aq/c, aq/d, aq/e, aq^{n+1})_l * q^l
//!   = (aq, aq/bc, aq/bd, aq/cd)_n / (aq/b, aq/c, aq/d, aq/bcd)_n .
//! ```
//!
//! This is the one-dimensional engine behind the matrix factorization in
//! [`super::check_xy_factorization`].

use super::{guarded_poch, guarded_table, guarded_theta, JsParams, VerificationReport};
use crate::error::Result;
use crate::numeric::{CScalar, PrecisionContext};

/// Evaluate both sides of the summation and report the residual.
pub fn eval_jackson(params: &JsParams, ctx: &PrecisionContext) -> Result<VerificationReport> {
    let lhs = lhs_sum(params, ctx)?;
    let rhs = rhs_product(params, ctx)?;
    Ok(VerificationReport::from_sides(
        "jackson",
        lhs,
        rhs,
        params.digest(),
        ctx,
    ))
}

fn lhs_sum(params: &JsParams, ctx: &PrecisionContext) -> Result<CScalar> {
    let base = params.base();
    let n = params.n();
    let (a, b, c, d, e) = (params.a(), params.b(), params.c(), params.d(), params.e());
    let q = base.q();
    let aq = a * q;

    let numerator_args = [
        a.clone(),
        b.clone(),
        c.clone(),
        d.clone(),
        e.clone(),
        base.q_pow(-(n as i64)),
    ];
    let denominator_args = [
        q.clone(),
        &aq / b,
        &aq / c,
        &aq / d,
        &aq / e,
        a * &base.q_pow(n as i64 + 1),
    ];
    let labels = ["q", "aq/b", "aq/c", "aq/d", "aq/e", "aq^{n+1}"];

    let mut numerator_tables = Vec::with_capacity(6);
    for arg in &numerator_args {
        numerator_tables.push(base.pochhammer_table(arg, n, ctx)?);
    }
    let mut denominator_tables = Vec::with_capacity(6);
    for (arg, label) in denominator_args.iter().zip(labels) {
        denominator_tables.push(guarded_table(base, arg, n, label, ctx)?);
    }

    let theta_a = guarded_theta(base, a, "a", ctx)?;
    let q_sq = q * q;
    let mut aq2l = a.clone();
    let mut q_pow_l = ctx.one();
    let mut sum = ctx.zero();
    for l in 0..=n as usize {
        let mut term = &base.theta_product(&aq2l, ctx)? / &theta_a;
        for table in &numerator_tables {
            term = &term * &table[l];
        }
        for table in &denominator_tables {
            term = &term / &table[l];
        }
        term = &term * &q_pow_l;
        sum = &sum + &term;
        aq2l = &aq2l * &q_sq;
        q_pow_l = &q_pow_l * q;
    }
    Ok(sum)
}

fn rhs_product(params: &JsParams, ctx: &PrecisionContext) -> Result<CScalar> {
    let base = params.base();
    let n = params.n();
    let (a, b, c, d) = (params.a(), params.b(), params.c(), params.d());
    let aq = a * base.q();

    let numerator = base.pochhammer_list(
        &[aq.clone(), &aq / &(b * c), &aq / &(b * d), &aq / &(c * d)],
        n,
        ctx,
    )?;
    let mut denominator = ctx.one();
    let den_args = [&aq / b, &aq / c, &aq / d, &aq / &(&(b * c) * d)];
    let labels = ["aq/b", "aq/c", "aq/d", "aq/bcd"];
    for (arg, label) in den_args.iter().zip(labels) {
        denominator = &denominator * &guarded_poch(base, arg, n, label, ctx)?;
    }
    Ok(&numerator / &denominator)
}

/// All denominator factors of both sides, checked against the pole
/// threshold. Samplers use the same guard so they never emit a set the
/// evaluator would reject.
pub(crate) fn pole_check(params: &JsParams, ctx: &PrecisionContext) -> Result<()> {
    lhs_sum(params, ctx)?;
    rhs_product(params, ctx)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rel_residual;
    use crate::theta::EllipticBase;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256, 32, 1e-35).unwrap()
    }

    /// Balanced parameter set with e solved from the constraint.
    #[allow(clippy::too_many_arguments)]
    fn balanced(
        c: &PrecisionContext,
        p: (f64, f64),
        q: (f64, f64),
        n: u32,
        a: (f64, f64),
        b: (f64, f64),
        cc: (f64, f64),
        d: (f64, f64),
    ) -> JsParams {
        let base = EllipticBase::new(c.scalar(p.0, p.1), c.scalar(q.0, q.1)).unwrap();
        let a = c.scalar(a.0, a.1);
        let b = c.scalar(b.0, b.1);
        let cc = c.scalar(cc.0, cc.1);
        let d = c.scalar(d.0, d.1);
        let e = &(&a.pow_int(2).unwrap() * &base.q_pow(n as i64 + 1)) / &(&(&b * &cc) * &d);
        JsParams::new(base, n, a, b, cc, d, e, c).unwrap()
    }

    #[test]
    fn zero_order_sum_is_trivial() {
        let c = ctx();
        let p = balanced(&c, (0.3, 0.0), (0.55, 0.1), 0, (0.9, 0.2), (1.1, -0.3), (0.7, 0.4), (1.3, 0.1));
        let report = eval_jackson(&p, &c).unwrap();
        assert!(report.passed);
        assert!(report.lhs == c.one());
        assert!(rel_residual(&report.rhs, &c.one()).to_f64() < 1e-80);
    }

    #[test]
    fn two_term_sum_matches_product() {
        let c = ctx();
        let p = balanced(&c, (0.35, 0.1), (0.6, -0.2), 1, (1.1, 0.4), (0.8, -0.5), (0.55, 0.25), (1.4, 0.2));
        let report = eval_jackson(&p, &c).unwrap();
        assert!(report.passed, "residual {:e}", report.rel_residual.to_f64());
        assert!(report.rel_residual.to_f64() <= 1e-40);
    }

    #[test]
    fn trigonometric_case_passes() {
        let c = ctx();
        let p = balanced(&c, (0.0, 0.0), (0.45, 0.15), 3, (0.95, -0.2), (1.2, 0.3), (0.6, -0.4), (0.85, 0.5));
        let report = eval_jackson(&p, &c).unwrap();
        assert!(report.passed);
        assert!(report.rel_residual.to_f64() <= 1e-40);
    }

    #[test]
    fn unbalanced_parameters_are_rejected() {
        let c = ctx();
        let base = EllipticBase::new(c.scalar(0.3, 0.0), c.scalar(0.5, 0.0)).unwrap();
        let result = JsParams::new(
            base,
            2,
            c.scalar(1.0, 0.0),
            c.scalar(0.9, 0.0),
            c.scalar(0.8, 0.0),
            c.scalar(0.7, 0.0),
            c.scalar(0.6, 0.0),
            &c,
        );
        assert!(result.is_err());
    }
}
