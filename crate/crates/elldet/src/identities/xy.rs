//! The matrix factorization behind the determinant transformation.
//!
//! With `X_{jk} = (b_j, c_j, d_j)_{k-1} / (a/b_j, a/c_j, a/d_j)_{k-1}` and
//!
//! ```text
//! Y_{jk} = theta(a q^{2j-3}) / theta(a q^{-1})
//!          * (a q^{-1}, q^{1-k}, e q^{k-2})_{j-1} / (q, a q^{k-1}, a q^{2-k}/e)_{j-1} * q^{j-1},
//! ```
//!
//! Y is upper triangular with the closed-form determinant
//! `(e/a)^C(n,2) prod_{j=2}^n (a, e q^{j-2})_{j-1} / (a q^{j-2}, e/a)_{j-1}`,
//! and every entry of XY collapses to
//! `(a, a/b_j c_j, a/b_j d_j, a/c_j d_j)_{k-1} / (e/a, a/b_j, a/c_j, a/d_j)_{k-1}`
//! by the one-dimensional summation. Writing det(X) = det(XY)/det(Y)
//! recovers the transformation, so this check walks the proof numerically.

use super::{dt::lhs_matrix, guarded_table, guarded_theta, DtParams, VerificationReport};
use crate::error::Result;
use crate::linalg::ComplexMatrix;
use crate::numeric::{binom, rel_residual, CScalar, PrecisionContext};
use rug::Float;

/// Everything the factorization check computes, for fine-grained assertions.
#[derive(Debug, Clone)]
pub struct XyParts {
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub xy: ComplexMatrix,
    /// max_{j>k} |Y_jk| relative to the largest entry magnitude of Y.
    pub triangularity_residual: Float,
    pub det_y: CScalar,
    pub det_y_closed: CScalar,
    pub det_y_residual: Float,
    /// Largest entrywise residual of XY against its closed form.
    pub xy_entry_residual: Float,
    /// Residual of det(X) * det(Y) against det(XY).
    pub det_consistency_residual: Float,
}

/// Build X, Y, XY and all comparison quantities.
pub fn xy_parts(params: &DtParams, ctx: &PrecisionContext) -> Result<XyParts> {
    let base = params.base();
    let n = params.n();
    let a = params.a();
    let e = params.e();
    let q = base.q();

    let x = lhs_matrix(params, ctx)?;

    // Y: row tables depend on the column through q^{1-k}, e q^{k-2},
    // a q^{k-1}, a q^{2-k}/e; build per-column tables up to row n.
    let theta_aq_inv = guarded_theta(base, &(a / q), "a/q", ctx)?;
    let aq_inv_table = base.pochhammer_table(&(a / q), n as u32 - 1, ctx)?;
    let q_table = guarded_table(base, q, n as u32 - 1, "q", ctx)?;

    let mut per_column = Vec::with_capacity(n);
    for k in 1..=n as i64 {
        let num_q = base.pochhammer_table(&base.q_pow(1 - k), n as u32 - 1, ctx)?;
        let num_e = base.pochhammer_table(&(&e * &base.q_pow(k - 2)), n as u32 - 1, ctx)?;
        let den_a = guarded_table(base, &(a * &base.q_pow(k - 1)), n as u32 - 1, "a q^{k-1}", ctx)?;
        let den_ae =
            guarded_table(base, &(&(a * &base.q_pow(2 - k)) / &e), n as u32 - 1, "a q^{2-k}/e", ctx)?;
        per_column.push((num_q, num_e, den_a, den_ae));
    }

    // theta(a q^{2j-3}) and q^{j-1} per row.
    let mut theta_row = Vec::with_capacity(n);
    let mut q_pow_row = Vec::with_capacity(n);
    for j in 1..=n as i64 {
        theta_row.push(base.theta_product(&(a * &base.q_pow(2 * j - 3)), ctx)?);
        q_pow_row.push(base.q_pow(j - 1));
    }

    let y = ComplexMatrix::from_fn(n, |j, k| {
        let (num_q, num_e, den_a, den_ae) = &per_column[k];
        let numerator = &(&aq_inv_table[j] * &num_q[j]) * &num_e[j];
        let denominator = &(&q_table[j] * &den_a[j]) * &den_ae[j];
        let ratio = &(&theta_row[j] / &theta_aq_inv) * &(&numerator / &denominator);
        &ratio * &q_pow_row[j]
    });

    // Triangularity: below-diagonal entries vanish through theta(1) = 0.
    let mut max_entry = Float::with_val(ctx.working_prec(), 0);
    for j in 0..n {
        for k in 0..n {
            let mag = y.get(j, k).abs();
            if mag > max_entry {
                max_entry = mag;
            }
        }
    }
    let mut max_below = Float::with_val(ctx.working_prec(), 0);
    for j in 0..n {
        for k in 0..j {
            let mag = y.get(j, k).abs();
            if mag > max_below {
                max_below = mag;
            }
        }
    }
    let triangularity_residual = if max_entry.is_zero() {
        max_below.clone()
    } else {
        max_below / &max_entry
    };

    // det(Y) against the closed form.
    let det_y = y.det_lu(ctx);
    let mut det_y_closed = (&e / a).pow_int(binom(n as u32, 2))?;
    for j in 2..=n as i64 {
        let numerator = base.pochhammer_list(
            &[a.clone(), &e * &base.q_pow(j - 2)],
            j as u32 - 1,
            ctx,
        )?;
        let den1 = super::guarded_poch(base, &(a * &base.q_pow(j - 2)), j as u32 - 1, "a q^{j-2}", ctx)?;
        let den2 = super::guarded_poch(base, &(&e / a), j as u32 - 1, "e/a", ctx)?;
        det_y_closed = &det_y_closed * &(&numerator / &(&den1 * &den2));
    }
    let det_y_residual = rel_residual(&det_y, &det_y_closed);

    // Entrywise XY against the summation closed form.
    let xy = x.matmul(&y, ctx)?;
    let e_over_a_table = guarded_table(base, &(&e / a), n as u32 - 1, "e/a", ctx)?;
    let a_table = base.pochhammer_table(a, n as u32 - 1, ctx)?;
    let mut xy_entry_residual = Float::with_val(ctx.working_prec(), 0);
    for j in 0..n {
        let bj = &params.b()[j];
        let cj = &params.c()[j];
        let dj = &params.d()[j];
        let num_bc = base.pochhammer_table(&(a / &(bj * cj)), n as u32 - 1, ctx)?;
        let num_bd = base.pochhammer_table(&(a / &(bj * dj)), n as u32 - 1, ctx)?;
        let num_cd = base.pochhammer_table(&(a / &(cj * dj)), n as u32 - 1, ctx)?;
        let den_b = guarded_table(base, &(a / bj), n as u32 - 1, "a/b_j", ctx)?;
        let den_c = guarded_table(base, &(a / cj), n as u32 - 1, "a/c_j", ctx)?;
        let den_d = guarded_table(base, &(a / dj), n as u32 - 1, "a/d_j", ctx)?;
        for k in 0..n {
            let numerator = &(&a_table[k] * &num_bc[k]) * &(&num_bd[k] * &num_cd[k]);
            let denominator =
                &(&e_over_a_table[k] * &den_b[k]) * &(&den_c[k] * &den_d[k]);
            let closed = &numerator / &denominator;
            let res = rel_residual(xy.get(j, k), &closed);
            if res > xy_entry_residual {
                xy_entry_residual = res;
            }
        }
    }

    // det(X) det(Y) = det(XY): the proof's division step.
    let det_x = x.det_lu(ctx);
    let det_xy = xy.det_lu(ctx);
    let det_consistency_residual = rel_residual(&(&det_x * &det_y), &det_xy);

    Ok(XyParts {
        x,
        y,
        xy,
        triangularity_residual,
        det_y,
        det_y_closed,
        det_y_residual,
        xy_entry_residual,
        det_consistency_residual,
    })
}

/// Run the three factorization assertions and fold them into one report:
/// lhs is det(X) det(Y), rhs det(XY), and the residual also covers
/// triangularity, the det(Y) closed form and the entrywise XY agreement.
pub fn check_xy_factorization(
    params: &DtParams,
    ctx: &PrecisionContext,
) -> Result<VerificationReport> {
    let parts = xy_parts(params, ctx)?;
    let lhs = &parts.x.det_lu(ctx) * &parts.det_y;
    let rhs = parts.xy.det_lu(ctx);
    let extras = [
        parts.triangularity_residual.clone(),
        parts.det_y_residual.clone(),
        parts.xy_entry_residual.clone(),
    ];
    Ok(VerificationReport::from_sides_with_extras(
        "xy",
        lhs,
        rhs,
        &extras,
        params.digest(),
        ctx,
    ))
}
