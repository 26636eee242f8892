//! The multi-dimensional balanced summation and its permutation
//! specialization.
//!
//! For `b c_j d_j e_j = a^2 q^{2-n+m_j}` the nested sum over
//! `0 <= k_j <= m_j` of
//!
//! ```text
//! prod_{i<j} q^{k_i} theta(q^{k_j-k_i}) theta(a q^{k_i+k_j})
//!   * prod_j theta(a q^{2k_j})/theta(a)
//!            * (a, b, c_j, d_j, e_j, q^{-m_j})_{k_j}
//!              / (q, aq/b, aq/c_j, aq/d_j, aq/e_j, aq^{1+m_j})_{k_j} * q^{k_j}
//! ```
//!
//! collapses to a closed form carrying one n x n determinant. At
//! `m_j = n-1` the theta(q^{k_j-k_i}) factors kill every summand whose
//! index vector is not a permutation of (0, ..., n-1), and the sign
//! identity
//! `prod_{i<j} q^{k_i} theta(q^{k_j-k_i}) = sgn(k) prod_{0<=i<j<=n-1} q^i theta(q^{j-i})`
//! rewrites the surviving sum as a determinant; the endpoint is the third
//! composed branch of the determinant transformation.

use super::dt::{eval_et, EtBranch};
use super::{guarded_table, guarded_theta, CntParams, DtParams, VerificationReport};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::numeric::{binom, rel_residual, CScalar, PrecisionContext};
use rug::Float;

/// Grid terms above this count are refused rather than ground through.
const GRID_LIMIT: u64 = 100_000;

/// Per-row term factors F_j(l) plus the pairwise theta caches.
struct GridTables {
    /// F[j][l], l <= m_j.
    f: Vec<Vec<CScalar>>,
    /// theta(q^d) indexed by d + m_max.
    theta_qd: Vec<CScalar>,
    /// theta(a q^s), s <= 2 m_max.
    theta_aqs: Vec<CScalar>,
    /// q^k, k <= m_max.
    q_pow: Vec<CScalar>,
    m_max: u32,
}

impl GridTables {
    fn build(params: &CntParams, ctx: &PrecisionContext) -> Result<Self> {
        let base = params.base();
        let n = params.n();
        let a = params.a();
        let b = params.b();
        let q = base.q();
        let aq = a * q;
        let m_max = *params.m().iter().max().expect("n >= 1");

        let theta_a = guarded_theta(base, a, "a", ctx)?;
        let mut f = Vec::with_capacity(n);
        for j in 0..n {
            let m_j = params.m()[j];
            let num_args = [
                a.clone(),
                b.clone(),
                params.c()[j].clone(),
                params.d()[j].clone(),
                params.e()[j].clone(),
                base.q_pow(-(m_j as i64)),
            ];
            let den_args = [
                q.clone(),
                &aq / b,
                &aq / &params.c()[j],
                &aq / &params.d()[j],
                &aq / &params.e()[j],
                a * &base.q_pow(1 + m_j as i64),
            ];
            let labels = ["q", "aq/b", "aq/c_j", "aq/d_j", "aq/e_j", "aq^{1+m_j}"];
            let mut num_tables = Vec::with_capacity(6);
            for arg in &num_args {
                num_tables.push(base.pochhammer_table(arg, m_j, ctx)?);
            }
            let mut den_tables = Vec::with_capacity(6);
            for (arg, label) in den_args.iter().zip(labels) {
                den_tables.push(guarded_table(base, arg, m_j, label, ctx)?);
            }

            let mut row = Vec::with_capacity(m_j as usize + 1);
            let q_sq = q * q;
            let mut aq2l = a.clone();
            let mut q_pow_l = ctx.one();
            for l in 0..=m_j as usize {
                let mut value = &base.theta_product(&aq2l, ctx)? / &theta_a;
                for table in &num_tables {
                    value = &value * &table[l];
                }
                for table in &den_tables {
                    value = &value / &table[l];
                }
                value = &value * &q_pow_l;
                row.push(value);
                aq2l = &aq2l * &q_sq;
                q_pow_l = &q_pow_l * q;
            }
            f.push(row);
        }

        let mut theta_qd = Vec::with_capacity(2 * m_max as usize + 1);
        for d in -(m_max as i64)..=m_max as i64 {
            theta_qd.push(base.theta_product(&base.q_pow(d), ctx)?);
        }
        let mut theta_aqs = Vec::with_capacity(2 * m_max as usize + 1);
        for s in 0..=2 * m_max as i64 {
            theta_aqs.push(base.theta_product(&(a * &base.q_pow(s)), ctx)?);
        }
        let mut q_pow = Vec::with_capacity(m_max as usize + 1);
        for k in 0..=m_max as i64 {
            q_pow.push(base.q_pow(k));
        }
        Ok(Self {
            f,
            theta_qd,
            theta_aqs,
            q_pow,
            m_max,
        })
    }

    /// One grid term at index vector `ks`.
    fn term(&self, ks: &[u32], ctx: &PrecisionContext) -> CScalar {
        let n = ks.len();
        let mut pair = ctx.one();
        for i in 0..n {
            for j in i + 1..n {
                let d = ks[j] as i64 - ks[i] as i64;
                let factor = &self.theta_qd[(d + self.m_max as i64) as usize];
                if factor.is_zero() {
                    return ctx.zero();
                }
                pair = &pair * &self.q_pow[ks[i] as usize];
                pair = &pair * factor;
                pair = &pair * &self.theta_aqs[(ks[i] + ks[j]) as usize];
            }
        }
        let mut term = pair;
        for (j, &k) in ks.iter().enumerate() {
            term = &term * &self.f[j][k as usize];
        }
        term
    }
}

/// Odometer over the grid `0 <= k_j <= m_j`.
fn for_each_index(m: &[u32], mut visit: impl FnMut(&[u32])) {
    let n = m.len();
    let mut ks = vec![0u32; n];
    loop {
        visit(&ks);
        let mut pos = 0;
        loop {
            if pos == n {
                return;
            }
            if ks[pos] < m[pos] {
                ks[pos] += 1;
                break;
            }
            ks[pos] = 0;
            pos += 1;
        }
    }
}

fn grid_size(m: &[u32]) -> u64 {
    m.iter().fold(1u64, |acc, &v| acc.saturating_mul(v as u64 + 1))
}

fn lhs_sum(params: &CntParams, ctx: &PrecisionContext) -> Result<CScalar> {
    let tables = GridTables::build(params, ctx)?;
    let mut sum = ctx.zero();
    for_each_index(params.m(), |ks| {
        sum = &sum + &tables.term(ks, ctx);
    });
    Ok(sum)
}

fn rhs_closed_form(params: &CntParams, ctx: &PrecisionContext) -> Result<CScalar> {
    let base = params.base();
    let n = params.n();
    let a = params.a();
    let b = params.b();
    let q = base.q();
    let aq = a * q;

    let mut value = &b.pow_int(-binom(n as u32, 2))? * &base.q_pow(-2 * binom(n as u32, 3));

    // prod_j (a q^{2-n}/b)_{n-1} (b)_{j-1} / (a q^{2+n-2j}/b)_{j-1}
    // (the denominator truncation order is j-1: with n-1 the two sides
    // disagree by exactly the surplus factors at every order n >= 2)
    let head = base.pochhammer(&(&(a * &base.q_pow(2 - n as i64)) / b), n as u32 - 1, ctx)?;
    for j in 1..=n as i64 {
        let den_arg = &(a * &base.q_pow(2 + n as i64 - 2 * j)) / b;
        let den = super::guarded_poch(base, &den_arg, j as u32 - 1, "a q^{2+n-2j}/b", ctx)?;
        let num = &head * &base.pochhammer(b, j as u32 - 1, ctx)?;
        value = &value * &(&num / &den);
    }

    // prod_j (aq, aq/c_j d_j, aq/c_j e_j, aq/d_j e_j)_{m_j} / (aq/c_j, ...)_{m_j}
    for j in 0..n {
        let m_j = params.m()[j];
        let (cj, dj, ej) = (&params.c()[j], &params.d()[j], &params.e()[j]);
        let numerator = base.pochhammer_list(
            &[
                aq.clone(),
                &aq / &(cj * dj),
                &aq / &(cj * ej),
                &aq / &(dj * ej),
            ],
            m_j,
            ctx,
        )?;
        let den_args = [
            &aq / cj,
            &aq / dj,
            &aq / ej,
            &aq / &(&(cj * dj) * ej),
        ];
        let labels = ["aq/c_j", "aq/d_j", "aq/e_j", "aq/c_j d_j e_j"];
        let mut denominator = ctx.one();
        for (arg, label) in den_args.iter().zip(labels) {
            denominator = &denominator * &super::guarded_poch(base, arg, m_j, label, ctx)?;
        }
        value = &value * &(&numerator / &denominator);
    }

    // det[ (c_j, d_j, e_j, q^{-m_j})_{k-1}
    //      / (a q^{2-n}/b c_j, a q^{2-n}/b d_j, a q^{2-n}/b e_j, a q^{2-n+m_j}/b)_{k-1} ]
    let shift = &base.q_pow(2 - n as i64) / b;
    let mut rows = Vec::with_capacity(n);
    for j in 0..n {
        let m_j = params.m()[j];
        let (cj, dj, ej) = (&params.c()[j], &params.d()[j], &params.e()[j]);
        let num_args = [cj.clone(), dj.clone(), ej.clone(), base.q_pow(-(m_j as i64))];
        let den_args = [
            &(a * &shift) / cj,
            &(a * &shift) / dj,
            &(a * &shift) / ej,
            &(a * &base.q_pow(2 - n as i64 + m_j as i64)) / b,
        ];
        let labels = [
            "a q^{2-n}/b c_j",
            "a q^{2-n}/b d_j",
            "a q^{2-n}/b e_j",
            "a q^{2-n+m_j}/b",
        ];
        let mut num_tables = Vec::with_capacity(4);
        for arg in &num_args {
            num_tables.push(base.pochhammer_table(arg, n as u32 - 1, ctx)?);
        }
        let mut den_tables = Vec::with_capacity(4);
        for (arg, label) in den_args.iter().zip(labels) {
            den_tables.push(guarded_table(base, arg, n as u32 - 1, label, ctx)?);
        }
        rows.push((num_tables, den_tables));
    }
    let matrix = ComplexMatrix::from_fn(n, |j, k| {
        let (num_tables, den_tables) = &rows[j];
        let numerator = &(&num_tables[0][k] * &num_tables[1][k]) * &(&num_tables[2][k] * &num_tables[3][k]);
        let denominator = &(&den_tables[0][k] * &den_tables[1][k]) * &(&den_tables[2][k] * &den_tables[3][k]);
        &numerator / &denominator
    });
    Ok(&value * &matrix.det_lu(ctx))
}

/// Evaluate the nested sum against the closed form.
pub fn eval_cnt(params: &CntParams, ctx: &PrecisionContext) -> Result<VerificationReport> {
    let terms = grid_size(params.m());
    if terms > GRID_LIMIT {
        return Err(Error::CostGuardExceeded {
            terms,
            limit: GRID_LIMIT,
        });
    }
    let lhs = lhs_sum(params, ctx)?;
    let rhs = rhs_closed_form(params, ctx)?;
    Ok(VerificationReport::from_sides("cnt", lhs, rhs, params.digest(), ctx))
}

/// Shared pole guard for sampler-side rejection.
pub(crate) fn pole_check(params: &CntParams, ctx: &PrecisionContext) -> Result<()> {
    GridTables::build(params, ctx)?;
    rhs_closed_form(params, ctx)?;
    Ok(())
}

/// Detailed outcome of the `m_j = n-1` specialization run.
#[derive(Debug, Clone)]
pub struct CntSpecializationParts {
    /// Largest non-permutation term magnitude over the largest term
    /// magnitude; mathematically zero.
    pub vanish_ratio: Float,
    /// Count of surviving (permutation) index vectors, n! when generic.
    pub permutation_count: usize,
    pub non_permutation_count: usize,
    /// Sum over permutation terms only.
    pub perm_sum: CScalar,
    /// The rewritten form: pair-product constant times det[F_j(l-1)].
    pub determinant_form: CScalar,
    pub rewrite_residual: Float,
    /// Residual of the endpoint transformation (third composed branch).
    pub et_third_residual: Float,
}

/// The parameters of the specialized sum induced by a determinant
/// transformation instance: m_j = n-1 with
/// (a, b, c_j, d_j, e_j) -> (a/q, e/q, b_j, c_j, d_j).
pub fn induced_cnt_params(params: &DtParams, ctx: &PrecisionContext) -> Result<CntParams> {
    let base = params.base();
    let n = params.n();
    let q = base.q();
    let a_cnt = params.a() / q;
    let b_cnt = &params.e() / q;
    CntParams::new(
        base.clone(),
        vec![n as u32 - 1; n],
        a_cnt,
        b_cnt,
        params.b().to_vec(),
        params.c().to_vec(),
        params.d().to_vec(),
        ctx,
    )
}

/// Run the specialization checks on the sum induced by `params`.
pub fn specialization_parts(
    params: &DtParams,
    ctx: &PrecisionContext,
) -> Result<CntSpecializationParts> {
    let n = params.n();
    if n > 5 {
        return Err(Error::ConstraintViolation(
            "specialization check is limited to n <= 5".into(),
        ));
    }
    let cnt = induced_cnt_params(params, ctx)?;
    let tables = GridTables::build(&cnt, ctx)?;
    let wp = ctx.working_prec();

    let mut max_all = Float::with_val(wp, 0);
    let mut max_nonperm = Float::with_val(wp, 0);
    let mut perm_sum = ctx.zero();
    let mut permutation_count = 0usize;
    let mut non_permutation_count = 0usize;
    for_each_index(cnt.m(), |ks| {
        let term = tables.term(ks, ctx);
        let mag = term.abs();
        if mag > max_all {
            max_all = mag.clone();
        }
        let mut sorted: Vec<u32> = ks.to_vec();
        sorted.sort_unstable();
        let is_perm = sorted.iter().enumerate().all(|(i, &v)| v == i as u32);
        if is_perm {
            permutation_count += 1;
            perm_sum = &perm_sum + &term;
        } else {
            non_permutation_count += 1;
            if mag > max_nonperm {
                max_nonperm = mag;
            }
        }
    });
    let vanish_ratio = if max_all.is_zero() {
        max_nonperm.clone()
    } else {
        max_nonperm / &max_all
    };

    // sgn(k) rewrite: perm_sum = prod_{0<=i<j<=n-1} q^i theta(q^{j-i}) theta(a q^{i+j})
    //                            * det[F_j(l-1)]
    let base = cnt.base();
    let mut constant = ctx.one();
    for i in 0..n as i64 {
        for j in i + 1..n as i64 {
            constant = &constant * &base.q_pow(i);
            constant = &constant * &base.theta_product(&base.q_pow(j - i), ctx)?;
            constant =
                &constant * &base.theta_product(&(cnt.a() * &base.q_pow(i + j)), ctx)?;
        }
    }
    let matrix = ComplexMatrix::from_fn(n, |j, l| tables.f[j][l].clone());
    let determinant_form = &constant * &matrix.det_lu(ctx);
    let rewrite_residual = rel_residual(&perm_sum, &determinant_form);

    let et_third = eval_et(params, EtBranch::Third, ctx)?;

    Ok(CntSpecializationParts {
        vanish_ratio,
        permutation_count,
        non_permutation_count,
        perm_sum,
        determinant_form,
        rewrite_residual,
        et_third_residual: et_third.rel_residual,
    })
}

/// Fold the three specialization assertions into one report: lhs is the
/// permutation-term sum, rhs its determinant rewrite, and the residual also
/// covers the vanishing ratio and the endpoint transformation.
pub fn check_cnt_specialization(
    params: &DtParams,
    ctx: &PrecisionContext,
) -> Result<VerificationReport> {
    let parts = specialization_parts(params, ctx)?;
    let extras = [parts.vanish_ratio.clone(), parts.et_third_residual.clone()];
    Ok(VerificationReport::from_sides_with_extras(
        "cnt_special",
        parts.perm_sum,
        parts.determinant_form,
        &extras,
        params.digest(),
        ctx,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identities::test_support::constrained;
    use crate::identities::{eval_jackson, JsParams};
    use crate::theta::EllipticBase;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256, 32, 1e-30).unwrap()
    }

    /// Balanced rows: e_j solved from b c_j d_j e_j = a^2 q^{2-n+m_j}.
    #[allow(clippy::too_many_arguments)]
    fn cnt_params(
        c: &PrecisionContext,
        p: (f64, f64),
        q: (f64, f64),
        m: &[u32],
        a: (f64, f64),
        b: (f64, f64),
        cs: &[(f64, f64)],
        ds: &[(f64, f64)],
    ) -> CntParams {
        let base = EllipticBase::new(c.scalar(p.0, p.1), c.scalar(q.0, q.1)).unwrap();
        let n = m.len();
        let a = c.scalar(a.0, a.1);
        let b = c.scalar(b.0, b.1);
        let cvec: Vec<_> = cs.iter().map(|&(re, im)| c.scalar(re, im)).collect();
        let dvec: Vec<_> = ds.iter().map(|&(re, im)| c.scalar(re, im)).collect();
        let a_sq = a.pow_int(2).unwrap();
        let evec: Vec<_> = (0..n)
            .map(|j| {
                let target = &a_sq * &base.q_pow(2 - n as i64 + m[j] as i64);
                &target / &(&(&b * &cvec[j]) * &dvec[j])
            })
            .collect();
        CntParams::new(base, m.to_vec(), a, b, cvec, dvec, evec, c).unwrap()
    }

    #[test]
    fn single_row_reduces_to_the_one_dimensional_summation() {
        let c = ctx();
        let p = cnt_params(
            &c,
            (0.3, 0.1),
            (0.55, -0.2),
            &[3],
            (1.1, 0.4),
            (0.8, -0.5),
            &[(0.55, 0.25)],
            &[(1.4, 0.2)],
        );
        let cnt_report = eval_cnt(&p, &c).unwrap();
        assert!(cnt_report.passed);

        // Same parameters fed to the one-dimensional evaluator: the sum is
        // symmetric in (b, c_1, d_1, e_1), so dispatch (c_1, d_1, e_1, b).
        let js = JsParams::new(
            p.base().clone(),
            p.m()[0],
            p.a().clone(),
            p.c()[0].clone(),
            p.d()[0].clone(),
            p.e()[0].clone(),
            p.b().clone(),
            &c,
        )
        .unwrap();
        let js_report = eval_jackson(&js, &c).unwrap();
        assert!(js_report.passed);
        assert!(rel_residual(&cnt_report.lhs, &js_report.lhs).to_f64() < 1e-75);
        assert!(rel_residual(&cnt_report.rhs, &js_report.rhs).to_f64() < 1e-75);
    }

    #[test]
    fn zero_bounds_give_zero_on_both_sides() {
        let c = ctx();
        // n = 2, m = (0, 0): the single term carries theta(q^0) = theta(1) = 0,
        // and column k = 2 of the determinant carries (q^0)_1 = theta(1) = 0.
        let p = cnt_params(
            &c,
            (0.35, 0.05),
            (0.6, -0.15),
            &[0, 0],
            (1.05, 0.3),
            (0.85, -0.4),
            &[(0.7, 0.25), (-0.6, 0.5)],
            &[(1.2, -0.3), (0.9, 0.35)],
        );
        let report = eval_cnt(&p, &c).unwrap();
        assert!(report.lhs.abs().to_f64() < 1e-70);
        assert!(report.rhs.abs().to_f64() < 1e-70);
        assert!(report.passed);
    }

    #[test]
    fn random_three_row_instance_passes() {
        let c = ctx();
        let p = cnt_params(
            &c,
            (0.3, 0.08),
            (0.5, -0.18),
            &[2, 1, 3],
            (1.1, 0.35),
            (0.8, -0.45),
            &[(0.7, 0.25), (-0.55, 0.5), (1.15, -0.3)],
            &[(1.25, -0.3), (0.85, 0.4), (-0.65, -0.7)],
        );
        let report = eval_cnt(&p, &c).unwrap();
        assert!(report.passed, "residual {:e}", report.rel_residual.to_f64());
        assert!(report.rel_residual.to_f64() <= 1e-30);
    }

    #[test]
    fn grid_cost_guard_trips() {
        let c = ctx();
        let base = EllipticBase::new(c.scalar(0.3, 0.0), c.scalar(0.5, 0.0)).unwrap();
        let n = 4;
        let a = c.scalar(1.1, 0.2);
        let b = c.scalar(0.8, -0.3);
        let m = vec![30u32; n];
        let a_sq = a.pow_int(2).unwrap();
        let cvec: Vec<_> = (0..n).map(|j| c.scalar(0.6 + 0.05 * j as f64, 0.2)).collect();
        let dvec: Vec<_> = (0..n).map(|j| c.scalar(1.2 - 0.07 * j as f64, -0.25)).collect();
        let evec: Vec<_> = (0..n)
            .map(|j| {
                let target = &a_sq * &base.q_pow(2 - n as i64 + m[j] as i64);
                &target / &(&(&b * &cvec[j]) * &dvec[j])
            })
            .collect();
        let p = CntParams::new(base, m, a, b, cvec, dvec, evec, &c).unwrap();
        assert!(matches!(eval_cnt(&p, &c), Err(Error::CostGuardExceeded { .. })));
    }

    #[test]
    fn specialization_survives_only_on_permutations() {
        let c = ctx();
        // n = 2: exactly 2 of the 4 index vectors are permutations of (0, 1).
        let p = constrained(
            &c,
            (0.32, 0.06),
            (0.58, -0.12),
            (1.12, 0.28),
            &[(0.82, 0.22), (-0.58, 0.48)],
            &[(0.92, -0.38), (0.72, 0.32)],
            (1.08, 0.42),
        );
        let parts = specialization_parts(&p, &c).unwrap();
        assert_eq!(parts.permutation_count, 2);
        assert_eq!(parts.non_permutation_count, 2);
        assert!(parts.vanish_ratio.to_f64() <= 1e-30);
        assert!(parts.rewrite_residual.to_f64() <= 1e-30);
        assert!(parts.et_third_residual.to_f64() <= 1e-30);
        assert!(check_cnt_specialization(&p, &c).unwrap().passed);
    }

    #[test]
    fn specialization_three_rows() {
        let c = ctx();
        let p = constrained(
            &c,
            (0.3, 0.1),
            (0.6, -0.15),
            (1.1, 0.3),
            &[(0.8, 0.2), (-0.6, 0.5), (1.2, -0.3)],
            &[(0.9, -0.4), (0.7, 0.3), (-0.5, -0.8)],
            (1.05, 0.45),
        );
        let parts = specialization_parts(&p, &c).unwrap();
        assert_eq!(parts.permutation_count, 6);
        assert_eq!(parts.non_permutation_count, 27 - 6);
        assert!(parts.vanish_ratio.to_f64() <= 1e-30);
        assert!(parts.rewrite_residual.to_f64() <= 1e-30);
        assert!(parts.et_third_residual.to_f64() <= 1e-30);
    }
}
