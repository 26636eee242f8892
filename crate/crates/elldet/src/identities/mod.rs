//! One evaluator per identity: each builds both sides from raw parameters
//! and returns a [`VerificationReport`].
//!
//! All evaluators share the same residual rule and the same pole guard:
//! every theta factor appearing in a denominator is computed first, and a
//! parameter set whose factor magnitude falls below the context's pole
//! threshold is rejected as degenerate instead of producing a huge residual.

mod cnt;
mod dt;
mod jackson;
mod tdt;
mod warnaar;
mod xy;

pub use cnt::{check_cnt_specialization, eval_cnt, specialization_parts, CntSpecializationParts};
pub use dt::{
    dt_rhs_matrix, et_matrix, et_prefactor, eval_dt, eval_et, eval_ts, lhs_det, lhs_matrix,
    sigma_prefactor, tau_prefactor, ts_matrix, EtBranch,
};
pub use jackson::eval_jackson;
pub use tdt::eval_tdt;
pub use warnaar::{eval_warnaar, warnaar_rhs};
pub use xy::{check_xy_factorization, xy_parts, XyParts};

use crate::error::{Error, Result};
use crate::numeric::{abs_residual, rel_residual, CScalar, PrecisionContext};
use crate::theta::EllipticBase;
use rug::Float;
use sha2::{Digest, Sha256};

/// Outcome of evaluating both sides of one identity instance.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub identity_name: String,
    pub lhs: CScalar,
    pub rhs: CScalar,
    pub abs_residual: Float,
    pub rel_residual: Float,
    pub passed: bool,
    pub params_digest: String,
}

impl VerificationReport {
    /// Report for a single lhs/rhs pair.
    pub fn from_sides(
        name: &str,
        lhs: CScalar,
        rhs: CScalar,
        digest: String,
        ctx: &PrecisionContext,
    ) -> Self {
        let abs = abs_residual(&lhs, &rhs);
        let rel = rel_residual(&lhs, &rhs);
        let passed = rel <= ctx.tolerance();
        Self {
            identity_name: name.to_string(),
            lhs,
            rhs,
            abs_residual: abs,
            rel_residual: rel,
            passed,
            params_digest: digest,
        }
    }

    /// Report whose acceptance also folds in residuals from side checks
    /// (triangularity, entrywise agreement, ...); the recorded residual is
    /// the maximum over the pair residual and all extras.
    pub fn from_sides_with_extras(
        name: &str,
        lhs: CScalar,
        rhs: CScalar,
        extras: &[Float],
        digest: String,
        ctx: &PrecisionContext,
    ) -> Self {
        let mut report = Self::from_sides(name, lhs, rhs, digest, ctx);
        for extra in extras {
            if *extra > report.rel_residual {
                report.rel_residual = extra.clone();
            }
        }
        report.passed = report.rel_residual <= ctx.tolerance();
        report
    }
}

/// Digest for a self-test point (x, p, q).
pub fn selftest_digest(x: &CScalar, p: &CScalar, q: &CScalar) -> String {
    params_digest("theta_selftest", &[x, p, q], &[])
}

/// Short stable digest of a parameter set, for report correlation.
pub(crate) fn params_digest(name: &str, scalars: &[&CScalar], ints: &[i64]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(name.as_bytes());
    for s in scalars {
        hasher.update(s.to_decimal_string(40).as_bytes());
        hasher.update(b";");
    }
    for i in ints {
        hasher.update(i.to_le_bytes());
    }
    let bytes = hasher.finalize();
    bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Denominator shifted factorial with the pole guard applied to every
/// theta factor; returns the prefix table `[(x)_0 .. (x)_{k_max}]`.
pub(crate) fn guarded_table(
    base: &EllipticBase,
    arg: &CScalar,
    k_max: u32,
    label: &str,
    ctx: &PrecisionContext,
) -> Result<Vec<CScalar>> {
    let threshold = ctx.pole_threshold();
    let mut table = Vec::with_capacity(k_max as usize + 1);
    table.push(ctx.one());
    let mut acc = ctx.one();
    let mut x = arg.clone();
    for i in 0..k_max {
        let factor = base.theta_product(&x, ctx)?;
        if factor.abs().to_f64() < threshold {
            return Err(Error::DegenerateParameters {
                factor: format!("theta factor {} of ({label})_{k_max}", i + 1),
            });
        }
        acc = &acc * &factor;
        x = &x * base.q();
        table.push(acc.clone());
    }
    Ok(table)
}

/// Guarded single value `(x)_k`.
pub(crate) fn guarded_poch(
    base: &EllipticBase,
    arg: &CScalar,
    k: u32,
    label: &str,
    ctx: &PrecisionContext,
) -> Result<CScalar> {
    Ok(guarded_table(base, arg, k, label, ctx)?.pop().expect("table is nonempty"))
}

/// Guarded single theta value.
pub(crate) fn guarded_theta(
    base: &EllipticBase,
    arg: &CScalar,
    label: &str,
    ctx: &PrecisionContext,
) -> Result<CScalar> {
    let value = base.theta_product(arg, ctx)?;
    if value.abs().to_f64() < ctx.pole_threshold() {
        return Err(Error::DegenerateParameters {
            factor: format!("theta({label})"),
        });
    }
    Ok(value)
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::DtParams;
    use crate::numeric::PrecisionContext;
    use crate::theta::EllipticBase;

    /// Balanced rows for tests: d_j solved from b_j c_j d_j = constant.
    pub(crate) fn constrained(
        c: &PrecisionContext,
        p: (f64, f64),
        q: (f64, f64),
        a: (f64, f64),
        b: &[(f64, f64)],
        cc: &[(f64, f64)],
        constant: (f64, f64),
    ) -> DtParams {
        let base = EllipticBase::new(c.scalar(p.0, p.1), c.scalar(q.0, q.1)).unwrap();
        let a = c.scalar(a.0, a.1);
        let b: Vec<_> = b.iter().map(|&(re, im)| c.scalar(re, im)).collect();
        let cc: Vec<_> = cc.iter().map(|&(re, im)| c.scalar(re, im)).collect();
        let constant = c.scalar(constant.0, constant.1);
        let d: Vec<_> = b
            .iter()
            .zip(&cc)
            .map(|(bj, cj)| &constant / &(bj * cj))
            .collect();
        DtParams::new(base, a, b, cc, d, c).unwrap()
    }
}

/// Parameters of the determinant transformation and its S3 orbit:
/// `a` and per-row `b_j, c_j, d_j` with `b_j c_j d_j` independent of j.
#[derive(Debug, Clone, PartialEq)]
pub struct DtParams {
    base: EllipticBase,
    a: CScalar,
    b: Vec<CScalar>,
    c: Vec<CScalar>,
    d: Vec<CScalar>,
}

impl DtParams {
    pub fn new(
        base: EllipticBase,
        a: CScalar,
        b: Vec<CScalar>,
        c: Vec<CScalar>,
        d: Vec<CScalar>,
        ctx: &PrecisionContext,
    ) -> Result<Self> {
        let n = b.len();
        if n == 0 || c.len() != n || d.len() != n {
            return Err(Error::ConstraintViolation(
                "b, c, d must have equal positive length".into(),
            ));
        }
        if a.is_zero() || b.iter().chain(&c).chain(&d).any(CScalar::is_zero) {
            return Err(Error::ConstraintViolation(
                "a, b_j, c_j, d_j must be nonzero".into(),
            ));
        }
        let first = &(&b[0] * &c[0]) * &d[0];
        for j in 1..n {
            let prod = &(&b[j] * &c[j]) * &d[j];
            let res = rel_residual(&prod, &first);
            if res > ctx.tolerance() {
                return Err(Error::ConstraintViolation(format!(
                    "b_j c_j d_j is not independent of j (residual {:e} at j = {})",
                    res.to_f64(),
                    j + 1
                )));
            }
        }
        Ok(Self { base, a, b, c, d })
    }

    pub fn base(&self) -> &EllipticBase {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &CScalar {
        &self.a
    }

    pub fn b(&self) -> &[CScalar] {
        &self.b
    }

    pub fn c(&self) -> &[CScalar] {
        &self.c
    }

    pub fn d(&self) -> &[CScalar] {
        &self.d
    }

    /// The derived parameter `e = a^2 / (b_1 c_1 d_1)`; always computed,
    /// never stored, so the balance can not be violated silently.
    pub fn e(&self) -> CScalar {
        let prod = &(&self.b[0] * &self.c[0]) * &self.d[0];
        &self.a.pow_int(2).expect("a is nonzero") / &prod
    }

    pub fn digest(&self) -> String {
        let mut scalars: Vec<&CScalar> = vec![self.base.p(), self.base.q(), &self.a];
        scalars.extend(self.b.iter());
        scalars.extend(self.c.iter());
        scalars.extend(self.d.iter());
        params_digest("dt", &scalars, &[self.n() as i64])
    }
}

/// Parameters of Warnaar's determinant evaluation: `a, b, c` and the
/// row points `x_j`. Coincident `x_j` make both sides legitimately zero,
/// so they are not rejected here.
#[derive(Debug, Clone, PartialEq)]
pub struct WdParams {
    base: EllipticBase,
    a: CScalar,
    b: CScalar,
    c: CScalar,
    x: Vec<CScalar>,
}

impl WdParams {
    pub fn new(
        base: EllipticBase,
        a: CScalar,
        b: CScalar,
        c: CScalar,
        x: Vec<CScalar>,
        ctx: &PrecisionContext,
    ) -> Result<Self> {
        let _ = ctx;
        if x.is_empty() {
            return Err(Error::ConstraintViolation("need at least one x_j".into()));
        }
        if a.is_zero() || b.is_zero() || c.is_zero() || x.iter().any(CScalar::is_zero) {
            return Err(Error::ConstraintViolation(
                "a, b, c, x_j must be nonzero".into(),
            ));
        }
        Ok(Self { base, a, b, c, x })
    }

    pub fn base(&self) -> &EllipticBase {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn a(&self) -> &CScalar {
        &self.a
    }

    pub fn b(&self) -> &CScalar {
        &self.b
    }

    pub fn c(&self) -> &CScalar {
        &self.c
    }

    pub fn x(&self) -> &[CScalar] {
        &self.x
    }

    pub fn digest(&self) -> String {
        let mut scalars: Vec<&CScalar> =
            vec![self.base.p(), self.base.q(), &self.a, &self.b, &self.c];
        scalars.extend(self.x.iter());
        params_digest("warnaar", &scalars, &[self.n() as i64])
    }
}

/// Parameters of the terminating balanced summation: `a, b, c, d, e` with
/// `a^2 q^{n+1} = b c d e`.
#[derive(Debug, Clone, PartialEq)]
pub struct JsParams {
    base: EllipticBase,
    n: u32,
    a: CScalar,
    b: CScalar,
    c: CScalar,
    d: CScalar,
    e: CScalar,
}

impl JsParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        base: EllipticBase,
        n: u32,
        a: CScalar,
        b: CScalar,
        c: CScalar,
        d: CScalar,
        e: CScalar,
        ctx: &PrecisionContext,
    ) -> Result<Self> {
        if a.is_zero() || b.is_zero() || c.is_zero() || d.is_zero() || e.is_zero() {
            return Err(Error::ConstraintViolation(
                "a, b, c, d, e must be nonzero".into(),
            ));
        }
        let lhs = &a.pow_int(2).expect("a nonzero") * &base.q_pow(n as i64 + 1);
        let rhs = &(&b * &c) * &(&d * &e);
        let res = rel_residual(&lhs, &rhs);
        if res > ctx.tolerance() {
            return Err(Error::ConstraintViolation(format!(
                "balance a^2 q^(n+1) = bcde violated (residual {:e})",
                res.to_f64()
            )));
        }
        Ok(Self { base, n, a, b, c, d, e })
    }

    pub fn base(&self) -> &EllipticBase {
        &self.base
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn a(&self) -> &CScalar {
        &self.a
    }

    pub fn b(&self) -> &CScalar {
        &self.b
    }

    pub fn c(&self) -> &CScalar {
        &self.c
    }

    pub fn d(&self) -> &CScalar {
        &self.d
    }

    pub fn e(&self) -> &CScalar {
        &self.e
    }

    pub fn digest(&self) -> String {
        params_digest(
            "jackson",
            &[self.base.p(), self.base.q(), &self.a, &self.b, &self.c, &self.d, &self.e],
            &[self.n as i64],
        )
    }
}

/// Parameters of the multi-dimensional summation: `a, b` and per-row
/// `c_j, d_j, e_j` with `b c_j d_j e_j = a^2 q^{2-n+m_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CntParams {
    base: EllipticBase,
    m: Vec<u32>,
    a: CScalar,
    b: CScalar,
    c: Vec<CScalar>,
    d: Vec<CScalar>,
    e: Vec<CScalar>,
}

impl CntParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        base: EllipticBase,
        m: Vec<u32>,
        a: CScalar,
        b: CScalar,
        c: Vec<CScalar>,
        d: Vec<CScalar>,
        e: Vec<CScalar>,
        ctx: &PrecisionContext,
    ) -> Result<Self> {
        let n = m.len();
        if n == 0 || c.len() != n || d.len() != n || e.len() != n {
            return Err(Error::ConstraintViolation(
                "m, c, d, e must have equal positive length".into(),
            ));
        }
        if a.is_zero() || b.is_zero() || c.iter().chain(&d).chain(&e).any(CScalar::is_zero) {
            return Err(Error::ConstraintViolation(
                "a, b, c_j, d_j, e_j must be nonzero".into(),
            ));
        }
        let a_sq = a.pow_int(2).expect("a nonzero");
        for j in 0..n {
            let lhs = &(&b * &c[j]) * &(&d[j] * &e[j]);
            let rhs = &a_sq * &base.q_pow(2 - n as i64 + m[j] as i64);
            let res = rel_residual(&lhs, &rhs);
            if res > ctx.tolerance() {
                return Err(Error::ConstraintViolation(format!(
                    "balance b c_j d_j e_j = a^2 q^(2-n+m_j) violated at j = {} (residual {:e})",
                    j + 1,
                    res.to_f64()
                )));
            }
        }
        Ok(Self { base, m, a, b, c, d, e })
    }

    pub fn base(&self) -> &EllipticBase {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn m(&self) -> &[u32] {
        &self.m
    }

    pub fn a(&self) -> &CScalar {
        &self.a
    }

    pub fn b(&self) -> &CScalar {
        &self.b
    }

    pub fn c(&self) -> &[CScalar] {
        &self.c
    }

    pub fn d(&self) -> &[CScalar] {
        &self.d
    }

    pub fn e(&self) -> &[CScalar] {
        &self.e
    }

    pub fn digest(&self) -> String {
        let mut scalars: Vec<&CScalar> = vec![self.base.p(), self.base.q(), &self.a, &self.b];
        scalars.extend(self.c.iter());
        scalars.extend(self.d.iter());
        scalars.extend(self.e.iter());
        let mut ints: Vec<i64> = vec![self.n() as i64];
        ints.extend(self.m.iter().map(|&v| v as i64));
        params_digest("cnt", &scalars, &ints)
    }
}

/// Parameters of the trigonometric determinant transformation (p = 0):
/// base `q` and per-row `z_j, a_j`, with no balancing condition.
#[derive(Debug, Clone, PartialEq)]
pub struct TdtParams {
    q: CScalar,
    z: Vec<CScalar>,
    a: Vec<CScalar>,
}

impl TdtParams {
    pub fn new(q: CScalar, z: Vec<CScalar>, a: Vec<CScalar>) -> Result<Self> {
        let n = z.len();
        if n == 0 || a.len() != n {
            return Err(Error::ConstraintViolation(
                "z and a must have equal positive length".into(),
            ));
        }
        Ok(Self { q, z, a })
    }

    pub fn q(&self) -> &CScalar {
        &self.q
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[CScalar] {
        &self.z
    }

    pub fn a(&self) -> &[CScalar] {
        &self.a
    }

    pub fn digest(&self) -> String {
        let mut scalars: Vec<&CScalar> = vec![&self.q];
        scalars.extend(self.z.iter());
        scalars.extend(self.a.iter());
        params_digest("tdt", &scalars, &[self.n() as i64])
    }
}

pub(crate) use cnt::pole_check as cnt_pole_check;
pub(crate) use dt::pole_check as dt_pole_check;
pub(crate) use jackson::pole_check as jackson_pole_check;
pub(crate) use tdt::pole_check as tdt_pole_check;
pub(crate) use warnaar::pole_check as warnaar_pole_check;
