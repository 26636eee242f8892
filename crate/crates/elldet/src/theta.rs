//! Theta products, a triple-product series oracle, and elliptic /
//! trigonometric shifted factorials.
//!
//! The multiplicative theta function used throughout is
//!
//! ```text
//! theta(x) = prod_{j>=0} (1 - p^j x)(1 - p^{j+1}/x),      |p| < 1,
//! ```
//!
//! with the elliptic shifted factorial
//! `(a)_k = theta(a) theta(aq) ... theta(aq^{k-1})` and its trigonometric
//! (p = 0) reduction `(a)_k^trig = (1-a)(1-aq)...(1-aq^{k-1})`.
//!
//! [`EllipticBase::theta_series`] evaluates the same function through the
//! Jacobi triple product and is used only as a cross-check oracle; it never
//! feeds the identity evaluators, so a disagreement localizes a theta bug.

use crate::error::{Error, Result};
use crate::numeric::{CScalar, PrecisionContext};

/// Hard ceiling on truncation lengths; reached only for |p| close to 1.
const MAX_FACTORS: u64 = 1_000_000;

/// The fixed pair (p, q): nome and base of one evaluation domain.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticBase {
    p: CScalar,
    q: CScalar,
}

impl EllipticBase {
    /// Requires |p| < 1 strictly and q != 0.
    pub fn new(p: CScalar, q: CScalar) -> Result<Self> {
        let p_mod = p.abs().to_f64();
        if p_mod.is_nan() || p_mod >= 1.0 {
            return Err(Error::NomeOutOfRange(p_mod));
        }
        if q.is_zero() {
            return Err(Error::ZeroBase);
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> &CScalar {
        &self.p
    }

    pub fn q(&self) -> &CScalar {
        &self.q
    }

    /// Integer power of the base, `q^k`.
    pub fn q_pow(&self, k: i64) -> CScalar {
        self.q.pow_int(k).expect("q is nonzero by construction")
    }

    /// Number of product factors J so that the dropped tail is below the
    /// working precision: J = ceil(wp / log2(1/|p|)), clamped to
    /// [1, 10^6]. Errors out for |p| > 0.99 where J explodes.
    fn truncation(&self, ctx: &PrecisionContext) -> Result<u64> {
        let p_mod = self.p.abs().to_f64();
        if p_mod > 0.99 {
            return Err(Error::NomeOutOfRange(p_mod));
        }
        if p_mod == 0.0 {
            return Ok(1);
        }
        let bits_per_factor = -p_mod.log2();
        let j = (ctx.working_prec() as f64 / bits_per_factor).ceil() as u64;
        Ok(j.clamp(ctx.theta_truncation().max(1), MAX_FACTORS))
    }

    /// Truncated theta product. For p = 0 this is exactly 1 - x.
    pub fn theta_product(&self, x: &CScalar, ctx: &PrecisionContext) -> Result<CScalar> {
        if x.is_zero() {
            return Err(Error::ThetaAtZero);
        }
        let one = ctx.one();
        if self.p.is_zero() {
            return Ok(&one - x);
        }
        let factors = self.truncation(ctx)?;
        let x_inv = x.recip()?;
        let mut acc = one.clone();
        // p^j x and p^{j+1}/x, advanced one factor of p per iteration
        let mut pj_x = x.clone();
        let mut pj1_over_x = &self.p * &x_inv;
        for _ in 0..factors {
            acc = &acc * &(&one - &pj_x);
            acc = &acc * &(&one - &pj1_over_x);
            pj_x = &pj_x * &self.p;
            pj1_over_x = &pj1_over_x * &self.p;
        }
        Ok(acc)
    }

    /// Independent oracle via the Jacobi triple product:
    ///
    /// ```text
    /// theta(x) = (1 / prod_{j>=1}(1 - p^j)) * sum_{n in Z} (-1)^n p^{n(n-1)/2} x^n
    /// ```
    ///
    /// summed until the dropped terms fall below the working precision.
    pub fn theta_series(&self, x: &CScalar, ctx: &PrecisionContext) -> Result<CScalar> {
        if x.is_zero() {
            return Err(Error::ThetaAtZero);
        }
        let one = ctx.one();
        if self.p.is_zero() {
            return Ok(&one - x);
        }
        let factors = self.truncation(ctx)?;
        let p_mod = self.p.abs().to_f64();
        let bits_per_factor = -p_mod.log2();
        let x_mod = x.abs().to_f64();
        let target = (ctx.working_prec() + 16) as f64;

        // Smallest N with C(N,2) log2(1/|p|) - N * growth_bits >= target.
        let cutoff = |growth_bits: f64| -> u64 {
            let mut n: u64 = 2;
            while (n * (n - 1) / 2) as f64 * bits_per_factor - n as f64 * growth_bits < target {
                n += 1;
                if n >= MAX_FACTORS {
                    break;
                }
            }
            n
        };
        let n_up = cutoff(x_mod.log2().max(0.0));
        let n_down = cutoff((-x_mod.log2()).max(0.0));

        let x_inv = x.recip()?;
        let mut sum = one.clone(); // n = 0 term
        // Ascending: t_{n+1} = -t_n * x * p^n.
        let mut term = one.clone();
        let mut p_pow = one.clone();
        for _ in 0..n_up {
            term = -(&term * x);
            term = &term * &p_pow;
            p_pow = &p_pow * &self.p;
            sum = &sum + &term;
        }
        // Descending: t_{n-1} = -t_n * p^{1-n} / x, exponent 1-n = 1, 2, ...
        let mut term = one.clone();
        let mut p_pow = self.p.clone();
        for _ in 0..n_down {
            term = -(&term * &x_inv);
            term = &term * &p_pow;
            p_pow = &p_pow * &self.p;
            sum = &sum + &term;
        }

        // Euler factor prod_{j>=1}(1 - p^j), truncated like the product.
        let mut euler = one.clone();
        let mut pj = self.p.clone();
        for _ in 0..factors {
            euler = &euler * &(&one - &pj);
            pj = &pj * &self.p;
        }
        Ok(&sum / &euler)
    }

    /// Elliptic shifted factorial `(a)_k = theta(a) theta(aq) ... theta(aq^{k-1})`.
    pub fn pochhammer(&self, a: &CScalar, k: u32, ctx: &PrecisionContext) -> Result<CScalar> {
        let mut acc = ctx.one();
        let mut arg = a.clone();
        for _ in 0..k {
            acc = &acc * &self.theta_product(&arg, ctx)?;
            arg = &arg * &self.q;
        }
        Ok(acc)
    }

    /// Product form `(a_1, ..., a_n)_k = (a_1)_k ... (a_n)_k`; empty list is 1.
    pub fn pochhammer_list(&self, args: &[CScalar], k: u32, ctx: &PrecisionContext) -> Result<CScalar> {
        let mut acc = ctx.one();
        for a in args {
            acc = &acc * &self.pochhammer(a, k, ctx)?;
        }
        Ok(acc)
    }

    /// Prefix table `[(a)_0, (a)_1, ..., (a)_{k_max}]`, sharing theta values
    /// across truncation orders; the workhorse behind the determinant
    /// entries.
    pub fn pochhammer_table(&self, a: &CScalar, k_max: u32, ctx: &PrecisionContext) -> Result<Vec<CScalar>> {
        let mut table = Vec::with_capacity(k_max as usize + 1);
        table.push(ctx.one());
        let mut acc = ctx.one();
        let mut arg = a.clone();
        for _ in 0..k_max {
            acc = &acc * &self.theta_product(&arg, ctx)?;
            arg = &arg * &self.q;
            table.push(acc.clone());
        }
        Ok(table)
    }
}

/// Trigonometric (q-)shifted factorial `(a)_k^trig = (1-a)(1-aq)...(1-aq^{k-1})`,
/// the exact p = 0 reduction of the elliptic one.
pub fn trig_pochhammer(a: &CScalar, k: u32, q: &CScalar, ctx: &PrecisionContext) -> CScalar {
    let one = ctx.one();
    let mut acc = one.clone();
    let mut arg = a.clone();
    for _ in 0..k {
        acc = &acc * &(&one - &arg);
        arg = &arg * q;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{binom, rel_residual};
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256, 32, 1e-35).unwrap()
    }

    fn uniform(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Random scalar with modulus in [lo, hi] and uniform phase.
    fn rand_scalar(rng: &mut ChaCha8Rng, lo: f64, hi: f64, c: &PrecisionContext) -> CScalar {
        let r = lo + (hi - lo) * uniform(rng);
        let phi = 2.0 * std::f64::consts::PI * uniform(rng);
        c.scalar(r * phi.cos(), r * phi.sin())
    }

    fn base(p: CScalar, q: CScalar) -> EllipticBase {
        EllipticBase::new(p, q).unwrap()
    }

    #[test]
    fn product_at_zero_nome_is_one_minus_x() {
        let c = ctx();
        let b = base(c.zero(), c.scalar(0.5, 0.0));
        let v = b.theta_product(&c.from_int(2), &c).unwrap();
        assert_eq!(v, c.from_int(-1));
        let s = b.theta_series(&c.from_int(2), &c).unwrap();
        assert_eq!(s, c.from_int(-1));
    }

    #[test]
    fn theta_vanishes_at_one() {
        let c = ctx();
        let b = base(c.scalar(0.25, 0.0), c.scalar(0.5, 0.0));
        let v = b.theta_product(&c.one(), &c).unwrap();
        assert!(v.abs().to_f64() < 2f64.powi(-(288 - 8)));
        let b3 = base(c.scalar(0.3, 0.0), c.scalar(0.5, 0.0));
        let s = b3.theta_series(&c.one(), &c).unwrap();
        assert!(s.abs().to_f64() < 2f64.powi(-(256 - 8)));
    }

    #[test]
    fn theta_rejects_zero_argument_and_divergent_nome() {
        let c = ctx();
        let b = base(c.scalar(0.25, 0.0), c.scalar(0.5, 0.0));
        assert!(matches!(b.theta_product(&c.zero(), &c), Err(Error::ThetaAtZero)));
        assert!(EllipticBase::new(c.one(), c.scalar(0.5, 0.0)).is_err());
        assert!(EllipticBase::new(c.scalar(0.2, 0.0), c.zero()).is_err());
        let near_one = base(c.scalar(0.995, 0.0), c.scalar(0.5, 0.0));
        assert!(matches!(
            near_one.theta_product(&c.from_int(2), &c),
            Err(Error::NomeOutOfRange(_))
        ));
    }

    #[test]
    fn series_agrees_with_product_at_reference_points() {
        let c = ctx();
        let bound = 2f64.powi(-224);
        let b = base(c.scalar(0.25, 0.0), c.scalar(0.5, 0.0));
        let x = c.scalar(0.5, 0.0);
        let r = rel_residual(
            &b.theta_product(&x, &c).unwrap(),
            &b.theta_series(&x, &c).unwrap(),
        );
        assert!(r.to_f64() <= bound, "residual {:e}", r.to_f64());

        let b4 = base(c.scalar(0.4, 0.0), c.scalar(0.5, 0.0));
        let x = c.scalar(0.7, 0.1);
        let r = rel_residual(
            &b4.theta_product(&x, &c).unwrap(),
            &b4.theta_series(&x, &c).unwrap(),
        );
        assert!(r.to_f64() <= bound, "residual {:e}", r.to_f64());
    }

    #[test]
    fn series_agrees_with_product_over_random_sweep() {
        let c = ctx();
        let bound = 2f64.powi(-224);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = rand_scalar(&mut rng, 0.0, 0.6, &c);
            let x = rand_scalar(&mut rng, 1e-2, 1e2, &c);
            let b = base(p, c.scalar(0.5, 0.0));
            let prod = b.theta_product(&x, &c).unwrap();
            let ser = b.theta_series(&x, &c).unwrap();
            let r = rel_residual(&prod, &ser);
            assert!(r.to_f64() <= bound, "residual {:e} at x={x}", r.to_f64());
        }
    }

    #[test]
    fn quasi_periodicity_and_inversion() {
        let c = ctx();
        let bound = 2f64.powi(-(288 - 16));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let p = rand_scalar(&mut rng, 0.05, 0.6, &c);
            let x = rand_scalar(&mut rng, 0.2, 2.0, &c);
            let b = base(p, c.scalar(0.5, 0.0));
            let tx = b.theta_product(&x, &c).unwrap();
            let scaled = -(&tx / &x);
            let tpx = b.theta_product(&(b.p() * &x), &c).unwrap();
            assert!(rel_residual(&tpx, &scaled).to_f64() <= bound);
            let tinv = b.theta_product(&x.recip().unwrap(), &c).unwrap();
            assert!(rel_residual(&tinv, &scaled).to_f64() <= bound);
        }
    }

    #[test]
    fn pochhammer_small_orders() {
        let c = ctx();
        let b = base(c.scalar(0.2, 0.0), c.scalar(0.7, 0.0));
        let a = c.scalar(0.3, 0.0);
        assert_eq!(b.pochhammer(&a, 0, &c).unwrap(), c.one());
        let k1 = b.pochhammer(&a, 1, &c).unwrap();
        assert_eq!(k1, b.theta_product(&a, &c).unwrap());

        // (a)_3 = theta(0.3) theta(0.21) theta(0.147) against direct
        // multiplication of series-oracle values
        let k3 = b.pochhammer(&a, 3, &c).unwrap();
        let aq = &a * b.q();
        let aq2 = &aq * b.q();
        let direct = &(&b.theta_series(&a, &c).unwrap() * &b.theta_series(&aq, &c).unwrap())
            * &b.theta_series(&aq2, &c).unwrap();
        assert!(rel_residual(&k3, &direct).to_f64() <= 2f64.powi(-224));
    }

    #[test]
    fn pochhammer_list_unrolls() {
        let c = ctx();
        let b = base(c.scalar(0.2, 0.0), c.scalar(0.7, 0.0));
        assert_eq!(b.pochhammer_list(&[], 5, &c).unwrap(), c.one());
        let a = c.scalar(0.3, 0.1);
        let single = b.pochhammer_list(std::slice::from_ref(&a), 2, &c).unwrap();
        assert_eq!(single, b.pochhammer(&a, 2, &c).unwrap());

        let y = c.scalar(-0.4, 0.2);
        let pair = b.pochhammer_list(&[a.clone(), y.clone()], 2, &c).unwrap();
        let unrolled = &(&b.theta_product(&a, &c).unwrap()
            * &b.theta_product(&(&a * b.q()), &c).unwrap())
            * &(&b.theta_product(&y, &c).unwrap() * &b.theta_product(&(&y * b.q()), &c).unwrap());
        assert!(rel_residual(&pair, &unrolled).to_f64() <= 2f64.powi(-260));
    }

    #[test]
    fn pochhammer_table_matches_pointwise() {
        let c = ctx();
        let b = base(c.scalar(0.3, 0.1), c.scalar(0.6, -0.2));
        let a = c.scalar(0.9, 0.4);
        let table = b.pochhammer_table(&a, 6, &c).unwrap();
        for (k, entry) in table.iter().enumerate() {
            let direct = b.pochhammer(&a, k as u32, &c).unwrap();
            assert!(rel_residual(entry, &direct).to_f64() <= 2f64.powi(-260));
        }
    }

    #[test]
    fn trig_pochhammer_examples() {
        let c = ctx();
        let q = c.scalar(0.5, 0.0);
        let a = c.scalar(2.0, 0.0);
        assert_eq!(trig_pochhammer(&a, 0, &q, &c), c.one());
        assert_eq!(trig_pochhammer(&a, 1, &q, &c), c.from_int(-1));
        let v = trig_pochhammer(&c.scalar(0.5, 0.0), 3, &q, &c);
        assert_eq!(v, c.scalar(0.328125, 0.0));
    }

    #[test]
    fn zero_nome_pochhammer_equals_trig_exactly() {
        let c = ctx();
        let q = c.scalar(0.35, 0.15);
        let b = base(c.zero(), q.clone());
        let a = c.scalar(1.3, -0.7);
        for k in 0..6 {
            let ell = b.pochhammer(&a, k, &c).unwrap();
            let trig = trig_pochhammer(&a, k, &q, &c);
            assert_eq!(ell, trig);
        }
    }

    /// (x)_{j-1}/(y)_{j-1} = (x/y)^{j-1} (q^{2-j}/x)_{j-1} / (q^{2-j}/y)_{j-1}
    #[test]
    fn elementary_ratio_identity() {
        let c = ctx();
        let bound = 2f64.powi(-224);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for j in 1u32..=8 {
            let p = rand_scalar(&mut rng, 0.05, 0.6, &c);
            let q = rand_scalar(&mut rng, 0.2, 2.0, &c);
            let b = base(p, q.clone());
            let x = rand_scalar(&mut rng, 0.2, 2.0, &c);
            let y = rand_scalar(&mut rng, 0.2, 2.0, &c);
            let lhs = &b.pochhammer(&x, j - 1, &c).unwrap() / &b.pochhammer(&y, j - 1, &c).unwrap();
            let shift = b.q_pow(2 - j as i64);
            let rhs = &(&x / &y).pow_int((j - 1) as i64).unwrap()
                * &(&b.pochhammer(&(&shift / &x), j - 1, &c).unwrap()
                    / &b.pochhammer(&(&shift / &y), j - 1, &c).unwrap());
            assert!(rel_residual(&lhs, &rhs).to_f64() <= bound, "j = {j}");
        }
    }

    /// prod_{j=2}^n (a q^{j-2})_{j-1} = prod_{j=2}^n (a q^{2n-2j})_{j-1}
    ///   = (-a)^C(n,2) q^{3 C(n,3)} prod_{j=2}^n (q^{2-2n+j}/a)_{j-1}
    #[test]
    fn prefactor_product_identities() {
        let c = ctx();
        let bound = 2f64.powi(-200);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 2u32..=8 {
            let p = rand_scalar(&mut rng, 0.05, 0.5, &c);
            let q = rand_scalar(&mut rng, 0.3, 1.5, &c);
            let b = base(p, q);
            let a = rand_scalar(&mut rng, 0.2, 2.0, &c);

            let mut first = c.one();
            let mut second = c.one();
            let mut third = c.one();
            for j in 2..=n {
                let aq = &a * &b.q_pow(j as i64 - 2);
                first = &first * &b.pochhammer(&aq, j - 1, &c).unwrap();
                let aq2 = &a * &b.q_pow(2 * n as i64 - 2 * j as i64);
                second = &second * &b.pochhammer(&aq2, j - 1, &c).unwrap();
                let inv = &b.q_pow(2 - 2 * n as i64 + j as i64) / &a;
                third = &third * &b.pochhammer(&inv, j - 1, &c).unwrap();
            }
            let scale = &(-&a).pow_int(binom(n, 2)).unwrap() * &b.q_pow(3 * binom(n, 3));
            let third_scaled = &scale * &third;
            assert!(rel_residual(&first, &second).to_f64() <= bound, "n = {n}");
            assert!(rel_residual(&first, &third_scaled).to_f64() <= bound, "n = {n}");
        }
    }
}
