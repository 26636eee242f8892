//! Seeded generation of random parameter sets satisfying each identity's
//! balancing constraints.
//!
//! Constraints are enforced by solving for the last variable (d_j, e, e_j),
//! so constraint residuals are pure rounding and "constraint satisfied"
//! stays separate from "identity verified". Sets whose denominator theta
//! factors land near the vanishing lattice are rejected and redrawn; the
//! rejection runs the evaluators' own pole guards, so an accepted set is
//! never refused downstream.
//!
//! Draws are deterministic in (seed, draw order): moduli and phases come
//! from a ChaCha stream mapped through fixed arithmetic, never from
//! platform- or version-dependent distributions.

use crate::error::{Error, Result};
use crate::identities::{
    cnt_pole_check, dt_pole_check, jackson_pole_check, tdt_pole_check, warnaar_pole_check,
    CntParams, DtParams, JsParams, TdtParams, WdParams,
};
use crate::numeric::{rel_residual, CScalar, PrecisionContext};
use crate::theta::EllipticBase;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Knobs for one sampling campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Modulus window for generic scalars.
    pub modulus_range: (f64, f64),
    /// Nome modulus is drawn uniformly from [0, p_modulus_max]; 0 pins the
    /// trigonometric case exactly.
    pub p_modulus_max: f64,
    /// Rejection threshold for near-pole denominators and coincident
    /// points; `None` derives 10^-(precision_bits/4) from the context.
    pub pole_threshold: Option<f64>,
    pub max_rejections: u32,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            modulus_range: (0.2, 2.0),
            p_modulus_max: 0.6,
            pole_threshold: None,
            max_rejections: 1000,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.modulus_range;
        if !(lo > 0.0 && lo <= hi) {
            return Err(Error::InvalidSpec(format!(
                "modulus range ({lo}, {hi}) must satisfy 0 < lo <= hi"
            )));
        }
        if !(0.0..1.0).contains(&self.p_modulus_max) {
            return Err(Error::InvalidSpec(format!(
                "p modulus max {} must lie in [0, 1)",
                self.p_modulus_max
            )));
        }
        if self.max_rejections == 0 {
            return Err(Error::InvalidSpec("max_rejections must be positive".into()));
        }
        Ok(())
    }
}

/// Owns one generator state; concurrent campaigns use distinct seeds.
pub struct Sampler {
    cfg: SamplerConfig,
    ctx: PrecisionContext,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(cfg: SamplerConfig, ctx: &PrecisionContext) -> Result<Self> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Self {
            cfg,
            ctx: ctx.clone(),
            rng,
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    fn threshold(&self) -> f64 {
        self.cfg.pole_threshold.unwrap_or_else(|| self.ctx.pole_threshold())
    }

    /// Uniform in [0, 1) with exactly 53 random bits.
    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Scalar with modulus uniform in [lo, hi] and phase uniform in [0, 2pi).
    pub fn sample_scalar_in(&mut self, lo: f64, hi: f64) -> CScalar {
        let r = lo + (hi - lo) * self.uniform();
        let phi = 2.0 * std::f64::consts::PI * self.uniform();
        self.ctx.scalar(r * phi.cos(), r * phi.sin())
    }

    /// Scalar from the configured modulus window.
    pub fn sample_scalar(&mut self) -> CScalar {
        let (lo, hi) = self.cfg.modulus_range;
        self.sample_scalar_in(lo, hi)
    }

    /// Uniform integer grid bound in 0..=max.
    pub fn sample_grid_bound(&mut self, max: u32) -> u32 {
        (self.rng.next_u64() % (max as u64 + 1)) as u32
    }

    /// Nome with modulus uniform in [0, p_modulus_max].
    pub fn sample_nome(&mut self) -> CScalar {
        if self.cfg.p_modulus_max == 0.0 {
            // burn the same number of draws so downstream values
            // do not depend on the p window
            let _ = self.uniform();
            let _ = self.uniform();
            return self.ctx.zero();
        }
        self.sample_scalar_in(0.0, self.cfg.p_modulus_max)
    }

    fn sample_base(&mut self) -> Result<EllipticBase> {
        let p = self.sample_nome();
        let q = self.sample_scalar();
        EllipticBase::new(p, q)
    }

    /// Run `draw` until the produced set clears `accept`, up to the
    /// configured rejection budget.
    fn rejection_loop<T>(
        &mut self,
        mut draw: impl FnMut(&mut Self) -> Result<T>,
        accept: impl Fn(&T, &PrecisionContext) -> Result<()>,
    ) -> Result<T> {
        let mut rejections = 0;
        loop {
            let candidate = draw(self)?;
            match accept(&candidate, &self.ctx) {
                Ok(()) => return Ok(candidate),
                Err(Error::DegenerateParameters { .. }) => {
                    rejections += 1;
                    if rejections >= self.cfg.max_rejections {
                        return Err(Error::SamplerExhausted(rejections));
                    }
                }
                Err(other) => return Err(other),
            }
        }
    }

    /// Balanced rows for the determinant transformation: d_j is solved from
    /// b_j c_j d_j = constant, so the balance holds at working precision.
    pub fn sample_dt(&mut self, n: u32) -> Result<DtParams> {
        if n == 0 {
            return Err(Error::InvalidSpec("need n >= 1".into()));
        }
        self.rejection_loop(
            |s| {
                let base = s.sample_base()?;
                let a = s.sample_scalar();
                let constant = s.sample_scalar();
                let b: Vec<_> = (0..n).map(|_| s.sample_scalar()).collect();
                let c: Vec<_> = (0..n).map(|_| s.sample_scalar()).collect();
                let d: Vec<_> = b
                    .iter()
                    .zip(&c)
                    .map(|(bj, cj)| &constant / &(bj * cj))
                    .collect();
                DtParams::new(base, a, b, c, d, &s.ctx)
            },
            dt_pole_check,
        )
    }

    /// Balanced summation parameters: e solved from a^2 q^{n+1} = bcde.
    pub fn sample_jackson(&mut self, n: u32) -> Result<JsParams> {
        self.rejection_loop(
            |s| {
                let base = s.sample_base()?;
                let a = s.sample_scalar();
                let b = s.sample_scalar();
                let c = s.sample_scalar();
                let d = s.sample_scalar();
                let e = &(&a.pow_int(2)? * &base.q_pow(n as i64 + 1)) / &(&(&b * &c) * &d);
                JsParams::new(base, n, a, b, c, d, e, &s.ctx)
            },
            jackson_pole_check,
        )
    }

    /// Multi-row balanced parameters: e_j solved from
    /// b c_j d_j e_j = a^2 q^{2-n+m_j}.
    pub fn sample_cnt(&mut self, m: &[u32]) -> Result<CntParams> {
        if m.is_empty() {
            return Err(Error::InvalidSpec("need at least one row bound".into()));
        }
        let n = m.len();
        let m = m.to_vec();
        self.rejection_loop(
            |s| {
                let base = s.sample_base()?;
                let a = s.sample_scalar();
                let b = s.sample_scalar();
                let c: Vec<_> = (0..n).map(|_| s.sample_scalar()).collect();
                let d: Vec<_> = (0..n).map(|_| s.sample_scalar()).collect();
                let a_sq = a.pow_int(2)?;
                let e: Vec<_> = (0..n)
                    .map(|j| {
                        let target = &a_sq * &base.q_pow(2 - n as i64 + m[j] as i64);
                        &target / &(&(&b * &c[j]) * &d[j])
                    })
                    .collect();
                CntParams::new(base, m.clone(), a, b, c, d, e, &s.ctx)
            },
            cnt_pole_check,
        )
    }

    /// Unconstrained points for the determinant evaluation, with pairwise
    /// distinctness of the x_j enforced by rejection.
    pub fn sample_warnaar(&mut self, n: u32) -> Result<WdParams> {
        if n == 0 {
            return Err(Error::InvalidSpec("need n >= 1".into()));
        }
        let threshold = self.threshold();
        self.rejection_loop(
            |s| {
                let base = s.sample_base()?;
                let a = s.sample_scalar();
                let b = s.sample_scalar();
                let c = s.sample_scalar();
                let x: Vec<_> = (0..n).map(|_| s.sample_scalar()).collect();
                WdParams::new(base, a, b, c, x, &s.ctx)
            },
            move |params, ctx| {
                let x = params.x();
                for i in 0..x.len() {
                    for j in i + 1..x.len() {
                        if rel_residual(&x[i], &x[j]).to_f64() < threshold {
                            return Err(Error::DegenerateParameters {
                                factor: format!("x_{} and x_{} coincide", i + 1, j + 1),
                            });
                        }
                    }
                }
                warnaar_pole_check(params, ctx)
            },
        )
    }

    /// Unconstrained trigonometric parameters.
    pub fn sample_tdt(&mut self, n: u32) -> Result<TdtParams> {
        if n == 0 {
            return Err(Error::InvalidSpec("need n >= 1".into()));
        }
        self.rejection_loop(
            |s| {
                let q = s.sample_scalar();
                let z: Vec<_> = (0..n).map(|_| s.sample_scalar()).collect();
                let a: Vec<_> = (0..n).map(|_| s.sample_scalar()).collect();
                TdtParams::new(q, z, a)
            },
            tdt_pole_check,
        )
    }
}
