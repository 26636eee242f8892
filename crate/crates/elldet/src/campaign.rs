//! Batch verification campaigns and machine-readable reports.
//!
//! A campaign runs `trials` evaluations for every order in an inclusive
//! n-range, with per-trial seeds derived as `seed + trial`, and aggregates
//! per-trial rows into a result that serializes to JSON (stable key order,
//! high-precision values as decimal strings), CSV, or a human summary.
//! Near-pole trials count as rejects, never as failures. Trials run
//! concurrently; rows are ordered by (n, trial) before serialization, so
//! aggregation is order-independent.

use crate::error::{Error, Result};
use crate::identities::{
    check_cnt_specialization, check_xy_factorization, eval_cnt, eval_dt, eval_et, eval_jackson,
    eval_tdt, eval_ts, eval_warnaar, EtBranch, VerificationReport,
};
use crate::linalg::ComplexMatrix;
use crate::numeric::{float_to_decimal, rel_residual, PrecisionContext};
use crate::sampling::{Sampler, SamplerConfig};
use crate::symmetry::{check_group_laws, hexagon_consistency};
use crate::theta::{trig_pochhammer, EllipticBase};
use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

/// Which check a campaign exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityKind {
    Jackson,
    Warnaar,
    Dt,
    Ts,
    Et1,
    Et2,
    Et3,
    Tdt,
    Cnt,
    Xy,
    CntSpecial,
    Orbit,
    ThetaSelftest,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 13] = [
        IdentityKind::Jackson,
        IdentityKind::Warnaar,
        IdentityKind::Dt,
        IdentityKind::Ts,
        IdentityKind::Et1,
        IdentityKind::Et2,
        IdentityKind::Et3,
        IdentityKind::Tdt,
        IdentityKind::Cnt,
        IdentityKind::Xy,
        IdentityKind::CntSpecial,
        IdentityKind::Orbit,
        IdentityKind::ThetaSelftest,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IdentityKind::Jackson => "jackson",
            IdentityKind::Warnaar => "warnaar",
            IdentityKind::Dt => "dt",
            IdentityKind::Ts => "ts",
            IdentityKind::Et1 => "et1",
            IdentityKind::Et2 => "et2",
            IdentityKind::Et3 => "et3",
            IdentityKind::Tdt => "tdt",
            IdentityKind::Cnt => "cnt",
            IdentityKind::Xy => "xy",
            IdentityKind::CntSpecial => "cnt_special",
            IdentityKind::Orbit => "orbit",
            IdentityKind::ThetaSelftest => "theta_selftest",
        }
    }

    /// Smallest order the check is defined for.
    fn min_n(&self) -> u32 {
        match self {
            IdentityKind::Jackson | IdentityKind::ThetaSelftest => 0,
            _ => 1,
        }
    }

    /// Largest order the check accepts.
    fn max_n(&self) -> u32 {
        match self {
            IdentityKind::CntSpecial => 5,
            _ => 10,
        }
    }
}

impl fmt::Display for IdentityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown identity '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
    Human,
}

/// Full description of one campaign; echoed verbatim into the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub identity: IdentityKind,
    pub n_lo: u32,
    pub n_hi: u32,
    pub trials: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<Vec<u32>>,
    pub precision_bits: u32,
    pub guard_bits: u32,
    pub tolerance: f64,
    pub seed: u64,
    pub p_modulus_max: f64,
    pub output: OutputFormat,
}

impl CampaignSpec {
    /// Defaults from the acceptance configuration: 256-bit precision,
    /// 32 guard bits, tolerance 1e-35, |p| <= 0.6.
    pub fn new(identity: IdentityKind, n_lo: u32, n_hi: u32, trials: u32, seed: u64) -> Self {
        Self {
            identity,
            n_lo,
            n_hi,
            trials,
            m: None,
            precision_bits: 256,
            guard_bits: 32,
            tolerance: 1e-35,
            seed,
            p_modulus_max: 0.6,
            output: OutputFormat::Json,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_lo > self.n_hi {
            return Err(Error::InvalidSpec(format!(
                "empty n range {}..{}",
                self.n_lo, self.n_hi
            )));
        }
        if self.n_hi > 10 {
            return Err(Error::InvalidSpec("n range is limited to [0, 10]".into()));
        }
        if self.n_lo < self.identity.min_n() {
            return Err(Error::InvalidSpec(format!(
                "identity '{}' needs n >= {}",
                self.identity,
                self.identity.min_n()
            )));
        }
        if self.n_hi > self.identity.max_n() {
            return Err(Error::InvalidSpec(format!(
                "identity '{}' is limited to n <= {}",
                self.identity,
                self.identity.max_n()
            )));
        }
        if self.trials == 0 || self.trials > 1_000_000 {
            return Err(Error::InvalidSpec(format!(
                "trials {} outside [1, 10^6]",
                self.trials
            )));
        }
        if let Some(m) = &self.m {
            if self.identity != IdentityKind::Cnt {
                return Err(Error::InvalidSpec(
                    "--m applies only to the cnt identity".into(),
                ));
            }
            if self.n_lo != self.n_hi || m.len() != self.n_lo as usize {
                return Err(Error::InvalidSpec(format!(
                    "m list of length {} requires a fixed n range of the same length",
                    m.len()
                )));
            }
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::InvalidSpec("tolerance must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.p_modulus_max) {
            return Err(Error::InvalidSpec("p modulus max must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Pass,
    Fail,
    Reject,
}

/// One evaluated (or rejected) trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u32,
    pub n: u32,
    pub identity: String,
    pub lhs: String,
    pub rhs: String,
    pub rel_residual: String,
    pub status: TrialStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub max_rel_residual: String,
    pub pass: u32,
    pub fail: u32,
    pub reject: u32,
    pub wall_time_ms: u64,
}

/// Spec echo, per-trial rows sorted by (n, trial), and the aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub spec: CampaignSpec,
    pub results: Vec<TrialRecord>,
    pub summary: Summary,
}

impl CampaignResult {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report structs serialize");
        out.push('\n');
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,n,identity,rel_residual,status\n");
        for row in &self.results {
            let status = match row.status {
                TrialStatus::Pass => "pass",
                TrialStatus::Fail => "fail",
                TrialStatus::Reject => "reject",
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.trial, row.n, row.identity, row.rel_residual, status
            ));
        }
        out
    }

    pub fn to_human(&self) -> String {
        let mut out = format!(
            "identity={} n={}..{} trials={} prec={} tol={:e} seed={}\n",
            self.spec.identity,
            self.spec.n_lo,
            self.spec.n_hi,
            self.spec.trials,
            self.spec.precision_bits,
            self.spec.tolerance,
            self.spec.seed,
        );
        for row in &self.results {
            if row.status != TrialStatus::Pass {
                out.push_str(&format!(
                    "  {:?} trial={} n={} rel_residual={}\n",
                    row.status, row.trial, row.n, row.rel_residual
                ));
            }
        }
        out.push_str(&format!(
            "pass={} fail={} reject={} max_rel_residual={} ({} ms)\n",
            self.summary.pass,
            self.summary.fail,
            self.summary.reject,
            self.summary.max_rel_residual,
            self.summary.wall_time_ms,
        ));
        out
    }

    pub fn render(&self) -> String {
        match self.spec.output {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Human => self.to_human(),
        }
    }
}

/// Run every (n, trial) cell of the campaign.
pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignResult> {
    spec.validate()?;
    let ctx = PrecisionContext::new(spec.precision_bits, spec.guard_bits, spec.tolerance)?;
    let start = Instant::now();

    let cells: Vec<(u32, u32)> = (spec.n_lo..=spec.n_hi)
        .flat_map(|n| (0..spec.trials).map(move |trial| (n, trial)))
        .collect();

    let outcomes: Vec<Result<TrialRecord>> = cells
        .par_iter()
        .map(|&(n, trial)| run_trial(spec, &ctx, n, trial))
        .collect();

    let mut results = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        results.push(outcome?);
    }
    results.sort_by_key(|row| (row.n, row.trial));

    let digits = ctx.decimal_digits();
    let mut pass = 0;
    let mut fail = 0;
    let mut reject = 0;
    let mut max_rel = Float::with_val(ctx.working_prec(), 0);
    for row in &results {
        match row.status {
            TrialStatus::Pass => pass += 1,
            TrialStatus::Fail => fail += 1,
            TrialStatus::Reject => reject += 1,
        }
        if row.status != TrialStatus::Reject {
            if let Ok(parsed) = Float::parse(&row.rel_residual) {
                let value = Float::with_val(ctx.working_prec(), parsed);
                if value > max_rel {
                    max_rel = value;
                }
            }
        }
    }

    Ok(CampaignResult {
        spec: spec.clone(),
        results,
        summary: Summary {
            max_rel_residual: float_to_decimal(&max_rel, digits),
            pass,
            fail,
            reject,
            wall_time_ms: start.elapsed().as_millis() as u64,
        },
    })
}

fn run_trial(spec: &CampaignSpec, ctx: &PrecisionContext, n: u32, trial: u32) -> Result<TrialRecord> {
    let cfg = SamplerConfig {
        seed: spec.seed.wrapping_add(trial as u64),
        p_modulus_max: spec.p_modulus_max,
        ..SamplerConfig::default()
    };
    let mut sampler = Sampler::new(cfg, ctx)?;
    let outcome = evaluate(spec, ctx, &mut sampler, n, trial);
    let digits = ctx.decimal_digits();
    match outcome {
        Ok(report) => Ok(TrialRecord {
            trial,
            n,
            identity: spec.identity.name().to_string(),
            lhs: report.lhs.to_decimal_string(digits),
            rhs: report.rhs.to_decimal_string(digits),
            rel_residual: float_to_decimal(&report.rel_residual, digits),
            status: if report.passed {
                TrialStatus::Pass
            } else {
                TrialStatus::Fail
            },
        }),
        Err(Error::DegenerateParameters { .. }) => Ok(TrialRecord {
            trial,
            n,
            identity: spec.identity.name().to_string(),
            lhs: "-".into(),
            rhs: "-".into(),
            rel_residual: "-".into(),
            status: TrialStatus::Reject,
        }),
        Err(other) => Err(other),
    }
}

fn evaluate(
    spec: &CampaignSpec,
    ctx: &PrecisionContext,
    sampler: &mut Sampler,
    n: u32,
    trial: u32,
) -> Result<VerificationReport> {
    match spec.identity {
        IdentityKind::Jackson => eval_jackson(&sampler.sample_jackson(n)?, ctx),
        IdentityKind::Warnaar => eval_warnaar(&sampler.sample_warnaar(n)?, ctx),
        IdentityKind::Dt => eval_dt(&sampler.sample_dt(n)?, ctx),
        IdentityKind::Ts => eval_ts(&sampler.sample_dt(n)?, ctx),
        IdentityKind::Et1 => eval_et(&sampler.sample_dt(n)?, EtBranch::First, ctx),
        IdentityKind::Et2 => eval_et(&sampler.sample_dt(n)?, EtBranch::Second, ctx),
        IdentityKind::Et3 => eval_et(&sampler.sample_dt(n)?, EtBranch::Third, ctx),
        IdentityKind::Tdt => eval_tdt(&sampler.sample_tdt(n)?, ctx),
        IdentityKind::Cnt => {
            let m = match &spec.m {
                Some(list) => list.clone(),
                // bounded random grid shape, deterministic in the trial seed
                None => (0..n).map(|_| sampler.sample_grid_bound(3)).collect(),
            };
            eval_cnt(&sampler.sample_cnt(&m)?, ctx)
        }
        IdentityKind::Xy => check_xy_factorization(&sampler.sample_dt(n)?, ctx),
        IdentityKind::CntSpecial => check_cnt_specialization(&sampler.sample_dt(n)?, ctx),
        IdentityKind::Orbit => {
            let params = sampler.sample_dt(n)?;
            let laws = check_group_laws(&params, ctx)?;
            let hexagon = hexagon_consistency(&params, ctx)?;
            let extras = [laws.rel_residual.clone(), hexagon.rel_residual.clone()];
            Ok(VerificationReport::from_sides_with_extras(
                "orbit",
                hexagon.lhs,
                hexagon.rhs,
                &extras,
                laws.params_digest,
                ctx,
            ))
        }
        IdentityKind::ThetaSelftest => selftest_trial(sampler, ctx, n, trial),
    }
}

/// One self-test bundle: theta product against the series oracle,
/// quasi-periodicity and inversion, the elementary shifted-factorial ratio
/// identity, the staircase product identities, trigonometric reduction,
/// and the determinant cross-route.
fn selftest_trial(
    sampler: &mut Sampler,
    ctx: &PrecisionContext,
    n: u32,
    trial: u32,
) -> Result<VerificationReport> {
    let p = sampler.sample_nome();
    let q = sampler.sample_scalar();
    let base = EllipticBase::new(p, q.clone())?;
    let x = sampler.sample_scalar_in(1e-2, 1e2);

    let mut extras: Vec<Float> = Vec::new();

    // product vs series oracle
    let product = base.theta_product(&x, ctx)?;
    let series = base.theta_series(&x, ctx)?;

    // theta(p x) = -theta(x)/x = theta(1/x)
    let scaled = -(&product / &x);
    if !base.p().is_zero() {
        let shifted = base.theta_product(&(base.p() * &x), ctx)?;
        extras.push(rel_residual(&shifted, &scaled));
    }
    let inverted = base.theta_product(&x.recip()?, ctx)?;
    extras.push(rel_residual(&inverted, &scaled));

    // (x)_{j-1}/(y)_{j-1} = (x/y)^{j-1} (q^{2-j}/x)_{j-1}/(q^{2-j}/y)_{j-1}
    let j = (trial % 8) + 1;
    let ex = sampler.sample_scalar();
    let ey = sampler.sample_scalar();
    let lhs = &base.pochhammer(&ex, j - 1, ctx)? / &base.pochhammer(&ey, j - 1, ctx)?;
    let shift = base.q_pow(2 - j as i64);
    let rhs = &(&ex / &ey).pow_int(j as i64 - 1)?
        * &(&base.pochhammer(&(&shift / &ex), j - 1, ctx)?
            / &base.pochhammer(&(&shift / &ey), j - 1, ctx)?);
    extras.push(rel_residual(&lhs, &rhs));

    // staircase product identities at order n
    if n >= 2 {
        let a = sampler.sample_scalar();
        let mut first = ctx.one();
        let mut second = ctx.one();
        let mut third = ctx.one();
        for j in 2..=n {
            first = &first
                * &base.pochhammer(&(&a * &base.q_pow(j as i64 - 2)), j - 1, ctx)?;
            second = &second
                * &base.pochhammer(&(&a * &base.q_pow(2 * n as i64 - 2 * j as i64)), j - 1, ctx)?;
            third = &third
                * &base.pochhammer(&(&base.q_pow(2 - 2 * n as i64 + j as i64) / &a), j - 1, ctx)?;
        }
        let scale = &(-&a).pow_int(crate::numeric::binom(n, 2))?
            * &base.q_pow(3 * crate::numeric::binom(n, 3));
        extras.push(rel_residual(&first, &second));
        extras.push(rel_residual(&first, &(&scale * &third)));
    }

    // p = 0 reduction is exact
    let trig_base = EllipticBase::new(ctx.zero(), q.clone())?;
    let arg = sampler.sample_scalar();
    let ell = trig_base.pochhammer(&arg, 4, ctx)?;
    let trig = trig_pochhammer(&arg, 4, &q, ctx);
    extras.push(rel_residual(&ell, &trig));

    // determinant via elimination vs cofactor expansion
    let order = n.clamp(1, 6) as usize;
    let matrix = ComplexMatrix::from_fn(order, |_, _| sampler.sample_scalar_in(0.2, 2.0));
    let lu = matrix.det_lu(ctx);
    if order <= 7 {
        let cofactor = matrix.det_cofactor(ctx)?;
        extras.push(rel_residual(&lu, &cofactor));
    }

    let digest = crate::identities::selftest_digest(&x, base.p(), &q);
    Ok(VerificationReport::from_sides_with_extras(
        "theta_selftest",
        product,
        series,
        &extras,
        digest,
        ctx,
    ))
}
