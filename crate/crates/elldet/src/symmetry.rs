//! The S3 action on determinant-transformation parameters.
//!
//! `sigma` realizes the passage from the left to the right side of the
//! main transformation, `tau` the column-reversal form:
//!
//! ```text
//! sigma: (a, b_j, c_j, d_j) -> (e, a/c_j d_j, a/b_j d_j, a/b_j c_j),   e' = a
//! tau:   (a, b_j, c_j, d_j) -> (q^{2(2-n)}/a, q^{2-n} b_j/a, q^{2-n} c_j/a, q^{2-n} d_j/a)
//! ```
//!
//! Both are involutions, preserve the balance (sigma maps the constant
//! b_j c_j d_j to e^2/a, tau to q^{3(2-n)}/(a e)) and satisfy
//! `sigma^2 = tau^2 = (sigma tau)^3 = id`. Each application carries the
//! prefactor of its defining identity, evaluated at the parameter point it
//! acts on, so prefactors multiply along compositions. The six reduced
//! words give the six equal expressions for the common determinant.

use crate::error::Result;
use crate::identities::{lhs_det, sigma_prefactor, tau_prefactor, DtParams, VerificationReport};
use crate::numeric::{rel_residual, CScalar, PrecisionContext};
use rug::Float;

/// One generator of the symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Sigma,
    Tau,
}

/// The six reduced words; composition is right-to-left, so `SigmaTau`
/// applies `tau` first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitWord {
    Id,
    Sigma,
    Tau,
    SigmaTau,
    TauSigma,
    SigmaTauSigma,
}

impl OrbitWord {
    pub const ALL: [OrbitWord; 6] = [
        OrbitWord::Id,
        OrbitWord::Sigma,
        OrbitWord::Tau,
        OrbitWord::SigmaTau,
        OrbitWord::TauSigma,
        OrbitWord::SigmaTauSigma,
    ];

    /// Generators in the order they are applied to the parameters.
    pub fn application_order(&self) -> &'static [Generator] {
        use Generator::{Sigma, Tau};
        match self {
            OrbitWord::Id => &[],
            OrbitWord::Sigma => &[Sigma],
            OrbitWord::Tau => &[Tau],
            OrbitWord::SigmaTau => &[Tau, Sigma],
            OrbitWord::TauSigma => &[Sigma, Tau],
            OrbitWord::SigmaTauSigma => &[Sigma, Tau, Sigma],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OrbitWord::Id => "id",
            OrbitWord::Sigma => "sigma",
            OrbitWord::Tau => "tau",
            OrbitWord::SigmaTau => "sigma tau",
            OrbitWord::TauSigma => "tau sigma",
            OrbitWord::SigmaTauSigma => "sigma tau sigma",
        }
    }
}

/// Apply `sigma`; returns the mapped parameters and the prefactor of the
/// main transformation at the input point. The derived e of the image
/// equals the input a.
pub fn apply_sigma(params: &DtParams, ctx: &PrecisionContext) -> Result<(DtParams, CScalar)> {
    let prefactor = sigma_prefactor(params, ctx)?;
    let a = params.a();
    let n = params.n();
    let mut b = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    for j in 0..n {
        b.push(a / &(&params.c()[j] * &params.d()[j]));
        c.push(a / &(&params.b()[j] * &params.d()[j]));
        d.push(a / &(&params.b()[j] * &params.c()[j]));
    }
    let mapped = DtParams::new(params.base().clone(), params.e(), b, c, d, ctx)?;
    Ok((mapped, prefactor))
}

/// Apply `tau`; returns the mapped parameters and the column-reversal
/// prefactor at the input point.
pub fn apply_tau(params: &DtParams, ctx: &PrecisionContext) -> Result<(DtParams, CScalar)> {
    let prefactor = tau_prefactor(params, ctx)?;
    let base = params.base();
    let n = params.n() as i64;
    let shift = base.q_pow(2 - n);
    let a_new = &base.q_pow(2 * (2 - n)) / params.a();
    let scale = &shift / params.a();
    let b = params.b().iter().map(|v| v * &scale).collect();
    let c = params.c().iter().map(|v| v * &scale).collect();
    let d = params.d().iter().map(|v| v * &scale).collect();
    let mapped = DtParams::new(base.clone(), a_new, b, c, d, ctx)?;
    Ok((mapped, prefactor))
}

fn apply_generator(
    generator: Generator,
    params: &DtParams,
    ctx: &PrecisionContext,
) -> Result<(DtParams, CScalar)> {
    match generator {
        Generator::Sigma => apply_sigma(params, ctx),
        Generator::Tau => apply_tau(params, ctx),
    }
}

/// Apply a word generator by generator; the composed prefactor multiplies
/// each step's factor evaluated at its own intermediate point.
pub fn apply_word(
    word: OrbitWord,
    params: &DtParams,
    ctx: &PrecisionContext,
) -> Result<(DtParams, CScalar)> {
    let mut current = params.clone();
    let mut prefactor = ctx.one();
    for &generator in word.application_order() {
        let (next, factor) = apply_generator(generator, &current, ctx)?;
        prefactor = &prefactor * &factor;
        current = next;
    }
    Ok((current, prefactor))
}

/// The full orbit: all six words with mapped parameters and composed
/// prefactors.
pub fn orbit(
    params: &DtParams,
    ctx: &PrecisionContext,
) -> Result<Vec<(OrbitWord, DtParams, CScalar)>> {
    OrbitWord::ALL
        .iter()
        .map(|&word| {
            let (mapped, prefactor) = apply_word(word, params, ctx)?;
            Ok((word, mapped, prefactor))
        })
        .collect()
}

/// Componentwise distance between two parameter tuples.
pub fn params_residual(lhs: &DtParams, rhs: &DtParams) -> Float {
    let mut max = rel_residual(lhs.a(), rhs.a());
    for (x, y) in lhs
        .b()
        .iter()
        .zip(rhs.b())
        .chain(lhs.c().iter().zip(rhs.c()))
        .chain(lhs.d().iter().zip(rhs.d()))
    {
        let res = rel_residual(x, y);
        if res > max {
            max = res;
        }
    }
    max
}

/// Round-trip one relation: apply `steps` and compare against the start,
/// requiring the composed prefactor to collapse to 1.
fn round_trip(
    steps: &[Generator],
    params: &DtParams,
    ctx: &PrecisionContext,
) -> Result<(Float, Float)> {
    let mut current = params.clone();
    let mut prefactor = ctx.one();
    for &generator in steps {
        let (next, factor) = apply_generator(generator, &current, ctx)?;
        prefactor = &prefactor * &factor;
        current = next;
    }
    let param_res = params_residual(&current, params);
    let prefactor_res = rel_residual(&prefactor, &ctx.one());
    Ok((param_res, prefactor_res))
}

/// Verify `sigma^2 = tau^2 = (sigma tau)^3 = id` as parameter round-trips
/// with unit composed prefactors. The report's sides are the six-step
/// composed prefactor of `(sigma tau)^3` against 1; the residual also
/// covers all round-trip distances.
pub fn check_group_laws(params: &DtParams, ctx: &PrecisionContext) -> Result<VerificationReport> {
    use Generator::{Sigma, Tau};
    let (sigma_params, sigma_pref) = round_trip(&[Sigma, Sigma], params, ctx)?;
    let (tau_params, tau_pref) = round_trip(&[Tau, Tau], params, ctx)?;

    let braid = [Tau, Sigma, Tau, Sigma, Tau, Sigma];
    let mut current = params.clone();
    let mut prefactor = ctx.one();
    for &generator in &braid {
        let (next, factor) = apply_generator(generator, &current, ctx)?;
        prefactor = &prefactor * &factor;
        current = next;
    }
    let braid_params = params_residual(&current, params);

    let extras = [sigma_params, sigma_pref, tau_params, tau_pref, braid_params];
    Ok(VerificationReport::from_sides_with_extras(
        "group_laws",
        prefactor,
        ctx.one(),
        &extras,
        params.digest(),
        ctx,
    ))
}

/// Verify that every orbit element gives back the same determinant:
/// det(p) = prefactor_w(p) * det(w.p) for all six words.
pub fn hexagon_consistency(
    params: &DtParams,
    ctx: &PrecisionContext,
) -> Result<VerificationReport> {
    let reference = lhs_det(params, ctx)?;
    let mut worst = Float::with_val(ctx.working_prec(), 0);
    let mut last_value = reference.clone();
    for (_, mapped, prefactor) in orbit(params, ctx)? {
        let value = &prefactor * &lhs_det(&mapped, ctx)?;
        let res = rel_residual(&reference, &value);
        if res > worst {
            worst = res;
        }
        last_value = value;
    }
    let extras = [worst];
    Ok(VerificationReport::from_sides_with_extras(
        "hexagon",
        reference,
        last_value,
        &extras,
        params.digest(),
        ctx,
    ))
}
