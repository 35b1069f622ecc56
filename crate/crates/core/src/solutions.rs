//! Closed-form invariant solutions and first integrals of the case analysis,
//! each paired with an independent verification path.
//!
//! Real-root extraction for the equilibrium cubic and the amplitude cubic of
//! the scaling-invariant case uses the bracketed numeric root-finder as the
//! ground truth and the radical (Cardano) closed forms as cross-checks: the
//! radicals are branch-ambiguous for some coefficient signs, the bracketed
//! root is not.

use num::traits::One;

use crate::integrate::{integrate_rpe, IntegratorConfig, TerminalEvent};
use crate::model::{residual, PressureForcing, RpeParams, State};
#[cfg(test)]
use crate::model::rhs;
use crate::rational::{rat, rat_int, to_f64, Rat};
use crate::{Error, Result};

/// Which closed form a [`ClosedForm`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum CaseId {
    Equilibrium,
    RdotSquaredInviscid,
    CollapseTime,
    Case12,
    Case2,
    Case3,
}

/// A power-law (or constant) trajectory `R(t) = amplitude (t+1)^exponent`
/// with its parameter set; `eval` returns `(R, Rdot, Rddot)`.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    pub case_id: CaseId,
    pub params: RpeParams,
    pub amplitude: f64,
    pub exponent: f64,
}

impl ClosedForm {
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let u = t + 1.0;
        let (a, m) = (self.amplitude, self.exponent);
        (
            a * u.powf(m),
            a * m * u.powf(m - 1.0),
            a * m * (m - 1.0) * u.powf(m - 2.0),
        )
    }

    /// Residual of the canonical equation along the evaluator at `t`.
    pub fn residual_at(&self, t: f64) -> Result<f64> {
        let (r, v, acc) = self.eval(t);
        residual(&self.params, &State::new(t, r, v)?, acc)
    }
}

/// Max |residual| of the canonical equation over the sample times.
pub fn verify_closed_form(cf: &ClosedForm, times: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &t in times {
        worst = worst.max(cf.residual_at(t)?.abs());
    }
    Ok(worst)
}

fn bisect_root<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(Error::Numerics(format!(
            "no sign change on [{lo}, {hi}]: f = ({flo}, {fhi})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Result of the equilibrium-radius computation: the bracketed numeric root
/// of the static balance, the `k = 1` radical form when applicable, and
/// their relative mismatch.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EquilibriumRadius {
    pub r_eq: f64,
    pub closed_form: Option<f64>,
    pub mismatch: Option<f64>,
    pub branch_warning: Option<String>,
}

/// Positive root of the static balance
/// `Th p0 R^(3k) + We R^(3k-1) - p_n = 0` (the stationary limit of the
/// equation), found by bracketed bisection on the monotone left side.
/// At `k = 1` the radical form of the cubic is also evaluated and
/// cross-checked to 1e-12 relative; on a branch failure the numeric root is
/// preferred and the mismatch reported.
pub fn equilibrium_radius(p: &RpeParams, p0: f64) -> Result<EquilibriumRadius> {
    let thp0 = p.th * p0;
    if !(thp0 > 0.0) {
        return Err(Error::Domain(format!("Th*p0 must be > 0, got {thp0}")));
    }
    if !(p.p_n > 0.0) {
        return Err(Error::Domain(
            "p_n must be > 0 for a positive equilibrium radius".into(),
        ));
    }
    let three_k = 3.0 * to_f64(&p.k);
    let g = |r: f64| thp0 * r.powf(three_k) + p.we * r.powf(three_k - 1.0) - p.p_n;
    // g is increasing for k >= 1/3; bracket by growth
    let mut hi = 1.0;
    let mut guard = 0;
    while g(hi) < 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Numerics("equilibrium bracket did not close".into()));
        }
    }
    let mut lo = hi;
    guard = 0;
    while g(lo) > 0.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 200 {
            return Err(Error::Numerics("equilibrium bracket did not close".into()));
        }
    }
    let r_eq = bisect_root(g, lo, hi)?;

    let mut closed_form = None;
    let mut mismatch = None;
    let mut branch_warning = None;
    if p.k == Rat::one() {
        match equilibrium_radical_k1(thp0, p.we, p.p_n) {
            Ok(r_closed) => {
                let rel = ((r_closed - r_eq) / r_eq).abs();
                closed_form = Some(r_closed);
                mismatch = Some(rel);
                if rel > 1e-12 {
                    branch_warning = Some(format!(
                        "radical form disagrees with the bracketed root by {rel:.2e}; using the numeric root"
                    ));
                }
            }
            Err(e) => branch_warning = Some(format!("radical form not real on this branch: {e}")),
        }
    }
    Ok(EquilibriumRadius {
        r_eq,
        closed_form,
        mismatch,
        branch_warning,
    })
}

/// Radical (Cardano) solution of `A R^3 + We R^2 - p_n = 0` (`A = Th p0`):
/// `R = (Y/2 + 2 We^2 / Y - We) / (3A)` with
/// `Y = (4 * 3^(3/2) A sqrt(p_n (27 A^2 p_n - 4 We^3)) - 8 We^3 + 108 A^2 p_n)^(1/3)`.
fn equilibrium_radical_k1(a: f64, we: f64, p_n: f64) -> Result<f64> {
    let disc = p_n * (27.0 * a * a * p_n - 4.0 * we.powi(3));
    if disc < 0.0 {
        return Err(Error::Numerics(format!(
            "radical discriminant negative ({disc:.3e}): trigonometric branch required"
        )));
    }
    let y3 = 4.0 * 3f64.powf(1.5) * a * disc.sqrt() - 8.0 * we.powi(3) + 108.0 * a * a * p_n;
    if y3 <= 0.0 {
        return Err(Error::Numerics(format!("Y^3 = {y3:.3e} not positive")));
    }
    let y = y3.cbrt();
    Ok((y / 2.0 + 2.0 * we * we / y - we) / (3.0 * a))
}

/// First integral of the inviscid, zero-tension case started from rest at
/// `R = 1`:
///
/// ```text
/// Rdot^2 = (2/3) p0 Th (1/R^3 - 1) + (2/3) (1/R^3 - 1/R^(3k)) p_n/(k-1)
/// ```
///
/// At `k = 1` the second factor degenerates to its analytic limit
/// `-3 ln(R)/R^3` (selected by exact rational equality on `k`). The value is
/// the formula's: negative values flag radii the motion never reaches.
pub fn rdot_squared_inviscid(p: &RpeParams, p0: f64, r: f64) -> Result<f64> {
    if p.re_inv != 0.0 || p.we != 0.0 {
        return Err(Error::Domain(
            "first integral needs the inviscid, zero-tension limit".into(),
        ));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be > 0, got {r}")));
    }
    let thp0 = p.th * p0;
    let r3 = r.powi(3);
    let lead = (2.0 / 3.0) * thp0 * (1.0 / r3 - 1.0);
    let gas = if p.k == Rat::one() {
        // analytic limit of (1/R^3 - 1/R^3k) p_n/(k-1): the factor is
        // 3 ln(R)/R^3 (negative for R < 1, matching the general-k sign)
        2.0 * p.p_n * r.ln() / r3
    } else {
        let kf = to_f64(&p.k);
        (2.0 / 3.0) * (1.0 / r3 - r.powf(-3.0 * kf)) * p.p_n / (kf - 1.0)
    };
    Ok(lead + gas)
}

/// Collapse time with quadrature diagnostics.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CollapseTime {
    pub t: f64,
    pub quad_error: f64,
    pub subdivisions: usize,
}

/// Time for the radius to fall from `R(0) = 1` (at rest) to `r_end`:
///
/// ```text
/// t = sqrt(3/2) * integral_{r_end}^{1} a^(3/2) / sqrt(g(a)) da
/// g(a) = (1 - a^3) Th p0 - p_n (a^(3-3k) - 1)/(k-1)
/// ```
///
/// The `a -> 1` endpoint carries an inverse-square-root singularity; the
/// substitution `a = 1 - u^2` removes it before the adaptive quadrature
/// (absolute tolerance 1e-10). The integrand must stay positive inside the
/// interval; a nonpositive value means the bubble never reaches `r_end`.
pub fn collapse_time(p: &RpeParams, p0: f64, r_end: f64) -> Result<CollapseTime> {
    if p.re_inv != 0.0 || p.we != 0.0 {
        return Err(Error::Domain(
            "collapse time needs the inviscid, zero-tension limit".into(),
        ));
    }
    if !(0.0 < r_end && r_end <= 1.0) {
        return Err(Error::Domain(format!("need 0 < r_end <= 1, got {r_end}")));
    }
    if r_end == 1.0 {
        return Ok(CollapseTime {
            t: 0.0,
            quad_error: 0.0,
            subdivisions: 0,
        });
    }
    let thp0 = p.th * p0;
    let kf = to_f64(&p.k);
    let k_is_one = p.k == Rat::one();
    let g = move |a: f64| -> f64 {
        let lead = thp0 * (1.0 - a.powi(3));
        if k_is_one {
            lead + 3.0 * p.p_n * a.ln()
        } else {
            lead - p.p_n * (a.powf(3.0 - 3.0 * kf) - 1.0) / (kf - 1.0)
        }
    };
    // u-substitution a = 1 - u^2: da = -2u du, and g(1-u^2) ~ u^2 near u = 0
    let u_max = (1.0 - r_end).sqrt();
    let integrand = move |u: f64| -> Result<f64> {
        let a = 1.0 - u * u;
        let ga = g(a);
        if ga <= 0.0 {
            return Err(Error::Domain(format!(
                "integrand nonpositive at R = {a:.6}: bubble never reaches r_end"
            )));
        }
        Ok(2.0 * u * a.powf(1.5) / ga.sqrt())
    };
    let q = crate::quad::integrate(integrand, 0.0, u_max, 1e-10, 4000)?;
    Ok(CollapseTime {
        t: (1.5f64).sqrt() * q.value,
        quad_error: q.error_estimate,
        subdivisions: q.subdivisions,
    })
}

fn forcing_matches(p: &RpeParams, e_want: &Rat) -> bool {
    matches!(
        &p.forcing,
        PressureForcing::PowerLaw { c, a, b, e }
            if *c == 1.0 && *a == 1.0 && *b == 1.0 && e == e_want
    )
}

/// Invariant solution of the projective case (`k = 1`, inviscid,
/// zero-tension, forcing `(t+1)^(-6/5)`):
/// `R(t) = (p_n/Th)^(1/3) (t+1)^(2/5)`.
pub fn invariant_case_1_2(p: &RpeParams) -> Result<ClosedForm> {
    if p.re_inv != 0.0 || p.we != 0.0 || p.k != Rat::one() {
        return Err(Error::Domain(
            "case 1.2 needs re_inv = 0, we = 0, k = 1".into(),
        ));
    }
    if !forcing_matches(p, &rat(-6, 5)) {
        return Err(Error::Domain(
            "case 1.2 needs forcing (t+1)^(-6/5) with c = a = b = 1".into(),
        ));
    }
    if !(p.p_n > 0.0) {
        return Err(Error::Domain("case 1.2 needs p_n > 0".into()));
    }
    Ok(ClosedForm {
        case_id: CaseId::Case12,
        params: p.clone(),
        amplitude: (p.p_n / p.th).powf(1.0 / 3.0),
        exponent: 0.4,
    })
}

/// Invariant solution of the `k = 2/3` case (zero tension, forcing
/// `1/(t+1)`): `R(t) = B (t+1)^(1/2)` with
/// `B^2 = 2 (sqrt((2Th + Re_inv)^2 + 2 p_n) - 2Th - Re_inv)`.
pub fn invariant_case_2(p: &RpeParams) -> Result<ClosedForm> {
    if p.we != 0.0 || p.k != rat(2, 3) {
        return Err(Error::Domain("case 2 needs we = 0, k = 2/3".into()));
    }
    if !forcing_matches(p, &rat_int(-1)) {
        return Err(Error::Domain(
            "case 2 needs forcing 1/(t+1) with c = a = b = 1".into(),
        ));
    }
    let s = 2.0 * p.th + p.re_inv;
    let b_sq = 2.0 * ((s * s + 2.0 * p.p_n).sqrt() - s);
    if !(b_sq > 0.0) {
        // cannot occur for p_n > 0
        return Err(Error::Domain(format!("B^2 = {b_sq} not positive")));
    }
    Ok(ClosedForm {
        case_id: CaseId::Case2,
        params: p.clone(),
        amplitude: b_sq.sqrt(),
        exponent: 0.5,
    })
}

/// Outcome of the scaling-invariant case (`k = 1/3`, inviscid): amplitude
/// from the bracketed cubic root, the radical-form cross-check, and the
/// forcing exponent for which the residual actually vanishes.
#[derive(Debug, Clone)]
pub struct Case3Solution {
    pub closed_form: ClosedForm,
    /// radical-form amplitude (None when the radical degenerates)
    pub radical_amplitude: Option<f64>,
    pub radical_mismatch: Option<f64>,
    /// the exponent that balances the scaling weights (-2/3)
    pub exponent_vanishing: Rat,
}

/// Invariant solution of the `k = 1/3` inviscid case with forcing
/// `(t+1)^e`: `R(t) = C (t+1)^(2/3)` where `C` is the positive root of
///
/// ```text
/// C^3 + (9 Th / 4) C + (9/4)(We - p_n) = 0
/// ```
///
/// (whose Cardano radical is `C = (Y - 3Th/Y)/2`). The
/// scaling weights balance only at `e = -2/3`; the evaluator is built
/// against the supplied `e` and the report states the vanishing exponent.
pub fn invariant_case_3(p: &RpeParams, e: &Rat) -> Result<Case3Solution> {
    if p.re_inv != 0.0 || p.k != rat(1, 3) {
        return Err(Error::Domain("case 3 needs re_inv = 0, k = 1/3".into()));
    }
    if !forcing_matches(p, e) {
        return Err(Error::Domain(format!(
            "case 3 needs forcing (t+1)^({}) with c = a = b = 1",
            crate::rational::render_rat(e)
        )));
    }
    if !(p.p_n > p.we) {
        return Err(Error::Domain(
            "case 3 needs p_n > We for a positive amplitude".into(),
        ));
    }
    let th = p.th;
    let q = 2.25 * (p.we - p.p_n);
    let cubic = move |c: f64| c.powi(3) + 2.25 * th * c + q;
    // cubic is increasing (th >= 0) with cubic(0) = q < 0: unique positive root
    let mut hi = 1.0;
    while cubic(hi) < 0.0 {
        hi *= 2.0;
    }
    let amplitude = bisect_root(cubic, 0.0, hi)?;

    // radical form: Y = (3 sqrt(9 (We-p_n)^2 + 3 Th^3) - 9 We + 9 p_n)^(1/3)
    let y3 = 3.0 * (9.0 * (p.we - p.p_n).powi(2) + 3.0 * th.powi(3)).sqrt() - 9.0 * p.we
        + 9.0 * p.p_n;
    let (radical_amplitude, radical_mismatch) = if y3 > 1e-300 {
        let y = y3.cbrt();
        if y.abs() < 1e-12 {
            (None, None)
        } else {
            let c = 0.5 * (y - 3.0 * th / y);
            (Some(c), Some(((c - amplitude) / amplitude).abs()))
        }
    } else {
        (None, None)
    };
    Ok(Case3Solution {
        closed_form: ClosedForm {
            case_id: CaseId::Case3,
            params: p.clone(),
            amplitude,
            exponent: 2.0 / 3.0,
        },
        radical_amplitude,
        radical_mismatch,
        exponent_vanishing: rat(-2, 3),
    })
}

/// Equilibrium as a (constant) closed form, for the uniform verification gate.
pub fn equilibrium_closed_form(p: &RpeParams, p0: f64) -> Result<ClosedForm> {
    let eq = equilibrium_radius(p, p0)?;
    let params = RpeParams::new(
        p.re_inv,
        p.we,
        p.th,
        p.p_n,
        p.k.clone(),
        PressureForcing::Constant { p0 },
    )?;
    Ok(ClosedForm {
        case_id: CaseId::Equilibrium,
        params,
        amplitude: eq.r_eq,
        exponent: 0.0,
    })
}

/// Cross-validation of [`collapse_time`] by integrating the full equation to
/// the same target radius and reading the located event time.
pub fn collapse_time_by_integration(p: &RpeParams, p0: f64, r_end: f64) -> Result<f64> {
    let params = RpeParams::new(
        p.re_inv,
        p.we,
        p.th,
        p.p_n,
        p.k.clone(),
        PressureForcing::Constant { p0 },
    )?;
    let cfg = IntegratorConfig {
        r_floor: r_end,
        ..Default::default()
    };
    let s0 = State::new(0.0, 1.0, 0.0)?;
    let tr = integrate_rpe(&params, &s0, 10.0, &cfg)?;
    match tr.terminal_event {
        TerminalEvent::Collapse { t } => Ok(t),
        other => Err(Error::Numerics(format!(
            "integration did not reach R = {r_end}: {other:?}"
        ))),
    }
}
