//! The dimensional and dimensionless Rayleigh-Plesset model.
//!
//! The canonical dimensionless equation solved throughout the crate is
//!
//! ```text
//! Rddot = p_n/R^(3k+1) - 3 Rdot^2/(2R) - Re_inv Rdot/R^2 - We/R^2 - Th p(t)/R
//! ```
//!
//! with `Re_inv = 1/Re`. The inviscid limit is encoded by `Re_inv = 0` and
//! zero surface tension by `We = 0`; sentinel infinities never appear. The
//! polytropic exponent `k` is an exact rational so that `R^(3k+1)` exponents
//! stay exact in symbolic paths.

use serde::{Deserialize, Serialize};

use crate::rational::{is_integer, parse_rat, rat_int, render_rat, to_f64, Rat};
use crate::symbolic::Expr;
use crate::{Error, Result};

/// Physical parameters of a gas bubble in a liquid, SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionalParams {
    /// liquid density (kg/m^3)
    pub rho: f64,
    /// dynamic viscosity (Pa s)
    pub mu: f64,
    /// surface tension (N/m)
    pub gamma: f64,
    /// initial gas pressure (Pa)
    pub p_g0: f64,
    /// initial radius (m)
    pub r0: f64,
    /// characteristic angular frequency (1/s)
    pub omega: f64,
    /// characteristic pressure (Pa)
    pub p0_char: f64,
    /// polytropic exponent
    #[serde(with = "rat_serde")]
    pub k: Rat,
}

impl DimensionalParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            (self.rho, "rho"),
            (self.r0, "r0"),
            (self.omega, "omega"),
            (self.p0_char, "p0_char"),
        ];
        for (v, name) in pos {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        let nonneg = [(self.mu, "mu"), (self.gamma, "gamma"), (self.p_g0, "p_g0")];
        for (v, name) in nonneg {
            if !(v >= 0.0) {
                return Err(Error::Domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Excitation pressure p(t).
///
/// A power law with `a = 0` degenerates to a constant and is canonicalized
/// on construction. The power-law branch requires `a t + b > 0` on the
/// evaluation domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PressureForcing {
    Constant {
        p0: f64,
    },
    PowerLaw {
        c: f64,
        a: f64,
        b: f64,
        #[serde(with = "rat_serde")]
        e: Rat,
    },
}

impl PressureForcing {
    pub fn power_law(c: f64, a: f64, b: f64, e: Rat) -> Result<PressureForcing> {
        if a == 0.0 {
            if b <= 0.0 {
                return Err(Error::Domain(format!(
                    "degenerate power law needs b > 0, got b = {b}"
                )));
            }
            return Ok(PressureForcing::Constant {
                p0: c * b.powf(to_f64(&e)),
            });
        }
        Ok(PressureForcing::PowerLaw { c, a, b, e })
    }

    pub fn canonicalize(self) -> Result<PressureForcing> {
        match self {
            PressureForcing::PowerLaw { c, a, b, e } => Self::power_law(c, a, b, e),
            other => Ok(other),
        }
    }

    /// `d`-th time derivative at `t`; order 0 is the value itself.
    pub fn derivative(&self, d: u32, t: f64) -> Result<f64> {
        match self {
            PressureForcing::Constant { p0 } => Ok(if d == 0 { *p0 } else { 0.0 }),
            PressureForcing::PowerLaw { c, a, b, e } => {
                let base = a * t + b;
                if base <= 0.0 {
                    return Err(Error::Domain(format!(
                        "power-law forcing undefined: a*t + b = {base} <= 0 at t = {t}"
                    )));
                }
                let ef = to_f64(e);
                let mut factor = *c;
                for i in 0..d {
                    factor *= (ef - i as f64) * a;
                }
                Ok(factor * base.powf(ef - d as f64))
            }
        }
    }
}

/// A point of the dimensionless phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub r: f64,
    pub r_dot: f64,
}

impl State {
    pub fn new(t: f64, r: f64, r_dot: f64) -> Result<State> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius must be > 0, got {r}")));
        }
        Ok(State { t, r, r_dot })
    }
}

/// The dimensionless coefficient set: the single source of truth for
/// "which equation".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpeParams {
    pub re_inv: f64,
    pub we: f64,
    pub th: f64,
    pub p_n: f64,
    #[serde(with = "rat_serde")]
    pub k: Rat,
    pub forcing: PressureForcing,
}

impl RpeParams {
    pub fn new(
        re_inv: f64,
        we: f64,
        th: f64,
        p_n: f64,
        k: Rat,
        forcing: PressureForcing,
    ) -> Result<RpeParams> {
        let p = RpeParams {
            re_inv,
            we,
            th,
            p_n,
            k,
            forcing: forcing.canonicalize()?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.re_inv >= 0.0) {
            return Err(Error::Domain(format!("re_inv must be >= 0, got {}", self.re_inv)));
        }
        if !(self.we >= 0.0) {
            return Err(Error::Domain(format!("we must be >= 0, got {}", self.we)));
        }
        if !(self.th > 0.0) {
            return Err(Error::Domain(format!("th must be > 0, got {}", self.th)));
        }
        if !(self.p_n >= 0.0) {
            return Err(Error::Domain(format!("p_n must be >= 0, got {}", self.p_n)));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<RpeParams> {
        let p: RpeParams =
            serde_json::from_str(text).map_err(|e| Error::Domain(format!("params JSON: {e}")))?;
        let p = RpeParams {
            forcing: p.forcing.canonicalize()?,
            ..p
        };
        p.validate()?;
        Ok(p)
    }

    /// Exponent 3k+1 of the gas term.
    pub fn gas_exponent(&self) -> Rat {
        rat_int(3) * self.k.clone() + rat_int(1)
    }
}

mod rat_serde {
    //! `k` and `e` accept a number or a "p/q" string and serialize as the
    //! exact form ("p/q" unless integral).
    use super::*;
    use serde::de::Error as DeError;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        if is_integer(r) {
            match crate::rational::to_i64(r) {
                Some(n) => s.serialize_i64(n),
                None => s.serialize_str(&render_rat(r)),
            }
        } else {
            s.serialize_str(&render_rat(r))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum NumOrStr {
            Num(f64),
            Str(String),
        }
        match NumOrStr::deserialize(d)? {
            NumOrStr::Str(s) => parse_rat(&s).map_err(|e| D::Error::custom(e.to_string())),
            NumOrStr::Num(x) => {
                crate::rational::rat_from_f64_decimal(x).map_err(|e| D::Error::custom(e.to_string()))
            }
        }
    }
}

/// Nondimensionalization map. With scales `(R0, omega, p0_char)`:
///
/// ```text
/// Re_inv = 4 mu / (rho R0^2 omega)      We  = 2 gamma / (rho R0^3 omega^2)
/// Th     = p0_char / (rho R0^2 omega^2) p_n = p_g0 / (rho R0^2 omega^2)
/// ```
///
/// `p_n` absorbs the `R0^(3k)` factor through the choice `R* = R/R0`, so the
/// dimensionless gas term is exactly `p_n / R^(3k+1)`. The returned forcing
/// is the constant `p* = 1` (pressure measured in units of `p0_char`).
pub fn nondimensionalize(d: &DimensionalParams) -> Result<RpeParams> {
    d.validate()?;
    let denom_visc = d.rho * d.r0 * d.r0 * d.omega;
    let denom_press = d.rho * d.r0 * d.r0 * d.omega * d.omega;
    RpeParams::new(
        4.0 * d.mu / denom_visc,
        2.0 * d.gamma / (d.rho * d.r0.powi(3) * d.omega * d.omega),
        d.p0_char / denom_press,
        d.p_g0 / denom_press,
        d.k.clone(),
        PressureForcing::Constant { p0: 1.0 },
    )
}

/// Forcing value and first derivative at `t` (the derivative feeds the
/// determining equations through `pdot(t)`).
pub fn pressure(f: &PressureForcing, t: f64) -> Result<(f64, f64)> {
    Ok((f.derivative(0, t)?, f.derivative(1, t)?))
}

/// Right-hand side of the canonical equation:
/// `f(t,R,Rdot) = p_n/R^(3k+1) - 3 Rdot^2/(2R) - Re_inv Rdot/R^2 - We/R^2 - Th p(t)/R`.
pub fn rhs(p: &RpeParams, s: &State) -> Result<f64> {
    if !(s.r > 0.0) {
        return Err(Error::Domain(format!("radius must be > 0, got {}", s.r)));
    }
    let (pt, _) = pressure(&p.forcing, s.t)?;
    let r = s.r;
    let v = s.r_dot;
    Ok(p.p_n * r.powf(-to_f64(&p.gas_exponent()))
        - 1.5 * v * v / r
        - p.re_inv * v / (r * r)
        - p.we / (r * r)
        - p.th * pt / r)
}

/// `F(t,R,Rdot,Rddot) = Rddot - f(t,R,Rdot)`; zero iff the jet point lies on
/// the equation manifold.
pub fn residual(p: &RpeParams, s: &State, r_ddot: f64) -> Result<f64> {
    Ok(r_ddot - rhs(p, s)?)
}

fn coef_expr(x: f64) -> Result<Expr> {
    Ok(Expr::Rational(crate::rational::rat_from_f64(x)?))
}

/// The right-hand side as a symbolic expression with exact-rational
/// coefficients taken from `p` and the forcing left as the opaque symbol
/// `p(t)`. Zero coefficients drop out in normalization.
pub fn rhs_expr(p: &RpeParams) -> Result<Expr> {
    let gas = coef_expr(p.p_n)? * Expr::r().pow(-p.gas_exponent());
    let inertia = Expr::rat(-3, 2) * Expr::rdot().powi(2) * Expr::r().powi(-1);
    let viscous = -(coef_expr(p.re_inv)? * Expr::rdot() * Expr::r().powi(-2));
    let tension = -(coef_expr(p.we)? * Expr::r().powi(-2));
    let forcing = -(coef_expr(p.th)? * Expr::Opaque(0) * Expr::r().powi(-1));
    Ok((gas + inertia + viscous + tension + forcing).normalize())
}

/// The right-hand side with the coefficients kept as the named symbols
/// `Re_inv`, `We`, `Th`, `p_n` (for structural work on the determining
/// equations); `k` must still be a concrete rational to keep exponents exact.
pub fn rhs_expr_symbolic(k: &Rat) -> Expr {
    let gas_exp = rat_int(3) * k.clone() + rat_int(1);
    let gas = Expr::param("p_n") * Expr::r().pow(-gas_exp);
    let inertia = Expr::rat(-3, 2) * Expr::rdot().powi(2) * Expr::r().powi(-1);
    let viscous = -(Expr::param("Re_inv") * Expr::rdot() * Expr::r().powi(-2));
    let tension = -(Expr::param("We") * Expr::r().powi(-2));
    let forcing = -(Expr::param("Th") * Expr::Opaque(0) * Expr::r().powi(-1));
    (gas + inertia + viscous + tension + forcing).normalize()
}

/// Substitutes the concrete forcing for every opaque symbol `p^(d)(t)`
/// occurring in `e`, as an exact expression in `t`.
pub fn substitute_forcing(e: &Expr, forcing: &PressureForcing) -> Result<Expr> {
    use crate::symbolic::{substitute, Atom};
    let mut out = e.clone();
    for d in 0..=4u32 {
        let repl = forcing_expr(forcing, d)?;
        out = substitute(&out, &Atom::Opaque(d), &repl);
    }
    Ok(out)
}

/// The `d`-th derivative of the forcing as an expression in `t`.
pub fn forcing_expr(forcing: &PressureForcing, d: u32) -> Result<Expr> {
    match forcing {
        PressureForcing::Constant { p0 } => {
            if d == 0 {
                coef_expr(*p0)
            } else {
                Ok(Expr::int(0))
            }
        }
        PressureForcing::PowerLaw { c, a, b, e } => {
            let mut factor = crate::rational::rat_from_f64(*c)?;
            let a_rat = crate::rational::rat_from_f64(*a)?;
            let b_rat = crate::rational::rat_from_f64(*b)?;
            let mut exp = e.clone();
            for _ in 0..d {
                factor *= &exp * &a_rat;
                exp -= rat_int(1);
            }
            let base = Expr::Rational(a_rat) * Expr::t() + Expr::Rational(b_rat);
            Ok((Expr::Rational(factor) * base.pow(exp)).normalize())
        }
    }
}

/// Evaluation adapter: closure over the forcing for [`crate::symbolic::eval`].
pub fn forcing_eval(forcing: &PressureForcing) -> impl Fn(u32, f64) -> Result<f64> + '_ {
    move |d, t| forcing.derivative(d, t)
}

impl RpeParams {
    /// Numeric evaluation context for expressions built by [`rhs_expr_symbolic`].
    pub fn symbol_bindings(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("Re_inv", self.re_inv),
            ("We", self.we),
            ("Th", self.th),
            ("p_n", self.p_n),
            ("k", to_f64(&self.k)),
        ]
    }
}
