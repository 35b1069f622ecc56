//! IEEE double evaluation of expressions under variable/parameter bindings.

use std::collections::HashMap;

use crate::rational::{to_f64, Rat};
use crate::{Error, Result};

use super::{Expr, Var};

/// Bindings for evaluation. Opaque forcing symbols `p^(d)(t)` are resolved
/// through a caller-supplied closure receiving `(d, t)`.
#[derive(Default)]
pub struct EvalContext<'a> {
    pub vars: HashMap<Var, f64>,
    pub params: HashMap<String, f64>,
    #[allow(clippy::type_complexity)]
    pub forcing: Option<&'a dyn Fn(u32, f64) -> Result<f64>>,
}

impl<'a> EvalContext<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(mut self, v: Var, x: f64) -> Self {
        self.vars.insert(v, x);
        self
    }

    pub fn param(mut self, name: &str, x: f64) -> Self {
        self.params.insert(name.to_string(), x);
        self
    }

    pub fn forcing(mut self, f: &'a dyn Fn(u32, f64) -> Result<f64>) -> Self {
        self.forcing = Some(f);
        self
    }
}

fn powf_checked(base: f64, exp: &Rat) -> Result<f64> {
    let e = to_f64(exp);
    if base < 0.0 && !crate::rational::is_integer(exp) {
        return Err(Error::Domain(format!(
            "negative base {base} with non-integer exponent {exp}"
        )));
    }
    if base == 0.0 && e < 0.0 {
        return Err(Error::Domain("zero base with negative exponent".into()));
    }
    Ok(base.powf(e))
}

/// Evaluates with rational exponents via `exp/log` on positive bases.
pub fn eval(e: &Expr, ctx: &EvalContext) -> Result<f64> {
    match e {
        Expr::Rational(r) => Ok(to_f64(r)),
        Expr::Param(p) => ctx
            .params
            .get(p)
            .copied()
            .ok_or_else(|| Error::Unbound(p.clone())),
        Expr::Var(v) => ctx
            .vars
            .get(v)
            .copied()
            .ok_or_else(|| Error::Unbound(v.name().into())),
        Expr::Opaque(d) => {
            let t = ctx
                .vars
                .get(&Var::T)
                .copied()
                .ok_or_else(|| Error::Unbound("t".into()))?;
            let f = ctx
                .forcing
                .ok_or_else(|| Error::Unbound(format!("p{}(t)", "'".repeat(*d as usize))))?;
            f(*d, t)
        }
        Expr::Sum(terms) => terms.iter().try_fold(0.0, |acc, t| Ok(acc + eval(t, ctx)?)),
        Expr::Product(factors) => factors
            .iter()
            .try_fold(1.0, |acc, f| Ok(acc * eval(f, ctx)?)),
        Expr::Power(base, exp) => powf_checked(eval(base, ctx)?, exp),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::symbolic::{diff, parse};

    #[test]
    fn eval_rational_power() {
        // R^(-5/2) at R=4 is 1/32
        let e = Expr::r().pow(rat(-5, 2));
        let ctx = EvalContext::new().var(Var::R, 4.0);
        assert!((eval(&e, &ctx).unwrap() - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn eval_reports_unbound() {
        let e = parse("We*R").unwrap();
        let ctx = EvalContext::new().var(Var::R, 1.0);
        assert!(matches!(eval(&e, &ctx), Err(Error::Unbound(_))));
    }

    #[test]
    fn eval_rejects_negative_fractional_base() {
        let e = Expr::r().pow(rat(1, 2));
        let ctx = EvalContext::new().var(Var::R, -1.0);
        assert!(matches!(eval(&e, &ctx), Err(Error::Domain(_))));
    }

    #[test]
    fn eval_diff_matches_central_differences() {
        let e = parse("3/2*Rdot^2/R + t^2*R^(-5/2)").unwrap();
        let d = diff(&e, Var::R);
        let at = |r: f64| {
            let ctx = EvalContext::new()
                .var(Var::R, r)
                .var(Var::Rdot, 0.7)
                .var(Var::T, 1.3);
            eval(&e, &ctx).unwrap()
        };
        let h = 1e-6;
        let fd = (at(2.0 + h) - at(2.0 - h)) / (2.0 * h);
        let ctx = EvalContext::new()
            .var(Var::R, 2.0)
            .var(Var::Rdot, 0.7)
            .var(Var::T, 1.3);
        let an = eval(&d, &ctx).unwrap();
        assert!((fd - an).abs() / an.abs().max(1.0) < 1e-6);
    }
}
