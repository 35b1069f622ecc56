//! Minimal expression kernel over the jet coordinates `(t, R, Rdot, Rddot)`.
//!
//! The kernel is deliberately closed-world: sums, products, rational powers,
//! named constant symbols, and one opaque unary function family `p^(d)(t)`
//! (the forcing pressure and its time derivatives). Nothing else is needed
//! for prolongation, determining-equation extraction, or residual checks,
//! and the restriction makes canonical normalization decidable: every
//! expression flattens to a sum of monomials, each a rational coefficient
//! times distinct bases raised to exact rational exponents.
//!
//! Powers of sums expand when the exponent is a small positive integer and
//! otherwise stay atomic (e.g. `(t+1)^(-6/5)`), with exponents over the same
//! atomic base combining additively. Atomic sum bases are kept monic so that
//! structurally equal bases always merge.

mod eval;
mod parse;

pub use eval::{eval, EvalContext};
pub use parse::{parse, parse_with};

use std::collections::BTreeMap;
use std::fmt;

use num::traits::{One, Signed, Zero};

use crate::rational::{exact_pow, is_integer, rat_int, render_rat, to_i64, Rat};
use crate::{Error, Result};

/// Jet coordinates treated as independent variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    T,
    R,
    Rdot,
    Rddot,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::R => "R",
            Var::Rdot => "Rdot",
            Var::Rddot => "Rddot",
        }
    }
}

/// Symbolic expression tree.
///
/// `Opaque(d)` is the d-th time derivative of the forcing `p(t)`; formal
/// differentiation by `t` maps `Opaque(d)` to `Opaque(d+1)` and collection
/// treats distinct orders as independent symbols.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Rational(Rat),
    Param(String),
    Var(Var),
    Opaque(u32),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Power(Box<Expr>, Rat),
}

/// An atomic leaf that substitution can target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    Var(Var),
    Param(String),
    Opaque(u32),
}

/// A monomial base in the canonical normal form.
///
/// `Compound` holds a normalized, monic, multi-term sum kept atomic under a
/// non-expandable power (negative or fractional exponent), or a rational
/// constant under a fractional power (a surd like `2^(1/5)`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Base {
    Var(Var),
    Param(String),
    Opaque(u32),
    Compound(Expr),
}

impl Base {
    fn to_expr(&self) -> Expr {
        match self {
            Base::Var(v) => Expr::Var(*v),
            Base::Param(p) => Expr::Param(p.clone()),
            Base::Opaque(d) => Expr::Opaque(*d),
            Base::Compound(e) => e.clone(),
        }
    }
}

/// Rational coefficient times distinct bases with rational exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coef: Rat,
    pub powers: BTreeMap<Base, Rat>,
}

impl Monomial {
    fn constant(c: Rat) -> Self {
        Monomial {
            coef: c,
            powers: BTreeMap::new(),
        }
    }

    fn base(b: Base) -> Self {
        let mut powers = BTreeMap::new();
        powers.insert(b, Rat::one());
        Monomial {
            coef: Rat::one(),
            powers,
        }
    }

    fn is_constant(&self) -> bool {
        self.powers.is_empty()
    }
}

/// Normal form: combined monomials sorted with higher-order factors first.
pub type NormalForm = Vec<Monomial>;

const EXPAND_CAP: i64 = 24;

// ---------------------------------------------------------------------------
// construction helpers
// ---------------------------------------------------------------------------

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Rational(rat_int(n))
    }

    pub fn rat(n: i64, d: i64) -> Expr {
        Expr::Rational(crate::rational::rat(n, d))
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn t() -> Expr {
        Expr::Var(Var::T)
    }

    pub fn r() -> Expr {
        Expr::Var(Var::R)
    }

    pub fn rdot() -> Expr {
        Expr::Var(Var::Rdot)
    }

    pub fn rddot() -> Expr {
        Expr::Var(Var::Rddot)
    }

    pub fn pow(self, exp: Rat) -> Expr {
        Expr::Power(Box::new(self), exp)
    }

    pub fn powi(self, exp: i64) -> Expr {
        Expr::Power(Box::new(self), rat_int(exp))
    }

    pub fn is_zero_expr(&self) -> bool {
        normalize_nf(self).is_empty()
    }

    pub fn normalize(&self) -> Expr {
        nf_to_expr(&normalize_nf(self))
    }

    /// Structural equality after normalization.
    pub fn equivalent(&self, other: &Expr) -> bool {
        normalize_nf(self) == normalize_nf(other)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, Expr::Product(vec![Expr::int(-1), rhs])])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Product(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Product(vec![self, Expr::Power(Box::new(rhs), rat_int(-1))])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Product(vec![Expr::int(-1), self])
    }
}

// ---------------------------------------------------------------------------
// normalization
// ---------------------------------------------------------------------------

/// Canonical normal form of an expression.
pub fn normalize_nf(e: &Expr) -> NormalForm {
    match e {
        Expr::Rational(c) => {
            if c.is_zero() {
                vec![]
            } else {
                vec![Monomial::constant(c.clone())]
            }
        }
        Expr::Param(p) => vec![Monomial::base(Base::Param(p.clone()))],
        Expr::Var(v) => vec![Monomial::base(Base::Var(*v))],
        Expr::Opaque(d) => vec![Monomial::base(Base::Opaque(*d))],
        Expr::Sum(terms) => {
            let mut acc: NormalForm = vec![];
            for t in terms {
                acc.extend(normalize_nf(t));
            }
            combine(acc)
        }
        Expr::Product(factors) => {
            let mut acc = vec![Monomial::constant(Rat::one())];
            for f in factors {
                acc = nf_mul(&acc, &normalize_nf(f));
                if acc.is_empty() {
                    return acc;
                }
            }
            acc
        }
        Expr::Power(base, exp) => nf_pow(&normalize_nf(base), exp),
    }
}

fn combine(mut nf: NormalForm) -> NormalForm {
    nf.sort_by(|a, b| b.powers.cmp(&a.powers));
    let mut out: NormalForm = Vec::with_capacity(nf.len());
    for m in nf {
        if let Some(last) = out.last_mut() {
            if last.powers == m.powers {
                last.coef += m.coef;
                continue;
            }
        }
        out.push(m);
    }
    out.retain(|m| !m.coef.is_zero());
    out
}

pub(crate) fn nf_mul(a: &NormalForm, b: &NormalForm) -> NormalForm {
    let mut out: NormalForm = Vec::with_capacity(a.len() * b.len());
    for ma in a {
        for mb in b {
            out.extend(mono_mul(ma, mb));
        }
    }
    combine(out)
}

fn mono_mul(a: &Monomial, b: &Monomial) -> NormalForm {
    let mut coef = &a.coef * &b.coef;
    if coef.is_zero() {
        return vec![];
    }
    let mut powers = a.powers.clone();
    for (base, exp) in &b.powers {
        let entry = powers.entry(base.clone()).or_insert_with(Rat::zero);
        *entry += exp;
    }
    powers.retain(|_, e| !e.is_zero());

    // Exponent addition may have made a kept-atomic base expandable again,
    // e.g. (t+1)^(-6/5) * (t+1)^(11/5) = (t+1)^1.
    let mut expandable: Option<(Base, i64)> = None;
    for (base, exp) in &powers {
        if let Base::Compound(inner) = base {
            if let Some(n) = to_i64(exp) {
                if let Expr::Rational(c) = inner {
                    // surd base with integer exponent folds into the coefficient
                    coef *= exact_pow(c, exp).expect("integer power of rational is exact");
                    expandable = Some((base.clone(), 0));
                    break;
                }
                if (1..=EXPAND_CAP).contains(&n) {
                    expandable = Some((base.clone(), n));
                    break;
                }
            }
        }
    }
    match expandable {
        None => vec![Monomial { coef, powers }],
        Some((base, n)) => {
            powers.remove(&base);
            let rest = vec![Monomial { coef, powers }];
            if n == 0 {
                combine(rest)
            } else {
                let inner_nf = normalize_nf(&base.to_expr());
                nf_mul(&rest, &nf_pow_int(&inner_nf, n))
            }
        }
    }
}

fn nf_pow_int(nf: &NormalForm, n: i64) -> NormalForm {
    debug_assert!(n >= 1);
    let mut result = nf.clone();
    for _ in 1..n {
        result = nf_mul(&result, nf);
    }
    result
}

fn nf_pow(nf: &NormalForm, exp: &Rat) -> NormalForm {
    if exp.is_zero() {
        return vec![Monomial::constant(Rat::one())];
    }
    if nf.is_empty() {
        if exp.is_positive() {
            return vec![];
        }
        panic!("normalization: zero base raised to a nonpositive power");
    }
    if nf.len() == 1 {
        let m = &nf[0];
        let mut powers: BTreeMap<Base, Rat> = BTreeMap::new();
        for (base, e) in &m.powers {
            powers.insert(base.clone(), e * exp);
        }
        let mut coef = Rat::one();
        if !m.coef.is_one() {
            match exact_pow(&m.coef, exp) {
                Some(c) => coef = c,
                None => {
                    // keep the inexact constant power as an atomic surd factor
                    let surd = Base::Compound(Expr::Rational(m.coef.clone()));
                    let entry = powers.entry(surd).or_insert_with(Rat::zero);
                    *entry += exp;
                }
            }
        }
        powers.retain(|_, e| !e.is_zero());
        return combine(vec![Monomial { coef, powers }]);
    }
    if let Some(n) = to_i64(exp) {
        if (1..=EXPAND_CAP).contains(&n) {
            return nf_pow_int(nf, n);
        }
    }
    // Multi-term base under a negative, fractional, or very large power:
    // keep it atomic. Make the base monic so equal bases always merge.
    let lead_coef = nf[0].coef.clone();
    let monic: NormalForm = nf
        .iter()
        .map(|m| Monomial {
            coef: &m.coef / &lead_coef,
            powers: m.powers.clone(),
        })
        .collect();
    let base = Base::Compound(nf_to_expr(&monic));
    let mut mono = Monomial::base(base);
    *mono.powers.values_mut().next().unwrap() = exp.clone();
    let coef_nf = nf_pow(&vec![Monomial::constant(lead_coef)], exp);
    nf_mul(&vec![mono], &coef_nf)
}

/// Renders a normal form back into a canonical expression.
pub fn nf_to_expr(nf: &NormalForm) -> Expr {
    match nf.len() {
        0 => Expr::int(0),
        1 => mono_to_expr(&nf[0]),
        _ => Expr::Sum(nf.iter().map(mono_to_expr).collect()),
    }
}

fn mono_to_expr(m: &Monomial) -> Expr {
    let mut factors: Vec<Expr> = vec![];
    if !m.coef.is_one() || m.powers.is_empty() {
        factors.push(Expr::Rational(m.coef.clone()));
    }
    for (base, exp) in &m.powers {
        let be = base.to_expr();
        if exp.is_one() {
            factors.push(be);
        } else {
            factors.push(Expr::Power(Box::new(be), exp.clone()));
        }
    }
    match factors.len() {
        1 => factors.pop().unwrap(),
        _ => Expr::Product(factors),
    }
}

// ---------------------------------------------------------------------------
// calculus
// ---------------------------------------------------------------------------

/// Formal partial derivative treating jet coordinates as independent.
/// `d/dt` maps `Opaque(d)` to `Opaque(d+1)`.
pub fn diff(e: &Expr, v: Var) -> Expr {
    let out = match e {
        Expr::Rational(_) | Expr::Param(_) => Expr::int(0),
        Expr::Opaque(d) => {
            if v == Var::T {
                Expr::Opaque(d + 1)
            } else {
                Expr::int(0)
            }
        }
        Expr::Var(u) => {
            if *u == v {
                Expr::int(1)
            } else {
                Expr::int(0)
            }
        }
        Expr::Sum(terms) => Expr::Sum(terms.iter().map(|t| diff(t, v)).collect()),
        Expr::Product(factors) => {
            let mut terms = vec![];
            for i in 0..factors.len() {
                let mut fs = factors.clone();
                fs[i] = diff(&factors[i], v);
                terms.push(Expr::Product(fs));
            }
            Expr::Sum(terms)
        }
        Expr::Power(base, exp) => {
            if exp.is_zero() {
                Expr::int(0)
            } else {
                Expr::Product(vec![
                    Expr::Rational(exp.clone()),
                    Expr::Power(base.clone(), exp - Rat::one()),
                    diff(base, v),
                ])
            }
        }
    };
    out.normalize()
}

pub fn contains_var(e: &Expr, v: Var) -> bool {
    match e {
        Expr::Var(u) => *u == v,
        Expr::Rational(_) | Expr::Param(_) | Expr::Opaque(_) => false,
        Expr::Sum(xs) | Expr::Product(xs) => xs.iter().any(|x| contains_var(x, v)),
        Expr::Power(b, _) => contains_var(b, v),
    }
}

pub fn contains_opaque(e: &Expr) -> bool {
    match e {
        Expr::Opaque(_) => true,
        Expr::Rational(_) | Expr::Param(_) | Expr::Var(_) => false,
        Expr::Sum(xs) | Expr::Product(xs) => xs.iter().any(contains_opaque),
        Expr::Power(b, _) => contains_opaque(b),
    }
}

/// Total time derivative on the second jet restricted to functions of
/// `(t, R, Rdot)`: `D_t = d/dt + Rdot d/dR + Rddot d/dRdot`.
pub fn total_derivative(e: &Expr) -> Result<Expr> {
    if contains_var(e, Var::Rddot) {
        return Err(Error::Domain(
            "total_derivative: expression contains Rddot".into(),
        ));
    }
    let out = diff(e, Var::T)
        + Expr::rdot() * diff(e, Var::R)
        + Expr::rddot() * diff(e, Var::Rdot);
    Ok(out.normalize())
}

/// Capture-free structural substitution of an atomic leaf, followed by
/// normalization.
pub fn substitute(e: &Expr, target: &Atom, replacement: &Expr) -> Expr {
    fn walk(e: &Expr, target: &Atom, replacement: &Expr) -> Expr {
        let hit = match (e, target) {
            (Expr::Var(u), Atom::Var(v)) => u == v,
            (Expr::Param(p), Atom::Param(q)) => p == q,
            (Expr::Opaque(d), Atom::Opaque(k)) => d == k,
            _ => false,
        };
        if hit {
            return replacement.clone();
        }
        match e {
            Expr::Sum(xs) => Expr::Sum(xs.iter().map(|x| walk(x, target, replacement)).collect()),
            Expr::Product(xs) => {
                Expr::Product(xs.iter().map(|x| walk(x, target, replacement)).collect())
            }
            Expr::Power(b, q) => Expr::Power(Box::new(walk(b, target, replacement)), q.clone()),
            other => other.clone(),
        }
    }
    walk(e, target, replacement).normalize()
}

/// Splits a normalized expression into coefficients of power products of the
/// listed bases: `e = sum over keys of coefficient * prod base^exponent`,
/// with coefficients free of every listed base.
pub fn collect(e: &Expr, bases: &[Base]) -> BTreeMap<Vec<Rat>, Expr> {
    let nf = normalize_nf(e);
    let mut groups: BTreeMap<Vec<Rat>, NormalForm> = BTreeMap::new();
    for m in nf {
        let mut key = Vec::with_capacity(bases.len());
        let mut residual = m.clone();
        for b in bases {
            let exp = residual.powers.remove(b).unwrap_or_else(Rat::zero);
            key.push(exp);
        }
        groups.entry(key).or_default().push(residual);
    }
    groups
        .into_iter()
        .map(|(k, v)| (k, nf_to_expr(&combine(v))))
        .collect()
}

/// All parameter names appearing in the expression.
pub fn params_of(e: &Expr) -> Vec<String> {
    fn walk(e: &Expr, out: &mut Vec<String>) {
        match e {
            Expr::Param(p) => {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().for_each(|x| walk(x, out)),
            Expr::Power(b, _) => walk(b, out),
            _ => {}
        }
    }
    let mut out = vec![];
    walk(e, &mut out);
    out
}

/// If the expression normalizes to a single rational constant, returns it.
pub fn as_rational(e: &Expr) -> Option<Rat> {
    let nf = normalize_nf(e);
    match nf.len() {
        0 => Some(Rat::zero()),
        1 if nf[0].is_constant() => Some(nf[0].coef.clone()),
        _ => None,
    }
}

/// Tests `a = lambda * b` for a nonzero rational `lambda`, returning it.
pub fn proportionality(a: &Expr, b: &Expr) -> Option<Rat> {
    let na = normalize_nf(a);
    let nb = normalize_nf(b);
    if na.len() != nb.len() || na.is_empty() {
        return None;
    }
    let lambda = &na[0].coef / &nb[0].coef;
    for (ma, mb) in na.iter().zip(nb.iter()) {
        if ma.powers != mb.powers || ma.coef != &lambda * &mb.coef {
            return None;
        }
    }
    Some(lambda)
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render(self))
    }
}

fn needs_parens_in_product(e: &Expr) -> bool {
    matches!(e, Expr::Sum(_)) || matches!(e, Expr::Rational(r) if !is_integer(r) || r.is_negative())
}

fn render(e: &Expr) -> String {
    match e {
        Expr::Rational(r) => render_rat(r),
        Expr::Param(p) => p.clone(),
        Expr::Var(v) => v.name().to_string(),
        Expr::Opaque(d) => format!("p{}(t)", "'".repeat(*d as usize)),
        Expr::Sum(terms) => {
            let mut out = String::new();
            for (i, t) in terms.iter().enumerate() {
                let s = render(t);
                if i == 0 {
                    out.push_str(&s);
                } else if let Some(stripped) = s.strip_prefix('-') {
                    out.push_str(" - ");
                    out.push_str(stripped);
                } else {
                    out.push_str(" + ");
                    out.push_str(&s);
                }
            }
            if terms.is_empty() {
                out.push('0');
            }
            out
        }
        Expr::Product(factors) => {
            let mut parts: Vec<String> = vec![];
            let mut negate = false;
            for fct in factors {
                if let Expr::Rational(r) = fct {
                    if r == &rat_int(-1) {
                        negate = !negate;
                        continue;
                    }
                }
                let s = render(fct);
                parts.push(if needs_parens_in_product(fct) {
                    format!("({s})")
                } else {
                    s
                });
            }
            let body = if parts.is_empty() {
                "1".to_string()
            } else {
                parts.join("*")
            };
            if negate {
                format!("-{body}")
            } else {
                body
            }
        }
        Expr::Power(base, exp) => {
            let b = render(base);
            let b = match **base {
                Expr::Sum(_) | Expr::Product(_) | Expr::Power(..) => format!("({b})"),
                Expr::Rational(ref r) if !is_integer(r) || r.is_negative() => format!("({b})"),
                _ => b,
            };
            if is_integer(exp) && !exp.is_negative() {
                format!("{b}^{}", render_rat(exp))
            } else {
                format!("{b}^({})", render_rat(exp))
            }
        }
    }
}
