//! Dominant-balance (leading-order) singularity test for ODEs given as sums
//! of power monomials in `(t, R, Rdot, Rddot)`.
//!
//! Substituting `R = a0 tau^(-alpha)` near a movable point `t0` (with the
//! explicit t-dependence of coefficients frozen at `t0`), each term scales as
//! `tau` to the power
//!
//! ```text
//! L(alpha) = -alpha e_R - (alpha+1) e_Rdot - (alpha+2) e_Rddot
//! ```
//!
//! A balance is a subset of terms, containing the highest derivative, whose
//! exponents coincide and stay minimal among all terms at that `alpha`
//! (ties with excluded terms allowed); its leading-coefficient equation in
//! `a0` must then admit a nonzero root. The equation demands `R > 0`, so
//! admissible roots are positive reals. The test passes iff some balance has
//! a positive-integer `alpha` (toggleable to any integer) and an admissible
//! `a0`.

use num::traits::{One, Signed, Zero};

use crate::model::{PressureForcing, RpeParams};
use crate::rational::{is_integer, rat_from_f64, rat_int, render_rat, to_f64, to_i64, Rat};
use crate::symbolic::{self, eval, EvalContext, Expr, Var};
use crate::{Error, Result};

/// One power-monomial term `coef * t^e_t * R^e_r * Rdot^e_rdot * Rddot^e_rddot`.
///
/// `coef` may carry residual t-dependence that is not a pure power (a
/// power-law forcing factor); it is frozen at a generic movable point for
/// the numeric parts of the analysis.
#[derive(Debug, Clone)]
pub struct PowerTerm {
    pub coef: Expr,
    pub e_t: Rat,
    pub e_r: Rat,
    pub e_rdot: Rat,
    pub e_rddot: Rat,
}

impl PowerTerm {
    pub fn new(coef: Expr, e_t: Rat, e_r: Rat, e_rdot: Rat, e_rddot: Rat) -> PowerTerm {
        PowerTerm {
            coef,
            e_t,
            e_r,
            e_rdot,
            e_rddot,
        }
    }

    /// As an expression (the term list sums to the residual form of the ODE).
    pub fn to_expr(&self) -> Expr {
        (self.coef.clone()
            * Expr::t().pow(self.e_t.clone())
            * Expr::r().pow(self.e_r.clone())
            * Expr::rdot().pow(self.e_rdot.clone())
            * Expr::rddot().pow(self.e_rddot.clone()))
        .normalize()
    }

    /// Derivative order carried by the term (2 for Rddot, 1 for Rdot, 0 else).
    fn derivative_order(&self) -> u32 {
        if !self.e_rddot.is_zero() {
            2
        } else if !self.e_rdot.is_zero() {
            1
        } else {
            0
        }
    }

    /// Coefficient value with the movable-point position frozen at t = 1.
    fn coef_value(&self) -> Result<f64> {
        let ctx = EvalContext::new().var(Var::T, 1.0);
        eval(&self.coef, &ctx)
    }

    /// Total power of `a0` the term contributes.
    fn a0_power(&self) -> Rat {
        &self.e_r + &self.e_rdot + &self.e_rddot
    }

    /// tau-exponent as a linear function `p*alpha + q`.
    fn exponent_line(&self) -> (Rat, Rat) {
        let p = -(&self.e_r + &self.e_rdot + &self.e_rddot);
        let q = -(&self.e_rdot + &(rat_int(2) * &self.e_rddot));
        (p, q)
    }
}

/// Builds a power term from an expression that normalizes to a single
/// monomial over `(t, R, Rdot, Rddot)`.
pub fn power_term_from_expr(e: &Expr) -> Result<PowerTerm> {
    let nf = symbolic::normalize_nf(e);
    if nf.len() != 1 {
        return Err(Error::Unsupported(format!(
            "`{e}` is not a single power monomial"
        )));
    }
    let m = &nf[0];
    let mut term = PowerTerm::new(
        Expr::Rational(m.coef.clone()),
        Rat::zero(),
        Rat::zero(),
        Rat::zero(),
        Rat::zero(),
    );
    let mut coef_factors = vec![Expr::Rational(m.coef.clone())];
    for (base, exp) in &m.powers {
        match base {
            symbolic::Base::Var(Var::T) => term.e_t = exp.clone(),
            symbolic::Base::Var(Var::R) => term.e_r = exp.clone(),
            symbolic::Base::Var(Var::Rdot) => term.e_rdot = exp.clone(),
            symbolic::Base::Var(Var::Rddot) => term.e_rddot = exp.clone(),
            symbolic::Base::Param(p) => {
                coef_factors.push(Expr::param(p).pow(exp.clone()));
            }
            symbolic::Base::Opaque(d) => {
                coef_factors.push(Expr::Opaque(*d).pow(exp.clone()));
            }
            symbolic::Base::Compound(inner) => {
                coef_factors.push(inner.clone().pow(exp.clone()));
            }
        }
    }
    term.coef = Expr::Product(coef_factors).normalize();
    Ok(term)
}

/// Term list of the canonical equation in residual form
/// `Rddot + 3 Rdot^2/(2R) + Re_inv Rdot/R^2 + We/R^2 - p_n/R^(3k+1) + Th p(t)/R`.
/// Zero-coefficient terms drop out; the order of the survivors is fixed
/// (acceleration first, inertia second).
pub fn to_power_terms(p: &RpeParams) -> Result<Vec<PowerTerm>> {
    let z = Rat::zero;
    let mut terms = vec![
        PowerTerm::new(Expr::int(1), z(), z(), z(), Rat::one()),
        PowerTerm::new(Expr::rat(3, 2), z(), rat_int(-1), rat_int(2), z()),
    ];
    if p.re_inv != 0.0 {
        terms.push(PowerTerm::new(
            Expr::Rational(rat_from_f64(p.re_inv)?),
            z(),
            rat_int(-2),
            Rat::one(),
            z(),
        ));
    }
    if p.we != 0.0 {
        terms.push(PowerTerm::new(
            Expr::Rational(rat_from_f64(p.we)?),
            z(),
            rat_int(-2),
            z(),
            z(),
        ));
    }
    if p.p_n != 0.0 {
        terms.push(PowerTerm::new(
            Expr::Rational(-rat_from_f64(p.p_n)?),
            z(),
            -p.gas_exponent(),
            z(),
            z(),
        ));
    }
    let th = rat_from_f64(p.th)?;
    match &p.forcing {
        PressureForcing::Constant { p0 } => {
            let c = th * rat_from_f64(*p0)?;
            if !c.is_zero() {
                terms.push(PowerTerm::new(
                    Expr::Rational(c),
                    z(),
                    rat_int(-1),
                    z(),
                    z(),
                ));
            }
        }
        PressureForcing::PowerLaw { c, a, b, e } => {
            let cc = th * rat_from_f64(*c)?;
            if !cc.is_zero() {
                if *b == 0.0 {
                    // pure power of t
                    let coef =
                        Expr::Rational(cc) * Expr::Rational(rat_from_f64(*a)?).pow(e.clone());
                    terms.push(PowerTerm::new(
                        coef.normalize(),
                        e.clone(),
                        rat_int(-1),
                        z(),
                        z(),
                    ));
                } else {
                    // (a t + b)^e rides along in the coefficient, frozen at t0
                    let base = Expr::Rational(rat_from_f64(*a)?) * Expr::t()
                        + Expr::Rational(rat_from_f64(*b)?);
                    let coef = Expr::Rational(cc) * base.pow(e.clone());
                    terms.push(PowerTerm::new(
                        coef.normalize(),
                        z(),
                        rat_int(-1),
                        z(),
                        z(),
                    ));
                }
            }
        }
    }
    Ok(terms)
}

/// The first Painlevé transcendent in residual form `Rddot - 6 R^2 - t`
/// (positive sanity case for the leading-order test).
pub fn p1_terms() -> Vec<PowerTerm> {
    let z = Rat::zero;
    vec![
        PowerTerm::new(Expr::int(1), z(), z(), z(), Rat::one()),
        PowerTerm::new(Expr::int(-6), z(), rat_int(2), z(), z()),
        PowerTerm::new(Expr::int(-1), Rat::one(), z(), z(), z()),
    ]
}

/// tau-exponent of a term under `R = a0 tau^(-alpha)`; the `t^e_t` factor is
/// frozen near a movable `t0 != 0`.
pub fn tau_exponent(term: &PowerTerm, alpha: &Rat) -> Rat {
    let (p, q) = term.exponent_line();
    p * alpha + q
}

/// Which integers count as a pass for the leading exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegerPolicy {
    /// `alpha` must be a positive integer (the default).
    #[default]
    PositiveOnly,
    /// any nonzero integer (exploration toggle)
    AnyInteger,
}

#[derive(Debug, Clone, Default)]
pub struct BalanceOptions {
    pub integer_policy: IntegerPolicy,
}

/// Admissible leading-coefficient roots of a candidate balance.
#[derive(Debug, Clone, PartialEq)]
pub enum A0Roots {
    /// the coefficient equation vanishes identically at this alpha: a0 free
    Free,
    /// positive real roots found
    Roots(Vec<f64>),
    /// no positive real root: not a consistent balance
    None,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub alpha: Rat,
    pub dominant_set: Vec<usize>,
    /// leading-coefficient equation, symbolic in `a` (= alpha) and `a0`
    pub a0_equation: Expr,
    pub a0_roots: A0Roots,
}

impl Candidate {
    pub fn admissible(&self) -> bool {
        match &self.a0_roots {
            A0Roots::Free => true,
            A0Roots::Roots(r) => !r.is_empty(),
            A0Roots::None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail { reason: String },
}

#[derive(Debug, Clone)]
pub struct BalanceReport {
    pub candidates: Vec<Candidate>,
    pub verdict: Verdict,
}

impl BalanceReport {
    pub fn admissible_candidates(&self) -> Vec<&Candidate> {
        self.candidates.iter().filter(|c| c.admissible()).collect()
    }
}

const MAX_TERMS: usize = 16;

/// Enumerates subsets of terms (each containing the highest-derivative
/// term), solves the exponent-equality system for `alpha`, filters by
/// dominance, and analyzes the leading-coefficient equation. Candidates are
/// ordered by `(alpha, subset)`.
pub fn dominant_balance(terms: &[PowerTerm], opts: &BalanceOptions) -> Result<BalanceReport> {
    if terms.len() < 2 {
        return Err(Error::Domain("need at least 2 terms".into()));
    }
    if terms.len() > MAX_TERMS {
        return Err(Error::Unsupported(format!(
            "subset enumeration capped at {MAX_TERMS} terms, got {}",
            terms.len()
        )));
    }
    let max_order = terms.iter().map(|t| t.derivative_order()).max().unwrap();
    let lines: Vec<(Rat, Rat)> = terms.iter().map(|t| t.exponent_line()).collect();

    let mut candidates: Vec<Candidate> = vec![];
    let n = terms.len();
    for mask in 1u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if set.len() < 2 {
            continue;
        }
        if !set.iter().any(|&i| terms[i].derivative_order() == max_order) {
            continue;
        }
        let alphas = solve_subset_alphas(terms, &lines, &set)?;
        for alpha in alphas {
            if alpha.is_zero() {
                continue; // no leading singularity
            }
            // dominance: the subset exponent must be <= every term's
            // exponent at this alpha (ties with excluded terms allowed)
            let level = {
                let (p, q) = &lines[set[0]];
                p * &alpha + q
            };
            let dominated = (0..n).all(|j| {
                let (p, q) = &lines[j];
                p * &alpha + q >= level
            });
            if !dominated {
                continue;
            }
            let a0_equation = a0_equation_expr(terms, &set);
            let a0_roots = analyze_a0_roots(terms, &set, &alpha)?;
            candidates.push(Candidate {
                alpha,
                dominant_set: set.clone(),
                a0_equation,
                a0_roots,
            });
        }
    }
    candidates.sort_by(|a, b| {
        a.alpha
            .cmp(&b.alpha)
            .then_with(|| a.dominant_set.cmp(&b.dominant_set))
    });

    let alpha_ok = |alpha: &Rat| -> bool {
        if !is_integer(alpha) {
            return false;
        }
        match opts.integer_policy {
            IntegerPolicy::PositiveOnly => alpha.is_positive(),
            IntegerPolicy::AnyInteger => !alpha.is_zero(),
        }
    };
    let pass = candidates
        .iter()
        .any(|c| c.admissible() && alpha_ok(&c.alpha));
    let verdict = if pass {
        Verdict::Pass
    } else {
        let seen: Vec<String> = candidates
            .iter()
            .filter(|c| c.admissible())
            .map(|c| render_rat(&c.alpha))
            .collect();
        let reason = if seen.is_empty() {
            "no admissible dominant balance".to_string()
        } else {
            format!(
                "no admissible balance with a positive-integer exponent; exponents found: {}",
                seen.join(", ")
            )
        };
        Verdict::Fail { reason }
    };
    Ok(BalanceReport {
        candidates,
        verdict,
    })
}

/// Candidate alphas for one subset: the unique solution of the pairwise
/// exponent equalities, or — when the equalities hold identically — the
/// nonzero rational roots of the leading-coefficient polynomial in alpha
/// (possible only when the subset is a0-homogeneous).
fn solve_subset_alphas(
    terms: &[PowerTerm],
    lines: &[(Rat, Rat)],
    set: &[usize],
) -> Result<Vec<Rat>> {
    let (p0, q0) = &lines[set[0]];
    let mut alpha: Option<Rat> = None;
    for &i in &set[1..] {
        let (p, q) = &lines[i];
        if p == p0 && q == q0 {
            continue;
        }
        if p == p0 {
            return Ok(vec![]); // parallel distinct lines never balance
        }
        let a = (q - q0) / (p0 - p);
        match &alpha {
            None => alpha = Some(a),
            Some(prev) if *prev == a => {}
            Some(_) => return Ok(vec![]), // inconsistent system
        }
    }
    if let Some(a) = alpha {
        // all members must sit on the common level at a
        let level = p0 * &a + q0;
        for &i in set {
            let (p, q) = &lines[i];
            if p * &a + q != level {
                return Ok(vec![]);
            }
        }
        return Ok(vec![a]);
    }
    // identity: every alpha balances the exponents; alpha must come from the
    // coefficient equation, which requires a common a0 power to factor out
    let m0 = terms[set[0]].a0_power();
    if set[1..].iter().any(|&i| terms[i].a0_power() != m0) {
        return Ok(vec![]);
    }
    let poly = alpha_polynomial(terms, set)?;
    Ok(rational_roots(&poly)
        .into_iter()
        .filter(|r| !r.is_zero())
        .collect())
}

/// Substitution factor pattern of one term: `Rddot -> a0 alpha(alpha+1)`,
/// `Rdot -> -a0 alpha`, `R^m -> a0^m`, as a polynomial in alpha (requires
/// nonnegative integer jet-derivative exponents).
fn alpha_factor_poly(term: &PowerTerm) -> Result<Vec<Rat>> {
    let e1 = to_i64(&term.e_rdot)
        .filter(|&n| n >= 0)
        .ok_or_else(|| Error::Unsupported("fractional Rdot exponent in balance".into()))?;
    let e2 = to_i64(&term.e_rddot)
        .filter(|&n| n >= 0)
        .ok_or_else(|| Error::Unsupported("fractional Rddot exponent in balance".into()))?;
    // (-alpha)^e1 * (alpha(alpha+1))^e2
    let mut poly = vec![Rat::one()];
    for _ in 0..e1 {
        poly = poly_mul(&poly, &[Rat::zero(), -Rat::one()]);
    }
    for _ in 0..e2 {
        poly = poly_mul(&poly, &[Rat::zero(), Rat::one(), Rat::one()]);
    }
    Ok(poly)
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficient polynomial in alpha for an a0-homogeneous subset.
fn alpha_polynomial(terms: &[PowerTerm], set: &[usize]) -> Result<Vec<Rat>> {
    let mut acc: Vec<Rat> = vec![];
    for &i in set {
        let c = symbolic::as_rational(&terms[i].coef).ok_or_else(|| {
            Error::Unsupported("non-rational coefficient in an exponent-degenerate balance".into())
        })?;
        let p = alpha_factor_poly(&terms[i])?;
        if acc.len() < p.len() {
            acc.resize(p.len(), Rat::zero());
        }
        for (j, v) in p.iter().enumerate() {
            acc[j] += &c * v;
        }
    }
    while acc.last().is_some_and(|c| c.is_zero()) {
        acc.pop();
    }
    Ok(acc)
}

/// All rational roots of a rational-coefficient polynomial (low degree).
fn rational_roots(poly: &[Rat]) -> Vec<Rat> {
    if poly.len() <= 1 {
        return vec![];
    }
    if poly.len() == 2 {
        return vec![-&poly[0] / &poly[1]];
    }
    if poly.len() == 3 {
        // quadratic: rational roots iff the discriminant is a rational square
        let (c, b, a) = (&poly[0], &poly[1], &poly[2]);
        let disc = b * b - rat_int(4) * a * c;
        if disc.is_negative() {
            return vec![];
        }
        if let Some(s) = crate::rational::exact_pow(&disc, &crate::rational::rat(1, 2)) {
            let two_a = rat_int(2) * a;
            return vec![(-b + &s) / &two_a, (-b - &s) / &two_a];
        }
        return vec![];
    }
    // rational root theorem on the integer-cleared polynomial
    let lcm = poly.iter().fold(num::BigInt::one(), |acc, c| {
        num::integer::lcm(acc, c.denom().clone())
    });
    let ints: Vec<num::BigInt> = poly
        .iter()
        .map(|c| (c * Rat::from_integer(lcm.clone())).numer().clone())
        .collect();
    let lead = ints.last().unwrap().clone();
    let constant = ints
        .iter()
        .find(|c| !c.is_zero())
        .cloned()
        .unwrap_or_else(num::BigInt::one);
    let mut roots = vec![];
    if ints[0].is_zero() {
        roots.push(Rat::zero());
    }
    for p in divisors(&constant.abs()) {
        for q in divisors(&lead.abs()) {
            for sign in [1i64, -1] {
                let cand = Rat::new(p.clone() * num::BigInt::from(sign), q.clone());
                let val = poly.iter().rev().fold(Rat::zero(), |acc, c| acc * &cand + c);
                if val.is_zero() && !roots.contains(&cand) {
                    roots.push(cand);
                }
            }
        }
    }
    roots
}

fn divisors(n: &num::BigInt) -> Vec<num::BigInt> {
    use num::traits::ToPrimitive;
    let Some(n) = n.to_u64() else {
        return vec![num::BigInt::one()];
    };
    if n == 0 {
        return vec![num::BigInt::one()];
    }
    let mut out = vec![];
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(num::BigInt::from(d));
            if d != n / d {
                out.push(num::BigInt::from(n / d));
            }
        }
        d += 1;
    }
    out
}

/// Leading-coefficient equation as an expression in `a` (alpha) and `a0`.
fn a0_equation_expr(terms: &[PowerTerm], set: &[usize]) -> Expr {
    let alpha = Expr::param("a");
    let mut sum = vec![];
    for &i in set {
        let t = &terms[i];
        let mut factors = vec![t.coef.clone()];
        if !t.e_rdot.is_zero() {
            factors.push(Expr::Power(Box::new(-alpha.clone()), t.e_rdot.clone()));
        }
        if !t.e_rddot.is_zero() {
            factors.push(Expr::Power(
                Box::new(alpha.clone() * (alpha.clone() + Expr::int(1))),
                t.e_rddot.clone(),
            ));
        }
        factors.push(Expr::param("a0").pow(t.a0_power()));
        sum.push(Expr::Product(factors));
    }
    Expr::Sum(sum).normalize()
}

/// Classifies the a0 equation at a concrete alpha: identically zero (free),
/// solvable over positive reals, or root-free.
fn analyze_a0_roots(terms: &[PowerTerm], set: &[usize], alpha: &Rat) -> Result<A0Roots> {
    // gather (a0 power, numeric coefficient) pairs at this alpha
    let mut pairs: Vec<(Rat, f64)> = vec![];
    for &i in set {
        let t = &terms[i];
        let c = t.coef_value()?;
        let factor_poly = alpha_factor_poly(t)?;
        let af = to_f64(alpha);
        let factor = factor_poly
            .iter()
            .rev()
            .fold(0.0, |acc, coef| acc * af + to_f64(coef));
        let val = c * factor;
        let m = t.a0_power();
        match pairs.iter_mut().find(|(mm, _)| *mm == m) {
            Some((_, v)) => *v += val,
            None => pairs.push((m, val)),
        }
    }
    pairs.retain(|(_, v)| v.abs() > 1e-14);
    match pairs.len() {
        0 => Ok(A0Roots::Free),
        1 => Ok(A0Roots::None),
        2 => {
            // c1 a0^m1 + c2 a0^m2 = 0  =>  a0^(m1-m2) = -c2/c1
            let (m1, c1) = &pairs[0];
            let (m2, c2) = &pairs[1];
            let rhs = -c2 / c1;
            if rhs <= 0.0 {
                return Ok(A0Roots::None);
            }
            let root = rhs.powf(1.0 / to_f64(&(m1 - m2)));
            Ok(A0Roots::Roots(vec![root]))
        }
        _ => {
            // scan for sign changes of sum c_i a0^(m_i - m_min) over a log grid
            let m_min = pairs.iter().map(|(m, _)| m.clone()).min().unwrap();
            let f = |x: f64| -> f64 {
                pairs
                    .iter()
                    .map(|(m, c)| c * x.powf(to_f64(&(m - &m_min))))
                    .sum()
            };
            let mut roots = vec![];
            let grid: Vec<f64> = (-60..=60).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
            for w in grid.windows(2) {
                let (a, b) = (w[0], w[1]);
                if f(a) == 0.0 {
                    roots.push(a);
                } else if f(a) * f(b) < 0.0 {
                    let (mut lo, mut hi) = (a, b);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if f(lo) * f(mid) <= 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    roots.push(0.5 * (lo + hi));
                }
            }
            Ok(if roots.is_empty() {
                A0Roots::None
            } else {
                A0Roots::Roots(roots)
            })
        }
    }
}

/// Report for the canonical equation built from `p` under default options.
pub fn analyze_rpe(p: &RpeParams) -> Result<BalanceReport> {
    dominant_balance(&to_power_terms(p)?, &BalanceOptions::default())
}
