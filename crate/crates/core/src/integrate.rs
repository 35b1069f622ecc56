//! Adaptive integration of the full equation, the reduced first-order ODE,
//! and symmetry flows; five-channel energy auditing.
//!
//! The one-step method is the Dormand-Prince embedded 5(4) pair with the
//! classical fourth-order continuous extension. Step errors are controlled
//! componentwise against `abs_tol + rel_tol * |y|` with PI step-size
//! control; a bubble-collapse event (`R` crossing the configured floor) is
//! located on the dense output.

use serde::Serialize;

use crate::model::{rhs, RpeParams, State};
use crate::rational::{rat_int, to_f64};
use crate::{Error, Result};

/// Tolerances and guards. `r_floor` is the collapse threshold: the equation
/// is singular at `R = 0`, so integration stops there with a located event.
#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: Option<f64>,
    pub h_max: Option<f64>,
    pub r_floor: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            h_init: None,
            h_max: None,
            r_floor: 1e-6,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        if !(self.r_floor < 1.0) {
            return Err(Error::Domain("r_floor must be < 1".into()));
        }
        Ok(())
    }
}

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TerminalEvent {
    ReachedTEnd,
    Collapse { t: f64 },
    Blowup { t: f64 },
}

/// Dense-output data for one accepted step of an N-dimensional system.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    /// continuous-extension coefficients per component
    pub rcont: [[f64; 5]; N],
}

impl<const N: usize> DenseStep<N> {
    /// Evaluates the interpolant at `t` inside `[t0, t0+h]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let th1 = 1.0 - theta;
        let mut out = [0.0; N];
        for (i, rc) in self.rcont.iter().enumerate() {
            out[i] = rc[0] + theta * (rc[1] + th1 * (rc[2] + theta * (rc[3] + th1 * rc[4])));
        }
        out
    }
}

/// Raw integration output of the generic core.
#[derive(Debug, Clone)]
pub struct RawTrajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub dense: Vec<DenseStep<N>>,
    pub accepted: usize,
    pub rejected: usize,
    pub terminal: TerminalEvent,
}

impl<const N: usize> RawTrajectory<N> {
    pub fn t_start(&self) -> f64 {
        *self.times.first().unwrap()
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Dense-output interpolation; `None` outside the covered span.
    pub fn interpolate(&self, t: f64) -> Option<[f64; N]> {
        if self.dense.is_empty() {
            return None;
        }
        let forward = self.dense[0].h > 0.0;
        let inside = if forward {
            t >= self.t_start() - 1e-12 && t <= self.t_end() + 1e-12
        } else {
            t <= self.t_start() + 1e-12 && t >= self.t_end() - 1e-12
        };
        if !inside {
            return None;
        }
        if t == self.t_start() {
            return Some(self.states[0]);
        }
        let idx = self
            .dense
            .partition_point(|d| {
                if forward {
                    d.t0 + d.h < t
                } else {
                    d.t0 + d.h > t
                }
            })
            .min(self.dense.len() - 1);
        Some(self.dense[idx].eval(t))
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
// continuous-extension weights
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Scalar event function; integration stops where it crosses zero from
/// positive to nonpositive, with the crossing located on the dense output.
pub type EventFn<'a, const N: usize> = &'a dyn Fn(&[f64; N]) -> f64;

/// Generic adaptive core. The right-hand side may reject a state (domain
/// departure); the step is then retried with a smaller h.
pub fn dopri5<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    cfg: &IntegratorConfig,
    event: Option<EventFn<N>>,
) -> Result<RawTrajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    cfg.validate()?;
    let span = t_end - t0;
    if span == 0.0 {
        return Ok(RawTrajectory {
            times: vec![t0],
            states: vec![y0],
            dense: vec![],
            accepted: 0,
            rejected: 0,
            terminal: TerminalEvent::ReachedTEnd,
        });
    }
    let dir = span.signum();
    let h_max = cfg.h_max.unwrap_or(span.abs());
    let h_min = 1e-14 * span.abs().max(1.0);

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    let mut h = cfg.h_init.unwrap_or_else(|| {
        // small trial step scaled to the initial derivative
        let sc: f64 = (0..N)
            .map(|i| (k1[i] / (cfg.abs_tol + cfg.rel_tol * y[i].abs())).powi(2))
            .sum::<f64>()
            .sqrt();
        (1e-2 / sc.max(1e-10)).min(h_max).max(h_min * 10.0)
    }) * dir;

    let mut times = vec![t];
    let mut states = vec![y];
    let mut dense: Vec<DenseStep<N>> = vec![];
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut err_prev: f64 = 1.0;
    let max_steps = 50_000_000usize;

    let mut terminal = TerminalEvent::ReachedTEnd;
    'outer: for _ in 0..max_steps {
        if (t - t_end) * dir >= 0.0 {
            break;
        }
        if h.abs() > h_max {
            h = h_max * dir;
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < h_min {
            // The collapse surface attracts in finite time with unbounded
            // speed, so the window where a step can land between the floor
            // and the singularity is below f64 resolution. If an armed event
            // is imminent (linear projection of its crossing lies within a
            // resolvable margin), report the located collapse instead of a
            // spurious blowup.
            if let Some(g) = event {
                let g_now = g(&y);
                if g_now > 0.0 {
                    let delta = 1e-9;
                    let y_pert: [f64; N] = std::array::from_fn(|i| y[i] + delta * dir * k1[i]);
                    let g_dot = (g(&y_pert) - g_now) / (delta * dir);
                    if g_dot < 0.0 {
                        let dt = -g_now / g_dot;
                        if dt.abs() <= 1e7 * h_min {
                            let te = t + dt * dir;
                            terminal = TerminalEvent::Collapse { t: te };
                            times.push(te);
                            states.push(y);
                            break;
                        }
                    }
                }
            }
            terminal = TerminalEvent::Blowup { t };
            break;
        }

        // stages; a domain rejection by the rhs shrinks the step
        let mut ks = [[0.0; N]; 7];
        ks[0] = k1;
        let mut stage_fail = false;
        for s in 0..6 {
            let mut ys = y;
            for (j, kj) in ks.iter().enumerate().take(s + 1) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            match f(t + C[s] * h, &ys) {
                Ok(k) => ks[s + 1] = k,
                Err(_) => {
                    stage_fail = true;
                    break;
                }
            }
        }
        if stage_fail {
            rejected += 1;
            h *= 0.3;
            continue;
        }

        // 5th-order solution is stage 7's argument (FSAL pair)
        let mut y5 = y;
        for i in 0..N {
            y5[i] += h
                * (A[5][0] * ks[0][i]
                    + A[5][2] * ks[2][i]
                    + A[5][3] * ks[3][i]
                    + A[5][4] * ks[4][i]
                    + A[5][5] * ks[5][i]);
        }
        let mut y4 = y;
        for i in 0..N {
            let mut acc = 0.0;
            for (j, kj) in ks.iter().enumerate() {
                acc += B4[j] * kj[i];
            }
            y4[i] += h * acc;
        }

        let mut err_sq = 0.0;
        for i in 0..N {
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y5[i].abs());
            let e = (y5[i] - y4[i]) / sc;
            err_sq += e * e;
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            // continuous extension of the accepted step
            let dy: [f64; N] = std::array::from_fn(|i| y5[i] - y[i]);
            let mut rcont = [[0.0; 5]; N];
            for i in 0..N {
                let bspl = h * ks[0][i] - dy[i];
                rcont[i][0] = y[i];
                rcont[i][1] = dy[i];
                rcont[i][2] = bspl;
                rcont[i][3] = dy[i] - h * ks[6][i] - bspl;
                rcont[i][4] = h * D.iter().zip(ks.iter()).map(|(d, k)| d * k[i]).sum::<f64>();
            }
            let step = DenseStep {
                t0: t,
                h,
                rcont,
            };

            // event location (positive -> nonpositive crossing)
            if let Some(g) = event {
                let g_old = g(&y);
                let g_new = g(&y5);
                if g_old > 0.0 && g_new <= 0.0 {
                    let mut lo = 0.0f64;
                    let mut hi = 1.0f64;
                    for _ in 0..100 {
                        let mid = 0.5 * (lo + hi);
                        let ym = step.eval(t + mid * h);
                        if g(&ym) > 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let te = t + hi * h;
                    let ye = step.eval(te);
                    dense.push(step);
                    times.push(te);
                    states.push(ye);
                    accepted += 1;
                    terminal = TerminalEvent::Collapse { t: te };
                    break 'outer;
                }
            }

            t += h;
            y = y5;
            k1 = ks[6]; // FSAL
            dense.push(step);
            times.push(t);
            states.push(y);
            accepted += 1;

            // PI controller
            let fac = 0.9 * err.max(1e-30).powf(-0.17) * err_prev.max(1e-30).powf(0.04);
            h *= fac.clamp(0.2, 8.0);
            err_prev = err.max(1e-4);
        } else {
            rejected += 1;
            let fac = 0.9 * err.powf(-0.2);
            h *= fac.clamp(0.1, 0.9);
        }
    }

    Ok(RawTrajectory {
        times,
        states,
        dense,
        accepted,
        rejected,
        terminal,
    })
}

/// Time-ordered solution of the full equation with integrator metadata.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<State>,
    pub accepted: usize,
    pub rejected: usize,
    pub terminal_event: TerminalEvent,
    raw: RawTrajectory<2>,
}

impl Trajectory {
    pub fn t_end(&self) -> f64 {
        self.samples.last().unwrap().t
    }

    /// `(R, Rdot)` from dense output.
    pub fn interpolate(&self, t: f64) -> Option<(f64, f64)> {
        self.raw.interpolate(t).map(|y| (y[0], y[1]))
    }
}

/// Integrates the full equation from `s0` to `t_end`. Integration halts with
/// a located `Collapse` event when `R` crosses `cfg.r_floor`; step-size
/// underflow reports `Blowup` at the last valid state.
pub fn integrate_rpe(
    p: &RpeParams,
    s0: &State,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    if !(s0.r > cfg.r_floor) {
        return Err(Error::Domain(format!(
            "initial radius {} must exceed r_floor {}",
            s0.r, cfg.r_floor
        )));
    }
    let floor = cfg.r_floor;
    let f = |t: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
        let s = State {
            t,
            r: y[0],
            r_dot: y[1],
        };
        if !(s.r > 0.0) {
            return Err(Error::Domain("radius left the domain".into()));
        }
        Ok([y[1], rhs(p, &s)?])
    };
    let event = move |y: &[f64; 2]| y[0] - floor;
    let raw = dopri5(f, s0.t, [s0.r, s0.r_dot], t_end, cfg, Some(&event))?;
    let samples = raw
        .times
        .iter()
        .zip(raw.states.iter())
        .map(|(&t, y)| State {
            t,
            r: y[0],
            r_dot: y[1],
        })
        .collect();
    Ok(Trajectory {
        samples,
        accepted: raw.accepted,
        rejected: raw.rejected,
        terminal_event: raw.terminal,
        raw,
    })
}

/// Which dependent variable the reduced equation integrates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReducedMode {
    /// integrate y(x) itself; fails near y = 0 where the equation degenerates
    Velocity,
    /// integrate u = y^2 (valid for the inviscid reduction, where the
    /// equation is linear in u and passes smoothly through u = 0)
    VelocitySquared,
}

/// Reduced-equation solution y(x) or u(x) with dense output.
#[derive(Debug, Clone)]
pub struct ReducedTrajectory {
    pub mode: ReducedMode,
    pub samples: Vec<(f64, f64)>,
    raw: RawTrajectory<1>,
}

impl ReducedTrajectory {
    pub fn value_at(&self, x: f64) -> Option<f64> {
        self.raw.interpolate(x).map(|y| y[0])
    }

    /// y(x) from a `VelocitySquared` run; errors on the unphysical branch u < 0.
    pub fn velocity_at(&self, x: f64) -> Result<f64> {
        let u = self
            .value_at(x)
            .ok_or_else(|| Error::Domain(format!("x = {x} outside the integrated span")))?;
        match self.mode {
            ReducedMode::Velocity => Ok(u),
            ReducedMode::VelocitySquared => {
                if u < 0.0 {
                    Err(Error::Domain(format!(
                        "u(x) = {u} < 0: unphysical branch, no real velocity"
                    )))
                } else {
                    Ok(-u.sqrt()) // collapse branch
                }
            }
        }
    }
}

/// Integrates the time-translation reduction
/// `2x^2 y dy/dx + 3xy^2 + 2 Re_inv y + 2We - 2 p_n x^(1-3k) + 2 Th p0 x = 0`
/// from `x_range.0` to `x_range.1`.
///
/// In `VelocitySquared` mode the substitution `u = y^2` gives the linear
/// equation `x^2 u' + 3xu + 2We - 2 p_n x^(1-3k) + 2 Th p0 x = 0`, which
/// requires the inviscid limit (the viscous term is odd in y).
pub fn integrate_reduced(
    p: &RpeParams,
    p0: f64,
    x_range: (f64, f64),
    y0: f64,
    mode: ReducedMode,
    cfg: &IntegratorConfig,
) -> Result<ReducedTrajectory> {
    if x_range.0 <= 0.0 || x_range.1 <= 0.0 {
        return Err(Error::Domain("x range must be positive".into()));
    }
    let one_minus_3k = to_f64(&(rat_int(1) - rat_int(3) * p.k.clone()));
    let thp0 = p.th * p0;
    let (pn, we, re_inv) = (p.p_n, p.we, p.re_inv);
    let raw = match mode {
        ReducedMode::Velocity => {
            let f = |x: f64, y: &[f64; 1]| -> Result<[f64; 1]> {
                let yy = y[0];
                let denom = 2.0 * x * x * yy;
                if denom.abs() < 1e-12 {
                    return Err(Error::Numerics(format!(
                        "reduced equation degenerate at (x, y) = ({x}, {yy})"
                    )));
                }
                let b = 3.0 * x * yy * yy + 2.0 * re_inv * yy + 2.0 * we
                    - 2.0 * pn * x.powf(one_minus_3k)
                    + 2.0 * thp0 * x;
                Ok([-b / denom])
            };
            dopri5(f, x_range.0, [y0], x_range.1, cfg, None)?
        }
        ReducedMode::VelocitySquared => {
            if re_inv != 0.0 {
                return Err(Error::Unsupported(
                    "u = y^2 integration needs the inviscid limit (viscous term is odd in y)"
                        .into(),
                ));
            }
            let f = |x: f64, u: &[f64; 1]| -> Result<[f64; 1]> {
                let b =
                    3.0 * x * u[0] + 2.0 * we - 2.0 * pn * x.powf(one_minus_3k) + 2.0 * thp0 * x;
                Ok([-b / (x * x)])
            };
            dopri5(f, x_range.0, [y0 * y0], x_range.1, cfg, None)?
        }
    };
    let samples = raw
        .times
        .iter()
        .zip(raw.states.iter())
        .map(|(&x, y)| (x, y[0]))
        .collect();
    Ok(ReducedTrajectory { mode, samples, raw })
}

/// Time integrals of the five energy channels over a trajectory.
///
/// The channels come from multiplying the equation by `R^3 Rdot`:
/// kinetic `d/dt(R^3 Rdot^2)/2`, viscous `Re_inv R Rdot^2`, surface tension
/// `We R Rdot`, forcing `Th p(t) R^2 Rdot`, and gas `-p_n R^(2-3k) Rdot`
/// (which is `-p_n d(ln R)/dt` at `k = 1`). Their sum vanishes in exact
/// arithmetic; the numerical remainder is reported, never absorbed.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyAudit {
    pub kinetic: f64,
    pub viscous: f64,
    pub surface_tension: f64,
    pub forcing: f64,
    pub gas: f64,
    pub closure_defect: f64,
}

/// Pointwise channel integrands at a state (kinetic needs the acceleration).
pub fn energy_integrands(p: &RpeParams, s: &State) -> Result<[f64; 5]> {
    let acc = rhs(p, s)?;
    let (r, v) = (s.r, s.r_dot);
    let (pt, _) = crate::model::pressure(&p.forcing, s.t)?;
    let kinetic = 1.5 * r * r * v.powi(3) + r.powi(3) * v * acc;
    let viscous = p.re_inv * r * v * v;
    let surface = p.we * r * v;
    let forcing = p.th * pt * r * r * v;
    let gas = -p.p_n * r.powf(2.0 - 3.0 * to_f64(&p.k)) * v;
    Ok([kinetic, viscous, surface, forcing, gas])
}

/// Integrates the five channels by composite Simpson on a uniform refinement
/// of the dense output.
pub fn energy_audit(tr: &Trajectory, p: &RpeParams) -> Result<EnergyAudit> {
    if tr.samples.len() < 2 {
        return Err(Error::Domain("trajectory needs at least 2 samples".into()));
    }
    let t0 = tr.samples[0].t;
    let t1 = tr.t_end();
    let n = (8 * tr.raw.dense.len()).clamp(64, 200_000);
    let n = if n.is_multiple_of(2) { n } else { n + 1 };
    let h = (t1 - t0) / n as f64;
    let mut sums = [0.0f64; 5];
    for i in 0..=n {
        let t = t0 + i as f64 * h;
        let (r, v) = tr.interpolate(t).ok_or_else(|| {
            Error::Numerics(format!("dense output does not cover t = {t}"))
        })?;
        let s = State { t, r, r_dot: v };
        let vals = energy_integrands(p, &s)?;
        let w = if i == 0 || i == n {
            1.0
        } else if !i.is_multiple_of(2) {
            4.0
        } else {
            2.0
        };
        for (acc, v) in sums.iter_mut().zip(vals.iter()) {
            *acc += w * v;
        }
    }
    for acc in sums.iter_mut() {
        *acc *= h / 3.0;
    }
    let [kinetic, viscous, surface_tension, forcing, gas] = sums;
    Ok(EnergyAudit {
        kinetic,
        viscous,
        surface_tension,
        forcing,
        gas,
        closure_defect: kinetic + viscous + surface_tension + forcing + gas,
    })
}

/// Energy audit from plain `(t, R, Rdot)` samples (no dense output), using
/// composite Simpson on consecutive sample triples.
pub fn energy_audit_from_samples(samples: &[State], p: &RpeParams) -> Result<EnergyAudit> {
    if samples.len() < 3 {
        return Err(Error::Domain("need at least 3 samples".into()));
    }
    let mut sums = [0.0f64; 5];
    let mut i = 0;
    while i + 2 < samples.len() {
        let (s0, s1, s2) = (&samples[i], &samples[i + 1], &samples[i + 2]);
        let (h0, h1) = (s1.t - s0.t, s2.t - s1.t);
        let f0 = energy_integrands(p, s0)?;
        let f1 = energy_integrands(p, s1)?;
        let f2 = energy_integrands(p, s2)?;
        // nonuniform Simpson weights
        let h = h0 + h1;
        let w0 = h * (2.0 * h0 - h1) / (6.0 * h0);
        let w1 = h * h * h / (6.0 * h0 * h1);
        let w2 = h * (2.0 * h1 - h0) / (6.0 * h1);
        for c in 0..5 {
            sums[c] += w0 * f0[c] + w1 * f1[c] + w2 * f2[c];
        }
        i += 2;
    }
    // trapezoid on a trailing odd interval
    if i + 1 < samples.len() {
        let (s0, s1) = (&samples[i], &samples[i + 1]);
        let f0 = energy_integrands(p, s0)?;
        let f1 = energy_integrands(p, s1)?;
        let h = s1.t - s0.t;
        for c in 0..5 {
            sums[c] += 0.5 * h * (f0[c] + f1[c]);
        }
    }
    let [kinetic, viscous, surface_tension, forcing, gas] = sums;
    Ok(EnergyAudit {
        kinetic,
        viscous,
        surface_tension,
        forcing,
        gas,
        closure_defect: kinetic + viscous + surface_tension + forcing + gas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PressureForcing;
    use crate::rational::rat;

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    fn rayleigh() -> RpeParams {
        // p_n = 0, Th p0 = 1, inviscid, zero tension: classic collapse
        RpeParams::new(
            0.0,
            0.0,
            1.0,
            0.0,
            rat_int(1),
            PressureForcing::Constant { p0: 1.0 },
        )
        .unwrap()
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        // Th p0 = 1, We = 1, p_n = 2, k = 1: R^3 + R^2 - 2 = 0 has root R = 1
        let p = RpeParams::new(
            0.0,
            1.0,
            1.0,
            2.0,
            rat_int(1),
            PressureForcing::Constant { p0: 1.0 },
        )
        .unwrap();
        let s0 = State::new(0.0, 1.0, 0.0).unwrap();
        let tr = integrate_rpe(&p, &s0, 20.0, &cfg()).unwrap();
        assert_eq!(tr.terminal_event, TerminalEvent::ReachedTEnd);
        for s in &tr.samples {
            assert!((s.r - 1.0).abs() < 1e-9, "drifted to {} at t={}", s.r, s.t);
        }
    }

    #[test]
    fn rayleigh_collapse_event_time() {
        // frozen from the beta-function quadrature oracle
        let p = rayleigh();
        let s0 = State::new(0.0, 1.0, 0.0).unwrap();
        let tr = integrate_rpe(&p, &s0, 2.0, &cfg()).unwrap();
        match tr.terminal_event {
            TerminalEvent::Collapse { t } => {
                assert!((t - 0.914681356501962).abs() < 1e-5, "collapse at {t}");
            }
            other => panic!("expected collapse, got {other:?}"),
        }
    }

    #[test]
    fn collapse_time_insensitive_to_h_max() {
        let p = rayleigh();
        let s0 = State::new(0.0, 1.0, 0.0).unwrap();
        let t1 = match integrate_rpe(&p, &s0, 2.0, &cfg()).unwrap().terminal_event {
            TerminalEvent::Collapse { t } => t,
            _ => panic!(),
        };
        let mut c2 = cfg();
        c2.h_max = Some(0.005);
        let t2 = match integrate_rpe(&p, &s0, 2.0, &c2).unwrap().terminal_event {
            TerminalEvent::Collapse { t } => t,
            _ => panic!(),
        };
        assert!((t1 - t2).abs() < 1e-8, "{t1} vs {t2}");
    }

    #[test]
    fn time_reversal_on_conservative_case() {
        let p = RpeParams::new(
            0.0,
            0.5,
            1.0,
            1.0,
            rat(7, 5),
            PressureForcing::Constant { p0: 1.0 },
        )
        .unwrap();
        let s0 = State::new(0.0, 1.3, 0.2).unwrap();
        let fwd = integrate_rpe(&p, &s0, 2.0, &cfg()).unwrap();
        let end = *fwd.samples.last().unwrap();
        let back = integrate_rpe(&p, &end, 0.0, &cfg()).unwrap();
        let s_back = back.samples.last().unwrap();
        assert!((s_back.r - s0.r).abs() < 1e-7);
        assert!((s_back.r_dot - s0.r_dot).abs() < 1e-7);
    }

    #[test]
    fn determinism_bitwise() {
        let p = rayleigh();
        let s0 = State::new(0.0, 1.0, 0.0).unwrap();
        let a = integrate_rpe(&p, &s0, 0.5, &cfg()).unwrap();
        let b = integrate_rpe(&p, &s0, 0.5, &cfg()).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        for (x, y) in a.samples.iter().zip(b.samples.iter()) {
            assert_eq!(x.r.to_bits(), y.r.to_bits());
            assert_eq!(x.r_dot.to_bits(), y.r_dot.to_bits());
        }
    }

    #[test]
    fn dense_output_matches_samples() {
        let p = rayleigh();
        let s0 = State::new(0.0, 1.0, 0.0).unwrap();
        let tr = integrate_rpe(&p, &s0, 0.5, &cfg()).unwrap();
        for s in &tr.samples {
            let (r, v) = tr.interpolate(s.t).unwrap();
            assert!((r - s.r).abs() < 1e-9);
            assert!((v - s.r_dot).abs() < 1e-9);
        }
    }

    #[test]
    fn reduced_single_term_integrating_factor() {
        // p_n = 0, Th p0 = 1: u(x) = (2/3)(x^-3 - 1)
        let p = rayleigh();
        let tr = integrate_reduced(
            &p,
            1.0,
            (1.0, 0.4),
            0.0,
            ReducedMode::VelocitySquared,
            &cfg(),
        )
        .unwrap();
        for x in [0.9, 0.7, 0.5, 0.4] {
            let u = tr.value_at(x).unwrap();
            let exact = (2.0 / 3.0) * (x.powi(-3) - 1.0);
            assert!((u - exact).abs() < 1e-8, "x={x}: {u} vs {exact}");
        }
    }

    #[test]
    fn reduced_homogeneous_case_conserves_ux3() {
        // zero right-hand side: u x^3 constant
        let p = RpeParams::new(
            0.0,
            0.0,
            1.0,
            0.0,
            rat_int(1),
            PressureForcing::Constant { p0: 0.0 },
        )
        .unwrap();
        let tr = integrate_reduced(
            &p,
            0.0,
            (1.0, 0.5),
            1.0,
            ReducedMode::VelocitySquared,
            &cfg(),
        )
        .unwrap();
        for x in [1.0, 0.8, 0.6, 0.5] {
            let u = tr.value_at(x).unwrap();
            assert!((u * x.powi(3) - 1.0).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn reduced_velocity_mode_rejects_degenerate_start() {
        let p = rayleigh();
        let r = integrate_reduced(&p, 1.0, (1.0, 0.5), 0.0, ReducedMode::Velocity, &cfg());
        assert!(r.is_err());
    }

    #[test]
    fn reduced_u_mode_requires_inviscid() {
        let p = RpeParams::new(
            0.1,
            0.0,
            1.0,
            0.0,
            rat_int(1),
            PressureForcing::Constant { p0: 1.0 },
        )
        .unwrap();
        let r = integrate_reduced(
            &p,
            1.0,
            (1.0, 0.5),
            0.0,
            ReducedMode::VelocitySquared,
            &cfg(),
        );
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn energy_channels_on_equilibrium_vanish() {
        let p = RpeParams::new(
            0.0,
            1.0,
            1.0,
            2.0,
            rat_int(1),
            PressureForcing::Constant { p0: 1.0 },
        )
        .unwrap();
        let s0 = State::new(0.0, 1.0, 0.0).unwrap();
        let tr = integrate_rpe(&p, &s0, 5.0, &cfg()).unwrap();
        let audit = energy_audit(&tr, &p).unwrap();
        for v in [
            audit.kinetic,
            audit.viscous,
            audit.surface_tension,
            audit.forcing,
            audit.gas,
        ] {
            assert!(v.abs() < 1e-12, "channel {v}");
        }
    }

    #[test]
    fn rayleigh_two_channel_identity() {
        // only kinetic and forcing channels active; kinetic = -forcing and
        // the forcing integral is Th p0 (R^3 - 1)/3
        let p = rayleigh();
        let s0 = State::new(0.0, 1.0, 0.0).unwrap();
        let tr = integrate_rpe(&p, &s0, 0.8, &cfg()).unwrap();
        let audit = energy_audit(&tr, &p).unwrap();
        assert!(audit.viscous.abs() < 1e-14);
        assert!(audit.surface_tension.abs() < 1e-14);
        assert!(audit.gas.abs() < 1e-14);
        assert!(
            (audit.kinetic + audit.forcing).abs() < 1e-8,
            "kinetic {} vs forcing {}",
            audit.kinetic,
            audit.forcing
        );
        let r_end = tr.samples.last().unwrap().r;
        let expected_forcing = (r_end.powi(3) - 1.0) / 3.0;
        assert!((audit.forcing - expected_forcing).abs() < 1e-8);
    }

    #[test]
    fn full_coefficient_closure() {
        let p = RpeParams::new(
            0.1,
            0.5,
            1.0,
            1.0,
            rat_int(1),
            PressureForcing::Constant { p0: 1.0 },
        )
        .unwrap();
        let s0 = State::new(0.0, 1.0, 0.0).unwrap();
        let tr = integrate_rpe(&p, &s0, 3.0, &cfg()).unwrap();
        let audit = energy_audit(&tr, &p).unwrap();
        let max_channel = [
            audit.kinetic,
            audit.viscous,
            audit.surface_tension,
            audit.forcing,
            audit.gas,
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(
            audit.closure_defect.abs() < 1e-8 * max_channel,
            "defect {} vs max channel {}",
            audit.closure_defect,
            max_channel
        );
    }

    #[test]
    fn energy_identity_pointwise() {
        // d/dt(kinetic density) = -(sum of other four integrands) on the manifold
        let p = RpeParams::new(
            0.1,
            0.5,
            1.0,
            1.0,
            rat_int(1),
            PressureForcing::Constant { p0: 1.0 },
        )
        .unwrap();
        let s0 = State::new(0.0, 1.4, -0.2).unwrap();
        let tr = integrate_rpe(&p, &s0, 2.0, &cfg()).unwrap();
        let mut checked = 0;
        for i in 0..40 {
            let t = 0.05 * i as f64;
            let Some((r, v)) = tr.interpolate(t) else { break };
            if v.abs() < 1e-3 {
                continue;
            }
            let s = State { t, r, r_dot: v };
            let ch = energy_integrands(&p, &s).unwrap();
            let rest: f64 = ch[1..].iter().sum();
            assert!(
                (ch[0] + rest).abs() <= 1e-6 * ch[0].abs().max(1.0),
                "t={t}: kinetic {} rest {}",
                ch[0],
                rest
            );
            checked += 1;
        }
        assert!(checked > 10);
    }

    #[test]
    fn convergence_improves_with_tolerance() {
        // against the closed-form curve R = (t+1)^(2/5) (case pn = Th = 1,
        // inviscid, k = 1, forcing (t+1)^(-6/5))
        let p = RpeParams::new(
            0.0,
            0.0,
            1.0,
            1.0,
            rat_int(1),
            PressureForcing::PowerLaw {
                c: 1.0,
                a: 1.0,
                b: 1.0,
                e: rat(-6, 5),
            },
        )
        .unwrap();
        let s0 = State::new(0.0, 1.0, 0.4).unwrap();
        let err_at = |rel: f64, abs: f64| -> f64 {
            let c = IntegratorConfig {
                rel_tol: rel,
                abs_tol: abs,
                ..Default::default()
            };
            let tr = integrate_rpe(&p, &s0, 10.0, &c).unwrap();
            let mut worst = 0.0f64;
            for i in 1..=40 {
                let t = 0.25 * i as f64;
                let (r, _) = tr.interpolate(t).unwrap();
                let exact = (t + 1.0).powf(0.4);
                worst = worst.max(((r - exact) / exact).abs());
            }
            worst
        };
        let e1 = err_at(1e-6, 1e-8);
        let e2 = err_at(5e-7, 5e-9);
        assert!(e2 < e1 * 4.0, "halving tolerance did not help: {e1} -> {e2}");
        assert!(e1 < 1e-5);
    }
}
