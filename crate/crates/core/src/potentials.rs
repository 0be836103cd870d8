//! Scalar convex barrier potentials and their one-dimensional proximal map.
//!
//! A barrier `phi` is `+inf` on `(-inf, 0)`, convex, and `C^1` on `(0, inf)`.
//! Its behaviour at `0+` decides everything downstream: a finite `phi(0)`
//! means reflection, a logarithmic singularity `-gamma log u` means repulsion
//! whose strength is read off `gamma`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contract for a convex barrier on the half-line.
///
/// `value` and `derivative` are only called with `0 < u < domain_end()`.
/// Implementations must have a nondecreasing derivative; the proximal solver
/// relies on it.
pub trait BarrierPotential: fmt::Debug + Send + Sync {
    fn name(&self) -> String;

    fn value(&self, u: f64) -> f64;

    fn derivative(&self, u: f64) -> f64;

    /// `phi(0)`, possibly `+inf`.
    fn value_at_zero(&self) -> f64;

    /// `phi'(0+)`, possibly `-inf`.
    fn derivative_limit_at_zero(&self) -> f64;

    /// `gamma` such that `phi(u) = -gamma log u + O(1)` as `u -> 0+`, when
    /// known analytically.
    fn zero_exponent(&self) -> Option<f64> {
        None
    }

    /// Right end of the effective domain; `phi = +inf` from there on.
    fn domain_end(&self) -> f64 {
        f64::INFINITY
    }

    /// Closed-form proximal map, when one exists.
    fn closed_form_prox(&self, _z: f64, _tau: f64) -> Option<Prox1d> {
        None
    }

    /// Serializable description, for built-in families.
    fn spec(&self) -> Option<PotentialSpec> {
        None
    }
}

pub type SharedPotential = Arc<dyn BarrierPotential>;

/// Output of the one-dimensional proximal map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prox1d {
    pub y: f64,
    /// Multiplier of the constraint `y >= 0`; positive only when `y = 0`.
    pub multiplier: f64,
}

/// `phi(u)` for `u >= 0`.
pub fn eval(p: &dyn BarrierPotential, u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::PotentialDomain { potential: p.name(), u });
    }
    if u == 0.0 {
        Ok(p.value_at_zero())
    } else if u >= p.domain_end() {
        Ok(f64::INFINITY)
    } else {
        Ok(p.value(u))
    }
}

/// `phi'(u)` for `0 < u < domain_end`.
pub fn deriv(p: &dyn BarrierPotential, u: f64) -> Result<f64> {
    if !(u > 0.0) || u >= p.domain_end() {
        return Err(Error::PotentialDomain { potential: p.name(), u });
    }
    Ok(p.derivative(u))
}

/// `argmin_{y >= 0} (y - z)^2 / 2 + tau phi(y)` and the multiplier of the
/// constraint. Uses the potential's closed form when it has one.
pub fn prox1d(p: &dyn BarrierPotential, z: f64, tau: f64) -> Result<Prox1d> {
    check_prox_args(z, tau)?;
    if let Some(r) = p.closed_form_prox(z, tau) {
        return Ok(r);
    }
    prox1d_generic(p, z, tau)
}

fn check_prox_args(z: f64, tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!("prox step tau must be positive, got {tau}")));
    }
    if !z.is_finite() {
        return Err(Error::InvalidParameter(format!("prox input must be finite, got {z}")));
    }
    Ok(())
}

const BRACKET_ITERS: usize = 2200;
const ROOT_ITERS: usize = 200;

/// Generic proximal solve: bracket the root of the strictly increasing map
/// `F(y) = y - z + tau phi'(y)`, then refine with Brent's method.
pub fn prox1d_generic(p: &dyn BarrierPotential, z: f64, tau: f64) -> Result<Prox1d> {
    check_prox_args(z, tau)?;
    let end = p.domain_end();
    let dlim = p.derivative_limit_at_zero();
    let f = |y: f64| y - z + tau * p.derivative(y);

    if dlim.is_finite() {
        let f0 = -z + tau * dlim;
        if f0 >= 0.0 {
            return Ok(Prox1d { y: 0.0, multiplier: f0 });
        }
    }

    // upper end: F(hi) > 0
    let mut hi = z.max(0.0) + 1.0;
    if hi >= end {
        hi = 0.5 * end;
    }
    let mut f_hi = f(hi);
    let mut it = 0;
    while !(f_hi > 0.0) {
        it += 1;
        if it > BRACKET_ITERS {
            return Err(Error::NonConvergence { what: "prox1d upper bracket", iterations: it });
        }
        hi = if end.is_finite() { 0.5 * (hi + end) } else { 2.0 * hi + 1.0 };
        f_hi = f(hi);
    }

    // lower end: F(lo) < 0, shrinking geometrically toward 0
    let (mut lo, mut f_lo);
    if dlim.is_finite() {
        lo = 0.0;
        f_lo = -z + tau * dlim;
    } else {
        lo = 0.5 * hi;
        f_lo = f(lo);
        let mut it = 0;
        while !(f_lo < 0.0) {
            it += 1;
            if it > BRACKET_ITERS || lo == 0.0 {
                return Err(Error::NonConvergence { what: "prox1d lower bracket", iterations: it });
            }
            if f_lo.is_finite() {
                hi = lo;
                f_hi = f_lo;
            }
            lo *= 0.5;
            f_lo = f(lo);
        }
    }
    if f_lo == 0.0 {
        return Ok(Prox1d { y: lo, multiplier: 0.0 });
    }

    let y = brent(&f, lo, hi, f_lo, f_hi)?;
    Ok(Prox1d { y, multiplier: 0.0 })
}

/// Brent's root finder on a sign-changing bracket.
fn brent(f: &dyn Fn(f64) -> f64, a0: f64, b0: f64, fa0: f64, fb0: f64) -> Result<f64> {
    let (mut a, mut b, mut fa, mut fb) = (a0, b0, fa0, fb0);
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..ROOT_ITERS {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(xm) };
        fb = f(b);
    }
    Err(Error::NonConvergence { what: "prox1d root", iterations: ROOT_ITERS })
}

/// Pure reflection: `phi = 0` on `[0, inf)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Zero;

impl BarrierPotential for Zero {
    fn name(&self) -> String {
        "zero".into()
    }
    fn value(&self, _u: f64) -> f64 {
        0.0
    }
    fn derivative(&self, _u: f64) -> f64 {
        0.0
    }
    fn value_at_zero(&self) -> f64 {
        0.0
    }
    fn derivative_limit_at_zero(&self) -> f64 {
        0.0
    }
    fn zero_exponent(&self) -> Option<f64> {
        Some(0.0)
    }
    fn closed_form_prox(&self, z: f64, _tau: f64) -> Option<Prox1d> {
        Some(if z >= 0.0 {
            Prox1d { y: z, multiplier: 0.0 }
        } else {
            Prox1d { y: 0.0, multiplier: -z }
        })
    }
    fn spec(&self) -> Option<PotentialSpec> {
        Some(PotentialSpec::Zero)
    }
}

/// `phi(u) = -gamma log u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBarrier {
    gamma: f64,
}

impl LogBarrier {
    pub fn new(gamma: f64) -> Result<Self> {
        positive("gamma", gamma)?;
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Positive root of `y^2 - z y - tau gamma = 0`, written to avoid
    /// cancellation when `z < 0`.
    pub fn prox_closed_form(&self, z: f64, tau: f64) -> f64 {
        let disc = (z * z + 4.0 * tau * self.gamma).sqrt();
        if z >= 0.0 {
            0.5 * (z + disc)
        } else {
            2.0 * tau * self.gamma / (disc - z)
        }
    }
}

impl BarrierPotential for LogBarrier {
    fn name(&self) -> String {
        format!("log(gamma={})", self.gamma)
    }
    fn value(&self, u: f64) -> f64 {
        -self.gamma * u.ln()
    }
    fn derivative(&self, u: f64) -> f64 {
        -self.gamma / u
    }
    fn value_at_zero(&self) -> f64 {
        f64::INFINITY
    }
    fn derivative_limit_at_zero(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn zero_exponent(&self) -> Option<f64> {
        Some(self.gamma)
    }
    fn closed_form_prox(&self, z: f64, tau: f64) -> Option<Prox1d> {
        Some(Prox1d { y: self.prox_closed_form(z, tau), multiplier: 0.0 })
    }
    fn spec(&self) -> Option<PotentialSpec> {
        Some(PotentialSpec::Log { gamma: self.gamma })
    }
}

/// `phi(u) = -gamma log(u + c)` with `c > 0`; finite at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedLog {
    gamma: f64,
    c: f64,
}

impl ShiftedLog {
    pub fn new(gamma: f64, c: f64) -> Result<Self> {
        positive("gamma", gamma)?;
        positive("c", c)?;
        Ok(Self { gamma, c })
    }
}

impl BarrierPotential for ShiftedLog {
    fn name(&self) -> String {
        format!("shifted_log(gamma={}, c={})", self.gamma, self.c)
    }
    fn value(&self, u: f64) -> f64 {
        -self.gamma * (u + self.c).ln()
    }
    fn derivative(&self, u: f64) -> f64 {
        -self.gamma / (u + self.c)
    }
    fn value_at_zero(&self) -> f64 {
        -self.gamma * self.c.ln()
    }
    fn derivative_limit_at_zero(&self) -> f64 {
        -self.gamma / self.c
    }
    fn spec(&self) -> Option<PotentialSpec> {
        Some(PotentialSpec::ShiftedLog { gamma: self.gamma, c: self.c })
    }
}

/// `phi(u) = -gamma log sin(u / scale)` on `(0, pi * scale)`.
///
/// With `scale = sqrt 2` this is the pair interaction of the trigonometric
/// (circular) particle system written in face coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigLogSin {
    gamma: f64,
    scale: f64,
}

impl TrigLogSin {
    pub fn new(gamma: f64, scale: f64) -> Result<Self> {
        positive("gamma", gamma)?;
        positive("scale", scale)?;
        Ok(Self { gamma, scale })
    }
}

impl BarrierPotential for TrigLogSin {
    fn name(&self) -> String {
        format!("trig_log_sin(gamma={}, scale={})", self.gamma, self.scale)
    }
    fn value(&self, u: f64) -> f64 {
        -self.gamma * (u / self.scale).sin().ln()
    }
    fn derivative(&self, u: f64) -> f64 {
        let t = u / self.scale;
        -self.gamma * t.cos() / (self.scale * t.sin())
    }
    fn value_at_zero(&self) -> f64 {
        f64::INFINITY
    }
    fn derivative_limit_at_zero(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn zero_exponent(&self) -> Option<f64> {
        Some(self.gamma)
    }
    fn domain_end(&self) -> f64 {
        PI * self.scale
    }
    fn spec(&self) -> Option<PotentialSpec> {
        Some(PotentialSpec::TrigLogSin { gamma: self.gamma, scale: self.scale })
    }
}

/// `phi(u) = -gamma log sinh(sqrt 2 u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicLogSinh {
    gamma: f64,
}

impl HyperbolicLogSinh {
    pub fn new(gamma: f64) -> Result<Self> {
        positive("gamma", gamma)?;
        Ok(Self { gamma })
    }
}

impl BarrierPotential for HyperbolicLogSinh {
    fn name(&self) -> String {
        format!("hyp_log_sinh(gamma={})", self.gamma)
    }
    fn value(&self, u: f64) -> f64 {
        let x = SQRT_2 * u;
        // log sinh x = x + log(1 - e^{-2x}) - log 2, stable for large x
        let ls = if x > 20.0 {
            x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2
        } else {
            x.sinh().ln()
        };
        -self.gamma * ls
    }
    fn derivative(&self, u: f64) -> f64 {
        let x = SQRT_2 * u;
        -self.gamma * SQRT_2 / x.tanh()
    }
    fn value_at_zero(&self) -> f64 {
        f64::INFINITY
    }
    fn derivative_limit_at_zero(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn zero_exponent(&self) -> Option<f64> {
        Some(self.gamma)
    }
    fn spec(&self) -> Option<PotentialSpec> {
        Some(PotentialSpec::HypLogSinh { gamma: self.gamma })
    }
}

/// `u -> inner(factor * u)`.
#[derive(Debug, Clone)]
pub struct Scaled {
    inner: SharedPotential,
    factor: f64,
}

impl Scaled {
    pub fn new(inner: SharedPotential, factor: f64) -> Result<Self> {
        positive("factor", factor)?;
        Ok(Self { inner, factor })
    }
}

impl BarrierPotential for Scaled {
    fn name(&self) -> String {
        format!("{}∘(u*{})", self.inner.name(), self.factor)
    }
    fn value(&self, u: f64) -> f64 {
        self.inner.value(self.factor * u)
    }
    fn derivative(&self, u: f64) -> f64 {
        self.factor * self.inner.derivative(self.factor * u)
    }
    fn value_at_zero(&self) -> f64 {
        self.inner.value_at_zero()
    }
    fn derivative_limit_at_zero(&self) -> f64 {
        self.factor * self.inner.derivative_limit_at_zero()
    }
    fn zero_exponent(&self) -> Option<f64> {
        self.inner.zero_exponent()
    }
    fn domain_end(&self) -> f64 {
        self.inner.domain_end() / self.factor
    }
    fn spec(&self) -> Option<PotentialSpec> {
        self.inner.spec().map(|inner| PotentialSpec::Scaled {
            factor: self.factor,
            inner: Box::new(inner),
        })
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn default_trig_scale() -> f64 {
    SQRT_2
}

/// Config grammar for the built-in families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Log {
        gamma: f64,
    },
    ShiftedLog {
        gamma: f64,
        c: f64,
    },
    TrigLogSin {
        gamma: f64,
        #[serde(default = "default_trig_scale")]
        scale: f64,
    },
    HypLogSinh {
        gamma: f64,
    },
    Scaled {
        factor: f64,
        inner: Box<PotentialSpec>,
    },
}

impl PotentialSpec {
    pub fn build(&self) -> Result<SharedPotential> {
        Ok(match self {
            PotentialSpec::Zero => Arc::new(Zero),
            PotentialSpec::Log { gamma } => Arc::new(LogBarrier::new(*gamma)?),
            PotentialSpec::ShiftedLog { gamma, c } => Arc::new(ShiftedLog::new(*gamma, *c)?),
            PotentialSpec::TrigLogSin { gamma, scale } => Arc::new(TrigLogSin::new(*gamma, *scale)?),
            PotentialSpec::HypLogSinh { gamma } => Arc::new(HyperbolicLogSinh::new(*gamma)?),
            PotentialSpec::Scaled { factor, inner } => Arc::new(Scaled::new(inner.build()?, *factor)?),
        })
    }
}

/// Log-spaced grid on `[1e-6, 1e3]` clipped to the potential's domain.
pub fn contract_grid(p: &dyn BarrierPotential, points: usize) -> Vec<f64> {
    let hi = 1e3_f64.min(0.999 * p.domain_end());
    let (la, lb) = (1e-6_f64.ln(), hi.ln());
    (0..points)
        .map(|k| (la + (lb - la) * k as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Checks the convexity and boundary-value parts of the contract on a grid.
/// Returns a description of every violation found.
pub fn verify_contract(p: &dyn BarrierPotential) -> Vec<String> {
    let mut failures = Vec::new();
    let grid = contract_grid(p, 200);
    let derivs: Vec<f64> = grid.iter().map(|&u| p.derivative(u)).collect();
    for w in 0..grid.len() - 1 {
        let (d0, d1) = (derivs[w], derivs[w + 1]);
        if d1 < d0 - 1e-12 * (1.0 + d0.abs()) {
            failures.push(format!(
                "derivative decreases between u={:e} ({d0}) and u={:e} ({d1})",
                grid[w],
                grid[w + 1]
            ));
        }
    }
    // phi(u) must head toward phi(0) as u -> 0+
    let probes = [1e-2, 1e-4, 1e-6, 1e-8];
    let vals: Vec<f64> = probes.iter().map(|&u| p.value(u)).collect();
    let v0 = p.value_at_zero();
    if v0.is_infinite() {
        if !(vals[3] > vals[0]) {
            failures.push("value does not grow toward the declared +inf at 0".into());
        }
    } else {
        let err_far = (vals[0] - v0).abs();
        let err_near = (vals[3] - v0).abs();
        if err_near > err_far + 1e-12 || err_near > 1e-4 * (1.0 + v0.abs()) {
            failures.push(format!("value at 1e-8 is {} but phi(0) is declared {v0}", vals[3]));
        }
    }
    let dl = p.derivative_limit_at_zero();
    let dnear = p.derivative(1e-10);
    if dl.is_finite() {
        if (dnear - dl).abs() > 1e-6 * (1.0 + dl.abs()) {
            failures.push(format!("phi'(1e-10) = {dnear} but phi'(0+) is declared {dl}"));
        }
    } else if dnear > -1e6 {
        failures.push(format!("phi'(0+) declared -inf but phi'(1e-10) = {dnear}"));
    }
    failures
}
