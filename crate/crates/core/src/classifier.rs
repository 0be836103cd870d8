//! Boundary behaviour of a single face: scale function and the
//! Weak / Middle / Strong trichotomy.
//!
//! Divergence of `int_0+ exp(2 phi)` cannot be decided by quadrature, so the
//! verdict for singular potentials goes through the exponent `gamma` of the
//! logarithmic singularity, declared or fitted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{FaceRole, PolyhedralModel};
use crate::potentials::BarrierPotential;

/// Critical exponent: `exp(2 phi) ~ u^{-2 gamma}` is integrable at 0 iff
/// `gamma < 1/2`.
pub const CRITICAL_EXPONENT: f64 = 0.5;
/// Half-width of the band around the critical exponent in which a fitted
/// exponent is not trusted.
pub const NEAR_CRITICAL_BAND: f64 = 0.02;
/// Fitting window for the exponent regression.
pub const REGRESSION_RANGE: (f64, f64) = (1e-10, 1e-2);
const REGRESSION_POINTS: usize = 81;

const SCALE_RTOL: f64 = 1e-8;
const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryClass {
    /// `phi(0) < inf`: the face is hit and the state reflects there.
    Weak,
    /// `phi(0) = inf` but `exp(2 phi)` integrable at 0: hit, zero local time.
    Middle,
    /// `exp(2 phi)` not integrable at 0: never hit.
    Strong,
}

impl BoundaryClass {
    pub fn prediction(self) -> &'static str {
        match self {
            BoundaryClass::Weak => "reachable with reflection",
            BoundaryClass::Middle => "reachable, zero local time",
            BoundaryClass::Strong => "face unreachable",
        }
    }

    pub fn reachable(self) -> bool {
        self != BoundaryClass::Strong
    }
}

impl std::fmt::Display for BoundaryClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentSource {
    /// Finite `phi(0)`; no exponent needed.
    FiniteAtZero,
    Declared,
    Regression,
}

/// Verdict plus the numbers behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: BoundaryClass,
    pub method: ExponentSource,
    pub exponent: Option<f64>,
    /// Coefficient of determination of the log-log fit, when one was made.
    pub fit_r2: Option<f64>,
    pub value_at_zero: f64,
    pub derivative_limit_at_zero: f64,
}

/// Least-squares estimate of `gamma` from `2 phi(u) = -2 gamma log u + c`
/// on a log grid in [`REGRESSION_RANGE`]. Returns `(gamma, r2)`.
pub fn regress_exponent(p: &dyn BarrierPotential) -> Result<(f64, f64)> {
    let (lo, hi) = REGRESSION_RANGE;
    let hi = hi.min(0.5 * p.domain_end());
    let (la, lb) = (lo.ln(), hi.ln());
    let mut xs = Vec::with_capacity(REGRESSION_POINTS);
    let mut ys = Vec::with_capacity(REGRESSION_POINTS);
    for k in 0..REGRESSION_POINTS {
        let l = la + (lb - la) * k as f64 / (REGRESSION_POINTS - 1) as f64;
        let v = 2.0 * p.value(l.exp());
        if !v.is_finite() {
            return Err(Error::PotentialDomain { potential: p.name(), u: l.exp() });
        }
        xs.push(l);
        ys.push(v);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok((-slope / 2.0, r2))
}

/// Classifies with the potential's declared exponent when it has one.
pub fn classify(p: &dyn BarrierPotential) -> Result<Classification> {
    classify_with_hint(p, p.zero_exponent())
}

/// Classifies using `hint` as the zero exponent; `None` forces the
/// regression path.
pub fn classify_with_hint(p: &dyn BarrierPotential, hint: Option<f64>) -> Result<Classification> {
    let v0 = p.value_at_zero();
    let d0 = p.derivative_limit_at_zero();
    if v0 < f64::INFINITY {
        return Ok(Classification {
            class: BoundaryClass::Weak,
            method: ExponentSource::FiniteAtZero,
            exponent: None,
            fit_r2: None,
            value_at_zero: v0,
            derivative_limit_at_zero: d0,
        });
    }
    let (gamma, method, r2) = match hint {
        Some(g) => (g, ExponentSource::Declared, None),
        None => {
            let (g, r2) = regress_exponent(p)?;
            if (g - CRITICAL_EXPONENT).abs() < NEAR_CRITICAL_BAND {
                return Err(Error::Indeterminate { face: p.name(), estimate: g });
            }
            (g, ExponentSource::Regression, Some(r2))
        }
    };
    let class = if gamma >= CRITICAL_EXPONENT { BoundaryClass::Strong } else { BoundaryClass::Middle };
    Ok(Classification {
        class,
        method,
        exponent: Some(gamma),
        fit_r2: r2,
        value_at_zero: v0,
        derivative_limit_at_zero: d0,
    })
}

/// One row of [`classify_model`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceVerdict {
    pub face: usize,
    pub label: String,
    pub role: FaceRole,
    pub potential: String,
    pub classification: Classification,
    /// Whether the face can be hit, after taking the model's geometry into
    /// account.
    pub reachable: bool,
    pub prediction: String,
    pub note: Option<String>,
}

/// Facewise classification. Walls of non-simple roots, and any other face
/// that is not a facet, are reported with the facewise class but predicted
/// unreachable: they meet the closed domain only where two or more other
/// faces meet.
pub fn classify_model(model: &PolyhedralModel) -> Result<Vec<FaceVerdict>> {
    model
        .faces()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let p = model.potential(i);
            let c = classify(p).map_err(|e| match e {
                Error::Indeterminate { estimate, .. } => Error::Indeterminate { face: f.label.clone(), estimate },
                other => other,
            })?;
            let role = model.role(i);
            let facet = role != FaceRole::NonSimpleRoot && model.domain().is_facet(i)?;
            let (reachable, prediction, note) = if !facet && c.class.reachable() {
                let what = if role == FaceRole::NonSimpleRoot { "non-simple root wall" } else { "not a facet" };
                (
                    false,
                    BoundaryClass::Strong.prediction().to_string(),
                    Some(format!("{what}: unreachable, although its one-dimensional class is {}", c.class)),
                )
            } else {
                (c.class.reachable(), c.class.prediction().to_string(), None)
            };
            Ok(FaceVerdict {
                face: i,
                label: f.label.clone(),
                role,
                potential: p.name(),
                classification: c,
                reachable,
                prediction,
                note,
            })
        })
        .collect()
}

/// `p(x) = int_1^x exp(2 (phi(u) - phi(1))) du`.
#[derive(Debug, Clone, Copy)]
pub struct ScaleFunction<'a> {
    potential: &'a dyn BarrierPotential,
    phi1: f64,
}

impl<'a> ScaleFunction<'a> {
    pub fn new(potential: &'a dyn BarrierPotential) -> Result<Self> {
        if !(potential.domain_end() > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "scale function is normalised at 1, outside the domain of {}",
                potential.name()
            )));
        }
        Ok(Self { potential, phi1: potential.value(1.0) })
    }

    pub fn potential(&self) -> &dyn BarrierPotential {
        self.potential
    }

    /// `2 (phi(u) - phi(1))`.
    fn exponent(&self, u: f64) -> f64 {
        2.0 * (self.potential.value(u) - self.phi1)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() || x >= self.potential.domain_end() {
            return Err(Error::PotentialDomain { potential: self.potential.name(), u: x });
        }
        if x == 1.0 {
            return Ok(0.0);
        }
        let (a, b, sign) = if x > 1.0 { (1.0, x, 1.0) } else { (x, 1.0, -1.0) };
        // phi is convex, so on [a, b] the integrand peaks at an endpoint
        let shift = self.exponent(a).max(self.exponent(b));
        if !shift.is_finite() {
            return Err(Error::QuadratureOverflow { lo: a, hi: b });
        }
        let f = |u: f64| (self.exponent(u) - shift).exp();
        let mut breaks = vec![a];
        if b / a > 10.0 {
            let pieces = (b / a).log10().ceil() as usize;
            let (la, lb) = (a.ln(), b.ln());
            for k in 1..pieces {
                breaks.push((la + (lb - la) * k as f64 / pieces as f64).exp());
            }
        }
        breaks.push(b);
        let integral = adaptive_gk15(&f, &breaks, SCALE_RTOL)?;
        let scale = shift.exp();
        let v = integral * scale;
        if !v.is_finite() {
            return Err(Error::QuadratureOverflow { lo: a, hi: b });
        }
        Ok(sign * v)
    }
}

/// Scale function of `p` at `x`.
pub fn scale(p: &dyn BarrierPotential, x: f64) -> Result<f64> {
    ScaleFunction::new(p)?.eval(x)
}

/// Upper bound on the probability that a one-dimensional gap with potential
/// `p`, started at `u0`, ever comes down to `eps`:
/// `(p(end) - p(u0)) / (p(end) - p(eps))`, from optional stopping of
/// `p(U_t)`. Returns 1 when `p(end)` is infinite, where no such bound exists.
pub fn approach_probability_bound(p: &dyn BarrierPotential, u0: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !(u0 > 0.0) {
        return Err(Error::InvalidParameter(format!("need u0 > 0 and eps > 0, got {u0} and {eps}")));
    }
    if eps >= u0 {
        return Ok(1.0);
    }
    let sf = ScaleFunction::new(p)?;
    let base = sf.eval(u0)?;
    let near = match sf.eval(eps) {
        Ok(b) => base - b,
        Err(Error::QuadratureOverflow { .. }) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    // tail p(end) - p(u0), pushed out geometrically until it settles
    let end = p.domain_end();
    let mut tail = 0.0;
    for k in 1..=400 {
        let x = if end.is_finite() { end - (end - u0) * 0.5f64.powi(k) } else { u0 * 2f64.powi(k) };
        if !(x < end) || !x.is_finite() {
            break;
        }
        let v = match sf.eval(x) {
            Ok(v) => v - base,
            Err(Error::QuadratureOverflow { .. }) => return Ok(1.0),
            Err(e) => return Err(e),
        };
        if !v.is_finite() {
            return Ok(1.0);
        }
        let settled = v - tail <= 1e-9 * v;
        tail = v;
        if settled {
            return Ok(tail / (tail + near));
        }
    }
    Ok(1.0)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate and `|Kronrod - Gauss|` on `[a, b]`.
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WEIGHTS[7] * fc;
    let mut g = GAUSS7_WEIGHTS[3] * fc;
    for j in 0..7 {
        let dx = h * GK_NODES[j];
        let s = f(c - dx) + f(c + dx);
        k += GK_WEIGHTS[j] * s;
        if j % 2 == 1 {
            g += GAUSS7_WEIGHTS[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss-Kronrod 7-15 over the consecutive intervals of
/// `breaks`, bisecting the worst interval until the summed error estimate is
/// below `rtol |I|`.
fn adaptive_gk15(f: &dyn Fn(f64) -> f64, breaks: &[f64], rtol: f64) -> Result<f64> {
    let mut parts: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::QuadratureOverflow { lo: breaks[0], hi: breaks[breaks.len() - 1] });
        }
        if err <= rtol * total.abs() || err < 1e-300 {
            return Ok(total);
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::NonConvergence { what: "scale-function quadrature", iterations: parts.len() });
        }
        let worst = (0..parts.len()).max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3)).unwrap();
        let (a, b, _, _) = parts[worst];
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(f, a, m);
        let (v2, e2) = gk15(f, m, b);
        parts[worst] = (a, m, v1, e1);
        parts.push((m, b, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{HyperbolicLogSinh, LogBarrier, Scaled, ShiftedLog, TrigLogSin, Zero};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    #[test]
    fn scale_examples() {
        assert_eq!(scale(&LogBarrier::new(0.3).unwrap(), 1.0).unwrap(), 0.0);
        assert_relative_eq!(scale(&Zero, 3.0).unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(scale(&LogBarrier::new(0.5).unwrap(), std::f64::consts::E).unwrap(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn scale_matches_power_closed_form() {
        for g in [0.1, 0.3, 0.7, 1.5, 4.0] {
            let p = LogBarrier::new(g).unwrap();
            for x in [1e-6_f64, 1e-3, 0.2, 5.0, 1e4] {
                let expect = (x.powf(1.0 - 2.0 * g) - 1.0) / (1.0 - 2.0 * g);
                assert_relative_eq!(scale(&p, x).unwrap(), expect, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn scale_is_increasing() {
        let pots: Vec<Box<dyn BarrierPotential>> = vec![
            Box::new(LogBarrier::new(0.8).unwrap()),
            Box::new(HyperbolicLogSinh::new(0.4).unwrap()),
            Box::new(TrigLogSin::new(0.6, std::f64::consts::SQRT_2).unwrap()),
            Box::new(ShiftedLog::new(1.0, 0.5).unwrap()),
        ];
        for p in &pots {
            let end = p.domain_end().min(20.0);
            let xs: Vec<f64> = (1..60).map(|k| end * k as f64 / 60.0).collect();
            let vs: Vec<f64> = xs.iter().map(|&x| scale(p.as_ref(), x).unwrap()).collect();
            assert!(vs.windows(2).all(|w| w[1] > w[0]), "{}", p.name());
        }
    }

    #[test]
    fn scale_overflow_is_reported() {
        let p = LogBarrier::new(400.0).unwrap();
        assert!(matches!(scale(&p, 1e-3), Err(Error::QuadratureOverflow { .. })));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&Zero).unwrap().class, BoundaryClass::Weak);
        assert_eq!(classify(&LogBarrier::new(0.7).unwrap()).unwrap().class, BoundaryClass::Strong);
        assert_eq!(classify(&LogBarrier::new(0.3).unwrap()).unwrap().class, BoundaryClass::Middle);
        assert_eq!(classify(&ShiftedLog::new(2.0, 0.1).unwrap()).unwrap().class, BoundaryClass::Weak);
    }

    #[test]
    fn families_share_threshold() {
        let s2 = std::f64::consts::SQRT_2;
        for g in [0.1, 0.3, 0.49, 0.5, 0.51, 0.7, 0.9] {
            let expect = if g >= 0.5 { BoundaryClass::Strong } else { BoundaryClass::Middle };
            assert_eq!(classify(&LogBarrier::new(g).unwrap()).unwrap().class, expect);
            assert_eq!(classify(&TrigLogSin::new(g, s2).unwrap()).unwrap().class, expect);
            assert_eq!(classify(&HyperbolicLogSinh::new(g).unwrap()).unwrap().class, expect);
        }
    }

    #[test]
    fn regression_recovers_exponent() {
        let s2 = std::f64::consts::SQRT_2;
        for g in [0.1, 0.3, 0.45, 0.6, 0.9, 2.0] {
            let pots: Vec<Box<dyn BarrierPotential>> = vec![
                Box::new(LogBarrier::new(g).unwrap()),
                Box::new(TrigLogSin::new(g, s2).unwrap()),
                Box::new(TrigLogSin::new(g, 2.0 * s2).unwrap()),
                Box::new(HyperbolicLogSinh::new(g).unwrap()),
                Box::new(Scaled::new(Arc::new(LogBarrier::new(g).unwrap()), s2).unwrap()),
            ];
            for p in &pots {
                let c = classify_with_hint(p.as_ref(), None).unwrap();
                assert_eq!(c.method, ExponentSource::Regression);
                let est = c.exponent.unwrap();
                assert!((est - g).abs() < 0.01, "{}: {est}", p.name());
                assert_eq!(c.class, classify(p.as_ref()).unwrap().class);
            }
        }
    }

    #[test]
    fn near_critical_without_hint_is_indeterminate() {
        let p = LogBarrier::new(0.51).unwrap();
        assert!(matches!(classify_with_hint(&p, None), Err(Error::Indeterminate { .. })));
        assert_eq!(classify(&p).unwrap().class, BoundaryClass::Strong);
    }

    /// `int_0^1 phi'^2 exp(-2 phi)` by integrating down to `eps` and checking
    /// the tail contribution dies out.
    fn rost_vares_integral_converges(p: &dyn BarrierPotential) -> bool {
        let f = |u: f64| {
            let d = p.derivative(u);
            d * d * (-2.0 * p.value(u)).exp()
        };
        let part = |lo: f64, hi: f64| adaptive_gk15(&f, &[lo, hi], 1e-10).unwrap();
        let body = part(1e-4, 1.0_f64.min(0.5 * p.domain_end()));
        let t1 = part(1e-8, 1e-4);
        let t2 = part(1e-12, 1e-8);
        t2 < 0.5 * t1 && t1 < 10.0 * body.max(1e-300)
    }

    #[test]
    fn rost_vares_condition_implies_strong() {
        let s2 = std::f64::consts::SQRT_2;
        let mut checked = 0;
        for g in [0.2, 0.4, 0.6, 0.75, 1.0, 1.5, 3.0] {
            let pots: Vec<Box<dyn BarrierPotential>> = vec![
                Box::new(LogBarrier::new(g).unwrap()),
                Box::new(TrigLogSin::new(g, s2).unwrap()),
                Box::new(HyperbolicLogSinh::new(g).unwrap()),
                Box::new(Scaled::new(Arc::new(LogBarrier::new(g).unwrap()), s2).unwrap()),
            ];
            for p in &pots {
                if p.value_at_zero().is_infinite() && rost_vares_integral_converges(p.as_ref()) {
                    assert_eq!(classify(p.as_ref()).unwrap().class, BoundaryClass::Strong, "{}", p.name());
                    checked += 1;
                }
            }
        }
        assert!(checked >= 12);
    }

    #[test]
    fn model_classification() {
        use crate::models::{build_rost_vares, build_wishart_radii};
        use crate::rootsys::{dunkl_model, standard_root_system, Family};
        let dyson = build_rost_vares(3, Arc::new(LogBarrier::new(0.6).unwrap())).unwrap();
        let v = classify_model(&dyson).unwrap();
        assert!(v.iter().all(|f| f.classification.class == BoundaryClass::Strong));
        let rv = build_rost_vares(3, Arc::new(LogBarrier::new(0.25).unwrap())).unwrap();
        assert!(classify_model(&rv).unwrap().iter().all(|f| f.classification.class == BoundaryClass::Middle));

        let w = build_wishart_radii(2, 2.0).unwrap();
        let v = classify_model(&w).unwrap();
        assert_eq!(v.iter().filter(|f| f.classification.class == BoundaryClass::Weak).count(), 2);

        let rs = standard_root_system(Family::A, 2, &[0.3]).unwrap();
        let v = classify_model(&dunkl_model(&rs).unwrap()).unwrap();
        for f in &v {
            assert_eq!(f.classification.class, BoundaryClass::Middle);
            assert_eq!(f.reachable, f.role == FaceRole::SimpleRoot);
            assert_eq!(f.note.is_some(), f.role == FaceRole::NonSimpleRoot);
        }
    }

    #[test]
    fn approach_bound_matches_power_law() {
        // log barrier: p' = u^(-2 gamma), bound (eps / u0)^(2 gamma - 1)
        let p = LogBarrier::new(0.75).unwrap();
        let b = approach_probability_bound(&p, 0.5, 1e-3).unwrap();
        assert!((b - (1e-3f64 / 0.5).sqrt()).abs() < 1e-6, "{b}");
        let p = LogBarrier::new(1.5).unwrap();
        let b = approach_probability_bound(&p, 1.0, 1e-2).unwrap();
        assert!((b - 1e-4).abs() < 1e-9, "{b}");
        // no bound at or below the critical exponent
        assert_eq!(approach_probability_bound(&LogBarrier::new(0.5).unwrap(), 1.0, 1e-3).unwrap(), 1.0);
        assert_eq!(approach_probability_bound(&LogBarrier::new(0.25).unwrap(), 1.0, 1e-3).unwrap(), 1.0);
        assert_eq!(approach_probability_bound(&p, 1e-3, 1e-2).unwrap(), 1.0);
    }
}
