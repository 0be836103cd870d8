//! Time stepping for `dX = dB - grad Phi(X) dt + n dL` on a polyhedral model.
//!
//! The default scheme is the proximal (backward) Euler step
//! `X' = argmin_{y in closure(D)} |y - (X + dB)|^2 / 2 + dt Phi(y)`,
//! which keeps every state feasible and produces the reflection multipliers
//! that make up the local time. An explicit projected Euler step is kept as a
//! cross-check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SubsetProjector;
use crate::linalg::{dot, norm};
use crate::models::PolyhedralModel;
use crate::potentials::{self, BarrierPotential};

/// Sweeps of the block-coordinate prox solver before a step counts as
/// stalled.
pub const MAX_SWEEPS: usize = 20_000;
/// Times a stalled step is split in two before giving up.
pub const MAX_RETRY_DEPTH: u32 = 8;
/// Drift cap of the explicit scheme, in units of `1/sqrt(dt)`.
pub const DRIFT_CLAMP: f64 = 10.0;
/// A step starting within `REFINE_LAYER * sqrt(h)` of a repelling wall is
/// split in two (see [`SimConfig::boundary_refinement`]).
pub const REFINE_LAYER: f64 = 4.0;
/// Substeps stop shrinking once `sqrt(h) <= hit_eps / REFINE_RESOLUTION`.
pub const REFINE_RESOLUTION: f64 = 8.0;
/// Hard cap on the refinement depth.
pub const MAX_REFINE_DEPTH: u32 = 24;
const SWEEP_TOL: f64 = 1e-14;
const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    ProxEuler,
    ProjectedEuler,
}

fn default_hit_eps() -> f64 {
    1e-3
}

fn default_edge_eps() -> f64 {
    1e-2
}

fn default_stride() -> u64 {
    1
}

fn default_levels() -> Vec<f64> {
    vec![1e-2, 1e-3]
}

fn default_true() -> bool {
    true
}

/// Simulation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    #[serde(default)]
    pub scheme: Scheme,
    /// A face counts as hit once its gap is `<= hit_eps`.
    #[serde(default = "default_hit_eps")]
    pub hit_eps: f64,
    /// A monitored subset counts as hit once the distance to the
    /// intersection of its hyperplanes is `<= edge_eps`.
    #[serde(default = "default_edge_eps")]
    pub edge_eps: f64,
    /// Stop once `|x| >= escape_radius`.
    #[serde(default)]
    pub escape_radius: Option<f64>,
    /// Keep every `record_stride`-th step; 0 keeps only the first and last.
    #[serde(default = "default_stride")]
    pub record_stride: u64,
    /// Thresholds for the boundary occupation counts.
    #[serde(default = "default_levels")]
    pub occupation_levels: Vec<f64>,
    /// Halve steps (through Brownian bridge draws) while the state is in a
    /// thin layer next to a wall with a singular potential. Without this an
    /// implicit step of size `dt` cannot bring a log-barrier gap much below
    /// `sqrt(gamma dt)`, so hits at `hit_eps` below that go unseen.
    #[serde(default = "default_true")]
    pub boundary_refinement: bool,
}

impl SimConfig {
    pub fn new(dt: f64, horizon: f64, seed: u64) -> Self {
        Self {
            dt,
            horizon,
            seed,
            scheme: Scheme::ProxEuler,
            hit_eps: default_hit_eps(),
            edge_eps: default_edge_eps(),
            escape_radius: None,
            record_stride: default_stride(),
            occupation_levels: default_levels(),
            boundary_refinement: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return bad(format!("horizon must be >= 0, got {}", self.horizon));
        }
        if !(self.hit_eps > 0.0) {
            return bad(format!("hit_eps must be positive, got {}", self.hit_eps));
        }
        if !(self.edge_eps > 0.0) {
            return bad(format!("edge_eps must be positive, got {}", self.edge_eps));
        }
        if let Some(r) = self.escape_radius {
            if !(r > 0.0) {
                return bad(format!("escape_radius must be positive, got {r}"));
            }
        }
        if self.occupation_levels.iter().any(|e| !(*e > 0.0)) {
            return bad("occupation levels must be positive".into());
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on the horizon.
    pub fn num_steps(&self) -> u64 {
        if self.horizon == 0.0 {
            0
        } else {
            ((self.horizon / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as u64
        }
    }

    fn time(&self, step: u64) -> f64 {
        (step as f64 * self.dt).min(self.horizon)
    }
}

/// Counter-keyed generator for step `step` of trajectory `index`. Streams for
/// different keys are independent, so trajectories can run in any order.
pub fn step_rng(seed: u64, index: u64, step: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    key[16..24].copy_from_slice(&step.to_le_bytes());
    key[24..].copy_from_slice(b"dB-steps");
    ChaCha8Rng::from_seed(key)
}

fn gaussian_vec<R: Rng>(rng: &mut R, d: usize, sd: f64) -> Vec<f64> {
    (0..d).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// One step's result.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub x: Vec<f64>,
    /// Reflection mass per face, `>= 0`.
    pub multipliers: Vec<f64>,
    /// Block-coordinate sweeps used (0 for the explicit scheme).
    pub sweeps: usize,
}

/// Proximal Euler step from `x` with Brownian increment `db`.
///
/// Solved by cyclic coordinate ascent on the dual: `y = z + sum_i mu_i n_i`
/// with `z = x + db`, each block a one-dimensional prox along `n_i`.
pub fn prox_step(model: &PolyhedralModel, x: &[f64], db: &[f64], dt: f64) -> Result<StepOutput> {
    let d = model.dimension();
    if x.len() != d || db.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: if x.len() != d { x.len() } else { db.len() } });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let faces = model.faces();
    let m = faces.len();
    let z: Vec<f64> = x.iter().zip(db).map(|(a, b)| a + b).collect();
    let scale = 1.0 + z.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    let mut y = z.clone();
    let mut mu = vec![0.0; m];
    let mut lambda = vec![0.0; m];
    let mut block_y = vec![0.0; m];
    let pots: Vec<&dyn BarrierPotential> = (0..m).map(|i| model.potential(i)).collect();

    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut change = 0.0_f64;
        for (i, f) in faces.iter().enumerate() {
            let s = dot(&f.normal, &y) - f.offset - mu[i];
            let r = potentials::prox1d(pots[i], s, dt)?;
            let new_mu = r.y - s;
            let delta = new_mu - mu[i];
            if delta != 0.0 {
                for (yk, nk) in y.iter_mut().zip(&f.normal) {
                    *yk += delta * nk;
                }
            }
            change = change.max(delta.abs());
            mu[i] = new_mu;
            lambda[i] = r.multiplier;
            block_y[i] = r.y;
        }
        if change <= SWEEP_TOL * scale || m <= 1 {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NonConvergence { what: "prox step", iterations: sweeps });
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence { what: "prox step", iterations: sweeps });
    }
    let inconsistency = faces
        .iter()
        .zip(&block_y)
        .map(|(f, by)| (f.gap(&y) - by).abs())
        .fold(0.0, f64::max);
    if inconsistency > CONSISTENCY_TOL * scale {
        return Err(Error::NonConvergence { what: "prox step", iterations: sweeps });
    }
    Ok(StepOutput { x: y, multipliers: lambda, sweeps })
}

/// Explicit Euler step followed by Euclidean projection onto the closed
/// domain. The drift is evaluated with gaps floored away from 0 and capped
/// at `DRIFT_CLAMP / sqrt(dt)` in norm.
pub fn projected_euler_step(model: &PolyhedralModel, x: &[f64], db: &[f64], dt: f64) -> Result<StepOutput> {
    let d = model.dimension();
    if x.len() != d || db.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: if x.len() != d { x.len() } else { db.len() } });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let mut grad = vec![0.0; d];
    for (i, f) in model.faces().iter().enumerate() {
        let p = model.potential(i);
        let u = f.gap(x).max(f64::MIN_POSITIVE).min(p.domain_end() * (1.0 - 1e-15));
        let dphi = p.derivative(u);
        for (g, n) in grad.iter_mut().zip(&f.normal) {
            *g += dphi * n;
        }
    }
    let gn = norm(&grad);
    let cap = DRIFT_CLAMP / dt.sqrt();
    let shrink = if gn > cap { cap / gn } else { 1.0 };
    let w: Vec<f64> = (0..d).map(|k| x[k] + db[k] - dt * shrink * grad[k]).collect();
    let p = model.domain().project(&w)?;
    Ok(StepOutput { x: p.point, multipliers: p.multipliers, sweeps: 0 })
}

/// Dispatches on `scheme`.
pub fn step(model: &PolyhedralModel, scheme: Scheme, x: &[f64], db: &[f64], dt: f64) -> Result<StepOutput> {
    match scheme {
        Scheme::ProxEuler => prox_step(model, x, db, dt),
        Scheme::ProjectedEuler => projected_euler_step(model, x, db, dt),
    }
}

struct Advance<'a, R> {
    model: &'a PolyhedralModel,
    scheme: Scheme,
    rng: &'a mut R,
    /// Smallest substep refinement may produce; infinite disables it.
    h_min: f64,
    retries: u64,
    refined: bool,
    /// Intermediate states `(time offset, x)` of a split step.
    trail: Vec<(f64, Vec<f64>)>,
}

impl<R: Rng> Advance<'_, R> {
    fn near_repelling_wall(&self, x: &[f64], h: f64) -> bool {
        let layer = REFINE_LAYER * h.sqrt();
        self.model
            .faces()
            .iter()
            .enumerate()
            .any(|(i, f)| f.gap(x) < layer && self.model.potential(i).value_at_zero().is_infinite())
    }

    /// One step of length `h`, split through Brownian bridge draws while the
    /// state sits in the boundary layer, or when the solver stalls.
    fn run(&mut self, x: &[f64], db: &[f64], h: f64, offset: f64, depth: u32, retry: u32) -> Result<StepOutput> {
        let refine = depth < MAX_REFINE_DEPTH && h > self.h_min && self.near_repelling_wall(x, h);
        if !refine {
            match step(self.model, self.scheme, x, db, h) {
                Err(Error::NonConvergence { .. }) if retry < MAX_RETRY_DEPTH => {
                    self.retries += 1;
                    return self.split(x, db, h, offset, depth, retry + 1);
                }
                other => return other,
            }
        }
        self.refined = true;
        self.split(x, db, h, offset, depth + 1, retry)
    }

    fn split(&mut self, x: &[f64], db: &[f64], h: f64, offset: f64, depth: u32, retry: u32) -> Result<StepOutput> {
        let half = 0.5 * h;
        let bridge = gaussian_vec(self.rng, db.len(), 0.5 * h.sqrt());
        let db1: Vec<f64> = db.iter().zip(&bridge).map(|(b, e)| 0.5 * b + e).collect();
        let db2: Vec<f64> = db.iter().zip(&db1).map(|(b, b1)| b - b1).collect();
        let first = self.run(x, &db1, half, offset, depth, retry)?;
        self.trail.push((offset + half, first.x.clone()));
        let second = self.run(&first.x, &db2, half, offset + half, depth, retry)?;
        let multipliers = first.multipliers.iter().zip(&second.multipliers).map(|(a, b)| a + b).collect();
        Ok(StepOutput { x: second.x, multipliers, sweeps: first.sweeps.max(second.sweeps) })
    }
}

/// A recorded state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub t: f64,
    pub x: Vec<f64>,
    pub gaps: Vec<f64>,
    /// Brownian increment that led to this state (zero for the initial one).
    pub db: Vec<f64>,
    pub local_time_increments: Vec<f64>,
    /// Cumulative local time per face.
    pub local_time: Vec<f64>,
    /// `|grad Phi|` at the state.
    pub drift_magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Horizon,
    Escape,
}

/// First time a face's gap fell to `hit_eps` or below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceHit {
    pub t: f64,
    pub step: u64,
    /// No other face was within `hit_eps` at that step.
    pub exclusive: bool,
}

/// Path plus running statistics. Statistics cover every step, records only
/// the thinned ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub index: u64,
    pub records: Vec<StepRecord>,
    pub steps: u64,
    pub final_time: f64,
    pub final_state: Vec<f64>,
    pub termination: Termination,
    pub min_gap: Vec<f64>,
    pub local_time: Vec<f64>,
    pub first_hit: Vec<Option<FaceHit>>,
    pub subset_min_distance: Vec<f64>,
    pub subset_first_hit: Vec<Option<f64>>,
    /// `sum dt |phi_i'(gap_i)|` over steps and faces.
    pub singular_drift_sum: f64,
    /// Per occupation level, number of steps whose smallest gap was below it.
    pub occupation_counts: Vec<u64>,
    /// Number of split-step retries.
    pub retries: u64,
    /// Steps that were subdivided near a repelling wall.
    pub refined_steps: u64,
    pub max_sweeps: usize,
}

impl Trajectory {
    /// Fraction of steps whose smallest gap was below `occupation_levels[k]`.
    pub fn occupation_fraction(&self, k: usize) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.occupation_counts[k] as f64 / self.steps as f64
        }
    }
}

/// `(|grad Phi(x)|, sum_i |phi_i'(gap_i)|)` with one-sided limits on faces
/// the state sits on.
fn drift_terms(model: &PolyhedralModel, x: &[f64], gaps: &[f64]) -> (f64, f64) {
    let mut grad = vec![0.0; x.len()];
    let mut total = 0.0;
    for (i, f) in model.faces().iter().enumerate() {
        let p = model.potential(i);
        let dphi = if gaps[i] > 0.0 && gaps[i] < p.domain_end() {
            p.derivative(gaps[i])
        } else if gaps[i] <= 0.0 {
            p.derivative_limit_at_zero()
        } else {
            f64::INFINITY
        };
        if !dphi.is_finite() {
            continue;
        }
        total += dphi.abs();
        for (g, n) in grad.iter_mut().zip(&f.normal) {
            *g += dphi * n;
        }
    }
    (norm(&grad), total)
}

/// Simulates trajectory 0 of `config.seed`.
pub fn simulate(model: &PolyhedralModel, config: &SimConfig) -> Result<Trajectory> {
    simulate_indexed(model, config, 0)
}

/// Simulates trajectory `index`; its increments depend only on
/// `(config.seed, index)`.
pub fn simulate_indexed(model: &PolyhedralModel, config: &SimConfig, index: u64) -> Result<Trajectory> {
    config.validate()?;
    let d = model.dimension();
    let m = model.num_faces();
    let faces = model.faces();
    let projectors: Vec<SubsetProjector> = model
        .monitored_subsets()
        .iter()
        .map(|j| model.domain().subset_projector(j))
        .collect::<Result<_>>()?;

    let mut x = model.initial_point().to_vec();
    let mut gaps: Vec<f64> = faces.iter().map(|f| f.gap(&x)).collect();
    let mut local_time = vec![0.0; m];
    let mut min_gap = gaps.clone();
    let mut first_hit: Vec<Option<FaceHit>> = vec![None; m];
    let mut subset_min: Vec<f64> = projectors.iter().map(|p| p.distance(&x)).collect();
    let mut subset_hit: Vec<Option<f64>> =
        subset_min.iter().map(|&v| if v <= config.edge_eps { Some(0.0) } else { None }).collect();
    register_hits(&gaps, config.hit_eps, 0.0, 0, &mut first_hit);

    let mut records = Vec::new();
    let (dm, _) = drift_terms(model, &x, &gaps);
    records.push(StepRecord {
        step: 0,
        t: 0.0,
        x: x.clone(),
        gaps: gaps.clone(),
        db: vec![0.0; d],
        local_time_increments: vec![0.0; m],
        local_time: local_time.clone(),
        drift_magnitude: dm,
    });

    let n_steps = config.num_steps();
    let mut termination = Termination::Horizon;
    let mut steps_done = 0;
    let mut t = 0.0;
    let mut singular_sum = 0.0;
    let mut occupation = vec![0u64; config.occupation_levels.len()];
    let mut retries = 0;
    let mut refined_steps = 0;
    let mut max_sweeps = 0;
    let h_min = if config.boundary_refinement { (config.hit_eps / REFINE_RESOLUTION).powi(2) } else { f64::INFINITY };

    if config.escape_radius.is_some_and(|r| norm(&x) >= r) {
        termination = Termination::Escape;
    } else {
        for k in 1..=n_steps {
            let t_next = config.time(k);
            let h = t_next - config.time(k - 1);
            let mut rng = step_rng(config.seed, index, k);
            let db = gaussian_vec(&mut rng, d, h.sqrt());
            let mut adv = Advance {
                model,
                scheme: config.scheme,
                rng: &mut rng,
                h_min,
                retries: 0,
                refined: false,
                trail: Vec::new(),
            };
            let out = adv.run(&x, &db, h, 0.0, 0, 0)?;
            retries += adv.retries;
            refined_steps += u64::from(adv.refined);
            if out.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { step: k });
            }
            // substates of a split step count for hits and closest approaches
            for (dt_off, xs) in &adv.trail {
                let ts = t + dt_off;
                for (g, f) in gaps.iter_mut().zip(faces) {
                    *g = f.gap(xs);
                }
                for i in 0..m {
                    min_gap[i] = min_gap[i].min(gaps[i]);
                }
                register_hits(&gaps, config.hit_eps, ts, k, &mut first_hit);
                watch_subsets(&projectors, xs, ts, config.edge_eps, &mut subset_min, &mut subset_hit);
            }
            x = out.x;
            t = t_next;
            steps_done = k;
            max_sweeps = max_sweeps.max(out.sweeps);
            for (g, f) in gaps.iter_mut().zip(faces) {
                *g = f.gap(&x);
            }
            for i in 0..m {
                local_time[i] += out.multipliers[i];
                min_gap[i] = min_gap[i].min(gaps[i]);
            }
            register_hits(&gaps, config.hit_eps, t, k, &mut first_hit);
            watch_subsets(&projectors, &x, t, config.edge_eps, &mut subset_min, &mut subset_hit);
            let smallest = gaps.iter().copied().fold(f64::INFINITY, f64::min);
            for (c, lev) in occupation.iter_mut().zip(&config.occupation_levels) {
                if smallest < *lev {
                    *c += 1;
                }
            }
            let (dm, dsum) = drift_terms(model, &x, &gaps);
            singular_sum += h * dsum;

            let escaped = config.escape_radius.is_some_and(|r| norm(&x) >= r);
            let keep = k == n_steps || escaped || (config.record_stride > 0 && k % config.record_stride == 0);
            if keep {
                records.push(StepRecord {
                    step: k,
                    t,
                    x: x.clone(),
                    gaps: gaps.clone(),
                    db,
                    local_time_increments: out.multipliers,
                    local_time: local_time.clone(),
                    drift_magnitude: dm,
                });
            }
            if escaped {
                termination = Termination::Escape;
                break;
            }
        }
    }

    Ok(Trajectory {
        index,
        records,
        steps: steps_done,
        final_time: t,
        final_state: x,
        termination,
        min_gap,
        local_time,
        first_hit,
        subset_min_distance: subset_min,
        subset_first_hit: subset_hit,
        singular_drift_sum: singular_sum,
        occupation_counts: occupation,
        retries,
        refined_steps,
        max_sweeps,
    })
}

fn watch_subsets(
    projectors: &[SubsetProjector],
    x: &[f64],
    t: f64,
    edge_eps: f64,
    subset_min: &mut [f64],
    subset_hit: &mut [Option<f64>],
) {
    for (s, p) in projectors.iter().enumerate() {
        if p.max_abs_gap(x) < subset_min[s] {
            let dist = p.distance(x);
            if dist < subset_min[s] {
                subset_min[s] = dist;
            }
            if dist <= edge_eps && subset_hit[s].is_none() {
                subset_hit[s] = Some(t);
            }
        }
    }
}

fn register_hits(gaps: &[f64], eps: f64, t: f64, step: u64, first_hit: &mut [Option<FaceHit>]) {
    let active = gaps.iter().filter(|&&g| g <= eps).count();
    for (i, &g) in gaps.iter().enumerate() {
        if g <= eps && first_hit[i].is_none() {
            first_hit[i] = Some(FaceHit { t, step, exclusive: active == 1 });
        }
    }
}
