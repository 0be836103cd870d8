//! Ensembles of independent trajectories and the statistics drawn from them:
//! hit fractions with Wilson intervals, minimum-gap quantiles, local-time and
//! terminal moments, checked against analytic targets where one is known.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use statrs::statistics::{Data, OrderStatistics};

use crate::classifier::{self, BoundaryClass};
use crate::error::{Error, Result};
use crate::geometry::FaceSubset;
use crate::integrator::{self, SimConfig, Termination, Trajectory};
use crate::models::PolyhedralModel;
use crate::potentials::PotentialSpec;

/// Environment variable bounding the worker count.
pub const THREADS_ENV: &str = "CHAMBER_THREADS";
/// Report format version.
pub const REPORT_VERSION: u32 = 1;

/// Two-sided 95% normal quantile.
pub fn z95() -> f64 {
    Normal::standard().inverse_cdf(0.975)
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, stderr: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Self { mean, stderr: (var / n as f64).sqrt() }
    }
}

fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    Data::new(values.to_vec()).quantile(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceStats {
    pub face: usize,
    pub label: String,
    pub hits: u64,
    pub hit_fraction: f64,
    pub hit_ci95: (f64, f64),
    /// Hits with no other face within `hit_eps` at the hit step.
    pub exclusive_hits: u64,
    pub min_gap_q01: f64,
    pub min_gap_q50: f64,
    pub local_time: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetStats {
    pub faces: Vec<usize>,
    pub hits: u64,
    pub hit_fraction: f64,
    pub hit_ci95: (f64, f64),
    pub min_distance_q01: f64,
    pub min_distance_q50: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalMoments {
    /// `|X_T|^2`.
    pub squared_norm: Estimate,
    pub coordinate_mean: Vec<Estimate>,
    pub coordinate_second_moment: Vec<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationStats {
    pub level: f64,
    /// Mean over trajectories of the fraction of steps with smallest gap
    /// below `level`.
    pub fraction: Estimate,
}

/// Aggregate of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub format_version: u32,
    pub model: String,
    pub n: u64,
    pub config: SimConfig,
    pub faces: Vec<FaceStats>,
    pub subsets: Vec<SubsetStats>,
    pub terminal: TerminalMoments,
    pub occupation: Vec<OccupationStats>,
    pub singular_drift_sum: Estimate,
    pub escapes: u64,
    pub retries: u64,
    pub wall_clock_seconds: f64,
}

impl EnsembleReport {
    /// Aggregates per-trajectory results. The input order does not matter.
    pub fn from_trajectories(model: &PolyhedralModel, config: &SimConfig, trajectories: &[Trajectory]) -> Self {
        let mut trs: Vec<&Trajectory> = trajectories.iter().collect();
        trs.sort_by_key(|t| t.index);
        let n = trs.len() as u64;
        let z = z95();

        let faces = model
            .faces()
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let hits = trs.iter().filter(|t| t.first_hit[i].is_some()).count() as u64;
                let exclusive = trs.iter().filter(|t| t.first_hit[i].is_some_and(|h| h.exclusive)).count() as u64;
                let mins: Vec<f64> = trs.iter().map(|t| t.min_gap[i]).collect();
                let lts: Vec<f64> = trs.iter().map(|t| t.local_time[i]).collect();
                FaceStats {
                    face: i,
                    label: f.label.clone(),
                    hits,
                    hit_fraction: hits as f64 / n.max(1) as f64,
                    hit_ci95: wilson_interval(hits, n, z),
                    exclusive_hits: exclusive,
                    min_gap_q01: quantile(&mins, 0.01),
                    min_gap_q50: quantile(&mins, 0.5),
                    local_time: Estimate::of(&lts),
                }
            })
            .collect();

        let subsets = model
            .monitored_subsets()
            .iter()
            .enumerate()
            .map(|(s, j)| {
                let hits = trs.iter().filter(|t| t.subset_first_hit[s].is_some()).count() as u64;
                let mins: Vec<f64> = trs.iter().map(|t| t.subset_min_distance[s]).collect();
                SubsetStats {
                    faces: j.indices().to_vec(),
                    hits,
                    hit_fraction: hits as f64 / n.max(1) as f64,
                    hit_ci95: wilson_interval(hits, n, z),
                    min_distance_q01: quantile(&mins, 0.01),
                    min_distance_q50: quantile(&mins, 0.5),
                }
            })
            .collect();

        let d = model.dimension();
        let sq: Vec<f64> = trs.iter().map(|t| t.final_state.iter().map(|v| v * v).sum()).collect();
        let coordinate_mean = (0..d)
            .map(|k| Estimate::of(&trs.iter().map(|t| t.final_state[k]).collect::<Vec<_>>()))
            .collect();
        let coordinate_second_moment = (0..d)
            .map(|k| Estimate::of(&trs.iter().map(|t| t.final_state[k].powi(2)).collect::<Vec<_>>()))
            .collect();

        let occupation = config
            .occupation_levels
            .iter()
            .enumerate()
            .map(|(k, &level)| OccupationStats {
                level,
                fraction: Estimate::of(&trs.iter().map(|t| t.occupation_fraction(k)).collect::<Vec<_>>()),
            })
            .collect();

        Self {
            format_version: REPORT_VERSION,
            model: model.name().to_string(),
            n,
            config: config.clone(),
            faces,
            subsets,
            terminal: TerminalMoments { squared_norm: Estimate::of(&sq), coordinate_mean, coordinate_second_moment },
            occupation,
            singular_drift_sum: Estimate::of(&trs.iter().map(|t| t.singular_drift_sum).collect::<Vec<_>>()),
            escapes: trs.iter().filter(|t| t.termination == Termination::Escape).count() as u64,
            retries: trs.iter().map(|t| t.retries).sum(),
            wall_clock_seconds: 0.0,
        }
    }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn configured_threads() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

fn in_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match configured_threads().and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Simulates trajectories `0..n` without intermediate records. Fails with the
/// lowest failing index, so a failure can be replayed.
pub fn run_trajectories(model: &PolyhedralModel, config: &SimConfig, n: u64) -> Result<Vec<Trajectory>> {
    if n == 0 {
        return Err(Error::InvalidParameter("ensemble size must be at least 1".into()));
    }
    config.validate()?;
    let mut cfg = config.clone();
    cfg.record_stride = 0;
    let results: Vec<Result<Trajectory>> =
        in_pool(|| (0..n).into_par_iter().map(|i| integrator::simulate_indexed(model, &cfg, i)).collect());
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Trajectory { index: i as u64, seed: config.seed, source: Box::new(e) })
        })
        .collect()
}

/// Runs `n` trajectories and aggregates them.
pub fn run_ensemble(model: &PolyhedralModel, config: &SimConfig, n: u64) -> Result<EnsembleReport> {
    let start = Instant::now();
    let trs = run_trajectories(model, config, n)?;
    let mut report = EnsembleReport::from_trajectories(model, config, &trs);
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Fraction of trajectories whose minimum gap on `face` reached `eps`.
pub fn hit_fraction_at(trajectories: &[Trajectory], face: usize, eps: f64) -> f64 {
    let hits = trajectories.iter().filter(|t| t.min_gap[face] <= eps).count();
    hits as f64 / trajectories.len().max(1) as f64
}

/// Result of [`edge_watch`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeWatch {
    pub faces: Vec<usize>,
    pub edge_eps: f64,
    pub n: u64,
    pub hits: u64,
    pub hit_fraction: f64,
    pub hit_ci95: (f64, f64),
    pub min_distance_q01: f64,
    pub min_distance_q50: f64,
    pub min_distance_min: f64,
    /// Hit fraction at `hit_eps` of every face in the subset.
    pub face_hit_fractions: Vec<f64>,
    /// Fraction of trajectories that came within `edge_eps` of each single
    /// face, for comparison with the edge at the same threshold.
    pub face_fractions_at_edge_eps: Vec<f64>,
}

/// Watches the intersection `H_J` of the hyperplanes of `subset`.
pub fn edge_watch(model: &PolyhedralModel, config: &SimConfig, n: u64, subset: &FaceSubset) -> Result<EdgeWatch> {
    if subset.len() < 2 {
        return Err(Error::InvalidParameter("an edge needs at least two faces".into()));
    }
    let watched = model.clone().with_monitored_subsets(vec![subset.clone()])?;
    let trs = run_trajectories(&watched, config, n)?;
    let hits = trs.iter().filter(|t| t.subset_first_hit[0].is_some()).count() as u64;
    let mins: Vec<f64> = trs.iter().map(|t| t.subset_min_distance[0]).collect();
    Ok(EdgeWatch {
        faces: subset.indices().to_vec(),
        edge_eps: config.edge_eps,
        n,
        hits,
        hit_fraction: hits as f64 / n as f64,
        hit_ci95: wilson_interval(hits, n, z95()),
        min_distance_q01: quantile(&mins, 0.01),
        min_distance_q50: quantile(&mins, 0.5),
        min_distance_min: mins.iter().copied().fold(f64::INFINITY, f64::min),
        face_hit_fractions: subset
            .indices()
            .iter()
            .map(|&i| trs.iter().filter(|t| t.first_hit[i].is_some()).count() as f64 / n as f64)
            .collect(),
        face_fractions_at_edge_eps: subset
            .indices()
            .iter()
            .map(|&i| hit_fraction_at(&trs, i, config.edge_eps))
            .collect(),
    })
}

/// Scalar functionals of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum Observable {
    /// `|X_T|^2`.
    SquaredNorm,
    /// `X_T^k`.
    Coordinate(usize),
    /// `L_T` of one face.
    LocalTime(usize),
    /// Sum of local times over faces.
    TotalLocalTime,
}

impl Observable {
    pub fn evaluate(&self, t: &Trajectory) -> f64 {
        match *self {
            Observable::SquaredNorm => t.final_state.iter().map(|v| v * v).sum(),
            Observable::Coordinate(k) => t.final_state[k],
            Observable::LocalTime(i) => t.local_time[i],
            Observable::TotalLocalTime => t.local_time.iter().sum(),
        }
    }
}

/// Exact expectations known in closed form for the half-line model
/// `dX = dB + gamma / X dt (+ dL)` started at `x0` (`gamma = 0` is reflected
/// Brownian motion):
///
/// * `E X_T^2 = x0^2 + (2 gamma + 1) T`,
/// * `E L_T = 2 (sqrt(T) pdf(x0 / sqrt T) - x0 (1 - cdf(x0 / sqrt T)))` for
///   `gamma = 0`.
pub fn analytic_target(model: &PolyhedralModel, config: &SimConfig, obs: Observable) -> Option<f64> {
    if model.dimension() != 1 || model.num_faces() != 1 || config.escape_radius.is_some() {
        return None;
    }
    let f = &model.faces()[0];
    if f.normal[0] != 1.0 || f.offset != 0.0 {
        return None;
    }
    let gamma = match model.potential(0).spec()? {
        PotentialSpec::Zero => 0.0,
        PotentialSpec::Log { gamma } => gamma,
        _ => return None,
    };
    let x0 = model.initial_point()[0];
    let t = config.horizon;
    match obs {
        Observable::SquaredNorm => Some(x0 * x0 + (2.0 * gamma + 1.0) * t),
        Observable::LocalTime(0) | Observable::TotalLocalTime if gamma == 0.0 => {
            if t == 0.0 {
                return Some(0.0);
            }
            let s = t.sqrt();
            let nrm = Normal::standard();
            Some(2.0 * (s * nrm.pdf(x0 / s) - x0 * (1.0 - nrm.cdf(x0 / s))))
        }
        Observable::LocalTime(_) | Observable::TotalLocalTime if gamma > 0.0 => Some(0.0),
        _ => None,
    }
}

/// Result of [`moment_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub observable: Observable,
    pub n: u64,
    pub estimate: Estimate,
    pub target: Option<f64>,
    /// `(estimate - target) / stderr`.
    pub z_score: Option<f64>,
}

impl MomentCheck {
    /// `|z| <= limit`, or no target to compare with.
    pub fn passes(&self, limit: f64) -> bool {
        self.z_score.is_none_or(|z| z.abs() <= limit)
    }
}

/// Ensemble estimate of `E obs` and its z-score against the registered
/// target, if any.
pub fn moment_check(model: &PolyhedralModel, config: &SimConfig, n: u64, obs: Observable) -> Result<MomentCheck> {
    let trs = run_trajectories(model, config, n)?;
    Ok(moment_check_from(model, config, &trs, obs))
}

/// [`moment_check`] on already simulated trajectories.
pub fn moment_check_from(model: &PolyhedralModel, config: &SimConfig, trs: &[Trajectory], obs: Observable) -> MomentCheck {
    let vals: Vec<f64> = trs.iter().map(|t| obs.evaluate(t)).collect();
    let estimate = Estimate::of(&vals);
    let target = analytic_target(model, config, obs);
    let z_score = target.map(|tg| {
        let diff = estimate.mean - tg;
        if estimate.stderr > 0.0 {
            diff / estimate.stderr
        } else if diff.abs() <= 1e-12 * (1.0 + tg.abs()) {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    });
    MomentCheck { observable: obs, n: trs.len() as u64, estimate, target, z_score }
}

/// Empirical behaviour of a face against its predicted class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictLine {
    pub face: usize,
    pub label: String,
    pub class: BoundaryClass,
    pub predicted_reachable: bool,
    pub hit_fraction: f64,
    pub min_gap_q01: f64,
    /// For unreachable faces, the largest hit fraction compatible with the
    /// face never being reached (see [`verdicts`]).
    pub hit_bound: Option<f64>,
    pub consistent: bool,
    pub note: Option<String>,
}

impl VerdictLine {
    pub fn word(&self) -> &'static str {
        if self.consistent {
            "CONSISTENT"
        } else {
            "INCONSISTENT"
        }
    }
}

/// Compares every face with its prediction.
///
/// A reachable face is consistent when at least one trajectory hit it. An
/// unreachable face can still be approached to within `hit_eps`; it is
/// consistent unless the hit fraction is significantly (95% Wilson lower
/// limit) above the one-dimensional scale-function bound on coming down from
/// the initial gap to `hit_eps`. Faces declared unreachable against their
/// one-dimensional class (non-simple roots) have no such bound and must show
/// no hits at all.
pub fn verdicts(model: &PolyhedralModel, report: &EnsembleReport) -> Result<Vec<VerdictLine>> {
    let preds = classifier::classify_model(model)?;
    let x0 = model.initial_point();
    preds
        .into_iter()
        .zip(&report.faces)
        .map(|(p, s)| {
            let hit_bound = if p.reachable {
                None
            } else if p.classification.class.reachable() {
                Some(0.0)
            } else {
                let u0 = model.faces()[p.face].gap(x0);
                Some(classifier::approach_probability_bound(model.potential(p.face), u0, report.config.hit_eps)?)
            };
            let consistent = match hit_bound {
                None => s.hits > 0,
                Some(b) => s.hits == 0 || wilson_interval(s.hits, report.n, z95()).0 <= b,
            };
            Ok(VerdictLine {
                face: p.face,
                label: p.label,
                class: p.classification.class,
                predicted_reachable: p.reachable,
                hit_fraction: s.hit_fraction,
                min_gap_q01: s.min_gap_q01,
                hit_bound,
                consistent,
                note: p.note,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Face, PolyhedralDomain};
    use crate::potentials::{LogBarrier, SharedPotential, Zero};
    use std::sync::Arc;

    fn half_line(p: SharedPotential, x0: f64) -> PolyhedralModel {
        let dom = PolyhedralDomain::new(1, vec![Face::new(vec![1.0], 0.0, 0, "wall")]).unwrap();
        PolyhedralModel::new("half-line", dom, vec![p], vec![x0], vec![]).unwrap()
    }

    #[test]
    fn wilson_behaves_at_the_ends() {
        let (lo, hi) = wilson_interval(0, 500, z95());
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.01);
        let (lo, hi) = wilson_interval(500, 500, z95());
        assert!(lo > 0.99 && lo < 1.0);
        assert_eq!(hi, 1.0);
        let (lo, hi) = wilson_interval(37, 100, z95());
        assert!(lo < 0.37 && 0.37 < hi);
    }

    #[test]
    fn zero_horizon_ensemble() {
        let m = half_line(Arc::new(LogBarrier::new(0.75).unwrap()), 0.5);
        let cfg = SimConfig::new(1e-3, 0.0, 7);
        let rep = run_ensemble(&m, &cfg, 100).unwrap();
        assert_eq!(rep.n, 100);
        assert_eq!(rep.faces[0].hits, 0);
        assert_eq!(rep.faces[0].min_gap_q01, 0.5);
        let mc = moment_check(&m, &cfg, 10, Observable::SquaredNorm).unwrap();
        assert_eq!(mc.estimate.mean, 0.25);
        assert_eq!(mc.estimate.stderr, 0.0);
        assert_eq!(mc.z_score, Some(0.0));
    }

    #[test]
    fn empty_ensemble_is_rejected() {
        let m = half_line(Arc::new(Zero), 1.0);
        assert!(run_ensemble(&m, &SimConfig::new(1e-3, 1.0, 1), 0).is_err());
    }

    #[test]
    fn report_ignores_completion_order() {
        let m = half_line(Arc::new(LogBarrier::new(0.25).unwrap()), 0.5);
        let cfg = SimConfig::new(1e-3, 0.5, 11);
        let trs = run_trajectories(&m, &cfg, 40).unwrap();
        let a = EnsembleReport::from_trajectories(&m, &cfg, &trs);
        let mut shuffled = trs.clone();
        shuffled.reverse();
        shuffled.swap(3, 17);
        let b = EnsembleReport::from_trajectories(&m, &cfg, &shuffled);
        assert_eq!(a, b);
    }

    #[test]
    fn hit_fraction_is_monotone_in_eps() {
        let m = half_line(Arc::new(LogBarrier::new(0.25).unwrap()), 0.5);
        let trs = run_trajectories(&m, &SimConfig::new(1e-3, 1.0, 2), 200).unwrap();
        let eps = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4];
        let fr: Vec<f64> = eps.iter().map(|&e| hit_fraction_at(&trs, 0, e)).collect();
        assert!(fr.windows(2).all(|w| w[1] <= w[0]), "{fr:?}");
    }

    #[test]
    fn edge_watch_rejects_empty_intersection() {
        let dom = PolyhedralDomain::new(
            1,
            vec![Face::new(vec![1.0], 0.0, 0, "lo"), Face::new(vec![-1.0], -1.0, 0, "hi")],
        )
        .unwrap();
        let m = PolyhedralModel::new("slab", dom, vec![Arc::new(Zero)], vec![0.5], vec![]).unwrap();
        let j = FaceSubset::new(vec![0, 1], 2).unwrap();
        assert!(matches!(
            edge_watch(&m, &SimConfig::new(1e-3, 0.1, 1), 10, &j),
            Err(Error::EmptyIntersection { .. })
        ));
    }

    #[test]
    fn targets() {
        let m = half_line(Arc::new(LogBarrier::new(1.5).unwrap()), 1.0);
        let cfg = SimConfig::new(1e-3, 1.0, 1);
        assert_eq!(analytic_target(&m, &cfg, Observable::SquaredNorm), Some(5.0));
        let m = half_line(Arc::new(Zero), 1e-9);
        let lt = analytic_target(&m, &cfg, Observable::LocalTime(0)).unwrap();
        assert!((lt - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-8);
        assert_eq!(analytic_target(&m, &cfg, Observable::Coordinate(0)), None);
    }
}
