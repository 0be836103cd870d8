//! The model zoo: interacting-particle systems written as a polyhedral domain
//! plus one barrier potential per face.
//!
//! Every model is `dX = dB - grad Phi(X) dt + n dL` with
//! `Phi(x) = sum_i phi_i(x . n_i - a_i)`; the builders below only decide the
//! faces, potentials and a canonical starting point.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Face, FaceSubset, PolyhedralDomain};
use crate::linalg;
use crate::potentials::{
    self, BarrierPotential, HyperbolicLogSinh, LogBarrier, PotentialSpec, Scaled, SharedPotential, TrigLogSin,
    Zero,
};
use crate::rootsys::{self, Family};

/// Smallest gap allowed at the initial point.
pub const MIN_INITIAL_GAP: f64 = 1e-9;

/// What a face stands for in its model. Only used for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceRole {
    Wall,
    /// Wall of a Weyl chamber orthogonal to a simple root.
    SimpleRoot,
    /// Wall orthogonal to a positive but non-simple root. It only meets the
    /// closed chamber inside an intersection of simple walls.
    NonSimpleRoot,
    /// Far side of a periodic interaction.
    WrapAround,
}

/// Domain, per-face potentials and starting point.
#[derive(Debug, Clone)]
pub struct PolyhedralModel {
    name: String,
    domain: PolyhedralDomain,
    potentials: Vec<SharedPotential>,
    initial_point: Vec<f64>,
    monitored_subsets: Vec<FaceSubset>,
    roles: Vec<FaceRole>,
}

impl PolyhedralModel {
    pub fn new(
        name: impl Into<String>,
        domain: PolyhedralDomain,
        potentials: Vec<SharedPotential>,
        initial_point: Vec<f64>,
        monitored_subsets: Vec<FaceSubset>,
    ) -> Result<Self> {
        let roles = vec![FaceRole::Wall; domain.num_faces()];
        Self::with_roles(name, domain, potentials, initial_point, monitored_subsets, roles)
    }

    pub fn with_roles(
        name: impl Into<String>,
        domain: PolyhedralDomain,
        potentials: Vec<SharedPotential>,
        initial_point: Vec<f64>,
        monitored_subsets: Vec<FaceSubset>,
        roles: Vec<FaceRole>,
    ) -> Result<Self> {
        for f in domain.faces() {
            if f.potential_id >= potentials.len() {
                return Err(Error::UnknownPotential(f.potential_id));
            }
        }
        if roles.len() != domain.num_faces() {
            return Err(Error::InvalidParameter("one role per face required".into()));
        }
        for s in &monitored_subsets {
            if let Some(&bad) = s.indices().iter().find(|&&i| i >= domain.num_faces()) {
                return Err(Error::InvalidFaceIndex { index: bad, faces: domain.num_faces() });
            }
            domain.check_subset(s)?;
        }
        let model = Self {
            name: name.into(),
            domain,
            potentials,
            initial_point: Vec::new(),
            monitored_subsets,
            roles,
        };
        model.with_initial_point(initial_point)
    }

    /// Replaces the starting point; it must be strictly interior.
    pub fn with_initial_point(mut self, x: Vec<f64>) -> Result<Self> {
        let min_gap = self.domain.min_gap(&x)?;
        if !(min_gap >= MIN_INITIAL_GAP) {
            return Err(Error::InitialPointNotInterior { min_gap });
        }
        // points beyond a finite potential domain are outside D as well
        for (i, f) in self.domain.faces().iter().enumerate() {
            if potentials::eval(self.potential(i), f.gap(&x))?.is_infinite() {
                return Err(Error::InitialPointNotInterior { min_gap });
            }
        }
        self.initial_point = x;
        Ok(self)
    }

    /// Replaces the monitored face subsets.
    pub fn with_monitored_subsets(mut self, subsets: Vec<FaceSubset>) -> Result<Self> {
        for s in &subsets {
            if let Some(&bad) = s.indices().iter().find(|&&i| i >= self.num_faces()) {
                return Err(Error::InvalidFaceIndex { index: bad, faces: self.num_faces() });
            }
            self.domain.check_subset(s)?;
        }
        self.monitored_subsets = subsets;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &PolyhedralDomain {
        &self.domain
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn num_faces(&self) -> usize {
        self.domain.num_faces()
    }

    pub fn faces(&self) -> &[Face] {
        self.domain.faces()
    }

    pub fn potentials(&self) -> &[SharedPotential] {
        &self.potentials
    }

    /// Potential attached to face `i`.
    pub fn potential(&self, i: usize) -> &dyn BarrierPotential {
        self.potentials[self.domain.faces()[i].potential_id].as_ref()
    }

    pub fn initial_point(&self) -> &[f64] {
        &self.initial_point
    }

    pub fn monitored_subsets(&self) -> &[FaceSubset] {
        &self.monitored_subsets
    }

    pub fn role(&self, i: usize) -> FaceRole {
        self.roles[i]
    }

    pub fn roles(&self) -> &[FaceRole] {
        &self.roles
    }

    /// `Phi(x)`; `+inf` outside the domain.
    pub fn potential_value(&self, x: &[f64]) -> Result<f64> {
        let gaps = self.domain.gaps(x)?;
        let mut total = 0.0;
        for (i, g) in gaps.into_iter().enumerate() {
            if g < 0.0 {
                return Ok(f64::INFINITY);
            }
            total += potentials::eval(self.potential(i), g)?;
        }
        Ok(total)
    }

    /// `grad Phi(x) = sum_i n_i phi_i'(gap_i)`, defined on the open domain.
    pub fn grad_potential(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.dimension()];
        for (i, f) in self.domain.faces().iter().enumerate() {
            let d = potentials::deriv(self.potential(i), f.gap(x))?;
            for (gk, nk) in g.iter_mut().zip(&f.normal) {
                *gk += d * nk;
            }
        }
        Ok(g)
    }

    /// Drift `-grad Phi(x)`.
    pub fn drift(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), got: x.len() });
        }
        Ok(self.grad_potential(x)?.into_iter().map(|v| -v).collect())
    }

    /// Serializable spec of every face potential, when all are built-ins.
    pub fn potential_specs(&self) -> Option<Vec<PotentialSpec>> {
        self.potentials.iter().map(|p| p.spec()).collect()
    }
}

fn unit_diff(dim: usize, plus: usize, minus: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[plus] = 1.0 / SQRT_2;
    v[minus] = -1.0 / SQRT_2;
    v
}

fn unit_sum(dim: usize, a: usize, b: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[a] = 1.0 / SQRT_2;
    v[b] = 1.0 / SQRT_2;
    v
}

fn axis(dim: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

fn need(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}

/// Consecutive-face triples `{i, i+1}` used to watch for triple collisions.
fn consecutive_pairs(faces: &[usize], total: usize) -> Result<Vec<FaceSubset>> {
    faces
        .windows(2)
        .map(|w| FaceSubset::new(vec![w[0], w[1]], total))
        .collect()
}

/// Nearest-neighbour repulsion: `n - 1` faces `(e_{i+1} - e_i)/sqrt 2`, each
/// carrying `u -> phi(sqrt 2 u)` so that the pair potential is `phi` of the
/// raw spacing. Starts from `0, 1, ..., n-1`.
pub fn build_rost_vares(n: usize, phi: SharedPotential) -> Result<PolyhedralModel> {
    need(n >= 2, "rost_vares needs at least 2 particles")?;
    let face_potential: SharedPotential = Arc::new(Scaled::new(phi.clone(), SQRT_2)?);
    let faces: Vec<Face> = (0..n - 1)
        .map(|i| Face::new(unit_diff(n, i + 1, i), 0.0, 0, format!("x{}-x{}", i + 2, i + 1)))
        .collect();
    let domain = PolyhedralDomain::new(n, faces)?;
    let x0: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let monitored = consecutive_pairs(&(0..n - 1).collect::<Vec<_>>(), n - 1)?;
    PolyhedralModel::new(format!("rost_vares(n={n}, phi={})", phi.name()), domain, vec![face_potential], x0, monitored)
}

/// Radii `r_i = sqrt(lambda_i)` of a Wishart eigenvalue process, `delta >= n`.
///
/// Faces: axis walls `r_i >= 0` with `-(delta-n)/2 log`, difference walls
/// `(e_j - e_i)/sqrt 2` and sum walls `(e_j + e_i)/sqrt 2` with `-(1/2) log`.
/// At `delta = n` the axis walls are pure reflection. Starts from `1, ..., n`.
pub fn build_wishart_radii(n: usize, delta: f64) -> Result<PolyhedralModel> {
    need(n >= 2, "wishart needs n >= 2")?;
    need(delta.is_finite() && delta >= n as f64, format!("wishart needs delta >= n = {n}, got {delta}"))?;
    let axis_gamma = 0.5 * (delta - n as f64);
    let axis_pot: SharedPotential = if axis_gamma > 0.0 {
        Arc::new(LogBarrier::new(axis_gamma)?)
    } else {
        Arc::new(Zero)
    };
    let pair_pot: SharedPotential = Arc::new(LogBarrier::new(0.5)?);
    let mut faces = Vec::new();
    for i in 0..n {
        faces.push(Face::new(axis(n, i), 0.0, 0, format!("r{}", i + 1)));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            faces.push(Face::new(unit_diff(n, j, i), 0.0, 1, format!("r{}-r{}", j + 1, i + 1)));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            faces.push(Face::new(unit_sum(n, i, j), 0.0, 1, format!("r{}+r{}", i + 1, j + 1)));
        }
    }
    let domain = PolyhedralDomain::new(n, faces)?;
    let x0: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    PolyhedralModel::new(format!("wishart_radii(n={n}, delta={delta})"), domain, vec![axis_pot, pair_pot], x0, Vec::new())
}

/// Maps Wishart radii back to eigenvalues `lambda_i = r_i^2`.
pub fn radii_to_eigenvalues(r: &[f64]) -> Vec<f64> {
    r.iter().map(|v| v * v).collect()
}

/// Particles on a circle with `-gamma log|sin((x_i - x_j)/2)|` pair energy.
///
/// For each pair `j < i` there are two faces: `x_i - x_j >= 0` and the
/// wrap-around `x_i - x_j <= 2 pi`. Writing
/// `sin t = 2 sin(t/2) sin((pi - t)/2)` splits the pair energy into one
/// half-angle `TrigLogSin` term per face, singular only at that face.
/// Starts equally spaced on `[0, 2 pi)`.
pub fn build_trigonometric(n: usize, gamma: f64) -> Result<PolyhedralModel> {
    need(n >= 2, "trigonometric needs n >= 2")?;
    let half_angle: SharedPotential = Arc::new(TrigLogSin::new(gamma, 2.0 * SQRT_2)?);
    let mut faces = Vec::new();
    let mut roles = Vec::new();
    let mut adjacent = Vec::new();
    for j in 0..n {
        for i in (j + 1)..n {
            if i == j + 1 {
                adjacent.push(faces.len());
            }
            faces.push(Face::new(unit_diff(n, i, j), 0.0, 0, format!("x{}-x{}", i + 1, j + 1)));
            roles.push(FaceRole::Wall);
        }
    }
    for j in 0..n {
        for i in (j + 1)..n {
            faces.push(Face::new(unit_diff(n, j, i), -PI * SQRT_2, 0, format!("wrap(x{}-x{})", i + 1, j + 1)));
            roles.push(FaceRole::WrapAround);
        }
    }
    let total = faces.len();
    let domain = PolyhedralDomain::new(n, faces)?;
    let x0: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let monitored = consecutive_pairs(&adjacent, total)?;
    PolyhedralModel::with_roles(
        format!("trigonometric(n={n}, gamma={gamma})"),
        domain,
        vec![half_angle],
        x0,
        monitored,
        roles,
    )
}

/// `-gamma log sinh(x_k - x_j)` pair energy on ordered configurations.
/// Starts from `0, 1, ..., n-1`.
pub fn build_hyperbolic(n: usize, gamma: f64) -> Result<PolyhedralModel> {
    need(n >= 2, "hyperbolic needs n >= 2")?;
    let pot: SharedPotential = Arc::new(HyperbolicLogSinh::new(gamma)?);
    let mut faces = Vec::new();
    let mut adjacent = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            if k == j + 1 {
                adjacent.push(faces.len());
            }
            faces.push(Face::new(unit_diff(n, k, j), 0.0, 0, format!("x{}-x{}", k + 1, j + 1)));
        }
    }
    let total = faces.len();
    let domain = PolyhedralDomain::new(n, faces)?;
    let x0: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let monitored = consecutive_pairs(&adjacent, total)?;
    PolyhedralModel::new(format!("hyperbolic(n={n}, gamma={gamma})"), domain, vec![pot], x0, monitored)
}

/// One face of a user-defined model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomFace {
    pub normal: Vec<f64>,
    #[serde(default)]
    pub offset: f64,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub label: Option<String>,
}

/// User-defined polyhedral model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModelSpec {
    pub dimension: usize,
    pub faces: Vec<CustomFace>,
    /// Required unless supplied by the enclosing [`ModelConfig`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial_point: Vec<f64>,
    #[serde(default)]
    pub monitored: Vec<Vec<usize>>,
    /// Rescale non-unit normals instead of rejecting them.
    #[serde(default)]
    pub normalize: bool,
    #[serde(default)]
    pub name: Option<String>,
}

pub fn build_custom(spec: &CustomModelSpec) -> Result<PolyhedralModel> {
    let mut potentials = Vec::with_capacity(spec.faces.len());
    let mut faces = Vec::with_capacity(spec.faces.len());
    for (i, f) in spec.faces.iter().enumerate() {
        potentials.push(f.potential.build()?);
        let label = f.label.clone().unwrap_or_else(|| format!("face{}", i + 1));
        faces.push(Face::new(f.normal.clone(), f.offset, i, label));
    }
    let domain = PolyhedralDomain::with_normalization(spec.dimension, faces, spec.normalize)?;
    let m = domain.num_faces();
    let monitored = spec
        .monitored
        .iter()
        .map(|j| FaceSubset::new(j.clone(), m))
        .collect::<Result<Vec<_>>>()?;
    PolyhedralModel::new(
        spec.name.clone().unwrap_or_else(|| "custom".into()),
        domain,
        potentials,
        spec.initial_point.clone(),
        monitored,
    )
}

/// Config grammar for the zoo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    RostVares { n: usize, phi: PotentialSpec },
    Wishart { n: usize, delta: f64 },
    Dunkl { family: Family, rank: usize, k: Vec<f64> },
    Trig { n: usize, gamma: f64 },
    Hyperbolic { n: usize, gamma: f64 },
    Custom(CustomModelSpec),
}

impl ModelSpec {
    pub fn build(&self) -> Result<PolyhedralModel> {
        match self {
            ModelSpec::RostVares { n, phi } => build_rost_vares(*n, phi.build()?),
            ModelSpec::Wishart { n, delta } => build_wishart_radii(*n, *delta),
            ModelSpec::Dunkl { family, rank, k } => {
                let rs = rootsys::standard_root_system(*family, *rank, k)?;
                rootsys::dunkl_model(&rs)
            }
            ModelSpec::Trig { n, gamma } => build_trigonometric(*n, *gamma),
            ModelSpec::Hyperbolic { n, gamma } => build_hyperbolic(*n, *gamma),
            ModelSpec::Custom(c) => build_custom(c),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::RostVares { .. } => "rost_vares",
            ModelSpec::Wishart { .. } => "wishart",
            ModelSpec::Dunkl { .. } => "dunkl",
            ModelSpec::Trig { .. } => "trig",
            ModelSpec::Hyperbolic { .. } => "hyperbolic",
            ModelSpec::Custom(_) => "custom",
        }
    }
}

/// A zoo entry plus an optional starting-point override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(flatten)]
    pub spec: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_point: Option<Vec<f64>>,
}

impl ModelConfig {
    pub fn build(&self) -> Result<PolyhedralModel> {
        let model = match (&self.spec, &self.initial_point) {
            (ModelSpec::Custom(c), Some(x)) if c.initial_point.is_empty() => {
                let mut c = c.clone();
                c.initial_point = x.clone();
                return build_custom(&c);
            }
            (spec, _) => spec.build()?,
        };
        match &self.initial_point {
            Some(x) => model.with_initial_point(x.clone()),
            None => Ok(model),
        }
    }
}

impl From<ModelSpec> for ModelConfig {
    // A custom starting point moves to the override slot, which is where the
    // flattened JSON form puts it on the way back in.
    fn from(mut spec: ModelSpec) -> Self {
        let initial_point = match &mut spec {
            ModelSpec::Custom(c) if !c.initial_point.is_empty() => Some(std::mem::take(&mut c.initial_point)),
            _ => None,
        };
        Self { spec, initial_point }
    }
}

/// Euclidean norm, re-exported for callers that post-process states.
pub fn state_norm(x: &[f64]) -> f64 {
    linalg::norm(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialSpec;
    use approx::assert_relative_eq;

    fn log(g: f64) -> SharedPotential {
        Arc::new(LogBarrier::new(g).unwrap())
    }

    #[test]
    fn rost_vares_faces_and_drift() {
        let m = build_rost_vares(3, log(0.4)).unwrap();
        assert_eq!(m.num_faces(), 2);
        let d = m.drift(&[0.0, 1.0, 2.0]).unwrap();
        assert_relative_eq!(d[0], -0.4, epsilon = 1e-14);
        assert!(d[1].abs() < 1e-14);
        assert_relative_eq!(d[2], 0.4, epsilon = 1e-14);
        // middle particle feels both neighbours: phi'(x3-x2) - phi'(x2-x1)
        let d = m.drift(&[0.0, 1.0, 3.0]).unwrap();
        assert_relative_eq!(d[1], -0.4 / 2.0 + 0.4 / 1.0, epsilon = 1e-14);
        assert_eq!(m.monitored_subsets().len(), 1);
        assert!(build_rost_vares(1, log(0.4)).is_err());
    }

    #[test]
    fn rost_vares_two_particles_zero() {
        let m = build_rost_vares(2, Arc::new(Zero)).unwrap();
        assert_eq!(m.num_faces(), 1);
        assert_eq!(m.potential(0).value_at_zero(), 0.0);
    }

    #[test]
    fn wishart_structure() {
        let m = build_wishart_radii(2, 3.0).unwrap();
        assert_eq!(m.num_faces(), 4);
        assert_eq!(m.potential(0).zero_exponent(), Some(0.5));
        let m = build_wishart_radii(2, 2.5).unwrap();
        assert_eq!(m.potential(0).zero_exponent(), Some(0.25));
        let m = build_wishart_radii(3, 3.0).unwrap();
        assert_eq!(m.potential(0).value_at_zero(), 0.0);
        assert_eq!(m.num_faces(), 3 + 3 + 3);
        assert!(build_wishart_radii(3, 2.9).is_err());
    }

    #[test]
    fn trigonometric_structure() {
        let m = build_trigonometric(2, 0.5).unwrap();
        assert_eq!(m.num_faces(), 2);
        assert_eq!(m.role(1), FaceRole::WrapAround);
        let m = build_trigonometric(4, 0.5).unwrap();
        assert_eq!(m.num_faces(), 12);
        assert_eq!(m.monitored_subsets().len(), 2);
    }

    #[test]
    fn hyperbolic_structure() {
        let m = build_hyperbolic(3, 0.7).unwrap();
        assert_eq!(m.num_faces(), 3);
        let d = m.drift(&[0.0, 10.0, 20.0]).unwrap();
        // coth saturates: each pair contributes about gamma
        assert_relative_eq!(d[0], -1.4, epsilon = 1e-6);
        assert_relative_eq!(d[2], 1.4, epsilon = 1e-6);
    }

    #[test]
    fn custom_models() {
        let half: CustomModelSpec = serde_json::from_str(
            r#"{"dimension": 1, "faces": [{"normal": [1.0], "potential": {"kind": "log", "gamma": 0.3}}], "initial_point": [0.5]}"#,
        )
        .unwrap();
        let m = build_custom(&half).unwrap();
        assert_eq!(m.num_faces(), 1);

        let dup = CustomModelSpec {
            dimension: 1,
            faces: vec![
                CustomFace { normal: vec![1.0], offset: 0.0, potential: PotentialSpec::Zero, label: None },
                CustomFace { normal: vec![1.0], offset: 1.0, potential: PotentialSpec::Zero, label: None },
            ],
            initial_point: vec![2.0],
            monitored: vec![],
            normalize: false,
            name: None,
        };
        assert!(matches!(build_custom(&dup), Err(Error::DuplicateNormal { .. })));

        let mut outside = half.clone();
        outside.initial_point = vec![0.0];
        assert!(matches!(build_custom(&outside), Err(Error::InitialPointNotInterior { .. })));
    }

    #[test]
    fn drift_rejects_wall_points() {
        let m = build_rost_vares(3, log(0.4)).unwrap();
        assert!(m.drift(&[0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn model_config_override() {
        let c: ModelConfig = serde_json::from_str(r#"{"kind": "hyperbolic", "n": 2, "gamma": 0.3, "initial_point": [0.0, 0.5]}"#).unwrap();
        let m = c.build().unwrap();
        assert_eq!(m.initial_point(), &[0.0, 0.5]);
    }

    #[test]
    fn model_config_round_trip() {
        let texts = [
            r#"{"kind":"rost_vares","n":3,"phi":{"kind":"log","gamma":0.5}}"#,
            r#"{"kind":"dunkl","family":"B","rank":2,"k":[0.75,1.25],"initial_point":[2.0,0.5]}"#,
            r#"{"kind":"custom","dimension":2,"faces":[{"normal":[1.0,0.0],"potential":{"kind":"zero"}},{"normal":[0.0,1.0],"potential":{"kind":"log","gamma":0.7}}],"initial_point":[1.0,1.0],"monitored":[[0,1]]}"#,
        ];
        for t in texts {
            let a: ModelConfig = serde_json::from_str(t).unwrap();
            let back: ModelConfig = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
            assert_eq!(a, back);
            let (ma, mb) = (a.build().unwrap(), back.build().unwrap());
            assert_eq!(ma.name(), mb.name());
            assert_eq!(ma.initial_point(), mb.initial_point());
            assert_eq!(ma.num_faces(), mb.num_faces());
        }
        let missing = r#"{"kind":"custom","dimension":1,"faces":[{"normal":[1.0],"potential":{"kind":"zero"}}]}"#;
        assert!(serde_json::from_str::<ModelConfig>(missing).unwrap().build().is_err());
    }
}
