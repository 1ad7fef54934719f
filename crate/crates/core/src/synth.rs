//! Synthetic benchmark: a closed curve on a torus observed through scalar
//! sensors (projections onto unit vectors or distances to basepoints).

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{FusionError, Result};
use crate::types::{Channel, DissimilarityMatrix, MultiTimeSeries, Seed};

/// Curve `((R + r cos(a t + x0)) cos(b t + y0), (R + r cos(a t + x0)) sin(b t + y0), r sin(a t + x0))`
/// sampled at `t_n = 2 pi n / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusCurveParams {
    pub major_radius: f64,
    pub minor_radius: f64,
    pub a: i32,
    pub b: i32,
    pub x0: f64,
    pub y0: f64,
    pub samples: usize,
}

impl Default for TorusCurveParams {
    fn default() -> Self {
        TorusCurveParams {
            major_radius: 5.0,
            minor_radius: 2.0,
            a: 1,
            b: 2,
            x0: 0.0,
            y0: 0.0,
            samples: 100,
        }
    }
}

impl TorusCurveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.major_radius > self.minor_radius && self.minor_radius > 0.0) {
            return Err(FusionError::InvalidParameter("torus radii must satisfy R > r > 0".into()));
        }
        if self.samples < 3 {
            return Err(FusionError::InvalidParameter("need at least 3 curve samples".into()));
        }
        Ok(())
    }

    /// Curve point at parameter `t`.
    pub fn point_at(&self, t: f64) -> [f64; 3] {
        let meridian = self.a as f64 * t + self.x0;
        let longitude = self.b as f64 * t + self.y0;
        let radial = self.major_radius + self.minor_radius * meridian.cos();
        [
            radial * longitude.cos(),
            radial * longitude.sin(),
            self.minor_radius * meridian.sin(),
        ]
    }
}

pub fn torus_curve(params: &TorusCurveParams) -> Result<Vec<[f64; 3]>> {
    params.validate()?;
    let n = params.samples;
    Ok((0..n)
        .map(|k| params.point_at(std::f64::consts::TAU * k as f64 / n as f64))
        .collect())
}

fn dist3(p: &[f64; 3], q: &[f64; 3]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
}

/// Pairwise Euclidean distances in ambient space.
pub fn ground_truth_matrix(points: &[[f64; 3]]) -> DissimilarityMatrix {
    DissimilarityMatrix::from_upper(points.len(), |i, j| dist3(&points[i], &points[j]))
}

/// An observation function on ambient space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sensor {
    /// `x -> <x, v>` for a unit vector `v`.
    Projection([f64; 3]),
    /// `x -> |x - p|`.
    Basepoint([f64; 3]),
}

impl Sensor {
    pub fn label(&self) -> &'static str {
        match self {
            Sensor::Projection(_) => "proj",
            Sensor::Basepoint(_) => "base",
        }
    }

    pub fn vector(&self) -> [f64; 3] {
        match *self {
            Sensor::Projection(v) | Sensor::Basepoint(v) => v,
        }
    }
}

pub fn apply_sensor(points: &[[f64; 3]], sensor: &Sensor) -> Result<Vec<f64>> {
    match sensor {
        Sensor::Projection(v) => {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(FusionError::NonUnitProjection(norm));
            }
            Ok(points
                .iter()
                .map(|x| x[0] * v[0] + x[1] * v[1] + x[2] * v[2])
                .collect())
        }
        Sensor::Basepoint(p) => Ok(points.iter().map(|x| dist3(x, p)).collect()),
    }
}

/// Uniform direction on the unit sphere from three independent normals.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-12 {
            return [v[0] / norm, v[1] / norm, v[2] / norm];
        }
    }
}

/// Uniform point in the cube `[-half, half]^3`.
pub fn random_box_point<R: Rng + ?Sized>(rng: &mut R, half: f64) -> [f64; 3] {
    [
        rng.random_range(-half..=half),
        rng.random_range(-half..=half),
        rng.random_range(-half..=half),
    ]
}

/// The three synthetic sensor configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Three random projections.
    Projections,
    /// Three random basepoint distances.
    Basepoints,
    /// Two projections followed by two basepoint distances.
    Mixed,
}

impl ExperimentKind {
    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            1 => Ok(ExperimentKind::Projections),
            2 => Ok(ExperimentKind::Basepoints),
            3 => Ok(ExperimentKind::Mixed),
            _ => Err(FusionError::InvalidParameter(format!("unknown experiment {k}"))),
        }
    }

    pub fn index(&self) -> u8 {
        match self {
            ExperimentKind::Projections => 1,
            ExperimentKind::Basepoints => 2,
            ExperimentKind::Mixed => 3,
        }
    }
}

/// Half-width of the box basepoints are drawn from.
pub const BASEPOINT_BOX: f64 = 2.5;

#[derive(Debug, Clone)]
pub struct Experiment {
    pub kind: ExperimentKind,
    pub seed: Seed,
    pub points: Vec<[f64; 3]>,
    pub sensors: Vec<Sensor>,
    pub series: MultiTimeSeries,
    pub truth: DissimilarityMatrix,
}

/// Draws sensors with the seeded generator and observes the default curve.
pub fn make_experiment(kind: ExperimentKind, seed: Seed) -> Result<Experiment> {
    make_experiment_with(kind, seed, &TorusCurveParams::default())
}

pub fn make_experiment_with(
    kind: ExperimentKind,
    seed: Seed,
    curve: &TorusCurveParams,
) -> Result<Experiment> {
    let mut rng = seed.rng();
    let proj = |rng: &mut rand_chacha::ChaCha8Rng| Sensor::Projection(random_unit_vector(rng));
    let base = |rng: &mut rand_chacha::ChaCha8Rng| Sensor::Basepoint(random_box_point(rng, BASEPOINT_BOX));
    let sensors: Vec<Sensor> = match kind {
        ExperimentKind::Projections => (0..3).map(|_| proj(&mut rng)).collect(),
        ExperimentKind::Basepoints => (0..3).map(|_| base(&mut rng)).collect(),
        ExperimentKind::Mixed => {
            let mut s: Vec<Sensor> = (0..2).map(|_| proj(&mut rng)).collect();
            s.extend((0..2).map(|_| base(&mut rng)));
            s
        }
    };
    let points = torus_curve(curve)?;
    let channels = sensors
        .iter()
        .enumerate()
        .map(|(i, s)| Ok(Channel::scalar(&apply_sensor(&points, s)?).with_name(format!("{}{}", s.label(), i + 1))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Experiment {
        kind,
        seed,
        truth: ground_truth_matrix(&points),
        series: MultiTimeSeries::new(channels)?,
        points,
        sensors,
    })
}
