//! Deterministic synthetic trajectory families with known latent structure.
//!
//! All randomness comes from [`SplitMix64`], whose constants are fixed here
//! so that a given [`ProcessSpec`] produces the same dataset bit for bit on
//! every platform:
//!
//! * state increment `0x9E37_79B9_7F4A_7C15`
//! * output mix: `z ^= z >> 30; z *= 0xBF58_476D_1CE4_E5B9; z ^= z >> 27;
//!   z *= 0x94D0_49BB_1331_11EB; z ^= z >> 31`
//! * uniform reals: top 53 bits of the output times `2^-53`, in `[0, 1)`
//! * Gaussians: Box-Muller cosine branch, `sqrt(-2 ln(1 - u1)) cos(2 pi u2)`,
//!   two uniforms per draw
//!
//! Noise uses the spec seed. The orthonormal frame that lifts a family into
//! a higher ambient dimension uses the fixed seed [`FRAME_SEED`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::dataset::{DatasetParts, TrajectoryDataset};
use crate::error::{invalid_param, Result};

pub const FRAME_SEED: u64 = 0x7EA1_F0A2_5EED_0001;

/// Height gap between neighboring swiss-roll trajectories.
const ROLL_HEIGHT_STEP: f64 = 3.0;
const ROLL_THETA_START: f64 = 1.5 * PI;
const ROLL_THETA_END: f64 = 4.5 * PI;
const STRAND_STEP: f64 = 0.5;
const STRAND_OFFSET: f64 = 0.125;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Trajectories sweep the unrolled coordinate of a swiss roll, one per
    /// height. Latent parameter: `height`.
    SwissRollTrajectories,
    /// Straight rays leaving a common origin at different angles. Latent
    /// parameter: `angle`.
    DivergingFan,
    /// Two parallel strands along one gentle curve, sampled in lockstep so
    /// each point's nearest neighbor lies on the other strand. Latent
    /// parameter: `side`.
    InterleavedPair,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::SwissRollTrajectories => "swissroll",
            Family::DivergingFan => "fan",
            Family::InterleavedPair => "interleaved",
        }
    }

    /// Dimension of the space the family is drawn in before lifting.
    pub fn base_dim(self) -> usize {
        match self {
            Family::SwissRollTrajectories => 3,
            Family::DivergingFan | Family::InterleavedPair => 2,
        }
    }

    fn param_name(self) -> &'static str {
        match self {
            Family::SwissRollTrajectories => "height",
            Family::DivergingFan => "angle",
            Family::InterleavedPair => "side",
        }
    }

    fn default_params(self, t: usize) -> Vec<f64> {
        match self {
            Family::SwissRollTrajectories => (0..t).map(|i| ROLL_HEIGHT_STEP * i as f64).collect(),
            Family::DivergingFan => (0..t).map(|i| PI * i as f64 / t as f64).collect(),
            Family::InterleavedPair => vec![1.0, -1.0],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "swissroll" => Ok(Family::SwissRollTrajectories),
            "fan" => Ok(Family::DivergingFan),
            "interleaved" => Ok(Family::InterleavedPair),
            other => Err(invalid_param(format!("unknown family '{other}' (swissroll, fan, interleaved)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    pub family: Family,
    pub trajectories: usize,
    pub points_per_trajectory: usize,
    pub ambient_dim: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Per-trajectory latent parameter; family defaults when `None`.
    pub params: Option<Vec<f64>>,
}

impl ProcessSpec {
    pub fn new(family: Family, trajectories: usize, points_per_trajectory: usize) -> Self {
        ProcessSpec {
            family,
            trajectories,
            points_per_trajectory,
            ambient_dim: family.base_dim(),
            noise_sigma: 0.0,
            seed: 0,
            params: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trajectories < 1 {
            return Err(invalid_param("at least one trajectory is required"));
        }
        if self.family == Family::InterleavedPair && self.trajectories != 2 {
            return Err(invalid_param("the interleaved family has exactly 2 trajectories"));
        }
        if self.points_per_trajectory < 2 {
            return Err(invalid_param("at least 2 points per trajectory are required"));
        }
        if self.ambient_dim < self.family.base_dim() {
            return Err(invalid_param(format!(
                "family '{}' needs ambient dimension >= {}",
                self.family,
                self.family.base_dim()
            )));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(invalid_param("noise must be finite and nonnegative"));
        }
        if let Some(p) = &self.params {
            if p.len() != self.trajectories || p.iter().any(|v| !v.is_finite()) {
                return Err(invalid_param("one finite parameter value per trajectory is required"));
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines. Keys: `family`, `T`, `m`, `D`, `noise`,
    /// `seed`, `params` (comma separated). `#` starts a comment.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut spec = ProcessSpec::new(Family::SwissRollTrajectories, 6, 100);
        let mut dim = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| invalid_param(format!("config line {}: expected key = value", lineno + 1)))?;
            let bad = |what: &str| invalid_param(format!("config line {}: bad {what} '{value}'", lineno + 1));
            match key {
                "family" => spec.family = value.parse()?,
                "T" => spec.trajectories = value.parse().map_err(|_| bad("T"))?,
                "m" => spec.points_per_trajectory = value.parse().map_err(|_| bad("m"))?,
                "D" => dim = Some(value.parse().map_err(|_| bad("D"))?),
                "noise" => spec.noise_sigma = value.parse().map_err(|_| bad("noise"))?,
                "seed" => spec.seed = value.parse().map_err(|_| bad("seed"))?,
                "params" => {
                    spec.params = Some(
                        value
                            .split(',')
                            .map(|v| v.trim().parse::<f64>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| bad("params"))?,
                    )
                }
                other => return Err(invalid_param(format!("config line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        spec.ambient_dim = dim.unwrap_or(spec.family.base_dim());
        Ok(spec)
    }

    pub fn to_config_string(&self) -> String {
        let mut s = format!(
            "family = {}\nT = {}\nm = {}\nD = {}\nnoise = {}\nseed = {}\n",
            self.family, self.trajectories, self.points_per_trajectory, self.ambient_dim, self.noise_sigma, self.seed
        );
        if let Some(p) = &self.params {
            let vals: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            s.push_str(&format!("params = {}\n", vals.join(",")));
        }
        s
    }
}

/// Arc length of the spiral `r = theta` from 0 to `theta`.
fn spiral_arc(theta: f64) -> f64 {
    0.5 * (theta * (theta * theta + 1.0).sqrt() + theta.asinh())
}

/// Inverse of [`spiral_arc`] by Newton iteration.
fn spiral_theta_at(arc: f64, mut theta: f64) -> f64 {
    for _ in 0..50 {
        let step = (spiral_arc(theta) - arc) / (theta * theta + 1.0).sqrt();
        theta -= step;
        if step.abs() < 1e-15 * theta.abs().max(1.0) {
            break;
        }
    }
    theta
}

fn base_point(family: Family, param: f64, j: usize, m: usize) -> Vec<f64> {
    let frac = j as f64 / (m - 1) as f64;
    match family {
        Family::SwissRollTrajectories => {
            let (a0, a1) = (spiral_arc(ROLL_THETA_START), spiral_arc(ROLL_THETA_END));
            let theta =
                spiral_theta_at(a0 + (a1 - a0) * frac, ROLL_THETA_START + frac * (ROLL_THETA_END - ROLL_THETA_START));
            vec![theta * theta.cos(), param, theta * theta.sin()]
        }
        Family::DivergingFan => {
            let r = j as f64;
            vec![r * param.cos(), r * param.sin()]
        }
        Family::InterleavedPair => {
            let u = j as f64 * STRAND_STEP;
            // Curve (u, 0.5 sin(u/2)) and its unit normal.
            let slope = 0.25 * (0.5 * u).cos();
            let norm = (1.0 + slope * slope).sqrt();
            let off = param * STRAND_OFFSET;
            vec![u - off * slope / norm, 0.5 * (0.5 * u).sin() + off / norm]
        }
    }
}

/// Orthonormal `base x ambient` frame, fixed for a given pair of sizes.
fn lift_frame(base: usize, ambient: usize) -> Array2<f64> {
    let mut frame = Array2::zeros((base, ambient));
    if base == ambient {
        for i in 0..base {
            frame[[i, i]] = 1.0;
        }
        return frame;
    }
    let mut rng = SplitMix64::new(FRAME_SEED);
    let mut row = 0;
    while row < base {
        let mut v: Vec<f64> = (0..ambient).map(|_| rng.next_gaussian()).collect();
        for prev in 0..row {
            let dot: f64 = (0..ambient).map(|c| v[c] * frame[[prev, c]]).sum();
            for (c, x) in v.iter_mut().enumerate() {
                *x -= dot * frame[[prev, c]];
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for (c, x) in v.iter().enumerate() {
                frame[[row, c]] = x / norm;
            }
            row += 1;
        }
    }
    frame
}

/// Generates the dataset described by `spec`.
pub fn generate(spec: &ProcessSpec) -> Result<TrajectoryDataset> {
    spec.validate()?;
    let family = spec.family;
    let (t_count, m, dim) = (spec.trajectories, spec.points_per_trajectory, spec.ambient_dim);
    let params = spec.params.clone().unwrap_or_else(|| family.default_params(t_count));
    let frame = lift_frame(family.base_dim(), dim);
    let mut rng = SplitMix64::new(spec.seed);
    let n = t_count * m;
    let mut points = Array2::zeros((n, dim));
    let mut trajectory_of = Vec::with_capacity(n);
    let mut time_index_of = Vec::with_capacity(n);
    for (t, &param) in params.iter().enumerate() {
        for j in 0..m {
            let i = t * m + j;
            let base = base_point(family, param, j, m);
            for c in 0..dim {
                let mut x: f64 = base.iter().enumerate().map(|(b, v)| v * frame[[b, c]]).sum();
                if spec.noise_sigma > 0.0 {
                    x += spec.noise_sigma * rng.next_gaussian();
                }
                points[[i, c]] = x;
            }
            trajectory_of.push(t);
            time_index_of.push(j);
        }
    }
    TrajectoryDataset::new(DatasetParts {
        points,
        trajectory_of,
        time_index_of,
        times: Vec::new(),
        trajectory_names: (0..t_count).map(|t| format!("traj{t}")).collect(),
        param_names: vec![family.param_name().to_string()],
        trajectory_params: params.iter().map(|&p| vec![p]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::pairwise_distances;

    #[test]
    fn splitmix_reference_values() {
        // First outputs for seed 0, as published with the algorithm.
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(r.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn uniform_and_gaussian_ranges() {
        let mut r = SplitMix64::new(42);
        let xs: Vec<f64> = (0..10_000).map(|_| r.next_f64()).collect();
        assert!(xs.iter().all(|x| (0.0..1.0).contains(x)));
        let g: Vec<f64> = (0..20_000).map(|_| r.next_gaussian()).collect();
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        let var = g.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / g.len() as f64;
        assert!(mean.abs() < 0.03 && (var - 1.0).abs() < 0.05, "{mean} {var}");
    }

    #[test]
    fn deterministic() {
        let mut spec = ProcessSpec::new(Family::SwissRollTrajectories, 3, 20);
        spec.noise_sigma = 0.1;
        spec.ambient_dim = 7;
        spec.seed = 9;
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        spec.seed = 10;
        let other = generate(&spec).unwrap();
        spec.seed = 9;
        assert_ne!(generate(&spec).unwrap(), other);
    }

    #[test]
    fn lifting_is_isometric() {
        let spec3 = ProcessSpec::new(Family::SwissRollTrajectories, 2, 15);
        let mut spec9 = spec3.clone();
        spec9.ambient_dim = 9;
        let d3 = pairwise_distances(&generate(&spec3).unwrap()).unwrap();
        let d9 = pairwise_distances(&generate(&spec9).unwrap()).unwrap();
        let worst = (d3.values() - d9.values()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn roll_points_are_evenly_spaced_on_the_spiral() {
        let ds = generate(&ProcessSpec::new(Family::SwissRollTrajectories, 1, 50)).unwrap();
        let step = (spiral_arc(ROLL_THETA_END) - spiral_arc(ROLL_THETA_START)) / 49.0;
        for j in 0..50 {
            let p = ds.point(j);
            let theta = p[0].hypot(p[2]);
            let expected = spiral_arc(ROLL_THETA_START) + step * j as f64;
            assert!((spiral_arc(theta) - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn fan_shares_origin() {
        let ds = generate(&ProcessSpec::new(Family::DivergingFan, 4, 10)).unwrap();
        for t in 0..4 {
            let p = ds.point(t * 10);
            assert_eq!((p[0], p[1]), (0.0, 0.0));
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(generate(&ProcessSpec::new(Family::InterleavedPair, 3, 10)).is_err());
        assert!(generate(&ProcessSpec::new(Family::DivergingFan, 0, 10)).is_err());
        assert!(generate(&ProcessSpec::new(Family::DivergingFan, 2, 1)).is_err());
        let mut s = ProcessSpec::new(Family::SwissRollTrajectories, 2, 10);
        s.ambient_dim = 2;
        assert!(generate(&s).is_err());
        s.ambient_dim = 3;
        s.noise_sigma = -1.0;
        assert!(generate(&s).is_err());
    }

    #[test]
    fn config_round_trip() {
        let text = "# comment\nfamily = fan\nT = 4\nm = 12\nD = 5\nnoise = 0.25\nseed = 3\nparams = 0, 0.5, 1, 1.5\n";
        let spec = ProcessSpec::from_config_str(text).unwrap();
        assert_eq!(spec.family, Family::DivergingFan);
        assert_eq!(spec.ambient_dim, 5);
        assert_eq!(spec.params.as_deref(), Some(&[0.0, 0.5, 1.0, 1.5][..]));
        assert_eq!(ProcessSpec::from_config_str(&spec.to_config_string()).unwrap(), spec);
        assert!(ProcessSpec::from_config_str("bogus = 1").is_err());
        assert!(ProcessSpec::from_config_str("T = x").is_err());
    }
}
