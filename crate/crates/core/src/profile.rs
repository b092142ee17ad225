// SPDX-License-Identifier: MIT OR Apache-2.0

//! Sensors on a planar grid observing a source whose signal decays with a
//! Gaussian profile `α_z(x) ∝ exp(-‖x - z‖² / 4β)`.
//!
//! Detection projects the per-stream statistics onto every candidate profile
//! (a matched filter) and maximises over a lattice of candidate source
//! locations and, optionally, several decay parameters.

use serde::{Deserialize, Serialize};

use crate::analytics::{nu_integral, tail_from_arl, NuMethod, TailProb};
use crate::scenario::Scenario;
use crate::stream::StreamState;
use crate::{Error, Result};

/// Equi-spaced rectangular sensor layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorGrid {
    nx: usize,
    ny: usize,
    spacing: f64,
    origin: [f64; 2],
}

impl SensorGrid {
    /// `nx × ny` sensors with lower-left corner at `origin`.
    pub fn new(nx: usize, ny: usize, spacing: f64, origin: [f64; 2]) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::param("grid", "needs at least one sensor per axis"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::param("spacing", format!("must be positive, got {spacing}")));
        }
        Ok(Self {
            nx,
            ny,
            spacing,
            origin,
        })
    }

    /// `side × side` grid centred on the origin.
    pub fn centered_square(side: usize, spacing: f64) -> Result<Self> {
        let half = 0.5 * (side.max(1) - 1) as f64 * spacing;
        Self::new(side, side, spacing, [-half, -half])
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Position of sensor `n` (row-major, x fastest).
    pub fn position(&self, n: usize) -> [f64; 2] {
        let (i, j) = (n % self.nx, n / self.nx);
        [
            self.origin[0] + i as f64 * self.spacing,
            self.origin[1] + j as f64 * self.spacing,
        ]
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|n| self.position(n)).collect()
    }

    /// Smallest rectangle containing every sensor.
    pub fn hull(&self) -> Rect {
        Rect {
            min: self.origin,
            max: [
                self.origin[0] + (self.nx - 1) as f64 * self.spacing,
                self.origin[1] + (self.ny - 1) as f64 * self.spacing,
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn area(&self) -> f64 {
        (self.max[0] - self.min[0]).max(0.0) * (self.max[1] - self.min[1]).max(0.0)
    }

    /// Rectangle shrunk by `d` on every side.
    pub fn shrink(&self, d: f64) -> Rect {
        Rect {
            min: [self.min[0] + d, self.min[1] + d],
            max: [self.max[0] - d, self.max[1] - d],
        }
    }
}

/// Unnormalised profile `(2πβ)^{-1/2} exp(-‖x - z‖² / 4β)`.
pub fn raw_profile(x: [f64; 2], z: [f64; 2], beta: f64) -> f64 {
    let d2 = (x[0] - z[0]).powi(2) + (x[1] - z[1]).powi(2);
    (-d2 / (4.0 * beta)).exp() / (2.0 * std::f64::consts::PI * beta).sqrt()
}

/// Profile of source `z` over the grid, renormalised to unit Euclidean norm.
/// Also returns the norm before renormalisation.
pub fn unit_profile(grid: &SensorGrid, z: [f64; 2], beta: f64) -> Result<(Vec<f64>, f64)> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    let mut v: Vec<f64> = (0..grid.len()).map(|n| raw_profile(grid.position(n), z, beta)).collect();
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::Domain(format!(
            "profile at ({}, {}) vanishes on every sensor",
            z[0], z[1]
        )));
    }
    v.iter_mut().for_each(|a| *a /= norm);
    Ok((v, norm))
}

/// Decay parameter, candidate domain and lattice for the matched filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileModel {
    pub beta: f64,
    pub domain: Rect,
    pub lattice_spacing: f64,
    /// Decay parameters searched by the detector; `[beta]` by default.
    pub beta_candidates: Vec<f64>,
}

impl ProfileModel {
    /// Candidate sources over the grid's bounding rectangle on a lattice at
    /// half the sensor spacing.
    pub fn new(grid: &SensorGrid, beta: f64) -> Result<Self> {
        let m = Self {
            beta,
            domain: grid.hull(),
            lattice_spacing: 0.5 * grid.spacing(),
            beta_candidates: vec![beta],
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for &b in std::iter::once(&self.beta).chain(&self.beta_candidates) {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::param("beta", format!("must be positive, got {b}")));
            }
        }
        if self.beta_candidates.is_empty() {
            return Err(Error::param("beta_candidates", "must not be empty"));
        }
        if !(self.lattice_spacing > 0.0 && self.lattice_spacing.is_finite()) {
            return Err(Error::param(
                "lattice_spacing",
                format!("must be positive, got {}", self.lattice_spacing),
            ));
        }
        if !(self.domain.max[0] >= self.domain.min[0] && self.domain.max[1] >= self.domain.min[1]) {
            return Err(Error::param("domain", "empty rectangle"));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.domain.area()
    }

    /// Lattice points covering the domain, edges included.
    pub fn lattice(&self) -> Vec<[f64; 2]> {
        let h = self.lattice_spacing;
        let count = |lo: f64, hi: f64| ((hi - lo) / h + 1e-9).floor() as usize + 1;
        let (cx, cy) = (
            count(self.domain.min[0], self.domain.max[0]),
            count(self.domain.min[1], self.domain.max[1]),
        );
        let mut out = Vec::with_capacity(cx * cy);
        for j in 0..cy {
            for i in 0..cx {
                out.push([
                    self.domain.min[0] + i as f64 * h,
                    self.domain.min[1] + j as f64 * h,
                ]);
            }
        }
        out
    }

    pub fn matched_filter(&self, grid: &SensorGrid) -> Result<MatchedFilter> {
        self.validate()?;
        let mut candidates = Vec::new();
        let mut weights = Vec::new();
        for &beta in &self.beta_candidates {
            for z in self.lattice() {
                let (v, _) = unit_profile(grid, z, beta)?;
                candidates.push(Candidate { z, beta });
                weights.extend(v);
            }
        }
        Ok(MatchedFilter {
            n_sensors: grid.len(),
            candidates,
            weights,
        })
    }
}

/// A candidate source location with its decay parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub z: [f64; 2],
    pub beta: f64,
}

/// Unit-norm profile vectors for every candidate, stored row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedFilter {
    n_sensors: usize,
    candidates: Vec<Candidate>,
    weights: Vec<f64>,
}

impl MatchedFilter {
    /// Filter from explicit profile vectors; each is renormalised to unit norm.
    pub fn from_profiles(n_sensors: usize, profiles: Vec<(Candidate, Vec<f64>)>) -> Result<Self> {
        let mut candidates = Vec::with_capacity(profiles.len());
        let mut weights = Vec::with_capacity(profiles.len() * n_sensors);
        for (c, v) in profiles {
            if v.len() != n_sensors {
                return Err(Error::Dimension {
                    expected: n_sensors,
                    got: v.len(),
                });
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(Error::param("profile", "zero vector"));
            }
            candidates.push(c);
            weights.extend(v.iter().map(|a| a / norm));
        }
        Ok(Self {
            n_sensors,
            candidates,
            weights,
        })
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    pub fn n_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn candidate(&self, c: usize) -> Candidate {
        self.candidates[c]
    }

    pub fn profile(&self, c: usize) -> &[f64] {
        &self.weights[c * self.n_sensors..(c + 1) * self.n_sensors]
    }

    /// `out[c] = Σ_n α_c(x_n) y_n`.
    pub fn project(&self, y: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.weights.chunks_exact(self.n_sensors)) {
            *o = row.iter().zip(y).map(|(a, b)| a * b).sum();
        }
    }
}

/// Maximised matched-filter log-GLR at one change-point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileScore {
    /// `max_z ½[(Σ_n α_z(x_n) U_{n,k,t})⁺]²`.
    pub score: f64,
    pub candidate: Candidate,
    pub index: usize,
}

pub fn profile_score(state: &StreamState, k: u64, filter: &MatchedFilter) -> Result<ProfileScore> {
    if state.n_streams() != filter.n_sensors() {
        return Err(Error::Dimension {
            expected: state.n_streams(),
            got: filter.n_sensors(),
        });
    }
    if filter.n_candidates() == 0 {
        return Err(Error::param("profile", "no candidate source locations"));
    }
    let mut u = vec![0.0; state.n_streams()];
    state.u_vector(k, &mut u)?;
    let mut proj = vec![0.0; filter.n_candidates()];
    filter.project(&u, &mut proj);
    let (index, best) = proj
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc });
    let pos = best.max(0.0);
    Ok(ProfileScore {
        score: 0.5 * pos * pos,
        candidate: filter.candidate(index),
        index,
    })
}

/// Post-change means `μ_n = Σ_m r_m α_{z_m}(x_n)` with unit-norm profiles.
pub fn amplitude_field(sources: &[(f64, [f64; 2])], grid: &SensorGrid, beta: f64) -> Result<Vec<f64>> {
    let mut mu = vec![0.0; grid.len()];
    for &(r, z) in sources {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::param("r", format!("source strength must be nonnegative, got {r}")));
        }
        if r == 0.0 {
            continue;
        }
        let (v, _) = unit_profile(grid, z, beta)?;
        for (m, a) in mu.iter_mut().zip(v) {
            *m += r * a;
        }
    }
    Ok(mu)
}

/// Change at time 0 with the amplitude field of `sources` as post-change means.
pub fn source_scenario(sources: &[(f64, [f64; 2])], grid: &SensorGrid, beta: f64) -> Result<Scenario> {
    let mu = amplitude_field(sources, grid, beta)?;
    Scenario::from_mean_vector(Some(0), &mu)
}

/// ARL approximation of the matched-filter rule, which stops when
/// `[(Σ α_z U)⁺]² >= b` for some `z` and window.
pub fn profile_arl(b: f64, beta: f64, area: f64, m0: usize, m1: usize) -> Result<f64> {
    profile_arl_with(b, beta, area, m0, m1, NuMethod::Series)
}

pub fn profile_arl_with(b: f64, beta: f64, area: f64, m0: usize, m1: usize, method: NuMethod) -> Result<f64> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::param("b", format!("must be positive, got {b}")));
    }
    if !(beta > 0.0) {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    if !(area > 0.0) {
        return Err(Error::param("area", format!("must be positive, got {area}")));
    }
    if m0 == 0 || m0 >= m1 {
        return Err(Error::param("m1", format!("need 1 <= m0 < m1, got ({m0}, {m1})")));
    }
    let integral = nu_integral((b / m1 as f64).sqrt(), (b / m0 as f64).sqrt(), method)?;
    let pi = std::f64::consts::PI;
    let log = (16.0 * (2.0 * pi.powi(3)).sqrt() * beta * beta).ln() - 1.5 * b.ln() + 0.5 * b
        - (integral * area).ln();
    Ok(log.exp())
}

pub fn profile_tail_prob(b: f64, beta: f64, area: f64, m0: usize, m1: usize, m: f64) -> Result<TailProb> {
    if !(m >= 0.0) {
        return Err(Error::param("m", format!("horizon must be nonnegative, got {m}")));
    }
    Ok(tail_from_arl(profile_arl(b, beta, area, m0, m1)?, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid25() -> SensorGrid {
        SensorGrid::centered_square(25, 1.0).unwrap()
    }

    #[test]
    fn grid_layout() {
        let g = grid25();
        assert_eq!(g.len(), 625);
        assert_eq!(g.position(0), [-12.0, -12.0]);
        assert_eq!(g.position(624), [12.0, 12.0]);
        assert_eq!(g.hull().area(), 576.0);
        let m = ProfileModel::new(&g, 1.0).unwrap();
        assert_eq!(m.lattice().len(), 49 * 49);
    }

    #[test]
    fn amplitude_examples() {
        let g = grid25();
        assert!(amplitude_field(&[(0.0, [0.0, 0.0])], &g, 1.0).unwrap().iter().all(|m| *m == 0.0));
        let mu = amplitude_field(&[(1.0, [3.0, -2.0])], &g, 1.0).unwrap();
        assert!((mu.iter().map(|m| m * m).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(amplitude_field(&[(-1.0, [0.0, 0.0])], &g, 1.0).is_err());
    }

    #[test]
    fn sensors_near_source() {
        // Exponent -d²/4 drops below log 0.1 beyond d² = 4 ln 10; count the
        // lattice points inside that disc directly.
        let g = grid25();
        let mu = amplitude_field(&[(1.0, [0.0, 0.0])], &g, 1.0).unwrap();
        let peak = mu.iter().cloned().fold(0.0, f64::max);
        let above = mu.iter().filter(|m| **m > 0.1 * peak).count();
        let r2 = 4.0 * 10f64.ln();
        let mut disc = 0;
        for i in -12i32..=12 {
            for j in -12i32..=12 {
                if ((i * i + j * j) as f64) < r2 {
                    disc += 1;
                }
            }
        }
        assert_eq!(above, disc);
    }

    #[test]
    fn unit_norm_candidates() {
        let g = SensorGrid::centered_square(7, 1.0).unwrap();
        let mut m = ProfileModel::new(&g, 1.0).unwrap();
        m.beta_candidates = vec![0.5, 1.0, 3.0];
        let f = m.matched_filter(&g).unwrap();
        assert_eq!(f.n_candidates(), 3 * 13 * 13);
        for c in 0..f.n_candidates() {
            let n: f64 = f.profile(c).iter().map(|a| a * a).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_data_scores_zero() {
        let g = SensorGrid::centered_square(5, 1.0).unwrap();
        let f = ProfileModel::new(&g, 1.0).unwrap().matched_filter(&g).unwrap();
        let mut st = StreamState::new(g.len(), 20).unwrap();
        for _ in 0..5 {
            st.push(&vec![0.0; g.len()]).unwrap();
        }
        assert_eq!(profile_score(&st, 2, &f).unwrap().score, 0.0);
    }

    #[test]
    fn plant_and_recover() {
        let g = SensorGrid::centered_square(9, 1.0).unwrap();
        let f = ProfileModel::new(&g, 1.0).unwrap().matched_filter(&g).unwrap();
        let z = [1.5, -2.0];
        let (r, w) = (1.3, 16u64);
        let mu = amplitude_field(&[(r, z)], &g, 1.0).unwrap();
        let mut st = StreamState::new(g.len(), 50).unwrap();
        for _ in 0..w {
            st.push(&mu).unwrap();
        }
        let s = profile_score(&st, 0, &f).unwrap();
        assert_eq!(s.candidate.z, z);
        assert!((s.score - r * r * w as f64 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn single_candidate_matches_projection() {
        let g = SensorGrid::centered_square(4, 1.0).unwrap();
        let (v, _) = unit_profile(&g, [0.3, 0.2], 2.0).unwrap();
        let f = MatchedFilter::from_profiles(16, vec![(Candidate { z: [0.3, 0.2], beta: 2.0 }, v.clone())]).unwrap();
        let mut st = StreamState::new(16, 10).unwrap();
        let ys: Vec<Vec<f64>> = (0..6).map(|t| (0..16).map(|n| ((t * 7 + n * 3) % 5) as f64 - 1.8).collect()).collect();
        for y in &ys {
            st.push(y).unwrap();
        }
        for k in 0..6u64 {
            let mut proj = 0.0;
            for n in 0..16 {
                proj += v[n] * st.u_stat(k, n).unwrap();
            }
            let want = 0.5 * proj.max(0.0).powi(2);
            assert!((profile_score(&st, k, &f).unwrap().score - want).abs() < 1e-12);
        }
    }

    #[test]
    fn translation_invariance() {
        let a = SensorGrid::new(6, 5, 1.0, [0.0, 0.0]).unwrap();
        let b = SensorGrid::new(6, 5, 1.0, [10.0, -4.0]).unwrap();
        let fa = ProfileModel::new(&a, 1.0).unwrap().matched_filter(&a).unwrap();
        let fb = ProfileModel::new(&b, 1.0).unwrap().matched_filter(&b).unwrap();
        let mu = amplitude_field(&[(1.0, [2.0, 3.0])], &a, 1.0).unwrap();
        let mut sa = StreamState::new(30, 10).unwrap();
        let mut sb = StreamState::new(30, 10).unwrap();
        for t in 0..8 {
            let y: Vec<f64> = mu.iter().enumerate().map(|(n, m)| m + (((n + t) % 3) as f64 - 1.0) * 0.3).collect();
            sa.push(&y).unwrap();
            sb.push(&y).unwrap();
        }
        let (x, y) = (profile_score(&sa, 1, &fa).unwrap(), profile_score(&sb, 1, &fb).unwrap());
        assert!((x.score - y.score).abs() < 1e-12);
        assert_eq!(x.index, y.index);
        assert_eq!([x.candidate.z[0] + 10.0, x.candidate.z[1] - 4.0], y.candidate.z);
    }

    #[test]
    fn arl_structure() {
        let a = profile_arl(29.5, 1.0, 576.0, 1, 100).unwrap();
        let b = profile_arl(29.5, 1.0, 288.0, 1, 100).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
        let mut prev = 0.0;
        for i in 0..=30 {
            let v = profile_arl(10.0 + i as f64, 1.0, 576.0, 1, 100).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert_eq!(profile_tail_prob(29.5, 1.0, 576.0, 1, 100, 0.0).unwrap().exponential, 0.0);
        assert!(profile_arl(0.0, 1.0, 576.0, 1, 100).is_err());
    }
}
