//! ULA signal model: steering vectors, BPSK + complex-Gaussian snapshot
//! synthesis, and exact covariance / optimal-beamformer oracles used for
//! SINR evaluation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Uniform linear array description.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ArrayGeometry {
    /// Number of sensors.
    pub m: usize,
    /// Inter-element spacing over carrier wavelength (d / lambda_c).
    pub spacing_over_wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(m: usize, spacing_over_wavelength: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!("array needs at least 2 sensors, got {m}")));
        }
        if !(spacing_over_wavelength > 0.0) || !spacing_over_wavelength.is_finite() {
            return Err(Error::Config(format!(
                "spacing_over_wavelength must be positive and finite, got {spacing_over_wavelength}"
            )));
        }
        Ok(Self { m, spacing_over_wavelength })
    }

    /// Half-wavelength spaced array, the usual default.
    pub fn half_wavelength(m: usize) -> Result<Self> {
        Self::new(m, 0.5)
    }
}

/// One narrowband far-field source.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SourceSpec {
    /// Direction of arrival in degrees, open interval (0, 180).
    pub doa_deg: f64,
    /// Signal variance on a linear scale.
    pub power: f64,
    /// True for the desired (constrained) source.
    pub is_desired: bool,
}

/// Sources joining the scenario mid-run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ChangeEvent {
    /// Snapshot index at which the sources become active.
    pub at_snapshot: usize,
    pub add: Vec<SourceSpec>,
}

/// Full scenario: geometry, sources, noise and snapshot schedule.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScenarioConfig {
    pub geometry: ArrayGeometry,
    pub sources: Vec<SourceSpec>,
    /// Per-element noise variance (sigma_n^2).
    pub noise_power: f64,
    pub n_snapshots: usize,
    pub change_events: Vec<ChangeEvent>,
}

impl ScenarioConfig {
    /// Checks every structural invariant; call before running anything.
    pub fn validate(&self) -> Result<()> {
        let m = self.geometry.m;
        ArrayGeometry::new(m, self.geometry.spacing_over_wavelength)?;
        if !(self.noise_power > 0.0) || !self.noise_power.is_finite() {
            return Err(Error::Config(format!(
                "noise_power must be positive, got {}",
                self.noise_power
            )));
        }
        if self.n_snapshots == 0 {
            return Err(Error::Config("n_snapshots must be >= 1".into()));
        }
        let mut all: Vec<&SourceSpec> = self.sources.iter().collect();
        for ev in &self.change_events {
            all.extend(ev.add.iter());
        }
        let desired = all.iter().filter(|s| s.is_desired).count();
        if desired != 1 {
            return Err(Error::Config(format!(
                "exactly one desired source required, found {desired}"
            )));
        }
        for s in &all {
            if !(s.doa_deg > 0.0 && s.doa_deg < 180.0) {
                return Err(Error::Config(format!(
                    "source DOA must lie in (0, 180) degrees, got {}",
                    s.doa_deg
                )));
            }
            if !(s.power >= 0.0) || !s.power.is_finite() {
                return Err(Error::Config(format!("source power must be finite and >= 0, got {}", s.power)));
            }
        }
        if self.sources.len() > m {
            return Err(Error::Config(format!(
                "number of sources q={} exceeds sensor count m={m}",
                self.sources.len()
            )));
        }
        if all.len() > m {
            return Err(Error::Config(format!(
                "total sources after change events q={} exceeds sensor count m={m}",
                all.len()
            )));
        }
        let mut prev = None;
        for ev in &self.change_events {
            if ev.at_snapshot >= self.n_snapshots {
                return Err(Error::Config(format!(
                    "change event at snapshot {} is outside the run of {} snapshots",
                    ev.at_snapshot, self.n_snapshots
                )));
            }
            if let Some(p) = prev {
                if ev.at_snapshot <= p {
                    return Err(Error::Config("change event indices must be strictly increasing".into()));
                }
            }
            prev = Some(ev.at_snapshot);
        }
        // Numerical linear-independence check on the full steering matrix.
        let mut cols = Vec::with_capacity(all.len());
        for s in &all {
            cols.push(steering_vector(&self.geometry, s.doa_deg)?);
        }
        let a = DMatrix::from_columns(&cols);
        let gram = a.ad_mul(&a);
        let eig = gram.symmetric_eigen();
        let min_sv = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0).sqrt();
        if min_sv <= 1e-8 {
            return Err(Error::Config(format!(
                "steering vectors are numerically dependent (min singular value {min_sv:.3e})"
            )));
        }
        Ok(())
    }

    pub fn desired(&self) -> Result<&SourceSpec> {
        self.sources
            .iter()
            .find(|s| s.is_desired)
            .ok_or_else(|| Error::Config("no desired source in scenario".into()))
    }
}

/// One received array vector with its generation metadata.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub r: DVector<Complex64>,
    pub index: usize,
    /// BPSK symbols drawn for each active source, in source order.
    pub symbols: Vec<f64>,
}

/// ULA steering vector for DOA `doa_deg`; element k carries phase
/// `-2 pi k (d/lambda) cos(theta)`.
pub fn steering_vector(geometry: &ArrayGeometry, doa_deg: f64) -> Result<DVector<Complex64>> {
    if !(doa_deg > 0.0 && doa_deg < 180.0) {
        return Err(Error::Domain(format!(
            "DOA must lie in the open interval (0, 180) degrees, got {doa_deg}"
        )));
    }
    let phase = -2.0 * std::f64::consts::PI
        * geometry.spacing_over_wavelength
        * doa_deg.to_radians().cos();
    Ok(DVector::from_iterator(
        geometry.m,
        (0..geometry.m).map(|k| Complex64::from_polar(1.0, phase * k as f64)),
    ))
}

/// Snapshot synthesizer with cached steering vectors.
///
/// The RNG draw order is fixed and documented: for each active source in
/// order one symbol, then for each array element one real and one imaginary
/// noise component. Two generators seeded identically therefore produce
/// identical snapshot streams.
pub struct SnapshotGen {
    terms: Vec<(DVector<Complex64>, f64)>, // (steering, sqrt(power))
    noise_sd: f64,
    m: usize,
}

impl SnapshotGen {
    pub fn new(geometry: &ArrayGeometry, sources: &[SourceSpec], noise_power: f64) -> Result<Self> {
        let mut gen = Self {
            terms: Vec::new(),
            noise_sd: (noise_power / 2.0).sqrt(),
            m: geometry.m,
        };
        gen.add_sources(geometry, sources)?;
        Ok(gen)
    }

    /// Appends newly active sources (mid-run change events).
    pub fn add_sources(&mut self, geometry: &ArrayGeometry, sources: &[SourceSpec]) -> Result<()> {
        for s in sources {
            self.terms.push((steering_vector(geometry, s.doa_deg)?, s.power.sqrt()));
        }
        Ok(())
    }

    pub fn draw<R: Rng>(&self, index: usize, rng: &mut R) -> Snapshot {
        let mut r = DVector::<Complex64>::zeros(self.m);
        let mut symbols = Vec::with_capacity(self.terms.len());
        for (a, amp) in &self.terms {
            let b: f64 = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            symbols.push(b);
            let scale = Complex64::new(amp * b, 0.0);
            r.axpy(scale, a, Complex64::new(1.0, 0.0));
        }
        for k in 0..self.m {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            r[k] += Complex64::new(re * self.noise_sd, im * self.noise_sd);
        }
        Snapshot { r, index, symbols }
    }
}

/// Draws one snapshot `r = sum_k sqrt(p_k) b_k a(theta_k) + n`.
pub fn next_snapshot<R: Rng>(
    scenario: &ScenarioConfig,
    active_sources: &[SourceSpec],
    index: usize,
    rng: &mut R,
) -> Result<Snapshot> {
    let gen = SnapshotGen::new(&scenario.geometry, active_sources, scenario.noise_power)?;
    Ok(gen.draw(index, rng))
}

/// Exact covariance `R = sum_k p_k a_k a_k^H + sigma_n^2 I`.
pub fn true_covariance(
    geometry: &ArrayGeometry,
    active_sources: &[SourceSpec],
    noise_power: f64,
) -> Result<DMatrix<Complex64>> {
    let m = geometry.m;
    let mut r = DMatrix::<Complex64>::identity(m, m) * Complex64::new(noise_power, 0.0);
    for s in active_sources {
        let a = steering_vector(geometry, s.doa_deg)?;
        r += &a * a.adjoint() * Complex64::new(s.power, 0.0);
    }
    Ok(r)
}

/// Covariance of interference plus noise only (desired source excluded).
pub fn interference_plus_noise_covariance(
    geometry: &ArrayGeometry,
    active_sources: &[SourceSpec],
    noise_power: f64,
) -> Result<DMatrix<Complex64>> {
    let interferers: Vec<SourceSpec> =
        active_sources.iter().filter(|s| !s.is_desired).cloned().collect();
    true_covariance(geometry, &interferers, noise_power)
}

/// Closed-form LCMV solution `w = gamma R^-1 a0 / (a0^H R^-1 a0)`.
pub fn optimal_weights(
    r: &DMatrix<Complex64>,
    a0: &DVector<Complex64>,
    gamma: f64,
) -> Result<DVector<Complex64>> {
    let x = r
        .clone()
        .lu()
        .solve(a0)
        .ok_or_else(|| Error::Numerical("covariance solve failed (singular matrix)".into()))?;
    let den = a0.dotc(&x);
    if den.norm() < 1e-300 {
        return Err(Error::Numerical("degenerate constraint denominator in LCMV solution".into()));
    }
    Ok(&x * (Complex64::new(gamma, 0.0) / den))
}

/// Output SINR in dB given precomputed desired steering vector, desired
/// power and interference-plus-noise covariance.
pub fn sinr_db_with(
    w: &DVector<Complex64>,
    a0: &DVector<Complex64>,
    desired_power: f64,
    r_in: &DMatrix<Complex64>,
) -> f64 {
    let num = desired_power * w.dotc(a0).norm_sqr();
    let den = w.dotc(&(r_in * w)).re.max(1e-300);
    10.0 * (num / den).log10()
}

/// Output SINR in dB: `10 log10(sigma_0^2 |w^H a0|^2 / (w^H R_in w))`.
pub fn sinr_db(
    w: &DVector<Complex64>,
    geometry: &ArrayGeometry,
    active_sources: &[SourceSpec],
    noise_power: f64,
) -> Result<f64> {
    let desired = active_sources
        .iter()
        .find(|s| s.is_desired)
        .ok_or_else(|| Error::Config("no desired source among active sources".into()))?;
    let a0 = steering_vector(geometry, desired.doa_deg)?;
    let r_in = interference_plus_noise_covariance(geometry, active_sources, noise_power)?;
    Ok(sinr_db_with(w, &a0, desired.power, &r_in))
}
