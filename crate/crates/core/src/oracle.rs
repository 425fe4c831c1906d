//! Scalar 1D wave-optics model of the slow axis.
//!
//! The acoustic drive is written onto the aperture as a phase screen, the far
//! field is taken with an FFT, and spot widths are read off the intensity. It
//! shares no code path with [`crate::model`], which it is used to check.
//!
//! A travelling acoustic wave driven with instantaneous frequency f(τ) puts
//! the local grating frequency f(t − d·x/v) at position x, where d = ±1 is the
//! propagation direction. For a linear chirp that integrates to
//!
//! φ(x) = (2π/v)·[(F0 + α t)·x − d·α·x²/(2v)]
//!
//! The DAOD is modelled as two coincident thin elements with opposite d, so
//! the quadratic terms cancel and the linear terms add.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::device::{AodSpec, BeamSpec, ChirpScan, DeviceSpec};
use crate::error::{Error, Result};
use crate::model::{self, Deflector};

/// Minimum samples per phase fringe at the steepest gradient.
pub const MIN_SAMPLES_PER_FRINGE: f64 = 4.0;

/// Knife-edge levels ½·erfc(√2) and its complement: a Gaussian spot crosses
/// them exactly one 1/e² full width apart.
pub const KNIFE_EDGE_LOW: f64 = 0.022_750_131_948_179_2;
pub const KNIFE_EDGE_HIGH: f64 = 1.0 - KNIFE_EDGE_LOW;

const INV_E2: f64 = 0.135_335_283_236_612_7;

/// Acoustic propagation direction of one element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// Sampling of the aperture plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    /// Power of two, at least 1024.
    pub sample_count: usize,
    /// Transverse window, at least 6 w0.
    pub extent: f64,
    /// Zero-padding factor applied before the FFT to refine the angular axis.
    pub pad_factor: usize,
}

impl Grid {
    pub const DEFAULT_SAMPLES: usize = 8192;
    pub const DEFAULT_PAD: usize = 8;

    /// 8192 samples over 8 w0, padded 8x.
    pub fn for_beam(beam: &BeamSpec) -> Self {
        Grid {
            sample_count: Self::DEFAULT_SAMPLES,
            extent: 8.0 * beam.waist_w0,
            pad_factor: Self::DEFAULT_PAD,
        }
    }

    pub fn with_samples(mut self, sample_count: usize) -> Self {
        self.sample_count = sample_count;
        self
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.sample_count as f64
    }

    fn validate(&self, beam: &BeamSpec) -> Result<()> {
        if self.sample_count < 1024 || !self.sample_count.is_power_of_two() {
            return Err(Error::invalid(
                "grid.sample_count",
                format!("must be a power of two >= 1024, got {}", self.sample_count),
            ));
        }
        if !(self.extent >= 6.0 * beam.waist_w0) || !self.extent.is_finite() {
            return Err(Error::invalid(
                "grid.extent",
                format!("{} m is narrower than 6 w0", self.extent),
            ));
        }
        if self.pad_factor == 0 {
            return Err(Error::invalid("grid.pad_factor", "must be >= 1"));
        }
        Ok(())
    }

    fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        let dx = self.spacing();
        let half = (self.sample_count / 2) as f64;
        (0..self.sample_count).map(move |k| (k as f64 - half) * dx)
    }
}

/// Sampled complex field across the aperture.
#[derive(Debug, Clone)]
pub struct FieldProfile {
    pub samples: Vec<Complex64>,
    pub extent: f64,
    pub wavelength: f64,
    pub pad_factor: usize,
}

impl FieldProfile {
    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.samples.len() as f64
    }

    /// ∫|E|² dx.
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.spacing()
    }
}

/// Phase of one element at time `t`, relative to the chirp start.
fn element_phase(x: f64, v: f64, f_now: f64, alpha: f64, direction: f64) -> f64 {
    2.0 * PI / v * (f_now * x - direction * alpha * x * x / (2.0 * v))
}

fn gaussian_truncated(beam: &BeamSpec, aod: &AodSpec, x: f64) -> f64 {
    if x.abs() > 0.5 * aod.aperture {
        0.0
    } else {
        (-(x * x) / (beam.waist_w0 * beam.waist_w0)).exp()
    }
}

/// Largest |dφ/dx| inside the aperture for a set of element directions.
fn max_phase_gradient(aod: &AodSpec, f_now: f64, alpha: f64, directions: &[f64]) -> f64 {
    let v = aod.acoustic_velocity_v;
    let edge = 0.5 * aod.aperture;
    [-edge, edge]
        .iter()
        .map(|&x| {
            directions
                .iter()
                .map(|d| 2.0 * PI / v * (f_now - d * alpha * x / v))
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

fn check_fringe_sampling(grid: &Grid, gradient: f64) -> Result<()> {
    if gradient == 0.0 {
        return Ok(());
    }
    let samples_per_fringe = 2.0 * PI / (gradient * grid.spacing());
    if samples_per_fringe < MIN_SAMPLES_PER_FRINGE {
        return Err(Error::GridResolution {
            samples_per_fringe,
            required: MIN_SAMPLES_PER_FRINGE,
        });
    }
    Ok(())
}

fn build_field(
    beam: &BeamSpec,
    aod: &AodSpec,
    chirp: &ChirpScan,
    t: f64,
    directions: &[f64],
    grid: &Grid,
) -> Result<FieldProfile> {
    grid.validate(beam)?;
    if beam.waist_w0 <= 0.0 {
        return Err(Error::SingularBeam);
    }
    let alpha = chirp.chirp_rate();
    let f_now = chirp.frequency_at(t);
    check_fringe_sampling(grid, max_phase_gradient(aod, f_now, alpha, directions))?;

    let v = aod.acoustic_velocity_v;
    let samples: Vec<Complex64> = grid
        .positions()
        .map(|x| {
            let amplitude = gaussian_truncated(beam, aod, x);
            if amplitude == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let phase: f64 = directions
                .iter()
                .map(|&d| element_phase(x, v, f_now, alpha, d))
                .sum();
            Complex64::from_polar(amplitude, phase)
        })
        .collect();

    let field = FieldProfile {
        samples,
        extent: grid.extent,
        wavelength: beam.wavelength,
        pad_factor: grid.pad_factor,
    };
    let power = field.power();
    if !(power.is_finite() && power > 0.0) {
        return Err(Error::invalid("field", "aperture transmits no power"));
    }
    Ok(field)
}

/// Field behind a single AOD at time `t` into the chirp.
pub fn build_aperture_field(
    beam: &BeamSpec,
    aod: &AodSpec,
    chirp: &ChirpScan,
    t: f64,
    direction: Direction,
    grid: &Grid,
) -> Result<FieldProfile> {
    build_field(beam, aod, chirp, t, &[direction.sign()], grid)
}

/// Field behind the counter-propagating pair, thin coincident elements.
pub fn build_daod_field(
    beam: &BeamSpec,
    aod: &AodSpec,
    chirp: &ChirpScan,
    t: f64,
    grid: &Grid,
) -> Result<FieldProfile> {
    build_field(beam, aod, chirp, t, &[1.0, -1.0], grid)
}

pub fn build_deflector_field(
    deflector: Deflector,
    beam: &BeamSpec,
    aod: &AodSpec,
    chirp: &ChirpScan,
    t: f64,
    grid: &Grid,
) -> Result<FieldProfile> {
    match deflector {
        Deflector::Aod => build_aperture_field(beam, aod, chirp, t, Direction::Forward, grid),
        Deflector::Daod => build_daod_field(beam, aod, chirp, t, grid),
    }
}

/// Far-field intensity against deflection angle.
#[derive(Debug, Clone)]
pub struct FarField {
    /// Peak-normalized intensity.
    pub intensity: Vec<f64>,
    /// Centered, uniformly spaced: θ_k = (k − M/2)·Δθ.
    pub angle_axis: Vec<f64>,
    /// Total power, in the units of [`FieldProfile::power`].
    pub power: f64,
}

impl FarField {
    pub fn angle_step(&self) -> f64 {
        self.angle_axis[1] - self.angle_axis[0]
    }

    /// Peak angle refined by a parabola through log-intensity.
    pub fn peak_angle(&self) -> f64 {
        let (k, _) = self
            .intensity
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        if k == 0 || k + 1 == self.intensity.len() {
            return self.angle_axis[k];
        }
        let (a, b, c) = (
            self.intensity[k - 1].ln(),
            self.intensity[k].ln(),
            self.intensity[k + 1].ln(),
        );
        let denom = a - 2.0 * b + c;
        let offset = if denom.is_finite() && denom != 0.0 {
            0.5 * (a - c) / denom
        } else {
            0.0
        };
        self.angle_axis[k] + offset * self.angle_step()
    }

    /// Fraction of the power at angles below `knife`, splitting the straddled
    /// bin linearly.
    pub fn fraction_below(&self, knife: f64) -> f64 {
        let step = self.angle_step();
        let total: f64 = self.intensity.iter().sum();
        let mut below = 0.0;
        for (&theta, &i) in self.angle_axis.iter().zip(&self.intensity) {
            let lo = theta - 0.5 * step;
            let covered = ((knife - lo) / step).clamp(0.0, 1.0);
            below += covered * i;
        }
        below / total
    }
}

/// Fraunhofer pattern via zero-padded FFT; θ = λ·ν_x.
pub fn far_field(field: &FieldProfile) -> FarField {
    let n = field.sample_count();
    let m = n * field.pad_factor.max(1);
    let mut buffer = vec![Complex64::new(0.0, 0.0); m];
    buffer[..n].copy_from_slice(&field.samples);
    FftPlanner::new().plan_fft_forward(m).process(&mut buffer);

    let dx = field.spacing();
    // Parseval: Σ|E|² dx = (dx / M) Σ|Ẽ|².
    let raw: Vec<f64> = buffer.iter().map(|c| c.norm_sqr()).collect();
    let power = raw.iter().sum::<f64>() * dx / m as f64;

    let half = m / 2;
    let mut intensity = Vec::with_capacity(m);
    intensity.extend_from_slice(&raw[half..]);
    intensity.extend_from_slice(&raw[..half]);
    let peak = intensity.iter().cloned().fold(0.0, f64::max);
    for v in &mut intensity {
        *v /= peak;
    }
    let d_theta = field.wavelength / (m as f64 * dx);
    let angle_axis = (0..m).map(|k| (k as f64 - half as f64) * d_theta).collect();

    FarField {
        intensity,
        angle_axis,
        power,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaistMeasurement {
    /// Half-width at 1/e² of peak intensity, rad.
    pub half_width: f64,
    /// Midpoint of the measured interval, rad.
    pub center: f64,
    /// More than one disjoint region rises above 1/e².
    pub multi_lobe: bool,
}

impl WaistMeasurement {
    pub fn full_width(&self) -> f64 {
        2.0 * self.half_width
    }
}

/// 1/e² half-width of the far field, linearly interpolated between bins.
///
/// With several lobes above threshold the widest contiguous interval is
/// reported and `multi_lobe` is set.
pub fn measure_waist_1e2(farfield: &FarField) -> WaistMeasurement {
    let intensity = &farfield.intensity;
    let theta = &farfield.angle_axis;
    let last = intensity.len() - 1;

    let crossing = |a: usize, b: usize| -> f64 {
        let (ia, ib) = (intensity[a], intensity[b]);
        let s = (INV_E2 - ia) / (ib - ia);
        theta[a] + s * (theta[b] - theta[a])
    };

    let mut best: Option<(f64, f64)> = None;
    let mut lobes = 0;
    let mut k = 0;
    while k <= last {
        if intensity[k] < INV_E2 {
            k += 1;
            continue;
        }
        let start = k;
        while k < last && intensity[k + 1] >= INV_E2 {
            k += 1;
        }
        let end = k;
        lobes += 1;
        let left = if start == 0 { theta[0] } else { crossing(start - 1, start) };
        let right = if end == last { theta[last] } else { crossing(end, end + 1) };
        if best.is_none_or(|(l, r)| right - left > r - l) {
            best = Some((left, right));
        }
        k += 1;
    }
    let (left, right) = best.expect("normalized intensity reaches 1");
    if lobes > 1 {
        log::warn!("far field has {lobes} lobes above 1/e^2; reporting the widest");
    }
    WaistMeasurement {
        half_width: 0.5 * (right - left),
        center: 0.5 * (left + right),
        multi_lobe: lobes > 1,
    }
}

/// Transmitted power behind a fixed knife edge while the spot is scanned.
#[derive(Debug, Clone, Serialize)]
pub struct KnifeEdgeTrace {
    pub times: Vec<f64>,
    /// Fraction of the power on the side the spot leaves.
    pub transmitted: Vec<f64>,
    pub knife_angle: f64,
    /// Time between the [`KNIFE_EDGE_HIGH`] and [`KNIFE_EDGE_LOW`] crossings.
    pub fall_time_1e2: f64,
    /// Angular scan velocity, rad/s.
    pub angular_velocity: f64,
}

impl KnifeEdgeTrace {
    /// Spot width implied by the fall time.
    pub fn width(&self) -> f64 {
        self.fall_time_1e2 * self.angular_velocity.abs()
    }
}

/// Sweeps `chirp` through `deflector` and records the power passing a knife
/// placed at the angular midpoint of the scan.
///
/// The coarse trace samples the whole scan uniformly; each crossing is then
/// resampled with `t_samples` points inside its bracketing interval before
/// interpolating.
pub fn knife_edge_trace(
    device: &DeviceSpec,
    deflector: Deflector,
    chirp: &ChirpScan,
    t_samples: usize,
    grid: &Grid,
) -> Result<KnifeEdgeTrace> {
    if t_samples < 64 {
        return Err(Error::invalid("t_samples", "must be >= 64"));
    }
    let beam = &device.beam;
    let aod = device.aod();
    let passes = f64::from(deflector.element_count());
    let f_mid = 0.5 * (chirp.f_start + chirp.f_end);
    let knife = passes * beam.wavelength * f_mid / aod.acoustic_velocity_v;
    let alpha = chirp.chirp_rate();
    let angular_velocity = passes * beam.wavelength * alpha / aod.acoustic_velocity_v;
    let rising = alpha >= 0.0;

    let transmitted_at = |t: f64| -> Result<f64> {
        let field = build_deflector_field(deflector, beam, aod, chirp, t, grid)?;
        let below = far_field(&field).fraction_below(knife);
        Ok(if rising { below } else { 1.0 - below })
    };
    let sample = |times: &[f64]| -> Result<Vec<f64>> {
        times.par_iter().map(|&t| transmitted_at(t)).collect()
    };

    let step = chirp.t_scan / (t_samples - 1) as f64;
    let times: Vec<f64> = (0..t_samples).map(|k| k as f64 * step).collect();
    let transmitted = sample(&times)?;

    let no_crossing = || Error::NoCrossing { knife_rad: knife };
    let bracket = |level: f64| -> Option<usize> {
        transmitted
            .windows(2)
            .position(|w| w[0] >= level && w[1] < level)
    };
    let refine = |level: f64| -> Result<f64> {
        let k = bracket(level).ok_or_else(no_crossing)?;
        let (t0, t1) = (times[k], times[k + 1]);
        let fine_step = (t1 - t0) / (t_samples - 1) as f64;
        let fine_times: Vec<f64> = (0..t_samples).map(|j| t0 + j as f64 * fine_step).collect();
        let fine = sample(&fine_times)?;
        let j = fine
            .windows(2)
            .position(|w| w[0] >= level && w[1] < level)
            .ok_or_else(no_crossing)?;
        let s = (level - fine[j]) / (fine[j + 1] - fine[j]);
        Ok(fine_times[j] + s * fine_step)
    };

    let t_high = refine(KNIFE_EDGE_HIGH)?;
    let t_low = refine(KNIFE_EDGE_LOW)?;
    Ok(KnifeEdgeTrace {
        times,
        transmitted,
        knife_angle: knife,
        fall_time_1e2: t_low - t_high,
        angular_velocity,
    })
}

/// One oracle point: mid-scan spot width for a given chirp rate.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub alpha_hz_per_s: f64,
    /// Usable band divided by α; infinite for a static tone.
    pub t_scan_s: f64,
    pub width_oracle_rad: f64,
    pub width_eq_s1_rad: f64,
    pub n_dyn_oracle: f64,
    pub n_dyn_closed_form: f64,
    pub device: Deflector,
    pub multi_lobe: bool,
}

/// Oracle width at the middle of a chirp of rate `alpha` across the usable band.
pub fn oracle_point(device: &DeviceSpec, deflector: Deflector, alpha: f64, grid: &Grid) -> Result<SweepRow> {
    let beam = &device.beam;
    let aod = device.aod();
    let band = aod.usable_bandwidth;
    let (chirp, t_scan) = if alpha == 0.0 {
        (ChirpScan::new(aod.center_freq_f0, aod.center_freq_f0, 1.0)?, f64::INFINITY)
    } else {
        let t_scan = band / alpha.abs();
        (ChirpScan::with_rate(aod, alpha, t_scan)?, t_scan)
    };
    let field = build_deflector_field(deflector, beam, aod, &chirp, 0.5 * chirp.t_scan, grid)?;
    let waist = measure_waist_1e2(&far_field(&field));
    let width_oracle = waist.full_width();

    let t_a = model::access_time(beam, aod, Deflector::Aod);
    let n_stat = model::static_resolution(t_a, band, Deflector::Aod);
    let inst_span = match deflector {
        Deflector::Aod => alpha.abs() * t_a,
        Deflector::Daod => 0.0,
    };
    let width_eq_s1 = model::chirp_spread(beam, aod, inst_span)?;
    let span = f64::from(deflector.element_count()) * model::deflection_span(beam, aod, band);

    Ok(SweepRow {
        alpha_hz_per_s: alpha,
        t_scan_s: t_scan,
        width_oracle_rad: width_oracle,
        width_eq_s1_rad: width_eq_s1,
        n_dyn_oracle: span / width_oracle + 1.0,
        n_dyn_closed_form: model::dynamic_resolution(deflector, n_stat, t_a, t_scan),
        device: deflector,
        multi_lobe: waist.multi_lobe,
    })
}

/// Evaluates every (α, deflector) pair in parallel; rows come back in input
/// order, AOD before DAOD for each α.
pub fn sweep(device: &DeviceSpec, alphas: &[f64], grid: &Grid) -> Result<Vec<SweepRow>> {
    let points: Vec<(f64, Deflector)> = alphas
        .iter()
        .flat_map(|&a| [(a, Deflector::Aod), (a, Deflector::Daod)])
        .collect();
    points
        .par_iter()
        .map(|&(a, d)| oracle_point(device, d, a, grid))
        .collect()
}

/// Chirp rates used for the oracle/closed-form comparison.
pub const DEFAULT_ALPHA_SWEEP: [f64; 5] = [0.0, 0.1e13, 0.3e13, 1e13, 3e13];
