//! Closed-form performance figures of the AOD / DAOD slow axis and the
//! VIPA + EOM fast axis.
//!
//! Everything here is a pure function of immutable specs.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::device::{AodSpec, BeamSpec, DeviceSpec, VipaSpec};
use crate::error::{finite, Error, Result};

/// Single AOD or the counter-propagating pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Deflector {
    Aod,
    Daod,
}

impl Deflector {
    pub fn element_count(self) -> u32 {
        match self {
            Deflector::Aod => 1,
            Deflector::Daod => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Deflector::Aod => "AOD",
            Deflector::Daod => "DAOD",
        }
    }
}

/// θ = λ f / v.
///
/// Frequencies outside the AOD's full band are evaluated anyway and logged.
pub fn deflection_angle(beam: &BeamSpec, aod: &AodSpec, f: f64) -> Result<f64> {
    finite("frequency", f)?;
    finite("wavelength", beam.wavelength)?;
    finite("acoustic_velocity", aod.acoustic_velocity_v)?;
    let (lo, hi) = aod.full_band();
    if f != 0.0 && !(lo..=hi).contains(&f) {
        log::warn!("deflection at {f} Hz is outside the AOD band [{lo}, {hi}] Hz");
    }
    Ok(beam.wavelength * f / aod.acoustic_velocity_v)
}

/// Angular span of a frequency range, λ ΔF / v.
pub fn deflection_span(beam: &BeamSpec, aod: &AodSpec, bandwidth: f64) -> f64 {
    beam.wavelength * bandwidth / aod.acoustic_velocity_v
}

/// T_a = 2 w0 / v for one AOD; the counter-propagating pair only needs the
/// acoustic wave to cross half the beam.
pub fn access_time(beam: &BeamSpec, aod: &AodSpec, deflector: Deflector) -> f64 {
    let single = 2.0 * beam.waist_w0 / aod.acoustic_velocity_v;
    match deflector {
        Deflector::Aod => single,
        Deflector::Daod => 0.5 * single,
    }
}

/// N_stat = (π/4) T_a ΔF, doubled for the DAOD.
///
/// `t_a_single` is always the single-AOD access time.
pub fn static_resolution(t_a_single: f64, bandwidth: f64, deflector: Deflector) -> f64 {
    let single = 0.25 * PI * t_a_single * bandwidth;
    single * f64::from(deflector.element_count())
}

/// Angular spread of the deflected beam while `inst_freq_span` of RF is
/// simultaneously inside the crystal: (2/π)(λ/w0) + (λ/v) dF.
///
/// For a linear chirp of rate α the caller passes dF = α T_a.
pub fn chirp_spread(beam: &BeamSpec, aod: &AodSpec, inst_freq_span: f64) -> Result<f64> {
    if beam.waist_w0 == 0.0 {
        return Err(Error::SingularBeam);
    }
    if !(finite("inst_freq_span", inst_freq_span)? >= 0.0) {
        return Err(Error::invalid("inst_freq_span", "must be >= 0"));
    }
    let diffraction = 2.0 / PI * beam.wavelength / beam.waist_w0;
    let chirp = beam.wavelength / aod.acoustic_velocity_v * inst_freq_span;
    Ok(diffraction + chirp)
}

/// Dynamic resolution of a single AOD under a linear scan:
/// N / (1 + N T_a / T_scan) + 1.
///
/// A zero scan time gives the pure diffraction limit of 1.
pub fn dynamic_resolution_aod(n_stat: f64, t_a: f64, t_scan: f64) -> f64 {
    if t_scan <= 0.0 {
        return 1.0;
    }
    n_stat / (1.0 + n_stat * t_a / t_scan) + 1.0
}

/// Dynamic resolution of the DAOD: 2N / (1 + T_a / T_scan) + 1, with N and
/// T_a the single-AOD values.
pub fn dynamic_resolution_daod(n_stat_single: f64, t_a_single: f64, t_scan: f64) -> f64 {
    if t_scan <= 0.0 {
        return 1.0;
    }
    2.0 * n_stat_single / (1.0 + t_a_single / t_scan) + 1.0
}

pub fn dynamic_resolution(
    deflector: Deflector,
    n_stat_single: f64,
    t_a_single: f64,
    t_scan: f64,
) -> f64 {
    match deflector {
        Deflector::Aod => dynamic_resolution_aod(n_stat_single, t_a_single, t_scan),
        Deflector::Daod => dynamic_resolution_daod(n_stat_single, t_a_single, t_scan),
    }
}

/// Scan time at which the resolution term drops to half its static value:
/// N T_a for the AOD, T_a for the DAOD.
pub fn roll_off_scan_time(deflector: Deflector, n_stat_single: f64, t_a_single: f64) -> f64 {
    match deflector {
        Deflector::Aod => n_stat_single * t_a_single,
        Deflector::Daod => t_a_single,
    }
}

/// Focal length of the acoustic lens formed during a chirp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FocalLength {
    /// α = 0: no lensing.
    NoLens,
    /// Signed focal length in metres.
    Finite(f64),
}

impl FocalLength {
    pub fn meters(self) -> Option<f64> {
        match self {
            FocalLength::NoLens => None,
            FocalLength::Finite(f) => Some(f),
        }
    }

    /// Focal shift behind an objective of focal length `f_obj`, -f_obj²/f_AOD.
    pub fn focal_shift(self, f_obj: f64) -> f64 {
        match self {
            FocalLength::NoLens => 0.0,
            FocalLength::Finite(f) => -f_obj * f_obj / f,
        }
    }
}

impl fmt::Display for FocalLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FocalLength::NoLens => write!(f, "no-lens"),
            FocalLength::Finite(m) => write!(f, "{m:.4} m"),
        }
    }
}

/// f_AOD = a² v² / (λ α).
pub fn acoustic_focal_length(beam: &BeamSpec, aod: &AodSpec, alpha: f64) -> FocalLength {
    if alpha == 0.0 {
        return FocalLength::NoLens;
    }
    let a = beam.profile_constant_a;
    let v = aod.acoustic_velocity_v;
    FocalLength::Finite(a * a * v * v / (beam.wavelength * alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VipaMetrics {
    pub resolution: f64,
    pub switch_time_s: f64,
}

/// Resolution FSR/FWHM and linewidth-limited switching time 1/FWHM (unless
/// `switch_time_s` overrides it).
pub fn vipa_metrics(vipa: &VipaSpec) -> VipaMetrics {
    VipaMetrics {
        resolution: vipa.fsr / vipa.fwhm_linewidth,
        switch_time_s: vipa
            .switch_time_override
            .unwrap_or(1.0 / vipa.fwhm_linewidth),
    }
}

/// Fractional fast-axis row of a sideband: (f mod FSR) / FSR × n_rows.
pub fn sideband_position(vipa: &VipaSpec, f_sideband: f64, n_rows: usize) -> f64 {
    f_sideband.rem_euclid(vipa.fsr) / vipa.fsr * n_rows as f64
}

/// Inverse of [`sideband_position`] on `[0, n_rows)`.
pub fn row_to_frequency(vipa: &VipaSpec, row: f64, n_rows: usize) -> f64 {
    row / n_rows as f64 * vipa.fsr
}

/// Values measured on the hardware, quoted next to model output so the
/// deviations stay visible.
pub mod measured {
    /// Single-AOD access time, s.
    pub const ACCESS_TIME_AOD: f64 = 457e-9;
    /// DAOD access time, s.
    pub const ACCESS_TIME_DAOD: f64 = 260e-9;
    /// Dynamic DAOD resolution at a 1 µs scan over 36 MHz.
    pub const DYNAMIC_RESOLUTION_DAOD_1US: f64 = 17.0;
    /// Fast-axis switching time, s (detector-bandwidth limited).
    pub const FAST_SWITCH_TIME: f64 = 4.8e-9;
    /// Spot sizes on the camera, m.
    pub const SPOT_W_X: f64 = 15e-6;
    pub const SPOT_W_Y: f64 = 11.3e-6;
    /// Static resolutions quoted for the full RF band.
    pub const STATIC_RESOLUTION_AOD: f64 = 33.0;
    pub const STATIC_RESOLUTION_DAOD: f64 = 66.0;

    pub fn access_time_ratio() -> f64 {
        ACCESS_TIME_AOD / ACCESS_TIME_DAOD
    }
}

/// Everything `raster model` prints for a device.
#[derive(Debug, Clone, Serialize)]
pub struct ModelReport {
    pub access_time_single_s: f64,
    pub access_time_daod_s: f64,
    pub access_time_ratio_model: f64,
    pub access_time_ratio_measured: f64,
    /// Waist implied by the measured single-AOD access time.
    pub measured_waist_m: f64,
    pub static_resolution_full_band_aod: f64,
    pub static_resolution_full_band_daod: f64,
    pub static_resolution_usable_aod: f64,
    pub static_resolution_usable_daod: f64,
    pub static_resolution_measured_waist_aod: f64,
    pub dynamic_resolution_aod: f64,
    pub dynamic_resolution_daod: f64,
    pub t_scan_s: f64,
    pub vipa: VipaMetrics,
    pub deflection_span_full_rad: f64,
    pub deflection_span_usable_rad: f64,
    pub chirp_rate_hz_per_s: f64,
    #[serde(serialize_with = "serialize_focal")]
    pub acoustic_focal_length: FocalLength,
    pub focal_shift_m: f64,
}

fn serialize_focal<S: serde::Serializer>(f: &FocalLength, s: S) -> Result<S::Ok, S::Error> {
    match f {
        FocalLength::NoLens => s.serialize_str("no-lens"),
        FocalLength::Finite(m) => s.serialize_f64(*m),
    }
}

impl ModelReport {
    /// `alpha` defaults to the usable band swept in `t_scan`.
    pub fn new(device: &DeviceSpec, t_scan: f64, alpha: Option<f64>) -> Self {
        let beam = &device.beam;
        let aod = device.aod();
        let t_a = access_time(beam, aod, Deflector::Aod);
        let t_a_daod = access_time(beam, aod, Deflector::Daod);
        let n_usable = static_resolution(t_a, aod.usable_bandwidth, Deflector::Aod);
        let alpha = alpha.unwrap_or(aod.usable_bandwidth / t_scan);
        let focal = acoustic_focal_length(beam, aod, alpha);
        let measured_waist = 0.5 * measured::ACCESS_TIME_AOD * aod.acoustic_velocity_v;
        ModelReport {
            access_time_single_s: t_a,
            access_time_daod_s: t_a_daod,
            access_time_ratio_model: t_a / t_a_daod,
            access_time_ratio_measured: measured::access_time_ratio(),
            measured_waist_m: measured_waist,
            static_resolution_full_band_aod: static_resolution(t_a, aod.full_bandwidth, Deflector::Aod),
            static_resolution_full_band_daod: static_resolution(t_a, aod.full_bandwidth, Deflector::Daod),
            static_resolution_usable_aod: n_usable,
            static_resolution_usable_daod: static_resolution(t_a, aod.usable_bandwidth, Deflector::Daod),
            static_resolution_measured_waist_aod: static_resolution(
                measured::ACCESS_TIME_AOD,
                aod.full_bandwidth,
                Deflector::Aod,
            ),
            dynamic_resolution_aod: dynamic_resolution_aod(n_usable, t_a, t_scan),
            dynamic_resolution_daod: dynamic_resolution_daod(n_usable, t_a, t_scan),
            t_scan_s: t_scan,
            vipa: vipa_metrics(&device.fast_axis),
            deflection_span_full_rad: deflection_span(beam, aod, aod.full_bandwidth),
            deflection_span_usable_rad: deflection_span(beam, aod, aod.usable_bandwidth),
            chirp_rate_hz_per_s: alpha,
            acoustic_focal_length: focal,
            focal_shift_m: focal.focal_shift(device.relay.objective_focal_f_obj),
        }
    }
}

impl fmt::Display for ModelReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "access time")?;
        writeln!(f, "  T_a single AOD (configured waist)   {:9.1} ns", self.access_time_single_s * 1e9)?;
        writeln!(f, "  T_a DAOD (model)                    {:9.1} ns", self.access_time_daod_s * 1e9)?;
        writeln!(
            f,
            "  T_a single AOD (measured-waist)     {:9.1} ns   w0 = {:.4} mm",
            measured::ACCESS_TIME_AOD * 1e9,
            self.measured_waist_m * 1e3
        )?;
        writeln!(f, "  T_a DAOD (measured)                 {:9.1} ns", measured::ACCESS_TIME_DAOD * 1e9)?;
        writeln!(
            f,
            "  single/DAOD ratio: model {:.3}, measured {:.2} (deviation from the ideal halving)",
            self.access_time_ratio_model, self.access_time_ratio_measured
        )?;
        writeln!(f, "static resolution")?;
        writeln!(
            f,
            "  full band:   AOD {:.2}  DAOD {:.2}   (measured-waist AOD {:.2}; quoted 33 / 66)",
            self.static_resolution_full_band_aod,
            self.static_resolution_full_band_daod,
            self.static_resolution_measured_waist_aod
        )?;
        writeln!(
            f,
            "  usable band: AOD {:.2}  DAOD {:.2}",
            self.static_resolution_usable_aod, self.static_resolution_usable_daod
        )?;
        writeln!(f, "dynamic resolution at T_scan = {:.3} us (usable band)", self.t_scan_s * 1e6)?;
        writeln!(
            f,
            "  AOD {:.2}  DAOD {:.2}   (measured DAOD {})",
            self.dynamic_resolution_aod,
            self.dynamic_resolution_daod,
            measured::DYNAMIC_RESOLUTION_DAOD_1US
        )?;
        writeln!(f, "fast axis")?;
        writeln!(
            f,
            "  VIPA resolution {:.2}, switch time {:.3} ns (measured {} ns, detector limited)",
            self.vipa.resolution,
            self.vipa.switch_time_s * 1e9,
            measured::FAST_SWITCH_TIME * 1e9
        )?;
        writeln!(f, "deflection")?;
        writeln!(
            f,
            "  span full band {:.3} mrad, usable band {:.3} mrad",
            self.deflection_span_full_rad * 1e3,
            self.deflection_span_usable_rad * 1e3
        )?;
        writeln!(f, "acoustic lens at alpha = {:.4e} Hz/s", self.chirp_rate_hz_per_s)?;
        writeln!(f, "  f_AOD {}", self.acoustic_focal_length)?;
        write!(f, "  focal shift {:.4} mm", self.focal_shift_m * 1e3)
    }
}
