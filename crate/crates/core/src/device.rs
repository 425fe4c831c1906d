//! Typed parameterization of the rastering device.
//!
//! All quantities are SI. The JSON form spells the unit into every field name
//! (`acoustic_velocity_m_per_s`, `fsr_hz`, ...) so a config can be read without
//! guessing units.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};

/// Acoustic-lens constant for a TEM00 input beam.
pub const DEFAULT_PROFILE_CONSTANT: f64 = 1.34;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    #[serde(rename = "wavelength_m")]
    pub wavelength: f64,
    /// 1/e² field radius at the deflector.
    #[serde(rename = "waist_m")]
    pub waist_w0: f64,
    #[serde(rename = "profile_constant_a", default = "default_profile_constant")]
    pub profile_constant_a: f64,
}

fn default_profile_constant() -> f64 {
    DEFAULT_PROFILE_CONSTANT
}

impl BeamSpec {
    pub fn validate(&self) -> Result<()> {
        positive("beam.wavelength_m", self.wavelength)?;
        if !(finite("beam.waist_m", self.waist_w0)? >= 0.0) {
            return Err(Error::invalid("beam.waist_m", "must be >= 0"));
        }
        positive("beam.profile_constant_a", self.profile_constant_a)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AodSpec {
    #[serde(rename = "acoustic_velocity_m_per_s")]
    pub acoustic_velocity_v: f64,
    #[serde(rename = "aperture_m")]
    pub aperture: f64,
    #[serde(rename = "center_frequency_hz")]
    pub center_freq_f0: f64,
    #[serde(rename = "full_bandwidth_hz")]
    pub full_bandwidth: f64,
    #[serde(rename = "usable_bandwidth_hz")]
    pub usable_bandwidth: f64,
    pub peak_efficiency: f64,
}

impl AodSpec {
    pub fn validate(&self) -> Result<()> {
        positive("aod.acoustic_velocity_m_per_s", self.acoustic_velocity_v)?;
        positive("aod.aperture_m", self.aperture)?;
        finite("aod.center_frequency_hz", self.center_freq_f0)?;
        positive("aod.full_bandwidth_hz", self.full_bandwidth)?;
        positive("aod.usable_bandwidth_hz", self.usable_bandwidth)?;
        if self.usable_bandwidth > self.full_bandwidth {
            return Err(Error::invalid(
                "aod.usable_bandwidth_hz",
                format!(
                    "{} exceeds full bandwidth {}",
                    self.usable_bandwidth, self.full_bandwidth
                ),
            ));
        }
        fraction("aod.peak_efficiency", self.peak_efficiency)?;
        Ok(())
    }

    /// Checks the beam fits through the aperture.
    pub fn validate_against(&self, beam: &BeamSpec) -> Result<()> {
        if self.aperture < 2.0 * beam.waist_w0 {
            return Err(Error::invalid(
                "aod.aperture_m",
                format!(
                    "aperture {} m is smaller than the beam diameter 2*w0 = {} m",
                    self.aperture,
                    2.0 * beam.waist_w0
                ),
            ));
        }
        Ok(())
    }

    /// Edges of the usable band, centered on F0.
    pub fn usable_band(&self) -> (f64, f64) {
        let half = 0.5 * self.usable_bandwidth;
        (self.center_freq_f0 - half, self.center_freq_f0 + half)
    }

    pub fn full_band(&self) -> (f64, f64) {
        let half = 0.5 * self.full_bandwidth;
        (self.center_freq_f0 - half, self.center_freq_f0 + half)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DaodGeometry {
    CounterPropagating,
}

/// Two identical AODs with counter-propagating acoustic waves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DaodSpec {
    pub element: AodSpec,
    pub geometry: DaodGeometry,
    /// Measured diffraction efficiency of the pair.
    #[serde(default)]
    pub pair_efficiency: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VipaSpec {
    #[serde(rename = "fsr_hz")]
    pub fsr: f64,
    #[serde(rename = "fwhm_linewidth_hz")]
    pub fwhm_linewidth: f64,
    pub reflectivity: f64,
    #[serde(rename = "thickness_m")]
    pub thickness: f64,
    /// Overrides the linewidth-limited switching time `1/FWHM`.
    #[serde(rename = "switch_time_s", default, skip_serializing_if = "Option::is_none")]
    pub switch_time_override: Option<f64>,
}

impl VipaSpec {
    pub fn validate(&self) -> Result<()> {
        positive("vipa.fsr_hz", self.fsr)?;
        positive("vipa.fwhm_linewidth_hz", self.fwhm_linewidth)?;
        if self.fwhm_linewidth >= self.fsr {
            return Err(Error::invalid(
                "vipa.fwhm_linewidth_hz",
                "linewidth must be smaller than the free spectral range",
            ));
        }
        if !(finite("vipa.reflectivity", self.reflectivity)? > 0.0 && self.reflectivity < 1.0) {
            return Err(Error::invalid("vipa.reflectivity", "must lie in (0, 1)"));
        }
        positive("vipa.thickness_m", self.thickness)?;
        if let Some(t) = self.switch_time_override {
            positive("vipa.switch_time_s", t)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EomSpec {
    #[serde(rename = "sideband_min_hz")]
    pub sideband_min: f64,
    #[serde(rename = "sideband_max_hz")]
    pub sideband_max: f64,
    pub transmission: f64,
}

impl EomSpec {
    pub fn validate(&self) -> Result<()> {
        positive("eom.sideband_min_hz", self.sideband_min)?;
        finite("eom.sideband_max_hz", self.sideband_max)?;
        if self.sideband_max <= self.sideband_min {
            return Err(Error::invalid(
                "eom.sideband_max_hz",
                "must exceed sideband_min_hz",
            ));
        }
        fraction("eom.transmission", self.transmission)
    }

    pub fn contains(&self, frequency: f64) -> bool {
        frequency >= self.sideband_min && frequency <= self.sideband_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaySpec {
    #[serde(rename = "objective_focal_length_m")]
    pub objective_focal_f_obj: f64,
}

/// Linear RF sweep on the slow axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpScan {
    #[serde(rename = "f_start_hz")]
    pub f_start: f64,
    #[serde(rename = "f_end_hz")]
    pub f_end: f64,
    #[serde(rename = "t_scan_s")]
    pub t_scan: f64,
}

impl ChirpScan {
    pub fn new(f_start: f64, f_end: f64, t_scan: f64) -> Result<Self> {
        finite("chirp.f_start_hz", f_start)?;
        finite("chirp.f_end_hz", f_end)?;
        positive("chirp.t_scan_s", t_scan)?;
        Ok(Self {
            f_start,
            f_end,
            t_scan,
        })
    }

    /// Sweep across the usable band of `aod`, centered on F0.
    pub fn across_usable_band(aod: &AodSpec, t_scan: f64) -> Result<Self> {
        let (lo, hi) = aod.usable_band();
        Self::new(lo, hi, t_scan)
    }

    /// Chirp with a given rate, centered on F0. Zero rate gives a static tone
    /// held for `t_scan`.
    pub fn with_rate(aod: &AodSpec, alpha: f64, t_scan: f64) -> Result<Self> {
        let span = alpha * t_scan;
        Self::new(
            aod.center_freq_f0 - 0.5 * span,
            aod.center_freq_f0 + 0.5 * span,
            t_scan,
        )
    }

    pub fn chirp_rate(&self) -> f64 {
        (self.f_end - self.f_start) / self.t_scan
    }

    pub fn span(&self) -> f64 {
        self.f_end - self.f_start
    }

    pub fn frequency_at(&self, t: f64) -> f64 {
        self.f_start + self.chirp_rate() * t
    }

    pub fn validate_against(&self, aod: &AodSpec) -> Result<()> {
        if self.span().abs() > aod.usable_bandwidth * (1.0 + 1e-12) {
            return Err(Error::invalid(
                "chirp",
                format!(
                    "sweep span {} Hz exceeds the usable bandwidth {} Hz",
                    self.span().abs(),
                    aod.usable_bandwidth
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub beam: BeamSpec,
    pub slow_axis: DaodSpec,
    pub fast_axis: VipaSpec,
    pub eom: EomSpec,
    pub relay: RelaySpec,
    #[serde(rename = "raster_period_s")]
    pub raster_period: f64,
}

impl DeviceSpec {
    pub fn aod(&self) -> &AodSpec {
        &self.slow_axis.element
    }

    pub fn validate(&self) -> Result<()> {
        self.beam.validate()?;
        self.slow_axis.element.validate()?;
        self.slow_axis.element.validate_against(&self.beam)?;
        if let Some(eff) = self.slow_axis.pair_efficiency {
            fraction("slow_axis.pair_efficiency", eff)?;
        }
        self.fast_axis.validate()?;
        self.eom.validate()?;
        positive(
            "relay.objective_focal_length_m",
            self.relay.objective_focal_f_obj,
        )?;
        positive("raster_period_s", self.raster_period)?;
        Ok(())
    }

    /// Parses and validates a JSON device description.
    ///
    /// `beam.waist_m` may be omitted, in which case the waist is set to half
    /// the AOD aperture. The returned spec always carries an explicit waist.
    pub fn from_json_str(source_name: &str, text: &str) -> Result<Self> {
        let file: DeviceFile = parse_json(source_name, text)?;
        let spec = file.resolve();
        spec.validate().map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            message: e.to_string(),
        })?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&path.display().to_string(), &text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("device spec serializes")
    }

    /// The hardware described in the bundled `brimrose_ted150.json`.
    pub fn brimrose_ted150() -> Self {
        let element = AodSpec {
            acoustic_velocity_v: 4200.0,
            aperture: 1.8e-3,
            center_freq_f0: 150e6,
            full_bandwidth: 100e6,
            usable_bandwidth: 36e6,
            peak_efficiency: 0.5,
        };
        DeviceSpec {
            beam: BeamSpec {
                wavelength: 785e-9,
                waist_w0: element.aperture / 2.0,
                profile_constant_a: DEFAULT_PROFILE_CONSTANT,
            },
            slow_axis: DaodSpec {
                element,
                geometry: DaodGeometry::CounterPropagating,
                pair_efficiency: Some(0.25),
            },
            fast_axis: VipaSpec {
                fsr: 50e9,
                fwhm_linewidth: 1.2e9,
                reflectivity: 0.95,
                thickness: 2e-3,
                switch_time_override: None,
            },
            eom: EomSpec {
                sideband_min: 0.1e9,
                sideband_max: 25.5e9,
                transmission: 0.3,
            },
            relay: RelaySpec {
                objective_focal_f_obj: 30e-3,
            },
            raster_period: 1e-6,
        }
    }

    /// Same hardware driven across the full RF band with the EOM covering the
    /// whole VIPA free spectral range.
    pub fn brimrose_ted150_full_band() -> Self {
        let mut spec = Self::brimrose_ted150();
        spec.slow_axis.element.usable_bandwidth = spec.slow_axis.element.full_bandwidth;
        spec.eom.sideband_max = spec.fast_axis.fsr;
        spec
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceFile {
    beam: BeamFile,
    slow_axis: DaodSpec,
    fast_axis: VipaSpec,
    eom: EomSpec,
    relay: RelaySpec,
    raster_period_s: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BeamFile {
    wavelength_m: f64,
    #[serde(default)]
    waist_m: Option<f64>,
    #[serde(default = "default_profile_constant")]
    profile_constant_a: f64,
}

impl DeviceFile {
    fn resolve(self) -> DeviceSpec {
        let waist = self
            .beam
            .waist_m
            .unwrap_or(self.slow_axis.element.aperture / 2.0);
        DeviceSpec {
            beam: BeamSpec {
                wavelength: self.beam.wavelength_m,
                waist_w0: waist,
                profile_constant_a: self.beam.profile_constant_a,
            },
            slow_axis: self.slow_axis,
            fast_axis: self.fast_axis,
            eom: self.eom,
            relay: self.relay,
            raster_period: self.raster_period_s,
        }
    }
}

/// Deserializes JSON, reporting the failing field path and line/column.
pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(source_name: &str, text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        Error::Parse {
            source_name: source_name.to_string(),
            message: format!(
                "line {} column {}, at `{}`: {}",
                inner.line(),
                inner.column(),
                path,
                inner
            ),
        }
    })
}

pub(crate) fn positive(name: &str, value: f64) -> Result<f64> {
    if finite(name, value)? > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {value}")))
    }
}

pub(crate) fn fraction(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&finite(name, value)?) {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in [0, 1], got {value}")))
    }
}
