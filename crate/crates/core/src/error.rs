use thiserror::Error;

/// Which raster axis a resolution limit applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// DAOD columns.
    Slow,
    /// VIPA/EOM rows.
    Fast,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Slow => write!(f, "slow (DAOD columns)"),
            Axis::Fast => write!(f, "fast (VIPA rows)"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("beam waist is zero; diffraction-limited spread is singular")]
    SingularBeam,

    #[error(
        "grid too coarse: {samples_per_fringe:.2} samples per fringe at the steepest phase gradient, need at least {required}"
    )]
    GridResolution { samples_per_fringe: f64, required: f64 },

    #[error("{axis} resolution exceeded: requested {requested}, available {available:.3} (over by {:.3})", *requested as f64 - available)]
    ResolutionExceeded {
        axis: Axis,
        requested: usize,
        available: f64,
    },

    #[error("row {row} needs a tone at {frequency_hz:.6e} Hz, outside the EOM band [{min_hz:.6e}, {max_hz:.6e}] Hz")]
    ToneOutOfBand {
        row: usize,
        frequency_hz: f64,
        min_hz: f64,
        max_hz: f64,
    },

    #[error("knife edge at {knife_rad:.6e} rad is never crossed by the scanned spot")]
    NoCrossing { knife_rad: f64 },

    #[error("initial configuration has {initial} atoms but target has {target}")]
    MismatchedCounts { initial: usize, target: usize },

    #[error("{which} atom {index} at ({x_um}, {y_um}) um lies outside the bounds")]
    OutOfBounds {
        which: &'static str,
        index: usize,
        x_um: f64,
        y_um: f64,
    },

    #[error("malformed schedule: {0}")]
    MalformedSchedule(String),

    #[error("{source_name}: {message}")]
    Parse { source_name: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Rejects NaN and infinities.
pub(crate) fn finite(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be finite, got {value}")))
    }
}
