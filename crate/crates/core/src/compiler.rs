//! Lowers a 2D intensity pattern to a timed drive schedule and checks the
//! result against the device's physical limits.
//!
//! Column `j` of an `n`-column pattern is lit while the slow-axis chirp sweeps
//! through the `j`-th of `n` equal time windows of the scan; inside that
//! window the EOM emits one sideband per lit row.

use std::fmt;

use serde::Serialize;

use crate::device::{ChirpScan, DeviceSpec};
use crate::error::{Axis, Error, Result};
use crate::model::{self, Deflector};

/// Relative slack allowed on boundary comparisons.
const BOUNDARY_RTOL: f64 = 1e-9;

/// Intensity pattern, `n_cols` slow-axis positions by `n_rows` fast-axis rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    n_cols: usize,
    n_rows: usize,
    /// Column-major: `weights[c * n_rows + r]`.
    weights: Vec<f64>,
}

impl Pattern {
    pub fn new(n_cols: usize, n_rows: usize) -> Result<Self> {
        if n_cols == 0 || n_rows == 0 {
            return Err(Error::invalid("pattern", "needs at least one column and one row"));
        }
        Ok(Pattern {
            n_cols,
            n_rows,
            weights: vec![0.0; n_cols * n_rows],
        })
    }

    pub fn filled(n_cols: usize, n_rows: usize, weight: f64) -> Result<Self> {
        let mut p = Self::new(n_cols, n_rows)?;
        check_weight(weight)?;
        p.weights.fill(weight);
        Ok(p)
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.weights[col * self.n_rows + row]
    }

    pub fn set(&mut self, col: usize, row: usize, weight: f64) -> Result<()> {
        if col >= self.n_cols || row >= self.n_rows {
            return Err(Error::invalid(
                "pattern",
                format!("cell ({col}, {row}) outside {}x{}", self.n_cols, self.n_rows),
            ));
        }
        check_weight(weight)?;
        self.weights[col * self.n_rows + row] = weight;
        Ok(())
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.weights[col * self.n_rows..(col + 1) * self.n_rows]
    }

    /// Lit cells as `(col, row, weight)`.
    pub fn lit_cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_cols).flat_map(move |c| {
            self.column(c)
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(move |(r, &w)| (c, r, w))
        })
    }
}

fn check_weight(w: f64) -> Result<()> {
    if (0.0..=1.0).contains(&w) {
        Ok(())
    } else {
        Err(Error::invalid("pattern weight", format!("{w} not in [0, 1]")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tone {
    pub frequency_hz: f64,
    /// Square root of the cell's intensity weight.
    pub amplitude_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnEvent {
    pub t_start: f64,
    pub t_end: f64,
    pub column_index: usize,
    /// Slow-axis RF frequency at the window center.
    pub slow_frequency_hz: f64,
    pub tones: Vec<Tone>,
}

impl ColumnEvent {
    pub fn dwell(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveSchedule {
    pub chirp: ChirpScan,
    /// Dead time after each sweep before the next starts.
    pub retrace: f64,
    /// Number of fast-axis rows the FSR is divided into.
    pub n_rows: usize,
    pub column_events: Vec<ColumnEvent>,
}

impl DriveSchedule {
    pub fn n_cols(&self) -> usize {
        self.column_events.len()
    }

    /// Checks windows are ordered, disjoint, equal, and tile `[0, t_scan]`
    /// to within 1 ps.
    pub fn check_well_formed(&self) -> Result<()> {
        const PS: f64 = 1e-12;
        let n = self.n_cols();
        if n == 0 {
            return Err(Error::MalformedSchedule("no column events".into()));
        }
        if self.n_rows == 0 {
            return Err(Error::MalformedSchedule("n_rows is zero".into()));
        }
        if !(self.retrace >= 0.0) {
            return Err(Error::MalformedSchedule("negative retrace".into()));
        }
        let dwell = self.chirp.t_scan / n as f64;
        let mut cursor = 0.0;
        for (j, ev) in self.column_events.iter().enumerate() {
            if ev.column_index != j {
                return Err(Error::MalformedSchedule(format!(
                    "event {j} carries column index {}",
                    ev.column_index
                )));
            }
            if (ev.t_start - cursor).abs() > PS {
                return Err(Error::MalformedSchedule(format!(
                    "column {j} starts at {} s, expected {cursor} s",
                    ev.t_start
                )));
            }
            if (ev.dwell() - dwell).abs() > PS {
                return Err(Error::MalformedSchedule(format!(
                    "column {j} dwell {} s differs from {dwell} s",
                    ev.dwell()
                )));
            }
            cursor = ev.t_end;
        }
        if (cursor - self.chirp.t_scan).abs() > PS {
            return Err(Error::MalformedSchedule(format!(
                "windows end at {cursor} s, scan ends at {} s",
                self.chirp.t_scan
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CompileOptions {
    /// Retrace dead time; defaults to one single-AOD access time.
    pub retrace: Option<f64>,
}

/// Largest column count the DAOD resolves at `t_scan` over the usable band.
pub fn max_columns(device: &DeviceSpec, t_scan: f64) -> f64 {
    let aod = device.aod();
    let t_a = model::access_time(&device.beam, aod, Deflector::Aod);
    let n = model::static_resolution(t_a, aod.usable_bandwidth, Deflector::Aod);
    model::dynamic_resolution_daod(n, t_a, t_scan)
}

pub fn max_rows(device: &DeviceSpec) -> f64 {
    model::vipa_metrics(&device.fast_axis).resolution
}

/// Checks a pattern fits the device's resolution at `t_scan`.
pub fn check_resolution(pattern: &Pattern, device: &DeviceSpec, t_scan: f64) -> Result<()> {
    let cols = max_columns(device, t_scan);
    if pattern.n_cols() as f64 > cols.floor() {
        return Err(Error::ResolutionExceeded {
            axis: Axis::Slow,
            requested: pattern.n_cols(),
            available: cols,
        });
    }
    let rows = max_rows(device);
    if pattern.n_rows() as f64 > rows.floor() {
        return Err(Error::ResolutionExceeded {
            axis: Axis::Fast,
            requested: pattern.n_rows(),
            available: rows,
        });
    }
    Ok(())
}

/// EOM sideband frequency addressing `row`; rows sit at half-integer
/// positions of the FSR map so row 0 is not the carrier.
pub fn row_frequency(device: &DeviceSpec, row: usize, n_rows: usize) -> f64 {
    model::row_to_frequency(&device.fast_axis, row as f64 + 0.5, n_rows)
}

pub fn compile(
    pattern: &Pattern,
    device: &DeviceSpec,
    t_scan: f64,
    options: CompileOptions,
) -> Result<DriveSchedule> {
    let aod = device.aod();
    let chirp = ChirpScan::across_usable_band(aod, t_scan)?;
    check_resolution(pattern, device, t_scan)?;

    let n_cols = pattern.n_cols();
    let n_rows = pattern.n_rows();
    let row_freqs: Vec<f64> = (0..n_rows).map(|r| row_frequency(device, r, n_rows)).collect();

    let retrace = match options.retrace {
        Some(r) if r >= 0.0 && r.is_finite() => r,
        Some(r) => return Err(Error::invalid("retrace", format!("must be >= 0, got {r}"))),
        None => model::access_time(&device.beam, aod, Deflector::Aod),
    };

    let df = chirp.span() / n_cols as f64;
    let mut column_events = Vec::with_capacity(n_cols);
    for c in 0..n_cols {
        let mut tones = Vec::new();
        for (r, &w) in pattern.column(c).iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let f = row_freqs[r];
            if !device.eom.contains(f) {
                return Err(Error::ToneOutOfBand {
                    row: r,
                    frequency_hz: f,
                    min_hz: device.eom.sideband_min,
                    max_hz: device.eom.sideband_max,
                });
            }
            tones.push(Tone {
                frequency_hz: f,
                amplitude_weight: w.sqrt(),
            });
        }
        column_events.push(ColumnEvent {
            t_start: c as f64 * t_scan / n_cols as f64,
            t_end: (c + 1) as f64 * t_scan / n_cols as f64,
            column_index: c,
            slow_frequency_hz: chirp.f_start + (c as f64 + 0.5) * df,
            tones,
        });
    }

    Ok(DriveSchedule {
        chirp,
        retrace,
        n_rows,
        column_events,
    })
}

/// Recovers the pattern a schedule draws: column index, tone to row through
/// the FSR map, amplitude² to intensity.
pub fn decode(schedule: &DriveSchedule, device: &DeviceSpec) -> Result<Pattern> {
    let mut pattern = Pattern::new(schedule.n_cols(), schedule.n_rows)?;
    for ev in &schedule.column_events {
        for tone in &ev.tones {
            let pos = model::sideband_position(&device.fast_axis, tone.frequency_hz, schedule.n_rows);
            let row = pos.floor() as usize;
            let w = tone.amplitude_weight * tone.amplitude_weight;
            pattern.set(ev.column_index, row, w.min(1.0))?;
        }
    }
    Ok(pattern)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingReport {
    pub refresh_rate_hz: f64,
    pub duty: f64,
    pub column_dwell_s: f64,
}

pub fn timing_report(schedule: &DriveSchedule) -> TimingReport {
    let t_scan = schedule.chirp.t_scan;
    let period = t_scan + schedule.retrace;
    TimingReport {
        refresh_rate_hz: 1.0 / period,
        duty: t_scan / period,
        column_dwell_s: t_scan / schedule.n_cols() as f64,
    }
}

/// Limits relevant to trapping and moving atoms with the raster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShuttleConstraints {
    pub f_trap: f64,
    /// How many times 2·f_trap the raster rate must reach.
    pub heating_margin: f64,
    /// Largest per-cycle displacement, m.
    pub step_max: f64,
    /// Fast-axis switching time, s.
    pub t_fast: f64,
}

impl ShuttleConstraints {
    pub const DEFAULT_F_TRAP: f64 = 50e3;
    pub const DEFAULT_HEATING_MARGIN: f64 = 10.0;
    pub const DEFAULT_STEP_MAX: f64 = 100e-9;

    /// Defaults with `t_fast` taken from the device's VIPA.
    pub fn for_device(device: &DeviceSpec) -> Self {
        ShuttleConstraints {
            f_trap: Self::DEFAULT_F_TRAP,
            heating_margin: Self::DEFAULT_HEATING_MARGIN,
            step_max: Self::DEFAULT_STEP_MAX,
            t_fast: model::vipa_metrics(&device.fast_axis).switch_time_s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        use crate::device::positive;
        positive("f_trap", self.f_trap)?;
        positive("heating_margin", self.heating_margin)?;
        positive("step_max", self.step_max)?;
        positive("t_fast", self.t_fast)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ConstraintId {
    /// Raster rate well above twice the trap frequency.
    #[serde(rename = "C1")]
    C1RasterRate,
    /// Fast axis keeps pace with the slow axis: t_fast ≤ T_a / n_cols.
    #[serde(rename = "C2")]
    C2Switching,
    /// Column count within DAOD dynamic resolution.
    #[serde(rename = "C3")]
    C3SlowResolution,
    /// Row count within VIPA resolution.
    #[serde(rename = "C4")]
    C4FastResolution,
    /// Every tone inside the EOM band.
    #[serde(rename = "C5")]
    C5ToneBand,
    /// Column dwell at least one fast switching time.
    #[serde(rename = "C6")]
    C6Dwell,
}

impl ConstraintId {
    pub const ALL: [ConstraintId; 6] = [
        ConstraintId::C1RasterRate,
        ConstraintId::C2Switching,
        ConstraintId::C3SlowResolution,
        ConstraintId::C4FastResolution,
        ConstraintId::C5ToneBand,
        ConstraintId::C6Dwell,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ConstraintId::C1RasterRate => "C1",
            ConstraintId::C2Switching => "C2",
            ConstraintId::C3SlowResolution => "C3",
            ConstraintId::C4FastResolution => "C4",
            ConstraintId::C5ToneBand => "C5",
            ConstraintId::C6Dwell => "C6",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ConstraintId::C1RasterRate => "raster rate >= heating_margin * 2 f_trap [Hz]",
            ConstraintId::C2Switching => "t_fast <= T_a(single) / n_cols [s]",
            ConstraintId::C3SlowResolution => "n_cols <= N_dyn DAOD(t_scan)",
            ConstraintId::C4FastResolution => "n_rows <= VIPA resolution",
            ConstraintId::C5ToneBand => "tones inside EOM band (slack to nearest edge) [Hz]",
            ConstraintId::C6Dwell => "column dwell >= t_fast [s]",
        }
    }
}

/// One evaluated constraint. `margin` is the signed slack in the constraint's
/// own units; it is negative exactly when the check fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintResult {
    pub id: ConstraintId,
    pub required: f64,
    pub actual: f64,
    pub pass: bool,
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl ConstraintResult {
    fn at_least(id: ConstraintId, actual: f64, required: f64) -> Self {
        let pass = actual >= required * (1.0 - BOUNDARY_RTOL);
        ConstraintResult {
            id,
            required,
            actual,
            pass,
            margin: if pass { (actual - required).max(0.0) } else { actual - required },
            detail: None,
        }
    }

    fn at_most(id: ConstraintId, actual: f64, required: f64) -> Self {
        let pass = actual <= required * (1.0 + BOUNDARY_RTOL);
        ConstraintResult {
            id,
            required,
            actual,
            pass,
            margin: if pass { (required - actual).max(0.0) } else { required - actual },
            detail: None,
        }
    }
}

/// C1 on its own.
pub fn raster_rate_constraint(refresh_rate: f64, constraints: &ShuttleConstraints) -> ConstraintResult {
    ConstraintResult::at_least(
        ConstraintId::C1RasterRate,
        refresh_rate,
        constraints.heating_margin * 2.0 * constraints.f_trap,
    )
}

/// C2 on its own.
pub fn switching_constraint(t_fast: f64, t_a_single: f64, n_cols: usize) -> ConstraintResult {
    ConstraintResult::at_most(ConstraintId::C2Switching, t_fast, t_a_single / n_cols as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub results: Vec<ConstraintResult>,
}

impl ConstraintReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn get(&self, id: ConstraintId) -> &ConstraintResult {
        self.results
            .iter()
            .find(|r| r.id == id)
            .expect("report covers every constraint")
    }
}

impl fmt::Display for ConstraintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<4} {:<6} {:>14} {:>14} {:>14}  description", "id", "status", "required", "actual", "margin")?;
        for r in &self.results {
            write!(
                f,
                "{:<4} {:<6} {:>14.6e} {:>14.6e} {:>14.6e}  {}",
                r.id.code(),
                if r.pass { "pass" } else { "FAIL" },
                r.required,
                r.actual,
                r.margin,
                r.id.description()
            )?;
            if let Some(d) = &r.detail {
                write!(f, " ({d})")?;
            }
            writeln!(f)?;
        }
        write!(f, "overall: {}", if self.all_pass() { "pass" } else { "FAIL" })
    }
}

/// Evaluates C1 to C6. Failures are report entries, not errors.
pub fn validate(
    schedule: &DriveSchedule,
    device: &DeviceSpec,
    constraints: &ShuttleConstraints,
) -> ConstraintReport {
    let aod = device.aod();
    let t_a = model::access_time(&device.beam, aod, Deflector::Aod);
    let timing = timing_report(schedule);
    let n_cols = schedule.n_cols();

    let n_stat = model::static_resolution(t_a, schedule.chirp.span().abs(), Deflector::Aod);
    let n_dyn = model::dynamic_resolution_daod(n_stat, t_a, schedule.chirp.t_scan);
    let vipa_res = model::vipa_metrics(&device.fast_axis).resolution;

    let eom = &device.eom;
    let mut band_slack = f64::INFINITY;
    let mut offenders = Vec::new();
    let mut out_of_band = 0usize;
    for ev in &schedule.column_events {
        for tone in &ev.tones {
            let f = tone.frequency_hz;
            let slack = (f - eom.sideband_min).min(eom.sideband_max - f);
            band_slack = band_slack.min(slack);
            if !eom.contains(f) {
                out_of_band += 1;
                let row = model::sideband_position(&device.fast_axis, f, schedule.n_rows).floor() as usize;
                offenders.push(format!("col {} row {row} at {f:.4e} Hz", ev.column_index));
            }
        }
    }
    let tone_band = ConstraintResult {
        id: ConstraintId::C5ToneBand,
        required: 0.0,
        actual: out_of_band as f64,
        pass: out_of_band == 0,
        margin: if band_slack.is_finite() { band_slack } else { 0.0 },
        detail: if offenders.is_empty() {
            None
        } else {
            Some(format!("out of band: {}", offenders.join(", ")))
        },
    };

    let results = vec![
        raster_rate_constraint(timing.refresh_rate_hz, constraints),
        switching_constraint(constraints.t_fast, t_a, n_cols),
        ConstraintResult::at_most(ConstraintId::C3SlowResolution, n_cols as f64, n_dyn),
        ConstraintResult::at_most(ConstraintId::C4FastResolution, schedule.n_rows as f64, vipa_res),
        tone_band,
        ConstraintResult::at_least(ConstraintId::C6Dwell, timing.column_dwell_s, constraints.t_fast),
    ];
    debug_assert_eq!(results.len(), ConstraintId::ALL.len());
    ConstraintReport { results }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn full_band() -> DeviceSpec {
        DeviceSpec::brimrose_ted150_full_band()
    }

    fn ideal() -> CompileOptions {
        CompileOptions { retrace: Some(0.0) }
    }

    #[test]
    fn forty_by_forty_at_one_microsecond() {
        let d = full_band();
        let p = Pattern::filled(40, 40, 1.0).unwrap();
        let s = compile(&p, &d, 1e-6, ideal()).unwrap();
        assert_eq!(s.column_events.len(), 40);
        for ev in &s.column_events {
            assert!((ev.dwell() - 25e-9).abs() < 1e-15);
            assert_eq!(ev.tones.len(), 40);
        }
        let t = timing_report(&s);
        assert!((t.refresh_rate_hz - 1e6).abs() < 1e-6);
        assert_eq!(t.duty, 1.0);
        assert!((t.column_dwell_s - 25e-9).abs() < 1e-18);
        s.check_well_formed().unwrap();
    }

    #[test]
    fn empty_pattern_gives_empty_events() {
        let d = full_band();
        let s = compile(&Pattern::new(40, 40).unwrap(), &d, 1e-6, ideal()).unwrap();
        assert_eq!(s.column_events.len(), 40);
        assert!(s.column_events.iter().all(|e| e.tones.is_empty()));
        assert!(validate(&s, &d, &ShuttleConstraints::for_device(&d)).get(ConstraintId::C5ToneBand).pass);
    }

    #[test]
    fn single_cell() {
        let d = full_band();
        let mut p = Pattern::new(40, 40).unwrap();
        p.set(0, 0, 1.0).unwrap();
        let s = compile(&p, &d, 1e-6, ideal()).unwrap();
        let lit: Vec<_> = s.column_events.iter().filter(|e| !e.tones.is_empty()).collect();
        assert_eq!(lit.len(), 1);
        assert_eq!(lit[0].column_index, 0);
        assert_eq!(lit[0].tones.len(), 1);
        assert_eq!(lit[0].tones[0].frequency_hz, row_frequency(&d, 0, 40));
        assert_eq!(lit[0].tones[0].frequency_hz, 625e6);
    }

    #[test]
    fn column_frequencies_at_half_integer_positions() {
        let d = full_band();
        let s = compile(&Pattern::new(4, 1).unwrap(), &d, 1e-6, ideal()).unwrap();
        let f: Vec<f64> = s.column_events.iter().map(|e| e.slow_frequency_hz).collect();
        assert_eq!(f, vec![112.5e6, 137.5e6, 162.5e6, 187.5e6]);
    }

    #[test]
    fn resolution_errors_name_the_axis() {
        let device = DeviceSpec::brimrose_ted150();
        // 36 MHz usable band: about 18 columns at 1 us.
        let err = compile(&Pattern::new(40, 10).unwrap(), &device, 1e-6, ideal()).unwrap_err();
        match err {
            Error::ResolutionExceeded { axis, requested, available } => {
                assert_eq!(axis, Axis::Slow);
                assert_eq!(requested, 40);
                assert!((available - 17.97).abs() < 0.01);
            }
            other => panic!("{other}"),
        }
        let err = compile(&Pattern::new(10, 42).unwrap(), &full_band(), 1e-6, ideal()).unwrap_err();
        assert!(matches!(err, Error::ResolutionExceeded { axis: Axis::Fast, .. }));
    }

    #[test]
    fn out_of_band_row_is_named() {
        let device = DeviceSpec::brimrose_ted150();
        let mut p = Pattern::new(10, 40).unwrap();
        p.set(3, 30, 0.5).unwrap();
        match compile(&p, &device, 1e-6, ideal()).unwrap_err() {
            Error::ToneOutOfBand { row, .. } => assert_eq!(row, 30),
            other => panic!("{other}"),
        }
        // Rows in the lower half of the FSR fit the 25.5 GHz EOM.
        let mut p = Pattern::new(10, 40).unwrap();
        p.set(3, 19, 0.5).unwrap();
        assert!(compile(&p, &device, 1e-6, ideal()).is_ok());
    }

    #[test]
    fn default_retrace_is_one_access_time() {
        let d = full_band();
        let s = compile(&Pattern::new(4, 4).unwrap(), &d, 1e-6, CompileOptions::default()).unwrap();
        assert!((s.retrace - 2.0 * d.beam.waist_w0 / 4200.0).abs() < 1e-18);
        assert!(compile(&Pattern::new(4, 4).unwrap(), &d, 1e-6, CompileOptions { retrace: Some(-1.0) }).is_err());
    }

    #[test]
    fn timing_examples() {
        let d = full_band();
        let s = compile(&Pattern::new(40, 40).unwrap(), &d, 1e-6, CompileOptions { retrace: Some(1e-6) }).unwrap();
        let t = timing_report(&s);
        assert!((t.refresh_rate_hz - 0.5e6).abs() < 1e-6);
        assert_eq!(t.duty, 0.5);
    }

    #[test]
    fn c1_marginal_at_default_margin() {
        let d = full_band();
        let s = compile(&Pattern::filled(40, 40, 1.0).unwrap(), &d, 1e-6, CompileOptions::default()).unwrap();
        let mut c = ShuttleConstraints::for_device(&d);
        let r = validate(&s, &d, &c);
        let c1 = r.get(ConstraintId::C1RasterRate);
        assert!((c1.actual - 0.7e6).abs() < 1e3, "{}", c1.actual);
        assert_eq!(c1.required, 1e6);
        assert!(!c1.pass);
        assert!(!r.all_pass());
        c.heating_margin = 6.0;
        let r = validate(&s, &d, &c);
        assert!(r.get(ConstraintId::C1RasterRate).pass);
        assert!(r.all_pass(), "{r}");
    }

    #[test]
    fn c2_boundary() {
        assert!(switching_constraint(1e-9, 500e-9, 500).pass);
        assert!(!switching_constraint(1e-9, 500e-9, 501).pass);
    }

    #[test]
    fn c5_reports_offending_row() {
        let d = DeviceSpec::brimrose_ted150();
        let mut s = compile(&Pattern::new(10, 40).unwrap(), &full_band(), 1e-6, ideal()).unwrap();
        s.column_events[2].tones.push(Tone { frequency_hz: 60e9, amplitude_weight: 1.0 });
        let r = validate(&s, &d, &ShuttleConstraints::for_device(&d));
        let c5 = r.get(ConstraintId::C5ToneBand);
        assert!(!c5.pass);
        assert!(c5.margin < 0.0);
        // 60 GHz wraps to 10 GHz in a 50 GHz FSR: row 8 of 40.
        assert!(c5.detail.as_deref().unwrap().contains("row 8"), "{:?}", c5.detail);
    }

    #[test]
    fn report_covers_each_constraint_once() {
        let d = full_band();
        let s = compile(&Pattern::filled(3, 3, 0.5).unwrap(), &d, 1e-6, ideal()).unwrap();
        let r = validate(&s, &d, &ShuttleConstraints::for_device(&d));
        let ids: Vec<_> = r.results.iter().map(|x| x.id).collect();
        assert_eq!(ids, ConstraintId::ALL.to_vec());
        for x in &r.results {
            assert_eq!(x.pass, x.margin >= 0.0, "{x:?}");
        }
    }

    #[test]
    fn malformed_schedule_detected() {
        let d = full_band();
        let mut s = compile(&Pattern::new(4, 4).unwrap(), &d, 1e-6, ideal()).unwrap();
        s.column_events[1].t_end += 1e-9;
        assert!(s.check_well_formed().is_err());
        let mut s = compile(&Pattern::new(4, 4).unwrap(), &d, 1e-6, ideal()).unwrap();
        s.column_events.swap(0, 1);
        assert!(s.check_well_formed().is_err());
    }

    fn pattern_strategy() -> impl Strategy<Value = Pattern> {
        (1usize..=40, 1usize..=40).prop_flat_map(|(c, r)| {
            proptest::collection::vec(0u8..=9, c * r).prop_map(move |digits| {
                let mut p = Pattern::new(c, r).unwrap();
                for (i, d) in digits.into_iter().enumerate() {
                    p.set(i / r, i % r, f64::from(d) / 9.0).unwrap();
                }
                p
            })
        })
    }

    proptest! {
        #[test]
        fn round_trip_on_digit_levels(p in pattern_strategy()) {
            let d = full_band();
            let s = compile(&p, &d, 1e-6, ideal()).unwrap();
            prop_assert_eq!(decode(&s, &d).unwrap(), p);
        }

        #[test]
        fn round_trip_arbitrary_weights_within_an_ulp(
            weights in proptest::collection::vec(0.0f64..=1.0, 1..=200)
        ) {
            let d = full_band();
            let n_rows = weights.len().min(40);
            let n_cols = weights.len().div_ceil(n_rows);
            let mut p = Pattern::new(n_cols, n_rows).unwrap();
            for (i, &w) in weights.iter().enumerate() {
                p.set(i / n_rows, i % n_rows, w).unwrap();
            }
            let back = decode(&compile(&p, &d, 1e-6, ideal()).unwrap(), &d).unwrap();
            for c in 0..n_cols {
                for r in 0..n_rows {
                    prop_assert!((back.get(c, r) - p.get(c, r)).abs() <= 2.0 * f64::EPSILON);
                }
            }
        }

        #[test]
        fn windows_tile_the_scan(n_cols in 1usize..=36, t_us in 0.5f64..20.0) {
            let d = full_band();
            let s = compile(&Pattern::new(n_cols, 1).unwrap(), &d, t_us * 1e-6, ideal()).unwrap();
            s.check_well_formed().unwrap();
            let total: f64 = s.column_events.iter().map(|e| e.dwell()).sum();
            prop_assert!((total - t_us * 1e-6).abs() < 1e-12);
        }

        #[test]
        fn compile_is_deterministic(p in pattern_strategy()) {
            let d = full_band();
            prop_assert_eq!(compile(&p, &d, 1e-6, ideal()).unwrap(), compile(&p, &d, 1e-6, ideal()).unwrap());
        }

        #[test]
        fn feasibility_monotone_in_scan_time(p in pattern_strategy(), k in 1.0f64..5.0) {
            let d = full_band();
            let c = ShuttleConstraints { heating_margin: 3.0, ..ShuttleConstraints::for_device(&d) };
            let short = validate(&compile(&p, &d, 1e-6, CompileOptions::default()).unwrap(), &d, &c);
            let long = validate(&compile(&p, &d, k * 1e-6, CompileOptions::default()).unwrap(), &d, &c);
            for id in ConstraintId::ALL {
                let (a, b) = (short.get(id), long.get(id));
                match id {
                    // C1 tightens as the scan lengthens.
                    ConstraintId::C1RasterRate => prop_assert!(!b.pass || a.pass),
                    _ => prop_assert!(!a.pass || b.pass, "{:?}", id),
                }
            }
        }
    }
}
