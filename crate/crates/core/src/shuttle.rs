//! Parallel atom transport under the deflector timing model.
//!
//! Positions are in µm. Atom `i` of the initial configuration goes to atom `i`
//! of the target.
//!
//! - `DaodVipa`: every atom moves along its own straight line each raster
//!   cycle; addressing the whole pattern costs one access time.
//! - `AodVipa`: same geometry, but the slow axis needs `N·T_a` per cycle.
//! - `CrossedAod`: product structure. Moves are rigid translations of a group
//!   along x or along y; groups run one after another, every x move first.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compiler::ShuttleConstraints;
use crate::device::DeviceSpec;
use crate::error::{Error, Result};
use crate::model::{self, Deflector};

/// Atoms whose displacements agree within this share a rigid group, µm.
const GROUP_TOLERANCE_UM: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceModel {
    CrossedAod,
    AodVipa,
    DaodVipa,
}

impl DeviceModel {
    pub fn label(self) -> &'static str {
        match self {
            DeviceModel::CrossedAod => "CROSSED_AOD",
            DeviceModel::AodVipa => "AOD_VIPA",
            DeviceModel::DaodVipa => "DAOD_VIPA",
        }
    }
}

impl std::str::FromStr for DeviceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "crossed_aod" => Ok(DeviceModel::CrossedAod),
            "aod_vipa" => Ok(DeviceModel::AodVipa),
            "daod_vipa" => Ok(DeviceModel::DaodVipa),
            other => Err(Error::invalid(
                "model",
                format!("unknown device model `{other}` (crossed_aod, aod_vipa, daod_vipa)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviceCapability {
    pub model: DeviceModel,
    /// Single-AOD access time, s.
    pub access_time: f64,
    pub t_fast: f64,
    /// Raster refresh rate, Hz.
    pub raster_rate: f64,
}

impl DeviceCapability {
    pub fn new(model: DeviceModel, access_time: f64, t_fast: f64, raster_rate: f64) -> Result<Self> {
        use crate::device::positive;
        positive("access_time", access_time)?;
        positive("t_fast", t_fast)?;
        positive("raster_rate", raster_rate)?;
        Ok(DeviceCapability {
            model,
            access_time,
            t_fast,
            raster_rate,
        })
    }

    pub fn from_device(device: &DeviceSpec, model: DeviceModel) -> Self {
        DeviceCapability {
            model,
            access_time: model::access_time(&device.beam, device.aod(), Deflector::Aod),
            t_fast: model::vipa_metrics(&device.fast_axis).switch_time_s,
            raster_rate: 1.0 / device.raster_period,
        }
    }

    /// Duration of one motion cycle that addresses `n_atoms`.
    fn cycle_period(&self, n_atoms: usize) -> f64 {
        (1.0 / self.raster_rate).max(addressing_time(n_atoms, self))
    }
}

/// Time to address every atom once: sequential tone switching costs one
/// access time per atom, the DAOD-VIPA raster reaches all of them in one.
pub fn addressing_time(n_atoms: usize, cap: &DeviceCapability) -> f64 {
    match cap.model {
        DeviceModel::CrossedAod | DeviceModel::AodVipa => n_atoms as f64 * cap.access_time,
        DeviceModel::DaodVipa => cap.access_time,
    }
}

/// Transport speed when each raster cycle advances the trap by `step`.
pub fn max_speed(raster_rate: f64, step: f64) -> f64 {
    step * raster_rate
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub x_min_um: f64,
    pub x_max_um: f64,
    pub y_min_um: f64,
    pub y_max_um: f64,
}

impl Bounds {
    pub fn square(side_um: f64) -> Self {
        Bounds {
            x_min_um: 0.0,
            x_max_um: side_um,
            y_min_um: 0.0,
            y_max_um: side_um,
        }
    }

    pub fn contains(&self, p: Position) -> bool {
        (self.x_min_um..=self.x_max_um).contains(&p.x_um) && (self.y_min_um..=self.y_max_um).contains(&p.y_um)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Position {
    pub x_um: f64,
    pub y_um: f64,
}

impl Position {
    pub fn new(x_um: f64, y_um: f64) -> Self {
        Position { x_um, y_um }
    }

    fn distance(self, other: Position) -> f64 {
        (self.x_um - other.x_um).hypot(self.y_um - other.y_um)
    }

    fn lerp(self, other: Position, s: f64) -> Position {
        Position {
            x_um: self.x_um + (other.x_um - self.x_um) * s,
            y_um: self.y_um + (other.y_um - self.y_um) * s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub bounds: Bounds,
    pub positions: Vec<Position>,
}

impl AtomConfig {
    fn check_bounds(&self, which: &'static str) -> Result<()> {
        for (index, &p) in self.positions.iter().enumerate() {
            if !self.bounds.contains(p) {
                return Err(Error::OutOfBounds {
                    which,
                    index,
                    x_um: p.x_um,
                    y_um: p.y_um,
                });
            }
        }
        Ok(())
    }

    pub fn from_json_str(source_name: &str, text: &str) -> Result<Self> {
        let config: AtomConfig = crate::device::parse_json(source_name, text)?;
        let b = config.bounds;
        let ordered = b.x_min_um <= b.x_max_um && b.y_min_um <= b.y_max_um;
        if !(ordered && [b.x_min_um, b.x_max_um, b.y_min_um, b.y_max_um].iter().all(|v| v.is_finite())) {
            return Err(Error::invalid("bounds", "need finite x_min <= x_max and y_min <= y_max"));
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PlanOptions {
    /// Warn when two atoms come closer than this, µm.
    pub proximity_warning_um: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MoveSchedule {
    pub model: DeviceModel,
    pub cycles: usize,
    /// Positions after each cycle; the initial configuration is not repeated.
    pub per_cycle_positions: Vec<Vec<Position>>,
    pub total_time_s: f64,
    pub addressing_overhead_per_cycle_s: f64,
    /// Sequential groups executed (1 for the parallel models when anything moves).
    pub groups: usize,
    pub warnings: Vec<String>,
}

impl MoveSchedule {
    pub fn final_positions<'a>(&'a self, initial: &'a [Position]) -> &'a [Position] {
        self.per_cycle_positions.last().map_or(initial, |v| v.as_slice())
    }

    /// Largest single-cycle displacement of any atom, µm.
    pub fn max_step_um(&self, initial: &[Position]) -> f64 {
        let mut prev = initial;
        let mut worst: f64 = 0.0;
        for cycle in &self.per_cycle_positions {
            for (a, b) in prev.iter().zip(cycle) {
                worst = worst.max(a.distance(*b));
            }
            prev = cycle;
        }
        worst
    }

    pub fn summary(&self) -> String {
        format!(
            "model={} cycles={} groups={} total_time_us={:.3} addressing_overhead_us={:.4}",
            self.model.label(),
            self.cycles,
            self.groups,
            self.total_time_s * 1e6,
            self.addressing_overhead_per_cycle_s * 1e6
        )
    }
}

impl fmt::Display for MoveSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary())
    }
}

/// Cycles needed to cover `distance` in steps of at most `step`.
fn cycles_for(distance: f64, step: f64) -> usize {
    if distance <= 0.0 {
        return 0;
    }
    (distance / step - 1e-9).ceil().max(1.0) as usize
}

pub fn plan_moves(
    initial: &AtomConfig,
    target: &AtomConfig,
    cap: &DeviceCapability,
    constraints: &ShuttleConstraints,
    options: PlanOptions,
) -> Result<MoveSchedule> {
    constraints.validate()?;
    if initial.positions.len() != target.positions.len() {
        return Err(Error::MismatchedCounts {
            initial: initial.positions.len(),
            target: target.positions.len(),
        });
    }
    initial.check_bounds("initial")?;
    target.check_bounds("target")?;

    let step_um = constraints.step_max * 1e6;
    let mut schedule = match cap.model {
        DeviceModel::DaodVipa | DeviceModel::AodVipa => plan_parallel(&initial.positions, &target.positions, cap, step_um),
        DeviceModel::CrossedAod => plan_crossed(&initial.positions, &target.positions, cap, step_um),
    };
    debug_assert!(schedule.max_step_um(&initial.positions) <= step_um * (1.0 + 1e-9));

    if let Some(limit) = options.proximity_warning_um {
        schedule.warnings.extend(proximity_warnings(&initial.positions, &schedule, limit));
    }
    Ok(schedule)
}

fn plan_parallel(initial: &[Position], target: &[Position], cap: &DeviceCapability, step_um: f64) -> MoveSchedule {
    let n = initial.len();
    let longest = initial
        .iter()
        .zip(target)
        .map(|(a, b)| a.distance(*b))
        .fold(0.0, f64::max);
    let cycles = cycles_for(longest, step_um);
    let mut per_cycle_positions = Vec::with_capacity(cycles);
    for k in 1..=cycles {
        let s = k as f64 / cycles as f64;
        let row = if k == cycles {
            target.to_vec()
        } else {
            initial.iter().zip(target).map(|(a, b)| a.lerp(*b, s)).collect()
        };
        per_cycle_positions.push(row);
    }
    MoveSchedule {
        model: cap.model,
        cycles,
        per_cycle_positions,
        total_time_s: cycles as f64 * cap.cycle_period(n),
        addressing_overhead_per_cycle_s: addressing_time(n, cap),
        groups: usize::from(cycles > 0),
        warnings: Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Motion {
    X,
    Y,
}

impl Motion {
    fn component(self, p: Position) -> f64 {
        match self {
            Motion::X => p.x_um,
            Motion::Y => p.y_um,
        }
    }

    fn shifted(self, p: Position, d: f64) -> Position {
        match self {
            Motion::X => Position::new(p.x_um + d, p.y_um),
            Motion::Y => Position::new(p.x_um, p.y_um + d),
        }
    }
}

struct RigidGroup {
    axis: Motion,
    displacement_um: f64,
    members: Vec<usize>,
}

/// Groups atoms that share one displacement along `axis`.
fn rigid_groups(initial: &[Position], target: &[Position], axis: Motion) -> Vec<RigidGroup> {
    let mut groups: Vec<RigidGroup> = Vec::new();
    for (i, (a, b)) in initial.iter().zip(target).enumerate() {
        let d = axis.component(*b) - axis.component(*a);
        if d == 0.0 {
            continue;
        }
        match groups
            .iter_mut()
            .find(|g| (g.displacement_um - d).abs() <= GROUP_TOLERANCE_UM)
        {
            Some(g) => g.members.push(i),
            None => groups.push(RigidGroup {
                axis,
                displacement_um: d,
                members: vec![i],
            }),
        }
    }
    groups
}

fn plan_crossed(initial: &[Position], target: &[Position], cap: &DeviceCapability, step_um: f64) -> MoveSchedule {
    let n = initial.len();
    let mut groups = rigid_groups(initial, target, Motion::X);
    groups.extend(rigid_groups(initial, target, Motion::Y));

    let mut current = initial.to_vec();
    let mut per_cycle_positions = Vec::new();
    let mut total_time = 0.0;
    for g in &groups {
        // Members agree to GROUP_TOLERANCE_UM; each follows its own exact displacement.
        let shifts: Vec<f64> = g
            .members
            .iter()
            .map(|&i| g.axis.component(target[i]) - g.axis.component(initial[i]))
            .collect();
        let longest = shifts.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let cycles = cycles_for(longest, step_um);
        let start: Vec<Position> = g.members.iter().map(|&i| current[i]).collect();
        for k in 1..=cycles {
            let s = k as f64 / cycles as f64;
            for ((&i, &p0), &d) in g.members.iter().zip(&start).zip(&shifts) {
                current[i] = if k == cycles {
                    match g.axis {
                        Motion::X => Position::new(target[i].x_um, p0.y_um),
                        Motion::Y => Position::new(p0.x_um, target[i].y_um),
                    }
                } else {
                    g.axis.shifted(p0, d * s)
                };
            }
            per_cycle_positions.push(current.clone());
        }
        total_time += cycles as f64 * cap.cycle_period(g.members.len());
    }

    MoveSchedule {
        model: cap.model,
        cycles: per_cycle_positions.len(),
        per_cycle_positions,
        total_time_s: total_time,
        addressing_overhead_per_cycle_s: addressing_time(n, cap),
        groups: groups.len(),
        warnings: Vec::new(),
    }
}

fn proximity_warnings(initial: &[Position], schedule: &MoveSchedule, limit_um: f64) -> Vec<String> {
    let mut out = Vec::new();
    let frames = std::iter::once(initial).chain(schedule.per_cycle_positions.iter().map(|v| v.as_slice()));
    for (cycle, frame) in frames.enumerate() {
        for i in 0..frame.len() {
            for j in i + 1..frame.len() {
                if frame[i].distance(frame[j]) < limit_um {
                    out.push(format!("atoms {i} and {j} within {limit_um} um at cycle {cycle}"));
                    return out;
                }
            }
        }
    }
    out
}

/// Speedup statistics for one atom count.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub n_atoms: usize,
    pub trials: usize,
    pub mean_speedup: f64,
    pub std_speedup: f64,
    pub min_speedup: f64,
    pub max_speedup: f64,
    pub mean_crossed_time_s: f64,
    pub mean_daod_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub atom_counts: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub bounds: Bounds,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            atom_counts: vec![4, 8, 16, 32],
            trials: 50,
            seed: 7,
            bounds: Bounds::square(20.0),
        }
    }
}

fn random_config(rng: &mut ChaCha8Rng, n: usize, bounds: Bounds) -> AtomConfig {
    let positions = (0..n)
        .map(|_| {
            Position::new(
                rng.gen_range(bounds.x_min_um..=bounds.x_max_um),
                rng.gen_range(bounds.y_min_um..=bounds.y_max_um),
            )
        })
        .collect();
    AtomConfig { bounds, positions }
}

/// CROSSED_AOD vs DAOD_VIPA total time on seeded random instances with
/// i.i.d. uniform initial and target positions.
pub fn plan_bench(
    device: &DeviceSpec,
    constraints: &ShuttleConstraints,
    config: &BenchConfig,
) -> Result<Vec<BenchRow>> {
    let crossed = DeviceCapability::from_device(device, DeviceModel::CrossedAod);
    let daod = DeviceCapability::from_device(device, DeviceModel::DaodVipa);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Vec::with_capacity(config.atom_counts.len());
    for &n in &config.atom_counts {
        let mut speedups = Vec::with_capacity(config.trials);
        let (mut sum_c, mut sum_d) = (0.0, 0.0);
        for _ in 0..config.trials {
            let a = random_config(&mut rng, n, config.bounds);
            let b = random_config(&mut rng, n, config.bounds);
            let tc = plan_moves(&a, &b, &crossed, constraints, PlanOptions::default())?.total_time_s;
            let td = plan_moves(&a, &b, &daod, constraints, PlanOptions::default())?.total_time_s;
            if td > 0.0 {
                speedups.push(tc / td);
            }
            sum_c += tc;
            sum_d += td;
        }
        let m = speedups.len().max(1) as f64;
        let mean = speedups.iter().sum::<f64>() / m;
        let var = speedups.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
        rows.push(BenchRow {
            n_atoms: n,
            trials: config.trials,
            mean_speedup: mean,
            std_speedup: var.sqrt(),
            min_speedup: speedups.iter().cloned().fold(f64::INFINITY, f64::min),
            max_speedup: speedups.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            mean_crossed_time_s: sum_c / config.trials as f64,
            mean_daod_time_s: sum_d / config.trials as f64,
        });
    }
    Ok(rows)
}

/// Least-squares exponent p of speedup ∝ N^p over the bench rows.
pub fn speedup_exponent(rows: &[BenchRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n_atoms as f64).ln(), r.mean_speedup.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
