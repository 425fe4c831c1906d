//! Exit criteria for the simulator. Each test prints one `PASS`/`FAIL` line
//! and then asserts. Run with `cargo test --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use raster_core::budget::{self, BudgetReport, EfficiencyChain};
use raster_core::compiler::{self, CompileOptions, Pattern, ShuttleConstraints};
use raster_core::model::{self, measured, Deflector, FocalLength, ModelReport};
use raster_core::oracle::{self, Grid, DEFAULT_ALPHA_SWEEP};
use raster_core::shuttle::{
    self, AtomConfig, BenchConfig, Bounds, DeviceCapability, DeviceModel, PlanOptions, Position,
};
use raster_core::DeviceSpec;

fn report(id: u32, title: &str, pass: bool, detail: &str) {
    println!("{} criterion {id}: {title} | {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

#[test]
fn criterion_1_daod_dynamic_resolution_brackets_measurement() {
    const LO: f64 = 15.0;
    const HI: f64 = 21.0;
    const BUDGET: Duration = Duration::from_millis(1);
    let (n_dyn, elapsed) = timed(|| {
        let n = model::static_resolution(measured::ACCESS_TIME_AOD, 36e6, Deflector::Aod);
        (n, model::dynamic_resolution_daod(n, measured::ACCESS_TIME_AOD, 1e-6))
    });
    let (n, n_dyn) = n_dyn;
    let pass = (LO..=HI).contains(&n_dyn) && (n - 12.9).abs() < 0.05 && elapsed < BUDGET;
    report(
        1,
        "DAOD N_dyn at 1 us from measured T_a within [15, 21]",
        pass,
        &format!("N = {n:.3}, N_dyn = {n_dyn:.3} (measured 17), {elapsed:?}"),
    );
}

#[test]
fn criterion_2_access_time_ratio_and_measured_deviation() {
    const BUDGET: Duration = Duration::from_millis(1);
    let device = DeviceSpec::brimrose_ted150();
    let ((ratio, text), elapsed) = timed(|| {
        let aod = device.aod();
        let ratio = model::access_time(&device.beam, aod, Deflector::Aod)
            / model::access_time(&device.beam, aod, Deflector::Daod);
        (ratio, ModelReport::new(&device, 1e-6, None).to_string())
    });
    let surfaced = text.contains("measured 1.76") && text.contains("deviation");
    let pass = ratio == 2.0 && surfaced && elapsed < BUDGET;
    report(
        2,
        "model single/DAOD access time ratio 2.000, measured 1.76 reported",
        pass,
        &format!("ratio {ratio:.3}, measured {:.3} surfaced: {surfaced}, {elapsed:?}", measured::access_time_ratio()),
    );
}

#[test]
fn criterion_3_static_resolution_doubles() {
    const DRAWS: usize = 1000;
    const BUDGET: Duration = Duration::from_secs(1);
    let (result, elapsed) = timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst = 0.0f64;
        for _ in 0..DRAWS {
            let t_a = rng.gen_range(1e-8..1e-5);
            let band = rng.gen_range(1e5..1e9);
            let single = model::static_resolution(t_a, band, Deflector::Aod);
            let double = model::static_resolution(t_a, band, Deflector::Daod);
            worst = worst.max((double / single - 2.0).abs());
        }
        let aod = model::static_resolution(420e-9, 100e6, Deflector::Aod);
        let daod = model::static_resolution(420e-9, 100e6, Deflector::Daod);
        (worst, aod, daod)
    });
    let (worst, aod, daod) = result;
    let pass = worst <= 1e-15 && aod.round() == 33.0 && daod.round() == 66.0 && elapsed < BUDGET;
    report(
        3,
        "N_stat DAOD = 2 N_stat AOD over 1000 draws; 33/66 at 420 ns",
        pass,
        &format!("max |ratio - 2| = {worst:.1e}, AOD {aod:.2}, DAOD {daod:.2}, {elapsed:?}"),
    );
}

#[test]
fn criterion_4_oracle_matches_closed_form() {
    const AOD_RTOL: f64 = 0.10;
    const DAOD_RTOL: f64 = 0.05;
    const DAOD_ALPHA: f64 = 3.6e13;
    const BUDGET: Duration = Duration::from_secs(30);
    let device = DeviceSpec::brimrose_ted150();
    let grid = Grid::for_beam(&device.beam);
    assert_eq!(grid.sample_count, 8192);

    let (rows, elapsed) = timed(|| {
        let aod: Vec<_> = DEFAULT_ALPHA_SWEEP
            .iter()
            .map(|&a| oracle::oracle_point(&device, Deflector::Aod, a, &grid).unwrap())
            .collect();
        let daod_static = oracle::oracle_point(&device, Deflector::Daod, 0.0, &grid).unwrap();
        let daod_fast = oracle::oracle_point(&device, Deflector::Daod, DAOD_ALPHA, &grid).unwrap();
        (aod, daod_static, daod_fast)
    });
    let (aod, daod_static, daod_fast) = rows;

    let mut aod_pass = true;
    let mut parts = Vec::new();
    for r in &aod {
        let ratio = r.width_oracle_rad / r.width_eq_s1_rad;
        aod_pass &= (ratio - 1.0).abs() <= AOD_RTOL;
        parts.push(format!("a={:.1e}: {ratio:.3}", r.alpha_hz_per_s));
    }
    let daod_ratio = daod_fast.width_oracle_rad / daod_static.width_oracle_rad;
    let daod_pass = (daod_ratio - 1.0).abs() <= DAOD_RTOL;
    println!(
        "  criterion 4 detail: AOD oracle/closed-form [{}] ({}); DAOD width ratio at 3.6e13 {daod_ratio:.4} ({})",
        parts.join(", "),
        if aod_pass { "pass" } else { "fail" },
        if daod_pass { "pass" } else { "fail" },
    );
    report(
        4,
        "AOD oracle width within 10% of chirp-spread formula; DAOD within 5% of static",
        aod_pass && daod_pass && elapsed < BUDGET,
        &format!("AOD {aod_pass}, DAOD {daod_pass}, {elapsed:?}"),
    );
}

#[test]
fn criterion_5_acoustic_lens() {
    const RTOL: f64 = 0.01;
    const BUDGET: Duration = Duration::from_millis(1);
    let device = DeviceSpec::brimrose_ted150();
    assert_eq!(device.beam.profile_constant_a, 1.34);
    assert_eq!(device.beam.wavelength, 785e-9);
    assert_eq!(device.aod().acoustic_velocity_v, 4200.0);
    let ((focal, shift), elapsed) = timed(|| {
        let f = model::acoustic_focal_length(&device.beam, device.aod(), 36e6 / 1e-6);
        (f, f.focal_shift(0.03))
    });
    let FocalLength::Finite(f) = focal else {
        return report(5, "acoustic lens", false, "no lens at nonzero chirp");
    };
    let pass = (f / 1.12 - 1.0).abs() <= RTOL && (shift / -0.80e-3 - 1.0).abs() <= RTOL && elapsed < BUDGET;
    report(
        5,
        "f_AOD = 1.12 m and focal shift = -0.80 mm within 1%",
        pass,
        &format!("f_AOD {f:.4} m, shift {:.4} mm, {elapsed:?}", shift * 1e3),
    );
}

#[test]
fn criterion_6_compiler_round_trip_and_refresh() {
    const PATTERNS: usize = 200;
    const MAX_SIDE: usize = 40;
    const BUDGET: Duration = Duration::from_secs(5);
    let device = DeviceSpec::brimrose_ted150_full_band();
    let (result, elapsed) = timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut mismatches = 0;
        for _ in 0..PATTERNS {
            let (c, r) = (rng.gen_range(1..=MAX_SIDE), rng.gen_range(1..=MAX_SIDE));
            let mut p = Pattern::new(c, r).unwrap();
            for col in 0..c {
                for row in 0..r {
                    let d: u32 = rng.gen_range(0..=9);
                    p.set(col, row, f64::from(d) / 9.0).unwrap();
                }
            }
            let s = compiler::compile(&p, &device, 1e-6, CompileOptions::default()).unwrap();
            if compiler::decode(&s, &device).unwrap() != p {
                mismatches += 1;
            }
        }
        let full = Pattern::filled(MAX_SIDE, MAX_SIDE, 1.0).unwrap();
        let s = compiler::compile(&full, &device, 1e-6, CompileOptions { retrace: Some(0.0) }).unwrap();
        (mismatches, compiler::timing_report(&s).refresh_rate_hz)
    });
    let (mismatches, refresh) = result;
    let pass = mismatches == 0 && (refresh / 1e6 - 1.0).abs() <= 1e-12 && elapsed < BUDGET;
    report(
        6,
        "decode(compile(p)) = p for 200 random patterns; 40x40 at 1 us refreshes at 1 MHz",
        pass,
        &format!("{mismatches} mismatches, refresh {:.6} MHz, {elapsed:?}", refresh * 1e-6),
    );
}

#[test]
fn criterion_7_switching_boundary() {
    const BUDGET: Duration = Duration::from_millis(1);
    let ((at, over), elapsed) = timed(|| {
        (
            compiler::switching_constraint(1e-9, 500e-9, 500),
            compiler::switching_constraint(1e-9, 500e-9, 501),
        )
    });
    let pass = at.pass && !over.pass && elapsed < BUDGET;
    report(
        7,
        "t_fast = 1 ns, T_a = 500 ns: n = 500 passes, n = 501 fails",
        pass,
        &format!("n=500 margin {:.3e} s, n=501 margin {:.3e} s, {elapsed:?}", at.margin, over.margin),
    );
}

#[test]
fn criterion_8_planner_speedup() {
    const EXPONENT_RANGE: std::ops::RangeInclusive<f64> = 0.5..=1.5;
    const BUDGET: Duration = Duration::from_secs(10);
    let device = DeviceSpec::brimrose_ted150();
    let constraints = ShuttleConstraints::for_device(&device);
    let (result, elapsed) = timed(|| {
        let rows = shuttle::plan_bench(&device, &constraints, &BenchConfig {
            atom_counts: vec![4, 8, 16, 32],
            trials: 50,
            seed: 7,
            bounds: Bounds::square(20.0),
        })
        .unwrap();
        let cap = DeviceCapability::new(DeviceModel::DaodVipa, 457e-9, 1e-9, 1e6).unwrap();
        let box100 = Bounds::square(100.0);
        let single = shuttle::plan_moves(
            &AtomConfig { bounds: box100, positions: vec![Position::new(0.0, 0.0)] },
            &AtomConfig { bounds: box100, positions: vec![Position::new(10.0, 0.0)] },
            &cap,
            &constraints,
            PlanOptions::default(),
        )
        .unwrap();
        (rows, single)
    });
    let (rows, single) = result;
    let exponent = shuttle::speedup_exponent(&rows);
    let speedups: Vec<String> = rows.iter().map(|r| format!("N={}: {:.1}", r.n_atoms, r.mean_speedup)).collect();
    let pass = EXPONENT_RANGE.contains(&exponent)
        && single.cycles == 100
        && (single.total_time_s - 100e-6).abs() < 1e-12
        && elapsed < BUDGET;
    report(
        8,
        "crossed-AOD/DAOD-VIPA time grows ~N (exponent in [0.5, 1.5]); 10 um move = 100 us",
        pass,
        &format!(
            "exponent {exponent:.3} [{}]; single move {} cycles {:.1} us, {elapsed:?}",
            speedups.join(", "),
            single.cycles,
            single.total_time_s * 1e6
        ),
    );
}

#[test]
fn criterion_9_budget() {
    const BUDGET: Duration = Duration::from_millis(1);
    let current = EfficiencyChain::from_json_str("current", include_str!("../../../configs/chain_current.json")).unwrap();
    let upgraded =
        EfficiencyChain::from_json_str("upgraded", include_str!("../../../configs/chain_upgraded.json")).unwrap();
    let ((eff, text_current, up), elapsed) = timed(|| {
        let eff = budget::chain_efficiency(&current);
        let text = BudgetReport::new(&current, budget::DEFAULT_POWER_PER_TRAP_W).unwrap().to_string();
        let up = BudgetReport::new(&upgraded, budget::DEFAULT_POWER_PER_TRAP_W).unwrap();
        (eff, text, up)
    });
    let p_atoms = up.power_at_atoms_w.unwrap_or(0.0);
    let text_up = up.to_string();
    let pass = (eff - 0.01875).abs() < 1e-15
        && text_current.contains("\u{2248}0.02")
        && (p_atoms - 0.5).abs() <= 0.05 * 0.5
        && text_up.contains("derived")
        && elapsed < BUDGET;
    report(
        9,
        "chain 0.3*0.25*0.25 = 0.01875 (~0.02); upgraded ~500 mW with derived input power",
        pass,
        &format!("efficiency {eff}, upgraded {:.1} mW, {elapsed:?}", p_atoms * 1e3),
    );
}
