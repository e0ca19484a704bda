//! Configuration loading and command pipelines behind the `ionholo` binary.
//!
//! Config files are TOML. Every frequency in a config file is a plain value
//! in Hz (or 1/s for decay rates); the 2π lives in code and the conversion
//! happens exactly once, in [`resolve`]. All generated reports and CSV files
//! start with the fully resolved configuration so a result can always be
//! traced back to its inputs, and every float is rendered with 12
//! significant digits so identical configs give byte-identical outputs.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use serde::Deserialize;

use ionholo::effective_sim::{gate_error, verify_holonomy, with_scaled_areas};
use ionholo::exec::Exec;
use ionholo::full_sim::{
    default_initial_bits, fidelity_from_density, ideal_target_chain, segments_from_schedule,
    FidelityResult, FullModel, SystemParams,
};
use ionholo::gate_targets::{operation_counts, qubit_index_to_chain, Axis, GateSpec};
use ionholo::pulse_compiler::{
    compile, export_schedule, fmt_sig12, realize_schedule, PulseSchedule,
};
use ionholo::quantum_core::{partial_trace_mode, Operator, StateVector, ZERO_C};

const TAU: f64 = std::f64::consts::TAU;

/// Process exit codes of the binary.
pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_VERIFY: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad usage, unreadable or invalid configuration.
    Config(String),
    /// A simulation call failed.
    Runtime(ionholo::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Runtime(e) => write!(f, "{e}"),
        }
    }
}

impl From<ionholo::Error> for CliError {
    fn from(e: ionholo::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(ionholo::Error::NumericAbort(_)) => EXIT_NUMERIC,
            CliError::Runtime(_) => EXIT_CONFIG,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// On-disk configuration. Frequencies are plain Hz; angles are radians;
/// decay rates are 1/s.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub gate: GateSection,
    #[serde(default)]
    pub physics: PhysicsSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub io: IoSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSection {
    pub num_controls: usize,
    /// Rotation-axis polar angle, radians. Default π/2.
    pub theta: Option<f64>,
    /// Rotation-axis azimuth, radians. Default 0.
    pub phi: Option<f64>,
    /// Largest chain length in the operation-count table. Default 10.
    pub table_max: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub eta: Option<f64>,
    /// Sideband detuning offset, Hz.
    pub delta_hz: Option<f64>,
    /// Per-laser Rabi magnitude, Hz.
    pub laser_rabi_hz: Option<f64>,
    /// |e⟩→|0⟩ decay rate, 1/s.
    pub gamma_e0: Option<f64>,
    /// |e⟩→|1⟩ decay rate, 1/s.
    pub gamma_e1: Option<f64>,
    pub initial_fock: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// Effective drive magnitude override, Hz. Default √2·η²Ω_L²/δ (set
    /// from the physics section, already angular).
    pub effective_rabi_hz: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    /// Integrator step, seconds. Default one fiftieth of 2π/δ.
    pub dt: Option<f64>,
    pub fock_cutoff: Option<usize>,
    /// Points per interval in the holonomy check. Default 200.
    pub grid_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoSection {
    pub out_dir: Option<String>,
    pub emit_timeseries: Option<bool>,
    /// Steps between time-series samples. Default 50.
    pub timeseries_stride: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub cyclicity_tol: Option<f64>,
    pub transport_tol: Option<f64>,
    pub gate_error_tol: Option<f64>,
}

/// Fully resolved run parameters, after defaults and unit conversion.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spec: GateSpec,
    pub params: SystemParams,
    /// Effective drive magnitude, rad/s.
    pub drive: f64,
    pub drive_explicit: bool,
    /// Integrator step, seconds.
    pub dt: f64,
    pub dt_explicit: bool,
    pub grid_points: usize,
    pub table_max: usize,
    pub out_dir: PathBuf,
    pub emit_timeseries: bool,
    pub timeseries_stride: u64,
    pub cyclicity_tol: f64,
    pub transport_tol: f64,
    pub gate_error_tol: f64,
    /// Soft parameter warnings collected during validation.
    pub warnings: Vec<String>,
}

pub fn parse_config(text: &str) -> CliResult<FileConfig> {
    toml::from_str(text).map_err(|e| CliError::Config(format!("config error: {e}")))
}

pub fn resolve(file: &FileConfig) -> CliResult<Resolved> {
    let base = SystemParams::ca40_defaults();
    let params = SystemParams {
        eta: file.physics.eta.unwrap_or(base.eta),
        delta: file.physics.delta_hz.map(|h| TAU * h).unwrap_or(base.delta),
        laser_rabi: file.physics.laser_rabi_hz.map(|h| TAU * h).unwrap_or(base.laser_rabi),
        fock_cutoff: file.numerics.fock_cutoff.unwrap_or(base.fock_cutoff),
        gamma_e0: file.physics.gamma_e0.unwrap_or(base.gamma_e0),
        gamma_e1: file.physics.gamma_e1.unwrap_or(base.gamma_e1),
        initial_fock: file.physics.initial_fock.unwrap_or(base.initial_fock),
    };
    let warnings = params.validate().map_err(|e| CliError::Config(format!("config error: {e}")))?;
    let theta = file.gate.theta.unwrap_or(FRAC_PI_2);
    let phi = file.gate.phi.unwrap_or(0.0);
    if !theta.is_finite() || !phi.is_finite() {
        return Err(CliError::Config("config error: gate angles must be finite".into()));
    }
    let spec = GateSpec::new(file.gate.num_controls, Axis::new(theta, phi))
        .map_err(|e| CliError::Config(format!("config error: {e}")))?;
    let drive_explicit = file.drive.effective_rabi_hz.is_some();
    let drive = file
        .drive
        .effective_rabi_hz
        .map(|h| TAU * h)
        .unwrap_or_else(|| params.effective_drive());
    if !(drive > 0.0) || !drive.is_finite() {
        return Err(CliError::Config("config error: drive.effective_rabi_hz must be positive".into()));
    }
    let dt_explicit = file.numerics.dt.is_some();
    let dt = file.numerics.dt.unwrap_or_else(|| params.default_dt());
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(CliError::Config("config error: numerics.dt must be positive".into()));
    }
    if dt > params.max_dt() * (1.0 + 1e-12) {
        return Err(CliError::Config(format!(
            "config error: numerics.dt = {dt:.3e} s exceeds the resolution bound {:.3e} s for this detuning",
            params.max_dt()
        )));
    }
    let grid_points = file.numerics.grid_points.unwrap_or(200);
    if grid_points < 2 {
        return Err(CliError::Config("config error: numerics.grid_points must be at least 2".into()));
    }
    let table_max = file.gate.table_max.unwrap_or(10);
    if table_max < 1 {
        return Err(CliError::Config("config error: gate.table_max must be at least 1".into()));
    }
    Ok(Resolved {
        spec,
        params,
        drive,
        drive_explicit,
        dt,
        dt_explicit,
        grid_points,
        table_max,
        out_dir: PathBuf::from(file.io.out_dir.clone().unwrap_or_else(|| "out".into())),
        emit_timeseries: file.io.emit_timeseries.unwrap_or(false),
        timeseries_stride: file.io.timeseries_stride.unwrap_or(50).max(1),
        cyclicity_tol: file.verify.cyclicity_tol.unwrap_or(1e-9),
        transport_tol: file.verify.transport_tol.unwrap_or(1e-9),
        gate_error_tol: file.verify.gate_error_tol.unwrap_or(1e-8),
        warnings,
    })
}

pub fn load_config(path: &std::path::Path) -> CliResult<Resolved> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    resolve(&parse_config(&text)?)
}

/// The resolved configuration as `# `-prefixed header lines, embedded at
/// the top of every output file.
pub fn resolved_header(r: &Resolved) -> String {
    let mut s = String::new();
    s.push_str("# ionholo resolved configuration\n");
    s.push_str("# frequencies below are angular (rad/s); config files take plain Hz\n");
    s.push_str(&format!("# gate.num_controls = {}\n", r.spec.num_controls));
    s.push_str(&format!("# gate.theta_rad = {}\n", fmt_sig12(r.spec.axis.theta)));
    s.push_str(&format!("# gate.phi_rad = {}\n", fmt_sig12(r.spec.axis.phi)));
    s.push_str(&format!("# physics.eta = {}\n", fmt_sig12(r.params.eta)));
    s.push_str(&format!("# physics.delta_rad_per_s = {}\n", fmt_sig12(r.params.delta)));
    s.push_str(&format!(
        "# physics.laser_rabi_rad_per_s = {}\n",
        fmt_sig12(r.params.laser_rabi)
    ));
    s.push_str(&format!("# physics.gamma_e0_per_s = {}\n", fmt_sig12(r.params.gamma_e0)));
    s.push_str(&format!("# physics.gamma_e1_per_s = {}\n", fmt_sig12(r.params.gamma_e1)));
    s.push_str(&format!("# physics.initial_fock = {}\n", r.params.initial_fock));
    s.push_str(&format!("# drive.effective_rabi_rad_per_s = {}\n", fmt_sig12(r.drive)));
    s.push_str(&format!("# numerics.dt_s = {}\n", fmt_sig12(r.dt)));
    s.push_str(&format!("# numerics.fock_cutoff = {}\n", r.params.fock_cutoff));
    s.push_str(&format!("# numerics.grid_points = {}\n", r.grid_points));
    s.push_str(&format!("# verify.cyclicity_tol = {}\n", fmt_sig12(r.cyclicity_tol)));
    s.push_str(&format!("# verify.transport_tol = {}\n", fmt_sig12(r.transport_tol)));
    s.push_str(&format!("# verify.gate_error_tol = {}\n", fmt_sig12(r.gate_error_tol)));
    s
}

/// FNV-1a 64-bit content hash, used to fingerprint schedule exports.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug)]
pub struct CompileOutcome {
    pub schedule: PulseSchedule,
    pub schedule_text: String,
    pub counts_csv: String,
    pub summary: String,
}

pub fn run_compile(r: &Resolved) -> CliResult<CompileOutcome> {
    let mut schedule = compile(&r.spec, r.drive)?;
    realize_schedule(&mut schedule, &r.params)?;
    let mut schedule_text = resolved_header(r);
    schedule_text.push_str(&export_schedule(&schedule, Some(&r.params)));
    let mut counts_csv = resolved_header(r);
    counts_csv.push_str("n,intervals,two_ion_operations\n");
    for n in 1..=r.table_max {
        let (intervals, ops) = operation_counts(n)?;
        counts_csv.push_str(&format!("{n},{intervals},{ops}\n"));
    }
    let summary = format!(
        "compiled {} interval(s) for {} control(s), total duration {} s",
        schedule.intervals.len(),
        r.spec.num_controls,
        fmt_sig12(schedule.total_duration()),
    );
    Ok(CompileOutcome { schedule, schedule_text, counts_csv, summary })
}

#[derive(Debug)]
pub struct VerifyOutcome {
    pub report: String,
    pub pass: bool,
    pub cyclicity: f64,
    pub transport: f64,
    pub gate_error: f64,
}

pub fn run_verify(r: &Resolved, perturb_area: Option<f64>) -> CliResult<VerifyOutcome> {
    let compiled = compile(&r.spec, r.drive)?;
    let schedule = match perturb_area {
        Some(x) => {
            if !x.is_finite() || x <= -1.0 {
                return Err(CliError::Config(
                    "config error: --perturb-area must be a finite fraction above -1".into(),
                ));
            }
            with_scaled_areas(&compiled, 1.0 + x)
        }
        None => compiled,
    };
    let holonomy = verify_holonomy(&schedule, r.grid_points)?;
    let gerr = gate_error(&schedule)?;
    let cyc_ok = holonomy.cyclicity_residual <= r.cyclicity_tol;
    let tra_ok = holonomy.transport_residual <= r.transport_tol;
    let err_ok = gerr <= r.gate_error_tol;
    let pass = cyc_ok && tra_ok && err_ok;
    let mut report = resolved_header(r);
    report.push_str("verify_report:\n");
    if let Some(x) = perturb_area {
        report.push_str(&format!("  perturb_area_fraction: {}\n", fmt_sig12(x)));
    }
    report.push_str(&format!("  grid_points_per_interval: {}\n", r.grid_points));
    report.push_str(&format!(
        "  cyclicity_residual: {} (tol {}) {}\n",
        fmt_sig12(holonomy.cyclicity_residual),
        fmt_sig12(r.cyclicity_tol),
        if cyc_ok { "PASS" } else { "FAIL" }
    ));
    report.push_str(&format!(
        "  transport_residual: {} (tol {}) {}\n",
        fmt_sig12(holonomy.transport_residual),
        fmt_sig12(r.transport_tol),
        if tra_ok { "PASS" } else { "FAIL" }
    ));
    report.push_str(&format!(
        "  gate_error: {} (tol {}) {}\n",
        fmt_sig12(gerr),
        fmt_sig12(r.gate_error_tol),
        if err_ok { "PASS" } else { "FAIL" }
    ));
    report.push_str(&format!("  verdict: {}\n", if pass { "PASS" } else { "FAIL" }));
    Ok(VerifyOutcome {
        report,
        pass,
        cyclicity: holonomy.cyclicity_residual,
        transport: holonomy.transport_residual,
        gate_error: gerr,
    })
}

#[derive(Debug)]
pub struct FidelityOutcome {
    pub result: FidelityResult,
    pub report: String,
    pub timeseries: Option<String>,
    pub schedule_hash: String,
}

fn timeseries_columns(num_qubits: usize) -> (Vec<usize>, String) {
    let mut header = String::from("t_s");
    let mut rows = Vec::new();
    for b in 0..(1usize << num_qubits) {
        let bits: String = (0..num_qubits)
            .rev()
            .map(|k| if (b >> k) & 1 == 1 { '1' } else { '0' })
            .collect();
        header.push_str(&format!(",pop_{bits}"));
        rows.push(qubit_index_to_chain(b, num_qubits));
    }
    header.push_str(",pop_leak,trace,fidelity\n");
    (rows, header)
}

fn timeseries_row(
    t: f64,
    rho: &Operator,
    layout: &ionholo::quantum_core::HilbertLayout,
    comp_rows: &[usize],
    target: &StateVector,
) -> String {
    let rho_ions = partial_trace_mode(rho, layout).expect("run layout has a phonon mode");
    let mut line = fmt_sig12(t);
    let mut p_comp = 0.0;
    for &cy in comp_rows {
        let p = rho_ions[(cy, cy)].re;
        p_comp += p;
        line.push_str(&format!(",{}", fmt_sig12(p)));
    }
    let mut trace = 0.0;
    for i in 0..rho.nrows() {
        trace += rho[(i, i)].re;
    }
    let mut fid = ZERO_C;
    for (i, ti) in target.iter().enumerate() {
        if *ti == ZERO_C {
            continue;
        }
        for (j, tj) in target.iter().enumerate() {
            if *tj != ZERO_C {
                fid += ti.conj() * rho_ions[(i, j)] * *tj;
            }
        }
    }
    line.push_str(&format!(
        ",{},{},{}\n",
        fmt_sig12((1.0 - p_comp).max(0.0)),
        fmt_sig12(trace),
        fmt_sig12(fid.re)
    ));
    line
}

/// Integrate the master equation for the configured gate and report the
/// fidelity against the ideal action on the canonical all-controls-set
/// input. Only gates with a defined laser realization (n ≤ 2) have a full
/// model.
pub fn run_fidelity(r: &Resolved, emit_timeseries: bool) -> CliResult<FidelityOutcome> {
    if r.spec.num_controls > 2 {
        return Err(CliError::Config(
            "effective-only gate; full model undefined for more than two controls \
             (compile and verify still work)"
                .into(),
        ));
    }
    let mut schedule = compile(&r.spec, r.drive)?;
    realize_schedule(&mut schedule, &r.params)?;
    let schedule_text = export_schedule(&schedule, Some(&r.params));
    let schedule_hash = format!("{:016x}", fnv1a64(schedule_text.as_bytes()));
    let bits = default_initial_bits(&r.spec);
    let segments = segments_from_schedule(&schedule, &r.params, true)?;
    let model = FullModel::new(&r.params, schedule.num_ions(), &segments)?;
    let psi0 = model.initial_state(&bits)?;
    let target = ideal_target_chain(&r.spec, &bits)?;
    let rho0 = &psi0 * psi0.adjoint();
    let layout = model.layout;
    let (comp_rows, ts_header) = timeseries_columns(r.spec.num_qubits());
    let mut csv = String::new();
    let (rho, stats) = if emit_timeseries {
        csv.push_str(&resolved_header(r));
        csv.push_str(&ts_header);
        let mut observer = |_step: u64, t: f64, state: &Operator| {
            csv.push_str(&timeseries_row(t, state, &layout, &comp_rows, &target));
        };
        model.lindblad_evolve_observed(
            &rho0,
            r.dt,
            Exec::default(),
            r.timeseries_stride,
            &mut observer,
        )?
    } else {
        model.lindblad_evolve(&rho0, r.dt, Exec::default())?
    };
    let (fidelity, leakage) = fidelity_from_density(&rho, &layout, &target)?;
    if fidelity + leakage > 1.0 + 1e-6 {
        return Err(CliError::Runtime(ionholo::Error::NumericAbort(format!(
            "fidelity {fidelity:.8} and leakage {leakage:.8} sum above one"
        ))));
    }
    let result = FidelityResult {
        fidelity,
        leakage,
        trace_defect: stats.max_defect,
        steps: stats.steps,
        wall_time_s: stats.wall_time_s,
    };
    let bits_str: String =
        bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
    let mut report = resolved_header(r);
    report.push_str("fidelity_report:\n");
    report.push_str(&format!("  schedule_hash_fnv1a64: {schedule_hash}\n"));
    report.push_str(&format!("  intervals: {}\n", schedule.intervals.len()));
    report.push_str(&format!(
        "  total_duration_s: {}\n",
        fmt_sig12(schedule.total_duration())
    ));
    report.push_str(&format!("  initial_state_bits: {bits_str}\n"));
    report.push_str("  decay_model: lindblad\n");
    report.push_str(&format!("  steps: {}\n", result.steps));
    report.push_str(&format!("  max_trace_defect: {}\n", fmt_sig12(result.trace_defect)));
    report.push_str(&format!("  fidelity: {:.4}\n", result.fidelity));
    report.push_str(&format!("  fidelity_sig12: {}\n", fmt_sig12(result.fidelity)));
    report.push_str(&format!("  leakage_sig12: {}\n", fmt_sig12(result.leakage)));
    Ok(FidelityOutcome {
        result,
        report,
        timeseries: if emit_timeseries { Some(csv) } else { None },
        schedule_hash,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Dt,
    FockCutoff,
    Delta,
    Rabi,
}

impl std::str::FromStr for SweepParam {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "dt" => Ok(SweepParam::Dt),
            "fock_cutoff" => Ok(SweepParam::FockCutoff),
            "delta" => Ok(SweepParam::Delta),
            "rabi" => Ok(SweepParam::Rabi),
            other => Err(CliError::Config(format!(
                "unknown sweep parameter {other:?}; expected dt, fock_cutoff, delta, or rabi"
            ))),
        }
    }
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Dt => "dt",
            SweepParam::FockCutoff => "fock_cutoff",
            SweepParam::Delta => "delta",
            SweepParam::Rabi => "rabi",
        }
    }
}

/// Parse a comma-separated value list; empty or blank input is an empty
/// sweep.
pub fn parse_values(s: &str) -> CliResult<Vec<f64>> {
    let trimmed = s.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad sweep value {:?}", tok.trim())))
        })
        .collect()
}

/// Apply one sweep value to a resolved configuration. Derived quantities
/// that were left at their defaults (drive, dt) are recomputed when the
/// parameters they derive from change; explicit settings are kept.
pub fn apply_sweep_value(r: &Resolved, param: SweepParam, value: f64) -> CliResult<Resolved> {
    let mut rr = r.clone();
    match param {
        SweepParam::Dt => {
            if !(value > 0.0) {
                return Err(CliError::Config(format!("sweep dt value {value} must be positive")));
            }
            rr.dt = value;
        }
        SweepParam::FockCutoff => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(CliError::Config(format!(
                    "sweep fock_cutoff value {value} must be a nonnegative integer"
                )));
            }
            rr.params.fock_cutoff = value as usize;
        }
        SweepParam::Delta => {
            rr.params.delta = TAU * value;
            if !rr.drive_explicit {
                rr.drive = rr.params.effective_drive();
            }
            if !rr.dt_explicit {
                rr.dt = rr.params.default_dt();
            }
        }
        SweepParam::Rabi => {
            rr.params.laser_rabi = TAU * value;
            if !rr.drive_explicit {
                rr.drive = rr.params.effective_drive();
            }
        }
    }
    rr.params
        .validate()
        .map_err(|e| CliError::Config(format!("sweep value {value}: {e}")))?;
    Ok(rr)
}

/// Run the sweep and return the CSV text: header, then one
/// (value, fidelity, leakage) row per input value, in input order.
pub fn run_sweep(r: &Resolved, param: SweepParam, values: &[f64]) -> CliResult<String> {
    let mut csv = resolved_header(r);
    csv.push_str(&format!("# sweep.parameter = {}\n", param.name()));
    csv.push_str("value,fidelity,leakage\n");
    if values.is_empty() {
        return Ok(csv);
    }
    if r.spec.num_controls > 2 {
        return Err(CliError::Config(
            "effective-only gate; full model undefined for more than two controls".into(),
        ));
    }
    for &value in values {
        let rr = apply_sweep_value(r, param, value)?;
        let schedule = compile(&rr.spec, rr.drive)?;
        let bits = default_initial_bits(&rr.spec);
        let res = ionholo::full_sim::gate_fidelity(
            &schedule,
            &rr.params,
            &bits,
            rr.dt,
            ionholo::full_sim::DecayModel::Lindblad,
            true,
            Exec::default(),
        )?;
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_sig12(value),
            fmt_sig12(res.fidelity),
            fmt_sig12(res.leakage)
        ));
    }
    Ok(csv)
}
