//! C ABI for the qdho engine.
//!
//! Conventions: handles are opaque pointers created by `*_new`/solver
//! functions and released by the matching `*_free`; every fallible function
//! returns a [`QdhoStatus`] and writes results through out-pointers, which
//! are touched only on `Ok`. Passing a null pointer yields `NullPointer`,
//! never a crash.

use std::ffi::{c_char, c_int};

use qdho::dynamics;
use qdho::error::Error;
use qdho::kernel::MemoryKernel;
use qdho::model::{
    self, BathOccupation, CouplingFunction, FieldBath, FieldQuantum, PhysicalConfig, ReservoirBath,
    ReservoirQuantum,
};
use qdho::oracle::{self, BathSelection};
use qdho::rates::{self, BroadeningKernel, Direction, SpectralRate};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdhoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Precondition = 4,
    ModelValidity = 5,
    Numerical = 6,
    Resource = 7,
    Config = 8,
    Io = 9,
}

fn status_of(err: &Error) -> QdhoStatus {
    match err {
        Error::Domain(_) => QdhoStatus::Domain,
        Error::Precondition(_) => QdhoStatus::Precondition,
        Error::ModelValidity(_) => QdhoStatus::ModelValidity,
        Error::Numerical(_) => QdhoStatus::Numerical,
        Error::Resource(_) => QdhoStatus::Resource,
        Error::Config(_) => QdhoStatus::Config,
        Error::Io(_) => QdhoStatus::Io,
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn qdho_status_message(status: QdhoStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        QdhoStatus::Ok => b"ok\0",
        QdhoStatus::NullPointer => b"null pointer argument\0",
        QdhoStatus::InvalidArgument => b"invalid argument\0",
        QdhoStatus::Domain => b"argument outside the mathematical domain\0",
        QdhoStatus::Precondition => b"precondition violated\0",
        QdhoStatus::ModelValidity => b"parameters outside the model's validity regime\0",
        QdhoStatus::Numerical => b"numerical failure\0",
        QdhoStatus::Resource => b"desk-scale resource limit exceeded\0",
        QdhoStatus::Config => b"bad configuration\0",
        QdhoStatus::Io => b"i/o failure\0",
    };
    text.as_ptr() as *const c_char
}

/// Library version string.
#[no_mangle]
pub extern "C" fn qdho_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opaque physical configuration handle.
pub struct QdhoConfig(PhysicalConfig);

/// Opaque transition/exchange rate handle.
pub struct QdhoRate(SpectralRate);

/// Opaque sampled-trajectory handle.
pub struct QdhoTrajectory(dynamics::Trajectory);

macro_rules! deref {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => return QdhoStatus::NullPointer,
        }
    };
}

macro_rules! out {
    ($ptr:expr, $value:expr) => {
        match unsafe { $ptr.as_mut() } {
            Some(slot) => *slot = $value,
            None => return QdhoStatus::NullPointer,
        }
    };
}

/// Build a configuration; fails on invalid parameters (m ≤ 0, cutoff ≤
/// omega, ...).
///
/// # Safety
/// `out` must be a valid pointer; the returned handle must be released with
/// [`qdho_config_free`].
#[no_mangle]
pub unsafe extern "C" fn qdho_config_new(
    m: f64,
    omega: f64,
    e: f64,
    beta: f64,
    temperature: f64,
    cutoff: f64,
    out: *mut *mut QdhoConfig,
) -> QdhoStatus {
    let cfg = PhysicalConfig {
        m,
        omega,
        e,
        beta,
        temperature,
        cutoff,
    };
    if let Err(err) = cfg.validate() {
        return status_of(&err);
    }
    out!(out, Box::into_raw(Box::new(QdhoConfig(cfg))));
    QdhoStatus::Ok
}

/// Release a configuration handle. Null is a no-op.
///
/// # Safety
/// `cfg` must come from [`qdho_config_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qdho_config_free(cfg: *mut QdhoConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Radiation-reaction time constant τ = e²/(6πm).
///
/// # Safety
/// `cfg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qdho_config_tau(cfg: *const QdhoConfig, out: *mut f64) -> QdhoStatus {
    let cfg = deref!(cfg);
    out!(out, cfg.0.tau());
    QdhoStatus::Ok
}

/// Ohmic coupling strength |f(ω)|² = β/(4π²ω³).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qdho_coupling_special(beta: f64, omega: f64, out: *mut f64) -> QdhoStatus {
    match model::coupling_special(beta, omega) {
        Ok(v) => {
            out!(out, v);
            QdhoStatus::Ok
        }
        Err(err) => status_of(&err),
    }
}

/// Mean thermal occupation n̄(ω, T); exactly 0 at T = 0.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qdho_bose_occupation(
    omega: f64,
    temperature: f64,
    out: *mut f64,
) -> QdhoStatus {
    match model::bose_occupation(omega, temperature) {
        Ok(v) => {
            out!(out, v);
            QdhoStatus::Ok
        }
        Err(err) => status_of(&err),
    }
}

/// Transversality sum Σ_λ ε_x² = 1 − k̂_x² for a unit direction.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qdho_polarization_sum_x(
    dx: f64,
    dy: f64,
    dz: f64,
    out: *mut f64,
) -> QdhoStatus {
    match model::polarization_sum_x([dx, dy, dz]) {
        Ok(v) => {
            out!(out, v);
            QdhoStatus::Ok
        }
        Err(err) => status_of(&err),
    }
}

/// Memory kernel γ(t) for the configuration's Ohmic coupling and cutoff.
///
/// # Safety
/// `cfg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qdho_kernel_gamma(
    cfg: *const QdhoConfig,
    t: f64,
    quadrature_points: usize,
    out: *mut f64,
) -> QdhoStatus {
    let cfg = &deref!(cfg).0;
    let kernel = match MemoryKernel::new(
        CouplingFunction::special(cfg.beta),
        cfg.m,
        cfg.cutoff,
        quadrature_points,
    ) {
        Ok(k) => k,
        Err(err) => return status_of(&err),
    };
    match kernel.gamma(t) {
        Ok(v) => {
            out!(out, v);
            QdhoStatus::Ok
        }
        Err(err) => status_of(&err),
    }
}

const BATH_VACUUM: c_int = 0;
const BATH_THERMAL: c_int = 1;
const BATH_FOCK: c_int = 2;

fn field_bath_from(
    kind: c_int,
    temperature: f64,
    quanta: *const f64,
    count: usize,
) -> Result<FieldBath, QdhoStatus> {
    match kind {
        BATH_VACUUM => Ok(BathOccupation::Vacuum),
        BATH_THERMAL => Ok(BathOccupation::Thermal(temperature)),
        BATH_FOCK => {
            if count == 0 {
                return Err(QdhoStatus::InvalidArgument);
            }
            if quanta.is_null() {
                return Err(QdhoStatus::NullPointer);
            }
            let raw = unsafe { std::slice::from_raw_parts(quanta, count * 5) };
            let mut list = Vec::with_capacity(count);
            for chunk in raw.chunks_exact(5) {
                let lambda = chunk[3];
                if lambda != 1.0 && lambda != 2.0 {
                    return Err(QdhoStatus::InvalidArgument);
                }
                let quantum =
                    FieldQuantum::new([chunk[0], chunk[1], chunk[2]], chunk[4], lambda as u8)
                        .map_err(|err| status_of(&err))?;
                list.push(quantum);
            }
            Ok(BathOccupation::Fock(list))
        }
        _ => Err(QdhoStatus::InvalidArgument),
    }
}

fn reservoir_bath_from(
    kind: c_int,
    temperature: f64,
    quanta: *const f64,
    count: usize,
) -> Result<ReservoirBath, QdhoStatus> {
    match kind {
        BATH_VACUUM => Ok(BathOccupation::Vacuum),
        BATH_THERMAL => Ok(BathOccupation::Thermal(temperature)),
        BATH_FOCK => {
            if count == 0 {
                return Err(QdhoStatus::InvalidArgument);
            }
            if quanta.is_null() {
                return Err(QdhoStatus::NullPointer);
            }
            let raw = unsafe { std::slice::from_raw_parts(quanta, count) };
            let mut list = Vec::with_capacity(count);
            for &omega_p in raw {
                list.push(ReservoirQuantum::new(omega_p).map_err(|err| status_of(&err))?);
            }
            Ok(BathOccupation::Fock(list))
        }
        _ => Err(QdhoStatus::InvalidArgument),
    }
}

/// First-order transition rate between adjacent oscillator levels.
///
/// `direction`: 0 = down, 1 = up. Bath kinds: 0 = vacuum, 1 = thermal
/// (uses the matching temperature argument), 2 = Fock. Field Fock quanta
/// are packed 5 doubles each (dx, dy, dz, lambda, omega_p); reservoir
/// quanta one double each (omega_p).
///
/// # Safety
/// Pointers must be valid; `out` receives a handle to release with
/// [`qdho_rate_free`].
#[no_mangle]
pub unsafe extern "C" fn qdho_transition_rate(
    cfg: *const QdhoConfig,
    n: u32,
    direction: c_int,
    field_kind: c_int,
    field_temperature: f64,
    field_quanta: *const f64,
    field_count: usize,
    reservoir_kind: c_int,
    reservoir_temperature: f64,
    reservoir_quanta: *const f64,
    reservoir_count: usize,
    out: *mut *mut QdhoRate,
) -> QdhoStatus {
    let cfg = &deref!(cfg).0;
    let direction = match direction {
        0 => Direction::Down,
        1 => Direction::Up,
        _ => return QdhoStatus::InvalidArgument,
    };
    let field = match field_bath_from(field_kind, field_temperature, field_quanta, field_count) {
        Ok(b) => b,
        Err(status) => return status,
    };
    let reservoir = match reservoir_bath_from(
        reservoir_kind,
        reservoir_temperature,
        reservoir_quanta,
        reservoir_count,
    ) {
        Ok(b) => b,
        Err(status) => return status,
    };
    match rates::transition_rate(n, direction, &field, &reservoir, cfg) {
        Ok(rate) => {
            out!(out, Box::into_raw(Box::new(QdhoRate(rate))));
            QdhoStatus::Ok
        }
        Err(err) => status_of(&err),
    }
}

/// Vacuum↔reservoir exchange rate for one photon mode.
///
/// `mode`: 0 = the photon is absorbed by the reservoir, 1 = the reservoir
/// emits into the photon mode. `photon` is 5 doubles (dx, dy, dz, lambda,
/// omega_p).
///
/// # Safety
/// Pointers must be valid; `out` receives a handle to release with
/// [`qdho_rate_free`].
#[no_mangle]
pub unsafe extern "C" fn qdho_exchange_rate(
    cfg: *const QdhoConfig,
    mode: c_int,
    photon: *const f64,
    reservoir_kind: c_int,
    reservoir_temperature: f64,
    reservoir_quanta: *const f64,
    reservoir_count: usize,
    out: *mut *mut QdhoRate,
) -> QdhoStatus {
    let cfg = &deref!(cfg).0;
    if photon.is_null() {
        return QdhoStatus::NullPointer;
    }
    let raw = unsafe { std::slice::from_raw_parts(photon, 5) };
    let lambda = raw[3];
    if lambda != 1.0 && lambda != 2.0 {
        return QdhoStatus::InvalidArgument;
    }
    let photon = match FieldQuantum::new([raw[0], raw[1], raw[2]], raw[4], lambda as u8) {
        Ok(p) => p,
        Err(err) => return status_of(&err),
    };
    let reservoir = match reservoir_bath_from(
        reservoir_kind,
        reservoir_temperature,
        reservoir_quanta,
        reservoir_count,
    ) {
        Ok(b) => b,
        Err(status) => return status,
    };
    let coupling = CouplingFunction::special(cfg.beta);
    let rate = match mode {
        0 => qdho::exchange::photon_absorption_rate(&photon, &reservoir, &coupling, cfg),
        1 => qdho::exchange::photon_emission_rate(&photon, &reservoir, &coupling, cfg),
        _ => return QdhoStatus::InvalidArgument,
    };
    match rate {
        Ok(rate) => {
            out!(out, Box::into_raw(Box::new(QdhoRate(rate))));
            QdhoStatus::Ok
        }
        Err(err) => status_of(&err),
    }
}

/// Smooth per-unit-time part of a rate.
///
/// # Safety
/// `rate` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qdho_rate_smooth(rate: *const QdhoRate, out: *mut f64) -> QdhoStatus {
    let rate = deref!(rate);
    out!(out, rate.0.smooth);
    QdhoStatus::Ok
}

/// Number of Dirac-mass resonance terms.
///
/// # Safety
/// `rate` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qdho_rate_resonance_count(
    rate: *const QdhoRate,
    out: *mut usize,
) -> QdhoStatus {
    let rate = deref!(rate);
    out!(out, rate.0.resonances.len());
    QdhoStatus::Ok
}

/// Location and weight of one resonance term.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qdho_rate_resonance(
    rate: *const QdhoRate,
    index: usize,
    out_location: *mut f64,
    out_weight: *mut f64,
) -> QdhoStatus {
    let rate = deref!(rate);
    match rate.0.resonances.get(index) {
        Some(resonance) => {
            out!(out_location, resonance.location);
            out!(out_weight, resonance.weight);
            QdhoStatus::Ok
        }
        None => QdhoStatus::InvalidArgument,
    }
}

/// Broadened transition probability smooth·t + Σ w·K_η(loc − ω_ref)·t.
///
/// `kernel_shape`: 0 = boxcar, 1 = Lorentzian. `out_clamped` becomes 1 when
/// the value exceeded the first-order validity limit 0.1 and was clamped.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qdho_rate_evaluate(
    rate: *const QdhoRate,
    t: f64,
    eta: f64,
    kernel_shape: c_int,
    omega_ref: f64,
    out_probability: *mut f64,
    out_clamped: *mut c_int,
) -> QdhoStatus {
    let rate = deref!(rate);
    let kernel = match kernel_shape {
        0 => BroadeningKernel::Boxcar,
        1 => BroadeningKernel::Lorentzian,
        _ => return QdhoStatus::InvalidArgument,
    };
    match rates::evaluate_spectral_rate(&rate.0, t, eta, kernel, omega_ref) {
        Ok(p) => {
            out!(out_probability, p.value);
            out!(out_clamped, p.clamped as c_int);
            QdhoStatus::Ok
        }
        Err(err) => status_of(&err),
    }
}

/// Release a rate handle. Null is a no-op.
///
/// # Safety
/// `rate` must come from a rate constructor and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qdho_rate_free(rate: *mut QdhoRate) {
    if !rate.is_null() {
        drop(unsafe { Box::from_raw(rate) });
    }
}

const SOLVER_MARKOV: c_int = 0;
const SOLVER_NONMARKOV: c_int = 1;
const SOLVER_RADIATION_REACTION: c_int = 2;

/// Integrate a trajectory from (q0, v0) to t_end with step h.
///
/// `solver`: 0 = Markovian, 1 = non-Markovian (memory kernel from the
/// configured cutoff; `quadrature_points` ≥ 64), 2 = radiation reaction.
///
/// # Safety
/// Pointers must be valid; `out` receives a handle to release with
/// [`qdho_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn qdho_solve(
    cfg: *const QdhoConfig,
    solver: c_int,
    quadrature_points: usize,
    q0: f64,
    v0: f64,
    t_end: f64,
    h: f64,
    out: *mut *mut QdhoTrajectory,
) -> QdhoStatus {
    let cfg = &deref!(cfg).0;
    let traj = match solver {
        SOLVER_MARKOV => dynamics::solve_markovian(cfg, q0, v0, t_end, h),
        SOLVER_RADIATION_REACTION => dynamics::solve_with_radiation_reaction(cfg, q0, v0, t_end, h),
        SOLVER_NONMARKOV => MemoryKernel::new(
            CouplingFunction::special(cfg.beta),
            cfg.m,
            cfg.cutoff,
            quadrature_points,
        )
        .and_then(|kernel| dynamics::solve_nonmarkovian(cfg, &kernel, q0, v0, t_end, h)),
        _ => return QdhoStatus::InvalidArgument,
    };
    match traj {
        Ok(traj) => {
            out!(out, Box::into_raw(Box::new(QdhoTrajectory(traj))));
            QdhoStatus::Ok
        }
        Err(err) => status_of(&err),
    }
}

/// Number of samples in a trajectory.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qdho_trajectory_len(
    traj: *const QdhoTrajectory,
    out: *mut usize,
) -> QdhoStatus {
    let traj = deref!(traj);
    out!(out, traj.0.len());
    QdhoStatus::Ok
}

/// One sample (t, q, q̇) of a trajectory.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qdho_trajectory_sample(
    traj: *const QdhoTrajectory,
    index: usize,
    out_t: *mut f64,
    out_q: *mut f64,
    out_qdot: *mut f64,
) -> QdhoStatus {
    let traj = deref!(traj);
    if index >= traj.0.len() {
        return QdhoStatus::InvalidArgument;
    }
    out!(out_t, traj.0.time(index));
    out!(out_q, traj.0.q[index]);
    out!(out_qdot, traj.0.qdot[index]);
    QdhoStatus::Ok
}

/// Release a trajectory handle. Null is a no-op.
///
/// # Safety
/// `traj` must come from [`qdho_solve`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qdho_trajectory_free(traj: *mut QdhoTrajectory) {
    if !traj.is_null() {
        drop(unsafe { Box::from_raw(traj) });
    }
}

/// First-step oracle run: discretize the selected baths over
/// [band_lo, band_hi] (absolute frequencies), evolve exactly, fit the
/// transfer slope over [t_lo, t_hi] and report it next to the analytic
/// slope.
///
/// `bath`: 0 = reservoir, 1 = field, 2 = both.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qdho_oracle_run(
    cfg: *const QdhoConfig,
    bath: c_int,
    n: u32,
    modes: usize,
    band_lo: f64,
    band_hi: f64,
    t_lo: f64,
    t_hi: f64,
    steps: usize,
    out_fitted: *mut f64,
    out_analytic: *mut f64,
) -> QdhoStatus {
    let cfg = &deref!(cfg).0;
    let selection = match bath {
        0 => BathSelection::Reservoir,
        1 => BathSelection::Field,
        2 => BathSelection::Both,
        _ => return QdhoStatus::InvalidArgument,
    };
    if steps < 2 {
        return QdhoStatus::InvalidArgument;
    }
    let times = oracle::linspace(t_lo, t_hi, steps);
    match oracle::run_first_step(cfg, selection, n, modes, (band_lo, band_hi), &times) {
        Ok(run) => {
            out!(out_fitted, run.fitted_slope);
            out!(out_analytic, run.analytic_slope);
            QdhoStatus::Ok
        }
        Err(err) => status_of(&err),
    }
}
