//! Independent brute-force verification of the analytic rates: discretize
//! the baths into M bosonic modes, build the excitation-conserving
//! interaction in a closed sector, evolve exactly by dense symmetric
//! diagonalization, and confirm that transition probabilities grow linearly
//! with slope equal to the analytic prediction.
//!
//! The interaction conserves total excitation number once counter-rotating
//! terms are dropped, so exact evolution in the sector reachable from the
//! initial state is cheap: dimension M + 1 for one quantum of excitation.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::dynamics::linear_slope;
use crate::error::{Error, Result};
use crate::kernel::gauss_legendre;
use crate::model::{bose_occupation, CouplingFunction, PhysicalConfig};

/// Which continuum a mode grid discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathKind {
    Reservoir,
    Field,
}

/// Which baths an oracle run couples to the oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathSelection {
    Reservoir,
    Field,
    Both,
}

/// Discretized bath: M mode frequencies with one-dimensional couplings
/// g_j² = J(ω_j)·Δω.
#[derive(Debug, Clone)]
pub struct ModeGrid {
    pub kind: BathKind,
    pub omegas: Vec<f64>,
    pub couplings: Vec<f64>,
    pub spacing: f64,
}

/// Single-quantum decay rate the analytic rate table predicts for one bath
/// alone, evaluated at oscillator frequency `omega`.
pub fn spontaneous_rate(
    kind: BathKind,
    coupling: &CouplingFunction,
    config: &PhysicalConfig,
    omega: f64,
) -> Result<f64> {
    match kind {
        BathKind::Reservoir => {
            Ok(4.0 * PI * PI * omega.powi(3) * coupling.strength_sq(omega)? / config.m)
        }
        BathKind::Field => Ok(config.e * config.e * omega * omega / (6.0 * PI * config.m)),
    }
}

/// Effective one-dimensional spectral density J(ω) = Γ_spont(ω)/2π, the
/// golden-rule reduction of the three-dimensional mode integral
/// (solid angle 4π for the reservoir, polarization-summed 8π/3 for the
/// field; see [`solid_angle_integral`] for the independent quadrature).
pub fn spectral_density(
    kind: BathKind,
    coupling: &CouplingFunction,
    config: &PhysicalConfig,
    omega: f64,
) -> Result<f64> {
    Ok(spontaneous_rate(kind, coupling, config, omega)? / (2.0 * PI))
}

/// ∫ dΩ f(k̂) over the unit sphere by Gauss-Legendre in cos θ and the
/// trapezoidal rule in φ.
pub fn solid_angle_integral(f: impl Fn([f64; 3]) -> f64) -> f64 {
    let phi_steps = 96;
    let dphi = 2.0 * PI / phi_steps as f64;
    let integrand = |cos_theta: f64| -> f64 {
        let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
        let mut acc = 0.0;
        for i in 0..phi_steps {
            let phi = (i as f64 + 0.5) * dphi;
            acc += f([sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta]);
        }
        acc * dphi
    };
    gauss_legendre(&integrand, -1.0, 1.0, 6)
}

/// Uniform mode grid over `band` with golden-rule-normalized couplings:
/// 2π g_j²/Δω equals the spontaneous rate at ω_j by construction.
pub fn discretize(
    kind: BathKind,
    coupling: &CouplingFunction,
    config: &PhysicalConfig,
    band: (f64, f64),
    modes: usize,
) -> Result<ModeGrid> {
    let (lo, hi) = band;
    if !(lo > 0.0 && lo < config.omega && config.omega < hi && hi.is_finite()) {
        return Err(Error::Precondition(format!(
            "band [{lo}, {hi}] must satisfy 0 < lo < omega = {} < hi",
            config.omega
        )));
    }
    if modes == 0 {
        return Err(Error::Precondition("mode count must be at least 1".into()));
    }
    let spacing = (hi - lo) / modes as f64;
    let mut omegas = Vec::with_capacity(modes);
    let mut couplings = Vec::with_capacity(modes);
    for j in 0..modes {
        let omega_j = lo + (j as f64 + 0.5) * spacing;
        let density = spectral_density(kind, coupling, config, omega_j)?;
        omegas.push(omega_j);
        couplings.push((density * spacing).sqrt());
    }
    Ok(ModeGrid {
        kind,
        omegas,
        couplings,
        spacing,
    })
}

/// Mode grids for the selected baths, sharing one band and mode count.
/// The reservoir uses the Ohmic coupling built from `config.beta`.
pub fn standard_grids(
    config: &PhysicalConfig,
    selection: BathSelection,
    band: (f64, f64),
    modes: usize,
) -> Result<Vec<ModeGrid>> {
    let coupling = CouplingFunction::special(config.beta);
    let mut grids = Vec::new();
    if matches!(selection, BathSelection::Reservoir | BathSelection::Both) {
        grids.push(discretize(
            BathKind::Reservoir,
            &coupling,
            config,
            band,
            modes,
        )?);
    }
    if matches!(selection, BathSelection::Field | BathSelection::Both) {
        grids.push(discretize(BathKind::Field, &coupling, config, band, modes)?);
    }
    Ok(grids)
}

/// Basis restriction of the sector model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorMode {
    /// |n, vac⟩ plus the single-step-down states |n−1, 1_j⟩.
    FirstStep,
    /// Every level down to the ground state with the matching multi-quantum
    /// bath states.
    FullCascade,
}

/// Excitation-conserving sector Hamiltonian on an explicit basis.
///
/// `levels[i]` is the oscillator level of basis state i; the initial state
/// sits at `initial_index`. The matrix is real symmetric by construction.
#[derive(Debug, Clone)]
pub struct SectorModel {
    pub n_initial: u32,
    pub levels: Vec<u32>,
    pub hamiltonian: DMatrix<f64>,
    pub initial_index: usize,
}

impl SectorModel {
    pub fn dim(&self) -> usize {
        self.levels.len()
    }
}

const MAX_SECTOR_DIM: usize = 100_000;

fn flatten(grids: &[ModeGrid]) -> (Vec<f64>, Vec<f64>) {
    let omegas: Vec<f64> = grids
        .iter()
        .flat_map(|g| g.omegas.iter().copied())
        .collect();
    let couplings: Vec<f64> = grids
        .iter()
        .flat_map(|g| g.couplings.iter().copied())
        .collect();
    (omegas, couplings)
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut value = 1.0f64;
    for i in 0..k {
        value *= (n - i) as f64 / (k - i) as f64;
    }
    value
}

/// Sector basis and Hamiltonian for an oscillator starting in |n_initial⟩
/// with every bath mode empty.
pub fn build_sector(
    n_initial: u32,
    grids: &[ModeGrid],
    config: &PhysicalConfig,
    mode: SectorMode,
) -> Result<SectorModel> {
    if n_initial == 0 {
        return Err(Error::Precondition(
            "sector construction requires n_initial >= 1".into(),
        ));
    }
    if grids.is_empty() {
        return Err(Error::Precondition(
            "at least one mode grid required".into(),
        ));
    }
    let (omegas, couplings) = flatten(grids);
    let m = omegas.len();
    let omega_osc = config.omega;

    match mode {
        SectorMode::FirstStep => {
            let dim = m + 1;
            if dim > MAX_SECTOR_DIM {
                return Err(Error::Resource(format!(
                    "sector dimension {dim} exceeds the desk-scale limit {MAX_SECTOR_DIM}"
                )));
            }
            let mut h = DMatrix::zeros(dim, dim);
            let mut levels = Vec::with_capacity(dim);
            h[(0, 0)] = n_initial as f64 * omega_osc;
            levels.push(n_initial);
            let root_n = (n_initial as f64).sqrt();
            for j in 0..m {
                let idx = j + 1;
                h[(idx, idx)] = (n_initial - 1) as f64 * omega_osc + omegas[j];
                h[(0, idx)] = couplings[j] * root_n;
                h[(idx, 0)] = h[(0, idx)];
                levels.push(n_initial - 1);
            }
            Ok(SectorModel {
                n_initial,
                levels,
                hamiltonian: h,
                initial_index: 0,
            })
        }
        SectorMode::FullCascade => {
            let n = n_initial as usize;
            let mut dim_estimate = 0.0f64;
            for d in 0..=n {
                dim_estimate += binomial(m + d - 1, d);
            }
            if dim_estimate > MAX_SECTOR_DIM as f64 {
                return Err(Error::Resource(format!(
                    "cascade sector dimension ~{dim_estimate:.0} exceeds the desk-scale limit {MAX_SECTOR_DIM}"
                )));
            }

            // Configurations at depth d are non-decreasing mode-index
            // multisets of size d, enumerated lexicographically.
            let mut configs_by_depth: Vec<Vec<Vec<u16>>> = Vec::with_capacity(n + 1);
            configs_by_depth.push(vec![vec![]]);
            for d in 1..=n {
                let mut level = Vec::new();
                for cfg in &configs_by_depth[d - 1] {
                    let start = cfg.last().map_or(0, |&last| last);
                    for j in start..m as u16 {
                        let mut next = cfg.clone();
                        next.push(j);
                        level.push(next);
                    }
                }
                configs_by_depth.push(level);
            }

            let mut index: HashMap<Vec<u16>, usize> = HashMap::new();
            let mut levels = Vec::new();
            let mut flat_configs: Vec<Vec<u16>> = Vec::new();
            for (d, level) in configs_by_depth.iter().enumerate() {
                for cfg in level {
                    index.insert(cfg.clone(), flat_configs.len());
                    levels.push((n - d) as u32);
                    flat_configs.push(cfg.clone());
                }
            }
            let dim = flat_configs.len();
            let mut h = DMatrix::zeros(dim, dim);
            for (i, cfg) in flat_configs.iter().enumerate() {
                let depth = cfg.len();
                let level = (n - depth) as f64;
                let bath_energy: f64 = cfg.iter().map(|&j| omegas[j as usize]).sum();
                h[(i, i)] = level * omega_osc + bath_energy;
                if depth == n {
                    continue;
                }
                for j in 0..m as u16 {
                    let mut next = cfg.clone();
                    let pos = next.partition_point(|&x| x <= j);
                    next.insert(pos, j);
                    let count = cfg.iter().filter(|&&x| x == j).count() as f64;
                    let i2 = index[&next];
                    let elem = couplings[j as usize] * level.sqrt() * (count + 1.0).sqrt();
                    h[(i, i2)] = elem;
                    h[(i2, i)] = elem;
                }
            }
            Ok(SectorModel {
                n_initial,
                levels,
                hamiltonian: h,
                initial_index: 0,
            })
        }
    }
}

/// One-step model around an initial state with `occupancy` quanta in one
/// bath mode: the initial state, every single-emission state |n−1, +1_k⟩,
/// and the single-absorption state |n+1, −1 in the occupied mode⟩.
///
/// This is the first-step restriction generalized to an occupied bath;
/// thermal rates are verified as probability-weighted mixtures of these
/// models over (mode, occupancy).
pub fn build_one_step_model(
    n_initial: u32,
    occupied_mode: usize,
    occupancy: u32,
    grids: &[ModeGrid],
    config: &PhysicalConfig,
) -> Result<SectorModel> {
    if n_initial == 0 {
        return Err(Error::Precondition(
            "one-step model requires n_initial >= 1".into(),
        ));
    }
    if occupancy == 0 {
        return Err(Error::Precondition(
            "one-step model requires a populated mode".into(),
        ));
    }
    let (omegas, couplings) = flatten(grids);
    let m = omegas.len();
    if occupied_mode >= m {
        return Err(Error::Precondition(format!(
            "occupied mode {occupied_mode} outside the grid of {m} modes"
        )));
    }
    let dim = m + 2;
    if dim > MAX_SECTOR_DIM {
        return Err(Error::Resource(format!(
            "sector dimension {dim} exceeds the desk-scale limit {MAX_SECTOR_DIM}"
        )));
    }
    let omega_osc = config.omega;
    let n = n_initial as f64;
    let nu = occupancy as f64;
    let mut h = DMatrix::zeros(dim, dim);
    let mut levels = Vec::with_capacity(dim);

    h[(0, 0)] = n * omega_osc + nu * omegas[occupied_mode];
    levels.push(n_initial);
    for k in 0..m {
        let idx = k + 1;
        let bose_factor = if k == occupied_mode { nu + 1.0 } else { 1.0 };
        h[(idx, idx)] = (n - 1.0) * omega_osc + nu * omegas[occupied_mode] + omegas[k];
        h[(0, idx)] = couplings[k] * n.sqrt() * bose_factor.sqrt();
        h[(idx, 0)] = h[(0, idx)];
        levels.push(n_initial - 1);
    }
    let up = m + 1;
    h[(up, up)] = (n + 1.0) * omega_osc + (nu - 1.0) * omegas[occupied_mode];
    h[(0, up)] = couplings[occupied_mode] * (n + 1.0).sqrt() * nu.sqrt();
    h[(up, 0)] = h[(0, up)];
    levels.push(n_initial + 1);

    Ok(SectorModel {
        n_initial,
        levels,
        hamiltonian: h,
        initial_index: 0,
    })
}

/// Exact time evolution of a sector model from its initial basis state.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub times: Vec<f64>,
    /// Survival probability of the initial state at each time.
    pub p_stay: Vec<f64>,
    /// Probability of each basis state at each time (row per time).
    pub populations: Vec<Vec<f64>>,
}

impl Evolution {
    /// Total population of states with oscillator level strictly below the
    /// initial one.
    pub fn transfer_down(&self, model: &SectorModel) -> Vec<f64> {
        self.sum_where(model, |level, n0| level < n0)
    }

    /// Total population of states with oscillator level strictly above the
    /// initial one.
    pub fn transfer_up(&self, model: &SectorModel) -> Vec<f64> {
        self.sum_where(model, |level, n0| level > n0)
    }

    /// 1 − P_stay.
    pub fn transfer_total(&self) -> Vec<f64> {
        self.p_stay.iter().map(|&p| 1.0 - p).collect()
    }

    fn sum_where(&self, model: &SectorModel, keep: impl Fn(u32, u32) -> bool) -> Vec<f64> {
        self.populations
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&model.levels)
                    .filter(|(_, &level)| keep(level, model.n_initial))
                    .map(|(&p, _)| p)
                    .sum()
            })
            .collect()
    }
}

/// Diagonalize the sector Hamiltonian and evolve the initial state exactly,
/// returning survival and per-state probabilities. Probabilities sum to 1
/// at every time (checked to 1e-8; tests pin 1e-10).
pub fn evolve_survival(model: &SectorModel, times: &[f64]) -> Result<Evolution> {
    if times.is_empty() {
        return Err(Error::Precondition("no sample times given".into()));
    }
    let dim = model.dim();
    let eigen =
        nalgebra::linalg::SymmetricEigen::try_new(model.hamiltonian.clone(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("sector diagonalization failed to converge".into()))?;
    let u = &eigen.eigenvectors;
    let energies = &eigen.eigenvalues;
    // Overlaps of the initial basis state with each eigenvector.
    let weights: Vec<f64> = (0..dim).map(|k| u[(model.initial_index, k)]).collect();

    let mut p_stay = Vec::with_capacity(times.len());
    let mut populations = Vec::with_capacity(times.len());
    for &t in times {
        let phases: Vec<(f64, f64)> = (0..dim)
            .map(|k| {
                let arg = energies[k] * t;
                (arg.cos(), arg.sin())
            })
            .collect();
        let mut row = Vec::with_capacity(dim);
        let mut total = 0.0;
        for a in 0..dim {
            let mut re = 0.0;
            let mut im = 0.0;
            for k in 0..dim {
                let amp = u[(a, k)] * weights[k];
                re += amp * phases[k].0;
                im -= amp * phases[k].1;
            }
            let p = re * re + im * im;
            row.push(p);
            total += p;
        }
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::Numerical(format!(
                "probabilities sum to {total} at t = {t}"
            )));
        }
        p_stay.push(row[model.initial_index]);
        populations.push(row);
    }
    Ok(Evolution {
        times: times.to_vec(),
        p_stay,
        populations,
    })
}

/// Least-squares slope of transfer probability against time over
/// [t_lo, t_hi], guarded by the golden-rule window bounds.
pub fn fitted_rate(
    times: &[f64],
    transfer: &[f64],
    window: (f64, f64),
    bandwidth: f64,
) -> Result<f64> {
    let (t_lo, t_hi) = window;
    if bandwidth <= 0.0 || bandwidth.is_nan() {
        return Err(Error::Precondition(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    let transient = 10.0 / bandwidth;
    if t_lo < transient {
        return Err(Error::Precondition(format!(
            "window start {t_lo} violates t_lo >= 10/bandwidth = {transient}"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut last_in_window = None;
    for (&t, &p) in times.iter().zip(transfer) {
        if t >= t_lo && t <= t_hi {
            xs.push(t);
            ys.push(p);
            last_in_window = Some(p);
        }
    }
    match last_in_window {
        None => {
            return Err(Error::Precondition(format!(
                "no samples inside the window [{t_lo}, {t_hi}]"
            )))
        }
        Some(p_end) => {
            if p_end > 0.1 {
                return Err(Error::Precondition(format!(
                    "total transfer {p_end} at the window end exceeds the perturbative bound 0.1"
                )));
            }
        }
    }
    if xs.len() < 2 {
        return Err(Error::Precondition(
            "slope fit needs at least two samples in the window".into(),
        ));
    }
    Ok(linear_slope(&xs, &ys))
}

/// Uniform sample grid over [lo, hi], inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps < 2 {
        return vec![lo];
    }
    let dt = (hi - lo) / (steps - 1) as f64;
    (0..steps).map(|i| lo + i as f64 * dt).collect()
}

/// Result of a first-step oracle run plus the analytic slope it checks.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub times: Vec<f64>,
    pub p_stay: Vec<f64>,
    pub p_transfer: Vec<f64>,
    pub fitted_slope: f64,
    /// n·(β/m) for the reservoir, n·e²ω²/(6πm) for the field, their sum for
    /// both.
    pub analytic_slope: f64,
}

impl OracleRun {
    pub fn ratio(&self) -> Option<f64> {
        (self.analytic_slope != 0.0).then(|| self.fitted_slope / self.analytic_slope)
    }
}

/// Analytic decay slope for the selected bath channels at occupation n.
pub fn analytic_down_slope(config: &PhysicalConfig, selection: BathSelection, n: u32) -> f64 {
    let mut slope = 0.0;
    if matches!(selection, BathSelection::Reservoir | BathSelection::Both) {
        slope += config.friction_rate();
    }
    if matches!(selection, BathSelection::Field | BathSelection::Both) {
        slope += config.field_decay_rate();
    }
    n as f64 * slope
}

/// Build, evolve and fit a first-step oracle run over the given times; the
/// first and last sample bound the fit window.
pub fn run_first_step(
    config: &PhysicalConfig,
    selection: BathSelection,
    n: u32,
    modes: usize,
    band: (f64, f64),
    times: &[f64],
) -> Result<OracleRun> {
    let grids = standard_grids(config, selection, band, modes)?;
    let model = build_sector(n, &grids, config, SectorMode::FirstStep)?;
    let evolution = evolve_survival(&model, times)?;
    let transfer = evolution.transfer_total();
    let window = (times[0], times[times.len() - 1]);
    let fitted = fitted_rate(times, &transfer, window, band.1 - band.0)?;
    Ok(OracleRun {
        times: evolution.times,
        p_stay: evolution.p_stay,
        p_transfer: transfer,
        fitted_slope: fitted,
        analytic_slope: analytic_down_slope(config, selection, n),
    })
}

/// Truncated thermal occupancy statistics of one mode: the retained mean
/// Σ_{ν ≤ ν_max} ν·P_T(ν) with ν_max = ⌈n̄ + 5√n̄⌉, and the exact mean it
/// discards.
pub fn truncated_thermal_mean(omega: f64, temperature: f64) -> Result<(f64, u32, f64)> {
    let mean = bose_occupation(omega, temperature)?;
    if mean == 0.0 {
        return Ok((0.0, 0, 0.0));
    }
    let nu_max = (mean + 5.0 * mean.sqrt()).ceil() as u32;
    let x = (-omega / temperature).exp();
    let mut retained = 0.0;
    for nu in 1..=nu_max {
        retained += nu as f64 * (1.0 - x) * x.powi(nu as i32);
    }
    Ok((retained, nu_max, mean - retained))
}

/// Thermal-oracle outcome: fitted down/up slopes of the truncated thermal
/// mixture, plus the largest per-mode occupancy tail the truncation drops.
#[derive(Debug, Clone)]
pub struct ThermalSlopes {
    pub down_slope: f64,
    pub up_slope: f64,
    pub max_truncation_tail: f64,
}

/// Verify thermal smooth rates by exact evolution: a probability-weighted
/// mixture of one-step models over single-mode Fock configurations
/// (mode j populated by ν ≤ ν_max quanta, all others empty). Joint
/// multi-mode occupancies contribute only beyond first order inside the
/// golden-rule window, so per-mode marginal weights P_T(ν|ω_j) suffice.
pub fn thermal_mixture_slopes(
    config: &PhysicalConfig,
    selection: BathSelection,
    n: u32,
    modes: usize,
    band: (f64, f64),
    temperature: f64,
    times: &[f64],
) -> Result<ThermalSlopes> {
    if temperature <= 0.0 || temperature.is_nan() {
        return Err(Error::Precondition(format!(
            "thermal oracle requires T > 0, got {temperature}"
        )));
    }
    let grids = standard_grids(config, selection, band, modes)?;
    let (omegas, _) = flatten(&grids);

    let vacuum_model = build_sector(n, &grids, config, SectorMode::FirstStep)?;
    let vacuum_down = evolve_survival(&vacuum_model, times)?.transfer_total();

    let mut down_acc = vacuum_down.clone();
    let mut up_acc = vec![0.0; times.len()];
    let mut max_tail = 0.0f64;

    for (j, &omega_j) in omegas.iter().enumerate() {
        let (_, nu_max, tail) = truncated_thermal_mean(omega_j, temperature)?;
        max_tail = max_tail.max(tail);
        let x = (-omega_j / temperature).exp();
        for nu in 1..=nu_max {
            let weight = (1.0 - x) * x.powi(nu as i32);
            let model = build_one_step_model(n, j, nu, &grids, config)?;
            let evolution = evolve_survival(&model, times)?;
            let down = evolution.transfer_down(&model);
            let up = evolution.transfer_up(&model);
            for i in 0..times.len() {
                down_acc[i] += weight * (down[i] - vacuum_down[i]);
                up_acc[i] += weight * up[i];
            }
        }
    }

    let window = (times[0], times[times.len() - 1]);
    let bandwidth = band.1 - band.0;
    Ok(ThermalSlopes {
        down_slope: fitted_rate(times, &down_acc, window, bandwidth)?,
        up_slope: fitted_rate(times, &up_acc, window, bandwidth)?,
        max_truncation_tail: max_tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::polarization_sum_x;
    use approx::assert_relative_eq;

    fn config(beta: f64, e: f64) -> PhysicalConfig {
        PhysicalConfig {
            beta,
            e,
            ..PhysicalConfig::default()
        }
    }

    fn charge_for_tau(tau: f64) -> f64 {
        (6.0 * PI * tau).sqrt()
    }

    #[test]
    fn golden_rule_identity_by_construction() {
        let cfg = config(2e-3, 0.3);
        let coupling = CouplingFunction::special(cfg.beta);
        for kind in [BathKind::Reservoir, BathKind::Field] {
            let grid = discretize(kind, &coupling, &cfg, (0.2, 5.0), 40).unwrap();
            for (j, &g) in grid.couplings.iter().enumerate() {
                let gamma = spontaneous_rate(kind, &coupling, &cfg, grid.omegas[j]).unwrap();
                assert_relative_eq!(2.0 * PI * g * g / grid.spacing, gamma, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn ohmic_reservoir_density_is_flat() {
        let cfg = config(2e-3, 0.0);
        let coupling = CouplingFunction::special(cfg.beta);
        let grid = discretize(BathKind::Reservoir, &coupling, &cfg, (0.2, 5.0), 60).unwrap();
        let expected = cfg.beta / (2.0 * PI * cfg.m);
        for &g in &grid.couplings {
            assert_relative_eq!(g * g / grid.spacing, expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn densities_match_solid_angle_reduction() {
        // Re-derive J(ω) from the 3D mode integral: the oscillator-mode
        // coupling squared per unit ω is ω²∫dΩ Σ_λ |V|², with the angular
        // factor obtained by numerical quadrature.
        let cfg = config(1.7e-3, 0.4);
        let coupling = CouplingFunction::special(cfg.beta);
        let full_angle = solid_angle_integral(|_| 1.0);
        assert_relative_eq!(full_angle, 4.0 * PI, max_relative = 1e-12);
        let pol_angle = solid_angle_integral(|k| polarization_sum_x(k).unwrap());
        assert_relative_eq!(pol_angle, 8.0 * PI / 3.0, max_relative = 1e-12);

        for omega in [0.4, 1.0, 2.5] {
            // Reservoir: |V|² = (ω/2m)|f(ω)|², uniform over the sphere.
            let j_reservoir = omega
                * omega
                * (omega / (2.0 * cfg.m))
                * coupling.strength_sq(omega).unwrap()
                * full_angle;
            assert_relative_eq!(
                spectral_density(BathKind::Reservoir, &coupling, &cfg, omega).unwrap(),
                j_reservoir,
                max_relative = 1e-12
            );
            // Field: |V|² = e²(ω/2m)·ε_x²/(2(2π)³ω), polarization-summed.
            let j_field = omega * omega * (cfg.e * cfg.e * omega / (2.0 * cfg.m))
                / (2.0 * (2.0 * PI).powi(3) * omega)
                * pol_angle;
            assert_relative_eq!(
                spectral_density(BathKind::Field, &coupling, &cfg, omega).unwrap(),
                j_field,
                max_relative = 1e-12
            );
            // Closed form of the field reduction.
            assert_relative_eq!(
                j_field,
                cfg.e * cfg.e * omega * omega / (12.0 * PI * PI * cfg.m),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn band_must_contain_oscillator_frequency() {
        let cfg = config(1e-3, 0.0);
        let coupling = CouplingFunction::special(cfg.beta);
        for band in [(1.2, 5.0), (0.2, 0.9), (-1.0, 5.0), (0.0, 5.0)] {
            assert!(matches!(
                discretize(BathKind::Reservoir, &coupling, &cfg, band, 10),
                Err(Error::Precondition(_))
            ));
        }
    }

    #[test]
    fn sector_dimensions_count() {
        let cfg = config(1e-3, charge_for_tau(1e-3));
        let grids = standard_grids(&cfg, BathSelection::Reservoir, (0.2, 5.0), 37).unwrap();
        let model = build_sector(1, &grids, &cfg, SectorMode::FirstStep).unwrap();
        assert_eq!(model.dim(), 38);

        let both = standard_grids(&cfg, BathSelection::Both, (0.2, 5.0), 23).unwrap();
        let model2 = build_sector(1, &both, &cfg, SectorMode::FirstStep).unwrap();
        assert_eq!(model2.dim(), 47);

        // Cascade from n = 2: 1 + M + M(M+1)/2 states.
        let model3 = build_sector(2, &grids, &cfg, SectorMode::FullCascade).unwrap();
        assert_eq!(model3.dim(), 1 + 37 + 37 * 38 / 2);
    }

    #[test]
    fn sector_hamiltonian_is_symmetric() {
        let cfg = config(1e-3, charge_for_tau(1e-3));
        let grids = standard_grids(&cfg, BathSelection::Both, (0.3, 4.0), 15).unwrap();
        for mode in [SectorMode::FirstStep, SectorMode::FullCascade] {
            let model = build_sector(2, &grids, &cfg, mode).unwrap();
            let h = &model.hamiltonian;
            assert_eq!(h, &h.transpose());
        }
    }

    #[test]
    fn cascade_dimension_guard() {
        let cfg = config(1e-3, 0.0);
        let grids = standard_grids(&cfg, BathSelection::Reservoir, (0.2, 5.0), 2000).unwrap();
        assert!(matches!(
            build_sector(3, &grids, &cfg, SectorMode::FullCascade),
            Err(Error::Resource(_))
        ));
    }

    /// One resonant mode: the grid midpoint falls exactly on ω for a band
    /// symmetric around it.
    fn single_resonant_mode(cfg: &PhysicalConfig) -> Vec<ModeGrid> {
        standard_grids(cfg, BathSelection::Reservoir, (0.5, 1.5), 1).unwrap()
    }

    #[test]
    fn rabi_oscillation_exact() {
        let cfg = config(2e-3, 0.0);
        let grids = single_resonant_mode(&cfg);
        let g = grids[0].couplings[0];
        let model = build_sector(1, &grids, &cfg, SectorMode::FirstStep).unwrap();
        let times = linspace(0.0, 3.0 / g, 400);
        let evolution = evolve_survival(&model, &times).unwrap();
        for (i, &t) in times.iter().enumerate() {
            let expected = (g * t).sin().powi(2);
            assert!(
                (evolution.populations[i][1] - expected).abs() < 1e-8,
                "t = {t}"
            );
        }
    }

    #[test]
    fn detuned_two_level_formula() {
        let cfg = config(2e-3, 0.0);
        // Band [0.7, 1.7] puts the single mode at 1.2: detuning 0.2.
        let grids = standard_grids(&cfg, BathSelection::Reservoir, (0.7, 1.7), 1).unwrap();
        let g = grids[0].couplings[0];
        let delta = grids[0].omegas[0] - cfg.omega;
        let model = build_sector(1, &grids, &cfg, SectorMode::FirstStep).unwrap();
        let times = linspace(0.0, 2.0 / g, 300);
        let evolution = evolve_survival(&model, &times).unwrap();
        let rabi_sq = g * g + 0.25 * delta * delta;
        for (i, &t) in times.iter().enumerate() {
            let expected = g * g / rabi_sq * (rabi_sq.sqrt() * t).sin().powi(2);
            assert!(
                (evolution.populations[i][1] - expected).abs() < 1e-8,
                "t = {t}: {} vs {expected}",
                evolution.populations[i][1]
            );
        }
    }

    #[test]
    fn unitarity_at_all_times() {
        let cfg = config(2e-3, charge_for_tau(1e-3));
        let grids = standard_grids(&cfg, BathSelection::Both, (0.2, 5.0), 60).unwrap();
        let model = build_sector(1, &grids, &cfg, SectorMode::FirstStep).unwrap();
        let times = linspace(0.0, 400.0, 160);
        let evolution = evolve_survival(&model, &times).unwrap();
        for row in &evolution.populations {
            let total: f64 = row.iter().sum();
            assert!((total - 1.0).abs() < 1e-10, "sum = {total}");
        }
    }

    #[test]
    fn early_time_per_mode_transfer_is_first_order() {
        // While total transfer stays below 1%, each mode's population
        // matches |g ∫ e^{iΔt'} dt'|² = g²·sin²(Δt/2)/(Δ/2)².
        let cfg = config(2e-4, 0.0);
        let grids = standard_grids(&cfg, BathSelection::Reservoir, (0.2, 5.0), 80).unwrap();
        let model = build_sector(1, &grids, &cfg, SectorMode::FirstStep).unwrap();
        let t = 4.0;
        let evolution = evolve_survival(&model, &[t]).unwrap();
        let total = 1.0 - evolution.p_stay[0];
        assert!(total < 0.01, "total transfer {total}");
        let row = &evolution.populations[0];
        let peak = row[1..].iter().cloned().fold(0.0, f64::max);
        for (j, (&g, &w)) in grids[0].couplings.iter().zip(&grids[0].omegas).enumerate() {
            let delta = w - cfg.omega;
            let first_order = if delta.abs() < 1e-12 {
                g * g * t * t
            } else {
                g * g * (0.5 * delta * t).sin().powi(2) / (0.5 * delta).powi(2)
            };
            let exact = row[j + 1];
            if first_order > 1e-6 * peak {
                assert!(
                    (exact / first_order - 1.0).abs() < 0.05,
                    "mode {j}: exact {exact} vs first order {first_order}"
                );
            }
        }
    }

    #[test]
    fn cascade_three_level_chain() {
        // n = 2 with one resonant mode: the cascade through |1, 1⟩ reaches
        // |0, 2⟩ with probability sin⁴(gt).
        let cfg = config(2e-3, 0.0);
        let grids = single_resonant_mode(&cfg);
        let g = grids[0].couplings[0];
        let model = build_sector(2, &grids, &cfg, SectorMode::FullCascade).unwrap();
        assert_eq!(model.dim(), 3);
        let ground_idx = model.levels.iter().position(|&level| level == 0).unwrap();
        let times = linspace(0.0, 2.0 / g, 200);
        let evolution = evolve_survival(&model, &times).unwrap();
        for (i, &t) in times.iter().enumerate() {
            let expected = (g * t).sin().powi(4);
            assert!(
                (evolution.populations[i][ground_idx] - expected).abs() < 1e-8,
                "t = {t}"
            );
        }
    }

    #[test]
    fn fitted_rate_exact_linear_input() {
        let times = linspace(5.0, 40.0, 100);
        let transfer: Vec<f64> = times.iter().map(|&t| 2.5e-4 * t).collect();
        let slope = fitted_rate(&times, &transfer, (5.0, 40.0), 4.8).unwrap();
        assert_relative_eq!(slope, 2.5e-4, max_relative = 1e-12);
    }

    #[test]
    fn fitted_rate_window_guards() {
        let times = linspace(0.0, 50.0, 200);
        let transfer: Vec<f64> = times.iter().map(|&t| 1e-3 * t).collect();
        // Window starting inside the sinc transient.
        let err = fitted_rate(&times, &transfer, (1.0, 50.0), 4.8).unwrap_err();
        assert!(err.to_string().contains("10/bandwidth"), "{err}");
        // Window ending beyond the perturbative regime.
        let saturated: Vec<f64> = times.iter().map(|&t| 4e-3 * t).collect();
        let err = fitted_rate(&times, &saturated, (3.0, 50.0), 4.8).unwrap_err();
        assert!(err.to_string().contains("0.1"), "{err}");
    }

    #[test]
    fn reservoir_slope_matches_friction_rate() {
        let cfg = config(2e-3, 0.0);
        let times = linspace(2.5, 40.0, 120);
        let run =
            run_first_step(&cfg, BathSelection::Reservoir, 1, 200, (0.2, 5.0), &times).unwrap();
        let ratio = run.ratio().unwrap();
        assert!((0.9..=1.1).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn field_slope_matches_vacuum_rate() {
        let cfg = config(0.0, charge_for_tau(1e-3));
        let times = linspace(2.5, 40.0, 120);
        let run = run_first_step(&cfg, BathSelection::Field, 1, 200, (0.2, 5.0), &times).unwrap();
        let ratio = run.ratio().unwrap();
        assert!((0.9..=1.1).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn slope_invariant_under_mode_doubling() {
        let cfg = config(2e-3, 0.0);
        let times = linspace(2.5, 40.0, 120);
        let coarse =
            run_first_step(&cfg, BathSelection::Reservoir, 1, 150, (0.2, 5.0), &times).unwrap();
        let fine =
            run_first_step(&cfg, BathSelection::Reservoir, 1, 300, (0.2, 5.0), &times).unwrap();
        let ratio = fine.fitted_slope / coarse.fitted_slope;
        assert!((0.95..=1.05).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn first_step_slope_scales_with_occupation() {
        let cfg = config(2e-3, 0.0);
        let t1 = linspace(2.5, 40.0, 120);
        let run1 = run_first_step(&cfg, BathSelection::Reservoir, 1, 200, (0.2, 5.0), &t1).unwrap();
        // Shorter window keeps the doubled rate inside the perturbative bound.
        let t2 = linspace(2.5, 20.0, 120);
        let run2 = run_first_step(&cfg, BathSelection::Reservoir, 2, 200, (0.2, 5.0), &t2).unwrap();
        let ratio = run2.fitted_slope / run1.fitted_slope;
        assert!((1.8..=2.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn transfer_revives_after_the_recurrence_time() {
        // Equally spaced modes make the discretized bath quasi-periodic:
        // decay is irreversible-looking only for t ≪ t_rec = 2π/Δω. The
        // emitted excitation returns and reabsorbs, so the survival passes
        // through a minimum near t_rec and climbs back afterwards.
        let cfg = config(2e-3, 0.0);
        let grids = standard_grids(&cfg, BathSelection::Reservoir, (0.5, 1.5), 64).unwrap();
        let t_rec = 2.0 * PI / grids[0].spacing;
        let model = build_sector(1, &grids, &cfg, SectorMode::FirstStep).unwrap();
        let times = vec![0.5 * t_rec, 0.98 * t_rec, 1.6 * t_rec];
        let evolution = evolve_survival(&model, &times).unwrap();
        let p = &evolution.p_stay;
        assert!(p[1] < p[0], "still decaying up to t_rec: {p:?}");
        assert!(p[2] > p[1] + 0.2, "no reabsorption after t_rec: {p:?}");
    }

    #[test]
    fn truncated_thermal_mean_tail_bound() {
        // Thermal occupancy is geometric, so the ν_max = ⌈n̄ + 5√n̄⌉ cut
        // leaves an explicit tail: a few percent of the mean around n̄ ~ 1
        // (the resonant modes that set the fitted slopes), growing for hot
        // far-off-resonant modes that the slope fit barely samples.
        let (retained, nu_max, tail) = truncated_thermal_mean(1.0, 1.0).unwrap();
        let exact = bose_occupation(1.0, 1.0).unwrap();
        assert!(nu_max >= 1);
        assert!(tail >= 0.0 && tail < 0.05 * exact, "tail {tail}");
        assert_relative_eq!(retained + tail, exact, max_relative = 1e-12);
        // Hot mode: the absolute tail is larger but still bounded and exact.
        let (hot_retained, _, hot_tail) = truncated_thermal_mean(0.2, 2.0).unwrap();
        let hot_exact = bose_occupation(0.2, 2.0).unwrap();
        assert!(
            hot_tail > 0.0 && hot_tail < 0.3 * hot_exact,
            "hot tail {hot_tail}"
        );
        assert_relative_eq!(hot_retained + hot_tail, hot_exact, max_relative = 1e-12);
        // T = 0 sanity.
        assert_eq!(truncated_thermal_mean(1.0, 0.0).unwrap(), (0.0, 0, 0.0));
    }
}
