//! First-order transition rates Γ_{n→n−1} and Γ_{n→n+1} for every
//! combination of field and reservoir initial states, with Dirac-mass
//! resonance terms kept symbolic.
//!
//! Rates are returned per unit time (the probability slope); time is
//! multiplied in only at evaluation, where delta terms are broadened by an
//! explicit normalized kernel.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{CouplingFunction, FieldBath, PhysicalConfig, ReservoirBath};

/// Transition direction between adjacent oscillator levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Down,
    Up,
}

/// A Dirac-mass term: `weight`·δ(ω_p − ω_ref)·t in the transition
/// probability, pinned at the bath-quantum frequency `location`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub location: f64,
    pub weight: f64,
}

/// A transition rate split into a smooth per-unit-time part and symbolic
/// resonance terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRate {
    /// Coefficient of t in the transition probability (1/time).
    pub smooth: f64,
    pub resonances: Vec<Resonance>,
}

impl SpectralRate {
    pub fn zero() -> Self {
        SpectralRate {
            smooth: 0.0,
            resonances: Vec::new(),
        }
    }

    pub fn smooth_only(smooth: f64) -> Self {
        SpectralRate {
            smooth,
            resonances: Vec::new(),
        }
    }
}

/// Broadening kernel K_η used to turn resonance terms into numbers;
/// normalized to unit integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BroadeningKernel {
    /// K(x) = 1/η for |x| ≤ η/2, else 0.
    Boxcar,
    /// K(x) = (η/2π)/(x² + η²/4).
    Lorentzian,
}

impl BroadeningKernel {
    fn evaluate(&self, x: f64, eta: f64) -> f64 {
        match self {
            BroadeningKernel::Boxcar => {
                if x.abs() <= 0.5 * eta {
                    1.0 / eta
                } else {
                    0.0
                }
            }
            BroadeningKernel::Lorentzian => eta / (2.0 * PI) / (x * x + 0.25 * eta * eta),
        }
    }
}

/// Probability that first-order perturbation theory stops being trustworthy.
pub const PERTURBATIVE_LIMIT: f64 = 0.1;

/// A broadened transition probability, clamped at the perturbative limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probability {
    pub value: f64,
    /// True when the raw value exceeded the first-order validity limit and
    /// was clamped.
    pub clamped: bool,
}

/// smooth·t + Σ weight·K_η(location − ω_ref)·t, clamped with a validity
/// flag beyond probability 0.1.
pub fn evaluate_spectral_rate(
    rate: &SpectralRate,
    t: f64,
    eta: f64,
    kernel: BroadeningKernel,
    omega_ref: f64,
) -> Result<Probability> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "evaluation requires t >= 0, got {t}"
        )));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!(
            "broadening width must be positive, got {eta}"
        )));
    }
    let mut slope = rate.smooth;
    for resonance in &rate.resonances {
        slope += resonance.weight * kernel.evaluate(resonance.location - omega_ref, eta);
    }
    let raw = slope * t;
    if raw > PERTURBATIVE_LIMIT {
        Ok(Probability {
            value: PERTURBATIVE_LIMIT,
            clamped: true,
        })
    } else {
        Ok(Probability {
            value: raw,
            clamped: false,
        })
    }
}

/// Down rate with both baths in vacuum for an arbitrary coupling function:
/// Γ/t = 4π²ω³n|f(ω)|²/m + nω²e²/(6πm).
pub fn general_down_rate(
    n: u32,
    coupling: &CouplingFunction,
    config: &PhysicalConfig,
) -> Result<SpectralRate> {
    if n == 0 {
        return Ok(SpectralRate::zero());
    }
    let omega = config.omega;
    let strength = coupling.strength_sq(omega)?;
    let reservoir_part = 4.0 * PI * PI * omega.powi(3) * strength / config.m;
    let field_part = config.e * config.e * omega * omega / (6.0 * PI * config.m);
    Ok(SpectralRate::smooth_only(
        n as f64 * (reservoir_part + field_part),
    ))
}

/// Transition rate for the Ohmic coupling, any oscillator occupation and
/// any combination of vacuum/Fock/thermal field and reservoir states.
///
/// One compositional rule covers the whole table:
/// - Down smooth: n·(β/m)·S_B + n·τω²·S_F with S = 1 for vacuum or Fock
///   baths and S = 1 + n̄(ω, T) for a thermal bath. No resonances.
/// - Up smooth: (n+1)·(β/m)·n̄_B + (n+1)·τω²·n̄_F (thermal baths only).
/// - Up resonances: weight (n+1)·β/(4πmω²) at each reservoir Fock quantum
///   and (n+1)·e²ω·ε_x²/(16π²m·ω_p) at each field Fock quantum.
///
/// Fock-state down rates carry no stimulated-emission enhancement,
/// matching the published traces. A thermal bath at T = 0 is identical to
/// vacuum, so the T → 0 reductions are exact.
pub fn transition_rate(
    n: u32,
    direction: Direction,
    field: &FieldBath,
    reservoir: &ReservoirBath,
    config: &PhysicalConfig,
) -> Result<SpectralRate> {
    let omega = config.omega;
    let m = config.m;
    let friction = config.friction_rate();
    let field_rate = config.field_decay_rate();

    match direction {
        Direction::Down => {
            if n == 0 {
                return Ok(SpectralRate::zero());
            }
            let s_reservoir = reservoir.stimulated_factor(omega)?;
            let s_field = field.stimulated_factor(omega)?;
            let smooth = n as f64 * (friction * s_reservoir + field_rate * s_field);
            Ok(SpectralRate::smooth_only(smooth))
        }
        Direction::Up => {
            let enhancement = (n + 1) as f64;
            let n_reservoir = reservoir.mean_occupation(omega)?;
            let n_field = field.mean_occupation(omega)?;
            let smooth = enhancement * (friction * n_reservoir + field_rate * n_field);
            let mut resonances = Vec::new();
            for quantum in reservoir.fock_quanta() {
                resonances.push(Resonance {
                    location: quantum.omega_p,
                    weight: enhancement * config.beta / (4.0 * PI * m * omega * omega),
                });
            }
            for quantum in field.fock_quanta() {
                let eps_sq = quantum.epsilon_x_sq()?;
                resonances.push(Resonance {
                    location: quantum.omega_p,
                    weight: enhancement * config.e * config.e * omega * eps_sq
                        / (16.0 * PI * PI * m * quantum.omega_p),
                });
            }
            Ok(SpectralRate { smooth, resonances })
        }
    }
}
