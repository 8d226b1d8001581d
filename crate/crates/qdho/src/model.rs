//! Physical configuration, coupling functions, polarization geometry and
//! thermal occupation factors shared by every other module.
//!
//! Natural units ħ = c = k_B = 1 throughout: frequencies and rates carry
//! 1/time, temperatures carry energy, the charge e is dimensionless.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Model constants for one oscillator + two-bath system.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConfig {
    /// Oscillator mass.
    pub m: f64,
    /// Oscillator angular frequency.
    pub omega: f64,
    /// Charge coupling to the electromagnetic vacuum (0 = uncharged).
    #[serde(default)]
    pub e: f64,
    /// Friction coefficient of the Ohmic reservoir coupling (mass/time).
    #[serde(default)]
    pub beta: f64,
    /// Bath temperature, T ≥ 0.
    pub temperature: f64,
    /// UV cutoff Ω_c for kernel quadrature; must exceed omega.
    pub cutoff: f64,
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        PhysicalConfig {
            m: 1.0,
            omega: 1.0,
            e: 0.0,
            beta: 0.0,
            temperature: 0.0,
            cutoff: 100.0,
        }
    }
}

impl PhysicalConfig {
    /// Parse from a JSON object with keys m, omega, e, beta, temperature,
    /// cutoff. Missing `e` and `beta` default to 0.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PhysicalConfig =
            serde_json::from_str(text).map_err(|err| Error::Config(err.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::Config(format!("m must be positive, got {}", self.m)));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::Config(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!(
                "beta must be nonnegative, got {}",
                self.beta
            )));
        }
        if !self.e.is_finite() {
            return Err(Error::Config(format!("e must be finite, got {}", self.e)));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::Config(format!(
                "temperature must be nonnegative, got {}",
                self.temperature
            )));
        }
        if !(self.cutoff > self.omega && self.cutoff.is_finite()) {
            return Err(Error::Config(format!(
                "cutoff must exceed omega ({}), got {}",
                self.omega, self.cutoff
            )));
        }
        Ok(())
    }

    /// Radiation-reaction time constant τ = e²/(6πm). Always derived,
    /// never stored.
    pub fn tau(&self) -> f64 {
        self.e * self.e / (6.0 * PI * self.m)
    }

    /// Reservoir friction rate β/m.
    pub fn friction_rate(&self) -> f64 {
        self.beta / self.m
    }

    /// Vacuum-field decay rate e²ω²/(6πm) = τω².
    pub fn field_decay_rate(&self) -> f64 {
        self.tau() * self.omega * self.omega
    }
}

/// Squared coupling strength |f(ω)|² of the oscillator-reservoir coupling.
#[derive(Clone)]
pub enum CouplingFunction {
    /// Ohmic choice |f(ω)|² = β/(4π²ω³), which collapses the memory kernel
    /// to instantaneous friction β/m in the large-cutoff limit.
    Special { beta: f64 },
    /// Arbitrary evaluator of |f(ω)|² for ω > 0. Must return finite
    /// nonnegative values on (0, Ω_c].
    General(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for CouplingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingFunction::Special { beta } => {
                write!(f, "CouplingFunction::Special {{ beta: {beta} }}")
            }
            CouplingFunction::General(_) => write!(f, "CouplingFunction::General(..)"),
        }
    }
}

impl CouplingFunction {
    pub fn special(beta: f64) -> Self {
        CouplingFunction::Special { beta }
    }

    pub fn general(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CouplingFunction::General(Arc::new(f))
    }

    /// Evaluate |f(ω)|².
    pub fn strength_sq(&self, omega: f64) -> Result<f64> {
        match self {
            CouplingFunction::Special { beta } => coupling_special(*beta, omega),
            CouplingFunction::General(f) => {
                if omega <= 0.0 {
                    return Err(Error::Domain(format!(
                        "coupling strength requires omega > 0, got {omega}"
                    )));
                }
                let value = f(omega);
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::Numerical(format!(
                        "general coupling returned invalid |f|^2 = {value} at omega = {omega}"
                    )));
                }
                Ok(value)
            }
        }
    }
}

/// |f(ω)|² = β/(4π²ω³) for the Ohmic coupling.
pub fn coupling_special(beta: f64, omega: f64) -> Result<f64> {
    if omega <= 0.0 || omega.is_nan() {
        return Err(Error::Domain(format!(
            "coupling_special requires omega > 0, got {omega}"
        )));
    }
    if beta < 0.0 || beta.is_nan() {
        return Err(Error::Domain(format!(
            "coupling_special requires beta >= 0, got {beta}"
        )));
    }
    Ok(beta / (4.0 * PI * PI * omega.powi(3)))
}

const UNIT_NORM_TOLERANCE: f64 = 1e-12;

fn check_unit(direction: [f64; 3]) -> Result<()> {
    let norm_sq = direction.iter().map(|c| c * c).sum::<f64>();
    if !norm_sq.is_finite() || (norm_sq.sqrt() - 1.0).abs() > UNIT_NORM_TOLERANCE {
        return Err(Error::Domain(format!(
            "direction {direction:?} is not a unit vector"
        )));
    }
    Ok(())
}

/// Σ_λ ε_x(k̂,λ)² = 1 − k̂_x², the transversality sum over both
/// polarizations of the x-projection.
pub fn polarization_sum_x(direction: [f64; 3]) -> Result<f64> {
    check_unit(direction)?;
    Ok((1.0 - direction[0] * direction[0]).clamp(0.0, 1.0))
}

/// Orthonormal polarization basis (ε₁, ε₂) transverse to a unit vector k̂,
/// in the spherical convention ε₁ = θ̂, ε₂ = φ̂. At k̂ = ±ẑ the azimuth is
/// fixed to φ = 0, giving ε₂ = ŷ.
pub fn polarization_basis(direction: [f64; 3]) -> Result<([f64; 3], [f64; 3])> {
    check_unit(direction)?;
    let [dx, dy, dz] = direction;
    let sin_theta = dx.hypot(dy);
    if sin_theta < 1e-14 {
        let sign = if dz >= 0.0 { 1.0 } else { -1.0 };
        return Ok(([sign, 0.0, 0.0], [0.0, 1.0, 0.0]));
    }
    let (cos_phi, sin_phi) = (dx / sin_theta, dy / sin_theta);
    let cos_theta = dz;
    let theta_hat = [cos_theta * cos_phi, cos_theta * sin_phi, -sin_theta];
    let phi_hat = [-sin_phi, cos_phi, 0.0];
    Ok((theta_hat, phi_hat))
}

/// One quantum of the electromagnetic vacuum: propagation direction,
/// frequency ω_p = |p| and polarization index λ ∈ {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldQuantum {
    pub direction: [f64; 3],
    pub omega_p: f64,
    pub polarization_index: u8,
}

impl FieldQuantum {
    pub fn new(direction: [f64; 3], omega_p: f64, polarization_index: u8) -> Result<Self> {
        check_unit(direction)?;
        if !(omega_p > 0.0 && omega_p.is_finite()) {
            return Err(Error::Domain(format!(
                "field quantum requires omega_p > 0, got {omega_p}"
            )));
        }
        if polarization_index != 1 && polarization_index != 2 {
            return Err(Error::Domain(format!(
                "polarization index must be 1 or 2, got {polarization_index}"
            )));
        }
        Ok(FieldQuantum {
            direction,
            omega_p,
            polarization_index,
        })
    }

    /// ε_x(k̂, λ)² for this quantum; computed from the geometry, never stored.
    pub fn epsilon_x_sq(&self) -> Result<f64> {
        let (eps1, eps2) = polarization_basis(self.direction)?;
        let eps = if self.polarization_index == 1 {
            eps1
        } else {
            eps2
        };
        Ok(eps[0] * eps[0])
    }
}

/// One quantum of the reservoir field, characterized by ω_p = |p| alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirQuantum {
    pub omega_p: f64,
}

impl ReservoirQuantum {
    pub fn new(omega_p: f64) -> Result<Self> {
        if !(omega_p > 0.0 && omega_p.is_finite()) {
            return Err(Error::Domain(format!(
                "reservoir quantum requires omega_p > 0, got {omega_p}"
            )));
        }
        Ok(ReservoirQuantum { omega_p })
    }
}

/// Initial state of one bath: its vacuum, a definite list of quanta, or a
/// thermal distribution at temperature T. Thermal(0) behaves exactly as
/// Vacuum in every rate formula.
#[derive(Debug, Clone, PartialEq)]
pub enum BathOccupation<Q> {
    Vacuum,
    Fock(Vec<Q>),
    Thermal(f64),
}

pub type FieldBath = BathOccupation<FieldQuantum>;
pub type ReservoirBath = BathOccupation<ReservoirQuantum>;

impl<Q> BathOccupation<Q> {
    pub fn validate(&self) -> Result<()> {
        match self {
            BathOccupation::Vacuum => Ok(()),
            BathOccupation::Fock(quanta) => {
                if quanta.is_empty() {
                    Err(Error::Domain("Fock bath must contain quanta".into()))
                } else {
                    Ok(())
                }
            }
            BathOccupation::Thermal(t) => {
                if t.is_finite() && *t >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!(
                        "thermal bath temperature {t} invalid"
                    )))
                }
            }
        }
    }

    /// Mean occupation n̄ this bath presents at frequency `omega`:
    /// nonzero only for a thermal bath.
    pub fn mean_occupation(&self, omega: f64) -> Result<f64> {
        match self {
            BathOccupation::Thermal(t) => bose_occupation(omega, *t),
            _ => Ok(0.0),
        }
    }

    /// Stimulated factor 1 + n̄ at frequency `omega`; 1 for vacuum and
    /// Fock baths.
    pub fn stimulated_factor(&self, omega: f64) -> Result<f64> {
        match self {
            BathOccupation::Thermal(t) => stimulated_factor(omega, *t),
            _ => Ok(1.0),
        }
    }

    pub fn fock_quanta(&self) -> &[Q] {
        match self {
            BathOccupation::Fock(quanta) => quanta,
            _ => &[],
        }
    }
}

/// Mean thermal occupation n̄(ω, T) = 1/(e^{ω/T} − 1); exactly 0 at T = 0.
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!(
            "bose_occupation requires omega > 0, got {omega}"
        )));
    }
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::Domain(format!(
            "bose_occupation requires T >= 0, got {temperature}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// Stimulated factor 1 + n̄ = e^{ω/T}/(e^{ω/T} − 1); exactly 1 at T = 0.
pub fn stimulated_factor(omega: f64, temperature: f64) -> Result<f64> {
    Ok(1.0 + bose_occupation(omega, temperature)?)
}
