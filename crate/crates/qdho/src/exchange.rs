//! Direct energy exchange between the quantum vacuum and the reservoir
//! while the oscillator state is unchanged.
//!
//! These rates come from the field-reservoir cross coupling alone and carry
//! no dependence on the oscillator occupation, which the operation
//! signatures make structural: no `n` argument exists.

use std::f64::consts::PI;

use crate::error::Result;
use crate::model::{CouplingFunction, FieldQuantum, PhysicalConfig, ReservoirBath};
use crate::rates::{Resonance, SpectralRate};

/// Rate at which a given photon is absorbed by the reservoir:
/// (e²ω_p/(2πm²))·|f(ω_p)|²·ε_x², thermally enhanced by 1 + n̄(ω_p, T).
///
/// A Fock-populated reservoir absorbs at exactly the vacuum rate; the two
/// published expressions coincide, so one code path keyed on the reservoir
/// kind covers both.
pub fn photon_absorption_rate(
    photon: &FieldQuantum,
    reservoir: &ReservoirBath,
    coupling: &CouplingFunction,
    config: &PhysicalConfig,
) -> Result<SpectralRate> {
    let omega_p = photon.omega_p;
    let base = config.e * config.e * omega_p / (2.0 * PI * config.m * config.m)
        * coupling.strength_sq(omega_p)?
        * photon.epsilon_x_sq()?;
    let enhancement = reservoir.stimulated_factor(omega_p)?;
    Ok(SpectralRate::smooth_only(base * enhancement))
}

/// Rate at which the reservoir creates a photon in the given target mode.
///
/// A thermal reservoir emits smoothly at the absorption rate times
/// n̄(ω_p, T); a Fock reservoir emits only on resonance, one Dirac mass per
/// reservoir quantum with weight (e²/(8m²π²ω_p))·ε_x²·|f(ω_{p_l})|². The
/// vacuum reservoir emits nothing.
pub fn photon_emission_rate(
    target: &FieldQuantum,
    reservoir: &ReservoirBath,
    coupling: &CouplingFunction,
    config: &PhysicalConfig,
) -> Result<SpectralRate> {
    let omega_p = target.omega_p;
    let eps_sq = target.epsilon_x_sq()?;
    match reservoir {
        ReservoirBath::Thermal(t) => {
            let smooth = config.e * config.e * omega_p / (2.0 * PI * config.m * config.m)
                * coupling.strength_sq(omega_p)?
                * eps_sq
                * crate::model::bose_occupation(omega_p, *t)?;
            Ok(SpectralRate::smooth_only(smooth))
        }
        ReservoirBath::Fock(quanta) => {
            let mut resonances = Vec::with_capacity(quanta.len());
            for quantum in quanta {
                resonances.push(Resonance {
                    location: quantum.omega_p,
                    weight: config.e * config.e / (8.0 * config.m * config.m * PI * PI * omega_p)
                        * eps_sq
                        * coupling.strength_sq(quantum.omega_p)?,
                });
            }
            Ok(SpectralRate {
                smooth: 0.0,
                resonances,
            })
        }
        ReservoirBath::Vacuum => Ok(SpectralRate::zero()),
    }
}
