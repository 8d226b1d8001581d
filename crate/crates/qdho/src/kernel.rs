//! Memory kernel γ(t) of the quantum Langevin equation, its convolution
//! with a velocity history, and the residual against the Markovian limit.
//!
//! γ(t) = (8π/m) ∫₀^{Ω_c} dω |f(ω)|² ω³ cos(ωt).
//!
//! The sharp UV cutoff Ω_c regularizes the Ohmic coupling, whose kernel is
//! otherwise a delta function; the Markovian drag β/m is recovered as
//! Ω_c → ∞.

use std::f64::consts::PI;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::model::CouplingFunction;

/// Relative accuracy demanded of the kernel quadrature.
const QUADRATURE_RTOL: f64 = 1e-8;

/// 16-point Gauss-Legendre nodes on [-1, 1] (positive half; symmetric).
const GL_NODES: [f64; 8] = [
    0.09501250983763744,
    0.2816035507792589,
    0.45801677765722737,
    0.6178762444026438,
    0.755404408355003,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL_WEIGHTS: [f64; 8] = [
    0.189450610455069,
    0.18260341504492358,
    0.1691565193950025,
    0.14959598881657676,
    0.12462897125553388,
    0.09515851168249279,
    0.062253523938647894,
    0.027152459411754096,
];

/// Composite 16-point Gauss-Legendre quadrature of `f` over [a, b] with
/// `panels` equal panels, summed in a fixed order.
pub(crate) fn gauss_legendre(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        let mut panel = 0.0;
        for i in 0..8 {
            let dx = half * GL_NODES[i];
            panel += GL_WEIGHTS[i] * (f(mid + dx) + f(mid - dx));
        }
        total += panel * half;
    }
    total
}

/// Memory kernel evaluator for one coupling function, mass and UV cutoff.
///
/// Immutable after construction; every evaluation is a pure function of its
/// arguments, so a kernel may be shared freely between threads.
#[derive(Debug, Clone)]
pub struct MemoryKernel {
    coupling: CouplingFunction,
    m: f64,
    cutoff: f64,
    quadrature_points: usize,
}

impl MemoryKernel {
    /// `quadrature_points` is the baseline node count; evaluations at late
    /// times scale it up to keep at least 10 nodes per oscillation of
    /// cos(Ω_c t).
    pub fn new(
        coupling: CouplingFunction,
        m: f64,
        cutoff: f64,
        quadrature_points: usize,
    ) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Domain(format!(
                "kernel mass must be positive, got {m}"
            )));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::Domain(format!(
                "kernel cutoff must be positive, got {cutoff}"
            )));
        }
        if quadrature_points < 64 {
            return Err(Error::Precondition(format!(
                "quadrature_points must be at least 64, got {quadrature_points}"
            )));
        }
        Ok(MemoryKernel {
            coupling,
            m,
            cutoff,
            quadrature_points,
        })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    fn integrate(&self, t: f64, points: usize) -> Result<f64> {
        let coupling = &self.coupling;
        let mut failure: Option<Error> = None;
        let value = {
            let integrand = |omega: f64| -> f64 {
                match coupling.strength_sq(omega) {
                    Ok(s) => s * omega.powi(3) * (omega * t).cos(),
                    Err(_) => f64::NAN,
                }
            };
            gauss_legendre(&integrand, 0.0, self.cutoff, points.div_ceil(16))
        };
        if !value.is_finite() {
            failure = Some(Error::Numerical(format!(
                "kernel integrand not finite on (0, {}]",
                self.cutoff
            )));
        }
        match failure {
            Some(err) => Err(err),
            None => Ok(8.0 * PI / self.m * value),
        }
    }

    fn points_for(&self, t: f64) -> usize {
        let oscillations = self.cutoff * t / (2.0 * PI);
        let needed = (10.0 * oscillations).ceil() as usize;
        self.quadrature_points.max(needed).max(64)
    }

    /// γ(t) by quadrature, with a refinement check: the result at the
    /// working resolution must agree with a doubled resolution to 1e-8
    /// relative, otherwise a numerical error is reported.
    pub fn gamma(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("gamma requires t >= 0, got {t}")));
        }
        let points = self.points_for(t);
        let coarse = self.integrate(t, points)?;
        let fine = self.integrate(t, 2 * points)?;
        // Scale reference: the (positive) t = 0 magnitude of the integrand.
        let scale = 8.0 * PI / self.m
            * gauss_legendre(
                &|omega: f64| {
                    self.coupling.strength_sq(omega).unwrap_or(f64::NAN).abs() * omega.powi(3)
                },
                0.0,
                self.cutoff,
                (2 * points).div_ceil(16),
            );
        let denom = fine.abs().max(1e-3 * scale.abs()).max(f64::MIN_POSITIVE);
        if (fine - coarse).abs() > QUADRATURE_RTOL * denom {
            return Err(Error::Numerical(format!(
                "kernel quadrature did not converge at t = {t}: {coarse} vs {fine}"
            )));
        }
        Ok(fine)
    }

    /// γ sampled on the uniform grid {0, h, ..., (n−1)h}; the cache the
    /// convolution reuses at lagged times.
    pub fn grid(&self, h: f64, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|k| self.gamma(k as f64 * h)).collect()
    }
}

/// Drag history ∫₀ᵗ dt′ q̇(t′) γ(t − t′) at every sample of `traj`, by the
/// product-trapezoidal rule. Summation order per output sample is fixed.
pub fn convolve_memory(kernel: &MemoryKernel, traj: &Trajectory) -> Result<Vec<f64>> {
    let h = traj.h;
    if h * kernel.cutoff >= 0.5 {
        return Err(Error::Precondition(format!(
            "convolution step too coarse: h*cutoff = {} must be < 0.5",
            h * kernel.cutoff
        )));
    }
    let n = traj.len();
    let gamma = kernel.grid(h, n)?;
    let v = &traj.qdot;
    let mut out = vec![0.0; n];
    for (i, slot) in out.iter_mut().enumerate().skip(1) {
        let mut acc = 0.5 * v[0] * gamma[i];
        for j in 1..i {
            acc += v[j] * gamma[i - j];
        }
        acc += 0.5 * v[i] * gamma[0];
        *slot = acc * h;
    }
    Ok(out)
}

/// RMS of |convolution − (β/m) q̇| over samples with t > 10/Ω_c: how far the
/// finite-cutoff kernel drag is from the Markovian limit.
pub fn markov_residual(kernel: &MemoryKernel, traj: &Trajectory, beta: f64) -> Result<f64> {
    let drag = convolve_memory(kernel, traj)?;
    let target_rate = beta / kernel.m;
    let t_min = 10.0 / kernel.cutoff;
    let mut count = 0usize;
    let mut sum_sq = 0.0;
    for (i, d) in drag.iter().enumerate() {
        let t = i as f64 * traj.h;
        if t > t_min {
            let r = d - target_rate * traj.qdot[i];
            sum_sq += r * r;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Precondition(format!(
            "trajectory ends before the Markovian window opens at t = {t_min}"
        )));
    }
    Ok((sum_sq / count as f64).sqrt())
}
