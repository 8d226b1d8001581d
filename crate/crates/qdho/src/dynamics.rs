//! Expectation-value trajectory solvers: the Markovian damped oscillator,
//! the non-Markovian Volterra integro-differential equation, and the
//! radiation-reaction equation after reduction of order.
//!
//! The driving terms (bath noise and the vacuum field) have zero mean in
//! every initial state the rate table considers, so trajectories here are
//! deterministic expectation values.

use crate::error::{Error, Result};
use crate::kernel::MemoryKernel;
use crate::model::PhysicalConfig;

/// Uniformly sampled q(t), q̇(t) from a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Start time of the first sample.
    pub t0: f64,
    /// Uniform step between samples.
    pub h: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
}

impl Trajectory {
    pub fn from_samples(t0: f64, h: f64, q: Vec<f64>, qdot: Vec<f64>) -> Result<Self> {
        if q.len() != qdot.len() || q.len() < 2 {
            return Err(Error::Domain(format!(
                "trajectory needs equal-length q/qdot with at least 2 samples, got {}/{}",
                q.len(),
                qdot.len()
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Domain(format!(
                "trajectory step must be positive, got {h}"
            )));
        }
        Ok(Trajectory { t0, h, q, qdot })
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.h
    }

    /// Relabel the start time; sampled values are untouched.
    pub fn with_start(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }
}

fn step_count(t_end: f64, h: f64) -> Result<usize> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("step must be positive, got {h}")));
    }
    let steps = (t_end / h).round() as usize;
    if steps < 1 {
        return Err(Error::Domain(format!(
            "t_end = {t_end} shorter than one step h = {h}"
        )));
    }
    Ok(steps)
}

/// Classical fixed-step RK4 on ẍ = −w2·q − c·q̇. Both local solvers share
/// this path so that e = 0 radiation-reaction runs are bitwise identical to
/// Markovian runs.
fn rk4_linear(w2: f64, c: f64, q0: f64, v0: f64, t_end: f64, h: f64) -> Result<Trajectory> {
    let steps = step_count(t_end, h)?;
    let acc = |q: f64, v: f64| -w2 * q - c * v;
    let mut q = Vec::with_capacity(steps + 1);
    let mut v = Vec::with_capacity(steps + 1);
    q.push(q0);
    v.push(v0);
    let (mut qi, mut vi) = (q0, v0);
    for _ in 0..steps {
        let k1q = vi;
        let k1v = acc(qi, vi);
        let k2q = vi + 0.5 * h * k1v;
        let k2v = acc(qi + 0.5 * h * k1q, vi + 0.5 * h * k1v);
        let k3q = vi + 0.5 * h * k2v;
        let k3v = acc(qi + 0.5 * h * k2q, vi + 0.5 * h * k2v);
        let k4q = vi + h * k3v;
        let k4v = acc(qi + h * k3q, vi + h * k3v);
        qi += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        vi += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        q.push(qi);
        v.push(vi);
    }
    Trajectory::from_samples(0.0, h, q, v)
}

fn check_local_step(config: &PhysicalConfig, h: f64) -> Result<()> {
    let fastest = config.omega.max(config.friction_rate());
    if h * fastest >= 0.1 {
        return Err(Error::Precondition(format!(
            "step too coarse: h*max(omega, beta/m) = {} must be < 0.1",
            h * fastest
        )));
    }
    Ok(())
}

/// Markovian damped oscillator ẍ + (β/m)q̇ + ω²q = 0 by fixed-step RK4.
pub fn solve_markovian(
    config: &PhysicalConfig,
    q0: f64,
    v0: f64,
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    check_local_step(config, h)?;
    rk4_linear(
        config.omega * config.omega,
        config.friction_rate(),
        q0,
        v0,
        t_end,
        h,
    )
}

/// Effective (ω², damping) coefficients of the reduced-order
/// radiation-reaction equation.
///
/// The third-order term is eliminated by substituting the zeroth-order
/// equation of motion, q⃛ → d/dt(−ω²q − (β/m)q̇) and again ẍ → −ω²q − (β/m)q̇
/// inside the result. This removes the runaway solution while preserving the
/// physical roots of the characteristic cubic to O((τω)²): the oscillation
/// decays at rate β/m + τω² − τ(β/m)².
pub fn radiation_reaction_coefficients(config: &PhysicalConfig) -> (f64, f64) {
    let w2 = config.omega * config.omega;
    let b = config.friction_rate();
    let tau = config.tau();
    (w2 * (1.0 - tau * b), b + tau * w2 - tau * b * b)
}

/// Damped oscillator with the radiation-reaction self-force folded in by
/// reduction of order. With e = 0 this is bitwise identical to
/// [`solve_markovian`].
pub fn solve_with_radiation_reaction(
    config: &PhysicalConfig,
    q0: f64,
    v0: f64,
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    let tau_omega = config.tau() * config.omega;
    if tau_omega >= 0.1 {
        return Err(Error::ModelValidity(format!(
            "radiation reaction requires tau*omega << 1; got {tau_omega}"
        )));
    }
    check_local_step(config, h)?;
    let (w2, c) = radiation_reaction_coefficients(config);
    rk4_linear(w2, c, q0, v0, t_end, h)
}

/// Volterra integro-differential equation
/// ẍ + ω²q + ∫₀ᵗ dt′ q̇(t′) γ(t − t′) = 0, solved with a second-order
/// product-trapezoidal predictor-corrector.
pub fn solve_nonmarkovian(
    config: &PhysicalConfig,
    kernel: &MemoryKernel,
    q0: f64,
    v0: f64,
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    check_local_step(config, h)?;
    if h * kernel.cutoff() >= 0.5 {
        return Err(Error::Precondition(format!(
            "step too coarse for the kernel: h*cutoff = {} must be < 0.5",
            h * kernel.cutoff()
        )));
    }
    let steps = step_count(t_end, h)?;
    let gamma = kernel.grid(h, steps + 1)?;
    // An identically zero kernel needs no memory accumulation.
    let kernel_is_zero = gamma.iter().all(|&g| g == 0.0);
    let w2 = config.omega * config.omega;

    let mut q = Vec::with_capacity(steps + 1);
    let mut v = Vec::with_capacity(steps + 1);
    q.push(q0);
    v.push(v0);

    // Memory integral at sample n, split so the endpoint velocity can be
    // updated during correction: I_n(v_end) = tail_n + (h/2) γ₀ v_end.
    let tail = |v: &[f64], n: usize| -> f64 {
        if n == 0 || kernel_is_zero {
            return 0.0;
        }
        let mut acc = 0.5 * v[0] * gamma[n];
        for j in 1..n {
            acc += v[j] * gamma[n - j];
        }
        acc * h
    };

    let mut drag_n = 0.0; // I_0 = 0
    for n in 0..steps {
        let qn = q[n];
        let vn = v[n];
        let an = -w2 * qn - drag_n;

        // Heun predictor.
        let q_pred = qn + h * vn;
        let v_pred = vn + h * an;

        let tail_next = tail(&v, n + 1);
        let drag = |v_end: f64| tail_next + 0.5 * h * gamma[0] * v_end;

        let a_pred = -w2 * q_pred - drag(v_pred);
        let mut v_next = vn + 0.5 * h * (an + a_pred);
        let q_next = qn + 0.5 * h * (vn + v_pred);

        // One fixed corrector pass on the memory endpoint.
        let a_corr = -w2 * q_next - drag(v_next);
        v_next = vn + 0.5 * h * (an + a_corr);

        q.push(q_next);
        v.push(v_next);
        drag_n = drag(v_next);
    }
    Trajectory::from_samples(0.0, h, q, v)
}

/// Oscillator energy E(t) = ½ m q̇² + ½ m ω² q² sampled along a trajectory.
pub fn energy(config: &PhysicalConfig, traj: &Trajectory) -> Vec<f64> {
    let half_m = 0.5 * config.m;
    let w2 = config.omega * config.omega;
    traj.q
        .iter()
        .zip(&traj.qdot)
        .map(|(&q, &v)| half_m * (v * v + w2 * q * q))
        .collect()
}

/// Least-squares slope of ln E(t) over [t_lo, t_hi], negated: the fitted
/// energy-decay rate. The window should span an integer number of periods
/// so the 2ω ripple of ln E averages out.
pub fn fit_energy_decay_rate(
    config: &PhysicalConfig,
    traj: &Trajectory,
    t_lo: f64,
    t_hi: f64,
) -> Result<f64> {
    let energies = energy(config, traj);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &en) in energies.iter().enumerate() {
        let t = traj.time(i);
        if t >= t_lo && t <= t_hi {
            if en <= 0.0 {
                return Err(Error::Numerical(format!(
                    "energy non-positive at t = {t}; cannot fit a decay rate"
                )));
            }
            xs.push(t);
            ys.push(en.ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::Precondition(format!(
            "decay-fit window [{t_lo}, {t_hi}] holds fewer than two samples"
        )));
    }
    Ok(-linear_slope(&xs, &ys))
}

/// Least-squares slope of y against x.
pub(crate) fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mean_x) * (xi - mean_x);
        sxy += (xi - mean_x) * (yi - mean_y);
    }
    sxy / sxx
}
