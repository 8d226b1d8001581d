//! Exercise the C ABI from Rust: status codes, handle lifecycles, and
//! agreement with the underlying library. The generated header is also
//! syntax-checked with the system C compiler.

use std::f64::consts::PI;
use std::ffi::{c_int, CStr};
use std::process::Command;
use std::ptr;

use qdho_ffi::*;

fn new_config(beta: f64, e: f64) -> *mut QdhoConfig {
    let mut cfg: *mut QdhoConfig = ptr::null_mut();
    let status = unsafe { qdho_config_new(1.0, 1.0, e, beta, 0.0, 100.0, &mut cfg) };
    assert_eq!(status, QdhoStatus::Ok);
    assert!(!cfg.is_null());
    cfg
}

#[test]
fn version_and_messages_are_c_strings() {
    let version = unsafe { CStr::from_ptr(qdho_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    let message = unsafe { CStr::from_ptr(qdho_status_message(QdhoStatus::Numerical)) };
    assert!(message.to_str().unwrap().contains("numerical"));
}

#[test]
fn config_lifecycle_and_validation() {
    let cfg = new_config(0.5, 0.3);
    let mut tau = 0.0;
    assert_eq!(unsafe { qdho_config_tau(cfg, &mut tau) }, QdhoStatus::Ok);
    assert!((tau - 0.09 / (6.0 * PI)).abs() < 1e-15);
    unsafe { qdho_config_free(cfg) };

    let mut bad: *mut QdhoConfig = ptr::null_mut();
    let status = unsafe { qdho_config_new(-1.0, 1.0, 0.0, 0.0, 0.0, 100.0, &mut bad) };
    assert_eq!(status, QdhoStatus::Config);
    assert!(bad.is_null());
    // Freeing null is a no-op.
    unsafe { qdho_config_free(ptr::null_mut()) };
}

#[test]
fn null_pointers_are_reported() {
    let mut value = 0.0;
    assert_eq!(
        unsafe { qdho_config_tau(ptr::null(), &mut value) },
        QdhoStatus::NullPointer
    );
    let cfg = new_config(0.5, 0.0);
    assert_eq!(
        unsafe { qdho_config_tau(cfg, ptr::null_mut()) },
        QdhoStatus::NullPointer
    );
    unsafe { qdho_config_free(cfg) };
}

#[test]
fn scalar_helpers_match_library() {
    let mut value = 0.0;
    assert_eq!(
        unsafe { qdho_coupling_special(4.0 * PI * PI, 1.0, &mut value) },
        QdhoStatus::Ok
    );
    assert_eq!(value, 1.0);
    assert_eq!(
        unsafe { qdho_coupling_special(1.0, -1.0, &mut value) },
        QdhoStatus::Domain
    );
    assert_eq!(
        unsafe { qdho_bose_occupation(std::f64::consts::LN_2, 1.0, &mut value) },
        QdhoStatus::Ok
    );
    assert_eq!(value, 1.0);
    assert_eq!(
        unsafe { qdho_polarization_sum_x(0.0, 0.0, 1.0, &mut value) },
        QdhoStatus::Ok
    );
    assert_eq!(value, 1.0);
    assert_eq!(
        unsafe { qdho_polarization_sum_x(0.5, 0.0, 0.0, &mut value) },
        QdhoStatus::Domain
    );
}

#[test]
fn kernel_gamma_at_zero() {
    let cfg = new_config(0.7, 0.0);
    let mut value = 0.0;
    assert_eq!(
        unsafe { qdho_kernel_gamma(cfg, 0.0, 64, &mut value) },
        QdhoStatus::Ok
    );
    assert!((value - 2.0 * 0.7 * 100.0 / PI).abs() < 1e-6 * value);
    assert_eq!(
        unsafe { qdho_kernel_gamma(cfg, -1.0, 64, &mut value) },
        QdhoStatus::Domain
    );
    unsafe { qdho_config_free(cfg) };
}

#[test]
fn transition_rate_round_trip() {
    let cfg = new_config(1.0, 0.0);
    let mut rate: *mut QdhoRate = ptr::null_mut();
    let status = unsafe {
        qdho_transition_rate(
            cfg,
            1,
            0, // down
            0, // field vacuum
            0.0,
            ptr::null(),
            0,
            0, // reservoir vacuum
            0.0,
            ptr::null(),
            0,
            &mut rate,
        )
    };
    assert_eq!(status, QdhoStatus::Ok);
    let mut smooth = 0.0;
    assert_eq!(
        unsafe { qdho_rate_smooth(rate, &mut smooth) },
        QdhoStatus::Ok
    );
    assert_eq!(smooth, 1.0);
    let mut count = 7usize;
    assert_eq!(
        unsafe { qdho_rate_resonance_count(rate, &mut count) },
        QdhoStatus::Ok
    );
    assert_eq!(count, 0);
    unsafe { qdho_rate_free(rate) };

    // Up transition against a Fock reservoir: one resonance, evaluable.
    let quanta = [1.0f64];
    let mut rate: *mut QdhoRate = ptr::null_mut();
    let status = unsafe {
        qdho_transition_rate(
            cfg,
            1,
            1, // up
            0,
            0.0,
            ptr::null(),
            0,
            2, // reservoir fock
            0.0,
            quanta.as_ptr(),
            1,
            &mut rate,
        )
    };
    assert_eq!(status, QdhoStatus::Ok);
    let (mut location, mut weight) = (0.0, 0.0);
    assert_eq!(
        unsafe { qdho_rate_resonance(rate, 0, &mut location, &mut weight) },
        QdhoStatus::Ok
    );
    assert_eq!(location, 1.0);
    assert!((weight - 2.0 / (4.0 * PI)).abs() < 1e-15);
    assert_eq!(
        unsafe { qdho_rate_resonance(rate, 1, &mut location, &mut weight) },
        QdhoStatus::InvalidArgument
    );
    let mut probability = 0.0;
    let mut clamped: c_int = -1;
    assert_eq!(
        unsafe { qdho_rate_evaluate(rate, 0.01, 0.5, 0, 1.0, &mut probability, &mut clamped) },
        QdhoStatus::Ok
    );
    assert!((probability - 2.0 / (4.0 * PI) / 0.5 * 0.01).abs() < 1e-15);
    assert_eq!(clamped, 0);
    unsafe { qdho_rate_free(rate) };
    unsafe { qdho_config_free(cfg) };
}

#[test]
fn exchange_rate_axial_photon() {
    let cfg = new_config(1.0, 0.5);
    let photon = [1.0f64, 0.0, 0.0, 1.0, 1.5];
    let mut rate: *mut QdhoRate = ptr::null_mut();
    let status =
        unsafe { qdho_exchange_rate(cfg, 0, photon.as_ptr(), 1, 2.0, ptr::null(), 0, &mut rate) };
    assert_eq!(status, QdhoStatus::Ok);
    let mut smooth = 1.0;
    unsafe { qdho_rate_smooth(rate, &mut smooth) };
    assert_eq!(smooth, 0.0);
    unsafe { qdho_rate_free(rate) };
    unsafe { qdho_config_free(cfg) };
}

#[test]
fn solver_handles_and_model_guards() {
    let cfg = new_config(0.02, 0.0);
    let mut traj: *mut QdhoTrajectory = ptr::null_mut();
    let status = unsafe { qdho_solve(cfg, 0, 64, 1.0, 0.0, 10.0, 0.01, &mut traj) };
    assert_eq!(status, QdhoStatus::Ok);
    let mut len = 0usize;
    assert_eq!(
        unsafe { qdho_trajectory_len(traj, &mut len) },
        QdhoStatus::Ok
    );
    assert_eq!(len, 1001);
    let (mut t, mut q, mut qdot) = (0.0, 0.0, 0.0);
    assert_eq!(
        unsafe { qdho_trajectory_sample(traj, 0, &mut t, &mut q, &mut qdot) },
        QdhoStatus::Ok
    );
    assert_eq!((t, q, qdot), (0.0, 1.0, 0.0));
    assert_eq!(
        unsafe { qdho_trajectory_sample(traj, len, &mut t, &mut q, &mut qdot) },
        QdhoStatus::InvalidArgument
    );
    unsafe { qdho_trajectory_free(traj) };

    // Step too coarse → precondition.
    let status = unsafe { qdho_solve(cfg, 0, 64, 1.0, 0.0, 10.0, 0.5, &mut traj) };
    assert_eq!(status, QdhoStatus::Precondition);
    // Unknown solver id.
    let status = unsafe { qdho_solve(cfg, 9, 64, 1.0, 0.0, 10.0, 0.01, &mut traj) };
    assert_eq!(status, QdhoStatus::InvalidArgument);
    unsafe { qdho_config_free(cfg) };

    // tau*omega beyond the validity regime.
    let hot = new_config(0.0, (6.0 * PI * 0.5).sqrt());
    let status = unsafe { qdho_solve(hot, 2, 64, 1.0, 0.0, 10.0, 0.01, &mut traj) };
    assert_eq!(status, QdhoStatus::ModelValidity);
    unsafe { qdho_config_free(hot) };
}

#[test]
fn oracle_run_matches_analytic() {
    let cfg = new_config(2e-3, 0.0);
    let (mut fitted, mut analytic) = (0.0, 0.0);
    let status = unsafe {
        qdho_oracle_run(
            cfg,
            0,
            1,
            150,
            0.2,
            5.0,
            2.5,
            40.0,
            100,
            &mut fitted,
            &mut analytic,
        )
    };
    assert_eq!(status, QdhoStatus::Ok);
    assert_eq!(analytic, 2e-3);
    assert!((fitted / analytic - 1.0).abs() < 0.1);
    // Band excluding omega → precondition.
    let status = unsafe {
        qdho_oracle_run(
            cfg,
            0,
            1,
            50,
            2.0,
            5.0,
            2.5,
            40.0,
            100,
            &mut fitted,
            &mut analytic,
        )
    };
    assert_eq!(status, QdhoStatus::Precondition);
    unsafe { qdho_config_free(cfg) };
}

#[test]
fn generated_header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/qdho.h");
    assert!(
        std::path::Path::new(header).exists(),
        "header not generated"
    );
    let compilers = ["cc", "gcc", "clang"];
    let mut checked = false;
    for compiler in compilers {
        match Command::new(compiler)
            .args(["-std=c99", "-fsyntax-only", "-x", "c", header])
            .output()
        {
            Ok(output) => {
                assert!(
                    output.status.success(),
                    "{compiler} rejected the header: {}",
                    String::from_utf8_lossy(&output.stderr)
                );
                checked = true;
                break;
            }
            Err(_) => continue,
        }
    }
    assert!(checked, "no C compiler available to check the header");
}
