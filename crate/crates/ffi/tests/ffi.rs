use std::ffi::CStr;
use std::ptr;

use qwalk_ffi::*;

fn new_state(init: u32, t_max: usize) -> *mut QwalkState {
    let mut s = ptr::null_mut();
    assert_eq!(qwalk_state_new(init, t_max, &mut s), QwalkStatus::Ok);
    assert!(!s.is_null());
    s
}

fn last_error() -> String {
    let p = qwalk_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn hadamard_steps_match_known_distribution() {
    let s = new_state(QWALK_INIT_RIGHT, 3);
    unsafe {
        for _ in 0..3 {
            assert_eq!(qwalk_state_step(s), QwalkStatus::Ok);
        }
        assert_eq!(qwalk_state_time(s), 3);
        let width = qwalk_state_width(s);
        assert_eq!(width, 7);
        let mut p = vec![f64::NAN; width];
        assert_eq!(qwalk_state_distribution(s, p.as_mut_ptr(), p.len()), QwalkStatus::Ok);
        let expect = [0.125, 0.0, 0.125, 0.0, 0.625, 0.0, 0.125];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14, "{p:?}");
        }
        qwalk_state_free(s);
    }
}

#[test]
fn capacity_and_buffer_errors() {
    let s = new_state(QWALK_INIT_SYMMETRIC, 1);
    unsafe {
        assert_eq!(qwalk_state_step(s), QwalkStatus::Ok);
        assert_eq!(qwalk_state_step(s), QwalkStatus::CapacityExceeded);
        assert!(last_error().contains("t_max = 1"));
        let mut small = [0.0; 2];
        assert_eq!(qwalk_state_distribution(s, small.as_mut_ptr(), 2), QwalkStatus::BufferTooSmall);
        assert_eq!(qwalk_state_distribution(s, ptr::null_mut(), 3), QwalkStatus::NullPointer);
        qwalk_state_free(s);
    }
}

#[test]
fn invalid_inputs_are_reported() {
    let mut s = ptr::null_mut();
    assert_eq!(qwalk_state_new(9, 4, &mut s), QwalkStatus::InvalidArgument);
    assert!(s.is_null());
    assert_eq!(qwalk_state_new_custom(1.0, 0.0, 1.0, 0.0, 4, &mut s), QwalkStatus::NotNormalized);
    assert!(last_error().contains("expected 1"));
    assert_eq!(qwalk_state_new(QWALK_INIT_RIGHT, 4, ptr::null_mut()), QwalkStatus::NullPointer);
    let mut n = ptr::null_mut();
    assert_eq!(qwalk_noise_new(-0.1, 1, 0, &mut n), QwalkStatus::InvalidArgument);
    let mut d = ptr::null_mut();
    assert_eq!(qwalk_decoherence_new(1.5, 1, 0, &mut d), QwalkStatus::InvalidArgument);
    unsafe {
        assert_eq!(qwalk_state_step(ptr::null_mut()), QwalkStatus::NullPointer);
        assert_eq!(qwalk_state_time(ptr::null()), 0);
        qwalk_state_free(ptr::null_mut());
        qwalk_noise_free(ptr::null_mut());
        qwalk_decoherence_free(ptr::null_mut());
    }
}

#[test]
fn noisy_walk_matches_library_and_stays_normalized() {
    let (alpha, seed, run, t_max) = (0.2, 11, 3, 200);
    let s = new_state(QWALK_INIT_RIGHT, t_max);
    let mut n = ptr::null_mut();
    assert_eq!(qwalk_noise_new(alpha, seed, run, &mut n), QwalkStatus::Ok);

    let cfg = qwalk::NoiseConfig::new(alpha, seed).unwrap();
    let mut stream = cfg.run_stream(run);
    let mut reference = qwalk::WalkerState::new(qwalk::InitialCondition::RightOrigin, t_max).unwrap();
    unsafe {
        for _ in 0..t_max {
            assert_eq!(qwalk_state_step_noisy(s, n), QwalkStatus::Ok);
            reference.step(&qwalk::noisy_coin(&mut stream, &cfg)).unwrap();
        }
        let mut norm = 0.0;
        assert_eq!(qwalk_state_norm_sqr(s, &mut norm), QwalkStatus::Ok);
        assert!((norm - 1.0).abs() < 1e-12);

        let (mut m, mut q) = (0.0, 0.0);
        assert_eq!(qwalk_state_moments(s, &mut m, &mut q), QwalkStatus::Ok);
        assert_eq!((m, q), reference.moments());

        let len = 2 * qwalk_state_width(s);
        let (mut r, mut l) = (vec![0.0; len], vec![0.0; len]);
        assert_eq!(qwalk_state_amplitudes(s, r.as_mut_ptr(), l.as_mut_ptr(), len), QwalkStatus::Ok);
        let (ar, al) = reference.amplitudes();
        for i in 0..ar.len() {
            assert_eq!((r[2 * i], r[2 * i + 1]), (ar[i].re, ar[i].im));
            assert_eq!((l[2 * i], l[2 * i + 1]), (al[i].re, al[i].im));
        }
        qwalk_noise_free(n);
        qwalk_state_free(s);
    }
}

#[test]
fn decoherent_channel_keeps_norm() {
    let s = new_state(QWALK_INIT_RIGHT, 100);
    let mut d = ptr::null_mut();
    assert_eq!(qwalk_decoherence_new(0.3, 5, 0, &mut d), QwalkStatus::Ok);
    unsafe {
        for _ in 0..100 {
            assert_eq!(qwalk_state_step_decoherent(s, d), QwalkStatus::Ok);
        }
        let mut norm = 0.0;
        qwalk_state_norm_sqr(s, &mut norm);
        assert!((norm - 1.0).abs() < 1e-12);
        qwalk_decoherence_free(d);
        qwalk_state_free(s);
    }
}

#[test]
fn classical_distribution_is_pascal_row() {
    let mut p = vec![0.0; 9];
    unsafe {
        assert_eq!(qwalk_classical_distribution(4, p.as_mut_ptr(), p.len()), QwalkStatus::Ok);
        assert_eq!(qwalk_classical_distribution(4, p.as_mut_ptr(), 8), QwalkStatus::BufferTooSmall);
    }
    let expect = [1.0, 0.0, 4.0, 0.0, 6.0, 0.0, 4.0, 0.0, 1.0].map(|x| x / 16.0);
    for (a, b) in p.iter().zip(expect) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/qwalk.h");
    for name in [
        "qwalk_last_error",
        "qwalk_state_new",
        "qwalk_state_new_custom",
        "qwalk_state_free",
        "qwalk_state_step",
        "qwalk_state_step_noisy",
        "qwalk_state_step_decoherent",
        "qwalk_state_time",
        "qwalk_state_width",
        "qwalk_state_norm_sqr",
        "qwalk_state_moments",
        "qwalk_state_distribution",
        "qwalk_state_amplitudes",
        "qwalk_noise_new",
        "qwalk_noise_free",
        "qwalk_decoherence_new",
        "qwalk_decoherence_free",
        "qwalk_classical_distribution",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct QwalkState QwalkState;"));
    assert!(header.contains("QWALK_STATUS_CAPACITY_EXCEEDED = 4"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/qwalk.h");
    let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .output()
    else {
        eprintln!("no C compiler on PATH, skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
