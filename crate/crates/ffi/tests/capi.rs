// SPDX-License-Identifier: Apache-2.0

use std::ffi::{CStr, CString};
use std::ptr;

use mhk_ffi::*;

const HK3: &str = r#"{"model":{"n":3,"epsilon":0.7,"horizon":2,"seed":1,
    "initial":{"kind":"explicit","opinions":[[0.0],[0.6],[1.2]]}},
    "preset":{"name":"sync_hk"}}"#;

fn last_error() -> String {
    let p = mhk_last_error_message();
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { mhk_string_free(p) };
    s
}

#[test]
fn simulation_lifecycle() {
    let cfg = CString::new(HK3).unwrap();
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(mhk_simulation_new(cfg.as_ptr(), &mut sim), MhkStatus::Ok);
        let (mut n, mut d) = (0, 0);
        assert_eq!(mhk_simulation_shape(sim, &mut n, &mut d), MhkStatus::Ok);
        assert_eq!((n, d), (3, 1));
        let mut z = 0.0;
        assert_eq!(mhk_simulation_energy(sim, &mut z), MhkStatus::Ok);
        assert!((z - 2.42).abs() < 1e-12);

        assert_eq!(mhk_simulation_step(sim), MhkStatus::Ok);
        assert_eq!(mhk_simulation_time(sim), 1);
        let mut buf = [0.0; 3];
        assert_eq!(
            mhk_simulation_opinions(sim, buf.as_mut_ptr(), 3),
            MhkStatus::Ok
        );
        assert!((buf[0] - 0.3).abs() < 1e-15 && buf[1] == 0.6 && (buf[2] - 0.9).abs() < 1e-15);
        assert_eq!(
            mhk_simulation_opinions(sim, buf.as_mut_ptr(), 2),
            MhkStatus::BufferTooSmall
        );

        assert_eq!(mhk_simulation_step(sim), MhkStatus::Ok);
        assert_eq!(mhk_simulation_step(sim), MhkStatus::Finished);
        assert_eq!(mhk_simulation_step(sim), MhkStatus::Finished);
        assert_eq!(mhk_simulation_time(sim), 2);
        let mut diam = 1.0;
        assert_eq!(mhk_simulation_diameter(sim, &mut diam), MhkStatus::Ok);
        assert!(diam < 1e-15);
        mhk_simulation_free(sim);
    }
}

#[test]
fn config_errors_are_reported() {
    let bad = CString::new(HK3.replace("0.7", "-1")).unwrap();
    let mut sim = ptr::null_mut();
    let st = unsafe { mhk_simulation_new(bad.as_ptr(), &mut sim) };
    assert_eq!(st, MhkStatus::ConfigError);
    assert!(sim.is_null());
    assert!(last_error().contains("epsilon"));

    let st = unsafe { mhk_simulation_new(ptr::null(), &mut sim) };
    assert_eq!(st, MhkStatus::NullPointer);
}

#[test]
fn graph_queries() {
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(mhk_graph_new(3, &mut g), MhkStatus::Ok);
        assert_eq!(mhk_graph_add_edge(g, 1, 2), MhkStatus::Ok);
        assert_eq!(mhk_graph_add_edge(g, 2, 3), MhkStatus::Ok);
        assert_eq!(mhk_graph_add_edge(g, 2, 2), MhkStatus::InvalidArgument);
        assert_eq!(mhk_graph_add_edge(g, 0, 1), MhkStatus::InvalidArgument);
        assert_eq!(mhk_graph_add_edge(g, 1, 2), MhkStatus::InvalidArgument);

        let mut l2 = 0.0;
        assert_eq!(mhk_graph_lambda2(g, &mut l2), MhkStatus::Ok);
        assert!((l2 - 1.0).abs() < 1e-10);
        let (mut v, mut b, mut s) = (0.0, 0, 0);
        assert_eq!(mhk_graph_cheeger(g, &mut v, &mut b, &mut s), MhkStatus::Ok);
        assert_eq!((v, b, s), (1.0, 1, 1));

        let mut json = ptr::null_mut();
        assert_eq!(mhk_graph_spectra_json(g, &mut json), MhkStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        mhk_string_free(json);
        assert!(text.contains("\"sandwich\":\"pass\""), "{text}");
        mhk_graph_free(g);

        assert_eq!(mhk_graph_new(21, &mut g), MhkStatus::Ok);
        assert_eq!(
            mhk_graph_cheeger(g, &mut v, ptr::null_mut(), ptr::null_mut()),
            MhkStatus::SizeLimit
        );
        mhk_graph_free(g);
    }
}

#[test]
fn verify_through_the_abi() {
    let cfg = CString::new(HK3).unwrap();
    let (mut passed, mut report) = (0, ptr::null_mut());
    let st = unsafe { mhk_verify_json(cfg.as_ptr(), 2, &mut passed, &mut report) };
    assert_eq!(st, MhkStatus::Ok);
    assert_eq!(passed, 1);
    let text = unsafe { CStr::from_ptr(report) }
        .to_str()
        .unwrap()
        .to_owned();
    unsafe { mhk_string_free(report) };
    assert!(text.contains("\"replicates\":2"));
}

#[test]
fn header_lists_the_api() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/mhk.h")).unwrap();
    for name in [
        "mhk_simulation_new",
        "mhk_simulation_step",
        "mhk_simulation_free",
        "mhk_graph_new",
        "mhk_graph_cheeger",
        "mhk_last_error_message",
        "typedef struct MhkSimulation MhkSimulation",
        "MHK_STATUS_FINISHED = 9",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
