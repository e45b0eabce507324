// SPDX-License-Identifier: Apache-2.0

//! C ABI over the `mhk` library.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns an [`MhkStatus`]; on failure the message is
//! available from [`mhk_last_error_message`] on the same thread. Vertex
//! labels are 1-based, as in every other external format of the toolkit.
//! Strings handed out by the library must be released with
//! [`mhk_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mhk::cli::{spectra_report, verify, VerifyOptions};
use mhk::diagnostics::{consensus_diameter, energy};
use mhk::dynamics::Simulation;
use mhk::graph::SimpleGraph;
use mhk::io::parse_config;
use mhk::spectral::{cheeger_constant, lambda2, laplacian};
use mhk::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed or invalid configuration or input document.
    ConfigError = 3,
    /// Bad vertex label, size mismatch or similar misuse.
    InvalidArgument = 4,
    /// Input outside the mathematical domain of the operation.
    DomainError = 5,
    SizeLimit = 6,
    NumericalError = 7,
    BufferTooSmall = 8,
    /// The simulation has reached its horizon or stop rule.
    Finished = 9,
    /// An internal panic was caught at the boundary.
    Panic = 10,
}

/// A running simulation.
pub struct MhkSimulation {
    sim: Simulation,
    epsilon: f64,
}

/// An undirected simple graph under construction.
pub struct MhkGraph {
    graph: SimpleGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> MhkStatus {
    match err {
        Error::Config(_) | Error::Parse { .. } | Error::Io { .. } | Error::InvalidSchedule(_) => {
            MhkStatus::ConfigError
        }
        Error::Shape(_) | Error::Graph(_) => MhkStatus::InvalidArgument,
        Error::Domain(_) | Error::Precondition(_) => MhkStatus::DomainError,
        Error::SizeLimit(_) => MhkStatus::SizeLimit,
        Error::Numerical { .. } => MhkStatus::NumericalError,
    }
}

fn fail(err: Error) -> MhkStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Runs `f`, converting panics into [`MhkStatus::Panic`].
fn guard(f: impl FnOnce() -> MhkStatus) -> MhkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            MhkStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, MhkStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(MhkStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        MhkStatus::InvalidUtf8
    })
}

fn null_arg() -> MhkStatus {
    set_error("null pointer argument");
    MhkStatus::NullPointer
}

fn hand_out(s: String, out: *mut *mut c_char) -> MhkStatus {
    match CString::new(s) {
        Ok(c) => {
            // SAFETY: caller checked `out` for null.
            unsafe { *out = c.into_raw() };
            MhkStatus::Ok
        }
        Err(_) => {
            set_error("output contained an interior NUL byte");
            MhkStatus::Panic
        }
    }
}

/// Message of the last failed call on this thread, or NULL. Release with
/// [`mhk_string_free`].
#[no_mangle]
pub extern "C" fn mhk_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |m| m.clone().into_raw())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn mhk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mhk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a simulation from a JSON configuration document and samples its
/// initial state.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhk_simulation_new(
    config_json: *const c_char,
    out: *mut *mut MhkSimulation,
) -> MhkStatus {
    guard(|| {
        if out.is_null() {
            return null_arg();
        }
        let text = match read_str(config_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let loaded = match parse_config(text) {
            Ok(l) => l,
            Err(e) => return fail(e),
        };
        match Simulation::new(&loaded.model, loaded.diagnostics.run_settings()) {
            Ok(sim) => {
                let handle = Box::new(MhkSimulation {
                    sim,
                    epsilon: loaded.model.epsilon,
                });
                *out = Box::into_raw(handle);
                MhkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Applies one update. Returns [`MhkStatus::Finished`] without changing the
/// state once the horizon or the stop rule is reached.
///
/// # Safety
/// `sim` must be a live handle from [`mhk_simulation_new`].
#[no_mangle]
pub unsafe extern "C" fn mhk_simulation_step(sim: *mut MhkSimulation) -> MhkStatus {
    guard(|| {
        let Some(h) = sim.as_mut() else {
            return null_arg();
        };
        if h.sim.is_finished() {
            return MhkStatus::Finished;
        }
        match h.sim.advance() {
            Ok(Some(ev)) if ev.detail.is_some() => MhkStatus::Ok,
            Ok(_) => MhkStatus::Finished,
            Err(e) => fail(e),
        }
    })
}

/// Current step index, or 0 for a NULL handle.
///
/// # Safety
/// `sim` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mhk_simulation_time(sim: *const MhkSimulation) -> u64 {
    sim.as_ref().map_or(0, |h| h.sim.state().t())
}

/// Writes the number of agents and the opinion dimension.
///
/// # Safety
/// `sim` must be a live handle; `n` and `d` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhk_simulation_shape(
    sim: *const MhkSimulation,
    n: *mut usize,
    d: *mut usize,
) -> MhkStatus {
    guard(|| {
        let (Some(h), false, false) = (sim.as_ref(), n.is_null(), d.is_null()) else {
            return null_arg();
        };
        *n = h.sim.state().n();
        *d = h.sim.state().d();
        MhkStatus::Ok
    })
}

/// Copies the opinions, row-major `n x d`, into `buf` of length `len`.
///
/// # Safety
/// `sim` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mhk_simulation_opinions(
    sim: *const MhkSimulation,
    buf: *mut f64,
    len: usize,
) -> MhkStatus {
    guard(|| {
        let Some(h) = sim.as_ref() else {
            return null_arg();
        };
        if buf.is_null() {
            return null_arg();
        }
        let values = h.sim.state().values();
        if len < values.len() {
            set_error(format!(
                "buffer holds {len} values, {} needed",
                values.len()
            ));
            return MhkStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        MhkStatus::Ok
    })
}

/// Energy of the current state.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhk_simulation_energy(
    sim: *const MhkSimulation,
    out: *mut f64,
) -> MhkStatus {
    guard(|| {
        let (Some(h), false) = (sim.as_ref(), out.is_null()) else {
            return null_arg();
        };
        *out = energy(h.sim.state(), h.epsilon).z;
        MhkStatus::Ok
    })
}

/// Largest pairwise opinion distance of the current state.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhk_simulation_diameter(
    sim: *const MhkSimulation,
    out: *mut f64,
) -> MhkStatus {
    guard(|| {
        let (Some(h), false) = (sim.as_ref(), out.is_null()) else {
            return null_arg();
        };
        *out = consensus_diameter(h.sim.state());
        MhkStatus::Ok
    })
}

/// Releases a simulation. NULL is ignored.
///
/// # Safety
/// `sim` must be NULL or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mhk_simulation_free(sim: *mut MhkSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Creates an edgeless graph on `n` vertices.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhk_graph_new(n: usize, out: *mut *mut MhkGraph) -> MhkStatus {
    guard(|| {
        if out.is_null() {
            return null_arg();
        }
        *out = Box::into_raw(Box::new(MhkGraph {
            graph: SimpleGraph::empty(n),
        }));
        MhkStatus::Ok
    })
}

/// Adds the edge `{i, j}` (1-based). Loops, out-of-range labels and repeated
/// edges are rejected.
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mhk_graph_add_edge(g: *mut MhkGraph, i: usize, j: usize) -> MhkStatus {
    guard(|| {
        let Some(h) = g.as_mut() else {
            return null_arg();
        };
        let mut edges = h.graph.to_one_based();
        edges.push([i, j]);
        match SimpleGraph::from_one_based(h.graph.n(), &edges) {
            Ok(next) => {
                h.graph = next;
                MhkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Algebraic connectivity of the graph Laplacian.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhk_graph_lambda2(g: *const MhkGraph, out: *mut f64) -> MhkStatus {
    guard(|| {
        let (Some(h), false) = (g.as_ref(), out.is_null()) else {
            return null_arg();
        };
        match lambda2(&laplacian(&h.graph)) {
            Ok(v) => {
                *out = v;
                MhkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Exact Cheeger constant `|dS| / |S|` (at most 20 vertices). `boundary` and
/// `size` receive the minimizing fraction and may be NULL.
///
/// # Safety
/// `g` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhk_graph_cheeger(
    g: *const MhkGraph,
    value: *mut f64,
    boundary: *mut usize,
    size: *mut usize,
) -> MhkStatus {
    guard(|| {
        let (Some(h), false) = (g.as_ref(), value.is_null()) else {
            return null_arg();
        };
        match cheeger_constant(&h.graph) {
            Ok(c) => {
                *value = c.value();
                if !boundary.is_null() {
                    *boundary = c.boundary;
                }
                if !size.is_null() {
                    *size = c.size;
                }
                MhkStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Spectrum, Cheeger witness and sandwich verdict as a JSON document.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhk_graph_spectra_json(
    g: *const MhkGraph,
    out: *mut *mut c_char,
) -> MhkStatus {
    guard(|| {
        let (Some(h), false) = (g.as_ref(), out.is_null()) else {
            return null_arg();
        };
        match spectra_report(&h.graph) {
            Ok(r) => hand_out(serde_json::to_string(&r).unwrap_or_default(), out),
            Err(e) => fail(e),
        }
    })
}

/// Releases a graph. NULL is ignored.
///
/// # Safety
/// `g` must be NULL or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mhk_graph_free(g: *mut MhkGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Runs the verification suite for a JSON configuration. `replicates = 0`
/// keeps the document's value. The report is written to `report_json`;
/// `passed` receives 1 when every check passed.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhk_verify_json(
    config_json: *const c_char,
    replicates: u64,
    passed: *mut i32,
    report_json: *mut *mut c_char,
) -> MhkStatus {
    guard(|| {
        if passed.is_null() || report_json.is_null() {
            return null_arg();
        }
        let text = match read_str(config_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let loaded = match parse_config(text) {
            Ok(l) => l,
            Err(e) => return fail(e),
        };
        let mut opts = VerifyOptions::from_config(&loaded);
        if replicates > 0 {
            opts.replicates = replicates;
        }
        match verify(&loaded, &opts) {
            Ok(report) => {
                *passed = i32::from(report.pass);
                hand_out(
                    serde_json::to_string(&report).unwrap_or_default(),
                    report_json,
                )
            }
            Err(e) => fail(e),
        }
    })
}
