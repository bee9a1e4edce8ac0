//! C ABI over `wsnsim`.
//!
//! Handles (`WsnConfig`, `WsnSimulation`, `WsnSeries`) are opaque and owned
//! by the caller once returned; release each with its `_free` function.
//! Every fallible call returns a `WsnStatus`. On failure the message is
//! available from `wsn_last_error` on the same thread until the next call.
//! Panics never cross the boundary; they surface as `WSN_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};

use wsnsim::model::ConfigValue;
use wsnsim::{Error, MetricsSeries, Protocol, SimConfig, Simulation};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsnStatus {
    Ok = 0,
    NullPointer = 1,
    /// Invalid configuration or unknown key/protocol.
    Config = 2,
    Io = 3,
    /// Internal invariant violated.
    Invariant = 4,
    InvalidArgument = 5,
    Panic = 6,
    /// The simulation has no more rounds to run.
    Finished = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsnProtocol {
    Leach = 0,
    Sep = 1,
    Esep = 2,
    Deec = 3,
    Hsep = 4,
}

impl From<WsnProtocol> for Protocol {
    fn from(p: WsnProtocol) -> Self {
        match p {
            WsnProtocol::Leach => Protocol::Leach,
            WsnProtocol::Sep => Protocol::Sep,
            WsnProtocol::Esep => Protocol::Esep,
            WsnProtocol::Deec => Protocol::Deec,
            WsnProtocol::Hsep => Protocol::Hsep,
        }
    }
}

impl From<Protocol> for WsnProtocol {
    fn from(p: Protocol) -> Self {
        match p {
            Protocol::Leach => WsnProtocol::Leach,
            Protocol::Sep => WsnProtocol::Sep,
            Protocol::Esep => WsnProtocol::Esep,
            Protocol::Deec => WsnProtocol::Deec,
            Protocol::Hsep => WsnProtocol::Hsep,
        }
    }
}

pub struct WsnConfig {
    inner: SimConfig,
}

pub struct WsnSimulation {
    inner: Simulation,
}

pub struct WsnSeries {
    inner: MetricsSeries,
}

/// One row of the per-round series (same columns as the CSV).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WsnSeriesRow {
    pub round: u64,
    pub alive: usize,
    pub dead: usize,
    pub primary_chs: usize,
    pub secondary_chs: usize,
    pub packets_cum: u64,
    pub energy_total: f64,
}

/// Counts from one stepped round.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WsnRound {
    pub round: u64,
    pub primary_chs: usize,
    pub secondary_chs: usize,
    pub packets_to_bs: u64,
    pub energy_spent: f64,
    pub deaths: usize,
    pub alive_after: usize,
}

/// Round events are -1 when they did not occur.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WsnSummary {
    pub protocol: WsnProtocol,
    pub seed: u64,
    pub fnd: i64,
    pub hnd: i64,
    pub lnd: i64,
    pub total_packets: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> WsnStatus {
    match err.exit_code() {
        2 => WsnStatus::Config,
        3 => WsnStatus::Io,
        _ => WsnStatus::Invariant,
    }
}

fn fail(status: WsnStatus, msg: impl Into<String>) -> WsnStatus {
    set_error(msg);
    status
}

fn guard(body: impl FnOnce() -> WsnStatus) -> WsnStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(WsnStatus::Panic, "panic inside wsnsim"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, WsnStatus> {
    if p.is_null() {
        return Err(fail(WsnStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(WsnStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! non_null {
    ($p:expr, $what:literal) => {
        if $p.is_null() {
            return fail(WsnStatus::NullPointer, concat!($what, " is null"));
        }
    };
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next `wsn_*` call on this thread.
#[no_mangle]
pub extern "C" fn wsn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn wsn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New config holding the reference defaults.
#[no_mangle]
pub extern "C" fn wsn_config_new() -> *mut WsnConfig {
    Box::into_raw(Box::new(WsnConfig {
        inner: SimConfig::default(),
    }))
}

/// Parses a `key = value` document. `*out` receives a new handle on success.
#[no_mangle]
pub unsafe extern "C" fn wsn_config_parse(
    text: *const c_char,
    out: *mut *mut WsnConfig,
) -> WsnStatus {
    guard(|| {
        non_null!(out, "out");
        let text = try_status!(str_arg(text, "text"));
        match wsnsim::cli::parse_config(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(WsnConfig { inner }));
                WsnStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

unsafe fn config_set(config: *mut WsnConfig, key: *const c_char, value: ConfigValue) -> WsnStatus {
    guard(|| {
        non_null!(config, "config");
        let key = try_status!(str_arg(key, "key"));
        match (*config).inner.set(key, value) {
            Ok(()) => WsnStatus::Ok,
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Sets a real-valued key (same names as the config file).
#[no_mangle]
pub unsafe extern "C" fn wsn_config_set_f64(
    config: *mut WsnConfig,
    key: *const c_char,
    value: f64,
) -> WsnStatus {
    config_set(config, key, ConfigValue::Float(value))
}

/// Sets an integer key such as `seed`, `n_nodes` or `max_rounds`.
#[no_mangle]
pub unsafe extern "C" fn wsn_config_set_u64(
    config: *mut WsnConfig,
    key: *const c_char,
    value: u64,
) -> WsnStatus {
    if value > i64::MAX as u64 {
        return fail(WsnStatus::InvalidArgument, "value exceeds i64::MAX");
    }
    config_set(config, key, ConfigValue::Int(value as i64))
}

#[no_mangle]
pub unsafe extern "C" fn wsn_config_validate(config: *const WsnConfig) -> WsnStatus {
    guard(|| {
        non_null!(config, "config");
        match (*config).inner.validate() {
            Ok(()) => WsnStatus::Ok,
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn wsn_config_free(config: *mut WsnConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Looks up a protocol by case-insensitive name.
#[no_mangle]
pub unsafe extern "C" fn wsn_protocol_from_name(
    name: *const c_char,
    out: *mut WsnProtocol,
) -> WsnStatus {
    guard(|| {
        non_null!(out, "out");
        let name = try_status!(str_arg(name, "name"));
        match name.parse::<Protocol>() {
            Ok(p) => {
                *out = p.into();
                WsnStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Static lower-case protocol name.
#[no_mangle]
pub extern "C" fn wsn_protocol_name(protocol: WsnProtocol) -> *const c_char {
    let name: &'static [u8] = match protocol {
        WsnProtocol::Leach => b"leach\0",
        WsnProtocol::Sep => b"sep\0",
        WsnProtocol::Esep => b"esep\0",
        WsnProtocol::Deec => b"deec\0",
        WsnProtocol::Hsep => b"hsep\0",
    };
    name.as_ptr().cast()
}

/// Builds the network for a stepwise run.
#[no_mangle]
pub unsafe extern "C" fn wsn_simulation_new(
    config: *const WsnConfig,
    protocol: WsnProtocol,
    out: *mut *mut WsnSimulation,
) -> WsnStatus {
    guard(|| {
        non_null!(config, "config");
        non_null!(out, "out");
        match Simulation::new(&(*config).inner, protocol.into()) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(WsnSimulation { inner }));
                WsnStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Runs one round. Returns `WSN_STATUS_FINISHED` once every node is dead or
/// `max_rounds` is reached; `*out` is untouched in that case.
#[no_mangle]
pub unsafe extern "C" fn wsn_simulation_step(
    sim: *mut WsnSimulation,
    out: *mut WsnRound,
) -> WsnStatus {
    guard(|| {
        non_null!(sim, "simulation");
        match (*sim).inner.step() {
            Ok(Some((o, _))) => {
                if !out.is_null() {
                    *out = WsnRound {
                        round: o.round,
                        primary_chs: o.primary_chs.len(),
                        secondary_chs: o.secondary_chs.len(),
                        packets_to_bs: o.packets_to_bs,
                        energy_spent: o.energy_spent,
                        deaths: o.deaths.len(),
                        alive_after: o.alive_after,
                    };
                }
                WsnStatus::Ok
            }
            Ok(None) => WsnStatus::Finished,
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn wsn_simulation_alive(sim: *const WsnSimulation) -> usize {
    if sim.is_null() {
        return 0;
    }
    (*sim).inner.state().alive_count()
}

#[no_mangle]
pub unsafe extern "C" fn wsn_simulation_residual_energy(sim: *const WsnSimulation) -> f64 {
    if sim.is_null() {
        return 0.0;
    }
    (*sim).inner.state().residual_total()
}

#[no_mangle]
pub unsafe extern "C" fn wsn_simulation_free(sim: *mut WsnSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Runs a whole simulation and returns its per-round series.
#[no_mangle]
pub unsafe extern "C" fn wsn_simulate(
    config: *const WsnConfig,
    protocol: WsnProtocol,
    out: *mut *mut WsnSeries,
) -> WsnStatus {
    guard(|| {
        non_null!(config, "config");
        non_null!(out, "out");
        match wsnsim::simulate(&(*config).inner, protocol.into()) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(WsnSeries { inner }));
                WsnStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn wsn_series_len(series: *const WsnSeries) -> usize {
    if series.is_null() {
        return 0;
    }
    (*series).inner.rows.len()
}

#[no_mangle]
pub unsafe extern "C" fn wsn_series_row(
    series: *const WsnSeries,
    index: usize,
    out: *mut WsnSeriesRow,
) -> WsnStatus {
    guard(|| {
        non_null!(series, "series");
        non_null!(out, "out");
        let rows = &(*series).inner.rows;
        let Some(r) = rows.get(index) else {
            return fail(
                WsnStatus::InvalidArgument,
                format!("row {index} out of range"),
            );
        };
        *out = WsnSeriesRow {
            round: r.round,
            alive: r.alive,
            dead: r.dead,
            primary_chs: r.primary_chs,
            secondary_chs: r.secondary_chs,
            packets_cum: r.packets_cum,
            energy_total: r.energy_total,
        };
        WsnStatus::Ok
    })
}

/// FND/HND/LND and throughput. Fails with `WSN_STATUS_INVARIANT` on an empty series.
#[no_mangle]
pub unsafe extern "C" fn wsn_series_summary(
    series: *const WsnSeries,
    out: *mut WsnSummary,
) -> WsnStatus {
    guard(|| {
        non_null!(series, "series");
        non_null!(out, "out");
        match wsnsim::summarize(&(*series).inner) {
            Ok(s) => {
                let ev = |v: Option<u64>| v.map_or(-1, |r| r as i64);
                *out = WsnSummary {
                    protocol: s.protocol.into(),
                    seed: s.seed,
                    fnd: ev(s.fnd),
                    hnd: ev(s.hnd),
                    lnd: ev(s.lnd),
                    total_packets: s.total_packets,
                };
                WsnStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Writes the series in the per-round CSV format.
#[no_mangle]
pub unsafe extern "C" fn wsn_series_write_csv(
    series: *const WsnSeries,
    path: *const c_char,
) -> WsnStatus {
    guard(|| {
        non_null!(series, "series");
        let path = try_status!(str_arg(path, "path"));
        let file = match File::create(path) {
            Ok(f) => f,
            Err(e) => return fail(WsnStatus::Io, format!("{path}: {e}")),
        };
        match wsnsim::emit_csv(&(*series).inner, BufWriter::new(file)) {
            Ok(()) => WsnStatus::Ok,
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn wsn_series_free(series: *mut WsnSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}
