//! C interface to the anyon-ca simulator.
//!
//! Every function returns an [`AcStatus`]. On failure a message is kept per
//! thread and can be copied out with [`ac_last_error`]. Objects are opaque
//! handles created by `*_new`/`*_parse`/`*_run` and released by the matching
//! `*_free`.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the access the function makes:
//! handles must come from this library and not be used after they are freed,
//! strings must be NUL-terminated, and output buffers must hold `cap` bytes.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use anyon_ca::algebra::proof_parameters;
use anyon_ca::backend::SystemState;
use anyon_ca::classifier::{self, ClassifierParams};
use anyon_ca::decoder::{full_step, Decoder};
use anyon_ca::experiments::{self, ExperimentConfig, LifetimeRecord, SweepOptions};
use anyon_ca::lattice::LatticeGeom;
use anyon_ca::noise::{ErrorEvent, EventKind, NoiseConfig};
use anyon_ca::verifier::snapshot_decode;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    OutOfRange = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(code: AcStatus, msg: impl Into<String>) -> AcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
    code
}

fn guard(f: impl FnOnce() -> AcStatus) -> AcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(AcStatus::Panic, msg)
        }
    }
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, AcStatus> {
    if s.is_null() {
        return Err(fail(AcStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(AcStatus::InvalidArgument, "string is not UTF-8"))
}

/// Copies `s` NUL-terminated into `buf`; `*len` receives the length without NUL.
unsafe fn copy_out(s: &str, buf: *mut c_char, cap: usize, len: *mut usize) -> AcStatus {
    if !len.is_null() {
        *len = s.len();
    }
    if buf.is_null() || cap == 0 {
        return if len.is_null() { fail(AcStatus::NullPointer, "null buffer") } else { AcStatus::Ok };
    }
    if s.len() + 1 > cap {
        return fail(AcStatus::BufferTooSmall, format!("need {} bytes", s.len() + 1));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    *buf.add(s.len()) = 0;
    AcStatus::Ok
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            return fail(AcStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Copies the calling thread's last error message. With a null `buf`, only `*len` is set.
#[no_mangle]
pub unsafe extern "C" fn ac_last_error(buf: *mut c_char, cap: usize, len: *mut usize) -> AcStatus {
    LAST_ERROR.with(|e| copy_out(&e.borrow(), buf, cap, len))
}

pub struct AcConfig(ExperimentConfig);

#[no_mangle]
pub unsafe extern "C" fn ac_config_new(out: *mut *mut AcConfig) -> AcStatus {
    nonnull!(out);
    *out = Box::into_raw(Box::new(AcConfig(ExperimentConfig::default())));
    AcStatus::Ok
}

/// Parses `key=value` lines. Unset keys keep their defaults.
#[no_mangle]
pub unsafe extern "C" fn ac_config_parse(text: *const c_char, out: *mut *mut AcConfig) -> AcStatus {
    guard(|| {
        nonnull!(out);
        let text = match c_str(text) {
            Ok(t) => t,
            Err(e) => return e,
        };
        match ExperimentConfig::parse(text) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(AcConfig(c)));
                AcStatus::Ok
            }
            Err(e) => fail(AcStatus::Parse, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ac_config_set(cfg: *mut AcConfig, key: *const c_char, value: *const c_char) -> AcStatus {
    guard(|| {
        nonnull!(cfg);
        let (k, v) = match (c_str(key), c_str(value)) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        match (*cfg).0.set(k, v) {
            Ok(()) => AcStatus::Ok,
            Err(e) => fail(AcStatus::InvalidArgument, e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ac_config_validate(cfg: *const AcConfig) -> AcStatus {
    nonnull!(cfg);
    match (*cfg).0.validate() {
        Ok(()) => AcStatus::Ok,
        Err(e) => fail(AcStatus::InvalidArgument, e.to_string()),
    }
}

/// Canonical text form of the config.
#[no_mangle]
pub unsafe extern "C" fn ac_config_canonical(cfg: *const AcConfig, buf: *mut c_char, cap: usize, len: *mut usize) -> AcStatus {
    nonnull!(cfg);
    copy_out(&(*cfg).0.canonical(), buf, cap, len)
}

/// 16 hex digits identifying the config; needs a 17-byte buffer.
#[no_mangle]
pub unsafe extern "C" fn ac_config_hash(cfg: *const AcConfig, buf: *mut c_char, cap: usize) -> AcStatus {
    nonnull!(cfg);
    copy_out(&(*cfg).0.hash(), buf, cap, ptr::null_mut())
}

#[no_mangle]
pub unsafe extern "C" fn ac_config_free(cfg: *mut AcConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

pub struct AcSweep(Vec<LifetimeRecord>);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AcRecord {
    pub seed: u64,
    pub q_side: u32,
    pub n: u32,
    pub p: f64,
    pub q: f64,
    pub lifetime: u64,
    pub censored: bool,
}

/// Runs every instance of every p value in the config.
#[no_mangle]
pub unsafe extern "C" fn ac_sweep_run(cfg: *const AcConfig, out: *mut *mut AcSweep) -> AcStatus {
    guard(|| {
        nonnull!(cfg, out);
        match experiments::run_sweep(&(*cfg).0, SweepOptions::default()) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(AcSweep(r.records)));
                AcStatus::Ok
            }
            Err(e) => fail(AcStatus::InvalidArgument, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ac_sweep_len(sweep: *const AcSweep, len: *mut usize) -> AcStatus {
    nonnull!(sweep, len);
    *len = (*sweep).0.len();
    AcStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn ac_sweep_record(sweep: *const AcSweep, index: usize, out: *mut AcRecord) -> AcStatus {
    nonnull!(sweep, out);
    let recs = &(*sweep).0;
    let Some(r) = recs.get(index) else {
        return fail(AcStatus::OutOfRange, format!("record {index} of {}", recs.len()));
    };
    *out = AcRecord {
        seed: r.seed,
        q_side: r.q_side as u32,
        n: r.n as u32,
        p: r.p,
        q: r.q,
        lifetime: r.lifetime,
        censored: r.failure_detail.starts_with("censored"),
    };
    AcStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn ac_sweep_write_csv(sweep: *const AcSweep, path: *const c_char) -> AcStatus {
    guard(|| {
        nonnull!(sweep);
        let path = match c_str(path) {
            Ok(p) => p,
            Err(e) => return e,
        };
        let file = match File::create(path) {
            Ok(f) => f,
            Err(e) => return fail(AcStatus::Io, format!("{path}: {e}")),
        };
        match experiments::write_records(BufWriter::new(file), &(*sweep).0) {
            Ok(()) => AcStatus::Ok,
            Err(e) => fail(AcStatus::Io, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ac_sweep_free(sweep: *mut AcSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// A single noisy memory with its decoder, advanced step by step.
pub struct AcSimulation {
    state: SystemState,
    dec: Decoder,
    noise: NoiseConfig,
    t: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AcLogicalStatus {
    pub success: bool,
    pub eps_x: bool,
    pub eps_y: bool,
    pub sigma_x: bool,
    pub sigma_y: bool,
    pub residual: bool,
}

/// Builds a simulation on the lattice of `cfg` with charge error rate `p`.
#[no_mangle]
pub unsafe extern "C" fn ac_sim_new(cfg: *const AcConfig, p: f64, seed: u64, out: *mut *mut AcSimulation) -> AcStatus {
    guard(|| {
        nonnull!(cfg, out);
        let c = &(*cfg).0;
        let mut c2 = c.clone();
        c2.p = vec![p];
        if let Err(e) = c2.validate() {
            return fail(AcStatus::InvalidArgument, e.to_string());
        }
        let geom = match LatticeGeom::new(c.q_side, c.n) {
            Ok(g) => g,
            Err(e) => return fail(AcStatus::InvalidArgument, e.to_string()),
        };
        let sim = AcSimulation { state: SystemState::new(geom, seed), dec: Decoder::new(geom, c.decoder()), noise: c.noise(p), t: 0 };
        *out = Box::into_raw(Box::new(sim));
        AcStatus::Ok
    })
}

/// Advances `steps` time steps and reports the number of error events drawn.
#[no_mangle]
pub unsafe extern "C" fn ac_sim_step(sim: *mut AcSimulation, steps: u64, events: *mut u64) -> AcStatus {
    guard(|| {
        nonnull!(sim);
        let s = &mut *sim;
        let mut count = 0u64;
        for _ in 0..steps {
            let rec = full_step(&mut s.state, &mut s.dec, &s.noise, s.t);
            count += (rec.charge_events.len() + rec.measurement_events.len()) as u64;
            s.t += 1;
        }
        if !events.is_null() {
            *events = count;
        }
        AcStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn ac_sim_time(sim: *const AcSimulation, t: *mut u64) -> AcStatus {
    nonnull!(sim, t);
    *t = (*sim).t;
    AcStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn ac_sim_anyon_count(sim: *const AcSimulation, count: *mut usize) -> AcStatus {
    nonnull!(sim, count);
    *count = (*sim).state.anyon_count();
    AcStatus::Ok
}

/// Decodes a copy of the current state; the simulation itself is unchanged.
#[no_mangle]
pub unsafe extern "C" fn ac_sim_verify(sim: *const AcSimulation, out: *mut AcLogicalStatus) -> AcStatus {
    guard(|| {
        nonnull!(sim, out);
        let s = snapshot_decode(&(*sim).state);
        *out = AcLogicalStatus {
            success: s.success,
            eps_x: s.eps_x,
            eps_y: s.eps_y,
            sigma_x: s.sigma_x,
            sigma_y: s.sigma_y,
            residual: s.residual,
        };
        AcStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn ac_sim_free(sim: *mut AcSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AcParams {
    pub q: u64,
    pub d: u64,
    pub a: u64,
    pub b: u64,
    pub u: u64,
    pub fc_b: u64,
    pub fn_b: u64,
    pub b0: u64,
    pub p_c: f64,
    pub b_at_least_b0: bool,
    pub b_above_twice_fn: bool,
    pub u_at_least_4b2: bool,
    pub q_odd: bool,
}

/// Closed-form constants for colony side `q` and fusion-graph diameter `d`. `b = 0` picks the default b.
#[no_mangle]
pub unsafe extern "C" fn ac_params(q: u64, d: u64, a: u64, b: u64, out: *mut AcParams) -> AcStatus {
    guard(|| {
        nonnull!(out);
        match proof_parameters(q, d, a, (b != 0).then_some(b)) {
            Ok(pp) => {
                *out = AcParams {
                    q: pp.q,
                    d: pp.d,
                    a: pp.a_sep,
                    b: pp.b,
                    u: pp.u,
                    fc_b: pp.fc_b,
                    fn_b: pp.fn_b,
                    b0: pp.b0,
                    p_c: pp.p_c,
                    b_at_least_b0: pp.b_at_least_b0,
                    b_above_twice_fn: pp.b_above_twice_fn,
                    u_at_least_4b2: pp.u_at_least_4b2,
                    q_odd: pp.q_odd,
                };
                AcStatus::Ok
            }
            Err(e) => fail(AcStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// One error event. `kind` is 0 for a charge error, 1 for a measurement error.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AcEvent {
    pub kind: u32,
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

/// Assigns each event a hierarchy level; `levels[i]` is -1 for events left unclassified.
#[no_mangle]
pub unsafe extern "C" fn ac_classify(
    events: *const AcEvent,
    len: usize,
    a: u64,
    b: u64,
    q: u64,
    u: u64,
    n_max: usize,
    levels: *mut i32,
) -> AcStatus {
    guard(|| {
        if len > 0 {
            nonnull!(events, levels);
        }
        let raw = if len == 0 { &[][..] } else { std::slice::from_raw_parts(events, len) };
        let mut hist = Vec::with_capacity(len);
        for (i, e) in raw.iter().enumerate() {
            let kind = match e.kind {
                0 => EventKind::Charge,
                1 => EventKind::Measurement,
                k => return fail(AcStatus::InvalidArgument, format!("event {i}: kind {k}")),
            };
            hist.push(ErrorEvent { kind, x: e.x, y: e.y, t: e.t });
        }
        match classifier::classify(&hist, ClassifierParams::new(a, b, q, u, n_max), false) {
            Ok(asg) => {
                for (i, l) in asg.level_of.iter().enumerate() {
                    *levels.add(i) = l.map_or(-1, |v| v as i32);
                }
                AcStatus::Ok
            }
            Err(e) => fail(AcStatus::InvalidArgument, e.to_string()),
        }
    })
}
