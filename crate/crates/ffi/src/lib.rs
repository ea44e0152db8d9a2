//! C ABI over the `coalgp` library.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns a
//! [`CoalgpStatus`]; on failure, [`coalgp_last_error_message`] describes the
//! most recent error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coalgp::genealogy::{parse_newick_with_dates, CoalescentData, DateSource};
use coalgp::gp::KernelKind;
use coalgp::likelihood::{log_coalescent_likelihood, LambdaPrior};
use coalgp::mcmc::{run_chain_indexed, ChainOutput, GammaPrior, McmcConfig};
use coalgp::rng::{stream, Component};
use coalgp::simulate::{simulate_iso_thinning, Deterministic, DEFAULT_BLOCK_WIDTH};
use coalgp::summary::{summarize, PosteriorSummary};
use coalgp::trajectory::Builtin;
use coalgp::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoalgpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed Newick, JSON or trajectory text.
    Parse = 3,
    /// Arguments violate a precondition.
    Validation = 4,
    /// A value outside the domain of a function.
    Domain = 5,
    /// A numerical evaluation failed.
    Evaluation = 6,
    /// Simulation or sampling failed while running.
    Runtime = 7,
    /// A file could not be read or written.
    Io = 8,
    /// An index was out of range.
    OutOfRange = 9,
    /// The library panicked; this is a bug.
    Panic = 10,
}

/// Gaussian process family.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoalgpKernelKind {
    BrownianMotion = 0,
    OrnsteinUhlenbeck = 1,
}

/// Kernel choice. `parameter` is the initial-level variance for Brownian
/// motion and the mean-reversion rate for Ornstein-Uhlenbeck.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CoalgpKernel {
    pub kind: CoalgpKernelKind,
    pub parameter: f64,
}

/// Sampler settings; fill with [`coalgp_config_default`] and adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CoalgpMcmcConfig {
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
    /// Gamma prior on the GP precision.
    pub alpha: f64,
    pub beta: f64,
    /// Prior on the thinning rate.
    pub lambda_hat: f64,
    pub epsilon: f64,
    /// Proposal half-width for the thinning rate; non-positive selects the default.
    pub lambda_half_width: f64,
    pub rj_moves: usize,
    pub prior_only: bool,
}

/// Coalescent data: coalescent and sampling times.
pub struct CoalgpData(CoalescentData);

/// Output of one MCMC run.
pub struct CoalgpChain(ChainOutput);

/// Posterior summary of `N_e` on a grid.
pub struct CoalgpSummary(PosteriorSummary);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let msg = CString::new(message.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: CoalgpStatus, message: impl Into<String>) -> CoalgpStatus {
    set_error(message);
    status
}

fn from_error(e: &Error) -> CoalgpStatus {
    let status = match e {
        Error::Parse { .. } => CoalgpStatus::Parse,
        Error::Validation(_) => CoalgpStatus::Validation,
        Error::Domain(_) => CoalgpStatus::Domain,
        Error::Evaluation(_) => CoalgpStatus::Evaluation,
        Error::Runtime(_) => CoalgpStatus::Runtime,
    };
    fail(status, e.to_string())
}

/// Run `body`, translating library errors and panics into status codes.
fn guard<F>(body: F) -> CoalgpStatus
where
    F: FnOnce() -> Result<(), CoalgpStatus>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CoalgpStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(CoalgpStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, CoalgpStatus>;
}

impl<T> OrStatus<T> for coalgp::Result<T> {
    fn or_status(self) -> Result<T, CoalgpStatus> {
        self.map_err(|e| from_error(&e))
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, CoalgpStatus> {
    if p.is_null() {
        return Err(fail(CoalgpStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CoalgpStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, CoalgpStatus> {
    p.as_ref().ok_or_else(|| fail(CoalgpStatus::NullPointer, format!("{name} is null")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], CoalgpStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(CoalgpStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<T>(out: *mut *mut T, value: T) -> Result<(), CoalgpStatus> {
    if out.is_null() {
        return Err(fail(CoalgpStatus::NullPointer, "output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn coalgp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn coalgp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Default sampler settings.
#[no_mangle]
pub extern "C" fn coalgp_config_default() -> CoalgpMcmcConfig {
    let d = McmcConfig::default();
    CoalgpMcmcConfig {
        iterations: d.iterations,
        burnin: d.burnin,
        thin: d.thin,
        seed: d.seed,
        alpha: d.theta_prior.alpha,
        beta: d.theta_prior.beta,
        lambda_hat: d.lambda_prior.lambda_hat,
        epsilon: d.lambda_prior.epsilon,
        lambda_half_width: 0.0,
        rj_moves: d.rj_moves,
        prior_only: d.prior_only,
    }
}

/// Brownian-motion kernel with the default initial-level variance.
#[no_mangle]
pub extern "C" fn coalgp_kernel_default() -> CoalgpKernel {
    CoalgpKernel {
        kind: CoalgpKernelKind::BrownianMotion,
        parameter: KernelKind::DEFAULT_INITIAL_VARIANCE,
    }
}

/// Parse a Newick genealogy. `date_delim` is the separator of a
/// `label<delim>date` tip suffix, or 0 to use branch lengths only.
///
/// # Safety
/// `newick` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn coalgp_data_from_newick(newick: *const c_char, date_delim: c_char, out: *mut *mut CoalgpData) -> CoalgpStatus {
    guard(|| {
        let text = str_arg(newick, "newick")?;
        let source = match date_delim {
            0 => DateSource::None,
            c => DateSource::LabelSuffix(c as u8 as char),
        };
        let tree = parse_newick_with_dates(text, source).or_status()?;
        out_arg(out, CoalgpData(CoalescentData::from_genealogy(&tree).or_status()?))
    })
}

/// Build data from arrays: `n_coal` coalescent times starting at 0, and
/// `n_samp` sampling times with their sample counts.
///
/// # Safety
/// Arrays must hold at least the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn coalgp_data_new(
    coal_times: *const f64,
    n_coal: usize,
    samp_times: *const f64,
    samp_counts: *const usize,
    n_samp: usize,
    out: *mut *mut CoalgpData,
) -> CoalgpStatus {
    guard(|| {
        let coal = slice_arg(coal_times, n_coal, "coal_times")?.to_vec();
        let times = slice_arg(samp_times, n_samp, "samp_times")?.to_vec();
        let counts = slice_arg(samp_counts, n_samp, "samp_counts")?.to_vec();
        out_arg(out, CoalgpData(CoalescentData::new(coal, times, counts).or_status()?))
    })
}

/// Simulate an isochronous genealogy of `n` tips under a named trajectory
/// (`constant:c`, `expgrowth:n0,rate`, `boombust`) by thinning. A positive
/// `lambda` is used as a constant bound; otherwise a piecewise bound is used.
///
/// # Safety
/// `trajectory` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn coalgp_simulate_iso(
    n: usize,
    trajectory: *const c_char,
    lambda: f64,
    seed: u64,
    replicate: u64,
    out: *mut *mut CoalgpData,
) -> CoalgpStatus {
    guard(|| {
        let traj: Builtin = str_arg(trajectory, "trajectory")?.parse().or_status()?;
        let spec = if lambda > 0.0 {
            Deterministic::new(&traj, lambda)
        } else {
            Deterministic::adaptive(&traj, DEFAULT_BLOCK_WIDTH)
        }
        .or_status()?;
        let mut rng = stream(seed, Component::Simulation, replicate);
        let record = simulate_iso_thinning(n, &spec, &mut rng).or_status()?;
        out_arg(out, CoalgpData(record.data().or_status()?))
    })
}

/// Number of sampled tips.
///
/// # Safety
/// `data` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn coalgp_data_num_tips(data: *const CoalgpData) -> usize {
    data.as_ref().map_or(0, |d| d.0.num_tips())
}

/// Root time, or NaN for a null handle.
///
/// # Safety
/// `data` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn coalgp_data_tmrca(data: *const CoalgpData) -> f64 {
    data.as_ref().map_or(f64::NAN, |d| d.0.tmrca())
}

/// Number of coalescent times, including time 0.
///
/// # Safety
/// `data` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn coalgp_data_num_coal_times(data: *const CoalgpData) -> usize {
    data.as_ref().map_or(0, |d| d.0.coal_times().len())
}

/// Copy the coalescent times into `buf`, which holds `len` values.
///
/// # Safety
/// `buf` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn coalgp_data_coal_times(data: *const CoalgpData, buf: *mut f64, len: usize) -> CoalgpStatus {
    guard(|| {
        let d = ref_arg(data, "data")?;
        copy_out(d.0.coal_times(), buf, len)
    })
}

/// Log density of the coalescent times under a named trajectory.
///
/// # Safety
/// Pointers must be valid; `trajectory` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn coalgp_log_likelihood(data: *const CoalgpData, trajectory: *const c_char, out: *mut f64) -> CoalgpStatus {
    guard(|| {
        let d = ref_arg(data, "data")?;
        let traj: Builtin = str_arg(trajectory, "trajectory")?.parse().or_status()?;
        let value = log_coalescent_likelihood(&d.0, &traj).or_status()?;
        write_out(out, value)
    })
}

/// # Safety
/// `data` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn coalgp_data_free(data: *mut CoalgpData) {
    free(data);
}

fn to_config(c: &CoalgpMcmcConfig) -> Result<McmcConfig, CoalgpStatus> {
    let cfg = McmcConfig {
        iterations: c.iterations,
        burnin: c.burnin,
        thin: c.thin,
        seed: c.seed,
        theta_prior: GammaPrior::new(c.alpha, c.beta).or_status()?,
        lambda_prior: LambdaPrior::new(c.lambda_hat, c.epsilon).or_status()?,
        lambda_half_width: (c.lambda_half_width > 0.0).then_some(c.lambda_half_width),
        rj_moves: c.rj_moves,
        location_moves: None,
        prior_only: c.prior_only,
    };
    cfg.validate().or_status()?;
    Ok(cfg)
}

fn to_kernel(k: CoalgpKernel) -> Result<KernelKind, CoalgpStatus> {
    let kind = match k.kind {
        CoalgpKernelKind::BrownianMotion => KernelKind::BrownianMotion {
            initial_variance: k.parameter,
        },
        CoalgpKernelKind::OrnsteinUhlenbeck => KernelKind::OrnsteinUhlenbeck { rate: k.parameter },
    };
    kind.validate().or_status()?;
    Ok(kind)
}

/// Run chain number `chain` of the sampler on `data`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coalgp_run_chain(
    data: *const CoalgpData,
    config: *const CoalgpMcmcConfig,
    kernel: CoalgpKernel,
    chain: u64,
    out: *mut *mut CoalgpChain,
) -> CoalgpStatus {
    guard(|| {
        let d = ref_arg(data, "data")?;
        let cfg = to_config(ref_arg(config, "config")?)?;
        let kind = to_kernel(kernel)?;
        let output = run_chain_indexed(&d.0, &cfg, kind, chain).or_status()?;
        out_arg(out, CoalgpChain(output))
    })
}

/// Read a chain written by [`coalgp_chain_write`] or the command-line tool.
///
/// # Safety
/// `path` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn coalgp_chain_read(path: *const c_char, out: *mut *mut CoalgpChain) -> CoalgpStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let file = File::open(path).map_err(|e| fail(CoalgpStatus::Io, format!("{path}: {e}")))?;
        let chain = ChainOutput::read_jsonl(BufReader::new(file)).or_status()?;
        out_arg(out, CoalgpChain(chain))
    })
}

/// Write a chain as JSON lines.
///
/// # Safety
/// Pointers must be valid; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn coalgp_chain_write(chain: *const CoalgpChain, path: *const c_char) -> CoalgpStatus {
    guard(|| {
        let c = ref_arg(chain, "chain")?;
        let path = str_arg(path, "path")?;
        let file = File::create(path).map_err(|e| fail(CoalgpStatus::Io, format!("{path}: {e}")))?;
        c.0.write_jsonl(BufWriter::new(file)).or_status()
    })
}

/// Number of retained draws.
///
/// # Safety
/// `chain` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn coalgp_chain_num_draws(chain: *const CoalgpChain) -> usize {
    chain.as_ref().map_or(0, |c| c.0.draws.len())
}

/// Scalar parameters of draw `index`. Any output pointer may be null.
///
/// # Safety
/// Non-null pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coalgp_chain_draw(
    chain: *const CoalgpChain,
    index: usize,
    theta: *mut f64,
    lambda: *mut f64,
    latent_count: *mut usize,
) -> CoalgpStatus {
    guard(|| {
        let c = ref_arg(chain, "chain")?;
        let d = c.0.draws.get(index).ok_or_else(|| {
            fail(CoalgpStatus::OutOfRange, format!("draw {index} out of range ({} draws)", c.0.draws.len()))
        })?;
        for (p, v) in [(theta, d.theta), (lambda, d.lambda)] {
            if !p.is_null() {
                *p = v;
            }
        }
        if !latent_count.is_null() {
            *latent_count = d.latent_count;
        }
        Ok(())
    })
}

/// # Safety
/// `chain` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn coalgp_chain_free(chain: *mut CoalgpChain) {
    free(chain);
}

/// Summarize `N_e` on `grid` (`len` ascending times).
///
/// # Safety
/// Pointers must be valid; `grid` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn coalgp_summarize(
    chain: *const CoalgpChain,
    grid: *const f64,
    len: usize,
    seed: u64,
    out: *mut *mut CoalgpSummary,
) -> CoalgpStatus {
    guard(|| {
        let c = ref_arg(chain, "chain")?;
        let grid = slice_arg(grid, len, "grid")?;
        out_arg(out, CoalgpSummary(summarize(&c.0, grid, seed).or_status()?))
    })
}

/// Number of grid points.
///
/// # Safety
/// `summary` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn coalgp_summary_len(summary: *const CoalgpSummary) -> usize {
    summary.as_ref().map_or(0, |s| s.0.grid.len())
}

/// Copy the median and 95% band into caller buffers of `len` values each.
/// Any buffer may be null to skip it.
///
/// # Safety
/// Non-null buffers must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn coalgp_summary_values(
    summary: *const CoalgpSummary,
    median: *mut f64,
    lo95: *mut f64,
    hi95: *mut f64,
    len: usize,
) -> CoalgpStatus {
    guard(|| {
        let s = ref_arg(summary, "summary")?;
        for (buf, values) in [(median, &s.0.median), (lo95, &s.0.lo95), (hi95, &s.0.hi95)] {
            if !buf.is_null() {
                copy_out(values, buf, len)?;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `summary` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn coalgp_summary_free(summary: *mut CoalgpSummary) {
    free(summary);
}

unsafe fn copy_out(values: &[f64], buf: *mut f64, len: usize) -> Result<(), CoalgpStatus> {
    if buf.is_null() {
        return Err(fail(CoalgpStatus::NullPointer, "buffer is null"));
    }
    if len < values.len() {
        return Err(fail(
            CoalgpStatus::OutOfRange,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

unsafe fn write_out(out: *mut f64, value: f64) -> Result<(), CoalgpStatus> {
    if out.is_null() {
        return Err(fail(CoalgpStatus::NullPointer, "output pointer is null"));
    }
    *out = value;
    Ok(())
}
