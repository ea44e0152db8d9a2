use std::ffi::{CStr, CString};
use std::ptr;

use coalgp_ffi::*;

fn last_error() -> String {
    let p = coalgp_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn simulated(n: usize, seed: u64) -> *mut CoalgpData {
    let traj = CString::new("constant:1").unwrap();
    let mut data = ptr::null_mut();
    let status = unsafe { coalgp_simulate_iso(n, traj.as_ptr(), 1.0, seed, 0, &mut data) };
    assert_eq!(status, CoalgpStatus::Ok);
    data
}

#[test]
fn newick_round_trip_through_handles() {
    let tree = CString::new("((A:1.0,B:1.0):0.5,C:1.5);").unwrap();
    let mut data = ptr::null_mut();
    assert_eq!(unsafe { coalgp_data_from_newick(tree.as_ptr(), 0, &mut data) }, CoalgpStatus::Ok);
    assert_eq!(unsafe { coalgp_data_num_tips(data) }, 3);
    assert_eq!(unsafe { coalgp_data_tmrca(data) }, 1.5);
    let n = unsafe { coalgp_data_num_coal_times(data) };
    let mut buf = vec![0.0; n];
    assert_eq!(unsafe { coalgp_data_coal_times(data, buf.as_mut_ptr(), n) }, CoalgpStatus::Ok);
    assert_eq!(buf, vec![0.0, 1.0, 1.5]);
    let mut short = [0.0; 2];
    assert_eq!(unsafe { coalgp_data_coal_times(data, short.as_mut_ptr(), 2) }, CoalgpStatus::OutOfRange);
    unsafe { coalgp_data_free(data) };
}

#[test]
fn dated_tips_use_the_suffix() {
    let tree = CString::new("((A|2000:1.0,B|2001:2.0):0.5,C|2001.5:3.0);").unwrap();
    let mut data = ptr::null_mut();
    assert_eq!(unsafe { coalgp_data_from_newick(tree.as_ptr(), b'|' as _, &mut data) }, CoalgpStatus::Ok);
    assert_eq!(unsafe { coalgp_data_tmrca(data) }, 3.0);
    unsafe { coalgp_data_free(data) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut data = ptr::null_mut();
    let bad = CString::new("((A:1,B:1);").unwrap();
    assert_eq!(unsafe { coalgp_data_from_newick(bad.as_ptr(), 0, &mut data) }, CoalgpStatus::Parse);
    assert!(data.is_null());
    assert!(last_error().contains("parse error"));

    assert_eq!(unsafe { coalgp_data_from_newick(ptr::null(), 0, &mut data) }, CoalgpStatus::NullPointer);

    let coal = [0.0, 2.0, 1.0];
    let st = unsafe { coalgp_data_new(coal.as_ptr(), 3, [0.0].as_ptr(), [3usize].as_ptr(), 1, &mut data) };
    assert_eq!(st, CoalgpStatus::Validation);

    let traj = CString::new("nonsense").unwrap();
    let st = unsafe { coalgp_simulate_iso(5, traj.as_ptr(), 1.0, 1, 0, &mut data) };
    assert_eq!(st, CoalgpStatus::Validation);

    let traj = CString::new("expgrowth:25,5").unwrap();
    let st = unsafe { coalgp_simulate_iso(10, traj.as_ptr(), 1.0, 1, 0, &mut data) };
    assert_eq!(st, CoalgpStatus::Runtime);
    assert!(last_error().contains("thinning bound"));
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        coalgp_data_free(ptr::null_mut());
        coalgp_chain_free(ptr::null_mut());
        coalgp_summary_free(ptr::null_mut());
        assert_eq!(coalgp_data_num_tips(ptr::null()), 0);
        assert!(coalgp_data_tmrca(ptr::null()).is_nan());
        assert_eq!(coalgp_chain_num_draws(ptr::null()), 0);
    }
}

#[test]
fn likelihood_matches_the_library() {
    let data = simulated(15, 3);
    let traj = CString::new("constant:2").unwrap();
    let mut value = 0.0;
    assert_eq!(unsafe { coalgp_log_likelihood(data, traj.as_ptr(), &mut value) }, CoalgpStatus::Ok);

    let mut rng = coalgp::rng::stream(3, coalgp::rng::Component::Simulation, 0);
    let truth = coalgp::trajectory::Builtin::Constant { value: 1.0 };
    let spec = coalgp::simulate::Deterministic::new(&truth, 1.0).unwrap();
    let direct = coalgp::simulate::simulate_iso_thinning(15, &spec, &mut rng).unwrap().data().unwrap();
    let expected =
        coalgp::likelihood::log_coalescent_likelihood(&direct, &coalgp::trajectory::Builtin::Constant { value: 2.0 })
            .unwrap();
    assert_eq!(value.to_bits(), expected.to_bits());
    unsafe { coalgp_data_free(data) };
}

#[test]
fn chain_summary_and_file_round_trip() {
    let data = simulated(12, 5);
    let mut cfg = coalgp_config_default();
    cfg.iterations = 300;
    cfg.burnin = 100;
    cfg.thin = 20;
    cfg.lambda_hat = 2.0;
    let mut chain = ptr::null_mut();
    let st = unsafe { coalgp_run_chain(data, &cfg, coalgp_kernel_default(), 0, &mut chain) };
    assert_eq!(st, CoalgpStatus::Ok);
    assert_eq!(unsafe { coalgp_chain_num_draws(chain) }, 10);

    let (mut theta, mut lambda, mut m) = (0.0, 0.0, 0usize);
    assert_eq!(unsafe { coalgp_chain_draw(chain, 9, &mut theta, &mut lambda, &mut m) }, CoalgpStatus::Ok);
    assert!(theta > 0.0 && lambda > 0.0);
    assert_eq!(unsafe { coalgp_chain_draw(chain, 10, &mut theta, ptr::null_mut(), ptr::null_mut()) }, CoalgpStatus::OutOfRange);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("c.jsonl").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { coalgp_chain_write(chain, path.as_ptr()) }, CoalgpStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { coalgp_chain_read(path.as_ptr(), &mut back) }, CoalgpStatus::Ok);
    assert_eq!(unsafe { coalgp_chain_num_draws(back) }, 10);

    let root = unsafe { coalgp_data_tmrca(data) };
    let grid: Vec<f64> = (0..8).map(|i| root * i as f64 / 7.0).collect();
    let (mut s1, mut s2) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { coalgp_summarize(chain, grid.as_ptr(), 8, 1, &mut s1) }, CoalgpStatus::Ok);
    assert_eq!(unsafe { coalgp_summarize(back, grid.as_ptr(), 8, 1, &mut s2) }, CoalgpStatus::Ok);
    assert_eq!(unsafe { coalgp_summary_len(s1) }, 8);
    let (mut m1, mut m2, mut lo, mut hi) = ([0.0; 8], [0.0; 8], [0.0; 8], [0.0; 8]);
    unsafe {
        assert_eq!(coalgp_summary_values(s1, m1.as_mut_ptr(), lo.as_mut_ptr(), hi.as_mut_ptr(), 8), CoalgpStatus::Ok);
        assert_eq!(coalgp_summary_values(s2, m2.as_mut_ptr(), ptr::null_mut(), ptr::null_mut(), 8), CoalgpStatus::Ok);
    }
    assert_eq!(m1, m2);
    assert!((0..8).all(|i| lo[i] <= m1[i] && m1[i] <= hi[i]));

    let missing = CString::new(dir.path().join("none.jsonl").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { coalgp_chain_read(missing.as_ptr(), &mut back) }, CoalgpStatus::Io);

    unsafe {
        coalgp_summary_free(s1);
        coalgp_summary_free(s2);
        coalgp_chain_free(chain);
        coalgp_chain_free(back);
        coalgp_data_free(data);
    }
}

#[test]
fn invalid_config_is_rejected() {
    let data = simulated(5, 1);
    let mut cfg = coalgp_config_default();
    cfg.epsilon = 1.5;
    let mut chain = ptr::null_mut();
    let st = unsafe { coalgp_run_chain(data, &cfg, coalgp_kernel_default(), 0, &mut chain) };
    assert_eq!(st, CoalgpStatus::Validation);
    assert!(chain.is_null());
    let kernel = CoalgpKernel { kind: CoalgpKernelKind::OrnsteinUhlenbeck, parameter: -1.0 };
    let st = unsafe { coalgp_run_chain(data, &coalgp_config_default(), kernel, 0, &mut chain) };
    assert_eq!(st, CoalgpStatus::Domain);
    unsafe { coalgp_data_free(data) };
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(coalgp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
