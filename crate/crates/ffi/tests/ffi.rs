use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use seasonal_drift_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sd_last_error_message()) }.to_string_lossy().into_owned()
}

fn preset(case: u32) -> *mut SdDistribution {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { sd_distribution_preset(case, &mut d) }, SdStatus::Ok);
    d
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(sd_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn invalid_arguments_report_status_and_message() {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { sd_distribution_preset(9, &mut d) }, SdStatus::InvalidParameter);
    assert!(d.is_null());
    assert!(last_error().contains("preset 9"));

    assert_eq!(
        unsafe { sd_distribution_new(-1.0, 1.0, 0.0, 0.0, 0.02, 0.0, &mut d) },
        SdStatus::InvalidParameter
    );
    assert_eq!(unsafe { sd_distribution_preset(1, ptr::null_mut()) }, SdStatus::NullPointer);

    let (mut delta, mut tau) = (0.0, 0.0);
    let status = unsafe { sd_solve_delta_star(0.5, 0.3, 1.1, &mut delta, &mut tau) };
    assert_eq!(status, SdStatus::Domain);
    assert!(last_error().contains("-ln(1 - z)/z"), "{}", last_error());
}

#[test]
fn season_step_through_handles() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(sd_state_naive(2, &mut s), SdStatus::Ok);
        let (mut next, mut r_e, mut z) = (ptr::null_mut(), 0.0, 0.0);
        assert_eq!(sd_step(s, 0.3, 2.0, &mut next, &mut r_e, &mut z), SdStatus::Ok);
        assert_eq!(r_e, 2.0);
        assert!((z - 0.796_812_130_020_02).abs() < 1e-12);
        let mut shares = [0.0; 2];
        assert_eq!(sd_state_shares(next, shares.as_mut_ptr(), 2), SdStatus::Ok);
        assert_eq!(shares[0], z);
        assert_eq!(sd_state_shares(next, shares.as_mut_ptr(), 1), SdStatus::BufferTooSmall);
        assert_eq!(sd_state_r(next), 2);
        sd_state_free(next);
        sd_state_free(s);
        sd_state_free(ptr::null_mut());
    }
}

#[test]
fn custom_state_validation() {
    unsafe {
        let mut s = ptr::null_mut();
        let p = [0.2, 0.3, 0.5];
        let iota = [1.0, 0.6, 0.0];
        assert_eq!(sd_state_new(3, p.as_ptr(), iota.as_ptr(), &mut s), SdStatus::Ok);
        sd_state_free(s);
        let bad = [0.2, 0.3, 0.6];
        assert_eq!(sd_state_new(3, bad.as_ptr(), iota.as_ptr(), &mut s), SdStatus::InvalidParameter);
    }
}

#[test]
fn analytic_queries() {
    unsafe {
        let d = preset(1);
        let mut m = ptr::null_mut();
        assert_eq!(sd_r2_model_new(d, &mut m), SdStatus::Ok);
        let (mut atom, mut cdf, mut dens, mut biv) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(sd_prob_no_outbreak(m, 0.5, &mut atom), SdStatus::Ok);
        assert_eq!(sd_transition_cdf(m, 0.5, 0.0, &mut cdf), SdStatus::Ok);
        assert!((atom - cdf).abs() < 1e-12 && atom > 0.0 && atom < 1.0);
        assert_eq!(sd_transition_density(m, 0.5, 0.4, &mut dens), SdStatus::Ok);
        assert!(dens > 0.0);
        assert_eq!(sd_biv_density(m, 0.5, 0.5, 1.6, &mut biv), SdStatus::Ok);
        assert!(biv > 0.0);
        assert_eq!(sd_conditional_density_z(m, 0.5, 1.6, 0.55, &mut dens), SdStatus::Ok);
        assert!(dens > 0.0);

        let mut law = ptr::null_mut();
        assert_eq!(sd_stationary_solve(m, 8, &mut law), SdStatus::InvalidParameter);
        assert_eq!(sd_stationary_solve(m, 64, &mut law), SdStatus::Ok);
        let a = sd_stationary_atom(law);
        assert!((a - 0.25).abs() < 0.03, "{a}");
        assert!(sd_stationary_density_at(law, 0.5) > 0.0);
        sd_stationary_free(law);
        sd_r2_model_free(m);
        sd_distribution_free(d);
    }
}

#[test]
fn atom_in_drift_is_unsupported_for_exact_analysis() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(sd_distribution_new(3.0, 7.0, 0.683, 0.0, 0.02, 0.1, &mut d), SdStatus::Ok);
        let mut m = ptr::null_mut();
        assert_eq!(sd_r2_model_new(d, &mut m), SdStatus::Unsupported);
        sd_distribution_free(d);
    }
}

#[test]
fn sampling_and_chains_are_deterministic() {
    unsafe {
        let d = preset(3);
        let (mut a, mut b) = ([0.0; 16], [0.0; 16]);
        let (mut c, mut e) = ([0.0; 16], [0.0; 16]);
        assert_eq!(sd_distribution_sample(d, 5, 16, a.as_mut_ptr(), b.as_mut_ptr()), SdStatus::Ok);
        assert_eq!(sd_distribution_sample(d, 5, 16, c.as_mut_ptr(), e.as_mut_ptr()), SdStatus::Ok);
        assert_eq!((a, b), (c, e));
        assert!(a.iter().all(|&x| x > 0.0 && x < 1.0));

        let mut chain = ptr::null_mut();
        assert_eq!(sd_run_chain(d, 2, 9, 300, 50, &mut chain), SdStatus::Ok);
        assert_eq!(sd_chain_len(chain), 300);
        let (mut r, mut z) = (vec![0.0; 300], vec![0.0; 300]);
        assert_eq!(sd_chain_outcomes(chain, r.as_mut_ptr(), z.as_mut_ptr(), 300), SdStatus::Ok);
        assert!(z.contains(&0.0) && z.iter().any(|&x| x > 0.0));
        assert_eq!(sd_chain_outcomes(chain, r.as_mut_ptr(), z.as_mut_ptr(), 10), SdStatus::BufferTooSmall);
        sd_chain_free(chain);
        assert_eq!(sd_run_chain(d, 2, 9, 10, 10, &mut chain), SdStatus::InvalidParameter);
        sd_distribution_free(d);
    }
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/seasonal_drift.h")).unwrap();
    for name in [
        "SD_STATUS_OK",
        "typedef struct SdDistribution SdDistribution",
        "sd_distribution_preset",
        "sd_step",
        "sd_solve_delta_star",
        "sd_transition_density",
        "sd_stationary_solve",
        "sd_run_chain",
        "sd_last_error_message",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"seasonal_drift.h\"\n\
         int main(void) {\n\
           SdDistribution *d = NULL;\n\
           if (sd_distribution_preset(1, &d) != SD_STATUS_OK) return 1;\n\
           double density = 0.0;\n\
           sd_distribution_density(d, 0.3, 2.0, &density);\n\
           sd_distribution_free(d);\n\
           return density > 0.0 ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
