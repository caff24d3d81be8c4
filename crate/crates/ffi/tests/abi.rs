use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use shannop_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(shannop_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn field(sizes: &[usize], components: usize, f: impl Fn(usize) -> f64) -> *mut ShannopField {
    let n: usize = sizes.iter().product::<usize>() * components;
    let values: Vec<f64> = (0..n).map(f).collect();
    let mut out = ptr::null_mut();
    let s = unsafe { shannop_field_new(sizes.len(), sizes.as_ptr(), components, values.as_ptr(), &mut out) };
    assert_eq!(s, ShannopStatus::Ok, "{}", last_error());
    out
}

fn noise(i: usize) -> f64 {
    ((i as f64 * 12.9898).sin() * 43758.5453).fract()
}

#[test]
fn field_round_trip_through_file() {
    let f = field(&[16, 8], 2, noise);
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("f.swf").to_str().unwrap()).unwrap();
    unsafe {
        assert_eq!(shannop_field_write(f, path.as_ptr()), ShannopStatus::Ok);
        let mut g = ptr::null_mut();
        assert_eq!(shannop_field_read(path.as_ptr(), &mut g), ShannopStatus::Ok);
        assert_eq!(shannop_field_len(g), 256);
        assert_eq!(shannop_field_components(g), 2);
        let (a, b) = (
            std::slice::from_raw_parts(shannop_field_values(f), 256),
            std::slice::from_raw_parts(shannop_field_values(g), 256),
        );
        assert_eq!(a, b);
        shannop_field_free(f);
        shannop_field_free(g);
    }
}

#[test]
fn errors_are_reported() {
    let sizes = [12usize, 8];
    let values = vec![0.0; 96];
    let mut out = ptr::null_mut();
    let s = unsafe { shannop_field_new(2, sizes.as_ptr(), 1, values.as_ptr(), &mut out) };
    assert_eq!(s, ShannopStatus::InvalidArgument);
    assert!(out.is_null());
    assert!(last_error().contains("power of two"), "{}", last_error());

    let s = unsafe { shannop_field_new(2, ptr::null(), 1, values.as_ptr(), &mut out) };
    assert_eq!(s, ShannopStatus::NullPointer);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.swf");
    std::fs::write(&bad, b"NOPE").unwrap();
    let path = CString::new(bad.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { shannop_field_read(path.as_ptr(), &mut out) }, ShannopStatus::Format);
    let missing = CString::new(dir.path().join("none.swf").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { shannop_field_read(missing.as_ptr(), &mut out) }, ShannopStatus::Io);

    unsafe {
        assert_eq!(shannop_field_len(ptr::null()), 0);
        assert!(shannop_field_values(ptr::null()).is_null());
        shannop_field_free(ptr::null_mut());
        shannop_report_free(ptr::null_mut());
        shannop_string_free(ptr::null_mut());
    }
}

#[test]
fn solve_ilap_converges_at_the_bound() {
    let v = field(&[64, 64], 1, noise);
    let (mut u, mut rep) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        let s = shannop_solve_ilap(v, 1e6, ShannopScheme::Tensorial, 0, 1e-10, 200, &mut u, &mut rep);
        assert_eq!(s, ShannopStatus::Ok, "{}", last_error());
        assert!(shannop_report_converged(rep));
        assert!(shannop_report_fitted_rate(rep) <= 0.62);
        let n = shannop_report_residuals(rep, ptr::null_mut(), 0);
        assert_eq!(n, shannop_report_iterations(rep) + 1);
        let mut hist = vec![0.0; n];
        shannop_report_residuals(rep, hist.as_mut_ptr(), n);
        assert_eq!(hist[0], 1.0);
        assert!(hist[n - 1] <= 1e-10);

        let json = shannop_report_to_json(rep);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        shannop_string_free(json);
        let parsed = shannop::solver::SolveReport::from_json(&text).unwrap();
        assert_eq!(parsed.iterations, shannop_report_iterations(rep));

        shannop_report_free(rep);
        shannop_field_free(u);
    }

    // Out of budget: the report comes back, the solution does not.
    unsafe {
        let s = shannop_solve_ilap(v, 1e6, ShannopScheme::Mra, 1, 1e-10, 2, &mut u, &mut rep);
        assert_eq!(s, ShannopStatus::Ok);
        assert!(!shannop_report_converged(rep));
        shannop_report_free(rep);
        shannop_field_free(u);
        shannop_field_free(v);
    }
}

#[test]
fn helmholtz_splits_the_field() {
    let u = field(&[32, 32], 2, noise);
    let (mut d, mut c, mut rep) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    unsafe {
        let s = shannop_helmholtz(u, 1, 1e-10, 200, &mut d, &mut c, &mut rep);
        assert_eq!(s, ShannopStatus::Ok, "{}", last_error());
        assert!(shannop_report_fitted_rate(rep) <= 25.0 / 144.0 + 0.02);
        let n = shannop_field_len(u);
        let (a, b, x) = (
            std::slice::from_raw_parts(shannop_field_values(d), n),
            std::slice::from_raw_parts(shannop_field_values(c), n),
            std::slice::from_raw_parts(shannop_field_values(u), n),
        );
        let err: f64 = (0..n).map(|i| (a[i] + b[i] - x[i]).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err <= 1e-9 * norm);
        shannop_report_free(rep);
        shannop_field_free(d);
        shannop_field_free(c);

        let scalar = field(&[32, 32], 1, noise);
        let s = shannop_helmholtz(scalar, 0, 1e-10, 200, &mut d, &mut c, &mut rep);
        assert_eq!(s, ShannopStatus::InvalidArgument);
        assert!(d.is_null() && c.is_null() && rep.is_null());
        shannop_field_free(scalar);
        shannop_field_free(u);
    }
}

#[test]
fn rate_formulas() {
    assert_eq!(shannop_rate_kantorovich(1.0, 2.0), 0.5625);
    assert!((shannop_rate_implicit_laplacian(1e12, 1.0, 2.0) - 0.6).abs() < 1e-9);
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/shannop.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["shannop_field_new", "shannop_solve_ilap", "shannop_helmholtz", "SHANNOP_STATUS_DIVERGED"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"shannop.h\"\nint f(ShannopField *x) { return shannop_field_len(x) == 0 ? SHANNOP_STATUS_OK : SHANNOP_STATUS_PANIC; }\n",
    )
    .unwrap();
    let Ok(out) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler; header only checked textually");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
