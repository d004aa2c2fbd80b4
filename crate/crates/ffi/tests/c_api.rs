use std::ptr;

use collocate_ffi::*;

fn index_set(kind: ClcIndexSetKind, dimension: usize, degree: u32) -> *mut ClcIndexSet {
    let mut set = ptr::null_mut();
    assert_eq!(unsafe { clc_index_set_new(kind as u32, dimension, degree, &mut set) }, ClcStatus::Ok);
    set
}

fn mesh(sampler: ClcSampler, count: usize, dimension: usize, seed: u64) -> *mut ClcMesh {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { clc_mesh_sample(sampler as u32, count, dimension, seed, 0, &mut m) }, ClcStatus::Ok);
    m
}

fn points(m: *const ClcMesh) -> Vec<f64> {
    let len = unsafe { clc_mesh_count(m) * clc_mesh_dimension(m) };
    let mut out = vec![0.0; len];
    assert_eq!(unsafe { clc_mesh_points(m, out.as_mut_ptr(), len) }, ClcStatus::Ok);
    out
}

fn eval(s: *const ClcSurrogate, pts: &[f64], dimension: usize) -> Vec<f64> {
    let count = pts.len() / dimension;
    let mut out = vec![0.0; count];
    assert_eq!(unsafe { clc_surrogate_eval(s, pts.as_ptr(), count, out.as_mut_ptr()) }, ClcStatus::Ok);
    out
}

fn target(z: &[f64]) -> f64 {
    1.0 + 0.5 * z[0] - z[0] * z[1] + 0.25 * z[1] * z[1]
}

#[test]
fn weil_counts_through_the_c_api() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { clc_mesh_weil(359, 2, false, &mut m) }, ClcStatus::Ok);
    assert_eq!(unsafe { clc_mesh_count(m) }, 179);
    unsafe { clc_mesh_free(m) };
    let status = unsafe { clc_mesh_weil(360, 2, false, &mut m) };
    assert_eq!(status, ClcStatus::NotPrime);
}

#[test]
fn least_squares_reproduces_a_quadratic() {
    let set = index_set(ClcIndexSetKind::TotalDegree, 2, 2);
    let m = mesh(ClcSampler::McChebyshev, 30, 2, 4);
    let pts = points(m);
    let values: Vec<f64> = pts.chunks(2).map(target).collect();
    for weighted in [false, true] {
        let mut s = ptr::null_mut();
        let status = unsafe {
            if weighted {
                clc_weighted_least_squares(
                    m,
                    set,
                    ClcFamily::Legendre as u32,
                    ClcDensity::Uniform as u32,
                    values.as_ptr(),
                    values.len(),
                    &mut s,
                )
            } else {
                clc_least_squares(m, set, ClcFamily::Chebyshev as u32, values.as_ptr(), values.len(), &mut s)
            }
        };
        assert_eq!(status, ClcStatus::Ok);
        assert_eq!(unsafe { clc_surrogate_len(s) }, 6);
        let probe = [0.3, -0.7, -0.9, 0.1];
        for (got, z) in eval(s, &probe, 2).iter().zip(probe.chunks(2)) {
            assert!((got - target(z)).abs() < 1e-12);
        }
        unsafe { clc_surrogate_free(s) };
    }
    unsafe {
        clc_mesh_free(m);
        clc_index_set_free(set);
    }
}

#[test]
fn sparse_recovery_finds_a_planted_vector() {
    let set = index_set(ClcIndexSetKind::TotalDegree, 2, 10);
    let n = unsafe { clc_index_set_len(set) };
    let m = mesh(ClcSampler::McChebyshev, 40, 2, 11);
    let pts = points(m);
    // 2 T_3(x) - T_1(x) T_4(y) in the orthonormal Chebyshev basis.
    let t = |k: i32, x: f64| if k == 0 { 1.0 } else { 2f64.sqrt() * (f64::from(k) * x.acos()).cos() };
    let values: Vec<f64> = pts.chunks(2).map(|z| 2.0 * t(3, z[0]) - t(1, z[0]) * t(4, z[1])).collect();
    let mut s = ptr::null_mut();
    let mut converged = false;
    let status = unsafe {
        clc_sparse_recover(
            m,
            set,
            ClcFamily::Chebyshev as u32,
            values.as_ptr(),
            values.len(),
            0.0,
            false,
            &mut converged,
            &mut s,
        )
    };
    assert_eq!(status, ClcStatus::Ok);
    assert!(converged);
    let mut c = vec![0.0; n];
    assert_eq!(unsafe { clc_surrogate_coefficients(s, c.as_mut_ptr(), n) }, ClcStatus::Ok);
    assert_eq!(c.iter().filter(|x| x.abs() > 1e-8).count(), 2);
    let probe = [0.2, 0.4];
    assert!((eval(s, &probe, 2)[0] - (2.0 * t(3, 0.2) - t(1, 0.2) * t(4, 0.4))).abs() < 1e-8);
    unsafe {
        clc_surrogate_free(s);
        clc_mesh_free(m);
        clc_index_set_free(set);
    }
}

#[test]
fn loi_interpolates_and_reports_lebesgue_constants() {
    let m = mesh(ClcSampler::Weil, 15, 2, 0);
    let pts = points(m);
    let values: Vec<f64> = pts.chunks(2).map(|z| (z[0] + 2.0 * z[1]).sin()).collect();
    let mut loi = ptr::null_mut();
    assert_eq!(unsafe { clc_loi_factorize(m, ClcDensity::Chebyshev as u32, 0, &mut loi) }, ClcStatus::Ok);
    assert!(unsafe { clc_loi_degree(loi) } >= 4);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { clc_loi_interpolate(loi, values.as_ptr(), values.len(), &mut s) }, ClcStatus::Ok);
    for (got, want) in eval(s, &pts, 2).iter().zip(&values) {
        assert!((got - want).abs() < 1e-10);
    }
    let grid = mesh(ClcSampler::McUniform, 2000, 2, 1);
    let mut lambda = 0.0;
    assert_eq!(unsafe { clc_loi_lebesgue(loi, grid, false, &mut lambda) }, ClcStatus::Ok);
    assert!(lambda >= 1.0 && lambda.is_finite());
    // The mesh itself is a candidate set on which every cardinal sum is 1.
    assert_eq!(unsafe { clc_loi_lebesgue(loi, m, false, &mut lambda) }, ClcStatus::Ok);
    assert!((lambda - 1.0).abs() < 1e-9);
    unsafe {
        clc_surrogate_free(s);
        clc_loi_free(loi);
        clc_mesh_free(grid);
        clc_mesh_free(m);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let dup = [0.1, 0.2, 0.1, 0.2];
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { clc_mesh_from_points(2, dup.as_ptr(), 2, &mut m) }, ClcStatus::Ok);
    let mut loi = ptr::null_mut();
    let status = unsafe { clc_loi_factorize(m, ClcDensity::Uniform as u32, 0, &mut loi) };
    assert_eq!(status, ClcStatus::DuplicatePoints);
    assert!(loi.is_null());

    let set = index_set(ClcIndexSetKind::TotalDegree, 2, 3);
    let values = [1.0, 2.0];
    let mut s = ptr::null_mut();
    let status = unsafe { clc_least_squares(m, set, ClcFamily::Legendre as u32, values.as_ptr(), 2, &mut s) };
    assert_eq!(status, ClcStatus::InvalidArgument, "underdetermined systems are refused");
    let status = unsafe { clc_least_squares(m, ptr::null(), 1, values.as_ptr(), 2, &mut s) };
    assert_eq!(status, ClcStatus::NullPointer);

    let outside = [2.0, 0.0];
    let mut far = ptr::null_mut();
    assert_eq!(unsafe { clc_mesh_from_points(2, outside.as_ptr(), 1, &mut far) }, ClcStatus::Ok);
    let status = unsafe { clc_least_squares(far, set, ClcFamily::Legendre as u32, values.as_ptr(), 1, &mut s) };
    assert_eq!(status, ClcStatus::OutsideSupport);

    let needed = unsafe { clc_last_error(ptr::null_mut(), 0) };
    assert!(needed > 1);
    unsafe {
        clc_mesh_free(far);
        clc_mesh_free(m);
        clc_index_set_free(set);
        // Null handles are ignored by the destructors.
        clc_mesh_free(ptr::null_mut());
    }
}
