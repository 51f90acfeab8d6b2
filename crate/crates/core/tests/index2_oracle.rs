//! Saddle-point solves against a dense null-space oracle for the restricted inverse, plus
//! agreement of the saddle path with the projector path on small dense instances.

use dmor::analysis::eval_transfer;
use dmor::index2::{hidden_feedthrough, projectors_index2, reduce_index2, saddle_bases, saddle_solve_left, saddle_solve_right};
use dmor::interpolation::{reduce_dae, verify_interpolation};
use dmor::spectral::{split_transfer, weierstrass};
use dmor::{CVec, InterpolationData, TransferFunction, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{cplx, null_basis, oblique, random_index2};

fn random_points(rng: &mut ChaCha8Rng, k: usize) -> Vec<C64> {
    (0..k).map(|_| C64::new(rng.random_range(0.2..5.0), rng.random_range(-3.0..3.0))).collect()
}

#[test]
fn saddle_solves_match_restricted_inverse_oracle() {
    for seed in 0..20 {
        let inst = random_index2(seed, false);
        let e11_inv = inst.e11.clone().try_inverse().unwrap();
        let theta_r1 = null_basis(&inst.a21);
        let theta_l2 = null_basis(&inst.a12.transpose());
        // Pi_r: onto ker A21 along Im E11^-1 A12; Pi_l: onto E11 ker A21 along Im A12
        let pi_r = oblique(&theta_r1, &(&e11_inv * &inst.a12));
        let pi_l = oblique(&(&inst.e11 * &theta_r1), &inst.a12);
        let (pl, pr) = projectors_index2(&inst.sys).unwrap();
        assert!((&pl - &pi_l).norm() <= 1e-8 * pi_l.norm(), "seed {seed}: Pi_l");
        assert!((&pr - &pi_r).norm() <= 1e-8 * pi_r.norm(), "seed {seed}: Pi_r");
        assert!((&pl * &pl - &pl).norm() <= 1e-10 * pl.norm().max(1.0));
        assert!((&pr * &pr - &pr).norm() <= 1e-10 * pr.norm().max(1.0));
        let n1 = inst.e11.nrows();
        let rank = pl.clone().svd(false, false).rank(1e-8);
        assert_eq!(rank, n1 - inst.a21.nrows());

        let hidden = hidden_feedthrough(&inst.sys).unwrap();
        let (ecal, acal) = (&pi_l * &inst.e11 * &pi_r, &pi_l * &inst.a11 * &pi_r);
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        for sigma in random_points(&mut rng, 2) {
            let m = cplx(&inst.e11) * sigma - cplx(&inst.a11);
            let core = cplx(&theta_l2).transpose() * &m * cplx(&theta_r1);
            let restricted = cplx(&theta_r1) * core.try_inverse().unwrap() * cplx(&theta_l2).transpose();
            let pencil = cplx(&ecal) * sigma - cplx(&acal);
            let scale = restricted.norm() * pencil.norm();
            assert!((&restricted * &pencil - cplx(&pi_r)).norm() <= 1e-8 * scale, "seed {seed}: X M = Pi_r");
            assert!((&pencil * &restricted - cplx(&pi_l)).norm() <= 1e-8 * scale, "seed {seed}: M X = Pi_l");

            let m_in = hidden.b_mat.ncols();
            let b = CVec::from_fn(m_in, |i, _| C64::new(1.0 + i as f64, -0.5));
            let v = saddle_solve_right(&inst.sys, sigma, &b, &hidden.b_mat).unwrap();
            let want = &restricted * cplx(&hidden.b_mat) * &b;
            assert!((&v - &want).norm() <= 1e-8 * want.norm(), "seed {seed}: right solve");
            assert!((cplx(&inst.a21) * &v).norm() <= 1e-10 * v.norm() * inst.a21.norm());

            let p_out = hidden.c_mat.nrows();
            let c = CVec::from_fn(p_out, |i, _| C64::new(0.5, 1.0 - i as f64));
            let w = saddle_solve_left(&inst.sys, sigma, &c, &hidden.c_mat).unwrap();
            let want = restricted.transpose() * cplx(&hidden.c_mat).transpose() * &c;
            assert!((&w - &want).norm() <= 1e-8 * want.norm(), "seed {seed}: left solve");
            assert!((cplx(&inst.a12).transpose() * &w).norm() <= 1e-10 * w.norm() * inst.a12.norm());
        }
    }
}

#[test]
fn hidden_feedthrough_matches_polynomial_part() {
    for (seed, with_b2) in (0..8).map(|s| (s, s % 2 == 1)) {
        let inst = random_index2(50 + seed, with_b2);
        let hidden = hidden_feedthrough(&inst.sys).unwrap();
        let w = weierstrass(&inst.sys).unwrap();
        let (_, poly) = split_transfer(&inst.sys, &w).unwrap();
        let mine = hidden.polynomial();
        let diff = mine.rel_diff(&poly);
        assert!(diff <= 1e-8, "seed {seed}: polynomial mismatch {diff:e}");
        if !with_b2 {
            assert_eq!(hidden.linear_poly_coeff.norm(), 0.0);
        }
    }
}

fn data_for(rng: &mut ChaCha8Rng, r: usize, m: usize, p: usize) -> InterpolationData {
    // r real points keep the order exactly r after realification
    let pts: Vec<f64> = (0..r).map(|_| rng.random_range(0.3..6.0)).collect();
    let right: Vec<Vec<f64>> = (0..r).map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let left: Vec<Vec<f64>> = (0..r).map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    InterpolationData::real(&pts, &right, &left).unwrap()
}

#[test]
fn saddle_path_interpolates_and_matches_projector_path() {
    for (seed, with_b2) in (0..8).map(|s| (s, s % 3 == 2)) {
        let inst = random_index2(100 + seed, with_b2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = data_for(&mut rng, 3, inst.sys.inputs(), inst.sys.outputs());
        let m2 = reduce_index2(&inst.sys, &data).unwrap();
        let report = verify_interpolation(&inst.sys, &m2, &data, &[0, 1]).unwrap();
        assert!(report.max_residual <= 1e-6, "seed {seed}: residual {:e}", report.max_residual);

        let hidden = hidden_feedthrough(&inst.sys).unwrap();
        let (v, wb) = saddle_bases(&inst.sys, &hidden, &data).unwrap();
        assert!((&inst.a21 * &v).norm() <= 1e-10 * inst.a21.norm());
        assert!((inst.a12.transpose() * &wb).norm() <= 1e-10 * inst.a12.norm());

        let w = weierstrass(&inst.sys).unwrap();
        let md = reduce_dae(&inst.sys, &data, &w).unwrap();
        let (fd, f2) = (md.finite.clone().unwrap(), m2.finite.clone().unwrap());
        for s in random_points(&mut rng, 10) {
            let (gd, g2) = (eval_transfer(&fd, s).unwrap(), eval_transfer(&f2, s).unwrap());
            assert!((&gd - &g2).norm() <= 1e-6 * gd.norm().max(1e-300), "seed {seed}: probe {s}");
            let (full, red) = (inst.sys.eval(s).unwrap(), m2.eval(s).unwrap());
            assert!((&full - &red).norm().is_finite());
        }
        let pd = md.polynomial_part.as_ref().unwrap();
        let p2 = m2.polynomial_part.as_ref().unwrap();
        assert!(pd.rel_diff(p2) <= 1e-8, "seed {seed}: polynomial parts differ");
    }
}
