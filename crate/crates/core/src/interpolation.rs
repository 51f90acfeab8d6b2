//! Tangential rational Krylov bases, Petrov-Galerkin projection and interpolation checks.

use crate::analysis::TransferFunction;
use crate::linalg::{orthonormalize_tracked, DenseLu, ShiftedSolver};
use crate::matrix::{to_complex, SysMatrix};
use crate::spectral::{infinite_deflating_bases, split_transfer, trim_against, WeierstrassData};
use crate::system::{
    conjugate_close, reduced_pencil_regular, DescriptorSystem, InterpolationData, MatrixPolynomial, Method,
    Provenance, ReducedModel, StateSpace,
};
use crate::{CMat, CVec, Error, RMat, Result, C64};
use rayon::prelude::*;
use serde::Serialize;

/// Default pass threshold of [`verify_interpolation`].
pub const VERIFY_TOL: f64 = 1e-6;

fn as_column(v: &CVec) -> CMat {
    CMat::from_column_slice(v.len(), 1, v.as_slice())
}

fn ladder(solver: &ShiftedSolver, e: &SysMatrix, rhs: CMat, n: usize, transpose: bool) -> CMat {
    let mut out = CMat::zeros(rhs.nrows(), n);
    let mut x = if transpose { solver.solve_transpose(&rhs) } else { solver.solve(&rhs) };
    for j in 0..n {
        if j > 0 {
            x = if transpose { solver.solve_transpose(&e.tr_mul_c(&x)) } else { solver.solve(&e.mul_c(&x)) };
        }
        out.set_column(j, &x.column(0));
    }
    out
}

/// Columns `((sigma E - A)^-1 E)^(j-1) (sigma E - A)^-1 B^ b`, `B^ = P_l B` when a projector is given.
pub fn krylov_columns(
    system: &DescriptorSystem,
    sigma: C64,
    b: &CVec,
    n: usize,
    projector: Option<&RMat>,
) -> Result<CMat> {
    if n == 0 || b.len() != system.inputs() {
        return Err(Error::InvalidArgument("krylov_columns needs N >= 1 and a length-m direction".into()));
    }
    let solver = ShiftedSolver::new(system, sigma)?;
    Ok(right_ladder(&solver, system, b, n, projector))
}

fn right_ladder(solver: &ShiftedSolver, system: &DescriptorSystem, b: &CVec, n: usize, projector: Option<&RMat>) -> CMat {
    let mut rhs = to_complex(&system.b) * as_column(b);
    if let Some(p) = projector {
        rhs = to_complex(p) * rhs;
    }
    ladder(solver, &system.e, rhs, n, false)
}

fn left_ladder(solver: &ShiftedSolver, system: &DescriptorSystem, c: &CVec, n: usize, projector: Option<&RMat>) -> CMat {
    let mut rhs = to_complex(&system.c).tr_mul(&as_column(c));
    if let Some(p) = projector {
        rhs = to_complex(p).tr_mul(&rhs);
    }
    ladder(solver, &system.e, rhs, n, true)
}

/// Columns `((mu E - A)^-T E^T)^(j-1) (mu E - A)^-T C^^T c`, `C^ = C P_r` when a projector is given.
pub fn adjoint_krylov_columns(
    system: &DescriptorSystem,
    mu: C64,
    c: &CVec,
    m: usize,
    projector: Option<&RMat>,
) -> Result<CMat> {
    if m == 0 || c.len() != system.outputs() {
        return Err(Error::InvalidArgument("adjoint_krylov_columns needs M >= 1 and a length-p direction".into()));
    }
    let solver = ShiftedSolver::new(system, mu)?;
    Ok(left_ladder(&solver, system, c, m, projector))
}

/// Real columns spanning the same space as a conjugate-closed set of complex columns.
///
/// Entry `i` owns `cols[i]`; self-conjugate entries contribute their real part, each
/// conjugate pair contributes `[Re, Im]` of its first member. `tracked` columns
/// (e.g. the tangential directions) are transformed identically.
pub(crate) fn realify(cols: &[CMat], tracked: &[CMat], partners: &[usize]) -> (RMat, RMat) {
    let rows = cols.first().map(|c| c.nrows()).unwrap_or(0);
    let trows = tracked.first().map(|c| c.nrows()).unwrap_or(0);
    let mut x: Vec<nalgebra::DVector<f64>> = Vec::new();
    let mut t: Vec<nalgebra::DVector<f64>> = Vec::new();
    for i in 0..cols.len() {
        let p = partners[i];
        if p < i {
            continue;
        }
        for j in 0..cols[i].ncols() {
            let c = cols[i].column(j);
            x.push(c.map(|z| z.re));
            if let Some(tr) = tracked.get(i) {
                t.push(tr.column(j).map(|z| z.re));
            }
            if p != i {
                x.push(c.map(|z| z.im));
                if let Some(tr) = tracked.get(i) {
                    t.push(tr.column(j).map(|z| z.im));
                }
            }
        }
    }
    let xm = if x.is_empty() { RMat::zeros(rows, 0) } else { RMat::from_columns(&x) };
    let tm = if t.is_empty() { RMat::zeros(trows, 0) } else { RMat::from_columns(&t) };
    (xm, tm)
}

fn partners_of(data: &InterpolationData) -> Result<Vec<usize>> {
    data.conjugate_partners()
        .ok_or_else(|| Error::InvalidArgument("interpolation data is not closed under conjugation".into()))
}

/// Per-point right/left Krylov blocks (computed in parallel, one factorization per point).
pub(crate) fn tangential_blocks(
    system: &DescriptorSystem,
    data: &InterpolationData,
    right_proj: Option<&RMat>,
    left_proj: Option<&RMat>,
) -> Result<(Vec<CMat>, Vec<CMat>)> {
    let blocks = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let solver = ShiftedSolver::new(system, data.points[i])?;
            let v = right_ladder(&solver, system, &data.right_dirs[i], 1, right_proj);
            let w = left_ladder(&solver, system, &data.left_dirs[i], 1, left_proj);
            Ok((v, w))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(blocks.into_iter().unzip())
}

/// Orthonormal bases of equal rank from the realified right and left columns.
///
/// Returns `(V, W, Rv^+, Rw^+)` with `Xv ~ V Rv`, `Xw ~ W Rw`.
pub(crate) fn paired_bases(xv: &RMat, xw: &RMat) -> Result<(RMat, RMat, RMat, RMat)> {
    let (v, rv) = orthonormalize_tracked(xv)?;
    let (w, rw) = orthonormalize_tracked(xw)?;
    let k = v.ncols().min(w.ncols());
    Ok((
        v.columns(0, k).into_owned(),
        w.columns(0, k).into_owned(),
        rv.columns(0, k).into_owned(),
        rw.columns(0, k).into_owned(),
    ))
}

/// `E~ = W^T E V`, `A~ = W^T A V`, `B~ = W^T B`, `C~ = C V`, `D~ = D`.
pub fn project(system: &DescriptorSystem, v: &RMat, w: &RMat) -> Result<ReducedModel> {
    system.check_dimensions()?;
    let n = system.order();
    if v.ncols() != w.ncols() || v.nrows() != n || w.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "projection bases are {}x{} and {}x{}, system order {n}",
            v.nrows(),
            v.ncols(),
            w.nrows(),
            w.ncols()
        )));
    }
    Ok(ReducedModel {
        e: w.tr_mul(&system.e.mul(v)),
        a: w.tr_mul(&system.a.mul(v)),
        b: w.tr_mul(&system.b),
        c: &system.c * v,
        d: system.d.clone(),
        improper: None,
        polynomial_part: None,
        finite: None,
        provenance: Provenance::projection(v.ncols()),
    })
}

pub(crate) fn check_reduced_pencil(e: &RMat, a: &RMat, data: &InterpolationData) -> Result<()> {
    for &s in &data.points {
        if !reduced_pencil_regular(e, a, s) {
            return Err(Error::SingularReducedPencil(s));
        }
    }
    Ok(())
}

/// Bitangential Hermite reduction that ignores the polynomial part.
pub fn reduce_naive(system: &DescriptorSystem, data: &InterpolationData) -> Result<ReducedModel> {
    let data = conjugate_close(data);
    let partners = partners_of(&data)?;
    let (vc, wc) = tangential_blocks(system, &data, None, None)?;
    let (xv, _) = realify(&vc, &[], &partners);
    let (xw, _) = realify(&wc, &[], &partners);
    let (v, w, _, _) = paired_bases(&xv, &xw)?;
    let mut model = project(system, &v, &w)?;
    check_reduced_pencil(&model.e, &model.a, &data)?;
    if DenseLu::new(&model.e).is_some() {
        model.polynomial_part = Some(MatrixPolynomial::constant(model.d.clone()));
    }
    model.provenance = Provenance {
        method: Method::Naive,
        data: Some(data),
        finite_order: v.ncols(),
        infinite_order: 0,
        iterations: None,
        converged: None,
    };
    Ok(model)
}

/// Polynomial part of the reduced infinite block `(E~inf, A~inf, B~inf, C~inf) + D`.
fn infinite_block_polynomial(e: &RMat, a: &RMat, b: &RMat, c: &RMat, d: &RMat) -> Result<MatrixPolynomial> {
    let ni = a.nrows();
    let mut coeffs = vec![d.clone()];
    let mut reference = d.amax();
    if ni > 0 {
        let lu = DenseLu::new(a).ok_or(Error::SingularPencil)?;
        let m = lu.solve(e);
        let mut x = lu.solve(b);
        for k in 0..ni {
            if k > 0 {
                x = &m * x;
            }
            reference = reference.max(c.amax() * x.amax());
            let term = -(c * &x);
            if k == 0 {
                coeffs[0] += term;
            } else {
                coeffs.push(term);
            }
        }
    }
    let mut p = MatrixPolynomial::new(d.nrows(), d.ncols(), coeffs)?;
    trim_against(&mut p, reference);
    Ok(p)
}

/// Projector-aware reduction: `V = [V_f, V_inf]`, `W = [W_f, W_inf]`.
///
/// The reduced model reproduces the polynomial part exactly; its order is `r + n_inf`.
pub fn reduce_dae(system: &DescriptorSystem, data: &InterpolationData, w: &WeierstrassData) -> Result<ReducedModel> {
    if w.n_f + w.n_inf != system.order() {
        return Err(Error::DimensionMismatch("Weierstrass data does not match the system".into()));
    }
    let data = conjugate_close(data);
    let partners = partners_of(&data)?;
    let (vf, wf, r) = if w.n_f > 0 {
        let (vc, wc) = tangential_blocks(system, &data, Some(&w.p_l), Some(&w.p_r))?;
        let (xv, _) = realify(&vc, &[], &partners);
        let (xw, _) = realify(&wc, &[], &partners);
        let (vf, wf, _, _) = paired_bases(&xv, &xw)?;
        let r = vf.ncols();
        (vf, wf, r)
    } else {
        (RMat::zeros(system.order(), 0), RMat::zeros(system.order(), 0), 0)
    };
    let (w_inf, v_inf) = infinite_deflating_bases(w);
    let ni = w.n_inf;
    let mut v = RMat::zeros(system.order(), r + ni);
    v.columns_mut(0, r).copy_from(&vf);
    v.columns_mut(r, ni).copy_from(&v_inf);
    let mut wm = RMat::zeros(system.order(), r + ni);
    wm.columns_mut(0, r).copy_from(&wf);
    wm.columns_mut(r, ni).copy_from(&w_inf);
    let mut model = project(system, &v, &wm)?;
    let blk = |m: &RMat, r0: usize, c0: usize, nr: usize, nc: usize| m.view((r0, c0), (nr, nc)).into_owned();
    let finite = StateSpace {
        e: blk(&model.e, 0, 0, r, r),
        a: blk(&model.a, 0, 0, r, r),
        b: model.b.rows(0, r).into_owned(),
        c: model.c.columns(0, r).into_owned(),
    };
    check_reduced_pencil(&finite.e, &finite.a, &data)?;
    let poly = infinite_block_polynomial(
        &blk(&model.e, r, r, ni, ni),
        &blk(&model.a, r, r, ni, ni),
        &model.b.rows(r, ni).into_owned(),
        &model.c.columns(r, ni).into_owned(),
        &system.d,
    )?;
    model.polynomial_part = Some(poly);
    model.finite = Some(finite);
    model.provenance = Provenance {
        method: Method::Dae,
        data: Some(data),
        finite_order: r,
        infinite_order: ni,
        iterations: None,
        converged: None,
    };
    Ok(model)
}

/// Convenience: Weierstrass form, split and projector-aware reduction in one call.
pub fn reduce_dae_dense(system: &DescriptorSystem, data: &InterpolationData) -> Result<(ReducedModel, WeierstrassData)> {
    let w = crate::spectral::weierstrass(system)?;
    let model = reduce_dae(system, data, &w)?;
    // sanity: the split exists for this system (errors surface here rather than later)
    let _ = split_transfer(system, &w)?;
    Ok((model, w))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "order")]
pub enum ConditionKind {
    /// `G(sigma) b`
    Right,
    /// `c^T G(sigma)`
    Left,
    /// `c^T G^(l)(sigma) b`
    Hermite(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionResidual {
    pub index: usize,
    /// `[re, im]` of the interpolation point.
    pub point: [f64; 2],
    pub condition: ConditionKind,
    pub residual: f64,
}

/// Relative interpolation residuals with an overall verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterpolationReport {
    pub entries: Vec<ConditionResidual>,
    pub tol: f64,
    pub max_residual: f64,
    pub pass: bool,
}

impl InterpolationReport {
    pub fn max_of(&self, pick: impl Fn(&ConditionKind) -> bool) -> f64 {
        self.entries.iter().filter(|e| pick(&e.condition)).map(|e| e.residual).fold(0.0, f64::max)
    }
}

fn rel(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// `G'(sigma)` by complex step for real `sigma` (real systems only) or central differences.
pub fn numeric_derivative(tf: &dyn TransferFunction, sigma: C64) -> Result<CMat> {
    if sigma.im == 0.0 {
        let h = 1e-20 * sigma.re.abs().max(1.0);
        Ok(tf.eval(C64::new(sigma.re, h))?.map(|z| C64::new(z.im / h, 0.0)))
    } else {
        let h = 1e-6 * sigma.norm().max(1.0);
        let hp = tf.eval(sigma + h)?;
        let hm = tf.eval(sigma - h)?;
        Ok((hp - hm) / C64::new(2.0 * h, 0.0))
    }
}

fn derivative(tf: &dyn TransferFunction, sigma: C64, ell: usize) -> Result<CMat> {
    if ell == 1 {
        numeric_derivative(tf, sigma)
    } else {
        tf.eval_derivative(sigma, ell)
    }
}

/// Right/left conditions for order 0 and bitangential Hermite conditions for orders >= 1.
pub fn verify_interpolation(
    full: &dyn TransferFunction,
    reduced: &dyn TransferFunction,
    data: &InterpolationData,
    derivative_orders: &[usize],
) -> Result<InterpolationReport> {
    verify_interpolation_with_tol(full, reduced, data, derivative_orders, VERIFY_TOL)
}

pub fn verify_interpolation_with_tol(
    full: &dyn TransferFunction,
    reduced: &dyn TransferFunction,
    data: &InterpolationData,
    derivative_orders: &[usize],
    tol: f64,
) -> Result<InterpolationReport> {
    let per_point = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let s = data.points[i];
            let b = as_column(&data.right_dirs[i]);
            let c = as_column(&data.left_dirs[i]);
            let mut out = Vec::new();
            let push = |out: &mut Vec<ConditionResidual>, condition, residual| {
                out.push(ConditionResidual { index: i, point: [s.re, s.im], condition, residual })
            };
            for &ell in derivative_orders {
                if ell == 0 {
                    let g = full.eval(s)?;
                    let gt = reduced.eval(s)?;
                    let gb = &g * &b;
                    push(&mut out, ConditionKind::Right, rel((&gb - &gt * &b).norm(), gb.norm()));
                    let cg = c.transpose() * &g;
                    push(&mut out, ConditionKind::Left, rel((&cg - c.transpose() * &gt).norm(), cg.norm()));
                } else {
                    let g = derivative(full, s, ell)?;
                    let gt = derivative(reduced, s, ell)?;
                    let v = (c.transpose() * &g * &b)[(0, 0)];
                    let vt = (c.transpose() * &gt * &b)[(0, 0)];
                    let scale = v.norm().max(1e-12 * c.norm() * g.norm() * b.norm());
                    push(&mut out, ConditionKind::Hermite(ell), rel((v - vt).norm(), scale));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let entries: Vec<_> = per_point.into_iter().flatten().collect();
    let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    Ok(InterpolationReport { pass: max_residual <= tol, entries, tol, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::eval_transfer;
    use crate::spectral::weierstrass;
    use nalgebra::{dmatrix, dvector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn canonical_index1() -> DescriptorSystem {
        DescriptorSystem::from_dense(dmatrix![1.0, 0.0; 0.0, 0.0], dmatrix![-1.0, 0.0; 0.0, 1.0], dmatrix![1.0; 1.0], dmatrix![1.0, 1.0]).unwrap()
    }

    #[test]
    fn krylov_examples() {
        let i2 = RMat::identity(2, 2);
        let ode = DescriptorSystem::from_dense(i2.clone(), -i2.clone(), i2.clone(), i2.clone()).unwrap();
        let e1 = dvector![c(1.0), c(0.0)];
        let k = krylov_columns(&ode, c(1.0), &e1, 2, None).unwrap();
        assert!((k[(0, 0)] - c(0.5)).norm() < 1e-15 && (k[(0, 1)] - c(0.25)).norm() < 1e-15);
        assert!(k[(1, 0)].norm() < 1e-15);
        let k = adjoint_krylov_columns(&ode, c(1.0), &e1, 2, None).unwrap();
        assert!((k[(0, 1)] - c(0.25)).norm() < 1e-15);
        let sys = canonical_index1();
        let p = dmatrix![1.0, 0.0; 0.0, 0.0];
        let k = krylov_columns(&sys, c(2.0), &dvector![c(1.0)], 1, Some(&p)).unwrap();
        assert!((k[(0, 0)] - c(1.0 / 3.0)).norm() < 1e-15 && k[(1, 0)].norm() < 1e-15);
        // transpose oracle: (2E - A)^-T P_r^T C^T = diag(1/3, -1) [1; 0]
        let k = adjoint_krylov_columns(&sys, c(2.0), &dvector![c(1.0)], 1, Some(&p)).unwrap();
        assert!((k[(0, 0)] - c(1.0 / 3.0)).norm() < 1e-15 && k[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn identity_projection_reproduces_system() {
        let sys = canonical_index1();
        let i2 = RMat::identity(2, 2);
        let m = project(&sys, &i2, &i2).unwrap();
        assert_eq!(m.e, sys.e.to_dense());
        assert_eq!(m.a, sys.a.to_dense());
        assert_eq!(m.b, sys.b);
        assert_eq!(m.c, sys.c);
        let scalar = project(&sys, &dmatrix![1.0; 0.0], &dmatrix![1.0; 0.0]).unwrap();
        assert_eq!((scalar.e[(0, 0)], scalar.a[(0, 0)]), (1.0, -1.0));
        assert!(matches!(project(&sys, &i2, &dmatrix![1.0; 0.0]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn projection_matches_triple_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut r = |a, b| RMat::from_fn(a, b, |_, _| rng.random_range(-1.0..1.0));
        let (e, a, b, cc) = (r(4, 4), r(4, 4), r(4, 2), r(3, 4));
        let sys = DescriptorSystem::from_dense(e.clone(), a.clone(), b.clone(), cc.clone()).unwrap();
        let v = r(4, 2).qr().q();
        let w = r(4, 2).qr().q();
        let m = project(&sys, &v, &w).unwrap();
        let mut err = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for k in 0..4 {
                    for l in 0..4 {
                        s += w[(k, i)] * e[(k, l)] * v[(l, j)];
                    }
                }
                err = err.max((s - m.e[(i, j)]).abs());
            }
        }
        assert!(err < 1e-14);
        assert!((m.c - &cc * &v).norm() < 1e-14);
    }

    #[test]
    fn naive_order_one_copy() {
        let sys = DescriptorSystem::from_dense(dmatrix![1.0], dmatrix![-2.0], dmatrix![1.0], dmatrix![1.0]).unwrap();
        let data = InterpolationData::real(&[2.0], &[vec![1.0]], &[vec![1.0]]).unwrap();
        let m = reduce_naive(&sys, &data).unwrap();
        for s in [c(0.3), C64::new(0.0, 4.0), c(10.0)] {
            assert!((eval_transfer(&sys, s).unwrap() - eval_transfer(&m, s).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn naive_two_state_interpolates() {
        let sys = DescriptorSystem::from_dense(RMat::identity(2, 2), dmatrix![-1.0, 0.5; 0.0, -3.0], dmatrix![1.0; 1.0], dmatrix![1.0, 2.0]).unwrap();
        let data = InterpolationData::real(&[1.0], &[vec![1.0]], &[vec![1.0]]).unwrap();
        let m = reduce_naive(&sys, &data).unwrap();
        let rep = verify_interpolation(&sys, &m, &data, &[0, 1]).unwrap();
        assert!(rep.max_residual < 1e-8, "{rep:?}");
    }

    #[test]
    fn dae_on_canonical_index1_is_exact() {
        let sys = canonical_index1();
        let w = weierstrass(&sys).unwrap();
        let data = InterpolationData::real(&[1.0], &[vec![1.0]], &[vec![1.0]]).unwrap();
        let m = reduce_dae(&sys, &data, &w).unwrap();
        for s in [c(0.5), C64::new(0.0, 3.0), c(1e6)] {
            let want = C64::new(1.0, 0.0) / (s + 1.0) - 1.0;
            assert!((eval_transfer(&m, s).unwrap()[(0, 0)] - want).norm() < 1e-13);
        }
        assert_eq!((m.provenance.finite_order, m.provenance.infinite_order), (1, 1));
        let p = m.polynomial_part.as_ref().unwrap();
        assert!((p.coeff(0)[(0, 0)] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn dae_on_ode_matches_naive_span() {
        let sys = DescriptorSystem::from_dense(RMat::identity(3, 3), dmatrix![-1.0, 0.2, 0.0; 0.0, -2.0, 0.1; 0.3, 0.0, -4.0], dmatrix![1.0; 0.0; 1.0], dmatrix![0.0, 1.0, 1.0]).unwrap();
        let w = weierstrass(&sys).unwrap();
        let data = InterpolationData::real(&[0.5, 2.0], &[vec![1.0], vec![1.0]], &[vec![1.0], vec![1.0]]).unwrap();
        let a = reduce_dae(&sys, &data, &w).unwrap();
        let b = reduce_naive(&sys, &data).unwrap();
        for s in [c(0.1), C64::new(0.0, 2.0)] {
            assert!((eval_transfer(&a, s).unwrap() - eval_transfer(&b, s).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn perturbed_model_fails_verification() {
        let sys = DescriptorSystem::from_dense(RMat::identity(2, 2), dmatrix![-1.0, 0.5; 0.0, -3.0], dmatrix![1.0; 1.0], dmatrix![1.0, 2.0]).unwrap();
        let data = InterpolationData::real(&[1.0], &[vec![1.0]], &[vec![1.0]]).unwrap();
        let same = verify_interpolation(&sys, &sys, &data, &[0, 1]).unwrap();
        assert_eq!(same.max_residual, 0.0);
        let mut m = reduce_naive(&sys, &data).unwrap();
        m.b[(0, 0)] *= 1.0 + 1e-3;
        let rep = verify_interpolation(&sys, &m, &data, &[0]).unwrap();
        assert!(!rep.pass);
        let right = rep.max_of(|k| *k == ConditionKind::Right);
        assert!(right > 1e-5 && right < 1e-2, "{right}");
    }

    fn random_ode(seed: u64, n: usize) -> DescriptorSystem {
        crate::synthetic::generate_synthetic(
            crate::synthetic::SyntheticKind::Ode,
            &crate::synthetic::SyntheticParams { n1: n, n2: 0, m: 2, p: 2, seed },
        )
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn moment_ladder_matches_derivatives(seed in 0u64..1000, sigma in 0.5f64..3.0) {
            let sys = random_ode(seed, 8);
            let b = dvector![c(1.0), c(-0.5)];
            let v = krylov_columns(&sys, c(sigma), &b, 3, None).unwrap();
            let (q, _) = orthonormalize_tracked(&crate::matrix::real_part(&v)).unwrap();
            let m = project(&sys, &q, &q).unwrap();
            for ell in 1..=2usize {
                let g = sys.eval_derivative(c(sigma), ell).unwrap() * crate::matrix::to_complex(&dmatrix![1.0; -0.5]);
                let gt = m.eval_derivative(c(sigma), ell).unwrap() * crate::matrix::to_complex(&dmatrix![1.0; -0.5]);
                prop_assert!((&g - &gt).norm() <= 1e-7 * g.norm());
            }
        }

        #[test]
        fn basis_change_leaves_transfer_unchanged(seed in 0u64..1000) {
            let sys = random_ode(seed, 6);
            let data = conjugate_close(&InterpolationData::new(
                vec![C64::new(1.0, 1.0), c(2.0)],
                vec![dvector![c(1.0), c(0.3)], dvector![c(0.2), c(1.0)]],
                vec![dvector![c(1.0), c(1.0)], dvector![c(1.0), c(-1.0)]],
            ).unwrap());
            let m = reduce_naive(&sys, &data).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = m.order();
            let t = RMat::from_fn(r, r, |i, j| if i == j { 2.0 } else { 0.0 } + rng.random_range(-0.5..0.5));
            let moved = ReducedModel { e: &m.e * &t, a: &m.a * &t, c: &m.c * &t, ..m.clone() };
            for s in [C64::new(0.2, 0.7), c(5.0)] {
                let g = eval_transfer(&m, s).unwrap();
                prop_assert!((&g - eval_transfer(&moved, s).unwrap()).norm() <= 1e-9 * g.norm());
            }
            let rep = verify_interpolation(&sys, &m, &data, &[0, 1]).unwrap();
            prop_assert!(rep.pass, "{:?}", rep);
        }
    }
}
