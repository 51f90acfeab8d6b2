//! Stokes-type index-2 systems: hidden feedthrough and saddle-point realizations of the
//! restricted inverses, so that no projector is ever formed in the reduction path.
//!
//! Projector convention: `Pi_l = I - A12 K^-1 A21 E11^-1` and `Pi_r = I - E11^-1 A12 K^-1 A21`
//! with `K = A21 E11^-1 A12`, so that `Pi_l A12 = 0`, `A21 Pi_r = 0`, and saddle solutions
//! lie in `ker A21 = Im Pi_r`.

use crate::interpolation::{check_reduced_pencil, paired_bases, realify};
use crate::irka::{run_irka, IrkaConfig, IrkaResult, IrkaStep};
use crate::linalg::{factorize_combination, Backend, ComplexSolver, DenseLu};
use crate::matrix::{assemble_2x2, real_part, to_complex};
use crate::system::{
    conjugate_close, Blocks, DescriptorSystem, InterpolationData, MatrixPolynomial, Method, Provenance, ReducedModel,
    StateSpace,
};
use crate::{CMat, CVec, Error, RMat, Result, C64};
use rayon::prelude::*;

/// Decoupled output map, hidden feedthrough and effective input of an index-2 system.
///
/// The polynomial part is `d_script + s * linear_poly_coeff`.
#[derive(Clone, Debug, PartialEq)]
pub struct Index2Hidden {
    pub c_mat: RMat,
    pub d_script: RMat,
    pub b_mat: RMat,
    pub linear_poly_coeff: RMat,
}

impl Index2Hidden {
    pub fn polynomial(&self) -> MatrixPolynomial {
        let coeffs = vec![self.d_script.clone(), self.linear_poly_coeff.clone()];
        MatrixPolynomial::new(self.d_script.nrows(), self.d_script.ncols(), coeffs)
            .expect("coefficients share one shape")
    }
}

struct Gram {
    e11: ComplexSolver,
    k: DenseLu<f64>,
    /// `E11^-1 A12`
    e11_a12: RMat,
}

fn real_solve(s: &ComplexSolver, x: &RMat) -> RMat {
    real_part(&s.solve(&to_complex(x)))
}

fn real_solve_t(s: &ComplexSolver, x: &RMat) -> RMat {
    real_part(&s.solve_transpose(&to_complex(x)))
}

impl Gram {
    fn new(bl: &Blocks) -> Result<Self> {
        let e11 = factorize_combination(&[(C64::new(1.0, 0.0), &bl.e11)], Backend::Auto).ok_or(Error::SingularE11)?;
        let e11_a12 = real_solve(&e11, &bl.a12.to_dense());
        let k = DenseLu::new(&bl.a21.mul(&e11_a12)).ok_or(Error::SingularProjectedGram)?;
        Ok(Gram { e11, k, e11_a12 })
    }
}

/// Assembles `C`, `D`, `B` and the `s`-coefficient with factored solves (`p + 2m` solves with `E11`).
pub fn hidden_feedthrough(system: &DescriptorSystem) -> Result<Index2Hidden> {
    let bl = system.require_blocks("index2")?;
    let g = Gram::new(&bl)?;
    Ok(hidden_from(&bl, &system.d, &g))
}

fn hidden_from(bl: &Blocks, d: &RMat, g: &Gram) -> Index2Hidden {
    // R = E11^-T A21^T K^-T C2^T, so that R^T = C2 K^-1 A21 E11^-1
    let z = g.k.solve_transpose(&bl.c2.transpose());
    let r = real_solve_t(&g.e11, &bl.a21.tr_mul(&z));
    let c_base = &bl.c1 - bl.a11.tr_mul(&r).transpose();
    let mut d_script = d - r.transpose() * &bl.b1;
    let (b_mat, linear) = if bl.b2.iter().all(|v| *v == 0.0) {
        (bl.b1.clone(), RMat::zeros(d.nrows(), d.ncols()))
    } else {
        let kb2 = g.k.solve(&bl.b2);
        let f = &g.e11_a12 * &kb2;
        d_script -= &c_base * &f;
        (&bl.b1 - bl.a11.mul(&f), -(&bl.c2 * kb2))
    };
    Index2Hidden { c_mat: c_base, d_script, b_mat, linear_poly_coeff: linear }
}

/// Dense `(Pi_l, Pi_r)`; intended for checks on small instances.
pub fn projectors_index2(system: &DescriptorSystem) -> Result<(RMat, RMat)> {
    let bl = system.require_blocks("index2")?;
    let g = Gram::new(&bl)?;
    let a21 = bl.a21.to_dense();
    let a12 = bl.a12.to_dense();
    // A21 E11^-1 via transposed solves
    let a21_e11 = real_solve_t(&g.e11, &a21.transpose()).transpose();
    let id = RMat::identity(bl.n1, bl.n1);
    let pi_l = &id - &a12 * g.k.solve(&a21_e11);
    let pi_r = &id - &g.e11_a12 * g.k.solve(&a21);
    Ok((pi_l, pi_r))
}

/// Factorization of `[[sigma E11 - A11, A12], [A21, 0]]` shared by right and left solves.
pub struct SaddleSolver {
    solver: ComplexSolver,
    n1: usize,
    sigma: C64,
}

impl SaddleSolver {
    pub fn new(system: &DescriptorSystem, sigma: C64) -> Result<Self> {
        let bl = system.require_blocks("index2")?;
        Self::from_blocks(&bl, sigma)
    }

    fn from_blocks(bl: &Blocks, sigma: C64) -> Result<Self> {
        let ebig = assemble_2x2(bl.n1, bl.n2, [[Some(&bl.e11), None], [None, None]]);
        let neg_a11 = bl.a11.scaled(-1.0);
        let abig = assemble_2x2(bl.n1, bl.n2, [[Some(&neg_a11), Some(&bl.a12)], [Some(&bl.a21), None]]);
        let solver = factorize_combination(&[(sigma, &ebig), (C64::new(1.0, 0.0), &abig)], Backend::Auto)
            .ok_or(Error::SingularSaddle(sigma))?;
        Ok(SaddleSolver { solver, n1: bl.n1, sigma })
    }

    pub fn sigma(&self) -> C64 {
        self.sigma
    }

    fn padded(&self, x: &CMat) -> CMat {
        let mut rhs = CMat::zeros(self.solver.order(), x.ncols());
        rhs.rows_mut(0, self.n1).copy_from(x);
        rhs
    }

    /// Leading block `v` of the solution with right-hand side `[x; 0]`.
    pub fn solve_right(&self, x: &CMat) -> CMat {
        self.solver.solve(&self.padded(x)).rows(0, self.n1).into_owned()
    }

    /// Leading block `w` of the transposed solve with right-hand side `[x; 0]`.
    pub fn solve_left(&self, x: &CMat) -> CMat {
        self.solver.solve_transpose(&self.padded(x)).rows(0, self.n1).into_owned()
    }
}

fn column(v: &CVec) -> CMat {
    CMat::from_column_slice(v.len(), 1, v.as_slice())
}

/// `v` from `[[sigma E11 - A11, A12], [A21, 0]] [v; z] = [B_eff b; 0]`.
pub fn saddle_solve_right(system: &DescriptorSystem, sigma: C64, b: &CVec, b_eff: &RMat) -> Result<CVec> {
    let s = SaddleSolver::new(system, sigma)?;
    Ok(s.solve_right(&(to_complex(b_eff) * column(b))).column(0).into_owned())
}

/// `w` from the transposed saddle system with right-hand side `[C_eff^T c; 0]`.
pub fn saddle_solve_left(system: &DescriptorSystem, mu: C64, c: &CVec, c_eff: &RMat) -> Result<CVec> {
    let s = SaddleSolver::new(system, mu)?;
    Ok(s.solve_left(&(to_complex(&c_eff.transpose()) * column(c))).column(0).into_owned())
}

/// Realified saddle bases `V`, `W` (`A21 V = 0`, `A12^T W = 0`).
pub fn saddle_bases(system: &DescriptorSystem, hidden: &Index2Hidden, data: &InterpolationData) -> Result<(RMat, RMat)> {
    let bl = system.require_blocks("index2")?;
    let partners = data
        .conjugate_partners()
        .ok_or_else(|| Error::InvalidArgument("interpolation data is not closed under conjugation".into()))?;
    let beff = to_complex(&hidden.b_mat);
    let ceff_t = to_complex(&hidden.c_mat.transpose());
    let cols = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let s = SaddleSolver::from_blocks(&bl, data.points[i])?;
            let v = s.solve_right(&(&beff * column(&data.right_dirs[i])));
            let w = s.solve_left(&(&ceff_t * column(&data.left_dirs[i])));
            Ok((v, w))
        })
        .collect::<Result<Vec<_>>>()?;
    let (vc, wc): (Vec<CMat>, Vec<CMat>) = cols.into_iter().unzip();
    let (xv, _) = realify(&vc, &[], &partners);
    let (xw, _) = realify(&wc, &[], &partners);
    let (v, w, _, _) = paired_bases(&xv, &xw)?;
    Ok((v, w))
}

fn quadruple(system: &DescriptorSystem, hidden: &Index2Hidden, data: &InterpolationData) -> Result<StateSpace> {
    let bl = system.require_blocks("index2")?;
    let (v, w) = saddle_bases(system, hidden, data)?;
    Ok(StateSpace {
        e: w.tr_mul(&bl.e11.mul(&v)),
        a: w.tr_mul(&bl.a11.mul(&v)),
        b: w.tr_mul(&hidden.b_mat),
        c: &hidden.c_mat * &v,
    })
}

fn into_model(q: StateSpace, hidden: &Index2Hidden, method: Method, data: InterpolationData) -> ReducedModel {
    let r = q.order();
    let linear_zero = hidden.linear_poly_coeff.iter().all(|v| *v == 0.0);
    ReducedModel {
        e: q.e.clone(),
        a: q.a.clone(),
        b: q.b.clone(),
        c: q.c.clone(),
        d: hidden.d_script.clone(),
        improper: (!linear_zero).then(|| hidden.linear_poly_coeff.clone()),
        polynomial_part: Some(hidden.polynomial()),
        finite: Some(q),
        provenance: Provenance { method, data: Some(data), finite_order: r, infinite_order: 0, iterations: None, converged: None },
    }
}

/// Bitangential Hermite reduction through saddle-point solves.
pub fn reduce_index2(system: &DescriptorSystem, data: &InterpolationData) -> Result<ReducedModel> {
    let hidden = hidden_feedthrough(system)?;
    let data = conjugate_close(data);
    let q = quadruple(system, &hidden, &data)?;
    check_reduced_pencil(&q.e, &q.a, &data)?;
    Ok(into_model(q, &hidden, Method::Index2, data))
}

struct SaddleStep<'a> {
    system: &'a DescriptorSystem,
    hidden: Index2Hidden,
}

impl IrkaStep for SaddleStep<'_> {
    fn build(&self, data: &InterpolationData) -> Result<StateSpace> {
        quadruple(self.system, &self.hidden, data).map_err(|e| match e {
            Error::SingularSaddle(s) => Error::SingularShift(s),
            other => other,
        })
    }

    fn finalize(&self, data: &InterpolationData, quad: StateSpace) -> Result<ReducedModel> {
        check_reduced_pencil(&quad.e, &quad.a, data)?;
        Ok(into_model(quad, &self.hidden, Method::IrkaIndex2, data.clone()))
    }
}

/// IRKA where each step is a saddle-based reduction.
pub fn irka_index2(system: &DescriptorSystem, config: &IrkaConfig) -> Result<IrkaResult> {
    let hidden = hidden_feedthrough(system)?;
    run_irka(&SaddleStep { system, hidden }, system, config)
}
