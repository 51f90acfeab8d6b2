//! Semi-explicit index-1 systems: constant polynomial part and `D~`-shifted reduction.

use crate::interpolation::{check_reduced_pencil, paired_bases, realify, tangential_blocks};
use crate::irka::{run_irka, IrkaConfig, IrkaResult, IrkaStep};
use crate::linalg::{factorize_combination, Backend, ComplexSolver, DenseLu};
use crate::matrix::{assemble_2x2, real_part, to_complex};
use crate::system::{
    conjugate_close, Blocks, DescriptorSystem, InterpolationData, MatrixPolynomial, Method, Provenance, ReducedModel,
    StateSpace,
};
use crate::{CMat, Error, RMat, Result, C64};

/// `D~ = C1 M1 B2 + C2 M2 B2 + D`, kept with the applied products `M1 B2`, `M2 B2`.
///
/// `M1`, `M2` themselves are never formed here; see [`explicit_m_matrices`].
#[derive(Clone, Debug, PartialEq)]
pub struct Index1Feedthrough {
    pub m1_b2: RMat,
    pub m2_b2: RMat,
    pub dtilde: RMat,
}

struct Index1Factors {
    a22: ComplexSolver,
    /// `[[E11, E12], [A21, A22]]`, whose leading block of the inverse is the Schur complement inverse.
    k: ComplexSolver,
    n1: usize,
}

impl Index1Factors {
    fn new(bl: &Blocks) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        let a22 = factorize_combination(&[(one, &bl.a22)], Backend::Auto).ok_or(Error::SingularA22)?;
        let kmat = assemble_2x2(bl.n1, bl.n2, [[Some(&bl.e11), Some(&bl.e12)], [Some(&bl.a21), Some(&bl.a22)]]);
        let k = factorize_combination(&[(one, &kmat)], Backend::Auto).ok_or(Error::SingularSchurComplement)?;
        Ok(Index1Factors { a22, k, n1: bl.n1 })
    }

    fn a22_solve(&self, x: &RMat) -> RMat {
        real_part(&self.a22.solve(&to_complex(x)))
    }

    /// `(E11 - E12 A22^-1 A21)^-1 x`.
    fn schur_solve(&self, x: &RMat) -> RMat {
        let n = self.k.order();
        let mut rhs = CMat::zeros(n, x.ncols());
        rhs.rows_mut(0, self.n1).copy_from(&to_complex(x));
        real_part(&self.k.solve(&rhs).rows(0, self.n1).into_owned())
    }
}

fn feedthrough(bl: &Blocks, d: &RMat, f: &Index1Factors) -> Index1Feedthrough {
    let y = f.a22_solve(&bl.b2);
    let m1_b2 = f.schur_solve(&bl.e12.mul(&y));
    let m2_b2 = -f.a22_solve(&bl.a21.mul(&m1_b2)) - y;
    let dtilde = &bl.c1 * &m1_b2 + &bl.c2 * &m2_b2 + d;
    Index1Feedthrough { m1_b2, m2_b2, dtilde }
}

/// Constant polynomial part of a semi-explicit index-1 system (`m` applications of each factorization).
pub fn polynomial_part_index1(system: &DescriptorSystem) -> Result<Index1Feedthrough> {
    let bl = system.require_blocks("index1")?;
    let f = Index1Factors::new(&bl)?;
    Ok(feedthrough(&bl, &system.d, &f))
}

/// Dense `M1 = (E11 - E12 A22^-1 A21)^-1 E12 A22^-1` and `M2 = -A22^-1 A21 M1 - A22^-1`.
pub fn explicit_m_matrices(system: &DescriptorSystem) -> Result<(RMat, RMat)> {
    let bl = system.require_blocks("index1")?;
    let f = Index1Factors::new(&bl)?;
    let a22inv = f.a22_solve(&RMat::identity(bl.n2, bl.n2));
    let m1 = f.schur_solve(&bl.e12.mul(&a22inv));
    let m2 = -f.a22_solve(&bl.a21.mul(&m1)) - a22inv;
    Ok((m1, m2))
}

/// `D~`-shifted reduced quadruple built from unprojected tangential bases.
pub(crate) fn shifted_quadruple(
    system: &DescriptorSystem,
    data: &InterpolationData,
    dtilde: &RMat,
) -> Result<StateSpace> {
    let (plain, bcal, ccal) = unshifted_quadruple(system, data)?;
    Ok(apply_shift(&plain, &bcal, &ccal, &(dtilde - &system.d)))
}

/// `(W^T E V, W^T A V, W^T B, C V)` with the tangential direction matrices carried along the basis change.
pub(crate) fn unshifted_quadruple(system: &DescriptorSystem, data: &InterpolationData) -> Result<(StateSpace, RMat, RMat)> {
    let partners = data
        .conjugate_partners()
        .ok_or_else(|| Error::InvalidArgument("interpolation data is not closed under conjugation".into()))?;
    let (vc, wc) = tangential_blocks(system, data, None, None)?;
    let bdirs: Vec<CMat> = data.right_dirs.iter().map(|b| CMat::from_column_slice(b.len(), 1, b.as_slice())).collect();
    let cdirs: Vec<CMat> = data.left_dirs.iter().map(|c| CMat::from_column_slice(c.len(), 1, c.as_slice())).collect();
    let (xv, bx) = realify(&vc, &bdirs, &partners);
    let (xw, cx) = realify(&wc, &cdirs, &partners);
    let (v, w, rv, rw) = paired_bases(&xv, &xw)?;
    let bcal = bx * rv;
    let ccal = cx * rw;
    let plain = StateSpace {
        e: w.tr_mul(&system.e.mul(&v)),
        a: w.tr_mul(&system.a.mul(&v)),
        b: w.tr_mul(&system.b),
        c: &system.c * &v,
    };
    Ok((plain, bcal, ccal))
}

/// `A~ = A^ + C^T X B`, `B~ = B^ - C^T X`, `C~ = C^ - X B` with `X = D~ - D`.
///
/// The plain projection carries no feedthrough, so it interpolates `G - D`; shifting by
/// `D~ - D` keeps those conditions while moving the feedthrough from `D` to `D~`.
pub(crate) fn apply_shift(plain: &StateSpace, bcal: &RMat, ccal: &RMat, delta: &RMat) -> StateSpace {
    StateSpace {
        e: plain.e.clone(),
        a: &plain.a + ccal.transpose() * delta * bcal,
        b: &plain.b - ccal.transpose() * delta,
        c: &plain.c - delta * bcal,
    }
}

fn into_model(q: StateSpace, dtilde: &RMat, method: Method, data: InterpolationData) -> ReducedModel {
    let r = q.order();
    ReducedModel {
        e: q.e.clone(),
        a: q.a.clone(),
        b: q.b.clone(),
        c: q.c.clone(),
        d: dtilde.clone(),
        improper: None,
        polynomial_part: Some(MatrixPolynomial::constant(dtilde.clone())),
        finite: Some(q),
        provenance: Provenance { method, data: Some(data), finite_order: r, infinite_order: 0, iterations: None, converged: None },
    }
}

/// Bitangential Hermite reduction of a semi-explicit index-1 system without spectral projectors.
pub fn reduce_index1(system: &DescriptorSystem, data: &InterpolationData) -> Result<ReducedModel> {
    let fb = polynomial_part_index1(system)?;
    let data = conjugate_close(data);
    let q = shifted_quadruple(system, &data, &fb.dtilde)?;
    if DenseLu::new(&q.e).is_none() {
        return Err(Error::SingularReducedE);
    }
    check_reduced_pencil(&q.e, &q.a, &data)?;
    Ok(into_model(q, &fb.dtilde, Method::Index1, data))
}

struct ShiftedStep<'a> {
    system: &'a DescriptorSystem,
    dtilde: RMat,
}

impl IrkaStep for ShiftedStep<'_> {
    fn build(&self, data: &InterpolationData) -> Result<StateSpace> {
        let q = shifted_quadruple(self.system, data, &self.dtilde)?;
        if DenseLu::new(&q.e).is_none() {
            return Err(Error::SingularReducedE);
        }
        Ok(q)
    }

    fn finalize(&self, data: &InterpolationData, quad: StateSpace) -> Result<ReducedModel> {
        check_reduced_pencil(&quad.e, &quad.a, data)?;
        Ok(into_model(quad, &self.dtilde, Method::IrkaIndex1, data.clone()))
    }
}

/// IRKA with the `D~` shift applied inside every iteration.
pub fn irka_index1(system: &DescriptorSystem, config: &IrkaConfig) -> Result<IrkaResult> {
    let fb = polynomial_part_index1(system)?;
    let step = ShiftedStep { system, dtilde: fb.dtilde };
    run_irka(&step, system, config)
}

struct NaiveStep<'a> {
    system: &'a DescriptorSystem,
    dtilde: RMat,
}

impl IrkaStep for NaiveStep<'_> {
    fn build(&self, data: &InterpolationData) -> Result<StateSpace> {
        let (plain, _, _) = unshifted_quadruple(self.system, data)?;
        if DenseLu::new(&plain.e).is_none() {
            return Err(Error::SingularReducedE);
        }
        Ok(plain)
    }

    fn finalize(&self, data: &InterpolationData, _quad: StateSpace) -> Result<ReducedModel> {
        let (plain, bcal, ccal) = unshifted_quadruple(self.system, data)?;
        let q = apply_shift(&plain, &bcal, &ccal, &(&self.dtilde - &self.system.d));
        Ok(into_model(q, &self.dtilde, Method::IrkaThenShift, data.clone()))
    }
}

/// Plain IRKA on the unshifted quadruple followed by a single `D~` shift at the end.
///
/// This matches the polynomial part but generally loses first-order H2 optimality;
/// it exists as a reference against [`irka_index1`].
pub fn irka_then_shift(system: &DescriptorSystem, config: &IrkaConfig) -> Result<IrkaResult> {
    let fb = polynomial_part_index1(system)?;
    let step = NaiveStep { system, dtilde: fb.dtilde };
    run_irka(&step, system, config)
}
