//! Shifted solves, small generalized eigenproblems and real orthonormal bases.

use crate::lapack_ffi;
use crate::matrix::{norm1_c, to_complex, SysMatrix};
use crate::system::DescriptorSystem;
use crate::{CMat, CVec, Error, RMat, Result, C64};
use faer::sparse::linalg::solvers::Lu as SparseLu;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::{ComplexField, DMatrix, Dyn, LU};
use std::sync::OnceLock;

/// Above this order, systems stored sparse are factorized with the sparse backend.
pub const AUTO_DENSE_MAX: usize = 400;

/// Numerical-rank cutoff for real bases: singular values below `max(rows, cols) * eps * s_max` are dropped.
pub fn basis_drop_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

/// Pivot threshold `n * eps * ||M||_1`.
pub fn pivot_threshold(n: usize, norm1: f64) -> f64 {
    n as f64 * f64::EPSILON * norm1
}

/// Dense LU with partial pivoting that refuses matrices failing the pivot criterion.
pub struct DenseLu<T: ComplexField<RealField = f64>> {
    lu: LU<T, Dyn, Dyn>,
    factors: OnceLock<(DMatrix<T>, DMatrix<T>)>,
}

impl<T: ComplexField<RealField = f64>> DenseLu<T> {
    /// `None` when the smallest pivot magnitude is at most `n * eps * ||M||_1`.
    pub fn new(m: &DMatrix<T>) -> Option<Self> {
        assert!(m.is_square(), "LU of a non-square matrix");
        let n = m.nrows();
        let norm1 = m
            .column_iter()
            .map(|c| c.iter().map(|v| v.clone().abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if !norm1.is_finite() {
            return None;
        }
        let lu = LU::new(m.clone());
        if n > 0 {
            let tol = pivot_threshold(n, norm1);
            let min_piv = (0..n).map(|i| lu.lu_internal()[(i, i)].clone().abs()).fold(f64::INFINITY, f64::min);
            if !(min_piv > tol) {
                return None;
            }
        }
        Some(DenseLu { lu, factors: OnceLock::new() })
    }

    pub fn order(&self) -> usize {
        self.lu.lu_internal().nrows()
    }

    pub fn solve(&self, r: &DMatrix<T>) -> DMatrix<T> {
        self.lu.solve(r).expect("pivots checked at factorization")
    }

    /// Solves `M^T X = R` (plain transpose, no conjugation).
    pub fn solve_transpose(&self, r: &DMatrix<T>) -> DMatrix<T> {
        let (l, u) = self.factors.get_or_init(|| (self.lu.l(), self.lu.u()));
        // P M = L U  =>  M^T = U^T L^T P
        let w = u.tr_solve_upper_triangular(r).expect("pivots checked");
        let mut x = l.tr_solve_lower_triangular(&w).expect("unit diagonal");
        self.lu.p().inv_permute_rows(&mut x);
        x
    }
}

/// Backend choice for shifted factorizations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Auto,
    Dense,
    Sparse,
}

enum Factor {
    Dense(DenseLu<C64>),
    Sparse(SparseLu<usize, C64>),
}

/// Factorization of a complex square matrix with dense or sparse backend.
pub struct ComplexSolver {
    factor: Factor,
    n: usize,
}

impl ComplexSolver {
    pub fn dense(m: &CMat) -> Option<Self> {
        DenseLu::new(m).map(|lu| ComplexSolver { n: m.nrows(), factor: Factor::Dense(lu) })
    }

    /// Sparse LU from triplets; singularity is detected by a growth probe.
    pub fn sparse(n: usize, triplets: &[(usize, usize, C64)]) -> Option<Self> {
        let t: Vec<_> = triplets.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
        let m = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &t).ok()?;
        let mut colsum = vec![0.0; n];
        for &(_, j, v) in triplets {
            colsum[j] += v.norm();
        }
        let norm1 = colsum.iter().cloned().fold(0.0, f64::max);
        let lu = m.sp_lu().ok()?;
        let solver = ComplexSolver { n, factor: Factor::Sparse(lu) };
        if n == 0 {
            return Some(solver);
        }
        // growth probe: ||x|| ||M|| / ||p|| ~ cond(M) must stay below 1/(n eps)
        let probe = CMat::from_fn(n, 1, |i, _| C64::new(1.0 + (i % 7) as f64 / 7.0, 0.0));
        let x = solver.solve(&probe);
        if x.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return None;
        }
        let growth = norm1_c(&x) * norm1 / norm1_c(&probe);
        if !growth.is_finite() || growth * pivot_threshold(n, 1.0) >= 1.0 {
            return None;
        }
        Some(solver)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.factor, Factor::Sparse(_))
    }

    pub fn solve(&self, r: &CMat) -> CMat {
        match &self.factor {
            Factor::Dense(lu) => lu.solve(r),
            Factor::Sparse(lu) => {
                use faer::prelude::Solve;
                let rhs = faer::Mat::<C64>::from_fn(r.nrows(), r.ncols(), |i, j| r[(i, j)]);
                let x = lu.solve(&rhs);
                CMat::from_fn(r.nrows(), r.ncols(), |i, j| x[(i, j)])
            }
        }
    }

    pub fn solve_transpose(&self, r: &CMat) -> CMat {
        match &self.factor {
            Factor::Dense(lu) => lu.solve_transpose(r),
            Factor::Sparse(lu) => {
                use faer::prelude::Solve;
                let rhs = faer::Mat::<C64>::from_fn(r.nrows(), r.ncols(), |i, j| r[(i, j)]);
                let x = lu.solve_transpose(&rhs);
                CMat::from_fn(r.nrows(), r.ncols(), |i, j| x[(i, j)])
            }
        }
    }
}

fn use_sparse(backend: Backend, n: usize, mats: &[&SysMatrix]) -> bool {
    match backend {
        Backend::Dense => false,
        Backend::Sparse => true,
        Backend::Auto => n > AUTO_DENSE_MAX && mats.iter().any(|m| m.is_sparse()),
    }
}

/// Factorizes `sum_k w_k M_k` for square matrices of equal order.
pub fn factorize_combination(terms: &[(C64, &SysMatrix)], backend: Backend) -> Option<ComplexSolver> {
    let n = terms[0].1.nrows();
    let mats: Vec<&SysMatrix> = terms.iter().map(|t| t.1).collect();
    if use_sparse(backend, n, &mats) {
        let mut t = Vec::new();
        for (w, m) in terms {
            t.extend(m.triplets().into_iter().map(|(i, j, v)| (i, j, *w * v)));
        }
        ComplexSolver::sparse(n, &t)
    } else {
        let mut m = CMat::zeros(n, n);
        for (w, mat) in terms {
            m += to_complex(&mat.to_dense()) * *w;
        }
        ComplexSolver::dense(&m)
    }
}

/// Factorization of `sigma E - A`, reusable for plain and transposed solves.
pub struct ShiftedSolver {
    sigma: C64,
    solver: ComplexSolver,
}

impl ShiftedSolver {
    pub fn new(system: &DescriptorSystem, sigma: C64) -> Result<Self> {
        Self::with_backend(system, sigma, Backend::Auto)
    }

    pub fn with_backend(system: &DescriptorSystem, sigma: C64, backend: Backend) -> Result<Self> {
        system.check_dimensions()?;
        let solver = factorize_combination(&[(sigma, &system.e), (C64::new(-1.0, 0.0), &system.a)], backend)
            .ok_or(Error::SingularShift(sigma))?;
        Ok(ShiftedSolver { sigma, solver })
    }

    pub fn sigma(&self) -> C64 {
        self.sigma
    }

    /// `(sigma E - A)^-1 R`.
    pub fn solve(&self, r: &CMat) -> CMat {
        self.solver.solve(r)
    }

    /// `(sigma E - A)^-T R`.
    pub fn solve_transpose(&self, r: &CMat) -> CMat {
        self.solver.solve_transpose(r)
    }
}

/// `(sigma E - A)^-1 R`.
pub fn solve_shifted(system: &DescriptorSystem, sigma: C64, r: &CMat) -> Result<CMat> {
    check_rows(system, r)?;
    Ok(ShiftedSolver::new(system, sigma)?.solve(r))
}

/// `(sigma E - A)^-T R`.
pub fn solve_shifted_adjoint(system: &DescriptorSystem, sigma: C64, r: &CMat) -> Result<CMat> {
    check_rows(system, r)?;
    Ok(ShiftedSolver::new(system, sigma)?.solve_transpose(r))
}

fn check_rows(system: &DescriptorSystem, r: &CMat) -> Result<()> {
    if r.nrows() != system.order() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} rows, system order is {}",
            r.nrows(),
            system.order()
        )));
    }
    Ok(())
}

/// Eigenvalue with bi-normalized left and right eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenTriple {
    pub lambda: C64,
    /// Left eigenvector: `y^* A = lambda y^* E`.
    pub y: CVec,
    /// Right eigenvector: `A z = lambda E z`.
    pub z: CVec,
}

/// Generalized eigenvalues of `A x = lambda E x` (infinite ones reported as `inf`).
pub fn generalized_eigenvalues(e: &RMat, a: &RMat) -> Result<Vec<C64>> {
    let g = lapack_ffi::ggev(a, e, false)?;
    Ok((0..a.nrows())
        .map(|j| {
            if lapack_ffi::is_infinite(g.alphar[j], g.alphai[j], g.beta[j]) {
                C64::new(f64::INFINITY, 0.0)
            } else {
                C64::new(g.alphar[j], g.alphai[j]) / g.beta[j]
            }
        })
        .collect())
}

fn lex(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Eigen-triples of a small real pencil with `y_i^* E z_j = delta_ij`, sorted by `(Re, Im)`.
pub fn eig_pencil(e: &RMat, a: &RMat) -> Result<Vec<EigenTriple>> {
    let r = a.nrows();
    if e.shape() != (r, r) || a.ncols() != r {
        return Err(Error::DimensionMismatch("eig_pencil needs square matrices of equal order".into()));
    }
    if DenseLu::new(e).is_none() {
        return Err(Error::SingularReducedE);
    }
    let g = lapack_ffi::ggev(a, e, true)?;
    let ec = to_complex(e);
    let enorm = e.norm();
    let col = |m: &RMat, j: usize| CVec::from_iterator(r, m.column(j).iter().map(|v| C64::new(*v, 0.0)));
    let mut out = Vec::with_capacity(r);
    let mut j = 0;
    while j < r {
        if lapack_ffi::is_infinite(g.alphar[j], g.alphai[j], g.beta[j]) {
            return Err(Error::SingularReducedE);
        }
        let lambda = C64::new(g.alphar[j], g.alphai[j]) / g.beta[j];
        if g.alphai[j] == 0.0 {
            let (mut y, mut z) = (col(&g.vl, j), col(&g.vr, j));
            let d = (y.adjoint() * &ec * &z)[(0, 0)].re;
            if d.abs() < 1e-12 * enorm * y.norm() * z.norm() {
                return Err(Error::DefectivePencil);
            }
            z *= C64::new(d.signum() / d.abs().sqrt(), 0.0);
            y /= C64::new(d.abs().sqrt(), 0.0);
            out.push(EigenTriple { lambda: C64::new(lambda.re, 0.0), y, z });
            j += 1;
        } else {
            let i = C64::new(0.0, 1.0);
            let y = col(&g.vl, j) + col(&g.vl, j + 1) * i;
            let mut z = col(&g.vr, j) + col(&g.vr, j + 1) * i;
            let d = (y.adjoint() * &ec * &z)[(0, 0)];
            if d.norm() < 1e-12 * enorm * y.norm() * z.norm() {
                return Err(Error::DefectivePencil);
            }
            z /= d;
            let lam = if lambda.im > 0.0 { lambda } else { lambda.conj() };
            let (y, z) = if lambda.im > 0.0 { (y, z) } else { (y.map(|v| v.conj()), z.map(|v| v.conj())) };
            out.push(EigenTriple { lambda: lam.conj(), y: y.map(|v| v.conj()), z: z.map(|v| v.conj()) });
            out.push(EigenTriple { lambda: lam, y, z });
            j += 2;
        }
    }
    out.sort_by(|p, q| lex(&p.lambda, &q.lambda));
    Ok(out)
}

/// Real orthonormal basis of the real span of `[Re V, Im V]`.
pub fn orthonormalize(v: &CMat) -> Result<RMat> {
    let mut stack = RMat::zeros(v.nrows(), 2 * v.ncols());
    for j in 0..v.ncols() {
        for i in 0..v.nrows() {
            stack[(i, 2 * j)] = v[(i, j)].re;
            stack[(i, 2 * j + 1)] = v[(i, j)].im;
        }
    }
    Ok(orthonormalize_tracked(&stack)?.0)
}

/// Orthonormal basis `Q` of the columns of `X` plus `R^+` with `X ~ Q R`.
///
/// Columns are kept in order of decreasing singular value, so truncating
/// `Q` to its first `k` columns (and `R^+` likewise) drops the weakest directions.
pub fn orthonormalize_tracked(x: &RMat) -> Result<(RMat, RMat)> {
    if x.ncols() == 0 || x.nrows() == 0 {
        return Err(Error::EmptyBasis);
    }
    let svd = crate::lapack_ffi::svd(x, false)?;
    let smax = svd.s.first().copied().unwrap_or(0.0);
    if !(smax > 0.0) {
        return Err(Error::EmptyBasis);
    }
    let cut = basis_drop_tol(x.nrows(), x.ncols()) * smax;
    let keep: Vec<usize> = (0..svd.s.len()).filter(|&i| svd.s[i] >= cut).collect();
    let mut q = RMat::zeros(x.nrows(), keep.len());
    let mut rpinv = RMat::zeros(x.ncols(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        let mut qi = svd.u.column(i).into_owned();
        let mut vi = svd.vt.row(i).transpose();
        // sign convention: largest-magnitude entry of each basis vector positive
        let imax = qi.iamax();
        if qi[imax] < 0.0 {
            qi.neg_mut();
            vi.neg_mut();
        }
        q.set_column(k, &qi);
        rpinv.set_column(k, &(vi / svd.s[i]));
    }
    Ok((q, rpinv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SparseMatrix;
    use nalgebra::dmatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn sys(e: RMat, a: RMat) -> DescriptorSystem {
        let n = e.nrows();
        DescriptorSystem::from_dense(e, a, RMat::identity(n, 1), RMat::identity(1, n)).unwrap()
    }

    #[test]
    fn identity_pencil_solve() {
        let s = sys(RMat::identity(2, 2), -RMat::identity(2, 2));
        let x = solve_shifted(&s, c(1.0), &CMat::identity(2, 2)).unwrap();
        assert!((x - CMat::identity(2, 2) * c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn singular_e_solve_matches_hand_inverse() {
        let s = sys(dmatrix![1.0, 0.0; 0.0, 0.0], dmatrix![-1.0, 0.0; 0.0, 1.0]);
        let x = solve_shifted(&s, c(2.0), &CMat::from_element(2, 1, c(1.0))).unwrap();
        assert!((x[(0, 0)] - c(1.0 / 3.0)).norm() < 1e-15);
        assert!((x[(1, 0)] - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn adjoint_solve_matches_transpose_oracle() {
        // sigma E - A = [[2, -1], [0, -1]]; its transpose inverse applied to e1 is [1/2, -1/2]
        let s = sys(dmatrix![1.0, 0.0; 0.0, 0.0], dmatrix![-1.0, 1.0; 0.0, 1.0]);
        let mut e1 = CMat::zeros(2, 1);
        e1[(0, 0)] = c(1.0);
        let x = solve_shifted_adjoint(&s, c(1.0), &e1).unwrap();
        assert!((x[(0, 0)] - c(0.5)).norm() < 1e-15);
        assert!((x[(1, 0)] - c(-0.5)).norm() < 1e-15);
    }

    #[test]
    fn symmetric_pencil_adjoint_equals_plain() {
        let e = dmatrix![2.0, 1.0; 1.0, 3.0];
        let a = dmatrix![-4.0, 1.0; 1.0, -5.0];
        let s = sys(e, a);
        let r = CMat::from_fn(2, 2, |i, j| C64::new(i as f64 + 1.0, j as f64));
        let x = solve_shifted(&s, C64::new(0.5, 1.0), &r).unwrap();
        let y = solve_shifted_adjoint(&s, C64::new(0.5, 1.0), &r).unwrap();
        assert!((x - y).norm() < 1e-14);
    }

    #[test]
    fn eigenvalue_shift_is_singular() {
        let s = sys(dmatrix![1.0, 0.0; 0.0, 0.0], dmatrix![-1.0, 0.0; 0.0, 1.0]);
        assert!(matches!(solve_shifted(&s, c(-1.0), &CMat::zeros(2, 1)), Err(Error::SingularShift(_))));
        let sp = DescriptorSystem {
            e: SparseMatrix::from_dense(&s.e.to_dense()).into(),
            a: SparseMatrix::from_dense(&s.a.to_dense()).into(),
            ..s
        };
        assert!(matches!(ShiftedSolver::with_backend(&sp, c(-1.0), Backend::Sparse), Err(Error::SingularShift(_))));
    }

    #[test]
    fn sparse_backend_agrees_with_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 30;
        let a = RMat::from_fn(n, n, |i, j| if i == j { -4.0 } else if (i + 2 * j) % 5 == 0 { rng.random_range(-1.0..1.0) } else { 0.0 });
        let e = RMat::from_fn(n, n, |i, j| if i == j && i % 3 != 0 { 1.0 } else { 0.0 });
        let dense = sys(e.clone(), a.clone());
        let sparse = DescriptorSystem { e: SparseMatrix::from_dense(&e).into(), a: SparseMatrix::from_dense(&a).into(), ..dense.clone() };
        let r = CMat::from_fn(n, 2, |i, j| C64::new((i + j) as f64, 1.0));
        let sigma = C64::new(0.3, 2.0);
        let xd = ShiftedSolver::with_backend(&dense, sigma, Backend::Dense).unwrap();
        let xs = ShiftedSolver::with_backend(&sparse, sigma, Backend::Sparse).unwrap();
        assert!((xd.solve(&r) - xs.solve(&r)).norm() < 1e-10 * xd.solve(&r).norm());
        assert!((xd.solve_transpose(&r) - xs.solve_transpose(&r)).norm() < 1e-10 * xd.solve_transpose(&r).norm());
    }

    #[test]
    fn eig_scalar_and_diagonal() {
        let t = eig_pencil(&dmatrix![1.0], &dmatrix![-2.0]).unwrap();
        assert_eq!(t.len(), 1);
        assert!((t[0].lambda - c(-2.0)).norm() < 1e-15);
        assert!((t[0].y[0] - c(1.0)).norm() < 1e-15 && (t[0].z[0] - c(1.0)).norm() < 1e-15);
        let t = eig_pencil(&RMat::identity(2, 2), &dmatrix![-1.0, 0.0; 0.0, -3.0]).unwrap();
        assert!((t[0].lambda - c(-3.0)).norm() < 1e-15 && (t[1].lambda - c(-1.0)).norm() < 1e-15);
        assert!((t[0].z[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eig_weighted_diagonal_binormalized() {
        let e = dmatrix![2.0, 0.0; 0.0, 1.0];
        let t = eig_pencil(&e, &dmatrix![-2.0, 0.0; 0.0, -3.0]).unwrap();
        assert!((t[0].lambda - c(-3.0)).norm() < 1e-14);
        assert!((t[1].lambda - c(-1.0)).norm() < 1e-14);
        let ec = to_complex(&e);
        for p in &t {
            assert!(((p.y.adjoint() * &ec * &p.z)[(0, 0)] - c(1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn eig_detects_defective_and_singular() {
        let j = dmatrix![-1.0, 1.0; 0.0, -1.0];
        assert!(matches!(eig_pencil(&RMat::identity(2, 2), &j), Err(Error::DefectivePencil)));
        assert!(matches!(eig_pencil(&dmatrix![1.0, 0.0; 0.0, 0.0], &j), Err(Error::SingularReducedE)));
    }

    #[test]
    fn orthonormalize_examples() {
        let q = orthonormalize(&CMat::from_column_slice(2, 1, &[c(1.0), c(0.0)])).unwrap();
        assert_eq!(q, dmatrix![1.0; 0.0]);
        let dup = CMat::from_fn(3, 2, |i, _| c(i as f64 + 1.0));
        assert_eq!(orthonormalize(&dup).unwrap().ncols(), 1);
        let v = CMat::from_column_slice(2, 1, &[C64::new(1.0, 1.0), c(0.0)]);
        assert_eq!(orthonormalize(&v).unwrap().ncols(), 1);
        assert!(matches!(orthonormalize(&CMat::zeros(3, 2)), Err(Error::EmptyBasis)));
    }

    fn random_pencil(seed: u64, r: usize) -> (RMat, RMat) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = RMat::from_fn(r, r, |i, j| if i == j { 2.0 } else { 0.0 } + rng.random_range(-0.5..0.5));
        let a = RMat::from_fn(r, r, |_, _| rng.random_range(-1.0..1.0));
        (e, a)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn eig_pencil_biorthonormal(seed in 0u64..10_000, r in 1usize..=20) {
            let (e, a) = random_pencil(seed, r);
            let t = match eig_pencil(&e, &a) { Ok(t) => t, Err(Error::DefectivePencil) => return Ok(()), Err(x) => panic!("{x}") };
            let (ec, ac) = (to_complex(&e), to_complex(&a));
            let y = CMat::from_columns(&t.iter().map(|p| p.y.clone()).collect::<Vec<_>>());
            let z = CMat::from_columns(&t.iter().map(|p| p.z.clone()).collect::<Vec<_>>());
            let g = y.adjoint() * &ec * &z;
            prop_assert!((g - CMat::identity(r, r)).camax() < 1e-8);
            for p in &t {
                let scale = a.norm() + p.lambda.norm() * e.norm();
                prop_assert!((&ac * &p.z - &ec * &p.z * p.lambda).norm() <= 1e-10 * scale * p.z.norm());
                prop_assert!((p.y.adjoint() * &ac - p.y.adjoint() * &ec * p.lambda).norm() <= 1e-10 * scale * p.y.norm());
            }
            for w in t.windows(2) {
                prop_assert!(lex(&w[0].lambda, &w[1].lambda) != std::cmp::Ordering::Greater);
            }
        }

        #[test]
        fn shifted_solve_backward_residual(seed in 0u64..10_000, n in 1usize..30, re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = RMat::from_fn(n, n, |i, j| if i == j && i % 2 == 0 { 1.0 } else { 0.0 });
            let a = RMat::from_fn(n, n, |i, j| if i == j { -3.0 } else { rng.random_range(-1.0..1.0) / n as f64 });
            let s = sys(e.clone(), a.clone());
            let sigma = C64::new(re, im);
            let r = CMat::from_fn(n, 3, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let x = solve_shifted(&s, sigma, &r).unwrap();
            let m = to_complex(&e) * sigma - to_complex(&a);
            prop_assert!((&m * &x - &r).norm() <= 1e-10 * r.norm());
            let y = solve_shifted_adjoint(&s, sigma, &r).unwrap();
            prop_assert!((m.transpose() * &y - &r).norm() <= 1e-10 * r.norm());
        }

        #[test]
        fn orthonormalize_gives_orthonormal_columns(seed in 0u64..10_000, n in 2usize..15, k in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = CMat::from_fn(n, k, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let q = orthonormalize(&v).unwrap();
            prop_assert!((q.tr_mul(&q) - RMat::identity(q.ncols(), q.ncols())).amax() < 1e-12);
            // the span contains Re V and Im V
            let re = crate::matrix::real_part(&v);
            prop_assert!((&q * q.tr_mul(&re) - &re).amax() < 1e-10);
        }
    }
}
