//! Dense Weierstrass form, spectral projectors and the `G = G_sp + P` split.

use crate::lapack_ffi::{self, qz_finite_first};
use crate::linalg::DenseLu;
use crate::matrix::to_complex;
use crate::system::{DescriptorSystem, MatrixPolynomial, StateSpace};
use crate::{Error, RMat, Result, C64};

/// Default largest order accepted by the dense spectral path.
pub const DEFAULT_DENSE_LIMIT: usize = 2000;

/// Dense limit, overridable through the `DMOR_DENSE_LIMIT` environment variable.
pub fn dense_limit() -> usize {
    std::env::var("DMOR_DENSE_LIMIT")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_LIMIT)
}

/// `E = S diag(I, N) T^-1`, `A = S diag(J, I) T^-1` with spectral projectors.
#[derive(Clone, Debug)]
pub struct WeierstrassData {
    pub s: RMat,
    pub t: RMat,
    pub j: RMat,
    pub n: RMat,
    pub n_f: usize,
    pub n_inf: usize,
    pub p_l: RMat,
    pub p_r: RMat,
    pub nu: usize,
    /// `S^-1`
    s_inv: RMat,
    /// Orthonormal complement of the finite left deflating subspace.
    q2: RMat,
    e11: RMat,
    a11: RMat,
}

fn regularity_probe(e: &RMat, a: &RMat) -> bool {
    let scale = (a.norm() / e.norm().max(f64::MIN_POSITIVE)).clamp(1e-6, 1e6);
    let shifts = [C64::new(0.7137, 0.3301), C64::new(-1.2345, 2.1119), C64::new(3.3071, -0.7719)];
    let (ec, ac) = (to_complex(e), to_complex(a));
    shifts.iter().any(|s| DenseLu::new(&(&ec * (*s * scale) - &ac)).is_some())
}

const RANK_TOL: f64 = 1e-10;

/// Left singular vectors belonging to the `k` largest singular values of `x`.
fn orth_top(x: &RMat, k: usize) -> Result<RMat> {
    if k == 0 {
        return Ok(RMat::zeros(x.nrows(), 0));
    }
    Ok(lapack_ffi::svd(x, false)?.u.columns(0, k).into_owned())
}

/// Orthonormal basis of the right deflating subspace at infinity from the Wong sequence
/// `W_0 = 0`, `W_k+1 = { x : E x in A W_k }`, graded so that the first `levels[0]` columns
/// span `W_1`, the next `levels[1]` extend it to `W_2`, and so on.
fn infinite_chain(e: &RMat, a: &RMat) -> Result<(RMat, Vec<usize>)> {
    let n = e.nrows();
    let e = e / e.norm().max(f64::MIN_POSITIVE);
    let a = a / a.norm().max(f64::MIN_POSITIVE);
    let mut w = RMat::zeros(n, 0);
    let mut levels = Vec::new();
    while w.ncols() < n {
        let k = w.ncols();
        // kernel of [E, -A W] from the trailing rows of a full V^T
        let mut m = RMat::zeros(n, n + k);
        m.columns_mut(0, n).copy_from(&e);
        m.columns_mut(n, k).copy_from(&(-(&a * &w)));
        let svd = lapack_ffi::svd(&m, true)?;
        let smax = svd.s.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
        let rank = svd.s.iter().filter(|&&v| v > RANK_TOL * smax).count();
        let dim = n + k - rank;
        // x -> [x; y] is injective on the kernel, so its dimension is dim W_k+1
        let grow = dim.saturating_sub(k).min(n - k);
        if grow == 0 {
            break;
        }
        let x = RMat::from_fn(n, dim, |i, j| svd.vt[(rank + j, i)]);
        let x = orth_top(&x, dim.min(n))?;
        let ext = orth_top(&(&x - &w * w.tr_mul(&x)), grow)?;
        let mut next = RMat::zeros(n, k + grow);
        next.columns_mut(0, k).copy_from(&w);
        next.columns_mut(k, grow).copy_from(&ext);
        w = next;
        levels.push(grow);
    }
    Ok((w, levels))
}

/// Dimension of the right deflating subspace at infinity (rank decisions on the Wong sequence).
pub fn infinite_dimension(e: &RMat, a: &RMat) -> Result<usize> {
    Ok(infinite_chain(e, a)?.0.ncols())
}

/// Weierstrass canonical form via ordered QZ and a generalized Sylvester solve.
pub fn weierstrass(system: &DescriptorSystem) -> Result<WeierstrassData> {
    system.check_dimensions()?;
    let n = system.order();
    let limit = dense_limit();
    if n > limit {
        return Err(Error::DenseLimitExceeded { n, limit });
    }
    let e = system.e.to_dense();
    let a = system.a.to_dense();
    if n > 0 && !regularity_probe(&e, &a) {
        return Err(Error::SingularPencil);
    }
    // the infinite part comes from rank decisions on the Wong sequence; QZ only supplies
    // the finite deflating subspaces
    let (v_inf, levels) = infinite_chain(&e, &a)?;
    let ni = v_inf.ncols();
    let qz = qz_finite_first(&a, &e, ni)?;
    if qz.sdim + ni != n {
        return Err(Error::Lapack { routine: "dtgsen (finite/infinite split)", info: (n + 3) as i32 });
    }
    let nf = qz.sdim;
    let z1 = qz.z.columns(0, nf).into_owned();
    let e11 = qz.t.view((0, 0), (nf, nf)).into_owned();
    let a11 = qz.s.view((0, 0), (nf, nf)).into_owned();
    let lu11 = DenseLu::new(&e11).ok_or(Error::SingularPencil)?;
    let j = lu11.solve(&a11);

    // S = [E Z1, A V_inf], T = [Z1, V_inf], N from E V_inf = A V_inf N
    let av = &a * &v_inf;
    let mut nmat = if ni > 0 {
        let qr = av.clone().qr();
        let r = qr.r();
        let rlu = DenseLu::new(&r).ok_or(Error::SingularPencil)?;
        rlu.solve(&qr.q().tr_mul(&(&e * &v_inf)))
    } else {
        RMat::zeros(0, 0)
    };
    // W_k is mapped into W_k-1, so N is block strictly upper triangular in the graded basis
    let mut level_of = Vec::with_capacity(ni);
    for (l, &size) in levels.iter().enumerate() {
        level_of.extend(std::iter::repeat_n(l, size));
    }
    for c in 0..ni {
        for rr in 0..ni {
            if level_of[rr] >= level_of[c] {
                nmat[(rr, c)] = 0.0;
            }
        }
    }
    let mut s = RMat::zeros(n, n);
    s.columns_mut(0, nf).copy_from(&(&e * &z1));
    s.columns_mut(nf, ni).copy_from(&av);
    let mut t = RMat::zeros(n, n);
    t.columns_mut(0, nf).copy_from(&z1);
    t.columns_mut(nf, ni).copy_from(&v_inf);
    let id = RMat::identity(n, n);
    let s_inv = DenseLu::new(&s).ok_or(Error::SingularPencil)?.solve(&id);
    let t_inv = DenseLu::new(&t).ok_or(Error::SingularPencil)?.solve(&id);
    let p_l = s.columns(0, nf) * s_inv.rows(0, nf);
    let p_r = t.columns(0, nf) * t_inv.rows(0, nf);
    let nu = nilpotency_index(&nmat);
    let q2 = qz.q.columns(nf, ni).into_owned();
    Ok(WeierstrassData { s, t, j, n: nmat, n_f: nf, n_inf: ni, p_l, p_r, nu, s_inv, q2, e11, a11 })
}

fn nilpotency_index(n: &RMat) -> usize {
    let k = n.nrows();
    if k == 0 {
        return 0;
    }
    let mut p = RMat::identity(k, k);
    for nu in 1..=k {
        p = &p * n;
        if p.iter().all(|v| *v == 0.0) {
            return nu;
        }
    }
    k
}

/// Orthonormal `(W_inf, V_inf)` spanning `Im(I - P_l^T)` and `Im(I - P_r)`.
pub fn infinite_deflating_bases(w: &WeierstrassData) -> (RMat, RMat) {
    let n = w.n_f + w.n_inf;
    if w.n_inf == 0 {
        return (RMat::zeros(n, 0), RMat::zeros(n, 0));
    }
    (w.q2.clone(), w.t.columns(w.n_f, w.n_inf).into_owned())
}

/// Strictly proper realization of order `n_f` and the polynomial part `P_0..P_{nu-1}`.
pub fn split_transfer(system: &DescriptorSystem, w: &WeierstrassData) -> Result<(StateSpace, MatrixPolynomial)> {
    system.check_dimensions()?;
    let (nf, ni) = (w.n_f, w.n_inf);
    if nf + ni != system.order() {
        return Err(Error::DimensionMismatch("Weierstrass data does not match the system order".into()));
    }
    let sb = &w.s_inv * &system.b;
    let b1 = &w.e11 * sb.rows(0, nf);
    let c1 = &system.c * w.t.columns(0, nf);
    let finite = StateSpace { e: w.e11.clone(), a: w.a11.clone(), b: b1, c: c1 };

    let (p, m) = (system.outputs(), system.inputs());
    let mut coeffs = Vec::new();
    let mut reference = system.d.amax();
    if ni > 0 {
        let t2 = w.t.columns(nf, ni).into_owned();
        let mut x = sb.rows(nf, ni).into_owned();
        let ct2 = &system.c * &t2;
        for k in 0..w.nu {
            if k > 0 {
                x = &w.n * x;
            }
            let term = -(&ct2 * &x);
            reference = reference.max(ct2.amax() * x.amax());
            coeffs.push(term);
        }
    }
    if coeffs.is_empty() {
        coeffs.push(RMat::zeros(p, m));
    }
    coeffs[0] += &system.d;
    let mut poly = MatrixPolynomial::new(p, m, coeffs)?;
    trim_against(&mut poly, reference);
    Ok((finite, poly))
}

/// Drops trailing coefficients that are round-off relative to `reference`.
pub(crate) fn trim_against(poly: &mut MatrixPolynomial, reference: f64) {
    let keep = poly
        .coeffs()
        .iter()
        .rposition(|c| c.amax() > 1e-10 * reference)
        .map(|k| k + 1)
        .unwrap_or(0);
    let coeffs = poly.coeffs()[..keep].to_vec();
    *poly = MatrixPolynomial::new(poly.rows(), poly.cols(), coeffs).expect("same shape");
}

/// Pencil index `nu` (0 iff `E` is nonsingular).
pub fn pencil_index(w: &WeierstrassData) -> usize {
    w.nu
}
