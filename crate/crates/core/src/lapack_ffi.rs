//! Thin safe wrappers over the few LAPACK drivers nalgebra does not expose.

use crate::{Error, RMat, Result};

/// Relative cutoff below which a QZ eigenvalue pair counts as infinite.
pub(crate) const INFINITE_BETA_TOL: f64 = 1e-12;

pub(crate) fn is_infinite(alpha_re: f64, alpha_im: f64, beta: f64) -> bool {
    let a = alpha_re.hypot(alpha_im);
    beta.abs() <= INFINITE_BETA_TOL * (a + beta.abs())
}

/// `|beta| / (|alpha| + |beta|)`, zero for infinite and one for zero eigenvalues.
pub(crate) fn finiteness(alpha_re: f64, alpha_im: f64, beta: f64) -> f64 {
    let den = alpha_re.hypot(alpha_im) + beta.abs();
    if den == 0.0 {
        0.0
    } else {
        beta.abs() / den
    }
}

pub(crate) struct Qz {
    /// Upper quasi-triangular `Q^T A Z`.
    pub s: RMat,
    /// Upper triangular `Q^T E Z`.
    pub t: RMat,
    pub q: RMat,
    pub z: RMat,
    /// Number of leading (finite) eigenvalues.
    pub sdim: usize,
}

/// Real QZ of the pair `(A, E)` reordered so that all pairs except the `n_inf` ones with the
/// smallest [`finiteness`] lead. `sdim` reports how many pairs LAPACK actually moved to the top.
pub(crate) fn qz_finite_first(a: &RMat, e: &RMat, n_inf: usize) -> Result<Qz> {
    let n = a.nrows();
    let mut s = a.clone();
    let mut t = e.clone();
    let mut q = RMat::zeros(n, n);
    let mut z = RMat::zeros(n, n);
    let (mut alphar, mut alphai, mut beta) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut sdim = 0i32;
    let mut info = 0i32;
    let mut bwork = vec![0i32; n];
    let ld = n.max(1) as i32;
    let lwork = (8 * n + 16).max(4 * n + 16);
    let mut work = vec![0.0; lwork];
    unsafe {
        lapack::dgges(
            b'V', b'V', b'N', None, n as i32, s.as_mut_slice(), ld, t.as_mut_slice(), ld, &mut sdim,
            &mut alphar, &mut alphai, &mut beta, q.as_mut_slice(), ld, z.as_mut_slice(), ld, &mut work,
            lwork as i32, &mut bwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dgges", info });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| finiteness(alphar[i], alphai[i], beta[i]).total_cmp(&finiteness(alphar[j], alphai[j], beta[j])));
    let mut select = vec![1i32; n];
    for &k in order.iter().take(n_inf) {
        select[k] = 0;
    }
    // a complex pair must move as a unit; a split pair stays finite and shows up in `sdim`
    let mut k = 0;
    while k < n {
        if alphai[k] != 0.0 && k + 1 < n {
            let keep = (select[k] | select[k + 1]) as i32;
            select[k] = keep;
            select[k + 1] = keep;
            k += 2;
        } else {
            k += 1;
        }
    }
    let mut m = 0i32;
    let (mut pl, mut pr, mut dif) = ([0.0], [0.0], [0.0; 2]);
    let mut iwork = vec![0i32; n + 6];
    let liwork = iwork.len() as i32;
    unsafe {
        lapack::dtgsen(
            &[0], &[1], &[1], &select, n as i32, s.as_mut_slice(), ld, t.as_mut_slice(), ld, &mut alphar,
            &mut alphai, &mut beta, q.as_mut_slice(), ld, z.as_mut_slice(), ld, &mut m, &mut pl, &mut pr,
            &mut dif, &mut work, lwork as i32, &mut iwork, liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dtgsen", info });
    }
    Ok(Qz { s, t, q, z, sdim: m as usize })
}

/// Singular value decomposition `X = U diag(s) V^T` with `s` in decreasing order.
pub(crate) struct Svd {
    pub u: RMat,
    pub s: Vec<f64>,
    pub vt: RMat,
}

/// LAPACK `dgesvd`. Thin factors unless `full_v`, in which case `vt` is square.
pub(crate) fn svd(x: &RMat, full_v: bool) -> Result<Svd> {
    let (m, n) = x.shape();
    let k = m.min(n);
    if k == 0 {
        let vn = if full_v { n } else { 0 };
        return Ok(Svd { u: RMat::zeros(m, 0), s: Vec::new(), vt: RMat::identity(vn, n) });
    }
    let mut a = x.clone();
    let vrows = if full_v { n } else { k };
    let mut s = vec![0.0; k];
    let mut u = RMat::zeros(m, k);
    let mut vt = RMat::zeros(vrows, n);
    let lwork = (3 * k + m.max(n)).max(5 * k) * 4 + 64;
    let mut work = vec![0.0; lwork];
    let mut info = 0i32;
    unsafe {
        lapack::dgesvd(
            b'S',
            if full_v { b'A' } else { b'S' },
            m as i32,
            n as i32,
            a.as_mut_slice(),
            m as i32,
            &mut s,
            u.as_mut_slice(),
            m as i32,
            vt.as_mut_slice(),
            vrows as i32,
            &mut work,
            lwork as i32,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dgesvd", info });
    }
    Ok(Svd { u, s, vt })
}

pub(crate) struct Ggev {
    pub alphar: Vec<f64>,
    pub alphai: Vec<f64>,
    pub beta: Vec<f64>,
    pub vl: RMat,
    pub vr: RMat,
}

/// Generalized eigenvalues and left/right eigenvectors of `A x = lambda E x`.
pub(crate) fn ggev(a: &RMat, e: &RMat, vectors: bool) -> Result<Ggev> {
    let n = a.nrows();
    let mut aa = a.clone();
    let mut ee = e.clone();
    let (mut alphar, mut alphai, mut beta) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let nv = if vectors { n } else { 1 };
    let mut vl = RMat::zeros(nv, nv.max(n));
    let mut vr = RMat::zeros(nv, nv.max(n));
    let job = if vectors { b'V' } else { b'N' };
    let mut info = 0;
    let ld = n.max(1) as i32;
    let ldv = nv.max(1) as i32;
    let mut work = vec![0.0; 1];
    unsafe {
        lapack::dggev(job, job, n as i32, aa.as_mut_slice(), ld, ee.as_mut_slice(), ld, &mut alphar, &mut alphai, &mut beta, vl.as_mut_slice(), ldv, vr.as_mut_slice(), ldv, &mut work, -1, &mut info);
    }
    let lwork = (work[0] as usize).max(8 * n + 16);
    let mut work = vec![0.0; lwork];
    unsafe {
        lapack::dggev(job, job, n as i32, aa.as_mut_slice(), ld, ee.as_mut_slice(), ld, &mut alphar, &mut alphai, &mut beta, vl.as_mut_slice(), ldv, vr.as_mut_slice(), ldv, &mut work, lwork as i32, &mut info);
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dggev", info });
    }
    Ok(Ggev { alphar, alphai, beta, vl, vr })
}
