//! Transfer-function evaluation, frequency sweeps and error norms.

use crate::linalg::{generalized_eigenvalues, DenseLu, ShiftedSolver};
use crate::matrix::to_complex;
use crate::spectral::dense_limit;
use crate::system::{DescriptorSystem, MatrixPolynomial, ReducedModel, StateSpace};
use crate::{CMat, Error, RMat, Result, C64};
use rayon::prelude::*;

/// Largest derivative order accepted by [`eval_transfer_derivative`].
pub const MAX_DERIVATIVE_ORDER: usize = 4;

/// Anything with a (matrix-valued) transfer function.
pub trait TransferFunction: Sync {
    fn inputs(&self) -> usize;
    fn outputs(&self) -> usize;
    fn eval(&self, s: C64) -> Result<CMat>;
    /// `d^l/ds^l G(s)` for `1 <= l <= 4`.
    fn eval_derivative(&self, s: C64, ell: usize) -> Result<CMat>;
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

fn check_order(ell: usize) -> Result<()> {
    if ell == 0 || ell > MAX_DERIVATIVE_ORDER {
        return Err(Error::InvalidArgument(format!(
            "derivative order must be in 1..={MAX_DERIVATIVE_ORDER}, got {ell}"
        )));
    }
    Ok(())
}

impl TransferFunction for DescriptorSystem {
    fn inputs(&self) -> usize {
        self.b.ncols()
    }

    fn outputs(&self) -> usize {
        self.c.nrows()
    }

    fn eval(&self, s: C64) -> Result<CMat> {
        let solver = ShiftedSolver::new(self, s)?;
        let x = solver.solve(&to_complex(&self.b));
        Ok(to_complex(&self.c) * x + to_complex(&self.d))
    }

    fn eval_derivative(&self, s: C64, ell: usize) -> Result<CMat> {
        check_order(ell)?;
        let solver = ShiftedSolver::new(self, s)?;
        let mut x = solver.solve(&to_complex(&self.b));
        for _ in 0..ell {
            x = solver.solve(&self.e.mul_c(&x));
        }
        let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
        Ok(to_complex(&self.c) * x * C64::new(sign * factorial(ell), 0.0))
    }
}

fn dense_eval(e: &RMat, a: &RMat, b: &RMat, c: &RMat, s: C64, ell: usize) -> Result<CMat> {
    let m = to_complex(e) * s - to_complex(a);
    let lu = DenseLu::new(&m).ok_or(Error::SingularShift(s))?;
    let ec = to_complex(e);
    let mut x = lu.solve(&to_complex(b));
    for _ in 0..ell {
        x = lu.solve(&(&ec * x));
    }
    let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
    Ok(to_complex(c) * x * C64::new(sign * factorial(ell), 0.0))
}

impl TransferFunction for StateSpace {
    fn inputs(&self) -> usize {
        self.b.ncols()
    }

    fn outputs(&self) -> usize {
        self.c.nrows()
    }

    fn eval(&self, s: C64) -> Result<CMat> {
        dense_eval(&self.e, &self.a, &self.b, &self.c, s, 0)
    }

    fn eval_derivative(&self, s: C64, ell: usize) -> Result<CMat> {
        check_order(ell)?;
        dense_eval(&self.e, &self.a, &self.b, &self.c, s, ell)
    }
}

impl TransferFunction for ReducedModel {
    fn inputs(&self) -> usize {
        self.b.ncols()
    }

    fn outputs(&self) -> usize {
        self.c.nrows()
    }

    fn eval(&self, s: C64) -> Result<CMat> {
        let mut g = dense_eval(&self.e, &self.a, &self.b, &self.c, s, 0)? + to_complex(&self.d);
        if let Some(l) = &self.improper {
            g += to_complex(l) * s;
        }
        Ok(g)
    }

    fn eval_derivative(&self, s: C64, ell: usize) -> Result<CMat> {
        check_order(ell)?;
        let mut g = dense_eval(&self.e, &self.a, &self.b, &self.c, s, ell)?;
        if let (Some(l), 1) = (&self.improper, ell) {
            g += to_complex(l);
        }
        Ok(g)
    }
}

/// `G(s)`.
pub fn eval_transfer(tf: &dyn TransferFunction, s: C64) -> Result<CMat> {
    tf.eval(s)
}

/// `G^(l)(s) = (-1)^l l! C [(sE - A)^-1 E]^l (sE - A)^-1 B`.
pub fn eval_transfer_derivative(tf: &dyn TransferFunction, s: C64, ell: usize) -> Result<CMat> {
    tf.eval_derivative(s, ell)
}

/// Sampled frequency response on a log-spaced grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyResponse {
    pub omegas: Vec<f64>,
    pub values: Vec<CMat>,
    pub magnitudes: Vec<RMat>,
}

/// `npts` log-spaced frequencies from `wmin` to `wmax` (inclusive).
pub fn log_grid(wmin: f64, wmax: f64, npts: usize) -> Result<Vec<f64>> {
    if !(wmin > 0.0 && wmax > wmin && npts >= 2 && wmax.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "frequency grid needs 0 < wmin < wmax and npts >= 2 (got {wmin}, {wmax}, {npts})"
        )));
    }
    let (l0, l1) = (wmin.log10(), wmax.log10());
    Ok((0..npts)
        .map(|k| {
            if k == npts - 1 {
                wmax
            } else if k == 0 {
                wmin
            } else {
                10f64.powf(l0 + (l1 - l0) * k as f64 / (npts - 1) as f64)
            }
        })
        .collect())
}

fn eval_on_axis(tf: &dyn TransferFunction, w: f64) -> Result<CMat> {
    tf.eval(C64::new(0.0, w)).map_err(|e| match e {
        Error::SingularShift(_) => Error::ImaginaryAxisPole(w),
        other => other,
    })
}

/// `G(i w)` on a log grid; points are evaluated in parallel, results keep grid order.
pub fn bode_sample(tf: &dyn TransferFunction, wmin: f64, wmax: f64, npts: usize) -> Result<FrequencyResponse> {
    let omegas = log_grid(wmin, wmax, npts)?;
    let values = omegas.par_iter().map(|&w| eval_on_axis(tf, w)).collect::<Result<Vec<_>>>()?;
    let magnitudes = values.iter().map(|g| g.map(|z| z.norm())).collect();
    Ok(FrequencyResponse { omegas, values, magnitudes })
}

fn largest_singular_value(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

fn check_stable(ss: &StateSpace) -> Result<()> {
    if ss.order() == 0 {
        return Ok(());
    }
    if DenseLu::new(&ss.e).is_none() {
        return Err(Error::SingularReducedE);
    }
    let eig = generalized_eigenvalues(&ss.e, &ss.a)?;
    if eig.iter().any(|l| !(l.re < 0.0)) {
        return Err(Error::UnstableSystem);
    }
    Ok(())
}

/// Solves `T X + X T^H + F = 0` for upper triangular `T` (complex Bartels-Stewart).
fn triangular_lyapunov(t: &CMat, f: &CMat) -> CMat {
    let n = t.nrows();
    let mut x = CMat::zeros(n, n);
    for j in (0..n).rev() {
        let mut rhs = -f.column(j).into_owned();
        for k in (j + 1)..n {
            let w = t[(j, k)].conj();
            rhs -= x.column(k) * w;
        }
        let mut m = t.clone();
        let shift = t[(j, j)].conj();
        for i in 0..n {
            m[(i, i)] += shift;
        }
        let col = m.solve_upper_triangular(&rhs).expect("stable spectrum keeps diagonal nonzero");
        x.set_column(j, &col);
    }
    x
}

/// Controllability Gramian `P` of `E x' = A x + B u`: `A P E^T + E P A^T + B B^T = 0`.
pub fn controllability_gramian(ss: &StateSpace) -> Result<RMat> {
    let n = ss.order();
    let limit = dense_limit();
    if n > limit {
        return Err(Error::DenseLimitExceeded { n, limit });
    }
    check_stable(ss)?;
    if n == 0 {
        return Ok(RMat::zeros(0, 0));
    }
    let lu = DenseLu::new(&ss.e).ok_or(Error::SingularReducedE)?;
    let ah = to_complex(&lu.solve(&ss.a));
    let bh = to_complex(&lu.solve(&ss.b));
    let (u, t) = ah.schur().unpack();
    let ub = u.adjoint() * bh;
    let f = &ub * ub.adjoint();
    let x = triangular_lyapunov(&t, &f);
    let p = &u * x * u.adjoint();
    let p = p.map(|z| z.re);
    Ok((&p + p.transpose()) * 0.5)
}

/// H2 norm of a stable strictly proper realization via the generalized Lyapunov equation.
pub fn h2_norm_sp(ss: &StateSpace) -> Result<f64> {
    let p = controllability_gramian(ss)?;
    if ss.order() == 0 {
        return Ok(0.0);
    }
    let v = (&ss.c * p * ss.c.transpose()).trace();
    Ok(v.max(0.0).sqrt())
}

fn blockdiag(x: &RMat, y: &RMat) -> RMat {
    let mut m = RMat::zeros(x.nrows() + y.nrows(), x.ncols() + y.ncols());
    m.view_mut((0, 0), x.shape()).copy_from(x);
    m.view_mut(x.shape(), y.shape()).copy_from(y);
    m
}

/// Realization of `G - G~` for two strictly proper systems.
pub fn difference(g: &StateSpace, gt: &StateSpace) -> Result<StateSpace> {
    if g.b.ncols() != gt.b.ncols() || g.c.nrows() != gt.c.nrows() {
        return Err(Error::DimensionMismatch("systems have different input/output counts".into()));
    }
    let mut b = RMat::zeros(g.order() + gt.order(), g.b.ncols());
    b.rows_mut(0, g.order()).copy_from(&g.b);
    b.rows_mut(g.order(), gt.order()).copy_from(&gt.b);
    let mut c = RMat::zeros(g.c.nrows(), g.order() + gt.order());
    c.columns_mut(0, g.order()).copy_from(&g.c);
    c.columns_mut(g.order(), gt.order()).copy_from(&(-&gt.c));
    Ok(StateSpace { e: blockdiag(&g.e, &gt.e), a: blockdiag(&g.a, &gt.a), b, c })
}

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1]
const XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gauss_kronrod(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<(f64, f64)> {
    let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
    let fc = f(c)?;
    let mut k = WK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let (f1, f2) = (f(c - h * XK[i])?, f(c + h * XK[i])?);
        k += WK[i] * (f1 + f2);
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    Ok((k * h, ((k - g) * h).abs()))
}

fn adaptive(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64, depth: usize) -> Result<f64> {
    let (v, err) = gauss_kronrod(f, a, b)?;
    if err <= tol || depth == 0 {
        return Ok(v);
    }
    let m = (a + b) / 2.0;
    Ok(adaptive(f, a, m, tol / 2.0, depth - 1)? + adaptive(f, m, b, tol / 2.0, depth - 1)?)
}

/// `(1/pi) int_0^inf ||H(i w)||_F^2 dw` by adaptive Gauss-Kronrod on `u = log(w)`.
fn h2_squared_quadrature(h: &StateSpace, ref_sq: f64) -> Result<f64> {
    let eig = generalized_eigenvalues(&h.e, &h.a)?;
    let mags: Vec<f64> = eig.iter().map(|l| l.norm()).filter(|m| *m > 0.0 && m.is_finite()).collect();
    let lo = mags.iter().cloned().fold(f64::INFINITY, f64::min).min(1.0) * 1e-6;
    let hi = mags.iter().cloned().fold(0.0, f64::max).max(1.0) * 1e6;
    let integrand = |u: f64| -> Result<f64> {
        let w = u.exp();
        Ok(h.eval(C64::new(0.0, w))?.norm_squared() * w)
    };
    // [0, lo] and [hi, inf) by the low/high-frequency limits of ||H||^2
    let h0 = h.eval(C64::new(0.0, 0.0)).map(|m| m.norm_squared()).unwrap_or(0.0);
    let hhi = h.eval(C64::new(0.0, hi))?.norm_squared() * hi * hi;
    let mut total = h0 * lo + hhi / hi;
    let (ulo, uhi) = (lo.ln(), hi.ln());
    let panels = ((uhi - ulo) / 0.5).ceil() as usize;
    let tol = 1e-10 * ref_sq.max(f64::MIN_POSITIVE);
    let pieces: Vec<f64> = (0..panels)
        .into_par_iter()
        .map(|k| {
            let a = ulo + (uhi - ulo) * k as f64 / panels as f64;
            let b = ulo + (uhi - ulo) * (k + 1) as f64 / panels as f64;
            adaptive(&integrand, a, b, tol / panels as f64, 30)
        })
        .collect::<Result<_>>()?;
    total += pieces.iter().sum::<f64>();
    Ok(total / std::f64::consts::PI)
}

/// H2 norm of `G - G~` for stable strictly proper realizations.
///
/// The Gramian formula squares the error and loses everything below
/// `sqrt(eps) * ||G||`; when it reports such a small value the norm is
/// recomputed by quadrature of `||G(i w) - G~(i w)||_F^2`.
pub fn h2_error_sp(g: &StateSpace, gt: &StateSpace) -> Result<f64> {
    let h = difference(g, gt)?;
    let ng = h2_norm_sp(g)?;
    let ngt = h2_norm_sp(gt)?;
    let reference = ng * ng + ngt * ngt;
    let p = controllability_gramian(&h)?;
    let v = (&h.c * p * h.c.transpose()).trace().max(0.0);
    if v > 1e-6 * reference {
        return Ok(v.sqrt());
    }
    Ok(h2_squared_quadrature(&h, reference.max(v))?.max(0.0).sqrt())
}

/// H2 error together with the reason it is infinite, if it is.
#[derive(Clone, Debug, PartialEq)]
pub struct H2Error {
    pub value: f64,
    pub reason: Option<String>,
}

/// H2 error of a reduced model against a full model given by its split.
///
/// Mismatched polynomial parts make the error improper, reported as `+inf`.
pub fn h2_error(full_sp: &StateSpace, full_poly: &MatrixPolynomial, reduced: &ReducedModel) -> Result<H2Error> {
    let reduced_poly = reduced_polynomial(reduced)?;
    let diff = full_poly.rel_diff(&reduced_poly);
    if diff > 1e-8 {
        return Ok(H2Error {
            value: f64::INFINITY,
            reason: Some(format!("polynomial parts differ (relative coefficient mismatch {diff:.3e})")),
        });
    }
    let value = h2_error_sp(full_sp, &reduced.strictly_proper()?)?;
    Ok(H2Error { value, reason: None })
}

/// Polynomial part of a reduced model, including the `s L~` term.
pub fn reduced_polynomial(model: &ReducedModel) -> Result<MatrixPolynomial> {
    if let Some(p) = &model.polynomial_part {
        return Ok(p.clone());
    }
    if DenseLu::new(&model.e).is_some() {
        let mut coeffs = vec![model.d.clone()];
        if let Some(l) = &model.improper {
            coeffs.push(l.clone());
        }
        return MatrixPolynomial::new(model.d.nrows(), model.d.ncols(), coeffs);
    }
    let w = crate::spectral::weierstrass(&model.to_system())?;
    Ok(crate::spectral::split_transfer(&model.to_system(), &w)?.1)
}

/// Sampled H-infinity error: a lower bound on `sup_w sigma_max(G(iw) - G~(iw))`.
#[derive(Clone, Debug, PartialEq)]
pub struct HinfEstimate {
    pub value: f64,
    /// `value / max_w sigma_max(G(i w))`.
    pub relative: f64,
    pub omega_at_max: f64,
    pub omegas: Vec<f64>,
    pub errors: Vec<f64>,
    /// The maximum sits at the top of the grid and is still growing there.
    pub divergent: bool,
}

pub fn hinf_estimate(
    full: &dyn TransferFunction,
    reduced: &dyn TransferFunction,
    wmin: f64,
    wmax: f64,
    npts: usize,
) -> Result<HinfEstimate> {
    let omegas = log_grid(wmin, wmax, npts)?;
    let pairs = omegas
        .par_iter()
        .map(|&w| {
            let g = eval_on_axis(full, w)?;
            let gt = eval_on_axis(reduced, w)?;
            Ok((largest_singular_value(&(&g - gt)), largest_singular_value(&g)))
        })
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let gmax = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    let (imax, value) = errors
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, &e)| if e > acc.1 { (i, e) } else { acc });
    let last = errors.len() - 1;
    let divergent = value > 0.0 && imax == last && errors[last] > errors[last - 1] * (1.0 + 1e-6);
    Ok(HinfEstimate {
        value,
        relative: if gmax > 0.0 { value / gmax } else { value },
        omega_at_max: omegas[imax],
        omegas,
        errors,
        divergent,
    })
}
