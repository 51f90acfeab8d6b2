//! IRKA-style fixed-point iteration for descriptor systems and first-order H2 optimality checks.

use crate::analysis::TransferFunction;
use crate::interpolation::{
    paired_bases, realify, reduce_dae, tangential_blocks, verify_interpolation_with_tol,
    InterpolationReport,
};
use crate::linalg::{eig_pencil, ShiftedSolver};
use crate::matrix::{real_part, to_complex};
use crate::spectral::WeierstrassData;
use crate::system::{conjugate_close, DescriptorSystem, InterpolationData, Method, ReducedModel, StateSpace};
use crate::{CVec, Error, RMat, Result, C64};
use pathfinding::prelude::{kuhn_munkres_min, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Iteration settings. `initial = None` selects the default seeding policy.
#[derive(Clone, Debug)]
pub struct IrkaConfig {
    pub r: usize,
    pub max_iter: usize,
    pub shift_tol: f64,
    pub initial: Option<InterpolationData>,
    pub defect_retry: f64,
}

impl IrkaConfig {
    pub fn new(r: usize) -> Self {
        IrkaConfig { r, max_iter: 100, shift_tol: 1e-6, initial: None, defect_retry: 1e-8 }
    }

    pub fn with_initial(mut self, data: InterpolationData) -> Self {
        self.initial = Some(data);
        self
    }

    fn check(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::InvalidArgument("reduced order r must be at least 1".into()));
        }
        if !(self.shift_tol > 0.0 && self.defect_retry > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidArgument("tolerances and max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct IrkaResult {
    pub model: ReducedModel,
    pub converged: bool,
    pub iterations: usize,
    /// Shift multiset per iteration, starting with the initial one.
    pub shift_history: Vec<Vec<C64>>,
    pub final_shift_change: f64,
}

/// One flavour of the iteration: how to build the strictly proper reduced quadruple
/// used for the eigen-update, and how to assemble the final model.
pub(crate) trait IrkaStep {
    fn build(&self, data: &InterpolationData) -> Result<StateSpace>;
    fn finalize(&self, data: &InterpolationData, quad: StateSpace) -> Result<ReducedModel>;
}

/// `max_i |new_i - old_pi(i)| / |old_pi(i)|` under the assignment `pi` minimizing the summed relative change.
pub fn shift_change(old: &[C64], new: &[C64]) -> f64 {
    if old.len() != new.len() {
        return f64::INFINITY;
    }
    if old.is_empty() {
        return 0.0;
    }
    let (change, _) = matched_change(old, new);
    change
}

/// Relative shift change and the matching `new[i] <-> old[assign[i]]`; equal, nonempty lengths.
fn matched_change(old: &[C64], new: &[C64]) -> (f64, Vec<usize>) {
    let relc = |i: usize, j: usize| (new[i] - old[j]).norm() / old[j].norm().max(f64::MIN_POSITIVE);
    // integer costs at 1e-12 resolution, capped so the sums cannot overflow
    let rows: Vec<Vec<i64>> = (0..new.len())
        .map(|i| (0..old.len()).map(|j| (relc(i, j).min(1e3) * 1e12).round() as i64).collect())
        .collect();
    let weights = Matrix::from_rows(rows).expect("rectangular cost matrix");
    let (_, assign) = kuhn_munkres_min(&weights);
    let change = assign.iter().enumerate().map(|(i, &j)| relc(i, j)).fold(0.0, f64::max);
    (change, assign)
}

/// Iterations without a new smallest shift change before the update step is halved.
const STALL_WINDOW: usize = 8;
/// Consecutive direction reversals without halving the change before the step is halved.
const REVERSAL_WINDOW: usize = 3;
const MIN_STEP: f64 = 1.0 / 16.0;
/// Extra updates taken after the shift tolerance is met.
const POLISH_STEPS: usize = 3;

/// Under-relaxation of the shift update. Period-2 cycles and slowly contracting oscillations of
/// the plain update are common on lightly damped systems; the damped map has the same fixed points.
struct Relaxation {
    step: f64,
    since_best: usize,
    reversals: usize,
    prev: Option<(f64, Vec<C64>)>,
}

impl Relaxation {
    fn new() -> Self {
        Relaxation { step: 1.0, since_best: 0, reversals: 0, prev: None }
    }

    fn observe(&mut self, used: &InterpolationData, next: &InterpolationData, change: f64, new_best: bool) {
        let (_, assign) = matched_change(&used.points, &next.points);
        let mut moves = vec![C64::new(0.0, 0.0); assign.len()];
        for (i, &j) in assign.iter().enumerate() {
            moves[j] = next.points[i] - used.points[j];
        }
        let reversed = self.prev.as_ref().is_some_and(|(c, d)| {
            change > 0.5 * c && d.iter().zip(&moves).map(|(a, b)| (a.conj() * b).re).sum::<f64>() < 0.0
        });
        self.since_best = if new_best { 0 } else { self.since_best + 1 };
        self.reversals = if reversed { self.reversals + 1 } else { 0 };
        if self.since_best >= STALL_WINDOW || self.reversals >= REVERSAL_WINDOW {
            self.step = (self.step / 2.0).max(MIN_STEP);
            self.since_best = 0;
            self.reversals = 0;
        }
        self.prev = Some((change, moves));
    }

    /// Moves each matched shift a fraction `step` of the way from `used` to `next`, keeping the
    /// directions of `next`.
    fn apply(&self, used: &InterpolationData, next: InterpolationData) -> InterpolationData {
        if self.step >= 1.0 {
            return next;
        }
        let Some(partners) = next.conjugate_partners() else {
            return next;
        };
        let (_, assign) = matched_change(&used.points, &next.points);
        let mut points: Vec<C64> = assign
            .iter()
            .enumerate()
            .map(|(i, &j)| used.points[j] + (next.points[i] - used.points[j]) * self.step)
            .collect();
        for i in 0..points.len() {
            let k = partners[i];
            if k == i {
                points[i].im = 0.0;
            } else if k > i {
                points[k] = points[i].conj();
            }
        }
        InterpolationData { points, ..next }
    }
}

/// `sigma_i <- -lambda_i`, `b_i <- B~^T conj(y_i)`, `c_i <- C~ z_i`.
fn eigen_update(quad: &StateSpace) -> Result<InterpolationData> {
    let triples = eig_pencil(&quad.e, &quad.a)?;
    let bc = to_complex(&quad.b);
    let cc = to_complex(&quad.c);
    let mut points = Vec::with_capacity(triples.len());
    let mut right = Vec::with_capacity(triples.len());
    let mut left = Vec::with_capacity(triples.len());
    for t in &triples {
        points.push(-t.lambda);
        let b: CVec = bc.transpose() * t.y.map(|v| v.conj());
        right.push(b);
        left.push(&cc * &t.z);
    }
    InterpolationData::new(points, right, left)
}

fn perturb(data: &InterpolationData, delta: f64) -> InterpolationData {
    let points = data
        .points
        .iter()
        .map(|&s| if s.im == 0.0 { s * (1.0 + delta) } else { s * C64::new(1.0, delta.copysign(s.im)) })
        .collect();
    InterpolationData { points, ..data.clone() }
}

/// Reflects shifts from mirrored unstable reduced poles back into the right half-plane.
/// Stable iterates are left untouched, so fixed points are unaffected.
fn reflect_into_rhp(mut data: InterpolationData) -> InterpolationData {
    for s in data.points.iter_mut() {
        s.re = s.re.abs();
    }
    data
}

fn retryable(e: &Error) -> bool {
    matches!(e, Error::SingularShift(_) | Error::DefectivePencil | Error::SingularReducedE)
}

const MAX_RETRIES: usize = 4;

/// Build and eigen-update, perturbing the shifts on singular shifts or defective pencils.
fn step_with_retry(step: &dyn IrkaStep, data: &InterpolationData, delta: f64) -> Result<(InterpolationData, InterpolationData)> {
    let mut cur = data.clone();
    let mut last = None;
    for k in 0..=MAX_RETRIES {
        if k > 0 {
            cur = perturb(data, delta * 10f64.powi(k as i32 - 1));
        }
        match step.build(&cur).and_then(|q| eigen_update(&q)) {
            Ok(next) => return Ok((cur, reflect_into_rhp(next))),
            Err(e) if retryable(&e) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or(Error::DefectivePencil))
}

pub(crate) fn run_irka(step: &dyn IrkaStep, system: &DescriptorSystem, config: &IrkaConfig) -> Result<IrkaResult> {
    config.check()?;
    let initial = match &config.initial {
        Some(d) => {
            let d = conjugate_close(d);
            if d.len() != config.r {
                return Err(Error::InvalidArgument(format!(
                    "initial data has {} points after conjugate closure, r = {}",
                    d.len(),
                    config.r
                )));
            }
            d
        }
        None => default_initial(system, config.r)?,
    };
    let mut data = initial;
    let mut history = vec![data.points.clone()];
    let mut best: Option<(f64, InterpolationData)> = None;
    let mut change = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut relaxation = Relaxation::new();
    let mut polished = 0;
    while iterations < config.max_iter {
        let (used, next) = step_with_retry(step, &data, config.defect_retry)?;
        let c = shift_change(&used.points, &next.points);
        if converged {
            // a few extra updates while they still contract
            if c >= change {
                break;
            }
            polished += 1;
        }
        iterations += 1;
        change = c;
        if converged || change <= config.shift_tol {
            data = relaxation.apply(&used, next);
            history.push(data.points.clone());
            converged = true;
            if polished == POLISH_STEPS {
                break;
            }
            continue;
        }
        let new_best = best.as_ref().is_none_or(|(c, _)| change < *c);
        if new_best {
            best = Some((change, next.clone()));
        }
        relaxation.observe(&used, &next, change, new_best);
        data = relaxation.apply(&used, next);
        history.push(data.points.clone());
    }
    if !converged {
        if let Some((c, d)) = best {
            change = c;
            data = d;
        }
    }
    let quad = step.build(&data)?;
    let mut model = step.finalize(&data, quad)?;
    model.provenance.iterations = Some(iterations);
    model.provenance.converged = Some(converged);
    Ok(IrkaResult { model, converged, iterations, shift_history: history, final_shift_change: change })
}

struct DaeStep<'a> {
    system: &'a DescriptorSystem,
    w: &'a WeierstrassData,
}

impl IrkaStep for DaeStep<'_> {
    fn build(&self, data: &InterpolationData) -> Result<StateSpace> {
        let partners = data
            .conjugate_partners()
            .ok_or_else(|| Error::InvalidArgument("interpolation data is not closed under conjugation".into()))?;
        let (vc, wc) = tangential_blocks(self.system, data, Some(&self.w.p_l), Some(&self.w.p_r))?;
        let (xv, _) = realify(&vc, &[], &partners);
        let (xw, _) = realify(&wc, &[], &partners);
        let (v, w, _, _) = paired_bases(&xv, &xw)?;
        let sys = self.system;
        Ok(StateSpace { e: w.tr_mul(&sys.e.mul(&v)), a: w.tr_mul(&sys.a.mul(&v)), b: w.tr_mul(&sys.b), c: &sys.c * &v })
    }

    fn finalize(&self, data: &InterpolationData, _quad: StateSpace) -> Result<ReducedModel> {
        let mut m = reduce_dae(self.system, data, self.w)?;
        m.provenance.method = Method::IrkaDae;
        Ok(m)
    }
}

/// IRKA on the strictly proper part with projected Krylov bases; the final model keeps the
/// polynomial part through the infinite deflating subspaces.
pub fn irka_dae(system: &DescriptorSystem, w: &WeierstrassData, config: &IrkaConfig) -> Result<IrkaResult> {
    if config.r > w.n_f {
        return Err(Error::InvalidArgument(format!("r = {} exceeds the finite order {}", config.r, w.n_f)));
    }
    if w.n_f + w.n_inf != system.order() {
        return Err(Error::DimensionMismatch("Weierstrass data does not match the system".into()));
    }
    run_irka(&DaeStep { system, w }, system, config)
}

/// Residuals of the first-order H2 conditions at the mirrored reduced poles:
/// right and left tangential interpolation plus the bitangential Hermite condition.
pub type OptimalityReport = InterpolationReport;

pub fn check_h2_first_order(full: &dyn TransferFunction, model: &ReducedModel, tol: f64) -> Result<OptimalityReport> {
    let sp = model.strictly_proper()?;
    let data = eigen_update(&sp)?;
    verify_interpolation_with_tol(full, model, &data, &[0, 1], tol)
}

/// Ritz values `mu` of `(sigma0 E - A)^-1 E` below this fraction of the largest are treated as
/// infinite eigenvalues (`mu = 0`) polluted by round-off.
const RITZ_KEEP: f64 = 1e-4;

/// Arnoldi on `(sigma0 E - A)^-1 E`; returns finite Ritz estimates of the pencil eigenvalues.
fn ritz_estimates(system: &DescriptorSystem, k: usize) -> Result<Vec<C64>> {
    let n = system.order();
    let k = k.min(n).max(1);
    let ef = system.e.norm_fro();
    let sigma0 = if ef > 0.0 { (system.a.norm_fro() / ef).max(f64::MIN_POSITIVE) } else { 1.0 };
    let solver = ShiftedSolver::new(system, C64::new(sigma0, 0.0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut q = RMat::zeros(n, k + 1);
    let mut h = RMat::zeros(k + 1, k);
    let v0 = RMat::from_fn(n, 1, |_, _| rng.random_range(-1.0..1.0));
    q.set_column(0, &(v0.column(0) / v0.norm()));
    let mut used = k;
    for j in 0..k {
        let ex = system.e.mul(&q.columns(j, 1).into_owned());
        let mut w = real_part(&solver.solve(&to_complex(&ex)));
        // modified Gram-Schmidt with one reorthogonalization pass
        for _ in 0..2 {
            for i in 0..=j {
                let c = q.column(i).dot(&w.column(0));
                h[(i, j)] += c;
                w.column_mut(0).axpy(-c, &q.column(i), 1.0);
            }
        }
        let nw = w.norm();
        h[(j + 1, j)] = nw;
        if nw <= 1e-12 * h.column(j).norm().max(f64::MIN_POSITIVE) {
            used = j + 1;
            break;
        }
        q.set_column(j + 1, &(w.column(0) / nw));
    }
    let hk = h.view((0, 0), (used, used)).into_owned();
    let mus = hk.complex_eigenvalues();
    let mmax = mus.iter().map(|m| m.norm()).fold(0.0, f64::max);
    Ok(mus
        .iter()
        .filter(|m| m.norm() >= RITZ_KEEP * mmax && m.norm() > 0.0)
        .map(|m| C64::new(sigma0, 0.0) - m.inv())
        .collect())
}

/// Log-spaced positive real shifts across the Ritz magnitude range, with dominant
/// singular directions of `G(sigma) - D`.
pub fn default_initial(system: &DescriptorSystem, r: usize) -> Result<InterpolationData> {
    let lams = ritz_estimates(system, (2 * r + 10).min(system.order()))?;
    let mags: Vec<f64> = lams.iter().map(|l| l.norm()).filter(|m| m.is_finite() && *m > 0.0).collect();
    let (lo, hi) = if mags.is_empty() {
        (1.0, 1.0)
    } else {
        (mags.iter().cloned().fold(f64::INFINITY, f64::min), mags.iter().cloned().fold(0.0, f64::max))
    };
    let points: Vec<f64> = if r == 1 {
        vec![(lo * hi).sqrt()]
    } else {
        (0..r).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (r - 1) as f64).exp()).collect()
    };
    let mut right = Vec::with_capacity(r);
    let mut left = Vec::with_capacity(r);
    for &s in &points {
        let g = TransferFunction::eval(system, C64::new(s, 0.0))?;
        let h = real_part(&g) - &system.d;
        let svd = crate::lapack_ffi::svd(&h, false)?;
        let (u, vt) = (svd.u, svd.vt);
        let fix = |v: Vec<f64>| {
            // deterministic sign: largest-magnitude entry positive; zero response falls back to e_1
            if v.iter().all(|x| *x == 0.0) {
                let mut e = vec![0.0; v.len()];
                e[0] = 1.0;
                return e;
            }
            let k = (0..v.len()).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
            let sgn = v[k].signum();
            v.into_iter().map(|x| x * sgn).collect()
        };
        right.push(fix(vt.row(0).iter().cloned().collect()));
        left.push(fix(u.column(0).iter().cloned().collect()));
    }
    InterpolationData::real(&points, &right, &left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{h2_error_sp, eval_transfer};
    use crate::spectral::{split_transfer, weierstrass};
    use nalgebra::dmatrix;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn scalar_data(points: &[C64]) -> InterpolationData {
        let one = || CVec::from_element(1, c(1.0));
        InterpolationData::new(points.to_vec(), points.iter().map(|_| one()).collect(), points.iter().map(|_| one()).collect())
            .unwrap()
    }

    #[test]
    fn relaxed_update_stays_conjugate_closed() {
        let used = scalar_data(&[c(1.0), C64::new(2.0, 3.0), C64::new(2.0, -3.0)]);
        let next = scalar_data(&[C64::new(4.0, -1.0), c(3.0), C64::new(4.0, 1.0)]);
        let mut relax = Relaxation::new();
        relax.step = 0.5;
        let out = relax.apply(&used, next);
        assert!(out.conjugate_partners().is_some());
        assert_eq!(out.points[1], c(2.0));
        assert_eq!(out.points[0], out.points[2].conj());
    }

    #[test]
    fn alternating_moves_halve_the_step() {
        let mut relax = Relaxation::new();
        let (a, b) = (scalar_data(&[c(1.0)]), scalar_data(&[c(2.0)]));
        for k in 0..REVERSAL_WINDOW + 1 {
            let (u, n) = if k % 2 == 0 { (&a, &b) } else { (&b, &a) };
            relax.observe(u, n, 0.9f64.powi(k as i32), true);
        }
        assert_eq!(relax.step, 0.5);
        let fixed = relax.apply(&a, a.clone());
        assert_eq!(fixed.points, a.points);
    }

    fn siso(e: RMat, a: RMat, b: RMat, cm: RMat) -> DescriptorSystem {
        DescriptorSystem::from_dense(e, a, b, cm).unwrap()
    }

    #[test]
    fn order_one_fixed_point_is_mirrored_pole() {
        let sys = siso(dmatrix![1.0], dmatrix![-2.0], dmatrix![1.0], dmatrix![1.0]);
        let w = weierstrass(&sys).unwrap();
        let init = InterpolationData::real(&[1.0], &[vec![1.0]], &[vec![1.0]]).unwrap();
        let res = irka_dae(&sys, &w, &IrkaConfig::new(1).with_initial(init)).unwrap();
        assert!(res.converged);
        assert!((res.model.provenance.data.as_ref().unwrap().points[0] - c(2.0)).norm() < 1e-10);
        let g = eval_transfer(&sys, c(0.3)).unwrap()[(0, 0)];
        let gt = eval_transfer(&res.model, c(0.3)).unwrap()[(0, 0)];
        assert!((g - gt).norm() < 1e-12);
        let rep = check_h2_first_order(&sys, &res.model, 1e-8).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn two_pole_ode_recovers_full_model() {
        let sys = siso(RMat::identity(2, 2), dmatrix![-1.0, 0.0; 0.0, -3.0], dmatrix![1.0; 1.0], dmatrix![1.0, 1.0]);
        let w = weierstrass(&sys).unwrap();
        let res = irka_dae(&sys, &w, &IrkaConfig::new(2)).unwrap();
        assert!(res.converged);
        let mut shifts: Vec<f64> = res.shift_history.last().unwrap().iter().map(|s| s.re).collect();
        shifts.sort_by(f64::total_cmp);
        assert!((shifts[0] - 1.0).abs() < 1e-8 && (shifts[1] - 3.0).abs() < 1e-8, "{shifts:?}");
        let (gsp, _) = split_transfer(&sys, &w).unwrap();
        let err = h2_error_sp(&gsp, &res.model.strictly_proper().unwrap()).unwrap();
        assert!(err <= 1e-8, "{err}");
    }

    #[test]
    fn canonical_index1_keeps_polynomial_part() {
        let sys = siso(dmatrix![1.0, 0.0; 0.0, 0.0], dmatrix![-1.0, 0.0; 0.0, 1.0], dmatrix![1.0; 1.0], dmatrix![1.0, 1.0]);
        let w = weierstrass(&sys).unwrap();
        let res = irka_dae(&sys, &w, &IrkaConfig::new(1)).unwrap();
        assert!(res.converged);
        assert!((res.shift_history.last().unwrap()[0] - c(1.0)).norm() < 1e-8);
        let p = res.model.polynomial_part.as_ref().unwrap();
        assert!((p.coeff(0)[(0, 0)] + 1.0).abs() < 1e-12);
        assert_eq!(p.degree(), Some(0));
    }

    #[test]
    fn single_iteration_cap_fails_optimality() {
        let sys = siso(
            RMat::identity(3, 3),
            dmatrix![-1.0, 0.0, 0.0; 0.0, -3.0, 0.0; 0.0, 0.0, -10.0],
            dmatrix![1.0; 1.0; 1.0],
            dmatrix![1.0, 2.0, 1.0],
        );
        let w = weierstrass(&sys).unwrap();
        let init = InterpolationData::real(&[0.1], &[vec![1.0]], &[vec![1.0]]).unwrap();
        let cfg = IrkaConfig { max_iter: 1, ..IrkaConfig::new(1).with_initial(init.clone()) };
        let res = irka_dae(&sys, &w, &cfg).unwrap();
        assert!(!res.converged);
        assert!(!check_h2_first_order(&sys, &res.model, 1e-6).unwrap().pass);
        let full = irka_dae(&sys, &w, &IrkaConfig::new(1).with_initial(init)).unwrap();
        assert!(full.converged);
        assert!(check_h2_first_order(&sys, &full.model, 1e-6).unwrap().pass);
    }

    #[test]
    fn full_order_passes_trivially() {
        let sys = siso(RMat::identity(2, 2), dmatrix![-1.0, 1.0; 0.0, -2.0], dmatrix![0.0; 1.0], dmatrix![1.0, 0.0]);
        let w = weierstrass(&sys).unwrap();
        let res = irka_dae(&sys, &w, &IrkaConfig::new(2)).unwrap();
        assert!(check_h2_first_order(&sys, &res.model, 1e-8).unwrap().pass);
    }

    #[test]
    fn matching_ignores_order() {
        let a = [c(1.0), C64::new(2.0, 1.0), C64::new(2.0, -1.0)];
        let b = [C64::new(2.0, -1.0), c(1.0 + 1e-9), C64::new(2.0, 1.0)];
        assert!(shift_change(&a, &b) < 2e-9);
        assert!(shift_change(&a, &a[..2]).is_infinite());
    }

    #[test]
    fn rejects_bad_config() {
        let sys = siso(dmatrix![1.0], dmatrix![-2.0], dmatrix![1.0], dmatrix![1.0]);
        let w = weierstrass(&sys).unwrap();
        assert!(matches!(irka_dae(&sys, &w, &IrkaConfig::new(0)), Err(Error::InvalidArgument(_))));
        assert!(matches!(irka_dae(&sys, &w, &IrkaConfig::new(2)), Err(Error::InvalidArgument(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn fixed_point_and_conjugate_closure(seed in 0u64..500) {
            let sys = crate::synthetic::generate_synthetic(
                crate::synthetic::SyntheticKind::Ode,
                &crate::synthetic::SyntheticParams { n1: 8, n2: 0, m: 1, p: 1, seed },
            ).unwrap();
            let w = weierstrass(&sys).unwrap();
            let res = irka_dae(&sys, &w, &IrkaConfig::new(3)).unwrap();
            let last = res.shift_history.last().unwrap();
            prop_assert!(res.model.provenance.data.as_ref().unwrap().conjugate_partners().is_some());
            if res.converged {
                prop_assert!(res.final_shift_change <= 1e-6);
                let sp = res.model.strictly_proper().unwrap();
                let mirrored: Vec<C64> = crate::linalg::generalized_eigenvalues(&sp.e, &sp.a).unwrap().iter().map(|l| -l).collect();
                prop_assert!(shift_change(last, &mirrored) <= 1e-5);
            }
        }
    }
}
