//! Deterministic synthetic test systems.

use crate::matrix::{SparseMatrix, SysMatrix};
use crate::system::{DescriptorSystem, StructureKind};
use crate::{Error, RMat, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    /// `E = I`, stable random `A`; `n2` must be 0.
    Ode,
    /// `E = [[E11, E12], [0, 0]]` with nonsingular `A22` and stable finite dynamics.
    SemiexplicitIndex1,
    /// Discretized-Stokes-like saddle structure with `A21 = A12^T`, `B2 != 0`, `C2 != 0`.
    StokesIndex2,
    /// RLC ladder driven by voltage sources; outputs are source currents.
    RlcIndex2,
}

impl SyntheticKind {
    pub fn name(&self) -> &'static str {
        match self {
            SyntheticKind::Ode => "ode",
            SyntheticKind::SemiexplicitIndex1 => "semiexplicit-index1",
            SyntheticKind::StokesIndex2 => "stokes-index2",
            SyntheticKind::RlcIndex2 => "rlc-index2",
        }
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SyntheticKind::Ode, SyntheticKind::SemiexplicitIndex1, SyntheticKind::StokesIndex2, SyntheticKind::RlcIndex2]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown synthetic kind '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub n1: usize,
    pub n2: usize,
    pub m: usize,
    pub p: usize,
    pub seed: u64,
}

fn uniform(rng: &mut ChaCha8Rng, r: usize, c: usize) -> RMat {
    RMat::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

/// Shifts `M` so that its rightmost eigenvalue sits at `-margin`.
fn stabilize(m: RMat, margin: f64) -> RMat {
    let alpha = m.complex_eigenvalues().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let n = m.nrows();
    m - RMat::identity(n, n) * (alpha + margin)
}

pub fn generate_synthetic(kind: SyntheticKind, params: &SyntheticParams) -> Result<DescriptorSystem> {
    let SyntheticParams { n1, n2, m, p, seed } = *params;
    if n1 == 0 || m == 0 || p == 0 {
        return Err(Error::InvalidArgument("n1, m and p must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        SyntheticKind::Ode => {
            if n2 != 0 {
                return Err(Error::InvalidArgument("ode systems have n2 = 0".into()));
            }
            let a = stabilize(uniform(&mut rng, n1, n1) / (n1 as f64).sqrt(), 0.1);
            let b = uniform(&mut rng, n1, m);
            let c = uniform(&mut rng, p, n1);
            DescriptorSystem::from_dense(RMat::identity(n1, n1), a, b, c)
        }
        SyntheticKind::SemiexplicitIndex1 => index1(&mut rng, n1, n2, m, p),
        SyntheticKind::StokesIndex2 => stokes(&mut rng, n1, n2, m, p),
        SyntheticKind::RlcIndex2 => rlc(&mut rng, n1, n2, m, p),
    }
}

fn index1(rng: &mut ChaCha8Rng, n1: usize, n2: usize, m: usize, p: usize) -> Result<DescriptorSystem> {
    if n2 == 0 {
        return Err(Error::InvalidArgument("semiexplicit-index1 needs n2 > 0".into()));
    }
    let n = n1 + n2;
    let a22 = uniform(rng, n2, n2) * 0.5 + RMat::identity(n2, n2) * (n2 as f64 + 1.0);
    let a21 = uniform(rng, n2, n1);
    let a12 = uniform(rng, n1, n2);
    let e12 = uniform(rng, n1, n2);
    let y = a22.clone().lu().solve(&a21).expect("diagonally dominant A22");
    // finite dynamics F^-1 (A11 - A12 A22^-1 A21) = H with F = E11 - E12 A22^-1 A21
    let f = RMat::identity(n1, n1) + uniform(rng, n1, n1) * (0.1 / (n1 as f64).sqrt());
    let h = stabilize(uniform(rng, n1, n1) / (n1 as f64).sqrt(), 0.1);
    let e11 = &f + &e12 * &y;
    let a11 = &f * &h + &a12 * &y;
    let mut e = RMat::zeros(n, n);
    e.view_mut((0, 0), (n1, n1)).copy_from(&e11);
    e.view_mut((0, n1), (n1, n2)).copy_from(&e12);
    let mut a = RMat::zeros(n, n);
    a.view_mut((0, 0), (n1, n1)).copy_from(&a11);
    a.view_mut((0, n1), (n1, n2)).copy_from(&a12);
    a.view_mut((n1, 0), (n2, n1)).copy_from(&a21);
    a.view_mut((n1, n1), (n2, n2)).copy_from(&a22);
    let b = uniform(rng, n, m);
    let c = uniform(rng, p, n);
    let d = uniform(rng, p, m) * 0.5;
    DescriptorSystem::from_dense(e, a, b, c)?
        .with_d(d)?
        .with_structure(StructureKind::Index1Blocks { n1, n2 })
}

/// Viscosity of the Stokes-like generator; keeps the finite spectrum roughly within `[1, 1e2]`.
const VISCOSITY: f64 = 1e-3;

fn stokes(rng: &mut ChaCha8Rng, n1: usize, n2: usize, m: usize, p: usize) -> Result<DescriptorSystem> {
    if n2 == 0 || n2 >= n1 {
        return Err(Error::InvalidArgument("stokes-index2 needs 0 < n2 < n1".into()));
    }
    let n = n1 + n2;
    let h2 = ((n1 + 1) as f64).powi(2) * VISCOSITY;
    let mut e = Vec::new();
    let mut a = Vec::new();
    for i in 0..n1 {
        e.push((i, i, rng.random_range(1.0..2.0)));
        a.push((i, i, -2.0 * h2 - 1.0));
        if i + 1 < n1 {
            a.push((i, i + 1, h2));
            a.push((i + 1, i, h2));
        }
    }
    // A12 with one distinguished row per column (full column rank) plus a random neighbour
    let stride = n1 / n2;
    for j in 0..n2 {
        let r0 = j * stride;
        let v0 = rng.random_range(0.5..1.5) * h2.sqrt();
        let v1 = rng.random_range(-0.5..0.5) * h2.sqrt();
        for (r, v) in [(r0, v0), ((r0 + 1) % n1, v1)] {
            a.push((r, n1 + j, v));
            a.push((n1 + j, r, v));
        }
    }
    let mut b = uniform(rng, n, m);
    let mut c = uniform(rng, p, n);
    for v in b.rows_mut(n1, n2).iter_mut() {
        *v *= 0.1;
    }
    for v in c.columns_mut(n1, n2).iter_mut() {
        *v *= 0.1;
    }
    let es = SysMatrix::Sparse(SparseMatrix::from_triplets(n, n, &e));
    let as_ = SysMatrix::Sparse(SparseMatrix::from_triplets(n, n, &a));
    DescriptorSystem::new(es, as_, b, c, RMat::zeros(p, m), StructureKind::Index2Blocks { n1, n2 })
}

fn rlc(rng: &mut ChaCha8Rng, n1: usize, n2: usize, m: usize, p: usize) -> Result<DescriptorSystem> {
    // x1 = [node voltages (nv); inductor currents (nl)], x2 = voltage-source currents
    let nv = n1.div_ceil(2);
    let nl = n1 - nv;
    if n2 == 0 || n2 > nv || m > n2 || p > n2 || nl == 0 {
        return Err(Error::InvalidArgument("rlc-index2 needs n1 >= 2, 0 < n2 <= ceil(n1/2), m, p <= n2".into()));
    }
    let n = n1 + n2;
    let mut e = Vec::new();
    let mut a = Vec::new();
    for i in 0..nv {
        e.push((i, i, rng.random_range(0.5..1.5)));
        a.push((i, i, -rng.random_range(0.01..0.1)));
    }
    // inductor k joins node k to node k+1 (the last one to ground when nl == nv)
    for k in 0..nl {
        let row = nv + k;
        e.push((row, row, rng.random_range(0.5..1.5)));
        a.push((row, row, -rng.random_range(0.1..1.0)));
        for (node, sign) in [(k, 1.0), (k + 1, -1.0)] {
            if node < nv {
                a.push((node, row, -sign));
                a.push((row, node, sign));
            }
        }
    }
    // sources at spread-out nodes
    let stride = nv / n2;
    for j in 0..n2 {
        let node = j * stride;
        a.push((node, n1 + j, -1.0));
        a.push((n1 + j, node, 1.0));
    }
    let mut b = RMat::zeros(n, m);
    for j in 0..m {
        b[(n1 + j, j)] = -1.0;
    }
    let mut c = RMat::zeros(p, n);
    for j in 0..p {
        c[(j, n1 + j)] = -1.0;
    }
    let es = SysMatrix::Sparse(SparseMatrix::from_triplets(n, n, &e));
    let as_ = SysMatrix::Sparse(SparseMatrix::from_triplets(n, n, &a));
    DescriptorSystem::new(es, as_, b, c, RMat::zeros(p, m), StructureKind::Index2Blocks { n1, n2 })
}
