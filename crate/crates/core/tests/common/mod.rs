//! Helpers shared by the integration tests.
#![allow(dead_code)]

use dmor::{CMat, DescriptorSystem, RMat, StructureKind, C64};
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub sys: DescriptorSystem,
    pub e11: RMat,
    pub a11: RMat,
    pub a12: RMat,
    pub a21: RMat,
}

pub fn random_index2(seed: u64, with_b2: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n1 = rng.random_range(4..=40);
    let n2 = rng.random_range(1..=n1 / 3);
    sized_index2(&mut rng, n1, n2, with_b2)
}

/// Dense index-2 instance with well-conditioned `E11` and strictly stable hidden dynamics.
pub fn sized_index2(rng: &mut ChaCha8Rng, n1: usize, n2: usize, with_b2: bool) -> Instance {
    let (m, p) = (rng.random_range(1..=2), rng.random_range(1..=2));
    let mut u = |r: usize, c: usize| RMat::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0));
    let s1 = (n1 as f64).sqrt();
    let e11 = RMat::identity(n1, n1) + u(n1, n1) * (0.2 / s1);
    let a11 = RMat::identity(n1, n1) * -3.0 + u(n1, n1) * (0.5 / s1);
    let a12 = u(n1, n2);
    let a21 = u(n2, n1);
    let n = n1 + n2;
    let mut e = RMat::zeros(n, n);
    e.view_mut((0, 0), (n1, n1)).copy_from(&e11);
    let mut a = RMat::zeros(n, n);
    a.view_mut((0, 0), (n1, n1)).copy_from(&a11);
    a.view_mut((0, n1), (n1, n2)).copy_from(&a12);
    a.view_mut((n1, 0), (n2, n1)).copy_from(&a21);
    let mut b = u(n, m);
    if !with_b2 {
        b.rows_mut(n1, n2).fill(0.0);
    }
    let c = u(p, n);
    let d = u(p, m);
    let sys = DescriptorSystem::from_dense(e, a, b, c)
        .unwrap()
        .with_d(d)
        .unwrap()
        .with_structure(StructureKind::Index2Blocks { n1, n2 })
        .unwrap();
    Instance { sys, e11, a11, a12, a21 }
}

/// Orthonormal basis of `ker X` from the eigenvectors of the orthogonal projector onto it.
pub fn null_basis(x: &RMat) -> RMat {
    let n = x.ncols();
    let gram = (x * x.transpose()).try_inverse().unwrap();
    let proj = RMat::identity(n, n) - x.transpose() * gram * x;
    let eig = SymmetricEigen::new((&proj + proj.transpose()) * 0.5);
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    RMat::from_fn(n, keep.len(), |i, j| eig.eigenvectors[(i, keep[j])])
}

/// Projector onto `Im X` along `Im Y` for complementary subspaces.
pub fn oblique(x: &RMat, y: &RMat) -> RMat {
    let n = x.nrows();
    let mut m = RMat::zeros(n, n);
    m.columns_mut(0, x.ncols()).copy_from(x);
    m.columns_mut(x.ncols(), y.ncols()).copy_from(y);
    let mut sel = RMat::zeros(n, n);
    for i in 0..x.ncols() {
        sel[(i, i)] = 1.0;
    }
    &m * sel * m.try_inverse().unwrap()
}

pub fn cplx(m: &RMat) -> CMat {
    m.map(|v| C64::new(v, 0.0))
}


/// Index-2 instance (`E11 = I`, `A12 = A21^T`) whose hidden dynamics on `ker A21` is a
/// random stable `nf x nf` matrix with rightmost eigenvalue at `-0.1`.
pub fn hidden_ode_index2(rng: &mut ChaCha8Rng, nf: usize, n2: usize, m: usize, p: usize, with_b2: bool) -> DescriptorSystem {
    let n1 = nf + n2;
    let mut u = |r: usize, c: usize| RMat::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0));
    let a21 = u(n2, n1);
    let theta = null_basis(&a21);
    let raw = u(nf, nf) / (nf as f64).sqrt();
    let alpha = raw.complex_eigenvalues().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let h = raw - RMat::identity(nf, nf) * (alpha + 0.1);
    let comp = RMat::identity(n1, n1) - &theta * theta.transpose();
    let a11 = &theta * h * theta.transpose() - comp;
    let n = n1 + n2;
    let mut e = RMat::zeros(n, n);
    e.view_mut((0, 0), (n1, n1)).fill_with_identity();
    let mut a = RMat::zeros(n, n);
    a.view_mut((0, 0), (n1, n1)).copy_from(&a11);
    a.view_mut((0, n1), (n1, n2)).copy_from(&a21.transpose());
    a.view_mut((n1, 0), (n2, n1)).copy_from(&a21);
    let mut b = u(n, m);
    if !with_b2 {
        b.rows_mut(n1, n2).fill(0.0);
    }
    let c = u(p, n);
    DescriptorSystem::from_dense(e, a, b, c)
        .unwrap()
        .with_structure(StructureKind::Index2Blocks { n1, n2 })
        .unwrap()
}
