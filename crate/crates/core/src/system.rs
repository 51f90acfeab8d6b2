//! Descriptor systems, interpolation data, polynomial parts and reduced models.

use crate::linalg::{self, DenseLu};
use crate::matrix::SysMatrix;
use crate::{CMat, CVec, Error, RMat, Result, C64};
use serde::{Deserialize, Serialize};

/// Block structure declared by the caller.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StructureKind {
    General,
    /// Semi-explicit index 1: `E21 = 0`, `E22 = 0`, `A22` nonsingular.
    Index1Blocks { n1: usize, n2: usize },
    /// Stokes type index 2: `E = diag(E11, 0)`, `A22 = 0`.
    Index2Blocks { n1: usize, n2: usize },
}

impl StructureKind {
    pub fn name(&self) -> &'static str {
        match self {
            StructureKind::General => "general",
            StructureKind::Index1Blocks { .. } => "index1",
            StructureKind::Index2Blocks { .. } => "index2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    DimensionMismatch,
    BlockSizeMismatch,
    A22Singular,
    SchurComplementSingular,
    Index1EBlockNonzero,
    Index2EBlockNonzero,
    Index2A22Nonzero,
    E11Singular,
    Index2RegularityViolated,
}

/// One violated invariant found by [`validate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Diagnostic { kind, message: message.into() }
    }
}

/// `E x' = A x + B u`, `y = C x + D u`.
#[derive(Clone, Debug, PartialEq)]
pub struct DescriptorSystem {
    pub e: SysMatrix,
    pub a: SysMatrix,
    pub b: RMat,
    pub c: RMat,
    pub d: RMat,
    pub structure: StructureKind,
}

/// Views of the 2x2 block partition.
#[derive(Clone, Debug)]
pub struct Blocks {
    pub n1: usize,
    pub n2: usize,
    pub e11: SysMatrix,
    pub e12: SysMatrix,
    pub e21: SysMatrix,
    pub e22: SysMatrix,
    pub a11: SysMatrix,
    pub a12: SysMatrix,
    pub a21: SysMatrix,
    pub a22: SysMatrix,
    pub b1: RMat,
    pub b2: RMat,
    pub c1: RMat,
    pub c2: RMat,
}

impl DescriptorSystem {
    /// Assembles a system after checking dimensions (not structural invariants).
    pub fn new(
        e: impl Into<SysMatrix>,
        a: impl Into<SysMatrix>,
        b: RMat,
        c: RMat,
        d: RMat,
        structure: StructureKind,
    ) -> Result<Self> {
        let sys = DescriptorSystem { e: e.into(), a: a.into(), b, c, d, structure };
        sys.check_dimensions()?;
        Ok(sys)
    }

    /// Dense general system with `D = 0`.
    pub fn from_dense(e: RMat, a: RMat, b: RMat, c: RMat) -> Result<Self> {
        let d = RMat::zeros(c.nrows(), b.ncols());
        Self::new(e, a, b, c, d, StructureKind::General)
    }

    pub fn with_d(mut self, d: RMat) -> Result<Self> {
        self.d = d;
        self.check_dimensions()?;
        Ok(self)
    }

    pub fn with_structure(mut self, structure: StructureKind) -> Result<Self> {
        self.structure = structure;
        self.check_dimensions()?;
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    fn dimension_problems(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.a.nrows();
        let mut bad = |msg: String| out.push(Diagnostic::new(DiagnosticKind::DimensionMismatch, msg));
        if self.a.ncols() != n {
            bad(format!("A is {}x{}, not square", n, self.a.ncols()));
        }
        if self.e.nrows() != n || self.e.ncols() != n {
            bad(format!("E is {}x{}, expected {n}x{n}", self.e.nrows(), self.e.ncols()));
        }
        if self.b.nrows() != n {
            bad(format!("B has {} rows, expected {n}", self.b.nrows()));
        }
        if self.c.ncols() != n {
            bad(format!("C has {} columns, expected {n}", self.c.ncols()));
        }
        if self.d.nrows() != self.c.nrows() || self.d.ncols() != self.b.ncols() {
            bad(format!(
                "D is {}x{}, expected {}x{}",
                self.d.nrows(),
                self.d.ncols(),
                self.c.nrows(),
                self.b.ncols()
            ));
        }
        match self.structure {
            StructureKind::General => {}
            StructureKind::Index1Blocks { n1, n2 } | StructureKind::Index2Blocks { n1, n2 } => {
                if n1 + n2 != n || n1 == 0 || n2 == 0 {
                    out.push(Diagnostic::new(
                        DiagnosticKind::BlockSizeMismatch,
                        format!("block sizes n1 = {n1}, n2 = {n2} do not partition order {n}"),
                    ));
                }
            }
        }
        out
    }

    /// Errors with `DimensionMismatch` if shapes or block sizes are inconsistent.
    pub fn check_dimensions(&self) -> Result<()> {
        let p = self.dimension_problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(p.into_iter().map(|d| d.message).collect::<Vec<_>>().join("; ")))
        }
    }

    /// Block partition for the declared structure, `None` for `General`.
    pub fn blocks(&self) -> Option<Blocks> {
        let (n1, n2) = match self.structure {
            StructureKind::General => return None,
            StructureKind::Index1Blocks { n1, n2 } | StructureKind::Index2Blocks { n1, n2 } => (n1, n2),
        };
        let n = n1 + n2;
        let (r1, r2) = (0..n1, n1..n);
        Some(Blocks {
            n1,
            n2,
            e11: self.e.block(r1.clone(), r1.clone()),
            e12: self.e.block(r1.clone(), r2.clone()),
            e21: self.e.block(r2.clone(), r1.clone()),
            e22: self.e.block(r2.clone(), r2.clone()),
            a11: self.a.block(r1.clone(), r1.clone()),
            a12: self.a.block(r1.clone(), r2.clone()),
            a21: self.a.block(r2.clone(), r1.clone()),
            a22: self.a.block(r2.clone(), r2.clone()),
            b1: self.b.rows(0, n1).into_owned(),
            b2: self.b.rows(n1, n2).into_owned(),
            c1: self.c.columns(0, n1).into_owned(),
            c2: self.c.columns(n1, n2).into_owned(),
        })
    }

    /// Block partition, or `StructureMismatch` unless the structure is `want`.
    pub(crate) fn require_blocks(&self, want: &str) -> Result<Blocks> {
        self.check_dimensions()?;
        let ok = matches!(
            (want, self.structure),
            ("index1", StructureKind::Index1Blocks { .. }) | ("index2", StructureKind::Index2Blocks { .. })
        );
        if !ok {
            return Err(Error::StructureMismatch(format!(
                "{want} method requires {want} block structure, system is declared {}",
                self.structure.name()
            )));
        }
        Ok(self.blocks().expect("structured"))
    }
}

/// Checks every structural invariant; an empty list means the system is well formed.
pub fn validate(system: &DescriptorSystem) -> Vec<Diagnostic> {
    let mut out = system.dimension_problems();
    if !out.is_empty() {
        return out;
    }
    let Some(bl) = system.blocks() else { return out };
    match system.structure {
        StructureKind::Index1Blocks { .. } => {
            if !bl.e21.is_zero(0.0) || !bl.e22.is_zero(0.0) {
                out.push(Diagnostic::new(
                    DiagnosticKind::Index1EBlockNonzero,
                    "index-1 form requires E21 = 0 and E22 = 0",
                ));
            }
            match DenseLu::new(&bl.a22.to_dense()) {
                None => out.push(Diagnostic::new(DiagnosticKind::A22Singular, "A22 singular")),
                Some(lu22) => {
                    let x = lu22.solve(&bl.a21.to_dense());
                    let s = bl.e11.to_dense() - bl.e12.mul(&x);
                    if DenseLu::new(&s).is_none() {
                        out.push(Diagnostic::new(
                            DiagnosticKind::SchurComplementSingular,
                            "E11 - E12 A22^-1 A21 singular",
                        ));
                    }
                }
            }
        }
        StructureKind::Index2Blocks { .. } => {
            if !bl.e12.is_zero(0.0) || !bl.e21.is_zero(0.0) || !bl.e22.is_zero(0.0) {
                out.push(Diagnostic::new(
                    DiagnosticKind::Index2EBlockNonzero,
                    "index-2 form requires E12, E21, E22 = 0",
                ));
            }
            if !bl.a22.is_zero(0.0) {
                out.push(Diagnostic::new(DiagnosticKind::Index2A22Nonzero, "index-2 form requires A22 = 0"));
            }
            match DenseLu::new(&bl.e11.to_dense()) {
                None => out.push(Diagnostic::new(DiagnosticKind::E11Singular, "E11 singular")),
                Some(lu11) => {
                    let x = lu11.solve(&bl.a12.to_dense());
                    let k = bl.a21.mul(&x);
                    if DenseLu::new(&k).is_none() {
                        out.push(Diagnostic::new(
                            DiagnosticKind::Index2RegularityViolated,
                            "index-2 regularity violated: A21 E11^-1 A12 singular",
                        ));
                    }
                }
            }
        }
        StructureKind::General => {}
    }
    out
}

/// Interpolation points with right and left tangential directions.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationData {
    pub points: Vec<C64>,
    pub right_dirs: Vec<CVec>,
    pub left_dirs: Vec<CVec>,
}

impl InterpolationData {
    pub fn new(points: Vec<C64>, right_dirs: Vec<CVec>, left_dirs: Vec<CVec>) -> Result<Self> {
        if points.len() != right_dirs.len() || points.len() != left_dirs.len() {
            return Err(Error::InvalidArgument(format!(
                "interpolation data lengths differ: {} points, {} right, {} left",
                points.len(),
                right_dirs.len(),
                left_dirs.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::InvalidArgument("no interpolation points".into()));
        }
        if right_dirs.iter().chain(&left_dirs).any(|v| v.iter().all(|z| *z == C64::new(0.0, 0.0))) {
            return Err(Error::InvalidArgument("zero tangential direction".into()));
        }
        for w in right_dirs.windows(2).chain(left_dirs.windows(2)) {
            if w[0].len() != w[1].len() {
                return Err(Error::InvalidArgument("tangential directions of unequal length".into()));
            }
        }
        Ok(InterpolationData { points, right_dirs, left_dirs })
    }

    /// Real points with real directions.
    pub fn real(points: &[f64], right: &[Vec<f64>], left: &[Vec<f64>]) -> Result<Self> {
        let cv = |v: &Vec<f64>| CVec::from_iterator(v.len(), v.iter().map(|x| C64::new(*x, 0.0)));
        Self::new(
            points.iter().map(|s| C64::new(*s, 0.0)).collect(),
            right.iter().map(cv).collect(),
            left.iter().map(cv).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the conjugate partner of each entry (itself for real entries), if closed.
    pub fn conjugate_partners(&self) -> Option<Vec<usize>> {
        let mut partner = vec![usize::MAX; self.len()];
        for i in 0..self.len() {
            if partner[i] != usize::MAX {
                continue;
            }
            if self.is_real_entry(i) {
                partner[i] = i;
                continue;
            }
            let j = (0..self.len()).find(|&j| {
                j != i && partner[j] == usize::MAX && self.is_conjugate_of(j, i)
            })?;
            partner[i] = j;
            partner[j] = i;
        }
        Some(partner)
    }

    fn is_real_entry(&self, i: usize) -> bool {
        self.points[i].im == 0.0 && self.right_dirs[i].iter().chain(self.left_dirs[i].iter()).all(|z| z.im == 0.0)
    }

    fn is_conjugate_of(&self, j: usize, i: usize) -> bool {
        self.points[j] == self.points[i].conj()
            && self.right_dirs[j] == self.right_dirs[i].map(|z| z.conj())
            && self.left_dirs[j] == self.left_dirs[i].map(|z| z.conj())
    }
}

/// Closes the data under conjugation, keeping input entries and not duplicating existing pairs.
pub fn conjugate_close(data: &InterpolationData) -> InterpolationData {
    let mut out = data.clone();
    let mut used = vec![false; data.len()];
    for i in 0..data.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        if data.is_real_entry(i) {
            continue;
        }
        if let Some(j) = (0..data.len()).find(|&j| !used[j] && data.is_conjugate_of(j, i)) {
            used[j] = true;
            continue;
        }
        out.points.push(data.points[i].conj());
        out.right_dirs.push(data.right_dirs[i].map(|z| z.conj()));
        out.left_dirs.push(data.left_dirs[i].map(|z| z.conj()));
    }
    out
}

/// `P(s) = sum_j P_j s^j` with real `p x m` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolynomial {
    rows: usize,
    cols: usize,
    coeffs: Vec<RMat>,
}

impl MatrixPolynomial {
    /// Canonicalizes by dropping trailing coefficients that are exactly zero.
    pub fn new(rows: usize, cols: usize, coeffs: Vec<RMat>) -> Result<Self> {
        if coeffs.iter().any(|c| c.nrows() != rows || c.ncols() != cols) {
            return Err(Error::DimensionMismatch(format!("polynomial coefficients must be {rows}x{cols}")));
        }
        let mut p = MatrixPolynomial { rows, cols, coeffs };
        p.trim(0.0);
        Ok(p)
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        MatrixPolynomial { rows, cols, coeffs: Vec::new() }
    }

    pub fn constant(c: RMat) -> Self {
        let (rows, cols) = c.shape();
        Self::new(rows, cols, vec![c]).expect("shape")
    }

    /// Drops trailing coefficients with max-abs at most `rel_tol` times the largest coefficient.
    pub fn trim(&mut self, rel_tol: f64) {
        let scale = self.coeffs.iter().map(|c| c.amax()).fold(0.0, f64::max);
        while let Some(last) = self.coeffs.last() {
            if last.amax() <= rel_tol * scale || last.amax() == 0.0 {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn trimmed(mut self, rel_tol: f64) -> Self {
        self.trim(rel_tol);
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn coeffs(&self) -> &[RMat] {
        &self.coeffs
    }

    /// Coefficient of `s^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> RMat {
        self.coeffs.get(k).cloned().unwrap_or_else(|| RMat::zeros(self.rows, self.cols))
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, s: C64) -> CMat {
        self.eval_derivative(s, 0)
    }

    /// `d^l/ds^l P(s)`.
    pub fn eval_derivative(&self, s: C64, ell: usize) -> CMat {
        let mut out = CMat::zeros(self.rows, self.cols);
        for (k, c) in self.coeffs.iter().enumerate().skip(ell) {
            let falling: f64 = ((k - ell + 1)..=k).map(|x| x as f64).product();
            let w = s.powu((k - ell) as u32) * falling;
            out += c.map(|v| C64::new(v, 0.0) * w);
        }
        out
    }

    /// Largest coefficient-wise difference relative to the larger polynomial's scale.
    pub fn rel_diff(&self, other: &MatrixPolynomial) -> f64 {
        let k = self.coeffs.len().max(other.coeffs.len());
        let scale = self
            .coeffs
            .iter()
            .chain(&other.coeffs)
            .map(|c| c.amax())
            .fold(0.0, f64::max);
        let diff = (0..k).map(|j| (self.coeff(j) - other.coeff(j)).amax()).fold(0.0, f64::max);
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

/// Strictly proper realization `C (sE - A)^-1 B` with nonsingular `E`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    pub e: RMat,
    pub a: RMat,
    pub b: RMat,
    pub c: RMat,
}

impl StateSpace {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }
}

/// Which algorithm produced a reduced model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Projection,
    Naive,
    Dae,
    Index1,
    Index2,
    IrkaDae,
    IrkaIndex1,
    IrkaIndex2,
    IrkaThenShift,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Projection => "projection",
            Method::Naive => "naive",
            Method::Dae => "dae",
            Method::Index1 => "index1",
            Method::Index2 => "index2",
            Method::IrkaDae => "irka-dae",
            Method::IrkaIndex1 => "irka-index1",
            Method::IrkaIndex2 => "irka-index2",
            Method::IrkaThenShift => "irka-then-shift",
        }
    }
}

/// Where a reduced model came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub method: Method,
    /// Interpolation data used for the final projection (empty for plain projection).
    pub data: Option<InterpolationData>,
    /// Order of the interpolating (finite) part.
    pub finite_order: usize,
    /// Dimension of the carried infinite block (`reduce_dae` only).
    pub infinite_order: usize,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
}

impl Provenance {
    pub fn projection(order: usize) -> Self {
        Provenance { method: Method::Projection, data: None, finite_order: order, infinite_order: 0, iterations: None, converged: None }
    }
}

/// `G~(s) = C~ (sE~ - A~)^-1 B~ + D~ + s L~`, where the `s L~` term only
/// appears for improper index-2 systems.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedModel {
    pub e: RMat,
    pub a: RMat,
    pub b: RMat,
    pub c: RMat,
    pub d: RMat,
    /// Coefficient `L~` of the `s`-linear feedthrough, if any.
    pub improper: Option<RMat>,
    /// Polynomial part of `G~`, when known.
    pub polynomial_part: Option<MatrixPolynomial>,
    /// Strictly proper part of `G~`, when it is available as a separate block.
    pub finite: Option<StateSpace>,
    pub provenance: Provenance,
}

impl ReducedModel {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Plain descriptor realization (the `s L~` term is dropped).
    pub fn to_system(&self) -> DescriptorSystem {
        DescriptorSystem {
            e: SysMatrix::Dense(self.e.clone()),
            a: SysMatrix::Dense(self.a.clone()),
            b: self.b.clone(),
            c: self.c.clone(),
            d: self.d.clone(),
            structure: StructureKind::General,
        }
    }

    /// Strictly proper part: the stored finite block, or the whole pencil when `E~` is invertible.
    pub fn strictly_proper(&self) -> Result<StateSpace> {
        if let Some(f) = &self.finite {
            return Ok(f.clone());
        }
        if DenseLu::new(&self.e).is_none() {
            return Err(Error::SingularReducedE);
        }
        Ok(StateSpace { e: self.e.clone(), a: self.a.clone(), b: self.b.clone(), c: self.c.clone() })
    }

    pub fn check_dimensions(&self) -> Result<()> {
        let r = self.a.nrows();
        let ok = self.a.ncols() == r
            && self.e.shape() == (r, r)
            && self.b.nrows() == r
            && self.c.ncols() == r
            && self.d.shape() == (self.c.nrows(), self.b.ncols())
            && self.improper.as_ref().is_none_or(|l| l.shape() == self.d.shape());
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch("reduced model blocks are inconsistent".into()))
        }
    }
}

/// `true` iff `sigma E~ - A~` passes the pivot criterion.
pub(crate) fn reduced_pencil_regular(e: &RMat, a: &RMat, sigma: C64) -> bool {
    let m = e.map(|v| C64::new(v, 0.0)) * sigma - a.map(|v| C64::new(v, 0.0));
    linalg::DenseLu::new(&m).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn well_formed_ode_has_no_diagnostics() {
        let i2 = RMat::identity(2, 2);
        let sys = DescriptorSystem::from_dense(i2.clone(), -i2.clone(), i2.clone(), i2).unwrap();
        assert!(validate(&sys).is_empty());
    }

    #[test]
    fn index2_without_coupling_is_flagged() {
        let e = dmatrix![1.0, 0.0, 0.0; 0.0, 1.0, 0.0; 0.0, 0.0, 0.0];
        let a = dmatrix![-1.0, 0.0, 0.0; 0.0, -1.0, 0.0; 1.0, 0.0, 0.0];
        let sys = DescriptorSystem::from_dense(e, a, dmatrix![1.0; 1.0; 0.0], dmatrix![1.0, 1.0, 0.0])
            .unwrap()
            .with_structure(StructureKind::Index2Blocks { n1: 2, n2: 1 })
            .unwrap();
        let d = validate(&sys);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::Index2RegularityViolated);
        assert!(d[0].message.contains("index-2 regularity violated"));
    }

    #[test]
    fn index1_with_zero_a22_is_flagged() {
        let e = dmatrix![1.0, 0.0; 0.0, 0.0];
        let a = dmatrix![-1.0, 1.0; 1.0, 0.0];
        let sys = DescriptorSystem::from_dense(e, a, dmatrix![1.0; 1.0], dmatrix![1.0, 1.0])
            .unwrap()
            .with_structure(StructureKind::Index1Blocks { n1: 1, n2: 1 })
            .unwrap();
        let d = validate(&sys);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "A22 singular");
    }

    #[test]
    fn block_sizes_must_partition_the_order() {
        let i2 = RMat::identity(2, 2);
        let sys = DescriptorSystem::from_dense(i2.clone(), -i2.clone(), i2.clone(), i2).unwrap();
        let bad = sys.with_structure(StructureKind::Index1Blocks { n1: 2, n2: 1 });
        assert!(matches!(bad, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn conjugate_close_examples() {
        let one = || dvector![c(1.0, 0.0)];
        let d = InterpolationData::new(vec![c(1.0, 1.0)], vec![one()], vec![one()]).unwrap();
        let cl = conjugate_close(&d);
        assert_eq!(cl.points, vec![c(1.0, 1.0), c(1.0, -1.0)]);
        let real = InterpolationData::new(vec![c(2.0, 0.0)], vec![one()], vec![one()]).unwrap();
        assert_eq!(conjugate_close(&real), real);
        assert_eq!(conjugate_close(&cl), cl);
        assert!(cl.conjugate_partners().is_some());
    }

    #[test]
    fn polynomial_canonical_form_and_eval() {
        let p = MatrixPolynomial::new(1, 1, vec![dmatrix![-2.0], dmatrix![-1.0], dmatrix![0.0]]).unwrap();
        assert_eq!(p.degree(), Some(1));
        assert_eq!(p.eval(c(3.0, 0.0))[(0, 0)], c(-5.0, 0.0));
        assert_eq!(p.eval_derivative(c(3.0, 0.0), 1)[(0, 0)], c(-1.0, 0.0));
        assert!(MatrixPolynomial::new(1, 1, vec![dmatrix![0.0]]).unwrap().is_zero());
    }

    fn arb_data() -> impl Strategy<Value = InterpolationData> {
        prop::collection::vec((-5.0f64..5.0, prop_oneof![Just(0.0), -3.0f64..3.0], -1.0f64..1.0, -1.0f64..1.0), 1..6)
            .prop_map(|v| {
                let pts = v.iter().map(|t| c(t.0, t.1)).collect();
                let r = v.iter().map(|t| dvector![c(1.0, t.2)]).collect();
                let l = v.iter().map(|t| dvector![c(t.3, 1.0)]).collect();
                InterpolationData::new(pts, r, l).unwrap()
            })
    }

    proptest! {
        #[test]
        fn conjugate_close_is_idempotent(d in arb_data()) {
            let once = conjugate_close(&d);
            prop_assert_eq!(conjugate_close(&once), once.clone());
            prop_assert!(once.conjugate_partners().is_some());
            prop_assert_eq!(&once.points[..d.len()], &d.points[..]);
        }

        #[test]
        fn validate_is_idempotent(n1 in 1usize..4, n2 in 1usize..3, seed in 0u64..50) {
            let sys = crate::synthetic::generate_synthetic(
                crate::synthetic::SyntheticKind::SemiexplicitIndex1,
                &crate::synthetic::SyntheticParams { n1, n2, m: 1, p: 1, seed },
            ).unwrap();
            prop_assert_eq!(validate(&sys), validate(&sys));
            prop_assert!(validate(&sys).is_empty());
        }
    }
}
