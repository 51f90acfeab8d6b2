//! Matrix Market files, JSON manifests for systems and reduced models, provenance sidecars.
//!
//! Values are written with 17 significant digits, which round-trips every `f64` exactly.

use crate::matrix::{SparseMatrix, SysMatrix};
use crate::system::{
    validate, DescriptorSystem, InterpolationData, MatrixPolynomial, Method, Provenance, ReducedModel, StateSpace,
    StructureKind,
};
use crate::{CVec, Error, RMat, Result, C64};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const FORMAT_VERSION: u32 = 1;

fn parse_err(file: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { file: file.display().to_string(), line, msg: msg.into() }
}

/// Reads a real Matrix Market file. Coordinate files become sparse, array files dense.
pub fn read_matrix_market(path: &Path) -> Result<SysMatrix> {
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text, path)
}

pub fn parse_matrix_market(text: &str, path: &Path) -> Result<SysMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (hl, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(path, hl, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let coordinate = match tokens[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err(path, hl, format!("unsupported format '{other}'"))),
    };
    if !matches!(tokens[3].as_str(), "real" | "integer" | "double") {
        return Err(parse_err(path, hl, format!("unsupported field '{}'", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(path, hl, format!("unsupported symmetry '{other}'"))),
    };
    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (sl, size) = body.next().ok_or_else(|| parse_err(path, hl + 1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| parse_err(path, sl, format!("bad size token '{t}'"))))
        .collect::<Result<_>>()?;
    let num = |line: usize, t: &str| t.parse::<f64>().map_err(|_| parse_err(path, line, format!("bad number '{t}'")));
    if coordinate {
        let [nr, nc, nnz] = dims[..] else { return Err(parse_err(path, sl, "coordinate size line needs 3 integers")) };
        let mut t = Vec::with_capacity(nnz);
        for (line, l) in body.by_ref().take(nnz) {
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(parse_err(path, line, "expected 'row col value'"));
            }
            let idx = |s: &str, bound: usize| {
                s.parse::<usize>()
                    .ok()
                    .filter(|&k| k >= 1 && k <= bound)
                    .ok_or_else(|| parse_err(path, line, format!("index '{s}' out of range 1..={bound}")))
            };
            let (i, j, v) = (idx(parts[0], nr)? - 1, idx(parts[1], nc)? - 1, num(line, parts[2])?);
            t.push((i, j, v));
            if symmetric && i != j {
                t.push((j, i, v));
            }
        }
        if t.len() < nnz {
            return Err(parse_err(path, text.lines().count(), format!("expected {nnz} entries")));
        }
        if let Some((line, _)) = body.next() {
            return Err(parse_err(path, line, "trailing data after the declared entries"));
        }
        Ok(SysMatrix::Sparse(SparseMatrix::from_triplets(nr, nc, &t)))
    } else {
        let [nr, nc] = dims[..] else { return Err(parse_err(path, sl, "array size line needs 2 integers")) };
        let mut m = RMat::zeros(nr, nc);
        let slots: Vec<(usize, usize)> = if symmetric {
            (0..nc).flat_map(|j| (j..nr).map(move |i| (i, j))).collect()
        } else {
            (0..nc).flat_map(|j| (0..nr).map(move |i| (i, j))).collect()
        };
        let mut k = 0;
        for (line, l) in body {
            for tok in l.split_whitespace() {
                let &(i, j) = slots.get(k).ok_or_else(|| parse_err(path, line, "more values than the declared size"))?;
                let v = num(line, tok)?;
                m[(i, j)] = v;
                if symmetric {
                    m[(j, i)] = v;
                }
                k += 1;
            }
        }
        if k != slots.len() {
            return Err(parse_err(path, text.lines().count(), format!("expected {} values, found {k}", slots.len())));
        }
        Ok(SysMatrix::Dense(m))
    }
}

/// Array format, column major.
pub fn format_array(m: &RMat) -> String {
    let mut s = format!("%%MatrixMarket matrix array real general\n{} {}\n", m.nrows(), m.ncols());
    for v in m.iter() {
        let _ = writeln!(s, "{v:.16e}");
    }
    s
}

/// Coordinate format with 1-based indices in column-major order.
pub fn format_coordinate(m: &SparseMatrix) -> String {
    let t: Vec<_> = m.triplets().collect();
    let mut s = format!("%%MatrixMarket matrix coordinate real general\n{} {} {}\n", m.nrows(), m.ncols(), t.len());
    for (i, j, v) in t {
        let _ = writeln!(s, "{} {} {v:.16e}", i + 1, j + 1);
    }
    s
}

pub fn write_matrix_market(path: &Path, m: &SysMatrix) -> Result<()> {
    let text = match m {
        SysMatrix::Dense(d) => format_array(d),
        SysMatrix::Sparse(sp) => format_coordinate(sp),
    };
    fs::write(path, text)?;
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ManifestMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

/// JSON manifest binding matrix files to structure metadata. Paths are relative to the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemManifest {
    pub format_version: u32,
    pub e: PathBuf,
    pub a: PathBuf,
    pub b: PathBuf,
    pub c: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<PathBuf>,
    pub structure: StructureKind,
    #[serde(default)]
    pub metadata: ManifestMetadata,
}

fn base_dir(manifest: &Path) -> PathBuf {
    manifest.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn read_manifest<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| parse_err(path, e.line(), e.to_string()))?;
    let version = value.get("format_version").and_then(|v| v.as_u64());
    if version != Some(FORMAT_VERSION as u64) {
        return Err(parse_err(path, 1, format!("unsupported format_version {version:?}, expected {FORMAT_VERSION}")));
    }
    serde_json::from_value(value).map_err(|e| parse_err(path, 1, e.to_string()))
}

fn dense(m: SysMatrix) -> RMat {
    match m {
        SysMatrix::Dense(d) => d,
        SysMatrix::Sparse(s) => s.to_dense(),
    }
}

/// Loads and validates a system; `D` defaults to zero.
pub fn load_system(manifest_path: &Path) -> Result<DescriptorSystem> {
    let man: SystemManifest = read_manifest(manifest_path)?;
    let dir = base_dir(manifest_path);
    let e = read_matrix_market(&dir.join(&man.e))?;
    let a = read_matrix_market(&dir.join(&man.a))?;
    let b = dense(read_matrix_market(&dir.join(&man.b))?);
    let c = dense(read_matrix_market(&dir.join(&man.c))?);
    let d = match &man.d {
        Some(p) => dense(read_matrix_market(&dir.join(p))?),
        None => RMat::zeros(c.nrows(), b.ncols()),
    };
    let sys = DescriptorSystem::new(e, a, b, c, d, man.structure)?;
    let diags = validate(&sys);
    if !diags.is_empty() {
        return Err(Error::ValidationFailed(diags));
    }
    Ok(sys)
}

/// Writes `E.mtx` ... `D.mtx` and `system.json` into `dir`; returns the manifest path.
pub fn save_system(system: &DescriptorSystem, dir: &Path, metadata: ManifestMetadata) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    write_matrix_market(&dir.join("E.mtx"), &system.e)?;
    write_matrix_market(&dir.join("A.mtx"), &system.a)?;
    fs::write(dir.join("B.mtx"), format_array(&system.b))?;
    fs::write(dir.join("C.mtx"), format_array(&system.c))?;
    fs::write(dir.join("D.mtx"), format_array(&system.d))?;
    let man = SystemManifest {
        format_version: FORMAT_VERSION,
        e: "E.mtx".into(),
        a: "A.mtx".into(),
        b: "B.mtx".into(),
        c: "C.mtx".into(),
        d: Some("D.mtx".into()),
        structure: system.structure,
        metadata,
    };
    let path = dir.join("system.json");
    fs::write(&path, serde_json::to_string_pretty(&man)? + "\n")?;
    Ok(path)
}

/// `[re, im]` pairs keep the JSON free of custom complex encodings.
type Pair = [f64; 2];

fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn unpair(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub method: Method,
    pub finite_order: usize,
    pub infinite_order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shifts: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_dirs: Option<Vec<Vec<Pair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_dirs: Option<Vec<Vec<Pair>>>,
}

impl From<&Provenance> for ProvenanceRecord {
    fn from(p: &Provenance) -> Self {
        let dirs = |v: &[CVec]| v.iter().map(|d| d.iter().map(|z| pair(*z)).collect()).collect();
        ProvenanceRecord {
            method: p.method,
            finite_order: p.finite_order,
            infinite_order: p.infinite_order,
            iterations: p.iterations,
            converged: p.converged,
            shifts: p.data.as_ref().map(|d| d.points.iter().map(|z| pair(*z)).collect()),
            right_dirs: p.data.as_ref().map(|d| dirs(&d.right_dirs)),
            left_dirs: p.data.as_ref().map(|d| dirs(&d.left_dirs)),
        }
    }
}

impl ProvenanceRecord {
    fn into_provenance(self) -> Result<Provenance> {
        let dirs = |v: Vec<Vec<Pair>>| v.into_iter().map(|d| CVec::from_iterator(d.len(), d.into_iter().map(unpair))).collect();
        let data = match (self.shifts, self.right_dirs, self.left_dirs) {
            (Some(s), Some(r), Some(l)) => Some(InterpolationData::new(s.into_iter().map(unpair).collect(), dirs(r), dirs(l))?),
            (None, None, None) => None,
            _ => return Err(Error::InvalidArgument("provenance needs shifts and both direction lists together".into())),
        };
        Ok(Provenance {
            method: self.method,
            data,
            finite_order: self.finite_order,
            infinite_order: self.infinite_order,
            iterations: self.iterations,
            converged: self.converged,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct StateSpaceFiles {
    e: PathBuf,
    a: PathBuf,
    b: PathBuf,
    c: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ModelManifest {
    format_version: u32,
    order: usize,
    e: PathBuf,
    a: PathBuf,
    b: PathBuf,
    c: PathBuf,
    d: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    improper: Option<PathBuf>,
    /// Coefficient files `P0, P1, ...` of the polynomial part.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polynomial: Option<Vec<PathBuf>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    finite: Option<StateSpaceFiles>,
    provenance: PathBuf,
}

/// Writes the reduced model into `dir` (`model.json` plus `.mtx` files and `provenance.json`).
pub fn save_model(model: &ReducedModel, dir: &Path) -> Result<PathBuf> {
    model.check_dimensions()?;
    fs::create_dir_all(dir)?;
    let put = |name: &str, m: &RMat| -> Result<PathBuf> {
        fs::write(dir.join(name), format_array(m))?;
        Ok(PathBuf::from(name))
    };
    let polynomial = match &model.polynomial_part {
        Some(p) => Some(
            (0..p.coeffs().len())
                .map(|k| put(&format!("P{k}.mtx"), &p.coeffs()[k]))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    let finite = match &model.finite {
        Some(f) => Some(StateSpaceFiles {
            e: put("Ef.mtx", &f.e)?,
            a: put("Af.mtx", &f.a)?,
            b: put("Bf.mtx", &f.b)?,
            c: put("Cf.mtx", &f.c)?,
        }),
        None => None,
    };
    let man = ModelManifest {
        format_version: FORMAT_VERSION,
        order: model.order(),
        e: put("E.mtx", &model.e)?,
        a: put("A.mtx", &model.a)?,
        b: put("B.mtx", &model.b)?,
        c: put("C.mtx", &model.c)?,
        d: put("D.mtx", &model.d)?,
        improper: model.improper.as_ref().map(|l| put("L.mtx", l)).transpose()?,
        polynomial,
        finite,
        provenance: "provenance.json".into(),
    };
    let record = ProvenanceRecord::from(&model.provenance);
    fs::write(dir.join("provenance.json"), serde_json::to_string_pretty(&record)? + "\n")?;
    let path = dir.join("model.json");
    fs::write(&path, serde_json::to_string_pretty(&man)? + "\n")?;
    Ok(path)
}

pub fn load_model(manifest_path: &Path) -> Result<ReducedModel> {
    let man: ModelManifest = read_manifest(manifest_path)?;
    let dir = base_dir(manifest_path);
    let get = |p: &Path| -> Result<RMat> { Ok(dense(read_matrix_market(&dir.join(p))?)) };
    let d = get(&man.d)?;
    let polynomial_part = match &man.polynomial {
        Some(files) => {
            let coeffs = files.iter().map(|f| get(f)).collect::<Result<Vec<_>>>()?;
            Some(MatrixPolynomial::new(d.nrows(), d.ncols(), coeffs)?)
        }
        None => None,
    };
    let finite = match &man.finite {
        Some(f) => Some(StateSpace { e: get(&f.e)?, a: get(&f.a)?, b: get(&f.b)?, c: get(&f.c)? }),
        None => None,
    };
    let prov_path = dir.join(&man.provenance);
    let record: ProvenanceRecord = serde_json::from_str(&fs::read_to_string(&prov_path)?)
        .map_err(|e| parse_err(&prov_path, e.line(), e.to_string()))?;
    let model = ReducedModel {
        e: get(&man.e)?,
        a: get(&man.a)?,
        b: get(&man.b)?,
        c: get(&man.c)?,
        d,
        improper: man.improper.as_deref().map(get).transpose()?,
        polynomial_part,
        finite,
        provenance: record.into_provenance()?,
    };
    model.check_dimensions()?;
    if model.order() != man.order {
        return Err(Error::DimensionMismatch(format!("manifest order {} but matrices have order {}", man.order, model.order())));
    }
    Ok(model)
}
