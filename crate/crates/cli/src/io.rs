//! Text formats: TOML inputs and results, CSV tables, `key: value` reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use capgap_core::lattice::DefectEntry;
use capgap_core::{BlockStencil, Complex, DiagonalDefect, LatticeField, LatticeGeometry, Window};
use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::Precondition;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Precondition(format!("input file not found: {}", path.display())).into());
    }
    Ok(())
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    require_file(path)?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).map_err(|e| Precondition(format!("{}: {e}", path.display())).into())
}

pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, toml::to_string(value)?.as_bytes())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub offset: [i64; 2],
    /// Row-major `d×d`.
    pub matrix: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StencilFile {
    pub d: usize,
    pub radius: usize,
    pub decay: Decay,
    pub blocks: Vec<BlockEntry>,
}

impl StencilFile {
    pub fn from_stencil(s: &BlockStencil) -> Self {
        let blocks = s
            .blocks()
            .iter()
            .map(|(o, m)| BlockEntry { offset: *o, matrix: m.transpose().iter().copied().collect() })
            .collect();
        Self { d: s.d(), radius: s.radius(), decay: Decay { alpha: s.decay_alpha(), beta: s.decay_beta() }, blocks }
    }

    /// Rebuilds the stencil, re-checking symmetry and the decay certificate.
    pub fn to_stencil(&self) -> capgap_core::Result<BlockStencil> {
        let d = self.d;
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            if b.matrix.len() != d * d {
                return Err(capgap_core::Error::InvalidStencil(format!(
                    "block {:?} has {} entries, expected {}",
                    b.offset,
                    b.matrix.len(),
                    d * d
                )));
            }
            blocks.push((b.offset, DMatrix::from_row_slice(d, d, &b.matrix)));
        }
        let s = BlockStencil::new(d, blocks, self.decay.alpha, self.decay.beta)?;
        if s.radius() != self.radius {
            return Err(capgap_core::Error::InvalidStencil(format!(
                "declared radius {} but blocks reach {}",
                self.radius,
                s.radius()
            )));
        }
        Ok(s)
    }
}

pub fn load_stencil(path: &Path) -> Result<BlockStencil> {
    let f: StencilFile = read_toml(path)?;
    f.to_stencil().with_context(|| format!("invalid stencil in {}", path.display()))
}

pub fn save_stencil(path: &Path, s: &BlockStencil) -> Result<()> {
    write_toml(path, &StencilFile::from_stencil(s))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectRow {
    pub site: [i64; 2],
    /// Zero-based.
    pub component: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DefectFile {
    #[serde(default)]
    pub entries: Vec<DefectRow>,
}

impl DefectFile {
    pub fn to_defect(&self) -> capgap_core::Result<DiagonalDefect> {
        DiagonalDefect::new(
            self.entries.iter().map(|e| DefectEntry { site: e.site, component: e.component, value: e.value }).collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeVectors {
    pub e1: [f64; 2],
    pub e2: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonator {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryFile {
    pub lattice: LatticeVectors,
    pub resonators: Vec<Resonator>,
    pub n_e: f64,
    pub grid_n: usize,
    pub bz_grid_m: usize,
    pub stencil_radius: usize,
    /// `"staircase"` (default) or `"cut_edge"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<String>,
}

impl GeometryFile {
    pub fn to_geometry(&self) -> capgap_core::Result<LatticeGeometry> {
        LatticeGeometry::new(
            self.lattice.e1,
            self.lattice.e2,
            self.resonators.iter().map(|r| r.center).collect(),
            self.resonators.iter().map(|r| r.radius).collect(),
            self.n_e,
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceSection {
    /// Strip width; when absent it is chosen from a whole-space decay fit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stencil_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry_file: Option<PathBuf>,
    pub lambda: f64,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect_file: Option<PathBuf>,
    pub k_list: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_ref: Option<usize>,
    /// BZ grid used to locate the gap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bz_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_site: Option<[i64; 2]>,
    #[serde(default)]
    pub mirror_symmetric: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfspace: Option<HalfSpaceSection>,
}

impl ProblemFile {
    /// Parses, resolves referenced paths against the file's directory and
    /// checks that they exist and that numeric parameters are in range.
    pub fn load(path: &Path) -> Result<Self> {
        let mut p: ProblemFile = read_toml(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for f in [&mut p.stencil_file, &mut p.geometry_file, &mut p.defect_file].into_iter().flatten() {
            if f.is_relative() {
                *f = base.join(&*f);
            }
            require_file(f)?;
        }
        match (&p.stencil_file, &p.geometry_file) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => bail!(Precondition(format!("{}: give exactly one of stencil_file, geometry_file", path.display()))),
        }
        if p.sigma.is_nan() || p.sigma <= 0.0 {
            bail!(Precondition(format!("sigma must be positive, got {}", p.sigma)));
        }
        if p.k_list.is_empty() || p.k_list.contains(&0) {
            bail!(Precondition("k_list must be non-empty with every k ≥ 1".into()));
        }
        if p.bz_grid.is_some_and(|m| m < 8) {
            bail!(Precondition("bz_grid must be at least 8".into()));
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEntry {
    pub k1: usize,
    pub k2: usize,
    pub max_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkingSummary {
    pub k_ref: usize,
    pub seed_site: [i64; 2],
    pub seed_component: usize,
    pub overlap_norm: f64,
    pub delta: f64,
    pub c1: f64,
    pub c3: f64,
    pub n4: f64,
    pub t_star: f64,
    pub r: f64,
    pub rho: f64,
    pub m1: f64,
    pub big_m1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodResult {
    pub k: usize,
    /// `"ok"` or `"error"`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ascent_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ascent_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_quality: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_center: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linking: Option<LinkingSummary>,
    /// `"pass"`, `"fail"` or `"n/a"` per check.
    #[serde(default)]
    pub checks: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub lambda: f64,
    pub sigma: f64,
    pub d: usize,
    /// `"whole_space"` or `"half_space"`.
    pub geometry: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    pub k_ref: usize,
    pub seed_site: [i64; 2],
    pub gap_lower: f64,
    pub gap_upper: f64,
    pub converged: bool,
    pub all_checks_pass: bool,
    #[serde(default)]
    pub tail: Vec<TailEntry>,
    pub results: Vec<PeriodResult>,
}

pub const FIELD_HEADER: &str = "n1,n2,component,value";

/// One row per site and component, in window order. Fields are real.
pub fn field_csv(a: &LatticeField) -> String {
    let mut out = String::from(FIELD_HEADER);
    out.push('\n');
    let d = a.d();
    for (i, s) in a.window().sites().enumerate() {
        for c in 0..d {
            let _ = writeln!(out, "{},{},{},{}", s[0], s[1], c, fmt_f64(a.values()[i * d + c].re));
        }
    }
    out
}

/// Reads a field CSV onto `window`; every site and component must appear once.
pub fn read_field_csv(path: &Path, window: Window, d: usize) -> Result<LatticeField> {
    require_file(path)?;
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(FIELD_HEADER) {
        bail!(Precondition(format!("{}: expected header `{FIELD_HEADER}`", path.display())));
    }
    let mut field = LatticeField::zeros(window, d);
    let mut seen = vec![false; window.num_sites() * d];
    for (no, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = || Precondition(format!("{}:{}: malformed row `{line}`", path.display(), no + 2));
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            bail!(bad());
        }
        let site = [cols[0].parse::<i64>().map_err(|_| bad())?, cols[1].parse::<i64>().map_err(|_| bad())?];
        let c: usize = cols[2].parse().map_err(|_| bad())?;
        let v: f64 = cols[3].parse().map_err(|_| bad())?;
        let idx = window.cell_index(site).filter(|_| c < d).ok_or_else(|| {
            Precondition(format!("{}:{}: site {site:?} component {c} does not fit the problem's window", path.display(), no + 2))
        })?;
        if std::mem::replace(&mut seen[idx * d + c], true) {
            bail!(Precondition(format!("{}:{}: duplicate entry", path.display(), no + 2)));
        }
        field.values_mut()[idx * d + c] = Complex::new(v, 0.0);
    }
    if seen.iter().any(|s| !s) {
        bail!(Precondition(format!("{}: field does not cover the {}-site window with d = {d}", path.display(), window.num_sites())));
    }
    Ok(field)
}

/// `key: value` lines in insertion order.
#[derive(Clone, Debug, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.lines.push((key.into(), value.to_string()));
        self
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.push(key, fmt_f64(value))
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }

    pub fn parse(text: &str) -> Vec<(String, String)> {
        text.lines()
            .filter_map(|l| l.split_once(": "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_file_round_trips() {
        let s = BlockStencil::diatomic(5.0, 1.0, 0.5);
        let f = StencilFile::from_stencil(&s);
        let text = toml::to_string(&f).unwrap();
        let back: StencilFile = toml::from_str(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_stencil().unwrap(), s);
    }

    #[test]
    fn asymmetric_stencil_is_rejected_on_load() {
        let mut f = StencilFile::from_stencil(&BlockStencil::diatomic(5.0, 1.0, 0.5));
        f.blocks[0].matrix[0] += 0.1;
        assert!(f.to_stencil().is_err());
    }

    #[test]
    fn field_csv_round_trips_bitwise() {
        let w = Window::centered(4);
        let vals: Vec<f64> = (0..32).map(|i| (i as f64 * 0.37).sin() / 3.0).collect();
        let a = LatticeField::from_real(w, 2, &vals).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        write_atomic(&p, field_csv(&a).as_bytes()).unwrap();
        let b = read_field_csv(&p, w, 2).unwrap();
        assert_eq!(a, b);
        assert!(read_field_csv(&p, Window::centered(3), 2).is_err());
        assert!(read_field_csv(&p, w, 1).is_err());
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        let x = 0.1f64 + 0.2;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        assert_eq!(fmt_f64(-1.0), "-1.0000000000000000e0");
    }

    #[test]
    fn report_lines_parse_back() {
        let mut r = Report::default();
        r.push("residual_ok", "pass").num("energy", 0.25);
        let parsed = Report::parse(&r.render());
        assert_eq!(parsed[0], ("residual_ok".into(), "pass".into()));
        assert_eq!(parsed[1].1.parse::<f64>().unwrap(), 0.25);
    }
}
