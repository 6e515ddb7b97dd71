use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use capgap_core::cell::{
    bloch_capacitance, complete_by_conjugation, exterior_spectrum_floor, independent_kappas,
    realspace_stencil_from_samples, BoundaryScheme, CellGrid,
};
use capgap_core::soliton::{
    build_linking_set, certify, default_reference_period, k_sweep, solve, Certification, Geometry, LinkingSet,
    ProblemSpec, SolitonResult,
};
use capgap_core::spectrum::{
    band_structure, bz_grid, find_refined_gaps, hermitian_eigen, lp_norm_probe, operator_norm, Side, SpectralGap,
    SpectralProjector,
};
use capgap_core::{BlockStencil, DiagonalDefect, Site};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cli::{Cli, Command, Global};
use crate::io::{
    field_csv, fmt_f64, load_stencil, read_field_csv, read_toml, save_stencil, write_atomic, write_toml, DefectFile,
    GeometryFile, LinkingSummary, PeriodResult, ProblemFile, Report, ResultFile, TailEntry,
};
use crate::{Precondition, EXIT_CERTIFICATION, EXIT_OK};

pub fn run(cli: &Cli) -> Result<u8> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.global.workers).build()?;
    let g = &cli.global;
    pool.install(|| match &cli.command {
        Command::Kernel { geometry, bz_grid, stencil_radius, grid_n, floor } => {
            kernel(g, geometry, *bz_grid, *stencil_radius, *grid_n, *floor)
        }
        Command::Bands { stencil, bz_grid } => bands(g, stencil, *bz_grid),
        Command::Gaps { stencil, bz_grid, projector_k } => gaps(g, stencil, *bz_grid, *projector_k),
        Command::Soliton { problem } => soliton(g, problem),
        Command::Verify { result, problem } => verify(g, result, problem),
    })
}

fn say(g: &Global, msg: impl AsRef<str>) {
    if !g.quiet {
        println!("{}", msg.as_ref());
    }
}

/// Fiber diagnostics collected while building a stencil from geometry.
#[derive(Clone, Debug)]
pub struct KernelDiagnostics {
    pub max_hermitian_defect: f64,
    pub min_fiber_eigenvalue: f64,
    pub max_fiber_eigenvalue: f64,
}

/// Cell problems on the `M×M` grid (in parallel), then the inverse transform.
pub fn stencil_from_geometry(gf: &GeometryFile, m: usize, radius: usize, n: usize) -> Result<(BlockStencil, KernelDiagnostics)> {
    if n < 8 {
        bail!(Precondition(format!("grid_n must be at least 8, got {n}")));
    }
    if m < 2 * radius + 1 {
        bail!(Precondition(format!("M ≥ 2R+1 violated ({m} < {})", 2 * radius + 1)));
    }
    let scheme = match gf.boundary.as_deref() {
        None | Some("staircase") => BoundaryScheme::Staircase,
        Some("cut_edge") => BoundaryScheme::CutEdge,
        Some(other) => bail!(Precondition(format!("unknown boundary scheme `{other}`"))),
    };
    let geom = gf.to_geometry()?;
    let grid = CellGrid::new(&geom, n, scheme)?;
    let kappas = bz_grid(m);
    let samples = independent_kappas(m)
        .into_par_iter()
        .map(|p| bloch_capacitance(&grid, kappas[p]).map(|c| (p, c.matrix)))
        .collect::<capgap_core::Result<Vec<_>>>()?;
    let fibers = complete_by_conjugation(m, &samples)?;
    let mut diag = KernelDiagnostics {
        max_hermitian_defect: 0.0,
        min_fiber_eigenvalue: f64::INFINITY,
        max_fiber_eigenvalue: f64::NEG_INFINITY,
    };
    for c in &fibers {
        let h = (c - c.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        diag.max_hermitian_defect = diag.max_hermitian_defect.max(h);
        let (ev, _) = hermitian_eigen(c);
        diag.min_fiber_eigenvalue = diag.min_fiber_eigenvalue.min(ev[0]);
        diag.max_fiber_eigenvalue = diag.max_fiber_eigenvalue.max(ev[ev.len() - 1]);
    }
    let stencil = realspace_stencil_from_samples(m, &fibers, radius)?;
    Ok((stencil, diag))
}

fn kernel(g: &Global, path: &Path, bz: Option<usize>, r: Option<usize>, n: Option<usize>, floor: bool) -> Result<u8> {
    let start = Instant::now();
    let gf: GeometryFile = read_toml(path)?;
    let (m, radius, n) = (bz.unwrap_or(gf.bz_grid_m), r.unwrap_or(gf.stencil_radius), n.unwrap_or(gf.grid_n));
    let (stencil, diag) = stencil_from_geometry(&gf, m, radius, n)?;
    let stencil_path = g.out.join("stencil.toml");
    save_stencil(&stencil_path, &stencil)?;
    let mut rep = Report::default();
    rep.push("geometry_file", path.display())
        .push("grid_n", n)
        .push("bz_grid_m", m)
        .push("stencil_radius", radius)
        .push("blocks", stencil.blocks().len())
        .num("decay_alpha", stencil.decay_alpha())
        .num("decay_beta", stencil.decay_beta())
        .num("max_hermitian_defect", diag.max_hermitian_defect)
        .num("min_fiber_eigenvalue", diag.min_fiber_eigenvalue)
        .num("max_fiber_eigenvalue", diag.max_fiber_eigenvalue)
        .num("norm_bound", stencil.norm_bound());
    if floor {
        let gf_geom = gf.to_geometry()?;
        let grid = CellGrid::new(&gf_geom, n, BoundaryScheme::Staircase)?;
        let f = exterior_spectrum_floor(&grid, m)?;
        rep.num("spectrum_floor", f).num("lambda0", 0.5 * f);
    }
    rep.num("runtime_seconds", start.elapsed().as_secs_f64());
    write_atomic(&g.out.join("kernel_report.txt"), rep.render().as_bytes())?;
    say(g, format!("wrote {} ({} blocks, beta = {:.4})", stencil_path.display(), stencil.blocks().len(), stencil.decay_beta()));
    Ok(EXIT_OK)
}

/// Band table with header `kappa1,kappa2,band_1..band_d`.
pub fn bands_csv(stencil: &BlockStencil, m: usize) -> Result<String> {
    let b = band_structure(stencil, m)?;
    let mut out = String::from("kappa1,kappa2");
    for j in 1..=b.d() {
        let _ = write!(out, ",band_{j}");
    }
    out.push('\n');
    for (k, ev) in b.kappas.iter().zip(&b.bands) {
        out.push_str(&format!("{},{}", fmt_f64(k[0]), fmt_f64(k[1])));
        for v in ev {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    Ok(out)
}

fn bands(g: &Global, path: &Path, m: usize) -> Result<u8> {
    let stencil = load_stencil(path)?;
    let csv = bands_csv(&stencil, m)?;
    let out = g.out.join("bands.csv");
    write_atomic(&out, csv.as_bytes())?;
    say(g, format!("wrote {}", out.display()));
    Ok(EXIT_OK)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectorSummary {
    pub k: usize,
    pub kernel_file: String,
    pub rank: usize,
    pub c1: f64,
    pub c3: f64,
    pub n4_certificate: f64,
    pub l4_probe: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_quality: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub bands_below: usize,
    pub inf_positive: bool,
    pub spectrum_below: bool,
    pub spectrum_above: bool,
    pub qualifies: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projector: Option<ProjectorSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapsReport {
    pub bz_grid: usize,
    pub operator_norm: f64,
    pub qualifying: usize,
    #[serde(default)]
    pub gaps: Vec<GapEntry>,
}

fn gap_entry(gap: &SpectralGap) -> GapEntry {
    GapEntry {
        lower: gap.lower,
        upper: gap.upper,
        width: gap.width(),
        bands_below: gap.below,
        inf_positive: gap.inf_positive,
        spectrum_below: gap.spectrum_below,
        spectrum_above: gap.spectrum_above,
        qualifies: gap.qualifies(),
        projector: None,
    }
}

fn kernel_csv(p: &SpectralProjector) -> String {
    let kernel = p.kernel();
    let w = p.window();
    let mut out = String::from("n1,n2,m1,m2,i,j,value\n");
    for n in w.sites() {
        for m in w.sites() {
            let e = kernel.entry(n, m);
            for i in 0..e.nrows() {
                for j in 0..e.ncols() {
                    let _ = writeln!(out, "{},{},{},{},{i},{j},{}", n[0], n[1], m[0], m[1], fmt_f64(e[(i, j)]));
                }
            }
        }
    }
    out
}

fn gaps(g: &Global, path: &Path, m: usize, projector_k: Option<usize>) -> Result<u8> {
    let stencil = load_stencil(path)?;
    let b = band_structure(&stencil, m)?;
    let found = find_refined_gaps(&stencil, &b);
    let mut report = GapsReport {
        bz_grid: m,
        operator_norm: operator_norm(&stencil, &b),
        qualifying: found.iter().filter(|g| g.qualifies()).count(),
        gaps: found.iter().map(gap_entry).collect(),
    };
    if let Some(k) = projector_k {
        for (idx, (gap, entry)) in found.iter().zip(report.gaps.iter_mut()).enumerate() {
            if !gap.qualifies() {
                continue;
            }
            let p = SpectralProjector::new(&stencil, k, gap.lower, gap.upper, Side::Plus)?;
            let name = format!("projector_k{k}_gap{idx}.csv");
            write_atomic(&g.out.join(&name), kernel_csv(&p).as_bytes())?;
            let cert = p.kernel().lp_certificate()?;
            let fit = p.kernel().decay_fit().ok();
            entry.projector = Some(ProjectorSummary {
                k,
                kernel_file: name,
                rank: p.rank(),
                c1: cert.c1,
                c3: cert.c3,
                n4_certificate: cert.n_p(4.0),
                l4_probe: lp_norm_probe(&p, 4.0, 64, g.seed),
                decay_gamma: fit.map(|f| f.gamma),
                decay_quality: fit.map(|f| f.quality),
            });
        }
    }
    write_toml(&g.out.join("gaps.toml"), &report)?;
    if report.qualifying == 0 {
        say(g, "no qualifying gap");
    }
    for gap in report.gaps.iter() {
        say(g, format!("gap ({:.10}, {:.10}) width {:.3e} qualifies={}", gap.lower, gap.upper, gap.width, gap.qualifies));
    }
    Ok(EXIT_OK)
}

/// Problem inputs resolved into a solvable specification.
pub struct Loaded {
    pub problem: ProblemFile,
    pub spec: ProblemSpec,
    pub seed: Site,
    pub k_ref: usize,
    pub width: Option<usize>,
    /// Whole-space decay rate used to choose the strip width, if it was chosen.
    pub bulk_gamma: Option<f64>,
}

fn load_problem_stencil(g: &Global, pf: &ProblemFile, write: bool) -> Result<BlockStencil> {
    match (&pf.stencil_file, &pf.geometry_file) {
        (Some(s), _) => load_stencil(s),
        (None, Some(geo)) => {
            let gf: GeometryFile = read_toml(geo)?;
            let (s, _) = stencil_from_geometry(&gf, gf.bz_grid_m, gf.stencil_radius, gf.grid_n)?;
            if write {
                save_stencil(&g.out.join("stencil.toml"), &s)?;
            }
            Ok(s)
        }
        (None, None) => unreachable!("checked at load"),
    }
}

fn gap_list(gaps: &[SpectralGap]) -> String {
    if gaps.is_empty() {
        return "no gaps found".into();
    }
    gaps.iter()
        .map(|g| format!("({}, {}){}", g.lower, g.upper, if g.qualifies() { "" } else { " [not qualifying]" }))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Parses a problem and builds its spec; `width` fixes an automatic strip width.
pub fn load(g: &Global, path: &Path, width_override: Option<usize>, write: bool) -> Result<Loaded> {
    let pf = ProblemFile::load(path)?;
    let stencil = load_problem_stencil(g, &pf, write)?;
    let defect = match &pf.defect_file {
        Some(f) => read_toml::<DefectFile>(f)?.to_defect().with_context(|| format!("invalid defect in {}", f.display()))?,
        None => DiagonalDefect::empty(),
    };
    let m = pf.bz_grid.unwrap_or(64).max(2 * stencil.radius() + 1);
    let bands = band_structure(&stencil, m)?;
    let gaps = find_refined_gaps(&stencil, &bands);
    let Some(gap) = gaps.iter().copied().find(|gp| gp.qualifies() && gp.contains(pf.lambda)) else {
        bail!(Precondition(format!("lambda = {} lies in no qualifying gap; gaps: {}", pf.lambda, gap_list(&gaps))));
    };
    let op_norm = operator_norm(&stencil, &bands);
    let k_ref = pf.k_ref.unwrap_or_else(|| default_reference_period(&pf.k_list));
    let new_spec = |geometry| {
        ProblemSpec::new(stencil.clone(), defect.clone(), pf.lambda, pf.sigma, Some(gap), op_norm, geometry, pf.mirror_symmetric)
    };
    let (geometry, bulk_gamma) = match &pf.halfspace {
        None => (Geometry::WholeSpace, None),
        Some(h) => match h.width.or(width_override) {
            Some(w) => (Geometry::HalfSpace { width: w }, None),
            None => {
                let whole = new_spec(Geometry::WholeSpace)?;
                let kmax = *pf.k_list.iter().max().expect("non-empty");
                let bulk = solve(&whole, kmax, pf.seed_site.unwrap_or([0, 0]), k_ref, None)?;
                let gamma = bulk.decay_gamma().filter(|g| g.is_finite() && *g > 0.0).ok_or_else(|| {
                    Precondition("cannot choose a strip width: the whole-space decay fit failed; set halfspace.width".into())
                })?;
                (Geometry::HalfSpace { width: (8.0 / gamma).ceil() as usize }, Some(gamma))
            }
        },
    };
    if pf.mirror_symmetric && !stencil.mirror_invariant() {
        eprintln!("warning: mirror symmetry asserted but the stencil is not invariant under (m1, m2) -> (-m1, m2)");
    }
    let spec = new_spec(geometry)?;
    let width = match geometry {
        Geometry::HalfSpace { width } => Some(width),
        Geometry::WholeSpace => None,
    };
    let seed = pf.seed_site.unwrap_or_else(|| spec.default_seed());
    Ok(Loaded { problem: pf, spec, seed, k_ref, width, bulk_gamma })
}

fn check_word(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "pass",
        Some(false) => "fail",
        None => "n/a",
    }
}

/// `key: value` block echoing each check next to the numbers it tested.
pub fn certification_block(rep: &mut Report, prefix: &str, spec: &ProblemSpec, c: &Certification, max_imag: f64) {
    let key = |s: &str| format!("{prefix}{s}");
    let gap = spec.gap();
    rep.push(key("in_gap"), check_word(Some(c.checks.in_gap))).num(key("lambda"), spec.lambda());
    if let Some(gp) = gap {
        rep.num(key("gap_lower"), gp.lower).num(key("gap_upper"), gp.upper);
    }
    rep.push(key("defect_ok"), check_word(Some(c.checks.defect_ok))).num(key("defect_norm_l1"), c.defect_norm);
    if let Some(d) = c.delta {
        rep.num(key("delta"), d);
    }
    rep.push(key("residual_ok"), check_word(Some(c.checks.residual_ok)))
        .num(key("residual_norm"), c.residual_norm)
        .num(key("residual_tolerance"), c.residual_tolerance);
    rep.push(key("nontrivial"), check_word(Some(c.checks.nontrivial)));
    if let (Some(o), Some(m1)) = (c.overlap, c.m1) {
        rep.num(key("overlap"), o).num(key("m1"), m1);
    }
    rep.push(key("critical_value_ok"), check_word(c.checks.critical_value_ok)).num(key("energy"), c.energy);
    if let Some(f) = c.critical_floor {
        rep.num(key("critical_floor"), f);
    }
    rep.push(key("realness_ok"), check_word(Some(c.checks.realness_ok))).num(key("max_imag"), max_imag);
    rep.push(key("norm_bound_ok"), check_word(c.checks.norm_bound_ok)).num(key("a_norm"), c.a_norm);
    if let Some(m) = c.big_m1 {
        rep.num(key("big_m1"), m);
    }
    rep.push(key("decay_ok"), check_word(c.checks.decay_ok));
    if let Some(f) = c.decay {
        rep.num(key("decay_gamma"), f.gamma).num(key("decay_quality"), f.quality);
    }
    if let Some(e) = c.edge_distance {
        rep.num(key("edge_distance"), e);
    }
}

fn max_imag(a: &capgap_core::LatticeField) -> f64 {
    a.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max)
}

fn linking_summary(s: &LinkingSet) -> LinkingSummary {
    LinkingSummary {
        k_ref: s.k_ref,
        seed_site: s.seed,
        seed_component: s.seed_component,
        overlap_norm: s.overlap_norm,
        delta: s.delta,
        c1: s.c1,
        c3: s.c3,
        n4: s.n4,
        t_star: s.t_star,
        r: s.r,
        rho: s.rho,
        m1: s.m1,
        big_m1: s.big_m1,
    }
}

fn period_result(r: &SolitonResult, field_file: String) -> PeriodResult {
    let c = &r.certification;
    PeriodResult {
        k: r.k,
        status: "ok".into(),
        error: None,
        field_file: Some(field_file),
        newton_iterations: Some(r.newton_iterations),
        ascent_iterations: r.ascent_iterations,
        ascent_energy: r.ascent_energy,
        energy: Some(c.energy),
        residual_norm: Some(c.residual_norm),
        residual_tolerance: Some(c.residual_tolerance),
        a_norm: Some(c.a_norm),
        overlap: c.overlap,
        critical_floor: c.critical_floor,
        decay_gamma: c.decay.map(|f| f.gamma),
        decay_quality: c.decay.map(|f| f.quality),
        decay_center: Some(c.decay_center),
        edge_distance: c.edge_distance,
        linking: r.linking.as_ref().map(linking_summary),
        checks: c.checks.entries().iter().map(|(n, v)| (n.to_string(), check_word(*v).to_string())).collect(),
    }
}

fn soliton(g: &Global, path: &Path) -> Result<u8> {
    let start = Instant::now();
    let ld = load(g, path, None, true)?;
    let spec = &ld.spec;
    if let Some(gamma) = ld.bulk_gamma {
        say(g, format!("strip width {} from bulk decay rate {gamma:.4}", ld.width.unwrap_or(0)));
    }
    if !spec.defect_admissible() {
        eprintln!("warning: 2‖V‖₁ ≥ δ; the run proceeds but defect_ok will fail");
    }
    let sweep = k_sweep(spec, &ld.problem.k_list, ld.seed, ld.k_ref, None)?;
    let mut rep = Report::default();
    let mut periods = Vec::new();
    let mut all_ok = true;
    let mut first_err = None;
    for (k, r) in &sweep.results {
        match r {
            Ok(res) => {
                let name = format!("field_k{k}.csv");
                write_atomic(&g.out.join(&name), field_csv(&res.a).as_bytes())?;
                certification_block(&mut rep, &format!("k{k}."), spec, &res.certification, max_imag(&res.a));
                all_ok &= res.certification.checks.all_pass();
                say(
                    g,
                    format!(
                        "k = {k}: residual {:.2e}, energy {:.6e}, checks {}",
                        res.residual_norm(),
                        res.energy(),
                        if res.certification.checks.all_pass() { "pass" } else { "FAIL" }
                    ),
                );
                periods.push(period_result(res, name));
            }
            Err(e) => {
                all_ok = false;
                rep.push(format!("k{k}.status"), "error");
                say(g, format!("k = {k}: {e}"));
                periods.push(PeriodResult {
                    k: *k,
                    status: "error".into(),
                    error: Some(e.to_string()),
                    field_file: None,
                    newton_iterations: None,
                    ascent_iterations: None,
                    ascent_energy: None,
                    energy: None,
                    residual_norm: None,
                    residual_tolerance: None,
                    a_norm: None,
                    overlap: None,
                    critical_floor: None,
                    decay_gamma: None,
                    decay_quality: None,
                    decay_center: None,
                    edge_distance: None,
                    linking: None,
                    checks: Default::default(),
                });
                first_err.get_or_insert_with(|| e.clone());
            }
        }
    }
    let gap = spec.gap().expect("gap located at load");
    let result = ResultFile {
        lambda: spec.lambda(),
        sigma: spec.sigma(),
        d: spec.d(),
        geometry: if ld.width.is_some() { "half_space" } else { "whole_space" }.into(),
        width: ld.width,
        k_ref: ld.k_ref,
        seed_site: ld.seed,
        gap_lower: gap.lower,
        gap_upper: gap.upper,
        converged: sweep.converged,
        all_checks_pass: all_ok,
        tail: sweep.tail.iter().map(|&(k1, k2, max_diff)| TailEntry { k1, k2, max_diff }).collect(),
        results: periods,
    };
    for t in &result.tail {
        rep.num(format!("tail.k{}_k{}", t.k1, t.k2), t.max_diff);
    }
    rep.push("converged", sweep.converged).push("all_checks", if all_ok { "pass" } else { "fail" });
    rep.num("runtime_seconds", start.elapsed().as_secs_f64());
    write_toml(&g.out.join("result.toml"), &result)?;
    write_atomic(&g.out.join("certification.txt"), rep.render().as_bytes())?;
    say(g, format!("wrote {}", g.out.join("result.toml").display()));
    if sweep.successes().next().is_none() {
        return Err(first_err.expect("every period failed").into());
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_CERTIFICATION })
}

fn verify(g: &Global, result_path: &Path, problem_path: &Path) -> Result<u8> {
    let rf: ResultFile = read_toml(result_path)?;
    let ld = load(g, problem_path, rf.width, false)?;
    let spec = &ld.spec;
    let mismatch = |what: &str, res: String, prob: String| -> anyhow::Error {
        Precondition(format!("result/problem mismatch: {what} is {res} in the result but {prob} in the problem")).into()
    };
    if rf.lambda != spec.lambda() {
        return Err(mismatch("lambda", rf.lambda.to_string(), spec.lambda().to_string()));
    }
    if rf.sigma != spec.sigma() {
        return Err(mismatch("sigma", rf.sigma.to_string(), spec.sigma().to_string()));
    }
    if rf.d != spec.d() {
        return Err(mismatch("d", rf.d.to_string(), spec.d().to_string()));
    }
    if rf.width != ld.width {
        return Err(mismatch("strip width", format!("{:?}", rf.width), format!("{:?}", ld.width)));
    }
    let base: PathBuf = result_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut rep = Report::default();
    let mut all = true;
    for pr in rf.results.iter().filter(|p| p.status == "ok") {
        let k = pr.k;
        let file = pr.field_file.as_ref().ok_or_else(|| Precondition(format!("k = {k}: no field file recorded")))?;
        let a = read_field_csv(&base.join(file), spec.window(k), spec.d())?;
        let (set, _, _) = build_linking_set(spec, k, rf.seed_site, rf.k_ref)?;
        let cert = certify(spec, &a, Some(&set))?;
        let prefix = format!("k{k}.");
        certification_block(&mut rep, &prefix, spec, &cert, max_imag(&a));
        let stored = pr.residual_norm.unwrap_or(f64::NAN);
        let matches = (cert.residual_norm - stored).abs() <= 1e-12;
        rep.push(format!("{prefix}stored_residual_matches"), check_word(Some(matches))).num(format!("{prefix}stored_residual_norm"), stored);
        all &= matches && cert.checks.all_pass();
        for (name, v) in cert.checks.entries() {
            let word = match v {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "N/A",
            };
            say(g, format!("k={k} {name} {word}"));
        }
        say(g, format!("k={k} residual {:.3e} (stored {:.3e}) {}", cert.residual_norm, stored, if matches { "PASS" } else { "FAIL" }));
    }
    if rf.results.iter().all(|p| p.status != "ok") {
        bail!(Precondition("result file contains no successful period".into()));
    }
    rep.push("all_checks", if all { "pass" } else { "fail" });
    write_atomic(&g.out.join("verify.txt"), rep.render().as_bytes())?;
    Ok(if all { EXIT_OK } else { EXIT_CERTIFICATION })
}
