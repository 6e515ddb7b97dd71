use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use capgap::io::{read_toml, save_stencil, write_toml, DefectFile, DefectRow, ResultFile, StencilFile};
use capgap_core::BlockStencil;

fn capgap(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capgap"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("spawn capgap")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Self { dir: tempfile::tempdir().unwrap() };
        save_stencil(&f.path("diatomic.toml"), &BlockStencil::diatomic(5.0, 1.0, 0.5)).unwrap();
        save_stencil(&f.path("dimer.toml"), &BlockStencil::mirror_dimer(5.0, 1.0, 0.5, 0.1)).unwrap();
        save_stencil(&f.path("identity.toml"), &BlockStencil::identity(1)).unwrap();
        f.defect("small.toml", -0.1);
        f.defect("large.toml", -0.3);
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    fn defect(&self, name: &str, v: f64) {
        let f = DefectFile { entries: vec![DefectRow { site: [0, 0], component: 0, value: v }] };
        write_toml(&self.path(name), &f).unwrap();
    }

    fn write(&self, name: &str, text: &str) -> String {
        fs::write(self.path(name), text).unwrap();
        self.s(name)
    }

    fn problem(&self, name: &str, body: &str) -> String {
        self.write(name, &format!("stencil_file = \"diatomic.toml\"\nsigma = 1.0\n{body}"))
    }
}

const GEOMETRY: &str = "n_e = 1.0\ngrid_n = 24\nbz_grid_m = 9\nstencil_radius = 2\n\n[lattice]\ne1 = [1.0, 0.0]\ne2 = [0.0, 1.0]\n\n[[resonators]]\ncenter = [0.5, 0.5]\nradius = 0.25\n";

#[test]
fn missing_input_exits_2_and_names_the_path() {
    let f = Fixture::new();
    let missing = f.s("nowhere.toml");
    for args in [vec!["kernel", &missing], vec!["bands", &missing], vec!["soliton", &missing]] {
        let o = capgap(&f.path("out"), &args);
        assert_eq!(code(&o), 2);
        assert!(stderr(&o).contains(&missing), "{}", stderr(&o));
    }
    let p = f.problem("p.toml", "lambda = 5.0\nk_list = [8]\ndefect_file = \"absent.toml\"\n");
    let o = capgap(&f.path("out"), &["soliton", &p]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("absent.toml"));
}

#[test]
fn kernel_stencil_reloads_with_invariants() {
    let f = Fixture::new();
    let geo = f.write("geo.toml", GEOMETRY);
    let out = f.path("k");
    let o = capgap(&out, &["--quiet", "kernel", &geo]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let sf: StencilFile = read_toml(&out.join("stencil.toml")).unwrap();
    let s = sf.to_stencil().unwrap();
    assert!(s.decay_beta() > 0.0);
    assert_eq!(StencilFile::from_stencil(&s), sf);
    let report = fs::read_to_string(out.join("kernel_report.txt")).unwrap();
    assert!(report.contains("decay_beta: "));

    let o = capgap(&out, &["kernel", &geo, "--bz-grid", "9", "--stencil-radius", "5"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("9 < 11"));
}

#[test]
fn bands_are_byte_identical_across_runs() {
    let f = Fixture::new();
    let (a, b) = (f.path("a"), f.path("b"));
    let st = f.s("diatomic.toml");
    assert_eq!(code(&capgap(&a, &["bands", &st, "--bz-grid", "12"])), 0);
    assert_eq!(code(&capgap(&b, &["--workers", "3", "bands", &st, "--bz-grid", "12"])), 0);
    let (x, y) = (fs::read(a.join("bands.csv")).unwrap(), fs::read(b.join("bands.csv")).unwrap());
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("kappa1,kappa2,band_1,band_2\n"));
    assert_eq!(text.lines().count(), 1 + 144);
}

#[test]
fn gap_reports() {
    let f = Fixture::new();
    let out = f.path("g");
    let o = capgap(&out, &["gaps", &f.s("diatomic.toml"), "--projector-k", "8"]);
    assert_eq!(code(&o), 0);
    let rep: capgap::commands::GapsReport = read_toml(&out.join("gaps.toml")).unwrap();
    assert_eq!(rep.qualifying, 1);
    assert!((rep.gaps[0].lower - 4.5).abs() < 1e-6 && (rep.gaps[0].upper - 5.5).abs() < 1e-6);
    let proj = rep.gaps[0].projector.as_ref().unwrap();
    assert!(proj.l4_probe <= proj.n4_certificate);
    let kernel = fs::read_to_string(out.join(&proj.kernel_file)).unwrap();
    assert!(kernel.starts_with("n1,n2,m1,m2,i,j,value\n"));

    let o = capgap(&f.path("i"), &["gaps", &f.s("identity.toml")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("no qualifying gap"));
}

#[test]
fn soliton_then_verify() {
    let f = Fixture::new();
    let p = f.problem("p.toml", "lambda = 5.0\nk_list = [8, 16]\ndefect_file = \"small.toml\"\n");
    let out = f.path("s");
    let o = capgap(&out, &["--quiet", "soliton", &p]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rf: ResultFile = read_toml(&out.join("result.toml")).unwrap();
    assert!(rf.all_checks_pass);
    assert!(rf.results.iter().all(|r| r.residual_norm.unwrap() < 1e-10));
    // round trip of the emitted result
    assert_eq!(toml::from_str::<ResultFile>(&toml::to_string(&rf).unwrap()).unwrap(), rf);
    let cert = fs::read_to_string(out.join("certification.txt")).unwrap();
    assert!(cert.lines().all(|l| l.contains(": ")));
    assert!(cert.contains("k16.residual_ok: pass"));

    let o = capgap(&f.path("v"), &["verify", &out.join("result.toml").display().to_string(), &p]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("k=16 residual_ok PASS"));

    // perturb one value by 1e-3
    let field = out.join("field_k16.csv");
    let text = fs::read_to_string(&field).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let cols: Vec<&str> = lines[5].split(',').collect();
    let v: f64 = cols[3].parse().unwrap();
    lines[5] = format!("{},{},{},{:.16e}", cols[0], cols[1], cols[2], v + 1e-3);
    fs::write(&field, lines.join("\n")).unwrap();
    let o = capgap(&f.path("v2"), &["verify", &out.join("result.toml").display().to_string(), &p]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("k=16 residual_ok FAIL"));

    // wrong problem file
    let q = f.problem("q.toml", "lambda = 5.1\nk_list = [8, 16]\ndefect_file = \"small.toml\"\n");
    let o = capgap(&f.path("v3"), &["verify", &out.join("result.toml").display().to_string(), &q]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("mismatch"));
}

#[test]
fn lambda_outside_gaps_lists_them() {
    let f = Fixture::new();
    let p = f.problem("p.toml", "lambda = 7.0\nk_list = [8]\n");
    let o = capgap(&f.path("s"), &["soliton", &p]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("(4.5"), "{}", stderr(&o));
}

#[test]
fn oversized_defect_exits_3_with_result() {
    let f = Fixture::new();
    let p = f.problem("p.toml", "lambda = 5.0\nk_list = [8]\ndefect_file = \"large.toml\"\n");
    let out = f.path("s");
    let o = capgap(&out, &["--quiet", "soliton", &p]);
    assert_eq!(code(&o), 3);
    let rf: ResultFile = read_toml(&out.join("result.toml")).unwrap();
    assert_eq!(rf.results[0].checks["defect_ok"], "fail");
    assert!(fs::read_to_string(out.join("certification.txt")).unwrap().contains("k8.defect_ok: fail"));
}

#[test]
fn half_space_requires_the_mirror_flag() {
    let f = Fixture::new();
    let body = "stencil_file = \"dimer.toml\"\nlambda = 5.0\nsigma = 1.0\nk_list = [8]\n[halfspace]\nwidth = 6\n";
    let p = f.write("h.toml", body);
    assert_eq!(code(&capgap(&f.path("s"), &["soliton", &p])), 2);
    let p = f.write("h2.toml", &format!("mirror_symmetric = true\n{body}"));
    let out = f.path("s2");
    let o = capgap(&out, &["--quiet", "soliton", &p]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rf: ResultFile = read_toml(&out.join("result.toml")).unwrap();
    assert_eq!(rf.geometry, "half_space");
    assert!(rf.results[0].edge_distance.is_some());
    let o = capgap(&f.path("v"), &["verify", &out.join("result.toml").display().to_string(), &p]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_2() {
    let f = Fixture::new();
    assert_eq!(code(&capgap(&f.path("o"), &["bands"])), 2);
    assert_eq!(code(&capgap(&f.path("o"), &["frobnicate"])), 2);
    let p = f.problem("p.toml", "lambda = 5.0\nk_list = []\n");
    assert_eq!(code(&capgap(&f.path("o"), &["soliton", &p])), 2);
}
