use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;
use tunnel_cli::output::Report;

fn tunnel(dir: &Path, config: Option<&str>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tunnel"));
    if let Some(text) = config {
        let path = dir.join("config.toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.arg("--out-dir").arg(dir.join("out")).args(args).output().unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join("out").join(name)).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn summary(dir: &Path) -> Report {
    Report::parse(&read(dir, "summary.txt"))
}

const SMALL_WINDOW: &str = "[window]\nx_min = 0\nx_max = 2\ny_min = 0\ny_max = 3\n";

#[test]
fn field_rows_are_sorted_and_counted() {
    let dir = TempDir::new().unwrap();
    ok(&tunnel(dir.path(), Some(&format!("energy = 0.3\n{SMALL_WINDOW}")), &["field"]));
    let d = read(dir.path(), "density_transmitted.csv");
    assert!(d.starts_with("x1,x2,value\n") && d.ends_with('\n') && !d.contains('\r'));
    let sites: Vec<(i64, i64)> = rows(&d).iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    assert_eq!(sites.len(), 12);
    assert!(sites.windows(2).all(|w| w[0] < w[1]));
    let c = read(dir.path(), "current_total.csv");
    assert!(c.starts_with("x1,x2,y1,y2,value\n"));
    let bonds: Vec<Vec<i64>> = rows(&c).iter().map(|r| r[..4].iter().map(|v| v.parse().unwrap()).collect()).collect();
    // (3 − 1)·4 horizontal plus 3·(4 − 1) vertical bonds, each once with x < y
    assert_eq!(bonds.len(), 17);
    assert!(bonds.iter().all(|b| (b[0], b[1]) < (b[2], b[3])));
    assert!(bonds.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn two_by_two_window_has_four_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = "energy = 1.4\n[window]\nx_min = 0\nx_max = 1\ny_min = 0\ny_max = 1\n";
    ok(&tunnel(dir.path(), Some(cfg), &["field"]));
    assert_eq!(rows(&read(dir.path(), "density_reflected.csv")).len(), 4);
    assert_eq!(rows(&read(dir.path(), "current_reflected.csv")).len(), 4);
}

#[test]
fn reruns_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        ok(&tunnel(d.path(), Some(&format!("energy_nodes = 4\n{SMALL_WINDOW}")), &["scenario", "fig3"]));
    }
    let names = ["density_transmitted_t1_1.csv", "density_transmitted_t1_0.5.csv", "density_transmitted_t1_0.csv", "summary.txt"];
    for n in names {
        assert_eq!(fs::read(a.path().join("out").join(n)).unwrap(), fs::read(b.path().join("out").join(n)).unwrap(), "{n}");
    }
}

#[test]
fn decoupled_junction_has_no_current() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        "contacts = []\nenergy_nodes = 3\noutputs = [\"summary\", \"density\", \"current\", \"spectral_current\", \"bound_states\"]\n{SMALL_WINDOW}"
    );
    ok(&tunnel(dir.path(), Some(&cfg), &["scenario", "custom"]));
    let s = summary(dir.path());
    assert_eq!(s.get("J"), Some("0"));
    assert_eq!(s.get("bound_states"), Some("0"));
    for name in ["current_transmitted.csv", "current_reflected.csv", "current_total.csv", "spectral_current.csv"] {
        let r = rows(&read(dir.path(), name));
        assert!(!r.is_empty());
        assert!(r.iter().all(|row| row.last().unwrap() == "0"), "{name}");
    }
    assert_eq!(rows(&read(dir.path(), "bound_states.csv")).len(), 0);
    // fields reduce to equilibrium: no transmitted part
    assert!(rows(&read(dir.path(), "density_transmitted.csv")).iter().all(|r| r[2] == "0"));
}

#[test]
fn equal_fermi_levels_carry_no_current() {
    let dir = TempDir::new().unwrap();
    ok(&tunnel(dir.path(), Some("mu1 = 0.3\nmu2 = 0.3\nenergy_nodes = 4"), &["current", "--dump-q"]));
    let s = summary(dir.path());
    assert_eq!(s.get("J"), Some("0"));
    assert!(s.get("q_norm").unwrap().parse::<f64>().unwrap() > 0.0);
    let q = read(dir.path(), "q.csv");
    assert!(q.starts_with("e,block,row,col,re,im\n"));
    // equal levels sample the whole band: 4 energies × 2 sides × a 4 × 4 Q split into blocks
    assert_eq!(rows(&q).len(), 4 * 2 * 16);
}

#[test]
fn default_current_routes_agree() {
    let dir = TempDir::new().unwrap();
    ok(&tunnel(dir.path(), None, &["current"]));
    let s = summary(dir.path());
    let j: f64 = s.get("J").unwrap().parse().unwrap();
    let jb: f64 = s.get("J_junction_bonds").unwrap().parse().unwrap();
    assert!((j - jb).abs() < 1e-6, "{j} vs {jb}");
    assert_eq!(s.get("bound_states"), Some("3"));
    assert_eq!(rows(&read(dir.path(), "spectral_current.csv")).len(), 50);
}

#[test]
fn fig7_pair_bound() {
    let dir = TempDir::new().unwrap();
    ok(&tunnel(dir.path(), None, &["scenario", "fig7"]));
    let r = rows(&read(dir.path(), "spectral_current.csv"));
    assert_eq!(r.len(), 50);
    let vals: Vec<[f64; 3]> = r.iter().map(|x| [x[0].parse().unwrap(), x[1].parse().unwrap(), x[2].parse().unwrap()]).collect();
    assert!(vals.iter().all(|v| v[0] > 0.3 && v[0] < 1.4 && v[1] < v[2]));
    let max_j = vals.iter().map(|v| v[1]).fold(f64::MIN, f64::max);
    let max_j0 = vals.iter().map(|v| v[2]).fold(f64::MIN, f64::max);
    assert!(max_j <= max_j0);
}

#[test]
fn fig6_profile_layout() {
    let dir = TempDir::new().unwrap();
    ok(&tunnel(dir.path(), None, &["scenario", "fig6"]));
    let p = read(dir.path(), "profile.csv");
    assert!(p.starts_with("i,x1,x2,transmitted,reflected,point,total,rho_eq\n"));
    let r = rows(&p);
    assert_eq!(r.len(), 40);
    for (k, row) in r.iter().enumerate() {
        assert_eq!(row[0], (k + 1).to_string());
        assert_eq!(row[2], "19");
        let v: Vec<f64> = row[3..].iter().map(|x| x.parse().unwrap()).collect();
        assert!((v[0] + v[1] + v[2] - v[3]).abs() < 1e-10);
        // the reference column is ρ_eq of reservoir 2
        assert!((v[4] - 0.0492).abs() < 5e-4);
    }
}

#[test]
fn green_dump() {
    let dir = TempDir::new().unwrap();
    ok(&tunnel(dir.path(), Some("energy_nodes = 9"), &["green", "--x", "1,2", "--side", "minus"]));
    let r = rows(&read(dir.path(), "green_minus_1_2.csv"));
    // node 5 of 9 is the van Hove point and is skipped
    assert_eq!(r.len(), 8);
}

#[test]
fn scan_lists_single_contact_states() {
    let dir = TempDir::new().unwrap();
    ok(&tunnel(dir.path(), Some("contacts = [{ s1 = [0, 0], s2 = [0, 0], t = 1.0 }]"), &["scan"]));
    let r = rows(&read(dir.path(), "bound_states.csv"));
    assert_eq!(r.len(), 2);
    assert!(r.iter().all(|row| row[5].parse::<f64>().unwrap() <= 1e-8));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let code = |out: Output| out.status.code().unwrap();
    assert_eq!(code(tunnel(dir.path(), Some("mu1 = 5.0"), &["scan"])), 2);
    assert_eq!(code(tunnel(dir.path(), Some("colour = 1"), &["scan"])), 2);
    assert_eq!(code(tunnel(dir.path(), Some("energy = 0.3"), &["scenario", "fig4"])), 2);
    let missing = Command::new(env!("CARGO_BIN_EXE_tunnel")).args(["--config", "/nonexistent/c.toml", "scan"]).output().unwrap();
    assert_eq!(code(missing), 4);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let unwritable = Command::new(env!("CARGO_BIN_EXE_tunnel"))
        .arg("--out-dir")
        .arg(blocker.join("sub"))
        .args(["green"])
        .output()
        .unwrap();
    assert_eq!(code(unwritable), 4);
    let err = tunnel(dir.path(), Some("energy = 0.3\nmu2 = 0.5"), &["scenario", "fig8"]);
    assert!(String::from_utf8_lossy(&err.stderr).contains("energy, mu2"));
}
