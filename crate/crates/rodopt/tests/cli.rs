//! End-to-end checks of the command-line binary and the on-disk formats.

use std::process::Command;

use rodopt::cli_io;
use rodopt::mesh::{generate_disk_mesh, Mesh};

fn rodopt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rodopt"))
}

#[test]
fn mesh_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("disk.mesh");
    let mesh = generate_disk_mesh(0.7, 600).unwrap();
    mesh.save(&path).unwrap();
    let back = Mesh::load(&path).unwrap();
    assert_eq!(back.num_nodes(), mesh.num_nodes());
    assert_eq!(back.num_elements(), mesh.num_elements());
    assert_eq!(back.boundary_nodes, mesh.boundary_nodes);
    for (a, b) in back.nodes.iter().zip(&mesh.nodes) {
        assert_eq!(a, b);
    }
}

#[test]
fn run_report_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let status = rodopt()
        .args(["run", "--preset", "a", "--elements", "600"])
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let history = out.join("history.csv");
    let rows = cli_io::parse_history_csv(&std::fs::read_to_string(&history).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].d_t > 0.0);
    // resolved config is reloadable
    let cfg = cli_io::parse_config_file(&out.join("config.txt")).unwrap();
    assert_eq!(cfg.target_elements, 600);
    // snapshot for step 0 exists and declares the fields
    let snap = std::fs::read_to_string(out.join("snapshot_000000.vtk")).unwrap();
    for needle in ["SCALARS phi", "SCALARS u", "SCALARS Phi"] {
        assert!(snap.contains(needle), "missing {needle}");
    }

    let report = rodopt().arg("report").arg(&history).output().unwrap();
    assert!(report.status.success());
    let table = String::from_utf8(report.stdout).unwrap();
    assert!(table.contains("ratio") && table.contains("history"));

    // config errors exit with code 2
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "m1 = 1.5\n").unwrap();
    let status = rodopt()
        .args(["run", "--config"])
        .arg(&bad)
        .arg("--out-dir")
        .arg(dir.path().join("bad_out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // missing history file exits with the I/O code
    let status = rodopt()
        .args(["report", "/nonexistent/history.csv"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}
