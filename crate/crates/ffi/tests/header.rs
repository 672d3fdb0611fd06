use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/orlicz.h")).unwrap()
}

#[test]
fn header_declares_every_export() {
    let h = header();
    for sym in [
        "orlicz_last_error",
        "orlicz_phi_power",
        "orlicz_phi_linear_then_convex",
        "orlicz_phi_staircase",
        "orlicz_phi_free",
        "orlicz_phi_value",
        "orlicz_phi_left",
        "orlicz_phi_right",
        "orlicz_grid_uniform",
        "orlicz_grid_free",
        "orlicz_grid_len",
        "orlicz_grid_nodes",
        "orlicz_subspace_monomial",
        "orlicz_subspace_hat",
        "orlicz_subspace_free",
        "orlicz_subspace_dim",
        "orlicz_modular",
        "orlicz_solve",
        "orlicz_certify",
    ] {
        assert!(h.contains(&format!("{sym}(")), "missing {sym}");
    }
    assert!(h.contains("typedef struct OrliczPhi OrliczPhi;"));
    assert!(h.contains("ORLICZ_STATUS_OK = 0"));
}

fn static_lib() -> PathBuf {
    let deps = std::env::current_exe().unwrap();
    deps.parent().unwrap().parent().unwrap().join("liborlicz_ffi.a")
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = static_lib();
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let exe = dir.path().join("smoke");
    fs::write(
        &src,
        r#"
#include <stdio.h>
#include "orlicz.h"

int main(void) {
    OrliczPhi *phi = NULL;
    OrliczGrid *grid = NULL;
    OrliczSubspace *s = NULL;
    if (orlicz_phi_power(2.0, &phi) != ORLICZ_STATUS_OK) return 1;
    if (orlicz_grid_uniform(0.0, 1.0, 101, 1e-9, &grid) != ORLICZ_STATUS_OK) return 1;
    if (orlicz_subspace_monomial(grid, 1, &s) != ORLICZ_STATUS_OK) return 1;
    double f[101], c[1], m;
    bool converged;
    orlicz_grid_nodes(grid, f, 101);
    if (orlicz_solve(phi, s, f, 101, 3, c, 1, &m, &converged) != ORLICZ_STATUS_OK) return 1;
    if (orlicz_phi_power(0.0, &phi) != ORLICZ_STATUS_INVALID_ARGUMENT) return 1;
    printf("%.6f %s\n", c[0], orlicz_last_error()[0] ? "err" : "none");
    orlicz_subspace_free(s);
    orlicz_grid_free(grid);
    orlicz_phi_free(phi);
    return 0;
}
"#,
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "0.500000 err\n");
}
