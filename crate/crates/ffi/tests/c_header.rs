//! Compiles and runs a small C program against the generated header and
//! the shared library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "pwa_lyap.h"

int main(void) {
    PwaPartition *p = NULL;
    if (pwa_partition_benchmark("flower", &p) != PWA_STATUS_OK) return 10;
    PwaConfig cfg = pwa_config_default();
    cfg.timeout_seconds = 120.0;
    PwaResult *r = NULL;
    if (pwa_analyze(p, PWA_STRATEGY_LYAPUNOV_BASED, &cfg, &r) != PWA_STATUS_OK) return 11;
    if (!pwa_result_is_valid(r)) return 12;
    double x[2] = {0.5, 0.25}, v = 0.0;
    if (pwa_result_value(r, x, 2, &v) != PWA_STATUS_OK || !(v > 0.0)) return 13;
    if (pwa_partition_load("/nonexistent.json", &p) != PWA_STATUS_IO) return 14;
    if (pwa_last_error() == NULL) return 15;
    printf("%zu\n", pwa_result_num_cells(r));
    pwa_result_free(r);
    pwa_partition_free(p);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // test binaries live in <target>/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap().to_path_buf();
    let so = lib_dir.join("libpwa_lyap_ffi.so");
    if !so.exists() {
        eprintln!("skipping: {} not built on this platform", so.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let bin = dir.path().join("main");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg("-o")
        .arg(&bin)
        .arg("-L")
        .arg(&lib_dir)
        .arg("-lpwa_lyap_ffi")
        .status()
        .expect("running cc");
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).env("LD_LIBRARY_PATH", &lib_dir).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    let cells: usize = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!(cells > 4);
}
