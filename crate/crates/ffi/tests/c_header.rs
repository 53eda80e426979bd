//! Compiles and runs a small C program against the generated header and the
//! static library. Skipped when no C compiler or static library is available.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "bellsim.h"

int main(void) {
    BellsimModel *m = NULL;
    if (bellsim_model_new("circle:0.5", BELLSIM_PAIRING_HEAD_TO_TOE, &m) != BELLSIM_STATUS_OK) return 10;
    double c = 0.0;
    if (bellsim_clearance(m, 30.0, &c) != BELLSIM_STATUS_OK || c != 0.5) return 11;
    BellsimRunParams p = { 100000, 3, 2 };
    BellsimEstimate e;
    if (bellsim_run_fixed(m, 0.0, 90.0, p, &e) != BELLSIM_STATUS_OK || !e.defined) return 12;
    if (fabs(e.e) > 5.0 * e.std_error) return 13;
    bellsim_model_free(m);
    if (bellsim_model_new("circle:7", BELLSIM_PAIRING_HEAD_TO_TOE, &m) != BELLSIM_STATUS_INVALID_ARGUMENT) return 14;
    uint64_t num = 0, den = 0;
    if (bellsim_program_overall(0.0, 22.5, 67.5, &num, &den) != BELLSIM_STATUS_OK) return 15;
    printf("%s %llu/%llu\n", bellsim_version(), (unsigned long long)num, (unsigned long long)den);
    return 0;
}
"#;

fn find_compiler() -> Option<String> {
    let candidates = std::env::var("CC").into_iter().chain(["cc".to_string(), "gcc".into(), "clang".into()]);
    candidates.into_iter().find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
}

/// `target/<profile>/libbellsim_ffi.a`, found from this test binary's location.
fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libbellsim_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_and_runs() {
    let (Some(cc), Some(lib)) = (find_compiler(), static_lib()) else {
        eprintln!("skipping: no C compiler or static library");
        return;
    };
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("c_header");
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    let bin = dir.join("main");
    std::fs::write(&src, PROGRAM).unwrap();

    let out = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "compile failed:\n{}", String::from_utf8_lossy(&out.stderr));

    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert_eq!(stdout.trim(), format!("{} 1/3", env!("CARGO_PKG_VERSION")));
}
