//! Compiles a small C program against the generated header and static
//! library. Skipped when no C compiler is on the path.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "larfi.h"

int main(void) {
    double theta[2] = {0.0, 0.0};
    unsigned char y[4] = {0, 1, 1, 0};
    LarfiModel *m = NULL;
    LarfiSeries *s = NULL;
    double fi[4];
    if (larfi_model_new(1, 0, theta, 2, &m) != LARFI_STATUS_OK) return 10;
    if (larfi_series_new(y, 4, NULL, 0, &s) != LARFI_STATUS_OK) return 11;
    if (larfi_ex_fi(m, s, LARFI_ALGORITHM_CLOSED_FORM, fi, 4) != LARFI_STATUS_OK) return 12;
    if (larfi_ex_fi(m, s, 42, fi, 4) != LARFI_STATUS_INVALID_ARGUMENT) return 13;
    if (strlen(larfi_last_error()) == 0) return 14;
    printf("%s %.17g %.17g %.17g %.17g\n", larfi_version(), fi[0], fi[1], fi[2], fi[3]);
    larfi_series_free(s);
    larfi_model_free(m);
    return 0;
}
"#;

fn has_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

/// `target/<profile>` of the running test binary.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    if !has_cc() {
        eprintln!("skipped: no C compiler");
        return;
    }
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let lib = profile_dir().join("liblarfi_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let line = String::from_utf8(run.stdout).unwrap();
    assert_eq!(line.trim(), format!("{} 0.75 0.25 0.25 0.25", env!("CARGO_PKG_VERSION")));
}
