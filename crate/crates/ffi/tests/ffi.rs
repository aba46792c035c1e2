use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use normone_ffi::*;

unsafe fn take_string(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    normone_string_free(s);
    out
}

fn last_error() -> String {
    unsafe {
        let e = normone_last_error();
        if e.is_null() {
            String::new()
        } else {
            take_string(e)
        }
    }
}

#[test]
fn generate_and_inspect() {
    unsafe {
        let mut chain = ptr::null_mut();
        let strategy = CString::new("unit").unwrap();
        assert_eq!(normone_generate(2, 2, strategy.as_ptr(), true, &mut chain), NormoneStatus::Ok);
        let mut steps = 0usize;
        assert_eq!(normone_chain_step_count(chain, &mut steps), NormoneStatus::Ok);
        assert_eq!(steps, 1);
        let mut certified = false;
        normone_chain_certified(chain, &mut certified);
        assert!(certified);

        let mut poly = ptr::null_mut();
        assert_eq!(normone_chain_final(chain, &mut poly), NormoneStatus::Ok);
        let mut count = 0usize;
        normone_poly_monomial_count(poly, false, &mut count);
        assert_eq!(count, 5);
        let mut ok = false;
        assert_eq!(normone_poly_is_norm_one(poly, 2, &mut ok), NormoneStatus::Ok);
        assert!(ok);
        assert_eq!(normone_poly_check_numeric(poly, 3, 11, 2, &mut ok), NormoneStatus::Ok);
        assert!(ok);

        let mut s = ptr::null_mut();
        normone_poly_to_text(poly, &mut s);
        assert_eq!(
            take_string(s),
            "s1(x)*s0(x) + s0(x)*s2(x)*s0(x) + s0(x)*s3(x)*s0(x) - s1(x)*s0(x)*s0(x) - s1(x)*s3(x)*s0(x)"
        );
        normone_poly_to_latex(poly, &mut s);
        assert!(take_string(s).contains("\\sigma"));
        normone_chain_to_json(chain, &mut s);
        assert!(take_string(s).starts_with(r#"{"p":2,"n":2,"strategy":"unit","steps":[{"m":2,"k":1,"a":"#));

        normone_poly_to_json(poly, &mut s);
        let json = CString::new(take_string(s)).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(normone_poly_from_json(json.as_ptr(), &mut back), NormoneStatus::Ok);
        normone_poly_monomial_count(back, false, &mut count);
        assert_eq!(count, 5);

        normone_poly_free(back);
        normone_poly_free(poly);
        normone_chain_free(chain);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut chain = ptr::null_mut();
        assert_eq!(normone_generate(4, 2, ptr::null(), false, &mut chain), NormoneStatus::InvalidArgument);
        assert!(last_error().contains("not a prime"));
        assert!(chain.is_null());
        assert_eq!(normone_generate(2, 2, ptr::null(), false, ptr::null_mut()), NormoneStatus::NullPointer);
        let bad = CString::new("2:x").unwrap();
        assert_eq!(normone_generate(2, 2, bad.as_ptr(), false, &mut chain), NormoneStatus::Parse);

        let mut poly = ptr::null_mut();
        let doc = CString::new(r#"{"p":2,"n":2,"terms":[{"c":"1","w":[9]}]}"#).unwrap();
        assert_eq!(normone_poly_from_json(doc.as_ptr(), &mut poly), NormoneStatus::Parse);
        assert!(last_error().contains("terms[0].w"));
        let mut ok = false;
        assert_eq!(normone_poly_is_norm_one(ptr::null(), 1, &mut ok), NormoneStatus::NullPointer);

        // A successful call clears the message.
        let mut count = 0usize;
        assert_eq!(normone_generate(2, 2, ptr::null(), false, &mut chain), NormoneStatus::Ok);
        normone_chain_step_count(chain, &mut count);
        assert!(last_error().is_empty());
        normone_chain_free(chain);
        normone_string_free(ptr::null_mut());
    }
}

#[test]
fn cohomology_json() {
    unsafe {
        let doc = CString::new(r#"{"actions":[{"name":"triv","order":3,"matrix":[[1]]}]}"#).unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(normone_cohomology(doc.as_ptr(), &mut s), NormoneStatus::Ok);
        assert_eq!(take_string(s), r#"[{"name":"triv","order":3,"dim":1,"h1":[],"h2":["3"]}]"#);
        let bad = CString::new(r#"{"actions":[{"name":"x","order":3,"matrix":[[2]]}]}"#).unwrap();
        assert_eq!(normone_cohomology(bad.as_ptr(), &mut s), NormoneStatus::Parse);
    }
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// `target/<profile>` derived from the test binary in `target/<profile>/deps`.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(manifest_dir().join("include/normone.h")).unwrap();
    for name in [
        "NORMONE_STATUS_OK",
        "NORMONE_STATUS_PANIC",
        "typedef struct NormonePoly NormonePoly",
        "normone_generate(",
        "normone_poly_is_norm_one(",
        "normone_cohomology(",
        "normone_string_free(",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let lib = profile_dir().join("libnormone_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: static library or C compiler unavailable");
        return;
    }
    let dir = std::env::temp_dir().join(format!("normone-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "normone.h"
int main(void) {
    NormoneChain *chain = NULL;
    NormonePoly *poly = NULL;
    bool ok = false;
    size_t count = 0;
    if (normone_generate(3, 2, "unit", true, &chain) != NORMONE_STATUS_OK) return 2;
    if (normone_chain_final(chain, &poly) != NORMONE_STATUS_OK) return 3;
    if (normone_poly_is_norm_one(poly, 2, &ok) != NORMONE_STATUS_OK || !ok) return 4;
    normone_poly_monomial_count(poly, false, &count);
    printf("%zu\n", count);
    if (normone_generate(6, 2, NULL, true, &chain) != NORMONE_STATUS_INVALID_ARGUMENT) return 5;
    char *msg = normone_last_error();
    printf("%s\n", msg);
    normone_string_free(msg);
    normone_poly_free(poly);
    normone_chain_free(chain);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status);
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert_eq!(stdout, "22\n6 is not a prime\n");
    let _ = std::fs::remove_dir_all(&dir);
}
