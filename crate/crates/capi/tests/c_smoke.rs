//! Compiles and runs a real C client against the generated header and the
//! freshly built static library. Skipped silently when no C compiler is on
//! the path.

use std::path::PathBuf;
use std::process::Command;

const C_CLIENT: &str = r#"
#include <assert.h>
#include <stdio.h>
#include <string.h>
#include "edgesim.h"

int main(void) {
    EdgesimScenario *scenario = NULL;
    if (edgesim_scenario_from_json(
            "{\"groups\": ["
            "{\"group\": 1, \"release\": [0, 40], \"slack\": [1, 10], \"workload\": [1, 10], \"size\": [1, 5], \"count\": 25},"
            "{\"group\": 2, \"release\": [0, 70], \"slack\": [1, 10], \"workload\": [1, 10], \"size\": [1, 5], \"count\": 25},"
            "{\"group\": 3, \"release\": [0, 40], \"slack\": [1, 20], \"workload\": [1, 10], \"size\": [1, 5], \"count\": 25},"
            "{\"group\": 4, \"release\": [0, 70], \"slack\": [1, 20], \"workload\": [1, 10], \"size\": [1, 5], \"count\": 25}"
            "]}",
            &scenario) != EDGESIM_STATUS_OK) {
        fprintf(stderr, "scenario: %s\n", edgesim_last_error());
        return 1;
    }

    EdgesimReport *report = NULL;
    if (edgesim_run(scenario, "covert", "sars", 1, 0.9, 7, &report) != EDGESIM_STATUS_OK) {
        fprintf(stderr, "run: %s\n", edgesim_last_error());
        return 1;
    }

    unsigned total = edgesim_report_total(report);
    unsigned processed = edgesim_report_processed(report);
    double tcr = edgesim_report_tcr(report);
    assert(total == 100);
    assert(processed <= total);
    assert(tcr >= 0.0 && tcr <= 100.0);

    char *json = NULL;
    assert(edgesim_report_metrics_json(report, &json) == EDGESIM_STATUS_OK);
    assert(strstr(json, "\"tcr\"") != NULL);
    edgesim_string_free(json);

    /* Unknown policy must fail cleanly with a message. */
    EdgesimReport *bad = NULL;
    assert(edgesim_run(scenario, "bogus", "sars", 0, 0.9, 7, &bad) == EDGESIM_STATUS_PARSE_ERROR);
    assert(bad == NULL);
    assert(strlen(edgesim_last_error()) > 0);

    edgesim_report_free(report);
    edgesim_scenario_free(scenario);
    printf("c client ok: %u/%u tcr=%.2f\n", processed, total, tcr);
    return 0;
}
"#;

#[test]
fn c_client_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("skipping: no C compiler found");
        return;
    };

    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include_dir = crate_dir.join("include");
    // The staticlib sits next to this test binary's deps directory.
    let lib_dir = PathBuf::from(std::env::current_exe().unwrap())
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = lib_dir.join("libedgesim_capi.a");
    assert!(lib.exists(), "staticlib not found at {}", lib.display());

    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("client.c");
    let bin = work.path().join("client");
    std::fs::write(&src, C_CLIENT).unwrap();

    let compile = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include_dir)
        .arg(&src)
        .arg(&lib)
        .arg("-lpthread")
        .arg("-ldl")
        .arg("-lm")
        .arg("-o")
        .arg(&bin)
        .output()
        .expect("compiler invocation");
    assert!(
        compile.status.success(),
        "cc failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&bin).output().expect("client runs");
    assert!(
        run.status.success(),
        "client failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&run.stdout),
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("c client ok"));
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().map(|o| o.status.success()).unwrap_or(false) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
