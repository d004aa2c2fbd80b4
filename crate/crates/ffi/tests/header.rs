use std::path::Path;
use std::process::Command;

fn read(rel: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)).unwrap()
}

fn exported_functions(source: &str) -> Vec<String> {
    source
        .lines()
        .filter_map(|l| {
            let rest = l
                .trim_start()
                .strip_prefix("pub unsafe extern \"C\" fn ")
                .or_else(|| l.trim_start().strip_prefix("pub extern \"C\" fn "))?;
            Some(rest.split('(').next().unwrap().to_owned())
        })
        .collect()
}

#[test]
fn header_declares_every_exported_function() {
    let header = read("include/collocate.h");
    let functions = exported_functions(&read("src/lib.rs"));
    assert!(functions.len() >= 25, "{functions:?}");
    for f in &functions {
        let declared = [' ', '*'].iter().any(|c| header.contains(&format!("{c}{f}(")));
        assert!(declared, "{f} missing from header");
    }
    for constant in ["CLC_STATUS_OK = 0", "CLC_STATUS_PANIC = 11", "CLC_FAMILY_HERMITE = 2", "CLC_SAMPLER_WEIL = 3"] {
        assert!(header.contains(constant), "{constant}");
    }
    for handle in ["ClcIndexSet", "ClcMesh", "ClcSurrogate", "ClcLoi"] {
        assert!(header.contains(&format!("typedef struct {handle} {handle};")), "{handle}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(probe) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler on PATH; skipping");
        return;
    };
    assert!(probe.status.success());
    let dir = tempfile::tempdir().unwrap();
    let main = dir.path().join("main.c");
    std::fs::write(
        &main,
        "#include \"collocate.h\"\nint main(void) { ClcIndexSet *s = 0; \
         return clc_index_set_new(CLC_INDEX_SET_KIND_TENSOR, 2, 3, &s) == CLC_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&main)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
