//! The command line driven in-process: exit codes, stream discipline, and
//! chained commands against the library results.

use std::path::{Path, PathBuf};

use comodi_cli::{run_cli, EXIT_DIAGNOSTICS, EXIT_ENVIRONMENT, EXIT_OK, EXIT_USAGE};
use comodi_core::cdl::{confirm_all, draft_descriptor, write_cdf_string, DescriptorMeta, Version};
use comodi_core::extract::{interface_to_string, Extractor};
use sha2::{Digest, Sha256};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("..").join(rel)
}

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn cli(args: &[&str]) -> Outcome {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(std::iter::once("comodi").chain(args.iter().copied()), &mut out, &mut err);
    Outcome {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn digest(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

#[test]
fn extract_prints_interface() {
    let add = fixture("core/tests/fixtures/c/add.c");
    let r = cli(&["extract", "--profile", "c_subset", p(&add)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.starts_with("<?xml"));
    assert!(r.out.contains("add"));
    assert!(r.err.is_empty());
}

#[test]
fn unknown_subcommand_is_usage() {
    let r = cli(&["frobnicate"]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.out.is_empty());
    assert!(!r.err.is_empty());
}

#[test]
fn help_is_not_an_error() {
    let r = cli(&["--help"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains("extract"));
}

#[test]
fn missing_input_is_environment() {
    let r = cli(&["extract", "/nonexistent/file.c"]);
    assert_eq!(r.code, EXIT_ENVIRONMENT);
    assert!(r.err.starts_with("error:"));
}

#[test]
fn unknown_language_is_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("thing.rs");
    std::fs::write(&src, "fn main() {}\n").unwrap();
    assert_eq!(cli(&["extract", p(&src)]).code, EXIT_DIAGNOSTICS);
}

#[test]
fn invalid_project_exits_one() {
    let project = fixture("wiring/tests/projects/unbound/project.xml");
    let r = cli(&["validate", p(&project)]);
    assert_eq!(r.code, EXIT_DIAGNOSTICS);
    assert!(r.out.contains("UnboundUsesPort"), "{}", r.out);
}

#[test]
fn mock_run_reports_value() {
    let project = fixture("wiring/tests/projects/pipeline/project.xml");
    let mocks = fixture("wiring/tests/projects/pipeline/mocks.xml");
    let r = cli(&["--format", "text", "run", p(&project), "--mocks", p(&mocks)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(r.out, "7.0\n");
    let r = cli(&["run", p(&project), "--mocks", p(&mocks)]);
    assert!(r.out.contains("runtimeWiringCalls=\"0\""), "{}", r.out);
}

#[test]
fn bad_entry_argument_is_diagnostic() {
    let project = fixture("wiring/tests/projects/selfloop/project.xml");
    let mocks = fixture("wiring/tests/projects/selfloop/mocks.xml");
    let r = cli(&["run", p(&project), "--mocks", p(&mocks), "--arg", "lots"]);
    assert_eq!(r.code, EXIT_DIAGNOSTICS);
    let r = cli(&["--format", "text", "run", p(&project), "--mocks", p(&mocks), "--arg", "3"]);
    assert_eq!((r.code, r.out.as_str()), (EXIT_OK, "3\n"));
}

/// extract, then describe on the file extract wrote, gives what the library
/// gives for the same steps.
#[test]
fn chained_commands_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let add = fixture("core/tests/fixtures/c/add.c");
    let before = digest(&add);
    let iface = dir.path().join("add.xml");
    let cdf = dir.path().join("add.cdf");
    assert_eq!(cli(&["extract", p(&add), "-o", p(&iface)]).code, EXIT_OK);
    assert_eq!(cli(&["describe", p(&iface), "--name", "add", "--version", "2.1.0", "-o", p(&cdf)]).code, EXIT_OK);

    let text = std::fs::read_to_string(&add).unwrap();
    let m = Extractor::builtin("c_subset").unwrap().extract(p(&add), &text).unwrap();
    assert_eq!(std::fs::read_to_string(&iface).unwrap(), interface_to_string(&m));
    let meta = DescriptorMeta {
        name: "add".into(),
        version: Version::new(2, 1, 0),
        author: String::new(),
        license: String::new(),
        open_source: true,
    };
    let d = draft_descriptor(&m, &confirm_all(&m), &meta).unwrap();
    assert_eq!(std::fs::read_to_string(&cdf).unwrap(), write_cdf_string(&d));

    let r = cli(&["glue", p(&cdf), "-d", p(dir.path())]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(dir.path().join("add_glue.c").exists());
    assert!(dir.path().join("add_wiring.xml").exists());
    assert_eq!(digest(&add), before);
}

#[test]
fn pack_register_fetch() {
    let dir = tempfile::tempdir().unwrap();
    let add = fixture("core/tests/fixtures/c/add.c");
    let iface = dir.path().join("add.xml");
    let cdf = dir.path().join("add.cdf");
    let archive = dir.path().join("add.tar.gz");
    let repo = dir.path().join("repo");
    let cache = dir.path().join("cache");
    cli(&["extract", p(&add), "-o", p(&iface)]);
    cli(&["describe", p(&iface), "--name", "add", "--version", "1.0.0", "-o", p(&cdf)]);
    let r = cli(&["pack", "--cdf", p(&cdf), "--source", p(&add), "--archive", "tar.gz", "-o", p(&archive)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(cli(&["register", p(&archive), "--repo", p(&repo)]).code, EXIT_OK);
    let again = cli(&["register", p(&archive), "--repo", p(&repo)]);
    assert_eq!(again.code, EXIT_DIAGNOSTICS);
    assert!(again.err.contains("already registered"));
    let r = cli(&["fetch", "add", "1.0.0", "--repo", p(&repo), "--cache", p(&cache)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(std::fs::read(r.out.trim()).unwrap(), std::fs::read(&archive).unwrap());
    let missing = cli(&["fetch", "add", "9.9.9", "--repo", p(&repo), "--cache", p(&cache)]);
    assert_eq!(missing.code, EXIT_DIAGNOSTICS);
}

#[test]
fn closed_source_with_sources_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let add = fixture("core/tests/fixtures/c/add.c");
    let iface = dir.path().join("add.xml");
    let answers = dir.path().join("answers.xml");
    let cdf = dir.path().join("add.cdf");
    cli(&["extract", p(&add), "-o", p(&iface)]);
    std::fs::write(&answers, "<answers name=\"add\" version=\"1.0.0\" openSource=\"false\"><provide port=\"add\"/></answers>").unwrap();
    let r = cli(&["describe", p(&iface), "--answers", p(&answers), "-o", p(&cdf)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let out = dir.path().join("add.zip");
    let r = cli(&["pack", "--cdf", p(&cdf), "--source", p(&add), "-o", p(&out)]);
    assert_eq!(r.code, EXIT_DIAGNOSTICS);
    assert!(!out.exists());
}

#[test]
fn grammar_check_reports_problems() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.ebnf");
    let bad = dir.path().join("bad.ebnf");
    std::fs::write(&good, "s = \"(\", s, \")\" | \"x\";\n").unwrap();
    std::fs::write(&bad, "s = s, \"x\" | t;\n").unwrap();
    let r = cli(&["grammar", "check", p(&good)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let r = cli(&["grammar", "check", p(&good), "--dump-automata"]);
    assert!(r.out.contains("<"), "{}", r.out);
    let r = cli(&["grammar", "check", p(&bad)]);
    assert_eq!(r.code, EXIT_DIAGNOSTICS);
    assert!(r.err.contains("left-recursive") || r.err.contains("undefined"), "{}", r.err);
}

#[test]
fn compile_without_service_is_environment() {
    let home = tempfile::tempdir().unwrap();
    std::env::set_var("COMODI_HOME", home.path());
    let add = fixture("core/tests/fixtures/c/add.c");
    let out = home.path().join("add.so");
    let r = cli(&["compile", p(&add), "-o", p(&out)]);
    assert_eq!(r.code, EXIT_ENVIRONMENT, "{}", r.err);
}
