//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p comodi-cli --test acceptance`.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use comodi_cli::{run_cli, EXIT_OK};
use comodi_core::automata::{build_network, network_to_single_pda, recognize, AutomatonNetwork, Token};
use comodi_core::cdl::{
    confirm_all, draft_descriptor, parse_literal, read_cdf_str, write_cdf_string, DescriptorMeta, Value, Version,
};
use comodi_core::ebnf::{has_errors, parse_ebnf, validate_grammar, GrammarSource};
use comodi_core::extract::{interface_to_string, Extractor, PassingMode};
use comodi_oracles::{enumerate_strings, random_grammar, Bnf, Cnf, Ex, RandGrammar};
use comodi_repo::{
    pack, serve_repo, sha256_hex, unpack_verify, FileRole, FormatRegistry, HttpEndpoint, LocalRepo, PackageManifest,
    RepoEndpoint, TarGzFormat, ZipFormat,
};
use comodi_wiring::{
    bind, check_mocks, descriptors_from_dir, load_mocks, load_project, run, Connection, Descriptors, Instance,
    MockBackend, MockImplementations, PortRef, ProjectDescription,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

enum Verdict {
    Pass(String),
    Skip(String),
}

type Check = Result<Verdict, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn crates_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("..")
}

fn fixtures(lang: &str, ext: &str) -> Vec<PathBuf> {
    let dir = crates_dir().join("core/tests/fixtures").join(lang);
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    files.sort();
    files
}

const CORPORA: [(&str, &str, &str); 2] = [("c_subset", "c", "c"), ("fortran77", "fortran", "f")];

// Criteria 1 and 2: the recognizer against CYK and against the flattened PDA.

const ALPHABET: [&str; 3] = ["a", "b", "c"];

fn network(text: &str) -> Option<AutomatonNetwork> {
    let g = parse_ebnf(&GrammarSource::new("random", text)).ok()?;
    if has_errors(&validate_grammar(&g)) {
        return None;
    }
    Some(build_network(&g).expect("validated grammar builds"))
}

fn validated_grammars(seed: u64, count: usize) -> Vec<(RandGrammar, AutomatonNetwork)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let rules = 1 + (out.len() % 5);
        let g = random_grammar(&mut rng, rules, 3, &ALPHABET);
        if let Some(net) = network(&g.to_ebnf()) {
            out.push((g, net));
        }
    }
    out
}

fn parens() -> RandGrammar {
    let t = |s: &str| Ex::T(s.into());
    RandGrammar {
        rules: vec![Ex::Alt(vec![Ex::Seq(vec![t("("), Ex::N(0), t(")")]), Ex::Empty])],
    }
}

/// The balanced-paren grammar over its own alphabet, then random grammars.
fn grammar_cases() -> Vec<(RandGrammar, AutomatonNetwork, Vec<Vec<String>>)> {
    let p = parens();
    let net = network(&p.to_ebnf()).unwrap();
    let mut cases = vec![(p, net, enumerate_strings(&["(", ")"], 6))];
    let words = enumerate_strings(&ALPHABET, 6);
    for (g, net) in validated_grammars(2024, 30) {
        cases.push((g, net, words.clone()));
    }
    cases
}

fn recognizer_vs_cyk() -> Check {
    let start = Instant::now();
    let cases = grammar_cases();
    let mut checked = 0;
    for (g, net, words) in &cases {
        let cnf = Cnf::from_bnf(&Bnf::from_rand(g));
        for w in words {
            let ours = recognize(net, &Token::symbols(w)).is_ok();
            ensure(ours == cnf.accepts(w), || format!("disagree on {w:?} for\n{}", g.to_ebnf()))?;
            checked += 1;
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(120), || format!("took {took:?}"))?;
    Ok(Verdict::Pass(format!("{} grammars, {checked} strings, {took:.1?}", cases.len())))
}

fn single_pda_equivalence() -> Check {
    let cases = grammar_cases();
    let mut checked = 0;
    for (g, net, words) in &cases {
        let pda = network_to_single_pda(net);
        for w in words {
            let toks = Token::symbols(w);
            ensure(pda.accepts(&toks) == recognize(net, &toks).is_ok(), || {
                format!("disagree on {w:?} for\n{}", g.to_ebnf())
            })?;
            checked += 1;
        }
    }
    Ok(Verdict::Pass(format!("{} grammars, {checked} strings", cases.len())))
}

// Criterion 3: extraction goldens.

fn extraction_corpus() -> Check {
    let mut counts = Vec::new();
    for (profile, lang, ext) in CORPORA {
        let ex = Extractor::builtin(profile).unwrap();
        let files = fixtures(lang, ext);
        for path in &files {
            let text = fs::read_to_string(path).unwrap();
            let origin = path.file_name().unwrap().to_str().unwrap();
            let m = ex.extract(origin, &text).map_err(|e| format!("{}: {e}", path.display()))?;
            let golden = fs::read_to_string(path.with_extension("xml")).map_err(|e| e.to_string())?;
            ensure(interface_to_string(&m) == golden, || format!("{} differs from its golden", path.display()))?;
            if lang == "fortran" {
                let all_ref = m.functions.iter().all(|f| f.params.iter().all(|p| p.passing == PassingMode::ByReference));
                ensure(all_ref, || format!("{}: a parameter is not by reference", path.display()))?;
            }
        }
        counts.push(files.len());
    }
    ensure(counts[0] >= 10 && counts[1] >= 5, || format!("corpus too small: {counts:?}"))?;
    Ok(Verdict::Pass(format!("{} C and {} Fortran files byte-identical", counts[0], counts[1])))
}

// Criterion 4: the developer pipeline leaves sources alone.

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(std::iter::once("comodi").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

fn cli_ok(args: &[&str]) -> Result<String, String> {
    let (code, out, err) = cli(args);
    ensure(code == EXIT_OK, || format!("comodi {}: exit {code}: {err}", args.join(" ")))?;
    Ok(out)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tree_digests(dir: &Path) -> BTreeMap<PathBuf, String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            let d = sha256_hex(&fs::read(&p).unwrap());
            (p, d)
        })
        .collect()
}

fn sources_untouched() -> Check {
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut components = 0;
    for (profile, lang, ext) in CORPORA {
        let src_dir = crates_dir().join("core/tests/fixtures").join(lang);
        let before = tree_digests(&src_dir);
        for path in fixtures(lang, ext) {
            let stem = path.file_stem().unwrap().to_str().unwrap();
            let out = work.path().join(lang).join(stem);
            fs::create_dir_all(&out).unwrap();
            let iface = out.join("interface.xml");
            let cdf = out.join("component.cdf");
            let archive = out.join("component.zip");
            cli_ok(&["extract", "--profile", profile, s(&path), "-o", s(&iface)])?;

            // Types the extractor cannot see are settled by the author.
            let m = Extractor::builtin(profile).unwrap().extract("src", &fs::read_to_string(&path).unwrap()).unwrap();
            let mappings: Vec<String> = m.unresolved_types().iter().map(|t| format!("{t}=double")).collect();
            let mut describe = vec!["describe", s(&iface), "--name", stem, "--version", "1.0.0", "-o", s(&cdf)];
            for t in &mappings {
                describe.extend(["--type", t.as_str()]);
            }
            cli_ok(&describe)?;
            let listing = cli_ok(&["glue", s(&cdf), "-d", s(&out)])?;
            let generated: Vec<PathBuf> = listing.lines().map(PathBuf::from).collect();
            ensure(generated.len() == 2, || format!("{stem}: glue wrote {generated:?}"))?;
            for g in &generated {
                ensure(g.parent() == Some(out.as_path()) && g.file_name() != path.file_name(), || {
                    format!("{stem}: glue written to {}", g.display())
                })?;
            }
            cli_ok(&[
                "pack", "--cdf", s(&cdf), "--source", s(&path), "--glue", s(&generated[0]), "--wiring",
                s(&generated[1]), "-o", s(&archive),
            ])?;
            let pkg = unpack_verify(&fs::read(&archive).unwrap(), &FormatRegistry::default()).map_err(|e| e.to_string())?;
            let packed = pkg.file(&format!("src/{}", path.file_name().unwrap().to_str().unwrap()));
            ensure(packed == Some(&fs::read(&path).unwrap()[..]), || format!("{stem}: packed source differs"))?;
            let glue_entries = pkg.manifest.with_role(&FileRole::GlueSource).count();
            ensure(glue_entries == 1, || format!("{stem}: {glue_entries} glue entries"))?;
            components += 1;
        }
        let after = tree_digests(&src_dir);
        ensure(before == after, || format!("{lang} fixture directory changed"))?;
    }
    Ok(Verdict::Pass(format!("{components} components, 0 source changes, glue in separate files")))
}

// Criterion 5: round trips.

fn meta(name: &str) -> DescriptorMeta {
    DescriptorMeta {
        name: name.into(),
        version: Version::new(1, 0, 0),
        author: "acceptance".into(),
        license: "MIT".into(),
        open_source: true,
    }
}

fn round_trips() -> Check {
    let mut cdfs = 0;
    let mut archives = Vec::new();
    for (profile, lang, ext) in CORPORA {
        let ex = Extractor::builtin(profile).unwrap();
        for path in fixtures(lang, ext) {
            let stem = path.file_stem().unwrap().to_str().unwrap();
            let source = fs::read(&path).unwrap();
            let m = ex.extract("src", std::str::from_utf8(&source).unwrap()).unwrap();
            let mut answers = confirm_all(&m);
            for t in m.unresolved_types() {
                answers.types.insert(t.to_string(), "double".into());
            }
            let d = draft_descriptor(&m, &answers, &meta(stem)).map_err(|e| e.to_string())?;
            let text = write_cdf_string(&d);
            let back = read_cdf_str(&text).map_err(|e| e.to_string())?;
            ensure(back == d && write_cdf_string(&back) == text, || format!("{stem}: CDF round trip"))?;
            cdfs += 1;

            let src_entry = format!("src/{}", path.file_name().unwrap().to_str().unwrap());
            let files = [("component.cdf", FileRole::Cdf, text.as_bytes()), (src_entry.as_str(), FileRole::Source, &source[..])];
            let (manifest, contents) = PackageManifest::build(stem, d.version, &d.language, true, &files).map_err(|e| e.to_string())?;
            for (format, fmt_name) in [(&ZipFormat as &dyn comodi_repo::ArchiveFormat, "zip"), (&TarGzFormat, "tar.gz")] {
                let first = pack(&manifest, &contents, format).map_err(|e| e.to_string())?;
                let pkg = unpack_verify(&first, &FormatRegistry::default()).map_err(|e| e.to_string())?;
                let second = pack(&pkg.manifest, &pkg.files, format).map_err(|e| e.to_string())?;
                ensure(first == second, || format!("{stem}: {fmt_name} pack/unpack/pack differs"))?;
                if fmt_name == "zip" {
                    archives.push((stem.to_string(), first));
                }
            }
        }
    }
    let repo = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cache = tempfile::tempdir().map_err(|e| e.to_string())?;
    let server = serve_repo(repo.path(), "127.0.0.1:0", None).map_err(|e| e.to_string())?;
    let ep = HttpEndpoint::new(&server.url());
    let local = LocalRepo::new(cache.path());
    for (name, bytes) in &archives {
        ep.put(bytes).map_err(|e| e.to_string())?;
        let path = local.fetch(&ep, name, Version::new(1, 0, 0)).map_err(|e| e.to_string())?;
        ensure(fs::read(&path).unwrap() == *bytes, || format!("{name}: fetched bytes differ"))?;
    }
    Ok(Verdict::Pass(format!("{cdfs} CDFs, {} archives in 2 formats, {} register/fetch", cdfs, archives.len())))
}

// Criterion 6: mock projects.

fn mock_semantics() -> Check {
    let expected = [
        ("pipeline", Value::Float(7.0)),
        ("diamond", Value::Float(16.0)),
        ("defaults", Value::Float(3.0)),
        ("selfloop", Value::Int(5)),
    ];
    for (name, want) in expected {
        let dir = crates_dir().join("wiring/tests/projects").join(name);
        let p = load_project(&fs::read_to_string(dir.join("project.xml")).unwrap()).map_err(|e| e.to_string())?;
        let d = descriptors_from_dir(&p, &dir).map_err(|e| format!("{e:?}"))?;
        let m = load_mocks(&fs::read_to_string(dir.join("mocks.xml")).unwrap()).map_err(|e| e.to_string())?;
        let plan = bind(&p, &d).map_err(|e| format!("{name}: {e:?}"))?;
        ensure(check_mocks(&m, &plan, &d).is_empty(), || format!("{name}: mock diagnostics"))?;
        let r = run(&plan, &d, &mut MockBackend::new(m), &[]).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.value == Some(want), || format!("{name}: got {:?}, expected {want:?}", r.value))?;
        ensure(r.link_calls.len() == p.instances.len() && r.link_calls.values().all(|&n| n == 1), || {
            format!("{name}: link calls {:?}", r.link_calls)
        })?;
        ensure(r.runtime_wiring_calls == 0, || format!("{name}: {} runtime wiring calls", r.runtime_wiring_calls))?;
    }
    Ok(Verdict::Pass("pipeline=7.0 diamond=16.0 defaults=3.0 selfloop=5; link once, no runtime wiring".into()))
}

// Criterion 7: trailing defaults.

const TYPES: [&str; 5] = ["int", "long", "float", "double", "char"];

fn random_literal(rng: &mut StdRng) -> (&'static str, String) {
    match rng.gen_range(0..5) {
        0 => ("int", rng.gen::<i32>().to_string()),
        1 => ("long", rng.gen_range(-(1i64 << 53)..(1i64 << 53)).to_string()),
        2 => ("float", format!("{:?}", rng.gen_range(-1.0e30f32..1.0e30f32))),
        3 => ("double", format!("{:?}", rng.gen_range(-1.0e300f64..1.0e300f64))),
        _ => loop {
            let c = rng.gen_range(b' '..=b'~');
            if c != b'\'' && c != b'\\' {
                break ("char", format!("'{}'", c as char));
            }
        },
    }
}

fn params_xml(types: &[(&str, Option<&str>)]) -> String {
    types
        .iter()
        .enumerate()
        .map(|(i, (t, d))| {
            let default = d
                .map(|d| format!(" default=\"{}\"", d.replace('&', "&amp;").replace('<', "&lt;").replace('"', "&quot;")))
                .unwrap_or_default();
            format!("<param name=\"p{i}\" type=\"{t}\" passing=\"byValue\"{default}/>")
        })
        .collect()
}

fn cdf(name: &str, body: &str) -> String {
    format!(
        "<component cdl-version=\"1\" name=\"{name}\" version=\"1.0.0\" language=\"c\" author=\"t\" license=\"MIT\" openSource=\"true\">{body}</component>"
    )
}

fn port(comp: &str, name: &str, params: &str) -> String {
    format!("<port name=\"{name}\" global=\"cmdi_{comp}_1_{name}\" returns=\"double\"><doc>d</doc>{params}</port>")
}

fn instance(id: &str) -> Instance {
    Instance {
        id: id.into(),
        package: id.into(),
        version: Version::new(1, 0, 0),
    }
}

fn default_extension() -> Check {
    let mut rng = StdRng::seed_from_u64(77);
    let mut calls = 0;
    for case in 0..200 {
        let required: Vec<&str> = (0..rng.gen_range(0..3)).map(|_| TYPES[rng.gen_range(0..5)]).collect();
        let defaulted: Vec<(&str, String)> = (0..rng.gen_range(1..5)).map(|_| random_literal(&mut rng)).collect();
        let all: Vec<(&str, Option<&str>)> = required
            .iter()
            .map(|t| (*t, None))
            .chain(defaulted.iter().map(|(t, d)| (*t, Some(d.as_str()))))
            .collect();
        let mut explicit: Vec<Value> =
            required.iter().map(|t| Value::Int(rng.gen_range(-1000..1000)).coerce(t).unwrap()).collect();
        explicit.extend(defaulted.iter().map(|(t, d)| parse_literal(t, d).unwrap()));

        let mut d = Descriptors::new();
        let callee = cdf("callee", &format!("<provides>{}</provides>", port("callee", "f", &params_xml(&all))));
        d.insert("callee".into(), read_cdf_str(&callee).unwrap());
        let body: Vec<String> = (0..all.len()).map(|i| format!("p{i} * {}", i + 1)).collect();
        let mut m = MockImplementations::default();
        m.insert(PortRef::new("callee", "f"), &body.join(" + ")).unwrap();
        let mut instances = vec![instance("callee")];
        let mut connections = Vec::new();
        for k in required.len()..=all.len() {
            let id = format!("caller{k}");
            let uses: Vec<(&str, Option<&str>)> = all[..k].iter().map(|(t, _)| (*t, None)).collect();
            let text = cdf(
                &id,
                &format!("<provides>{}</provides><uses>{}</uses>", port(&id, "go", ""), port(&id, "f", &params_xml(&uses))),
            );
            d.insert(id.clone(), read_cdf_str(&text).unwrap());
            let args: Vec<String> = explicit[..k].iter().map(|v| format!("{:?}", v.as_f64())).collect();
            let call = std::iter::once("f".to_string()).chain(args).collect::<Vec<_>>().join(", ");
            m.insert(PortRef::new(&id, "go"), &format!("call({call})")).unwrap();
            instances.push(instance(&id));
            connections.push(Connection {
                from: PortRef::new(&id, "f"),
                to: PortRef::new("callee", "f"),
            });
        }
        let mut p = ProjectDescription {
            instances,
            connections,
            overrides: Vec::new(),
            entry: PortRef::new("callee", "f"),
        };
        let plan = bind(&p, &d).map_err(|e| format!("case {case}: {e:?}"))?;
        let exec = |plan: &comodi_wiring::WiringPlan, args: &[Value]| run(plan, &d, &mut MockBackend::new(m.clone()), args).map(|r| r.value);
        let full = exec(&plan, &explicit).map_err(|e| e.to_string())?;
        for k in required.len()..=explicit.len() {
            let short = exec(&plan, &explicit[..k]).map_err(|e| e.to_string())?;
            ensure(short == full, || format!("case {case}: direct call with {k} args gave {short:?}, not {full:?}"))?;
            p.entry = PortRef::new(&format!("caller{k}"), "go");
            let via = exec(&bind(&p, &d).unwrap(), &[]).map_err(|e| e.to_string())?;
            ensure(via == full, || format!("case {case}: uses port of arity {k} gave {via:?}, not {full:?}"))?;
            calls += 2;
        }
    }
    Ok(Verdict::Pass(format!("200 cases, {calls} shortened calls equal to explicit ones")))
}

// Criterion 8: concurrent fetches.

fn tiny_archive(name: &str) -> Vec<u8> {
    let cdf = format!("<component name=\"{name}\" version=\"1.0.0\"/>\n");
    let src = format!("double {name}(double x) {{ return x; }}\n");
    let files = [("component.cdf", FileRole::Cdf, cdf.as_bytes()), ("src/a.c", FileRole::Source, src.as_bytes())];
    let (m, contents) = PackageManifest::build(name, Version::new(1, 0, 0), "c", true, &files).unwrap();
    pack(&m, &contents, &ZipFormat).unwrap()
}

fn concurrent_fetches() -> Check {
    let repo = tempfile::tempdir().map_err(|e| e.to_string())?;
    let server = serve_repo(repo.path(), "127.0.0.1:0", None).map_err(|e| e.to_string())?;
    let url = server.url();
    let names = ["alpha", "beta", "gamma"];
    let mut digests = BTreeMap::new();
    for n in names {
        let bytes = tiny_archive(n);
        digests.insert(n, sha256_hex(&bytes));
        HttpEndpoint::new(&url).put(&bytes).map_err(|e| e.to_string())?;
    }
    let results: Vec<Result<(), String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..8)
            .map(|i| {
                let url = url.clone();
                let digests = &digests;
                scope.spawn(move || {
                    let cache = tempfile::tempdir().map_err(|e| e.to_string())?;
                    let name = names[i % names.len()];
                    let path = LocalRepo::new(cache.path())
                        .fetch(&HttpEndpoint::new(&url), name, Version::new(1, 0, 0))
                        .map_err(|e| e.to_string())?;
                    ensure(sha256_hex(&fs::read(path).unwrap()) == digests[name], || format!("{name}: digest"))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err("fetch thread panicked".into()))).collect()
    });
    for r in results {
        r?;
    }
    let index = HttpEndpoint::new(&url).index().map_err(|e| e.to_string())?;
    ensure(index.len() == 3, || format!("index has {} entries", index.len()))?;
    for n in names {
        let e = index.get(n, Version::new(1, 0, 0)).ok_or_else(|| format!("{n} missing from index"))?;
        ensure(e.digest == digests[n], || format!("{n}: index digest changed"))?;
    }
    ensure(server.transfers() == 8, || format!("{} transfers", server.transfers()))?;
    Ok(Verdict::Pass("8 fetches verified, index consistent with 3 entries".into()))
}

// Criterion 9: the add component natively, in and out of the framework.

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[cfg(feature = "native")]
fn native_add() -> Check {
    use comodi_core::glue::{emit_glue, plan_glue};
    use comodi_wiring::NativeBackend;

    if !have_cc() {
        return Ok(Verdict::Skip("no C compiler".into()));
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let add = crates_dir().join("core/tests/fixtures/c/add.c");
    let source = fs::read_to_string(&add).unwrap();
    let m = Extractor::builtin("c_subset").unwrap().extract("add.c", &source).unwrap();
    let d = draft_descriptor(&m, &confirm_all(&m), &meta("add")).map_err(|e| e.to_string())?;
    let glue = emit_glue(&plan_glue(&d).map_err(|e| e.to_string())?);
    let glue_path = dir.path().join(&glue.glue_file);
    fs::write(&glue_path, &glue.glue_source).unwrap();
    let cc = |args: &[&str]| -> Result<(), String> {
        let out = Command::new("cc").args(args).output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())
    };
    let so = dir.path().join("libadd.so");
    cc(&["-shared", "-fPIC", "-o", s(&so), s(&add), s(&glue_path)])?;

    // Outside the framework: an ordinary program linked against the source.
    let main = dir.path().join("main.c");
    fs::write(
        &main,
        "#include <stdio.h>\n#include <stdlib.h>\ndouble add(double a, double b);\n\
         int main(int c, char **v) { printf(\"%.17g\\n\", add(atof(v[1]), atof(v[2]))); return 0; }\n",
    )
    .unwrap();
    let exe = dir.path().join("standalone");
    cc(&["-o", s(&exe), s(&main), s(&add)])?;

    let p = ProjectDescription {
        instances: vec![Instance {
            id: "a".into(),
            package: "add".into(),
            version: Version::new(1, 0, 0),
        }],
        connections: Vec::new(),
        overrides: Vec::new(),
        entry: PortRef::new("a", "add"),
    };
    let mut descriptors = Descriptors::new();
    descriptors.insert("a".into(), d);
    let plan = bind(&p, &descriptors).map_err(|e| format!("{e:?}"))?;
    let mut pairs = 0;
    for (x, y) in [(2.0, 3.5), (-1.25, 1e10), (0.1, 0.2)] {
        let out = Command::new(&exe).arg(format!("{x:?}")).arg(format!("{y:?}")).output().map_err(|e| e.to_string())?;
        let standalone: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().map_err(|e| format!("{e}"))?;
        let mut backend = NativeBackend::new(BTreeMap::from([("a".to_string(), so.clone())])).map_err(|e| e.to_string())?;
        let r = run(&plan, &descriptors, &mut backend, &[Value::Float(x), Value::Float(y)]).map_err(|e| e.to_string())?;
        ensure(r.value == Some(Value::Float(standalone)), || format!("add({x}, {y}): {:?} vs {standalone}", r.value))?;
        pairs += 1;
    }
    Ok(Verdict::Pass(format!("{pairs} argument pairs identical standalone and through the framework")))
}

#[cfg(not(feature = "native"))]
fn native_add() -> Check {
    Ok(Verdict::Skip("built without the native feature".into()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("recognizer agrees with CYK", recognizer_vs_cyk),
        ("single PDA agrees with recognizer", single_pda_equivalence),
        ("extraction corpus matches goldens", extraction_corpus),
        ("sources untouched, glue separate", sources_untouched),
        ("CDF, package and repository round trips", round_trips),
        ("mock projects: values, link once", mock_semantics),
        ("default extension", default_extension),
        ("concurrent repository fetches", concurrent_fetches),
        ("native add in and out of the framework", native_add),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match verdict {
            Ok(Verdict::Pass(detail)) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Ok(Verdict::Skip(why)) => println!("criterion {} {name}: SKIP ({why})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
