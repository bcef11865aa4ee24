//! Developer pipeline: grammar, extract, describe, glue, pack, compile.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, ValueEnum};
use comodi_core::automata::{build_network, network_to_xml, tree_to_xml};
use comodi_core::cdl::{
    confirm_all, draft_descriptor, parse_answers, read_cdf_str, validate_cdf, write_cdf_string, DescriptorMeta,
    Version,
};
use comodi_core::diag::has_errors;
use comodi_core::ebnf::{self, parse_ebnf, validate_grammar, GrammarSource};
use comodi_core::extract::{interface_from_str, interface_to_string, Extractor, LanguageProfile};
use comodi_core::glue::{emit_glue, plan_glue};
use comodi_core::xml::Element;
use comodi_repo::{
    pack as pack_archive, CompileError, CompileRequest, CompileService, Config, FileRole, LocalCompiler,
    PackageManifest, RemoteCompiler, TarGzFormat, ZipFormat,
};

use crate::output::{diagnostics_text, Format};
use crate::{read_bytes, read_text, Failure, Io, Outcome};

#[derive(Args, Debug)]
pub struct GrammarCheckArgs {
    grammar: PathBuf,
    /// Print the automaton network built from the grammar.
    #[arg(long)]
    dump_automata: bool,
}

pub fn grammar_check(a: GrammarCheckArgs, io: &mut Io) -> Outcome {
    let src = GrammarSource::from_file(&a.grammar)
        .map_err(|e| Failure::Environment(format!("{}: {e}", a.grammar.display())))?;
    let g = parse_ebnf(&src).map_err(|e| Failure::Diagnostics(format!("{}: {e}", a.grammar.display())))?;
    let issues = validate_grammar(&g);
    for i in &issues {
        io.note(format!("{}: {}: {i}", i.severity(), a.grammar.display()));
    }
    if ebnf::has_errors(&issues) {
        return Err(Failure::Diagnostics(format!("{}: grammar has errors", a.grammar.display())));
    }
    if a.dump_automata {
        let net = build_network(&g).map_err(|e| Failure::Diagnostics(e.to_string()))?;
        return io.emit(None, network_to_xml(&net).to_document().as_bytes());
    }
    let text = match io.format {
        Format::Xml => Element::new("grammar")
            .attr("origin", a.grammar.display().to_string())
            .attr("start", g.start_symbol.as_str())
            .attr("rules", g.rules.len().to_string())
            .attr("lexicalRules", g.lexical_rules.len().to_string())
            .to_document(),
        Format::Text => format!(
            "{}: ok, {} rules, {} lexical, start {}\n",
            a.grammar.display(),
            g.rules.len(),
            g.lexical_rules.len(),
            g.start_symbol
        ),
    };
    io.emit(None, text.as_bytes())
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    source: PathBuf,
    /// Builtin language profile; guessed from the file extension if absent.
    #[arg(long, conflicts_with = "profile_file")]
    profile: Option<String>,
    /// Language profile file.
    #[arg(long)]
    profile_file: Option<PathBuf>,
    /// Print the parse tree instead of the interface.
    #[arg(long)]
    dump_tree: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn guess_profile(source: &Path) -> Option<&'static str> {
    let ext = source.extension()?.to_str()?.to_ascii_lowercase();
    match ext.as_str() {
        "c" | "h" => Some("c_subset"),
        "f" | "for" | "f77" => Some("fortran77"),
        _ => None,
    }
}

pub fn extract(a: ExtractArgs, io: &mut Io) -> Outcome {
    let extractor = match (&a.profile, &a.profile_file) {
        (_, Some(file)) => {
            let p = LanguageProfile::from_file(file).map_err(|e| Failure::Environment(e.to_string()))?;
            Extractor::new(p).map_err(|e| Failure::Diagnostics(e.to_string()))?
        }
        (Some(name), None) => Extractor::builtin(name).map_err(|e| Failure::Diagnostics(e.to_string()))?,
        (None, None) => {
            let name = guess_profile(&a.source).ok_or_else(|| {
                Failure::Diagnostics(format!("{}: cannot tell the language, pass --profile", a.source.display()))
            })?;
            Extractor::builtin(name).map_err(|e| Failure::Diagnostics(e.to_string()))?
        }
    };
    let text = read_text(&a.source)?;
    let origin = a.source.display().to_string();
    let diag = |e: comodi_core::extract::ExtractError| Failure::Diagnostics(e.to_string());
    if a.dump_tree {
        let (tokens, _) = extractor.lex(&origin, &text).map_err(diag)?;
        let tree = extractor.parse(&origin, &tokens).map_err(diag)?;
        return io.emit(a.output.as_ref(), tree_to_xml(&tree, &tokens).to_document().as_bytes());
    }
    let model = extractor.extract(&origin, &text).map_err(diag)?;
    let out = match io.format {
        Format::Xml => interface_to_string(&model),
        Format::Text => {
            let mut s = String::new();
            for f in &model.functions {
                let params: Vec<String> = f.params.iter().map(|p| format!("{} {}", p.type_name, p.name)).collect();
                let kind = if f.defined { "defined" } else { "declared" };
                s += &format!("{} {}({})  [{kind}, line {}]\n", f.return_type, f.local_name, params.join(", "), f.line);
            }
            s
        }
    };
    io.emit(a.output.as_ref(), out.as_bytes())
}

#[derive(Args, Debug)]
pub struct DescribeArgs {
    /// Interface document produced by `extract`.
    interface: PathBuf,
    /// Author answers; without them every defined function becomes a
    /// provides port and every declared-only one a uses port.
    #[arg(long)]
    answers: Option<PathBuf>,
    /// Component name, when there are no answers.
    #[arg(long, required_unless_present = "answers")]
    name: Option<String>,
    /// Component version, when there are no answers.
    #[arg(long, required_unless_present = "answers")]
    version: Option<Version>,
    /// Settle an unresolved type name as `NAME=CANONICAL`; repeatable.
    #[arg(long = "type", value_parser = parse_type_mapping)]
    types: Vec<(String, String)>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_type_mapping(s: &str) -> Result<(String, String), String> {
    parse_assignment(s).map(|(k, v)| (k, v.display().to_string()))
}

pub fn describe(a: DescribeArgs, io: &mut Io) -> Outcome {
    let model = interface_from_str(&read_text(&a.interface)?)
        .map_err(|e| Failure::Diagnostics(format!("{}: {e}", a.interface.display())))?;
    let (meta, mut answers) = match &a.answers {
        Some(p) => parse_answers(&read_text(p)?).map_err(|e| Failure::Diagnostics(format!("{}: {e}", p.display())))?,
        None => (
            DescriptorMeta {
                name: a.name.clone().unwrap_or_default(),
                version: a.version.unwrap_or(Version::new(1, 0, 0)),
                author: String::new(),
                license: String::new(),
                open_source: true,
            },
            confirm_all(&model),
        ),
    };
    answers.types.extend(a.types.iter().cloned());
    let d = draft_descriptor(&model, &answers, &meta).map_err(|e| Failure::Diagnostics(e.to_string()))?;
    let diags = validate_cdf(&d);
    if has_errors(&diags) {
        return Err(Failure::Diagnostics(diagnostics_text(&diags).trim_end().to_string()));
    }
    for w in &diags {
        io.note(w);
    }
    io.emit(a.output.as_ref(), write_cdf_string(&d).as_bytes())
}

#[derive(Args, Debug)]
pub struct GlueArgs {
    cdf: PathBuf,
    /// Directory for the glue source and wiring metadata.
    #[arg(short = 'd', long, default_value = ".")]
    out_dir: PathBuf,
}

pub fn glue(a: GlueArgs, io: &mut Io) -> Outcome {
    let d = read_cdf_str(&read_text(&a.cdf)?).map_err(|e| Failure::Diagnostics(format!("{}: {e}", a.cdf.display())))?;
    let plan = plan_glue(&d).map_err(|e| Failure::Diagnostics(e.to_string()))?;
    let art = emit_glue(&plan);
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Failure::Environment(format!("{}: {e}", a.out_dir.display())))?;
    let glue_path = a.out_dir.join(&art.glue_file);
    let wiring_path = a.out_dir.join(&art.wiring_file);
    io.emit(Some(&glue_path), art.glue_source.as_bytes())?;
    io.emit(Some(&wiring_path), art.wiring_metadata.as_bytes())?;
    let listing = format!("{}\n{}\n", glue_path.display(), wiring_path.display());
    io.emit(None, listing.as_bytes())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ArchiveKind {
    Zip,
    #[value(name = "tar.gz")]
    TarGz,
}

#[derive(Args, Debug)]
pub struct PackArgs {
    #[arg(long)]
    cdf: PathBuf,
    #[arg(long = "source")]
    sources: Vec<PathBuf>,
    #[arg(long)]
    glue: Option<PathBuf>,
    #[arg(long)]
    wiring: Option<PathBuf>,
    /// A compiled library as `platform=path`; repeatable.
    #[arg(long = "binary", value_parser = parse_assignment)]
    binaries: Vec<(String, PathBuf)>,
    #[arg(long = "resource")]
    resources: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = ArchiveKind::Zip)]
    archive: ArchiveKind,
    #[arg(short, long)]
    output: PathBuf,
}

pub(crate) fn parse_assignment(s: &str) -> Result<(String, PathBuf), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    if k.is_empty() || v.is_empty() {
        return Err(format!("expected KEY=VALUE, got {s:?}"));
    }
    Ok((k.to_string(), PathBuf::from(v)))
}

fn file_name(p: &Path) -> Result<String, Failure> {
    p.file_name()
        .and_then(|n| n.to_str())
        .map(str::to_string)
        .ok_or_else(|| Failure::Diagnostics(format!("{}: no usable file name", p.display())))
}

pub fn pack(a: PackArgs, io: &mut Io) -> Outcome {
    let cdf_bytes = read_bytes(&a.cdf)?;
    let text = String::from_utf8(cdf_bytes.clone())
        .map_err(|_| Failure::Diagnostics(format!("{}: not UTF-8", a.cdf.display())))?;
    let d = read_cdf_str(&text).map_err(|e| Failure::Diagnostics(format!("{}: {e}", a.cdf.display())))?;

    let mut files: Vec<(String, FileRole, Vec<u8>)> = vec![("component.cdf".into(), FileRole::Cdf, cdf_bytes)];
    for s in &a.sources {
        files.push((format!("src/{}", file_name(s)?), FileRole::Source, read_bytes(s)?));
    }
    if let Some(g) = &a.glue {
        files.push((format!("glue/{}", file_name(g)?), FileRole::GlueSource, read_bytes(g)?));
    }
    if let Some(w) = &a.wiring {
        files.push((format!("glue/{}", file_name(w)?), FileRole::WiringMetadata, read_bytes(w)?));
    }
    for (platform, path) in &a.binaries {
        let entry = format!("bin/{platform}/{}", file_name(path)?);
        files.push((entry, FileRole::Binary(platform.clone()), read_bytes(path)?));
    }
    for r in &a.resources {
        files.push((format!("res/{}", file_name(r)?), FileRole::Resource, read_bytes(r)?));
    }
    let borrowed: Vec<(&str, FileRole, &[u8])> =
        files.iter().map(|(p, r, b)| (p.as_str(), r.clone(), b.as_slice())).collect();
    let (manifest, contents) = PackageManifest::build(&d.name, d.version, &d.language, d.open_source, &borrowed)
        .map_err(|e| Failure::Diagnostics(e.to_string()))?;
    let bytes = match a.archive {
        ArchiveKind::Zip => pack_archive(&manifest, &contents, &ZipFormat),
        ArchiveKind::TarGz => pack_archive(&manifest, &contents, &TarGzFormat),
    }
    .map_err(|e| Failure::Diagnostics(e.to_string()))?;
    io.emit(Some(&a.output), &bytes)?;
    io.note(format!("packed {} {} ({} files) into {}", d.name, d.version, manifest.files.len(), a.output.display()));
    Ok(())
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    #[arg(required = true)]
    sources: Vec<PathBuf>,
    #[arg(long, default_value = "c")]
    language: String,
    /// Platform tag; defaults to the configured or host platform.
    #[arg(long)]
    platform: Option<String>,
    /// Compiler command template with `{output}` and `{sources}`.
    #[arg(long, conflicts_with = "server")]
    compiler: Option<String>,
    /// Compile server URL.
    #[arg(long)]
    server: Option<String>,
    #[arg(short, long)]
    output: PathBuf,
}

pub(crate) fn load_config() -> Result<Config, Failure> {
    Config::from_env().map_err(|e| Failure::Environment(format!("configuration: {e}")))
}

pub fn compile(a: CompileArgs, io: &mut Io) -> Outcome {
    let config = load_config()?;
    let service: Arc<dyn CompileService> = match (&a.compiler, &a.server) {
        (Some(cmd), _) => Arc::new(LocalCompiler::new(cmd)),
        (None, Some(url)) => Arc::new(RemoteCompiler::new(url)),
        (None, None) => config.compile_service().map_err(compile_failure)?,
    };
    let mut sources = Vec::new();
    for s in &a.sources {
        sources.push((file_name(s)?, read_bytes(s)?));
    }
    let req = CompileRequest {
        language: a.language.clone(),
        platform: a.platform.clone().unwrap_or_else(|| config.platform.clone()),
        sources,
    };
    let result = service.compile(&req).map_err(compile_failure)?;
    if !result.log.is_empty() {
        io.note(result.log.trim_end());
    }
    match (&result.binary, result.success) {
        (Some(bin), true) => {
            io.emit(Some(&a.output), bin)?;
            io.note(format!("compiled {} for {}", a.output.display(), result.platform));
            Ok(())
        }
        _ => Err(Failure::Diagnostics("compilation failed".into())),
    }
}

fn compile_failure(e: CompileError) -> Failure {
    match e {
        CompileError::BadRequest(_) => Failure::Diagnostics(e.to_string()),
        _ => Failure::Environment(e.to_string()),
    }
}
