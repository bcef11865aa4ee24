//! User pipeline: validate and run projects.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use comodi_core::cdl::{parse_literal, read_cdf_str, Value};
use comodi_core::diag::has_errors;
use comodi_core::Diagnostic;
use comodi_repo::{FileRole, Package};
use comodi_wiring::{
    bind, check_mocks, descriptors_from_dir, load_mocks, load_project, run as run_plan, validate_project, Backend,
    Descriptors, MockBackend, ProjectDescription, RunError, WiringPlan,
};

use crate::output::{diagnostics_text, diagnostics_xml, Format};
use crate::repo::{endpoint, local_repo, repo_failure};
use crate::{read_text, Failure, Io, Outcome};

/// Where descriptors (and, for native runs, binaries) come from.
#[derive(Args, Debug)]
pub struct ComponentSource {
    /// Directory of `<package>-<version>.cdf` or `<package>.cdf` files;
    /// defaults to the project's directory.
    #[arg(long, conflicts_with = "repo")]
    descriptors: Option<PathBuf>,
    /// Fetch packages from this repository instead.
    #[arg(long)]
    repo: Option<String>,
    /// Local repository root used with `--repo`.
    #[arg(long)]
    cache: Option<PathBuf>,
}

fn load_project_file(path: &Path) -> Result<ProjectDescription, Failure> {
    load_project(&read_text(path)?).map_err(|e| Failure::Diagnostics(format!("{}: {e}", path.display())))
}

/// Descriptors plus, when they came from a repository, the packages.
fn gather(
    p: &ProjectDescription,
    project_path: &Path,
    src: &ComponentSource,
) -> Result<(Descriptors, BTreeMap<String, Package>), Failure> {
    if src.repo.is_none() && src.cache.is_none() {
        let dir = match &src.descriptors {
            Some(d) => d.clone(),
            None => project_path.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        return descriptors_from_dir(p, &dir)
            .map(|d| (d, BTreeMap::new()))
            .map_err(|diags| Failure::Diagnostics(diagnostics_text(&diags).trim_end().to_string()));
    }
    let local = local_repo(src.cache.as_ref())?;
    let ep = match &src.repo {
        Some(r) => Some(endpoint(Some(r))?),
        None => None,
    };
    let mut descriptors = Descriptors::new();
    let mut packages = BTreeMap::new();
    for inst in &p.instances {
        let pkg = match &ep {
            Some(ep) => local.load(ep.as_ref(), &inst.package, inst.version).map_err(repo_failure)?,
            None => {
                let path = local.cached(&inst.package, inst.version).ok_or_else(|| {
                    Failure::Environment(format!("{} {} is not in the local repository", inst.package, inst.version))
                })?;
                let bytes = std::fs::read(&path).map_err(|e| Failure::Environment(format!("{}: {e}", path.display())))?;
                comodi_repo::unpack_verify(&bytes, &Default::default()).map_err(repo_failure)?
            }
        };
        let cdf = pkg
            .manifest
            .with_role(&FileRole::Cdf)
            .next()
            .and_then(|e| pkg.file(&e.path))
            .ok_or_else(|| Failure::Diagnostics(format!("{}: package has no descriptor", inst.id)))?;
        let text = std::str::from_utf8(cdf).map_err(|_| Failure::Diagnostics(format!("{}: descriptor is not UTF-8", inst.id)))?;
        let d = read_cdf_str(text).map_err(|e| Failure::Diagnostics(format!("{}: {e}", inst.id)))?;
        descriptors.insert(inst.id.clone(), d);
        packages.insert(inst.id.clone(), pkg);
    }
    Ok((descriptors, packages))
}

fn report_diagnostics(io: &mut Io, diags: &[Diagnostic]) -> Outcome {
    let out = match io.format {
        Format::Xml => diagnostics_xml(diags).to_document(),
        Format::Text => diagnostics_text(diags),
    };
    io.emit(None, out.as_bytes())?;
    if has_errors(diags) {
        return Err(Failure::Diagnostics(format!(
            "{} error(s)",
            diags.iter().filter(|d| d.is_error()).count()
        )));
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    project: PathBuf,
    #[command(flatten)]
    source: ComponentSource,
}

pub fn validate(a: ValidateArgs, io: &mut Io) -> Outcome {
    let p = load_project_file(&a.project)?;
    let (descriptors, _) = gather(&p, &a.project, &a.source)?;
    report_diagnostics(io, &validate_project(&p, &descriptors))
}

#[derive(Args, Debug)]
pub struct RunArgs {
    project: PathBuf,
    /// Mock implementations of the provides ports.
    #[arg(long, required_unless_present = "native", conflicts_with = "native")]
    mocks: Option<PathBuf>,
    /// Load compiled components instead of mocks.
    #[arg(long)]
    native: bool,
    /// Binary for one instance as `instance=path`; repeatable.
    #[arg(long = "binary", value_parser = crate::develop::parse_assignment)]
    binaries: Vec<(String, PathBuf)>,
    /// Platform whose binaries are taken from fetched packages.
    #[arg(long)]
    platform: Option<String>,
    /// Entry argument, parsed against the entry port's parameter types.
    #[arg(long = "arg", allow_hyphen_values = true)]
    args: Vec<String>,
    #[command(flatten)]
    source: ComponentSource,
}

fn entry_args(plan: &WiringPlan, raw: &[String]) -> Result<Vec<Value>, Failure> {
    let inst = plan.instance(&plan.entry.instance).expect("bound entry instance");
    let port = inst.port(&plan.entry.port).expect("bound entry port");
    if raw.len() > port.arity() {
        return Err(Failure::Diagnostics(format!(
            "{} takes at most {} argument(s), got {}",
            plan.entry,
            port.arity(),
            raw.len()
        )));
    }
    raw.iter()
        .zip(&port.params)
        .map(|(text, param)| {
            parse_literal(&param.type_name, text).ok_or_else(|| {
                Failure::Diagnostics(format!("argument {text:?} is not a {} literal for {}", param.type_name, param.name))
            })
        })
        .collect()
}

fn run_failure(e: RunError) -> Failure {
    match e {
        RunError::MissingBinary { .. } | RunError::Load { .. } => Failure::Environment(e.to_string()),
        _ => Failure::Diagnostics(e.to_string()),
    }
}

pub fn run(a: RunArgs, io: &mut Io) -> Outcome {
    let p = load_project_file(&a.project)?;
    let (descriptors, packages) = gather(&p, &a.project, &a.source)?;
    let diags = validate_project(&p, &descriptors);
    for w in diags.iter().filter(|d| !d.is_error()) {
        io.note(w);
    }
    let plan = bind(&p, &descriptors).map_err(|d| Failure::Diagnostics(diagnostics_text(&d).trim_end().to_string()))?;
    let args = entry_args(&plan, &a.args)?;

    let mut scratch = None;
    let mut backend: Box<dyn Backend> = match &a.mocks {
        Some(path) => {
            let mocks = load_mocks(&read_text(path)?).map_err(|e| Failure::Diagnostics(format!("{}: {e}", path.display())))?;
            let diags = check_mocks(&mocks, &plan, &descriptors);
            for w in diags.iter().filter(|d| !d.is_error()) {
                io.note(w);
            }
            if has_errors(&diags) {
                return Err(Failure::Diagnostics(diagnostics_text(&diags).trim_end().to_string()));
            }
            Box::new(MockBackend::new(mocks))
        }
        None => native_backend(&a, &plan, &packages, &mut scratch)?,
    };
    let report = run_plan(&plan, &descriptors, backend.as_mut(), &args).map_err(run_failure)?;
    let out = match io.format {
        Format::Xml => report.to_xml().to_document(),
        Format::Text => match report.value {
            Some(v) => format!("{v}\n"),
            None => "(no value)\n".to_string(),
        },
    };
    io.emit(None, out.as_bytes())
}

#[cfg(feature = "native")]
fn native_backend(
    a: &RunArgs,
    plan: &WiringPlan,
    packages: &BTreeMap<String, Package>,
    scratch: &mut Option<tempfile::TempDir>,
) -> Result<Box<dyn Backend>, Failure> {
    let platform = match &a.platform {
        Some(p) => p.clone(),
        None => crate::develop::load_config()?.platform,
    };
    let mut binaries: BTreeMap<String, PathBuf> = a.binaries.iter().cloned().collect();
    for inst in &plan.instances {
        if binaries.contains_key(&inst.id) {
            continue;
        }
        let Some(pkg) = packages.get(&inst.id) else { continue };
        let Some(entry) = pkg.manifest.binary_for(&platform) else { continue };
        if scratch.is_none() {
            *scratch = Some(tempfile::tempdir().map_err(|e| Failure::Environment(format!("scratch dir: {e}")))?);
        }
        let dir = scratch.as_ref().expect("just created").path();
        let path = dir.join(format!("{}.so", inst.id));
        std::fs::write(&path, pkg.file(&entry.path).expect("verified package"))
            .map_err(|e| Failure::Environment(format!("{}: {e}", path.display())))?;
        binaries.insert(inst.id.clone(), path);
    }
    if let Some(missing) = plan.instances.iter().find(|i| !binaries.contains_key(&i.id)) {
        return Err(run_failure(RunError::MissingBinary {
            instance: missing.id.clone(),
            platform,
        }));
    }
    Ok(Box::new(comodi_wiring::NativeBackend::new(binaries).map_err(run_failure)?))
}

#[cfg(not(feature = "native"))]
fn native_backend(
    _: &RunArgs,
    _: &WiringPlan,
    _: &BTreeMap<String, Package>,
    _: &mut Option<tempfile::TempDir>,
) -> Result<Box<dyn Backend>, Failure> {
    Err(Failure::Environment("this build has no native backend".into()))
}
