//! mgeo: command-line interface for the monoid-geometry toolkit.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use monoid_geometry::free_points::{self, Basis, SubsetDesc};
use monoid_geometry::graded::{self, GradedModule, GradedMonoid};
use monoid_geometry::json as mj;
use monoid_geometry::monoid::MonoidPresentation;
use monoid_geometry::msets::{self, MSet};
use monoid_geometry::schemes;
use monoid_geometry::spectrum::{self, PrimeIdeal};
use monoid_geometry::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Parser)]
#[command(name = "mgeo", about = "prime spectra, M-sets, Proj, and topos points of monoids")]
struct Cli {
    /// step budget for word-problem searches
    #[arg(long, global = true, default_value_t = 10_000)]
    budget: u64,
    /// truncation half-width for windowed checks
    #[arg(long, global = true, default_value_t = 6)]
    window: u32,
    /// maximum generator count for Spec enumeration
    #[arg(long, global = true, default_value_t = 20)]
    cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// emit a DOT Hasse diagram instead of a report (spec only)
    #[arg(long, global = true)]
    dot: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Prime spectrum of a presented monoid
    Spec { file: PathBuf },
    /// Universal semilattice and the comparison with Spec
    Semilattice { file: PathBuf },
    /// The support map alpha(f) for one element, e.g. --element '{"x":2}'
    Alpha {
        file: PathBuf,
        #[arg(long)]
        element: String,
    },
    /// Topos points of S_M: one localization per prime
    Points { file: PathBuf },
    /// Tensor two prime-localization points and classify the result
    Tensor {
        file: PathBuf,
        /// zero-set of the first prime, as comma-separated generator names
        #[arg(long, default_value = "")]
        p: String,
        #[arg(long, default_value = "")]
        q: String,
    },
    /// Classify an M-set as a point: prime and source element
    Classify {
        file: PathBuf,
        /// finite carrier JSON; omitted = classify the regular M-set
        #[arg(long)]
        mset: Option<PathBuf>,
        /// classify the localization at this prime instead
        #[arg(long)]
        prime: Option<String>,
    },
    /// Filteredness verdict for an M-set
    FilteredCheck {
        file: PathBuf,
        #[arg(long)]
        mset: PathBuf,
    },
    /// Graded-monoid utilities: `graded check F` or `graded d0loc F --f x`
    Graded {
        #[arg(value_parser = ["check", "d0loc"])]
        action: String,
        file: PathBuf,
        /// degree-1 generator for d0loc
        #[arg(long)]
        f: Option<String>,
    },
    /// Proj of a graded monoid: points, order, optional section counts
    Proj {
        file: PathBuf,
        #[arg(long)]
        sections: bool,
        #[arg(long, default_value_t = 0)]
        twist: i64,
    },
    /// Sheaf checks on Proj: sections, line-bundle, counit
    Sheaf {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        twist: i64,
        #[arg(long)]
        sections: bool,
        #[arg(long)]
        line_bundle: bool,
        #[arg(long)]
        counit: bool,
    },
    /// Stalk presentations at every point (affine, or Proj for graded input)
    Stalks { file: PathBuf },
    /// Rebuild the scheme from its stalk points and verify the round trip
    Reconstruct {
        file: PathBuf,
        #[arg(long)]
        verify: bool,
    },
    /// Sigma-function operations over the free monoid of countable rank
    FreePoints {
        #[arg(value_parser = ["eq", "add", "hidden", "gamma"])]
        action: String,
        files: Vec<PathBuf>,
        /// gamma of the cofinite set excluding these indices (comma-separated)
        #[arg(long)]
        cofinite: Option<String>,
        /// gamma of this finite set of indices
        #[arg(long)]
        finite: Option<String>,
    },
    /// Validate and summarize every presentation in a corpus directory
    CorpusRun { dir: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_presentation(path: &Path) -> Result<MonoidPresentation> {
    Ok(mj::presentation_from_str(&read(path)?)?)
}

fn load_graded(path: &Path) -> Result<GradedMonoid> {
    Ok(mj::graded_from_str(&read(path)?)?)
}

fn is_graded_file(path: &Path) -> Result<bool> {
    let v: serde_json::Value = serde_json::from_str(&read(path)?)?;
    Ok(v.get("degrees").is_some())
}

fn parse_prime(
    names: &str,
    m: &MonoidPresentation,
    lattice: &spectrum::SpecLattice,
) -> Result<PrimeIdeal> {
    let mut mask = 0u64;
    for name in names.split(',').filter(|s| !s.is_empty()) {
        let i = m
            .generator_index(name.trim())
            .ok_or_else(|| anyhow!("unknown generator `{}`", name))?;
        mask |= 1 << i;
    }
    let p = PrimeIdeal::from_mask(mask);
    if !lattice.primes.contains(&p) {
        bail!("{{{}}} is not the zero-set of a prime", names);
    }
    Ok(p)
}

fn prime_label(p: &PrimeIdeal, m: &MonoidPresentation) -> String {
    let names: Vec<&str> = p
        .generator_indices()
        .into_iter()
        .map(|i| m.generator_names()[i].as_str())
        .collect();
    format!("({})", names.join(","))
}

fn parse_indices(s: &str) -> Result<BTreeSet<usize>> {
    s.split(',')
        .filter(|x| !x.is_empty())
        .map(|x| x.trim().parse::<usize>().map_err(|e| anyhow!("{}", e)))
        .collect()
}

/// Exit 2 when a verdict could change with a larger budget or window.
fn undecided(err: &anyhow::Error) -> bool {
    let s = format!("{:#}", err).to_lowercase();
    s.contains("undecided") || s.contains("within budget") || s.contains("budget exhausted")
        || s.contains("disagree between")
}

fn emit(format: Format, v: serde_json::Value, text: String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&v).unwrap()),
        Format::Text => println!("{}", text),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(if undecided(&e) { 2 } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let cfg = Config {
        budget: cli.budget,
        window: cli.window,
        cap: cli.cap,
    };
    match &cli.cmd {
        Cmd::Spec { file } => {
            let m = load_presentation(file)?;
            let lattice = spectrum::spec(&m, cfg.cap)?;
            if cli.dot {
                print!("{}", lattice.to_dot(&m));
                return Ok(0);
            }
            let masks: Vec<u64> = lattice.primes.iter().map(|p| p.zero_mask()).collect();
            emit(
                cli.format,
                json!({"primes": masks, "order": lattice.order}),
                format!(
                    "{} primes: {}",
                    lattice.primes.len(),
                    lattice
                        .primes
                        .iter()
                        .map(|p| prime_label(p, &m))
                        .collect::<Vec<_>>()
                        .join(" ")
                ),
            );
            Ok(0)
        }
        Cmd::Semilattice { file } => {
            let m = load_presentation(file)?;
            let lattice = spectrum::spec(&m, cfg.cap)?;
            let sl = spectrum::semilattice_elements(&m, cfg.cap, cfg.budget)?;
            let ok = sl.len() == lattice.primes.len();
            emit(
                cli.format,
                json!({
                    "semilattice_size": sl.len(),
                    "spec_size": lattice.primes.len(),
                    "isomorphic_counts": ok,
                }),
                format!(
                    "|M^sl| = {}, |Spec(M)| = {} ({})",
                    sl.len(),
                    lattice.primes.len(),
                    if ok { "equal" } else { "MISMATCH" }
                ),
            );
            Ok(if ok { 0 } else { 1 })
        }
        Cmd::Alpha { file, element } => {
            let m = load_presentation(file)?;
            let f = mj::element_from_str(element, &m)?;
            let lattice = spectrum::spec(&m, cfg.cap)?;
            let a = spectrum::alpha(&m, &f, &lattice, cfg.budget)?;
            emit(
                cli.format,
                json!({"alpha": a.zero_mask(), "label": prime_label(&a, &m)}),
                format!("alpha({}) = {}", m.format_element(&f), prime_label(&a, &m)),
            );
            Ok(0)
        }
        Cmd::Points { file } => {
            let m = load_presentation(file)?;
            let pts = msets::points(&m, &cfg)?;
            let mut rows = Vec::new();
            let mut lines = Vec::new();
            for p in &pts {
                let end = msets::endomorphism_monoid(p, &cfg)?;
                rows.push(json!({
                    "prime": p.prime.zero_mask(),
                    "label": p.label,
                    "carrier": p.carrier.describe(),
                    "end_generators": end.generator_names(),
                }));
                lines.push(format!(
                    "point {} carrier {} End gens [{}]",
                    p.label,
                    p.carrier.describe(),
                    end.generator_names().join(",")
                ));
            }
            emit(
                cli.format,
                json!({"count": pts.len(), "points": rows}),
                format!("{} points\n{}", pts.len(), lines.join("\n")),
            );
            Ok(0)
        }
        Cmd::Tensor { file, p, q } => {
            let m = load_presentation(file)?;
            let lattice = spectrum::spec(&m, cfg.cap)?;
            let pp = parse_prime(p, &m, &lattice)?;
            let qq = parse_prime(q, &m, &lattice)?;
            let a = MSet::at_prime(&m, &pp, cfg.budget)?;
            let b = MSet::at_prime(&m, &qq, cfg.budget)?;
            let t = msets::tensor(&a, &b, &cfg).map_err(anyhow::Error::from)?;
            let c = msets::classify_point(&t, &cfg).map_err(anyhow::Error::from)?;
            let meet = spectrum::prime_meet(&pp, &qq, &lattice)?;
            let ok = c.prime == meet;
            emit(
                cli.format,
                json!({
                    "tensor_prime": c.prime.zero_mask(),
                    "meet": meet.zero_mask(),
                    "agrees_with_meet": ok,
                }),
                format!(
                    "M_p (x) M_q classifies to {} (meet {} : {})",
                    prime_label(&c.prime, &m),
                    prime_label(&meet, &m),
                    if ok { "agree" } else { "DISAGREE" }
                ),
            );
            Ok(if ok { 0 } else { 1 })
        }
        Cmd::Classify { file, mset, prime } => {
            let m = load_presentation(file)?;
            let a = match (mset, prime) {
                (Some(path), _) => {
                    let v: serde_json::Value = serde_json::from_str(&read(path)?)?;
                    MSet::Finite(mj::finite_mset_from_value(&v, &m)?)
                }
                (None, Some(names)) => {
                    let lattice = spectrum::spec(&m, cfg.cap)?;
                    MSet::at_prime(&m, &parse_prime(names, &m, &lattice)?, cfg.budget)?
                }
                (None, None) => MSet::regular(&m, cfg.budget)?,
            };
            let c = msets::classify_point(&a, &cfg).map_err(anyhow::Error::from)?;
            emit(
                cli.format,
                json!({
                    "prime": c.prime.zero_mask(),
                    "label": prime_label(&c.prime, &m),
                    "source": format!("{:?}", c.source),
                }),
                format!(
                    "point {} with source {:?}",
                    prime_label(&c.prime, &m),
                    c.source
                ),
            );
            Ok(0)
        }
        Cmd::FilteredCheck { file, mset } => {
            let m = load_presentation(file)?;
            let v: serde_json::Value = serde_json::from_str(&read(mset)?)?;
            let a = MSet::Finite(mj::finite_mset_from_value(&v, &m)?);
            let verdict = msets::is_filtered(&a, &cfg);
            let (text, code) = match &verdict {
                msets::FilterVerdict::Filtered => ("filtered".to_string(), 0),
                msets::FilterVerdict::NotFiltered(r) => (format!("not filtered: {}", r), 1),
                msets::FilterVerdict::Unknown(r) => (format!("unknown: {}", r), 2),
            };
            emit(cli.format, json!({"verdict": text}), text.clone());
            Ok(code)
        }
        Cmd::Graded { action, file, f } => {
            let g = load_graded(file)?;
            match action.as_str() {
                "check" => {
                    let report = graded::check_proj_finiteness(&g);
                    emit(
                        cli.format,
                        json!({"ok": report.ok, "failures": report.failures}),
                        if report.ok {
                            "graded presentation satisfies the Proj finiteness conditions".into()
                        } else {
                            format!("failures: {}", report.failures.join("; "))
                        },
                    );
                    Ok(if report.ok { 0 } else { 1 })
                }
                "d0loc" => {
                    let name = f.as_deref().ok_or_else(|| anyhow!("--f is required"))?;
                    let idx = g
                        .base()
                        .generator_index(name)
                        .ok_or_else(|| anyhow!("unknown generator `{}`", name))?;
                    let chart = graded::d0_presentation(&g, idx)?;
                    emit(
                        cli.format,
                        mj::presentation_to_value(&chart.presentation),
                        format!(
                            "degree-0 localization at {}: generators [{}], {} relations",
                            name,
                            chart.presentation.generator_names().join(","),
                            chart.presentation.relations().len()
                        ),
                    );
                    Ok(0)
                }
                _ => unreachable!(),
            }
        }
        Cmd::Proj {
            file,
            sections,
            twist,
        } => {
            let g = load_graded(file)?;
            let x = schemes::proj(&g, cfg.cap, cfg.budget)?;
            let labels: Vec<&str> = x.points.iter().map(|p| p.label.as_str()).collect();
            let mut text = format!("{} points: {}", x.point_count(), labels.join(" "));
            let mut report = json!({"points": labels, "count": x.point_count()});
            if *sections {
                let s = schemes::global_sections_proj(
                    &g,
                    &GradedModule::Shift { n: *twist },
                    cfg.window,
                    cfg.budget,
                )?;
                text.push_str(&format!("\n|Gamma(O({}))| = {}", twist, s.len()));
                report["sections"] = json!(s.len());
            }
            emit(cli.format, report, text);
            Ok(0)
        }
        Cmd::Sheaf {
            file,
            twist,
            sections,
            line_bundle,
            counit,
        } => {
            let g = load_graded(file)?;
            let module = GradedModule::Shift { n: *twist };
            let mut report = serde_json::Map::new();
            let mut lines = Vec::new();
            let mut code = 0u8;
            if *sections || !(*line_bundle || *counit) {
                let s = schemes::global_sections_proj(&g, &module, cfg.window, cfg.budget)?;
                report.insert("sections".into(), json!(s.len()));
                lines.push(format!("|Gamma(O({}))| = {}", twist, s.len()));
            }
            if *line_bundle {
                let ok = schemes::line_bundle_check(
                    &g,
                    &schemes::QcSheaf::Graded(module),
                    cfg.window,
                    cfg.budget,
                )?;
                report.insert("line_bundle".into(), json!(ok));
                lines.push(format!("line bundle: {}", ok));
                if !ok {
                    code = 1;
                }
            }
            if *counit {
                let ok = schemes::counit_check(&g, &module, cfg.window, cfg.budget)?;
                report.insert("counit".into(), json!(ok));
                lines.push(format!("counit iso: {}", ok));
                if !ok {
                    code = 1;
                }
            }
            emit(
                cli.format,
                serde_json::Value::Object(report),
                lines.join("\n"),
            );
            Ok(code)
        }
        Cmd::Stalks { file } => {
            let x = scheme_from_file(file, &cfg)?;
            let pts = schemes::qc_points(&x, cfg.budget)?;
            let rows: Vec<serde_json::Value> = pts
                .iter()
                .map(|p| {
                    json!({
                        "point": p.label,
                        "stalk": mj::presentation_to_value(&p.stalk),
                    })
                })
                .collect();
            let lines: Vec<String> = pts
                .iter()
                .map(|p| {
                    format!(
                        "{} ~> <{}> with {} relations",
                        p.label,
                        p.stalk.generator_names().join(","),
                        p.stalk.relations().len()
                    )
                })
                .collect();
            emit(
                cli.format,
                json!({"count": pts.len(), "stalks": rows}),
                format!("{} stalk points\n{}", pts.len(), lines.join("\n")),
            );
            Ok(0)
        }
        Cmd::Reconstruct { file, verify } => {
            let x = scheme_from_file(file, &cfg)?;
            let pts = schemes::qc_points(&x, cfg.budget)?;
            let rebuilt = schemes::reconstruct(&pts, &x.leq);
            if *verify {
                let sk = schemes::skeleton(&x, cfg.budget)?;
                let ok = schemes::is_isomorphic(&rebuilt, &sk, cfg.budget);
                emit(
                    cli.format,
                    json!({"points": pts.len(), "round_trip": ok}),
                    format!(
                        "reconstructed {} points; round trip {}",
                        pts.len(),
                        if ok { "succeeds" } else { "FAILS" }
                    ),
                );
                return Ok(if ok { 0 } else { 1 });
            }
            emit(
                cli.format,
                json!({"points": pts.len()}),
                format!("reconstructed a scheme skeleton with {} points", pts.len()),
            );
            Ok(0)
        }
        Cmd::FreePoints {
            action,
            files,
            cofinite,
            finite,
        } => {
            let load = |i: usize| -> Result<free_points::SigmaFunction> {
                let path = files
                    .get(i)
                    .ok_or_else(|| anyhow!("`{}` needs {} file(s)", action, i + 1))?;
                Ok(mj::sigma_from_str(&read(path)?)?)
            };
            match action.as_str() {
                "eq" => {
                    let (f, g) = (load(0)?, load(1)?);
                    let eq = free_points::equivalent(&f, &g)?;
                    emit(
                        cli.format,
                        json!({"equivalent": eq}),
                        format!("equivalent: {}", eq),
                    );
                    Ok(if eq { 0 } else { 1 })
                }
                "add" => {
                    let sum = free_points::add(&load(0)?, &load(1)?)?;
                    emit(
                        cli.format,
                        mj::sigma_to_value(&sum),
                        serde_json::to_string(&mj::sigma_to_value(&sum)).unwrap(),
                    );
                    Ok(0)
                }
                "hidden" => {
                    let c = free_points::SigmaClass::of(&load(0)?);
                    let hidden = free_points::is_hidden(&c);
                    emit(
                        cli.format,
                        json!({"hidden": hidden}),
                        format!("hidden: {}", hidden),
                    );
                    Ok(0)
                }
                "gamma" => {
                    let t = match (cofinite, finite) {
                        (Some(s), None) => SubsetDesc::Cofinite(parse_indices(s)?),
                        (None, Some(s)) => SubsetDesc::Finite(parse_indices(s)?),
                        _ => bail!("`gamma` needs exactly one of --cofinite or --finite"),
                    };
                    let c = free_points::gamma_of_subset(Basis::Countable, &t)?;
                    let v = mj::sigma_to_value(c.representative());
                    emit(
                        cli.format,
                        v.clone(),
                        serde_json::to_string(&v).unwrap(),
                    );
                    Ok(0)
                }
                _ => unreachable!(),
            }
        }
        Cmd::CorpusRun { dir } => {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "json"))
                .collect();
            entries.sort();
            let mut worst = 0u8;
            for path in &entries {
                let name = path.file_name().unwrap().to_string_lossy().to_string();
                match corpus_entry(path, &cfg) {
                    Ok(line) => println!("ok   {}: {}", name, line),
                    Err(e) => {
                        let code = if undecided(&e) { 2 } else { 1 };
                        worst = worst.max(code);
                        println!("FAIL {}: {:#}", name, e);
                    }
                }
            }
            Ok(worst)
        }
    }
}

fn scheme_from_file(file: &Path, cfg: &Config) -> Result<schemes::MonoidScheme> {
    if is_graded_file(file)? {
        Ok(schemes::proj(&load_graded(file)?, cfg.cap, cfg.budget)?)
    } else {
        Ok(schemes::affine(&load_presentation(file)?, cfg.cap)?)
    }
}

/// One corpus entry: parse, enumerate Spec, compare with the semilattice,
/// and classify every prime localization back to its prime.
fn corpus_entry(path: &Path, cfg: &Config) -> Result<String> {
    let src = read(path)?;
    if is_graded_file(path)? {
        let g = mj::graded_from_str(&src)?;
        let x = schemes::proj(&g, cfg.cap, cfg.budget)?;
        return Ok(format!("graded, Proj has {} points", x.point_count()));
    }
    let m = mj::presentation_from_str(&src)?;
    let lattice = spectrum::spec(&m, cfg.cap)?;
    let sl = spectrum::semilattice_elements(&m, cfg.cap, cfg.budget)?;
    if sl.len() != lattice.primes.len() {
        bail!(
            "|M^sl| = {} but |Spec(M)| = {}",
            sl.len(),
            lattice.primes.len()
        );
    }
    for p in &lattice.primes {
        let a = MSet::at_prime(&m, p, cfg.budget)?;
        let c = msets::classify_point(&a, cfg).map_err(anyhow::Error::from)?;
        if c.prime != *p {
            bail!(
                "classify(M_p) = {:?} for p = {:?}",
                c.prime.zero_mask(),
                p.zero_mask()
            );
        }
    }
    Ok(format!(
        "{} primes, all localizations classify to their primes",
        lattice.primes.len()
    ))
}
