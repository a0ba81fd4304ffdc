use anyhow::{anyhow, bail, Context, Result};
use itl_core::bisim::{max_family, parse_family, serialize_family, verify_family, BisimKind};
use itl_core::checker::{counter_world, extension};
use itl_core::countermodels::{artifact, Payload};
use itl_core::formula::{next_normal_form, parse_formula};
use itl_core::model::{parse_model, serialize_model};
use itl_core::reproduce::{item, ITEMS};
use itl_core::search::{check_equivalence, find_countermodel, Counterexample, SearchBounds, SearchResult};
use itl_core::{satisfies_at, Formula, FrameClass, Model, WorldSet};

use crate::input::{load_formula, load_formulas, load_model};
use crate::report::{ArtifactEntry, Entry, FamilyReport, ItemEntry, PairEntry, Report, ViolationEntry};
use crate::{ArtifactCommand, BoundsArgs, Command};

pub fn run(command: &Command, echo: Vec<String>) -> Result<Report> {
    match command {
        Command::Check { model, world, formula } => check(echo, model, world, formula),
        Command::Valid { model, formulas } => {
            let m = load_model(model)?;
            let fs = load_formulas(formulas.formula.as_deref(), formulas.formula_file.as_deref())?;
            Ok(valid(echo, &m, &fs))
        }
        Command::Countermodel { get: Some(ArtifactCommand::Get { name }), .. } => get_artifact(echo, name),
        Command::Countermodel { get: None, formulas, bounds } => {
            let fs = load_formulas(formulas.formula.as_deref(), formulas.formula_file.as_deref())?;
            countermodel(echo, &fs, bounds)
        }
        Command::Equiv { first, second, bounds } => equiv(echo, &load_formula(first)?, &load_formula(second)?, bounds),
        Command::Bisim { left, right, kind, depth, family, pairs } => {
            let (l, r) = (load_model(left)?, load_model(right)?);
            bisim(echo, &l, &r, *kind, *depth, family.as_deref(), pairs)
        }
        Command::NormalForm { formulas, verify, max_worlds } => {
            let fs = load_formulas(formulas.formula.as_deref(), formulas.formula_file.as_deref())?;
            normal_form(echo, &fs, *verify, *max_worlds)
        }
        Command::Paper { only, seed } => paper(echo, only, *seed),
    }
}

fn names(m: &Model, set: &WorldSet) -> Vec<String> {
    m.set_names(set).into_iter().map(str::to_string).collect()
}

fn check(echo: Vec<String>, model: &str, world: &str, formula: &str) -> Result<Report> {
    let m = load_model(model)?;
    let f = load_formula(formula)?;
    let holds = satisfies_at(&m, world, &f).with_context(|| format!("checking at `{world}`"))?;
    let mut report = Report::new(echo, holds.to_string());
    report.entries.push(Entry {
        formula: f.to_string(),
        verdict: holds.to_string(),
        world: Some(world.to_string()),
        extension: Some(names(&m, &extension(&m, &f))),
        ..Entry::default()
    });
    Ok(report)
}

fn valid(echo: Vec<String>, m: &Model, formulas: &[Formula]) -> Report {
    let mut report = Report::new(echo, "");
    for f in formulas {
        let counter = counter_world(m, f);
        report.entries.push(Entry {
            formula: f.to_string(),
            verdict: if counter.is_some() { "invalid" } else { "valid" }.to_string(),
            world: counter.map(|w| m.name(w).to_string()),
            extension: Some(names(m, &extension(m, f))),
            ..Entry::default()
        });
    }
    report.summarize_entries();
    report
}

fn bounds_for(args: &BoundsArgs, formulas: &[&Formula]) -> Result<SearchBounds> {
    let mut bounds = SearchBounds::for_formulas(args.class, args.max_worlds, formulas.iter().copied());
    if let Some(atoms) = &args.atoms {
        for f in formulas {
            if let Some(missing) = f.atoms().into_iter().find(|a| !atoms.contains(a)) {
                bail!("atom `{missing}` of `{f}` is missing from --atoms");
            }
        }
        bounds.atoms = atoms.clone();
    }
    bounds.limit = args.limit;
    bounds.seed = args.seed;
    bounds.validate().context("invalid search bounds")?;
    Ok(bounds)
}

/// Serializes the witness and re-reads it, so the emitted text is what gets re-checked.
fn reparsed_witness(w: &Counterexample) -> Result<(String, Model), String> {
    let text = serialize_model(&w.model);
    let back = parse_model(&text).map_err(|e| format!("witness does not re-parse: {e}"))?;
    Ok((text, back))
}

fn search_entry(f: &Formula, result: &SearchResult) -> Entry {
    Entry {
        formula: f.to_string(),
        verdict: result.verdict.to_string(),
        visited: Some(result.visited),
        ..Entry::default()
    }
}

fn countermodel(echo: Vec<String>, formulas: &[Formula], args: &BoundsArgs) -> Result<Report> {
    let bounds = bounds_for(args, &formulas.iter().collect::<Vec<_>>())?;
    let mut report = Report::new(echo, "");
    for f in formulas {
        let result = find_countermodel(f, &bounds);
        let mut entry = search_entry(f, &result);
        if let Some(w) = &result.witness {
            let world = w.model.name(w.world).to_string();
            match reparsed_witness(w) {
                Ok((text, back)) => {
                    if satisfies_at(&back, &world, f) != Ok(false) {
                        report.problems.push(format!("witness for `{f}` does not falsify it at {world}"));
                    }
                    entry.model = Some(text);
                }
                Err(p) => report.problems.push(p),
            }
            entry.world = Some(world);
        }
        report.entries.push(entry);
    }
    report.summarize_entries();
    Ok(report)
}

fn equiv(echo: Vec<String>, f: &Formula, g: &Formula, args: &BoundsArgs) -> Result<Report> {
    let bounds = bounds_for(args, &[f, g])?;
    let result = check_equivalence(f, g, &bounds);
    let mut report = Report::new(echo, result.verdict.to_string());
    let mut entry = search_entry(f, &result);
    entry.other = Some(g.to_string());
    if let Some(w) = &result.witness {
        let world = w.model.name(w.world).to_string();
        match reparsed_witness(w) {
            Ok((text, back)) => {
                let values = (satisfies_at(&back, &world, f), satisfies_at(&back, &world, g));
                match values {
                    (Ok(a), Ok(b)) if a != b => entry.values = Some((a, b)),
                    _ => report.problems.push(format!("witness does not separate the formulas at {world}")),
                }
                entry.model = Some(text);
            }
            Err(p) => report.problems.push(p),
        }
        entry.world = Some(world);
    }
    report.entries.push(entry);
    Ok(report)
}

fn bisim(
    echo: Vec<String>,
    left: &Model,
    right: &Model,
    kind: BisimKind,
    depth: usize,
    family_file: Option<&str>,
    queried: &[(String, String)],
) -> Result<Report> {
    let mut problems = Vec::new();
    let (fam, violations) = match family_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading `{path}`"))?;
            let fam = parse_family(&text, left, right).with_context(|| format!("parsing family `{path}`"))?;
            let found = verify_family(kind, &fam)?;
            if let Some(v) = found.iter().find(|v| !v.replays(&fam)) {
                problems.push(format!("reported violation does not replay: {}", v.describe(left, right)));
            }
            (fam, Some(found))
        }
        None => {
            let fam = max_family(kind, left, right, depth);
            if !verify_family(kind, &fam)?.is_empty() {
                problems.push("computed family violates its own clauses".to_string());
            }
            (fam, None)
        }
    };
    let pairs = if queried.is_empty() {
        fam.chain[0].pairs().collect::<Vec<_>>()
    } else {
        queried
            .iter()
            .map(|(a, b)| fam.pair_by_name(a, b).ok_or_else(|| anyhow!("unknown world pair ({a},{b})")))
            .collect::<Result<_>>()?
    };
    let verdict = match &violations {
        None => "computed",
        Some(v) if v.is_empty() => "verified",
        Some(_) => "violated",
    };
    let mut report = Report::new(echo, verdict);
    report.problems = problems;
    report.family = Some(FamilyReport {
        kind: kind.to_string(),
        depth: fam.depth(),
        text: serialize_family(&fam),
        pairs: pairs
            .into_iter()
            .map(|p| PairEntry {
                left: left.name(p.0).to_string(),
                right: right.name(p.1).to_string(),
                deepest_level: fam.deepest_level(p),
            })
            .collect(),
        violations: violations.map(|vs| {
            vs.iter()
                .map(|v| ViolationEntry {
                    clause: v.clause.name().to_string(),
                    level: v.level,
                    left: left.name(v.pair.0).to_string(),
                    right: right.name(v.pair.1).to_string(),
                    description: v.describe(left, right),
                })
                .collect()
        }),
    });
    Ok(report)
}

fn normal_form(echo: Vec<String>, formulas: &[Formula], verify: bool, max_worlds: usize) -> Result<Report> {
    let mut report = Report::new(echo, "");
    for f in formulas {
        let nf = next_normal_form(f);
        let mut entry = Entry {
            formula: f.to_string(),
            verdict: if nf == *f { "unchanged" } else { "rewritten" }.to_string(),
            normal_form: Some(nf.to_string()),
            fully_pushed: Some(nf.is_next_normal()),
            ..Entry::default()
        };
        if verify {
            let bounds = SearchBounds::for_formulas(FrameClass::Persistent, max_worlds, [f]);
            bounds.validate().context("invalid search bounds")?;
            let result = check_equivalence(f, &nf, &bounds);
            if let Some(w) = &result.witness {
                report
                    .problems
                    .push(format!("`{f}` and its normal form differ at {}", w.model.name(w.world)));
                entry.world = Some(w.model.name(w.world).to_string());
                entry.model = Some(serialize_model(&w.model));
            }
            entry.verdict = result.verdict.to_string();
            entry.visited = Some(result.visited);
        }
        report.entries.push(entry);
    }
    report.summarize_entries();
    Ok(report)
}

fn get_artifact(echo: Vec<String>, name: &str) -> Result<Report> {
    let lookup = name.strip_prefix('@').unwrap_or(name);
    let a = artifact(lookup).ok_or_else(|| {
        anyhow!(
            "unknown artifact `{lookup}` (known: {})",
            itl_core::countermodels::ARTIFACT_NAMES.join(", ")
        )
    })?;
    let text = match &a.payload {
        Payload::Model(m) => serialize_model(m),
        Payload::Formula(f) => f.to_string(),
    };
    let mut report = Report::new(echo, "artifact");
    if let Payload::Formula(f) = &a.payload {
        if parse_formula(&text).as_ref() != Ok(f) {
            report.problems.push(format!("printed formula `{text}` does not re-parse to itself"));
        }
    }
    report.artifact = Some(ArtifactEntry {
        name: a.name.clone(),
        kind: a.kind().to_string(),
        provenance: a.provenance.clone(),
        text,
    });
    Ok(report)
}

fn paper(echo: Vec<String>, only: &[String], seed: u64) -> Result<Report> {
    let selected: Vec<_> = if only.is_empty() {
        ITEMS.iter().collect()
    } else {
        only.iter()
            .map(|id| {
                item(id).ok_or_else(|| {
                    let ids: Vec<_> = ITEMS.iter().map(|i| i.id).collect();
                    anyhow!("unknown item `{id}` (known: {})", ids.join(", "))
                })
            })
            .collect::<Result<_>>()?
    };
    let mut report = Report::new(echo, "");
    for it in selected {
        let r = it.run(seed);
        report.items.push(ItemEntry {
            id: r.id.to_string(),
            title: r.title.to_string(),
            passed: r.outcome.passed,
            details: r.outcome.details,
            elapsed_ms: r.elapsed.as_secs_f64() * 1e3,
        });
    }
    let failed = report.items.iter().filter(|i| !i.passed).count();
    report.verdict = if failed == 0 { "pass".into() } else { format!("fail ({failed} of {})", report.items.len()) };
    Ok(report)
}
