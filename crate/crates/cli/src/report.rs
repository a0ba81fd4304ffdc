//! Structured command results, rendered as text or as versioned JSON.

use std::fmt::Write as _;

use serde::Serialize;

/// Version tag carried by every JSON report.
pub const SCHEMA: &str = "itl-report/1";

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: Vec<String>,
    pub verdict: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<Entry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub items: Vec<ItemEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub artifact: Option<ArtifactEntry>,
    /// Broken internal invariants; a non-empty list exits with status 2.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub problems: Vec<String>,
    pub elapsed_ms: f64,
}

/// Outcome for one formula (or formula pair).
#[derive(Debug, Default, Serialize)]
pub struct Entry {
    pub formula: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other: Option<String>,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub world: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extension: Option<Vec<String>>,
    /// Values of `formula` and `other` at `world` for equivalence witnesses.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<(bool, bool)>,
    /// Witness model in the model text format.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub visited: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_form: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fully_pushed: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct FamilyReport {
    pub kind: String,
    pub depth: usize,
    /// The family in the `level i: (w1,w2) ...` text format.
    pub text: String,
    pub pairs: Vec<PairEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violations: Option<Vec<ViolationEntry>>,
}

#[derive(Debug, Serialize)]
pub struct PairEntry {
    pub left: String,
    pub right: String,
    pub deepest_level: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct ViolationEntry {
    pub clause: String,
    pub level: usize,
    pub left: String,
    pub right: String,
    pub description: String,
}

#[derive(Debug, Serialize)]
pub struct ItemEntry {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub details: Vec<String>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct ArtifactEntry {
    pub name: String,
    pub kind: String,
    pub provenance: String,
    /// Model text or formula text, parseable by the corresponding reader.
    pub text: String,
}

impl Report {
    pub fn new(command: Vec<String>, verdict: impl Into<String>) -> Report {
        Report {
            schema: SCHEMA,
            command,
            verdict: verdict.into(),
            entries: Vec::new(),
            family: None,
            items: Vec::new(),
            artifact: None,
            problems: Vec::new(),
            elapsed_ms: 0.0,
        }
    }

    /// Overall verdict for a batch: the single verdict, or per-verdict counts.
    pub fn summarize_entries(&mut self) {
        if let [only] = self.entries.as_slice() {
            self.verdict = only.verdict.clone();
            return;
        }
        let mut counts: Vec<(String, usize)> = Vec::new();
        for e in &self.entries {
            match counts.iter_mut().find(|(v, _)| *v == e.verdict) {
                Some((_, n)) => *n += 1,
                None => counts.push((e.verdict.clone(), 1)),
            }
        }
        self.verdict = counts.iter().map(|(v, n)| format!("{n} {v}")).collect::<Vec<_>>().join(", ");
    }

    pub fn exit_code(&self) -> u8 {
        let failed_item = self.items.iter().any(|i| !i.passed);
        if self.problems.is_empty() && !failed_item {
            0
        } else {
            2
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verdict: {}", self.verdict);
        for e in &self.entries {
            render_entry(&mut out, e, self.entries.len() > 1);
        }
        if let Some(fam) = &self.family {
            let _ = writeln!(out, "kind: {}  depth: {}", fam.kind, fam.depth);
            out.push_str(&fam.text);
            for p in &fam.pairs {
                let level = p.deepest_level.map_or("none".to_string(), |l| l.to_string());
                let _ = writeln!(out, "pair ({},{}): deepest level {level}", p.left, p.right);
            }
            if let Some(vs) = &fam.violations {
                let _ = writeln!(out, "violations: {}", vs.len());
                for v in vs {
                    let _ = writeln!(out, "  {}", v.description);
                }
            }
        }
        for (n, item) in self.items.iter().enumerate() {
            let status = if item.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status} [{:>2}] {:<26} {} ({:.0} ms)", n + 1, item.id, item.title, item.elapsed_ms);
            if !item.passed {
                for d in &item.details {
                    let _ = writeln!(out, "         {d}");
                }
            }
        }
        if let Some(a) = &self.artifact {
            let _ = writeln!(out, "# {} ({}): {}", a.name, a.kind, a.provenance);
            out.push_str(&a.text);
            if !a.text.ends_with('\n') {
                out.push('\n');
            }
        }
        for p in &self.problems {
            let _ = writeln!(out, "INVARIANT FAILURE: {p}");
        }
        out
    }
}

fn render_entry(out: &mut String, e: &Entry, batch: bool) {
    let indent = if batch { "  " } else { "" };
    if batch {
        let _ = writeln!(out, "- {}: {}", e.formula, e.verdict);
    } else {
        let _ = writeln!(out, "formula: {}", e.formula);
    }
    if let Some(o) = &e.other {
        let _ = writeln!(out, "{indent}other: {o}");
    }
    if let Some(nf) = &e.normal_form {
        let _ = writeln!(out, "{indent}normal form: {nf}");
    }
    if let Some(full) = e.fully_pushed {
        let _ = writeln!(out, "{indent}fully pushed: {full}");
    }
    if let Some(w) = &e.world {
        let _ = writeln!(out, "{indent}world: {w}");
    }
    if let Some((a, b)) = e.values {
        let _ = writeln!(out, "{indent}values: {a} vs {b}");
    }
    if let Some(ext) = &e.extension {
        let _ = writeln!(out, "{indent}extension: {{{}}}", ext.join(", "));
    }
    if let Some(v) = e.visited {
        let _ = writeln!(out, "{indent}visited: {v}");
    }
    if let Some(m) = &e.model {
        let _ = writeln!(out, "{indent}model:");
        for line in m.lines() {
            let _ = writeln!(out, "{indent}  {line}");
        }
    }
}
