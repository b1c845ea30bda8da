use std::fmt::Write;

use crate::demailly::{LemmaSummary, Verdict};
use crate::exact::format_ratio;

/// One table row: a verdict plus the id of its stored certificate, if any.
#[derive(Debug, Clone)]
pub struct ReportRow<'a> {
    pub verdict: &'a Verdict,
    pub certificate: Option<String>,
}

fn cell(text: &str) -> String {
    text.replace('|', "\\|")
}

/// Markdown tables sorted by `(N, s)`, then totals and the lemma checks.
pub fn render_markdown(title: &str, rows: &[ReportRow<'_>], lemmas: &[LemmaSummary]) -> String {
    let mut rows: Vec<&ReportRow<'_>> = rows.iter().collect();
    rows.sort_by_key(|r| (r.verdict.n, r.verdict.s));
    let mut out = String::new();
    writeln!(out, "# {title}\n").unwrap();
    if !rows.is_empty() || lemmas.is_empty() {
        out.push_str("| N | s | ell | required | achieved | status | r | certificate | case |\n");
        out.push_str("|---|---|---|---|---|---|---|---|---|\n");
    }
    let (mut proven, mut unproven, mut discrepancy) = (0, 0, 0);
    for row in &rows {
        let v = row.verdict;
        match v.status.to_string().as_str() {
            "PROVEN" => proven += 1,
            "UNPROVEN" => unproven += 1,
            _ => discrepancy += 1,
        }
        let mut case = v.achieved.route();
        for note in &v.notes {
            case.push_str("; ");
            case.push_str(note);
        }
        writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            v.n,
            v.s,
            v.ell,
            format_ratio(&v.required),
            format_ratio(&v.achieved.bound),
            v.status,
            v.containment_r.as_ref().map_or("-".to_string(), |r| r.to_string()),
            row.certificate.as_deref().unwrap_or("-"),
            cell(&case),
        )
        .unwrap();
    }
    if !rows.is_empty() {
        writeln!(out, "\nTotals: {proven} PROVEN, {unproven} UNPROVEN, {discrepancy} DISCREPANCY").unwrap();
    }
    if !lemmas.is_empty() {
        if !rows.is_empty() {
            out.push('\n');
        }
        out.push_str("| lemma | checked | range failures | boundary fails | equivalence mismatches |\n");
        out.push_str("|---|---|---|---|---|\n");
        for l in lemmas {
            let boundary = l.boundary_fails.map_or("-".to_string(), |b| b.to_string());
            writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                l.lemma.name(),
                l.checked,
                l.range_failures.len(),
                boundary,
                l.equivalence_mismatches.len()
            )
            .unwrap();
        }
    }
    out
}
