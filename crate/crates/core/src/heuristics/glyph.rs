//! Hazard-label style badges: a diamond pictogram carrying the glyph code's
//! initials next to the rule statement.

use std::fmt::Write;

use quick_xml::escape::escape;
use serde::{Deserialize, Serialize};

use super::{rules_by_id, AuditReport, HeuristicRule, HeuristicsError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlyphEntry {
    pub glyph_code: String,
    pub rule_id: String,
    /// The rule statement.
    pub label: String,
    pub svg: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlyphManifest {
    pub subject: String,
    pub entries: Vec<GlyphEntry>,
}

impl GlyphManifest {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// `<glyph_code>.svg` for every entry.
    pub fn files(&self) -> impl Iterator<Item = (String, &str)> {
        self.entries
            .iter()
            .map(|e| (format!("{}.svg", e.glyph_code), e.svg.as_str()))
    }

    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let subject = if self.subject.is_empty() { "(unnamed)" } else { &self.subject };
        writeln!(out, "glyph manifest for {subject}: {} violation(s)", self.entries.len()).unwrap();
        if self.entries.is_empty() {
            return out;
        }
        let width = self.entries.iter().map(|e| e.glyph_code.len()).max().unwrap_or(0).max(5);
        writeln!(out, "{:<width$}  {:<4}  statement", "glyph", "rule").unwrap();
        for e in &self.entries {
            writeln!(out, "{:<width$}  {:<4}  {}", e.glyph_code, e.rule_id, e.label).unwrap();
        }
        out
    }
}

/// One manifest entry per violation, ordered by glyph code.
pub fn emit_glyph_manifest(report: &AuditReport, rules: &[HeuristicRule]) -> Result<GlyphManifest, HeuristicsError> {
    let index = rules_by_id(rules);
    let mut entries = report
        .violations
        .iter()
        .map(|v| {
            let rule = index
                .get(v.rule_id.as_str())
                .ok_or_else(|| HeuristicsError::RuleMismatch(v.rule_id.clone()))?;
            Ok(GlyphEntry {
                glyph_code: rule.glyph_code.clone(),
                rule_id: rule.id.clone(),
                label: rule.statement.clone(),
                svg: render_badge(&rule.glyph_code, &rule.statement),
            })
        })
        .collect::<Result<Vec<_>, HeuristicsError>>()?;
    entries.sort_by(|a, b| a.glyph_code.cmp(&b.glyph_code).then_with(|| a.rule_id.cmp(&b.rule_id)));
    Ok(GlyphManifest {
        subject: report.subject.clone(),
        entries,
    })
}

fn initials(code: &str) -> String {
    let letters: String = code
        .split(|c: char| !c.is_alphanumeric())
        .filter_map(|part| part.chars().next())
        .take(3)
        .collect();
    letters.to_uppercase()
}

fn wrap(text: &str, width: usize) -> Vec<String> {
    let mut lines = Vec::new();
    let mut line = String::new();
    for word in text.split_whitespace() {
        if !line.is_empty() && line.chars().count() + 1 + word.chars().count() > width {
            lines.push(std::mem::take(&mut line));
        }
        if !line.is_empty() {
            line.push(' ');
        }
        line.push_str(word);
    }
    if !line.is_empty() {
        lines.push(line);
    }
    lines
}

/// Self-contained SVG badge for a glyph code and its label.
pub fn render_badge(glyph_code: &str, label: &str) -> String {
    let lines = wrap(label, 38);
    let height = 96.max(40 + 18 * lines.len());
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="360" height="{height}" viewBox="0 0 360 {height}" role="img" aria-label="{}">"#,
        escape(glyph_code)
    )
    .unwrap();
    writeln!(svg, "  <title>{}</title>", escape(label)).unwrap();
    writeln!(svg, r##"  <rect x="0.5" y="0.5" width="359" height="{}" rx="6" fill="#ffffff" stroke="#222222"/>"##, height - 1).unwrap();
    writeln!(svg, r##"  <polygon points="48,8 88,48 48,88 8,48" fill="#ffffff" stroke="#c8102e" stroke-width="6"/>"##).unwrap();
    writeln!(
        svg,
        r##"  <text x="48" y="55" text-anchor="middle" font-family="sans-serif" font-size="20" font-weight="bold" fill="#222222">{}</text>"##,
        escape(&initials(glyph_code))
    )
    .unwrap();
    writeln!(
        svg,
        r##"  <text x="104" y="24" font-family="monospace" font-size="12" fill="#c8102e">{}</text>"##,
        escape(glyph_code)
    )
    .unwrap();
    for (i, line) in lines.iter().enumerate() {
        writeln!(
            svg,
            r##"  <text x="104" y="{}" font-family="sans-serif" font-size="13" fill="#222222">{}</text>"##,
            44 + 18 * i,
            escape(line.as_str())
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
