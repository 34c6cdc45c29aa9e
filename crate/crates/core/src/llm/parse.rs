//! Extraction of title lists from free-text replies.

use std::sync::OnceLock;

use regex::Regex;

fn numbered() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*\d+[.)]\s*(.+)$").unwrap())
}

fn bulleted() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*[-*]\s*(.+)$").unwrap())
}

fn trailing_rating() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // " - 9/10" style score annotations
    RE.get_or_init(|| Regex::new(r"\s+[-\u{2013}\u{2014}]\s*\d+(?:\.\d+)?\s*/\s*\d+(?:\.\d+)?\s*$").unwrap())
}

fn trailing_score() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // " (score: ...)" annotations
    RE.get_or_init(|| Regex::new(r"\s*\(score:[^)]*\)\s*$").unwrap())
}

fn strip_annotations(entry: &str) -> String {
    let stripped = trailing_rating().replace(entry, "");
    let stripped = trailing_score().replace(&stripped, "");
    stripped.trim().to_string()
}

/// Extracts list entries in order: numbered lines (`1. Title` / `2) Title`)
/// take priority; when none exist, bullet lines (`- Title` / `* Title`) are
/// used. Trailing rating/score annotations are stripped. Prose without any
/// list yields an empty vec, which is a valid "nothing parsed" signal.
pub fn parse_recommendations(raw: &str) -> Vec<String> {
    let collect = |re: &Regex| {
        raw.lines()
            .filter_map(|line| re.captures(line))
            .map(|c| strip_annotations(c.get(1).unwrap().as_str()))
            .filter(|t| !t.is_empty())
            .collect::<Vec<_>>()
    };
    let titles = collect(numbered());
    if !titles.is_empty() {
        return titles;
    }
    collect(bulleted())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbered_list_parses_in_order() {
        let raw = "1. The Matrix (1999)\n2. Inception (2010)";
        assert_eq!(
            parse_recommendations(raw),
            vec!["The Matrix (1999)", "Inception (2010)"]
        );
    }

    #[test]
    fn bullet_list_parses_when_no_numbers() {
        assert_eq!(parse_recommendations("- Dune\n- Foundation"), vec!["Dune", "Foundation"]);
        assert_eq!(parse_recommendations("* Dune\n* Foundation"), vec!["Dune", "Foundation"]);
    }

    #[test]
    fn prose_yields_empty() {
        let raw = "I would be happy to recommend items, but I need more context.";
        assert!(parse_recommendations(raw).is_empty());
    }

    #[test]
    fn numbered_lines_take_priority_over_bullets() {
        let raw = "Here you go:\n- preamble bullet\n1. Alien (1979)\n2. Arrival (2016)";
        assert_eq!(parse_recommendations(raw), vec!["Alien (1979)", "Arrival (2016)"]);
    }

    #[test]
    fn paren_numbering_and_indentation_are_accepted() {
        let raw = "  1) Alien (1979)\n  2) Arrival (2016)";
        assert_eq!(parse_recommendations(raw), vec!["Alien (1979)", "Arrival (2016)"]);
    }

    #[test]
    fn trailing_annotations_are_stripped() {
        let raw = "1. The Matrix (1999) - 9/10\n2. Inception (2010) (score: 0.93)";
        assert_eq!(
            parse_recommendations(raw),
            vec!["The Matrix (1999)", "Inception (2010)"]
        );
    }

    #[test]
    fn titles_with_interior_slashes_survive() {
        let raw = "1. Face/Off (1997)\n2. 9/11 Documentary";
        assert_eq!(parse_recommendations(raw), vec!["Face/Off (1997)", "9/11 Documentary"]);
    }
}
