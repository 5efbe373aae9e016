//! Text format:
//!
//! ```text
//! # comment
//! edges: a b
//! a -> a a b
//! b -> a b
//! ```
//!
//! A letter is an edge name or `~name` for reversed traversal. An optional
//! `vertices:` line may name the single branch point; more than one vertex
//! is rejected because only elementary presentations are supported.

use std::fmt;

use super::{GraphPresentation, Letter, Sign, WrappingRule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UndeclaredEdge(String),
    EmptyWord(String),
    DuplicateEdge(String),
    DuplicateRule(String),
    MissingRule(String),
    MissingEdges,
    MultipleVertices(usize),
}

/// Parse failure with a 1-based line/column position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::UndeclaredEdge(e) => {
                write!(f, "letter refers to undeclared edge `{e}`")
            }
            ParseErrorKind::EmptyWord(e) => write!(f, "edge `{e}` has an empty word"),
            ParseErrorKind::DuplicateEdge(e) => write!(f, "edge `{e}` declared twice"),
            ParseErrorKind::DuplicateRule(e) => write!(f, "second rule line for edge `{e}`"),
            ParseErrorKind::MissingRule(e) => write!(f, "no rule line for edge `{e}`"),
            ParseErrorKind::MissingEdges => write!(f, "missing `edges:` declaration"),
            ParseErrorKind::MultipleVertices(k) => write!(
                f,
                "{k} vertices declared; only elementary presentations (a wedge of circles \
                 with one fixed vertex) are accepted. Some power of the solenoid map admits \
                 such a presentation; pass that one instead"
            ),
        }
    }
}

impl std::error::Error for ParseError {}

fn err(line: usize, column: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, column, kind }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Whitespace-separated tokens with their 1-based column.
fn tokens(s: &str, offset: usize) -> impl Iterator<Item = (usize, &str)> {
    s.split_whitespace().map(move |tok| {
        let start = tok.as_ptr() as usize - s.as_ptr() as usize;
        (offset + start + 1, tok)
    })
}

pub fn parse_presentation(text: &str) -> Result<GraphPresentation, ParseError> {
    let mut edges: Option<(usize, Vec<String>)> = None;
    let mut rules: Vec<Option<(usize, Vec<(usize, String)>)>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - trimmed.len();

        if let Some(rest) = trimmed.strip_prefix("edges:") {
            if edges.is_some() {
                return Err(err(
                    lineno,
                    indent + 1,
                    ParseErrorKind::Syntax("second `edges:` line".into()),
                ));
            }
            let base = indent + "edges:".len();
            let mut names: Vec<String> = Vec::new();
            for (col, tok) in tokens(rest, base) {
                if !is_identifier(tok) {
                    return Err(err(
                        lineno,
                        col,
                        ParseErrorKind::Syntax(format!("invalid edge name `{tok}`")),
                    ));
                }
                if names.iter().any(|n| n == tok) {
                    return Err(err(lineno, col, ParseErrorKind::DuplicateEdge(tok.into())));
                }
                names.push(tok.to_string());
            }
            if names.is_empty() {
                return Err(err(
                    lineno,
                    base + 1,
                    ParseErrorKind::Syntax("no edges declared".into()),
                ));
            }
            rules = vec![None; names.len()];
            edges = Some((lineno, names));
            continue;
        }

        if let Some(rest) = trimmed.strip_prefix("vertices:") {
            let base = indent + "vertices:".len();
            let verts: Vec<(usize, &str)> = tokens(rest, base).collect();
            if let Some(&(col, tok)) = verts.iter().find(|(_, t)| !is_identifier(t)) {
                return Err(err(
                    lineno,
                    col,
                    ParseErrorKind::Syntax(format!("invalid vertex name `{tok}`")),
                ));
            }
            if verts.len() > 1 {
                return Err(err(
                    lineno,
                    verts[1].0,
                    ParseErrorKind::MultipleVertices(verts.len()),
                ));
            }
            continue;
        }

        let Some((_, names)) = edges.as_ref() else {
            return Err(err(lineno, indent + 1, ParseErrorKind::MissingEdges));
        };
        let Some(arrow) = trimmed.find("->") else {
            return Err(err(
                lineno,
                indent + 1,
                ParseErrorKind::Syntax("expected `<edge> -> <word>`".into()),
            ));
        };
        let head = trimmed[..arrow].trim();
        let head_col = indent + 1;
        if !is_identifier(head) {
            return Err(err(
                lineno,
                head_col,
                ParseErrorKind::Syntax(format!("invalid edge name `{head}`")),
            ));
        }
        let Some(edge) = names.iter().position(|n| n == head) else {
            return Err(err(
                lineno,
                head_col,
                ParseErrorKind::UndeclaredEdge(head.into()),
            ));
        };
        if rules[edge].is_some() {
            return Err(err(
                lineno,
                head_col,
                ParseErrorKind::DuplicateRule(head.into()),
            ));
        }
        let body_offset = indent + arrow + 2;
        let letters: Vec<(usize, String)> = tokens(&trimmed[arrow + 2..], body_offset)
            .map(|(c, t)| (c, t.to_string()))
            .collect();
        if letters.is_empty() {
            return Err(err(
                lineno,
                body_offset + 1,
                ParseErrorKind::EmptyWord(head.into()),
            ));
        }
        rules[edge] = Some((lineno, letters));
    }

    let Some((edges_line, names)) = edges else {
        return Err(err(1, 1, ParseErrorKind::MissingEdges));
    };

    let mut words = Vec::with_capacity(names.len());
    for (edge, rule) in rules.into_iter().enumerate() {
        let Some((lineno, letters)) = rule else {
            return Err(err(
                edges_line,
                1,
                ParseErrorKind::MissingRule(names[edge].clone()),
            ));
        };
        let mut word = Vec::with_capacity(letters.len());
        for (col, tok) in letters {
            let (sign, bare) = match tok.strip_prefix('~') {
                Some(rest) => (Sign::Minus, rest),
                None => (Sign::Plus, tok.as_str()),
            };
            if !is_identifier(bare) {
                return Err(err(
                    lineno,
                    col,
                    ParseErrorKind::Syntax(format!("invalid letter `{tok}`")),
                ));
            }
            let Some(target) = names.iter().position(|n| n == bare) else {
                return Err(err(
                    lineno,
                    col,
                    ParseErrorKind::UndeclaredEdge(bare.into()),
                ));
            };
            word.push(Letter::new(target, sign));
        }
        words.push(word);
    }

    let rule = WrappingRule::new(words).expect("words validated during parsing");
    Ok(GraphPresentation::new(names, rule).expect("edges validated during parsing"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_two_edge_example() {
        let p = parse_presentation("edges: a b\na -> a a b\nb -> a b\n").unwrap();
        assert_eq!(p.edges(), ["a", "b"]);
        assert_eq!(p.format_word(p.rule().word(0)), "a a b");
        assert_eq!(p.format_word(p.rule().word(1)), "a b");
    }

    #[test]
    fn identity_and_reversed_letters() {
        let p = parse_presentation("edges: a\na -> a").unwrap();
        assert_eq!(p.rule().word(0), [Letter::pos(0)]);

        let p = parse_presentation("edges: a\na -> a ~a").unwrap();
        assert_eq!(
            p.rule().word(0),
            [Letter::new(0, Sign::Plus), Letter::new(0, Sign::Minus)]
        );
    }

    #[test]
    fn comments_blank_lines_and_rule_order() {
        let src = "# header\n\nedges: x_1 y\n  # indented comment\ny -> x_1\nx_1 -> y x_1\n";
        let p = parse_presentation(src).unwrap();
        assert_eq!(p.edges(), ["x_1", "y"]);
        assert_eq!(p.format_word(p.rule().word(0)), "y x_1");
    }

    fn kind(src: &str) -> (usize, usize, ParseErrorKind) {
        let e = parse_presentation(src).unwrap_err();
        (e.line, e.column, e.kind)
    }

    #[test]
    fn error_positions() {
        assert_eq!(
            kind("edges: a b\na -> a c\nb -> a"),
            (2, 8, ParseErrorKind::UndeclaredEdge("c".into()))
        );
        assert_eq!(
            kind("edges: a a\n"),
            (1, 10, ParseErrorKind::DuplicateEdge("a".into()))
        );
        assert_eq!(
            kind("edges: a\na ->\n"),
            (2, 5, ParseErrorKind::EmptyWord("a".into()))
        );
        assert_eq!(
            kind("edges: a\na -> a\na -> a a\n"),
            (3, 1, ParseErrorKind::DuplicateRule("a".into()))
        );
        assert_eq!(
            kind("edges: a b\na -> a\n"),
            (1, 1, ParseErrorKind::MissingRule("b".into()))
        );
        assert_eq!(kind("a -> a\n"), (1, 1, ParseErrorKind::MissingEdges));
        assert!(matches!(
            kind("edges: a\na => a\n").2,
            ParseErrorKind::Syntax(_)
        ));
        assert!(matches!(kind("edges: 1a\n").2, ParseErrorKind::Syntax(_)));
        assert!(matches!(
            kind("edges: a\na -> ~~a\n").2,
            ParseErrorKind::Syntax(_)
        ));
    }

    #[test]
    fn multiple_vertices_are_rejected() {
        let (line, col, k) = kind("vertices: v w\nedges: a\na -> a\n");
        assert_eq!((line, col), (1, 13));
        assert_eq!(k, ParseErrorKind::MultipleVertices(2));
        assert!(parse_presentation("vertices: v\nedges: a\na -> a a\n").is_ok());
    }
}
