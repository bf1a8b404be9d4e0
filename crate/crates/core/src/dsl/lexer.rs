use super::span::{ParseDiagnostic, Position, SourceSpan};
use crate::Severity;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Keywords, ids, numbers, dates, dotted ids: `[A-Za-z0-9_.-]+`.
    Word(String),
    Str(String),
    Comma,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
    /// First token on its line.
    pub line_first: bool,
}

impl Token {
    pub fn word(&self) -> Option<&str> {
        match &self.tok {
            Tok::Word(w) => Some(w),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.tok {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Str(_) => "string".to_string(),
            Tok::Comma => "`,`".to_string(),
        }
    }
}

pub(crate) fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-')
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Position,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }
}

/// Splits `text` into tokens. Lexical problems are reported and skipped so
/// that parsing can go on.
pub(crate) fn lex(text: &str, file: &str) -> (Vec<Token>, Vec<ParseDiagnostic>) {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        pos: Position::START,
    };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let mut last_line = 0;
    let error =
        |start: Position, end: Position, code: &'static str, message: String| ParseDiagnostic {
            span: SourceSpan::new(file, start, end),
            severity: Severity::Error,
            code,
            message,
            hint: None,
        };

    while let Some(c) = cur.peek() {
        let start = cur.pos;
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        let tok = if c == ',' {
            cur.bump();
            Tok::Comma
        } else if c == '"' {
            cur.bump();
            let mut value = String::new();
            let mut terminated = false;
            while let Some(c) = cur.peek() {
                match c {
                    '"' => {
                        cur.bump();
                        terminated = true;
                        break;
                    }
                    '\n' => break,
                    '\\' => {
                        let esc_start = cur.pos;
                        cur.bump();
                        match cur.peek() {
                            Some(e @ ('"' | '\\')) => {
                                cur.bump();
                                value.push(e);
                            }
                            Some('\n') | None => {}
                            Some(other) => {
                                cur.bump();
                                diags.push(error(
                                    esc_start,
                                    cur.pos,
                                    "P003",
                                    format!("invalid escape `\\{other}` in string"),
                                ));
                            }
                        }
                    }
                    _ => {
                        cur.bump();
                        value.push(c);
                    }
                }
            }
            if !terminated {
                diags.push(error(
                    start,
                    cur.pos,
                    "P002",
                    "unterminated string".to_string(),
                ));
            }
            Tok::Str(value)
        } else if is_word_char(c) {
            let mut word = String::new();
            while let Some(c) = cur.peek().filter(|c| is_word_char(*c)) {
                cur.bump();
                word.push(c);
            }
            Tok::Word(word)
        } else {
            cur.bump();
            diags.push(error(
                start,
                cur.pos,
                "P001",
                format!("unexpected character {c:?}"),
            ));
            continue;
        };
        tokens.push(Token {
            tok,
            span: SourceSpan::new(file, start, cur.pos),
            line_first: start.line != last_line,
        });
        last_line = start.line;
    }
    (tokens, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_spans() {
        let (toks, diags) = lex("evr 1.1.2 \"a \\\"b\\\" c\" # note\n  of 1.1", "f");
        assert!(diags.is_empty());
        assert_eq!(toks.len(), 5);
        assert_eq!(toks[2].tok, Tok::Str("a \"b\" c".into()));
        assert_eq!(toks[3].span.start, Position { line: 2, column: 3 });
        assert!(toks[3].line_first);
        assert!(!toks[4].line_first);
    }

    #[test]
    fn lexical_errors_are_reported() {
        let (toks, diags) = lex("a @ \"open\nb \"x\\n\"", "f");
        let codes: Vec<&str> = diags.iter().map(|d| d.code).collect();
        assert_eq!(codes, ["P001", "P002", "P003"]);
        assert_eq!(toks.len(), 4);
    }

    #[test]
    fn columns_count_characters() {
        let (toks, _) = lex("\"äöü\" x", "f");
        assert_eq!(toks[1].span.start.column, 7);
    }
}
