//! Recursive-descent parser for the register format.
//!
//! Every block is opened by a keyword and closed by `end` (except the
//! one-line `alias` declaration). A block with an error is dropped and
//! parsing resumes after its `end`, or at the next line that starts with a
//! block keyword, so one run reports problems from many blocks.

use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDate;

use super::lexer::{lex, Tok, Token};
use super::span::{ParseDiagnostic, Position, SourceSpan};
use crate::model::*;
use crate::Severity;

pub(crate) const BLOCK_KEYWORDS: &[&str] = &[
    "register",
    "soi",
    "sos",
    "stakeholder",
    "context",
    "session",
    "statement",
    "corevalue",
    "quality",
    "evr",
    "threat",
    "control",
    "disposition",
    "funcreq",
    "concept",
    "persona",
    "attestation",
    "mission",
    "decision",
    "feedback",
    "alias",
];

fn is_block_keyword(word: &str) -> bool {
    BLOCK_KEYWORDS.contains(&word)
}

/// Spans of declared entities, keyed by kind and id. Duplicated ids keep one
/// span per occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceMap {
    spans: HashMap<(EntityKind, String), Vec<SourceSpan>>,
}

impl SourceMap {
    fn insert(&mut self, kind: EntityKind, id: String, span: SourceSpan) {
        self.spans.entry((kind, id)).or_default().push(span);
    }

    pub fn span_of(&self, entity: &EntityRef) -> Option<&SourceSpan> {
        let spans = self.spans.get(&(entity.kind, entity.id.clone()))?;
        spans.get(entity.occurrence).or_else(|| spans.last())
    }

    pub fn lookup(&self, kind: EntityKind, id: &str) -> Option<&SourceSpan> {
        self.spans
            .get(&(kind, id.to_string()))
            .and_then(|s| s.first())
    }
}

#[derive(Debug, Clone)]
pub struct ParseResult {
    /// Present iff there are no error-severity diagnostics.
    pub document: Option<RegisterDocument>,
    pub diagnostics: Vec<ParseDiagnostic>,
    pub source_map: SourceMap,
}

impl ParseResult {
    pub fn has_errors(&self) -> bool {
        self.diagnostics
            .iter()
            .any(|d| d.severity == Severity::Error)
    }
}

/// Parses register source text. Never panics on arbitrary input; problems
/// come back as diagnostics.
pub fn parse_register(source_text: &str, file_name: &str) -> ParseResult {
    let (tokens, lex_diags) = lex(source_text, file_name);
    let eof = eof_position(source_text);
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        eof: SourceSpan::new(file_name, eof, eof),
        diags: lex_diags,
        doc: RegisterDocument::blank(""),
        map: SourceMap::default(),
        seen_soi: false,
        resume: Resume::AfterEnd,
    };
    p.parse_document();

    let Parser {
        mut diags,
        doc,
        map,
        ..
    } = p;
    if !diags.iter().any(|d| d.severity == Severity::Error) {
        let fallback = map
            .lookup(EntityKind::Project, "")
            .cloned()
            .unwrap_or_else(|| SourceSpan::new(file_name, Position::START, Position::START));
        for v in validate(&doc) {
            let span = map
                .span_of(&v.subject)
                .cloned()
                .unwrap_or_else(|| fallback.clone());
            diags.push(ParseDiagnostic {
                span,
                severity: Severity::Error,
                code: v.invariant.code(),
                message: v.message,
                hint: None,
            });
        }
    }
    diags.sort_by(|a, b| a.span.start.cmp(&b.span.start).then(a.code.cmp(b.code)));
    let ok = !diags.iter().any(|d| d.severity == Severity::Error);
    ParseResult {
        document: ok.then_some(doc),
        diagnostics: diags,
        source_map: map,
    }
}

fn eof_position(text: &str) -> Position {
    let line = text.split('\n').count();
    let column = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Position { line, column }
}

/// Marker for a block abandoned after an error; its diagnostic has been
/// recorded already.
struct Abort;

type PResult<T> = Result<T, Abort>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Str,
    Word,
    Int,
    Bool,
    Date,
    Lens,
    Flow,
    Scores,
    Threshold,
    Signatory,
    Subject,
    DataSubject,
    Demand,
    Source,
}

#[derive(Debug, Clone)]
enum Val {
    Str(String),
    Word(String),
    Int(u32),
    Bool(bool),
    Date(NaiveDate),
    Lens(Lens),
    Flow(DataFlow),
    Scores([u8; 5]),
    Threshold(Threshold),
    Signatory(Signatory),
    Subject(AttestationSubject),
    DataSubject(DataSubject),
    Demand(ProtectionDemand),
    Source(FeedbackSource),
}

/// (key, value shape, repeatable)
type KeySpec = (&'static str, Shape, bool);

const SOI_KEYS: &[KeySpec] = &[
    ("operation", Shape::Str, false),
    ("region", Shape::Word, true),
];
const SOS_KEYS: &[KeySpec] = &[
    ("cooperation", Shape::Word, false),
    ("tier", Shape::Int, false),
    ("personal_data", Shape::Bool, false),
    ("in_scope", Shape::Bool, false),
    ("enabling_access", Shape::Bool, false),
];
const STAKEHOLDER_KEYS: &[KeySpec] = &[
    ("kind", Shape::Word, false),
    ("description", Shape::Str, false),
    ("region", Shape::Word, false),
    ("motivation", Shape::Str, false),
    ("power", Shape::Str, false),
    ("knowledge", Shape::Str, false),
    ("legitimization", Shape::Str, false),
];
const CONTEXT_KEYS: &[KeySpec] = &[
    ("captured", Shape::Word, false),
    ("element", Shape::Str, true),
    ("flow", Shape::Flow, true),
    ("subject", Shape::DataSubject, true),
    ("type", Shape::Str, true),
    ("expectation", Shape::Str, true),
];
const SESSION_KEYS: &[KeySpec] = &[
    ("date", Shape::Date, false),
    ("participant", Shape::Word, true),
    ("lens", Shape::Lens, true),
];
const STATEMENT_KEYS: &[KeySpec] = &[
    ("in", Shape::Word, false),
    ("from", Shape::Word, false),
    ("lens", Shape::Lens, false),
    ("polarity", Shape::Word, false),
    ("text", Shape::Str, false),
    ("value", Shape::Str, true),
    ("extracted", Shape::Str, true),
];
const COREVALUE_KEYS: &[KeySpec] = &[
    ("aka", Shape::Str, true),
    ("intrinsic", Shape::Bool, false),
    ("scores", Shape::Scores, false),
    ("supported_by", Shape::Word, true),
];
const QUALITY_KEYS: &[KeySpec] = &[("source", Shape::Word, false)];
const EVR_KEYS: &[KeySpec] = &[
    ("kind", Shape::Word, false),
    ("threshold", Shape::Threshold, false),
    ("risk", Shape::Word, false),
    ("legal", Shape::Str, true),
    ("harm", Shape::Word, true),
    ("likelihood", Shape::Word, false),
    ("demand", Shape::Demand, false),
];
const THREAT_KEYS: &[KeySpec] = &[
    ("description", Shape::Str, false),
    ("realistic", Shape::Bool, false),
];
const CONTROL_KEYS: &[KeySpec] = &[
    ("description", Shape::Str, false),
    ("rigor", Shape::Int, false),
    ("form", Shape::Word, false),
    ("status", Shape::Word, false),
    ("implemented_by", Shape::Word, false),
];
const DISPOSITION_KEYS: &[KeySpec] = &[
    ("component", Shape::Str, false),
    ("implements", Shape::Word, true),
];
const FUNCREQ_KEYS: &[KeySpec] = &[];
const CONCEPT_KEYS: &[KeySpec] = &[
    ("ethical", Shape::Word, true),
    ("functional", Shape::Word, true),
];
const PERSONA_KEYS: &[KeySpec] = &[
    ("represents", Shape::Word, false),
    ("kind", Shape::Word, false),
    ("narrative", Shape::Str, false),
];
const ATTESTATION_KEYS: &[KeySpec] = &[
    ("subject", Shape::Subject, false),
    ("signatory", Shape::Signatory, false),
    ("date", Shape::Date, false),
    ("says", Shape::Str, false),
    ("consent", Shape::Bool, false),
];
const MISSION_KEYS: &[KeySpec] = &[
    ("featuring", Shape::Int, true),
    ("signed_by", Shape::Word, true),
];
const DECISION_KEYS: &[KeySpec] = &[
    ("rationale", Shape::Str, false),
    ("signed_by", Shape::Word, true),
];
const FEEDBACK_KEYS: &[KeySpec] = &[
    ("date", Shape::Date, false),
    ("source", Shape::Source, false),
    ("text", Shape::Str, false),
    ("yields_statement", Shape::Word, true),
    ("yields_quality", Shape::Word, true),
    ("reprioritize", Shape::Bool, false),
];

/// Attribute values collected for one block.
struct Attrs {
    values: BTreeMap<&'static str, Vec<(Val, SourceSpan)>>,
    block: SourceSpan,
    block_name: &'static str,
}

impl Attrs {
    fn take(&mut self, key: &str) -> Vec<(Val, SourceSpan)> {
        self.values.remove(key).unwrap_or_default()
    }

    fn single(&mut self, key: &str) -> Option<(Val, SourceSpan)> {
        self.take(key).into_iter().next()
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: SourceSpan,
    diags: Vec<ParseDiagnostic>,
    doc: RegisterDocument,
    map: SourceMap,
    seen_soi: bool,
    resume: Resume,
}

/// Where parsing continues after a block fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Resume {
    /// Skip past the block's `end`.
    AfterEnd,
    /// The block's `end` was already consumed.
    Here,
    /// Skip to the next line that opens a block.
    NextBlock,
}

fn is_local_id(word: &str) -> bool {
    let mut chars = word.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn current_span(&self) -> SourceSpan {
        self.peek()
            .map_or_else(|| self.eof.clone(), |t| t.span.clone())
    }

    fn diag(&mut self, severity: Severity, span: SourceSpan, code: &'static str, message: String) {
        self.diags.push(ParseDiagnostic {
            span,
            severity,
            code,
            message,
            hint: None,
        });
    }

    fn fail<T>(
        &mut self,
        span: SourceSpan,
        code: &'static str,
        message: impl Into<String>,
    ) -> PResult<T> {
        self.diag(Severity::Error, span, code, message.into());
        Err(Abort)
    }

    fn fail_hint<T>(
        &mut self,
        span: SourceSpan,
        code: &'static str,
        message: impl Into<String>,
        hint: &str,
    ) -> PResult<T> {
        self.diags.push(ParseDiagnostic {
            span,
            severity: Severity::Error,
            code,
            message: message.into(),
            hint: Some(hint.to_string()),
        });
        Err(Abort)
    }

    /// Skips to just past the next `end`, or to the next line that opens a
    /// block.
    fn recover(&mut self) {
        while let Some(tok) = self.peek() {
            match tok.word() {
                Some("end") => {
                    self.pos += 1;
                    return;
                }
                Some(w) if tok.line_first && is_block_keyword(w) => return,
                _ => self.pos += 1,
            }
        }
    }

    fn skip_to_block_start(&mut self) {
        while let Some(tok) = self.peek() {
            if tok.line_first && tok.word().is_some_and(is_block_keyword) {
                return;
            }
            self.pos += 1;
        }
    }

    fn expect_word(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek() {
            Some(Token {
                tok: Tok::Word(w),
                span,
                ..
            }) if w != "end" => {
                let out = (w.clone(), span.clone());
                self.pos += 1;
                Ok(out)
            }
            Some(tok) => {
                let (span, found) = (tok.span.clone(), tok.describe());
                self.fail(span, "P005", format!("expected {what}, found {found}"))
            }
            None => {
                let span = self.eof.clone();
                self.fail(span, "P006", format!("expected {what}, found end of input"))
            }
        }
    }

    fn expect_keyword(&mut self, keyword: &str) -> PResult<SourceSpan> {
        match self.peek() {
            Some(tok) if tok.word() == Some(keyword) => {
                let span = tok.span.clone();
                self.pos += 1;
                Ok(span)
            }
            Some(tok) => {
                let (span, found) = (tok.span.clone(), tok.describe());
                self.fail(span, "P005", format!("expected `{keyword}`, found {found}"))
            }
            None => {
                let span = self.eof.clone();
                self.fail(
                    span,
                    "P006",
                    format!("expected `{keyword}`, found end of input"),
                )
            }
        }
    }

    fn expect_str(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek() {
            Some(Token {
                tok: Tok::Str(s),
                span,
                ..
            }) => {
                let out = (s.clone(), span.clone());
                self.pos += 1;
                Ok(out)
            }
            Some(tok) => {
                let (span, found) = (tok.span.clone(), tok.describe());
                self.fail(
                    span,
                    "P005",
                    format!("expected {what} string, found {found}"),
                )
            }
            None => {
                let span = self.eof.clone();
                self.fail(
                    span,
                    "P006",
                    format!("expected {what} string, found end of input"),
                )
            }
        }
    }

    fn expect_int(&mut self, what: &str) -> PResult<(u32, SourceSpan)> {
        let (word, span) = self.expect_word(what)?;
        if !word.bytes().all(|b| b.is_ascii_digit()) {
            return self.fail(
                span,
                "P024",
                format!("expected {what} integer, found `{word}`"),
            );
        }
        match word.parse::<u32>() {
            Ok(n) => Ok((n, span)),
            Err(_) => self.fail(span, "P024", format!("integer `{word}` is out of range")),
        }
    }

    fn expect_local_id(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        let (word, span) = self.expect_word(what)?;
        if is_local_id(&word) {
            Ok((word, span))
        } else {
            self.fail_hint(
                span,
                "P012",
                format!("malformed {what} `{word}`"),
                "ids start with a letter and use letters, digits, `_` and `-`",
            )
        }
    }

    fn dotted<T: std::str::FromStr>(
        &mut self,
        word: &str,
        span: SourceSpan,
        what: &str,
    ) -> PResult<T> {
        match word.parse::<T>() {
            Ok(v) => Ok(v),
            Err(_) => self.fail(span, "P012", format!("malformed {what} id `{word}`")),
        }
    }

    fn expect_dotted<T: std::str::FromStr>(&mut self, what: &str) -> PResult<(T, SourceSpan)> {
        let (word, span) = self.expect_word(what)?;
        let v = self.dotted(&word, span.clone(), what)?;
        Ok((v, span))
    }

    fn keyword_value<T>(&mut self, word: &str, span: SourceSpan) -> PResult<T>
    where
        T: std::str::FromStr<Err = KeywordError>,
    {
        match word.parse::<T>() {
            Ok(v) => Ok(v),
            Err(e) => self.fail(span, "P021", e.to_string()),
        }
    }

    fn parse_date(&mut self, word: &str, span: SourceSpan) -> PResult<NaiveDate> {
        let well_formed = word.len() == 10
            && word.bytes().enumerate().all(|(i, b)| {
                if i == 4 || i == 7 {
                    b == b'-'
                } else {
                    b.is_ascii_digit()
                }
            });
        match NaiveDate::parse_from_str(word, "%Y-%m-%d") {
            Ok(d) if well_formed => Ok(d),
            _ => self.fail_hint(
                span,
                "P022",
                format!("invalid date `{word}`"),
                "use YYYY-MM-DD",
            ),
        }
    }

    fn parse_bool(&mut self, word: &str, span: SourceSpan) -> PResult<bool> {
        match word {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => self.fail(
                span,
                "P021",
                format!("expected `true` or `false`, found `{word}`"),
            ),
        }
    }

    fn parse_lens(&mut self) -> PResult<Lens> {
        let (word, span) = self.expect_word("lens")?;
        match word.as_str() {
            "utilitarian" => Ok(Lens::Utilitarian),
            "virtue" => Ok(Lens::Virtue),
            "duty" => Ok(Lens::Duty),
            "cultural" => Ok(Lens::Cultural(self.expect_str("framework name")?.0)),
            _ => self.fail_hint(
                span,
                "P021",
                format!("unknown lens `{word}`"),
                "utilitarian, virtue, duty or cultural \"<framework>\"",
            ),
        }
    }

    fn parse_value(&mut self, shape: Shape) -> PResult<Val> {
        Ok(match shape {
            Shape::Str => Val::Str(self.expect_str("value")?.0),
            Shape::Word => Val::Word(self.expect_word("value")?.0),
            Shape::Int => Val::Int(self.expect_int("value")?.0),
            Shape::Bool => {
                let (w, s) = self.expect_word("boolean")?;
                Val::Bool(self.parse_bool(&w, s)?)
            }
            Shape::Date => {
                let (w, s) = self.expect_word("date")?;
                Val::Date(self.parse_date(&w, s)?)
            }
            Shape::Lens => Val::Lens(self.parse_lens()?),
            Shape::Flow => Val::Flow(DataFlow {
                source: self.expect_str("flow source")?.0,
                sink: self.expect_str("flow sink")?.0,
                data_type: self.expect_str("flow data type")?.0,
            }),
            Shape::Scores => {
                let mut scores = [0u8; 5];
                for slot in scores.iter_mut() {
                    let (n, span) = self.expect_int("score")?;
                    if !(1..=5).contains(&n) {
                        return self.fail(span, "P024", format!("score {n} outside 1..=5"));
                    }
                    *slot = n as u8;
                }
                Val::Scores(scores)
            }
            Shape::Threshold => {
                let metric = self.expect_str("threshold metric")?.0;
                let (w, s) = self.expect_word("comparator")?;
                let comparator = self.keyword_value(&w, s)?;
                let level = self.expect_str("threshold level")?.0;
                let rationale = self.expect_str("threshold rationale")?.0;
                Val::Threshold(Threshold {
                    metric,
                    comparator,
                    level,
                    rationale,
                })
            }
            Shape::Signatory => {
                let name = self.expect_str("signatory name")?.0;
                let (w, s) = self.expect_word("signatory role")?;
                let role = self.keyword_value(&w, s)?;
                Val::Signatory(Signatory { name, role })
            }
            Shape::Subject => {
                let (w, s) = self.expect_word("attestation subject")?;
                Val::Subject(match w.as_str() {
                    "priority" => {
                        AttestationSubject::PriorityDecision(self.expect_int("core value id")?.0)
                    }
                    "risk" => AttestationSubject::RiskAcceptance(self.expect_dotted("control")?.0),
                    "mission" => AttestationSubject::Mission,
                    "decision" => AttestationSubject::InvestmentDecision,
                    "rule" => AttestationSubject::Rule(self.expect_word("rule id")?.0),
                    _ => {
                        return self.fail_hint(
                            s,
                            "P021",
                            format!("unknown attestation subject `{w}`"),
                            "priority <n>, risk <control>, mission, decision or rule <id>",
                        )
                    }
                })
            }
            Shape::DataSubject => match self.peek().map(|t| t.tok.clone()) {
                Some(Tok::Str(s)) => {
                    self.pos += 1;
                    Val::DataSubject(DataSubject::Named(s))
                }
                _ => Val::DataSubject(DataSubject::Stakeholder(
                    self.expect_local_id("stakeholder id")?.0,
                )),
            },
            Shape::Demand => {
                let (n, span) = self.expect_int("protection demand")?;
                let Some(level) = u8::try_from(n).ok().and_then(Level::new) else {
                    return self.fail(span, "P024", format!("protection demand {n} outside 1..=4"));
                };
                let rationale = self.expect_str("demand rationale")?.0;
                Val::Demand(ProtectionDemand { level, rationale })
            }
            Shape::Source => {
                let (w, s) = self.expect_word("feedback source")?;
                match w.as_str() {
                    "market" => Val::Source(FeedbackSource::Market),
                    "stakeholder" => Val::Source(FeedbackSource::Stakeholder(
                        self.expect_local_id("stakeholder id")?.0,
                    )),
                    _ => {
                        return self.fail_hint(
                            s,
                            "P021",
                            format!("unknown feedback source `{w}`"),
                            "market or stakeholder <id>",
                        )
                    }
                }
            }
        })
    }

    /// Reads `key value...` pairs up to the closing `end`.
    fn attrs(
        &mut self,
        block_name: &'static str,
        block: SourceSpan,
        specs: &[KeySpec],
    ) -> PResult<Attrs> {
        let mut attrs = Attrs {
            values: BTreeMap::new(),
            block,
            block_name,
        };
        loop {
            let Some(tok) = self.peek().cloned() else {
                let span = attrs.block.clone();
                return self.fail_hint(
                    span,
                    "P006",
                    format!("unclosed `{block_name}` block"),
                    "close the block with `end`",
                );
            };
            let Tok::Word(key) = &tok.tok else {
                let found = tok.describe();
                return self.fail(
                    tok.span,
                    "P005",
                    format!("expected attribute key, found {found}"),
                );
            };
            if key == "end" {
                self.pos += 1;
                self.resume = Resume::Here;
                return Ok(attrs);
            }
            if is_block_keyword(key) {
                let span = attrs.block.clone();
                return self.fail_hint(
                    span,
                    "P006",
                    format!("unclosed `{block_name}` block before `{key}`"),
                    "close the block with `end`",
                );
            }
            self.pos += 1;
            let Some(&(name, shape, multi)) = specs.iter().find(|s| s.0 == key) else {
                self.diag(
                    Severity::Warning,
                    tok.span.clone(),
                    "P090",
                    format!("unknown key `{key}` in `{block_name}` block"),
                );
                let line = tok.span.start.line;
                while self
                    .peek()
                    .is_some_and(|t| t.span.start.line == line && t.word() != Some("end"))
                {
                    self.pos += 1;
                }
                continue;
            };
            if !multi && attrs.values.contains_key(name) {
                return self.fail(
                    tok.span,
                    "P023",
                    format!("attribute `{name}` given more than once"),
                );
            }
            // Repeatable keys take every value up to the end of the line.
            let line = tok.span.start.line;
            loop {
                let value_start = self.current_span();
                let value = self.parse_value(shape)?;
                let last = self.toks[self.pos - 1].span.clone();
                attrs
                    .values
                    .entry(name)
                    .or_default()
                    .push((value, value_start.to(&last)));
                let more = multi
                    && self
                        .peek()
                        .is_some_and(|t| t.span.start.line == line && t.word() != Some("end"));
                if !more {
                    break;
                }
            }
        }
    }

    fn missing<T>(&mut self, attrs: &Attrs, key: &str) -> PResult<T> {
        let span = attrs.block.clone();
        let block = attrs.block_name;
        self.fail(
            span,
            "P020",
            format!("`{block}` block is missing required attribute `{key}`"),
        )
    }

    fn opt_str(&mut self, attrs: &mut Attrs, key: &str) -> Option<String> {
        match attrs.single(key) {
            Some((Val::Str(s), _)) => Some(s),
            _ => None,
        }
    }

    fn str_or_empty(&mut self, attrs: &mut Attrs, key: &str) -> String {
        self.opt_str(attrs, key).unwrap_or_default()
    }

    fn strs(&mut self, attrs: &mut Attrs, key: &str) -> Vec<String> {
        attrs
            .take(key)
            .into_iter()
            .filter_map(|(v, _)| match v {
                Val::Str(s) | Val::Word(s) => Some(s),
                _ => None,
            })
            .collect()
    }

    fn words(&mut self, attrs: &mut Attrs, key: &str) -> Vec<(String, SourceSpan)> {
        attrs
            .take(key)
            .into_iter()
            .filter_map(|(v, span)| match v {
                Val::Word(s) => Some((s, span)),
                _ => None,
            })
            .collect()
    }

    fn local_ids(&mut self, attrs: &mut Attrs, key: &str) -> PResult<Vec<String>> {
        let mut out = Vec::new();
        for (word, span) in self.words(attrs, key) {
            if !is_local_id(&word) {
                return self.fail(span, "P012", format!("malformed id `{word}`"));
            }
            out.push(word);
        }
        Ok(out)
    }

    fn opt_local_id(&mut self, attrs: &mut Attrs, key: &str) -> PResult<Option<String>> {
        Ok(self.local_ids(attrs, key)?.into_iter().next())
    }

    fn req_local_id(&mut self, attrs: &mut Attrs, key: &str) -> PResult<String> {
        match self.opt_local_id(attrs, key)? {
            Some(id) => Ok(id),
            None => self.missing(attrs, key),
        }
    }

    fn opt_keyword<T>(&mut self, attrs: &mut Attrs, key: &str) -> PResult<Option<T>>
    where
        T: std::str::FromStr<Err = KeywordError>,
    {
        match attrs.single(key) {
            Some((Val::Word(w), span)) => self.keyword_value(&w, span).map(Some),
            _ => Ok(None),
        }
    }

    fn req_keyword<T>(&mut self, attrs: &mut Attrs, key: &str) -> PResult<T>
    where
        T: std::str::FromStr<Err = KeywordError>,
    {
        match self.opt_keyword(attrs, key)? {
            Some(v) => Ok(v),
            None => self.missing(attrs, key),
        }
    }

    fn bool_or_false(&mut self, attrs: &mut Attrs, key: &str) -> bool {
        matches!(attrs.single(key), Some((Val::Bool(true), _)))
    }

    fn opt_int(&mut self, attrs: &mut Attrs, key: &str) -> Option<(u32, SourceSpan)> {
        match attrs.single(key) {
            Some((Val::Int(n), span)) => Some((n, span)),
            _ => None,
        }
    }

    fn req_date(&mut self, attrs: &mut Attrs, key: &str) -> PResult<NaiveDate> {
        match attrs.single(key) {
            Some((Val::Date(d), _)) => Ok(d),
            _ => self.missing(attrs, key),
        }
    }

    fn register(&mut self, kind: EntityKind, id: impl ToString, span: SourceSpan) {
        self.map.insert(kind, id.to_string(), span);
    }

    fn header_span(&self, start: &SourceSpan) -> SourceSpan {
        let last = &self.toks[self.pos.saturating_sub(1)].span;
        start.to(last)
    }

    fn parse_document(&mut self) {
        if self.toks.is_empty() {
            return;
        }
        if self.peek().and_then(Token::word) == Some("register") {
            if self.parse_header().is_err() {
                self.skip_to_block_start();
            }
        } else {
            let span = self.current_span();
            self.diag(
                Severity::Error,
                span,
                "P004",
                "missing `register \"<name>\" phase <phase>` header".into(),
            );
            self.skip_to_block_start();
        }
        while let Some(tok) = self.peek().cloned() {
            let word = tok.word().unwrap_or_default().to_string();
            let outcome = match word.as_str() {
                "register" => {
                    self.pos += 1;
                    self.fail(tok.span, "P004", "duplicate `register` header")
                }
                "end" => {
                    self.pos += 1;
                    self.diag(
                        Severity::Error,
                        tok.span,
                        "P007",
                        "`end` without an open block".into(),
                    );
                    continue;
                }
                w if is_block_keyword(w) => {
                    self.pos += 1;
                    self.resume = if w == "alias" {
                        Resume::NextBlock
                    } else {
                        Resume::AfterEnd
                    };
                    self.parse_block(w, tok.span)
                }
                _ => {
                    self.pos += 1;
                    let found = tok.describe();
                    self.diag(
                        Severity::Error,
                        tok.span,
                        "P008",
                        format!("expected a block keyword, found {found}"),
                    );
                    self.skip_to_block_start();
                    continue;
                }
            };
            if outcome.is_err() {
                match self.resume {
                    Resume::AfterEnd => self.recover(),
                    Resume::NextBlock => self.skip_to_block_start(),
                    Resume::Here => {}
                }
            }
        }
    }

    fn parse_header(&mut self) -> PResult<()> {
        let start = self.expect_keyword("register")?;
        let (name, _) = self.expect_str("project name")?;
        let version = if self.peek().and_then(Token::word) == Some("version") {
            self.pos += 1;
            Some(self.expect_str("version tag")?.0)
        } else {
            None
        };
        self.expect_keyword("phase")?;
        let (word, span) = self.expect_word("phase")?;
        let phase = self.keyword_value(&word, span)?;
        let header = self.header_span(&start);
        self.register(EntityKind::Project, "", header);
        self.doc.project = ProjectMeta {
            name: name.clone(),
            version,
        };
        self.doc.phase = phase;
        if !self.seen_soi {
            self.doc.soi.name = name;
        }
        Ok(())
    }

    fn parse_block(&mut self, keyword: &str, start: SourceSpan) -> PResult<()> {
        match keyword {
            "soi" => self.soi(start),
            "sos" => self.sos(start),
            "stakeholder" => self.stakeholder(start),
            "context" => self.context(start),
            "session" => self.session(start),
            "statement" => self.statement(start),
            "corevalue" => self.corevalue(start),
            "quality" => self.quality(start),
            "evr" => self.evr(start),
            "threat" => self.threat(start),
            "control" => self.control(start),
            "disposition" => self.disposition(start),
            "funcreq" => self.funcreq(start),
            "concept" => self.concept(start),
            "persona" => self.persona(start),
            "attestation" => self.attestation(start),
            "mission" => self.mission(start),
            "decision" => self.decision(start),
            "feedback" => self.feedback(start),
            "alias" => self.alias(start),
            _ => unreachable!("not a block keyword: {keyword}"),
        }
    }

    fn soi(&mut self, start: SourceSpan) -> PResult<()> {
        let (name, _) = self.expect_str("system name")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("soi", header.clone(), SOI_KEYS)?;
        if self.seen_soi {
            return self.fail(header, "P033", "duplicate `soi` block");
        }
        let concept_of_operation = self.str_or_empty(&mut a, "operation");
        let deployment_regions = self.strs(&mut a, "region");
        self.seen_soi = true;
        self.register(EntityKind::Soi, "", header);
        self.doc.soi = Soi {
            name,
            concept_of_operation,
            deployment_regions,
        };
        Ok(())
    }

    fn sos(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _) = self.expect_local_id("SOS element id")?;
        let (name, _) = self.expect_str("SOS element name")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("sos", header.clone(), SOS_KEYS)?;
        let cooperation_type = self.req_keyword(&mut a, "cooperation")?;
        let Some((tier, _)) = self.opt_int(&mut a, "tier") else {
            return self.missing(&a, "tier");
        };
        let element = SosElement {
            id: id.clone(),
            name,
            cooperation_type,
            tier,
            processes_personal_data: self.bool_or_false(&mut a, "personal_data"),
            in_ethical_scope: self.bool_or_false(&mut a, "in_scope"),
            access_to_enabling_elements: self.bool_or_false(&mut a, "enabling_access"),
        };
        self.register(EntityKind::Sos, id, header);
        self.doc.sos_elements.push(element);
        Ok(())
    }

    fn stakeholder(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _) = self.expect_local_id("stakeholder id")?;
        let (name, _) = self.expect_str("stakeholder name")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("stakeholder", header.clone(), STAKEHOLDER_KEYS)?;
        let kind = self.req_keyword(&mut a, "kind")?;
        let description = self.str_or_empty(&mut a, "description");
        let region = self.strs(&mut a, "region").into_iter().next();
        let profile_keys = ["motivation", "power", "knowledge", "legitimization"];
        let selection_profile = if profile_keys.iter().any(|k| a.values.contains_key(k)) {
            Some(SelectionProfile {
                motivation: self.str_or_empty(&mut a, "motivation"),
                power: self.str_or_empty(&mut a, "power"),
                knowledge: self.str_or_empty(&mut a, "knowledge"),
                legitimization: self.str_or_empty(&mut a, "legitimization"),
            })
        } else {
            None
        };
        self.register(EntityKind::Stakeholder, &id, header);
        self.doc.stakeholders.push(Stakeholder {
            id,
            name,
            kind,
            description,
            region,
            selection_profile,
        });
        Ok(())
    }

    fn context(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _) = self.expect_local_id("context id")?;
        let (name, _) = self.expect_str("context name")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("context", header.clone(), CONTEXT_KEYS)?;
        let captured = self.req_keyword(&mut a, "captured")?;
        let data_flows = a
            .take("flow")
            .into_iter()
            .filter_map(|(v, _)| match v {
                Val::Flow(f) => Some(f),
                _ => None,
            })
            .collect();
        let data_subjects = a
            .take("subject")
            .into_iter()
            .filter_map(|(v, _)| match v {
                Val::DataSubject(s) => Some(s),
                _ => None,
            })
            .collect();
        let ctx = ContextOfUse {
            id: id.clone(),
            name,
            captured,
            data_elements: self.strs(&mut a, "element"),
            data_flows,
            data_subjects,
            data_types: self.strs(&mut a, "type"),
            integrity_expectations: self.strs(&mut a, "expectation"),
        };
        self.register(EntityKind::Context, id, header);
        self.doc.contexts.push(ctx);
        Ok(())
    }

    fn session(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _) = self.expect_local_id("session id")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("session", header.clone(), SESSION_KEYS)?;
        let date = self.req_date(&mut a, "date")?;
        let participants = self.local_ids(&mut a, "participant")?;
        let lenses_used = a
            .take("lens")
            .into_iter()
            .filter_map(|(v, _)| match v {
                Val::Lens(l) => Some(l),
                _ => None,
            })
            .collect();
        self.register(EntityKind::Session, &id, header);
        self.doc.sessions.push(ElicitationSession {
            id,
            date,
            participants,
            lenses_used,
        });
        Ok(())
    }

    fn statement(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _) = self.expect_local_id("statement id")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("statement", header.clone(), STATEMENT_KEYS)?;
        let session = self.req_local_id(&mut a, "in")?;
        let stakeholder = self.req_local_id(&mut a, "from")?;
        let lens = match a.single("lens") {
            Some((Val::Lens(l), _)) => l,
            _ => return self.missing(&a, "lens"),
        };
        let polarity = self.req_keyword(&mut a, "polarity")?;
        let st = ValueStatement {
            id: id.clone(),
            session,
            stakeholder,
            lens,
            text: self.str_or_empty(&mut a, "text"),
            polarity,
            named_values: self.strs(&mut a, "value"),
            extracted_values: self.strs(&mut a, "extracted"),
        };
        self.register(EntityKind::Statement, id, header);
        self.doc.statements.push(st);
        Ok(())
    }

    fn corevalue(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _) = self.expect_int("core value id")?;
        let (name, _) = self.expect_str("core value name")?;
        self.expect_keyword("rank")?;
        let (priority_rank, _) = self.expect_int("priority rank")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("corevalue", header.clone(), COREVALUE_KEYS)?;
        let hierarchy_scores = match a.single("scores") {
            Some((Val::Scores(s), _)) => Some(HierarchyScores::from_array(s)),
            _ => None,
        };
        let cv = CoreValue {
            id,
            name,
            aliases: self.strs(&mut a, "aka"),
            priority_rank,
            intrinsic: self.bool_or_false(&mut a, "intrinsic"),
            hierarchy_scores,
            supporting_statements: self.local_ids(&mut a, "supported_by")?,
        };
        self.register(EntityKind::CoreValue, id, header);
        self.doc.core_values.push(cv);
        Ok(())
    }

    fn quality(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _): (QualityId, _) = self.expect_dotted("quality")?;
        let (name, _) = self.expect_str("quality name")?;
        self.expect_keyword("of")?;
        let (core_value, _) = self.expect_int("core value id")?;
        self.expect_keyword("direction")?;
        let (word, span) = self.expect_word("direction")?;
        let direction = self.keyword_value(&word, span)?;
        let header = self.header_span(&start);
        let mut a = self.attrs("quality", header.clone(), QUALITY_KEYS)?;
        let source = self
            .opt_keyword(&mut a, "source")?
            .unwrap_or(QualitySource::Stakeholder);
        self.register(EntityKind::Quality, id, header);
        self.doc.qualities.push(ValueQuality {
            id,
            core_value,
            name,
            direction,
            source,
        });
        Ok(())
    }

    fn evr(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _): (EvrId, _) = self.expect_dotted("EVR")?;
        let (text, _) = self.expect_str("EVR text")?;
        self.expect_keyword("of")?;
        let (quality, _): (QualityId, _) = self.expect_dotted("quality")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("evr", header.clone(), EVR_KEYS)?;
        let kind = self
            .opt_keyword(&mut a, "kind")?
            .unwrap_or(EvrKind::Organizational);
        let threshold = match a.single("threshold") {
            Some((Val::Threshold(t), _)) => Some(t),
            _ => None,
        };
        let risk_path = self
            .opt_keyword(&mut a, "risk")?
            .unwrap_or(RiskPath::Unclassified);
        let mut harm_flags = HarmFlags::default();
        for (flag, span) in self.words(&mut a, "harm") {
            match flag.as_str() {
                "life" => harm_flags.life = true,
                "health" => harm_flags.health = true,
                "legal_breach" => harm_flags.legal_breach = true,
                _ => {
                    return self.fail_hint(
                        span,
                        "P021",
                        format!("unknown harm flag `{flag}`"),
                        "life, health or legal_breach",
                    )
                }
            }
        }
        let harm_likelihood = self
            .opt_keyword(&mut a, "likelihood")?
            .unwrap_or(Likelihood::Unlikely);
        let protection_demand = match a.single("demand") {
            Some((Val::Demand(d), _)) => Some(d),
            _ => None,
        };
        let evr = Evr {
            id,
            quality,
            text,
            kind,
            threshold,
            risk_path,
            legal_instruments: self.strs(&mut a, "legal"),
            harm_flags,
            harm_likelihood,
            protection_demand,
        };
        self.register(EntityKind::Evr, id, header);
        self.doc.evrs.push(evr);
        Ok(())
    }

    fn threat(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _): (ThreatId, _) = self.expect_dotted("threat")?;
        self.expect_keyword("of")?;
        let (evr, _): (EvrId, _) = self.expect_dotted("EVR")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("threat", header.clone(), THREAT_KEYS)?;
        let threat = Threat {
            id,
            evr,
            description: self.str_or_empty(&mut a, "description"),
            realistic: self.bool_or_false(&mut a, "realistic"),
        };
        self.register(EntityKind::Threat, id, header);
        self.doc.threats.push(threat);
        Ok(())
    }

    fn control(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _): (ControlId, _) = self.expect_dotted("control")?;
        self.expect_keyword("for")?;
        let mut threats = vec![self.expect_dotted::<ThreatId>("threat")?.0];
        while self.peek().is_some_and(|t| t.tok == Tok::Comma) {
            self.pos += 1;
            threats.push(self.expect_dotted::<ThreatId>("threat")?.0);
        }
        let header = self.header_span(&start);
        let mut a = self.attrs("control", header.clone(), CONTROL_KEYS)?;
        let Some((raw, span)) = self.opt_int(&mut a, "rigor") else {
            return self.missing(&a, "rigor");
        };
        let Some(rigor) = u8::try_from(raw).ok().and_then(Level::new) else {
            return self.fail(span, "P024", format!("rigor {raw} outside 1..=4"));
        };
        let form = self.req_keyword(&mut a, "form")?;
        let status = self
            .opt_keyword(&mut a, "status")?
            .unwrap_or(ControlStatus::Proposed);
        let control = Control {
            id,
            threats,
            description: self.str_or_empty(&mut a, "description"),
            rigor,
            form,
            status,
            implementing_disposition: self.opt_local_id(&mut a, "implemented_by")?,
        };
        self.register(EntityKind::Control, id, header);
        self.doc.controls.push(control);
        Ok(())
    }

    fn disposition(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _) = self.expect_local_id("disposition id")?;
        let (description, _) = self.expect_str("disposition description")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("disposition", header.clone(), DISPOSITION_KEYS)?;
        let mut controls = Vec::new();
        for (word, span) in self.words(&mut a, "implements") {
            controls.push(self.dotted::<ControlId>(&word, span, "control")?);
        }
        let disposition = ValueDisposition {
            id: id.clone(),
            description,
            soi_component: self.str_or_empty(&mut a, "component"),
            controls,
        };
        self.register(EntityKind::Disposition, id, header);
        self.doc.dispositions.push(disposition);
        Ok(())
    }

    fn funcreq(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _) = self.expect_local_id("functional requirement id")?;
        let (text, _) = self.expect_str("requirement text")?;
        let header = self.header_span(&start);
        self.attrs("funcreq", header.clone(), FUNCREQ_KEYS)?;
        self.register(EntityKind::FunctionalRequirement, &id, header);
        self.doc
            .functional_requirements
            .push(FunctionalRequirement { id, text });
        Ok(())
    }

    fn concept(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _) = self.expect_local_id("design concept id")?;
        let (name, _) = self.expect_str("design concept name")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("concept", header.clone(), CONCEPT_KEYS)?;
        let mut ethical_refs = Vec::new();
        for (word, span) in self.words(&mut a, "ethical") {
            let r = if word.contains('-') {
                EthicalRef::Control(self.dotted(&word, span, "control")?)
            } else {
                EthicalRef::Evr(self.dotted(&word, span, "EVR")?)
            };
            ethical_refs.push(r);
        }
        let concept = DesignConcept {
            id: id.clone(),
            name,
            ethical_refs,
            functional_refs: self.local_ids(&mut a, "functional")?,
        };
        self.register(EntityKind::DesignConcept, id, header);
        self.doc.design_concepts.push(concept);
        Ok(())
    }

    fn persona(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _) = self.expect_local_id("persona id")?;
        let (name, _) = self.expect_str("persona name")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("persona", header.clone(), PERSONA_KEYS)?;
        let stakeholder = self.req_local_id(&mut a, "represents")?;
        let kind = self.req_keyword(&mut a, "kind")?;
        let persona = Persona {
            id: id.clone(),
            name,
            stakeholder,
            kind,
            narrative: self.str_or_empty(&mut a, "narrative"),
        };
        self.register(EntityKind::Persona, id, header);
        self.doc.personas.push(persona);
        Ok(())
    }

    fn attestation(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _) = self.expect_local_id("attestation id")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("attestation", header.clone(), ATTESTATION_KEYS)?;
        let subject = match a.single("subject") {
            Some((Val::Subject(s), _)) => s,
            _ => return self.missing(&a, "subject"),
        };
        let signatory = match a.single("signatory") {
            Some((Val::Signatory(s), _)) => s,
            _ => return self.missing(&a, "signatory"),
        };
        let date = self.req_date(&mut a, "date")?;
        let att = Attestation {
            id: id.clone(),
            subject,
            signatory,
            date,
            statement: self.str_or_empty(&mut a, "says"),
            consent: self.bool_or_false(&mut a, "consent"),
        };
        self.register(EntityKind::Attestation, id, header);
        self.doc.attestations.push(att);
        Ok(())
    }

    fn mission(&mut self, start: SourceSpan) -> PResult<()> {
        let (text, _) = self.expect_str("mission text")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("mission", header.clone(), MISSION_KEYS)?;
        if self.doc.mission.is_some() {
            return self.fail(header, "P033", "duplicate `mission` block");
        }
        let featured = a
            .take("featuring")
            .into_iter()
            .filter_map(|(v, _)| match v {
                Val::Int(n) => Some(n),
                _ => None,
            })
            .collect();
        let attestations = self.local_ids(&mut a, "signed_by")?;
        self.register(EntityKind::Mission, "", header);
        self.doc.mission = Some(ValueMission {
            text,
            featured,
            attestations,
        });
        Ok(())
    }

    fn decision(&mut self, start: SourceSpan) -> PResult<()> {
        let (word, span) = self.expect_word("verdict")?;
        let verdict = self.keyword_value(&word, span)?;
        let header = self.header_span(&start);
        let mut a = self.attrs("decision", header.clone(), DECISION_KEYS)?;
        if self.doc.investment_decision.is_some() {
            return self.fail(header, "P033", "duplicate `decision` block");
        }
        let decision = InvestmentDecision {
            verdict,
            rationale: self.str_or_empty(&mut a, "rationale"),
            attestations: self.local_ids(&mut a, "signed_by")?,
        };
        self.register(EntityKind::Decision, "", header);
        self.doc.investment_decision = Some(decision);
        Ok(())
    }

    fn feedback(&mut self, start: SourceSpan) -> PResult<()> {
        let (id, _) = self.expect_local_id("feedback id")?;
        let header = self.header_span(&start);
        let mut a = self.attrs("feedback", header.clone(), FEEDBACK_KEYS)?;
        let date = self.req_date(&mut a, "date")?;
        let source = match a.single("source") {
            Some((Val::Source(s), _)) => s,
            _ => return self.missing(&a, "source"),
        };
        let mut qualities = Vec::new();
        for (word, span) in self.words(&mut a, "yields_quality") {
            qualities.push(self.dotted::<QualityId>(&word, span, "quality")?);
        }
        let entry = FeedbackEntry {
            id: id.clone(),
            date,
            source,
            text: self.str_or_empty(&mut a, "text"),
            statements: self.local_ids(&mut a, "yields_statement")?,
            qualities,
            reprioritization_required: self.bool_or_false(&mut a, "reprioritize"),
        };
        self.register(EntityKind::Feedback, id, header);
        self.doc.feedback.push(entry);
        Ok(())
    }

    fn alias(&mut self, start: SourceSpan) -> PResult<()> {
        let (alias, _) = self.expect_str("alias name")?;
        self.expect_keyword("to")?;
        let (canonical, _) = self.expect_str("canonical value name")?;
        let header = self.header_span(&start);
        if self.doc.alias_map.contains_key(&alias) {
            return self.fail(
                header,
                "P010",
                format!("alias `{alias}` declared more than once"),
            );
        }
        self.register(EntityKind::Alias, &alias, header);
        self.doc.alias_map.insert(alias, canonical);
        Ok(())
    }
}
