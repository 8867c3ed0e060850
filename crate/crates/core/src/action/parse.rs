use thiserror::Error;

use super::{Action, ActionScript};

/// A parse failure. Positions are byte offsets into the original input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown action `{name}` at byte {position}")]
    UnknownAction { name: String, position: usize },
    #[error("`{name}` at byte {position} takes {expected}, got {found} argument(s)")]
    ArityMismatch { name: String, expected: &'static str, found: usize, position: usize },
    #[error("bad literal at byte {position}: {detail}")]
    BadLiteral { position: usize, detail: String },
    #[error("unterminated string starting at byte {position}")]
    UnbalancedQuote { position: usize },
    #[error("syntax error at byte {position}: {detail}")]
    Syntax { position: usize, detail: String },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::UnknownAction { position, .. }
            | ParseError::ArityMismatch { position, .. }
            | ParseError::BadLiteral { position, .. }
            | ParseError::UnbalancedQuote { position }
            | ParseError::Syntax { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    LParen,
    RParen,
    Comma,
    Eq,
    Sep,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

/// Removes surrounding whitespace and a markdown code fence, returning the
/// body and its byte offset in `text`.
fn strip_fence(text: &str) -> (&str, usize) {
    let start = text.len() - text.trim_start().len();
    let mut body = text.trim();
    let mut offset = start;
    if let Some(rest) = body.strip_prefix("```") {
        // The info string (```python) runs to the end of the first line.
        let skip = rest.find('\n').map(|i| i + 1).unwrap_or(rest.len());
        offset += 3 + skip;
        body = &rest[skip..];
        if let Some(inner) = body.trim_end().strip_suffix("```") {
            body = inner;
        }
        let lead = body.len() - body.trim_start().len();
        offset += lead;
        body = body.trim();
    }
    (body, offset)
}

fn lex(src: &str, base: usize) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < src.len() {
        let c = src[i..].chars().next().expect("in bounds");
        let pos = base + i;
        match c {
            '\n' | ';' => {
                out.push(Token { tok: Tok::Sep, pos });
                i += 1;
            }
            c if c.is_whitespace() => i += c.len_utf8(),
            '(' => {
                out.push(Token { tok: Tok::LParen, pos });
                i += 1;
            }
            ')' => {
                out.push(Token { tok: Tok::RParen, pos });
                i += 1;
            }
            ',' => {
                out.push(Token { tok: Tok::Comma, pos });
                i += 1;
            }
            '=' => {
                out.push(Token { tok: Tok::Eq, pos });
                i += 1;
            }
            '\'' => {
                let (s, len) = lex_string(&src[i..], pos)?;
                out.push(Token { tok: Tok::Str(s), pos });
                i += len;
            }
            '"' => return Err(ParseError::BadLiteral { position: pos, detail: "strings use single quotes".into() }),
            '-' | '0'..='9' | '.' => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'.') {
                    j += 1;
                }
                out.push(Token { tok: Tok::Number(src[i..j].to_string()), pos });
                i = j;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                out.push(Token { tok: Tok::Ident(src[i..j].to_string()), pos });
                i = j;
            }
            other => {
                return Err(ParseError::Syntax { position: pos, detail: format!("unexpected character {other:?}") })
            }
        }
    }
    Ok(out)
}

/// Lexes a single-quoted string at the start of `src`; returns the decoded
/// value and the number of bytes consumed.
fn lex_string(src: &str, pos: usize) -> Result<(String, usize), ParseError> {
    let mut out = String::new();
    let mut chars = src.char_indices().skip(1);
    while let Some((i, c)) = chars.next() {
        match c {
            '\'' => return Ok((out, i + 1)),
            '\\' => {
                let Some((j, e)) = chars.next() else { break };
                let bad = |detail: &str| ParseError::BadLiteral { position: pos + j, detail: detail.to_string() };
                match e {
                    '\\' => out.push('\\'),
                    '\'' => out.push('\''),
                    'n' => out.push('\n'),
                    't' => out.push('\t'),
                    'r' => out.push('\r'),
                    '0' => out.push('\0'),
                    'u' => {
                        if !matches!(chars.next(), Some((_, '{'))) {
                            return Err(bad("expected `{` after \\u"));
                        }
                        let mut hex = String::new();
                        loop {
                            match chars.next() {
                                Some((_, '}')) => break,
                                Some((_, h)) if h.is_ascii_hexdigit() && hex.len() < 6 => hex.push(h),
                                Some(_) => return Err(bad("malformed \\u{...} escape")),
                                None => return Err(ParseError::UnbalancedQuote { position: pos }),
                            }
                        }
                        let ch = u32::from_str_radix(&hex, 16)
                            .ok()
                            .and_then(char::from_u32)
                            .ok_or_else(|| bad("invalid code point"))?;
                        out.push(ch);
                    }
                    _ => return Err(bad(&format!("unknown escape \\{e}"))),
                }
            }
            c => out.push(c),
        }
    }
    Err(ParseError::UnbalancedQuote { position: pos })
}

#[derive(Debug)]
enum Lit {
    Number(String),
    Str(String),
}

#[derive(Debug)]
struct Arg {
    keyword: Option<String>,
    value: Lit,
    pos: usize,
}

struct Call {
    name: String,
    pos: usize,
    args: Vec<Arg>,
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|t| t.pos).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.i).cloned();
        self.i += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let pos = self.pos();
        match self.next() {
            Some(t) if t.tok == want => Ok(()),
            _ => Err(ParseError::Syntax { position: pos, detail: format!("expected {what}") }),
        }
    }

    fn skip_seps(&mut self) -> usize {
        let mut n = 0;
        while self.peek() == Some(&Tok::Sep) {
            self.i += 1;
            n += 1;
        }
        n
    }

    fn literal(&mut self) -> Result<(Lit, usize), ParseError> {
        let pos = self.pos();
        match self.next().map(|t| t.tok) {
            Some(Tok::Number(n)) => Ok((Lit::Number(n), pos)),
            Some(Tok::Str(s)) => Ok((Lit::Str(s), pos)),
            _ => Err(ParseError::Syntax { position: pos, detail: "expected a literal".into() }),
        }
    }

    fn call(&mut self) -> Result<Call, ParseError> {
        let pos = self.pos();
        let name = match self.next().map(|t| t.tok) {
            Some(Tok::Ident(name)) => name,
            _ => return Err(ParseError::Syntax { position: pos, detail: "expected an action name".into() }),
        };
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.i += 1;
            return Ok(Call { name, pos, args });
        }
        loop {
            let arg_pos = self.pos();
            let arg = if let Some(Tok::Ident(kw)) = self.peek().cloned() {
                self.i += 1;
                self.expect(Tok::Eq, "`=` after keyword")?;
                let (value, _) = self.literal()?;
                Arg { keyword: Some(kw), value, pos: arg_pos }
            } else {
                let (value, pos) = self.literal()?;
                Arg { keyword: None, value, pos }
            };
            args.push(arg);
            let pos = self.pos();
            match self.next().map(|t| t.tok) {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => break,
                _ => return Err(ParseError::Syntax { position: pos, detail: "expected `,` or `)`".into() }),
            }
        }
        Ok(Call { name, pos, args })
    }
}

fn bad(pos: usize, detail: impl Into<String>) -> ParseError {
    ParseError::BadLiteral { position: pos, detail: detail.into() }
}

fn coord(arg: &Arg) -> Result<u32, ParseError> {
    match &arg.value {
        Lit::Number(n) if n.bytes().all(|b| b.is_ascii_digit()) => {
            n.parse().map_err(|_| bad(arg.pos, format!("coordinate `{n}` out of range")))
        }
        Lit::Number(n) => Err(bad(arg.pos, format!("coordinate `{n}` is not a non-negative integer"))),
        Lit::Str(_) => Err(bad(arg.pos, "expected an integer, found a string")),
    }
}

fn signed(arg: &Arg) -> Result<i64, ParseError> {
    match &arg.value {
        Lit::Number(n) => {
            let digits = n.strip_prefix('-').unwrap_or(n);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad(arg.pos, format!("`{n}` is not an integer")));
            }
            n.parse().map_err(|_| bad(arg.pos, format!("`{n}` out of range")))
        }
        Lit::Str(_) => Err(bad(arg.pos, "expected an integer, found a string")),
    }
}

fn duration(arg: &Arg) -> Result<f64, ParseError> {
    let Lit::Number(n) = &arg.value else {
        return Err(bad(arg.pos, "expected a number, found a string"));
    };
    let (int, frac) = match n.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (n.as_str(), None),
    };
    let int_ok = !int.is_empty() && int.bytes().all(|b| b.is_ascii_digit());
    let frac_ok = frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()));
    if !int_ok || !frac_ok {
        return Err(bad(arg.pos, format!("duration `{n}` is not a non-negative decimal")));
    }
    let d: f64 = n.parse().map_err(|_| bad(arg.pos, format!("bad duration `{n}`")))?;
    if !d.is_finite() {
        return Err(bad(arg.pos, "duration out of range"));
    }
    Ok(d)
}

fn string(arg: &Arg) -> Result<String, ParseError> {
    match &arg.value {
        Lit::Str(s) => Ok(s.clone()),
        Lit::Number(n) => Err(bad(arg.pos, format!("expected a quoted string, found `{n}`"))),
    }
}

fn build(call: Call) -> Result<Action, ParseError> {
    let Call { name, pos, args } = call;
    if let Some(kw) =
        args.iter().find(|a| a.keyword.is_some() && !(name == "dragTo" && a.keyword.as_deref() == Some("duration")))
    {
        return Err(ParseError::Syntax {
            position: kw.pos,
            detail: format!("`{name}` takes no keyword `{}`", kw.keyword.as_deref().unwrap_or("")),
        });
    }
    let arity = |expected: &'static str, ok: bool| -> Result<(), ParseError> {
        if ok {
            Ok(())
        } else {
            Err(ParseError::ArityMismatch { name: name.clone(), expected, found: args.len(), position: pos })
        }
    };
    let action = match name.as_str() {
        "moveTo" | "click" | "doubleClick" | "rightClick" => {
            arity("2 (x, y)", args.len() == 2)?;
            let (x, y) = (coord(&args[0])?, coord(&args[1])?);
            match name.as_str() {
                "moveTo" => Action::MoveTo { x, y },
                "click" => Action::Click { x, y },
                "doubleClick" => Action::DoubleClick { x, y },
                _ => Action::RightClick { x, y },
            }
        }
        "write" => {
            arity("1 (text)", args.len() == 1)?;
            Action::Write { text: string(&args[0])? }
        }
        "hotkey" => {
            arity("at least 2 keys", args.len() >= 2)?;
            Action::Hotkey { keys: args.iter().map(string).collect::<Result<_, _>>()? }
        }
        "scroll" => {
            arity("1 (amount)", args.len() == 1)?;
            Action::Scroll { amount: signed(&args[0])? }
        }
        "dragTo" => {
            let positional: Vec<&Arg> = args.iter().filter(|a| a.keyword.is_none()).collect();
            let keyword: Vec<&Arg> = args.iter().filter(|a| a.keyword.is_some()).collect();
            arity("2 (x, y) and optional duration=", positional.len() == 2 && keyword.len() <= 1)?;
            let d = keyword.first().map(|a| duration(a)).transpose()?.unwrap_or(0.0);
            Action::DragTo { x: coord(positional[0])?, y: coord(positional[1])?, duration: d }
        }
        "mouseDown" | "mouseUp" => {
            arity("0", args.is_empty())?;
            if name == "mouseDown" {
                Action::MouseDown
            } else {
                Action::MouseUp
            }
        }
        "press" | "keyDown" | "keyUp" => {
            arity("1 (key)", args.len() == 1)?;
            let key = string(&args[0])?;
            match name.as_str() {
                "press" => Action::Press { key },
                "keyDown" => Action::KeyDown { key },
                _ => Action::KeyUp { key },
            }
        }
        _ => return Err(ParseError::UnknownAction { name, position: pos }),
    };
    Ok(action)
}

/// Parses a script. Surrounding whitespace and a markdown code fence are
/// stripped first; an empty body is the empty script.
pub fn parse(text: &str) -> Result<ActionScript, ParseError> {
    let (body, offset) = strip_fence(text);
    let toks = lex(body, offset)?;
    let mut p = Parser { toks, i: 0, end: offset + body.len() };
    let mut actions = Vec::new();
    p.skip_seps();
    while p.peek().is_some() {
        let call = p.call()?;
        actions.push(build(call)?);
        if p.peek().is_some() && p.skip_seps() == 0 {
            return Err(ParseError::Syntax {
                position: p.pos(),
                detail: "expected a newline or `;` between actions".into(),
            });
        }
    }
    Ok(ActionScript::new(actions))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(text: &str) -> Action {
        let s = parse(text).unwrap();
        assert_eq!(s.len(), 1, "{text}");
        s.actions.into_iter().next().unwrap()
    }

    #[test]
    fn documented_examples() {
        assert_eq!(one("moveTo(100, 150)"), Action::MoveTo { x: 100, y: 150 });
        assert_eq!(one("click(200, 220)"), Action::Click { x: 200, y: 220 });
        assert_eq!(one("write('Hello, world!')"), Action::Write { text: "Hello, world!".into() });
        assert_eq!(one("hotkey('ctrl', 'c')"), Action::Hotkey { keys: vec!["ctrl".into(), "c".into()] });
        assert_eq!(one("scroll(-200)"), Action::Scroll { amount: -200 });
        assert_eq!(one("dragTo(100, 200, duration=2)"), Action::DragTo { x: 100, y: 200, duration: 2.0 });
        assert_eq!(parse("mouseDown(); mouseUp()").unwrap().actions, vec![Action::MouseDown, Action::MouseUp]);
        assert_eq!(one("press('enter')"), Action::Press { key: "enter".into() });
        assert_eq!(one("keyDown('shift')"), Action::KeyDown { key: "shift".into() });
    }

    #[test]
    fn empty_and_blank() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("  \n ;\n").unwrap().is_empty());
        assert!(parse("```\n```").unwrap().is_empty());
    }

    #[test]
    fn unknown_action() {
        assert_eq!(parse("fly(1)"), Err(ParseError::UnknownAction { name: "fly".into(), position: 0 }));
        let err = parse("click(1, 2)\n  fly(1)").unwrap_err();
        assert_eq!(err, ParseError::UnknownAction { name: "fly".into(), position: 14 });
    }

    #[test]
    fn code_fence_is_stripped() {
        let fenced = "```python\nclick(10, 20)\nwrite('a')\n```";
        assert_eq!(parse(fenced).unwrap(), parse("click(10, 20)\nwrite('a')").unwrap());
        // Positions still refer to the original text.
        let err = parse("```\nfly(1)\n```").unwrap_err();
        assert_eq!(err.position(), 4);
    }

    #[test]
    fn literal_errors() {
        assert!(matches!(parse("click(1.5, 2)"), Err(ParseError::BadLiteral { position: 6, .. })));
        assert!(matches!(parse("click(-1, 2)"), Err(ParseError::BadLiteral { .. })));
        assert!(matches!(parse("write(\"hi\")"), Err(ParseError::BadLiteral { .. })));
        assert!(matches!(parse("write('a\\q')"), Err(ParseError::BadLiteral { .. })));
        assert!(matches!(parse("scroll('up')"), Err(ParseError::BadLiteral { .. })));
        assert!(matches!(parse("dragTo(1, 2, duration=-1)"), Err(ParseError::BadLiteral { .. })));
        assert!(matches!(parse("click(99999999999, 2)"), Err(ParseError::BadLiteral { .. })));
    }

    #[test]
    fn unbalanced_quote() {
        assert_eq!(parse("write('abc)"), Err(ParseError::UnbalancedQuote { position: 6 }));
        assert_eq!(parse("write('abc\\')"), Err(ParseError::UnbalancedQuote { position: 6 }));
    }

    #[test]
    fn arity() {
        assert!(matches!(parse("click(1)"), Err(ParseError::ArityMismatch { .. })));
        assert!(matches!(parse("hotkey('ctrl')"), Err(ParseError::ArityMismatch { .. })));
        assert!(matches!(parse("mouseDown(1)"), Err(ParseError::ArityMismatch { .. })));
        assert!(matches!(parse("dragTo(1, 2, 3)"), Err(ParseError::ArityMismatch { .. })));
        assert!(matches!(parse("click(x=1, y=2)"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn separators_and_strings() {
        let s = parse("write('a;b\\nc'); press('enter')\n\n click(0, 0);").unwrap();
        assert_eq!(
            s.actions,
            vec![
                Action::Write { text: "a;b\nc".into() },
                Action::Press { key: "enter".into() },
                Action::Click { x: 0, y: 0 }
            ]
        );
        assert_eq!(one("write('\\u{1f600}')"), Action::Write { text: "\u{1f600}".into() });
        assert_eq!(one("dragTo(1, 2)"), Action::DragTo { x: 1, y: 2, duration: 0.0 });
        assert_eq!(one("dragTo(1, 2, duration=0.25)"), Action::DragTo { x: 1, y: 2, duration: 0.25 });
    }

    #[test]
    fn missing_separator() {
        assert!(matches!(parse("click(1, 2) click(3, 4)"), Err(ParseError::Syntax { position: 12, .. })));
        assert!(matches!(parse("click(1, 2"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("click"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("click(1, 2) @"), Err(ParseError::Syntax { .. })));
    }
}
