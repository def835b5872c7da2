use super::{AspError, AspProgram, AspRule, Atom, BodyItem, CmpOp, Comparison, Const, GroundAtom, Result, Term, SCALE_COMMENT};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Dot,
    If,
    Op(CmpOp),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexed {
    tokens: Vec<Spanned>,
    scale_exponent: Option<u32>,
    end: (usize, usize),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> AspError {
    AspError::Syntax { line, column, message: message.into() }
}

fn lex(text: &str) -> Result<Lexed> {
    let mut tokens = Vec::new();
    let mut scale_exponent = None;
    let mut last = (1, 1);
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let column = i + 1;
            let c = chars[i];
            let push = |tokens: &mut Vec<Spanned>, tok| tokens.push(Spanned { tok, line: lineno, column });
            match c {
                ' ' | '\t' | '\r' => {
                    i += 1;
                    continue;
                }
                '%' => {
                    let comment: String = chars[i..].iter().collect();
                    if let Some(rest) = comment.strip_prefix(SCALE_COMMENT.trim_end()) {
                        let d = rest.trim().parse().map_err(|_| {
                            syntax(lineno, column, format!("invalid scale exponent `{}`", rest.trim()))
                        })?;
                        scale_exponent = Some(d);
                    }
                    break;
                }
                '(' => push(&mut tokens, Tok::LParen),
                ')' => push(&mut tokens, Tok::RParen),
                ',' => push(&mut tokens, Tok::Comma),
                '.' => push(&mut tokens, Tok::Dot),
                ':' if chars.get(i + 1) == Some(&'-') => {
                    push(&mut tokens, Tok::If);
                    i += 1;
                }
                '!' if chars.get(i + 1) == Some(&'=') => {
                    push(&mut tokens, Tok::Op(CmpOp::Ne));
                    i += 1;
                }
                '<' | '>' => {
                    let eq = chars.get(i + 1) == Some(&'=');
                    let op = match (c, eq) {
                        ('<', true) => CmpOp::Le,
                        ('<', false) => CmpOp::Lt,
                        ('>', true) => CmpOp::Ge,
                        _ => CmpOp::Gt,
                    };
                    push(&mut tokens, Tok::Op(op));
                    i += eq as usize;
                }
                '=' => push(&mut tokens, Tok::Op(CmpOp::Eq)),
                c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) => {
                    let start = i;
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let lexeme: String = chars[start..i].iter().collect();
                    let n = lexeme.parse().map_err(|_| syntax(lineno, column, format!("integer `{lexeme}` out of range")))?;
                    push(&mut tokens, Tok::Int(n));
                    last = (lineno, i + 1);
                    continue;
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    let word: String = chars[start..i].iter().collect();
                    let tok = if word == "True" {
                        Tok::Ident("true".into())
                    } else if c.is_ascii_uppercase() || c == '_' {
                        Tok::Var(word)
                    } else {
                        Tok::Ident(word)
                    };
                    push(&mut tokens, tok);
                    last = (lineno, i + 1);
                    continue;
                }
                other => return Err(syntax(lineno, column, format!("unexpected character `{other}`"))),
            }
            i += 1;
            last = (lineno, i + 1);
        }
    }
    Ok(Lexed { tokens, scale_exponent, end: last })
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + offset).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.tokens.get(self.pos).map(|s| (s.line, s.column)).unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> AspError {
        let (line, column) = self.here();
        syntax(line, column, message)
    }

    fn next(&mut self) -> Option<Tok> {
        let tok = self.peek().cloned();
        self.pos += 1;
        tok
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn rule(&mut self) -> Result<AspRule> {
        let head = self.atom()?;
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::If) {
            self.pos += 1;
            loop {
                body.push(self.body_item()?);
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Dot, "`.` at end of rule")?;
        Ok(AspRule { head, body })
    }

    fn body_item(&mut self) -> Result<BodyItem> {
        if matches!(self.peek(), Some(Tok::Ident(w)) if w == "not") && matches!(self.peek_at(1), Some(Tok::Ident(_))) {
            self.pos += 1;
            return Ok(BodyItem::Neg(self.atom()?));
        }
        let is_atom = matches!(self.peek(), Some(Tok::Ident(_))) && !matches!(self.peek_at(1), Some(Tok::Op(_)));
        if is_atom {
            return Ok(BodyItem::Pos(self.atom()?));
        }
        let lhs = self.term()?;
        let op = match self.next() {
            Some(Tok::Op(op)) => op,
            _ => {
                self.pos -= 1;
                return Err(self.error("expected comparison operator"));
            }
        };
        let rhs = self.term()?;
        Ok(BodyItem::Cmp(Comparison { lhs, op, rhs }))
    }

    fn atom(&mut self) -> Result<Atom> {
        let predicate = match self.peek() {
            Some(Tok::Ident(p)) => p.clone(),
            _ => return Err(self.error("expected predicate name")),
        };
        self.pos += 1;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            loop {
                args.push(self.term()?);
                match self.peek() {
                    Some(Tok::Comma) => self.pos += 1,
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected `,` or `)`")),
                }
            }
        }
        Ok(Atom { predicate, args })
    }

    fn term(&mut self) -> Result<Term> {
        let t = match self.peek() {
            Some(Tok::Var(v)) => Term::Var(v.clone()),
            Some(Tok::Ident(s)) => Term::Const(Const::Sym(s.clone())),
            Some(Tok::Int(n)) => Term::Const(Const::Int(*n)),
            _ => return Err(self.error("expected term")),
        };
        self.pos += 1;
        Ok(t)
    }
}

/// Parses program text and checks safety and stratification.
///
/// A `% scale_exponent: d` comment sets the scale; without one it is 0.
pub fn parse_program(text: &str) -> Result<AspProgram> {
    let lexed = lex(text)?;
    let mut parser = Parser { tokens: lexed.tokens, pos: 0, end: lexed.end };
    let mut rules = Vec::new();
    while parser.peek().is_some() {
        rules.push(parser.rule()?);
    }
    let program = AspProgram { rules, scale_exponent: lexed.scale_exponent.unwrap_or(0) };
    program.validate()?;
    Ok(program)
}

/// Parses a fact file: one ground atom per line, each terminated by `.`.
pub fn parse_facts(text: &str) -> Result<Vec<GroundAtom>> {
    let lexed = lex(text)?;
    let mut parser = Parser { tokens: lexed.tokens, pos: 0, end: lexed.end };
    let mut facts = Vec::new();
    while parser.peek().is_some() {
        let (line, column) = parser.here();
        let atom = parser.atom()?;
        parser.expect(Tok::Dot, "`.` after fact")?;
        let ground = atom.to_ground().ok_or_else(|| syntax(line, column, format!("fact `{atom}` is not ground")))?;
        facts.push(ground);
    }
    Ok(facts)
}
