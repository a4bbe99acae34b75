//! Hand-written lexer and recursive-descent parser for the program format.
//!
//! ```text
//! program   := statement*
//! statement := "#background" "." | [label ":"] rule
//! rule      := head [":-" body] "." | ":-" body "."
//! head      := atom ("|" atom)*
//! body      := literal ("," literal)*
//! literal   := ["not"] atom
//! atom      := name ["(" term ("," term)* ")"]
//! ```

use std::collections::HashMap;

use super::{Atom, Program, ProgramError, Rule, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    /// Lowercase identifier or integer.
    Name(String),
    /// Uppercase identifier.
    Var(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Pipe,
    Colon,
    If,
    Dot,
    Background,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) | Tok::Var(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Colon => "`:`".into(),
            Tok::If => "`:-`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Background => "`#background`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ProgramError {
    ProgramError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, ProgramError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |tok: Tok| {
            out.push(Spanned {
                tok,
                line: start_line,
                column: start_col,
            })
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => push(Tok::LParen),
            ')' => push(Tok::RParen),
            '[' => push(Tok::LBracket),
            ']' => push(Tok::RBracket),
            ',' => push(Tok::Comma),
            '|' => push(Tok::Pipe),
            '.' => {
                if chars.get(i + 1) == Some(&'.') {
                    return Err(syntax(line, col, "interval terms `..` are not supported"));
                }
                push(Tok::Dot)
            }
            ':' => {
                if chars.get(i + 1) == Some(&'-') {
                    push(Tok::If);
                    i += 2;
                    col += 2;
                    continue;
                }
                if chars.get(i + 1) == Some(&'~') {
                    return Err(syntax(line, col, "weak constraints are not supported"));
                }
                push(Tok::Colon)
            }
            '#' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                if word != "#background" {
                    return Err(syntax(line, col, format!("unsupported directive `{word}`")));
                }
                push(Tok::Background);
                col += j - i;
                i = j;
                continue;
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                if word.starts_with('_') {
                    return Err(syntax(line, col, "anonymous variables are not supported"));
                }
                let numeric = word.chars().next().is_some_and(|c| c.is_ascii_digit());
                if numeric && !word.chars().all(|c| c.is_ascii_digit()) {
                    return Err(syntax(line, col, format!("malformed constant `{word}`")));
                }
                if word.starts_with(|c: char| c.is_ascii_uppercase()) {
                    push(Tok::Var(word));
                } else {
                    push(Tok::Name(word));
                }
                col += j - i;
                i = j;
                continue;
            }
            '{' | '}' => {
                return Err(syntax(line, col, "choice rules and aggregates are not supported"))
            }
            '=' | '<' | '>' | '!' | '+' | '-' | '*' | '/' | '\\' => {
                return Err(syntax(line, col, "arithmetic and comparisons are not supported"))
            }
            ';' => return Err(syntax(line, col, "use `|` for disjunction and `,` in bodies")),
            '"' => return Err(syntax(line, col, "string constants are not supported")),
            other => return Err(syntax(line, col, format!("unexpected character `{other}`"))),
        }
        i += 1;
        col += 1;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> ProgramError {
        let t = self.peek();
        syntax(
            t.line,
            t.column,
            format!("expected {expected}, found {}", t.tok.describe()),
        )
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ProgramError> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(expected))
        }
    }

    /// Length in tokens of a label starting at the cursor, if there is one.
    /// A label is `name` or `name[item, ...]` followed by a single `:`.
    fn label_len(&self) -> Option<usize> {
        if !matches!(self.peek_at(0), Tok::Name(_)) {
            return None;
        }
        let mut k = 1;
        if self.peek_at(1) == &Tok::LBracket {
            k = 2;
            loop {
                match self.peek_at(k) {
                    Tok::Name(_) | Tok::Var(_) | Tok::Comma => k += 1,
                    Tok::RBracket => {
                        k += 1;
                        break;
                    }
                    _ => return None,
                }
            }
        }
        (self.peek_at(k) == &Tok::Colon).then_some(k)
    }

    fn label(&mut self, len: usize) -> String {
        let mut s = String::new();
        for _ in 0..len {
            match self.bump().tok {
                Tok::Name(n) | Tok::Var(n) => s.push_str(&n),
                Tok::LBracket => s.push('['),
                Tok::RBracket => s.push(']'),
                Tok::Comma => s.push(','),
                _ => unreachable!("label_len only admits label tokens"),
            }
        }
        self.bump(); // ':'
        s
    }

    fn atom(&mut self) -> Result<Atom, ProgramError> {
        let t = self.bump();
        let predicate = match t.tok {
            Tok::Name(n) if !n.starts_with(|c: char| c.is_ascii_digit()) => n,
            Tok::Var(v) => {
                return Err(syntax(
                    t.line,
                    t.column,
                    format!("predicate names must start lowercase, found `{v}`"),
                ))
            }
            other => {
                return Err(syntax(
                    t.line,
                    t.column,
                    format!("expected an atom, found {}", other.describe()),
                ))
            }
        };
        let mut args = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.bump();
            loop {
                let t = self.bump();
                let term = match t.tok {
                    Tok::Name(n) => Term::Constant(n),
                    Tok::Var(v) => Term::Variable(v),
                    other => {
                        return Err(syntax(
                            t.line,
                            t.column,
                            format!("expected a term, found {}", other.describe()),
                        ))
                    }
                };
                if self.peek().tok == Tok::LParen {
                    let p = self.peek();
                    return Err(syntax(p.line, p.column, "function symbols are not supported"));
                }
                args.push(term);
                match self.bump().tok {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    _ => {
                        self.pos -= 1;
                        return Err(self.error_here("`,` or `)`"));
                    }
                }
            }
        }
        Ok(Atom { predicate, args })
    }

    fn body(&mut self, pos: &mut Vec<Atom>, neg: &mut Vec<Atom>) -> Result<(), ProgramError> {
        loop {
            let negated = matches!(&self.peek().tok, Tok::Name(n) if n == "not")
                && matches!(self.peek_at(1), Tok::Name(_) | Tok::Var(_));
            if negated {
                self.bump();
            }
            let atom = self.atom()?;
            let target = if negated { &mut *neg } else { &mut *pos };
            if !target.contains(&atom) {
                target.push(atom);
            }
            if self.peek().tok == Tok::Comma {
                self.bump();
            } else {
                return Ok(());
            }
        }
    }

    fn rule(&mut self, id: String) -> Result<Rule, ProgramError> {
        let mut head = Vec::new();
        if self.peek().tok != Tok::If {
            loop {
                let atom = self.atom()?;
                if !head.contains(&atom) {
                    head.push(atom);
                }
                if self.peek().tok == Tok::Pipe {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        let (mut pos_body, mut neg_body) = (Vec::new(), Vec::new());
        if self.peek().tok == Tok::If {
            self.bump();
            self.body(&mut pos_body, &mut neg_body)?;
        }
        self.expect(Tok::Dot, "`.`")?;
        Ok(Rule {
            id,
            head,
            pos_body,
            neg_body,
        })
    }
}

/// Parses program text. Unlabeled rules are named `r<k>` after their 1-based
/// position; rules after a `#background.` directive are background rules.
pub fn parse_program(text: &str) -> Result<Program, ProgramError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut program = Program::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut in_background = false;

    while p.peek().tok != Tok::Eof {
        if p.peek().tok == Tok::Background {
            p.bump();
            p.expect(Tok::Dot, "`.` after `#background`")?;
            in_background = true;
            continue;
        }
        let line = p.peek().line;
        let position = program.rules.len() + 1;
        let id = match p.label_len() {
            Some(len) => p.label(len),
            None => format!("r{position}"),
        };
        if seen.insert(id.clone(), line).is_some() {
            return Err(ProgramError::DuplicateLabel { label: id, line });
        }
        let rule = p.rule(id)?;
        if let Some(variable) = rule.unsafe_variable() {
            return Err(ProgramError::UnsafeRule {
                rule: rule.id,
                variable,
            });
        }
        if in_background {
            program.background.insert(rule.id.clone());
        }
        program.rules.push(rule);
    }
    Ok(program)
}
