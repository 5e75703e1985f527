use crate::error::{Diagnostic, ParseError};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    /// Lowercase-initial identifier.
    Ident(String),
    /// Uppercase- or underscore-initial identifier.
    Var(String),
    /// Single-quoted symbol.
    Quoted(String),
    /// Double-quoted text.
    Str(String),
    Int(i64),
    Dec(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Semi,
    Colon,
    /// `:-`
    Neck,
    /// `:=`
    DefNeck,
    /// `:~`
    DefeaterNeck,
    Eq,
    Lt,
    Plus,
    Minus,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Var(s) => format!("variable `{s}`"),
            Tok::Quoted(s) => format!("symbol '{s}'"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Int(i) => format!("number {i}"),
            Tok::Dec(d) => format!("number {d}"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.punct()),
        }
    }

    pub fn punct(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Neck => ":-",
            Tok::DefNeck => ":=",
            Tok::DefeaterNeck => ":~",
            Tok::Eq => "=",
            Tok::Lt => "<",
            Tok::Plus => "+",
            Tok::Minus => "-",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Byte offsets into the source.
    pub start: usize,
    pub end: usize,
}

pub fn tokenize(src: &str, origin: &str) -> Result<Vec<Token>, ParseError> {
    Lexer { src, chars: src.char_indices().collect(), pos: 0, line: 1, col: 1, origin }.run()
}

struct Lexer<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
    line: usize,
    col: usize,
    origin: &'a str,
}

impl Lexer<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).map(|c| c.1)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map(|c| c.0).unwrap_or(self.src.len())
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError { diagnostics: vec![Diagnostic { origin: self.origin.to_string(), line, col, message: msg.into() }] }
    }

    fn run(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (line, col, start) = (self.line, self.col, self.offset());
            let Some(c) = self.peek() else {
                out.push(Token { tok: Tok::Eof, line, col, start, end: start });
                return Ok(out);
            };
            let tok = match c {
                'a'..='z' => Tok::Ident(self.word()),
                'A'..='Z' | '_' => Tok::Var(self.word()),
                '0'..='9' => self.number(line, col)?,
                '\'' => Tok::Quoted(self.quoted('\'', line, col)?),
                '"' => Tok::Str(self.quoted('"', line, col)?),
                ':' => {
                    self.bump();
                    match self.peek() {
                        Some('-') => {
                            self.bump();
                            Tok::Neck
                        }
                        Some('=') => {
                            self.bump();
                            Tok::DefNeck
                        }
                        Some('~') => {
                            self.bump();
                            Tok::DefeaterNeck
                        }
                        _ => Tok::Colon,
                    }
                }
                _ => {
                    self.bump();
                    match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '[' => Tok::LBracket,
                        ']' => Tok::RBracket,
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        ',' => Tok::Comma,
                        '.' => Tok::Dot,
                        ';' => Tok::Semi,
                        '=' => Tok::Eq,
                        '<' => Tok::Lt,
                        '+' => Tok::Plus,
                        '-' => Tok::Minus,
                        other => return Err(self.error(line, col, format!("unexpected character {other:?}"))),
                    }
                }
            };
            out.push(Token { tok, line, col, start, end: self.offset() });
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '%' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn number(&mut self, line: usize, col: usize) -> Result<Tok, ParseError> {
        let mut s = String::new();
        while let Some(c @ '0'..='9') = self.peek() {
            s.push(c);
            self.bump();
        }
        let mut decimal = false;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            decimal = true;
            s.push('.');
            self.bump();
            while let Some(c @ '0'..='9') = self.peek() {
                s.push(c);
                self.bump();
            }
        }
        if matches!(self.peek(), Some('e' | 'E'))
            && (self.peek_at(1).is_some_and(|c| c.is_ascii_digit())
                || (matches!(self.peek_at(1), Some('-' | '+')) && self.peek_at(2).is_some_and(|c| c.is_ascii_digit())))
        {
            decimal = true;
            s.push('e');
            self.bump();
            if let Some(c @ ('-' | '+')) = self.peek() {
                s.push(c);
                self.bump();
            }
            while let Some(c @ '0'..='9') = self.peek() {
                s.push(c);
                self.bump();
            }
        }
        if decimal {
            s.parse().map(Tok::Dec).map_err(|_| self.error(line, col, format!("malformed number `{s}`")))
        } else {
            s.parse().map(Tok::Int).map_err(|_| self.error(line, col, format!("integer `{s}` out of range")))
        }
    }

    fn quoted(&mut self, quote: char, line: usize, col: usize) -> Result<String, ParseError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error(line, col, "unterminated quoted literal")),
                Some(c) if c == quote => return Ok(s),
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some(c @ ('\\' | '\'' | '"')) => s.push(c),
                    Some(c) => return Err(self.error(self.line, self.col - 1, format!("unknown escape `\\{c}`"))),
                    None => return Err(self.error(line, col, "unterminated quoted literal")),
                },
                Some(c) => s.push(c),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s, "t").unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn necks_and_numbers() {
        assert_eq!(
            toks("p(1.5, 2) :- q. % comment\n r := s."),
            vec![
                Tok::Ident("p".into()),
                Tok::LParen,
                Tok::Dec(1.5),
                Tok::Comma,
                Tok::Int(2),
                Tok::RParen,
                Tok::Neck,
                Tok::Ident("q".into()),
                Tok::Dot,
                Tok::Ident("r".into()),
                Tok::DefNeck,
                Tok::Ident("s".into()),
                Tok::Dot,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn integer_before_clause_dot() {
        assert_eq!(toks("p(1)."), vec![
            Tok::Ident("p".into()),
            Tok::LParen,
            Tok::Int(1),
            Tok::RParen,
            Tok::Dot,
            Tok::Eof
        ]);
    }

    #[test]
    fn positions_are_one_based() {
        let t = tokenize("a.\n  b", "t").unwrap();
        assert_eq!((t[2].line, t[2].col), (2, 3));
    }

    #[test]
    fn unterminated_string_reports_location() {
        let e = tokenize("p(\"abc", "f.ctr").unwrap_err();
        assert_eq!(e.diagnostics[0].to_string(), "f.ctr:1:3: unterminated quoted literal");
    }
}
