use super::{ParseError, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Token {
    Num(String),
    Ident(String),
    /// `$n`: a variable written by raw index.
    RawVar(u32),
    Str(String),
    Plus,
    PlusPlus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Le,
    Ge,
    EqSign,
    Ne,
    Comma,
    Semi,
    Colon,
    Prime,
    Assign,
    Amp,
    Bar,
    Bang,
    Arrow,
    DArrow,
    Question,
    Dot,
    Turnstile,
    Hash,
    Eof,
}

impl Token {
    pub fn describe(&self) -> String {
        match self {
            Token::Num(n) => format!("number `{n}`"),
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::RawVar(i) => format!("variable `${i}`"),
            Token::Str(s) => format!("string \"{s}\""),
            Token::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Token::Plus => "+",
            Token::PlusPlus => "++",
            Token::Minus => "-",
            Token::Star => "*",
            Token::Slash => "/",
            Token::Caret => "^",
            Token::LParen => "(",
            Token::RParen => ")",
            Token::LBrace => "{",
            Token::RBrace => "}",
            Token::LBracket => "[",
            Token::RBracket => "]",
            Token::Lt => "<",
            Token::Gt => ">",
            Token::Le => "<=",
            Token::Ge => ">=",
            Token::EqSign => "=",
            Token::Ne => "!=",
            Token::Comma => ",",
            Token::Semi => ";",
            Token::Colon => ":",
            Token::Prime => "'",
            Token::Assign => ":=",
            Token::Amp => "&",
            Token::Bar => "|",
            Token::Bang => "!",
            Token::Arrow => "->",
            Token::DArrow => "<->",
            Token::Question => "?",
            Token::Dot => ".",
            Token::Turnstile => "|-",
            Token::Hash => "#",
            _ => "?",
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<(Token, SourceSpan)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut line_start = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let column = start - line_start + 1;
        let span = |end: usize| SourceSpan { start, end, line, column };
        let tok = if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            Token::Num(src[start..i].to_string())
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Token::Ident(src[start..i].to_string())
        } else if c == b'$' {
            i += 1;
            let digits = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[digits..i]
                .parse::<u32>()
                .map_err(|_| ParseError::new("expected a variable index after `$`", span(i.max(start + 1))))?;
            Token::RawVar(n)
        } else if c == b'"' {
            i += 1;
            let body = i;
            while i < bytes.len() && bytes[i] != b'"' && bytes[i] != b'\n' {
                i += 1;
            }
            if i >= bytes.len() || bytes[i] != b'"' {
                return Err(ParseError::new("unterminated string", span(i)));
            }
            let s = src[body..i].to_string();
            i += 1;
            Token::Str(s)
        } else {
            let rest = &src[i..];
            let (tok, len) = if rest.starts_with("<->") {
                (Token::DArrow, 3)
            } else if rest.starts_with("<=") {
                (Token::Le, 2)
            } else if rest.starts_with(">=") {
                (Token::Ge, 2)
            } else if rest.starts_with("!=") {
                (Token::Ne, 2)
            } else if rest.starts_with(":=") {
                (Token::Assign, 2)
            } else if rest.starts_with("->") {
                (Token::Arrow, 2)
            } else if rest.starts_with("|-") {
                (Token::Turnstile, 2)
            } else if rest.starts_with("++") {
                (Token::PlusPlus, 2)
            } else {
                let t = match c {
                    b'+' => Token::Plus,
                    b'-' => Token::Minus,
                    b'*' => Token::Star,
                    b'/' => Token::Slash,
                    b'^' => Token::Caret,
                    b'(' => Token::LParen,
                    b')' => Token::RParen,
                    b'{' => Token::LBrace,
                    b'}' => Token::RBrace,
                    b'[' => Token::LBracket,
                    b']' => Token::RBracket,
                    b'<' => Token::Lt,
                    b'>' => Token::Gt,
                    b'=' => Token::EqSign,
                    b',' => Token::Comma,
                    b';' => Token::Semi,
                    b':' => Token::Colon,
                    b'\'' => Token::Prime,
                    b'&' => Token::Amp,
                    b'|' => Token::Bar,
                    b'!' => Token::Bang,
                    b'?' => Token::Question,
                    b'.' => Token::Dot,
                    b'#' => Token::Hash,
                    _ => {
                        let ch = src[i..].chars().next().unwrap_or('?');
                        return Err(ParseError::new(
                            format!("unexpected character `{ch}`"),
                            SourceSpan { start, end: start + ch.len_utf8(), line, column },
                        ));
                    }
                };
                (t, 1)
            };
            i += len;
            tok
        };
        out.push((tok, span(i)));
    }
    let column = i - line_start + 1;
    out.push((Token::Eof, SourceSpan { start: i, end: i, line, column }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<Token> {
        tokenize(s).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn multi_char_operators() {
        assert_eq!(
            kinds("<-> <= -> |- ++ := !="),
            vec![
                Token::DArrow,
                Token::Le,
                Token::Arrow,
                Token::Turnstile,
                Token::PlusPlus,
                Token::Assign,
                Token::Ne,
                Token::Eof
            ]
        );
    }

    #[test]
    fn comments_and_spans() {
        let toks = tokenize("// header\n  x' = 0.5").unwrap();
        assert_eq!(toks[0].0, Token::Ident("x".into()));
        assert_eq!(toks[0].1.line, 2);
        assert_eq!(toks[0].1.column, 3);
        assert_eq!(toks[3].0, Token::Num("0.5".into()));
    }

    #[test]
    fn rejects_unknown_character() {
        let err = tokenize("x @ y").unwrap_err();
        assert_eq!(err.span.column, 3);
    }
}
