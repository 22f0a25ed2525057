use super::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Spanned {
    pub tok: Tok,
    pub offset: usize,
}

pub(super) fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    _ => Tok::RParen,
                };
                out.push(Spanned { tok, offset: start });
                i += 1;
            }
            '0'..='9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    if i >= bytes.len() || !bytes[i].is_ascii_digit() {
                        return Err(ParseError {
                            kind: ParseErrorKind::MalformedNumber,
                            offset: start,
                        });
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                    // otherwise the 'e' belongs to a following identifier
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError {
                    kind: ParseErrorKind::MalformedNumber,
                    offset: start,
                })?;
                out.push(Spanned {
                    tok: Tok::Num(v),
                    offset: start,
                });
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(src[start..i].to_string()),
                    offset: start,
                });
            }
            _ => {
                return Err(ParseError {
                    kind: ParseErrorKind::UnexpectedChar(c),
                    offset: start,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_idents() {
        let toks = lex("2.5*sin(x1)+1e-3").unwrap();
        assert_eq!(toks[0].tok, Tok::Num(2.5));
        assert_eq!(toks[2].tok, Tok::Ident("sin".into()));
        assert_eq!(toks[4].tok, Tok::Ident("x1".into()));
        assert_eq!(toks.last().unwrap().tok, Tok::Num(1e-3));
    }

    #[test]
    fn trailing_dot_is_malformed() {
        let err = lex("1.").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MalformedNumber);
        assert_eq!(err.offset, 0);
    }

    #[test]
    fn e_followed_by_ident_not_consumed() {
        // "2e" with no digits: the 'e' lexes as an identifier
        let toks = lex("2e").unwrap();
        assert_eq!(toks[0].tok, Tok::Num(2.0));
        assert_eq!(toks[1].tok, Tok::Ident("e".into()));
    }

    #[test]
    fn bad_character_offset() {
        let err = lex("1+#").unwrap_err();
        assert_eq!(err.offset, 2);
    }
}
