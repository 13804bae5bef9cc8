use super::SqlError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    /// Bare identifier or keyword, as written.
    Word(String),
    /// Double-quoted identifier.
    QuotedIdent(String),
    Number(String),
    Str(String),
    Comma,
    Dot,
    LParen,
    RParen,
    Semicolon,
    Star,
    Minus,
    Eq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub offset: usize,
}

impl Token {
    /// Case-insensitive keyword match; quoted identifiers never match.
    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.kind, TokenKind::Word(w) if w.eq_ignore_ascii_case(kw))
    }
}

pub fn tokenize(sql: &str) -> Result<Vec<Token>, SqlError> {
    let bytes = sql.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'-' if bytes.get(i + 1) == Some(&b'-') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'\'' => {
                let mut value = String::new();
                i += 1;
                loop {
                    match sql[i..].find('\'') {
                        None => return Err(SqlError::new("unterminated string literal", start)),
                        Some(rel) => {
                            value.push_str(&sql[i..i + rel]);
                            i += rel + 1;
                            if bytes.get(i) == Some(&b'\'') {
                                value.push('\'');
                                i += 1;
                            } else {
                                break;
                            }
                        }
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Str(value),
                    offset: start,
                });
                continue;
            }
            b'"' => {
                let rest = &sql[i + 1..];
                let end = rest
                    .find('"')
                    .ok_or_else(|| SqlError::new("unterminated quoted identifier", start))?;
                tokens.push(Token {
                    kind: TokenKind::QuotedIdent(rest[..end].to_string()),
                    offset: start,
                });
                i += end + 2;
                continue;
            }
            _ => {}
        }
        let (kind, len) = if c.is_ascii_alphabetic() || c == b'_' {
            let len = sql[i..]
                .bytes()
                .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_' || *b == b'$')
                .count();
            (TokenKind::Word(sql[i..i + len].to_string()), len)
        } else if c.is_ascii_digit() {
            let mut len = sql[i..].bytes().take_while(u8::is_ascii_digit).count();
            if bytes.get(i + len) == Some(&b'.')
                && bytes.get(i + len + 1).is_some_and(u8::is_ascii_digit)
            {
                len += 1 + sql[i + len + 1..]
                    .bytes()
                    .take_while(u8::is_ascii_digit)
                    .count();
            }
            (TokenKind::Number(sql[i..i + len].to_string()), len)
        } else {
            let next = bytes.get(i + 1).copied();
            match (c, next) {
                (b'<', Some(b'>')) => (TokenKind::NotEq, 2),
                (b'!', Some(b'=')) => (TokenKind::NotEq, 2),
                (b'<', Some(b'=')) => (TokenKind::LtEq, 2),
                (b'>', Some(b'=')) => (TokenKind::GtEq, 2),
                (b'<', _) => (TokenKind::Lt, 1),
                (b'>', _) => (TokenKind::Gt, 1),
                (b'=', _) => (TokenKind::Eq, 1),
                (b',', _) => (TokenKind::Comma, 1),
                (b'.', _) => (TokenKind::Dot, 1),
                (b'(', _) => (TokenKind::LParen, 1),
                (b')', _) => (TokenKind::RParen, 1),
                (b';', _) => (TokenKind::Semicolon, 1),
                (b'*', _) => (TokenKind::Star, 1),
                (b'-', _) => (TokenKind::Minus, 1),
                _ => {
                    let ch = sql[i..].chars().next().unwrap_or('?');
                    return Err(SqlError::new(format!("unexpected character `{ch}`"), start));
                }
            }
        };
        tokens.push(Token { kind, offset: start });
        i += len;
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(sql: &str) -> Vec<TokenKind> {
        tokenize(sql).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn strings_with_escaped_quotes() {
        assert_eq!(kinds("'it''s'"), vec![TokenKind::Str("it's".into())]);
    }

    #[test]
    fn operators_and_numbers() {
        assert_eq!(
            kinds("a<>1 AND b<=2.5"),
            vec![
                TokenKind::Word("a".into()),
                TokenKind::NotEq,
                TokenKind::Number("1".into()),
                TokenKind::Word("AND".into()),
                TokenKind::Word("b".into()),
                TokenKind::LtEq,
                TokenKind::Number("2.5".into()),
            ]
        );
    }

    #[test]
    fn comments_skipped_and_offsets_kept() {
        let toks = tokenize("-- hi\nSELECT x").unwrap();
        assert_eq!(toks[0].offset, 6);
        assert!(toks[0].is_keyword("select"));
    }

    #[test]
    fn unterminated_string_reports_offset() {
        let err = tokenize("SELECT 'abc").unwrap_err();
        assert_eq!(err.offset, 7);
    }
}
