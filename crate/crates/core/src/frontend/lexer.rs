use serde::Serialize;

use super::ast::SourceLocation;
use super::error::FrontendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TokenKind {
    Identifier,
    IntLiteral,
    Keyword,
    Punctuator,
    EndOfFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub loc: SourceLocation,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        matches!(self.kind, TokenKind::Keyword | TokenKind::Punctuator) && self.text == text
    }
}

pub const KEYWORDS: &[&str] = &["int", "void", "if", "else", "while", "for", "return"];

// Longest first so that maximal munch falls out of a linear scan.
const PUNCTUATORS: &[&str] = &[
    "+=", "-=", "*=", "/=", "<=", ">=", "==", "!=", "&&", "||", "(", ")", "{", "}", "[", "]", ";",
    ",", "=", "+", "-", "*", "/", "%", "<", ">", "!", "&",
];

struct Cursor<'a> {
    src: &'a str,
    file: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn loc(&self) -> SourceLocation {
        SourceLocation::new(self.file, self.line, self.col, self.pos)
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn bump_n(&mut self, bytes: usize) {
        let end = self.pos + bytes;
        while self.pos < end {
            self.bump();
        }
    }
}

/// Splits MiniC source text into tokens. Comments and whitespace are dropped;
/// the result always ends with a single `EndOfFile` token.
pub fn tokenize(source: &str, file: &str) -> Result<Vec<Token>, FrontendError> {
    let mut cur = Cursor {
        src: source,
        file,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let rest = cur.rest();
        if rest.starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if let Some(body) = rest.strip_prefix("/*") {
            let start = cur.loc();
            match body.find("*/") {
                Some(end) => cur.bump_n(end + 4),
                None => {
                    return Err(FrontendError::Lexical {
                        loc: start,
                        message: "unterminated block comment".into(),
                    })
                }
            }
            continue;
        }

        let loc = cur.loc();
        if c.is_ascii_alphabetic() || c == '_' {
            let len = rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                .unwrap_or(rest.len());
            let text = &rest[..len];
            let kind = if KEYWORDS.contains(&text) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            tokens.push(Token {
                kind,
                text: text.to_string(),
                loc,
            });
            cur.bump_n(len);
        } else if c.is_ascii_digit() {
            let len = rest
                .find(|c: char| !c.is_ascii_digit())
                .unwrap_or(rest.len());
            let text = &rest[..len];
            if text.parse::<i64>().is_err() {
                return Err(FrontendError::Lexical {
                    loc,
                    message: format!("integer literal '{text}' does not fit in 64 bits"),
                });
            }
            if rest[len..].starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
                return Err(FrontendError::Lexical {
                    loc,
                    message: format!("invalid suffix on integer literal '{text}'"),
                });
            }
            tokens.push(Token {
                kind: TokenKind::IntLiteral,
                text: text.to_string(),
                loc,
            });
            cur.bump_n(len);
        } else if let Some(p) = PUNCTUATORS.iter().find(|p| rest.starts_with(**p)) {
            tokens.push(Token {
                kind: TokenKind::Punctuator,
                text: p.to_string(),
                loc,
            });
            cur.bump_n(p.len());
        } else {
            return Err(FrontendError::Lexical {
                loc,
                message: format!("unexpected character '{c}'"),
            });
        }
    }

    tokens.push(Token {
        kind: TokenKind::EndOfFile,
        text: String::new(),
        loc: cur.loc(),
    });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src, "t.mc")
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.text))
            .collect()
    }

    #[test]
    fn simple_assignment() {
        use TokenKind::*;
        assert_eq!(
            kinds("x = 5;"),
            vec![
                (Identifier, "x".into()),
                (Punctuator, "=".into()),
                (IntLiteral, "5".into()),
                (Punctuator, ";".into()),
                (EndOfFile, "".into()),
            ]
        );
    }

    #[test]
    fn comments_produce_no_tokens() {
        let toks = tokenize("int i;\n// c\ni = 0;", "t.mc").unwrap();
        assert_eq!(toks.len(), 8);
        assert_eq!(toks[3].loc.line, 3);
        let toks = tokenize("a /* x\n y */ b", "t.mc").unwrap();
        assert_eq!(toks.len(), 3);
        assert_eq!(toks[1].loc.line, 2);
    }

    #[test]
    fn rejects_foreign_characters() {
        let err = tokenize("x @ y", "t.mc").unwrap_err();
        match err {
            FrontendError::Lexical { loc, .. } => assert_eq!((loc.line, loc.column), (1, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unterminated_block_comment() {
        assert!(matches!(
            tokenize("int x; /* oops", "t.mc"),
            Err(FrontendError::Lexical { .. })
        ));
    }

    #[test]
    fn maximal_munch() {
        let texts: Vec<_> = kinds("a<=b&&c+=1")
            .into_iter()
            .map(|(_, t)| t)
            .collect();
        assert_eq!(texts, ["a", "<=", "b", "&&", "c", "+=", "1", ""]);
    }

    #[test]
    fn literal_overflow() {
        assert!(tokenize("9223372036854775807", "t.mc").is_ok());
        assert!(tokenize("9223372036854775808", "t.mc").is_err());
    }
}
