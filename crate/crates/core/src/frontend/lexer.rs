use super::diag::{Diagnostic, ErrorKind, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    /// Decimal literal kept as written so it can be folded exactly.
    Double(String),
    Str(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

// Longest first.
const PUNCTS: &[&str] = &[
    "...", "..", "==", "!=", "<=", ">=", "&&", "||", "->", "=>", "<-", "::", "w/", "(", ")", "[", "]", "{", "}", ",",
    ";", ":", ".", "=", "<", ">", "+", "-", "*", "/", "%", "^", "@", "!", "'", "?", "|", "&", "_", "$",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let span = Span::new(line, col);
        if c.is_ascii_alphabetic() || (c == '_' && chars.get(i + 1).is_some_and(|n| n.is_ascii_alphanumeric())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Ident(word), span });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let mut is_double = false;
            // `1..3` is a range, not a decimal.
            if i < chars.len() && chars[i] == '.' && chars.get(i + 1) != Some(&'.') {
                is_double = true;
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = (i, line, col);
                bump!();
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    bump!();
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    is_double = true;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                } else {
                    (i, line, col) = save;
                }
            }
            let text: String = chars[start..i].iter().collect();
            if is_double {
                out.push(Token { tok: Tok::Double(text), span });
            } else {
                let value = text.parse::<i64>().map_err(|_| {
                    Diagnostic::error(span, ErrorKind::Syntax(format!("integer literal `{text}` out of range")))
                })?;
                out.push(Token { tok: Tok::Int(value), span });
            }
            continue;
        }
        if c == '"' || (c == '$' && chars.get(i + 1) == Some(&'"')) {
            if c == '$' {
                bump!();
            }
            bump!();
            let start = i;
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\\' {
                    bump!();
                }
                if i < chars.len() {
                    bump!();
                }
            }
            if i >= chars.len() {
                return Err(Diagnostic::error(span, ErrorKind::Syntax("unterminated string literal".into())));
            }
            let text: String = chars[start..i].iter().collect();
            bump!();
            out.push(Token { tok: Tok::Str(text), span });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                for _ in 0..p.chars().count() {
                    bump!();
                }
                out.push(Token { tok: Tok::Punct(p), span });
            }
            None => {
                return Err(Diagnostic::error(span, ErrorKind::Syntax(format!("unexpected character `{c}`"))));
            }
        }
    }
    out.push(Token { tok: Tok::Eof, span: Span::new(line, col) });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn ranges_are_not_decimals() {
        assert_eq!(toks("0..3"), vec![Tok::Int(0), Tok::Punct(".."), Tok::Int(3), Tok::Eof]);
        assert_eq!(toks("4.0"), vec![Tok::Double("4.0".into()), Tok::Eof]);
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("// hi\n  H(q);").unwrap();
        assert_eq!(t[0].tok, Tok::Ident("H".into()));
        assert_eq!((t[0].span.line, t[0].span.col), (2, 3));
    }

    #[test]
    fn bad_character() {
        assert!(tokenize("H(q) #").is_err());
    }
}
