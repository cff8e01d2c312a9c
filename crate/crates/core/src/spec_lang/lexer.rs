use super::SpecError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    /// Punctuation and operators, stored as their source text.
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Position just past the token, used for "after X" diagnostics.
    pub end_line: usize,
    pub end_col: usize,
}

// Longest first so that `<->` wins over `<-` and `<=`.
const SYMBOLS: &[&str] = &[
    "<->", "..", "<=", ">=", "!=", "->", "/\\", "\\/", "(", ")", "{", "}", ",", ":", ".", "|", "+", "-", "*", "/", "%",
    "=", "<", ">", "!",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, SpecError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '$' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let tok = if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let value = text.parse::<i64>().map_err(|_| SpecError::Syntax {
                line: start_line,
                col: start_col,
                msg: format!("integer literal `{text}` out of range"),
            })?;
            Tok::Int(value)
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
                return Err(SpecError::Syntax { line, col, msg: format!("unexpected character `{c}`") });
            };
            let n = sym.chars().count();
            i += n;
            col += n;
            Tok::Sym(sym)
        };
        out.push(Token { tok, line: start_line, col: start_col, end_line: line, end_col: col });
    }
    out.push(Token { tok: Tok::Eof, line, col, end_line: line, end_col: col });
    Ok(out)
}
