//! Shared low-level parsing helpers: a position-tracking tokenizer for the
//! word syntax and the bracketed matrix/vector syntax used by the CLI and the
//! declaration files.

use num_bigint::BigInt;

use crate::error::{Error, Result};

/// A token with its 1-based source position.
#[derive(Debug, Clone, PartialEq)]
pub struct Tok {
    pub text: String,
    pub line: usize,
    pub col: usize,
}

/// Split a line into whitespace-separated tokens, keeping `[...]` groups and
/// `{...}` groups attached to the preceding word, and treating `->`, `=`,
/// `(`, `)`, `,`, `·` and `.` as standalone tokens.
pub fn tokenize_line(file: &str, line_no: usize, line: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break; // comment to end of line
        }
        let col = i + 1;
        if c == '(' || c == ')' || c == ',' || c == '·' || c == '=' {
            toks.push(Tok {
                text: c.to_string(),
                line: line_no,
                col,
            });
            i += 1;
            continue;
        }
        // '.' as a standalone splitting marker only (words never start with '.')
        if c == '.' {
            toks.push(Tok {
                text: ".".to_string(),
                line: line_no,
                col,
            });
            i += 1;
            continue;
        }
        if c == '-' && i + 1 < chars.len() && chars[i + 1] == '>' {
            toks.push(Tok {
                text: "->".to_string(),
                line: line_no,
                col,
            });
            i += 2;
            continue;
        }
        if c == '}' {
            toks.push(Tok {
                text: "}".to_string(),
                line: line_no,
                col,
            });
            i += 1;
            continue;
        }
        if c == '{' {
            // a block opener standing alone (as in `inverse {`) is its own
            // token; a balanced group is consumed as part of a word below
            let mut depth = 0isize;
            let mut balanced = false;
            for &ch in &chars[i..] {
                if ch == '{' {
                    depth += 1;
                } else if ch == '}' {
                    depth -= 1;
                    if depth == 0 {
                        balanced = true;
                        break;
                    }
                }
            }
            if !balanced {
                toks.push(Tok {
                    text: "{".to_string(),
                    line: line_no,
                    col,
                });
                i += 1;
                continue;
            }
        }
        // word token: run until whitespace or a delimiter, but consume any
        // balanced [...] or {...} group entirely (they may contain commas).
        let start = i;
        let mut depth = 0usize;
        while i < chars.len() {
            let ch = chars[i];
            if depth == 0 {
                if ch.is_whitespace()
                    || ch == '('
                    || ch == ')'
                    || ch == ','
                    || ch == '·'
                    || ch == '='
                    || ch == '#'
                {
                    break;
                }
                if ch == '-' && i + 1 < chars.len() && chars[i + 1] == '>' && i > start {
                    break;
                }
            }
            if ch == '[' || ch == '{' {
                depth += 1;
            } else if ch == ']' || ch == '}' {
                if depth == 0 {
                    return Err(Error::parse(file, line_no, i + 1, "unbalanced bracket"));
                }
                depth -= 1;
            }
            i += 1;
        }
        if depth != 0 {
            return Err(Error::parse(file, line_no, col, "unbalanced bracket"));
        }
        toks.push(Tok {
            text: chars[start..i].iter().collect(),
            line: line_no,
            col,
        });
    }
    Ok(toks)
}

/// Parse `[c1,c2,...]` into a vector of integers.
pub fn parse_int_vector(s: &str) -> Result<Vec<BigInt>> {
    let t = s.trim();
    let inner = t
        .strip_prefix('[')
        .and_then(|rest| rest.strip_suffix(']'))
        .ok_or_else(|| Error::Invalid(format!("expected [..] vector, got `{t}`")))?;
    let inner = inner.trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Invalid(format!("bad integer `{}` in vector", p.trim())))
        })
        .collect()
}

/// Parse `[[a,b],[c,d]]` into rows of integers (rows must have equal length).
pub fn parse_int_matrix(s: &str) -> Result<Vec<Vec<BigInt>>> {
    let t = s.trim();
    let inner = t
        .strip_prefix('[')
        .and_then(|rest| rest.strip_suffix(']'))
        .ok_or_else(|| Error::Invalid(format!("expected [[..],[..]] matrix, got `{t}`")))?;
    let mut rows = Vec::new();
    let chars: Vec<char> = inner.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() || chars[i] == ',' {
            i += 1;
            continue;
        }
        if chars[i] != '[' {
            return Err(Error::Invalid(format!("expected row `[..]` in matrix `{t}`")));
        }
        let start = i;
        while i < chars.len() && chars[i] != ']' {
            i += 1;
        }
        if i == chars.len() {
            return Err(Error::Invalid("unterminated matrix row".into()));
        }
        i += 1; // consume ']'
        let row: String = chars[start..i].iter().collect();
        rows.push(parse_int_vector(&row)?);
    }
    if rows.is_empty() {
        return Err(Error::Invalid("empty matrix".into()));
    }
    let w = rows[0].len();
    if rows.iter().any(|r| r.len() != w) {
        return Err(Error::Invalid("ragged matrix rows".into()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_image_lines() {
        let toks = tokenize_line("t", 1, "image a -> a · g1[1,0] b  # trailing").unwrap();
        let texts: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, vec!["image", "a", "->", "a", "·", "g1[1,0]", "b"]);
    }

    #[test]
    fn vectors_and_matrices() {
        assert_eq!(
            parse_int_vector("[3, -2]").unwrap(),
            vec![BigInt::from(3), BigInt::from(-2)]
        );
        let m = parse_int_matrix("[[2,1],[1,1]]").unwrap();
        assert_eq!(m[1][0], BigInt::from(1));
        assert!(parse_int_matrix("[[1,2],[3]]").is_err());
    }
}
