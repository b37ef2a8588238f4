//! Reading and writing parity-check matrices in MacKay's alist format.

use std::fmt::Write;

use super::ldpc::LdpcCode;
use crate::error::{Error, Result};

/// Serializes H with 1-based indices, zero-padding short adjacency rows.
pub fn to_alist(code: &LdpcCode) -> String {
    let n = code.n();
    let m = code.check_count();
    let max_col = code.vars().iter().map(Vec::len).max().unwrap_or(0);
    let max_row = code.checks().iter().map(Vec::len).max().unwrap_or(0);
    let mut s = String::new();
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    let padded = |v: &[usize], width: usize| {
        let mut idx: Vec<usize> = v.iter().map(|x| x + 1).collect();
        idx.resize(width, 0);
        join(&idx)
    };
    writeln!(s, "{n} {m}").unwrap();
    writeln!(s, "{max_col} {max_row}").unwrap();
    let col_w: Vec<usize> = code.vars().iter().map(Vec::len).collect();
    let row_w: Vec<usize> = code.checks().iter().map(Vec::len).collect();
    writeln!(s, "{}", join(&col_w)).unwrap();
    writeln!(s, "{}", join(&row_w)).unwrap();
    for v in code.vars() {
        writeln!(s, "{}", padded(v, max_col)).unwrap();
    }
    for c in code.checks() {
        writeln!(s, "{}", padded(c, max_row)).unwrap();
    }
    s
}

/// Parses an alist description. Only the check-node lists are used to build
/// the code; the variable-node lists are checked for consistency.
pub fn from_alist(text: &str) -> Result<LdpcCode> {
    let mut tokens = text.split_whitespace().map(|t| {
        t.parse::<usize>()
            .map_err(|_| Error::Alist(format!("not a non-negative integer: {t:?}")))
    });
    let mut next = || {
        tokens
            .next()
            .unwrap_or_else(|| Err(Error::Alist("unexpected end of data".into())))
    };
    let n = next()?;
    let m = next()?;
    let max_col = next()?;
    let max_row = next()?;
    let col_w: Vec<usize> = (0..n).map(|_| next()).collect::<Result<_>>()?;
    let row_w: Vec<usize> = (0..m).map(|_| next()).collect::<Result<_>>()?;
    let mut read_lists =
        |count: usize, width: usize, weights: &[usize], bound: usize| -> Result<Vec<Vec<usize>>> {
            (0..count)
                .map(|i| {
                    let raw: Vec<usize> = (0..width).map(|_| next()).collect::<Result<_>>()?;
                    let list: Vec<usize> = raw.iter().filter(|&&x| x != 0).map(|x| x - 1).collect();
                    if list.len() != weights[i] || list.iter().any(|&x| x >= bound) {
                        return Err(Error::Alist(format!(
                            "adjacency list {i} does not match its weight or bounds"
                        )));
                    }
                    Ok(list)
                })
                .collect()
        };
    let vars = read_lists(n, max_col, &col_w, m)?;
    let checks = read_lists(m, max_row, &row_w, n)?;
    for (v, list) in vars.iter().enumerate() {
        for &c in list {
            if !checks[c].contains(&v) {
                return Err(Error::Alist(format!(
                    "variable {v} lists check {c} but not vice versa"
                )));
            }
        }
    }
    LdpcCode::from_parity_check(n, checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::build_code;

    #[test]
    fn round_trip() {
        let code = build_code(32, 4).unwrap();
        let text = to_alist(&code);
        let back = from_alist(&text).unwrap();
        assert_eq!(back.checks(), code.checks());
        assert_eq!(back.vars(), code.vars());
    }

    #[test]
    fn rejects_truncated_input() {
        assert!(from_alist("4 2\n2 4\n").is_err());
    }

    #[test]
    fn rejects_inconsistent_lists() {
        let text = "2 1\n1 2\n1 1\n2\n1\n0\n1 2\n";
        assert!(from_alist(text).is_err());
    }
}
