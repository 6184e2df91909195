//! LP-format model files and MST warm-start files.
//!
//! Variables are always named `x_<element index>`.

use std::fmt::Write as _;

use crate::instance::{HittingSetInstance, Solution, Task};
use crate::numfmt::fmt_g17;
use crate::{Error, Result};

const TERMS_PER_LINE: usize = 8;

fn var_index(token: &str, line: usize) -> Result<usize> {
    token
        .strip_prefix("x_")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("expected a variable x_<index>, got {token:?}"),
        })
}

/// Warm-start file: `#` header lines, then `x_<i> <0|1>` for every element.
pub fn export_mst(instance: &HittingSetInstance, solution: &Solution) -> Result<String> {
    let n = instance.n_elements();
    if let Some(&e) = solution.chosen.iter().find(|&&e| e >= n) {
        return Err(Error::IndexOutOfRange { index: e, n });
    }
    let mask = solution.mask(n);
    let mut out = String::new();
    writeln!(out, "# MIP start").unwrap();
    writeln!(out, "# instance {}", instance.id()).unwrap();
    writeln!(out, "# objective {}", fmt_g17(solution.weight)).unwrap();
    for (e, &on) in mask.iter().enumerate() {
        writeln!(out, "x_{e} {}", on as u8).unwrap();
    }
    Ok(out)
}

/// Reads a warm-start file back into a solution over `instance`.
///
/// Every element must be assigned exactly once.
pub fn parse_mst(instance: &HittingSetInstance, text: &str) -> Result<Solution> {
    let n = instance.n_elements();
    let mut values: Vec<Option<bool>> = vec![None; n];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let mut parts = content.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse {
                line,
                message: format!("expected `x_<index> <0|1>`, got {content:?}"),
            });
        };
        let e = var_index(name, line)?;
        if e >= n {
            return Err(Error::Parse {
                line,
                message: format!("variable {name} outside 0..{n}"),
            });
        }
        let on = match value {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("value must be 0 or 1, got {other:?}"),
                })
            }
        };
        if values[e].replace(on).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("variable {name} assigned twice"),
            });
        }
    }
    if let Some(e) = values.iter().position(Option::is_none) {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: format!("variable x_{e} missing"),
        });
    }
    Solution::new(
        instance,
        (0..n).filter(|&e| values[e] == Some(true)).collect(),
    )
}

/// LP-format text of the hitting-set integer program.
pub fn export_lp(instance: &HittingSetInstance) -> String {
    let mut out = String::new();
    writeln!(out, "\\ id: {}", instance.id()).unwrap();
    writeln!(out, "\\ task: {}", instance.task()).unwrap();
    writeln!(out, "Minimize").unwrap();
    let terms: Vec<String> = instance
        .weights()
        .iter()
        .enumerate()
        .map(|(e, &w)| format!("{} x_{e}", fmt_g17(w)))
        .collect();
    write_terms(&mut out, " obj:", &terms, "");
    writeln!(out, "Subject To").unwrap();
    for (t, set) in instance.sets().iter().enumerate() {
        let terms: Vec<String> = set.iter().map(|e| format!("x_{e}")).collect();
        write_terms(&mut out, &format!(" c{t}:"), &terms, " >= 1");
    }
    writeln!(out, "Binary").unwrap();
    for chunk in (0..instance.n_elements()).collect::<Vec<_>>().chunks(TERMS_PER_LINE) {
        let names: Vec<String> = chunk.iter().map(|e| format!("x_{e}")).collect();
        writeln!(out, " {}", names.join(" ")).unwrap();
    }
    writeln!(out, "End").unwrap();
    out
}

fn write_terms(out: &mut String, label: &str, terms: &[String], tail: &str) {
    out.push_str(label);
    if terms.is_empty() {
        out.push_str(" 0");
    }
    for (i, term) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        out.push_str(if i == 0 { " " } else { " + " });
        out.push_str(term);
    }
    out.push_str(tail);
    out.push('\n');
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Binary,
    Done,
}

/// Parses text written by [`export_lp`] (and hand-written files in the same
/// subset of the LP format: one `>= 1` covering row per set, unit
/// coefficients in constraints).
pub fn parse_lp(text: &str) -> Result<HittingSetInstance> {
    let mut id = String::new();
    let mut task = Task::Mhs;
    let mut section = Section::Preamble;
    // tokens with their source line
    let mut objective: Vec<(String, usize)> = Vec::new();
    let mut constraints: Vec<(String, usize)> = Vec::new();
    let mut binaries: Vec<(String, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if let Some(comment) = content.strip_prefix('\\') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("id:") {
                id = v.trim().to_string();
            } else if let Some(v) = comment.strip_prefix("task:") {
                task = v.trim().parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("unknown task {:?}", v.trim()),
                })?;
            }
            continue;
        }
        if content.is_empty() {
            continue;
        }
        match content.to_ascii_lowercase().as_str() {
            "minimize" | "min" => {
                section = Section::Objective;
                continue;
            }
            "subject to" | "st" | "s.t." => {
                section = Section::Constraints;
                continue;
            }
            "binary" | "binaries" | "bin" => {
                section = Section::Binary;
                continue;
            }
            "end" => {
                section = Section::Done;
                continue;
            }
            _ => {}
        }
        let target = match section {
            Section::Objective => &mut objective,
            Section::Constraints => &mut constraints,
            Section::Binary => &mut binaries,
            Section::Preamble | Section::Done => {
                return Err(Error::Parse {
                    line,
                    message: format!("unexpected content outside a section: {content:?}"),
                })
            }
        };
        // split "c0:x_1" style labels
        for tok in content.replace(':', ": ").split_whitespace() {
            target.push((tok.to_string(), line));
        }
    }
    if section != Section::Done {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: "missing End".to_string(),
        });
    }

    let mut n = 0usize;
    let mut bump = |e: usize| n = n.max(e + 1);

    // objective: [label:] coef var (+ coef var)*
    let mut weights_sparse: Vec<(usize, f64)> = Vec::new();
    let mut pending: Option<f64> = None;
    let mut sign = 1.0;
    for (tok, line) in objective.iter().skip_while(|(t, _)| t.ends_with(':')) {
        let line = *line;
        match tok.as_str() {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            t if t.starts_with("x_") => {
                let e = var_index(t, line)?;
                bump(e);
                weights_sparse.push((e, sign * pending.take().unwrap_or(1.0)));
                sign = 1.0;
            }
            t => {
                let c: f64 = t.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad objective token {t:?}"),
                })?;
                pending = Some(c);
            }
        }
    }

    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut iter = constraints.iter().peekable();
    while let Some((tok, line)) = iter.next() {
        let line = *line;
        match tok.as_str() {
            t if t.ends_with(':') => {}
            "+" => {}
            t if t.starts_with("x_") => {
                let e = var_index(t, line)?;
                bump(e);
                current.push(e);
            }
            ">=" => {
                let rhs = iter.next().map(|(t, _)| t.as_str());
                if rhs.and_then(|r| r.parse::<f64>().ok()) != Some(1.0) {
                    return Err(Error::Parse {
                        line,
                        message: "covering rows must read `>= 1`".to_string(),
                    });
                }
                if current.is_empty() {
                    return Err(Error::Parse {
                        line,
                        message: "constraint without variables".to_string(),
                    });
                }
                sets.push(std::mem::take(&mut current));
            }
            t => {
                return Err(Error::Parse {
                    line,
                    message: format!("unsupported constraint token {t:?}"),
                })
            }
        }
    }
    if !current.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: "unterminated constraint".to_string(),
        });
    }
    for (tok, line) in &binaries {
        bump(var_index(tok, *line)?);
    }

    let mut weights = vec![0.0; n];
    for (e, w) in weights_sparse {
        weights[e] += w;
    }
    HittingSetInstance::new(id, task, weights, sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::from_vertex_cover;

    #[test]
    fn singleton_lp_text() {
        let inst = HittingSetInstance::new("one", Task::Mhs, vec![1.0], vec![vec![0]]).unwrap();
        let text = export_lp(&inst);
        assert!(text.contains(" obj: 1 x_0\n"), "{text}");
        assert!(text.contains(" c0: x_0 >= 1\n"), "{text}");
        assert_eq!(parse_lp(&text).unwrap(), inst);
    }

    #[test]
    fn triangle_has_three_two_term_rows() {
        let inst = from_vertex_cover(3, &[(0, 1), (1, 2), (0, 2)], vec![0.5, 1.0, 0.25]).unwrap();
        let text = export_lp(&inst);
        let rows: Vec<&str> = text.lines().filter(|l| l.contains(">= 1")).collect();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.matches("x_").count() == 2));
        let back = parse_lp(&text).unwrap();
        assert_eq!(back.weights(), inst.weights());
        assert_eq!(back.sets(), inst.sets());
        assert_eq!(back.task(), Task::Mvc);
    }

    #[test]
    fn long_rows_wrap_and_parse() {
        let n = 30;
        let weights: Vec<f64> = (0..n).map(|i| 0.1 * i as f64 + 1e-7).collect();
        let inst =
            HittingSetInstance::new("wide", Task::Msc, weights, vec![(0..n).collect()]).unwrap();
        let text = export_lp(&inst);
        assert!(text.lines().all(|l| l.len() < 255));
        assert_eq!(parse_lp(&text).unwrap(), inst);
    }

    #[test]
    fn mst_lines() {
        let inst = from_vertex_cover(2, &[(0, 1)], vec![1.0, 1.0]).unwrap();
        let sol = Solution::new(&inst, vec![0]).unwrap();
        let text = export_mst(&inst, &sol).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, vec!["x_0 1", "x_1 0"]);
        assert_eq!(parse_mst(&inst, &text).unwrap(), sol);
        let ones = body.iter().filter(|l| l.ends_with(" 1")).count();
        assert_eq!(ones, sol.chosen.len());
    }

    #[test]
    fn mst_errors_carry_lines() {
        let inst = from_vertex_cover(2, &[(0, 1)], vec![1.0, 1.0]).unwrap();
        let err = parse_mst(&inst, "# h\nx_0 1\nx_1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = parse_mst(&inst, "x_0 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn lp_rejects_garbage() {
        assert!(parse_lp("Minimize\n obj: 1 x_0\nSubject To\n c0: x_0 <= 1\nEnd\n").is_err());
        assert!(parse_lp("Minimize\n obj: 1 x_0\n").is_err());
    }
}
