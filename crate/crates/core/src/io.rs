//! Line-oriented trajectory sets.
//!
//! One trajectory per line: whitespace-separated state indices, optionally
//! followed by `|` and the action indices. Blank lines and lines starting
//! with `#` are skipped.
//!
//! ```text
//! # states | actions
//! 0 1 2 2 | 3 3 1
//! 4 5 6
//! ```

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::mdp::{MdpModel, Trajectory};

pub fn write_trajectories<W: Write>(trajectories: &[Trajectory], mut out: W) -> io::Result<()> {
    for t in trajectories {
        let states: Vec<String> = t.states().iter().map(|s| s.to_string()).collect();
        write!(out, "{}", states.join(" "))?;
        if let Some(actions) = t.actions() {
            let actions: Vec<String> = actions.iter().map(|a| a.to_string()).collect();
            if actions.is_empty() {
                write!(out, " |")?;
            } else {
                write!(out, " | {}", actions.join(" "))?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

fn parse_indices(text: &str, line: usize) -> Result<Vec<usize>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|e| Error::Parse(format!("line {line}: `{tok}`: {e}")))
        })
        .collect()
}

/// Parses a trajectory set, validating every trajectory against `mdp`.
pub fn read_trajectories(mdp: &MdpModel, text: &str) -> Result<Vec<Trajectory>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (states, actions) = match line.split_once('|') {
            Some((s, a)) => (parse_indices(s, i + 1)?, Some(parse_indices(a, i + 1)?)),
            None => (parse_indices(line, i + 1)?, None),
        };
        out.push(Trajectory::new(mdp, states, actions)?);
    }
    Ok(out)
}
