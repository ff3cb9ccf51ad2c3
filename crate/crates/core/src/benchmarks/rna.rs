use std::io::Write;
use std::process::{Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::Objective;
use crate::data::Sense;
use crate::error::{Error, Result};
use crate::space::{Point, SpaceSpec};

/// Category order of every sequence position.
pub const ALPHABET: [char; 4] = ['A', 'U', 'G', 'C'];

/// Shortest hairpin loop allowed between paired bases.
pub const MIN_HAIRPIN: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RnaBackend {
    /// Negated maximum number of base pairs.
    Nussinov,
    /// External folding program reading the sequence on stdin.
    ExternalFold {
        program: String,
        #[serde(default)]
        args: Vec<String>,
    },
}

impl Default for RnaBackend {
    fn default() -> Self {
        RnaBackend::Nussinov
    }
}

/// Minimize the folding energy of a length-`p` sequence.
#[derive(Debug)]
pub struct RnaInstance {
    backend: RnaBackend,
    space: SpaceSpec,
    // One subprocess at a time.
    external: Mutex<()>,
}

impl RnaInstance {
    pub fn new(p: usize, backend: RnaBackend) -> Result<Self> {
        Ok(Self { backend, space: SpaceSpec::categorical(&vec![4; p])?, external: Mutex::new(()) })
    }

    pub fn backend(&self) -> &RnaBackend {
        &self.backend
    }

    pub fn sequence(&self, x: &Point) -> Result<String> {
        self.space.validate(x)?;
        Ok(x.categories().into_iter().map(|c| ALPHABET[c]).collect())
    }

    fn run_external(&self, program: &str, args: &[String], sequence: &str) -> Result<f64> {
        let _guard = self.external.lock().unwrap_or_else(|e| e.into_inner());
        let backend_err = |message: String, output: String| Error::Backend { message, output };
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| backend_err(format!("failed to start `{program}`: {e}"), String::new()))?;
        child
            .stdin
            .take()
            .expect("stdin is piped")
            .write_all(format!("{sequence}\n").as_bytes())?;
        let out = child.wait_with_output()?;
        let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
        let captured = format!("{stdout}{}", String::from_utf8_lossy(&out.stderr));
        if !out.status.success() {
            return Err(backend_err(format!("`{program}` exited with {}", out.status), captured));
        }
        parse_energy(&stdout)
            .ok_or_else(|| backend_err(format!("no energy found in `{program}` output"), captured))
    }
}

impl Objective for RnaInstance {
    fn space(&self) -> &SpaceSpec {
        &self.space
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn evaluate(&self, x: &Point) -> Result<f64> {
        let sequence = self.sequence(x)?;
        match &self.backend {
            RnaBackend::Nussinov => Ok(-(nussinov(sequence.as_bytes()) as f64)),
            RnaBackend::ExternalFold { program, args } => self.run_external(program, args, &sequence),
        }
    }
}

/// Reads the trailing parenthesized number of the last line that has one,
/// e.g. `((((...)))) (-12.30)` or `.... ( -1.20)`.
pub fn parse_energy(output: &str) -> Option<f64> {
    output.lines().rev().find_map(|line| {
        let line = line.trim_end();
        let body = line.strip_suffix(')')?;
        let open = body.rfind('(')?;
        body[open + 1..].trim().parse::<f64>().ok().filter(|v| v.is_finite())
    })
}

pub fn can_pair(a: u8, b: u8) -> bool {
    matches!(
        (a, b),
        (b'A', b'U') | (b'U', b'A') | (b'G', b'C') | (b'C', b'G') | (b'G', b'U') | (b'U', b'G')
    )
}

/// Maximum number of non-crossing base pairs with hairpin loops of at least
/// [`MIN_HAIRPIN`] unpaired bases.
pub fn nussinov(seq: &[u8]) -> usize {
    let n = seq.len();
    if n < MIN_HAIRPIN + 2 {
        return 0;
    }
    // best[i][j] over seq[i..=j]; zero when j < i + MIN_HAIRPIN + 1.
    let mut best = vec![vec![0usize; n]; n];
    for span in (MIN_HAIRPIN + 1)..n {
        for i in 0..n - span {
            let j = i + span;
            let mut v = best[i][j - 1];
            for k in i..j - MIN_HAIRPIN {
                if can_pair(seq[k], seq[j]) {
                    let left = if k > i { best[i][k - 1] } else { 0 };
                    v = v.max(left + best[k + 1][j - 1] + 1);
                }
            }
            best[i][j] = v;
        }
    }
    best[0][n - 1]
}
