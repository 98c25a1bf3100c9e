//! Network topologies: K users and, per receiver, the set of transmitters it hears.
//!
//! Users are 1-based. `heard(k)` always contains `k` itself (the direct link);
//! the interferer set `M_k` is derived as `heard(k) \ {k}`.
//!
//! Text format:
//!
//! ```text
//! # comment
//! users 3
//! rx 1: 1 2
//! rx 2: 2
//! rx 3: 3 1 2
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("receiver {0} does not hear its own transmitter")]
    MissingDirectLink(usize),
    #[error("receiver {0} is listed more than once")]
    DuplicateReceiver(usize),
    #[error("index {index} out of range 1..={users}")]
    IndexOutOfRange { index: usize, users: usize },
    #[error("malformed line {0}")]
    MalformedLine(usize),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
}

impl TopologyError {
    /// True for errors caused by unreadable text, false for well-formed text
    /// describing an invalid network.
    pub fn is_syntax(&self) -> bool {
        matches!(self, TopologyError::MalformedLine(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetworkTopology {
    heard: Vec<BTreeSet<usize>>,
}

impl NetworkTopology {
    /// Builds a topology from per-receiver heard sets (index 0 is receiver 1).
    pub fn new(heard: Vec<BTreeSet<usize>>) -> Result<Self, TopologyError> {
        let users = heard.len();
        if users == 0 {
            return Err(TopologyError::MalformedLine(0));
        }
        for (idx, set) in heard.iter().enumerate() {
            let k = idx + 1;
            if let Some(&bad) = set.iter().find(|&&i| i == 0 || i > users) {
                return Err(TopologyError::IndexOutOfRange { index: bad, users });
            }
            if !set.contains(&k) {
                return Err(TopologyError::MissingDirectLink(k));
            }
        }
        Ok(NetworkTopology { heard })
    }

    /// Builds from interferer lists `M_k` (the direct link is added).
    pub fn from_interferers(interferers: &[&[usize]]) -> Result<Self, TopologyError> {
        let heard = interferers
            .iter()
            .enumerate()
            .map(|(idx, m)| {
                let mut s: BTreeSet<usize> = m.iter().copied().collect();
                s.insert(idx + 1);
                s
            })
            .collect();
        Self::new(heard)
    }

    pub fn users(&self) -> usize {
        self.heard.len()
    }

    /// Transmitters heard by receiver `k`, including `k`.
    pub fn heard(&self, k: usize) -> &BTreeSet<usize> {
        &self.heard[k - 1]
    }

    /// Interferers `M_k` at receiver `k`.
    pub fn interferers(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.heard[k - 1].iter().copied().filter(move |&l| l != k)
    }

    pub fn interferer_count(&self, k: usize) -> usize {
        self.heard[k - 1].len() - 1
    }

    /// Random topology: each receiver hears each other transmitter with
    /// probability `p`.
    pub fn random<R: Rng + ?Sized>(users: usize, p: f64, rng: &mut R) -> Self {
        let heard = (1..=users)
            .map(|k| {
                let mut s = BTreeSet::new();
                s.insert(k);
                for l in 1..=users {
                    if l != k && rng.random_bool(p) {
                        s.insert(l);
                    }
                }
                s
            })
            .collect();
        NetworkTopology { heard }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

pub fn parse_topology(text: &str) -> Result<NetworkTopology, TopologyError> {
    let mut users: Option<usize> = None;
    let mut heard: Vec<Option<BTreeSet<usize>>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap_or_default();
        match (keyword, users) {
            ("users", None) => {
                let k: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or(TopologyError::MalformedLine(lineno))?;
                if k == 0 || words.next().is_some() {
                    return Err(TopologyError::MalformedLine(lineno));
                }
                users = Some(k);
                heard = vec![None; k];
            }
            ("rx", Some(k_total)) => {
                let rest = line["rx".len()..].trim_start();
                let (head, tail) = rest
                    .split_once(':')
                    .ok_or(TopologyError::MalformedLine(lineno))?;
                let k: usize = head
                    .trim()
                    .parse()
                    .map_err(|_| TopologyError::MalformedLine(lineno))?;
                if k == 0 || k > k_total {
                    return Err(TopologyError::IndexOutOfRange {
                        index: k,
                        users: k_total,
                    });
                }
                let mut set = BTreeSet::new();
                for w in tail.split_whitespace() {
                    let i: usize = w.parse().map_err(|_| TopologyError::MalformedLine(lineno))?;
                    if i == 0 || i > k_total {
                        return Err(TopologyError::IndexOutOfRange {
                            index: i,
                            users: k_total,
                        });
                    }
                    if !set.insert(i) {
                        return Err(TopologyError::MalformedLine(lineno));
                    }
                }
                if heard[k - 1].is_some() {
                    return Err(TopologyError::DuplicateReceiver(k));
                }
                heard[k - 1] = Some(set);
            }
            _ => return Err(TopologyError::MalformedLine(lineno)),
        }
    }

    let users = users.ok_or(TopologyError::MalformedLine(0))?;
    let last_line = text.lines().count();
    let heard = heard
        .into_iter()
        .map(|s| s.ok_or(TopologyError::MalformedLine(last_line)))
        .collect::<Result<Vec<_>, _>>()?;
    debug_assert_eq!(heard.len(), users);
    NetworkTopology::new(heard)
}

/// Canonical text: receivers in order, direct link first, interferers ascending.
pub fn emit_topology(t: &NetworkTopology) -> String {
    let mut out = String::new();
    writeln!(out, "users {}", t.users()).unwrap();
    for k in 1..=t.users() {
        write!(out, "rx {}: {}", k, k).unwrap();
        for l in t.interferers(k) {
            write!(out, " {}", l).unwrap();
        }
        out.push('\n');
    }
    out
}

pub const FIXTURE_NAMES: [&str; 4] = ["hexnet6", "paper7", "square8", "iconflict3"];

pub fn fixture_text(name: &str) -> Result<&'static str, TopologyError> {
    Ok(match name {
        "hexnet6" => "users 6\nrx 1: 1 5 6\nrx 2: 2\nrx 3: 3 1 2\nrx 4: 4\nrx 5: 5 3 4\nrx 6: 6\n",
        "paper7" => {
            "users 7\nrx 1: 1 3 5\nrx 2: 2 5 6\nrx 3: 3 4 7\nrx 4: 4 2\nrx 5: 5\nrx 6: 6 1 2\nrx 7: 7\n"
        }
        "square8" => {
            "users 8\nrx 1: 1 7 8\nrx 2: 2\nrx 3: 3 1 2\nrx 4: 4\nrx 5: 5 3 4\nrx 6: 6\nrx 7: 7 5 6\nrx 8: 8\n"
        }
        "iconflict3" => "users 3\nrx 1: 1 2\nrx 2: 2\nrx 3: 3 1 2\n",
        other => return Err(TopologyError::UnknownFixture(other.to_string())),
    })
}

pub fn load_fixture(name: &str) -> Result<NetworkTopology, TopologyError> {
    parse_topology(fixture_text(name)?)
}
