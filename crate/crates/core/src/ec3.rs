//! Exact Cover-3 instances: generation, evaluation and brute-force counting.
//!
//! An `n`-bit instance is a list of clauses, each naming three distinct bits
//! (1-based). A clause is satisfied when exactly one of its bits is set.
//! Assignments map to basis indices with bit `x_1` as the least-significant
//! bit, so `index(x) = Σ x_i · 2^(i-1)`.

use std::collections::HashSet;
use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest bit count accepted by the exhaustive routines.
pub const MAX_BITS: usize = 20;

/// Restart cap used by [`generate_instance`].
pub const DEFAULT_MAX_RESTARTS: usize = 10_000;

/// A clause as written: an ordered triple of 1-based bit indices.
pub type Clause = [usize; 3];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ec3Instance {
    n: usize,
    clauses: Vec<Clause>,
}

impl Ec3Instance {
    pub fn new(n: usize, clauses: Vec<Clause>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("instance must have at least one bit"));
        }
        if n > MAX_BITS {
            return Err(Error::Resource(format!(
                "{n} bits exceeds the supported maximum of {MAX_BITS}"
            )));
        }
        if clauses.is_empty() {
            return Err(Error::invalid("instance must have at least one clause"));
        }
        for (l, clause) in clauses.iter().enumerate() {
            validate_clause(n, clause).map_err(|msg| Error::invalid(format!("clause {}: {msg}", l + 1)))?;
        }
        Ok(Self { n, clauses })
    }

    /// The six-bit instance whose only solution is `(0,1,0,0,0,1)`.
    pub fn six_bit_example() -> Self {
        Self::new(6, vec![[1, 3, 6], [2, 4, 5], [3, 5, 6], [1, 2, 3], [3, 4, 6]])
            .expect("valid built-in instance")
    }

    /// The four-bit instance whose only solution is `(1,0,0,0)`. It repeats
    /// clause sets on purpose.
    pub fn four_bit_example() -> Self {
        Self::new(4, vec![[1, 2, 3], [1, 3, 4], [3, 1, 4], [1, 2, 3], [1, 2, 4]])
            .expect("valid built-in instance")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Number of basis states, `2^n`.
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    fn clause_masks(&self) -> impl Iterator<Item = usize> + '_ {
        self.clauses.iter().map(clause_mask)
    }

    /// Whether the assignment encoded by `index` satisfies every clause.
    pub fn satisfied_by_index(&self, index: usize) -> bool {
        self.clause_masks().all(|mask| (index & mask).count_ones() == 1)
    }

    /// Objective value `f` at the assignment encoded by `index`.
    pub fn objective_at_index(&self, index: usize) -> u64 {
        self.clause_masks()
            .map(|mask| {
                let ones = i64::from((index & mask).count_ones());
                ((1 - ones) * (1 - ones)) as u64
            })
            .sum()
    }

    pub fn to_json(&self) -> String {
        serialize_instance(self)
    }
}

fn clause_mask(clause: &Clause) -> usize {
    clause.iter().fold(0, |mask, &i| mask | (1 << (i - 1)))
}

fn validate_clause(n: usize, clause: &Clause) -> std::result::Result<(), String> {
    for &i in clause {
        if i < 1 || i > n {
            return Err(format!("bit index {i} outside 1..={n}"));
        }
    }
    if clause[0] == clause[1] || clause[0] == clause[2] || clause[1] == clause[2] {
        return Err(format!("repeated bit index in {clause:?}"));
    }
    Ok(())
}

/// A bit assignment `(x_1, …, x_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<u8>);

impl Assignment {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::invalid(format!("assignment bit {b} is not 0 or 1")));
        }
        Ok(Self(bits))
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        Self((0..n).map(|i| ((index >> i) & 1) as u8).collect())
    }

    pub fn to_index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (usize::from(b) << i))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Renders `x_1` leftmost, e.g. `1000` for `(1,0,0,0)`.
impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// `f(x) = Σ_l (1 - x_i - x_j - x_k)^2`.
pub fn objective(instance: &Ec3Instance, assignment: &Assignment) -> Result<u64> {
    if assignment.len() != instance.n() {
        return Err(Error::invalid(format!(
            "assignment has {} bits, instance has {}",
            assignment.len(),
            instance.n()
        )));
    }
    Ok(instance.objective_at_index(assignment.to_index()))
}

/// Exhaustive count of satisfying assignments over all `2^n` candidates.
pub fn count_satisfying(instance: &Ec3Instance) -> usize {
    (0..instance.dim())
        .filter(|&x| instance.satisfied_by_index(x))
        .count()
}

/// All satisfying assignments, as basis indices in ascending order.
pub fn satisfying_indices(instance: &Ec3Instance) -> Vec<usize> {
    (0..instance.dim())
        .filter(|&x| instance.satisfied_by_index(x))
        .collect()
}

/// Generates a uniquely satisfiable instance with the default restart cap.
pub fn generate_instance<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Ec3Instance> {
    generate_instance_with(n, DEFAULT_MAX_RESTARTS, rng)
}

/// Adds uniformly random clauses one at a time, recounting after each
/// addition, until exactly one assignment survives. A count of zero (or no
/// unused clause set left to draw) discards the attempt and starts over.
pub fn generate_instance_with<R: Rng + ?Sized>(
    n: usize,
    max_restarts: usize,
    rng: &mut R,
) -> Result<Ec3Instance> {
    if n < 3 {
        return Err(Error::invalid(format!("generation needs n >= 3, got {n}")));
    }
    if n > MAX_BITS {
        return Err(Error::Resource(format!(
            "{n} bits exceeds the supported maximum of {MAX_BITS}"
        )));
    }
    let distinct_sets = n * (n - 1) * (n - 2) / 6;

    for _ in 0..=max_restarts {
        let mut clauses: Vec<Clause> = Vec::new();
        let mut used: HashSet<usize> = HashSet::new();
        let mut survivors: Vec<usize> = (0..1usize << n).collect();

        while used.len() < distinct_sets {
            let clause = loop {
                let picked = index::sample(rng, n, 3);
                let clause = [picked.index(0) + 1, picked.index(1) + 1, picked.index(2) + 1];
                if !used.contains(&clause_mask(&clause)) {
                    break clause;
                }
            };
            let mask = clause_mask(&clause);
            used.insert(mask);
            clauses.push(clause);
            survivors.retain(|&x| (x & mask).count_ones() == 1);

            match survivors.len() {
                0 => break,
                1 => return Ec3Instance::new(n, clauses),
                _ => {}
            }
        }
    }
    Err(Error::GenerationExhausted {
        restarts: max_restarts,
    })
}

/// Instance file body: `{"n": .., "clauses": [[i,j,k], ..]}`.
pub fn serialize_instance(instance: &Ec3Instance) -> String {
    let clauses: Vec<String> = instance
        .clauses
        .iter()
        .map(|c| format!("[{}, {}, {}]", c[0], c[1], c[2]))
        .collect();
    format!(
        "{{\n  \"n\": {},\n  \"clauses\": [{}]\n}}\n",
        instance.n,
        clauses.join(", ")
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    n: usize,
    clauses: Vec<Clause>,
}

pub fn parse_instance(text: &str) -> Result<Ec3Instance> {
    let raw: RawInstance = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.n == 0 || raw.n > MAX_BITS {
        let (line, column) = locate_key(text, "\"n\"");
        return Err(Error::Parse {
            line,
            column,
            message: format!("bit count {} outside 1..={MAX_BITS}", raw.n),
        });
    }
    if raw.clauses.is_empty() {
        let (line, column) = locate_key(text, "\"clauses\"");
        return Err(Error::Parse {
            line,
            column,
            message: "instance has no clauses".into(),
        });
    }
    for (l, clause) in raw.clauses.iter().enumerate() {
        if let Err(message) = validate_clause(raw.n, clause) {
            let (line, column) = locate_clause(text, l);
            return Err(Error::Parse {
                line,
                column,
                message: format!("clause {}: {message}", l + 1),
            });
        }
    }
    Ec3Instance::new(raw.n, raw.clauses)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = offset - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

fn locate_key(text: &str, key: &str) -> (usize, usize) {
    line_column(text, text.find(key).unwrap_or(0))
}

/// Position of the opening bracket of clause `l` (0-based). Only called on
/// text serde has already accepted, so the bracket structure is sound.
fn locate_clause(text: &str, l: usize) -> (usize, usize) {
    let Some(key) = text.find("\"clauses\"") else {
        return (1, 1);
    };
    let mut depth = 0usize;
    let mut seen = 0usize;
    for (offset, ch) in text[key..].char_indices() {
        match ch {
            '[' => {
                depth += 1;
                if depth == 2 {
                    if seen == l {
                        return line_column(text, key + offset);
                    }
                    seen += 1;
                }
            }
            ']' => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    line_column(text, key)
}
