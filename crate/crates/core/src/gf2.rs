//! Binary linear codes over GF(2).
//!
//! Bit ordering: position `i` of a [`Word`] (0-based here, `i + 1` in the usual
//! 1-based notation) contributes `2^(n-1-i)` to the computational-basis index
//! of that word, so bit 0 is the most significant bit and printed bitstrings
//! read left to right. Syndromes use the same convention over the checks.
//! Every module that maps words to statevector indices goes through
//! [`Word::to_index`] / [`Word::from_index`].

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_len, Error, Result};

/// Largest code dimension for which the codeword list is materialised.
pub const MAX_ENUM_DIMENSION: usize = 20;

macro_rules! bit_vector {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(Vec<u8>);

        impl $name {
            pub fn zeros(len: usize) -> Self {
                Self(vec![0; len])
            }

            pub fn ones(len: usize) -> Self {
                Self(vec![1; len])
            }

            /// Builds from raw bits, rejecting anything other than 0 or 1.
            pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
                if let Some(pos) = bits.iter().position(|&b| b > 1) {
                    return Err(Error::Domain(format!(
                        "bit {pos} has value {}, expected 0 or 1",
                        bits[pos]
                    )));
                }
                Ok(Self(bits))
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn bits(&self) -> &[u8] {
                &self.0
            }

            pub fn get(&self, i: usize) -> u8 {
                self.0[i]
            }

            pub fn set(&mut self, i: usize, bit: bool) {
                self.0[i] = bit as u8;
            }

            pub fn flip(&mut self, i: usize) {
                self.0[i] ^= 1;
            }

            pub fn weight(&self) -> usize {
                self.0.iter().filter(|&&b| b == 1).count()
            }

            pub fn is_zero(&self) -> bool {
                self.0.iter().all(|&b| b == 0)
            }

            /// Bitwise XOR. Panics on length mismatch.
            pub fn xor(&self, other: &Self) -> Self {
                assert_eq!(self.len(), other.len(), "xor of unequal lengths");
                Self(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
            }

            pub fn complement(&self) -> Self {
                Self(self.0.iter().map(|b| b ^ 1).collect())
            }

            /// Basis-state index with bit 0 as the most significant bit.
            pub fn to_index(&self) -> u64 {
                assert!(self.len() <= 64, "index conversion limited to 64 bits");
                self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
            }

            pub fn from_index(index: u64, len: usize) -> Self {
                assert!(len <= 64, "index conversion limited to 64 bits");
                Self((0..len).map(|i| ((index >> (len - 1 - i)) & 1) as u8).collect())
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                for &b in &self.0 {
                    f.write_str(if b == 1 { "1" } else { "0" })?;
                }
                Ok(())
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self)
            }
        }

        impl FromStr for $name {
            type Err = Error;

            /// Parses a string of `0`/`1` characters; `_`, `,` and spaces are ignored.
            fn from_str(s: &str) -> Result<Self> {
                let mut bits = Vec::with_capacity(s.len());
                for (pos, c) in s.chars().enumerate() {
                    match c {
                        '0' => bits.push(0),
                        '1' => bits.push(1),
                        '_' | ',' | ' ' => {}
                        other => {
                            return Err(Error::Domain(format!(
                                "invalid character {other:?} at position {pos} in bitstring"
                            )))
                        }
                    }
                }
                Ok(Self(bits))
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
                serializer.serialize_str(&self.to_string())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

bit_vector!(
    /// A length-`n` binary vector: codewords, received words and error patterns.
    Word
);

bit_vector!(
    /// A length-`r` binary vector, one bit per parity check.
    Syndrome
);

/// A binary linear code given by its parity-check matrix.
///
/// Immutable after construction. The codeword list is computed lazily on
/// first use and shared afterwards.
#[derive(Clone)]
pub struct LinearCode {
    n: usize,
    rows: Vec<Vec<u8>>,
    packed: Vec<Vec<u64>>,
    rank: usize,
    check_adjacency: Vec<Vec<usize>>,
    var_adjacency: Vec<Vec<usize>>,
    codewords: OnceLock<Vec<Word>>,
}

impl fmt::Debug for LinearCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearCode")
            .field("n", &self.n)
            .field("r", &self.rows.len())
            .field("k", &self.k())
            .finish()
    }
}

impl PartialEq for LinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.rows == other.rows
    }
}

impl Eq for LinearCode {}

fn pack_row(row: &[u8]) -> Vec<u64> {
    let mut words = vec![0u64; row.len().div_ceil(64)];
    for (i, &b) in row.iter().enumerate() {
        if b == 1 {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

/// Row-reduces packed rows in place, returning the pivot column of each
/// nonzero row in order.
fn row_reduce(rows: &mut Vec<Vec<u64>>, n: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..n {
        if top == rows.len() {
            break;
        }
        let (w, b) = (col / 64, 1u64 << (col % 64));
        let Some(found) = (top..rows.len()).find(|&r| rows[r][w] & b != 0) else {
            continue;
        };
        rows.swap(top, found);
        let pivot_row = rows[top].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != top && row[w] & b != 0 {
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x ^= p;
                }
            }
        }
        pivots.push(col);
        top += 1;
    }
    rows.truncate(top);
    pivots
}

impl LinearCode {
    /// Builds a code from the rows of its parity-check matrix.
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self> {
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || n == 0 {
            return Err(Error::Domain("parity-check matrix must be nonempty".into()));
        }
        for (j, row) in rows.iter().enumerate() {
            check_len(n, row.len(), "parity-check row length")?;
            if let Some(i) = row.iter().position(|&b| b > 1) {
                return Err(Error::Domain(format!("entry ({j},{i}) is not binary")));
            }
            if row.iter().all(|&b| b == 0) {
                return Err(Error::Domain(format!("parity-check row {j} is all zero")));
            }
        }
        let packed: Vec<Vec<u64>> = rows.iter().map(|r| pack_row(r)).collect();
        let mut reduced = packed.clone();
        let rank = row_reduce(&mut reduced, n).len();
        let check_adjacency = rows
            .iter()
            .map(|row| (0..n).filter(|&i| row[i] == 1).collect())
            .collect();
        let var_adjacency = (0..n)
            .map(|i| (0..rows.len()).filter(|&j| rows[j][i] == 1).collect())
            .collect();
        Ok(Self {
            n,
            rows,
            packed,
            rank,
            check_adjacency,
            var_adjacency,
            codewords: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parity checks (rows of H), redundant ones included.
    pub fn r(&self) -> usize {
        self.rows.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Code dimension, `n - rank(H)`.
    pub fn k(&self) -> usize {
        self.n - self.rank
    }

    pub fn h_rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn h(&self, check: usize, var: usize) -> u8 {
        self.rows[check][var]
    }

    /// Variables taking part in check `j`.
    pub fn check_adjacency(&self, j: usize) -> &[usize] {
        &self.check_adjacency[j]
    }

    /// Checks in which variable `i` takes part.
    pub fn var_adjacency(&self, i: usize) -> &[usize] {
        &self.var_adjacency[i]
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.check_adjacency.iter().map(Vec::len).collect()
    }

    pub fn column_weights(&self) -> Vec<usize> {
        self.var_adjacency.iter().map(Vec::len).collect()
    }

    /// `s = y H^T` over GF(2).
    pub fn syndrome(&self, y: &Word) -> Result<Syndrome> {
        check_len(self.n, y.len(), "word length")?;
        let y = pack_row(y.bits());
        Ok(Syndrome(
            self.packed
                .iter()
                .map(|row| {
                    let ones: u32 = row.iter().zip(&y).map(|(a, b)| (a & b).count_ones()).sum();
                    (ones & 1) as u8
                })
                .collect(),
        ))
    }

    pub fn is_codeword(&self, x: &Word) -> Result<bool> {
        Ok(self.syndrome(x)?.is_zero())
    }

    /// Per-check masks over basis-state indices: bit `n-1-i` of mask `j` is
    /// set when `H[j][i] = 1`. Only valid for `n <= 64`.
    pub fn basis_row_masks(&self) -> Vec<u64> {
        assert!(self.n <= 64, "basis masks limited to n <= 64");
        self.rows.iter().map(|row| Word(row.clone()).to_index()).collect()
    }

    /// Syndrome of the basis state `index`, packed with check 0 as the most
    /// significant bit (the same convention as [`Syndrome::to_index`]).
    pub fn syndrome_of_index(&self, masks: &[u64], index: u64) -> u64 {
        masks
            .iter()
            .fold(0u64, |acc, &m| (acc << 1) | ((m & index).count_ones() & 1) as u64)
    }

    /// Basis of the code (the null space of H), one row per dimension.
    pub fn nullspace_basis(&self) -> Vec<Word> {
        let mut reduced = self.packed.clone();
        let pivots = row_reduce(&mut reduced, self.n);
        let bit = |row: &[u64], c: usize| ((row[c / 64] >> (c % 64)) & 1) as u8;
        (0..self.n)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![0u8; self.n];
                v[free] = 1;
                for (row, &p) in reduced.iter().zip(&pivots) {
                    v[p] = bit(row, free);
                }
                Word(v)
            })
            .collect()
    }

    /// All `2^k` codewords. Index `m` of the list is the combination of basis
    /// rows selected by the bits of `m`, so entry 0 is the zero word.
    pub fn enumerate_codewords(&self) -> Result<Vec<Word>> {
        let k = self.k();
        if k > MAX_ENUM_DIMENSION {
            return Err(Error::Capacity {
                what: "code dimension for enumeration",
                actual: k,
                limit: MAX_ENUM_DIMENSION,
            });
        }
        let basis = self.nullspace_basis();
        let mut words = Vec::with_capacity(1 << k);
        words.push(Word::zeros(self.n));
        for b in &basis {
            let len = words.len();
            for m in 0..len {
                let w = words[m].xor(b);
                words.push(w);
            }
        }
        Ok(words)
    }

    /// Cached codeword list, computed on first call.
    pub fn codewords(&self) -> Result<&[Word]> {
        if let Some(c) = self.codewords.get() {
            return Ok(c);
        }
        let list = self.enumerate_codewords()?;
        Ok(self.codewords.get_or_init(|| list))
    }

    pub fn to_alist(&self) -> String {
        let cols = self.column_weights();
        let rows = self.row_weights();
        let max_col = cols.iter().copied().max().unwrap_or(0);
        let max_row = rows.iter().copied().max().unwrap_or(0);
        let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        out.push_str(&format!("{} {}\n{} {}\n", self.n, self.r(), max_col, max_row));
        out.push_str(&join(&mut cols.iter().copied()));
        out.push('\n');
        out.push_str(&join(&mut rows.iter().copied()));
        out.push('\n');
        for adj in &self.var_adjacency {
            let mut it = adj.iter().map(|j| j + 1).chain(std::iter::repeat(0)).take(max_col);
            out.push_str(&join(&mut it));
            out.push('\n');
        }
        for adj in &self.check_adjacency {
            let mut it = adj.iter().map(|i| i + 1).chain(std::iter::repeat(0)).take(max_row);
            out.push_str(&join(&mut it));
            out.push('\n');
        }
        out
    }

    /// Parses the alist interchange format (1-indexed, zero padding allowed).
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut last_line = 0;
        let mut next_ints = |expect: Option<usize>, what: &str| -> Result<(usize, Vec<usize>)> {
            let (line, content) = lines.next().ok_or_else(|| Error::Parse {
                line: last_line + 1,
                msg: format!("unexpected end of input, expected {what}"),
            })?;
            last_line = line;
            let vals = content
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        line,
                        msg: format!("invalid integer {t:?} in {what}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(e) = expect {
                if vals.len() != e {
                    return Err(Error::Parse {
                        line,
                        msg: format!("{what}: expected {e} values, found {}", vals.len()),
                    });
                }
            }
            Ok((line, vals))
        };

        let (line, dims) = next_ints(Some(2), "dimensions \"n r\"")?;
        let (n, r) = (dims[0], dims[1]);
        if n == 0 || r == 0 {
            return Err(Error::Parse {
                line,
                msg: "dimensions must be positive".into(),
            });
        }
        let (_, maxes) = next_ints(Some(2), "maximum degrees")?;
        let (line, col_w) = next_ints(Some(n), "column weights")?;
        if col_w.iter().any(|&w| w > maxes[0]) {
            return Err(Error::Parse {
                line,
                msg: "column weight exceeds declared maximum".into(),
            });
        }
        let (line, row_w) = next_ints(Some(r), "row weights")?;
        if row_w.iter().any(|&w| w > maxes[1]) {
            return Err(Error::Parse {
                line,
                msg: "row weight exceeds declared maximum".into(),
            });
        }

        let mut h = vec![vec![0u8; n]; r];
        for (i, &w) in col_w.iter().enumerate() {
            let (line, vals) = next_ints(None, "column adjacency")?;
            let idx: Vec<usize> = vals.into_iter().filter(|&v| v != 0).collect();
            if idx.len() != w {
                return Err(Error::Parse {
                    line,
                    msg: format!("column {} lists {} checks, weight says {w}", i + 1, idx.len()),
                });
            }
            for j in idx {
                if j > r {
                    return Err(Error::Parse {
                        line,
                        msg: format!("check index {j} out of range 1..={r}"),
                    });
                }
                h[j - 1][i] = 1;
            }
        }
        for (j, &w) in row_w.iter().enumerate() {
            let (line, vals) = next_ints(None, "row adjacency")?;
            let idx: Vec<usize> = vals.into_iter().filter(|&v| v != 0).collect();
            if idx.len() != w {
                return Err(Error::Parse {
                    line,
                    msg: format!("row {} lists {} variables, weight says {w}", j + 1, idx.len()),
                });
            }
            let mut listed = vec![0u8; n];
            for i in idx {
                if i > n {
                    return Err(Error::Parse {
                        line,
                        msg: format!("variable index {i} out of range 1..={n}"),
                    });
                }
                listed[i - 1] = 1;
            }
            if listed != h[j] {
                return Err(Error::Parse {
                    line,
                    msg: format!("row {} disagrees with the column lists", j + 1),
                });
            }
        }
        Self::from_rows(h).map_err(|e| Error::Parse {
            line: last_line,
            msg: e.to_string(),
        })
    }

    /// Parses `{"h": [[0,1,...], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Inline {
            h: Vec<Vec<u8>>,
        }
        let inline: Inline = serde_json::from_str(text)?;
        Self::from_rows(inline.h)
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "h": self.rows }).to_string()
    }
}

/// `[n, 1]` repetition code with the `(n-1) x n` bidiagonal parity-check matrix.
pub fn repetition_code(n: usize) -> Result<LinearCode> {
    if n < 2 {
        return Err(Error::Domain(format!("repetition code needs n >= 2, got {n}")));
    }
    let rows = (0..n - 1)
        .map(|j| {
            let mut row = vec![0u8; n];
            row[j] = 1;
            row[j + 1] = 1;
            row
        })
        .collect();
    LinearCode::from_rows(rows)
}

const IRREGULAR_12_8: [[u8; 12]; 8] = [
    [1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1],
    [0, 1, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0],
    [1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 1],
    [0, 0, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0],
];

const REGULAR_12_8: [[u8; 12]; 8] = [
    [0, 0, 0, 1, 0, 0, 1, 0, 1, 0, 0, 0],
    [1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0],
    [0, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 1],
    [0, 1, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0],
    [1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0],
    [0, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 1],
];

/// Identifier of a code shipped with the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BundledCode {
    /// `[12, 8]` (2,3)-regular code with redundant checks.
    Regular12x8,
    /// `[12, 8]` irregular code, average degrees 1.92 / 2.88.
    Irregular12x8,
    Repetition(usize),
}

impl FromStr for BundledCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reg_12_8" => Ok(Self::Regular12x8),
            "irr_12_8" => Ok(Self::Irregular12x8),
            _ => s
                .strip_prefix("rep_")
                .and_then(|n| n.parse().ok())
                .map(Self::Repetition)
                .ok_or_else(|| Error::Domain(format!("unknown code id {s:?}"))),
        }
    }
}

impl fmt::Display for BundledCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Regular12x8 => f.write_str("reg_12_8"),
            Self::Irregular12x8 => f.write_str("irr_12_8"),
            Self::Repetition(n) => write!(f, "rep_{n}"),
        }
    }
}

pub fn bundled_code(id: BundledCode) -> Result<LinearCode> {
    let from = |m: &[[u8; 12]; 8]| LinearCode::from_rows(m.iter().map(|r| r.to_vec()).collect());
    match id {
        BundledCode::Regular12x8 => from(&REGULAR_12_8),
        BundledCode::Irregular12x8 => from(&IRREGULAR_12_8),
        BundledCode::Repetition(n) => repetition_code(n),
    }
}

/// Resolves a bundled code id, or loads an `.alist` / `.json` file.
pub fn resolve_code(id_or_path: &str) -> Result<LinearCode> {
    if let Ok(id) = id_or_path.parse::<BundledCode>() {
        return bundled_code(id);
    }
    let path = std::path::Path::new(id_or_path);
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if path.extension().is_some_and(|e| e == "json") {
        LinearCode::from_json(&text)
    } else {
        LinearCode::from_alist(&text)
    }
}
