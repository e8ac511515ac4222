//! Finite binary strings, string sets bounded in depth, and prefix-closed
//! tree patterns, with the combinatorics every other module builds on.
//!
//! Conventions: a depth-n set lives inside the universe of all strings of
//! length *less than* n, so the top level of a depth-n pattern is level
//! n - 1. All types are immutable values with structural equality; sets
//! iterate in a canonical order (length, then lexicographic) so pattern
//! enumeration is deterministic.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Longest representable string (bits packed into a `u64`).
pub const MAX_STRING_LEN: usize = 63;

/// Depth ceiling for samplers and other per-node loops.
pub const MAX_SAMPLING_DEPTH: u32 = 24;

/// Depth ceiling for loops that enumerate all subsets of the universe.
pub const MAX_SUBSET_ENUM_DEPTH: u32 = 4;

/// Depth ceiling for loops that enumerate all tree patterns (grows like
/// t(n+1) = t(n)^2 + 1: 1, 2, 5, 26, 677, 458330).
pub const MAX_PATTERN_ENUM_DEPTH: u32 = 5;

/// A finite word over {0,1}. The empty string prints as `"e"`.
///
/// Bits are packed most-significant-first, so `bits` is the numeric value
/// of the word and strings of equal length compare numerically.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryString {
    len: u8,
    bits: u64,
}

impl BinaryString {
    pub const fn empty() -> Self {
        BinaryString { len: 0, bits: 0 }
    }

    /// The word of length `len` whose numeric value is `bits`.
    pub fn from_bits(len: usize, bits: u64) -> Result<Self> {
        if len > MAX_STRING_LEN {
            return Err(Error::StringTooLong {
                len,
                max: MAX_STRING_LEN,
            });
        }
        debug_assert!(len == 64 || bits >> len == 0);
        Ok(BinaryString {
            len: len as u8,
            bits,
        })
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Bit at position `i` (0-based from the start of the word).
    pub fn bit(&self, i: usize) -> u8 {
        debug_assert!(i < self.len());
        ((self.bits >> (self.len() - 1 - i)) & 1) as u8
    }

    /// The concatenation with a single bit.
    pub fn child(&self, bit: u8) -> Self {
        debug_assert!(self.len() < MAX_STRING_LEN);
        BinaryString {
            len: self.len + 1,
            bits: (self.bits << 1) | u64::from(bit & 1),
        }
    }

    pub fn parent(&self) -> Option<Self> {
        if self.is_empty() {
            None
        } else {
            Some(BinaryString {
                len: self.len - 1,
                bits: self.bits >> 1,
            })
        }
    }

    /// The neighbor string: same parent, last bit flipped.
    pub fn neighbor(&self) -> Option<Self> {
        if self.is_empty() {
            None
        } else {
            Some(BinaryString {
                len: self.len,
                bits: self.bits ^ 1,
            })
        }
    }

    /// The prefix of length `n`.
    pub fn prefix(&self, n: usize) -> Self {
        debug_assert!(n <= self.len());
        BinaryString {
            len: n as u8,
            bits: self.bits >> (self.len() - n),
        }
    }

    /// Whether `self` is a (not necessarily proper) prefix of `other`.
    pub fn is_prefix_of(&self, other: &Self) -> bool {
        self.len <= other.len && other.bits >> (other.len() - self.len()) == self.bits
    }

    /// All prefixes from the empty string up to and including `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = BinaryString> + '_ {
        (0..=self.len()).map(move |n| self.prefix(n))
    }

    /// Position in the level-order (heap) enumeration of the full binary
    /// tree: the root is 0, the children of node i are 2i+1 and 2i+2.
    pub fn heap_index(&self) -> u64 {
        (1u64 << self.len()) - 1 + self.bits
    }
}

impl PartialOrd for BinaryString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BinaryString {
    /// Canonical (shortlex) order: by length, then numerically. Within a
    /// level this is exactly lexicographic order.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.len, self.bits).cmp(&(other.len, other.bits))
    }
}

impl fmt::Display for BinaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("e");
        }
        for i in 0..self.len() {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BinaryString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "e" {
            return Ok(BinaryString::empty());
        }
        if s.len() > MAX_STRING_LEN {
            return Err(Error::StringTooLong {
                len: s.len(),
                max: MAX_STRING_LEN,
            });
        }
        let mut bits = 0u64;
        for c in s.chars() {
            match c {
                '0' => bits <<= 1,
                '1' => bits = (bits << 1) | 1,
                _ => {
                    return Err(Error::BadBinaryString {
                        input: s.to_string(),
                    })
                }
            }
        }
        BinaryString::from_bits(s.len(), bits)
    }
}

impl Serialize for BinaryString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BinaryString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Convenience constructor used heavily in tests: `bs("011")`, `bs("e")`.
pub fn bs(s: &str) -> BinaryString {
    s.parse().expect("valid binary string literal")
}

/// All 2^n strings of length exactly `n`, in lexicographic order.
pub fn enumerate_level(n: u32) -> Vec<BinaryString> {
    assert!(
        n as usize <= MAX_STRING_LEN,
        "level {n} exceeds the string length ceiling"
    );
    (0..1u64 << n)
        .map(|bits| BinaryString::from_bits(n as usize, bits).unwrap())
        .collect()
}

/// All strings of length < depth, in canonical order.
pub fn enumerate_below(depth: u32) -> Vec<BinaryString> {
    (0..depth).flat_map(enumerate_level).collect()
}

/// A finite set of binary strings confined to lengths < `depth`.
/// Ordered by (depth, members) so sets can key deterministic maps.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct StringSet {
    depth: u32,
    members: BTreeSet<BinaryString>,
}

impl StringSet {
    pub fn new(depth: u32) -> Self {
        StringSet {
            depth,
            members: BTreeSet::new(),
        }
    }

    pub fn with_members<I>(depth: u32, members: I) -> Result<Self>
    where
        I: IntoIterator<Item = BinaryString>,
    {
        let mut set = StringSet::new(depth);
        for m in members {
            set.insert(m)?;
        }
        Ok(set)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn insert(&mut self, s: BinaryString) -> Result<()> {
        if s.len() >= self.depth as usize {
            return Err(Error::StringBeyondDepth {
                string: s,
                depth: self.depth,
            });
        }
        self.members.insert(s);
        Ok(())
    }

    pub fn contains(&self, s: &BinaryString) -> bool {
        self.members.contains(s)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Canonical (shortlex) iteration order.
    pub fn iter(&self) -> impl Iterator<Item = &BinaryString> + '_ {
        self.members.iter()
    }

    pub fn members(&self) -> &BTreeSet<BinaryString> {
        &self.members
    }

    pub fn union(&self, other: &StringSet) -> StringSet {
        StringSet {
            depth: self.depth.max(other.depth),
            members: self.members.union(&other.members).copied().collect(),
        }
    }

    pub fn is_subset(&self, other: &StringSet) -> bool {
        self.members.is_subset(&other.members)
    }

    /// Members of exactly length `level`.
    pub fn level_members(&self, level: u32) -> impl Iterator<Item = &BinaryString> + '_ {
        self.members
            .range(
                BinaryString::from_bits(level as usize, 0).unwrap()
                    ..=BinaryString::from_bits(level as usize, (1u64 << level) - 1).unwrap(),
            )
            .filter(move |s| s.len() == level as usize)
    }

    pub fn is_prefix_closed(&self) -> bool {
        self.members.iter().all(|s| {
            s.parent()
                .map(|parent| self.members.contains(&parent))
                .unwrap_or(true)
        })
    }
}

impl fmt::Debug for StringSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members.iter()).finish()
    }
}

impl fmt::Display for StringSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for StringSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.members.iter())
    }
}

/// A prefix-closed [`StringSet`]: if a string belongs, so do all of its
/// prefixes (in particular the empty string whenever nonempty).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TreePattern(StringSet);

impl TreePattern {
    pub fn new(set: StringSet) -> Result<Self> {
        for s in set.iter() {
            if let Some(parent) = s.parent() {
                if !set.contains(&parent) {
                    return Err(Error::NotPrefixClosed { witness: *s });
                }
            }
        }
        Ok(TreePattern(set))
    }

    pub fn empty(depth: u32) -> Self {
        TreePattern(StringSet::new(depth))
    }

    /// The full binary pattern: every string of length < depth.
    pub fn full(depth: u32) -> Self {
        let set = StringSet::with_members(depth, enumerate_below(depth)).unwrap();
        TreePattern(set)
    }

    pub fn as_set(&self) -> &StringSet {
        &self.0
    }

    pub fn into_set(self) -> StringSet {
        self.0
    }

    pub fn depth(&self) -> u32 {
        self.0.depth()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, s: &BinaryString) -> bool {
        self.0.contains(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = &BinaryString> + '_ {
        self.0.iter()
    }

    pub fn level_members(&self, level: u32) -> impl Iterator<Item = &BinaryString> + '_ {
        self.0.level_members(level)
    }

    pub fn level_count(&self, level: u32) -> usize {
        self.0.level_members(level).count()
    }

    /// Whether the pattern reaches level `top` (contains a member of that
    /// length).
    pub fn reaches_level(&self, top: u32) -> bool {
        self.0.level_members(top).next().is_some()
    }

    /// Shape of an extendible part at depth n: nonempty, and every member
    /// extends to a member at the top level n - 1 within the pattern
    /// (equivalently every member below the top level has a child).
    pub fn has_spanning_leaves(&self, n: u32) -> bool {
        if self.is_empty() || n == 0 {
            return false;
        }
        self.iter().all(|s| {
            s.len() + 1 == n as usize
                || self.contains(&s.child(0))
                || self.contains(&s.child(1))
        })
    }

    /// Whether any member of length < n - 1 is childless inside the
    /// pattern (such a node terminates a branch below the top level).
    pub fn has_childless_internal_node(&self, n: u32) -> bool {
        self.iter().any(|s| {
            (s.len() as u32) < n.saturating_sub(1)
                && !self.contains(&s.child(0))
                && !self.contains(&s.child(1))
        })
    }
}

impl fmt::Debug for TreePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for TreePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for TreePattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

/// The tree induced by a string set: all strings of length < n whose every
/// prefix (including the string itself) belongs to `set`.
pub fn truncate_to_tree(set: &StringSet, n: u32) -> TreePattern {
    let mut out = StringSet::new(n);
    if n == 0 || !set.contains(&BinaryString::empty()) {
        return TreePattern(out);
    }
    // Walk top-down: a node enters the tree only when its parent did.
    let mut frontier = vec![BinaryString::empty()];
    out.insert(BinaryString::empty()).unwrap();
    for _level in 1..n {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for node in frontier {
            for bit in 0..2 {
                let c = node.child(bit);
                if set.contains(&c) {
                    out.insert(c).unwrap();
                    next.push(c);
                }
            }
        }
        frontier = next;
    }
    TreePattern(out)
}

/// The members of `u` with no proper prefix in `u`. The result is
/// prefix-free and every member of `u` extends some member of the result.
pub fn minimal_prefix_free(u: &StringSet) -> StringSet {
    let mut out = StringSet::new(u.depth());
    'outer: for s in u.iter() {
        for k in 0..s.len() {
            if u.contains(&s.prefix(k)) {
                continue 'outer;
            }
        }
        out.insert(*s).unwrap();
    }
    out
}

/// The minimal excluded strings of a tree within depth n: strings outside
/// the pattern whose parent is inside (or the root, if missing). Together
/// with the pattern these pin the event "induced tree equals the pattern".
pub fn boundary(tree: &TreePattern, n: u32) -> StringSet {
    let mut out = StringSet::new(n);
    for s in enumerate_below(n) {
        if tree.contains(&s) {
            continue;
        }
        let blocked = match s.parent() {
            None => true,
            Some(parent) => tree.contains(&parent),
        };
        if blocked {
            out.insert(s).unwrap();
        }
    }
    out
}

/// All prefix-closed patterns within depth n, deterministically ordered.
/// Counts follow t(n+1) = t(n)^2 + 1: 1, 2, 5, 26, 677, 458330.
pub fn tree_patterns(n: u32) -> Vec<TreePattern> {
    assert!(
        n <= MAX_PATTERN_ENUM_DEPTH,
        "pattern enumeration capped at depth {MAX_PATTERN_ENUM_DEPTH}"
    );
    fn build(n: u32) -> Vec<Vec<BinaryString>> {
        if n == 0 {
            return vec![vec![]];
        }
        let sub = build(n - 1);
        let mut out = vec![vec![]];
        for left in &sub {
            for right in &sub {
                let mut pat = vec![BinaryString::empty()];
                for s in left {
                    pat.push(graft(s, 0));
                }
                for s in right {
                    pat.push(graft(s, 1));
                }
                out.push(pat);
            }
        }
        out
    }
    fn graft(s: &BinaryString, bit: u64) -> BinaryString {
        // Prepend one bit: the numeric value gains `bit` as its new
        // most significant digit.
        BinaryString::from_bits(s.len() + 1, (bit << s.len()) | s.bits()).unwrap()
    }
    build(n)
        .into_iter()
        .map(|members| TreePattern(StringSet::with_members(n, members).unwrap()))
        .collect()
}
