//! Finite powerset lattices and deterministic lifts of set-valued maps.
//!
//! A set-valued map sends each state to a set of possible successors. Its
//! lift acts on subsets by taking the union of successor sets, which is
//! deterministic and monotone on the powerset lattice, so ascending
//! iteration reaches a least fixed point in at most `n_states` stages.
//! The module also provides composition of lifts and the packing of an
//! ordered family of monotone maps iterated from the bottom element.
//!
//! Subsets are bitsets: a single `u64` word up to 64 states, a word vector
//! above that. Equality is bit equality on the canonical representation.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::fixpoint::{IterationReport, Stage};

/// Errors from lattice construction, parsing and iteration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("dimension mismatch: {left} vs {right} states")]
    DimensionMismatch { left: usize, right: usize },
    #[error("monotonicity violation: apply({smaller:?}) is not contained in apply({larger:?})")]
    MonotonicityViolation { smaller: Vec<usize>, larger: Vec<usize> },
    #[error("packing requires at least one map")]
    EmptyPack,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Bits {
    Word(u64),
    Wide(Vec<u64>),
}

/// A subset of `{0, .., n_states - 1}` in canonical bitset form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PowersetElement {
    n_states: usize,
    bits: Bits,
}

impl PowersetElement {
    pub fn empty(n_states: usize) -> Self {
        let bits = if n_states <= 64 {
            Bits::Word(0)
        } else {
            Bits::Wide(vec![0; n_states.div_ceil(64)])
        };
        Self { n_states, bits }
    }

    pub fn full(n_states: usize) -> Self {
        let mut s = Self::empty(n_states);
        for i in 0..n_states {
            s.insert(i);
        }
        s
    }

    pub fn singleton(n_states: usize, state: usize) -> Self {
        let mut s = Self::empty(n_states);
        s.insert(state);
        s
    }

    pub fn from_indices(n_states: usize, indices: &[usize]) -> Self {
        let mut s = Self::empty(n_states);
        for &i in indices {
            s.insert(i);
        }
        s
    }

    /// Subset of `{0, .., n_states - 1}` from the low bits of a mask.
    /// Only valid for `n_states <= 64`; handy for exhaustive enumeration.
    pub fn from_mask(n_states: usize, mask: u64) -> Self {
        assert!(n_states <= 64, "from_mask requires n_states <= 64");
        let keep = if n_states == 64 { u64::MAX } else { (1u64 << n_states) - 1 };
        Self { n_states, bits: Bits::Word(mask & keep) }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn insert(&mut self, state: usize) {
        assert!(state < self.n_states, "state {state} out of range");
        match &mut self.bits {
            Bits::Word(w) => *w |= 1u64 << state,
            Bits::Wide(v) => v[state / 64] |= 1u64 << (state % 64),
        }
    }

    pub fn contains(&self, state: usize) -> bool {
        if state >= self.n_states {
            return false;
        }
        match &self.bits {
            Bits::Word(w) => w & (1u64 << state) != 0,
            Bits::Wide(v) => v[state / 64] & (1u64 << (state % 64)) != 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        match &self.bits {
            Bits::Word(w) => *w == 0,
            Bits::Wide(v) => v.iter().all(|w| *w == 0),
        }
    }

    pub fn len(&self) -> usize {
        match &self.bits {
            Bits::Word(w) => w.count_ones() as usize,
            Bits::Wide(v) => v.iter().map(|w| w.count_ones() as usize).sum(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.n_states, other.n_states, "state-space mismatch");
        let bits = match (&self.bits, &other.bits) {
            (Bits::Word(a), Bits::Word(b)) => Bits::Word(a | b),
            (Bits::Wide(a), Bits::Wide(b)) => {
                Bits::Wide(a.iter().zip(b).map(|(x, y)| x | y).collect())
            }
            _ => unreachable!("representations agree for equal n_states"),
        };
        Self { n_states: self.n_states, bits }
    }

    pub fn union_with(&mut self, other: &Self) {
        assert_eq!(self.n_states, other.n_states, "state-space mismatch");
        match (&mut self.bits, &other.bits) {
            (Bits::Word(a), Bits::Word(b)) => *a |= b,
            (Bits::Wide(a), Bits::Wide(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x |= y;
                }
            }
            _ => unreachable!("representations agree for equal n_states"),
        }
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        assert_eq!(self.n_states, other.n_states, "state-space mismatch");
        match (&self.bits, &other.bits) {
            (Bits::Word(a), Bits::Word(b)) => a & !b == 0,
            (Bits::Wide(a), Bits::Wide(b)) => a.iter().zip(b).all(|(x, y)| x & !y == 0),
            _ => unreachable!("representations agree for equal n_states"),
        }
    }

    /// Number of states in the symmetric difference; the lattice metric
    /// used for residual histories.
    pub fn symmetric_difference_len(&self, other: &Self) -> usize {
        assert_eq!(self.n_states, other.n_states, "state-space mismatch");
        match (&self.bits, &other.bits) {
            (Bits::Word(a), Bits::Word(b)) => (a ^ b).count_ones() as usize,
            (Bits::Wide(a), Bits::Wide(b)) => {
                a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones() as usize).sum()
            }
            _ => unreachable!("representations agree for equal n_states"),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_states).filter(move |&i| self.contains(i))
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Display for PowersetElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for PowersetElement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

/// A map from each state to its set of possible successors. Empty successor
/// sets are allowed (dead ends).
#[derive(Debug, Clone, PartialEq)]
pub struct SetValuedMap {
    n_states: usize,
    successors: Vec<PowersetElement>,
}

impl SetValuedMap {
    pub fn new(successors: Vec<PowersetElement>) -> Result<Self, LatticeError> {
        let n_states = successors.len();
        for s in &successors {
            if s.n_states() != n_states {
                return Err(LatticeError::DimensionMismatch {
                    left: n_states,
                    right: s.n_states(),
                });
            }
        }
        Ok(Self { n_states, successors })
    }

    /// Build from successor index lists, one per state.
    pub fn from_lists(lists: &[&[usize]]) -> Self {
        let n = lists.len();
        let successors =
            lists.iter().map(|l| PowersetElement::from_indices(n, l)).collect();
        Self { n_states: n, successors }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn successors(&self, state: usize) -> &PowersetElement {
        &self.successors[state]
    }

    /// Parse the text format: one line per state, `state: succ1 succ2 ...`,
    /// states listed in order starting from 0. Blank lines and `#` comments
    /// are skipped.
    pub fn parse(text: &str) -> Result<Self, LatticeError> {
        let mut rows: Vec<(usize, Vec<usize>, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, tail) = line.split_once(':').ok_or_else(|| LatticeError::Parse {
                line: line_no,
                message: "expected `state: succ1 succ2 ...`".into(),
            })?;
            let state: usize = head.trim().parse().map_err(|_| LatticeError::Parse {
                line: line_no,
                message: format!("invalid state index `{}`", head.trim()),
            })?;
            let mut succs = Vec::new();
            for tok in tail.split_whitespace() {
                let s: usize = tok.parse().map_err(|_| LatticeError::Parse {
                    line: line_no,
                    message: format!("invalid successor index `{tok}`"),
                })?;
                succs.push(s);
            }
            rows.push((state, succs, line_no));
        }
        if rows.is_empty() {
            return Err(LatticeError::Parse { line: 0, message: "empty map".into() });
        }
        let n_states = rows.len();
        let mut successors = vec![PowersetElement::empty(n_states); n_states];
        for (k, (state, succs, line_no)) in rows.iter().enumerate() {
            if *state != k {
                return Err(LatticeError::Parse {
                    line: *line_no,
                    message: format!("expected state {k}, found {state}"),
                });
            }
            for &s in succs {
                if s >= n_states {
                    return Err(LatticeError::Parse {
                        line: *line_no,
                        message: format!("successor {s} out of range for {n_states} states"),
                    });
                }
                successors[k].insert(s);
            }
        }
        Ok(Self { n_states, successors })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.successors.iter().enumerate() {
            out.push_str(&i.to_string());
            out.push(':');
            for j in s.iter() {
                out.push(' ');
                out.push_str(&j.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// A self-map of the powerset lattice, given by an arbitrary rule. Lifts of
/// set-valued maps are monotone by construction; rules supplied directly
/// can be validated with [`MonotoneLatticeMap::check_monotone`].
#[derive(Clone)]
pub struct MonotoneLatticeMap {
    n_states: usize,
    rule: Arc<dyn Fn(&PowersetElement) -> PowersetElement + Send + Sync>,
}

impl fmt::Debug for MonotoneLatticeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneLatticeMap").field("n_states", &self.n_states).finish()
    }
}

impl MonotoneLatticeMap {
    /// Wrap a rule declared monotone by the caller.
    pub fn from_fn<F>(n_states: usize, rule: F) -> Self
    where
        F: Fn(&PowersetElement) -> PowersetElement + Send + Sync + 'static,
    {
        Self { n_states, rule: Arc::new(rule) }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn apply(&self, s: &PowersetElement) -> PowersetElement {
        assert_eq!(s.n_states(), self.n_states, "state-space mismatch");
        let out = (self.rule)(s);
        assert_eq!(out.n_states(), self.n_states, "rule changed the state space");
        out
    }

    /// Verify `S ⊆ T ⇒ apply(S) ⊆ apply(T)`: exhaustively for
    /// `n_states <= 12` (via single-element increments, which imply the
    /// general case along chains), by seeded sampling otherwise.
    pub fn check_monotone(&self, seed: u64) -> Result<(), LatticeError> {
        if self.n_states <= 12 {
            for mask in 0u64..(1u64 << self.n_states) {
                let s = PowersetElement::from_mask(self.n_states, mask);
                let fs = self.apply(&s);
                for x in 0..self.n_states {
                    if s.contains(x) {
                        continue;
                    }
                    let mut t = s.clone();
                    t.insert(x);
                    if !fs.is_subset_of(&self.apply(&t)) {
                        return Err(LatticeError::MonotonicityViolation {
                            smaller: s.to_indices(),
                            larger: t.to_indices(),
                        });
                    }
                }
            }
            return Ok(());
        }
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..2000 {
            let mut s = PowersetElement::empty(self.n_states);
            let mut t = PowersetElement::empty(self.n_states);
            for i in 0..self.n_states {
                match rng.gen_range(0..3) {
                    0 => {}
                    1 => t.insert(i),
                    _ => {
                        s.insert(i);
                        t.insert(i);
                    }
                }
            }
            if !self.apply(&s).is_subset_of(&self.apply(&t)) {
                return Err(LatticeError::MonotonicityViolation {
                    smaller: s.to_indices(),
                    larger: t.to_indices(),
                });
            }
        }
        Ok(())
    }
}

/// Deterministic lift of a set-valued map: `S` maps to the union of the
/// successor sets of its members, and the empty set to itself.
pub fn lift(map: &SetValuedMap) -> MonotoneLatticeMap {
    let successors = Arc::new(map.successors.clone());
    let n_states = map.n_states;
    MonotoneLatticeMap::from_fn(n_states, move |s| {
        let mut out = PowersetElement::empty(n_states);
        for x in s.iter() {
            out.union_with(&successors[x]);
        }
        out
    })
}

/// Set-valued composition `x -> union of g over f(x)`, with `f` applied
/// first.
pub fn compose_set_valued(
    f: &SetValuedMap,
    g: &SetValuedMap,
) -> Result<SetValuedMap, LatticeError> {
    if f.n_states != g.n_states {
        return Err(LatticeError::DimensionMismatch { left: f.n_states, right: g.n_states });
    }
    let successors = f
        .successors
        .iter()
        .map(|fx| {
            let mut out = PowersetElement::empty(f.n_states);
            for y in fx.iter() {
                out.union_with(&g.successors[y]);
            }
            out
        })
        .collect();
    Ok(SetValuedMap { n_states: f.n_states, successors })
}

/// Lift of the set-valued composition with `f` applied first; equal to the
/// composite of the two lifts on every subset.
pub fn compose_lifts(
    f: &SetValuedMap,
    g: &SetValuedMap,
) -> Result<MonotoneLatticeMap, LatticeError> {
    Ok(lift(&compose_set_valued(f, g)?))
}

/// Ascend `S -> S ∪ apply(S)` from `seed` to exact stabilization.
///
/// The limit is the least prefixed point above the seed, i.e. the union
/// formula `∪_n apply^n(seed)` closed upward from the seed, and the stage is
/// bounded by `n_states`. Along the chain the map's images are checked to
/// grow; a shrinking image reports [`LatticeError::MonotonicityViolation`].
pub fn least_fixed_point_from(
    map: &MonotoneLatticeMap,
    seed: &PowersetElement,
) -> Result<IterationReport<PowersetElement>, LatticeError> {
    let mut current = seed.clone();
    let mut image = map.apply(&current);
    let mut residuals = Vec::new();
    for stage in 0..=map.n_states() + 1 {
        let next = current.union(&image);
        residuals.push(current.symmetric_difference_len(&next) as f64);
        if next == current {
            return Ok(IterationReport {
                fixed_point: current,
                stage: Stage::Finite(stage),
                residuals,
                converged: true,
            });
        }
        let next_image = map.apply(&next);
        if !image.is_subset_of(&next_image) {
            return Err(LatticeError::MonotonicityViolation {
                smaller: current.to_indices(),
                larger: next.to_indices(),
            });
        }
        current = next;
        image = next_image;
    }
    unreachable!("ascending chain in a finite powerset stabilizes within n_states steps")
}

/// Iterate the packed composition of an ordered family (first map applied
/// first) from the bottom element to its least fixed point.
pub fn pack(maps: &[MonotoneLatticeMap]) -> Result<IterationReport<PowersetElement>, LatticeError> {
    let first = maps.first().ok_or(LatticeError::EmptyPack)?;
    let n = first.n_states();
    for m in maps {
        if m.n_states() != n {
            return Err(LatticeError::DimensionMismatch { left: n, right: m.n_states() });
        }
    }
    let packed = |s: &PowersetElement| maps.iter().fold(s.clone(), |acc, m| m.apply(&acc));
    let mut current = PowersetElement::empty(n);
    let mut residuals = Vec::new();
    for stage in 0..=n + 1 {
        let next = packed(&current);
        residuals.push(current.symmetric_difference_len(&next) as f64);
        if next == current {
            return Ok(IterationReport {
                fixed_point: current,
                stage: Stage::Finite(stage),
                residuals,
                converged: true,
            });
        }
        if !current.is_subset_of(&next) {
            return Err(LatticeError::MonotonicityViolation {
                smaller: current.to_indices(),
                larger: next.to_indices(),
            });
        }
        current = next;
    }
    unreachable!("ascending chain in a finite powerset stabilizes within n_states steps")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lift_takes_unions_of_successors() {
        let m = SetValuedMap::from_lists(&[&[1], &[0, 2], &[2]]);
        let phi = lift(&m);
        assert_eq!(
            phi.apply(&PowersetElement::singleton(3, 0)),
            PowersetElement::singleton(3, 1)
        );
        assert_eq!(
            phi.apply(&PowersetElement::from_indices(3, &[0, 1])),
            PowersetElement::from_indices(3, &[0, 1, 2])
        );
        assert!(phi.apply(&PowersetElement::empty(3)).is_empty());
    }

    #[test]
    fn identity_lift_fixes_singletons() {
        let m = SetValuedMap::from_lists(&[&[0], &[1], &[2]]);
        let phi = lift(&m);
        let s = PowersetElement::singleton(3, 1);
        assert_eq!(phi.apply(&s), s);
    }

    #[test]
    fn least_fixed_point_is_reachability_closure() {
        let m = SetValuedMap::from_lists(&[&[1], &[0, 2], &[2]]);
        let report =
            least_fixed_point_from(&lift(&m), &PowersetElement::singleton(3, 0)).unwrap();
        assert_eq!(report.fixed_point, PowersetElement::from_indices(3, &[0, 1, 2]));
        assert!(matches!(report.stage, Stage::Finite(n) if n <= 3));
    }

    #[test]
    fn already_fixed_seed_stabilizes_immediately() {
        let m = SetValuedMap::from_lists(&[&[0], &[1], &[2]]);
        let report =
            least_fixed_point_from(&lift(&m), &PowersetElement::singleton(3, 2)).unwrap();
        assert_eq!(report.fixed_point, PowersetElement::singleton(3, 2));
        assert_eq!(report.stage, Stage::Finite(0));
    }

    #[test]
    fn sink_adds_nothing() {
        let m = SetValuedMap::from_lists(&[&[], &[], &[]]);
        let report =
            least_fixed_point_from(&lift(&m), &PowersetElement::singleton(3, 0)).unwrap();
        assert_eq!(report.fixed_point, PowersetElement::singleton(3, 0));
    }

    #[test]
    fn composition_matches_hand_derived_successors() {
        let f = SetValuedMap::from_lists(&[&[1], &[2], &[0]]);
        let g = SetValuedMap::from_lists(&[&[0, 1], &[2], &[1]]);
        let h = compose_set_valued(&f, &g).unwrap();
        let expected = SetValuedMap::from_lists(&[&[2], &[1], &[0, 1]]);
        assert_eq!(h, expected);
        // The lifted composition agrees with applying the two lifts in
        // sequence on every one of the 8 subsets.
        let (lf, lg, lfg) = (lift(&f), lift(&g), compose_lifts(&f, &g).unwrap());
        for mask in 0..8u64 {
            let s = PowersetElement::from_mask(3, mask);
            assert_eq!(lfg.apply(&s), lg.apply(&lf.apply(&s)));
        }
    }

    #[test]
    fn composition_with_empty_map_absorbs() {
        let f = SetValuedMap::from_lists(&[&[1, 2], &[0], &[2]]);
        let g = SetValuedMap::from_lists(&[&[], &[], &[]]);
        let h = compose_lifts(&f, &g).unwrap();
        for mask in 0..8u64 {
            assert!(h.apply(&PowersetElement::from_mask(3, mask)).is_empty());
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let f = SetValuedMap::from_lists(&[&[0], &[1]]);
        let g = SetValuedMap::from_lists(&[&[0], &[1], &[2]]);
        assert!(matches!(
            compose_set_valued(&f, &g),
            Err(LatticeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pack_of_identity_fixes_bottom() {
        let m = SetValuedMap::from_lists(&[&[0], &[1], &[2]]);
        let report = pack(&[lift(&m)]).unwrap();
        assert!(report.fixed_point.is_empty());
        assert_eq!(report.stage, Stage::Finite(0));
    }

    #[test]
    fn pack_with_seed_adding_rule() {
        let m = SetValuedMap::from_lists(&[&[1], &[1], &[2]]);
        let add_zero = MonotoneLatticeMap::from_fn(3, |s| {
            let mut out = s.clone();
            out.insert(0);
            out
        });
        let report = pack(&[lift(&m), add_zero]).unwrap();
        assert_eq!(report.fixed_point, PowersetElement::from_indices(3, &[0, 1]));
        // Exhaustive oracle: the minimal fixed subset of the packed map.
        let m2 = SetValuedMap::from_lists(&[&[1], &[1], &[2]]);
        let packed = |s: &PowersetElement| {
            let mut out = lift(&m2).apply(s);
            out.insert(0);
            out
        };
        let mut best: Option<PowersetElement> = None;
        for mask in 0..8u64 {
            let s = PowersetElement::from_mask(3, mask);
            if packed(&s) == s {
                best = match best {
                    Some(b) if b.len() <= s.len() => Some(b),
                    _ => Some(s),
                };
            }
        }
        assert_eq!(best.unwrap(), report.fixed_point);
    }

    #[test]
    fn repeated_pack_matches_single_map_iteration() {
        let m = SetValuedMap::from_lists(&[&[1], &[2], &[2], &[0]]);
        let single = pack(&[lift(&m)]).unwrap();
        let triple = pack(&[lift(&m), lift(&m), lift(&m)]).unwrap();
        assert_eq!(single.fixed_point, triple.fixed_point);
    }

    #[test]
    fn monotonicity_check_accepts_lifts_and_rejects_complement() {
        let m = SetValuedMap::from_lists(&[&[1, 2], &[], &[0]]);
        assert!(lift(&m).check_monotone(0).is_ok());
        let complement = MonotoneLatticeMap::from_fn(3, |s| {
            let mut out = PowersetElement::empty(3);
            for i in 0..3 {
                if !s.contains(i) {
                    out.insert(i);
                }
            }
            out
        });
        assert!(matches!(
            complement.check_monotone(0),
            Err(LatticeError::MonotonicityViolation { .. })
        ));
    }

    #[test]
    fn non_monotone_rule_is_caught_during_iteration() {
        // Shrinks once the set grows: the ascent detects the defect.
        let bad = MonotoneLatticeMap::from_fn(3, |s| {
            if s.len() <= 1 {
                PowersetElement::full(3)
            } else {
                PowersetElement::empty(3)
            }
        });
        let seed = PowersetElement::singleton(3, 0);
        assert!(matches!(
            least_fixed_point_from(&bad, &seed),
            Err(LatticeError::MonotonicityViolation { .. })
        ));
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let text = "# map\n0: 1\n1: 0 2\n2:\n";
        let m = SetValuedMap::parse(text).unwrap();
        assert_eq!(m, SetValuedMap::from_lists(&[&[1], &[0, 2], &[]]));
        assert_eq!(SetValuedMap::parse(&m.to_text()).unwrap(), m);

        let err = SetValuedMap::parse("0: 1\n1: 5\n").unwrap_err();
        assert!(matches!(err, LatticeError::Parse { line: 2, .. }));
        let err = SetValuedMap::parse("").unwrap_err();
        assert!(matches!(err, LatticeError::Parse { .. }));
        let err = SetValuedMap::parse("0 1 2").unwrap_err();
        assert!(matches!(err, LatticeError::Parse { line: 1, .. }));
    }

    #[test]
    fn wide_bitsets_behave_like_words() {
        let mut a = PowersetElement::empty(130);
        a.insert(0);
        a.insert(64);
        a.insert(129);
        let b = PowersetElement::from_indices(130, &[64, 100]);
        let u = a.union(&b);
        assert_eq!(u.to_indices(), vec![0, 64, 100, 129]);
        assert!(b.is_subset_of(&u));
        assert_eq!(a.symmetric_difference_len(&b), 3);
        assert_eq!(u.len(), 4);
    }
}
