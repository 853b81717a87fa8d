//! Occupation-number basis for spinless fermions on an open chain.
//!
//! Site `j` (1-indexed) lives on bit `j - 1` of the mask. Ladder operators
//! carry the Jordan-Wigner string over all occupied sites strictly below the
//! target site, so operator products are ordered by ascending site index.

use thiserror::Error;

/// Largest chain length the bitmask basis supports.
pub const MAX_SITES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FockError {
    #[error("chain length {0} outside supported range 1..={MAX_SITES}")]
    UnsupportedLength(usize),
}

/// Fermion-number parity of a basis state or sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Even, Parity::Odd];

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// A single occupation-number basis state stored as a bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState(pub u32);

impl FockState {
    pub const VACUUM: FockState = FockState(0);

    /// Builds a state from a pattern such as `"1010"`, leftmost character = site 1.
    pub fn from_pattern(pattern: &str) -> FockState {
        let bits = pattern
            .bytes()
            .enumerate()
            .fold(0u32, |acc, (k, b)| match b {
                b'1' => acc | (1 << k),
                b'0' => acc,
                other => panic!("invalid occupation character {:?}", other as char),
            });
        FockState(bits)
    }

    /// All `l` sites occupied.
    pub fn filled(l: usize) -> FockState {
        FockState(((1u64 << l) - 1) as u32)
    }

    #[inline]
    pub fn is_occupied(self, site: usize) -> bool {
        self.0 >> (site - 1) & 1 == 1
    }

    #[inline]
    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn parity(self) -> Parity {
        if self.count() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Jordan-Wigner sign: (-1)^(occupied sites with index < site).
    #[inline]
    fn string_sign(self, site: usize) -> f64 {
        let below = self.0 & ((1u32 << (site - 1)) - 1);
        if below.count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Elementary fermionic ladder operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

#[inline]
fn check_site(site: usize) {
    assert!(
        (1..=MAX_SITES).contains(&site),
        "site {site} outside 1..={MAX_SITES}"
    );
}

/// c†_site |state⟩. `None` when the site is already occupied.
#[inline]
pub fn apply_creation(state: FockState, site: usize) -> Option<(FockState, f64)> {
    check_site(site);
    if state.is_occupied(site) {
        return None;
    }
    Some((
        FockState(state.0 | 1 << (site - 1)),
        state.string_sign(site),
    ))
}

/// c_site |state⟩. `None` when the site is empty.
#[inline]
pub fn apply_annihilation(state: FockState, site: usize) -> Option<(FockState, f64)> {
    check_site(site);
    if !state.is_occupied(site) {
        return None;
    }
    Some((
        FockState(state.0 & !(1 << (site - 1))),
        state.string_sign(site),
    ))
}

#[inline]
pub fn apply_ladder(state: FockState, op: Ladder, site: usize) -> Option<(FockState, f64)> {
    match op {
        Ladder::Create => apply_creation(state, site),
        Ladder::Annihilate => apply_annihilation(state, site),
    }
}

/// Applies an operator product written in the usual left-to-right notation,
/// so the rightmost factor acts first. Returns the image state and the
/// accumulated sign, or `None` if any factor annihilates the state.
pub fn apply_product(state: FockState, ops: &[(Ladder, usize)]) -> Option<(FockState, f64)> {
    ops.iter()
        .rev()
        .try_fold((state, 1.0), |(s, sign), &(op, site)| {
            apply_ladder(s, op, site).map(|(next, sg)| (next, sign * sg))
        })
}

/// Canonically ordered basis of one parity sector.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    length: usize,
    parity: Parity,
    states: Vec<FockState>,
    // position of each bitmask within `states`, u32::MAX when outside the sector
    index: Vec<u32>,
}

impl SectorBasis {
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, state: FockState) -> Option<usize> {
        match self.index.get(state.0 as usize) {
            Some(&i) if i != u32::MAX => Some(i as usize),
            _ => None,
        }
    }
}

/// Builds the basis of one parity sector, states in increasing bitmask order.
pub fn build_sector(length: usize, parity: Parity) -> Result<SectorBasis, FockError> {
    if !(1..=MAX_SITES).contains(&length) {
        return Err(FockError::UnsupportedLength(length));
    }
    let full = 1usize << length;
    let mut index = vec![u32::MAX; full];
    let mut states = Vec::with_capacity(full / 2);
    for bits in 0..full as u32 {
        let s = FockState(bits);
        if s.parity() == parity {
            index[bits as usize] = states.len() as u32;
            states.push(s);
        }
    }
    Ok(SectorBasis {
        length,
        parity,
        states,
        index,
    })
}
