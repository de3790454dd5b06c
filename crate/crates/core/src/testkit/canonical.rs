//! Closed-form description of the canonical test.
//!
//! Level `q+1` is built from level `a = [(q)₁]₀`:
//!
//! ```text
//! s_{q+1} = s_a 0 ψ(b) 0^pad     t_{q+1} = t_a 1 ψ(b) 0^pad
//! ```
//!
//! with `b = [(q)₁]₁` and `pad = q − a − |ψ(b)|`. Since `a ≤ (q)₁` is tiny
//! compared with `q`, any single bit of any level can be read by a short
//! recursion, without materializing anything.

use crate::codings::{pair, phi, psi, psi_inv, CodingError, Nat, Side, Word};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelShape {
    /// The level `a` that this one extends; also the last position where
    /// `s` and `t` differ.
    pub parent: Nat,
    pub middle: Word,
    pub pad: Nat,
}

/// Shape of level `level ≥ 1`; level 0 is the empty pair and has none.
pub fn level_shape(level: Nat) -> Option<LevelShape> {
    let q = level.checked_sub(1)?;
    let c = phi(q).second;
    let ab = phi(c);
    let middle = psi(ab.second);
    let pad = q - ab.first - middle.len() as Nat;
    Some(LevelShape {
        parent: ab.first,
        middle,
        pad,
    })
}

/// Bit `i` of `s_level` (side 0) or `t_level` (side 1); `None` when
/// `i ≥ level`.
pub fn bit(mut level: Nat, side: Side, i: Nat) -> Option<bool> {
    if i >= level {
        return None;
    }
    loop {
        let shape = level_shape(level).expect("level > i >= 0");
        if i < shape.parent {
            level = shape.parent;
            continue;
        }
        if i == shape.parent {
            return Some(side.bit());
        }
        let j = i - shape.parent - 1;
        return Some(j < shape.middle.len() as Nat && shape.middle.bits()[j as usize]);
    }
}

/// Position of the last 1 in `s_level` or `t_level`.
pub fn last_one(mut level: Nat, side: Side) -> Option<Nat> {
    loop {
        let shape = level_shape(level)?;
        if let Some(j) = shape.middle.last_one() {
            return Some(shape.parent + 1 + j as Nat);
        }
        if side == Side::One {
            return Some(shape.parent);
        }
        level = shape.parent;
    }
}

/// Positions where `s_level` and `t_level` differ, ascending. This is the
/// parent chain of the level.
pub fn diff_positions(mut level: Nat) -> Vec<Nat> {
    let mut out = Vec::new();
    while let Some(shape) = level_shape(level) {
        out.push(shape.parent);
        level = shape.parent;
    }
    out.reverse();
    out
}

/// The level at which `(s_p 0 u v, t_p 1 u v)` sits with `(level−1)₀ = m`,
/// via `n = ψ⁻¹(u)`, `r = ⟨p, n⟩`, `q = ⟨m, r⟩`; returns `q + 1`.
pub fn witness_level(p: Nat, m: Nat, u: &Word) -> Result<Nat, CodingError> {
    let n = psi_inv(u)?;
    let r = pair(p, n)?;
    let q = pair(m, r)?;
    q.checked_add(1).ok_or(CodingError::Overflow)
}

/// Materializes levels `0..=max_q` by the recurrence.
#[cfg(test)]
pub(crate) fn materialize(max_q: usize) -> Vec<(Word, Word)> {
    let mut levels: Vec<(Word, Word)> = Vec::with_capacity(max_q + 1);
    levels.push((Word::new(), Word::new()));
    for level in 1..=max_q {
        let shape = level_shape(level as Nat).expect("level >= 1");
        let (sa, ta) = &levels[shape.parent as usize];
        let mut tail = Word::new();
        tail.extend_from(&shape.middle);
        tail.extend_from(&Word::zeros(shape.pad as usize));
        let s = sa.with(false).concat(&tail);
        let t = ta.with(true).concat(&tail);
        levels.push((s, t));
    }
    levels
}
