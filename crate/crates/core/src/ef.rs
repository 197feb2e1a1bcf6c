//! Exact solver for the Ehrenfeucht-Fraisse game.
//!
//! Duplicator wins the `r`-round game on `A` and `B` iff the structures
//! agree on every sentence of quantifier rank at most `r`. Positions are
//! sets of pebbled pairs; constants are pebbled from the start. Equality is
//! respected only through a designated equality symbol, so over a
//! signature without one the game matches equality-free logic.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::structure::Structure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    A,
    B,
}

/// One round of a winning Spoiler line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EfRound {
    pub round: usize,
    pub spoiler_side: Side,
    pub spoiler_element: usize,
    /// Duplicator's lowest-index reply that keeps a partial isomorphism.
    pub reply: Option<usize>,
    /// No reply keeps a partial isomorphism.
    pub immediate_loss: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EfOutcome {
    pub rounds: usize,
    pub equivalent: bool,
    /// Empty when the structures are equivalent at this rank.
    pub trace: Vec<EfRound>,
}

struct Game<'a> {
    a: &'a Structure,
    b: &'a Structure,
    memo: HashMap<(Vec<(usize, usize)>, usize), bool>,
}

impl<'a> Game<'a> {
    /// The pebbles in `pos` define a partial isomorphism, given that the
    /// pairs before `fresh` already do.
    fn consistent(&self, pos: &[(usize, usize)], fresh: usize) -> bool {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (index, (ra, rb)) in self
            .a
            .relations()
            .iter()
            .zip(self.b.relations())
            .enumerate()
        {
            let k = self.a.signature().relations()[index].arity;
            let m = pos.len();
            let total = m.pow(k as u32);
            for code in 0..total {
                let mut rest = code;
                let mut uses_fresh = false;
                xs.clear();
                ys.clear();
                for _ in 0..k {
                    let i = rest % m;
                    rest /= m;
                    uses_fresh |= i >= fresh;
                    xs.push(pos[i].0);
                    ys.push(pos[i].1);
                }
                if uses_fresh && ra.contains(&xs) != rb.contains(&ys) {
                    return false;
                }
            }
        }
        true
    }

    fn extend(pos: &[(usize, usize)], pair: (usize, usize)) -> Vec<(usize, usize)> {
        let mut next = pos.to_vec();
        if let Err(at) = next.binary_search(&pair) {
            next.insert(at, pair);
        }
        next
    }

    fn legal(&self, pos: &[(usize, usize)], pair: (usize, usize)) -> Option<Vec<(usize, usize)>> {
        if pos.binary_search(&pair).is_ok() {
            return Some(pos.to_vec());
        }
        let mut ordered = pos.to_vec();
        ordered.push(pair);
        if !self.consistent(&ordered, pos.len()) {
            return None;
        }
        Some(Self::extend(pos, pair))
    }

    fn sizes(&self, side: Side) -> (usize, usize) {
        match side {
            Side::A => (self.a.domain_size(), self.b.domain_size()),
            Side::B => (self.b.domain_size(), self.a.domain_size()),
        }
    }

    fn pair(side: Side, spoiler: usize, reply: usize) -> (usize, usize) {
        match side {
            Side::A => (spoiler, reply),
            Side::B => (reply, spoiler),
        }
    }

    fn duplicator_wins(&mut self, pos: &[(usize, usize)], rounds: usize) -> bool {
        if rounds == 0 {
            return true;
        }
        let key = (pos.to_vec(), rounds);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let wins = [Side::A, Side::B].into_iter().all(|side| {
            let (spoiler_n, reply_n) = self.sizes(side);
            (0..spoiler_n).all(|x| self.answer(pos, rounds, side, x, reply_n).is_some())
        });
        self.memo.insert(key, wins);
        wins
    }

    /// Duplicator's lowest winning reply to Spoiler playing `x` on `side`.
    fn answer(
        &mut self,
        pos: &[(usize, usize)],
        rounds: usize,
        side: Side,
        x: usize,
        reply_n: usize,
    ) -> Option<usize> {
        (0..reply_n).find(|&y| match self.legal(pos, Self::pair(side, x, y)) {
            Some(next) => self.duplicator_wins(&next, rounds - 1),
            None => false,
        })
    }

    /// A Spoiler line from a lost position, against Duplicator's
    /// lowest-index legal replies.
    fn trace(&mut self, mut pos: Vec<(usize, usize)>, rounds: usize) -> Vec<EfRound> {
        let mut out = Vec::new();
        for left in (1..=rounds).rev() {
            let mut chosen = None;
            'moves: for side in [Side::A, Side::B] {
                let (spoiler_n, reply_n) = self.sizes(side);
                for x in 0..spoiler_n {
                    if self.answer(&pos, left, side, x, reply_n).is_none() {
                        chosen = Some((side, x, reply_n));
                        break 'moves;
                    }
                }
            }
            let Some((side, x, reply_n)) = chosen else {
                break;
            };
            let round = rounds - left + 1;
            let reply = (0..reply_n).find_map(|y| {
                self.legal(&pos, Self::pair(side, x, y))
                    .map(|next| (y, next))
            });
            out.push(EfRound {
                round,
                spoiler_side: side,
                spoiler_element: x,
                reply: reply.as_ref().map(|(y, _)| *y),
                immediate_loss: reply.is_none(),
            });
            match reply {
                Some((_, next)) => pos = next,
                None => break,
            }
        }
        out
    }
}

/// Solves the `rounds`-round game on two standard structures over the same
/// signature.
pub fn ef_game(a: &Structure, b: &Structure, rounds: usize) -> Result<EfOutcome> {
    if a.signature() != b.signature() {
        return Err(Error::SignatureMismatch(format!(
            "`{}` and `{}` have different signatures",
            a.name(),
            b.name()
        )));
    }
    for s in [a, b] {
        if !s.is_standard() {
            return Err(Error::SignatureMismatch(format!(
                "`{}` interprets its equality symbol as a proper congruence",
                s.name()
            )));
        }
    }
    let mut game = Game {
        a,
        b,
        memo: HashMap::new(),
    };
    let mut start: Vec<(usize, usize)> = a
        .constant_values()
        .iter()
        .copied()
        .zip(b.constant_values().iter().copied())
        .collect();
    start.sort_unstable();
    start.dedup();
    if !game.consistent(&start, 0) {
        return Ok(EfOutcome {
            rounds,
            equivalent: false,
            trace: Vec::new(),
        });
    }
    let equivalent = game.duplicator_wins(&start, rounds);
    let trace = if equivalent {
        Vec::new()
    } else {
        game.trace(start, rounds)
    };
    Ok(EfOutcome {
        rounds,
        equivalent,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn identical_structures_are_equivalent() {
        let s = zoo::singlet();
        for r in 0..4 {
            assert!(ef_game(&s, &s, r).unwrap().equivalent);
        }
    }

    #[test]
    fn empty_relations_and_equality() {
        let two = zoo::empty_binary(2, true);
        let three = zoo::empty_binary(3, true);
        assert!(ef_game(&two, &three, 2).unwrap().equivalent);
        let out = ef_game(&two, &three, 3).unwrap();
        assert!(!out.equivalent);
        assert_eq!(out.trace.len(), 3);
        assert!(out.trace.last().unwrap().immediate_loss);
        let two = zoo::empty_binary(2, false);
        let three = zoo::empty_binary(3, false);
        for r in 0..5 {
            assert!(ef_game(&two, &three, r).unwrap().equivalent);
        }
    }

    #[test]
    fn spoiler_wins_on_an_edge_against_no_edge() {
        let edge = zoo::directed_edge();
        let empty = zoo::empty_binary(2, false);
        // No loops on either side, so one pebble sees nothing.
        assert!(ef_game(&edge, &empty, 1).unwrap().equivalent);
        let out = ef_game(&edge, &empty, 2).unwrap();
        assert!(!out.equivalent);
        assert_eq!(out.trace.len(), 2);
        assert_eq!(
            (out.trace[0].spoiler_side, out.trace[0].spoiler_element),
            (Side::A, 0)
        );
        assert!(out.trace[1].immediate_loss);
    }

    #[test]
    fn signature_mismatch() {
        assert!(ef_game(&zoo::singlet(), &zoo::z5add(), 1).is_err());
        assert!(ef_game(
            &zoo::k2loop_with_total_equality(),
            &zoo::k2loop_with_total_equality(),
            1
        )
        .is_err());
    }
}
