//! Counting propagator for `Σ lits ≥ k`.
//!
//! Each constraint keeps the number of its literals currently false. Once
//! that count reaches `len - k` every remaining literal is forced true; one
//! more false literal is a conflict.

use super::cdcl::{Conflict, Reason, Trail};
use super::lit::{LBool, L};

struct Card {
    lits: Vec<L>,
    /// `len - k`: how many literals may be false.
    slack: u32,
    falses: u32,
}

pub(super) struct CardEngine {
    cards: Vec<Card>,
    /// Cards containing each literal, indexed by `L::idx`.
    occ: Vec<Vec<u32>>,
}

impl CardEngine {
    pub fn new(num_vars: usize) -> Self {
        Self {
            cards: Vec::new(),
            occ: vec![Vec::new(); 2 * num_vars],
        }
    }


    /// Adds `Σ lits ≥ k` with `0 < k ≤ lits.len()`; returns its index.
    pub fn add(&mut self, lits: Vec<L>, k: u32) -> u32 {
        debug_assert!(k >= 1 && k as usize <= lits.len());
        let id = self.cards.len() as u32;
        for &l in &lits {
            self.occ[l.idx()].push(id);
        }
        let slack = lits.len() as u32 - k;
        self.cards.push(Card {
            lits,
            slack,
            falses: 0,
        });
        id
    }

    /// Forces the literals of cards that have no slack at all. Called once
    /// before search, with nothing assigned.
    pub fn initial_units(&self, trail: &mut Trail) -> Result<(), Conflict> {
        for (id, card) in self.cards.iter().enumerate() {
            if card.slack == 0 {
                for &l in &card.lits {
                    match trail.lit_value(l) {
                        LBool::Undef => trail.enqueue(l, Reason::Card(id as u32)),
                        LBool::False => return Err(Conflict::Lits(vec![l])),
                        LBool::True => {}
                    }
                }
            }
        }
        Ok(())
    }

    /// Processes the trail literal `p` (now true).
    pub fn on_true(&mut self, p: L, trail: &mut Trail) -> Result<(), Conflict> {
        let falsified = !p;
        let mut conflict = None;
        for i in 0..self.occ[falsified.idx()].len() {
            let id = self.occ[falsified.idx()][i];
            let card = &mut self.cards[id as usize];
            card.falses += 1;
            if conflict.is_some() {
                continue;
            }
            if card.falses > card.slack {
                let lits = card
                    .lits
                    .iter()
                    .copied()
                    .filter(|&l| trail.lit_value(l) == LBool::False)
                    .collect();
                conflict = Some(Conflict::Lits(lits));
            } else if card.falses == card.slack {
                for &l in &card.lits {
                    if trail.lit_value(l) == LBool::Undef {
                        trail.enqueue(l, Reason::Card(id));
                    }
                }
            }
        }
        match conflict {
            Some(c) => Err(c),
            None => Ok(()),
        }
    }

    /// Reverts [`CardEngine::on_true`] for `p`.
    pub fn undo(&mut self, p: L) {
        for &id in &self.occ[(!p).idx()] {
            self.cards[id as usize].falses -= 1;
        }
    }

    /// Reason clause for the literal of `card` that was forced on `var`:
    /// the forced literal first, then the literals already false before it.
    pub fn explain(&self, card: u32, implied: L, trail: &Trail) -> Vec<L> {
        let pos = trail.pos(implied.var());
        let mut out = vec![implied];
        out.extend(
            self.cards[card as usize]
                .lits
                .iter()
                .copied()
                .filter(|&l| {
                    l != implied && trail.lit_value(l) == LBool::False && trail.pos(l.var()) < pos
                }),
        );
        out
    }
}
