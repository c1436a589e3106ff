//! Hand-written models of the corpus machines.
//!
//! These encode the route table and the event rules directly on bit sets,
//! without the parser, evaluator or explorer, so that counts produced by the
//! engine can be checked against an independent construction.

use std::collections::{HashMap, VecDeque};

pub const ROUTES: usize = 10;
pub const BLOCKS: &[char] = &[
    'A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'J', 'K', 'L', 'M', 'N',
];

/// Successor pairs of every route, as written in the topology context.
pub const NXT: [&[(char, char)]; ROUTES] = [
    &[('L', 'A'), ('A', 'B'), ('B', 'C')],
    &[
        ('L', 'A'),
        ('A', 'B'),
        ('B', 'D'),
        ('D', 'E'),
        ('E', 'F'),
        ('F', 'G'),
    ],
    &[
        ('L', 'A'),
        ('A', 'B'),
        ('B', 'D'),
        ('D', 'K'),
        ('K', 'J'),
        ('J', 'N'),
    ],
    &[('M', 'H'), ('H', 'I'), ('I', 'K'), ('K', 'F'), ('F', 'G')],
    &[('M', 'H'), ('H', 'I'), ('I', 'J'), ('J', 'N')],
    &[('C', 'B'), ('B', 'A'), ('A', 'L')],
    &[
        ('G', 'F'),
        ('F', 'E'),
        ('E', 'D'),
        ('D', 'B'),
        ('B', 'A'),
        ('A', 'L'),
    ],
    &[
        ('N', 'J'),
        ('J', 'K'),
        ('K', 'D'),
        ('D', 'B'),
        ('B', 'A'),
        ('A', 'L'),
    ],
    &[('G', 'F'), ('F', 'K'), ('K', 'I'), ('I', 'H'), ('H', 'M')],
    &[('N', 'J'), ('J', 'I'), ('I', 'H'), ('H', 'M')],
];

fn block(c: char) -> usize {
    BLOCKS.iter().position(|&b| b == c).unwrap()
}

/// Blocks of route `r` (0-based) as a bit mask.
pub fn route_blocks(r: usize) -> u16 {
    NXT[r]
        .iter()
        .fold(0, |m, &(a, b)| m | 1 << block(a) | 1 << block(b))
}

/// Predecessor of block `b` on route `r`.
fn pred(r: usize, b: usize) -> Option<usize> {
    NXT[r]
        .iter()
        .find(|&&(_, to)| block(to) == b)
        .map(|&(from, _)| block(from))
}

/// Abstract route machine: one free → reserved → formed → free cycle per
/// route. BFS over base-3 encoded states; returns (states, transitions).
pub fn route_cycles(n: usize) -> (usize, usize) {
    let mut seen = HashMap::new();
    let mut queue = VecDeque::from([vec![0u8; n]]);
    seen.insert(vec![0u8; n], ());
    let mut transitions = 0;
    while let Some(s) = queue.pop_front() {
        for r in 0..n {
            let mut t = s.clone();
            t[r] = (t[r] + 1) % 3;
            transitions += 1;
            if seen.insert(t.clone(), ()).is_none() {
                queue.push_back(t);
            }
        }
    }
    (seen.len(), transitions)
}

/// Route status as the glue defines it: 0 free, 1 reserved, 2 formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Concrete {
    pub resrt: u16,
    pub frm: u16,
    /// Route (0-based) holding each block, `NONE` when free.
    pub owner: [u8; 14],
}

pub const NONE: u8 = u8::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Reservation(usize),
    Freeing(usize),
    Formation(usize),
    Release(usize, usize),
}

impl Move {
    pub fn event(self) -> &'static str {
        match self {
            Move::Reservation(_) => "route_reservation",
            Move::Freeing(_) => "route_freeing",
            Move::Formation(_) => "route_formation",
            Move::Release(..) => "block_release",
        }
    }
}

impl Concrete {
    pub fn initial() -> Concrete {
        Concrete {
            resrt: 0,
            frm: 0,
            owner: [NONE; 14],
        }
    }

    pub fn resbl(&self) -> u16 {
        (0..14)
            .filter(|&b| self.owner[b] != NONE)
            .fold(0, |m, b| m | 1 << b)
    }

    pub fn status(&self, r: usize) -> u8 {
        if self.frm >> r & 1 == 1 {
            2
        } else if self.resrt >> r & 1 == 1 {
            1
        } else {
            0
        }
    }

    fn key(&self) -> u128 {
        let mut k = (self.resrt as u128) << 10 | self.frm as u128;
        for &o in &self.owner {
            k = k << 4 | (o as u128 & 0xF);
        }
        k
    }

    /// Every enabled move with its successor.
    pub fn moves(&self) -> Vec<(Move, Concrete)> {
        let mut out = Vec::new();
        let resbl = self.resbl();
        for r in 0..ROUTES {
            let bit = 1u16 << r;
            if self.resrt & bit == 0 && route_blocks(r) & resbl == 0 {
                let mut t = *self;
                t.resrt |= bit;
                for b in 0..14 {
                    if route_blocks(r) >> b & 1 == 1 {
                        t.owner[b] = r as u8;
                    }
                }
                out.push((Move::Reservation(r), t));
            }
            if self.resrt & bit != 0 && !self.owner.contains(&(r as u8)) {
                let mut t = *self;
                t.resrt &= !bit;
                t.frm &= !bit;
                out.push((Move::Freeing(r), t));
            }
            if self.resrt & bit != 0 && self.frm & bit == 0 {
                let mut t = *self;
                t.frm |= bit;
                out.push((Move::Formation(r), t));
            }
            if self.frm & bit != 0 {
                for b in 0..14 {
                    let rear = pred(r, b).is_none_or(|p| self.owner[p] != r as u8);
                    if self.owner[b] == r as u8 && rear {
                        let mut t = *self;
                        t.owner[b] = NONE;
                        out.push((Move::Release(r, b), t));
                    }
                }
            }
        }
        out
    }
}

/// BFS over the concrete route machine. `visit` sees every state once
/// with its enabled moves. Returns (states, transitions).
pub fn explore_concrete(mut visit: impl FnMut(&Concrete, &[(Move, Concrete)])) -> (usize, usize) {
    let mut seen: HashMap<u128, ()> = HashMap::new();
    let init = Concrete::initial();
    seen.insert(init.key(), ());
    let mut queue = VecDeque::from([init]);
    let mut transitions = 0;
    while let Some(s) = queue.pop_front() {
        let moves = s.moves();
        transitions += moves.len();
        visit(&s, &moves);
        for (_, t) in &moves {
            if seen.insert(t.key(), ()).is_none() {
                queue.push_back(*t);
            }
        }
    }
    (seen.len(), transitions)
}

/// Edges of the projection of the concrete space on the status of route
/// `r`: (from status, event, to status) -> (distinct sources, class size
/// of `from`). Self-loops are left out.
pub fn status_projection(r: usize) -> HashMap<(u8, &'static str, u8), (usize, usize)> {
    let mut class_size = [0usize; 3];
    let mut sources: HashMap<(u8, &'static str, u8), usize> = HashMap::new();
    explore_concrete(|s, moves| {
        let from = s.status(r);
        class_size[from as usize] += 1;
        let mut here: Vec<(u8, &'static str, u8)> = moves
            .iter()
            .map(|(m, t)| (from, m.event(), t.status(r)))
            .filter(|(a, _, b)| a != b)
            .collect();
        here.sort();
        here.dedup();
        for k in here {
            *sources.entry(k).or_default() += 1;
        }
    });
    sources
        .into_iter()
        .map(|(k, n)| (k, (n, class_size[k.0 as usize])))
        .collect()
}

pub const STATUS: [&str; 3] = ["free", "reserved", "formed"];
