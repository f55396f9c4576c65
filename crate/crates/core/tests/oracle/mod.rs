//! Brute-force reference implementations, kept apart from the crate's own
//! board code.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

pub const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

/// 3x3 board, index = row * 3 + col, 0 empty, 1 first player, 2 second.
pub type Board = [u8; 9];

pub fn winner(b: &Board) -> u8 {
    for l in LINES {
        if b[l[0]] != 0 && b[l[0]] == b[l[1]] && b[l[1]] == b[l[2]] {
            return b[l[0]];
        }
    }
    0
}

pub fn to_move(b: &Board) -> u8 {
    let x = b.iter().filter(|&&c| c == 1).count();
    let o = b.iter().filter(|&&c| c == 2).count();
    if x == o {
        1
    } else {
        2
    }
}

/// Every position reachable from the empty board, terminal ones included.
pub fn reachable() -> HashSet<Board> {
    fn walk(b: Board, seen: &mut HashSet<Board>) {
        if !seen.insert(b) || winner(&b) != 0 {
            return;
        }
        let p = to_move(&b);
        for i in 0..9 {
            if b[i] == 0 {
                let mut n = b;
                n[i] = p;
                walk(n, seen);
            }
        }
    }
    let mut seen = HashSet::new();
    walk([0; 9], &mut seen);
    seen
}

/// Minimax value for the side to move: 1 win, 0 draw, -1 loss.
pub fn minimax(b: &Board) -> i8 {
    let w = winner(b);
    if w != 0 {
        return if w == to_move(b) { 1 } else { -1 };
    }
    if b.iter().all(|&c| c != 0) {
        return 0;
    }
    let p = to_move(b);
    let mut best = -1;
    for i in 0..9 {
        if b[i] == 0 {
            let mut n = *b;
            n[i] = p;
            best = best.max(-minimax(&n));
        }
    }
    best
}

fn image(b: &Board, sym: usize) -> Board {
    let mut out = [0; 9];
    for r in 0..3 {
        for c in 0..3 {
            let (x, y) = (c as i32 - 1, r as i32 - 1);
            let (nx, ny) = match sym {
                0 => (x, y),
                1 => (-y, x),
                2 => (-x, -y),
                3 => (y, -x),
                4 => (-x, y),
                5 => (x, -y),
                6 => (y, x),
                _ => (-y, -x),
            };
            out[((ny + 1) * 3 + nx + 1) as usize] = b[r * 3 + c];
        }
    }
    out
}

pub fn class_key(b: &Board) -> Board {
    (0..8).map(|s| image(b, s)).min().unwrap()
}

pub fn immediate_wins(b: &Board) -> Vec<usize> {
    let p = to_move(b);
    (0..9)
        .filter(|&i| {
            b[i] == 0 && {
                let mut n = *b;
                n[i] = p;
                winner(&n) == p
            }
        })
        .collect()
}

/// Positions where the side to move has exactly one winning move and must
/// take it now: two stones each, first player to move, the opponent
/// threatening to complete a line, one immediate win available. One
/// representative per symmetry class, with its winning cell.
pub fn one_move_wins() -> Vec<(Board, usize)> {
    let mut classes = BTreeSet::new();
    let mut out = Vec::new();
    let mut boards: Vec<Board> = reachable().into_iter().collect();
    boards.sort();
    for b in boards {
        if b.iter().filter(|&&c| c != 0).count() != 4 || winner(&b) != 0 {
            continue;
        }
        let wins = immediate_wins(&b);
        let mut flipped = b;
        for c in flipped.iter_mut() {
            *c = match *c {
                1 => 2,
                2 => 1,
                x => x,
            };
        }
        let threats = immediate_wins(&flipped);
        if wins.len() != 1 || threats.is_empty() {
            continue;
        }
        // the immediate win is among the moves that keep the win
        let keeps: Vec<usize> = (0..9)
            .filter(|&i| {
                b[i] == 0 && {
                    let mut n = b;
                    n[i] = 1;
                    minimax(&n) == -1
                }
            })
            .collect();
        assert_eq!(minimax(&b), 1);
        assert!(keeps.contains(&wins[0]));
        if classes.insert(class_key(&b)) {
            out.push((b, wins[0]));
        }
    }
    out
}

/// A move order that reaches `b`: first-player and second-player stones
/// alternate in index order.
pub fn move_order(b: &Board) -> Vec<String> {
    let xs: Vec<usize> = (0..9).filter(|&i| b[i] == 1).collect();
    let os: Vec<usize> = (0..9).filter(|&i| b[i] == 2).collect();
    let mut out = Vec::new();
    for k in 0..xs.len() {
        out.push(cell_name(xs[k]));
        if k < os.len() {
            out.push(cell_name(os[k]));
        }
    }
    out
}

pub fn cell_name(i: usize) -> String {
    format!("{}{}", (b'a' + (i % 3) as u8) as char, i / 3 + 1)
}

pub mod policy;

/// Exact (first-player win, draw, second-player win) probabilities when
/// both sides play uniformly random legal moves from `b`.
pub fn random_play_outcome(b: &Board) -> (f64, f64, f64) {
    match winner(b) {
        1 => return (1.0, 0.0, 0.0),
        2 => return (0.0, 0.0, 1.0),
        _ => {}
    }
    let empties: Vec<usize> = (0..9).filter(|&i| b[i] == 0).collect();
    if empties.is_empty() {
        return (0.0, 1.0, 0.0);
    }
    let p = to_move(b);
    let share = 1.0 / empties.len() as f64;
    let mut acc = (0.0, 0.0, 0.0);
    for i in empties {
        let mut n = *b;
        n[i] = p;
        let (w, d, l) = random_play_outcome(&n);
        acc = (acc.0 + share * w, acc.1 + share * d, acc.2 + share * l);
    }
    acc
}
