//! Feature activation and cross-entropy computed straight from the board.

use cogniplay_core::{Action, Cell, FeatureSet, GameState, Relative};

const SYMS: [(i32, i32, i32, i32); 8] = [
    (1, 0, 0, 1),
    (0, -1, 1, 0),
    (-1, 0, 0, -1),
    (0, 1, -1, 0),
    (-1, 0, 0, 1),
    (1, 0, 0, -1),
    (0, 1, 1, 0),
    (0, -1, -1, 0),
];

fn relative(state: &GameState, col: i32, row: i32) -> Relative {
    let spec = state.spec();
    if col < 0 || row < 0 || col >= spec.columns as i32 || row >= spec.rows as i32 {
        return Relative::OffBoard;
    }
    let cell = state.cells()[row as usize * spec.columns as usize + col as usize];
    match cell {
        Cell::Empty => Relative::Empty,
        c if c == state.to_move().cell() => Relative::Friend,
        _ => Relative::Foe,
    }
}

/// Feature `f` fires for `a` when some rotation or reflection of its
/// constraints holds around `a`.
pub fn active(fs: &FeatureSet, f: usize, state: &GameState, a: Action) -> bool {
    let cs = fs.feature(f).constraints();
    SYMS.iter().any(|&(m00, m01, m10, m11)| {
        cs.iter().all(|c| {
            let (dx, dy) = (c.dx as i32, c.dy as i32);
            let (x, y) = (m00 * dx + m01 * dy, m10 * dx + m11 * dy);
            relative(state, a.col as i32 + x, a.row as i32 + y) == c.req
        })
    })
}

pub fn activations(fs: &FeatureSet, state: &GameState) -> Vec<Vec<usize>> {
    state
        .legal_actions()
        .unwrap()
        .into_iter()
        .map(|a| (0..fs.len()).filter(|&f| active(fs, f, state, a)).collect())
        .collect()
}

/// Mean cross-entropy for weights `w` given precomputed activations.
pub fn loss(w: &[f64], batch: &[(Vec<Vec<usize>>, Vec<f64>)]) -> f64 {
    let mut total = 0.0;
    for (acts, target) in batch {
        let scores: Vec<f64> = acts
            .iter()
            .map(|fs| fs.iter().map(|&f| w[f]).sum())
            .collect();
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = scores.iter().map(|s| (s - max).exp()).sum();
        let log_z = max + z.ln();
        total -= target
            .iter()
            .zip(&scores)
            .filter(|(t, _)| **t > 0.0)
            .map(|(t, s)| t * (s - log_z))
            .sum::<f64>();
    }
    total / batch.len() as f64
}

/// Central finite differences of [`loss`].
pub fn fd_gradient(w: &[f64], batch: &[(Vec<Vec<usize>>, Vec<f64>)], h: f64) -> Vec<f64> {
    let mut w = w.to_vec();
    (0..w.len())
        .map(|i| {
            let x = w[i];
            w[i] = x + h;
            let up = loss(&w, batch);
            w[i] = x - h;
            let down = loss(&w, batch);
            w[i] = x;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `|a - b| / max(|a|, |b|)` in the Euclidean norm, zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}
