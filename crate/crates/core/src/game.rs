//! m,n,k boards: rules, move notation, win detection and board symmetry.
//!
//! Cells are stored row-major with row 0 at the bottom, so `a1` is the
//! bottom-left corner and index order is `a1, b1, c1, .., a2, ..`. Every
//! tie-break downstream resolves to the lowest index in this order.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Column letters limit the board width.
pub const MAX_DIM: u8 = 26;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Rules {
    /// Any run of at least `k` wins, for both sides.
    #[default]
    Freestyle,
    /// First player (black) wins only with exactly `k` and may not play
    /// overlines, double fours or double open threes.
    Renju,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GameSpec {
    pub columns: u8,
    pub rows: u8,
    pub k: u8,
    pub rules: Rules,
}

impl GameSpec {
    pub const TIC_TAC_TOE: GameSpec = GameSpec {
        columns: 3,
        rows: 3,
        k: 3,
        rules: Rules::Freestyle,
    };
    pub const GOMOKU: GameSpec = GameSpec {
        columns: 15,
        rows: 15,
        k: 5,
        rules: Rules::Freestyle,
    };
    pub const RENJU: GameSpec = GameSpec {
        columns: 15,
        rows: 15,
        k: 5,
        rules: Rules::Renju,
    };

    pub fn new(columns: u8, rows: u8, k: u8) -> Result<Self> {
        let spec = GameSpec {
            columns,
            rows,
            k,
            rules: Rules::Freestyle,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_rules(mut self, rules: Rules) -> Self {
        self.rules = rules;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns < 3 || self.rows < 3 {
            return Err(Error::InvalidSpec("board must be at least 3x3"));
        }
        if self.columns > MAX_DIM || self.rows > MAX_DIM {
            return Err(Error::InvalidSpec("board wider or taller than 26"));
        }
        if self.k < 1 || self.k > self.columns.max(self.rows) {
            return Err(Error::InvalidSpec("k must be in 1..=max(columns, rows)"));
        }
        Ok(())
    }

    /// Short identifier used on the command line and in session records.
    pub fn name(&self) -> String {
        match *self {
            GameSpec::TIC_TAC_TOE => "ttt".into(),
            GameSpec::GOMOKU => "gomoku".into(),
            GameSpec::RENJU => "renju".into(),
            s => {
                let mut name = alloc::format!("mnk-{}x{}x{}", s.columns, s.rows, s.k);
                if s.rules == Rules::Renju {
                    name.push_str("-renju");
                }
                name
            }
        }
    }

    /// Inverse of [`GameSpec::name`].
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "ttt" | "tictactoe" | "tic-tac-toe" => return Some(GameSpec::TIC_TAC_TOE),
            "gomoku" => return Some(GameSpec::GOMOKU),
            "renju" => return Some(GameSpec::RENJU),
            _ => {}
        }
        let rest = name.strip_prefix("mnk-")?;
        let (dims, rules) = match rest.strip_suffix("-renju") {
            Some(d) => (d, Rules::Renju),
            None => (rest, Rules::Freestyle),
        };
        let mut it = dims.split('x').map(|p| p.parse::<u8>().ok());
        let (c, r, k) = (it.next()??, it.next()??, it.next()??);
        if it.next().is_some() {
            return None;
        }
        GameSpec::new(c, r, k).ok().map(|s| s.with_rules(rules))
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.columns as usize * self.rows as usize
    }

    #[inline]
    pub fn index(&self, a: Action) -> usize {
        a.row as usize * self.columns as usize + a.col as usize
    }

    #[inline]
    pub fn action(&self, index: usize) -> Action {
        let c = self.columns as usize;
        Action::new((index % c) as u8, (index / c) as u8)
    }

    #[inline]
    pub fn contains(&self, col: i32, row: i32) -> bool {
        col >= 0 && row >= 0 && col < self.columns as i32 && row < self.rows as i32
    }

    pub fn is_square(&self) -> bool {
        self.columns == self.rows
    }

    /// Symmetries that map the board onto itself: all eight on square
    /// boards, the four axis-preserving ones otherwise.
    pub fn symmetries(&self) -> &'static [Symmetry] {
        const ALL: [Symmetry; 8] = [
            Symmetry(0),
            Symmetry(1),
            Symmetry(2),
            Symmetry(3),
            Symmetry(4),
            Symmetry(5),
            Symmetry(6),
            Symmetry(7),
        ];
        const RECT: [Symmetry; 4] = [Symmetry(0), Symmetry(2), Symmetry(4), Symmetry(5)];
        if self.is_square() {
            &ALL
        } else {
            &RECT
        }
    }
}

impl fmt::Display for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Player {
    P1,
    P2,
}

impl Player {
    #[inline]
    pub fn opponent(self) -> Player {
        match self {
            Player::P1 => Player::P2,
            Player::P2 => Player::P1,
        }
    }

    #[inline]
    pub fn cell(self) -> Cell {
        match self {
            Player::P1 => Cell::P1,
            Player::P2 => Cell::P2,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::P1 => "P1",
            Player::P2 => "P2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Cell {
    Empty = 0,
    P1 = 1,
    P2 = 2,
}

impl Cell {
    pub fn player(self) -> Option<Player> {
        match self {
            Cell::Empty => None,
            Cell::P1 => Some(Player::P1),
            Cell::P2 => Some(Player::P2),
        }
    }

    fn symbol(self) -> u8 {
        match self {
            Cell::Empty => b'.',
            Cell::P1 => b'x',
            Cell::P2 => b'o',
        }
    }
}

/// A cell seen from the side to move.
///
/// The discriminants double as the 2-bit codes used by the feature matcher.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Relative {
    Empty = 0,
    Friend = 1,
    Foe = 2,
    OffBoard = 3,
}

impl Relative {
    pub fn from_code(code: u8) -> Relative {
        match code & 3 {
            0 => Relative::Empty,
            1 => Relative::Friend,
            2 => Relative::Foe,
            _ => Relative::OffBoard,
        }
    }

    /// Single-letter tag used in weight checkpoints.
    pub fn tag(self) -> char {
        match self {
            Relative::Friend => 'F',
            Relative::Empty => 'E',
            Relative::OffBoard => 'X',
            Relative::Foe => 'O',
        }
    }

    pub fn from_tag(tag: &str) -> Option<Relative> {
        match tag {
            "F" => Some(Relative::Friend),
            "E" => Some(Relative::Empty),
            "X" => Some(Relative::OffBoard),
            "O" => Some(Relative::Foe),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub col: u8,
    pub row: u8,
}

impl Action {
    pub const fn new(col: u8, row: u8) -> Self {
        Action { col, row }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", (b'a' + self.col) as char, self.row as u32 + 1)
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidNotation(s.into());
        let mut chars = s.chars();
        let letter = chars.next().ok_or_else(bad)?.to_ascii_lowercase();
        if !letter.is_ascii_lowercase() {
            return Err(bad());
        }
        let row: u32 = chars.as_str().parse().map_err(|_| bad())?;
        if row == 0 || row > MAX_DIM as u32 {
            return Err(bad());
        }
        Ok(Action::new(letter as u8 - b'a', (row - 1) as u8))
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Action {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Action {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str>>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// +1 first player won, -1 second player won, 0 otherwise.
    pub value: i8,
    pub terminal: bool,
}

impl Outcome {
    pub const ONGOING: Outcome = Outcome {
        value: 0,
        terminal: false,
    };

    pub fn winner(&self) -> Option<Player> {
        match self.value {
            1 => Some(Player::P1),
            -1 => Some(Player::P2),
            _ => None,
        }
    }

    /// Value from `player`'s point of view.
    pub fn value_for(&self, player: Player) -> i8 {
        match player {
            Player::P1 => self.value,
            Player::P2 => -self.value,
        }
    }
}

/// One of the eight rotations/reflections of the square.
///
/// Maps offset `(x, y)` to, in order of the inner index:
/// `(x,y) (-y,x) (-x,-y) (y,-x) (-x,y) (x,-y) (y,x) (-y,-x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symmetry(pub u8);

impl Symmetry {
    pub const IDENTITY: Symmetry = Symmetry(0);

    pub fn all() -> impl Iterator<Item = Symmetry> {
        (0..8).map(Symmetry)
    }

    #[inline]
    pub fn map_offset(self, x: i32, y: i32) -> (i32, i32) {
        match self.0 & 7 {
            0 => (x, y),
            1 => (-y, x),
            2 => (-x, -y),
            3 => (y, -x),
            4 => (-x, y),
            5 => (x, -y),
            6 => (y, x),
            _ => (-y, -x),
        }
    }

    pub fn swaps_axes(self) -> bool {
        matches!(self.0 & 7, 1 | 3 | 6 | 7)
    }

    pub fn inverse(self) -> Symmetry {
        match self.0 & 7 {
            1 => Symmetry(3),
            3 => Symmetry(1),
            s => Symmetry(s),
        }
    }

    /// Image of a board cell. The symmetry must be one of
    /// [`GameSpec::symmetries`] for `spec`.
    pub fn map_action(self, spec: &GameSpec, a: Action) -> Action {
        let (w, h) = (spec.columns as i32, spec.rows as i32);
        let (x, y) = self.map_offset(2 * a.col as i32 - (w - 1), 2 * a.row as i32 - (h - 1));
        let (w2, h2) = if self.swaps_axes() { (h, w) } else { (w, h) };
        Action::new(((x + w2 - 1) / 2) as u8, ((y + h2 - 1) / 2) as u8)
    }
}

const DIRECTIONS: [(i32, i32); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];

/// Board position plus the move list that produced it.
///
/// Values are immutable in spirit: [`GameState::apply`] returns a new
/// state. [`GameState::play`] mutates in place for hot loops that own
/// their copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameState {
    spec: GameSpec,
    cells: Vec<Cell>,
    to_move: Player,
    history: Vec<Action>,
    winner: Option<Player>,
}

impl GameState {
    pub fn new(spec: GameSpec) -> Self {
        GameState {
            spec,
            cells: alloc::vec![Cell::Empty; spec.cells()],
            to_move: Player::P1,
            history: Vec::new(),
            winner: None,
        }
    }

    /// Replay `moves` from the empty board.
    pub fn from_moves(spec: GameSpec, moves: &[Action]) -> Result<Self> {
        spec.validate()?;
        let mut state = GameState::new(spec);
        for &a in moves {
            state.play(a)?;
        }
        Ok(state)
    }

    #[inline]
    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    #[inline]
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    #[inline]
    pub fn cell(&self, a: Action) -> Cell {
        self.cells[self.spec.index(a)]
    }

    #[inline]
    pub fn to_move(&self) -> Player {
        self.to_move
    }

    #[inline]
    pub fn history(&self) -> &[Action] {
        &self.history
    }

    pub fn last_move(&self) -> Option<Action> {
        self.history.last().copied()
    }

    pub fn stone_count(&self) -> usize {
        self.history.len()
    }

    #[inline]
    pub fn is_terminal(&self) -> bool {
        self.winner.is_some() || self.history.len() == self.cells.len()
    }

    /// Empty cells in row-major order (forbidden black moves excluded under
    /// Renju rules).
    pub fn legal_actions(&self) -> Result<Vec<Action>> {
        if self.is_terminal() {
            return Err(Error::TerminalState);
        }
        Ok(self
            .legal_indices()
            .into_iter()
            .map(|i| self.spec.action(i))
            .collect())
    }

    pub(crate) fn legal_indices(&self) -> Vec<usize> {
        let renju_black = self.spec.rules == Rules::Renju && self.to_move == Player::P1;
        self.cells
            .iter()
            .enumerate()
            .filter(|&(i, &c)| c == Cell::Empty && !(renju_black && self.is_forbidden(i)))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_legal(&self, a: Action) -> bool {
        !self.is_terminal()
            && self.spec.contains(a.col as i32, a.row as i32)
            && self.cell(a) == Cell::Empty
            && !(self.spec.rules == Rules::Renju
                && self.to_move == Player::P1
                && self.is_forbidden(self.spec.index(a)))
    }

    pub fn apply(&self, a: Action) -> Result<GameState> {
        let mut next = self.clone();
        next.play(a)?;
        Ok(next)
    }

    /// In-place [`GameState::apply`].
    pub fn play(&mut self, a: Action) -> Result<()> {
        if self.is_terminal() {
            return Err(Error::TerminalState);
        }
        if !self.is_legal(a) {
            return Err(Error::IllegalMove(a));
        }
        self.place(self.spec.index(a));
        Ok(())
    }

    /// Place a stone for the side to move on an empty, legal cell.
    #[inline]
    pub(crate) fn place(&mut self, index: usize) {
        debug_assert_eq!(self.cells[index], Cell::Empty);
        let mover = self.to_move;
        self.cells[index] = mover.cell();
        self.history.push(self.spec.action(index));
        if self.completes_line(index, mover) {
            self.winner = Some(mover);
        }
        self.to_move = mover.opponent();
    }

    pub fn outcome(&self) -> Outcome {
        match self.winner {
            Some(Player::P1) => Outcome {
                value: 1,
                terminal: true,
            },
            Some(Player::P2) => Outcome {
                value: -1,
                terminal: true,
            },
            None => Outcome {
                value: 0,
                terminal: self.history.len() == self.cells.len(),
            },
        }
    }

    /// Full-board recomputation of [`GameState::outcome`] from the cells.
    pub fn scan_outcome(&self) -> Outcome {
        let winner = self.scan_winner();
        Outcome {
            value: match winner {
                Some(Player::P1) => 1,
                Some(Player::P2) => -1,
                None => 0,
            },
            terminal: winner.is_some() || self.cells.iter().all(|&c| c != Cell::Empty),
        }
    }

    fn scan_winner(&self) -> Option<Player> {
        let (w, h) = (self.spec.columns as i32, self.spec.rows as i32);
        for row in 0..h {
            for col in 0..w {
                let c = self.cells[(row * w + col) as usize];
                let Some(p) = c.player() else { continue };
                for &(dx, dy) in &DIRECTIONS {
                    // only start at the first stone of a maximal run
                    if self.at(col - dx, row - dy) == Some(c) {
                        continue;
                    }
                    let mut len = 0;
                    while self.at(col + dx * len, row + dy * len) == Some(c) {
                        len += 1;
                    }
                    if self.run_wins(len as usize, p) {
                        return Some(p);
                    }
                }
            }
        }
        None
    }

    #[inline]
    fn at(&self, col: i32, row: i32) -> Option<Cell> {
        if self.spec.contains(col, row) {
            Some(self.cells[(row * self.spec.columns as i32 + col) as usize])
        } else {
            None
        }
    }

    #[inline]
    fn run_wins(&self, len: usize, p: Player) -> bool {
        let k = self.spec.k as usize;
        if self.spec.rules == Rules::Renju && p == Player::P1 {
            len == k
        } else {
            len >= k
        }
    }

    fn run_through(&self, index: usize, dx: i32, dy: i32, c: Cell) -> usize {
        let w = self.spec.columns as i32;
        let (col, row) = (index as i32 % w, index as i32 / w);
        let mut len = 1;
        for sign in [1, -1] {
            let mut step = 1;
            while self.at(col + sign * dx * step, row + sign * dy * step) == Some(c) {
                len += 1;
                step += 1;
            }
        }
        len
    }

    fn completes_line(&self, index: usize, p: Player) -> bool {
        DIRECTIONS
            .iter()
            .any(|&(dx, dy)| self.run_wins(self.run_through(index, dx, dy, p.cell()), p))
    }

    /// Cell at `anchor + (dx, dy)` classified relative to the side to move.
    #[inline]
    pub fn cell_relative(&self, anchor: Action, dx: i32, dy: i32) -> Relative {
        match self.at(anchor.col as i32 + dx, anchor.row as i32 + dy) {
            None => Relative::OffBoard,
            Some(Cell::Empty) => Relative::Empty,
            Some(c) if c == self.to_move.cell() => Relative::Friend,
            Some(_) => Relative::Foe,
        }
    }

    /// Image of this position under `sym`, with the history mapped move by
    /// move.
    pub fn transformed(&self, sym: Symmetry) -> GameState {
        let spec = if sym.swaps_axes() {
            GameSpec {
                columns: self.spec.rows,
                rows: self.spec.columns,
                ..self.spec
            }
        } else {
            self.spec
        };
        let mut cells = alloc::vec![Cell::Empty; spec.cells()];
        for (i, &c) in self.cells.iter().enumerate() {
            let img = sym.map_action(&self.spec, self.spec.action(i));
            cells[spec.index(img)] = c;
        }
        let mut out = GameState {
            spec,
            cells,
            to_move: self.to_move,
            history: self
                .history
                .iter()
                .map(|&a| sym.map_action(&self.spec, a))
                .collect(),
            winner: None,
        };
        out.winner = out.scan_winner();
        out
    }

    fn serialize_under(&self, sym: Symmetry, buf: &mut Vec<u8>) {
        use core::fmt::Write as _;
        buf.clear();
        let mut head = String::new();
        let _ = write!(
            head,
            "{}x{}x{}{}:{}:",
            self.spec.columns,
            self.spec.rows,
            self.spec.k,
            if self.spec.rules == Rules::Renju {
                "r"
            } else {
                ""
            },
            match self.to_move {
                Player::P1 => 'x',
                Player::P2 => 'o',
            }
        );
        buf.extend_from_slice(head.as_bytes());
        let start = buf.len();
        buf.resize(start + self.cells.len(), b'.');
        // only board-preserving symmetries reach here, so the image fits
        for (i, &c) in self.cells.iter().enumerate() {
            let img = sym.map_action(&self.spec, self.spec.action(i));
            buf[start + self.spec.index(img)] = c.symbol();
        }
    }

    /// Canonical key plus every symmetry whose image attains it.
    pub fn canonical_form(&self) -> (String, Vec<Symmetry>) {
        let mut best: Vec<u8> = Vec::new();
        let mut syms = Vec::new();
        let mut buf = Vec::new();
        for &sym in self.spec.symmetries() {
            self.serialize_under(sym, &mut buf);
            if syms.is_empty() || buf < best {
                core::mem::swap(&mut best, &mut buf);
                syms.clear();
                syms.push(sym);
            } else if buf == best {
                syms.push(sym);
            }
        }
        (String::from_utf8(best).expect("ascii"), syms)
    }

    /// Deterministic key shared by positions equal up to board symmetry.
    pub fn canonical_key(&self) -> String {
        self.canonical_form().0
    }

    /// Image of `a` in the canonical frame of this state. Symmetric
    /// alternatives resolve to the lowest index.
    pub fn canonical_action(&self, a: Action) -> Action {
        let (_, syms) = self.canonical_form();
        syms.iter()
            .map(|s| s.map_action(&self.spec, a))
            .min_by_key(|&b| self.spec.index(b))
            .unwrap_or(a)
    }

    /// Zobrist-free 64-bit fingerprint of cells and side to move.
    pub fn fingerprint(&self) -> u64 {
        let shape = (self.spec.columns as u64) << 8
            | (self.spec.rows as u64) << 16
            | (self.spec.k as u64) << 24;
        let mut h = crate::rng::mix(shape | self.to_move as u64);
        for (i, &c) in self.cells.iter().enumerate() {
            if c != Cell::Empty {
                h ^= crate::rng::mix(((i as u64) << 2) | c as u64);
            }
        }
        h
    }

    fn is_forbidden(&self, index: usize) -> bool {
        renju::is_forbidden(self, index)
    }
}

impl fmt::Display for GameState {
    /// Board with row numbers on the left and column letters below,
    /// top row first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.spec.columns as usize;
        for row in (0..self.spec.rows as usize).rev() {
            write!(f, "{:>2} ", row + 1)?;
            for col in 0..w {
                let c = self.cells[row * w + col];
                write!(f, " {}", c.symbol() as char)?;
            }
            writeln!(f)?;
        }
        write!(f, "   ")?;
        for col in 0..w {
            write!(f, " {}", (b'a' + col as u8) as char)?;
        }
        Ok(())
    }
}

/// Black restrictions under Renju rules.
///
/// Threes and fours are judged on the 11-cell window of each line through
/// the candidate move. The recursive check that a three's completing point
/// is itself not forbidden is not performed.
mod renju {
    use super::{Cell, GameState, Player, DIRECTIONS};

    #[derive(Clone, Copy, PartialEq, Eq)]
    enum L {
        Black,
        Empty,
        Blocked,
    }

    const C: usize = 5;

    fn window(state: &GameState, index: usize, dx: i32, dy: i32) -> [L; 11] {
        let w = state.spec.columns as i32;
        let (col, row) = (index as i32 % w, index as i32 / w);
        let mut out = [L::Blocked; 11];
        for (j, slot) in out.iter_mut().enumerate() {
            let step = j as i32 - C as i32;
            *slot = if step == 0 {
                L::Black
            } else {
                match state.at(col + dx * step, row + dy * step) {
                    Some(Cell::P1) => L::Black,
                    Some(Cell::Empty) => L::Empty,
                    _ => L::Blocked,
                }
            };
        }
        out
    }

    /// (start, end) inclusive of the black run through `at`.
    fn run(l: &[L; 11], at: usize) -> (usize, usize) {
        let (mut a, mut b) = (at, at);
        while a > 0 && l[a - 1] == L::Black {
            a -= 1;
        }
        while b < 10 && l[b + 1] == L::Black {
            b += 1;
        }
        (a, b)
    }

    fn run_len(l: &[L; 11], at: usize) -> usize {
        let (a, b) = run(l, at);
        b - a + 1
    }

    fn with(l: &[L; 11], j: usize) -> [L; 11] {
        let mut m = *l;
        m[j] = L::Black;
        m
    }

    fn fours(l: &[L; 11], k: usize) -> bool {
        (0..11).any(|j| l[j] == L::Empty && run_len(&with(l, j), C) == k)
    }

    fn straight_four(l: &[L; 11], k: usize) -> bool {
        let (a, b) = run(l, C);
        if b - a + 1 != k - 1 || a == 0 || b == 10 {
            return false;
        }
        [a - 1, b + 1]
            .iter()
            .all(|&j| l[j] == L::Empty && run_len(&with(l, j), C) == k)
    }

    fn open_three(l: &[L; 11], k: usize) -> bool {
        (0..11).any(|j| l[j] == L::Empty && straight_four(&with(l, j), k))
    }

    pub(super) fn is_forbidden(state: &GameState, index: usize) -> bool {
        if state.to_move != Player::P1 || state.cells[index] != Cell::Empty {
            return false;
        }
        let k = state.spec.k as usize;
        if !(3..=6).contains(&k) {
            return false;
        }
        let lines: [[L; 11]; 4] = DIRECTIONS.map(|(dx, dy)| window(state, index, dx, dy));
        if lines.iter().any(|l| run_len(l, C) == k) {
            return false;
        }
        if lines.iter().any(|l| run_len(l, C) > k) {
            return true;
        }
        let four_lines = lines.iter().filter(|l| fours(l, k)).count();
        let threes = lines
            .iter()
            .filter(|l| !fours(l, k) && open_three(l, k))
            .count();
        four_lines >= 2 || threes >= 2
    }
}
