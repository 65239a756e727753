//! Machine operating states and the sixteen state transitions between them.
//!
//! A machine is in one of four operating states per period: `0` (not
//! purchased yet, or already discarded) or `1..=3` (running that many work
//! shifts). A transition pairs the previous period's state with the current
//! one and is identified by a fixed index, enumerated row-major over
//! (tail, head).

/// Number of operating states (idle plus one, two or three shifts).
pub const STATE_COUNT: usize = 4;

/// Number of state transitions, `STATE_COUNT` squared.
pub const TRANSITION_COUNT: usize = 16;

/// One of the sixteen transitions between machine operating states.
///
/// The index encodes the pair: `index = 4 * tail + head`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition(u8);

/// The four behavioural classes a transition can fall into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionClass {
    /// Stays idle: not yet purchased or already discarded (0 -> 0).
    Inoperative,
    /// Enters operation from idle, i.e. the machine is purchased (0 -> s, s != 0).
    Purchase,
    /// Keeps operating, possibly at a different shift count (s -> s', both != 0).
    Operating,
    /// Discarded at the start of the period (s -> 0, s != 0).
    Discard,
}

impl Transition {
    /// Builds the transition from a (tail, head) state pair.
    ///
    /// Panics if either state is out of range.
    pub fn new(tail: u8, head: u8) -> Self {
        assert!((tail as usize) < STATE_COUNT && (head as usize) < STATE_COUNT);
        Transition(4 * tail + head)
    }

    /// Builds the transition from its index in `0..16`.
    pub fn from_index(index: usize) -> Self {
        assert!(index < TRANSITION_COUNT);
        Transition(index as u8)
    }

    /// All sixteen transitions in index order.
    pub fn all() -> impl Iterator<Item = Transition> {
        (0..TRANSITION_COUNT).map(Transition::from_index)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// State during the previous period.
    pub fn tail(self) -> u8 {
        self.0 / 4
    }

    /// State during the current period.
    pub fn head(self) -> u8 {
        self.0 % 4
    }

    /// Which of the four behavioural classes this transition belongs to.
    pub fn classify(self) -> TransitionClass {
        match (self.tail(), self.head()) {
            (0, 0) => TransitionClass::Inoperative,
            (0, _) => TransitionClass::Purchase,
            (_, 0) => TransitionClass::Discard,
            (_, _) => TransitionClass::Operating,
        }
    }

    /// Work shifts opened when this transition occurs: `max(0, head - tail)`.
    pub fn shifts_opened(self) -> u8 {
        self.head().saturating_sub(self.tail())
    }

    /// Work shifts closed when this transition occurs: `max(0, tail - head)`.
    pub fn shifts_closed(self) -> u8 {
        self.tail().saturating_sub(self.head())
    }

    /// True for transitions that leave the machine running this period
    /// (purchase or continued operation).
    pub fn is_running(self) -> bool {
        matches!(
            self.classify(),
            TransitionClass::Purchase | TransitionClass::Operating
        )
    }
}
