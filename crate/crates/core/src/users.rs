//! Labels for the three users, the three unordered pairs and the six
//! ordered (directed) pairs.

use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum User {
    One,
    Two,
    Three,
}

impl User {
    pub const ALL: [User; 3] = [User::One, User::Two, User::Three];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<User> {
        User::ALL.get(i).copied()
    }

    /// The pair formed by the two other users.
    pub fn opposite_pair(self) -> Pair {
        match self {
            User::One => Pair::P23,
            User::Two => Pair::P13,
            User::Three => Pair::P12,
        }
    }

    /// The two directions in which this user transmits, in ascending order of
    /// the receiving user.
    pub fn outgoing(self) -> [Direction; 2] {
        match self {
            User::One => [Direction::D12, Direction::D13],
            User::Two => [Direction::D21, Direction::D23],
            User::Three => [Direction::D31, Direction::D32],
        }
    }
}

impl fmt::Display for User {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

/// Unordered pair of users; the lower-numbered user comes first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pair {
    P12,
    P13,
    P23,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::P12, Pair::P13, Pair::P23];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn users(self) -> (User, User) {
        match self {
            Pair::P12 => (User::One, User::Two),
            Pair::P13 => (User::One, User::Three),
            Pair::P23 => (User::Two, User::Three),
        }
    }

    /// The third user, who acts as eavesdropper on this pair's key.
    pub fn eavesdropper(self) -> User {
        match self {
            Pair::P12 => User::Three,
            Pair::P13 => User::Two,
            Pair::P23 => User::One,
        }
    }

    pub fn of(a: User, b: User) -> Option<Pair> {
        match (a.min(b), a.max(b)) {
            (User::One, User::Two) => Some(Pair::P12),
            (User::One, User::Three) => Some(Pair::P13),
            (User::Two, User::Three) => Some(Pair::P23),
            _ => None,
        }
    }

    /// Lower user to higher user.
    pub fn forward(self) -> Direction {
        let (i, j) = self.users();
        Direction::new(i, j).expect("distinct users")
    }

    /// Higher user to lower user.
    pub fn reverse(self) -> Direction {
        let (i, j) = self.users();
        Direction::new(j, i).expect("distinct users")
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j) = self.users();
        write!(f, "{i}{j}")
    }
}

/// Ordered pair `from -> to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    D12,
    D13,
    D21,
    D23,
    D31,
    D32,
}

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction::D12,
        Direction::D21,
        Direction::D13,
        Direction::D31,
        Direction::D23,
        Direction::D32,
    ];

    pub fn new(from: User, to: User) -> Option<Direction> {
        use User::*;
        match (from, to) {
            (One, Two) => Some(Direction::D12),
            (One, Three) => Some(Direction::D13),
            (Two, One) => Some(Direction::D21),
            (Two, Three) => Some(Direction::D23),
            (Three, One) => Some(Direction::D31),
            (Three, Two) => Some(Direction::D32),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from(self) -> User {
        match self {
            Direction::D12 | Direction::D13 => User::One,
            Direction::D21 | Direction::D23 => User::Two,
            Direction::D31 | Direction::D32 => User::Three,
        }
    }

    pub fn to(self) -> User {
        match self {
            Direction::D21 | Direction::D31 => User::One,
            Direction::D12 | Direction::D32 => User::Two,
            Direction::D13 | Direction::D23 => User::Three,
        }
    }

    pub fn pair(self) -> Pair {
        Pair::of(self.from(), self.to()).expect("distinct users")
    }

    pub fn flipped(self) -> Direction {
        Direction::new(self.to(), self.from()).expect("distinct users")
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.from(), self.to())
    }
}
