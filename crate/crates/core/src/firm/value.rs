use std::fmt;
use std::str::FromStr;

/// Value type of a numeric node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    P,
    Iu,
    Is,
    Su,
    Ss,
    Bu,
    Bs,
    E,
    F,
    D,
    C,
    B,
    NotYetComputed,
}

impl Mode {
    pub const ALL: [Mode; 13] = [
        Mode::P,
        Mode::Iu,
        Mode::Is,
        Mode::Su,
        Mode::Ss,
        Mode::Bu,
        Mode::Bs,
        Mode::E,
        Mode::F,
        Mode::D,
        Mode::C,
        Mode::B,
        Mode::NotYetComputed,
    ];

    pub const INTEGER: [Mode; 6] = [Mode::Iu, Mode::Is, Mode::Su, Mode::Ss, Mode::Bu, Mode::Bs];

    pub fn name(self) -> &'static str {
        match self {
            Mode::P => "p",
            Mode::Iu => "Iu",
            Mode::Is => "Is",
            Mode::Su => "Su",
            Mode::Ss => "Ss",
            Mode::Bu => "Bu",
            Mode::Bs => "Bs",
            Mode::E => "E",
            Mode::F => "F",
            Mode::D => "D",
            Mode::C => "C",
            Mode::B => "b",
            Mode::NotYetComputed => "NotYetComputed",
        }
    }

    pub fn is_integer(self) -> bool {
        Self::INTEGER.contains(&self)
    }

    pub fn is_signed(self) -> bool {
        matches!(self, Mode::Is | Mode::Ss | Mode::Bs)
    }

    /// Only F and D carry float constants; E stays unfoldable.
    pub fn is_float(self) -> bool {
        matches!(self, Mode::F | Mode::D)
    }

    /// Bit width of integer modes.
    pub fn width(self) -> Option<u32> {
        match self {
            Mode::Iu | Mode::Is => Some(32),
            Mode::Su | Mode::Ss => Some(16),
            Mode::Bu | Mode::Bs => Some(8),
            _ => None,
        }
    }

    /// Reduces `v` to the two's-complement range of an integer mode.
    pub fn wrap(self, v: i64) -> i64 {
        let Some(w) = self.width() else { return v };
        let mask = (1i64 << w) - 1;
        let low = v & mask;
        if self.is_signed() && low >> (w - 1) & 1 == 1 {
            low - (1i64 << w)
        } else {
            low
        }
    }

    /// Rounds a real to this float mode.
    pub fn round_float(self, v: f64) -> f64 {
        match self {
            Mode::F => v as f32 as f64,
            _ => v,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode: {s}"))
    }
}

/// A mode-tagged constant.
#[derive(Debug, Clone, Copy)]
pub enum ConstValue {
    /// `bits` always lies within the mode's range (see [`Mode::wrap`]).
    Int { mode: Mode, bits: i64 },
    Float { mode: Mode, value: f64 },
    Bool(bool),
}

impl ConstValue {
    /// Integer constant, wrapped into the mode's width.
    pub fn int(mode: Mode, v: i64) -> ConstValue {
        debug_assert!(mode.is_integer(), "{mode} is not an integer mode");
        ConstValue::Int { mode, bits: mode.wrap(v) }
    }

    /// Float constant, rounded to the mode.
    pub fn float(mode: Mode, v: f64) -> ConstValue {
        debug_assert!(mode.is_float(), "{mode} is not a float mode");
        ConstValue::Float { mode, value: mode.round_float(v) }
    }

    pub fn mode(&self) -> Mode {
        match self {
            ConstValue::Int { mode, .. } | ConstValue::Float { mode, .. } => *mode,
            ConstValue::Bool(_) => Mode::B,
        }
    }

    /// Integer reading used for Cond selection: booleans count as 0/1.
    pub fn as_i64(&self) -> Option<i64> {
        match self {
            ConstValue::Int { bits, .. } => Some(*bits),
            ConstValue::Bool(b) => Some(*b as i64),
            ConstValue::Float { .. } => None,
        }
    }

    pub fn is_truthy(&self) -> bool {
        match self {
            ConstValue::Int { bits, .. } => *bits != 0,
            ConstValue::Float { value, .. } => *value != 0.0,
            ConstValue::Bool(b) => *b,
        }
    }
}

/// Floats compare by bit pattern so that NaN results compare equal to
/// themselves in oracle checks.
impl PartialEq for ConstValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ConstValue::Int { mode: m1, bits: b1 }, ConstValue::Int { mode: m2, bits: b2 }) => m1 == m2 && b1 == b2,
            (ConstValue::Float { mode: m1, value: v1 }, ConstValue::Float { mode: m2, value: v2 }) => {
                m1 == m2 && v1.to_bits() == v2.to_bits()
            }
            (ConstValue::Bool(a), ConstValue::Bool(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for ConstValue {}

impl fmt::Display for ConstValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstValue::Int { bits, .. } => write!(f, "{bits}"),
            ConstValue::Float { value, .. } => f.write_str(&crate::gxl::format_float(*value)),
            ConstValue::Bool(b) => write!(f, "{b}"),
        }
    }
}
