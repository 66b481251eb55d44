//! Constant arithmetic shared by folding and the interpreter.

use crate::firm::{BinaryOp, ConstValue, Mode, UnaryOp};

/// Folds a unary operation; `None` means no fold. A `NotYetComputed` mode
/// falls back to the operand's mode.
pub fn eval_unary(op: UnaryOp, mode: Mode, v: ConstValue) -> Option<ConstValue> {
    let mode = if mode == Mode::NotYetComputed { v.mode() } else { mode };
    match (op, v) {
        (UnaryOp::Minus, ConstValue::Int { bits, .. }) if mode.is_integer() => {
            Some(ConstValue::int(mode, bits.wrapping_neg()))
        }
        (UnaryOp::Minus, ConstValue::Float { value, .. }) if mode.is_float() => Some(ConstValue::float(mode, -value)),
        (UnaryOp::Not, ConstValue::Int { bits, .. }) if mode.is_integer() => Some(ConstValue::int(mode, !bits)),
        (UnaryOp::Not, ConstValue::Bool(b)) if mode == Mode::B => Some(ConstValue::Bool(!b)),
        (UnaryOp::Conv, v) => convert(v, mode),
        _ => None,
    }
}

fn convert(v: ConstValue, to: Mode) -> Option<ConstValue> {
    match v {
        ConstValue::Int { bits, .. } if to.is_integer() => Some(ConstValue::int(to, bits)),
        ConstValue::Int { bits, .. } if to.is_float() => Some(ConstValue::float(to, bits as f64)),
        ConstValue::Int { bits, .. } if to == Mode::B => Some(ConstValue::Bool(bits != 0)),
        ConstValue::Float { value, .. } if to.is_integer() && value.is_finite() => {
            Some(ConstValue::int(to, value.trunc() as i64))
        }
        ConstValue::Float { value, .. } if to.is_float() => Some(ConstValue::float(to, value)),
        ConstValue::Bool(b) if to.is_integer() => Some(ConstValue::int(to, b as i64)),
        ConstValue::Bool(b) if to == Mode::B => Some(ConstValue::Bool(b)),
        _ => None,
    }
}

/// Folds a binary operation; `None` means no fold (including division by
/// zero). A `NotYetComputed` mode falls back to the left operand's mode.
/// Cmp is read as equality and yields a `b` value.
pub fn eval_binary(op: BinaryOp, mode: Mode, l: ConstValue, r: ConstValue) -> Option<ConstValue> {
    let mode = if mode == Mode::NotYetComputed { l.mode() } else { mode };
    if op == BinaryOp::Cmp {
        return match (l, r) {
            (ConstValue::Int { bits: a, .. }, ConstValue::Int { bits: b, .. }) => {
                Some(ConstValue::Bool(mode.wrap(a) == mode.wrap(b)))
            }
            (ConstValue::Float { value: a, .. }, ConstValue::Float { value: b, .. }) => Some(ConstValue::Bool(a == b)),
            (ConstValue::Bool(a), ConstValue::Bool(b)) => Some(ConstValue::Bool(a == b)),
            _ => None,
        };
    }
    match (l, r) {
        (ConstValue::Int { bits: a, .. }, ConstValue::Int { bits: b, .. }) if mode.is_integer() => {
            let (a, b) = (mode.wrap(a), mode.wrap(b));
            let v = match op {
                BinaryOp::Add => a.wrapping_add(b),
                BinaryOp::Sub => a.wrapping_sub(b),
                BinaryOp::Mul => a.wrapping_mul(b),
                BinaryOp::And => a & b,
                BinaryOp::Or => a | b,
                BinaryOp::Eor => a ^ b,
                BinaryOp::Div if b != 0 => a.wrapping_div(b),
                BinaryOp::Mod if b != 0 => a.wrapping_rem(b),
                _ => return None,
            };
            Some(ConstValue::int(mode, v))
        }
        (ConstValue::Float { value: a, .. }, ConstValue::Float { value: b, .. }) if mode.is_float() => {
            let v = match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div if b != 0.0 => a / b,
                BinaryOp::Mod if b != 0.0 => a % b,
                _ => return None,
            };
            Some(ConstValue::float(mode, v))
        }
        (ConstValue::Bool(a), ConstValue::Bool(b)) if mode == Mode::B => match op {
            BinaryOp::And => Some(ConstValue::Bool(a & b)),
            BinaryOp::Or => Some(ConstValue::Bool(a | b)),
            BinaryOp::Eor => Some(ConstValue::Bool(a ^ b)),
            _ => None,
        },
        _ => None,
    }
}
