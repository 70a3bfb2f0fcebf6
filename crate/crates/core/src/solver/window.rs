use crate::error::{Error, Result};
use crate::odds::WindowKind;

/// Smallest value an entry may take during solving.
pub(crate) const FLOOR: f64 = 1e-300;

/// Outcome of one window update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Update {
    /// New (a, b, c, d); `clamped` marks an entry raised to the floor.
    Moved { entries: [f64; 4], clamped: bool },
    Unchanged,
    /// ad = bc = 0: the ratio is undefined and no update applies.
    Undefined,
}

/// Solves (a+δ)(d+δ) = K(b−δ)(c−δ) and returns δ.
///
/// `a`, `d` are the diagonal entries and `b`, `c` the anti-diagonal ones.
/// K is exp(ratio·η) for [`WindowKind::Pseudo`] and exp(ratio) for
/// [`WindowKind::Plain`]. The root kept is the unique one leaving all four
/// entries nonnegative.
pub fn window_delta(a: f64, b: f64, c: f64, d: f64, ratio: f64, kind: WindowKind) -> Result<f64> {
    let fail = || Error::NoAdmissibleRoot { a, b, c, d, ratio };
    if [a, b, c, d, ratio].iter().any(|x| !x.is_finite()) || [a, b, c, d].iter().any(|&x| x < 0.0) {
        return Err(fail());
    }
    let eta = a + b + c + d;
    let log_k = match kind {
        WindowKind::Pseudo if eta > 0.0 => ratio * eta,
        WindowKind::Pseudo => return Err(fail()),
        WindowKind::Plain => ratio,
    };
    match update(a, b, c, d, log_k) {
        Update::Moved { entries, .. } => Ok(entries[0] - a),
        Update::Unchanged => Ok(0.0),
        Update::Undefined => Err(fail()),
    }
}

/// Moves the window to log odds `log_k`, solving for whichever entry
/// shrinks so that tiny entries keep full relative accuracy.
pub(crate) fn update(a: f64, b: f64, c: f64, d: f64, log_k: f64) -> Update {
    let ad = a * d;
    let bc = b * c;
    let grow_diagonal = if ad == 0.0 && bc == 0.0 {
        return Update::Undefined;
    } else if bc == 0.0 {
        false
    } else if ad == 0.0 {
        true
    } else {
        let l = ((a / b) * (d / c)).ln();
        if l == log_k {
            return Update::Unchanged;
        }
        l < log_k
    };
    if grow_diagonal {
        // b, c shrink; the smaller becomes s.
        let (m, e) = (b.min(c), (b - c).abs());
        let (s, clamped) = shrunk(a + m, d + m, e, log_k.exp());
        let shift = m - s;
        let (nb, nc) = if b <= c { (s, e + s) } else { (e + s, s) };
        Update::Moved {
            entries: [a + shift, nb, nc, d + shift],
            clamped,
        }
    } else {
        let (m, e) = (a.min(d), (a - d).abs());
        let (s, clamped) = shrunk(b + m, c + m, e, (-log_k).exp());
        let shift = m - s;
        let (na, nd) = if a <= d { (s, e + s) } else { (e + s, s) };
        Update::Moved {
            entries: [na, b + shift, c + shift, nd],
            clamped,
        }
    }
}

/// Smaller root of (1−K)s² − (x+y+K e)s + xy = 0, i.e. (x−s)(y−s) = K s (e+s).
fn shrunk(x: f64, y: f64, e: f64, k: f64) -> (f64, bool) {
    let beta = x + y + k * e;
    let gamma = x * y;
    let disc = (beta * beta - 4.0 * (1.0 - k) * gamma).max(0.0);
    let s = 2.0 * gamma / (beta + disc.sqrt());
    if s.is_finite() && s >= FLOOR {
        (s, false)
    } else {
        (FLOOR, true)
    }
}
