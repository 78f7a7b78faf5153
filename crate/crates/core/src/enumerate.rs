use crate::error::{Error, Result};
use crate::tolerance::MAX_STATE_SPACE;

/// Size of the joint configuration space, refusing anything past the guard.
pub fn guarded_size(radices: &[usize]) -> Result<usize> {
    let size = radices
        .iter()
        .try_fold(1u128, |acc, &r| acc.checked_mul(r as u128))
        .unwrap_or(u128::MAX);
    if size > MAX_STATE_SPACE {
        return Err(Error::StateSpace {
            size,
            limit: MAX_STATE_SPACE,
        });
    }
    Ok(size as usize)
}

/// Calls `visit` on every assignment of a mixed-radix counter, last digit
/// fastest.
pub fn for_each_assignment(radices: &[usize], mut visit: impl FnMut(&[usize])) {
    if radices.contains(&0) {
        return;
    }
    let mut digits = vec![0usize; radices.len()];
    loop {
        visit(&digits);
        let mut k = radices.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < radices[k] {
                break;
            }
            digits[k] = 0;
        }
    }
}
