//! Small helpers over little-endian `u64` bit vectors.
//!
//! Bit `i` of a vector lives in word `i / 64` at position `i % 64`. Written
//! out as little-endian bytes, bit `b` of byte `k` is therefore element
//! `8k + b`, which is the on-disk layout of trajectory slices.

#[inline]
pub const fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
pub fn get(words: &[u64], i: usize) -> bool {
    (words[i >> 6] >> (i & 63)) & 1 == 1
}

#[inline]
pub fn set(words: &mut [u64], i: usize) {
    words[i >> 6] |= 1u64 << (i & 63);
}

#[inline]
pub fn assign(words: &mut [u64], i: usize, value: bool) {
    let mask = 1u64 << (i & 63);
    if value {
        words[i >> 6] |= mask;
    } else {
        words[i >> 6] &= !mask;
    }
}

#[inline]
pub fn count_ones(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

/// Popcount of `a & b`.
#[inline]
pub fn count_and(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x & y).count_ones() as usize)
        .sum()
}

/// Popcount of `a ^ b`.
#[inline]
pub fn count_xor(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum()
}

/// Mask with the low `bits % 64` bits of the final word set (all ones when
/// `bits` is a multiple of 64).
#[inline]
pub fn tail_mask(bits: usize) -> u64 {
    match bits & 63 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_and_counts() {
        let mut v = vec![0u64; words_for(130)];
        assert_eq!(v.len(), 3);
        for i in [0, 63, 64, 129] {
            set(&mut v, i);
        }
        assert!(get(&v, 63) && get(&v, 64) && !get(&v, 65));
        assert_eq!(count_ones(&v), 4);
        assign(&mut v, 63, false);
        assert_eq!(count_ones(&v), 3);
        let w = vec![u64::MAX; 3];
        assert_eq!(count_and(&v, &w), 3);
        assert_eq!(count_xor(&v, &w), 192 - 3);
        assert_eq!(tail_mask(130), 0b11);
        assert_eq!(tail_mask(128), u64::MAX);
    }
}
