//! Fixed-length packed bit vectors.
//!
//! Bit `i` lives in word `i / 64` at position `i % 64`. Bits past `len` in the
//! last word are always zero, so word-level equality and popcounts are exact.

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PackedBits {
    len: usize,
    words: Vec<u64>,
}

#[inline]
pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl PackedBits {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut bits = Self {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        bits.clear_tail();
        bits
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                out.words[i / 64] |= 1 << (i % 64);
            }
        }
        out
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    pub fn not(&self) -> Self {
        let mut out = Self {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.clear_tail();
        out
    }

    pub fn reversed(&self) -> Self {
        let mut out = Self::zeros(self.len);
        for i in 0..self.len {
            if self.get(i) {
                out.set(self.len - 1 - i, true);
            }
        }
        out
    }

    /// Ring rotation where output bit `i` is input bit `i - 1 (mod len)`.
    pub fn rotate_from_left(&self) -> Self {
        let n = self.words.len();
        let mut out = Self::zeros(self.len);
        if self.len == 0 {
            return out;
        }
        let mut carry = 0u64;
        for j in 0..n {
            let w = self.words[j];
            out.words[j] = (w << 1) | carry;
            carry = w >> 63;
        }
        out.clear_tail();
        if self.get(self.len - 1) {
            out.words[0] |= 1;
        }
        out
    }

    /// Ring rotation where output bit `i` is input bit `i + 1 (mod len)`.
    pub fn rotate_from_right(&self) -> Self {
        let n = self.words.len();
        let mut out = Self::zeros(self.len);
        if self.len == 0 {
            return out;
        }
        for j in 0..n {
            let next = if j + 1 < n { self.words[j + 1] << 63 } else { 0 };
            out.words[j] = (self.words[j] >> 1) | next;
        }
        if self.get(0) {
            out.set(self.len - 1, true);
        }
        out
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub(crate) fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl std::fmt::Debug for PackedBits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        write!(f, "PackedBits({s})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotations_match_index_arithmetic() {
        for len in [1usize, 3, 63, 64, 65, 101, 130] {
            let bools: Vec<bool> = (0..len).map(|i| (i * 7 + i / 3) % 5 < 2).collect();
            let bits = PackedBits::from_bools(&bools);
            let left = bits.rotate_from_left();
            let right = bits.rotate_from_right();
            for i in 0..len {
                assert_eq!(left.get(i), bools[(i + len - 1) % len], "len {len} i {i}");
                assert_eq!(right.get(i), bools[(i + 1) % len], "len {len} i {i}");
            }
            assert_eq!(left.count_ones(), bits.count_ones());
            assert_eq!(right.count_ones(), bits.count_ones());
        }
    }

    #[test]
    fn not_keeps_tail_clear() {
        let bits = PackedBits::zeros(70).not();
        assert_eq!(bits.count_ones(), 70);
        assert_eq!(bits, PackedBits::ones(70));
    }
}
