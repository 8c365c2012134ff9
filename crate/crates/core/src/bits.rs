//! Bit-width helpers for state accounting.

use crate::quant::ceil_log2;

/// Width of a field holding values in `0..=max`.
pub fn width_for(max: u64) -> u32 {
    ceil_log2(max + 1).max(1)
}

/// Length of the Elias-gamma code of `x >= 1`: `2*floor(log2 x) + 1`.
pub fn gamma_len(x: u64) -> u32 {
    debug_assert!(x >= 1);
    2 * (63 - x.max(1).leading_zeros()) + 1
}

/// Elias-gamma encoding of `x >= 1`, most significant bit first.
pub fn gamma_encode(x: u64, out: &mut Vec<bool>) {
    let len = 64 - x.leading_zeros();
    out.extend(std::iter::repeat(false).take(len as usize - 1));
    out.extend((0..len).rev().map(|i| (x >> i) & 1 == 1));
}

/// Decodes one gamma codeword starting at `*pos`.
pub fn gamma_decode(bits: &[bool], pos: &mut usize) -> Option<u64> {
    let mut zeros = 0;
    while *bits.get(*pos)? == false {
        zeros += 1;
        *pos += 1;
    }
    let mut x = 0u64;
    for _ in 0..=zeros {
        x = (x << 1) | (*bits.get(*pos)? as u64);
        *pos += 1;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn widths() {
        assert_eq!(width_for(0), 1);
        assert_eq!(width_for(1), 1);
        assert_eq!(width_for(16), 5);
        assert_eq!(width_for(15), 4);
        assert_eq!(gamma_len(1), 1);
        assert_eq!(gamma_len(2), 3);
        assert_eq!(gamma_len(4), 5);
    }

    proptest! {
        #[test]
        fn gamma_is_prefix_free(xs in proptest::collection::vec(1u64..100_000, 1..20)) {
            let mut bits = Vec::new();
            for &x in &xs {
                gamma_encode(x, &mut bits);
            }
            prop_assert_eq!(bits.len() as u32, xs.iter().map(|&x| gamma_len(x)).sum::<u32>());
            let mut pos = 0;
            for &x in &xs {
                prop_assert_eq!(gamma_decode(&bits, &mut pos), Some(x));
            }
            prop_assert_eq!(pos, bits.len());
        }
    }
}
