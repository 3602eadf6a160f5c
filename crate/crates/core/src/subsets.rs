//! Enumeration of k-subsets of `[n]` as bit masks, in increasing integer order.

/// Iterator over all `k`-element subsets of `{1, …, n}`, yielded as masks with
/// element `x` at bit `x - 1`. Order is ascending by mask value (Gosper's hack).
#[derive(Clone, Debug)]
pub struct KSubsets {
    next: Option<u128>,
    limit: u128,
}

impl KSubsets {
    pub fn new(n: u32, k: u32) -> Self {
        debug_assert!(n <= 64);
        let limit = 1u128 << n;
        let next = if k > n { None } else { Some((1u128 << k) - 1) };
        KSubsets { next, limit }
    }
}

impl Iterator for KSubsets {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        if cur >= self.limit {
            self.next = None;
            return None;
        }
        self.next = if cur == 0 {
            None
        } else {
            let low = cur & cur.wrapping_neg();
            let ripple = cur + low;
            Some((((cur ^ ripple) >> 2) / low) | ripple)
        };
        Some(cur as u64)
    }
}
