//! Small tuple/combination enumeration helpers shared by the checkers.

/// All ordered `k`-tuples of pairwise distinct entries drawn from `items`.
pub(crate) fn ordered_tuples<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::with_capacity(k);
    let mut used = vec![false; items.len()];
    fn rec<T: Clone>(
        items: &[T],
        k: usize,
        cur: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<T>>,
    ) {
        if cur.len() == k {
            out.push(cur.iter().map(|&i| items[i].clone()).collect());
            return;
        }
        for i in 0..items.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(items, k, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(items, k, &mut cur, &mut used, &mut out);
    out
}

/// All ascending `k`-subsets of `items` (taken in the given order).
pub(crate) fn combinations<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::with_capacity(k);
    fn rec<T: Clone>(
        items: &[T],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<T>>,
    ) {
        if cur.len() == k {
            out.push(cur.iter().map(|&i| items[i].clone()).collect());
            return;
        }
        for i in start..items.len() {
            cur.push(i);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

/// Copy of `tuple` with the 1-based position `pos` removed.
pub(crate) fn deleted<T: Clone>(tuple: &[T], pos: usize) -> Vec<T> {
    debug_assert!(pos >= 1 && pos <= tuple.len());
    let mut out = Vec::with_capacity(tuple.len() - 1);
    out.extend_from_slice(&tuple[..pos - 1]);
    out.extend_from_slice(&tuple[pos..]);
    out
}

/// Iterate all digit vectors of the given mixed radix, calling `f` on each;
/// stops early if `f` returns false.
pub(crate) fn mixed_radix_for_each(radixes: &[usize], mut f: impl FnMut(&[usize]) -> bool) {
    let mut digits = vec![0usize; radixes.len()];
    if radixes.contains(&0) {
        return;
    }
    loop {
        if !f(&digits) {
            return;
        }
        let mut i = radixes.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < radixes[i] {
                break;
            }
            digits[i] = 0;
        }
    }
}
