//! Small enumeration helpers shared by the finite constructions.

use std::collections::BTreeMap;

/// All functions from `dom` to `cod` as maps, in odometer order (the last
/// domain entry varies fastest, values in `cod` order).  An empty domain
/// yields the single empty function; an empty codomain with a non-empty
/// domain yields nothing.
pub fn all_functions<A: Ord + Clone, B: Clone>(dom: &[A], cod: &[B]) -> Vec<BTreeMap<A, B>> {
    if dom.is_empty() {
        return vec![BTreeMap::new()];
    }
    if cod.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut counters = vec![0usize; dom.len()];
    loop {
        out.push(
            dom.iter()
                .zip(&counters)
                .map(|(a, &i)| (a.clone(), cod[i].clone()))
                .collect(),
        );
        let mut k = dom.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            counters[k] += 1;
            if counters[k] < cod.len() {
                break;
            }
            counters[k] = 0;
            if k == 0 {
                return out;
            }
        }
    }
}

/// Cartesian product of finitely many finite slots: every way of picking one
/// entry per slot, first slot slowest.
pub fn cartesian<T: Clone>(slots: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for slot in slots {
        let mut next = Vec::new();
        for prefix in &out {
            for item in slot {
                let mut row = prefix.clone();
                row.push(item.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}
