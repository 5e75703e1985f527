//! Alternating fixpoint over discovered clause instances.

use super::tabling::Instance;
use super::TruthValue;

/// Least model of the instances, reading `not a` as true iff `a` is false in `interp`.
fn gamma(instances: &[Instance], watchers: &[Vec<usize>], interp: &[bool]) -> Vec<bool> {
    let mut model = vec![false; interp.len()];
    let mut remaining: Vec<usize> = instances.iter().map(|i| i.pos.len()).collect();
    let mut queue: Vec<usize> = Vec::new();
    let blocked: Vec<bool> = instances.iter().map(|i| i.neg.iter().any(|&a| interp[a])).collect();
    for (k, inst) in instances.iter().enumerate() {
        if remaining[k] == 0 && !blocked[k] && !model[inst.head] {
            model[inst.head] = true;
            queue.push(inst.head);
        }
    }
    while let Some(a) = queue.pop() {
        for &k in &watchers[a] {
            remaining[k] -= 1;
            if remaining[k] == 0 && !blocked[k] {
                let h = instances[k].head;
                if !model[h] {
                    model[h] = true;
                    queue.push(h);
                }
            }
        }
    }
    model
}

/// Well-founded value of every atom id below `atoms`.
pub(crate) fn well_founded(instances: &[Instance], atoms: usize) -> Vec<TruthValue> {
    let mut watchers = vec![Vec::new(); atoms];
    for (k, inst) in instances.iter().enumerate() {
        for &a in &inst.pos {
            watchers[a].push(k);
        }
    }
    let mut truths = vec![false; atoms];
    let possible = loop {
        let possible = gamma(instances, &watchers, &truths);
        let next = gamma(instances, &watchers, &possible);
        if next == truths {
            break possible;
        }
        truths = next;
    };
    (0..atoms)
        .map(|a| match (truths[a], possible[a]) {
            (true, _) => TruthValue::True,
            (false, true) => TruthValue::Undefined,
            (false, false) => TruthValue::False,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(head: usize, pos: &[usize], neg: &[usize]) -> Instance {
        Instance { head, pos: pos.to_vec(), neg: neg.to_vec() }
    }

    #[test]
    fn hand_checked_iteration() {
        // a :- not b.  b :- not a.  c :- not c.  d.  e :- d, not f.
        let (a, b, c, d, e, f) = (0, 1, 2, 3, 4, 5);
        let prog = vec![inst(a, &[], &[b]), inst(b, &[], &[a]), inst(c, &[], &[c]), inst(d, &[], &[]), inst(e, &[d], &[f])];
        let m = well_founded(&prog, 6);
        use TruthValue::*;
        assert_eq!(m, vec![Undefined, Undefined, Undefined, True, True, False]);
    }
}
