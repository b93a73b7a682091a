use std::collections::HashMap;
use std::ops::Deref;
use std::sync::{Arc, Mutex, OnceLock};

pub(crate) const NONE: u32 = u32::MAX;

/// Precomputed monomial tables for jets in `m` real variables truncated at total degree `k`.
///
/// Monomials are stored graded: all degree-0 terms, then degree 1, and so on. Inside one
/// degree the order is lexicographic with the first variable most significant.
#[derive(Debug)]
pub struct JetSpace {
    m: usize,
    k: usize,
    monos: Vec<Vec<u8>>,
    degree: Vec<usize>,
    offset: Vec<usize>,
    index: HashMap<Vec<u8>, u32>,
    // mul[i][j] = index of monos[i] + monos[j], for every j with deg(i) + deg(j) <= k
    mul: Vec<Vec<u32>>,
    // raise[i * m + v] = index of monos[i] + e_v, or NONE past degree k
    raise: Vec<u32>,
}

fn push_degree(m: usize, d: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(pos: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left as u8;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[pos] = e as u8;
            rec(pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    if m == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return;
    }
    let mut cur = vec![0u8; m];
    rec(0, d, &mut cur, out);
}

impl JetSpace {
    fn build(m: usize, k: usize) -> Self {
        let mut monos = Vec::new();
        let mut offset = Vec::with_capacity(k + 2);
        for d in 0..=k {
            offset.push(monos.len());
            push_degree(m, d, &mut monos);
        }
        offset.push(monos.len());
        let degree: Vec<usize> = monos
            .iter()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .collect();
        let index: HashMap<Vec<u8>, u32> = monos
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i as u32))
            .collect();
        let mut mul = Vec::with_capacity(monos.len());
        let mut sum = vec![0u8; m];
        for (i, a) in monos.iter().enumerate() {
            let lim = offset[k - degree[i] + 1];
            let mut row = Vec::with_capacity(lim);
            for b in &monos[..lim] {
                for v in 0..m {
                    sum[v] = a[v] + b[v];
                }
                row.push(index[&sum]);
            }
            mul.push(row);
        }
        let mut raise = vec![NONE; monos.len() * m];
        for (i, a) in monos.iter().enumerate() {
            if degree[i] == k {
                continue;
            }
            for v in 0..m {
                sum.copy_from_slice(a);
                sum[v] += 1;
                raise[i * m + v] = index[&sum];
            }
        }
        JetSpace {
            m,
            k,
            monos,
            degree,
            offset,
            index,
            mul,
            raise,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.m
    }

    pub fn max_order(&self) -> usize {
        self.k
    }

    /// Number of monomials of total degree at most `order` (0 for negative order).
    pub fn count(&self, order: i32) -> usize {
        if order < 0 {
            0
        } else {
            self.offset[(order as usize).min(self.k) + 1]
        }
    }

    /// Index range of the monomials of exact degree `d`.
    pub fn degree_range(&self, d: usize) -> std::ops::Range<usize> {
        self.offset[d]..self.offset[d + 1]
    }

    pub fn exponents(&self, i: usize) -> &[u8] {
        &self.monos[i]
    }

    pub fn degree_of(&self, i: usize) -> usize {
        self.degree[i]
    }

    pub fn index_of(&self, e: &[u8]) -> Option<usize> {
        self.index.get(e).map(|&i| i as usize)
    }

    pub(crate) fn mul_row(&self, i: usize) -> &[u32] {
        &self.mul[i]
    }

    pub(crate) fn raised(&self, i: usize, v: usize) -> u32 {
        self.raise[i * self.m + v]
    }
}

type SpaceCache = HashMap<(usize, usize), Arc<JetSpace>>;

/// Shared handle to a [`JetSpace`]. Two contexts are compatible iff `(m, K)` agree.
#[derive(Clone, Debug)]
pub struct JetContext(Arc<JetSpace>);

impl JetContext {
    /// Returns the (cached) context for `m` real variables and truncation order `k`.
    pub fn new(m: usize, k: usize) -> Self {
        static CACHE: OnceLock<Mutex<SpaceCache>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet space cache poisoned");
        let sp = guard
            .entry((m, k))
            .or_insert_with(|| Arc::new(JetSpace::build(m, k)))
            .clone();
        JetContext(sp)
    }

    pub fn same(&self, other: &JetContext) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.m == other.m && self.k == other.k)
    }
}

impl Deref for JetContext {
    type Target = JetSpace;
    fn deref(&self) -> &JetSpace {
        &self.0
    }
}

impl PartialEq for JetContext {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_are_binomial() {
        let s = JetContext::new(3, 4);
        // C(3 + 4, 4)
        assert_eq!(s.count(4), 35);
        assert_eq!(s.count(0), 1);
        assert_eq!(s.count(-1), 0);
        assert_eq!(s.degree_range(1), 1..4);
    }

    #[test]
    fn mul_table_adds_exponents() {
        let s = JetContext::new(2, 3);
        let a = s.index_of(&[1, 0]).unwrap();
        let b = s.index_of(&[1, 1]).unwrap();
        let ab = s.mul_row(a)[b] as usize;
        assert_eq!(s.exponents(ab), &[2, 1]);
        assert_eq!(s.raised(s.index_of(&[0, 3]).unwrap(), 0), NONE);
    }
}
