/// Index bookkeeping for a coframe `(θ, θ^1..θ^n, θ^1̄..θ^n̄)`.
///
/// Frame index 0 is `T`/`θ`, `1..=n` are the unbarred `L_α`/`θ^α` (with `α` 0-based
/// externally), `n+1..=2n` the barred ones. Two-forms are stored in the canonical order
/// `θ∧θ^μ`, `θ∧θ^μ̄`, `θ^μ∧θ^ν (μ<ν)`, `θ^μ∧θ^ν̄`, `θ^μ̄∧θ^ν̄ (μ<ν)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameBasis {
    n: usize,
    pairs: Vec<(usize, usize)>,
    pos: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl FrameBasis {
    pub fn new(n: usize) -> Self {
        let m = 2 * n + 1;
        let u = |a: usize| 1 + a;
        let b = |a: usize| 1 + n + a;
        let mut pairs = Vec::with_capacity(m * (m - 1) / 2);
        for mu in 0..n {
            pairs.push((0, u(mu)));
        }
        for mu in 0..n {
            pairs.push((0, b(mu)));
        }
        for mu in 0..n {
            for nu in mu + 1..n {
                pairs.push((u(mu), u(nu)));
            }
        }
        for mu in 0..n {
            for nu in 0..n {
                pairs.push((u(mu), b(nu)));
            }
        }
        for mu in 0..n {
            for nu in mu + 1..n {
                pairs.push((b(mu), b(nu)));
            }
        }
        let mut pos = vec![NONE; m * m];
        for (k, &(x, y)) in pairs.iter().enumerate() {
            pos[x * m + y] = k as u32;
        }
        FrameBasis { n, pairs, pos }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        2 * self.n + 1
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn l(&self, alpha: usize) -> usize {
        1 + alpha
    }

    pub fn lbar(&self, alpha: usize) -> usize {
        1 + self.n + alpha
    }

    /// Index of the conjugate frame element.
    pub fn bar(&self, a: usize) -> usize {
        if a == 0 {
            0
        } else if a <= self.n {
            a + self.n
        } else {
            a - self.n
        }
    }

    /// Position of `e^a∧e^b` in canonical order and the sign relating it to the stored
    /// element; `None` for `a == b`.
    pub fn pair(&self, a: usize, b: usize) -> Option<(usize, f64)> {
        let m = self.m();
        let p = self.pos[a * m + b];
        if p != NONE {
            return Some((p as usize, 1.0));
        }
        let q = self.pos[b * m + a];
        if q != NONE {
            return Some((q as usize, -1.0));
        }
        None
    }

    pub fn pair_index(&self, a: usize, b: usize) -> usize {
        self.pair(a, b).expect("distinct frame indices").0
    }
}

/// Index of the chart 2-form component `dx_i∧dx_j`, `i < j`, in row-major upper-triangle order.
pub fn chart_pair(i: usize, j: usize, m: usize) -> usize {
    debug_assert!(i < j && j < m);
    i * m - i * (i + 1) / 2 + (j - i - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_and_signs() {
        let b = FrameBasis::new(2);
        assert_eq!(b.num_pairs(), 10);
        assert_eq!(b.pairs()[0], (0, 1));
        assert_eq!(b.pairs()[2], (0, 3));
        assert_eq!(b.pairs()[4], (1, 2));
        assert_eq!(b.pairs()[5], (1, 3));
        assert_eq!(b.pairs()[9], (3, 4));
        assert_eq!(b.pair(3, 1), Some((5, -1.0)));
        assert_eq!(b.pair(2, 2), None);
        assert_eq!(b.bar(1), 3);
        assert_eq!(b.bar(4), 2);
    }

    #[test]
    fn chart_pairs_are_dense() {
        let m = 5;
        let mut k = 0;
        for i in 0..m {
            for j in i + 1..m {
                assert_eq!(chart_pair(i, j, m), k);
                k += 1;
            }
        }
    }
}
