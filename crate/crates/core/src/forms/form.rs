use super::basis::FrameBasis;
use crate::jet::{max_abs_base, Jet, JetContext};
use num_complex::Complex64 as C64;

/// A moving frame `e_a` with dual coframe `e^a` on a chart: enough to differentiate forms
/// written in coframe components.
pub trait MovingFrame {
    fn basis(&self) -> &FrameBasis;
    fn context(&self) -> &JetContext;
    /// `e_b(f)` for every frame index `b`.
    fn frame_derivatives(&self, f: &Jet) -> Vec<Jet>;
    /// Structure functions `Γ^a_{bc} = de^a(e_b, e_c)` in canonical pair order.
    fn structure(&self, a: usize) -> &[Jet];
}

/// A 1-form by its values on the frame vectors.
#[derive(Clone, Debug)]
pub struct Form1 {
    pub c: Vec<Jet>,
}

/// A 2-form by its values on canonical frame pairs.
#[derive(Clone, Debug)]
pub struct Form2 {
    pub c: Vec<Jet>,
}

impl Form1 {
    pub fn zero(ctx: &JetContext, basis: &FrameBasis) -> Form1 {
        Form1 {
            c: vec![Jet::zero(ctx); basis.m()],
        }
    }

    /// The coframe element `e^a`.
    pub fn basis_element(ctx: &JetContext, basis: &FrameBasis, a: usize) -> Form1 {
        let mut f = Form1::zero(ctx, basis);
        f.c[a] = Jet::real(ctx, 1.0);
        f
    }

    /// `f e^a`.
    pub fn times_basis(f: &Jet, basis: &FrameBasis, a: usize) -> Form1 {
        let mut r = Form1::zero(f.context(), basis);
        r.c[a] = f.clone();
        r
    }

    pub fn differential(f: &Jet, frame: &impl MovingFrame) -> Form1 {
        Form1 {
            c: frame.frame_derivatives(f),
        }
    }

    pub fn add(&self, o: &Form1) -> Form1 {
        Form1 {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Form1) -> Form1 {
        Form1 {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn axpy(&mut self, s: &Jet, o: &Form1) {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a += s * b;
        }
    }

    pub fn axpy_c(&mut self, s: C64, o: &Form1) {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            a.axpy(s, b);
        }
    }

    pub fn scale(&self, s: &Jet) -> Form1 {
        Form1 {
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_c(&self, s: C64) -> Form1 {
        Form1 {
            c: self.c.iter().map(|a| a.scale(s)).collect(),
        }
    }

    /// Complex conjugate form: `conj(ω)(e_b) = conj(ω(e_b̄))`.
    pub fn conj(&self, basis: &FrameBasis) -> Form1 {
        Form1 {
            c: (0..basis.m())
                .map(|b| self.c[basis.bar(b)].conj())
                .collect(),
        }
    }

    pub fn wedge(&self, o: &Form1, basis: &FrameBasis) -> Form2 {
        Form2 {
            c: basis
                .pairs()
                .iter()
                .map(|&(b, c)| &self.c[b] * &o.c[c] - &self.c[c] * &o.c[b])
                .collect(),
        }
    }

    /// Exterior derivative: `dω(e_b, e_c) = e_b ω_c − e_c ω_b + Σ_a ω_a Γ^a_{bc}`.
    pub fn d(&self, frame: &impl MovingFrame) -> Form2 {
        let basis = frame.basis();
        let der: Vec<Vec<Jet>> = self.c.iter().map(|f| frame.frame_derivatives(f)).collect();
        let mut out: Vec<Jet> = basis
            .pairs()
            .iter()
            .map(|&(b, c)| &der[c][b] - &der[b][c])
            .collect();
        for (a, w) in self.c.iter().enumerate() {
            if w.max_abs() == 0.0 {
                continue;
            }
            for (o, g) in out.iter_mut().zip(frame.structure(a)) {
                *o += w * g;
            }
        }
        Form2 { c: out }
    }

    pub fn max_abs_base(&self) -> f64 {
        max_abs_base(&self.c)
    }

    pub fn truncate(&self, order: i32) -> Form1 {
        Form1 {
            c: self.c.iter().map(|j| j.truncate(order)).collect(),
        }
    }
}

impl Form2 {
    pub fn zero(ctx: &JetContext, basis: &FrameBasis) -> Form2 {
        Form2 {
            c: vec![Jet::zero(ctx); basis.num_pairs()],
        }
    }

    pub fn add(&self, o: &Form2) -> Form2 {
        Form2 {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Form2) -> Form2 {
        Form2 {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add_assign(&mut self, o: &Form2) {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, o: &Form2) {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a -= b;
        }
    }

    pub fn axpy_c(&mut self, s: C64, o: &Form2) {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            a.axpy(s, b);
        }
    }

    pub fn scale(&self, s: &Jet) -> Form2 {
        Form2 {
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_c(&self, s: C64) -> Form2 {
        Form2 {
            c: self.c.iter().map(|a| a.scale(s)).collect(),
        }
    }

    /// Value on `(e_a, e_b)`.
    pub fn get(&self, basis: &FrameBasis, a: usize, b: usize) -> Jet {
        match basis.pair(a, b) {
            Some((k, s)) => self.c[k].scale_re(s),
            None => Jet::zero(self.c[0].context()),
        }
    }

    pub fn conj(&self, basis: &FrameBasis) -> Form2 {
        Form2 {
            c: basis
                .pairs()
                .iter()
                .map(|&(b, c)| self.get(basis, basis.bar(b), basis.bar(c)).conj())
                .collect(),
        }
    }

    pub fn max_abs_base(&self) -> f64 {
        max_abs_base(&self.c)
    }

    /// Largest base-point magnitude over the canonical pairs selected by `keep`.
    pub fn max_abs_base_where(
        &self,
        basis: &FrameBasis,
        keep: impl Fn(usize, usize) -> bool,
    ) -> f64 {
        max_abs_base(
            basis
                .pairs()
                .iter()
                .zip(&self.c)
                .filter(|(&(a, b), _)| keep(a, b))
                .map(|(_, j)| j),
        )
    }
}
