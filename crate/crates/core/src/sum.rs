//! Floating-point accumulators.
//!
//! [`ExactSum`] keeps a list of non-overlapping partials (Shewchuk's
//! algorithm) and rounds once at the end, so the result is the correctly
//! rounded value of the exact sum and does not depend on the order in which
//! terms were added. That order independence is what makes the treecode and
//! the direct sum agree bit for bit when every node is opened.

use smallvec::SmallVec;

use crate::geom::Vec2;

pub trait Accumulator: Default {
    fn add(&mut self, v: f64);
    fn value(&self) -> f64;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct PlainSum(f64);

impl Accumulator for PlainSum {
    #[inline]
    fn add(&mut self, v: f64) {
        self.0 += v;
    }
    #[inline]
    fn value(&self) -> f64 {
        self.0
    }
}

#[derive(Debug, Default, Clone)]
pub struct ExactSum {
    partials: SmallVec<[f64; 8]>,
}

impl Accumulator for ExactSum {
    fn add(&mut self, mut x: f64) {
        let mut kept = 0;
        for idx in 0..self.partials.len() {
            let mut y = self.partials[idx];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        self.partials.truncate(kept);
        self.partials.push(x);
    }

    fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // half-even correction when the remaining partials push past a tie
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

/// Component-wise accumulator for planar vectors.
#[derive(Debug, Default, Clone)]
pub struct VecAcc<A: Accumulator> {
    x: A,
    y: A,
}

impl<A: Accumulator> VecAcc<A> {
    #[inline]
    pub fn add(&mut self, v: Vec2) {
        self.x.add(v.x);
        self.y.add(v.y);
    }
    #[inline]
    pub fn value(&self) -> Vec2 {
        Vec2::new(self.x.value(), self.y.value())
    }
}

pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = ExactSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}
