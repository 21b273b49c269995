//! Piecewise-linear demand curves.
//!
//! `D(p)` is the mass of users whose value is at least `p`. Curves are given as
//! an ordered list of `(price, mass)` breakpoints with linear interpolation in
//! between and zero mass beyond the last breakpoint. Two consecutive
//! breakpoints at the same price encode a downward jump; the curve is
//! left-continuous, so the value at the jump is the upper mass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for comparisons between quantities produced by arithmetic.
pub(crate) const EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Segment {
    x0: f64,
    x1: f64,
    /// Right limit of the curve at `x0`.
    m0: f64,
    /// Value of the curve at `x1`.
    m1: f64,
}

impl Segment {
    fn at(&self, x: f64) -> f64 {
        let t = (x - self.x0) / (self.x1 - self.x0);
        self.m0 + t * (self.m1 - self.m0)
    }

    /// Price on the segment where the interpolated mass equals `y`.
    fn price_at_mass(&self, y: f64) -> f64 {
        let t = (self.m0 - y) / (self.m0 - self.m1);
        (self.x0 + t * (self.x1 - self.x0)).clamp(self.x0, self.x1)
    }

    /// `-D'` on the open segment.
    fn steepness(&self) -> f64 {
        (self.m0 - self.m1) / (self.x1 - self.x0)
    }
}

/// Generalized inverse `D^{-1}(y)` as an interval `[inf_price, sup_price]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseInterval {
    pub inf_price: f64,
    pub sup_price: f64,
}

/// Outcome of [`DemandCurve::check_regular`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityCheck {
    pub regular: bool,
    /// First pair of prices `(a, b)` with `a < b` and `φ(a) > φ(b)`.
    pub violation: Option<(f64, f64)>,
}

/// Best point of a one-dimensional revenue maximization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RevenuePoint {
    pub price: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DemandCurve {
    points: Vec<(f64, f64)>,
    segs: Vec<Segment>,
}

impl TryFrom<Vec<(f64, f64)>> for DemandCurve {
    type Error = Error;

    fn try_from(points: Vec<(f64, f64)>) -> Result<Self> {
        DemandCurve::new(points)
    }
}

impl From<DemandCurve> for Vec<(f64, f64)> {
    fn from(curve: DemandCurve) -> Self {
        curve.points
    }
}

impl DemandCurve {
    /// Builds a curve from `(price, mass)` breakpoints.
    ///
    /// Prices must be non-decreasing and masses non-increasing. If the first
    /// breakpoint is above price 0 the curve is flat down to 0.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidCurve {
                index: 0,
                reason: "at least one breakpoint is required".into(),
            });
        }
        for (index, &(p, m)) in points.iter().enumerate() {
            let bad = |reason: &str| Error::InvalidCurve {
                index,
                reason: reason.into(),
            };
            if !p.is_finite() || !m.is_finite() {
                return Err(bad("price and mass must be finite"));
            }
            if p < 0.0 {
                return Err(bad("price must be non-negative"));
            }
            if m < 0.0 {
                return Err(bad("mass must be non-negative"));
            }
            if index > 0 {
                let (pp, pm) = points[index - 1];
                if p < pp {
                    return Err(bad("prices must be non-decreasing"));
                }
                if m > pm {
                    return Err(bad("masses must be non-increasing"));
                }
            }
        }

        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(points.len() + 1);
        if points[0].0 > 0.0 {
            pts.push((0.0, points[0].1));
        }
        for &pt in &points {
            if pts.last() != Some(&pt) {
                pts.push(pt);
            }
        }
        // A zero-mass tail carries no information and would hide the true v_max.
        while pts.len() >= 2 && pts[pts.len() - 1].1 == 0.0 && pts[pts.len() - 2].1 == 0.0 {
            pts.pop();
        }

        let segs = pts
            .windows(2)
            .filter(|w| w[1].0 > w[0].0)
            .map(|w| Segment {
                x0: w[0].0,
                x1: w[1].0,
                m0: w[0].1,
                m1: w[1].1,
            })
            .collect();
        Ok(DemandCurve { points: pts, segs })
    }

    /// `D(x) = mass · (1 − x / v_max)` on `[0, v_max]`.
    pub fn linear(mass_at_zero: f64, v_max: f64) -> Result<Self> {
        Self::new(vec![(0.0, mass_at_zero), (v_max, 0.0)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Price above which the mass is zero.
    pub fn v_max(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    /// `D(0)`, the total mass of users.
    pub fn total_mass(&self) -> f64 {
        self.points[0].1
    }

    /// Breakpoint prices (jumps appear once).
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        let mut last = f64::NAN;
        self.points.iter().filter_map(move |&(p, _)| {
            if p == last {
                None
            } else {
                last = p;
                Some(p)
            }
        })
    }

    fn check_price(p: f64) -> Result<()> {
        if p >= 0.0 {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                what: "price",
                value: p,
                lo: 0.0,
                hi: f64::INFINITY,
            })
        }
    }

    /// `D(p)`.
    pub fn eval(&self, p: f64) -> Result<f64> {
        Self::check_price(p)?;
        Ok(self.d(p))
    }

    /// `D^>(p)`, the right limit of `D` at `p`.
    pub fn eval_right(&self, p: f64) -> Result<f64> {
        Self::check_price(p)?;
        Ok(self.d_right(p))
    }

    /// Unchecked `D(p)`; negative prices see the full mass.
    pub(crate) fn d(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return self.total_mass();
        }
        if p > self.v_max() {
            return 0.0;
        }
        let k = self.segs.partition_point(|s| s.x1 < p);
        match self.segs.get(k) {
            Some(s) => s.at(p),
            None => 0.0,
        }
    }

    /// Unchecked `D^>(p)`.
    pub(crate) fn d_right(&self, p: f64) -> f64 {
        if p >= self.v_max() {
            return 0.0;
        }
        let k = self.segs.partition_point(|s| s.x1 <= p);
        match self.segs.get(k) {
            Some(s) if p >= s.x0 => s.at(p),
            Some(s) => s.m0,
            None => 0.0,
        }
    }

    /// `d(x) = −D'(x)`, defined where the curve is differentiable and strictly
    /// decreasing.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let unavailable = Error::DerivativeUnavailable { x };
        if !(x >= 0.0) || x >= self.v_max() {
            return Err(unavailable);
        }
        let right = self.segs.partition_point(|s| s.x1 <= x);
        let rs = self.segs.get(right).ok_or(unavailable.clone())?;
        if x > rs.x0 || x == 0.0 {
            let d = rs.steepness();
            return if d > 0.0 { Ok(d) } else { Err(unavailable) };
        }
        // Breakpoint: both sides must agree and the curve must not jump.
        let ls = &self.segs[right - 1];
        let (dl, dr) = (ls.steepness(), rs.steepness());
        if ls.m1 != rs.m0 || (dl - dr).abs() > EPS * dl.abs().max(1.0) || dr <= 0.0 {
            return Err(unavailable);
        }
        Ok(dr)
    }

    /// `φ(x) = x − D(x)/d(x)`.
    pub fn virtual_value(&self, x: f64) -> Result<f64> {
        let d = self.derivative(x)?;
        Ok(x - self.d(x) / d)
    }

    /// `D^{-1}(y)` for `0 ≤ y ≤ D(0)`. The supremum is capped at `v_max`.
    pub fn inverse(&self, y: f64) -> Result<InverseInterval> {
        let top = self.total_mass();
        let tol = EPS * top.max(1.0);
        if !(y >= -tol && y <= top + tol) {
            return Err(Error::OutOfRange {
                what: "mass",
                value: y,
                lo: 0.0,
                hi: top,
            });
        }
        let y = y.clamp(0.0, top);
        Ok(InverseInterval {
            inf_price: self.inverse_inf(y),
            sup_price: self.inverse_sup(y),
        })
    }

    /// `inf {x ≥ 0 : D^>(x) ≤ y}`.
    pub(crate) fn inverse_inf(&self, y: f64) -> f64 {
        for s in &self.segs {
            if s.m0 <= y {
                return s.x0;
            }
            if s.m1 <= y {
                return s.price_at_mass(y);
            }
        }
        self.v_max()
    }

    /// `sup {x ≥ 0 : D(x) ≥ y}`, capped at `v_max`.
    pub(crate) fn inverse_sup(&self, y: f64) -> f64 {
        if y <= 0.0 || self.d(self.v_max()) >= y {
            return self.v_max();
        }
        for s in self.segs.iter().rev() {
            if s.m1 >= y {
                return s.x1;
            }
            if s.m0 >= y {
                return s.price_at_mass(y);
            }
        }
        0.0
    }

    /// Checks that `φ` is non-decreasing: on `grid_size` points spread over the
    /// segments, plus one-sided values at every breakpoint.
    pub fn check_regular(&self, grid_size: usize) -> RegularityCheck {
        let total: f64 = self.segs.iter().map(|s| s.x1 - s.x0).sum();
        let mut trail: Vec<(f64, f64)> = Vec::new();
        for s in &self.segs {
            let d = s.steepness();
            if d <= 0.0 {
                // Flat with positive mass: φ = −∞ on the whole segment.
                return RegularityCheck {
                    regular: false,
                    violation: Some((s.x0, s.x1)),
                };
            }
            let phi = |x: f64| x - s.at(x) / d;
            let n = ((grid_size as f64) * (s.x1 - s.x0) / total).ceil().max(2.0) as usize;
            trail.push((s.x0, phi(s.x0)));
            for j in 1..n {
                let x = s.x0 + (s.x1 - s.x0) * j as f64 / n as f64;
                trail.push((x, phi(x)));
            }
            trail.push((s.x1, phi(s.x1)));
        }
        for w in trail.windows(2) {
            let ((xa, fa), (xb, fb)) = (w[0], w[1]);
            if fb < fa - EPS * fa.abs().max(1.0) {
                return RegularityCheck {
                    regular: false,
                    violation: Some((xa, xb)),
                };
            }
        }
        RegularityCheck {
            regular: true,
            violation: None,
        }
    }

    /// `argmax_{r ≥ lower_bound} (r − unit_cost)·D(r)`.
    pub fn monopoly_revenue(&self, unit_cost: f64, lower_bound: f64) -> Result<RevenuePoint> {
        if !(lower_bound >= 0.0 && lower_bound <= self.v_max()) {
            return Err(Error::OutOfRange {
                what: "lower bound",
                value: lower_bound,
                lo: 0.0,
                hi: self.v_max(),
            });
        }
        Ok(self.argmax_revenue(unit_cost, 0.0, f64::INFINITY, lower_bound, self.v_max()))
    }

    /// `sup_{x ≤ cap} x·(D^{-1}_sup(x) − unit_cost)`, the revenue of a seller
    /// holding at most `cap` units.
    pub fn capped_revenue(&self, unit_cost: f64, cap: f64) -> RevenuePoint {
        self.argmax_revenue(unit_cost, 0.0, cap, 0.0, self.v_max())
    }

    /// Maximizes `(x − cost)·(min(D(x), cap) + shift)` over `x ∈ [lo, hi]`.
    ///
    /// Each linear piece contributes its endpoints, the vertex of the quadratic
    /// and the point where `D` crosses `cap`. Ties go to the smallest price.
    pub(crate) fn argmax_revenue(
        &self,
        cost: f64,
        shift: f64,
        cap: f64,
        lo: f64,
        hi: f64,
    ) -> RevenuePoint {
        let f = |x: f64| (x - cost) * (self.d(x).min(cap) + shift);
        let mut cands = vec![lo];
        if hi.is_finite() {
            cands.push(hi);
        }
        for s in &self.segs {
            if s.x1 < lo || s.x0 > hi {
                continue;
            }
            cands.push(s.x1);
            if s.m0 > cap && s.m1 < cap {
                cands.push(s.price_at_mass(cap));
            }
            let d = s.steepness();
            if d > 0.0 {
                // D(x) = a − d·x on the segment.
                let a = s.m0 + d * s.x0;
                let v = (a + shift + d * cost) / (2.0 * d);
                if v > s.x0 && v < s.x1 {
                    cands.push(v);
                }
            }
        }
        cands.retain(|&x| x >= lo && x <= hi);
        cands.sort_by(f64::total_cmp);

        let mut best = RevenuePoint {
            price: lo,
            value: f(lo),
        };
        for &x in &cands {
            let v = f(x);
            if v > best.value + EPS * best.value.abs().max(1.0) {
                best = RevenuePoint { price: x, value: v };
            }
        }
        best
    }

    /// `k(z) = (D^{-1}_sup(zQ) − c)·zQ / ((D^{-1}_sup(Q) − c)·Q)`.
    pub fn cover_function(&self, append_supply: f64, unit_cost: f64, z: f64) -> Result<f64> {
        if !(z > 0.0 && z <= 1.0) {
            return Err(Error::OutOfRange {
                what: "z",
                value: z,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let p0 = self.inverse(append_supply)?.sup_price;
        if p0 - unit_cost <= 0.0 {
            return Err(Error::DegenerateCover { price: p0 });
        }
        if z == 1.0 {
            return Ok(1.0);
        }
        let pz = self.inverse(z * append_supply)?.sup_price;
        Ok((pz - unit_cost) * z / (p0 - unit_cost))
    }

    /// Segment data `(x0, x1, right mass at x0, mass at x1)` for analytic work
    /// in other modules.
    pub(crate) fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.segs.iter().map(|s| (s.x0, s.x1, s.m0, s.m1))
    }
}
