//! The map f_a(x) = a − x², its orbits and monotone pullbacks.

use rug::ops::NegAssign;
use rug::Float;
use thiserror::Error;

use crate::real::{log2_abs, log2_add, Parameter};

pub const MIN_PRECISION: u32 = 53;
pub const DEFAULT_PRECISION: u32 = 256;
pub const DEFAULT_MAX_PRECISION: u32 = 1 << 17;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("parameter {0} outside [-1/4, 2]")]
    ParameterOutOfRange(String),
    #[error("precision {requested} exceeds the configured maximum {max}")]
    PrecisionExhausted { requested: u32, max: u32 },
    #[error("iterate {step} left the invariant interval")]
    EscapedInterval { step: usize },
    #[error("non-hyperbolic fixed point on the boundary (a = 3/4)")]
    NonHyperbolicBoundary,
    #[error("orientation reversing fixed point is attracting or missing (a < 3/4)")]
    NotDefined,
    #[error("bracket endpoints do not straddle the target")]
    BracketInvalid,
    #[error("iteration budget of {0} exhausted")]
    BudgetExceeded(usize),
}

/// Branch choice of a point: the sign of the point itself.
pub type Sign = i8;

pub fn sign_of(x: &Float) -> Sign {
    if x.is_sign_negative() {
        -1
    } else {
        1
    }
}

#[derive(Clone, Debug)]
pub struct QuadraticMap {
    a: Parameter,
    prec: u32,
    a_val: Float,
    beta: Float,
}

impl QuadraticMap {
    pub fn new(a: &Parameter, prec: u32) -> Result<Self, QuadError> {
        check_range(a)?;
        let prec = prec.max(MIN_PRECISION);
        let a_val = a.to_float(prec);
        // beta = (-1 - sqrt(1 + 4a)) / 2
        let disc = Float::with_val(prec, &a_val * 4u32) + 1u32;
        let beta = (-(disc.sqrt()) - 1u32) / 2u32;
        Ok(QuadraticMap { a: a.clone(), prec, a_val, beta })
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        QuadraticMap::new(&self.a, prec).expect("parameter already validated")
    }

    pub fn parameter(&self) -> &Parameter {
        &self.a
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn a(&self) -> &Float {
        &self.a_val
    }

    pub fn beta(&self) -> &Float {
        &self.beta
    }

    pub fn invariant_interval(&self) -> (Float, Float) {
        (self.beta.clone(), Float::with_val(self.prec, -&self.beta))
    }

    pub fn interval_length(&self) -> Float {
        Float::with_val(self.prec, &self.beta * -2i32)
    }

    /// log2 of 2^(−prec/2)·|I|, the collapse threshold of the precision policy.
    pub fn log2_threshold(&self) -> f64 {
        log2_abs(&self.interval_length()) - self.prec as f64 / 2.0
    }

    pub fn threshold(&self) -> Float {
        let t = self.interval_length();
        let shift = (self.prec / 2) as i32;
        t >> shift
    }

    pub fn float(&self, v: f64) -> Float {
        Float::with_val(self.prec, v)
    }

    pub fn zero(&self) -> Float {
        Float::new(self.prec)
    }

    /// x ← a − x²
    pub fn step(&self, x: &mut Float) {
        x.square_mut();
        x.neg_assign();
        *x += &self.a_val;
    }

    pub fn image(&self, x: &Float) -> Float {
        let mut y = Float::with_val(self.prec, x);
        self.step(&mut y);
        y
    }

    pub fn iterate(&self, x: &Float, n: usize) -> Float {
        let mut y = Float::with_val(self.prec, x);
        for _ in 0..n {
            self.step(&mut y);
        }
        y
    }

    /// f^n(x) together with Df^n(x).
    pub fn iterate_with_derivative(&self, x: &Float, n: usize) -> (Float, Float) {
        let mut y = Float::with_val(self.prec, x);
        let mut d = Float::with_val(self.prec, 1u32);
        for _ in 0..n {
            d *= &y;
            d *= -2i32;
            self.step(&mut y);
        }
        (y, d)
    }

    /// The preimage of `y` on the branch of sign `s`, if any.
    pub fn preimage(&self, y: &Float, s: Sign) -> Option<Float> {
        let mut t = Float::with_val(self.prec, &self.a_val - y);
        if t.is_sign_negative() && !t.is_zero() {
            return None;
        }
        t.sqrt_mut();
        if s < 0 {
            t.neg_assign();
        }
        Some(t)
    }

    /// Pull `target` back along `itinerary` (signs of x, f(x), …, f^{m−1}(x)),
    /// handing every intermediate point f^k(x), k = m−1 … 0, to `visit`.
    pub fn pullback_visit(
        &self,
        itinerary: &[Sign],
        target: &Float,
        mut visit: impl FnMut(usize, &Float),
    ) -> Option<Float> {
        let mut y = Float::with_val(self.prec, target);
        for (k, &s) in itinerary.iter().enumerate().rev() {
            y = self.preimage(&y, s)?;
            visit(k, &y);
        }
        Some(y)
    }

    pub fn pullback(&self, itinerary: &[Sign], target: &Float) -> Option<Float> {
        self.pullback_visit(itinerary, target, |_, _| {})
    }
}

fn check_range(a: &Parameter) -> Result<(), QuadError> {
    let r = a.as_rational();
    if *r < rug::Rational::from((-1, 4)) || *r > 2 {
        return Err(QuadError::ParameterOutOfRange(a.to_string()));
    }
    Ok(())
}

pub fn invariant_interval(a: &Parameter, prec: u32) -> Result<(Float, Float), QuadError> {
    Ok(QuadraticMap::new(a, prec)?.invariant_interval())
}

/// Running bound on the absolute error of an orbit computed at fixed
/// precision, kept as log2 so it never underflows.
#[derive(Clone, Copy, Debug)]
pub struct ErrorTracker {
    log2_err: f64,
    unit: f64,
}

impl ErrorTracker {
    pub fn new(prec: u32) -> Self {
        ErrorTracker { log2_err: f64::NEG_INFINITY, unit: 3.0 - prec as f64 }
    }

    pub fn starting_at(prec: u32, log2_err: f64) -> Self {
        ErrorTracker { log2_err, unit: 3.0 - prec as f64 }
    }

    /// Account for one step from a point of size 2^log2_abs_prev.
    pub fn step(&mut self, log2_abs_prev: f64) {
        let carried = 1.0 + log2_abs_prev + self.log2_err;
        self.log2_err = log2_add(carried, self.unit);
    }

    pub fn log2_err(&self) -> f64 {
        self.log2_err
    }

    /// True when a quantity of size 2^log2_dist is resolved with `margin` bits to spare.
    pub fn resolves(&self, log2_dist: f64, margin: f64) -> bool {
        log2_dist - self.log2_err >= margin
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRecord {
    pub points: Vec<Float>,
    /// Entry k−1 holds ln|Df^k(x_0)| = Σ_{j<k} ln|2 x_j|.
    pub log_derivative_partial_sums: Vec<Float>,
    pub precision_used: u32,
}

pub fn evaluate_orbit(
    a: &Parameter,
    x0: &Float,
    n: usize,
    prec: u32,
    max_prec: u32,
) -> Result<OrbitRecord, QuadError> {
    if prec > max_prec {
        return Err(QuadError::PrecisionExhausted { requested: prec, max: max_prec });
    }
    let map = QuadraticMap::new(a, prec)?;
    let bound = Float::with_val(map.prec, -map.beta());
    let slack = map.threshold();
    let edge = Float::with_val(map.prec, &bound + &slack);
    let x = Float::with_val(map.prec, x0);
    if Float::with_val(map.prec, x.abs_ref()) > edge {
        return Err(QuadError::EscapedInterval { step: 0 });
    }
    let mut points = Vec::with_capacity(n + 1);
    let mut sums = Vec::with_capacity(n);
    let mut sum = Float::new(map.prec);
    points.push(x);
    for k in 0..n {
        let cur = &points[k];
        let two_x = Float::with_val(map.prec, cur * 2u32).abs();
        sum += two_x.ln();
        sums.push(sum.clone());
        let next = map.image(cur);
        if Float::with_val(map.prec, next.abs_ref()) > edge {
            return Err(QuadError::EscapedInterval { step: k + 1 });
        }
        points.push(next);
    }
    Ok(OrbitRecord { points, log_derivative_partial_sums: sums, precision_used: map.prec })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderReport {
    /// Largest observed log2 relative change of any point.
    pub worst_log2_change: f64,
    /// Index of the first point whose change exceeded the bound, if any.
    pub first_violation: Option<usize>,
}

impl LadderReport {
    pub fn bound_met(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Recompute at `prec + 64` and compare each point against the bound
/// 2^(−prec + 4k) relative.
pub fn precision_ladder(
    a: &Parameter,
    x0: &Float,
    n: usize,
    prec: u32,
) -> Result<LadderReport, QuadError> {
    let lo = evaluate_orbit(a, x0, n, prec, u32::MAX)?;
    let hi = evaluate_orbit(a, x0, n, prec + 64, u32::MAX)?;
    let mut worst = f64::NEG_INFINITY;
    let mut first_violation = None;
    for (k, (p, q)) in lo.points.iter().zip(&hi.points).enumerate() {
        let diff = Float::with_val(prec + 64, q - p);
        if diff.is_zero() {
            continue;
        }
        let rel = log2_abs(&diff) - log2_abs(q).max(-(prec as f64));
        worst = worst.max(rel);
        if rel > -(prec as f64) + 4.0 * k as f64 && first_violation.is_none() {
            first_violation = Some(k);
        }
    }
    Ok(LadderReport { worst_log2_change: worst, first_violation })
}

pub fn orientation_reversing_fixed_point(a: &Parameter, prec: u32) -> Result<Float, QuadError> {
    let map = QuadraticMap::new(a, prec)?;
    let three_quarters = rug::Rational::from((3, 4));
    match a.as_rational().cmp(&three_quarters) {
        std::cmp::Ordering::Less => Err(QuadError::NotDefined),
        std::cmp::Ordering::Equal => Err(QuadError::NonHyperbolicBoundary),
        std::cmp::Ordering::Greater => {
            let disc = Float::with_val(map.prec, map.a() * 4u32) + 1u32;
            Ok((disc.sqrt() - 1u32) / 2u32)
        }
    }
}

/// Safeguarded Newton iteration inside a sign-changing bracket.  `eval`
/// returns (g(x), g'(x)); the bracket is shrunk at every step and Newton
/// proposals leaving it are replaced by bisection.
pub fn bracketed_root(
    lo: &Float,
    hi: &Float,
    seed: Option<&Float>,
    tol: &Float,
    max_iter: usize,
    mut eval: impl FnMut(&Float) -> (Float, Float),
) -> Result<Float, QuadError> {
    let prec = lo.prec().max(hi.prec());
    let mut lo = Float::with_val(prec, lo);
    let mut hi = Float::with_val(prec, hi);
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let (glo, _) = eval(&lo);
    let (ghi, _) = eval(&hi);
    if Float::with_val(prec, glo.abs_ref()) <= *tol {
        return Ok(lo);
    }
    if Float::with_val(prec, ghi.abs_ref()) <= *tol {
        return Ok(hi);
    }
    if glo.is_sign_negative() == ghi.is_sign_negative() {
        return Err(QuadError::BracketInvalid);
    }
    let lo_negative = glo.is_sign_negative();
    let mut x = match seed {
        Some(s) if *s > lo && *s < hi => Float::with_val(prec, s),
        _ => Float::with_val(prec, &lo + &hi) / 2u32,
    };
    for _ in 0..max_iter {
        let (g, dg) = eval(&x);
        if Float::with_val(prec, g.abs_ref()) <= *tol {
            return Ok(x);
        }
        if g.is_sign_negative() == lo_negative {
            lo.clone_from(&x);
        } else {
            hi.clone_from(&x);
        }
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        if mid == lo || mid == hi {
            break;
        }
        let mut next = mid;
        if !dg.is_zero() && dg.is_finite() {
            let newton = Float::with_val(prec, &x - Float::with_val(prec, &g / &dg));
            if newton > lo && newton < hi {
                next = newton;
            }
        }
        x = next;
    }
    Err(QuadError::BudgetExceeded(max_iter))
}

/// Solve f^m(x) = target for x in a bracket on which f^m is monotone.
/// The seed comes from backward square roots along the itinerary; the
/// result satisfies |f^m(x) − target| ≤ 2^(−prec/2)·|I|.
pub fn solve_monotone_pullback(
    map: &QuadraticMap,
    itinerary: &[Sign],
    target: &Float,
    bracket: (&Float, &Float),
) -> Result<Float, QuadError> {
    let m = itinerary.len();
    let tol = map.threshold();
    let seed = map.pullback(itinerary, target);
    bracketed_root(bracket.0, bracket.1, seed.as_ref(), &tol, 64 + 4 * map.precision() as usize, |x| {
        let (y, d) = map.iterate_with_derivative(x, m);
        (y - target, d)
    })
}
