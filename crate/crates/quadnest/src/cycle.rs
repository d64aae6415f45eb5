//! Attracting cycles of the critical orbit, found at double precision.

#[derive(Clone, Debug, PartialEq)]
pub struct AttractingCycle {
    pub period: usize,
    pub points: Vec<f64>,
    pub multiplier: f64,
}

impl AttractingCycle {
    /// Recompute the multiplier from the stored points.
    pub fn recomputed_multiplier(&self) -> f64 {
        self.points.iter().map(|x| -2.0 * x).product()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleBudget {
    pub iterations: usize,
    pub max_period: usize,
}

impl Default for CycleBudget {
    fn default() -> Self {
        CycleBudget { iterations: 100_000, max_period: 1000 }
    }
}

fn f(a: f64, x: f64) -> f64 {
    a - x * x
}

/// Look for a cycle of period ≤ `max_period` attracting the critical point.
/// The candidate is refined by Newton's method on f^p(x) − x and accepted
/// only when |Df^p| < 1 at the refined cycle.
pub fn detect_attracting_cycle(a: f64, budget: CycleBudget) -> Option<AttractingCycle> {
    let mut x = 0.0f64;
    for _ in 0..budget.iterations {
        x = f(a, x);
        if !x.is_finite() {
            return None;
        }
    }
    let anchor = x;
    let mut y = x;
    let mut period = None;
    for p in 1..=budget.max_period {
        y = f(a, y);
        if (y - anchor).abs() < 1e-9 {
            period = Some(p);
            break;
        }
    }
    let p = period?;
    let mut z = anchor;
    for _ in 0..50 {
        let mut w = z;
        let mut d = 1.0;
        for _ in 0..p {
            d *= -2.0 * w;
            w = f(a, w);
        }
        let g = w - z;
        let dg = d - 1.0;
        if dg == 0.0 {
            break;
        }
        let step = g / dg;
        z -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    let mut points = Vec::with_capacity(p);
    let mut w = z;
    for _ in 0..p {
        points.push(w);
        w = f(a, w);
    }
    if (w - z).abs() > 1e-8 {
        return None;
    }
    let multiplier: f64 = points.iter().map(|x| -2.0 * x).product();
    if multiplier.abs() < 1.0 {
        Some(AttractingCycle { period: p, points, multiplier })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn superattracting_examples() {
        let c = detect_attracting_cycle(0.0, CycleBudget::default()).unwrap();
        assert_eq!(c.period, 1);
        assert_eq!(c.multiplier, 0.0);
        let c = detect_attracting_cycle(1.0, CycleBudget::default()).unwrap();
        assert_eq!(c.period, 2);
        assert_eq!(c.multiplier.abs(), 0.0);
    }

    #[test]
    fn period_three_window() {
        let c = detect_attracting_cycle(1.755, CycleBudget::default()).unwrap();
        assert_eq!(c.period, 3);
        assert!(c.multiplier.abs() < 1.0);
        assert!((c.recomputed_multiplier() - c.multiplier).abs() < 1e-12);
    }

    #[test]
    fn chaotic_and_misiurewicz_have_none() {
        assert!(detect_attracting_cycle(2.0, CycleBudget::default()).is_none());
        assert!(detect_attracting_cycle(1.9, CycleBudget::default()).is_none());
    }
}
