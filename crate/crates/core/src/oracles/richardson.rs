//! Richardson extrapolation from three grid levels.

use serde::Serialize;

/// Observed convergence order of a three-level sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservedOrder {
    /// All three values agree exactly.
    Converged,
    /// `log2` of the ratio of successive differences.
    Order(f64),
    /// Differences change sign or the last one vanishes alone.
    Erratic,
}

impl ObservedOrder {
    /// `true` for [`ObservedOrder::Converged`] or an order of at least `p`.
    pub fn at_least(&self, p: f64) -> bool {
        match *self {
            ObservedOrder::Converged => true,
            ObservedOrder::Order(o) => o >= p,
            ObservedOrder::Erratic => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    pub order: ObservedOrder,
}

/// Extrapolates values computed at spacings `s`, `s/2` and `s/4`.
///
/// With `d1 = v_s - v_{s/2}` and `d2 = v_{s/2} - v_{s/4}` the observed order is
/// `p = log2(d1 / d2)` and the value is `v_{s/4} - d2 / (2^p - 1)`. Without a
/// usable order the finest value is returned.
pub fn richardson(coarse: f64, mid: f64, fine: f64) -> Extrapolation {
    let d1 = coarse - mid;
    let d2 = mid - fine;
    if d1 == 0.0 && d2 == 0.0 {
        return Extrapolation { value: fine, order: ObservedOrder::Converged };
    }
    if d2 == 0.0 || d1 / d2 <= 1.0 {
        return Extrapolation { value: fine, order: ObservedOrder::Erratic };
    }
    let p = (d1 / d2).log2();
    Extrapolation { value: fine - d2 / (2f64.powf(p) - 1.0), order: ObservedOrder::Order(p) }
}

/// Observed order from errors at three levels against a known reference.
pub fn error_order(coarse: f64, mid: f64, fine: f64) -> ObservedOrder {
    let (e0, e1, e2) = (coarse.abs(), mid.abs(), fine.abs());
    if e0 == 0.0 && e1 == 0.0 && e2 == 0.0 {
        return ObservedOrder::Converged;
    }
    if e1 == 0.0 || e2 == 0.0 || e0 <= e1 || e1 <= e2 {
        return ObservedOrder::Erratic;
    }
    // Least-squares slope over the three levels.
    let y = [e0.log2(), e1.log2(), e2.log2()];
    ObservedOrder::Order((y[0] - y[2]) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_data_has_order_two() {
        let f = |s: f64| 3.0 + 0.7 * s * s;
        let e = richardson(f(0.1), f(0.05), f(0.025));
        match e.order {
            ObservedOrder::Order(p) => assert!((p - 2.0).abs() < 1e-6, "{p}"),
            other => panic!("{other:?}"),
        }
        assert!((e.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quartic_data_extrapolates_exactly() {
        let f = |s: f64| -1.0 + 5.0 * s.powi(4);
        let e = richardson(f(0.2), f(0.1), f(0.05));
        assert!(e.order.at_least(3.999));
        assert!((e.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_data_is_converged() {
        let e = richardson(1.5, 1.5, 1.5);
        assert_eq!(e.order, ObservedOrder::Converged);
        assert_eq!(e.value, 1.5);
        assert!(e.order.at_least(2.0));
    }

    #[test]
    fn oscillating_data_is_erratic() {
        assert_eq!(richardson(1.0, 2.0, 1.0).order, ObservedOrder::Erratic);
        assert_eq!(richardson(1.0, 1.1, 1.1).order, ObservedOrder::Erratic);
        assert!(!richardson(1.0, 2.0, 1.0).order.at_least(0.0));
    }

    #[test]
    fn error_order_of_power_law() {
        match error_order(1e-3, 1e-3 / 8.0, 1e-3 / 64.0) {
            ObservedOrder::Order(p) => assert!((p - 3.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(error_order(0.0, 0.0, 0.0), ObservedOrder::Converged);
        assert_eq!(error_order(1e-3, 2e-3, 1e-4), ObservedOrder::Erratic);
    }
}
