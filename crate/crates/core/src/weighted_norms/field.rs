use crate::solver::Trajectory;

/// Anything that can be sampled at `(x, t)`.
pub trait SpaceTimeField: Sync {
    fn value(&self, x: f64, t: f64) -> f64;

    /// `ln |u(x, t)|`; override when `u` itself overflows.
    fn ln_abs(&self, x: f64, t: f64) -> f64 {
        self.value(x, t).abs().ln()
    }
}

impl<F> SpaceTimeField for F
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    fn value(&self, x: f64, t: f64) -> f64 {
        self(x, t)
    }
}

impl SpaceTimeField for Trajectory {
    fn value(&self, x: f64, t: f64) -> f64 {
        self.value_at(x, t)
    }
}

/// A nonnegative field given through its logarithm, for values such as
/// `exp(d^{-3})` that do not fit in an `f64`.
pub struct LogMagnitude<F>(pub F);

impl<F> SpaceTimeField for LogMagnitude<F>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    fn value(&self, x: f64, t: f64) -> f64 {
        (self.0)(x, t).exp()
    }

    fn ln_abs(&self, x: f64, t: f64) -> f64 {
        (self.0)(x, t)
    }
}

/// Zero field.
pub struct Zero;

impl SpaceTimeField for Zero {
    fn value(&self, _: f64, _: f64) -> f64 {
        0.0
    }
}
