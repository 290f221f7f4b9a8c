use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOrder {
    First,
    Second,
}

impl TryFrom<u8> for DiffOrder {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            _ => Err(Error::InvalidInput(format!(
                "derivative order {v} not supported"
            ))),
        }
    }
}

/// Fourth-order central difference.
pub fn finite_diff<F: Fn(f64) -> f64>(f: F, x: f64, order: DiffOrder, step: f64) -> Result<f64> {
    let v = finite_diff_complex(|t| C64::new(f(t), 0.0), x, order, step)?;
    Ok(v.re)
}

pub fn finite_diff_complex<F: Fn(f64) -> C64>(
    f: F,
    x: f64,
    order: DiffOrder,
    step: f64,
) -> Result<C64> {
    if !(step > 0.0 && step.is_finite()) || x + step == x {
        return Err(Error::StepTooSmall { step });
    }
    let h = step;
    let (fm2, fm1, fp1, fp2) = (f(x - 2.0 * h), f(x - h), f(x + h), f(x + 2.0 * h));
    Ok(match order {
        DiffOrder::First => (fm2 - fp2 + (fp1 - fm1) * 8.0) / (12.0 * h),
        DiffOrder::Second => {
            let f0 = f(x);
            ((fp1 + fm1) * 16.0 - fp2 - fm2 - f0 * 30.0) / (12.0 * h * h)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_slope() {
        let d = finite_diff(|x| x * x, 3.0, DiffOrder::First, 1e-3).unwrap();
        assert!((d - 6.0).abs() < 1e-9);
    }

    #[test]
    fn sine_curvature_at_origin() {
        let d = finite_diff(f64::sin, 0.0, DiffOrder::Second, 1e-3).unwrap();
        assert!(d.abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_order_and_step() {
        assert!(DiffOrder::try_from(3).is_err());
        assert!(matches!(
            finite_diff(f64::sin, 1e20, DiffOrder::First, 1e-3),
            Err(Error::StepTooSmall { .. })
        ));
    }
}
