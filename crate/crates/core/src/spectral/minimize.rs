use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// One-dimensional bounded minimization.
pub trait ScalarMinimizer: Send + Sync {
    fn name(&self) -> &'static str;
    /// Absolute tolerance on the abscissa.
    fn set_tolerance(&mut self, xatol: f64);
    fn minimize(&self, f: &mut dyn FnMut(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<Minimum>;
}

fn check_bracket(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid(format!("bad bracket [{lo}, {hi}]")));
    }
    Ok(())
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Brent's bounded minimizer (golden section plus parabolic steps).
///
/// The stopping tolerance is `2 eps |x| + xatol / 3` with machine `eps`
/// rather than its square root: the functions minimized here have a kink
/// at the minimum, so the usual smooth-minimum argument doesn't apply.
#[derive(Debug, Clone, Copy)]
pub struct Brent {
    pub xatol: f64,
    pub max_iterations: usize,
}

impl Default for Brent {
    fn default() -> Self {
        Self {
            xatol: 1e-14,
            max_iterations: 500,
        }
    }
}

impl ScalarMinimizer for Brent {
    fn name(&self) -> &'static str {
        "brent"
    }

    fn set_tolerance(&mut self, xatol: f64) {
        self.xatol = xatol;
    }

    fn minimize(&self, f: &mut dyn FnMut(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<Minimum> {
        check_bracket(lo, hi)?;
        let (mut a, mut b) = (lo, hi);
        let mut x = a + GOLDEN * (b - a);
        let (mut w, mut v) = (x, x);
        let mut fx = f(x)?;
        let (mut fw, mut fv) = (fx, fx);
        let (mut d, mut e): (f64, f64) = (0.0, 0.0);
        let mut evaluations = 1;
        for _ in 0..self.max_iterations {
            let xm = 0.5 * (a + b);
            let tol1 = 2.0 * f64::EPSILON * x.abs() + self.xatol / 3.0;
            let tol2 = 2.0 * tol1;
            if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
                break;
            }
            let mut golden = true;
            if e.abs() > tol1 {
                let r = (x - w) * (fx - fv);
                let mut q = (x - v) * (fx - fw);
                let mut p = (x - v) * q - (x - w) * r;
                q = 2.0 * (q - r);
                if q > 0.0 {
                    p = -p;
                }
                q = q.abs();
                let etemp = e;
                e = d;
                if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                    d = p / q;
                    let u = x + d;
                    if u - a < tol2 || b - u < tol2 {
                        d = tol1.copysign(xm - x);
                    }
                    golden = false;
                }
            }
            if golden {
                e = if x >= xm { a - x } else { b - x };
                d = GOLDEN * e;
            }
            let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
            let fu = f(u)?;
            evaluations += 1;
            if fu <= fx {
                if u >= x {
                    a = x;
                } else {
                    b = x;
                }
                (v, fv) = (w, fw);
                (w, fw) = (x, fx);
                (x, fx) = (u, fu);
            } else {
                if u < x {
                    a = u;
                } else {
                    b = u;
                }
                if fu <= fw || w == x {
                    (v, fv) = (w, fw);
                    (w, fw) = (u, fu);
                } else if fu <= fv || v == x || v == w {
                    (v, fv) = (u, fu);
                }
            }
        }
        Ok(Minimum {
            x,
            value: fx,
            evaluations,
        })
    }
}

/// Plain golden-section search; slower than Brent but never takes a
/// parabolic step, which makes it a useful cross-check.
#[derive(Debug, Clone, Copy)]
pub struct GoldenSection {
    pub xatol: f64,
    pub max_iterations: usize,
}

impl Default for GoldenSection {
    fn default() -> Self {
        Self {
            xatol: 1e-14,
            max_iterations: 300,
        }
    }
}

impl ScalarMinimizer for GoldenSection {
    fn name(&self) -> &'static str {
        "golden"
    }

    fn set_tolerance(&mut self, xatol: f64) {
        self.xatol = xatol;
    }

    fn minimize(&self, f: &mut dyn FnMut(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<Minimum> {
        check_bracket(lo, hi)?;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - (1.0 - GOLDEN) * (b - a);
        let mut d = a + (1.0 - GOLDEN) * (b - a);
        let (mut fc, mut fd) = (f(c)?, f(d)?);
        let mut evaluations = 2;
        for _ in 0..self.max_iterations {
            if (b - a).abs() <= self.xatol + 2.0 * f64::EPSILON * c.abs() {
                break;
            }
            if fc <= fd {
                b = d;
                (d, fd) = (c, fc);
                c = b - (1.0 - GOLDEN) * (b - a);
                fc = f(c)?;
            } else {
                a = c;
                (c, fc) = (d, fd);
                d = a + (1.0 - GOLDEN) * (b - a);
                fd = f(d)?;
            }
            evaluations += 1;
        }
        let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
        Ok(Minimum { x, value, evaluations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn both() -> [Box<dyn ScalarMinimizer>; 2] {
        [Box::new(Brent::default()), Box::new(GoldenSection::default())]
    }

    #[test]
    fn smooth_quadratic() {
        for m in both() {
            let r = m.minimize(&mut |x| Ok((x - 0.3) * (x - 0.3) + 2.0), -1.0, 2.0).unwrap();
            assert!((r.x - 0.3).abs() < 1e-7, "{}: {r:?}", m.name());
            assert!((r.value - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn v_shaped_minimum_is_located_to_roundoff() {
        let root = std::f64::consts::FRAC_PI_2;
        for m in both() {
            let r = m.minimize(&mut |x: f64| Ok(x.cos().abs()), root - 0.01, root + 0.013).unwrap();
            assert!((r.x - root).abs() < 1e-13, "{}: {r:?}", m.name());
        }
    }

    #[test]
    fn endpoint_minimum() {
        let r = Brent::default().minimize(&mut |x| Ok(x), 1.0, 2.0).unwrap();
        assert!((r.x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors_propagate_and_brackets_are_checked() {
        let mut fail = |_x: f64| Err(invalid("boom"));
        assert!(Brent::default().minimize(&mut fail, 0.0, 1.0).is_err());
        assert!(Brent::default().minimize(&mut |x| Ok(x), 1.0, 1.0).is_err());
    }
}
