//! Radial cutoff `chi`: zero inside `B_{R1}`, one outside `B_{R2}`.

use super::SunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothstep {
    /// `6t^5 - 15t^4 + 10t^3`, C^2.
    Quintic,
    /// `3t^2 - 2t^3`, C^1.
    Cubic,
    /// `35t^4 - 84t^5 + 70t^6 - 20t^7`, C^3.
    Septic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    r1: f64,
    r2: f64,
    kind: Smoothstep,
}

impl Cutoff {
    pub fn new(r1: f64, r2: f64, kind: Smoothstep) -> Result<Self, SunError> {
        if !(r1.is_finite() && r2.is_finite() && r1 > 1.0 && r2 > r1) {
            return Err(SunError::InvalidCutoff { r1, r2 });
        }
        Ok(Cutoff { r1, r2, kind })
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    pub fn kind(&self) -> Smoothstep {
        self.kind
    }

    /// `(chi, chi', chi'')` at radius `rho`.
    pub fn eval(&self, rho: f64) -> (f64, f64, f64) {
        if rho <= self.r1 {
            return (0.0, 0.0, 0.0);
        }
        if rho >= self.r2 {
            return (1.0, 0.0, 0.0);
        }
        let w = self.r2 - self.r1;
        let t = (rho - self.r1) / w;
        let (v, d1, d2) = match self.kind {
            Smoothstep::Quintic => (
                t * t * t * (10.0 - 15.0 * t + 6.0 * t * t),
                30.0 * t * t * (1.0 - t) * (1.0 - t),
                60.0 * t * (1.0 - t) * (1.0 - 2.0 * t),
            ),
            Smoothstep::Cubic => (t * t * (3.0 - 2.0 * t), 6.0 * t * (1.0 - t), 6.0 - 12.0 * t),
            Smoothstep::Septic => {
                let (t2, u) = (t * t, 1.0 - t);
                (
                    t2 * t2 * (35.0 - 84.0 * t + 70.0 * t2 - 20.0 * t2 * t),
                    140.0 * t2 * t * u * u * u,
                    420.0 * t2 * u * u * (1.0 - 2.0 * t),
                )
            }
        };
        (v, d1 / w, d2 / (w * w))
    }

    pub fn value(&self, rho: f64) -> f64 {
        self.eval(rho).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_and_monotone() {
        for kind in [Smoothstep::Quintic, Smoothstep::Cubic, Smoothstep::Septic] {
            let c = Cutoff::new(3.0, 5.0, kind).unwrap();
            assert_eq!(c.value(2.0), 0.0);
            assert_eq!(c.value(6.0), 1.0);
            let mut prev = 0.0;
            for i in 0..=200 {
                let v = c.value(3.0 + 2.0 * i as f64 / 200.0);
                assert!(v >= prev);
                prev = v;
            }
            assert!((prev - 1.0).abs() < 1e-15);
        }
        assert!(Cutoff::new(0.5, 2.0, Smoothstep::Quintic).is_err());
        assert!(Cutoff::new(3.0, 3.0, Smoothstep::Quintic).is_err());
    }

    #[test]
    fn derivatives_match_fd() {
        for kind in [Smoothstep::Quintic, Smoothstep::Cubic, Smoothstep::Septic] {
            let c = Cutoff::new(3.0, 5.0, kind).unwrap();
            let h = 1e-5;
            for rho in [3.2, 3.9, 4.5, 4.95] {
                let (_, d1, d2) = c.eval(rho);
                assert!(((c.value(rho + h) - c.value(rho - h)) / (2.0 * h) - d1).abs() < 1e-8);
                let fd2 = (c.eval(rho + h).1 - c.eval(rho - h).1) / (2.0 * h);
                assert!((fd2 - d2).abs() < 1e-7);
            }
        }
        let c = Cutoff::new(3.0, 5.0, Smoothstep::Quintic).unwrap();
        // C^2 at the ends: second derivative vanishes there.
        assert!(c.eval(3.0 + 1e-9).2.abs() < 1e-6 && c.eval(5.0 - 1e-9).2.abs() < 1e-6);
    }
}
