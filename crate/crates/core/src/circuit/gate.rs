use std::f64::consts::PI;

use nalgebra::Complex;

pub type C64 = Complex<f64>;

/// Single-qubit unitary `e^{i phase} U3(theta, phi, lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneQubit {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
    pub phase: f64,
}

impl OneQubit {
    pub const IDENTITY: OneQubit = OneQubit {
        theta: 0.0,
        phi: 0.0,
        lambda: 0.0,
        phase: 0.0,
    };

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        let g = C64::from_polar(1.0, self.phase);
        [
            [
                g * c,
                -g * C64::from_polar(s, self.lambda),
            ],
            [
                g * C64::from_polar(s, self.phi),
                g * C64::from_polar(c, self.phi + self.lambda),
            ],
        ]
    }

    /// Euler angles of an arbitrary 2x2 unitary.
    pub fn from_matrix(m: &[[C64; 2]; 2]) -> OneQubit {
        let c = m[0][0].norm();
        let s = m[1][0].norm();
        let theta = 2.0 * s.atan2(c);
        if c >= s {
            let gamma = m[0][0].arg();
            let sum = m[1][1].arg() - gamma;
            let diff = m[1][0].arg() - (-m[0][1]).arg();
            let mut phi = 0.5 * (sum + diff);
            let mut lambda = 0.5 * (sum - diff);
            if s > 0.0 {
                let predicted = C64::from_polar(1.0, gamma + phi);
                if (predicted.conj() * m[1][0]).re < 0.0 {
                    phi += PI;
                    lambda += PI;
                }
            }
            OneQubit {
                theta,
                phi,
                lambda,
                phase: gamma,
            }
        } else {
            let gamma = if c > 0.0 { m[0][0].arg() } else { 0.0 };
            OneQubit {
                theta,
                phi: m[1][0].arg() - gamma,
                lambda: (-m[0][1]).arg() - gamma,
                phase: gamma,
            }
        }
    }

    pub fn inverse(&self) -> OneQubit {
        OneQubit {
            theta: -self.theta,
            phi: -self.lambda,
            lambda: -self.phi,
            phase: -self.phase,
        }
    }

    /// `other` applied after `self`.
    pub fn then(&self, other: &OneQubit) -> OneQubit {
        let a = self.matrix();
        let b = other.matrix();
        let mut p = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                p[i][j] = b[i][0] * a[0][j] + b[i][1] * a[1][j];
            }
        }
        OneQubit::from_matrix(&p)
    }

    /// Returns the global phase if this gate is the identity up to phase.
    pub fn identity_phase(&self, tol: f64) -> Option<f64> {
        let m = self.matrix();
        if m[0][1].norm() > tol || m[1][0].norm() > tol {
            return None;
        }
        let ratio = m[1][1] * m[0][0].conj();
        if (ratio - C64::new(1.0, 0.0)).norm() > tol {
            return None;
        }
        Some(m[0][0].arg())
    }

    fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.phi.is_finite() && self.lambda.is_finite() && self.phase.is_finite()
    }
}

/// Elementary gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    U { qubit: usize, u: OneQubit },
    Cx { control: usize, target: usize },
}

impl Gate {
    pub fn u(qubit: usize, theta: f64, phi: f64, lambda: f64) -> Gate {
        Gate::U {
            qubit,
            u: OneQubit {
                theta,
                phi,
                lambda,
                phase: 0.0,
            },
        }
    }

    pub fn h(qubit: usize) -> Gate {
        Gate::u(qubit, PI / 2.0, 0.0, PI)
    }

    pub fn x(qubit: usize) -> Gate {
        Gate::u(qubit, PI, 0.0, PI)
    }

    pub fn ry(qubit: usize, theta: f64) -> Gate {
        Gate::u(qubit, theta, 0.0, 0.0)
    }

    /// `diag(e^{-i theta/2}, e^{i theta/2})`.
    pub fn rz(qubit: usize, theta: f64) -> Gate {
        Gate::U {
            qubit,
            u: OneQubit {
                theta: 0.0,
                phi: 0.0,
                lambda: theta,
                phase: -theta / 2.0,
            },
        }
    }

    /// `diag(1, e^{i theta})`.
    pub fn p(qubit: usize, theta: f64) -> Gate {
        Gate::u(qubit, 0.0, 0.0, theta)
    }

    pub fn cx(control: usize, target: usize) -> Gate {
        Gate::Cx { control, target }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Gate::U { qubit, .. } => (qubit, None),
            Gate::Cx { control, target } => (control, Some(target)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::U { qubit, u } => Gate::U {
                qubit,
                u: u.inverse(),
            },
            cx @ Gate::Cx { .. } => cx,
        }
    }

    pub fn remap(&self, mapping: &[usize]) -> Gate {
        match *self {
            Gate::U { qubit, u } => Gate::U {
                qubit: mapping[qubit],
                u,
            },
            Gate::Cx { control, target } => Gate::Cx {
                control: mapping[control],
                target: mapping[target],
            },
        }
    }

    pub(crate) fn is_finite(&self) -> bool {
        match self {
            Gate::U { u, .. } => u.is_finite(),
            Gate::Cx { .. } => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2], tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).norm() < tol))
    }

    #[test]
    fn euler_round_trip_edge_cases() {
        let cases = [
            OneQubit { theta: 0.3, phi: 1.1, lambda: -0.4, phase: 0.7 },
            OneQubit { theta: 0.0, phi: 0.2, lambda: 0.9, phase: -1.0 },
            OneQubit { theta: PI, phi: 0.5, lambda: 2.5, phase: 0.1 },
            OneQubit { theta: 3.0, phi: -2.9, lambda: 3.1, phase: 2.0 },
            OneQubit { theta: 1e-9, phi: 3.0, lambda: 3.0, phase: 0.0 },
        ];
        for u in cases {
            let m = u.matrix();
            let back = OneQubit::from_matrix(&m).matrix();
            assert!(close(&m, &back, 1e-13), "{u:?}");
        }
    }

    #[test]
    fn named_gates() {
        let h = match Gate::h(0) {
            Gate::U { u, .. } => u.matrix(),
            _ => unreachable!(),
        };
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((h[0][0].re - r).abs() < 1e-15 && (h[1][1].re + r).abs() < 1e-15);
        let rz = match Gate::rz(0, 0.8) {
            Gate::U { u, .. } => u.matrix(),
            _ => unreachable!(),
        };
        assert!((rz[0][0] - C64::from_polar(1.0, -0.4)).norm() < 1e-15);
        assert!((rz[1][1] - C64::from_polar(1.0, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn fusion_and_identity_detection() {
        let a = OneQubit { theta: 0.7, phi: 0.2, lambda: -1.3, phase: 0.0 };
        let id = a.then(&a.inverse());
        assert!(id.identity_phase(1e-12).is_some());
        assert!(a.identity_phase(1e-12).is_none());
    }
}
