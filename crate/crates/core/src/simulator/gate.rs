use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SimulatorError;

/// 2×2 complex matrix, row-major.
pub type Matrix2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Ry(f64),
    Rz(f64),
    /// Real rotation `[[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`; the same
    /// matrix as `Ry`, kept as its own name for circuit listings.
    U(f64),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::U(_) => "u",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::Ry(t) | GateKind::Rz(t) | GateKind::U(t) => Some(t),
            GateKind::H | GateKind::X => None,
        }
    }

    pub fn matrix(&self) -> Matrix2 {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match *self {
            GateKind::H => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                [[c(s, 0.), c(s, 0.)], [c(s, 0.), c(-s, 0.)]]
            }
            GateKind::X => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
            GateKind::Ry(theta) | GateKind::U(theta) => {
                let (s, co) = (theta / 2.0).sin_cos();
                [[c(co, 0.), c(-s, 0.)], [c(s, 0.), c(co, 0.)]]
            }
            GateKind::Rz(phi) => {
                let (s, co) = (phi / 2.0).sin_cos();
                [[c(co, -s), c(0., 0.)], [c(0., 0.), c(co, s)]]
            }
        }
    }

    /// The inverse gate.
    pub fn inverse(&self) -> GateKind {
        match *self {
            GateKind::H => GateKind::H,
            GateKind::X => GateKind::X,
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::U(t) => GateKind::U(-t),
        }
    }
}

/// A control qubit; `polarity == true` fires on `|1⟩`, `false` on `|0⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Self { qubit, polarity: true }
    }

    pub fn off(qubit: usize) -> Self {
        Self { qubit, polarity: false }
    }
}

/// A single-target gate with any number of (possibly open) controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn new(kind: GateKind, target: usize) -> Self {
        Self {
            kind,
            target,
            controls: Vec::new(),
        }
    }

    pub fn h(target: usize) -> Self {
        Self::new(GateKind::H, target)
    }

    pub fn x(target: usize) -> Self {
        Self::new(GateKind::X, target)
    }

    pub fn ry(theta: f64, target: usize) -> Self {
        Self::new(GateKind::Ry(theta), target)
    }

    pub fn rz(phi: f64, target: usize) -> Self {
        Self::new(GateKind::Rz(phi), target)
    }

    pub fn u(theta: f64, target: usize) -> Self {
        Self::new(GateKind::U(theta), target)
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self::x(target).controlled(Control::on(control))
    }

    pub fn controlled(mut self, control: Control) -> Self {
        self.controls.push(control);
        self
    }

    pub fn with_controls(mut self, controls: impl IntoIterator<Item = Control>) -> Self {
        self.controls.extend(controls);
        self
    }

    pub fn inverse(&self) -> Gate {
        Gate {
            kind: self.kind.inverse(),
            target: self.target,
            controls: self.controls.clone(),
        }
    }

    /// Highest qubit index referenced, plus one.
    pub fn span(&self) -> usize {
        self.controls
            .iter()
            .map(|c| c.qubit)
            .chain(std::iter::once(self.target))
            .max()
            .unwrap_or(0)
            + 1
    }

    /// Checks indices against a register of `num_qubits` and the angle.
    pub fn validate(&self, num_qubits: usize) -> Result<(), SimulatorError> {
        if self.span() > num_qubits {
            return Err(SimulatorError::QubitOutOfRange {
                qubit: self.span() - 1,
                num_qubits,
            });
        }
        for (k, c) in self.controls.iter().enumerate() {
            if c.qubit == self.target || self.controls[..k].iter().any(|o| o.qubit == c.qubit) {
                return Err(SimulatorError::OverlappingQubits(c.qubit));
            }
        }
        if self.kind.angle().is_some_and(|a| !a.is_finite()) {
            return Err(SimulatorError::NonFiniteAngle);
        }
        Ok(())
    }
}

/// One gate per line: `name q<target> [c<ctrl> | o<open ctrl>]... [angle]`,
/// for example `ry q2 c0 o1 1.5707963267948966`.
impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} q{}", self.kind.name(), self.target)?;
        for c in &self.controls {
            write!(f, " {}{}", if c.polarity { 'c' } else { 'o' }, c.qubit)?;
        }
        if let Some(a) = self.kind.angle() {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

impl FromStr for Gate {
    type Err = SimulatorError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| SimulatorError::GateSyntax(format!("{msg}: `{line}`"));
        let mut tokens = line.split_whitespace();
        let name = tokens.next().ok_or_else(|| bad("empty line"))?;
        let target = tokens
            .next()
            .and_then(|t| t.strip_prefix('q'))
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("missing target"))?;
        let mut controls = Vec::new();
        let mut angle = None;
        for tok in tokens {
            if angle.is_some() {
                return Err(bad("trailing tokens after angle"));
            }
            let control = |polarity, rest: &str| {
                rest.parse()
                    .map(|qubit| Control { qubit, polarity })
                    .map_err(|_| bad("bad control"))
            };
            match tok.split_at(1) {
                ("c", rest) => controls.push(control(true, rest)?),
                ("o", rest) => controls.push(control(false, rest)?),
                _ => angle = Some(tok.parse::<f64>().map_err(|_| bad("bad angle"))?),
            }
        }
        let need_angle = || angle.ok_or_else(|| bad("missing angle"));
        let kind = match name {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "ry" => GateKind::Ry(need_angle()?),
            "rz" => GateKind::Rz(need_angle()?),
            "u" => GateKind::U(need_angle()?),
            _ => return Err(bad("unknown gate")),
        };
        if kind.angle().is_none() && angle.is_some() {
            return Err(bad("unexpected angle"));
        }
        Ok(Gate {
            kind,
            target,
            controls,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
        let mut out = [[Complex64::new(0., 0.); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    fn assert_identity(m: &Matrix2) {
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((m[i][j] - Complex64::new(expect, 0.)).norm() < 1e-15, "{m:?}");
            }
        }
    }

    #[test]
    fn involutions_and_inverses() {
        assert_identity(&mul(&GateKind::H.matrix(), &GateKind::H.matrix()));
        assert_identity(&mul(&GateKind::X.matrix(), &GateKind::X.matrix()));
        for t in [0.3, -1.7, 3.0] {
            assert_identity(&mul(&GateKind::U(t).matrix(), &GateKind::U(-t).matrix()));
            assert_identity(&mul(&GateKind::Rz(t).matrix(), &GateKind::Rz(t).inverse().matrix()));
        }
    }

    #[test]
    fn u_matches_the_printed_matrix() {
        let m = GateKind::U(1.0).matrix();
        let (s, c) = (0.5f64).sin_cos();
        assert_eq!(m[0][0].re, c);
        assert_eq!(m[0][1].re, -s);
        assert_eq!(m[1][0].re, s);
        assert_eq!(m[1][1].re, c);
    }

    #[test]
    fn text_round_trip() {
        let gates = [
            Gate::h(0),
            Gate::cx(1, 3),
            Gate::ry(std::f64::consts::FRAC_PI_4, 2).with_controls([Control::on(0), Control::off(1)]),
            Gate::rz(-1e-3, 4),
            Gate::u(1.231, 0),
        ];
        for g in gates {
            let line = g.to_string();
            assert_eq!(line.parse::<Gate>().unwrap(), g, "{line}");
        }
        assert_eq!(Gate::cx(0, 1).to_string(), "x q1 c0");
        assert!("ry q0".parse::<Gate>().is_err());
        assert!("h q0 0.5".parse::<Gate>().is_err());
        assert!("swap q0".parse::<Gate>().is_err());
    }

    #[test]
    fn validation() {
        assert!(Gate::cx(0, 1).validate(2).is_ok());
        assert!(Gate::cx(0, 2).validate(2).is_err());
        assert!(Gate::cx(1, 1).validate(2).is_err());
        assert!(Gate::ry(f64::NAN, 0).validate(1).is_err());
        let dup = Gate::x(0).with_controls([Control::on(1), Control::off(1)]);
        assert!(dup.validate(2).is_err());
    }
}
