use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::sde::NoiseSpec;
use crate::spectral::{SpectralState, WaveIndex};

/// Expression over the coordinates `x_{k_i}` of a cylinder function.
///
/// `Coord(i)` refers to the `i`-th entry of the function's index list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Const(f64),
    Coord(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Tanh(Box<Expr>),
    /// `exp(-e^2)`.
    Gauss(Box<Expr>),
}

impl Expr {
    pub fn c(v: f64) -> Self {
        Expr::Const(v)
    }

    pub fn x(i: usize) -> Self {
        Expr::Coord(i)
    }

    pub fn tanh(self) -> Self {
        Expr::Tanh(Box::new(self))
    }

    pub fn gauss(self) -> Self {
        Expr::Gauss(Box::new(self))
    }

    fn max_coord(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Coord(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => match (a.max_coord(), b.max_coord()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
            Expr::Tanh(a) | Expr::Gauss(a) => a.max_coord(),
        }
    }

    fn is_constant(&self) -> bool {
        self.max_coord().is_none()
    }

    fn is_affine(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Coord(_) => true,
            Expr::Add(a, b) | Expr::Sub(a, b) => a.is_affine() && b.is_affine(),
            Expr::Mul(a, b) => (a.is_constant() && b.is_affine()) || (b.is_constant() && a.is_affine()),
            Expr::Tanh(_) | Expr::Gauss(_) => self.is_constant(),
        }
    }

    /// Syntactic C_b^2 test: the value and first two derivatives are bounded.
    ///
    /// Accepted: constants, `tanh` or `gauss` of an affine argument or of a
    /// bounded expression, and sums and products of bounded expressions.
    pub fn is_bounded(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Coord(_) => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.is_bounded() && b.is_bounded(),
            Expr::Tanh(a) | Expr::Gauss(a) => a.is_affine() || a.is_bounded(),
        }
    }

    fn eval(&self, x: &[f64]) -> Jet {
        let d = x.len();
        match self {
            Expr::Const(v) => Jet::constant(*v, d),
            Expr::Coord(i) => Jet::variable(x[*i], *i, d),
            Expr::Add(a, b) => a.eval(x).combine(&b.eval(x), 1.0),
            Expr::Sub(a, b) => a.eval(x).combine(&b.eval(x), -1.0),
            Expr::Mul(a, b) => a.eval(x).mul(&b.eval(x)),
            Expr::Tanh(a) => {
                let inner = a.eval(x);
                let t = inner.v.tanh();
                let s = 1.0 - t * t;
                inner.chain(t, s, -2.0 * t * s)
            }
            Expr::Gauss(a) => {
                let inner = a.eval(x);
                let y = inner.v;
                let g = (-y * y).exp();
                inner.chain(g, -2.0 * y * g, (4.0 * y * y - 2.0) * g)
            }
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

/// Second-order forward-mode jet: value, gradient and row-major Hessian.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

impl Jet {
    fn constant(v: f64, d: usize) -> Self {
        Self { v, g: vec![0.0; d], h: vec![0.0; d * d] }
    }

    fn variable(v: f64, i: usize, d: usize) -> Self {
        let mut j = Self::constant(v, d);
        j.g[i] = 1.0;
        j
    }

    fn combine(mut self, other: &Jet, sign: f64) -> Self {
        self.v += sign * other.v;
        self.g.iter_mut().zip(&other.g).for_each(|(a, b)| *a += sign * b);
        self.h.iter_mut().zip(&other.h).for_each(|(a, b)| *a += sign * b);
        self
    }

    fn mul(&self, o: &Jet) -> Self {
        let d = self.g.len();
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                h[i * d + j] =
                    self.v * o.h[i * d + j] + o.v * self.h[i * d + j] + self.g[i] * o.g[j] + o.g[i] * self.g[j];
            }
        }
        let g = self.g.iter().zip(&o.g).map(|(a, b)| self.v * b + o.v * a).collect();
        Self { v: self.v * o.v, g, h }
    }

    /// Composition with a scalar function given its value and two derivatives.
    fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        let d = self.g.len();
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                h[i * d + j] = df * self.h[i * d + j] + d2f * self.g[i] * self.g[j];
            }
        }
        Self { v: f, g: self.g.iter().map(|a| df * a).collect(), h }
    }
}

/// A function of finitely many basis coordinates `x_k = <x, e_k>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderFunction {
    pub name: String,
    pub indices: Vec<WaveIndex>,
    pub body: Expr,
}

impl CylinderFunction {
    pub fn new(name: &str, indices: Vec<WaveIndex>, body: Expr) -> Result<Self> {
        if let Some(i) = body.max_coord() {
            if i >= indices.len() {
                return Err(LabError::Config(format!(
                    "cylinder function {name}: coordinate {i} but only {} indices",
                    indices.len()
                )));
            }
        }
        for (a, k) in indices.iter().enumerate() {
            if indices[..a].contains(k) {
                return Err(LabError::Config(format!("cylinder function {name}: repeated index {k}")));
            }
        }
        Ok(Self { name: name.to_string(), indices, body })
    }

    pub fn constant(value: f64) -> Self {
        Self { name: format!("const({value})"), indices: Vec::new(), body: Expr::Const(value) }
    }

    /// The unbounded coordinate function `x_k`.
    pub fn coordinate(k: WaveIndex) -> Self {
        Self { name: format!("x{k}"), indices: vec![k], body: Expr::x(0) }
    }

    pub fn is_bounded(&self) -> bool {
        self.body.is_bounded()
    }

    fn max_wave(&self) -> i64 {
        self.indices.iter().map(|k| k.norm_sq()).max().unwrap_or(0)
    }

    /// Coordinates of `x` that `phi` depends on.
    pub fn coordinates(&self, x: &SpectralState) -> Result<Vec<f64>> {
        self.indices
            .iter()
            .map(|k| {
                x.coeff(*k).ok_or_else(|| {
                    LabError::Config(format!(
                        "cylinder function {} uses mode {k} outside cutoff {}",
                        self.name,
                        x.cutoff()
                    ))
                })
            })
            .collect()
    }

    /// Value, gradient and Hessian of the underlying `phi~` at `x`.
    pub fn jet(&self, x: &SpectralState) -> Result<Jet> {
        Ok(self.body.eval(&self.coordinates(x)?))
    }

    pub fn value(&self, x: &SpectralState) -> Result<f64> {
        Ok(self.jet(x)?.v)
    }

    /// `D phi(x) = sum_i d_i phi~ e_{k_i}` as an element of `H_n`.
    pub fn gradient(&self, x: &SpectralState) -> Result<SpectralState> {
        let jet = self.jet(x)?;
        let mut out = SpectralState::zeros(x.cutoff())?;
        for (k, g) in self.indices.iter().zip(&jet.g) {
            let i = x.modes().index_of(*k).expect("checked in coordinates");
            out.coeffs_mut()[i] = *g;
        }
        Ok(out)
    }

    /// `K phi(x)` given the drift already evaluated at `x`.
    pub fn generator_with_drift(&self, x: &SpectralState, drift: &SpectralState, noise: &NoiseSpec) -> Result<f64> {
        let jet = self.jet(x)?;
        let d = self.indices.len();
        let mut trace = 0.0;
        let mut transport = 0.0;
        for (i, k) in self.indices.iter().enumerate() {
            let slot = x.modes().index_of(*k).expect("checked in coordinates");
            trace += noise.variance(slot) * jet.h[i * d + i];
            transport += drift.coeffs()[slot] * jet.g[i];
        }
        Ok(0.5 * trace + transport)
    }

    pub(crate) fn check_cutoff(&self, cutoff: usize) -> Result<()> {
        if self.max_wave() > (cutoff * cutoff) as i64 {
            return Err(LabError::Config(format!("cylinder function {} uses modes beyond cutoff {cutoff}", self.name)));
        }
        Ok(())
    }
}

/// Five bounded test functions over the lowest modes used by the invariance checks.
pub fn standard_suite() -> Vec<CylinderFunction> {
    let k = |a, b| WaveIndex::new(a, b).expect("nonzero");
    let (x, c) = (Expr::x, Expr::c);
    vec![
        CylinderFunction::new("tanh(x(1,0))", vec![k(1, 0)], x(0).tanh()).unwrap(),
        CylinderFunction::new("gauss(x(0,1))", vec![k(0, 1)], x(0).gauss()).unwrap(),
        CylinderFunction::new("tanh(x(1,0)+0.5x(0,1))", vec![k(1, 0), k(0, 1)], (x(0) + c(0.5) * x(1)).tanh()).unwrap(),
        CylinderFunction::new("tanh(x(1,1))gauss(x(-1,0))", vec![k(1, 1), k(-1, 0)], x(0).tanh() * x(1).gauss())
            .unwrap(),
        CylinderFunction::new(
            "gauss(x(1,0)-x(0,-1)+0.3x(1,-1))",
            vec![k(1, 0), k(0, -1), k(1, -1)],
            (x(0) - x(1) + c(0.3) * x(2)).gauss(),
        )
        .unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn boundedness_flag() {
        let (x, c) = (Expr::x, Expr::c);
        assert!(!x(0).is_bounded());
        assert!(x(0).tanh().is_bounded());
        assert!((c(2.0) * x(0) - x(1)).gauss().is_bounded());
        assert!((x(0) * x(1)).tanh().tanh().is_bounded() == false);
        assert!((x(0).tanh() * x(1)).tanh().is_bounded() == false);
        assert!((x(0).tanh() * x(1).gauss()).tanh().is_bounded());
        assert!(standard_suite().iter().all(CylinderFunction::is_bounded));
    }

    #[test]
    fn jet_matches_closed_form() {
        let e = (Expr::x(0) * Expr::x(1)).gauss();
        let (a, b) = (0.7, -0.4);
        let j = e.eval(&[a, b]);
        let g = (-(a * b) * (a * b)).exp();
        assert_relative_eq!(j.v, g);
        assert_relative_eq!(j.g[0], -2.0 * a * b * b * g, epsilon = 1e-15);
        assert_relative_eq!(j.h[0], (4.0 * a * a * b * b - 2.0) * b * b * g, epsilon = 1e-15);
        assert_relative_eq!(j.h[1], j.h[2]);
    }

    #[test]
    fn index_validation() {
        let k = WaveIndex::new(1, 0).unwrap();
        assert!(CylinderFunction::new("bad", vec![k], Expr::x(1)).is_err());
        assert!(CylinderFunction::new("dup", vec![k, k], Expr::x(0)).is_err());
        let far = CylinderFunction::coordinate(WaveIndex::new(3, 3).unwrap());
        let s = SpectralState::zeros(2).unwrap();
        assert!(far.value(&s).is_err());
    }
}
