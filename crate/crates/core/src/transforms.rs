//! Light-tailed building blocks: Laplace transforms, Levy exponents,
//! their strips of convergence, derivatives and exact samplers.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution as _, Exp, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interval of real parts on which a transform converges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    #[serde(with = "extended_real")]
    pub left: f64,
    #[serde(with = "extended_real")]
    pub right: f64,
    pub left_closed: bool,
    pub right_closed: bool,
}

impl Strip {
    pub const WHOLE: Strip = Strip {
        left: f64::NEG_INFINITY,
        right: f64::INFINITY,
        left_closed: false,
        right_closed: false,
    };

    pub fn contains(&self, x: f64) -> bool {
        let lo = if self.left_closed { x >= self.left } else { x > self.left };
        let hi = if self.right_closed { x <= self.right } else { x < self.right };
        lo && hi
    }

    pub fn contains_open(&self, x: f64) -> bool {
        x > self.left && x < self.right
    }

    pub fn intersect(&self, other: &Strip) -> Strip {
        let (left, left_closed) = if self.left > other.left {
            (self.left, self.left_closed)
        } else if other.left > self.left {
            (other.left, other.left_closed)
        } else {
            (self.left, self.left_closed && other.left_closed)
        };
        let (right, right_closed) = if self.right < other.right {
            (self.right, self.right_closed)
        } else if other.right < self.right {
            (other.right, other.right_closed)
        } else {
            (self.right, self.right_closed && other.right_closed)
        };
        Strip { left, right, left_closed, right_closed }
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }
}

// Infinite endpoints travel as the strings "inf" and "-inf".
mod extended_real {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() {
            s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*x)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Text(t) => Err(D::Error::custom(format!("bad endpoint {t:?}"))),
        }
    }
}

/// The closed catalog of distributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    ConstantShift { shift: f64 },
    Gaussian { mean: f64, variance: f64 },
    ExponentialRight { rate: f64 },
    ExponentialLeft { rate: f64 },
    AsymmetricLaplace { rate_right: f64, rate_left: f64, weight_right: f64 },
    Unit,
}

impl Distribution {
    pub fn name(&self) -> &'static str {
        match self {
            Distribution::ConstantShift { .. } => "constant_shift",
            Distribution::Gaussian { .. } => "gaussian",
            Distribution::ExponentialRight { .. } => "exponential_right",
            Distribution::ExponentialLeft { .. } => "exponential_left",
            Distribution::AsymmetricLaplace { .. } => "asymmetric_laplace",
            Distribution::Unit => "unit",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        match *self {
            Distribution::ConstantShift { shift } if !shift.is_finite() => bad(format!("shift {shift}")),
            Distribution::Gaussian { mean, variance } if !mean.is_finite() || !(variance >= 0.0) || !variance.is_finite() => {
                bad(format!("gaussian mean {mean}, variance {variance}"))
            }
            Distribution::ExponentialRight { rate } | Distribution::ExponentialLeft { rate } if !finite_pos(rate) => {
                bad(format!("exponential rate {rate}"))
            }
            Distribution::AsymmetricLaplace { rate_right, rate_left, weight_right }
                if !finite_pos(rate_right) || !finite_pos(rate_left) || !(0.0..=1.0).contains(&weight_right) =>
            {
                bad(format!("asymmetric laplace ({rate_right}, {rate_left}, {weight_right})"))
            }
            _ => Ok(()),
        }
    }

    /// Strip of convergence of the Laplace transform E exp(zX).
    pub fn strip(&self) -> Strip {
        match *self {
            Distribution::ExponentialRight { rate } => Strip { right: rate, ..Strip::WHOLE },
            Distribution::ExponentialLeft { rate } => Strip { left: -rate, ..Strip::WHOLE },
            Distribution::AsymmetricLaplace { rate_right, rate_left, .. } => {
                Strip { left: -rate_left, right: rate_right, ..Strip::WHOLE }
            }
            _ => Strip::WHOLE,
        }
    }

    fn check_open(&self, z: Complex64) -> Result<()> {
        if self.strip().contains_open(z.re) {
            Ok(())
        } else {
            Err(Error::OutsideStrip(z))
        }
    }

    /// E exp(zX).
    pub fn laplace(&self, z: Complex64) -> Result<Complex64> {
        self.check_open(z)?;
        let one = Complex64::new(1.0, 0.0);
        Ok(match *self {
            Distribution::ConstantShift { shift } => (z * shift).exp(),
            Distribution::Gaussian { mean, variance } => (z * mean + z * z * (variance / 2.0)).exp(),
            Distribution::ExponentialRight { rate } => rate / (rate - z),
            Distribution::ExponentialLeft { rate } => rate / (rate + z),
            Distribution::AsymmetricLaplace { rate_right, rate_left, weight_right } => {
                weight_right * rate_right / (rate_right - z) + (1.0 - weight_right) * rate_left / (rate_left + z)
            }
            Distribution::Unit => one,
        })
    }

    pub fn laplace_derivative(&self, z: Complex64) -> Result<Complex64> {
        self.check_open(z)?;
        Ok(match *self {
            Distribution::ConstantShift { shift } => shift * (z * shift).exp(),
            Distribution::Gaussian { mean, variance } => {
                (mean + z * variance) * (z * mean + z * z * (variance / 2.0)).exp()
            }
            Distribution::ExponentialRight { rate } => rate / ((rate - z) * (rate - z)),
            Distribution::ExponentialLeft { rate } => -rate / ((rate + z) * (rate + z)),
            Distribution::AsymmetricLaplace { rate_right, rate_left, weight_right } => {
                weight_right * rate_right / ((rate_right - z) * (rate_right - z))
                    - (1.0 - weight_right) * rate_left / ((rate_left + z) * (rate_left + z))
            }
            Distribution::Unit => Complex64::new(0.0, 0.0),
        })
    }

    pub fn laplace_real(&self, s: f64) -> Result<f64> {
        Ok(self.laplace(Complex64::new(s, 0.0))?.re)
    }

    /// Exponent for the Levy role: E exp(z L_t) = exp(t * exponent(z)).
    pub fn levy(&self, z: Complex64) -> Result<Complex64> {
        match *self {
            Distribution::Gaussian { mean, variance } => Ok(z * mean + z * z * (variance / 2.0)),
            Distribution::ConstantShift { shift } => Ok(z * shift),
            Distribution::Unit => Ok(Complex64::new(0.0, 0.0)),
            _ => Err(Error::UnsupportedLevy(self.name())),
        }
    }

    pub fn levy_derivative(&self, z: Complex64) -> Result<Complex64> {
        match *self {
            Distribution::Gaussian { mean, variance } => Ok(mean + z * variance),
            Distribution::ConstantShift { shift } => Ok(Complex64::new(shift, 0.0)),
            Distribution::Unit => Ok(Complex64::new(0.0, 0.0)),
            _ => Err(Error::UnsupportedLevy(self.name())),
        }
    }

    /// One draw of the random variable.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::ConstantShift { shift } => shift,
            Distribution::Gaussian { mean, variance } => {
                if variance == 0.0 {
                    mean
                } else {
                    Normal::new(mean, variance.sqrt()).expect("validated").sample(rng)
                }
            }
            Distribution::ExponentialRight { rate } => Exp::new(rate).expect("validated").sample(rng),
            Distribution::ExponentialLeft { rate } => -Exp::new(rate).expect("validated").sample(rng),
            Distribution::AsymmetricLaplace { rate_right, rate_left, weight_right } => {
                if rng.random::<f64>() < weight_right {
                    Exp::new(rate_right).expect("validated").sample(rng)
                } else {
                    -Exp::new(rate_left).expect("validated").sample(rng)
                }
            }
            Distribution::Unit => 0.0,
        }
    }

    /// Increment over `t` of the Levy process with this exponent.
    pub fn sample_levy<R: Rng + ?Sized>(&self, rng: &mut R, t: f64) -> Result<f64> {
        match *self {
            Distribution::Gaussian { mean, variance } => {
                if variance == 0.0 {
                    Ok(mean * t)
                } else {
                    Ok(Normal::new(mean * t, (variance * t).sqrt()).expect("validated").sample(rng))
                }
            }
            Distribution::ConstantShift { shift } => Ok(shift * t),
            Distribution::Unit => Ok(0.0),
            _ => Err(Error::UnsupportedLevy(self.name())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    LaplaceTransform,
    LevyExponent,
}

/// A catalog entry with the role it plays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub kind: Distribution,
    pub role: Role,
}

impl TransformSpec {
    pub fn new(kind: Distribution, role: Role) -> Result<Self> {
        kind.validate()?;
        if role == Role::LevyExponent {
            kind.levy(Complex64::new(0.0, 0.0))?;
        }
        Ok(TransformSpec { kind, role })
    }

    pub fn laplace(kind: Distribution) -> Result<Self> {
        Self::new(kind, Role::LaplaceTransform)
    }

    pub fn levy(kind: Distribution) -> Result<Self> {
        Self::new(kind, Role::LevyExponent)
    }

    pub fn strip(&self) -> Strip {
        match self.role {
            Role::LaplaceTransform => self.kind.strip(),
            Role::LevyExponent => Strip::WHOLE,
        }
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        match self.role {
            Role::LaplaceTransform => self.kind.laplace(z),
            Role::LevyExponent => self.kind.levy(z),
        }
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        match self.role {
            Role::LaplaceTransform => self.kind.laplace_derivative(z),
            Role::LevyExponent => self.kind.levy_derivative(z),
        }
    }

    /// Laplace role draws the variable itself and takes no elapsed time;
    /// Levy role draws the increment over the elapsed time.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, elapsed_time: Option<f64>) -> Result<f64> {
        match (self.role, elapsed_time) {
            (Role::LaplaceTransform, None) => Ok(self.kind.sample(rng)),
            (Role::LevyExponent, Some(t)) if t > 0.0 => self.kind.sample_levy(rng, t),
            (Role::LaplaceTransform, Some(_)) => Err(Error::SamplerRole("a Laplace transform takes no elapsed time")),
            (Role::LevyExponent, _) => Err(Error::SamplerRole("a Levy exponent needs a positive elapsed time")),
        }
    }
}

/// Compound Poisson component: intensity * (jump transform - 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompoundPoisson {
    pub intensity: f64,
    pub jump: Distribution,
}

/// State-dependent Levy exponent: drift and diffusion plus optional jumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevySpec {
    pub exponent: Distribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compound_poisson: Option<CompoundPoisson>,
}

impl LevySpec {
    pub fn gaussian(mean: f64, variance: f64) -> Self {
        LevySpec { exponent: Distribution::Gaussian { mean, variance }, compound_poisson: None }
    }

    pub fn with_jumps(mut self, intensity: f64, jump: Distribution) -> Self {
        self.compound_poisson = Some(CompoundPoisson { intensity, jump });
        self
    }

    pub fn validate(&self) -> Result<()> {
        TransformSpec::levy(self.exponent)?;
        if let Some(cp) = &self.compound_poisson {
            if !(cp.intensity.is_finite() && cp.intensity >= 0.0) {
                return Err(Error::InvalidDistribution(format!("jump intensity {}", cp.intensity)));
            }
            cp.jump.validate()?;
        }
        Ok(())
    }

    pub fn strip(&self) -> Strip {
        self.compound_poisson.map_or(Strip::WHOLE, |cp| cp.jump.strip())
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        let mut v = self.exponent.levy(z)?;
        if let Some(cp) = &self.compound_poisson {
            v += cp.intensity * (cp.jump.laplace(z)? - 1.0);
        }
        Ok(v)
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let mut v = self.exponent.levy_derivative(z)?;
        if let Some(cp) = &self.compound_poisson {
            v += cp.intensity * cp.jump.laplace_derivative(z)?;
        }
        Ok(v)
    }

    pub fn sample_increment<R: Rng + ?Sized>(&self, rng: &mut R, t: f64) -> Result<f64> {
        let mut x = self.exponent.sample_levy(rng, t)?;
        if let Some(cp) = &self.compound_poisson {
            let mean = cp.intensity * t;
            if mean > 0.0 {
                let count = Poisson::new(mean).map_err(|e| Error::InvalidDistribution(e.to_string()))?.sample(rng) as u64;
                for _ in 0..count {
                    x += cp.jump.sample(rng);
                }
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    const CATALOG: [Distribution; 6] = [
        Distribution::ConstantShift { shift: 0.7 },
        Distribution::Gaussian { mean: -0.3, variance: 1.5 },
        Distribution::ExponentialRight { rate: 2.0 },
        Distribution::ExponentialLeft { rate: 1.5 },
        Distribution::AsymmetricLaplace { rate_right: 1.0, rate_left: 3.0, weight_right: 0.5 },
        Distribution::Unit,
    ];

    #[test]
    fn evaluate_examples() {
        let g = TransformSpec::levy(Distribution::Gaussian { mean: 0.0, variance: 2.0 }).unwrap();
        assert_eq!(g.evaluate(c(1.0)).unwrap(), c(1.0));
        let e = TransformSpec::laplace(Distribution::ExponentialRight { rate: 3.0 }).unwrap();
        assert!((e.evaluate(c(1.0)).unwrap() - c(1.5)).norm() < 1e-15);
        assert_eq!(e.evaluate(c(0.0)).unwrap(), c(1.0));
        assert!(matches!(e.evaluate(c(3.0)), Err(Error::OutsideStrip(_))));
        let u = TransformSpec::laplace(Distribution::Unit).unwrap();
        assert_eq!(u.evaluate(Complex64::new(4.0, -2.0)).unwrap(), c(1.0));
    }

    #[test]
    fn strips() {
        let s = Distribution::ExponentialRight { rate: 2.0 }.strip();
        assert_eq!((s.right, s.right_closed), (2.0, false));
        assert_eq!(Distribution::Gaussian { mean: 0.0, variance: 1.0 }.strip(), Strip::WHOLE);
        let s = Distribution::AsymmetricLaplace { rate_right: 1.0, rate_left: 3.0, weight_right: 0.5 }.strip();
        assert_eq!((s.left, s.right), (-3.0, 1.0));
    }

    #[test]
    fn derivatives_examples() {
        let g = TransformSpec::levy(Distribution::Gaussian { mean: 0.4, variance: 2.0 }).unwrap();
        assert!((g.derivative(c(0.0)).unwrap() - c(0.4)).norm() < 1e-15);
        assert!((g.derivative(c(1.5)).unwrap() - c(3.4)).norm() < 1e-15);
        let e = Distribution::ExponentialRight { rate: 2.0 };
        assert!((e.laplace_derivative(c(1.0)).unwrap() - c(2.0)).norm() < 1e-15);
        assert_eq!(Distribution::Unit.laplace_derivative(c(3.0)).unwrap(), c(0.0));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for d in CATALOG {
            let s = d.strip();
            let lo = if s.left.is_finite() { s.left * 0.9 } else { -2.0 };
            let hi = if s.right.is_finite() { s.right * 0.9 } else { 2.0 };
            for i in 0..20 {
                let x = lo + (hi - lo) * (i as f64 + 0.5) / 20.0;
                let z = Complex64::new(x, 0.3 * (i as f64 - 10.0) / 10.0);
                let fd = (d.laplace(z + h).unwrap() - d.laplace(z - h).unwrap()) / (2.0 * h);
                let an = d.laplace_derivative(z).unwrap();
                assert!((fd - an).norm() <= 1e-6 * an.norm().max(1.0), "{d:?} at {z}");
            }
        }
    }

    #[test]
    fn laplace_is_log_convex_and_levy_convex() {
        for d in CATALOG {
            let s = d.strip();
            let lo = if s.left.is_finite() { s.left * 0.95 } else { -3.0 };
            let hi = if s.right.is_finite() { s.right * 0.95 } else { 3.0 };
            let f = |x: f64| d.laplace_real(x).unwrap().ln();
            for i in 1..40 {
                let h = (hi - lo) / 40.0;
                let x = lo + i as f64 * h;
                assert!(f(x) <= 0.5 * (f(x - h) + f(x + h)) + 1e-12, "{d:?}");
            }
            assert_eq!(d.laplace_real(0.0).unwrap(), 1.0);
        }
        let g = Distribution::Gaussian { mean: 1.0, variance: 0.5 };
        assert_eq!(g.levy(c(0.0)).unwrap(), c(0.0));
    }

    #[test]
    fn role_checks() {
        assert!(TransformSpec::levy(Distribution::ExponentialRight { rate: 1.0 }).is_err());
        assert!(TransformSpec::laplace(Distribution::ExponentialRight { rate: -1.0 }).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = TransformSpec::levy(Distribution::Gaussian { mean: 1.0, variance: 1.0 }).unwrap();
        assert!(g.sample(&mut rng, None).is_err());
        let e = TransformSpec::laplace(Distribution::ExponentialRight { rate: 1.0 }).unwrap();
        assert!(e.sample(&mut rng, Some(1.0)).is_err());
        let k = TransformSpec::laplace(Distribution::ConstantShift { shift: 2.5 }).unwrap();
        assert_eq!(k.sample(&mut rng, None).unwrap(), 2.5);
    }

    #[test]
    fn serde_shape() {
        let d = Distribution::Gaussian { mean: 0.0, variance: 2.0 };
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"kind":"gaussian","parameters":{"mean":0.0,"variance":2.0}}"#);
        let u: Distribution = serde_json::from_str(r#"{"kind":"unit"}"#).unwrap();
        assert_eq!(u, Distribution::Unit);
        assert!(serde_json::from_str::<Distribution>(r#"{"kind":"cauchy","parameters":{}}"#).is_err());
        let strip = Distribution::ExponentialRight { rate: 2.0 }.strip();
        let text = serde_json::to_string(&strip).unwrap();
        assert!(text.contains(r#""left":"-inf""#));
        assert_eq!(serde_json::from_str::<Strip>(&text).unwrap(), strip);
    }
}
