//! Material parameters, loading programs and pointwise energy densities.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Plane regime used to reduce 3D isotropic elasticity to the film plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlaneRegime {
    #[default]
    PlaneStress,
    PlaneStrain,
}

impl fmt::Display for PlaneRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlaneRegime::PlaneStress => "plane_stress",
            PlaneRegime::PlaneStrain => "plane_strain",
        })
    }
}

impl FromStr for PlaneRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plane_stress" => Ok(PlaneRegime::PlaneStress),
            "plane_strain" => Ok(PlaneRegime::PlaneStrain),
            other => Err(Error::param("regime", format!("unknown regime `{other}`"))),
        }
    }
}

/// Converts Young's modulus and Poisson's ratio into Lamé coefficients `(lambda, mu)`.
pub fn lame_from_young_poisson(young: f64, poisson: f64, regime: PlaneRegime) -> Result<(f64, f64)> {
    if !(young > 0.0 && young.is_finite()) {
        return Err(Error::param("E", format!("must be positive, got {young}")));
    }
    if !(0.0..0.5).contains(&poisson) {
        return Err(Error::param("nu", format!("must lie in [0, 0.5), got {poisson}")));
    }
    let mu = young / (2.0 * (1.0 + poisson));
    let lambda = match regime {
        PlaneRegime::PlaneStress => young * poisson / (1.0 - poisson * poisson),
        PlaneRegime::PlaneStrain => young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson)),
    };
    Ok((lambda, mu))
}

/// Raw user-facing material inputs, before validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialInputs {
    pub young: f64,
    pub poisson: f64,
    pub regime: PlaneRegime,
    pub toughness: f64,
    pub adhesion: f64,
    pub eps: f64,
    pub eta: f64,
}

impl Default for MaterialInputs {
    fn default() -> Self {
        Self {
            young: 1.0,
            poisson: 0.15,
            regime: PlaneRegime::PlaneStress,
            toughness: 1.0,
            adhesion: 0.15,
            eps: 0.25,
            eta: 1e-5,
        }
    }
}

/// Validated material parameters of the phase-field energy.
///
/// On 1D meshes the elastic density is `E * |u'|^2`, so `young` plays the
/// role of the bar modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    young: f64,
    poisson: f64,
    regime: PlaneRegime,
    lambda: f64,
    mu: f64,
    toughness: f64,
    adhesion: f64,
    eps: f64,
    eta: f64,
}

impl MaterialParams {
    pub fn new(inputs: MaterialInputs) -> Result<Self> {
        let (lambda, mu) = lame_from_young_poisson(inputs.young, inputs.poisson, inputs.regime)?;
        positive("Gc", inputs.toughness)?;
        positive("beta", inputs.adhesion)?;
        positive("eps", inputs.eps)?;
        if !(inputs.eta >= 0.0 && inputs.eta.is_finite()) {
            return Err(Error::param("eta", format!("must be non-negative, got {}", inputs.eta)));
        }
        Ok(Self {
            young: inputs.young,
            poisson: inputs.poisson,
            regime: inputs.regime,
            lambda,
            mu,
            toughness: inputs.toughness,
            adhesion: inputs.adhesion,
            eps: inputs.eps,
            eta: inputs.eta,
        })
    }

    pub fn inputs(&self) -> MaterialInputs {
        MaterialInputs {
            young: self.young,
            poisson: self.poisson,
            regime: self.regime,
            toughness: self.toughness,
            adhesion: self.adhesion,
            eps: self.eps,
            eta: self.eta,
        }
    }

    pub fn young(&self) -> f64 {
        self.young
    }
    pub fn poisson(&self) -> f64 {
        self.poisson
    }
    pub fn regime(&self) -> PlaneRegime {
        self.regime
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn toughness(&self) -> f64 {
        self.toughness
    }
    pub fn adhesion(&self) -> f64 {
        self.adhesion
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self::new(MaterialInputs::default()).expect("default material is valid")
    }
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, format!("must be positive, got {value}")))
    }
}

/// Symmetric 2x2 strain tensor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Strain {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl Strain {
    pub fn new(xx: f64, yy: f64, xy: f64) -> Self {
        Self { xx, yy, xy }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Frobenius contraction `e : e`.
    pub fn contract(&self) -> f64 {
        self.xx * self.xx + self.yy * self.yy + 2.0 * self.xy * self.xy
    }
}

/// Elastic density `W(e) = lambda (tr e)^2 + 2 mu e:e`. The energy carries `1/2 W`.
pub fn elastic_density(strain: &Strain, params: &MaterialParams) -> f64 {
    let tr = strain.trace();
    params.lambda * tr * tr + 2.0 * params.mu * strain.contract()
}

/// 1D analogue of [`elastic_density`]: `E |u'|^2`.
pub fn elastic_density_1d(gradient: f64, params: &MaterialParams) -> f64 {
    params.young * gradient * gradient
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadKind {
    #[default]
    Uniaxial,
    Affine,
}

impl fmt::Display for LoadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LoadKind::Uniaxial => "uniaxial",
            LoadKind::Affine => "affine",
        })
    }
}

impl FromStr for LoadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniaxial" => Ok(LoadKind::Uniaxial),
            "affine" => Ok(LoadKind::Affine),
            other => Err(Error::param("kind", format!("unknown load kind `{other}`"))),
        }
    }
}

/// Substrate displacement program `g(t, x) = t A x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadProgram {
    pub kind: LoadKind,
    /// Row-major 2x2 matrix. Ignored (treated as `[[1,0],[0,0]]`) for uniaxial loads.
    pub matrix: [[f64; 2]; 2],
    pub t_end: f64,
    pub dt: f64,
}

impl LoadProgram {
    pub const UNIAXIAL: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 0.0]];

    pub fn uniaxial(t_end: f64, dt: f64) -> Self {
        Self {
            kind: LoadKind::Uniaxial,
            matrix: Self::UNIAXIAL,
            t_end,
            dt,
        }
    }

    pub fn affine(matrix: [[f64; 2]; 2], t_end: f64, dt: f64) -> Self {
        Self {
            kind: LoadKind::Affine,
            matrix,
            t_end,
            dt,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::param("t_end", format!("must be non-negative, got {}", self.t_end)));
        }
        if self.matrix.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::param("A", "entries must be finite"));
        }
        Ok(())
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        match self.kind {
            LoadKind::Uniaxial => Self::UNIAXIAL,
            LoadKind::Affine => self.matrix,
        }
    }

    /// Unit-time displacement `A x` (the time derivative of `g`).
    pub fn rate(&self, x: [f64; 2]) -> [f64; 2] {
        let a = self.matrix();
        [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]
    }

    pub fn displacement(&self, t: f64, x: [f64; 2]) -> [f64; 2] {
        let r = self.rate(x);
        [t * r[0], t * r[1]]
    }

    /// Number of time steps `k = 1..=n` with `t_k = k dt <= t_end`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt) + 1e-9).floor() as usize
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

impl Default for LoadProgram {
    fn default() -> Self {
        Self::uniaxial(4.5, 0.1)
    }
}

/// The three integrals of the phase-field energy at a state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub elastic: f64,
    pub fracture: f64,
    pub adhesion: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(elastic: f64, fracture: f64, adhesion: f64) -> Self {
        Self {
            elastic,
            fracture,
            adhesion,
            total: elastic + fracture + adhesion,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn lame_zero_poisson_decouples() {
        for regime in [PlaneRegime::PlaneStress, PlaneRegime::PlaneStrain] {
            let (l, m) = lame_from_young_poisson(1.0, 0.0, regime).unwrap();
            assert_eq!(l, 0.0);
            assert_eq!(m, 0.5);
        }
    }

    // Inverse relations recover (E, nu) from (lambda, mu).
    fn invert(lambda: f64, mu: f64, regime: PlaneRegime) -> (f64, f64) {
        match regime {
            PlaneRegime::PlaneStrain => {
                let nu = lambda / (2.0 * (lambda + mu));
                (2.0 * mu * (1.0 + nu), nu)
            }
            PlaneRegime::PlaneStress => {
                // lambda* = 2 mu lambda3 / (lambda3 + 2 mu) with lambda3 the 3D coefficient
                let lambda3 = 2.0 * mu * lambda / (2.0 * mu - lambda);
                let nu = lambda3 / (2.0 * (lambda3 + mu));
                (2.0 * mu * (1.0 + nu), nu)
            }
        }
    }

    #[test]
    fn lame_reference_values_and_inversion() {
        let (l, m) = lame_from_young_poisson(1.0, 0.15, PlaneRegime::PlaneStress).unwrap();
        assert!((l - 0.153453).abs() < 1e-6, "{l}");
        assert!((m - 0.434783).abs() < 1e-6, "{m}");
        let (e, nu) = invert(l, m, PlaneRegime::PlaneStress);
        assert!(rel(e, 1.0) < 1e-12 && rel(nu, 0.15) < 1e-12);

        let (l, m) = lame_from_young_poisson(1.0, 0.15, PlaneRegime::PlaneStrain).unwrap();
        assert!((l - 0.186335).abs() < 1e-6, "{l}");
        assert!((m - 0.434783).abs() < 1e-6);
        let (e, nu) = invert(l, m, PlaneRegime::PlaneStrain);
        assert!(rel(e, 1.0) < 1e-12 && rel(nu, 0.15) < 1e-12);
    }

    #[test]
    fn lame_rejects_out_of_range_poisson() {
        assert!(lame_from_young_poisson(1.0, 0.5, PlaneRegime::PlaneStress).is_err());
        assert!(lame_from_young_poisson(1.0, -0.1, PlaneRegime::PlaneStrain).is_err());
        assert!(lame_from_young_poisson(0.0, 0.2, PlaneRegime::PlaneStrain).is_err());
    }

    #[test]
    fn material_rejects_bad_inputs() {
        let bad = MaterialInputs {
            adhesion: -1.0,
            ..Default::default()
        };
        match MaterialParams::new(bad) {
            Err(Error::Parameter { field, .. }) => assert_eq!(field, "beta"),
            other => panic!("unexpected {other:?}"),
        }
        let bad = MaterialInputs {
            eps: 0.0,
            ..Default::default()
        };
        assert!(MaterialParams::new(bad).is_err());
    }

    #[test]
    fn elastic_density_reference_values() {
        let p = MaterialParams::default();
        assert_eq!(elastic_density(&Strain::default(), &p), 0.0);

        let p0 = MaterialParams::new(MaterialInputs {
            poisson: 0.0,
            ..Default::default()
        })
        .unwrap();
        assert!((elastic_density(&Strain::new(1.0, 1.0, 0.0), &p0) - 2.0).abs() < 1e-15);

        let w = elastic_density(&Strain::new(1.0, 0.0, 0.0), &p);
        assert!((w - (p.lambda() + 2.0 * p.mu())).abs() < 1e-15);
        assert!((w - 1.023019).abs() < 2e-6);
    }

    #[test]
    fn uniaxial_equals_affine_with_unit_xx() {
        let a = LoadProgram::uniaxial(1.0, 0.1);
        let b = LoadProgram::affine([[1.0, 0.0], [0.0, 0.0]], 1.0, 0.1);
        for x in [[0.3, -1.2], [2.0, 5.0]] {
            assert_eq!(a.displacement(0.7, x), b.displacement(0.7, x));
        }
        assert_eq!(a.steps(), 10);
    }
}
