//! Thin insulating layer around the disk, solved in closed form.
//!
//! The disk of radius `R` (conductivity 1) is wrapped in an annulus of
//! thickness `εh` and conductivity `ε`, with Robin weight `β` on the outer
//! circle. The eigenfunction is `J₀(kr)` inside and `A + B ln r` in the layer;
//! continuity, flux matching `u'(R⁻) = ε u'(R⁺)` and `ε u' + βu = 0` at
//! `R₂ = R + εh` eliminate `A`, `B` and leave
//!
//! ```text
//! k J₁(kR) (R/R₂) (1 + (βR₂/ε) ln(R₂/R)) = β J₀(kR).
//! ```
//!
//! As `ε → 0` this tends to `k J₁(kR)(1 + βh) = β J₀(kR)`: the Robin problem
//! with weight `β/(1+βh)`.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectra::{bessel_j, bisect, disk_robin_oracle, j0_first_zero, DispersionRoot, Relation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSpec<T> {
    pub eps: T,
    pub h_const: T,
    pub beta: T,
    pub radius: T,
}

impl<T: Real> LayerSpec<T> {
    pub fn new(eps: T, h_const: T, beta: T, radius: T) -> Result<Self> {
        let spec = Self { eps, h_const, beta, radius };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps", self.eps), ("h", self.h_const), ("beta", self.beta), ("radius", self.radius)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.eps * self.h_const < self.radius) {
            return Err(Error::InvalidArgument(format!(
                "layer thickness {} is not below the radius {}",
                self.eps * self.h_const,
                self.radius
            )));
        }
        Ok(())
    }

    pub fn outer_radius(&self) -> T {
        self.radius + self.eps * self.h_const
    }

    /// `(left, right)` of the layered dispersion relation at `k`.
    pub fn dispersion_terms(&self, k: T) -> Result<(T, T)> {
        let (r, r2) = (self.radius, self.outer_radius());
        let log_ratio = (self.eps * self.h_const / r).ln_1p();
        let factor = (r / r2) * (T::one() + self.beta * r2 / self.eps * log_ratio);
        Ok((k * bessel_j(1, k * r)? * factor, self.beta * bessel_j(0, k * r)?))
    }
}

/// `(left, right)` of `k J₁(kR)(1 + βh) = β J₀(kR)`.
pub fn limit_dispersion_terms<T: Real>(k: T, beta: T, h: T, radius: T) -> Result<(T, T)> {
    Ok((k * bessel_j(1, k * radius)? * (T::one() + beta * h), beta * bessel_j(0, k * radius)?))
}

/// `(left, right)` of the Robin relation `k J₁(kR) = β J₀(kR)`.
pub fn robin_dispersion_terms<T: Real>(k: T, beta: T, radius: T) -> Result<(T, T)> {
    Ok((k * bessel_j(1, k * radius)?, beta * bessel_j(0, k * radius)?))
}

/// `|left − right| / (|left| + |right|)`.
pub fn relative_residual<T: Real>((l, r): (T, T)) -> T {
    let scale = l.abs() + r.abs();
    if scale == T::zero() { T::zero() } else { (l - r).abs() / scale }
}

fn smallest_root<T: Real>(terms: impl Fn(T) -> Result<(T, T)>, radius: T, relation: Relation) -> Result<DispersionRoot<T>> {
    let top = j0_first_zero::<T>()? / radius;
    let k = bisect(|k| terms(k).map(|(l, r)| l - r), T::zero(), top, T::epsilon() * top)?;
    let residual = relative_residual(terms(k)?);
    Ok(DispersionRoot { k, lambda: k * k, relation, residual })
}

/// First eigenvalue of the layered disk.
pub fn radial_layer_eigenvalue<T: Real>(spec: &LayerSpec<T>) -> Result<DispersionRoot<T>> {
    spec.validate()?;
    smallest_root(|k| spec.dispersion_terms(k), spec.radius, Relation::Layered)
}

/// The `ε → 0` relation solved directly.
pub fn limit_eigenvalue<T: Real>(beta: T, h: T, radius: T) -> Result<DispersionRoot<T>> {
    for (name, v) in [("h", h), ("beta", beta), ("radius", radius)] {
        if !(v >= T::zero()) || !v.is_finite() || (name != "h" && v == T::zero()) {
            return Err(Error::InvalidArgument(format!("{name} is out of range: {v}")));
        }
    }
    smallest_root(|k| limit_dispersion_terms(k, beta, h, radius), radius, Relation::Robin)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRow<T> {
    pub eps: T,
    pub lambda: T,
    /// `|λ_ε − λ(h)|`.
    pub gap: T,
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaReport<T> {
    /// `λ(h)`: Robin eigenvalue with weight `β/(1+βh)`.
    pub limit: T,
    pub rows: Vec<GammaRow<T>>,
}

impl<T: Real> GammaReport<T> {
    /// `gap(ε_i) / gap(ε_{i+1})` for consecutive rows.
    pub fn ratios(&self) -> Vec<T> {
        self.rows.windows(2).map(|w| w[0].gap / w[1].gap).collect()
    }

    pub fn gaps_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].gap < w[0].gap)
    }
}

/// Layered eigenvalues along `eps_list` against the limit `λ(h)`.
pub fn gamma_limit_report<T: Real>(beta: T, h_const: T, radius: T, eps_list: &[T]) -> Result<GammaReport<T>> {
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("empty eps list".into()));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("eps list must be strictly decreasing".into()));
    }
    let limit = disk_robin_oracle(beta / (T::one() + beta * h_const), radius)?.lambda;
    let rows = eps_list
        .iter()
        .map(|&eps| {
            let root = radial_layer_eigenvalue(&LayerSpec::new(eps, h_const, beta, radius)?)?;
            Ok(GammaRow { eps, lambda: root.lambda, gap: (root.lambda - limit).abs(), residual: root.residual })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GammaReport { limit, rows })
}
