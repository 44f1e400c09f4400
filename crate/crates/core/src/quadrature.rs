//! Product quadratures on the sphere and on SU(2).
//!
//! Polar angles are integrated with Gauss–Legendre nodes in cos β, azimuthal
//! angles with the uniform trapezoid rule. Both are exact for the
//! trigonometric polynomials that appear in the covariant integrands once
//! the order exceeds the polynomial degree.

use crate::error::{Error, Result};
use crate::qcore::{euler_rotation, ComplexOperator, Direction};
use crate::scalar::Real;

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre<T: Real>(n: usize) -> Result<(Vec<T>, Vec<T>)> {
    if n == 0 {
        return Err(Error::InvalidParameter("quadrature order must be positive".into()));
    }
    // Newton iteration in f64, then cast.
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok((nodes.into_iter().map(T::lit).collect(), weights.into_iter().map(T::lit).collect()))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Uniform-measure grid on S², weights summing to one.
#[derive(Clone, Debug)]
pub struct SphereGrid<T: Real> {
    pub points: Vec<(Direction<T>, T)>,
}

impl<T: Real> SphereGrid<T> {
    /// `order` Gauss–Legendre nodes in cos θ times `order` azimuths.
    pub fn new(order: usize) -> Result<Self> {
        let (x, w) = gauss_legendre::<T>(order)?;
        let n_phi = T::lit(order as f64);
        let mut points = Vec::with_capacity(order * order);
        for (xi, wi) in x.iter().zip(&w) {
            let theta = xi.max(-T::one()).min(T::one()).acos();
            for j in 0..order {
                let phi = T::two_pi() * T::lit(j as f64) / n_phi;
                points.push((Direction { theta, phi }, *wi * T::lit(0.5) / n_phi));
            }
        }
        Ok(SphereGrid { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One node of a Haar quadrature on SU(2).
#[derive(Clone, Debug)]
pub struct HaarNode<T: Real> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub weight: T,
}

impl<T: Real> HaarNode<T> {
    pub fn rotation(&self) -> ComplexOperator<T> {
        euler_rotation(self.alpha, self.beta, self.gamma)
    }

    /// Direction of the rotated +z axis.
    pub fn direction(&self) -> Direction<T> {
        Direction::wrapped(self.beta, self.alpha)
    }
}

/// Euler-angle product rule for the normalised Haar measure
/// sin β dα dβ dγ / 8π² (the measure is identical on SU(2) and SO(3)).
#[derive(Clone, Debug)]
pub struct HaarGrid<T: Real> {
    pub nodes: Vec<HaarNode<T>>,
}

impl<T: Real> HaarGrid<T> {
    pub fn new(order: usize) -> Result<Self> {
        let (x, w) = gauss_legendre::<T>(order)?;
        let n = T::lit(order as f64);
        let step = T::two_pi() / n;
        let norm = T::lit(0.5) / (n * n);
        let mut nodes = Vec::with_capacity(order * order * order);
        for a in 0..order {
            let alpha = step * T::lit(a as f64);
            for (xi, wi) in x.iter().zip(&w) {
                let beta = xi.max(-T::one()).min(T::one()).acos();
                for g in 0..order {
                    let gamma = step * T::lit(g as f64);
                    nodes.push(HaarNode { alpha, beta, gamma, weight: *wi * norm });
                }
            }
        }
        Ok(HaarGrid { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
