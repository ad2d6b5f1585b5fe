//! Real spherical harmonics and per-degree energy decomposition of functions
//! sampled on the equiangular sphere grid.
//!
//! Quadrature on the grid uses Fejér's first rule in `cos(theta)` (exact for
//! polynomials of degree below `2B`), times a uniform rule in `phi`. All
//! products `Y_l^m Y_l'^m'` with `l, l' < B` are integrated exactly.

use std::f64::consts::PI;

use thiserror::Error;

use crate::sampling::{AngularGrid, SphereSampleGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmonicsError {
    #[error("argument {0} outside [-1, 1]")]
    DomainError(f64),
    #[error("order {m} invalid for degree {l}")]
    InvalidOrder { l: usize, m: i64 },
    #[error("bandwidth {bandwidth} too low for max degree {degree} (need B >= L + 1)")]
    BandwidthTooLow { bandwidth: usize, degree: usize },
}

/// Associated Legendre function `P_l^m(x)` including the Condon–Shortley
/// phase `(-1)^m`, by upward recurrence in `l`.
pub fn assoc_legendre(l: usize, m: usize, x: f64) -> Result<f64, HarmonicsError> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(HarmonicsError::DomainError(x));
    }
    if m > l {
        return Err(HarmonicsError::InvalidOrder { l, m: m as i64 });
    }
    // P_m^m = (-1)^m (2m-1)!! (1-x^2)^{m/2}
    let somx2 = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= -fact * somx2;
        fact += 2.0;
    }
    if l == m {
        return Ok(pmm);
    }
    let mut pmmp1 = x * (2 * m + 1) as f64 * pmm;
    for ll in (m + 2)..=l {
        let pll = ((2 * ll - 1) as f64 * x * pmmp1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pmmp1;
        pmmp1 = pll;
    }
    Ok(pmmp1)
}

/// `N(l, m) = sqrt((2l+1)/(4 pi) * (l-m)!/(l+m)!)`.
pub fn sh_normalization(l: usize, m: usize) -> f64 {
    let ratio: f64 = ((l - m + 1)..=(l + m)).map(|k| 1.0 / k as f64).product();
    ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt()
}

/// Orthonormal real spherical harmonic `Y_l^m(theta, phi)`, cosine for
/// `m > 0` and sine for `m < 0`.
pub fn real_sh(l: usize, m: i64, theta: f64, phi: f64) -> Result<f64, HarmonicsError> {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return Err(HarmonicsError::InvalidOrder { l, m });
    }
    let p = assoc_legendre(l, am, theta.cos().clamp(-1.0, 1.0))?;
    let n = sh_normalization(l, am);
    Ok(match m {
        0 => n * p,
        m if m > 0 => 2f64.sqrt() * n * p * (am as f64 * phi).cos(),
        _ => 2f64.sqrt() * n * p * (am as f64 * phi).sin(),
    })
}

/// Flat index of `(l, m)` in coefficient vectors: `l^2 + l + m`.
pub fn coeff_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Index into normalized-Legendre rows, `m >= 0` only.
fn plm_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// `N(l,m) P_l^m(x)` for all `0 <= m <= l <= degree`, via the standard
/// three-term recurrence on normalized functions (no factorials).
pub fn normalized_legendre_row(degree: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; (degree + 1) * (degree + 2) / 2];
    let somx2 = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=degree {
        if m > 0 {
            pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * somx2;
        }
        out[plm_index(m, m)] = pmm;
        if m == degree {
            break;
        }
        let mut prev = pmm;
        let mut cur = x * ((2 * m + 3) as f64).sqrt() * pmm;
        out[plm_index(m + 1, m)] = cur;
        for l in (m + 2)..=degree {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            let next = a * (x * cur - b * prev);
            prev = cur;
            cur = next;
            out[plm_index(l, m)] = cur;
        }
    }
    out
}

/// Fejér first-rule weights for `∫_{-1}^{1} f(x) dx` at the nodes
/// `x_i = cos((i + 1/2) pi / side)`.
pub fn fejer_weights(side: usize) -> Vec<f64> {
    (0..side)
        .map(|i| {
            let theta = (i as f64 + 0.5) * PI / side as f64;
            let s: f64 = (1..=side / 2)
                .map(|k| (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0))
                .sum();
            2.0 / side as f64 * (1.0 - 2.0 * s)
        })
        .collect()
}

/// Precomputed tables for analysis at bandwidth `B` up to degree `L`.
/// Shareable read-only across threads.
#[derive(Debug, Clone)]
pub struct SphereBasis {
    bandwidth: usize,
    degree: usize,
    /// theta quadrature weight times the phi step, per row `i`.
    row_weights: Vec<f64>,
    /// normalized Legendre values per row `i`, indexed by `plm_index`.
    legendre: Vec<Vec<f64>>,
    /// `cos(m phi_j)` and `sin(m phi_j)`, `j`-major with stride `L + 1`.
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
}

impl SphereBasis {
    pub fn new(bandwidth: usize, degree: usize) -> Result<Self, HarmonicsError> {
        if bandwidth < degree + 1 {
            return Err(HarmonicsError::BandwidthTooLow { bandwidth, degree });
        }
        let grid = AngularGrid::new(bandwidth).expect("bandwidth > 0");
        let side = grid.side();
        let dphi = 2.0 * PI / side as f64;
        let row_weights = fejer_weights(side).into_iter().map(|w| w * dphi).collect();
        let legendre = (0..side)
            .map(|i| normalized_legendre_row(degree, grid.theta(i).cos()))
            .collect();
        let mut cos_table = Vec::with_capacity(side * (degree + 1));
        let mut sin_table = Vec::with_capacity(side * (degree + 1));
        for j in 0..side {
            let phi = grid.phi(j);
            for m in 0..=degree {
                let (s, c) = (m as f64 * phi).sin_cos();
                cos_table.push(c);
                sin_table.push(s);
            }
        }
        Ok(SphereBasis { bandwidth, degree, row_weights, legendre, cos_table, sin_table })
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Quadrature weight of grid node `(i, j)`; identical across `j`.
    pub fn weight(&self, i: usize) -> f64 {
        self.row_weights[i]
    }

    /// Real SH coefficients `a_{l,m}` of a theta-major `2B x 2B` sample
    /// array, indexed by [`coeff_index`].
    pub fn coefficients(&self, values: &[f64]) -> Vec<f64> {
        let side = 2 * self.bandwidth;
        let stride = self.degree + 1;
        assert_eq!(values.len(), side * side, "sample grid does not match basis");
        let mut coeffs = vec![0.0; stride * stride];
        let mut fc = vec![0.0; stride];
        let mut fs = vec![0.0; stride];
        for i in 0..side {
            fc.iter_mut().for_each(|v| *v = 0.0);
            fs.iter_mut().for_each(|v| *v = 0.0);
            let row = &values[i * side..(i + 1) * side];
            for (j, &f) in row.iter().enumerate() {
                if f == 0.0 {
                    continue;
                }
                let c = &self.cos_table[j * stride..(j + 1) * stride];
                let s = &self.sin_table[j * stride..(j + 1) * stride];
                for m in 0..stride {
                    fc[m] += f * c[m];
                    fs[m] += f * s[m];
                }
            }
            let w = self.row_weights[i];
            let plm = &self.legendre[i];
            for l in 0..=self.degree {
                coeffs[coeff_index(l, 0)] += w * plm[plm_index(l, 0)] * fc[0];
                for m in 1..=l {
                    let p = w * std::f64::consts::SQRT_2 * plm[plm_index(l, m)];
                    coeffs[coeff_index(l, m as i64)] += p * fc[m];
                    coeffs[coeff_index(l, -(m as i64))] += p * fs[m];
                }
            }
        }
        coeffs
    }

    /// Per-degree energies `e_l = sqrt(sum_m a_{l,m}^2)` for `l = 0..=L`.
    pub fn energies(&self, values: &[f64]) -> Vec<f64> {
        energies_from_coefficients(&self.coefficients(values), self.degree)
    }
}

pub fn energies_from_coefficients(coeffs: &[f64], degree: usize) -> Vec<f64> {
    (0..=degree)
        .map(|l| {
            let lo = l * l;
            coeffs[lo..lo + 2 * l + 1].iter().map(|a| a * a).sum::<f64>().sqrt()
        })
        .collect()
}

/// Energy vector `e_0..=e_L` of one sphere's samples.
pub fn decompose_sphere(samples: &SphereSampleGrid, degree: usize) -> Result<Vec<f64>, HarmonicsError> {
    let basis = SphereBasis::new(samples.bandwidth, degree)?;
    Ok(basis.energies(&samples.values))
}
