use serde::{Deserialize, Serialize};

/// A probability law on `[0, 1)` made of one atom plus a continuous part stored as
/// the masses of uniform cells on `(lower, upper)`.
///
/// Transition kernels, the stationary law and conditional forecasts all share this
/// shape: the atom sits at zero for "no outbreak" and at `z(R_e)` for the stationary
/// forecast given `R_e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedDensity1D {
    pub atom_location: f64,
    pub atom: f64,
    pub lower: f64,
    pub upper: f64,
    pub cell_mass: Vec<f64>,
}

impl MixedDensity1D {
    pub fn point_mass(location: f64) -> Self {
        MixedDensity1D {
            atom_location: location,
            atom: 1.0,
            lower: location,
            upper: location,
            cell_mass: Vec::new(),
        }
    }

    /// Mass at zero, the "no outbreak" probability when the atom sits at the origin.
    pub fn atom_at_zero(&self) -> f64 {
        if self.atom_location == 0.0 {
            self.atom
        } else {
            0.0
        }
    }

    pub fn cells(&self) -> usize {
        self.cell_mass.len()
    }

    pub fn cell_width(&self) -> f64 {
        if self.cell_mass.is_empty() {
            0.0
        } else {
            (self.upper - self.lower) / self.cell_mass.len() as f64
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        let h = self.cell_width();
        (0..self.cells()).map(|i| self.lower + (i as f64 + 0.5) * h).collect()
    }

    /// Cell-average density values.
    pub fn density_values(&self) -> Vec<f64> {
        let h = self.cell_width();
        self.cell_mass.iter().map(|m| m / h).collect()
    }

    /// Continuous density at `x`, interpolated linearly between cell centers and held
    /// constant in the outer half cells.
    pub fn density_at(&self, x: f64) -> f64 {
        let n = self.cells();
        if n == 0 || x < self.lower || x > self.upper {
            return 0.0;
        }
        let h = self.cell_width();
        let pos = (x - self.lower) / h - 0.5;
        if pos <= 0.0 {
            return self.cell_mass[0] / h;
        }
        let i = pos.floor() as usize;
        if i + 1 >= n {
            return self.cell_mass[n - 1] / h;
        }
        let t = pos - i as f64;
        ((1.0 - t) * self.cell_mass[i] + t * self.cell_mass[i + 1]) / h
    }

    pub fn continuous_mass(&self) -> f64 {
        self.cell_mass.iter().fold(0.0, |a, m| a + m)
    }

    pub fn total_mass(&self) -> f64 {
        self.atom + self.continuous_mass()
    }

    pub fn mean(&self) -> f64 {
        let c: f64 = self.centers().iter().zip(&self.cell_mass).map(|(x, m)| x * m).sum();
        (self.atom * self.atom_location + c) / self.total_mass()
    }

    /// Variance, treating each cell as uniform.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let h = self.cell_width();
        let c: f64 = self
            .centers()
            .iter()
            .zip(&self.cell_mass)
            .map(|(x, m)| m * ((x - mean).powi(2) + h * h / 12.0))
            .sum();
        (self.atom * (self.atom_location - mean).powi(2) + c) / self.total_mass()
    }

    /// Cumulative probability `P(X <= x)`, cells treated as uniform.
    pub fn cdf(&self, x: f64) -> f64 {
        let mut acc = if x >= self.atom_location { self.atom } else { 0.0 };
        let h = self.cell_width();
        for (i, m) in self.cell_mass.iter().enumerate() {
            let a = self.lower + i as f64 * h;
            if x >= a + h {
                acc += m;
            } else if x > a {
                acc += m * (x - a) / h;
            }
        }
        acc / self.total_mass()
    }

    /// Smallest `x` with `P(X <= x) >= q`, interpolating inside cells.
    pub fn quantile(&self, q: f64) -> f64 {
        let total = self.total_mass();
        let target = q.clamp(0.0, 1.0) * total;
        let h = self.cell_width();
        let mut acc = 0.0;
        let mut atom_pending = self.atom > 0.0;
        for (i, &m) in self.cell_mass.iter().enumerate() {
            let a = self.lower + i as f64 * h;
            if atom_pending && self.atom_location <= a {
                acc += self.atom;
                atom_pending = false;
                if acc >= target {
                    return self.atom_location;
                }
            }
            if acc + m >= target && m > 0.0 {
                return a + h * ((target - acc) / m).clamp(0.0, 1.0);
            }
            acc += m;
        }
        if atom_pending {
            return self.atom_location;
        }
        self.upper
    }
}
