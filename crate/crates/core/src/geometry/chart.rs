//! Discretized collar charts.
//!
//! The normal direction is sampled uniformly in the log coordinate
//! `s = -ln x`, so the 0-derivative `x d/dx = -d/ds` is an ordinary uniform
//! stencil. The first tangential coordinate `y` is periodic on `[0, 2pi)`.

use std::f64::consts::TAU;

use crate::error::{FlowError, Result};

/// Topology of the boundary at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Flat torus at infinity; the hyperbolic model is `(dx^2 + |dy|^2) / x^2`.
    Torus,
    /// Round sphere at infinity; the hyperbolic model is the ball in normal form
    /// `(dx^2 + (1 - x^2/4)^2 g_round) / x^2`.
    Ball,
}

/// Symmetry ansatz for the fields carried on the chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Anisotropy {
    /// Fields depend on `x` only.
    Isotropic,
    /// Fields depend on `x` and the first tangential coordinate.
    OneTangential,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Torus => "torus",
            Mode::Ball => "ball",
        }
    }
}

impl Anisotropy {
    pub fn name(self) -> &'static str {
        match self {
            Anisotropy::Isotropic => "isotropic",
            Anisotropy::OneTangential => "one_tangential",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollarChart {
    pub mode: Mode,
    /// Boundary dimension; the manifold has dimension `n + 1`.
    pub n: usize,
    /// Log coordinate at the inner end (`x_max = e^{-s0}`).
    pub s0: f64,
    /// Log coordinate at the outer end (`x_min = e^{-s1}`).
    pub s1: f64,
    pub nx: usize,
    pub ny: usize,
    pub anisotropy: Anisotropy,
}

impl CollarChart {
    pub fn new(
        mode: Mode,
        n: usize,
        x_min: f64,
        x_max: f64,
        nx: usize,
        ny: usize,
        anisotropy: Anisotropy,
    ) -> Result<Self> {
        if !(x_min > 0.0) || !(x_max > 0.0) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(FlowError::config(format!(
                "collar endpoints must be positive and finite (x_min={x_min}, x_max={x_max})"
            )));
        }
        let chart = CollarChart {
            mode,
            n,
            s0: -x_max.ln(),
            s1: -x_min.ln(),
            nx,
            ny,
            anisotropy,
        };
        chart.validate()?;
        Ok(chart)
    }

    pub fn from_log_range(
        mode: Mode,
        n: usize,
        s0: f64,
        s1: f64,
        nx: usize,
        ny: usize,
        anisotropy: Anisotropy,
    ) -> Result<Self> {
        let chart = CollarChart {
            mode,
            n,
            s0,
            s1,
            nx,
            ny,
            anisotropy,
        };
        chart.validate()?;
        Ok(chart)
    }

    /// Standard isotropic torus chart used throughout the tests.
    pub fn torus(n: usize, x_min: f64, x_max: f64, nx: usize) -> Result<Self> {
        Self::new(Mode::Torus, n, x_min, x_max, nx, 1, Anisotropy::Isotropic)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(FlowError::config(format!(
                "boundary dimension n must be >= 2 (got {})",
                self.n
            )));
        }
        if self.n > 7 {
            return Err(FlowError::config(format!(
                "boundary dimension n must be <= 7 (got {})",
                self.n
            )));
        }
        if !self.s0.is_finite() || !self.s1.is_finite() || !(self.s0 < self.s1) {
            return Err(FlowError::config(format!(
                "need x_min < x_max (s0={}, s1={})",
                self.s0, self.s1
            )));
        }
        let x_max = self.x_max();
        if !(x_max < 2.0) {
            return Err(FlowError::config(format!(
                "x_max must be < 2 (got {x_max})"
            )));
        }
        if self.nx < 8 {
            return Err(FlowError::config(format!("Nx must be >= 8 (got {})", self.nx)));
        }
        if self.ny < 1 {
            return Err(FlowError::config("Ny must be >= 1"));
        }
        match self.anisotropy {
            Anisotropy::Isotropic if self.ny != 1 => {
                return Err(FlowError::config(format!(
                    "isotropic fields are y-independent; Ny must be 1 (got {})",
                    self.ny
                )))
            }
            Anisotropy::OneTangential if self.ny < 8 => {
                return Err(FlowError::config(format!(
                    "one_tangential requires Ny >= 8 (got {})",
                    self.ny
                )))
            }
            _ => {}
        }
        if self.mode == Mode::Ball && self.anisotropy != Anisotropy::Isotropic {
            return Err(FlowError::config(
                "ball mode supports the isotropic ansatz only",
            ));
        }
        Ok(())
    }

    /// Manifold dimension `n + 1`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    #[inline]
    pub fn ds(&self) -> f64 {
        (self.s1 - self.s0) / (self.nx - 1) as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        TAU / self.ny as f64
    }

    #[inline]
    pub fn s(&self, ix: usize) -> f64 {
        self.s0 + ix as f64 * self.ds()
    }

    #[inline]
    pub fn x(&self, ix: usize) -> f64 {
        (-self.s(ix)).exp()
    }

    #[inline]
    pub fn y(&self, iy: usize) -> f64 {
        iy as f64 * self.dy()
    }

    pub fn x_min(&self) -> f64 {
        (-self.s1).exp()
    }

    pub fn x_max(&self) -> f64 {
        (-self.s0).exp()
    }

    #[inline]
    pub fn nodes(&self) -> usize {
        self.nx * self.ny
    }

    /// Node index; node-major with `y` fastest.
    #[inline]
    pub fn node(&self, ix: usize, iy: usize) -> usize {
        ix * self.ny + iy
    }

    #[inline]
    pub fn node_coords(&self, node: usize) -> (usize, usize) {
        (node / self.ny, node % self.ny)
    }

    /// Number of independent tensor components under the ansatz.
    #[inline]
    pub fn ncomp(&self) -> usize {
        match self.anisotropy {
            Anisotropy::Isotropic => 2,
            Anisotropy::OneTangential => 4,
        }
    }

    /// Same collar with `s` and `y` spacing halved.
    pub fn refined(&self) -> Self {
        CollarChart {
            nx: 2 * (self.nx - 1) + 1,
            ny: if self.ny > 1 { 2 * self.ny } else { 1 },
            ..*self
        }
    }

    pub fn with_nx(&self, nx: usize) -> Result<Self> {
        let c = CollarChart { nx, ..*self };
        c.validate()?;
        Ok(c)
    }
}
