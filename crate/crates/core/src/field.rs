//! Uniform-grid fields over plane and space-time boxes.
//!
//! `Field2` holds samples over an `nx × ny` grid, either on a torus
//! (periodic wrap) or on a rectangle (one-sided stencils at the edges).
//! `Field3` adds a time axis and is used by the potential machinery and
//! the subsolution checks; values live at cell centres.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Torus,
    Rectangle,
}

/// Plane grid. `x0`, `y0` are the coordinates of the centre of cell
/// `(0, 0)`; spacing is uniform per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2 {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub geometry: Geometry,
}

impl Grid2 {
    /// Torus `[0, 2π)²` sampled at `n × n` points `x_i = 2π i / n`.
    pub fn torus(n: usize) -> Self {
        let d = std::f64::consts::TAU / n as f64;
        Self {
            nx: n,
            ny: n,
            x0: 0.0,
            y0: 0.0,
            dx: d,
            dy: d,
            geometry: Geometry::Torus,
        }
    }

    /// Cell-centred rectangle `[xa, xb] × [ya, yb]` with `nx × ny` cells.
    pub fn rectangle(nx: usize, ny: usize, xa: f64, xb: f64, ya: f64, yb: f64) -> Self {
        let dx = (xb - xa) / nx as f64;
        let dy = (yb - ya) / ny as f64;
        Self {
            nx,
            ny,
            x0: xa + 0.5 * dx,
            y0: ya + 0.5 * dy,
            dx,
            dy,
            geometry: Geometry::Rectangle,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dy
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Samples of a `T`-valued function on a [`Grid2`]; row-major with `x`
/// fastest.
#[derive(Debug, Clone)]
pub struct Field2<T> {
    pub grid: Grid2,
    pub data: Vec<T>,
}

impl<T: Clone> Field2<T> {
    pub fn from_fn(grid: Grid2, mut f: impl FnMut(f64, f64) -> T) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                data.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self { grid, data }
    }

    pub fn constant(grid: Grid2, v: T) -> Self {
        Self {
            data: vec![v; grid.len()],
            grid,
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[j * self.grid.nx + i]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[j * self.grid.nx + i]
    }

    pub fn same_grid<U>(&self, other: &Field2<U>) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }
}

/// Space-time grid: axis order `(t, x1, x2)`, values at cell centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    pub nt: usize,
    pub nx: usize,
    pub ny: usize,
    pub t0: f64,
    pub x0: f64,
    pub y0: f64,
    pub dt: f64,
    pub dx: f64,
    pub dy: f64,
    pub geometry: Geometry,
}

impl Grid3 {
    /// Space-time torus `[0, 2π)³`.
    pub fn torus(n: usize) -> Self {
        let d = std::f64::consts::TAU / n as f64;
        Self {
            nt: n,
            nx: n,
            ny: n,
            t0: 0.0,
            x0: 0.0,
            y0: 0.0,
            dt: d,
            dx: d,
            dy: d,
            geometry: Geometry::Torus,
        }
    }

    /// Cell-centred box `[ta, tb] × [xa, xb] × [ya, yb]`.
    #[allow(clippy::too_many_arguments)]
    pub fn boxed(
        nt: usize,
        nx: usize,
        ny: usize,
        ta: f64,
        tb: f64,
        xa: f64,
        xb: f64,
        ya: f64,
        yb: f64,
    ) -> Self {
        let dt = (tb - ta) / nt as f64;
        let dx = (xb - xa) / nx as f64;
        let dy = (yb - ya) / ny as f64;
        Self {
            nt,
            nx,
            ny,
            t0: ta + 0.5 * dt,
            x0: xa + 0.5 * dx,
            y0: ya + 0.5 * dy,
            dt,
            dx,
            dy,
            geometry: Geometry::Rectangle,
        }
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dy
    }

    pub fn len(&self) -> usize {
        self.nt * self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }
}

/// Samples on a [`Grid3`]; index order `(t, x2, x1)` with `x1` fastest.
#[derive(Debug, Clone)]
pub struct Field3<T> {
    pub grid: Grid3,
    pub data: Vec<T>,
}

impl<T: Clone> Field3<T> {
    pub fn from_fn(grid: Grid3, mut f: impl FnMut(f64, f64, f64) -> T) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for k in 0..grid.nt {
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    data.push(f(grid.t(k), grid.x(i), grid.y(j)));
                }
            }
        }
        Self { grid, data }
    }

    #[inline]
    pub fn at(&self, k: usize, i: usize, j: usize) -> &T {
        &self.data[self.grid.idx(k, i, j)]
    }

    #[inline]
    pub fn at_mut(&mut self, k: usize, i: usize, j: usize) -> &mut T {
        let idx = self.grid.idx(k, i, j);
        &mut self.data[idx]
    }

    pub fn same_grid<U>(&self, other: &Field3<U>) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }
}

/// Axis selector for difference operators on [`Field3`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis3 {
    T,
    X,
    Y,
}

impl Field3<f64> {
    /// Second-order first derivative along an axis: centred in the
    /// interior, periodic wrap on tori, one-sided three-point stencils at
    /// rectangle edges.
    pub fn deriv(&self, axis: Axis3) -> Field3<f64> {
        let g = self.grid;
        let (n, h) = match axis {
            Axis3::T => (g.nt, g.dt),
            Axis3::X => (g.nx, g.dx),
            Axis3::Y => (g.ny, g.dy),
        };
        let periodic = g.geometry == Geometry::Torus;
        let mut out = Field3 {
            grid: g,
            data: vec![0.0; g.len()],
        };
        let get = |k: usize, i: usize, j: usize, off: isize| -> f64 {
            let pos = match axis {
                Axis3::T => k,
                Axis3::X => i,
                Axis3::Y => j,
            } as isize
                + off;
            let pos = if periodic {
                pos.rem_euclid(n as isize) as usize
            } else {
                pos as usize
            };
            match axis {
                Axis3::T => *self.at(pos, i, j),
                Axis3::X => *self.at(k, pos, j),
                Axis3::Y => *self.at(k, i, pos),
            }
        };
        for k in 0..g.nt {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let pos = match axis {
                        Axis3::T => k,
                        Axis3::X => i,
                        Axis3::Y => j,
                    };
                    let v = if periodic || (pos > 0 && pos + 1 < n) {
                        (get(k, i, j, 1) - get(k, i, j, -1)) / (2.0 * h)
                    } else if pos == 0 {
                        (-3.0 * get(k, i, j, 0) + 4.0 * get(k, i, j, 1) - get(k, i, j, 2))
                            / (2.0 * h)
                    } else {
                        (3.0 * get(k, i, j, 0) - 4.0 * get(k, i, j, -1) + get(k, i, j, -2))
                            / (2.0 * h)
                    };
                    *out.at_mut(k, i, j) = v;
                }
            }
        }
        out
    }

    /// Compact spatial Laplacian (three-point second differences in `x1`
    /// and `x2`); one-sided four-point stencils at rectangle edges.
    pub fn laplacian_xy(&self) -> Field3<f64> {
        let g = self.grid;
        let periodic = g.geometry == Geometry::Torus;
        let mut out = Field3 {
            grid: g,
            data: vec![0.0; g.len()],
        };
        let second = |vals: [f64; 4], edge: bool, h: f64| -> f64 {
            if edge {
                // one-sided: 2 f0 - 5 f1 + 4 f2 - f3
                (2.0 * vals[0] - 5.0 * vals[1] + 4.0 * vals[2] - vals[3]) / (h * h)
            } else {
                (vals[0] - 2.0 * vals[1] + vals[2]) / (h * h)
            }
        };
        for k in 0..g.nt {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let xv = if periodic {
                        let l = (i + g.nx - 1) % g.nx;
                        let r = (i + 1) % g.nx;
                        second([*self.at(k, l, j), *self.at(k, i, j), *self.at(k, r, j), 0.0], false, g.dx)
                    } else if i == 0 {
                        second(
                            [*self.at(k, 0, j), *self.at(k, 1, j), *self.at(k, 2, j), *self.at(k, 3, j)],
                            true,
                            g.dx,
                        )
                    } else if i + 1 == g.nx {
                        second(
                            [
                                *self.at(k, g.nx - 1, j),
                                *self.at(k, g.nx - 2, j),
                                *self.at(k, g.nx - 3, j),
                                *self.at(k, g.nx - 4, j),
                            ],
                            true,
                            g.dx,
                        )
                    } else {
                        second(
                            [*self.at(k, i - 1, j), *self.at(k, i, j), *self.at(k, i + 1, j), 0.0],
                            false,
                            g.dx,
                        )
                    };
                    let yv = if periodic {
                        let d = (j + g.ny - 1) % g.ny;
                        let u = (j + 1) % g.ny;
                        second([*self.at(k, i, d), *self.at(k, i, j), *self.at(k, i, u), 0.0], false, g.dy)
                    } else if j == 0 {
                        second(
                            [*self.at(k, i, 0), *self.at(k, i, 1), *self.at(k, i, 2), *self.at(k, i, 3)],
                            true,
                            g.dy,
                        )
                    } else if j + 1 == g.ny {
                        second(
                            [
                                *self.at(k, i, g.ny - 1),
                                *self.at(k, i, g.ny - 2),
                                *self.at(k, i, g.ny - 3),
                                *self.at(k, i, g.ny - 4),
                            ],
                            true,
                            g.dy,
                        )
                    } else {
                        second(
                            [*self.at(k, i, j - 1), *self.at(k, i, j), *self.at(k, i, j + 1), 0.0],
                            false,
                            g.dy,
                        )
                    };
                    *out.at_mut(k, i, j) = xv + yv;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centred_derivative_exact_on_quadratics() {
        let g = Grid3::boxed(4, 8, 8, 0.0, 1.0, -1.0, 1.0, -1.0, 1.0);
        let f = Field3::from_fn(g, |_t, x, _y| x * x);
        let d = f.deriv(Axis3::X);
        for k in 0..g.nt {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    assert!((d.at(k, i, j) - 2.0 * g.x(i)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn laplacian_of_quadratic() {
        let g = Grid3::boxed(2, 12, 12, 0.0, 1.0, -1.0, 1.0, -1.0, 1.0);
        let f = Field3::from_fn(g, |_t, x, y| x * x + 3.0 * y * y);
        let l = f.laplacian_xy();
        for v in &l.data {
            assert!((v - 8.0).abs() < 1e-10);
        }
    }

    #[test]
    fn periodic_wrap() {
        let g = Grid3::torus(16);
        let f = Field3::from_fn(g, |_t, x, _y| x.sin());
        let d = f.deriv(Axis3::X);
        // Centred difference of sin: cos(x) * sin(h)/h.
        let factor = g.dx.sin() / g.dx;
        for k in 0..g.nt {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    assert!((d.at(k, i, j) - g.x(i).cos() * factor).abs() < 1e-12);
                }
            }
        }
    }
}
