//! Staggered (MAC) grid with an optional immersed circular obstacle.
//!
//! Layout for an `nx × ny` channel on `[0, lx] × [0, ly]`:
//! - `u` on vertical faces: `(nx + 1) × ny`, at `x = i·dx`, `y = (j + ½)·dy`
//! - `v` on horizontal faces: `nx × (ny + 1)`, at `x = (i + ½)·dx`, `y = j·dy`
//! - `p` at cell centres: `nx × ny`
//!
//! Arrays are stored x-major: `index = i·ny_faces + j`.
//!
//! Channel boundaries: Dirichlet inflow on `x = 0`, no-slip walls on `y = 0`
//! and `y = ly`, zero-gradient velocity with `p = 0` on the outlet `x = lx`.
//! A periodic layout (both directions) exists for operator tests.
//!
//! Cells whose centre lies inside the obstacle are solid. Faces touching a
//! solid cell are held at zero velocity. When a stencil of a free face reaches
//! such a face, the value there is replaced by a ghost value that makes the
//! linear interpolation between the free face and the ghost vanish where the
//! stencil line crosses the circle.

use crate::error::GridError;

/// Smallest wall fraction used by the ghost interpolation. Keeps ghost
/// coefficients bounded when a face sits almost on the circle.
pub const THETA_MIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundaries {
    Channel,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: (f64, f64),
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        dx * dx + dy * dy < self.radius * self.radius
    }

    /// Fraction `s ∈ [0, 1]` along `from → to` where the segment first meets
    /// the circle, if it does.
    pub fn crossing(&self, from: (f64, f64), to: (f64, f64)) -> Option<f64> {
        let d = (to.0 - from.0, to.1 - from.1);
        let f = (from.0 - self.center.0, from.1 - self.center.1);
        let a = d.0 * d.0 + d.1 * d.1;
        let b = 2.0 * (d.0 * f.0 + d.1 * f.1);
        let c = f.0 * f.0 + f.1 * f.1 - self.radius * self.radius;
        let disc = b * b - 4.0 * a * c;
        if a == 0.0 || disc < 0.0 {
            return None;
        }
        let s = (-b - disc.sqrt()) / (2.0 * a);
        (0.0..=1.0).contains(&s).then_some(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    /// Unknown of the momentum equations.
    Free,
    /// Dirichlet inflow face.
    Inflow,
    /// Zero-velocity face: channel wall or touching the obstacle.
    Wall,
}

/// Value of a boundary datum, resolved against an inflow profile at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryValue {
    Zero,
    /// `weight · u_in(t, y)`.
    Inflow { y: f64, weight: f64 },
}

/// A stencil neighbour of a free face: either another face of the same
/// component (free) or a value that is affine in the face itself,
/// `self_coef · value_self + boundary value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Link {
    Face(usize),
    Fixed { self_coef: f64, value: BoundaryValue },
    /// Ghost across the immersed wall, `self_coef · value_self`, so that the
    /// linear interpolation vanishes on the circle. Advection sees the wall
    /// value zero instead, which keeps the advective flux energy-neutral.
    Immersed { self_coef: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    U,
    V,
}

/// Ghost constraint towards the obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImmersedLink {
    pub row: usize,
    /// Index into [`Stencil::links`] (`0 = east, 1 = west, 2 = north, 3 = south`).
    pub direction: usize,
    /// Fraction of the stencil spacing from the free face to the wall.
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    /// East, west, north, south.
    pub links: [Link; 4],
    /// Faces of the other component averaged to get the transverse
    /// advecting velocity at this face.
    pub transverse: [usize; 4],
    /// Stored faces of the same component in the positive and negative
    /// direction normal to the face, when they exist.
    pub along: [Option<usize>; 2],
    /// Cells on the negative and positive side of the face. `None` on the
    /// positive side marks the outlet, where pressure is held at zero.
    pub cells: (usize, Option<usize>),
}

#[derive(Debug, Clone)]
pub struct FaceSet {
    pub nx: usize,
    pub ny: usize,
    pub kind: Vec<FaceKind>,
    row_of: Vec<Option<usize>>,
    free: Vec<usize>,
    stencils: Vec<Stencil>,
    pub immersed: Vec<ImmersedLink>,
}

impl FaceSet {
    pub fn len(&self) -> usize {
        self.kind.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kind.is_empty()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn coords(&self, f: usize) -> (usize, usize) {
        (f / self.ny, f % self.ny)
    }

    /// Free faces, in row order.
    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn row_of(&self, f: usize) -> Option<usize> {
        self.row_of[f]
    }

    pub fn stencil(&self, row: usize) -> &Stencil {
        &self.stencils[row]
    }
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub lx: f64,
    pub ly: f64,
    pub boundaries: Boundaries,
    pub obstacle: Option<Circle>,
    solid: Vec<bool>,
    u: FaceSet,
    v: FaceSet,
}

impl Grid {
    pub fn channel(
        nx: usize,
        ny: usize,
        lx: f64,
        ly: f64,
        obstacle: Option<Circle>,
    ) -> Result<Self, GridError> {
        if nx < 3 || ny < 3 {
            return Err(GridError::TooSmall { nx, ny });
        }
        if !(lx > 0.0 && ly > 0.0) {
            return Err(GridError::Extent { lx, ly });
        }
        if let Some(c) = obstacle {
            let (x, y) = c.center;
            if !(c.radius > 0.0
                && x - c.radius > 0.0
                && x + c.radius < lx
                && y - c.radius > 0.0
                && y + c.radius < ly)
            {
                return Err(GridError::Obstacle);
            }
        }
        let dx = lx / nx as f64;
        let dy = ly / ny as f64;
        let mut grid = Self {
            nx,
            ny,
            dx,
            dy,
            lx,
            ly,
            boundaries: Boundaries::Channel,
            obstacle,
            solid: vec![false; nx * ny],
            u: empty_faces(nx + 1, ny),
            v: empty_faces(nx, ny + 1),
        };
        for i in 0..nx {
            for j in 0..ny {
                let (x, y) = grid.cell_center(i, j);
                grid.solid[i * ny + j] = obstacle.is_some_and(|c| c.contains(x, y));
            }
        }
        grid.u = grid.classify(Component::U);
        grid.v = grid.classify(Component::V);
        if grid.u.n_free() == 0 || grid.v.n_free() == 0 {
            return Err(GridError::NoFluid);
        }
        Ok(grid)
    }

    /// Doubly periodic grid without obstacle, used to test operators.
    pub fn periodic(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self, GridError> {
        if nx < 3 || ny < 3 {
            return Err(GridError::TooSmall { nx, ny });
        }
        if !(lx > 0.0 && ly > 0.0) {
            return Err(GridError::Extent { lx, ly });
        }
        let mut grid = Self {
            nx,
            ny,
            dx: lx / nx as f64,
            dy: ly / ny as f64,
            lx,
            ly,
            boundaries: Boundaries::Periodic,
            obstacle: None,
            solid: vec![false; nx * ny],
            u: empty_faces(nx, ny),
            v: empty_faces(nx, ny),
        };
        grid.u = grid.periodic_faces(Component::U);
        grid.v = grid.periodic_faces(Component::V);
        Ok(grid)
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn is_solid(&self, cell: usize) -> bool {
        self.solid[cell]
    }

    pub fn n_fluid_cells(&self) -> usize {
        self.solid.iter().filter(|s| !**s).count()
    }

    /// Free velocity faces plus fluid pressure cells.
    pub fn fluid_unknowns(&self) -> usize {
        self.u.n_free() + self.v.n_free() + self.n_fluid_cells()
    }

    pub fn faces(&self, c: Component) -> &FaceSet {
        match c {
            Component::U => &self.u,
            Component::V => &self.v,
        }
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dy)
    }

    pub fn face_position(&self, c: Component, i: usize, j: usize) -> (f64, f64) {
        match c {
            Component::U => (i as f64 * self.dx, (j as f64 + 0.5) * self.dy),
            Component::V => ((i as f64 + 0.5) * self.dx, j as f64 * self.dy),
        }
    }

    /// Faces bounding cell `(i, j)`: `[u east, u west, v north, v south]`.
    pub fn cell_faces(&self, i: usize, j: usize) -> [usize; 4] {
        let (ie, jn) = match self.boundaries {
            Boundaries::Channel => (i + 1, j + 1),
            Boundaries::Periodic => ((i + 1) % self.nx, (j + 1) % self.ny),
        };
        [
            self.u.index(ie, j),
            self.u.index(i, j),
            self.v.index(i, jn),
            self.v.index(i, j),
        ]
    }

    /// Same-shape check used before combining fields.
    pub fn same_layout(&self, other: &Grid) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.boundaries == other.boundaries
            && self.dx == other.dx
            && self.dy == other.dy
            && self.obstacle == other.obstacle
    }

    fn classify(&self, c: Component) -> FaceSet {
        let (fx, fy) = match c {
            Component::U => (self.nx + 1, self.ny),
            Component::V => (self.nx, self.ny + 1),
        };
        let mut set = empty_faces(fx, fy);
        for i in 0..fx {
            for j in 0..fy {
                let f = set.index(i, j);
                set.kind[f] = self.channel_face_kind(c, i, j);
            }
        }
        let mut free = Vec::new();
        for f in 0..set.len() {
            if set.kind[f] == FaceKind::Free {
                set.row_of[f] = Some(free.len());
                free.push(f);
            }
        }
        let mut stencils = Vec::with_capacity(free.len());
        let mut immersed = Vec::new();
        for (row, &f) in free.iter().enumerate() {
            let (i, j) = set.coords(f);
            let here = self.face_position(c, i, j);
            let mut neighbour = |dir: usize, ni: usize, nj: usize| -> Link {
                let n = set.index(ni, nj);
                match set.kind[n] {
                    FaceKind::Free => Link::Face(n),
                    FaceKind::Inflow => Link::Fixed {
                        self_coef: 0.0,
                        value: BoundaryValue::Inflow {
                            y: self.face_position(c, ni, nj).1,
                            weight: 1.0,
                        },
                    },
                    FaceKind::Wall => {
                        let there = self.face_position(c, ni, nj);
                        let theta = self
                            .obstacle
                            .filter(|o| o.contains(there.0, there.1))
                            .and_then(|o| o.crossing(here, there))
                            .map(|s| s.max(THETA_MIN));
                        match theta {
                            Some(theta) => {
                                immersed.push(ImmersedLink {
                                    row,
                                    direction: dir,
                                    theta,
                                });
                                Link::Immersed {
                                    self_coef: (theta - 1.0) / theta,
                                }
                            }
                            None => Link::Fixed {
                                self_coef: 0.0,
                                value: BoundaryValue::Zero,
                            },
                        }
                    }
                }
            };
            // Wall ghost half a cell beyond the face: u_ghost = -u_face.
            let mirror = Link::Fixed {
                self_coef: -1.0,
                value: BoundaryValue::Zero,
            };
            let zero_gradient = Link::Fixed {
                self_coef: 1.0,
                value: BoundaryValue::Zero,
            };
            let stencil = match c {
                Component::U => {
                    let east = if i == self.nx {
                        zero_gradient
                    } else {
                        neighbour(0, i + 1, j)
                    };
                    let west = neighbour(1, i - 1, j);
                    let north = if j + 1 == self.ny {
                        mirror
                    } else {
                        neighbour(2, i, j + 1)
                    };
                    let south = if j == 0 { mirror } else { neighbour(3, i, j - 1) };
                    let iv = i.min(self.nx - 1);
                    let vy = self.ny + 1;
                    Stencil {
                        links: [east, west, north, south],
                        transverse: [
                            (i - 1) * vy + j,
                            iv * vy + j,
                            (i - 1) * vy + j + 1,
                            iv * vy + j + 1,
                        ],
                        along: [(i < self.nx).then(|| set.index(i + 1, j)), Some(set.index(i - 1, j))],
                        cells: (
                            self.cell(i - 1, j),
                            (i < self.nx).then(|| self.cell(i, j)),
                        ),
                    }
                }
                Component::V => {
                    let east = if i + 1 == self.nx {
                        zero_gradient
                    } else {
                        neighbour(0, i + 1, j)
                    };
                    // v_in = 0 on the inlet: ghost mirrors the face.
                    let west = if i == 0 { mirror } else { neighbour(1, i - 1, j) };
                    let north = neighbour(2, i, j + 1);
                    let south = neighbour(3, i, j - 1);
                    let uy = self.ny;
                    Stencil {
                        links: [east, west, north, south],
                        transverse: [
                            i * uy + j - 1,
                            (i + 1) * uy + j - 1,
                            i * uy + j,
                            (i + 1) * uy + j,
                        ],
                        along: [Some(set.index(i, j + 1)), Some(set.index(i, j - 1))],
                        cells: (self.cell(i, j - 1), Some(self.cell(i, j))),
                    }
                }
            };
            stencils.push(stencil);
        }
        set.free = free;
        set.stencils = stencils;
        set.immersed = immersed;
        set
    }

    fn channel_face_kind(&self, c: Component, i: usize, j: usize) -> FaceKind {
        let (x, y) = self.face_position(c, i, j);
        let inside = self.obstacle.is_some_and(|o| o.contains(x, y));
        match c {
            Component::U => {
                if i == 0 {
                    return FaceKind::Inflow;
                }
                let touches_solid =
                    self.solid[self.cell(i - 1, j)] || (i < self.nx && self.solid[self.cell(i, j)]);
                if touches_solid || inside {
                    FaceKind::Wall
                } else {
                    FaceKind::Free
                }
            }
            Component::V => {
                if j == 0 || j == self.ny {
                    return FaceKind::Wall;
                }
                let touches_solid = self.solid[self.cell(i, j - 1)] || self.solid[self.cell(i, j)];
                if touches_solid || inside {
                    FaceKind::Wall
                } else {
                    FaceKind::Free
                }
            }
        }
    }

    fn periodic_faces(&self, c: Component) -> FaceSet {
        let (nx, ny) = (self.nx, self.ny);
        let mut set = empty_faces(nx, ny);
        set.free = (0..nx * ny).collect();
        set.row_of = (0..nx * ny).map(Some).collect();
        let wrap = |i: isize, j: isize| -> usize {
            let i = i.rem_euclid(nx as isize) as usize;
            let j = j.rem_euclid(ny as isize) as usize;
            i * ny + j
        };
        set.stencils = (0..nx * ny)
            .map(|f| {
                let (i, j) = ((f / ny) as isize, (f % ny) as isize);
                let links = [
                    Link::Face(wrap(i + 1, j)),
                    Link::Face(wrap(i - 1, j)),
                    Link::Face(wrap(i, j + 1)),
                    Link::Face(wrap(i, j - 1)),
                ];
                match c {
                    Component::U => Stencil {
                        links,
                        transverse: [wrap(i - 1, j), wrap(i, j), wrap(i - 1, j + 1), wrap(i, j + 1)],
                        along: [Some(wrap(i + 1, j)), Some(wrap(i - 1, j))],
                        cells: (wrap(i - 1, j), Some(wrap(i, j))),
                    },
                    Component::V => Stencil {
                        links,
                        transverse: [wrap(i, j - 1), wrap(i + 1, j - 1), wrap(i, j), wrap(i + 1, j)],
                        along: [Some(wrap(i, j + 1)), Some(wrap(i, j - 1))],
                        cells: (wrap(i, j - 1), Some(wrap(i, j))),
                    },
                }
            })
            .collect();
        set
    }
}

fn empty_faces(nx: usize, ny: usize) -> FaceSet {
    FaceSet {
        nx,
        ny,
        kind: vec![FaceKind::Free; nx * ny],
        row_of: vec![None; nx * ny],
        free: Vec::new(),
        stencils: Vec::new(),
        immersed: Vec::new(),
    }
}
