use crate::geometry::Point;

use super::Environment;

/// Row-major free/occupied raster over the environment bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    origin: Point,
    resolution: f64,
    width: usize,
    height: usize,
    /// Upper bounds of the environment; points beyond them are occupied even
    /// when the last row/column of cells overhangs the bounds.
    limit: Point,
    occupied: Vec<bool>,
    /// Per free cell, a lower bound on the distance from any point of the
    /// cell to any occupied cell.
    clearance: Vec<f64>,
}

/// Rasterizes `env` at `resolution`. A cell is occupied when its center
/// lies outside the bounds or within `inflation_radius` (Euclidean) of
/// any obstacle rectangle.
pub fn rasterize(env: &Environment, resolution: f64, inflation_radius: f64) -> OccupancyGrid {
    assert!(resolution > 0.0, "grid resolution must be positive");
    assert!(inflation_radius >= 0.0, "inflation radius must be nonnegative");
    let cells = |span: f64| ((span / resolution) - 1e-9).ceil().max(1.0) as usize;
    let width = cells(env.x_max - env.x_min);
    let height = cells(env.y_max - env.y_min);
    let origin = Point::new(env.x_min, env.y_min);
    let mut occupied = vec![false; width * height];
    for iy in 0..height {
        for ix in 0..width {
            let c = Point::new(
                origin.x + (ix as f64 + 0.5) * resolution,
                origin.y + (iy as f64 + 0.5) * resolution,
            );
            occupied[iy * width + ix] =
                !env.contains(c) || env.obstacles.iter().any(|r| r.distance_to(c) <= inflation_radius);
        }
    }
    OccupancyGrid::build(origin, resolution, width, height, Point::new(env.x_max, env.y_max), occupied)
}

/// Squared distance in cells from every cell center to the nearest occupied
/// cell center; `f64::INFINITY` when nothing is occupied.
fn squared_distance_field(occupied: &[bool], width: usize, height: usize) -> Vec<f64> {
    // Large but finite so that the envelope arithmetic stays exact for real
    // distances.
    const FAR: f64 = 1e30;
    let mut f: Vec<f64> = occupied.iter().map(|&o| if o { 0.0 } else { FAR }).collect();
    let longest = width.max(height);
    let mut line = vec![0.0; longest];
    let mut out = vec![0.0; longest];
    for x in 0..width {
        for y in 0..height {
            line[y] = f[y * width + x];
        }
        squared_distance_1d(&line[..height], &mut out[..height]);
        for y in 0..height {
            f[y * width + x] = out[y];
        }
    }
    for row in f.chunks_mut(width) {
        line[..width].copy_from_slice(row);
        squared_distance_1d(&line[..width], row);
    }
    for v in &mut f {
        if *v >= FAR / 2.0 {
            *v = f64::INFINITY;
        }
    }
    f
}

// Lower envelope of the parabolas (q - p)^2 + f[p] (Felzenszwalb and
// Huttenlocher).
fn squared_distance_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let meet = |q: usize, p: usize| {
        let (qf, pf) = (q as f64, p as f64);
        ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf))
    };
    let mut k = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s = meet(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = meet(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let dq = q as f64 - v[k] as f64;
        *out = dq * dq + f[v[k]];
    }
}

impl OccupancyGrid {
    pub fn from_cells(origin: Point, resolution: f64, width: usize, height: usize, occupied: Vec<bool>) -> Self {
        assert!(resolution > 0.0);
        assert_eq!(occupied.len(), width * height, "cell count must equal width x height");
        let limit = Point::new(origin.x + width as f64 * resolution, origin.y + height as f64 * resolution);
        Self::build(origin, resolution, width, height, limit, occupied)
    }

    fn build(origin: Point, resolution: f64, width: usize, height: usize, limit: Point, occupied: Vec<bool>) -> Self {
        // A point and an occupied cell lie at least the center distance minus
        // two half diagonals apart.
        let margin = std::f64::consts::SQRT_2 * resolution;
        let clearance = squared_distance_field(&occupied, width, height)
            .into_iter()
            .map(|d2| d2.sqrt() * resolution - margin)
            .collect();
        Self { origin, resolution, width, height, limit, occupied, clearance }
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    /// Cell containing `p` by the floor rule; boundary points belong to the
    /// higher-index cell.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        if !(p.x >= self.origin.x && p.y >= self.origin.y && p.x <= self.limit.x && p.y <= self.limit.y) {
            return None;
        }
        let fx = ((p.x - self.origin.x) / self.resolution).floor();
        let fy = ((p.y - self.origin.y) / self.resolution).floor();
        let (ix, iy) = (fx as usize, fy as usize);
        (ix < self.width && iy < self.height).then_some((ix, iy))
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.width + ix
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            self.origin.x + (ix as f64 + 0.5) * self.resolution,
            self.origin.y + (iy as f64 + 0.5) * self.resolution,
        )
    }

    pub fn is_occupied_cell(&self, ix: usize, iy: usize) -> bool {
        self.occupied[self.index(ix, iy)]
    }

    pub fn is_free_index(&self, index: usize) -> bool {
        !self.occupied[index]
    }

    /// True iff `p` maps to an in-bounds, unoccupied cell.
    pub fn is_free(&self, p: Point) -> bool {
        match self.cell_of(p) {
            Some((ix, iy)) => !self.is_occupied_cell(ix, iy),
            None => false,
        }
    }

    /// Lower bound on the distance from `p` to the nearest point that is not
    /// free; zero when `p` itself is not free. Every point closer to `p` than
    /// this is free.
    pub fn clearance(&self, p: Point) -> f64 {
        let Some((ix, iy)) = self.cell_of(p) else { return 0.0 };
        let i = self.index(ix, iy);
        if self.occupied[i] {
            return 0.0;
        }
        let border = (p.x - self.origin.x).min(self.limit.x - p.x).min(p.y - self.origin.y).min(self.limit.y - p.y);
        // Absorbs rounding in the subtractions above.
        const SLACK: f64 = 1e-9;
        (self.clearance[i].min(border) - SLACK).max(0.0)
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|o| **o).count()
    }
}
