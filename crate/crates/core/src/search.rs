//! Obstacle-free piecewise-linear routing on the occupancy grid.
//!
//! A* runs on the 8-connected cell graph with octile costs. Diagonal moves
//! require both cardinal neighbours to be free so paths never squeeze
//! between diagonally touching occupied cells.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;
use std::sync::Arc;

use ordered_float::OrderedFloat;
use parking_lot::RwLock;
use rustc_hash::FxHashMap;

use crate::error::SearchError;
use crate::geometry::Point;
use crate::scenario::{OccupancyGrid, Scenario};

#[derive(Clone, Debug, PartialEq)]
pub struct GridPath {
    pub points: Vec<Point>,
    pub length: f64,
}

impl GridPath {
    pub fn from_points(points: Vec<Point>) -> Self {
        let length = polyline_length(&points);
        Self { points, length }
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self::from_points(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

const NEIGHBOURS: [(i64, i64); 8] = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)];

fn octile(ax: usize, ay: usize, bx: usize, by: usize) -> f64 {
    let dx = ax.abs_diff(bx) as f64;
    let dy = ay.abs_diff(by) as f64;
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    (hi - lo) + SQRT_2 * lo
}

/// Minimal-cost 8-connected path from `start` to `goal`.
///
/// Costs are counted in cells (1 straight, sqrt 2 diagonal) and the
/// reported length is measured on the returned points, whose first and
/// last entries are the exact continuous endpoints rather than cell
/// centres.
pub fn astar(grid: &OccupancyGrid, start: Point, goal: Point) -> Result<GridPath, SearchError> {
    let s = grid.cell_of(start).filter(|&(x, y)| !grid.is_occupied_cell(x, y));
    let g = grid.cell_of(goal).filter(|&(x, y)| !grid.is_occupied_cell(x, y));
    let (Some((sx, sy)), Some((gx, gy))) = (s, g) else {
        let bad = if s.is_none() { start } else { goal };
        return Err(SearchError::InvalidEndpoint { x: bad.x, y: bad.y });
    };
    let start_idx = grid.index(sx, sy);
    let goal_idx = grid.index(gx, gy);

    let cells = if start_idx == goal_idx { vec![start_idx] } else { search_cells(grid, start_idx, goal_idx)? };

    let mut points = Vec::with_capacity(cells.len() + 1);
    points.push(start);
    for &c in cells.iter().skip(1).take(cells.len().saturating_sub(2)) {
        let (x, y) = grid.coords(c);
        points.push(grid.cell_center(x, y));
    }
    if goal != start || cells.len() > 1 {
        points.push(goal);
    }
    Ok(GridPath::from_points(points))
}

fn search_cells(grid: &OccupancyGrid, start: usize, goal: usize) -> Result<Vec<usize>, SearchError> {
    let n = grid.len();
    let (w, h) = (grid.width() as i64, grid.height() as i64);
    let (gx, gy) = grid.coords(goal);
    let mut g_cost = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();

    let (sx, sy) = grid.coords(start);
    let h0 = octile(sx, sy, gx, gy);
    g_cost[start] = 0.0;
    open.push(Reverse((OrderedFloat(h0), OrderedFloat(h0), start)));

    while let Some(Reverse((_, _, current))) = open.pop() {
        if closed[current] {
            continue;
        }
        if current == goal {
            let mut cells = vec![goal];
            let mut c = goal;
            while c != start {
                c = parent[c];
                cells.push(c);
            }
            cells.reverse();
            return Ok(cells);
        }
        closed[current] = true;
        let (cx, cy) = grid.coords(current);
        for (dx, dy) in NEIGHBOURS {
            let nx = cx as i64 + dx;
            let ny = cy as i64 + dy;
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if grid.is_occupied_cell(nx, ny) {
                continue;
            }
            let diagonal = dx != 0 && dy != 0;
            if diagonal && (grid.is_occupied_cell(nx, cy) || grid.is_occupied_cell(cx, ny)) {
                continue;
            }
            let next = grid.index(nx, ny);
            if closed[next] {
                continue;
            }
            let tentative = g_cost[current] + if diagonal { SQRT_2 } else { 1.0 };
            if tentative < g_cost[next] {
                g_cost[next] = tentative;
                parent[next] = current;
                let hn = octile(nx, ny, gx, gy);
                open.push(Reverse((OrderedFloat(tentative + hn), OrderedFloat(hn), next)));
            }
        }
    }
    Err(SearchError::Unreachable)
}

/// Memoized pairwise A* results for one scenario. Readers run
/// concurrently; insertions are serialized.
#[derive(Debug, Default)]
pub struct PairwiseCache {
    entries: RwLock<FxHashMap<(usize, usize), Result<Arc<GridPath>, SearchError>>>,
}

impl PairwiseCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get_or_compute(
        &self,
        key: (usize, usize),
        compute: impl FnOnce() -> Result<GridPath, SearchError>,
    ) -> Result<Arc<GridPath>, SearchError> {
        if let Some(hit) = self.entries.read().get(&key) {
            return hit.clone();
        }
        let value = compute().map(Arc::new);
        self.entries.write().entry(key).or_insert(value).clone()
    }
}

/// Path between two waypoints. Both directions are served from the search
/// in increasing index order so that `a -> b` is exactly the reverse of
/// `b -> a`, with or without the cache.
pub fn pair_path(
    grid: &OccupancyGrid,
    scenario: &Scenario,
    from: usize,
    to: usize,
    cache: Option<&PairwiseCache>,
) -> Result<Arc<GridPath>, SearchError> {
    let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
    let compute = || {
        astar(grid, scenario.waypoints[lo].position, scenario.waypoints[hi].position)
            .map_err(|_| SearchError::NoPath { from: lo, to: hi })
    };
    let forward = match cache {
        Some(c) => c.get_or_compute((lo, hi), compute)?,
        None => Arc::new(compute()?),
    };
    if from <= to {
        Ok(forward)
    } else {
        Ok(Arc::new(forward.reversed()))
    }
}

/// Concatenated polyline through a waypoint sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct SequencePath {
    pub path: GridPath,
    /// Polyline index of each sequence element.
    pub junctions: Vec<usize>,
}

/// Joins the pairwise A* paths between consecutive sequence elements,
/// dropping the duplicated junction points.
pub fn polyline_for_sequence(
    grid: &OccupancyGrid,
    seq: &[usize],
    scenario: &Scenario,
    cache: Option<&PairwiseCache>,
) -> Result<SequencePath, SearchError> {
    let Some(&first) = seq.first() else {
        return Ok(SequencePath { path: GridPath::from_points(vec![]), junctions: vec![] });
    };
    let mut points = vec![scenario.waypoints[first].position];
    let mut junctions = vec![0];
    for pair in seq.windows(2) {
        let leg = pair_path(grid, scenario, pair[0], pair[1], cache)
            .map_err(|_| SearchError::NoPath { from: pair[0], to: pair[1] })?;
        for &p in leg.points.iter().skip(1) {
            if points.last() != Some(&p) {
                points.push(p);
            }
        }
        junctions.push(points.len() - 1);
    }
    Ok(SequencePath { path: GridPath::from_points(points), junctions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{rasterize, Environment, Rect};

    fn open_grid(n: usize) -> OccupancyGrid {
        OccupancyGrid::from_cells(Point::new(0.0, 0.0), 1.0, n, n, vec![false; n * n])
    }

    #[test]
    fn same_point_is_single_point_path() {
        let g = open_grid(5);
        let p = Point::new(2.5, 2.5);
        let path = astar(&g, p, p).unwrap();
        assert_eq!(path.points, vec![p]);
        assert_eq!(path.length, 0.0);
    }

    #[test]
    fn opposite_corners_are_all_diagonal() {
        let g = open_grid(10);
        let path = astar(&g, Point::new(0.5, 0.5), Point::new(9.5, 9.5)).unwrap();
        assert_eq!(path.points.len(), 10);
        assert!((path.length - 9.0 * SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn occupied_endpoint_is_rejected() {
        let mut cells = vec![false; 25];
        cells[0] = true;
        let g = OccupancyGrid::from_cells(Point::new(0.0, 0.0), 1.0, 5, 5, cells);
        assert!(matches!(
            astar(&g, Point::new(0.5, 0.5), Point::new(4.5, 4.5)),
            Err(SearchError::InvalidEndpoint { .. })
        ));
    }

    #[test]
    fn walled_off_goal_is_unreachable() {
        let env = Environment { x_min: 0.0, x_max: 5.0, y_min: 0.0, y_max: 5.0, obstacles: vec![Rect::new(2.0, 0.0, 1.0, 5.0)] };
        let g = rasterize(&env, 0.5, 0.0);
        assert_eq!(astar(&g, Point::new(0.5, 2.5), Point::new(4.5, 2.5)), Err(SearchError::Unreachable));
    }

    #[test]
    fn no_corner_cutting() {
        // Two occupied cells touching diagonally at the centre of a 2x2 grid.
        let cells = vec![false, true, true, false];
        let g = OccupancyGrid::from_cells(Point::new(0.0, 0.0), 1.0, 2, 2, cells);
        assert_eq!(astar(&g, Point::new(0.5, 0.5), Point::new(1.5, 1.5)), Err(SearchError::Unreachable));
    }

    #[test]
    fn path_points_are_adjacent_and_free() {
        let env = Environment {
            x_min: 0.0,
            x_max: 6.0,
            y_min: 0.0,
            y_max: 6.0,
            obstacles: vec![Rect::new(2.0, 1.0, 1.0, 5.0), Rect::new(4.0, 0.0, 0.5, 4.0)],
        };
        let g = rasterize(&env, 0.25, 0.1);
        let path = astar(&g, Point::new(0.6, 5.3), Point::new(5.6, 0.4)).unwrap();
        for p in &path.points {
            assert!(g.is_free(*p));
        }
        for w in path.points[1..path.points.len() - 1].windows(2) {
            let (a, b) = (g.cell_of(w[0]).unwrap(), g.cell_of(w[1]).unwrap());
            assert!(a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1 && a != b);
        }
        assert!((path.length - polyline_length(&path.points)).abs() < 1e-12);
    }
}
