use crate::geometry::Point;

/// Monotone alignment between two sequences as 0-based index pairs, from
/// `(0, 0)` to `(l1 - 1, l2 - 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpedAlignment {
    pub pairs: Vec<(usize, usize)>,
    pub cost: f64,
}

/// Dynamic time warping under Euclidean point distance.
///
/// `D[i][j] = |a_i - b_j| + min(D[i-1][j], D[i][j-1], D[i-1][j-1])`, then a
/// backtrack from the last cell that prefers the diagonal step, then the
/// step that decrements `i`, then the one that decrements `j`.
///
/// # Panics
///
/// Panics if either sequence is empty.
pub fn dtw_warp(a: &[Point], b: &[Point]) -> WarpedAlignment {
    dtw_by(a.len(), b.len(), |i, j| a[i].distance(b[j]))
}

/// [`dtw_warp`] for an arbitrary pairwise cost.
pub fn dtw_by(l1: usize, l2: usize, cost: impl Fn(usize, usize) -> f64) -> WarpedAlignment {
    assert!(l1 > 0 && l2 > 0, "dtw needs two nonempty sequences");
    let mut d = vec![0.0f64; l1 * l2];
    let at = |i: usize, j: usize| i * l2 + j;
    for i in 0..l1 {
        for j in 0..l2 {
            let c = cost(i, j);
            d[at(i, j)] = c + match (i, j) {
                (0, 0) => 0.0,
                (0, _) => d[at(0, j - 1)],
                (_, 0) => d[at(i - 1, 0)],
                _ => d[at(i - 1, j)].min(d[at(i, j - 1)]).min(d[at(i - 1, j - 1)]),
            };
        }
    }

    let (mut i, mut j) = (l1 - 1, l2 - 1);
    let mut pairs = vec![(i, j)];
    while (i, j) != (0, 0) {
        (i, j) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = d[at(i - 1, j - 1)];
            let up = d[at(i - 1, j)];
            let left = d[at(i, j - 1)];
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        pairs.push((i, j));
    }
    pairs.reverse();
    WarpedAlignment { pairs, cost: d[at(l1 - 1, l2 - 1)] }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(v: &[f64]) -> Vec<Point> {
        v.iter().map(|&x| Point::new(x, 0.0)).collect()
    }

    #[test]
    fn identical_sequences_align_diagonally() {
        let a = line(&[1.0, 4.0, 2.0, 8.0]);
        let w = dtw_warp(&a, &a);
        assert_eq!(w.pairs, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
        assert_eq!(w.cost, 0.0);
    }

    #[test]
    fn single_element_forces_row() {
        let w = dtw_warp(&line(&[0.0]), &line(&[1.0, 2.0, 3.0]));
        assert_eq!(w.pairs, vec![(0, 0), (0, 1), (0, 2)]);
        assert_eq!(w.cost, 6.0);
    }

    #[test]
    fn diagonal_wins_ties() {
        let w = dtw_warp(&line(&[1.0, 2.0, 3.0]), &line(&[1.0, 3.0]));
        assert_eq!(w.pairs, vec![(0, 0), (1, 0), (2, 1)]);
        assert_eq!(w.cost, 1.0);
    }
}
