use crate::chemio::{det3, Structure};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    /// Displacement from the center atom to the (image of the) neighbor.
    pub vector: [f64; 3],
    pub distance: f64,
}

/// Per-atom neighbors within a cutoff, including periodic images.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub cutoff: f64,
    pub atoms: Vec<Vec<Neighbor>>,
}

impl NeighborList {
    pub fn of(&self, atom: usize) -> &[Neighbor] {
        &self.atoms[atom]
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Fractional coordinates `s` with `r = s · cell` (cell rows are lattice vectors).
fn fractional(cell: &[[f64; 3]; 3], r: [f64; 3]) -> [f64; 3] {
    let det = det3(cell);
    let (a, b, c) = (cell[0], cell[1], cell[2]);
    let bc = cross(b, c);
    let ca = cross(c, a);
    let ab = cross(a, b);
    let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    [dot(r, bc) / det, dot(r, ca) / det, dot(r, ab) / det]
}

/// Enumerates every neighbor (and periodic image) with `|r_ij| ≤ r_cut`.
///
/// Image ranges are derived from the lattice plane spacings, so cutoffs
/// larger than half the box are handled exactly.
pub fn neighbor_list(structure: &Structure, r_cut: f64) -> Result<NeighborList> {
    if !(r_cut > 0.0) {
        return Err(Error::Invalid(format!("cutoff must be positive, got {r_cut}")));
    }
    let n = structure.len();
    let mut ranges = [0i64; 3];
    let mut cell = [[0.0; 3]; 3];
    if structure.is_periodic() {
        cell = structure
            .cell
            .ok_or_else(|| Error::Invalid("periodic structure without a cell".into()))?;
        let det = det3(&cell);
        if det.abs() <= 1e-12 {
            return Err(Error::Invalid("cell is singular".into()));
        }
        let frac: Vec<[f64; 3]> = structure.positions.iter().map(|&p| fractional(&cell, p)).collect();
        for k in 0..3 {
            if !structure.pbc[k] {
                continue;
            }
            let area = norm(cross(cell[(k + 1) % 3], cell[(k + 2) % 3]));
            let spacing = det.abs() / area;
            let lo = frac.iter().map(|f| f[k]).fold(f64::INFINITY, f64::min);
            let hi = frac.iter().map(|f| f[k]).fold(f64::NEG_INFINITY, f64::max);
            ranges[k] = (r_cut / spacing).ceil() as i64 + (hi - lo).ceil() as i64;
        }
    }

    let mut atoms = vec![Vec::new(); n];
    for (i, list) in atoms.iter_mut().enumerate() {
        let ri = structure.positions[i];
        for j in 0..n {
            let rj = structure.positions[j];
            for a in -ranges[0]..=ranges[0] {
                for b in -ranges[1]..=ranges[1] {
                    for c in -ranges[2]..=ranges[2] {
                        if i == j && a == 0 && b == 0 && c == 0 {
                            continue;
                        }
                        let (a, b, c) = (a as f64, b as f64, c as f64);
                        let mut v = [0.0; 3];
                        for d in 0..3 {
                            v[d] = rj[d] + a * cell[0][d] + b * cell[1][d] + c * cell[2][d] - ri[d];
                        }
                        let dist = norm(v);
                        if dist <= r_cut {
                            list.push(Neighbor {
                                index: j,
                                vector: v,
                                distance: dist,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(NeighborList { cutoff: r_cut, atoms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chemio::Element;

    fn h() -> Element {
        Element::from_symbol("H").unwrap()
    }

    #[test]
    fn dimer() {
        let s = Structure::molecule(vec![h(), h()], vec![[0.0; 3], [1.0, 0.0, 0.0]]).unwrap();
        let nl = neighbor_list(&s, 2.0).unwrap();
        assert_eq!(nl.of(0).len(), 1);
        assert_eq!(nl.of(1).len(), 1);
        assert_eq!(nl.of(0)[0].index, 1);
        assert_eq!(nl.of(1)[0].vector, [-1.0, 0.0, 0.0]);
        assert!(neighbor_list(&s, 0.5).unwrap().atoms.iter().all(Vec::is_empty));
    }

    fn cubic(a: f64, positions: Vec<[f64; 3]>) -> Structure {
        let n = positions.len();
        Structure {
            elements: vec![h(); n],
            positions,
            cell: Some([[a, 0.0, 0.0], [0.0, a, 0.0], [0.0, 0.0, a]]),
            pbc: [true; 3],
            properties: Default::default(),
        }
    }

    /// Independent count over a fixed ±`m` image box.
    fn brute_force_count(s: &Structure, i: usize, r_cut: f64, m: i64) -> usize {
        let cell = s.cell.unwrap();
        let mut count = 0;
        for j in 0..s.len() {
            for a in -m..=m {
                for b in -m..=m {
                    for c in -m..=m {
                        if i == j && (a, b, c) == (0, 0, 0) {
                            continue;
                        }
                        let mut d2 = 0.0;
                        for k in 0..3 {
                            let x = s.positions[j][k] - s.positions[i][k]
                                + a as f64 * cell[0][k]
                                + b as f64 * cell[1][k]
                                + c as f64 * cell[2][k];
                            d2 += x * x;
                        }
                        if d2.sqrt() <= r_cut {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn self_images_in_small_cubic_cell() {
        let s = cubic(3.0, vec![[0.0; 3]]);
        let nl = neighbor_list(&s, 3.5).unwrap();
        assert_eq!(nl.of(0).len(), 6);
        assert_eq!(brute_force_count(&s, 0, 3.5, 2), 6);
        assert!(nl.of(0).iter().all(|n| (n.distance - 3.0).abs() < 1e-12));
        // face diagonals at 3√2 ≈ 4.243 enter at a larger cutoff
        assert_eq!(neighbor_list(&s, 4.3).unwrap().of(0).len(), 18);
    }

    #[test]
    fn long_cutoff_matches_brute_force() {
        let s = cubic(2.5, vec![[0.1, 0.2, 0.3], [1.4, 1.1, 0.9], [3.1, -0.4, 2.0]]);
        let nl = neighbor_list(&s, 5.2).unwrap();
        for i in 0..3 {
            assert_eq!(nl.of(i).len(), brute_force_count(&s, i, 5.2, 5), "atom {i}");
            assert!(nl.of(i).iter().all(|n| n.distance <= 5.2 + 1e-12 && n.distance > 0.0));
        }
    }

    #[test]
    fn non_periodic_lists_are_symmetric() {
        let s = Structure::molecule(
            vec![h(); 4],
            vec![[0.0; 3], [0.9, 0.1, 0.0], [0.2, 1.3, 0.4], [2.5, 2.5, 2.5]],
        )
        .unwrap();
        let nl = neighbor_list(&s, 1.6).unwrap();
        for i in 0..4 {
            for n in nl.of(i) {
                assert!(nl.of(n.index).iter().any(|m| m.index == i));
            }
        }
    }

    #[test]
    fn singular_cell_rejected() {
        let mut s = cubic(3.0, vec![[0.0; 3]]);
        s.cell = Some([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(neighbor_list(&s, 1.0).is_err());
    }
}
