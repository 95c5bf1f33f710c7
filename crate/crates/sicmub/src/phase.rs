//! The discrete phase space V = F x F.
//!
//! V carries the nondegenerate symplectic form
//! `[v, w] = v2*w1 - v1*w2`, the character
//! `<v|w> = omega^Tr[v,w]`, and d+1 lines through the origin: L_alpha
//! = F(1, alpha) for alpha in F, plus L_inf = F(0, 1). The cosets of a
//! line partition V into d parallel affine lines, and cosets of
//! distinct lines meet in exactly one point, which makes the d+1 coset
//! partitions a complete 1-overlap family.
//!
//! Points are enumerated row-major in element order:
//! `index(v) = index(v1) * d + index(v2)`. Functions V -> C are plain
//! slices in that order.

use num_complex::Complex64;

use crate::combin::Partition;
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

/// A point v = (v1, v2) of V.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePoint {
    v1: FieldElement,
    v2: FieldElement,
}

/// Label of a line through the origin: slope alpha in F, or infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineLabel {
    Infinity,
    Slope(FieldElement),
}

/// A line through the origin with its d points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub label: LineLabel,
    pub points: Vec<PhasePoint>,
}

/// An affine coset v + L of a line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coset {
    pub line: LineLabel,
    /// Minimal point of the coset in the canonical point order.
    pub representative: PhasePoint,
    pub points: Vec<PhasePoint>,
}

/// Direction of the symplectic Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl PhasePoint {
    pub fn new(v1: FieldElement, v2: FieldElement) -> Result<PhasePoint> {
        if v1.field() != v2.field() {
            return Err(Error::MixedFields);
        }
        Ok(PhasePoint { v1, v2 })
    }

    pub fn v1(&self) -> &FieldElement {
        &self.v1
    }

    pub fn v2(&self) -> &FieldElement {
        &self.v2
    }

    pub fn field(&self) -> &Field {
        self.v1.field()
    }

    /// Canonical index in the row-major point enumeration.
    pub fn index(&self) -> usize {
        self.v1.index() * self.field().size() + self.v2.index()
    }

    pub fn is_origin(&self) -> bool {
        self.v1.is_zero() && self.v2.is_zero()
    }

    pub fn add(&self, other: &PhasePoint) -> Result<PhasePoint> {
        let f = self.field();
        PhasePoint::new(f.add(&self.v1, &other.v1)?, f.add(&self.v2, &other.v2)?)
    }

    pub fn neg(&self) -> PhasePoint {
        let f = self.field().clone();
        PhasePoint {
            v1: f.neg(&self.v1).expect("element of own field"),
            v2: f.neg(&self.v2).expect("element of own field"),
        }
    }
}

/// All d^2 points of V in canonical order.
pub fn phase_points(field: &Field) -> Vec<PhasePoint> {
    let d = field.size();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(PhasePoint {
                v1: field.element_at(i),
                v2: field.element_at(j),
            });
        }
    }
    out
}

/// The point with the given canonical index.
pub fn point_at(field: &Field, index: usize) -> PhasePoint {
    let d = field.size();
    PhasePoint {
        v1: field.element_at(index / d),
        v2: field.element_at(index % d),
    }
}

/// The symplectic form [v, w] = v2*w1 - v1*w2.
pub fn symplectic_form(v: &PhasePoint, w: &PhasePoint) -> Result<FieldElement> {
    if v.field() != w.field() {
        return Err(Error::MixedFields);
    }
    let f = v.field();
    let a = f.mul(&v.v2, &w.v1)?;
    let b = f.mul(&v.v1, &w.v2)?;
    f.sub(&a, &b)
}

/// Exponent k in Z_p with <v|w> = omega^k, i.e. k = Tr[v, w].
pub fn character_exponent(v: &PhasePoint, w: &PhasePoint) -> Result<u64> {
    let form = symplectic_form(v, w)?;
    v.field().trace(&form)
}

/// The character value <v|w> = omega^Tr[v, w] together with the form.
pub fn symplectic_character(v: &PhasePoint, w: &PhasePoint) -> Result<(FieldElement, Complex64)> {
    let form = symplectic_form(v, w)?;
    let k = v.field().trace(&form)?;
    Ok((form, v.field().root_of_unity(k)))
}

/// The d+1 lines through the origin, L_inf first and then L_alpha in
/// element order of the slope, each with its d cosets. Within a line,
/// cosets are ordered by their canonical representatives and then
/// rotated so the line itself comes last: labels read 1, ..., d-1, 0
/// in the affine parameter, matching the outcome convention in which
/// the d-th outcome is the line.
pub fn lines_and_cosets(field: &Field) -> Vec<(Line, Vec<Coset>)> {
    let d = field.size();
    let mut labels: Vec<LineLabel> = Vec::with_capacity(d + 1);
    labels.push(LineLabel::Infinity);
    for alpha in field.elements() {
        labels.push(LineLabel::Slope(alpha));
    }

    labels
        .into_iter()
        .map(|label| {
            let points: Vec<PhasePoint> = field
                .elements()
                .map(|u| match &label {
                    LineLabel::Infinity => PhasePoint {
                        v1: field.zero(),
                        v2: u,
                    },
                    LineLabel::Slope(alpha) => PhasePoint {
                        v2: field.mul(alpha, &u).expect("same field"),
                        v1: u,
                    },
                })
                .collect();
            let line = Line {
                label: label.clone(),
                points,
            };

            // Group all of V into cosets of this line.
            let mut assigned = vec![false; d * d];
            let mut cosets = Vec::with_capacity(d);
            for idx in 0..d * d {
                if assigned[idx] {
                    continue;
                }
                let rep = point_at(field, idx);
                let mut pts: Vec<PhasePoint> = line
                    .points
                    .iter()
                    .map(|l| rep.add(l).expect("same field"))
                    .collect();
                pts.sort_by_key(|p| p.index());
                for p in &pts {
                    assigned[p.index()] = true;
                }
                cosets.push(Coset {
                    line: label.clone(),
                    representative: pts[0].clone(),
                    points: pts,
                });
            }
            // The rep-sorted order starts with the coset of the origin
            // (the line itself); move it to the end.
            cosets.rotate_left(1);
            (line, cosets)
        })
        .collect()
}

/// The d+1 coset partitions of V, one per line, as d-partitions of the
/// canonical point indices (bin order = coset order).
pub fn coset_partitions(field: &Field) -> Vec<Partition> {
    let d = field.size();
    lines_and_cosets(field)
        .iter()
        .map(|(_, cosets)| {
            let bins = cosets
                .iter()
                .map(|c| c.points.iter().map(|p| p.index()).collect())
                .collect();
            Partition::new(d, bins).expect("cosets of a line partition V")
        })
        .collect()
}

/// Symplectic Fourier transform of a function on V given in canonical
/// point order. Both directions carry the 1/|F| normalization, with
/// the inverse using the conjugated character; inverse(forward(f)) = f.
pub fn symplectic_fourier(
    field: &Field,
    f: &[Complex64],
    direction: Direction,
) -> Result<Vec<Complex64>> {
    let d = field.size();
    if f.len() != d * d {
        return Err(Error::IncompleteDomain {
            expected: d * d,
            got: f.len(),
        });
    }
    let points = phase_points(field);
    // Character table by exponent keeps the sums exact in the phases.
    let p = field.p();
    let roots: Vec<Complex64> = (0..p).map(|k| field.root_of_unity(k)).collect();
    let mut out = Vec::with_capacity(d * d);
    for v in &points {
        let mut acc = Complex64::new(0.0, 0.0);
        for (u, fu) in points.iter().zip(f) {
            // Forward kernel <v|u>; inverse kernel conj(<u|v>). The two
            // coincide by antisymmetry of the form, making the
            // transform an involution, but we keep both spelled out.
            let k = match direction {
                Direction::Forward => character_exponent(v, u).expect("same field"),
                Direction::Inverse => (p - character_exponent(u, v).expect("same field")) % p,
            };
            acc += roots[k as usize] * fu;
        }
        out.push(acc / d as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn zp(p: u64) -> Field {
        Field::prime(p).unwrap()
    }

    fn pt(f: &Field, a: u64, b: u64) -> PhasePoint {
        PhasePoint::new(f.element(&[a]).unwrap(), f.element(&[b]).unwrap()).unwrap()
    }

    #[test]
    fn character_basics_z3() {
        let f = zp(3);
        // [v, v] = 0 and chi = 1
        let v = pt(&f, 1, 2);
        let (form, chi) = symplectic_character(&v, &v).unwrap();
        assert!(form.is_zero());
        assert!((chi - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        // v = (1,0), w = (0,1): form = v2*w1 - v1*w2 = -1 = 2
        let v = pt(&f, 1, 0);
        let w = pt(&f, 0, 1);
        let (form, chi) = symplectic_character(&v, &w).unwrap();
        assert_eq!(form, f.element(&[2]).unwrap());
        assert!((chi - f.root_of_unity(2)).norm() < 1e-15);
        // proportional vectors: (1,1) and (2,2)
        let v = pt(&f, 1, 1);
        let w = pt(&f, 2, 2);
        let (form, chi) = symplectic_character(&v, &w).unwrap();
        assert!(form.is_zero());
        assert!((chi - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn character_conjugate_symmetry_and_nondegeneracy() {
        for (p, n) in [(3u64, 1usize), (5, 1), (3, 2)] {
            let f = Field::new(p, n, None).unwrap();
            let pts = phase_points(&f);
            for v in &pts {
                let mut hits_nonzero = false;
                for w in &pts {
                    let (_, cv) = symplectic_character(v, w).unwrap();
                    let (_, cw) = symplectic_character(w, v).unwrap();
                    assert!((cv - cw.conj()).norm() < 1e-14);
                    if character_exponent(v, w).unwrap() != 0 {
                        hits_nonzero = true;
                    }
                }
                // nondegeneracy: every v != 0 pairs nontrivially with some w
                if !v.is_origin() {
                    assert!(hits_nonzero, "degenerate point {v:?}");
                }
            }
        }
    }

    #[test]
    fn lines_partition_v() {
        for (p, n) in [(2u64, 1usize), (3, 1), (5, 1), (3, 2)] {
            let f = Field::new(p, n, None).unwrap();
            let d = f.size();
            let lc = lines_and_cosets(&f);
            assert_eq!(lc.len(), d + 1);
            // lines contain the origin, have d points, meet only at 0,
            // and cover V
            let mut cover = vec![0usize; d * d];
            for (line, cosets) in &lc {
                assert_eq!(line.points.len(), d);
                assert!(line.points.iter().any(|p| p.is_origin()));
                for pp in &line.points {
                    cover[pp.index()] += 1;
                }
                // closure under scalar multiplication
                for s in f.elements() {
                    for lp in &line.points {
                        let scaled = PhasePoint::new(
                            f.mul(&s, lp.v1()).unwrap(),
                            f.mul(&s, lp.v2()).unwrap(),
                        )
                        .unwrap();
                        assert!(line.points.contains(&scaled));
                    }
                }
                // cosets partition V
                let mut seen = vec![false; d * d];
                for c in cosets {
                    assert_eq!(c.points.len(), d);
                    assert_eq!(c.representative, c.points[0]);
                    for pp in &c.points {
                        assert!(!seen[pp.index()]);
                        seen[pp.index()] = true;
                    }
                }
                assert!(seen.iter().all(|&s| s));
            }
            // every nonzero point on exactly one line, origin on all
            assert_eq!(cover[0], d + 1);
            assert!(cover[1..].iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn cosets_of_distinct_lines_meet_once() {
        for (p, n) in [(3u64, 1usize), (5, 1), (3, 2)] {
            let f = Field::new(p, n, None).unwrap();
            let lc = lines_and_cosets(&f);
            for i in 0..lc.len() {
                for j in i + 1..lc.len() {
                    for a in &lc[i].1 {
                        for b in &lc[j].1 {
                            let shared = a
                                .points
                                .iter()
                                .filter(|pp| b.points.contains(pp))
                                .count();
                            assert_eq!(shared, 1);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn coset_partitions_are_one_overlap_family() {
        let f = Field::prime(3).unwrap();
        let parts = coset_partitions(&f);
        assert_eq!(parts.len(), 4);
        crate::combin::check_pairwise_one_overlap(&parts).unwrap();
    }

    #[test]
    fn fourier_indicator_and_constant() {
        let f = zp(3);
        let d2 = 9;
        // indicator of the origin maps to the constant 1/|F|
        let mut delta = vec![Complex64::new(0.0, 0.0); d2];
        delta[0] = Complex64::new(1.0, 0.0);
        let hat = symplectic_fourier(&f, &delta, Direction::Forward).unwrap();
        for z in &hat {
            assert!((z - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-14);
        }
        // constant 1 maps to |F| * indicator of the origin
        let ones = vec![Complex64::new(1.0, 0.0); d2];
        let hat = symplectic_fourier(&f, &ones, Direction::Forward).unwrap();
        assert!((hat[0] - Complex64::new(3.0, 0.0)).norm() < 1e-13);
        for z in &hat[1..] {
            assert!(z.norm() < 1e-13);
        }
    }

    #[test]
    fn fourier_round_trip_and_parseval() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (p, n) in [(3u64, 1usize), (5, 1), (3, 2)] {
            let f = Field::new(p, n, None).unwrap();
            let d2 = f.size() * f.size();
            let data: Vec<Complex64> = (0..d2)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let hat = symplectic_fourier(&f, &data, Direction::Forward).unwrap();
            let back = symplectic_fourier(&f, &hat, Direction::Inverse).unwrap();
            for (a, b) in data.iter().zip(&back) {
                assert!((a - b).norm() < 1e-12);
            }
            // with the 1/|F| convention in both directions the
            // transform preserves the l2 norm exactly
            let norm_in: f64 = data.iter().map(|z| z.norm_sqr()).sum();
            let norm_out: f64 = hat.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm_in - norm_out).abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_rejects_wrong_length() {
        let f = zp(3);
        let short = vec![Complex64::new(1.0, 0.0); 5];
        assert!(matches!(
            symplectic_fourier(&f, &short, Direction::Forward),
            Err(Error::IncompleteDomain {
                expected: 9,
                got: 5
            })
        ));
    }

    #[test]
    fn mixed_fields_rejected() {
        let f = zp(3);
        let g = zp(5);
        let v = pt(&f, 1, 0);
        let w = pt(&g, 1, 0);
        assert!(matches!(
            symplectic_form(&v, &w),
            Err(Error::MixedFields)
        ));
    }
}
