//! The SIC-MUB bridge: marginalization, mutual-unbiasedness checks,
//! smearing, MUB extraction, and SIC-system reconstruction.
//!
//! One direction: summing the bins of a d-partition of a SIC gives a
//! d-outcome marginal POVM, and partitions with the 1-overlap property
//! give mutually unbiased marginals; when a marginal commutes, its
//! joint eigenbasis is extractable and the eigenbases of different
//! marginals are mutually unbiased. The other direction: d+1 MUBs
//! smeared by doubly stochastic matrices whose rows satisfy
//! `|row|^2 = 2/(d+1)` and `row.row' = 1/(d+1)` recombine along the
//! dual path system via `G(i) = (E_i - I)/d` into a SIC system, which
//! is a SIC exactly when all G(i) are positive.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::combin::{Partition, PathSystem};
use crate::error::{Error, Result};
use crate::operators::{
    gram_rank, hs_inner_raw, simultaneous_diagonalize, C64, CMat, FamilyKind, HermitianOperator,
    OperatorFamily,
};
use crate::report::VerificationReport;
use crate::tol;

/// A doubly stochastic matrix of smearing weights; `rows()[nu][i]` is
/// the eigenvalue of the smeared effect `E(nu)` on eigenvector `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmearingMatrix {
    rows: Vec<Vec<f64>>,
}

impl SmearingMatrix {
    /// Validate entries in [0, 1] and unit row and column sums.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<SmearingMatrix> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::NotDoublyStochastic("matrix must be square".into()));
        }
        for r in &rows {
            for &x in r {
                if !(-tol::STOCHASTIC..=1.0 + tol::STOCHASTIC).contains(&x) {
                    return Err(Error::NotDoublyStochastic(format!(
                        "entry {x} outside [0, 1]"
                    )));
                }
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > tol::STOCHASTIC {
                return Err(Error::NotDoublyStochastic(format!("row sum {s}")));
            }
        }
        for j in 0..d {
            let s: f64 = rows.iter().map(|r| r[j]).sum();
            if (s - 1.0).abs() > tol::STOCHASTIC {
                return Err(Error::NotDoublyStochastic(format!("column {j} sum {s}")));
            }
        }
        Ok(SmearingMatrix { rows })
    }

    pub fn identity(d: usize) -> SmearingMatrix {
        let rows = (0..d)
            .map(|i| (0..d).map(|j| f64::from(i == j)).collect())
            .collect();
        SmearingMatrix { rows }
    }

    /// Circulant matrix whose row `nu` is the first row shifted
    /// cyclically right by `nu`: `rows[nu][i] = first[(i - nu) mod d]`.
    pub fn circulant(first_row: &[f64]) -> Result<SmearingMatrix> {
        let d = first_row.len();
        let rows = (0..d)
            .map(|nu| (0..d).map(|i| first_row[(i + d - nu) % d]).collect())
            .collect();
        SmearingMatrix::new(rows)
    }

    /// The binary smearing [[ (1+l)/2, (1-l)/2 ], [ (1-l)/2, (1+l)/2 ]].
    pub fn binary(lambda: f64) -> Result<SmearingMatrix> {
        SmearingMatrix::circulant(&[(1.0 + lambda) / 2.0, (1.0 - lambda) / 2.0])
    }

    /// Circulant first row from its discrete Fourier spectrum on the
    /// constraint manifold: spectrum 1 at frequency 0 and modulus
    /// `1/sqrt(d+1)` elsewhere, with free phases `phi[k]` for
    /// k = 1..=(d-1)/2 and, for even d, a sign for the frequency d/2.
    /// Rows of any such circulant satisfy `|row|^2 = 2/(d+1)` and
    /// `row.row' = 1/(d+1)` exactly. Entries may leave [0, 1] for some
    /// phases, in which case construction fails.
    pub fn circulant_from_phases(
        d: usize,
        phases: &[f64],
        nyquist_sign: f64,
    ) -> Result<SmearingMatrix> {
        let first = circulant_row_from_phases(d, phases, nyquist_sign);
        SmearingMatrix::circulant(&first)
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Number of free phases in the circulant parametrization.
pub fn circulant_phase_count(d: usize) -> usize {
    (d - 1) / 2
}

/// Inverse DFT of the constrained spectrum; always a real vector with
/// unit sum, not necessarily entrywise in [0, 1].
pub fn circulant_row_from_phases(d: usize, phases: &[f64], nyquist_sign: f64) -> Vec<f64> {
    assert_eq!(phases.len(), circulant_phase_count(d));
    let r = 1.0 / ((d as f64) + 1.0).sqrt();
    (0..d)
        .map(|j| {
            let mut x = 1.0;
            for (k, phi) in phases.iter().enumerate() {
                let theta = 2.0 * std::f64::consts::PI * (j * (k + 1)) as f64 / d as f64;
                x += 2.0 * r * (theta + phi).cos();
            }
            if d % 2 == 0 && d > 1 {
                // frequency d/2 contributes a real alternating term
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                x += nyquist_sign * r * sign;
            }
            x / d as f64
        })
        .collect()
}

/// Marginal POVMs together with the partitions and origin that
/// produced them.
#[derive(Debug, Clone)]
pub struct MarginalSet {
    /// Partitions used to form the marginals; empty when the POVMs
    /// were produced directly (e.g. by smearing).
    pub partitions: Vec<Partition>,
    pub povms: Vec<OperatorFamily>,
    pub provenance: String,
}

impl MarginalSet {
    pub fn from_povms(povms: Vec<OperatorFamily>, provenance: impl Into<String>) -> MarginalSet {
        MarginalSet {
            partitions: Vec::new(),
            povms,
            provenance: provenance.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.povms[0].dim()
    }
}

/// Sum the bins of each partition over the SIC elements: one marginal
/// POVM per partition, `E^k(nu) = sum of G(i) for i in bin nu`.
pub fn marginalize(sic: &OperatorFamily, partitions: &[Partition]) -> Result<MarginalSet> {
    let d2 = sic.len();
    let povms = partitions
        .iter()
        .map(|part| {
            let d = part.order();
            if d * d != d2 {
                return Err(Error::BadPartition(format!(
                    "{d}-partition cannot split {d2} outcomes"
                )));
            }
            let members: Vec<HermitianOperator> = part
                .bins()
                .iter()
                .map(|bin| {
                    let sum = bin
                        .iter()
                        .fold(DMatrix::zeros(sic.dim(), sic.dim()), |acc: CMat, &i| {
                            acc + sic.member(i).matrix()
                        });
                    HermitianOperator::new(sum).expect("sum of Hermitian operators")
                })
                .collect();
            OperatorFamily::with_default_labels(FamilyKind::PovmCandidate, members)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginalSet {
        partitions: partitions.to_vec(),
        povms,
        provenance: "sic-marginals".into(),
    })
}

/// Check the four marginal identities for every POVM and pair:
/// `tr E = 1`, `tr E^2 = 2/(d+1)`, same-POVM overlap `1/(d+1)`, and
/// cross-POVM overlap `1/d`, plus linear independence of each POVM's
/// effects (Gram rank d).
pub fn verify_mu_identities(marginals: &MarginalSet, tolerance: f64) -> VerificationReport {
    let d = marginals.dim() as f64;
    let mut report = VerificationReport::new(tolerance);

    let mut worst_tr = (f64::NEG_INFINITY, -1.0);
    let mut worst_self = (f64::NEG_INFINITY, -1.0);
    let mut worst_same = (f64::NEG_INFINITY, -1.0);
    let mut worst_cross = (f64::NEG_INFINITY, -1.0);
    let track = |slot: &mut (f64, f64), value: f64, target: f64| {
        if (value - target).abs() > slot.1 {
            *slot = (value, (value - target).abs());
        }
    };

    for (k, povm) in marginals.povms.iter().enumerate() {
        for (i, e) in povm.members().iter().enumerate() {
            track(&mut worst_tr, e.trace(), 1.0);
            track(
                &mut worst_self,
                hs_inner_raw(e.matrix(), e.matrix()).re,
                2.0 / (d + 1.0),
            );
            for f in &povm.members()[i + 1..] {
                track(
                    &mut worst_same,
                    hs_inner_raw(e.matrix(), f.matrix()).re,
                    1.0 / (d + 1.0),
                );
            }
            for other in &marginals.povms[k + 1..] {
                for f in other.members() {
                    track(
                        &mut worst_cross,
                        hs_inner_raw(e.matrix(), f.matrix()).re,
                        1.0 / d,
                    );
                }
            }
        }
    }
    report.check("trace tr[E] = 1", 1.0, worst_tr.0);
    report.check(
        "self-overlap tr[E^2] = 2/(d+1)",
        2.0 / (d + 1.0),
        worst_self.0,
    );
    if marginals.povms.iter().any(|p| p.len() > 1) {
        report.check(
            "same-POVM overlap tr[E(mu)E(nu)] = 1/(d+1)",
            1.0 / (d + 1.0),
            worst_same.0,
        );
    }
    if marginals.povms.len() > 1 {
        report.check(
            "cross-POVM overlap tr[E^k E^l] = 1/d",
            1.0 / d,
            worst_cross.0,
        );
    }
    let min_rank = marginals
        .povms
        .iter()
        .map(|p| gram_rank(p.members(), 1e-9))
        .min()
        .unwrap_or(0);
    report.check("linear independence: min Gram rank", d, min_rank as f64);
    report
}

/// Smear a PVM with a doubly stochastic matrix:
/// `E(nu) = sum_i lambda[nu][i] P(i)`. Every effect has unit trace.
pub fn smear(pvm: &OperatorFamily, lambda: &SmearingMatrix) -> Result<OperatorFamily> {
    let d = pvm.len();
    if lambda.order() != d {
        return Err(Error::DimMismatch {
            a: lambda.order(),
            b: d,
        });
    }
    let members = smear_members(pvm, lambda);
    OperatorFamily::with_default_labels(FamilyKind::PovmCandidate, members)
}

/// Joint-diagonalize each commutative marginal and report the cross
/// overlaps `|<phi_i^k|phi_j^l>|^2 = 1/d` between bases of different
/// marginals. Returns one orthonormal basis (as matrix columns) per
/// POVM.
pub fn extract_mubs(
    marginals: &MarginalSet,
    tolerance: f64,
) -> Result<(Vec<CMat>, VerificationReport)> {
    let d = marginals.dim() as f64;
    let bases: Vec<CMat> = marginals
        .povms
        .iter()
        .map(|p| simultaneous_diagonalize(p.members(), tolerance).map(|(b, _)| b))
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerificationReport::new(tolerance);
    let mut worst = (f64::NEG_INFINITY, -1.0);
    for (k, a) in bases.iter().enumerate() {
        for b in &bases[k + 1..] {
            let overlaps = a.adjoint() * b;
            for z in overlaps.iter() {
                let o = z.norm_sqr();
                if (o - 1.0 / d).abs() > worst.1 {
                    worst = (o, (o - 1.0 / d).abs());
                }
            }
        }
    }
    if bases.len() > 1 {
        report.check(
            "cross overlap |<phi_i^k|phi_j^l>|^2 = 1/d",
            1.0 / d,
            worst.0,
        );
    }
    Ok((bases, report))
}

/// Check the simplex geometry of an eigenvalue matrix whose rows lie
/// on the sphere `|row|^2 = 2/(d+1)` with overlaps `1/(d+1)`: the
/// centered rows `r_nu = row_nu - (1/d) 1` have squared length
/// `(d-1)/(d(d+1))` and pairwise angle cosine `-1/(d-1)`.
pub fn simplex_check(lambda: &SmearingMatrix) -> Result<VerificationReport> {
    let d = lambda.order();
    let df = d as f64;
    for (i, r) in lambda.rows().iter().enumerate() {
        let sq: f64 = r.iter().map(|x| x * x).sum();
        if (sq - 2.0 / (df + 1.0)).abs() > tol::DEFAULT {
            return Err(Error::RowsNotOnSphere(format!(
                "|row {i}|^2 = {sq}, need {}",
                2.0 / (df + 1.0)
            )));
        }
        for (j, s) in lambda.rows().iter().enumerate().skip(i + 1) {
            let dot: f64 = r.iter().zip(s).map(|(x, y)| x * y).sum();
            if (dot - 1.0 / (df + 1.0)).abs() > tol::DEFAULT {
                return Err(Error::RowsNotOnSphere(format!(
                    "row {i} . row {j} = {dot}, need {}",
                    1.0 / (df + 1.0)
                )));
            }
        }
    }

    let mut report = VerificationReport::new(tol::DEFAULT);
    let centered: Vec<Vec<f64>> = lambda
        .rows()
        .iter()
        .map(|r| r.iter().map(|x| x - 1.0 / df).collect())
        .collect();
    let mut worst_len = (f64::NEG_INFINITY, -1.0);
    let mut worst_cos = (f64::NEG_INFINITY, -1.0);
    let len_target = (df - 1.0) / (df * (df + 1.0));
    let cos_target = -1.0 / (df - 1.0);
    for (i, r) in centered.iter().enumerate() {
        let sq: f64 = r.iter().map(|x| x * x).sum();
        if (sq - len_target).abs() > worst_len.1 {
            worst_len = (sq, (sq - len_target).abs());
        }
        for s in centered.iter().skip(i + 1) {
            let dot: f64 = r.iter().zip(s).map(|(x, y)| x * y).sum();
            let ss: f64 = s.iter().map(|x| x * x).sum();
            let cos = dot / (sq.sqrt() * ss.sqrt());
            if (cos - cos_target).abs() > worst_cos.1 {
                worst_cos = (cos, (cos - cos_target).abs());
            }
        }
    }
    report.check(
        "centered row length |r|^2 = (d-1)/(d(d+1))",
        len_target,
        worst_len.0,
    );
    if d > 1 {
        report.check("pairwise cosine -1/(d-1)", cos_target, worst_cos.0);
    }
    Ok(report)
}

/// Recover a SIC system from d+1 mutually unbiased POVMs along a path
/// system: `E_i` sums the one effect per POVM on path `i`, and
/// `G(i) = (E_i - I)/d`. The report carries the SIC-system trace
/// checks, the minimum eigenvalue over all G(i), and a positivity
/// check at `tolerance` deciding the "sic" verdict.
pub fn reconstruct_sic_system(
    marginals: &[OperatorFamily],
    paths: &PathSystem,
    tolerance: f64,
) -> Result<(OperatorFamily, VerificationReport)> {
    let d = paths.order();
    if marginals.len() != d + 1 || marginals.iter().any(|m| m.len() != d || m.dim() != d) {
        return Err(Error::WrongFamilySize {
            expected: d + 1,
            expected_outcomes: d,
            got: marginals.len(),
        });
    }
    // The recovery formula needs the overlap identities upstream.
    let df = d as f64;
    for (k, a) in marginals.iter().enumerate() {
        for (i, e) in a.members().iter().enumerate() {
            for f in &a.members()[i + 1..] {
                let o = hs_inner_raw(e.matrix(), f.matrix()).re;
                if (o - 1.0 / (df + 1.0)).abs() > tol::DEFAULT {
                    return Err(Error::IdentityViolation(format!(
                        "same-POVM overlap {o} in POVM {k}, need {}",
                        1.0 / (df + 1.0)
                    )));
                }
            }
            for b in &marginals[k + 1..] {
                for f in b.members() {
                    let o = hs_inner_raw(e.matrix(), f.matrix()).re;
                    if (o - 1.0 / df).abs() > tol::DEFAULT {
                        return Err(Error::IdentityViolation(format!(
                            "cross overlap {o}, need {}",
                            1.0 / df
                        )));
                    }
                }
            }
        }
    }

    let members = reconstruct_raw(marginals, paths);
    let family = OperatorFamily::with_default_labels(FamilyKind::SicSystem, members)?;
    let mut report = family.verify(tolerance);
    let min_eig = family
        .members()
        .iter()
        .map(|m| m.min_eigenvalue())
        .fold(f64::INFINITY, f64::min);
    report.check_with(
        "sic: min eigenvalue over all G(i)",
        0.0,
        min_eig,
        (-min_eig).max(0.0),
        tolerance,
    );
    Ok((family, report))
}

/// The path sums `G(i) = (E_i - I)/d` without validation.
fn reconstruct_raw(marginals: &[OperatorFamily], paths: &PathSystem) -> Vec<HermitianOperator> {
    let d = paths.order();
    let eye: CMat = CMat::identity(d, d);
    paths
        .paths()
        .iter()
        .map(|path| {
            let e_i = path
                .iter()
                .enumerate()
                .fold(CMat::zeros(d, d), |acc, (k, &nu)| {
                    acc + marginals[k].member(nu).matrix()
                });
            HermitianOperator::new((e_i - &eye) / C64::new(d as f64, 0.0))
                .expect("real combination of Hermitian operators")
        })
        .collect()
}

/// How the smearing search parametrizes its circulants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmearingParametrization {
    /// One circulant applied to every basis.
    SingleCirculant,
    /// An independent circulant per basis.
    PerBasisCirculant,
}

/// Result of [`search_positive_smearing`].
#[derive(Debug, Clone)]
pub struct SmearingSearch {
    pub parametrization: SmearingParametrization,
    /// Optimal phases, one vector per smearing matrix.
    pub parameters: Vec<Vec<f64>>,
    pub smearings: Vec<SmearingMatrix>,
    /// Largest achieved minimum eigenvalue of the reconstructed G(i).
    pub min_eigenvalue: f64,
    pub reconstructed: OperatorFamily,
    /// Whether `min_eigenvalue >= -1e-9`.
    pub is_sic: bool,
    /// Coarse-scan trace of (phase, objective) pairs for the report.
    pub trace: Vec<(f64, f64)>,
    /// For d = 2, the binary smearing parameter of the optimum.
    pub qubit_lambda: Option<f64>,
}

/// Search the circulant smearings satisfying the sphere/overlap row
/// conditions for one maximizing the minimum eigenvalue of the
/// reconstructed G(i). The feasible set is parametrized by spectrum
/// phases (plus a sign for even d); the scan grid and descent are
/// deterministic for a given seed.
pub fn search_positive_smearing(
    mubs: &[OperatorFamily],
    paths: &PathSystem,
    parametrization: SmearingParametrization,
    seed: u64,
) -> Result<SmearingSearch> {
    let d = paths.order();
    if mubs.len() != d + 1 || mubs.iter().any(|m| m.len() != d || m.dim() != d) {
        return Err(Error::WrongFamilySize {
            expected: d + 1,
            expected_outcomes: d,
            got: mubs.len(),
        });
    }
    let m = circulant_phase_count(d);
    let signs: Vec<f64> = if d % 2 == 0 {
        vec![1.0, -1.0]
    } else {
        vec![1.0]
    };
    let n_matrices = match parametrization {
        SmearingParametrization::SingleCirculant => 1,
        SmearingParametrization::PerBasisCirculant => d + 1,
    };

    // Objective: min eigenvalue of the reconstruction, or -inf when
    // some circulant leaves the doubly stochastic polytope.
    let objective = |phases: &[Vec<f64>], sign: f64| -> f64 {
        let smeared: Option<Vec<Vec<HermitianOperator>>> = mubs
            .iter()
            .enumerate()
            .map(|(k, pvm)| {
                let ph = &phases[k.min(phases.len() - 1)];
                let row = circulant_row_from_phases(d, ph, sign);
                if row.iter().any(|&x| !(-1e-12..=1.0 + 1e-12).contains(&x)) {
                    return None;
                }
                let lam = SmearingMatrix::circulant(&row).ok()?;
                Some(smear_members(pvm, &lam))
            })
            .collect();
        match smeared {
            None => f64::NEG_INFINITY,
            Some(families) => {
                let eye: CMat = CMat::identity(d, d);
                paths
                    .paths()
                    .iter()
                    .map(|path| {
                        let e_i =
                            path.iter()
                                .enumerate()
                                .fold(CMat::zeros(d, d), |acc, (k, &nu)| {
                                    acc + families[k][nu].matrix()
                                });
                        let g = (e_i - &eye) / C64::new(d as f64, 0.0);
                        g.symmetric_eigen()
                            .eigenvalues
                            .iter()
                            .cloned()
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<Vec<f64>>, f64, f64)> = None; // phases, sign, value
    let mut trace: Vec<(f64, f64)> = Vec::new();

    for &sign in &signs {
        if m == 0 {
            let phases = vec![vec![]; n_matrices];
            let value = objective(&phases, sign);
            trace.push((sign, value));
            if best.as_ref().is_none_or(|b| value > b.2) {
                best = Some((phases, sign, value));
            }
            continue;
        }
        // Seeded multistart coordinate descent: coarse scan per
        // coordinate, then golden-section refinement.
        let restarts = if n_matrices * m == 1 { 1 } else { 6 };
        for restart in 0..restarts {
            let mut phases: Vec<Vec<f64>> = (0..n_matrices)
                .map(|_| {
                    (0..m)
                        .map(|_| {
                            if restart == 0 {
                                0.0
                            } else {
                                rng.random::<f64>() * std::f64::consts::TAU
                            }
                        })
                        .collect()
                })
                .collect();
            let mut value = objective(&phases, sign);
            for sweep in 0..12 {
                let mut improved = false;
                for mi in 0..n_matrices {
                    for pi in 0..m {
                        let (phi, val) = line_search(
                            |x| {
                                let mut ph = phases.clone();
                                ph[mi][pi] = x;
                                objective(&ph, sign)
                            },
                            if restart == 0 && sweep == 0 && mi == 0 && pi == 0 {
                                Some(&mut trace)
                            } else {
                                None
                            },
                        );
                        if val > value + 1e-14 {
                            phases[mi][pi] = phi;
                            value = val;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            if best.as_ref().is_none_or(|b| value > b.2) {
                best = Some((phases, sign, value));
            }
        }
    }

    let (phases, sign, min_eig) = best.expect("at least one candidate evaluated");
    let smearings: Vec<SmearingMatrix> = (0..n_matrices)
        .map(|k| {
            SmearingMatrix::circulant_from_phases(d, &phases[k], sign)
                .expect("optimum lies in the polytope")
        })
        .collect();
    let smeared: Vec<OperatorFamily> = mubs
        .iter()
        .enumerate()
        .map(|(k, pvm)| smear(pvm, &smearings[k.min(smearings.len() - 1)]))
        .collect::<Result<Vec<_>>>()?;
    let (reconstructed, _) = reconstruct_sic_system(&smeared, paths, tol::DEFAULT)?;
    let qubit_lambda = (d == 2).then(|| {
        let r = &smearings[0].rows()[0];
        r[0] - r[1]
    });
    Ok(SmearingSearch {
        parametrization,
        parameters: phases,
        smearings,
        min_eigenvalue: min_eig,
        reconstructed,
        is_sic: min_eig >= -1e-9,
        trace,
        qubit_lambda,
    })
}

/// Coarse scan over [0, tau) then golden-section refinement around the
/// best sample.
fn line_search(f: impl Fn(f64) -> f64, mut trace: Option<&mut Vec<(f64, f64)>>) -> (f64, f64) {
    const SAMPLES: usize = 360;
    let tau = std::f64::consts::TAU;
    let mut best_x = 0.0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..SAMPLES {
        let x = tau * i as f64 / SAMPLES as f64;
        let v = f(x);
        if let Some(t) = trace.as_deref_mut() {
            t.push((x, v));
        }
        if v > best_v {
            best_v = v;
            best_x = x;
        }
    }
    let step = tau / SAMPLES as f64;
    let (mut a, mut b) = (best_x - step, best_x + step);
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    if fm >= best_v {
        (mid, fm)
    } else {
        (best_x, best_v)
    }
}

fn smear_members(pvm: &OperatorFamily, lambda: &SmearingMatrix) -> Vec<HermitianOperator> {
    lambda
        .rows()
        .iter()
        .map(|row| {
            let m = row
                .iter()
                .zip(pvm.members())
                .fold(DMatrix::zeros(pvm.dim(), pvm.dim()), |acc: CMat, (&w, p)| {
                    acc + p.matrix() * C64::new(w, 0.0)
                });
            HermitianOperator::new(m).expect("convex combination of Hermitian operators")
        })
        .collect()
}

/// Match the columns of two orthonormal bases up to phase and
/// permutation: pair columns greedily by overlap and return the
/// permutation (`a` column `i` pairs with `b` column `perm[i]`)
/// together with the worst `|<a_i|b_perm(i)>|^2` distance from 1.
pub fn match_bases(a: &CMat, b: &CMat) -> (Vec<usize>, f64) {
    let d = a.ncols();
    let overlaps = a.adjoint() * b;
    let mut perm = vec![usize::MAX; d];
    let mut used_row = vec![false; d];
    let mut used_col = vec![false; d];
    for _ in 0..d {
        let mut best = (0usize, 0usize, f64::NEG_INFINITY);
        for i in 0..d {
            if used_row[i] {
                continue;
            }
            for j in 0..d {
                if used_col[j] {
                    continue;
                }
                let o = overlaps[(i, j)].norm_sqr();
                if o > best.2 {
                    best = (i, j, o);
                }
            }
        }
        perm[best.0] = best.1;
        used_row[best.0] = true;
        used_col[best.1] = true;
    }
    let worst = (0..d)
        .map(|i| (overlaps[(i, perm[i])].norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max);
    (perm, worst)
}

/// Qubit constructions: the tetrahedron SIC, the Pauli MUBs, and the
/// partitions and paths of the binary bridge.
pub mod qubit {
    use super::*;
    use crate::combin::{cartesian_and_diagonal_partitions, dualize_to_path_system};

    pub fn pauli_x() -> CMat {
        CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        )
    }

    pub fn pauli_y() -> CMat {
        CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        )
    }

    pub fn pauli_z() -> CMat {
        CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(-1.0, 0.0),
            ],
        )
    }

    /// `v . sigma` for a Bloch vector.
    pub fn bloch(v: [f64; 3]) -> CMat {
        pauli_x() * C64::new(v[0], 0.0)
            + pauli_y() * C64::new(v[1], 0.0)
            + pauli_z() * C64::new(v[2], 0.0)
    }

    /// Unit vectors to the vertices of the regular tetrahedron.
    pub fn tetrahedron_directions() -> [[f64; 3]; 4] {
        let s = 1.0 / 3.0_f64.sqrt();
        [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]
    }

    /// The tetrahedron SIC `G(k) = (I + s_k . sigma) / 4`.
    pub fn tetrahedron_sic() -> OperatorFamily {
        let eye = CMat::identity(2, 2);
        let members = tetrahedron_directions()
            .iter()
            .map(|&s| {
                HermitianOperator::new((&eye + bloch(s)) * C64::new(0.25, 0.0))
                    .expect("Bloch effects are Hermitian")
            })
            .collect();
        OperatorFamily::with_default_labels(FamilyKind::SicCandidate, members)
            .expect("four qubit effects")
    }

    /// The three Pauli eigenbasis PVMs `P^k(+-) = (I +- n_k.sigma)/2`
    /// with outcome order (+, -), for n in {x, y, z}.
    pub fn pauli_mub_pvms() -> Vec<OperatorFamily> {
        let eye = CMat::identity(2, 2);
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
            .iter()
            .map(|&n| {
                let plus = HermitianOperator::new((&eye + bloch(n)) * C64::new(0.5, 0.0)).unwrap();
                let minus = HermitianOperator::new((&eye - bloch(n)) * C64::new(0.5, 0.0)).unwrap();
                OperatorFamily::new(
                    FamilyKind::PvmCandidate,
                    vec![plus, minus],
                    vec!["+".into(), "-".into()],
                )
                .unwrap()
            })
            .collect()
    }

    /// The three binary partitions pairing the tetrahedron elements:
    /// rows {01|23}, columns {02|13}, diagonals {03|12}.
    pub fn partitions() -> Vec<Partition> {
        cartesian_and_diagonal_partitions(2).to_vec()
    }

    /// The 3 x 2 path system dual to [`partitions`].
    pub fn path_system() -> PathSystem {
        dualize_to_path_system(&partitions()).expect("qubit partitions are a complete family")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::max_abs_diff;

    #[test]
    fn tetrahedron_is_a_sic() {
        let sic = qubit::tetrahedron_sic();
        let report = sic.verify(tol::DEFAULT);
        assert!(report.passed(), "{}", report.to_markdown());
    }

    #[test]
    fn tetrahedron_marginals_match_bloch_form() {
        // Marginals of the tetrahedron along the three binary
        // partitions are (I +- m_k.sigma)/2 with m_k.m_l = delta/3.
        let sic = qubit::tetrahedron_sic();
        let marginals = marginalize(&sic, &qubit::partitions()).unwrap();
        assert_eq!(marginals.povms.len(), 3);
        let s = qubit::tetrahedron_directions();
        let expected_axes: [[f64; 3]; 3] = [
            std::array::from_fn(|i| (s[0][i] + s[1][i]) / 2.0),
            std::array::from_fn(|i| (s[0][i] + s[2][i]) / 2.0),
            std::array::from_fn(|i| (s[0][i] + s[3][i]) / 2.0),
        ];
        let eye = CMat::identity(2, 2);
        for (k, povm) in marginals.povms.iter().enumerate() {
            let m = expected_axes[k];
            // |m_k| = 1/sqrt(3)
            let norm: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0 / 3.0_f64.sqrt()).abs() < 1e-12);
            let expect_plus = (&eye + qubit::bloch(m)) * C64::new(0.5, 0.0);
            assert!(max_abs_diff(povm.member(0).matrix(), &expect_plus) < 1e-12);
            for l in k + 1..3 {
                let dot: f64 = m.iter().zip(&expected_axes[l]).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-12);
            }
        }
        let report = verify_mu_identities(&marginals, 1e-10);
        assert!(report.passed(), "{}", report.to_markdown());
    }

    #[test]
    fn marginalize_rejects_wrong_bin_size() {
        let sic = qubit::tetrahedron_sic();
        let bad = Partition::rows(3); // 9 cells for a 4-outcome SIC
        assert!(matches!(
            marginalize(&sic, &[bad]),
            Err(Error::BadPartition(_))
        ));
    }

    #[test]
    fn mu_identities_fail_for_uniform_povm() {
        // A single flat POVM violates the self-overlap identity:
        // tr[(I/d)^2] = 1/d != 2/(d+1).
        let d = 3;
        let member =
            HermitianOperator::new(CMat::identity(d, d) / C64::new(d as f64, 0.0)).unwrap();
        let povm =
            OperatorFamily::with_default_labels(FamilyKind::PovmCandidate, vec![member; d])
                .unwrap();
        let set = MarginalSet::from_povms(vec![povm], "uniform");
        let report = verify_mu_identities(&set, tol::DEFAULT);
        assert!(!report.passed());
        assert!(!report.find("self-overlap tr[E^2] = 2/(d+1)").unwrap().pass);
        // Gram rank is 1, not d
        assert!(
            !report
                .find("linear independence: min Gram rank")
                .unwrap()
                .pass
        );
    }

    #[test]
    fn cross_overlap_detects_one_overlap_violation() {
        // Marginals over rows vs rows reuse the same bins, so the
        // cross overlap equals the self/same values, not 1/d.
        let sic = qubit::tetrahedron_sic();
        let rows = Partition::rows(2);
        let marginals = marginalize(&sic, &[rows.clone(), rows]).unwrap();
        let report = verify_mu_identities(&marginals, tol::DEFAULT);
        assert!(
            !report
                .find("cross-POVM overlap tr[E^k E^l] = 1/d")
                .unwrap()
                .pass
        );
    }

    #[test]
    fn smearing_identity_returns_pvm() {
        let pvms = qubit::pauli_mub_pvms();
        let id = SmearingMatrix::identity(2);
        let out = smear(&pvms[0], &id).unwrap();
        for (a, b) in out.members().iter().zip(pvms[0].members()) {
            assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-15);
        }
    }

    #[test]
    fn binary_smearing_matches_bloch_shrink() {
        // E(+-) = (1 +- lambda n.sigma)/2 for the binary smearing.
        let lambda = 1.0 / 3.0_f64.sqrt();
        let lam = SmearingMatrix::binary(lambda).unwrap();
        let povm = smear(&qubit::pauli_mub_pvms()[0], &lam).unwrap();
        let eye = CMat::identity(2, 2);
        let expect = (&eye + qubit::bloch([lambda, 0.0, 0.0])) * C64::new(0.5, 0.0);
        assert!(max_abs_diff(povm.member(0).matrix(), &expect) < 1e-14);
        assert!(povm.verify(tol::DEFAULT).passed());
    }

    #[test]
    fn d3_circulant_smearing_is_unit_trace_povm() {
        let lam = SmearingMatrix::circulant(&[0.5, 0.5, 0.0]).unwrap();
        let members: Vec<HermitianOperator> = (0..3)
            .map(|i| {
                let mut m = CMat::zeros(3, 3);
                m[(i, i)] = C64::new(1.0, 0.0);
                HermitianOperator::new(m).unwrap()
            })
            .collect();
        let pvm = OperatorFamily::with_default_labels(FamilyKind::PvmCandidate, members).unwrap();
        let povm = smear(&pvm, &lam).unwrap();
        assert!(povm.verify(tol::DEFAULT).passed());
        for m in povm.members() {
            assert!((m.trace() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn non_doubly_stochastic_rejected() {
        assert!(matches!(
            SmearingMatrix::new(vec![vec![0.9, 0.1], vec![0.9, 0.1]]),
            Err(Error::NotDoublyStochastic(_))
        ));
        assert!(matches!(
            SmearingMatrix::new(vec![vec![1.1, -0.1], vec![-0.1, 1.1]]),
            Err(Error::NotDoublyStochastic(_))
        ));
    }

    #[test]
    fn simplex_check_examples() {
        // d = 2, binary smearing at lambda = 1/sqrt(3):
        // |r|^2 = 1/6 and cosine -1.
        let lam = SmearingMatrix::binary(1.0 / 3.0_f64.sqrt()).unwrap();
        let report = simplex_check(&lam).unwrap();
        assert!(report.passed(), "{}", report.to_markdown());
        assert!(
            (report
                .find("centered row length |r|^2 = (d-1)/(d(d+1))")
                .unwrap()
                .observed
                - 1.0 / 6.0)
                .abs()
                < 1e-12
        );
        assert!(
            (report.find("pairwise cosine -1/(d-1)").unwrap().observed + 1.0).abs() < 1e-12
        );

        // d = 3 circulant (1/2, 1/2, 0): |r|^2 = 1/6, cosine -1/2.
        let lam = SmearingMatrix::circulant(&[0.5, 0.5, 0.0]).unwrap();
        let report = simplex_check(&lam).unwrap();
        assert!(report.passed());
        assert!(
            (report
                .find("centered row length |r|^2 = (d-1)/(d(d+1))")
                .unwrap()
                .observed
                - 1.0 / 6.0)
                .abs()
                < 1e-12
        );
        assert!(
            (report.find("pairwise cosine -1/(d-1)").unwrap().observed + 0.5).abs() < 1e-12
        );

        // uniform rows violate the sphere condition
        let third = 1.0 / 3.0;
        let uniform = SmearingMatrix::new(vec![vec![third; 3]; 3]).unwrap();
        assert!(matches!(
            simplex_check(&uniform),
            Err(Error::RowsNotOnSphere(_))
        ));
    }

    #[test]
    fn qubit_round_trip_through_paths() {
        // tetrahedron -> marginals -> path reconstruction recovers the
        // tetrahedron entrywise.
        let sic = qubit::tetrahedron_sic();
        let marginals = marginalize(&sic, &qubit::partitions()).unwrap();
        let paths = qubit::path_system();
        let (recon, report) = reconstruct_sic_system(&marginals.povms, &paths, 1e-9).unwrap();
        assert!(report.passed(), "{}", report.to_markdown());
        for (a, b) in recon.members().iter().zip(sic.members()) {
            assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-12);
        }
        // and it is a genuine SIC
        assert!(recon
            .with_kind(FamilyKind::SicCandidate)
            .verify(1e-9)
            .passed());
    }

    #[test]
    fn wrong_smearing_parameter_violates_identities() {
        let pvms = qubit::pauli_mub_pvms();
        let lam = SmearingMatrix::binary(0.9).unwrap();
        let povms: Vec<OperatorFamily> = pvms.iter().map(|p| smear(p, &lam).unwrap()).collect();
        assert!(matches!(
            reconstruct_sic_system(&povms, &qubit::path_system(), 1e-9),
            Err(Error::IdentityViolation(_))
        ));
    }

    #[test]
    fn extract_mubs_recovers_pauli_bases() {
        let sic = qubit::tetrahedron_sic();
        let marginals = marginalize(&sic, &qubit::partitions()).unwrap();
        let (bases, report) = extract_mubs(&marginals, 1e-9).unwrap();
        assert!(report.passed(), "{}", report.to_markdown());
        assert_eq!(bases.len(), 3);
        // each basis diagonalizes the corresponding Pauli operator
        let paulis = [qubit::pauli_x(), qubit::pauli_y(), qubit::pauli_z()];
        for (basis, sigma) in bases.iter().zip(&paulis) {
            let diag = basis.adjoint() * sigma * basis;
            let off = (diag[(0, 1)].norm()).max(diag[(1, 0)].norm());
            assert!(off < 1e-10, "off-diagonal {off}");
        }
    }

    #[test]
    fn extract_mubs_rejects_noncommuting_members() {
        let x = HermitianOperator::new(
            (qubit::pauli_x() + CMat::identity(2, 2)) * C64::new(0.5, 0.0),
        )
        .unwrap();
        let z = HermitianOperator::new(
            (qubit::pauli_z() + CMat::identity(2, 2)) * C64::new(0.5, 0.0),
        )
        .unwrap();
        let povm =
            OperatorFamily::with_default_labels(FamilyKind::PovmCandidate, vec![x, z]).unwrap();
        let set = MarginalSet::from_povms(vec![povm], "synthetic");
        assert!(matches!(
            extract_mubs(&set, 1e-9),
            Err(Error::NotCommuting(_, _))
        ));
    }

    #[test]
    fn smeared_mu_pvms_are_mu_povms_for_any_doubly_stochastic() {
        // The forward direction does not rely on the sphere/overlap
        // conditions: any doubly stochastic smearing of MU PVMs gives
        // MU POVMs.
        let pvms = qubit::pauli_mub_pvms();
        let arbitrary = SmearingMatrix::new(vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        let povms: Vec<OperatorFamily> =
            pvms.iter().map(|p| smear(p, &arbitrary).unwrap()).collect();
        for (k, a) in povms.iter().enumerate() {
            for b in &povms[k + 1..] {
                for ea in a.members() {
                    for eb in b.members() {
                        let o = hs_inner_raw(ea.matrix(), eb.matrix()).re;
                        assert!((o - 0.5).abs() < 1e-12);
                    }
                }
            }
        }
        // Conversely, column-stochastic weights without unit row sums
        // still give POVMs (the effects sum to I) but with non-unit
        // traces, and mutual unbiasedness breaks.
        let col_only = [vec![1.0, 0.6], vec![0.0, 0.4]];
        let povms: Vec<Vec<HermitianOperator>> = pvms
            .iter()
            .map(|p| {
                col_only
                    .iter()
                    .map(|row| {
                        let m = row.iter().zip(p.members()).fold(
                            CMat::zeros(2, 2),
                            |acc: CMat, (&w, q)| acc + q.matrix() * C64::new(w, 0.0),
                        );
                        HermitianOperator::new(m).unwrap()
                    })
                    .collect()
            })
            .collect();
        // still a POVM per family
        for fam in &povms {
            let sum = fam[0].matrix() + fam[1].matrix();
            assert!(max_abs_diff(&sum, &CMat::identity(2, 2)) < 1e-14);
        }
        // non-unit trace effect, cross overlap away from 1/d
        assert!((povms[0][0].trace() - 1.6).abs() < 1e-14);
        let o = hs_inner_raw(povms[0][0].matrix(), povms[1][0].matrix()).re;
        assert!((o - 0.5).abs() > 1e-3);
    }

    #[test]
    fn qubit_search_finds_inverse_sqrt3() {
        let search = search_positive_smearing(
            &qubit::pauli_mub_pvms(),
            &qubit::path_system(),
            SmearingParametrization::SingleCirculant,
            1,
        )
        .unwrap();
        let lambda = search.qubit_lambda.unwrap();
        assert!(
            (lambda.abs() - 1.0 / 3.0_f64.sqrt()).abs() < 1e-6,
            "lambda = {lambda}"
        );
        assert!(search.is_sic);
        assert!(search.min_eigenvalue >= -1e-9);
        assert!(search
            .reconstructed
            .with_kind(FamilyKind::SicCandidate)
            .verify(1e-9)
            .passed());
    }

    #[test]
    fn match_bases_identifies_permuted_phased_copies() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = 3;
        let mut a = CMat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                a[(i, j)] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
        }
        let q = a.qr().q();
        // permute columns (0->2, 1->0, 2->1) and phase them
        let perm = [2usize, 0, 1];
        let mut b = CMat::zeros(d, d);
        for (i, &pi) in perm.iter().enumerate() {
            let phase = C64::new(0.0, 0.3 * (i as f64 + 1.0)).exp();
            b.set_column(pi, &(q.column(i) * phase));
        }
        let (found, worst) = match_bases(&q, &b);
        assert_eq!(found, vec![2, 0, 1]);
        assert!(worst < 1e-12);
    }
}
