//! Dense complex operators, POVM/PVM/SIC verification, and
//! simultaneous diagonalization of commuting Hermitian families.
//!
//! A SIC in dimension d is a d^2-outcome POVM G with
//! `tr[G(k)G(l)] = 1/(d^2(d+1))` for k != l and `tr[G(k)^2] = 1/d^2`;
//! these imply `tr[G(k)] = 1/d` and that each `d G(k)` is a rank-1
//! projection. Dropping positivity but keeping the trace identities
//! and the normalization `sum G(i) = I` gives a *SIC system*.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::report::VerificationReport;
use crate::tol;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Largest entry magnitude of a matrix.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Entrywise distance `max |a - b|`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b))
}

/// `tr(A^dag B)`, the Hilbert-Schmidt inner product.
pub fn hs_inner_raw(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Commutator norm `max |AB - BA|`.
pub fn commutator_norm(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a * b - b * a))
}

/// A validated Hermitian d x d operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMat,
}

impl HermitianOperator {
    /// Wrap a matrix, requiring `max |A - A^dag|` within the
    /// hermiticity tolerance. The stored matrix is symmetrized so
    /// later eigendecompositions see an exactly Hermitian input.
    pub fn new(mat: CMat) -> Result<HermitianOperator> {
        if !mat.is_square() {
            return Err(Error::DimMismatch {
                a: mat.nrows(),
                b: mat.ncols(),
            });
        }
        let defect = max_abs_diff(&mat, &mat.adjoint());
        if defect > tol::HERMITICITY {
            return Err(Error::NotHermitian(defect));
        }
        let sym = (&mat + mat.adjoint()) * C64::new(0.5, 0.0);
        Ok(HermitianOperator { mat: sym })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Ascending eigenvalues (real, since the operator is Hermitian).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut evs: Vec<f64> = self
            .mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        evs.sort_by(f64::total_cmp);
        evs
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

/// What a family of operators claims to be; decides which checks
/// [`OperatorFamily::verify`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    PovmCandidate,
    PvmCandidate,
    SicCandidate,
    SicSystem,
}

impl FamilyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyKind::PovmCandidate => "povm-candidate",
            FamilyKind::PvmCandidate => "pvm-candidate",
            FamilyKind::SicCandidate => "sic-candidate",
            FamilyKind::SicSystem => "sic-system",
        }
    }

    pub fn parse(s: &str) -> Result<FamilyKind> {
        match s {
            "povm-candidate" => Ok(FamilyKind::PovmCandidate),
            "pvm-candidate" => Ok(FamilyKind::PvmCandidate),
            "sic-candidate" => Ok(FamilyKind::SicCandidate),
            "sic-system" => Ok(FamilyKind::SicSystem),
            other => Err(Error::SchemaViolation(format!("unknown kind {other:?}"))),
        }
    }
}

/// An ordered family of Hermitian operators with outcome labels.
#[derive(Debug, Clone)]
pub struct OperatorFamily {
    kind: FamilyKind,
    members: Vec<HermitianOperator>,
    labels: Vec<String>,
}

impl OperatorFamily {
    pub fn new(
        kind: FamilyKind,
        members: Vec<HermitianOperator>,
        labels: Vec<String>,
    ) -> Result<OperatorFamily> {
        if members.is_empty() {
            return Err(Error::SchemaViolation("empty family".into()));
        }
        let dim = members[0].dim();
        if let Some(m) = members.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimMismatch { a: dim, b: m.dim() });
        }
        if labels.len() != members.len() {
            return Err(Error::SchemaViolation(format!(
                "{} labels for {} members",
                labels.len(),
                members.len()
            )));
        }
        Ok(OperatorFamily {
            kind,
            members,
            labels,
        })
    }

    /// Family with outcome labels "0", "1", ...
    pub fn with_default_labels(
        kind: FamilyKind,
        members: Vec<HermitianOperator>,
    ) -> Result<OperatorFamily> {
        let labels = (0..members.len()).map(|i| i.to_string()).collect();
        OperatorFamily::new(kind, members, labels)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[HermitianOperator] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &HermitianOperator {
        &self.members[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Reinterpret the same members under another kind.
    pub fn with_kind(&self, kind: FamilyKind) -> OperatorFamily {
        OperatorFamily {
            kind,
            members: self.members.clone(),
            labels: self.labels.clone(),
        }
    }

    /// Sum of all members.
    pub fn sum(&self) -> CMat {
        let d = self.dim();
        self.members
            .iter()
            .fold(CMat::zeros(d, d), |acc, m| acc + m.matrix())
    }

    /// Run the checks appropriate to the family kind. Trace-identity
    /// style checks use `tolerance`; positivity uses the dedicated
    /// slack.
    pub fn verify(&self, tolerance: f64) -> VerificationReport {
        let d = self.dim() as f64;
        let mut report = VerificationReport::new(tolerance);

        let eye = CMat::identity(self.dim(), self.dim());
        report.check(
            "normalization: max |sum E - I|",
            0.0,
            max_abs_diff(&self.sum(), &eye),
        );

        match self.kind {
            FamilyKind::PovmCandidate => {
                self.check_positivity(&mut report);
            }
            FamilyKind::PvmCandidate => {
                let mut idem: f64 = 0.0;
                let mut ortho: f64 = 0.0;
                for (i, m) in self.members.iter().enumerate() {
                    let p = m.matrix();
                    idem = idem.max(max_abs_diff(&(p * p), p));
                    for other in &self.members[i + 1..] {
                        ortho = ortho.max(max_abs(&(p * other.matrix())));
                    }
                }
                report.check("idempotence: max |P^2 - P|", 0.0, idem);
                report.check("orthogonality: max |P_i P_j|, i != j", 0.0, ortho);
            }
            FamilyKind::SicCandidate | FamilyKind::SicSystem => {
                report.check("outcome count d^2", d * d, self.members.len() as f64);
                self.check_sic_traces(&mut report);
                if self.kind == FamilyKind::SicCandidate {
                    self.check_positivity(&mut report);
                    // tr[(dG)^3] = 1 forces each dG to be a rank-1
                    // projection once the trace identities hold.
                    let mut worst = 0.0f64;
                    let mut worst_dev = -1.0f64;
                    for m in &self.members {
                        let dg = m.matrix() * C64::new(d, 0.0);
                        let cube = (&dg * &dg * &dg).trace().re;
                        if (cube - 1.0).abs() > worst_dev {
                            worst_dev = (cube - 1.0).abs();
                            worst = cube;
                        }
                    }
                    report.check("cubic trace tr[(dG)^3]", 1.0, worst);
                }
            }
        }
        report
    }

    fn check_positivity(&self, report: &mut VerificationReport) {
        let min_eig = self
            .members
            .iter()
            .map(|m| m.min_eigenvalue())
            .fold(f64::INFINITY, f64::min);
        report.check_with(
            "positivity: min eigenvalue",
            0.0,
            min_eig,
            (-min_eig).max(0.0),
            tol::POSITIVITY,
        );
    }

    fn check_sic_traces(&self, report: &mut VerificationReport) {
        let d = self.dim() as f64;
        let mut worst_tr = f64::NEG_INFINITY;
        let mut dev_tr = -1.0f64;
        let mut worst_self = f64::NEG_INFINITY;
        let mut dev_self = -1.0f64;
        let mut worst_pair = f64::NEG_INFINITY;
        let mut dev_pair = -1.0f64;
        for (i, m) in self.members.iter().enumerate() {
            let t = m.trace();
            if (t - 1.0 / d).abs() > dev_tr {
                dev_tr = (t - 1.0 / d).abs();
                worst_tr = t;
            }
            let s = hs_inner_raw(m.matrix(), m.matrix()).re;
            if (s - 1.0 / (d * d)).abs() > dev_self {
                dev_self = (s - 1.0 / (d * d)).abs();
                worst_self = s;
            }
            for other in &self.members[i + 1..] {
                let o = hs_inner_raw(m.matrix(), other.matrix()).re;
                if (o - 1.0 / (d * d * (d + 1.0))).abs() > dev_pair {
                    dev_pair = (o - 1.0 / (d * d * (d + 1.0))).abs();
                    worst_pair = o;
                }
            }
        }
        report.check("trace tr[G] = 1/d", 1.0 / d, worst_tr);
        report.check("self-overlap tr[G^2] = 1/d^2", 1.0 / (d * d), worst_self);
        report.check(
            "pairwise overlap tr[G(k)G(l)] = 1/(d^2(d+1))",
            1.0 / (d * d * (d + 1.0)),
            worst_pair,
        );
    }
}

/// `tr(A^dag B)` with a dimension check.
pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            a: a.dim(),
            b: b.dim(),
        });
    }
    Ok(hs_inner_raw(a.matrix(), b.matrix()))
}

/// Rank of the Hilbert-Schmidt Gram matrix of the members; equals d^2
/// exactly when the family spans the operator space.
pub fn gram_rank(members: &[HermitianOperator], tolerance: f64) -> usize {
    let n = members.len();
    let mut gram = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = hs_inner_raw(members[i].matrix(), members[j].matrix());
        }
    }
    let evs = gram.symmetric_eigen().eigenvalues;
    let max_ev = evs.iter().cloned().fold(0.0, f64::max);
    evs.iter()
        .filter(|&&e| e > tolerance * max_ev.max(1.0))
        .count()
}

/// Shift a SIC into the orthogonal operator basis `d G(k) - t I` with
/// `t = (1/d)(1 - 1/sqrt(d+1))`, and report the pairwise
/// Hilbert-Schmidt inner products of the shifted operators, which all
/// vanish.
pub fn sic_orthogonal_basis(
    family: &OperatorFamily,
) -> Result<(Vec<HermitianOperator>, VerificationReport)> {
    let check = family.with_kind(FamilyKind::SicSystem).verify(tol::DEFAULT);
    if !check.passed() {
        return Err(Error::NotASic(check.worst_deviation()));
    }
    let d = family.dim() as f64;
    let t = (1.0 - (1.0 / (d + 1.0)).sqrt()) / d;
    let eye = CMat::identity(family.dim(), family.dim());
    let shifted: Vec<HermitianOperator> = family
        .members()
        .iter()
        .map(|m| {
            HermitianOperator::new(m.matrix() * C64::new(d, 0.0) - &eye * C64::new(t, 0.0))
                .expect("shift of a Hermitian operator is Hermitian")
        })
        .collect();
    let mut report = VerificationReport::new(tol::DEFAULT);
    let mut worst = 0.0f64;
    for (i, a) in shifted.iter().enumerate() {
        for b in &shifted[i + 1..] {
            worst = worst.max(hs_inner_raw(a.matrix(), b.matrix()).norm());
        }
    }
    report.check("orthogonal basis: max |<dG-tI, dG-tI>|", 0.0, worst);
    Ok((shifted, report))
}

/// Joint eigendecomposition of pairwise commuting Hermitian operators.
///
/// Returns the orthonormal joint eigenbasis as matrix columns and the
/// eigenvalue matrix `lambda[nu][i]` of member `nu` on basis vector
/// `i`. Degenerate joint eigenspaces that survive every member are
/// resolved by a seed-fixed random Hermitian tie-breaker, and column
/// phases are normalized so the first significant component is real
/// positive, making the output deterministic.
pub fn simultaneous_diagonalize(
    members: &[HermitianOperator],
    tolerance: f64,
) -> Result<(CMat, Vec<Vec<f64>>)> {
    if members.is_empty() {
        return Err(Error::SchemaViolation("empty family".into()));
    }
    let d = members[0].dim();
    for (i, a) in members.iter().enumerate() {
        if a.dim() != d {
            return Err(Error::DimMismatch { a: d, b: a.dim() });
        }
        for b in &members[i + 1..] {
            let c = commutator_norm(a.matrix(), b.matrix());
            if c > tolerance {
                return Err(Error::NotCommuting(c, tolerance));
            }
        }
    }

    let cluster_eps = (100.0 * tolerance).max(1e-8);
    // Refine a partition of the space into joint eigenspaces, one
    // member at a time.
    let mut blocks: Vec<CMat> = vec![CMat::identity(d, d)];
    for m in members {
        blocks = split_blocks(&blocks, m.matrix(), cluster_eps);
    }
    // Resolve any residual degeneracy with a fixed-seed perturbation.
    if blocks.iter().any(|b| b.ncols() > 1) {
        let mut rng = ChaCha8Rng::seed_from_u64(0x51C);
        let tie_breaker = random_hermitian(d, &mut rng);
        blocks = split_all(&blocks, tie_breaker.matrix());
    }

    let mut columns: Vec<CVec> = Vec::with_capacity(d);
    for b in &blocks {
        for c in b.column_iter() {
            columns.push(normalize_phase(&c.into_owned()));
        }
    }
    debug_assert_eq!(columns.len(), d);
    // Deterministic column order: lexicographic by the eigenvalue
    // tuple across members.
    let mut keyed: Vec<(Vec<f64>, CVec)> = columns
        .into_iter()
        .map(|c| {
            let key = members
                .iter()
                .map(|m| (c.adjoint() * m.matrix() * &c)[(0, 0)].re)
                .collect();
            (key, c)
        })
        .collect();
    keyed.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let basis = CMat::from_columns(&keyed.iter().map(|(_, c)| c.clone()).collect::<Vec<_>>());

    let lambda: Vec<Vec<f64>> = members
        .iter()
        .map(|m| {
            (0..d)
                .map(|i| {
                    let col = basis.column(i);
                    (col.adjoint() * m.matrix() * col)[(0, 0)].re
                })
                .collect()
        })
        .collect();
    Ok((basis, lambda))
}

/// Split each block along the eigenspaces of `m` restricted to it,
/// clustering eigenvalues closer than `eps`.
fn split_blocks(blocks: &[CMat], m: &CMat, eps: f64) -> Vec<CMat> {
    let mut out = Vec::new();
    for b in blocks {
        if b.ncols() == 1 {
            out.push(b.clone());
            continue;
        }
        let s = b.adjoint() * m * b;
        let s = (&s + s.adjoint()) * C64::new(0.5, 0.0);
        let eig = s.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let mut cluster: Vec<usize> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for &i in &order {
            let ev = eig.eigenvalues[i];
            if !cluster.is_empty() && ev - last > eps {
                out.push(project_block(b, &eig.eigenvectors, &cluster));
                cluster.clear();
            }
            cluster.push(i);
            last = ev;
        }
        if !cluster.is_empty() {
            out.push(project_block(b, &eig.eigenvectors, &cluster));
        }
    }
    out
}

/// Fully split the blocks along `m`, ignoring clustering.
fn split_all(blocks: &[CMat], m: &CMat) -> Vec<CMat> {
    let mut out = Vec::new();
    for b in blocks {
        if b.ncols() == 1 {
            out.push(b.clone());
            continue;
        }
        let s = b.adjoint() * m * b;
        let s = (&s + s.adjoint()) * C64::new(0.5, 0.0);
        let eig = s.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        for &i in &order {
            out.push(project_block(b, &eig.eigenvectors, &[i]));
        }
    }
    out
}

fn project_block(b: &CMat, vecs: &CMat, cols: &[usize]) -> CMat {
    let picked = CMat::from_columns(
        &cols
            .iter()
            .map(|&i| vecs.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    b * picked
}

/// Fix the global phase so the first component with magnitude above
/// 1/(2 sqrt(d)) is real positive.
pub fn normalize_phase(v: &CVec) -> CVec {
    let d = v.len() as f64;
    let threshold = 0.5 / d.sqrt();
    let pivot = v
        .iter()
        .find(|z| z.norm() > threshold)
        .copied()
        .unwrap_or_else(|| {
            v.iter()
                .cloned()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .expect("nonempty vector")
        });
    let phase = pivot / pivot.norm();
    v * phase.conj()
}

/// Seeded random Hermitian matrix; adequate as a generic perturbation
/// or test input.
pub fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
    let mut m = CMat::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::new(rng.random::<f64>() - 0.5, 0.0);
        for j in i + 1..d {
            let z = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new(m).expect("constructed Hermitian")
}

/// Seeded random density matrix (positive, unit trace).
pub fn random_state(d: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
    let mut a = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
    }
    let rho = &a * a.adjoint();
    let tr = rho.trace().re;
    HermitianOperator::new(rho / C64::new(tr, 0.0)).expect("Gram matrix is Hermitian")
}

/// Seeded random pure state vector, unit norm.
pub fn random_unit_vector(d: usize, rng: &mut ChaCha8Rng) -> CVec {
    let mut v = CVec::zeros(d);
    for i in 0..d {
        v[i] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    }
    let n = v.norm();
    v / C64::new(n, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(d: usize, entries: &[(usize, usize, f64, f64)]) -> CMat {
        let mut m = CMat::zeros(d, d);
        for &(i, j, re, im) in entries {
            m[(i, j)] = C64::new(re, im);
        }
        m
    }

    fn sigma_x() -> CMat {
        cm(2, &[(0, 1, 1.0, 0.0), (1, 0, 1.0, 0.0)])
    }
    fn sigma_y() -> CMat {
        cm(2, &[(0, 1, 0.0, -1.0), (1, 0, 0.0, 1.0)])
    }
    fn sigma_z() -> CMat {
        cm(2, &[(0, 0, 1.0, 0.0), (1, 1, -1.0, 0.0)])
    }

    #[test]
    fn hermiticity_guard() {
        let bad = cm(2, &[(0, 1, 1.0, 0.0)]); // not Hermitian
        assert!(matches!(
            HermitianOperator::new(bad),
            Err(Error::NotHermitian(_))
        ));
        HermitianOperator::new(sigma_y()).unwrap();
    }

    #[test]
    fn hs_inner_examples() {
        // (I, I) in d = 3 gives 3
        let eye = HermitianOperator::new(CMat::identity(3, 3)).unwrap();
        assert!((hs_inner(&eye, &eye).unwrap().re - 3.0).abs() < 1e-15);
        // Pauli orthogonality
        let x = HermitianOperator::new(sigma_x()).unwrap();
        let y = HermitianOperator::new(sigma_y()).unwrap();
        assert!(hs_inner(&x, &y).unwrap().norm() < 1e-15);
        // conjugate symmetry on seeded random Hermitian pairs
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_hermitian(4, &mut rng);
            let b = random_hermitian(4, &mut rng);
            let ab = hs_inner(&a, &b).unwrap();
            let ba = hs_inner(&b, &a).unwrap();
            assert!((ab - ba.conj()).norm() < 1e-12);
        }
        // dimension mismatch
        let small = HermitianOperator::new(CMat::identity(2, 2)).unwrap();
        assert!(matches!(
            hs_inner(&eye, &small),
            Err(Error::DimMismatch { a: 3, b: 2 })
        ));
    }

    #[test]
    fn uniform_family_fails_normalization() {
        // d^2 copies of I/d sum to d*I, not I
        let d = 2;
        let member =
            HermitianOperator::new(CMat::identity(d, d) / C64::new(d as f64, 0.0)).unwrap();
        let fam =
            OperatorFamily::with_default_labels(FamilyKind::SicCandidate, vec![member; d * d])
                .unwrap();
        let report = fam.verify(tol::DEFAULT);
        assert!(!report.passed());
        let norm_check = report.find("normalization: max |sum E - I|").unwrap();
        assert!(!norm_check.pass);
    }

    #[test]
    fn pvm_checks() {
        let p0 = HermitianOperator::new(cm(2, &[(0, 0, 1.0, 0.0)])).unwrap();
        let p1 = HermitianOperator::new(cm(2, &[(1, 1, 1.0, 0.0)])).unwrap();
        let fam =
            OperatorFamily::with_default_labels(FamilyKind::PvmCandidate, vec![p0, p1]).unwrap();
        assert!(fam.verify(tol::DEFAULT).passed());
    }

    #[test]
    fn simultaneous_diagonalize_diagonal_family() {
        let a = HermitianOperator::new(cm(
            3,
            &[(0, 0, 1.0, 0.0), (1, 1, 2.0, 0.0), (2, 2, 3.0, 0.0)],
        ))
        .unwrap();
        let b = HermitianOperator::new(cm(
            3,
            &[(0, 0, 5.0, 0.0), (1, 1, 4.0, 0.0), (2, 2, 6.0, 0.0)],
        ))
        .unwrap();
        let (basis, lambda) = simultaneous_diagonalize(&[a, b], 1e-9).unwrap();
        // basis is the standard basis up to order/phase
        for i in 0..3 {
            let col = basis.column(i);
            let big: Vec<usize> = (0..3).filter(|&r| col[r].norm() > 0.5).collect();
            assert_eq!(big.len(), 1);
        }
        let mut l0 = lambda[0].clone();
        l0.sort_by(f64::total_cmp);
        assert_eq!(l0, vec![1.0, 2.0, 3.0]);
        // rows sum to traces
        assert!((lambda[1].iter().sum::<f64>() - 15.0).abs() < 1e-10);
    }

    #[test]
    fn simultaneous_diagonalize_recovers_conjugated_diagonals() {
        // A family U D_nu U^dag must come back with reconstruction
        // error at machine scale.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = 4;
        let mut a = CMat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                a[(i, j)] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
        }
        let qr = a.qr();
        let u = qr.q();
        let diags = [
            [0.1, 0.4, 0.2, 0.9],
            [0.7, 0.7, 0.3, 0.1], // a degeneracy broken by the first member
        ];
        let members: Vec<HermitianOperator> = diags
            .iter()
            .map(|dv| {
                let dm = CMat::from_diagonal(&CVec::from_iterator(
                    d,
                    dv.iter().map(|&x| C64::new(x, 0.0)),
                ));
                HermitianOperator::new(&u * dm * u.adjoint()).unwrap()
            })
            .collect();
        let (basis, lambda) = simultaneous_diagonalize(&members, 1e-9).unwrap();
        for (m, lrow) in members.iter().zip(&lambda) {
            let mut recon = CMat::zeros(d, d);
            for i in 0..d {
                let col = basis.column(i).into_owned();
                recon += &col * col.adjoint() * C64::new(lrow[i], 0.0);
            }
            assert!(max_abs_diff(&recon, m.matrix()) < 1e-10);
        }
        // orthonormal basis
        assert!(max_abs_diff(&(basis.adjoint() * &basis), &CMat::identity(d, d)) < 1e-10);
    }

    #[test]
    fn simultaneous_diagonalize_rejects_noncommuting() {
        let x = HermitianOperator::new(sigma_x()).unwrap();
        let y = HermitianOperator::new(sigma_y()).unwrap();
        assert!(matches!(
            simultaneous_diagonalize(&[x, y], 1e-9),
            Err(Error::NotCommuting(_, _))
        ));
    }

    #[test]
    fn degenerate_family_resolved_deterministically() {
        // Two runs on I/2 must give identical orthonormal bases.
        let m = HermitianOperator::new(CMat::identity(2, 2) * C64::new(0.5, 0.0)).unwrap();
        let (b1, _) = simultaneous_diagonalize(std::slice::from_ref(&m), 1e-9).unwrap();
        let (b2, _) = simultaneous_diagonalize(std::slice::from_ref(&m), 1e-9).unwrap();
        assert!(max_abs_diff(&b1, &b2) < 1e-14);
        assert!(max_abs_diff(&(b1.adjoint() * &b1), &CMat::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn gram_rank_distinguishes_spanning_families() {
        let x = HermitianOperator::new(sigma_x()).unwrap();
        let y = HermitianOperator::new(sigma_y()).unwrap();
        let z = HermitianOperator::new(sigma_z()).unwrap();
        let i = HermitianOperator::new(CMat::identity(2, 2)).unwrap();
        assert_eq!(gram_rank(&[x.clone(), y, z, i], 1e-9), 4);
        assert_eq!(gram_rank(&[x.clone(), x], 1e-9), 1);
    }
}
