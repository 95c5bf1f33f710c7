//! The discrete Weyl-Heisenberg representation and covariant phase
//! space observables, for odd characteristic.
//!
//! On `H = l^2(F)` the Weyl operator of a phase-space point is
//! `[W(v)f](x) = omega^Tr[v2 (x - 2^-1 v1)] f(x - v1)`, a projective
//! representation with `W(v+w) = <w|2^-1 v> W(v) W(w)` and
//! `W(v)W(w) = <v|w> W(w)W(v)`. Each line L through the origin yields
//! a rank-1 PVM on the cosets V/L,
//! `P^L(v+L) = (1/|F|) sum_{l in L} <v|l> W(l)`, and the d+1 PVMs of
//! the d+1 lines are mutually unbiased. A state T generates the
//! covariant observable `G_T(v) = (1/|F|) W(v) T W(v)^dag`, whose
//! L-marginals are smearings of P^L by the probability measure
//! `Lam_T^L(v+L) = tr[T P^L(-v+L)]`; the marginals are mutually
//! unbiased for every T. Whether G_T is a SIC is equivalent to any of
//! three further conditions on the marginals, the two-copy difference
//! observable Q^L, or the moduli |tr T W(v)|.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::operators::{
    commutator_norm, hs_inner_raw, max_abs, max_abs_diff, random_unit_vector, C64, CMat, CVec,
    FamilyKind, HermitianOperator, OperatorFamily,
};
use crate::phase::{lines_and_cosets, phase_points, Coset, Line, LineLabel, PhasePoint};
use crate::report::VerificationReport;

/// Fiducial searches stay at desk scale.
pub const FIDUCIAL_DIM_CAP: usize = 9;

/// A Weyl operator tagged with its phase-space point.
#[derive(Debug, Clone)]
pub struct WeylOperator {
    pub point: PhasePoint,
    pub matrix: CMat,
}

/// The full Weyl-Heisenberg representation of V = F x F for one field:
/// all d^2 Weyl operators, the d+1 lines with their cosets, and the
/// quotient-group tables used by marginals.
pub struct WeylSystem {
    field: Field,
    points: Vec<PhasePoint>,
    weyl: Vec<CMat>,
    lines: Vec<Line>,
    cosets: Vec<Vec<Coset>>,
    /// per line: point index -> coset index
    coset_of: Vec<Vec<usize>>,
    /// per line: coset addition table of the quotient group V/L
    qadd: Vec<Vec<Vec<usize>>>,
    /// per line: coset negation
    qneg: Vec<Vec<usize>>,
}

/// A covariant phase space observable `G_T(v) = W(v) T W(v)^dag / |F|`
/// together with its generator.
#[derive(Debug, Clone)]
pub struct CovariantObservable {
    pub generator: HermitianOperator,
    /// d^2 members indexed by the canonical point enumeration.
    pub family: OperatorFamily,
}

/// The marginal of a covariant observable along one line: a
/// commutative POVM on V/L with its smearing weights.
#[derive(Debug, Clone)]
pub struct LMarginal {
    pub line: LineLabel,
    pub povm: OperatorFamily,
    /// `weights[c] = Lam_T^L(coset c)`, a probability vector.
    pub weights: Vec<f64>,
}

/// Deviations and verdicts for the four equivalent SIC conditions.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub tolerance: f64,
    /// Worst deviations of conditions (i)-(iv) in order.
    pub deviations: [f64; 4],
    pub passes: [bool; 4],
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.passes.iter().all(|&b| b)
    }

    /// Do the four booleans deliver the same verdict?
    pub fn agree(&self) -> bool {
        self.passes.iter().all(|&b| b == self.passes[0])
    }

    pub fn to_report(&self) -> VerificationReport {
        let names = [
            "(i) G_T SIC overlaps",
            "(ii) marginal overlaps (1+delta)/(d+1)",
            "(iii) two-copy probabilities (1+delta)/(d+1)",
            "(iv) |tr T W(v)|^2 = (1+d delta)/(d+1)",
        ];
        let mut report = VerificationReport::new(self.tolerance);
        for (name, dev) in names.iter().zip(self.deviations) {
            report.check_with(*name, 0.0, dev, dev, self.tolerance);
        }
        report
    }
}

/// Result of the fiducial search.
#[derive(Debug, Clone)]
pub struct FiducialResult {
    /// Best unit vector found.
    pub psi: CVec,
    /// The rank-1 state |psi><psi|.
    pub state: HermitianOperator,
    /// Sum of squared deviations of |<psi|W(v)psi>|^2 from 1/(d+1)
    /// over v != 0.
    pub residual: f64,
    /// Restart index that produced the best residual.
    pub best_restart: usize,
    /// Whether the residual reached the 1e-8 acceptance threshold.
    pub converged: bool,
}

/// Build a single Weyl operator without assembling the whole system.
pub fn weyl_operator(field: &Field, v: &PhasePoint) -> Result<WeylOperator> {
    if v.field() != field {
        return Err(Error::MixedFields);
    }
    let half = field.two_inverse()?;
    Ok(WeylOperator {
        point: v.clone(),
        matrix: build_weyl(field, v.v1().index(), v.v2().index(), half.index()),
    })
}

/// W(v)[x, x - v1] = omega^Tr[v2 (x - 2^-1 v1)].
fn build_weyl(field: &Field, iv1: usize, iv2: usize, half: usize) -> CMat {
    let d = field.size();
    let mut m = CMat::zeros(d, d);
    let shift = field.mul_idx(half, iv1);
    for x in 0..d {
        let col = field.add_idx(x, field.neg_idx(iv1));
        let arg = field.add_idx(x, field.neg_idx(shift));
        let k = field.trace_idx(field.mul_idx(iv2, arg));
        m[(x, col)] = field.root_of_unity(k);
    }
    m
}

impl WeylSystem {
    pub fn new(field: &Field) -> Result<WeylSystem> {
        let half = field.two_inverse()?; // rejects characteristic 2
        let d = field.size();
        let points = phase_points(field);
        let weyl: Vec<CMat> = points
            .iter()
            .map(|v| build_weyl(field, v.v1().index(), v.v2().index(), half.index()))
            .collect();

        let lc = lines_and_cosets(field);
        let mut lines = Vec::with_capacity(d + 1);
        let mut cosets = Vec::with_capacity(d + 1);
        let mut coset_of = Vec::with_capacity(d + 1);
        let mut qadd = Vec::with_capacity(d + 1);
        let mut qneg = Vec::with_capacity(d + 1);
        for (line, cs) in lc {
            let mut of = vec![0usize; d * d];
            for (ci, c) in cs.iter().enumerate() {
                for p in &c.points {
                    of[p.index()] = ci;
                }
            }
            let add = (0..d)
                .map(|a| {
                    (0..d)
                        .map(|b| {
                            let s = cs[a]
                                .representative
                                .add(&cs[b].representative)
                                .expect("same field");
                            of[s.index()]
                        })
                        .collect()
                })
                .collect();
            let neg = (0..d)
                .map(|a| of[cs[a].representative.neg().index()])
                .collect();
            lines.push(line);
            cosets.push(cs);
            coset_of.push(of);
            qadd.push(add);
            qneg.push(neg);
        }
        Ok(WeylSystem {
            field: field.clone(),
            points,
            weyl,
            lines,
            cosets,
            coset_of,
            qadd,
            qneg,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Hilbert space dimension d = |F|.
    pub fn dim(&self) -> usize {
        self.field.size()
    }

    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn cosets(&self, line: usize) -> &[Coset] {
        &self.cosets[line]
    }

    /// Coset index of a point on the given line's partition.
    pub fn coset_index(&self, line: usize, point: usize) -> usize {
        self.coset_of[line][point]
    }

    pub fn weyl_at(&self, point: usize) -> &CMat {
        &self.weyl[point]
    }

    pub fn weyl(&self, v: &PhasePoint) -> Result<&CMat> {
        if v.field() != &self.field {
            return Err(Error::MixedFields);
        }
        Ok(&self.weyl[v.index()])
    }

    fn chi(&self, v: &PhasePoint, w: &PhasePoint) -> C64 {
        let k = crate::phase::character_exponent(v, w).expect("points of this system's field");
        self.field.root_of_unity(k)
    }

    /// The rank-1 PVM of one line on its cosets:
    /// `P^L(v+L) = (1/|F|) sum_{l in L} <v|l> W(l)`.
    pub fn mub_pvm(&self, line: usize) -> OperatorFamily {
        let d = self.dim();
        let members: Vec<HermitianOperator> = self.cosets[line]
            .iter()
            .map(|coset| {
                let rep = &coset.representative;
                let mut m = CMat::zeros(d, d);
                for l in &self.lines[line].points {
                    m += self.weyl[l.index()].clone() * self.chi(rep, l);
                }
                HermitianOperator::new(m / C64::new(d as f64, 0.0))
                    .expect("character sums over a line are Hermitian")
            })
            .collect();
        let labels = self.cosets[line]
            .iter()
            .map(|c| coset_label(c))
            .collect();
        OperatorFamily::new(FamilyKind::PvmCandidate, members, labels)
            .expect("one projection per coset")
    }

    /// All d+1 mutually unbiased PVMs, in line order.
    pub fn mub_pvms(&self) -> Vec<OperatorFamily> {
        (0..self.lines.len()).map(|l| self.mub_pvm(l)).collect()
    }

    /// Composition, commutation, unitarity, and W(0) = I over all
    /// point pairs.
    pub fn verify_weyl_algebra(&self, tolerance: f64) -> VerificationReport {
        let d = self.dim();
        let eye = CMat::identity(d, d);
        let mut report = VerificationReport::new(tolerance);
        report.check("W(0) = I", 0.0, max_abs_diff(&self.weyl[0], &eye));
        let unit = self
            .weyl
            .iter()
            .map(|w| max_abs_diff(&(w * w.adjoint()), &eye))
            .fold(0.0, f64::max);
        report.check("unitarity max |W W^dag - I|", 0.0, unit);

        let half = self.field.two_inverse().expect("odd characteristic");
        let mut comp: f64 = 0.0;
        let mut comm: f64 = 0.0;
        for v in &self.points {
            for w in &self.points {
                let sum = v.add(w).expect("same field");
                // W(v+w) = <w|2^-1 v> W(v) W(w)
                let half_v = PhasePoint::new(
                    self.field.mul(&half, v.v1()).expect("same field"),
                    self.field.mul(&half, v.v2()).expect("same field"),
                )
                .expect("same field");
                let lhs = &self.weyl[sum.index()];
                let rhs = &self.weyl[v.index()] * &self.weyl[w.index()] * self.chi(w, &half_v);
                comp = comp.max(max_abs_diff(lhs, &rhs));
                // W(v)W(w) = <v|w> W(w)W(v)
                let lhs2 = &self.weyl[v.index()] * &self.weyl[w.index()];
                let rhs2 = &self.weyl[w.index()] * &self.weyl[v.index()] * self.chi(v, w);
                comm = comm.max(max_abs_diff(&lhs2, &rhs2));
            }
        }
        report.check("composition law residual", 0.0, comp);
        report.check("commutation law residual", 0.0, comm);
        report
    }

    /// The mutually-unbiased-PVM claims for all lines: rank-1
    /// idempotent members summing to I, the Weyl reconstruction from
    /// the PVM, covariance under every W(w), and cross-line overlaps
    /// 1/d.
    pub fn verify_mub_pvms(&self, tolerance: f64) -> VerificationReport {
        let d = self.dim();
        let eye = CMat::identity(d, d);
        let mut report = VerificationReport::new(tolerance);
        let pvms = self.mub_pvms();

        let mut pvm_dev: f64 = 0.0;
        let mut rank_dev: f64 = 0.0;
        let mut recon_dev: f64 = 0.0;
        let mut cov_dev: f64 = 0.0;
        let mut cross = (f64::NEG_INFINITY, -1.0);
        for (li, pvm) in pvms.iter().enumerate() {
            // PVM structure
            pvm_dev = pvm_dev.max(max_abs_diff(&pvm.sum(), &eye));
            for (i, p) in pvm.members().iter().enumerate() {
                let m = p.matrix();
                pvm_dev = pvm_dev.max(max_abs_diff(&(m * m), m));
                for q in &pvm.members()[i + 1..] {
                    pvm_dev = pvm_dev.max(max_abs(&(m * q.matrix())));
                }
                rank_dev = rank_dev.max((p.trace() - 1.0).abs());
            }
            // Weyl reconstruction: W(l) = sum_cosets conj(<v|l>) P^L(v+L)
            for l in &self.lines[li].points {
                let mut acc = CMat::zeros(d, d);
                for (ci, c) in self.cosets[li].iter().enumerate() {
                    acc += pvm.member(ci).matrix() * self.chi(&c.representative, l).conj();
                }
                recon_dev = recon_dev.max(max_abs_diff(&acc, &self.weyl[l.index()]));
            }
            // covariance: W(w) P^L(v+L) W(w)^dag = P^L(v+w+L)
            for w in &self.points {
                let ww = &self.weyl[w.index()];
                for (ci, c) in self.cosets[li].iter().enumerate() {
                    let moved = ww * pvm.member(ci).matrix() * ww.adjoint();
                    let target_coset =
                        self.coset_of[li][c.representative.add(w).expect("same field").index()];
                    cov_dev = cov_dev.max(max_abs_diff(&moved, pvm.member(target_coset).matrix()));
                }
            }
            // mutual unbiasedness across lines
            for other in &pvms[li + 1..] {
                for p in pvm.members() {
                    for q in other.members() {
                        let o = hs_inner_raw(p.matrix(), q.matrix()).re;
                        if (o - 1.0 / d as f64).abs() > cross.1 {
                            cross = (o, (o - 1.0 / d as f64).abs());
                        }
                    }
                }
            }
        }
        report.check("PVM structure (sum, idempotence, orthogonality)", 0.0, pvm_dev);
        report.check("rank-1: tr P = 1", 0.0, rank_dev);
        report.check("Weyl reconstruction from PVM", 0.0, recon_dev);
        report.check("covariance W(w) P W(w)^dag", 0.0, cov_dev);
        report.check(
            "cross-line overlap tr[P^L P^L'] = 1/d",
            1.0 / d as f64,
            cross.0,
        );
        report
    }

    /// The covariant observable generated by a state T.
    pub fn covariant_observable(&self, t: &HermitianOperator) -> Result<CovariantObservable> {
        if t.dim() != self.dim() {
            return Err(Error::DimMismatch {
                a: t.dim(),
                b: self.dim(),
            });
        }
        let min_eig = t.min_eigenvalue();
        if min_eig < -1e-10 {
            return Err(Error::NotAState(format!("min eigenvalue {min_eig:.3e}")));
        }
        if (t.trace() - 1.0).abs() > 1e-10 {
            return Err(Error::NotAState(format!("trace {}", t.trace())));
        }
        let d = self.dim() as f64;
        let members: Vec<HermitianOperator> = self
            .weyl
            .iter()
            .map(|w| {
                HermitianOperator::new(w * t.matrix() * w.adjoint() / C64::new(d, 0.0))
                    .expect("conjugation preserves hermiticity")
            })
            .collect();
        let labels = self.points.iter().map(point_label).collect();
        let family = OperatorFamily::new(FamilyKind::PovmCandidate, members, labels)?;
        Ok(CovariantObservable {
            generator: t.clone(),
            family,
        })
    }

    /// Probabilities `tr[T P^L(c)]` of one line's PVM in the state T.
    pub fn pvm_probabilities(&self, t: &HermitianOperator, line: usize) -> Vec<f64> {
        self.mub_pvm(line)
            .members()
            .iter()
            .map(|p| hs_inner_raw(p.matrix(), t.matrix()).re)
            .collect()
    }

    /// The L-marginal of a covariant observable: coset sums of the
    /// members, plus the smearing weights
    /// `Lam_T^L(c) = tr[T P^L(-c)]`.
    pub fn l_marginal(&self, obs: &CovariantObservable, line: usize) -> LMarginal {
        let d = self.dim();
        let mut sums: Vec<CMat> = vec![CMat::zeros(d, d); d];
        for (pi, member) in obs.family.members().iter().enumerate() {
            sums[self.coset_of[line][pi]] += member.matrix();
        }
        let members: Vec<HermitianOperator> = sums
            .into_iter()
            .map(|m| HermitianOperator::new(m).expect("sum of Hermitian members"))
            .collect();
        let labels = self.cosets[line].iter().map(coset_label).collect();
        let povm = OperatorFamily::new(FamilyKind::PovmCandidate, members, labels)
            .expect("one member per coset");
        let probs = self.pvm_probabilities(&obs.generator, line);
        let weights = (0..d).map(|c| probs[self.qneg[line][c]]).collect();
        LMarginal {
            line: self.lines[line].label.clone(),
            povm,
            weights,
        }
    }

    pub fn l_marginals(&self, obs: &CovariantObservable) -> Vec<LMarginal> {
        (0..self.lines.len())
            .map(|l| self.l_marginal(obs, l))
            .collect()
    }

    /// For every line: weights form a probability vector, the
    /// convolution identity
    /// `G_T^L(v+L) = sum_w Lam_T^L(v-w+L) P^L(w+L)` holds, marginal
    /// members commute, and marginals of distinct lines have overlap
    /// 1/d.
    pub fn verify_marginal_smearing(
        &self,
        obs: &CovariantObservable,
        tolerance: f64,
    ) -> VerificationReport {
        let d = self.dim();
        let mut report = VerificationReport::new(tolerance);
        let marginals = self.l_marginals(obs);
        let pvms = self.mub_pvms();

        let mut weight_dev: f64 = 0.0;
        let mut conv_dev: f64 = 0.0;
        let mut comm_dev: f64 = 0.0;
        let mut cross = (f64::NEG_INFINITY, -1.0);
        for (li, marg) in marginals.iter().enumerate() {
            let wsum: f64 = marg.weights.iter().sum();
            weight_dev = weight_dev.max((wsum - 1.0).abs());
            weight_dev = weight_dev.max(
                marg.weights
                    .iter()
                    .map(|&w| (-w).max(0.0))
                    .fold(0.0, f64::max),
            );
            for v in 0..d {
                let mut acc = CMat::zeros(d, d);
                for w in 0..d {
                    // v - w in the quotient group
                    let diff = self.qadd[li][v][self.qneg[li][w]];
                    acc += pvms[li].member(w).matrix() * C64::new(marg.weights[diff], 0.0);
                }
                conv_dev = conv_dev.max(max_abs_diff(&acc, marg.povm.member(v).matrix()));
            }
            for (i, a) in marg.povm.members().iter().enumerate() {
                for b in &marg.povm.members()[i + 1..] {
                    comm_dev = comm_dev.max(commutator_norm(a.matrix(), b.matrix()));
                }
            }
            for other in &marginals[li + 1..] {
                for a in marg.povm.members() {
                    for b in other.povm.members() {
                        let o = hs_inner_raw(a.matrix(), b.matrix()).re;
                        if (o - 1.0 / d as f64).abs() > cross.1 {
                            cross = (o, (o - 1.0 / d as f64).abs());
                        }
                    }
                }
            }
        }
        report.check("weights are probability measures", 0.0, weight_dev);
        report.check("convolution identity residual", 0.0, conv_dev);
        report.check("marginal members commute", 0.0, comm_dev);
        report.check(
            "cross-line marginal overlap 1/d",
            1.0 / d as f64,
            cross.0,
        );
        report
    }

    /// Materialize the two-copy difference observable of one line:
    /// `Q^L(u+L) = sum_w P^L(u+w+L) (x) P^L(w+L)` as d^2 x d^2
    /// matrices. Guarded to d <= 5, where the tensor product stays at
    /// desk scale.
    pub fn two_copy_observable(&self, line: usize) -> Result<Vec<CMat>> {
        let d = self.dim();
        if d > 5 {
            return Err(Error::SizeTooLarge { size: d, cap: 5 });
        }
        let pvm = self.mub_pvm(line);
        let mut out = Vec::with_capacity(d);
        for u in 0..d {
            let mut q = CMat::zeros(d * d, d * d);
            for w in 0..d {
                let shifted = self.qadd[line][u][w];
                q += pvm.member(shifted).matrix().kronecker(pvm.member(w).matrix());
            }
            out.push(q);
        }
        Ok(out)
    }

    /// Probabilities `tr[(T (x) T) Q^L(u+L)]` for all cosets u,
    /// computed from the PVM probability vector without materializing
    /// the tensor product: the value at u is the autocorrelation
    /// `sum_w mu(u+w) mu(w)` of `mu(w) = tr[T P^L(w+L)]`.
    pub fn two_copy_probabilities(&self, t: &HermitianOperator, line: usize) -> Vec<f64> {
        let d = self.dim();
        let mu = self.pvm_probabilities(t, line);
        (0..d)
            .map(|u| (0..d).map(|w| mu[self.qadd[line][u][w]] * mu[w]).sum())
            .collect()
    }

    /// Evaluate the four equivalent SIC conditions for a state T and
    /// report each condition's worst deviation at the tolerance.
    pub fn sic_condition_report(
        &self,
        t: &HermitianOperator,
        tolerance: f64,
    ) -> Result<ConditionReport> {
        let d = self.dim();
        let df = d as f64;
        let obs = self.covariant_observable(t)?;

        // (i) SIC overlaps of G_T itself.
        let mut dev_i: f64 = 0.0;
        for (a, ma) in obs.family.members().iter().enumerate() {
            for (b, mb) in obs.family.members().iter().enumerate().skip(a) {
                let o = hs_inner_raw(ma.matrix(), mb.matrix()).re;
                let target = if a == b {
                    1.0 / (df * df)
                } else {
                    1.0 / (df * df * (df + 1.0))
                };
                dev_i = dev_i.max((o - target).abs());
            }
        }

        // (ii) same-line marginal overlaps.
        let mut dev_ii: f64 = 0.0;
        let marginals = self.l_marginals(&obs);
        for marg in &marginals {
            for (a, ma) in marg.povm.members().iter().enumerate() {
                for (b, mb) in marg.povm.members().iter().enumerate().skip(a) {
                    let o = hs_inner_raw(ma.matrix(), mb.matrix()).re;
                    let delta = if a == b { 1.0 } else { 0.0 };
                    dev_ii = dev_ii.max((o - (1.0 + delta) / (df + 1.0)).abs());
                }
            }
        }

        // (iii) two-copy difference probabilities.
        let mut dev_iii: f64 = 0.0;
        for line in 0..self.lines.len() {
            let probs = self.two_copy_probabilities(t, line);
            for (u, &p) in probs.iter().enumerate() {
                let delta = if u == self.coset_of[line][0] { 1.0 } else { 0.0 };
                dev_iii = dev_iii.max((p - (1.0 + delta) / (df + 1.0)).abs());
            }
        }

        // (iv) Weyl transform moduli.
        let mut dev_iv: f64 = 0.0;
        for (pi, w) in self.weyl.iter().enumerate() {
            let a = hs_inner_raw(w, t.matrix());
            let target = if pi == 0 {
                1.0
            } else {
                1.0 / (df + 1.0)
            };
            dev_iv = dev_iv.max((a.norm_sqr() - target).abs());
        }

        let deviations = [dev_i, dev_ii, dev_iii, dev_iv];
        Ok(ConditionReport {
            tolerance,
            deviations,
            passes: deviations.map(|d| d <= tolerance),
        })
    }

    /// Minimize `sum_{v != 0} (|<psi|W(v)|psi>|^2 - 1/(d+1))^2` over
    /// unit vectors by seeded multistart projected gradient descent
    /// with a Gauss-Newton polish. `max_iters` bounds the descent
    /// iterations per restart. Failure to reach 1e-8 is reported in
    /// `converged`, not an error.
    pub fn fiducial_search(&self, seed: u64, max_iters: usize) -> Result<FiducialResult> {
        let d = self.dim();
        if d > FIDUCIAL_DIM_CAP {
            return Err(Error::SizeTooLarge {
                size: d,
                cap: FIDUCIAL_DIM_CAP,
            });
        }
        const RESTARTS: usize = 32;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<(CVec, f64, usize)> = None;
        for restart in 0..RESTARTS {
            let start = random_unit_vector(d, &mut rng);
            let psi = self.descend(start, max_iters);
            let psi = self.polish(psi);
            let f = self.fiducial_objective(&psi);
            if best.as_ref().is_none_or(|b| f < b.1) {
                best = Some((psi, f, restart));
            }
            if best.as_ref().expect("just set").1 < 1e-14 {
                break;
            }
        }
        let (psi, residual, best_restart) = best.expect("at least one restart ran");
        let state = HermitianOperator::new(&psi * psi.adjoint())
            .expect("outer product of a vector is Hermitian");
        Ok(FiducialResult {
            psi,
            state,
            residual,
            best_restart,
            converged: residual <= 1e-8,
        })
    }

    fn fiducial_objective(&self, psi: &CVec) -> f64 {
        let c = 1.0 / (self.dim() as f64 + 1.0);
        self.weyl
            .iter()
            .skip(1)
            .map(|w| {
                let a = (psi.adjoint() * w * psi)[(0, 0)];
                let r = a.norm_sqr() - c;
                r * r
            })
            .sum()
    }

    /// Complex gradient of the objective with respect to conj(psi).
    fn fiducial_gradient(&self, psi: &CVec) -> CVec {
        let d = self.dim();
        let c = 1.0 / (d as f64 + 1.0);
        let mut g = CVec::zeros(d);
        for w in self.weyl.iter().skip(1) {
            let wpsi = w * psi;
            let a = (psi.adjoint() * &wpsi)[(0, 0)];
            let r = a.norm_sqr() - c;
            g += (wpsi * a.conj() + w.adjoint() * psi * a) * C64::new(2.0 * r, 0.0);
        }
        g
    }

    fn descend(&self, mut psi: CVec, max_iters: usize) -> CVec {
        let mut step = 0.1;
        let mut f = self.fiducial_objective(&psi);
        for _ in 0..max_iters {
            let g = self.fiducial_gradient(&psi);
            let overlap = (psi.adjoint() * &g)[(0, 0)];
            let tangent = &g - &psi * overlap;
            if max_abs_vec(&tangent) < 1e-12 || f < 1e-18 {
                break;
            }
            let mut accepted = false;
            while step > 1e-16 {
                let cand = &psi - &tangent * C64::new(step, 0.0);
                let cand = cand.clone() / C64::new(cand.norm(), 0.0);
                let fc = self.fiducial_objective(&cand);
                if fc < f {
                    psi = cand;
                    f = fc;
                    step *= 1.3;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        psi
    }

    /// Levenberg-Marquardt refinement in real coordinates, with the
    /// unit-norm constraint as an extra residual.
    fn polish(&self, psi: CVec) -> CVec {
        let d = self.dim();
        let c = 1.0 / (d as f64 + 1.0);
        let n_res = d * d; // d^2 - 1 overlap residuals + 1 norm residual
        let to_real = |v: &CVec| -> Vec<f64> {
            let mut x = Vec::with_capacity(2 * d);
            x.extend(v.iter().map(|z| z.re));
            x.extend(v.iter().map(|z| z.im));
            x
        };
        let to_complex = |x: &[f64]| -> CVec {
            CVec::from_iterator(d, (0..d).map(|i| C64::new(x[i], x[d + i])))
        };
        let residuals = |v: &CVec| -> Vec<f64> {
            let mut r = Vec::with_capacity(n_res);
            for w in self.weyl.iter().skip(1) {
                let a = (v.adjoint() * w * v)[(0, 0)];
                r.push(a.norm_sqr() - c);
            }
            r.push(v.norm_squared() - 1.0);
            r
        };
        let cost = |r: &[f64]| -> f64 { r.iter().map(|x| x * x).sum() };

        let mut x = to_real(&psi);
        let mut mu = 1e-6;
        let mut r = residuals(&to_complex(&x));
        let mut f = cost(&r);
        for _ in 0..200 {
            let v = to_complex(&x);
            // Jacobian: row per residual over the 2d real coordinates.
            let mut jac = DMatrix::<f64>::zeros(n_res, 2 * d);
            for (row, w) in self.weyl.iter().skip(1).enumerate() {
                let wv = w * &v;
                let a = (v.adjoint() * &wv)[(0, 0)];
                let h = &wv * a.conj() + w.adjoint() * &v * a;
                for i in 0..d {
                    jac[(row, i)] = 2.0 * h[i].re;
                    jac[(row, d + i)] = 2.0 * h[i].im;
                }
            }
            for i in 0..2 * d {
                jac[(n_res - 1, i)] = 2.0 * x[i];
            }
            let jt = jac.transpose();
            let jtj = &jt * &jac;
            let jtr = &jt * DMatrix::from_column_slice(n_res, 1, &r);
            let mut improved = false;
            for _ in 0..20 {
                let lhs = &jtj + DMatrix::<f64>::identity(2 * d, 2 * d) * mu;
                if let Some(delta) = lhs.lu().solve(&(-&jtr)) {
                    let cand: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
                    let rc = residuals(&to_complex(&cand));
                    let fc = cost(&rc);
                    if fc < f {
                        x = cand;
                        r = rc;
                        f = fc;
                        mu = (mu * 0.3).max(1e-14);
                        improved = true;
                        break;
                    }
                }
                mu *= 10.0;
                if mu > 1e8 {
                    break;
                }
            }
            if !improved || f < 1e-26 {
                break;
            }
        }
        let v = to_complex(&x);
        let norm = v.norm();
        v / C64::new(norm, 0.0)
    }
}

fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn point_label(p: &PhasePoint) -> String {
    format!("v=({:?},{:?})", p.v1().coeffs(), p.v2().coeffs())
}

fn coset_label(c: &Coset) -> String {
    let line = match &c.line {
        LineLabel::Infinity => "inf".to_string(),
        LineLabel::Slope(a) => format!("{:?}", a.coeffs()),
    };
    format!(
        "({:?},{:?})+L_{}",
        c.representative.v1().coeffs(),
        c.representative.v2().coeffs(),
        line
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::random_state;
    use crate::tol;

    fn system(p: u64, n: usize) -> WeylSystem {
        WeylSystem::new(&Field::new(p, n, None).unwrap()).unwrap()
    }

    #[test]
    fn characteristic_two_rejected() {
        let f = Field::prime(2).unwrap();
        assert!(matches!(
            WeylSystem::new(&f),
            Err(Error::CharacteristicTwo)
        ));
    }

    #[test]
    fn weyl_origin_is_identity_and_shift_structure() {
        let sys = system(3, 1);
        let d = 3;
        assert!(max_abs_diff(sys.weyl_at(0), &CMat::identity(d, d)) < 1e-15);
        // v = (1, 0): pure cyclic shift f(x) -> f(x - 1), no phase
        let f = sys.field().clone();
        let v = PhasePoint::new(f.element(&[1]).unwrap(), f.zero()).unwrap();
        let w = weyl_operator(&f, &v).unwrap();
        for x in 0..d {
            let expected_col = (x + d - 1) % d;
            for y in 0..d {
                let want = if y == expected_col { 1.0 } else { 0.0 };
                assert!((w.matrix[(x, y)] - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn weyl_algebra_exhaustive_d3() {
        let report = system(3, 1).verify_weyl_algebra(tol::EXACT);
        assert!(report.passed(), "{}", report.to_markdown());
    }

    #[test]
    fn weyl_algebra_exhaustive_gf9() {
        let report = system(3, 2).verify_weyl_algebra(tol::EXACT);
        assert!(report.passed(), "{}", report.to_markdown());
    }

    #[test]
    fn mub_pvms_d3() {
        let sys = system(3, 1);
        let report = sys.verify_mub_pvms(1e-11);
        assert!(report.passed(), "{}", report.to_markdown());
        // the L_inf PVM projects onto the position basis: W((0, u))
        // are diagonal, so the projections are diagonal
        let pvm_inf = sys.mub_pvm(0);
        for p in pvm_inf.members() {
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        assert!(p.matrix()[(i, j)].norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn maximally_mixed_observable_is_flat() {
        let sys = system(3, 1);
        let t = HermitianOperator::new(CMat::identity(3, 3) / C64::new(3.0, 0.0)).unwrap();
        let obs = sys.covariant_observable(&t).unwrap();
        assert!(obs.family.verify(tol::DEFAULT).passed());
        for m in obs.family.members() {
            assert!(max_abs_diff(m.matrix(), &(CMat::identity(3, 3) / C64::new(9.0, 0.0))) < 1e-14);
        }
        // marginals: uniform weights 1/d and members I/d
        let marg = sys.l_marginal(&obs, 2);
        for &w in &marg.weights {
            assert!((w - 1.0 / 3.0).abs() < 1e-14);
        }
        for m in marg.povm.members() {
            assert!(max_abs_diff(m.matrix(), &(CMat::identity(3, 3) / C64::new(3.0, 0.0))) < 1e-14);
        }
    }

    #[test]
    fn non_state_generators_rejected() {
        let sys = system(3, 1);
        let mut m = CMat::identity(3, 3);
        m[(0, 0)] = C64::new(-0.5, 0.0);
        m[(1, 1)] = C64::new(1.5, 0.0);
        m[(2, 2)] = C64::new(0.0, 0.0);
        let t = HermitianOperator::new(m).unwrap();
        assert!(matches!(
            sys.covariant_observable(&t),
            Err(Error::NotAState(_))
        ));
    }

    #[test]
    fn marginal_smearing_random_state() {
        let sys = system(5, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let t = random_state(5, &mut rng);
        let obs = sys.covariant_observable(&t).unwrap();
        let report = sys.verify_marginal_smearing(&obs, 1e-10);
        assert!(report.passed(), "{}", report.to_markdown());
    }

    #[test]
    fn covariance_of_observable() {
        let sys = system(3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = random_state(3, &mut rng);
        let obs = sys.covariant_observable(&t).unwrap();
        let mut dev: f64 = 0.0;
        for w in sys.points() {
            let ww = sys.weyl_at(w.index());
            for v in sys.points() {
                let moved = ww * obs.family.member(v.index()).matrix() * ww.adjoint();
                let target = v.add(w).unwrap().index();
                dev = dev.max(max_abs_diff(&moved, obs.family.member(target).matrix()));
            }
        }
        assert!(dev < 1e-11, "covariance residual {dev}");
    }

    #[test]
    fn two_copy_routes_agree() {
        for (p, n) in [(3u64, 1usize), (5, 1)] {
            let sys = system(p, n);
            let d = sys.dim();
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            let t = random_state(d, &mut rng);
            let tt = t.matrix().kronecker(t.matrix());
            for line in 0..sys.lines().len() {
                let fast = sys.two_copy_probabilities(&t, line);
                let qs = sys.two_copy_observable(line).unwrap();
                for (u, q) in qs.iter().enumerate() {
                    // tr[(T(x)T) Q]; T(x)T is Hermitian, so this is
                    // the Hilbert-Schmidt pairing
                    let direct = hs_inner_raw(&tt, q).re;
                    assert!(
                        (fast[u] - direct).abs() < 1e-12,
                        "line {line} coset {u}: {} vs {direct}",
                        fast[u]
                    );
                }
            }
        }
    }

    #[test]
    fn two_copy_pvm_structure_d3() {
        let sys = system(3, 1);
        let qs = sys.two_copy_observable(1).unwrap();
        let d2 = 9;
        let mut sum = CMat::zeros(d2, d2);
        for q in &qs {
            // idempotent projections
            assert!(max_abs_diff(&(q * q), q) < 1e-12);
            sum += q;
        }
        assert!(max_abs_diff(&sum, &CMat::identity(d2, d2)) < 1e-12);
    }

    #[test]
    fn fourier_link_between_conditions() {
        // (1/|F|) sum_u <v|u> tr[(T(x)T)Q^{Fv}(u+L)] = |tr[T W(v)]|^2
        let sys = system(3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let t = random_state(3, &mut rng);
        for v in sys.points().iter().skip(1) {
            // the line through v: find the line containing it
            let line = (0..sys.lines().len())
                .find(|&l| sys.lines()[l].points.contains(v))
                .unwrap();
            let probs = sys.two_copy_probabilities(&t, line);
            let mut acc = C64::new(0.0, 0.0);
            for u in sys.points() {
                let k = crate::phase::character_exponent(v, u).unwrap();
                let chi = sys.field().root_of_unity(k);
                acc += chi * C64::new(probs[sys.coset_index(line, u.index())], 0.0);
            }
            acc /= C64::new(3.0, 0.0);
            let a = hs_inner_raw(sys.weyl_at(v.index()), t.matrix());
            assert!(
                (acc - C64::new(a.norm_sqr(), 0.0)).norm() < 1e-12,
                "link residual {}",
                (acc - C64::new(a.norm_sqr(), 0.0)).norm()
            );
        }
    }

    #[test]
    fn maximally_mixed_fails_all_four_conditions() {
        let sys = system(3, 1);
        let t = HermitianOperator::new(CMat::identity(3, 3) / C64::new(3.0, 0.0)).unwrap();
        let report = sys.sic_condition_report(&t, 1e-8).unwrap();
        assert!(report.agree());
        assert!(!report.all_pass());
        assert!(report.passes.iter().all(|&b| !b));
        // condition (iv) deviation is exactly 1/(d+1) = 1/4 here
        assert!((report.deviations[3] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn fiducial_search_d3_finds_sic() {
        let sys = system(3, 1);
        let result = sys.fiducial_search(7, 2000).unwrap();
        assert!(result.converged, "residual {}", result.residual);
        assert!(result.residual < 1e-10);
        let report = sys.sic_condition_report(&result.state, 1e-8).unwrap();
        assert!(report.all_pass(), "{:?}", report.deviations);
        // the covariant observable is a genuine SIC POVM
        let obs = sys.covariant_observable(&result.state).unwrap();
        let sic_report = obs
            .family
            .with_kind(FamilyKind::SicCandidate)
            .verify(1e-9);
        assert!(sic_report.passed(), "{}", sic_report.to_markdown());
    }

    #[test]
    fn fiducial_search_size_guard() {
        let sys = system(11, 1);
        assert!(matches!(
            sys.fiducial_search(1, 10),
            Err(Error::SizeTooLarge { size: 11, cap: 9 })
        ));
    }
}
