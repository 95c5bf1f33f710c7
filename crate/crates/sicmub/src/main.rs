//! Command-line front end: build, verify, and search, writing a
//! verification report plus artifacts for every pipeline.
//!
//! Exit status: 0 when all checks pass (or the search succeeded),
//! 1 when checks ran but failed, 2 on validation errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sicmub::bridge::{
    self, qubit, search_positive_smearing, MarginalSet, SmearingMatrix, SmearingParametrization,
};
use sicmub::combin::{
    self, dualize_to_path_system, orthogonal_mate_search, LatinSquare, MateSearchOutcome,
};
use sicmub::covariant::WeylSystem;
use sicmub::field::Field;
use sicmub::io::{
    read_json, write_json, BasesJson, FamilyJson, FiducialJson, FieldDescriptor, LatinSquareJson,
    MarginalSetJson, PartitionJson, PathSystemJson, SmearingJson,
};
use sicmub::operators::{C64, CMat, FamilyKind, HermitianOperator, OperatorFamily};
use sicmub::phase::coset_partitions;
use sicmub::{Error, Result, VerificationReport};

#[derive(Parser)]
#[command(
    name = "sicmub",
    version,
    about = "SIC-MUB bridge constructions and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mutually unbiased bases.
    Mubs {
        #[command(subcommand)]
        action: MubsAction,
    },
    /// Mutually orthogonal Latin squares.
    Mols {
        #[command(subcommand)]
        action: MolsAction,
    },
    /// d-partitions with the 1-overlap property.
    Partitions {
        #[command(subcommand)]
        action: PartitionsAction,
    },
    /// SIC POVMs and SIC systems.
    Sic {
        #[command(subcommand)]
        action: SicAction,
    },
    /// Doubly stochastic smearings.
    Smearing {
        #[command(subcommand)]
        action: SmearingAction,
    },
    /// Covariant phase space observables.
    Covariant {
        #[command(subcommand)]
        action: CovariantAction,
    },
    /// Fiducial states for covariant SICs.
    Fiducial {
        #[command(subcommand)]
        action: FiducialAction,
    },
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Tolerance for verification checks.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Output directory for reports and artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Report file format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Clone)]
struct FieldOpts {
    /// Field characteristic (prime).
    #[arg(long)]
    p: u64,
    /// Extension degree.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Modulus polynomial, constant-first: a comma list like "1,0,1"
    /// or a path to a JSON list.
    #[arg(long)]
    modulus: Option<String>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Markdown,
}

#[derive(Subcommand)]
enum MubsAction {
    /// Build the d+1 MUBs of a prime-power dimension and verify them.
    Build {
        #[command(flatten)]
        field: FieldOpts,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Subcommand)]
enum MolsAction {
    /// Build the d-1 MOLS of a prime-power order (or one cyclic square).
    Build {
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        modulus: Option<String>,
        /// Emit the order-d cyclic Cayley square instead of field MOLS.
        #[arg(long)]
        cyclic: Option<usize>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Search for an orthogonal mate of a square.
    Mate {
        /// Latin square JSON (list of integer grids; first is used).
        #[arg(long = "in")]
        input: PathBuf,
        /// Search node budget.
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Subcommand)]
enum PartitionsAction {
    /// Assemble a pairwise 1-overlap partition family from a field or
    /// from a Latin-square file.
    Build {
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        modulus: Option<String>,
        /// Latin squares JSON (list of integer grids).
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Subcommand)]
enum SicAction {
    /// Verify a d^2-outcome family against the SIC conditions.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Marginalize a SIC along a partition family and verify the
    /// mutual-unbiasedness identities.
    Marginals {
        /// SIC family JSON.
        #[arg(long = "in")]
        input: PathBuf,
        /// Partition family JSON; default: the coset partitions of the
        /// field with |F|^2 = number of outcomes.
        #[arg(long)]
        partitions: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Reconstruct a SIC system from d+1 MUBs via smearing and the
    /// dual path system.
    FromMubs {
        /// Dimension d (alternative to --p/--n for prime powers).
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        modulus: Option<String>,
        /// Bases JSON produced by `mubs build` (default: build MUBs
        /// from the field).
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Circulant first row, e.g. "0.5,0.5,0", applied to every
        /// basis.
        #[arg(long)]
        circulant: Option<String>,
        /// Smearing matrices JSON (list of grids: one shared or d+1).
        #[arg(long)]
        smearing: Option<PathBuf>,
        /// Seed for the smearing search when no smearing is given.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Subcommand)]
enum SmearingAction {
    /// Search the constrained circulants for a positive reconstruction.
    Search {
        #[command(flatten)]
        field: FieldOpts,
        #[arg(long, value_enum, default_value_t = Parametrization::Single)]
        parametrization: Parametrization,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Parametrization {
    Single,
    PerBasis,
}

#[derive(Subcommand)]
enum CovariantAction {
    /// Evaluate the four equivalent SIC conditions for a generator.
    Check {
        #[command(flatten)]
        field: FieldOpts,
        /// Generator state JSON (operator schema or fiducial bundle);
        /// default I/d.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Subcommand)]
enum FiducialAction {
    /// Search for a rank-1 generator whose covariant observable is SIC.
    Search {
        #[command(flatten)]
        field: FieldOpts,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Iteration budget per restart.
        #[arg(long, default_value_t = 2000)]
        budget: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Mubs {
            action: MubsAction::Build { field, common },
        } => mubs_build(&field, &common),
        Command::Mols { action } => match action {
            MolsAction::Build {
                p,
                n,
                modulus,
                cyclic,
                common,
            } => mols_build(p, n, modulus.as_deref(), cyclic, &common),
            MolsAction::Mate {
                input,
                budget,
                common,
            } => mols_mate(&input, budget, &common),
        },
        Command::Partitions {
            action:
                PartitionsAction::Build {
                    p,
                    n,
                    modulus,
                    input,
                    common,
                },
        } => partitions_build(p, n, modulus.as_deref(), input.as_deref(), &common),
        Command::Sic { action } => match action {
            SicAction::Verify { input, common } => sic_verify(&input, &common),
            SicAction::Marginals {
                input,
                partitions,
                common,
            } => sic_marginals(&input, partitions.as_deref(), &common),
            SicAction::FromMubs {
                d,
                p,
                n,
                modulus,
                input,
                circulant,
                smearing,
                seed,
                common,
            } => sic_from_mubs(
                d,
                p,
                n,
                modulus.as_deref(),
                input.as_deref(),
                circulant.as_deref(),
                smearing.as_deref(),
                seed,
                &common,
            ),
        },
        Command::Smearing {
            action:
                SmearingAction::Search {
                    field,
                    parametrization,
                    seed,
                    common,
                },
        } => smearing_search(&field, parametrization, seed, &common),
        Command::Covariant {
            action:
                CovariantAction::Check {
                    field,
                    input,
                    common,
                },
        } => covariant_check(&field, input.as_deref(), &common),
        Command::Fiducial {
            action:
                FiducialAction::Search {
                    field,
                    seed,
                    budget,
                    common,
                },
        } => fiducial_search(&field, seed, budget, &common),
    }
}

fn build_field(p: u64, n: usize, modulus: Option<&str>) -> Result<Field> {
    let modulus = match modulus {
        None => None,
        Some(text) => Some(parse_modulus(text)?),
    };
    Field::new(p, n, modulus)
}

fn parse_modulus(text: &str) -> Result<Vec<u64>> {
    if text.contains(',') || text.chars().all(|c| c.is_ascii_digit()) {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|e| Error::SchemaViolation(format!("modulus: {e}")))
            })
            .collect()
    } else {
        read_json::<Vec<u64>>(Path::new(text))
    }
}

fn emit_report(report: &VerificationReport, common: &CommonOpts) -> Result<bool> {
    std::fs::create_dir_all(&common.out).map_err(|source| Error::FileIo {
        path: common.out.display().to_string(),
        source,
    })?;
    match common.format {
        Format::Json => write_json(&common.out.join("report.json"), report)?,
        Format::Csv => write_text(&common.out.join("report.csv"), &report.to_csv())?,
        Format::Markdown => write_text(&common.out.join("report.md"), &report.to_markdown())?,
    }
    print!("{}", report.to_markdown());
    Ok(report.passed())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::FileIo {
        path: path.display().to_string(),
        source,
    })
}

fn out_path(common: &CommonOpts, name: &str) -> PathBuf {
    common.out.join(name)
}

/// Record a yes/no outcome as a check row.
fn check_flag(report: &mut VerificationReport, name: &str, ok: bool) {
    report.check_with(
        name,
        1.0,
        if ok { 1.0 } else { 0.0 },
        if ok { 0.0 } else { 1.0 },
        0.5,
    );
}

/// MUB PVMs of a field, as bases and PVM families. Dimension 2 uses
/// the Pauli eigenbases; odd characteristic uses the Weyl-Heisenberg
/// construction.
fn build_mubs(field: &Field) -> Result<(Vec<CMat>, Vec<OperatorFamily>)> {
    let pvms = if field.size() == 2 {
        qubit::pauli_mub_pvms()
    } else {
        WeylSystem::new(field)?.mub_pvms()
    };
    let bases = pvms
        .iter()
        .map(|p| sicmub::operators::simultaneous_diagonalize(p.members(), 1e-10).map(|(b, _)| b))
        .collect::<Result<Vec<_>>>()?;
    Ok((bases, pvms))
}

fn mubs_build(field_opts: &FieldOpts, common: &CommonOpts) -> Result<bool> {
    let field = build_field(field_opts.p, field_opts.n, field_opts.modulus.as_deref())?;
    let d = field.size();
    let report = if d == 2 {
        let pvms = qubit::pauli_mub_pvms();
        let set = MarginalSet::from_povms(pvms, "pauli-mubs");
        bridge::verify_mu_identities(&set, common.tol)
    } else {
        let sys = WeylSystem::new(&field)?;
        sys.verify_mub_pvms(common.tol)
    };
    let (bases, _) = build_mubs(&field)?;
    std::fs::create_dir_all(&common.out).ok();
    write_json(&out_path(common, "bases.json"), &BasesJson::of(d, &bases))?;
    write_json(
        &out_path(common, "field.json"),
        &FieldDescriptor::of(&field),
    )?;
    emit_report(&report, common)
}

fn mols_build(
    p: Option<u64>,
    n: usize,
    modulus: Option<&str>,
    cyclic: Option<usize>,
    common: &CommonOpts,
) -> Result<bool> {
    let squares: Vec<LatinSquare> = match (cyclic, p) {
        (Some(d), _) => vec![LatinSquare::cyclic(d)],
        (None, Some(p)) => {
            let field = build_field(p, n, modulus)?;
            combin::mols_from_field(&field)
        }
        (None, None) => {
            return Err(Error::SchemaViolation("give --p or --cyclic".into()));
        }
    };
    let mut report = VerificationReport::new(common.tol);
    check_flag(
        &mut report,
        "pairwise orthogonality of squares",
        combin::check_mols(&squares).is_ok(),
    );
    let expected = if cyclic.is_some() {
        1.0
    } else {
        (squares[0].order() - 1) as f64
    };
    report.check("square count", expected, squares.len() as f64);
    std::fs::create_dir_all(&common.out).ok();
    let json: Vec<LatinSquareJson> = squares.iter().map(LatinSquareJson::of).collect();
    write_json(&out_path(common, "squares.json"), &json)?;
    emit_report(&report, common)
}

fn mols_mate(input: &Path, budget: u64, common: &CommonOpts) -> Result<bool> {
    let squares: Vec<LatinSquareJson> = read_json(input)?;
    let square = squares
        .first()
        .ok_or_else(|| Error::SchemaViolation("empty square list".into()))?
        .square()?;
    let outcome = orthogonal_mate_search(&square, budget);
    #[derive(serde::Serialize)]
    struct MateJson {
        status: &'static str,
        nodes: u64,
        mate: Option<LatinSquareJson>,
    }
    let (status, nodes, mate) = match &outcome {
        MateSearchOutcome::Found { mate, nodes } => {
            ("found", *nodes, Some(LatinSquareJson::of(mate)))
        }
        MateSearchOutcome::ExhaustedNone { nodes } => ("exhausted-none", *nodes, None),
        MateSearchOutcome::BudgetExceeded { nodes } => ("budget-exceeded", *nodes, None),
    };
    std::fs::create_dir_all(&common.out).ok();
    write_json(
        &out_path(common, "mate.json"),
        &MateJson {
            status,
            nodes,
            mate,
        },
    )?;
    let mut report = VerificationReport::new(common.tol);
    check_flag(
        &mut report,
        "search completed within budget",
        !matches!(outcome, MateSearchOutcome::BudgetExceeded { .. }),
    );
    println!("mate search: {status} after {nodes} nodes");
    emit_report(&report, common)
}

fn partitions_build(
    p: Option<u64>,
    n: usize,
    modulus: Option<&str>,
    input: Option<&Path>,
    common: &CommonOpts,
) -> Result<bool> {
    let partitions = match (p, input) {
        (Some(p), None) => {
            let field = build_field(p, n, modulus)?;
            combin::partition_family_from_field(&field)
        }
        (None, Some(path)) => {
            let squares: Vec<LatinSquareJson> = read_json(path)?;
            let squares = squares
                .iter()
                .map(|s| s.square())
                .collect::<Result<Vec<_>>>()?;
            combin::partition_family_from_mols(&squares)?
        }
        _ => {
            return Err(Error::SchemaViolation(
                "give exactly one of --p or --in".into(),
            ));
        }
    };
    let d = partitions[0].order();
    let mut report = VerificationReport::new(common.tol);
    check_flag(
        &mut report,
        "pairwise 1-overlap",
        combin::check_pairwise_one_overlap(&partitions).is_ok(),
    );
    check_flag(
        &mut report,
        "family size <= d+1",
        partitions.len() <= d + 1,
    );
    std::fs::create_dir_all(&common.out).ok();
    let json: Vec<PartitionJson> = partitions.iter().map(PartitionJson::of).collect();
    write_json(&out_path(common, "partitions.json"), &json)?;
    emit_report(&report, common)
}

fn sic_verify(input: &Path, common: &CommonOpts) -> Result<bool> {
    let family = read_json::<FamilyJson>(input)?.family()?;
    let report = family.verify(common.tol);
    emit_report(&report, common)
}

fn sic_marginals(input: &Path, partitions: Option<&Path>, common: &CommonOpts) -> Result<bool> {
    let family = read_json::<FamilyJson>(input)?.family()?;
    let d = family.dim();
    let partitions = match partitions {
        Some(path) => read_json::<Vec<PartitionJson>>(path)?
            .iter()
            .map(|p| p.partition())
            .collect::<Result<Vec<_>>>()?,
        None => {
            let (p, n) = prime_power(d).ok_or_else(|| {
                Error::SchemaViolation(format!("d = {d} is not a prime power; give --partitions"))
            })?;
            let field = Field::new(p, n, None)?;
            if p == 2 {
                combin::partition_family_from_field(&field)
            } else {
                coset_partitions(&field)
            }
        }
    };
    let marginals = bridge::marginalize(&family, &partitions)?;
    let report = bridge::verify_mu_identities(&marginals, common.tol);
    std::fs::create_dir_all(&common.out).ok();
    write_json(
        &out_path(common, "marginals.json"),
        &MarginalSetJson {
            provenance: marginals.provenance.clone(),
            partitions: marginals
                .partitions
                .iter()
                .map(PartitionJson::of)
                .collect(),
            povms: marginals.povms.iter().map(FamilyJson::of).collect(),
        },
    )?;
    emit_report(&report, common)
}

/// d = p^n for prime p, if possible.
fn prime_power(d: usize) -> Option<(u64, usize)> {
    for p in 2..=d {
        let p_u = p as u64;
        if !(2..p).any(|k| p % k == 0) {
            let mut q = p;
            let mut n = 1;
            while q < d {
                q *= p;
                n += 1;
            }
            if q == d {
                return Some((p_u, n));
            }
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn sic_from_mubs(
    d: Option<usize>,
    p: Option<u64>,
    n: usize,
    modulus: Option<&str>,
    input: Option<&Path>,
    circulant: Option<&str>,
    smearing: Option<&Path>,
    seed: u64,
    common: &CommonOpts,
) -> Result<bool> {
    let d = match (d, p) {
        (Some(d), _) => d,
        (None, Some(p)) => (p as usize).pow(n as u32),
        (None, None) => {
            return Err(Error::SchemaViolation("give --d or --p".into()));
        }
    };
    let Some((fp, fnn)) = prime_power(d) else {
        // The recovery formula needs d^2 one-overlap paths through a
        // (d+1) x d array, equivalent to d-1 MOLS of order d.
        let extra = if d == 6 {
            "; not even one pair of orthogonal Latin squares of order 6 exists, \
             let alone the required 5 MOLS"
        } else {
            ""
        };
        return Err(Error::SchemaViolation(format!(
            "cannot build the {} x {d} path system: reconstruction needs a complete \
             family of {} 1-overlap partitions, i.e. {} mutually orthogonal Latin \
             squares of order {d}{extra}",
            d + 1,
            d + 1,
            d - 1,
        )));
    };
    let field = match p {
        Some(p) => build_field(p, n, modulus)?,
        None => Field::new(fp, fnn, None)?,
    };
    if field.size() != d {
        return Err(Error::SchemaViolation(format!(
            "--d {d} conflicts with p^n = {}",
            field.size()
        )));
    }

    // Bases as PVM families, plus the dual path system.
    let pvms: Vec<OperatorFamily> = match input {
        Some(path) => {
            let bases = read_json::<BasesJson>(path)?.matrices()?;
            bases
                .iter()
                .map(|b| {
                    let members = (0..d)
                        .map(|j| {
                            let col = b.column(j).into_owned();
                            HermitianOperator::new(&col * col.adjoint())
                        })
                        .collect::<Result<Vec<_>>>()?;
                    OperatorFamily::with_default_labels(FamilyKind::PvmCandidate, members)
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => build_mubs(&field)?.1,
    };
    let partitions = if field.p() == 2 {
        combin::partition_family_from_field(&field)
    } else {
        coset_partitions(&field)
    };
    let paths = dualize_to_path_system(&partitions)?;

    // Smearing matrices: explicit row, file, or searched.
    let smearings: Vec<SmearingMatrix> = if let Some(row) = circulant {
        let row: Vec<f64> = row
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::SchemaViolation(format!("circulant: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        vec![SmearingMatrix::circulant(&row)?]
    } else if let Some(path) = smearing {
        read_json::<Vec<SmearingJson>>(path)?
            .into_iter()
            .map(|s| SmearingMatrix::new(s.0))
            .collect::<Result<Vec<_>>>()?
    } else {
        search_positive_smearing(
            &pvms,
            &paths,
            SmearingParametrization::SingleCirculant,
            seed,
        )?
        .smearings
    };
    if smearings.len() != 1 && smearings.len() != d + 1 {
        return Err(Error::SchemaViolation(format!(
            "need 1 or {} smearing matrices, got {}",
            d + 1,
            smearings.len()
        )));
    }

    let povms: Vec<OperatorFamily> = pvms
        .iter()
        .enumerate()
        .map(|(k, pvm)| bridge::smear(pvm, &smearings[k.min(smearings.len() - 1)]))
        .collect::<Result<Vec<_>>>()?;
    let (family, mut report) = bridge::reconstruct_sic_system(&povms, &paths, common.tol)?;
    // When positive, run the full SIC verification as well.
    let min_eig = report
        .find("sic: min eigenvalue over all G(i)")
        .map(|c| c.observed)
        .unwrap_or(f64::NEG_INFINITY);
    if min_eig >= -common.tol {
        report.merge(
            family
                .with_kind(FamilyKind::SicCandidate)
                .verify(common.tol),
        );
    }
    std::fs::create_dir_all(&common.out).ok();
    write_json(&out_path(common, "sic.json"), &FamilyJson::of(&family))?;
    write_json(&out_path(common, "paths.json"), &PathSystemJson::of(&paths))?;
    let smearing_json: Vec<SmearingJson> = smearings
        .iter()
        .map(|s| SmearingJson(s.rows().to_vec()))
        .collect();
    write_json(&out_path(common, "smearing.json"), &smearing_json)?;
    emit_report(&report, common)
}

fn smearing_search(
    field_opts: &FieldOpts,
    parametrization: Parametrization,
    seed: u64,
    common: &CommonOpts,
) -> Result<bool> {
    let field = build_field(field_opts.p, field_opts.n, field_opts.modulus.as_deref())?;
    let (_, pvms) = build_mubs(&field)?;
    let partitions = if field.p() == 2 {
        combin::partition_family_from_field(&field)
    } else {
        coset_partitions(&field)
    };
    let paths = dualize_to_path_system(&partitions)?;
    let par = match parametrization {
        Parametrization::Single => SmearingParametrization::SingleCirculant,
        Parametrization::PerBasis => SmearingParametrization::PerBasisCirculant,
    };
    let search = search_positive_smearing(&pvms, &paths, par, seed)?;

    #[derive(serde::Serialize)]
    struct SearchJson {
        parameters: Vec<Vec<f64>>,
        min_eigenvalue: f64,
        is_sic: bool,
        qubit_lambda: Option<f64>,
        trace: Vec<(f64, f64)>,
    }
    std::fs::create_dir_all(&common.out).ok();
    write_json(
        &out_path(common, "search.json"),
        &SearchJson {
            parameters: search.parameters.clone(),
            min_eigenvalue: search.min_eigenvalue,
            is_sic: search.is_sic,
            qubit_lambda: search.qubit_lambda,
            trace: search.trace.clone(),
        },
    )?;
    let smearing_json: Vec<SmearingJson> = search
        .smearings
        .iter()
        .map(|s| SmearingJson(s.rows().to_vec()))
        .collect();
    write_json(&out_path(common, "smearing.json"), &smearing_json)?;
    write_json(
        &out_path(common, "sic.json"),
        &FamilyJson::of(&search.reconstructed),
    )?;
    let mut report = VerificationReport::new(common.tol);
    report.check_with(
        "search: min eigenvalue of reconstruction",
        0.0,
        search.min_eigenvalue,
        (-search.min_eigenvalue).max(0.0),
        1e-9,
    );
    println!(
        "min eigenvalue {:.3e}; sic: {}{}",
        search.min_eigenvalue,
        search.is_sic,
        search
            .qubit_lambda
            .map(|l| format!("; lambda = {l:.9}"))
            .unwrap_or_default()
    );
    emit_report(&report, common)
}

fn covariant_check(
    field_opts: &FieldOpts,
    input: Option<&Path>,
    common: &CommonOpts,
) -> Result<bool> {
    let field = build_field(field_opts.p, field_opts.n, field_opts.modulus.as_deref())?;
    let sys = WeylSystem::new(&field)?;
    let t = match input {
        Some(path) => {
            let json: serde_json::Value = read_json(path)?;
            // accept either a raw operator or a fiducial bundle
            if json.get("psi").is_some() {
                let fid: FiducialJson = serde_json::from_value(json)
                    .map_err(|e| Error::SchemaViolation(e.to_string()))?;
                let psi = fid.vector();
                HermitianOperator::new(&psi * psi.adjoint())?
            } else {
                let op: sicmub::io::OperatorJson = serde_json::from_value(json)
                    .map_err(|e| Error::SchemaViolation(e.to_string()))?;
                op.hermitian()?
            }
        }
        None => HermitianOperator::new(
            CMat::identity(field.size(), field.size()) / C64::new(field.size() as f64, 0.0),
        )?,
    };
    let conditions = sys.sic_condition_report(&t, common.tol.max(1e-8))?;
    let obs = sys.covariant_observable(&t)?;
    let mut report = conditions.to_report();
    report.merge(sys.verify_marginal_smearing(&obs, common.tol));
    std::fs::create_dir_all(&common.out).ok();
    write_json(
        &out_path(common, "conditions.json"),
        &conditions.to_report(),
    )?;
    emit_report(&report, common)
}

fn fiducial_search(
    field_opts: &FieldOpts,
    seed: u64,
    budget: u64,
    common: &CommonOpts,
) -> Result<bool> {
    let field = build_field(field_opts.p, field_opts.n, field_opts.modulus.as_deref())?;
    let sys = WeylSystem::new(&field)?;
    let result = sys.fiducial_search(seed, budget as usize)?;
    std::fs::create_dir_all(&common.out).ok();
    write_json(
        &out_path(common, "fiducial.json"),
        &FiducialJson {
            field: FieldDescriptor::of(&field),
            psi: result.psi.iter().map(|z| [z.re, z.im]).collect(),
            residual: result.residual,
        },
    )?;
    let conditions = sys.sic_condition_report(&result.state, 1e-8)?;
    let mut report = conditions.to_report();
    report.check_with(
        "search residual <= 1e-8",
        0.0,
        result.residual,
        result.residual,
        1e-8,
    );
    println!(
        "residual {:.3e} (restart {}), converged: {}",
        result.residual, result.best_restart, result.converged
    );
    emit_report(&report, common)
}
