//! `tdlc`: command-line front end for the t.d.l.c. homology toolkit.
//!
//! Exit codes: 0 success, 1 contradiction found by `infer`, 2 input error,
//! 3 resource cap exceeded.

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use tdlc_core::complex::{self, Ring, SimplicialComplex};
use tdlc_core::germ::{self, GraphGerm, WreathSpec};
use tdlc_core::homology::homology_of;
use tdlc_core::inference;
use tdlc_core::orbit::{self, OrbitComplex};
use tdlc_core::perm::{self, CosetSystem, Perm, PermGroup, QModule};
use tdlc_core::scan::{brown_scan, ScanGrid};
use tdlc_core::Error;

#[derive(Parser)]
#[command(name = "tdlc", about = "Homology and finiteness-property toolkit for t.d.l.c. group germs", version)]
struct Cli {
    /// Resource cap overrides, e.g. --caps vertices=100000,simplices=500000
    #[arg(long, global = true, value_parser = parse_caps)]
    caps: Option<Caps>,
    /// Worker threads for the scan grid (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default)]
struct Caps {
    vertices: Option<usize>,
    simplices: Option<usize>,
}

fn parse_caps(text: &str) -> Result<Caps, String> {
    let mut caps = Caps::default();
    for part in text.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("bad cap `{part}`, expected key=value"))?;
        let n: usize = v.parse().map_err(|_| format!("bad cap value `{v}`"))?;
        match k {
            "vertices" => caps.vertices = Some(n),
            "simplices" => caps.simplices = Some(n),
            _ => return Err(format!("unknown cap `{k}` (vertices, simplices)")),
        }
    }
    Ok(caps)
}

#[derive(Clone, Copy, ValueEnum)]
enum RingArg {
    Z,
    Q,
}

#[derive(Subcommand)]
enum Command {
    /// Homology of a simplicial complex JSON file.
    Homology {
        file: String,
        #[arg(long, value_enum, default_value = "z")]
        ring: RingArg,
        /// Report reduced homology in degree 0.
        #[arg(long)]
        reduced: bool,
    },
    /// Rips complex of a germ ball; prints a size summary (or the full
    /// complex with --json).
    Rips {
        /// Germ spec: tree:3, bitree:3,4, grid:2, free:2, dl:2,2, file:PATH.
        germ: String,
        #[arg(short)]
        r: u32,
        #[arg(short)]
        d: u32,
        #[arg(long, default_value_t = complex::DEFAULT_MAX_DIM)]
        max_dim: usize,
        #[arg(long)]
        json: bool,
    },
    /// Essential-triviality scan over a (radius, scale) filtration.
    BrownScan {
        germ: String,
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<u32>,
        #[arg(long, value_delimiter = ',', required = true)]
        scales: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        dims: Vec<usize>,
        /// Inner-margin override (default: the source scale of each cell).
        #[arg(long)]
        margin: Option<u32>,
        /// CSV output path (stdout if omitted).
        #[arg(short)]
        o: Option<String>,
    },
    /// Betti numbers of a deflated orbit complex.
    Deflate { file: String },
    /// Rational dimension bounds from an orbit complex.
    CdReport { file: String },
    /// Permutation-module calculus on a finite group JSON file.
    Perm {
        #[command(subcommand)]
        cmd: PermCmd,
    },
    /// Run the finiteness-property inference engine on a DSL file.
    Infer {
        file: String,
        #[arg(long)]
        json: bool,
    },
    /// Schreier coset graph of a finite wreath product, as FiniteGraph JSON.
    Wreath { file: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModuleArg {
    Trivial,
    Regular,
    Standard,
}

#[derive(Subcommand)]
enum PermCmd {
    /// Transfer of the identity coset from --upper to --lower.
    Transfer {
        file: String,
        #[arg(long)]
        upper: String,
        #[arg(long)]
        lower: String,
    },
    /// Normalised averaging map on elementary tensors for each basis vector.
    Theta {
        file: String,
        #[arg(long)]
        subgroup: String,
        /// Group element index.
        #[arg(long, default_value_t = 0)]
        g: usize,
        #[arg(long, value_enum, default_value = "standard")]
        module: ModuleArg,
    },
    /// Double-coset decomposition of the restriction to --upper of the coset
    /// module of --lower.
    Mackey {
        file: String,
        #[arg(long)]
        upper: String,
        #[arg(long)]
        lower: String,
    },
    /// Coinvariant collapse of the coset module of --subgroup by the normal
    /// subgroup --normal.
    Coinvariants {
        file: String,
        #[arg(long)]
        normal: String,
        #[arg(long)]
        subgroup: String,
    },
    /// Direct-summand splitting of the --over-coset module inside the full
    /// coset module of --subgroup.
    Summand {
        file: String,
        #[arg(long)]
        over: String,
        #[arg(long)]
        subgroup: String,
    },
    /// H_1 and H_2 over Q from the normalised bar complex.
    BarHomology { file: String },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::ResourceLimit { .. } | Error::DimensionCap { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cli: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn read(path: &str) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::invalid("cli", format!("cannot read {path}: {e}")))
}

fn group_name(ring: Ring, betti: usize, torsion: &[num_bigint::BigInt]) -> String {
    let free = match ring {
        Ring::Z => "Z",
        Ring::Q => "Q",
    };
    let mut parts = Vec::new();
    match betti {
        0 => {}
        1 => parts.push(free.to_string()),
        b => parts.push(format!("{free}^{b}")),
    }
    for t in torsion {
        parts.push(format!("Z/{t}"));
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join("+")
    }
}

fn load_germ(spec: &str) -> Result<GraphGerm, Error> {
    if let Some(path) = spec.strip_prefix("file:") {
        GraphGerm::from_finite_json(&read(path)?)
    } else {
        GraphGerm::parse(spec)
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let caps = cli.caps.unwrap_or_default();
    let vertex_cap = caps.vertices.unwrap_or(germ::DEFAULT_VERTEX_CAP);
    let simplex_cap = caps.simplices.unwrap_or(complex::DEFAULT_SIMPLEX_CAP);
    match &cli.command {
        Command::Homology { file, ring, reduced } => {
            let k = SimplicialComplex::from_json(&read(file)?)?;
            let ring = match ring {
                RingArg::Z => Ring::Z,
                RingArg::Q => Ring::Q,
            };
            let h = homology_of(&k, ring, *reduced);
            let line = (0..h.betti.len())
                .map(|p| format!("H{p}={}", group_name(ring, h.betti_p(p), h.torsion_p(p))))
                .collect::<Vec<_>>()
                .join(", ");
            println!("{line}");
        }
        Command::Rips { germ: spec, r, d, max_dim, json } => {
            let g = load_germ(spec)?;
            let ball = germ::ball_with_cap(&g, *r, vertex_cap)?;
            let k = complex::rips_with_cap(&ball, *d, *max_dim, simplex_cap)?;
            if *json {
                println!("{}", k.to_json());
            } else {
                let counts: Vec<usize> =
                    (0..=k.dim().unwrap_or(0)).map(|p| k.num_simplices(p)).collect();
                println!(
                    "{}",
                    json!({
                        "vertices": ball.num_vertices(),
                        "ball_edges": ball.num_edges(),
                        "simplices": counts,
                        "euler": k.euler_characteristic(),
                    })
                );
            }
        }
        Command::BrownScan { germ: spec, radii, scales, dims, margin, o } => {
            let g = load_germ(spec)?;
            let mut grid = ScanGrid::new(g, radii.clone(), scales.clone(), dims.clone());
            grid.inner_margin = *margin;
            grid.vertex_cap = vertex_cap;
            grid.simplex_cap = simplex_cap;
            let profile = brown_scan(&grid)?;
            let csv = profile.to_csv();
            match o {
                Some(path) => {
                    fs::write(path, &csv)
                        .map_err(|e| Error::invalid("cli", format!("cannot write {path}: {e}")))?;
                    for &k in dims {
                        println!("{}", profile.summary(k));
                    }
                }
                None => print!("{csv}"),
            }
        }
        Command::Deflate { file } => {
            let oc = OrbitComplex::from_json(&read(file)?)?;
            let betti = orbit::deflate_homology(&oc)?;
            println!("{}", json!({ "betti": betti }));
        }
        Command::CdReport { file } => {
            let oc = OrbitComplex::from_json(&read(file)?)?;
            let (upper, lower) = orbit::cd_report(&oc)?;
            println!(
                "{}",
                json!({ "resolution_length": upper, "top_nonzero": lower,
                        "cd_upper": upper, "hd_lower": lower })
            );
        }
        Command::Perm { cmd } => run_perm(cmd)?,
        Command::Infer { file, json } => {
            let mut db = inference::parse(&read(file)?)?;
            inference::close(&mut db);
            if *json {
                println!("{}", inference::report_json(&db));
            } else {
                print!("{}", inference::report(&db));
            }
            if db.contradiction.is_some() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Wreath { file } => {
            let ball = wreath_from_json(&read(file)?, vertex_cap)?;
            println!(
                "{}",
                json!({ "vertices": ball.num_vertices(), "edges": ball.edges() })
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_perm(cmd: &PermCmd) -> Result<(), Error> {
    match cmd {
        PermCmd::Transfer { file, upper, lower } => {
            let sys = CosetSystem::from_json(&read(file)?)?;
            let vec = perm::transfer(&sys, upper, lower, sys.group.identity_index())?;
            for (rep, coeff) in vec {
                println!("{coeff} * [{rep}]{lower}");
            }
        }
        PermCmd::Theta { file, subgroup, g, module } => {
            let sys = CosetSystem::from_json(&read(file)?)?;
            let m = match module {
                ModuleArg::Trivial => QModule::trivial(&sys.group),
                ModuleArg::Regular => QModule::regular(&sys.group),
                ModuleArg::Standard => QModule::standard(&sys.group),
            };
            if *g >= sys.group.order() {
                return Err(Error::invalid("cli", "element index out of range"));
            }
            for i in 0..m.dim {
                let mut e = vec![num_rational::BigRational::from_integer(0.into()); m.dim];
                e[i] = num_rational::BigRational::from_integer(1.into());
                let out = perm::theta(&sys, subgroup, *g, &m, &e)?;
                let terms: Vec<String> = out.iter().map(|c| c.to_string()).collect();
                println!("e{i} -> [{}]", terms.join(", "));
            }
        }
        PermCmd::Mackey { file, upper, lower } => {
            let sys = CosetSystem::from_json(&read(file)?)?;
            let factors = perm::mackey_restrict(&sys, upper, lower)?;
            let mut total = 0;
            for f in &factors {
                println!("double coset [{}]: index {}", f.rep, f.index);
                total += f.index;
            }
            println!("sum of indices = {total}");
        }
        PermCmd::Coinvariants { file, normal, subgroup } => {
            let sys = CosetSystem::from_json(&read(file)?)?;
            let collapse = perm::coinvariants_bi(&sys, normal, subgroup)?;
            println!(
                "collapsed dimension = {} (quotient order {})",
                collapse.dim,
                collapse.quotient.order()
            );
        }
        PermCmd::Summand { file, over, subgroup } => {
            let sys = CosetSystem::from_json(&read(file)?)?;
            let w = perm::open_summand_check(&sys, over, subgroup)?;
            println!("split summand verified = {}", w.verified);
        }
        PermCmd::BarHomology { file } => {
            let sys = CosetSystem::from_json(&read(file)?)?;
            for k in 1..=2 {
                println!("dim H{k} = {}", perm::bar_homology_q(&sys.group, k)?);
            }
        }
    }
    Ok(())
}

fn parse_perm_list(val: &serde_json::Value, what: &str) -> Result<Vec<Perm>, Error> {
    let arr = val
        .as_array()
        .ok_or_else(|| Error::invalid("cli", format!("{what} must be a list of permutations")))?;
    arr.iter()
        .map(|p| {
            let images: Vec<usize> = serde_json::from_value(p.clone())
                .map_err(|e| Error::invalid("cli", format!("bad permutation in {what}: {e}")))?;
            Perm::from_images(images)
        })
        .collect()
}

fn group_from_value(val: &serde_json::Value, what: &str) -> Result<PermGroup, Error> {
    let degree = val["degree"]
        .as_u64()
        .ok_or_else(|| Error::invalid("cli", format!("{what}.degree missing")))?
        as usize;
    let gens = parse_perm_list(&val["generators"], &format!("{what}.generators"))?;
    PermGroup::generate(degree, gens)
}

/// Wreath JSON: {"b": GROUP, "a": [PERM...], "h": GROUP, "x_size": N,
/// "action": [PERM...], "u": [PERM...]} where GROUP is
/// {"degree": N, "generators": [[..]..]}.
fn wreath_from_json(text: &str, cap: usize) -> Result<germ::Ball, Error> {
    let val: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::invalid("cli", format!("bad wreath JSON: {e}")))?;
    let spec = WreathSpec {
        b: group_from_value(&val["b"], "b")?,
        a_gens: parse_perm_list(&val["a"], "a")?,
        h: group_from_value(&val["h"], "h")?,
        x_size: val["x_size"]
            .as_u64()
            .ok_or_else(|| Error::invalid("cli", "x_size missing"))? as usize,
        action_gens: parse_perm_list(&val["action"], "action")?,
    };
    let u_gens = parse_perm_list(&val["u"], "u")?;
    germ::wreath_cayley_abels_with_cap(&spec, &u_gens, cap)
}
