//! `acyclic`: generate and check tests, level graphs, `ρ₀` memberships,
//! reductions, selectors and tree relations from the command line.
//!
//! Exit status: 0 when the property holds, 1 when it fails (a `WITNESS:`
//! line is printed), 2 on usage or I/O errors, 3 when the answer is
//! undecided or a certificate is unavailable.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Failure;

#[derive(Parser, Debug)]
#[command(
    name = "acyclic",
    version,
    about = "Checks for trees with acyclic levels on Cantor space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct TestSource {
    /// Test file with `q<TAB>s<TAB>t` lines; the canonical test if omitted.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum OracleChoice {
    Trivial,
    SeenOne,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print levels 0..=max-q of the canonical test.
    GenTest {
        #[arg(long)]
        max_q: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the definition of a test up to max-q.
    CheckTest {
        #[command(flatten)]
        source: TestSource,
        #[arg(long, default_value_t = 512)]
        max_q: usize,
        /// Bound on p and m for the richness clause.
        #[arg(long, default_value_t = 3)]
        bound: u128,
        #[arg(long, default_value_t = 3)]
        max_u: usize,
    },
    /// Print the level slice T_p as `s<TAB>t` lines.
    Slice {
        #[command(flatten)]
        source: TestSource,
        #[arg(long)]
        level: usize,
    },
    /// Print the level graph G_p in DOT.
    GraphDot {
        #[command(flatten)]
        source: TestSource,
        #[arg(long)]
        level: usize,
    },
    /// Check that the level graphs 1..=max-level are acyclic.
    CheckAcyclic {
        #[command(flatten)]
        source: TestSource,
        #[arg(long)]
        max_level: usize,
    },
    /// Check that the level slices 1..=max-level contain no rectangle.
    RectFree {
        #[command(flatten)]
        source: TestSource,
        #[arg(long)]
        max_level: usize,
    },
    /// Print rho0^xi of a sequence `tail:prefix`.
    Rho {
        #[arg(long, default_value = "1")]
        xi: String,
        #[arg(long)]
        seq: String,
    },
    /// Decide membership of a sequence in H_{1+xi}.
    HMember {
        #[arg(long)]
        xi: String,
        #[arg(long)]
        seq: String,
    },
    /// Decide membership of a pair in S_{1+xi}.
    SMember {
        #[command(flatten)]
        source: TestSource,
        #[arg(long)]
        xi: String,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
    },
    /// Build the reduction and list its ranks.
    Reduce {
        #[arg(long, value_enum, default_value = "trivial")]
        oracle: OracleChoice,
        #[arg(long, default_value_t = 8)]
        max_rank: usize,
    },
    /// Check the conclusions of the reduction lemma at finite depth.
    VerifyL34 {
        #[arg(long, value_enum, default_value = "trivial")]
        oracle: OracleChoice,
        #[arg(long, default_value_t = 200)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        t_bound: u128,
        #[arg(long, default_value_t = 3)]
        m_bound: u128,
        /// Sample every alpha with a prefix of at most this length.
        #[arg(long, default_value_t = 6)]
        max_prefix: usize,
    },
    /// Compare rho0^xi(alpha) with rho0^xi of the shifted difference.
    VerifyT35 {
        #[arg(long, value_enum, default_value = "trivial")]
        oracle: OracleChoice,
        #[arg(long)]
        xi: u64,
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 16)]
        coords: usize,
    },
    /// Partition, blend and lift selectors on a level graph.
    SelectorDemo {
        #[arg(long, default_value_t = 2)]
        level: usize,
        /// The edge t0 as `s,t`; the first edge if omitted.
        #[arg(long)]
        t0: Option<String>,
    },
    /// Check relation files, or a family of them in order.
    RelCheck {
        /// Relation files, or `builtin:extension` / `builtin:r1`.
        #[arg(required = true)]
        relations: Vec<String>,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        alphabet: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let code = match commands::run(&cli.command, &mut out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Undecided(msg)) => {
            out.push_str(&format!("undecided: {msg}\n"));
            3
        }
    };
    let mut stdout = std::io::stdout().lock();
    if stdout
        .write_all(out.as_bytes())
        .and_then(|_| stdout.flush())
        .is_err()
    {
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
