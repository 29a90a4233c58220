use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "polargrass", version, about = "Generating ranks of Grassmannians of finite polar spaces")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct Global {
    /// Enumeration limits; `large` allows instances with millions of points.
    #[arg(long, global = true, value_enum, default_value_t = BudgetName::Default)]
    pub budget: BudgetName,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Cache directory for enumerated levels.
    #[arg(long, global = true, env = "POLARGRASS_CACHE")]
    pub cache: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetName {
    Default,
    Large,
}

impl BudgetName {
    pub fn budget(self) -> polargrass::Budget {
        match self {
            BudgetName::Default => polargrass::Budget::DEFAULT,
            BudgetName::Large => polargrass::Budget::LARGE,
        }
    }
}

#[derive(Clone, Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Enumerate a polar space and its k-Grassmannian; store it in the cache.
    Build {
        #[arg(long)]
        space: String,
        #[arg(long)]
        k: Option<usize>,
        /// Overwrite an existing cache entry.
        #[arg(long)]
        rebuild: bool,
    },
    /// Span closure of a seed in the k-Grassmannian.
    Span {
        #[arg(long)]
        space: String,
        #[arg(long)]
        k: usize,
        /// `rational:F<q0>`, `apartment`, `construction`, `ids:<i,j,...>`,
        /// `fixture:<name>:<sub,sub,...>` or `file:<path>`.
        #[arg(long)]
        seed: String,
        /// Turn the run into a check: `all` or `proper`.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
    },
    /// Construct a generating set and verify it by closure.
    Genset {
        #[arg(long)]
        space: String,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        /// RNG seed for `random-hyperplane`.
        #[arg(long, default_value_t = 1)]
        rng_seed: u64,
    },
    /// Run a named verification scenario.
    Verify {
        #[command(subcommand)]
        #[serde(flatten)]
        scenario: Scenario,
    },
    /// Upper bound from a construction, lower bound from an embedding.
    Rank {
        #[arg(long)]
        space: String,
        #[arg(long)]
        k: usize,
        /// Print a CSV row instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Subfield-rational elements and what they span.
    Subfield {
        #[arg(long)]
        space: String,
        #[arg(long)]
        k: usize,
        /// Degree of the subfield over the prime field.
        #[arg(long, default_value_t = 1)]
        degree: u32,
    },
    /// Check the identities of a coordinate bundle.
    Fixture {
        /// Name of a built-in bundle; ignored when `--file` is given.
        name: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    All,
    Proper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Pick the construction suited to the space.
    Auto,
    Apartment,
    Recursive,
    Hermitian,
    Orthogonal,
    RandomHyperplane,
}

#[derive(Clone, Debug, Subcommand, Serialize)]
#[serde(tag = "scenario", rename_all = "kebab-case")]
pub enum Scenario {
    /// The apartment generates the dual of H(n,1,2); for n = 2 no 3-set does.
    HermitianDual {
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// 2n+d points generate the polar space and match its embedding rank.
    Points {
        #[arg(long)]
        space: String,
    },
    /// S2(H,p0,l0) spans the line Grassmannian for random triples.
    Triples {
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 20)]
        rng_seed: u64,
    },
    /// Sk(H,p0,G) spans the k-Grassmannian for random hyperplanes.
    Subspaces {
        #[arg(long, default_value = "Qplus(4,2)")]
        space: String,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 30)]
        rng_seed: u64,
    },
    /// Rational lines and the adjoined line t generate Q2(6,q).
    Tgen {
        #[arg(long)]
        q: u32,
    },
    /// The constructed C(2n+d,2) rational lines generate Q2 of Qparab(3,q).
    Orth {
        #[arg(long)]
        q: u32,
    },
    /// Rational lines of Q+(5,q) span a proper subspace.
    Notgen {
        #[arg(long)]
        q: u32,
    },
    /// The recursive set of C(2n+d,k) elements generates H_k of H(n,d,q0).
    HermitianRank {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        d: usize,
        #[arg(long, default_value_t = 3)]
        q0: u32,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Closure laws and the naive fixpoint oracle on random seeds.
    Properties {
        #[arg(long)]
        space: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 100)]
        rng_seed: u64,
    },
}
