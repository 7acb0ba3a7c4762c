use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "furthlab", version, about = "Diffusion and quantum propagation experiments", propagate_version = true)]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Heat and quantum kernels, composition residuals, multi-slice kernels
    Kernels(KernelsArgs),
    /// Wiener path ensembles and velocity, kinetic and uncertainty estimators
    Paths(PathsArgs),
    /// Time-slice wavefunction evolution against analytic and spectral oracles
    Evolve(EvolveArgs),
    /// Quasiclassical wavefunctions against Numerov eigenstates
    Wkb(WkbArgs),
    /// Radial eigenproblems, the spherical/cylindrical map and separation check
    Radial(RadialArgs),
    /// Angular-momentum dispersion algebra
    Dispersions(DispersionsArgs),
    /// Every experiment, one subdirectory each
    All(AllArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed for all random streams
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Small Monte Carlo sizes (default)
    #[arg(long, conflicts_with = "full")]
    pub quick: bool,
    /// Large Monte Carlo sizes
    #[arg(long)]
    pub full: bool,
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long, value_parser = ["plus", "minus"])]
    pub phase_convention: Option<String>,
    /// Flat key=value file; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn push<T: ToString>(flags: &mut Vec<(&'static str, String)>, key: &'static str, value: &Option<T>) {
    if let Some(v) = value {
        flags.push((key, v.to_string()));
    }
}

impl Common {
    pub fn flags(&self) -> Vec<(&'static str, String)> {
        let mut f = Vec::new();
        push(&mut f, "seed", &self.seed);
        push(&mut f, "out", &self.out.as_ref().map(|p| p.display().to_string()));
        push(&mut f, "hbar", &self.hbar);
        push(&mut f, "mass", &self.mass);
        push(&mut f, "phase_convention", &self.phase_convention);
        if self.quick {
            f.push(("profile", "quick".into()));
        }
        if self.full {
            f.push(("profile", "full".into()));
        }
        f
    }
}

#[derive(Debug, Clone, Args)]
pub struct KernelsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Total propagation time
    #[arg(long)]
    pub tau: Option<f64>,
    /// Fraction of tau in the first leg of the composition
    #[arg(long)]
    pub split: Option<f64>,
    /// Number of slices for the multi-slice kernel
    #[arg(long)]
    pub slices: Option<usize>,
    /// Damping for the multi-slice kernel
    #[arg(long)]
    pub damping: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct PathsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Time step of the main ensemble
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub n_paths: Option<usize>,
    #[arg(long)]
    pub n_steps: Option<usize>,
    /// Drift velocity for the kinetic-energy sweep
    #[arg(long)]
    pub drift: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long, value_parser = ["free", "harmonic", "barrier"])]
    pub potential: Option<String>,
    #[arg(long, value_parser = ["full", "expanded"])]
    pub mode: Option<String>,
    /// Grid spacing
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct WkbArgs {
    #[command(flatten)]
    pub common: Common,
    /// Oscillator level to compare
    #[arg(long)]
    pub n: Option<usize>,
    /// Guard band as a fraction of the allowed half-width
    #[arg(long)]
    pub guard: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RadialArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_parser = ["coulomb", "harmonic"])]
    pub potential: Option<String>,
    #[arg(long, value_parser = ["spherical", "cylindrical"])]
    pub geometry: Option<String>,
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long)]
    pub n_radial: Option<usize>,
    /// Cylindrical centrifugal index: half_integer (l+1/2) or integer (l)
    #[arg(long, value_parser = ["half_integer", "integer"])]
    pub index: Option<String>,
    /// Axial wavenumber for the separation check
    #[arg(long)]
    pub k_z: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct DispersionsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Largest l in the tables
    #[arg(long)]
    pub l_max: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct AllArgs {
    #[command(flatten)]
    pub common: Common,
}

impl Verb {
    pub fn name(&self) -> &'static str {
        match self {
            Verb::Kernels(_) => "kernels",
            Verb::Paths(_) => "paths",
            Verb::Evolve(_) => "evolve",
            Verb::Wkb(_) => "wkb",
            Verb::Radial(_) => "radial",
            Verb::Dispersions(_) => "dispersions",
            Verb::All(_) => "all",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Verb::Kernels(a) => &a.common,
            Verb::Paths(a) => &a.common,
            Verb::Evolve(a) => &a.common,
            Verb::Wkb(a) => &a.common,
            Verb::Radial(a) => &a.common,
            Verb::Dispersions(a) => &a.common,
            Verb::All(a) => &a.common,
        }
    }

    /// Common and verb flags as config keys.
    pub fn flags(&self) -> Vec<(&'static str, String)> {
        let mut f = self.common().flags();
        match self {
            Verb::Kernels(a) => {
                push(&mut f, "tau", &a.tau);
                push(&mut f, "split", &a.split);
                push(&mut f, "slices", &a.slices);
                push(&mut f, "damping", &a.damping);
            }
            Verb::Paths(a) => {
                push(&mut f, "eps", &a.eps);
                push(&mut f, "n_paths", &a.n_paths);
                push(&mut f, "n_steps", &a.n_steps);
                push(&mut f, "drift", &a.drift);
            }
            Verb::Evolve(a) => {
                push(&mut f, "eps", &a.eps);
                push(&mut f, "n_steps", &a.n_steps);
                push(&mut f, "potential", &a.potential);
                push(&mut f, "mode", &a.mode);
                push(&mut f, "dx", &a.dx);
                push(&mut f, "half_width", &a.half_width);
            }
            Verb::Wkb(a) => {
                push(&mut f, "n", &a.n);
                push(&mut f, "guard", &a.guard);
            }
            Verb::Radial(a) => {
                push(&mut f, "potential", &a.potential);
                push(&mut f, "geometry", &a.geometry);
                push(&mut f, "l", &a.l);
                push(&mut f, "n_radial", &a.n_radial);
                push(&mut f, "index", &a.index);
                push(&mut f, "k_z", &a.k_z);
            }
            Verb::Dispersions(a) => push(&mut f, "l_max", &a.l_max),
            Verb::All(_) => {}
        }
        f
    }
}
