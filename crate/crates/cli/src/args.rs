//! Command-line surface and the small parsers behind it.

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "witten",
    version,
    about = "Compact-resolvent analysis for Witten Laplacians on polynomial potentials"
)]
pub struct Cli {
    /// Master seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Write the full JSON report to this path.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,

    /// Print the full JSON report to stdout instead of the summary lines.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct PotentialArgs {
    /// Path to a polynomial JSON file, or a registered name
    /// (`vdelta:<delta>`, `phidelta:<delta>`).
    #[arg(long)]
    pub potential: String,

    /// Derivative-order cap k (>= 2).
    #[arg(long, default_value_t = 4)]
    pub k: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the three compactness-criterion conditions on sampling plans.
    CheckCriterion {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, default_value_t = witten_core::criterion::DEFAULT_DELTA1)]
        delta1: f64,
        #[arg(long, default_value_t = witten_core::criterion::DEFAULT_DELTA2)]
        delta2: f64,
        /// Sampling plan JSON; defaults to a plan derived from the potential.
        #[arg(long)]
        plan: Option<std::path::PathBuf>,
    },

    /// Compute a scaling-limit polynomial and its no-local-minimum
    /// certificate.
    LimitPoly {
        #[command(flatten)]
        potential: PotentialArgs,
        /// Sequence shape descriptor (only the power-law catalog is
        /// supported).
        #[arg(long, default_value = "y=v/j^a,tau=j^b,h=j^-c")]
        seq: String,
        /// Direction v, comma-separated.
        #[arg(long, value_parser = parse_point)]
        v: Point,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        c: f64,
        /// j schedule, comma-separated increasing integers.
        #[arg(long, value_parser = parse_u64_list, default_value = "4,8,16,32,64")]
        j: U64List,
        #[arg(long, default_value_t = witten_core::limitpoly::DEFAULT_LIMIT_TOL)]
        tol: f64,
        /// Ctilde for the certificate.
        #[arg(long, default_value_t = 1.0)]
        ctilde: f64,
        /// Sample box for the certificate, e.g. "-3:3,-3:3".
        #[arg(long, value_parser = parse_box, default_value = "-3:3,-3:3")]
        cert_box: Box2,
        #[arg(long, default_value_t = 9)]
        cert_samples: usize,
    },

    /// Build and verify a partition of unity on a box.
    Partition {
        #[command(flatten)]
        potential: PotentialArgs,
        /// Box as "lo:hi,lo:hi,...".
        #[arg(long, value_parser = parse_box)]
        r#box: Box2,
        #[arg(long, default_value_t = witten_core::localization::DEFAULT_EPS)]
        eps: f64,
        #[arg(long, default_value_t = 0.3)]
        r: f64,
        /// Grid nodes per dimension (boundary included).
        #[arg(long, default_value_t = 257)]
        res: usize,
    },

    /// Smallest eigenvalues of the discretized Witten operator.
    Spectrum {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, value_parser = parse_box)]
        r#box: Box2,
        /// Interior grid nodes per dimension.
        #[arg(long, default_value_t = 129)]
        res: usize,
        /// Number of eigenvalues.
        #[arg(long, default_value_t = 12)]
        count: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        max_iter: usize,
        /// Use the direct iteration instead of shift-invert.
        #[arg(long)]
        direct: bool,
    },

    /// Eigenvalue counts below a threshold across nested boxes.
    ProbeCompactness {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long)]
        lambda: f64,
        /// Half-widths of the nested boxes, e.g. "4,6,8,10".
        #[arg(long, value_parser = parse_f64_list)]
        boxes: F64List,
        #[arg(long, default_value_t = 0.4)]
        h: f64,
    },

    /// Localized quadratic-form identity residual.
    ImsCheck {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, value_parser = parse_box)]
        r#box: Box2,
        /// Partition grid nodes per dimension (boundary included).
        #[arg(long, default_value_t = 257)]
        res: usize,
        #[arg(long, default_value_t = 0.3)]
        r: f64,
        #[arg(long, default_value_t = witten_core::localization::DEFAULT_EPS)]
        eps: f64,
        /// Fixed bump centers, semicolon-separated points; greedy cover
        /// when omitted.
        #[arg(long, value_parser = parse_point_list)]
        centers: Option<PointList>,
        #[arg(long, value_parser = parse_point)]
        bump_center: Point,
        #[arg(long, default_value_t = 0.25)]
        bump_radius: f64,
    },

    /// Ratio sweep for the maximal estimate over a family of test bumps.
    MaximalEstimate {
        #[command(flatten)]
        potential: PotentialArgs,
        /// One or more tau values, comma-separated.
        #[arg(long, value_parser = parse_f64_list, default_value = "1")]
        tau: F64List,
        #[arg(long, value_parser = parse_box)]
        r#box: Box2,
        #[arg(long, default_value_t = 129)]
        res: usize,
        /// Bump centers, semicolon-separated points; a default lattice in
        /// the half box when omitted.
        #[arg(long, value_parser = parse_point_list)]
        centers: Option<PointList>,
        #[arg(long, default_value_t = 1.0)]
        bump_radius: f64,
    },

    /// Interpolation weight m_tau with its bracketing check.
    Mtau {
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        tau0: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
}

pub type Point = Vec<f64>;
pub type PointList = Vec<Vec<f64>>;
pub type Box2 = Vec<[f64; 2]>;
pub type F64List = Vec<f64>;
pub type U64List = Vec<u64>;

pub fn parse_point(s: &str) -> Result<Point, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect()
}

pub fn parse_point_list(s: &str) -> Result<PointList, String> {
    s.split(';').map(parse_point).collect()
}

pub fn parse_f64_list(s: &str) -> Result<F64List, String> {
    parse_point(s)
}

pub fn parse_u64_list(s: &str) -> Result<U64List, String> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| e.to_string()))
        .collect()
}

/// "lo:hi,lo:hi" -> per-dimension bounds.
pub fn parse_box(s: &str) -> Result<Box2, String> {
    s.split(',')
        .map(|side| {
            let parts: Vec<&str> = side.split(':').collect();
            if parts.len() != 2 {
                return Err(format!("box side `{side}` is not lo:hi"));
            }
            let lo = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
            let hi = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
            Ok([lo, hi])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_parser() {
        assert_eq!(
            parse_box("-4:4,-2:2").unwrap(),
            vec![[-4.0, 4.0], [-2.0, 2.0]]
        );
        assert!(parse_box("4").is_err());
    }

    #[test]
    fn point_list_parser() {
        assert_eq!(
            parse_point_list("0.3;0.7").unwrap(),
            vec![vec![0.3], vec![0.7]]
        );
        assert_eq!(
            parse_point_list("1,0;0,1").unwrap(),
            vec![vec![1.0, 0.0], vec![0.0, 1.0]]
        );
    }
}
