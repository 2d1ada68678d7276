//! One entry point for every extraction method.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::baselines::{cluster_endpoints, ief, sam, visvalingam};
use crate::extraction::{build_initial_map, extract, ExtractionConfig, ExtractionError};
use crate::geometry::PolylineMap;
use crate::optimization::{optimize, OptimizeError, OptimizerOptions};
use crate::scan::Scan;
use crate::sensor_model::NoiseModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ple,
    PlePlus,
    Vvl,
    Ief,
    Sam,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Ple, Method::PlePlus, Method::Vvl, Method::Ief, Method::Sam];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ple => "ple",
            Method::PlePlus => "ple+",
            Method::Vvl => "vvl",
            Method::Ief => "ief",
            Method::Sam => "sam",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("unknown method {0:?} (expected one of ple, ple+, vvl, ief, sam)")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MethodError {
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
    #[error(transparent)]
    Optimization(#[from] OptimizeError),
}

/// Runs `method` on `scan`.
///
/// The baselines share the clustering parameters (`r_max`, `l_max`) and the
/// vertex budget of `config`; the stopping rule and `d_rm` only affect the
/// likelihood-based methods. Max-range readings never enter any map.
pub fn run_method(
    method: Method,
    scan: &Scan,
    config: &ExtractionConfig,
    noise: &dyn NoiseModel,
    optimizer: &OptimizerOptions,
) -> Result<PolylineMap, MethodError> {
    config.validate()?;
    let r_max = config.r_max.unwrap_or(scan.max_range());
    let budget = config.max_vertices;
    Ok(match method {
        Method::Ple => extract(scan, config, noise)?.map,
        Method::PlePlus => {
            let map = extract(scan, config, noise)?.map;
            let opts = OptimizerOptions {
                d_rm: config.d_rm,
                ..optimizer.clone()
            };
            optimize(&map, scan, noise, &opts)?.map
        }
        Method::Vvl => visvalingam(&build_initial_map(scan, r_max, config.l_max), budget),
        Method::Ief => ief(&cluster_endpoints(&scan.without_max_range(), r_max, config.l_max), budget),
        Method::Sam => sam(&cluster_endpoints(&scan.without_max_range(), r_max, config.l_max), budget),
    })
}
