//! Analytic parameter and multiply-add counts of decoded architectures.
//!
//! Counting conventions:
//! - convolutions carry no bias; every normalized tensor adds 2 parameters
//!   per channel (batch-norm scale and shift);
//! - squeeze-and-excitation is two fully connected layers
//!   `c_exp -> ceil(c_exp / 4) -> c_exp`, both with biases, at 1x1;
//! - the 1x1 conv after global pooling is neither normalized nor biased;
//!   the classifier has a bias;
//! - one multiply-accumulate counts as one op; pooling, activations and
//!   residual additions are free.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::search_space::{ArchitectureSpec, BlockChoice, LayerRow, Op};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelStats {
    pub params: u64,
    pub madds: u64,
}

/// Multiply-adds split by where they happen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MaddsBreakdown {
    /// Convolutions over a spatial feature map; scales with resolution².
    pub feature_map: u64,
    /// SE fully connected layers, the pooled conv and the classifier.
    pub pooled: u64,
}

impl MaddsBreakdown {
    pub fn total(&self) -> u64 {
        self.feature_map + self.pooled
    }
}

pub fn se_reduced_channels(expanded: u64) -> u64 {
    expanded.div_ceil(4)
}

fn se_weights(expanded: u64) -> u64 {
    let reduced = se_reduced_channels(expanded);
    2 * expanded * reduced
}

fn se_params(expanded: u64) -> u64 {
    se_weights(expanded) + se_reduced_channels(expanded) + expanded
}

/// Parameters of one inverted-bottleneck block.
pub fn bottleneck_params(
    in_channels: u32,
    expansion: u32,
    kernel: u32,
    out_channels: u32,
    se: bool,
) -> u64 {
    let (cin, cout, k) = (in_channels as u64, out_channels as u64, kernel as u64);
    let cexp = cin * expansion as u64;
    let mut params = 0;
    if !(expansion == 1 && cin == cexp) {
        params += cin * cexp + 2 * cexp;
    }
    params += k * k * cexp + 2 * cexp;
    if se {
        params += se_params(cexp);
    }
    params + cexp * cout + 2 * cout
}

/// Parameters of a searchable block given its choice.
pub fn block_params(in_channels: u32, choice: BlockChoice, out_channels: u32) -> u64 {
    bottleneck_params(
        in_channels,
        choice.expansion,
        choice.kernel,
        out_channels,
        choice.se,
    )
}

fn row_params(row: &LayerRow) -> u64 {
    match row.op {
        Op::Conv {
            kernel,
            in_channels,
            out_channels,
            ..
        } => {
            let k = kernel as u64;
            k * k * in_channels as u64 * out_channels as u64 + 2 * out_channels as u64
        }
        Op::Bottleneck {
            expansion,
            kernel,
            in_channels,
            out_channels,
            se,
            ..
        } => bottleneck_params(in_channels, expansion, kernel, out_channels, se),
        Op::GlobalPool { .. } => 0,
        Op::PooledConv {
            in_channels,
            out_channels,
            ..
        } => in_channels as u64 * out_channels as u64,
        Op::Classifier {
            in_channels,
            num_classes,
        } => (in_channels as u64 + 1) * num_classes as u64,
    }
}

/// Multiply-adds of one row of a decoded network.
pub fn layer_madds(row: &LayerRow) -> MaddsBreakdown {
    let out = row.output_size() as u64;
    let area_in = row.input_size as u64 * row.input_size as u64;
    let area_out = out * out;
    match row.op {
        Op::Conv {
            kernel,
            in_channels,
            out_channels,
            ..
        } => {
            let k = kernel as u64;
            MaddsBreakdown {
                feature_map: k * k * in_channels as u64 * out_channels as u64 * area_out,
                pooled: 0,
            }
        }
        Op::Bottleneck {
            expansion,
            kernel,
            in_channels,
            out_channels,
            se,
            ..
        } => {
            let (cin, cout, k) = (in_channels as u64, out_channels as u64, kernel as u64);
            let cexp = cin * expansion as u64;
            let mut feature_map = 0;
            if !(expansion == 1 && cin == cexp) {
                feature_map += cin * cexp * area_in;
            }
            feature_map += k * k * cexp * area_out;
            feature_map += cexp * cout * area_out;
            let pooled = if se { se_weights(cexp) } else { 0 };
            MaddsBreakdown {
                feature_map,
                pooled,
            }
        }
        Op::GlobalPool { .. } => MaddsBreakdown::default(),
        Op::PooledConv {
            in_channels,
            out_channels,
            ..
        } => MaddsBreakdown {
            feature_map: 0,
            pooled: in_channels as u64 * out_channels as u64,
        },
        Op::Classifier {
            in_channels,
            num_classes,
        } => MaddsBreakdown {
            feature_map: 0,
            pooled: in_channels as u64 * num_classes as u64,
        },
    }
}

pub fn count_params(arch: &ArchitectureSpec) -> u64 {
    // parameter counts do not depend on the resolution
    arch.layers().iter().map(row_params).sum()
}

fn check_resolution(resolution: u32) -> Result<()> {
    if resolution == 0 || !resolution.is_multiple_of(32) {
        return Err(Error::Domain(format!(
            "input resolution {resolution} is not a positive multiple of 32"
        )));
    }
    Ok(())
}

pub fn madds_breakdown(arch: &ArchitectureSpec, resolution: u32) -> Result<MaddsBreakdown> {
    check_resolution(resolution)?;
    Ok(arch.layers_at(resolution).iter().map(layer_madds).fold(
        MaddsBreakdown::default(),
        |acc, m| MaddsBreakdown {
            feature_map: acc.feature_map + m.feature_map,
            pooled: acc.pooled + m.pooled,
        },
    ))
}

pub fn count_madds(arch: &ArchitectureSpec, resolution: u32) -> Result<u64> {
    madds_breakdown(arch, resolution).map(|b| b.total())
}

pub fn model_stats(arch: &ArchitectureSpec, resolution: u32) -> Result<ModelStats> {
    Ok(ModelStats {
        params: count_params(arch),
        madds: count_madds(arch, resolution)?,
    })
}

/// Multiply-adds of a lone dense convolution; used for spot checks.
pub fn conv_madds(kernel: u32, in_channels: u32, out_channels: u32, output_size: u32) -> u64 {
    let k = kernel as u64;
    k * k * in_channels as u64 * out_channels as u64 * (output_size as u64).pow(2)
}
