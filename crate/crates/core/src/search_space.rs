//! Layer-wise search space of inverted-bottleneck blocks.
//!
//! A model is a [`Chromosome`] of 14 genes. Each gene picks one of the 12
//! [`BlockChoice`]s (expansion 3 or 6, kernel 3/5/7, with or without
//! squeeze-and-excitation) for the corresponding searchable layer of a fixed
//! skeleton whose channels, strides and non-linearities never change.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseChromosomeError, Result};

pub const NUM_LAYERS: usize = 14;
pub const NUM_CHOICES: usize = 12;

/// Default classifier width.
pub const DEFAULT_NUM_CLASSES: u32 = 1000;
pub const INPUT_RESOLUTION: u32 = 224;

pub const STEM_CHANNELS: u32 = 16;
pub const HEAD_CHANNELS: u32 = 960;
pub const FEATURE_CHANNELS: u32 = 1280;

/// Row of the first searchable block in [`ArchitectureSpec::layers`]
/// (after the stem conv and the fixed expansion-1 block).
pub const FIRST_SEARCHABLE_ROW: usize = 2;

/// Configuration of one searchable inverted-bottleneck block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockChoice {
    pub expansion: u32,
    pub kernel: u32,
    pub se: bool,
}

impl BlockChoice {
    const fn new(expansion: u32, kernel: u32, se: bool) -> Self {
        BlockChoice {
            expansion,
            kernel,
            se,
        }
    }
}

impl fmt::Display for BlockChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MBE{}_K{}", self.expansion, self.kernel)?;
        if self.se {
            f.write_str("_SE")?;
        }
        Ok(())
    }
}

/// The 12 choices, in index order.
pub const CHOICES: [BlockChoice; NUM_CHOICES] = [
    BlockChoice::new(3, 3, false),
    BlockChoice::new(3, 3, true),
    BlockChoice::new(3, 5, false),
    BlockChoice::new(3, 5, true),
    BlockChoice::new(3, 7, false),
    BlockChoice::new(3, 7, true),
    BlockChoice::new(6, 3, false),
    BlockChoice::new(6, 3, true),
    BlockChoice::new(6, 5, false),
    BlockChoice::new(6, 5, true),
    BlockChoice::new(6, 7, false),
    BlockChoice::new(6, 7, true),
];

pub fn choice_of_index(idx: usize) -> Result<BlockChoice> {
    CHOICES.get(idx).copied().ok_or(Error::ChoiceIndex(idx))
}

pub fn index_of_choice(choice: BlockChoice) -> Result<usize> {
    let expansion = match choice.expansion {
        3 => 0,
        6 => 1,
        _ => return Err(illegal(choice)),
    };
    let kernel = match choice.kernel {
        3 => 0,
        5 => 1,
        7 => 2,
        _ => return Err(illegal(choice)),
    };
    Ok(expansion * 6 + kernel * 2 + usize::from(choice.se))
}

fn illegal(choice: BlockChoice) -> Error {
    Error::IllegalChoice {
        expansion: choice.expansion,
        kernel: choice.kernel,
    }
}

/// Fixed-length genotype: one choice index per searchable layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chromosome([u8; NUM_LAYERS]);

impl Chromosome {
    pub fn new(genes: [u8; NUM_LAYERS]) -> Result<Self> {
        if let Some(&bad) = genes.iter().find(|&&g| g as usize >= NUM_CHOICES) {
            return Err(Error::ChoiceIndex(bad as usize));
        }
        Ok(Chromosome(genes))
    }

    pub fn from_slice(genes: &[u8]) -> Result<Self> {
        let genes: [u8; NUM_LAYERS] = genes
            .try_into()
            .map_err(|_| Error::ParseChromosome(ParseChromosomeError::Length(genes.len())))?;
        Chromosome::new(genes)
    }

    /// All genes set to `choice`.
    pub fn uniform(choice: u8) -> Result<Self> {
        Chromosome::new([choice; NUM_LAYERS])
    }

    pub fn genes(&self) -> &[u8; NUM_LAYERS] {
        &self.0
    }

    pub fn gene(&self, layer: usize) -> usize {
        self.0[layer] as usize
    }

    pub fn choice(&self, layer: usize) -> BlockChoice {
        CHOICES[self.gene(layer)]
    }

    pub fn choices(&self) -> impl Iterator<Item = BlockChoice> + '_ {
        self.0.iter().map(|&g| CHOICES[g as usize])
    }

    pub(crate) fn genes_mut(&mut self) -> &mut [u8; NUM_LAYERS] {
        &mut self.0
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for Chromosome {
    type Err = ParseChromosomeError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(',').map(str::trim).collect();
        if parts.len() != NUM_LAYERS {
            let found = if s.trim().is_empty() { 0 } else { parts.len() };
            return Err(ParseChromosomeError::Length(found));
        }
        let mut genes = [0u8; NUM_LAYERS];
        for (i, part) in parts.iter().enumerate() {
            let value: i64 = part.parse().map_err(|_| ParseChromosomeError::NotInteger {
                position: i + 1,
                text: part.to_string(),
            })?;
            if !(0..NUM_CHOICES as i64).contains(&value) {
                return Err(ParseChromosomeError::OutOfRange {
                    position: i + 1,
                    value,
                });
            }
            genes[i] = value as u8;
        }
        Ok(Chromosome(genes))
    }
}

impl Serialize for Chromosome {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Chromosome {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Number of distinct chromosomes in the full space, 12^14.
pub fn search_space_size() -> u128 {
    (NUM_CHOICES as u128).pow(NUM_LAYERS as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Nonlinearity {
    #[serde(rename = "RE")]
    Relu,
    #[serde(rename = "HS")]
    HardSwish,
}

impl Nonlinearity {
    pub fn label(self) -> &'static str {
        match self {
            Nonlinearity::Relu => "RE",
            Nonlinearity::HardSwish => "HS",
        }
    }
}

/// Non-searchable part of a searchable layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkeletonLayer {
    /// 1-based layer number.
    pub index: usize,
    pub out_channels: u32,
    pub stride: u32,
    pub nonlinearity: Nonlinearity,
}

const fn layer(
    index: usize,
    out_channels: u32,
    stride: u32,
    nonlinearity: Nonlinearity,
) -> SkeletonLayer {
    SkeletonLayer {
        index,
        out_channels,
        stride,
        nonlinearity,
    }
}

use Nonlinearity::{HardSwish as HS, Relu as RE};

pub const SKELETON: [SkeletonLayer; NUM_LAYERS] = [
    layer(1, 24, 2, RE),
    layer(2, 24, 1, RE),
    layer(3, 40, 2, RE),
    layer(4, 40, 1, RE),
    layer(5, 40, 1, RE),
    layer(6, 80, 2, HS),
    layer(7, 80, 1, HS),
    layer(8, 80, 1, HS),
    layer(9, 80, 1, HS),
    layer(10, 112, 1, HS),
    layer(11, 112, 1, HS),
    layer(12, 160, 2, HS),
    layer(13, 160, 1, HS),
    layer(14, 160, 1, HS),
];

/// Input channels of searchable layer `i` (0-based).
pub fn layer_in_channels(i: usize) -> u32 {
    if i == 0 {
        STEM_CHANNELS
    } else {
        SKELETON[i - 1].out_channels
    }
}

/// One structural operation of a decoded network, in forward order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    /// Dense convolution followed by batch norm.
    Conv {
        kernel: u32,
        in_channels: u32,
        out_channels: u32,
        stride: u32,
        nonlinearity: Nonlinearity,
    },
    /// Inverted bottleneck: optional 1x1 expansion, depthwise conv, optional
    /// squeeze-and-excitation, 1x1 projection.
    Bottleneck {
        expansion: u32,
        kernel: u32,
        in_channels: u32,
        out_channels: u32,
        stride: u32,
        se: bool,
        nonlinearity: Nonlinearity,
    },
    /// Global average pooling over the whole feature map.
    GlobalPool { channels: u32 },
    /// 1x1 convolution applied after pooling, without normalization.
    PooledConv {
        in_channels: u32,
        out_channels: u32,
        nonlinearity: Nonlinearity,
    },
    /// Final 1x1 classifier with bias.
    Classifier { in_channels: u32, num_classes: u32 },
}

impl Op {
    pub fn out_channels(&self) -> u32 {
        match *self {
            Op::Conv { out_channels, .. }
            | Op::Bottleneck { out_channels, .. }
            | Op::PooledConv { out_channels, .. } => out_channels,
            Op::GlobalPool { channels } => channels,
            Op::Classifier { num_classes, .. } => num_classes,
        }
    }

    pub fn in_channels(&self) -> u32 {
        match *self {
            Op::Conv { in_channels, .. }
            | Op::Bottleneck { in_channels, .. }
            | Op::PooledConv { in_channels, .. }
            | Op::Classifier { in_channels, .. } => in_channels,
            Op::GlobalPool { channels } => channels,
        }
    }
}

/// An op together with the spatial size of its input feature map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerRow {
    pub input_size: u32,
    pub op: Op,
}

impl LayerRow {
    pub fn output_size(&self) -> u32 {
        match self.op {
            Op::Conv { stride, .. } | Op::Bottleneck { stride, .. } => self.input_size / stride,
            Op::GlobalPool { .. } | Op::PooledConv { .. } | Op::Classifier { .. } => 1,
        }
    }
}

/// A searchable block after decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub choice: BlockChoice,
    pub layer: SkeletonLayer,
    pub in_channels: u32,
}

/// Structural description of a decoded network: fixed stem, 14 configured
/// blocks and a fixed tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchitectureSpec {
    pub chromosome: Chromosome,
    pub blocks: [Block; NUM_LAYERS],
    pub num_classes: u32,
    pub input_resolution: u32,
}

impl ArchitectureSpec {
    /// Full forward sequence of ops with input sizes at `resolution`.
    pub fn layers_at(&self, resolution: u32) -> Vec<LayerRow> {
        let mut rows = Vec::with_capacity(NUM_LAYERS + 6);
        let mut size = resolution;
        let mut push = |op: Op, size: &mut u32| {
            let row = LayerRow {
                input_size: *size,
                op,
            };
            *size = row.output_size();
            rows.push(row);
        };
        push(
            Op::Conv {
                kernel: 3,
                in_channels: 3,
                out_channels: STEM_CHANNELS,
                stride: 2,
                nonlinearity: HS,
            },
            &mut size,
        );
        push(
            Op::Bottleneck {
                expansion: 1,
                kernel: 3,
                in_channels: STEM_CHANNELS,
                out_channels: STEM_CHANNELS,
                stride: 1,
                se: false,
                nonlinearity: RE,
            },
            &mut size,
        );
        for block in &self.blocks {
            push(
                Op::Bottleneck {
                    expansion: block.choice.expansion,
                    kernel: block.choice.kernel,
                    in_channels: block.in_channels,
                    out_channels: block.layer.out_channels,
                    stride: block.layer.stride,
                    se: block.choice.se,
                    nonlinearity: block.layer.nonlinearity,
                },
                &mut size,
            );
        }
        let last = SKELETON[NUM_LAYERS - 1].out_channels;
        push(
            Op::Conv {
                kernel: 1,
                in_channels: last,
                out_channels: HEAD_CHANNELS,
                stride: 1,
                nonlinearity: HS,
            },
            &mut size,
        );
        push(
            Op::GlobalPool {
                channels: HEAD_CHANNELS,
            },
            &mut size,
        );
        push(
            Op::PooledConv {
                in_channels: HEAD_CHANNELS,
                out_channels: FEATURE_CHANNELS,
                nonlinearity: HS,
            },
            &mut size,
        );
        push(
            Op::Classifier {
                in_channels: FEATURE_CHANNELS,
                num_classes: self.num_classes,
            },
            &mut size,
        );
        rows
    }

    pub fn layers(&self) -> Vec<LayerRow> {
        self.layers_at(self.input_resolution)
    }
}

pub fn decode_architecture(chromosome: &Chromosome, num_classes: u32) -> ArchitectureSpec {
    let blocks = std::array::from_fn(|i| Block {
        choice: chromosome.choice(i),
        layer: SKELETON[i],
        in_channels: layer_in_channels(i),
    });
    ArchitectureSpec {
        chromosome: *chromosome,
        blocks,
        num_classes,
        input_resolution: INPUT_RESOLUTION,
    }
}

/// Which layers are searchable. Pinned layers always carry their fixed choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchSpace {
    pinned: [Option<u8>; NUM_LAYERS],
}

impl SearchSpace {
    pub fn full() -> Self {
        SearchSpace::default()
    }

    pub fn with_pinned(pinned: [Option<u8>; NUM_LAYERS]) -> Result<Self> {
        if let Some(bad) = pinned
            .iter()
            .flatten()
            .find(|&&g| g as usize >= NUM_CHOICES)
        {
            return Err(Error::ChoiceIndex(*bad as usize));
        }
        Ok(SearchSpace { pinned })
    }

    /// The first `free` layers searchable, the rest pinned to `choice`.
    pub fn prefix(free: usize, choice: u8) -> Result<Self> {
        if free > NUM_LAYERS {
            return Err(Error::Config(format!(
                "cannot free {free} of {NUM_LAYERS} layers"
            )));
        }
        SearchSpace::with_pinned(std::array::from_fn(|i| (i >= free).then_some(choice)))
    }

    pub fn pinned(&self, layer: usize) -> Option<u8> {
        self.pinned[layer]
    }

    pub fn is_free(&self, layer: usize) -> bool {
        self.pinned[layer].is_none()
    }

    pub fn free_layers(&self) -> impl Iterator<Item = usize> + '_ {
        (0..NUM_LAYERS).filter(|&i| self.is_free(i))
    }

    /// Allowed choice indices at `layer`.
    pub fn allowed(&self, layer: usize) -> Vec<u8> {
        match self.pinned[layer] {
            Some(g) => vec![g],
            None => (0..NUM_CHOICES as u8).collect(),
        }
    }

    pub fn cardinality(&self) -> u128 {
        (NUM_CHOICES as u128).pow(self.free_layers().count() as u32)
    }

    pub fn contains(&self, chromosome: &Chromosome) -> bool {
        self.pinned
            .iter()
            .zip(chromosome.genes())
            .all(|(p, g)| p.is_none_or(|p| p == *g))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Chromosome {
        let genes = std::array::from_fn(|i| match self.pinned[i] {
            Some(g) => g,
            None => rng.gen_range(0..NUM_CHOICES as u8),
        });
        Chromosome(genes)
    }

    /// `n` distinct chromosomes such that every allowed choice appears at
    /// every layer. The first 12 form a Latin-style cover (each free layer
    /// column is a random permutation of 0..12); the rest are uniform draws.
    pub fn diversity_init<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
    ) -> Result<Vec<Chromosome>> {
        if n < NUM_CHOICES {
            return Err(Error::Config(format!(
                "population size {n} is smaller than the {NUM_CHOICES} choices per layer"
            )));
        }
        if (n as u128) > self.cardinality() {
            return Err(Error::Config(format!(
                "population size {n} exceeds the {} distinct chromosomes of the search space",
                self.cardinality()
            )));
        }
        let columns: Vec<Vec<u8>> = (0..NUM_LAYERS)
            .map(|_| {
                let mut col: Vec<u8> = (0..NUM_CHOICES as u8).collect();
                col.shuffle(rng);
                col
            })
            .collect();
        let mut out: Vec<Chromosome> = Vec::with_capacity(n);
        let mut seen = std::collections::HashSet::with_capacity(n);
        #[allow(clippy::needless_range_loop)]
        for j in 0..NUM_CHOICES {
            let genes = std::array::from_fn(|i| self.pinned[i].unwrap_or(columns[i][j]));
            let m = Chromosome(genes);
            // distinct rows unless every layer is pinned, which cardinality rules out
            if seen.insert(m) {
                out.push(m);
            }
        }
        while out.len() < n {
            let m = self.sample(rng);
            if seen.insert(m) {
                out.push(m);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for SearchSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.pinned.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match p {
                Some(g) => write!(f, "{g}")?,
                None => f.write_str("*")?,
            }
        }
        Ok(())
    }
}

impl FromStr for SearchSpace {
    type Err = Error;

    /// Mask text: 14 comma-separated entries, `*` for a searchable layer or a
    /// choice index to pin it.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != NUM_LAYERS {
            return Err(Error::Config(format!(
                "search space mask: expected 14 entries, found {}",
                parts.len()
            )));
        }
        let mut pinned = [None; NUM_LAYERS];
        for (i, part) in parts.iter().enumerate() {
            if *part != "*" {
                let g: u8 = part.parse().map_err(|_| {
                    Error::Config(format!(
                        "search space mask entry {}: {part:?} is neither '*' nor a choice index",
                        i + 1
                    ))
                })?;
                pinned[i] = Some(g);
            }
        }
        SearchSpace::with_pinned(pinned)
    }
}

pub fn random_chromosome<R: Rng + ?Sized>(rng: &mut R) -> Chromosome {
    SearchSpace::full().sample(rng)
}

pub fn diversity_init<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<Chromosome>> {
    SearchSpace::full().diversity_init(n, rng)
}

/// Published reference genotypes.
pub mod presets {
    use super::Chromosome;

    /// Genotype A as listed layer by layer in its architecture table.
    pub const MODEL_A: Chromosome = Chromosome([8, 10, 6, 7, 1, 7, 6, 10, 5, 10, 6, 6, 9, 9]);
    /// Genotype A as drawn in the architecture diagram: SE on layer 3
    /// instead of layer 6.
    pub const MODEL_A_DIAGRAM: Chromosome =
        Chromosome([8, 10, 7, 7, 1, 6, 6, 10, 5, 10, 6, 6, 9, 9]);
    pub const MODEL_B: Chromosome = Chromosome([0, 0, 10, 0, 8, 7, 9, 0, 11, 10, 2, 11, 11, 7]);
    pub const MODEL_C: Chromosome = Chromosome([2, 0, 2, 0, 2, 2, 9, 2, 2, 6, 7, 7, 7, 7]);
}
