//! Feature-map shapes and multiply-add counts for declarative CNN
//! descriptions.
//!
//! A network is a JSON document:
//!
//! ```json
//! { "name": "...", "input": [H, W, C],
//!   "layers": [ { "kind": "conv", "kernel": [3, 3], "out": 16, "stride": 2 }, ... ] }
//! ```
//!
//! Layer kinds:
//!
//! * `conv`: `kernel`, `out`, `stride` (1 or 2), optional `repeat` (needs `in == out`).
//! * `downsample`: stride-2 block; a `kernel` conv to `out - in` channels
//!   concatenated with a pooled copy of the input when `in < out`, a plain
//!   conv to `out` otherwise.
//! * `block-group`: `repeat` densely connected modules growing the channel
//!   count by `(out - in) / repeat` each. Every module runs `body` (a list of
//!   kernel shapes): the first maps the current width to the growth rate,
//!   the rest are growth-to-growth.
//!
//! `in` is optional everywhere and defaults to the previous layer's output
//! (or the input channel count). One multiply-add is counted per kernel tap
//! per output element; bias, normalization, activation and pooling are free.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    Conv,
    Downsample,
    BlockGroup,
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LayerKind::Conv => "conv",
            LayerKind::Downsample => "downsample",
            LayerKind::BlockGroup => "block-group",
        })
    }
}

fn default_kernel() -> [usize; 2] {
    [3, 3]
}

fn default_repeat() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default = "default_kernel")]
    pub kernel: [usize; 2],
    #[serde(rename = "in", default, skip_serializing_if = "Option::is_none")]
    pub in_channels: Option<usize>,
    #[serde(rename = "out")]
    pub out_channels: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default = "default_repeat")]
    pub repeat: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<Vec<[usize; 2]>>,
}

impl LayerSpec {
    pub fn conv(kernel: [usize; 2], out: usize, stride: usize) -> Self {
        LayerSpec {
            kind: LayerKind::Conv,
            label: None,
            kernel,
            in_channels: None,
            out_channels: out,
            stride: Some(stride),
            repeat: 1,
            body: None,
        }
    }

    pub fn stride(&self) -> usize {
        self.stride.unwrap_or(match self.kind {
            LayerKind::Downsample => 2,
            _ => 1,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub name: String,
    pub input: [usize; 3],
    pub layers: Vec<LayerSpec>,
}

/// Output shape and cost of one layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerShape {
    pub label: String,
    pub kind: LayerKind,
    pub in_channels: usize,
    /// (H, W, C) after the layer.
    pub output: [usize; 3],
    pub multiply_adds: u64,
    pub repeats: usize,
}

impl NetSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: NetSpec = serde_json::from_str(text)?;
        spec.feature_shapes()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("NetSpec is always serializable")
    }

    /// Same layers, different input dims.
    pub fn with_input(mut self, input: [usize; 3]) -> Self {
        self.input = input;
        self
    }

    /// Total modules across all block groups.
    pub fn block_repeats(&self) -> usize {
        self.layers
            .iter()
            .filter(|l| l.kind == LayerKind::BlockGroup)
            .map(|l| l.repeat)
            .sum()
    }

    pub fn feature_shapes(&self) -> Result<Vec<LayerShape>> {
        let [mut h, mut w, mut c] = self.input;
        if h == 0 || w == 0 || c == 0 {
            return Err(Error::NetSpec(format!("input {:?} has a zero axis", self.input)));
        }
        let mut shapes = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let label = layer.label.clone().unwrap_or_else(|| format!("layer {i}"));
            let fail = |msg: String| Error::NetSpec(format!("{label}: {msg}"));

            let cin = layer.in_channels.unwrap_or(c);
            if cin != c {
                return Err(fail(format!("declares {cin} input channels but receives {c}")));
            }
            let cout = layer.out_channels;
            let stride = layer.stride();
            let [kh, kw] = layer.kernel;
            if kh == 0 || kw == 0 {
                return Err(fail("kernel dims must be at least 1".into()));
            }
            if cout == 0 {
                return Err(fail("output channels must be at least 1".into()));
            }
            if !(1..=2).contains(&stride) {
                return Err(fail(format!("stride {stride} is not 1 or 2")));
            }
            if layer.repeat == 0 {
                return Err(fail("repeat must be at least 1".into()));
            }
            if layer.body.is_some() && layer.kind != LayerKind::BlockGroup {
                return Err(fail("only block groups take a body".into()));
            }

            if stride == 2 {
                h = h.div_ceil(2);
                w = w.div_ceil(2);
            }
            let area = (h * w) as u64;
            let k = (kh * kw) as u64;
            let madds = match layer.kind {
                LayerKind::Conv => {
                    if layer.repeat > 1 && (cin != cout || stride != 1) {
                        return Err(fail("repeated convs must be stride 1 with in == out".into()));
                    }
                    k * (cin * cout) as u64 * area * layer.repeat as u64
                }
                LayerKind::Downsample => {
                    if stride != 2 || layer.repeat != 1 {
                        return Err(fail("downsample blocks are single stride-2 layers".into()));
                    }
                    let conv_out = if cin < cout { cout - cin } else { cout };
                    k * (cin * conv_out) as u64 * area
                }
                LayerKind::BlockGroup => {
                    if stride != 1 {
                        return Err(fail("block groups keep the spatial size".into()));
                    }
                    if cout <= cin || (cout - cin) % layer.repeat != 0 {
                        return Err(fail(format!(
                            "{cin} -> {cout} is not an integral growth over {} modules",
                            layer.repeat
                        )));
                    }
                    let growth = (cout - cin) / layer.repeat;
                    let body = layer.body.clone().unwrap_or_else(|| vec![layer.kernel]);
                    let Some((first, rest)) = body.split_first() else {
                        return Err(fail("empty body".into()));
                    };
                    if body.iter().any(|[a, b]| *a == 0 || *b == 0) {
                        return Err(fail("body kernel dims must be at least 1".into()));
                    }
                    let tail: u64 = rest.iter().map(|[a, b]| (a * b * growth * growth) as u64).sum();
                    (0..layer.repeat)
                        .map(|m| {
                            let width = cin + m * growth;
                            ((first[0] * first[1] * width * growth) as u64 + tail) * area
                        })
                        .sum()
                }
            };
            c = cout;
            shapes.push(LayerShape {
                label,
                kind: layer.kind,
                in_channels: cin,
                output: [h, w, c],
                multiply_adds: madds,
                repeats: layer.repeat,
            });
        }
        Ok(shapes)
    }

    pub fn multiply_adds(&self) -> Result<u64> {
        Ok(self.feature_shapes()?.iter().map(|s| s.multiply_adds).sum())
    }

    pub fn report(&self) -> Result<Report> {
        let layers = self.feature_shapes()?;
        let total = layers.iter().map(|s| s.multiply_adds).sum();
        Ok(Report {
            name: self.name.clone(),
            input: self.input,
            layers,
            total,
        })
    }
}

pub fn feature_shapes(spec: &NetSpec) -> Result<Vec<LayerShape>> {
    spec.feature_shapes()
}

pub fn multiply_adds(spec: &NetSpec) -> Result<u64> {
    spec.multiply_adds()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub name: String,
    pub input: [usize; 3],
    pub layers: Vec<LayerShape>,
    pub total: u64,
}

impl Report {
    pub fn final_shape(&self) -> [usize; 3] {
        self.layers.last().map_or(self.input, |l| l.output)
    }
}

fn billions(n: u64) -> String {
    format!("{:.2}B", n as f64 / 1e9)
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [h, w, c] = self.input;
        writeln!(f, "{} (input {h}x{w}x{c})", self.name)?;
        for s in &self.layers {
            let [h, w, c] = s.output;
            let reps = if s.repeats > 1 { format!(" x{}", s.repeats) } else { String::new() };
            writeln!(
                f,
                "  {:<24} {:<11} {:>5} -> {h}x{w}x{c}{reps}  {} multiply-adds",
                s.label, s.kind.to_string(), s.in_channels, s.multiply_adds
            )?;
        }
        writeln!(f, "  total {} multiply-adds ({})", self.total, billions(self.total))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub a: Report,
    pub b: Report,
    /// total(a) / total(b)
    pub ratio: f64,
}

pub fn compare(a: &NetSpec, b: &NetSpec) -> Result<Comparison> {
    let (a, b) = (a.report()?, b.report()?);
    let ratio = a.total as f64 / b.total as f64;
    Ok(Comparison { a, b, ratio })
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.a, self.b)?;
        writeln!(f, "ratio {} / {} = {:.4}", self.a.name, self.b.name, self.ratio)
    }
}

const EDANET_JSON: &str = include_str!("../specs/edanet.json");
const DCT_EDANET_JSON: &str = include_str!("../specs/dct_edanet.json");

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 2] = ["edanet", "dct-edanet"];

/// The shipped approximations of the RGB baseline (three downsampling
/// stages, 512x1024x3 input) and of its downsampling-free DCT variant
/// (64x128x192 input, 22 dense modules).
pub fn builtin(name: &str) -> Option<NetSpec> {
    let text = match name {
        "edanet" => EDANET_JSON,
        "dct-edanet" => DCT_EDANET_JSON,
        _ => return None,
    };
    Some(NetSpec::from_json(text).expect("shipped specs are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pure_conv(input: [usize; 3], chans: &[usize]) -> NetSpec {
        NetSpec {
            name: "t".into(),
            input,
            layers: chans.iter().map(|&c| LayerSpec::conv([3, 3], c, 1)).collect(),
        }
    }

    #[test]
    fn single_conv_cost() {
        let spec = pure_conv([512, 1024, 3], &[16]);
        assert_eq!(spec.multiply_adds().unwrap(), 226_492_416);
    }

    #[test]
    fn stride_two_uses_ceiling() {
        let mut spec = pure_conv([5, 9, 1], &[1]);
        spec.layers[0].stride = Some(2);
        assert_eq!(spec.feature_shapes().unwrap()[0].output, [3, 5, 1]);
    }

    #[test]
    fn prepended_stride_two_quarters_downstream() {
        let base = pure_conv([64, 128, 8], &[16, 32, 8]);
        let mut deeper = base.clone();
        deeper.layers.insert(0, LayerSpec::conv([1, 1], 8, 2));
        let before = base.feature_shapes().unwrap();
        let after = deeper.feature_shapes().unwrap();
        for (b, a) in before.iter().zip(&after[1..]) {
            assert_eq!(b.multiply_adds, 4 * a.multiply_adds);
        }
    }

    #[test]
    fn channel_chain_mismatch() {
        let mut spec = pure_conv([8, 8, 3], &[16, 32]);
        spec.layers[1].in_channels = Some(15);
        assert!(matches!(spec.feature_shapes(), Err(Error::NetSpec(_))));
    }

    #[test]
    fn invalid_layers() {
        let mut spec = pure_conv([8, 8, 3], &[16]);
        spec.layers[0].stride = Some(3);
        assert!(spec.feature_shapes().is_err());

        let mut spec = pure_conv([8, 8, 3], &[16]);
        spec.layers[0].kernel = [0, 3];
        assert!(spec.feature_shapes().is_err());

        let mut spec = pure_conv([8, 8, 3], &[16]);
        spec.layers[0].kind = LayerKind::BlockGroup;
        spec.layers[0].repeat = 5; // 13 channels of growth over 5 modules
        assert!(spec.feature_shapes().is_err());
    }

    #[test]
    fn downsample_concat_rule() {
        let spec = NetSpec::from_json(
            r#"{"name":"ds","input":[8,8,3],"layers":[
                {"kind":"downsample","kernel":[3,3],"out":15},
                {"kind":"downsample","kernel":[3,3],"out":4}]}"#,
        )
        .unwrap();
        let shapes = spec.feature_shapes().unwrap();
        assert_eq!(shapes[0].output, [4, 4, 15]);
        assert_eq!(shapes[0].multiply_adds, 9 * 3 * 12 * 16);
        assert_eq!(shapes[1].output, [2, 2, 4]);
        assert_eq!(shapes[1].multiply_adds, 9 * 15 * 4 * 4);
    }

    #[test]
    fn dense_block_cost() {
        let spec = NetSpec::from_json(
            r#"{"name":"dense","input":[2,2,10],"layers":[
                {"kind":"block-group","out":16,"repeat":2,"body":[[1,1],[3,1]]}]}"#,
        )
        .unwrap();
        // growth 3; widths 10, 13; each module: w·3 + 3·3·3
        let per_pixel = (10 * 3 + 27) + (13 * 3 + 27);
        assert_eq!(spec.multiply_adds().unwrap(), per_pixel * 4);
        assert_eq!(spec.feature_shapes().unwrap()[0].output, [2, 2, 16]);
    }

    #[test]
    fn compare_self_and_doubled() {
        let a = pure_conv([32, 32, 4], &[8, 16, 8]);
        assert_eq!(compare(&a, &a).unwrap().ratio, 1.0);
        let b = pure_conv([32, 32, 8], &[16, 32, 16]);
        assert_eq!(compare(&b, &a).unwrap().ratio, 4.0);
        let text = compare(&b, &a).unwrap().to_string();
        assert!(text.contains("ratio t / t = 4.0000"), "{text}");
    }

    #[test]
    fn json_round_trip() {
        let spec = builtin("edanet").unwrap();
        assert_eq!(NetSpec::from_json(&spec.to_json()).unwrap(), spec);
        assert!(builtin("resnet").is_none());
    }

    #[test]
    fn builtins_structure() {
        let eda = builtin("edanet").unwrap();
        assert_eq!(eda.block_repeats(), 13);
        let dct = builtin("dct-edanet").unwrap();
        assert_eq!(dct.block_repeats(), 22);
        assert!(dct.layers.iter().all(|l| l.stride() == 1));
    }
}
