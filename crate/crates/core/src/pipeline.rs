//! End-to-end encode/decode between PPM images and FCRT tensors.
//!
//! Encode: RGB → YCbCr → level shift → blocks → DCT → [quantize] →
//! [dequantize] → FCR → [select] (or the condensed spatial layout).
//! Decode runs the same chain backwards.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::blockdct::{CoeffPlanes, BLOCK_LEN};
use crate::colorspace::{rgb_to_ycc, ycc_to_rgb};
use crate::fcr::{fcr, inverse_fcr, FrequencyOrder, LoadedTensor, SQUARE_SELECTION_FLAG};
use crate::io::{read_ppm, read_tensor, write_atomic, write_ppm, write_tensor, RgbImage, TensorFile};
use crate::quant::{build_qmatrix, dequantize_planes, quantize_planes, QuantSpec};
use crate::select::{apply_selection, condense_nonfcr, preset, SelectionShape, SelectionSpec};
use crate::{Error, Result};

pub const TENSOR_EXTENSION: &str = "fcrt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputDType {
    /// i16 for quantization levels, f32 otherwise.
    #[default]
    Auto,
    F32,
    I16,
}

impl std::str::FromStr for OutputDType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(OutputDType::Auto),
            "f32" => Ok(OutputDType::F32),
            "i16" => Ok(OutputDType::I16),
            other => Err(Error::Config(format!("unknown dtype {other:?}"))),
        }
    }
}

/// JSON experiment manifest. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub quality_factor: Option<i64>,
    pub preset: Option<String>,
    pub selection: Option<[u8; 3]>,
    pub dequantize: Option<bool>,
    pub dtype: Option<OutputDType>,
    pub square: Option<bool>,
    pub ordering: Option<String>,
    pub scale: Option<f64>,
    pub condense: Option<usize>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Overlays `other` on top of `self`; a selection in `other` (preset or
    /// explicit) replaces both selection keys here.
    pub fn merge(mut self, other: ConfigFile) -> Self {
        if other.preset.is_some() || other.selection.is_some() {
            self.preset = other.preset;
            self.selection = other.selection;
        }
        self.quality_factor = other.quality_factor.or(self.quality_factor);
        self.dequantize = other.dequantize.or(self.dequantize);
        self.dtype = other.dtype.or(self.dtype);
        self.square = other.square.or(self.square);
        self.ordering = other.ordering.or(self.ordering);
        self.scale = other.scale.or(self.scale);
        self.condense = other.condense.or(self.condense);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub quant: Option<QuantSpec>,
    pub selection: Option<SelectionSpec>,
    pub dequantize: bool,
    pub dtype: OutputDType,
    pub order: FrequencyOrder,
    /// Multiplier applied to f32 payloads.
    pub scale: f64,
    /// Emit the condensed spatial layout keeping k×k coefficients per block.
    pub condense: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            quant: None,
            selection: None,
            dequantize: false,
            dtype: OutputDType::Auto,
            order: FrequencyOrder::Zigzag,
            scale: 1.0,
            condense: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_file(file: &ConfigFile) -> Result<Self> {
        let order = match file.ordering.as_deref() {
            None | Some("zigzag") => FrequencyOrder::Zigzag,
            Some("raster") => FrequencyOrder::Raster,
            Some(other) => return Err(Error::Config(format!("unknown ordering {other:?}"))),
        };
        let shape = if file.square.unwrap_or(false) {
            SelectionShape::Square
        } else {
            SelectionShape::Prefix
        };
        let selection = match (&file.preset, file.selection) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either a preset or a selection, not both".into()))
            }
            (Some(name), None) => Some(preset(name)?.selection()),
            (None, Some([y, cb, cr])) => Some(SelectionSpec::prefix(y, cb, cr)?),
            (None, None) => None,
        };
        let selection = selection
            .map(|s| s.with_shape(shape).map(|s| s.with_order(order)))
            .transpose()?;
        if shape == SelectionShape::Square && selection.is_none() {
            return Err(Error::Config("square shape needs a selection".into()));
        }
        let cfg = PipelineConfig {
            quant: file.quality_factor.map(build_qmatrix).transpose()?,
            selection,
            dequantize: file.dequantize.unwrap_or(false),
            dtype: file.dtype.unwrap_or_default(),
            order,
            scale: file.scale.unwrap_or(1.0),
            condense: file.condense,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn emits_levels(&self) -> bool {
        self.quant.is_some() && !self.dequantize
    }

    pub fn validate(&self) -> Result<()> {
        if self.dequantize && self.quant.is_none() {
            return Err(Error::Config("dequantize needs a quality factor".into()));
        }
        match (self.dtype, self.emits_levels()) {
            (OutputDType::I16, false) => {
                return Err(Error::Config(
                    "i16 output holds quantization levels; set a quality factor without dequantize".into(),
                ))
            }
            (OutputDType::F32, true) => {
                return Err(Error::Config(
                    "f32 output holds coefficients; add dequantize to export quantized data as f32".into(),
                ))
            }
            _ => {}
        }
        if !self.scale.is_finite() || self.scale == 0.0 {
            return Err(Error::Config(format!("scale {} must be finite and non-zero", self.scale)));
        }
        if self.emits_levels() && self.scale != 1.0 {
            return Err(Error::Config("scale applies to f32 output only".into()));
        }
        if self.condense.is_some() && self.selection.is_some() {
            return Err(Error::Config("condensed layout and channel selection are exclusive".into()));
        }
        if let Some(k) = self.condense {
            if k == 0 || 8 % k != 0 {
                return Err(Error::Config(format!("condensed size {k} does not divide 8")));
            }
        }
        Ok(())
    }
}

fn shape_output<T>(planes: &CoeffPlanes<T>, cfg: &PipelineConfig) -> Result<Shaped<T>>
where
    T: Copy + Default + Send + Sync,
{
    let quality = cfg.quant.map(|q| q.quality());
    if let Some(k) = cfg.condense {
        let mut c = condense_nonfcr(planes, k)?;
        c.quality = quality;
        return Ok(Shaped::Condensed(c));
    }
    let mut t = fcr(planes, cfg.order)?;
    t.set_quality(quality);
    if let Some(sel) = &cfg.selection {
        t = apply_selection(&t, sel)?;
    }
    Ok(Shaped::Fcr(t))
}

enum Shaped<T> {
    Fcr(crate::fcr::FcrTensor<T>),
    Condensed(crate::select::CondensedTensor<T>),
}

/// Runs the forward chain on one image.
pub fn encode(image: &RgbImage, cfg: &PipelineConfig) -> Result<TensorFile> {
    cfg.validate()?;
    let shifted = rgb_to_ycc(image).level_shift()?;
    let coeffs = CoeffPlanes::from_ycc(&shifted).forward()?;
    match &cfg.quant {
        None => real_file(shape_output(&coeffs, cfg)?, cfg.scale),
        Some(q) => {
            let levels = quantize_planes(&coeffs, q)?;
            if cfg.dequantize {
                let real = dequantize_planes(&levels, q)?;
                real_file(shape_output(&real, cfg)?, cfg.scale)
            } else {
                match shape_output(&levels, cfg)? {
                    Shaped::Fcr(t) => t.to_tensor_file(),
                    Shaped::Condensed(c) => c.to_tensor_file(),
                }
            }
        }
    }
}

fn real_file(shaped: Shaped<f64>, scale: f64) -> Result<TensorFile> {
    Ok(match shaped {
        Shaped::Fcr(t) => t.to_tensor_file(scale),
        Shaped::Condensed(c) => c.to_tensor_file(scale),
    })
}

/// Runs the inverse chain. Selected tensors need `zero_fill`; `scale` must
/// match the one used at encode time.
pub fn decode(file: &TensorFile, zero_fill: bool, scale: f64) -> Result<RgbImage> {
    if file.meta.ordering & !SQUARE_SELECTION_FLAG == 0 {
        return Err(Error::Layout("condensed spatial tensors cannot be decoded".into()));
    }
    let coeffs = match LoadedTensor::from_tensor_file(file, scale)? {
        LoadedTensor::Real(t) => inverse_fcr(&t, zero_fill)?,
        LoadedTensor::Levels(t) => {
            let qf = t
                .quality()
                .ok_or_else(|| Error::Tensor("i16 levels without a quality factor".into()))?;
            let q = build_qmatrix(i64::from(qf))?;
            dequantize_planes(&inverse_fcr(&t, zero_fill)?, &q)?
        }
    };
    if coeffs.channels().len() != 3 {
        return Err(Error::Layout(format!(
            "{} plane(s) cannot be converted to RGB",
            coeffs.channels().len()
        )));
    }
    let ycc = coeffs.inverse()?.to_ycc()?;
    Ok(ycc_to_rgb(&ycc))
}

/// Peak signal-to-noise ratio in dB over all channels; infinite for
/// identical images.
pub fn psnr(a: &RgbImage, b: &RgbImage) -> Result<f64> {
    if (a.height(), a.width()) != (b.height(), b.width()) {
        return Err(Error::Dimensions("PSNR needs equally sized images".into()));
    }
    let se: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (f64::from(x) - f64::from(y)).powi(2))
        .sum();
    let mse = se / a.data().len() as f64;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / mse).log10()
    })
}

pub fn max_abs_diff(a: &RgbImage, b: &RgbImage) -> u8 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| x.abs_diff(y))
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStat {
    pub channel: usize,
    /// e.g. `Y(0,0)` for FCR layouts, `plane 1` for condensed ones.
    pub label: String,
    pub mean_square: f64,
}

/// Mean squared value of every channel, in channel order.
pub fn stats(file: &TensorFile) -> Result<Vec<ChannelStat>> {
    file.validate()?;
    let [h, w, c] = file.dims.map(|d| d as usize);
    let labels: Vec<String> = if file.meta.ordering & !SQUARE_SELECTION_FLAG == 0 {
        (0..c).map(|i| format!("plane {i}")).collect()
    } else {
        let t = match LoadedTensor::from_tensor_file(file, 1.0)? {
            LoadedTensor::Real(t) => t.map(|_| ()),
            LoadedTensor::Levels(t) => t.map(|_| ()),
        };
        t.source_channels()
            .into_iter()
            .map(|s| {
                let natural = t.order().natural_of(s % BLOCK_LEN);
                let plane = ["Y", "Cb", "Cr"][s / BLOCK_LEN];
                format!("{plane}({},{})", natural / 8, natural % 8)
            })
            .collect()
    };
    let cells = (h * w) as f64;
    let sums: Vec<f64> = (0..c)
        .into_par_iter()
        .map(|ch| (0..h * w).map(|cell| file.payload.get(cell * c + ch).powi(2)).sum())
        .collect();
    Ok(sums
        .into_iter()
        .zip(labels)
        .enumerate()
        .map(|(channel, (sum, label))| ChannelStat {
            channel,
            label,
            mean_square: sum / cells,
        })
        .collect())
}

/// `<out_dir>/<input stem>.fcrt`
pub fn output_path(input: &Path, out_dir: &Path) -> PathBuf {
    let stem = input.file_stem().unwrap_or(input.as_os_str());
    out_dir.join(stem).with_extension(TENSOR_EXTENSION)
}

pub fn encode_file(input: &Path, out_dir: &Path, cfg: &PipelineConfig) -> Result<PathBuf> {
    let image = read_ppm(&std::fs::read(input)?)?;
    let tensor = encode(&image, cfg)?;
    let out = output_path(input, out_dir);
    write_tensor(&tensor, &out)?;
    Ok(out)
}

pub fn decode_file(input: &Path, output: &Path, zero_fill: bool, scale: f64) -> Result<RgbImage> {
    let image = decode(&read_tensor(input)?, zero_fill, scale)?;
    write_atomic(output, &write_ppm(&image))?;
    Ok(image)
}

/// Expands directories into their `.ppm` files (sorted); files pass through.
pub fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    f.is_file()
                        && f.extension()
                            .is_some_and(|e| e.eq_ignore_ascii_case("ppm"))
                })
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// Encodes every input independently on `jobs` threads (0 = all cores).
/// One failure does not affect the other outputs.
pub fn encode_batch(
    inputs: &[PathBuf],
    out_dir: &Path,
    cfg: &PipelineConfig,
    jobs: usize,
) -> Result<Vec<(PathBuf, Result<PathBuf>)>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| {
        inputs
            .par_iter()
            .map(|p| (p.clone(), encode_file(p, out_dir, cfg)))
            .collect()
    }))
}
