//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use dctseg::blockdct::{forward_dct, inverse_dct, BlockGrid, CoeffPlanes, Domain};
use dctseg::colorspace::rgb_to_ycc;
use dctseg::fcr::{fcr, inverse_fcr, FrequencyOrder};
use dctseg::io::RgbImage;
use dctseg::netshape::builtin;
use dctseg::pipeline::{decode, encode, max_abs_diff, psnr, PipelineConfig};
use dctseg::quant::{build_qmatrix, dequantize_block, quantize_block};
use dctseg::select::{condense_nonfcr, table3_catalog};
use rand::Rng;

const DCT_TOL: f64 = 1e-9;
const PARSEVAL_REL_TOL: f64 = 1e-9;
const QUANT_SLACK: f64 = 1e-9;
const DCT_SWEEP_BLOCKS: usize = 10_000;
const DCT_TIME_LIMIT: Duration = Duration::from_secs(5);
const E2E_MAX_PIXEL_ERROR: u8 = 2;
const E2E_TIME_LIMIT: Duration = Duration::from_secs(10);
const FCR_OVER_RGB_RANGE: (f64, f64) = (0.01, 0.04);
const DCT_OVER_RGB_RANGE: (f64, f64) = (0.80, 1.05);

/// Base table transcribed independently of the library constant.
const EXPECTED_BASE: [[u16; 8]; 8] = [
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
];

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn sweep_blocks() -> Vec<[f64; 64]> {
    let mut rng = common::rng(0xDC7);
    (0..DCT_SWEEP_BLOCKS)
        .map(|_| common::random_block(&mut rng, -128.0, 127.0))
        .collect()
}

fn ac1_dct_correctness(blocks: &[[f64; 64]]) -> Outcome {
    let start = Instant::now();
    let coeffs: Vec<[f64; 64]> = blocks.iter().map(forward_dct).collect();
    let back: Vec<[f64; 64]> = coeffs.iter().map(inverse_dct).collect();
    let elapsed = start.elapsed();

    let mut fwd_err = 0.0f64;
    let mut rt_err = 0.0f64;
    for ((b, c), r) in blocks.iter().zip(&coeffs).zip(&back) {
        let naive = common::naive_dct(b);
        for k in 0..64 {
            fwd_err = fwd_err.max((c[k] - naive[k]).abs());
            rt_err = rt_err.max((r[k] - b[k]).abs());
        }
    }
    ensure(fwd_err < DCT_TOL, format!("forward vs naive max error {fwd_err:e}"))?;
    ensure(rt_err < DCT_TOL, format!("round-trip max error {rt_err:e}"))?;
    ensure(elapsed < DCT_TIME_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!(
        "{DCT_SWEEP_BLOCKS} blocks, max|fwd-naive| = {fwd_err:.2e}, max round-trip = {rt_err:.2e}, {elapsed:.2?}"
    ))
}

fn ac2_parseval(blocks: &[[f64; 64]]) -> Outcome {
    let mut worst = 0.0f64;
    for b in blocks {
        let g = forward_dct(b);
        let es: f64 = b.iter().map(|v| v * v).sum();
        let ef: f64 = g.iter().map(|v| v * v).sum();
        worst = worst.max((es - ef).abs() / es);
    }
    ensure(worst <= PARSEVAL_REL_TOL, format!("relative energy error {worst:e}"))?;
    Ok(format!("max relative energy error {worst:.2e}"))
}

fn ac3_quant_tables() -> Outcome {
    let q50 = build_qmatrix(50).unwrap();
    for (i, row) in EXPECTED_BASE.iter().enumerate() {
        ensure(&q50.table()[i * 8..i * 8 + 8] == row, format!("qf=50 row {i} differs"))?;
    }
    ensure(build_qmatrix(100).unwrap().table() == &[1; 64], "qf=100 is not all ones")?;
    let sweep: Vec<i64> = (10..=100).step_by(10).collect();
    for qf in [30, 50, 70] {
        ensure(sweep.contains(&qf), format!("qf={qf} missing from sweep"))?;
    }
    let tables: Vec<_> = sweep.iter().map(|&qf| build_qmatrix(qf).unwrap()).collect();
    for (i, a) in tables.iter().enumerate() {
        for b in &tables[i..] {
            for k in 0..64 {
                ensure(
                    a.table()[k] >= b.table()[k],
                    format!("Q({})[{k}] < Q({})[{k}]", a.quality(), b.quality()),
                )?;
            }
        }
    }
    Ok(format!("qf=50 == base (64/64), qf=100 all ones, monotone over {sweep:?}"))
}

fn ac4_quant_error() -> Outcome {
    let mut rng = common::rng(0x9A);
    let mut worst_ratio = 0.0f64;
    let mut count = 0;
    for qf in [10, 30, 50, 70, 90, 100] {
        let q = build_qmatrix(qf).unwrap();
        for i in 0..2000 {
            // half realistic DCT output, half arbitrary reals
            let u = if i % 2 == 0 {
                forward_dct(&common::random_block(&mut rng, -128.0, 127.0))
            } else {
                common::random_block(&mut rng, -5000.0, 5000.0)
            };
            let back = dequantize_block(&quantize_block(&u, &q), &q);
            for k in 0..64 {
                let half = f64::from(q.table()[k]) / 2.0;
                let err = (u[k] - back[k]).abs();
                ensure(err <= half + QUANT_SLACK, format!("qf={qf} k={k}: {err} > {half}"))?;
                worst_ratio = worst_ratio.max(err / half);
            }
            count += 1;
        }
    }
    Ok(format!("{count} blocks over 6 quality factors, max |err|/(Q/2) = {worst_ratio:.6}"))
}

fn random_planes(h: usize, w: usize, nplanes: usize, seed: u64) -> CoeffPlanes<f64> {
    let mut rng = common::rng(seed);
    let (by, bx) = dctseg::blockdct::grid_dims(h, w);
    let channels = (0..nplanes)
        .map(|_| BlockGrid {
            blocks_y: by,
            blocks_x: bx,
            blocks: (0..by * bx)
                .map(|_| std::array::from_fn(|_| rng.gen_range(-1024.0..1024.0)))
                .collect(),
        })
        .collect();
    CoeffPlanes::new(h, w, Domain::Frequency, channels).unwrap()
}

fn ac5_fcr() -> Outcome {
    for (i, (h, w, n)) in [(16, 16, 1), (40, 24, 3), (33, 71, 3), (8, 8, 2)].into_iter().enumerate() {
        let p = random_planes(h, w, n, i as u64);
        let t = fcr(&p, FrequencyOrder::Zigzag).unwrap();
        ensure(inverse_fcr(&t, false).unwrap() == p, format!("{h}x{w}x{n} not bit-exact"))?;
    }
    let single = fcr(&random_planes(16, 16, 1, 99), FrequencyOrder::Zigzag).unwrap();
    ensure(single.dims() == [2, 2, 64], format!("16x16x1 gave {:?}", single.dims()))?;

    let img = common::gradient_scene(512, 1024);
    let t = encode(&img, &PipelineConfig::default()).unwrap();
    ensure(t.dims == [64, 128, 192], format!("512x1024x3 gave {:?}", t.dims))?;
    Ok("bit-exact inverse on 4 random grids; (16,16,1) -> (2,2,64); (512,1024,3) -> (64,128,192)".into())
}

fn ac6_catalog() -> Outcome {
    let totals: Vec<usize> = table3_catalog().iter().map(|p| p.total()).collect();
    let expected = [192, 64, 67, 68, 75, 48, 24, 18, 17, 16];
    let matches = totals.iter().zip(expected).filter(|(a, b)| **a == *b).count();
    ensure(totals == expected, format!("totals {totals:?}"))?;
    let m36 = table3_catalog().iter().find(|p| p.name == "M-36-16-16").unwrap();
    let share = m36.total() as f64 / 192.0 * 100.0;
    ensure(format!("{share:.1}") == "35.4", format!("M-36-16-16 share {share}"))?;
    Ok(format!("{matches}/10 totals match; M-36-16-16 uses {share:.1}% of 192"))
}

fn ac7_condensed() -> Outcome {
    let img = common::texture_scene(512, 1024, 7);
    let shifted = rgb_to_ycc(&img).level_shift().unwrap();
    let coeffs = CoeffPlanes::from_ycc(&shifted).forward().unwrap();
    let c = condense_nonfcr(&coeffs, 4).unwrap();
    ensure(c.dims == [256, 512, 3], format!("got {:?}", c.dims))?;
    ensure(c.data.len() == 3 * 16 * 64 * 128, "element count")?;
    Ok(format!("k=4 on 512x1024x3 -> {:?}", c.dims))
}

fn ac8_shapes() -> Outcome {
    let eda = builtin("edanet").unwrap();
    let rgb = eda.report().unwrap();
    let [h, w, _] = rgb.final_shape();
    ensure([h, w] == [64, 128], format!("EDANet on RGB ends at {h}x{w}"))?;
    ensure(512 / h == 8 && 1024 / w == 8, "not 1/8")?;

    let on_fcr = eda.clone().with_input([64, 128, 192]).report().unwrap();
    let [fh, fw, _] = on_fcr.final_shape();
    ensure([fh, fw] == [8, 16], format!("EDANet on FCR ends at {fh}x{fw}"))?;
    ensure(512 / fh == 64 && 1024 / fw == 64, "not 1/64")?;

    let dct = builtin("dct-edanet").unwrap();
    let shapes = dct.feature_shapes().unwrap();
    ensure(
        shapes.iter().all(|s| s.output[..2] == [64, 128]),
        "DCT-EDANet reduces spatial size somewhere",
    )?;
    ensure(dct.block_repeats() == 22, format!("{} modules", dct.block_repeats()))?;
    Ok("EDANet/RGB -> 64x128 (1/8), EDANet/FCR -> 8x16 (1/64), DCT-EDANet stays 64x128 with 22 modules".into())
}

fn ac9_complexity() -> Outcome {
    let eda = builtin("edanet").unwrap();
    let rgb = eda.multiply_adds().unwrap() as f64;
    let on_fcr = eda.with_input([64, 128, 192]).multiply_adds().unwrap() as f64;
    let dct = builtin("dct-edanet").unwrap().multiply_adds().unwrap() as f64;
    let r1 = on_fcr / rgb;
    let r2 = dct / rgb;
    ensure(
        (FCR_OVER_RGB_RANGE.0..=FCR_OVER_RGB_RANGE.1).contains(&r1),
        format!("FCR/RGB ratio {r1:.4}"),
    )?;
    ensure(
        (DCT_OVER_RGB_RANGE.0..=DCT_OVER_RGB_RANGE.1).contains(&r2),
        format!("DCT-EDANet/EDANet ratio {r2:.4}"),
    )?;
    Ok(format!(
        "EDANet {:.2}B, on FCR {:.2}B (ratio {r1:.4}), DCT-EDANet {:.2}B (ratio {r2:.4})",
        rgb / 1e9,
        on_fcr / 1e9,
        dct / 1e9
    ))
}

fn ac10_end_to_end() -> Outcome {
    let images: [(&str, RgbImage); 3] = [
        ("gradient", common::gradient_scene(512, 1024)),
        ("shapes", common::shapes_scene(512, 1024, 1)),
        ("texture", common::texture_scene(512, 1024, 2)),
    ];
    let lossless = PipelineConfig::default();
    let at = |qf| PipelineConfig {
        quant: Some(build_qmatrix(qf).unwrap()),
        ..Default::default()
    };
    let mut notes = Vec::new();
    for (name, img) in &images {
        let start = Instant::now();
        let back = decode(&encode(img, &lossless).unwrap(), false, 1.0).unwrap();
        let elapsed = start.elapsed();
        let diff = max_abs_diff(img, &back);
        ensure(diff <= E2E_MAX_PIXEL_ERROR, format!("{name}: max pixel error {diff}"))?;
        ensure(elapsed < E2E_TIME_LIMIT, format!("{name}: took {elapsed:?}"))?;

        let p90 = psnr(img, &decode(&encode(img, &at(90)).unwrap(), false, 1.0).unwrap()).unwrap();
        let p10 = psnr(img, &decode(&encode(img, &at(10)).unwrap(), false, 1.0).unwrap()).unwrap();
        ensure(p90 > p10, format!("{name}: PSNR qf90 {p90:.2} <= qf10 {p10:.2}"))?;
        notes.push(format!("{name}: err {diff}, {elapsed:.2?}, PSNR {p90:.1}/{p10:.1} dB"));
    }
    Ok(notes.join("; "))
}

fn main() {
    let blocks = sweep_blocks();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("AC1 DCT correctness", Box::new(|| ac1_dct_correctness(&blocks))),
        ("AC2 Parseval", Box::new(|| ac2_parseval(&blocks))),
        ("AC3 quantization table goldens", Box::new(ac3_quant_tables)),
        ("AC4 quantization error bound", Box::new(ac4_quant_error)),
        ("AC5 FCR shapes and inverse", Box::new(ac5_fcr)),
        ("AC6 component-selection catalog", Box::new(ac6_catalog)),
        ("AC7 condensed 1/4-coefficient layout", Box::new(ac7_condensed)),
        ("AC8 network shape arithmetic", Box::new(ac8_shapes)),
        ("AC9 complexity ratios", Box::new(ac9_complexity)),
        ("AC10 end-to-end round trip", Box::new(ac10_end_to_end)),
    ];

    let mut failed = 0;
    for (name, run) in &criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} / {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
