//! Globally adaptive Gauss-Kronrod (7/15) quadrature for complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-13,
            rel: 1e-11,
            max_panels: 200_000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    let value = k * h;
    let error = ((k - g) * h).norm();
    Panel { a, b, value, error }
}

/// Integrate `f` over `[a, b]` after splitting it into `initial` equal panels.
pub fn integrate<F>(f: F, a: f64, b: f64, initial: usize, tol: Tolerance) -> Result<Estimate>
where
    F: Fn(f64) -> Complex64,
{
    let n = initial.max(1);
    let breaks: Vec<f64> = (0..=n)
        .map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 })
        .collect();
    integrate_breaks(f, &breaks, tol)
}

/// Integrate `f` over `[breaks[0], breaks[last]]`, seeding one panel per break interval.
pub fn integrate_breaks<F>(f: F, breaks: &[f64], tol: Tolerance) -> Result<Estimate>
where
    F: Fn(f64) -> Complex64,
{
    let zero = Estimate {
        value: Complex64::new(0.0, 0.0),
        error: 0.0,
        panels: 0,
    };
    if breaks.len() < 2 {
        return Ok(zero);
    }
    let (a, b) = (breaks[0], breaks[breaks.len() - 1]);
    if a == b {
        return Ok(zero);
    }
    let mut heap = BinaryHeap::with_capacity(2 * breaks.len());
    for w in breaks.windows(2) {
        if w[1] != w[0] {
            heap.push(kronrod(&f, w[0], w[1]));
        }
    }
    let totals = |heap: &BinaryHeap<Panel>| -> (Complex64, f64) {
        (
            heap.iter().map(|p| p.value).sum(),
            heap.iter().map(|p| p.error).sum(),
        )
    };
    let (mut value, mut error) = totals(&heap);
    let mut splits = 0usize;
    loop {
        if splits % 512 == 0 {
            (value, error) = totals(&heap);
        }
        if !(value.re.is_finite() && value.im.is_finite()) || !error.is_finite() {
            return Err(Error::Quadrature {
                message: format!("non-finite integrand on [{a}, {b}]"),
                achieved: f64::INFINITY,
            });
        }
        if error <= tol.abs.max(tol.rel * value.norm()) {
            (value, error) = totals(&heap);
            return Ok(Estimate {
                value,
                error,
                panels: heap.len(),
            });
        }
        if heap.len() >= tol.max_panels {
            return Err(Error::Quadrature {
                message: format!("panel budget exhausted on [{a}, {b}]"),
                achieved: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature {
                message: format!("panel at {} cannot be split further", worst.a),
                achieved: error,
            });
        }
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        splits += 1;
    }
}
