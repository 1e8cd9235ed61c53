//! Independent reference computations for the integration tests: closed
//! forms written directly from `cosh`, and adaptive Gauss-Kronrod quadrature.
#![allow(dead_code)]

pub fn q(x: f64) -> f64 {
    3f64.powf(0.25) / (2.0 * x).cosh().sqrt()
}

pub fn q1(x: f64) -> f64 {
    -q(x) * (2.0 * x).tanh()
}

pub fn q2(x: f64) -> f64 {
    q(x) - q(x).powi(5)
}

pub fn lambda_q(x: f64) -> f64 {
    0.5 * q(x) + x * q1(x)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    if err <= tol.max(1e-14 * k.abs()) || depth >= 16 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, tol, depth + 1) + adapt(f, m, b, tol, depth + 1)
}

/// `∫_a^b f` to absolute tolerance ~1e-15 for smooth integrands.
pub fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let panels = ((b - a).abs().ceil() as usize).max(1);
    let w = (b - a) / panels as f64;
    (0..panels).map(|p| adapt(&f, a + p as f64 * w, a + (p + 1) as f64 * w, 1e-16, 0)).sum()
}

/// `∫_R f` for integrands decaying like `Q`.
pub fn quad_line(f: impl Fn(f64) -> f64) -> f64 {
    quad(f, -60.0, 60.0)
}

pub fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!((got - want).abs() <= tol, "{what}: got {got:.17e}, want {want:.17e}, diff {:.3e}", (got - want).abs());
}
