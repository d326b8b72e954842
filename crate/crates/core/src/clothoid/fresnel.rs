//! Fresnel integrals and the generalized clothoid moments
//!
//! ```text
//! X_k(a, b, c) = ∫_0^1 t^k cos(a/2 t² + b t + c) dt
//! Y_k(a, b, c) = ∫_0^1 t^k sin(a/2 t² + b t + c) dt
//! ```
//!
//! The Fresnel pair uses the normalized convention
//! `C(x) = ∫_0^x cos(π/2 t²) dt`. Small arguments use the power series,
//! moderate ones a rational approximation of the auxiliary functions f, g,
//! and large ones their asymptotic expansion.

use std::f64::consts::{FRAC_PI_2, PI};

const FRN: [f64; 11] = [
    0.499_999_880_858_847_3,
    1.351_117_779_121_071_5,
    1.317_540_783_616_866,
    1.186_114_930_029_385_5,
    0.770_962_729_888_834_7,
    0.417_387_433_878_796_4,
    0.190_442_027_052_729_03,
    0.066_559_988_966_276_98,
    0.022_789_258_616_785_717,
    0.004_011_668_935_850_794,
    0.001_219_203_685_124_988_4,
];

const FRD: [f64; 12] = [
    1.0,
    2.702_230_577_240_026,
    4.205_926_815_143_849,
    4.522_188_284_010_772,
    3.724_035_228_163_036,
    2.458_928_625_467_815_3,
    1.312_549_162_944_370_3,
    0.599_768_572_012_093_3,
    0.209_076_807_503_788_5,
    0.071_596_216_346_579_01,
    0.012_602_969_513_793_714,
    0.003_830_242_351_293_125,
];

const GN: [f64; 11] = [
    0.500_000_143_927_063_4,
    0.032_346_434_925_349_13,
    0.176_193_251_578_632_54,
    0.038_606_273_170_706_49,
    0.023_693_692_309_257_725,
    0.007_092_018_516_845_034,
    0.001_249_212_321_241_208_7,
    0.000_440_230_408_947_784_7,
    -8.802_668_274_761_725e-6,
    -1.403_355_491_658_001_9e-8,
    2.350_922_178_215_547_4e-10,
];

const GD: [f64; 12] = [
    1.0,
    2.064_698_749_701_96,
    2.910_931_176_694_803,
    2.656_193_675_133_303,
    2.019_556_398_317_727,
    1.116_789_112_918_936_4,
    0.572_678_747_559_731_7,
    0.194_084_811_695_930_7,
    0.076_348_083_414_312_49,
    0.011_573_247_407_207_866,
    0.004_409_927_369_306_731,
    -0.000_090_709_584_104_299_93,
];

/// Normalized Fresnel integrals `(C(y), S(y))`.
pub fn fresnel(y: f64) -> (f64, f64) {
    const EPS: f64 = 1e-15;
    let x = y.abs();
    let (c, s);
    if x < 1.0 {
        let t = -(FRAC_PI_2 * x * x).powi(2);

        let (mut twofn, mut fact, mut denterm, mut numterm, mut sum) = (0.0, 1.0, 1.0, 1.0, 1.0);
        loop {
            twofn += 2.0;
            fact *= twofn * (twofn - 1.0);
            denterm += 4.0;
            numterm *= t;
            let term = numterm / (fact * denterm);
            sum += term;
            if term.abs() <= EPS * sum.abs() {
                break;
            }
        }
        c = x * sum;

        let (mut twofn, mut fact, mut denterm, mut numterm) = (1.0, 1.0, 3.0, 1.0);
        let mut sum = numterm / denterm;
        loop {
            twofn += 2.0;
            fact *= twofn * (twofn - 1.0);
            denterm += 4.0;
            numterm *= t;
            let term = numterm / (fact * denterm);
            sum += term;
            if term.abs() <= EPS * sum.abs() {
                break;
            }
        }
        s = FRAC_PI_2 * sum * x * x * x;
    } else if x < 6.0 {
        let rational = |num: &[f64; 11], den: &[f64; 12]| {
            let mut sumn = 0.0;
            let mut sumd = den[11];
            for k in (0..=10).rev() {
                sumn = num[k] + x * sumn;
                sumd = den[k] + x * sumd;
            }
            sumn / sumd
        };
        let f = rational(&FRN, &FRD);
        let g = rational(&GN, &GD);
        let (su, cu) = (FRAC_PI_2 * x * x).sin_cos();
        c = 0.5 + f * su - g * cu;
        s = 0.5 - f * cu - g * su;
    } else {
        let t = -1.0 / (PI * x * x).powi(2);
        let eps10 = 0.1 * EPS;

        let (mut numterm, mut term, mut sum) = (-1.0, 1.0, 1.0);
        loop {
            numterm += 4.0;
            term *= numterm * (numterm - 2.0) * t;
            sum += term;
            if term.abs() <= eps10 * sum.abs() {
                break;
            }
        }
        let f = sum / (PI * x);

        let (mut numterm, mut term, mut sum) = (-1.0, 1.0, 1.0);
        loop {
            numterm += 4.0;
            term *= numterm * (numterm + 2.0) * t;
            sum += term;
            if term.abs() <= eps10 * sum.abs() {
                break;
            }
        }
        let g0 = PI * x;
        let g = sum / (g0 * g0 * x);

        let (su, cu) = (FRAC_PI_2 * x * x).sin_cos();
        c = 0.5 + f * su - g * cu;
        s = 0.5 - f * cu - g * su;
    }
    if y < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

/// Fresnel integral together with its first `N - 1` moments
/// `∫_0^y t^k cos(π/2 t²) dt`.
fn fresnel_moments<const N: usize>(y: f64) -> ([f64; N], [f64; N]) {
    let mut c = [0.0; N];
    let mut s = [0.0; N];
    (c[0], s[0]) = fresnel(y);
    if N > 1 {
        let (ss, cc) = (FRAC_PI_2 * y * y).sin_cos();
        c[1] = ss / PI;
        s[1] = (1.0 - cc) / PI;
        if N > 2 {
            c[2] = (y * ss - s[0]) / PI;
            s[2] = (c[0] - y * cc) / PI;
        }
    }
    (c, s)
}

fn lommel_reduced(mu: f64, nu: f64, b: f64) -> f64 {
    let mut tmp = 1.0 / ((mu + nu + 1.0) * (mu - nu + 1.0));
    let mut res = tmp;
    for n in 1..=100 {
        let n = n as f64;
        tmp *= (-b / (2.0 * n + mu - nu + 1.0)) * (b / (2.0 * n + mu + nu + 1.0));
        res += tmp;
        if tmp.abs() < res.abs() * 1e-50 {
            break;
        }
    }
    res
}

const MAX_ZERO_TERMS: usize = 45;

/// Moments with `a = 0`: `∫_0^1 t^k (cos, sin)(b t) dt` for `k < nk`.
fn moments_a_zero(nk: usize, b: f64) -> ([f64; MAX_ZERO_TERMS], [f64; MAX_ZERO_TERMS]) {
    let mut x = [0.0; MAX_ZERO_TERMS];
    let mut y = [0.0; MAX_ZERO_TERMS];
    let (sb, cb) = b.sin_cos();
    let b2 = b * b;
    if b.abs() < 1e-3 {
        x[0] = 1.0 - (b2 / 6.0) * (1.0 - (b2 / 20.0) * (1.0 - b2 / 42.0));
        y[0] = (b / 2.0) * (1.0 - (b2 / 12.0) * (1.0 - b2 / 30.0));
    } else {
        x[0] = sb / b;
        y[0] = (1.0 - cb) / b;
    }
    // Upward recurrence is stable only while k stays below ~2|b|.
    let m = ((2.0 * b).floor().max(1.0) as usize).min(nk - 1).max(1);
    for k in 1..m {
        let kf = k as f64;
        x[k] = (sb - kf * y[k - 1]) / b;
        y[k] = (kf * x[k - 1] - cb) / b;
    }
    if m < nk {
        let aa = b * sb;
        let d = sb - b * cb;
        let bb = b * d;
        let cc = -b2 * sb;
        let mut rla = lommel_reduced(m as f64 + 0.5, 1.5, b);
        let mut rld = lommel_reduced(m as f64 + 0.5, 0.5, b);
        for k in m..nk {
            let kf = k as f64;
            let rlb = lommel_reduced(kf + 1.5, 0.5, b);
            let rlc = lommel_reduced(kf + 1.5, 1.5, b);
            x[k] = (kf * aa * rla + bb * rlb + cb) / (1.0 + kf);
            y[k] = (cc * rlc + sb) / (2.0 + kf) + d * rld;
            rla = rlc;
            rld = rlb;
        }
    }
    (x, y)
}

const SMALL_A: f64 = 0.01;
const SMALL_A_TERMS: usize = 3;

fn moments_a_small<const N: usize>(a: f64, b: f64) -> ([f64; N], [f64; N]) {
    let nkk = N + 4 * SMALL_A_TERMS + 2;
    let (x0, y0) = moments_a_zero(nkk, b);
    let mut x = [0.0; N];
    let mut y = [0.0; N];
    for j in 0..N {
        x[j] = x0[j] - a / 2.0 * y0[j + 2];
        y[j] = y0[j] + a / 2.0 * x0[j + 2];
    }
    let mut t = 1.0;
    let aa = -a * a / 4.0;
    for n in 1..=SMALL_A_TERMS {
        t *= aa / ((2 * n * (2 * n - 1)) as f64);
        let bf = a / ((4 * n + 2) as f64);
        for j in 0..N {
            let jj = 4 * n + j;
            x[j] += t * (x0[jj] - bf * y0[jj + 2]);
            y[j] += t * (y0[jj] + bf * x0[jj + 2]);
        }
    }
    (x, y)
}

fn moments_a_large<const N: usize>(a: f64, b: f64) -> ([f64; N], [f64; N]) {
    let s = a.signum();
    let absa = a.abs();
    let inv_sqrt_pi = 1.0 / PI.sqrt();
    let z = inv_sqrt_pi * absa.sqrt();
    let ell = s * b * inv_sqrt_pi / absa.sqrt();
    let g = -0.5 * s * b * b / absa;
    let (sg0, cg0) = g.sin_cos();
    let mut cg = cg0 / z;
    let mut sg = sg0 / z;

    let (cl, sl) = fresnel_moments::<N>(ell);
    let (cz, sz) = fresnel_moments::<N>(ell + z);

    let mut x = [0.0; N];
    let mut y = [0.0; N];
    let dc0 = cz[0] - cl[0];
    let ds0 = sz[0] - sl[0];
    x[0] = cg * dc0 - s * sg * ds0;
    y[0] = sg * dc0 + s * cg * ds0;
    if N > 1 {
        cg /= z;
        sg /= z;
        let dc1 = cz[1] - cl[1];
        let ds1 = sz[1] - sl[1];
        let dc = dc1 - ell * dc0;
        let ds = ds1 - ell * ds0;
        x[1] = cg * dc - s * sg * ds;
        y[1] = sg * dc + s * cg * ds;
        if N > 2 {
            let dc2 = cz[2] - cl[2];
            let ds2 = sz[2] - sl[2];
            let dc = dc2 + ell * (ell * dc0 - 2.0 * dc1);
            let ds = ds2 + ell * (ell * ds0 - 2.0 * ds1);
            cg /= z;
            sg /= z;
            x[2] = cg * dc - s * sg * ds;
            y[2] = sg * dc + s * cg * ds;
        }
    }
    (x, y)
}

// Below this bound on the phase slope |a| + |b| the integrand is smooth
// enough for 8-point Gauss-Legendre to reach about 1e-15.
const QUADRATURE_PHASE: f64 = 2.0;

const GL8_NODES: [f64; 4] =
    [0.183_434_642_495_649_78, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_2];
const GL8_WEIGHTS: [f64; 4] =
    [0.362_683_783_378_361_77, 0.313_706_645_877_887_05, 0.222_381_034_453_374_34, 0.101_228_536_290_376_69];

fn moments_quadrature<const N: usize>(a: f64, b: f64) -> ([f64; N], [f64; N]) {
    let mut x = [0.0; N];
    let mut y = [0.0; N];
    for (node, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
        for t in [0.5 * (1.0 - node), 0.5 * (1.0 + node)] {
            let (sn, cs) = (0.5 * a * t * t + b * t).sin_cos();
            let mut tk = 0.5 * w;
            for k in 0..N {
                x[k] += tk * cs;
                y[k] += tk * sn;
                tk *= t;
            }
        }
    }
    (x, y)
}

/// Generalized Fresnel moments `(X_k, Y_k)` for `k < N` (`N <= 3`).
pub fn generalized_fresnel<const N: usize>(a: f64, b: f64, c: f64) -> ([f64; N], [f64; N]) {
    debug_assert!((1..=3).contains(&N));
    let (xs, ys) = if a.abs() + b.abs() <= QUADRATURE_PHASE {
        moments_quadrature::<N>(a, b)
    } else if a.abs() < SMALL_A {
        moments_a_small::<N>(a, b)
    } else {
        moments_a_large::<N>(a, b)
    };
    let (sc, cc) = c.sin_cos();
    let mut x = [0.0; N];
    let mut y = [0.0; N];
    for k in 0..N {
        x[k] = xs[k] * cc - ys[k] * sc;
        y[k] = xs[k] * sc + ys[k] * cc;
    }
    (x, y)
}

/// `(X_0, Y_0)` only.
pub fn generalized_fresnel0(a: f64, b: f64, c: f64) -> (f64, f64) {
    let (x, y) = generalized_fresnel::<1>(a, b, c);
    (x[0], y[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Gauss-Legendre quadrature, independent of the closed forms.
    fn quadrature(k: i32, a: f64, b: f64, c: f64) -> (f64, f64) {
        const NODES: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
        const WEIGHTS: [f64; 5] = [0.568_888_888_888_888_9, 0.478_628_670_499_366_47, 0.478_628_670_499_366_47, 0.236_926_885_056_189_08, 0.236_926_885_056_189_08];
        let panels = 400;
        let h = 1.0 / panels as f64;
        let (mut sx, mut sy) = (0.0, 0.0);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (n, w) in NODES.iter().zip(WEIGHTS) {
                let t = mid + 0.5 * h * n;
                let phase = 0.5 * a * t * t + b * t + c;
                let tk = t.powi(k);
                sx += 0.5 * h * w * tk * phase.cos();
                sy += 0.5 * h * w * tk * phase.sin();
            }
        }
        (sx, sy)
    }

    #[test]
    fn fresnel_reference_values() {
        let table = [
            (0.5, 0.492_344_225_871_446_8, 0.064_732_432_859_999_29),
            (1.0, 0.779_893_400_376_822_8, 0.438_259_147_390_354_8),
            (2.5, 0.457_413_009_641_777_06, 0.619_181_755_819_592_9),
            (7.0, 0.545_467_092_546_969_8, 0.499_704_789_453_446_76),
        ];
        for (x, c, s) in table {
            let (fc, fs) = fresnel(x);
            assert!((fc - c).abs() < 1e-10, "C({x}) = {fc}");
            assert!((fs - s).abs() < 1e-10, "S({x}) = {fs}");
            let (nc, ns) = fresnel(-x);
            assert_eq!((nc, ns), (-fc, -fs));
        }
    }

    #[test]
    fn generalized_moments_match_quadrature() {
        let cases = [
            (0.0, 0.0, 0.0),
            (0.005, 1.3, -0.4),
            (-0.009, -2.0, 0.3),
            (0.5, 0.2, 1.0),
            (-3.0, 2.0, -1.2),
            (12.0, -5.0, 0.7),
            (-40.0, 15.0, 2.0),
            (1e-5, 20.0, 0.1),
        ];
        for (a, b, c) in cases {
            let (x, y) = generalized_fresnel::<3>(a, b, c);
            for k in 0..3 {
                let (qx, qy) = quadrature(k as i32, a, b, c);
                assert!((x[k] - qx).abs() < 1e-10, "X{k}({a},{b},{c}) = {} vs {qx}", x[k]);
                assert!((y[k] - qy).abs() < 1e-10, "Y{k}({a},{b},{c}) = {} vs {qy}", y[k]);
            }
        }
    }

    #[test]
    fn quadrature_branch_agrees_with_series() {
        for &(a, b) in &[(0.009, 1.99), (-0.005, -1.2), (0.5, 1.5), (-1.9, 0.1), (1.0, -1.0), (0.0, 2.0)] {
            let (qx, qy) = moments_quadrature::<3>(a, b);
            let (sx, sy) = if a.abs() < SMALL_A { moments_a_small::<3>(a, b) } else { moments_a_large::<3>(a, b) };
            for k in 0..3 {
                assert!((qx[k] - sx[k]).abs() < 1e-12 && (qy[k] - sy[k]).abs() < 1e-12, "{a} {b} {k}");
            }
        }
    }
}
