//! Tensile-curve evaluation, Hockett–Sherby identification and material
//! card export. Stresses are MPa throughout, strains dimensionless.

mod export;
mod hockett;

pub use export::{export_card, format_sig6, report, CardData, CardTemplate};
pub use hockett::{fit_hockett_sherby, HockettSherby, MIN_PLASTIC_POINTS};

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

/// Minimum number of samples in a usable curve.
pub const MIN_POINTS: usize = 20;

pub(crate) fn lit<F: Float>(x: f64) -> F {
    F::from(x).expect("constant representable in F")
}

/// Engineering stress–strain curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensileCurve<F> {
    pub strain: Vec<F>,
    pub stress: Vec<F>,
}

impl<F: Float> TensileCurve<F> {
    /// Checks length, finiteness and strictly increasing strain.
    pub fn new(strain: Vec<F>, stress: Vec<F>) -> Result<Self> {
        if strain.len() != stress.len() {
            return Err(CoreError::Invalid(format!(
                "strain has {} samples, stress {}",
                strain.len(),
                stress.len()
            )));
        }
        if strain.len() < MIN_POINTS {
            return Err(CoreError::Invalid(format!("curve needs at least {MIN_POINTS} points, got {}", strain.len())));
        }
        if strain.iter().chain(&stress).any(|v| !v.is_finite()) {
            return Err(CoreError::Invalid("curve contains non-finite values".into()));
        }
        if strain.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::Invalid("strain must be strictly increasing".into()));
        }
        Ok(TensileCurve { strain, stress })
    }

    pub fn len(&self) -> usize {
        self.strain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strain.is_empty()
    }

    /// Index of the first maximum of engineering stress.
    pub fn max_index(&self) -> usize {
        let mut best = 0;
        for (i, s) in self.stress.iter().enumerate() {
            if *s > self.stress[best] {
                best = i;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecimenGeometry<F> {
    /// Gauge length L0, mm.
    pub gauge_length: F,
    /// Thickness t, mm.
    pub thickness: F,
    /// Width b, mm.
    pub width: F,
}

impl<F: Float> SpecimenGeometry<F> {
    pub fn new(gauge_length: F, thickness: F, width: F) -> Result<Self> {
        let g = SpecimenGeometry { gauge_length, thickness, width };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<()> {
        let ok = |v: F| v.is_finite() && v > F::zero();
        if !ok(self.gauge_length) || !ok(self.thickness) || !ok(self.width) {
            return Err(CoreError::Invalid("specimen dimensions must be positive".into()));
        }
        Ok(())
    }

    pub fn area(&self) -> F {
        self.thickness * self.width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicalProperties<F> {
    /// Young's modulus, MPa.
    pub e: F,
    /// 0.2 % offset yield strength, MPa.
    pub rp02: F,
    /// Tensile strength, MPa.
    pub rm: F,
    /// Uniform elongation: strain at maximum engineering stress.
    pub ag: F,
}

/// Reduces force (N) and extension (mm) to engineering stress (MPa) and
/// strain. Samples whose strain does not exceed the last kept one are
/// dropped, keeping the first occurrence.
pub fn derive_curve<F: Float>(force: &[F], extension: &[F], geometry: &SpecimenGeometry<F>) -> Result<TensileCurve<F>> {
    if force.len() != extension.len() {
        return Err(CoreError::Invalid(format!(
            "force has {} samples, extension {}",
            force.len(),
            extension.len()
        )));
    }
    geometry.check()?;
    let area = geometry.area();
    let mut strain = Vec::with_capacity(force.len());
    let mut stress = Vec::with_capacity(force.len());
    for (f, dl) in force.iter().zip(extension) {
        let e = *dl / geometry.gauge_length;
        if strain.last().is_some_and(|last| e <= *last) {
            continue;
        }
        strain.push(e);
        stress.push(*f / area);
    }
    TensileCurve::new(strain, stress)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticFit<F> {
    pub modulus: F,
    pub intercept: F,
    pub r_squared: F,
    /// Window bounds as fractions of the maximum stress.
    pub lower: F,
    pub upper: F,
    pub points: usize,
}

/// Least squares line through `(x, y)`. Sums are taken relative to the first
/// point, which keeps exactly representable lines exact.
fn ols<F: Float>(x: &[F], y: &[F]) -> (F, F, F) {
    let n = lit::<F>(x.len() as f64);
    let (x0, y0) = (x[0], y[0]);
    let (mut sx, mut sy, mut sxx, mut sxy) = (F::zero(), F::zero(), F::zero(), F::zero());
    for (xi, yi) in x.iter().zip(y) {
        let (dx, dy) = (*xi - x0, *yi - y0);
        sx = sx + dx;
        sy = sy + dy;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
    }
    let denom = n * sxx - sx * sx;
    if denom <= F::zero() {
        return (F::nan(), F::nan(), F::nan());
    }
    let slope = (n * sxy - sx * sy) / denom;
    let shift = (sy - slope * sx) / n;
    let mean = sy / n;
    let (mut ss_res, mut ss_tot) = (F::zero(), F::zero());
    for (xi, yi) in x.iter().zip(y) {
        let (dx, dy) = (*xi - x0, *yi - y0);
        let r = dy - (shift + slope * dx);
        ss_res = ss_res + r * r;
        ss_tot = ss_tot + (dy - mean) * (dy - mean);
    }
    let r2 = if ss_tot > F::zero() { F::one() - ss_res / ss_tot } else { F::nan() };
    let intercept = y0 + shift - slope * x0;
    (slope, intercept, r2)
}

/// Young's modulus from the loading branch: OLS over samples with stress in
/// `[0.10, upper]·max`, `upper` starting at 0.40 and widened by 0.05 up to
/// 0.55 until the window has at least 10 points and R² ≥ 0.995.
pub fn elastic_modulus<F: Float>(curve: &TensileCurve<F>) -> Result<ElasticFit<F>> {
    let peak = curve.max_index();
    let max = curve.stress[peak];
    if max <= F::zero() {
        return Err(CoreError::NoLinearRegion);
    }
    let lower = lit::<F>(0.10);
    for step in 0..4 {
        let upper = lit::<F>(0.40 + 0.05 * step as f64);
        let (lo, hi) = (lower * max, upper * max);
        let (x, y): (Vec<F>, Vec<F>) = (0..=peak)
            .filter(|&i| curve.stress[i] >= lo && curve.stress[i] <= hi)
            .map(|i| (curve.strain[i], curve.stress[i]))
            .unzip();
        if x.len() < 10 {
            continue;
        }
        let (slope, intercept, r2) = ols(&x, &y);
        if slope.is_finite() && slope > F::zero() && r2 >= lit(0.995) {
            return Ok(ElasticFit {
                modulus: slope,
                intercept,
                r_squared: r2,
                lower,
                upper,
                points: x.len(),
            });
        }
    }
    Err(CoreError::NoLinearRegion)
}

/// First crossing of the curve with `σ = E·(ε − 0.002)`, interpolated
/// linearly between the bracketing samples.
pub fn yield_rp02<F: Float>(curve: &TensileCurve<F>, e: F) -> Result<F> {
    if !(e > F::zero()) {
        return Err(CoreError::Invalid("modulus must be positive".into()));
    }
    let offset = lit::<F>(0.002);
    let gap = |i: usize| curve.stress[i] - e * (curve.strain[i] - offset);
    let mut prev = gap(0);
    if prev == F::zero() {
        return Ok(curve.stress[0]);
    }
    for i in 1..curve.len() {
        let g = gap(i);
        if g == F::zero() {
            return Ok(curve.stress[i]);
        }
        if (prev > F::zero()) != (g > F::zero()) {
            let t = prev / (prev - g);
            return Ok(curve.stress[i - 1] + t * (curve.stress[i] - curve.stress[i - 1]));
        }
        prev = g;
    }
    Err(CoreError::NoYield)
}

/// True plastic strain and true stress up to uniform elongation; samples
/// with plastic strain below 1e-6 are dropped.
pub fn to_true_plastic<F: Float>(curve: &TensileCurve<F>, e: F) -> Result<(Vec<F>, Vec<F>)> {
    let peak = curve.max_index();
    let floor = lit::<F>(1e-6);
    let mut eps_p = Vec::new();
    let mut sigma = Vec::new();
    for i in 0..=peak {
        let (eng_e, eng_s) = (curve.strain[i], curve.stress[i]);
        let s_true = eng_s * (F::one() + eng_e);
        let e_true = eng_e.ln_1p();
        let ep = e_true - s_true / e;
        if ep >= floor {
            eps_p.push(ep);
            sigma.push(s_true);
        }
    }
    if eps_p.is_empty() {
        return Err(CoreError::EmptyPlasticRegion);
    }
    Ok((eps_p, sigma))
}

/// E, Rp0.2, Rm and Ag of a curve.
pub fn mechanical_properties<F: Float>(curve: &TensileCurve<F>) -> Result<(MechanicalProperties<F>, ElasticFit<F>)> {
    let fit = elastic_modulus(curve)?;
    let rp02 = yield_rp02(curve, fit.modulus)?;
    let peak = curve.max_index();
    Ok((
        MechanicalProperties {
            e: fit.modulus,
            rp02,
            rm: curve.stress[peak],
            ag: curve.strain[peak],
        },
        fit,
    ))
}

/// Full evaluation: properties, then the Hockett–Sherby fit of the plastic
/// branch. The fit is `None` when too few plastic points exist.
pub fn evaluate<F: Float>(curve: &TensileCurve<F>) -> Result<(MechanicalProperties<F>, Option<HockettSherby<F>>)> {
    let (props, _) = mechanical_properties(curve)?;
    let hs = match to_true_plastic(curve, props.e) {
        Ok((ep, st)) if ep.len() >= hockett::MIN_PLASTIC_POINTS => Some(fit_hockett_sherby(&ep, &st)?),
        Ok(_) | Err(CoreError::EmptyPlasticRegion) => None,
        Err(e) => return Err(e),
    };
    Ok((props, hs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(slope: f64, n: usize) -> TensileCurve<f64> {
        // dyadic strains keep the products exact
        let strain: Vec<f64> = (0..n).map(|i| i as f64 * 2f64.powi(-16)).collect();
        let stress = strain.iter().map(|e| slope * e).collect();
        TensileCurve::new(strain, stress).unwrap()
    }

    /// Elastic up to `sy`, then linear hardening with slope `h`.
    fn bilinear(e: f64, sy: f64, h: f64) -> TensileCurve<f64> {
        let strain: Vec<f64> = (0..400).map(|i| i as f64 * 2.5e-5).collect();
        let ey = sy / e;
        let stress = strain.iter().map(|&x| if x <= ey { e * x } else { sy + h * (x - ey) }).collect();
        TensileCurve::new(strain, stress).unwrap()
    }

    #[test]
    fn derive_curve_arithmetic() {
        let force: Vec<f64> = (0..25).map(|i| 3106.2 * i as f64).collect();
        let ext: Vec<f64> = (0..25).map(|i| 0.08 * i as f64).collect();
        let g = SpecimenGeometry::new(80.0, 1.55, 20.04).unwrap();
        let c = derive_curve(&force, &ext, &g).unwrap();
        assert_eq!(c.stress[0], 0.0);
        assert!((c.stress[1] - 100.0).abs() < 1e-3);
        assert!((c.strain[1] - 0.001).abs() < 1e-15);
        assert!(derive_curve(&force[..3], &ext, &g).is_err());
        assert!(derive_curve(&force[..5], &ext[..5], &g).is_err());
        assert!(SpecimenGeometry::new(80.0, 0.0, 20.0).is_err());
    }

    #[test]
    fn derive_curve_drops_non_increasing_strain() {
        let mut ext: Vec<f64> = (0..30).map(|i| i as f64 * 0.01).collect();
        ext[5] = ext[4];
        ext[6] = 0.0;
        let force: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let c = derive_curve(&force, &ext, &SpecimenGeometry::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(c.len(), 28);
        assert_eq!(c.stress[4], 4.0);
        assert_eq!(c.stress[5], 7.0);
    }

    #[test]
    fn zero_force_is_a_valid_curve() {
        let force = vec![0.0; 25];
        let ext: Vec<f64> = (0..25).map(|i| i as f64 * 0.1).collect();
        let c = derive_curve(&force, &ext, &SpecimenGeometry::new(80.0, 1.55, 20.04).unwrap()).unwrap();
        assert!(c.stress.iter().all(|s| *s == 0.0));
        assert!(matches!(elastic_modulus(&c), Err(CoreError::NoLinearRegion)));
    }

    #[test]
    fn exact_line() {
        let fit = elastic_modulus(&linear(70000.0, 100)).unwrap();
        assert_eq!(fit.modulus, 70000.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn bilinear_modulus_and_offset_yield() {
        let (e, sy, h) = (210000.0, 300.0, 1000.0);
        let c = bilinear(e, sy, h);
        let fit = elastic_modulus(&c).unwrap();
        assert!((fit.modulus - e).abs() < 1.0);
        let ey = sy / e;
        let eps = (sy - h * ey + 0.002 * e) / (e - h);
        let closed = sy + h * (eps - ey);
        let rp = yield_rp02(&c, fit.modulus).unwrap();
        assert!((rp - closed).abs() < 0.2, "{rp} vs {closed}");
    }

    #[test]
    fn elastic_only_does_not_yield() {
        let c = linear(210000.0, 50);
        assert!(matches!(yield_rp02(&c, 210000.0), Err(CoreError::NoYield)));
        assert!(matches!(to_true_plastic(&c, 210000.0), Err(CoreError::EmptyPlasticRegion)));
    }

    #[test]
    fn crossing_at_a_sample() {
        // the offset line passes exactly through (0.004, 420)
        let strain: Vec<f64> = (0..20).map(|i| i as f64 * 0.001).collect();
        let stress: Vec<f64> = strain.iter().map(|&x| if x <= 0.002 { 210000.0 * x } else { 420.0 }).collect();
        let c = TensileCurve::new(strain, stress).unwrap();
        assert_eq!(yield_rp02(&c, 210000.0).unwrap(), 420.0);
    }

    #[test]
    fn true_stress_conversion() {
        let mut strain: Vec<f64> = (0..20).map(|i| i as f64 * 0.01).collect();
        strain[10] = 0.10;
        let stress: Vec<f64> = (0..20).map(|i| if i == 10 { 300.0 } else { 100.0 + i as f64 }).collect();
        let c = TensileCurve::new(strain, stress).unwrap();
        let (ep, st) = to_true_plastic(&c, 210000.0).unwrap();
        // samples past the maximum at index 10 are discarded
        assert_eq!(st.len(), 10);
        assert!((st[9] - 330.0).abs() < 1e-12);
        assert!((ep[9] - (1.1f64.ln() - 330.0 / 210000.0)).abs() < 1e-15);
        assert!((1.1f64.ln() - 0.0953102).abs() < 1e-7);
    }

    #[test]
    fn generic_over_f32() {
        let strain: Vec<f32> = (0..64).map(|i| i as f32 * 1e-4).collect();
        let stress = strain.iter().map(|e| 70000.0 * e).collect();
        let c = TensileCurve::new(strain, stress).unwrap();
        let fit = elastic_modulus(&c).unwrap();
        assert!((fit.modulus - 70000.0).abs() < 5.0);
    }
}
