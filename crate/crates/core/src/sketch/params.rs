use serde::{Deserialize, Serialize};

use super::{SketchKind, SketchSpec};
use crate::error::{Error, Result};

/// Multipliers for the parameter regimes that are only known up to constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamConstants {
    /// Multiplies the row count `m` of the OSNAP regimes.
    pub c_m: f64,
    /// Multiplies the column sparsity `s` of the OSNAP regimes.
    pub c_s: f64,
    /// Exponent slack of the block regime, `m ~ d^(1+gamma)/eps^2`.
    pub gamma: f64,
}

impl Default for ParamConstants {
    fn default() -> Self {
        ParamConstants {
            c_m: 1.0,
            c_s: 1.0,
            gamma: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchParams {
    pub kind: SketchKind,
    pub m: usize,
    pub s: usize,
    pub independence_k: usize,
}

impl SketchParams {
    pub fn to_spec(&self, n: usize, seed: u64) -> SketchSpec {
        SketchSpec {
            kind: self.kind,
            m: self.m,
            n,
            s: self.s,
            independence_k: self.independence_k,
            seed,
        }
    }
}

/// `ceil` that ignores relative round-off of a few ulps, so closed forms that
/// are integers in exact arithmetic do not round up by one.
fn ceil_exact(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

fn to_count(x: f64, what: &str) -> Result<usize> {
    let c = ceil_exact(x);
    if !(c.is_finite() && c >= 1.0 && c <= usize::MAX as f64 / 4.0) {
        return Err(Error::param(format!("{what} = {x} is not a usable size")));
    }
    Ok(c as usize)
}

/// Sketch size `(m, s)` for embedding a `d`-dimensional subspace with
/// distortion `eps` and failure probability `delta`.
///
/// * `Tz`: `m = ceil((d^2 + d) / (delta (2 eps - eps^2)^2))`, `s = 1`.
/// * `OsnapGlobal`: with `L = ln(max(d/delta, e))`,
///   `m = ceil(c_m d L^8 / eps^2)`, `s = ceil(c_s L^3 / eps)`.
/// * `OsnapBlock`: `s = ceil(c_s / eps)`, `m = ceil(c_m d^(1+gamma) / eps^2)`
///   rounded up to a multiple of `s`.
///
/// The OSNAP position hashes get independence `max(2, ceil(log2 d))`; TZ uses
/// pairwise independent positions.
pub fn recommend_params(
    d: usize,
    eps: f64,
    delta: f64,
    kind: SketchKind,
    constants: &ParamConstants,
) -> Result<SketchParams> {
    if d == 0 {
        return Err(Error::param("subspace dimension must be at least 1"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("eps must lie in (0, 1), got {eps}")));
    }
    // delta = 1 is admitted: the bound is vacuous but the formula still gives the minimal m.
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    if !(constants.c_m > 0.0 && constants.c_s > 0.0 && constants.gamma >= 0.0) {
        return Err(Error::param(
            "c_m and c_s must be positive and gamma nonnegative",
        ));
    }
    let df = d as f64;
    let osnap_k = 2usize.max((df.max(2.0)).log2().ceil() as usize);
    match kind {
        SketchKind::Tz => {
            let gap = 2.0 * eps - eps * eps;
            let m = to_count((df * df + df) / (delta * gap * gap), "m")?;
            Ok(SketchParams {
                kind,
                m,
                s: 1,
                independence_k: 2,
            })
        }
        SketchKind::OsnapGlobal => {
            let l = (df / delta).max(std::f64::consts::E).ln();
            let m = to_count(constants.c_m * df * l.powi(8) / (eps * eps), "m")?;
            let s = to_count(constants.c_s * l.powi(3) / eps, "s")?.min(m);
            Ok(SketchParams {
                kind,
                m,
                s,
                independence_k: osnap_k,
            })
        }
        SketchKind::OsnapBlock => {
            let s = to_count(constants.c_s / eps, "s")?;
            let m = to_count(
                constants.c_m * df.powf(1.0 + constants.gamma) / (eps * eps),
                "m",
            )?;
            let m = m.div_ceil(s) * s;
            Ok(SketchParams {
                kind,
                m,
                s,
                independence_k: osnap_k,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tz(d: usize, eps: f64, delta: f64) -> SketchParams {
        recommend_params(d, eps, delta, SketchKind::Tz, &ParamConstants::default()).unwrap()
    }

    #[test]
    fn tz_closed_form() {
        // 3 * 6 / 0.75^2 = 32
        let p = tz(2, 0.5, 1.0 / 3.0);
        assert_eq!((p.m, p.s), (32, 1));
        // 3 * 42 / 0.5625 = 224
        assert_eq!(tz(6, 0.5, 1.0 / 3.0).m, 224);
        for eps in [0.1, 0.3, 0.5, 0.9] {
            let gap: f64 = 2.0 * eps - eps * eps;
            assert_eq!(tz(1, eps, 1.0).m, (2.0 / (gap * gap)).ceil() as usize);
        }
    }

    #[test]
    fn block_regime_rounds_to_multiple_of_s() {
        let c = ParamConstants {
            gamma: 0.5,
            ..Default::default()
        };
        let p = recommend_params(100, 0.5, 1.0 / 3.0, SketchKind::OsnapBlock, &c).unwrap();
        assert_eq!(p.s, 2);
        assert_eq!(p.m, 4000);
        let p = recommend_params(
            6,
            0.5,
            1.0 / 3.0,
            SketchKind::OsnapBlock,
            &ParamConstants::default(),
        )
        .unwrap();
        assert_eq!((p.m, p.s), (144, 2));
        let p = recommend_params(
            5,
            0.3,
            0.1,
            SketchKind::OsnapBlock,
            &ParamConstants::default(),
        )
        .unwrap();
        assert_eq!(p.s, 4);
        assert_eq!(p.m % p.s, 0);
        assert!(p.m as f64 >= 25.0 / 0.09);
    }

    #[test]
    fn global_regime_formula() {
        let p = recommend_params(
            4,
            0.3,
            1.0 / 3.0,
            SketchKind::OsnapGlobal,
            &ParamConstants::default(),
        )
        .unwrap();
        let l = 12f64.ln();
        assert_eq!(p.m, (4.0 * l.powi(8) / 0.09).ceil() as usize);
        assert_eq!(p.s, (l.powi(3) / 0.3).ceil() as usize);
        assert_eq!(p.independence_k, 2);
        let c = ParamConstants {
            c_m: 0.01,
            c_s: 0.1,
            gamma: 1.0,
        };
        let small = recommend_params(4, 0.3, 1.0 / 3.0, SketchKind::OsnapGlobal, &c).unwrap();
        assert!(small.m < p.m && small.s < p.s);
        let p = recommend_params(
            64,
            0.5,
            0.5,
            SketchKind::OsnapGlobal,
            &ParamConstants::default(),
        )
        .unwrap();
        assert_eq!(p.independence_k, 6);
    }

    #[test]
    fn out_of_range_arguments() {
        let c = ParamConstants::default();
        for (eps, delta) in [
            (0.0, 0.5),
            (1.0, 0.5),
            (0.5, 0.0),
            (0.5, 1.5),
            (f64::NAN, 0.5),
        ] {
            assert!(recommend_params(3, eps, delta, SketchKind::Tz, &c).is_err());
        }
        assert!(recommend_params(0, 0.5, 0.5, SketchKind::Tz, &c).is_err());
    }
}
