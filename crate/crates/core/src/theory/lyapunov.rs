use crate::clipping::ClipConfig;
use crate::error::Result;
use crate::objectives::Objective;
use crate::vector::{check_dim, ParamVector};

/// `G(x, m) = F(x) + βν/(2(1−β)) · min(η‖m‖², γ‖m‖)`.
pub fn lyapunov(obj: &dyn Objective, x: &ParamVector, m: &ParamVector, cfg: &ClipConfig) -> Result<f64> {
    cfg.validate()?;
    check_dim(x.dim(), m.dim())?;
    Ok(lyapunov_parts(obj.value(x)?, m.norm(), cfg))
}

/// [`lyapunov`] from a precomputed `F(x)` and `‖m‖`.
pub fn lyapunov_parts(loss: f64, m_norm: f64, cfg: &ClipConfig) -> f64 {
    let weight = cfg.beta * cfg.nu / (2.0 * (1.0 - cfg.beta));
    if weight == 0.0 || m_norm == 0.0 {
        return loss;
    }
    loss + weight * (cfg.eta * m_norm * m_norm).min(cfg.gamma * m_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::make_poly2d;

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn reduces_to_loss() {
        let obj = make_poly2d();
        let x = pv(&[0.3, -1.0]);
        let f = obj.value(&x).unwrap();
        let m = pv(&[2.0, -1.0]);
        let cases = [
            ClipConfig::hard(0.1, 1.0, 0.0, 0.7).unwrap(),
            ClipConfig::hard(0.1, 1.0, 0.9, 0.0).unwrap(),
        ];
        for cfg in cases {
            assert_eq!(lyapunov(&obj, &x, &m, &cfg).unwrap(), f);
        }
        let cfg = ClipConfig::hard(0.1, 1.0, 0.9, 1.0).unwrap();
        assert_eq!(lyapunov(&obj, &x, &ParamVector::zeros(2), &cfg).unwrap(), f);
    }

    #[test]
    fn momentum_term_switches_branch() {
        let cfg = ClipConfig::hard(0.5, 1.0, 0.5, 1.0).unwrap();
        // weight = 0.5 / (2 * 0.5) = 0.5; threshold γ/η = 2.
        assert!((lyapunov_parts(1.0, 1.0, &cfg) - (1.0 + 0.5 * 0.5)).abs() < 1e-15);
        assert!((lyapunov_parts(1.0, 4.0, &cfg) - (1.0 + 0.5 * 4.0)).abs() < 1e-15);
    }
}
