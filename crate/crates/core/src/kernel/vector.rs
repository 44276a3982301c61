use super::KernelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "UPPERCASE"))]
pub enum VectorKernel {
    Linear,
    Rbf,
}

fn check_dims(u: &[f64], v: &[f64]) -> Result<(), KernelError> {
    if u.len() != v.len() {
        return Err(KernelError::DimensionMismatch { expected: u.len(), found: v.len() });
    }
    Ok(())
}

pub fn linear(u: &[f64], v: &[f64]) -> Result<f64, KernelError> {
    check_dims(u, v)?;
    Ok(u.iter().zip(v).map(|(a, b)| a * b).sum())
}

/// `exp(-gamma * |u - v|^2)`
pub fn rbf(u: &[f64], v: &[f64], gamma: f64) -> Result<f64, KernelError> {
    check_dims(u, v)?;
    if !(gamma > 0.0) {
        return Err(KernelError::InvalidConfig("gamma must be positive"));
    }
    let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(libm::exp(-gamma * d2))
}

/// `k_xy / sqrt(k_xx * k_yy)`.
pub fn normalize_kernel(k_xy: f64, k_xx: f64, k_yy: f64) -> Result<f64, KernelError> {
    if !(k_xx > 0.0) || !(k_yy > 0.0) {
        return Err(KernelError::DegenerateSelfKernel);
    }
    Ok(k_xy / libm::sqrt(k_xx * k_yy))
}

impl VectorKernel {
    pub fn eval(self, u: &[f64], v: &[f64], gamma: f64) -> Result<f64, KernelError> {
        match self {
            VectorKernel::Linear => linear(u, v),
            VectorKernel::Rbf => rbf(u, v, gamma),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rbf_values() {
        assert_eq!(rbf(&[0.3, 0.7], &[0.3, 0.7], 0.5).unwrap(), 1.0);
        assert!((rbf(&[0.0], &[1.0], 1.0).unwrap() - 0.367_879_441_171_442_3).abs() < 1e-15);
        let near = rbf(&[0.0], &[0.5], 1.0).unwrap();
        let far = rbf(&[0.0], &[2.0], 1.0).unwrap();
        assert!(1.0 > near && near > far && far > 0.0);
        assert!(matches!(rbf(&[0.0], &[0.0, 1.0], 1.0), Err(KernelError::DimensionMismatch { .. })));
        assert!(rbf(&[0.0], &[0.0], 0.0).is_err());
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_kernel(2.0, 4.0, 4.0).unwrap(), 0.5);
        assert_eq!(normalize_kernel(3.7, 3.7, 3.7).unwrap(), 1.0);
        assert_eq!(normalize_kernel(1.0, 0.0, 1.0), Err(KernelError::DegenerateSelfKernel));
        assert_eq!(normalize_kernel(1.0, 1.0, -2.0), Err(KernelError::DegenerateSelfKernel));
    }

    #[test]
    fn linear_dot() {
        assert_eq!(linear(&[0.5], &[0.25]).unwrap(), 0.125);
        assert_eq!(linear(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
    }
}
