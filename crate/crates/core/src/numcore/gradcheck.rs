use crate::error::{Error, Result};

use super::Tensor;

/// Compares analytic gradients against central finite differences.
///
/// `loss` evaluates the objective on `params` and must accumulate its
/// analytic gradient into each parameter's `grad`; it returns the loss as a
/// one-element tensor. Gradients are zeroed before the analytic pass. The
/// result is the maximum over all coordinates of
/// `|analytic − numeric| / max(|analytic|, |numeric|, 1e-8)`.
pub fn grad_check<F>(params: &mut [Tensor], eps: f64, mut loss: F) -> Result<f64>
where
    F: FnMut(&mut [Tensor]) -> Result<Tensor>,
{
    if !(eps > 0.0) {
        return Err(Error::Contract(format!(
            "grad_check eps must be positive, got {eps}"
        )));
    }
    let mut eval = |params: &mut [Tensor]| -> Result<f64> {
        let out = loss(params)?;
        if out.len() != 1 {
            return Err(Error::Contract(format!(
                "grad_check objective must be scalar, got shape {:?}",
                out.shape()
            )));
        }
        Ok(out.values()[0])
    };

    params.iter_mut().for_each(Tensor::zero_grad);
    eval(params)?;
    let analytic: Vec<Vec<f64>> = params.iter().map(|p| p.grad().to_vec()).collect();

    let mut worst = 0.0_f64;
    for t in 0..params.len() {
        for k in 0..params[t].len() {
            let original = params[t].values()[k];
            params[t].values_mut()[k] = original + eps;
            let plus = eval(params)?;
            params[t].values_mut()[k] = original - eps;
            let minus = eval(params)?;
            params[t].values_mut()[k] = original;

            let numeric = (plus - minus) / (2.0 * eps);
            let a = analytic[t][k];
            let denom = a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((a - numeric).abs() / denom);
        }
    }
    // leave the analytic gradient in place for the caller
    for (p, g) in params.iter_mut().zip(analytic) {
        p.grad_mut().copy_from_slice(&g);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_sum(params: &mut [Tensor], factor: f64) -> Result<Tensor> {
        let p = &mut params[0];
        let value = 3.0 * p.values().iter().sum::<f64>();
        p.grad_mut().iter_mut().for_each(|g| *g += 3.0 * factor);
        Ok(Tensor::scalar(value))
    }

    #[test]
    fn linear_function_is_exact() {
        let mut params = vec![Tensor::vector(vec![0.3, -1.2, 4.0])];
        let err = grad_check(&mut params, 1e-4, |p| linear_sum(p, 1.0)).unwrap();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn doubled_backward_is_caught() {
        let mut params = vec![Tensor::vector(vec![0.3, -1.2, 4.0])];
        let err = grad_check(&mut params, 1e-4, |p| linear_sum(p, 2.0)).unwrap();
        assert!((err - 0.5).abs() < 1e-6, "{err}");
    }

    #[test]
    fn non_scalar_objective_is_rejected() {
        let mut params = vec![Tensor::vector(vec![1.0])];
        let res = grad_check(&mut params, 1e-4, |_| Ok(Tensor::zeros(&[2])));
        assert!(matches!(res, Err(Error::Contract(_))));
        assert!(grad_check(&mut params, 0.0, |_| Ok(Tensor::scalar(0.0))).is_err());
    }
}
