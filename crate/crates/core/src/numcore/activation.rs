use super::Tensor;

pub fn relu(input: &Tensor) -> Tensor {
    let values = input.values().iter().map(|&x| x.max(0.0)).collect();
    Tensor::from_vec(input.shape(), values).expect("relu preserves shape")
}

/// Gradient flows only where the input was strictly positive.
pub fn relu_backward(input: &mut Tensor, out: &Tensor) {
    let (xv, dx) = input.split_mut();
    for ((d, &x), &g) in dx.iter_mut().zip(xv.iter()).zip(out.grad()) {
        if x > 0.0 {
            *d += g;
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_values_and_zero_subgradient() {
        let mut x = Tensor::vector(vec![-1.0, 2.0, 0.0]);
        let mut y = relu(&x);
        assert_eq!(y.values(), &[0.0, 2.0, 0.0]);
        y.grad_mut().iter_mut().for_each(|g| *g = 1.0);
        relu_backward(&mut x, &y);
        assert_eq!(x.grad(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-1000.0).is_finite());
        assert_eq!(sigmoid(1000.0), 1.0);
    }
}
