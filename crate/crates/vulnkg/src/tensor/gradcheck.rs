//! Central-difference verification of reverse-mode gradients.

use super::{NumError, NumResult, ParamId, ParamStore, Tape, Tensor};

fn check_eps(eps: f64) -> NumResult<()> {
    if !(1e-7..=1e-3).contains(&eps) {
        return Err(NumError::BadEpsilon { eps });
    }
    Ok(())
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(1.0)
}

/// Max over coordinates of |analytic − central-difference| / max(1, |analytic|)
/// for a scalar-valued `f` of one tensor.
pub fn grad_check<F>(f: F, x: &Tensor, eps: f64) -> NumResult<f64>
where
    F: Fn(&Tape, &Tensor) -> NumResult<Tensor>,
{
    let coords: Vec<usize> = (0..x.numel()).collect();
    grad_check_sample(f, x, eps, &coords)
}

/// Same as [`grad_check`] but restricted to the given coordinates.
pub fn grad_check_sample<F>(f: F, x: &Tensor, eps: f64, coords: &[usize]) -> NumResult<f64>
where
    F: Fn(&Tape, &Tensor) -> NumResult<Tensor>,
{
    check_eps(eps)?;
    let tape = Tape::new();
    let xt = tape.watch(x);
    let loss = f(&tape, &xt)?;
    let analytic = tape.backward_watched(&loss, &xt)?;

    let mut max_err: f64 = 0.0;
    for &i in coords {
        let v = x.data()[i];
        let plus = eval_scalar(&f, &x.with_coord(i, v + eps))?;
        let minus = eval_scalar(&f, &x.with_coord(i, v - eps))?;
        let numeric = (plus - minus) / (2.0 * eps);
        max_err = max_err.max(relative_error(analytic.data()[i], numeric));
    }
    Ok(max_err)
}

fn eval_scalar<F>(f: &F, x: &Tensor) -> NumResult<f64>
where
    F: Fn(&Tape, &Tensor) -> NumResult<Tensor>,
{
    let tape = Tape::inference();
    let out = f(&tape, x)?;
    if out.numel() != 1 {
        return Err(NumError::NonScalarLoss {
            shape: out.shape().to_vec(),
        });
    }
    Ok(out.item())
}

/// Gradient check of a model loss with respect to one parameter in a store.
/// `coords = None` sweeps every coordinate of that parameter.
pub fn grad_check_params<F>(
    forward: F,
    store: &mut ParamStore,
    id: ParamId,
    eps: f64,
    coords: Option<&[usize]>,
) -> NumResult<f64>
where
    F: Fn(&Tape, &ParamStore) -> NumResult<Tensor>,
{
    check_eps(eps)?;
    store.zero_grads();
    let tape = Tape::new();
    let loss = forward(&tape, store)?;
    tape.backward(&loss, store)?;
    let analytic = store.get(id).grad.clone();

    let base = store.get(id).value.clone();
    let all: Vec<usize>;
    let coords = match coords {
        Some(c) => c,
        None => {
            all = (0..base.numel()).collect();
            &all
        }
    };

    let mut max_err: f64 = 0.0;
    for &i in coords {
        let v = base.data()[i];
        store.set_value(id, base.with_coord(i, v + eps));
        let plus = eval_store(&forward, store)?;
        store.set_value(id, base.with_coord(i, v - eps));
        let minus = eval_store(&forward, store)?;
        let numeric = (plus - minus) / (2.0 * eps);
        max_err = max_err.max(relative_error(analytic.data()[i], numeric));
    }
    store.set_value(id, base);
    Ok(max_err)
}

fn eval_store<F>(forward: &F, store: &ParamStore) -> NumResult<f64>
where
    F: Fn(&Tape, &ParamStore) -> NumResult<Tensor>,
{
    let tape = Tape::inference();
    let out = forward(&tape, store)?;
    if out.numel() != 1 {
        return Err(NumError::NonScalarLoss {
            shape: out.shape().to_vec(),
        });
    }
    Ok(out.item())
}
