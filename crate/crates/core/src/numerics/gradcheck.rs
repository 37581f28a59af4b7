//! Central finite-difference verification of tape gradients.

use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::error::{Result, TdamError};

/// Magnitude below which both the analytic and numeric derivative are taken
/// to be zero; the relative error of such an entry is its absolute error
/// divided by this floor.
pub const GRAD_FLOOR: f64 = 1e-10;

/// Relative discrepancy between an analytic and a numeric derivative.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    diff / analytic.abs().max(numeric.abs()).max(GRAD_FLOOR)
}

#[derive(Debug, Clone)]
pub struct InputCheck {
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    pub max_relative_error: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub inputs: Vec<InputCheck>,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares reverse-mode gradients of the scalar function `f` against central
/// differences with the given `step`.
pub fn grad_check<F>(f: F, inputs: &[Tensor], step: f64, tol: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let eval = |values: &[Tensor], with_grad: bool| -> Result<(f64, Tape, Vec<Var>)> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = values
            .iter()
            .map(|t| {
                if with_grad {
                    tape.param(t.clone())
                } else {
                    tape.constant(t.clone())
                }
            })
            .collect();
        let out = f(&mut tape, &vars)?;
        if tape.value(out).len() != 1 {
            return Err(TdamError::invalid(format!(
                "grad_check needs a scalar function, got shape {:?}",
                tape.value(out).shape()
            )));
        }
        let y = tape.value(out).data()[0];
        if with_grad {
            tape.backward(out)?;
        }
        Ok((y, tape, vars))
    };

    let (_, tape, vars) = eval(inputs, true)?;
    let mut work: Vec<Tensor> = inputs.to_vec();
    let mut checks = Vec::with_capacity(inputs.len());
    let mut worst = 0.0f64;
    for (idx, var) in vars.iter().enumerate() {
        let len = inputs[idx].len();
        let analytic = tape.grad(*var).map_or_else(|| vec![0.0; len], <[f64]>::to_vec);
        let mut numeric = vec![0.0; len];
        for (j, num) in numeric.iter_mut().enumerate() {
            let orig = work[idx].data()[j];
            work[idx].data_mut()[j] = orig + step;
            let (plus, _, _) = eval(&work, false)?;
            work[idx].data_mut()[j] = orig - step;
            let (minus, _, _) = eval(&work, false)?;
            work[idx].data_mut()[j] = orig;
            *num = (plus - minus) / (2.0 * step);
        }
        let err = analytic
            .iter()
            .zip(&numeric)
            .map(|(&a, &n)| relative_error(a, n))
            .fold(0.0, f64::max);
        worst = worst.max(err);
        checks.push(InputCheck {
            analytic,
            numeric,
            max_relative_error: err,
        });
    }
    Ok(GradCheckReport {
        inputs: checks,
        max_relative_error: worst,
        tolerance: tol,
        passed: worst < tol,
    })
}
