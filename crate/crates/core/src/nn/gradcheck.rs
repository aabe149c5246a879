use super::params::ParamSet;

/// `|a - n| / max(|a|, |n|, 1e-8)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_tensor: String,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub checked: usize,
}

/// Compares `analytic` against central differences of `loss` around
/// `params`, entry by entry.
///
/// `loss` must be a deterministic function of the parameters. For stochastic
/// models that means freezing the reparametrisation noise for the whole check;
/// with fresh noise per evaluation the comparison is meaningless.
pub fn finite_diff_check<P, G, F>(loss: F, params: &P, analytic: &G, h: f64) -> GradCheckReport
where
    P: ParamSet + Clone,
    G: ParamSet + ?Sized,
    F: Fn(&P) -> f64,
{
    let analytic: Vec<(String, Vec<f64>)> = analytic
        .tensors()
        .into_iter()
        .map(|t| (t.name, t.data.to_vec()))
        .collect();
    let mut probe = params.clone();
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst_tensor: String::new(),
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
        checked: 0,
    };
    let n_tensors = analytic.len();
    for ti in 0..n_tensors {
        let len = analytic[ti].1.len();
        for i in 0..len {
            let original = probe.tensors()[ti].data[i];
            probe.tensors_mut()[ti].data[i] = original + h;
            let up = loss(&probe);
            probe.tensors_mut()[ti].data[i] = original - h;
            let down = loss(&probe);
            probe.tensors_mut()[ti].data[i] = original;

            let numeric = (up - down) / (2.0 * h);
            let a = analytic[ti].1[i];
            let err = relative_error(a, numeric);
            report.checked += 1;
            if err > report.max_relative_error || report.worst_tensor.is_empty() {
                report.max_relative_error = err;
                report.worst_tensor = analytic[ti].0.clone();
                report.worst_index = i;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    report
}
