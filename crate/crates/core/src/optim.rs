//! Derivative-free Nelder–Mead minimizer.

/// Stopping rule and initial simplex size.
#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    /// Offsets used to build the initial simplex around the start point.
    pub initial_step: Vec<f64>,
    /// Stop once every vertex is within this distance (max-norm) of the best.
    pub diameter_tol: f64,
    pub max_evals: usize,
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub diameter: f64,
    pub converged: bool,
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

fn nan_to_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` from `x0` with the standard coefficients (reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2). NaN objective values are
/// treated as +∞. The best objective value never increases, so the result is
/// never worse than `f(x0)`.
pub fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let dim = x0.len();
    assert!(dim >= 1 && opts.initial_step.len() == dim);
    let eval = |x: &[f64]| nan_to_inf(f(x));

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();
    let mut evals = dim + 1;

    let sort = |simplex: &mut Vec<Vec<f64>>, values: &mut Vec<f64>| {
        let mut idx: Vec<usize> = (0..simplex.len()).collect();
        // Stable: ties keep the older vertex first.
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        *simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        *values = idx.iter().map(|&i| values[i]).collect();
    };

    sort(&mut simplex, &mut values);
    loop {
        let diam = diameter(&simplex);
        if diam < opts.diameter_tol || evals >= opts.max_evals {
            return NelderMeadResult {
                x: simplex[0].clone(),
                f: values[0],
                evals,
                diameter: diam,
                converged: diam < opts.diameter_tol,
            };
        }

        let worst = dim;
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..worst].iter().map(|v| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(1.0);
        let fr = eval(&xr);
        evals += 1;
        if fr < values[0] {
            let xe = along(2.0);
            let fe = eval(&xe);
            evals += 1;
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
        } else if fr < values[worst - 1] {
            simplex[worst] = xr;
            values[worst] = fr;
        } else {
            let (xc, fc) = if fr < values[worst] {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < values[worst].min(fr) {
                simplex[worst] = xc;
                values[worst] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=dim {
                    for j in 0..dim {
                        simplex[i][j] = best[j] + 0.5 * (simplex[i][j] - best[j]);
                    }
                    values[i] = eval(&simplex[i]);
                }
                evals += dim;
            }
        }
        sort(&mut simplex, &mut values);
    }
}
