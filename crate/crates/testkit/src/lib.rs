//! Slow, direct reference computations. Everything here works on dense
//! `Vec<Vec<f64>>` data and plain loops so it shares no code paths with the
//! library it checks.

use nalgebra::{DMatrix, DVector};

/// TF-IDF by nested loops: returns the kept terms (in column order) and one
/// dense, L2-normalized row per document.
pub fn tfidf(docs: &[Vec<String>], max_features: usize, sublinear: bool) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut all: Vec<String> = Vec::new();
    for doc in docs {
        for t in doc {
            if !all.contains(t) {
                all.push(t.clone());
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = all
        .into_iter()
        .map(|t| {
            let mut total = 0;
            for doc in docs {
                for u in doc {
                    if *u == t {
                        total += 1;
                    }
                }
            }
            (t, total)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(max_features);
    let mut terms: Vec<String> = ranked.into_iter().map(|(t, _)| t).collect();
    terms.sort();

    let n = docs.len() as f64;
    let idf: Vec<f64> = terms
        .iter()
        .map(|t| {
            let df = docs.iter().filter(|d| d.contains(t)).count() as f64;
            ((1.0 + n) / (1.0 + df)).ln() + 1.0
        })
        .collect();

    let rows = docs
        .iter()
        .map(|doc| {
            let mut row: Vec<f64> = terms
                .iter()
                .zip(&idf)
                .map(|(t, w)| {
                    let tf = doc.iter().filter(|u| *u == t).count() as f64;
                    if tf == 0.0 {
                        0.0
                    } else if sublinear {
                        (tf.ln() + 1.0) * w
                    } else {
                        tf * w
                    }
                })
                .collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in &mut row {
                    *v /= norm;
                }
            }
            row
        })
        .collect();
    (terms, rows)
}

/// Multinomial naive Bayes posterior by direct multiplication of
/// `P(c) * Π_j P(j | c)^x_j`, normalized over the two classes.
pub fn nb_posterior(x: &[Vec<f64>], y: &[u8], alpha: f64, query: &[f64]) -> [f64; 2] {
    let d = query.len();
    let mut joint = [0.0; 2];
    for (c, slot) in joint.iter_mut().enumerate() {
        let members: Vec<&Vec<f64>> = x.iter().zip(y).filter(|(_, &l)| l as usize == c).map(|(r, _)| r).collect();
        let prior = members.len() as f64 / x.len() as f64;
        let totals: Vec<f64> = (0..d).map(|j| members.iter().map(|r| r[j]).sum()).collect();
        let grand: f64 = totals.iter().sum();
        let mut p = prior;
        for j in 0..d {
            let theta = (totals[j] + alpha) / (grand + alpha * d as f64);
            p *= theta.powf(query[j]);
        }
        *slot = p;
    }
    let z = joint[0] + joint[1];
    [joint[0] / z, joint[1] / z]
}

fn signed(y: &[u8]) -> Vec<f64> {
    y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect()
}

fn margin(row: &[f64], params: &[f64]) -> f64 {
    let d = row.len();
    row.iter().zip(&params[..d]).map(|(a, b)| a * b).sum::<f64>() + params[d]
}

/// `Σ ln(1 + exp(-t z)) + ‖w‖² / (2C)` with the bias last in `params`.
pub fn logistic_objective(x: &[Vec<f64>], y: &[u8], c: f64, params: &[f64]) -> f64 {
    let d = params.len() - 1;
    let loss: f64 = x
        .iter()
        .zip(signed(y))
        .map(|(r, t)| {
            let v = -t * margin(r, params);
            if v > 30.0 {
                v
            } else {
                v.exp().ln_1p()
            }
        })
        .sum();
    loss + params[..d].iter().map(|w| w * w).sum::<f64>() / (2.0 * c)
}

/// `‖w‖² / 2 + C Σ max(0, 1 - t z)²` with the bias last in `params`.
pub fn squared_hinge_objective(x: &[Vec<f64>], y: &[u8], c: f64, params: &[f64]) -> f64 {
    let d = params.len() - 1;
    let loss: f64 = x
        .iter()
        .zip(signed(y))
        .map(|(r, t)| (1.0 - t * margin(r, params)).max(0.0).powi(2))
        .sum();
    0.5 * params[..d].iter().map(|w| w * w).sum::<f64>() + c * loss
}

/// Central differences with step `h`.
pub fn numeric_gradient(f: impl Fn(&[f64]) -> f64, at: &[f64], h: f64) -> Vec<f64> {
    let mut p = at.to_vec();
    (0..at.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + h;
            let up = f(&p);
            p[i] = orig - h;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    Logistic,
    SquaredHinge,
}

/// Minimizes either linear objective with damped (generalized) Newton steps
/// on dense matrices. Returns the parameters and the objective value.
pub fn newton_minimize(x: &[Vec<f64>], y: &[u8], c: f64, loss: Loss) -> (Vec<f64>, f64) {
    let n = x.len();
    let d = x.first().map_or(0, Vec::len);
    let p = d + 1;
    let aug = DMatrix::from_fn(n, p, |i, j| if j < d { x[i][j] } else { 1.0 });
    let t = DVector::from_vec(signed(y));
    let objective = |w: &DVector<f64>| match loss {
        Loss::Logistic => logistic_objective(x, y, c, w.as_slice()),
        Loss::SquaredHinge => squared_hinge_objective(x, y, c, w.as_slice()),
    };

    let mut w = DVector::<f64>::zeros(p);
    let mut value = objective(&w);
    for _ in 0..200 {
        let z = &aug * &w;
        let mut reg = DMatrix::<f64>::zeros(p, p);
        let mut reg_grad = DVector::<f64>::zeros(p);
        let scale = match loss {
            Loss::Logistic => 1.0 / c,
            Loss::SquaredHinge => 1.0,
        };
        for j in 0..d {
            reg[(j, j)] = scale;
            reg_grad[j] = scale * w[j];
        }
        let mut coef = DVector::<f64>::zeros(n);
        let mut curv = DVector::<f64>::zeros(n);
        for i in 0..n {
            let m = t[i] * z[i];
            match loss {
                Loss::Logistic => {
                    let s = 1.0 / (1.0 + m.exp());
                    coef[i] = -t[i] * s;
                    curv[i] = s * (1.0 - s);
                }
                Loss::SquaredHinge => {
                    if m < 1.0 {
                        coef[i] = -2.0 * c * t[i] * (1.0 - m);
                        curv[i] = 2.0 * c;
                    }
                }
            }
        }
        let grad = aug.transpose() * &coef + reg_grad;
        if grad.amax() < 1e-10 {
            break;
        }
        let mut hess = aug.transpose() * DMatrix::from_diagonal(&curv) * &aug + reg;
        for k in 0..p {
            hess[(k, k)] += 1e-12;
        }
        let step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&(-&grad)),
            None => -&grad,
        };
        let slope = grad.dot(&step);
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-12 {
            let cand = &w + alpha * &step;
            let v = objective(&cand);
            if v <= value + 1e-4 * alpha * slope {
                w = cand;
                value = v;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (w.as_slice().to_vec(), value)
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half, by comparing every pair.
pub fn mann_whitney_auc(labels: &[u8], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if li != 1 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_extremes() {
        assert_eq!(mann_whitney_auc(&[0, 0, 1, 1], &[0.1, 0.2, 0.8, 0.9]), 1.0);
        assert_eq!(mann_whitney_auc(&[0, 1], &[0.5, 0.5]), 0.5);
    }

    #[test]
    fn newton_logistic_matches_closed_form_for_bias_only() {
        // With no features the optimum bias is the log-odds of the labels.
        let x = vec![vec![], vec![], vec![], vec![]];
        let (w, _) = newton_minimize(&x, &[1, 1, 1, 0], 1.0, Loss::Logistic);
        assert!((w[0] - 3f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn tfidf_single_document() {
        let docs = vec![vec!["a".to_string(), "a".to_string(), "b".to_string()]];
        let (terms, rows) = tfidf(&docs, 10, false);
        assert_eq!(terms, ["a", "b"]);
        let s = 5f64.sqrt();
        assert!((rows[0][0] - 2.0 / s).abs() < 1e-12);
        assert!((rows[0][1] - 1.0 / s).abs() < 1e-12);
    }

    #[test]
    fn nb_posterior_sums_to_one() {
        let x = vec![vec![1.0, 0.0], vec![0.0, 2.0]];
        let p = nb_posterior(&x, &[0, 1], 1.0, &[1.0, 1.0]);
        assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    }
}
