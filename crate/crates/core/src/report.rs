/// Outcome of an equivariance-style property check.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub pass: bool,
    pub max_residual: f64,
    /// Number of (element, input) pairs evaluated.
    pub checked: usize,
    /// Worst offending pair; present only when the check failed.
    pub witness: Option<Witness>,
}

/// A pair `(g, v)` where the two sides of an equivariance identity differ.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// Group element index (or permutation index, for symmetric-group checks).
    pub element: usize,
    pub input: Vec<f64>,
    /// The side where the group acts first, e.g. `f(ρ_in(g)v)`.
    pub lhs: Vec<f64>,
    /// The side where the map acts first, e.g. `ρ_out(g)f(v)`.
    pub rhs: Vec<f64>,
    pub residual: f64,
}

/// Running maximum over checked pairs.
#[derive(Debug)]
pub(crate) struct Tally {
    tol: f64,
    checked: usize,
    worst: Option<Witness>,
}

impl Tally {
    pub(crate) fn new(tol: f64) -> Self {
        Self {
            tol,
            checked: 0,
            worst: None,
        }
    }

    pub(crate) fn record(&mut self, residual: f64, witness: impl FnOnce() -> Witness) {
        self.checked += 1;
        // NaN residuals count as failures.
        let worse = match &self.worst {
            None => true,
            Some(w) => residual > w.residual || (residual.is_nan() && !w.residual.is_nan()),
        };
        if worse {
            let mut w = witness();
            w.residual = residual;
            self.worst = Some(w);
        }
    }

    pub(crate) fn finish(self) -> Report {
        let max_residual = self.worst.as_ref().map_or(0.0, |w| w.residual);
        let pass = max_residual <= self.tol;
        Report {
            pass,
            max_residual,
            checked: self.checked,
            witness: if pass { None } else { self.worst },
        }
    }
}
