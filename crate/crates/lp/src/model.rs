use crate::LpError;

/// Direction of a linear constraint `a·x (sense) rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row; zero or negative when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => act - self.rhs,
            Sense::Ge => self.rhs - act,
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// A minimisation LP: `min c·x  s.t.  rows,  lo <= x <= hi`.
///
/// Infinite bounds are written as `f64::INFINITY` / `f64::NEG_INFINITY`.
#[derive(Debug, Clone, Default)]
pub struct LpModel {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.cost.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        self.rows.push(Row { coeffs, sense, rhs });
        self.rows.len() - 1
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for r in &self.rows {
            worst = worst.max(r.violation(x));
        }
        worst
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::InvalidModel("bound vectors do not match variable count".into()));
        }
        for j in 0..n {
            if self.cost[j].is_nan() || self.lower[j].is_nan() || self.upper[j].is_nan() {
                return Err(LpError::InvalidModel(format!("NaN in variable {j}")));
            }
            if self.lower[j] > self.upper[j] {
                return Err(LpError::InvalidModel(format!(
                    "variable {j} has lower bound {} above upper bound {}",
                    self.lower[j], self.upper[j]
                )));
            }
            if self.cost[j].is_infinite() {
                return Err(LpError::InvalidModel(format!("infinite cost on variable {j}")));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.rhs.is_finite() {
                return Err(LpError::InvalidModel(format!("row {i} has non-finite rhs")));
            }
            for &(j, a) in &r.coeffs {
                if j >= n {
                    return Err(LpError::InvalidModel(format!("row {i} references variable {j}")));
                }
                if !a.is_finite() {
                    return Err(LpError::InvalidModel(format!("row {i} has non-finite coefficient")));
                }
            }
        }
        Ok(())
    }
}
