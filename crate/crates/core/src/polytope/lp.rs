//! Exact two-phase simplex over rationals.
//!
//! Bland's rule is used for both the entering and leaving choice, so the
//! method terminates on degenerate problems without any perturbation.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::HalfspaceSystem;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vec<Rational> },
    Infeasible,
    Unbounded,
}

/// How an original (free) coordinate maps onto nonnegative tableau columns.
#[derive(Debug, Clone, Copy)]
enum Column {
    NonNegative(usize),
    Split { plus: usize, minus: usize },
}

struct Tableau {
    rows: Vec<Vec<BigRational>>,
    rhs: Vec<BigRational>,
    basis: Vec<usize>,
    /// Reduced costs `c_j - c_B B^-1 A_j`; the problem is a maximization.
    cost: Vec<BigRational>,
    value: BigRational,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col].clone();
        if !pivot.is_zero() {
            for entry in self.rows[row].iter_mut() {
                if !entry.is_zero() {
                    *entry /= &pivot;
                }
            }
            self.rhs[row] /= &pivot;
        }
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col].clone();
            if factor.is_zero() {
                continue;
            }
            for (entry, p) in self.rows[r].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *entry -= &factor * p;
                }
            }
            self.rhs[r] -= &factor * &pivot_rhs;
        }
        let factor = self.cost[col].clone();
        if !factor.is_zero() {
            for (entry, p) in self.cost.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *entry -= &factor * p;
                }
            }
            // value tracks -(objective) in the usual tableau convention; keep it as +objective.
            self.value += &factor * &pivot_rhs;
        }
        self.basis[row] = col;
    }

    /// Runs primal simplex restricted to columns `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let entering = (0..allowed).find(|&j| self.cost[j].is_positive());
            let Some(col) = entering else {
                return true;
            };
            let mut best: Option<(usize, BigRational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

/// Maximize `objective · x` subject to `sys`, over free real coordinates.
pub fn maximize(objective: &[Rational], sys: &HalfspaceSystem) -> LpOutcome {
    let dim = sys.dimension;
    assert_eq!(objective.len(), dim, "objective length must match dimension");

    // Rows of the form -c·x_j <= 0 (c > 0) just say x_j >= 0.
    let mut nonneg = vec![false; dim];
    let mut kept = Vec::with_capacity(sys.inequalities.len());
    for ineq in &sys.inequalities {
        let support: Vec<usize> = (0..dim).filter(|&j| !ineq.coeffs[j].is_zero()).collect();
        if support.len() == 1 && ineq.coeffs[support[0]].is_negative() && ineq.bound.is_zero() {
            nonneg[support[0]] = true;
        } else {
            kept.push(ineq);
        }
    }

    let mut columns = Vec::with_capacity(dim);
    let mut n_struct = 0;
    for &is_nonneg in &nonneg {
        if is_nonneg {
            columns.push(Column::NonNegative(n_struct));
            n_struct += 1;
        } else {
            columns.push(Column::Split { plus: n_struct, minus: n_struct + 1 });
            n_struct += 2;
        }
    }

    let n_ineq = kept.len();
    let n_rows = n_ineq + sys.equalities.len();
    let slack0 = n_struct;
    // Artificial columns are allocated lazily, one per row that needs one.
    let mut needs_artificial = Vec::with_capacity(n_rows);
    let mut raw_rows: Vec<(Vec<BigRational>, BigRational)> = Vec::with_capacity(n_rows);

    let expand = |coeffs: &[Rational]| {
        let mut row = vec![BigRational::zero(); n_struct];
        for (j, col) in columns.iter().enumerate() {
            let c = &coeffs[j].0;
            if c.is_zero() {
                continue;
            }
            match *col {
                Column::NonNegative(k) => row[k] = c.clone(),
                Column::Split { plus, minus } => {
                    row[plus] = c.clone();
                    row[minus] = -c.clone();
                }
            }
        }
        row
    };

    for ineq in &kept {
        raw_rows.push((expand(&ineq.coeffs), ineq.bound.0.clone()));
    }
    for eq in &sys.equalities {
        raw_rows.push((expand(&eq.coeffs), eq.value.0.clone()));
    }

    let mut slack_sign = vec![BigRational::zero(); n_rows];
    for (i, (row, rhs)) in raw_rows.iter_mut().enumerate() {
        let is_ineq = i < n_ineq;
        let mut sign = BigRational::from_integer(1.into());
        if rhs.is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            *rhs = -rhs.clone();
            sign = -sign;
        }
        if is_ineq {
            slack_sign[i] = sign.clone();
        }
        needs_artificial.push(!is_ineq || sign.is_negative());
    }

    let n_art = needs_artificial.iter().filter(|&&b| b).count();
    let art0 = slack0 + n_ineq;
    let width = art0 + n_art;

    let mut rows = Vec::with_capacity(n_rows);
    let mut rhs = Vec::with_capacity(n_rows);
    let mut basis = Vec::with_capacity(n_rows);
    let mut next_art = art0;
    for (i, (row, b)) in raw_rows.into_iter().enumerate() {
        let mut full = row;
        full.resize(width, BigRational::zero());
        if i < n_ineq {
            full[slack0 + i] = slack_sign[i].clone();
        }
        if needs_artificial[i] {
            full[next_art] = BigRational::from_integer(1.into());
            basis.push(next_art);
            next_art += 1;
        } else {
            basis.push(slack0 + i);
        }
        rows.push(full);
        rhs.push(b);
    }

    // Phase one: maximize -(sum of artificials).
    let mut cost = vec![BigRational::zero(); width];
    let mut value = BigRational::zero();
    for (i, row) in rows.iter().enumerate() {
        if basis[i] >= art0 {
            for (c, a) in cost.iter_mut().zip(row) {
                *c += a;
            }
            value -= &rhs[i];
        }
    }
    for c in cost.iter_mut().skip(art0) {
        *c = BigRational::zero();
    }
    let mut tab = Tableau { rows, rhs, basis, cost, value };
    if n_art > 0 {
        tab.optimize(width);
        if tab.value.is_negative() {
            return LpOutcome::Infeasible;
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art0 {
                match (0..art0).find(|&j| !tab.rows[r][j].is_zero()) {
                    Some(col) => {
                        tab.pivot(r, col);
                        r += 1;
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.rhs.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    // Phase two.
    let mut c_struct = vec![BigRational::zero(); width];
    for (j, col) in columns.iter().enumerate() {
        let c = &objective[j].0;
        match *col {
            Column::NonNegative(k) => c_struct[k] = c.clone(),
            Column::Split { plus, minus } => {
                c_struct[plus] = c.clone();
                c_struct[minus] = -c.clone();
            }
        }
    }
    let mut cost = c_struct.clone();
    let mut value = BigRational::zero();
    for (i, row) in tab.rows.iter().enumerate() {
        let cb = &c_struct[tab.basis[i]];
        if cb.is_zero() {
            continue;
        }
        for (c, a) in cost.iter_mut().zip(row) {
            if !a.is_zero() {
                *c -= cb * a;
            }
        }
        value += cb * &tab.rhs[i];
    }
    tab.cost = cost;
    tab.value = value;
    if !tab.optimize(art0) {
        return LpOutcome::Unbounded;
    }

    let mut col_value = vec![BigRational::zero(); width];
    for (i, &b) in tab.basis.iter().enumerate() {
        col_value[b] = tab.rhs[i].clone();
    }
    let point = columns
        .iter()
        .map(|col| match *col {
            Column::NonNegative(k) => Rational(col_value[k].clone()),
            Column::Split { plus, minus } => Rational(&col_value[plus] - &col_value[minus]),
        })
        .collect();
    LpOutcome::Optimal { value: Rational(tab.value), point }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn sys(dim: usize, ineqs: &[(&[&str], &str)], eqs: &[(&[&str], &str)]) -> HalfspaceSystem {
        let mut s = HalfspaceSystem::new(dim);
        for (c, b) in ineqs {
            s.add_inequality(c.iter().map(|x| q(x)).collect(), q(b)).unwrap();
        }
        for (c, b) in eqs {
            s.add_equality(c.iter().map(|x| q(x)).collect(), q(b)).unwrap();
        }
        s
    }

    #[test]
    fn box_maximum() {
        let s = sys(2, &[(&["1", "0"], "0.6"), (&["0", "1"], "0.4"), (&["-1", "0"], "0"), (&["0", "-1"], "0")], &[]);
        match maximize(&[q("1"), q("1")], &s) {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, q("1"));
                assert_eq!(point, vec![q("0.6"), q("0.4")]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn free_variables_and_negative_bounds() {
        // x in [-3, -1], maximize -x -> 3
        let s = sys(1, &[(&["1"], "-1"), (&["-1"], "3")], &[]);
        match maximize(&[q("-1")], &s) {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, q("3"));
                assert_eq!(point, vec![q("-3")]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = sys(1, &[(&["1"], "0"), (&["-1"], "-1")], &[]);
        assert_eq!(maximize(&[q("1")], &infeasible), LpOutcome::Infeasible);
        let ray = sys(2, &[(&["-1", "0"], "0"), (&["0", "-1"], "0")], &[]);
        assert_eq!(maximize(&[q("1"), q("0")], &ray), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_constraints_and_redundant_rows() {
        let s = sys(2, &[(&["-1", "0"], "0"), (&["0", "-1"], "0")], &[(&["1", "1"], "1"), (&["2", "2"], "2")]);
        match maximize(&[q("1"), q("2")], &s) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q("2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // Classic degenerate corner: many constraints through the origin.
        let s = sys(
            2,
            &[(&["1", "-1"], "0"), (&["-1", "1"], "0"), (&["1", "1"], "0"), (&["-1", "0"], "0"), (&["0", "-1"], "0"), (&["1", "2"], "0")],
            &[],
        );
        match maximize(&[q("1"), q("1")], &s) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q("0")),
            other => panic!("{other:?}"),
        }
    }
}
