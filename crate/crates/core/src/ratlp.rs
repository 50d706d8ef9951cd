//! Exact rational linear feasibility with strict inequalities.
//!
//! Strict systems are decided by slack maximization: maximize `t`
//! subject to the closed constraints shifted inward by `t` and `t <= 1`.
//! The open polyhedron is nonempty exactly when the optimum is positive.
//! The solver is a dictionary-form two-phase simplex over arbitrary
//! precision rationals with Bland's anti-cycling rule, so no tolerance
//! appears anywhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// row · x < rhs
    Less,
    /// row · x > rhs
    Greater,
}

/// A system of linear equalities and strict inequalities over the
/// rationals.
#[derive(Debug, Clone, Default)]
pub struct StrictSystem {
    pub num_vars: usize,
    pub equalities: Vec<(Vec<Rational>, Rational)>,
    pub stricts: Vec<(Vec<Rational>, Rational, Direction)>,
}

impl StrictSystem {
    pub fn new(num_vars: usize) -> Self {
        StrictSystem {
            num_vars,
            equalities: Vec::new(),
            stricts: Vec::new(),
        }
    }

    pub fn push_eq(&mut self, row: Vec<Rational>, rhs: Rational) {
        assert_eq!(row.len(), self.num_vars);
        self.equalities.push((row, rhs));
    }

    pub fn push_strict(&mut self, row: Vec<Rational>, rhs: Rational, dir: Direction) {
        assert_eq!(row.len(), self.num_vars);
        self.stricts.push((row, rhs, dir));
    }

    /// Whether `x` satisfies every constraint, the strict ones strictly.
    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        let dot = |row: &[Rational]| -> Rational {
            row.iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .fold(Rational::zero(), |acc, v| acc + v)
        };
        self.equalities.iter().all(|(row, rhs)| &dot(row) == rhs)
            && self.stricts.iter().all(|(row, rhs, dir)| match dir {
                Direction::Less => &dot(row) < rhs,
                Direction::Greater => &dot(row) > rhs,
            })
    }
}

/// Outcome of the slack-maximization run.
#[derive(Debug, Clone)]
pub enum Feasibility {
    /// An exact interior point together with its slack.
    Feasible { point: Vec<Rational>, slack: Rational },
    /// The open polyhedron is empty; the optimal slack (<= 0) is
    /// reported, or `None` when even the closed relaxation is empty.
    Infeasible { max_slack: Option<Rational> },
}

impl Feasibility {
    pub fn point(&self) -> Option<&[Rational]> {
        match self {
            Feasibility::Feasible { point, .. } => Some(point),
            Feasibility::Infeasible { .. } => None,
        }
    }
}

/// Decide strict feasibility; a returned point is re-verified against
/// every constraint exactly before it leaves this function.
pub fn strict_feasible(sys: &StrictSystem) -> Feasibility {
    // Variables: x_i split as x_i^+ - x_i^-, then the slack t split the
    // same way (it may be negative at the optimum).
    let n = sys.num_vars;
    let cols = 2 * n + 2;
    let t_plus = 2 * n;
    let t_minus = 2 * n + 1;

    let mut rows: Vec<(Vec<Rational>, Rational, bool)> = Vec::new(); // (row, rhs, is_eq)
    for (row, rhs) in &sys.equalities {
        rows.push((split_row(row, false), rhs.clone(), true));
    }
    for (row, rhs, dir) in &sys.stricts {
        match dir {
            // row·x + t <= rhs
            Direction::Less => rows.push((split_row(row, true), rhs.clone(), false)),
            // -row·x + t <= -rhs
            Direction::Greater => {
                let neg: Vec<Rational> = row.iter().map(|a| -a.clone()).collect();
                rows.push((split_row(&neg, true), -rhs.clone(), false));
            }
        }
    }
    // t <= 1
    let mut trow = vec![Rational::zero(); cols];
    trow[t_plus] = Rational::one();
    trow[t_minus] = -Rational::one();
    rows.push((trow, Rational::one(), false));

    let mut objective = vec![Rational::zero(); cols];
    objective[t_plus] = Rational::one();
    objective[t_minus] = -Rational::one();

    let solution = match simplex_maximize(cols, &rows, &objective) {
        Some(sol) => sol,
        None => return Feasibility::Infeasible { max_slack: None },
    };
    let slack = &solution[t_plus] - &solution[t_minus];
    let point: Vec<Rational> = (0..n)
        .map(|i| &solution[2 * i] - &solution[2 * i + 1])
        .collect();
    if slack.is_positive() {
        assert!(
            sys.satisfied_by(&point),
            "simplex returned a point violating a constraint"
        );
        Feasibility::Feasible { point, slack }
    } else {
        Feasibility::Infeasible {
            max_slack: Some(slack),
        }
    }
}

fn split_row(row: &[Rational], with_t: bool) -> Vec<Rational> {
    let n = row.len();
    let mut out = vec![Rational::zero(); 2 * n + 2];
    for (i, a) in row.iter().enumerate() {
        out[2 * i] = a.clone();
        out[2 * i + 1] = -a.clone();
    }
    if with_t {
        out[2 * n] = Rational::one();
        out[2 * n + 1] = -Rational::one();
    }
    out
}

/// Two-phase dictionary simplex: maximize `objective · y` over `y >= 0`
/// subject to the given rows (`row · y = rhs` when `is_eq`, else
/// `row · y <= rhs`). Returns an optimal `y`, or `None` when infeasible.
/// The t <= 1 cap built by the caller keeps the objective bounded.
fn simplex_maximize(
    cols: usize,
    rows: &[(Vec<Rational>, Rational, bool)],
    objective: &[Rational],
) -> Option<Vec<Rational>> {
    let m = rows.len();
    // Slack variables for inequalities, then one artificial per row.
    let n_slack = rows.iter().filter(|r| !r.2).count();
    let total = cols + n_slack + m;
    let mut a = vec![vec![Rational::zero(); total]; m];
    let mut b = vec![Rational::zero(); m];
    let mut basis = vec![0usize; m];
    let mut slack_idx = 0;
    for (r, (row, rhs, is_eq)) in rows.iter().enumerate() {
        let flip = rhs.is_negative();
        for (c, v) in row.iter().enumerate() {
            a[r][c] = if flip { -v.clone() } else { v.clone() };
        }
        b[r] = if flip { -rhs.clone() } else { rhs.clone() };
        if !is_eq {
            let s = cols + slack_idx;
            slack_idx += 1;
            a[r][s] = if flip { -Rational::one() } else { Rational::one() };
        }
        let art = cols + n_slack + r;
        a[r][art] = Rational::one();
        basis[r] = art;
    }

    // Phase 1: minimize the sum of artificials, i.e. maximize -(sum).
    let mut phase1 = vec![Rational::zero(); total];
    for r in 0..m {
        phase1[cols + n_slack + r] = -Rational::one();
    }
    let opt = run_simplex(&mut a, &mut b, &mut basis, &phase1, total);
    if !opt.is_zero() {
        return None;
    }
    // Drive any artificial still basic at zero out of the basis.
    for r in 0..m {
        if basis[r] >= cols + n_slack {
            if let Some(c) = (0..cols + n_slack).find(|&c| !a[r][c].is_zero()) {
                pivot(&mut a, &mut b, &mut basis, r, c);
            }
            // Otherwise the row is identically zero and harmless.
        }
    }

    // Phase 2: the real objective, with artificial columns frozen.
    let mut phase2 = vec![Rational::zero(); total];
    phase2[..cols].clone_from_slice(objective);
    for row in a.iter_mut() {
        for v in row.iter_mut().skip(cols + n_slack) {
            *v = Rational::zero();
        }
    }
    run_simplex(&mut a, &mut b, &mut basis, &phase2, cols + n_slack);

    let mut solution = vec![Rational::zero(); cols];
    for (r, &bi) in basis.iter().enumerate() {
        if bi < cols {
            solution[bi] = b[r].clone();
        }
    }
    Some(solution)
}

/// Bland-rule simplex on an existing basic feasible dictionary. Returns
/// the objective value at the final dictionary.
fn run_simplex(
    a: &mut [Vec<Rational>],
    b: &mut [Rational],
    basis: &mut [usize],
    objective: &[Rational],
    active_cols: usize,
) -> Rational {
    let m = a.len();
    loop {
        // Reduced costs relative to the current basis; `a` is kept in
        // canonical form, so this is objective minus the basic rows.
        let mut reduced = objective[..active_cols].to_vec();
        for r in 0..m {
            let cb = objective[basis[r]].clone();
            if cb.is_zero() {
                continue;
            }
            for c in 0..active_cols {
                if !a[r][c].is_zero() {
                    let delta = &cb * &a[r][c];
                    reduced[c] -= delta;
                }
            }
        }
        // Bland: smallest index with positive reduced cost.
        let entering =
            (0..active_cols).find(|&c| reduced[c].is_positive() && !basis.contains(&c));
        let Some(entering) = entering else {
            let mut val = Rational::zero();
            for r in 0..m {
                val += &objective[basis[r]] * &b[r];
            }
            return val;
        };
        // Ratio test; Bland tie-break on the smallest basis index.
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..m {
            if a[r][entering].is_positive() {
                let ratio = &b[r] / &a[r][entering];
                match &leave {
                    None => leave = Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < *lratio || (ratio == *lratio && basis[r] < basis[*lr]) {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((leaving, _)) = leave else {
            // Unbounded in the entering direction; with the t <= 1 row
            // present this cannot happen for the systems we build.
            panic!("simplex: unbounded objective");
        };
        pivot(a, b, basis, leaving, entering);
    }
}

fn pivot(a: &mut [Vec<Rational>], b: &mut [Rational], basis: &mut [usize], r: usize, c: usize) {
    let m = a.len();
    let p = a[r][c].clone();
    for v in a[r].iter_mut() {
        *v /= &p;
    }
    b[r] /= &p;
    for i in 0..m {
        if i == r || a[i][c].is_zero() {
            continue;
        }
        let f = a[i][c].clone();
        let row_r = a[r].clone();
        for (v, w) in a[i].iter_mut().zip(&row_r) {
            *v -= &f * w;
        }
        let br = b[r].clone();
        b[i] -= &f * &br;
    }
    basis[r] = c;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(lo: i64, hi: i64) -> StrictSystem {
        let mut sys = StrictSystem::new(1);
        sys.push_strict(vec![Rational::one()], rat(lo, 1), Direction::Greater);
        sys.push_strict(vec![Rational::one()], rat(hi, 1), Direction::Less);
        sys
    }

    #[test]
    fn open_interval() {
        match strict_feasible(&interval(0, 1)) {
            Feasibility::Feasible { point, slack } => {
                assert!(point[0] > Rational::zero() && point[0] < Rational::one());
                assert!(slack.is_positive());
            }
            _ => panic!("expected feasible"),
        }
    }

    #[test]
    fn empty_interval() {
        match strict_feasible(&interval(0, 0)) {
            Feasibility::Infeasible { max_slack } => {
                assert!(!max_slack.unwrap().is_positive());
            }
            _ => panic!("expected infeasible"),
        }
        // {x > 0, x < 0} likewise.
        let mut sys = StrictSystem::new(1);
        sys.push_strict(vec![Rational::one()], Rational::zero(), Direction::Greater);
        sys.push_strict(vec![Rational::one()], Rational::zero(), Direction::Less);
        assert!(strict_feasible(&sys).point().is_none());
    }

    #[test]
    fn no_constraints_defaults_to_slack_one() {
        let sys = StrictSystem::new(2);
        match strict_feasible(&sys) {
            Feasibility::Feasible { slack, .. } => assert_eq!(slack, Rational::one()),
            _ => panic!("unconstrained system must be feasible"),
        }
    }

    #[test]
    fn equality_pins_the_witness() {
        // x + y = 1, x > y  ->  witness on the line with x > 1/2.
        let mut sys = StrictSystem::new(2);
        sys.push_eq(vec![Rational::one(), Rational::one()], Rational::one());
        sys.push_strict(
            vec![Rational::one(), -Rational::one()],
            Rational::zero(),
            Direction::Greater,
        );
        let f = strict_feasible(&sys);
        let p = f.point().expect("feasible");
        assert_eq!(&p[0] + &p[1], Rational::one());
        assert!(p[0] > p[1]);
    }

    #[test]
    fn inconsistent_equalities() {
        let mut sys = StrictSystem::new(1);
        sys.push_eq(vec![Rational::one()], Rational::zero());
        sys.push_eq(vec![Rational::one()], Rational::one());
        match strict_feasible(&sys) {
            Feasibility::Infeasible { max_slack } => assert!(max_slack.is_none()),
            _ => panic!("expected infeasible"),
        }
    }

    #[test]
    fn negative_rhs_rows() {
        // x < -3, x > -5: feasible strictly negative witness.
        let mut sys = StrictSystem::new(1);
        sys.push_strict(vec![Rational::one()], rat(-3, 1), Direction::Less);
        sys.push_strict(vec![Rational::one()], rat(-5, 1), Direction::Greater);
        let f = strict_feasible(&sys);
        let p = f.point().expect("feasible");
        assert!(p[0] < rat(-3, 1) && p[0] > rat(-5, 1));
    }

    /// Fourier-Motzkin elimination for strict systems, the independent
    /// oracle at tiny sizes. Equalities are substituted away first.
    fn fm_feasible(sys: &StrictSystem) -> bool {
        // Normal form: every row means row·x < rhs.
        let mut rows: Vec<(Vec<Rational>, Rational)> = Vec::new();
        for (row, rhs, dir) in &sys.stricts {
            match dir {
                Direction::Less => rows.push((row.clone(), rhs.clone())),
                Direction::Greater => {
                    rows.push((row.iter().map(|a| -a.clone()).collect(), -rhs.clone()))
                }
            }
        }
        // Substitute each equality into the rest by solving for its
        // first nonzero variable.
        let mut eqs = sys.equalities.clone();
        while let Some((erow, erhs)) = eqs.pop() {
            let Some(v) = erow.iter().position(|a| !a.is_zero()) else {
                if erhs.is_zero() {
                    continue;
                }
                return false;
            };
            let pivot = erow[v].clone();
            let sub = |row: &mut Vec<Rational>, rhs: &mut Rational| {
                let coeff = row[v].clone();
                if coeff.is_zero() {
                    return;
                }
                let f = coeff / &pivot;
                for i in 0..row.len() {
                    let d = &f * &erow[i];
                    row[i] -= d;
                }
                let d = &f * &erhs;
                *rhs -= d;
            };
            for (row, rhs) in rows.iter_mut() {
                sub(row, rhs);
            }
            for (row, rhs) in eqs.iter_mut() {
                sub(row, rhs);
            }
        }
        // Eliminate the variables one by one.
        for v in (0..sys.num_vars).rev() {
            let mut lows: Vec<(Vec<Rational>, Rational)> = Vec::new();
            let mut highs: Vec<(Vec<Rational>, Rational)> = Vec::new();
            let mut rest: Vec<(Vec<Rational>, Rational)> = Vec::new();
            for (row, rhs) in rows {
                let c = row[v].clone();
                if c.is_zero() {
                    rest.push((row, rhs));
                } else {
                    let scaled: Vec<Rational> = row.iter().map(|a| a / &c).collect();
                    let srhs = rhs / &c;
                    if c.is_positive() {
                        highs.push((scaled, srhs)); // x_v < srhs - rest
                    } else {
                        lows.push((scaled, srhs)); // x_v > srhs - rest
                    }
                }
            }
            for (lr, lrhs) in &lows {
                for (hr, hrhs) in &highs {
                    // "lower < upper": (hr - lr)·x (without v) ... < hrhs - lrhs
                    let mut row: Vec<Rational> = lr
                        .iter()
                        .zip(hr)
                        .map(|(l, h)| {
                            let d = l - h;
                            -d
                        })
                        .collect();
                    row[v] = Rational::zero();
                    // lrhs - lr·x < hrhs - hr·x  =>  (hr - lr)·x < hrhs - lrhs
                    rest.push((row, hrhs - lrhs));
                }
            }
            rows = rest;
        }
        // Only constant rows remain: 0 < rhs must hold for each.
        rows.iter().all(|(_, rhs)| rhs.is_positive())
    }

    #[test]
    fn fm_agrees_on_handmade_systems() {
        assert!(fm_feasible(&interval(0, 1)));
        assert!(!fm_feasible(&interval(0, 0)));
        let mut sys = StrictSystem::new(2);
        sys.push_eq(vec![Rational::one(), Rational::one()], Rational::one());
        sys.push_strict(
            vec![Rational::one(), -Rational::one()],
            Rational::zero(),
            Direction::Greater,
        );
        assert!(fm_feasible(&sys));
    }

    #[test]
    fn fm_cross_check_random_systems() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut feas = 0;
        for _ in 0..300 {
            let nv = rng.gen_range(1..=3);
            let mut sys = StrictSystem::new(nv);
            for _ in 0..rng.gen_range(1..=5) {
                let row: Vec<Rational> =
                    (0..nv).map(|_| rat(rng.gen_range(-3..=3), 1)).collect();
                let rhs = rat(rng.gen_range(-4..=4), rng.gen_range(1..=3));
                if row.iter().all(|a| a.is_zero()) {
                    continue;
                }
                if rng.gen_bool(0.2) {
                    sys.push_eq(row, rhs);
                } else if rng.gen_bool(0.5) {
                    sys.push_strict(row, rhs, Direction::Less);
                } else {
                    sys.push_strict(row, rhs, Direction::Greater);
                }
            }
            let lp = strict_feasible(&sys);
            let fm = fm_feasible(&sys);
            match &lp {
                Feasibility::Feasible { point, .. } => {
                    assert!(fm, "simplex feasible but FM infeasible: {sys:?}");
                    assert!(sys.satisfied_by(point));
                    feas += 1;
                }
                Feasibility::Infeasible { .. } => {
                    assert!(!fm, "simplex infeasible but FM feasible: {sys:?}");
                }
            }
        }
        // Make sure the sample exercised both outcomes.
        assert!(feas > 20 && feas < 280, "lopsided sample: {feas}");
    }
}
