use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Index of a scalar coordinate of a program: one entry (upper triangle) of
/// a PSD block, or one scalar variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConstraintId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarSign {
    Free,
    Nonneg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarKind {
    /// Entry `(row, col)`, `row <= col`, of a real symmetric PSD block.
    Entry { block: usize, row: usize, col: usize },
    Scalar { index: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsdBlock {
    pub label: String,
    pub dim: usize,
    first_var: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalarVar {
    pub label: String,
    pub sign: ScalarSign,
    pub var: VarId,
}

/// Sparse affine functional `Σ coeff·x_var + constant`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LinExpr<T: Real> {
    pub terms: Vec<(VarId, T)>,
    pub constant: T,
}

impl<T: Real> LinExpr<T> {
    pub fn zero() -> Self {
        Self { terms: Vec::new(), constant: T::zero() }
    }

    pub fn constant(c: T) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn var(v: VarId) -> Self {
        Self { terms: vec![(v, T::one())], constant: T::zero() }
    }

    pub fn term(v: VarId, coeff: T) -> Self {
        Self { terms: vec![(v, coeff)], constant: T::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant == T::zero()
    }

    pub fn add_term(&mut self, v: VarId, coeff: T) {
        self.terms.push((v, coeff));
    }

    /// `self += s·other`.
    pub fn add_scaled(&mut self, other: &Self, s: T) {
        if s == T::zero() {
            return;
        }
        self.terms.extend(other.terms.iter().map(|&(v, a)| (v, a * s)));
        self.constant += other.constant * s;
    }

    pub fn scale(&mut self, s: T) {
        for t in &mut self.terms {
            t.1 *= s;
        }
        self.constant *= s;
    }

    /// Sorts terms, merges duplicates and drops exact zeros.
    pub fn compact(&mut self) {
        if self.terms.len() < 2 {
            self.terms.retain(|t| t.1 != T::zero());
            return;
        }
        self.terms.sort_by_key(|t| t.0);
        let mut out: Vec<(VarId, T)> = Vec::with_capacity(self.terms.len());
        for &(v, a) in &self.terms {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += a,
                _ => out.push((v, a)),
            }
        }
        out.retain(|t| t.1 != T::zero());
        self.terms = out;
    }

    pub fn compacted(mut self) -> Self {
        self.compact();
        self
    }

    pub fn evaluate(&self, values: &[T]) -> T {
        self.terms.iter().fold(self.constant, |acc, &(v, a)| acc + a * values[v.0])
    }
}

impl<T: Real> Add for LinExpr<T> {
    type Output = LinExpr<T>;
    fn add(mut self, rhs: Self) -> Self {
        self.add_scaled(&rhs, T::one());
        self
    }
}

impl<T: Real> Sub for LinExpr<T> {
    type Output = LinExpr<T>;
    fn sub(mut self, rhs: Self) -> Self {
        self.add_scaled(&rhs, -T::one());
        self
    }
}

impl<T: Real> Mul<T> for LinExpr<T> {
    type Output = LinExpr<T>;
    fn mul(mut self, rhs: T) -> Self {
        self.scale(rhs);
        self
    }
}

impl<T: Real> Neg for LinExpr<T> {
    type Output = LinExpr<T>;
    fn neg(mut self) -> Self {
        self.scale(-T::one());
        self
    }
}

/// `terms · x = rhs`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Constraint<T: Real> {
    pub terms: Vec<(VarId, T)>,
    pub rhs: T,
}

/// Linear objective over PSD blocks and scalar variables subject to linear
/// equality constraints.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConicProgram<T: Real> {
    pub(crate) blocks: Vec<PsdBlock>,
    pub(crate) scalars: Vec<ScalarVar>,
    pub(crate) vars: Vec<VarKind>,
    pub(crate) constraints: Vec<Constraint<T>>,
    pub(crate) objective: LinExpr<T>,
    pub(crate) sense: Sense,
}

impl<T: Real> Default for ConicProgram<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> ConicProgram<T> {
    pub fn new() -> Self {
        Self {
            blocks: Vec::new(),
            scalars: Vec::new(),
            vars: Vec::new(),
            constraints: Vec::new(),
            objective: LinExpr::zero(),
            sense: Sense::Minimize,
        }
    }

    /// Declares a real symmetric PSD block of size `dim`.
    pub fn add_psd_block(&mut self, label: impl Into<String>, dim: usize) -> BlockId {
        assert!(dim >= 1, "PSD blocks need dimension >= 1");
        let id = self.blocks.len();
        let first_var = self.vars.len();
        for row in 0..dim {
            for col in row..dim {
                self.vars.push(VarKind::Entry { block: id, row, col });
            }
        }
        self.blocks.push(PsdBlock { label: label.into(), dim, first_var });
        BlockId(id)
    }

    pub fn add_scalar(&mut self, label: impl Into<String>, sign: ScalarSign) -> VarId {
        let var = VarId(self.vars.len());
        self.vars.push(VarKind::Scalar { index: self.scalars.len() });
        self.scalars.push(ScalarVar { label: label.into(), sign, var });
        var
    }

    /// Coordinate of entry `(i, j)` of a block; symmetric in `i, j`.
    pub fn entry(&self, block: BlockId, i: usize, j: usize) -> VarId {
        let b = &self.blocks[block.0];
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        assert!(c < b.dim, "entry ({i},{j}) outside block of size {}", b.dim);
        // Upper-triangular row-major offset.
        let offset = r * b.dim - r * (r + 1) / 2 + c;
        VarId(b.first_var + offset)
    }

    /// Adds `expr = rhs` (the constant of `expr` is moved to the right-hand
    /// side).
    pub fn add_constraint(&mut self, expr: LinExpr<T>, rhs: T) -> ConstraintId {
        let e = expr.compacted();
        let id = ConstraintId(self.constraints.len());
        self.constraints.push(Constraint { rhs: rhs - e.constant, terms: e.terms });
        id
    }

    pub fn set_objective(&mut self, expr: LinExpr<T>, sense: Sense) {
        self.objective = expr.compacted();
        self.sense = sense;
    }

    pub fn blocks(&self) -> &[PsdBlock] {
        &self.blocks
    }

    pub fn block_dim(&self, block: BlockId) -> usize {
        self.blocks[block.0].dim
    }

    pub fn scalars(&self) -> &[ScalarVar] {
        &self.scalars
    }

    pub fn vars(&self) -> &[VarKind] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    pub fn objective(&self) -> &LinExpr<T> {
        &self.objective
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Every functional references declared variables and every block has a
    /// positive dimension.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.vars.len();
        let bad = |terms: &[(VarId, T)]| terms.iter().any(|(v, _)| v.0 >= n);
        if self.constraints.iter().any(|c| bad(&c.terms)) || bad(&self.objective.terms) {
            return Err("functional references an undeclared variable".into());
        }
        if self.blocks.iter().any(|b| b.dim == 0) {
            return Err("PSD block of dimension 0".into());
        }
        let finite = |x: T| x.as_f64().is_finite();
        if self.constraints.iter().any(|c| !finite(c.rhs) || c.terms.iter().any(|t| !finite(t.1))) {
            return Err("non-finite constraint data".into());
        }
        Ok(())
    }

    /// JSON dump for cross-checking against other solvers.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("program serializes")
    }
}
