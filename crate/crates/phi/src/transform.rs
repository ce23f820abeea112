//! Operator transforms Φ and the isometric embeddings they induce between
//! expanding spaces.
//!
//! Three kinds are provided: a scalar spectral map applied through the
//! functional calculus (dimension-preserving), the identity-adjoining
//! direct-sum expansion `A ↦ A ⊕ I` (dimension-doubling), and composites of
//! the two applied in list order.

use crate::maps::SpectralMap;
use crate::mat::Mat;
use crate::operator::HermitianOperator;
use crate::spectral::{eig_decompose, SpectralError};
use thiserror::Error;

/// Tolerance for the idempotent-preservation gate at construction.
pub const AXIOM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum PhiError {
    #[error(
        "map `{name}` violates the idempotent-preservation axiom: f(0) = {f_at_zero}, f(1) = {f_at_one} (need 0 and 1)"
    )]
    AxiomViolation {
        name: String,
        f_at_zero: f64,
        f_at_one: f64,
    },
    #[error("composite transform must have at least one constituent")]
    EmptyComposite,
    #[error("expansion to dimension {attempted} exceeds the space budget {budget}")]
    DimensionOverflow { attempted: usize, budget: usize },
    #[error("isometry defect {defect:e} exceeds tolerance")]
    NotIsometry { defect: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EmbeddingKind {
    Identity,
    /// Inclusion of the leading `from_dim` coordinates.
    LeadingInclusion,
    General,
}

/// An isometric embedding between stage spaces: a `to_dim × from_dim`
/// matrix with orthonormal columns.
#[derive(Debug, Clone)]
pub struct Embedding {
    from_dim: usize,
    to_dim: usize,
    isometry: Mat,
    kind: EmbeddingKind,
}

impl Embedding {
    pub fn identity(dim: usize) -> Self {
        Embedding {
            from_dim: dim,
            to_dim: dim,
            isometry: Mat::identity(dim),
            kind: EmbeddingKind::Identity,
        }
    }

    /// Inclusion of the first `from_dim` coordinates into `to_dim`.
    pub fn leading_inclusion(from_dim: usize, to_dim: usize) -> Self {
        assert!(from_dim <= to_dim);
        let mut m = Mat::zeros(to_dim, from_dim);
        for i in 0..from_dim {
            m.set(i, i, 1.0);
        }
        Embedding {
            from_dim,
            to_dim,
            isometry: m,
            kind: EmbeddingKind::LeadingInclusion,
        }
    }

    /// Validates that the columns are orthonormal within `tol`.
    pub fn from_isometry(isometry: Mat, tol: f64) -> Result<Self, PhiError> {
        let from_dim = isometry.cols();
        let to_dim = isometry.rows();
        assert!(from_dim <= to_dim, "embedding cannot shrink the space");
        let gram = isometry.transpose().matmul(&isometry);
        let defect = gram.sub(&Mat::identity(from_dim)).max_abs();
        if defect > tol {
            return Err(PhiError::NotIsometry { defect });
        }
        Ok(Embedding {
            from_dim,
            to_dim,
            isometry,
            kind: EmbeddingKind::General,
        })
    }

    pub fn from_dim(&self) -> usize {
        self.from_dim
    }

    pub fn to_dim(&self) -> usize {
        self.to_dim
    }

    pub fn isometry(&self) -> &Mat {
        &self.isometry
    }

    /// `‖VᵀV − I‖_max`, for invariant checks.
    pub fn isometry_defect(&self) -> f64 {
        let gram = self.isometry.transpose().matmul(&self.isometry);
        gram.sub(&Mat::identity(self.from_dim)).max_abs()
    }

    /// Composition `next ∘ self` (apply `self` first).
    pub fn then(&self, next: &Embedding) -> Embedding {
        assert_eq!(self.to_dim, next.from_dim, "embedding composition mismatch");
        match (self.kind, next.kind) {
            (EmbeddingKind::Identity, _) => next.clone(),
            (_, EmbeddingKind::Identity) => self.clone(),
            (EmbeddingKind::LeadingInclusion, EmbeddingKind::LeadingInclusion) => {
                Embedding::leading_inclusion(self.from_dim, next.to_dim)
            }
            _ => Embedding {
                from_dim: self.from_dim,
                to_dim: next.to_dim,
                isometry: next.isometry.matmul(&self.isometry),
                kind: EmbeddingKind::General,
            },
        }
    }

    /// Extend an operator on the source space to the target space by zero
    /// on the orthogonal complement: `V A Vᵀ`.
    pub fn extend_operator(&self, a: &HermitianOperator) -> HermitianOperator {
        assert_eq!(a.dim(), self.from_dim);
        match self.kind {
            EmbeddingKind::Identity => a.clone(),
            EmbeddingKind::LeadingInclusion => {
                let pad = self.to_dim - self.from_dim;
                HermitianOperator::from_symmetric_mat(
                    a.mat().direct_sum(&Mat::zeros(pad, pad)),
                    a.sym_tol(),
                )
            }
            EmbeddingKind::General => {
                let va = self.isometry.matmul(a.mat());
                let vavt = va.matmul(&self.isometry.transpose());
                // Symmetrize drift from the two products.
                let mut m = Mat::zeros(self.to_dim, self.to_dim);
                for i in 0..self.to_dim {
                    for j in i..self.to_dim {
                        let v = 0.5 * (vavt.get(i, j) + vavt.get(j, i));
                        m.set(i, j, v);
                        m.set(j, i, v);
                    }
                }
                HermitianOperator::from_symmetric_mat(m, a.sym_tol())
            }
        }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        self.isometry.matvec(x)
    }
}

#[derive(Debug, Clone)]
pub enum TransformKind {
    /// Apply a scalar map through the functional calculus.
    ScalarMap(SpectralMap),
    /// `A ↦ A ⊕ I_dim` on the doubled space.
    DirectSumIdentity,
    /// Apply constituents in list order, composing embeddings.
    Composite(Vec<PhiTransform>),
}

/// A Φ rule together with a human-readable label.
#[derive(Debug, Clone)]
pub struct PhiTransform {
    kind: TransformKind,
    label: String,
}

impl PhiTransform {
    /// Scalar-map transform, gated on the idempotent-preservation axiom:
    /// the calculus fixes every orthogonal projection iff f(0) = 0 and
    /// f(1) = 1, so maps failing that probe are rejected.
    pub fn scalar(map: SpectralMap) -> Result<Self, PhiError> {
        let f0 = if map.domain().contains(0.0) {
            map.eval(0.0)
        } else {
            f64::NAN
        };
        let f1 = if map.domain().contains(1.0) {
            map.eval(1.0)
        } else {
            f64::NAN
        };
        // NaN probes (domain misses) must fail the gate too.
        let zero_ok = f0.abs() <= AXIOM_TOL;
        let one_ok = (f1 - 1.0).abs() <= AXIOM_TOL;
        if !zero_ok || !one_ok {
            return Err(PhiError::AxiomViolation {
                name: map.name().to_string(),
                f_at_zero: f0,
                f_at_one: f1,
            });
        }
        Ok(Self::scalar_unchecked(map))
    }

    /// Scalar-map transform without the axiom gate, for studying maps
    /// outside the monotone class (their runs carry no fixed-point
    /// guarantees on projections).
    pub fn scalar_unchecked(map: SpectralMap) -> Self {
        let label = map.name().to_string();
        PhiTransform {
            kind: TransformKind::ScalarMap(map),
            label,
        }
    }

    pub fn direct_sum_identity() -> Self {
        PhiTransform {
            kind: TransformKind::DirectSumIdentity,
            label: "direct_sum_identity".to_string(),
        }
    }

    pub fn composite(parts: Vec<PhiTransform>) -> Result<Self, PhiError> {
        if parts.is_empty() {
            return Err(PhiError::EmptyComposite);
        }
        let label = format!(
            "composite[{}]",
            parts
                .iter()
                .map(|p| p.label.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        );
        Ok(PhiTransform {
            kind: TransformKind::Composite(parts),
            label,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &TransformKind {
        &self.kind
    }

    pub fn is_dimension_preserving(&self) -> bool {
        match &self.kind {
            TransformKind::ScalarMap(_) => true,
            TransformKind::DirectSumIdentity => false,
            TransformKind::Composite(parts) => parts.iter().all(|p| p.is_dimension_preserving()),
        }
    }

    /// The scalar map, for pure scalar transforms only.
    pub fn scalar_map(&self) -> Option<&SpectralMap> {
        match &self.kind {
            TransformKind::ScalarMap(m) => Some(m),
            _ => None,
        }
    }

    /// Tightest escape bound among contained scalar maps, if any.
    pub fn escape_bound(&self) -> Option<f64> {
        match &self.kind {
            TransformKind::ScalarMap(m) => Some(m.escape_bound()),
            TransformKind::DirectSumIdentity => None,
            TransformKind::Composite(parts) => parts
                .iter()
                .filter_map(|p| p.escape_bound())
                .min_by(f64::total_cmp),
        }
    }

    /// One successor step: Φ(A) together with the embedding of A's space
    /// into the (possibly expanded) target space.
    pub fn apply(
        &self,
        a: &HermitianOperator,
        space_budget: usize,
    ) -> Result<(HermitianOperator, Embedding), PhiError> {
        match &self.kind {
            TransformKind::ScalarMap(map) => {
                let d = eig_decompose(a, 0.0)?;
                let out = d.apply_calculus(map)?;
                Ok((out, Embedding::identity(a.dim())))
            }
            TransformKind::DirectSumIdentity => {
                let to_dim = 2 * a.dim();
                if to_dim > space_budget {
                    return Err(PhiError::DimensionOverflow {
                        attempted: to_dim,
                        budget: space_budget,
                    });
                }
                Ok((
                    a.direct_sum_identity(a.dim()),
                    Embedding::leading_inclusion(a.dim(), to_dim),
                ))
            }
            TransformKind::Composite(parts) => {
                let mut cur = a.clone();
                let mut emb = Embedding::identity(a.dim());
                for part in parts {
                    let (next, e) = part.apply(&cur, space_budget)?;
                    emb = emb.then(&e);
                    cur = next;
                }
                Ok((cur, emb))
            }
        }
    }

    pub fn apply_unbounded(
        &self,
        a: &HermitianOperator,
    ) -> Result<(HermitianOperator, Embedding), PhiError> {
        self.apply(a, usize::MAX)
    }
}
