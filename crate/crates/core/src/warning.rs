use std::fmt;

/// Non-fatal conditions reported alongside a result.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Components whose distribution is indistinguishable from Gaussian; ICA
    /// can only recover them up to a rotation.
    GaussianComponents { count: usize },
    NotConverged { iterations: usize },
    /// A normal-equation system was ill-conditioned and solved through the
    /// pseudo-inverse.
    RegularizedSolve,
    /// Two columns of one CP factor are nearly parallel (degenerate solution).
    CollinearFactors { congruence: f64 },
    /// A square stage-two mixing matrix was singular.
    RankDeficientRefinement { mode: usize },
    DroppedFeatures { count: usize },
    ReducedComponents { requested: usize, achieved: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::GaussianComponents { count } => {
                write!(f, "gaussian-components count={count}")
            }
            Warning::NotConverged { iterations } => {
                write!(f, "not-converged iterations={iterations}")
            }
            Warning::RegularizedSolve => write!(f, "regularized-solve"),
            Warning::CollinearFactors { congruence } => {
                write!(f, "collinear-factors congruence={congruence}")
            }
            Warning::RankDeficientRefinement { mode } => {
                write!(f, "rank-deficient-refinement mode={mode}")
            }
            Warning::DroppedFeatures { count } => write!(f, "dropped-features count={count}"),
            Warning::ReducedComponents {
                requested,
                achieved,
            } => write!(
                f,
                "reduced-components requested={requested} achieved={achieved}"
            ),
        }
    }
}
