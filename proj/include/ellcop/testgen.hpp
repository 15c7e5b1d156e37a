#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "ellcop/copula.hpp"

namespace ellcop {

// One synthetic experiment case: a random correlation matrix of the given
// dimension and a pseudo-sample drawn from the copula it defines. nu empty
// means a Gaussian copula, otherwise a Student t with that degrees-of-freedom.
struct CaseSpec {
    int dim = 2;
    std::optional<double> nu;
    int n_obs = 100;
    std::uint64_t seed = 0;

    CopulaModel model() const {
        return nu ? CopulaModel::student_t(Dof(*nu)) : CopulaModel::gaussian();
    }
};

// Random correlation matrix with a prescribed uniform spectrum: eigenvalues
// drawn iid Uniform(0,1), rescaled to sum to dim, conjugated by a Haar
// orthogonal matrix, then diagonal-balanced to exact unit diagonal by Givens
// rotations (which preserve the spectrum). Deterministic given the seed.
CorrelationMatrix random_correlation(int dim, std::uint64_t rng_seed);

std::pair<CorrelationMatrix, PseudoSample> generate_case(const CaseSpec& spec);

}  // namespace ellcop
