#pragma once

#include <stdexcept>
#include <vector>

#include "signeq/graph.hpp"
#include "signeq/tensor.hpp"

namespace signeq {

enum class EigSource { adjacency, laplacian, normalized_laplacian, covariance };

// Orthonormal eigenvectors (columns of `vectors`) with ascending eigenvalues.
// `all_distinct` flags whether every adjacent gap clears the relative
// tolerance; degenerate draws get flagged, never silently perturbed.
struct EigBasis {
    TensorPtr vectors; // n x k
    std::vector<double> values;
    bool all_distinct = false;
    EigSource source = EigSource::laplacian;

    static constexpr double distinct_tol = 1e-8;
};

// PCA frame: orthonormal covariance eigenvectors, variances descending.
struct Frame {
    TensorPtr rotation; // k x k, columns ordered by descending variance
    std::vector<double> variances;
};

struct DegenerateCovariance : std::runtime_error {
    DegenerateCovariance() : std::runtime_error("covariance eigenvalues not distinct") {}
};

struct EigNonConvergence : std::runtime_error {
    explicit EigNonConvergence(int iters)
        : std::runtime_error("eigensolver failed to converge after " + std::to_string(iters) +
                             " iterations") {}
};

// Full symmetric eigendecomposition via Householder tridiagonalization and
// implicit-shift QL. Deterministic. Throws on non-symmetric input.
EigBasis sym_eig(const TensorPtr& a, EigSource source = EigSource::covariance);

enum class LaplacianVariant { unnormalized, normalized };

TensorPtr laplacian(const Graph& g, LaplacianVariant variant);

// First k eigenpairs (smallest eigenvalues) of the chosen Laplacian.
// Isolated nodes contribute 0 entries to D^{-1/2} in the normalized variant.
EigBasis laplacian_eigvecs(const Graph& g, std::size_t k, LaplacianVariant variant);

// (X - mean)^T (X - mean), no 1/n scaling.
TensorPtr covariance(const TensorPtr& x);

// Throws DegenerateCovariance when the covariance spectrum has a gap below
// tol * trace. Column signs are arbitrary but deterministic per call.
Frame pca_frame(const TensorPtr& x, double tol = 1e-8);

} // namespace signeq
