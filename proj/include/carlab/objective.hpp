#pragma once

#include <set>
#include <vector>

#include "carlab/geometry.hpp"
#include "carlab/matrix.hpp"
#include "carlab/model.hpp"

namespace carlab {

struct LossBreakdown {
    double ce = 0.0;
    double icf = 0.0;
    double total = 0.0;
    double lambda = 0.0;
};

// total = ce + lambda * icf, computed as exactly that expression.
LossBreakdown compose_loss(double ce, double icf, double lambda);

struct CrossEntropyResult {
    double loss = 0.0;
    Matrix dlogits;
};

// Mean negative log-likelihood with the softmax restricted to the active
// classes; inactive logits act as -inf and receive zero gradient. Stabilized
// by max subtraction. Labels outside the active set are an error.
CrossEntropyResult cross_entropy(const Matrix& logits, const std::vector<int>& labels,
                                 const std::set<int>& active_classes);

struct TotalLossResult {
    LossBreakdown breakdown;
    Matrix dlogits;
    Matrix dfeatures;
};

// Cross-entropy over the whole batch plus the mean separation penalty over
// the first icf_row_count rows (the rows designated for the feature-space
// term; pass cache rows to apply it everywhere). With an empty store or
// lambda = 0 the result reduces exactly to cross-entropy.
TotalLossResult total_loss(const ForwardCache& cache, const std::vector<int>& labels,
                           const CentroidStore& store, double lambda,
                           const std::set<int>& active_classes,
                           std::size_t icf_row_count = static_cast<std::size_t>(-1));

}  // namespace carlab
