#include "carlab/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "carlab/errors.hpp"

namespace carlab {

LossBreakdown compose_loss(double ce, double icf, double lambda) {
    return {ce, icf, ce + lambda * icf, lambda};
}

CrossEntropyResult cross_entropy(const Matrix& logits, const std::vector<int>& labels,
                                 const std::set<int>& active_classes) {
    if (labels.size() != logits.rows) throw ShapeError("cross_entropy: one label per row required");
    if (active_classes.empty()) throw ValueError("cross_entropy: empty class mask");
    for (int c : active_classes)
        if (c < 0 || static_cast<std::size_t>(c) >= logits.cols)
            throw ValueError("cross_entropy: active class " + std::to_string(c) + " outside logits");
    for (int label : labels)
        if (!active_classes.count(label))
            throw ValueError("cross_entropy: label " + std::to_string(label) + " not in active classes");

    const double batch = static_cast<double>(logits.rows);
    CrossEntropyResult result;
    result.dlogits = Matrix(logits.rows, logits.cols);
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        double max_logit = -std::numeric_limits<double>::infinity();
        for (int c : active_classes) max_logit = std::max(max_logit, logits(i, static_cast<std::size_t>(c)));
        double denom = 0.0;
        for (int c : active_classes) denom += std::exp(logits(i, static_cast<std::size_t>(c)) - max_logit);
        const double log_denom = std::log(denom);
        const std::size_t label = static_cast<std::size_t>(labels[i]);
        loss_sum += log_denom - (logits(i, label) - max_logit);
        for (int c : active_classes) {
            const std::size_t col = static_cast<std::size_t>(c);
            const double p = std::exp(logits(i, col) - max_logit) / denom;
            result.dlogits(i, col) = (p - (col == label ? 1.0 : 0.0)) / batch;
        }
    }
    result.loss = loss_sum / batch;
    return result;
}

TotalLossResult total_loss(const ForwardCache& cache, const std::vector<int>& labels,
                           const CentroidStore& store, double lambda,
                           const std::set<int>& active_classes, std::size_t icf_row_count) {
    if (lambda < 0.0) throw ValueError("total_loss: lambda must be nonnegative");
    const std::size_t n_icf_rows = std::min(icf_row_count, cache.features.rows);

    TotalLossResult result;
    auto ce = cross_entropy(cache.logits, labels, active_classes);
    result.dlogits = std::move(ce.dlogits);
    result.dfeatures = Matrix(cache.features.rows, cache.features.cols);

    double icf = 0.0;
    if (!store.empty() && n_icf_rows > 0) {
        const double count = static_cast<double>(n_icf_rows);
        for (std::size_t i = 0; i < n_icf_rows; ++i) {
            IcfResult row = icf_loss(cache.features.row_copy(i), store);
            icf += row.loss / count;
            for (std::size_t j = 0; j < cache.features.cols; ++j)
                result.dfeatures(i, j) = lambda * row.dloss_dz[j] / count;
        }
    }
    result.breakdown = compose_loss(ce.loss, icf, lambda);
    return result;
}

}  // namespace carlab
