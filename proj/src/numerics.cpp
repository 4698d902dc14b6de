#include "carlab/numerics.hpp"

#include <cmath>

#include "carlab/errors.hpp"

namespace carlab {

double l2_norm(const Vec& v) {
    double ss = 0.0;
    for (double x : v) ss += x * x;
    return std::sqrt(ss);
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vec l2_normalize(const Vec& v) {
    if (v.empty()) throw ShapeError("l2_normalize: empty vector");
    double norm = l2_norm(v);
    if (norm <= kNormEpsilon) return Vec(v.size(), 0.0);
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / norm;
    return out;
}

Vec l2_normalize_backward(const Vec& v, const Vec& upstream_grad) {
    if (v.size() != upstream_grad.size()) throw ShapeError("l2_normalize_backward: length mismatch");
    double norm = l2_norm(v);
    if (norm <= kNormEpsilon) return Vec(v.size(), 0.0);
    // J^T g = (g - vhat (vhat . g)) / ||v||
    double radial = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) radial += (v[i] / norm) * upstream_grad[i];
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (upstream_grad[i] - (v[i] / norm) * radial) / norm;
    return out;
}

Vec finite_difference_gradient(const std::function<double(const Vec&)>& f, const Vec& at,
                               double step) {
    if (step <= 0.0) throw ValueError("finite_difference_gradient: step must be positive");
    Vec grad(at.size());
    Vec x = at;
    for (std::size_t i = 0; i < at.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + step;
        const double plus = f(x);
        x[i] = orig - step;
        const double minus = f(x);
        x[i] = orig;
        grad[i] = (plus - minus) / (2.0 * step);
    }
    return grad;
}

}  // namespace carlab
