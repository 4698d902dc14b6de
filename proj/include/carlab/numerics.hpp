#pragma once

#include <functional>

#include "carlab/matrix.hpp"

namespace carlab {

// Norms below this are treated as zero by the normalization routines.
inline constexpr double kNormEpsilon = 1e-12;

double l2_norm(const Vec& v);

double dot(const Vec& a, const Vec& b);

// v / ||v||_2; returns the zero vector when ||v||_2 <= kNormEpsilon.
Vec l2_normalize(const Vec& v);

// Pulls upstream_grad back through v -> v/||v||_2.
// The Jacobian is (I - vhat vhat^T) / ||v||, so the radial component of the
// upstream gradient is annihilated. Degenerate norms yield a zero gradient,
// consistent with the forward policy.
Vec l2_normalize_backward(const Vec& v, const Vec& upstream_grad);

// Central-difference gradient of a scalar function, one coordinate at a time.
// Test oracle for every hand-derived gradient in the lab.
Vec finite_difference_gradient(const std::function<double(const Vec&)>& f, const Vec& at,
                               double step = 1e-5);

}  // namespace carlab
