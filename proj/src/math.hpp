#ifndef CLINKD_MATH_HPP
#define CLINKD_MATH_HPP

#include <functional>
#include <span>
#include <vector>

#include "error.hpp"

namespace clinkd {

using Vec = std::vector<double>;

// Minimal row-major dense matrix. Everything in this library is 64-bit:
// gradient checks at h=1e-5 are meaningless in single precision.
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(size_t i, size_t j) { return data[i * cols + j]; }
    double at(size_t i, size_t j) const { return data[i * cols + j]; }
    std::span<double> row(size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(size_t i) const { return {data.data() + i * cols, cols}; }
};

// A probability distribution: entries in [0,1] summing to 1 within 1e-12.
struct ProbDist {
    Vec probs;

    static ProbDist checked(Vec p);
    size_t size() const { return probs.size(); }
    double operator[](size_t i) const { return probs[i]; }
};

bool all_finite(std::span<const double> v);
void require_finite(std::span<const double> v, const char* what);

// softmax(z/T) with max-subtraction for stability. temperature must be > 0.
ProbDist softmax(std::span<const double> logits, double temperature = 1.0);

// log softmax(z/T), same stabilization; used for log-domain KL.
Vec log_softmax(std::span<const double> logits, double temperature = 1.0);

// KL(p || q) in nats, 0*ln 0 = 0. Undefined (Numeric error) when p_i > 0
// with q_i = 0.
double kl_divergence(const ProbDist& p, const ProbDist& q);

// KL(softmax(zt/T) || softmax(zs/T)) computed from log-softmax differences;
// avoids the cancellation that plagues near-identical distributions.
double kl_between_logits(std::span<const double> teacher_logits,
                         std::span<const double> student_logits,
                         double temperature);

// <a,b> / (|a||b|). Zero-norm input is an error.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

// Central finite differences (f(x+h e_i) - f(x-h e_i)) / 2h per coordinate.
// The verification oracle for every analytic gradient in this library.
Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double h);

}  // namespace clinkd

#endif
