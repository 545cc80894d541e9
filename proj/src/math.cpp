#include "math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace clinkd {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void require_finite(std::span<const double> v, const char* what) {
    if (!all_finite(v)) fail(Status::InvalidInput, std::string(what) + ": non-finite entry");
}

ProbDist ProbDist::checked(Vec p) {
    if (p.empty()) fail(Status::InvalidInput, "distribution: empty");
    double sum = 0.0;
    for (double x : p) {
        if (!(x >= 0.0 && x <= 1.0))
            fail(Status::InvalidInput, "distribution: entry outside [0,1]");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        fail(Status::InvalidInput, "distribution: entries do not sum to 1");
    return ProbDist{std::move(p)};
}

ProbDist softmax(std::span<const double> logits, double temperature) {
    if (logits.empty()) fail(Status::InvalidInput, "softmax: empty input");
    require_finite(logits, "softmax");
    if (!(temperature > 0.0)) fail(Status::InvalidConfig, "softmax: temperature must be > 0");

    double m = *std::max_element(logits.begin(), logits.end());
    Vec out(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp((logits[i] - m) / temperature);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return ProbDist{std::move(out)};
}

Vec log_softmax(std::span<const double> logits, double temperature) {
    if (logits.empty()) fail(Status::InvalidInput, "log_softmax: empty input");
    require_finite(logits, "log_softmax");
    if (!(temperature > 0.0)) fail(Status::InvalidConfig, "log_softmax: temperature must be > 0");

    double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp((z - m) / temperature);
    double log_z = std::log(sum);
    Vec out(logits.size());
    for (size_t i = 0; i < logits.size(); ++i)
        out[i] = (logits[i] - m) / temperature - log_z;
    return out;
}

double kl_divergence(const ProbDist& p, const ProbDist& q) {
    if (p.size() != q.size()) fail(Status::InvalidInput, "kl_divergence: length mismatch");
    double kl = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;  // 0 * ln 0 = 0
        if (q[i] == 0.0)
            fail(Status::Numeric, "kl_divergence: undefined (p_i > 0 with q_i = 0)");
        kl += p[i] * std::log(p[i] / q[i]);
    }
    // Rounding can nudge the sum a hair below zero for p ~ q.
    if (kl < 0.0 && kl > -1e-9) kl = 0.0;
    if (kl < 0.0) fail(Status::Numeric, "kl_divergence: negative result (inputs not distributions?)");
    return kl;
}

double kl_between_logits(std::span<const double> teacher_logits,
                         std::span<const double> student_logits,
                         double temperature) {
    if (teacher_logits.size() != student_logits.size())
        fail(Status::InvalidInput, "kl_between_logits: length mismatch");
    ProbDist p = softmax(teacher_logits, temperature);
    Vec lp = log_softmax(teacher_logits, temperature);
    Vec lq = log_softmax(student_logits, temperature);
    double kl = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        kl += p[i] * (lp[i] - lq[i]);
    }
    return std::max(kl, 0.0);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> v) {
    return std::sqrt(dot(v, v));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail(Status::InvalidInput, "cosine_similarity: length mismatch");
    if (a.empty()) fail(Status::InvalidInput, "cosine_similarity: empty input");
    double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0)
        fail(Status::InvalidInput, "cosine_similarity: zero-norm input");
    return dot(a, b) / (na * nb);
}

Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
    if (!(h > 0.0)) fail(Status::InvalidConfig, "finite_diff_grad: step must be > 0");
    Vec grad(x.size());
    Vec probe = x;
    for (size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        double fp = f(probe);
        probe[i] = x[i] - h;
        double fm = f(probe);
        probe[i] = x[i];
        if (!std::isfinite(fp) || !std::isfinite(fm))
            fail(Status::Numeric, "finite_diff_grad: non-finite function evaluation");
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

}  // namespace clinkd
