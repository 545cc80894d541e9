#include "rope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace clinkd {

void SequenceLayout::validate() const {
    if (prefix_len < 0) fail(Status::InvalidConfig, "layout.prefix_len must be >= 0");
    if (suffix_len < 0) fail(Status::InvalidConfig, "layout.suffix_len must be >= 0");
    if (image_h < 0 || image_w < 0)
        fail(Status::InvalidConfig, "layout.image_h/image_w must be >= 0");
    if (gap < 1) fail(Status::InvalidConfig, "layout.gap must be >= 1");
    if (total_tokens() < 1) fail(Status::InvalidConfig, "layout: empty sequence");
}

void AffineParams::validate() const {
    if (!(alpha1 > 0.0) || !(alpha2 > 0.0))
        fail(Status::InvalidConfig, "affine.alpha1/alpha2 must be > 0");
    if (!std::isfinite(lambda1) || !std::isfinite(lambda2))
        fail(Status::InvalidConfig, "affine.lambda1/lambda2 must be finite");
}

void RopeConfig::validate() const {
    if (d_h < 2 || d_h % 2 != 0) fail(Status::InvalidConfig, "rope.d_h must be even and >= 2");
    if (d_w < 2 || d_w % 2 != 0) fail(Status::InvalidConfig, "rope.d_w must be even and >= 2");
    if (!(base > 0.0)) fail(Status::InvalidConfig, "rope.base must be > 0");
    if (freq_index_origin != 0 && freq_index_origin != 1)
        fail(Status::InvalidConfig, "rope.freq_index_origin must be 0 or 1");
}

AffineParams default_affine(const SequenceLayout& layout) {
    AffineParams a;
    a.lambda1 = a.lambda2 = static_cast<double>(layout.prefix_len - 1 + layout.gap);
    return a;
}

std::vector<PositionIndex2D> build_layout(const SequenceLayout& layout,
                                          const AffineParams& affine) {
    layout.validate();
    affine.validate();

    std::vector<PositionIndex2D> out;
    out.reserve(static_cast<size_t>(layout.total_tokens()));

    for (int64_t p = 0; p < layout.prefix_len; ++p) {
        double t = static_cast<double>(p);
        out.push_back({t, t});
    }

    if (layout.image_tokens() == 0) {
        // Pure text: suffix continues the prefix run with step 1.
        for (int64_t j = 0; j < layout.suffix_len; ++j) {
            double t = static_cast<double>(layout.prefix_len + j);
            out.push_back({t, t});
        }
        return out;
    }

    double max_coord = -std::numeric_limits<double>::infinity();
    for (int64_t r = 0; r < layout.image_h; ++r) {
        for (int64_t c = 0; c < layout.image_w; ++c) {
            double xh = affine.alpha1 * static_cast<double>(r) + affine.lambda1;
            double xw = affine.alpha2 * static_cast<double>(c) + affine.lambda2;
            // On-diagonal integer image index inside the prefix run collides
            // with a text index.
            if (xh == xw && xh == std::floor(xh) && xh >= 0.0 &&
                xh < static_cast<double>(layout.prefix_len)) {
                fail(Status::InvalidConfig,
                     "layout conflict: affine maps image patch onto text index " +
                         std::to_string(static_cast<int64_t>(xh)));
            }
            out.push_back({xh, xw});
            max_coord = std::max(max_coord, std::max(xh, xw));
        }
    }

    double suffix_start = max_coord + static_cast<double>(layout.gap);
    for (int64_t j = 0; j < layout.suffix_len; ++j) {
        double t = suffix_start + static_cast<double>(j);
        out.push_back({t, t});
    }
    return out;
}

std::vector<PositionIndex2D> baseline_layout(const SequenceLayout& layout) {
    SequenceLayout flat = layout;
    flat.gap = 1;
    return build_layout(flat, default_affine(flat));
}

Vec frequency_table(int dim, double base, int index_origin) {
    if (dim < 2 || dim % 2 != 0)
        fail(Status::InvalidConfig, "frequency_table: dim must be even and >= 2");
    if (!(base > 0.0)) fail(Status::InvalidConfig, "frequency_table: base must be > 0");
    if (index_origin != 0 && index_origin != 1)
        fail(Status::InvalidConfig, "frequency_table: index origin must be 0 or 1");

    Vec omega(static_cast<size_t>(dim / 2));
    for (int i = 0; i < dim / 2; ++i) {
        double idx = static_cast<double>(i + index_origin);
        omega[static_cast<size_t>(i)] = std::pow(base, -2.0 * idx / static_cast<double>(dim));
    }
    return omega;
}

namespace {

void rotate_half(std::span<const double> in, std::span<double> out, double x,
                 std::span<const double> omega) {
    for (size_t i = 0; i < omega.size(); ++i) {
        double theta = x * omega[i];
        double c = std::cos(theta), s = std::sin(theta);
        double a = in[2 * i], b = in[2 * i + 1];
        out[2 * i] = a * c - b * s;
        out[2 * i + 1] = a * s + b * c;
    }
}

}  // namespace

Vec rotate(std::span<const double> q, const PositionIndex2D& pos, const RopeConfig& cfg) {
    cfg.validate();
    if (q.size() != static_cast<size_t>(cfg.head_dim()))
        fail(Status::InvalidInput, "rotate: vector length does not match d_h + d_w");
    require_finite(q, "rotate");

    Vec omega_h = frequency_table(cfg.d_h, cfg.base, cfg.freq_index_origin);
    Vec omega_w = frequency_table(cfg.d_w, cfg.base, cfg.freq_index_origin);

    Vec out(q.size());
    rotate_half(q.subspan(0, static_cast<size_t>(cfg.d_h)),
                std::span<double>(out).subspan(0, static_cast<size_t>(cfg.d_h)), pos.x_h,
                omega_h);
    rotate_half(q.subspan(static_cast<size_t>(cfg.d_h)),
                std::span<double>(out).subspan(static_cast<size_t>(cfg.d_h)), pos.x_w,
                omega_w);
    return out;
}

Vec rope2d_baseline(std::span<const double> q, const PositionIndex2D& pos,
                    const RopeConfig& cfg) {
    return rotate(q, pos, cfg);
}

RotationPlan::RotationPlan(const std::vector<PositionIndex2D>& positions, const RopeConfig& cfg)
    : cfg_(cfg) {
    cfg.validate();
    Vec omega_h = frequency_table(cfg.d_h, cfg.base, cfg.freq_index_origin);
    Vec omega_w = frequency_table(cfg.d_w, cfg.base, cfg.freq_index_origin);
    size_t half = omega_h.size() + omega_w.size();

    sin_.reserve(positions.size());
    cos_.reserve(positions.size());
    for (const auto& pos : positions) {
        Vec s(half), c(half);
        for (size_t i = 0; i < omega_h.size(); ++i) {
            double theta = pos.x_h * omega_h[i];
            s[i] = std::sin(theta);
            c[i] = std::cos(theta);
        }
        for (size_t i = 0; i < omega_w.size(); ++i) {
            double theta = pos.x_w * omega_w[i];
            s[omega_h.size() + i] = std::sin(theta);
            c[omega_h.size() + i] = std::cos(theta);
        }
        sin_.push_back(std::move(s));
        cos_.push_back(std::move(c));
    }
}

Vec RotationPlan::apply(size_t token, std::span<const double> v) const {
    if (token >= sin_.size()) fail(Status::InvalidInput, "rotation plan: token out of range");
    if (v.size() != static_cast<size_t>(cfg_.head_dim()))
        fail(Status::InvalidInput, "rotation plan: vector length does not match d_h + d_w");
    const Vec& s = sin_[token];
    const Vec& c = cos_[token];
    Vec out(v.size());
    for (size_t i = 0; i < s.size(); ++i) {
        double a = v[2 * i], b = v[2 * i + 1];
        out[2 * i] = a * c[i] - b * s[i];
        out[2 * i + 1] = a * s[i] + b * c[i];
    }
    return out;
}

}  // namespace clinkd
