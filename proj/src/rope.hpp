#ifndef CLINKD_ROPE_HPP
#define CLINKD_ROPE_HPP

#include <cstdint>
#include <vector>

#include "math.hpp"

namespace clinkd {

// Ordered text-image-text token structure. h*w == 0 denotes a pure-text
// sequence (no image block).
struct SequenceLayout {
    int64_t prefix_len = 0;   // leading text tokens
    int64_t image_h = 0;      // patch-grid rows
    int64_t image_w = 0;      // patch-grid cols
    int64_t suffix_len = 0;   // trailing text tokens
    int64_t gap = 2;          // inter-modal index gap g (intra-text step is fixed 1)

    int64_t image_tokens() const { return image_h * image_w; }
    int64_t total_tokens() const { return prefix_len + image_tokens() + suffix_len; }
    void validate() const;
};

// Affine transform applied to raw image patch indices (row, col).
struct AffineParams {
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;

    void validate() const;
};

// Two-axis position index. Text tokens always satisfy x_h == x_w.
struct PositionIndex2D {
    double x_h = 0.0;
    double x_w = 0.0;
};

// Embedding split and frequency parameters for the two rotation halves.
struct RopeConfig {
    int d_h = 16;
    int d_w = 16;
    double base = 10000.0;
    // Frequency index origin: 1 uses omega_i = base^(-2i/d) for i = 1..d/2
    // (the first frequency is base^(-2/d), not 1); 0 uses the classical
    // convention omega_i = base^(-2i/d) for i = 0..d/2-1.
    int freq_index_origin = 1;

    int head_dim() const { return d_h + d_w; }
    void validate() const;
};

// Affine defaults derived from the layout: unit scales, offsets placing the
// first image patch exactly g index units after the last prefix token.
AffineParams default_affine(const SequenceLayout& layout);

// Position indices for the full sequence: prefix text p -> (p, p); image
// patch (r, c), row-major -> (a1*r + l1, a2*c + l2); suffix text j ->
// (M + g + j, M + g + j) with M the max transformed image coordinate over
// both axes. An affine that lands an image index on a text index is a
// layout conflict.
std::vector<PositionIndex2D> build_layout(const SequenceLayout& layout,
                                          const AffineParams& affine);

// The comparison baseline: uniform step 1, no gap, image indices continuing
// the text run. Identical to build_layout with g=1 and derived defaults.
std::vector<PositionIndex2D> baseline_layout(const SequenceLayout& layout);

// omega_i for one half of the embedding; dim/2 entries.
Vec frequency_table(int dim, double base, int index_origin = 1);

// Rotate q (length d_h + d_w): consecutive pairs of the first d_h
// coordinates by angles x_h * omega_i^(h), of the last d_w by
// x_w * omega_i^(w). Norm-preserving.
Vec rotate(std::span<const double> q, const PositionIndex2D& pos, const RopeConfig& cfg);

// Same rotation kernel; named entry point for the baseline path.
Vec rope2d_baseline(std::span<const double> q, const PositionIndex2D& pos, const RopeConfig& cfg);

// Precomputed sin/cos per position for a fixed layout; read-only after
// construction and shareable across workers.
class RotationPlan {
public:
    RotationPlan(const std::vector<PositionIndex2D>& positions, const RopeConfig& cfg);

    size_t size() const { return sin_.size(); }

    // Rotate v by the angles of position index `token`.
    Vec apply(size_t token, std::span<const double> v) const;

private:
    RopeConfig cfg_;
    std::vector<Vec> sin_;  // per token: d_h/2 + d_w/2 angle sines
    std::vector<Vec> cos_;
};

}  // namespace clinkd

#endif
