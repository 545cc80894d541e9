#include "attention.hpp"

#include <cmath>

#include "rng.hpp"

namespace clinkd {

namespace {

std::vector<Modality> tags_for(const SequenceLayout& layout) {
    std::vector<Modality> tags;
    tags.reserve(static_cast<size_t>(layout.total_tokens()));
    for (int64_t i = 0; i < layout.prefix_len; ++i) tags.push_back(Modality::Text);
    for (int64_t i = 0; i < layout.image_tokens(); ++i) tags.push_back(Modality::Image);
    for (int64_t i = 0; i < layout.suffix_len; ++i) tags.push_back(Modality::Text);
    return tags;
}

}  // namespace

void TokenSequence::validate(const RopeConfig& cfg) const {
    layout.validate();
    if (embeddings.size() != static_cast<size_t>(layout.total_tokens()))
        fail(Status::InvalidInput, "sequence: embedding count does not match layout");
    if (tags.size() != embeddings.size())
        fail(Status::InvalidInput, "sequence: tag count does not match layout");
    for (const auto& e : embeddings) {
        if (e.size() != static_cast<size_t>(cfg.head_dim()))
            fail(Status::InvalidInput, "sequence: embedding length does not match d_h + d_w");
    }
}

TokenSequence make_sequence(const SequenceLayout& layout, const RopeConfig& cfg,
                            uint64_t seed) {
    layout.validate();
    cfg.validate();
    Rng rng(seed);
    TokenSequence seq;
    seq.layout = layout;
    seq.tags = tags_for(layout);
    seq.embeddings.reserve(seq.tags.size());
    for (size_t i = 0; i < seq.tags.size(); ++i) {
        Vec e(static_cast<size_t>(cfg.head_dim()));
        for (double& x : e) x = rng.normal();
        seq.embeddings.push_back(std::move(e));
    }
    return seq;
}

TokenSequence make_constant_sequence(const SequenceLayout& layout, const RopeConfig& cfg,
                                     double value) {
    layout.validate();
    cfg.validate();
    TokenSequence seq;
    seq.layout = layout;
    seq.tags = tags_for(layout);
    seq.embeddings.assign(seq.tags.size(), Vec(static_cast<size_t>(cfg.head_dim()), value));
    return seq;
}

AttentionDiagnostics attention_scores(const TokenSequence& seq, const RopeConfig& cfg,
                                      EmbeddingMode mode,
                                      std::optional<AffineParams> affine) {
    seq.validate(cfg);
    size_t n = seq.embeddings.size();
    if (n == 0) fail(Status::InvalidInput, "attention_scores: empty sequence");

    std::vector<Vec> rotated;
    rotated.reserve(n);
    if (mode == EmbeddingMode::None) {
        rotated = seq.embeddings;
    } else {
        std::vector<PositionIndex2D> positions =
            mode == EmbeddingMode::Mcg
                ? build_layout(seq.layout, affine.value_or(default_affine(seq.layout)))
                : baseline_layout(seq.layout);
        RotationPlan plan(positions, cfg);
        for (size_t i = 0; i < n; ++i) rotated.push_back(plan.apply(i, seq.embeddings[i]));
    }

    double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim()));
    AttentionDiagnostics diag;
    diag.scores = Matrix(n, n);
    double sum_tt = 0.0, sum_ii = 0.0, sum_x = 0.0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            double s = dot(rotated[i], rotated[j]) * inv_sqrt_d;
            diag.scores.at(i, j) = s;
            bool ti = seq.tags[i] == Modality::Text;
            bool tj = seq.tags[j] == Modality::Text;
            if (ti && tj) {
                sum_tt += s;
                ++diag.intra_text_pairs;
            } else if (!ti && !tj) {
                sum_ii += s;
                ++diag.intra_image_pairs;
            } else {
                sum_x += s;
                ++diag.cross_modal_pairs;
            }
        }
    }
    if (diag.intra_text_pairs) diag.mean_intra_text = sum_tt / static_cast<double>(diag.intra_text_pairs);
    if (diag.intra_image_pairs) diag.mean_intra_image = sum_ii / static_cast<double>(diag.intra_image_pairs);
    if (diag.cross_modal_pairs) diag.mean_cross_modal = sum_x / static_cast<double>(diag.cross_modal_pairs);
    return diag;
}

ModalityReport modality_separation_report(const TokenSequence& seq, const RopeConfig& cfg,
                                          std::optional<AffineParams> affine) {
    seq.validate(cfg);
    if (seq.layout.prefix_len + seq.layout.suffix_len == 0 || seq.layout.image_tokens() == 0)
        fail(Status::InvalidInput,
             "modality_separation_report: diagnostic undefined for single-modality sequence");

    ModalityReport rep;
    rep.mcg = attention_scores(seq, cfg, EmbeddingMode::Mcg, affine);
    rep.baseline = attention_scores(seq, cfg, EmbeddingMode::Baseline2d);

    // Boundary diagnostic: same probe embedding on both sides isolates the
    // rotation-angle difference. Uses the prefix/image boundary when a prefix
    // exists, otherwise the image/suffix one.
    AffineParams aff = affine.value_or(default_affine(seq.layout));
    auto mcg_pos = build_layout(seq.layout, aff);
    auto base_pos = baseline_layout(seq.layout);
    size_t last_prefix, first_image;
    if (seq.layout.prefix_len > 0) {
        last_prefix = static_cast<size_t>(seq.layout.prefix_len - 1);
        first_image = static_cast<size_t>(seq.layout.prefix_len);
    } else {
        last_prefix = static_cast<size_t>(seq.layout.image_tokens());  // first suffix token
        first_image = static_cast<size_t>(seq.layout.image_tokens() - 1);
    }

    double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim()));
    Vec probe(static_cast<size_t>(cfg.head_dim()),
              1.0 / std::sqrt(static_cast<double>(cfg.head_dim())));
    Vec qa = rotate(probe, mcg_pos[last_prefix], cfg);
    Vec ka = rotate(probe, mcg_pos[first_image], cfg);
    rep.mcg_boundary_score = dot(qa, ka) * inv_sqrt_d;
    Vec qb = rotate(probe, base_pos[last_prefix], cfg);
    Vec kb = rotate(probe, base_pos[first_image], cfg);
    rep.baseline_boundary_score = dot(qb, kb) * inv_sqrt_d;
    rep.boundary_gap = rep.mcg_boundary_score - rep.baseline_boundary_score;
    return rep;
}

}  // namespace clinkd
