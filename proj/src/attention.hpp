#ifndef CLINKD_ATTENTION_HPP
#define CLINKD_ATTENTION_HPP

#include <optional>
#include <string>
#include <vector>

#include "rope.hpp"

namespace clinkd {

enum class Modality { Text, Image };

enum class EmbeddingMode { Mcg, Baseline2d, None };

// A synthetic token sequence: layout plus one content embedding per token.
struct TokenSequence {
    SequenceLayout layout;
    std::vector<Vec> embeddings;        // each of length d_h + d_w
    std::vector<Modality> tags;

    void validate(const RopeConfig& cfg) const;
};

// Draw embeddings from the seeded stream (standard normal components) or set
// them all to a constant; removes the content confound from positional
// diagnostics.
TokenSequence make_sequence(const SequenceLayout& layout, const RopeConfig& cfg,
                            uint64_t seed);
TokenSequence make_constant_sequence(const SequenceLayout& layout, const RopeConfig& cfg,
                                     double value);

struct AttentionDiagnostics {
    Matrix scores;             // n x n raw pre-softmax scores <q_i, k_j>/sqrt(d)
    double mean_intra_text = 0.0;
    double mean_intra_image = 0.0;
    double mean_cross_modal = 0.0;
    size_t intra_text_pairs = 0;
    size_t intra_image_pairs = 0;
    size_t cross_modal_pairs = 0;
};

// Rotate every embedding by its position under the selected mode and compute
// the full pairwise score matrix with 1/sqrt(d) scaling. No softmax, no value
// aggregation: the raw scores are the diagnostic object.
AttentionDiagnostics attention_scores(const TokenSequence& seq, const RopeConfig& cfg,
                                      EmbeddingMode mode,
                                      std::optional<AffineParams> affine = std::nullopt);

struct ModalityReport {
    AttentionDiagnostics mcg;
    AttentionDiagnostics baseline;
    // Score between the boundary pair (last prefix token, first image patch)
    // for a shared probe embedding: MCG at index distance g vs baseline at
    // distance 1.
    double mcg_boundary_score = 0.0;
    double baseline_boundary_score = 0.0;
    double boundary_gap = 0.0;
};

// Requires at least one text and one image token.
ModalityReport modality_separation_report(const TokenSequence& seq, const RopeConfig& cfg,
                                          std::optional<AffineParams> affine = std::nullopt);

}  // namespace clinkd

#endif
