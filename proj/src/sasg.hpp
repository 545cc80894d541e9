#ifndef CLINKD_SASG_HPP
#define CLINKD_SASG_HPP

#include <memory>
#include <string>
#include <vector>

#include "gate.hpp"

namespace clinkd {

// The query a candidate pool answers. At desk scale the scorer works off a
// reference text (no image encoder in scope); the question doubles as the
// reference when none is given.
struct SasgContext {
    std::string image_id;
    std::string question;
    std::string reference_text;

    const std::string& reference() const;
};

class Scorer {
public:
    virtual ~Scorer() = default;
    // Deterministic, finite for fixed inputs; backend trouble throws Backend.
    virtual double score(const std::string& candidate, const SasgContext& context) const = 0;
};

// Default desk-scale scorer: hash-embedding cosine between candidate and the
// context reference. Zero-vector embeddings (e.g. empty candidate) score 0.
class HashEmbedderScorer : public Scorer {
public:
    explicit HashEmbedderScorer(size_t dim = 256, uint64_t seed = 0);
    double score(const std::string& candidate, const SasgContext& context) const override;

private:
    HashEmbedder embedder_;
};

struct ScoredPool {
    std::vector<double> scores;       // -inf marks a failed candidate
    std::vector<bool> failed;
    size_t selected_index = 0;        // first-max tie-break over non-failed scores
};

// Score every candidate and pick the argmax; the winner is always a member of
// the input pool. Candidates whose scoring fails are excluded; if all fail,
// selection fails. Scoring may run under `jobs` threads; the argmax walks the
// input order, so parallelism cannot change the outcome.
ScoredPool select_best(const std::vector<std::string>& candidates, const SasgContext& context,
                       const Scorer& scorer, int jobs = 1);

}  // namespace clinkd

#endif
