#ifndef CLINKD_GATE_HPP
#define CLINKD_GATE_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "math.hpp"

namespace clinkd {

struct GateConfig {
    double mu = 2.0;    // semantic-similarity weight, > 0
    double nu = 1.0;    // coordinate-consistency weight, > 0 (mu > nu by default)
    double tau = 0.8;   // correction trigger threshold, in (0,1)

    void validate() const;
};

struct GateSample {
    Vec pred_embedding;
    Vec gt_embedding;
    std::array<double, 4> anchor_box{};  // shared (x1,y1,x2,y2), normalized
    std::string pred_text;
    std::string gt_text;

    void validate() const;
};

// S = (mu<e_o,e_gt> + nu<c,c>) / sqrt((mu|e_o|^2 + nu|c|^2)(mu|e_gt|^2 + nu|c|^2)),
// identically the plain cosine of [sqrt(mu) e_o ; sqrt(nu) c] and
// [sqrt(mu) e_gt ; sqrt(nu) c].
double weighted_cosine(const GateSample& sample, const GateConfig& cfg);

enum class GateDecision { Keep, Correct };

// Correct iff S < tau; S == tau keeps.
GateDecision gate_decide(const GateSample& sample, const GateConfig& cfg);

// Deterministic text embedding. The default is a signed feature-hash
// bag-of-tokens (FNV-1a, lowercase alphanumeric tokens), so equal texts embed
// equally and token overlap raises cosine. Empty text embeds to the zero
// vector; the gate then leans on the anchor-box term.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Vec embed(std::string_view text) const = 0;
    virtual size_t dim() const = 0;
};

class HashEmbedder : public Embedder {
public:
    explicit HashEmbedder(size_t dim = 256, uint64_t seed = 0);
    Vec embed(std::string_view text) const override;
    size_t dim() const override { return dim_; }

private:
    size_t dim_;
    uint64_t basis_;
};

struct CorrectionResult {
    std::string text;
    // A corrector may echo a box; it must equal the input box bit-for-bit.
    std::optional<std::array<double, 4>> box;
};

class Corrector {
public:
    virtual ~Corrector() = default;
    virtual CorrectionResult correct(const std::string& pred_text, const std::string& gt_text,
                                     const std::string& context) = 0;
};

// Test oracle: returns the ground-truth text unchanged.
class MockCorrector : public Corrector {
public:
    CorrectionResult correct(const std::string& pred_text, const std::string& gt_text,
                             const std::string& context) override;
};

// Deterministic lexical merge: ground-truth tokens plus a seeded selection of
// prediction-only tokens. Same inputs and seed always give the same output.
class TemplateCorrector : public Corrector {
public:
    explicit TemplateCorrector(uint64_t seed = 0);
    CorrectionResult correct(const std::string& pred_text, const std::string& gt_text,
                             const std::string& context) override;

private:
    uint64_t seed_;
};

struct RemoteCorrectorConfig {
    std::string url;                 // e.g. http://host:port/v1/correct
    std::string credential_env;      // name of the env var holding the bearer token
    int timeout_ms = 5000;
    int retries = 2;                 // additional attempts after the first

    void validate() const;
};

// HTTP client for a chat-completion-style correction endpoint. POSTs
// {pred_text, gt_text, instruction}; the response must carry a single
// "revised_text" string field. Network failures and 5xx responses are
// retried up to the configured bound and then surface as Backend errors;
// the prediction is never silently passed through.
class RemoteCorrector : public Corrector {
public:
    explicit RemoteCorrector(RemoteCorrectorConfig cfg);
    CorrectionResult correct(const std::string& pred_text, const std::string& gt_text,
                             const std::string& context) override;

private:
    RemoteCorrectorConfig cfg_;
};

// Replace pred_text with the corrector output and re-embed it; the anchor box
// is carried over bit-identically, and a corrector-supplied box that differs
// is a contract violation.
GateSample apply_correction(const GateSample& sample, Corrector& corrector,
                            const Embedder& embedder);

// ---- batch evaluation (backs `gate-eval`) -----------------------------------

struct GateRecord {
    std::string id;
    double similarity = 0.0;
    GateDecision decision = GateDecision::Keep;
    std::optional<std::string> corrected_text;
    std::optional<double> similarity_after;
    bool still_low = false;          // corrected once, still under tau; flagged, not looped
    std::optional<std::string> error;
};

struct GateEvalResult {
    std::vector<GateRecord> records;
    size_t failed = 0;
};

struct GateEvalInput {
    std::string id;
    std::string pred_text;
    std::string gt_text;
    std::array<double, 4> box{};
};

// Embeds, gates, and (for low-similarity samples) corrects and re-gates once.
// Corrector calls run under the jobs bound; records come back in input order.
GateEvalResult gate_eval(const std::vector<GateEvalInput>& inputs, const GateConfig& cfg,
                         const Embedder& embedder, Corrector& corrector, int jobs);

}  // namespace clinkd

#endif
