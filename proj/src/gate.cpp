#include "gate.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <unordered_set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "parallel.hpp"
#include "rng.hpp"

namespace clinkd {

void GateConfig::validate() const {
    if (!(mu > 0.0)) fail(Status::InvalidConfig, "gate.mu must be > 0");
    if (!(nu > 0.0)) fail(Status::InvalidConfig, "gate.nu must be > 0");
    if (!(tau > 0.0 && tau < 1.0)) fail(Status::InvalidConfig, "gate.tau must be in (0,1)");
}

void GateSample::validate() const {
    if (pred_embedding.size() != gt_embedding.size())
        fail(Status::InvalidInput, "gate sample: embedding lengths disagree");
    if (pred_embedding.empty())
        fail(Status::InvalidInput, "gate sample: empty embeddings");
    require_finite(pred_embedding, "gate sample pred_embedding");
    require_finite(gt_embedding, "gate sample gt_embedding");
    for (double v : anchor_box) {
        if (!(v >= 0.0 && v <= 1.0))
            fail(Status::InvalidInput, "gate sample: anchor box coordinate outside [0,1]");
    }
    if (anchor_box[0] > anchor_box[2] || anchor_box[1] > anchor_box[3])
        fail(Status::InvalidInput, "gate sample: anchor box must satisfy x1<=x2, y1<=y2");
}

double weighted_cosine(const GateSample& sample, const GateConfig& cfg) {
    cfg.validate();
    sample.validate();
    double c_sq = dot(sample.anchor_box, sample.anchor_box);
    double eo_sq = dot(sample.pred_embedding, sample.pred_embedding);
    double egt_sq = dot(sample.gt_embedding, sample.gt_embedding);
    double num = cfg.mu * dot(sample.pred_embedding, sample.gt_embedding) + cfg.nu * c_sq;
    double da = cfg.mu * eo_sq + cfg.nu * c_sq;
    double db = cfg.mu * egt_sq + cfg.nu * c_sq;
    if (da == 0.0 || db == 0.0)
        fail(Status::InvalidInput, "weighted_cosine: zero denominator (embedding and box both zero)");
    return num / std::sqrt(da * db);
}

GateDecision gate_decide(const GateSample& sample, const GateConfig& cfg) {
    return weighted_cosine(sample, cfg) < cfg.tau ? GateDecision::Correct : GateDecision::Keep;
}

// ---- embedder ----------------------------------------------------------------

HashEmbedder::HashEmbedder(size_t dim, uint64_t seed) : dim_(dim) {
    if (dim_ == 0) fail(Status::InvalidConfig, "embedder.dim must be >= 1");
    basis_ = 0xcbf29ce484222325ULL ^ (seed * 0x9e3779b97f4a7c15ULL);
}

Vec HashEmbedder::embed(std::string_view text) const {
    Vec v(dim_, 0.0);
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        uint64_t h = fnv1a64(token.data(), token.size(), basis_);
        size_t idx = static_cast<size_t>(h % dim_);
        double sign = (h >> 63) ? -1.0 : 1.0;
        v[idx] += sign;
        token.clear();
    };
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch)))
            token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        else
            flush();
    }
    flush();
    return v;
}

// ---- correctors ---------------------------------------------------------------

CorrectionResult MockCorrector::correct(const std::string&, const std::string& gt_text,
                                        const std::string&) {
    return {gt_text, std::nullopt};
}

TemplateCorrector::TemplateCorrector(uint64_t seed) : seed_(seed) {}

namespace {

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string tok;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!tok.empty()) out.push_back(std::move(tok)), tok.clear();
        } else {
            tok.push_back(ch);
        }
    }
    if (!tok.empty()) out.push_back(std::move(tok));
    return out;
}

}  // namespace

CorrectionResult TemplateCorrector::correct(const std::string& pred_text,
                                            const std::string& gt_text, const std::string&) {
    // Ground truth is the base; prediction-only tokens are appended under a
    // per-input seeded coin so repeated calls agree exactly.
    uint64_t mix = seed_ ^ fnv1a64(pred_text.data(), pred_text.size()) ^
                   (fnv1a64(gt_text.data(), gt_text.size()) * 0x9e3779b97f4a7c15ULL);
    Rng rng(mix);
    auto gt_tokens = whitespace_tokens(gt_text);
    std::unordered_set<std::string> seen(gt_tokens.begin(), gt_tokens.end());
    std::string out = gt_text;
    for (const auto& tok : whitespace_tokens(pred_text)) {
        if (seen.count(tok)) continue;
        if (rng.uniform() < 0.5) {
            if (!out.empty()) out.push_back(' ');
            out += tok;
            seen.insert(tok);
        }
    }
    return {out, std::nullopt};
}

void RemoteCorrectorConfig::validate() const {
    if (url.empty()) fail(Status::InvalidConfig, "remote corrector: url must be set");
    if (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0)
        fail(Status::InvalidConfig, "remote corrector: url must start with http:// or https://");
    if (timeout_ms <= 0) fail(Status::InvalidConfig, "remote corrector: timeout_ms must be > 0");
    if (retries < 0) fail(Status::InvalidConfig, "remote corrector: retries must be >= 0");
}

RemoteCorrector::RemoteCorrector(RemoteCorrectorConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
}

CorrectionResult RemoteCorrector::correct(const std::string& pred_text,
                                          const std::string& gt_text,
                                          const std::string& context) {
    // Split scheme://host[:port] from the request path.
    size_t scheme_end = cfg_.url.find("://") + 3;
    size_t path_start = cfg_.url.find('/', scheme_end);
    std::string base = path_start == std::string::npos ? cfg_.url : cfg_.url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : cfg_.url.substr(path_start);

    nlohmann::json body = {
        {"pred_text", pred_text},
        {"gt_text", gt_text},
        {"instruction",
         "Revise the prediction to match the ground-truth intent. Return JSON with a single "
         "revised_text field. Never change bounding boxes."},
    };
    if (!context.empty()) body["context"] = context;

    httplib::Client client(base);
    client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
    client.set_read_timeout(0, cfg_.timeout_ms * 1000);
    if (!cfg_.credential_env.empty()) {
        if (const char* cred = std::getenv(cfg_.credential_env.c_str()))
            client.set_default_headers({{"Authorization", std::string("Bearer ") + cred}});
    }

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
        auto res = client.Post(path, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error: HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            fail(Status::Backend, "correction failed: HTTP " + std::to_string(res->status));

        nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.is_object() || !reply.contains("revised_text") ||
            !reply["revised_text"].is_string())
            fail(Status::Backend, "correction failed: response lacks a revised_text field");

        CorrectionResult out{reply["revised_text"].get<std::string>(), std::nullopt};
        if (reply.contains("box")) {
            if (!reply["box"].is_array() || reply["box"].size() != 4)
                fail(Status::Backend, "correction failed: malformed box in response");
            std::array<double, 4> box{};
            for (size_t i = 0; i < 4; ++i) box[i] = reply["box"][i].get<double>();
            out.box = box;
        }
        return out;
    }
    fail(Status::Backend, "correction failed after " + std::to_string(cfg_.retries + 1) +
                              " attempts (" + last_error + ")");
}

// ---- correction + batch gate --------------------------------------------------

GateSample apply_correction(const GateSample& sample, Corrector& corrector,
                            const Embedder& embedder) {
    CorrectionResult res =
        corrector.correct(sample.pred_text, sample.gt_text, /*context=*/"");
    if (res.box.has_value() && *res.box != sample.anchor_box)
        fail(Status::Contract, "corrector attempted to mutate the anchor box");

    GateSample corrected = sample;
    corrected.pred_text = res.text;
    corrected.pred_embedding = embedder.embed(res.text);
    corrected.anchor_box = sample.anchor_box;  // bit-identical by contract
    return corrected;
}

GateEvalResult gate_eval(const std::vector<GateEvalInput>& inputs, const GateConfig& cfg,
                         const Embedder& embedder, Corrector& corrector, int jobs) {
    cfg.validate();
    GateEvalResult result;
    result.records.resize(inputs.size());

    parallel_for(inputs.size(), jobs, [&](size_t i) {
        const GateEvalInput& in = inputs[i];
        GateRecord& rec = result.records[i];
        rec.id = in.id;
        try {
            GateSample sample;
            sample.pred_text = in.pred_text;
            sample.gt_text = in.gt_text;
            sample.anchor_box = in.box;
            sample.pred_embedding = embedder.embed(in.pred_text);
            sample.gt_embedding = embedder.embed(in.gt_text);

            rec.similarity = weighted_cosine(sample, cfg);
            rec.decision = gate_decide(sample, cfg);
            if (rec.decision == GateDecision::Correct) {
                GateSample corrected = apply_correction(sample, corrector, embedder);
                rec.corrected_text = corrected.pred_text;
                double s2 = weighted_cosine(corrected, cfg);
                rec.similarity_after = s2;
                rec.still_low = s2 < cfg.tau;  // one pass only; flagged for inspection
            }
        } catch (const Error& e) {
            rec.error = e.what();
        } catch (const std::exception& e) {
            rec.error = std::string("correction failed: ") + e.what();
        }
    });

    for (const auto& rec : result.records)
        if (rec.error) ++result.failed;
    return result;
}

}  // namespace clinkd
