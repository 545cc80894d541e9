#include "distill.hpp"

#include <algorithm>
#include <cmath>

#include "rng.hpp"

namespace clinkd {

void DistillConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail(Status::InvalidConfig, "distill.alpha must be in [0,1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) fail(Status::InvalidConfig, "distill.gamma must be in (0,1]");
    if (!(beta > 0.0 && beta <= 1.0)) fail(Status::InvalidConfig, "distill.beta must be in (0,1]");
    if (!(tau0 > 0.0 && tau0 <= 1.0)) fail(Status::InvalidConfig, "distill.tau0 must be in (0,1]");
    if (!(tau_min > 0.0 && tau_min <= tau0))
        fail(Status::InvalidConfig, "distill.tau_min must be in (0, tau0]");
    if (!(temperature > 0.0)) fail(Status::InvalidConfig, "distill.temperature must be > 0");
}

void DistillBatch::validate() const {
    if (teacher_logits.rows == 0 || teacher_logits.cols < 2)
        fail(Status::InvalidInput, "batch: needs N >= 1 samples and K >= 2 classes");
    if (student_logits.rows != teacher_logits.rows || student_logits.cols != teacher_logits.cols)
        fail(Status::InvalidInput, "batch: teacher/student logit shapes disagree");
    if (hard_labels.size() != teacher_logits.rows)
        fail(Status::InvalidInput, "batch: label count does not match N");
    for (int label : hard_labels) {
        if (label < 0 || static_cast<size_t>(label) >= teacher_logits.cols)
            fail(Status::InvalidInput, "batch: label out of range");
    }
    if (!(progress >= 0.0 && progress <= 1.0))
        fail(Status::InvalidInput, "batch: progress must be in [0,1]");
    require_finite(teacher_logits.data, "batch.teacher_logits");
    require_finite(student_logits.data, "batch.student_logits");
}

std::pair<double, double> confidence_margin(std::span<const double> teacher_logits) {
    if (teacher_logits.size() < 2)
        fail(Status::InvalidInput, "confidence_margin: needs at least 2 classes");
    ProbDist p = softmax(teacher_logits, 1.0);
    double top1 = -1.0, top2 = -1.0;
    for (double x : p.probs) {
        if (x > top1) {
            top2 = top1;
            top1 = x;
        } else if (x > top2) {
            top2 = x;
        }
    }
    return {top1, top1 - top2};
}

double curriculum_threshold(double t, const DistillConfig& cfg) {
    cfg.validate();
    if (!(t >= 0.0 && t <= 1.0))
        fail(Status::InvalidInput, "curriculum_threshold: progress must be in [0,1]");
    return cfg.tau_min + (cfg.tau0 - cfg.tau_min) * (1.0 - t);
}

double adaptive_weight(double confidence, double margin, double tau,
                       const DistillConfig& cfg) {
    if (!(confidence > 0.0 && confidence <= 1.0))
        fail(Status::InvalidInput, "adaptive_weight: confidence must be in (0,1]");
    if (!(margin >= 0.0 && margin <= 1.0))
        fail(Status::InvalidInput, "adaptive_weight: margin must be in [0,1]");
    if (!(tau > 0.0 && tau <= 1.0))
        fail(Status::InvalidInput, "adaptive_weight: threshold must be in (0,1]");
    if (confidence < tau) return 0.0;
    // pow(0, beta) = 0 for beta > 0, so a tied top-2 annihilates the weight.
    return std::pow(confidence, cfg.gamma) * std::pow(margin, cfg.beta);
}

namespace {

struct PerSample {
    SampleWeight report;
    double kl = 0.0;
};

std::vector<PerSample> per_sample_terms(const DistillBatch& batch, const DistillConfig& cfg) {
    double tau = curriculum_threshold(batch.progress, cfg);
    std::vector<PerSample> out(batch.samples());
    for (size_t i = 0; i < batch.samples(); ++i) {
        auto [c, d] = confidence_margin(batch.teacher_logits.row(i));
        PerSample& s = out[i];
        s.report.confidence = c;
        s.report.margin = d;
        s.report.threshold = tau;
        s.report.weight = adaptive_weight(c, d, tau, cfg);
        if (s.report.weight > 0.0) {
            s.kl = kl_between_logits(batch.teacher_logits.row(i), batch.student_logits.row(i),
                                     cfg.temperature);
        }
    }
    return out;
}

// Denominator of the weighted KD sum: N by default, total admitted weight
// with the opt-in flag (0 admitted weight yields a zero loss).
double kd_denominator(const std::vector<PerSample>& terms, const DistillConfig& cfg) {
    if (!cfg.normalize_by_admitted) return static_cast<double>(terms.size());
    double wsum = 0.0;
    for (const auto& s : terms) wsum += s.report.weight;
    return wsum;
}

}  // namespace

KdLossResult kd_loss(const DistillBatch& batch, const DistillConfig& cfg) {
    cfg.validate();
    batch.validate();
    auto terms = per_sample_terms(batch, cfg);
    double denom = kd_denominator(terms, cfg);
    KdLossResult res;
    res.reports.reserve(terms.size());
    double sum = 0.0;
    for (const auto& s : terms) {
        sum += s.report.weight * s.kl;
        res.reports.push_back(s.report);
    }
    res.loss = denom > 0.0 ? sum / denom : 0.0;
    return res;
}

ObjectiveResult distill_objective(const DistillBatch& batch, const DistillConfig& cfg) {
    cfg.validate();
    batch.validate();
    size_t n = batch.samples(), k = batch.classes();
    double inv_n = 1.0 / static_cast<double>(n);
    double scale = 1.0 / (1.0 + cfg.alpha);

    auto terms = per_sample_terms(batch, cfg);
    double kd_denom = kd_denominator(terms, cfg);

    ObjectiveResult res;
    res.grad = Matrix(n, k);
    res.reports.reserve(n);

    double ce_sum = 0.0, kd_sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        auto zs = batch.student_logits.row(i);
        Vec ls = log_softmax(zs, 1.0);
        ce_sum += -ls[static_cast<size_t>(batch.hard_labels[i])];
        kd_sum += terms[i].report.weight * terms[i].kl;

        // CE term: softmax(zs) - onehot(label), averaged over the batch.
        for (size_t j = 0; j < k; ++j)
            res.grad.at(i, j) = inv_n * (std::exp(ls[j]) - (static_cast<size_t>(batch.hard_labels[i]) == j ? 1.0 : 0.0));

        // KD term: (w/denom)(1/T)(softmax(zs/T) - softmax(zt/T)), teacher constant.
        double w = terms[i].report.weight;
        if (w > 0.0 && kd_denom > 0.0) {
            ProbDist qs = softmax(zs, cfg.temperature);
            ProbDist pt = softmax(batch.teacher_logits.row(i), cfg.temperature);
            double coeff = cfg.alpha * (w / kd_denom) / cfg.temperature;
            for (size_t j = 0; j < k; ++j)
                res.grad.at(i, j) += coeff * (qs[j] - pt[j]);
        }
        res.reports.push_back(terms[i].report);
    }

    res.ce = ce_sum * inv_n;
    res.kd = kd_denom > 0.0 ? kd_sum / kd_denom : 0.0;
    res.loss = (res.ce + cfg.alpha * res.kd) * scale;
    for (double& g : res.grad.data) g *= scale;
    return res;
}

// ---- toy experiment ---------------------------------------------------------

void ToyTaskConfig::validate() const {
    if (classes < 2) fail(Status::InvalidConfig, "toy.classes must be >= 2");
    if (feature_dim < 2) fail(Status::InvalidConfig, "toy.feature_dim must be >= 2");
    if (samples_per_class < 1) fail(Status::InvalidConfig, "toy.samples_per_class must be >= 1");
    if (!(cluster_radius > 0.0)) fail(Status::InvalidConfig, "toy.cluster_radius must be > 0");
    if (!(cluster_spread > 0.0)) fail(Status::InvalidConfig, "toy.cluster_spread must be > 0");
    if (steps < 1) fail(Status::InvalidConfig, "toy.steps must be >= 1");
    if (!(lr > 0.0)) fail(Status::InvalidConfig, "toy.lr must be > 0");
    if (teacher != "bayes" && teacher != "zero")
        fail(Status::InvalidConfig, "toy.teacher must be \"bayes\" or \"zero\"");
    if (labels != "true" && labels != "teacher_argmax")
        fail(Status::InvalidConfig, "toy.labels must be \"true\" or \"teacher_argmax\"");
}

namespace {

struct ToyData {
    Matrix features;         // N x D
    std::vector<int> labels; // true cluster ids
    Matrix teacher_logits;   // N x K, frozen
};

ToyData make_toy_data(const ToyTaskConfig& task, uint64_t seed) {
    Rng rng(seed);
    int n = task.classes * task.samples_per_class;
    ToyData data;
    data.features = Matrix(static_cast<size_t>(n), static_cast<size_t>(task.feature_dim));
    data.labels.reserve(static_cast<size_t>(n));

    // Class means on a circle in the first two feature dims.
    Matrix means(static_cast<size_t>(task.classes), static_cast<size_t>(task.feature_dim));
    for (int c = 0; c < task.classes; ++c) {
        double angle = 2.0 * M_PI * static_cast<double>(c) / static_cast<double>(task.classes);
        means.at(static_cast<size_t>(c), 0) = task.cluster_radius * std::cos(angle);
        means.at(static_cast<size_t>(c), 1) = task.cluster_radius * std::sin(angle);
    }

    size_t row = 0;
    for (int c = 0; c < task.classes; ++c) {
        for (int s = 0; s < task.samples_per_class; ++s, ++row) {
            for (int d = 0; d < task.feature_dim; ++d) {
                data.features.at(row, static_cast<size_t>(d)) =
                    means.at(static_cast<size_t>(c), static_cast<size_t>(d)) +
                    task.cluster_spread * rng.normal();
            }
            data.labels.push_back(c);
        }
    }

    // Frozen teacher: the posterior of the generating mixture (equal priors,
    // shared isotropic covariance) is linear in x, or an all-zero source.
    data.teacher_logits = Matrix(static_cast<size_t>(n), static_cast<size_t>(task.classes));
    if (task.teacher == "bayes") {
        double inv_var = 1.0 / (task.cluster_spread * task.cluster_spread);
        for (size_t i = 0; i < static_cast<size_t>(n); ++i) {
            for (int c = 0; c < task.classes; ++c) {
                double dot_mu = 0.0, mu_sq = 0.0;
                for (int d = 0; d < task.feature_dim; ++d) {
                    double mu = means.at(static_cast<size_t>(c), static_cast<size_t>(d));
                    dot_mu += data.features.at(i, static_cast<size_t>(d)) * mu;
                    mu_sq += mu * mu;
                }
                data.teacher_logits.at(i, static_cast<size_t>(c)) =
                    inv_var * (dot_mu - 0.5 * mu_sq);
            }
        }
    }
    return data;
}

int argmax_row(std::span<const double> row) {
    return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace

ToyRunResult toy_distill_run(const DistillConfig& cfg, const ToyTaskConfig& task,
                             uint64_t seed) {
    cfg.validate();
    task.validate();
    ToyData data = make_toy_data(task, seed);
    size_t n = data.features.rows;
    size_t k = static_cast<size_t>(task.classes);
    size_t d = static_cast<size_t>(task.feature_dim);

    std::vector<int> labels = data.labels;
    if (task.labels == "teacher_argmax") {
        for (size_t i = 0; i < n; ++i) labels[static_cast<size_t>(i)] = argmax_row(data.teacher_logits.row(i));
    }

    // Student: logits = W x + b, zero-initialized.
    Matrix w(k, d);
    Vec b(k, 0.0);

    ToyRunResult result;
    result.trace.reserve(static_cast<size_t>(task.steps));

    DistillBatch batch;
    batch.teacher_logits = data.teacher_logits;
    batch.hard_labels = labels;

    for (int step = 0; step < task.steps; ++step) {
        batch.progress = static_cast<double>(step) / static_cast<double>(task.steps);
        batch.student_logits = Matrix(n, k);
        for (size_t i = 0; i < n; ++i) {
            for (size_t c = 0; c < k; ++c) {
                double z = b[c];
                for (size_t j = 0; j < d; ++j) z += w.at(c, j) * data.features.at(i, j);
                batch.student_logits.at(i, c) = z;
            }
        }

        ObjectiveResult obj = distill_objective(batch, cfg);
        if (!std::isfinite(obj.loss))
            fail(Status::Numeric, "toy run failed at step " + std::to_string(step) +
                                      ": non-finite loss");

        int admitted = 0;
        for (const auto& r : obj.reports)
            if (r.weight > 0.0) ++admitted;
        result.trace.push_back({step, obj.loss, obj.ce, obj.kd, admitted,
                                obj.reports.front().threshold});

        // Backprop through logits = Wx + b by hand; plain gradient descent.
        for (size_t c = 0; c < k; ++c) {
            double gb = 0.0;
            for (size_t i = 0; i < n; ++i) gb += obj.grad.at(i, c);
            b[c] -= task.lr * gb;
            for (size_t j = 0; j < d; ++j) {
                double gw = 0.0;
                for (size_t i = 0; i < n; ++i) gw += obj.grad.at(i, c) * data.features.at(i, j);
                w.at(c, j) -= task.lr * gw;
            }
        }
    }

    // Final diagnostics at T=1, unweighted: how far the student distribution
    // still is from the teacher's.
    Matrix final_logits(n, k);
    for (size_t i = 0; i < n; ++i) {
        for (size_t c = 0; c < k; ++c) {
            double z = b[c];
            for (size_t j = 0; j < d; ++j) z += w.at(c, j) * data.features.at(i, j);
            final_logits.at(i, c) = z;
        }
    }
    double kl_sum = 0.0;
    for (size_t i = 0; i < n; ++i)
        kl_sum += kl_between_logits(data.teacher_logits.row(i), final_logits.row(i), 1.0);
    result.final_mean_kl = kl_sum / static_cast<double>(n);
    result.admitted_first = result.trace.front().admitted;
    result.admitted_last = result.trace.back().admitted;
    return result;
}

}  // namespace clinkd
