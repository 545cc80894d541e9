#ifndef CLINKD_DISTILL_HPP
#define CLINKD_DISTILL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "math.hpp"

namespace clinkd {

struct DistillConfig {
    double alpha = 0.5;         // KD mixing weight in [0,1]
    double gamma = 0.5;         // confidence sensitivity, (0,1]
    double beta = 0.5;          // margin sensitivity, (0,1]
    double tau0 = 0.9;          // initial confidence threshold, (0,1]
    double tau_min = 0.5;       // floor of the threshold schedule, (0, tau0]
    double temperature = 2.0;   // distillation temperature T > 0
    // Eq-faithful default divides the weighted sum by N; this opt-in variant
    // divides by the total admitted weight instead.
    bool normalize_by_admitted = false;

    void validate() const;
};

struct DistillBatch {
    Matrix teacher_logits;          // N x K, treated as constants (pseudo-labels)
    Matrix student_logits;          // N x K
    std::vector<int> hard_labels;   // N entries in [0, K)
    double progress = 0.0;          // normalized training progress t in [0,1]

    size_t samples() const { return teacher_logits.rows; }
    size_t classes() const { return teacher_logits.cols; }
    void validate() const;
};

struct SampleWeight {
    double confidence = 0.0;   // C(x): top teacher softmax probability (T=1)
    double margin = 0.0;       // Delta(x): top-1 minus top-2 probability
    double threshold = 0.0;    // tau(t) in effect for this batch
    double weight = 0.0;       // w(x), hard zero below threshold
};

// (C, Delta) from one row of raw teacher logits; needs K >= 2.
std::pair<double, double> confidence_margin(std::span<const double> teacher_logits);

// tau(t) = tau_min + (tau0 - tau_min)(1 - t); t must be in [0,1].
double curriculum_threshold(double t, const DistillConfig& cfg);

// w = C^gamma * Delta^beta when C >= tau, else 0.
double adaptive_weight(double confidence, double margin, double tau,
                       const DistillConfig& cfg);

struct KdLossResult {
    double loss = 0.0;
    std::vector<SampleWeight> reports;
};

// Weighted distillation loss: (1/N) sum_i w_i KL(softmax(zt_i/T) || softmax(zs_i/T)).
KdLossResult kd_loss(const DistillBatch& batch, const DistillConfig& cfg);

struct ObjectiveResult {
    double loss = 0.0;      // (L_CE + alpha * L_KD) / (1 + alpha)
    double ce = 0.0;
    double kd = 0.0;
    Matrix grad;            // d loss / d student_logits, N x K
    std::vector<SampleWeight> reports;
};

// Combined objective with its analytic student-logit gradient. The teacher
// is a constant (no gradient); no T^2 scaling is applied to the KD term.
ObjectiveResult distill_objective(const DistillBatch& batch, const DistillConfig& cfg);

// ---- toy teacher-student experiment ----------------------------------------

struct ToyTaskConfig {
    int classes = 3;
    int feature_dim = 4;
    int samples_per_class = 40;
    double cluster_radius = 3.0;   // class means sit on a circle in the first two dims
    double cluster_spread = 1.0;   // isotropic within-cluster stddev
    int steps = 2000;
    double lr = 0.5;
    std::string teacher = "bayes"; // "bayes" (posterior of the generating mixture) or "zero"
    std::string labels = "true";   // "true" cluster labels or "teacher_argmax"

    void validate() const;
};

struct TraceRow {
    int step = 0;
    double loss = 0.0;
    double ce = 0.0;
    double kd = 0.0;
    int admitted = 0;
    double tau = 0.0;
};

struct ToyRunResult {
    std::vector<TraceRow> trace;
    double final_mean_kl = 0.0;    // mean KL(teacher || student) at T=1 over the dataset
    int admitted_first = 0;
    int admitted_last = 0;
};

// Full-batch gradient descent of a linear-softmax student against a frozen
// teacher on seeded Gaussian clusters; t = step/steps. Non-finite loss aborts
// with a Numeric error naming the step.
ToyRunResult toy_distill_run(const DistillConfig& cfg, const ToyTaskConfig& task,
                             uint64_t seed);

}  // namespace clinkd

#endif
