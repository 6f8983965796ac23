#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace rsfm {

/// Posterior draws of a single coefficient.
struct CoefSample {
    Eigen::VectorXd draws;
    std::string label;
};

// Sample variance with denominator S-1.
double sample_variance(const Eigen::VectorXd& v);

// Var(spatial) / Var(nonspatial). Throws on zero nonspatial variance.
double svif(const CoefSample& spatial, const CoefSample& nonspatial);

// (Var_u - Var_r) / Var_u. Negative when the restricted sample is wider.
double svrf(const CoefSample& unrestricted, const CoefSample& restricted);

// Fraction of credible intervals excluding true_beta (default 0).
double type_s_rate(const std::vector<std::pair<double, double>>& intervals,
                   double true_beta = 0.0);

// Type-7 linearly interpolated quantile of a sample.
double quantile(const Eigen::VectorXd& v, double p);

struct DrawSummary {
    double mean = 0.0;
    double sd = 0.0;
    double q025 = 0.0;
    double q975 = 0.0;
};

DrawSummary summarize_draws(const Eigen::VectorXd& draws);

struct ReplicateResult {
    double post_mean = 0.0;
    double post_sd = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

struct StudyMetrics {
    double mean = 0.0;      // average of posterior means
    double sd = 0.0;        // average posterior SD
    double coverage = 0.0;  // fraction of intervals containing the truth
    double mse = 0.0;       // average squared error of posterior means
};

StudyMetrics study_metrics(const std::vector<ReplicateResult>& replicates, double truth);

}  // namespace rsfm
