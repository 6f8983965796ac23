#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rsfm {

enum class Family { exponential, weibull, lognormal, gamma };

Family family_from_string(const std::string& name);
std::string family_name(Family f);
int family_param_count(Family f);
std::vector<std::string> family_param_names(Family f);

/// Parametric baseline. Parameter meaning by family:
///   exponential: p1 = lambda (rate), p2 unused
///   weibull:     p1 = alpha (shape), p2 = lambda (scale of t^alpha)
///   lognormal:   p1 = mu (unconstrained), p2 = sigma > 0
///   gamma:       p1 = alpha (shape), p2 = lambda (rate)
struct BaselineFamily {
    Family family = Family::weibull;
    double p1 = 1.0;
    double p2 = 1.0;

    void validate() const;  // throws std::invalid_argument on bad parameters
};

// h0(t), H0(t) = -log S0(t), and log-scale accessors used by the likelihood.
double baseline_hazard(const BaselineFamily& fam, double t);
double baseline_cumhazard(const BaselineFamily& fam, double t);
double baseline_log_hazard(const BaselineFamily& fam, double t);
double baseline_log_survival(const BaselineFamily& fam, double t);  // = -H0(t)
double baseline_density(const BaselineFamily& fam, double t);

// S(t | linpred) = exp{-H0(t) e^linpred} under proportional hazards.
double survival_fn(const BaselineFamily& fam, double t, double linpred);

// Mixture cure transform: c + (1 - c) * s_star, with c in [0,1).
double cure_survival(double c, double s_star);

enum class Censor : std::uint8_t { event, right, left, interval };

Censor censor_from_string(const std::string& name);
std::string censor_name(Censor c);

struct Record {
    double t1 = 0.0;  // event/censoring time, or lower interval bound
    double t2 = 0.0;  // upper interval bound (interval records only)
    Censor censor = Censor::event;
};

struct SurvivalDataset {
    std::vector<Record> records;
    std::vector<int> area;           // 1-indexed, aligned with records
    Eigen::MatrixXd X;               // N x p design matrix
    std::vector<std::string> covariate_names;
    int n_areas = 0;

    int size() const { return static_cast<int>(records.size()); }
    int n_covariates() const { return static_cast<int>(X.cols()); }
    void validate() const;  // index ranges, dimensions, full column rank
};

// Number of times a linear predictor was clamped to [-700, 700] since start.
std::int64_t linpred_clamp_count();

// Full frailty log-likelihood under the four censoring classes.
// linpred_ij = x_ij beta + psi_{area_ij} + eps_ij (eps optional).
// Returns -inf (never throws) for impossible configurations, e.g. an
// interval record whose survival difference is numerically nonpositive.
double log_likelihood(const SurvivalDataset& data, const BaselineFamily& fam,
                      const Eigen::VectorXd& beta, const Eigen::VectorXd& psi,
                      const Eigen::VectorXd* eps = nullptr);

// Single-record contribution given precomputed baseline quantities.
double record_log_likelihood(const BaselineFamily& fam, const Record& rec, double linpred);

}  // namespace rsfm
