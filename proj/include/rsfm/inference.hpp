#pragma once

#include "rsfm/graph.hpp"
#include "rsfm/survival.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rsfm {

/// Weakly informative defaults. Gamma is parameterized shape/rate.
struct PriorSpec {
    double theta_shape = 0.001;  // positive baseline parameters
    double theta_rate = 0.001;
    double beta_precision = 0.001;  // Normal(0, precision)
    double mu_precision = 0.001;    // unconstrained lognormal location
    double tau_shape = 0.5;         // ICAR precision tau_psi
    double tau_rate = 0.0005;
    double eps_tau_shape = 0.5;  // unstructured frailty precision
    double eps_tau_rate = 0.0005;

    void validate() const;
};

struct ModelSpec {
    Family family = Family::weibull;
    bool intercept = false;
    bool spatial = true;
    bool eps = false;       // unstructured individual frailty
    bool tau_gibbs = true;  // Gibbs update of tau_psi from its conditional
    // Joint beta/psi proposal along the likelihood-flat direction that appears
    // when a covariate is area-constant. Without it the chain barely explores
    // that direction and a confounded coefficient's posterior width collapses
    // toward the non-spatial fit. ridge_scale_cap bounds the adapted proposal
    // scale; raise it (e.g. to infinity) for exhaustive ridge exploration at
    // the cost of much longer chains to converge.
    bool ridge_moves = true;
    double ridge_scale_cap = 0.06;
    PriorSpec priors;
};

struct McmcConfig {
    int iterations = 15000;
    int burn_in = 5000;
    int thin = 2;
    std::uint64_t seed = 0;
};

struct ParameterState {
    BaselineFamily theta;
    Eigen::VectorXd beta;
    double tau_psi = 1.0;
    Eigen::VectorXd psi;  // empty when non-spatial
    Eigen::VectorXd eps;  // empty unless enabled
    double tau_eps = 1.0;
};

struct PosteriorDraws {
    std::vector<std::string> theta_names;
    std::vector<std::string> beta_names;
    Eigen::MatrixXd theta;    // S x q
    Eigen::MatrixXd beta;     // S x p
    Eigen::VectorXd tau_psi;  // S, empty when non-spatial
    Eigen::MatrixXd psi;      // S x n, 0 cols when non-spatial
    Eigen::MatrixXd eps;      // S x N, 0 cols unless enabled

    std::uint64_t seed = 0;
    int iterations = 0;
    int burn_in = 0;
    int thin = 0;
    std::map<std::string, double> acceptance;

    int n_draws() const { return static_cast<int>(theta.rows()); }
    ParameterState state_at(int s, Family family) const;
};

// Log posterior density (up to a constant): frailty log-likelihood plus the
// ICAR term (n-1)/2 log tau - tau/2 sum_{i~j} (psi_i - psi_j)^2 and the
// parameter priors. Returns -inf outside the valid region.
double log_posterior(const ParameterState& state, const SurvivalDataset& data,
                     const AreaGraph* graph, const ModelSpec& spec);

// Adaptive random-walk Metropolis-within-Gibbs over blocks
// {log theta, beta, psi (single site), log tau_psi}, with sum-to-zero
// re-centering of psi after every sweep. Proposal scales adapt during burn-in
// toward acceptance rates in [0.25, 0.45]. graph may be null only for a
// non-spatial spec.
PosteriorDraws fit_unrestricted(const SurvivalDataset& data, const AreaGraph* graph,
                                const ModelSpec& spec, const McmcConfig& mcmc);

// ICAR pairwise quadratic form sum_{i~j} (psi_i - psi_j)^2.
double icar_quadratic(const AreaGraph& graph, const Eigen::VectorXd& psi);

double gamma_log_pdf(double x, double shape, double rate);

struct McmcDiagnostics {
    std::vector<std::string> names;
    std::vector<double> ess;
    std::vector<double> rhat;  // split-Rhat from chain halves
    std::map<std::string, double> acceptance;
    std::vector<std::string> warnings;
};

double effective_sample_size(const Eigen::VectorXd& chain);
double split_rhat(const std::vector<Eigen::VectorXd>& chains);
McmcDiagnostics mcmc_diagnostics(const PosteriorDraws& draws);

}  // namespace rsfm
