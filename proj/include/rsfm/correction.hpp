#pragma once

#include "rsfm/inference.hpp"
#include "rsfm/reduction.hpp"

#include <Eigen/Dense>

#include <string>

namespace rsfm {

/// Restricted-model draws obtained by transforming unrestricted draws.
/// Hyperparameters (theta, tau_psi) are passed through unchanged.
struct RestrictedDraws {
    std::vector<std::string> theta_names;
    std::vector<std::string> beta_names;
    Eigen::MatrixXd theta;    // S x q, identical to source
    Eigen::VectorXd tau_psi;  // identical to source
    Eigen::MatrixXd beta;     // S x p, beta_rsf
    Eigen::MatrixXd psi;      // S x n, psi_rsf
    Eigen::MatrixXd eps;      // S x N, eps_rsf = eps_sf + psi_tilde; 0 cols unless emitted
    Eigen::VectorXd psi_tilde_area_sd;  // per-area SD of psi_tilde, averaged over draws

    int n_draws() const { return static_cast<int>(beta.rows()); }
};

struct CorrectionOptions {
    bool emit_eps = false;  // emit the full N-length eps_rsf per draw
};

// Per-draw projection correction via the reduced formulas. The reduced design
// and Gram factorization are computed once and reused across all draws.
RestrictedDraws restrict_draws(const PosteriorDraws& draws, const Eigen::MatrixXd& X,
                               const MembershipVector& G, const CorrectionOptions& options = {});

struct RestrictSummary {
    int n_draws = 0;
    int n_areas = 0;
    int n_covariates = 0;
    std::string out_path;
    std::string summary_path;
};

// Two-step workflow entry point: read unrestricted draws (from any producer
// matching the schema), the dataset they were fitted on, and the adjacency
// file; write restricted draws plus a mean/SD/2.5%/97.5% summary CSV.
RestrictSummary restrict_from_file(const std::string& draws_path, const std::string& data_path,
                                   const std::string& graph_path, const std::string& out_path,
                                   Family family, const CorrectionOptions& options = {});

void write_restricted_csv(const RestrictedDraws& r, const std::string& path);

}  // namespace rsfm
