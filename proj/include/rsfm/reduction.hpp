#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace rsfm {

/// Area membership of N sample units, 1-indexed area labels in 1..n.
struct MembershipVector {
    std::vector<int> idx;       // length N
    Eigen::VectorXd counts;     // length n, n_i = #units in area i

    int n_units() const { return static_cast<int>(idx.size()); }
    int n_areas() const { return static_cast<int>(counts.size()); }

    static MembershipVector from_labels(const std::vector<int>& labels, int n_areas);
};

// Group-wise column sums: result(i, k) = sum over units in area i of X(unit, k).
Eigen::MatrixXd reduce(const Eigen::MatrixXd& X, const MembershipVector& G);

// Column-orientation reduction, defined as row-reduction of the transpose:
// A (m x N) -> (m x n).
Eigen::MatrixXd reduce_columns(const Eigen::MatrixXd& A, const MembershipVector& G);

// Repeat area values down to unit level: result(l) = psi(G_l).
Eigen::VectorXd expand(const Eigen::VectorXd& psi, const MembershipVector& G);

struct Projection {
    Eigen::VectorXd onto;   // P Psi
    Eigen::VectorXd resid;  // (I - P) Psi
};

// Full-dimension decomposition via P = X (X^T X)^{-1} X^T. Rejects design
// matrices whose Gram matrix condition number exceeds 1e12.
Projection project_full(const Eigen::MatrixXd& X, const Eigen::VectorXd& Psi);

struct PsiRestriction {
    Eigen::VectorXd psi_rsf;    // per-area means of (I - P) Psi, length n
    Eigen::VectorXd psi_tilde;  // unit-level deviations from those means, length N
};

// Precomputed reduced-dimension machinery shared across posterior draws:
// X reduced to areas, the Gram factorization, and the n x n mean-projection.
class ReductionPlan {
  public:
    ReductionPlan(const Eigen::MatrixXd& X, const MembershipVector& G);

    // beta_sf + (X^T X)^{-1} (X (r) G)^T psi_sf
    Eigen::VectorXd beta_restricted(const Eigen::VectorXd& beta_sf,
                                    const Eigen::VectorXd& psi_sf) const;

    // (I_n - n^{-1} (X (r) G)(X^T X)^{-1}(X (r) G)^T) psi_sf
    Eigen::VectorXd psi_restricted(const Eigen::VectorXd& psi_sf) const;

    // resid of project_full minus expand(psi_restricted), computed at n-scale
    // except for one X-by-vector product.
    Eigen::VectorXd psi_tilde(const Eigen::VectorXd& psi_sf) const;

    const Eigen::MatrixXd& reduced_design() const { return Xr_; }
    const MembershipVector& membership() const { return G_; }

  private:
    const Eigen::MatrixXd X_;
    MembershipVector G_;
    Eigen::MatrixXd Xr_;       // n x p
    Eigen::MatrixXd gram_iXr_; // p x n, (X^T X)^{-1} (X (r) G)^T
    Eigen::MatrixXd mean_proj_; // n x n, I - n^{-1} Xr (X^T X)^{-1} Xr^T
};

Eigen::VectorXd beta_restricted(const Eigen::VectorXd& beta_sf, const Eigen::VectorXd& psi_sf,
                                const Eigen::MatrixXd& X, const MembershipVector& G);

PsiRestriction psi_restricted(const Eigen::VectorXd& psi_sf, const Eigen::MatrixXd& X,
                              const MembershipVector& G);

struct PropertyReport {
    std::vector<double> max_abs_err;  // one entry per property 1..7
    double worst() const;
    bool all_within(double tol) const;
};

// Checks the seven reduction-operator identities on the given operands.
// R is built internally as expand(r, G).
PropertyReport operator_properties_check(const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2,
                                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& P,
                                         const Eigen::VectorXd& r, double c,
                                         const MembershipVector& G);

}  // namespace rsfm
