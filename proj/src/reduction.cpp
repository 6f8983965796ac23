#include "rsfm/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsfm {

namespace {

void check_alignment(const Eigen::MatrixXd& X, const MembershipVector& G) {
    if (X.rows() != G.n_units()) {
        throw std::invalid_argument("reduce: X rows and membership length differ");
    }
}

// Solver for (X^T X) y = b with a conditioning guard.
Eigen::LDLT<Eigen::MatrixXd> gram_factorization(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd gram = X.transpose() * X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) {
        throw std::invalid_argument(
            "design matrix is rank deficient or ill conditioned (Gram condition number > 1e12)");
    }
    return gram.ldlt();
}

}  // namespace

MembershipVector MembershipVector::from_labels(const std::vector<int>& labels, int n_areas) {
    MembershipVector G;
    G.idx = labels;
    G.counts = Eigen::VectorXd::Zero(n_areas);
    for (int a : labels) {
        if (a < 1 || a > n_areas) {
            throw std::invalid_argument("membership: area label outside 1.." +
                                        std::to_string(n_areas));
        }
        G.counts[a - 1] += 1.0;
    }
    return G;
}

Eigen::MatrixXd reduce(const Eigen::MatrixXd& X, const MembershipVector& G) {
    check_alignment(X, G);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(G.n_areas(), X.cols());
    for (int l = 0; l < X.rows(); ++l) out.row(G.idx[l] - 1) += X.row(l);
    return out;
}

Eigen::MatrixXd reduce_columns(const Eigen::MatrixXd& A, const MembershipVector& G) {
    return reduce(A.transpose(), G).transpose();
}

Eigen::VectorXd expand(const Eigen::VectorXd& psi, const MembershipVector& G) {
    if (psi.size() != G.n_areas()) {
        throw std::invalid_argument("expand: psi length and area count differ");
    }
    Eigen::VectorXd out(G.n_units());
    for (int l = 0; l < out.size(); ++l) out[l] = psi[G.idx[l] - 1];
    return out;
}

Projection project_full(const Eigen::MatrixXd& X, const Eigen::VectorXd& Psi) {
    if (X.rows() != Psi.size()) throw std::invalid_argument("project_full: dimension mismatch");
    auto gram = gram_factorization(X);
    Projection p;
    p.onto = X * gram.solve(X.transpose() * Psi);
    p.resid = Psi - p.onto;
    return p;
}

ReductionPlan::ReductionPlan(const Eigen::MatrixXd& X, const MembershipVector& G)
    : X_(X), G_(G) {
    check_alignment(X, G);
    if ((G.counts.array() <= 0.0).any()) {
        throw std::invalid_argument("ReductionPlan: every area needs at least one unit");
    }
    auto gram = gram_factorization(X);
    Xr_ = reduce(X, G);
    gram_iXr_ = gram.solve(Xr_.transpose());
    mean_proj_ = Eigen::MatrixXd::Identity(G.n_areas(), G.n_areas()) -
                 G.counts.cwiseInverse().asDiagonal() * (Xr_ * gram_iXr_);
}

Eigen::VectorXd ReductionPlan::beta_restricted(const Eigen::VectorXd& beta_sf,
                                               const Eigen::VectorXd& psi_sf) const {
    return beta_sf + gram_iXr_ * psi_sf;
}

Eigen::VectorXd ReductionPlan::psi_restricted(const Eigen::VectorXd& psi_sf) const {
    return mean_proj_ * psi_sf;
}

Eigen::VectorXd ReductionPlan::psi_tilde(const Eigen::VectorXd& psi_sf) const {
    // (I - P) Psi = expand(psi) - X (X^T X)^{-1} Xr^T psi, by property 3.
    Eigen::VectorXd resid = expand(psi_sf, G_) - X_ * (gram_iXr_ * psi_sf);
    return resid - expand(psi_restricted(psi_sf), G_);
}

Eigen::VectorXd beta_restricted(const Eigen::VectorXd& beta_sf, const Eigen::VectorXd& psi_sf,
                                const Eigen::MatrixXd& X, const MembershipVector& G) {
    return ReductionPlan(X, G).beta_restricted(beta_sf, psi_sf);
}

PsiRestriction psi_restricted(const Eigen::VectorXd& psi_sf, const Eigen::MatrixXd& X,
                              const MembershipVector& G) {
    ReductionPlan plan(X, G);
    PsiRestriction r;
    r.psi_rsf = plan.psi_restricted(psi_sf);
    r.psi_tilde = plan.psi_tilde(psi_sf);
    return r;
}

double PropertyReport::worst() const {
    return *std::max_element(max_abs_err.begin(), max_abs_err.end());
}

bool PropertyReport::all_within(double tol) const { return worst() <= tol; }

PropertyReport operator_properties_check(const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2,
                                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& P,
                                         const Eigen::VectorXd& r, double c,
                                         const MembershipVector& G) {
    auto max_abs = [](const Eigen::MatrixXd& A) { return A.cwiseAbs().maxCoeff(); };
    Eigen::VectorXd R = expand(r, G);
    Eigen::MatrixXd x1 = reduce(X1, G);
    Eigen::MatrixXd x2 = reduce(X2, G);

    PropertyReport rep;
    rep.max_abs_err.resize(7);
    rep.max_abs_err[0] = max_abs(reduce(X1 + X2, G) - (x1 + x2));
    rep.max_abs_err[1] = max_abs(reduce(c * X1, G) - c * x1);
    rep.max_abs_err[2] = max_abs(X1.transpose() * R - x1.transpose() * r);
    rep.max_abs_err[3] = max_abs(reduce_columns(Q * X1.transpose(), G) - Q * x1.transpose());
    rep.max_abs_err[4] = max_abs(reduce(X1 * P * X1.transpose(), G) - x1 * P * X1.transpose());
    rep.max_abs_err[5] =
        max_abs(reduce_columns(reduce(X1 * P * X1.transpose(), G), G) - x1 * P * x1.transpose());
    rep.max_abs_err[6] =
        max_abs(reduce(X1 * P * X1.transpose() * R, G) - x1 * P * x1.transpose() * r);
    return rep;
}

}  // namespace rsfm
