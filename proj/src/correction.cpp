#include "rsfm/correction.hpp"

#include "rsfm/diagnostics.hpp"
#include "rsfm/graph.hpp"
#include "rsfm/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace rsfm {

RestrictedDraws restrict_draws(const PosteriorDraws& draws, const Eigen::MatrixXd& X,
                               const MembershipVector& G, const CorrectionOptions& options) {
    const int S = draws.n_draws();
    const int p = static_cast<int>(X.cols());
    const int n = G.n_areas();
    const int N = G.n_units();
    if (S == 0) throw std::invalid_argument("restrict_draws: no draws");
    if (draws.beta.cols() != p) {
        throw std::invalid_argument("restrict_draws: beta draws have " +
                                    std::to_string(draws.beta.cols()) + " columns, X has " +
                                    std::to_string(p));
    }
    if (draws.psi.cols() != n) {
        throw std::invalid_argument("restrict_draws: psi draws have " +
                                    std::to_string(draws.psi.cols()) + " columns, graph has " +
                                    std::to_string(n) + " areas");
    }
    if (draws.eps.cols() > 0 && draws.eps.cols() != N) {
        throw std::invalid_argument("restrict_draws: eps draws do not match the dataset size");
    }

    ReductionPlan plan(X, G);
    RestrictedDraws out;
    out.theta_names = draws.theta_names;
    out.beta_names = draws.beta_names;
    out.theta = draws.theta;
    out.tau_psi = draws.tau_psi;
    out.beta.resize(S, p);
    out.psi.resize(S, n);
    if (options.emit_eps) out.eps.resize(S, N);
    out.psi_tilde_area_sd = Eigen::VectorXd::Zero(n);

    Eigen::VectorXd area_sq = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < S; ++s) {
        Eigen::VectorXd psi_sf = draws.psi.row(s).transpose();
        out.beta.row(s) = plan.beta_restricted(draws.beta.row(s).transpose(), psi_sf).transpose();
        out.psi.row(s) = plan.psi_restricted(psi_sf).transpose();
        Eigen::VectorXd tilde = plan.psi_tilde(psi_sf);
        area_sq.setZero();
        for (int l = 0; l < N; ++l) area_sq[G.idx[l] - 1] += tilde[l] * tilde[l];
        // tilde has zero mean within each area, so this is the area SD.
        out.psi_tilde_area_sd += (area_sq.array() / G.counts.array()).sqrt().matrix();
        if (options.emit_eps) {
            if (draws.eps.cols() > 0) tilde += draws.eps.row(s).transpose();
            out.eps.row(s) = tilde.transpose();
        }
    }
    out.psi_tilde_area_sd /= static_cast<double>(S);
    return out;
}

void write_restricted_csv(const RestrictedDraws& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << std::setprecision(17);
    std::vector<std::string> cols = r.theta_names;
    for (int j = 1; j <= r.beta.cols(); ++j) cols.push_back("beta_" + std::to_string(j) + "_rsf");
    if (r.tau_psi.size() > 0) cols.push_back("tau_psi");
    for (int i = 1; i <= r.psi.cols(); ++i) cols.push_back("psi_" + std::to_string(i) + "_rsf");
    for (int l = 1; l <= r.eps.cols(); ++l) cols.push_back("eps_" + std::to_string(l) + "_rsf");
    for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
    out << "\n";
    for (int s = 0; s < r.n_draws(); ++s) {
        bool first = true;
        auto emit = [&](double v) {
            if (!first) out << ",";
            out << v;
            first = false;
        };
        for (int k = 0; k < r.theta.cols(); ++k) emit(r.theta(s, k));
        for (int j = 0; j < r.beta.cols(); ++j) emit(r.beta(s, j));
        if (r.tau_psi.size() > 0) emit(r.tau_psi[s]);
        for (int i = 0; i < r.psi.cols(); ++i) emit(r.psi(s, i));
        for (int l = 0; l < r.eps.cols(); ++l) emit(r.eps(s, l));
        out << "\n";
    }
}

RestrictSummary restrict_from_file(const std::string& draws_path, const std::string& data_path,
                                   const std::string& graph_path, const std::string& out_path,
                                   Family family, const CorrectionOptions& options) {
    PosteriorDraws draws = load_draws_csv(draws_path, family);
    SurvivalDataset data = load_dataset_csv(data_path);
    AreaGraph graph = load_adjacency(graph_path, data.n_areas);
    if (graph.n != static_cast<int>(draws.psi.cols())) {
        throw std::runtime_error("restrict: draws have " + std::to_string(draws.psi.cols()) +
                                 " psi columns but the graph has " + std::to_string(graph.n) +
                                 " areas");
    }
    MembershipVector G = MembershipVector::from_labels(data.area, graph.n);
    RestrictedDraws r = restrict_draws(draws, data.X, G, options);
    write_restricted_csv(r, out_path);

    std::string summary_path = out_path + ".summary.csv";
    std::ofstream sum(summary_path);
    if (!sum) throw std::runtime_error("cannot write file: " + summary_path);
    sum << "parameter,mean,sd,q2.5,q97.5\n";
    sum << std::setprecision(10);
    auto emit = [&](const std::string& name, const Eigen::VectorXd& col) {
        DrawSummary s = summarize_draws(col);
        sum << name << "," << s.mean << "," << s.sd << "," << s.q025 << "," << s.q975 << "\n";
    };
    for (int k = 0; k < r.theta.cols(); ++k) emit(r.theta_names[k], r.theta.col(k));
    if (r.tau_psi.size() > 0) emit("tau_psi", r.tau_psi);
    for (int j = 0; j < r.beta.cols(); ++j) {
        emit("beta_" + std::to_string(j + 1) + "_rsf", r.beta.col(j));
    }
    for (int i = 0; i < r.psi.cols(); ++i) {
        emit("psi_" + std::to_string(i + 1) + "_rsf", r.psi.col(i));
    }

    RestrictSummary info;
    info.n_draws = r.n_draws();
    info.n_areas = static_cast<int>(r.psi.cols());
    info.n_covariates = static_cast<int>(r.beta.cols());
    info.out_path = out_path;
    info.summary_path = summary_path;
    return info;
}

}  // namespace rsfm
