#include "rsfm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsfm {

double sample_variance(const Eigen::VectorXd& v) {
    if (v.size() < 2) throw std::invalid_argument("sample_variance: need at least 2 draws");
    double m = v.mean();
    return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

double svif(const CoefSample& spatial, const CoefSample& nonspatial) {
    double vn = sample_variance(nonspatial.draws);
    if (vn <= 0.0) throw std::invalid_argument("svif: nonspatial sample has zero variance");
    return sample_variance(spatial.draws) / vn;
}

double svrf(const CoefSample& unrestricted, const CoefSample& restricted) {
    double vu = sample_variance(unrestricted.draws);
    if (vu <= 0.0) throw std::invalid_argument("svrf: unrestricted sample has zero variance");
    return (vu - sample_variance(restricted.draws)) / vu;
}

double type_s_rate(const std::vector<std::pair<double, double>>& intervals, double true_beta) {
    if (intervals.empty()) throw std::invalid_argument("type_s_rate: no intervals");
    int excluded = 0;
    for (auto [lo, hi] : intervals) {
        if (lo > hi) throw std::invalid_argument("type_s_rate: interval with lo > hi");
        if (true_beta < lo || true_beta > hi) ++excluded;
    }
    return static_cast<double>(excluded) / static_cast<double>(intervals.size());
}

double quantile(const Eigen::VectorXd& v, double p) {
    if (v.size() == 0) throw std::invalid_argument("quantile: empty sample");
    std::vector<double> s(v.data(), v.data() + v.size());
    std::sort(s.begin(), s.end());
    double h = (static_cast<double>(s.size()) - 1.0) * p;
    auto lo = static_cast<std::size_t>(std::floor(h));
    auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - std::floor(h)) * (s[hi] - s[lo]);
}

DrawSummary summarize_draws(const Eigen::VectorXd& draws) {
    if (draws.size() < 2) throw std::invalid_argument("summarize_draws: need at least 2 draws");
    DrawSummary s;
    s.mean = draws.mean();
    s.sd = std::sqrt(sample_variance(draws));
    s.q025 = quantile(draws, 0.025);
    s.q975 = quantile(draws, 0.975);
    return s;
}

StudyMetrics study_metrics(const std::vector<ReplicateResult>& replicates, double truth) {
    if (replicates.empty()) throw std::invalid_argument("study_metrics: no replicates");
    StudyMetrics m;
    for (const auto& r : replicates) {
        m.mean += r.post_mean;
        m.sd += r.post_sd;
        m.coverage += (truth >= r.lo && truth <= r.hi) ? 1.0 : 0.0;
        m.mse += (r.post_mean - truth) * (r.post_mean - truth);
    }
    double k = static_cast<double>(replicates.size());
    m.mean /= k;
    m.sd /= k;
    m.coverage /= k;
    m.mse /= k;
    return m;
}

}  // namespace rsfm
