// End-to-end acceptance checks. Each criterion prints a single PASS/FAIL line;
// the exit status is the number of failed criteria. Run with a list of
// criterion numbers (1-8), or no arguments for all of them.

#include "rsfm/correction.hpp"
#include "rsfm/diagnostics.hpp"
#include "rsfm/graph.hpp"
#include "rsfm/inference.hpp"
#include "rsfm/reduction.hpp"
#include "rsfm/simulation.hpp"
#include "rsfm/survival.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace rsfm;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = normal(rng);
    return M;
}

MembershipVector random_membership(std::mt19937_64& rng, int N, int n) {
    std::vector<int> labels(N);
    for (int i = 0; i < n; ++i) labels[i] = i + 1;
    for (int i = n; i < N; ++i) labels[i] = 1 + static_cast<int>(rng() % n);
    return MembershipVector::from_labels(labels, n);
}

// ---------------------------------------------------------------------------
// 1. Reduction-operator identity suite: 500 random instances, tol 1e-9, <10 s.
bool criterion1(std::string& detail) {
    auto start = Clock::now();
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        int n = 2 + static_cast<int>(rng() % 19);
        int N = n + static_cast<int>(rng() % (201 - n));
        int p = 1 + static_cast<int>(rng() % 6);
        MembershipVector G = random_membership(rng, N, n);
        PropertyReport rep = operator_properties_check(
            random_matrix(rng, N, p), random_matrix(rng, N, p), random_matrix(rng, p, p),
            random_matrix(rng, p, p), random_matrix(rng, n, 1), unif(rng), G);
        worst = std::max(worst, rep.worst());
        if (!rep.all_within(1e-9)) {
            detail = "property violation at trial " + std::to_string(trial) +
                     ", max err " + std::to_string(rep.worst());
            return false;
        }
    }
    double elapsed = seconds_since(start);
    std::ostringstream os;
    os << "500 instances, worst discrepancy " << worst << ", " << elapsed << " s";
    detail = os.str();
    return elapsed < 10.0;
}

// ---------------------------------------------------------------------------
// 2. Reduced vs full-dimension correction: 1000 draws, N=2000, n=92, p=5,
//    agreement within 1e-8, < 60 s.
bool criterion2(std::string& detail) {
    auto start = Clock::now();
    std::mt19937_64 rng(1002);
    const int N = 2000, n = 92, p = 5, S = 1000;
    MembershipVector G = random_membership(rng, N, n);
    Eigen::MatrixXd X = random_matrix(rng, N, p);
    ReductionPlan plan(X, G);
    Eigen::LDLT<Eigen::MatrixXd> gram(X.transpose() * X);

    double worst = 0.0;
    for (int s = 0; s < S; ++s) {
        Eigen::VectorXd beta = random_matrix(rng, p, 1);
        Eigen::VectorXd psi = random_matrix(rng, n, 1);
        Eigen::VectorXd beta_red = plan.beta_restricted(beta, psi);
        Eigen::VectorXd psi_red = plan.psi_restricted(psi);

        Eigen::VectorXd Psi = expand(psi, G);
        Eigen::VectorXd coef = gram.solve(X.transpose() * Psi);
        Eigen::VectorXd beta_full = beta + coef;
        Eigen::VectorXd Pperp = Psi - X * coef;
        Eigen::VectorXd psi_full = reduce(Pperp, G).array() / G.counts.array();

        worst = std::max(worst, (beta_red - beta_full).cwiseAbs().maxCoeff());
        worst = std::max(worst, (psi_red - psi_full).cwiseAbs().maxCoeff());
    }
    double elapsed = seconds_since(start);
    std::ostringstream os;
    os << "max |reduced - full| = " << worst << " over " << S << " draws, " << elapsed << " s";
    detail = os.str();
    return worst <= 1e-8 && elapsed < 60.0;
}

// ---------------------------------------------------------------------------
// 3. Benchmark: full-path time monotone over the N grid and >= 5x the reduced
//    per-draw phase at N = 11776. Budget < 15 min.
bool criterion3(std::string& detail) {
    auto start = Clock::now();
    BenchConfig cfg;  // n = 92, grid {2..128}, S = 5000
    cfg.repetitions = 1;
    cfg.seed = 1003;
    BenchResult result = run_reduction_bench(cfg);
    if (result.equivalence_max_err > 1e-8) {
        detail = "equivalence check failed: " + std::to_string(result.equivalence_max_err);
        return false;
    }
    bool monotone = true;
    double prev = 0.0;
    for (int upa : cfg.units_per_area) {
        double t = result.seconds(92 * upa, "full", "total");
        if (t <= prev) monotone = false;
        prev = t;
    }
    double full_big = result.seconds(11776, "full", "total");
    double reduced_big = result.seconds(11776, "reduced", "per_draw");
    double ratio = full_big / reduced_big;
    double elapsed = seconds_since(start);
    std::ostringstream os;
    os << "monotone=" << (monotone ? "yes" : "no") << ", full/reduced at N=11776: " << ratio
       << "x, " << elapsed << " s";
    detail = os.str();
    return monotone && ratio >= 5.0 && elapsed < 900.0;
}

// ---------------------------------------------------------------------------
// Shared study runner for criteria 4 and 5.
StudyResult run_study(bool confounded, std::uint64_t seed) {
    StudyConfig cfg;
    cfg.scenario = ScenarioConfig::lattice_default();  // 92 areas, 10 units/area
    cfg.scenario.confounded = confounded;
    cfg.censoring_levels = {0.0, 0.5};
    cfg.replicates = 100;
    cfg.mcmc = {6000, 2000, 2, 0};
    cfg.seed = seed;
    cfg.threads = 1;
    return run_recovery_study(cfg);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// 4. Recovery study without confounding: |mean(beta1)| within 0.05 of 0.3 in
//    magnitude, RSFM coverage in [0.88, 0.99], SVIF(beta2) centered in
//    [0.7, 1.5]. Budget < 2 h.
bool criterion4(std::string& detail) {
    auto start = Clock::now();
    StudyResult st = run_study(false, 2024);
    bool ok = true;
    std::ostringstream os;

    double b1 = std::abs(st.row(0.0, "SFM", "beta_1").mean);
    os << "|mean(b1)|=" << b1;
    ok = ok && std::abs(b1 - 0.3) <= 0.05;

    for (double lvl : {0.0, 0.5}) {
        for (const std::string& par : {"beta_1", "beta_2"}) {
            double cov = st.row(lvl, "RSFM", par).coverage;
            os << ", RSFM cov(" << par << "," << lvl << ")=" << cov;
            ok = ok && cov >= 0.88 && cov <= 0.99;
        }
    }

    auto it = st.svif.find("0/SFM/beta_2");
    double center = it == st.svif.end() || it->second.empty() ? -1.0 : median_of(it->second);
    os << ", SVIF(b2) median=" << center;
    ok = ok && center >= 0.7 && center <= 1.5;

    double elapsed = seconds_since(start);
    os << ", failed reps=" << st.failed_replicates << ", " << elapsed << " s";
    detail = os.str();
    return ok && elapsed < 7200.0;
}

// 5. Recovery study with confounding: SD(beta2) SFM >= 1.5x RSFM, MSE(beta2)
//    SFM >= 3x RSFM, SFM coverage < 0.90 while RSFM >= 0.88, and SFM coverage
//    degrades further at 50% censoring. Budget < 2 h.
bool criterion5(std::string& detail) {
    auto start = Clock::now();
    StudyResult st = run_study(true, 2025);
    std::ostringstream os;
    bool ok = true;

    const StudyRow& sfm0 = st.row(0.0, "SFM", "beta_2");
    const StudyRow& rsf0 = st.row(0.0, "RSFM", "beta_2");
    double sd_ratio = sfm0.sd / rsf0.sd;
    double mse_ratio = sfm0.mse / rsf0.mse;
    os << "SD ratio=" << sd_ratio << ", MSE ratio=" << mse_ratio << ", SFM cov=" << sfm0.coverage
       << ", RSFM cov=" << rsf0.coverage;
    ok = ok && sd_ratio >= 1.5;
    ok = ok && mse_ratio >= 3.0;
    ok = ok && sfm0.coverage < 0.90;
    ok = ok && rsf0.coverage >= 0.88;

    double sfm50 = st.row(0.5, "SFM", "beta_2").coverage;
    os << ", SFM cov@50%=" << sfm50;
    ok = ok && sfm50 < sfm0.coverage;

    double elapsed = seconds_since(start);
    os << ", failed reps=" << st.failed_replicates << ", " << elapsed << " s";
    detail = os.str();
    return ok && elapsed < 7200.0;
}

// ---------------------------------------------------------------------------
// 6. Likelihood oracle: f = h*S within 1e-8 on a t-grid, and S matches
//    1 - integral of f within 1e-6 by adaptive quadrature.
double simpson(const std::function<double(double)>& f, double a, double b) {
    double c = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
}

double adaptive_quad(const std::function<double(double)>& f, double a, double b, double tol,
                     int depth = 0) {
    double c = 0.5 * (a + b);
    double whole = simpson(f, a, b);
    double left = simpson(f, a, c), right = simpson(f, c, b);
    if (depth > 40 || std::abs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_quad(f, a, c, tol / 2, depth + 1) + adaptive_quad(f, c, b, tol / 2, depth + 1);
}

bool criterion6(std::string& detail) {
    std::mt19937_64 rng(1006);
    std::uniform_real_distribution<double> par(0.5, 3.0);
    double worst_identity = 0.0, worst_quad = 0.0;
    for (Family f : {Family::exponential, Family::weibull, Family::lognormal, Family::gamma}) {
        for (int trial = 0; trial < 20; ++trial) {
            BaselineFamily fam;
            fam.family = f;
            fam.p1 = par(rng);
            fam.p2 = par(rng);
            fam.validate();
            for (double t = 0.05; t <= 6.0; t += 0.2) {
                double fd = baseline_density(fam, t);
                double hs = baseline_hazard(fam, t) * std::exp(baseline_log_survival(fam, t));
                worst_identity =
                    std::max(worst_identity, std::abs(fd - hs) / std::max(1.0, std::abs(fd)));
            }
            auto density = [&](double t) { return baseline_density(fam, t); };
            for (double t : {0.5, 1.5, 4.0}) {
                double S = std::exp(baseline_log_survival(fam, t));
                double integral = adaptive_quad(density, 1e-12, t, 1e-10);
                worst_quad = std::max(worst_quad, std::abs(S - (1.0 - integral)));
            }
        }
    }
    std::ostringstream os;
    os << "max |f - hS| (rel) = " << worst_identity << ", max |S - (1 - int f)| = " << worst_quad;
    detail = os.str();
    return worst_identity <= 1e-8 && worst_quad <= 1e-6;
}

// ---------------------------------------------------------------------------
// 7. ICAR contract: zero-sum draws, empirical covariance within 10% relative
//    Frobenius error of pinv(Q), Q row sums zero within 1e-12.
bool criterion7(std::string& detail) {
    AreaGraph g = lattice_graph(4, 23);
    double tau = 0.75;
    PrecisionMatrix pm = icar_precision(g, tau);
    double rowsum = (pm.Q * Eigen::VectorXd::Ones(g.n)).cwiseAbs().maxCoeff();

    IcarSampler sampler(g, tau);
    std::mt19937_64 rng(1007);
    const int S = 5000;
    Eigen::MatrixXd draws(S, g.n);
    double worst_sum = 0.0;
    for (int s = 0; s < S; ++s) {
        Eigen::VectorXd psi = sampler.draw(rng);
        worst_sum = std::max(worst_sum, std::abs(psi.sum()));
        draws.row(s) = psi.transpose();
    }
    Eigen::MatrixXd centered = draws.rowwise() - draws.colwise().mean();
    Eigen::MatrixXd emp = centered.transpose() * centered / (S - 1.0);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(pm.Q);
    Eigen::MatrixXd pinv = cod.pseudoInverse();
    double rel = (emp - pinv).norm() / pinv.norm();

    std::ostringstream os;
    os << "max |sum psi| = " << worst_sum << ", rel Frobenius = " << rel
       << ", max row sum = " << rowsum;
    detail = os.str();
    return worst_sum <= 1e-10 && rel <= 0.10 && rowsum <= 1e-12;
}

// ---------------------------------------------------------------------------
// 8. Confounded synthetic pipeline: SVIF(confounded beta) > 3 for SFM vs NS,
//    SVRF(confounded beta) > 0.5 for RSFM vs SFM.
bool criterion8(std::string& detail) {
    ScenarioConfig cfg = ScenarioConfig::lattice_default();
    cfg.confounded = true;
    cfg.censoring = 0.0;
    cfg.seed = 1008;
    GeneratedData gen = generate_dataset(cfg, 0);
    AreaGraph graph = cfg.graph;

    ModelSpec sfm_spec, ns_spec;
    ns_spec.spatial = false;
    McmcConfig mcmc{6000, 2000, 2, 31};
    PosteriorDraws sfm = fit_unrestricted(gen.data, &graph, sfm_spec, mcmc);
    mcmc.seed = 32;
    PosteriorDraws ns = fit_unrestricted(gen.data, nullptr, ns_spec, mcmc);

    MembershipVector G = MembershipVector::from_labels(gen.data.area, graph.n);
    RestrictedDraws rsf = restrict_draws(sfm, gen.data.X, G, {});

    CoefSample sfm_b2{sfm.beta.col(1), "sfm"};
    CoefSample ns_b2{ns.beta.col(1), "ns"};
    CoefSample rsf_b2{rsf.beta.col(1), "rsf"};
    double inflation = svif(sfm_b2, ns_b2);
    double retraction = svrf(sfm_b2, rsf_b2);

    std::ostringstream os;
    os << "SVIF(beta_2) = " << inflation << ", SVRF(beta_2) = " << retraction;
    detail = os.str();
    return inflation > 3.0 && retraction > 0.5;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int a = 1; a < argc; ++a) which.push_back(std::atoi(argv[a]));
    if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8};

    using Fn = std::function<bool(std::string&)>;
    std::vector<std::pair<std::string, Fn>> criteria = {
        {"operator identity suite", criterion1},
        {"reduced-vs-full equivalence", criterion2},
        {"reduction benchmark scaling", criterion3},
        {"recovery study, no confounding", criterion4},
        {"recovery study, confounding", criterion5},
        {"likelihood identities", criterion6},
        {"ICAR sampling contract", criterion7},
        {"confounded pipeline SVIF/SVRF", criterion8},
    };

    int failures = 0;
    for (int k : which) {
        if (k < 1 || k > 8) {
            std::cerr << "unknown criterion " << k << "\n";
            ++failures;
            continue;
        }
        const auto& [name, fn] = criteria[k - 1];
        std::string detail;
        bool ok = false;
        try {
            ok = fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::cout << "criterion " << k << " (" << name << "): " << (ok ? "PASS" : "FAIL") << " — "
                  << detail << std::endl;
        if (!ok) ++failures;
    }
    return failures;
}
