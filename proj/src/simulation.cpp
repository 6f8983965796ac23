#include "rsfm/simulation.hpp"

#include "rsfm/correction.hpp"
#include "rsfm/diagnostics.hpp"
#include "rsfm/io.hpp"
#include "rsfm/reduction.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace rsfm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(master ^ splitmix64(a)) ^ b);
}

void standardize_column(Eigen::Ref<Eigen::VectorXd> col) {
    double m = col.mean();
    double sd = std::sqrt((col.array() - m).square().sum() /
                          static_cast<double>(col.size() - 1));
    if (!(sd > 0.0)) {
        throw std::invalid_argument("generate_dataset: degenerate covariate (zero variance)");
    }
    col = (col.array() - m) / sd;
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

ScenarioConfig ScenarioConfig::lattice_default() {
    ScenarioConfig cfg;
    // 23 x 4 rook lattice, 92 areas; the long axis plays the role of latitude
    // so the confounder spans many smoothly varying levels, as on a real map.
    const int rows = 23, cols = 4;
    cfg.graph = lattice_graph(rows, cols);
    cfg.latitude.resize(rows * cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) cfg.latitude[r * cols + c] = static_cast<double>(r);
    }
    return cfg;
}

GeneratedData generate_dataset(const ScenarioConfig& cfg, std::uint64_t rep_seed) {
    if (cfg.censoring < 0.0 || cfg.censoring >= 1.0) {
        throw std::invalid_argument("generate_dataset: censoring level must be in [0,1)");
    }
    if (connected_components(cfg.graph) != 1) {
        throw std::invalid_argument("generate_dataset: graph must be connected");
    }
    const int n = cfg.graph.n;
    const int N = n * cfg.units_per_area;
    std::mt19937_64 rng(derive_seed(cfg.seed, rep_seed));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    Eigen::VectorXd psi = IcarSampler(cfg.graph, cfg.tau_psi).draw(rng);

    GeneratedData out;
    out.data.n_areas = n;
    out.data.covariate_names = {"x1", "x2"};
    out.data.X.resize(N, 2);
    out.data.area.resize(N);
    out.data.records.resize(N);
    for (int i = 0, l = 0; i < n; ++i) {
        for (int j = 0; j < cfg.units_per_area; ++j, ++l) out.data.area[l] = i + 1;
    }
    for (int l = 0; l < N; ++l) {
        out.data.X(l, 0) = normal(rng);
        out.data.X(l, 1) = cfg.confounded ? cfg.latitude[out.data.area[l] - 1] : normal(rng);
    }
    standardize_column(out.data.X.col(0));
    standardize_column(out.data.X.col(1));

    Eigen::VectorXd times(N);
    for (int l = 0; l < N; ++l) {
        double lp = cfg.beta1 * out.data.X(l, 0) + cfg.beta2 * out.data.X(l, 1) +
                    psi[out.data.area[l] - 1];
        double e = -std::log(1.0 - uniform(rng));  // Exponential(1)
        times[l] = std::pow(e / std::exp(lp), 1.0 / cfg.alpha);
        out.data.records[l] = {times[l], 0.0, Censor::event};
    }
    if (cfg.censoring > 0.0) {
        double cutoff = quantile(times, 1.0 - cfg.censoring);
        for (int l = 0; l < N; ++l) {
            if (times[l] > cutoff) out.data.records[l] = {cutoff, 0.0, Censor::right};
        }
    }

    out.truth.alpha = cfg.alpha;
    out.truth.beta.resize(2);
    out.truth.beta << cfg.beta1, cfg.beta2;
    out.truth.tau_psi = cfg.tau_psi;
    out.truth.psi = psi;
    out.data.validate();
    return out;
}

void write_truth(const TruthRecord& truth, const std::string& path) {
    std::map<std::string, std::string> kv;
    std::ostringstream num;
    num << std::setprecision(17);
    auto str = [&num](double v) {
        num.str("");
        num << v;
        return num.str();
    };
    kv["alpha"] = str(truth.alpha);
    for (int j = 0; j < truth.beta.size(); ++j) {
        kv["beta_" + std::to_string(j + 1)] = str(truth.beta[j]);
    }
    kv["tau_psi"] = str(truth.tau_psi);
    std::string psi;
    for (int i = 0; i < truth.psi.size(); ++i) psi += (i ? "," : "") + str(truth.psi[i]);
    kv["psi"] = psi;
    write_key_values(kv, path);
}

TruthRecord load_truth(const std::string& path) {
    auto kv = load_key_values(path);
    TruthRecord t;
    t.alpha = std::stod(kv.at("alpha"));
    t.tau_psi = std::stod(kv.at("tau_psi"));
    std::vector<double> beta;
    for (int j = 1; kv.count("beta_" + std::to_string(j)); ++j) {
        beta.push_back(std::stod(kv.at("beta_" + std::to_string(j))));
    }
    t.beta = Eigen::Map<Eigen::VectorXd>(beta.data(), beta.size());
    auto psi_fields = split_csv_line(kv.at("psi"));
    t.psi.resize(psi_fields.size());
    for (std::size_t i = 0; i < psi_fields.size(); ++i) t.psi[i] = std::stod(psi_fields[i]);
    return t;
}

namespace {

struct ReplicateOutcome {
    bool ok = false;
    // [model][parameter] with models SFM, RSFM, NS and parameters
    // alpha, beta_1, beta_2 (NS has no correction; RSFM alpha = SFM alpha).
    std::map<std::string, std::map<std::string, ReplicateResult>> results;
    std::map<std::string, std::map<std::string, double>> svif;  // beta only
};

ReplicateResult summarize(const Eigen::VectorXd& draws) {
    DrawSummary s = summarize_draws(draws);
    return {s.mean, s.sd, s.q025, s.q975};
}

ReplicateOutcome run_replicate(const StudyConfig& cfg, double censoring, std::uint64_t level_idx,
                               std::uint64_t rep) {
    ScenarioConfig scen = cfg.scenario;
    scen.censoring = censoring;
    scen.seed = cfg.seed;
    GeneratedData gen = generate_dataset(scen, derive_seed(cfg.seed, level_idx, rep));

    ModelSpec sfm_spec;
    sfm_spec.family = Family::weibull;
    sfm_spec.spatial = true;
    ModelSpec ns_spec = sfm_spec;
    ns_spec.spatial = false;

    McmcConfig mcmc = cfg.mcmc;
    mcmc.seed = derive_seed(cfg.seed, level_idx * 2 + 1, rep);
    PosteriorDraws sfm = fit_unrestricted(gen.data, &scen.graph, sfm_spec, mcmc);
    mcmc.seed = derive_seed(cfg.seed, level_idx * 2 + 2, rep);
    PosteriorDraws ns = fit_unrestricted(gen.data, nullptr, ns_spec, mcmc);

    MembershipVector G = MembershipVector::from_labels(gen.data.area, scen.graph.n);
    RestrictedDraws rsfm = restrict_draws(sfm, gen.data.X, G);

    // The restricted model estimates beta + the design projection of the true
    // spatial field, not the generative beta itself. Score it against its own
    // estimand by removing that projection, so aggregation can compare every
    // model to the shared generative truth.
    ReductionPlan plan(gen.data.X, G);
    Eigen::VectorXd beta_star = plan.beta_restricted(gen.truth.beta, gen.truth.psi);

    ReplicateOutcome out;
    out.results["SFM"]["alpha"] = summarize(sfm.theta.col(0));
    out.results["RSFM"]["alpha"] = out.results["SFM"]["alpha"];
    out.results["NS"]["alpha"] = summarize(ns.theta.col(0));
    for (int j = 0; j < 2; ++j) {
        std::string param = "beta_" + std::to_string(j + 1);
        double shift = beta_star[j] - gen.truth.beta[j];
        out.results["SFM"][param] = summarize(sfm.beta.col(j));
        ReplicateResult rr = summarize(rsfm.beta.col(j));
        rr.post_mean -= shift;
        rr.lo -= shift;
        rr.hi -= shift;
        out.results["RSFM"][param] = rr;
        out.results["NS"][param] = summarize(ns.beta.col(j));
        double ns_var = sample_variance(ns.beta.col(j));
        out.svif["SFM"][param] = sample_variance(sfm.beta.col(j)) / ns_var;
        out.svif["RSFM"][param] = sample_variance(rsfm.beta.col(j)) / ns_var;
    }
    out.ok = true;
    return out;
}

}  // namespace

const StudyRow& StudyResult::row(double censoring, const std::string& model,
                                 const std::string& parameter) const {
    for (const auto& r : rows) {
        if (r.model == model && r.parameter == parameter &&
            std::abs(r.censoring - censoring) < 1e-12) {
            return r;
        }
    }
    throw std::out_of_range("study row not found: " + model + "/" + parameter);
}

StudyResult run_recovery_study(const StudyConfig& cfg) {
    if (cfg.replicates < 1) throw std::invalid_argument("run_recovery_study: replicates >= 1");
    const std::string scenario_name = cfg.scenario.confounded ? "confounded" : "independent";
    const std::vector<std::string> models{"SFM", "RSFM", "NS"};
    const std::vector<std::string> params{"alpha", "beta_1", "beta_2"};

    StudyResult result;
    for (std::size_t li = 0; li < cfg.censoring_levels.size(); ++li) {
        double level = cfg.censoring_levels[li];
        std::vector<ReplicateOutcome> outcomes(cfg.replicates);
        std::atomic<int> next{0};
        int n_threads = std::max(1, std::min(cfg.threads, cfg.replicates));
        auto worker = [&]() {
            for (int rep = next.fetch_add(1); rep < cfg.replicates; rep = next.fetch_add(1)) {
                try {
                    outcomes[rep] = run_replicate(cfg, level, li, rep);
                } catch (const std::exception&) {
                    outcomes[rep].ok = false;  // excluded, counted below
                }
            }
        };
        if (n_threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }

        for (const auto& model : models) {
            for (const auto& param : params) {
                std::vector<ReplicateResult> reps;
                for (const auto& o : outcomes) {
                    if (o.ok) reps.push_back(o.results.at(model).at(param));
                }
                if (reps.empty()) continue;
                double truth = param == "alpha"   ? cfg.scenario.alpha
                               : param == "beta_1" ? cfg.scenario.beta1
                                                   : cfg.scenario.beta2;
                StudyMetrics m = study_metrics(reps, truth);
                result.rows.push_back(
                    {scenario_name, level, model, param, m.mean, m.sd, m.coverage, m.mse});
            }
        }
        std::ostringstream key_prefix;
        key_prefix << level << "/";
        for (const auto& o : outcomes) {
            if (!o.ok) {
                ++result.failed_replicates;
                continue;
            }
            for (const auto& [model, per_param] : o.svif) {
                for (const auto& [param, value] : per_param) {
                    result.svif[key_prefix.str() + model + "/" + param].push_back(value);
                }
            }
            for (const auto& [model, per_param] : o.results) {
                for (const auto& [param, r] : per_param) {
                    double truth = param == "alpha"   ? cfg.scenario.alpha
                                   : param == "beta_1" ? cfg.scenario.beta1
                                                       : cfg.scenario.beta2;
                    result.deltas[key_prefix.str() + model + "/" + param].push_back(r.post_mean -
                                                                                    truth);
                }
            }
        }
    }
    return result;
}

void write_study_csv(const StudyResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "scenario,censoring,model,parameter,mean,sd,coverage,mse\n" << std::setprecision(10);
    for (const auto& r : result.rows) {
        out << r.scenario << "," << r.censoring << "," << r.model << "," << r.parameter << ","
            << r.mean << "," << r.sd << "," << r.coverage << "," << r.mse << "\n";
    }
}

void write_svif_csv(const StudyResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "censoring,model,parameter,replicate,svif\n" << std::setprecision(10);
    for (const auto& [key, values] : result.svif) {
        auto a = key.find('/');
        auto b = key.find('/', a + 1);
        for (std::size_t rep = 0; rep < values.size(); ++rep) {
            out << key.substr(0, a) << "," << key.substr(a + 1, b - a - 1) << ","
                << key.substr(b + 1) << "," << rep + 1 << "," << values[rep] << "\n";
        }
    }
}

double BenchResult::seconds(int N, const std::string& path, const std::string& phase) const {
    double total = 0.0;
    int count = 0;
    for (const auto& r : rows) {
        if (r.N == N && r.path == path && r.phase == phase && !r.skipped) {
            total += r.seconds;
            ++count;
        }
    }
    if (count == 0) throw std::out_of_range("bench row not found");
    return total / count;
}

BenchResult run_reduction_bench(const BenchConfig& cfg) {
    if (cfg.n_draws < 1 || cfg.repetitions < 1) {
        throw std::invalid_argument("run_reduction_bench: bad configuration");
    }
    if (!std::is_sorted(cfg.units_per_area.begin(), cfg.units_per_area.end())) {
        throw std::invalid_argument("run_reduction_bench: units-per-area grid must ascend");
    }
    BenchResult result;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    for (int upa : cfg.units_per_area) {
        const int n = cfg.n_areas;
        const int N = n * upa;
        const int p = cfg.n_covariates;
        std::vector<int> labels(N);
        for (int i = 0, l = 0; i < n; ++i) {
            for (int j = 0; j < upa; ++j, ++l) labels[l] = i + 1;
        }
        MembershipVector G = MembershipVector::from_labels(labels, n);
        Eigen::MatrixXd X(N, p);
        for (int l = 0; l < N; ++l) {
            for (int k = 0; k < p; ++k) X(l, k) = normal(rng);
        }
        Eigen::MatrixXd psi_draws(cfg.n_draws, n);
        Eigen::MatrixXd beta_draws(cfg.n_draws, p);
        for (int s = 0; s < cfg.n_draws; ++s) {
            for (int i = 0; i < n; ++i) psi_draws(s, i) = normal(rng);
            for (int k = 0; k < p; ++k) beta_draws(s, k) = normal(rng);
        }

        const bool run_full = N <= cfg.max_full_n;
        if (!run_full) {
            result.rows.push_back({N, n, "full", "total", 0, 0.0, true});
        }

        for (int rep = 0; rep < cfg.repetitions; ++rep) {
            // Reduced path
            double t0 = now_seconds();
            ReductionPlan plan(X, G);
            double t1 = now_seconds();
            Eigen::MatrixXd beta_red(cfg.n_draws, p), psi_red(cfg.n_draws, n);
            for (int s = 0; s < cfg.n_draws; ++s) {
                Eigen::VectorXd psi_s = psi_draws.row(s).transpose();
                beta_red.row(s) =
                    plan.beta_restricted(beta_draws.row(s).transpose(), psi_s).transpose();
                psi_red.row(s) = plan.psi_restricted(psi_s).transpose();
            }
            double t2 = now_seconds();
            result.rows.push_back({N, n, "reduced", "precompute", rep, t1 - t0, false});
            result.rows.push_back({N, n, "reduced", "per_draw", rep, t2 - t1, false});
            result.rows.push_back({N, n, "reduced", "total", rep, t2 - t0, false});

            if (!run_full) continue;

            // Full-dimension path: the N x N projector applied to every draw.
            double f0 = now_seconds();
            Eigen::LDLT<Eigen::MatrixXd> gram((X.transpose() * X).eval());
            Eigen::MatrixXd projector = X * gram.solve(X.transpose());
            double f1 = now_seconds();
            const int check_draws = std::min(cfg.n_draws, 20);
            // Draws are corrected in blocks so the N x N projector streams
            // through memory once per block instead of once per draw; the
            // arithmetic is identical to the draw-at-a-time loop.
            const int block = 64;
            Eigen::MatrixXd Psi(N, block), resid(N, block), area_mean(n, block);
            for (int s0 = 0; s0 < cfg.n_draws; s0 += block) {
                const int B = std::min(block, cfg.n_draws - s0);
                for (int b = 0; b < B; ++b) {
                    Psi.col(b) = expand(psi_draws.row(s0 + b).transpose(), G);
                }
                resid.leftCols(B).noalias() = -projector * Psi.leftCols(B);
                resid.leftCols(B) += Psi.leftCols(B);
                Eigen::MatrixXd beta_full =
                    beta_draws.middleRows(s0, B).transpose() +
                    gram.solve(X.transpose() * Psi.leftCols(B));
                area_mean.setZero();
                for (int l = 0; l < N; ++l) {
                    area_mean.row(G.idx[l] - 1) += resid.row(l);
                }
                area_mean.array().colwise() /= G.counts.array();
                for (int b = 0; b < B && rep == 0 && s0 + b < check_draws; ++b) {
                    double err = std::max(
                        (beta_full.col(b) - beta_red.row(s0 + b).transpose())
                            .cwiseAbs()
                            .maxCoeff(),
                        (area_mean.col(b) - psi_red.row(s0 + b).transpose())
                            .cwiseAbs()
                            .maxCoeff());
                    result.equivalence_max_err = std::max(result.equivalence_max_err, err);
                }
            }
            double f2 = now_seconds();
            result.rows.push_back({N, n, "full", "precompute", rep, f1 - f0, false});
            result.rows.push_back({N, n, "full", "per_draw", rep, f2 - f1, false});
            result.rows.push_back({N, n, "full", "total", rep, f2 - f0, false});
        }
    }
    return result;
}

void write_bench_csv(const BenchResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "N,n,path,phase,rep,seconds,log10_seconds,skipped\n" << std::setprecision(10);
    for (const auto& r : result.rows) {
        out << r.N << "," << r.n << "," << r.path << "," << r.phase << "," << r.rep << ","
            << r.seconds << "," << (r.seconds > 0.0 ? std::log10(r.seconds) : 0.0) << ","
            << (r.skipped ? 1 : 0) << "\n";
    }
}

}  // namespace rsfm
