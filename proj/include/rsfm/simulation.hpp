#pragma once

#include "rsfm/graph.hpp"
#include "rsfm/inference.hpp"
#include "rsfm/survival.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rsfm {

/// Ground truth stored alongside every generated dataset.
struct TruthRecord {
    double alpha = 1.2;
    Eigen::VectorXd beta;
    double tau_psi = 0.75;
    Eigen::VectorXd psi;
};

struct ScenarioConfig {
    AreaGraph graph;           // defaults to a 4 x 23 rook lattice (92 areas)
    Eigen::VectorXd latitude;  // per-area centroid stand-in, used when confounded
    int units_per_area = 10;
    double alpha = 1.2;
    double beta1 = -0.3;
    double beta2 = 0.3;
    double tau_psi = 0.75;
    bool confounded = false;   // X2 = area latitude expanded per unit
    double censoring = 0.0;    // right-censoring level in [0, 1)
    std::uint64_t seed = 0;

    static ScenarioConfig lattice_default();
};

struct GeneratedData {
    SurvivalDataset data;
    TruthRecord truth;
};

// Weibull proportional-hazards generator: psi ~ ICAR(tau_psi), X1 standard
// normal per unit, X2 per the confounding flag, event times by inversion
// T = (E / exp{linpred})^{1/alpha}. Censoring is an administrative cutoff at
// the empirical (1 - level) quantile of the generated event times. Covariates
// are standardized (mean 0, SD 1) before the linear predictor is formed.
GeneratedData generate_dataset(const ScenarioConfig& cfg, std::uint64_t rep_seed);

void write_truth(const TruthRecord& truth, const std::string& path);
TruthRecord load_truth(const std::string& path);

struct StudyConfig {
    ScenarioConfig scenario;
    std::vector<double> censoring_levels{0.0, 0.5};
    int replicates = 100;
    McmcConfig mcmc{6000, 2000, 2, 0};
    std::uint64_t seed = 0;
    int threads = 1;
};

struct StudyRow {
    std::string scenario;  // "confounded" / "independent"
    double censoring = 0.0;
    std::string model;      // "SFM", "RSFM", "NS"
    std::string parameter;  // "alpha", "beta_1", "beta_2"
    double mean = 0.0;
    double sd = 0.0;
    double coverage = 0.0;
    double mse = 0.0;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    // per-replicate artifacts keyed "censoring/model/parameter"
    std::map<std::string, std::vector<double>> svif;    // vs the NS fit
    std::map<std::string, std::vector<double>> deltas;  // posterior mean - truth
    int failed_replicates = 0;

    const StudyRow& row(double censoring, const std::string& model,
                        const std::string& parameter) const;
};

StudyResult run_recovery_study(const StudyConfig& cfg);

void write_study_csv(const StudyResult& result, const std::string& path);
void write_svif_csv(const StudyResult& result, const std::string& path);

struct BenchConfig {
    int n_areas = 92;
    std::vector<int> units_per_area{2, 4, 8, 16, 32, 64, 128};
    int n_draws = 5000;
    int n_covariates = 5;
    int repetitions = 10;
    int max_full_n = 16384;  // full-dimension path skipped above this N
    std::uint64_t seed = 0;
};

struct BenchRow {
    int N = 0;
    int n = 0;
    std::string path;   // "full" or "reduced"
    std::string phase;  // "precompute", "per_draw", "total"
    int rep = 0;
    double seconds = 0.0;
    bool skipped = false;  // memory guard marker
};

struct BenchResult {
    std::vector<BenchRow> rows;
    double equivalence_max_err = 0.0;  // full vs reduced corrected draws

    double seconds(int N, const std::string& path, const std::string& phase) const;  // mean over reps
};

// Times the full-dimension projector correction against the reduced-path
// correction on the same random draws, checking they agree before timing.
BenchResult run_reduction_bench(const BenchConfig& cfg);

void write_bench_csv(const BenchResult& result, const std::string& path);

}  // namespace rsfm
