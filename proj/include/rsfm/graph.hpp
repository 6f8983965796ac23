#pragma once

#include <Eigen/Dense>

#include <random>
#include <string>
#include <utility>
#include <vector>

namespace rsfm {

/// Areal neighborhood structure. Areas are 1-indexed throughout.
struct AreaGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  // unique, i < j
    Eigen::MatrixXd W;                       // n x n symmetric 0/1 adjacency
    Eigen::VectorXd Dw;                      // neighbor counts w_{i+}

    bool has_isolated_area() const;
};

struct PrecisionMatrix {
    Eigen::MatrixXd Q;  // tau * (diag(Dw) - rho * W)
    double tau = 1.0;
    double rho = 1.0;
};

// Throws std::invalid_argument on out-of-range indices or self-loops.
// Duplicate edges (in either orientation) are collapsed.
AreaGraph build_graph(int n, const std::vector<std::pair<int, int>>& edges);

// One edge per line, "i j", 1-indexed, '#' starts a comment. The number of
// areas is the largest index seen unless n_hint is larger.
AreaGraph load_adjacency(const std::string& path, int n_hint = 0);
void save_adjacency(const AreaGraph& graph, const std::string& path);

// Rook-adjacency rectangular lattice with rows*cols areas, ordered row-major.
AreaGraph lattice_graph(int rows, int cols);

int connected_components(const AreaGraph& graph);

PrecisionMatrix car_precision(const AreaGraph& graph, double rho, double tau);
PrecisionMatrix icar_precision(const AreaGraph& graph, double tau);

// Draw from the ICAR(W, tau) distribution restricted to the sum-to-zero
// subspace: eigendecompose Q, sample N(0, 1/lambda_k) on eigenvectors with
// lambda_k > 1e-10. Requires a connected graph.
Eigen::VectorXd sample_icar(const AreaGraph& graph, double tau, std::mt19937_64& rng);

// Eigendecomposition of Q reusable across many ICAR draws.
class IcarSampler {
  public:
    IcarSampler(const AreaGraph& graph, double tau);
    Eigen::VectorXd draw(std::mt19937_64& rng) const;

  private:
    Eigen::MatrixXd vectors_;
    Eigen::VectorXd sds_;  // 0 on the null space
};

}  // namespace rsfm
