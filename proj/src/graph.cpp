#include "rsfm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rsfm {

bool AreaGraph::has_isolated_area() const {
    for (int i = 0; i < n; ++i) {
        if (Dw[i] == 0.0) return true;
    }
    return false;
}

AreaGraph build_graph(int n, const std::vector<std::pair<int, int>>& edges) {
    if (n <= 0) throw std::invalid_argument("build_graph: n must be positive");
    std::set<std::pair<int, int>> uniq;
    for (auto [i, j] : edges) {
        if (i < 1 || i > n || j < 1 || j > n) {
            throw std::invalid_argument("build_graph: edge (" + std::to_string(i) + "," +
                                        std::to_string(j) + ") references area outside 1.." +
                                        std::to_string(n));
        }
        if (i == j) {
            throw std::invalid_argument("build_graph: self-loop at area " + std::to_string(i));
        }
        uniq.emplace(std::min(i, j), std::max(i, j));
    }
    AreaGraph g;
    g.n = n;
    g.edges.assign(uniq.begin(), uniq.end());
    g.W = Eigen::MatrixXd::Zero(n, n);
    for (auto [i, j] : g.edges) {
        g.W(i - 1, j - 1) = 1.0;
        g.W(j - 1, i - 1) = 1.0;
    }
    g.Dw = g.W.rowwise().sum();
    return g;
}

AreaGraph load_adjacency(const std::string& path, int n_hint) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open adjacency file: " + path);
    std::vector<std::pair<int, int>> edges;
    int n = n_hint;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        int i, j;
        if (!(ls >> i)) continue;  // blank
        if (!(ls >> j)) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected two area indices per line");
        }
        edges.emplace_back(i, j);
        n = std::max({n, i, j});
    }
    return build_graph(n, edges);
}

void save_adjacency(const AreaGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write adjacency file: " + path);
    out << "# " << graph.n << " areas, " << graph.edges.size() << " edges\n";
    for (auto [i, j] : graph.edges) out << i << " " << j << "\n";
}

AreaGraph lattice_graph(int rows, int cols) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("lattice_graph: bad dimensions");
    std::vector<std::pair<int, int>> edges;
    auto id = [cols](int r, int c) { return r * cols + c + 1; };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
            if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
        }
    }
    return build_graph(rows * cols, edges);
}

int connected_components(const AreaGraph& graph) {
    std::vector<int> label(graph.n, -1);
    std::vector<int> stack;
    int count = 0;
    for (int s = 0; s < graph.n; ++s) {
        if (label[s] != -1) continue;
        ++count;
        stack.push_back(s);
        label[s] = count;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int u = 0; u < graph.n; ++u) {
                if (graph.W(v, u) != 0.0 && label[u] == -1) {
                    label[u] = count;
                    stack.push_back(u);
                }
            }
        }
    }
    return count;
}

PrecisionMatrix car_precision(const AreaGraph& graph, double rho, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("car_precision: tau must be positive");
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("car_precision: rho must be in [0,1]");
    PrecisionMatrix p;
    p.tau = tau;
    p.rho = rho;
    p.Q = tau * (Eigen::MatrixXd(graph.Dw.asDiagonal()) - rho * graph.W);
    return p;
}

PrecisionMatrix icar_precision(const AreaGraph& graph, double tau) {
    if (graph.has_isolated_area()) {
        throw std::invalid_argument("icar_precision: graph has an area with no neighbors");
    }
    return car_precision(graph, 1.0, tau);
}

IcarSampler::IcarSampler(const AreaGraph& graph, double tau) {
    if (connected_components(graph) != 1) {
        throw std::invalid_argument("sample_icar: graph must be connected");
    }
    // Eigendecompose the unscaled structure matrix so the null-space cutoff
    // does not depend on tau; Q = tau * (D_w - W) just rescales the spectrum.
    PrecisionMatrix p = icar_precision(graph, 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.Q);
    vectors_ = es.eigenvectors();
    sds_ = Eigen::VectorXd::Zero(graph.n);
    for (int k = 0; k < graph.n; ++k) {
        double lambda = es.eigenvalues()[k];
        if (lambda > 1e-10) sds_[k] = 1.0 / std::sqrt(tau * lambda);
    }
}

Eigen::VectorXd IcarSampler::draw(std::mt19937_64& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd coords(sds_.size());
    for (int k = 0; k < sds_.size(); ++k) coords[k] = sds_[k] > 0.0 ? sds_[k] * normal(rng) : 0.0;
    return vectors_ * coords;
}

Eigen::VectorXd sample_icar(const AreaGraph& graph, double tau, std::mt19937_64& rng) {
    return IcarSampler(graph, tau).draw(rng);
}

}  // namespace rsfm
