#include "rsfm/graph.hpp"
#include "rsfm/inference.hpp"

#include <doctest.h>

#include <cstdio>
#include <random>

using namespace rsfm;

TEST_CASE("build_graph computes neighbor counts") {
    AreaGraph g = build_graph(3, {{1, 2}, {2, 3}});
    CHECK(g.n == 3);
    CHECK(g.Dw[0] == 1);
    CHECK(g.Dw[1] == 2);
    CHECK(g.Dw[2] == 1);
    CHECK(g.W(0, 1) == 1);
    CHECK(g.W(1, 0) == 1);
    CHECK(g.W(0, 2) == 0);
}

TEST_CASE("build_graph deduplicates reversed edges") {
    AreaGraph g = build_graph(2, {{1, 2}, {2, 1}});
    CHECK(g.edges.size() == 1);
    CHECK(g.Dw[0] == 1);
    CHECK(g.Dw[1] == 1);
}

TEST_CASE("build_graph rejects self-loops and bad indices") {
    CHECK_THROWS_AS(build_graph(3, {{1, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(build_graph(3, {{1, 4}}), std::invalid_argument);
    CHECK_THROWS_AS(build_graph(3, {{0, 2}}), std::invalid_argument);
}

TEST_CASE("car_precision matches the closed form on a path graph") {
    AreaGraph g = build_graph(3, {{1, 2}, {2, 3}});
    PrecisionMatrix pm = car_precision(g, 1.0, 2.0);
    Eigen::Matrix3d expected;
    expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    expected *= 2.0;
    CHECK((pm.Q - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("car_precision with rho=0 is diagonal") {
    AreaGraph g = build_graph(4, {{1, 2}, {2, 3}, {3, 4}, {4, 1}});
    PrecisionMatrix pm = car_precision(g, 0.0, 1.0);
    CHECK((pm.Q - Eigen::MatrixXd(g.Dw.asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("car_precision rejects nonpositive tau") {
    AreaGraph g = build_graph(2, {{1, 2}});
    CHECK_THROWS_AS(car_precision(g, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(car_precision(g, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("icar_precision on the complete 3-graph") {
    AreaGraph g = build_graph(3, {{1, 2}, {1, 3}, {2, 3}});
    PrecisionMatrix pm = icar_precision(g, 1.0);
    Eigen::Matrix3d expected;
    expected << 2, -1, -1, -1, 2, -1, -1, -1, 2;
    CHECK((pm.Q - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("icar_precision row sums vanish for random graphs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 3 + static_cast<int>(rng() % 12);
        std::vector<std::pair<int, int>> edges;
        for (int i = 1; i < n; ++i) edges.push_back({i, i + 1});  // spine keeps it connected
        for (int k = 0; k < n; ++k) {
            int a = 1 + static_cast<int>(rng() % n), b = 1 + static_cast<int>(rng() % n);
            if (a != b) edges.push_back({std::min(a, b), std::max(a, b)});
        }
        AreaGraph g = build_graph(n, edges);
        PrecisionMatrix pm = icar_precision(g, 0.5 + (rng() % 100) / 25.0);
        CHECK((pm.Q * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("icar_precision rank is n-1 for a connected graph") {
    AreaGraph g = lattice_graph(3, 5);
    PrecisionMatrix pm = icar_precision(g, 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pm.Q);
    int rank = 0;
    for (int k = 0; k < g.n; ++k) {
        if (es.eigenvalues()[k] > 1e-8) ++rank;
    }
    CHECK(rank == g.n - 1);
}

TEST_CASE("ICAR quadratic form equals the pairwise-difference sum") {
    AreaGraph g = lattice_graph(4, 6);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 10; ++trial) {
        double tau = 0.3 + trial * 0.4;
        Eigen::VectorXd psi(g.n);
        for (int i = 0; i < g.n; ++i) psi[i] = normal(rng);
        PrecisionMatrix pm = icar_precision(g, tau);
        double quad = psi.dot(pm.Q * psi);
        CHECK(std::abs(quad - tau * icar_quadratic(g, psi)) <= 1e-10);
    }
}

TEST_CASE("sample_icar sums to zero and is seed-deterministic") {
    AreaGraph g = lattice_graph(4, 23);
    std::mt19937_64 rng1(99), rng2(99);
    Eigen::VectorXd a = sample_icar(g, 0.75, rng1);
    Eigen::VectorXd b = sample_icar(g, 0.75, rng2);
    CHECK(std::abs(a.sum()) <= 1e-10);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample_icar variance scales as 1/tau") {
    AreaGraph g = lattice_graph(3, 8);
    std::mt19937_64 rng(123);
    auto mean_sq = [&](double tau) {
        double acc = 0.0;
        for (int s = 0; s < 1000; ++s) acc += sample_icar(g, tau, rng).squaredNorm();
        return acc / 1000.0;
    };
    double ratio = mean_sq(1.0) / mean_sq(4.0);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("sample_icar rejects disconnected graphs") {
    AreaGraph g = build_graph(4, {{1, 2}, {3, 4}});
    std::mt19937_64 rng(1);
    CHECK_THROWS(sample_icar(g, 1.0, rng));
}

TEST_CASE("IcarSampler empirical covariance matches pinv(Q)") {
    AreaGraph g = lattice_graph(2, 5);
    double tau = 1.3;
    IcarSampler sampler(g, tau);
    std::mt19937_64 rng(77);
    const int S = 5000;
    Eigen::MatrixXd draws(S, g.n);
    for (int s = 0; s < S; ++s) draws.row(s) = sampler.draw(rng).transpose();
    Eigen::MatrixXd centered = draws.rowwise() - draws.colwise().mean();
    Eigen::MatrixXd emp = centered.transpose() * centered / (S - 1.0);

    PrecisionMatrix pm = icar_precision(g, tau);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(pm.Q);
    Eigen::MatrixXd pinv = cod.pseudoInverse();
    CHECK((emp - pinv).norm() / pinv.norm() <= 0.10);
}

TEST_CASE("connected_components counts") {
    CHECK(connected_components(build_graph(3, {{1, 2}, {2, 3}})) == 1);
    CHECK(connected_components(build_graph(4, {{1, 2}})) == 3);
    CHECK(connected_components(build_graph(3, {{1, 2}, {1, 3}, {2, 3}})) == 1);
}

TEST_CASE("lattice_graph builds a rook lattice") {
    AreaGraph g = lattice_graph(4, 23);
    CHECK(g.n == 92);
    CHECK(static_cast<int>(g.edges.size()) == 4 * 22 + 23 * 3);
    CHECK(connected_components(g) == 1);
    CHECK_FALSE(g.has_isolated_area());
}

TEST_CASE("adjacency file round trip with comments") {
    AreaGraph g = lattice_graph(3, 4);
    std::string path = "test_graph_roundtrip.txt";
    save_adjacency(g, path);
    AreaGraph loaded = load_adjacency(path);
    CHECK(loaded.n == g.n);
    CHECK(loaded.edges == g.edges);
    std::remove(path.c_str());

    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("# comment line\n1 2\n2 3  # trailing\n", f);
    std::fclose(f);
    AreaGraph parsed = load_adjacency(path, 5);
    CHECK(parsed.n == 5);
    CHECK(parsed.edges.size() == 2);
    std::remove(path.c_str());
}
