#include "rsfm/diagnostics.hpp"

#include <doctest.h>

#include <random>

using namespace rsfm;

namespace {

CoefSample sample_of(std::initializer_list<double> vals, const std::string& label = "b") {
    CoefSample s;
    s.draws = Eigen::Map<const Eigen::VectorXd>(vals.begin(), vals.size());
    s.label = label;
    return s;
}

CoefSample normal_sample(std::mt19937_64& rng, int S, double sd) {
    std::normal_distribution<double> normal(0.0, sd);
    CoefSample s;
    s.draws.resize(S);
    for (int i = 0; i < S; ++i) s.draws[i] = normal(rng);
    return s;
}

}  // namespace

TEST_CASE("svif of identical samples is one") {
    CoefSample a = sample_of({0.1, -0.2, 0.4, 0.3});
    CHECK(svif(a, a) == doctest::Approx(1.0));
}

TEST_CASE("svif matches the reported variance ratio of SDs 0.3848 vs 0.1821") {
    std::mt19937_64 rng(1);
    CoefSample sp = normal_sample(rng, 200000, 0.3848);
    CoefSample ns = normal_sample(rng, 200000, 0.1821);
    double expected = (0.3848 / 0.1821) * (0.3848 / 0.1821);
    CHECK(expected == doctest::Approx(4.465).epsilon(0.001));  // "about 5 times greater"
    CHECK(svif(sp, ns) == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("doubling the spatial SD quadruples SVIF") {
    CoefSample a = sample_of({0.0, 1.0, 2.0, -1.0});
    CoefSample b = a;
    b.draws *= 2.0;
    CHECK(svif(b, a) == doctest::Approx(4.0));
}

TEST_CASE("svif is scale equivariant and rejects zero variance") {
    CoefSample a = sample_of({0.3, 0.7, -0.1});
    CoefSample b = sample_of({1.0, 0.5, 0.2});
    double base = svif(a, b);
    CoefSample ak = a, bk = b;
    ak.draws *= 3.0;
    bk.draws *= 3.0;
    CHECK(svif(ak, bk) == doctest::Approx(base));
    CoefSample flat = sample_of({2.0, 2.0, 2.0});
    CHECK_THROWS(svif(a, flat));
}

TEST_CASE("svrf values") {
    CoefSample a = sample_of({0.1, 0.5, -0.3, 0.2});
    CHECK(svrf(a, a) == doctest::Approx(0.0));
    // Var_u = 0.04, Var_r = 0.01 -> 0.75, via samples with exactly those variances
    CoefSample u = sample_of({-0.2, 0.2}), r = sample_of({-0.1, 0.1});
    CHECK(sample_variance(u.draws) == doctest::Approx(0.08));
    CHECK(svrf(u, r) == doctest::Approx(0.75));
    // negative when restricted is wider
    CHECK(svrf(r, u) < 0.0);
}

TEST_CASE("type_s_rate counts intervals excluding zero") {
    CHECK(type_s_rate({{-0.2, 0.3}}) == doctest::Approx(0.0));
    CHECK(type_s_rate({{0.1, 0.5}}) == doctest::Approx(1.0));
    CHECK(type_s_rate({{-1.0, -0.1}, {-0.5, 0.5}, {0.2, 0.9}, {-2.0, 2.0}}) ==
          doctest::Approx(0.5));
}

TEST_CASE("type_s_rate is monotone under interval widening") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<double, double>> intervals;
        for (int k = 0; k < 10; ++k) {
            double a = unif(rng), b = unif(rng);
            intervals.push_back({std::min(a, b), std::max(a, b)});
        }
        double before = type_s_rate(intervals);
        CHECK(before >= 0.0);
        CHECK(before <= 1.0);
        auto widened = intervals;
        std::size_t j = rng() % widened.size();
        widened[j].first -= 0.5;
        widened[j].second += 0.5;
        CHECK(type_s_rate(widened) <= before);
    }
}

TEST_CASE("summarize_draws on simple samples") {
    DrawSummary c = summarize_draws(Eigen::VectorXd::Constant(10, 3.25));
    CHECK(c.mean == doctest::Approx(3.25));
    CHECK(c.sd == doctest::Approx(0.0));
    CHECK(c.q025 == doctest::Approx(3.25));
    CHECK(c.q975 == doctest::Approx(3.25));

    Eigen::VectorXd v(5);
    v << 1, 2, 3, 4, 5;
    DrawSummary s = summarize_draws(v);
    CHECK(s.mean == doctest::Approx(3.0));
    CHECK(s.sd == doctest::Approx(1.5811).epsilon(1e-4));
}

TEST_CASE("quantiles of a large normal sample") {
    std::mt19937_64 rng(4);
    CoefSample z = normal_sample(rng, 100000, 1.0);
    CHECK(std::abs(quantile(z.draws, 0.025) + 1.96) <= 0.05);
    CHECK(std::abs(quantile(z.draws, 0.975) - 1.96) <= 0.05);
    // type-7 interpolation on a tiny sample
    Eigen::VectorXd v(4);
    v << 10, 20, 30, 40;
    CHECK(quantile(v, 0.5) == doctest::Approx(25.0));
    CHECK(quantile(v, 0.0) == doctest::Approx(10.0));
    CHECK(quantile(v, 1.0) == doctest::Approx(40.0));
}

TEST_CASE("study_metrics aggregates replicates") {
    ReplicateResult hit{0.3, 0.05, 0.2, 0.4};
    StudyMetrics one = study_metrics({hit}, 0.3);
    CHECK(one.mse == doctest::Approx(0.0));
    CHECK(one.coverage == doctest::Approx(1.0));
    CHECK(one.mean == doctest::Approx(0.3));
    CHECK(one.sd == doctest::Approx(0.05));

    ReplicateResult miss{0.3, 0.05, 0.4, 0.5};
    CHECK(study_metrics({miss}, 0.3).coverage == doctest::Approx(0.0));

    double d = 0.07;
    ReplicateResult lo{0.3 - d, 0.04, 0.1, 0.5}, hi{0.3 + d, 0.06, 0.1, 0.5};
    StudyMetrics two = study_metrics({lo, hi}, 0.3);
    CHECK(two.mse == doctest::Approx(d * d));
    CHECK(two.mean == doctest::Approx(0.3));
    CHECK(two.sd == doctest::Approx(0.05));
    CHECK(two.coverage == doctest::Approx(1.0));
}
