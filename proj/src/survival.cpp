#include "rsfm/survival.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace rsfm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLinpredClamp = 700.0;

std::atomic<std::int64_t> g_clamp_count{0};

double clamp_linpred(double lp) {
    if (lp > kLinpredClamp || lp < -kLinpredClamp) {
        g_clamp_count.fetch_add(1, std::memory_order_relaxed);
        return lp > 0.0 ? kLinpredClamp : -kLinpredClamp;
    }
    return lp;
}

// log of the standard normal upper tail, stable for large |z|.
double log_normal_sf(double z) {
    if (z < 30.0) {
        return std::log(0.5 * std::erfc(z / std::sqrt(2.0)));
    }
    // Asymptotic expansion of the Mills ratio.
    double z2 = z * z;
    return -0.5 * z2 - std::log(z) - 0.5 * kLog2Pi + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

// log of the upper regularized incomplete gamma Q(a, x).
double log_gamma_q(double a, double x) {
    double q = boost::math::gamma_q(a, x);
    if (q > 1e-290) return std::log(q);
    // Deep right tail: leading terms of the asymptotic series.
    return (a - 1.0) * std::log(x) - x - std::lgamma(a) + std::log1p((a - 1.0) / x);
}

double log_density(const BaselineFamily& fam, double t) {
    switch (fam.family) {
        case Family::exponential:
            return std::log(fam.p1) - fam.p1 * t;
        case Family::weibull:
            return std::log(fam.p1 * fam.p2) + (fam.p1 - 1.0) * std::log(t) -
                   fam.p2 * std::pow(t, fam.p1);
        case Family::lognormal: {
            double z = (std::log(t) - fam.p1) / fam.p2;
            return -std::log(t * fam.p2) - 0.5 * kLog2Pi - 0.5 * z * z;
        }
        case Family::gamma:
            return fam.p1 * std::log(fam.p2) - std::lgamma(fam.p1) +
                   (fam.p1 - 1.0) * std::log(t) - fam.p2 * t;
    }
    return -std::numeric_limits<double>::infinity();
}

void require_positive_time(double t) {
    if (!(t > 0.0)) throw std::invalid_argument("survival: time must be positive");
}

}  // namespace

Family family_from_string(const std::string& name) {
    if (name == "exponential") return Family::exponential;
    if (name == "weibull") return Family::weibull;
    if (name == "lognormal") return Family::lognormal;
    if (name == "gamma") return Family::gamma;
    throw std::invalid_argument("unknown baseline family: " + name);
}

std::string family_name(Family f) {
    switch (f) {
        case Family::exponential: return "exponential";
        case Family::weibull: return "weibull";
        case Family::lognormal: return "lognormal";
        case Family::gamma: return "gamma";
    }
    return "?";
}

int family_param_count(Family f) { return f == Family::exponential ? 1 : 2; }

std::vector<std::string> family_param_names(Family f) {
    switch (f) {
        case Family::exponential: return {"lambda"};
        case Family::weibull: return {"alpha", "lambda"};
        case Family::lognormal: return {"mu", "sigma"};
        case Family::gamma: return {"alpha", "lambda"};
    }
    return {};
}

void BaselineFamily::validate() const {
    bool ok = true;
    switch (family) {
        case Family::exponential: ok = p1 > 0.0; break;
        case Family::weibull:
        case Family::gamma: ok = p1 > 0.0 && p2 > 0.0; break;
        case Family::lognormal: ok = std::isfinite(p1) && p2 > 0.0; break;
    }
    if (!ok) {
        throw std::invalid_argument("invalid " + family_name(family) + " baseline parameters");
    }
}

double baseline_log_survival(const BaselineFamily& fam, double t) {
    require_positive_time(t);
    switch (fam.family) {
        case Family::exponential:
            return -fam.p1 * t;
        case Family::weibull:
            return -fam.p2 * std::pow(t, fam.p1);
        case Family::lognormal:
            return log_normal_sf((std::log(t) - fam.p1) / fam.p2);
        case Family::gamma:
            return log_gamma_q(fam.p1, fam.p2 * t);
    }
    return -std::numeric_limits<double>::infinity();
}

double baseline_cumhazard(const BaselineFamily& fam, double t) {
    return -baseline_log_survival(fam, t);
}

double baseline_log_hazard(const BaselineFamily& fam, double t) {
    require_positive_time(t);
    switch (fam.family) {
        case Family::exponential:
            return std::log(fam.p1);
        case Family::weibull:
            return std::log(fam.p1 * fam.p2) + (fam.p1 - 1.0) * std::log(t);
        default:
            return log_density(fam, t) - baseline_log_survival(fam, t);
    }
}

double baseline_hazard(const BaselineFamily& fam, double t) {
    return std::exp(baseline_log_hazard(fam, t));
}

double baseline_density(const BaselineFamily& fam, double t) {
    require_positive_time(t);
    return std::exp(log_density(fam, t));
}

double survival_fn(const BaselineFamily& fam, double t, double linpred) {
    return std::exp(baseline_log_survival(fam, t) * std::exp(clamp_linpred(linpred)));
}

double cure_survival(double c, double s_star) {
    if (c < 0.0 || c >= 1.0) throw std::invalid_argument("cure fraction must be in [0,1)");
    if (s_star < 0.0 || s_star > 1.0) throw std::invalid_argument("s_star must be in [0,1]");
    return c + (1.0 - c) * s_star;
}

Censor censor_from_string(const std::string& name) {
    if (name == "event") return Censor::event;
    if (name == "right") return Censor::right;
    if (name == "left") return Censor::left;
    if (name == "interval") return Censor::interval;
    throw std::invalid_argument("unknown censoring class: " + name);
}

std::string censor_name(Censor c) {
    switch (c) {
        case Censor::event: return "event";
        case Censor::right: return "right";
        case Censor::left: return "left";
        case Censor::interval: return "interval";
    }
    return "?";
}

void SurvivalDataset::validate() const {
    const int N = size();
    if (static_cast<int>(area.size()) != N || X.rows() != N) {
        throw std::invalid_argument("dataset: records, areas and X rows must align");
    }
    for (int l = 0; l < N; ++l) {
        if (area[l] < 1 || area[l] > n_areas) {
            throw std::invalid_argument("dataset: record " + std::to_string(l + 1) +
                                        " has area index outside 1.." + std::to_string(n_areas));
        }
        const Record& r = records[l];
        if (!(r.t1 > 0.0)) {
            throw std::invalid_argument("dataset: record " + std::to_string(l + 1) +
                                        " has nonpositive time");
        }
        if (r.censor == Censor::interval && !(r.t1 < r.t2)) {
            throw std::invalid_argument("dataset: record " + std::to_string(l + 1) +
                                        " has interval bounds out of order");
        }
    }
    if (X.cols() > 0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        if (qr.rank() < X.cols()) {
            throw std::invalid_argument("dataset: design matrix is rank deficient");
        }
    }
}

std::int64_t linpred_clamp_count() { return g_clamp_count.load(std::memory_order_relaxed); }

double record_log_likelihood(const BaselineFamily& fam, const Record& rec, double linpred) {
    const double lp = clamp_linpred(linpred);
    const double elp = std::exp(lp);
    const double H1 = baseline_cumhazard(fam, rec.t1);
    switch (rec.censor) {
        case Censor::event:
            return baseline_log_hazard(fam, rec.t1) + lp - H1 * elp;
        case Censor::right:
            return -H1 * elp;
        case Censor::left: {
            double one_minus_s = -std::expm1(-H1 * elp);
            return one_minus_s > 0.0 ? std::log(one_minus_s)
                                     : -std::numeric_limits<double>::infinity();
        }
        case Censor::interval: {
            const double H2 = baseline_cumhazard(fam, rec.t2);
            if (!(H2 > H1)) return -std::numeric_limits<double>::infinity();
            double gap = -std::expm1(-(H2 - H1) * elp);
            if (!(gap > 0.0)) return -std::numeric_limits<double>::infinity();
            return -H1 * elp + std::log(gap);
        }
    }
    return -std::numeric_limits<double>::infinity();
}

double log_likelihood(const SurvivalDataset& data, const BaselineFamily& fam,
                      const Eigen::VectorXd& beta, const Eigen::VectorXd& psi,
                      const Eigen::VectorXd* eps) {
    const int N = data.size();
    if (beta.size() != data.X.cols()) throw std::invalid_argument("log_likelihood: beta size");
    if (psi.size() != data.n_areas && psi.size() != 0) {
        throw std::invalid_argument("log_likelihood: psi size");
    }
    if (eps && eps->size() != N) throw std::invalid_argument("log_likelihood: eps size");

    Eigen::VectorXd lp = beta.size() > 0 ? (data.X * beta).eval() : Eigen::VectorXd::Zero(N);
    double total = 0.0;
    for (int l = 0; l < N; ++l) {
        double v = lp[l];
        if (psi.size() > 0) v += psi[data.area[l] - 1];
        if (eps) v += (*eps)[l];
        total += record_log_likelihood(fam, data.records[l], v);
        if (std::isinf(total)) return -std::numeric_limits<double>::infinity();
    }
    return total;
}

}  // namespace rsfm
