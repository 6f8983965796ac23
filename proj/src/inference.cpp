#include "rsfm/inference.hpp"

#include "rsfm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rsfm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLinpredClamp = 700.0;
constexpr double kTargetAcceptance = 0.35;

double normal_log_pdf_prec(double x, double precision) {
    return 0.5 * std::log(precision / (2.0 * M_PI)) - 0.5 * precision * x * x;
}

// Which parameters of a family are positivity constrained (log-proposed).
std::vector<bool> positive_mask(Family f) {
    if (f == Family::exponential) return {true};
    if (f == Family::lognormal) return {false, true};  // mu unconstrained
    return {true, true};
}

Eigen::VectorXd theta_to_vec(const BaselineFamily& fam) {
    Eigen::VectorXd v(family_param_count(fam.family));
    v[0] = fam.p1;
    if (v.size() > 1) v[1] = fam.p2;
    return v;
}

BaselineFamily vec_to_theta(Family f, const Eigen::VectorXd& v) {
    BaselineFamily fam;
    fam.family = f;
    fam.p1 = v[0];
    if (v.size() > 1) fam.p2 = v[1];
    return fam;
}

double theta_log_prior(const BaselineFamily& fam, const PriorSpec& priors) {
    auto mask = positive_mask(fam.family);
    Eigen::VectorXd v = theta_to_vec(fam);
    double lp = 0.0;
    for (int k = 0; k < v.size(); ++k) {
        if (mask[k]) {
            if (!(v[k] > 0.0)) return kNegInf;
            lp += gamma_log_pdf(v[k], priors.theta_shape, priors.theta_rate);
        } else {
            lp += normal_log_pdf_prec(v[k], priors.mu_precision);
        }
    }
    return lp;
}

}  // namespace

void PriorSpec::validate() const {
    for (double h : {theta_shape, theta_rate, beta_precision, mu_precision, tau_shape, tau_rate,
                     eps_tau_shape, eps_tau_rate}) {
        if (!(h > 0.0)) throw std::invalid_argument("prior hyperparameters must be positive");
    }
}

double gamma_log_pdf(double x, double shape, double rate) {
    if (!(x > 0.0)) return kNegInf;
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double icar_quadratic(const AreaGraph& graph, const Eigen::VectorXd& psi) {
    double q = 0.0;
    for (auto [i, j] : graph.edges) {
        double d = psi[i - 1] - psi[j - 1];
        q += d * d;
    }
    return q;
}

ParameterState PosteriorDraws::state_at(int s, Family family) const {
    ParameterState st;
    st.theta = vec_to_theta(family, theta.row(s).transpose());
    st.beta = beta.row(s).transpose();
    if (tau_psi.size() > 0) st.tau_psi = tau_psi[s];
    if (psi.cols() > 0) st.psi = psi.row(s).transpose();
    if (eps.cols() > 0) st.eps = eps.row(s).transpose();
    return st;
}

double log_posterior(const ParameterState& state, const SurvivalDataset& data,
                     const AreaGraph* graph, const ModelSpec& spec) {
    auto mask = positive_mask(spec.family);
    Eigen::VectorXd tv = theta_to_vec(state.theta);
    for (int k = 0; k < tv.size(); ++k) {
        if (mask[k] && !(tv[k] > 0.0)) return kNegInf;
    }
    double lp = theta_log_prior(state.theta, spec.priors);
    for (int j = 0; j < state.beta.size(); ++j) {
        lp += normal_log_pdf_prec(state.beta[j], spec.priors.beta_precision);
    }
    if (spec.spatial) {
        if (!graph) throw std::invalid_argument("log_posterior: spatial spec requires a graph");
        if (!(state.tau_psi > 0.0)) return kNegInf;
        double n = static_cast<double>(graph->n);
        lp += 0.5 * (n - 1.0) * std::log(state.tau_psi) -
              0.5 * state.tau_psi * icar_quadratic(*graph, state.psi);
        lp += gamma_log_pdf(state.tau_psi, spec.priors.tau_shape, spec.priors.tau_rate);
    }
    if (spec.eps) {
        if (!(state.tau_eps > 0.0)) return kNegInf;
        double N = static_cast<double>(state.eps.size());
        lp += 0.5 * N * std::log(state.tau_eps) -
              0.5 * state.tau_eps * state.eps.squaredNorm();
        lp += gamma_log_pdf(state.tau_eps, spec.priors.eps_tau_shape, spec.priors.eps_tau_rate);
    }
    if (std::isinf(lp)) return kNegInf;
    const Eigen::VectorXd* eps_ptr = spec.eps ? &state.eps : nullptr;
    Eigen::VectorXd psi = spec.spatial ? state.psi : Eigen::VectorXd();
    return lp + log_likelihood(data, state.theta, state.beta, psi, eps_ptr);
}

namespace {

// Per-record baseline quantities at the current theta.
struct BaselineCache {
    Eigen::VectorXd log_h0;  // event records only (0 elsewhere)
    Eigen::VectorXd H0a;
    Eigen::VectorXd H0b;  // interval records only
};

class Sampler {
  public:
    Sampler(const SurvivalDataset& data, const AreaGraph* graph, const ModelSpec& spec,
            const McmcConfig& mcmc)
        : data_(data), graph_(graph), spec_(spec), mcmc_(mcmc), rng_(mcmc.seed) {
        spec_.priors.validate();
        if (spec_.spatial && !graph_) {
            throw std::invalid_argument("fit_unrestricted: spatial model requires a graph");
        }
        if (spec_.spatial && connected_components(*graph_) != 1) {
            throw std::invalid_argument("fit_unrestricted: graph must be connected");
        }
        N_ = data_.size();
        p_ = data_.n_covariates();
        n_ = spec_.spatial ? graph_->n : 0;
        log_t1_.resize(N_);
        log_t2_.resize(N_);
        for (int l = 0; l < N_; ++l) {
            log_t1_[l] = std::log(data_.records[l].t1);
            log_t2_[l] = data_.records[l].censor == Censor::interval
                             ? std::log(data_.records[l].t2)
                             : 0.0;
        }
        if (spec_.spatial) {
            area_records_.resize(n_);
            for (int l = 0; l < N_; ++l) area_records_[data_.area[l] - 1].push_back(l);
            neighbors_.resize(n_);
            for (auto [i, j] : graph_->edges) {
                neighbors_[i - 1].push_back(j - 1);
                neighbors_[j - 1].push_back(i - 1);
            }
            // Per-area covariate means drive the ridge moves that explore
            // directions where a covariate and the spatial effect trade off.
            area_mean_x_ = Eigen::MatrixXd::Zero(n_, p_);
            for (int l = 0; l < N_; ++l) area_mean_x_.row(data_.area[l] - 1) += data_.X.row(l);
            for (int i = 0; i < n_; ++i) {
                area_mean_x_.row(i) /= static_cast<double>(area_records_[i].size());
            }
        }
        init_state();
    }

    PosteriorDraws run() {
        const int q = family_param_count(spec_.family);
        const int S = std::max(0, (mcmc_.iterations - mcmc_.burn_in + mcmc_.thin - 1) / mcmc_.thin);
        PosteriorDraws out;
        out.theta_names = family_param_names(spec_.family);
        out.beta_names = data_.covariate_names;
        out.theta.resize(S, q);
        out.beta.resize(S, p_);
        if (spec_.spatial) {
            out.tau_psi.resize(S);
            out.psi.resize(S, n_);
        }
        if (spec_.eps) out.eps.resize(S, N_);
        out.seed = mcmc_.seed;
        out.iterations = mcmc_.iterations;
        out.burn_in = mcmc_.burn_in;
        out.thin = mcmc_.thin;

        int stored = 0;
        for (int it = 0; it < mcmc_.iterations; ++it) {
            adapting_ = it < mcmc_.burn_in;
            sweep();
            if (it >= mcmc_.burn_in && (it - mcmc_.burn_in) % mcmc_.thin == 0 && stored < S) {
                out.theta.row(stored) = theta_vec_.transpose();
                out.beta.row(stored) = beta_.transpose();
                if (spec_.spatial) {
                    out.tau_psi[stored] = tau_psi_;
                    out.psi.row(stored) = psi_.transpose();
                }
                if (spec_.eps) out.eps.row(stored) = eps_.transpose();
                ++stored;
            }
        }
        out.acceptance = acceptance_rates();
        return out;
    }

  private:
    struct Block {
        double log_scale = std::log(0.1);
        long proposals = 0;
        long accepts = 0;
        long adapt_steps = 0;
    };

    void init_state() {
        double sum_t = 0.0;
        int events = 0;
        for (int l = 0; l < N_; ++l) {
            sum_t += data_.records[l].t1;
            if (data_.records[l].censor == Censor::event) ++events;
        }
        double rate0 = std::max(events, 1) / std::max(sum_t, 1e-12);
        switch (spec_.family) {
            case Family::exponential: theta_vec_ = Eigen::VectorXd::Constant(1, rate0); break;
            case Family::weibull:
            case Family::gamma: {
                theta_vec_.resize(2);
                theta_vec_ << 1.0, rate0;
                break;
            }
            case Family::lognormal: {
                double m = 0.0, s2 = 0.0;
                for (int l = 0; l < N_; ++l) m += log_t1_[l];
                m /= N_;
                for (int l = 0; l < N_; ++l) s2 += (log_t1_[l] - m) * (log_t1_[l] - m);
                theta_vec_.resize(2);
                theta_vec_ << m, std::sqrt(std::max(s2 / std::max(N_ - 1, 1), 1e-4));
                break;
            }
        }
        beta_ = Eigen::VectorXd::Zero(p_);
        psi_ = Eigen::VectorXd::Zero(n_);
        tau_psi_ = 1.0;
        if (spec_.eps) eps_ = Eigen::VectorXd::Zero(N_);
        tau_eps_ = 1.0;

        blocks_["theta"] = Block{};
        if (p_ > 0) blocks_["beta"] = Block{};
        if (spec_.spatial) {
            if (p_ > 0 && spec_.ridge_moves) blocks_["ridge"] = Block{};
            blocks_["psi"] = Block{std::log(0.5)};
            if (!spec_.tau_gibbs) blocks_["tau_psi"] = Block{};
        }
        if (spec_.eps) blocks_["eps"] = Block{std::log(0.5)};

        lp_ = p_ > 0 ? (data_.X * beta_).eval() : Eigen::VectorXd::Zero(N_);
        refresh_cache(vec_to_theta(spec_.family, theta_vec_), cache_);
        loglik_ = total_loglik(cache_, lp_);
        if (!std::isfinite(loglik_)) {
            throw std::runtime_error("fit_unrestricted: non-finite posterior at initialization");
        }
    }

    void refresh_cache(const BaselineFamily& fam, BaselineCache& c) const {
        c.log_h0.resize(N_);
        c.H0a.resize(N_);
        c.H0b.resize(N_);
        switch (fam.family) {
            case Family::exponential: {
                double ll = std::log(fam.p1);
                for (int l = 0; l < N_; ++l) {
                    c.log_h0[l] = ll;
                    c.H0a[l] = fam.p1 * data_.records[l].t1;
                    if (data_.records[l].censor == Censor::interval) {
                        c.H0b[l] = fam.p1 * data_.records[l].t2;
                    }
                }
                break;
            }
            case Family::weibull: {
                double lal = std::log(fam.p1 * fam.p2);
                for (int l = 0; l < N_; ++l) {
                    c.log_h0[l] = lal + (fam.p1 - 1.0) * log_t1_[l];
                    c.H0a[l] = fam.p2 * std::exp(fam.p1 * log_t1_[l]);
                    if (data_.records[l].censor == Censor::interval) {
                        c.H0b[l] = fam.p2 * std::exp(fam.p1 * log_t2_[l]);
                    }
                }
                break;
            }
            default: {
                for (int l = 0; l < N_; ++l) {
                    const Record& r = data_.records[l];
                    c.H0a[l] = baseline_cumhazard(fam, r.t1);
                    if (r.censor == Censor::event) c.log_h0[l] = baseline_log_hazard(fam, r.t1);
                    if (r.censor == Censor::interval) c.H0b[l] = baseline_cumhazard(fam, r.t2);
                }
                break;
            }
        }
    }

    double record_contrib(const BaselineCache& c, int l, double lp) const {
        if (lp > kLinpredClamp) lp = kLinpredClamp;
        if (lp < -kLinpredClamp) lp = -kLinpredClamp;
        const double elp = std::exp(lp);
        switch (data_.records[l].censor) {
            case Censor::event:
                return c.log_h0[l] + lp - c.H0a[l] * elp;
            case Censor::right:
                return -c.H0a[l] * elp;
            case Censor::left: {
                double v = -std::expm1(-c.H0a[l] * elp);
                return v > 0.0 ? std::log(v) : kNegInf;
            }
            case Censor::interval: {
                double dH = c.H0b[l] - c.H0a[l];
                if (!(dH > 0.0)) return kNegInf;
                double gap = -std::expm1(-dH * elp);
                if (!(gap > 0.0)) return kNegInf;
                return -c.H0a[l] * elp + std::log(gap);
            }
        }
        return kNegInf;
    }

    double total_loglik(const BaselineCache& c, const Eigen::VectorXd& lp) const {
        double s = 0.0;
        for (int l = 0; l < N_; ++l) s += record_contrib(c, l, lp[l]);
        return s;
    }

    double area_loglik(const BaselineCache& c, int area, const Eigen::VectorXd& lp,
                       double shift) const {
        double s = 0.0;
        for (int l : area_records_[area]) s += record_contrib(c, l, lp[l] + shift);
        return s;
    }

    double normal_draw() { return normal_(rng_); }
    double uniform_draw() { return uniform_(rng_); }

    bool metropolis_accept(double log_ratio) {
        if (log_ratio >= 0.0) return true;
        if (std::isinf(log_ratio)) return false;
        return std::log(uniform_draw()) < log_ratio;
    }

    void adapt(Block& b, double accept_prob) {
        ++b.proposals;
        if (!adapting_) return;
        ++b.adapt_steps;
        double gamma = 1.0 / std::pow(static_cast<double>(b.adapt_steps) + 1.0, 0.6);
        b.log_scale += gamma * (accept_prob - kTargetAcceptance);
        if (b.log_scale > 30.0 || b.log_scale < -30.0) {
            throw std::runtime_error("fit_unrestricted: divergent proposal-scale adaptation");
        }
    }

    double theta_log_prior_and_jacobian(const Eigen::VectorXd& tv) const {
        BaselineFamily fam = vec_to_theta(spec_.family, tv);
        double lp = theta_log_prior(fam, spec_.priors);
        auto mask = positive_mask(spec_.family);
        for (int k = 0; k < tv.size(); ++k) {
            if (mask[k]) lp += std::log(tv[k]);
        }
        return lp;
    }

    void update_theta() {
        Block& b = blocks_["theta"];
        double s = std::exp(b.log_scale);
        auto mask = positive_mask(spec_.family);
        Eigen::VectorXd prop = theta_vec_;
        for (int k = 0; k < prop.size(); ++k) {
            double step = s * normal_draw();
            prop[k] = mask[k] ? prop[k] * std::exp(step) : prop[k] + step;
        }
        BaselineCache cand;
        refresh_cache(vec_to_theta(spec_.family, prop), cand);
        double cand_ll = total_loglik(cand, lp_);
        double log_ratio = cand_ll - loglik_ + theta_log_prior_and_jacobian(prop) -
                           theta_log_prior_and_jacobian(theta_vec_);
        double a = std::isfinite(log_ratio) ? std::min(1.0, std::exp(std::min(log_ratio, 0.0)))
                                            : 0.0;
        if (metropolis_accept(log_ratio)) {
            theta_vec_ = prop;
            std::swap(cache_, cand);
            loglik_ = cand_ll;
            ++b.accepts;
        }
        adapt(b, a);
    }

    void update_beta() {
        Block& b = blocks_["beta"];
        double s = std::exp(b.log_scale) / std::sqrt(static_cast<double>(p_));
        Eigen::VectorXd delta(p_);
        for (int j = 0; j < p_; ++j) delta[j] = s * normal_draw();
        Eigen::VectorXd lp_new = lp_ + data_.X * delta;
        double cand_ll = total_loglik(cache_, lp_new);
        double dprior = 0.0;
        for (int j = 0; j < p_; ++j) {
            dprior += normal_log_pdf_prec(beta_[j] + delta[j], spec_.priors.beta_precision) -
                      normal_log_pdf_prec(beta_[j], spec_.priors.beta_precision);
        }
        double log_ratio = cand_ll - loglik_ + dprior;
        double a = std::isfinite(log_ratio) ? std::min(1.0, std::exp(std::min(log_ratio, 0.0)))
                                            : 0.0;
        if (metropolis_accept(log_ratio)) {
            beta_ += delta;
            lp_ = std::move(lp_new);
            loglik_ = cand_ll;
            ++b.accepts;
        }
        adapt(b, a);
    }

    // Joint shift of beta_j and psi along the per-area covariate mean. For an
    // area-constant covariate the linear predictor is unchanged, so this moves
    // along the confounding ridge at prior cost only.
    void update_ridge() {
        Block& b = blocks_["ridge"];
        const double cap = std::log(spec_.ridge_scale_cap);
        for (int j = 0; j < p_; ++j) {
            b.log_scale = std::min(b.log_scale, cap);
            double s = std::exp(b.log_scale);
            double delta = s * normal_draw();
            Eigen::VectorXd psi_new = psi_ - delta * area_mean_x_.col(j);
            Eigen::VectorXd lp_new = lp_;
            for (int l = 0; l < N_; ++l) {
                lp_new[l] += delta * (data_.X(l, j) - area_mean_x_(data_.area[l] - 1, j));
            }
            double cand_ll = total_loglik(cache_, lp_new);
            double dprior =
                normal_log_pdf_prec(beta_[j] + delta, spec_.priors.beta_precision) -
                normal_log_pdf_prec(beta_[j], spec_.priors.beta_precision) -
                0.5 * tau_psi_ *
                    (icar_quadratic(*graph_, psi_new) - icar_quadratic(*graph_, psi_));
            double log_ratio = cand_ll - loglik_ + dprior;
            double a = std::isfinite(log_ratio)
                           ? std::min(1.0, std::exp(std::min(log_ratio, 0.0)))
                           : 0.0;
            if (metropolis_accept(log_ratio)) {
                beta_[j] += delta;
                psi_ = std::move(psi_new);
                lp_ = std::move(lp_new);
                loglik_ = cand_ll;
                ++b.accepts;
            }
            adapt(b, a);
        }
    }

    void update_psi() {
        Block& b = blocks_["psi"];
        double s = std::exp(b.log_scale);
        for (int i = 0; i < n_; ++i) {
            double delta = s * normal_draw();
            double dlik = area_loglik(cache_, i, lp_, delta) - area_loglik(cache_, i, lp_, 0.0);
            double dprior = 0.0;
            for (int j : neighbors_[i]) {
                double d0 = psi_[i] - psi_[j];
                double d1 = d0 + delta;
                dprior += d1 * d1 - d0 * d0;
            }
            double log_ratio = dlik - 0.5 * tau_psi_ * dprior;
            double a = std::isfinite(log_ratio)
                           ? std::min(1.0, std::exp(std::min(log_ratio, 0.0)))
                           : 0.0;
            if (metropolis_accept(log_ratio)) {
                psi_[i] += delta;
                for (int l : area_records_[i]) lp_[l] += delta;
                loglik_ += dlik;
                ++b.accepts;
            }
            adapt(b, a);
        }
        recenter_psi();
    }

    void recenter_psi() {
        double m = psi_.mean();
        if (m == 0.0) return;
        psi_.array() -= m;
        if (spec_.intercept && p_ > 0) {
            beta_[0] += m;  // intercept column absorbs the level, lp unchanged
        } else {
            lp_.array() -= m;
            loglik_ = total_loglik(cache_, lp_);
        }
    }

    void update_tau_psi() {
        double quad = icar_quadratic(*graph_, psi_);
        if (spec_.tau_gibbs) {
            double shape = spec_.priors.tau_shape + 0.5 * (static_cast<double>(n_) - 1.0);
            double rate = spec_.priors.tau_rate + 0.5 * quad;
            std::gamma_distribution<double> g(shape, 1.0 / rate);
            tau_psi_ = g(rng_);
        } else {
            Block& b = blocks_["tau_psi"];
            double s = std::exp(b.log_scale);
            double prop = tau_psi_ * std::exp(s * normal_draw());
            double n = static_cast<double>(n_);
            auto logpost = [&](double tau) {
                return 0.5 * (n - 1.0) * std::log(tau) - 0.5 * tau * quad +
                       gamma_log_pdf(tau, spec_.priors.tau_shape, spec_.priors.tau_rate) +
                       std::log(tau);  // log-scale proposal Jacobian
            };
            double log_ratio = logpost(prop) - logpost(tau_psi_);
            double a = std::isfinite(log_ratio)
                           ? std::min(1.0, std::exp(std::min(log_ratio, 0.0)))
                           : 0.0;
            if (metropolis_accept(log_ratio)) {
                tau_psi_ = prop;
                ++b.accepts;
            }
            adapt(b, a);
        }
    }

    void update_eps() {
        Block& b = blocks_["eps"];
        double s = std::exp(b.log_scale);
        long acc = 0;
        for (int l = 0; l < N_; ++l) {
            double delta = s * normal_draw();
            double dlik = record_contrib(cache_, l, lp_[l] + delta) -
                          record_contrib(cache_, l, lp_[l]);
            double e1 = eps_[l] + delta;
            double dprior = -0.5 * tau_eps_ * (e1 * e1 - eps_[l] * eps_[l]);
            double log_ratio = dlik + dprior;
            if (metropolis_accept(log_ratio)) {
                eps_[l] = e1;
                lp_[l] += delta;
                loglik_ += dlik;
                ++acc;
            }
        }
        adapt(b, static_cast<double>(acc) / static_cast<double>(N_));
        b.proposals += N_ - 1;
        b.accepts += acc;
        double shape = spec_.priors.eps_tau_shape + 0.5 * static_cast<double>(N_);
        double rate = spec_.priors.eps_tau_rate + 0.5 * eps_.squaredNorm();
        std::gamma_distribution<double> g(shape, 1.0 / rate);
        tau_eps_ = g(rng_);
    }

    void sweep() {
        update_theta();
        if (p_ > 0) update_beta();
        if (spec_.spatial) {
            if (p_ > 0 && spec_.ridge_moves) update_ridge();
            update_psi();
            update_tau_psi();
        }
        if (spec_.eps) update_eps();
    }

    std::map<std::string, double> acceptance_rates() const {
        std::map<std::string, double> rates;
        for (const auto& [name, b] : blocks_) {
            rates[name] = b.proposals > 0
                              ? static_cast<double>(b.accepts) / static_cast<double>(b.proposals)
                              : 0.0;
        }
        return rates;
    }

    const SurvivalDataset& data_;
    const AreaGraph* graph_;
    ModelSpec spec_;
    McmcConfig mcmc_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};

    int N_ = 0, p_ = 0, n_ = 0;
    std::vector<double> log_t1_, log_t2_;
    std::vector<std::vector<int>> area_records_;
    std::vector<std::vector<int>> neighbors_;
    Eigen::MatrixXd area_mean_x_;

    Eigen::VectorXd theta_vec_, beta_, psi_, eps_;
    double tau_psi_ = 1.0, tau_eps_ = 1.0;
    Eigen::VectorXd lp_;
    BaselineCache cache_;
    double loglik_ = 0.0;
    bool adapting_ = true;
    std::map<std::string, Block> blocks_;
};

}  // namespace

PosteriorDraws fit_unrestricted(const SurvivalDataset& data, const AreaGraph* graph,
                                const ModelSpec& spec, const McmcConfig& mcmc) {
    if (mcmc.iterations <= 0 || mcmc.burn_in < 0 || mcmc.burn_in >= mcmc.iterations ||
        mcmc.thin <= 0) {
        throw std::invalid_argument("fit_unrestricted: bad mcmc configuration");
    }
    return Sampler(data, graph, spec, mcmc).run();
}

double effective_sample_size(const Eigen::VectorXd& chain) {
    const int S = static_cast<int>(chain.size());
    if (S < 4) return 0.0;
    double mean = chain.mean();
    Eigen::VectorXd c = chain.array() - mean;
    double var = c.squaredNorm() / S;
    if (var <= 0.0) return 0.0;  // degenerate chain

    auto rho = [&](int k) {
        double s = 0.0;
        for (int t = 0; t + k < S; ++t) s += c[t] * c[t + k];
        return s / (S * var);
    };
    // Initial positive sequence estimator over lag pairs.
    double sum = 0.0;
    for (int k = 1; k + 1 < S; k += 2) {
        double pair = rho(k) + rho(k + 1);
        if (pair < 0.0) break;
        sum += pair;
    }
    return S / (1.0 + 2.0 * sum);
}

double split_rhat(const std::vector<Eigen::VectorXd>& chains) {
    std::vector<Eigen::VectorXd> halves;
    Eigen::Index L = std::numeric_limits<Eigen::Index>::max();
    for (const auto& ch : chains) L = std::min(L, ch.size());
    L -= L % 2;
    if (chains.empty() || L < 4) throw std::invalid_argument("split_rhat: chains too short");
    for (const auto& ch : chains) {
        halves.push_back(ch.head(L / 2));
        halves.push_back(ch.segment(L / 2, L / 2));
    }
    const double m = static_cast<double>(halves.size());
    const double len = static_cast<double>(L / 2);
    double grand = 0.0;
    std::vector<double> means, vars;
    for (const auto& h : halves) {
        means.push_back(h.mean());
        vars.push_back(sample_variance(h));
        grand += means.back();
    }
    grand /= m;
    double B = 0.0, W = 0.0;
    for (std::size_t k = 0; k < halves.size(); ++k) {
        B += (means[k] - grand) * (means[k] - grand);
        W += vars[k];
    }
    B *= len / (m - 1.0);
    W /= m;
    if (W <= 0.0) return 1.0;
    double var_plus = (len - 1.0) / len * W + B / len;
    return std::sqrt(var_plus / W);
}

McmcDiagnostics mcmc_diagnostics(const PosteriorDraws& draws) {
    if (draws.n_draws() < 100) {
        throw std::invalid_argument("mcmc_diagnostics: need at least 100 draws");
    }
    McmcDiagnostics d;
    d.acceptance = draws.acceptance;
    auto add = [&](const std::string& name, const Eigen::VectorXd& col) {
        d.names.push_back(name);
        double e = effective_sample_size(col);
        d.ess.push_back(e);
        if (e == 0.0) d.warnings.push_back("degenerate chain for " + name);
        d.rhat.push_back(split_rhat({col}));
    };
    for (int k = 0; k < draws.theta.cols(); ++k) add(draws.theta_names[k], draws.theta.col(k));
    for (int j = 0; j < draws.beta.cols(); ++j) {
        std::string name = j < static_cast<int>(draws.beta_names.size())
                               ? draws.beta_names[j]
                               : "beta_" + std::to_string(j + 1);
        add(name, draws.beta.col(j));
        if (d.ess.back() > 0.0 && d.ess.back() < 100.0) {
            d.warnings.push_back("low ESS (<100) for " + name);
        }
    }
    if (draws.tau_psi.size() > 0) add("tau_psi", draws.tau_psi);
    return d;
}

}  // namespace rsfm
