#include "rsfm/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace rsfm {

namespace {

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(where + ": cannot parse number '" + s + "'");
    }
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void write_row(std::ofstream& out, const std::vector<double>& vals) {
    for (std::size_t k = 0; k < vals.size(); ++k) {
        if (k) out << ",";
        out << vals[k];
    }
    out << "\n";
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

int CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    t.header = split_csv_line(line);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != t.header.size()) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(t.header.size()) + " fields, got " +
                                     std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
    }
    return t;
}

SurvivalDataset load_dataset_csv(const std::string& path, bool scale_time) {
    CsvTable t = read_csv(path);
    int c_time = t.column("time");
    int c_tlo = t.column("time_lower");
    int c_thi = t.column("time_upper");
    int c_censor = t.column("censor");
    int c_area = t.column("area");
    if (c_censor < 0) throw std::runtime_error(path + ": missing required column 'censor'");
    if (c_area < 0) throw std::runtime_error(path + ": missing required column 'area'");
    if (c_time < 0 && (c_tlo < 0 || c_thi < 0)) {
        throw std::runtime_error(path + ": need column 'time' or 'time_lower'+'time_upper'");
    }

    std::vector<int> cov_cols;
    SurvivalDataset data;
    for (int k = 0; k < static_cast<int>(t.header.size()); ++k) {
        if (k == c_time || k == c_tlo || k == c_thi || k == c_censor || k == c_area) continue;
        cov_cols.push_back(k);
        data.covariate_names.push_back(t.header[k]);
    }

    const int N = static_cast<int>(t.rows.size());
    const int p = static_cast<int>(cov_cols.size());
    data.X.resize(N, p);
    data.records.resize(N);
    data.area.resize(N);
    int max_area = 0;
    for (int l = 0; l < N; ++l) {
        const auto& row = t.rows[l];
        std::string where = path + " row " + std::to_string(l + 2);
        Record& r = data.records[l];
        r.censor = censor_from_string(row[c_censor]);
        if (r.censor == Censor::interval) {
            if (c_tlo < 0 || c_thi < 0) {
                throw std::runtime_error(where + ": interval record needs time_lower/time_upper");
            }
            r.t1 = parse_double(row[c_tlo], where + " time_lower");
            r.t2 = parse_double(row[c_thi], where + " time_upper");
        } else {
            int c = c_time >= 0 ? c_time : c_tlo;
            r.t1 = parse_double(row[c], where + " time");
        }
        double a = parse_double(row[c_area], where + " area");
        data.area[l] = static_cast<int>(a);
        max_area = std::max(max_area, data.area[l]);
        for (int k = 0; k < p; ++k) {
            data.X(l, k) = parse_double(row[cov_cols[k]], where + " " + data.covariate_names[k]);
        }
    }
    data.n_areas = max_area;
    if (scale_time) {
        double tmax = 0.0;
        for (const Record& r : data.records) tmax = std::max({tmax, r.t1, r.t2});
        if (tmax > 0.0) {
            for (Record& r : data.records) {
                r.t1 /= tmax;
                r.t2 /= tmax;
            }
        }
    }
    data.validate();
    return data;
}

void write_dataset_csv(const SurvivalDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << std::setprecision(17);
    bool has_interval = std::any_of(data.records.begin(), data.records.end(),
                                    [](const Record& r) { return r.censor == Censor::interval; });
    out << (has_interval ? "time_lower,time_upper" : "time") << ",censor,area";
    for (const auto& name : data.covariate_names) out << "," << name;
    out << "\n";
    for (int l = 0; l < data.size(); ++l) {
        const Record& r = data.records[l];
        if (has_interval) {
            out << r.t1 << "," << (r.censor == Censor::interval ? r.t2 : r.t1);
        } else {
            out << r.t1;
        }
        out << "," << censor_name(r.censor) << "," << data.area[l];
        for (int k = 0; k < data.X.cols(); ++k) out << "," << data.X(l, k);
        out << "\n";
    }
}

void write_draws_csv(const PosteriorDraws& draws, Family family, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << std::setprecision(17);
    std::vector<std::string> cols = draws.theta_names;
    for (int j = 1; j <= draws.beta.cols(); ++j) cols.push_back("beta_" + std::to_string(j));
    if (draws.tau_psi.size() > 0) cols.push_back("tau_psi");
    for (int i = 1; i <= draws.psi.cols(); ++i) cols.push_back("psi_" + std::to_string(i));
    for (int l = 1; l <= draws.eps.cols(); ++l) cols.push_back("eps_" + std::to_string(l));
    for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
    out << "\n";
    std::vector<double> row;
    for (int s = 0; s < draws.n_draws(); ++s) {
        row.clear();
        for (int k = 0; k < draws.theta.cols(); ++k) row.push_back(draws.theta(s, k));
        for (int j = 0; j < draws.beta.cols(); ++j) row.push_back(draws.beta(s, j));
        if (draws.tau_psi.size() > 0) row.push_back(draws.tau_psi[s]);
        for (int i = 0; i < draws.psi.cols(); ++i) row.push_back(draws.psi(s, i));
        for (int l = 0; l < draws.eps.cols(); ++l) row.push_back(draws.eps(s, l));
        write_row(out, row);
    }

    std::map<std::string, std::string> meta;
    meta["family"] = family_name(family);
    meta["seed"] = std::to_string(draws.seed);
    meta["iterations"] = std::to_string(draws.iterations);
    meta["burn_in"] = std::to_string(draws.burn_in);
    meta["thin"] = std::to_string(draws.thin);
    std::string beta_names;
    for (std::size_t j = 0; j < draws.beta_names.size(); ++j) {
        beta_names += (j ? "," : "") + draws.beta_names[j];
    }
    meta["beta_names"] = beta_names;
    for (const auto& [name, rate] : draws.acceptance) {
        meta["acceptance_" + name] = std::to_string(rate);
    }
    write_key_values(meta, path + ".meta");
}

PosteriorDraws load_draws_csv(const std::string& path, Family family) {
    CsvTable t = read_csv(path);
    if (t.rows.empty()) throw std::runtime_error(path + ": draws file has no rows");
    PosteriorDraws d;
    d.theta_names = family_param_names(family);
    std::vector<int> theta_cols, beta_cols, psi_cols, eps_cols;
    for (const auto& name : d.theta_names) {
        int c = t.column(name);
        if (c < 0) {
            throw std::runtime_error(path + ": missing " + family_name(family) +
                                     " parameter column '" + name + "'");
        }
        theta_cols.push_back(c);
    }
    for (int j = 1;; ++j) {
        int c = t.column("beta_" + std::to_string(j));
        if (c < 0) break;
        beta_cols.push_back(c);
    }
    for (int i = 1;; ++i) {
        int c = t.column("psi_" + std::to_string(i));
        if (c < 0) break;
        psi_cols.push_back(c);
    }
    for (int l = 1;; ++l) {
        int c = t.column("eps_" + std::to_string(l));
        if (c < 0) break;
        eps_cols.push_back(c);
    }
    int c_tau = t.column("tau_psi");

    const int S = static_cast<int>(t.rows.size());
    d.theta.resize(S, theta_cols.size());
    d.beta.resize(S, beta_cols.size());
    if (c_tau >= 0) d.tau_psi.resize(S);
    d.psi.resize(S, psi_cols.size());
    d.eps.resize(S, eps_cols.size());
    for (int s = 0; s < S; ++s) {
        const auto& row = t.rows[s];
        std::string where = path + " row " + std::to_string(s + 2);
        for (std::size_t k = 0; k < theta_cols.size(); ++k) {
            d.theta(s, k) = parse_double(row[theta_cols[k]], where);
        }
        for (std::size_t j = 0; j < beta_cols.size(); ++j) {
            d.beta(s, j) = parse_double(row[beta_cols[j]], where);
        }
        if (c_tau >= 0) d.tau_psi[s] = parse_double(row[c_tau], where);
        for (std::size_t i = 0; i < psi_cols.size(); ++i) {
            d.psi(s, i) = parse_double(row[psi_cols[i]], where);
        }
        for (std::size_t l = 0; l < eps_cols.size(); ++l) {
            d.eps(s, l) = parse_double(row[eps_cols[l]], where);
        }
    }

    std::string meta_path = path + ".meta";
    if (std::filesystem::exists(meta_path)) {
        auto meta = load_key_values(meta_path);
        auto get_int = [&](const std::string& key, int& target) {
            if (auto it = meta.find(key); it != meta.end()) target = std::stoi(it->second);
        };
        get_int("iterations", d.iterations);
        get_int("burn_in", d.burn_in);
        get_int("thin", d.thin);
        if (auto it = meta.find("seed"); it != meta.end()) d.seed = std::stoull(it->second);
        if (auto it = meta.find("beta_names"); it != meta.end() && !it->second.empty()) {
            d.beta_names = split_csv_line(it->second);
        }
        for (const auto& [key, value] : meta) {
            if (key.rfind("acceptance_", 0) == 0) {
                d.acceptance[key.substr(11)] = std::stod(value);
            }
        }
    }
    if (d.beta_names.empty()) {
        for (std::size_t j = 1; j <= beta_cols.size(); ++j) {
            d.beta_names.push_back("beta_" + std::to_string(j));
        }
    }
    return d;
}

std::map<std::string, std::string> load_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = trim(line.substr(0, eq));
        if (!key.empty()) kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

void write_key_values(const std::map<std::string, std::string>& kv, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const auto& [key, value] : kv) out << key << " = " << value << "\n";
}

}  // namespace rsfm
