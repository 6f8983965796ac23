#pragma once

#include "rsfm/inference.hpp"
#include "rsfm/survival.hpp"

#include <map>
#include <string>
#include <vector>

namespace rsfm {

// Dataset CSV: header row; columns `time` (or `time_lower`,`time_upper`),
// `censor` in {event,right,left,interval}, `area` (1-indexed), remaining
// columns are covariates in order. scale_time divides all times by the max.
SurvivalDataset load_dataset_csv(const std::string& path, bool scale_time = false);
void write_dataset_csv(const SurvivalDataset& data, const std::string& path);

// Draws CSV: one row per draw; family parameter columns, beta_*, tau_psi,
// psi_1..psi_n (and eps_* when present). Metadata lives in a key=value
// sidecar at <path>.meta.
void write_draws_csv(const PosteriorDraws& draws, Family family, const std::string& path);
PosteriorDraws load_draws_csv(const std::string& path, Family family);

// key = value lines, '#' comments.
std::map<std::string, std::string> load_key_values(const std::string& path);
void write_key_values(const std::map<std::string, std::string>& kv, const std::string& path);

// Minimal CSV handling (no quoting; our schemas never need it).
std::vector<std::string> split_csv_line(const std::string& line);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

}  // namespace rsfm
