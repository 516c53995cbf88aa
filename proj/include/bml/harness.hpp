#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bml/anticonc.hpp"
#include "bml/matrix.hpp"

namespace bml {

enum class Mode { singularity, smin_quantiles, norm_tail, rowcol_only, udeg_survey, classify_survey };

const char* mode_name(Mode m);
std::optional<Mode> parse_mode(const std::string& s);

enum class Witness { zero_row, zero_col, dup_rows, dup_cols, other, none };
const char* witness_name(Witness w);

// A reproducible Monte-Carlo experiment. (seed, trial_index) drives all
// randomness; workers and output_path are runtime knobs and are excluded
// from the canonical identity (outputs must be byte-identical at any
// worker count).
struct ExperimentSpec {
    std::uint32_t n = 0;
    double p = 0.0;
    std::uint64_t trials = 1;
    std::uint64_t seed = 1;
    Mode mode = Mode::singularity;
    unsigned workers = 1;
    std::string output_path;

    UDegreeParams udeg;                  // udeg_survey
    std::vector<double> norm_t{30, 40};  // norm_tail exceedance multipliers
    bool classify_constant_p = false;    // classify_survey mode switch

    // Test hook: replaces the Bernoulli generator (not part of the
    // canonical identity).
    std::function<SparseBinaryMatrix(std::uint64_t)> generator_override;
};

struct TrialRecord {
    std::uint64_t trial_index = 0;
    bool singular = false;
    Witness witness = Witness::none;
    std::optional<double> s_min;
    std::uint64_t wall_time_us = 0;  // diagnostic only; never serialized
};

// Canonical FNV-1a hash of the experiment identity.
std::uint64_t spec_hash(const ExperimentSpec& spec);

nlohmann::json run_singularity_mc(const ExperimentSpec& spec,
                                  std::vector<TrialRecord>* records_out = nullptr);
nlohmann::json run_smin_quantiles(const ExperimentSpec& spec,
                                  std::vector<TrialRecord>* records_out = nullptr);
nlohmann::json run_norm_tail(const ExperimentSpec& spec);
nlohmann::json run_udeg_survey(const ExperimentSpec& spec);
nlohmann::json run_classify_survey(const ExperimentSpec& spec);

// Dispatches on spec.mode; when output_path is set writes the per-trial
// CSV there and the JSON summary next to it (path + ".summary.json").
nlohmann::json run_experiment(const ExperimentSpec& spec);

std::string records_csv(const ExperimentSpec& spec, const std::vector<TrialRecord>& records);

}  // namespace bml
