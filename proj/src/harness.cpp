#include "bml/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "bml/bounds.hpp"
#include "bml/classes.hpp"
#include "bml/exact.hpp"
#include "bml/rng.hpp"
#include "bml/spectral.hpp"

namespace bml {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double quantile(std::vector<double> v, double f) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    auto idx = static_cast<std::size_t>(f * static_cast<double>(v.size()));
    return v[std::min(idx, v.size() - 1)];
}

SparseBinaryMatrix trial_matrix(const ExperimentSpec& spec, std::uint64_t trial) {
    if (spec.generator_override) return spec.generator_override(trial);
    return generate({spec.n, spec.p, spec.seed, trial});
}

Witness pick_witness(const WitnessReport& rep) {
    if (!rep.zero_rows.empty()) return Witness::zero_row;
    if (!rep.zero_cols.empty()) return Witness::zero_col;
    if (!rep.dup_rows.empty()) return Witness::dup_rows;
    if (!rep.dup_cols.empty()) return Witness::dup_cols;
    return Witness::none;
}

nlohmann::json base_summary(const ExperimentSpec& spec) {
    char hash_hex[24];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(spec_hash(spec)));
    nlohmann::json j;
    j["schema"] = "BSL-1";
    j["mode"] = mode_name(spec.mode);
    j["n"] = spec.n;
    j["p"] = spec.p;
    j["trials"] = spec.trials;
    j["seed"] = spec.seed;
    j["spec_hash"] = hash_hex;
    return j;
}

}  // namespace

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::singularity: return "singularity";
        case Mode::smin_quantiles: return "smin_quantiles";
        case Mode::norm_tail: return "norm_tail";
        case Mode::rowcol_only: return "rowcol_only";
        case Mode::udeg_survey: return "udeg_survey";
        case Mode::classify_survey: return "classify_survey";
    }
    return "?";
}

std::optional<Mode> parse_mode(const std::string& s) {
    for (Mode m : {Mode::singularity, Mode::smin_quantiles, Mode::norm_tail, Mode::rowcol_only,
                   Mode::udeg_survey, Mode::classify_survey})
        if (s == mode_name(m)) return m;
    return std::nullopt;
}

const char* witness_name(Witness w) {
    switch (w) {
        case Witness::zero_row: return "zero_row";
        case Witness::zero_col: return "zero_col";
        case Witness::dup_rows: return "dup_rows";
        case Witness::dup_cols: return "dup_cols";
        case Witness::other: return "other";
        case Witness::none: return "none";
    }
    return "?";
}

std::uint64_t spec_hash(const ExperimentSpec& spec) {
    std::ostringstream os;
    os << "BSL-1|" << mode_name(spec.mode) << "|n=" << spec.n << "|p=" << fmt_double(spec.p)
       << "|trials=" << spec.trials << "|seed=" << spec.seed;
    if (spec.mode == Mode::udeg_survey) {
        os << "|m=" << spec.udeg.m << "|K1=" << fmt_double(spec.udeg.K1)
           << "|K2=" << fmt_double(spec.udeg.K2) << "|S=" << spec.udeg.partition_samples
           << "|qsf=" << fmt_double(spec.udeg.quad_step_factor)
           << "|tmax=" << fmt_double(spec.udeg.t_max);
    }
    if (spec.mode == Mode::norm_tail)
        for (double t : spec.norm_t) os << "|t=" << fmt_double(t);
    if (spec.mode == Mode::classify_survey) os << "|constp=" << spec.classify_constant_p;
    std::string s = os.str();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string records_csv(const ExperimentSpec& spec, const std::vector<TrialRecord>& records) {
    std::ostringstream os;
    char hash_hex[24];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(spec_hash(spec)));
    os << "# BSL-1 mode=" << mode_name(spec.mode) << " n=" << spec.n << " p=" << fmt_double(spec.p)
       << " trials=" << spec.trials << " seed=" << spec.seed << " spec_hash=" << hash_hex << "\n";
    os << "trial_index,singular,witness,s_min\n";
    for (const auto& r : records) {
        os << r.trial_index << ',' << (r.singular ? 1 : 0) << ',' << witness_name(r.witness) << ',';
        if (r.s_min) os << fmt_double(*r.s_min);
        os << '\n';
    }
    return os.str();
}

namespace {

// Shared per-trial pipeline for singularity-style modes.
void run_trials(const ExperimentSpec& spec, bool structural_only, bool with_smin,
                std::vector<TrialRecord>& records) {
    records.assign(spec.trials, {});
    parallel_chunks(spec.trials, spec.workers, 16, [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t t = lo; t < hi; ++t) {
            auto t0 = std::chrono::steady_clock::now();
            TrialRecord rec;
            rec.trial_index = t;
            SparseBinaryMatrix M = trial_matrix(spec, t);
            auto rep = structural_scan(M);
            rec.witness = pick_witness(rep);
            if (structural_only) {
                rec.singular = rec.witness == Witness::zero_row || rec.witness == Witness::zero_col;
            } else if (rec.witness != Witness::none) {
                rec.singular = true;
            } else {
                auto verdict = decide_singular(M);
                rec.singular = verdict.singular;
                if (rec.singular) {
                    rec.witness = Witness::other;
                    if (rank_over_rationals(M) >= M.n())
                        throw std::logic_error("harness: 'other' witness failed rank re-verification");
                }
            }
            if (with_smin) rec.s_min = smallest_singular_value(M, 1e-9);
            rec.wall_time_us = static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::microseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count());
            records[t] = std::move(rec);
        }
    });
}

nlohmann::json summarize_singularity(const ExperimentSpec& spec,
                                     const std::vector<TrialRecord>& records) {
    nlohmann::json j = base_summary(spec);
    std::uint64_t singular = 0;
    std::map<std::string, std::uint64_t> witness_counts;
    for (Witness w : {Witness::zero_row, Witness::zero_col, Witness::dup_rows, Witness::dup_cols,
                      Witness::other, Witness::none})
        witness_counts[witness_name(w)] = 0;
    std::uint64_t zero_rowcol = 0;
    for (const auto& r : records) {
        singular += r.singular;
        witness_counts[witness_name(r.witness)]++;
        if (r.witness == Witness::zero_row || r.witness == Witness::zero_col) ++zero_rowcol;
    }
    double p_hat = static_cast<double>(singular) / static_cast<double>(spec.trials);
    auto [lo, hi] = wilson_ci(singular, spec.trials);
    j["singular_count"] = singular;
    j["p_singular"] = p_hat;
    j["wilson_lo"] = lo;
    j["wilson_hi"] = hi;
    j["witness_counts"] = witness_counts;
    j["zero_rowcol_fraction"] = static_cast<double>(zero_rowcol) / static_cast<double>(spec.trials);
    double pred = singularity_prediction(spec.n, spec.p);
    j["prediction_2n1pn"] = pred;
    j["ratio_to_prediction"] = pred > 0 ? p_hat / pred : 0.0;
    if (spec.n <= 400) {
        double exact = zero_rowcol_exact(spec.n, spec.p);
        j["zero_rowcol_exact"] = exact;
        j["ratio_to_zero_rowcol_exact"] = exact > 0 ? p_hat / exact : 0.0;
    }
    if (singular > 0)
        j["witness_fraction_among_singular"] =
            static_cast<double>(zero_rowcol) / static_cast<double>(singular);
    return j;
}

}  // namespace

nlohmann::json run_singularity_mc(const ExperimentSpec& spec,
                                  std::vector<TrialRecord>* records_out) {
    std::vector<TrialRecord> records;
    run_trials(spec, spec.mode == Mode::rowcol_only, false, records);
    auto j = summarize_singularity(spec, records);
    if (records_out) *records_out = std::move(records);
    return j;
}

nlohmann::json run_smin_quantiles(const ExperimentSpec& spec,
                                  std::vector<TrialRecord>* records_out) {
    std::vector<TrialRecord> records;
    run_trials(spec, false, true, records);
    nlohmann::json j = summarize_singularity(spec, records);
    std::vector<double> smins;
    smins.reserve(records.size());
    for (const auto& r : records) smins.push_back(r.s_min.value_or(0.0));
    nlohmann::json q;
    for (double f : {0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.99})
        q[fmt_double(f)] = quantile(smins, f);
    j["smin_quantiles"] = q;
    const double theorem_threshold = std::exp(-3.0 * std::pow(std::log(2.0 * spec.n), 2.0));
    nlohmann::json below;
    for (double thr : {theorem_threshold, 1e-8}) {
        std::uint64_t c = 0;
        for (double s : smins) c += s <= thr;
        below[fmt_double(thr)] = static_cast<double>(c) / static_cast<double>(records.size());
    }
    j["smin_threshold_theorem"] = theorem_threshold;
    j["fraction_below"] = below;
    if (records_out) *records_out = std::move(records);
    return j;
}

nlohmann::json run_norm_tail(const ExperimentSpec& spec) {
    const double ln_n = std::log(static_cast<double>(spec.n));
    if (spec.n * spec.p < 4.0 * ln_n)
        throw RegimeError("run_norm_tail: requires p n >= 4 ln n");
    const double sqrt_np = std::sqrt(spec.n * spec.p);

    std::vector<double> norms(spec.trials, 0.0);
    parallel_chunks(spec.trials, spec.workers, 4, [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t t = lo; t < hi; ++t) {
            SparseBinaryMatrix M = trial_matrix(spec, t);
            norms[t] = centered_spectral_norm(M, spec.p, 1e-6);
        }
    });

    nlohmann::json j = base_summary(spec);
    double mean_ratio = 0;
    for (double v : norms) mean_ratio += v / sqrt_np;
    mean_ratio /= static_cast<double>(spec.trials);
    j["mean_norm_over_sqrt_np"] = mean_ratio;
    nlohmann::json checks = nlohmann::json::array();
    for (double t : spec.norm_t) {
        std::uint64_t exceed = 0;
        for (double v : norms) exceed += v >= 2.0 * t * sqrt_np;
        double log_bound = std::log(4.0) - t * t * spec.p * spec.n / 4.0;
        checks.push_back({{"t", t},
                          {"threshold", 2.0 * t * sqrt_np},
                          {"exceedances", exceed},
                          {"bound_log", log_bound}});
    }
    j["tail_checks"] = checks;
    return j;
}

nlohmann::json run_udeg_survey(const ExperimentSpec& spec) {
    UDegreeParams params = spec.udeg;
    if (params.m == 0) {
        auto m = static_cast<std::uint32_t>(std::lround(spec.p * spec.n));
        params.m = std::clamp<std::uint32_t>(m, 1, spec.n / 2);
    }
    struct Row {
        double normal_lo = -1, sphere_lo = -1;  // -1 = degenerate/skipped
        bool normal_censored = false, sphere_censored = false;
    };
    std::vector<Row> rows(spec.trials);
    parallel_chunks(spec.trials, spec.workers, 1, [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t t = lo; t < hi; ++t) {
            Row row;
            SparseBinaryMatrix M = trial_matrix(spec, t);
            auto normal = normal_to_complement(M, static_cast<std::uint32_t>(t % spec.n));
            if (normal) {
                if (auto nu = normalize_upsilon(*normal, 0.01)) {
                    auto est = u_degree_estimate(nu->first, params, stream_key(spec.seed, 2 * t));
                    row.normal_lo = est.ud_lower;
                    row.normal_censored = est.censored;
                }
            }
            Xoshiro256pp rng(spec.seed, 2 * t + 1);
            std::vector<double> g(spec.n);
            for (auto& v : g) v = rng.normal();
            if (auto nu = normalize_upsilon(g, 0.01)) {
                auto est = u_degree_estimate(nu->first, params, stream_key(spec.seed, 2 * t + 1));
                row.sphere_lo = est.ud_lower;
                row.sphere_censored = est.censored;
            }
            rows[t] = row;
        }
    });

    nlohmann::json j = base_summary(spec);
    j["m"] = params.m;
    j["K1"] = params.K1;
    j["K2"] = params.K2;
    j["partition_samples"] = params.partition_samples;
    j["t_max"] = params.t_max;
    auto summarize = [&](auto get_lo, auto get_cens, const char* key) {
        std::vector<double> lows;
        std::uint64_t censored = 0, skipped = 0;
        for (const auto& r : rows) {
            double v = get_lo(r);
            if (v < 0) {
                ++skipped;
                continue;
            }
            lows.push_back(v);
            censored += get_cens(r);
        }
        nlohmann::json q;
        for (double f : {0.05, 0.25, 0.50, 0.75, 0.95}) q[fmt_double(f)] = quantile(lows, f);
        j[key] = {{"count", lows.size()},
                  {"skipped_degenerate", skipped},
                  {"censored", censored},
                  {"ud_lower_quantiles", q}};
    };
    summarize([](const Row& r) { return r.normal_lo; },
              [](const Row& r) { return r.normal_censored; }, "normal_vectors");
    summarize([](const Row& r) { return r.sphere_lo; },
              [](const Row& r) { return r.sphere_censored; }, "sphere_vectors");
    return j;
}

nlohmann::json run_classify_survey(const ExperimentSpec& spec) {
    auto cfg = default_config(spec.n, spec.p, spec.classify_constant_p);
    struct Row {
        std::string sphere_label;
        std::string normal_label;  // empty = degenerate/skipped
    };
    std::vector<Row> rows(spec.trials);
    parallel_chunks(spec.trials, spec.workers, 8, [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t t = lo; t < hi; ++t) {
            Row row;
            Xoshiro256pp rng(spec.seed, t);
            std::vector<double> g(spec.n);
            for (auto& v : g) v = rng.normal();
            row.sphere_label = classify(g, cfg).to_string();
            SparseBinaryMatrix M = trial_matrix(spec, t);
            auto normal = normal_to_complement(M, static_cast<std::uint32_t>(t % spec.n));
            if (normal) row.normal_label = classify(*normal, cfg).to_string();
            rows[t] = row;
        }
    });

    nlohmann::json j = base_summary(spec);
    j["config"] = cfg.to_json();
    std::map<std::string, std::uint64_t> sphere_hist, normal_hist;
    std::uint64_t degenerate = 0;
    for (const auto& r : rows) {
        sphere_hist[r.sphere_label]++;
        if (r.normal_label.empty())
            ++degenerate;
        else
            normal_hist[r.normal_label]++;
    }
    j["sphere_labels"] = sphere_hist;
    j["normal_labels"] = normal_hist;
    j["normal_degenerate_skipped"] = degenerate;
    std::uint64_t uncl = sphere_hist.count("unclassified") ? sphere_hist["unclassified"] : 0;
    j["sphere_unclassified_fraction"] =
        static_cast<double>(uncl) / static_cast<double>(spec.trials);
    return j;
}

nlohmann::json run_experiment(const ExperimentSpec& spec) {
    nlohmann::json summary;
    std::vector<TrialRecord> records;
    bool have_records = false;
    switch (spec.mode) {
        case Mode::singularity:
        case Mode::rowcol_only:
            summary = run_singularity_mc(spec, &records);
            have_records = true;
            break;
        case Mode::smin_quantiles:
            summary = run_smin_quantiles(spec, &records);
            have_records = true;
            break;
        case Mode::norm_tail: summary = run_norm_tail(spec); break;
        case Mode::udeg_survey: summary = run_udeg_survey(spec); break;
        case Mode::classify_survey: summary = run_classify_survey(spec); break;
    }
    if (!spec.output_path.empty()) {
        if (have_records) {
            std::ofstream os(spec.output_path, std::ios::binary);
            if (!os) throw std::runtime_error("cannot open output file: " + spec.output_path);
            os << records_csv(spec, records);
        }
        std::ofstream js(spec.output_path + ".summary.json", std::ios::binary);
        if (!js) throw std::runtime_error("cannot open output file: " + spec.output_path);
        js << summary.dump(2) << '\n';
    }
    return summary;
}

}  // namespace bml
