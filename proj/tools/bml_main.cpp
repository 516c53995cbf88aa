// bml: a lab for sparse Bernoulli(p) 0/1 matrices -- exact singularity
// testing, structural witness attribution, spectral diagnostics,
// anti-concentration functionals and vector-class surveys.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "bml/anticonc.hpp"
#include "bml/bounds.hpp"
#include "bml/classes.hpp"
#include "bml/exact.hpp"
#include "bml/harness.hpp"
#include "bml/matrix.hpp"
#include "bml/rng.hpp"
#include "bml/spectral.hpp"

namespace {

struct GlobalOpts {
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string out;
    bool json = false;
};

void print_summary(const nlohmann::json& j, bool as_json) {
    if (as_json) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    for (auto it = j.begin(); it != j.end(); ++it)
        std::cout << it.key() << ": " << it.value().dump() << '\n';
}

std::vector<double> parse_vector_line(const std::string& line) {
    std::istringstream is(line);
    std::vector<double> v;
    double x;
    while (is >> x) v.push_back(x);
    return v;
}

int run_mc_mode(const GlobalOpts& g, bml::Mode mode, std::uint32_t n, double p,
                std::uint64_t trials, const bml::UDegreeParams* udeg, bool constp) {
    bml::ExperimentSpec spec;
    spec.n = n;
    spec.p = p;
    spec.trials = trials;
    spec.seed = g.seed;
    spec.mode = mode;
    spec.workers = g.workers;
    spec.output_path = g.out;
    if (udeg) spec.udeg = *udeg;
    spec.classify_constant_p = constp;
    auto summary = bml::run_experiment(spec);
    print_summary(summary, g.json);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse Bernoulli 0/1 matrix laboratory"};
    app.set_config("--config", "", "key=value config file (flags override)");

    GlobalOpts g;
    app.add_option("--seed", g.seed, "base RNG seed")->capture_default_str();
    app.add_option("--workers", g.workers, "worker threads")->capture_default_str();
    app.add_option("--out", g.out, "output path (per-trial CSV + .summary.json)");
    app.add_flag("--json", g.json, "print the JSON summary instead of key: value lines");

    std::uint32_t n = 100;
    double p = 0.1;
    std::uint64_t trials = 1000;

    // gen -------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate one matrix and write it in SBM v1 format");
    std::uint64_t gen_trial = 0;
    std::string gen_out = "-";
    gen->add_option("--n", n, "dimension")->required();
    gen->add_option("--p", p, "Bernoulli parameter")->required();
    gen->add_option("--trial", gen_trial, "trial index within the seed's stream");
    gen->add_option("--matrix-out", gen_out, "file path or - for stdout");

    // singular ---------------------------------------------------------
    auto* sing = app.add_subcommand("singular", "exact singularity verdict for an SBM v1 file");
    std::string sing_in;
    sing->add_option("file", sing_in, "SBM v1 file (- for stdin)")->required();

    // mc ----------------------------------------------------------------
    auto* mc = app.add_subcommand("mc", "singularity Monte Carlo with witness attribution");
    bool mc_rowcol_only = false;
    mc->add_option("--n", n, "dimension")->required();
    mc->add_option("--p", p, "Bernoulli parameter")->required();
    mc->add_option("--trials", trials, "number of trials")->capture_default_str();
    mc->add_flag("--rowcol-only", mc_rowcol_only, "structural zero row/column scan only");

    // smin ----------------------------------------------------------------
    auto* smin = app.add_subcommand("smin", "smallest singular value quantiles");
    smin->add_option("--n", n, "dimension")->required();
    smin->add_option("--p", p, "Bernoulli parameter")->required();
    smin->add_option("--trials", trials, "number of trials")->capture_default_str();

    // norms ----------------------------------------------------------------
    auto* norms = app.add_subcommand("norms", "centered operator norm tail check");
    norms->add_option("--n", n, "dimension")->required();
    norms->add_option("--p", p, "Bernoulli parameter")->required();
    norms->add_option("--trials", trials, "number of trials")->capture_default_str();

    // udeg ----------------------------------------------------------------
    auto* udeg = app.add_subcommand("udeg", "u-degree survey over normal and sphere vectors");
    bml::UDegreeParams up;
    up.m = 0;  // auto: round(p n)
    udeg->add_option("--n", n, "dimension")->required();
    udeg->add_option("--p", p, "Bernoulli parameter")->required();
    udeg->add_option("--trials", trials, "number of trials")->capture_default_str();
    udeg->add_option("--m", up.m, "subset count m (0 = round(p n))")->capture_default_str();
    udeg->add_option("--K1", up.K1, "integral budget K1")->capture_default_str();
    udeg->add_option("--K2", up.K2, "smoothing K2")->capture_default_str();
    udeg->add_option("--partition-samples", up.partition_samples, "sequence samples")
        ->capture_default_str();
    udeg->add_option("--quad-step-factor", up.quad_step_factor, "grid step multiplier")
        ->capture_default_str();
    udeg->add_option("--t-max", up.t_max, "bisection ceiling")->capture_default_str();

    // classify ----------------------------------------------------------------
    auto* cls = app.add_subcommand("classify",
                                   "classify vectors from a file (one per line) or run a survey");
    std::string cls_in;
    bool cls_constp = false;
    cls->add_option("--n", n, "dimension")->required();
    cls->add_option("--p", p, "Bernoulli parameter")->required();
    cls->add_option("--vectors", cls_in, "whitespace-separated reals, one vector per line");
    cls->add_option("--trials", trials, "survey sample count (when no --vectors)")
        ->capture_default_str();
    cls->add_flag("--constant-p", cls_constp, "use the constant-p B classes");

    // bounds ----------------------------------------------------------------
    auto* bnd = app.add_subcommand("bounds", "CSV table of closed-form bounds over an (n,p) grid");
    std::vector<std::uint32_t> bnd_n{100, 200, 500};
    std::vector<double> bnd_p;
    double bnd_C = 5.0;
    bnd->add_option("--n", bnd_n, "dimensions")->capture_default_str();
    bnd->add_option("--p", bnd_p, "probabilities (default: k ln n / n, k = 1..5)");
    bnd->add_option("--C", bnd_C, "regime constant")->capture_default_str();

    app.require_subcommand(1);

    try {
        app.parse(argc, argv);

        if (*gen) {
            auto m = bml::generate({n, p, g.seed, gen_trial});
            if (gen_out == "-") {
                bml::write_sbm(std::cout, m);
            } else {
                std::ofstream os(gen_out, std::ios::binary);
                if (!os) throw std::runtime_error("cannot open " + gen_out);
                bml::write_sbm(os, m);
            }
            return 0;
        }
        if (*sing) {
            bml::SparseBinaryMatrix m;
            if (sing_in == "-") {
                m = bml::read_sbm(std::cin);
            } else {
                std::ifstream is(sing_in, std::ios::binary);
                if (!is) throw std::runtime_error("cannot open " + sing_in);
                m = bml::read_sbm(is);
            }
            std::cout << bml::decide_singular(m).to_json() << '\n';
            return 0;
        }
        if (*mc)
            return run_mc_mode(g, mc_rowcol_only ? bml::Mode::rowcol_only : bml::Mode::singularity,
                               n, p, trials, nullptr, false);
        if (*smin) return run_mc_mode(g, bml::Mode::smin_quantiles, n, p, trials, nullptr, false);
        if (*norms) return run_mc_mode(g, bml::Mode::norm_tail, n, p, trials, nullptr, false);
        if (*udeg) return run_mc_mode(g, bml::Mode::udeg_survey, n, p, trials, &up, false);
        if (*cls) {
            if (cls_in.empty())
                return run_mc_mode(g, bml::Mode::classify_survey, n, p, trials, nullptr, cls_constp);
            auto cfg = bml::default_config(n, p, cls_constp);
            std::ifstream is(cls_in);
            if (!is) throw std::runtime_error("cannot open " + cls_in);
            std::string line;
            while (std::getline(is, line)) {
                auto v = parse_vector_line(line);
                if (v.empty()) continue;
                if (v.size() != n) throw std::invalid_argument("vector length != n");
                std::cout << bml::classify(v, cfg).to_json().dump() << '\n';
            }
            return 0;
        }
        if (*bnd) {
            std::ostringstream os;
            os << "n,p,np_over_lnn,in_regime,prediction_2n1pn,zero_row_prob,zero_rowcol_exact,"
                  "zero_rowcol_lower_bound,ratio_exact_to_prediction\n";
            for (std::uint32_t nn : bnd_n) {
                std::vector<double> ps = bnd_p;
                if (ps.empty())
                    for (int k = 1; k <= 5; ++k) ps.push_back(k * std::log(double(nn)) / nn);
                for (double pp : ps) {
                    auto rc = bml::regime_check(nn, pp, bnd_C);
                    double pred = bml::singularity_prediction(nn, pp);
                    double exact = nn <= 400 ? bml::zero_rowcol_exact(nn, pp) : -1.0;
                    char buf[320];
                    std::snprintf(buf, sizeof buf, "%u,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                                  nn, pp, rc.np_over_logn, rc.in_theorem_regime ? 1 : 0, pred,
                                  bml::zero_row_probability(nn, pp), exact,
                                  bml::zero_rowcol_lower_bound(nn, pp),
                                  exact > 0 && pred > 0 ? exact / pred : -1.0);
                    os << buf;
                }
            }
            if (g.out.empty()) {
                std::cout << os.str();
            } else {
                std::ofstream f(g.out, std::ios::binary);
                if (!f) throw std::runtime_error("cannot open " + g.out);
                f << os.str();
            }
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const bml::RegimeError& e) {
        std::cerr << "regime error: " << e.what() << '\n';
        return 2;
    } catch (const bml::BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
