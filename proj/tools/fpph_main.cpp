// Command-line front end: experiment configs in, JSON/CSV records out.
// Every record embeds the resolved medium spec, its hash, the seed, and
// the solver metadata needed to reproduce the run byte for byte (wall
// clock aside).

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpph/cell.hpp"
#include "fpph/corrector.hpp"
#include "fpph/fpp.hpp"
#include "fpph/medium.hpp"
#include "fpph/serialization.hpp"
#include "fpph/varform.hpp"
#include "fpph/verify.hpp"
#include "fpph/version.hpp"

using fpph::json;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fpph::config_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw fpph::config_error("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

struct Common {
    std::string config_path;
    std::string medium_path;
    std::string out_path;
    std::string format = "json";
    std::uint64_t seed = 1;
    json config;

    void load() {
        if (!config_path.empty()) config = load_json_file(config_path);
        if (config.contains("seed") && !seed_overridden) seed = config["seed"].get<std::uint64_t>();
        if (config.contains("format") && format == "json")
            format = config["format"].get<std::string>();
        if (config.contains("out") && out_path.empty()) out_path = config["out"].get<std::string>();
    }

    bool seed_overridden = false;

    fpph::MediumSpec medium() const {
        if (!medium_path.empty()) return fpph::medium_spec_from_json(load_json_file(medium_path));
        if (config.contains("medium")) return fpph::medium_spec_from_json(config["medium"]);
        if (config.contains("medium_file"))
            return fpph::medium_spec_from_json(
                load_json_file(config["medium_file"].get<std::string>()));
        throw fpph::config_error("no medium given (use --medium FILE or a config with \"medium\")");
    }

    template <class T>
    T value(const std::string& key, T flag_value, bool flag_set) const {
        if (flag_set) return flag_value;
        if (config.contains(key)) return config[key].get<T>();
        return flag_value;
    }
};

void add_common(CLI::App* cmd, Common& common, bool needs_medium) {
    cmd->add_option("--config", common.config_path, "JSON config file; flags override its entries");
    if (needs_medium)
        cmd->add_option("--medium", common.medium_path, "medium spec JSON file");
    cmd->add_option("--out", common.out_path, "write the result record here instead of stdout");
    cmd->add_option("--format", common.format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option_function<std::uint64_t>(
           "--seed",
           [&common](const std::uint64_t& s) {
               common.seed = s;
               common.seed_overridden = true;
           },
           "root seed; overrides the config seed");
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw fpph::config_error("cannot write " + out_path);
        out << text << "\n";
    }
}

class Timer {
  public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(clock::now() - start_).count();
    }

  private:
    using clock = std::chrono::steady_clock;
    clock::time_point start_ = clock::now();
};

json base_record(const std::string& command, const Common& common) {
    json rec;
    rec["command"] = command;
    rec["version"] = fpph::kVersion;
    rec["seed"] = common.seed;
    return rec;
}

void attach_medium(json& rec, const fpph::MediumSpec& spec) {
    rec["medium"] = fpph::to_json(spec);
    rec["medium_spec_hash"] = fpph::medium_spec_hash(spec);
}

std::vector<double> need_p(const Common& common, std::vector<double> p) {
    if (p.empty() && common.config.contains("p"))
        p = common.config["p"].get<std::vector<double>>();
    if (p.empty()) throw fpph::config_error("missing momentum vector p (use --p)");
    return p;
}

json hbar_json(const fpph::varform::HbarEstimate& est) {
    json j;
    j["method"] = fpph::varform::to_string(est.method);
    j["p"] = est.p;
    j["value"] = est.value;
    j["uncertainty"] = est.uncertainty;
    json meta;
    meta["stderr"] = est.stderr_;
    switch (est.method) {
        case fpph::varform::HbarMethod::MuSlope:
            meta["t"] = est.t;
            meta["replicas"] = est.replicas;
            meta["bias_allowance"] = est.bias_allowance;
            meta["box_radius"] = est.box_radius;
            break;
        case fpph::varform::HbarMethod::NuDiscount:
            meta["eps"] = est.eps;
            meta["residual"] = est.residual;
            meta["box_radius"] = est.box_radius;
            meta["iterations"] = est.iterations;
            break;
        case fpph::varform::HbarMethod::DualNorm:
            meta["argmax_direction"] = est.argmax_direction;
            break;
    }
    j["metadata"] = meta;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "fpph: first-passage times, cell problems, and the effective Hamiltonian on Z^d"};
    app.require_subcommand(1);

    // --- medium ---
    auto* cmd_medium = app.add_subcommand("medium", "validate and describe a medium spec");
    Common c_medium;
    int sample_edges = 0;
    add_common(cmd_medium, c_medium, true);
    cmd_medium->add_option("--sample", sample_edges, "summarize this many probed edges");

    // --- timeconstant ---
    auto* cmd_tc = app.add_subcommand(
        "timeconstant",
        "estimate the time constant m(x); csv columns: direction,n,replica,T,mhat,stderr");
    Common c_tc;
    std::vector<double> tc_x;
    long long tc_n = 100;
    int tc_replicas = 8;
    add_common(cmd_tc, c_tc, true);
    cmd_tc->add_option("--x", tc_x, "direction (comma separated)")->delimiter(',');
    cmd_tc->add_option("--n", tc_n, "scale: target is [n x]");
    cmd_tc->add_option("--replicas", tc_replicas, "independent replicas");

    // --- mu ---
    auto* cmd_mu = app.add_subcommand("mu", "finite time-horizon value mu(x, t) with phi = 0");
    Common c_mu;
    std::vector<double> mu_p;
    std::vector<int> mu_x;
    double mu_t = 10;
    add_common(cmd_mu, c_mu, true);
    cmd_mu->add_option("--p", mu_p, "momentum vector")->delimiter(',');
    cmd_mu->add_option("--x", mu_x, "start site (default origin)")->delimiter(',');
    cmd_mu->add_option("--t", mu_t, "time horizon");

    // --- nu ---
    auto* cmd_nu = app.add_subcommand("nu", "discounted stationary value nu_eps around 0");
    Common c_nu;
    std::vector<double> nu_p;
    double nu_eps = 0.05, nu_tol = 1e-6;
    int nu_core = 10;
    add_common(cmd_nu, c_nu, true);
    cmd_nu->add_option("--p", nu_p, "momentum vector")->delimiter(',');
    cmd_nu->add_option("--eps", nu_eps, "discount rate");
    cmd_nu->add_option("--tol", nu_tol, "interior accuracy");
    cmd_nu->add_option("--core", nu_core, "radius of the reported accurate core");

    // --- hbar ---
    auto* cmd_hbar = app.add_subcommand("hbar", "effective Hamiltonian estimate");
    Common c_hbar;
    std::string hbar_method = "mu";
    std::vector<double> hbar_p;
    double hbar_t = 200, hbar_eps = 0.05, hbar_tol = 1e-6;
    long long hbar_n = 400;
    int hbar_replicas = 20;
    add_common(cmd_hbar, c_hbar, true);
    cmd_hbar->add_option("--method", hbar_method, "mu | nu | dual")
        ->check(CLI::IsMember({"mu", "nu", "dual"}));
    cmd_hbar->add_option("--p", hbar_p, "momentum vector")->delimiter(',');
    cmd_hbar->add_option("--t", hbar_t, "horizon for the mu-slope method");
    cmd_hbar->add_option("--eps", hbar_eps, "discount for the nu method");
    cmd_hbar->add_option("--tol", hbar_tol, "nu solver tolerance");
    cmd_hbar->add_option("--n", hbar_n, "scale for the dual-norm direction grid");
    cmd_hbar->add_option("--replicas", hbar_replicas, "replicas (mu and dual methods)");

    // --- corrector ---
    auto* cmd_cor = app.add_subcommand("corrector", "minimize the symmetric variational formula");
    Common c_cor;
    std::string space_path;
    std::vector<double> cor_p;
    double cor_tol = 1e-9;
    long cor_max_iter = 100000;
    bool cor_trace = false;
    add_common(cmd_cor, c_cor, false);
    cmd_cor->add_option("--space", space_path, "atomic space JSON file");
    cmd_cor->add_option("--p", cor_p, "momentum vector")->delimiter(',');
    cmd_cor->add_option("--tol", cor_tol, "set-membership and termination tolerance");
    cmd_cor->add_option("--max-iter", cor_max_iter, "iteration budget");
    cmd_cor->add_flag("--trace", cor_trace, "record the per-iteration trace");

    // --- verify ---
    auto* cmd_verify = app.add_subcommand("verify", "run an invariant battery with fixed seeds");
    Common c_verify;
    std::string suite;
    add_common(cmd_verify, c_verify, false);
    cmd_verify->add_option("suite", suite, "dpp | comparison | norm | oracle | tauberian")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        Timer timer;
        if (*cmd_medium) {
            c_medium.load();
            auto spec = c_medium.medium();
            fpph::Environment env(spec, c_medium.seed);
            json rec = base_record("medium", c_medium);
            attach_medium(rec, spec);
            auto wb = env.bounds();
            rec["outputs"] = {{"a", wb.a}, {"b", wb.b}, {"dimension", spec.dimension}};
            if (sample_edges > 0) {
                double lo = 1e300, hi = -1e300, sum = 0;
                auto dirs = fpph::all_directions(spec.dimension);
                for (int i = 0; i < sample_edges; ++i) {
                    fpph::Point x(static_cast<std::size_t>(spec.dimension));
                    for (int k = 0; k < spec.dimension; ++k)
                        x[static_cast<std::size_t>(k)] = (i * 31 + k * 17) % 101 - 50;
                    double w = env.weight(x, dirs[static_cast<std::size_t>(i) % dirs.size()]);
                    lo = std::min(lo, w);
                    hi = std::max(hi, w);
                    sum += w;
                }
                rec["outputs"]["sample"] = {{"edges", sample_edges},
                                            {"min", lo},
                                            {"max", hi},
                                            {"mean", sum / sample_edges}};
            }
            rec["wall_clock_ms"] = timer.ms();
            write_output(rec.dump(2), c_medium.out_path);
        } else if (*cmd_tc) {
            c_tc.load();
            auto spec = c_tc.medium();
            fpph::Environment env(spec, c_tc.seed);
            if (tc_x.empty() && c_tc.config.contains("x"))
                tc_x = c_tc.config["x"].get<std::vector<double>>();
            if (tc_x.empty()) throw fpph::config_error("missing direction (use --x)");
            tc_n = c_tc.value("n", tc_n, cmd_tc->count("--n") > 0);
            tc_replicas = c_tc.value("replicas", tc_replicas, cmd_tc->count("--replicas") > 0);
            auto est = fpph::time_constant(env, tc_x, tc_n, tc_replicas);
            if (c_tc.format == "csv") {
                std::ostringstream os;
                os << "direction,n,replica,T,mhat,stderr\n";
                std::string dir_str;
                for (std::size_t k = 0; k < est.direction.size(); ++k)
                    dir_str += (k ? " " : "") + std::to_string(est.direction[k]);
                for (std::size_t r = 0; r < est.samples.size(); ++r)
                    os << '"' << dir_str << "\"," << est.n << ',' << r << ','
                       << est.samples[r] * static_cast<double>(est.n) << ',' << est.value << ','
                       << est.stderr_ << (r + 1 < est.samples.size() ? "\n" : "");
                write_output(os.str(), c_tc.out_path);
            } else {
                json rec = base_record("timeconstant", c_tc);
                attach_medium(rec, spec);
                rec["inputs"] = {{"x", est.direction}, {"n", est.n}, {"replicas", tc_replicas}};
                rec["outputs"] = {{"target", est.target},
                                  {"mhat", est.value},
                                  {"stderr", est.stderr_},
                                  {"samples", est.samples}};
                rec["metadata"] = {{"box_radius", fpph::safe_radius(est.target, env.bounds())},
                                   {"box_policy", "safe_radius default"}};
                rec["wall_clock_ms"] = timer.ms();
                write_output(rec.dump(2), c_tc.out_path);
            }
        } else if (*cmd_mu) {
            c_mu.load();
            auto spec = c_mu.medium();
            fpph::Environment env(spec, c_mu.seed);
            auto p = need_p(c_mu, mu_p);
            mu_t = c_mu.value("t", mu_t, cmd_mu->count("--t") > 0);
            fpph::Point x(static_cast<std::size_t>(spec.dimension), 0);
            if (!mu_x.empty()) x.assign(mu_x.begin(), mu_x.end());
            double value = fpph::cell::mu(env, p, x, mu_t, fpph::cell::zero_terminal());
            json rec = base_record("mu", c_mu);
            attach_medium(rec, spec);
            rec["inputs"] = {{"p", p}, {"x", x}, {"t", mu_t}, {"phi", "zero"}};
            rec["outputs"] = {{"value", value}};
            rec["metadata"] = {
                {"box_radius", static_cast<int>(std::ceil(mu_t / env.bounds().a)) + 1}};
            rec["wall_clock_ms"] = timer.ms();
            write_output(rec.dump(2), c_mu.out_path);
        } else if (*cmd_nu) {
            c_nu.load();
            auto spec = c_nu.medium();
            fpph::Environment env(spec, c_nu.seed);
            auto p = need_p(c_nu, nu_p);
            nu_eps = c_nu.value("eps", nu_eps, cmd_nu->count("--eps") > 0);
            nu_tol = c_nu.value("tol", nu_tol, cmd_nu->count("--tol") > 0);
            nu_core = c_nu.value("core", nu_core, cmd_nu->count("--core") > 0);
            auto sv = fpph::cell::nu(env, p, nu_eps, nu_tol, nu_core);
            auto res = fpph::cell::hjb_residual(sv, env, p);
            json rec = base_record("nu", c_nu);
            attach_medium(rec, spec);
            rec["inputs"] = {{"p", p}, {"eps", nu_eps}, {"tol", nu_tol}, {"core", nu_core}};
            rec["outputs"] = {{"value_at_origin", sv.at_origin()},
                              {"eps_nu_at_origin", nu_eps * sv.at_origin()},
                              {"hjb_residual", res.residual},
                              {"residual_over_eps", res.residual_over_eps}};
            rec["metadata"] = {{"box_radius", sv.box.radius()},
                               {"iterations", sv.iterations},
                               {"fixed_point_error", sv.fixed_point_error},
                               {"core_sites", res.sites}};
            rec["wall_clock_ms"] = timer.ms();
            write_output(rec.dump(2), c_nu.out_path);
        } else if (*cmd_hbar) {
            c_hbar.load();
            auto spec = c_hbar.medium();
            fpph::Environment env(spec, c_hbar.seed);
            auto p = need_p(c_hbar, hbar_p);
            hbar_method = c_hbar.value("method", hbar_method, cmd_hbar->count("--method") > 0);
            fpph::varform::HbarEstimate est;
            if (hbar_method == "mu") {
                hbar_t = c_hbar.value("t", hbar_t, cmd_hbar->count("--t") > 0);
                hbar_replicas =
                    c_hbar.value("replicas", hbar_replicas, cmd_hbar->count("--replicas") > 0);
                est = fpph::varform::hbar_mu_slope(env, p, hbar_t, hbar_replicas);
            } else if (hbar_method == "nu") {
                hbar_eps = c_hbar.value("eps", hbar_eps, cmd_hbar->count("--eps") > 0);
                hbar_tol = c_hbar.value("tol", hbar_tol, cmd_hbar->count("--tol") > 0);
                est = fpph::varform::hbar_nu_discount(env, p, hbar_eps, hbar_tol);
            } else {
                hbar_n = c_hbar.value("n", hbar_n, cmd_hbar->count("--n") > 0);
                hbar_replicas =
                    c_hbar.value("replicas", hbar_replicas, cmd_hbar->count("--replicas") > 0);
                est = fpph::varform::hbar_dual_norm(
                    env, p, fpph::varform::default_direction_grid(spec.dimension), hbar_n,
                    hbar_replicas);
            }
            json rec = base_record("hbar", c_hbar);
            attach_medium(rec, spec);
            rec["outputs"] = hbar_json(est);
            rec["wall_clock_ms"] = timer.ms();
            write_output(rec.dump(2), c_hbar.out_path);
        } else if (*cmd_cor) {
            c_cor.load();
            fpph::corrector::AtomicSpace space;
            if (!space_path.empty()) {
                space = fpph::atomic_space_from_json(load_json_file(space_path));
            } else if (c_cor.config.contains("space")) {
                space = fpph::atomic_space_from_json(c_cor.config["space"]);
            } else if (c_cor.config.contains("space_file")) {
                space = fpph::atomic_space_from_json(
                    load_json_file(c_cor.config["space_file"].get<std::string>()));
            } else {
                throw fpph::config_error("missing atomic space (use --space FILE)");
            }
            auto p = need_p(c_cor, cor_p);
            cor_tol = c_cor.value("tol", cor_tol, cmd_cor->count("--tol") > 0);
            cor_max_iter = c_cor.value("max_iter", cor_max_iter, cmd_cor->count("--max-iter") > 0);
            fpph::corrector::RunOptions opt;
            opt.tol = cor_tol;
            opt.max_iter = cor_max_iter;
            opt.record_trace = cor_trace;
            auto out = fpph::corrector::run(space, p,
                                            std::vector<double>(space.atoms.size(), 0.0), opt);
            json rec = base_record("corrector", c_cor);
            rec["space"] = fpph::to_json(space);
            rec["inputs"] = {{"p", p}, {"tol", cor_tol}, {"max_iter", cor_max_iter}};
            json outputs;
            outputs["kind"] = fpph::corrector::to_string(out.kind);
            outputs["f"] = out.f;
            outputs["per_atom_h"] = out.per_atom_h;
            outputs["hbar"] = out.hbar;
            outputs["iterations"] = out.iterations;
            outputs["valley_steps"] = out.valley_steps;
            outputs["max_abs_xi"] = out.max_abs_xi;
            if (cor_trace) {
                json tr = json::array();
                for (const auto& row : out.trace)
                    tr.push_back({{"iter", row.iter},
                                  {"esssup", row.esssup},
                                  {"mu0", row.mu0},
                                  {"d", row.d},
                                  {"xi", row.xi}});
                outputs["trace"] = tr;
            }
            rec["outputs"] = outputs;
            rec["wall_clock_ms"] = timer.ms();
            write_output(rec.dump(2), c_cor.out_path);
        } else if (*cmd_verify) {
            c_verify.load();
            auto rep = fpph::verify::run_suite(suite);
            json rec = base_record("verify", c_verify);
            rec["inputs"] = {{"suite", suite}};
            rec["outputs"] = {{"passed", rep.passed},
                              {"checks", rep.checks},
                              {"failures", rep.failures}};
            rec["wall_clock_ms"] = timer.ms();
            write_output(rec.dump(2), c_verify.out_path);
            if (!rep.passed) {
                std::cerr << "verify " << suite << ": "
                          << (rep.failures.empty() ? "failed" : rep.failures.front()) << "\n";
                return 2;
            }
        }
        return 0;
    } catch (const fpph::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const fpph::numeric_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
