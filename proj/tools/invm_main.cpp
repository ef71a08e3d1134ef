// Command-line surface for the inverse-parallel solver pipeline:
//   generate  perturbed-start ensembles -> observable matrices (CSV)
//   profile   matrices -> sliding-window Lyapunov profiles (CSV)
//   tune      profiles -> per-alpha classification and selection (JSON)
//   solve     single run of any method with a trace export
//   replay    re-run a recorded manifest and verify output digests

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "invm/ensemble.hpp"
#include "invm/errors.hpp"
#include "invm/lle.hpp"
#include "invm/manifest.hpp"
#include "invm/tuning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

std::string default_out_dir() {
    if (const char* env = std::getenv("INVM_OUT_DIR"); env && *env)
        return env;
    return ".";
}

struct Preset {
    std::string poly;
    std::string base_case1;
    std::string base_case2;
};

const std::map<int, Preset> kPresets = {
    {1, {"-1,0,0,1", "70008.0,-90005.5,17009.5", "708.0,-905.5,179.5-1i"}},
    {2, {"120,-5,-125,30,0,0,1", "-15,-13.9,30.8,-30.8,10.7,20.7", "-10,-5.9,15.8,12.8,5.7,13.9"}},
};

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string tok = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                              : comma - start);
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size())
                throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw invm::parse_error("bad number '" + tok + "' in list '" + text + "'");
        }
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw invm::io_error("cannot open for writing", path.string());
    out << content;
    if (!out)
        throw invm::io_error("write failed", path.string());
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw invm::io_error("cannot open", path.string());
    json j;
    in >> j;
    return j;
}

// ---------------------------------------------------------------- generate

struct GenerateConfig {
    std::string poly;
    std::string base;
    std::string label = "1";
    std::vector<double> alphas{0, 1, 2, 3, 4, 5};
    int runs = 1000;
    int iters = 50;
    double beta = 1.0;
    double jitter = 0.01;
    std::uint64_t seed = 1;
    std::string out_dir;

    json to_json() const {
        return {{"poly", poly},     {"base", base},   {"label", label}, {"alphas", alphas},
                {"runs", runs},     {"iters", iters}, {"beta", beta},   {"jitter", jitter},
                {"seed", seed},     {"out_dir", out_dir}};
    }
    static GenerateConfig from_json(const json& j) {
        GenerateConfig c;
        c.poly = j.at("poly");
        c.base = j.at("base");
        c.label = j.at("label");
        c.alphas = j.at("alphas").get<std::vector<double>>();
        c.runs = j.at("runs");
        c.iters = j.at("iters");
        c.beta = j.at("beta");
        c.jitter = j.at("jitter");
        c.seed = j.at("seed");
        c.out_dir = j.at("out_dir");
        return c;
    }
};

json run_generate(const GenerateConfig& cfg) {
    const invm::Polynomial f = invm::Polynomial::parse(cfg.poly);

    invm::EnsembleConfig ec;
    ec.base_vector = invm::parse_complex_list(cfg.base);
    ec.n_runs = cfg.runs;
    ec.n_iters = cfg.iters;
    ec.jitter_frac = cfg.jitter;
    ec.alphas = cfg.alphas;
    ec.beta = cfg.beta;
    ec.master_seed = cfg.seed;
    ec.case_label = cfg.label;
    ec.validate();
    if (cfg.alphas.empty())
        throw invm::domain_error("generate: empty alpha list");

    const fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);

    json outputs = json::object();
    const auto initials = invm::generate_initials(ec);
    const fs::path initials_path =
        invm::write_initials_csv(initials, out_dir / ("case" + cfg.label + "_initials.csv"));
    outputs[initials_path.filename().string()] = invm::sha256_file_hex(initials_path);

    for (double alpha : cfg.alphas) {
        auto [S, R] = invm::run_ensemble(f, ec, alpha);
        for (const auto* m : {&S, &R}) {
            const fs::path p = invm::write_matrix_csv(*m, out_dir);
            outputs[p.filename().string()] = invm::sha256_file_hex(p);
        }
    }

    json manifest = {{"tool", "invm"},
                     {"version", kToolVersion},
                     {"command", "generate"},
                     {"config", cfg.to_json()},
                     {"outputs", outputs}};
    write_text_file(out_dir / "manifest_generate.json", manifest.dump(2) + "\n");
    return manifest;
}

// ----------------------------------------------------------------- profile

struct ProfileConfig {
    std::string data_dir;
    std::string out_dir;
    invm::LleParams lle;
    std::string observable = "both"; // sk | rk | both
    bool plot_data = false;

    json to_json() const {
        return {{"data_dir", data_dir},
                {"out_dir", out_dir},
                {"look_back", lle.look_back},
                {"h_min", lle.h_min},
                {"h_max", lle.h_max},
                {"h_step", lle.h_step},
                {"k_neighbors", lle.k_neighbors},
                {"test_fraction", lle.test_fraction},
                {"split_seed", lle.split_seed},
                {"gmae_floor", lle.gmae_floor},
                {"shared_split", lle.shared_split},
                {"observable", observable},
                {"plot_data", plot_data}};
    }
    static ProfileConfig from_json(const json& j) {
        ProfileConfig c;
        c.data_dir = j.at("data_dir");
        c.out_dir = j.at("out_dir");
        c.lle.look_back = j.at("look_back");
        c.lle.h_min = j.at("h_min");
        c.lle.h_max = j.at("h_max");
        c.lle.h_step = j.at("h_step");
        c.lle.k_neighbors = j.at("k_neighbors");
        c.lle.test_fraction = j.at("test_fraction");
        c.lle.split_seed = j.at("split_seed");
        c.lle.gmae_floor = j.at("gmae_floor");
        c.lle.shared_split = j.at("shared_split");
        c.observable = j.at("observable");
        c.plot_data = j.at("plot_data");
        return c;
    }
};

bool matrix_name_matches(const std::string& name, const std::string& observable) {
    if (name.rfind("case", 0) != 0 || name.find("_alpha") == std::string::npos ||
        name.size() < 8 || name.substr(name.size() - 4) != ".csv")
        return false;
    const bool sk = name.find("_sk.csv") != std::string::npos;
    const bool rk = name.find("_rk.csv") != std::string::npos;
    if (!sk && !rk)
        return false;
    if (observable == "sk")
        return sk;
    if (observable == "rk")
        return rk;
    return true;
}

json run_profile(const ProfileConfig& cfg) {
    cfg.lle.validate();
    const fs::path data_dir(cfg.data_dir);
    if (!fs::is_directory(data_dir))
        throw invm::io_error("data directory does not exist", data_dir.string());

    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(data_dir))
        if (entry.is_regular_file() && matrix_name_matches(entry.path().filename().string(), cfg.observable))
            inputs.push_back(entry.path());
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty())
        throw invm::io_error("no matrix files found in", data_dir.string());

    const fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);

    json outputs = json::object();
    for (const auto& input : inputs) {
        const invm::EnsembleMatrix m = invm::read_matrix_csv(input);
        const invm::LyapunovProfile prof = invm::lyapunov_profile(m, cfg.lle);
        const fs::path p = invm::write_profile_csv(prof, out_dir / invm::profile_csv_name(prof));
        outputs[p.filename().string()] = invm::sha256_file_hex(p);
        if (cfg.plot_data) {
            const std::string curve_name = "fitcurve_case" + m.case_label + "_alpha" +
                                           invm::format_double(m.alpha) + "_" +
                                           invm::observable_tag(m.observable) + ".csv";
            const fs::path cp = invm::write_fit_curve_csv(m, cfg.lle, out_dir / curve_name);
            outputs[cp.filename().string()] = invm::sha256_file_hex(cp);
        }
    }

    json manifest = {{"tool", "invm"},
                     {"version", kToolVersion},
                     {"command", "profile"},
                     {"config", cfg.to_json()},
                     {"outputs", outputs}};
    write_text_file(out_dir / "manifest_profile.json", manifest.dump(2) + "\n");
    return manifest;
}

// -------------------------------------------------------------------- tune

struct TuneConfig {
    std::string profiles_dir;
    std::string out_file;
    invm::SelectionCriteria criteria;

    json to_json() const {
        return {{"profiles_dir", profiles_dir},
                {"out_file", out_file},
                {"min_negative_fraction", criteria.min_negative_fraction},
                {"max_transient_fraction", criteria.max_transient_fraction},
                {"max_positive_excursion", criteria.max_positive_excursion},
                {"late_window_fraction", criteria.late_window_fraction}};
    }
    static TuneConfig from_json(const json& j) {
        TuneConfig c;
        c.profiles_dir = j.at("profiles_dir");
        c.out_file = j.at("out_file");
        c.criteria.min_negative_fraction = j.at("min_negative_fraction");
        c.criteria.max_transient_fraction = j.at("max_transient_fraction");
        c.criteria.max_positive_excursion = j.at("max_positive_excursion");
        c.criteria.late_window_fraction = j.at("late_window_fraction");
        return c;
    }
};

json run_tune(const TuneConfig& cfg) {
    cfg.criteria.validate();
    const fs::path dir(cfg.profiles_dir);
    if (!fs::is_directory(dir))
        throw invm::io_error("profiles directory does not exist", dir.string());

    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.rfind("profile_case", 0) == 0 &&
            name.substr(name.size() - 4) == ".csv")
            inputs.push_back(entry.path());
    }
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty())
        throw invm::io_error("no profile files found in", dir.string());

    std::map<double, std::vector<invm::LyapunovProfile>> by_alpha;
    for (const auto& p : inputs)
        by_alpha[invm::read_profile_csv(p).alpha].push_back(invm::read_profile_csv(p));

    std::vector<std::pair<double, std::vector<invm::LyapunovProfile>>> grouped(by_alpha.begin(),
                                                                               by_alpha.end());
    invm::TuningReport report = invm::select_alpha(grouped, cfg.criteria);
    report.observable = "combined";
    report.case_label = "all";

    const fs::path out_file(cfg.out_file);
    if (out_file.has_parent_path())
        fs::create_directories(out_file.parent_path());
    const std::string body = invm::tuning_report_json(report);
    write_text_file(out_file, body);

    std::cout << "selected alpha = " << invm::format_double(report.selected_alpha)
              << (report.fallback ? " (fallback: no alpha was well behaved)" : "") << "\n";

    json outputs = json::object();
    outputs[out_file.filename().string()] = invm::sha256_hex(body);
    json manifest = {{"tool", "invm"},
                     {"version", kToolVersion},
                     {"command", "tune"},
                     {"config", cfg.to_json()},
                     {"outputs", outputs}};
    write_text_file(out_file.parent_path() / "manifest_tune.json", manifest.dump(2) + "\n");
    return manifest;
}

// ------------------------------------------------------------------- solve

int run_solve(const std::string& poly_str, const std::string& x0_str, const std::string& method_str,
              const invm::SolverParams& params, const std::string& trace_file,
              const std::optional<std::string>& adaptive_list) {
    const invm::Polynomial f = invm::Polynomial::parse(poly_str);
    const invm::ComplexVec x0 = invm::parse_complex_list(x0_str);

    const auto t0 = std::chrono::steady_clock::now();
    invm::SolverTrace trace;
    std::vector<invm::SwitchEvent> switches;
    if (adaptive_list) {
        const auto candidates = parse_double_list(*adaptive_list);
        invm::AdaptiveResult res = invm::adaptive_solve(f, x0, params, candidates);
        trace = std::move(res.trace);
        switches = std::move(res.switches);
    } else {
        trace = invm::run_solver(f, x0, params, invm::parse_method(method_str));
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    // trace CSV: k,s_k,r_k
    {
        std::ofstream out(trace_file, std::ios::binary);
        if (!out)
            throw invm::io_error("cannot open for writing", trace_file);
        out << "k,s_k,r_k\n";
        for (int k = 0; k < trace.iterations_used; ++k)
            out << k << ',' << invm::format_double(trace.step_norms[static_cast<std::size_t>(k)])
                << ',' << invm::format_double(trace.residual_norms[static_cast<std::size_t>(k)])
                << '\n';
    }

    std::cout << "method      " << (adaptive_list ? "INVM (adaptive)" : method_str) << "\n"
              << "status      " << invm::status_name(trace.status) << "\n"
              << "iterations  " << trace.iterations_used << "\n"
              << "final s_k   " << invm::format_double(trace.step_norms.back()) << "\n"
              << "final r_k   " << invm::format_double(trace.residual_norms.back()) << "\n";
    std::string coc = "n/a";
    try {
        // 1e-13 floor keeps rounding-dominated tail residuals out of the fit
        coc = invm::format_double(invm::computational_order(trace.residual_norms, 1e-13));
    } catch (const invm::insufficient_data_error&) {
    }
    std::cout << "coc         " << coc << "\n";
    for (const auto& s : switches)
        std::cout << "switch      iteration " << s.iteration << ": alpha "
                  << invm::format_double(s.from_alpha) << " -> " << invm::format_double(s.to_alpha)
                  << "\n";
    std::cout << "wall time   " << invm::format_double(ms) << " ms\n"
              << "trace       " << trace_file << "\n";

    return trace.status == invm::SolverStatus::diverged ? 1 : 0;
}

// ------------------------------------------------------------------ replay

int run_replay(const std::string& manifest_path) {
    const json manifest = read_json_file(manifest_path);
    const std::string command = manifest.at("command");
    json fresh;
    if (command == "generate")
        fresh = run_generate(GenerateConfig::from_json(manifest.at("config")));
    else if (command == "profile")
        fresh = run_profile(ProfileConfig::from_json(manifest.at("config")));
    else if (command == "tune")
        fresh = run_tune(TuneConfig::from_json(manifest.at("config")));
    else
        throw invm::domain_error("replay: unsupported command '" + command + "'");

    int mismatches = 0;
    for (const auto& [name, digest] : manifest.at("outputs").items()) {
        const std::string now = fresh.at("outputs").value(name, "");
        if (now != digest.get<std::string>()) {
            std::cerr << "digest mismatch: " << name << "\n";
            ++mismatches;
        }
    }
    std::cout << (mismatches == 0 ? "replay ok: all digests match\n"
                                  : "replay FAILED: " + std::to_string(mismatches) + " mismatch(es)\n");
    return mismatches == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"inverse parallel root-finding with kNN-Lyapunov diagnostics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    // generate
    auto* gen = app.add_subcommand("generate", "run perturbed-start ensembles and write observable matrices");
    int gen_example = 0, gen_case = 1;
    GenerateConfig gcfg;
    gcfg.out_dir = default_out_dir();
    std::string gen_alphas = "0,1,2,3,4,5";
    bool gen_seed_given = false;
    std::uint64_t gen_seed = 0;
    gen->add_option("--example", gen_example, "preset problem (1: cubic, 2: degree six)")
        ->check(CLI::IsMember({1, 2}));
    gen->add_option("--case", gen_case, "preset base vector (1 or 2)")->check(CLI::IsMember({1, 2}));
    gen->add_option("--poly", gcfg.poly, "coefficients, lowest degree first");
    gen->add_option("--base", gcfg.base, "base initial vector (comma-separated complex)");
    gen->add_option("--label", gcfg.label, "case label used in file names");
    gen->add_option("--alphas", gen_alphas, "alpha grid, comma-separated");
    gen->add_option("--runs", gcfg.runs, "ensemble size")->check(CLI::PositiveNumber);
    gen->add_option("--iters", gcfg.iters, "iterations per run")->check(CLI::PositiveNumber);
    gen->add_option("--beta", gcfg.beta, "fractional order in (0,1]");
    gen->add_option("--jitter", gcfg.jitter, "perturbation as a fraction of ||base||_2")
        ->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", gen_seed, "master seed (default: the case number)")
        ->trigger_on_parse()
        ->each([&](const std::string&) { gen_seed_given = true; });
    gen->add_option("--out", gcfg.out_dir, "output directory (or $INVM_OUT_DIR)");

    // profile
    auto* prof = app.add_subcommand("profile", "estimate sliding-window Lyapunov profiles from matrices");
    ProfileConfig pcfg;
    pcfg.data_dir = default_out_dir();
    bool prof_out_given = false;
    prof->add_option("--data", pcfg.data_dir, "directory holding case*_alpha*_{sk,rk}.csv");
    prof->add_option("--out", pcfg.out_dir, "output directory (default: data dir)")
        ->trigger_on_parse()
        ->each([&](const std::string&) { prof_out_given = true; });
    prof->add_option("--look-back", pcfg.lle.look_back)->check(CLI::PositiveNumber);
    prof->add_option("--hmin", pcfg.lle.h_min)->check(CLI::PositiveNumber);
    prof->add_option("--hmax", pcfg.lle.h_max)->check(CLI::PositiveNumber);
    prof->add_option("--hstep", pcfg.lle.h_step)->check(CLI::PositiveNumber);
    prof->add_option("--k", pcfg.lle.k_neighbors, "kNN neighbour count")->check(CLI::PositiveNumber);
    prof->add_option("--test-fraction", pcfg.lle.test_fraction);
    prof->add_option("--split-seed", pcfg.lle.split_seed);
    prof->add_option("--gmae-floor", pcfg.lle.gmae_floor);
    prof->add_option("--observable", pcfg.observable)->check(CLI::IsMember({"sk", "rk", "both"}));
    prof->add_flag("--plot-data", pcfg.plot_data, "also write per-window (h, y, fit) curve data");
    prof->add_flag("--per-horizon-split", [&](std::int64_t) { pcfg.lle.shared_split = false; },
                   "redraw the train/test split for every horizon");

    // tune
    auto* tune = app.add_subcommand("tune", "classify alpha values from profiles and select one");
    TuneConfig tcfg;
    tcfg.profiles_dir = default_out_dir();
    bool tune_out_given = false;
    tune->add_option("--profiles", tcfg.profiles_dir, "directory holding profile_*.csv");
    tune->add_option("--out", tcfg.out_file, "report file (default: <profiles>/tuning_report.json)")
        ->trigger_on_parse()
        ->each([&](const std::string&) { tune_out_given = true; });
    tune->add_option("--min-negative-fraction", tcfg.criteria.min_negative_fraction);
    tune->add_option("--max-transient-fraction", tcfg.criteria.max_transient_fraction);
    tune->add_option("--max-positive-excursion", tcfg.criteria.max_positive_excursion);
    tune->add_option("--late-window-fraction", tcfg.criteria.late_window_fraction);

    // solve
    auto* solve = app.add_subcommand("solve", "run one solver instance and export the trace");
    int solve_example = 0;
    std::string solve_poly, solve_x0, solve_method = "INVM", solve_trace;
    std::optional<std::string> solve_adaptive;
    invm::SolverParams sparams;
    sparams.max_iters = 200;
    solve->add_option("--example", solve_example, "preset polynomial")->check(CLI::IsMember({1, 2}));
    solve->add_option("--poly", solve_poly, "coefficients, lowest degree first");
    solve->add_option("--x0", solve_x0, "initial approximations (comma-separated complex)")
        ->required();
    solve->add_option("--method", solve_method)->check(CLI::IsMember({"WDK", "NOUREIN", "ZHM", "INVM"}));
    solve->add_option("--alpha", sparams.alpha);
    solve->add_option("--beta", sparams.beta);
    solve->add_option("--tol", sparams.tol)->check(CLI::PositiveNumber);
    solve->add_option("--max-iters", sparams.max_iters)->check(CLI::PositiveNumber);
    solve->add_option("--cap", sparams.divergence_cap)->check(CLI::PositiveNumber);
    solve->add_option("--trace", solve_trace, "trace CSV path (default: <out>/trace.csv)");
    auto* adaptive_opt =
        solve->add_option("--adaptive", "alpha candidates for the adaptive rule, e.g. 0,3");

    // replay
    auto* replay = app.add_subcommand("replay", "re-run a recorded manifest and verify digests");
    std::string replay_manifest;
    replay->add_option("manifest", replay_manifest, "manifest json file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            if (gen_example != 0) {
                const Preset& p = kPresets.at(gen_example);
                if (gcfg.poly.empty())
                    gcfg.poly = p.poly;
                if (gcfg.base.empty())
                    gcfg.base = (gen_case == 1) ? p.base_case1 : p.base_case2;
            }
            if (gcfg.poly.empty() || gcfg.base.empty())
                throw invm::domain_error("generate: need --example or both --poly and --base");
            if (!gen->count("--label"))
                gcfg.label = std::to_string(gen_case);
            gcfg.alphas = parse_double_list(gen_alphas);
            gcfg.seed = gen_seed_given ? gen_seed : static_cast<std::uint64_t>(gen_case);
            run_generate(gcfg);
            std::cout << "wrote ensembles for " << gcfg.alphas.size() << " alpha value(s) to "
                      << gcfg.out_dir << "\n";
            return 0;
        }
        if (prof->parsed()) {
            if (!prof_out_given)
                pcfg.out_dir = pcfg.data_dir;
            const json manifest = run_profile(pcfg);
            std::cout << "wrote " << manifest.at("outputs").size() << " file(s) to " << pcfg.out_dir
                      << "\n";
            return 0;
        }
        if (tune->parsed()) {
            if (!tune_out_given)
                tcfg.out_file = (fs::path(tcfg.profiles_dir) / "tuning_report.json").string();
            run_tune(tcfg);
            return 0;
        }
        if (solve->parsed()) {
            if (solve_example != 0 && solve_poly.empty())
                solve_poly = kPresets.at(solve_example).poly;
            if (solve_poly.empty())
                throw invm::domain_error("solve: need --example or --poly");
            if (solve_trace.empty())
                solve_trace = (fs::path(default_out_dir()) / "trace.csv").string();
            if (adaptive_opt->count())
                solve_adaptive = adaptive_opt->as<std::string>();
            return run_solve(solve_poly, solve_x0, solve_method, sparams, solve_trace,
                             solve_adaptive);
        }
        if (replay->parsed())
            return run_replay(replay_manifest);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
