// fmc: modal clustering of functional data from the command line.
//
// Subcommands:
//   cluster      ingest a curve CSV, cluster by basin of attraction, classify
//                mode significance, write labels/modes/report
//   scan         bandwidth scan over an increasing h grid
//   simulate     draw a Gaussian mixture of curves and write the dataset
//   reconstruct  Gasser-Mueller smoothing of a noisy observation CSV
//
// Exit codes: 0 success, 2 malformed input/config, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include "fmc/fmc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitBadInput = 2;
constexpr int kExitNumerical = 3;

struct Config {
    std::string input;
    std::string output_dir = ".";
    std::string kernel = "exponential";
    std::optional<double> h;
    std::vector<double> h_grid;
    double alpha = 0.05;
    std::optional<double> M;
    double cover_c = 1.0;
    std::optional<double> merge_radius;
    std::uint64_t seed = 0;

    // ascent
    std::string method = "mean_shift";
    double step = 0.1;
    double tol_grad = -1.0;
    double tol_step = 1e-9;
    int max_iter = 10000;
    bool backtrack = false;

    // reconstruction
    std::optional<double> b;
    double c_b = 1.0;
    double c_phi = 1.0;
    std::optional<double> phi_m;
    bool use_phi = false;  // switch to the perturbation-aware thresholds
    std::string boundary = "renormalize";
    int eval_m = 0;  // 0: reuse the design grid

    // simulation
    int sim_n = 100;
    int sim_m = 101;
    int sim_d = 2;
    double sigma = 0.0;
    bool sigma_given = false;
    // component list: [{"mean":[...],"stddev":[...],"weight":w}, ...]
    json components = json::array();
};

const std::set<std::string> kKnownKeys = {
    "input",    "output_dir", "kernel",   "h",        "h_grid",  "alpha",      "M",
    "cover_c",  "merge_radius", "seed",   "method",   "step",    "tol_grad",   "tol_step",
    "max_iter", "backtrack",  "b",        "c_b",      "c_phi",   "phi_m",      "use_phi",
    "boundary", "eval_m",     "sim_n",    "sim_m",    "sim_d",   "sigma",      "components"};

void apply_config_file(Config& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fmc::io_error("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw fmc::io_error("config " + path + ": " + e.what());
    }
    for (const auto& [key, val] : j.items()) {
        if (!kKnownKeys.count(key)) throw fmc::io_error("config " + path + ": unknown key '" + key + "'");
        try {
            if (key == "input") cfg.input = val.get<std::string>();
            else if (key == "output_dir") cfg.output_dir = val.get<std::string>();
            else if (key == "kernel") cfg.kernel = val.get<std::string>();
            else if (key == "h") cfg.h = val.get<double>();
            else if (key == "h_grid") cfg.h_grid = val.get<std::vector<double>>();
            else if (key == "alpha") cfg.alpha = val.get<double>();
            else if (key == "M") cfg.M = val.get<double>();
            else if (key == "cover_c") cfg.cover_c = val.get<double>();
            else if (key == "merge_radius") cfg.merge_radius = val.get<double>();
            else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
            else if (key == "method") cfg.method = val.get<std::string>();
            else if (key == "step") cfg.step = val.get<double>();
            else if (key == "tol_grad") cfg.tol_grad = val.get<double>();
            else if (key == "tol_step") cfg.tol_step = val.get<double>();
            else if (key == "max_iter") cfg.max_iter = val.get<int>();
            else if (key == "backtrack") cfg.backtrack = val.get<bool>();
            else if (key == "b") cfg.b = val.get<double>();
            else if (key == "c_b") cfg.c_b = val.get<double>();
            else if (key == "c_phi") cfg.c_phi = val.get<double>();
            else if (key == "phi_m") cfg.phi_m = val.get<double>();
            else if (key == "use_phi") cfg.use_phi = val.get<bool>();
            else if (key == "boundary") cfg.boundary = val.get<std::string>();
            else if (key == "eval_m") cfg.eval_m = val.get<int>();
            else if (key == "sim_n") cfg.sim_n = val.get<int>();
            else if (key == "sim_m") cfg.sim_m = val.get<int>();
            else if (key == "sim_d") cfg.sim_d = val.get<int>();
            else if (key == "sigma") { cfg.sigma = val.get<double>(); cfg.sigma_given = true; }
            else if (key == "components") cfg.components = val;
        } catch (const json::exception& e) {
            throw fmc::io_error("config " + path + ", key '" + key + "': " + e.what());
        }
    }
}

fmc::AscentOptions ascent_options(const Config& cfg) {
    fmc::AscentOptions opts;
    if (cfg.method == "mean_shift") opts.method = fmc::AscentOptions::Method::mean_shift;
    else if (cfg.method == "euler") opts.method = fmc::AscentOptions::Method::euler;
    else throw fmc::io_error("method must be mean_shift|euler, got " + cfg.method);
    opts.step = cfg.step;
    opts.tol_grad = cfg.tol_grad;
    opts.tol_step = cfg.tol_step;
    opts.max_iter = cfg.max_iter;
    opts.backtrack = cfg.backtrack;
    return opts;
}

/// User-supplied M, or 1.05 * max ||X_i||_{H^1_0} with a loud warning.
double resolve_m(const Config& cfg, const fmc::CurveSample& sample, std::string& source) {
    if (cfg.M) {
        source = "given";
        return *cfg.M;
    }
    double mx = 0;
    for (const auto& c : sample.curves) mx = std::max(mx, fmc::norm_h10(c));
    source = "fallback";
    std::cerr << "warning: M not supplied; using 1.05 * max ||X_i||_H10 = " << 1.05 * mx
              << ". The coverage statement assumes a known a.s. bound.\n";
    return 1.05 * mx;
}

json config_echo(const Config& cfg) {
    json j;
    j["kernel"] = cfg.kernel;
    j["alpha"] = cfg.alpha;
    j["cover_c"] = cfg.cover_c;
    j["method"] = cfg.method;
    j["step"] = cfg.step;
    j["tol_grad"] = cfg.tol_grad;
    j["tol_step"] = cfg.tol_step;
    j["max_iter"] = cfg.max_iter;
    j["backtrack"] = cfg.backtrack;
    j["seed"] = cfg.seed;
    j["c_b"] = cfg.c_b;
    j["c_phi"] = cfg.c_phi;
    j["boundary"] = cfg.boundary;
    if (cfg.merge_radius) j["merge_radius"] = *cfg.merge_radius;
    if (cfg.phi_m) j["phi_m"] = *cfg.phi_m;
    j["use_phi"] = cfg.use_phi;
    return j;
}

int cmd_cluster(const Config& cfg) {
    if (cfg.input.empty()) throw fmc::io_error("cluster: --input is required");
    if (!cfg.h) throw fmc::io_error("cluster: --h is required");
    fmc::CurveSample sample = fmc::read_curves_csv(cfg.input);
    auto model = fmc::make_model(sample, fmc::kernel_by_name(cfg.kernel), *cfg.h);
    const auto opts = ascent_options(cfg);
    const double radius = cfg.merge_radius ? *cfg.merge_radius : fmc::default_merge_radius(*cfg.h);

    std::vector<fmc::AscentResult> results;
    for (const auto& c : model.sample.curves) results.push_back(fmc::ascend(model, c, opts));
    fmc::ModeSet modes = fmc::merge_modes(results, model, radius);
    fmc::Clustering clustering = fmc::assign_clusters(model, modes, opts);

    std::string m_source;
    fmc::ThresholdInputs inputs;
    inputs.n = model.n();
    inputs.alpha = cfg.alpha;
    inputs.cover_c = cfg.cover_c;
    inputs.M = resolve_m(cfg, sample, m_source);
    inputs.constants = model.constants;
    if (cfg.use_phi)
        inputs.phi_m = cfg.phi_m ? *cfg.phi_m : fmc::phi_plugin(sample.grid->m, cfg.c_phi);
    const auto report = fmc::classify(clustering.modes, inputs);

    fs::create_directories(cfg.output_dir);
    fmc::write_labels_csv((fs::path(cfg.output_dir) / "labels.csv").string(), clustering.labels);
    fmc::CurveSample mode_curves{sample.grid, {}, {}};
    for (const auto& mode : clustering.modes.modes) mode_curves.curves.push_back(mode.curve);
    fmc::write_curves_csv((fs::path(cfg.output_dir) / "modes.csv").string(), mode_curves, {}, "mode_");

    json rep = fmc::report_json(report, clustering.modes, model.n(), sample.grid->m, *cfg.h, cfg.alpha,
                                inputs.M, m_source, config_echo(cfg));
    rep["appended_modes"] = clustering.appended_modes;
    std::ofstream out(fs::path(cfg.output_dir) / "report.json");
    out << rep.dump(2) << "\n";
    std::cout << "modes: " << clustering.modes.modes.size() << ", significant: "
              << std::count_if(report.decisions.begin(), report.decisions.end(),
                               [](const auto& d) { return d.significant; })
              << "\n";
    return 0;
}

int cmd_scan(const Config& cfg) {
    if (cfg.input.empty()) throw fmc::io_error("scan: --input is required");
    if (cfg.h_grid.empty()) throw fmc::io_error("scan: h_grid is required (config key h_grid)");
    fmc::CurveSample sample = fmc::read_curves_csv(cfg.input);

    std::string m_source;
    fmc::ThresholdInputs inputs;
    inputs.n = static_cast<long>(sample.curves.size());
    inputs.alpha = cfg.alpha;
    inputs.cover_c = cfg.cover_c;
    inputs.M = resolve_m(cfg, sample, m_source);
    if (cfg.use_phi)
        inputs.phi_m = cfg.phi_m ? *cfg.phi_m : fmc::phi_plugin(sample.grid->m, cfg.c_phi);

    const auto table = fmc::scan_h(sample, fmc::kernel_by_name(cfg.kernel), cfg.h_grid, inputs,
                                   ascent_options(cfg));

    fs::create_directories(cfg.output_dir);
    std::ofstream out(fs::path(cfg.output_dir) / "scan.csv");
    out << "h,modes,significant,recommended\n";
    for (const auto& row : table.rows)
        out << fmc::format_double(row.h) << "," << row.mode_count << "," << row.significant_count << ","
            << (row.recommended ? 1 : 0) << "\n";
    std::cout << "recommended h: " << fmc::format_double(table.rows[table.recommended_index].h) << "\n";
    return 0;
}

int cmd_simulate(Config cfg) {
    if (!cfg.sigma_given)
        std::cerr << "notice: sigma not set; generating noiseless observations (sigma=0)\n";
    auto grid = fmc::make_grid(cfg.sim_m);
    fmc::MixtureSpec spec;
    spec.basis = fmc::sin_basis(cfg.sim_d, grid);
    spec.seed = cfg.seed;
    if (cfg.components.empty()) {
        // Default: symmetric two-component mixture along the first basis curve.
        cfg.components = json::array({{{"mean", {1.0, 0.0}}, {"stddev", {0.1, 0.1}}, {"weight", 0.5}},
                                      {{"mean", {-1.0, 0.0}}, {"stddev", {0.1, 0.1}}, {"weight", 0.5}}});
    }
    for (const auto& c : cfg.components) {
        fmc::MixtureComponent comp;
        try {
            comp.mean = c.at("mean").get<std::vector<double>>();
            comp.stddev = c.at("stddev").get<std::vector<double>>();
            comp.weight = c.at("weight").get<double>();
        } catch (const json::exception& e) {
            throw fmc::io_error(std::string("components: ") + e.what());
        }
        spec.components.push_back(std::move(comp));
    }
    auto draw = fmc::sample_mixture(spec, cfg.sim_n);

    fs::create_directories(cfg.output_dir);
    std::map<std::string, std::string> meta{{"seed", std::to_string(cfg.seed)},
                                            {"sigma", fmc::format_double(cfg.sigma)}};
    auto obs = fmc::observe_noisy(draw.sample, cfg.sigma, cfg.seed + 1);
    std::vector<std::string> ids;
    for (size_t i = 0; i < obs.values.size(); ++i) ids.push_back("curve_" + std::to_string(i));
    fmc::write_table_csv((fs::path(cfg.output_dir) / "observations.csv").string(), grid, obs.values, ids,
                         meta);
    fmc::write_curves_csv((fs::path(cfg.output_dir) / "curves.csv").string(), draw.sample, meta);
    fmc::write_labels_csv((fs::path(cfg.output_dir) / "true_labels.csv").string(), draw.sample.labels);
    fmc::CurveSample means{grid, draw.component_means, {}};
    fmc::write_curves_csv((fs::path(cfg.output_dir) / "true_means.csv").string(), means, meta, "mean_");
    std::cout << "wrote " << cfg.sim_n << " curves on m=" << cfg.sim_m << "\n";
    return 0;
}

int cmd_reconstruct(const Config& cfg) {
    if (cfg.input.empty()) throw fmc::io_error("reconstruct: --input is required");
    fmc::Observations obs = fmc::read_observations_csv(cfg.input);
    fmc::SmootherSpec spec;
    spec.b = cfg.b ? *cfg.b : fmc::default_bandwidth(obs.grid->m, cfg.c_b);
    if (cfg.boundary == "reflect") spec.boundary = fmc::Boundary::reflect;
    else if (cfg.boundary == "renormalize") spec.boundary = fmc::Boundary::renormalize;
    else throw fmc::io_error("boundary must be reflect|renormalize, got " + cfg.boundary);

    auto eval_grid = cfg.eval_m >= 3 ? fmc::make_grid(cfg.eval_m) : obs.grid;
    fmc::CurveSample out = fmc::reconstruct_sample(obs, spec, eval_grid);

    fs::create_directories(cfg.output_dir);
    std::map<std::string, std::string> meta{{"seed", std::to_string(cfg.seed)},
                                            {"b", fmc::format_double(spec.b)},
                                            {"phi_m", fmc::format_double(fmc::phi_plugin(obs.grid->m, cfg.c_phi))}};
    fmc::write_curves_csv((fs::path(cfg.output_dir) / "reconstructed.csv").string(), out, meta);
    std::cout << "reconstructed " << out.curves.size() << " curves (b=" << spec.b << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"modal clustering of functional data via kernel pseudo-densities"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print usage");  // frees -h/--h for the bandwidth

    Config cfg;
    std::string config_path;
    std::string command;
    for (const char* name : {"cluster", "scan", "simulate", "reconstruct"}) {
        auto* sub = app.add_subcommand(name);
        sub->set_help_flag("--help", "print usage");
        sub->add_option("--config", config_path, "JSON config file; flags override its values");
        sub->add_option("--input", cfg.input);
        sub->add_option("--output-dir", cfg.output_dir);
        sub->add_option("--kernel", cfg.kernel, "exponential|cubic");
        sub->add_option("--h", [&cfg](const std::vector<std::string>& v) {
            cfg.h = std::stod(v[0]);
            return true;
        }, "pseudo-density bandwidth");
        sub->add_option("--alpha", cfg.alpha);
        sub->add_option("--M", [&cfg](const std::vector<std::string>& v) {
            cfg.M = std::stod(v[0]);
            return true;
        }, "a.s. bound on ||X||_H10");
        sub->add_option("--seed", cfg.seed);
        sub->callback([&command, name]() { command = name; });
    }

    // Parse twice: the config file must be read first, then flags override.
    try {
        app.parse(argc, argv);
        if (!config_path.empty()) {
            Config file_cfg;
            apply_config_file(file_cfg, config_path);
            // Flags win: re-apply command line on top of the file values.
            cfg = file_cfg;
            app.clear();
            app.parse(argc, argv);
        }
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitBadInput;
    } catch (const fmc::io_error& e) {
        std::cerr << "error: " << e.what() << (e.line ? " (line " + std::to_string(e.line) + ")" : "")
                  << "\n";
        return kExitBadInput;
    }

    try {
        if (command == "cluster") return cmd_cluster(cfg);
        if (command == "scan") return cmd_scan(cfg);
        if (command == "simulate") return cmd_simulate(cfg);
        if (command == "reconstruct") return cmd_reconstruct(cfg);
        std::cerr << "error: no subcommand\n";
        return kExitBadInput;
    } catch (const fmc::io_error& e) {
        std::cerr << "error: " << e.what() << (e.line ? " (line " + std::to_string(e.line) + ")" : "")
                  << "\n";
        return kExitBadInput;
    } catch (const fmc::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const fmc::error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
