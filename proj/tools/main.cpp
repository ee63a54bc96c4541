// Command-line front end. Subcommands wrap the library modules one-to-one:
//
//   gen-data    boundary/solution dataset generation
//   train       one training run (checkpoint + loss curve + run log)
//   eval        metrics of one checkpoint over test sets
//   res-matrix  cross-resolution evaluation grid
//   gradcheck   finite-difference verification of every primitive
//   report      merge eval outputs into the summary tables
//
// Config files are JSON with strict keys: anything unknown is rejected by
// name. --override KEY=VALUE patches dotted paths into the config before
// parsing, --seed is a shorthand for the seed field. Exit codes: 0 success,
// 1 user/config error, 2 numerical failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lpfno/core/jsonutil.hpp"
#include "lpfno/harness/gradcheck_suite.hpp"
#include "lpfno/harness/report.hpp"
#include "lpfno/harness/resolution.hpp"
#include "lpfno/harness/train.hpp"

namespace fs = std::filesystem;
using namespace lpfno;
using namespace lpfno::harness;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

json version_info() {
    return {{"lpfno", kVersion},
            {"compiler", __VERSION__},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"cli11", CLI11_VERSION}};
}

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    return io::read_json_file(path);
}

/// Applies one KEY=VALUE override. KEY is a dotted path into nested objects;
/// VALUE is parsed as JSON when possible (numbers, booleans, null, quoted
/// strings, arrays) and taken as a bare string otherwise.
void apply_override(json& cfg, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw InvalidArgument("override '" + spec + "' is not of the form KEY=VALUE");
    const std::string key = spec.substr(0, eq);
    const std::string raw = spec.substr(eq + 1);

    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;  // bare string
    }

    json* node = &cfg;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
        if (part.empty())
            throw InvalidArgument("override key '" + key + "' has an empty path segment");
        if (dot == std::string::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        if (!node->contains(part)) (*node)[part] = json::object();
        node = &(*node)[part];
        if (!node->is_object())
            throw InvalidArgument("override key '" + key + "': '" + part +
                                  "' is not an object in the config");
        start = dot + 1;
    }
}

json merged_config(const std::string& config_path, const std::vector<std::string>& overrides) {
    json cfg = load_config_file(config_path);
    if (!cfg.is_object())
        throw InvalidArgument(config_path + ": top-level config must be a JSON object");
    for (const auto& o : overrides) apply_override(cfg, o);
    return cfg;
}

/// Output directories: the parent must already exist, the leaf is created.
fs::path prepare_out_dir(const std::string& out) {
    if (out.empty()) throw InvalidArgument("--out is required");
    fs::path dir(out);
    fs::path parent = dir.has_parent_path() ? dir.parent_path() : fs::path(".");
    if (!fs::is_directory(parent))
        throw IoError("cannot create '" + dir.string() + "': output directory '" +
                      parent.string() + "' does not exist");
    if (fs::exists(dir) && !fs::is_directory(dir))
        throw IoError("'" + dir.string() + "' exists and is not a directory");
    fs::create_directory(dir);
    return dir;
}

void write_run_log(const fs::path& dir, const std::string& command, const json& effective_config,
                   double wall_s, const json& extra = json::object()) {
    json log{{"command", command},
             {"config", effective_config},
             {"versions", version_info()},
             {"wall_time_s", wall_s}};
    for (const auto& item : extra.items()) log[item.key()] = item.value();
    io::write_json_file(dir / "run_log.json", log);
}

// ---------------------------------------------------------------- gen-data

data::GenerationConfig generation_from_json(const json& j) {
    reject_unknown_keys(
        j, {"n", "includes_boundary", "count", "families", "split", "seed", "source"},
        "generation config");
    data::GenerationConfig gc;
    gc.grid.n = 32;
    gc.count = j.value("count", std::size_t{0});
    gc.families = {data::BoundaryFamily::Gaussian, data::BoundaryFamily::Sinusoidal};
    if (j.contains("n")) gc.grid.n = j.at("n").get<std::size_t>();
    if (j.contains("includes_boundary"))
        gc.grid.includes_boundary = j.at("includes_boundary").get<bool>();
    if (j.contains("families")) {
        gc.families.clear();
        for (const auto& f : j.at("families"))
            gc.families.push_back(data::family_from_name(f.get<std::string>()));
    }
    gc.split = data::split_from_name(j.value("split", std::string("id")));
    gc.seed = j.value("seed", std::uint64_t{0});
    gc.source = j.value("source", 0.0);
    if (gc.count < 1) throw InvalidArgument("generation config: count must be >= 1");
    gc.validate();
    return gc;
}

json generation_to_json(const data::GenerationConfig& gc) {
    json families = json::array();
    for (auto f : gc.families) families.push_back(data::family_name(f));
    return {{"n", gc.grid.n},
            {"includes_boundary", gc.grid.includes_boundary},
            {"count", gc.count},
            {"families", std::move(families)},
            {"split", data::split_name(gc.split)},
            {"seed", gc.seed},
            {"source", gc.source}};
}

int cmd_gen_data(const json& cfg, const std::string& out) {
    const auto t0 = Clock::now();
    data::GenerationConfig gc = generation_from_json(cfg);
    const fs::path dir = prepare_out_dir(out);
    data::Dataset d = data::generate_dataset(gc);
    data::save_dataset(d, dir);
    write_run_log(dir, "gen-data", generation_to_json(gc), seconds_since(t0),
                  {{"seed", gc.seed}});
    std::cout << "generated " << gc.count << " samples at " << gc.grid.n << "x" << gc.grid.n
              << " (seed " << gc.seed << ") -> " << dir.string() << "\n";
    return 0;
}

// ------------------------------------------------------------------- train

template <typename T>
int run_train(const ExperimentConfig& cfg, const fs::path& dir, Clock::time_point t0) {
    TrainOutcome<T> out = run_training<T>(cfg, [](const EpochStat& s) {
        std::cerr << "epoch " << s.epoch << " lr " << s.lr << " train_mse " << s.train_mse
                  << " test_mse " << s.test_mse << "\n";
    });
    const fs::path ckpt = dir / "checkpoint";
    models::save_model_checkpoint(ckpt, out.model, cfg.seed, cfg.epochs);
    write_text_file(dir / "loss_curve.csv", loss_curve_csv(out.curve));

    const auto counts = out.model.param_counts();
    write_run_log(dir, "train", cfg.to_json(), seconds_since(t0),
                  {{"seed", cfg.seed},
                   {"total_steps", out.total_steps},
                   {"param_counts",
                    {{"complex_as_one", counts.complex_as_one},
                     {"complex_as_two", counts.complex_as_two}}}});
    std::cout << "trained " << cfg.model << " for " << cfg.epochs << " epochs ("
              << out.total_steps << " steps): final train_mse " << out.curve.back().train_mse
              << " test_mse " << out.curve.back().test_mse << "\n"
              << "checkpoint -> " << ckpt.string() << "\n";
    return 0;
}

int cmd_train(const json& cfg_json, const std::string& out) {
    const auto t0 = Clock::now();
    ExperimentConfig cfg = ExperimentConfig::from_json(cfg_json);
    const fs::path dir = prepare_out_dir(out);
    if (cfg.precision == "f64") return run_train<double>(cfg, dir, t0);
    return run_train<float>(cfg, dir, t0);
}

// -------------------------------------------------------------------- eval

struct EvalConfig {
    std::string checkpoint;
    std::vector<TestSetRef> test_sets;
    std::size_t train_resolution = 0;
    std::size_t batch_size = 64;
    std::string precision = "f32";

    static EvalConfig from_json(const json& j) {
        reject_unknown_keys(
            j, {"checkpoint", "test_sets", "train_resolution", "batch_size", "precision"},
            "eval config");
        EvalConfig c;
        c.checkpoint = require_key(j, "checkpoint", "eval config").get<std::string>();
        for (const auto& s : require_key(j, "test_sets", "eval config"))
            c.test_sets.push_back(TestSetRef::from_json(s));
        c.train_resolution = j.value("train_resolution", std::size_t{0});
        c.batch_size = j.value("batch_size", std::size_t{64});
        c.precision = j.value("precision", std::string("f32"));
        if (c.precision != "f32" && c.precision != "f64")
            throw InvalidArgument("eval config: precision must be 'f32' or 'f64'");
        if (c.batch_size < 1) throw InvalidArgument("eval config: batch_size must be >= 1");
        if (c.test_sets.empty()) throw InvalidArgument("eval config: test_sets is empty");
        return c;
    }

    json to_json() const {
        json sets = json::array();
        for (const auto& s : test_sets) sets.push_back({{"name", s.name}, {"path", s.path}});
        return {{"checkpoint", checkpoint},
                {"test_sets", std::move(sets)},
                {"train_resolution", train_resolution},
                {"batch_size", batch_size},
                {"precision", precision}};
    }
};

template <typename T>
MetricsReport eval_with(const EvalConfig& cfg, const models::CheckpointData& data) {
    models::AnyModel<T> model = models::model_from_checkpoint<T>(data);
    return evaluate_model<T>(model, cfg.test_sets, cfg.train_resolution, data.init_seed,
                             cfg.precision, cfg.batch_size);
}

int cmd_eval(const json& cfg_json, const std::string& out) {
    const auto t0 = Clock::now();
    EvalConfig cfg = EvalConfig::from_json(cfg_json);
    const fs::path dir = prepare_out_dir(out);
    models::CheckpointData data = models::load_checkpoint(cfg.checkpoint);
    MetricsReport report =
        cfg.precision == "f64" ? eval_with<double>(cfg, data) : eval_with<float>(cfg, data);
    io::write_json_file(dir / "metrics.json", report.to_json());

    for (const auto& s : report.sets)
        std::cout << s.name << " (" << s.family << "/" << s.split << " @ " << s.resolution
                  << "): mean rel L2 " << s.mean_rel_l2 << ", mean rel L1 " << s.mean_rel_l1
                  << " over " << s.count << " samples (" << s.degenerate << " degenerate)\n";

    write_run_log(dir, "eval", cfg.to_json(), seconds_since(t0),
                  {{"model", data.model_kind},
                   {"checkpoint_seed", data.init_seed},
                   {"metrics", (dir / "metrics.json").string()}});
    return 0;
}

// -------------------------------------------------------------- res-matrix

struct ResMatrixConfig {
    std::vector<ResolutionEntry> checkpoints;
    std::vector<ResolutionEntry> test_sets;
    std::size_t batch_size = 64;
    std::string precision = "f32";

    static std::vector<ResolutionEntry> entries(const json& j, const std::string& ctx) {
        std::vector<ResolutionEntry> out;
        for (const auto& e : j) {
            reject_unknown_keys(e, {"resolution", "path"}, ctx);
            ResolutionEntry r;
            r.resolution = require_key(e, "resolution", ctx).get<std::size_t>();
            r.path = require_key(e, "path", ctx).get<std::string>();
            out.push_back(std::move(r));
        }
        return out;
    }

    static ResMatrixConfig from_json(const json& j) {
        reject_unknown_keys(j, {"checkpoints", "test_sets", "batch_size", "precision"},
                            "res-matrix config");
        ResMatrixConfig c;
        c.checkpoints =
            entries(require_key(j, "checkpoints", "res-matrix config"), "res-matrix checkpoint");
        c.test_sets =
            entries(require_key(j, "test_sets", "res-matrix config"), "res-matrix test set");
        c.batch_size = j.value("batch_size", std::size_t{64});
        c.precision = j.value("precision", std::string("f32"));
        if (c.precision != "f32" && c.precision != "f64")
            throw InvalidArgument("res-matrix config: precision must be 'f32' or 'f64'");
        return c;
    }

    json to_json() const {
        auto list = [](const std::vector<ResolutionEntry>& es) {
            json out = json::array();
            for (const auto& e : es)
                out.push_back({{"resolution", e.resolution}, {"path", e.path}});
            return out;
        };
        return {{"checkpoints", list(checkpoints)},
                {"test_sets", list(test_sets)},
                {"batch_size", batch_size},
                {"precision", precision}};
    }
};

int cmd_res_matrix(const json& cfg_json, const std::string& out) {
    const auto t0 = Clock::now();
    ResMatrixConfig cfg = ResMatrixConfig::from_json(cfg_json);
    const fs::path dir = prepare_out_dir(out);
    ResolutionMatrix m =
        cfg.precision == "f64"
            ? build_resolution_matrix<double>(cfg.checkpoints, cfg.test_sets, cfg.batch_size)
            : build_resolution_matrix<float>(cfg.checkpoints, cfg.test_sets, cfg.batch_size);
    io::write_json_file(dir / "matrix.json", m.to_json());
    write_text_file(dir / "matrix.csv", m.to_csv());
    std::cout << m.to_csv();
    write_run_log(dir, "res-matrix", cfg.to_json(), seconds_since(t0),
                  {{"model", m.model_kind},
                   {"matrix", (dir / "matrix.json").string()}});
    return 0;
}

// --------------------------------------------------------------- gradcheck

int cmd_gradcheck(const std::string& out) {
    const auto t0 = Clock::now();
    const auto cases = run_gradcheck_suite();
    std::size_t failed = 0;
    double worst = -1.0;
    std::string worst_case, worst_param;
    json case_log = json::array();
    for (const auto& c : cases) {
        const bool ok = c.report.pass(kGradcheckTol);
        if (!ok) ++failed;
        std::cout << (ok ? "ok   " : "FAIL ") << c.name << ": max rel err "
                  << c.report.max_rel_err << " (worst " << c.report.worst_param << "["
                  << c.report.worst_index << "])\n";
        if (c.report.max_rel_err > worst) {
            worst = c.report.max_rel_err;
            worst_case = c.name;
            worst_param = c.report.worst_param;
        }
        case_log.push_back({{"name", c.name},
                            {"max_rel_err", c.report.max_rel_err},
                            {"worst_param", c.report.worst_param},
                            {"pass", ok}});
    }
    std::cout << "worst rel err " << worst << " (" << worst_case << ", " << worst_param
              << "); " << cases.size() - failed << "/" << cases.size() << " within "
              << kGradcheckTol << "\n";

    if (!out.empty()) {
        const fs::path dir = prepare_out_dir(out);
        io::write_json_file(dir / "gradcheck.json",
                            {{"tolerance", kGradcheckTol},
                             {"cases", case_log},
                             {"worst_rel_err", worst}});
        write_run_log(dir, "gradcheck", json::object(), seconds_since(t0),
                      {{"failed", failed}});
    }
    if (failed > 0) {
        std::cerr << "gradcheck: " << failed << " case(s) exceed tolerance " << kGradcheckTol
                  << "\n";
        return 2;
    }
    return 0;
}

// ------------------------------------------------------------------ report

struct ReportConfig {
    std::vector<std::string> metrics;
    std::vector<std::string> matrices;

    static ReportConfig from_json(const json& j) {
        reject_unknown_keys(j, {"metrics", "matrices"}, "report config");
        ReportConfig c;
        for (const auto& p : require_key(j, "metrics", "report config"))
            c.metrics.push_back(p.get<std::string>());
        if (j.contains("matrices"))
            for (const auto& p : j.at("matrices")) c.matrices.push_back(p.get<std::string>());
        if (c.metrics.empty()) throw InvalidArgument("report config: metrics is empty");
        return c;
    }

    json to_json() const { return {{"metrics", metrics}, {"matrices", matrices}}; }
};

/// Assembles train-resolution x test-resolution error grids out of eval
/// outputs, one per model kind, using each report's in-distribution sets.
/// Kinds whose reports do not cover a full rectangular grid are skipped.
std::vector<ResolutionMatrix> matrices_from_reports(const std::vector<MetricsReport>& reports) {
    std::vector<std::string> kinds;
    for (const auto& r : reports)
        if (std::find(kinds.begin(), kinds.end(), r.model_kind) == kinds.end())
            kinds.push_back(r.model_kind);

    std::vector<ResolutionMatrix> out;
    for (const auto& kind : kinds) {
        ResolutionMatrix m;
        m.model_kind = kind;
        for (const auto& r : reports) {
            if (r.model_kind != kind) continue;
            m.train_resolutions.push_back(r.train_resolution);
            for (const auto& s : r.sets)
                if (s.split == "id" &&
                    std::find(m.test_resolutions.begin(), m.test_resolutions.end(),
                              s.resolution) == m.test_resolutions.end())
                    m.test_resolutions.push_back(s.resolution);
        }
        std::sort(m.train_resolutions.begin(), m.train_resolutions.end());
        std::sort(m.test_resolutions.begin(), m.test_resolutions.end());

        bool complete = !m.train_resolutions.empty() && !m.test_resolutions.empty();
        for (std::size_t tr : m.train_resolutions) {
            std::vector<double> row;
            for (std::size_t te : m.test_resolutions) {
                double cell = -1.0;
                for (const auto& r : reports) {
                    if (r.model_kind != kind || r.train_resolution != tr) continue;
                    for (const auto& s : r.sets)
                        if (s.split == "id" && s.resolution == te) {
                            cell = s.mean_rel_l2;
                            break;
                        }
                    if (cell >= 0) break;
                }
                if (cell < 0) complete = false;
                row.push_back(cell);
            }
            m.cells.push_back(std::move(row));
        }
        if (complete) out.push_back(std::move(m));
    }
    return out;
}

int cmd_report(const json& cfg_json, const std::string& out) {
    const auto t0 = Clock::now();
    ReportConfig cfg = ReportConfig::from_json(cfg_json);
    const fs::path dir = prepare_out_dir(out);

    std::vector<MetricsReport> reports;
    for (const auto& p : cfg.metrics)
        reports.push_back(MetricsReport::from_json(io::read_json_file(p)));
    std::vector<ResolutionMatrix> matrices;
    for (const auto& p : cfg.matrices)
        matrices.push_back(ResolutionMatrix::from_json(io::read_json_file(p)));

    write_text_file(dir / "metrics_long.csv", long_csv(reports));
    io::write_json_file(dir / "accuracy_table.json", accuracy_table_json(reports));

    const auto assembled = matrices.empty() ? matrices_from_reports(reports) : matrices;
    if (!assembled.empty())
        io::write_json_file(dir / "resolution_table.json", resolution_table_json(assembled));
    for (const auto& m : assembled)
        write_text_file(dir / ("resolution_" + m.model_kind + ".csv"), m.to_csv());

    std::cout << "report over " << reports.size() << " eval result(s)";
    if (!assembled.empty()) std::cout << ", " << assembled.size() << " resolution grid(s)";
    std::cout << " -> " << dir.string() << "\n";

    write_run_log(dir, "report", cfg.to_json(), seconds_since(t0),
                  {{"inputs", cfg.metrics.size()}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"boundary-to-domain operator learning toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    struct Common {
        std::string config, out;
        std::vector<std::string> overrides;
        std::uint64_t seed = 0;
        bool seed_given = false;
    };
    auto add_common = [&](CLI::App* sub, Common& c, bool with_seed, bool out_required) {
        sub->add_option("--config", c.config, "JSON config file");
        auto* out = sub->add_option("--out", c.out, "output directory (parent must exist)");
        if (out_required) out->required();
        sub->add_option("--override", c.overrides,
                        "config override KEY=VALUE (dotted keys reach nested fields)");
        if (with_seed)
            sub->add_option("--seed", c.seed, "shorthand for the config seed field")
                ->each([&c](const std::string&) { c.seed_given = true; });
    };

    Common gen, train, eval, resm, grad, rep;
    auto* gen_cmd = app.add_subcommand("gen-data", "generate a dataset of boundary/solution pairs");
    add_common(gen_cmd, gen, true, true);
    auto* train_cmd = app.add_subcommand("train", "train a model from an experiment config");
    add_common(train_cmd, train, true, true);
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint over test sets");
    add_common(eval_cmd, eval, false, true);
    auto* resm_cmd = app.add_subcommand("res-matrix", "cross-resolution evaluation grid");
    add_common(resm_cmd, resm, false, true);
    auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of all primitives");
    grad_cmd->add_option("--out", grad.out, "optional directory for the JSON verdict");
    auto* rep_cmd = app.add_subcommand("report", "merge eval outputs into summary tables");
    add_common(rep_cmd, rep, false, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen_cmd) {
            json cfg = merged_config(gen.config, gen.overrides);
            if (gen.seed_given) cfg["seed"] = gen.seed;
            return cmd_gen_data(cfg, gen.out);
        }
        if (*train_cmd) {
            json cfg = merged_config(train.config, train.overrides);
            if (train.seed_given) cfg["seed"] = train.seed;
            return cmd_train(cfg, train.out);
        }
        if (*eval_cmd) return cmd_eval(merged_config(eval.config, eval.overrides), eval.out);
        if (*resm_cmd) return cmd_res_matrix(merged_config(resm.config, resm.overrides), resm.out);
        if (*grad_cmd) return cmd_gradcheck(grad.out);
        if (*rep_cmd) return cmd_report(merged_config(rep.config, rep.overrides), rep.out);
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
