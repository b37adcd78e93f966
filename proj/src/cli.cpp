#include "iafmc/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "iafmc/errors.hpp"

namespace fs = std::filesystem;

namespace iafmc {

namespace {

std::string fmt_double(double v, const char* spec = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return in;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

Dataset load_dataset(const std::string& path) {
    if (path.empty()) throw ConfigError("no dataset path given");
    auto in = open_input(path);
    return deserialize_dataset(in);
}

TrainConfig to_train_config(const RunConfig& cfg) {
    TrainConfig tc;
    tc.lambda = cfg.lambda;
    tc.reg = cfg.reg;
    tc.alpha = cfg.alpha;
    tc.beta = cfg.beta;
    tc.epochs = cfg.epochs;
    tc.seed = cfg.seed;
    tc.eval_every = cfg.eval_every;
    tc.monitor_triples = cfg.monitor_triples;
    return tc;
}

void write_effective_config(const RunConfig& cfg, const fs::path& run_dir) {
    auto out = open_output(run_dir / "config.json");
    out << run_config_json(cfg);
}

void write_epoch_log(const std::vector<EpochLog>& log, const fs::path& path) {
    auto out = open_output(path);
    out << "epoch,mean_monitor_loss,val_recall_at_10,wall_seconds\n";
    for (const auto& row : log) {
        out << row.epoch << ',' << fmt_double(row.mean_monitor_loss) << ',';
        if (row.val_recall10) out << fmt_double(*row.val_recall10);
        out << ',' << fmt_double(row.wall_seconds, "%.3f") << '\n';
    }
}

void write_reports(const EvalReport& report, const fs::path& run_dir, const std::string& stem) {
    open_output(run_dir / (stem + ".json")) << report_json(report);
    open_output(run_dir / (stem + ".txt")) << report_text(report);
    auto user_csv = open_output(run_dir / (stem + "_groups_user.csv"));
    write_bucket_csv(report.user_buckets, user_csv);
    auto item_csv = open_output(run_dir / (stem + "_groups_item.csv"));
    write_bucket_csv(report.item_buckets, item_csv);
}

GroupingConfig to_grouping(const RunConfig& cfg) {
    GroupingConfig grp;
    grp.user_len_edges = cfg.user_len_edges;
    grp.item_count_edges = cfg.item_count_edges;
    return grp;
}

struct PointMetrics {
    double recall5 = 0.0, recall10 = 0.0, ndcg5 = 0.0, ndcg10 = 0.0;
    int count = 0;

    void add(const EvalReport& r) {
        recall5 += r.recall.at(5);
        recall10 += r.recall.at(10);
        ndcg5 += r.ndcg.at(5);
        ndcg10 += r.ndcg.at(10);
        ++count;
    }
    PointMetrics mean() const {
        PointMetrics m;
        if (count > 0) {
            m.recall5 = recall5 / count;
            m.recall10 = recall10 / count;
            m.ndcg5 = ndcg5 / count;
            m.ndcg10 = ndcg10 / count;
            m.count = 1;
        }
        return m;
    }
};

constexpr int sweep_ns[2] = {5, 10};

// One train-and-evaluate pass as cmd_train + cmd_eval would run it.
EvalReport train_eval_point(const RunConfig& cfg, const Dataset& ds, const AssociationGraph& g,
                            double beta, int order, std::uint64_t seed) {
    ModelParams params = init_params(ds.user_count(), ds.item_count(), cfg.d, order, cfg.mode, seed);
    TrainConfig tc = to_train_config(cfg);
    tc.beta = beta;
    tc.seed = seed;

    ValidationHook validate;
    if (cfg.model_selection == "best" && tc.eval_every > 0) {
        validate = [&](const ModelParams& snapshot) {
            const int ns[1] = {10};
            return evaluate_split(snapshot, ds, g, Split::validation, ns, tc.alpha, tc.beta)
                .recall.at(10);
        };
    }
    TrainResult res = train(std::move(params), ds, g, tc, validate);
    const ModelParams& chosen = cfg.model_selection == "final" ? res.final_params : res.params;
    return evaluate_split(chosen, ds, g, split_from_name(cfg.split), sweep_ns, tc.alpha, tc.beta,
                          to_grouping(cfg));
}

}  // namespace

void RunConfig::validate() const {
    to_train_config(*this).validate();
    if (d < 1 || L < 1) throw ConfigError("d and L must be positive");
    if (min_interactions < 3) throw ConfigError("min-interactions must be at least 3");
    if (window < 1) throw ConfigError("window must be at least 1");
    if (model_selection != "best" && model_selection != "final")
        throw ConfigError("model-selection must be 'best' or 'final'");
    split_from_name(split);
    if (top_ns.empty()) throw ConfigError("top-N list must not be empty");
    for (int n_at : top_ns)
        if (n_at < 1) throw ConfigError("top-N values must be positive");
    if (axis != "beta" && axis != "iterations" && axis != "order")
        throw ConfigError("axis must be beta, iterations or order");
    if (repeats < 1) throw ConfigError("repeats must be at least 1");
    if (beta_grid.empty() || iter_grid.empty() || order_grid.empty())
        throw ConfigError("sweep grids must not be empty");
    for (double bg : beta_grid)
        if (!(bg >= 0.0 && bg <= 1.0)) throw ConfigError("beta grid values must lie in [0, 1]");
    for (int it : iter_grid)
        if (it < 1) throw ConfigError("iteration grid values must be positive");
    for (int og : order_grid)
        if (og < 1) throw ConfigError("order grid values must be positive");
}

std::string run_config_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["subcommand"] = cfg.subcommand;
    j["input"] = cfg.input;
    j["dataset"] = cfg.dataset;
    j["checkpoint"] = cfg.checkpoint;
    j["out_root"] = cfg.out_root;
    j["run_dir"] = cfg.run_dir;
    j["columns"] = cfg.columns;
    j["min_interactions"] = cfg.min_interactions;
    j["window"] = cfg.window;
    j["mode"] = mode_name(cfg.mode);
    j["d"] = cfg.d;
    j["L"] = cfg.L;
    j["lambda"] = cfg.lambda;
    j["reg_t"] = cfg.reg.alpha_t;
    j["reg_w"] = cfg.reg.alpha_w;
    j["reg_b"] = cfg.reg.beta_b;
    j["reg_eta"] = cfg.reg.beta_eta;
    j["reg_zeta"] = cfg.reg.beta_zeta;
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["epochs"] = cfg.epochs;
    j["seed"] = cfg.seed;
    j["eval_every"] = cfg.eval_every;
    j["monitor_triples"] = cfg.monitor_triples;
    j["model_selection"] = cfg.model_selection;
    j["split"] = cfg.split;
    j["top_ns"] = cfg.top_ns;
    j["user_len_edges"] = cfg.user_len_edges;
    j["item_count_edges"] = cfg.item_count_edges;
    j["axis"] = cfg.axis;
    j["beta_grid"] = cfg.beta_grid;
    j["iter_grid"] = cfg.iter_grid;
    j["order_grid"] = cfg.order_grid;
    j["repeats"] = cfg.repeats;
    return j.dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text, RunConfig cfg) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "subcommand") cfg.subcommand = value.get<std::string>();
            else if (key == "input") cfg.input = value.get<std::string>();
            else if (key == "dataset") cfg.dataset = value.get<std::string>();
            else if (key == "checkpoint") cfg.checkpoint = value.get<std::string>();
            else if (key == "out_root") cfg.out_root = value.get<std::string>();
            else if (key == "run_dir") cfg.run_dir = value.get<std::string>();
            else if (key == "columns") cfg.columns = value.get<std::string>();
            else if (key == "min_interactions") cfg.min_interactions = value.get<int>();
            else if (key == "window") cfg.window = value.get<int>();
            else if (key == "mode") cfg.mode = mode_from_name(value.get<std::string>());
            else if (key == "d") cfg.d = value.get<int>();
            else if (key == "L") cfg.L = value.get<int>();
            else if (key == "lambda") cfg.lambda = value.get<double>();
            else if (key == "reg_t") cfg.reg.alpha_t = value.get<double>();
            else if (key == "reg_w") cfg.reg.alpha_w = value.get<double>();
            else if (key == "reg_b") cfg.reg.beta_b = value.get<double>();
            else if (key == "reg_eta") cfg.reg.beta_eta = value.get<double>();
            else if (key == "reg_zeta") cfg.reg.beta_zeta = value.get<double>();
            else if (key == "alpha") cfg.alpha = value.get<double>();
            else if (key == "beta") cfg.beta = value.get<double>();
            else if (key == "epochs") cfg.epochs = value.get<int>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "eval_every") cfg.eval_every = value.get<int>();
            else if (key == "monitor_triples") cfg.monitor_triples = value.get<int>();
            else if (key == "model_selection") cfg.model_selection = value.get<std::string>();
            else if (key == "split") cfg.split = value.get<std::string>();
            else if (key == "top_ns") cfg.top_ns = value.get<std::vector<int>>();
            else if (key == "user_len_edges") cfg.user_len_edges = value.get<std::vector<std::int64_t>>();
            else if (key == "item_count_edges") cfg.item_count_edges = value.get<std::vector<std::int64_t>>();
            else if (key == "axis") cfg.axis = value.get<std::string>();
            else if (key == "beta_grid") cfg.beta_grid = value.get<std::vector<double>>();
            else if (key == "iter_grid") cfg.iter_grid = value.get<std::vector<int>>();
            else if (key == "order_grid") cfg.order_grid = value.get<std::vector<int>>();
            else if (key == "repeats") cfg.repeats = value.get<int>();
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return cfg;
}

std::string make_run_dir(const RunConfig& cfg) {
    fs::path dir;
    if (!cfg.run_dir.empty()) {
        dir = cfg.run_dir;
    } else {
        fs::path root = cfg.out_root;
        if (root.empty()) {
            const char* env = std::getenv("IAFMC_OUT_ROOT");
            root = (env && *env) ? env : "runs";
        }
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm_buf{};
        localtime_r(&now, &tm_buf);
        char stamp[32];
        std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm_buf);
        const std::string base = cfg.subcommand + "-" + stamp;
        dir = root / base;
        for (int k = 2; fs::exists(dir); ++k) dir = root / (base + "-" + std::to_string(k));
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create run directory '" + dir.string() + "'");
    return dir.string();
}

int cmd_prepare(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.input.empty()) throw ConfigError("prepare needs an input CSV (--input)");

    auto in = open_input(cfg.input);
    std::vector<RawInteraction> raw;
    if (cfg.columns.empty())
        raw = parse_interactions(in);
    else
        raw = parse_interactions(in, ColumnSpec::parse(cfg.columns));

    const Dataset ds = build_dataset(raw, cfg.min_interactions);
    const AssociationGraph graph = build_association_graph(ds, cfg.window);

    const fs::path run_dir = make_run_dir(cfg);
    {
        auto out = open_output(run_dir / "dataset.json");
        serialize_dataset(ds, out);
    }
    {
        auto out = open_output(run_dir / "graph.csv");
        export_edge_list(graph, out);
    }

    const double users = ds.user_count();
    const double items = ds.item_count();
    const double interactions = static_cast<double>(ds.interaction_count());
    const double density = interactions / (users * items);
    const double avg = interactions / users;
    {
        nlohmann::json j;
        j["users"] = ds.user_count();
        j["items"] = ds.item_count();
        j["interactions"] = ds.interaction_count();
        j["density"] = density;
        j["avg_interactions_per_user"] = avg;
        j["min_interactions"] = cfg.min_interactions;
        j["window"] = cfg.window;
        open_output(run_dir / "stats.json") << j.dump(2) << '\n';
    }
    write_effective_config(cfg, run_dir);

    std::printf("users: %d\nitems: %d\ninteractions: %lld\ndensity: %.2f%%\n"
                "avg interactions per user: %.1f\nrun dir: %s\n",
                ds.user_count(), ds.item_count(),
                static_cast<long long>(ds.interaction_count()), density * 100.0, avg,
                run_dir.string().c_str());
    return exit_ok;
}

int cmd_train(const RunConfig& cfg) {
    cfg.validate();
    const Dataset ds = load_dataset(cfg.dataset);
    const AssociationGraph graph = build_association_graph(ds, cfg.window);
    const fs::path run_dir = make_run_dir(cfg);

    ModelParams params =
        init_params(ds.user_count(), ds.item_count(), cfg.d, cfg.L, cfg.mode, cfg.seed);
    const TrainConfig tc = to_train_config(cfg);

    ValidationHook validate;
    if (tc.eval_every > 0) {
        validate = [&](const ModelParams& snapshot) {
            const int ns[1] = {10};
            return evaluate_split(snapshot, ds, graph, Split::validation, ns, tc.alpha, tc.beta)
                .recall.at(10);
        };
    }
    EpochHook progress = [&](const EpochLog& row, const ModelParams&) {
        if (row.val_recall10 || row.epoch == 1 || row.epoch == tc.epochs)
            std::printf("epoch %d  loss %.6f%s\n", row.epoch, row.mean_monitor_loss,
                        row.val_recall10
                            ? ("  val recall@10 " + fmt_double(*row.val_recall10, "%.6f")).c_str()
                            : "");
    };

    TrainResult res = train(std::move(params), ds, graph, tc, validate, progress);
    const ModelParams& chosen = cfg.model_selection == "final" ? res.final_params : res.params;

    {
        auto out = open_output(run_dir / "checkpoint.bin");
        save_checkpoint(chosen, cfg.alpha, cfg.beta, out);
    }
    write_epoch_log(res.log, run_dir / "epochs.csv");
    write_effective_config(cfg, run_dir);

    if (res.best_val_recall)
        std::printf("best epoch %d  val recall@10 %.6f\n", res.best_epoch, *res.best_val_recall);
    std::printf("checkpoint: %s\n", (run_dir / "checkpoint.bin").string().c_str());
    return exit_ok;
}

int cmd_eval(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.checkpoint.empty()) throw ConfigError("eval needs a checkpoint (--checkpoint)");
    const Dataset ds = load_dataset(cfg.dataset);
    const AssociationGraph graph = build_association_graph(ds, cfg.window);

    Checkpoint ck;
    {
        auto in = open_input(cfg.checkpoint);
        ck = load_checkpoint(in);
    }
    if (ck.params.n != ds.user_count() || ck.params.m != ds.item_count())
        throw DataError("checkpoint does not match the dataset");

    const EvalReport report = evaluate_split(ck.params, ds, graph, split_from_name(cfg.split),
                                             cfg.top_ns, ck.alpha, ck.beta, to_grouping(cfg));

    const fs::path run_dir = make_run_dir(cfg);
    write_reports(report, run_dir, "report");
    write_effective_config(cfg, run_dir);
    std::printf("%s\nrun dir: %s\n", report_text(report).c_str(), run_dir.string().c_str());
    return exit_ok;
}

int cmd_sweep(const RunConfig& cfg) {
    cfg.validate();
    const Dataset ds = load_dataset(cfg.dataset);
    const AssociationGraph graph = build_association_graph(ds, cfg.window);
    const fs::path run_dir = make_run_dir(cfg);

    std::vector<std::pair<std::string, PointMetrics>> rows;

    if (cfg.axis == "beta") {
        for (double beta : cfg.beta_grid) {
            PointMetrics acc;
            for (int r = 0; r < cfg.repeats; ++r)
                acc.add(train_eval_point(cfg, ds, graph, beta, cfg.L, cfg.seed + r));
            rows.emplace_back(fmt_double(beta), acc.mean());
            std::printf("beta %s  recall@10 %.6f\n", fmt_double(beta).c_str(),
                        acc.mean().recall10);
        }
    } else if (cfg.axis == "order") {
        for (int order : cfg.order_grid) {
            PointMetrics acc;
            for (int r = 0; r < cfg.repeats; ++r)
                acc.add(train_eval_point(cfg, ds, graph, cfg.beta, order, cfg.seed + r));
            rows.emplace_back(std::to_string(order), acc.mean());
            std::printf("order %d  recall@10 %.6f\n", order, acc.mean().recall10);
        }
    } else {  // iterations: one trajectory per repeat, evaluated at the checkpoints
        std::vector<int> grid = cfg.iter_grid;
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        std::map<int, PointMetrics> acc;

        for (int r = 0; r < cfg.repeats; ++r) {
            const std::uint64_t seed = cfg.seed + r;
            ModelParams params =
                init_params(ds.user_count(), ds.item_count(), cfg.d, cfg.L, cfg.mode, seed);
            TrainConfig tc = to_train_config(cfg);
            tc.seed = seed;
            tc.epochs = grid.back();
            tc.eval_every = 0;  // trajectory snapshots, no model selection

            EpochHook snapshot = [&](const EpochLog& row, const ModelParams& current) {
                if (std::binary_search(grid.begin(), grid.end(), row.epoch))
                    acc[row.epoch].add(evaluate_split(current, ds, graph,
                                                      split_from_name(cfg.split), sweep_ns,
                                                      tc.alpha, tc.beta, to_grouping(cfg)));
            };
            train(std::move(params), ds, graph, tc, {}, snapshot);
        }
        for (int e : grid) {
            rows.emplace_back(std::to_string(e), acc[e].mean());
            std::printf("iterations %d  recall@10 %.6f\n", e, acc[e].mean().recall10);
        }
    }

    const fs::path csv_path = run_dir / ("sweep_" + cfg.axis + ".csv");
    {
        auto out = open_output(csv_path);
        out << cfg.axis << ",recall_at_10,ndcg_at_5,ndcg_at_10,recall_at_5\n";
        for (const auto& [value, pm] : rows)
            out << value << ',' << fmt_double(pm.recall10) << ',' << fmt_double(pm.ndcg5) << ','
                << fmt_double(pm.ndcg10) << ',' << fmt_double(pm.recall5) << '\n';
    }
    write_effective_config(cfg, run_dir);
    std::printf("sweep csv: %s\n", csv_path.string().c_str());
    return exit_ok;
}

namespace {

std::string find_config_path(const std::vector<std::string>& args) {
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) return args[k + 1];
        if (args[k].rfind("--config=", 0) == 0) return args[k].substr(9);
    }
    return {};
}

void report_error(const char* kind, const std::string& message) {
    nlohmann::json j;
    j["error"] = kind;
    j["message"] = message;
    std::cerr << j.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    RunConfig cfg;
    try {
        const std::string config_path = find_config_path(args);
        if (!config_path.empty()) {
            auto in = open_input(config_path);
            std::stringstream buffer;
            buffer << in.rdbuf();
            cfg = run_config_from_json(buffer.str(), cfg);
        }

        CLI::App app{"IAFMC sequential recommender"};
        app.require_subcommand(1);
        std::string config_file;  // consumed above; declared so CLI11 accepts it
        std::string mode_str, axis_str;
        double reg_all = 0.0;

        auto add_common = [&](CLI::App* sub) {
            sub->add_option("--config", config_file, "flat JSON config file; flags win");
            sub->add_option("--out-root", cfg.out_root, "root for timestamped run directories");
            sub->add_option("--run-dir", cfg.run_dir, "explicit run directory");
            sub->add_option("--seed", cfg.seed, "master RNG seed");
        };
        auto add_model = [&](CLI::App* sub) {
            sub->add_option("--mode", mode_str, "iafmc or fossil");
            sub->add_option("--d", cfg.d, "latent dimension");
            sub->add_option("--L", cfg.L, "Markov order");
            sub->add_option("--alpha", cfg.alpha, "history-size exponent");
            sub->add_option("--beta", cfg.beta, "association-weight exponent");
            sub->add_option("--window", cfg.window, "association adjacency window");
        };
        std::vector<CLI::Option*> reg_opts;
        CLI::Option* reg_all_opt = nullptr;
        double reg_t, reg_w, reg_b, reg_eta, reg_zeta;
        auto add_train = [&](CLI::App* sub) {
            sub->add_option("--dataset", cfg.dataset, "dataset snapshot path")->required(false);
            sub->add_option("--lambda", cfg.lambda, "learning rate");
            sub->add_option("--epochs", cfg.epochs, "training epochs");
            reg_all_opt = sub->add_option("--reg", reg_all, "set all five regularization weights");
            reg_opts = {sub->add_option("--reg-t", reg_t, "T-factor regularization"),
                        sub->add_option("--reg-w", reg_w, "W-factor regularization"),
                        sub->add_option("--reg-b", reg_b, "bias regularization"),
                        sub->add_option("--reg-eta", reg_eta, "order-weight regularization"),
                        sub->add_option("--reg-zeta", reg_zeta, "self-weight regularization")};
            sub->add_option("--eval-every", cfg.eval_every, "validation cadence in epochs, 0 = off");
            sub->add_option("--monitor-triples", cfg.monitor_triples, "monitoring sample size");
            sub->add_option("--model-selection", cfg.model_selection, "best or final");
        };
        auto add_eval_opts = [&](CLI::App* sub) {
            sub->add_option("--split", cfg.split, "validation or test");
            sub->add_option("--N", cfg.top_ns, "top-N cutoffs")->delimiter(',');
            sub->add_option("--user-len-edges", cfg.user_len_edges,
                            "user train-length bucket upper bounds")->delimiter(',');
            sub->add_option("--item-count-edges", cfg.item_count_edges,
                            "item train-count bucket upper bounds")->delimiter(',');
        };

        CLI::App* prepare = app.add_subcommand("prepare", "filter, index and split raw interactions");
        prepare->add_option("--input", cfg.input, "raw interaction CSV")->required(false);
        prepare->add_option("--min-interactions", cfg.min_interactions,
                            "drop users with fewer interactions");
        prepare->add_option("--columns", cfg.columns,
                            "CSV column layout, e.g. user,item,rating,timestamp");
        prepare->add_option("--window", cfg.window, "association adjacency window");
        add_common(prepare);

        CLI::App* train_cmd = app.add_subcommand("train", "train a model on a prepared dataset");
        add_common(train_cmd);
        add_model(train_cmd);
        add_train(train_cmd);

        CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
        eval_cmd->add_option("--checkpoint", cfg.checkpoint, "model checkpoint path");
        eval_cmd->add_option("--dataset", cfg.dataset, "dataset snapshot path");
        eval_cmd->add_option("--window", cfg.window, "association adjacency window");
        add_eval_opts(eval_cmd);
        add_common(eval_cmd);

        CLI::App* sweep_cmd = app.add_subcommand("sweep", "grid studies over beta, iterations or order");
        sweep_cmd->add_option("--axis", axis_str, "beta, iterations or order");
        sweep_cmd->add_option("--beta-grid", cfg.beta_grid, "beta grid")->delimiter(',');
        sweep_cmd->add_option("--iter-grid", cfg.iter_grid, "iteration checkpoints")->delimiter(',');
        sweep_cmd->add_option("--order-grid", cfg.order_grid, "Markov order grid")->delimiter(',');
        sweep_cmd->add_option("--repeats", cfg.repeats, "seeds per grid point");
        add_common(sweep_cmd);
        add_model(sweep_cmd);
        add_train(sweep_cmd);
        add_eval_opts(sweep_cmd);

        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try {
            app.parse(reversed);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            report_error("config", e.what());
            return exit_config;
        }

        if (!mode_str.empty()) cfg.mode = mode_from_name(mode_str);
        if (!axis_str.empty()) cfg.axis = axis_str;
        if (reg_all_opt && reg_all_opt->count() > 0)
            cfg.reg = {reg_all, reg_all, reg_all, reg_all, reg_all};
        if (!reg_opts.empty()) {
            const double* values[5] = {&reg_t, &reg_w, &reg_b, &reg_eta, &reg_zeta};
            double* targets[5] = {&cfg.reg.alpha_t, &cfg.reg.alpha_w, &cfg.reg.beta_b,
                                  &cfg.reg.beta_eta, &cfg.reg.beta_zeta};
            for (int k = 0; k < 5; ++k)
                if (reg_opts[k]->count() > 0) *targets[k] = *values[k];
        }

        if (app.got_subcommand(prepare)) {
            cfg.subcommand = "prepare";
            return cmd_prepare(cfg);
        }
        if (app.got_subcommand(train_cmd)) {
            cfg.subcommand = "train";
            return cmd_train(cfg);
        }
        if (app.got_subcommand(eval_cmd)) {
            cfg.subcommand = "eval";
            return cmd_eval(cfg);
        }
        cfg.subcommand = "sweep";
        return cmd_sweep(cfg);
    } catch (const ParseError& e) {
        report_error("parse", e.what());
        return exit_parse;
    } catch (const ConfigError& e) {
        report_error("config", e.what());
        return exit_config;
    } catch (const DivergenceError& e) {
        report_error("divergence", e.what());
        return exit_divergence;
    } catch (const LoadError& e) {
        report_error("data", e.what());
        return exit_data;
    } catch (const DataError& e) {
        report_error("data", e.what());
        return exit_data;
    } catch (const std::exception& e) {
        report_error("internal", e.what());
        return exit_internal;
    }
}

}  // namespace iafmc
