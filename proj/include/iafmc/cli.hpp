#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iafmc/evaluator.hpp"
#include "iafmc/trainer.hpp"

namespace iafmc {

// Exit codes emitted by run_cli.
enum ExitCode : int {
    exit_ok = 0,
    exit_internal = 1,
    exit_parse = 2,
    exit_config = 3,
    exit_data = 4,
    exit_divergence = 5,
};

// Effective configuration of one run. Defaults follow the reference setup:
// d=20, lambda=0.01, 100 epochs, regularization 0.01, L=3, alpha=0.2,
// beta=0.2. A flat JSON config file may seed any field; explicit flags win.
struct RunConfig {
    std::string subcommand;

    std::string input;       // prepare: raw interaction CSV
    std::string dataset;     // dataset snapshot path
    std::string checkpoint;  // eval: model checkpoint path
    std::string out_root;    // run directories live here (default: $IAFMC_OUT_ROOT or ./runs)
    std::string run_dir;     // explicit run directory; overrides out_root + timestamp
    std::string columns;     // prepare: column mapping, empty = user,item[,rating],timestamp

    int min_interactions = 5;
    int window = 1;

    Mode mode = Mode::iafmc;
    int d = 20;
    int L = 3;
    double lambda = 0.01;
    RegWeights reg;
    double alpha = 0.2;
    double beta = 0.2;
    int epochs = 100;
    std::uint64_t seed = 42;
    int eval_every = 10;
    int monitor_triples = 1024;
    std::string model_selection = "best";  // "best" (validation Recall@10) or "final"

    std::string split = "test";
    std::vector<int> top_ns{5, 10};
    std::vector<std::int64_t> user_len_edges{7, 20};
    std::vector<std::int64_t> item_count_edges{3, 10};

    std::string axis = "beta";  // sweep axis: beta | iterations | order
    std::vector<double> beta_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<int> iter_grid{25, 50, 100, 200, 300, 500};
    std::vector<int> order_grid{1, 2, 3};
    int repeats = 3;

    void validate() const;  // throws ConfigError
};

std::string run_config_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text, RunConfig base = {});

// Resolved run directory (created on demand): run_dir when set, otherwise a
// timestamped directory under out_root.
std::string make_run_dir(const RunConfig& cfg);

int cmd_prepare(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);

// Full command-line entry point; args exclude argv[0]. Returns the process
// exit code and reports failures as one JSON line on stderr.
int run_cli(const std::vector<std::string>& args);

}  // namespace iafmc
