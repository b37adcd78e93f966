#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <unordered_map>
#include <utility>
#include <vector>

#include "iafmc/model.hpp"

namespace iafmc {

struct RegWeights {
    double alpha_t = 0.01;    // T factors
    double alpha_w = 0.01;    // W factors
    double beta_b = 0.01;     // item biases
    double beta_eta = 0.01;   // order weights
    double beta_zeta = 0.01;  // self weights
};

struct TrainConfig {
    double lambda = 0.01;  // learning rate; zero makes every step a no-op
    RegWeights reg;
    double alpha = 0.2;  // history-size exponent
    double beta = 0.2;   // association-weight exponent, in [0, 1]
    int epochs = 100;
    std::uint64_t seed = 42;
    int eval_every = 10;        // validation cadence in epochs; 0 disables
    int monitor_triples = 1024; // fixed triples for the per-epoch loss diagnostic

    void validate() const;  // throws ConfigError
};

// Sparse gradient of one triple's loss. Keys only cover parameters that
// participate in the triple; eta/eta_u hold the active orders.
struct TripleGradient {
    int pos_item = -1;
    int neg_item = -1;
    double b_pos = 0.0;
    double b_neg = 0.0;
    std::unordered_map<int, std::vector<double>> t;
    std::unordered_map<int, std::vector<double>> w;
    std::vector<double> eta;
    std::vector<double> eta_u;
    double zeta = 0.0;      // unused in fossil mode
    double zeta_pos = 0.0;
    double zeta_neg = 0.0;
};

// Pairwise loss of the triple (u, train[t-1], neg_item): softplus of the
// negated score margin plus the L2 terms of every parameter the triple
// touches. Throws std::invalid_argument when neg_item lies in u's train set.
double triple_loss(const ModelParams& p, const Dataset& ds, const AssociationGraph& g,
                   int user, int t, int neg_item, const TrainConfig& cfg);

// Analytic gradient of triple_loss for every participating parameter.
TripleGradient compute_gradients(const ModelParams& p, const Dataset& ds,
                                 const AssociationGraph& g, int user, int t, int neg_item,
                                 const TrainConfig& cfg);

// theta -= lambda * grad for every entry of the gradient.
void apply_gradients(ModelParams& p, const TripleGradient& grad, int user, double lambda);

// Seed-determined uniform permutation of all eligible (user, t) pairs,
// t in [2, train_len].
std::vector<std::pair<int, int>> sample_positive_order(const Dataset& ds, std::uint64_t epoch_seed);

// Uniform draw from the items outside u's train-prefix item set.
int sample_negative(const Dataset& ds, int user, std::mt19937_64& rng);

struct EpochLog {
    int epoch = 0;
    double mean_monitor_loss = 0.0;
    std::optional<double> val_recall10;
    double wall_seconds = 0.0;
};

using ValidationHook = std::function<double(const ModelParams&)>;
using EpochHook = std::function<void(const EpochLog&, const ModelParams&)>;

struct TrainResult {
    ModelParams params;        // best-validation snapshot; the final state when validation never ran
    ModelParams final_params;  // state after the last epoch
    int best_epoch = 0;
    std::optional<double> best_val_recall;
    std::vector<EpochLog> log;
};

// Plain SGD over Eq-style pairwise triples: per epoch, walk a fresh
// permutation of the positives, draw one negative each, update immediately.
// `validate` (when given, on the eval_every cadence) returns validation
// Recall@10 for model selection. Throws DivergenceError if an epoch leaves a
// non-finite parameter.
TrainResult train(ModelParams params, const Dataset& ds, const AssociationGraph& g,
                  const TrainConfig& cfg, const ValidationHook& validate = {},
                  const EpochHook& on_epoch = {});

}  // namespace iafmc
