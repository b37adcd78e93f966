#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "iafmc/assoc.hpp"
#include "iafmc/dataset.hpp"

namespace iafmc {

// fossil disables the association term: composite vectors reduce to the raw
// item factors and the self weights stay frozen at zeta = 1, zeta_i = 0.
enum class Mode { iafmc, fossil };

const char* mode_name(Mode mode);
Mode mode_from_name(std::string_view name);

// All trainable quantities plus the structural constants d and L.
// Contract: a single writer (the trainer) or any number of concurrent
// readers, never both.
struct ModelParams {
    int n = 0;  // users
    int m = 0;  // items
    int d = 0;  // latent dimension
    int L = 0;  // Markov order
    Mode mode = Mode::iafmc;

    std::vector<double> T;       // m x d row-major, association factors
    std::vector<double> W;       // m x d row-major, history factors
    std::vector<double> b;       // m, item biases
    std::vector<double> eta;     // L, global order weights
    std::vector<double> eta_u;   // n x L row-major, personalized order weights
    double zeta = 1.0;           // global self weight
    std::vector<double> zeta_i;  // m, personalized self weights

    std::span<double> t_row(int i) { return {T.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)}; }
    std::span<const double> t_row(int i) const { return {T.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)}; }
    std::span<double> w_row(int i) { return {W.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)}; }
    std::span<const double> w_row(int i) const { return {W.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)}; }
    double& eta_user(int u, int l) { return eta_u[static_cast<std::size_t>(u) * L + l]; }
    double eta_user(int u, int l) const { return eta_u[static_cast<std::size_t>(u) * L + l]; }

    bool all_finite() const;
};

// T, W ~ iid Normal(0, 0.01^2); biases and order weights zero; zeta = 1,
// zeta_i = 0. Fully determined by the seed.
ModelParams init_params(int n, int m, int d, int L, Mode mode, std::uint64_t seed);

// Scoring context. t is the 1-based target position within the user's train
// prefix; t = train_len + 1 scores the next (unseen) item. When positive, the
// target item train[t-1] is excluded from the history sum.
struct ScoreContext {
    int user = 0;
    int t = 1;
    bool positive = true;
};

ScoreContext next_item_context(const Dataset& ds, int user);

// History vector: |E|^-alpha-normalized sum of W over the user's distinct
// train items E (minus the target when positive), plus the order-weighted
// factors of the last min(L, t-1) items. Zero history contributes nothing.
void user_context_vector(const ModelParams& p, const Dataset& ds, const ScoreContext& ctx,
                         double alpha, std::span<double> out);

// Composite item vector: degree^-beta-normalized weighted sum of neighbor
// factors plus (zeta + zeta_i) * T_i. Items without neighbors fall back to the
// self term alone. In fossil mode this is exactly T_i.
void composite_item_vector(const ModelParams& p, const AssociationGraph& g, int item,
                           double beta, std::span<double> out);

double predict_score(const ModelParams& p, const Dataset& ds, const AssociationGraph& g,
                     const ScoreContext& ctx, int item, double alpha, double beta);

// Ranks all items outside the user's train-prefix item set by descending
// score, ties broken by ascending item index. Returns at most top_n items.
std::vector<int> rank_top_n(const ModelParams& p, const Dataset& ds, const AssociationGraph& g,
                            int user, int top_n, double alpha, double beta);

// fossil: 2md + m + (1+n)L; iafmc adds m + 1 on top.
std::int64_t param_count(std::int64_t n, std::int64_t m, std::int64_t d, std::int64_t L, Mode mode);

struct Checkpoint {
    ModelParams params;
    double alpha = 0.2;
    double beta = 0.2;
};

// Versioned little-endian binary container; round trip is bit-exact.
void save_checkpoint(const ModelParams& p, double alpha, double beta, std::ostream& out);
Checkpoint load_checkpoint(std::istream& in);

}  // namespace iafmc
