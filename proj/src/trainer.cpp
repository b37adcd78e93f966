#include "iafmc/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "iafmc/errors.hpp"
#include "iafmc/vecops.hpp"

namespace iafmc {

namespace {

double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

// ln(1 + e^x) without overflow.
double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sq_norm(std::span<const double> v) {
    return dot(v, v);
}

// Everything both triple_loss and compute_gradients need: forward vectors,
// scores, normalizers and the regularization occurrence counts. The
// occurrence maps count how often each factor's squared norm enters the
// per-triple regularizer, so loss and gradient cannot drift apart.
struct TripleParts {
    int pos_item = -1;
    int orders = 0;                 // active Markov orders, min(L, t-1)
    std::vector<int> predecessors;  // items at positions t-1 .. t-orders
    double c_pos = 0.0;             // history normalizer, positive side
    double c_neg = 0.0;             // history normalizer, negative side
    double inv_pos = 0.0;           // association normalizer of the positive item
    double inv_neg = 0.0;           // association normalizer of the negative item
    std::vector<double> u_pos, u_neg, v_pos, v_neg;
    double r_pos = 0.0, r_neg = 0.0;
    double sig = 0.0;  // sigmoid(r_neg - r_pos), shared by all gradients
    std::unordered_map<int, int> t_occ, w_occ;
};

TripleParts build_parts(const ModelParams& p, const Dataset& ds, const AssociationGraph& g,
                        int user, int t, int neg_item, const TrainConfig& cfg) {
    const auto prefix = ds.train_prefix(user);
    const int train_len = static_cast<int>(prefix.size());
    if (t < 2 || t > train_len)
        throw std::invalid_argument("target position must lie in [2, train_len]");
    if (neg_item < 0 || neg_item >= p.m)
        throw std::invalid_argument("negative item index out of range");
    if (ds.in_train(user, neg_item))
        throw std::invalid_argument("negative item occurs in the user's train prefix");

    TripleParts parts;
    parts.pos_item = prefix[t - 1];
    parts.orders = std::min(p.L, t - 1);
    for (int l = 1; l <= parts.orders; ++l) parts.predecessors.push_back(prefix[t - 1 - l]);

    const auto& hist = ds.train_items(user);
    const std::size_t pos_count = hist.size() - 1;  // target excluded
    parts.c_pos = pos_count > 0 ? 1.0 / std::pow(static_cast<double>(pos_count), cfg.alpha) : 0.0;
    parts.c_neg = 1.0 / std::pow(static_cast<double>(hist.size()), cfg.alpha);

    parts.u_pos.resize(p.d);
    parts.u_neg.resize(p.d);
    user_context_vector(p, ds, {user, t, true}, cfg.alpha, parts.u_pos);
    user_context_vector(p, ds, {user, t, false}, cfg.alpha, parts.u_neg);

    parts.v_pos.resize(p.d);
    parts.v_neg.resize(p.d);
    composite_item_vector(p, g, parts.pos_item, cfg.beta, parts.v_pos);
    composite_item_vector(p, g, neg_item, cfg.beta, parts.v_neg);

    parts.r_pos = p.b[parts.pos_item] + dot(parts.u_pos, parts.v_pos);
    parts.r_neg = p.b[neg_item] + dot(parts.u_neg, parts.v_neg);
    parts.sig = sigmoid(parts.r_neg - parts.r_pos);

    if (p.mode == Mode::iafmc) {
        const auto pos_neigh = g.neighbors(parts.pos_item);
        const auto neg_neigh = g.neighbors(neg_item);
        parts.inv_pos = pos_neigh.empty()
                            ? 0.0
                            : 1.0 / std::pow(static_cast<double>(g.degree_weight(parts.pos_item)), cfg.beta);
        parts.inv_neg = neg_neigh.empty()
                            ? 0.0
                            : 1.0 / std::pow(static_cast<double>(g.degree_weight(neg_item)), cfg.beta);
        for (const auto& [other, w] : pos_neigh) ++parts.t_occ[other];
        for (const auto& [other, w] : neg_neigh) ++parts.t_occ[other];
    }
    ++parts.t_occ[parts.pos_item];
    ++parts.t_occ[neg_item];

    for (int item : hist) ++parts.w_occ[item];
    for (int prev : parts.predecessors) ++parts.w_occ[prev];

    return parts;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("learning rate must be nonnegative");
    if (reg.alpha_t < 0 || reg.alpha_w < 0 || reg.beta_b < 0 || reg.beta_eta < 0 || reg.beta_zeta < 0)
        throw ConfigError("regularization weights must be nonnegative");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
    if (!std::isfinite(alpha)) throw ConfigError("alpha must be finite");
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (eval_every < 0) throw ConfigError("eval_every must be nonnegative");
    if (monitor_triples < 0) throw ConfigError("monitor_triples must be nonnegative");
}

double triple_loss(const ModelParams& p, const Dataset& ds, const AssociationGraph& g,
                   int user, int t, int neg_item, const TrainConfig& cfg) {
    const TripleParts parts = build_parts(p, ds, g, user, t, neg_item, cfg);

    double loss = softplus(parts.r_neg - parts.r_pos);  // -ln sigmoid(r_pos - r_neg)

    for (const auto& [item, occ] : parts.t_occ)
        loss += 0.5 * cfg.reg.alpha_t * occ * sq_norm(p.t_row(item));
    for (const auto& [item, occ] : parts.w_occ)
        loss += 0.5 * cfg.reg.alpha_w * occ * sq_norm(p.w_row(item));
    loss += 0.5 * cfg.reg.beta_b * (p.b[parts.pos_item] * p.b[parts.pos_item] +
                                    p.b[neg_item] * p.b[neg_item]);
    for (int l = 0; l < parts.orders; ++l) {
        loss += 0.5 * cfg.reg.beta_eta * p.eta[l] * p.eta[l];
        const double eu = p.eta_user(user, l);
        loss += 0.5 * cfg.reg.beta_eta * eu * eu;
    }
    if (p.mode == Mode::iafmc) {
        loss += 0.5 * cfg.reg.beta_zeta *
                (p.zeta * p.zeta + p.zeta_i[parts.pos_item] * p.zeta_i[parts.pos_item] +
                 p.zeta_i[neg_item] * p.zeta_i[neg_item]);
    }
    return loss;
}

TripleGradient compute_gradients(const ModelParams& p, const Dataset& ds,
                                 const AssociationGraph& g, int user, int t, int neg_item,
                                 const TrainConfig& cfg) {
    const TripleParts parts = build_parts(p, ds, g, user, t, neg_item, cfg);
    const double s = parts.sig;
    const int pos = parts.pos_item;

    TripleGradient gr;
    gr.pos_item = pos;
    gr.neg_item = neg_item;
    gr.b_pos = cfg.reg.beta_b * p.b[pos] - s;
    gr.b_neg = cfg.reg.beta_b * p.b[neg_item] + s;

    auto grad_row = [d = p.d](std::unordered_map<int, std::vector<double>>& map, int item)
        -> std::span<double> {
        auto& v = map[item];
        if (v.empty()) v.assign(d, 0.0);
        return v;
    };

    // History factors: every distinct train item feeds both context vectors
    // (the target only the negative one); predecessors add the order terms.
    for (int item : ds.train_items(user)) {
        auto gw = grad_row(gr.w, item);
        if (item != pos) axpy(-s * parts.c_pos, parts.v_pos, gw);
        axpy(s * parts.c_neg, parts.v_neg, gw);
    }
    for (int l = 0; l < parts.orders; ++l) {
        const int prev = parts.predecessors[l];
        const double coef = p.eta[l] + p.eta_user(user, l);
        auto gw = grad_row(gr.w, prev);
        for (int k = 0; k < p.d; ++k) gw[k] += -s * coef * (parts.v_pos[k] - parts.v_neg[k]);
    }

    gr.eta.resize(parts.orders);
    gr.eta_u.resize(parts.orders);
    for (int l = 0; l < parts.orders; ++l) {
        const auto w_prev = p.w_row(parts.predecessors[l]);
        double margin = 0.0;
        for (int k = 0; k < p.d; ++k) margin += w_prev[k] * (parts.v_pos[k] - parts.v_neg[k]);
        gr.eta[l] = cfg.reg.beta_eta * p.eta[l] - s * margin;
        gr.eta_u[l] = cfg.reg.beta_eta * p.eta_user(user, l) - s * margin;
    }

    if (p.mode == Mode::iafmc) {
        for (const auto& [other, w] : g.neighbors(pos))
            axpy(-s * parts.inv_pos * static_cast<double>(w), parts.u_pos, grad_row(gr.t, other));
        for (const auto& [other, w] : g.neighbors(neg_item))
            axpy(s * parts.inv_neg * static_cast<double>(w), parts.u_neg, grad_row(gr.t, other));
        axpy(-s * (p.zeta + p.zeta_i[pos]), parts.u_pos, grad_row(gr.t, pos));
        axpy(s * (p.zeta + p.zeta_i[neg_item]), parts.u_neg, grad_row(gr.t, neg_item));

        const double up_t = dot(parts.u_pos, p.t_row(pos));
        const double un_t = dot(parts.u_neg, p.t_row(neg_item));
        gr.zeta = cfg.reg.beta_zeta * p.zeta - s * (up_t - un_t);
        gr.zeta_pos = cfg.reg.beta_zeta * p.zeta_i[pos] - s * up_t;
        gr.zeta_neg = cfg.reg.beta_zeta * p.zeta_i[neg_item] + s * un_t;
    } else {
        axpy(-s, parts.u_pos, grad_row(gr.t, pos));
        axpy(s, parts.u_neg, grad_row(gr.t, neg_item));
    }

    for (const auto& [item, occ] : parts.t_occ)
        axpy(cfg.reg.alpha_t * occ, p.t_row(item), grad_row(gr.t, item));
    for (const auto& [item, occ] : parts.w_occ)
        axpy(cfg.reg.alpha_w * occ, p.w_row(item), grad_row(gr.w, item));

    return gr;
}

void apply_gradients(ModelParams& p, const TripleGradient& grad, int user, double lambda) {
    p.b[grad.pos_item] -= lambda * grad.b_pos;
    p.b[grad.neg_item] -= lambda * grad.b_neg;
    for (const auto& [item, gv] : grad.t) {
        auto row = p.t_row(item);
        for (int k = 0; k < p.d; ++k) row[k] -= lambda * gv[k];
    }
    for (const auto& [item, gv] : grad.w) {
        auto row = p.w_row(item);
        for (int k = 0; k < p.d; ++k) row[k] -= lambda * gv[k];
    }
    for (std::size_t l = 0; l < grad.eta.size(); ++l) {
        p.eta[l] -= lambda * grad.eta[l];
        p.eta_user(user, static_cast<int>(l)) -= lambda * grad.eta_u[l];
    }
    if (p.mode == Mode::iafmc) {
        p.zeta -= lambda * grad.zeta;
        p.zeta_i[grad.pos_item] -= lambda * grad.zeta_pos;
        p.zeta_i[grad.neg_item] -= lambda * grad.zeta_neg;
    }
}

std::vector<std::pair<int, int>> sample_positive_order(const Dataset& ds, std::uint64_t epoch_seed) {
    std::vector<std::pair<int, int>> order;
    for (int u = 0; u < ds.user_count(); ++u)
        for (int t = 2; t <= ds.train_len(u); ++t) order.emplace_back(u, t);
    std::mt19937_64 rng(epoch_seed);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

int sample_negative(const Dataset& ds, int user, std::mt19937_64& rng) {
    const auto& hist = ds.train_items(user);
    const int m = ds.item_count();
    if (static_cast<int>(hist.size()) >= m)
        throw DataError("user " + std::to_string(user) + " has interacted with every item");
    std::uniform_int_distribution<int> pick(0, m - 1);
    while (true) {
        const int item = pick(rng);
        if (!std::binary_search(hist.begin(), hist.end(), item)) return item;
    }
}

TrainResult train(ModelParams params, const Dataset& ds, const AssociationGraph& g,
                  const TrainConfig& cfg, const ValidationHook& validate,
                  const EpochHook& on_epoch) {
    cfg.validate();
    if (params.n != ds.user_count() || params.m != ds.item_count())
        throw ConfigError("model shape does not match the dataset");
    if (g.item_count() != params.m)
        throw ConfigError("association graph does not match the dataset");

    std::mt19937_64 master(cfg.seed);

    // Fixed monitoring triples, drawn once.
    struct MonitorTriple {
        int user, t, neg;
    };
    std::vector<MonitorTriple> monitor;
    {
        auto eligible = sample_positive_order(ds, master());
        std::mt19937_64 neg_rng(master());
        const std::size_t count =
            std::min<std::size_t>(static_cast<std::size_t>(cfg.monitor_triples), eligible.size());
        monitor.reserve(count);
        for (std::size_t k = 0; k < count; ++k) {
            const auto [u, t] = eligible[k];
            monitor.push_back({u, t, sample_negative(ds, u, neg_rng)});
        }
    }

    TrainResult result;
    result.best_epoch = 0;

    ModelParams best;
    bool have_best = false;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::uint64_t perm_seed = master();
        std::mt19937_64 neg_rng(master());

        for (const auto& [u, t] : sample_positive_order(ds, perm_seed)) {
            const int j = sample_negative(ds, u, neg_rng);
            const TripleGradient gr = compute_gradients(params, ds, g, u, t, j, cfg);
            apply_gradients(params, gr, u, cfg.lambda);
        }

        if (!params.all_finite())
            throw DivergenceError("non-finite parameter after epoch " + std::to_string(epoch), epoch);

        EpochLog row;
        row.epoch = epoch;
        double loss_sum = 0.0;
        for (const auto& mt : monitor) loss_sum += triple_loss(params, ds, g, mt.user, mt.t, mt.neg, cfg);
        row.mean_monitor_loss = monitor.empty() ? 0.0 : loss_sum / static_cast<double>(monitor.size());

        if (validate && cfg.eval_every > 0 && epoch % cfg.eval_every == 0) {
            row.val_recall10 = validate(params);
            if (!result.best_val_recall || *row.val_recall10 > *result.best_val_recall) {
                result.best_val_recall = row.val_recall10;
                result.best_epoch = epoch;
                best = params;
                have_best = true;
            }
        }

        row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.push_back(row);
        if (on_epoch) on_epoch(row, params);
    }

    result.final_params = params;
    if (have_best) {
        result.params = std::move(best);
    } else {
        result.params = std::move(params);
        result.best_epoch = cfg.epochs;
    }
    return result;
}

}  // namespace iafmc
