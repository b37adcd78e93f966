#include "iafmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

#include "iafmc/errors.hpp"
#include "iafmc/vecops.hpp"

namespace iafmc {

namespace {

constexpr char checkpoint_magic[8] = {'I', 'A', 'F', 'M', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t checkpoint_version = 1;

template <class T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void read_pod(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw LoadError("checkpoint truncated");
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::istream& in, std::vector<double>& v, std::size_t count) {
    v.resize(count);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw LoadError("checkpoint truncated");
}

bool finite_all(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

const char* mode_name(Mode mode) {
    return mode == Mode::iafmc ? "iafmc" : "fossil";
}

Mode mode_from_name(std::string_view name) {
    if (name == "iafmc") return Mode::iafmc;
    if (name == "fossil") return Mode::fossil;
    throw ConfigError("unknown mode '" + std::string(name) + "' (expected iafmc or fossil)");
}

bool ModelParams::all_finite() const {
    return finite_all(T) && finite_all(W) && finite_all(b) && finite_all(eta) &&
           finite_all(eta_u) && std::isfinite(zeta) && finite_all(zeta_i);
}

ModelParams init_params(int n, int m, int d, int L, Mode mode, std::uint64_t seed) {
    if (n < 1 || m < 1 || d < 1 || L < 1)
        throw std::invalid_argument("model dimensions must be positive");
    ModelParams p;
    p.n = n;
    p.m = m;
    p.d = d;
    p.L = L;
    p.mode = mode;
    p.T.resize(static_cast<std::size_t>(m) * d);
    p.W.resize(static_cast<std::size_t>(m) * d);
    p.b.assign(m, 0.0);
    p.eta.assign(L, 0.0);
    p.eta_u.assign(static_cast<std::size_t>(n) * L, 0.0);
    p.zeta = 1.0;
    p.zeta_i.assign(m, 0.0);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.01);
    for (auto& x : p.T) x = noise(rng);
    for (auto& x : p.W) x = noise(rng);
    return p;
}

ScoreContext next_item_context(const Dataset& ds, int user) {
    return {user, ds.train_len(user) + 1, false};
}

void user_context_vector(const ModelParams& p, const Dataset& ds, const ScoreContext& ctx,
                         double alpha, std::span<double> out) {
    const auto prefix = ds.train_prefix(ctx.user);
    const int train_len = static_cast<int>(prefix.size());
    if (ctx.t < 2 || ctx.t > train_len + 1)
        throw std::invalid_argument("context position out of range");
    if (ctx.positive && ctx.t > train_len)
        throw std::invalid_argument("positive context must point inside the train prefix");

    std::fill(out.begin(), out.end(), 0.0);

    const auto& hist = ds.train_items(ctx.user);
    const int exclude = ctx.positive ? prefix[ctx.t - 1] : -1;
    const std::size_t count = hist.size() - (ctx.positive ? 1 : 0);
    if (count > 0) {
        for (int item : hist) {
            if (item == exclude) continue;
            axpy(1.0, p.w_row(item), out);
        }
        const double inv = 1.0 / std::pow(static_cast<double>(count), alpha);
        scale(inv, out);
    }

    const int orders = std::min(p.L, ctx.t - 1);
    for (int l = 1; l <= orders; ++l) {
        const int prev = prefix[ctx.t - 1 - l];
        axpy(p.eta[l - 1] + p.eta_user(ctx.user, l - 1), p.w_row(prev), out);
    }
}

void composite_item_vector(const ModelParams& p, const AssociationGraph& g, int item,
                           double beta, std::span<double> out) {
    if (item < 0 || item >= p.m) throw std::out_of_range("item index out of range");
    const auto t_i = p.t_row(item);

    if (p.mode == Mode::fossil) {
        std::copy(t_i.begin(), t_i.end(), out.begin());
        return;
    }

    std::fill(out.begin(), out.end(), 0.0);
    const auto neigh = g.neighbors(item);
    if (!neigh.empty()) {
        for (const auto& [other, weight] : neigh)
            axpy(static_cast<double>(weight), p.t_row(other), out);
        const double inv = 1.0 / std::pow(static_cast<double>(g.degree_weight(item)), beta);
        scale(inv, out);
    }
    axpy(p.zeta + p.zeta_i[item], t_i, out);
}

double predict_score(const ModelParams& p, const Dataset& ds, const AssociationGraph& g,
                     const ScoreContext& ctx, int item, double alpha, double beta) {
    std::vector<double> u(p.d), v(p.d);
    user_context_vector(p, ds, ctx, alpha, u);
    composite_item_vector(p, g, item, beta, v);
    return p.b[item] + dot(u, v);
}

std::vector<int> rank_top_n(const ModelParams& p, const Dataset& ds, const AssociationGraph& g,
                            int user, int top_n, double alpha, double beta) {
    if (top_n < 1) throw std::invalid_argument("top_n must be positive");
    const ScoreContext ctx = next_item_context(ds, user);
    std::vector<double> u(p.d), v(p.d);
    user_context_vector(p, ds, ctx, alpha, u);

    std::vector<std::pair<double, int>> scored;
    scored.reserve(p.m);
    for (int item = 0; item < p.m; ++item) {
        if (ds.in_train(user, item)) continue;
        composite_item_vector(p, g, item, beta, v);
        scored.emplace_back(p.b[item] + dot(u, v), item);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (static_cast<int>(scored.size()) > top_n) scored.resize(top_n);

    std::vector<int> out;
    out.reserve(scored.size());
    for (const auto& [score, item] : scored) out.push_back(item);
    return out;
}

std::int64_t param_count(std::int64_t n, std::int64_t m, std::int64_t d, std::int64_t L, Mode mode) {
    if (n < 1 || m < 1 || d < 1 || L < 1)
        throw std::invalid_argument("model dimensions must be positive");
    const std::int64_t fossil = 2 * m * d + m + (1 + n) * L;
    return mode == Mode::fossil ? fossil : fossil + m + 1;
}

void save_checkpoint(const ModelParams& p, double alpha, double beta, std::ostream& out) {
    out.write(checkpoint_magic, sizeof(checkpoint_magic));
    write_pod(out, checkpoint_version);
    write_pod(out, static_cast<std::uint32_t>(p.mode));
    write_pod(out, static_cast<std::int64_t>(p.n));
    write_pod(out, static_cast<std::int64_t>(p.m));
    write_pod(out, static_cast<std::int64_t>(p.d));
    write_pod(out, static_cast<std::int64_t>(p.L));
    write_pod(out, alpha);
    write_pod(out, beta);
    write_pod(out, p.zeta);
    write_doubles(out, p.T);
    write_doubles(out, p.W);
    write_doubles(out, p.b);
    write_doubles(out, p.eta);
    write_doubles(out, p.eta_u);
    write_doubles(out, p.zeta_i);
    if (!out) throw DataError("failed to write checkpoint");
}

Checkpoint load_checkpoint(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, checkpoint_magic, sizeof(magic)) != 0)
        throw LoadError("not a model checkpoint");
    std::uint32_t version = 0;
    read_pod(in, version);
    if (version != checkpoint_version) throw LoadError("unsupported checkpoint version");

    std::uint32_t mode_raw = 0;
    read_pod(in, mode_raw);
    if (mode_raw > 1) throw LoadError("invalid mode in checkpoint");

    std::int64_t n = 0, m = 0, d = 0, L = 0;
    read_pod(in, n);
    read_pod(in, m);
    read_pod(in, d);
    read_pod(in, L);
    if (n < 1 || m < 1 || d < 1 || L < 1) throw LoadError("invalid dimensions in checkpoint");

    Checkpoint ck;
    ck.params.n = static_cast<int>(n);
    ck.params.m = static_cast<int>(m);
    ck.params.d = static_cast<int>(d);
    ck.params.L = static_cast<int>(L);
    ck.params.mode = static_cast<Mode>(mode_raw);
    read_pod(in, ck.alpha);
    read_pod(in, ck.beta);
    read_pod(in, ck.params.zeta);
    read_doubles(in, ck.params.T, static_cast<std::size_t>(m) * d);
    read_doubles(in, ck.params.W, static_cast<std::size_t>(m) * d);
    read_doubles(in, ck.params.b, static_cast<std::size_t>(m));
    read_doubles(in, ck.params.eta, static_cast<std::size_t>(L));
    read_doubles(in, ck.params.eta_u, static_cast<std::size_t>(n) * L);
    read_doubles(in, ck.params.zeta_i, static_cast<std::size_t>(m));
    if (!ck.params.all_finite() || !std::isfinite(ck.alpha) || !std::isfinite(ck.beta))
        throw LoadError("non-finite values in checkpoint");
    return ck;
}

}  // namespace iafmc
