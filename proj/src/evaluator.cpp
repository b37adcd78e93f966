#include "iafmc/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "iafmc/errors.hpp"
#include "iafmc/vecops.hpp"

namespace iafmc {

namespace {

std::string fmt_double(double v, const char* spec = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// Bucket index for a value given inclusive upper edges; the last bucket is
// open-ended.
std::size_t bucket_index(std::int64_t value, std::span<const std::int64_t> edges) {
    for (std::size_t k = 0; k < edges.size(); ++k)
        if (value <= edges[k]) return k;
    return edges.size();
}

void check_edges(std::span<const std::int64_t> edges) {
    for (std::size_t k = 1; k < edges.size(); ++k)
        if (edges[k] <= edges[k - 1]) throw ConfigError("bucket edges must be strictly increasing");
}

}  // namespace

const char* split_name(Split s) {
    return s == Split::validation ? "validation" : "test";
}

Split split_from_name(std::string_view name) {
    if (name == "validation") return Split::validation;
    if (name == "test") return Split::test;
    throw ConfigError("unknown split '" + std::string(name) + "' (expected validation or test)");
}

double recall_at_n(std::span<const std::optional<int>> hit_ranks, int n) {
    if (hit_ranks.empty()) throw std::invalid_argument("no users to evaluate");
    double hits = 0.0;
    for (const auto& r : hit_ranks)
        if (r && *r <= n) hits += 1.0;
    return hits / static_cast<double>(hit_ranks.size());
}

double ndcg_at_n(std::span<const std::optional<int>> hit_ranks, int n) {
    if (hit_ranks.empty()) throw std::invalid_argument("no users to evaluate");
    double sum = 0.0;
    for (const auto& r : hit_ranks)
        if (r && *r <= n) sum += 1.0 / std::log2(static_cast<double>(*r) + 1.0);
    return sum / static_cast<double>(hit_ranks.size());
}

std::vector<BucketStat> group_by_value(std::span<const std::optional<int>> hit_ranks,
                                       std::span<const std::int64_t> values,
                                       std::span<const std::int64_t> edges) {
    if (values.size() != hit_ranks.size())
        throw std::invalid_argument("values and hit_ranks must have equal length");
    check_edges(edges);

    const std::size_t buckets = edges.size() + 1;
    std::vector<int> sizes(buckets, 0);
    std::vector<double> hits(buckets, 0.0);
    for (std::size_t k = 0; k < values.size(); ++k) {
        const std::size_t idx = bucket_index(values[k], edges);
        ++sizes[idx];
        if (hit_ranks[k] && *hit_ranks[k] <= 10) hits[idx] += 1.0;
    }

    std::vector<BucketStat> out(buckets);
    for (std::size_t k = 0; k < buckets; ++k) {
        out[k].lo = k == 0 ? 0 : edges[k - 1] + 1;
        if (k < edges.size()) out[k].hi = edges[k];
        out[k].size = sizes[k];
        if (sizes[k] > 0) out[k].recall_at_10 = hits[k] / static_cast<double>(sizes[k]);
    }
    return out;
}

EvalReport evaluate_split(const ModelParams& p, const Dataset& ds, const AssociationGraph& g,
                          Split split, std::span<const int> ns, double alpha, double beta,
                          const GroupingConfig& grouping) {
    if (ns.empty()) throw std::invalid_argument("no N values given");
    check_edges(grouping.user_len_edges);
    check_edges(grouping.item_count_edges);

    const int n_users = ds.user_count();
    const int m = ds.item_count();

    // Composite vectors once per item; candidate scoring reuses them.
    std::vector<double> vmat(static_cast<std::size_t>(m) * p.d);
    for (int i = 0; i < m; ++i)
        composite_item_vector(p, g, i, beta, {vmat.data() + static_cast<std::size_t>(i) * p.d,
                                              static_cast<std::size_t>(p.d)});
    auto v_row = [&](int i) {
        return std::span<const double>(vmat.data() + static_cast<std::size_t>(i) * p.d,
                                       static_cast<std::size_t>(p.d));
    };

    // Train interaction counts per item, for the popularity grouping.
    std::vector<std::int64_t> item_train_count(m, 0);
    for (int u = 0; u < n_users; ++u)
        for (int item : ds.train_prefix(u)) ++item_train_count[item];

    EvalReport report;
    report.split = split;
    report.ns.assign(ns.begin(), ns.end());
    report.hit_ranks.reserve(n_users);

    std::vector<std::int64_t> user_lens, target_counts;
    user_lens.reserve(n_users);
    target_counts.reserve(n_users);

    std::vector<double> u_vec(p.d);
    for (int u = 0; u < n_users; ++u) {
        const int target = split == Split::validation ? ds.validation_item(u) : ds.test_item(u);
        if (target < 0 || target >= m) {
            ++report.skipped_users;
            continue;
        }
        user_lens.push_back(ds.train_len(u));
        target_counts.push_back(item_train_count[target]);

        if (ds.in_train(u, target)) {
            report.hit_ranks.emplace_back(std::nullopt);  // target not rankable
            continue;
        }

        user_context_vector(p, ds, next_item_context(ds, u), alpha, u_vec);
        const double target_score = p.b[target] + dot(u_vec, v_row(target));
        int rank = 1;
        for (int c = 0; c < m; ++c) {
            if (c == target || ds.in_train(u, c)) continue;
            const double score = p.b[c] + dot(u_vec, v_row(c));
            if (score > target_score || (score == target_score && c < target)) ++rank;
        }
        report.hit_ranks.emplace_back(rank);
    }

    if (report.hit_ranks.empty()) throw DataError("no evaluable users in the split");

    for (int n_at : report.ns) {
        report.recall[n_at] = recall_at_n(report.hit_ranks, n_at);
        report.ndcg[n_at] = ndcg_at_n(report.hit_ranks, n_at);
    }
    report.user_buckets = group_by_value(report.hit_ranks, user_lens, grouping.user_len_edges);
    report.item_buckets = group_by_value(report.hit_ranks, target_counts, grouping.item_count_edges);
    return report;
}

std::string report_json(const EvalReport& r) {
    nlohmann::json j;
    j["split"] = split_name(r.split);
    j["users"] = r.hit_ranks.size();
    j["skipped_users"] = r.skipped_users;
    for (const auto& [n_at, v] : r.recall) j["recall"][std::to_string(n_at)] = v;
    for (const auto& [n_at, v] : r.ndcg) j["ndcg"][std::to_string(n_at)] = v;

    auto bucket_json = [](const BucketStat& b, bool permille) {
        nlohmann::json bj;
        bj["lo"] = b.lo;
        if (b.hi) bj["hi"] = *b.hi; else bj["hi"] = nullptr;
        bj["size"] = b.size;
        if (b.recall_at_10) {
            bj["recall_at_10"] = *b.recall_at_10;
            if (permille) bj["recall_at_10_permille"] = *b.recall_at_10 * 1000.0;
        } else {
            bj["recall_at_10"] = nullptr;
            if (permille) bj["recall_at_10_permille"] = nullptr;
        }
        return bj;
    };
    j["user_length_buckets"] = nlohmann::json::array();
    for (const auto& b : r.user_buckets) j["user_length_buckets"].push_back(bucket_json(b, false));
    j["item_count_buckets"] = nlohmann::json::array();
    for (const auto& b : r.item_buckets) j["item_count_buckets"].push_back(bucket_json(b, true));

    j["hit_ranks"] = nlohmann::json::array();
    for (const auto& hr : r.hit_ranks) {
        if (hr) j["hit_ranks"].push_back(*hr); else j["hit_ranks"].push_back(nullptr);
    }
    return j.dump(2) + "\n";
}

std::string report_text(const EvalReport& r) {
    std::string out;
    out += "split: ";
    out += split_name(r.split);
    out += "\nusers: " + std::to_string(r.hit_ranks.size());
    if (r.skipped_users > 0) out += " (skipped " + std::to_string(r.skipped_users) + ")";
    out += "\n\n  N    recall      ndcg\n";
    for (int n_at : r.ns) {
        char line[96];
        std::snprintf(line, sizeof(line), "%3d    %.6f    %.6f\n", n_at, r.recall.at(n_at),
                      r.ndcg.at(n_at));
        out += line;
    }

    auto bucket_label = [](const BucketStat& b) {
        if (b.hi) return std::to_string(b.lo) + ".." + std::to_string(*b.hi);
        return ">=" + std::to_string(b.lo);
    };
    out += "\nusers by train length          size   recall@10\n";
    for (const auto& b : r.user_buckets) {
        char line[128];
        std::snprintf(line, sizeof(line), "  %-26s %8d   %s\n", bucket_label(b).c_str(), b.size,
                      b.recall_at_10 ? fmt_double(*b.recall_at_10, "%.6f").c_str() : "-");
        out += line;
    }
    out += "\ntest items by train count      size   recall@10   permille\n";
    for (const auto& b : r.item_buckets) {
        char line[160];
        std::snprintf(line, sizeof(line), "  %-26s %8d   %-9s   %s\n", bucket_label(b).c_str(),
                      b.size, b.recall_at_10 ? fmt_double(*b.recall_at_10, "%.6f").c_str() : "-",
                      b.recall_at_10 ? fmt_double(*b.recall_at_10 * 1000.0, "%.3f").c_str() : "-");
        out += line;
    }
    return out;
}

void write_bucket_csv(std::span<const BucketStat> buckets, std::ostream& out) {
    out << "bucket_lo,bucket_hi,size,recall_at_10\n";
    for (const auto& b : buckets) {
        out << b.lo << ',';
        if (b.hi) out << *b.hi;
        out << ',' << b.size << ',';
        if (b.recall_at_10) out << fmt_double(*b.recall_at_10);
        out << '\n';
    }
}

}  // namespace iafmc
