#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iafmc/model.hpp"

namespace iafmc {

enum class Split { validation, test };

const char* split_name(Split s);
Split split_from_name(std::string_view name);

// Bucket upper bounds (inclusive); the last bucket is open-ended.
struct GroupingConfig {
    std::vector<std::int64_t> user_len_edges{7, 20};
    std::vector<std::int64_t> item_count_edges{3, 10};
};

struct BucketStat {
    std::int64_t lo = 0;
    std::optional<std::int64_t> hi;  // empty = unbounded
    int size = 0;
    std::optional<double> recall_at_10;  // empty for empty buckets
};

struct EvalReport {
    Split split = Split::test;
    std::vector<int> ns;
    std::map<int, double> recall;
    std::map<int, double> ndcg;
    std::vector<std::optional<int>> hit_ranks;  // per user, 1-based; empty optional = miss
    std::vector<BucketStat> user_buckets;       // by train-prefix length
    std::vector<BucketStat> item_buckets;       // by target item's train interaction count
    int skipped_users = 0;
};

// Fraction of users whose held-out item ranks within the top N.
double recall_at_n(std::span<const std::optional<int>> hit_ranks, int n);

// Mean over users of 1/log2(rank+1) for ranks within the top N, zero otherwise.
double ndcg_at_n(std::span<const std::optional<int>> hit_ranks, int n);

// Buckets hit ranks by user train length and by target-item train count and
// computes per-bucket Recall@10.
std::vector<BucketStat> group_by_value(std::span<const std::optional<int>> hit_ranks,
                                       std::span<const std::int64_t> values,
                                       std::span<const std::int64_t> edges);

// Ranks the full candidate complement I \ I_u^train for every user with the
// train-only history, extracts the held-out item's rank and aggregates the
// metrics for each N. Reads a frozen model; never mutates anything.
EvalReport evaluate_split(const ModelParams& p, const Dataset& ds, const AssociationGraph& g,
                          Split split, std::span<const int> ns, double alpha, double beta,
                          const GroupingConfig& grouping = {});

std::string report_json(const EvalReport& r);
std::string report_text(const EvalReport& r);
void write_bucket_csv(std::span<const BucketStat> buckets, std::ostream& out);

}  // namespace iafmc
