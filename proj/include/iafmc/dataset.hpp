#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace iafmc {

struct RawInteraction {
    std::string user_key;
    std::string item_key;
    std::int64_t timestamp = 0;
    std::optional<double> rating;  // parsed for completeness, ignored downstream
};

// Field layout of one CSV line. Names from {user,item,rating,timestamp,skip};
// user, item and timestamp must each appear exactly once, rating at most once.
struct ColumnSpec {
    std::vector<std::string> fields;
    static ColumnSpec parse(const std::string& comma_list);
};

// Default layout: user,item[,rating],timestamp (3 or 4 fields per line).
std::vector<RawInteraction> parse_interactions(std::istream& in);
std::vector<RawInteraction> parse_interactions(std::istream& in, const ColumnSpec& columns);

// Contiguously re-indexed users/items with per-user chronological sequences and
// the leave-one-out split: the last item of each sequence is the test item, the
// one before it the validation item, everything earlier the train prefix.
// Immutable after construction; safe to share across concurrent readers.
class Dataset {
public:
    int user_count() const { return n_; }
    int item_count() const { return m_; }
    std::int64_t interaction_count() const;

    const std::vector<int>& sequence(int u) const;
    int train_len(int u) const;
    std::span<const int> train_prefix(int u) const;
    int validation_item(int u) const;
    int test_item(int u) const;

    // Sorted distinct items of u's train prefix.
    const std::vector<int>& train_items(int u) const;
    bool in_train(int u, int item) const;

    const std::string& user_key(int u) const;
    const std::string& item_key(int i) const;
    std::optional<int> user_index(const std::string& key) const;
    std::optional<int> item_index(const std::string& key) const;

private:
    friend Dataset build_dataset(const std::vector<RawInteraction>&, int);
    friend Dataset deserialize_dataset(std::istream&);

    void check_user(int u) const;
    void finalize();  // derives train_items_ and validates invariants

    int n_ = 0;
    int m_ = 0;
    std::vector<std::vector<int>> sequences_;
    std::vector<int> train_lens_;
    std::vector<std::string> user_keys_;
    std::vector<std::string> item_keys_;
    std::unordered_map<std::string, int> user_idx_;
    std::unordered_map<std::string, int> item_idx_;
    std::vector<std::vector<int>> train_items_;
};

// Keeps users with at least min_user_interactions interactions, re-indexes the
// survivors and their items contiguously in first-appearance order, stably
// sorts each sequence by timestamp and records the leave-one-out split.
Dataset build_dataset(const std::vector<RawInteraction>& raw, int min_user_interactions = 5);

// Versioned JSON snapshot. Round trip is identity on all fields.
void serialize_dataset(const Dataset& ds, std::ostream& out);
Dataset deserialize_dataset(std::istream& in);

}  // namespace iafmc
