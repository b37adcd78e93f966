#include "iafmc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "iafmc/errors.hpp"

namespace iafmc {

namespace {

constexpr int dataset_format_version = 1;
constexpr const char* dataset_format_name = "iafmc-dataset";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

std::int64_t parse_timestamp(std::string_view s, long line_no) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("timestamp is not an integer: '" + std::string(s) + "'", line_no);
    return value;
}

double parse_rating(std::string_view s, long line_no) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("rating is not a number: '" + std::string(s) + "'", line_no);
    return value;
}

RawInteraction make_interaction(std::string_view user, std::string_view item,
                                std::string_view rating, std::string_view timestamp,
                                long line_no) {
    if (user.empty()) throw ParseError("empty user field", line_no);
    if (item.empty()) throw ParseError("empty item field", line_no);
    RawInteraction r;
    r.user_key = std::string(user);
    r.item_key = std::string(item);
    r.timestamp = parse_timestamp(timestamp, line_no);
    if (!rating.empty()) r.rating = parse_rating(rating, line_no);
    return r;
}

bool blank_line(std::string_view line) {
    return trim(line).empty();
}

}  // namespace

ColumnSpec ColumnSpec::parse(const std::string& comma_list) {
    ColumnSpec spec;
    for (auto f : split_fields(comma_list)) spec.fields.emplace_back(f);
    int users = 0, items = 0, ratings = 0, timestamps = 0;
    for (const auto& f : spec.fields) {
        if (f == "user") ++users;
        else if (f == "item") ++items;
        else if (f == "rating") ++ratings;
        else if (f == "timestamp") ++timestamps;
        else if (f == "skip") continue;
        else throw ConfigError("unknown column name '" + f + "'");
    }
    if (users != 1 || items != 1 || timestamps != 1 || ratings > 1)
        throw ConfigError("column spec needs user, item and timestamp exactly once "
                          "and rating at most once");
    return spec;
}

std::vector<RawInteraction> parse_interactions(std::istream& in) {
    std::vector<RawInteraction> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (blank_line(line)) continue;
        auto fields = split_fields(line);
        if (fields.size() == 3)
            out.push_back(make_interaction(fields[0], fields[1], {}, fields[2], line_no));
        else if (fields.size() == 4)
            out.push_back(make_interaction(fields[0], fields[1], fields[2], fields[3], line_no));
        else
            throw ParseError("expected 3 or 4 comma-separated fields, got " +
                             std::to_string(fields.size()), line_no);
    }
    return out;
}

std::vector<RawInteraction> parse_interactions(std::istream& in, const ColumnSpec& columns) {
    std::vector<RawInteraction> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (blank_line(line)) continue;
        auto fields = split_fields(line);
        if (fields.size() != columns.fields.size())
            throw ParseError("expected " + std::to_string(columns.fields.size()) +
                             " fields, got " + std::to_string(fields.size()), line_no);
        std::string_view user, item, rating, timestamp;
        for (std::size_t k = 0; k < fields.size(); ++k) {
            const auto& name = columns.fields[k];
            if (name == "user") user = fields[k];
            else if (name == "item") item = fields[k];
            else if (name == "rating") rating = fields[k];
            else if (name == "timestamp") timestamp = fields[k];
        }
        out.push_back(make_interaction(user, item, rating, timestamp, line_no));
    }
    return out;
}

std::int64_t Dataset::interaction_count() const {
    std::int64_t total = 0;
    for (const auto& s : sequences_) total += static_cast<std::int64_t>(s.size());
    return total;
}

void Dataset::check_user(int u) const {
    if (u < 0 || u >= n_) throw std::out_of_range("user index " + std::to_string(u) + " out of range");
}

const std::vector<int>& Dataset::sequence(int u) const {
    check_user(u);
    return sequences_[u];
}

int Dataset::train_len(int u) const {
    check_user(u);
    return train_lens_[u];
}

std::span<const int> Dataset::train_prefix(int u) const {
    check_user(u);
    return {sequences_[u].data(), static_cast<std::size_t>(train_lens_[u])};
}

int Dataset::validation_item(int u) const {
    check_user(u);
    return sequences_[u][train_lens_[u]];
}

int Dataset::test_item(int u) const {
    check_user(u);
    return sequences_[u][train_lens_[u] + 1];
}

const std::vector<int>& Dataset::train_items(int u) const {
    check_user(u);
    return train_items_[u];
}

bool Dataset::in_train(int u, int item) const {
    const auto& items = train_items(u);
    return std::binary_search(items.begin(), items.end(), item);
}

const std::string& Dataset::user_key(int u) const {
    check_user(u);
    return user_keys_[u];
}

const std::string& Dataset::item_key(int i) const {
    if (i < 0 || i >= m_) throw std::out_of_range("item index " + std::to_string(i) + " out of range");
    return item_keys_[i];
}

std::optional<int> Dataset::user_index(const std::string& key) const {
    auto it = user_idx_.find(key);
    if (it == user_idx_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> Dataset::item_index(const std::string& key) const {
    auto it = item_idx_.find(key);
    if (it == item_idx_.end()) return std::nullopt;
    return it->second;
}

void Dataset::finalize() {
    if (n_ <= 0 || m_ <= 0) throw DataError("dataset has no users or no items");
    if (static_cast<int>(sequences_.size()) != n_ || static_cast<int>(train_lens_.size()) != n_ ||
        static_cast<int>(user_keys_.size()) != n_ || static_cast<int>(item_keys_.size()) != m_)
        throw DataError("dataset field sizes are inconsistent");
    train_items_.assign(n_, {});
    for (int u = 0; u < n_; ++u) {
        const auto& seq = sequences_[u];
        if (seq.size() < 3)
            throw DataError("user " + std::to_string(u) + " has fewer than 3 interactions");
        if (train_lens_[u] != static_cast<int>(seq.size()) - 2)
            throw DataError("user " + std::to_string(u) + " has an inconsistent split");
        for (int item : seq)
            if (item < 0 || item >= m_)
                throw DataError("item index out of range in user " + std::to_string(u));
        auto& items = train_items_[u];
        items.assign(seq.begin(), seq.begin() + train_lens_[u]);
        std::sort(items.begin(), items.end());
        items.erase(std::unique(items.begin(), items.end()), items.end());
    }
    user_idx_.clear();
    item_idx_.clear();
    for (int u = 0; u < n_; ++u)
        if (!user_idx_.emplace(user_keys_[u], u).second)
            throw DataError("duplicate user key '" + user_keys_[u] + "'");
    for (int i = 0; i < m_; ++i)
        if (!item_idx_.emplace(item_keys_[i], i).second)
            throw DataError("duplicate item key '" + item_keys_[i] + "'");
}

Dataset build_dataset(const std::vector<RawInteraction>& raw, int min_user_interactions) {
    if (min_user_interactions < 3)
        throw ConfigError("min_user_interactions must be at least 3 (train/validation/test split)");

    std::unordered_map<std::string, std::int64_t> counts;
    for (const auto& r : raw) {
        if (r.user_key.empty() || r.item_key.empty())
            throw DataError("interaction with empty user or item key");
        ++counts[r.user_key];
    }

    // Users and items are indexed in first-appearance order over the retained
    // interactions.
    Dataset ds;
    for (const auto& r : raw) {
        if (counts[r.user_key] < min_user_interactions) continue;
        if (ds.user_idx_.emplace(r.user_key, ds.n_).second) {
            ds.user_keys_.push_back(r.user_key);
            ++ds.n_;
        }
        if (ds.item_idx_.emplace(r.item_key, ds.m_).second) {
            ds.item_keys_.push_back(r.item_key);
            ++ds.m_;
        }
    }
    if (ds.n_ == 0)
        throw DataError("no user has at least " + std::to_string(min_user_interactions) +
                        " interactions");

    std::vector<std::vector<std::pair<std::int64_t, int>>> per_user(ds.n_);
    for (const auto& r : raw) {
        auto uit = ds.user_idx_.find(r.user_key);
        if (uit == ds.user_idx_.end()) continue;
        per_user[uit->second].emplace_back(r.timestamp, ds.item_idx_.at(r.item_key));
    }

    ds.sequences_.resize(ds.n_);
    ds.train_lens_.resize(ds.n_);
    for (int u = 0; u < ds.n_; ++u) {
        auto& events = per_user[u];
        // Stable: equal timestamps keep input order.
        std::stable_sort(events.begin(), events.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        auto& seq = ds.sequences_[u];
        seq.reserve(events.size());
        for (const auto& [ts, item] : events) seq.push_back(item);
        ds.train_lens_[u] = static_cast<int>(seq.size()) - 2;
    }

    ds.finalize();
    return ds;
}

void serialize_dataset(const Dataset& ds, std::ostream& out) {
    nlohmann::json j;
    j["format"] = dataset_format_name;
    j["version"] = dataset_format_version;
    j["n"] = ds.user_count();
    j["m"] = ds.item_count();
    j["user_keys"] = nlohmann::json::array();
    for (int u = 0; u < ds.user_count(); ++u) j["user_keys"].push_back(ds.user_key(u));
    j["item_keys"] = nlohmann::json::array();
    for (int i = 0; i < ds.item_count(); ++i) j["item_keys"].push_back(ds.item_key(i));
    j["sequences"] = nlohmann::json::array();
    for (int u = 0; u < ds.user_count(); ++u) j["sequences"].push_back(ds.sequence(u));
    j["train_lens"] = nlohmann::json::array();
    for (int u = 0; u < ds.user_count(); ++u) j["train_lens"].push_back(ds.train_len(u));
    out << j.dump() << '\n';
}

Dataset deserialize_dataset(std::istream& in) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("dataset snapshot is not valid JSON: ") + e.what());
    }
    try {
        if (j.value("format", "") != dataset_format_name)
            throw LoadError("not a dataset snapshot");
        if (j.value("version", -1) != dataset_format_version)
            throw LoadError("unsupported dataset snapshot version");
        Dataset ds;
        ds.n_ = j.at("n").get<int>();
        ds.m_ = j.at("m").get<int>();
        ds.user_keys_ = j.at("user_keys").get<std::vector<std::string>>();
        ds.item_keys_ = j.at("item_keys").get<std::vector<std::string>>();
        ds.sequences_ = j.at("sequences").get<std::vector<std::vector<int>>>();
        ds.train_lens_ = j.at("train_lens").get<std::vector<int>>();
        ds.finalize();
        return ds;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("dataset snapshot missing fields: ") + e.what());
    } catch (const DataError& e) {
        throw LoadError(std::string("dataset snapshot invalid: ") + e.what());
    }
}

}  // namespace iafmc
