#pragma once

/** \file corpus.hpp
 *  \brief Paper collection, gold labels and candidate pools.
 *
 * Corpus and label files are line-delimited JSON. A corpus line holds
 * `id`, `title`, `abstract`, `references`, `year`, `venue`, `role`; only
 * `id` and `title` are required. A label line holds `submission_id`,
 * `recommended` and `split`.
 */

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rmc/error.hpp"
#include "rmc/textproc.hpp"

namespace rmc {

enum class Role { Submission, Recommended, Extended };
enum class Split { Train, Val, Test };
enum class Scope { Core, Extended };

inline std::string_view to_string(Role role) {
    switch (role) {
        case Role::Submission: return "submission";
        case Role::Recommended: return "recommended";
        case Role::Extended: return "extended";
    }
    return "";
}

inline std::string_view to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "";
}

inline std::optional<Role> parse_role(std::string_view s) {
    if (s == "submission") return Role::Submission;
    if (s == "recommended") return Role::Recommended;
    if (s == "extended") return Role::Extended;
    return std::nullopt;
}

inline std::optional<Split> parse_split(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    return std::nullopt;
}

inline Scope parse_scope(std::string_view s) {
    if (s == "core") return Scope::Core;
    if (s == "extended") return Scope::Extended;
    throw Error(ErrorCode::InvalidArgument, "scope " + std::string(s));
}

struct PaperRecord {
    std::string id;
    std::string title;
    std::string abstract;
    std::vector<std::string> references;  // reference titles, in order
    std::optional<int> year;
    std::optional<std::string> venue;
    std::optional<Role> role;

    friend bool operator==(const PaperRecord&, const PaperRecord&) = default;
};

/// Id-keyed papers in insertion order. Immutable once loaded.
class Corpus {
public:
    void add(PaperRecord record) {
        if (record.id.empty()) throw Error(ErrorCode::MalformedRecord, "empty id");
        if (index_.contains(record.id)) throw Error(ErrorCode::DuplicateId, record.id);
        index_.emplace(record.id, records_.size());
        records_.push_back(std::move(record));
    }

    [[nodiscard]] const PaperRecord* find(std::string_view id) const {
        const auto it = index_.find(std::string(id));
        return it == index_.end() ? nullptr : &records_[it->second];
    }

    [[nodiscard]] const PaperRecord& at(std::string_view id) const {
        if (const auto* rec = find(id)) return *rec;
        throw Error(ErrorCode::UnknownPaper, std::string(id));
    }

    [[nodiscard]] bool contains(std::string_view id) const { return find(id) != nullptr; }
    [[nodiscard]] const std::vector<PaperRecord>& records() const noexcept { return records_; }
    [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
    [[nodiscard]] bool empty() const noexcept { return records_.empty(); }

    friend bool operator==(const Corpus& a, const Corpus& b) { return a.records_ == b.records_; }

private:
    std::vector<PaperRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct LabelEntry {
    std::string submission_id;
    std::vector<std::string> gold_ids;
    Split split = Split::Train;

    friend bool operator==(const LabelEntry&, const LabelEntry&) = default;
};

class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(std::vector<LabelEntry> entries) : entries_(std::move(entries)) {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (!by_submission_.emplace(entries_[i].submission_id, i).second) {
                throw Error(ErrorCode::DuplicateId, entries_[i].submission_id);
            }
        }
    }

    [[nodiscard]] const std::vector<LabelEntry>& entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

    [[nodiscard]] std::vector<const LabelEntry*> in_split(Split split) const {
        std::vector<const LabelEntry*> out;
        for (const auto& e : entries_) {
            if (e.split == split) out.push_back(&e);
        }
        return out;
    }

    [[nodiscard]] const LabelEntry* find(std::string_view submission_id) const {
        const auto it = by_submission_.find(std::string(submission_id));
        return it == by_submission_.end() ? nullptr : &entries_[it->second];
    }

private:
    std::vector<LabelEntry> entries_;
    std::unordered_map<std::string, std::size_t> by_submission_;
};

// ---------------------------------------------------------------------------
// JSON-lines I/O
// ---------------------------------------------------------------------------

namespace detail {

inline const nlohmann::json* optional_field(const nlohmann::json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return nullptr;
    return &*it;
}

inline std::string required_string(const nlohmann::json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw Error(ErrorCode::MalformedRecord, where + ": missing string field '" + key + "'");
    }
    return it->get<std::string>();
}

inline std::vector<std::string> string_array(const nlohmann::json& value, const char* key,
                                             const std::string& where) {
    if (!value.is_array()) {
        throw Error(ErrorCode::MalformedRecord, where + ": '" + key + "' is not an array");
    }
    std::vector<std::string> out;
    out.reserve(value.size());
    for (const auto& item : value) {
        if (!item.is_string()) {
            throw Error(ErrorCode::MalformedRecord, where + ": '" + key + "' holds a non-string");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

inline bool blank(std::string_view line) {
    return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    return out;
}

}  // namespace detail

/// Parses one record object. `where` names the location for error messages.
inline PaperRecord record_from_json(const nlohmann::json& obj, const std::string& where) {
    if (!obj.is_object()) throw Error(ErrorCode::MalformedRecord, where + ": not an object");
    PaperRecord rec;
    rec.id = detail::required_string(obj, "id", where);
    rec.title = detail::required_string(obj, "title", where);
    if (rec.id.empty()) throw Error(ErrorCode::MalformedRecord, where + ": empty id");
    if (rec.title.empty()) throw Error(ErrorCode::MalformedRecord, where + ": empty title");
    if (const auto* v = detail::optional_field(obj, "abstract")) {
        if (!v->is_string()) throw Error(ErrorCode::MalformedRecord, where + ": 'abstract' is not a string");
        rec.abstract = v->get<std::string>();
    }
    if (const auto* v = detail::optional_field(obj, "references")) {
        rec.references = detail::string_array(*v, "references", where);
    }
    if (const auto* v = detail::optional_field(obj, "year")) {
        if (!v->is_number_integer() || v->get<long long>() <= 0 || v->get<long long>() > 100000) {
            throw Error(ErrorCode::MalformedRecord, where + ": 'year' must be a positive integer");
        }
        rec.year = v->get<int>();
    }
    if (const auto* v = detail::optional_field(obj, "venue")) {
        if (!v->is_string()) throw Error(ErrorCode::MalformedRecord, where + ": 'venue' is not a string");
        rec.venue = v->get<std::string>();
    }
    if (const auto* v = detail::optional_field(obj, "role")) {
        const auto role = v->is_string() ? parse_role(v->get<std::string>()) : std::nullopt;
        if (!role) throw Error(ErrorCode::MalformedRecord, where + ": unknown role");
        rec.role = role;
    }
    return rec;
}

inline nlohmann::ordered_json record_to_json(const PaperRecord& rec) {
    nlohmann::ordered_json obj;
    obj["id"] = rec.id;
    obj["title"] = rec.title;
    obj["abstract"] = rec.abstract;
    obj["references"] = rec.references;
    obj["year"] = rec.year ? nlohmann::ordered_json(*rec.year) : nlohmann::ordered_json(nullptr);
    obj["venue"] = rec.venue ? nlohmann::ordered_json(*rec.venue) : nlohmann::ordered_json(nullptr);
    obj["role"] = rec.role ? nlohmann::ordered_json(to_string(*rec.role)) : nlohmann::ordered_json(nullptr);
    return obj;
}

inline Corpus read_corpus(std::istream& in) {
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::blank(line)) continue;
        const std::string where = "line " + std::to_string(line_no);
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            throw Error(ErrorCode::MalformedRecord, where + ": invalid syntax");
        }
        corpus.add(record_from_json(obj, where));
    }
    return corpus;
}

inline Corpus load_corpus(const std::string& path) {
    auto in = detail::open_input(path);
    return read_corpus(in);
}

inline void write_corpus(const Corpus& corpus, std::ostream& out) {
    for (const auto& rec : corpus.records()) out << record_to_json(rec).dump() << '\n';
}

inline void save_corpus(const Corpus& corpus, const std::string& path) {
    auto out = detail::open_output(path);
    write_corpus(corpus, out);
}

/// Parses and validates labels against `corpus`.
inline LabelSet read_labels(std::istream& in, const Corpus& corpus) {
    std::vector<LabelEntry> entries;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::blank(line)) continue;
        const std::string where = "line " + std::to_string(line_no);
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            throw Error(ErrorCode::MalformedRecord, where + ": invalid syntax");
        }
        if (!obj.is_object()) throw Error(ErrorCode::MalformedRecord, where + ": not an object");

        LabelEntry entry;
        entry.submission_id = detail::required_string(obj, "submission_id", where);
        const auto rec_it = obj.find("recommended");
        if (rec_it == obj.end()) throw Error(ErrorCode::MalformedRecord, where + ": missing 'recommended'");
        entry.gold_ids = detail::string_array(*rec_it, "recommended", where);
        if (entry.gold_ids.empty()) throw Error(ErrorCode::MalformedRecord, where + ": empty 'recommended'");
        const auto split_it = obj.find("split");
        if (split_it == obj.end() || !split_it->is_string()) {
            throw Error(ErrorCode::BadSplit, split_it == obj.end() ? "<missing>" : split_it->dump());
        }
        const auto split = parse_split(split_it->get<std::string>());
        if (!split) throw Error(ErrorCode::BadSplit, split_it->get<std::string>());
        entry.split = *split;

        if (!corpus.contains(entry.submission_id)) throw Error(ErrorCode::UnknownPaper, entry.submission_id);
        std::unordered_set<std::string> golds;
        for (const auto& gold : entry.gold_ids) {
            if (!corpus.contains(gold)) throw Error(ErrorCode::UnknownPaper, gold);
            if (gold == entry.submission_id) throw Error(ErrorCode::SelfGold, gold);
            if (!golds.insert(gold).second) throw Error(ErrorCode::DuplicateId, gold);
        }
        if (!seen.insert(entry.submission_id).second) throw Error(ErrorCode::DuplicateId, entry.submission_id);
        entries.push_back(std::move(entry));
    }
    return LabelSet(std::move(entries));
}

inline LabelSet load_labels(const std::string& path, const Corpus& corpus) {
    auto in = detail::open_input(path);
    return read_labels(in, corpus);
}

inline void write_labels(const LabelSet& labels, std::ostream& out) {
    for (const auto& e : labels.entries()) {
        nlohmann::ordered_json obj;
        obj["submission_id"] = e.submission_id;
        obj["recommended"] = e.gold_ids;
        obj["split"] = to_string(e.split);
        out << obj.dump() << '\n';
    }
}

inline void save_labels(const LabelSet& labels, const std::string& path) {
    auto out = detail::open_output(path);
    write_labels(labels, out);
}

// ---------------------------------------------------------------------------
// Candidate pools
// ---------------------------------------------------------------------------

using CandidateSet = std::vector<std::string>;

/// Every paper except the query, in corpus order. `Scope::Core` drops
/// records tagged `extended`; `exclude_cited` drops papers whose normalized
/// title equals a normalized reference title of the query. The query need
/// not be stored in the corpus.
inline CandidateSet candidate_pool(const Corpus& corpus, const PaperRecord& query, Scope scope,
                                   bool exclude_cited) {
    std::unordered_set<std::string> cited;
    if (exclude_cited) {
        for (const auto& ref : query.references) cited.insert(normalize_title(ref));
    }
    CandidateSet out;
    out.reserve(corpus.size());
    for (const auto& rec : corpus.records()) {
        if (rec.id == query.id) continue;
        if (scope == Scope::Core && rec.role == Role::Extended) continue;
        if (exclude_cited && cited.contains(normalize_title(rec.title))) continue;
        out.push_back(rec.id);
    }
    return out;
}

inline CandidateSet candidate_pool(const Corpus& corpus, std::string_view query_id, Scope scope,
                                   bool exclude_cited) {
    return candidate_pool(corpus, corpus.at(query_id), scope, exclude_cited);
}

/// Ids of records published at most `max_gap` years before `anchor_year`.
/// Records without a year are dropped.
inline std::vector<std::string> filter_by_year_gap(const Corpus& corpus, int anchor_year, int max_gap) {
    if (max_gap < 0) throw Error(ErrorCode::InvalidArgument, "max_gap " + std::to_string(max_gap));
    std::vector<std::string> out;
    for (const auto& rec : corpus.records()) {
        if (rec.year && anchor_year - *rec.year <= max_gap) out.push_back(rec.id);
    }
    return out;
}

}  // namespace rmc
