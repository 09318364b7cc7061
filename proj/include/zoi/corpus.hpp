#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "zoi/error.hpp"
#include "zoi/geo.hpp"
#include "zoi/store.hpp"
#include "zoi/text.hpp"

namespace zoi::corpus {

using Origin = store::Collection;

// One normalized row: position, reference text, and where it came from.
struct CorpusRecord {
    GeoPoint position;
    std::string text;
    Origin origin = Origin::tweet;
    std::uint64_t source_doc_id = 0;

    friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

// Closed lat/lon box. Antimeridian-crossing boxes are not representable.
class BoundingBox {
public:
    BoundingBox(double min_lat, double max_lat, double min_lon, double max_lon)
        : min_lat_(min_lat), max_lat_(max_lat), min_lon_(min_lon), max_lon_(max_lon) {
        for (double v : {min_lat, max_lat, min_lon, max_lon}) {
            if (!std::isfinite(v)) throw DomainError("bounding box bound is not finite");
        }
        if (min_lat > max_lat || min_lon > max_lon) {
            throw DomainError("bounding box requires min_lat <= max_lat and min_lon <= max_lon");
        }
    }

    bool contains(const GeoPoint& p) const noexcept {
        return p.lat_deg() >= min_lat_ && p.lat_deg() <= max_lat_ && p.lon_deg() >= min_lon_ &&
               p.lon_deg() <= max_lon_;
    }

    double min_lat() const noexcept { return min_lat_; }
    double max_lat() const noexcept { return max_lat_; }
    double min_lon() const noexcept { return min_lon_; }
    double max_lon() const noexcept { return max_lon_; }

private:
    double min_lat_, max_lat_, min_lon_, max_lon_;
};

// Aburrá and San Nicolás valleys.
inline BoundingBox study_area() { return BoundingBox(5.90, 6.60, -75.80, -75.10); }

enum class MatchMode { any, all };

class KeywordQuery {
public:
    explicit KeywordQuery(std::vector<std::string> terms, MatchMode mode = MatchMode::any)
        : terms_(std::move(terms)), mode_(mode) {
        if (terms_.empty()) {
            throw QueryError("keyword query needs at least one term");
        }
        for (auto& t : terms_) {
            t = std::string(text::trim(t));
            if (t.empty()) throw QueryError("keyword query term is empty");
            folded_.push_back(text::fold(t));
        }
    }

    const std::vector<std::string>& terms() const noexcept { return terms_; }
    MatchMode mode() const noexcept { return mode_; }

    // Accent-folded, case-insensitive substring match.
    bool matches_term(std::size_t i, std::string_view folded_text) const {
        return folded_text.find(folded_[i]) != std::string_view::npos;
    }

    bool matches(std::string_view raw_text) const {
        const std::string folded = text::fold(raw_text);
        if (mode_ == MatchMode::any) {
            for (std::size_t i = 0; i < folded_.size(); ++i)
                if (matches_term(i, folded)) return true;
            return false;
        }
        for (std::size_t i = 0; i < folded_.size(); ++i)
            if (!matches_term(i, folded)) return false;
        return true;
    }

private:
    std::vector<std::string> terms_;
    std::vector<std::string> folded_;
    MatchMode mode_;
};

// Tweets contribute (coordinates, text); photos (geo, name). Documents without
// a location are dropped.
inline std::optional<CorpusRecord> normalize(const store::StoredDocument& doc) {
    const auto location = store::document_location(doc.collection(), doc.body);
    if (!location) return std::nullopt;
    CorpusRecord rec;
    rec.position = *location;
    rec.origin = doc.collection();
    rec.source_doc_id = doc.doc_id.seq;
    rec.text = doc.body.at(doc.collection() == Origin::photo ? "name" : "text").get<std::string>();
    return rec;
}

// Tweets first, then photos, each in insertion order.
inline std::vector<CorpusRecord> load_corpus(const store::DocumentStore& db) {
    std::vector<CorpusRecord> out;
    for (auto c : {store::Collection::tweet, store::Collection::photo}) {
        db.scan(c, true, [&](const store::StoredDocument& d) {
            if (auto rec = normalize(d)) out.push_back(std::move(*rec));
        });
    }
    return out;
}

inline std::vector<CorpusRecord> filter_keywords(const std::vector<CorpusRecord>& records,
                                                 const KeywordQuery& query) {
    std::vector<CorpusRecord> kept;
    for (const auto& r : records) {
        if (query.matches(r.text)) kept.push_back(r);
    }
    return kept;
}

struct BboxPartition {
    std::vector<CorpusRecord> inside;
    std::vector<CorpusRecord> purged;
};

inline BboxPartition filter_bbox(const std::vector<CorpusRecord>& records, const BoundingBox& box) {
    BboxPartition out;
    for (const auto& r : records) {
        (box.contains(r.position) ? out.inside : out.purged).push_back(r);
    }
    return out;
}

// Drops repeats of (position, text, origin); the first occurrence wins.
inline std::vector<CorpusRecord> dedupe(const std::vector<CorpusRecord>& records) {
    std::set<std::tuple<double, double, std::string, Origin>> seen;
    std::vector<CorpusRecord> out;
    for (const auto& r : records) {
        if (seen.emplace(r.position.lat_deg(), r.position.lon_deg(), r.text, r.origin).second) {
            out.push_back(r);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV interchange: header "lat,lon,text,origin,source_doc_id", RFC 4180 quoting.

inline constexpr std::string_view kCsvHeader = "lat,lon,text,origin,source_doc_id";

inline std::string csv_quote(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline void write_csv(std::ostream& out, const std::vector<CorpusRecord>& records) {
    out << kCsvHeader << "\r\n";
    for (const auto& r : records) {
        out << text::format_double(r.position.lat_deg()) << ',' << text::format_double(r.position.lon_deg())
            << ',' << csv_quote(r.text) << ',' << store::to_string(r.origin) << ',' << r.source_doc_id
            << "\r\n";
    }
}

namespace detail {

// Splits RFC 4180 text into rows of fields. Accepts LF or CRLF line ends.
inline std::vector<std::vector<std::string>> parse_csv_rows(std::string_view data) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t i = 0;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };
    while (i < data.size()) {
        const char c = data[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < data.size() && data[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                in_quotes = false;
            } else {
                field += c;
            }
            ++i;
            continue;
        }
        if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == '"') {
            throw ParseError("CSV: stray quote inside unquoted field", i);
        } else if (c == ',') {
            end_field();
        } else if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') {
            end_row();
            ++i;
        } else if (c == '\n') {
            end_row();
        } else {
            field += c;
            field_started = true;
        }
        ++i;
    }
    if (in_quotes) throw ParseError("CSV: unterminated quoted field", data.size());
    if (field_started || !row.empty()) end_row();
    return rows;
}

inline double csv_number(const std::string& s, std::size_t row, const char* col) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw SchemaError(col, "CSV row " + std::to_string(row) + ": " + col + " is not a number");
    }
    return v;
}

}  // namespace detail

inline std::vector<CorpusRecord> read_csv(std::istream& in) {
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!text::is_valid_utf8(data)) throw ParseError("corpus CSV is not valid UTF-8");
    const auto rows = detail::parse_csv_rows(data);
    if (rows.empty()) throw SchemaError("header", "corpus CSV is empty");
    std::string header;
    for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
    if (header != kCsvHeader) {
        throw SchemaError("header", "corpus CSV header must be '" + std::string(kCsvHeader) + "'");
    }
    std::vector<CorpusRecord> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 5) {
            throw SchemaError("row", "CSV row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                                         " fields, expected 5");
        }
        CorpusRecord rec;
        try {
            rec.position = GeoPoint(detail::csv_number(row[0], r, "lat"), detail::csv_number(row[1], r, "lon"));
        } catch (const DomainError& e) {
            throw RangeError("CSV row " + std::to_string(r) + ": " + e.what());
        }
        rec.text = row[2];
        rec.origin = store::parse_collection(row[3]);
        const auto [ptr, ec] = std::from_chars(row[4].data(), row[4].data() + row[4].size(), rec.source_doc_id);
        if (ec != std::errc{} || ptr != row[4].data() + row[4].size() || row[4].empty()) {
            throw SchemaError("source_doc_id", "CSV row " + std::to_string(r) + ": bad source_doc_id");
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace zoi::corpus
