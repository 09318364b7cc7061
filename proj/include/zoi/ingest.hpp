#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include "zoi/error.hpp"
#include "zoi/geo.hpp"
#include "zoi/text.hpp"

namespace zoi::ingest {

struct RawTweet {
    std::optional<GeoPoint> coordinates;
    std::string source;
    std::string text;

    friend bool operator==(const RawTweet&, const RawTweet&) = default;
};

struct RawPhotoStub {
    std::string id;
    std::string owner;
    std::string title;
    bool is_public = false;

    friend bool operator==(const RawPhotoStub&, const RawPhotoStub&) = default;
};

struct PhotoSearchPage {
    std::int64_t page = 1;
    std::int64_t pages = 1;
    std::int64_t per_page = 1;
    std::int64_t total = 0;
    std::vector<RawPhotoStub> stubs;

    friend bool operator==(const PhotoSearchPage&, const PhotoSearchPage&) = default;
};

struct RawPhotoGeo {
    std::string photo_id;
    GeoPoint location;
    int accuracy = 1;

    friend bool operator==(const RawPhotoGeo&, const RawPhotoGeo&) = default;
};

inline constexpr int kMinAccuracy = 1;
inline constexpr int kMaxAccuracy = 16;

// ---------------------------------------------------------------------------
// Tweets

namespace detail {

inline double json_coordinate(const nlohmann::json& v, const char* field) {
    if (!v.is_number()) {
        throw SchemaError(field, std::string("coordinate '") + field + "' is not a number");
    }
    return v.get<double>();
}

inline std::string json_string_member(const nlohmann::json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return {};
    if (!it->is_string()) {
        throw SchemaError(key, std::string("'") + key + "' is not a string");
    }
    return it->get<std::string>();
}

}  // namespace detail

// Decodes a tweet. Only the GeoJSON "coordinates" block is read (array order
// [longitude, latitude]); the legacy "geo" member is ignored.
inline RawTweet parse_tweet(std::string_view payload) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(payload.begin(), payload.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed tweet JSON: ") + e.what(), e.byte);
    }
    if (!doc.is_object()) {
        throw SchemaError("", "tweet payload is not a JSON object");
    }

    RawTweet tweet;
    tweet.source = detail::json_string_member(doc, "source");
    tweet.text = detail::json_string_member(doc, "text");

    const auto coords = doc.find("coordinates");
    if (coords == doc.end() || coords->is_null()) {
        return tweet;
    }
    if (!coords->is_object()) {
        throw SchemaError("coordinates", "'coordinates' is not an object");
    }
    const auto type = coords->find("type");
    if (type == coords->end() || !type->is_string() || type->get<std::string>() != "Point") {
        throw SchemaError("coordinates.type", "coordinates type is not \"Point\"");
    }
    const auto arr = coords->find("coordinates");
    if (arr == coords->end() || !arr->is_array() || arr->size() != 2) {
        throw SchemaError("coordinates.coordinates",
                          "Point coordinates must be an array of exactly 2 numbers");
    }
    const double lon = detail::json_coordinate((*arr)[0], "longitude");
    const double lat = detail::json_coordinate((*arr)[1], "latitude");
    try {
        tweet.coordinates = GeoPoint(lat, lon);
    } catch (const DomainError& e) {
        throw RangeError(std::string("tweet coordinates: ") + e.what());
    }
    return tweet;
}

// Canonical JSON form of a tweet, readable by parse_tweet.
inline nlohmann::json to_json(const RawTweet& tweet) {
    nlohmann::json out;
    if (tweet.coordinates) {
        out["coordinates"] = {
            {"coordinates", {tweet.coordinates->lon_deg(), tweet.coordinates->lat_deg()}},
            {"type", "Point"}};
    } else {
        out["coordinates"] = nullptr;
    }
    out["source"] = tweet.source;
    out["text"] = tweet.text;
    return out;
}

// ---------------------------------------------------------------------------
// Flickr XML entities

namespace detail {

using boost::property_tree::ptree;

inline ptree read_xml(std::string_view payload) {
    if (!text::is_valid_utf8(payload)) {
        throw ParseError("XML payload is not valid UTF-8");
    }
    std::istringstream in{std::string(payload)};
    ptree tree;
    try {
        boost::property_tree::read_xml(in, tree);
    } catch (const boost::property_tree::xml_parser_error& e) {
        throw ParseError("malformed XML at line " + std::to_string(e.line()) + ": " + e.message());
    }
    return tree;
}

// Flickr wraps responses in <rsp stat="ok">; accept both wrapped and bare.
inline const ptree& root_element(const ptree& doc, const char* name) {
    if (auto bare = doc.get_child_optional(name)) return *bare;
    if (auto rsp = doc.get_child_optional("rsp")) {
        if (auto inner = rsp->get_child_optional(name)) return *inner;
    }
    throw SchemaError(name, std::string("missing <") + name + "> element");
}

inline std::optional<std::string> attribute(const ptree& element, const std::string& name) {
    if (auto attrs = element.get_child_optional("<xmlattr>")) {
        if (auto v = attrs->get_optional<std::string>(name)) return *v;
    }
    return std::nullopt;
}

inline std::string required_attribute(const ptree& element, const std::string& name) {
    auto v = attribute(element, name);
    if (!v) {
        throw SchemaError(name, "missing required attribute \"" + name + "\"");
    }
    return *v;
}

template <typename Int>
Int parse_integer(const std::string& raw, const std::string& name) {
    const std::string_view s = text::trim(raw);
    Int value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw SchemaError(name, "attribute \"" + name + "\" is not an integer: '" + raw + "'");
    }
    return value;
}

inline double parse_decimal(const std::string& raw, const std::string& name) {
    const std::string_view s = text::trim(raw);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw SchemaError(name, "attribute \"" + name + "\" is not a decimal number: '" + raw + "'");
    }
    return value;
}

inline bool parse_flag(const std::optional<std::string>& raw, const std::string& name) {
    if (!raw) return false;
    const auto v = parse_integer<int>(*raw, name);
    if (v != 0 && v != 1) {
        throw SchemaError(name, "attribute \"" + name + "\" must be 0 or 1");
    }
    return v == 1;
}

}  // namespace detail

inline PhotoSearchPage parse_photo_search(std::string_view payload) {
    using detail::parse_integer;
    using detail::required_attribute;
    const auto doc = detail::read_xml(payload);
    const auto& photos = detail::root_element(doc, "photos");

    PhotoSearchPage page;
    page.page = parse_integer<std::int64_t>(required_attribute(photos, "page"), "page");
    page.pages = parse_integer<std::int64_t>(required_attribute(photos, "pages"), "pages");
    page.per_page = parse_integer<std::int64_t>(required_attribute(photos, "perpage"), "perpage");
    page.total = parse_integer<std::int64_t>(required_attribute(photos, "total"), "total");
    if (page.page < 1 || page.pages < 1 || page.per_page < 1) {
        throw RangeError("page, pages and perpage must be positive");
    }
    if (page.total < 0) {
        throw RangeError("total must be non-negative");
    }
    if (page.page > page.pages) {
        throw RangeError("page " + std::to_string(page.page) + " exceeds pages " +
                         std::to_string(page.pages));
    }

    for (const auto& [tag, child] : photos) {
        if (tag != "photo") continue;
        RawPhotoStub stub;
        stub.id = required_attribute(child, "id");
        if (text::trim(stub.id).empty()) {
            throw SchemaError("id", "photo attribute \"id\" is empty");
        }
        stub.owner = detail::attribute(child, "owner").value_or("");
        stub.title = detail::attribute(child, "title").value_or("");
        stub.is_public = detail::parse_flag(detail::attribute(child, "ispublic"), "ispublic");
        page.stubs.push_back(std::move(stub));
    }
    if (static_cast<std::int64_t>(page.stubs.size()) > page.per_page) {
        throw RangeError("page holds " + std::to_string(page.stubs.size()) +
                         " photos but perpage is " + std::to_string(page.per_page));
    }
    return page;
}

inline RawPhotoGeo parse_photo_geo(std::string_view payload) {
    using detail::required_attribute;
    const auto doc = detail::read_xml(payload);
    const auto& photo = detail::root_element(doc, "photo");

    RawPhotoGeo geo;
    geo.photo_id = required_attribute(photo, "id");
    if (text::trim(geo.photo_id).empty()) {
        throw SchemaError("id", "photo attribute \"id\" is empty");
    }
    const auto location = photo.get_child_optional("location");
    if (!location) {
        throw SchemaError("location", "missing <location> element");
    }
    const double lat = detail::parse_decimal(required_attribute(*location, "latitude"), "latitude");
    const double lon = detail::parse_decimal(required_attribute(*location, "longitude"), "longitude");
    geo.accuracy = detail::parse_integer<int>(required_attribute(*location, "accuracy"), "accuracy");
    if (geo.accuracy < kMinAccuracy || geo.accuracy > kMaxAccuracy) {
        throw RangeError("accuracy " + std::to_string(geo.accuracy) + " outside [1, 16]");
    }
    try {
        geo.location = GeoPoint(lat, lon);
    } catch (const DomainError& e) {
        throw RangeError(std::string("photo location: ") + e.what());
    }
    return geo;
}

// ---------------------------------------------------------------------------
// Replay of fixture directories (stand-in for the live streaming/REST APIs)

enum class SourceKind { tweet, photo };

inline std::string_view to_string(SourceKind kind) {
    return kind == SourceKind::tweet ? "tweet" : "photo";
}

inline SourceKind parse_source_kind(std::string_view s) {
    if (s == "tweet") return SourceKind::tweet;
    if (s == "photo") return SourceKind::photo;
    throw ConfigError("unknown source kind '" + std::string(s) + "' (expected tweet or photo)");
}

using Payload = std::variant<RawTweet, PhotoSearchPage, RawPhotoGeo>;

struct ReplayRecord {
    std::string filename;
    Payload payload;
};

struct ReplayFailure {
    std::string filename;
    std::string message;
};

struct ReplaySummary {
    std::size_t parsed = 0;
    std::size_t skipped = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IoError("read failed for " + path.string());
    }
    return buf.str();
}

// Photo files hold either a search page (<photos>) or a geo entity (<photo>).
inline Payload parse_photo_payload(std::string_view payload) {
    const auto doc = detail::read_xml(payload);
    const bool wrapped = doc.get_child_optional("rsp").has_value();
    const auto& top = wrapped ? doc.get_child("rsp") : doc;
    if (top.get_child_optional("photos")) return parse_photo_search(payload);
    if (top.get_child_optional("photo")) return parse_photo_geo(payload);
    throw SchemaError("photo", "XML root is neither <photos> nor <photo>");
}

// Yields parsed records in lexicographic filename order. A file that fails to
// parse is recorded in failures() and skipped.
class ReplaySource {
public:
    ReplaySource(const std::filesystem::path& directory, SourceKind kind) : kind_(kind) {
        std::error_code ec;
        std::filesystem::directory_iterator it(directory, ec);
        if (ec) {
            throw IoError("cannot read directory " + directory.string() + ": " + ec.message());
        }
        for (const auto& entry : it) {
            if (entry.is_regular_file()) files_.push_back(entry.path());
        }
        std::sort(files_.begin(), files_.end(),
                  [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
    }

    std::optional<ReplayRecord> next() {
        while (cursor_ < files_.size()) {
            const auto& path = files_[cursor_++];
            const std::string name = path.filename().string();
            try {
                const std::string bytes = read_file(path);
                Payload payload = kind_ == SourceKind::tweet ? Payload{parse_tweet(bytes)}
                                                             : parse_photo_payload(bytes);
                ++summary_.parsed;
                return ReplayRecord{name, std::move(payload)};
            } catch (const Error& e) {
                ++summary_.skipped;
                failures_.push_back({name, e.what()});
            }
        }
        return std::nullopt;
    }

    const ReplaySummary& summary() const noexcept { return summary_; }
    const std::vector<ReplayFailure>& failures() const noexcept { return failures_; }
    SourceKind kind() const noexcept { return kind_; }

private:
    SourceKind kind_;
    std::vector<std::filesystem::path> files_;
    std::size_t cursor_ = 0;
    ReplaySummary summary_;
    std::vector<ReplayFailure> failures_;
};

}  // namespace zoi::ingest
